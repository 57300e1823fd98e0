//! Graded tensor grids in Fermi coordinates `(z, r)` about the centers'
//! axis, and interpolation of node data.
//!
//! Each axis is an odd analytic map `x = X(σ)` of a computational
//! coordinate with nodes at integer `σ`. The spacing `X'(σ)` switches
//! between constant levels through smooth `tanh` steps, so every level of
//! refinement (`σ → σ/2^ℓ`) samples the same map.

use crate::error::{ConfigError, Result};
use crate::hypgeom::axial_distance;
use serde::{Deserialize, Serialize};

fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Step {
    /// Step center in σ.
    at: f64,
    /// Spacing change across the step.
    jump: f64,
}

/// Odd map `X(σ)` with `X'` even, piecewise nearly constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappedAxis {
    h0: f64,
    steps: Vec<Step>,
    width: f64,
    scale: f64,
    /// Refinement factor `2^level`.
    refine: f64,
    /// Largest node index (nodes at σ ∈ [0, n] or [−n, n]).
    pub n: usize,
    pub extent: f64,
}

/// Transition width of the spacing steps, in level-0 nodes.
const STEP_WIDTH: f64 = 3.0;

impl MappedAxis {
    /// Spacing `h0` from 0, switching to `h_i` at `x_i` for each
    /// `(x_i, h_i)` in `breaks`, covering `[0, extent]`.
    pub fn new(h0: f64, breaks: &[(f64, f64)], extent: f64, level: u32) -> Self {
        let mut steps = Vec::new();
        let (mut a, mut x, mut h) = (0.0, 0.0, h0);
        for &(xb, hb) in breaks {
            if xb <= x || xb >= extent {
                continue;
            }
            a += (xb - x) / h;
            steps.push(Step { at: a, jump: hb - h });
            x = xb;
            h = hb;
        }
        let mut axis = MappedAxis { h0, steps, width: STEP_WIDTH, scale: 1.0, refine: 1.0, n: 0, extent };
        let mut n0 = 1usize;
        while axis.raw(n0 as f64) < extent {
            n0 += 1;
        }
        axis.scale = extent / axis.raw(n0 as f64);
        axis.refine = (1u64 << level) as f64;
        axis.n = n0 << level;
        axis
    }

    /// Unscaled level-0 map.
    fn raw(&self, s: f64) -> f64 {
        let b = self.width;
        let mut x = self.h0 * s;
        for st in &self.steps {
            x += st.jump * (s + 0.5 * b * (ln_cosh((s - st.at) / b) - ln_cosh((s + st.at) / b)));
        }
        x
    }

    fn raw_d(&self, s: f64) -> (f64, f64) {
        let b = self.width;
        let mut d1 = self.h0;
        let mut d2 = 0.0;
        for st in &self.steps {
            let (tm, tp) = (((s - st.at) / b).tanh(), ((s + st.at) / b).tanh());
            d1 += st.jump * (1.0 + 0.5 * (tm - tp));
            d2 += st.jump * 0.5 / b * ((1.0 - tm * tm) - (1.0 - tp * tp));
        }
        (d1, d2)
    }

    /// `X(σ)`.
    pub fn x(&self, sigma: f64) -> f64 {
        self.scale * self.raw(sigma / self.refine)
    }

    /// `(X', X'')` at `σ`.
    pub fn dx(&self, sigma: f64) -> (f64, f64) {
        let (d1, d2) = self.raw_d(sigma / self.refine);
        (self.scale * d1 / self.refine, self.scale * d2 / (self.refine * self.refine))
    }

    /// `X^{-1}(x)` by safeguarded Newton.
    pub fn sigma(&self, x: f64) -> f64 {
        let sign = x.signum();
        let x = x.abs();
        let (mut lo, mut hi) = (0.0, self.n as f64);
        while self.x(hi) < x {
            lo = hi;
            hi *= 2.0;
        }
        let mut s = lo + (hi - lo) * (x - self.x(lo)) / (self.x(hi) - self.x(lo)).max(1e-300);
        for _ in 0..100 {
            let f = self.x(s) - x;
            if f > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let mut next = s - f / self.dx(s).0;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - s).abs() < 1e-14 * s.abs().max(1.0) {
                s = next;
                break;
            }
            s = next;
        }
        sign * s
    }
}

/// Resolution controls for the solver grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// Spacing near the centers.
    pub h_fine: f64,
    /// Half-width of the fine block around each center (z and r).
    pub fine_radius: f64,
    /// Distance beyond the outermost center where the medium band ends.
    pub medium_reach: f64,
    /// Refinement level: spacings are divided by `2^level`.
    pub level: u32,
    /// Node budget; larger grids are rejected.
    pub node_budget: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { h_fine: 0.04, fine_radius: 1.6, medium_reach: 2.5, level: 0, node_budget: 400_000 }
    }
}

/// Tensor grid: `z` nodes at `σ ∈ [−n_z, n_z]`, `r` nodes at `σ ∈ [0, n_r]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxialGrid {
    pub za: MappedAxis,
    pub ra: MappedAxis,
    pub z: Vec<f64>,
    pub r: Vec<f64>,
    /// `(X', X'')` per node along each axis.
    pub dz: Vec<(f64, f64)>,
    pub dr: Vec<(f64, f64)>,
    /// Radius of the box, also the largest ball about the midpoint.
    pub rho_max: f64,
}

impl AxialGrid {
    /// Grid for centers at axial positions `centers_z`, box half-width
    /// `rho_max`.
    pub fn new(centers_z: &[f64], rho_max: f64, spec: &GridSpec) -> Result<Self> {
        let hf = spec.h_fine;
        let (hm, hc) = (2.0 * hf, 4.0 * hf);
        let fr = spec.fine_radius;
        // desired spacing on z ≥ 0: fine near |z_k|, medium in between and
        // out to the medium reach, coarse beyond
        let mut fine: Vec<(f64, f64)> =
            centers_z.iter().map(|&c| ((c.abs() - fr).max(0.0), c.abs() + fr)).collect();
        fine.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for iv in fine {
            match merged.last_mut() {
                Some(last) if iv.0 <= last.1 + 2.0 * hm => last.1 = last.1.max(iv.1),
                _ => merged.push(iv),
            }
        }
        let outer = centers_z.iter().fold(0.0f64, |m, c| m.max(c.abs())) + spec.medium_reach;
        let mut breaks = Vec::new();
        let h0 = if merged.first().is_some_and(|iv| iv.0 == 0.0) { hf } else { hm };
        for iv in &merged {
            if iv.0 > 0.0 {
                breaks.push((iv.0, hf));
            }
            breaks.push((iv.1, hm));
        }
        breaks.push((outer.max(merged.last().map_or(0.0, |iv| iv.1) + 4.0 * hm), hc));
        let za = MappedAxis::new(h0, &breaks, rho_max, spec.level);
        let ra = MappedAxis::new(hf, &[(fr, hm), (fr + 1.5, hc)], rho_max, spec.level);
        let nodes = (2 * za.n + 1) * (ra.n + 1);
        if nodes > spec.node_budget {
            return Err(ConfigError::NodeBudget { nodes, budget: spec.node_budget }.into());
        }
        Ok(Self::from_axes(za, ra, rho_max))
    }

    pub fn from_axes(za: MappedAxis, ra: MappedAxis, rho_max: f64) -> Self {
        let nz = za.n as i64;
        let z: Vec<f64> = (-nz..=nz).map(|s| za.x(s as f64)).collect();
        let dz: Vec<(f64, f64)> = (-nz..=nz).map(|s| za.dx(s as f64)).collect();
        let r: Vec<f64> = (0..=ra.n).map(|s| ra.x(s as f64)).collect();
        let dr: Vec<(f64, f64)> = (0..=ra.n).map(|s| ra.dx(s as f64)).collect();
        AxialGrid { za, ra, z, r, dz, dr, rho_max }
    }

    pub fn nz(&self) -> usize {
        self.z.len()
    }

    pub fn nr(&self) -> usize {
        self.r.len()
    }

    pub fn len(&self) -> usize {
        self.nz() * self.nr()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn idx(&self, iz: usize, ir: usize) -> usize {
        iz * self.nr() + ir
    }

    pub fn coords(&self, i: usize) -> (f64, f64) {
        (self.z[i / self.nr()], self.r[i % self.nr()])
    }

    /// Distance from the configuration midpoint `(0, 0)`.
    pub fn rho_mid(&self, i: usize) -> f64 {
        let (z, r) = self.coords(i);
        axial_distance(z, r, 0.0)
    }

    /// Fractional node indices `(iz, ir)` of a point.
    pub fn locate(&self, z: f64, r: f64) -> (f64, f64) {
        (self.za.sigma(z) + self.za.n as f64, self.ra.sigma(r))
    }

    /// Catmull-Rom bicubic interpolation of node data `f` with its
    /// `(∂z, ∂r)` gradient. Data is taken even in `r` across the axis and
    /// clamped at the box edges.
    pub fn interpolate(&self, f: &[f64], z: f64, r: f64) -> (f64, f64, f64) {
        let (sz, sr) = self.locate(z, r.abs());
        let nz = self.nz() as i64;
        let nr = self.nr() as i64;
        let iz0 = (sz.floor() as i64).clamp(0, nz - 2);
        let ir0 = (sr.floor() as i64).clamp(0, nr - 2);
        let (tz, tr) = (sz - iz0 as f64, sr - ir0 as f64);
        let wz = catmull_rom(tz);
        let wr = catmull_rom(tr);
        let mut out = [0.0; 3];
        for (a, (cz, dcz)) in wz.iter().enumerate() {
            let jz = (iz0 - 1 + a as i64).clamp(0, nz - 1) as usize;
            for (b, (cr, dcr)) in wr.iter().enumerate() {
                let mut jr = ir0 - 1 + b as i64;
                if jr < 0 {
                    jr = -jr;
                }
                let v = f[self.idx(jz, jr.min(nr - 1) as usize)];
                out[0] += cz * cr * v;
                out[1] += dcz * cr * v;
                out[2] += cz * dcr * v;
            }
        }
        let dzs = self.za.dx(sz - self.za.n as f64).0;
        let drs = self.ra.dx(sr).0;
        let sgn = if r < 0.0 { -1.0 } else { 1.0 };
        (out[0], out[1] / dzs, sgn * out[2] / drs)
    }

    /// Whether `(z, r)` lies inside the box.
    pub fn contains(&self, z: f64, r: f64) -> bool {
        z.abs() <= self.rho_max && r.abs() <= self.rho_max
    }
}

/// Catmull-Rom weights and their derivatives for the four points around
/// `t ∈ [0, 1]`.
fn catmull_rom(t: f64) -> [(f64, f64); 4] {
    let (t2, t3) = (t * t, t * t * t);
    [
        (0.5 * (-t3 + 2.0 * t2 - t), 0.5 * (-3.0 * t2 + 4.0 * t - 1.0)),
        (0.5 * (3.0 * t3 - 5.0 * t2 + 2.0), 0.5 * (9.0 * t2 - 10.0 * t)),
        (0.5 * (-3.0 * t3 + 4.0 * t2 + t), 0.5 * (-9.0 * t2 + 8.0 * t + 1.0)),
        (0.5 * (t3 - t2), 0.5 * (3.0 * t2 - 2.0 * t)),
    ]
}
