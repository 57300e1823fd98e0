//! Spherically symmetric seed conformal factors `w(ρ)` on hyperbolic space.
//!
//! The exterior is anti-de Sitter–Schwarzschild written conformally to the
//! hyperbolic metric: with `V = 1 + r² − 2m/r`,
//! `ln tanh(ρ/2) = −∫_r^∞ ds / (s√V)` and `w = √(r / sinh ρ)`.
//! Inside the horizon `ρ_h` an even polynomial cap continues `w` to the
//! origin, and an optional dip `1 − amp·bump(ρ)` just outside `ρ_h` bends the
//! mean curvature of coordinate spheres up through `+2`.
//!
//! Profiles store `w − 1` rather than `w` so that far-field values near
//! `e^{−3ρ}` keep full relative precision.

use crate::error::{Error, Result};
use crate::quad::integrate;
use serde::{Deserialize, Serialize};

/// Parameters of the cap-and-dip family. Missing fields deserialize to the
/// hyperbolic values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeedParams {
    /// AdS–Schwarzschild mass parameter.
    pub m: f64,
    /// `w(0) − w(ρ_h)`.
    pub cap_depth: f64,
    pub dip_amp: f64,
    pub dip_window: (f64, f64),
    /// Radius `δ` of the ball expected to contain the CMC spheres.
    pub delta: f64,
}

impl Default for SeedParams {
    fn default() -> Self {
        SeedParams::hyperbolic()
    }
}

impl SeedParams {
    pub fn hyperbolic() -> Self {
        SeedParams { m: 0.0, cap_depth: 0.0, dip_amp: 0.0, dip_window: (0.0, 0.0), delta: 1.0 }
    }

    pub fn exterior(m: f64) -> Self {
        SeedParams { m, cap_depth: 0.0, dip_amp: 0.0, dip_window: (0.0, 0.0), delta: 1.0 }
    }

    fn check(&self, rho_h: f64) -> Result<()> {
        let bad = |s: String| Err(Error::SeedParams(s));
        if !(self.m >= 0.0 && self.m.is_finite()) {
            return bad(format!("m must be finite and nonnegative, got {}", self.m));
        }
        if !self.cap_depth.is_finite() || !self.dip_amp.is_finite() || !(self.delta > 0.0) {
            return bad("cap_depth, dip_amp and delta must be finite, delta positive".into());
        }
        if self.m == 0.0 && self.cap_depth != 0.0 {
            return bad("a cap needs a horizon (m > 0)".into());
        }
        if self.dip_amp < 0.0 {
            return bad(format!("dip_amp must be nonnegative, got {}", self.dip_amp));
        }
        if self.dip_amp > 0.0 {
            let (lo, hi) = self.dip_window;
            if !(lo < hi) {
                return bad(format!("dip window ({lo}, {hi}) is empty"));
            }
            if lo < rho_h {
                return bad(format!("dip window starts at {lo}, inside the cap (rho_h = {rho_h})"));
            }
            if hi > self.delta {
                return bad(format!("dip window ends at {hi}, beyond delta = {}", self.delta));
            }
        }
        Ok(())
    }
}

/// AdS–Schwarzschild exterior in hyperbolic polar coordinates.
#[derive(Debug, Clone, Copy)]
pub struct AdsSchwarzschild {
    pub m: f64,
    pub r_h: f64,
    pub rho_h: f64,
    /// `∫_{r_h+1}^∞ ds/(s√V)`.
    i_far: f64,
}

/// Exterior state at one radius.
#[derive(Debug, Clone, Copy)]
struct ExtState {
    rho: f64,
    dev: f64,
    d1: f64,
    d2: f64,
}

const QUAD_REL: f64 = 1e-14;

/// Positive root of `r³ + r − 2m`.
pub fn horizon_radius(m: f64) -> f64 {
    if m <= 0.0 {
        return 0.0;
    }
    // f is increasing and convex on r > 0; Newton from an upper bound
    // descends monotonically.
    let mut r = (2.0 * m).min((2.0 * m).cbrt());
    for _ in 0..100 {
        let f = r * r * r + r - 2.0 * m;
        let step = f / (3.0 * r * r + 1.0);
        r -= step;
        if step.abs() <= 1e-16 * r {
            break;
        }
    }
    r
}

impl AdsSchwarzschild {
    pub fn new(m: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::SeedParams(format!("exterior needs m > 0, got {m}")));
        }
        let r_h = horizon_radius(m);
        let mut ext = AdsSchwarzschild { m, r_h, rho_h: 0.0, i_far: 0.0 };
        ext.i_far = ext.far_integral(1.0 / (r_h + 1.0))?.0;
        let i_h = ext.i_far + ext.near_integral(0.0)?;
        ext.rho_h = -(0.5 * i_h).tanh().ln();
        Ok(ext)
    }

    fn q(&self, r: f64) -> f64 {
        r * r + r * self.r_h + self.r_h * self.r_h + 1.0
    }

    /// `∫_{r_h+t²}^{r_h+1} ds/(s√V)` via `s = r_h + t'²`.
    fn near_integral(&self, t: f64) -> Result<f64> {
        let f = |tt: f64| {
            let s = self.r_h + tt * tt;
            2.0 / (s * self.q(s)).sqrt()
        };
        integrate(f, t, 1.0, 1e-300, QUAD_REL)
    }

    /// Returns `(I, J)` with `I = ∫_0^ε du/√(1 + u² − 2mu³) = asinh ε + J`,
    /// `ε = 1/r`. `J` is the part due to `m` and is integrated directly.
    fn far_integral(&self, eps: f64) -> Result<(f64, f64)> {
        let m = self.m;
        let f = |u: f64| {
            let a = (1.0 + u * u).sqrt();
            let b = (1.0 + u * u - 2.0 * m * u * u * u).sqrt();
            2.0 * m * u * u * u / (a * b * (a + b))
        };
        let j = integrate(f, 0.0, eps, 1e-300, QUAD_REL)?;
        Ok((eps.asinh() + j, j))
    }

    /// State at `r = r_h + t²`.
    fn state_at_t(&self, t: f64) -> Result<ExtState> {
        let r = self.r_h + t * t;
        let m = self.m;
        if t <= 1.0 {
            let i = self.i_far + self.near_integral(t)?;
            let (sh, ch) = (i.sinh(), i.cosh());
            let w = (r * sh).sqrt();
            let sqrt_v = t * (self.q(r) / r).sqrt();
            let lw1 = 0.5 * (sqrt_v * sh - ch);
            let d1 = w * lw1;
            let d2 = 0.75 * w * (w.powi(4) - 1.0) - 2.0 * ch * d1;
            Ok(ExtState { rho: -(0.5 * i).tanh().ln(), dev: w - 1.0, d1, d2 })
        } else {
            let eps = 1.0 / r;
            let (i, j) = self.far_integral(eps)?;
            let sh = i.sinh();
            let ch = i.cosh();
            // r sinh(asinh ε + J) = cosh J + r√(1 + ε²) sinh J
            let w2m1 = 2.0 * (0.5 * j).sinh().powi(2) + r * (1.0 + eps * eps).sqrt() * j.sinh();
            let w = (1.0 + w2m1).sqrt();
            let dev = w2m1 / (w + 1.0);
            let w4m1 = w2m1 * (w * w + 1.0);
            let sqrt_v = (1.0 + r * r - 2.0 * m / r).sqrt();
            let coth_i = ch / sh;
            let lw1 = 0.5 * (w4m1 / (sh * sh) - 2.0 * m / r) * sh / (sqrt_v + coth_i);
            let d1 = w * lw1;
            let d2 = 0.75 * w * w4m1 - 2.0 * ch * d1;
            Ok(ExtState { rho: -(0.5 * i).tanh().ln(), dev, d1, d2 })
        }
    }

    /// `dρ/dt` at `r = r_h + t²`, given `sinh ρ`.
    fn drho_dt(&self, t: f64, sinh_rho: f64) -> f64 {
        let r = self.r_h + t * t;
        2.0 * sinh_rho / (r * self.q(r)).sqrt()
    }

    /// `(w − 1, w', w'')` at `ρ ≥ ρ_h`.
    pub fn eval(&self, rho: f64) -> Result<(f64, f64, f64)> {
        if rho < self.rho_h {
            return Err(Error::SeedParams(format!("rho = {rho} is inside the horizon rho_h = {}", self.rho_h)));
        }
        if rho == self.rho_h {
            let s = self.state_at_t(0.0)?;
            return Ok((s.dev, s.d1, s.d2));
        }
        // Solve ρ(t) = rho in s = ln t: ρ is increasing and close to linear
        // in s for large ρ, and ∝ e^s near the horizon.
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        let guess = (rho.sinh() - self.r_h).max(1e-12);
        let mut s = 0.5 * guess.max((rho - self.rho_h).powi(2) * 1e-2).ln();
        for _ in 0..200 {
            let t = s.exp();
            let st = self.state_at_t(t)?;
            let f = st.rho - rho;
            if f.abs() <= 4e-16 * rho.max(1.0) {
                return Ok((st.dev, st.d1, st.d2));
            }
            if f > 0.0 {
                hi = hi.min(s);
            } else {
                lo = lo.max(s);
            }
            let dfds = t * self.drho_dt(t, st.rho.sinh());
            let mut next = s - f / dfds;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = if lo.is_finite() && hi.is_finite() {
                    0.5 * (lo + hi)
                } else if lo.is_finite() {
                    lo + 1.0
                } else {
                    hi - 1.0
                };
            }
            if (next - s).abs() <= 1e-16 * s.abs().max(1.0) {
                return Ok((st.dev, st.d1, st.d2));
            }
            s = next;
        }
        Err(Error::Construction(format!("radius inversion failed at rho = {rho}")))
    }
}

/// Quintic smoothstep `t³(10 − 15t + 6t²)` and its first two derivatives.
pub fn smoothstep5(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let t2 = t * t;
    (t2 * t * (10.0 - 15.0 * t + 6.0 * t2), 30.0 * t2 * (1.0 - t).powi(2), 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t))
}

/// Fraction of the dip window at which the bump peaks.
pub const DIP_PEAK: f64 = 0.85;

fn dip_peak(window: (f64, f64)) -> f64 {
    window.0 + DIP_PEAK * (window.1 - window.0)
}

/// Bump on `window` rising to 1 at the peak; C² with compact support.
pub fn dip_bump(rho: f64, window: (f64, f64)) -> (f64, f64, f64) {
    let (lo, hi) = window;
    if rho <= lo || rho >= hi {
        return (0.0, 0.0, 0.0);
    }
    let pk = dip_peak(window);
    if rho <= pk {
        let l = pk - lo;
        let (s, s1, s2) = smoothstep5((rho - lo) / l);
        (s, s1 / l, s2 / (l * l))
    } else {
        let l = hi - pk;
        let (s, s1, s2) = smoothstep5((hi - rho) / l);
        (s, -s1 / l, s2 / (l * l))
    }
}

/// The analytic seed: cap polynomial, exterior and dip.
#[derive(Debug, Clone, Copy)]
pub struct Seed {
    pub params: SeedParams,
    pub ext: Option<AdsSchwarzschild>,
    /// Cap coefficients of `P(x) = a0 + a1 x + a2 x² + a3 x³`, `x = ρ²`.
    pub cap: [f64; 4],
}

impl Seed {
    pub fn new(params: SeedParams) -> Result<Self> {
        let ext = if params.m > 0.0 { Some(AdsSchwarzschild::new(params.m)?) } else { None };
        let rho_h = ext.map_or(0.0, |e| e.rho_h);
        params.check(rho_h)?;
        let cap = match ext {
            Some(e) => {
                let (dev, d1, d2) = e.eval(e.rho_h)?;
                cap_coefficients(e.rho_h, 1.0 + dev, d1, d2, 1.0 + dev + params.cap_depth)
            }
            None => [1.0, 0.0, 0.0, 0.0],
        };
        Ok(Seed { params, ext, cap })
    }

    pub fn rho_h(&self) -> f64 {
        self.ext.map_or(0.0, |e| e.rho_h)
    }

    fn cap_eval(&self, rho: f64) -> (f64, f64, f64) {
        let [a0, a1, a2, a3] = self.cap;
        let x = rho * rho;
        let p = a0 + x * (a1 + x * (a2 + x * a3));
        let p1 = a1 + x * (2.0 * a2 + 3.0 * a3 * x);
        let p2 = 2.0 * a2 + 6.0 * a3 * x;
        (p - 1.0, 2.0 * rho * p1, 2.0 * p1 + 4.0 * x * p2)
    }

    /// Exact `(w − 1, w', w'')`. At a joint, `inner` selects the piece on
    /// the small-ρ side.
    pub fn eval_side(&self, rho: f64, inner: bool) -> Result<(f64, f64, f64)> {
        let Some(ext) = self.ext else {
            return Ok((0.0, 0.0, 0.0));
        };
        if rho < ext.rho_h || (inner && rho == ext.rho_h) {
            return Ok(self.cap_eval(rho));
        }
        let (dev, d1, d2) = ext.eval(rho)?;
        let (a, window) = (self.params.dip_amp, self.params.dip_window);
        if a == 0.0 {
            return Ok((dev, d1, d2));
        }
        let probe = if inner { rho - 1e-300 } else { rho };
        let (b, b1, b2) = if (inner && rho == window.1) || (!inner && rho == window.0) {
            (0.0, 0.0, 0.0)
        } else if rho == dip_peak(window) {
            (1.0, 0.0, 0.0)
        } else {
            dip_bump(probe, window)
        };
        let w = 1.0 + dev;
        let f = 1.0 - a * b;
        Ok((dev - a * b * w, d1 * f - a * b1 * w, d2 * f - 2.0 * a * b1 * d1 - a * b2 * w))
    }

    pub fn eval(&self, rho: f64) -> Result<(f64, f64, f64)> {
        self.eval_side(rho, false)
    }

    /// Construction joints: `ρ_h` and the dip breakpoints.
    pub fn joints(&self) -> Vec<f64> {
        let mut j = Vec::new();
        if self.ext.is_some() {
            j.push(self.rho_h());
        }
        if self.params.dip_amp > 0.0 {
            let w = self.params.dip_window;
            j.extend([w.0, dip_peak(w), w.1]);
        }
        j
    }
}

/// Coefficients of the even cap `P(ρ²)` with `P(0) = w0` matching
/// `(w, w', w'')` at `ρ_h`.
fn cap_coefficients(rho_h: f64, w: f64, d1: f64, d2: f64, w0: f64) -> [f64; 4] {
    let x = rho_h * rho_h;
    // d/dρ P = 2ρ P'(x), d²/dρ² P = 2P' + 4ρ² P''
    let p1 = d1 / (2.0 * rho_h);
    let p2 = (d2 - 2.0 * p1) / (4.0 * x);
    let r0 = w - w0;
    // a1 x + a2 x² + a3 x³ = r0; a1 + 2a2 x + 3a3 x² = p1; 2a2 + 6a3 x = p2
    let a3 = (r0 - x * p1 + 0.5 * x * x * p2) / (x * x * x);
    let a2 = 0.5 * (p2 - 6.0 * a3 * x);
    let a1 = p1 - 2.0 * a2 * x - 3.0 * a3 * x * x;
    [w0, a1, a2, a3]
}

/// Knot spacing near the seed's joints and its far-field cap.
pub const KNOT_FINE: f64 = 0.004;
pub const KNOT_COARSE: f64 = 0.02;
const KNOT_GROWTH: f64 = 1.01;

/// Knots on `[start, rho_max]`: uniform `KNOT_FINE` up to the last
/// breakpoint (each breakpoint is a knot), then geometric coarsening.
pub fn make_knots(start: f64, rho_max: f64, breakpoints: &[f64]) -> Vec<f64> {
    let mut bps: Vec<f64> = breakpoints.iter().copied().filter(|&b| b > start && b < rho_max).collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    let mut knots = vec![start];
    let mut a = start;
    for &b in &bps {
        let n = ((b - a) / KNOT_FINE).ceil().max(1.0) as usize;
        for i in 1..=n {
            knots.push(if i == n { b } else { a + (b - a) * i as f64 / n as f64 });
        }
        a = b;
    }
    let mut h = KNOT_FINE;
    while a + h < rho_max {
        a += h;
        knots.push(a);
        h = (h * KNOT_GROWTH).min(KNOT_COARSE);
    }
    if rho_max - a < 0.3 * h {
        knots.pop();
    }
    knots.push(rho_max);
    knots
}

/// Sampled C² radial conformal factor with an `A e^{−3ρ}` tail beyond the
/// last knot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub knots: Vec<f64>,
    /// `w − 1` at the knots.
    pub dev: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    /// `A` in `w − 1 ≈ A e^{−3ρ}`.
    pub decay_amplitude: f64,
    /// `δ`.
    pub support_radius: f64,
    pub params: SeedParams,
    pub rho_h: f64,
}

impl RadialProfile {
    /// Samples `f(ρ) = (w − 1, w', w'')` on `knots`.
    pub fn from_fn<F: FnMut(f64) -> Result<(f64, f64, f64)>>(
        knots: Vec<f64>,
        params: SeedParams,
        rho_h: f64,
        mut f: F,
    ) -> Result<Self> {
        if knots.len() < 2 || knots.windows(2).any(|k| !(k[1] > k[0])) {
            return Err(Error::Construction("knots must be strictly increasing, at least two".into()));
        }
        let mut dev = Vec::with_capacity(knots.len());
        let mut d1 = Vec::with_capacity(knots.len());
        let mut d2 = Vec::with_capacity(knots.len());
        for &k in &knots {
            let (a, b, c) = f(k)?;
            dev.push(a);
            d1.push(b);
            d2.push(c);
        }
        let last = knots.len() - 1;
        let decay_amplitude = dev[last] * (3.0 * knots[last]).exp();
        let p = RadialProfile { knots, dev, d1, d2, decay_amplitude, support_radius: params.delta, params, rho_h };
        if let Some(i) = p.dev.iter().position(|&d| !(d > -1.0)) {
            return Err(Error::Construction(format!("w = {} <= 0 at rho = {}", 1.0 + p.dev[i], p.knots[i])));
        }
        Ok(p)
    }

    /// The constant profile `w ≡ 1`.
    pub fn hyperbolic(rho_max: f64) -> Self {
        let knots = vec![0.0, rho_max];
        RadialProfile {
            dev: vec![0.0; 2],
            d1: vec![0.0; 2],
            d2: vec![0.0; 2],
            knots,
            decay_amplitude: 0.0,
            support_radius: 1.0,
            params: SeedParams::hyperbolic(),
            rho_h: 0.0,
        }
    }

    pub fn rho_max(&self) -> f64 {
        *self.knots.last().expect("non-empty")
    }

    pub fn is_trivial(&self) -> bool {
        self.dev.iter().chain(&self.d1).chain(&self.d2).all(|&v| v == 0.0)
    }

    /// `(w − 1, w', w'')`: quintic Hermite between knots, the `A e^{−3ρ}`
    /// tail beyond the last knot. Below the first knot the first segment is
    /// extended polynomially.
    pub fn eval_dev(&self, rho: f64) -> (f64, f64, f64) {
        let n = self.knots.len();
        let last = self.knots[n - 1];
        if rho >= last {
            let d = self.dev[n - 1] * (-3.0 * (rho - last)).exp();
            return (d, -3.0 * d, 9.0 * d);
        }
        let i = self.knots.partition_point(|&k| k <= rho).clamp(1, n - 1) - 1;
        if rho == self.knots[i] {
            return (self.dev[i], self.d1[i], self.d2[i]);
        }
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let h = x1 - x0;
        let t = (rho - x0) / h;
        let dp = self.dev[i + 1] - self.dev[i];
        let (m0, m1) = (self.d1[i] * h, self.d1[i + 1] * h);
        let (a0, a1) = (self.d2[i] * h * h, self.d2[i + 1] * h * h);
        let c = [
            self.dev[i],
            m0,
            0.5 * a0,
            10.0 * dp - 6.0 * m0 - 4.0 * m1 - 1.5 * a0 + 0.5 * a1,
            -15.0 * dp + 8.0 * m0 + 7.0 * m1 + 1.5 * a0 - a1,
            6.0 * dp - 3.0 * m0 - 3.0 * m1 - 0.5 * a0 + 0.5 * a1,
        ];
        let p = c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))));
        let p1 = c[1] + t * (2.0 * c[2] + t * (3.0 * c[3] + t * (4.0 * c[4] + t * 5.0 * c[5])));
        let p2 = 2.0 * c[2] + t * (6.0 * c[3] + t * (12.0 * c[4] + t * 20.0 * c[5]));
        (p, p1 / h, p2 / (h * h))
    }

    /// `(w, w', w'')`.
    pub fn eval(&self, rho: f64) -> (f64, f64, f64) {
        let (d, d1, d2) = self.eval_dev(rho);
        (1.0 + d, d1, d2)
    }

    /// Checked evaluation: `ρ` must be nonnegative and not below the
    /// first knot.
    pub fn try_eval(&self, rho: f64) -> Result<(f64, f64, f64)> {
        if !(rho >= 0.0) || rho < self.knots[0] {
            return Err(Error::SeedParams(format!("rho = {rho} outside profile domain [{}, ∞)", self.knots[0])));
        }
        Ok(self.eval(rho))
    }

    pub fn min_w(&self) -> f64 {
        let mut m = f64::INFINITY;
        for k in self.knots.windows(2) {
            for j in 0..4 {
                let rho = k[0] + (k[1] - k[0]) * j as f64 / 4.0;
                m = m.min(self.eval(rho).0);
            }
        }
        m.min(1.0 + self.dev[self.dev.len() - 1])
    }

    /// Least-squares slope of `ln|w − 1|` over `[a, b]`, sampled at `n`
    /// points.
    pub fn decay_slope(&self, a: f64, b: f64, n: usize) -> f64 {
        let xs: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| self.eval_dev(x).0.abs().ln()).collect();
        crate::stats::linear_fit(&xs, &ys).0
    }
}

/// Exterior-only profile on `[ρ_h, ρ_max]`; `m = 0` gives `w ≡ 1` on
/// `[0, ρ_max]`.
pub fn ads_schw_profile(m: f64, rho_max: f64) -> Result<RadialProfile> {
    if m == 0.0 {
        return Ok(RadialProfile::hyperbolic(rho_max));
    }
    let seed = Seed::new(SeedParams::exterior(m))?;
    let rho_h = seed.rho_h();
    if !(rho_max > rho_h + 1.0) {
        return Err(Error::SeedParams(format!("rho_max = {rho_max} must exceed rho_h + 1 = {}", rho_h + 1.0)));
    }
    let knots = make_knots(rho_h, rho_max, &[]);
    RadialProfile::from_fn(knots, seed.params, rho_h, |r| seed.eval(r))
}

/// Full cap-and-dip profile on `[0, ρ_max]`. `ext` supplies `m` and `ρ_max`.
pub fn cap_and_dip(ext: &RadialProfile, params: &SeedParams) -> Result<RadialProfile> {
    if ext.params.m != params.m {
        return Err(Error::SeedParams(format!("exterior has m = {}, params m = {}", ext.params.m, params.m)));
    }
    seed_profile(params, ext.rho_max())
}

/// Builds the sampled profile of [`Seed`] with `params` directly.
pub fn seed_profile(params: &SeedParams, rho_max: f64) -> Result<RadialProfile> {
    let seed = Seed::new(*params)?;
    if seed.ext.is_none() && params.dip_amp == 0.0 {
        let mut p = RadialProfile::hyperbolic(rho_max);
        p.params = *params;
        p.support_radius = params.delta;
        return Ok(p);
    }
    let knots = make_knots(0.0, rho_max, &seed.joints());
    RadialProfile::from_fn(knots, *params, seed.rho_h(), |r| seed.eval(r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horizon_of_unit_mass() {
        assert!((horizon_radius(1.0) - 1.0).abs() < 1e-15);
        for m in [0.01, 0.3, 2.0, 50.0] {
            let r = horizon_radius(m);
            assert!((r.powi(3) + r - 2.0 * m).abs() < 1e-13 * m.max(1.0));
        }
    }

    #[test]
    fn unit_mass_horizon_values() {
        // reference values from an independent mpmath evaluation
        let e = AdsSchwarzschild::new(1.0).unwrap();
        assert!((e.rho_h - 0.565_490_6).abs() < 1e-6, "{}", e.rho_h);
        let (d, d1, d2) = e.eval(e.rho_h).unwrap();
        assert!((1.0 + d - 1.295_19).abs() < 1e-5);
        assert!((d1 + 1.264_74).abs() < 1e-5);
        assert!((d2 - 6.702_22).abs() < 1e-5);
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn exterior_matches_high_precision_quadrature() {
        // (ρ(r), w(r) − 1) for m = 1 from 30-digit quadrature at r = 2, 10, 1000
        let e = AdsSchwarzschild::new(1.0).unwrap();
        let oracle = [
            (1.416_669_685_314_999_9, 1.523_560_706_483_475_1e-2),
            (2.997_975_247_489_993_3, 1.244_770_205_969_288_1e-4),
            (7.600_902_709_291_988_9, 1.249_999_375_993_692_9e-10),
        ];
        for (rho, dev) in oracle {
            let (d, _, _) = e.eval(rho).unwrap();
            assert!((d - dev).abs() < 1e-11 * dev, "{rho}: {d} vs {dev}");
        }
        let p = ads_schw_profile(1.0, 40.0).unwrap();
        assert!((p.decay_amplitude - 1.0).abs() < 1e-10);
        let slope = p.decay_slope(p.rho_h + 4.0, p.rho_h + 8.0, 41);
        assert!((slope + 3.0).abs() < 0.1, "{slope}");
    }

    #[test]
    fn inversion_hits_target_radius() {
        let e = AdsSchwarzschild::new(1.0).unwrap();
        for rho in [e.rho_h + 1e-9, 0.6, 1.0, 1.7, 5.0, 20.0, 39.0] {
            let (d, _, _) = e.eval(rho).unwrap();
            assert!(d.is_finite() && d > -1.0, "{rho}: {d}");
        }
        let (d, _, _) = e.eval(30.0).unwrap();
        assert!((d * 90f64.exp() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn cap_matches_exterior_at_joint() {
        let p = SeedParams { m: 1.0, cap_depth: 3.0, dip_amp: 0.0, dip_window: (0.0, 0.0), delta: 1.0 };
        let s = Seed::new(p).unwrap();
        let rh = s.rho_h();
        let a = s.eval_side(rh, true).unwrap();
        let b = s.eval_side(rh, false).unwrap();
        assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12 && (a.2 - b.2).abs() < 1e-11);
        assert!((s.eval(0.0).unwrap().0 + 1.0 - (1.0 + b.0 + 3.0)).abs() < 1e-14);
        assert_eq!(s.eval(0.0).unwrap().1, 0.0);
    }

    #[test]
    fn bump_is_c2() {
        let w = (0.6, 0.95);
        for &x in &[0.6, dip_peak(w), 0.95] {
            let l = dip_bump(x - 1e-9, w);
            let r = dip_bump(x + 1e-9, w);
            assert!((l.0 - r.0).abs() < 1e-7 && (l.1 - r.1).abs() < 1e-6 && (l.2 - r.2).abs() < 1e-3);
        }
    }

    #[test]
    fn hermite_exact_at_knots_and_on_quintics() {
        let f = |x: f64| (x.powi(5) - 2.0 * x * x + 0.5, 5.0 * x.powi(4) - 4.0 * x, 20.0 * x.powi(3) - 4.0);
        let p = RadialProfile::from_fn(vec![0.0, 0.3, 0.7, 1.5], SeedParams::hyperbolic(), 0.0, |x| Ok(f(x))).unwrap();
        assert_eq!(p.eval_dev(0.7), f(0.7));
        for x in [0.1, 0.45, 1.2] {
            let (a, b, c) = p.eval_dev(x);
            let e = f(x);
            assert!((a - e.0).abs() < 1e-14 && (b - e.1).abs() < 1e-13 && (c - e.2).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_profile() {
        let p = ads_schw_profile(0.0, 20.0).unwrap();
        assert_eq!(p.eval(3.7), (1.0, 0.0, 0.0));
        let q = seed_profile(&SeedParams::hyperbolic(), 20.0).unwrap();
        assert_eq!(q.eval(0.2), (1.0, 0.0, 0.0));
    }

    #[test]
    fn rejects_bad_params() {
        let mut p = SeedParams::exterior(1.0);
        p.dip_amp = 0.1;
        p.dip_window = (0.3, 0.9);
        assert!(Seed::new(p).is_err());
        p.dip_window = (0.6, 1.2);
        assert!(Seed::new(p).is_err());
        assert!(Seed::new(SeedParams { cap_depth: 1.0, ..SeedParams::hyperbolic() }).is_err());
    }
}
