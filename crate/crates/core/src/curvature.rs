//! Operators for metrics `w⁴ g_H` conformal to hyperbolic space: the
//! hyperbolic Laplacian on the axial grid, the conformal scalar-curvature
//! law and the mean curvature of geodesic spheres.
//!
//! In Fermi coordinates about the axis the hyperbolic metric is
//! `cosh²r dz² + dr² + sinh²r dφ²`, so for axisymmetric `f`
//! `Δf = f_rr + (coth r + tanh r) f_r + f_zz / cosh²r`.
//! Mean curvature uses the outward normal: hyperbolic spheres have
//! `H = 2 coth ρ`.

use crate::error::{Error, Result};
use crate::grid::AxialGrid;
use crate::hypgeom::axial_distance;
use crate::seedprofile::RadialProfile;

/// `(1 + d)⁵ − (1 + d)` without cancellation.
pub fn quintic_excess(d: f64) -> f64 {
    d * (4.0 + d * (10.0 + d * (10.0 + d * (5.0 + d))))
}

/// `R + 6` of `w⁴ g_H` for `w = 1 + d` with `Δ_H w = lap`:
/// `R = w⁻⁵(−8Δw − 6w)`.
pub fn defect_law(d: f64, lap: f64) -> f64 {
    (-8.0 * lap + 6.0 * quintic_excess(d)) / (1.0 + d).powi(5)
}

/// `Δ_H` of a radial function, `f'' + 2 coth ρ f'`, with the `3f''` limit
/// at the center.
pub fn radial_laplacian(rho: f64, d1: f64, d2: f64) -> f64 {
    if rho < 1e-7 {
        3.0 * d2
    } else {
        d2 + 2.0 * d1 / rho.tanh()
    }
}

/// `(∂z ρ, ∂r ρ)` of the distance to the axis point `z_c`; zero at the
/// point itself.
pub fn rho_gradient(z: f64, r: f64, zc: f64, rho: f64) -> [f64; 2] {
    if rho < 1e-300 {
        return [0.0, 0.0];
    }
    let s = rho.sinh();
    let zeta = z - zc;
    [r.cosh() * zeta.sinh() / s, r.sinh() * zeta.cosh() / s]
}

/// Hyperbolic inner product of two `(∂z, ∂r)` gradients at radius `r`.
pub fn inner(r: f64, a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] / r.cosh().powi(2) + a[1] * b[1]
}

/// `R + 6` of a seed profile at `ρ`.
pub fn seed_excess(p: &RadialProfile, rho: f64) -> f64 {
    let (d, d1, d2) = p.eval_dev(rho);
    defect_law(d, radial_laplacian(rho, d1, d2))
}

/// Finite-difference weights at one node: index order is center, `z−`,
/// `z+`, `r−`, `r+` (on the axis `r−` is the reflected ghost, i.e. the
/// same node as `r+`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil2D {
    pub idx: [usize; 5],
    pub lap: [f64; 5],
    pub dz: [f64; 5],
    pub dr: [f64; 5],
}

/// Second-order weights `(d/dx, d²/dx²)` of a three-point stencil on a
/// mapped axis with `(X', X'')`.
fn mapped3(d: (f64, f64)) -> ([f64; 3], [f64; 3]) {
    let (x1, x2) = d;
    let g = [-0.5 / x1, 0.0, 0.5 / x1];
    let c = 1.0 / (x1 * x1);
    let k = x2 / (2.0 * x1 * x1 * x1);
    ([g[0], g[1], g[2]], [c + k, -2.0 * c, c - k])
}

impl Stencil2D {
    /// Stencil at interior node `(iz, ir)`; `None` on the box boundary.
    pub fn at(grid: &AxialGrid, iz: usize, ir: usize) -> Option<Self> {
        let (nz, nr) = (grid.nz(), grid.nr());
        if iz == 0 || iz + 1 >= nz || ir + 1 >= nr {
            return None;
        }
        let r = grid.r[ir];
        let (gz, hz) = mapped3(grid.dz[iz]);
        let c2 = 1.0 / r.cosh().powi(2);
        let mut s = Stencil2D {
            idx: [grid.idx(iz, ir), grid.idx(iz - 1, ir), grid.idx(iz + 1, ir), 0, grid.idx(iz, ir + 1)],
            lap: [0.0; 5],
            dz: [0.0, gz[0], gz[2], 0.0, 0.0],
            dr: [0.0; 5],
        };
        s.lap[0] = hz[1] * c2;
        s.lap[1] = hz[0] * c2;
        s.lap[2] = hz[2] * c2;
        if ir == 0 {
            // even reflection: Δ = f_zz + 2 f_rr, f_rr = 2(f₁ − f₀)/R'²
            let x1 = grid.dr[0].0;
            let c = 2.0 / (x1 * x1);
            s.idx[3] = s.idx[4];
            s.lap[0] += -2.0 * c;
            s.lap[3] = c;
            s.lap[4] = c;
        } else {
            let (gr, hr) = mapped3(grid.dr[ir]);
            let a = 1.0 / r.tanh() + r.tanh();
            s.idx[3] = grid.idx(iz, ir - 1);
            s.lap[0] += hr[1];
            s.lap[3] = hr[0] + a * gr[0];
            s.lap[4] = hr[2] + a * gr[2];
            s.dr = [0.0, 0.0, 0.0, gr[0], gr[2]];
        }
        Some(s)
    }

    /// `(Δf, ∂z f, ∂r f)`. Differences against the center value keep
    /// constants exact.
    pub fn apply(&self, f: &[f64]) -> (f64, f64, f64) {
        let f0 = f[self.idx[0]];
        let mut out = (0.0, 0.0, 0.0);
        for k in 1..5 {
            let v = f[self.idx[k]] - f0;
            out.0 += self.lap[k] * v;
            out.1 += self.dz[k] * v;
            out.2 += self.dr[k] * v;
        }
        out
    }
}

/// Second-order `Δ_H f` on the grid; NaN on the box boundary.
pub fn laplacian_h3(grid: &AxialGrid, f: &[f64]) -> Vec<f64> {
    assert_eq!(f.len(), grid.len(), "field does not match grid");
    let mut out = vec![f64::NAN; grid.len()];
    for iz in 0..grid.nz() {
        for ir in 0..grid.nr() {
            if let Some(s) = Stencil2D::at(grid, iz, ir) {
                out[grid.idx(iz, ir)] = s.apply(f).0;
            }
        }
    }
    out
}

/// Fourth-order mapped derivatives `(f_x, f_xx)` from five values at
/// σ − 2 … σ + 2.
fn mapped5(v: [f64; 5], d: (f64, f64)) -> (f64, f64) {
    let fs = (v[0] - 8.0 * v[1] + 8.0 * v[3] - v[4]) / 12.0;
    let fss = (-v[0] + 16.0 * v[1] - 30.0 * v[2] + 16.0 * v[3] - v[4]) / 12.0;
    let fx = fs / d.0;
    (fx, (fss - d.1 * fx) / (d.0 * d.0))
}

/// Fourth-order `(Δ_H f, ∂z f, ∂r f)` at node `(iz, ir)`; `None` within two
/// nodes of the box boundary.
pub fn derivs_o4(grid: &AxialGrid, f: &[f64], iz: usize, ir: usize) -> Option<(f64, f64, f64)> {
    let (nz, nr) = (grid.nz(), grid.nr());
    if iz < 2 || iz + 2 >= nz || ir + 2 >= nr {
        return None;
    }
    let at = |jz: usize, jr: i64| f[grid.idx(jz, jr.unsigned_abs() as usize)];
    let vz = [at(iz - 2, ir as i64), at(iz - 1, ir as i64), at(iz, ir as i64), at(iz + 1, ir as i64), at(iz + 2, ir as i64)];
    let i = ir as i64;
    let vr = [at(iz, i - 2), at(iz, i - 1), at(iz, i), at(iz, i + 1), at(iz, i + 2)];
    let (fz, fzz) = mapped5(vz, grid.dz[iz]);
    let (fr, frr) = mapped5(vr, grid.dr[ir]);
    let r = grid.r[ir];
    let lap = if ir == 0 {
        fzz + 2.0 * frr
    } else {
        frr + (1.0 / r.tanh() + r.tanh()) * fr + fzz / r.cosh().powi(2)
    };
    Some((lap, fz, if ir == 0 { 0.0 } else { fr }))
}

/// Fourth-order `Δ_H f`; NaN within two nodes of the boundary.
pub fn laplacian_h3_o4(grid: &AxialGrid, f: &[f64]) -> Vec<f64> {
    assert_eq!(f.len(), grid.len(), "field does not match grid");
    let mut out = vec![f64::NAN; grid.len()];
    for iz in 0..grid.nz() {
        for ir in 0..grid.nr() {
            if let Some((l, _, _)) = derivs_o4(grid, f, iz, ir) {
                out[grid.idx(iz, ir)] = l;
            }
        }
    }
    out
}

/// `R + 6` of `w⁴ g_H` from node samples of `w − 1` (second-order
/// Laplacian); NaN on the boundary.
pub fn scalar_curvature(grid: &AxialGrid, dev: &[f64]) -> Result<Vec<f64>> {
    if let Some(i) = dev.iter().position(|&d| !(d > -1.0)) {
        return Err(Error::NonPositive { node: i, value: 1.0 + dev[i] });
    }
    let lap = laplacian_h3(grid, dev);
    Ok(dev.iter().zip(&lap).map(|(&d, &l)| defect_law(d, l)).collect())
}

/// Mean curvature of the geodesic sphere of radius `ρ` in `w⁴ g_H`, given
/// `w` and the outward radial derivative `∂ρ w`.
pub fn mean_curvature(rho: f64, w: f64, dw: f64) -> f64 {
    (2.0 / rho.tanh() + 4.0 * dw / w) / (w * w)
}

/// Mean curvature of the sphere `S(ρ)` for a radial profile.
pub fn mean_curvature_radial(p: &RadialProfile, rho: f64) -> f64 {
    let (w, d1, _) = p.eval(rho);
    mean_curvature(rho, w, d1)
}

/// First variation of area: `H = (dA/dρ) / (A w²)` with
/// `A(ρ) = 4π w⁴ sinh²ρ`, by a centered difference of `ln A`.
pub fn first_variation_oracle<F: Fn(f64) -> f64>(w: F, rho: f64, h: f64) -> f64 {
    let ln_area = |s: f64| 4.0 * w(s).ln() + 2.0 * s.sinh().ln();
    let d = (ln_area(rho + h) - ln_area(rho - h)) / (2.0 * h);
    let w0 = w(rho);
    d / (w0 * w0)
}

/// Distance of node `i` to the axis point `zc`.
pub fn node_distance(grid: &AxialGrid, i: usize, zc: f64) -> f64 {
    let (z, r) = grid.coords(i);
    axial_distance(z, r, zc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::seedprofile::ads_schw_profile;

    fn grid(level: u32) -> AxialGrid {
        AxialGrid::new(&[-2.0, 2.0], 8.0, &GridSpec { level, ..GridSpec::default() }).unwrap()
    }

    fn local_h(g: &AxialGrid, i: usize) -> f64 {
        g.dz[i / g.nr()].0.max(g.dr[i % g.nr()].0)
    }

    fn sample(g: &AxialGrid, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        (0..g.len()).map(|i| {
            let (z, r) = g.coords(i);
            f(z, r)
        }).collect()
    }

    #[test]
    fn constants_have_zero_laplacian() {
        let g = grid(0);
        let l = laplacian_h3(&g, &vec![3.5; g.len()]);
        assert!(l.iter().filter(|v| v.is_finite()).all(|v| v.abs() < 1e-12));
        let r6 = scalar_curvature(&g, &vec![0.0; g.len()]).unwrap();
        assert!(r6.iter().filter(|v| v.is_finite()).all(|v| v.abs() < 1e-10));
        assert!(scalar_curvature(&g, &vec![-1.5; g.len()]).is_err());
    }

    /// Max error of the discrete Laplacian of `e^{−3ρ}cos θ` about `z = 2`
    /// against its closed form, on `1 < ρ < 5`.
    fn lap_error(g: &AxialGrid) -> f64 {
        let f = sample(g, |z, r| {
            let (rho, th) = crate::hypgeom::axial_to_polar(z, r, 2.0);
            (-3.0 * rho).exp() * th.cos()
        });
        let l = laplacian_h3(g, &f);
        let mut m = 0.0f64;
        for i in 0..g.len() {
            let (z, r) = g.coords(i);
            let rho = axial_distance(z, r, 2.0);
            if !(1.0..5.0).contains(&rho) || !l[i].is_finite() {
                continue;
            }
            let c = f[i] / (-3.0 * rho).exp();
            // Δ(g(ρ)cos θ) = (g'' + 2coth ρ g' − 2g/sinh²ρ) cos θ
            let e = (-3.0 * rho).exp();
            let exact = (9.0 * e - 6.0 * e / rho.tanh() - 2.0 * e / rho.sinh().powi(2)) * c;
            m = m.max((l[i] - exact).abs());
        }
        m
    }

    #[test]
    fn radial_decay_laplacian() {
        let g = grid(0);
        let f = sample(&g, |z, r| (-3.0 * axial_distance(z, r, 0.0)).exp());
        let l = laplacian_h3(&g, &f);
        for i in (0..g.len()).step_by(97) {
            let rho = g.rho_mid(i);
            if !(0.5..4.0).contains(&rho) || !l[i].is_finite() {
                continue;
            }
            let exact = (9.0 - 6.0 / rho.tanh()) * (-3.0 * rho).exp();
            let h = local_h(&g, i);
            assert!((l[i] - exact).abs() < 200.0 * h * h * (-3.0 * rho).exp(), "{rho}");
        }
    }

    #[test]
    fn second_order_convergence() {
        let (e0, e1) = (lap_error(&grid(0)), lap_error(&grid(1)));
        let ratio = e0 / e1;
        assert!((3.5..4.6).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn fourth_order_stencil_is_sharper() {
        let g = grid(0);
        let f = sample(&g, |z, r| (-3.0 * axial_distance(z, r, 0.0)).exp());
        let l4 = laplacian_h3_o4(&g, &f);
        for i in (0..g.len()).step_by(89) {
            let rho = g.rho_mid(i);
            if !(0.5..4.0).contains(&rho) || !l4[i].is_finite() {
                continue;
            }
            let exact = (9.0 - 6.0 / rho.tanh()) * (-3.0 * rho).exp();
            let h = local_h(&g, i);
            assert!((l4[i] - exact).abs() < 5e3 * h.powi(4) * (-3.0 * rho).exp(), "{rho}");
        }
    }

    #[test]
    fn linearized_curvature_envelope() {
        let g = grid(0);
        let eps = 1e-3;
        let dev = sample(&g, |z, r| eps * (-3.0 * axial_distance(z, r, 0.0)).exp());
        let r6 = scalar_curvature(&g, &dev).unwrap();
        for (i, &v) in r6.iter().enumerate() {
            let rho = g.rho_mid(i);
            if !(0.5..4.0).contains(&rho) || !v.is_finite() {
                continue;
            }
            let e = (-3.0 * rho).exp();
            let lin = 48.0 * eps * (1.0 / rho.tanh() - 1.0) * e;
            let h = local_h(&g, i);
            assert!((v - lin).abs() < 8.0 * 200.0 * h * h * eps * e + 40.0 * eps * eps * e, "{rho}: {v} vs {lin}");
        }
    }

    #[test]
    fn hyperbolic_sphere_mean_curvature() {
        let p = RadialProfile::hyperbolic(20.0);
        for rho in [0.3, 1.0, 7.0] {
            assert!((mean_curvature_radial(&p, rho) - 2.0 / rho.tanh()).abs() < 1e-14);
        }
    }

    #[test]
    fn exterior_mean_curvature_against_area_oracle() {
        let p = ads_schw_profile(1.0, 30.0).unwrap();
        let rho_h = p.rho_h;
        assert!(mean_curvature_radial(&p, rho_h).abs() < 1e-6);
        for rho in [rho_h + 0.2, 1.4, 2.5] {
            let fv = first_variation_oracle(|s| p.eval(s).0, rho, 1e-4);
            assert!((mean_curvature_radial(&p, rho) - fv).abs() < 1e-6);
        }
    }
}
