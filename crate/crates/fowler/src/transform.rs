//! Emden-Fowler change of variables between radial profiles and cylinder
//! traces, the fourth-order Kelvin transform, and radial differential
//! operators backed by order-4 centered stencils.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Params;

/// Order-4 centered finite-difference stencils on 7 uniformly spaced samples
/// f(x - 3h) .. f(x + 3h).
pub mod stencil {
    /// First derivative (5-point interior of the 7-sample window).
    pub fn d1(f: &[f64], h: f64) -> f64 {
        debug_assert_eq!(f.len(), 7);
        (f[1] - 8.0 * f[2] + 8.0 * f[4] - f[5]) / (12.0 * h)
    }

    /// Second derivative.
    pub fn d2(f: &[f64], h: f64) -> f64 {
        debug_assert_eq!(f.len(), 7);
        (-f[1] + 16.0 * f[2] - 30.0 * f[3] + 16.0 * f[4] - f[5]) / (12.0 * h * h)
    }

    /// Third derivative (full 7-point stencil).
    pub fn d3(f: &[f64], h: f64) -> f64 {
        debug_assert_eq!(f.len(), 7);
        (f[0] - 8.0 * f[1] + 13.0 * f[2] - 13.0 * f[4] + 8.0 * f[5] - f[6]) / (8.0 * h * h * h)
    }

    /// Fourth derivative (full 7-point stencil).
    pub fn d4(f: &[f64], h: f64) -> f64 {
        debug_assert_eq!(f.len(), 7);
        (-f[0] + 12.0 * f[1] - 39.0 * f[2] + 56.0 * f[3] - 39.0 * f[4] + 12.0 * f[5] - f[6])
            / (6.0 * h * h * h * h)
    }
}

/// Strictly increasing positive radii with an m x p matrix of sample values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialGrid {
    points: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl RadialGrid {
    pub fn new(points: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if points.len() < 9 {
            return Err(Error::InvalidGrid(format!(
                "need at least 9 grid points for stencil support (got {})",
                points.len()
            )));
        }
        if points.iter().any(|&r| !r.is_finite() || r <= 0.0) {
            return Err(Error::NonPositiveRadius);
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("radii must be strictly increasing".into()));
        }
        validate_values(&points, &values)?;
        if values.iter().flatten().any(|&u| u < 0.0) {
            return Err(Error::InvalidGrid("radial samples must be nonnegative".into()));
        }
        Ok(Self { points, values })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn components(&self) -> usize {
        self.values[0].len()
    }

    /// log10(r_max / r_min).
    pub fn decades(&self) -> f64 {
        (self.points[self.points.len() - 1] / self.points[0]).log10()
    }

    /// Euclidean norm across components at each radius.
    pub fn norms(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|row| row.iter().map(|u| u * u).sum::<f64>().sqrt())
            .collect()
    }
}

/// Uniformly spaced cylinder times with an m x p matrix of trace values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CylinderGrid {
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl CylinderGrid {
    pub fn new(times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() < 9 {
            return Err(Error::InvalidGrid(format!(
                "need at least 9 grid points for stencil support (got {})",
                times.len()
            )));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid("times must be finite".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("times must be strictly increasing".into()));
        }
        let h = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
        for w in times.windows(2) {
            if ((w[1] - w[0]) - h).abs() > 1e-12 {
                return Err(Error::InvalidGrid("times must be uniformly spaced within 1e-12".into()));
            }
        }
        validate_values(&times, &values)?;
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn components(&self) -> usize {
        self.values[0].len()
    }

    pub fn spacing(&self) -> f64 {
        (self.times[self.times.len() - 1] - self.times[0]) / (self.times.len() - 1) as f64
    }
}

fn validate_values(axis: &[f64], values: &[Vec<f64>]) -> Result<()> {
    if values.len() != axis.len() {
        return Err(Error::InvalidGrid(format!(
            "{} rows of values for {} grid points",
            values.len(),
            axis.len()
        )));
    }
    let p = values.first().map_or(0, Vec::len);
    if p == 0 {
        return Err(Error::InvalidGrid("grid has no components".into()));
    }
    for row in values {
        if row.len() != p {
            return Err(Error::InvalidGrid("ragged value rows".into()));
        }
        if row.iter().any(|u| !u.is_finite()) {
            return Err(Error::InvalidGrid("values must be finite".into()));
        }
    }
    Ok(())
}

/// v(t) = r^gamma u(r) with t = -ln r. Input radii that are not log-uniform
/// are resampled onto a uniform t-grid by monotone cubic interpolation.
pub fn to_cylinder(grid: &RadialGrid, params: &Params) -> Result<CylinderGrid> {
    let m = grid.len();
    let p = grid.components();
    // reverse: increasing r means decreasing t
    let mut times: Vec<f64> = grid.points().iter().rev().map(|&r| -r.ln()).collect();
    let mut values = vec![vec![0.0; p]; m];
    for (k, (&r, row)) in grid.points().iter().zip(grid.values()).enumerate() {
        let w = r.powf(params.gamma);
        for (j, &u) in row.iter().enumerate() {
            values[m - 1 - k][j] = w * u;
        }
    }

    let h = (times[m - 1] - times[0]) / (m - 1) as f64;
    let uniform = times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-12);
    if !uniform {
        let target: Vec<f64> = (0..m).map(|k| times[0] + k as f64 * h).collect();
        let mut resampled = vec![vec![0.0; p]; m];
        for j in 0..p {
            let col: Vec<f64> = values.iter().map(|row| row[j]).collect();
            let slopes = pchip_slopes(&times, &col);
            for (k, &tq) in target.iter().enumerate() {
                resampled[k][j] = pchip_eval(&times, &col, &slopes, tq);
            }
        }
        values = resampled;
        times = target;
    }
    CylinderGrid::new(times, values)
}

/// Inverse change of variables: r = e^{-t}, u(r) = r^{-gamma} v(t).
pub fn from_cylinder(grid: &CylinderGrid, params: &Params) -> Result<RadialGrid> {
    let m = grid.len();
    let p = grid.components();
    let points: Vec<f64> = grid.times().iter().rev().map(|&t| (-t).exp()).collect();
    let mut values = vec![vec![0.0; p]; m];
    for (k, (&t, row)) in grid.times().iter().zip(grid.values()).enumerate() {
        let w = (-t).exp().powf(-params.gamma);
        for (j, &v) in row.iter().enumerate() {
            // clamp rounding noise: the transform of nonnegative data is nonnegative
            values[m - 1 - k][j] = (w * v).max(0.0);
        }
    }
    RadialGrid::new(points, values)
}

/// Fourth-order Kelvin transform of a radial function about the sphere of
/// radius mu: (mu/r)^{n-4} f(mu^2/r).
pub fn kelvin(f: &dyn Fn(f64) -> f64, mu: f64, r: f64, params: &Params) -> f64 {
    (mu / r).powi(params.n as i32 - 4) * f(mu * mu / r)
}

/// Radial bi-Laplacian by order-4 centered differences:
/// f'''' + 2(n-1)/r f''' + (n-1)(n-3)/r^2 f'' - (n-1)(n-3)/r^3 f'.
pub fn radial_bilaplacian(f: &dyn Fn(f64) -> f64, r: f64, params: &Params, h: f64) -> Result<f64> {
    if !h.is_finite() || h <= 0.0 || r - 3.0 * h <= 0.0 {
        return Err(Error::StencilOutOfDomain { r, h });
    }
    let nf = params.n as f64;
    let samples: Vec<f64> = (-3..=3).map(|k| f(r + k as f64 * h)).collect();
    let d1 = stencil::d1(&samples, h);
    let d2 = stencil::d2(&samples, h);
    let d3 = stencil::d3(&samples, h);
    let d4 = stencil::d4(&samples, h);
    Ok(d4 + 2.0 * (nf - 1.0) / r * d3 + (nf - 1.0) * (nf - 3.0) / (r * r) * d2
        - (nf - 1.0) * (nf - 3.0) / (r * r * r) * d1)
}

/// Max relative residual of the conformal-invariance identity
/// bilap(kelvin f)(r) = (mu/r)^{n+4} bilap(f)(mu^2/r) over the samples,
/// with both sides evaluated by [`radial_bilaplacian`] at step h and the
/// residual normalized by 1 + |bilap(f)(mu^2/r)|.
pub fn verify_kelvin_identity(
    f: &dyn Fn(f64) -> f64,
    mu: f64,
    samples: &[f64],
    params: &Params,
    h: f64,
) -> Result<f64> {
    let transformed = |r: f64| kelvin(f, mu, r, params);
    let mut worst = 0.0_f64;
    for &r in samples {
        let lhs = radial_bilaplacian(&transformed, r, params, h)?;
        let pulled = radial_bilaplacian(f, mu * mu / r, params, h)?;
        let rhs = (mu / r).powi(params.n as i32 + 4) * pulled;
        let resid = (lhs - rhs).abs() / (1.0 + pulled.abs());
        worst = worst.max(resid);
    }
    Ok(worst)
}

/// Margins of the three-spheres comparison at each probe radius.
#[derive(Debug, Clone, Serialize)]
pub struct ThreeSpheresReport {
    /// (probe radius, margin); nonnegative margins mean the inequality holds.
    pub margins: Vec<(f64, f64)>,
    pub min_margin: f64,
}

/// For a radial profile (minimum over a sphere is the sampled value), the
/// margin at r is f(r) minus the harmonic-type interpolant built from f(r1)
/// and f(r2) with the r^{4-n} kernel. Superharmonic profiles have margin >= 0,
/// with equality exactly on the A + B r^{4-n} family.
pub fn three_spheres_check(
    f: &dyn Fn(f64) -> f64,
    r1: f64,
    r2: f64,
    probes: &[f64],
    params: &Params,
) -> Result<ThreeSpheresReport> {
    if !(r1 > 0.0 && r2 > r1) || probes.iter().any(|&r| r <= r1 || r >= r2) {
        return Err(Error::BadOrdering);
    }
    let k = |r: f64| r.powi(4 - params.n as i32);
    let m1 = f(r1);
    let m2 = f(r2);
    let denom = k(r2) - k(r1);
    let mut margins = Vec::with_capacity(probes.len());
    let mut min_margin = f64::INFINITY;
    for &r in probes {
        let interp = (m1 * (k(r2) - k(r)) + m2 * (k(r) - k(r1))) / denom;
        let margin = f(r) - interp;
        min_margin = min_margin.min(margin);
        margins.push((r, margin));
    }
    Ok(ThreeSpheresReport { margins, min_margin })
}

/// Fritsch-Carlson monotone (PCHIP) slopes on strictly increasing abscissae.
pub fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    assert!(n >= 2 && y.len() == n);
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut m = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] <= 0.0 {
            m[k] = 0.0;
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    m[0] = endpoint_slope(h[0], h.get(1).copied().unwrap_or(h[0]), delta[0], delta.get(1).copied().unwrap_or(delta[0]));
    let last = n - 1;
    m[last] = endpoint_slope(
        h[last - 1],
        if last >= 2 { h[last - 2] } else { h[last - 1] },
        delta[last - 1],
        if last >= 2 { delta[last - 2] } else { delta[last - 1] },
    );
    m
}

fn endpoint_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        0.0
    } else if d0 * d1 < 0.0 && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

/// Evaluate the PCHIP interpolant (clamped to the data range).
pub fn pchip_eval(x: &[f64], y: &[f64], slopes: &[f64], xq: f64) -> f64 {
    let n = x.len();
    if xq <= x[0] {
        return y[0];
    }
    if xq >= x[n - 1] {
        return y[n - 1];
    }
    let mut lo = 0;
    let mut hi = n - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if x[mid] <= xq {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let h = x[lo + 1] - x[lo];
    let s = (xq - x[lo]) / h;
    let (s2, s3) = (s * s, s * s * s);
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y[lo] + h10 * h * slopes[lo] + h01 * y[lo + 1] + h11 * h * slopes[lo + 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_params, spherical_radial};

    fn log_grid(r_lo: f64, r_hi: f64, m: usize) -> Vec<f64> {
        let step = (r_hi / r_lo).ln() / (m - 1) as f64;
        (0..m).map(|k| r_lo * (k as f64 * step).exp()).collect()
    }

    #[test]
    fn power_profile_maps_to_unit_trace() {
        let p = derive_params(6, 1).unwrap();
        let r = log_grid(1e-3, 1e3, 200);
        let vals: Vec<Vec<f64>> = r.iter().map(|&r| vec![r.powf(-p.gamma)]).collect();
        let grid = RadialGrid::new(r, vals).unwrap();
        let cyl = to_cylinder(&grid, &p).unwrap();
        for row in cyl.values() {
            assert!((row[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn round_trip_on_log_uniform_grid() {
        let p = derive_params(9, 2).unwrap();
        let r = log_grid(1e-2, 1e2, 101);
        let vals: Vec<Vec<f64>> = r
            .iter()
            .map(|&r| vec![spherical_radial(&p, 1.0, r), 0.5 * (-r).exp()])
            .collect();
        let grid = RadialGrid::new(r, vals).unwrap();
        let back = from_cylinder(&to_cylinder(&grid, &p).unwrap(), &p).unwrap();
        for (a, b) in grid.points().iter().zip(back.points()) {
            assert!((a - b).abs() <= 1e-12 * a.abs());
        }
        for (ra, rb) in grid.values().iter().zip(back.values()) {
            for (a, b) in ra.iter().zip(rb) {
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn spherical_trace_is_sech() {
        let p = derive_params(6, 1).unwrap();
        let r = log_grid((-5.0_f64).exp(), (5.0_f64).exp(), 501);
        let vals: Vec<Vec<f64>> = r.iter().map(|&r| vec![spherical_radial(&p, 1.0, r)]).collect();
        let grid = RadialGrid::new(r, vals).unwrap();
        let cyl = to_cylinder(&grid, &p).unwrap();
        for (t, row) in cyl.times().iter().zip(cyl.values()) {
            let sech = 1.0 / t.cosh();
            assert!((row[0] - sech).abs() <= 1e-10, "t = {t}: {} vs {sech}", row[0]);
        }
    }

    #[test]
    fn resampling_handles_non_uniform_grids() {
        let p = derive_params(6, 1).unwrap();
        // log grid with a smooth perturbation: not log-uniform, so the
        // PCHIP resampling path runs
        let m = 400;
        let r: Vec<f64> = (0..m)
            .map(|k| {
                let s = -3.0 + 6.0 * k as f64 / (m - 1) as f64;
                (s + 0.3 * (2.0 * s).sin() / (m as f64).sqrt() * 10.0).exp()
            })
            .collect();
        let vals: Vec<Vec<f64>> = r.iter().map(|&r| vec![spherical_radial(&p, 1.0, r)]).collect();
        let grid = RadialGrid::new(r, vals).unwrap();
        let cyl = to_cylinder(&grid, &p).unwrap();
        let h = cyl.spacing();
        for w in cyl.times().windows(2) {
            assert!(((w[1] - w[0]) - h).abs() <= 1e-12);
        }
        for (t, row) in cyl.times().iter().zip(cyl.values()) {
            let sech = 1.0 / t.cosh();
            assert!((row[0] - sech).abs() <= 1e-4, "t = {t}: {} vs {sech}", row[0]);
        }
    }

    #[test]
    fn non_positive_radius_rejected() {
        let vals = vec![vec![1.0]; 9];
        let r: Vec<f64> = (0..9).map(|k| k as f64 * 0.1).collect(); // starts at 0
        assert!(matches!(RadialGrid::new(r, vals), Err(Error::NonPositiveRadius)));
    }

    #[test]
    fn kelvin_constant_involution_and_fixed_point() {
        let p = derive_params(6, 1).unwrap();
        let fundamental = |r: f64| r.powi(4 - 6);
        for r in [0.3, 1.0, 4.2] {
            assert!((kelvin(&fundamental, 1.0, r, &p) - 1.0).abs() < 1e-12);
        }
        // involution
        let gauss = |r: f64| (-r * r).exp();
        let mu = 1.37;
        let pc = p.clone();
        let once = move |r: f64| kelvin(&gauss, mu, r, &pc);
        for r in [0.2, 0.9, 3.0] {
            let twice = kelvin(&once, mu, r, &p);
            assert!((twice - gauss(r)).abs() <= 1e-12 * gauss(r).max(1e-3));
        }
        // the unit-sphere inversion fixes the mu = 1 spherical profile
        let u = |r: f64| spherical_radial(&p, 1.0, r);
        for r in [0.25, 1.0, 5.0] {
            assert!((kelvin(&u, 1.0, r, &p) - u(r)).abs() <= 1e-13);
        }
    }

    #[test]
    fn stencils_exact_on_monomials() {
        // degree <= 4 must come out exactly (up to rounding)
        let h = 0.1;
        let x0 = 0.7;
        for deg in 0..=4u32 {
            let f: Vec<f64> = (-3..=3).map(|k| (x0 + k as f64 * h).powi(deg as i32)).collect();
            let d = deg as f64;
            let exact1 = d * x0.powi(deg as i32 - 1);
            let exact2 = d * (d - 1.0) * safe_pow(x0, deg as i32 - 2);
            let exact3 = d * (d - 1.0) * (d - 2.0) * safe_pow(x0, deg as i32 - 3);
            let exact4 = d * (d - 1.0) * (d - 2.0) * (d - 3.0) * safe_pow(x0, deg as i32 - 4);
            assert!((stencil::d1(&f, h) - exact1).abs() < 1e-11);
            assert!((stencil::d2(&f, h) - exact2).abs() < 1e-9);
            assert!((stencil::d3(&f, h) - exact3).abs() < 1e-8);
            assert!((stencil::d4(&f, h) - exact4).abs() < 1e-7);
        }
    }

    fn safe_pow(x: f64, e: i32) -> f64 {
        if e < 0 {
            0.0 // multiplied by a zero factorial coefficient anyway
        } else {
            x.powi(e)
        }
    }

    // Step sizes below: at h = 1e-3 the 7-point fourth-derivative stencil
    // sits on its f64 cancellation floor (~ 27 eps |f| / h^4 ~ 3e-3 |f|),
    // so these run at the truncation/roundoff balance point instead.

    #[test]
    fn bilaplacian_annihilates_fundamental_profile() {
        let p = derive_params(6, 1).unwrap();
        let f = |r: f64| r.powi(-2); // r^{4-n} for n = 6
        let v = radial_bilaplacian(&f, 1.0, &p, 5e-3).unwrap();
        assert!(v.abs() <= 2e-5, "residual {v}");
    }

    #[test]
    fn bilaplacian_of_quartic() {
        let p = derive_params(6, 1).unwrap();
        let f = |r: f64| r.powi(4);
        let v = radial_bilaplacian(&f, 1.3, &p, 1e-2).unwrap();
        assert!((v - 384.0).abs() <= 1e-6, "got {v}"); // 8 n (n+2)
    }

    #[test]
    fn bilaplacian_matches_pde_for_spherical_solution() {
        let p = derive_params(6, 1).unwrap();
        let u = |r: f64| spherical_radial(&p, 1.0, r);
        let lhs = radial_bilaplacian(&u, 1.0, &p, 5e-3).unwrap();
        let rhs = p.c * u(1.0).powf(p.sobolev_exp - 1.0);
        assert!((lhs - rhs).abs() <= 1e-4, "{lhs} vs {rhs}");
        assert!((rhs - 24.0).abs() < 1e-12);
    }

    #[test]
    fn stencil_domain_guard() {
        let p = derive_params(6, 1).unwrap();
        let f = |r: f64| r;
        assert!(matches!(
            radial_bilaplacian(&f, 2e-3, &p, 1e-3),
            Err(Error::StencilOutOfDomain { .. })
        ));
    }

    #[test]
    fn kelvin_identity_residuals() {
        let p = derive_params(6, 1).unwrap();
        let gauss = |r: f64| (-r * r).exp();
        let res = verify_kelvin_identity(&gauss, 1.0, &[0.5, 1.0, 2.0], &p, 5e-3).unwrap();
        assert!(res <= 1e-4, "gaussian residual {res}");
        // both sides vanish on the fundamental profile up to amplified
        // stencil noise: the r = 0.5 sample scales the far side by 2^10
        let fundamental = |r: f64| r.powi(-2);
        let res = verify_kelvin_identity(&fundamental, 1.0, &[0.5, 1.0, 2.0], &p, 5e-3).unwrap();
        assert!(res <= 1e-2, "fundamental residual {res}");
        // the spherical solution is a Kelvin fixed point; samples near the
        // unit sphere keep the (mu/r)^{n+4} amplification mild
        let u = |r: f64| spherical_radial(&p, 1.0, r);
        let res = verify_kelvin_identity(&u, 1.0, &[0.7, 1.0, 1.4], &p, 5e-3).unwrap();
        assert!(res <= 1e-4, "spherical residual {res}");
    }

    #[test]
    fn three_spheres_cases() {
        let p = derive_params(6, 1).unwrap();
        let probes: Vec<f64> = (1..20).map(|k| 0.5 + 0.1 * k as f64).collect();
        // equality family A + B r^{4-n}
        let flat = |r: f64| 1.0 + 2.0 * r.powi(-2);
        let rep = three_spheres_check(&flat, 0.4, 2.6, &probes, &p).unwrap();
        assert!(rep.margins.iter().all(|&(_, m)| m.abs() <= 1e-10));
        // superharmonic spherical solution satisfies the inequality
        let u = |r: f64| spherical_radial(&p, 1.0, r);
        let rep = three_spheres_check(&u, 0.4, 2.6, &probes, &p).unwrap();
        assert!(rep.min_margin >= -1e-10, "min margin {}", rep.min_margin);
        // r^2 is not superharmonic and must be caught
        let bad = |r: f64| r * r;
        let rep = three_spheres_check(&bad, 0.4, 2.6, &probes, &p).unwrap();
        assert!(rep.min_margin < 0.0);
        // ordering guard
        assert!(matches!(
            three_spheres_check(&u, 2.6, 0.4, &probes, &p),
            Err(Error::BadOrdering)
        ));
    }

    #[test]
    fn spherical_solution_is_superharmonic_radially() {
        // u'' + (n-1) u'/r <= 1e-8 at 100 log-spaced radii
        let p = derive_params(6, 1).unwrap();
        let u = |r: f64| spherical_radial(&p, 1.0, r);
        let h = 1e-3;
        for &r in log_grid(1e-2, 1e2, 100).iter() {
            let f: Vec<f64> = (-3..=3).map(|k| u(r + k as f64 * h * r.min(1.0))).collect();
            let hh = h * r.min(1.0);
            let lap = stencil::d2(&f, hh) + (p.n as f64 - 1.0) / r * stencil::d1(&f, hh);
            assert!(lap <= 1e-8, "r = {r}: radial laplacian {lap}");
        }
    }
}
