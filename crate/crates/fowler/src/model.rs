//! Dimension-derived constants and the two closed-form solution families.
//!
//! Everything here is exact arithmetic on the dimension `n` and component
//! count `p`: the coupling constant, the cylinder ODE coefficients, the
//! constant-orbit necksize `a0`, and the sech profile of the spherical
//! solution traced on the cylinder.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::CylState;

/// All constants derived from the dimension `n >= 5` and component count `p >= 1`.
#[derive(Debug, Clone, Serialize)]
pub struct Params {
    pub n: u32,
    pub p: usize,
    /// Fowler rescaling exponent (n-4)/2.
    pub gamma: f64,
    /// Coupling constant n(n-4)(n^2-4)/16.
    pub c: f64,
    /// c / 2**, the potential weight in the Hamiltonian.
    pub chat: f64,
    /// n^2 (n-4)^2 / 16.
    pub k0: f64,
    /// (n^2 - 4n + 8) / 2.
    pub k2: f64,
    /// n (n-4) / 4, weight of the angular terms (documented, never evaluated).
    pub j0: f64,
    /// Critical exponent 2** = 2n/(n-4).
    pub sobolev_exp: f64,
    /// Necksize of the constant cylinder orbit, [n(n-4)/(n^2-4)]^((n-4)/8).
    pub a0: f64,
    /// Roots of r^4 - K2 r^2 + K0 = 0, ascending: {-n/2, -(n-4)/2, (n-4)/2, n/2}.
    pub char_roots: [f64; 4],
    /// Surface area of the unit sphere S^{n-1}, 2 pi^{n/2} / Gamma(n/2).
    pub sphere_area: f64,
}

/// Populate [`Params`] from the dimension and component count.
pub fn derive_params(n: u32, p: usize) -> Result<Params> {
    if n < 5 {
        return Err(Error::DimensionTooSmall(n));
    }
    if p < 1 {
        return Err(Error::InvalidComponentCount(p));
    }
    let nf = n as f64;
    let gamma = (nf - 4.0) / 2.0;
    let c = nf * (nf - 4.0) * (nf * nf - 4.0) / 16.0;
    let sobolev_exp = 2.0 * nf / (nf - 4.0);
    let chat = c / sobolev_exp;
    let k0 = nf * nf * (nf - 4.0) * (nf - 4.0) / 16.0;
    let k2 = (nf * nf - 4.0 * nf + 8.0) / 2.0;
    let j0 = nf * (nf - 4.0) / 4.0;
    let a0 = (nf * (nf - 4.0) / (nf * nf - 4.0)).powf((nf - 4.0) / 8.0);
    let half_n = nf / 2.0;
    Ok(Params {
        n,
        p,
        gamma,
        c,
        chat,
        k0,
        k2,
        j0,
        sobolev_exp,
        a0,
        char_roots: [-half_n, -gamma, gamma, half_n],
        sphere_area: 2.0 * PI.powf(nf / 2.0) / gamma_half_integer(n),
    })
}

/// Gamma(m/2) for integer m >= 1 by the half-integer recurrence,
/// starting from Gamma(1/2) = sqrt(pi) and Gamma(1) = 1.
pub fn gamma_half_integer(m: u32) -> f64 {
    assert!(m >= 1, "gamma_half_integer needs m >= 1");
    let (mut value, mut arg2) = if m % 2 == 0 { (1.0, 2) } else { (PI.sqrt(), 1) };
    while arg2 < m {
        value *= arg2 as f64 / 2.0;
        arg2 += 2;
    }
    value
}

/// Derivatives of s -> sech(s)^gamma up to `order`.
///
/// Each derivative is v(s) times a polynomial in T = tanh(s), built by the
/// recurrence P_{k+1} = (1 - T^2) P_k' - gamma T P_k with P_0 = 1, so the
/// returned values carry no finite-difference error.
pub fn sech_power_derivs(gamma: f64, s: f64, order: usize) -> Vec<f64> {
    let t = s.tanh();
    let v = (1.0 / s.cosh()).powf(gamma);
    let mut poly = vec![1.0_f64];
    let mut out = Vec::with_capacity(order + 1);
    out.push(v * eval_poly(&poly, t));
    for _ in 0..order {
        poly = tanh_deriv_poly(&poly, gamma);
        out.push(v * eval_poly(&poly, t));
    }
    out
}

fn tanh_deriv_poly(p: &[f64], gamma: f64) -> Vec<f64> {
    let mut q = vec![0.0; p.len() + 1];
    for (k, &coef) in p.iter().enumerate() {
        if k >= 1 {
            let d = coef * k as f64;
            q[k - 1] += d;
            q[k + 1] -= d;
        }
        q[k + 1] -= gamma * coef;
    }
    q
}

fn eval_poly(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Scalar cylinder trace of the spherical solution centered at the origin:
/// v(t) = sech(t - ln mu)^gamma with its first three derivatives.
pub fn spherical_state(params: &Params, mu: f64, t: f64) -> Result<CylState> {
    if mu <= 0.0 || !mu.is_finite() {
        return Err(Error::InvalidInput(format!("mu must be positive (got {mu})")));
    }
    let d = sech_power_derivs(params.gamma, t - mu.ln(), 3);
    Ok(CylState::scalar(t, d[0], d[1], d[2], d[3]))
}

/// Radial profile of the scalar spherical solution, u(r) = (2 mu / (1 + mu^2 r^2))^gamma.
pub fn spherical_radial(params: &Params, mu: f64, r: f64) -> f64 {
    (2.0 * mu / (1.0 + mu * mu * r * r)).powf(params.gamma)
}

/// Spherical family member: concentration mu and unit vector of
/// nonnegative component weights.
#[derive(Debug, Clone, Serialize)]
pub struct SphericalSolution {
    pub mu: f64,
    pub lambda: Vec<f64>,
}

impl SphericalSolution {
    pub fn new(mu: f64, lambda: Vec<f64>) -> Result<Self> {
        if mu <= 0.0 || !mu.is_finite() {
            return Err(Error::InvalidInput(format!("mu must be positive (got {mu})")));
        }
        validate_unit_vector(&lambda, false)?;
        Ok(Self { mu, lambda })
    }

    /// Cylinder state at time t with every component scaled by lambda.
    pub fn state(&self, params: &Params, t: f64) -> CylState {
        let d = sech_power_derivs(params.gamma, t - self.mu.ln(), 3);
        CylState::scalar(t, d[0], d[1], d[2], d[3]).scaled(&self.lambda)
    }

    /// Component values u_i(r) = lambda_i (2 mu / (1 + mu^2 r^2))^gamma.
    pub fn radial(&self, params: &Params, r: f64) -> Vec<f64> {
        let u = spherical_radial(params, self.mu, r);
        self.lambda.iter().map(|l| l * u).collect()
    }
}

/// Period tag of a Delaunay orbit: the a = a0 endpoint is a fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Period {
    Constant,
    Finite(f64),
}

/// Delaunay family member: necksize a, shooting value b = v''(0),
/// fundamental period, component weights and phase shift.
#[derive(Debug, Clone, Serialize)]
pub struct DelaunaySolution {
    pub a: f64,
    pub b: f64,
    pub period: Period,
    pub lambda: Vec<f64>,
    pub phase: f64,
}

impl DelaunaySolution {
    pub fn new(params: &Params, a: f64, b: f64, period: Period, lambda: Vec<f64>, phase: f64) -> Result<Self> {
        if !(a > 0.0 && a <= params.a0) {
            return Err(Error::NecksizeOutOfRange { a, a0: params.a0 });
        }
        validate_unit_vector(&lambda, true)?;
        Ok(Self { a, b, period, lambda, phase })
    }

    /// Scalar Cauchy data (a, 0, b, 0) at t = 0.
    pub fn initial_state(&self) -> CylState {
        CylState::scalar(0.0, self.a, 0.0, self.b, 0.0)
    }
}

/// The degenerate Delaunay orbit: v = a0 with b = 0, a fixed point of the flow.
pub fn constant_solution(params: &Params) -> DelaunaySolution {
    let w = 1.0 / (params.p as f64).sqrt();
    DelaunaySolution {
        a: params.a0,
        b: 0.0,
        period: Period::Constant,
        lambda: vec![w; params.p],
        phase: 0.0,
    }
}

/// Per-component value l such that the constant p-vector (l, ..., l) is a
/// fixed point of the cylinder system: the positive root of
/// K0 = c (sqrt(p) l)^{2** - 2}, located by bisection.
pub fn equilibrium_component(params: &Params) -> f64 {
    let q = params.sobolev_exp - 2.0;
    let scale = (params.p as f64).sqrt().powf(q);
    let g = |l: f64| params.k0 - params.c * scale * l.powf(q);
    let mut lo = 1e-10;
    let mut hi = 10.0 * params.a0;
    debug_assert!(g(lo) > 0.0 && g(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn validate_unit_vector(lambda: &[f64], strictly_positive: bool) -> Result<()> {
    if lambda.is_empty() {
        return Err(Error::InvalidComponentCount(0));
    }
    for &l in lambda {
        if !l.is_finite() || l < 0.0 || (strictly_positive && l == 0.0) {
            return Err(Error::InvalidInput(format!(
                "component weights must be {} (got {l})",
                if strictly_positive { "strictly positive" } else { "nonnegative" }
            )));
        }
    }
    let norm: f64 = lambda.iter().map(|l| l * l).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("lambda must be a unit vector (|lambda| = {norm})")));
    }
    Ok(())
}
