//! Hamiltonian energy, the cylindrical and spherical Pohozaev invariants,
//! and runtime monitors for the qualitative bounds that bounded orbits obey.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Params;
use crate::ode::{CylState, Trajectory};

/// H = -<V''', V'> + |V''|^2/2 + K2 |V'|^2/2 - K0 |V|^2/2 + chat |V|^{2**},
/// conserved along every orbit of the cylinder system.
pub fn hamiltonian(params: &Params, state: &CylState) -> f64 {
    let mut quad = 0.0;
    let mut norm2 = 0.0;
    for c in &state.comps {
        quad += -c.d3 * c.d1 + 0.5 * c.d2 * c.d2 + 0.5 * params.k2 * c.d1 * c.d1
            - 0.5 * params.k0 * c.v * c.v;
        norm2 += c.v * c.v;
    }
    quad + params.chat * norm2.powf(0.5 * params.sobolev_exp)
}

/// (cylindrical, spherical) Pohozaev invariant of a state: for radial
/// solutions the cylindrical integral collapses to H itself, and the
/// spherical one picks up the unit-sphere area.
pub fn pohozaev(params: &Params, state: &CylState) -> (f64, f64) {
    let cyl = hamiltonian(params, state);
    (cyl, params.sphere_area * cyl)
}

/// Max |H(state) - H(first state)| along a trajectory.
pub fn drift(params: &Params, traj: &Trajectory) -> Result<f64> {
    if traj.states.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let h0 = hamiltonian(params, traj.first());
    Ok(traj
        .states
        .iter()
        .map(|s| (hamiltonian(params, s) - h0).abs())
        .fold(0.0, f64::max))
}

/// Outcome of a pointwise monitor: small numerical violations must be
/// visible, not fatal, so monitors report rather than raise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonitorResult {
    pub pass: bool,
    pub worst_margin: f64,
    pub worst_t: f64,
}

/// v_i' < gamma v_i at every state; margin gamma v_i - d1_i must stay positive.
/// Components must be strictly positive for the monitor to apply.
pub fn monitor_gradient_bound(params: &Params, traj: &Trajectory) -> Result<MonitorResult> {
    if traj.states.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let mut worst_margin = f64::INFINITY;
    let mut worst_t = traj.first().t;
    for s in &traj.states {
        for (i, c) in s.comps.iter().enumerate() {
            if c.v <= 0.0 {
                return Err(Error::NonPositiveComponent { component: i, t: s.t });
            }
            let margin = params.gamma * c.v - c.d1;
            if margin < worst_margin {
                worst_margin = margin;
                worst_t = s.t;
            }
        }
    }
    Ok(MonitorResult { pass: worst_margin > 0.0, worst_margin, worst_t })
}

/// Uniform bound K0^{(n-4)/8} on each component of a bounded orbit.
pub fn uniform_bound(params: &Params) -> f64 {
    params.k0.powf(params.gamma / 4.0)
}

/// v_i(t) < K0^{(n-4)/8} at every state; reports the smallest gap.
pub fn monitor_bound(params: &Params, traj: &Trajectory) -> Result<MonitorResult> {
    if traj.states.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let bound = uniform_bound(params);
    let mut worst_margin = f64::INFINITY;
    let mut worst_t = traj.first().t;
    for s in &traj.states {
        for c in &s.comps {
            let margin = bound - c.v;
            if margin < worst_margin {
                worst_margin = margin;
                worst_t = s.t;
            }
        }
    }
    Ok(MonitorResult { pass: worst_margin > 0.0, worst_margin, worst_t })
}

/// Max over time and component pairs of |v_i/v_j - v_i(t0)/v_j(t0)|:
/// zero exactly when the components stay proportional. Zero by convention
/// for scalar trajectories.
pub fn quotient_spread(traj: &Trajectory) -> Result<f64> {
    if traj.states.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let p = traj.first().p();
    if p < 2 {
        return Ok(0.0);
    }
    for s in &traj.states {
        for (i, c) in s.comps.iter().enumerate() {
            if c.v <= 0.0 {
                return Err(Error::NonPositiveComponent { component: i, t: s.t });
            }
        }
    }
    let first = traj.first();
    let mut spread = 0.0_f64;
    for s in &traj.states {
        for i in 0..p {
            for j in 0..p {
                if i == j {
                    continue;
                }
                let q0 = first.comps[i].v / first.comps[j].v;
                let q = s.comps[i].v / s.comps[j].v;
                spread = spread.max((q - q0).abs());
            }
        }
    }
    Ok(spread)
}

/// Tail behavior of one component over the trailing window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum AsymptoticLimit {
    Limit(f64),
    NotConvergent,
}

/// Estimate per-component tail limits over the trailing `window` of time:
/// a limit requires oscillation below 1e-6 and all derivatives below 1e-6
/// in magnitude across the window.
pub fn asymptotic_limits(traj: &Trajectory, window: f64) -> Result<Vec<AsymptoticLimit>> {
    if traj.states.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let t_end = traj.last().t;
    let tail: Vec<&CylState> = traj.states.iter().filter(|s| s.t >= t_end - window).collect();
    let p = traj.first().p();
    let mut out = Vec::with_capacity(p);
    for i in 0..p {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut mean = 0.0;
        let mut deriv_sup = 0.0_f64;
        for s in &tail {
            let c = s.comps[i];
            lo = lo.min(c.v);
            hi = hi.max(c.v);
            mean += c.v;
            deriv_sup = deriv_sup.max(c.d1.abs()).max(c.d2.abs()).max(c.d3.abs());
        }
        mean /= tail.len() as f64;
        if hi - lo < 1e-6 && deriv_sup < 1e-6 {
            out.push(AsymptoticLimit::Limit(mean));
        } else {
            out.push(AsymptoticLimit::NotConvergent);
        }
    }
    Ok(out)
}

/// Conservation summary plus monitor outcomes for one trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantReport {
    #[serde(rename = "H0")]
    pub h0: f64,
    pub max_drift: f64,
    pub pohozaev_cyl: f64,
    pub pohozaev_sph: f64,
    pub monitors: BTreeMap<String, MonitorResult>,
}

/// Assemble the report: H at the first state is the orbit's invariant, the
/// spherical Pohozaev is its sphere-area multiple, and both monitors run
/// when applicable (the gradient monitor needs strictly positive data).
pub fn report(params: &Params, traj: &Trajectory) -> Result<InvariantReport> {
    let max_drift = drift(params, traj)?;
    let (pohozaev_cyl, pohozaev_sph) = pohozaev(params, traj.first());
    let mut monitors = BTreeMap::new();
    if let Ok(m) = monitor_gradient_bound(params, traj) {
        monitors.insert("gradient_bound".to_string(), m);
    }
    monitors.insert("uniform_bound".to_string(), monitor_bound(params, traj)?);
    Ok(InvariantReport {
        h0: hamiltonian(params, traj.first()),
        max_drift,
        pohozaev_cyl,
        pohozaev_sph,
        monitors,
    })
}
