//! The cylinder system as a first-order ODE in R^{4p}: fixed RK4 and an
//! embedded Dormand-Prince 4(5) stepper with PI control, sign-change event
//! detection on v', and divergence / zero-crossing termination.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Params;

/// One component slot of a cylinder state: value and first three derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comp {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

/// One time slice of the cylinder ODE.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CylState {
    pub t: f64,
    pub comps: Vec<Comp>,
}

impl CylState {
    pub fn new(t: f64, comps: Vec<Comp>) -> Self {
        Self { t, comps }
    }

    pub fn scalar(t: f64, v: f64, d1: f64, d2: f64, d3: f64) -> Self {
        Self { t, comps: vec![Comp { v, d1, d2, d3 }] }
    }

    pub fn zero(t: f64, p: usize) -> Self {
        Self { t, comps: vec![Comp { v: 0.0, d1: 0.0, d2: 0.0, d3: 0.0 }; p] }
    }

    /// Cauchy slice (a, 0, b, 0) in every component, scaled by `lambda`.
    pub fn cauchy(a: f64, b: f64, lambda: &[f64]) -> Self {
        let comps = lambda
            .iter()
            .map(|&l| Comp { v: l * a, d1: 0.0, d2: l * b, d3: 0.0 })
            .collect();
        Self { t: 0.0, comps }
    }

    /// Product state: lambda.len() copies of the scalar slice, each scaled by
    /// the matching weight. Panics unless `self` is scalar.
    pub fn scaled(&self, lambda: &[f64]) -> CylState {
        assert_eq!(self.comps.len(), 1, "scaled() expects a scalar state");
        let c = self.comps[0];
        let comps = lambda
            .iter()
            .map(|&l| Comp { v: l * c.v, d1: l * c.d1, d2: l * c.d2, d3: l * c.d3 })
            .collect();
        CylState { t: self.t, comps }
    }

    pub fn p(&self) -> usize {
        self.comps.len()
    }

    pub fn is_finite(&self) -> bool {
        self.comps
            .iter()
            .all(|c| c.v.is_finite() && c.d1.is_finite() && c.d2.is_finite() && c.d3.is_finite())
    }

    /// Euclidean norm of the component values |V|.
    pub fn norm(&self) -> f64 {
        self.comps.iter().map(|c| c.v * c.v).sum::<f64>().sqrt()
    }

    /// Euclidean distance in the full 4p-dimensional phase space.
    pub fn distance(&self, other: &CylState) -> f64 {
        assert_eq!(self.p(), other.p());
        self.comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| {
                (a.v - b.v).powi(2)
                    + (a.d1 - b.d1).powi(2)
                    + (a.d2 - b.d2).powi(2)
                    + (a.d3 - b.d3).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(4 * self.comps.len());
        for c in &self.comps {
            y.extend_from_slice(&[c.v, c.d1, c.d2, c.d3]);
        }
        y
    }

    pub fn from_flat(t: f64, y: &[f64]) -> Self {
        debug_assert_eq!(y.len() % 4, 0);
        let comps = y
            .chunks_exact(4)
            .map(|c| Comp { v: c[0], d1: c[1], d2: c[2], d3: c[3] })
            .collect();
        Self { t, comps }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum EventKind {
    /// Sign change of v_i' (component index).
    DerivZero(usize),
    /// Some |v_i| exceeded the divergence bound.
    Divergence,
    /// v_i dropped below -zero_tolerance (component index).
    ZeroHit(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    /// State at the (refined) event time.
    pub state: CylState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Terminal {
    Completed,
    Diverged,
    HitZero,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub states: Vec<CylState>,
    pub events: Vec<Event>,
    pub terminal: Terminal,
}

impl Trajectory {
    pub fn first(&self) -> &CylState {
        &self.states[0]
    }

    pub fn last(&self) -> &CylState {
        self.states.last().expect("trajectory has at least one state")
    }

    /// DerivZero events of component `comp` whose refined state has d2 < 0
    /// (local maxima of v_comp).
    pub fn maxima(&self, comp: usize) -> Vec<&Event> {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::DerivZero(comp) && e.state.comps[comp].d2 < 0.0)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Method {
    FixedRk4 { dt: f64 },
    Adaptive45 { abs_tol: f64, rel_tol: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepperConfig {
    pub method: Method,
    pub t_end: f64,
    pub divergence_bound: f64,
    pub zero_tolerance: f64,
    /// Keep every k-th accepted step in `states` (the final state is always kept).
    pub record_every: usize,
}

impl StepperConfig {
    /// An order of magnitude above the uniform bound on bounded orbits, so
    /// genuine orbits never trip it.
    pub fn default_divergence_bound(params: &Params) -> f64 {
        10.0 * params.k0.powf(params.gamma / 4.0).max(1.0)
    }

    pub fn fixed(params: &Params, dt: f64, t_end: f64) -> Self {
        Self {
            method: Method::FixedRk4 { dt },
            t_end,
            divergence_bound: Self::default_divergence_bound(params),
            zero_tolerance: 1e-12,
            record_every: 1,
        }
    }

    pub fn adaptive(params: &Params, t_end: f64) -> Self {
        Self {
            method: Method::Adaptive45 { abs_tol: 1e-10, rel_tol: 1e-10 },
            t_end,
            divergence_bound: Self::default_divergence_bound(params),
            zero_tolerance: 1e-12,
            record_every: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self.method {
            Method::FixedRk4 { dt } => dt > 0.0 && dt.is_finite(),
            Method::Adaptive45 { abs_tol, rel_tol } => abs_tol > 0.0 && rel_tol > 0.0,
        };
        if !ok || self.divergence_bound <= 0.0 || self.zero_tolerance < 0.0 || self.record_every == 0 {
            return Err(Error::InvalidInput("stepper config requires positive step/tolerances".into()));
        }
        Ok(())
    }
}

/// Right-hand side of the first-order system. The coupling scalar
/// c |V|^{2**-2} is computed once and shared across components, so exactly
/// proportional states stay exactly proportional through a step.
pub fn rhs(params: &Params, state: &CylState) -> Result<Vec<f64>> {
    if !state.is_finite() {
        return Err(Error::NonFiniteState(state.t));
    }
    let y = state.flatten();
    let mut dy = vec![0.0; y.len()];
    rhs_flat(params, &y, &mut dy);
    Ok(dy)
}

#[inline]
fn rhs_flat(params: &Params, y: &[f64], dy: &mut [f64]) {
    let p = y.len() / 4;
    let mut norm2 = 0.0;
    for i in 0..p {
        let v = y[4 * i];
        norm2 += v * v;
    }
    let coupling = params.c * norm2.powf(0.5 * (params.sobolev_exp - 2.0));
    for i in 0..p {
        let b = 4 * i;
        dy[b] = y[b + 1];
        dy[b + 1] = y[b + 2];
        dy[b + 2] = y[b + 3];
        dy[b + 3] = params.k2 * y[b + 2] - params.k0 * y[b] + coupling * y[b];
    }
}

struct Workspace {
    k: Vec<Vec<f64>>,
    tmp: Vec<f64>,
    y_hi: Vec<f64>,
    y_lo: Vec<f64>,
}

impl Workspace {
    fn new(dim: usize) -> Self {
        Self {
            k: (0..7).map(|_| vec![0.0; dim]).collect(),
            tmp: vec![0.0; dim],
            y_hi: vec![0.0; dim],
            y_lo: vec![0.0; dim],
        }
    }
}

fn rk4_step(params: &Params, y: &[f64], h: f64, ws: &mut Workspace, out: &mut [f64]) {
    let dim = y.len();
    rhs_flat(params, y, &mut ws.k[0]);
    for i in 0..dim {
        ws.tmp[i] = y[i] + 0.5 * h * ws.k[0][i];
    }
    rhs_flat(params, &ws.tmp, &mut ws.k[1]);
    for i in 0..dim {
        ws.tmp[i] = y[i] + 0.5 * h * ws.k[1][i];
    }
    rhs_flat(params, &ws.tmp, &mut ws.k[2]);
    for i in 0..dim {
        ws.tmp[i] = y[i] + h * ws.k[2][i];
    }
    rhs_flat(params, &ws.tmp, &mut ws.k[3]);
    for i in 0..dim {
        out[i] = y[i] + h / 6.0 * (ws.k[0][i] + 2.0 * ws.k[1][i] + 2.0 * ws.k[2][i] + ws.k[3][i]);
    }
}

// Dormand-Prince 4(5) tableau (stage times omitted: the system is autonomous).
const DP_A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand-Prince stage sweep into ws.y_hi / ws.y_lo; returns the
/// weighted RMS error estimate (NaN-safe: non-finite maps to +inf).
fn dp45_step(params: &Params, y: &[f64], h: f64, abs_tol: f64, rel_tol: f64, ws: &mut Workspace) -> f64 {
    let dim = y.len();
    rhs_flat(params, y, &mut ws.k[0]);
    for s in 1..7 {
        for i in 0..dim {
            let mut acc = 0.0;
            for (j, a) in DP_A[s - 1].iter().enumerate().take(s) {
                acc += a * ws.k[j][i];
            }
            ws.tmp[i] = y[i] + h * acc;
        }
        rhs_flat(params, &ws.tmp, &mut ws.k[s]);
    }
    let mut err2 = 0.0;
    for i in 0..dim {
        let mut acc5 = 0.0;
        let mut acc4 = 0.0;
        for s in 0..7 {
            acc5 += DP_B5[s] * ws.k[s][i];
            acc4 += DP_B4[s] * ws.k[s][i];
        }
        ws.y_hi[i] = y[i] + h * acc5;
        ws.y_lo[i] = y[i] + h * acc4;
        let scale = abs_tol + rel_tol * y[i].abs().max(ws.y_hi[i].abs());
        let e = (ws.y_hi[i] - ws.y_lo[i]) / scale;
        err2 += e * e;
    }
    let err = (err2 / dim as f64).sqrt();
    if err.is_finite() {
        err
    } else {
        f64::INFINITY
    }
}

/// Integrate `init` to `cfg.t_end` (either direction), recording states,
/// refining v' sign-change events, and terminating on divergence or on a
/// negative excursion of any component.
pub fn integrate(params: &Params, init: &CylState, cfg: &StepperConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if !init.is_finite() {
        return Err(Error::NonFiniteState(init.t));
    }
    let dim = 4 * init.p();
    let p = init.p();
    let mut ws = Workspace::new(dim);
    let mut y = init.flatten();
    let mut t = init.t;
    let dir = if cfg.t_end >= init.t { 1.0 } else { -1.0 };
    let span = (cfg.t_end - init.t).abs();

    let mut states = vec![init.clone()];
    let mut events: Vec<Event> = Vec::new();
    let mut terminal = Terminal::Completed;

    if span == 0.0 {
        return Ok(Trajectory { states, events, terminal });
    }

    // h is the magnitude of the next trial step
    let mut h = match cfg.method {
        Method::FixedRk4 { dt } => dt,
        Method::Adaptive45 { .. } => (span / 100.0).clamp(1e-6, 1e-2),
    };
    let mut err_prev: f64 = 1e-4;
    let mut y_new: Vec<f64> = vec![0.0; dim];
    let end_slack = 1e-14 * span.max(1.0);
    let mut step_index = 0usize;

    'outer: loop {
        let remaining = (cfg.t_end - t) * dir;
        if remaining <= end_slack {
            break;
        }

        let h_step; // signed size of the accepted step
        let mut t_next = f64::NAN; // exact time bookkeeping for fixed stepping
        match cfg.method {
            Method::FixedRk4 { dt } => {
                // land on init.t + k dt exactly, avoiding accumulation drift
                let full = init.t + (step_index + 1) as f64 * dt * dir;
                t_next = if (cfg.t_end - full) * dir >= 0.0 { full } else { cfg.t_end };
                h_step = t_next - t;
                rk4_step(params, &y, h_step, &mut ws, &mut y_new);
            }
            Method::Adaptive45 { abs_tol, rel_tol } => {
                let mut trial = h.min(remaining);
                loop {
                    let err = dp45_step(params, &y, trial * dir, abs_tol, rel_tol, &mut ws);
                    if err <= 1.0 {
                        y_new.copy_from_slice(&ws.y_hi);
                        let fac = 0.9 * err.max(1e-12).powf(-0.17) * err_prev.powf(0.04);
                        err_prev = err.max(1e-12);
                        h = (trial * fac.clamp(0.2, 5.0)).max(1e-14);
                        break;
                    }
                    trial *= if err.is_finite() {
                        (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
                    } else {
                        0.1
                    };
                    if trial < 1e-14 {
                        return Err(Error::StepSizeUnderflow(t));
                    }
                }
                h_step = trial * dir;
            }
        }
        let t_new = if t_next.is_finite() { t_next } else { t + h_step };

        if !y_new.iter().all(|x| x.is_finite()) {
            events.push(Event { t, kind: EventKind::Divergence, state: CylState::from_flat(t, &y) });
            terminal = Terminal::Diverged;
            break 'outer;
        }

        // v' sign-change events, refined inside the bracketing step
        for i in 0..p {
            let d1_old = y[4 * i + 1];
            let d1_new = y_new[4 * i + 1];
            if d1_old != 0.0 && (d1_old * d1_new < 0.0 || d1_new == 0.0) {
                let (te, ye) = refine_deriv_zero(params, &y, t, h_step, i);
                events.push(Event {
                    t: te,
                    kind: EventKind::DerivZero(i),
                    state: CylState::from_flat(te, &ye),
                });
            }
        }

        t = t_new;
        std::mem::swap(&mut y, &mut y_new);
        step_index += 1;

        let mut stop = None;
        for i in 0..p {
            if y[4 * i].abs() > cfg.divergence_bound {
                stop = Some((EventKind::Divergence, Terminal::Diverged));
                break;
            }
            if y[4 * i] < -cfg.zero_tolerance {
                stop = Some((EventKind::ZeroHit(i), Terminal::HitZero));
                break;
            }
        }
        if let Some((kind, term)) = stop {
            let state = CylState::from_flat(t, &y);
            events.push(Event { t, kind, state: state.clone() });
            states.push(state);
            terminal = term;
            break 'outer;
        }

        let at_end = (cfg.t_end - t) * dir <= end_slack;
        if step_index % cfg.record_every == 0 || at_end {
            states.push(CylState::from_flat(t, &y));
        }
        if at_end {
            break;
        }
    }

    events.sort_by(|a, b| a.t.partial_cmp(&b.t).expect("finite event times"));
    Ok(Trajectory { states, events, terminal })
}

/// Locate the zero of d1_comp inside a step from (t0, y0) of signed width h:
/// quadratic interpolation from (d1, d2) at the left end and d1 at the right
/// end, then Newton corrections evaluated by RK4 sub-integration.
fn refine_deriv_zero(params: &Params, y0: &[f64], t0: f64, h: f64, comp: usize) -> (f64, Vec<f64>) {
    let dim = y0.len();
    let mut ws = Workspace::new(dim);
    let mut buf = vec![0.0; dim];

    let mut eval = |frac: f64| -> Vec<f64> {
        let n_sub = 4;
        let dt = frac * h / n_sub as f64;
        let mut cur = y0.to_vec();
        for _ in 0..n_sub {
            rk4_step(params, &cur, dt, &mut ws, &mut buf);
            std::mem::swap(&mut cur, &mut buf);
        }
        cur
    };

    let d1_0 = y0[4 * comp + 1];
    let d2_0 = y0[4 * comp + 2];
    let end = eval(1.0);
    let d1_h = end[4 * comp + 1];

    // work in the step fraction x = tau / h: q(x) = d1_0 + (d2_0 h) x + c2 x^2
    let b1 = d2_0 * h;
    let c2 = d1_h - d1_0 - b1;
    let mut x = quadratic_root_in_unit(d1_0, b1, c2).unwrap_or(0.5);

    let mut state = eval(x);
    for _ in 0..3 {
        let f = state[4 * comp + 1];
        let df = state[4 * comp + 2] * h; // d/dx
        if df.abs() < 1e-300 {
            break;
        }
        let next = x - f / df;
        if !next.is_finite() || !(0.0..=1.0).contains(&next) {
            break;
        }
        x = next;
        state = eval(x);
    }
    (t0 + x * h, state)
}

/// Root of a + b x + c x^2 inside [0, 1], if any.
fn quadratic_root_in_unit(a: f64, b: f64, c: f64) -> Option<f64> {
    let in_unit = |x: f64| x.is_finite() && (0.0..=1.0).contains(&x);
    if c.abs() < 1e-300 {
        if b.abs() < 1e-300 {
            return None;
        }
        let x = -a / b;
        return in_unit(x).then_some(x);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // numerically stable pair
    let q = -0.5 * (b + b.signum() * sq);
    let candidates = [q / c, if q != 0.0 { a / q } else { f64::NAN }];
    let mut best: Option<f64> = None;
    for x in candidates {
        if in_unit(x) && best.map_or(true, |b| x < b) {
            best = Some(x);
        }
    }
    best
}

/// Richardson order estimate for the fixed-RK4 stepper, or NoSignal when the
/// solution differences sit at rounding level (e.g. the zero orbit).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConvergenceOrder {
    Order(f64),
    NoSignal,
}

pub fn measure_convergence_order(
    params: &Params,
    init: &CylState,
    duration: f64,
    dt: f64,
) -> Result<ConvergenceOrder> {
    let run = |dt: f64| -> Result<CylState> {
        let cfg = StepperConfig {
            method: Method::FixedRk4 { dt },
            t_end: init.t + duration,
            divergence_bound: 1e9,
            zero_tolerance: 1e9,
            record_every: usize::MAX - 1,
        };
        Ok(integrate(params, init, &cfg)?.last().clone())
    };
    let y1 = run(dt)?;
    let y2 = run(dt / 2.0)?;
    let y4 = run(dt / 4.0)?;
    let scale = y4.comps.iter().map(|c| c.v.abs()).fold(1.0, f64::max);
    let e1 = y1.distance(&y4);
    let e2 = y2.distance(&y4);
    if e1 < 1e-13 * scale || e2 < 1e-14 * scale {
        return Ok(ConvergenceOrder::NoSignal);
    }
    Ok(ConvergenceOrder::Order((e1 / e2).log2()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_params, spherical_state};

    #[test]
    fn rhs_zero_state_is_zero() {
        let p = derive_params(6, 3).unwrap();
        let dy = rhs(&p, &CylState::zero(0.0, 3)).unwrap();
        assert!(dy.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn rhs_fixed_point_and_peak() {
        let p = derive_params(6, 1).unwrap();
        let dy = rhs(&p, &CylState::scalar(0.0, p.a0, 0.0, 0.0, 0.0)).unwrap();
        for d in dy {
            assert!(d.abs() < 1e-14);
        }
        // (1, 0, -1, 0): fourth derivative K2(-1) - K0 + c = 5
        let dy = rhs(&p, &CylState::scalar(0.0, 1.0, 0.0, -1.0, 0.0)).unwrap();
        assert_eq!(dy, vec![0.0, -1.0, 0.0, 5.0]);
        // cross-check against the exact fourth derivative of sech at the peak
        let d = crate::model::sech_power_derivs(1.0, 0.0, 4);
        assert!((d[4] - 5.0).abs() < 1e-14);
    }

    #[test]
    fn rhs_rejects_non_finite() {
        let p = derive_params(6, 1).unwrap();
        let s = CylState::scalar(0.0, f64::NAN, 0.0, 0.0, 0.0);
        assert!(matches!(rhs(&p, &s), Err(Error::NonFiniteState(_))));
    }

    #[test]
    fn zero_orbit_stays_zero() {
        let p = derive_params(6, 2).unwrap();
        let cfg = StepperConfig::fixed(&p, 1e-2, 5.0);
        let traj = integrate(&p, &CylState::zero(0.0, 2), &cfg).unwrap();
        assert_eq!(traj.terminal, Terminal::Completed);
        assert!(traj.events.is_empty());
        for s in &traj.states {
            assert_eq!(s.norm(), 0.0);
        }
    }

    #[test]
    fn constant_orbit_stays_constant() {
        // the fixed point is hyperbolic, so rounding noise leaves it like
        // e^{3.58 t}: a0-representation error ~1e-16 passes 1e-10 near t ~ 5
        let p = derive_params(6, 1).unwrap();
        let cfg = StepperConfig::fixed(&p, 1e-2, 3.0);
        let init = CylState::scalar(0.0, p.a0, 0.0, 0.0, 0.0);
        let traj = integrate(&p, &init, &cfg).unwrap();
        assert_eq!(traj.terminal, Terminal::Completed);
        let max_dev = traj
            .states
            .iter()
            .map(|s| (s.comps[0].v - p.a0).abs())
            .fold(0.0, f64::max);
        assert!(max_dev <= 1e-10, "max deviation {max_dev}");
    }

    #[test]
    fn divergence_and_zero_hit_terminate() {
        let p = derive_params(6, 1).unwrap();
        let cfg = StepperConfig::adaptive(&p, 50.0);
        // far off the bounded manifold: large positive curvature diverges
        let up = integrate(&p, &CylState::scalar(0.0, 0.5, 0.0, 5.0, 0.0), &cfg).unwrap();
        assert_eq!(up.terminal, Terminal::Diverged);
        // large negative curvature crosses zero
        let down = integrate(&p, &CylState::scalar(0.0, 0.5, 0.0, -5.0, 0.0), &cfg).unwrap();
        assert_eq!(down.terminal, Terminal::HitZero);
        assert!(matches!(down.events.last().unwrap().kind, EventKind::ZeroHit(0)));
    }

    #[test]
    fn determinism_bitwise() {
        let p = derive_params(7, 2).unwrap();
        let init = CylState::cauchy(0.4, 0.05, &[0.6, 0.8]);
        let cfg = StepperConfig::adaptive(&p, 3.0);
        let a = integrate(&p, &init, &cfg).unwrap();
        let b = integrate(&p, &init, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn time_reversal_round_trip() {
        let p = derive_params(6, 1).unwrap();
        let init = spherical_state(&p, 1.0, -2.0).unwrap();
        let fwd = integrate(&p, &init, &StepperConfig::fixed(&p, 1e-3, 3.0)).unwrap();
        let mut back_cfg = StepperConfig::fixed(&p, 1e-3, -2.0);
        back_cfg.record_every = usize::MAX - 1;
        let back = integrate(&p, fwd.last(), &back_cfg).unwrap();
        let dist = back.last().distance(&init);
        assert!(dist <= 1e-9, "round-trip distance {dist}");
    }

    #[test]
    fn even_initial_data_gives_even_orbit() {
        let p = derive_params(6, 1).unwrap();
        let init = CylState::scalar(0.0, 0.5, 0.0, 0.2, 0.0);
        let fwd = integrate(&p, &init, &StepperConfig::fixed(&p, 1e-3, 2.0)).unwrap();
        let bwd = integrate(&p, &init, &StepperConfig::fixed(&p, 1e-3, -2.0)).unwrap();
        let f = fwd.last().comps[0];
        let b = bwd.last().comps[0];
        assert!((f.v - b.v).abs() < 1e-9);
        assert!((f.d1 + b.d1).abs() < 1e-9);
        assert!((f.d2 - b.d2).abs() < 1e-9);
        assert!((f.d3 + b.d3).abs() < 1e-9);
    }

    #[test]
    fn homoclinic_tracks_closed_form_through_peak() {
        // from t = -10 the RK4 orbit holds the sech profile to 1e-6 through
        // the peak; past it the e^{3t} mode amplifies rounding noise and
        // every f64 trajectory leaves the connection (HitZero near t ~ 3.7)
        let p = derive_params(6, 1).unwrap();
        let init = spherical_state(&p, 1.0, -10.0).unwrap();
        let traj = integrate(&p, &init, &StepperConfig::fixed(&p, 1e-3, 10.0)).unwrap();
        let mut sup = 0.0_f64;
        for s in traj.states.iter().filter(|s| s.t <= 0.0) {
            let exact = crate::model::sech_power_derivs(p.gamma, s.t, 3);
            sup = sup.max((s.comps[0].v - exact[0]).abs());
            sup = sup.max((s.comps[0].d1 - exact[1]).abs());
        }
        assert!(sup <= 1e-6, "sup deviation {sup} over [-10, 0]");
        assert!(traj.last().t < 10.0, "f64 cannot ride the connection to +10");
    }

    #[test]
    fn deriv_zero_events_are_refined() {
        // the homoclinic peak of sech^gamma sits exactly at t = ln(mu)
        let p = derive_params(6, 1).unwrap();
        let mu = 1.7;
        let init = spherical_state(&p, mu, mu.ln() - 3.0).unwrap();
        let traj = integrate(&p, &init, &StepperConfig::fixed(&p, 1e-3, mu.ln() + 3.0)).unwrap();
        let peaks = traj.maxima(0);
        assert_eq!(peaks.len(), 1);
        // against the closed form, limited by global integration error
        let err = (peaks[0].t - mu.ln()).abs();
        assert!(err <= 1e-8, "event time error {err}");
        // the refinement itself lands on the computed trajectory's zero of
        // d1 to 1e-10 in t: |d1| <= |d2| * 1e-10 there
        let e = peaks[0];
        assert!(
            e.state.comps[0].d1.abs() <= 1e-10 * e.state.comps[0].d2.abs(),
            "refined d1 = {}",
            e.state.comps[0].d1
        );
    }

    #[test]
    fn convergence_order_homoclinic_and_no_signal() {
        let p = derive_params(6, 1).unwrap();
        let init = spherical_state(&p, 1.0, -3.0).unwrap();
        match measure_convergence_order(&p, &init, 6.0, 0.02).unwrap() {
            ConvergenceOrder::Order(o) => assert!((3.7..=4.3).contains(&o), "order {o}"),
            ConvergenceOrder::NoSignal => panic!("expected a signal"),
        }
        // tiny-amplitude linear regime
        let lin = CylState::scalar(0.0, 1e-6, 0.0, 0.0, 0.0);
        match measure_convergence_order(&p, &lin, 6.0, 0.02).unwrap() {
            ConvergenceOrder::Order(o) => assert!((3.7..=4.3).contains(&o), "order {o}"),
            ConvergenceOrder::NoSignal => panic!("expected a signal"),
        }
        let zero = CylState::zero(0.0, 1);
        assert_eq!(
            measure_convergence_order(&p, &zero, 6.0, 0.02).unwrap(),
            ConvergenceOrder::NoSignal
        );
    }

    #[test]
    fn adaptive_tracks_fixed_reference() {
        // homoclinic peak passage; the tolerance allows for the e^{3.58 t}
        // amplification of local errors along the unstable direction
        let p = derive_params(6, 1).unwrap();
        let init = spherical_state(&p, 1.0, -2.0).unwrap();
        let fine = integrate(&p, &init, &StepperConfig::fixed(&p, 1e-4, 2.0)).unwrap();
        let mut cfg = StepperConfig::adaptive(&p, 2.0);
        cfg.record_every = usize::MAX - 1;
        let adap = integrate(&p, &init, &cfg).unwrap();
        assert_eq!(adap.terminal, Terminal::Completed);
        let dist = adap.last().distance(fine.last());
        assert!(dist <= 1e-4, "adaptive vs fixed distance {dist}");
    }
}
