//! File formats: CSV for grids, trajectories and the atlas, JSON for
//! reports and event sidecars. Floats carry 17 significant digits so every
//! value round-trips exactly.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::invariants::hamiltonian;
use crate::model::Params;
use crate::ode::{EventKind, Terminal, Trajectory};
use crate::shooting::AtlasRow;
use crate::transform::{CylinderGrid, RadialGrid};

/// 17 significant digits, scientific; round-trips any finite f64.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Compact JSON with 17-significant-digit floats.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
    value.serialize(&mut ser).expect("value serializes to JSON");
    String::from_utf8(out).expect("JSON output is UTF-8")
}

/// Header `r,u_1,...,u_p`, one row per radius.
pub fn radial_grid_csv(grid: &RadialGrid) -> String {
    let mut out = String::from("r");
    for j in 1..=grid.components() {
        out.push_str(&format!(",u_{j}"));
    }
    out.push('\n');
    for (r, row) in grid.points().iter().zip(grid.values()) {
        out.push_str(&fmt_float(*r));
        for u in row {
            out.push(',');
            out.push_str(&fmt_float(*u));
        }
        out.push('\n');
    }
    out
}

/// Header `t,v_1,...,v_p`, one row per time.
pub fn cylinder_grid_csv(grid: &CylinderGrid) -> String {
    let mut out = String::from("t");
    for j in 1..=grid.components() {
        out.push_str(&format!(",v_{j}"));
    }
    out.push('\n');
    for (t, row) in grid.times().iter().zip(grid.values()) {
        out.push_str(&fmt_float(*t));
        for v in row {
            out.push(',');
            out.push_str(&fmt_float(*v));
        }
        out.push('\n');
    }
    out
}

/// Parse the `r,u_1,...,u_p` schema back into a grid.
pub fn parse_radial_grid_csv(text: &str) -> Result<RadialGrid> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidGrid("empty CSV".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() < 2 || cols[0] != "r" {
        return Err(Error::InvalidGrid(format!("expected header r,u_1,...,u_p (got {header:?})")));
    }
    for (j, name) in cols[1..].iter().enumerate() {
        let expect = format!("u_{}", j + 1);
        if *name != expect {
            return Err(Error::InvalidGrid(format!("column {} must be {expect} (got {name:?})", j + 1)));
        }
    }
    let p = cols.len() - 1;
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (k, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != p + 1 {
            return Err(Error::InvalidGrid(format!(
                "row {} has {} fields, expected {}",
                k + 2,
                fields.len(),
                p + 1
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidGrid(format!("row {}: bad float {s:?}", k + 2)))
        };
        points.push(parse(fields[0])?);
        values.push(fields[1..].iter().map(|s| parse(s)).collect::<Result<Vec<f64>>>()?);
    }
    RadialGrid::new(points, values)
}

/// Header `t,v_1,...,v_p,d1_1,...,d1_p,d2_1,...,d2_p,d3_1,...,d3_p,H`.
pub fn trajectory_csv(params: &Params, traj: &Trajectory) -> String {
    let p = traj.first().p();
    let mut out = String::from("t");
    for j in 1..=p {
        out.push_str(&format!(",v_{j}"));
    }
    for d in 1..=3 {
        for j in 1..=p {
            out.push_str(&format!(",d{d}_{j}"));
        }
    }
    out.push_str(",H\n");
    for s in &traj.states {
        out.push_str(&fmt_float(s.t));
        for c in &s.comps {
            out.push(',');
            out.push_str(&fmt_float(c.v));
        }
        for field in [|c: &crate::ode::Comp| c.d1, |c: &crate::ode::Comp| c.d2, |c: &crate::ode::Comp| c.d3] {
            for c in &s.comps {
                out.push(',');
                out.push_str(&fmt_float(field(c)));
            }
        }
        out.push(',');
        out.push_str(&fmt_float(hamiltonian(params, s)));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct EventJson {
    t: f64,
    kind: &'static str,
    component: Option<usize>,
}

#[derive(Serialize)]
struct EventsJson {
    events: Vec<EventJson>,
    terminal: &'static str,
}

/// Sidecar `{"events":[{t,kind,component}],"terminal":...}`.
pub fn events_json(traj: &Trajectory) -> String {
    let events = traj
        .events
        .iter()
        .map(|e| {
            let (kind, component) = match e.kind {
                EventKind::DerivZero(i) => ("DerivZero", Some(i)),
                EventKind::Divergence => ("Divergence", None),
                EventKind::ZeroHit(i) => ("ZeroHit", Some(i)),
            };
            EventJson { t: e.t, kind, component }
        })
        .collect();
    let terminal = match traj.terminal {
        Terminal::Completed => "Completed",
        Terminal::Diverged => "Diverged",
        Terminal::HitZero => "HitZero",
    };
    to_json(&EventsJson { events, terminal })
}

/// Header `a,b,T_a,H,residual`; failed rows carry NaN fields.
pub fn atlas_csv(rows: &[AtlasRow]) -> String {
    let mut out = String::from("a,b,T_a,H,residual\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_float(row.a),
            fmt_float(row.b),
            fmt_float(row.period),
            fmt_float(row.hamiltonian),
            fmt_float(row.residual)
        ));
    }
    out
}
