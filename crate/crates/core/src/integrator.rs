//! Adaptive integration of `a = −∇u` with event detection.
//!
//! Steps come from the Dormand–Prince 5(4) pair; every accepted step keeps
//! its dense interpolant so events (apex, per-wire periapsis, launch-plane
//! re-crossing) are located by bisection on the continuous solution.

use serde::{Deserialize, Serialize};
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::field::WireField;
use crate::model::PacketState;
use crate::ode::{self, DenseSegment, State};

/// Integrator tolerances and limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Control {
    pub rtol: f64,
    /// Absolute tolerance on positions (m).
    pub atol: f64,
    /// Absolute tolerance on velocities (m/s).
    pub atol_velocity: f64,
    pub max_steps: usize,
    /// Steps below this size (s) abort the run.
    pub min_step: f64,
    /// Bisection width for event times (s).
    pub event_time_tol: f64,
    /// Upper bound on the displacement per step as a fraction of the
    /// distance to the nearest current-carrying wire.
    pub approach_fraction: f64,
    /// Stop at the first re-crossing of the launch plane with vx < 0.
    pub stop_at_closure: bool,
}

impl Default for Control {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-16,
            atol_velocity: 1e-16,
            max_steps: 2_000_000,
            min_step: 1e-20,
            event_time_tol: 1e-12,
            approach_fraction: 0.25,
            stop_at_closure: false,
        }
    }
}

impl Control {
    pub fn with_rtol(mut self, rtol: f64) -> Self {
        self.rtol = rtol;
        self
    }

    pub(crate) fn atol_vec(&self) -> State {
        [self.atol, self.atol, self.atol_velocity, self.atol_velocity]
    }

    pub fn stopping_at_closure(mut self) -> Self {
        self.stop_at_closure = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.rtol < 1.0) {
            return Err(Error::InvalidInput(format!("rtol = {} must lie in (0, 1)", self.rtol)));
        }
        if !(self.atol > 0.0 && self.atol_velocity > 0.0) {
            return Err(Error::InvalidInput(format!(
                "atol = {} and atol_velocity = {} must be positive",
                self.atol, self.atol_velocity
            )));
        }
        if !(self.approach_fraction > 0.0) {
            return Err(Error::InvalidInput("approach_fraction must be positive".into()));
        }
        if !(self.event_time_tol > 0.0) {
            return Err(Error::InvalidInput("event_time_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Closest approach to one wire.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Periapsis {
    pub wire: usize,
    #[serde(rename = "distance_m")]
    pub distance: f64,
    pub state: PacketState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    /// State at the largest |z|.
    pub apex: PacketState,
    #[serde(rename = "periapsis")]
    pub periapsis_per_wire: Vec<Periapsis>,
    /// First crossing of the launch plane with vx < 0.
    pub closure: Option<PacketState>,
    #[serde(rename = "separation_max_m")]
    pub separation_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IntegrationStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
    #[serde(rename = "min_step_s")]
    pub min_step: f64,
    /// Largest |E − E0| / |E0| of the specific energy ½|v|² + u.
    pub max_energy_drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<PacketState>,
    pub events: EventLog,
    pub stats: IntegrationStats,
    segments: Vec<DenseSegment>,
}

impl Trajectory {
    pub fn initial(&self) -> &PacketState {
        &self.samples[0]
    }

    pub fn final_state(&self) -> &PacketState {
        self.samples.last().expect("trajectory has samples")
    }

    pub fn t_start(&self) -> f64 {
        self.initial().t
    }

    pub fn t_end(&self) -> f64 {
        self.final_state().t
    }

    /// State at time `t` from the continuous interpolant, `None` outside the run.
    pub fn state_at(&self, t: f64) -> Option<PacketState> {
        if t < self.t_start() || t > self.t_end() {
            return None;
        }
        if self.segments.is_empty() {
            return Some(*self.initial());
        }
        let idx = self.segments.partition_point(|s| s.t0 <= t).max(1) - 1;
        Some(PacketState::from_vec(t, &self.segments[idx].eval(t)))
    }

    /// Writes `t_s,x_m,z_m,vx_m_per_s,vz_m_per_s` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t_s,x_m,z_m,vx_m_per_s,vz_m_per_s")?;
        for s in &self.samples {
            writeln!(w, "{:e},{:e},{:e},{:e},{:e}", s.t, s.x, s.z, s.vx, s.vz)?;
        }
        Ok(())
    }
}

struct EventTracker {
    x_start: f64,
    apex: PacketState,
    periapsis: Vec<Periapsis>,
    closure: Option<PacketState>,
}

fn bisect_event<P>(seg: &DenseSegment, mut lo: f64, mut hi: f64, tol: f64, before: P) -> PacketState
where
    P: Fn(&State) -> bool,
{
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if before(&seg.eval(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    PacketState::from_vec(t, &seg.eval(t))
}

impl EventTracker {
    fn new(initial: &PacketState, field: &WireField) -> Self {
        Self {
            x_start: initial.x,
            apex: *initial,
            periapsis: field
                .wires
                .iter()
                .enumerate()
                .map(|(i, w)| Periapsis {
                    wire: i,
                    distance: w.distance_to(initial.x, initial.z),
                    state: *initial,
                })
                .collect(),
            closure: None,
        }
    }

    /// Scans one accepted segment. Returns the closure crossing if it lies
    /// inside, and the smallest wire distance seen as (wire, state, distance).
    fn scan(
        &mut self,
        field: &WireField,
        seg: &DenseSegment,
        y0: &State,
        y1: &State,
        tol: f64,
    ) -> (Option<PacketState>, Option<(usize, PacketState, f64)>) {
        let (t0, t1) = (seg.t0, seg.t1());
        let end = PacketState::from_vec(t1, y1);
        let mut nearest: Option<(usize, PacketState, f64)> = None;

        for (i, w) in field.wires.iter().enumerate() {
            let g = |y: &State| (y[0] - w.x) * y[2] + (y[1] - w.z) * y[3];
            let mut best = (end, w.distance_to(end.x, end.z));
            if g(y0) < 0.0 && g(y1) >= 0.0 {
                let s = bisect_event(seg, t0, t1, tol, |y| g(y) < 0.0);
                let d = w.distance_to(s.x, s.z);
                if d < best.1 {
                    best = (s, d);
                }
            }
            if best.1 < self.periapsis[i].distance {
                self.periapsis[i].distance = best.1;
                self.periapsis[i].state = best.0;
            }
            if nearest.is_none_or(|(_, _, d)| best.1 < d) {
                nearest = Some((i, best.0, best.1));
            }
        }

        let g = |y: &State| y[1] * y[3];
        let mut cand = end;
        if g(y0) > 0.0 && g(y1) <= 0.0 {
            cand = bisect_event(seg, t0, t1, tol, |y| g(y) > 0.0);
        }
        if cand.z.abs() > self.apex.z.abs() {
            self.apex = cand;
        }

        let mut closure = None;
        if self.closure.is_none() {
            let xs = self.x_start;
            if y0[0] - xs > 0.0 && y1[0] - xs <= 0.0 {
                let s = bisect_event(seg, t0, t1, tol, |y| y[0] - xs > 0.0);
                self.closure = Some(s);
                closure = Some(s);
            }
        }
        (closure, nearest)
    }
}

/// Integrates the motion of one packet through `field` for `duration` seconds.
pub fn simulate(initial: PacketState, field: &WireField, duration: f64, control: &Control) -> Result<Trajectory> {
    control.validate()?;
    if !initial.is_finite() {
        return Err(Error::InvalidInput("initial state must be finite".into()));
    }
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(Error::InvalidInput(format!("duration = {duration} must be positive")));
    }
    field.check(initial.x, initial.z).map_err(|e| match e {
        Error::Singularity { wire, x, z, .. } => Error::Singularity {
            wire,
            x,
            z,
            time: Some(initial.t),
        },
        other => other,
    })?;

    let mut evals = 0usize;
    let mut rhs = |_t: f64, y: &State| -> Option<State> {
        evals += 1;
        let (ax, az) = field.accel_unchecked(y[0], y[1]);
        if ax.is_finite() && az.is_finite() {
            Some([y[2], y[3], ax, az])
        } else {
            None
        }
    };
    let energy = |y: &State| 0.5 * (y[2] * y[2] + y[3] * y[3]) + field.potential_unchecked(y[0], y[1]);

    let t_end = initial.t + duration;
    let mut t = initial.t;
    let mut y = initial.to_vec();
    let mut k1 = rhs(t, &y).ok_or(Error::Singularity {
        wire: 0,
        x: initial.x,
        z: initial.z,
        time: Some(t),
    })?;
    let e0 = energy(&y);
    let e_scale = if e0 != 0.0 { e0.abs() } else { 1.0 };

    let step_cap = |y: &State| -> f64 {
        let speed = y[2].hypot(y[3]);
        match field.nearest_active(y[0], y[1]) {
            Some(d) if speed > 0.0 => control.approach_fraction * d / speed,
            _ => f64::INFINITY,
        }
    };

    let mut h = ode::initial_step(&mut rhs, t, &y, &k1, control.rtol, &control.atol_vec(), duration.min(step_cap(&y)));
    let mut prev_err = 1e-4;
    let mut samples = vec![initial];
    let mut segments = Vec::new();
    let mut tracker = EventTracker::new(&initial, field);
    let mut stats = IntegrationStats {
        min_step: f64::INFINITY,
        ..Default::default()
    };

    while t < t_end {
        let remaining = t_end - t;
        if remaining <= 4.0 * f64::EPSILON * t_end.abs().max(duration) {
            break;
        }
        if stats.accepted_steps + stats.rejected_steps >= control.max_steps {
            return Err(Error::TooManySteps {
                time: t,
                max_steps: control.max_steps,
            });
        }
        h = h.min(step_cap(&y)).min(remaining);
        if h < control.min_step {
            return Err(Error::StepUnderflow { time: t, step: h });
        }

        let a = match ode::attempt(&mut rhs, t, &y, &k1, h, control.rtol, &control.atol_vec()) {
            Some(a) if a.err <= 1.0 => a,
            rejected => {
                stats.rejected_steps += 1;
                h *= match rejected {
                    Some(a) => ode::step_factor(a.err, prev_err).min(0.9),
                    None => 0.25,
                };
                continue;
            }
        };

        let t_new = t + h;
        let (closure, nearest) = tracker.scan(field, &a.segment, &y, &a.y_new, control.event_time_tol);
        if let Some((wire, s, d)) = nearest {
            if d <= field.guard_radius {
                return Err(Error::Singularity {
                    wire,
                    x: s.x,
                    z: s.z,
                    time: Some(s.t),
                });
            }
        }

        stats.accepted_steps += 1;
        stats.min_step = stats.min_step.min(h);
        segments.push(a.segment);

        if let (true, Some(c)) = (control.stop_at_closure, closure) {
            let drift = (energy(&c.to_vec()) - e0).abs() / e_scale;
            stats.max_energy_drift = stats.max_energy_drift.max(drift);
            if c.t > samples.last().map_or(f64::NEG_INFINITY, |s| s.t) {
                samples.push(c);
            }
            break;
        }

        let drift = (energy(&a.y_new) - e0).abs() / e_scale;
        stats.max_energy_drift = stats.max_energy_drift.max(drift);
        samples.push(PacketState::from_vec(t_new, &a.y_new));

        let fac = ode::step_factor(a.err, prev_err);
        prev_err = a.err.max(1e-4);
        t = t_new;
        y = a.y_new;
        k1 = a.k_new;
        h *= fac;
    }

    stats.rhs_evaluations = evals;
    if stats.accepted_steps == 0 {
        stats.min_step = 0.0;
    }
    let events = EventLog {
        apex: tracker.apex,
        periapsis_per_wire: tracker.periapsis,
        closure: tracker.closure,
        separation_max: None,
    };
    Ok(Trajectory {
        samples,
        events,
        stats,
        segments,
    })
}

/// Separation series of two branches.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSeparation {
    /// Largest z_top − z_bottom over the common time range (m).
    pub max: f64,
    pub t_at_max: f64,
    /// (t, Δz) on the union of both sample grids.
    pub series: Vec<(f64, f64)>,
}

/// Compares two branches on a shared time grid, resampling each from its
/// continuous interpolant.
pub fn pair_separation(top: &Trajectory, bottom: &Trajectory) -> Result<PairSeparation> {
    let lo = top.t_start().max(bottom.t_start());
    let hi = top.t_end().min(bottom.t_end());
    if lo > hi {
        return Err(Error::DisjointTimeRanges);
    }
    let mut grid: Vec<f64> = top
        .samples
        .iter()
        .chain(&bottom.samples)
        .map(|s| s.t)
        .filter(|&t| t >= lo && t <= hi)
        .chain([lo, hi])
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let pair = |t: f64| {
        let a = top.state_at(t).expect("t inside top range");
        let b = bottom.state_at(t).expect("t inside bottom range");
        (a.z - b.z, a.vz - b.vz)
    };
    let values: Vec<(f64, f64, f64)> = grid
        .iter()
        .map(|&t| {
            let (dz, dv) = pair(t);
            (t, dz, dv)
        })
        .collect();

    let mut best = values
        .iter()
        .map(|&(t, dz, _)| (t, dz))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("grid is non-empty");
    for w in values.windows(2) {
        let (t0, _, d0) = w[0];
        let (t1, _, d1) = w[1];
        if d0 > 0.0 && d1 <= 0.0 {
            let (mut a, mut b) = (t0, t1);
            while b - a > 1e-13 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if pair(m).1 > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            let tm = 0.5 * (a + b);
            let dz = pair(tm).0;
            if dz > best.1 {
                best = (tm, dz);
            }
        }
    }

    Ok(PairSeparation {
        max: best.1,
        t_at_max: best.0,
        series: values.into_iter().map(|(t, dz, _)| (t, dz)).collect(),
    })
}
