//! Synthesis of complete wire layouts for the triangular and inverse schemes.
//!
//! The splitting wire current comes from the closed-form ratios; the top and
//! bottom wires sit at analytically fixed positions and their common current
//! is tuned by shooting until the upper branch re-crosses the launch plane at
//! its launch height.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::analytic;
use crate::error::{BestIterate, Error, Result};
use crate::field::{ForceLaw, WireField, DEFAULT_GUARD_RADIUS};
use crate::integrator::{pair_separation, simulate, Control, Trajectory};
use crate::model::{DesignResult, Medium, PacketState, ScatteringInputs, Wire};
use crate::root::{self, RootError, Sample};

/// Stand-in objective value when the packet never re-crosses the launch plane (m).
pub const NO_CROSSING_SENTINEL: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Each branch returns along the shortest path, tracing a triangle.
    Triangular,
    /// Each branch reverses and retraces its own path.
    Inverse,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Triangular => "triangular",
            Scheme::Inverse => "inverse",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpec {
    pub scheme: Scheme,
    pub inputs: ScatteringInputs,
    /// Largest accepted |z-miss| at the launch plane (m).
    pub closure_tolerance: f64,
    pub shoot_max_iterations: usize,
    /// Height of the top wire above the axis. `None` places it analytically:
    /// the ellipse vertex for the triangular scheme, v0τ/2 − x0 for the inverse one.
    pub wire_height: Option<f64>,
    pub medium: Medium,
    pub law: ForceLaw,
    pub guard_radius: f64,
    pub control: Control,
    /// The run stops at τ·(1 + return_margin) if the launch plane is not re-crossed.
    pub return_margin: f64,
}

impl DesignSpec {
    pub fn new(scheme: Scheme, inputs: ScatteringInputs) -> Self {
        Self {
            scheme,
            inputs,
            closure_tolerance: 1e-8,
            shoot_max_iterations: 60,
            wire_height: None,
            medium: Medium::diamond(),
            law: ForceLaw::default(),
            guard_radius: DEFAULT_GUARD_RADIUS,
            control: Control::default(),
            return_margin: 0.5,
        }
    }

    pub fn with_wire_height(mut self, z: f64) -> Self {
        self.wire_height = Some(z);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.inputs.validate()?;
        self.control.validate()?;
        let ScatteringInputs { v0, tau, x0, b, .. } = self.inputs;
        if v0 * tau <= 2.0 * x0 {
            return Err(Error::Infeasible(format!(
                "v0*tau = {:e} m must exceed 2*x0 = {:e} m",
                v0 * tau,
                2.0 * x0
            )));
        }
        if !(self.closure_tolerance > 0.0 && self.closure_tolerance < b) {
            return Err(Error::InvalidInput(format!(
                "closure tolerance {:e} m must be positive and below b = {:e} m",
                self.closure_tolerance, b
            )));
        }
        if let Some(z) = self.wire_height {
            if !(z > 0.0) || !z.is_finite() {
                return Err(Error::InvalidInput(format!("wire height {z:e} m must be positive")));
            }
        }
        if self.shoot_max_iterations == 0 {
            return Err(Error::InvalidInput("shoot_max_iterations must be at least 1".into()));
        }
        if !(self.return_margin >= 0.0) {
            return Err(Error::InvalidInput("return_margin must be non-negative".into()));
        }
        Ok(())
    }
}

/// Record of the shooting loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootingReport {
    #[serde(rename = "seed_current_A")]
    pub seed_current: f64,
    #[serde(rename = "bracket_A")]
    pub bracket: (f64, f64),
    pub iterations: usize,
    pub evaluations: usize,
    /// Misses of every evaluation inside the bracket are monotone in the current.
    pub monotone: bool,
    /// (current A, miss m or null when the plane was not re-crossed).
    pub samples: Vec<(f64, Option<f64>)>,
}

/// A converged design together with both branch trajectories.
#[derive(Debug, Clone)]
pub struct Design {
    pub result: DesignResult,
    pub top: Trajectory,
    pub bottom: Trajectory,
}

/// Outcome of one closure run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosureMiss {
    /// Signed miss `z_cross − z_launch` at the first re-crossing with vx < 0.
    Crossed { miss: f64, state: PacketState },
    /// No re-crossing before the time limit.
    NoCrossing { final_state: PacketState },
}

impl ClosureMiss {
    pub fn miss(&self) -> Option<f64> {
        match self {
            ClosureMiss::Crossed { miss, .. } => Some(*miss),
            ClosureMiss::NoCrossing { .. } => None,
        }
    }

    /// Miss, or [`NO_CROSSING_SENTINEL`] when there was no crossing.
    pub fn value(&self) -> f64 {
        self.miss().unwrap_or(NO_CROSSING_SENTINEL)
    }
}

/// Shooting objective: launches `initial` into `field` and measures the
/// z-miss when it comes back through the plane x = initial.x.
pub fn closure_error(
    field: &WireField,
    initial: PacketState,
    tau: f64,
    margin: f64,
    control: &Control,
) -> Result<ClosureMiss> {
    let control = Control {
        stop_at_closure: true,
        ..*control
    };
    let traj = simulate(initial, field, tau * (1.0 + margin), &control)?;
    Ok(match traj.events.closure {
        Some(state) => ClosureMiss::Crossed {
            miss: state.z - initial.z,
            state,
        },
        None => ClosureMiss::NoCrossing {
            final_state: *traj.final_state(),
        },
    })
}

struct Layout {
    splitting: Wire,
    top: (f64, f64),
    seed: f64,
}

fn triangular_layout(spec: &DesignSpec) -> Result<Layout> {
    let ScatteringInputs { v0, b, x0, tau, .. } = spec.inputs;
    let medium = &spec.medium;
    let split_i = analytic::triangular_current_ratio(v0, tau, x0, medium)? * b;
    let (ax, az_vertex) = analytic::apex_wire_position(x0, b, v0, tau)?;
    let az = spec.wire_height.unwrap_or(az_vertex);

    // Outgoing asymptote of the splitting scatter: direction at the
    // scattering angle, offset b from the wire.
    let theta_s = analytic::scattering_angle(analytic::stiffness_k(split_i, b, v0, medium)?)?;
    let dir = (theta_s.cos(), theta_s.sin());
    let foot = (-b * theta_s.sin(), b * theta_s.cos());
    let cross = |u: (f64, f64), v: (f64, f64)| u.0 * v.1 - u.1 * v.0;
    let apex_offset = cross((ax - foot.0, az - foot.1), dir).abs().max(1e-3 * b);

    // Deflection needed at the apex to aim back at the launch point.
    let back = (-x0 - ax, b - az);
    let norm = back.0.hypot(back.1);
    let turn = ((dir.0 * back.0 + dir.1 * back.1) / norm).clamp(-1.0, 1.0).acos();
    let k_apex = (1.0 - turn / PI).powi(-2);
    let seed = v0 * apex_offset * (k_apex - 1.0).sqrt() / medium.alpha().sqrt();

    Ok(Layout {
        splitting: Wire::new(0.0, 0.0, split_i),
        top: (ax, az),
        seed,
    })
}

fn inverse_layout(spec: &DesignSpec) -> Result<Layout> {
    let ScatteringInputs { v0, b, x0, tau, .. } = spec.inputs;
    let medium = &spec.medium;
    let split_i = analytic::inverse_current_ratio(v0, medium)? * b;
    let zt = spec.wire_height.unwrap_or(0.5 * v0 * tau - x0);
    // Heuristic turning radius: geometric mean of b and b²/zt.
    let d0_seed = b * (b / zt).sqrt();
    let seed = v0 * d0_seed / medium.alpha().sqrt();
    Ok(Layout {
        splitting: Wire::new(0.0, 0.0, split_i),
        top: (-b, zt),
        seed,
    })
}

fn wires_for(layout: &Layout, current: f64) -> Vec<Wire> {
    vec![
        layout.splitting,
        Wire::new(layout.top.0, layout.top.1, current),
        Wire::new(layout.top.0, -layout.top.1, current),
    ]
}

fn is_monotone(samples: &[(f64, f64)]) -> bool {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.0.total_cmp(&b.0));
    let inc = s.windows(2).all(|w| w[1].1 >= w[0].1);
    let dec = s.windows(2).all(|w| w[1].1 <= w[0].1);
    inc || dec
}

/// Runs the full synthesis for either scheme.
pub fn design(spec: &DesignSpec) -> Result<Design> {
    spec.validate()?;
    let layout = match spec.scheme {
        Scheme::Triangular => triangular_layout(spec)?,
        Scheme::Inverse => inverse_layout(spec)?,
    };
    let inputs = spec.inputs;
    let field_for = |current: f64| {
        WireField::new(wires_for(&layout, current), spec.medium)
            .with_law(spec.law)
            .with_guard_radius(spec.guard_radius)
    };
    let launch = inputs.launch_top();

    let mut evaluations = 0usize;
    let mut first_error: Option<Error> = None;
    let mut objective = |current: f64| -> Option<f64> {
        evaluations += 1;
        match closure_error(&field_for(current), launch, inputs.tau, spec.return_margin, &spec.control) {
            Ok(m) => m.miss(),
            Err(e) => {
                // Trajectories that hit a wire count as undefined points.
                first_error.get_or_insert(e);
                None
            }
        }
    };

    let (bracket, scan) = root::scan_geometric(&mut objective, layout.seed, 2.0, 12);
    let best_of = |samples: &[Sample]| {
        samples
            .iter()
            .filter_map(|s| s.f.map(|f| (s.x, f)))
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(x, f)| BestIterate {
                current: x,
                miss: Some(f),
            })
    };
    let bracket = match bracket {
        Ok(b) => b,
        Err(_) => {
            let reason = match &first_error {
                Some(e) => format!("no sign change of the closure miss around the seed current ({e})"),
                None => "no sign change of the closure miss around the seed current".into(),
            };
            return Err(Error::DesignFailure {
                reason,
                best: best_of(&scan),
            });
        }
    };

    // Tight current tolerance so that outputs are reproducible well below
    // the closure tolerance.
    let xtol = 1e-13 * bracket.hi;
    let ftol = 1e-3 * spec.closure_tolerance;
    let root = match root::hybrid_root(&mut objective, bracket, xtol, ftol, spec.shoot_max_iterations) {
        Ok(r) => r,
        Err(RootError::NotConverged { best, .. }) => {
            return Err(Error::DesignFailure {
                reason: format!("shooting did not converge in {} iterations", spec.shoot_max_iterations),
                best: Some(BestIterate {
                    current: best.x,
                    miss: best.f,
                }),
            })
        }
        Err(RootError::Undefined { at }) => {
            return Err(Error::DesignFailure {
                reason: format!("launch plane not re-crossed at I = {at:e} A inside the bracket"),
                best: best_of(&scan),
            })
        }
        Err(RootError::NoBracket { .. }) => unreachable!("bracket already established"),
    };
    let tuned = root.x;

    let in_bracket: Vec<(f64, f64)> = [(bracket.lo, bracket.f_lo), (bracket.hi, bracket.f_hi)]
        .into_iter()
        .chain(root.history.iter().filter_map(|s| s.f.map(|f| (s.x, f))))
        .collect();
    let report = ShootingReport {
        seed_current: layout.seed,
        bracket: (bracket.lo, bracket.hi),
        iterations: root.iterations,
        evaluations,
        monotone: is_monotone(&in_bracket),
        samples: scan
            .iter()
            .chain(&root.history)
            .map(|s| (s.x, s.f))
            .collect(),
    };

    let field = field_for(tuned);
    let duration = inputs.tau * (1.0 + spec.return_margin);
    let control = spec.control.stopping_at_closure();
    let top = simulate(launch, &field, duration, &control)?;
    let bottom = simulate(inputs.launch_bottom(), &field, duration, &control)?;
    let closure = top.events.closure.ok_or_else(|| Error::DesignFailure {
        reason: "converged design does not re-cross the launch plane".into(),
        best: Some(BestIterate {
            current: tuned,
            miss: None,
        }),
    })?;
    let closure_error = closure.z - launch.z;
    if closure_error.abs() > spec.closure_tolerance {
        return Err(Error::DesignFailure {
            reason: format!(
                "closure miss {:e} m exceeds tolerance {:e} m",
                closure_error, spec.closure_tolerance
            ),
            best: Some(BestIterate {
                current: tuned,
                miss: Some(closure_error),
            }),
        });
    }

    let mut sep = pair_separation(&top, &bottom)?;
    let mut top = top;
    top.events.separation_max = Some(sep.max);
    let mut bottom = bottom;
    bottom.events.separation_max = Some(sep.max);
    sep.series.clear();

    let wires = field.wires.clone();
    // Each mirror wire is approached closely by one branch only.
    let distances: Vec<f64> = top
        .events
        .periapsis_per_wire
        .iter()
        .zip(&bottom.events.periapsis_per_wire)
        .map(|(a, b)| a.distance.min(b.distance))
        .collect();
    let densities: Vec<f64> = wires
        .iter()
        .zip(&distances)
        .map(|(w, d)| w.current.abs() / (PI * d * d))
        .collect();
    let fields: Vec<f64> = wires
        .iter()
        .zip(&distances)
        .map(|(w, d)| spec.medium.mu0() * w.current.abs() / (2.0 * PI * d))
        .collect();
    let binding = densities
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);

    let analytic_max = match spec.scheme {
        Scheme::Triangular => analytic::triangular_max_size(inputs.v0, inputs.tau, inputs.x0)?,
        Scheme::Inverse => analytic::inverse_max_size(inputs.v0, inputs.tau, inputs.x0)?,
    };
    let split_i = layout.splitting.current;
    let theta_s = analytic::scattering_angle(analytic::stiffness_k(split_i, inputs.b, inputs.v0, &spec.medium)?)?;

    let result = DesignResult {
        scheme: spec.scheme,
        wires,
        splitting_current: split_i,
        tuned_current: tuned,
        max_separation: sep.max,
        analytic_max_separation: analytic_max,
        closure_error,
        return_velocity: (closure.vx, closure.vz),
        return_time: closure.t - launch.t,
        min_distance_per_wire: distances,
        current_density_per_wire: densities.clone(),
        field_at_closest_per_wire: fields.clone(),
        min_current_density: densities[binding],
        peak_field: fields[binding],
        binding_wire: binding,
        apex_height: layout.top.1 - inputs.b,
        scattering_angle: theta_s,
        shooting: report,
    };
    Ok(Design { result, top, bottom })
}

pub fn design_triangular(spec: &DesignSpec) -> Result<Design> {
    if spec.scheme != Scheme::Triangular {
        return Err(Error::InvalidInput("spec is not a triangular design".into()));
    }
    design(spec)
}

pub fn design_inverse(spec: &DesignSpec) -> Result<Design> {
    if spec.scheme != Scheme::Inverse {
        return Err(Error::InvalidInput("spec is not an inverse design".into()));
    }
    design(spec)
}
