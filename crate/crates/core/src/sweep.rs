//! Parameter studies: analytic scheme sizes and splitting-wire current
//! densities versus launch speed, and numeric-vs-analytic orbit comparisons.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};

use crate::analytic::{self, OrbitSolution};
use crate::error::{Error, Result};
use crate::field::WireField;
use crate::integrator::{simulate, Control};
use crate::model::{Medium, PacketState, Wire, MICRON};

pub const DEFAULT_GRID_POINTS: usize = 50;
pub const DEFAULT_V0_MAX: f64 = 1.0;
/// Lower grid end as a multiple of the feasibility bound 2x0/τ.
pub const FEASIBILITY_MARGIN: f64 = 1.05;

/// `n` logarithmically spaced speeds over `[lo, hi]`, both ends included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && lo.is_finite() && hi.is_finite()) || n == 0 {
        return Err(Error::InvalidInput(format!("bad grid [{lo:e}, {hi:e}] with {n} points")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect())
}

/// Default speed grid: 50 log points from just above the feasibility bound to 1 m/s.
pub fn default_grid(x0: f64, tau: f64) -> Result<Vec<f64>> {
    log_grid(FEASIBILITY_MARGIN * 2.0 * x0 / tau, DEFAULT_V0_MAX, DEFAULT_GRID_POINTS)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "v0_m_per_s")]
    pub v0: f64,
    pub feasible: bool,
    #[serde(rename = "dz_triangular_m")]
    pub dz_triangular: f64,
    #[serde(rename = "dz_inverse_m")]
    pub dz_inverse: f64,
    #[serde(rename = "current_triangular_A")]
    pub current_triangular: f64,
    #[serde(rename = "current_inverse_A")]
    pub current_inverse: f64,
    #[serde(rename = "rho_triangular_A_per_m2")]
    pub rho_triangular: f64,
    #[serde(rename = "rho_inverse_A_per_m2")]
    pub rho_inverse: f64,
}

fn sweep_row(v0: f64, b: f64, x0: f64, tau: f64, medium: &Medium) -> SweepRow {
    let row = || -> Result<SweepRow> {
        let c_t = analytic::triangular_current_ratio(v0, tau, x0, medium)?;
        let c_r = analytic::inverse_current_ratio(v0, medium)?;
        Ok(SweepRow {
            v0,
            feasible: true,
            dz_triangular: analytic::triangular_max_size(v0, tau, x0)?,
            dz_inverse: analytic::inverse_max_size(v0, tau, x0)?,
            current_triangular: c_t * b,
            current_inverse: c_r * b,
            rho_triangular: analytic::current_density(v0, b, c_t, medium)?,
            rho_inverse: analytic::current_density(v0, b, c_r, medium)?,
        })
    };
    // v0τ = 2x0 is feasible for the size formulas but not for a layout.
    match row() {
        Ok(r) if v0 * tau > 2.0 * x0 => r,
        _ => SweepRow {
            v0,
            feasible: false,
            dz_triangular: f64::NAN,
            dz_inverse: f64::NAN,
            current_triangular: f64::NAN,
            current_inverse: f64::NAN,
            rho_triangular: f64::NAN,
            rho_inverse: f64::NAN,
        },
    }
}

/// One row per speed, in input order. Infeasible speeds give flagged NaN rows.
pub fn velocity_sweep(v0s: &[f64], b: f64, x0: f64, tau: f64, medium: &Medium) -> Result<Vec<SweepRow>> {
    for (name, v) in [("b", b), ("x0", x0), ("tau", tau)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidInput(format!("{name} = {v:e} must be positive")));
        }
    }
    Ok(v0s.par_iter().map(|&v0| sweep_row(v0, b, x0, tau, medium)).collect())
}

pub const SWEEP_CSV_HEADER: &str = "v0_m_per_s,feasible,dz_triangular_m,dz_inverse_m,current_triangular_A,current_inverse_A,rho_triangular_A_per_m2,rho_inverse_A_per_m2";

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut w: W) -> io::Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{:.11e},{},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}",
            r.v0,
            r.feasible,
            r.dz_triangular,
            r.dz_inverse,
            r.current_triangular,
            r.current_inverse,
            r.rho_triangular,
            r.rho_inverse
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationSpec {
    pub current: f64,
    pub v0: f64,
    /// Launch point sits this far upstream of the wire (m).
    pub launch_distance: f64,
    /// Compare only where the analytic radius is below this multiple of the periapsis.
    pub window_factor: f64,
    /// Points of the dense output examined per trajectory.
    pub resolution: usize,
    pub medium: Medium,
    pub control: Control,
}

impl Default for ValidationSpec {
    fn default() -> Self {
        Self {
            current: 2.0,
            v0: 0.01,
            launch_distance: 300.0 * MICRON,
            window_factor: 20.0,
            resolution: 4000,
            medium: Medium::diamond(),
            control: Control::default(),
        }
    }
}

pub const DEFAULT_VALIDATION_B: [f64; 3] = [0.5 * MICRON, 3.0 * MICRON, 6.0 * MICRON];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    #[serde(rename = "b_m")]
    pub b: f64,
    pub k: f64,
    #[serde(rename = "periapsis_analytic_m")]
    pub periapsis_analytic: f64,
    #[serde(rename = "periapsis_numeric_m")]
    pub periapsis_numeric: f64,
    pub max_relative_deviation: f64,
    #[serde(rename = "theta_at_max_rad")]
    pub theta_at_max: f64,
    pub points_compared: usize,
}

fn validate_one(b: f64, spec: &ValidationSpec) -> Result<ValidationRow> {
    let orbit = OrbitSolution::for_wire(spec.current, b, spec.v0, &spec.medium)?;
    let field = WireField::new(vec![Wire::new(0.0, 0.0, spec.current)], spec.medium);
    let start = PacketState::new(0.0, -spec.launch_distance, b, spec.v0, 0.0);
    let duration = 2.0 * spec.launch_distance / spec.v0;
    let traj = simulate(start, &field, duration, &spec.control)?;

    let limit = spec.window_factor * orbit.periapsis();
    let (t0, t1) = (traj.t_start(), traj.t_end());
    let mut worst = (0.0f64, f64::NAN);
    let mut compared = 0;
    for i in 0..=spec.resolution {
        let t = t0 + (t1 - t0) * i as f64 / spec.resolution as f64;
        let Some(s) = traj.state_at(t) else { continue };
        let r = s.x.hypot(s.z);
        let theta = s.z.atan2(s.x);
        let Ok(r_an) = orbit.radius(theta) else { continue };
        if r_an > limit {
            continue;
        }
        compared += 1;
        let dev = (r - r_an).abs() / r_an;
        if dev > worst.0 || worst.1.is_nan() {
            worst = (dev, theta);
        }
    }
    let periapsis_numeric = traj
        .events
        .periapsis_per_wire
        .first()
        .map(|p| p.distance)
        .unwrap_or(f64::NAN);
    Ok(ValidationRow {
        b,
        k: orbit.k,
        periapsis_analytic: orbit.periapsis(),
        periapsis_numeric,
        max_relative_deviation: worst.0,
        theta_at_max: worst.1,
        points_compared: compared,
    })
}

/// Integrates a single-wire scatter for every impact parameter and reports
/// the largest relative radial deviation from the closed-form orbit.
pub fn validate_analytic(b_list: &[f64], spec: &ValidationSpec) -> Result<Vec<ValidationRow>> {
    if !(spec.window_factor > 1.0) || spec.resolution == 0 || !(spec.launch_distance > 0.0) {
        return Err(Error::InvalidInput("validation window, resolution and launch distance must be positive".into()));
    }
    b_list.par_iter().map(|&b| validate_one(b, spec)).collect()
}
