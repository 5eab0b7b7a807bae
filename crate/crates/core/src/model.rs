//! Domain types shared across the crate.
//!
//! Everything is stored in SI base units (m, s, A, T). Conversions to
//! micrometres happen only at the command-line boundary.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Vacuum permeability (T·m/A).
pub const MU0: f64 = 4.0e-7 * PI;

/// Mass susceptibility of diamond (m³/kg).
///
/// This value reproduces the splitting currents 0.925273 A and 0.616467 A
/// of the reference designs at v0 = 0.01 m/s, b = 0.5 μm.
pub const CHI_M_DIAMOND: f64 = -6.2e-9;

/// One micrometre in metres.
pub const MICRON: f64 = 1.0e-6;

/// Diamagnetic material constants and the derived coupling
/// `alpha = -chi_m * mu0 / (4 pi^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    chi_m: f64,
    mu0: f64,
    alpha: f64,
}

impl Medium {
    pub fn chi_m(&self) -> f64 {
        self.chi_m
    }

    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    /// Coupling constant α (m⁴·s⁻²·A⁻²); the specific potential of a
    /// single wire is `alpha * I^2 / (2 r^2)`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn diamond() -> Self {
        make_medium(CHI_M_DIAMOND, MU0).expect("diamond constants are valid")
    }
}

impl Default for Medium {
    fn default() -> Self {
        Self::diamond()
    }
}

/// Builds a [`Medium`], rejecting paramagnetic or non-physical constants.
pub fn make_medium(chi_m: f64, mu0: f64) -> Result<Medium> {
    if !chi_m.is_finite() || chi_m >= 0.0 {
        return Err(Error::UnsupportedMedium(format!(
            "chi_m = {chi_m:e} m^3/kg; only diamagnetic (chi_m < 0) materials are supported"
        )));
    }
    if !mu0.is_finite() || mu0 <= 0.0 {
        return Err(Error::UnsupportedMedium(format!(
            "mu0 = {mu0:e} T m/A must be positive"
        )));
    }
    Ok(Medium {
        chi_m,
        mu0,
        alpha: -chi_m * mu0 / (4.0 * PI * PI),
    })
}

/// Infinite straight wire along y, crossing the x–z plane at (x, z).
/// Positive current flows along +y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wire {
    #[serde(rename = "x_m")]
    pub x: f64,
    #[serde(rename = "z_m")]
    pub z: f64,
    #[serde(rename = "current_A")]
    pub current: f64,
}

impl Wire {
    pub fn new(x: f64, z: f64, current: f64) -> Self {
        Self { x, z, current }
    }

    pub fn distance_to(&self, x: f64, z: f64) -> f64 {
        (x - self.x).hypot(z - self.z)
    }
}

/// Classical surrogate for one wavepacket branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketState {
    #[serde(rename = "t_s")]
    pub t: f64,
    #[serde(rename = "x_m")]
    pub x: f64,
    #[serde(rename = "z_m")]
    pub z: f64,
    #[serde(rename = "vx_m_per_s")]
    pub vx: f64,
    #[serde(rename = "vz_m_per_s")]
    pub vz: f64,
}

impl PacketState {
    pub fn new(t: f64, x: f64, z: f64, vx: f64, vz: f64) -> Self {
        Self { t, x, z, vx, vz }
    }

    pub(crate) fn from_vec(t: f64, y: &[f64; 4]) -> Self {
        Self::new(t, y[0], y[1], y[2], y[3])
    }

    pub(crate) fn to_vec(self) -> [f64; 4] {
        [self.x, self.z, self.vx, self.vz]
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.x.is_finite()
            && self.z.is_finite()
            && self.vx.is_finite()
            && self.vz.is_finite()
    }

    pub fn speed(&self) -> f64 {
        self.vx.hypot(self.vz)
    }

    /// z-component of r × v about the point (x0, z0), sign convention x·vz − z·vx.
    pub fn angular_momentum_about(&self, x0: f64, z0: f64) -> f64 {
        (self.x - x0) * self.vz - (self.z - z0) * self.vx
    }
}

/// Inputs of a scattering design: packets launched from (−x0, ±b) with
/// velocity (v0, 0), closing after total flight time τ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringInputs {
    pub v0: f64,
    pub b: f64,
    /// Only used to report the splitting current; designs derive it from v0 and b.
    pub current: f64,
    pub x0: f64,
    pub tau: f64,
}

impl ScatteringInputs {
    /// Builds inputs and fills `current` with zero; designers compute it.
    pub fn new(v0: f64, b: f64, x0: f64, tau: f64) -> Result<Self> {
        let inputs = Self {
            v0,
            b,
            current: 0.0,
            x0,
            tau,
        };
        inputs.validate()?;
        Ok(inputs)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("v0", self.v0), ("b", self.b), ("x0", self.x0), ("tau", self.tau)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidInput(format!("{name} = {v:e} must be positive")));
            }
        }
        if !self.current.is_finite() {
            return Err(Error::InvalidInput("current must be finite".into()));
        }
        Ok(())
    }

    /// Launch state of the upper branch, (−x0, +b).
    pub fn launch_top(&self) -> PacketState {
        PacketState::new(0.0, -self.x0, self.b, self.v0, 0.0)
    }

    /// Launch state of the lower branch, (−x0, −b).
    pub fn launch_bottom(&self) -> PacketState {
        PacketState::new(0.0, -self.x0, -self.b, self.v0, 0.0)
    }

    /// Path length available during the flight, v0·τ.
    pub fn path_budget(&self) -> f64 {
        self.v0 * self.tau
    }
}

/// Design outcome: the synthesized wires and the metrics of the converged trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignResult {
    pub scheme: crate::designer::Scheme,
    /// Splitting wire first, then top and bottom wires.
    pub wires: Vec<Wire>,
    #[serde(rename = "splitting_current_A")]
    pub splitting_current: f64,
    /// Current found by the shooting loop for the top/bottom wires.
    #[serde(rename = "tuned_current_A")]
    pub tuned_current: f64,
    #[serde(rename = "max_separation_m")]
    pub max_separation: f64,
    /// Analytic upper bound for this scheme.
    #[serde(rename = "analytic_max_separation_m")]
    pub analytic_max_separation: f64,
    /// Signed z-miss at the launch plane re-crossing.
    #[serde(rename = "closure_error_m")]
    pub closure_error: f64,
    #[serde(rename = "return_velocity_m_per_s")]
    pub return_velocity: (f64, f64),
    #[serde(rename = "return_time_s")]
    pub return_time: f64,
    /// Closest approach of either branch to each wire, in `wires` order.
    #[serde(rename = "min_distance_per_wire_m")]
    pub min_distance_per_wire: Vec<f64>,
    /// I/(π d²) per wire.
    #[serde(rename = "current_density_per_wire_A_per_m2")]
    pub current_density_per_wire: Vec<f64>,
    /// Single-wire field magnitude at each closest approach.
    #[serde(rename = "field_at_closest_per_wire_T")]
    pub field_at_closest_per_wire: Vec<f64>,
    /// Largest per-wire current density: the density every wire must sustain
    /// when its radius equals the closest approach.
    #[serde(rename = "min_current_density_A_per_m2")]
    pub min_current_density: f64,
    /// Field at the closest approach of the wire that sets `min_current_density`.
    #[serde(rename = "peak_field_T")]
    pub peak_field: f64,
    /// Index of the wire that sets `min_current_density`.
    pub binding_wire: usize,
    /// Distance from the top wire to the launch line (triangle height h).
    #[serde(rename = "apex_height_m")]
    pub apex_height: f64,
    /// Single-wire scattering angle of the splitting wire.
    #[serde(rename = "scattering_angle_rad")]
    pub scattering_angle: f64,
    pub shooting: crate::designer::ShootingReport,
}
