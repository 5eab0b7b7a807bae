//! Magnetic field, specific diamagnetic potential and acceleration of a
//! wire array in the x–z plane.
//!
//! With `G = Σ I_i (−Δz_i, Δx_i) / r_i²` the field is `B = μ0 G / 2π` and the
//! specific potential of a diamagnet is `u = −χ_m |B|² / 2μ0 = α |G|² / 2`.
//! The acceleration is `−∇u`, taken analytically so that the cross terms
//! between wires are included.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{Medium, Wire, MU0};

/// Default exclusion radius around each wire (m).
pub const DEFAULT_GUARD_RADIUS: f64 = 1.0e-9;

/// How the forces of several wires are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForceLaw {
    /// Sum of the single-wire accelerations `α I_i² / r_i³ e_r,i`, with
    /// potential `Σ α I_i² / 2 r_i²`. Inter-wire cross terms are dropped.
    #[default]
    PerWire,
    /// Exact gradient of the total `|B|²`, cross terms included.
    FieldGradient,
}

/// Field quantities at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    /// Magnetic field (T), components (Bx, Bz).
    pub b_vec: (f64, f64),
    /// Specific potential energy U/m (m²/s²).
    pub u_spec: f64,
    /// Acceleration (m/s²).
    pub accel: (f64, f64),
}

fn guard_check(x: f64, z: f64, wires: &[Wire], guard: f64) -> Result<()> {
    for (i, w) in wires.iter().enumerate() {
        if w.distance_to(x, z) <= guard {
            return Err(Error::Singularity {
                wire: i,
                x,
                z,
                time: None,
            });
        }
    }
    Ok(())
}

/// Returns `G = Σ I_i (−Δz, Δx)/r²` and its Jacobian
/// `[[∂Gx/∂x, ∂Gx/∂z], [∂Gz/∂x, ∂Gz/∂z]]`.
fn g_and_jacobian(x: f64, z: f64, wires: &[Wire]) -> ((f64, f64), [[f64; 2]; 2]) {
    let (mut gx, mut gz) = (0.0, 0.0);
    let mut jac = [[0.0; 2]; 2];
    for w in wires {
        if w.current == 0.0 {
            continue;
        }
        let dx = x - w.x;
        let dz = z - w.z;
        let r2 = dx * dx + dz * dz;
        let r4 = r2 * r2;
        let i = w.current;
        gx -= i * dz / r2;
        gz += i * dx / r2;
        let diag = i * (dz * dz - dx * dx) / r4;
        let off = 2.0 * i * dx * dz / r4;
        jac[0][0] += off;
        jac[0][1] += diag;
        jac[1][0] += diag;
        jac[1][1] -= off;
    }
    ((gx, gz), jac)
}

/// Magnetic field of the wire array at `point` using vacuum permeability [`MU0`].
pub fn b_field(point: (f64, f64), wires: &[Wire]) -> Result<(f64, f64)> {
    b_field_with(point, wires, MU0, DEFAULT_GUARD_RADIUS)
}

pub fn b_field_with(point: (f64, f64), wires: &[Wire], mu0: f64, guard: f64) -> Result<(f64, f64)> {
    let (x, z) = point;
    guard_check(x, z, wires, guard)?;
    let ((gx, gz), _) = g_and_jacobian(x, z, wires);
    let s = mu0 / (2.0 * PI);
    Ok((s * gx, s * gz))
}

/// Specific potential `−χ_m |B|² / 2μ0` (m²/s²) of the full field.
pub fn specific_potential(point: (f64, f64), wires: &[Wire], medium: &Medium) -> Result<f64> {
    let (x, z) = point;
    guard_check(x, z, wires, DEFAULT_GUARD_RADIUS)?;
    Ok(potential_field_gradient(x, z, wires, medium.alpha()))
}

/// `−∇u` of the full field (m/s²).
pub fn acceleration(point: (f64, f64), wires: &[Wire], medium: &Medium) -> Result<(f64, f64)> {
    let (x, z) = point;
    guard_check(x, z, wires, DEFAULT_GUARD_RADIUS)?;
    Ok(accel_field_gradient(x, z, wires, medium.alpha()))
}

/// All field quantities at once, full-field force law.
pub fn sample(point: (f64, f64), wires: &[Wire], medium: &Medium) -> Result<FieldSample> {
    let (x, z) = point;
    guard_check(x, z, wires, DEFAULT_GUARD_RADIUS)?;
    let s = medium.mu0() / (2.0 * PI);
    let ((gx, gz), _) = g_and_jacobian(x, z, wires);
    Ok(FieldSample {
        b_vec: (s * gx, s * gz),
        u_spec: potential_field_gradient(x, z, wires, medium.alpha()),
        accel: accel_field_gradient(x, z, wires, medium.alpha()),
    })
}

fn potential_field_gradient(x: f64, z: f64, wires: &[Wire], alpha: f64) -> f64 {
    let ((gx, gz), _) = g_and_jacobian(x, z, wires);
    0.5 * alpha * (gx * gx + gz * gz)
}

fn accel_field_gradient(x: f64, z: f64, wires: &[Wire], alpha: f64) -> (f64, f64) {
    let ((gx, gz), j) = g_and_jacobian(x, z, wires);
    // ∇u = α Jᵀ G
    let dudx = alpha * (gx * j[0][0] + gz * j[1][0]);
    let dudz = alpha * (gx * j[0][1] + gz * j[1][1]);
    (-dudx, -dudz)
}

fn potential_per_wire(x: f64, z: f64, wires: &[Wire], alpha: f64) -> f64 {
    wires
        .iter()
        .filter(|w| w.current != 0.0)
        .map(|w| {
            let dx = x - w.x;
            let dz = z - w.z;
            0.5 * alpha * w.current * w.current / (dx * dx + dz * dz)
        })
        .sum()
}

fn accel_per_wire(x: f64, z: f64, wires: &[Wire], alpha: f64) -> (f64, f64) {
    let (mut ax, mut az) = (0.0, 0.0);
    for w in wires {
        if w.current == 0.0 {
            continue;
        }
        let dx = x - w.x;
        let dz = z - w.z;
        let r2 = dx * dx + dz * dz;
        let f = alpha * w.current * w.current / (r2 * r2);
        ax += f * dx;
        az += f * dz;
    }
    (ax, az)
}

/// A wire array bound to a medium and force law; the right-hand side used
/// by the integrator.
#[derive(Debug, Clone, PartialEq)]
pub struct WireField {
    pub wires: Vec<Wire>,
    pub medium: Medium,
    pub law: ForceLaw,
    pub guard_radius: f64,
}

impl WireField {
    pub fn new(wires: Vec<Wire>, medium: Medium) -> Self {
        Self {
            wires,
            medium,
            law: ForceLaw::default(),
            guard_radius: DEFAULT_GUARD_RADIUS,
        }
    }

    pub fn with_law(mut self, law: ForceLaw) -> Self {
        self.law = law;
        self
    }

    pub fn with_guard_radius(mut self, guard: f64) -> Self {
        self.guard_radius = guard;
        self
    }

    pub fn check(&self, x: f64, z: f64) -> Result<()> {
        guard_check(x, z, &self.wires, self.guard_radius)
    }

    pub fn acceleration(&self, x: f64, z: f64) -> Result<(f64, f64)> {
        self.check(x, z)?;
        Ok(self.accel_unchecked(x, z))
    }

    pub fn potential(&self, x: f64, z: f64) -> Result<f64> {
        self.check(x, z)?;
        Ok(self.potential_unchecked(x, z))
    }

    pub(crate) fn accel_unchecked(&self, x: f64, z: f64) -> (f64, f64) {
        let alpha = self.medium.alpha();
        match self.law {
            ForceLaw::PerWire => accel_per_wire(x, z, &self.wires, alpha),
            ForceLaw::FieldGradient => accel_field_gradient(x, z, &self.wires, alpha),
        }
    }

    pub(crate) fn potential_unchecked(&self, x: f64, z: f64) -> f64 {
        let alpha = self.medium.alpha();
        match self.law {
            ForceLaw::PerWire => potential_per_wire(x, z, &self.wires, alpha),
            ForceLaw::FieldGradient => potential_field_gradient(x, z, &self.wires, alpha),
        }
    }

    /// Distance to the nearest wire carrying current, or `None` without active wires.
    pub(crate) fn nearest_active(&self, x: f64, z: f64) -> Option<f64> {
        self.wires
            .iter()
            .filter(|w| w.current != 0.0)
            .map(|w| w.distance_to(x, z))
            .min_by(f64::total_cmp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MICRON;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn single_wire_field_magnitude_and_direction() {
        let wires = [Wire::new(0.0, 0.0, 2.0)];
        let (bx, bz) = b_field((MICRON, 0.0), &wires).unwrap();
        let expected = MU0 * 2.0 / (2.0 * PI * MICRON);
        assert!((expected - 0.4).abs() < 1e-12);
        assert!(bx.abs() < 1e-15);
        assert!(rel(bz, 0.4) < 1e-12);
    }

    #[test]
    fn zero_current_wire_contributes_nothing() {
        let wires = [Wire::new(0.0, 0.0, 0.0)];
        let medium = Medium::diamond();
        assert_eq!(b_field((MICRON, MICRON), &wires).unwrap(), (0.0, 0.0));
        assert_eq!(acceleration((MICRON, MICRON), &wires, &medium).unwrap(), (0.0, 0.0));
        assert_eq!(specific_potential((MICRON, 0.0), &wires, &medium).unwrap(), 0.0);
    }

    #[test]
    fn opposite_currents_at_mirror_positions_double_the_x_field() {
        let d = 2.0 * MICRON;
        let wires = [Wire::new(0.0, d, 1.0), Wire::new(0.0, -d, -1.0)];
        let single = b_field((MICRON, 0.0), &wires[..1]).unwrap();
        let (bx, bz) = b_field((MICRON, 0.0), &wires).unwrap();
        assert!(bz.abs() < 1e-12 * bx.abs());
        assert!(rel(bx, 2.0 * single.0) < 1e-12);
    }

    #[test]
    fn single_wire_potential_matches_closed_form() {
        let medium = Medium::diamond();
        let i = 0.925273;
        let r = 1.39269 * MICRON;
        let wires = [Wire::new(0.0, 0.0, i)];
        let u = specific_potential((0.0, r), &wires, &medium).unwrap();
        assert!(rel(u, 0.5 * medium.alpha() * i * i / (r * r)) < 1e-12);
        // Head-on turning radius for this current at v0 = 0.01 m/s.
        let d0 = medium.alpha().sqrt() * i / 0.01;
        assert!(rel(u, 0.5 * 0.01f64.powi(2) * (d0 / r).powi(2)) < 1e-12);
        // Quadratic in the current.
        let wires2 = [Wire::new(0.0, 0.0, 2.0 * i)];
        let u2 = specific_potential((0.0, r), &wires2, &medium).unwrap();
        assert!(rel(u2, 4.0 * u) < 1e-12);
        // Decays at large distance.
        assert!(specific_potential((1.0, 0.0), &wires, &medium).unwrap() < 1e-16);
    }

    #[test]
    fn single_wire_acceleration_is_radial_inverse_cube() {
        let medium = Medium::diamond();
        let wires = [Wire::new(0.0, 0.0, 2.0)];
        let (ax, az) = acceleration((MICRON, 0.0), &wires, &medium).unwrap();
        let expected = medium.alpha() * 4.0 / 1e-18;
        assert!((expected - 789.4).abs() < 0.1);
        assert!(rel(ax, expected) < 1e-12);
        assert!(az.abs() < 1e-12 * ax);
    }

    #[test]
    fn symmetric_pair_has_no_transverse_force_at_midpoint() {
        let medium = Medium::diamond();
        let d = 3.0 * MICRON;
        let wires = [Wire::new(0.0, d, 1.0), Wire::new(0.0, -d, 1.0)];
        let (_, az) = acceleration((0.0, 0.0), &wires, &medium).unwrap();
        assert_eq!(az, 0.0);
        let (_, az) = acceleration((2.0 * MICRON, 0.0), &wires, &medium).unwrap();
        assert!(az.abs() < 1e-20);
    }

    #[test]
    fn point_inside_guard_radius_names_the_wire() {
        let medium = Medium::diamond();
        let wires = [Wire::new(0.0, 0.0, 1.0), Wire::new(5.0 * MICRON, 0.0, 1.0)];
        let err = acceleration((5.0 * MICRON, 1e-10), &wires, &medium).unwrap_err();
        assert!(matches!(err, Error::Singularity { wire: 1, .. }), "{err}");
        assert!(b_field((0.0, 0.0), &wires).is_err());
    }

    #[test]
    fn per_wire_law_equals_full_field_for_one_wire() {
        let medium = Medium::diamond();
        let wires = vec![Wire::new(1.0 * MICRON, -2.0 * MICRON, 0.7)];
        let per = WireField::new(wires.clone(), medium);
        let full = WireField::new(wires, medium).with_law(ForceLaw::FieldGradient);
        let (x, z) = (4.0 * MICRON, 3.0 * MICRON);
        let a = per.acceleration(x, z).unwrap();
        let b = full.acceleration(x, z).unwrap();
        assert!(rel(a.0, b.0) < 1e-12 && rel(a.1, b.1) < 1e-12);
        assert!(rel(per.potential(x, z).unwrap(), full.potential(x, z).unwrap()) < 1e-12);
    }

    #[test]
    fn full_field_includes_cross_terms() {
        let medium = Medium::diamond();
        let w1 = Wire::new(0.0, 0.0, 1.0);
        let w2 = Wire::new(4.0 * MICRON, 0.0, 1.5);
        let p = (1.5 * MICRON, 2.0 * MICRON);
        let both = acceleration(p, &[w1, w2], &medium).unwrap();
        let a1 = acceleration(p, &[w1], &medium).unwrap();
        let a2 = acceleration(p, &[w2], &medium).unwrap();
        let diff = (both.0 - a1.0 - a2.0, both.1 - a1.1 - a2.1);
        // Cross term: −α ∇(G1·G2).
        let h = 1e-12;
        let cross = |x: f64, z: f64| {
            let ((g1x, g1z), _) = g_and_jacobian(x, z, &[w1]);
            let ((g2x, g2z), _) = g_and_jacobian(x, z, &[w2]);
            medium.alpha() * (g1x * g2x + g1z * g2z)
        };
        let cx = -(cross(p.0 + h, p.1) - cross(p.0 - h, p.1)) / (2.0 * h);
        let cz = -(cross(p.0, p.1 + h) - cross(p.0, p.1 - h)) / (2.0 * h);
        let norm = both.0.hypot(both.1);
        assert!(diff.0.hypot(diff.1) > 1e-3 * norm);
        assert!((diff.0 - cx).abs() < 1e-6 * norm);
        assert!((diff.1 - cz).abs() < 1e-6 * norm);
    }
}
