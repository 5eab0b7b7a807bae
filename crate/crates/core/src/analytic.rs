//! Closed-form single-wire scattering and the design formulas built on it.
//!
//! A wire at the origin produces the central acceleration `α I² / r³`. With
//! `u = 1/r` and angular momentum `v0 b` the orbit equation reduces to
//! `u'' = −k u`, `k = 1 + α I² / (v0² b²)`, solved by
//! `u = C cos(√k θ − θ0)` with `θ0 = (√k − ½)π` and `C = 1/(√k b)`. The polar
//! angle θ runs from π (incoming, from −x) down to the scattering angle θs.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{Medium, MU0};

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} = {v:e} must be positive")))
    }
}

/// Dimensionless stiffness `k = 1 + α I² / (v0² b²)`.
pub fn stiffness_k(current: f64, b: f64, v0: f64, medium: &Medium) -> Result<f64> {
    require_positive("v0", v0)?;
    if b == 0.0 {
        return Err(Error::HeadOn);
    }
    require_positive("b", b)?;
    if !current.is_finite() {
        return Err(Error::InvalidInput("current must be finite".into()));
    }
    Ok(1.0 + medium.alpha() * current * current / (v0 * v0 * b * b))
}

/// Scattering angle `θs = (1 − 1/√k) π`.
pub fn scattering_angle(k: f64) -> Result<f64> {
    if !(k >= 1.0) || !k.is_finite() {
        return Err(Error::Domain(format!("stiffness k = {k} must be >= 1")));
    }
    Ok((1.0 - 1.0 / k.sqrt()) * PI)
}

/// Radius of the exact orbit at polar angle `theta`:
/// `r = √k b / cos(√k θ − (√k − ½)π)`.
pub fn analytic_orbit(theta: f64, k: f64, b: f64) -> Result<f64> {
    OrbitSolution::new(k, b)?.radius(theta)
}

/// Parameters of the cosine orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitSolution {
    pub k: f64,
    pub theta0: f64,
    /// Amplitude C (1/m).
    pub amplitude_c: f64,
    pub b: f64,
}

impl OrbitSolution {
    pub fn new(k: f64, b: f64) -> Result<Self> {
        if !(k >= 1.0) || !k.is_finite() {
            return Err(Error::Domain(format!("stiffness k = {k} must be >= 1")));
        }
        require_positive("b", b)?;
        let sk = k.sqrt();
        Ok(Self {
            k,
            theta0: (sk - 0.5) * PI,
            amplitude_c: 1.0 / (sk * b),
            b,
        })
    }

    pub fn for_wire(current: f64, b: f64, v0: f64, medium: &Medium) -> Result<Self> {
        Self::new(stiffness_k(current, b, v0, medium)?, b)
    }

    fn phase(&self, theta: f64) -> f64 {
        self.k.sqrt() * theta - self.theta0
    }

    /// `1/r` at `theta`; negative values lie off the physical branch.
    pub fn inverse_radius(&self, theta: f64) -> f64 {
        self.amplitude_c * self.phase(theta).cos()
    }

    pub fn radius(&self, theta: f64) -> Result<f64> {
        let c = self.phase(theta).cos();
        if !(c > 0.0) {
            return Err(Error::Domain(format!(
                "theta = {theta} rad is outside the physical branch of the orbit"
            )));
        }
        Ok(1.0 / (self.amplitude_c * c))
    }

    /// Closest distance to the wire, `√k b`.
    pub fn periapsis(&self) -> f64 {
        1.0 / self.amplitude_c
    }

    /// Polar angle of the periapsis, where the phase vanishes.
    pub fn periapsis_angle(&self) -> f64 {
        self.theta0 / self.k.sqrt()
    }

    /// Polar angle of the outgoing asymptote, where the phase equals −π/2.
    pub fn outgoing_angle(&self) -> f64 {
        (self.theta0 - 0.5 * PI) / self.k.sqrt()
    }

    /// Polar angle of the incoming asymptote, where the phase equals +π/2 (always π).
    pub fn incoming_angle(&self) -> f64 {
        (self.theta0 + 0.5 * PI) / self.k.sqrt()
    }
}

fn require_feasible(v0: f64, tau: f64, x0: f64) -> Result<()> {
    require_positive("v0", v0)?;
    require_positive("tau", tau)?;
    require_positive("x0", x0)?;
    if v0 * tau < 2.0 * x0 {
        return Err(Error::Infeasible(format!(
            "path budget v0*tau = {:e} m is shorter than the round trip 2*x0 = {:e} m",
            v0 * tau,
            2.0 * x0
        )));
    }
    Ok(())
}

/// Largest separation of the triangular scheme, `√(v0²τ² − 2 v0 x0 τ)`.
pub fn triangular_max_size(v0: f64, tau: f64, x0: f64) -> Result<f64> {
    require_feasible(v0, tau, x0)?;
    let l = v0 * tau;
    Ok((l * l - 2.0 * x0 * l).max(0.0).sqrt())
}

/// Largest separation of the inverse scheme, `v0 τ − 2 x0`.
pub fn inverse_max_size(v0: f64, tau: f64, x0: f64) -> Result<f64> {
    require_feasible(v0, tau, x0)?;
    Ok(v0 * tau - 2.0 * x0)
}

/// Cosine of the triangular scheme's scattering angle, taken as the
/// positive ratio `x0 / (v0 τ − x0)`; the geometric angle itself is
/// `π − arccos(ratio)`.
pub fn triangular_angle_ratio(v0: f64, tau: f64, x0: f64) -> Result<f64> {
    require_positive("v0", v0)?;
    require_positive("tau", tau)?;
    require_positive("x0", x0)?;
    let ratio = x0 / (v0 * tau - x0);
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Infeasible(format!(
            "x0/(v0*tau - x0) = {ratio} must lie in (0, 1)"
        )));
    }
    Ok(ratio)
}

/// Splitting current per impact parameter (A/m) for the triangular scheme:
/// `(v0/√α) √(π²/arccos²(x0/(v0τ − x0)) − 1)`.
pub fn triangular_current_ratio(v0: f64, tau: f64, x0: f64, medium: &Medium) -> Result<f64> {
    let ratio = triangular_angle_ratio(v0, tau, x0)?;
    let ac = ratio.acos();
    Ok(v0 / medium.alpha().sqrt() * (PI * PI / (ac * ac) - 1.0).sqrt())
}

/// Splitting current per impact parameter (A/m) for the inverse scheme, `v0 √(3/α)`.
pub fn inverse_current_ratio(v0: f64, medium: &Medium) -> Result<f64> {
    require_positive("v0", v0)?;
    Ok(v0 * (3.0 / medium.alpha()).sqrt())
}

/// Head-on turning radius `d0 = √α |I| / v0`.
pub fn closest_approach_headon(current: f64, v0: f64, medium: &Medium) -> Result<f64> {
    require_positive("v0", v0)?;
    Ok(medium.alpha().sqrt() * current.abs() / v0)
}

/// Closest approach `d = √(b² + d0²)`.
pub fn closest_approach(b: f64, current: f64, v0: f64, medium: &Medium) -> Result<f64> {
    if !(b >= 0.0) || !b.is_finite() {
        return Err(Error::InvalidInput(format!("b = {b:e} must be non-negative")));
    }
    let d0 = closest_approach_headon(current, v0, medium)?;
    Ok(b.hypot(d0))
}

/// Current density `ρ = C v0² / (π b (v0² + α C²))` with `C = I/b` (A/m²).
/// Equal to `I / (π d²)` at the closest approach.
pub fn current_density(v0: f64, b: f64, ratio: f64, medium: &Medium) -> Result<f64> {
    require_positive("b", b)?;
    require_positive("v0", v0)?;
    if !(ratio >= 0.0) || !ratio.is_finite() {
        return Err(Error::InvalidInput(format!("ratio = {ratio:e} must be non-negative")));
    }
    let v2 = v0 * v0;
    Ok(ratio * v2 / (PI * b * (v2 + medium.alpha() * ratio * ratio)))
}

/// Top apex-wire position of the triangular scheme: the minor-axis vertex of
/// the ellipse with foci (−x0, b) and (0, b) and major axis v0τ − x0.
/// The bottom wire is the mirror image in z.
pub fn apex_wire_position(x0: f64, b: f64, v0: f64, tau: f64) -> Result<(f64, f64)> {
    require_feasible(v0, tau, x0)?;
    let a = 0.5 * (v0 * tau - x0);
    let c = 0.5 * x0;
    Ok((-c, b + (a * a - c * c).max(0.0).sqrt()))
}

/// Single-wire field magnitude `μ0 |I| / (2π r)` (T).
pub fn field_magnitude_at(distance: f64, current: f64) -> Result<f64> {
    require_positive("distance", distance)?;
    Ok(MU0 * current.abs() / (2.0 * PI * distance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MICRON;

    const V0: f64 = 0.01;
    const B: f64 = 0.5 * MICRON;
    const X0: f64 = 300.0 * MICRON;
    const TAU: f64 = 0.1;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn medium() -> Medium {
        Medium::diamond()
    }

    #[test]
    fn stiffness_of_reference_currents() {
        let m = medium();
        let k = stiffness_k(0.616467, B, V0, &m).unwrap();
        assert!((k - 4.0).abs() < 1e-3);
        let k = stiffness_k(0.925273, B, V0, &m).unwrap();
        let oracle = (PI / (3.0f64 / 7.0).acos()).powi(2);
        assert!((k - 7.76).abs() < 0.01);
        assert!(rel(k, oracle) < 1e-5);
        assert!((stiffness_k(1e-9, B, V0, &m).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(stiffness_k(1.0, 0.0, V0, &m), Err(Error::HeadOn));
    }

    #[test]
    fn scattering_angle_values() {
        assert!((scattering_angle(4.0).unwrap() - PI / 2.0).abs() < 1e-15);
        assert_eq!(scattering_angle(1.0).unwrap(), 0.0);
        let k = (PI / (3.0f64 / 7.0).acos()).powi(2);
        let ts = scattering_angle(k).unwrap();
        assert!((ts - (-3.0f64 / 7.0).acos()).abs() < 1e-12);
        assert!((ts - 2.0137).abs() < 1e-4);
        assert!(matches!(scattering_angle(0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn orbit_periapsis_and_asymptotes() {
        let m = medium();
        let i = 0.925273;
        let sol = OrbitSolution::for_wire(i, B, V0, &m).unwrap();
        let rp = sol.radius(sol.periapsis_angle()).unwrap();
        let d = closest_approach(B, i, V0, &m).unwrap();
        assert!(rel(rp, d) < 1e-12);
        assert!(rel(rp, sol.k.sqrt() * B) < 1e-12);
        // Brute-force minimum over the branch.
        let (lo, hi) = (sol.outgoing_angle(), sol.incoming_angle());
        let n = 200_000;
        let min = (1..n)
            .map(|j| lo + (hi - lo) * j as f64 / n as f64)
            .map(|t| sol.radius(t).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(rel(min, d) < 1e-8);
        assert!((sol.incoming_angle() - PI).abs() < 1e-12);
        assert!((sol.outgoing_angle() - scattering_angle(sol.k).unwrap()).abs() < 1e-12);
        assert!(sol.radius(PI - 1e-9).unwrap() > 1e3 * d);
        assert!(sol.radius(sol.outgoing_angle() + 1e-9).unwrap() > 1e3 * d);
        assert!(analytic_orbit(sol.outgoing_angle() - 0.1, sol.k, B).is_err());
    }

    #[test]
    fn straight_line_orbit_without_current() {
        let sol = OrbitSolution::new(1.0, B).unwrap();
        for t in [0.3, 1.0, 2.0, 3.0] {
            assert!(rel(sol.radius(t).unwrap(), B / t.sin()) < 1e-12);
        }
    }

    #[test]
    fn analytic_superposition_sizes() {
        let t = triangular_max_size(V0, TAU, X0).unwrap();
        assert!(rel(t, 632.46 * MICRON) < 1e-5);
        assert!(rel(triangular_max_size(V0, TAU, 1e-12).unwrap(), V0 * TAU) < 1e-9);
        assert_eq!(triangular_max_size(V0, 2.0 * X0 / V0, X0).unwrap(), 0.0);
        let r = inverse_max_size(V0, TAU, X0).unwrap();
        assert!(rel(r, 400.0 * MICRON) < 1e-12);
        assert!(inverse_max_size(V0, 2.0 * X0 / V0, X0).unwrap().abs() < 1e-18);
        assert!(t > r);
        assert!(matches!(triangular_max_size(V0, 0.05, X0), Err(Error::Infeasible(_))));
        assert!(matches!(inverse_max_size(V0, 0.05, X0), Err(Error::Infeasible(_))));
    }

    #[test]
    fn splitting_current_ratios() {
        let m = medium();
        let c1 = triangular_current_ratio(V0, TAU, X0, &m).unwrap();
        assert!(rel(c1, 1.8505e6) < 1e-4);
        assert!(rel(c1 * B, 0.925273) < 1e-5);
        let c2 = inverse_current_ratio(V0, &m).unwrap();
        assert!(rel(c2 * B, 0.616467) < 1e-5);
        assert!(rel(inverse_current_ratio(V0 / 2.0, &m).unwrap(), c2 / 2.0) < 1e-15);
        let k = stiffness_k(c2 * B, B, V0, &m).unwrap();
        assert!((k - 4.0).abs() < 1e-12 * 4.0);
    }

    #[test]
    fn triangular_ratio_at_sixty_degrees() {
        // ratio 1/2: arccos = π/3 = π/√k, so k = 9, θs = 2π/3, I/b = (v0/√α)√8.
        let m = medium();
        let x0 = 1e-3;
        let tau = 3.0 * x0 / V0;
        assert!((triangular_angle_ratio(V0, tau, x0).unwrap() - 0.5).abs() < 1e-15);
        let c = triangular_current_ratio(V0, tau, x0, &m).unwrap();
        assert!(rel(c, V0 / m.alpha().sqrt() * 8f64.sqrt()) < 1e-12);
        let k = stiffness_k(c * B, B, V0, &m).unwrap();
        assert!(rel(k, 9.0) < 1e-12);
        assert!((scattering_angle(k).unwrap() - 2.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn triangular_ratio_near_grazing_limit() {
        // As the ratio approaches 1 the required angle shrinks toward π and
        // the current grows without bound.
        let m = medium();
        let mut prev = 0.0;
        for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
            let x0 = 1e-3;
            let tau = (x0 / (1.0 - eps) + x0) / V0;
            let c = triangular_current_ratio(V0, tau, x0, &m).unwrap();
            assert!(c > prev);
            prev = c;
        }
        assert!(matches!(
            triangular_current_ratio(V0, 2.0 * X0 / V0, X0, &m),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn closest_approaches() {
        let m = medium();
        let d0 = closest_approach_headon(0.925273, V0, &m).unwrap();
        let oracle = ((1.39269f64 * MICRON).powi(2) - B * B).sqrt();
        assert!(rel(d0, 1.2997 * MICRON) < 2e-4);
        assert!(rel(d0, oracle) < 1e-4);
        assert_eq!(closest_approach_headon(0.0, V0, &m).unwrap(), 0.0);
        assert!(closest_approach_headon(1.0, 1e12, &m).unwrap() < 1e-19);
        let d = closest_approach(B, 0.925273, V0, &m).unwrap();
        assert!(rel(d, 1.39269 * MICRON) < 5e-6);
        assert_eq!(closest_approach(B, 0.0, V0, &m).unwrap(), B);
    }

    #[test]
    fn current_density_values() {
        let m = medium();
        let c1 = triangular_current_ratio(V0, TAU, X0, &m).unwrap();
        let rho = current_density(V0, B, c1, &m).unwrap();
        assert!(rel(rho, 0.15e12) < 0.02);
        let d = closest_approach(B, c1 * B, V0, &m).unwrap();
        assert!(rel(rho, c1 * B / (PI * d * d)) < 1e-12);
        // Turning wire of the inverse scheme, nearly head-on.
        let i = 0.00823;
        let b_eff = 1e-15;
        let rho = current_density(V0, b_eff, i / b_eff, &m).unwrap();
        assert!(rel(rho, 19.6e12) < 0.02);
        assert_eq!(current_density(V0, B, 0.0, &m).unwrap(), 0.0);
    }

    #[test]
    fn apex_wire_geometry() {
        let (x, z) = apex_wire_position(X0, B, V0, TAU).unwrap();
        assert!(rel(x, -150.0 * MICRON) < 1e-12);
        let semi_minor = ((350.0f64).powi(2) - 150.0f64.powi(2)).sqrt() * MICRON;
        assert!(rel(z, semi_minor + B) < 1e-12);
        assert!((z / MICRON - 316.73).abs() < 0.01);
        let t = triangular_max_size(V0, TAU, X0).unwrap();
        assert!(rel(z - B, t / 2.0) < 1e-12);
        let (x, z) = apex_wire_position(1e-15, B, V0, TAU).unwrap();
        assert!(x.abs() < 1e-15 && rel(z, B + V0 * TAU / 2.0) < 1e-9);
    }

    #[test]
    fn field_magnitudes() {
        let b = field_magnitude_at(1.39269 * MICRON, 0.925273).unwrap();
        assert!((b - 0.133).abs() < 0.001);
        let b = field_magnitude_at(0.0115617 * MICRON, 0.00823).unwrap();
        assert!((b - 0.142).abs() < 0.001);
        assert_eq!(field_magnitude_at(1.0, 0.0).unwrap(), 0.0);
    }
}
