//! Command-line front end: config parsing, job dispatch and output files.
//!
//! Configs are flat JSON objects whose field names carry their units.
//! Lengths given in μm are converted to metres on load; every number
//! written to a file is SI.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::designer::{design, DesignSpec, Scheme};
use crate::error::Error;
use crate::field::{ForceLaw, WireField, DEFAULT_GUARD_RADIUS};
use crate::integrator::{simulate, Control, Trajectory};
use crate::model::{make_medium, DesignResult, Medium, PacketState, ScatteringInputs, Wire, CHI_M_DIAMOND, MICRON, MU0};
use crate::sweep::{self, ValidationSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID_CONFIG: i32 = 2;
pub const EXIT_DESIGN_FAILURE: i32 = 3;
pub const EXIT_SINGULARITY: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "diamag", version, about = "Diamagnetic nanoparticle trajectories and wire-layout design")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Synthesize a triangular or inverse wire layout.
    Design(JobArgs),
    /// Integrate one trajectory through a given set of wires.
    Simulate(JobArgs),
    /// Tabulate scheme sizes and current densities against launch speed.
    Sweep(JobArgs),
    /// Compare numeric single-wire orbits with the closed form.
    Validate(JobArgs),
}

#[derive(Args, Debug)]
pub struct JobArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    /// Integrator relative tolerance, overriding the config.
    #[arg(long, value_name = "FLOAT")]
    pub tolerance: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

fn default_chi_m() -> f64 {
    CHI_M_DIAMOND
}
fn default_mu0() -> f64 {
    MU0
}
fn default_rtol() -> f64 {
    Control::default().rtol
}
fn default_atol() -> f64 {
    Control::default().atol
}
fn default_atol_velocity() -> f64 {
    Control::default().atol_velocity
}
fn default_guard_um() -> f64 {
    DEFAULT_GUARD_RADIUS / MICRON
}
fn default_closure_tolerance() -> f64 {
    1e-8
}
fn default_shoot_iterations() -> usize {
    60
}
fn default_sweep_b_um() -> f64 {
    0.5
}
fn default_sweep_x0_um() -> f64 {
    300.0
}
fn default_sweep_tau() -> f64 {
    0.1
}
fn default_v0_max() -> f64 {
    sweep::DEFAULT_V0_MAX
}
fn default_points() -> usize {
    sweep::DEFAULT_GRID_POINTS
}
fn default_validation_b_um() -> Vec<f64> {
    sweep::DEFAULT_VALIDATION_B.iter().map(|b| b / MICRON).collect()
}
fn default_validation_current() -> f64 {
    ValidationSpec::default().current
}
fn default_validation_v0() -> f64 {
    ValidationSpec::default().v0
}
fn default_launch_um() -> f64 {
    ValidationSpec::default().launch_distance / MICRON
}
fn default_window() -> f64 {
    ValidationSpec::default().window_factor
}
fn default_resolution() -> usize {
    ValidationSpec::default().resolution
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    pub scheme: Scheme,
    pub v0_m_per_s: f64,
    pub b_um: f64,
    pub x0_um: f64,
    pub tau_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wire_height_um: Option<f64>,
    #[serde(default = "default_closure_tolerance")]
    pub closure_tolerance_m: f64,
    #[serde(default = "default_shoot_iterations")]
    pub shoot_max_iterations: usize,
    #[serde(default = "default_chi_m")]
    pub chi_m_m3_per_kg: f64,
    #[serde(default = "default_mu0")]
    pub mu0_T_m_per_A: f64,
    /// Accepted for bookkeeping only; the dynamics are mass independent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_kg: Option<f64>,
    #[serde(default)]
    pub force_law: ForceLaw,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol_m: f64,
    #[serde(default = "default_atol_velocity")]
    pub atol_m_per_s: f64,
    #[serde(default = "default_guard_um")]
    pub guard_radius_um: f64,
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireConfig {
    pub x_um: f64,
    pub z_um: f64,
    pub current_A: f64,
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default)]
    pub wires: Vec<WireConfig>,
    pub x_um: f64,
    pub z_um: f64,
    pub vx_m_per_s: f64,
    pub vz_m_per_s: f64,
    #[serde(default)]
    pub t_s: f64,
    pub duration_s: f64,
    #[serde(default)]
    pub stop_at_closure: bool,
    #[serde(default = "default_chi_m")]
    pub chi_m_m3_per_kg: f64,
    #[serde(default = "default_mu0")]
    pub mu0_T_m_per_A: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_kg: Option<f64>,
    #[serde(default)]
    pub force_law: ForceLaw,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol_m: f64,
    #[serde(default = "default_atol_velocity")]
    pub atol_m_per_s: f64,
    #[serde(default = "default_guard_um")]
    pub guard_radius_um: f64,
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_sweep_b_um")]
    pub b_um: f64,
    #[serde(default = "default_sweep_x0_um")]
    pub x0_um: f64,
    #[serde(default = "default_sweep_tau")]
    pub tau_s: f64,
    /// Explicit speeds; overrides the generated grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0_list_m_per_s: Option<Vec<f64>>,
    /// Lower grid end; defaults to just above the feasibility bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0_min_m_per_s: Option<f64>,
    #[serde(default = "default_v0_max")]
    pub v0_max_m_per_s: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_chi_m")]
    pub chi_m_m3_per_kg: f64,
    #[serde(default = "default_mu0")]
    pub mu0_T_m_per_A: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_kg: Option<f64>,
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    #[serde(default = "default_validation_b_um")]
    pub b_um: Vec<f64>,
    #[serde(default = "default_validation_current")]
    pub current_A: f64,
    #[serde(default = "default_validation_v0")]
    pub v0_m_per_s: f64,
    #[serde(default = "default_launch_um")]
    pub launch_distance_um: f64,
    #[serde(default = "default_window")]
    pub window_factor: f64,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "default_chi_m")]
    pub chi_m_m3_per_kg: f64,
    #[serde(default = "default_mu0")]
    pub mu0_T_m_per_A: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_kg: Option<f64>,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol_m: f64,
    #[serde(default = "default_atol_velocity")]
    pub atol_m_per_s: f64,
}

fn check_mass(mass: Option<f64>) -> Result<(), Error> {
    match mass {
        Some(m) if !(m > 0.0 && m.is_finite()) => Err(Error::InvalidInput(format!("mass_kg = {m:e} must be positive"))),
        _ => Ok(()),
    }
}

fn control_from(rtol: f64, atol: f64, atol_velocity: f64) -> Result<Control, Error> {
    let c = Control {
        rtol,
        atol,
        atol_velocity,
        ..Control::default()
    };
    c.validate()?;
    Ok(c)
}

impl DesignConfig {
    pub fn to_spec(&self) -> Result<DesignSpec, Error> {
        check_mass(self.mass_kg)?;
        let inputs = ScatteringInputs::new(self.v0_m_per_s, self.b_um * MICRON, self.x0_um * MICRON, self.tau_s)?;
        let mut spec = DesignSpec::new(self.scheme, inputs);
        spec.wire_height = self.wire_height_um.map(|z| z * MICRON);
        spec.closure_tolerance = self.closure_tolerance_m;
        spec.shoot_max_iterations = self.shoot_max_iterations;
        spec.medium = make_medium(self.chi_m_m3_per_kg, self.mu0_T_m_per_A)?;
        spec.law = self.force_law;
        spec.guard_radius = self.guard_radius_um * MICRON;
        spec.control = control_from(self.rtol, self.atol_m, self.atol_m_per_s)?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Everything `simulate` needs, in SI.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulateJob {
    pub initial: PacketState,
    pub field: WireField,
    pub duration: f64,
    pub control: Control,
}

impl SimulateConfig {
    pub fn to_job(&self) -> Result<SimulateJob, Error> {
        check_mass(self.mass_kg)?;
        let medium = make_medium(self.chi_m_m3_per_kg, self.mu0_T_m_per_A)?;
        let wires = self
            .wires
            .iter()
            .map(|w| Wire::new(w.x_um * MICRON, w.z_um * MICRON, w.current_A))
            .collect();
        let field = WireField::new(wires, medium)
            .with_law(self.force_law)
            .with_guard_radius(self.guard_radius_um * MICRON);
        if field.wires.iter().any(|w| !(w.x.is_finite() && w.z.is_finite() && w.current.is_finite())) {
            return Err(Error::InvalidInput("wire coordinates and currents must be finite".into()));
        }
        if !(field.guard_radius >= 0.0) {
            return Err(Error::InvalidInput("guard_radius_um must be non-negative".into()));
        }
        let initial = PacketState::new(self.t_s, self.x_um * MICRON, self.z_um * MICRON, self.vx_m_per_s, self.vz_m_per_s);
        if !initial.is_finite() {
            return Err(Error::InvalidInput("initial state must be finite".into()));
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(Error::InvalidInput(format!("duration_s = {:e} must be positive", self.duration_s)));
        }
        let mut control = control_from(self.rtol, self.atol_m, self.atol_m_per_s)?;
        control.stop_at_closure = self.stop_at_closure;
        Ok(SimulateJob {
            initial,
            field,
            duration: self.duration_s,
            control,
        })
    }
}

impl SweepConfig {
    pub fn medium(&self) -> Result<Medium, Error> {
        check_mass(self.mass_kg)?;
        make_medium(self.chi_m_m3_per_kg, self.mu0_T_m_per_A)
    }

    pub fn speeds(&self) -> Result<Vec<f64>, Error> {
        if let Some(list) = &self.v0_list_m_per_s {
            if list.is_empty() {
                return Err(Error::InvalidInput("v0_list_m_per_s is empty".into()));
            }
            return Ok(list.clone());
        }
        let lo = self
            .v0_min_m_per_s
            .unwrap_or(sweep::FEASIBILITY_MARGIN * 2.0 * self.x0_um * MICRON / self.tau_s);
        sweep::log_grid(lo, self.v0_max_m_per_s, self.points)
    }
}

impl ValidateConfig {
    pub fn to_spec(&self) -> Result<(Vec<f64>, ValidationSpec), Error> {
        check_mass(self.mass_kg)?;
        if self.b_um.is_empty() || self.b_um.iter().any(|b| !(*b > 0.0)) {
            return Err(Error::InvalidInput("b_um must list positive impact parameters".into()));
        }
        let spec = ValidationSpec {
            current: self.current_A,
            v0: self.v0_m_per_s,
            launch_distance: self.launch_distance_um * MICRON,
            window_factor: self.window_factor,
            resolution: self.resolution,
            medium: make_medium(self.chi_m_m3_per_kg, self.mu0_T_m_per_A)?,
            control: control_from(self.rtol, self.atol_m, self.atol_m_per_s)?,
        };
        Ok((self.b_um.iter().map(|b| b * MICRON).collect(), spec))
    }
}

/// Failure of a CLI job, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn config(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID_CONFIG,
            message: msg.into(),
        }
    }

    fn io(path: &Path, e: io::Error) -> Self {
        Self {
            code: EXIT_IO,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidInput(_) | Error::Infeasible(_) | Error::UnsupportedMedium(_) | Error::HeadOn | Error::Domain(_) => {
                EXIT_INVALID_CONFIG
            }
            Error::DesignFailure { .. } => EXIT_DESIGN_FAILURE,
            Error::Singularity { .. } => EXIT_SINGULARITY,
            _ => EXIT_IO,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn read_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>) -> Result<(), Failure> {
    let file = fs::File::create(path).map_err(|e| Failure::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| Failure::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)
    })
}

fn write_trajectory(dir: &Path, stem: &str, traj: &Trajectory, format: Format) -> Result<PathBuf, Failure> {
    let path = match format {
        Format::Csv => dir.join(format!("{stem}.csv")),
        Format::Json => dir.join(format!("{stem}.json")),
    };
    match format {
        Format::Csv => write_file(&path, |w| traj.write_csv(w))?,
        Format::Json => write_json(&path, &traj.samples)?,
    }
    Ok(path)
}

fn prepare_out(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))
}

/// Human summary of a design, in μm and A.
pub fn design_summary(r: &DesignResult) -> String {
    let um = |m: f64| m / MICRON;
    let mut s = String::new();
    let mut line = |k: &str, v: String| s.push_str(&format!("{k:<22}{v}\n"));
    line("scheme", r.scheme.to_string());
    line("splitting current", format!("{:.6} A", r.splitting_current));
    line("tuned current", format!("{:.6} A", r.tuned_current));
    line(
        "max separation",
        format!("{:.3} um (analytic {:.3} um)", um(r.max_separation), um(r.analytic_max_separation)),
    );
    line("closure error", format!("{:.3e} um", um(r.closure_error)));
    line("return time", format!("{:.7} s", r.return_time));
    line(
        "return velocity",
        format!("({:.6e}, {:.6e}) m/s", r.return_velocity.0, r.return_velocity.1),
    );
    for (i, w) in r.wires.iter().enumerate() {
        line(
            &format!("wire {i}"),
            format!(
                "at ({:.4}, {:.4}) um, {:.6} A, closest {:.6} um, rho {:.4} A/um^2, B {:.4} T",
                um(w.x),
                um(w.z),
                w.current,
                um(r.min_distance_per_wire[i]),
                r.current_density_per_wire[i] * MICRON * MICRON,
                r.field_at_closest_per_wire[i]
            ),
        );
    }
    line(
        "current density",
        format!("{:.4} A/um^2 (wire {})", r.min_current_density * MICRON * MICRON, r.binding_wire),
    );
    line("peak field", format!("{:.4} T (wire {})", r.peak_field, r.binding_wire));
    s
}

fn cmd_design(args: &JobArgs) -> Result<(), Failure> {
    let mut cfg: DesignConfig = read_config(&args.config)?;
    if let Some(t) = args.tolerance {
        cfg.rtol = t;
    }
    let spec = cfg.to_spec()?;
    prepare_out(&args.out)?;
    write_json(&args.out.join("config_echo.json"), &cfg)?;
    let d = design(&spec)?;
    write_json(&args.out.join("design_result.json"), &d.result)?;
    write_trajectory(&args.out, "trajectory_top", &d.top, args.format)?;
    write_trajectory(&args.out, "trajectory_bottom", &d.bottom, args.format)?;
    print!("{}", design_summary(&d.result));
    Ok(())
}

fn cmd_simulate(args: &JobArgs) -> Result<(), Failure> {
    let mut cfg: SimulateConfig = read_config(&args.config)?;
    if let Some(t) = args.tolerance {
        cfg.rtol = t;
    }
    let job = cfg.to_job()?;
    prepare_out(&args.out)?;
    write_json(&args.out.join("config_echo.json"), &cfg)?;
    let traj = simulate(job.initial, &job.field, job.duration, &job.control)?;
    let path = write_trajectory(&args.out, "trajectory", &traj, args.format)?;
    write_json(&args.out.join("events.json"), &traj.events)?;
    let end = traj.final_state();
    println!("samples {} -> {}", traj.samples.len(), path.display());
    println!("final   t = {:.6e} s, x = {:.6} um, z = {:.6} um", end.t, end.x / MICRON, end.z / MICRON);
    for p in &traj.events.periapsis_per_wire {
        println!("wire {} closest {:.6} um at t = {:.6e} s", p.wire, p.distance / MICRON, p.state.t);
    }
    Ok(())
}

fn cmd_sweep(args: &JobArgs) -> Result<(), Failure> {
    let cfg: SweepConfig = read_config(&args.config)?;
    let medium = cfg.medium()?;
    let speeds = cfg.speeds()?;
    let rows = sweep::velocity_sweep(&speeds, cfg.b_um * MICRON, cfg.x0_um * MICRON, cfg.tau_s, &medium)?;
    prepare_out(&args.out)?;
    write_json(&args.out.join("config_echo.json"), &cfg)?;
    match args.format {
        Format::Csv => write_file(&args.out.join("sweep.csv"), |w| sweep::write_sweep_csv(&rows, w))?,
        Format::Json => write_json(&args.out.join("sweep.json"), &rows)?,
    }
    let infeasible = rows.iter().filter(|r| !r.feasible).count();
    println!("{} rows, {} infeasible", rows.len(), infeasible);
    Ok(())
}

fn cmd_validate(args: &JobArgs) -> Result<(), Failure> {
    let mut cfg: ValidateConfig = read_config(&args.config)?;
    if let Some(t) = args.tolerance {
        cfg.rtol = t;
    }
    let (bs, spec) = cfg.to_spec()?;
    let rows = sweep::validate_analytic(&bs, &spec)?;
    prepare_out(&args.out)?;
    write_json(&args.out.join("config_echo.json"), &cfg)?;
    write_json(&args.out.join("validation.json"), &rows)?;
    for r in &rows {
        println!(
            "b = {:.3} um  k = {:.4}  periapsis {:.6} um (analytic {:.6})  max deviation {:.3e}",
            r.b / MICRON,
            r.k,
            r.periapsis_numeric / MICRON,
            r.periapsis_analytic / MICRON,
            r.max_relative_deviation
        );
    }
    Ok(())
}

/// Runs one parsed invocation and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Design(a) => cmd_design(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Validate(a) => cmd_validate(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
