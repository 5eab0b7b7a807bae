use thiserror::Error;

/// Best shooting iterate reported when a design does not converge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestIterate {
    /// Tuned wire current (A).
    pub current: f64,
    /// Signed closure miss at that current (m), `None` if the launch plane was never re-crossed.
    pub miss: Option<f64>,
}

impl std::fmt::Display for BestIterate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.miss {
            Some(m) => write!(f, "I = {:.9e} A, miss = {:.6e} m", self.current, m),
            None => write!(f, "I = {:.9e} A, no re-crossing", self.current),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unsupported medium: {0}")]
    UnsupportedMedium(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point ({x:.6e}, {z:.6e}) m is within the guard radius of wire {wire}{}", fmt_time(*.time))]
    Singularity {
        wire: usize,
        x: f64,
        z: f64,
        time: Option<f64>,
    },

    #[error("degenerate head-on geometry (b = 0): use closest_approach_headon instead")]
    HeadOn,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible design: {0}")]
    Infeasible(String),

    #[error("step size underflow at t = {time:.6e} s (h = {step:.3e} s); problem too stiff for the requested tolerance")]
    StepUnderflow { time: f64, step: f64 },

    #[error("step budget of {max_steps} exhausted at t = {time:.6e} s")]
    TooManySteps { time: f64, max_steps: usize },

    #[error("trajectories do not overlap in time")]
    DisjointTimeRanges,

    #[error("design failed: {reason}{}", fmt_best(.best))]
    DesignFailure {
        reason: String,
        best: Option<BestIterate>,
    },
}

fn fmt_time(time: Option<f64>) -> String {
    match time {
        Some(t) => format!(" at t = {t:.9e} s"),
        None => String::new(),
    }
}

fn fmt_best(best: &Option<BestIterate>) -> String {
    match best {
        Some(b) => format!(" (best iterate: {b})"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
