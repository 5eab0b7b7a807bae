//! Bracketing and a safeguarded secant/bisection hybrid for expensive
//! scalar objectives that may be undefined in places.
//!
//! Objectives return `None` where they have no value (for the designer:
//! the packet never re-crosses the launch plane). Such points never form
//! a bracket end.

/// One objective evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub x: f64,
    pub f: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub f_lo: f64,
    pub hi: f64,
    pub f_hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RootError {
    /// No sign change among the scanned points.
    NoBracket { samples: Vec<Sample> },
    /// Ran out of iterations; `best` is the smallest |f| seen.
    NotConverged { best: Sample, iterations: usize },
    /// The objective was undefined inside a valid bracket.
    Undefined { at: f64 },
}

/// Scans `seed · factor^j` for j = ±1, ±2, … (alternating) until two
/// neighbouring defined samples change sign. Gaps between a defined and an
/// undefined neighbour are split geometrically a few times, since a sign
/// change often hides just before the objective stops being defined.
/// Returns the bracket closest to the seed and every sample taken.
pub fn scan_geometric<F>(mut f: F, seed: f64, factor: f64, max_steps: usize) -> (Result<Bracket, RootError>, Vec<Sample>)
where
    F: FnMut(f64) -> Option<f64>,
{
    const REFINE_PER_STEP: usize = 4;
    const MIN_GAP_RATIO: f64 = 1.05;
    assert!(seed > 0.0 && factor > 1.0);
    let mut samples = vec![Sample { x: seed, f: f(seed) }];
    let sorted = |samples: &[Sample]| {
        let mut s = samples.to_vec();
        s.sort_by(|a, b| a.x.total_cmp(&b.x));
        s
    };
    for j in 1..=max_steps as i32 {
        for x in [seed * factor.powi(j), seed * factor.powi(-j)] {
            samples.push(Sample { x, f: f(x) });
            if let Some(b) = closest_sign_change(&sorted(&samples), seed) {
                return (Ok(b), samples);
            }
            for _ in 0..REFINE_PER_STEP {
                let s = sorted(&samples);
                let gap = s
                    .windows(2)
                    .filter(|w| w[0].f.is_some() != w[1].f.is_some() && w[1].x / w[0].x > MIN_GAP_RATIO)
                    .min_by(|a, b| log_distance(a[0].x, a[1].x, seed).total_cmp(&log_distance(b[0].x, b[1].x, seed)))
                    .map(|w| (w[0].x * w[1].x).sqrt());
                let Some(x) = gap else { break };
                samples.push(Sample { x, f: f(x) });
                if let Some(b) = closest_sign_change(&sorted(&samples), seed) {
                    return (Ok(b), samples);
                }
            }
        }
    }
    (
        Err(RootError::NoBracket {
            samples: samples.clone(),
        }),
        samples,
    )
}

fn log_distance(lo: f64, hi: f64, seed: f64) -> f64 {
    (0.5 * (lo.ln() + hi.ln()) - seed.ln()).abs()
}

fn closest_sign_change(sorted: &[Sample], seed: f64) -> Option<Bracket> {
    sorted
        .windows(2)
        .filter_map(|w| match (w[0].f, w[1].f) {
            (Some(a), Some(b)) if a.signum() != b.signum() || a == 0.0 || b == 0.0 => Some(Bracket {
                lo: w[0].x,
                f_lo: a,
                hi: w[1].x,
                f_hi: b,
            }),
            _ => None,
        })
        .min_by(|a, b| log_distance(a.lo, a.hi, seed).total_cmp(&log_distance(b.lo, b.hi, seed)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Root {
    pub x: f64,
    pub f: f64,
    pub iterations: usize,
    /// Every evaluation made inside the bracket, in order.
    pub history: Vec<Sample>,
}

/// Refines a bracket until `|f| <= ftol` or the bracket is narrower than
/// `xtol`. Secant steps are taken when they fall inside the bracket and
/// the bracket keeps shrinking; otherwise the interval is bisected.
pub fn hybrid_root<F>(mut f: F, bracket: Bracket, xtol: f64, ftol: f64, max_iter: usize) -> Result<Root, RootError>
where
    F: FnMut(f64) -> Option<f64>,
{
    let Bracket {
        mut lo,
        mut f_lo,
        mut hi,
        mut f_hi,
    } = bracket;
    if f_lo == 0.0 {
        return Ok(Root { x: lo, f: 0.0, iterations: 0, history: vec![] });
    }
    if f_hi == 0.0 {
        return Ok(Root { x: hi, f: 0.0, iterations: 0, history: vec![] });
    }
    let mut best = if f_lo.abs() < f_hi.abs() {
        Sample { x: lo, f: Some(f_lo) }
    } else {
        Sample { x: hi, f: Some(f_hi) }
    };
    let mut history = Vec::new();
    let mut stalls = 0;
    // +1 when `lo` moved last, -1 when `hi` moved last.
    let mut side = 0i8;

    for it in 1..=max_iter {
        let width = hi - lo;
        let secant = lo - f_lo * width / (f_hi - f_lo);
        let x = if stalls < 2 && secant.is_finite() && secant > lo && secant < hi {
            secant
        } else {
            0.5 * (lo + hi)
        };
        let Some(fx) = f(x) else {
            return Err(RootError::Undefined { at: x });
        };
        history.push(Sample { x, f: Some(fx) });
        if fx.abs() < best.f.map_or(f64::INFINITY, f64::abs) {
            best = Sample { x, f: Some(fx) };
        }
        if fx == 0.0 || fx.abs() <= ftol {
            return Ok(Root { x, f: fx, iterations: it, history });
        }
        // Illinois rule: halve the stale end's value when the same end moves twice.
        if fx.signum() == f_lo.signum() {
            lo = x;
            f_lo = fx;
            if side == 1 {
                f_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = x;
            f_hi = fx;
            if side == -1 {
                f_lo *= 0.5;
            }
            side = -1;
        }
        let new_width = hi - lo;
        if new_width <= xtol {
            let b = best;
            return Ok(Root {
                x: b.x,
                f: b.f.unwrap_or(fx),
                iterations: it,
                history,
            });
        }
        // Two steps in a row that fail to halve the bracket force a bisection.
        stalls = if new_width > 0.5 * width { stalls + 1 } else { 0 };
    }
    Err(RootError::NotConverged {
        best,
        iterations: max_iter,
    })
}
