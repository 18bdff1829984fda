//! Error vectors of converging orbits and their Perron rate.

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::{
    simulate_deviations, Deviations, Equilibrium, InitialConditions, Orbit, Params,
};
use crate::error::{Error, Result};
use crate::stability;

/// Norm floor for errors computed from stored orbit values; below it the
/// subtraction `x[n] - x_bar` is mostly rounding.
pub const DEFAULT_FLOOR: f64 = 1e-13;

/// Norm floor for errors from the deviation recurrence, which keeps relative
/// precision down to the subnormal range.
pub const DEVIATION_FLOOR: f64 = 1e-280;

pub const DEFAULT_BURN_IN: usize = 20;
pub const DEFAULT_WINDOW: usize = 50;

/// `(e1[n], e1[n-1], e1[n-2], e2[n], e2[n-1], e2[n-2])`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorVector(pub [f64; 6]);

impl ErrorVector {
    /// Euclidean norm, scaled so tiny components do not underflow when
    /// squared.
    pub fn norm(&self) -> f64 {
        let scale = self.0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 || !scale.is_finite() {
            return scale;
        }
        scale
            * self
                .0
                .iter()
                .map(|v| (v / scale).powi(2))
                .sum::<f64>()
                .sqrt()
    }
}

/// `e[n]` for `n = 0, 1, ...` up to (excluding) the first vector whose norm
/// falls below the floor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorSequence {
    pub vectors: Vec<ErrorVector>,
    pub norms: Vec<f64>,
    /// Index `n` where the norm first fell below the floor.
    pub truncated_at: Option<i64>,
}

impl ErrorSequence {
    pub fn from_deviations(dev: &Deviations, floor: f64) -> Self {
        let mut seq = ErrorSequence {
            vectors: Vec::new(),
            norms: Vec::new(),
            truncated_at: None,
        };
        // dev index k holds orbit index k - 2; e[n] needs n-2 >= -2
        for k in 2..dev.len() {
            let v = ErrorVector([
                dev.dx[k],
                dev.dx[k - 1],
                dev.dx[k - 2],
                dev.dy[k],
                dev.dy[k - 1],
                dev.dy[k - 2],
            ]);
            let norm = v.norm();
            if norm < floor {
                seq.truncated_at = Some(k as i64 - 2);
                break;
            }
            seq.vectors.push(v);
            seq.norms.push(norm);
        }
        seq
    }
}

/// Error vectors of a stored orbit, truncated at `floor`.
pub fn error_sequence(orbit: &Orbit, eq: &Equilibrium, floor: f64) -> ErrorSequence {
    ErrorSequence::from_deviations(&orbit.deviations(eq), floor)
}

/// Error vectors from the deviation recurrence, for rate estimates that need
/// long, cancellation-free sequences.
pub fn error_sequence_exact(
    params: &Params,
    init: &InitialConditions,
    n_steps: usize,
) -> ErrorSequence {
    ErrorSequence::from_deviations(&simulate_deviations(params, init, n_steps), DEVIATION_FLOOR)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenMatch {
    pub modulus: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateEstimate {
    /// Geometric mean of the last `window` ratios `|e[n+1]| / |e[n]|`.
    pub ratio_estimate: f64,
    /// `|e[N]|^(1/N)` at the last usable index.
    pub root_estimate: f64,
    /// Indices `n` whose ratios entered the geometric mean.
    pub usable_range: (usize, usize),
    pub matched: Option<EigenMatch>,
}

impl RateEstimate {
    pub fn with_match(mut self, eigenvalues: &[Complex64]) -> Self {
        self.matched = Some(match_eigenvalue(self.ratio_estimate, eigenvalues));
        self
    }
}

/// Estimates the Perron rate from `norms` (index `n` at position `n`).
///
/// Needs at least `burn_in + window + 1` norms; the ratios used are the last
/// `window` ones. `window = None` uses every ratio after `burn_in`.
pub fn estimate_rate(norms: &[f64], burn_in: usize, window: Option<usize>) -> Result<RateEstimate> {
    if let Some(bad) = norms.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::InsufficientData(format!(
            "error norms must be positive and finite, found {bad}"
        )));
    }
    let available = norms.len().saturating_sub(burn_in + 1);
    let window = window.unwrap_or(available);
    if window == 0 || norms.len() < burn_in + window + 1 {
        return Err(Error::InsufficientData(format!(
            "{} error norms available, need at least {} (burn-in {burn_in}, window {window})",
            norms.len(),
            burn_in + window.max(1) + 1
        )));
    }
    let last = norms.len() - 1;
    let first = last - window;
    // the mean of log-ratios telescopes; base 2 keeps power-of-two data exact
    let mean_log = (norms[last].log2() - norms[first].log2()) / window as f64;
    let ratio_estimate = mean_log.exp2();
    let root_estimate = norms[last].powf(1.0 / last as f64);
    Ok(RateEstimate {
        ratio_estimate,
        root_estimate,
        usable_range: (first, last),
        matched: None,
    })
}

/// The eigenvalue modulus closest to `estimate`.
pub fn match_eigenvalue(estimate: f64, eigenvalues: &[Complex64]) -> EigenMatch {
    eigenvalues
        .iter()
        .map(|z| {
            let modulus = z.norm();
            EigenMatch {
                modulus,
                gap: (estimate - modulus).abs(),
            }
        })
        .min_by(|a, b| a.gap.total_cmp(&b.gap))
        .unwrap_or(EigenMatch {
            modulus: f64::NAN,
            gap: f64::INFINITY,
        })
}

/// Settings for [`perron_rate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSettings {
    pub n_steps: usize,
    pub burn_in: usize,
    pub window: Option<usize>,
    /// The orbit must end within this distance (max-norm) of the
    /// equilibrium to count as converging.
    pub convergence_tol: f64,
}

impl Default for RateSettings {
    fn default() -> Self {
        RateSettings {
            n_steps: 1000,
            burn_in: DEFAULT_BURN_IN,
            window: None,
            convergence_tol: 1e-6,
        }
    }
}

/// Simulates the error dynamics exactly, estimates the rate and matches it
/// against the Jacobian spectrum.
pub fn perron_rate(
    params: &Params,
    init: &InitialConditions,
    settings: &RateSettings,
) -> Result<RateEstimate> {
    let dev = simulate_deviations(params, init, settings.n_steps);
    let ended = dev.len() == settings.n_steps + 3;
    let final_distance = dev
        .dx
        .last()
        .zip(dev.dy.last())
        .map_or(f64::INFINITY, |(e, f)| e.abs().max(f.abs()));
    if !ended || final_distance.is_nan() || final_distance > settings.convergence_tol {
        return Err(Error::InsufficientData(format!(
            "orbit does not converge: distance {final_distance:e} from the equilibrium after {} steps",
            dev.len().saturating_sub(3)
        )));
    }
    let seq = ErrorSequence::from_deviations(&dev, DEVIATION_FLOOR);
    let spectrum = stability::eigenvalues(&stability::jacobian(params), stability::poly::ROOT_TOL)?;
    Ok(
        estimate_rate(&seq.norms, settings.burn_in, settings.window)?
            .with_match(&spectrum.eigenvalues),
    )
}
