//! Geometric majorants for orbits with `alpha > 1` and their audit.
//!
//! With `a = alpha^-(p+q)`, `b = alpha^(1-p) + alpha` and
//! `c = alpha^(1-q) + alpha`, every positive solution satisfies, for
//! `n >= 0`,
//!
//! ```text
//! alpha < x[2n+2] <= x[2] a^n + b/(1-a) (1 - a^n)
//! alpha < x[2n+3] <= x[3] a^n + b/(1-a) (1 - a^n)
//! ```
//!
//! and likewise for `y` with `c` in place of `b`.

use serde::Serialize;

use crate::analysis::Component;
use crate::dynamics::{Orbit, Params};
use crate::error::{Error, Result};

pub const DEFAULT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl EnvelopeCoeffs {
    pub fn new(params: &Params) -> Result<Self> {
        let alpha = params.alpha();
        if alpha <= 1.0 {
            return Err(Error::Domain(format!(
                "envelope needs alpha > 1, got alpha = {alpha}"
            )));
        }
        Ok(EnvelopeCoeffs {
            a: alpha.powf(-(params.p() + params.q())),
            b: alpha.powf(1.0 - params.p()) + alpha,
            c: alpha.powf(1.0 - params.q()) + alpha,
        })
    }

    /// Additive constant of the envelope recurrence for a component: `b`
    /// for x, `c` for y.
    pub fn offset(&self, component: Component) -> f64 {
        match component {
            Component::Y => self.c,
            _ => self.b,
        }
    }

    /// `offset / (1 - a)`, the common limit of the envelopes.
    pub fn limit(&self, component: Component) -> f64 {
        self.offset(component) / (1.0 - self.a)
    }

    /// `seed a^n + offset/(1-a) (1 - a^n)`.
    pub fn envelope_at(&self, component: Component, seed: f64, n: u32) -> f64 {
        let an = self.a.powi(n as i32);
        seed * an + self.limit(component) * (1.0 - an)
    }
}

pub fn envelope_coeffs(params: &Params) -> Result<EnvelopeCoeffs> {
    EnvelopeCoeffs::new(params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolationKind {
    /// The term is not strictly above `alpha`.
    Lower,
    /// The term is above the envelope plus slack.
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsViolation {
    pub component: Component,
    pub index: i64,
    pub value: f64,
    pub lower: f64,
    /// `None` at index 1, which only has the lower bound.
    pub upper: Option<f64>,
    pub kind: ViolationKind,
    /// The violation sits at index 2 or 3, where the envelope equals the
    /// seed value itself.
    pub at_seed: bool,
}

/// One audited term, for plotting the orbit against its envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsRow {
    pub component: Component,
    pub index: i64,
    pub value: f64,
    pub lower: f64,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsAudit {
    pub coeffs: EnvelopeCoeffs,
    pub checked: usize,
    pub violations: Vec<BoundsViolation>,
    /// Largest `value - envelope` seen on upper comparisons (negative when
    /// every term is strictly inside).
    pub max_slack_used: f64,
    pub rows: Vec<BoundsRow>,
}

impl BoundsAudit {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every term from index 1 on against `alpha` (strictly), and every
/// term from index 2 on against its envelope seeded with the orbit's own
/// `x[2], x[3], y[2], y[3]`, allowing `slack` on the upper side.
pub fn audit_bounds(orbit: &Orbit, params: &Params, slack: f64) -> Result<BoundsAudit> {
    let coeffs = EnvelopeCoeffs::new(params)?;
    if orbit.last_index() < 3 {
        return Err(Error::InsufficientData(format!(
            "bounds audit needs the orbit up to index 3, it ends at {}",
            orbit.last_index()
        )));
    }
    let alpha = params.alpha();
    let (x2, y2) = orbit.get(2).expect("index checked");
    let (x3, y3) = orbit.get(3).expect("index checked");

    let mut audit = BoundsAudit {
        coeffs,
        checked: 0,
        violations: Vec::new(),
        max_slack_used: f64::NEG_INFINITY,
        rows: Vec::new(),
    };
    for (index, x, y) in orbit.indexed().filter(|(n, _, _)| *n >= 1) {
        for (component, value, seeds) in [(Component::X, x, (x2, x3)), (Component::Y, y, (y2, y3))]
        {
            audit.checked += 1;
            let upper = (index >= 2).then(|| {
                let k = (index - 2) as u32;
                let seed = if k.is_multiple_of(2) {
                    seeds.0
                } else {
                    seeds.1
                };
                coeffs.envelope_at(component, seed, k / 2)
            });
            let at_seed = index == 2 || index == 3;
            if value <= alpha {
                audit.violations.push(BoundsViolation {
                    component,
                    index,
                    value,
                    lower: alpha,
                    upper,
                    kind: ViolationKind::Lower,
                    at_seed,
                });
            }
            if let Some(env) = upper {
                audit.max_slack_used = audit.max_slack_used.max(value - env);
                if value > env + slack {
                    audit.violations.push(BoundsViolation {
                        component,
                        index,
                        value,
                        lower: alpha,
                        upper,
                        kind: ViolationKind::Upper,
                        at_seed,
                    });
                }
            }
            audit.rows.push(BoundsRow {
                component,
                index,
                value,
                lower: alpha,
                upper,
            });
        }
    }
    Ok(audit)
}
