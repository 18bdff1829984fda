//! Semi-cycle decomposition, oscillation status, monotone tails and the
//! period-two search.
//!
//! Everything here works on deviations from the equilibrium. A term sits in
//! a positive semi-cycle when its deviation is `>= 0` and in a negative one
//! when it is `< 0`; ties go to the positive side, with no tolerance.
//! Deviations can come either from a stored orbit ([`Orbit::deviations`]) or
//! from the cancellation-free recurrence in
//! [`simulate_deviations`](crate::dynamics::simulate_deviations).

use serde::Serialize;

use crate::dynamics::{Deviations, Equilibrium, Orbit, Params, FIRST_INDEX};

/// Absolute distance under which a term counts as sitting on the equilibrium.
pub const EQUILIBRIUM_TOL: f64 = 1e-12;

/// Orbits shorter than this are not classified.
pub const MIN_CLASSIFY_LEN: usize = 10;

/// Shortest suffix reported as a monotone tail.
pub const MIN_MONOTONE_TAIL: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn of(deviation: f64) -> Sign {
        if deviation >= 0.0 {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Sign::Positive => "positive",
            Sign::Negative => "negative",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    X,
    Y,
    Joint,
}

impl Component {
    pub fn as_str(&self) -> &'static str {
        match self {
            Component::X => "x",
            Component::Y => "y",
            Component::Joint => "joint",
        }
    }
}

/// A maximal run of terms on one side of the equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SemiCycle {
    pub component: Component,
    pub sign: Sign,
    pub start: i64,
    /// Number of observed terms.
    pub length: usize,
    /// The run reaches the end of the finite orbit, so its true length is
    /// unknown.
    pub open: bool,
}

impl SemiCycle {
    pub fn end(&self) -> i64 {
        self.start + self.length as i64 - 1
    }
}

/// A maximal range on which both components share a sign.
///
/// `aligned` is set when the range coincides exactly with an x semi-cycle
/// and a y semi-cycle, i.e. both components change sign together at each
/// end (or the end is the edge of the orbit).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct JointSemiCycle {
    pub sign: Sign,
    pub start: i64,
    pub length: usize,
    pub open: bool,
    pub aligned: bool,
}

impl JointSemiCycle {
    pub fn end(&self) -> i64 {
        self.start + self.length as i64 - 1
    }

    pub fn as_semicycle(&self) -> SemiCycle {
        SemiCycle {
            component: Component::Joint,
            sign: self.sign,
            start: self.start,
            length: self.length,
            open: self.open,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SemiCycles {
    pub x: Vec<SemiCycle>,
    pub y: Vec<SemiCycle>,
    pub joint: Vec<JointSemiCycle>,
}

impl SemiCycles {
    /// Number of joint entries that do not line up with the per-component
    /// semi-cycles.
    pub fn misaligned(&self) -> usize {
        self.joint.iter().filter(|j| !j.aligned).count()
    }
}

fn runs(component: Component, values: &[f64]) -> Vec<SemiCycle> {
    let mut out: Vec<SemiCycle> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        let sign = Sign::of(v);
        match out.last_mut() {
            Some(c) if c.sign == sign => c.length += 1,
            _ => out.push(SemiCycle {
                component,
                sign,
                start: FIRST_INDEX + i as i64,
                length: 1,
                open: false,
            }),
        }
    }
    if let Some(last) = out.last_mut() {
        last.open = true;
    }
    out
}

fn joint_runs(dx: &[f64], dy: &[f64]) -> Vec<JointSemiCycle> {
    let len = dx.len().min(dy.len());
    let mut out: Vec<JointSemiCycle> = Vec::new();
    let mut prev_agreed = false;
    for i in 0..len {
        let (sx, sy) = (Sign::of(dx[i]), Sign::of(dy[i]));
        if sx != sy {
            prev_agreed = false;
            continue;
        }
        match out.last_mut() {
            Some(j) if prev_agreed && j.sign == sx => j.length += 1,
            _ => out.push(JointSemiCycle {
                sign: sx,
                start: FIRST_INDEX + i as i64,
                length: 1,
                open: false,
                aligned: false,
            }),
        }
        prev_agreed = true;
    }
    let last_index = FIRST_INDEX + len as i64 - 1;
    for k in 0..out.len() {
        let starts_clean =
            out[k].start == FIRST_INDEX || (k > 0 && out[k - 1].end() + 1 == out[k].start);
        let at_end = out[k].end() == last_index;
        let ends_clean = at_end || (k + 1 < out.len() && out[k].end() + 1 == out[k + 1].start);
        out[k].open = at_end;
        out[k].aligned = starts_clean && ends_clean;
    }
    out
}

/// Splits each component, and the pair jointly, into semi-cycles.
pub fn semicycles_of(dev: &Deviations) -> SemiCycles {
    SemiCycles {
        x: runs(Component::X, &dev.dx),
        y: runs(Component::Y, &dev.dy),
        joint: joint_runs(&dev.dx, &dev.dy),
    }
}

/// Semi-cycles of a stored orbit, comparing stored values against `eq`
/// exactly.
pub fn semicycles(orbit: &Orbit, eq: &Equilibrium) -> SemiCycles {
    semicycles_of(&orbit.deviations(eq))
}

/// Outcome of the semi-cycle length rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RuleCheck {
    pub holds: bool,
    /// Position in the joint list of the first offending entry.
    pub violation: Option<usize>,
    /// Orbit index where that entry starts.
    pub violation_start: Option<i64>,
    /// Number of closed entries the rule was applied to.
    pub checked: usize,
}

/// Checks that once a joint semi-cycle with at least two terms has been
/// seen, every directly following closed joint semi-cycle has at least
/// three terms.
///
/// "Directly following" means the entry starts right after the previous one
/// ends, so both components switched sign at the same index. A gap in the
/// joint list (an index where the components disagree) breaks the chain,
/// and the rule is only re-armed by a later entry of length two or more.
/// Open entries are never checked.
pub fn check_semicycle_rule(joint: &[JointSemiCycle]) -> RuleCheck {
    let mut armed = false;
    let mut checked = 0;
    for (k, entry) in joint.iter().enumerate() {
        let contiguous = k > 0 && joint[k - 1].end() + 1 == entry.start;
        if !contiguous {
            armed = false;
        }
        if armed && !entry.open {
            checked += 1;
            if entry.length < 3 {
                return RuleCheck {
                    holds: false,
                    violation: Some(k),
                    violation_start: Some(entry.start),
                    checked,
                };
            }
        }
        armed = entry.length >= 2;
    }
    RuleCheck {
        holds: true,
        violation: None,
        violation_start: None,
        checked,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OscillationStatus {
    Oscillatory,
    NonoscillatoryPositive,
    NonoscillatoryNegative,
    AtEquilibrium,
    InsufficientData,
}

impl OscillationStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            OscillationStatus::Oscillatory => "oscillatory",
            OscillationStatus::NonoscillatoryPositive => "nonoscillatory-positive",
            OscillationStatus::NonoscillatoryNegative => "nonoscillatory-negative",
            OscillationStatus::AtEquilibrium => "at-equilibrium",
            OscillationStatus::InsufficientData => "insufficient-data",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum JointStatus {
    /// At least one component oscillates.
    Oscillatory,
    NonoscillatoryPositive,
    NonoscillatoryNegative,
    /// Both components eventually keep one sign, but not the same one.
    NonoscillatoryMixed,
    AtEquilibrium,
    InsufficientData,
}

impl JointStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            JointStatus::Oscillatory => "oscillatory",
            JointStatus::NonoscillatoryPositive => "nonoscillatory-positive",
            JointStatus::NonoscillatoryNegative => "nonoscillatory-negative",
            JointStatus::NonoscillatoryMixed => "nonoscillatory-mixed",
            JointStatus::AtEquilibrium => "at-equilibrium",
            JointStatus::InsufficientData => "insufficient-data",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillationReport {
    pub x_status: OscillationStatus,
    pub y_status: OscillationStatus,
    pub joint_status: JointStatus,
    /// First index from which every later term of both components lies
    /// within [`EQUILIBRIUM_TOL`] of the equilibrium.
    pub settled_from: Option<i64>,
}

/// Index (into `values`) from which every term is within tolerance of zero.
fn settle_point(values: &[f64]) -> usize {
    values
        .iter()
        .rposition(|v| v.abs() > EQUILIBRIUM_TOL)
        .map_or(0, |i| i + 1)
}

/// Classifies one component.
///
/// Terms inside the settled tail carry no sign information and are dropped.
/// On the remaining active part, the component is non-oscillatory when the
/// run after its last sign change covers more than half of the active part,
/// and oscillatory otherwise.
fn classify_component(values: &[f64]) -> OscillationStatus {
    if values.len() < MIN_CLASSIFY_LEN {
        return OscillationStatus::InsufficientData;
    }
    let active = &values[..settle_point(values)];
    if active.is_empty() {
        return OscillationStatus::AtEquilibrium;
    }
    let last_sign = Sign::of(active[active.len() - 1]);
    let tail = active
        .iter()
        .rev()
        .take_while(|v| Sign::of(**v) == last_sign)
        .count();
    if 2 * tail > active.len() {
        match last_sign {
            Sign::Positive => OscillationStatus::NonoscillatoryPositive,
            Sign::Negative => OscillationStatus::NonoscillatoryNegative,
        }
    } else {
        OscillationStatus::Oscillatory
    }
}

fn joint_status(x: OscillationStatus, y: OscillationStatus) -> JointStatus {
    use OscillationStatus as S;
    match (x, y) {
        (S::InsufficientData, _) | (_, S::InsufficientData) => JointStatus::InsufficientData,
        (S::Oscillatory, _) | (_, S::Oscillatory) => JointStatus::Oscillatory,
        (S::AtEquilibrium, S::AtEquilibrium) => JointStatus::AtEquilibrium,
        (S::NonoscillatoryNegative, S::NonoscillatoryNegative)
        | (S::NonoscillatoryNegative, S::AtEquilibrium)
        | (S::AtEquilibrium, S::NonoscillatoryNegative) => JointStatus::NonoscillatoryNegative,
        (S::NonoscillatoryPositive, S::NonoscillatoryPositive)
        | (S::NonoscillatoryPositive, S::AtEquilibrium)
        | (S::AtEquilibrium, S::NonoscillatoryPositive) => JointStatus::NonoscillatoryPositive,
        _ => JointStatus::NonoscillatoryMixed,
    }
}

pub fn classify_oscillation_of(dev: &Deviations) -> OscillationReport {
    let x_status = classify_component(&dev.dx);
    let y_status = classify_component(&dev.dy);
    let settle = settle_point(&dev.dx).max(settle_point(&dev.dy));
    let settled_from = (settle < dev.len()).then(|| FIRST_INDEX + settle as i64);
    OscillationReport {
        x_status,
        y_status,
        joint_status: joint_status(x_status, y_status),
        settled_from,
    }
}

pub fn classify_oscillation(orbit: &Orbit, eq: &Equilibrium) -> OscillationReport {
    classify_oscillation_of(&orbit.deviations(eq))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotone {
    Increasing,
    Decreasing,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MonotoneTail {
    pub x: Monotone,
    pub y: Monotone,
    /// Orbit index where the reported x tail starts (`None` when `x` is
    /// [`Monotone::None`]).
    pub x_start: Option<i64>,
    pub y_start: Option<i64>,
}

/// Longest non-strictly monotone suffix of `values`, reported only when it
/// has at least [`MIN_MONOTONE_TAIL`] terms and at least one strict step.
pub fn monotone_suffix(values: &[f64]) -> (Monotone, Option<i64>) {
    if values.len() < 2 {
        return (Monotone::None, None);
    }
    let suffix = |pred: fn(f64, f64) -> bool| {
        let mut start = values.len() - 1;
        while start > 0 && pred(values[start - 1], values[start]) {
            start -= 1;
        }
        start
    };
    let inc = suffix(|a, b| a <= b);
    let dec = suffix(|a, b| a >= b);
    let (kind, start) = if inc <= dec {
        (Monotone::Increasing, inc)
    } else {
        (Monotone::Decreasing, dec)
    };
    let tail = &values[start..];
    let strict = tail.windows(2).any(|w| w[0] != w[1]);
    if tail.len() >= MIN_MONOTONE_TAIL && strict {
        (kind, Some(FIRST_INDEX + start as i64))
    } else {
        (Monotone::None, None)
    }
}

pub fn detect_monotone_tail_of(xs: &[f64], ys: &[f64]) -> MonotoneTail {
    let (x, x_start) = monotone_suffix(xs);
    let (y, y_start) = monotone_suffix(ys);
    MonotoneTail {
        x,
        y,
        x_start,
        y_start,
    }
}

pub fn detect_monotone_tail(orbit: &Orbit) -> MonotoneTail {
    detect_monotone_tail_of(&orbit.xs(), &orbit.ys())
}

/// Search box for [`find_period2`]: each of the four coordinates takes the
/// values `lo + (hi - lo) * k / points` for `k = 1..=points`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Period2Grid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Period2Grid {
    /// `(alpha, alpha + 10]` with 11 points per axis.
    pub fn default_for(params: &Params) -> Self {
        Period2Grid {
            lo: params.alpha(),
            hi: params.alpha() + 10.0,
            points: 11,
        }
    }

    fn axis(&self) -> Vec<f64> {
        (1..=self.points)
            .map(|k| self.lo + (self.hi - self.lo) * k as f64 / self.points as f64)
            .collect()
    }
}

pub const PERIOD2_MAX_ITER: usize = 10_000;
pub const PERIOD2_DIVERGENCE_CAP: f64 = 1e12;
pub const PERIOD2_DAMPING: f64 = 0.5;
const PERIOD2_RESIDUAL_TOL: f64 = 1e-13;

/// A period-two candidate: the two alternating states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Period2State {
    /// `(x[n-1], y[n-1])`.
    pub first: (f64, f64),
    /// `(x[n], y[n])`.
    pub second: (f64, f64),
}

impl Period2State {
    fn to_vec(self) -> [f64; 4] {
        [self.first.0, self.first.1, self.second.0, self.second.1]
    }

    fn from_vec(v: [f64; 4]) -> Self {
        Period2State {
            first: (v[0], v[1]),
            second: (v[2], v[3]),
        }
    }

    /// Max-norm distance from the equilibrium.
    pub fn distance_to(&self, eq: &Equilibrium) -> f64 {
        let v = self.to_vec();
        (v[0] - eq.x_bar)
            .abs()
            .max((v[1] - eq.y_bar).abs())
            .max((v[2] - eq.x_bar).abs())
            .max((v[3] - eq.y_bar).abs())
    }
}

/// Two steps of the recurrence from the window that a period-two solution
/// would have, `x[n-2] = x[n]` and `y[n-2] = y[n]`. A fixed point of this
/// map is a period-two solution.
pub fn second_iterate(params: &Params, state: Period2State) -> Option<Period2State> {
    let (x1, y1) = state.first;
    let (x2, y2) = state.second;
    let pow = |num: f64, den: f64, e: f64| {
        let v = (num / den).powf(e);
        v.is_finite().then_some(v)
    };
    // window x = [x2, x1, x2], y = [y2, y1, y2]
    let x3 = params.alpha() + pow(y2, y2, params.p())?;
    let y3 = params.alpha() + pow(x2, x2, params.q())?;
    // window x = [x1, x2, x3]
    let x4 = params.alpha() + pow(y3, y1, params.p())?;
    let y4 = params.alpha() + pow(x3, x1, params.q())?;
    Some(Period2State {
        first: (x3, y3),
        second: (x4, y4),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Period2Outcome {
    Converged {
        state: Period2State,
        residual: f64,
        iterations: usize,
    },
    Diverged {
        iterations: usize,
    },
    NotConverged {
        residual: f64,
    },
}

/// Damped fixed-point iteration of [`second_iterate`] from `start`.
pub fn period2_from(params: &Params, start: Period2State) -> Period2Outcome {
    let mut z = start.to_vec();
    let mut residual = f64::INFINITY;
    for it in 0..PERIOD2_MAX_ITER {
        let Some(image) = second_iterate(params, Period2State::from_vec(z)) else {
            return Period2Outcome::Diverged { iterations: it };
        };
        let image = image.to_vec();
        residual = z
            .iter()
            .zip(image.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if residual <= PERIOD2_RESIDUAL_TOL {
            return Period2Outcome::Converged {
                state: Period2State::from_vec(z),
                residual,
                iterations: it,
            };
        }
        for (zi, gi) in z.iter_mut().zip(image.iter()) {
            *zi = (1.0 - PERIOD2_DAMPING) * *zi + PERIOD2_DAMPING * gi;
        }
        if z.iter()
            .any(|v| !v.is_finite() || v.abs() > PERIOD2_DIVERGENCE_CAP || *v <= 0.0)
        {
            return Period2Outcome::Diverged { iterations: it + 1 };
        }
    }
    Period2Outcome::NotConverged { residual }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Period2Result {
    pub found_nontrivial: bool,
    /// Converged point farthest from the equilibrium.
    pub witness: Option<Period2State>,
    /// Fixed-point residual of the witness.
    pub residual: f64,
    /// Distance of the witness from the equilibrium.
    pub max_distance: f64,
    pub converged: usize,
    pub failed: usize,
}

/// Iterates [`period2_from`] from every node of `grid` and reports whether
/// any converged point lies farther than `tol` (max-norm) from the
/// equilibrium.
pub fn find_period2(params: &Params, grid: &Period2Grid, tol: f64) -> Period2Result {
    let eq = params.equilibrium();
    let axis = grid.axis();
    let mut result = Period2Result {
        found_nontrivial: false,
        witness: None,
        residual: 0.0,
        max_distance: 0.0,
        converged: 0,
        failed: 0,
    };
    for &a in &axis {
        for &b in &axis {
            for &c in &axis {
                for &d in &axis {
                    let start = Period2State {
                        first: (a, b),
                        second: (c, d),
                    };
                    match period2_from(params, start) {
                        Period2Outcome::Converged {
                            state, residual, ..
                        } => {
                            result.converged += 1;
                            let dist = state.distance_to(&eq);
                            if result.witness.is_none() || dist > result.max_distance {
                                result.witness = Some(state);
                                result.residual = residual;
                                result.max_distance = dist;
                            }
                        }
                        _ => result.failed += 1,
                    }
                }
            }
        }
    }
    result.found_nontrivial = result.max_distance > tol;
    result
}
