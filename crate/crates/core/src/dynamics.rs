//! The system itself: parameters, the sliding third-order state, and
//! forward iteration of
//!
//! ```text
//! x[n+1] = alpha + (y[n] / y[n-2])^p
//! y[n+1] = alpha + (x[n] / x[n-2])^q
//! ```
//!
//! Orbits are indexed from `n = -2`, so the three initial values of each
//! component sit at indices -2, -1 and 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Magnitude above which an orbit is considered to have escaped.
pub const DEFAULT_CAP: f64 = 1e12;

/// Index of the first stored term of every orbit.
pub const FIRST_INDEX: i64 = -2;

/// The parameter triple `(alpha, p, q)`, all strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct Params {
    alpha: f64,
    p: f64,
    q: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    alpha: f64,
    p: f64,
    q: f64,
}

impl TryFrom<RawParams> for Params {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        Params::new(raw.alpha, raw.p, raw.q)
    }
}

impl From<Params> for RawParams {
    fn from(p: Params) -> Self {
        RawParams {
            alpha: p.alpha,
            p: p.p,
            q: p.q,
        }
    }
}

fn check_positive(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            field,
            format!("must be a positive finite number, got {value}"),
        ))
    }
}

impl Params {
    pub fn new(alpha: f64, p: f64, q: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        check_positive("p", p)?;
        check_positive("q", q)?;
        Ok(Params { alpha, p, q })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// The same system with the roles of `p` and `q` exchanged.
    pub fn swapped(&self) -> Self {
        Params {
            alpha: self.alpha,
            p: self.q,
            q: self.p,
        }
    }

    pub fn equilibrium(&self) -> Equilibrium {
        equilibrium(self)
    }
}

/// Initial values `(x[-2], x[-1], x[0])` and `(y[-2], y[-1], y[0])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialConditions {
    x: [f64; 3],
    y: [f64; 3],
}

impl InitialConditions {
    pub fn new(x: [f64; 3], y: [f64; 3]) -> Result<Self> {
        for v in x {
            check_positive("x_init", v)?;
        }
        for v in y {
            check_positive("y_init", v)?;
        }
        Ok(InitialConditions { x, y })
    }

    /// Every initial value placed at the equilibrium of `params`.
    pub fn at_equilibrium(params: &Params) -> Self {
        let e = params.alpha + 1.0;
        InitialConditions {
            x: [e; 3],
            y: [e; 3],
        }
    }

    pub fn x(&self) -> [f64; 3] {
        self.x
    }

    pub fn y(&self) -> [f64; 3] {
        self.y
    }

    pub fn swapped(&self) -> Self {
        InitialConditions {
            x: self.y,
            y: self.x,
        }
    }
}

/// The last three values of each component, oldest first:
/// `x = [x[n-2], x[n-1], x[n]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub x: [f64; 3],
    pub y: [f64; 3],
}

impl Window {
    pub fn new(x: [f64; 3], y: [f64; 3]) -> Result<Self> {
        for v in x.iter().chain(y.iter()) {
            if !(v.is_finite() && *v > 0.0) {
                return Err(Error::Numeric(format!(
                    "window entries must be positive and finite, got {v}"
                )));
            }
        }
        Ok(Window { x, y })
    }

    fn shift(&mut self, x_next: f64, y_next: f64) {
        self.x = [self.x[1], self.x[2], x_next];
        self.y = [self.y[1], self.y[2], y_next];
    }
}

impl From<InitialConditions> for Window {
    fn from(init: InitialConditions) -> Self {
        Window {
            x: init.x,
            y: init.y,
        }
    }
}

/// The unique positive equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub x_bar: f64,
    pub y_bar: f64,
}

pub fn equilibrium(params: &Params) -> Equilibrium {
    let e = params.alpha + 1.0;
    Equilibrium { x_bar: e, y_bar: e }
}

/// `alpha + ratio^exponent`, rejecting ratios and powers that leave the
/// positive finite range.
fn update(alpha: f64, newest: f64, oldest: f64, exponent: f64, cap: f64) -> Result<f64> {
    let ratio = newest / oldest;
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(Error::Numeric(format!(
            "ratio {newest} / {oldest} is not positive and finite"
        )));
    }
    let power = ratio.powf(exponent);
    if power == 0.0 || power.is_nan() {
        return Err(Error::Numeric(format!(
            "({ratio})^{exponent} is not representable"
        )));
    }
    let next = alpha + power;
    if !next.is_finite() || next > cap {
        return Err(Error::Overflow { value: next, cap });
    }
    Ok(next)
}

/// One application of the recurrence to `window`.
pub fn step(params: &Params, window: &Window, cap: f64) -> Result<(f64, f64)> {
    let x_next = update(params.alpha, window.y[2], window.y[0], params.p, cap)?;
    let y_next = update(params.alpha, window.x[2], window.x[0], params.q, cap)?;
    Ok((x_next, y_next))
}

/// How an orbit ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "index")]
pub enum Termination {
    Completed,
    /// The value at this index would have exceeded the cap.
    Overflow(i64),
    /// The value at this index could not be represented.
    NotFinite(i64),
}

/// A solution `{(x[n], y[n])}` stored from `n = -2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    params: Params,
    points: Vec<(f64, f64)>,
    termination: Termination,
}

impl Orbit {
    /// Wraps an externally produced series (for example a synthetic test
    /// orbit or a file read back from disk). The first point is taken to be
    /// index -2. No recurrence invariant is checked.
    pub fn from_points(params: Params, points: Vec<(f64, f64)>) -> Self {
        Orbit {
            params,
            points,
            termination: Termination::Completed,
        }
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the last stored point.
    pub fn last_index(&self) -> i64 {
        FIRST_INDEX + self.points.len() as i64 - 1
    }

    /// The point at orbit index `n` (`n >= -2`).
    pub fn get(&self, n: i64) -> Option<(f64, f64)> {
        let offset = n.checked_sub(FIRST_INDEX)?;
        usize::try_from(offset)
            .ok()
            .and_then(|i| self.points.get(i).copied())
    }

    pub fn last(&self) -> Option<(f64, f64)> {
        self.points.last().copied()
    }

    /// `(n, x[n], y[n])` triples in index order.
    pub fn indexed(&self) -> impl Iterator<Item = (i64, f64, f64)> + '_ {
        self.points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| (FIRST_INDEX + i as i64, x, y))
    }

    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    /// Deviations from the equilibrium computed as `x[n] - x_bar`.
    pub fn deviations(&self, eq: &Equilibrium) -> Deviations {
        Deviations {
            dx: self.points.iter().map(|p| p.0 - eq.x_bar).collect(),
            dy: self.points.iter().map(|p| p.1 - eq.y_bar).collect(),
        }
    }

    /// Largest distance of the final point from the equilibrium, or `None`
    /// for an empty orbit.
    pub fn final_distance(&self, eq: &Equilibrium) -> Option<f64> {
        self.last()
            .map(|(x, y)| (x - eq.x_bar).abs().max((y - eq.y_bar).abs()))
    }
}

/// Iterates the recurrence `n_steps` times from `init`.
///
/// The orbit stops early, with a termination record, at the first value that
/// exceeds `cap` or cannot be represented.
pub fn simulate(params: &Params, init: &InitialConditions, n_steps: usize, cap: f64) -> Orbit {
    let mut points = Vec::with_capacity(n_steps + 3);
    points.extend(init.x.iter().copied().zip(init.y.iter().copied()));
    let mut window = Window::from(*init);
    let mut termination = Termination::Completed;
    for n in 1..=n_steps as i64 {
        match step(params, &window, cap) {
            Ok((x, y)) => {
                points.push((x, y));
                window.shift(x, y);
            }
            Err(Error::Overflow { .. }) => {
                termination = Termination::Overflow(n);
                break;
            }
            Err(_) => {
                termination = Termination::NotFinite(n);
                break;
            }
        }
    }
    Orbit {
        params: *params,
        points,
        termination,
    }
}

/// Deviations `(x[n] - x_bar, y[n] - y_bar)` indexed from `n = -2`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Deviations {
    pub dx: Vec<f64>,
    pub dy: Vec<f64>,
}

impl Deviations {
    pub fn len(&self) -> usize {
        self.dx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dx.is_empty()
    }
}

/// Iterates the recurrence directly in deviation coordinates.
///
/// With `e = x - x_bar` and `f = y - y_bar` the system is exactly
///
/// ```text
/// e[n+1] = expm1(p * ln1p((f[n] - f[n-2]) / (y_bar + f[n-2])))
/// f[n+1] = expm1(q * ln1p((e[n] - e[n-2]) / (x_bar + e[n-2])))
/// ```
///
/// which keeps full relative precision as the orbit approaches the
/// equilibrium, where `x[n] - x_bar` computed from stored values is
/// dominated by cancellation below about `1e-13`. Signs of the deviations
/// are therefore reliable down to the underflow range.
pub fn simulate_deviations(
    params: &Params,
    init: &InitialConditions,
    n_steps: usize,
) -> Deviations {
    let eq = equilibrium(params);
    let mut dx: Vec<f64> = Vec::with_capacity(n_steps + 3);
    let mut dy: Vec<f64> = Vec::with_capacity(n_steps + 3);
    dx.extend(init.x.iter().map(|v| v - eq.x_bar));
    dy.extend(init.y.iter().map(|v| v - eq.y_bar));
    for _ in 0..n_steps {
        let k = dx.len() - 1;
        let e_next = deviation_update(dy[k], dy[k - 2], eq.y_bar, params.p);
        let f_next = deviation_update(dx[k], dx[k - 2], eq.x_bar, params.q);
        if !(e_next.is_finite() && f_next.is_finite()) {
            break;
        }
        dx.push(e_next);
        dy.push(f_next);
    }
    Deviations { dx, dy }
}

fn deviation_update(newest: f64, oldest: f64, bar: f64, exponent: f64) -> f64 {
    let rel = (newest - oldest) / (bar + oldest);
    (exponent * rel.ln_1p()).exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example1() -> (Params, InitialConditions) {
        (
            Params::new(2.0, 0.6, 0.9).unwrap(),
            InitialConditions::new([2.5, 6.0, 2.0], [4.0, 2.0, 5.0]).unwrap(),
        )
    }

    #[test]
    fn rejects_non_positive_parameters() {
        assert!(Params::new(0.0, 1.0, 1.0).is_err());
        assert!(Params::new(1.0, -1.0, 1.0).is_err());
        assert!(Params::new(1.0, 1.0, f64::NAN).is_err());
        assert!(InitialConditions::new([1.0, 0.0, 1.0], [1.0; 3]).is_err());
    }

    #[test]
    fn equilibrium_values() {
        let e = equilibrium(&Params::new(2.0, 0.6, 0.9).unwrap());
        assert_eq!((e.x_bar, e.y_bar), (3.0, 3.0));
        let e = equilibrium(&Params::new(0.6, 0.8, 1.9).unwrap());
        assert_eq!((e.x_bar, e.y_bar), (1.6, 1.6));
        let e = equilibrium(&Params::new(1.0, 1.0, 1.0).unwrap());
        assert_eq!((e.x_bar, e.y_bar), (2.0, 2.0));
    }

    #[test]
    fn first_step_of_example1() {
        // 40-digit reference: 2 + (5/4)^0.6 and 2 + (2/2.5)^0.9.
        let (params, init) = example1();
        let (x1, y1) = step(&params, &Window::from(init), DEFAULT_CAP).unwrap();
        assert!((x1 - 3.143_262_629_818_316).abs() < 1e-12);
        assert!((y1 - 2.818_052_146_050_858).abs() < 1e-12);
    }

    #[test]
    fn step_at_equilibrium_and_symmetry() {
        let params = Params::new(2.0, 0.7, 0.7).unwrap();
        let w = Window::new([3.0; 3], [3.0; 3]).unwrap();
        assert_eq!(step(&params, &w, DEFAULT_CAP).unwrap(), (3.0, 3.0));
        let w = Window::new([1.5, 4.0, 2.2], [1.5, 4.0, 2.2]).unwrap();
        let (x, y) = step(&params, &w, DEFAULT_CAP).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn step_reports_overflow() {
        let params = Params::new(1.0, 2.0, 2.0).unwrap();
        let w = Window::new([1e-3, 1.0, 1e4], [1e-3, 1.0, 1e4]).unwrap();
        assert!(matches!(
            step(&params, &w, 1e12),
            Err(Error::Overflow { .. })
        ));
    }

    #[test]
    fn simulate_truncates_on_overflow() {
        let params = Params::new(0.3, 1.2, 1.5).unwrap();
        let init = InitialConditions::new([6.0, 8.0, 3.0], [3.0, 5.0, 1.0]).unwrap();
        let orbit = simulate(&params, &init, 1000, 50.0);
        match orbit.termination() {
            Termination::Overflow(k) => assert_eq!(orbit.last_index(), k - 1),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn orbit_indexing() {
        let (params, init) = example1();
        let orbit = simulate(&params, &init, 5, DEFAULT_CAP);
        assert_eq!(orbit.len(), 8);
        assert_eq!(orbit.last_index(), 5);
        assert_eq!(orbit.get(-2), Some((2.5, 4.0)));
        assert_eq!(orbit.get(0), Some((2.0, 5.0)));
        assert_eq!(orbit.get(-3), None);
        assert_eq!(orbit.get(6), None);
    }

    #[test]
    fn deviation_form_tracks_the_direct_orbit() {
        let (params, init) = example1();
        let eq = equilibrium(&params);
        let orbit = simulate(&params, &init, 40, DEFAULT_CAP);
        let dev = simulate_deviations(&params, &init, 40);
        for (i, &(x, y)) in orbit.points().iter().enumerate() {
            assert!((dev.dx[i] - (x - eq.x_bar)).abs() < 1e-13);
            assert!((dev.dy[i] - (y - eq.y_bar)).abs() < 1e-13);
        }
    }
}
