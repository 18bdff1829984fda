//! Acceptance suite. Runs every criterion, prints one line each, and fails
//! the process if any of them fails.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rde3::analysis::{check_semicycle_rule, find_period2, semicycles_of, Period2Grid, Sign};
use rde3::bounds::{audit_bounds, envelope_coeffs};
use rde3::convergence::{perron_rate, RateSettings};
use rde3::dynamics::{
    simulate, simulate_deviations, InitialConditions, Orbit, Params, Termination, DEFAULT_CAP,
};
use rde3::scenario::Scenario;
use rde3::stability::{self, Classification};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn converged_within(sc: &Scenario, steps: usize, tol: f64) -> (bool, f64) {
    let orbit = simulate(&sc.params, &sc.init, steps, DEFAULT_CAP);
    let eq = sc.params.equilibrium();
    let dist = match orbit.termination() {
        Termination::Completed => orbit.final_distance(&eq).unwrap_or(f64::INFINITY),
        _ => f64::INFINITY,
    };
    (orbit.last_index() == steps as i64 && dist < tol, dist)
}

fn random_init(rng: &mut ChaCha8Rng) -> InitialConditions {
    let mut draw = || rng.random_range(0.1..10.0);
    InitialConditions::new([draw(), draw(), draw()], [draw(), draw(), draw()]).unwrap()
}

/// `x[n] > alpha` for `n >= 1`, except where the increment `(y[n-1]/y[n-3])^p`
/// is below half an ulp of `alpha` and the sum rounds to `alpha` itself.
fn first_persistence_failure(orbit: &Orbit, params: &Params) -> Option<i64> {
    let pts = orbit.points();
    let alpha = params.alpha();
    let absorbed = |inc: f64| inc <= alpha * f64::EPSILON;
    (3..pts.len()).find_map(|k| {
        let (x, y) = pts[k];
        let dx = (pts[k - 1].1 / pts[k - 3].1).powf(params.p());
        let dy = (pts[k - 1].0 / pts[k - 3].0).powf(params.q());
        let ok_x = x > alpha || (x == alpha && absorbed(dx));
        let ok_y = y > alpha || (y == alpha && absorbed(dy));
        (!(ok_x && ok_y)).then_some(k as i64 - 2)
    })
}

fn criterion_1() -> Outcome {
    let sc = Scenario::preset("example1").map_err(|e| e.to_string())?;
    let start = Instant::now();
    let orbit = simulate(&sc.params, &sc.init, 200, DEFAULT_CAP);
    let elapsed = start.elapsed();
    let (x, y) = orbit.get(200).ok_or("orbit stopped before n = 200")?;
    let dist = (x - 3.0).abs().max((y - 3.0).abs());
    let detail = format!("distance {dist:e} at n = 200, {elapsed:?}");
    if dist < 1e-6 && elapsed < Duration::from_millis(100) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_2() -> Outcome {
    let sc = Scenario::preset("example2").map_err(|e| e.to_string())?;
    let orbit = simulate(&sc.params, &sc.init, 400, DEFAULT_CAP);
    let (x, y) = orbit.get(400).ok_or("orbit stopped before n = 400")?;
    let dist = (x - 2.3).abs().max((y - 2.3).abs());
    let detail = format!("distance {dist:e} from (2.3, 2.3) at n = 400");
    if dist < 1e-6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_3() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for name in ["example3", "example4"] {
        let sc = Scenario::preset(name).map_err(|e| e.to_string())?;
        let report = stability::classify(&sc.params).map_err(|e| e.to_string())?;
        let (converged, dist) = converged_within(&sc, 1000, 1e-6);
        ok &= !report.hypotheses_hold && !converged;
        notes.push(format!(
            "{name}: hypotheses {}, {}, distance {dist:.3e} at n = 1000",
            if report.hypotheses_hold {
                "hold"
            } else {
                "violated"
            },
            report.classification
        ));
    }
    if ok {
        Ok(notes.join("; "))
    } else {
        Err(notes.join("; "))
    }
}

fn criterion_4() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for name in ["example1", "example2"] {
        let sc = Scenario::preset(name).map_err(|e| e.to_string())?;
        let orbit = simulate(&sc.params, &sc.init, 500, DEFAULT_CAP);
        let audit = audit_bounds(&orbit, &sc.params, 1e-9).map_err(|e| e.to_string())?;
        ok &= audit.is_clean() && audit.checked == 2 * 500;
        notes.push(format!(
            "{name}: {} terms, {} violations",
            audit.checked,
            audit.violations.len()
        ));
    }
    if ok {
        Ok(notes.join("; "))
    } else {
        Err(notes.join("; "))
    }
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let (mut orbits, mut checked, mut bad) = (0, 0, Vec::new());
    for (a, p, q) in [(2.0, 0.6, 0.9), (1.3, 0.9, 0.8), (2.0, 1.0, 1.0)] {
        let params = Params::new(a, p, q).unwrap();
        for _ in 0..1000 {
            let init = random_init(&mut rng);
            let dev = simulate_deviations(&params, &init, 300);
            let rule = check_semicycle_rule(&semicycles_of(&dev).joint);
            orbits += 1;
            checked += rule.checked;
            if !rule.holds {
                bad.push(format!(
                    "({a}, {p}, {q}) at n = {}",
                    rule.violation_start.unwrap_or_default()
                ));
            }
        }
    }
    let elapsed = start.elapsed();
    let detail = format!(
        "{orbits} orbits, {checked} armed semi-cycles checked, {} violations, {elapsed:?}",
        bad.len()
    );
    if bad.is_empty() && elapsed < Duration::from_secs(10) {
        Ok(detail)
    } else {
        Err(format!(
            "{detail}; first: {}",
            bad.first().map_or("-", String::as_str)
        ))
    }
}

fn criterion_6() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for name in ["example1", "example2"] {
        let params = Scenario::preset(name).map_err(|e| e.to_string())?.params;
        let grid = Period2Grid::default_for(&params);
        let r = find_period2(&params, &grid, 1e-6);
        ok &= !r.found_nontrivial && r.converged > 0;
        notes.push(format!(
            "{name}: {} starts converged, {} failed, farthest {:.1e} from equilibrium",
            r.converged, r.failed, r.max_distance
        ));
    }
    if ok {
        Ok(notes.join("; "))
    } else {
        Err(notes.join("; "))
    }
}

/// Relative residual of `lambda^6 (alpha+1)^2 = p q (lambda^2 - 1)^2`.
fn reduced_residual(params: &Params, z: Complex64) -> f64 {
    let e2 = (params.alpha() + 1.0).powi(2);
    let pq = params.p() * params.q();
    let lhs = z.powi(6) * e2;
    let rhs = (z * z - 1.0).powi(2) * pq;
    let scale = lhs.norm() + rhs.norm();
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).norm() / scale
    }
}

fn criterion_7() -> Outcome {
    let (mut nodes, mut certified, mut worst_radius, mut worst_res) = (0, 0, 0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for i in 1..=10 {
        let alpha = 1.05 + 3.95 * i as f64 / 10.0;
        for j in 1..=10 {
            let p = 0.05 + 0.95 * j as f64 / 10.0;
            for k in 1..=10 {
                let q = 0.05 + 0.95 * k as f64 / 10.0;
                let params = Params::new(alpha, p, q).unwrap();
                let report = stability::classify(&params).map_err(|e| e.to_string())?;
                nodes += 1;
                let res = report
                    .eigenvalues()
                    .iter()
                    .map(|z| reduced_residual(&params, *z))
                    .fold(report.char_residual(), f64::max);
                worst_res = worst_res.max(res);
                worst_radius = worst_radius.max(report.spectral_radius);
                let mut ok = report.spectral_radius < 1.0 && res < 1e-8;
                if let Ok(cert) = &report.certificate {
                    certified += 1;
                    ok &= report.spectral_radius <= cert.norm_value && cert.norm_value < 1.0;
                }
                if !ok {
                    failures.push(format!("({alpha}, {p}, {q})"));
                }
            }
        }
    }
    let detail = format!(
        "{nodes} nodes, max radius {worst_radius:.6}, max residual {worst_res:.1e}, {certified} certificates"
    );
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; failing nodes: {}", failures.join(" ")))
    }
}

fn criterion_8() -> Outcome {
    let settings = RateSettings::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let (mut runs, mut worst_gap, mut worst_diff) = (0, 0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for name in ["example1", "example2"] {
        let sc = Scenario::preset(name).map_err(|e| e.to_string())?;
        let mut inits = vec![sc.init];
        inits.extend((0..20).map(|_| random_init(&mut rng)));
        for init in inits {
            runs += 1;
            match perron_rate(&sc.params, &init, &settings) {
                Ok(rate) => {
                    let gap = rate.matched.map_or(f64::INFINITY, |m| m.gap);
                    let diff = (rate.ratio_estimate - rate.root_estimate).abs();
                    worst_gap = worst_gap.max(gap);
                    worst_diff = worst_diff.max(diff);
                    if !(gap < 1e-3 && diff < 1e-2) {
                        failures.push(format!("{name}: gap {gap:.1e}, |ratio - root| {diff:.1e}"));
                    }
                }
                Err(e) => failures.push(format!("{name}: {e}")),
            }
        }
    }
    let detail =
        format!("{runs} orbits, max gap {worst_gap:.1e}, max |ratio - root| {worst_diff:.1e}");
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", failures.join("; ")))
    }
}

/// `det(m)` by Gaussian elimination with partial pivoting.
fn determinant(mut m: [[Complex64; 6]; 6]) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..6 {
        let pivot = (col..6)
            .max_by(|&a, &b| m[a][col].norm().total_cmp(&m[b][col].norm()))
            .unwrap();
        if m[pivot][col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        let pivot_row = m[col];
        for row in m.iter_mut().skip(col + 1) {
            let factor = row[col] / pivot_row[col];
            for (v, p) in row.iter_mut().zip(pivot_row.iter()).skip(col) {
                *v -= factor * p;
            }
        }
    }
    det
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
    let (mut evaluations, mut worst) = (0, 0.0f64);
    for _ in 0..5 {
        let params = Params::new(
            rng.random_range(0.1..5.0),
            rng.random_range(0.05..2.0),
            rng.random_range(0.05..2.0),
        )
        .unwrap();
        let a = stability::jacobian(&params);
        let e2 = (params.alpha() + 1.0).powi(2);
        let pq = params.p() * params.q();
        for _ in 0..20 {
            let lambda = Complex64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
            let mut m = [[Complex64::new(0.0, 0.0); 6]; 6];
            for (i, row) in a.entries().iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    m[i][j] = Complex64::new(*v, 0.0);
                }
                m[i][i] -= lambda;
            }
            let direct = determinant(m);
            // det(A - lambda I) for even dimension equals det(lambda I - A)
            let l6 = lambda.powi(6);
            let coupling = (lambda * lambda - 1.0).powi(2) * (pq / e2);
            let reduced = l6 - coupling;
            let scale = direct.norm().max(l6.norm() + coupling.norm());
            worst = worst.max((direct - reduced).norm() / scale);
            evaluations += 1;
        }
    }
    let detail = format!("{evaluations} evaluations, max relative residual {worst:.1e}");
    if worst < 1e-10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0010);
    let mut failures: Vec<String> = Vec::new();
    let mut fail = |what: &str| {
        if failures.len() < 5 {
            failures.push(what.to_string());
        }
    };
    for _ in 0..200 {
        let params = Params::new(
            rng.random_range(0.2..4.0),
            rng.random_range(0.1..1.5),
            rng.random_range(0.1..1.5),
        )
        .unwrap();
        let init = random_init(&mut rng);
        let orbit = simulate(&params, &init, 200, DEFAULT_CAP);

        // persistence
        if first_persistence_failure(&orbit, &params).is_some() {
            fail("persistence");
        }

        // swap symmetry
        let swapped = simulate(&params.swapped(), &init.swapped(), 200, DEFAULT_CAP);
        let mirrored = orbit
            .points()
            .iter()
            .zip(swapped.points())
            .all(|((x, y), (sx, sy))| x == sy && y == sx);
        if !mirrored || orbit.len() != swapped.len() {
            fail("swap symmetry");
        }

        // fixed point
        let eq = params.equilibrium();
        let fixed = simulate(
            &params,
            &InitialConditions::at_equilibrium(&params),
            100,
            DEFAULT_CAP,
        );
        if fixed
            .points()
            .iter()
            .any(|&(x, y)| x != eq.x_bar || y != eq.y_bar)
        {
            fail("fixed point");
        }

        // semi-cycle partition and alternation
        let dev = simulate_deviations(&params, &init, 200);
        let cycles = semicycles_of(&dev);
        for (list, values) in [(&cycles.x, &dev.dx), (&cycles.y, &dev.dy)] {
            let total: usize = list.iter().map(|c| c.length).sum();
            let alternates = list
                .windows(2)
                .all(|w| w[0].sign != w[1].sign && w[0].end() + 1 == w[1].start);
            let signs_match = list.iter().all(|c| {
                let from = (c.start + 2) as usize;
                values[from..from + c.length]
                    .iter()
                    .all(|v| Sign::of(*v) == c.sign)
            });
            let last_open =
                list.iter().rev().skip(1).all(|c| !c.open) && list.last().is_none_or(|c| c.open);
            if total != values.len() || !alternates || !signs_match || !last_open {
                fail("semi-cycle partition");
            }
        }

        // envelope recurrence against the closed form
        if params.alpha() > 1.0 {
            let c = envelope_coeffs(&params).unwrap();
            for (component, seed) in [
                (rde3::analysis::Component::X, 4.0),
                (rde3::analysis::Component::Y, 7.5),
            ] {
                let limit = c.limit(component);
                let mut m = seed;
                let mut prev_gap = (seed - limit).abs();
                for n in 0..=100u32 {
                    let closed = c.envelope_at(component, seed, n);
                    if (m - closed).abs() > 1e-12 * closed.abs().max(1.0) {
                        fail("envelope recurrence");
                        break;
                    }
                    let gap = (closed - limit).abs();
                    if gap > prev_gap + 1e-12 * limit {
                        fail("envelope monotone limit");
                        break;
                    }
                    prev_gap = gap;
                    m = c.a * m + c.offset(component);
                }
            }
        }

        // classification agrees with the hypotheses
        let report = stability::classify(&params).unwrap();
        if report.hypotheses_hold
            != (report.classification == Classification::GloballyAsymptoticallyStable)
        {
            fail("classification");
        }
    }
    if failures.is_empty() {
        Ok("200 random scenarios: persistence, fixed point, swap symmetry, semi-cycle partition, envelope".into())
    } else {
        Err(failures.join(", "))
    }
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("example1 converges to (3, 3) by n = 200", criterion_1),
        ("example2 converges to (2.3, 2.3) by n = 400", criterion_2),
        (
            "example3/example4 fail the global hypotheses and do not converge",
            criterion_3,
        ),
        ("envelope audit is clean for example1/example2", criterion_4),
        ("semi-cycle length rule on random orbits", criterion_5),
        ("no nontrivial period-two solution", criterion_6),
        ("spectral radius grid", criterion_7),
        ("Perron rate matches an eigenvalue modulus", criterion_8),
        (
            "reduced characteristic equation against determinants",
            criterion_9,
        ),
        ("invariant suite", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.2}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
