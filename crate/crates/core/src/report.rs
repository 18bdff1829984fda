//! Text and CSV renderings used by the command line tool.
//!
//! Numbers are written with Rust's shortest round-trip `f64` formatting, so
//! CSV bodies are byte-for-byte reproducible and reload losslessly.

use std::fmt::Write;

use crate::analysis::{OscillationReport, SemiCycles};
use crate::bounds::BoundsAudit;
use crate::convergence::RateEstimate;
use crate::dynamics::{Equilibrium, Orbit, Termination};
use crate::error::{Error, Result};
use crate::scenario::SweepRow;
use crate::stability::StabilityReport;

pub fn orbit_csv(orbit: &Orbit) -> String {
    let mut out = String::from("n,x,y\n");
    for (n, x, y) in orbit.indexed() {
        writeln!(out, "{n},{x},{y}").unwrap();
    }
    out
}

/// Reads back a CSV written by [`orbit_csv`] as raw points.
pub fn parse_orbit_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "n,x,y" => {}
        _ => {
            return Err(Error::Parse {
                field: None,
                line: Some(1),
                message: "expected header `n,x,y`".into(),
            })
        }
    }
    let mut points = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        let parse = |s: &str, field: &str| {
            s.trim().parse::<f64>().map_err(|e| Error::Parse {
                field: Some(field.to_string()),
                line: Some(i + 1),
                message: e.to_string(),
            })
        };
        if cols.len() != 3 {
            return Err(Error::Parse {
                field: None,
                line: Some(i + 1),
                message: format!("expected 3 columns, found {}", cols.len()),
            });
        }
        points.push((parse(cols[1], "x")?, parse(cols[2], "y")?));
    }
    Ok(points)
}

/// Reads one error norm per line; a leading `norm` or `n,norm` header is
/// skipped, and with two columns the second one is used.
pub fn parse_norms(text: &str) -> Result<Vec<f64>> {
    let mut norms = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty()
            || (i == 0
                && line
                    .chars()
                    .any(|c| c.is_ascii_alphabetic() && c != 'e' && c != 'E'))
        {
            continue;
        }
        let value = line.rsplit(',').next().unwrap_or(line).trim();
        norms.push(value.parse::<f64>().map_err(|e| Error::Parse {
            field: Some("norm".into()),
            line: Some(i + 1),
            message: e.to_string(),
        })?);
    }
    Ok(norms)
}

pub fn termination_text(t: Termination) -> String {
    match t {
        Termination::Completed => "completed".into(),
        Termination::Overflow(k) => format!("overflow at index {k}"),
        Termination::NotFinite(k) => format!("non-finite value at index {k}"),
    }
}

pub fn orbit_summary(orbit: &Orbit, eq: &Equilibrium, tol: f64) -> String {
    let mut out = String::new();
    let p = orbit.params();
    writeln!(out, "alpha = {}, p = {}, q = {}", p.alpha(), p.p(), p.q()).unwrap();
    writeln!(out, "equilibrium: ({}, {})", eq.x_bar, eq.y_bar).unwrap();
    writeln!(
        out,
        "termination: {}",
        termination_text(orbit.termination())
    )
    .unwrap();
    if let Some((x, y)) = orbit.last() {
        writeln!(
            out,
            "final point: n = {}, x = {x}, y = {y}",
            orbit.last_index()
        )
        .unwrap();
    }
    let dist = orbit.final_distance(eq).unwrap_or(f64::INFINITY);
    let converged = orbit.termination() == Termination::Completed && dist < tol;
    writeln!(out, "distance from equilibrium: {dist:e}").unwrap();
    writeln!(
        out,
        "converged (tol {tol:e}): {}",
        if converged { "yes" } else { "no" }
    )
    .unwrap();
    out
}

pub fn semicycles_csv(sc: &SemiCycles) -> String {
    let mut out = String::from("component,sign,start,length\n");
    let joint = sc.joint.iter().map(|j| j.as_semicycle());
    for c in
        sc.x.iter()
            .copied()
            .chain(sc.y.iter().copied())
            .chain(joint)
    {
        let length = if c.open {
            "open".to_string()
        } else {
            c.length.to_string()
        };
        writeln!(
            out,
            "{},{},{},{length}",
            c.component.as_str(),
            c.sign.as_str(),
            c.start
        )
        .unwrap();
    }
    out
}

pub fn analysis_text(
    sc: &SemiCycles,
    osc: &OscillationReport,
    rule_holds: bool,
    violation: Option<i64>,
) -> String {
    let mut out = String::new();
    for (name, list) in [("x", &sc.x), ("y", &sc.y)] {
        let lengths: Vec<String> = list
            .iter()
            .map(|c| {
                let sign = if c.sign == crate::analysis::Sign::Positive {
                    '+'
                } else {
                    '-'
                };
                if c.open {
                    format!("{sign}{}…", c.length)
                } else {
                    format!("{sign}{}", c.length)
                }
            })
            .collect();
        writeln!(
            out,
            "{name} semi-cycles ({}): {}",
            list.len(),
            lengths.join(" ")
        )
        .unwrap();
    }
    writeln!(
        out,
        "joint semi-cycles: {} ({} misaligned)",
        sc.joint.len(),
        sc.misaligned()
    )
    .unwrap();
    match violation {
        None if rule_holds => writeln!(out, "length rule: holds").unwrap(),
        _ => writeln!(
            out,
            "length rule: violated at index {}",
            violation.unwrap_or_default()
        )
        .unwrap(),
    }
    writeln!(out, "x: {}", osc.x_status.as_str()).unwrap();
    writeln!(out, "y: {}", osc.y_status.as_str()).unwrap();
    writeln!(out, "joint: {}", osc.joint_status.as_str()).unwrap();
    if let Some(k) = osc.settled_from {
        writeln!(out, "within 1e-12 of the equilibrium from index {k}").unwrap();
    }
    out
}

pub fn bounds_csv(audit: &BoundsAudit) -> String {
    let mut out = String::from("component,n,value,lower,upper,ok\n");
    for r in &audit.rows {
        let upper = r.upper.map(|u| u.to_string()).unwrap_or_default();
        let ok = !audit
            .violations
            .iter()
            .any(|v| v.component == r.component && v.index == r.index);
        writeln!(
            out,
            "{},{},{},{},{upper},{ok}",
            r.component.as_str(),
            r.index,
            r.value,
            r.lower
        )
        .unwrap();
    }
    out
}

pub fn bounds_text(audit: &BoundsAudit) -> String {
    let mut out = String::new();
    let c = audit.coeffs;
    writeln!(out, "a = {}, b = {}, c = {}", c.a, c.b, c.c).unwrap();
    writeln!(out, "terms checked: {}", audit.checked).unwrap();
    writeln!(
        out,
        "largest excess over envelope: {:e}",
        audit.max_slack_used
    )
    .unwrap();
    if audit.violations.is_empty() {
        writeln!(out, "violations: none").unwrap();
    } else {
        writeln!(out, "violations: {}", audit.violations.len()).unwrap();
        for v in &audit.violations {
            writeln!(
                out,
                "  {} n = {}: value {} ({:?}{})",
                v.component.as_str(),
                v.index,
                v.value,
                v.kind,
                if v.at_seed { ", seed index" } else { "" }
            )
            .unwrap();
        }
    }
    out
}

pub const STABILITY_HEADER: &str = "alpha,p,q,spectral_radius,classification";

pub fn stability_csv(report: &StabilityReport) -> String {
    let p = report.params;
    format!(
        "{STABILITY_HEADER}\n{},{},{},{},{}\n",
        p.alpha(),
        p.p(),
        p.q(),
        report.spectral_radius,
        report.classification
    )
}

pub fn stability_text(report: &StabilityReport) -> String {
    let mut out = String::new();
    let p = report.params;
    writeln!(out, "alpha = {}, p = {}, q = {}", p.alpha(), p.p(), p.q()).unwrap();
    writeln!(out, "eigenvalues:").unwrap();
    for z in report.eigenvalues() {
        writeln!(
            out,
            "  {:+.12} {:+.12}i   |z| = {:.12}",
            z.re,
            z.im,
            z.norm()
        )
        .unwrap();
    }
    writeln!(out, "spectral radius: {}", report.spectral_radius).unwrap();
    writeln!(
        out,
        "characteristic polynomial residual: {:e}",
        report.char_residual()
    )
    .unwrap();
    match &report.certificate {
        Ok(c) => writeln!(
            out,
            "certificate: epsilon = {}, ||D A D^-1||_inf = {}",
            c.epsilon, c.norm_value
        )
        .unwrap(),
        Err(r) => writeln!(out, "certificate: refused ({r})").unwrap(),
    }
    if report.hypotheses_hold {
        writeln!(
            out,
            "global hypotheses (alpha > 1, 0 < p, q <= 1): satisfied"
        )
        .unwrap();
    } else {
        writeln!(
            out,
            "global hypotheses (alpha > 1, 0 < p, q <= 1): violated; classification from the spectral radius only"
        )
        .unwrap();
    }
    writeln!(out, "classification: {}", report.classification).unwrap();
    out
}

pub fn rate_csv(rate: &RateEstimate) -> String {
    let (modulus, gap) = rate
        .matched
        .map(|m| (m.modulus.to_string(), m.gap.to_string()))
        .unwrap_or_default();
    format!(
        "ratio_estimate,root_estimate,matched_modulus,gap\n{},{},{modulus},{gap}\n",
        rate.ratio_estimate, rate.root_estimate
    )
}

pub fn rate_text(rate: &RateEstimate) -> String {
    let mut out = String::new();
    writeln!(out, "ratio estimate: {}", rate.ratio_estimate).unwrap();
    writeln!(out, "root estimate: {}", rate.root_estimate).unwrap();
    writeln!(
        out,
        "ratios used: n = {}..{}",
        rate.usable_range.0, rate.usable_range.1
    )
    .unwrap();
    if let Some(m) = rate.matched {
        writeln!(out, "matched eigenvalue modulus: {}", m.modulus).unwrap();
        writeln!(out, "gap: {:e}", m.gap).unwrap();
    }
    out
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let with_sim = rows.iter().any(|r| r.final_distance.is_some());
    let mut out = String::from(STABILITY_HEADER);
    if with_sim {
        out.push_str(",final_distance");
    }
    out.push('\n');
    for r in rows {
        let (radius, class) = match &r.outcome {
            Ok((radius, class)) => (radius.to_string(), class.to_string()),
            Err(e) => (String::new(), format!("error: {}", e.replace(',', ";"))),
        };
        write!(out, "{},{},{},{radius},{class}", r.alpha, r.p, r.q).unwrap();
        if with_sim {
            write!(
                out,
                ",{}",
                r.final_distance.map(|d| d.to_string()).unwrap_or_default()
            )
            .unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn sweep_text(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:>10} {:>10} {:>10} {:>16}  classification",
        "alpha", "p", "q", "radius"
    )
    .unwrap();
    for r in rows {
        match &r.outcome {
            Ok((radius, class)) => writeln!(
                out,
                "{:>10.6} {:>10.6} {:>10.6} {:>16.12}  {class}",
                r.alpha, r.p, r.q, radius
            )
            .unwrap(),
            Err(e) => writeln!(
                out,
                "{:>10.6} {:>10.6} {:>10.6} {:>16}  error: {e}",
                r.alpha, r.p, r.q, "-"
            )
            .unwrap(),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate, InitialConditions, Params, DEFAULT_CAP};

    #[test]
    fn orbit_csv_reloads_losslessly() {
        let params = Params::new(2.0, 0.6, 0.9).unwrap();
        let init = InitialConditions::new([2.5, 6.0, 2.0], [4.0, 2.0, 5.0]).unwrap();
        let orbit = simulate(&params, &init, 50, DEFAULT_CAP);
        let csv = orbit_csv(&orbit);
        assert!(csv.starts_with("n,x,y\n-2,2.5,4\n"));
        assert_eq!(parse_orbit_csv(&csv).unwrap(), orbit.points());
    }

    #[test]
    fn norms_file_formats() {
        assert_eq!(parse_norms("norm\n1\n0.5\n").unwrap(), vec![1.0, 0.5]);
        assert_eq!(
            parse_norms("n,norm\n0,1\n1,5e-1\n").unwrap(),
            vec![1.0, 0.5]
        );
        assert_eq!(parse_norms("1e0\n2.5E-1\n").unwrap(), vec![1.0, 0.25]);
        assert!(parse_norms("1\nabc\n").is_err());
    }
}
