//! Text and JSON renderers. The JSON mirrors the text structures
//! field-for-field; numbers are printed with nine decimal digits in both.

use seqdec::problem::{SdpProblem, ValidationReport};
use seqdec::solver::Solution;
use seqdec::trajectory::{trajectory_value, StateCtrlSeq};
use seqdec::uncertainty::{Container, UncertaintyKind};
use std::fmt::Write as _;

pub fn num(v: f64) -> String {
    format!("{v:.9}")
}

pub fn json_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn solution_json(problem: &str, t0: usize, steps: usize, measure: &str, sol: &Solution) -> String {
    let mut blocks = Vec::new();
    for (i, pol) in sol.policies.policies().iter().enumerate() {
        let table = sol.tables.get(i);
        let entries: Vec<String> = pol
            .table
            .iter()
            .map(|(x, y)| {
                let value = table
                    .and_then(|t| t.values.get(x))
                    .map(|v| format!(",\"value\":{}", num(*v)))
                    .unwrap_or_default();
                format!(
                    "{{\"x\":{},\"ctrl\":{}{}}}",
                    json_str(x.key()),
                    json_str(y.key()),
                    value
                )
            })
            .collect();
        blocks.push(format!(
            "{{\"t\":{},\"n\":{},\"entries\":[{}]}}",
            pol.t,
            pol.steps_remaining,
            entries.join(",")
        ));
    }
    if sol.policies.is_empty() {
        if let Some(tab) = sol.tables.first() {
            let entries: Vec<String> = tab
                .values
                .iter()
                .map(|(x, v)| format!("{{\"x\":{},\"value\":{}}}", json_str(x.key()), num(*v)))
                .collect();
            blocks.push(format!(
                "{{\"t\":{},\"n\":{},\"entries\":[{}]}}",
                tab.t,
                tab.n,
                entries.join(",")
            ));
        }
    }
    format!(
        "{{\"problem\":{},\"t0\":{},\"steps\":{},\"measure\":{},\"blocks\":[{}]}}",
        json_str(problem),
        t0,
        steps,
        json_str(measure),
        blocks.join(",")
    )
}

pub fn trajectories_json(
    p: &dyn SdpProblem,
    problem: &str,
    start: &str,
    steps: usize,
    measure: &str,
    trajectories: &Container<StateCtrlSeq>,
    aggregate: f64,
) -> String {
    let stochastic = trajectories.kind() == UncertaintyKind::Stochastic;
    let items: Vec<String> = trajectories
        .weighted_support()
        .iter()
        .map(|(trj, prob)| {
            let mut obj = String::from("{");
            if stochastic {
                let _ = write!(obj, "\"prob\":{},", num(*prob));
            }
            let path: Vec<String> = trj
                .steps()
                .map(|(t, x, y)| {
                    format!(
                        "{{\"t\":{},\"x\":{},\"ctrl\":{}}}",
                        t,
                        json_str(x.key()),
                        json_str(y.key())
                    )
                })
                .collect();
            let _ = write!(
                obj,
                "\"path\":[{}],\"final\":{},\"value\":{}}}",
                path.join(","),
                json_str(trj.final_state().key()),
                num(trajectory_value(p, trj))
            );
            obj
        })
        .collect();
    format!(
        "{{\"problem\":{},\"start\":{},\"steps\":{},\"measure\":{},\"trajectories\":[{}],\"meas\":{}}}",
        json_str(problem),
        json_str(start),
        steps,
        json_str(measure),
        items.join(","),
        num(aggregate)
    )
}

pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

pub fn checks_text(checks: &[CheckLine]) -> String {
    let mut out = String::new();
    for c in checks {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        if c.detail.is_empty() {
            let _ = writeln!(out, "{} {}", c.name, verdict);
        } else {
            let _ = writeln!(out, "{} {} {}", c.name, verdict, c.detail);
        }
    }
    out
}

pub fn checks_json(checks: &[CheckLine]) -> String {
    let items: Vec<String> = checks
        .iter()
        .map(|c| {
            format!(
                "{{\"name\":{},\"pass\":{},\"detail\":{}}}",
                json_str(&c.name),
                c.pass,
                json_str(&c.detail)
            )
        })
        .collect();
    format!("{{\"checks\":[{}]}}", items.join(","))
}

pub fn validation_json(report: &ValidationReport) -> String {
    let items: Vec<String> = report
        .violations
        .iter()
        .map(|v| {
            format!(
                "{{\"kind\":{},\"t\":{},\"x\":{},\"y\":{},\"detail\":{}}}",
                json_str(&v.kind.to_string()),
                v.t,
                json_str(v.x.as_deref().unwrap_or("-")),
                json_str(v.y.as_deref().unwrap_or("-")),
                json_str(&v.detail)
            )
        })
        .collect();
    format!("{{\"violations\":[{}]}}", items.join(","))
}
