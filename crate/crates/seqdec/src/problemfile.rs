//! Flat text format for describing problems.
//!
//! A file names the uncertainty kind, then lists sections:
//!
//! ```text
//! kind = stochastic
//!
//! [layers]
//! 0 = a b
//! 1 = a b
//!
//! [controls]
//! 0 a = stay go
//!
//! [step]
//! 0 a go = b:0.8 a:0.2
//!
//! [reward]
//! 0 a go b = 3.5
//! source a = 1.0
//!
//! [measure]
//! expected
//! ```
//!
//! Layers and controls must be listed in sorted key order; `validate`
//! flags files that are not. `#` starts a comment. Rewards default to the
//! `source` shorthand and then to zero.

use crate::error::Error;
use crate::problem::{CtrlValue, Measure, StateValue, TableProblem};
use crate::uncertainty::{Container, NonDetSet, SimpleProb, UncertaintyKind};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Section {
    None,
    Layers,
    Controls,
    Step,
    Reward,
    Measure,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn split_eq(line: &str, no: usize) -> Result<(&str, &str), Error> {
    line.split_once('=')
        .map(|(l, r)| (l.trim(), r.trim()))
        .ok_or_else(|| parse_err(no, "expected `lhs = rhs`"))
}

fn parse_container(
    kind: UncertaintyKind,
    rhs: &str,
    no: usize,
) -> Result<Container<StateValue>, Error> {
    let tokens: Vec<&str> = rhs.split_whitespace().collect();
    if tokens.is_empty() {
        return Err(parse_err(no, "step needs at least one destination"));
    }
    match kind {
        UncertaintyKind::Deterministic => {
            if tokens.len() != 1 {
                return Err(parse_err(
                    no,
                    "deterministic step takes exactly one destination",
                ));
            }
            Ok(Container::Single(StateValue::new(tokens[0])))
        }
        UncertaintyKind::NonDeterministic => Ok(Container::Set(NonDetSet::new(
            tokens.iter().map(|t| StateValue::new(*t)).collect(),
        ))),
        UncertaintyKind::Stochastic => {
            let mut entries = Vec::with_capacity(tokens.len());
            for tok in tokens {
                let (val, prob) = tok
                    .split_once(':')
                    .ok_or_else(|| parse_err(no, format!("expected `state:prob`, got `{tok}`")))?;
                let prob: f64 = prob
                    .parse()
                    .map_err(|_| parse_err(no, format!("bad probability `{prob}`")))?;
                entries.push((StateValue::new(val), prob));
            }
            Ok(Container::Dist(
                SimpleProb::new_unchecked(entries).canonicalized(),
            ))
        }
    }
}

/// Parses the text format into a [`TableProblem`]. Structural mistakes
/// are parse errors; semantic ones (bad mass, layer escapes) are left for
/// `validate` to report.
pub fn parse_problem_file(text: &str) -> Result<TableProblem, Error> {
    let mut kind: Option<UncertaintyKind> = None;
    let mut measure = Measure::Expected;
    let mut section = Section::None;
    let mut layers: Vec<(usize, Vec<StateValue>)> = Vec::new();
    let mut problem: Option<TableProblem> = None;

    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('[') {
            let name = header
                .strip_suffix(']')
                .ok_or_else(|| parse_err(no, "unterminated section header"))?;
            section = match name {
                "layers" => Section::Layers,
                "controls" => Section::Controls,
                "step" => Section::Step,
                "reward" => Section::Reward,
                "measure" => Section::Measure,
                other => return Err(parse_err(no, format!("unknown section `{other}`"))),
            };
            if section != Section::Layers && problem.is_none() {
                let k = kind.ok_or_else(|| parse_err(no, "`kind = ...` must come first"))?;
                problem = Some(TableProblem::new(k, measure.clone()));
            }
            continue;
        }
        match section {
            Section::None => {
                let (lhs, rhs) = split_eq(line, no)?;
                if lhs != "kind" {
                    return Err(parse_err(no, format!("unexpected `{lhs}` before sections")));
                }
                kind = Some(
                    UncertaintyKind::parse(rhs)
                        .ok_or_else(|| parse_err(no, format!("unknown kind `{rhs}`")))?,
                );
            }
            Section::Layers => {
                let (lhs, rhs) = split_eq(line, no)?;
                let t: usize = lhs
                    .parse()
                    .map_err(|_| parse_err(no, format!("bad layer time `{lhs}`")))?;
                let states = rhs.split_whitespace().map(StateValue::new).collect();
                layers.push((t, states));
            }
            Section::Controls => {
                let (lhs, rhs) = split_eq(line, no)?;
                let mut parts = lhs.split_whitespace();
                let (t, x) = match (parts.next(), parts.next(), parts.next()) {
                    (Some(t), Some(x), None) => (t, x),
                    _ => return Err(parse_err(no, "controls line is `t state = ctrls...`")),
                };
                let t: usize = t
                    .parse()
                    .map_err(|_| parse_err(no, format!("bad time `{t}`")))?;
                let ctrls = rhs.split_whitespace().map(CtrlValue::new).collect();
                problem
                    .as_mut()
                    .ok_or_else(|| parse_err(no, "missing kind"))?
                    .ctrls
                    .insert((t, StateValue::new(x)), ctrls);
            }
            Section::Step => {
                let (lhs, rhs) = split_eq(line, no)?;
                let mut parts = lhs.split_whitespace();
                let (t, x, y) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
                    (Some(t), Some(x), Some(y), None) => (t, x, y),
                    _ => return Err(parse_err(no, "step line is `t state ctrl = dests...`")),
                };
                let t: usize = t
                    .parse()
                    .map_err(|_| parse_err(no, format!("bad time `{t}`")))?;
                let p = problem
                    .as_mut()
                    .ok_or_else(|| parse_err(no, "missing kind"))?;
                let out = parse_container(p.kind, rhs, no)?;
                p.steps
                    .insert((t, StateValue::new(x), CtrlValue::new(y)), out);
            }
            Section::Reward => {
                let (lhs, rhs) = split_eq(line, no)?;
                let r: f64 = rhs
                    .parse()
                    .map_err(|_| parse_err(no, format!("bad reward `{rhs}`")))?;
                let p = problem
                    .as_mut()
                    .ok_or_else(|| parse_err(no, "missing kind"))?;
                let parts: Vec<&str> = lhs.split_whitespace().collect();
                match parts.as_slice() {
                    ["source", x] => {
                        p.source_rewards.insert(StateValue::new(*x), r);
                    }
                    [t, x, y, x2] => {
                        let t: usize = t
                            .parse()
                            .map_err(|_| parse_err(no, format!("bad time `{t}`")))?;
                        p.rewards.insert(
                            (
                                t,
                                StateValue::new(*x),
                                CtrlValue::new(*y),
                                StateValue::new(*x2),
                            ),
                            r,
                        );
                    }
                    _ => {
                        return Err(parse_err(
                            no,
                            "reward line is `t x y x' = r` or `source x = r`",
                        ))
                    }
                }
            }
            Section::Measure => {
                measure = Measure::parse(line)
                    .ok_or_else(|| parse_err(no, format!("unknown measure `{line}`")))?;
                if let Some(p) = problem.as_mut() {
                    p.measure = measure.clone();
                }
            }
        }
    }

    let mut p = match problem {
        Some(p) => p,
        None => {
            let k = kind.ok_or_else(|| parse_err(0, "file never declares `kind`"))?;
            TableProblem::new(k, measure)
        }
    };
    let max_t = layers.iter().map(|(t, _)| *t).max().unwrap_or(0);
    p.layers = vec![Vec::new(); max_t + 1];
    for (t, states) in layers {
        p.layers[t] = states;
    }
    Ok(p)
}
