//! Brute-force ground truth for desk-scale instances.
//!
//! Exhaustive enumeration of control sequences (deterministic problems)
//! and of domain-restricted policy sequences, used to certify that the
//! solver's output cannot be improved. The enumeration compiles the
//! problem into index tables first so that millions of candidate
//! sequences stay affordable; a unit test pins the compiled evaluation to
//! the reference `mval` recursion.

use crate::error::Error;
use crate::problem::{CtrlValue, Measure, SdpProblem, StateValue};
use crate::rng::Rng;
use crate::solver::{mval, opt_ext, Policy, PolicySeq, ValueTable};
use crate::uncertainty::{Container, NonDetSet, SimpleProb, UncertaintyKind};
use crate::viability::{ReachabilityTable, ViabilityTable};
use std::collections::BTreeMap;
use std::fmt;

/// Tolerance for optimality comparisons.
pub const OPT_TOL: f64 = 1e-9;

/// Default cap on evaluated (candidate, start) pairs.
pub const DEFAULT_CAP: u64 = 1_000_000;

/// A control sequence from a fixed start, each control feasible for the
/// steps that remain after it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtrlSeq {
    pub start_t: usize,
    pub start_x: StateValue,
    pub ctrls: Vec<CtrlValue>,
}

/// Every feasible control sequence of length `n` from `x`. Deterministic
/// problems only; `x` must be viable for `n` steps.
pub fn enum_ctrl_seqs(
    p: &dyn SdpProblem,
    t: usize,
    n: usize,
    x: &StateValue,
) -> Result<Vec<CtrlSeq>, Error> {
    if p.kind() != UncertaintyKind::Deterministic {
        return Err(Error::NotDeterministic);
    }
    let mut vt = ViabilityTable::new();
    if !vt.viable(p, n, t, x)? {
        return Err(Error::NotViable {
            n,
            t,
            key: x.key().to_owned(),
        });
    }
    fn go(
        p: &dyn SdpProblem,
        vt: &mut ViabilityTable,
        t: usize,
        n: usize,
        x: &StateValue,
    ) -> Result<Vec<Vec<CtrlValue>>, Error> {
        if n == 0 {
            return Ok(vec![Vec::new()]);
        }
        let mut out = Vec::new();
        for good in vt.good_ctrls(p, t, n - 1, x)? {
            let next = p
                .step(t, x, &good.ctrl)
                .support()
                .into_iter()
                .next()
                .ok_or(Error::EmptyContainer)?;
            for mut tail in go(p, vt, t + 1, n - 1, &next)? {
                tail.insert(0, good.ctrl.clone());
                out.push(tail);
            }
        }
        Ok(out)
    }
    Ok(go(p, &mut vt, t, n, x)?
        .into_iter()
        .map(|ctrls| CtrlSeq {
            start_t: t,
            start_x: x.clone(),
            ctrls,
        })
        .collect())
}

/// Sum of rewards along the chain a control sequence induces.
pub fn seq_value(p: &dyn SdpProblem, cs: &CtrlSeq) -> Result<f64, Error> {
    if p.kind() != UncertaintyKind::Deterministic {
        return Err(Error::NotDeterministic);
    }
    let mut total = 0.0;
    let mut x = cs.start_x.clone();
    for (t, y) in (cs.start_t..).zip(cs.ctrls.iter()) {
        let next = p
            .step(t, &x, y)
            .support()
            .into_iter()
            .next()
            .ok_or(Error::EmptyContainer)?;
        total += p.reward(t, &x, y, &next);
        x = next;
    }
    Ok(total)
}

/// One decision layer compiled to index tables: the policy domain, the
/// good controls per state, and per control the `(next index, probability,
/// reward)` outcomes into the following layer's domain.
struct EnumLayer {
    t: usize,
    states: Vec<StateValue>,
    choices: Vec<Vec<CtrlValue>>,
    outcomes: Vec<Vec<Vec<(usize, f64, f64)>>>,
}

struct EnumProblem {
    kind: UncertaintyKind,
    measure: Measure,
    layers: Vec<EnumLayer>,
    terminal: Vec<StateValue>,
}

fn build_enum(p: &dyn SdpProblem, t0: usize, n: usize) -> Result<EnumProblem, Error> {
    let rt = ReachabilityTable::build(p, t0, t0 + n);
    let mut vt = ViabilityTable::new();

    let mut domains: Vec<Vec<StateValue>> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let t = t0 + i;
        let steps = n - i;
        let mut dom = Vec::new();
        for x in p.enumerate_states(t) {
            if rt.reachable(t, &x)? && vt.viable(p, steps, t, &x)? {
                dom.push(x);
            }
        }
        domains.push(dom);
    }

    let mut layers = Vec::with_capacity(n);
    for i in 0..n {
        let t = t0 + i;
        let steps = n - i;
        let next_index: BTreeMap<&StateValue, usize> = domains[i + 1]
            .iter()
            .enumerate()
            .map(|(j, x)| (x, j))
            .collect();
        let mut choices = Vec::with_capacity(domains[i].len());
        let mut outcomes = Vec::with_capacity(domains[i].len());
        for x in &domains[i] {
            let goods = vt.good_ctrls(p, t, steps - 1, x)?;
            if goods.is_empty() {
                return Err(Error::EmptyChoice);
            }
            let mut per_ctrl = Vec::with_capacity(goods.len());
            let mut ctrls = Vec::with_capacity(goods.len());
            for good in goods {
                let y = good.ctrl;
                let support = p.step(t, x, &y).weighted_support();
                if support.is_empty() {
                    return Err(Error::EmptyContainer);
                }
                let outs: Result<Vec<(usize, f64, f64)>, Error> = support
                    .into_iter()
                    .map(|(x_next, prob)| {
                        let j = next_index
                            .get(&x_next)
                            .copied()
                            .ok_or(Error::TableMiss { t: t + 1, n: steps - 1 })?;
                        Ok((j, prob, p.reward(t, x, &y, &x_next)))
                    })
                    .collect();
                per_ctrl.push(outs?);
                ctrls.push(y);
            }
            choices.push(ctrls);
            outcomes.push(per_ctrl);
        }
        layers.push(EnumLayer {
            t,
            states: std::mem::take(&mut domains[i]),
            choices,
            outcomes,
        });
    }
    Ok(EnumProblem {
        kind: p.kind(),
        measure: p.measure(),
        layers,
        terminal: domains.pop().unwrap_or_default(),
    })
}

fn measure_outcomes(
    measure: &Measure,
    kind: UncertaintyKind,
    outcomes: &[(usize, f64, f64)],
    next_vals: &[f64],
) -> Result<f64, Error> {
    match measure {
        Measure::Expected => match kind {
            UncertaintyKind::Deterministic => {
                let (j, _, r) = outcomes[0];
                Ok(r + next_vals[j])
            }
            UncertaintyKind::Stochastic => Ok(outcomes
                .iter()
                .map(|(j, p, r)| p * (r + next_vals[*j]))
                .sum()),
            UncertaintyKind::NonDeterministic => Err(Error::KindMismatch {
                expected: UncertaintyKind::Stochastic,
                found: kind,
            }),
        },
        Measure::Worst => Ok(outcomes
            .iter()
            .map(|(j, _, r)| r + next_vals[*j])
            .fold(f64::INFINITY, f64::min)),
        Measure::Best => Ok(outcomes
            .iter()
            .map(|(j, _, r)| r + next_vals[*j])
            .fold(f64::NEG_INFINITY, f64::max)),
        Measure::Unchecked { f, .. } => {
            let values: Vec<f64> = outcomes.iter().map(|(j, _, r)| r + next_vals[*j]).collect();
            let container = match kind {
                UncertaintyKind::Deterministic => Container::Single(values[0]),
                UncertaintyKind::NonDeterministic => Container::Set(NonDetSet::new(values)),
                UncertaintyKind::Stochastic => Container::Dist(
                    SimpleProb::new_unchecked(
                        values
                            .into_iter()
                            .zip(outcomes.iter().map(|(_, p, _)| *p))
                            .collect(),
                    )
                    .canonicalized(),
                ),
            };
            Ok(f(&container))
        }
    }
}

/// How many domain-restricted policy sequences exist at `(t, n)`: the
/// product over layers and domain states of the good-control counts.
pub fn count_policy_seqs(p: &dyn SdpProblem, t: usize, n: usize) -> Result<u128, Error> {
    let ep = build_enum(p, t, n)?;
    Ok(ep
        .layers
        .iter()
        .flat_map(|l| l.choices.iter())
        .map(|c| c.len() as u128)
        .product())
}

/// Materializes every domain-restricted policy sequence at `(t, n)`, in
/// canonical enumeration order. Guarded by `cap` on the sequence count.
pub fn enum_policy_seqs(
    p: &dyn SdpProblem,
    t: usize,
    n: usize,
    cap: u64,
) -> Result<Vec<PolicySeq>, Error> {
    let ep = build_enum(p, t, n)?;
    let count: u128 = ep
        .layers
        .iter()
        .flat_map(|l| l.choices.iter())
        .map(|c| c.len() as u128)
        .product();
    if count > cap as u128 {
        return Err(Error::TooLarge {
            required: count,
            cap,
        });
    }
    // Flatten the (layer, state) slots, then run an odometer over them.
    let slots: Vec<(usize, usize)> = ep
        .layers
        .iter()
        .enumerate()
        .flat_map(|(i, l)| (0..l.states.len()).map(move |s| (i, s)))
        .collect();
    let mut idx = vec![0usize; slots.len()];
    let mut out = Vec::with_capacity(count as usize);
    loop {
        let mut policies = Vec::with_capacity(ep.layers.len());
        let mut slot = 0;
        for (i, layer) in ep.layers.iter().enumerate() {
            let mut table = BTreeMap::new();
            for s in 0..layer.states.len() {
                table.insert(
                    layer.states[s].clone(),
                    layer.choices[s][idx[slot]].clone(),
                );
                slot += 1;
            }
            policies.push(Policy {
                t: layer.t,
                steps_remaining: n - i,
                table,
            });
        }
        out.push(PolicySeq::new(t, policies)?);

        let mut pos = slots.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            let (i, s) = slots[pos];
            idx[pos] += 1;
            if idx[pos] < ep.layers[i].choices[s].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Location and size of the worst optimality violation found.
#[derive(Debug, Clone)]
pub struct WorstViolation {
    pub t: usize,
    pub state: StateValue,
    pub gap: f64,
}

/// Outcome of an exhaustive optimality check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub pass: bool,
    pub pairs_checked: u128,
    pub worst: Option<WorstViolation>,
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.pass, &self.worst) {
            (true, _) => write!(f, "PASS"),
            (false, Some(w)) => {
                write!(f, "FAIL t={} x={} gap={:.9}", w.t, w.state.key(), w.gap)
            }
            (false, None) => write!(f, "FAIL"),
        }
    }
}

struct Dfs<'a> {
    ep: &'a EnumProblem,
    ref_vals: Vec<f64>,
    worst: Option<WorstViolation>,
    candidates_seen: u128,
}

impl Dfs<'_> {
    fn compare_top(&mut self, top: &[f64]) {
        self.candidates_seen += 1;
        for (s, cand) in top.iter().enumerate() {
            let gap = cand - self.ref_vals[s];
            if gap > OPT_TOL && self.worst.as_ref().is_none_or(|w| gap > w.gap) {
                self.worst = Some(WorstViolation {
                    t: self.ep.layers[0].t,
                    state: self.ep.layers[0].states[s].clone(),
                    gap,
                });
            }
        }
    }

    /// Enumerates the choice combinations of layer `i`, recomputing its
    /// value vector against the already-fixed layer `i+1`, and recurses
    /// toward layer 0 where candidates are compared with the reference.
    fn sweep(&mut self, i: usize, tables: &mut [Vec<f64>]) -> Result<(), Error> {
        let layer = &self.ep.layers[i];
        let k = layer.states.len();
        let mut idx = vec![0usize; k];
        loop {
            {
                let (head, tail) = tables.split_at_mut(i + 1);
                let next = &tail[0];
                for s in 0..k {
                    head[i][s] = measure_outcomes(
                        &self.ep.measure,
                        self.ep.kind,
                        &layer.outcomes[s][idx[s]],
                        next,
                    )?;
                }
            }
            if i == 0 {
                let top = std::mem::take(&mut tables[0]);
                self.compare_top(&top);
                tables[0] = top;
            } else {
                self.sweep(i - 1, tables)?;
            }
            let mut pos = 0;
            loop {
                if pos == k {
                    return Ok(());
                }
                idx[pos] += 1;
                if idx[pos] < layer.choices[pos].len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }
}

/// Verifies that no enumerated policy sequence beats `ps` at any
/// reachable-and-viable start, within [`OPT_TOL`]. `cap` bounds the
/// number of evaluated (candidate, start) pairs.
pub fn check_opt_policy_seq(
    p: &dyn SdpProblem,
    ps: &PolicySeq,
    cap: u64,
) -> Result<CheckReport, Error> {
    let t0 = ps.start_t();
    let n = ps.len();
    let ep = build_enum(p, t0, n)?;
    let seq_count: u128 = ep
        .layers
        .iter()
        .flat_map(|l| l.choices.iter())
        .map(|c| c.len() as u128)
        .product();
    let starts = if n == 0 {
        ep.terminal.len()
    } else {
        ep.layers[0].states.len()
    };
    let pairs = seq_count * starts as u128;
    if pairs > cap as u128 {
        return Err(Error::TooLarge {
            required: pairs,
            cap,
        });
    }
    if n == 0 {
        // The empty sequence is the only candidate and values are zero.
        return Ok(CheckReport {
            pass: true,
            pairs_checked: pairs,
            worst: None,
        });
    }
    let ref_vals: Vec<f64> = ep.layers[0]
        .states
        .iter()
        .map(|x| mval(p, ps, x))
        .collect::<Result<_, _>>()?;
    let mut tables: Vec<Vec<f64>> = ep
        .layers
        .iter()
        .map(|l| vec![0.0; l.states.len()])
        .collect();
    tables.push(vec![0.0; ep.terminal.len()]);
    let mut dfs = Dfs {
        ep: &ep,
        ref_vals,
        worst: None,
        candidates_seen: 0,
    };
    dfs.sweep(n - 1, &mut tables)?;
    debug_assert_eq!(dfs.candidates_seen, seq_count, "enumeration coverage");
    Ok(CheckReport {
        pass: dfs.worst.is_none(),
        pairs_checked: pairs,
        worst: dfs.worst,
    })
}

/// Executable optimality-propagation check: given `ps` at `(t+1, n)`,
/// verifies `ps` is optimal, computes its optimal extension at `t`, and
/// verifies the extended sequence is optimal at `(t, n+1)` by full
/// enumeration.
pub fn check_bellman(
    p: &dyn SdpProblem,
    ps: &PolicySeq,
    cap: u64,
) -> Result<CheckReport, Error> {
    let t_next = ps.start_t();
    assert!(t_next >= 1, "tail sequence must start past time zero");
    let t = t_next - 1;
    let n = ps.len();

    let tail_report = check_opt_policy_seq(p, ps, cap)?;
    if !tail_report.pass {
        return Ok(tail_report);
    }

    let values = if n == 0 {
        p.enumerate_states(t_next)
            .into_iter()
            .map(|x| (x, 0.0))
            .collect()
    } else {
        ps.policies()[0]
            .table
            .keys()
            .map(|x| mval(p, ps, x).map(|v| (x.clone(), v)))
            .collect::<Result<BTreeMap<_, _>, _>>()?
    };
    let value_next = ValueTable {
        t: t_next,
        n,
        values,
    };
    let rt = ReachabilityTable::build(p, t, t);
    let mut vt = ViabilityTable::new();
    let (extension, _) = opt_ext(p, &mut vt, &rt, &value_next)?;
    let extended = ps.prepend(extension)?;
    check_opt_policy_seq(p, &extended, cap)
}

/// A uniformly random feasible policy sequence over the solve domain.
pub fn random_policy_seq(
    p: &dyn SdpProblem,
    t0: usize,
    n: usize,
    seed: u64,
) -> Result<PolicySeq, Error> {
    let ep = build_enum(p, t0, n)?;
    let mut rng = Rng::new(seed);
    let mut policies = Vec::with_capacity(n);
    for (i, layer) in ep.layers.iter().enumerate() {
        let mut table = BTreeMap::new();
        for (s, x) in layer.states.iter().enumerate() {
            let pick = rng.below(layer.choices[s].len() as u64) as usize;
            table.insert(x.clone(), layer.choices[s][pick].clone());
        }
        policies.push(Policy {
            t: layer.t,
            steps_remaining: n - i,
            table,
        });
    }
    PolicySeq::new(t0, policies)
}

fn variance_of(m: &Container<f64>) -> f64 {
    match m.kind() {
        UncertaintyKind::Deterministic => 0.0,
        UncertaintyKind::NonDeterministic => {
            let vals = m.support();
            if vals.is_empty() {
                return 0.0;
            }
            let mean: f64 = vals.iter().sum::<f64>() / vals.len() as f64;
            vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vals.len() as f64
        }
        UncertaintyKind::Stochastic => {
            let entries = m.weighted_support();
            let mean: f64 = entries.iter().map(|(v, p)| v * p).sum();
            entries.iter().map(|(v, p)| p * (v - mean) * (v - mean)).sum()
        }
    }
}

/// Variance as an aggregation. Deliberately violates the monotonicity
/// contract; kept for the regression demonstrating that a non-monotone
/// measure breaks optimality propagation.
pub fn variance_measure() -> Measure {
    Measure::Unchecked {
        name: "variance",
        f: variance_of,
    }
}
