//! State–control trajectories induced by a policy sequence.
//!
//! `state_ctrl_trj` computes the *container* of every trajectory a policy
//! sequence can realize: a single path for deterministic problems, the
//! set of paths for non-deterministic ones, and the exact distribution
//! over paths for stochastic ones.

use crate::error::Error;
use crate::problem::{CtrlValue, SdpProblem, StateValue};
use crate::solver::{Policy, PolicySeq};
use crate::uncertainty::{Canon, Container, UncertaintyKind};
use std::cmp::Ordering;
use std::fmt::Write as _;

/// One realized path: the visited `(state, control)` pairs and the state
/// the path ends in.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct StateCtrlSeq {
    start_t: usize,
    steps: Vec<(StateValue, CtrlValue)>,
    final_state: StateValue,
}

impl StateCtrlSeq {
    pub fn nil(t: usize, x: StateValue) -> Self {
        StateCtrlSeq {
            start_t: t,
            steps: Vec::new(),
            final_state: x,
        }
    }

    pub fn start_t(&self) -> usize {
        self.start_t
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The `(t, state, control)` triples along the path.
    pub fn steps(&self) -> impl Iterator<Item = (usize, &StateValue, &CtrlValue)> {
        self.steps
            .iter()
            .enumerate()
            .map(|(i, (x, y))| (self.start_t + i, x, y))
    }

    pub fn final_state(&self) -> &StateValue {
        &self.final_state
    }

    fn prepend(mut self, x: StateValue, y: CtrlValue) -> Self {
        self.steps.insert(0, (x, y));
        self.start_t -= 1;
        self
    }
}

impl Canon for StateCtrlSeq {
    /// Canonical trajectory order: lexicographic over the visited
    /// `(t, state key, control key)` triples, then the final state key.
    fn canon_cmp(&self, other: &Self) -> Ordering {
        self.start_t
            .cmp(&other.start_t)
            .then_with(|| {
                let a = self.steps.iter().map(|(x, y)| (x.key(), y.key()));
                let b = other.steps.iter().map(|(x, y)| (x.key(), y.key()));
                a.cmp(b)
            })
            .then_with(|| self.final_state.key().cmp(other.final_state.key()))
    }
}

/// All trajectories obtained by following `ps` from `x`, wrapped in the
/// problem's uncertainty container.
pub fn state_ctrl_trj(
    p: &dyn SdpProblem,
    ps: &PolicySeq,
    x: &StateValue,
) -> Result<Container<StateCtrlSeq>, Error> {
    trj_at(p, ps.start_t(), ps.policies(), x)
}

fn trj_at(
    p: &dyn SdpProblem,
    t: usize,
    policies: &[Policy],
    x: &StateValue,
) -> Result<Container<StateCtrlSeq>, Error> {
    let Some((head, tail)) = policies.split_first() else {
        return Ok(Container::ret(p.kind(), StateCtrlSeq::nil(t, x.clone())));
    };
    let y = head.table.get(x).ok_or_else(|| Error::DomainMiss {
        t,
        key: x.key().to_owned(),
    })?;
    let tagged = p.step(t, x, y).tag_members();
    let mut err = None;
    let sub = tagged.bind(|(x_next, _)| match trj_at(p, t + 1, tail, x_next) {
        Ok(c) => c,
        Err(e) => {
            err = Some(e);
            Container::ret(p.kind(), StateCtrlSeq::nil(t + 1, x_next.clone()))
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(sub.fmap(|trj| trj.clone().prepend(x.clone(), y.clone())))
}

/// Sum of the rewards collected along one trajectory.
pub fn trajectory_value(p: &dyn SdpProblem, trj: &StateCtrlSeq) -> f64 {
    let mut total = 0.0;
    let mut prev: Option<(usize, &StateValue, &CtrlValue)> = None;
    for (t, x, y) in trj.steps() {
        if let Some((pt, px, py)) = prev {
            total += p.reward(pt, px, py, x);
        }
        prev = Some((t, x, y));
    }
    if let Some((pt, px, py)) = prev {
        total += p.reward(pt, px, py, trj.final_state());
    }
    total
}

/// Canonical line rendering: `prob|x0 -y0-> x1 ... xn : value`, the
/// probability prefix only for stochastic containers.
pub fn render_trajectories(
    p: &dyn SdpProblem,
    trajectories: &Container<StateCtrlSeq>,
) -> String {
    let stochastic = trajectories.kind() == UncertaintyKind::Stochastic;
    let mut out = String::new();
    for (trj, prob) in trajectories.weighted_support() {
        if stochastic {
            let _ = write!(out, "{prob:.9}|");
        }
        for (_, x, y) in trj.steps() {
            let _ = write!(out, "{} -{}-> ", x.key(), y.key());
        }
        let _ = writeln!(
            out,
            "{} : {:.9}",
            trj.final_state().key(),
            trajectory_value(p, &trj)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{cylinder_det, cylinder_nondet, cylinder_stoch};
    use crate::problem::{resolve_ctrl, resolve_state};
    use crate::solver::{backwards_induction, mval, policy_seq_from_rule, SolveOptions};

    #[test]
    fn zero_steps_yield_the_start_alone() {
        let p = cylinder_det();
        let ps = PolicySeq::empty(2);
        let c = resolve_state(&p, 2, "c").unwrap();
        let out = state_ctrl_trj(&p, &ps, &c).unwrap();
        assert_eq!(out.support_len(), 1);
        let trj = &out.support()[0];
        assert!(trj.is_empty());
        assert_eq!(trj.final_state().key(), "c");
        assert_eq!(trajectory_value(&p, trj), 0.0);
    }

    #[test]
    fn deterministic_replay_reproduces_the_solver_value() {
        let p = cylinder_det();
        let sol = backwards_induction(&p, 0, 4, &SolveOptions::default()).unwrap();
        let b = resolve_state(&p, 0, "b").unwrap();
        let out = state_ctrl_trj(&p, &sol.policies, &b).unwrap();
        assert_eq!(out.support_len(), 1);
        let trj = &out.support()[0];
        let v = trajectory_value(&p, trj);
        assert!((v - sol.tables[0].values[&b]).abs() < 1e-9);
        assert!((v - mval(&p, &sol.policies, &b).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn fixed_rule_path_collects_sixteen() {
        let p = cylinder_det();
        let moves = ["R", "R", "A", "A"];
        let ps = policy_seq_from_rule(&p, 0, 4, &|t, x| {
            resolve_ctrl(&p, t, x, moves[t]).or_else(|| resolve_ctrl(&p, t, x, "A"))
        })
        .unwrap();
        let b = resolve_state(&p, 0, "b").unwrap();
        let out = state_ctrl_trj(&p, &ps, &b).unwrap();
        let trj = &out.support()[0];
        let cols: Vec<&str> = trj.steps().map(|(_, x, _)| x.key()).collect();
        assert_eq!(cols, vec!["b", "c", "d", "d"]);
        assert_eq!(trj.final_state().key(), "d");
        assert!((trajectory_value(&p, trj) - 16.0).abs() < 1e-9);
    }

    #[test]
    fn stochastic_two_step_tree_from_b() {
        // Hand enumeration of the two-level outcome tree under [R, R]
        // with slip 0.2: each step succeeds (0.8) or stays (0.2).
        let p = cylinder_stoch(0.2).unwrap();
        let ps = policy_seq_from_rule(&p, 0, 2, &|t, x| {
            resolve_ctrl(&p, t, x, "R").or_else(|| resolve_ctrl(&p, t, x, "A"))
        })
        .unwrap();
        let b = resolve_state(&p, 0, "b").unwrap();
        let out = state_ctrl_trj(&p, &ps, &b).unwrap();
        let entries = out.weighted_support();
        assert_eq!(entries.len(), 4);
        let total: f64 = entries.iter().map(|(_, pr)| pr).sum();
        assert!((total - 1.0).abs() < 1e-9);
        for (trj, prob) in &entries {
            let path: Vec<&str> = trj
                .steps()
                .map(|(_, x, _)| x.key())
                .chain([trj.final_state().key()])
                .collect();
            let expect = match path.as_slice() {
                ["b", "b", "b"] => 0.2 * 0.2,
                ["b", "b", "c"] => 0.2 * 0.8,
                ["b", "c", "c"] => 0.8 * 0.2,
                ["b", "c", "d"] => 0.8 * 0.8,
                other => panic!("unexpected path {other:?}"),
            };
            assert!((prob - expect).abs() < 1e-12, "path {path:?}");
        }
    }

    #[test]
    fn expectation_of_trajectory_values_matches_mval() {
        let p = cylinder_stoch(0.2).unwrap();
        let sol = backwards_induction(&p, 0, 3, &SolveOptions::default()).unwrap();
        for (x, v) in &sol.tables[0].values {
            let out = state_ctrl_trj(&p, &sol.policies, x).unwrap();
            let expectation: f64 = out
                .weighted_support()
                .iter()
                .map(|(trj, prob)| prob * trajectory_value(&p, trj))
                .sum();
            assert!((expectation - v).abs() < 1e-9, "start {x}");
        }
    }

    #[test]
    fn worst_case_value_is_the_minimum_trajectory_value() {
        let p = cylinder_nondet();
        for n in 1..=4 {
            let sol = backwards_induction(&p, 0, n, &SolveOptions::default()).unwrap();
            for (x, v) in &sol.tables[0].values {
                let out = state_ctrl_trj(&p, &sol.policies, x).unwrap();
                let worst = out
                    .support()
                    .iter()
                    .map(|trj| trajectory_value(&p, trj))
                    .fold(f64::INFINITY, f64::min);
                assert!((worst - v).abs() < 1e-9, "start {x} n={n}");
            }
        }
    }

    #[test]
    fn best_case_value_is_the_maximum_trajectory_value() {
        use crate::problem::{Measure, MeasureOverride};
        let p = MeasureOverride::new(cylinder_nondet(), Measure::Best);
        for n in 1..=4 {
            let sol = backwards_induction(&p, 0, n, &SolveOptions::default()).unwrap();
            for (x, v) in &sol.tables[0].values {
                let out = state_ctrl_trj(&p, &sol.policies, x).unwrap();
                let best = out
                    .support()
                    .iter()
                    .map(|trj| trajectory_value(&p, trj))
                    .fold(f64::NEG_INFINITY, f64::max);
                assert!((best - v).abs() < 1e-9, "start {x} n={n}");
            }
        }
    }

    #[test]
    fn every_trajectory_is_step_connected() {
        let p = cylinder_stoch(0.2).unwrap();
        let sol = backwards_induction(&p, 0, 3, &SolveOptions::default()).unwrap();
        for x in sol.tables[0].values.keys() {
            let out = state_ctrl_trj(&p, &sol.policies, x).unwrap();
            for trj in out.support() {
                let mut chain: Vec<(usize, StateValue, CtrlValue)> = trj
                    .steps()
                    .map(|(t, x, y)| (t, x.clone(), y.clone()))
                    .collect();
                chain.push((
                    trj.start_t() + trj.len(),
                    trj.final_state().clone(),
                    CtrlValue::new("-"),
                ));
                for pair in chain.windows(2) {
                    let (t, x, y) = &pair[0];
                    let (_, x_next, _) = &pair[1];
                    assert!(p.step(*t, x, y).contains(x_next));
                    assert_eq!(&sol.policies.policies()[*t].table[x], y);
                }
            }
        }
    }

    #[test]
    fn rendering_is_canonical() {
        let p = cylinder_stoch(0.2).unwrap();
        let ps = policy_seq_from_rule(&p, 0, 1, &|t, x| {
            resolve_ctrl(&p, t, x, "R").or_else(|| resolve_ctrl(&p, t, x, "A"))
        })
        .unwrap();
        let b = resolve_state(&p, 0, "b").unwrap();
        let out = state_ctrl_trj(&p, &ps, &b).unwrap();
        assert_eq!(
            render_trajectories(&p, &out),
            "0.200000000|b -R-> b : 3.000000000\n0.800000000|b -R-> c : 3.000000000\n"
        );

        let p = cylinder_nondet();
        let ps = policy_seq_from_rule(&p, 0, 1, &|t, x| {
            resolve_ctrl(&p, t, x, "R").or_else(|| resolve_ctrl(&p, t, x, "A"))
        })
        .unwrap();
        let out = state_ctrl_trj(&p, &ps, &b).unwrap();
        assert_eq!(
            render_trajectories(&p, &out),
            "b -R-> b : 3.000000000\nb -R-> c : 3.000000000\n"
        );
    }

    #[test]
    fn domain_miss_propagates() {
        let p = crate::examples::cylinder_timedep();
        let sol = backwards_induction(&p, 0, 3, &SolveOptions::default()).unwrap();
        let a = resolve_state(&p, 0, "a").unwrap();
        assert!(matches!(
            state_ctrl_trj(&p, &sol.policies, &a),
            Err(Error::DomainMiss { .. })
        ));
    }
}
