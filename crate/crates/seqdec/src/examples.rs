//! Ready-made problem instances: four variants of the five-column
//! "cylinder" walk and a small knapsack.
//!
//! The cylinder: five columns `a..e`; each step the walker moves left,
//! ahead or right (edge columns lack one of the sideways moves) and
//! collects a reward that depends on the column it started the step from.
//! The time-dependent variant restricts which columns are valid at steps
//! 3 and 6; the monadic variants let the walker slip and stay in place.

use crate::error::Error;
use crate::problem::{CtrlValue, Measure, SdpProblem, StateValue};
use crate::uncertainty::{Container, NonDetSet, SimpleProb, UncertaintyKind};

const COLUMNS: [&str; 5] = ["a", "b", "c", "d", "e"];
const SOURCE_REWARDS: [f64; 5] = [1.0, 3.0, 5.0, 4.0, 7.0];

#[derive(Debug, Clone, Copy, PartialEq)]
enum CylinderVariant {
    Deterministic,
    TimeDependent,
    NonDeterministic,
    Stochastic { slip: f64 },
}

#[derive(Debug, Clone)]
pub struct CylinderProblem {
    variant: CylinderVariant,
    measure: Measure,
}

fn column_state(col: usize) -> StateValue {
    StateValue::ranked(col as u64, COLUMNS[col])
}

fn move_ctrl(rank: u64) -> CtrlValue {
    match rank {
        0 => CtrlValue::ranked(0, "L"),
        1 => CtrlValue::ranked(1, "A"),
        _ => CtrlValue::ranked(2, "R"),
    }
}

impl CylinderProblem {
    fn valid_columns(&self, t: usize) -> Vec<usize> {
        match self.variant {
            CylinderVariant::TimeDependent if t == 3 => vec![4],
            CylinderVariant::TimeDependent if t == 6 => vec![0, 1, 2],
            _ => (0..COLUMNS.len()).collect(),
        }
    }

    /// Moves available from a column, in left-ahead-right order, paired
    /// with their intended destination column.
    fn moves(col: usize) -> Vec<(CtrlValue, usize)> {
        let mut out = Vec::with_capacity(3);
        if col > 0 {
            out.push((move_ctrl(0), col - 1));
        }
        out.push((move_ctrl(1), col));
        if col + 1 < COLUMNS.len() {
            out.push((move_ctrl(2), col + 1));
        }
        out
    }

    fn column_of(x: &StateValue) -> usize {
        COLUMNS.iter().position(|c| *c == x.key()).unwrap_or(0)
    }
}

impl SdpProblem for CylinderProblem {
    fn kind(&self) -> UncertaintyKind {
        match self.variant {
            CylinderVariant::Deterministic | CylinderVariant::TimeDependent => {
                UncertaintyKind::Deterministic
            }
            CylinderVariant::NonDeterministic => UncertaintyKind::NonDeterministic,
            CylinderVariant::Stochastic { .. } => UncertaintyKind::Stochastic,
        }
    }

    fn horizon_hint(&self) -> Option<usize> {
        Some(8)
    }

    fn enumerate_states(&self, t: usize) -> Vec<StateValue> {
        self.valid_columns(t).into_iter().map(column_state).collect()
    }

    fn enumerate_ctrls(&self, t: usize, x: &StateValue) -> Vec<CtrlValue> {
        let col = Self::column_of(x);
        let next = self.valid_columns(t + 1);
        // Controls whose destination would leave the next layer are not
        // offered; this keeps `step` total on its declared domain.
        Self::moves(col)
            .into_iter()
            .filter(|(_, dest)| next.contains(dest))
            .map(|(y, _)| y)
            .collect()
    }

    fn step(&self, _t: usize, x: &StateValue, y: &CtrlValue) -> Container<StateValue> {
        let col = Self::column_of(x);
        let dest = Self::moves(col)
            .into_iter()
            .find(|(m, _)| m == y)
            .map(|(_, d)| d)
            .unwrap_or(col);
        match self.variant {
            CylinderVariant::Deterministic | CylinderVariant::TimeDependent => {
                Container::Single(column_state(dest))
            }
            CylinderVariant::NonDeterministic => Container::Set(NonDetSet::new(vec![
                column_state(dest),
                column_state(col),
            ])),
            CylinderVariant::Stochastic { slip } => Container::Dist(
                SimpleProb::new_unchecked(vec![
                    (column_state(dest), 1.0 - slip),
                    (column_state(col), slip),
                ])
                .canonicalized(),
            ),
        }
    }

    fn reward(&self, _t: usize, x: &StateValue, _y: &CtrlValue, _next: &StateValue) -> f64 {
        SOURCE_REWARDS[Self::column_of(x)]
    }

    fn measure(&self) -> Measure {
        self.measure.clone()
    }
}

/// Time-independent deterministic cylinder.
pub fn cylinder_det() -> CylinderProblem {
    CylinderProblem {
        variant: CylinderVariant::Deterministic,
        measure: Measure::Expected,
    }
}

/// Cylinder with restricted layers: at step 3 only `e` is valid, at step
/// 6 only `a`, `b` and `c`.
pub fn cylinder_timedep() -> CylinderProblem {
    CylinderProblem {
        variant: CylinderVariant::TimeDependent,
        measure: Measure::Expected,
    }
}

/// Cylinder where a move may leave the walker in place: each step yields
/// the set of the intended destination and the current column.
pub fn cylinder_nondet() -> CylinderProblem {
    CylinderProblem {
        variant: CylinderVariant::NonDeterministic,
        measure: Measure::Worst,
    }
}

/// Cylinder where a move succeeds with probability `1 - slip` and slips
/// back to the current column with probability `slip`.
pub fn cylinder_stoch(slip: f64) -> Result<CylinderProblem, Error> {
    if !(0.0..1.0).contains(&slip) {
        return Err(Error::InvalidSlip { slip });
    }
    Ok(CylinderProblem {
        variant: CylinderVariant::Stochastic { slip },
        measure: Measure::Expected,
    })
}

/// 0/1 knapsack as a sequential decision problem: step `t` decides item
/// `t`, the state is the remaining capacity.
#[derive(Debug, Clone)]
pub struct KnapsackProblem {
    capacity: u64,
    items: Vec<(u64, f64)>,
    measure: Measure,
}

/// Items are `(weight, value)` pairs; weights must be at least 1.
pub fn knapsack(capacity: u64, items: &[(u64, f64)]) -> KnapsackProblem {
    assert!(items.iter().all(|(w, _)| *w >= 1), "item weights must be >= 1");
    KnapsackProblem {
        capacity,
        items: items.to_vec(),
        measure: Measure::Expected,
    }
}

fn capacity_state(c: u64) -> StateValue {
    StateValue::ranked(c, c.to_string())
}

const TAKE: &str = "Take";
const SKIP: &str = "Skip";

impl SdpProblem for KnapsackProblem {
    fn kind(&self) -> UncertaintyKind {
        UncertaintyKind::Deterministic
    }

    fn horizon_hint(&self) -> Option<usize> {
        Some(self.items.len())
    }

    fn enumerate_states(&self, t: usize) -> Vec<StateValue> {
        if t > self.items.len() {
            return Vec::new();
        }
        (0..=self.capacity).map(capacity_state).collect()
    }

    fn enumerate_ctrls(&self, t: usize, x: &StateValue) -> Vec<CtrlValue> {
        let Some((weight, _)) = self.items.get(t) else {
            return Vec::new();
        };
        let cap: u64 = x.key().parse().unwrap_or(0);
        let mut out = vec![CtrlValue::new(SKIP)];
        if *weight <= cap {
            out.push(CtrlValue::new(TAKE));
        }
        out
    }

    fn step(&self, t: usize, x: &StateValue, y: &CtrlValue) -> Container<StateValue> {
        let cap: u64 = x.key().parse().unwrap_or(0);
        let weight = self.items.get(t).map(|(w, _)| *w).unwrap_or(0);
        let next = if y.key() == TAKE { cap - weight } else { cap };
        Container::Single(capacity_state(next))
    }

    fn reward(&self, t: usize, _x: &StateValue, y: &CtrlValue, _next: &StateValue) -> f64 {
        if y.key() == TAKE {
            self.items.get(t).map(|(_, v)| *v).unwrap_or(0.0)
        } else {
            0.0
        }
    }

    fn measure(&self) -> Measure {
        self.measure.clone()
    }
}

/// The problem ids the command line accepts.
pub fn registry_ids() -> &'static [&'static str] {
    &["cyl-det", "cyl-time", "cyl-nondet", "cyl-stoch", "knapsack"]
}

/// Looks a shipped instance up by id.
pub fn by_id(id: &str) -> Option<Box<dyn SdpProblem>> {
    match id {
        "cyl-det" => Some(Box::new(cylinder_det())),
        "cyl-time" => Some(Box::new(cylinder_timedep())),
        "cyl-nondet" => Some(Box::new(cylinder_nondet())),
        "cyl-stoch" => Some(Box::new(cylinder_stoch(0.2).expect("default slip is valid"))),
        "knapsack" => Some(Box::new(knapsack(5, &[(2, 3.0), (3, 4.0), (4, 5.0)]))),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{resolve_ctrl, resolve_state, validate};
    use crate::solver::{backwards_induction, SolveOptions};

    #[test]
    fn det_cylinder_transitions_and_rewards() {
        let p = cylinder_det();
        let b = resolve_state(&p, 0, "b").unwrap();
        let r = resolve_ctrl(&p, 0, &b, "R").unwrap();
        let out = p.step(0, &b, &r);
        assert_eq!(out.to_string(), "=c");
        let c = resolve_state(&p, 1, "c").unwrap();
        assert_eq!(p.reward(0, &b, &r, &c), 3.0);
    }

    #[test]
    fn timedep_layers_shrink_at_the_bottlenecks() {
        let p = cylinder_timedep();
        let keys3: Vec<String> = p.enumerate_states(3).iter().map(|s| s.key().into()).collect();
        assert_eq!(keys3, vec!["e"]);
        let keys6: Vec<String> = p.enumerate_states(6).iter().map(|s| s.key().into()).collect();
        assert_eq!(keys6, vec!["a", "b", "c"]);
    }

    #[test]
    fn stochastic_slip_must_be_a_probability() {
        assert!(matches!(cylinder_stoch(1.0), Err(Error::InvalidSlip { .. })));
        assert!(matches!(cylinder_stoch(-0.1), Err(Error::InvalidSlip { .. })));
        assert!(cylinder_stoch(0.0).is_ok());
    }

    #[test]
    fn zero_slip_degenerates_to_point_masses() {
        let p = cylinder_stoch(0.0).unwrap();
        let b = resolve_state(&p, 0, "b").unwrap();
        let r = resolve_ctrl(&p, 0, &b, "R").unwrap();
        assert_eq!(p.step(0, &b, &r).to_string(), "{c:1.000000000}");
        let a_move = resolve_ctrl(&p, 0, &b, "A").unwrap();
        assert_eq!(p.step(0, &b, &a_move).to_string(), "{b:1.000000000}");
    }

    #[test]
    fn every_shipped_example_validates() {
        for id in registry_ids() {
            let p = by_id(id).unwrap();
            let horizon = p.horizon_hint().unwrap_or(8);
            let report = validate(&p, horizon);
            assert!(report.is_ok(), "{id} failed validation:\n{report}");
        }
    }

    #[test]
    fn enumerations_are_deterministic() {
        let p = cylinder_timedep();
        for t in 0..8 {
            assert_eq!(p.enumerate_states(t), p.enumerate_states(t));
            for x in p.enumerate_states(t) {
                assert_eq!(p.enumerate_ctrls(t, &x), p.enumerate_ctrls(t, &x));
            }
        }
    }

    #[test]
    fn det_cylinder_is_time_translation_invariant() {
        let p = cylinder_det();
        let at0 = backwards_induction(&p, 0, 3, &SolveOptions::default()).unwrap();
        let at5 = backwards_induction(&p, 5, 3, &SolveOptions::default()).unwrap();
        for (a, b) in at0.tables.iter().zip(at5.tables.iter()) {
            assert_eq!(a.n, b.n);
            for (x, v) in &a.values {
                assert_eq!(b.values[x], *v, "value at {} for n={}", x, a.n);
            }
        }
    }

    /// Textbook 0/1 knapsack table, independent of the solver.
    fn knapsack_dp(capacity: usize, items: &[(usize, f64)]) -> f64 {
        let mut best = vec![0.0f64; capacity + 1];
        for (w, v) in items {
            for cap in (0..=capacity).rev() {
                if *w <= cap && best[cap - w] + v > best[cap] {
                    best[cap] = best[cap - w] + v;
                }
            }
        }
        best[capacity]
    }

    #[test]
    fn knapsack_matches_the_textbook_table() {
        let items = [(2u64, 3.0), (3u64, 4.0), (4u64, 5.0)];
        let p = knapsack(5, &items);
        let sol = backwards_induction(&p, 0, 3, &SolveOptions::default()).unwrap();
        let full = resolve_state(&p, 0, "5").unwrap();
        let expect = knapsack_dp(5, &[(2, 3.0), (3, 4.0), (4, 5.0)]);
        assert_eq!(expect, 7.0);
        assert!((sol.tables[0].values[&full] - expect).abs() < 1e-9);

        for cap in 0..=6u64 {
            let p = knapsack(cap, &items);
            let sol = backwards_induction(&p, 0, 3, &SolveOptions::default()).unwrap();
            let start = resolve_state(&p, 0, &cap.to_string()).unwrap();
            let expect = knapsack_dp(cap as usize, &[(2, 3.0), (3, 4.0), (4, 5.0)]);
            assert!(
                (sol.tables[0].values[&start] - expect).abs() < 1e-9,
                "capacity {cap}"
            );
        }
    }

    #[test]
    fn zero_capacity_only_skips() {
        let p = knapsack(0, &[(2, 3.0), (3, 4.0)]);
        for t in 0..2 {
            let zero = resolve_state(&p, t, "0").unwrap();
            let ctrls = p.enumerate_ctrls(t, &zero);
            let keys: Vec<&str> = ctrls.iter().map(|y| y.key()).collect();
            assert_eq!(keys, vec!["Skip"]);
        }
        let sol = backwards_induction(&p, 0, 2, &SolveOptions::default()).unwrap();
        let zero = resolve_state(&p, 0, "0").unwrap();
        assert_eq!(sol.tables[0].values[&zero], 0.0);
    }
}
