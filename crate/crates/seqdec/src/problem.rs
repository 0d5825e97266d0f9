//! The user-facing problem interface: time-indexed state layers, control
//! enumerations, the monadic transition, the reward and the aggregation
//! measure, plus well-posedness validation.

use crate::error::Error;
use crate::uncertainty::{Canon, Container, UncertaintyKind, PROB_TOL};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

macro_rules! domain_value {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name {
            rank: u64,
            key: String,
        }

        impl $name {
            /// Value ordered by its key alone.
            pub fn new(key: impl Into<String>) -> Self {
                $name { rank: 0, key: key.into() }
            }

            /// Value with an explicit position in the problem-supplied
            /// total order. Keys must stay injective per problem.
            pub fn ranked(rank: u64, key: impl Into<String>) -> Self {
                $name { rank, key: key.into() }
            }

            pub fn key(&self) -> &str {
                &self.key
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.key)
            }
        }

        impl Canon for $name {
            fn canon_cmp(&self, other: &Self) -> Ordering {
                self.cmp(other)
            }
        }
    };
}

domain_value!(
    /// An observable state. Opaque to the framework: all it needs is the
    /// total order and the canonical string key.
    StateValue
);
domain_value!(
    /// A control (action) selectable in a state at a decision step.
    CtrlValue
);

/// Aggregation of a container of values into a single number.
///
/// The three shipped measures satisfy the monotonicity contract checked by
/// `laws::measure_law_suite`. An `Unchecked` measure is refused by the
/// verified solver path unless explicitly allowed.
#[derive(Clone)]
pub enum Measure {
    Expected,
    Worst,
    Best,
    Unchecked {
        name: &'static str,
        f: fn(&Container<f64>) -> f64,
    },
}

impl fmt::Debug for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Measure {
    pub fn name(&self) -> &'static str {
        match self {
            Measure::Expected => "expected",
            Measure::Worst => "worst",
            Measure::Best => "best",
            Measure::Unchecked { name, .. } => name,
        }
    }

    pub fn parse(s: &str) -> Option<Measure> {
        match s {
            "expected" => Some(Measure::Expected),
            "worst" => Some(Measure::Worst),
            "best" => Some(Measure::Best),
            _ => None,
        }
    }

    /// Whether the measure is one of the shipped, monotonicity-checked ones.
    pub fn is_checked(&self) -> bool {
        !matches!(self, Measure::Unchecked { .. })
    }

    pub fn apply(&self, m: &Container<f64>) -> Result<f64, Error> {
        match self {
            Measure::Expected => meas_expected(m),
            Measure::Worst => meas_worst(m),
            Measure::Best => meas_best(m),
            Measure::Unchecked { f, .. } => Ok(f(m)),
        }
    }
}

/// Probability-weighted mean over the canonical support. A deterministic
/// container is treated as a point mass; non-deterministic input has no
/// expectation and is rejected.
pub fn meas_expected(m: &Container<f64>) -> Result<f64, Error> {
    match m {
        Container::Single(v) => Ok(*v),
        Container::Set(_) => Err(Error::KindMismatch {
            expected: UncertaintyKind::Stochastic,
            found: UncertaintyKind::NonDeterministic,
        }),
        Container::Dist(_) => Ok(m
            .weighted_support()
            .iter()
            .map(|(v, p)| v * p)
            .sum()),
    }
}

/// Minimum over the canonical support.
pub fn meas_worst(m: &Container<f64>) -> Result<f64, Error> {
    m.support()
        .into_iter()
        .min_by(|a, b| a.total_cmp(b))
        .ok_or(Error::EmptyContainer)
}

/// Maximum over the canonical support.
pub fn meas_best(m: &Container<f64>) -> Result<f64, Error> {
    m.support()
        .into_iter()
        .max_by(|a, b| a.total_cmp(b))
        .ok_or(Error::EmptyContainer)
}

/// A finite-horizon sequential decision problem.
///
/// `enumerate_states(t)` is the layer of valid states at step `t`;
/// `enumerate_ctrls` the controls selectable in a state at a step. Both
/// must be duplicate-free and sorted by the value order. `step` must land
/// inside the next layer and never return an empty container; `validate`
/// checks exactly these conditions.
pub trait SdpProblem {
    fn kind(&self) -> UncertaintyKind;

    fn horizon_hint(&self) -> Option<usize> {
        None
    }

    fn enumerate_states(&self, t: usize) -> Vec<StateValue>;

    fn enumerate_ctrls(&self, t: usize, x: &StateValue) -> Vec<CtrlValue>;

    fn step(&self, t: usize, x: &StateValue, y: &CtrlValue) -> Container<StateValue>;

    fn reward(&self, t: usize, x: &StateValue, y: &CtrlValue, next: &StateValue) -> f64;

    fn measure(&self) -> Measure;

    fn meas(&self, m: &Container<f64>) -> Result<f64, Error> {
        self.measure().apply(m)
    }
}

impl SdpProblem for Box<dyn SdpProblem> {
    fn kind(&self) -> UncertaintyKind {
        (**self).kind()
    }
    fn horizon_hint(&self) -> Option<usize> {
        (**self).horizon_hint()
    }
    fn enumerate_states(&self, t: usize) -> Vec<StateValue> {
        (**self).enumerate_states(t)
    }
    fn enumerate_ctrls(&self, t: usize, x: &StateValue) -> Vec<CtrlValue> {
        (**self).enumerate_ctrls(t, x)
    }
    fn step(&self, t: usize, x: &StateValue, y: &CtrlValue) -> Container<StateValue> {
        (**self).step(t, x, y)
    }
    fn reward(&self, t: usize, x: &StateValue, y: &CtrlValue, next: &StateValue) -> f64 {
        (**self).reward(t, x, y, next)
    }
    fn measure(&self) -> Measure {
        (**self).measure()
    }
}

/// Wraps a problem with a different aggregation measure.
pub struct MeasureOverride<P> {
    inner: P,
    measure: Measure,
}

impl<P: SdpProblem> MeasureOverride<P> {
    pub fn new(inner: P, measure: Measure) -> Self {
        MeasureOverride { inner, measure }
    }
}

impl<P: SdpProblem> SdpProblem for MeasureOverride<P> {
    fn kind(&self) -> UncertaintyKind {
        self.inner.kind()
    }
    fn horizon_hint(&self) -> Option<usize> {
        self.inner.horizon_hint()
    }
    fn enumerate_states(&self, t: usize) -> Vec<StateValue> {
        self.inner.enumerate_states(t)
    }
    fn enumerate_ctrls(&self, t: usize, x: &StateValue) -> Vec<CtrlValue> {
        self.inner.enumerate_ctrls(t, x)
    }
    fn step(&self, t: usize, x: &StateValue, y: &CtrlValue) -> Container<StateValue> {
        self.inner.step(t, x, y)
    }
    fn reward(&self, t: usize, x: &StateValue, y: &CtrlValue, next: &StateValue) -> f64 {
        self.inner.reward(t, x, y, next)
    }
    fn measure(&self) -> Measure {
        self.measure.clone()
    }
}

/// Resolves a state key against the layer at `t`.
pub fn resolve_state(p: &dyn SdpProblem, t: usize, key: &str) -> Option<StateValue> {
    p.enumerate_states(t).into_iter().find(|x| x.key() == key)
}

/// Resolves a control key against the controls of `(t, x)`.
pub fn resolve_ctrl(p: &dyn SdpProblem, t: usize, x: &StateValue, key: &str) -> Option<CtrlValue> {
    p.enumerate_ctrls(t, x).into_iter().find(|y| y.key() == key)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// `step` returned an empty container.
    Empty,
    /// A possible next state is not a member of the next layer.
    Layer,
    /// Distribution masses are negative or do not sum to 1.
    Normalization,
    /// A layer or control enumeration is unsorted or has duplicates.
    Enumeration,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::Empty => "EMPTY",
            ViolationKind::Layer => "LAYER",
            ViolationKind::Normalization => "NORMALIZATION",
            ViolationKind::Enumeration => "ENUMERATION",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct Violation {
    pub kind: ViolationKind,
    pub t: usize,
    pub x: Option<String>,
    pub y: Option<String>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} t={} x={} y={} detail={}",
            self.kind,
            self.t,
            self.x.as_deref().unwrap_or("-"),
            self.y.as_deref().unwrap_or("-"),
            self.detail
        )
    }
}

/// Outcome of checking a problem's well-posedness. Violations are data,
/// not exceptions; an empty report means the problem passed.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

fn check_sorted<T: Canon>(items: &[T]) -> bool {
    items
        .windows(2)
        .all(|w| w[0].canon_cmp(&w[1]) == Ordering::Less)
}

/// Checks, for every `t <= max_t`, every state of layer `t` and every
/// control available there: the step output is non-empty, normalized and
/// lands inside layer `t+1`. Enumeration order is checked as well.
pub fn validate(p: &dyn SdpProblem, max_t: usize) -> ValidationReport {
    let mut report = ValidationReport::default();
    for t in 0..=max_t {
        let layer = p.enumerate_states(t);
        if !check_sorted(&layer) {
            report.violations.push(Violation {
                kind: ViolationKind::Enumeration,
                t,
                x: None,
                y: None,
                detail: "state layer is unsorted or has duplicates".into(),
            });
        }
        let next_layer = p.enumerate_states(t + 1);
        for x in &layer {
            let ctrls = p.enumerate_ctrls(t, x);
            if !check_sorted(&ctrls) {
                report.violations.push(Violation {
                    kind: ViolationKind::Enumeration,
                    t,
                    x: Some(x.key().to_owned()),
                    y: None,
                    detail: "control enumeration is unsorted or has duplicates".into(),
                });
            }
            for y in &ctrls {
                let out = p.step(t, x, y);
                if out.is_empty() {
                    report.violations.push(Violation {
                        kind: ViolationKind::Empty,
                        t,
                        x: Some(x.key().to_owned()),
                        y: Some(y.key().to_owned()),
                        detail: "step returned an empty container".into(),
                    });
                    continue;
                }
                if let Container::Dist(d) = &out {
                    let mut bad = None;
                    for (_, prob) in d.entries() {
                        if *prob < 0.0 {
                            bad = Some(format!("negative probability {prob}"));
                            break;
                        }
                    }
                    let sum = d.total_mass();
                    if bad.is_none() && (sum - 1.0).abs() > PROB_TOL {
                        bad = Some(format!("probabilities sum to {sum}"));
                    }
                    if let Some(detail) = bad {
                        report.violations.push(Violation {
                            kind: ViolationKind::Normalization,
                            t,
                            x: Some(x.key().to_owned()),
                            y: Some(y.key().to_owned()),
                            detail,
                        });
                    }
                }
                for next in out.support() {
                    if !next_layer.iter().any(|s| s == &next) {
                        report.violations.push(Violation {
                            kind: ViolationKind::Layer,
                            t,
                            x: Some(x.key().to_owned()),
                            y: Some(y.key().to_owned()),
                            detail: format!("next state `{}` is not in layer t={}", next, t + 1),
                        });
                    }
                }
            }
        }
    }
    report
}

/// A problem held entirely in lookup tables. This is what problem files
/// parse into; tests use it to construct ad-hoc instances.
#[derive(Debug, Clone)]
pub struct TableProblem {
    pub kind: UncertaintyKind,
    pub layers: Vec<Vec<StateValue>>,
    pub ctrls: BTreeMap<(usize, StateValue), Vec<CtrlValue>>,
    pub steps: BTreeMap<(usize, StateValue, CtrlValue), Container<StateValue>>,
    pub rewards: BTreeMap<(usize, StateValue, CtrlValue, StateValue), f64>,
    pub source_rewards: BTreeMap<StateValue, f64>,
    pub measure: Measure,
}

impl TableProblem {
    pub fn new(kind: UncertaintyKind, measure: Measure) -> Self {
        TableProblem {
            kind,
            layers: Vec::new(),
            ctrls: BTreeMap::new(),
            steps: BTreeMap::new(),
            rewards: BTreeMap::new(),
            source_rewards: BTreeMap::new(),
            measure,
        }
    }

    fn empty_container(&self) -> Container<StateValue> {
        match self.kind {
            UncertaintyKind::Deterministic => {
                // A deterministic step with no entry cannot be represented
                // as an empty single value; surface it as an empty set so
                // the validator reports it.
                Container::Set(crate::uncertainty::NonDetSet::new(Vec::new()))
            }
            UncertaintyKind::NonDeterministic => {
                Container::Set(crate::uncertainty::NonDetSet::new(Vec::new()))
            }
            UncertaintyKind::Stochastic => {
                Container::Dist(crate::uncertainty::SimpleProb::new_unchecked(Vec::new()))
            }
        }
    }
}

impl SdpProblem for TableProblem {
    fn kind(&self) -> UncertaintyKind {
        self.kind
    }

    fn horizon_hint(&self) -> Option<usize> {
        self.layers.len().checked_sub(1)
    }

    fn enumerate_states(&self, t: usize) -> Vec<StateValue> {
        self.layers.get(t).cloned().unwrap_or_default()
    }

    fn enumerate_ctrls(&self, t: usize, x: &StateValue) -> Vec<CtrlValue> {
        self.ctrls.get(&(t, x.clone())).cloned().unwrap_or_default()
    }

    fn step(&self, t: usize, x: &StateValue, y: &CtrlValue) -> Container<StateValue> {
        self.steps
            .get(&(t, x.clone(), y.clone()))
            .cloned()
            .unwrap_or_else(|| self.empty_container())
    }

    fn reward(&self, t: usize, x: &StateValue, y: &CtrlValue, next: &StateValue) -> f64 {
        if let Some(r) = self
            .rewards
            .get(&(t, x.clone(), y.clone(), next.clone()))
        {
            return *r;
        }
        self.source_rewards.get(x).copied().unwrap_or(0.0)
    }

    fn measure(&self) -> Measure {
        self.measure.clone()
    }
}
