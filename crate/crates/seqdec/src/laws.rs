//! Executable law suites over randomized containers.
//!
//! The container laws (functor, monad, membership, tagging) and the
//! measure monotonicity contract are checked here on seeded random
//! inputs, so the same suites can run inside `verify` on the command
//! line and in the acceptance tests with deterministic outcomes.

use crate::problem::Measure;
use crate::rng::Rng;
use crate::uncertainty::{Container, NonDetSet, SimpleProb, UncertaintyKind, PROB_TOL};
use std::fmt;

/// Numeric tolerance for the measure monotonicity checks.
pub const MEAS_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct LawReport {
    pub name: String,
    pub cases: u32,
    pub failures: u32,
    pub first_failure: Option<String>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            write!(f, "{} PASS ({} cases)", self.name, self.cases)
        } else {
            write!(
                f,
                "{} FAIL ({}/{} cases): {}",
                self.name,
                self.failures,
                self.cases,
                self.first_failure.as_deref().unwrap_or("")
            )
        }
    }
}

fn run_law(
    name: &str,
    cases: u32,
    seed: u64,
    mut case: impl FnMut(&mut Rng) -> Result<(), String>,
) -> LawReport {
    let mut rng = Rng::new(seed);
    let mut failures = 0;
    let mut first_failure = None;
    for _ in 0..cases {
        if let Err(msg) = case(&mut rng) {
            failures += 1;
            if first_failure.is_none() {
                first_failure = Some(msg);
            }
        }
    }
    LawReport {
        name: name.to_owned(),
        cases,
        failures,
        first_failure,
    }
}

const VALUE_RANGE: u64 = 8;

fn gen_container(kind: UncertaintyKind, rng: &mut Rng) -> Container<i64> {
    let size = 1 + rng.below(4) as usize;
    match kind {
        UncertaintyKind::Deterministic => Container::Single(rng.below(VALUE_RANGE) as i64),
        UncertaintyKind::NonDeterministic => Container::Set(NonDetSet::new(
            (0..size).map(|_| rng.below(VALUE_RANGE) as i64).collect(),
        )),
        UncertaintyKind::Stochastic => {
            let raw: Vec<(i64, f64)> = (0..size)
                .map(|_| (rng.below(VALUE_RANGE) as i64, rng.range_f64(0.05, 1.0)))
                .collect();
            let total: f64 = raw.iter().map(|(_, w)| w).sum();
            let entries = raw.into_iter().map(|(a, w)| (a, w / total)).collect();
            Container::Dist(SimpleProb::new(entries).expect("normalized by construction"))
        }
    }
}

/// A pure per-value Kleisli arrow of the given kind, derived from `salt`.
fn gen_kleisli(kind: UncertaintyKind, salt: u64) -> impl Fn(&i64) -> Container<i64> {
    move |x| {
        let mut local = Rng::new(salt ^ (*x as u64).wrapping_mul(0x9E37_79B9));
        let a = local.below(16) as i64;
        let b = local.below(16) as i64;
        match kind {
            UncertaintyKind::Deterministic => Container::Single(a),
            UncertaintyKind::NonDeterministic => Container::Set(NonDetSet::new(vec![a, b])),
            UncertaintyKind::Stochastic => {
                let w = local.range_f64(0.1, 0.9);
                Container::Dist(
                    SimpleProb::new_unchecked(vec![(a, w), (b, 1.0 - w)]).canonicalized(),
                )
            }
        }
    }
}

/// Runs the functor, monad, membership and tagging laws for one kind.
pub fn container_law_suite(kind: UncertaintyKind, cases: u32, seed: u64) -> Vec<LawReport> {
    let mut reports = Vec::new();

    reports.push(run_law("functor_identity", cases, seed, |rng| {
        let c = gen_container(kind, rng);
        if c.fmap(|x| *x).approx_eq(&c) {
            Ok(())
        } else {
            Err(format!("fmap id changed {c}"))
        }
    }));

    reports.push(run_law("functor_composition", cases, seed ^ 1, |rng| {
        let c = gen_container(kind, rng);
        let a = rng.below(7) as i64 - 3;
        let b = rng.below(7) as i64 - 3;
        let f = |x: &i64| x.wrapping_mul(a);
        let g = |x: &i64| x.wrapping_add(b);
        let lhs = c.fmap(|x| f(&g(x)));
        let rhs = c.fmap(g).fmap(f);
        if lhs.approx_eq(&rhs) {
            Ok(())
        } else {
            Err(format!("fmap (f.g) {lhs} != fmap f . fmap g {rhs}"))
        }
    }));

    reports.push(run_law("monad_ret_fmap", cases, seed ^ 2, |rng| {
        let x = rng.below(VALUE_RANGE) as i64;
        let k = rng.below(16) as i64;
        let f = |v: &i64| v.wrapping_mul(3).wrapping_add(k);
        let lhs = Container::ret(kind, x).fmap(f);
        let rhs = Container::ret(kind, f(&x));
        if lhs.approx_eq(&rhs) {
            Ok(())
        } else {
            Err(format!("fmap f (ret {x}) != ret (f {x})"))
        }
    }));

    reports.push(run_law("monad_left_identity", cases, seed ^ 3, |rng| {
        let x = rng.below(VALUE_RANGE) as i64;
        let f = gen_kleisli(kind, rng.next_u64());
        let lhs = Container::ret(kind, x)
            .bind(&f)
            .map_err(|e| e.to_string())?;
        if lhs.approx_eq(&f(&x)) {
            Ok(())
        } else {
            Err(format!("ret {x} >>= f != f {x}"))
        }
    }));

    reports.push(run_law("monad_right_identity", cases, seed ^ 4, |rng| {
        let c = gen_container(kind, rng);
        let out = c
            .bind(|x| Container::ret(kind, *x))
            .map_err(|e| e.to_string())?;
        if out.approx_eq(&c) {
            Ok(())
        } else {
            Err(format!("{c} >>= ret gave {out}"))
        }
    }));

    reports.push(run_law("monad_associativity", cases, seed ^ 5, |rng| {
        let c = gen_container(kind, rng);
        let f = gen_kleisli(kind, rng.next_u64());
        let g = gen_kleisli(kind, rng.next_u64());
        let lhs = c
            .bind(&f)
            .and_then(|m| m.bind(&g))
            .map_err(|e| e.to_string())?;
        let rhs = c
            .bind(|a| f(a).bind(&g).expect("kinds agree"))
            .map_err(|e| e.to_string())?;
        if lhs.approx_eq(&rhs) {
            Ok(())
        } else {
            Err(format!("associativity broke on {c}: {lhs} != {rhs}"))
        }
    }));

    reports.push(run_law("all_true_of_ret", 2, seed ^ 6, {
        let mut flip = false;
        move |_rng| {
            flip = !flip;
            let b = flip;
            if Container::ret(kind, b).all_true() == b {
                Ok(())
            } else {
                Err(format!("all_true (ret {b}) != {b}"))
            }
        }
    }));

    reports.push(run_law(
        "contained_implies_predicate",
        cases,
        seed ^ 7,
        |rng| {
            let c = gen_container(kind, rng);
            let threshold = rng.below(VALUE_RANGE + 1) as i64;
            let pred = |x: &i64| *x < threshold;
            if c.fmap(|x| pred(x)).all_true() {
                for x in c.support() {
                    if !pred(&x) {
                        return Err(format!("{x} in {c} fails the checked predicate"));
                    }
                }
            }
            Ok(())
        },
    ));

    reports.push(run_law("tag_members_projection", cases, seed ^ 8, |rng| {
        let c = gen_container(kind, rng);
        if c.tag_members().fmap(|(a, _)| *a).approx_eq(&c) {
            Ok(())
        } else {
            Err(format!("projecting tags changed {c}"))
        }
    }));

    reports.push(run_law("mass_normalization", cases, seed ^ 9, |rng| {
        let c = gen_container(kind, rng);
        let f = gen_kleisli(kind, rng.next_u64());
        let piped = c
            .fmap(|x| x % 3)
            .bind(&f)
            .map_err(|e| e.to_string())?;
        if let Container::Dist(d) = piped {
            let mass = d.total_mass();
            if (mass - 1.0).abs() > PROB_TOL {
                return Err(format!("mass drifted to {mass}"));
            }
        }
        Ok(())
    }));

    reports
}

/// Checks the measure monotonicity contract: pointwise `f <= g` implies
/// `meas (fmap f mx) <= meas (fmap g mx)`.
pub fn measure_law_suite(
    measure: &Measure,
    kind: UncertaintyKind,
    cases: u32,
    seed: u64,
) -> Vec<LawReport> {
    let name = format!("meas_monotone[{},{}]", measure.name(), kind);
    vec![run_law(&name, cases, seed, |rng| {
        let mx = gen_container(kind, rng);
        let f_table: Vec<f64> = (0..VALUE_RANGE).map(|_| rng.range_f64(-10.0, 10.0)).collect();
        let g_table: Vec<f64> = f_table
            .iter()
            .map(|v| v + rng.range_f64(0.0, 5.0))
            .collect();
        let f = |x: &i64| f_table[*x as usize % VALUE_RANGE as usize];
        let g = |x: &i64| g_table[*x as usize % VALUE_RANGE as usize];
        let lhs = measure
            .apply(&mx.fmap(f))
            .map_err(|e| e.to_string())?;
        let rhs = measure
            .apply(&mx.fmap(g))
            .map_err(|e| e.to_string())?;
        if lhs <= rhs + MEAS_TOL {
            Ok(())
        } else {
            Err(format!("meas(fmap f) = {lhs} > meas(fmap g) = {rhs} on {mx}"))
        }
    })]
}

/// Kinds a measure can aggregate.
pub fn applicable_kinds(measure: &Measure) -> Vec<UncertaintyKind> {
    match measure {
        Measure::Expected => vec![
            UncertaintyKind::Deterministic,
            UncertaintyKind::Stochastic,
        ],
        _ => vec![
            UncertaintyKind::Deterministic,
            UncertaintyKind::NonDeterministic,
            UncertaintyKind::Stochastic,
        ],
    }
}
