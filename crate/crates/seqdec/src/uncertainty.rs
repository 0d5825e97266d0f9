//! Uncertainty containers: the monadic structure of possible next states.
//!
//! A transition can produce a single next state (deterministic), a finite
//! set of next states (non-deterministic) or a finite-support probability
//! distribution over next states (stochastic). [`Container`] covers the
//! three cases behind one interface with `ret`, `fmap` and `bind`.
//!
//! Containers are immutable values. Every operation returns a *canonical*
//! container: support sorted by the element order, duplicates merged (set
//! union for sets, mass summed for distributions), zero-mass entries
//! dropped. Canonical form is what makes container equality decidable and
//! text output byte-stable.

use crate::error::Error;
use std::cmp::Ordering;
use std::fmt;

/// Absolute tolerance for probability normalization and for comparing
/// probabilities of canonical containers.
pub const PROB_TOL: f64 = 1e-9;

/// Which of the three uncertainty shapes a container carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UncertaintyKind {
    Deterministic,
    NonDeterministic,
    Stochastic,
}

impl fmt::Display for UncertaintyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            UncertaintyKind::Deterministic => "deterministic",
            UncertaintyKind::NonDeterministic => "nondeterministic",
            UncertaintyKind::Stochastic => "stochastic",
        };
        f.write_str(s)
    }
}

impl UncertaintyKind {
    pub fn parse(s: &str) -> Option<UncertaintyKind> {
        match s {
            "deterministic" | "det" => Some(UncertaintyKind::Deterministic),
            "nondeterministic" | "non-deterministic" | "nondet" => {
                Some(UncertaintyKind::NonDeterministic)
            }
            "stochastic" | "stoch" => Some(UncertaintyKind::Stochastic),
            _ => None,
        }
    }
}

/// Total order used to canonicalize container contents.
///
/// Every type stored in a container must supply one; it is the order of
/// the canonical serialization and the merge criterion for duplicates.
pub trait Canon: Clone {
    fn canon_cmp(&self, other: &Self) -> Ordering;

    fn canon_eq(&self, other: &Self) -> bool {
        self.canon_cmp(other) == Ordering::Equal
    }
}

macro_rules! canon_via_ord {
    ($($t:ty),* $(,)?) => {
        $(impl Canon for $t {
            fn canon_cmp(&self, other: &Self) -> Ordering {
                self.cmp(other)
            }
        })*
    };
}

canon_via_ord!(bool, i32, i64, u32, u64, usize, char, String);

impl Canon for &str {
    fn canon_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
}

impl Canon for f64 {
    fn canon_cmp(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }
}

impl<A: Canon, B: Canon> Canon for (A, B) {
    fn canon_cmp(&self, other: &Self) -> Ordering {
        self.0
            .canon_cmp(&other.0)
            .then_with(|| self.1.canon_cmp(&other.1))
    }
}

/// Witness that a value was observed inside the container that produced it.
///
/// Only [`Container::tag_members`] can mint one, so holding a `Membership`
/// certifies that the paired value belongs to the source container.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Membership(());

impl Canon for Membership {
    fn canon_cmp(&self, _other: &Self) -> Ordering {
        Ordering::Equal
    }
}

/// Finite, duplicate-free, sorted set of possible outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct NonDetSet<A> {
    members: Vec<A>,
}

impl<A: Canon> NonDetSet<A> {
    pub fn new(mut members: Vec<A>) -> Self {
        members.sort_by(|a, b| a.canon_cmp(b));
        members.dedup_by(|a, b| a.canon_eq(b));
        NonDetSet { members }
    }

    pub fn members(&self) -> &[A] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Finite-support probability distribution.
///
/// Entries may be held in raw (non-canonical) form, e.g. straight from a
/// problem file; `canonicalized` sorts the support, merges duplicate
/// values by summing their mass and drops zero-mass entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleProb<A> {
    entries: Vec<(A, f64)>,
    canonical: bool,
}

impl<A: Canon> SimpleProb<A> {
    /// Builds a distribution, rejecting negative masses and support whose
    /// total mass is not 1 within [`PROB_TOL`].
    pub fn new(entries: Vec<(A, f64)>) -> Result<Self, Error> {
        for (_, p) in &entries {
            if *p < 0.0 {
                return Err(Error::NegativeProbability { prob: *p });
            }
        }
        let sum: f64 = entries.iter().map(|(_, p)| p).sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(SimpleProb {
            entries,
            canonical: false,
        })
    }

    /// Builds a distribution without validating it. Validation is the
    /// job of `problem::validate`, which reports bad mass as violations
    /// instead of refusing to represent it.
    pub fn new_unchecked(entries: Vec<(A, f64)>) -> Self {
        SimpleProb {
            entries,
            canonical: false,
        }
    }

    /// Point mass at `a`.
    pub fn point(a: A) -> Self {
        SimpleProb {
            entries: vec![(a, 1.0)],
            canonical: true,
        }
    }

    pub fn entries(&self) -> &[(A, f64)] {
        &self.entries
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    pub fn canonicalized(mut self) -> Self {
        if self.canonical {
            return self;
        }
        self.entries.sort_by(|a, b| a.0.canon_cmp(&b.0));
        let mut merged: Vec<(A, f64)> = Vec::with_capacity(self.entries.len());
        for (a, p) in self.entries {
            match merged.last_mut() {
                Some((last, mass)) if last.canon_eq(&a) => *mass += p,
                _ => merged.push((a, p)),
            }
        }
        merged.retain(|(_, p)| *p != 0.0);
        SimpleProb {
            entries: merged,
            canonical: true,
        }
    }
}

/// A monadic container of possible values: one, a set, or a distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum Container<A> {
    Single(A),
    Set(NonDetSet<A>),
    Dist(SimpleProb<A>),
}

impl<A: Canon> Container<A> {
    /// Monadic return: wraps one value in the requested kind.
    pub fn ret(kind: UncertaintyKind, x: A) -> Self {
        match kind {
            UncertaintyKind::Deterministic => Container::Single(x),
            UncertaintyKind::NonDeterministic => Container::Set(NonDetSet::new(vec![x])),
            UncertaintyKind::Stochastic => Container::Dist(SimpleProb::point(x)),
        }
    }

    pub fn kind(&self) -> UncertaintyKind {
        match self {
            Container::Single(_) => UncertaintyKind::Deterministic,
            Container::Set(_) => UncertaintyKind::NonDeterministic,
            Container::Dist(_) => UncertaintyKind::Stochastic,
        }
    }

    pub fn canonicalize(self) -> Self {
        match self {
            Container::Single(a) => Container::Single(a),
            Container::Set(s) => Container::Set(NonDetSet::new(s.members)),
            Container::Dist(d) => Container::Dist(d.canonicalized()),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Container::Single(_) => false,
            Container::Set(s) => s.is_empty(),
            Container::Dist(d) => d.clone().canonicalized().entries.is_empty(),
        }
    }

    /// Values in the canonical support, in canonical order.
    pub fn support(&self) -> Vec<A> {
        match self.clone().canonicalize() {
            Container::Single(a) => vec![a],
            Container::Set(s) => s.members,
            Container::Dist(d) => d.entries.into_iter().map(|(a, _)| a).collect(),
        }
    }

    /// Canonical (value, probability) pairs; sets and single values are
    /// reported with probability 1 per entry.
    pub fn weighted_support(&self) -> Vec<(A, f64)> {
        match self.clone().canonicalize() {
            Container::Single(a) => vec![(a, 1.0)],
            Container::Set(s) => s.members.into_iter().map(|a| (a, 1.0)).collect(),
            Container::Dist(d) => d.entries,
        }
    }

    pub fn support_len(&self) -> usize {
        self.support().len()
    }

    /// Functor map; the result is canonicalized, so values that collide
    /// under `f` are merged.
    pub fn fmap<B: Canon>(&self, mut f: impl FnMut(&A) -> B) -> Container<B> {
        match self {
            Container::Single(a) => Container::Single(f(a)),
            Container::Set(s) => {
                Container::Set(NonDetSet::new(s.members.iter().map(&mut f).collect()))
            }
            Container::Dist(d) => {
                let entries = d.entries.iter().map(|(a, p)| (f(a), *p)).collect();
                Container::Dist(SimpleProb::new_unchecked(entries).canonicalized())
            }
        }
    }

    /// Monadic bind. Every container produced by `f` must have the same
    /// kind as `self`; for distributions this is the total probability
    /// law (masses multiply along paths and sum per outcome).
    pub fn bind<B: Canon>(
        &self,
        mut f: impl FnMut(&A) -> Container<B>,
    ) -> Result<Container<B>, Error> {
        let kind = self.kind();
        let check = |c: &Container<B>| -> Result<(), Error> {
            if c.kind() != kind {
                Err(Error::KindMismatch {
                    expected: kind,
                    found: c.kind(),
                })
            } else {
                Ok(())
            }
        };
        match self.clone().canonicalize() {
            Container::Single(a) => {
                let out = f(&a);
                check(&out)?;
                Ok(out)
            }
            Container::Set(s) => {
                let mut members = Vec::new();
                for a in s.members() {
                    let out = f(a);
                    check(&out)?;
                    if let Container::Set(inner) = out {
                        members.extend(inner.members);
                    }
                }
                Ok(Container::Set(NonDetSet::new(members)))
            }
            Container::Dist(d) => {
                let mut entries = Vec::new();
                for (a, p) in d.entries() {
                    let out = f(a);
                    check(&out)?;
                    if let Container::Dist(inner) = out {
                        for (b, q) in inner.canonicalized().entries {
                            entries.push((b, p * q));
                        }
                    }
                }
                Ok(Container::Dist(
                    SimpleProb::new_unchecked(entries).canonicalized(),
                ))
            }
        }
    }

    /// Membership over the canonical support (strictly positive mass for
    /// distributions).
    pub fn contains(&self, x: &A) -> bool {
        self.support().iter().any(|a| a.canon_eq(x))
    }

    /// Pairs every contained value with a [`Membership`] witness.
    /// Projecting the value back yields a container equal to `self`.
    pub fn tag_members(&self) -> Container<(A, Membership)> {
        self.fmap(|a| (a.clone(), Membership(())))
    }

    /// Equality of canonical forms, with probabilities compared to
    /// [`PROB_TOL`].
    pub fn approx_eq(&self, other: &Self) -> bool {
        if self.kind() != other.kind() {
            return false;
        }
        let a = self.weighted_support();
        let b = other.weighted_support();
        a.len() == b.len()
            && a.iter()
                .zip(b.iter())
                .all(|((x, p), (y, q))| x.canon_eq(y) && (p - q).abs() <= PROB_TOL)
    }
}

impl Container<bool> {
    /// Conjunction over the canonical support.
    pub fn all_true(&self) -> bool {
        self.support().iter().all(|b| *b)
    }
}

impl<A: Canon + fmt::Display> fmt::Display for Container<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.clone().canonicalize() {
            Container::Single(a) => write!(f, "={a}"),
            Container::Set(s) => {
                write!(f, "{{")?;
                for (i, a) in s.members().iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, "}}")
            }
            Container::Dist(d) => {
                write!(f, "{{")?;
                for (i, (a, p)) in d.entries().iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}:{p:.9}")?;
                }
                write!(f, "}}")
            }
        }
    }
}
