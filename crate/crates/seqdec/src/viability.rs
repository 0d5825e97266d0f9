//! Viability and reachability over time-indexed state layers.
//!
//! A state is viable for `n` steps when some chain of feasible controls of
//! length `n` exists from it; a control is feasible when *all* its possible
//! next states are viable for the remaining steps. A state is reachable
//! when some control choices from some start-layer state can produce it.
//! Both predicates are computed as memoized whole-layer tables, never by
//! naive recursion.

use crate::error::Error;
use crate::problem::{CtrlValue, SdpProblem, StateValue};
use crate::uncertainty::Container;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// A control paired with the number of steps it is known to support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoodCtrl {
    pub ctrl: CtrlValue,
    pub feasibility_steps: usize,
}

/// One entry per available control, pairing it with its step output.
pub fn succs(
    p: &dyn SdpProblem,
    t: usize,
    x: &StateValue,
) -> Result<Vec<(CtrlValue, Container<StateValue>)>, Error> {
    if !p.enumerate_states(t).contains(x) {
        return Err(Error::InvalidState {
            t,
            key: x.key().to_owned(),
        });
    }
    Ok(p.enumerate_ctrls(t, x)
        .into_iter()
        .map(|y| {
            let out = p.step(t, x, &y);
            (y, out)
        })
        .collect())
}

/// Memoized viability layers, keyed by `(t, n)`.
#[derive(Debug, Default)]
pub struct ViabilityTable {
    layers: BTreeMap<(usize, usize), BTreeMap<StateValue, bool>>,
}

impl ViabilityTable {
    pub fn new() -> Self {
        ViabilityTable::default()
    }

    pub fn layer(&self, t: usize, n: usize) -> Option<&BTreeMap<StateValue, bool>> {
        self.layers.get(&(t, n))
    }

    /// Fills every layer `(t + n - k, k)` for `k = 0..=n` that is missing.
    pub fn ensure(&mut self, p: &dyn SdpProblem, t: usize, n: usize) {
        for k in 0..=n {
            let tk = t + n - k;
            if self.layers.contains_key(&(tk, k)) {
                continue;
            }
            let states = p.enumerate_states(tk);
            let entries: BTreeMap<StateValue, bool> = if k == 0 {
                states.into_iter().map(|x| (x, true)).collect()
            } else {
                states
                    .into_iter()
                    .map(|x| {
                        let v = p
                            .enumerate_ctrls(tk, &x)
                            .iter()
                            .any(|y| self.feasible_in_layer(p, k - 1, tk, &x, y));
                        (x, v)
                    })
                    .collect()
            };
            self.layers.insert((tk, k), entries);
        }
    }

    fn feasible_in_layer(
        &self,
        p: &dyn SdpProblem,
        n: usize,
        t: usize,
        x: &StateValue,
        y: &CtrlValue,
    ) -> bool {
        let next = &self.layers[&(t + 1, n)];
        // States outside the declared next layer cannot continue.
        p.step(t, x, y)
            .fmap(|x_next| next.get(x_next).copied().unwrap_or(false))
            .all_true()
    }

    /// Whether an `n`-step chain of feasible controls exists from `x`.
    /// Extends the table as needed.
    pub fn viable(
        &mut self,
        p: &dyn SdpProblem,
        n: usize,
        t: usize,
        x: &StateValue,
    ) -> Result<bool, Error> {
        self.ensure(p, t, n);
        self.layers[&(t, n)]
            .get(x)
            .copied()
            .ok_or_else(|| Error::InvalidState {
                t,
                key: x.key().to_owned(),
            })
    }

    /// Whether every possible next state of `(t, x, y)` is viable for `n`
    /// steps. Requires the `(t+1, n)` layer to be present.
    pub fn feasible(
        &self,
        p: &dyn SdpProblem,
        n: usize,
        t: usize,
        x: &StateValue,
        y: &CtrlValue,
    ) -> Result<bool, Error> {
        if !self.layers.contains_key(&(t + 1, n)) {
            return Err(Error::TableMiss { t: t + 1, n });
        }
        Ok(self.feasible_in_layer(p, n, t, x, y))
    }

    /// The controls of `(t, x)` that are feasible for `n` steps, in
    /// enumeration order. Non-empty whenever `x` is viable for `n+1`.
    pub fn good_ctrls(
        &mut self,
        p: &dyn SdpProblem,
        t: usize,
        n: usize,
        x: &StateValue,
    ) -> Result<Vec<GoodCtrl>, Error> {
        if !p.enumerate_states(t).contains(x) {
            return Err(Error::InvalidState {
                t,
                key: x.key().to_owned(),
            });
        }
        self.ensure(p, t + 1, n);
        Ok(p.enumerate_ctrls(t, x)
            .into_iter()
            .filter(|y| self.feasible_in_layer(p, n, t, x, y))
            .map(|ctrl| GoodCtrl {
                ctrl,
                feasibility_steps: n,
            })
            .collect())
    }

    /// Text matrix for the layers stored at time `t`: one row per state,
    /// one column per `n`, cells `1`/`0`.
    pub fn to_matrix_text(&self, t: usize) -> String {
        let ns: Vec<usize> = self
            .layers
            .keys()
            .filter(|(lt, _)| *lt == t)
            .map(|(_, n)| *n)
            .collect();
        let mut states: Vec<&StateValue> = Vec::new();
        for n in &ns {
            for x in self.layers[&(t, *n)].keys() {
                if !states.contains(&x) {
                    states.push(x);
                }
            }
        }
        states.sort();
        let mut out = String::new();
        let _ = write!(out, "state");
        for n in &ns {
            let _ = write!(out, "\tn={n}");
        }
        out.push('\n');
        for x in states {
            let _ = write!(out, "{x}");
            for n in &ns {
                let mark = match self.layers[&(t, *n)].get(x) {
                    Some(true) => "1",
                    Some(false) => "0",
                    None => "-",
                };
                let _ = write!(out, "\t{mark}");
            }
            out.push('\n');
        }
        out
    }
}

/// Forward reachability closure from a start layer, with one stored
/// predecessor witness per reachable state.
#[derive(Debug)]
pub struct ReachabilityTable {
    start_t: usize,
    layers: Vec<BTreeMap<StateValue, bool>>,
    witnesses: Vec<BTreeMap<StateValue, (StateValue, CtrlValue)>>,
}

impl ReachabilityTable {
    /// Marks every state of layer `start_t` reachable, then closes
    /// forward through `step` up to `max_t`.
    pub fn build(p: &dyn SdpProblem, start_t: usize, max_t: usize) -> Self {
        let mut layers = Vec::with_capacity(max_t - start_t + 1);
        let mut witnesses = Vec::with_capacity(max_t - start_t + 1);
        let first: BTreeMap<StateValue, bool> = p
            .enumerate_states(start_t)
            .into_iter()
            .map(|x| (x, true))
            .collect();
        layers.push(first);
        witnesses.push(BTreeMap::new());
        for t in start_t..max_t {
            let mut next: BTreeMap<StateValue, bool> = p
                .enumerate_states(t + 1)
                .into_iter()
                .map(|x| (x, false))
                .collect();
            let mut wits: BTreeMap<StateValue, (StateValue, CtrlValue)> = BTreeMap::new();
            let here = &layers[t - start_t];
            for (x, reach) in here {
                if !*reach {
                    continue;
                }
                for y in p.enumerate_ctrls(t, x) {
                    for x_next in p.step(t, x, &y).support() {
                        if let Some(flag) = next.get_mut(&x_next) {
                            *flag = true;
                            wits.entry(x_next).or_insert_with(|| (x.clone(), y.clone()));
                        }
                    }
                }
            }
            layers.push(next);
            witnesses.push(wits);
        }
        ReachabilityTable {
            start_t,
            layers,
            witnesses,
        }
    }

    pub fn start_t(&self) -> usize {
        self.start_t
    }

    pub fn max_t(&self) -> usize {
        self.start_t + self.layers.len() - 1
    }

    pub fn reachable(&self, t: usize, x: &StateValue) -> Result<bool, Error> {
        let layer = self
            .layers
            .get(t.checked_sub(self.start_t).ok_or(Error::InvalidState {
                t,
                key: x.key().to_owned(),
            })?)
            .ok_or(Error::TableMiss { t, n: 0 })?;
        layer.get(x).copied().ok_or_else(|| Error::InvalidState {
            t,
            key: x.key().to_owned(),
        })
    }

    /// One `(state, control)` pair at `t-1` that produces `x`, when `x` is
    /// reachable and `t` is past the start layer.
    pub fn witness(&self, t: usize, x: &StateValue) -> Option<&(StateValue, CtrlValue)> {
        self.witnesses.get(t.checked_sub(self.start_t)?)?.get(x)
    }

    /// Text matrix: one row per state key, one column per time.
    pub fn to_matrix_text(&self) -> String {
        let mut states: Vec<&StateValue> = Vec::new();
        for layer in &self.layers {
            for x in layer.keys() {
                if !states.contains(&x) {
                    states.push(x);
                }
            }
        }
        states.sort();
        let mut out = String::new();
        let _ = write!(out, "state");
        for t in self.start_t..=self.max_t() {
            let _ = write!(out, "\tt={t}");
        }
        out.push('\n');
        for x in states {
            let _ = write!(out, "{x}");
            for layer in &self.layers {
                let mark = match layer.get(x) {
                    Some(true) => "1",
                    Some(false) => "0",
                    None => "-",
                };
                let _ = write!(out, "\t{mark}");
            }
            out.push('\n');
        }
        out
    }
}
