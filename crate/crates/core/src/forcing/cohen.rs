//! Finite Cohen conditions and support restriction.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

/// A coordinate and a slot.
pub type Pair = (u64, u64);

/// A finite partial map from pairs to bits. Extension is inclusion: `q ≤ p`
/// iff `q ⊇ p`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct CohenCondition(pub BTreeMap<Pair, bool>);

impl CohenCondition {
    pub fn domain(&self) -> impl Iterator<Item = Pair> + '_ {
        self.0.keys().copied()
    }

    pub fn compatible(&self, other: &CohenCondition) -> bool {
        self.0.iter().all(|(k, v)| other.0.get(k).is_none_or(|w| w == v))
    }

    pub fn extends(&self, weaker: &CohenCondition) -> bool {
        weaker.0.iter().all(|(k, v)| self.0.get(k) == Some(v))
    }

    /// The part whose coordinate lies in `d`.
    pub fn restrict(&self, d: &BTreeSet<u64>) -> CohenCondition {
        CohenCondition(self.0.iter().filter(|((i, _), _)| d.contains(i)).map(|(k, v)| (*k, *v)).collect())
    }
}

impl FromIterator<(Pair, bool)> for CohenCondition {
    fn from_iter<I: IntoIterator<Item = (Pair, bool)>>(iter: I) -> Self {
        CohenCondition(iter.into_iter().collect())
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum CohenError {
    /// Two members are incompatible.
    Incompatible(CohenCondition, CohenCondition),
    /// A member has a weaker condition that is missing.
    NotUpwardClosed { member: CohenCondition, missing: CohenCondition },
    Empty,
    /// An input condition is not in the filter.
    NotInFilter(CohenCondition),
}

impl fmt::Display for CohenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CohenError::Incompatible(a, b) => write!(f, "not a filter: {a:?} and {b:?} are incompatible"),
            CohenError::NotUpwardClosed { member, missing } => {
                write!(f, "not a filter: {member:?} is in it but {missing:?} is not")
            }
            CohenError::Empty => f.write_str("not a filter: it is empty"),
            CohenError::NotInFilter(p) => write!(f, "{p:?} is not in the filter"),
        }
    }
}

impl core::error::Error for CohenError {}

impl CohenError {
    pub fn is_not_a_filter(&self) -> bool {
        !matches!(self, CohenError::NotInFilter(_))
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Support {
    pub dstar: BTreeSet<Pair>,
    pub d: BTreeSet<u64>,
    pub restricted: BTreeSet<CohenCondition>,
}

/// Nonempty, pairwise compatible, and closed under dropping one entry
/// (hence under every restriction).
pub fn check_filter(filter: &BTreeSet<CohenCondition>) -> Result<(), CohenError> {
    if filter.is_empty() {
        return Err(CohenError::Empty);
    }
    let members: Vec<&CohenCondition> = filter.iter().collect();
    for (i, a) in members.iter().enumerate() {
        for b in &members[i + 1..] {
            if !a.compatible(b) {
                return Err(CohenError::Incompatible((*a).clone(), (*b).clone()));
            }
        }
    }
    for p in filter {
        for k in p.0.keys() {
            let mut weaker = p.clone();
            weaker.0.remove(k);
            if !filter.contains(&weaker) {
                return Err(CohenError::NotUpwardClosed { member: p.clone(), missing: weaker });
            }
        }
    }
    Ok(())
}

/// `d*` is the union of the domains of `conds`, `d` its coordinates, and
/// `restricted` the filter cut down to `d`.
pub fn cohen_support_and_restrict(
    conds: &[CohenCondition],
    filter: &BTreeSet<CohenCondition>,
) -> Result<Support, CohenError> {
    check_filter(filter)?;
    if let Some(p) = conds.iter().find(|p| !filter.contains(p)) {
        return Err(CohenError::NotInFilter(p.clone()));
    }
    let dstar: BTreeSet<Pair> = conds.iter().flat_map(CohenCondition::domain).collect();
    let d: BTreeSet<u64> = dstar.iter().map(|&(i, _)| i).collect();
    let restricted = filter.iter().map(|g| g.restrict(&d)).collect();
    Ok(Support { dstar, d, restricted })
}

/// The smallest filter containing `p`: all of its restrictions.
pub fn generated_filter(p: &CohenCondition) -> BTreeSet<CohenCondition> {
    let entries: Vec<(Pair, bool)> = p.0.iter().map(|(k, v)| (*k, *v)).collect();
    assert!(entries.len() < 24, "too many entries to enumerate");
    (0u32..1 << entries.len())
        .map(|mask| entries.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| *e).collect())
        .collect()
}
