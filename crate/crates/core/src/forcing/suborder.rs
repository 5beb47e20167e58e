//! Suborders by restricting the branch map to an index set.
//!
//! Restricting `f` to `idx` may leave top nodes without a preimage, and
//! then `(t, f↾idx)` is not a condition. The repair keeps `t` and adds
//! reserved (negative) indices, one per node `z` that reaches the top
//! level: index `-1 - rank(z)`, with `rank` the position of `z` in the
//! (level, id) order, sent to the leftmost top node above `z` (lowest-id
//! child that reaches the top, at every step). Ranks and leftmost paths of
//! old nodes do not change when a condition is extended, so restriction
//! with [`Repair::Always`] is monotone.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::{BranchIndex, KurepaCondition};
use crate::structure::Id;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum Repair {
    /// Repair only when `f↾idx` misses part of the top level.
    #[default]
    WhenNeeded,
    /// Always add the reserved indices.
    Always,
}

/// `(t, f↾idx)`, repaired when needed. Reserved indices of `f` are dropped
/// before repairing.
pub fn restrict_to_suborder(p: &KurepaCondition, idx: &BTreeSet<BranchIndex>) -> KurepaCondition {
    restrict_with(p, idx, Repair::WhenNeeded)
}

pub fn restrict_with(p: &KurepaCondition, idx: &BTreeSet<BranchIndex>, repair: Repair) -> KurepaCondition {
    let mut f: BTreeMap<BranchIndex, Id> =
        p.f.iter().filter(|(d, _)| !d.is_reserved() && idx.contains(d)).map(|(d, x)| (*d, x.clone())).collect();
    let covered: BTreeSet<&Id> = f.values().collect();
    let needed = p.top().iter().any(|x| !covered.contains(x));
    if needed || repair == Repair::Always {
        f.extend(canonical_reserved(p));
    }
    KurepaCondition::new(p.t.clone(), f).expect("the repair covers the top level")
}

/// The reserved part of the repair.
pub fn canonical_reserved(p: &KurepaCondition) -> BTreeMap<BranchIndex, Id> {
    let t = &p.t;
    let mut children: BTreeMap<&Id, Vec<&Id>> = BTreeMap::new();
    for (c, par) in t.parent_map() {
        children.entry(par).or_default().push(c);
    }
    let mut alive: BTreeSet<&Id> = p.top().iter().collect();
    for lv in t.levels().iter().rev().skip(1) {
        for x in lv {
            if children.get(x).is_some_and(|cs| cs.iter().any(|c| alive.contains(c))) {
                alive.insert(x);
            }
        }
    }
    let mut out = BTreeMap::new();
    for (rank, z) in t.levels().iter().flatten().enumerate() {
        if !alive.contains(z) {
            continue;
        }
        let mut cur = z;
        while let Some(next) = children.get(cur).and_then(|cs| cs.iter().copied().filter(|c| alive.contains(c)).min()) {
            cur = next;
        }
        out.insert(BranchIndex(-1 - rank as i64), cur.clone());
    }
    out
}
