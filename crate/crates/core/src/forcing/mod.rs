//! The poset of conditions `(t, f)` for adding a Kurepa tree, at desk scale.
//!
//! `t` is a finite leveled tree whose top level is `t_β`; `f` sends finitely
//! many branch indices to nodes of `t_β` and must hit every one of them.
//! Branch indices are integers: user indices are `≥ 0`, negative ones are
//! reserved for [`suborder`] repairs and for the trivial condition.
//!
//! The width bound `c` caps branching: level `0` has at most `c` nodes and
//! every node has at most `c` children.

pub mod cohen;
pub mod generic;
pub mod suborder;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::structure::Id;
use crate::treeops::PrunedTree;

pub use generic::{extend_to_meet, lower_bound, run_generic, GenericRun};
pub use suborder::{restrict_to_suborder, restrict_with, Repair};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct BranchIndex(pub i64);

impl BranchIndex {
    pub fn is_reserved(self) -> bool {
        self.0 < 0
    }
}

impl fmt::Display for BranchIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum DenseRequest {
    HeightAtLeast(usize),
    IndexInDomain(BranchIndex),
    Split(BranchIndex, BranchIndex),
}

impl fmt::Display for DenseRequest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DenseRequest::HeightAtLeast(h) => write!(f, "height>={h}"),
            DenseRequest::IndexInDomain(d) => write!(f, "index {d}"),
            DenseRequest::Split(a, b) => write!(f, "split {a} {b}"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ForcingError {
    /// The width bound leaves no room to meet the request.
    WidthExceeded { request: DenseRequest, c: usize },
    InvalidRequest(DenseRequest),
    Malformed(String),
    /// Position in a sequence that fails to decrease.
    NotDecreasing(usize),
}

impl fmt::Display for ForcingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForcingError::WidthExceeded { request, c } => write!(f, "cannot meet `{request}` with width {c}"),
            ForcingError::InvalidRequest(r) => write!(f, "invalid request `{r}`"),
            ForcingError::Malformed(why) => write!(f, "malformed condition: {why}"),
            ForcingError::NotDecreasing(i) => write!(f, "condition {i} does not extend its predecessor"),
        }
    }
}

impl core::error::Error for ForcingError {}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct KurepaCondition {
    t: PrunedTree,
    f: BTreeMap<BranchIndex, Id>,
}

impl KurepaCondition {
    /// Checks that `t` is a tree (roots exactly on level `0`) of positive
    /// height and that `f` maps onto its top level.
    pub fn new(t: PrunedTree, f: BTreeMap<BranchIndex, Id>) -> Result<Self, ForcingError> {
        let Some(top) = t.levels().last() else {
            return Err(ForcingError::Malformed(String::from("the tree is empty")));
        };
        for (j, lv) in t.levels().iter().enumerate() {
            for x in lv {
                if (j == 0) == t.parent(x.as_str()).is_some() {
                    return Err(ForcingError::Malformed(format!("`{x}` on level {j} has the wrong number of parents")));
                }
            }
        }
        let range: BTreeSet<&Id> = f.values().collect();
        let top_set: BTreeSet<&Id> = top.iter().collect();
        if range != top_set {
            return Err(ForcingError::Malformed(String::from("f does not map onto the top level")));
        }
        Ok(KurepaCondition { t, f })
    }

    /// A single root `n0_0` hit by the reserved index `-1`.
    pub fn trivial() -> Self {
        let root = Id::from("n0_0");
        let t = PrunedTree::new(alloc::vec![alloc::vec![root.clone()]], BTreeMap::new(), None).expect("one node");
        let mut f = BTreeMap::new();
        f.insert(BranchIndex(-1), root);
        KurepaCondition { t, f }
    }

    pub fn tree(&self) -> &PrunedTree {
        &self.t
    }

    pub fn f(&self) -> &BTreeMap<BranchIndex, Id> {
        &self.f
    }

    /// `β + 1`.
    pub fn height(&self) -> usize {
        self.t.height()
    }

    pub fn top(&self) -> &[Id] {
        self.t.levels().last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Level `0` has at most `c` nodes and no node has more than `c`
    /// children.
    pub fn respects_width(&self, c: usize) -> bool {
        if self.t.levels().first().map_or(0, Vec::len) > c {
            return false;
        }
        let mut children: BTreeMap<&Id, usize> = BTreeMap::new();
        for p in self.t.parent_map().values() {
            *children.entry(p).or_default() += 1;
        }
        children.values().all(|&n| n <= c)
    }

    /// Whether `x` lies strictly below `y` in `t`.
    pub fn below(&self, x: &Id, y: &Id) -> bool {
        let mut cur = y;
        while let Some(p) = self.t.parent(cur.as_str()) {
            if p == x {
                return true;
            }
            cur = p;
        }
        false
    }
}

/// `q ≤ p`: `q` extends `p`. `p.t` is an initial segment of `q.t`,
/// `dom(p.f) ⊆ dom(q.f)`, and each `p.f(δ)` is `q.f(δ)` (same heights) or
/// lies strictly below it in `q.t`.
pub fn leq(q: &KurepaCondition, p: &KurepaCondition) -> bool {
    let (tq, tp) = (&q.t, &p.t);
    if tq.height() < tp.height() {
        return false;
    }
    if tq.levels()[..tp.height()] != *tp.levels() {
        return false;
    }
    for x in tp.levels().iter().flatten() {
        if tq.parent(x.as_str()) != tp.parent(x.as_str()) {
            return false;
        }
    }
    let same_height = tq.height() == tp.height();
    p.f.iter().all(|(d, x)| match q.f.get(d) {
        None => false,
        Some(y) if same_height => x == y,
        Some(y) => q.below(x, y),
    })
}
