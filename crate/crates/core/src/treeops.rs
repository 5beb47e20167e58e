//! Bare leveled trees: coding into τ-structures and back, branch counting,
//! pruning, and the shifted-level merge.
//!
//! A [`PrunedTree`] is a leveled forest. Nodes on level `j + 1` have at most
//! one parent, on level `j`; roots may sit on any level, which is what the
//! shifted merge produces. The height is the number of levels.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::checker::{check, Sentence};
use crate::structure::{Id, LevelElem, LevelKind, Mode, Node, StructureParts, TauStructure};

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TreeError {
    /// Level `level` has `width` nodes, more than `c`.
    WidthExceeded { level: usize, width: usize, c: usize },
    /// More levels than `F` can name.
    HeightExceeded { height: usize, c: usize },
    /// Level `0` based index of an empty level.
    EmptyLevel(usize),
    Malformed(String),
    PreconditionFailed(String),
}

impl fmt::Display for TreeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeError::WidthExceeded { level, width, c } => {
                write!(f, "level {level} has {width} nodes, more than c = {c}")
            }
            TreeError::HeightExceeded { height, c } => write!(f, "height {height} exceeds c = {c}"),
            TreeError::EmptyLevel(j) => write!(f, "level {j} is empty"),
            TreeError::Malformed(why) => write!(f, "malformed tree: {why}"),
            TreeError::PreconditionFailed(why) => write!(f, "precondition failed: {why}"),
        }
    }
}

impl core::error::Error for TreeError {}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct PrunedTree {
    levels: Vec<Vec<Id>>,
    parent: BTreeMap<Id, Id>,
    branch_labels: Option<BTreeMap<u64, Id>>,
}

impl PrunedTree {
    /// Levels are sorted on construction. Labels name nodes that end a
    /// maximal chain.
    pub fn new(
        mut levels: Vec<Vec<Id>>,
        parent: BTreeMap<Id, Id>,
        branch_labels: Option<BTreeMap<u64, Id>>,
    ) -> Result<Self, TreeError> {
        let mut level_of = BTreeMap::new();
        for (j, lv) in levels.iter_mut().enumerate() {
            lv.sort();
            for id in lv.iter() {
                if level_of.insert(id.clone(), j).is_some() {
                    return Err(TreeError::Malformed(format!("`{id}` occurs twice")));
                }
            }
        }
        for (child, par) in &parent {
            let (Some(&jc), Some(&jp)) = (level_of.get(child), level_of.get(par)) else {
                return Err(TreeError::Malformed(format!("parent link `{par}` -> `{child}` names an unknown node")));
            };
            if jp + 1 != jc {
                return Err(TreeError::Malformed(format!("`{par}` is not one level below `{child}`")));
            }
        }
        let t = PrunedTree { levels, parent, branch_labels };
        if let Some(labels) = &t.branch_labels {
            let leaves: BTreeSet<&Id> = t.leaves().collect();
            for (l, id) in labels {
                if !leaves.contains(id) {
                    return Err(TreeError::Malformed(format!("label {l} is on `{id}`, which has children")));
                }
            }
        }
        Ok(t)
    }

    /// A single chain with `height` nodes `c0 .. c{height-1}`.
    pub fn chain(height: usize) -> Self {
        let levels = (0..height).map(|j| alloc::vec![Id::new(format!("c{j}"))]).collect();
        let parent = (1..height).map(|j| (Id::new(format!("c{j}")), Id::new(format!("c{}", j - 1)))).collect();
        PrunedTree::new(levels, parent, None).expect("chains are well formed")
    }

    /// The complete binary forest with two roots and `height` levels;
    /// level `j` holds `b{j}_{i}` for `i < 2^(j+1)`.
    pub fn binary(height: usize) -> Self {
        let name = |j: usize, i: usize| Id::new(format!("b{j}_{i}"));
        let levels = (0..height).map(|j| (0..(2usize << j)).map(|i| name(j, i)).collect()).collect();
        let mut parent = BTreeMap::new();
        for j in 1..height {
            for i in 0..(2usize << j) {
                parent.insert(name(j, i), name(j - 1, i / 2));
            }
        }
        PrunedTree::new(levels, parent, None).expect("binary forests are well formed")
    }

    pub fn height(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Vec<Id>] {
        &self.levels
    }

    pub fn parent_map(&self) -> &BTreeMap<Id, Id> {
        &self.parent
    }

    pub fn parent(&self, id: &str) -> Option<&Id> {
        self.parent.get(id)
    }

    pub fn branch_labels(&self) -> Option<&BTreeMap<u64, Id>> {
        self.branch_labels.as_ref()
    }

    pub fn node_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn width(&self) -> usize {
        self.levels.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Nodes without children, level by level.
    pub fn leaves(&self) -> impl Iterator<Item = &Id> + '_ {
        let parents: BTreeSet<&Id> = self.parent.values().collect();
        self.levels.iter().flatten().filter(move |id| !parents.contains(id))
    }

    /// The chain from a root up to `id`, bottom-up.
    pub fn chain_to(&self, id: &Id) -> Vec<Id> {
        let mut out = alloc::vec![id.clone()];
        let mut cur = id;
        while let Some(p) = self.parent.get(cur) {
            out.push(p.clone());
            cur = p;
        }
        out.reverse();
        out
    }
}

/// Number of maximal chains. In a forest these end exactly at the leaves.
pub fn count_branches(t: &PrunedTree) -> usize {
    t.leaves().count()
}

/// Removes, until nothing changes, every node below the top level without
/// children. If the top level is empty nothing can reach it and the result
/// is the empty tree.
pub fn prune(t: &PrunedTree) -> PrunedTree {
    let Some(top) = t.levels.len().checked_sub(1) else { return PrunedTree::default() };
    if t.levels[top].is_empty() {
        return PrunedTree::default();
    }
    let mut alive: BTreeSet<Id> = t.levels[top].iter().cloned().collect();
    for j in (0..top).rev() {
        let keep: Vec<Id> = t.levels[j]
            .iter()
            .filter(|x| t.parent.iter().any(|(child, par)| par == *x && alive.contains(child)))
            .cloned()
            .collect();
        alive.extend(keep);
    }
    let levels = t.levels.iter().map(|lv| lv.iter().filter(|x| alive.contains(*x)).cloned().collect()).collect();
    let parent = t.parent.iter().filter(|(c, _)| alive.contains(*c)).map(|(c, p)| (c.clone(), p.clone())).collect();
    let labels = t
        .branch_labels
        .as_ref()
        .map(|m| m.iter().filter(|(_, id)| alive.contains(*id)).map(|(l, id)| (*l, id.clone())).collect());
    PrunedTree { levels, parent, branch_labels: labels }
}

/// Disjoint union of the trees with the `i`-th one shifted up by `i`
/// levels: its level `j` lands on level `j + i`. The first tree keeps its
/// ids; later ones are prefixed with their index (`1/x`, `2/x`, ...).
/// Labels of later trees are shifted past those already used.
pub fn merge_shifted(trees: &[PrunedTree]) -> PrunedTree {
    let height = trees.iter().enumerate().map(|(i, t)| if t.height() == 0 { 0 } else { i + t.height() }).max().unwrap_or(0);
    let mut levels: Vec<Vec<Id>> = alloc::vec![Vec::new(); height];
    let mut parent = BTreeMap::new();
    let mut labels: Option<BTreeMap<u64, Id>> = None;
    let mut taken: BTreeSet<Id> = BTreeSet::new();
    for (i, t) in trees.iter().enumerate() {
        let mut rename: BTreeMap<&Id, Id> = BTreeMap::new();
        for id in t.levels.iter().flatten() {
            let mut new = if i == 0 { id.clone() } else { Id::new(format!("{i}/{id}")) };
            while taken.contains(&new) {
                new = Id::new(format!("{new}'"));
            }
            taken.insert(new.clone());
            rename.insert(id, new);
        }
        for (j, lv) in t.levels.iter().enumerate() {
            levels[j + i].extend(lv.iter().map(|x| rename[x].clone()));
        }
        for (c, p) in &t.parent {
            parent.insert(rename[c].clone(), rename[p].clone());
        }
        if let Some(tl) = &t.branch_labels {
            let merged = labels.get_or_insert_with(BTreeMap::new);
            let offset = merged.keys().next_back().map_or(0, |m| m + 1);
            for (l, id) in tl {
                merged.insert(l + offset, rename[id].clone());
            }
        }
    }
    PrunedTree::new(levels, parent, labels).expect("disjoint unions of forests are forests")
}

/// An identifier prefix not starting any id of the tree.
fn fresh_prefix(t: &PrunedTree, base: &str) -> String {
    let mut prefix = String::from(base);
    while t.levels.iter().flatten().any(|id| id.as_str().starts_with(prefix.as_str())) {
        prefix.insert(0, '_');
    }
    prefix
}

/// Codes a tree as a surrogate-mode τ-structure over `c` urelements.
///
/// `L` has one successor-tagged level per tree level and a maximum. With
/// `with_branch_level`, the maximum holds one branch node per chain that
/// reaches the top level: one per label when the tree is labeled, else one
/// per top node, labeled by position. Witnesses are canonical.
pub fn encode_tree(t: &PrunedTree, c: usize, with_branch_level: bool) -> Result<TauStructure, TreeError> {
    let h = t.height();
    if h > c {
        return Err(TreeError::HeightExceeded { height: h, c });
    }
    for (j, lv) in t.levels.iter().enumerate() {
        if lv.is_empty() {
            return Err(TreeError::EmptyLevel(j));
        }
        if lv.len() > c {
            return Err(TreeError::WidthExceeded { level: j, width: lv.len(), c });
        }
        if j > 0 {
            if let Some(root) = lv.iter().find(|x| !t.parent.contains_key(*x)) {
                return Err(TreeError::Malformed(format!("`{root}` on level {j} has no parent")));
            }
        }
    }
    let lp = fresh_prefix(t, "L");
    let pp = fresh_prefix(t, "P");
    let bp = fresh_prefix(t, "B");
    let level_id = |j: usize| Id::new(format!("{lp}{j}"));
    let max_id = Id::new(format!("{lp}M"));
    let mut parts = StructureParts { mode: Mode::Surrogate, ..Default::default() };
    parts.p = (0..c).map(|i| Id::new(format!("{pp}{i}"))).collect();
    for j in 0..h {
        let kind = if j == 0 { LevelKind::Zero } else { LevelKind::Successor(level_id(j - 1)) };
        parts.levels.push(LevelElem { id: level_id(j), kind });
    }
    parts.levels.push(LevelElem { id: max_id.clone(), kind: if h == 0 { LevelKind::Zero } else { LevelKind::Max } });
    for (j, lv) in t.levels.iter().enumerate() {
        for x in lv {
            parts.nodes.push(Node::new(x.clone(), level_id(j)));
            let chain = t.chain_to(x);
            for y in &chain[..chain.len() - 1] {
                parts.tree.push((y.clone(), x.clone()));
            }
        }
    }
    if with_branch_level && h > 0 {
        let top = &t.levels[h - 1];
        let branches: Vec<(u64, Id)> = match &t.branch_labels {
            Some(labels) => {
                let mut out = Vec::new();
                for (l, id) in labels {
                    if !top.contains(id) {
                        return Err(TreeError::Malformed(format!("label {l} sits below the top level")));
                    }
                    out.push((*l, id.clone()));
                }
                out
            }
            None => top.iter().enumerate().map(|(i, x)| (i as u64, x.clone())).collect(),
        };
        for (l, leaf) in branches {
            let b = Id::new(format!("{bp}{l}"));
            for y in t.chain_to(&leaf) {
                parts.tree.push((y, b.clone()));
            }
            parts.nodes.push(Node { id: b, level: max_id.clone(), label: Some(l) });
        }
    }
    parts.fill_witnesses();
    TauStructure::new(parts).map_err(|e| TreeError::Malformed(format!("{e}")))
}

/// The tree below the maximum level. Labels of branch nodes are recorded
/// against the top node of their chain; unlabeled branch nodes leave no
/// trace.
pub fn decode_structure(s: &TauStructure) -> Result<PrunedTree, TreeError> {
    let v = check(s, Sentence::SigmaPrime).map_err(|e| TreeError::PreconditionFailed(format!("{e}")))?;
    if !v.ok() {
        return Err(TreeError::PreconditionFailed(format!("not a model of sigma-prime: {}", v.tags().join(", "))));
    }
    let inner = s.levels().len() - 1;
    let levels: Vec<Vec<Id>> = (0..inner).map(|j| s.nodes_at_position(j).to_vec()).collect();
    let mut parent = BTreeMap::new();
    for lv in levels.iter().skip(1) {
        for x in lv {
            let preds = s.predecessors(x.as_str()).expect("node of the structure");
            parent.insert(x.clone(), preds.last().expect("T-levels gives a parent").clone());
        }
    }
    let mut labels = BTreeMap::new();
    for b in s.branch_nodes() {
        if let Some(l) = s.node(b.as_str()).and_then(|n| n.label) {
            if let Some(top) = s.predecessors(b.as_str()).expect("node of the structure").last() {
                labels.insert(l, top.clone());
            }
        }
    }
    let labels = if labels.is_empty() { None } else { Some(labels) };
    PrunedTree::new(levels, parent, labels)
}
