//! Finite τ-structures.
//!
//! A [`TauStructure`] is a finite universe split into urelements `P`, levels
//! `L` and nodes `V`, with the tree order `T`, the level bookkeeping
//! witnesses `F` and `G`, and optionally the branch order `≺` with its
//! witness family `H`.
//!
//! Finite linear orders always have a maximum that is a successor, so levels
//! carry an explicit [`LevelKind`]. A `Limit` tag says that an infinite
//! segment has been elided right before the element; successor-hood is data,
//! never inferred from positions. Positions are the indices into the level
//! sequence.
//!
//! Construction only enforces what is needed to make the value meaningful
//! (unique identifiers, references that resolve). Everything the sentences
//! talk about is left to [`crate::checker`].

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::borrow::Borrow;
use core::fmt;

/// Opaque identifier of a universe element.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Id(String);

impl Id {
    pub fn new(s: impl Into<String>) -> Self {
        Id(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Id {
    fn from(s: &str) -> Self {
        Id(s.to_owned())
    }
}

impl From<String> for Id {
    fn from(s: String) -> Self {
        Id(s)
    }
}

impl Borrow<str> for Id {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Which identity criterion applies at limit levels.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub enum Mode {
    /// Distinct nodes at a limit level need distinct predecessor sets.
    #[default]
    Literal,
    /// Branch labels may stand in for predecessor differences that live in
    /// an elided segment.
    Surrogate,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Literal => "literal",
            Mode::Surrogate => "surrogate",
        }
    }
}

impl core::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "literal" => Ok(Mode::Literal),
            "surrogate" => Ok(Mode::Surrogate),
            other => Err(alloc::format!("unknown mode `{other}`")),
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum LevelKind {
    Zero,
    /// Immediate successor of the named level.
    Successor(Id),
    /// Preceded by an elided infinite segment.
    Limit,
    Max,
}

impl LevelKind {
    pub fn is_successor(&self) -> bool {
        matches!(self, LevelKind::Successor(_))
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LevelElem {
    pub id: Id,
    pub kind: LevelKind,
}

impl LevelElem {
    pub fn new(id: impl Into<Id>, kind: LevelKind) -> Self {
        LevelElem { id: id.into(), kind }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Node {
    pub id: Id,
    pub level: Id,
    /// Identity label, meaningful for nodes on the maximum level.
    pub label: Option<u64>,
}

impl Node {
    pub fn new(id: impl Into<Id>, level: impl Into<Id>) -> Self {
        Node { id: id.into(), level: level.into(), label: None }
    }

    pub fn labeled(id: impl Into<Id>, level: impl Into<Id>, label: u64) -> Self {
        Node { id: id.into(), level: level.into(), label: Some(label) }
    }
}

/// Plain, unchecked data of a structure. Relations are tuple lists; order
/// and duplicates are irrelevant except for `levels` (positional) and `prec`
/// (listed from least to greatest).
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct StructureParts {
    pub p: Vec<Id>,
    pub levels: Vec<LevelElem>,
    pub nodes: Vec<Node>,
    /// `(x, y)` means `T(x, y)`: `x` lies strictly below `y`.
    pub tree: Vec<(Id, Id)>,
    /// `(a, p, b)` means `F(a, p, b)`.
    pub f: Vec<(Id, Id, Id)>,
    /// `(a, p, v)` means `G(a, p, v)`.
    pub g: Vec<(Id, Id, Id)>,
    pub prec: Option<Vec<Id>>,
    /// `(y, l, x)` means `H(y, l, x)`.
    pub h: Option<Vec<(Id, Id, Id)>>,
    pub mode: Mode,
}

impl StructureParts {
    /// Replaces `F` and `G` by the canonical witnesses: at every non-maximal
    /// level `a`, the `i`-th urelement (in id order) goes to the
    /// `min(i, n-1)`-th target (levels by position, nodes by id). These are
    /// surjective exactly when the targets are at most `|P|` many.
    pub fn fill_witnesses(&mut self) {
        self.f.clear();
        self.g.clear();
        let mut p = self.p.clone();
        p.sort();
        let n = self.levels.len();
        for (pos, a) in self.levels.iter().enumerate().take(n.saturating_sub(1)) {
            let below: Vec<&Id> = self.levels[..=pos].iter().map(|l| &l.id).collect();
            let mut here: Vec<&Id> = self.nodes.iter().filter(|v| v.level == a.id).map(|v| &v.id).collect();
            here.sort();
            for (i, q) in p.iter().enumerate() {
                self.f.push((a.id.clone(), q.clone(), below[i.min(below.len() - 1)].clone()));
                if !here.is_empty() {
                    self.g.push((a.id.clone(), q.clone(), here[i.min(here.len() - 1)].clone()));
                }
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum StructureError {
    EmptyLevels,
    DuplicateId(Id),
    UnknownReference { relation: &'static str, id: Id },
    DuplicateInOrder(Id),
    NotInStructure(Id),
}

impl fmt::Display for StructureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructureError::EmptyLevels => f.write_str("L must contain at least one element"),
            StructureError::DuplicateId(id) => write!(f, "identifier `{id}` is used twice"),
            StructureError::UnknownReference { relation, id } => {
                write!(f, "{relation} refers to `{id}`, which is not an element of the right sort")
            }
            StructureError::DuplicateInOrder(id) => write!(f, "`{id}` is listed twice in prec"),
            StructureError::NotInStructure(id) => write!(f, "`{id}` is not a node of the structure"),
        }
    }
}

impl core::error::Error for StructureError {}

/// A finite τ-structure. Immutable once built.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TauStructure {
    p: BTreeSet<Id>,
    levels: Vec<LevelElem>,
    nodes: BTreeMap<Id, Node>,
    tree: BTreeSet<(Id, Id)>,
    f: BTreeSet<(Id, Id, Id)>,
    g: BTreeSet<(Id, Id, Id)>,
    prec: Option<Vec<Id>>,
    h: Option<BTreeSet<(Id, Id, Id)>>,
    mode: Mode,
    level_pos: BTreeMap<Id, usize>,
    by_level: Vec<Vec<Id>>,
}

impl TauStructure {
    pub fn new(parts: StructureParts) -> Result<Self, StructureError> {
        let StructureParts { p, levels, nodes, tree, f, g, prec, h, mode } = parts;
        if levels.is_empty() {
            return Err(StructureError::EmptyLevels);
        }
        let mut seen: BTreeSet<&Id> = BTreeSet::new();
        for id in p.iter().chain(levels.iter().map(|l| &l.id)).chain(nodes.iter().map(|n| &n.id)) {
            if !seen.insert(id) {
                return Err(StructureError::DuplicateId(id.clone()));
            }
        }
        let p: BTreeSet<Id> = p.into_iter().collect();
        let level_pos: BTreeMap<Id, usize> =
            levels.iter().enumerate().map(|(i, l)| (l.id.clone(), i)).collect();
        let unknown = |relation, id: &Id| StructureError::UnknownReference { relation, id: id.clone() };
        for l in &levels {
            if let LevelKind::Successor(a) = &l.kind {
                if !level_pos.contains_key(a) {
                    return Err(unknown("successor tag", a));
                }
            }
        }
        let mut by_level = alloc::vec![Vec::new(); levels.len()];
        let mut node_map = BTreeMap::new();
        for n in nodes {
            let pos = *level_pos.get(&n.level).ok_or_else(|| unknown("V", &n.level))?;
            by_level[pos].push(n.id.clone());
            node_map.insert(n.id.clone(), n);
        }
        for lv in &mut by_level {
            lv.sort();
        }
        let is_node = |id: &Id| node_map.contains_key(id);
        let is_level = |id: &Id| level_pos.contains_key(id);
        let is_p = |id: &Id| p.contains(id);
        for (x, y) in &tree {
            for id in [x, y] {
                if !is_node(id) {
                    return Err(unknown("T", id));
                }
            }
        }
        for (a, q, b) in &f {
            if !is_level(a) {
                return Err(unknown("F", a));
            }
            if !is_p(q) {
                return Err(unknown("F", q));
            }
            if !is_level(b) {
                return Err(unknown("F", b));
            }
        }
        for (a, q, v) in &g {
            if !is_level(a) {
                return Err(unknown("G", a));
            }
            if !is_p(q) {
                return Err(unknown("G", q));
            }
            if !is_node(v) {
                return Err(unknown("G", v));
            }
        }
        if let Some(order) = &prec {
            let mut seen = BTreeSet::new();
            for x in order {
                if !is_node(x) {
                    return Err(unknown("prec", x));
                }
                if !seen.insert(x) {
                    return Err(StructureError::DuplicateInOrder(x.clone()));
                }
            }
        }
        if let Some(h) = &h {
            for (y, l, x) in h {
                if !is_node(y) {
                    return Err(unknown("H", y));
                }
                if !is_level(l) {
                    return Err(unknown("H", l));
                }
                if !is_node(x) {
                    return Err(unknown("H", x));
                }
            }
        }
        Ok(TauStructure {
            p,
            levels,
            nodes: node_map,
            tree: tree.into_iter().collect(),
            f: f.into_iter().collect(),
            g: g.into_iter().collect(),
            prec,
            h: h.map(|h| h.into_iter().collect()),
            mode,
            level_pos,
            by_level,
        })
    }

    /// The data back as plain parts, relations sorted.
    pub fn to_parts(&self) -> StructureParts {
        StructureParts {
            p: self.p.iter().cloned().collect(),
            levels: self.levels.clone(),
            nodes: self.nodes.values().cloned().collect(),
            tree: self.tree.iter().cloned().collect(),
            f: self.f.iter().cloned().collect(),
            g: self.g.iter().cloned().collect(),
            prec: self.prec.clone(),
            h: self.h.as_ref().map(|h| h.iter().cloned().collect()),
            mode: self.mode,
        }
    }

    pub fn with_mode(&self, mode: Mode) -> TauStructure {
        let mut s = self.clone();
        s.mode = mode;
        s
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn p(&self) -> &BTreeSet<Id> {
        &self.p
    }

    pub fn levels(&self) -> &[LevelElem] {
        &self.levels
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn tree(&self) -> &BTreeSet<(Id, Id)> {
        &self.tree
    }

    pub fn f(&self) -> &BTreeSet<(Id, Id, Id)> {
        &self.f
    }

    pub fn g(&self) -> &BTreeSet<(Id, Id, Id)> {
        &self.g
    }

    pub fn prec(&self) -> Option<&[Id]> {
        self.prec.as_deref()
    }

    pub fn h(&self) -> Option<&BTreeSet<(Id, Id, Id)>> {
        self.h.as_ref()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.p.contains(id) || self.level_pos.contains_key(id) || self.nodes.contains_key(id)
    }

    /// Position of a level in the order `<`.
    pub fn position(&self, level: &str) -> Option<usize> {
        self.level_pos.get(level).copied()
    }

    /// The greatest element of `L`.
    pub fn max_level(&self) -> &LevelElem {
        self.levels.last().expect("L is never empty")
    }

    pub fn is_max_level(&self, level: &str) -> bool {
        self.max_level().id.as_str() == level
    }

    /// Levels other than the maximum, in order.
    pub fn non_max_levels(&self) -> &[LevelElem] {
        &self.levels[..self.levels.len() - 1]
    }

    /// `V(a, ·)`, sorted by id.
    pub fn nodes_at(&self, level: &str) -> &[Id] {
        match self.level_pos.get(level) {
            Some(&pos) => &self.by_level[pos],
            None => &[],
        }
    }

    pub fn nodes_at_position(&self, pos: usize) -> &[Id] {
        self.by_level.get(pos).map(Vec::as_slice).unwrap_or(&[])
    }

    /// `V(M, ·)`: the nodes on the maximum level.
    pub fn branch_nodes(&self) -> &[Id] {
        &self.by_level[self.levels.len() - 1]
    }

    /// Position of the level a node lives on.
    pub fn node_position(&self, node: &str) -> Option<usize> {
        self.nodes.get(node).map(|n| self.level_pos[&n.level])
    }

    /// `|L| + |V|`: the size used by searches and enumerations. `P` is the
    /// fixed countable parameter every model carries and is not counted.
    pub fn size(&self) -> usize {
        self.levels.len() + self.nodes.len()
    }

    /// `|P| + |L| + |V|`.
    pub fn element_count(&self) -> usize {
        self.p.len() + self.size()
    }

    /// Finite stand-in for the cardinality of the universe: a finite union
    /// of "countable" pieces stays countable, so the pieces are combined by
    /// `max` rather than `+`. A structure is "countable" when this is at
    /// most `c`.
    pub fn desk_cardinality(&self) -> usize {
        let widest = self.by_level.iter().map(Vec::len).max().unwrap_or(0);
        self.p.len().max(self.levels.len()).max(widest)
    }

    pub fn f_value(&self, a: &Id, p: &Id) -> Option<&Id> {
        first_image(&self.f, a, p)
    }

    pub fn g_value(&self, a: &Id, p: &Id) -> Option<&Id> {
        first_image(&self.g, a, p)
    }

    /// All `y` with `T(y, x)`, sorted by level position (then id).
    pub fn predecessors(&self, x: &str) -> Result<Vec<Id>, StructureError> {
        if !self.nodes.contains_key(x) {
            return Err(StructureError::NotInStructure(Id::from(x)));
        }
        let mut preds: Vec<Id> =
            self.tree.iter().filter(|(_, y)| y.as_str() == x).map(|(y, _)| y.clone()).collect();
        preds.sort_by_key(|y| (self.node_position(y.as_str()), y.clone()));
        Ok(preds)
    }

    /// The maximal `T`-chains among the nodes below the maximum level, each
    /// listed bottom-up; the result is sorted.
    ///
    /// For a tree order these are exactly the predecessor chains of the
    /// `T`-maximal non-branch nodes.
    pub fn materialized_branches(&self) -> Vec<Vec<Id>> {
        let top = self.levels.len() - 1;
        let inner: BTreeSet<&Id> = self
            .nodes
            .values()
            .filter(|n| self.level_pos[&n.level] != top)
            .map(|n| &n.id)
            .collect();
        let mut has_successor: BTreeSet<&Id> = BTreeSet::new();
        for (x, y) in &self.tree {
            if inner.contains(x) && inner.contains(y) {
                has_successor.insert(x);
            }
        }
        let mut chains = BTreeSet::new();
        for &x in inner.iter().filter(|x| !has_successor.contains(*x)) {
            let mut chain: Vec<Id> = self
                .tree
                .iter()
                .filter(|(y, z)| z == x && inner.contains(y))
                .map(|(y, _)| y.clone())
                .collect();
            chain.push(x.clone());
            chain.sort_by_key(|y| (self.node_position(y.as_str()), y.clone()));
            chain.dedup();
            chains.insert(chain);
        }
        chains.into_iter().collect()
    }
}

fn first_image<'a>(rel: &'a BTreeSet<(Id, Id, Id)>, a: &Id, p: &Id) -> Option<&'a Id> {
    let lo = (a.clone(), p.clone(), Id::default());
    rel.range(lo..).next().filter(|(x, q, _)| x == a && q == p).map(|(_, _, b)| b)
}
