//! Bounded enumeration of supersets of a base structure.
//!
//! Shared by proper-extension search, joint embedding, amalgam search and
//! the maximality probe of the spectrum laboratory. Candidates are produced
//! in a fixed order: number of added elements, then number of appended
//! levels, then kind tags (successor before limit), then how the new nodes
//! are spread over levels, then parent choices (lexicographic).
//!
//! Only supersets that can possibly contain the base as a substructure are
//! produced:
//! - old non-maximal levels never receive nodes (`G` is fixed there),
//! - appended levels go on top, and the old maximum turns into a limit,
//! - `F`/`G` on old non-maximal levels are kept, and fresh witnesses are
//!   synthesized canonically elsewhere (any surjection would do),
//! - new branch nodes get fresh labels in surrogate mode (labels only ever
//!   help `limit-unique`).
//!
//! Under these reductions the enumeration is exhaustive up to renaming of
//! the new elements.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::checker::{check_with, CheckOptions, Sentence};
use crate::structure::{Id, LevelElem, LevelKind, Mode, Node, StructureParts, TauStructure};

/// Result of a bounded search.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SearchOutcome {
    pub found: Option<TauStructure>,
    /// Candidates that were built and validated.
    pub examined: u64,
    pub budget: usize,
    /// Set when the inputs contradict each other outright, so no candidate
    /// was worth building.
    pub conflict: Option<String>,
}

impl SearchOutcome {
    pub(crate) fn conflict(budget: usize, why: String) -> Self {
        SearchOutcome { found: None, examined: 0, budget, conflict: Some(why) }
    }
}

/// Searches supersets `K` of `base` with `min_add ≤ |K| − |base|` and
/// `|K| ≤ budget` for the first one that models `ψ` (at `c`) and satisfies
/// `accept`.
pub(crate) fn search<A>(base: &TauStructure, c: usize, min_add: usize, budget: usize, accept: A) -> SearchOutcome
where
    A: FnMut(&TauStructure) -> bool,
{
    let max_add = budget.saturating_sub(base.size());
    let mut s = Searcher::new(base, c, max_add, accept);
    for add in min_add..=max_add {
        for e in 0..=add {
            if e >= 1 && s.opos + e > c {
                break;
            }
            if let Some(k) = s.with_levels(e, add - e) {
                return SearchOutcome { found: Some(k), examined: s.examined, budget, conflict: None };
            }
        }
    }
    SearchOutcome { found: None, examined: s.examined, budget, conflict: None }
}

/// Union of two structures over shared identifiers, as the smallest
/// candidate for a common extension. Fails with a reason when no common
/// extension can exist for order-theoretic reasons (neither `L` is an
/// initial segment of the other, clashing kind tags, clashing node data).
/// Relational clashes are kept, they surface as axiom violations.
pub(crate) fn merge(a: &TauStructure, b: &TauStructure) -> Result<TauStructure, String> {
    if a.p() != b.p() {
        return Err(String::from("the structures have different urelements"));
    }
    let (short, long) = if a.levels().len() <= b.levels().len() { (a, b) } else { (b, a) };
    let ks = short.levels().len();
    let same_height = ks == long.levels().len();
    for (i, (x, y)) in short.levels().iter().zip(long.levels()).enumerate() {
        if x.id != y.id {
            return Err(format!("level order conflict at position {i}: `{}` vs `{}`", x.id, y.id));
        }
        let compatible = x.kind == y.kind || (i == ks - 1 && !same_height && x.kind == LevelKind::Max && y.kind == LevelKind::Limit);
        if !compatible {
            return Err(format!("kind conflict at level `{}`: {:?} vs {:?}", x.id, x.kind, y.kind));
        }
    }
    for id in long.levels().iter().skip(ks).map(|l| &l.id) {
        if short.contains(id.as_str()) {
            return Err(format!("`{id}` is a level on one side only but used on the other"));
        }
    }
    let mut nodes: BTreeMap<Id, Node> = BTreeMap::new();
    let top = long.levels().len() - 1;
    for n in long.nodes() {
        nodes.insert(n.id.clone(), n.clone());
    }
    for n in short.nodes() {
        if long.p().contains(&n.id) || long.position(n.id.as_str()).is_some() {
            return Err(format!("`{}` has different sorts", n.id));
        }
        let mut n = n.clone();
        if long.position(n.level.as_str()) != Some(top) {
            n.label = None;
        }
        match nodes.get(&n.id) {
            Some(old) if old.level != n.level => {
                return Err(format!("node `{}` sits on different levels", n.id));
            }
            Some(old) if old.label != n.label => {
                return Err(format!("node `{}` carries different labels", n.id));
            }
            Some(_) => {}
            None => {
                nodes.insert(n.id.clone(), n);
            }
        }
    }
    let labels: Vec<u64> = nodes.values().filter_map(|n| n.label).collect();
    if labels.iter().collect::<BTreeSet<_>>().len() != labels.len() {
        return Err(String::from("two different branches carry the same label"));
    }
    let union = |x: &BTreeSet<(Id, Id, Id)>, y: &BTreeSet<(Id, Id, Id)>| -> Vec<(Id, Id, Id)> {
        x.union(y).cloned().collect()
    };
    let parts = StructureParts {
        p: long.p().iter().cloned().collect(),
        levels: long.levels().to_vec(),
        nodes: nodes.into_values().collect(),
        tree: long.tree().union(short.tree()).cloned().collect(),
        f: union(long.f(), short.f()),
        g: union(long.g(), short.g()),
        prec: None,
        h: None,
        mode: long.mode(),
    };
    TauStructure::new(parts).map_err(|e| format!("{e}"))
}

struct Searcher<'a, A> {
    base: &'a TauStructure,
    c: usize,
    accept: A,
    opos: usize,
    examined: u64,
    fresh_levels: Vec<Id>,
    fresh_nodes: Vec<Id>,
    next_label: u64,
    /// Immediate parent of each base node at the old maximum.
    used_parents: BTreeSet<Id>,
}

/// A new node: level position and parent slot (see `Searcher::slots`).
#[derive(Clone, Copy)]
struct Placement {
    pos: usize,
    parent: Option<usize>,
}

impl<'a, A: FnMut(&TauStructure) -> bool> Searcher<'a, A> {
    fn new(base: &'a TauStructure, c: usize, room: usize, accept: A) -> Self {
        let opos = base.levels().len() - 1;
        let fresh = |prefix: &str| -> Vec<Id> {
            let mut out = Vec::new();
            let mut i = 0usize;
            while out.len() < room {
                let id = Id::new(format!("{prefix}{i}"));
                if !base.contains(id.as_str()) {
                    out.push(id);
                }
                i += 1;
            }
            out
        };
        let used_parents = base
            .branch_nodes()
            .iter()
            .filter_map(|b| base.predecessors(b.as_str()).ok().and_then(|p| p.last().cloned()))
            .collect();
        Searcher {
            base,
            c,
            accept,
            opos,
            examined: 0,
            fresh_levels: fresh("k"),
            fresh_nodes: fresh("n"),
            next_label: base.nodes().filter_map(|n| n.label).max().map_or(0, |l| l + 1),
            used_parents,
        }
    }

    fn with_levels(&mut self, e: usize, nodes: usize) -> Option<TauStructure> {
        let intermediate = e.saturating_sub(1);
        for mask in 0..(1u32 << intermediate) {
            let limits: Vec<bool> = (0..intermediate).map(|i| mask >> (intermediate - 1 - i) & 1 == 1).collect();
            let mut counts = vec![0usize; e + 1];
            if let Some(k) = self.distribute(e, &limits, &mut counts, 0, nodes) {
                return Some(k);
            }
        }
        None
    }

    /// Spreads `left` nodes over positions `opos ..= opos + e`; earlier
    /// levels are filled first in the lexicographic order.
    fn distribute(&mut self, e: usize, limits: &[bool], counts: &mut Vec<usize>, i: usize, left: usize) -> Option<TauStructure> {
        if i == e {
            counts[i] = left;
            return self.place(e, limits, counts);
        }
        let existing = if i == 0 { self.base.nodes_at_position(self.opos).len() } else { 0 };
        for n in (0..=left).rev() {
            let width = existing + n;
            // non-maximal levels of the candidate need 1..=c nodes
            if width == 0 || width > self.c {
                continue;
            }
            counts[i] = n;
            if let Some(k) = self.distribute(e, limits, counts, i + 1, left - n) {
                return Some(k);
            }
        }
        None
    }

    fn is_limit(&self, e: usize, limits: &[bool], rel: usize) -> bool {
        let pos = self.opos + rel;
        if pos == 0 {
            return false;
        }
        match rel {
            0 => true,
            r if r == e => true,
            r => limits[r - 1],
        }
    }

    fn place(&mut self, e: usize, limits: &[bool], counts: &[usize]) -> Option<TauStructure> {
        let mut placements = Vec::new();
        self.choose_parents(e, limits, counts, 0, &mut placements)
    }

    /// Candidate parents for new nodes at relative level `rel`. Slots index
    /// into base nodes at `opos - 1` for `rel == 0`, otherwise into the
    /// base nodes at `opos` followed by the new nodes of the level below.
    fn slots(&self, rel: usize, placements: &[Placement]) -> Vec<Option<Id>> {
        if rel == 0 {
            if self.opos == 0 {
                return vec![None];
            }
            return self.base.nodes_at_position(self.opos - 1).iter().cloned().map(Some).collect();
        }
        let mut out: Vec<Option<Id>> = Vec::new();
        if rel == 1 {
            out.extend(self.base.nodes_at_position(self.opos).iter().cloned().map(Some));
        }
        for (k, pl) in placements.iter().enumerate() {
            if pl.pos == self.opos + rel - 1 {
                out.push(Some(self.fresh_nodes[k].clone()));
            }
        }
        out
    }

    fn choose_parents(
        &mut self,
        e: usize,
        limits: &[bool],
        counts: &[usize],
        rel: usize,
        placements: &mut Vec<Placement>,
    ) -> Option<TauStructure> {
        if rel > e {
            return self.build(e, limits, placements);
        }
        let slots = self.slots(rel, placements);
        let top_surrogate = rel == e && self.base.mode() == Mode::Surrogate;
        let distinct = self.is_limit(e, limits, rel) && !top_surrogate;
        let banned: Vec<bool> = slots
            .iter()
            .map(|s| {
                // literal twins of existing branches at the old maximum
                rel == 0 && distinct && s.as_ref().is_some_and(|s| self.used_parents.contains(s))
            })
            .collect();
        let mut choice = Vec::new();
        self.parent_sequences(e, limits, counts, rel, placements, &slots, &banned, distinct, &mut choice)
    }

    #[allow(clippy::too_many_arguments)]
    fn parent_sequences(
        &mut self,
        e: usize,
        limits: &[bool],
        counts: &[usize],
        rel: usize,
        placements: &mut Vec<Placement>,
        slots: &[Option<Id>],
        banned: &[bool],
        distinct: bool,
        choice: &mut Vec<usize>,
    ) -> Option<TauStructure> {
        if choice.len() == counts[rel] {
            let before = placements.len();
            for &slot in choice.iter() {
                placements.push(Placement { pos: self.opos + rel, parent: Some(slot) });
            }
            if slots.len() == 1 && slots[0].is_none() {
                for pl in &mut placements[before..] {
                    pl.parent = None;
                }
            }
            let found = self.choose_parents(e, limits, counts, rel + 1, placements);
            placements.truncate(before);
            return found;
        }
        let start = match choice.last() {
            Some(&last) if distinct => last + 1,
            Some(&last) => last,
            None => 0,
        };
        for slot in start..slots.len() {
            if banned[slot] {
                continue;
            }
            choice.push(slot);
            let found = self.parent_sequences(e, limits, counts, rel, placements, slots, banned, distinct, choice);
            choice.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }

    fn build(&mut self, e: usize, limits: &[bool], placements: &[Placement]) -> Option<TauStructure> {
        let base = self.base;
        let mut parts = base.to_parts();
        let top = self.opos + e;
        if e >= 1 {
            if self.opos > 0 {
                parts.levels[self.opos].kind = LevelKind::Limit;
            }
            for r in 1..=e {
                let kind = if r == e {
                    LevelKind::Max
                } else if limits[r - 1] {
                    LevelKind::Limit
                } else {
                    LevelKind::Successor(parts.levels[self.opos + r - 1].id.clone())
                };
                parts.levels.push(LevelElem { id: self.fresh_levels[r - 1].clone(), kind });
            }
            for n in &mut parts.nodes {
                n.label = None;
            }
        }
        let mut preds: BTreeMap<Id, Vec<Id>> = BTreeMap::new();
        let mut label = self.next_label;
        let surrogate = base.mode() == Mode::Surrogate;
        let mut slots_cache: BTreeMap<usize, Vec<Option<Id>>> = BTreeMap::new();
        for (k, pl) in placements.iter().enumerate() {
            let rel = pl.pos - self.opos;
            let slots = slots_cache.entry(rel).or_insert_with(|| self.slots(rel, &placements[..k]));
            // slots for a level only depend on placements of lower levels
            let id = self.fresh_nodes[k].clone();
            let level = parts.levels[pl.pos].id.clone();
            let node_label = if pl.pos == top && surrogate && top > 0 {
                label += 1;
                Some(label - 1)
            } else {
                None
            };
            let mut chain = Vec::new();
            if let Some(Some(parent)) = pl.parent.map(|s| slots[s].clone()) {
                chain = match preds.get(&parent) {
                    Some(p) => p.clone(),
                    None => base.predecessors(parent.as_str()).unwrap_or_default(),
                };
                chain.push(parent);
            }
            for x in &chain {
                parts.tree.push((x.clone(), id.clone()));
            }
            preds.insert(id.clone(), chain);
            parts.nodes.push(Node { id, level, label: node_label });
        }
        if e >= 1 {
            let mut sorted_p: Vec<Id> = parts.p.clone();
            sorted_p.sort();
            for pos in self.opos..top {
                let a = parts.levels[pos].id.clone();
                let below: Vec<Id> = parts.levels[..=pos].iter().map(|l| l.id.clone()).collect();
                let mut here: Vec<Id> = parts.nodes.iter().filter(|n| n.level == a).map(|n| n.id.clone()).collect();
                here.sort();
                for (i, p) in sorted_p.iter().enumerate() {
                    parts.f.push((a.clone(), p.clone(), below[i.min(below.len() - 1)].clone()));
                    if !here.is_empty() {
                        parts.g.push((a.clone(), p.clone(), here[i.min(here.len() - 1)].clone()));
                    }
                }
            }
        }
        parts.prec = None;
        parts.h = None;
        let k = TauStructure::new(parts).ok()?;
        self.examined += 1;
        let ok = check_with(&k, Sentence::Psi, &CheckOptions::with_c(self.c)).ok()?.ok();
        if ok && (self.accept)(&k) {
            Some(k)
        } else {
            None
        }
    }
}
