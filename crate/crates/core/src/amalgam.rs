//! Amalgamation over long models, joint-embedding search, and the two
//! failure witnesses.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::checker::{check_with, classify, CheckOptions, LKind, Sentence};
use crate::extension::{self, SearchOutcome};
use crate::morphisms::substructure_report;
use crate::structure::{Id, LevelElem, LevelKind, Mode, Node, StructureParts, TauStructure};

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum AmalgamError {
    NotAModel { which: &'static str, tags: Vec<&'static str> },
    /// The base is not a substructure of one side.
    NotSubstructure(&'static str),
    /// A short model: amalgamation is not guaranteed there.
    NotUncountableSurrogate(&'static str),
    PreconditionFailed(String),
    BadBudget { budget: usize, size: usize },
    BadSize(usize),
}

impl fmt::Display for AmalgamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AmalgamError::NotAModel { which, tags } => {
                write!(f, "{which} is not a model of psi (violates {})", tags.join(", "))
            }
            AmalgamError::NotSubstructure(which) => write!(f, "the base is not a substructure of {which}"),
            AmalgamError::NotUncountableSurrogate(which) => write!(f, "{which} has a short L"),
            AmalgamError::PreconditionFailed(why) => write!(f, "precondition failed: {why}"),
            AmalgamError::BadBudget { budget, size } => {
                write!(f, "budget {budget} is smaller than the structure size {size}")
            }
            AmalgamError::BadSize(n) => write!(f, "no witness of size {n} (need at least 4)"),
        }
    }
}

impl core::error::Error for AmalgamError {}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AmalgamResult {
    pub n: TauStructure,
    /// `(branch of m1, branch of m2)` pairs merged into one branch of `n`.
    pub identified_pairs: BTreeSet<(Id, Id)>,
    /// Branches of `m2` that appear in `n` under another id.
    pub renamed: BTreeMap<Id, Id>,
    /// Branches of `m2` that appear in `n` with another label.
    pub relabeled: BTreeMap<Id, Option<u64>>,
    /// Number of branches of `m1` and `m2` that are not in `m0`.
    pub new_left: usize,
    pub new_right: usize,
}

impl AmalgamResult {
    /// `m2` as it sits inside `n`, after renaming and relabeling.
    pub fn right_as_embedded(&self, m2: &TauStructure) -> TauStructure {
        let rename = |id: &Id| self.renamed.get(id).cloned().unwrap_or_else(|| id.clone());
        let mut parts = m2.to_parts();
        for node in &mut parts.nodes {
            if let Some(label) = self.relabeled.get(&node.id) {
                node.label = *label;
            }
            node.id = rename(&node.id);
        }
        for (x, y) in &mut parts.tree {
            *x = rename(x);
            *y = rename(y);
        }
        TauStructure::new(parts).expect("renaming keeps the structure well formed")
    }
}

fn validate(which: &'static str, s: &TauStructure, c: usize) -> Result<(), AmalgamError> {
    let v = check_with(s, Sentence::Psi, &CheckOptions::with_c(c)).expect("psi needs no optional components");
    if v.ok() {
        Ok(())
    } else {
        Err(AmalgamError::NotAModel { which, tags: v.tags() })
    }
}

fn sub(m: &TauStructure, n: &TauStructure) -> bool {
    substructure_report(m, n).is_ok_and(|r| r.is_sub)
}

/// Branch identity key: predecessor set, plus the label in surrogate mode.
fn key(s: &TauStructure, b: &Id) -> (Vec<Id>, Option<u64>) {
    let preds = s.predecessors(b.as_str()).expect("branch of the structure");
    let label = if s.mode() == Mode::Surrogate { s.node(b.as_str()).and_then(|n| n.label) } else { None };
    (preds, label)
}

/// The amalgam of two long models over a common substructure: `m0`
/// together with all branches of `m1` and `m2`, identifying branches with
/// the same key.
pub fn amalgamate(m0: &TauStructure, m1: &TauStructure, m2: &TauStructure) -> Result<AmalgamResult, AmalgamError> {
    let c = m0.p().len();
    validate("m0", m0, c)?;
    validate("m1", m1, c)?;
    validate("m2", m2, c)?;
    for (which, s) in [("m1", m1), ("m2", m2)] {
        let class = classify(s, Some(c)).map_err(|e| AmalgamError::PreconditionFailed(format!("{e}")))?;
        if class.l_kind != LKind::LongL {
            return Err(AmalgamError::NotUncountableSurrogate(which));
        }
    }
    if m0.levels() != m1.levels() || m0.levels() != m2.levels() {
        return Err(AmalgamError::PreconditionFailed(String::from("L differs across the triple")));
    }
    if !sub(m0, m1) {
        return Err(AmalgamError::NotSubstructure("m1"));
    }
    if !sub(m0, m2) {
        return Err(AmalgamError::NotSubstructure("m2"));
    }
    let new_in = |s: &TauStructure| -> Vec<Id> {
        s.branch_nodes().iter().filter(|b| m0.node(b.as_str()).is_none()).cloned().collect()
    };
    let new1 = new_in(m1);
    let new2 = new_in(m2);
    let mut parts = m0.to_parts();
    let mut used_ids: BTreeSet<Id> = m1.nodes().map(|n| n.id.clone()).collect();
    used_ids.extend(m2.nodes().map(|n| n.id.clone()));
    let mut used_labels: BTreeSet<u64> = m1.nodes().filter_map(|n| n.label).collect();
    used_labels.extend(m2.nodes().filter_map(|n| n.label));
    let mut by_key: BTreeMap<(Vec<Id>, Option<u64>), (Id, Option<u64>)> = BTreeMap::new();
    let mut labels_in_n: BTreeSet<u64> = m0.nodes().filter_map(|n| n.label).collect();
    let mut ids_in_n: BTreeSet<Id> = m0.nodes().map(|n| n.id.clone()).collect();
    let max_id = m0.max_level().id.clone();
    let add_branch = |parts: &mut StructureParts, id: Id, label: Option<u64>, preds: &[Id]| {
        for x in preds {
            parts.tree.push((x.clone(), id.clone()));
        }
        parts.nodes.push(Node { id, level: max_id.clone(), label });
    };
    for b in &new1 {
        let k = key(m1, b);
        let label = m1.node(b.as_str()).unwrap().label;
        add_branch(&mut parts, b.clone(), label, &k.0);
        labels_in_n.extend(label);
        ids_in_n.insert(b.clone());
        by_key.insert(k, (b.clone(), label));
    }
    let mut identified_pairs = BTreeSet::new();
    let mut renamed = BTreeMap::new();
    let mut relabeled = BTreeMap::new();
    let mut fresh = 0usize;
    for b in &new2 {
        let k = key(m2, b);
        let label = m2.node(b.as_str()).unwrap().label;
        if let Some((b1, l1)) = by_key.get(&k) {
            identified_pairs.insert((b1.clone(), b.clone()));
            if b1 != b {
                renamed.insert(b.clone(), b1.clone());
            }
            if *l1 != label {
                relabeled.insert(b.clone(), *l1);
            }
            continue;
        }
        let mut id = b.clone();
        if ids_in_n.contains(&id) {
            loop {
                id = Id::new(format!("{b}'{fresh}"));
                fresh += 1;
                if !used_ids.contains(&id) && !ids_in_n.contains(&id) {
                    break;
                }
            }
            renamed.insert(b.clone(), id.clone());
        }
        let mut new_label = label;
        if let Some(l) = label {
            if labels_in_n.contains(&l) {
                let next = used_labels.iter().next_back().map_or(0, |m| m + 1);
                used_labels.insert(next);
                new_label = Some(next);
                relabeled.insert(b.clone(), new_label);
            }
        }
        add_branch(&mut parts, id.clone(), new_label, &k.0);
        labels_in_n.extend(new_label);
        ids_in_n.insert(id.clone());
        by_key.insert((k.0, if m2.mode() == Mode::Surrogate { new_label } else { None }), (id, new_label));
    }
    let n = TauStructure::new(parts).map_err(|e| AmalgamError::PreconditionFailed(format!("{e}")))?;
    let result = AmalgamResult {
        n,
        identified_pairs,
        renamed,
        relabeled,
        new_left: new1.len(),
        new_right: new2.len(),
    };
    validate("the amalgam", &result.n, c)?;
    if !sub(m1, &result.n) || !sub(&result.right_as_embedded(m2), &result.n) {
        return Err(AmalgamError::PreconditionFailed(String::from("the amalgam does not extend both sides")));
    }
    Ok(result)
}

fn common_extension(
    parts: &[(&'static str, &TauStructure)],
    budget: usize,
) -> Result<SearchOutcome, AmalgamError> {
    let c = parts[0].1.p().len();
    for (which, s) in parts {
        validate(which, s, c)?;
    }
    let size = parts.iter().map(|(_, s)| s.size()).max().unwrap_or(0);
    if budget < size {
        return Err(AmalgamError::BadBudget { budget, size });
    }
    let mut base = parts[0].1.clone();
    for (_, s) in &parts[1..] {
        match extension::merge(&base, s) {
            Ok(u) => base = u,
            Err(why) => return Ok(SearchOutcome::conflict(budget, why)),
        }
    }
    Ok(extension::search(&base, c, 0, budget, |k| parts.iter().all(|(_, s)| sub(s, k))))
}

/// A common extension of `m` and `n` over their shared identifiers, or
/// `None` when none exists within `budget`.
pub fn joint_embed_search(m: &TauStructure, n: &TauStructure, budget: usize) -> Result<Option<TauStructure>, AmalgamError> {
    joint_embed_outcome(m, n, budget).map(|o| o.found)
}

/// As [`joint_embed_search`], with the search certificate.
pub fn joint_embed_outcome(m: &TauStructure, n: &TauStructure, budget: usize) -> Result<SearchOutcome, AmalgamError> {
    common_extension(&[("m", m), ("n", n)], budget)
}

/// Bounded search for an amalgam of `m1` and `m2` over `m0`, without the
/// long-model precondition of [`amalgamate`].
pub fn amalgam_search(
    m0: &TauStructure,
    m1: &TauStructure,
    m2: &TauStructure,
    budget: usize,
) -> Result<SearchOutcome, AmalgamError> {
    let c = m0.p().len();
    validate("m0", m0, c)?;
    if !sub(m0, m1) {
        return Err(AmalgamError::NotSubstructure("m1"));
    }
    if !sub(m0, m2) {
        return Err(AmalgamError::NotSubstructure("m2"));
    }
    common_extension(&[("m1", m1), ("m2", m2), ("m0", m0)], budget)
}

fn urelements(c: usize) -> Vec<Id> {
    (0..c).map(|i| Id::new(format!("p{i}"))).collect()
}

fn build(mut parts: StructureParts) -> TauStructure {
    parts.fill_witnesses();
    TauStructure::new(parts).expect("witness generators build well-formed structures")
}

/// Two models of `ψ` (`c = 2`, surrogate mode) of the given size with no
/// common extension.
///
/// From size 5 on they differ only in the kind of level `l1` (successor
/// versus limit), so neither `L` is an initial segment of the other's in
/// any common extension. Size 4 cannot fit two non-maximal levels, and the
/// pair differs in the width of the root level instead.
pub fn jep_witness(size: usize) -> Result<(TauStructure, TauStructure), AmalgamError> {
    if size < 4 {
        return Err(AmalgamError::BadSize(size));
    }
    let two_levels = vec![LevelElem::new("l0", LevelKind::Zero), LevelElem::new("l1", LevelKind::Max)];
    if size == 4 {
        let m = StructureParts {
            p: urelements(2),
            levels: two_levels.clone(),
            nodes: vec![Node::new("r0", "l0"), Node::labeled("b0", "l1", 0)],
            tree: vec![(Id::from("r0"), Id::from("b0"))],
            mode: Mode::Surrogate,
            ..Default::default()
        };
        let n = StructureParts {
            p: urelements(2),
            levels: two_levels,
            nodes: vec![Node::new("r0", "l0"), Node::new("r1", "l0")],
            mode: Mode::Surrogate,
            ..Default::default()
        };
        return Ok((build(m), build(n)));
    }
    let make = |middle: LevelKind| {
        let mut parts = StructureParts {
            p: urelements(2),
            levels: vec![
                LevelElem::new("l0", LevelKind::Zero),
                LevelElem::new("l1", middle),
                LevelElem::new("l2", LevelKind::Max),
            ],
            nodes: vec![Node::new("r0", "l0"), Node::new("r1", "l1")],
            tree: vec![(Id::from("r0"), Id::from("r1"))],
            mode: Mode::Surrogate,
            ..Default::default()
        };
        for i in 0..size - 5 {
            let b = Id::new(format!("b{i}"));
            parts.nodes.push(Node::labeled(b.clone(), "l2", i as u64));
            parts.tree.push((Id::from("r0"), b.clone()));
            parts.tree.push((Id::from("r1"), b));
        }
        build(parts)
    };
    Ok((make(LevelKind::Successor(Id::from("l0"))), make(LevelKind::Limit)))
}

/// Three models of `ψ` (`c = 3`, literal mode) with no amalgam: `m0` has a
/// single level below its maximum, and `m1`, `m2` both end-extend it by a
/// level above the old maximum, tagged successor in `m1` and limit in
/// `m2`.
pub fn ap_failure_witness() -> (TauStructure, TauStructure, TauStructure) {
    let m0 = StructureParts {
        p: urelements(3),
        levels: vec![LevelElem::new("l0", LevelKind::Zero), LevelElem::new("l1", LevelKind::Max)],
        nodes: vec![Node::new("r0", "l0"), Node::new("b1", "l1")],
        tree: vec![(Id::from("r0"), Id::from("b1"))],
        ..Default::default()
    };
    let end_extend = |kind: LevelKind| {
        let mut parts = m0.clone();
        parts.levels[1].kind = LevelKind::Limit;
        parts.levels.push(LevelElem::new("l2", kind));
        parts.levels.push(LevelElem::new("l3", LevelKind::Max));
        parts.nodes.push(Node::new("r2", "l2"));
        parts.tree.push((Id::from("r0"), Id::from("r2")));
        parts.tree.push((Id::from("b1"), Id::from("r2")));
        build(parts)
    };
    let m1 = end_extend(LevelKind::Successor(Id::from("l1")));
    let m2 = end_extend(LevelKind::Limit);
    (build(m0), m1, m2)
}
