//! The substructure relation `≺_K` between models of `ψ`, and bounded
//! search for proper extensions.
//!
//! `m ≺_K n` holds when the carriers of `m` are carriers of `n` and `n`
//! restricts to `m`, read at desk scale:
//! - `<` is preserved and `L^m` is closed downward in `L^n`,
//! - kind tags agree, except that the maximum of `m` may sit in `n` as a
//!   limit (an end-extension pushes it below the new maximum),
//! - nodes keep their level; labels on `m`'s branch nodes may disappear
//!   once they are no longer branch nodes,
//! - `T^m` is `T^n` restricted to `V^m`,
//! - `F^m` and `G^m` are `F^n` and `G^n` restricted to the non-maximal
//!   levels of `m` (`m` has no witnesses at its maximum, `n` may).
//!
//! Both structures must model `ψ` with the same `c`.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::checker::{check_with, CheckOptions, Sentence};
use crate::extension::{self, SearchOutcome};
use crate::structure::{Id, LevelKind, TauStructure};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct EmbeddingReport {
    pub is_sub: bool,
    pub l_initial_segment: bool,
    pub levels_equal: bool,
    pub order_preserved: bool,
    pub new_branch_count: usize,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum MorphismError {
    /// An identifier names elements of different sorts in the two
    /// structures.
    InconsistentCarriers(Id),
    BadBudget { budget: usize, size: usize },
    NotAModel { which: &'static str, tags: Vec<&'static str> },
}

impl fmt::Display for MorphismError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MorphismError::InconsistentCarriers(id) => write!(f, "`{id}` has different sorts in the two structures"),
            MorphismError::BadBudget { budget, size } => {
                write!(f, "budget {budget} is smaller than the structure size {size}")
            }
            MorphismError::NotAModel { which, tags } => {
                write!(f, "{which} is not a model of psi (violates {})", tags.join(", "))
            }
        }
    }
}

impl core::error::Error for MorphismError {}

/// Validates both structures against `ψ` (with `c = |P^m|`), then compares.
pub fn is_substructure_model(m: &TauStructure, n: &TauStructure) -> Result<EmbeddingReport, MorphismError> {
    let opts = CheckOptions::with_c(m.p().len());
    for (which, s) in [("m", m), ("n", n)] {
        let v = check_with(s, Sentence::Psi, &opts).expect("psi needs no optional components");
        if !v.ok() {
            return Err(MorphismError::NotAModel { which, tags: v.tags() });
        }
    }
    substructure_report(m, n)
}

/// The embedding report without validating the inputs.
///
/// `is_sub` is decided from the definition; the three rigidity fields are
/// computed separately from their own definitions, so callers can check
/// that the former implies the latter.
pub fn substructure_report(m: &TauStructure, n: &TauStructure) -> Result<EmbeddingReport, MorphismError> {
    check_sorts(m, n)?;
    let new_branch_count = n.branch_nodes().iter().filter(|b| m.node(b.as_str()).is_none()).count();
    Ok(EmbeddingReport {
        is_sub: is_sub(m, n),
        l_initial_segment: l_initial_segment(m, n),
        levels_equal: levels_equal(m, n),
        order_preserved: order_preserved(m, n),
        new_branch_count,
    })
}

fn check_sorts(m: &TauStructure, n: &TauStructure) -> Result<(), MorphismError> {
    let sort = |s: &TauStructure, id: &str| -> Option<u8> {
        if s.p().contains(id) {
            Some(0)
        } else if s.position(id).is_some() {
            Some(1)
        } else if s.node(id).is_some() {
            Some(2)
        } else {
            None
        }
    };
    let ids = m.p().iter().chain(m.levels().iter().map(|l| &l.id)).chain(m.nodes().map(|x| &x.id));
    for id in ids {
        if let (Some(a), Some(b)) = (sort(m, id.as_str()), sort(n, id.as_str())) {
            if a != b {
                return Err(MorphismError::InconsistentCarriers(id.clone()));
            }
        }
    }
    Ok(())
}

fn is_sub(m: &TauStructure, n: &TauStructure) -> bool {
    if !m.p().is_subset(n.p()) {
        return false;
    }
    let mut npos = Vec::with_capacity(m.levels().len());
    for l in m.levels() {
        match n.position(l.id.as_str()) {
            Some(p) => npos.push(p),
            None => return false,
        }
    }
    // `<` preserved
    if npos.windows(2).any(|w| w[0] >= w[1]) {
        return false;
    }
    // downward closed: nothing of `n` below a level of `m` is missing
    let highest = *npos.last().unwrap();
    if n.levels()[..highest].iter().any(|l| m.position(l.id.as_str()).is_none()) {
        return false;
    }
    let m_top = m.levels().len() - 1;
    let top_stays = npos[m_top] == n.levels().len() - 1;
    for (i, l) in m.levels().iter().enumerate() {
        let kn = &n.levels()[npos[i]].kind;
        let relaxed = i == m_top && !top_stays && l.kind == LevelKind::Max && *kn == LevelKind::Limit;
        if l.kind != *kn && !relaxed {
            return false;
        }
    }
    for x in m.nodes() {
        let Some(y) = n.node(x.id.as_str()) else { return false };
        if x.level != y.level {
            return false;
        }
        let dropped = !top_stays && m.is_max_level(x.level.as_str()) && y.label.is_none();
        if x.label != y.label && !dropped {
            return false;
        }
    }
    let in_m = |id: &Id| m.node(id.as_str()).is_some();
    let t_n: BTreeSet<&(Id, Id)> = n.tree().iter().filter(|(x, y)| in_m(x) && in_m(y)).collect();
    if t_n.len() != m.tree().len() || m.tree().iter().any(|t| !t_n.contains(t)) {
        return false;
    }
    let witnessed = |a: &Id| top_stays || !m.is_max_level(a.as_str());
    let restrict = |rel: &BTreeSet<(Id, Id, Id)>, target: &dyn Fn(&Id) -> bool| -> BTreeSet<(Id, Id, Id)> {
        rel.iter()
            .filter(|(a, p, b)| m.position(a.as_str()).is_some() && m.p().contains(p) && target(b) && witnessed(a))
            .cloned()
            .collect()
    };
    let is_level = |b: &Id| m.position(b.as_str()).is_some();
    if restrict(n.f(), &is_level) != restrict(m.f(), &is_level) {
        return false;
    }
    if restrict(n.g(), &in_m) != restrict(m.g(), &in_m) {
        return false;
    }
    // the branch order and its witnesses, when `m` has them
    if let Some(pm) = m.prec() {
        let Some(pn) = n.prec() else { return false };
        let restricted: Vec<&Id> = pn.iter().filter(|x| in_m(x)).collect();
        if restricted.len() != pm.len() || restricted.iter().zip(pm).any(|(a, b)| *a != b) {
            return false;
        }
    }
    if let Some(hm) = m.h() {
        let Some(hn) = n.h() else { return false };
        let restricted: BTreeSet<&(Id, Id, Id)> =
            hn.iter().filter(|(y, l, x)| in_m(y) && is_level(l) && in_m(x)).collect();
        if restricted.len() != hm.len() || hm.iter().any(|t| !restricted.contains(t)) {
            return false;
        }
    }
    true
}

fn l_initial_segment(m: &TauStructure, n: &TauStructure) -> bool {
    m.levels().len() <= n.levels().len() && m.levels().iter().zip(n.levels()).all(|(a, b)| a.id == b.id)
}

fn levels_equal(m: &TauStructure, n: &TauStructure) -> bool {
    m.non_max_levels().iter().all(|a| {
        n.position(a.id.as_str()).is_some() && m.nodes_at(a.id.as_str()) == n.nodes_at(a.id.as_str())
    })
}

fn order_preserved(m: &TauStructure, n: &TauStructure) -> bool {
    let levels_ok = m.levels().iter().zip(m.levels().iter().skip(1)).all(|(a, b)| {
        matches!((n.position(a.id.as_str()), n.position(b.id.as_str())), (Some(x), Some(y)) if x < y)
    });
    let nodes: Vec<&Id> = m.nodes().map(|x| &x.id).collect();
    let tree_ok = nodes.iter().all(|x| {
        nodes.iter().all(|y| {
            let pair = ((*x).clone(), (*y).clone());
            m.tree().contains(&pair) == n.tree().contains(&pair)
        })
    });
    levels_ok && tree_ok
}

/// A proper extension of `m` with `|n| ≤ budget`, if one exists. Branches
/// are tried before end-extensions at each size; the first candidate in
/// the documented order wins.
pub fn find_proper_extension(m: &TauStructure, budget: usize) -> Result<Option<TauStructure>, MorphismError> {
    search_proper_extension(m, budget).map(|o| o.found)
}

/// As [`find_proper_extension`], also reporting how much was searched.
pub fn search_proper_extension(m: &TauStructure, budget: usize) -> Result<SearchOutcome, MorphismError> {
    if budget < m.size() {
        return Err(MorphismError::BadBudget { budget, size: m.size() });
    }
    let c = m.p().len();
    let v = check_with(m, Sentence::Psi, &CheckOptions::with_c(c)).expect("psi needs no optional components");
    if !v.ok() {
        return Err(MorphismError::NotAModel { which: "m", tags: v.tags() });
    }
    Ok(extension::search(m, c, 1, budget, |k| is_sub(m, k)))
}

/// Human-readable dump of a report, one `key=value` per line.
pub fn report_lines(r: &EmbeddingReport) -> String {
    format!(
        "is_sub={}\nl_initial_segment={}\nlevels_equal={}\norder_preserved={}\nnew_branch_count={}\n",
        r.is_sub, r.l_initial_segment, r.levels_equal, r.order_preserved, r.new_branch_count
    )
}
