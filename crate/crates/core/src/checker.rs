//! Validation against `σ`, `σ′` and `ψ`, and the short/long classification
//! of models.
//!
//! Every axiom has a stable tag (see [`tags`]); a [`Verdict`] lists each
//! violated instance with the elements that witness it.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::structure::{Id, LevelKind, Mode, TauStructure};
use crate::verdict::{Verdict, Violation};

/// Axiom tags. These strings are part of the public contract.
pub mod tags {
    pub const L_ZERO: &str = "L-zero";
    pub const L_MAX: &str = "L-max";
    pub const MAX_NOT_SUCCESSOR: &str = "max-not-successor";
    pub const SUCC_POSITION: &str = "succ-position";
    pub const T_UPWARD: &str = "T-upward";
    pub const T_TRANSITIVE: &str = "T-transitive";
    pub const T_CHAIN: &str = "T-chain";
    pub const T_LEVELS: &str = "T-levels";
    pub const LIMIT_UNIQUE: &str = "limit-unique";
    pub const LABEL_PLACEMENT: &str = "label-placement";
    pub const LABEL_DISTINCT: &str = "label-distinct";
    pub const F_DOMAIN: &str = "F-domain";
    pub const F_FUNCTIONAL: &str = "F-functional";
    pub const F_TOTAL: &str = "F-total";
    pub const F_RANGE: &str = "F-range";
    pub const F_SURJECTIVE: &str = "F-surjective";
    pub const G_DOMAIN: &str = "G-domain";
    pub const G_FUNCTIONAL: &str = "G-functional";
    pub const G_TOTAL: &str = "G-total";
    pub const G_RANGE: &str = "G-range";
    pub const G_SURJECTIVE: &str = "G-surjective";
    pub const PRUNED: &str = "pruned";
    pub const P_SIZE: &str = "P-size";
    pub const PREC_DOMAIN: &str = "prec-domain";
    pub const PREC_NO_MAX: &str = "prec-no-max";
    pub const H_DOMAIN: &str = "H-domain";
    pub const H_FUNCTIONAL: &str = "H-functional";
    pub const H_TOTAL: &str = "H-total";
    pub const H_RANGE: &str = "H-range";
    pub const H_SURJECTIVE: &str = "H-surjective";

    pub const ALL: &[&str] = &[
        L_ZERO, L_MAX, MAX_NOT_SUCCESSOR, SUCC_POSITION, T_UPWARD, T_TRANSITIVE, T_CHAIN, T_LEVELS,
        LIMIT_UNIQUE, LABEL_PLACEMENT, LABEL_DISTINCT, F_DOMAIN, F_FUNCTIONAL, F_TOTAL, F_RANGE,
        F_SURJECTIVE, G_DOMAIN, G_FUNCTIONAL, G_TOTAL, G_RANGE, G_SURJECTIVE, PRUNED, P_SIZE,
        PREC_DOMAIN, PREC_NO_MAX, H_DOMAIN, H_FUNCTIONAL, H_TOTAL, H_RANGE, H_SURJECTIVE,
    ];
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Sentence {
    /// The full first-order sentence, including `≺` and `H`.
    Sigma,
    /// `σ` without the requirements on `≺` and `H`.
    SigmaPrime,
    /// `σ′` plus "`P` is countably infinite", rendered as `|P| = c`.
    Psi,
}

impl Sentence {
    pub fn as_str(self) -> &'static str {
        match self {
            Sentence::Sigma => "sigma",
            Sentence::SigmaPrime => "sigma-prime",
            Sentence::Psi => "psi",
        }
    }
}

impl core::str::FromStr for Sentence {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sigma" => Ok(Sentence::Sigma),
            "sigma-prime" | "sigma_prime" => Ok(Sentence::SigmaPrime),
            "psi" => Ok(Sentence::Psi),
            other => Err(format!("unknown sentence `{other}`")),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct CheckOptions {
    /// Declared size of `P` for `ψ`; `None` takes `|P|` as declared.
    pub c: Option<usize>,
    /// Also require every node to reach the top non-maximal level.
    pub pruned: bool,
}

impl CheckOptions {
    pub fn with_c(c: usize) -> Self {
        CheckOptions { c: Some(c), pruned: false }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum CheckError {
    /// `σ` needs `≺` and `H`.
    MissingComponent(&'static str),
    PreconditionFailed(String),
}

impl fmt::Display for CheckError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckError::MissingComponent(what) => write!(f, "sigma requires `{what}`, which is absent"),
            CheckError::PreconditionFailed(why) => write!(f, "precondition failed: {why}"),
        }
    }
}

impl core::error::Error for CheckError {}

pub fn check(s: &TauStructure, sentence: Sentence) -> Result<Verdict, CheckError> {
    check_with(s, sentence, &CheckOptions::default())
}

pub fn check_with(s: &TauStructure, sentence: Sentence, opts: &CheckOptions) -> Result<Verdict, CheckError> {
    if sentence == Sentence::Sigma {
        if s.prec().is_none() {
            return Err(CheckError::MissingComponent("prec"));
        }
        if s.h().is_none() {
            return Err(CheckError::MissingComponent("H"));
        }
    }
    let ix = Indexed::new(s);
    let mut out = Vec::new();
    ix.level_axioms(&mut out);
    ix.tree_axioms(&mut out);
    ix.identity_axioms(&mut out);
    ix.witness_axioms(&mut out, s.f(), "F");
    ix.witness_axioms(&mut out, s.g(), "G");
    if opts.pruned {
        ix.pruned_axiom(&mut out);
    }
    if sentence == Sentence::Psi {
        let c = opts.c.unwrap_or(s.p().len());
        if s.p().is_empty() || s.p().len() != c {
            out.push(Violation {
                tag: tags::P_SIZE,
                witnesses: s.p().iter().cloned().collect(),
                message: format!("|P| = {} but the declared size is {c} (and must be positive)", s.p().len()),
            });
        }
    }
    if sentence == Sentence::Sigma {
        ix.branch_order_axioms(&mut out);
    }
    Ok(Verdict::from_violations(out))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LKind {
    ShortL,
    LongL,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Classification {
    pub l_kind: LKind,
    pub kurepa_analog: bool,
}

/// Classifies a model of `ψ`. `L` is long when it has `c` non-maximal
/// elements (the most the `F` surjections allow); a long model with more
/// than `c` branches is a Kurepa analog.
pub fn classify(s: &TauStructure, c: Option<usize>) -> Result<Classification, CheckError> {
    let c = c.unwrap_or(s.p().len());
    let verdict = check_with(s, Sentence::Psi, &CheckOptions::with_c(c))?;
    if !verdict.ok() {
        return Err(CheckError::PreconditionFailed(format!(
            "not a model of psi: {}",
            verdict.tags().join(", ")
        )));
    }
    let long = s.levels().len() - 1 == c;
    Ok(Classification {
        l_kind: if long { LKind::LongL } else { LKind::ShortL },
        kurepa_analog: long && s.branch_nodes().len() > c,
    })
}

/// Index-based view used by the axiom checks.
struct Indexed<'a> {
    s: &'a TauStructure,
    level_ids: Vec<&'a Id>,
    node_ids: Vec<&'a Id>,
    node_pos: Vec<usize>,
    node_label: Vec<Option<u64>>,
    below: Vec<Vec<bool>>,
    preds: Vec<Vec<usize>>,
    mode: Mode,
}

impl<'a> Indexed<'a> {
    fn new(s: &'a TauStructure) -> Self {
        let level_ids: Vec<&Id> = s.levels().iter().map(|l| &l.id).collect();
        let nodes: Vec<_> = s.nodes().collect();
        let node_ids: Vec<&Id> = nodes.iter().map(|n| &n.id).collect();
        let node_pos = nodes.iter().map(|n| s.position(n.level.as_str()).unwrap()).collect();
        let node_label = nodes.iter().map(|n| n.label).collect();
        let n = nodes.len();
        let mut below = vec![vec![false; n]; n];
        let index = |id: &Id| node_ids.binary_search(&id).unwrap();
        for (x, y) in s.tree() {
            below[index(x)][index(y)] = true;
        }
        let preds = (0..n).map(|y| (0..n).filter(|&x| below[x][y]).collect()).collect();
        Indexed { s, level_ids, node_ids, node_pos, node_label, below, preds, mode: s.mode() }
    }

    fn level_count(&self) -> usize {
        self.level_ids.len()
    }

    fn top(&self) -> usize {
        self.level_count() - 1
    }

    fn is_limit(&self, pos: usize) -> bool {
        pos > 0 && !self.s.levels()[pos].kind.is_successor()
    }

    fn level_axioms(&self, out: &mut Vec<Violation>) {
        let levels = self.s.levels();
        let k = levels.len();
        for (pos, l) in levels.iter().enumerate() {
            let zero = l.kind == LevelKind::Zero;
            if (pos == 0) != zero {
                out.push(violation(tags::L_ZERO, [&l.id], "the least level must be the only zero-tagged level"));
            }
            if l.kind == LevelKind::Max && pos != k - 1 {
                out.push(violation(tags::L_MAX, [&l.id], "a max-tagged level below the top"));
            }
            if let LevelKind::Successor(a) = &l.kind {
                let apos = self.s.position(a.as_str()).unwrap();
                if pos != apos + 1 {
                    out.push(violation(
                        tags::SUCC_POSITION,
                        [&l.id, a],
                        "a successor must sit immediately above its predecessor",
                    ));
                }
            }
        }
        if k >= 2 {
            let last = &levels[k - 1];
            if last.kind != LevelKind::Max {
                out.push(violation(tags::L_MAX, [&last.id], "the greatest level must be max-tagged"));
            }
            if last.kind.is_successor() {
                out.push(violation(tags::MAX_NOT_SUCCESSOR, [&last.id], "the maximum must not be a successor"));
            }
        }
    }

    fn tree_axioms(&self, out: &mut Vec<Violation>) {
        let n = self.node_ids.len();
        for x in 0..n {
            for y in 0..n {
                if !self.below[x][y] {
                    continue;
                }
                if self.node_pos[x] >= self.node_pos[y] {
                    out.push(self.nodes_violation(tags::T_UPWARD, &[x, y], "T must go strictly upward in level"));
                }
                for z in 0..n {
                    if self.below[y][z] && !self.below[x][z] {
                        out.push(self.nodes_violation(tags::T_TRANSITIVE, &[x, y, z], "T is not transitive"));
                    }
                }
            }
        }
        for z in 0..n {
            let preds = &self.preds[z];
            for (i, &a) in preds.iter().enumerate() {
                for &b in &preds[i + 1..] {
                    if !self.below[a][b] && !self.below[b][a] {
                        out.push(self.nodes_violation(
                            tags::T_CHAIN,
                            &[a, b, z],
                            "predecessors of a node must be comparable",
                        ));
                    }
                }
            }
            for lower in 0..self.node_pos[z] {
                let count = preds.iter().filter(|&&y| self.node_pos[y] == lower).count();
                if count != 1 {
                    out.push(Violation {
                        tag: tags::T_LEVELS,
                        witnesses: vec![self.node_ids[z].clone(), self.level_ids[lower].clone()],
                        message: format!("{count} predecessors on a lower level instead of exactly one"),
                    });
                }
            }
        }
    }

    fn identity_axioms(&self, out: &mut Vec<Violation>) {
        let n = self.node_ids.len();
        let top = self.top();
        for x in 0..n {
            if self.node_label[x].is_some() && self.node_pos[x] != top {
                out.push(self.nodes_violation(tags::LABEL_PLACEMENT, &[x], "labels only live on the maximum level"));
            }
            for y in x + 1..n {
                let same_label = self.node_label[x] == self.node_label[y];
                if same_label && self.node_label[x].is_some() {
                    out.push(self.nodes_violation(tags::LABEL_DISTINCT, &[x, y], "two nodes share a label"));
                }
                if self.node_pos[x] != self.node_pos[y] || !self.is_limit(self.node_pos[x]) {
                    continue;
                }
                if self.preds[x] != self.preds[y] {
                    continue;
                }
                if self.mode == Mode::Literal || same_label {
                    out.push(self.nodes_violation(
                        tags::LIMIT_UNIQUE,
                        &[x, y],
                        "distinct nodes on a limit level with the same predecessors",
                    ));
                }
            }
        }
    }

    /// `F` (targets are levels at or below `a`) or `G` (targets are nodes on
    /// level `a`).
    fn witness_axioms(&self, out: &mut Vec<Violation>, rel: &BTreeSet<(Id, Id, Id)>, which: &str) {
        let (domain, functional, total, range, surjective) = if which == "F" {
            (tags::F_DOMAIN, tags::F_FUNCTIONAL, tags::F_TOTAL, tags::F_RANGE, tags::F_SURJECTIVE)
        } else {
            (tags::G_DOMAIN, tags::G_FUNCTIONAL, tags::G_TOTAL, tags::G_RANGE, tags::G_SURJECTIVE)
        };
        let top = self.top();
        let target_pos = |b: &Id| -> usize {
            if which == "F" {
                self.s.position(b.as_str()).unwrap()
            } else {
                self.s.node_position(b.as_str()).unwrap()
            }
        };
        let mut prev: Option<&(Id, Id, Id)> = None;
        for t in rel {
            let (a, p, b) = t;
            let apos = self.s.position(a.as_str()).unwrap();
            if apos == top {
                out.push(violation(domain, [a, p, b], "no witness is defined at the maximum level"));
            }
            let bpos = target_pos(b);
            let in_range = if which == "F" { bpos <= apos } else { bpos == apos };
            if !in_range {
                out.push(violation(range, [a, p, b], "value outside the stated codomain"));
            }
            if let Some((pa, pp, pb)) = prev {
                if pa == a && pp == p {
                    out.push(violation(functional, [a, p, pb, b], "two values for one argument"));
                }
            }
            prev = Some(t);
        }
        for (apos, a) in self.level_ids.iter().enumerate().take(top) {
            for p in self.s.p() {
                let lo = ((*a).clone(), p.clone(), Id::default());
                let hit = rel.range(lo..).next().is_some_and(|(x, q, _)| x == *a && q == p);
                if !hit {
                    out.push(violation(total, [*a, p], "witness is not total on P"));
                }
            }
            let targets: Vec<&Id> = if which == "F" {
                self.level_ids[..=apos].to_vec()
            } else {
                self.s.nodes_at_position(apos).iter().collect()
            };
            for b in targets {
                if !rel.iter().any(|(x, _, y)| x == *a && y == b) {
                    out.push(violation(surjective, [*a, b], "witness misses an element of its codomain"));
                }
            }
        }
    }

    fn pruned_axiom(&self, out: &mut Vec<Violation>) {
        if self.level_count() < 2 {
            return;
        }
        let last_inner = self.top() - 1;
        for x in 0..self.node_ids.len() {
            if self.node_pos[x] == self.top() || self.node_pos[x] == last_inner {
                continue;
            }
            let reaches = (0..self.node_ids.len()).any(|y| self.node_pos[y] == last_inner && self.below[x][y]);
            if !reaches {
                out.push(self.nodes_violation(tags::PRUNED, &[x], "node does not reach the top non-maximal level"));
            }
        }
    }

    fn branch_order_axioms(&self, out: &mut Vec<Violation>) {
        let prec = self.s.prec().unwrap_or(&[]);
        let h = self.s.h().expect("checked by caller");
        let branches: BTreeSet<&Id> = self.s.branch_nodes().iter().collect();
        let listed: BTreeSet<&Id> = prec.iter().collect();
        let mismatch: Vec<Id> = branches.symmetric_difference(&listed).map(|x| (*x).clone()).collect();
        if !mismatch.is_empty() {
            out.push(Violation {
                tag: tags::PREC_DOMAIN,
                witnesses: mismatch,
                message: String::from("prec must order exactly the branch nodes"),
            });
        }
        if let Some(last) = prec.last() {
            out.push(violation(tags::PREC_NO_MAX, [last], "a finite nonempty order always has a maximum"));
        }
        let rank = |x: &Id| prec.iter().position(|y| y == x);
        let below_or_equal = |x: &Id, y: &Id| -> bool {
            branches.contains(x)
                && branches.contains(y)
                && matches!((rank(x), rank(y)), (Some(i), Some(j)) if i <= j)
        };
        let mut prev: Option<&(Id, Id, Id)> = None;
        for t in h {
            let (y, l, x) = t;
            if !branches.contains(y) {
                out.push(violation(tags::H_DOMAIN, [y, l, x], "H is indexed by branch nodes only"));
            }
            if !below_or_equal(x, y) {
                out.push(violation(tags::H_RANGE, [y, l, x], "value is not below the index in prec"));
            }
            if let Some((py, pl, px)) = prev {
                if py == y && pl == l {
                    out.push(violation(tags::H_FUNCTIONAL, [y, l, px, x], "two values for one argument"));
                }
            }
            prev = Some(t);
        }
        for y in &branches {
            for l in &self.level_ids {
                if !h.iter().any(|(a, b, _)| a == *y && b == *l) {
                    out.push(violation(tags::H_TOTAL, [*y, *l], "H_y is not total on L"));
                }
            }
            for x in &branches {
                if below_or_equal(x, y) && !h.iter().any(|(a, _, b)| a == *y && b == *x) {
                    out.push(violation(tags::H_SURJECTIVE, [*y, *x], "H_y misses an element below y"));
                }
            }
        }
    }

    fn nodes_violation(&self, tag: &'static str, which: &[usize], message: &str) -> Violation {
        Violation {
            tag,
            witnesses: which.iter().map(|&i| self.node_ids[i].clone()).collect(),
            message: String::from(message),
        }
    }
}

fn violation<'i, const N: usize>(tag: &'static str, ids: [&'i Id; N], message: &str) -> Violation {
    Violation { tag, witnesses: ids.iter().map(|id| (*id).clone()).collect(), message: String::from(message) }
}
