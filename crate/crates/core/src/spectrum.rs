//! Exhaustive small-model enumeration for `ψ` and the desk version of the
//! spectrum laws.
//!
//! Models are counted up to isomorphism modulo the choice of `F`/`G`
//! witnesses and of label values. Such a class is fixed by the level tags,
//! the leveled forest, and which branch nodes carry a label (surrogate mode
//! only; literal models are enumerated unlabeled). [`canonical_code`] names
//! the class.
//!
//! The candidate space is split by [`Shape`] (tags and level widths), which
//! is an isomorphism invariant, so shapes can be enumerated independently
//! and in any order.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::checker::{check_with, classify, CheckOptions, Sentence};
use crate::morphisms::find_proper_extension;
use crate::structure::{Id, LevelElem, LevelKind, Mode, Node, StructureParts, TauStructure};

/// Largest `max_size` accepted by the enumerator.
pub const MAX_FEASIBLE_SIZE: usize = 12;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SpectrumError {
    TooLarge { max_size: usize, bound: usize },
    /// `ψ` needs a nonempty `P`.
    ZeroWidth,
}

impl fmt::Display for SpectrumError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectrumError::TooLarge { max_size, bound } => {
                write!(f, "max size {max_size} is above the feasible bound {bound}")
            }
            SpectrumError::ZeroWidth => f.write_str("c must be positive"),
        }
    }
}

impl core::error::Error for SpectrumError {}

/// Level tags and widths. `limits[j]` tags level `j + 1` for the levels
/// strictly between the zero level and the maximum.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Shape {
    pub limits: Vec<bool>,
    /// Widths of all levels, the maximum last.
    pub widths: Vec<usize>,
}

impl Shape {
    pub fn size(&self) -> usize {
        self.widths.len() + self.widths.iter().sum::<usize>()
    }

    fn is_limit(&self, pos: usize) -> bool {
        pos > 0 && (pos == self.widths.len() - 1 || self.limits[pos - 1])
    }
}

fn check_args(max_size: usize, c: usize) -> Result<(), SpectrumError> {
    if max_size > MAX_FEASIBLE_SIZE {
        return Err(SpectrumError::TooLarge { max_size, bound: MAX_FEASIBLE_SIZE });
    }
    if c == 0 {
        return Err(SpectrumError::ZeroWidth);
    }
    Ok(())
}

/// Every shape of a model of size at most `max_size`, in a fixed order.
pub fn shapes(max_size: usize, c: usize) -> Result<Vec<Shape>, SpectrumError> {
    check_args(max_size, c)?;
    let mut out = Vec::new();
    for k in 1..=max_size.min(c + 1) {
        let inner = k - 1;
        let mut widths = vec![1; inner];
        loop {
            let used = k + widths.iter().sum::<usize>();
            if used <= max_size {
                for top in 0..=max_size - used {
                    for mask in 0u32..1 << k.saturating_sub(2) {
                        let limits = (0..k.saturating_sub(2)).map(|i| mask >> i & 1 == 1).collect();
                        let mut w = widths.clone();
                        w.push(top);
                        out.push(Shape { limits, widths: w });
                    }
                }
            }
            // next inner width vector, each entry in 1..=c
            let Some(i) = widths.iter().rposition(|&w| w < c) else { break };
            widths[i] += 1;
            for w in &mut widths[i + 1..] {
                *w = 1;
            }
        }
    }
    Ok(out)
}

/// One leveled forest: parents (index into the level below) per level, and
/// a labeled flag per node of the maximum level.
struct Forest {
    parents: Vec<Vec<usize>>,
    labeled: Vec<bool>,
}

fn nondecreasing(len: usize, range: usize, injective: bool) -> Vec<Vec<usize>> {
    fn go(len: usize, range: usize, injective: bool, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        let from = match cur.last() {
            Some(&x) if injective => x + 1,
            Some(&x) => x,
            None => 0,
        };
        for x in from..range {
            cur.push(x);
            go(len, range, injective, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(len, range, injective, &mut Vec::new(), &mut out);
    out
}

fn forests(shape: &Shape, mode: Mode) -> Vec<Forest> {
    let k = shape.widths.len();
    let mut partial: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
    for pos in 1..k {
        let injective = shape.is_limit(pos) && (pos < k - 1 || mode == Mode::Literal);
        let choices = nondecreasing(shape.widths[pos], shape.widths[pos - 1], injective);
        partial = partial
            .into_iter()
            .flat_map(|p| {
                choices.iter().map(move |ch| {
                    let mut p = p.clone();
                    p.push(ch.clone());
                    p
                })
            })
            .collect();
    }
    let top = shape.widths[k - 1];
    let mut out = Vec::new();
    for parents in partial {
        if mode == Mode::Literal {
            out.push(Forest { parents, labeled: vec![false; top] });
            continue;
        }
        if k == 1 {
            // roots on a lone level never collide, so only the count of labels matters
            for j in 0..=top {
                out.push(Forest { parents: parents.clone(), labeled: (0..top).map(|i| i >= j).collect() });
            }
            continue;
        }
        // per parent group: all labeled, or the first one unlabeled
        let groups: Vec<(usize, usize)> = {
            let pars = &parents[k - 2];
            let mut g: Vec<(usize, usize)> = Vec::new();
            for (i, p) in pars.iter().enumerate() {
                match g.last_mut() {
                    Some((start, len)) if pars[*start] == *p => *len += 1,
                    _ => g.push((i, 1)),
                }
            }
            g
        };
        for mask in 0u32..1 << groups.len() {
            let mut labeled = vec![true; top];
            for (gi, &(start, _)) in groups.iter().enumerate() {
                if mask >> gi & 1 == 1 {
                    labeled[start] = false;
                }
            }
            out.push(Forest { parents: parents.clone(), labeled });
        }
    }
    out
}

fn build(shape: &Shape, forest: &Forest, c: usize, mode: Mode) -> TauStructure {
    let k = shape.widths.len();
    let level_id = |j: usize| Id::new(format!("l{j}"));
    let node_id = |j: usize, i: usize| Id::new(format!("v{j}_{i}"));
    let levels = (0..k)
        .map(|j| {
            let kind = if j == 0 {
                LevelKind::Zero
            } else if j == k - 1 {
                LevelKind::Max
            } else if shape.limits[j - 1] {
                LevelKind::Limit
            } else {
                LevelKind::Successor(level_id(j - 1))
            };
            LevelElem::new(level_id(j), kind)
        })
        .collect();
    let mut nodes = Vec::new();
    let mut tree = Vec::new();
    let mut label = 0u64;
    let mut chains: Vec<Vec<Vec<Id>>> = Vec::new();
    for (j, &w) in shape.widths.iter().enumerate() {
        let mut here = Vec::new();
        for i in 0..w {
            let id = node_id(j, i);
            if j == k - 1 && forest.labeled[i] {
                nodes.push(Node::labeled(id.clone(), level_id(j), label));
                label += 1;
            } else {
                nodes.push(Node::new(id.clone(), level_id(j)));
            }
            let mut chain = if j == 0 { Vec::new() } else { chains[j - 1][forest.parents[j - 1][i]].clone() };
            for below in &chain {
                tree.push((below.clone(), id.clone()));
            }
            chain.push(id);
            here.push(chain);
        }
        chains.push(here);
    }
    let mut parts = StructureParts {
        p: (0..c).map(|i| Id::new(format!("p{i}"))).collect(),
        levels,
        nodes,
        tree,
        mode,
        ..StructureParts::default()
    };
    parts.fill_witnesses();
    TauStructure::new(parts).expect("generated ids are distinct and resolve")
}

/// The models of one shape, one per class, keyed by canonical code.
pub fn models_of_shape(shape: &Shape, c: usize, mode: Mode) -> BTreeMap<String, TauStructure> {
    let mut out = BTreeMap::new();
    let opts = CheckOptions::with_c(c);
    for forest in forests(shape, mode) {
        let s = build(shape, &forest, c, mode);
        let ok = check_with(&s, Sentence::Psi, &opts).is_ok_and(|v| v.ok());
        if ok {
            out.entry(canonical_code(&s)).or_insert(s);
        }
    }
    out
}

/// Every model of `ψ` (at `c`, in `mode`) with `|L| + |V| ≤ max_size`, one
/// per class, ordered by size and then canonical code.
pub fn enumerate_models(max_size: usize, c: usize, mode: Mode) -> Result<Vec<TauStructure>, SpectrumError> {
    let mut all = BTreeMap::new();
    for shape in shapes(max_size, c)? {
        for (code, s) in models_of_shape(&shape, c, mode) {
            all.insert((s.size(), code), s);
        }
    }
    Ok(all.into_values().collect())
}

/// A string naming the class of `s` modulo witnesses and label values:
/// mode, `|P|`, level tags, then the forest with labeled nodes starred.
/// Nodes without a parent on the level below are listed as roots of their
/// own level, so the code is defined for non-models too.
pub fn canonical_code(s: &TauStructure) -> String {
    let mut tags = String::new();
    for (j, l) in s.levels().iter().enumerate() {
        match &l.kind {
            LevelKind::Zero => tags.push('Z'),
            LevelKind::Limit => tags.push('L'),
            LevelKind::Max => tags.push('M'),
            LevelKind::Successor(a) => match s.position(a.as_str()) {
                Some(p) if p + 1 == j => tags.push('S'),
                p => tags.push_str(&format!("S{}", p.map_or(-1, |p| p as i64))),
            },
        }
    }
    let mut children: BTreeMap<&Id, Vec<&Id>> = BTreeMap::new();
    let mut roots: Vec<&Id> = Vec::new();
    for v in s.nodes() {
        let pos = s.node_position(v.id.as_str()).unwrap();
        let parent = s.tree().iter().find(|(x, y)| *y == v.id && s.node_position(x.as_str()) == Some(pos.wrapping_sub(1)));
        match parent {
            Some((x, _)) => children.entry(x).or_default().push(&v.id),
            None => roots.push(&v.id),
        }
    }
    fn code(s: &TauStructure, x: &Id, children: &BTreeMap<&Id, Vec<&Id>>) -> String {
        let mut kids: Vec<String> = children.get(x).map_or(Vec::new(), |cs| cs.iter().map(|y| code(s, y, children)).collect());
        kids.sort();
        let pos = s.node_position(x.as_str()).unwrap();
        let star = if s.node(x.as_str()).unwrap().label.is_some() { "*" } else { "" };
        format!("{pos}{star}({})", kids.concat())
    }
    let mut forest: Vec<String> = roots.iter().map(|r| code(s, r, &children)).collect();
    forest.sort();
    format!("{}|{}|{}|{}", s.mode().as_str(), s.p().len(), tags, forest.concat())
}

/// A law that failed, with the offending structure when there is one.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Counterexample {
    pub law: String,
    pub structure: Option<TauStructure>,
}

impl Counterexample {
    fn key(&self) -> (usize, String, String) {
        let (size, code) = self.structure.as_ref().map_or((0, String::new()), |s| (s.size(), canonical_code(s)));
        (size, code, self.law.clone())
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct SpectrumReport {
    pub sizes_realized: BTreeSet<usize>,
    pub mm_sizes: BTreeSet<usize>,
    pub kurepa_analogs: usize,
    pub models: usize,
    pub trichotomy_ok: bool,
    pub counterexample: Option<Counterexample>,
}

impl SpectrumReport {
    pub fn empty() -> Self {
        SpectrumReport { trichotomy_ok: true, ..SpectrumReport::default() }
    }

    /// Combines two partial reports. Associative and commutative; the
    /// counterexample kept is the least by (size, code, law).
    pub fn merge(mut self, other: SpectrumReport) -> SpectrumReport {
        self.sizes_realized.extend(other.sizes_realized);
        self.mm_sizes.extend(other.mm_sizes);
        self.kurepa_analogs += other.kurepa_analogs;
        self.models += other.models;
        self.counterexample = match (self.counterexample, other.counterexample) {
            (Some(a), Some(b)) => Some(if b.key() < a.key() { b } else { a }),
            (a, b) => a.or(b),
        };
        self.trichotomy_ok = self.counterexample.is_none();
        self
    }

    fn fail(&mut self, law: String, s: Option<&TauStructure>) {
        let cx = Counterexample { law, structure: s.cloned() };
        let better = self.counterexample.as_ref().is_none_or(|old| cx.key() < old.key());
        if better {
            self.counterexample = Some(cx);
        }
        self.trichotomy_ok = false;
    }

    /// Flags a gap in `sizes_realized` above its minimum, up to `max_size`.
    pub fn check_downward_closed(mut self, max_size: usize) -> SpectrumReport {
        if let Some(&lo) = self.sizes_realized.first() {
            if let Some(gap) = (lo..=max_size).find(|n| !self.sizes_realized.contains(n)) {
                self.fail(format!("downward-closed: no model of size {gap}"), None);
            }
        }
        self
    }
}

/// The partial report of one structure. Runs the full check first, so a
/// structure that is not a model of `ψ` is itself a counterexample.
pub fn model_report(s: &TauStructure, c: usize, ext_budget: usize) -> SpectrumReport {
    let mut r = SpectrumReport::empty();
    r.models = 1;
    r.sizes_realized.insert(s.size());
    let verdict = check_with(s, Sentence::Psi, &CheckOptions::with_c(c)).expect("psi needs no optional components");
    if !verdict.ok() {
        r.fail(format!("model: {}", verdict.tags().join(", ")), Some(s));
        return r;
    }
    let class = classify(s, Some(c)).expect("checked above");
    if class.kurepa_analog {
        r.kurepa_analogs = 1;
        if s.mode() == Mode::Literal {
            r.fail(String::from("literal: Kurepa analog"), Some(s));
        }
    }
    match class.l_kind {
        crate::checker::LKind::ShortL => {
            let bound = if s.levels().len() == 1 { s.branch_nodes().len() } else { s.materialized_branches().len() };
            if s.mode() == Mode::Literal && s.branch_nodes().len() > bound {
                r.fail(format!("shortL: {} branches over {bound} chains", s.branch_nodes().len()), Some(s));
            }
        }
        crate::checker::LKind::LongL => {
            let levels = s.non_max_levels();
            let a = &levels.last().expect("long L has a non-maximal level").id;
            let hit: BTreeSet<&Id> = s.f().iter().filter(|(x, _, _)| x == a).map(|(_, _, b)| b).collect();
            if hit.len() != c || levels.len() != c {
                r.fail(format!("longL: F at `{a}` reaches {} of {c} levels", hit.len()), Some(s));
            }
        }
    }
    let budget = ext_budget.max(s.size());
    if matches!(find_proper_extension(s, budget), Ok(None)) {
        r.mm_sizes.insert(s.size());
    }
    r
}

/// Report over an explicit list of structures (any of which may be
/// corrupt), closed downward up to `max_size`.
pub fn report_for(models: &[TauStructure], c: usize, ext_budget: usize, max_size: usize) -> SpectrumReport {
    models
        .iter()
        .map(|s| model_report(s, c, ext_budget))
        .fold(SpectrumReport::empty(), SpectrumReport::merge)
        .check_downward_closed(max_size)
}

/// Enumerates every model up to `max_size` and checks the laws on each.
pub fn spectra_report(max_size: usize, c: usize, ext_budget: usize, mode: Mode) -> Result<SpectrumReport, SpectrumError> {
    let models = enumerate_models(max_size, c, mode)?;
    Ok(report_for(&models, c, ext_budget, max_size))
}
