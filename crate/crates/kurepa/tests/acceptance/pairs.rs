//! The exhaustive space of validated pairs `M ⊆ N` with `|N| ≤ 7`.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use kurepa_core::morphisms::substructure_report;
use kurepa_core::{check_with, CheckOptions, Id, LevelElem, LevelKind, Mode, Node, Sentence, StructureParts, TauStructure};

use crate::Outcome;

/// All maps from `n` arguments into `0..k` that hit every value.
fn surjections(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|v: Vec<usize>| (0..k).map(move |d| [v.clone(), vec![d]].concat())).collect();
    }
    out.retain(|v| (0..k).all(|d| v.contains(&d)));
    out
}

fn cartesian<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![vec![]];
    for c in choices {
        out = out.into_iter().flat_map(|v: Vec<T>| c.iter().map(move |x| [v.clone(), vec![x.clone()]].concat())).collect();
    }
    out
}

fn is_model(s: &TauStructure, c: usize) -> bool {
    check_with(s, Sentence::Psi, &CheckOptions::with_c(c)).unwrap().ok()
}

/// Every kind assignment a model can carry on `k` levels named `ids`.
fn model_kinds(ids: &[Id]) -> Vec<Vec<LevelKind>> {
    let k = ids.len();
    if k == 1 {
        return vec![vec![LevelKind::Zero]];
    }
    let middle: Vec<Vec<LevelKind>> =
        (1..k - 1).map(|j| vec![LevelKind::Successor(ids[j - 1].clone()), LevelKind::Limit]).collect();
    cartesian(&middle)
        .into_iter()
        .map(|m| [vec![LevelKind::Zero], m, vec![LevelKind::Max]].concat())
        .collect()
}

/// Every surjective `F` and `G` for levels `ids` with nodes `at[j]` on
/// level `j`.
fn witness_choices(p: &[Id], ids: &[Id], at: &[Vec<Id>]) -> Vec<(Vec<(Id, Id, Id)>, Vec<(Id, Id, Id)>)> {
    let c = p.len();
    let inner = ids.len() - 1;
    let mut per_level: Vec<Vec<(Vec<(Id, Id, Id)>, Vec<(Id, Id, Id)>)>> = Vec::new();
    for j in 0..inner {
        let mut here = Vec::new();
        for fs in surjections(c, j + 1) {
            for gs in surjections(c, at[j].len()) {
                let f = (0..c).map(|i| (ids[j].clone(), p[i].clone(), ids[fs[i]].clone())).collect();
                let g = (0..c).map(|i| (ids[j].clone(), p[i].clone(), at[j][gs[i]].clone())).collect();
                here.push((f, g));
            }
        }
        per_level.push(here);
    }
    cartesian(&per_level)
        .into_iter()
        .map(|levels| {
            let (f, g): (Vec<_>, Vec<_>) = levels.into_iter().unzip();
            (f.concat(), g.concat())
        })
        .collect()
}

/// Every model of `ψ` with `|P| = c` and `|L| + |V| ≤ budget`, written out
/// with concrete identifiers (no reduction up to isomorphism).
pub fn models(c: usize, budget: usize) -> Vec<TauStructure> {
    let p: Vec<Id> = (0..c).map(|i| Id::new(format!("p{i}"))).collect();
    let mut out = Vec::new();
    for k in 1..=budget.min(c + 1) {
        let ids: Vec<Id> = (0..k).map(|j| Id::new(format!("l{j}"))).collect();
        let inner_widths: Vec<Vec<usize>> = vec![(1..=c).collect(); k - 1];
        for inner in cartesian(&inner_widths) {
            let used = k + inner.iter().sum::<usize>();
            if used > budget {
                continue;
            }
            for top in 0..=budget - used {
                let widths = [inner.clone(), vec![top]].concat();
                let at: Vec<Vec<Id>> = widths
                    .iter()
                    .enumerate()
                    .map(|(j, &w)| (0..w).map(|i| Id::new(format!("v{j}_{i}"))).collect())
                    .collect();
                let parent_choices: Vec<Vec<usize>> =
                    (1..k).flat_map(|j| vec![(0..widths[j - 1]).collect::<Vec<_>>(); widths[j]]).collect();
                for parents in cartesian(&parent_choices) {
                    let mut parent = std::collections::BTreeMap::new();
                    let mut cursor = parents.iter();
                    for j in 1..k {
                        for i in 0..widths[j] {
                            parent.insert(at[j][i].clone(), at[j - 1][*cursor.next().unwrap()].clone());
                        }
                    }
                    let mut tree = Vec::new();
                    for x in at.iter().flatten() {
                        let mut cur = parent.get(x);
                        while let Some(y) = cur {
                            tree.push((y.clone(), x.clone()));
                            cur = parent.get(y);
                        }
                    }
                    for kinds in model_kinds(&ids) {
                        let levels: Vec<LevelElem> =
                            ids.iter().zip(&kinds).map(|(id, kind)| LevelElem::new(id.clone(), kind.clone())).collect();
                        for label_mask in 0..1u32 << top {
                            let mut nodes = Vec::new();
                            for (j, lv) in at.iter().enumerate() {
                                for (i, x) in lv.iter().enumerate() {
                                    let label = (j == k - 1 && label_mask >> i & 1 == 1).then_some(i as u64);
                                    nodes.push(Node { id: x.clone(), level: ids[j].clone(), label });
                                }
                            }
                            for (f, g) in witness_choices(&p, &ids, &at) {
                                for mode in [Mode::Literal, Mode::Surrogate] {
                                    let parts = StructureParts {
                                        p: p.clone(),
                                        levels: levels.clone(),
                                        nodes: nodes.clone(),
                                        tree: tree.clone(),
                                        f: f.clone(),
                                        g: g.clone(),
                                        prec: None,
                                        h: None,
                                        mode,
                                    };
                                    let s = TauStructure::new(parts).unwrap();
                                    if is_model(&s, c) {
                                        out.push(s);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Every model `m` whose carriers are carriers of `n`, with `P^m = P^n`,
/// `T^m` induced and nodes on their `n`-levels. Kinds, labels (kept,
/// dropped or added) and witnesses range freely.
fn sub_candidates(n: &TauStructure, c: usize, mut each: impl FnMut(&TauStructure)) {
    let p: Vec<Id> = n.p().iter().cloned().collect();
    let nl = n.levels().len();
    let all_nodes: Vec<&Node> = n.nodes().collect();
    for lmask in 1u32..1 << nl {
        let ids: Vec<Id> = (0..nl).filter(|j| lmask >> j & 1 == 1).map(|j| n.levels()[j].id.clone()).collect();
        if ids.len() - 1 > c {
            continue;
        }
        let eligible: Vec<&Node> = all_nodes.iter().copied().filter(|x| ids.contains(&x.level)).collect();
        for vmask in 0u32..1 << eligible.len() {
            let chosen: Vec<&Node> = (0..eligible.len()).filter(|i| vmask >> i & 1 == 1).map(|i| eligible[i]).collect();
            let in_m: BTreeSet<&Id> = chosen.iter().map(|x| &x.id).collect();
            let at: Vec<Vec<Id>> = ids
                .iter()
                .map(|l| chosen.iter().filter(|x| x.level == *l).map(|x| x.id.clone()).collect())
                .collect();
            if at[..ids.len() - 1].iter().any(|lv| lv.is_empty() || lv.len() > c) {
                continue;
            }
            let tree: Vec<(Id, Id)> =
                n.tree().iter().filter(|(x, y)| in_m.contains(x) && in_m.contains(y)).cloned().collect();
            // every node needs its ancestor on each lower level of `m`
            let complete = chosen.iter().all(|x| {
                let pos = ids.iter().position(|l| *l == x.level).unwrap();
                ids[..pos].iter().all(|l| tree.iter().any(|(y, z)| *z == x.id && n.node(y.as_str()).unwrap().level == *l))
            });
            if !complete {
                continue;
            }
            let witnesses = witness_choices(&p, &ids, &at);
            for kinds in model_kinds(&ids) {
                let levels: Vec<LevelElem> =
                    ids.iter().zip(&kinds).map(|(id, kind)| LevelElem::new(id.clone(), kind.clone())).collect();
                for label_mask in 0u32..1 << chosen.len() {
                    let nodes: Vec<Node> = chosen
                        .iter()
                        .enumerate()
                        .map(|(i, x)| {
                            let label = (label_mask >> i & 1 == 1).then(|| x.label.unwrap_or(90 + i as u64));
                            Node { id: x.id.clone(), level: x.level.clone(), label }
                        })
                        .collect();
                    for (f, g) in &witnesses {
                        for mode in [Mode::Literal, Mode::Surrogate] {
                            let parts = StructureParts {
                                p: p.clone(),
                                levels: levels.clone(),
                                nodes: nodes.clone(),
                                tree: tree.clone(),
                                f: f.clone(),
                                g: g.clone(),
                                prec: None,
                                h: None,
                                mode,
                            };
                            let m = TauStructure::new(parts).unwrap();
                            if is_model(&m, c) {
                                each(&m);
                            }
                        }
                    }
                }
            }
        }
    }
}

pub struct PairStats {
    pub pairs: u64,
    pub subs: u64,
    pub proper_subs: u64,
    pub rigidity_failures: Vec<String>,
    pub collapse_failures: Vec<String>,
    pub elapsed: Duration,
}

pub fn pair_space(max_elements: usize) -> PairStats {
    let start = Instant::now();
    let mut stats =
        PairStats { pairs: 0, subs: 0, proper_subs: 0, rigidity_failures: vec![], collapse_failures: vec![], elapsed: Duration::ZERO };
    for c in 1..max_elements {
        for n in models(c, max_elements - c) {
            sub_candidates(&n, c, |m| {
                stats.pairs += 1;
                let r = substructure_report(m, &n).unwrap();
                if !r.is_sub {
                    return;
                }
                stats.subs += 1;
                if m != &n {
                    stats.proper_subs += 1;
                }
                if !(r.l_initial_segment && r.levels_equal && r.order_preserved) && stats.rigidity_failures.len() < 3 {
                    stats.rigidity_failures.push(format!("{r:?} for {m:?} in {n:?}"));
                }
                let lm: BTreeSet<&Id> = m.levels().iter().map(|l| &l.id).collect();
                let ln: BTreeSet<&Id> = n.levels().iter().map(|l| &l.id).collect();
                if m.desk_cardinality() > c && lm != ln && stats.collapse_failures.len() < 3 {
                    stats.collapse_failures.push(format!("{m:?} in {n:?}"));
                }
            });
        }
    }
    stats.elapsed = start.elapsed();
    stats
}

pub fn criteria_2_and_3() -> (Outcome, Outcome) {
    let s = pair_space(7);
    let detail = format!("{} validated pairs, {} with is_sub ({} proper), {:.1?}", s.pairs, s.subs, s.proper_subs, s.elapsed);
    let two = if !s.rigidity_failures.is_empty() {
        Outcome::fail(format!("{detail}; {}", s.rigidity_failures.join(" | ")))
    } else if s.elapsed > Duration::from_secs(300) {
        Outcome::fail(format!("{detail}; over 5 minutes"))
    } else {
        Outcome::pass(detail.clone())
    };
    let three = if s.collapse_failures.is_empty() {
        Outcome::pass(detail)
    } else {
        Outcome::fail(format!("{detail}; {}", s.collapse_failures.join(" | ")))
    };
    (two, three)
}
