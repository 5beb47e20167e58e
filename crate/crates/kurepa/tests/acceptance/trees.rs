//! Pruned forests up to isomorphism, and the tree operations on them.

use std::collections::BTreeMap;

use kurepa_core::treeops::{count_branches, decode_structure, encode_tree, merge_shifted, prune};
use kurepa_core::{Id, PrunedTree};

use crate::Outcome;

/// A rooted pruned tree of some height: a leaf, or a node over a nonempty
/// sorted list of subtrees one level shorter (indices into the previous
/// height's table).
#[derive(Clone, Debug)]
struct Shape {
    kids: Vec<usize>,
    size: usize,
}

/// `trees[h]` lists the pruned trees of height `h + 1` with at most `max`
/// nodes; forests are nondecreasing index lists into one table.
fn tree_table(max: usize) -> Vec<Vec<Shape>> {
    let mut trees = vec![vec![Shape { kids: vec![], size: 1 }]];
    loop {
        let prev = trees.last().unwrap();
        let mut next = Vec::new();
        for f in forests_of(prev, max - 1) {
            let size = 1 + f.iter().map(|&i| prev[i].size).sum::<usize>();
            next.push(Shape { kids: f, size });
        }
        if next.is_empty() {
            break;
        }
        trees.push(next);
    }
    trees
}

/// Nonempty multisets of `table` entries with total size at most `max`.
fn forests_of(table: &[Shape], max: usize) -> Vec<Vec<usize>> {
    fn go(table: &[Shape], from: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        for i in from..table.len() {
            if table[i].size <= left {
                cur.push(i);
                go(table, i, left - table[i].size, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(table, 0, max, &mut Vec::new(), &mut out);
    out
}

/// Every pruned forest with at most `max` nodes, including the empty one,
/// with ids `x{level}_{i}`.
pub fn pruned_forests(max: usize) -> Vec<PrunedTree> {
    let table = tree_table(max);
    let mut out = vec![PrunedTree::default()];
    for (h, row) in table.iter().enumerate() {
        for f in forests_of(row, max) {
            let mut levels: Vec<Vec<Id>> = vec![Vec::new(); h + 1];
            let mut parent = BTreeMap::new();
            let mut frontier: Vec<(usize, Option<Id>)> = f.iter().map(|&i| (i, None)).collect();
            for j in 0..=h {
                let mut next = Vec::new();
                for (i, par) in frontier {
                    let id = Id::new(format!("x{j}_{}", levels[j].len()));
                    levels[j].push(id.clone());
                    if let Some(p) = par {
                        parent.insert(id.clone(), p);
                    }
                    if j < h {
                        next.extend(table[h - j][i].kids.iter().map(|&k| (k, Some(id.clone()))));
                    }
                }
                frontier = next;
            }
            out.push(PrunedTree::new(levels, parent, None).unwrap());
        }
    }
    out
}

/// All leveled forests (roots anywhere, levels possibly empty) with at most
/// `max` nodes, as labelled objects.
fn leveled_forests(max: usize) -> Vec<PrunedTree> {
    fn widths(prefix: Vec<usize>, left: usize, max_len: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() < max_len {
            for k in 0..=left {
                widths([prefix.clone(), vec![k]].concat(), left - k, max_len, out);
            }
        }
        out.push(prefix);
    }
    let mut shapes = Vec::new();
    widths(vec![], max, max + 1, &mut shapes);
    let mut out = Vec::new();
    for w in shapes {
        let ids: Vec<Vec<Id>> =
            w.iter().enumerate().map(|(j, &k)| (0..k).map(|i| Id::new(format!("y{j}_{i}"))).collect()).collect();
        let slots: Vec<(usize, usize)> = (1..w.len()).flat_map(|j| (0..w[j]).map(move |i| (j, i))).collect();
        let radix: Vec<usize> = slots.iter().map(|&(j, _)| w[j - 1] + 1).collect();
        let total: usize = radix.iter().product();
        for mut code in 0..total {
            let mut parent = BTreeMap::new();
            for (&(j, i), &r) in slots.iter().zip(&radix) {
                let choice = code % r;
                code /= r;
                if choice > 0 {
                    parent.insert(ids[j][i].clone(), ids[j - 1][choice - 1].clone());
                }
            }
            out.push(PrunedTree::new(ids.clone(), parent, None).unwrap());
        }
    }
    out
}

/// Maximal chains by depth-first search from the roots.
fn chains(t: &PrunedTree) -> Vec<Vec<Id>> {
    let mut kids: BTreeMap<&Id, Vec<&Id>> = BTreeMap::new();
    for (c, p) in t.parent_map() {
        kids.entry(p).or_default().push(c);
    }
    let mut out = Vec::new();
    let mut stack: Vec<Vec<Id>> =
        t.levels().iter().flatten().filter(|x| t.parent(x.as_str()).is_none()).map(|x| vec![x.clone()]).collect();
    while let Some(path) = stack.pop() {
        match kids.get(path.last().unwrap()) {
            Some(ks) => stack.extend(ks.iter().map(|k| [path.clone(), vec![(*k).clone()]].concat())),
            None => out.push(path),
        }
    }
    out
}

pub fn criterion_6() -> Outcome {
    let forests = pruned_forests(20);
    for t in &forests {
        let h = t.height();
        if h == 0 {
            continue;
        }
        let c = h.max(t.width());
        let plain = encode_tree(t, c, false).and_then(|s| decode_structure(&s));
        if plain.as_ref() != Ok(t) {
            return Outcome::fail(format!("round trip without branch level changed {t:?} into {plain:?}"));
        }
        let labels: BTreeMap<u64, Id> = t.levels()[h - 1].iter().enumerate().map(|(i, x)| (i as u64, x.clone())).collect();
        let labeled = PrunedTree::new(t.levels().to_vec(), t.parent_map().clone(), Some(labels)).unwrap();
        let back = encode_tree(&labeled, c, true).and_then(|s| decode_structure(&s));
        if back.as_ref() != Ok(&labeled) {
            return Outcome::fail(format!("round trip with branch level changed {labeled:?} into {back:?}"));
        }
    }

    let small = pruned_forests(8);
    let counts: Vec<usize> = small.iter().map(|t| chains(t).len()).collect();
    let mut merges = 0u64;
    for len in 1..=3u32 {
        let total = small.len().pow(len);
        for code in 0..total {
            let picks: Vec<usize> = (0..len).map(|k| code / small.len().pow(k) % small.len()).collect();
            let seq: Vec<PrunedTree> = picks.iter().map(|&i| small[i].clone()).collect();
            let m = merge_shifted(&seq);
            let height = seq.iter().enumerate().filter(|(_, t)| t.height() > 0).map(|(i, t)| i + t.height()).max().unwrap_or(0);
            let want: usize = picks.iter().map(|&i| counts[i]).sum();
            let got = chains(&m);
            if m.height() != height || got.len() != want || count_branches(&m) != want {
                return Outcome::fail(format!("merge of {seq:?}: height {} (want {height}), {} chains (want {want})", m.height(), got.len()));
            }
            // each chain of tree i starts on level i of the merge
            let mut starts: Vec<usize> = got.iter().map(|ch| m.levels().iter().position(|lv| lv.contains(&ch[0])).unwrap()).collect();
            let mut expect: Vec<usize> = picks.iter().enumerate().flat_map(|(k, &i)| vec![k; counts[i]]).collect();
            starts.sort();
            expect.sort();
            if starts != expect {
                return Outcome::fail(format!("merge of {seq:?} shifted chains wrongly"));
            }
            merges += 1;
        }
    }

    let leveled = leveled_forests(7);
    for t in &leveled {
        let once = prune(t);
        if prune(&once) != once {
            return Outcome::fail(format!("prune is not idempotent on {t:?}"));
        }
    }
    Outcome::pass(format!(
        "round trip on {} pruned forests (<= 20 nodes), {merges} merges of <= 3 forests (<= 8 nodes each), prune on {} leveled forests (<= 7 nodes)",
        forests.len(),
        leveled.len()
    ))
}
