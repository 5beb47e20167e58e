//! Meeting dense requests and running decreasing sequences of conditions.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{leq, BranchIndex, DenseRequest, ForcingError, KurepaCondition};
use crate::structure::Id;
use crate::treeops::PrunedTree;

/// A decreasing sequence of conditions from the trivial one, meeting the
/// requests in order. `trace[0]` is the trivial condition and `trace[i + 1]`
/// meets `requests[i]`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GenericRun {
    pub requests: Vec<DenseRequest>,
    pub c: usize,
    pub seed: u64,
    pub trace: Vec<KurepaCondition>,
    /// For each user index, the union over the run of the nodes below its
    /// image, bottom-up.
    pub branches: BTreeMap<BranchIndex, Vec<Id>>,
}

impl GenericRun {
    pub fn last(&self) -> &KurepaCondition {
        self.trace.last().expect("a run starts with the trivial condition")
    }

    pub fn final_tree(&self) -> &PrunedTree {
        self.last().tree()
    }
}

enum Ties<'a> {
    Lowest,
    Seeded(&'a mut ChaCha8Rng),
}

/// An extension of `p` that meets `d`. Deterministic: the lowest id wins
/// every tie.
pub fn extend_to_meet(p: &KurepaCondition, d: DenseRequest, c: usize) -> Result<KurepaCondition, ForcingError> {
    meet(p, d, c, &mut Ties::Lowest)
}

fn meet(p: &KurepaCondition, d: DenseRequest, c: usize, ties: &mut Ties<'_>) -> Result<KurepaCondition, ForcingError> {
    match d {
        DenseRequest::HeightAtLeast(h) => {
            let mut cur = p.clone();
            while cur.height() < h {
                if c < 1 {
                    return Err(ForcingError::WidthExceeded { request: d, c });
                }
                cur = grow(&cur, None);
            }
            Ok(cur)
        }
        DenseRequest::IndexInDomain(delta) => {
            if p.f.contains_key(&delta) {
                return Ok(p.clone());
            }
            let mut load: BTreeMap<&Id, usize> = p.top().iter().map(|x| (x, 0)).collect();
            for x in p.f.values() {
                *load.get_mut(x).expect("f maps into the top level") += 1;
            }
            let least = load.values().copied().min().expect("the top level is never empty");
            let candidates: Vec<&Id> = load.iter().filter(|(_, &n)| n == least).map(|(x, _)| *x).collect();
            let pick = match ties {
                Ties::Seeded(rng) if candidates.len() > 1 => candidates[rng.gen_range(0..candidates.len())],
                _ => candidates[0],
            };
            let mut q = p.clone();
            q.f.insert(delta, pick.clone());
            Ok(q)
        }
        DenseRequest::Split(a, b) => {
            if a == b {
                return Err(ForcingError::InvalidRequest(d));
            }
            let q = meet(p, DenseRequest::IndexInDomain(a), c, ties)?;
            let q = meet(&q, DenseRequest::IndexInDomain(b), c, ties)?;
            if q.f[&a] != q.f[&b] {
                return Ok(q);
            }
            if c < 2 {
                return Err(ForcingError::WidthExceeded { request: d, c });
            }
            let shared = q.f[&a].clone();
            Ok(grow(&q, Some((&shared, b))))
        }
    }
}

/// Adds one level: every top node gets one child, and the node in `split`
/// gets a second child that receives the given index. Every other index
/// moves to the first child of its node.
fn grow(p: &KurepaCondition, split: Option<(&Id, BranchIndex)>) -> KurepaCondition {
    let j = p.height();
    let taken: BTreeSet<&Id> = p.t.levels().iter().flatten().collect();
    let mut next = 0usize;
    let mut fresh = || {
        let mut id = Id::new(format!("n{j}_{next}"));
        next += 1;
        while taken.contains(&id) {
            id = Id::new(format!("{id}'"));
        }
        id
    };
    let mut levels = p.t.levels().to_vec();
    let mut parent = p.t.parent_map().clone();
    let mut children: BTreeMap<&Id, Vec<Id>> = BTreeMap::new();
    let mut new_level = Vec::new();
    for x in p.top() {
        let count = if split.is_some_and(|(s, _)| s == x) { 2 } else { 1 };
        for _ in 0..count {
            let child = fresh();
            parent.insert(child.clone(), x.clone());
            new_level.push(child.clone());
            children.entry(x).or_default().push(child);
        }
    }
    levels.push(new_level);
    let f = p
        .f
        .iter()
        .map(|(d, x)| {
            let kids = &children[x];
            let second = split.is_some_and(|(s, b)| s == x && b == *d);
            (*d, kids[usize::from(second)].clone())
        })
        .collect();
    let t = PrunedTree::new(levels, parent, None).expect("growing keeps the tree leveled");
    KurepaCondition::new(t, f).expect("growing keeps f onto the top level")
}

/// Meets the requests in order, starting from the trivial condition. The
/// seed only breaks exact ties when placing new indices.
pub fn run_generic(requests: &[DenseRequest], c: usize, seed: u64) -> Result<GenericRun, ForcingError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace = alloc::vec![KurepaCondition::trivial()];
    for &d in requests {
        let next = meet(trace.last().unwrap(), d, c, &mut Ties::Seeded(&mut rng))?;
        trace.push(next);
    }
    let last = trace.last().unwrap();
    let level_of: BTreeMap<&Id, usize> =
        last.t.levels().iter().enumerate().flat_map(|(j, lv)| lv.iter().map(move |x| (x, j))).collect();
    let mut branches = BTreeMap::new();
    for &delta in last.f.keys().filter(|d| !d.is_reserved()) {
        let mut union: BTreeSet<Id> = BTreeSet::new();
        for cond in &trace {
            if let Some(x) = cond.f.get(&delta) {
                union.extend(cond.t.chain_to(x));
            }
        }
        let mut chain: Vec<Id> = union.into_iter().collect();
        chain.sort_by_key(|x| level_of.get(x).copied());
        branches.insert(delta, chain);
    }
    Ok(GenericRun { requests: requests.to_vec(), c, seed, trace, branches })
}

/// A condition below every member of a decreasing sequence, built by the
/// height step from the last one.
pub fn lower_bound(seq: &[KurepaCondition]) -> Result<KurepaCondition, ForcingError> {
    for i in 1..seq.len() {
        if !leq(&seq[i], &seq[i - 1]) {
            return Err(ForcingError::NotDecreasing(i));
        }
    }
    let last = seq.last().cloned().unwrap_or_else(KurepaCondition::trivial);
    Ok(grow(&last, None))
}
