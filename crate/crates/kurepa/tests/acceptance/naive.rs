//! An index-based first-order evaluator, written against the axiom list
//! rather than the checker, and the structure spaces it is run on.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use kurepa_core::{
    check_with, CheckError, CheckOptions, Id, LevelElem, LevelKind, Mode, Node, Sentence, StructureParts,
    TauStructure,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::Outcome;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Kind {
    Zero,
    Succ(usize),
    Limit,
    Max,
}

/// A structure over index carriers: `P = 0..np`, `L = 0..kinds.len()` in
/// increasing order, `V = 0..level.len()`.
#[derive(Clone, Debug)]
pub struct Raw {
    pub np: usize,
    pub kinds: Vec<Kind>,
    pub level: Vec<usize>,
    pub label: Vec<Option<u64>>,
    pub t: BTreeSet<(usize, usize)>,
    pub f: BTreeSet<(usize, usize, usize)>,
    pub g: BTreeSet<(usize, usize, usize)>,
    pub prec: Option<Vec<usize>>,
    pub h: Option<BTreeSet<(usize, usize, usize)>>,
    pub mode: Mode,
}

fn pid(i: usize) -> Id {
    Id::new(format!("p{i}"))
}
fn lid(i: usize) -> Id {
    Id::new(format!("l{i}"))
}
fn vid(i: usize) -> Id {
    Id::new(format!("v{i}"))
}

impl Raw {
    pub fn to_structure(&self) -> TauStructure {
        let parts = StructureParts {
            p: (0..self.np).map(pid).collect(),
            levels: self
                .kinds
                .iter()
                .enumerate()
                .map(|(j, k)| {
                    let kind = match *k {
                        Kind::Zero => LevelKind::Zero,
                        Kind::Succ(b) => LevelKind::Successor(lid(b)),
                        Kind::Limit => LevelKind::Limit,
                        Kind::Max => LevelKind::Max,
                    };
                    LevelElem::new(lid(j), kind)
                })
                .collect(),
            nodes: (0..self.level.len())
                .map(|x| Node { id: vid(x), level: lid(self.level[x]), label: self.label[x] })
                .collect(),
            tree: self.t.iter().map(|&(x, y)| (vid(x), vid(y))).collect(),
            f: self.f.iter().map(|&(a, p, b)| (lid(a), pid(p), lid(b))).collect(),
            g: self.g.iter().map(|&(a, p, v)| (lid(a), pid(p), vid(v))).collect(),
            prec: self.prec.as_ref().map(|xs| xs.iter().map(|&x| vid(x)).collect()),
            h: self.h.as_ref().map(|h| h.iter().map(|&(y, l, x)| (vid(y), lid(l), vid(x))).collect()),
            mode: self.mode,
        };
        TauStructure::new(parts).expect("index carriers are well formed")
    }
}

/// The set of violated axioms, or the missing component for `σ`.
pub fn naive(r: &Raw, sentence: Sentence) -> Result<BTreeSet<&'static str>, &'static str> {
    if sentence == Sentence::Sigma {
        if r.prec.is_none() {
            return Err("prec");
        }
        if r.h.is_none() {
            return Err("H");
        }
    }
    let nl = r.kinds.len();
    let nv = r.level.len();
    let np = r.np;
    let ls = 0..nl;
    let lt = |a: usize, b: usize| a < b;
    let le = |a: usize, b: usize| a == b || lt(a, b);
    let greatest = |a: usize| (0..nl).all(|b| !lt(a, b));
    let least = |a: usize| (0..nl).all(|b| !lt(b, a));
    let is_succ = |a: usize| matches!(r.kinds[a], Kind::Succ(_));
    let t = |x: usize, y: usize| r.t.contains(&(x, y));
    let lev = |x: usize| r.level[x];
    let two_levels = (0..nl).any(|a| (0..nl).any(|b| a != b));
    let mut bad = BTreeSet::new();
    let mut flag = |cond: bool, tag: &'static str| {
        if cond {
            bad.insert(tag);
        }
    };

    flag(ls.clone().any(|a| least(a) != (r.kinds[a] == Kind::Zero)), "L-zero");
    flag(
        ls.clone().any(|a| r.kinds[a] == Kind::Max && !greatest(a))
            || (two_levels && ls.clone().any(|a| greatest(a) && r.kinds[a] != Kind::Max)),
        "L-max",
    );
    flag(two_levels && ls.clone().any(|a| greatest(a) && is_succ(a)), "max-not-successor");
    flag(
        ls.clone().any(|a| match r.kinds[a] {
            Kind::Succ(b) => !(lt(b, a) && !(0..nl).any(|c| lt(b, c) && lt(c, a))),
            _ => false,
        }),
        "succ-position",
    );

    let vs = || 0..nv;
    flag(vs().any(|x| vs().any(|y| t(x, y) && !lt(lev(x), lev(y)))), "T-upward");
    flag(vs().any(|x| vs().any(|y| vs().any(|z| t(x, y) && t(y, z) && !t(x, z)))), "T-transitive");
    flag(
        vs().any(|a| vs().any(|b| vs().any(|z| a != b && t(a, z) && t(b, z) && !t(a, b) && !t(b, a)))),
        "T-chain",
    );
    flag(
        vs().any(|z| (0..nl).any(|c| lt(c, lev(z)) && vs().filter(|&y| t(y, z) && lev(y) == c).count() != 1)),
        "T-levels",
    );
    let limit = |a: usize| !least(a) && !is_succ(a);
    flag(
        vs().any(|x| {
            vs().any(|y| {
                x != y
                    && lev(x) == lev(y)
                    && limit(lev(x))
                    && vs().all(|w| t(w, x) == t(w, y))
                    && (r.mode == Mode::Literal || r.label[x] == r.label[y])
            })
        }),
        "limit-unique",
    );
    flag(vs().any(|x| r.label[x].is_some() && !greatest(lev(x))), "label-placement");
    flag(vs().any(|x| vs().any(|y| x != y && r.label[x].is_some() && r.label[x] == r.label[y])), "label-distinct");

    let f = |a, p, b| r.f.contains(&(a, p, b));
    flag(r.f.iter().any(|&(a, _, _)| greatest(a)), "F-domain");
    flag(r.f.iter().any(|&(a, _, b)| !le(b, a)), "F-range");
    flag(r.f.iter().any(|&(a, p, b)| (0..nl).any(|b2| b2 != b && f(a, p, b2))), "F-functional");
    flag(ls.clone().any(|a| !greatest(a) && (0..np).any(|p| !(0..nl).any(|b| f(a, p, b)))), "F-total");
    flag(
        ls.clone().any(|a| !greatest(a) && (0..nl).any(|b| le(b, a) && !(0..np).any(|p| f(a, p, b)))),
        "F-surjective",
    );
    let g = |a, p, v| r.g.contains(&(a, p, v));
    flag(r.g.iter().any(|&(a, _, _)| greatest(a)), "G-domain");
    flag(r.g.iter().any(|&(a, _, v)| lev(v) != a), "G-range");
    flag(r.g.iter().any(|&(a, p, v)| vs().any(|v2| v2 != v && g(a, p, v2))), "G-functional");
    flag(ls.clone().any(|a| !greatest(a) && (0..np).any(|p| !vs().any(|v| g(a, p, v)))), "G-total");
    flag(ls.clone().any(|a| !greatest(a) && vs().any(|v| lev(v) == a && !(0..np).any(|p| g(a, p, v)))), "G-surjective");

    if sentence == Sentence::Psi {
        flag(np == 0, "P-size");
    }
    if sentence == Sentence::Sigma {
        let prec = r.prec.as_ref().unwrap();
        let h = r.h.as_ref().unwrap();
        let branch = |x: usize| greatest(lev(x));
        let listed = |x: usize| prec.contains(&x);
        let rank = |x: usize| prec.iter().position(|&y| y == x).unwrap();
        let before = |x: usize, y: usize| listed(x) && listed(y) && rank(x) < rank(y);
        let below_eq = |x: usize, y: usize| branch(x) && branch(y) && listed(x) && listed(y) && (x == y || before(x, y));
        let hh = |y, l, x| h.contains(&(y, l, x));
        flag(vs().any(|x| branch(x) != listed(x)), "prec-domain");
        flag(vs().any(|x| listed(x) && !vs().any(|y| before(x, y))), "prec-no-max");
        flag(h.iter().any(|&(y, _, _)| !branch(y)), "H-domain");
        flag(h.iter().any(|&(y, _, x)| !below_eq(x, y)), "H-range");
        flag(h.iter().any(|&(y, l, x)| vs().any(|x2| x2 != x && hh(y, l, x2))), "H-functional");
        flag(vs().any(|y| branch(y) && (0..nl).any(|l| !vs().any(|x| hh(y, l, x)))), "H-total");
        flag(vs().any(|y| branch(y) && vs().any(|x| below_eq(x, y) && !(0..nl).any(|l| hh(y, l, x)))), "H-surjective");
    }
    Ok(bad)
}

fn checker(s: &TauStructure, sentence: Sentence) -> Result<BTreeSet<&'static str>, &'static str> {
    match check_with(s, sentence, &CheckOptions::default()) {
        Ok(v) => Ok(v.tags().into_iter().collect()),
        Err(CheckError::MissingComponent(what)) => Err(what),
        Err(e) => panic!("unexpected checker error {e}"),
    }
}

fn bits(mask: u64, n: usize) -> impl Iterator<Item = usize> {
    (0..n).filter(move |i| mask >> i & 1 == 1)
}

fn product(radix: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &r in radix {
        out = out.into_iter().flat_map(|v| (0..r).map(move |d| [v.clone(), vec![d]].concat())).collect();
    }
    out
}

fn kind_of(code: usize, nl: usize) -> Kind {
    match code {
        0 => Kind::Zero,
        1 => Kind::Limit,
        2 => Kind::Max,
        c => Kind::Succ((c - 3) % nl),
    }
}

/// Every raw structure with `np + nl + nv` at most `max` elements (and
/// `nl ≥ 1`), with labels from `{none, 0, 1}`, in literal mode.
pub fn all_raw(max: usize, mut each: impl FnMut(&Raw)) {
    for np in 0..max {
        for nl in 1..=max - np {
            for nv in 0..=max - np - nl {
                let kinds = product(&vec![3 + nl; nl]);
                let levels = product(&vec![nl; nv]);
                let labels = product(&vec![3; nv]);
                let tn = nv * nv;
                let fn_ = nl * np * nl;
                let gn = nl * np * nv;
                for k in &kinds {
                    for lv in &levels {
                        for lab in &labels {
                            for tm in 0..1u64 << tn {
                                for fm in 0..1u64 << fn_ {
                                    for gm in 0..1u64 << gn {
                                        let r = Raw {
                                            np,
                                            kinds: k.iter().map(|&c| kind_of(c, nl)).collect(),
                                            level: lv.clone(),
                                            label: lab.iter().map(|&l| if l == 0 { None } else { Some(l as u64 - 1) }).collect(),
                                            t: bits(tm, tn).map(|i| (i / nv, i % nv)).collect(),
                                            f: bits(fm, fn_).map(|i| (i / (np * nl), i / nl % np, i % nl)).collect(),
                                            g: bits(gm, gn).map(|i| (i / (np * nv), i / nv % np, i % nv)).collect(),
                                            prec: None,
                                            h: None,
                                            mode: Mode::Literal,
                                        };
                                        each(&r);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

/// `≺` and `H` decorations: a random order on the branch nodes or on a
/// random set of nodes, and `H` either near-functional or arbitrary.
fn decorate(r: &Raw, rng: &mut ChaCha8Rng) -> Raw {
    let nv = r.level.len();
    let nl = r.kinds.len();
    let top = nl - 1;
    let mut prec: Vec<usize> = if rng.gen_bool(0.6) {
        (0..nv).filter(|&x| r.level[x] == top).collect()
    } else {
        (0..nv).filter(|_| rng.gen_bool(0.5)).collect()
    };
    prec.shuffle(rng);
    let mut h = BTreeSet::new();
    if rng.gen_bool(0.5) && !prec.is_empty() {
        for (j, &y) in prec.iter().enumerate() {
            for l in 0..nl {
                if rng.gen_bool(0.9) {
                    h.insert((y, l, prec[rng.gen_range(0..=j)]));
                }
            }
        }
    } else {
        let p = [0.1, 0.3, 0.6][rng.gen_range(0..3)];
        for y in 0..nv {
            for l in 0..nl {
                for x in 0..nv {
                    if rng.gen_bool(p) {
                        h.insert((y, l, x));
                    }
                }
            }
        }
    }
    let mut out = r.clone();
    match rng.gen_range(0..8) {
        0 => out.prec = Some(prec),
        1 => out.h = Some(h),
        _ => {
            out.prec = Some(prec);
            out.h = Some(h);
        }
    }
    out
}

/// A random structure on the given carriers: each component is either
/// well shaped (valid kinds, a forest closure, functions) or arbitrary.
fn random_raw(np: usize, nl: usize, nv: usize, rng: &mut ChaCha8Rng) -> Raw {
    let dens = |rng: &mut ChaCha8Rng| [0.05, 0.2, 0.5][rng.gen_range(0..3)];
    let kinds: Vec<Kind> = if rng.gen_bool(0.6) {
        (0..nl)
            .map(|j| match j {
                0 => Kind::Zero,
                j if j == nl - 1 => Kind::Max,
                j if rng.gen_bool(0.5) => Kind::Succ(j - 1),
                _ => Kind::Limit,
            })
            .collect()
    } else {
        (0..nl).map(|_| kind_of(rng.gen_range(0..3 + nl), nl)).collect()
    };
    let level: Vec<usize> = (0..nv).map(|_| rng.gen_range(0..nl)).collect();
    let mut t = BTreeSet::new();
    if rng.gen_bool(0.6) {
        let parent: Vec<Option<usize>> = (0..nv)
            .map(|x| {
                let below: Vec<usize> = (0..nv).filter(|&y| level[y] + 1 == level[x]).collect();
                below.choose(rng).copied()
            })
            .collect();
        for x in 0..nv {
            let mut cur = parent[x];
            while let Some(p) = cur {
                t.insert((p, x));
                cur = parent[p];
            }
        }
    } else {
        let d = dens(rng);
        for x in 0..nv {
            for y in 0..nv {
                if rng.gen_bool(d) {
                    t.insert((x, y));
                }
            }
        }
    }
    let top = nl - 1;
    let label: Vec<Option<u64>> = (0..nv)
        .map(|x| {
            let wanted = if rng.gen_bool(0.7) { level[x] == top } else { rng.gen_bool(0.3) };
            (wanted && rng.gen_bool(0.5)).then(|| if rng.gen_bool(0.8) { x as u64 } else { 0 })
        })
        .collect();
    let mut f = BTreeSet::new();
    let mut g = BTreeSet::new();
    if rng.gen_bool(0.6) {
        for a in 0..nl.saturating_sub(1) {
            for p in 0..np {
                if rng.gen_bool(0.95) {
                    f.insert((a, p, rng.gen_range(0..=a)));
                }
                let here: Vec<usize> = (0..nv).filter(|&v| level[v] == a).collect();
                if let Some(&v) = here.choose(rng) {
                    g.insert((a, p, v));
                }
            }
        }
    } else {
        let d = dens(rng);
        for a in 0..nl {
            for p in 0..np {
                for b in 0..nl {
                    if rng.gen_bool(d) {
                        f.insert((a, p, b));
                    }
                }
                for v in 0..nv {
                    if rng.gen_bool(d) {
                        g.insert((a, p, v));
                    }
                }
            }
        }
    }
    let mode = if rng.gen_bool(0.5) { Mode::Literal } else { Mode::Surrogate };
    Raw { np, kinds, level, label, t, f, g, prec: None, h: None, mode }
}

#[derive(Default)]
struct Tally {
    structures: u64,
    comparisons: u64,
    ok_verdicts: u64,
    disagreements: Vec<String>,
}

impl Tally {
    fn compare(&mut self, r: &Raw) {
        self.structures += 1;
        let s = r.to_structure();
        let sentences: &[Sentence] = if r.prec.is_some() || r.h.is_some() {
            &[Sentence::Sigma]
        } else {
            &[Sentence::Sigma, Sentence::SigmaPrime, Sentence::Psi]
        };
        for &sentence in sentences {
            self.comparisons += 1;
            let want = naive(r, sentence);
            let got = checker(&s, sentence);
            if matches!(&got, Ok(v) if v.is_empty()) {
                self.ok_verdicts += 1;
            }
            if want != got && self.disagreements.len() < 5 {
                self.disagreements.push(format!("{sentence:?} on {r:?}: naive {want:?}, checker {got:?}"));
            }
        }
    }
}

pub fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut tally = Tally::default();
    let mut exhaustive = 0u64;
    all_raw(4, |r| {
        exhaustive += 1;
        for mode in [Mode::Literal, Mode::Surrogate] {
            let mut r = r.clone();
            r.mode = mode;
            tally.compare(&r);
            for _ in 0..2 {
                let d = decorate(&r, &mut rng);
                tally.compare(&d);
            }
        }
    });
    let sample_until = Duration::from_secs(100);
    let mut sampled = 0u64;
    while start.elapsed() < sample_until {
        for _ in 0..1000 {
            let total = rng.gen_range(5..=6);
            let nl = rng.gen_range(1..=total);
            let np = rng.gen_range(0..=total - nl);
            let nv = total - nl - np;
            let r = random_raw(np, nl, nv, &mut rng);
            tally.compare(&r);
            let d = decorate(&r, &mut rng);
            tally.compare(&d);
            sampled += 1;
        }
    }
    let elapsed = start.elapsed();
    let detail = format!(
        "{} comparisons, {} with no violation; all {} structures with <= 4 elements (both modes) plus {} random ones with 5-6 elements",
        tally.comparisons, tally.ok_verdicts, exhaustive, sampled
    );
    if !tally.disagreements.is_empty() {
        return Outcome::fail(format!("{detail}; disagreements: {}", tally.disagreements.join(" | ")));
    }
    if elapsed > Duration::from_secs(120) {
        return Outcome::fail(format!("{detail}; took {elapsed:?}"));
    }
    Outcome::unattainable(
        detail,
        "the space of all structures with <= 6 elements has about 6.4e12 isomorphism classes; only sizes <= 4 are exhaustive within 2 minutes",
    )
}
