//! JSON documents for structures, trees, forcing runs, Cohen conditions and
//! spectrum reports.
//!
//! Every writer goes through [`canonical`]: keys sorted, two-space indent,
//! integers only, trailing newline. Parsing and re-writing a canonical
//! document gives back the same bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use kurepa_core::forcing::cohen::{CohenCondition, Support};
use kurepa_core::forcing::{BranchIndex, DenseRequest, GenericRun, KurepaCondition};
use kurepa_core::spectrum::SpectrumReport;
use kurepa_core::structure::StructureError;
use kurepa_core::treeops::TreeError;
use kurepa_core::{Id, LevelElem, LevelKind, Mode, Node, PrunedTree, StructureParts, TauStructure};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// A document that could not be read. `line` is 1-based; `token` is the
/// first offending token as it appears in the file.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ParseError {
    pub file: String,
    pub line: usize,
    pub token: String,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {} (at `{}`)", self.file, self.line, self.message, self.token)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Read { path: path.display().to_string(), source })
}

/// Writes `text` to `path`, or to stdout when `path` is `None`.
pub fn write_text(path: Option<&Path>, text: &str) -> Result<(), IoError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| IoError::Write { path: p.display().to_string(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Sorted keys, pretty printed, newline terminated.
pub fn canonical<T: Serialize>(value: &T) -> String {
    let v: Value = serde_json::to_value(value).expect("documents are plain data");
    let mut s = serde_json::to_string_pretty(&v).expect("values always print");
    s.push('\n');
    s
}

fn token_at(text: &str, line: usize, column: usize) -> String {
    let Some(l) = text.lines().nth(line.saturating_sub(1)) else {
        return String::from("<end of file>");
    };
    let chars: Vec<char> = l.chars().collect();
    if chars.is_empty() {
        return String::from("<empty line>");
    }
    let is_tok = |c: char| !c.is_whitespace() && !",:[]{}".contains(c);
    let idx = column.saturating_sub(1).min(chars.len() - 1);
    if !is_tok(chars[idx]) {
        return chars[idx].to_string();
    }
    let mut start = idx;
    while start > 0 && is_tok(chars[start - 1]) {
        start -= 1;
    }
    let mut end = idx;
    while end < chars.len() && is_tok(chars[end]) {
        end += 1;
    }
    chars[start..end].iter().collect()
}

/// The line where `token` first occurs as a JSON string, or 1.
fn line_of(text: &str, token: &str) -> usize {
    let quoted = format!("\"{token}\"");
    text.lines().position(|l| l.contains(&quoted)).map_or(1, |i| i + 1)
}

fn error_at(file: &str, text: &str, token: &str, message: impl Into<String>) -> ParseError {
    ParseError { file: file.into(), line: line_of(text, token), token: token.into(), message: message.into() }
}

fn from_json<T: DeserializeOwned>(text: &str, file: &str) -> Result<T, ParseError> {
    serde_json::from_str(text).map_err(|e| ParseError {
        file: file.into(),
        line: e.line().max(1),
        token: token_at(text, e.line(), e.column()),
        message: e.to_string().split(" at line ").next().unwrap_or_default().to_string(),
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelDoc {
    id: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    succ_of: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    id: String,
    level: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureDoc {
    #[serde(rename = "P")]
    p: Vec<String>,
    #[serde(rename = "L")]
    l: Vec<LevelDoc>,
    #[serde(rename = "V", default)]
    v: Vec<NodeDoc>,
    #[serde(rename = "T", default)]
    t: Vec<(String, String)>,
    #[serde(rename = "F", default)]
    f: Vec<(String, String, String)>,
    #[serde(rename = "G", default)]
    g: Vec<(String, String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prec: Option<Vec<String>>,
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    h: Option<Vec<(String, String, String)>>,
    #[serde(default)]
    mode: Option<String>,
}

fn ids(v: &[Id]) -> Vec<String> {
    v.iter().map(|x| x.as_str().to_string()).collect()
}

fn triple(t: &(Id, Id, Id)) -> (String, String, String) {
    (t.0.to_string(), t.1.to_string(), t.2.to_string())
}

fn structure_doc(s: &TauStructure) -> StructureDoc {
    let parts = s.to_parts();
    StructureDoc {
        p: ids(&parts.p),
        l: parts
            .levels
            .iter()
            .map(|l| {
                let (kind, succ_of) = match &l.kind {
                    LevelKind::Zero => ("zero", None),
                    LevelKind::Successor(a) => ("successor", Some(a.to_string())),
                    LevelKind::Limit => ("limit", None),
                    LevelKind::Max => ("max", None),
                };
                LevelDoc { id: l.id.to_string(), kind: kind.into(), succ_of }
            })
            .collect(),
        v: parts.nodes.iter().map(|n| NodeDoc { id: n.id.to_string(), level: n.level.to_string(), label: n.label }).collect(),
        t: parts.tree.iter().map(|(x, y)| (x.to_string(), y.to_string())).collect(),
        f: parts.f.iter().map(triple).collect(),
        g: parts.g.iter().map(triple).collect(),
        prec: parts.prec.as_deref().map(ids),
        h: parts.h.as_ref().map(|h| h.iter().map(triple).collect()),
        mode: Some(parts.mode.as_str().into()),
    }
}

pub fn structure_to_json(s: &TauStructure) -> String {
    canonical(&structure_doc(s))
}

pub fn structure_value(s: &TauStructure) -> Value {
    serde_json::to_value(structure_doc(s)).expect("plain data")
}

pub fn parse_structure(text: &str, file: &str) -> Result<TauStructure, ParseError> {
    let doc: StructureDoc = from_json(text, file)?;
    let mut levels = Vec::new();
    for l in doc.l {
        let kind = match (l.kind.as_str(), l.succ_of) {
            ("zero", None) => LevelKind::Zero,
            ("limit", None) => LevelKind::Limit,
            ("max", None) => LevelKind::Max,
            ("successor", Some(a)) => LevelKind::Successor(Id::new(a)),
            ("successor", None) => return Err(error_at(file, text, &l.id, "a successor level needs `succ_of`")),
            (k @ ("zero" | "limit" | "max"), Some(a)) => {
                return Err(error_at(file, text, &a, format!("a {k} level takes no `succ_of`")))
            }
            (other, _) => return Err(error_at(file, text, other, format!("unknown level kind `{other}`"))),
        };
        levels.push(LevelElem::new(l.id, kind));
    }
    let mode = match doc.mode.as_deref() {
        None => Mode::Literal,
        Some(m) => m.parse::<Mode>().map_err(|e| error_at(file, text, m, e))?,
    };
    let own = |t: (String, String, String)| (Id::new(t.0), Id::new(t.1), Id::new(t.2));
    let parts = StructureParts {
        p: doc.p.into_iter().map(Id::new).collect(),
        levels,
        nodes: doc
            .v
            .into_iter()
            .map(|n| Node { id: Id::new(n.id), level: Id::new(n.level), label: n.label })
            .collect(),
        tree: doc.t.into_iter().map(|(x, y)| (Id::new(x), Id::new(y))).collect(),
        f: doc.f.into_iter().map(own).collect(),
        g: doc.g.into_iter().map(own).collect(),
        prec: doc.prec.map(|v| v.into_iter().map(Id::new).collect()),
        h: doc.h.map(|h| h.into_iter().map(own).collect()),
        mode,
    };
    TauStructure::new(parts).map_err(|e| {
        let token = match &e {
            StructureError::EmptyLevels => String::from("L"),
            StructureError::DuplicateId(id)
            | StructureError::UnknownReference { id, .. }
            | StructureError::DuplicateInOrder(id)
            | StructureError::NotInStructure(id) => id.to_string(),
        };
        error_at(file, text, &token, e.to_string())
    })
}

pub fn read_structure(path: &Path) -> Result<TauStructure, IoError> {
    let text = read_text(path)?;
    Ok(parse_structure(&text, &path.display().to_string())?)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeDoc {
    levels: Vec<Vec<String>>,
    parent: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    branch_labels: Option<Vec<(u64, String)>>,
}

fn tree_doc(t: &PrunedTree) -> TreeDoc {
    TreeDoc {
        levels: t.levels().iter().map(|lv| ids(lv)).collect(),
        parent: t.parent_map().iter().map(|(c, p)| (c.to_string(), p.to_string())).collect(),
        branch_labels: t.branch_labels().map(|m| m.iter().map(|(l, x)| (*l, x.to_string())).collect()),
    }
}

fn tree_from_doc(doc: TreeDoc, text: &str, file: &str) -> Result<PrunedTree, ParseError> {
    let mut parent = BTreeMap::new();
    for (c, p) in doc.parent {
        if parent.insert(Id::new(c.clone()), Id::new(p)).is_some() {
            return Err(error_at(file, text, &c, "a node has two parents"));
        }
    }
    let labels = doc.branch_labels.map(|v| v.into_iter().map(|(l, x)| (l, Id::new(x))).collect());
    let levels = doc.levels.into_iter().map(|lv| lv.into_iter().map(Id::new).collect()).collect();
    PrunedTree::new(levels, parent, labels).map_err(|e| {
        let msg = e.to_string();
        let token = match &e {
            TreeError::Malformed(why) => why.split('`').nth(1).unwrap_or("levels").to_string(),
            _ => String::from("levels"),
        };
        error_at(file, text, &token, msg)
    })
}

pub fn tree_to_json(t: &PrunedTree) -> String {
    canonical(&tree_doc(t))
}

pub fn parse_tree(text: &str, file: &str) -> Result<PrunedTree, ParseError> {
    let doc: TreeDoc = from_json(text, file)?;
    tree_from_doc(doc, text, file)
}

pub fn read_tree(path: &Path) -> Result<PrunedTree, IoError> {
    let text = read_text(path)?;
    Ok(parse_tree(&text, &path.display().to_string())?)
}

#[derive(Serialize, Deserialize, Clone, Copy, PartialEq, Eq, Debug)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum RequestDoc {
    HeightAtLeast(usize),
    IndexInDomain(i64),
    Split(i64, i64),
}

impl From<DenseRequest> for RequestDoc {
    fn from(d: DenseRequest) -> Self {
        match d {
            DenseRequest::HeightAtLeast(h) => RequestDoc::HeightAtLeast(h),
            DenseRequest::IndexInDomain(b) => RequestDoc::IndexInDomain(b.0),
            DenseRequest::Split(a, b) => RequestDoc::Split(a.0, b.0),
        }
    }
}

impl From<RequestDoc> for DenseRequest {
    fn from(d: RequestDoc) -> Self {
        match d {
            RequestDoc::HeightAtLeast(h) => DenseRequest::HeightAtLeast(h),
            RequestDoc::IndexInDomain(b) => DenseRequest::IndexInDomain(BranchIndex(b)),
            RequestDoc::Split(a, b) => DenseRequest::Split(BranchIndex(a), BranchIndex(b)),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConditionDoc {
    tree: TreeDoc,
    f: Vec<(i64, String)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunDoc {
    width: usize,
    seed: u64,
    requests: Vec<RequestDoc>,
    trace: Vec<ConditionDoc>,
    branches: Vec<(i64, Vec<String>)>,
}

fn condition_doc(p: &KurepaCondition) -> ConditionDoc {
    ConditionDoc { tree: tree_doc(p.tree()), f: p.f().iter().map(|(d, x)| (d.0, x.to_string())).collect() }
}

pub fn condition_to_json(p: &KurepaCondition) -> String {
    canonical(&condition_doc(p))
}

pub fn run_to_json(run: &GenericRun) -> String {
    canonical(&RunDoc {
        width: run.c,
        seed: run.seed,
        requests: run.requests.iter().map(|&d| d.into()).collect(),
        trace: run.trace.iter().map(condition_doc).collect(),
        branches: run.branches.iter().map(|(d, chain)| (d.0, ids(chain))).collect(),
    })
}

/// The recorded inputs of a run: requests, width and seed.
pub fn parse_run_inputs(text: &str, file: &str) -> Result<(Vec<DenseRequest>, usize, u64), ParseError> {
    let doc: RunDoc = from_json(text, file)?;
    Ok((doc.requests.into_iter().map(Into::into).collect(), doc.width, doc.seed))
}

pub fn parse_condition(text: &str, file: &str) -> Result<KurepaCondition, ParseError> {
    let doc: ConditionDoc = from_json(text, file)?;
    let t = tree_from_doc(doc.tree, text, file)?;
    let f = doc.f.into_iter().map(|(d, x)| (BranchIndex(d), Id::new(x))).collect();
    KurepaCondition::new(t, f).map_err(|e| error_at(file, text, "f", e.to_string()))
}

/// Conditions are lists of `[coordinate, slot, bit]` with `bit` 0 or 1.
type CohenDoc = Vec<(u64, u64, u8)>;

fn cohen_from_doc(doc: CohenDoc, file: &str) -> Result<CohenCondition, ParseError> {
    let mut out = BTreeMap::new();
    for (i, k, bit) in doc {
        if bit > 1 {
            return Err(ParseError {
                file: file.into(),
                line: 1,
                token: bit.to_string(),
                message: String::from("bits are 0 or 1"),
            });
        }
        if out.insert((i, k), bit == 1).is_some() {
            return Err(ParseError {
                file: file.into(),
                line: 1,
                token: format!("[{i}, {k}"),
                message: String::from("a pair is listed twice in one condition"),
            });
        }
    }
    Ok(CohenCondition(out))
}

fn cohen_doc(p: &CohenCondition) -> CohenDoc {
    p.0.iter().map(|(&(i, k), &b)| (i, k, u8::from(b))).collect()
}

pub fn parse_cohen_list(text: &str, file: &str) -> Result<Vec<CohenCondition>, ParseError> {
    let docs: Vec<CohenDoc> = from_json(text, file)?;
    docs.into_iter().map(|d| cohen_from_doc(d, file)).collect()
}

pub fn cohen_list_to_json<'a>(conds: impl IntoIterator<Item = &'a CohenCondition>) -> String {
    canonical(&conds.into_iter().map(cohen_doc).collect::<Vec<_>>())
}

#[derive(Serialize)]
struct SupportDoc {
    dstar: Vec<(u64, u64)>,
    d: Vec<u64>,
    restricted: Vec<CohenDoc>,
}

pub fn support_to_json(s: &Support) -> String {
    canonical(&SupportDoc {
        dstar: s.dstar.iter().copied().collect(),
        d: s.d.iter().copied().collect(),
        restricted: s.restricted.iter().map(cohen_doc).collect(),
    })
}

#[derive(Serialize)]
struct ReportDoc {
    max_size: usize,
    c: usize,
    budget: usize,
    mode: &'static str,
    models: usize,
    sizes_realized: BTreeSet<usize>,
    mm_sizes: BTreeSet<usize>,
    kurepa_analogs: usize,
    trichotomy_ok: bool,
    counterexample: Option<Value>,
}

pub fn report_to_json(r: &SpectrumReport, max_size: usize, c: usize, budget: usize, mode: Mode) -> String {
    let counterexample = r.counterexample.as_ref().map(|cx| {
        serde_json::json!({
            "law": cx.law,
            "structure": cx.structure.as_ref().map(structure_value),
        })
    });
    canonical(&ReportDoc {
        max_size,
        c,
        budget,
        mode: mode.as_str(),
        models: r.models,
        sizes_realized: r.sizes_realized.clone(),
        mm_sizes: r.mm_sizes.clone(),
        kurepa_analogs: r.kurepa_analogs,
        trichotomy_ok: r.trichotomy_ok,
        counterexample,
    })
}
