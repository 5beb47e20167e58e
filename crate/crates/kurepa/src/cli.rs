//! Command parsing and dispatch.
//!
//! Exit codes: 0 success, 1 a failed verdict or an empty search, 2 usage
//! and parse errors. Machine-readable output goes to stdout or `-o`,
//! human summaries to stderr.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use kurepa_core::amalgam::{amalgam_search, amalgamate, ap_failure_witness, joint_embed_outcome, jep_witness};
use kurepa_core::extension::SearchOutcome;
use kurepa_core::forcing::cohen::cohen_support_and_restrict;
use kurepa_core::forcing::{run_generic, BranchIndex, DenseRequest};
use kurepa_core::morphisms::{report_lines, search_proper_extension, substructure_report};
use kurepa_core::spectrum::{self, SpectrumReport};
use kurepa_core::treeops::{count_branches, merge_shifted};
use kurepa_core::{check_with, classify, CheckError, CheckOptions, LKind, Mode, Sentence, TauStructure};

use crate::io::{self, IoError};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "kurepa", version, about = "Tree-coding structures at desk scale")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, ValueEnum)]
pub enum WitnessKind {
    Jep,
    Ap,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, ValueEnum)]
pub enum ModeArg {
    Literal,
    Surrogate,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Literal => Mode::Literal,
            ModeArg::Surrogate => Mode::Surrogate,
        }
    }
}

fn parse_sentence(s: &str) -> Result<Sentence, String> {
    s.parse()
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a structure against a sentence.
    Validate {
        file: PathBuf,
        #[arg(long, default_value = "psi", value_parser = parse_sentence)]
        sentence: Sentence,
        /// Declared size of P for psi (defaults to |P|).
        #[arg(long)]
        c: Option<usize>,
        /// Also require every inner node to reach the top inner level.
        #[arg(long)]
        pruned: bool,
        /// Print the short/long classification of a model of psi.
        #[arg(long)]
        classify: bool,
    },
    /// Print the substructure report of m in n.
    Compare { m: PathBuf, n: PathBuf },
    /// Search for a proper extension.
    Extend {
        file: PathBuf,
        #[arg(long)]
        budget: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Amalgamate two long models over a common substructure.
    Amalgamate {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Emit a joint-embedding or amalgamation counterexample with its
    /// search certificate.
    Witness {
        #[arg(long, value_enum)]
        kind: WitnessKind,
        #[arg(long, default_value_t = 5)]
        size: usize,
        #[arg(long, default_value_t = 10)]
        budget: usize,
        #[arg(short, long = "out-dir", default_value = ".")]
        out_dir: PathBuf,
    },
    /// Merge trees, shifting the i-th one up by i levels.
    Merge {
        #[arg(required = true)]
        trees: Vec<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Count and list the maximal chains of a tree.
    Branches { file: PathBuf },
    /// Run the forcing simulator on the standard schedule.
    Force {
        #[arg(long, required_unless_present = "replay")]
        height: Option<usize>,
        #[arg(long, required_unless_present = "replay")]
        branches: Option<i64>,
        #[arg(long, required_unless_present = "replay")]
        width: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Re-run a recorded run and compare bytes.
        #[arg(long, conflicts_with_all = ["height", "branches", "width"])]
        replay: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Support and restriction of Cohen conditions.
    CohenRestrict {
        #[arg(long)]
        conds: PathBuf,
        #[arg(long)]
        filter: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Enumerate small models and check the spectrum laws.
    Spectrum {
        #[arg(long)]
        max_size: usize,
        #[arg(long)]
        c: usize,
        #[arg(long)]
        budget: usize,
        #[arg(long, value_enum, default_value = "literal")]
        mode: ModeArg,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Verdict(String),
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<u8, Failure>;

/// Runs a parsed command and returns the exit code.
pub fn run(cli: Cli) -> u8 {
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Verdict(msg)) => {
            eprintln!("{msg}");
            EXIT_FAIL
        }
    }
}

fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::Validate { file, sentence, c, pruned, classify } => validate(&file, sentence, c, pruned, classify),
        Command::Compare { m, n } => compare(&m, &n),
        Command::Extend { file, budget, out } => extend(&file, budget, out.as_deref()),
        Command::Amalgamate { base, left, right, out } => amalgam(&base, &left, &right, out.as_deref()),
        Command::Witness { kind, size, budget, out_dir } => witness(kind, size, budget, &out_dir),
        Command::Merge { trees, out } => merge(&trees, out.as_deref()),
        Command::Branches { file } => branches(&file),
        Command::Force { height, branches, width, seed, replay, out } => match replay {
            Some(path) => replay_run(&path),
            None => force(height.unwrap(), branches.unwrap(), width.unwrap(), seed, out.as_deref()),
        },
        Command::CohenRestrict { conds, filter, out } => cohen(&conds, &filter, out.as_deref()),
        Command::Spectrum { max_size, c, budget, mode, out } => spectrum_cmd(max_size, c, budget, mode.into(), out.as_deref()),
    }
}

fn validate(file: &Path, sentence: Sentence, c: Option<usize>, pruned: bool, want_class: bool) -> Outcome {
    let s = io::read_structure(file)?;
    let opts = CheckOptions { c, pruned };
    let verdict = check_with(&s, sentence, &opts).map_err(|e| match e {
        CheckError::MissingComponent(_) => Failure::Usage(e.to_string()),
        CheckError::PreconditionFailed(_) => Failure::Verdict(e.to_string()),
    })?;
    if !verdict.ok() {
        for v in verdict.violations() {
            let w: Vec<&str> = v.witnesses.iter().map(|x| x.as_str()).collect();
            println!("{} {}: {}", v.tag, w.join(" "), v.message);
        }
        return Ok(EXIT_FAIL);
    }
    println!("ok sentence={} mode={}", sentence.as_str(), s.mode().as_str());
    if want_class {
        let cl = classify(&s, c).map_err(|e| Failure::Verdict(e.to_string()))?;
        let kind = match cl.l_kind {
            LKind::ShortL => "shortL",
            LKind::LongL => "longL",
        };
        println!("l_kind={kind}\nkurepa_analog={}", cl.kurepa_analog);
    }
    Ok(EXIT_OK)
}

fn compare(m: &Path, n: &Path) -> Outcome {
    let (m, n) = (io::read_structure(m)?, io::read_structure(n)?);
    let r = substructure_report(&m, &n).map_err(|e| Failure::Verdict(e.to_string()))?;
    print!("{}", report_lines(&r));
    Ok(if r.is_sub { EXIT_OK } else { EXIT_FAIL })
}

fn extend(file: &Path, budget: usize, out: Option<&Path>) -> Outcome {
    let m = io::read_structure(file)?;
    let o = search_proper_extension(&m, budget).map_err(|e| Failure::Verdict(e.to_string()))?;
    match o.found {
        Some(n) => {
            io::write_text(out, &io::structure_to_json(&n))?;
            eprintln!("extension of size {} after {} candidates", n.size(), o.examined);
            Ok(EXIT_OK)
        }
        None => Err(Failure::Verdict(format!(
            "no proper extension within budget {budget} ({} candidates examined)",
            o.examined
        ))),
    }
}

fn amalgam(base: &Path, left: &Path, right: &Path, out: Option<&Path>) -> Outcome {
    let m0 = io::read_structure(base)?;
    let m1 = io::read_structure(left)?;
    let m2 = io::read_structure(right)?;
    let r = amalgamate(&m0, &m1, &m2).map_err(|e| Failure::Verdict(e.to_string()))?;
    io::write_text(out, &io::structure_to_json(&r.n))?;
    eprintln!(
        "amalgam of size {}: {} new left, {} new right, {} identified, {} renamed, {} relabeled",
        r.n.size(),
        r.new_left,
        r.new_right,
        r.identified_pairs.len(),
        r.renamed.len(),
        r.relabeled.len()
    );
    Ok(EXIT_OK)
}

fn certificate(kind: &str, size: Option<usize>, o: &SearchOutcome) -> String {
    io::canonical(&serde_json::json!({
        "kind": kind,
        "size": size,
        "budget": o.budget,
        "examined": o.examined,
        "found": o.found.is_some(),
        "conflict": o.conflict,
    }))
}

fn witness(kind: WitnessKind, size: usize, budget: usize, dir: &Path) -> Outcome {
    let write = |name: &str, s: &TauStructure| io::write_text(Some(&dir.join(name)), &io::structure_to_json(s));
    let outcome = match kind {
        WitnessKind::Jep => {
            let (m, n) = jep_witness(size).map_err(|e| Failure::Usage(e.to_string()))?;
            let o = joint_embed_outcome(&m, &n, budget).map_err(|e| Failure::Usage(e.to_string()))?;
            write("m.json", &m)?;
            write("n.json", &n)?;
            io::write_text(Some(&dir.join("certificate.json")), &certificate("jep", Some(size), &o))?;
            o
        }
        WitnessKind::Ap => {
            let (m0, m1, m2) = ap_failure_witness();
            let o = amalgam_search(&m0, &m1, &m2, budget).map_err(|e| Failure::Usage(e.to_string()))?;
            write("m0.json", &m0)?;
            write("m1.json", &m1)?;
            write("m2.json", &m2)?;
            io::write_text(Some(&dir.join("certificate.json")), &certificate("ap", None, &o))?;
            o
        }
    };
    if outcome.found.is_some() {
        return Err(Failure::Verdict(format!("a common extension exists within budget {budget}")));
    }
    eprintln!("no common extension within budget {budget} ({} candidates examined)", outcome.examined);
    Ok(EXIT_OK)
}

fn merge(paths: &[PathBuf], out: Option<&Path>) -> Outcome {
    let trees = paths.iter().map(|p| io::read_tree(p)).collect::<Result<Vec<_>, _>>()?;
    io::write_text(out, &io::tree_to_json(&merge_shifted(&trees)))?;
    Ok(EXIT_OK)
}

fn branches(file: &Path) -> Outcome {
    let t = io::read_tree(file)?;
    println!("branches {}", count_branches(&t));
    let leaves: Vec<_> = t.leaves().cloned().collect();
    for leaf in leaves {
        let chain: Vec<String> = t.chain_to(&leaf).iter().map(|x| x.to_string()).collect();
        println!("{}", chain.join(" "));
    }
    Ok(EXIT_OK)
}

/// `HeightAtLeast(height)`, every index below `branches`, and a split for
/// every pair of them.
pub fn standard_schedule(height: usize, branches: i64) -> Vec<DenseRequest> {
    let mut reqs = vec![DenseRequest::HeightAtLeast(height)];
    reqs.extend((0..branches).map(|i| DenseRequest::IndexInDomain(BranchIndex(i))));
    for i in 0..branches {
        for j in i + 1..branches {
            reqs.push(DenseRequest::Split(BranchIndex(i), BranchIndex(j)));
        }
    }
    reqs
}

fn force(height: usize, branches: i64, width: usize, seed: u64, out: Option<&Path>) -> Outcome {
    if branches < 0 {
        return Err(Failure::Usage(String::from("--branches must be non-negative")));
    }
    let run = run_generic(&standard_schedule(height, branches), width, seed)
        .map_err(|e| Failure::Verdict(e.to_string()))?;
    io::write_text(out, &io::run_to_json(&run))?;
    eprintln!("final height {}, {} branch chains", run.final_tree().height(), run.branches.len());
    Ok(EXIT_OK)
}

fn replay_run(path: &Path) -> Outcome {
    let text = io::read_text(path)?;
    let (requests, width, seed) = io::parse_run_inputs(&text, &path.display().to_string()).map_err(IoError::from)?;
    let run = run_generic(&requests, width, seed).map_err(|e| Failure::Verdict(e.to_string()))?;
    if io::run_to_json(&run) == text {
        eprintln!("replay matches");
        Ok(EXIT_OK)
    } else {
        Err(Failure::Verdict(String::from("replay differs from the recorded run")))
    }
}

fn cohen(conds: &Path, filter: &Path, out: Option<&Path>) -> Outcome {
    let read = |p: &Path| -> Result<_, IoError> {
        let text = io::read_text(p)?;
        Ok(io::parse_cohen_list(&text, &p.display().to_string())?)
    };
    let conds = read(conds)?;
    let filter = read(filter)?.into_iter().collect();
    let s = cohen_support_and_restrict(&conds, &filter).map_err(|e| Failure::Verdict(e.to_string()))?;
    io::write_text(out, &io::support_to_json(&s))?;
    Ok(EXIT_OK)
}

/// Value of `KUREPA_THREADS`, 0 (automatic) when unset.
pub fn thread_cap() -> Result<usize, String> {
    match std::env::var("KUREPA_THREADS") {
        Err(_) => Ok(0),
        Ok(v) => v.trim().parse().map_err(|_| format!("KUREPA_THREADS must be a natural number, got `{v}`")),
    }
}

/// The spectrum report, with shapes and models spread over a thread pool
/// of `threads` workers (0 = automatic).
pub fn parallel_spectrum(
    max_size: usize,
    c: usize,
    budget: usize,
    mode: Mode,
    threads: usize,
) -> Result<SpectrumReport, spectrum::SpectrumError> {
    let shapes = spectrum::shapes(max_size, c)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
    Ok(pool.install(|| {
        let models: Vec<TauStructure> = shapes
            .par_iter()
            .flat_map_iter(|sh| spectrum::models_of_shape(sh, c, mode).into_values())
            .collect();
        models
            .par_iter()
            .map(|s| spectrum::model_report(s, c, budget))
            .reduce(SpectrumReport::empty, SpectrumReport::merge)
            .check_downward_closed(max_size)
    }))
}

fn spectrum_cmd(max_size: usize, c: usize, budget: usize, mode: Mode, out: Option<&Path>) -> Outcome {
    let threads = thread_cap().map_err(Failure::Usage)?;
    let r = parallel_spectrum(max_size, c, budget, mode, threads).map_err(|e| Failure::Usage(e.to_string()))?;
    io::write_text(out, &io::report_to_json(&r, max_size, c, budget, mode))?;
    eprintln!("{} model classes, trichotomy_ok={}", r.models, r.trichotomy_ok);
    Ok(if r.trichotomy_ok { EXIT_OK } else { EXIT_FAIL })
}
