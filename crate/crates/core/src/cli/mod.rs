//! Command-line front end. [`run`] writes a command's report to any writer
//! and returns whether its verdict holds; `main` maps that to the exit code.

mod input;

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::axiom::{check_axioms, extend_to_total, Axiom, AxiomError, AxiomReport, CandidateOrder, InitialState};
use crate::bridge::{cross_check, HarnessConfig, HarnessReport};
use crate::exec::{litmus_run, parse_litmus, GlobalState, LitmusError, LitmusSpec};
use crate::gen::{self, Alphabet};
use crate::lang::{locations_of, parse, Cmd, ParseError, Program, Value};
use crate::po_sem::{denote_po, Bounds, BoundsError};
use crate::pomset::{NodeId, Pomset, DEFAULT_LIN_NODE_MAX};
use crate::tso_sem::{denote_tso, BufferList};

pub use input::{parse_buffer, parse_initial, parse_order, OrderInput};

#[derive(Debug, Parser)]
#[command(name = "tsopom", version, about = "Pomset semantics for TSO: litmus runs, denotations, axiom checks")]
pub struct Cli {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// Loop unrolling bound (default 2, or the file's own).
    #[arg(long, global = true, value_parser = positive())]
    pub unroll: Option<usize>,
    /// Value universe, e.g. `0,1,2` (default: derived from the program).
    #[arg(long, global = true, value_delimiter = ',')]
    pub values: Option<Vec<Value>>,
    /// Largest pomset whose linearisations are enumerated.
    #[arg(long, global = true, default_value_t = DEFAULT_LIN_NODE_MAX, value_parser = positive())]
    pub lin_node_max: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    /// Witness executions reported per litmus test.
    #[arg(long, global = true, default_value_t = 5)]
    pub witnesses: usize,
    /// Seed for randomised harness programs.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Po,
    Tso,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a litmus file; succeeds when its query holds.
    Litmus { file: PathBuf },
    /// List a program's denotation.
    Denote {
        /// A litmus file or a bare program.
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Level::Tso)]
        level: Level,
        /// Starting store buffer for the TSO level, e.g. `x:=3,y:=2`.
        #[arg(long, default_value = "")]
        buffer: String,
    },
    /// Check an order on a pomset's nodes against the axioms.
    Check {
        /// Pomset as JSON `{"nodes": [...], "edges": [[a, b], ...]}`.
        pomset: PathBuf,
        /// Node indices: a sequence `0 2 3 1` or pairs `1<0, 3<2`.
        order: PathBuf,
        /// `any`, `strict`, or values such as `x=0,y=0`.
        #[arg(long, default_value = "any")]
        init: String,
    },
    /// Cross-check executions against the axioms on every litmus file in a directory.
    Harness {
        dir: PathBuf,
        /// Run with a weakened checker that ignores this axiom.
        #[arg(long = "drop-axiom", value_parser = parse_axiom)]
        drop_axiom: Vec<Axiom>,
        /// Random programs added to the corpus (two threads, three statements, values 0 and 1).
        #[arg(long, default_value_t = 0)]
        random: usize,
    },
    /// Render a pomset JSON file as DOT.
    Dot { pomset: PathBuf },
}

fn positive() -> clap::builder::RangedU64ValueParser<usize> {
    clap::builder::RangedU64ValueParser::new().range(1..)
}

fn parse_axiom(text: &str) -> Result<Axiom, String> {
    Axiom::ALL
        .into_iter()
        .find(|a| a.to_string().eq_ignore_ascii_case(text))
        .ok_or_else(|| format!("unknown axiom {text:?}"))
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Write(#[from] io::Error),
    #[error(transparent)]
    Litmus(#[from] LitmusError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Axiom(#[from] AxiomError),
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("{0} output is not available for this command")]
    Format(&'static str),
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn input_error(path: &Path, message: impl ToString) -> CliError {
    CliError::Input { path: path.to_path_buf(), message: message.to_string() }
}

impl ConfigArgs {
    /// `base` with the flags' overrides applied; extra values (initial
    /// state ones) always stay in the universe.
    fn bounds(&self, base: Bounds, keep: impl IntoIterator<Item = Value>) -> Result<Bounds, CliError> {
        let values: BTreeSet<Value> = match &self.values {
            Some(v) => v.iter().copied().chain(keep).collect(),
            None => base.value_universe,
        };
        let unroll = self.unroll.unwrap_or(base.unroll_max);
        Ok(Bounds::new(values, unroll, self.lin_node_max)?)
    }
}

fn write_json(out: &mut dyn Write, value: &impl Serialize) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

/// Runs one command, writing its report to `out`. `Ok(true)` when the
/// verdict holds (and for commands without one).
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<bool, CliError> {
    let cfg = &cli.config;
    match &cli.command {
        Command::Litmus { file } => cmd_litmus(cfg, file, out),
        Command::Denote { file, level, buffer } => cmd_denote(cfg, file, *level, buffer, out),
        Command::Check { pomset, order, init } => cmd_check(cfg, pomset, order, init, out),
        Command::Harness { dir, drop_axiom, random } => cmd_harness(cfg, dir, drop_axiom, *random, out),
        Command::Dot { pomset } => {
            let p = read_pomset(pomset)?;
            write!(out, "{}", p.to_dot("pomset"))?;
            Ok(true)
        }
    }
}

fn read_pomset(path: &Path) -> Result<Pomset, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| input_error(path, e))
}

fn cmd_litmus(cfg: &ConfigArgs, file: &Path, out: &mut dyn Write) -> Result<bool, CliError> {
    let spec = parse_litmus(&read(file)?)?;
    let b = cfg.bounds(spec.bounds(), spec.initial.values().copied())?;
    let verdict = litmus_run(&spec, &b, cfg.witnesses)?;
    match cfg.format {
        Format::Json => write_json(out, &verdict)?,
        Format::Dot => {
            for (i, w) in verdict.witnesses.iter().enumerate() {
                write!(out, "{}", w.pomset.to_dot(&format!("witness_{i}")))?;
            }
        }
        Format::Human => {
            let status = if verdict.holds { "HOLDS" } else { "FAILS" };
            writeln!(out, "{}: {}: {status}", verdict.name, verdict.query)?;
            let s = &verdict.stats;
            writeln!(
                out,
                "  {} pomsets, {} executable, {} flush orders, {} final states, {} satisfying",
                s.pomsets,
                s.executable_pomsets,
                s.flush_orders,
                s.final_states,
                verdict.satisfying_states.len()
            )?;
            writeln!(
                out,
                "  bounds: unroll {}, values {:?}, lin_node_max {}",
                verdict.bounds.unroll_max, verdict.bounds.values, verdict.bounds.lin_node_max
            )?;
            for (i, w) in verdict.witnesses.iter().enumerate() {
                writeln!(out, "witness {i}: final {}", state_text(&w.final_state))?;
                writeln!(out, "  pomset {}", w.pomset_text)?;
                writeln!(out, "  order  {}", w.env_text)?;
            }
        }
    }
    Ok(verdict.holds)
}

fn state_text(s: &GlobalState) -> String {
    let parts: Vec<String> = s.iter().map(|(x, v)| format!("{x}={v}")).collect();
    format!("[{}]", parts.join(", "))
}

/// A litmus file's program and initial state, or a bare program.
fn program_of(text: &str) -> Result<(Program, GlobalState, Option<LitmusSpec>), CliError> {
    match parse_litmus(text) {
        Ok(spec) => Ok((spec.program.clone(), spec.initial.clone(), Some(spec))),
        Err(_) => Ok((parse(text)?, GlobalState::new(), None)),
    }
}

#[derive(Serialize)]
struct DenotedPomset {
    pomset: Pomset,
    /// Buffer left at the end (TSO level only).
    #[serde(skip_serializing_if = "Option::is_none")]
    buffer: Option<BufferList>,
}

#[derive(Serialize)]
struct Denotation {
    level: Level,
    program: String,
    start_buffer: BufferList,
    count: usize,
    pomsets: Vec<DenotedPomset>,
}

fn cmd_denote(
    cfg: &ConfigArgs,
    file: &Path,
    level: Level,
    buffer: &str,
    out: &mut dyn Write,
) -> Result<bool, CliError> {
    let (program, initial, spec) = program_of(&read(file)?)?;
    let base = match &spec {
        Some(spec) => spec.bounds(),
        None => Bounds::for_program(&program, &initial, 2),
    };
    let start = parse_buffer(buffer).map_err(|m| input_error(file, m))?;
    let b = cfg.bounds(base, initial.values().copied().chain(start.entries().iter().map(|&(_, v)| v)))?;
    let pomsets: Vec<DenotedPomset> = match level {
        Level::Po => denote_po(&program, &b).into_iter().map(|pomset| DenotedPomset { pomset, buffer: None }).collect(),
        Level::Tso => denote_tso(&program.body, &start, &b)
            .into_iter()
            .map(|(pomset, l)| DenotedPomset { pomset, buffer: Some(l) })
            .collect(),
    };
    let listing =
        Denotation { level, program: program.to_string(), start_buffer: start, count: pomsets.len(), pomsets };
    match cfg.format {
        Format::Json => write_json(out, &listing)?,
        Format::Dot => {
            for (i, d) in listing.pomsets.iter().enumerate() {
                write!(out, "{}", d.pomset.to_dot(&format!("pomset_{i}")))?;
            }
        }
        Format::Human => {
            let level = match level {
                Level::Po => "po",
                Level::Tso => "tso",
            };
            writeln!(out, "{} {level} pomsets for {}", listing.count, listing.program)?;
            for d in &listing.pomsets {
                match &d.buffer {
                    Some(l) => writeln!(out, "  {}  leaves {l}", d.pomset)?,
                    None => writeln!(out, "  {}", d.pomset)?,
                }
            }
        }
    }
    Ok(true)
}

#[derive(Serialize)]
struct CheckOutput {
    consistent: bool,
    total: bool,
    results: Vec<AxiomResult>,
    violations: Vec<ViolationOutput>,
    /// A consistent total order containing the input, for partial inputs.
    #[serde(skip_serializing_if = "Option::is_none")]
    extension: Option<Vec<NodeId>>,
}

#[derive(Serialize)]
struct AxiomResult {
    axiom: Axiom,
    pass: bool,
}

#[derive(Serialize)]
struct ViolationOutput {
    axiom: Axiom,
    nodes: Vec<NodeId>,
    labels: Vec<String>,
    message: String,
}

fn describe(p: &Pomset, report: &AxiomReport) -> Vec<ViolationOutput> {
    report
        .violations
        .iter()
        .map(|v| ViolationOutput {
            axiom: v.axiom,
            nodes: v.nodes.clone(),
            labels: v.nodes.iter().map(|&n| p.label(n).ascii()).collect(),
            message: v.message.clone(),
        })
        .collect()
}

fn node_kind(p: &Pomset, n: NodeId) -> &'static str {
    let a = p.label(n);
    if a.is_read() {
        "read"
    } else if a.is_global_write() {
        "write"
    } else {
        "action"
    }
}

fn cmd_check(cfg: &ConfigArgs, pomset: &Path, order: &Path, init: &str, out: &mut dyn Write) -> Result<bool, CliError> {
    let p = read_pomset(pomset)?;
    let init: InitialState = parse_initial(init).map_err(|m| input_error(Path::new("--init"), m))?;
    let t = match parse_order(&read(order)?).map_err(|m| input_error(order, m))? {
        OrderInput::Sequence(seq) => CandidateOrder::total(&p, &seq),
        OrderInput::Pairs(pairs) => CandidateOrder::from_pairs(&p, &pairs),
    }
    .map_err(|e| input_error(order, e))?;
    let report = check_axioms(&p, &t, &init)?;
    let extension =
        if report.consistent() && !t.is_total() { Some(extend_to_total(&p, &t, &init)?.total) } else { None };
    let output = CheckOutput {
        consistent: report.consistent(),
        total: t.is_total(),
        results: report.results.iter().map(|&(axiom, pass)| AxiomResult { axiom, pass }).collect(),
        violations: describe(&p, &report),
        extension,
    };
    match cfg.format {
        Format::Json => write_json(out, &output)?,
        Format::Dot => write!(out, "{}", t.order.to_dot("order"))?,
        Format::Human => {
            for r in &output.results {
                match output.violations.iter().find(|v| v.axiom == r.axiom) {
                    None => writeln!(out, "{}: pass", r.axiom)?,
                    Some(v) if v.nodes.len() == 1 => writeln!(
                        out,
                        "{}: FAIL at {} {} (node {}): {}",
                        v.axiom,
                        node_kind(&p, v.nodes[0]),
                        v.labels[0],
                        v.nodes[0],
                        v.message
                    )?,
                    Some(v) => writeln!(
                        out,
                        "{}: FAIL at {} (nodes {:?}): {}",
                        v.axiom,
                        v.labels.join(", "),
                        v.nodes,
                        v.message
                    )?,
                }
            }
            let verdict = if output.consistent { "consistent" } else { "inconsistent" };
            writeln!(out, "{verdict}")?;
            if let Some(ext) = &output.extension {
                let labels: Vec<String> = ext.iter().map(|&n| p.label(n).ascii()).collect();
                writeln!(out, "extends to {:?}: {}", ext, labels.join(" < "))?;
            }
        }
    }
    Ok(output.consistent)
}

#[derive(Debug, Serialize)]
pub struct Skipped {
    pub program: String,
    pub reason: String,
}

#[derive(Debug, Serialize)]
pub struct CorpusReport {
    pub passed: bool,
    pub dropped_axioms: Vec<Axiom>,
    pub programs: Vec<HarnessReport>,
    pub skipped: Vec<Skipped>,
}

fn uses_fence(c: &Cmd) -> bool {
    match c {
        Cmd::Fence => true,
        Cmd::Skip | Cmd::Assign(..) => false,
        Cmd::Seq(a, b) | Cmd::Par(a, b) | Cmd::If(_, a, b) => uses_fence(a) || uses_fence(b),
        Cmd::While(_, body) => uses_fence(body),
    }
}

/// Named programs with initial states: the directory's litmus files in
/// name order, then `random` generated programs.
fn harness_programs(
    cfg: &ConfigArgs,
    dir: &Path,
    random: usize,
) -> Result<Vec<(String, Program, GlobalState, Bounds)>, CliError> {
    let entries = fs::read_dir(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "lit"))
        .collect();
    files.sort();
    let mut programs = Vec::new();
    for file in files {
        let spec = parse_litmus(&read(&file)?).map_err(|e| input_error(&file, e))?;
        let b = cfg.bounds(spec.bounds(), spec.initial.values().copied())?;
        programs.push((spec.name.clone(), spec.program, spec.initial, b));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let alphabet = Alphabet::new(&["x", "y"], [0, 1]);
    for i in 0..random {
        let program = gen::program(&mut rng, &alphabet, 2, 3);
        let initial: GlobalState = locations_of(&program).into_iter().map(|x| (x, 0)).collect();
        let b = cfg.bounds(Bounds::for_program(&program, &initial, 2), [0])?;
        programs.push((format!("random_{i}"), program, initial, b));
    }
    Ok(programs)
}

/// Cross-checks each program; fenced programs are skipped since the axioms
/// have no fence rule.
pub fn corpus_harness(
    cfg: &ConfigArgs,
    dir: &Path,
    dropped: &[Axiom],
    random: usize,
) -> Result<CorpusReport, CliError> {
    let mut report =
        CorpusReport { passed: true, dropped_axioms: dropped.to_vec(), programs: Vec::new(), skipped: Vec::new() };
    for (name, program, initial, b) in harness_programs(cfg, dir, random)? {
        if uses_fence(&program.body) {
            report
                .skipped
                .push(Skipped { program: name, reason: "uses fence, which the axioms do not model".to_string() });
            continue;
        }
        let mut hc = HarnessConfig::new(b, initial);
        hc.axioms.retain(|a| !dropped.contains(a));
        let mut r = cross_check(&program, &hc);
        r.program = name;
        report.passed &= r.passed();
        report.programs.push(r);
    }
    Ok(report)
}

fn cmd_harness(
    cfg: &ConfigArgs,
    dir: &Path,
    dropped: &[Axiom],
    random: usize,
    out: &mut dyn Write,
) -> Result<bool, CliError> {
    if cfg.format == Format::Dot {
        return Err(CliError::Format("dot"));
    }
    let report = corpus_harness(cfg, dir, dropped, random)?;
    match cfg.format {
        Format::Json => write_json(out, &report)?,
        _ => {
            for r in &report.programs {
                let status = if r.passed() { "pass" } else { "FAIL" };
                writeln!(
                    out,
                    "{}: {status} ({} po pomsets, {} tso pomsets, {} executed orders, {} consistent orders)",
                    r.program, r.po_pomsets, r.tso_pomsets, r.executed_orders, r.consistent_orders
                )?;
                let findings =
                    [("soundness", &r.soundness), ("completeness", &r.completeness), ("mismatch", &r.mismatches)];
                for (kind, list) in findings {
                    if let Some(f) = list.first() {
                        writeln!(
                            out,
                            "  {kind}: {} finding(s), first: {} on {} {:?}",
                            list.len(),
                            f.problem,
                            f.pomset,
                            f.order
                        )?;
                    }
                }
                for e in &r.errors {
                    writeln!(out, "  error: {e}")?;
                }
            }
            for s in &report.skipped {
                writeln!(out, "{}: skipped ({})", s.program, s.reason)?;
            }
            let status = if report.passed { "pass" } else { "FAIL" };
            writeln!(out, "{} programs checked, {} skipped: {status}", report.programs.len(), report.skipped.len())?;
        }
    }
    Ok(report.passed)
}
