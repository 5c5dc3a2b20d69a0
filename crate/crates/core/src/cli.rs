//! Command-line front end: argument parsing, instance loading, report
//! assembly and exit codes. The `rankhier` binary only forwards to
//! [`main_from`].

use crate::applications::{
    boolean_least_squares, fidelity_fixture_state, lovasz_theta, maxcut_bound, maxcut_bruteforce, mixed_unitary_check,
    orthonormal_rep_check, pseudo_boolean_bound, pseudo_boolean_bruteforce, pure_state_opt, unfaithfulness_bound,
    unfaithfulness_check, choi_state, Bound, Exclusion, Graph, Verdict,
};
use crate::error::{Error, Result};
use crate::hierarchy::{build, rank_parameter_sweep, BuildOptions, Level, LevelSpec};
use crate::matrix::{Field, FieldMatrix};
use crate::oracles::{sample_pure_states, OracleResult, SampleConfig, MAX_BOOLEAN_VARS};
use crate::problem::{LinearFunctional, RankSdp, Sense};
use crate::solver::{backend_from_env, SolverConfig, Status};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

/// Exit code for a completed run.
pub const EXIT_OK: i32 = 0;
/// Exit code for malformed input or a failed run.
pub const EXIT_ERROR: i32 = 1;
/// Exit code when the run certified an infeasibility verdict.
pub const EXIT_CERTIFIED: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "rankhier", version, about = "Rank-constrained SDP relaxation hierarchies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Max-Cut bounds with a brute-force reference.
    Maxcut,
    /// Pseudo-Boolean quadratic optimization or Boolean least squares.
    Boolean,
    /// Exclusion of orthonormal representations in dimension --k.
    Orthrep,
    /// Lovász theta of a graph.
    Theta,
    /// Fidelity-witness (un)faithfulness of a bipartite state.
    Unfaithful,
    /// Exclusion of mixed-unitary channels from their Choi state.
    MixedUnitary,
    /// Pure-state optimization under linear data.
    Purestate,
    /// Any rank-constrained problem given as JSON.
    Solve,
    /// Relaxation values over a list of rank parameters.
    SweepK,
    /// Batch run over an instance list, appending JSON lines to --out.
    Bench,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Maxcut => "maxcut",
            Command::Boolean => "boolean",
            Command::Orthrep => "orthrep",
            Command::Theta => "theta",
            Command::Unfaithful => "unfaithful",
            Command::MixedUnitary => "mixed-unitary",
            Command::Purestate => "purestate",
            Command::Solve => "solve",
            Command::SweepK => "sweep-k",
            Command::Bench => "bench",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldChoice {
    Real,
    Complex,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Toggle {
    On,
    Off,
}

#[derive(clap::Args, Debug, Clone, Serialize)]
pub struct Options {
    /// Graph in graph6 format.
    #[arg(long, global = true)]
    pub graph6: Option<String>,
    /// Graph as JSON `{"n_vertices", "edges"}`.
    #[arg(long, global = true)]
    pub edges: Option<PathBuf>,
    /// Problem or instance file.
    #[arg(long, global = true)]
    pub problem: Option<PathBuf>,
    /// Comma-separated levels: 1, 2 (reduced), Nx or N ≥ 3 (unreduced).
    #[arg(long, global = true, default_value = "1,2")]
    pub levels: String,
    /// Rank parameter.
    #[arg(long, global = true)]
    pub k: Option<f64>,
    /// Comma-separated rank parameters for sweep-k.
    #[arg(long, global = true)]
    pub ks: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub field: Option<FieldChoice>,
    /// Partial-transpose constraints at levels ≥ 2.
    #[arg(long, global = true, value_enum)]
    pub ppt: Option<Toggle>,
    /// Solver feasibility and gap tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed of the sampling oracles.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for bench (default: logical cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Report path (bench: JSON-lines store, appended).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

/// Result of one run.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// SHA-256 prefix of the command and canonical instance JSON.
    pub instance: String,
    pub backend: String,
    pub config: Options,
    pub levels: Vec<Bound>,
    pub oracles: Vec<NamedOracle>,
    pub verdicts: Vec<String>,
    /// Command-specific results.
    pub details: Value,
    pub exit_code: i32,
}

#[derive(Clone, Debug, Serialize)]
pub struct NamedOracle {
    pub name: String,
    #[serde(flatten)]
    pub result: OracleResult,
}

impl RunReport {
    fn new(command: Command, instance: &Value, opts: &Options) -> Self {
        RunReport {
            tool: "rankhier".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.name().into(),
            instance: instance_id(command.name(), instance),
            backend: backend_from_env().name(),
            config: opts.clone(),
            levels: Vec::new(),
            oracles: Vec::new(),
            verdicts: Vec::new(),
            details: Value::Null,
            exit_code: EXIT_OK,
        }
    }

    fn oracle(&mut self, name: &str, result: OracleResult) {
        self.oracles.push(NamedOracle { name: name.into(), result });
    }

    /// Records a verdict; certified ones switch the exit code.
    fn verdict(&mut self, text: String, certified: bool) {
        if certified {
            self.exit_code = EXIT_CERTIFIED;
        }
        self.verdicts.push(text);
    }

    /// Human-readable summary.
    pub fn summary(&self) -> String {
        let mut s = format!("{} {} [{}]\n", self.command, self.instance, self.backend);
        for b in &self.levels {
            let cert = b.certified.map_or("-".to_string(), |c| format!("{c:.8}"));
            s += &format!("  level {:>3} k={:<4} value {:.8} certified {cert} ({:?}, {:.2}s)\n", b.level, b.k, b.value, b.status, b.seconds);
        }
        for o in &self.oracles {
            s += &format!("  oracle {}: {:.8} ({:?}, {} evaluations)\n", o.name, o.result.value, o.result.method, o.result.evaluations);
        }
        for v in &self.verdicts {
            s += &format!("  verdict: {v}\n");
        }
        s
    }
}

fn instance_id(command: &str, instance: &Value) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update(instance.to_string().as_bytes());
    format!("{:x}", h.finalize())[..16].to_string()
}

/// Parses `args` (program name first), runs the command, writes the report
/// and returns the process exit code.
pub fn main_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(report) => {
            print!("{}", report.summary());
            if cli.command != Command::Bench {
                if let Some(path) = &cli.opts.out {
                    let text = serde_json::to_string_pretty(&report).expect("report serializes");
                    if let Err(e) = fs::write(path, text + "\n") {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return EXIT_ERROR;
                    }
                }
            }
            report.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<RunReport> {
    let o = &cli.opts;
    match cli.command {
        Command::Maxcut => run_maxcut(o),
        Command::Boolean => run_boolean(o),
        Command::Orthrep => run_orthrep(o),
        Command::Theta => run_theta(o),
        Command::Unfaithful => run_unfaithful(o),
        Command::MixedUnitary => run_mixed_unitary(o),
        Command::Purestate => run_purestate(o),
        Command::Solve => run_solve(o),
        Command::SweepK => run_sweep(o),
        Command::Bench => run_bench(o),
    }
}

fn solver_config(o: &Options) -> Result<SolverConfig> {
    let mut cfg = SolverConfig::default();
    if let Some(t) = o.tol {
        cfg.gap_tol = t;
        cfg.feas_tol = cfg.feas_tol.min(t);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn sample_config(o: &Options) -> SampleConfig {
    SampleConfig { seed: o.seed, ..Default::default() }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| Error::Parse(format!("bad {what} {t:?}"))))
        .collect()
}

fn level_specs(o: &Options) -> Result<Vec<LevelSpec>> {
    let mut out = Vec::new();
    for t in o.levels.split(',') {
        let mut spec = LevelSpec::parse(t)?;
        if let Some(p) = o.ppt {
            spec = spec.with_ppt(p == Toggle::On);
        }
        spec.validate()?;
        out.push(spec);
    }
    Ok(out)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))
}

fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    serde_json::from_str(&read(path)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn require<'a>(v: &'a Option<PathBuf>, flag: &str) -> Result<&'a PathBuf> {
    v.as_ref().ok_or_else(|| Error::Invalid(format!("missing --{flag}")))
}

fn load_graph(o: &Options) -> Result<Graph> {
    match (&o.graph6, &o.edges) {
        (Some(s), None) => Graph::parse_graph6(s),
        (None, Some(p)) => Graph::from_json(&read(p)?),
        (Some(_), Some(_)) => Err(Error::Invalid("give either --graph6 or --edges".into())),
        (None, None) => Err(Error::Invalid("missing --graph6 or --edges".into())),
    }
}

fn integer_k(o: &Options) -> Result<usize> {
    let k = o.k.ok_or_else(|| Error::Invalid("missing --k".into()))?;
    if k < 1.0 || k.fract() != 0.0 {
        return Err(Error::Invalid(format!("--k must be a positive integer here, got {k}")));
    }
    Ok(k as usize)
}

fn fields(o: &Options, default: FieldChoice) -> Vec<Field> {
    match o.field.unwrap_or(default) {
        FieldChoice::Real => vec![Field::Real],
        FieldChoice::Complex => vec![Field::Complex],
        FieldChoice::Both => vec![Field::Real, Field::Complex],
    }
}

fn run_maxcut(o: &Options) -> Result<RunReport> {
    let g = load_graph(o)?;
    let mut r = RunReport::new(Command::Maxcut, &serde_json::to_value(&g)?, o);
    let cfg = solver_config(o)?;
    for spec in level_specs(o)? {
        r.levels.push(maxcut_bound(&g, &spec, &cfg)?);
    }
    if g.n_vertices() <= MAX_BOOLEAN_VARS + 1 {
        let brute = maxcut_bruteforce(&g)? as f64;
        r.oracle("brute", OracleResult { value: brute, witness: None, method: crate::oracles::Method::Enumeration, evaluations: 1 << g.n_vertices().saturating_sub(1) });
    }
    Ok(r)
}

/// Boolean instance file: either `{"q", "c", "sense"}` or `{"a", "b"}`.
#[derive(Deserialize, Serialize)]
#[serde(untagged)]
enum BooleanFile {
    Quadratic {
        q: FieldMatrix,
        c: Vec<f64>,
        #[serde(default = "default_sense")]
        sense: Sense,
    },
    LeastSquares {
        a: FieldMatrix,
        b: Vec<f64>,
    },
}

fn default_sense() -> Sense {
    Sense::Max
}

fn run_boolean(o: &Options) -> Result<RunReport> {
    let file: BooleanFile = load_json(require(&o.problem, "problem")?)?;
    let mut r = RunReport::new(Command::Boolean, &serde_json::to_value(&file)?, o);
    let cfg = solver_config(o)?;
    match &file {
        BooleanFile::Quadratic { q, c, sense } => {
            for spec in level_specs(o)? {
                r.levels.push(pseudo_boolean_bound(q, c, &spec, *sense, &cfg)?);
            }
            if c.len() <= MAX_BOOLEAN_VARS {
                r.oracle("brute", pseudo_boolean_bruteforce(q, c, *sense)?);
            }
        }
        BooleanFile::LeastSquares { a, b } => {
            let mut rounded = Vec::new();
            for spec in level_specs(o)? {
                let rep = boolean_least_squares(a, b, &spec, &cfg)?;
                r.levels.push(rep.bound.clone());
                rounded.push(json!({ "level": spec.label(), "x": rep.rounded, "value": rep.rounded_value }));
            }
            if a.ncols() <= MAX_BOOLEAN_VARS {
                let a = a.to_real(1e-12)?;
                let q = a.transpose().matmul(&a)?;
                let c: Vec<f64> = (0..a.ncols()).map(|j| -2.0 * (0..a.nrows()).map(|i| a.re(i, j) * b[i]).sum::<f64>()).collect();
                let mut brute = pseudo_boolean_bruteforce(&q, &c, Sense::Min)?;
                brute.value += b.iter().map(|v| v * v).sum::<f64>();
                r.oracle("brute", brute);
            }
            r.details = json!({ "rounded": rounded });
        }
    }
    Ok(r)
}

fn run_orthrep(o: &Options) -> Result<RunReport> {
    let g = load_graph(o)?;
    let k = integer_k(o)?;
    let mut r = RunReport::new(Command::Orthrep, &json!({ "graph": g, "k": k }), o);
    let cfg = solver_config(o)?;
    let mut reports = Vec::new();
    for field in fields(o, FieldChoice::Both) {
        let rep = orthonormal_rep_check(&g, k, field, &cfg)?;
        let excluded = rep.verdict == Exclusion::ExcludedAtLevel2;
        r.verdict(format!("{field:?} k={k}: {:?}", rep.verdict), excluded);
        reports.push(rep);
    }
    r.details = serde_json::to_value(&reports)?;
    Ok(r)
}

fn run_theta(o: &Options) -> Result<RunReport> {
    let g = load_graph(o)?;
    let mut r = RunReport::new(Command::Theta, &serde_json::to_value(&g)?, o);
    r.levels.push(lovasz_theta(&g, &solver_config(o)?)?);
    Ok(r)
}

fn run_unfaithful(o: &Options) -> Result<RunReport> {
    let rho: FieldMatrix = match &o.problem {
        Some(p) => load_json(p)?,
        None => fidelity_fixture_state(),
    };
    let mut r = RunReport::new(Command::Unfaithful, &serde_json::to_value(&rho)?, o);
    let cfg = solver_config(o)?;
    for spec in level_specs(o)? {
        match spec.level {
            Level::L2Reduced if spec.ppt => {
                let v = unfaithfulness_check(&rho, &cfg, Some(&sample_config(o)))?;
                r.levels.push(v.bound.clone());
                r.verdict(format!("{:?} (certified {:.8} vs threshold {:.8})", v.verdict, v.xi2t, v.threshold), v.verdict == Verdict::Unfaithful);
                r.details = serde_json::to_value(&v)?;
            }
            _ => r.levels.push(unfaithfulness_bound(&rho, &spec, &cfg)?),
        }
    }
    Ok(r)
}

/// Channel file: `{"choi": M}` or `{"kraus": [M, ...]}`.
#[derive(Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
enum ChannelFile {
    Choi(FieldMatrix),
    Kraus(Vec<FieldMatrix>),
}

fn run_mixed_unitary(o: &Options) -> Result<RunReport> {
    let file: ChannelFile = load_json(require(&o.problem, "problem")?)?;
    let j = match &file {
        ChannelFile::Choi(j) => j.clone(),
        ChannelFile::Kraus(k) => choi_state(k)?,
    };
    let mut r = RunReport::new(Command::MixedUnitary, &serde_json::to_value(&j)?, o);
    let rep = mixed_unitary_check(&j, &solver_config(o)?)?;
    r.verdict(format!("{:?}", rep.verdict), rep.verdict == Exclusion::ExcludedAtLevel2);
    r.details = serde_json::to_value(&rep)?;
    Ok(r)
}

#[derive(Deserialize, Serialize)]
struct Measurement {
    operator: FieldMatrix,
    value: f64,
}

/// Pure-state file: `{"objective": M, "measurements": [{"operator", "value"}]}`.
#[derive(Deserialize, Serialize)]
struct PureStateFile {
    objective: FieldMatrix,
    #[serde(default)]
    measurements: Vec<Measurement>,
}

fn run_purestate(o: &Options) -> Result<RunReport> {
    let file: PureStateFile = load_json(require(&o.problem, "problem")?)?;
    let mut r = RunReport::new(Command::Purestate, &serde_json::to_value(&file)?, o);
    let cfg = solver_config(o)?;
    let data: Vec<(FieldMatrix, f64)> = file.measurements.iter().map(|m| (m.operator.clone(), m.value)).collect();
    for spec in level_specs(o)? {
        r.levels.push(pure_state_opt(&file.objective, &data, &spec, &cfg)?);
    }
    let field = data.iter().fold(file.objective.field(), |f, (m, _)| f.join(m.field()));
    let mut p = RankSdp::new(field, file.objective.promote(field)?, Sense::Max)?;
    for (m, v) in &data {
        p.push(LinearFunctional::eq(m.promote(field)?, *v))?;
    }
    r.oracle("sampled pure states", sample_pure_states(&p, &sample_config(o))?);
    Ok(r)
}

fn load_problem(o: &Options) -> Result<RankSdp> {
    let mut p = RankSdp::from_json(&read(require(&o.problem, "problem")?)?)?;
    if let Some(k) = o.k {
        p = p.with_rank_bound(k)?;
    }
    Ok(p)
}

fn relaxation_field(o: &Options) -> Result<Option<Field>> {
    match o.field {
        None => Ok(None),
        Some(FieldChoice::Real) => Ok(Some(Field::Real)),
        Some(FieldChoice::Complex) => Ok(Some(Field::Complex)),
        Some(FieldChoice::Both) => Err(Error::Invalid("--field both applies to orthrep only".into())),
    }
}

fn solve_problem(p: &RankSdp, spec: &LevelSpec, cfg: &SolverConfig) -> Result<Bound> {
    let start = Instant::now();
    let sol = build(p, spec, &BuildOptions::default())?.solve(cfg)?;
    Ok(Bound {
        level: spec.label(),
        k: p.rank_bound,
        sense: p.sense,
        value: sol.primal_value,
        certified: sol.certified_bound,
        status: sol.status,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn run_solve(o: &Options) -> Result<RunReport> {
    let p = load_problem(o)?;
    let mut r = RunReport::new(Command::Solve, &serde_json::to_value(&p)?, o);
    let cfg = solver_config(o)?;
    let field = relaxation_field(o)?;
    for mut spec in level_specs(o)? {
        spec.field = field.or(spec.field);
        let b = solve_problem(&p, &spec, &cfg)?;
        if b.status == Status::Infeasible {
            r.verdict(format!("level {} relaxation infeasible", b.level), true);
        }
        r.levels.push(b);
    }
    if p.integer_rank() == Some(1) && p.normalized {
        r.oracle("sampled pure states", sample_pure_states(&p, &sample_config(o))?);
    }
    Ok(r)
}

fn run_sweep(o: &Options) -> Result<RunReport> {
    let p = load_problem(o)?;
    let ks: Vec<f64> = parse_list(o.ks.as_deref().ok_or_else(|| Error::Invalid("missing --ks".into()))?, "rank parameter")?;
    let mut r = RunReport::new(Command::SweepK, &json!({ "problem": p, "ks": ks }), o);
    let mut spec = match o.levels.as_str() {
        "1,2" => LevelSpec::reduced(),
        s => LevelSpec::parse(s)?,
    };
    if let Some(t) = o.ppt {
        spec = spec.with_ppt(t == Toggle::On);
    }
    spec.field = relaxation_field(o)?;
    let pts = rank_parameter_sweep(&p, &ks, &spec, &BuildOptions::default(), &solver_config(o)?)?;
    for pt in &pts {
        r.levels.push(Bound {
            level: spec.label(),
            k: pt.k,
            sense: p.sense,
            value: pt.value.unwrap_or(f64::NAN),
            certified: pt.certified,
            status: pt.status,
            seconds: 0.0,
        });
    }
    let monotone = pts.iter().all(|p| p.warning.is_none());
    r.verdict(if monotone { "monotone in k".into() } else { "not monotone in k (solver accuracy)".into() }, false);
    r.details = serde_json::to_value(&pts)?;
    Ok(r)
}

/// One bench instance: a graph6 line (Max-Cut) or a JSON problem line.
fn parse_bench_line(line: &str) -> Result<(String, Value)> {
    let t = line.trim();
    if t.starts_with('{') {
        let p = RankSdp::from_json(t)?;
        Ok(("solve".into(), serde_json::to_value(&p)?))
    } else {
        let g = Graph::parse_graph6(t)?;
        Ok(("maxcut".into(), serde_json::to_value(&g)?))
    }
}

fn bench_record(kind: &str, instance: &Value, specs: &[LevelSpec], cfg: &SolverConfig) -> Result<Value> {
    let mut levels = Vec::new();
    let mut brute = None;
    match kind {
        "maxcut" => {
            let g: Graph = serde_json::from_value(instance.clone())?;
            for spec in specs {
                levels.push(maxcut_bound(&g, spec, cfg)?);
            }
            if g.n_vertices() <= MAX_BOOLEAN_VARS + 1 {
                brute = Some(maxcut_bruteforce(&g)? as f64);
            }
        }
        _ => {
            let p: RankSdp = serde_json::from_value(instance.clone())?;
            for spec in specs {
                levels.push(solve_problem(&p, spec, cfg)?);
            }
        }
    }
    Ok(json!({ "instance": instance_id(kind, instance), "kind": kind, "levels": levels, "brute": brute }))
}

fn run_bench(o: &Options) -> Result<RunReport> {
    let text = read(require(&o.problem, "problem")?)?;
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#')).collect();
    let instances = lines.iter().map(|l| parse_bench_line(l)).collect::<Result<Vec<_>>>()?;
    let specs = level_specs(o)?;
    let cfg = solver_config(o)?;
    let mut r = RunReport::new(Command::Bench, &json!(lines), o);
    let store = match &o.out {
        Some(p) => Some(Mutex::new(OpenOptions::new().create(true).append(true).open(p)?)),
        None => None,
    };
    let jobs = o.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).max(1);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<(usize, Result<Value>)>> = Mutex::new(Vec::new());
    std::thread::scope(|s| {
        for _ in 0..jobs.min(instances.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some((kind, inst)) = instances.get(i) else { break };
                let rec = bench_record(kind, inst, &specs, &cfg);
                if let (Some(store), Ok(rec)) = (&store, &rec) {
                    let mut f = store.lock().expect("store lock");
                    let _ = writeln!(f, "{rec}");
                }
                results.lock().expect("results lock").push((i, rec));
            });
        }
    });
    let mut results = results.into_inner().expect("results lock");
    results.sort_by_key(|(i, _)| *i);
    let mut records = Vec::new();
    for (i, rec) in results {
        match rec {
            Ok(v) => records.push(v),
            Err(e) => r.verdict(format!("instance {i} failed: {e}"), false),
        }
    }
    r.verdict(format!("{} of {} instances completed", records.len(), instances.len()), false);
    if records.len() != instances.len() {
        r.exit_code = EXIT_ERROR;
    }
    r.details = json!(records);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("rankhier").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn maxcut_of_the_triangle() {
        let r = run(&parse(&["maxcut", "--graph6", "Bw", "--levels", "1,2"])).unwrap();
        assert!((r.levels[0].value - 2.25).abs() < 1e-6);
        assert!((r.levels[1].value - 2.0).abs() < 1e-6);
        assert_eq!(r.oracles[0].result.value, 2.0);
        assert_eq!(r.exit_code, EXIT_OK);
    }

    #[test]
    fn exclusion_sets_the_certified_exit_code() {
        // three mutually orthogonal unit vectors in one dimension
        let r = run(&parse(&["orthrep", "--graph6", "B?", "--k", "1", "--field", "real"])).unwrap();
        assert_eq!(r.exit_code, EXIT_CERTIFIED);
    }

    #[test]
    fn malformed_input_is_an_error() {
        assert_eq!(main_from(["rankhier", "maxcut", "--graph6", "~~~"]), EXIT_ERROR);
        assert_eq!(main_from(["rankhier", "orthrep", "--graph6", "Bw", "--k", "1.5"]), EXIT_ERROR);
        assert_eq!(main_from(["rankhier", "frobnicate"]), EXIT_ERROR);
        assert!(parse_list::<f64>("1,x", "k").is_err());
    }

    #[test]
    fn reports_are_reproducible_modulo_timing() {
        let strip = |r: RunReport| {
            let mut v = serde_json::to_value(r).unwrap();
            for l in v["levels"].as_array_mut().unwrap() {
                l["seconds"] = json!(0);
            }
            v
        };
        let args = ["maxcut", "--graph6", "Dhc", "--seed", "3"];
        assert_eq!(strip(run(&parse(&args)).unwrap()), strip(run(&parse(&args)).unwrap()));
    }

    #[test]
    fn bench_appends_one_line_per_instance() {
        let dir = std::env::temp_dir().join(format!("rankhier-bench-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let input = dir.join("instances.txt");
        let store = dir.join("results.jsonl");
        fs::write(&input, "# triangle and square\nBw\nCl\n").unwrap();
        let _ = fs::remove_file(&store);
        let args = ["bench", "--problem", input.to_str().unwrap(), "--levels", "1", "--jobs", "2", "--out", store.to_str().unwrap()];
        for _ in 0..2 {
            assert_eq!(run(&parse(&args)).unwrap().exit_code, EXIT_OK);
        }
        let lines: Vec<Value> = fs::read_to_string(&store).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(lines.len(), 4);
        assert!(lines.iter().all(|l| l["instance"].as_str().unwrap().len() == 16));
        fs::remove_dir_all(&dir).unwrap();
    }
}
