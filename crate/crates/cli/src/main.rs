//! Command-line front end: verify instances, generate reduction instances,
//! run the brute-force oracle, and benchmark solver suites.
//!
//! Exit codes: 0 = unreachable (safe), 1 = reachable (unsafe),
//! 2 = usage or parse error, 3 = resource budget exceeded.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result, anyhow, bail};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use shmv_core::bsr::{BsrConfig, solve_bsr_with, stage_trace_to_json_lines};
use shmv_core::dp::{
    DpConfig, ExplicitConfig, compute_table, explicit_graph_reach_with, explicit_reach_table,
    solve_lcr_dp_with,
};
use shmv_core::generators::{
    GeneratorReport, gen_bsr_constant_domain, gen_bsr_crosscomp, gen_bsr_from_kxk_clique,
    gen_lcr_crosscomp_c, gen_lcr_crosscomp_dl, gen_lcr_from_3sat, gen_lcr_from_clique_l,
    gen_lcr_from_kxk_clique, gen_lcr_from_set_cover,
};
use shmv_core::model::{
    BsrInstance, Certificate, Instance, LcrInstance, SolveError, Verdict, parse_program,
    serialize_program,
};
use shmv_core::oracles::{
    CnfFormula, Graph, GridGraph, OracleError, SetCoverInstance, lcr_explicit_bfs_capped,
};
use shmv_core::sample::{random_bsr, random_lcr};
use shmv_core::scc::{SccConfig, solve_lcr_scc_with};
use shmv_core::witness::{WitnessConfig, solve_lcr_witness_with};

const EXIT_SAFE: u8 = 0;
const EXIT_UNSAFE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "shmv", version, about = "Safety verification for shared-memory programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide reachability of an unsafe/target state.
    Verify {
        #[command(subcommand)]
        kind: VerifyKind,
    },
    /// Generate an instance from a source problem via a reduction.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Brute-force reference deciders.
    Oracle {
        #[command(subcommand)]
        kind: OracleKind,
    },
    /// Run a suite of (instance, algorithm) rows and emit a CSV.
    Bench {
        /// JSON suite file: a list of {name, input, algo, stages?, max-nodes?}.
        #[arg(long)]
        suite: PathBuf,
        /// CSV output path (stdout if omitted).
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum Algo {
    Witness,
    Scc,
    Dp,
    Explicit,
}

#[derive(Subcommand)]
enum VerifyKind {
    /// Leader/contributor reachability.
    Lcr {
        /// Instance file (JSON).
        file: PathBuf,
        #[arg(long, value_enum, default_value = "dp")]
        algo: Algo,
        /// Write the certificate here when the instance is reachable.
        #[arg(long)]
        certificate: Option<PathBuf>,
        /// Write the full reachability table here (dp or explicit only).
        #[arg(long)]
        dump_table: Option<PathBuf>,
        /// Node budget for the search-based solvers.
        #[arg(long)]
        max_nodes: Option<u64>,
    },
    /// Bounded-stage reachability.
    Bsr {
        /// Instance file (JSON).
        file: PathBuf,
        /// Override the stage budget stored in the instance.
        #[arg(long)]
        stages: Option<usize>,
        /// Write the stage trace here when the instance is reachable.
        #[arg(long)]
        certificate: Option<PathBuf>,
        #[arg(long)]
        max_nodes: Option<u64>,
    },
}

#[derive(Args)]
struct GenCommon {
    /// Output instance file.
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Subcommand)]
enum GenKind {
    /// Grid-graph row-clique -> LCR (input: grid graph JSON).
    #[command(name = "kxk-lcr")]
    KxkLcr {
        input: PathBuf,
        #[command(flatten)]
        common: GenCommon,
    },
    /// 3-CNF satisfiability -> LCR (input: DIMACS).
    #[command(name = "3sat-lcr")]
    ThreeSatLcr {
        input: PathBuf,
        #[command(flatten)]
        common: GenCommon,
    },
    /// Set cover -> LCR (input: {universe, sets, budget} JSON).
    #[command(name = "setcover-lcr")]
    SetCoverLcr {
        input: PathBuf,
        #[command(flatten)]
        common: GenCommon,
    },
    /// Formula family -> one LCR instance, index tree in the contributor
    /// (inputs: one DIMACS file per formula, same shape).
    #[command(name = "crosscomp-lcr-dl")]
    CrossCompLcrDl {
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        common: GenCommon,
    },
    /// Formula family -> one LCR instance, leader branches per formula.
    #[command(name = "crosscomp-lcr-c")]
    CrossCompLcrC {
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        common: GenCommon,
    },
    /// k-clique in a general graph -> LCR (input: {n, edges} JSON).
    #[command(name = "clique-lcr-l")]
    CliqueLcrL {
        input: PathBuf,
        #[arg(long, short)]
        k: usize,
        #[command(flatten)]
        common: GenCommon,
    },
    /// Grid-graph row-clique -> single-stage BSR.
    #[command(name = "kxk-bsr")]
    KxkBsr {
        input: PathBuf,
        #[command(flatten)]
        common: GenCommon,
    },
    /// Formula family -> one single-stage BSR instance.
    #[command(name = "crosscomp-bsr")]
    CrossCompBsr {
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        common: GenCommon,
    },
    /// 3-CNF -> single-stage BSR over the fixed 4-symbol domain.
    #[command(name = "3sat-bsr-constd")]
    ThreeSatBsrConstD {
        input: PathBuf,
        #[command(flatten)]
        common: GenCommon,
    },
    /// Seeded random LCR instance (for fuzzing outside the test suite).
    #[command(name = "random-lcr")]
    RandomLcr {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: GenCommon,
    },
    /// Seeded random BSR instance.
    #[command(name = "random-bsr")]
    RandomBsr {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: GenCommon,
    },
}

#[derive(Subcommand)]
enum OracleKind {
    /// Explicit BFS over A^t with exactly --copies contributor copies.
    #[command(name = "lcr-bfs")]
    LcrBfs {
        file: PathBuf,
        #[arg(long)]
        copies: usize,
        #[arg(long, default_value_t = 2_000_000)]
        max_nodes: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(classify(&e))
        }
    }
}

/// Budget-class errors exit 3, everything else is a usage/parse error.
fn classify(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(solve) = cause.downcast_ref::<SolveError>() {
            return match solve {
                SolveError::BudgetExceeded(_) | SolveError::TooLarge(_) => EXIT_BUDGET,
            };
        }
        if let Some(oracle) = cause.downcast_ref::<OracleError>() {
            if matches!(oracle, OracleError::CapExceeded(_)) {
                return EXIT_BUDGET;
            }
        }
    }
    EXIT_USAGE
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Verify { kind } => verify(kind),
        Command::Gen { kind } => gen(kind),
        Command::Oracle { kind } => oracle(kind),
        Command::Bench { suite, output } => bench(&suite, output.as_deref()),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_lcr(path: &Path) -> Result<LcrInstance> {
    match parse_program(&read(path)?)? {
        Instance::Lcr(inst) => Ok(inst),
        Instance::Bsr(_) => bail!("{} holds a BSR instance, expected LCR", path.display()),
    }
}

fn load_bsr(path: &Path) -> Result<BsrInstance> {
    match parse_program(&read(path)?)? {
        Instance::Bsr(inst) => Ok(inst),
        Instance::Lcr(_) => bail!("{} holds an LCR instance, expected BSR", path.display()),
    }
}

fn solve_lcr(inst: &LcrInstance, algo: Algo, max_nodes: Option<u64>) -> Result<Verdict, SolveError> {
    match algo {
        Algo::Witness => {
            let mut cfg = WitnessConfig::default();
            if let Some(n) = max_nodes {
                cfg.max_nodes = n;
            }
            solve_lcr_witness_with(inst, &cfg)
        }
        Algo::Scc => {
            let mut cfg = SccConfig::default();
            if let Some(n) = max_nodes {
                cfg.max_nodes = n;
            }
            solve_lcr_scc_with(inst, &cfg)
        }
        Algo::Dp => solve_lcr_dp_with(
            inst,
            &DpConfig {
                certificates: true,
                ..DpConfig::default()
            },
        ),
        Algo::Explicit => explicit_graph_reach_with(inst, &ExplicitConfig::default()),
    }
}

fn write_certificate(path: &Path, cert: &Certificate, inst: &Instance) -> Result<()> {
    let text = match (cert, inst) {
        (Certificate::Witness(tokens), _) | (Certificate::SccWitness(tokens), _) => {
            format!("{}\n", tokens.join(" "))
        }
        (Certificate::Saturation(steps), Instance::Lcr(lcr)) => {
            let contributor = lcr.solving_contributor();
            steps
                .iter()
                .map(|s| {
                    format!(
                        "add {} at ({},{})\n",
                        contributor.state_name(s.added),
                        lcr.leader.state_name(s.leader),
                        lcr.domain[s.memory]
                    )
                })
                .collect()
        }
        (Certificate::Trace(trace), Instance::Bsr(bsr)) => stage_trace_to_json_lines(trace, bsr),
        _ => bail!("certificate does not match the instance kind"),
    };
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn report(verdict: &Verdict, algo: &str, params: &str, elapsed: std::time::Duration) -> u8 {
    if verdict.reachable {
        println!("verdict: reachable (UNSAFE: an unsafe/target state is reachable)");
    } else {
        println!("verdict: unreachable (safe)");
    }
    println!("algorithm: {algo}");
    println!("parameters: {params}");
    println!("nodes: {}", verdict.stats.nodes);
    println!("time: {elapsed:?}");
    if verdict.reachable { EXIT_UNSAFE } else { EXIT_SAFE }
}

fn lcr_params(inst: &LcrInstance) -> String {
    format!(
        "L={} C={} D={}",
        inst.leader.len(),
        inst.solving_contributor().len(),
        inst.domain.len()
    )
}

fn bsr_params(inst: &BsrInstance) -> String {
    let p = inst.program.threads.iter().map(|t| t.len()).max().unwrap_or(0);
    format!(
        "P={} t={} s={} D={}",
        p,
        inst.program.threads.len(),
        inst.stages,
        inst.program.domain.len()
    )
}

fn verify(kind: VerifyKind) -> Result<u8> {
    match kind {
        VerifyKind::Lcr {
            file,
            algo,
            certificate,
            dump_table,
            max_nodes,
        } => {
            let inst = load_lcr(&file)?;
            inst.validate()?;
            let start = Instant::now();
            let verdict = solve_lcr(&inst, algo, max_nodes)?;
            let elapsed = start.elapsed();
            if let Some(path) = dump_table {
                let table = match algo {
                    Algo::Explicit => explicit_reach_table(&inst)?,
                    _ => compute_table(&inst)?,
                };
                let mut text = table.to_lines().join("\n");
                text.push('\n');
                std::fs::write(&path, text)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if let (Some(path), Some(cert)) = (&certificate, &verdict.certificate) {
                write_certificate(path, cert, &Instance::Lcr(inst.clone()))?;
            }
            let algo_name = format!("{:?}", algo).to_lowercase();
            Ok(report(&verdict, &algo_name, &lcr_params(&inst), elapsed))
        }
        VerifyKind::Bsr {
            file,
            stages,
            certificate,
            max_nodes,
        } => {
            let mut inst = load_bsr(&file)?;
            if let Some(s) = stages {
                inst.stages = s;
            }
            inst.validate()?;
            let mut cfg = BsrConfig::default();
            if let Some(n) = max_nodes {
                cfg.max_nodes = n;
            }
            let start = Instant::now();
            let verdict = solve_bsr_with(&inst, &cfg)?;
            let elapsed = start.elapsed();
            if let (Some(path), Some(cert)) = (&certificate, &verdict.certificate) {
                write_certificate(path, cert, &Instance::Bsr(inst.clone()))?;
            }
            Ok(report(&verdict, "product", &bsr_params(&inst), elapsed))
        }
    }
}

fn load_family(paths: &[PathBuf]) -> Result<Vec<CnfFormula>> {
    if paths.is_empty() {
        bail!("at least one DIMACS input is required");
    }
    paths
        .iter()
        .map(|p| Ok(CnfFormula::from_dimacs(&read(p)?)?))
        .collect()
}

fn emit(report: GeneratorReport, common: &GenCommon) -> Result<u8> {
    let text = serialize_program(&report.instance);
    std::fs::write(&common.output, text)
        .with_context(|| format!("writing {}", common.output.display()))?;
    println!("{}", report.summary());
    println!("equivalence: {}", report.equivalence);
    Ok(EXIT_SAFE)
}

fn gen(kind: GenKind) -> Result<u8> {
    match kind {
        GenKind::KxkLcr { input, common } => {
            let g = GridGraph::from_json(&read(&input)?)?;
            emit(gen_lcr_from_kxk_clique(&g)?, &common)
        }
        GenKind::ThreeSatLcr { input, common } => {
            let phi = CnfFormula::from_dimacs(&read(&input)?)?;
            emit(gen_lcr_from_3sat(&phi)?, &common)
        }
        GenKind::SetCoverLcr { input, common } => {
            let sc = SetCoverInstance::from_json(&read(&input)?)?;
            emit(gen_lcr_from_set_cover(&sc)?, &common)
        }
        GenKind::CrossCompLcrDl { inputs, common } => {
            emit(gen_lcr_crosscomp_dl(&load_family(&inputs)?)?, &common)
        }
        GenKind::CrossCompLcrC { inputs, common } => {
            emit(gen_lcr_crosscomp_c(&load_family(&inputs)?)?, &common)
        }
        GenKind::CliqueLcrL { input, k, common } => {
            let g = Graph::from_json(&read(&input)?)?;
            emit(gen_lcr_from_clique_l(&g, k)?, &common)
        }
        GenKind::KxkBsr { input, common } => {
            let g = GridGraph::from_json(&read(&input)?)?;
            emit(gen_bsr_from_kxk_clique(&g)?, &common)
        }
        GenKind::CrossCompBsr { inputs, common } => {
            emit(gen_bsr_crosscomp(&load_family(&inputs)?)?, &common)
        }
        GenKind::ThreeSatBsrConstD { input, common } => {
            let phi = CnfFormula::from_dimacs(&read(&input)?)?;
            emit(gen_bsr_constant_domain(&phi)?, &common)
        }
        GenKind::RandomLcr { seed, common } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let inst = random_lcr(&mut rng, 4, 4, 3);
            let text = serialize_program(&Instance::Lcr(inst));
            std::fs::write(&common.output, text)
                .with_context(|| format!("writing {}", common.output.display()))?;
            println!("seed={seed}");
            Ok(EXIT_SAFE)
        }
        GenKind::RandomBsr { seed, common } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let inst = random_bsr(&mut rng, 3, 3, 3, 4);
            let text = serialize_program(&Instance::Bsr(inst));
            std::fs::write(&common.output, text)
                .with_context(|| format!("writing {}", common.output.display()))?;
            println!("seed={seed}");
            Ok(EXIT_SAFE)
        }
    }
}

fn oracle(kind: OracleKind) -> Result<u8> {
    match kind {
        OracleKind::LcrBfs {
            file,
            copies,
            max_nodes,
        } => {
            let inst = load_lcr(&file)?;
            inst.validate()?;
            let reachable = lcr_explicit_bfs_capped(&inst, copies, max_nodes)?;
            if reachable {
                println!("verdict: reachable with {copies} contributor copies (UNSAFE)");
                Ok(EXIT_UNSAFE)
            } else {
                println!("verdict: unreachable with {copies} contributor copies");
                Ok(EXIT_SAFE)
            }
        }
    }
}

#[derive(Deserialize)]
struct BenchRow {
    name: String,
    input: PathBuf,
    /// witness | scc | dp | explicit for LCR files, bsr for BSR files.
    algo: String,
    stages: Option<usize>,
    #[serde(rename = "max-nodes")]
    max_nodes: Option<u64>,
}

fn bench(suite: &Path, output: Option<&Path>) -> Result<u8> {
    let rows: Vec<BenchRow> =
        serde_json::from_str(&read(suite)?).context("parsing the bench suite")?;
    let mut csv = String::from("name,algo,reachable,nodes,millis,error\n");
    for row in rows {
        let start = Instant::now();
        let outcome = bench_row(&row);
        let millis = start.elapsed().as_secs_f64() * 1e3;
        match outcome {
            Ok(v) => {
                csv.push_str(&format!(
                    "{},{},{},{},{millis:.3},\n",
                    row.name, row.algo, v.reachable, v.stats.nodes
                ));
            }
            Err(e) => {
                let msg = format!("{e:#}").replace([',', '\n'], ";");
                csv.push_str(&format!("{},{},,,{millis:.3},{msg}\n", row.name, row.algo));
            }
        }
    }
    match output {
        Some(path) => std::fs::write(path, csv)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(EXIT_SAFE)
}

fn bench_row(row: &BenchRow) -> Result<Verdict> {
    if row.algo == "bsr" {
        let mut inst = load_bsr(&row.input)?;
        if let Some(s) = row.stages {
            inst.stages = s;
        }
        inst.validate()?;
        let mut cfg = BsrConfig::default();
        if let Some(n) = row.max_nodes {
            cfg.max_nodes = n;
        }
        return Ok(solve_bsr_with(&inst, &cfg)?);
    }
    let algo = match row.algo.as_str() {
        "witness" => Algo::Witness,
        "scc" => Algo::Scc,
        "dp" => Algo::Dp,
        "explicit" => Algo::Explicit,
        other => return Err(anyhow!("unknown algorithm `{other}`")),
    };
    let inst = load_lcr(&row.input)?;
    inst.validate()?;
    Ok(solve_lcr(&inst, algo, row.max_nodes)?)
}
