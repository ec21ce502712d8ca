//! `contagion` — deterministic and stochastic solvers for SIR/SEIR
//! node-state probabilities on networks, with CSV/JSON outputs suitable for
//! external plotting.
//!
//! Exit codes: 0 success, 2 validation error, 3 state-space guard exceeded,
//! 4 bound check failed.

mod compare;
mod csv;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use contagion_core::integrate::{integrate, DEFAULT_DT, DEFAULT_SAMPLE_DT};
use contagion_core::net::{
    detect_rooted_tree, generate_network, ContagionNetwork, GeneratorSpec, GraphKind,
    InitialCondition, Model, NodeRates, SeirNodeRates, SirNodeRates,
};
use contagion_core::oracle::{build_generator, solve_master};
use contagion_core::seir::{SeirRootedExact, SeirRta};
use contagion_core::sir::{SirRootedExact, SirRta};
use contagion_core::stochastic::ensemble_estimate;
use contagion_core::{Error as CoreError, NodeProbabilityState};

#[derive(Parser)]
#[command(
    name = "contagion",
    version,
    about = "SIR/SEIR node-state probabilities on networks: exact rooted-tree systems, \
             upper-bound dynamics, Gillespie ensembles and a master-equation solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a network file from a seeded random-graph model.
    Generate(GenerateArgs),
    /// Integrate a deterministic node-probability system to CSV.
    Solve(SolveArgs),
    /// Evaluate the closed-form uniform-chain solution to CSV.
    ClosedForm(ClosedFormArgs),
    /// Estimate node-state probabilities from Gillespie replicas.
    Gillespie(GillespieArgs),
    /// Solve the exact master equation of a small network.
    Oracle(OracleArgs),
    /// Compare two CSV tables; optionally check an upper bound.
    Compare(CompareArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Chain,
    Prufer,
    Er,
    TreePlusEdges,
}

#[derive(Args)]
struct GenerateArgs {
    /// Graph family.
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Number of nodes.
    #[arg(long)]
    n: usize,
    /// Connection probability (er only).
    #[arg(long)]
    p: Option<f64>,
    /// Number of extra non-tree edges (tree-plus-edges only).
    #[arg(long)]
    extra: Option<usize>,
    /// Uniform infection rate per directed edge.
    #[arg(long)]
    lambda: f64,
    /// Uniform recovery rate.
    #[arg(long)]
    gamma: f64,
    /// Emit a SEIR network (requires --phi, --mu, --nu).
    #[arg(long)]
    seir: bool,
    /// Exposed-entry probabilities, comma-separated per class.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    phi: Option<Vec<f64>>,
    /// Exposed-to-infectious rates, comma-separated per class.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    mu: Option<Vec<f64>>,
    /// Exposed-to-recovered rates, comma-separated per class.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    nu: Option<Vec<f64>>,
    /// Exposed-class transition matrix, rows separated by ';', entries by ','.
    #[arg(long)]
    a: Option<String>,
    /// Generator seed.
    #[arg(long)]
    seed: u64,
    /// Output path for the network JSON.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SystemArg {
    /// Exact system on a rooted tree.
    ExactRooted,
    /// Rooted-tree approximation (upper bound on any network).
    Rta,
}

#[derive(Args)]
struct SolveArgs {
    /// Which system to integrate.
    #[arg(long, value_enum)]
    system: SystemArg,
    /// Network JSON path.
    #[arg(long)]
    net: PathBuf,
    /// Initial-condition JSON path.
    #[arg(long)]
    init: PathBuf,
    /// End time.
    #[arg(long)]
    t_end: f64,
    /// Integration step.
    #[arg(long, default_value_t = DEFAULT_DT)]
    dt: f64,
    /// Output spacing.
    #[arg(long, default_value_t = DEFAULT_SAMPLE_DT)]
    sample_dt: f64,
    /// Output CSV path.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct ClosedFormArgs {
    /// Deepest chain node to emit (rows cover depths 0..=k).
    #[arg(long)]
    k: usize,
    /// Infection rate.
    #[arg(long)]
    lambda: f64,
    /// Recovery rate.
    #[arg(long)]
    gamma: f64,
    /// End time.
    #[arg(long)]
    t_end: f64,
    /// Output spacing.
    #[arg(long, default_value_t = DEFAULT_SAMPLE_DT)]
    sample_dt: f64,
    /// Output CSV path.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct GillespieArgs {
    /// Network JSON path.
    #[arg(long)]
    net: PathBuf,
    /// Initial-condition JSON path (sampled per replica).
    #[arg(long)]
    init: PathBuf,
    /// Number of replicas.
    #[arg(long)]
    runs: usize,
    /// Master seed; replicas derive their streams from it.
    #[arg(long)]
    seed: u64,
    /// End time.
    #[arg(long)]
    t_end: f64,
    /// Output spacing.
    #[arg(long, default_value_t = DEFAULT_SAMPLE_DT)]
    sample_dt: f64,
    /// Output CSV path.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    /// Network JSON path.
    #[arg(long)]
    net: PathBuf,
    /// Initial-condition JSON path (product-form joint distribution).
    #[arg(long)]
    init: PathBuf,
    /// End time.
    #[arg(long)]
    t_end: f64,
    /// Integration step.
    #[arg(long, default_value_t = DEFAULT_DT)]
    dt: f64,
    /// Output spacing.
    #[arg(long, default_value_t = DEFAULT_SAMPLE_DT)]
    sample_dt: f64,
    /// Output CSV path.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Candidate CSV (the values under test, e.g. a bound).
    #[arg(long)]
    candidate: PathBuf,
    /// Reference CSV (e.g. ensemble estimates or exact values).
    #[arg(long)]
    reference: PathBuf,
    /// Fail (exit 4) when reference S exceeds candidate S by more than
    /// 3·SE plus --bound-atol anywhere.
    #[arg(long)]
    bound_check: bool,
    /// Standard errors for the bound check; defaults to the reference's own
    /// _se columns.
    #[arg(long)]
    mc_stderr_file: Option<PathBuf>,
    /// Absolute allowance added to 3·SE in the bound check.
    #[arg(long, default_value_t = 0.0)]
    bound_atol: f64,
    /// Output report JSON path.
    #[arg(short, long)]
    output: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = if err
                .chain()
                .any(|c| matches!(c.downcast_ref(), Some(CoreError::StateSpaceTooLarge { .. })))
            {
                3
            } else {
                2
            };
            ExitCode::from(code)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Generate(args) => generate(args),
        Command::Solve(args) => solve(args),
        Command::ClosedForm(args) => closed_form(args),
        Command::Gillespie(args) => gillespie(args),
        Command::Oracle(args) => oracle(args),
        Command::Compare(args) => compare_cmd(args),
    }
}

fn parse_a_matrix(text: &str, n: usize) -> Result<Vec<Vec<f64>>> {
    let rows: Vec<&str> = text.split(';').collect();
    if rows.len() != n {
        bail!("--a must have {n} rows separated by ';'");
    }
    rows.iter()
        .map(|row| {
            let entries: Vec<f64> = row
                .split(',')
                .map(|e| e.trim().parse::<f64>().context("bad entry in --a"))
                .collect::<Result<_>>()?;
            if entries.len() != n {
                bail!("--a rows must each have {n} entries");
            }
            Ok(entries)
        })
        .collect()
}

fn generate(args: GenerateArgs) -> Result<ExitCode> {
    let kind = match args.kind {
        KindArg::Chain => GraphKind::Chain { n: args.n },
        KindArg::Prufer => GraphKind::PruferTree { n: args.n },
        KindArg::Er => GraphKind::ErdosRenyi {
            n: args.n,
            p: args.p.ok_or_else(|| anyhow!("--kind er requires --p"))?,
        },
        KindArg::TreePlusEdges => GraphKind::TreePlusEdges {
            n: args.n,
            extra: args
                .extra
                .ok_or_else(|| anyhow!("--kind tree-plus-edges requires --extra"))?,
        },
    };
    let rates = if args.seir {
        let phi = args.phi.ok_or_else(|| anyhow!("--seir requires --phi"))?;
        let mu = args.mu.ok_or_else(|| anyhow!("--seir requires --mu"))?;
        let nu = args.nu.ok_or_else(|| anyhow!("--seir requires --nu"))?;
        let n_classes = phi.len();
        let a = match &args.a {
            Some(text) => parse_a_matrix(text, n_classes)?,
            None => vec![vec![0.0; n_classes]; n_classes],
        };
        NodeRates::Seir(SeirNodeRates {
            gamma: args.gamma,
            phi,
            mu,
            nu,
            a,
        })
    } else {
        if args.phi.is_some() || args.mu.is_some() || args.nu.is_some() || args.a.is_some() {
            bail!("--phi/--mu/--nu/--a require --seir");
        }
        NodeRates::Sir(SirNodeRates { gamma: args.gamma })
    };
    let net = generate_network(
        &GeneratorSpec {
            kind,
            lambda: args.lambda,
            rates,
        },
        args.seed,
    )?;
    std::fs::write(&args.output, net.to_canonical_json())
        .with_context(|| format!("writing {}", args.output.display()))?;
    Ok(ExitCode::SUCCESS)
}

fn load_net_and_init(
    net: &PathBuf,
    init: &PathBuf,
) -> Result<(ContagionNetwork, InitialCondition)> {
    let net_text =
        std::fs::read_to_string(net).with_context(|| format!("reading {}", net.display()))?;
    let network = ContagionNetwork::from_json(&net_text)?;
    let init_text =
        std::fs::read_to_string(init).with_context(|| format!("reading {}", init.display()))?;
    let ic = InitialCondition::from_json(&init_text)?;
    network.check_initial_condition(&ic)?;
    Ok((network, ic))
}

fn solve(args: SolveArgs) -> Result<ExitCode> {
    let (net, ic) = load_net_and_init(&args.net, &args.init)?;
    let y0 = NodeProbabilityState::from_initial_condition(&ic);
    let traj = match args.system {
        SystemArg::ExactRooted => {
            let tree = detect_rooted_tree(&net, &ic).ok_or_else(|| {
                anyhow!(
                    "exact-rooted requires a rooted tree: a connected tree with exactly one \
                     deterministically non-susceptible node"
                )
            })?;
            match net.model() {
                Model::Sir => {
                    let sys = SirRootedExact::new(&net, &tree)?;
                    integrate(
                        |y, dy| sys.rhs(y, dy),
                        &y0,
                        args.t_end,
                        args.dt,
                        args.sample_dt,
                    )?
                }
                Model::Seir => {
                    let sys = SeirRootedExact::new(&net, &tree, &ic)?;
                    integrate(
                        |y, dy| sys.rhs(y, dy),
                        &y0,
                        args.t_end,
                        args.dt,
                        args.sample_dt,
                    )?
                }
            }
        }
        SystemArg::Rta => match net.model() {
            Model::Sir => {
                let sys = SirRta::new(&net, &ic)?;
                integrate(
                    |y, dy| sys.rhs(y, dy),
                    &y0,
                    args.t_end,
                    args.dt,
                    args.sample_dt,
                )?
            }
            Model::Seir => {
                let sys = SeirRta::new(&net, &ic)?;
                integrate(
                    |y, dy| sys.rhs(y, dy),
                    &y0,
                    args.t_end,
                    args.dt,
                    args.sample_dt,
                )?
            }
        },
    };
    std::fs::write(&args.output, csv::write_trajectory(&traj))
        .with_context(|| format!("writing {}", args.output.display()))?;
    Ok(ExitCode::SUCCESS)
}

fn sample_grid(t_end: f64, sample_dt: f64) -> Result<Vec<f64>> {
    let ordered = sample_dt > 0.0 && t_end >= sample_dt;
    if !ordered {
        bail!("need 0 < sample_dt <= t_end");
    }
    let n = (t_end / sample_dt + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| i as f64 * sample_dt).collect())
}

fn closed_form(args: ClosedFormArgs) -> Result<ExitCode> {
    let times = sample_grid(args.t_end, args.sample_dt)?;
    let text = csv::write_closed_form(args.k, args.lambda, args.gamma, &times)?;
    std::fs::write(&args.output, text)
        .with_context(|| format!("writing {}", args.output.display()))?;
    Ok(ExitCode::SUCCESS)
}

fn gillespie(args: GillespieArgs) -> Result<ExitCode> {
    let (net, ic) = load_net_and_init(&args.net, &args.init)?;
    let times = sample_grid(args.t_end, args.sample_dt)?;
    let est = ensemble_estimate(&net, &ic, args.runs, &times, args.seed)?;
    std::fs::write(&args.output, csv::write_ensemble(&est))
        .with_context(|| format!("writing {}", args.output.display()))?;
    Ok(ExitCode::SUCCESS)
}

fn oracle(args: OracleArgs) -> Result<ExitCode> {
    let (net, ic) = load_net_and_init(&args.net, &args.init)?;
    let gen = build_generator(&net)?;
    let sol = solve_master(&gen, &ic, args.t_end, args.dt, args.sample_dt, &[])?;
    std::fs::write(&args.output, csv::write_master(&sol))
        .with_context(|| format!("writing {}", args.output.display()))?;
    Ok(ExitCode::SUCCESS)
}

fn compare_cmd(args: CompareArgs) -> Result<ExitCode> {
    let cand_text = std::fs::read_to_string(&args.candidate)
        .with_context(|| format!("reading {}", args.candidate.display()))?;
    let ref_text = std::fs::read_to_string(&args.reference)
        .with_context(|| format!("reading {}", args.reference.display()))?;
    let candidate = csv::parse_table(&cand_text)?;
    let reference = csv::parse_table(&ref_text)?;
    let stderr_table = match &args.mc_stderr_file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            Some(csv::parse_table(&text)?)
        }
        None => None,
    };
    let bound = args.bound_check.then_some(compare::BoundCheck {
        atol: args.bound_atol,
    });
    let report = compare::compare(&candidate, &reference, bound, stderr_table.as_ref())?;
    std::fs::write(&args.output, report.to_canonical_json())
        .with_context(|| format!("writing {}", args.output.display()))?;
    if args.bound_check && report.total_violations() > 0 {
        eprintln!(
            "bound check failed: {} violation(s) across {} node(s)",
            report.total_violations(),
            report.bound_violations.iter().filter(|&&c| c > 0).count()
        );
        for v in report.violations.iter().take(50) {
            eprintln!(
                "  node {} at t = {}: reference exceeds candidate by {:.3e}",
                v.node, v.t, v.excess
            );
        }
        if report.violations.len() > 50 {
            eprintln!("  ... {} more", report.violations.len() - 50);
        }
        return Ok(ExitCode::from(4));
    }
    Ok(ExitCode::SUCCESS)
}
