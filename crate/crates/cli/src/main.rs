//! `qdiscord`: measurement diagrams, correlation measures of two-spin
//! states, θ-sweeps, spin-chain experiments and the verification suites.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qutrit_discord::io::{read_chain_spec, read_state, state_to_json, StateFile};
use qutrit_discord::matlib::DensityMatrix;
use qutrit_discord::measgeo::{full_basis, DiagramRecord, MeasurementParams};
use qutrit_discord::models::{
    aligned_mixture, bell_anchor, chain_parity, fixed_parity_state, ground_state, reduce_pair, xyz_hamiltonian,
};
use qutrit_discord::optim::{
    minimize, minimize_all_families, FamilyComparison, MeasurementFamily, OptimizationResult, OptimizerConfig, Target,
};
use qutrit_discord::qmeasures::Measure;
use qutrit_discord::spinops::spin_dim;
use qutrit_discord::sweep::{aligned_sweep, theta_grid, to_csv};
use qutrit_discord::verify::{run_suite, Suite, SuiteReport, VerifyOptions};
use qutrit_discord::Error;

#[derive(Parser)]
#[command(name = "qdiscord", version, about = "Quantum discord and information deficits of spin-1 measurements")]
struct Cli {
    /// Optimizer configuration (JSON); missing fields take their defaults.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Seed for random starts and verification draws.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Print the effective optimizer configuration and exit.
    #[arg(long)]
    dump_config: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Spin diagram and type of a measurement.
    Diagram(DiagramArgs),
    /// Minimize measures over measurement families for a state file.
    Discord(DiscordArgs),
    /// Sweep the aligned mixture over θ and write CSV.
    Sweep(SweepArgs),
    /// Ground state of an XYZ chain and the measures of a reduced pair.
    Chain(ChainArgs),
    /// Run the randomized property suites.
    Verify(VerifyArgs),
    /// Write a built-in state file.
    State(StateArgs),
}

#[derive(Args)]
struct DiagramArgs {
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    beta: f64,
    #[arg(long, allow_hyphen_values = true)]
    gamma: f64,
    /// Final rotation exp(-iψS_z).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    psi: f64,
    /// Rotation exp(-iθS_y).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    theta_r: f64,
    /// First rotation exp(-iφS_z).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    phi_r: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    D,
    I1,
    I2,
    All,
}

impl MeasureArg {
    fn measures(self) -> Vec<Measure> {
        match self {
            Self::D => vec![Measure::D],
            Self::I1 => vec![Measure::I1],
            Self::I2 => vec![Measure::I2],
            Self::All => vec![Measure::D, Measure::I1, Measure::I2],
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Spin,
    Ii,
    Iii,
    General,
    All,
}

impl FamilyArg {
    fn family(self) -> Option<MeasurementFamily> {
        match self {
            Self::Spin => Some(MeasurementFamily::Spin),
            Self::Ii => Some(MeasurementFamily::TypeII),
            Self::Iii => Some(MeasurementFamily::TypeIII),
            Self::General => Some(MeasurementFamily::General),
            Self::All => None,
        }
    }
}

#[derive(Args)]
struct DiscordArgs {
    /// State file: {"dims": [dA, 3], "matrix": [[re, im], ...]}.
    state: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    measure: MeasureArg,
    #[arg(long, value_enum, default_value = "all")]
    family: FamilyArg,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 0.0)]
    theta_min: f64,
    #[arg(long, default_value_t = FRAC_PI_2)]
    theta_max: f64,
    #[arg(long, default_value_t = 50)]
    points: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ChainArgs {
    /// Chain spec: {"n", "s", "b": [..], "J": {"x": [[i, j, J]..], "y": .., "z": ..}}.
    spec: PathBuf,
    /// Sites of the reduced pair.
    #[arg(long, num_args = 2, value_names = ["I", "J"], default_values_t = [0, 1])]
    pair: Vec<usize>,
    #[arg(long, value_enum, default_value = "all")]
    measure: MeasureArg,
    /// Also write the reduced pair as a state file.
    #[arg(long, value_name = "FILE")]
    state_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Diagrams,
    Parity,
    Measures,
    Closedforms,
    All,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: SuiteArg,
    #[arg(long, default_value_t = 1000)]
    draws: usize,
    /// Grid size of the closed-form comparison.
    #[arg(long, default_value_t = 10)]
    points: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum StateKind {
    /// Equal mixture of |θ,θ⟩ and |−θ,−θ⟩.
    Aligned,
    /// (|1,1⟩ + |−1,−1⟩)/√2.
    Bell,
    /// Reduced pair of a definite-parity coherent chain state.
    FixedParity,
}

#[derive(Args)]
struct StateArgs {
    #[arg(value_enum)]
    kind: StateKind,
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    /// Chain length for fixed-parity.
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Parity sign for fixed-parity: 1 or -1.
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    sign: i8,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Core(Error),
    Usage(String),
    NotConverged,
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification => 1,
            Failure::Usage(_) | Failure::Core(Error::Domain(_)) => 2,
            Failure::NotConverged | Failure::Core(Error::NoConvergence(_)) => 4,
            Failure::Core(_) => 3,
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn load_config(cli: &Cli) -> std::result::Result<OptimizerConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(Error::from)?;
            serde_json::from_str(&text).map_err(|e| Error::Format(format!("config file: {e}")))?
        }
        None => OptimizerConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
}

fn write_out(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(p) => fs::write(p, text).map_err(Error::from)?,
        None => std::io::stdout().write_all(text.as_bytes()).map_err(Error::from)?,
    }
    Ok(())
}

/// Angles typed with four decimals may overshoot the box `[0, π/4]`
/// slightly; those are pulled back onto it.
fn snap_to_box(x: f64) -> f64 {
    const SLACK: f64 = 1e-4;
    if (-SLACK..0.0).contains(&x) {
        0.0
    } else if x > FRAC_PI_4 && x <= FRAC_PI_4 + SLACK {
        FRAC_PI_4
    } else {
        x
    }
}

fn diagram(args: &DiagramArgs) -> Outcome {
    let (alpha, beta) = (snap_to_box(args.alpha), snap_to_box(args.beta));
    let p = MeasurementParams::new(alpha, beta, args.gamma, args.psi, args.theta_r, args.phi_r)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    print_json(&DiagramRecord::new(Some(p), &full_basis(&p))?);
    Ok(())
}

#[derive(Serialize)]
#[serde(untagged)]
enum MeasureReport {
    Comparison(FamilyComparison),
    Single(OptimizationResult),
}

#[derive(Serialize)]
struct MeasureEntry {
    measure: String,
    #[serde(flatten)]
    report: MeasureReport,
}

/// Minimizes each measure; the flag is false when a reported optimum is
/// not certified.
fn measure_entries(
    rho: &DensityMatrix,
    measures: &[Measure],
    family: Option<MeasurementFamily>,
    cfg: &OptimizerConfig,
) -> std::result::Result<(Vec<MeasureEntry>, bool), Failure> {
    let mut all_converged = true;
    let mut out = Vec::new();
    for m in measures {
        let target = Target::new(rho, *m)?;
        let report = match family {
            Some(f) => {
                let r = minimize(&target, f, cfg)?;
                all_converged &= r.converged;
                MeasureReport::Single(r)
            }
            None => {
                let c = minimize_all_families(&target, cfg)?;
                all_converged &= c.optimal().converged;
                MeasureReport::Comparison(c)
            }
        };
        out.push(MeasureEntry { measure: m.name(), report });
    }
    Ok((out, all_converged))
}

#[derive(Serialize)]
struct DiscordReport {
    dims: [usize; 2],
    measures: Vec<MeasureEntry>,
}

fn discord(args: &DiscordArgs, cfg: &OptimizerConfig) -> Outcome {
    let rho = read_state(&args.state)?;
    let (da, db) = rho.dims();
    let (measures, converged) = measure_entries(&rho, &args.measure.measures(), args.family.family(), cfg)?;
    print_json(&DiscordReport { dims: [da, db], measures });
    if converged {
        Ok(())
    } else {
        Err(Failure::NotConverged)
    }
}

fn sweep(args: &SweepArgs, cfg: &OptimizerConfig) -> Outcome {
    let grid = theta_grid(args.theta_min, args.theta_max, args.points)?;
    let points = aligned_sweep(&grid, cfg)?;
    write_out(args.out.as_deref(), &to_csv(&points))
}

#[derive(Serialize)]
struct ChainReport {
    n: usize,
    s: f64,
    energy: f64,
    gap: Option<f64>,
    degenerate: bool,
    parity_check: bool,
    parity_commutator: f64,
    pair: [usize; 2],
    pair_state: StateFile,
    measures: Vec<MeasureEntry>,
}

fn chain(args: &ChainArgs, cfg: &OptimizerConfig) -> Outcome {
    let spec = read_chain_spec(&args.spec)?;
    let h = xyz_hamiltonian(&spec)?;
    let p = chain_parity(&spec)?;
    let commutator = p.conjugate(&h).max_abs_diff(&h);
    let gs = ground_state(&h)?;
    let (i, j) = (args.pair[0], args.pair[1]);
    let d = spin_dim(spec.s)?;
    let pair = reduce_pair(&gs.state, d, i, j)?;
    if let Some(path) = &args.state_out {
        fs::write(path, state_to_json(&pair)).map_err(Error::from)?;
    }
    let (measures, converged) = measure_entries(&pair, &args.measure.measures(), None, cfg)?;
    print_json(&ChainReport {
        n: spec.n,
        s: spec.s,
        energy: gs.energy,
        gap: gs.gap,
        degenerate: gs.degenerate,
        parity_check: commutator < 1e-10,
        parity_commutator: commutator,
        pair: [i, j],
        pair_state: StateFile::from_density(&pair),
        measures,
    });
    if converged {
        Ok(())
    } else {
        Err(Failure::NotConverged)
    }
}

#[derive(Serialize)]
struct VerifyReport {
    passed: bool,
    suites: Vec<SuiteReport>,
}

fn verify(args: &VerifyArgs, cfg: &OptimizerConfig) -> Outcome {
    let suites = match args.suite {
        SuiteArg::Diagrams => vec![Suite::Diagrams],
        SuiteArg::Parity => vec![Suite::Parity],
        SuiteArg::Measures => vec![Suite::Measures],
        SuiteArg::Closedforms => vec![Suite::ClosedForms],
        SuiteArg::All => Suite::ALL.to_vec(),
    };
    let opts = VerifyOptions { draws: args.draws, seed: cfg.seed, points: args.points, cfg: cfg.clone() };
    let reports = suites.iter().map(|s| run_suite(*s, &opts)).collect::<qutrit_discord::Result<Vec<_>>>()?;
    for r in &reports {
        eprintln!(
            "{:<12} {} ({} checks, {} failures)",
            r.name,
            if r.passed() { "pass" } else { "FAIL" },
            r.checks,
            r.failures
        );
    }
    let passed = reports.iter().all(SuiteReport::passed);
    print_json(&VerifyReport { passed, suites: reports });
    if passed {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn state(args: &StateArgs) -> Outcome {
    let rho = match args.kind {
        StateKind::Aligned => aligned_mixture(args.theta)?.rho,
        StateKind::Bell => bell_anchor(),
        StateKind::FixedParity => {
            if args.sign != 1 && args.sign != -1 {
                return Err(Failure::Usage(format!("sign must be 1 or -1, got {}", args.sign)));
            }
            reduce_pair(&fixed_parity_state(args.n, args.theta, args.sign)?, 3, 0, 1)?
        }
    };
    let mut text = state_to_json(&rho);
    text.push('\n');
    write_out(args.out.as_deref(), &text)
}

fn run(cli: &Cli) -> Outcome {
    let cfg = load_config(cli)?;
    if cli.dump_config {
        print_json(&cfg);
        return Ok(());
    }
    match &cli.command {
        None => Err(Failure::Usage("no subcommand given (try --help)".into())),
        Some(Command::Diagram(a)) => diagram(a),
        Some(Command::Discord(a)) => discord(a, &cfg),
        Some(Command::Sweep(a)) => sweep(a, &cfg),
        Some(Command::Chain(a)) => chain(a, &cfg),
        Some(Command::Verify(a)) => verify(a, &cfg),
        Some(Command::State(a)) => state(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Core(e) => eprintln!("error: {e}"),
                Failure::Usage(msg) => eprintln!("error: {msg}"),
                Failure::NotConverged => eprintln!("warning: an optimum did not reach the stationarity tolerance"),
                Failure::Verification => eprintln!("verification failed"),
            }
            ExitCode::from(f.code())
        }
    }
}
