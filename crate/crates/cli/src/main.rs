use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use stopgrid::boundary_model;
use stopgrid::continuous;
use stopgrid::engine::{
    self, reference, ClassifyOptions, Cutoff, Geometry, GridOffset, Induction, Parity, RunConfig, RunOptions,
    TerminalMode,
};
use stopgrid::export::{self, Manifest};
use stopgrid::lowerbound::{self, CalibrationAnchor, CalibrationOptions, CoefficientRule};
use stopgrid::transform::{self, Notation};
use stopgrid::{Error, Precision};

#[derive(Parser)]
#[command(name = "stopgrid", version, about = "Bounds and stopping boundary for the Chow-Robbins game")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one of the analytic functions.
    Eval {
        #[command(subcommand)]
        what: EvalCommand,
        /// Print JSON instead of plain numbers.
        #[arg(long, global = true)]
        json: bool,
    },
    /// Solve for the lower-bound constants at a horizon and print them as JSON.
    Calibrate {
        #[arg(long)]
        horizon: f64,
        #[command(flatten)]
        cal: CalibrationArgs,
    },
    /// Backward induction from a horizon; writes CSV files and a manifest.
    Run(RunArgs),
    /// Classify a single lattice point.
    Classify(ClassifyArgs),
    /// Closed-form boundary prediction.
    Predict {
        #[arg(long)]
        n: u64,
        /// Print every level from `n` to this one.
        #[arg(long)]
        to: Option<u64>,
        #[arg(long, value_enum, default_value_t = NotationArg::Sym)]
        notation: NotationArg,
    },
    /// CSV data for plotting the value bounds and boundaries.
    PlotData(PlotArgs),
}

#[derive(Subcommand)]
enum EvalCommand {
    /// The constant alpha of the Brownian boundary.
    Alpha,
    /// `V^W(t, x)`.
    Vw {
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
    },
    /// `h_c(t, x)` calibrated at a horizon.
    Hc {
        #[arg(long)]
        horizon: f64,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[command(flatten)]
        cal: CalibrationArgs,
    },
    /// One-step defect of `h`, or of `h_c` when a horizon is given.
    Defect {
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long)]
        horizon: Option<f64>,
        #[command(flatten)]
        cal: CalibrationArgs,
    },
}

#[derive(Args, Clone, Copy)]
struct CalibrationArgs {
    /// How c1 and c2 are combined.
    #[arg(long, value_enum, default_value_t = RuleArg::Max)]
    rule: RuleArg,
    /// Where the c1 equation is anchored.
    #[arg(long, value_enum, default_value_t = AnchorArg::Shifted)]
    anchor: AnchorArg,
}

impl CalibrationArgs {
    fn options(self) -> CalibrationOptions {
        CalibrationOptions {
            rule: match self.rule {
                RuleArg::Max => CoefficientRule::Max,
                RuleArg::Min => CoefficientRule::Min,
            },
            anchor: match self.anchor {
                AnchorArg::Shifted => CalibrationAnchor::ShiftedByOne,
                AnchorArg::Boundary => CalibrationAnchor::Boundary,
            },
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Max,
    Min,
}

#[derive(Clone, Copy, ValueEnum)]
enum AnchorArg {
    Shifted,
    Boundary,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrecisionArg {
    Std,
    Ext,
}

#[derive(Clone, Copy, ValueEnum)]
enum TerminalArg {
    Bounds,
    BoundsOrTrivial,
    Haggstrom,
}

#[derive(Clone, Copy, ValueEnum)]
enum NotationArg {
    Sym,
    Heads,
    Hw,
}

impl From<NotationArg> for Notation {
    fn from(n: NotationArg) -> Self {
        match n {
            NotationArg::Sym => Notation::Sym,
            NotationArg::Heads => Notation::Heads,
            NotationArg::Hw => Notation::Hw,
        }
    }
}

#[derive(Args)]
struct EngineArgs {
    /// Lateral margin M below and above alpha sqrt(t).
    #[arg(long, default_value_t = 200)]
    cutoff: u64,
    /// Extra width below the boundary, in units of sqrt(t).
    #[arg(long, default_value_t = 10.0)]
    sigmas: f64,
    /// Compute the whole backward cone instead of a lateral window.
    #[arg(long)]
    full_cone: bool,
    #[arg(long, value_enum, default_value_t = PrecisionArg::Std)]
    precision: PrecisionArg,
    #[command(flatten)]
    cal: CalibrationArgs,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, env = "STOPGRID_THREADS")]
    threads: Option<usize>,
}

impl EngineArgs {
    fn cutoff(&self) -> Cutoff {
        if self.full_cone {
            Cutoff::FullCone
        } else {
            Cutoff::Lateral {
                margin: self.cutoff,
                sigmas: self.sigmas,
            }
        }
    }

    fn precision(&self) -> Precision {
        match self.precision {
            PrecisionArg::Std => Precision::Standard,
            PrecisionArg::Ext => Precision::Extended,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    horizon: u64,
    /// Deepest level that is classified.
    #[arg(long)]
    depth: u64,
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, value_enum, default_value_t = TerminalArg::Bounds)]
    terminal: TerminalArg,
    /// Also compute the boundary on the grid with spacing 1/D.
    #[arg(long)]
    refine: Option<u32>,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Levels between checkpoint writes.
    #[arg(long, default_value_t = 10_000)]
    checkpoint_every: u64,
    /// Continue from the checkpoint.
    #[arg(long, requires = "checkpoint")]
    resume: bool,
    /// Cells per level kept around alpha sqrt(n) in the classification file.
    #[arg(long, default_value_t = 3)]
    window: u64,
    /// Upper limit on slice memory in bytes.
    #[arg(long, default_value_t = 4 << 30)]
    memory_limit: u64,
    #[arg(long, default_value = "stopgrid-out")]
    out: PathBuf,
    /// Check the induction against the plain reference recursion.
    #[arg(long)]
    oracle: bool,
    #[arg(long, value_enum, default_value_t = NotationArg::Sym)]
    notation: NotationArg,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long, required_unless_present = "point")]
    n: Option<u64>,
    #[arg(long, allow_hyphen_values = true, required_unless_present = "point")]
    x: Option<i64>,
    /// The point as heads-tails, for example 5-3.
    #[arg(long, conflicts_with_all = ["n", "x"])]
    point: Option<String>,
    /// Defaults to n + 1.
    #[arg(long)]
    horizon: Option<u64>,
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, value_enum, default_value_t = NotationArg::Sym)]
    notation: NotationArg,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long, default_value = "stopgrid-plot")]
    out: PathBuf,
    /// Horizon of the runs behind the discrete bounds.
    #[arg(long, default_value_t = 1000)]
    horizon: u64,
    /// Deepest level written.
    #[arg(long, default_value_t = 30)]
    depth: u64,
    /// Grid refinement D for the refined boundary.
    #[arg(long, default_value_t = 300)]
    refine: u32,
    /// Cells per level kept around alpha sqrt(n).
    #[arg(long, default_value_t = 12)]
    window: u64,
    /// Largest time of the continuous curves.
    #[arg(long, default_value_t = 30.0)]
    t_max: f64,
    /// Samples per unit of time and space for the continuous curves.
    #[arg(long, default_value_t = 10)]
    resolution: u32,
    #[arg(long, env = "STOPGRID_THREADS")]
    threads: Option<usize>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Calibration { .. }
        | Error::InvalidCalibration { .. }
        | Error::CoefficientOutOfRange(_)
        | Error::NoBracket { .. }
        | Error::NoConvergence(_) => 3,
        Error::Resource(_) => 4,
        Error::Config(_) | Error::NonPositiveTime(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval { what, json } => eval(what, json),
        Command::Calibrate { horizon, cal } => calibrate(horizon, cal),
        Command::Run(args) => run(args),
        Command::Classify(args) => classify(args),
        Command::Predict { n, to, notation } => predict(n, to, notation.into()),
        Command::PlotData(args) => plot_data(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn print_value(json: bool, name: &str, v: f64) {
    if json {
        println!("{}", json!({ name: v }));
    } else {
        println!("{v}");
    }
}

fn eval(what: EvalCommand, json: bool) -> stopgrid::Result<()> {
    match what {
        EvalCommand::Alpha => print_value(json, "alpha", continuous::alpha()),
        EvalCommand::Vw { t, x } => print_value(json, "v_w", continuous::v_w(t, x)?),
        EvalCommand::Hc { horizon, t, x, cal } => {
            let c = lowerbound::calibrate_with(horizon, cal.options())?;
            c.require_valid()?;
            print_value(json, "h_c", c.h_c(t, x)?);
        }
        EvalCommand::Defect { t, x, horizon, cal } => match horizon {
            Some(h) => {
                let c = lowerbound::calibrate_with(h, cal.options())?;
                print_value(json, "f_c_defect", c.f_c_defect(t, x)?);
            }
            None => print_value(json, "superharmonic_defect", continuous::superharmonic_defect(t, x)?),
        },
    }
    Ok(())
}

fn calibrate(horizon: f64, cal: CalibrationArgs) -> stopgrid::Result<()> {
    let c = lowerbound::calibrate_with(horizon, cal.options())?;
    println!("{}", serde_json::to_string_pretty(&c)?);
    Ok(())
}

fn write_rows<R: serde::Serialize>(dir: &Path, name: &str, rows: &[R]) -> stopgrid::Result<()> {
    export::write_csv(fs::File::create(dir.join(name))?, rows)
}

fn run(args: RunArgs) -> stopgrid::Result<()> {
    let mut config = RunConfig::new(args.horizon, args.depth);
    config.cutoff = args.engine.cutoff();
    config.precision = args.engine.precision();
    config.calibration = args.engine.cal.options();
    config.window = args.window;
    config.terminal = match args.terminal {
        TerminalArg::Bounds => TerminalMode::Bounds,
        TerminalArg::BoundsOrTrivial => TerminalMode::BoundsOrTrivial,
        TerminalArg::Haggstrom => TerminalMode::Haggstrom,
    };
    let opts = RunOptions {
        threads: args.engine.threads,
        checkpoint: args.checkpoint.clone(),
        checkpoint_every: args.checkpoint_every,
        resume: args.resume,
        memory_limit: args.memory_limit,
    };
    let notation: Notation = args.notation.into();

    let start = Instant::now();
    let table = engine::run(&config, &opts)?;
    let refined = args
        .refine
        .map(|d| engine::run_refined(&config, d, &RunOptions { checkpoint: None, resume: false, ..opts.clone() }))
        .transpose()?;
    let runtime = start.elapsed().as_secs_f64();

    fs::create_dir_all(&args.out)?;
    write_rows(&args.out, "boundary.csv", &export::boundary_rows(&table, notation)?)?;
    write_rows(&args.out, "classification.csv", &export::classification_rows(&table, notation))?;
    write_rows(&args.out, "boundary_compare.csv", &export::comparison_rows(&table)?)?;
    if let Some(points) = &refined {
        write_rows(&args.out, "refined_boundary.csv", &export::refined_rows(points, table.alpha))?;
    }
    let manifest = Manifest::new(&table, runtime)?;
    fs::write(args.out.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;

    if let Some(b) = table.v00 {
        let (lo, hi) = (b.lower.to_f64(), b.upper.to_f64());
        println!(
            "V(0,0) in [{}, {}], width {:.3e}",
            notation.value(lo),
            notation.value(hi),
            b.width()
        );
    }
    println!(
        "levels {}..={}: {} unknown points, {} levels differ from the formula, {} not separated on reachable points",
        table.levels.first().map_or(0, |l| l.n),
        args.depth,
        table.unknown_count,
        manifest.formula_mismatches.len(),
        manifest.reachable_separation_failures.len()
    );
    println!("wrote {} ({runtime:.2} s)", args.out.display());

    if args.oracle {
        let worst = oracle_difference(&config)?;
        println!("oracle: max cell difference {worst:.3e}");
        if worst > 1e-15 {
            return Err(Error::Config(format!("engine differs from the reference by {worst:e}")));
        }
    }
    Ok(())
}

fn oracle_difference(config: &RunConfig) -> stopgrid::Result<f64> {
    const LIMIT: u64 = 5000;
    if config.horizon > LIMIT {
        return Err(Error::Config(format!("--oracle needs a horizon of at most {LIMIT}")));
    }
    let cal = lowerbound::calibrate_with(config.horizon as f64, config.calibration)?;
    let levels = reference::full_cone(config.horizon, &cal);
    let geometry = Geometry::new(*continuous::solution(), GridOffset::default(), Cutoff::FullCone, Parity::Both);
    let mut ind = Induction::<f64>::with_bounds(geometry, config.horizon, &cal)?;
    let mut worst = 0.0f64;
    for level in &levels {
        ind.step_to(level.n)?;
        for (i, (ru, rl)) in level.upper.iter().zip(&level.lower).enumerate() {
            if let Some((u, l)) = ind.current().get(level.lo + i as i64) {
                worst = worst.max((u - ru).abs()).max((l - rl).abs());
            }
        }
    }
    Ok(worst)
}

fn classify(args: ClassifyArgs) -> stopgrid::Result<()> {
    let (n, x) = match &args.point {
        Some(p) => transform::parse_hw(p)?,
        None => (args.n.unwrap_or_default(), args.x.unwrap_or_default()),
    };
    let opts = ClassifyOptions {
        horizon: args.horizon,
        precision: args.engine.precision(),
        cutoff: args.engine.cutoff(),
        calibration: args.engine.cal.options(),
        threads: args.engine.threads,
        ..ClassifyOptions::default()
    };
    let r = engine::classify(n, x, &opts)?;
    let notation: Notation = args.notation.into();
    let v = |x: f64| notation.value(x);
    if args.json {
        let value = json!({
            "n": n,
            "x": notation.position(n, x),
            "horizon": r.horizon,
            "verdict": r.verdict,
            "gain": v(r.gain),
            "cont_upper": v(r.cont_upper),
            "v_lower": v(r.v_lower),
            "v_upper": v(r.v_upper),
            "lower_from_h_c": r.lower_from_h_c,
        });
        println!("{}", serde_json::to_string_pretty(&value)?);
        return Ok(());
    }
    println!(
        "({n}, {}): {}  continuation upper {:.10} vs gain {:.10}; lower bound {:.10} (horizon {})",
        notation.position(n, x),
        r.verdict,
        v(r.cont_upper),
        v(r.gain),
        v(r.v_lower),
        r.horizon
    );
    if !r.lower_from_h_c {
        println!("note: no valid lower-bound calibration at this horizon, the lower bound starts from max(x/T, 0)");
    }
    Ok(())
}

fn predict(n: u64, to: Option<u64>, notation: Notation) -> stopgrid::Result<()> {
    let last = to.unwrap_or(n);
    if last < n {
        return Err(Error::Config("--to must not be below --n".into()));
    }
    println!("n,b_n,exception,validated");
    for k in n..=last {
        let p = boundary_model::predict_b(k)?;
        let b = match notation {
            Notation::Sym => p.predicted.to_string(),
            _ => transform::boundary_sym_to_heads(k, p.predicted).to_string(),
        };
        println!("{k},{b},{},{}", p.exception_applied, p.validated);
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct CurveRow {
    t: f64,
    x: f64,
    gain: f64,
    v_w: f64,
    h_c: Option<f64>,
}

fn plot_data(args: PlotArgs) -> stopgrid::Result<()> {
    fs::create_dir_all(&args.out)?;
    let sol = continuous::solution();
    let res = args.resolution.max(1) as f64;

    // continuous curves: V^W and h_c calibrated at t_max
    let cal = lowerbound::calibrate(args.t_max).ok().filter(|c| c.valid);
    let mut curves = Vec::new();
    let steps = (args.t_max * res).ceil() as u32;
    for i in 1..=steps {
        let t = i as f64 / res;
        let top = (sol.boundary(t) + 2.0).ceil();
        let bottom = -(3.0 * t.sqrt()).ceil();
        let count = ((top - bottom) * res) as u32;
        for j in 0..=count {
            let x = bottom + j as f64 / res;
            let h_c = cal.filter(|_| t >= args.t_max).map(|c| c.h_c(t, x)).transpose()?;
            curves.push(CurveRow {
                t,
                x,
                gain: x / t,
                v_w: sol.v_w(t, x)?,
                h_c,
            });
        }
    }
    write_rows(&args.out, "continuous.csv", &curves)?;

    let mut config = RunConfig::new(args.horizon, args.depth);
    config.window = args.window;
    let opts = RunOptions {
        threads: args.threads,
        ..RunOptions::default()
    };
    let table = engine::run(&config, &opts)?;
    write_rows(&args.out, "bounds.csv", &export::classification_rows(&table, Notation::Sym))?;
    write_rows(&args.out, "boundary.csv", &export::boundary_rows(&table, Notation::Sym)?)?;
    let refined = engine::run_refined(&config, args.refine, &opts)?;
    write_rows(&args.out, "refined_boundary.csv", &export::refined_rows(&refined, table.alpha))?;
    println!("wrote {}", args.out.display());
    Ok(())
}
