use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ordfix::asymcenter::{solve_asym_center, verify_center_is_fixed, AsymCenterProblem, Side, SolverConfig};
use ordfix::harness::{self, CampaignConfig, Suite};
use ordfix::iterate::{
    check_orbit_monotone, mann_orbit, picard_orbit, read_orbit_csv, write_orbit_csv, BetaSchedule,
    IterationConfig,
};
use ordfix::mapping::{
    comparable_pairs, fixed_point_oracle, is_alpha_nonexpansive, is_monotone, is_monotone_nonexpansive,
    is_quasi_nonexpansive, lemma22_pair, Mapping, OracleConfig, PropertyReport,
};
use ordfix::order::{is_norm_monotonic, lattice_check, normality_constant_estimate, ConeKind, ConeSpec};
use ordfix::sample::SamplerConfig;
use ordfix::space::{ConvexityProfile, ModulusSolverConfig, ProfileConfig, SpaceSpec};
use ordfix::vector::Vector;

#[derive(Parser)]
#[command(name = "ordfix", version, about = "Monotone fixed-point experiments in ordered ℓp spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the modulus of convexity of ℓp on a uniform grid over [0, 2].
    Modulus {
        #[arg(long)]
        p: f64,
        /// Number of grid intervals.
        #[arg(long)]
        eps_grid: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cone diagnostics.
    Order {
        #[command(subcommand)]
        command: OrderCommand,
    },
    /// Sampled mapping-class report for a mapping file.
    CheckMapping {
        #[arg(long)]
        map: PathBuf,
        #[command(flatten)]
        order: OrderArgs,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Record a Picard or Mann orbit as CSV.
    Iterate {
        #[arg(long)]
        map: PathBuf,
        /// `zero` or comma-separated coordinates.
        #[arg(long)]
        x0: String,
        #[arg(long, value_enum, default_value_t = Scheme::Picard)]
        scheme: Scheme,
        /// `harmonic`, a constant, or a comma-separated list.
        #[arg(long, default_value = "harmonic")]
        beta: String,
        #[command(flatten)]
        order: OrderArgs,
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Asymptotic center of an orbit tail read from an `iterate` CSV.
    AsymCenter {
        #[arg(long)]
        orbit: PathBuf,
        /// First row of the tail; the second half of the orbit by default.
        #[arg(long)]
        tail_from: Option<usize>,
        #[arg(long, value_enum, default_value_t = SideArg::Auto)]
        side: SideArg,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Mapping file used to report the fixed-point residual of the center.
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run verification campaigns; exit status 0 iff every check passes.
    Verify {
        #[arg(long, default_value = "all")]
        suite: Suite,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write every built-in scenario mapping as a JSON mapping file.
    Corpus {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum OrderCommand {
    Check {
        #[arg(long, default_value = "orthant")]
        cone: ConeKind,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct OrderArgs {
    #[arg(long, default_value = "orthant")]
    cone: ConeKind,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
}

impl OrderArgs {
    fn build(&self, dim: usize) -> Result<(ConeSpec, SpaceSpec)> {
        Ok((ConeSpec::new(self.cone, dim)?, SpaceSpec::new(dim, self.p)?))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Picard,
    Mann,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Auto,
    Above,
    Below,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(false)` signals a completed run whose checks failed.
fn run(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Modulus { p, eps_grid, dim, out } => modulus(p, eps_grid, dim, out.as_deref()),
        Command::Order {
            command: OrderCommand::Check { cone, dim, p, samples, seed },
        } => order_check(cone, dim, p, samples, seed),
        Command::CheckMapping { map, order, alpha, samples, seed, json } => {
            check_mapping(&map, &order, alpha, samples, seed, json.as_deref())
        }
        Command::Iterate { map, x0, scheme, beta, order, max_iter, out } => {
            iterate(&map, &x0, scheme, &beta, &order, max_iter, &out)
        }
        Command::AsymCenter { orbit, tail_from, side, p, map, out } => {
            asym_center(&orbit, tail_from, side, p, map.as_deref(), out.as_deref())
        }
        Command::Verify { suite, config, seed, out } => verify(suite, config.as_deref(), seed, &out),
        Command::Corpus { out } => corpus(&out),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    ))
}

fn load_map(path: &Path) -> Result<Mapping> {
    Mapping::load(path).with_context(|| format!("cannot load mapping {}", path.display()))
}

fn modulus(p: f64, intervals: usize, dim: usize, out: Option<&Path>) -> Result<bool> {
    let space = SpaceSpec::new(dim, p)?;
    let cfg = ProfileConfig {
        intervals,
        solver: ModulusSolverConfig::default(),
    };
    let prof = ConvexityProfile::compute(&space, &cfg)?;
    let mut w: Box<dyn Write> = match out {
        Some(path) => Box::new(create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    writeln!(w, "epsilon,delta")?;
    for (e, d) in prof.epsilons.iter().zip(&prof.deltas) {
        writeln!(w, "{e},{d}")?;
    }
    w.flush()?;
    if out.is_some() {
        println!("p = {p}, dim = {dim}, eps0 = {}", prof.eps0);
    }
    Ok(true)
}

fn order_check(kind: ConeKind, dim: usize, p: f64, samples: usize, seed: u64) -> Result<bool> {
    let cone = ConeSpec::new(kind, dim)?;
    let space = SpaceSpec::new(dim, p)?;
    let normality = normality_constant_estimate(&cone, &space, samples, seed)?;
    let mono = is_norm_monotonic(&cone, &space, samples, seed)?;
    println!("{:<26} {}", "cone", kind);
    println!("{:<26} {dim}", "dim");
    println!("{:<26} {p}", "p");
    println!("{:<26} {}", "minihedral", cone.is_minihedral());
    println!("{:<26} {normality:.6}", "normality estimate");
    println!(
        "{:<26} {} ({} samples)",
        "monotonic norm",
        if mono.passed { "PASS" } else { "FAIL" },
        mono.samples
    );
    if let Some((x, y, nx, ny)) = &mono.witness {
        println!("{:<26} x={x:.6} y={y:.6} |x|={nx:.6} |y|={ny:.6}", "  witness");
    }
    if cone.is_minihedral() {
        let l = lattice_check(&cone, samples, seed)?;
        for (name, ok) in [
            ("idempotent", l.idempotent),
            ("commutative", l.commutative),
            ("associative", l.associative),
            ("absorptive", l.absorptive),
            ("upper/lower bound", l.upper_bound),
        ] {
            println!("{:<26} {}", format!("lattice {name}"), if ok { "PASS" } else { "FAIL" });
        }
    } else {
        println!("{:<26} n/a (cone is not minihedral)", "lattice");
    }
    Ok(true)
}

fn check_mapping(
    path: &Path,
    order: &OrderArgs,
    alpha: f64,
    samples: usize,
    seed: u64,
    json: Option<&Path>,
) -> Result<bool> {
    let map = load_map(path)?;
    let (cone, space) = order.build(map.dim())?;
    let cfg = SamplerConfig::new(samples, seed);
    let mut reports: Vec<PropertyReport> = vec![
        is_monotone(&map, &cone, &cfg)?,
        is_monotone_nonexpansive(&map, &cone, &space, &cfg)?,
        is_alpha_nonexpansive(&map, &cone, &space, alpha, &cfg)?,
    ];
    let claimed = reports[2].passed();

    let pairs = comparable_pairs(&map, &cone, &cfg);
    let lemma_violations = pairs
        .iter()
        .map(|(x, y)| lemma22_pair(&map, &space, alpha, x, y).map(|c| !c.holds))
        .collect::<ordfix::error::Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&v| v)
        .count();

    let fixed = match fixed_point_oracle(&map, &OracleConfig::default()) {
        Ok(f) => Some(f),
        Err(e) => {
            log::warn!("fixed-point oracle unavailable: {e}");
            None
        }
    };
    if let Some(f) = fixed.as_ref().filter(|f| !f.is_empty()) {
        reports.push(is_quasi_nonexpansive(&map, &cone, &space, f, &cfg)?);
    }

    println!("map {} ({}), cone {}, p = {}", path.display(), map.kind().label(), order.cone, order.p);
    for r in &reports {
        println!("{r}");
    }
    println!(
        "{:<28} alpha={:<8.4} samples={:<6} violations={}",
        "perturbed bound (alpha)",
        alpha,
        pairs.len(),
        lemma_violations
    );
    match &fixed {
        Some(f) if f.is_empty() => println!("fixed points: none found"),
        Some(f) => println!(
            "fixed points: {}",
            f.iter().map(|z| format!("{z:.6}")).collect::<Vec<_>>().join(" ")
        ),
        None => println!("fixed points: oracle unavailable"),
    }

    if let Some(path) = json {
        let doc = serde_json::json!({
            "map": map,
            "cone": order.cone,
            "p": order.p,
            "alpha": alpha,
            "samples": samples,
            "seed": seed,
            "reports": reports,
            "perturbed_bound_violations": lemma_violations,
            "fixed_points": fixed,
        });
        let mut w = create(path)?;
        serde_json::to_writer_pretty(&mut w, &doc)?;
        w.flush()?;
    }
    Ok(claimed)
}

fn iterate(
    path: &Path,
    x0: &str,
    scheme: Scheme,
    beta: &str,
    order: &OrderArgs,
    max_iter: usize,
    out: &Path,
) -> Result<bool> {
    let map = load_map(path)?;
    let (cone, space) = order.build(map.dim())?;
    let x0 = if x0.trim().eq_ignore_ascii_case("zero") {
        Vector::zeros(map.dim())
    } else {
        x0.parse::<Vector>()?
    };
    let cfg = IterationConfig {
        max_iter,
        ..IterationConfig::default()
    };
    let rec = match scheme {
        Scheme::Picard => picard_orbit(&map, &x0, &cone, &space, &cfg)?,
        Scheme::Mann => {
            let sched: BetaSchedule = beta.parse()?;
            mann_orbit(&map, &x0, &sched, &cone, &space, &cfg)?
        }
    };
    let mut w = create(out)?;
    write_orbit_csv(&rec, &mut w)?;
    w.flush()?;
    let mono = check_orbit_monotone(&rec, &cone);
    println!(
        "verdict {} after {} steps, last {:.9}, residual {:.3e}, orbit {}",
        rec.verdict,
        rec.steps(),
        rec.last(),
        rec.last_residual(),
        mono.monotonicity
    );
    Ok(true)
}

fn asym_center(
    orbit: &Path,
    tail_from: Option<usize>,
    side: SideArg,
    p: f64,
    map: Option<&Path>,
    out: Option<&Path>,
) -> Result<bool> {
    let points = read_orbit_csv(BufReader::new(
        File::open(orbit).with_context(|| format!("cannot open {}", orbit.display()))?,
    ))?;
    let Some(first) = points.first() else {
        bail!("orbit file {} has no rows", orbit.display());
    };
    let dim = first.dim();
    let cone = ConeSpec::orthant(dim);
    let space = SpaceSpec::new(dim, p)?;
    let side = match side {
        SideArg::Above => Side::Above,
        SideArg::Below => Side::Below,
        SideArg::Auto => {
            let leq = |a: &Vector, b: &Vector| cone.leq(a, b);
            let up = points.windows(2).map(|w| leq(&w[0], &w[1])).collect::<ordfix::error::Result<Vec<_>>>()?;
            let down = points.windows(2).map(|w| leq(&w[1], &w[0])).collect::<ordfix::error::Result<Vec<_>>>()?;
            if up.iter().all(|&b| b) {
                Side::Above
            } else if down.iter().all(|&b| b) {
                Side::Below
            } else {
                bail!("orbit is neither increasing nor decreasing; pass --side");
            }
        }
    };
    let prob = AsymCenterProblem::from_orbit(&points, tail_from, cone, space.clone(), side)?;
    let mut res = solve_asym_center(&prob, &SolverConfig::default())?;
    let mut fixed_ok = true;
    if let Some(path) = map {
        let m = load_map(path)?;
        fixed_ok = verify_center_is_fixed(&m, &space, &mut res, 1e-6)?;
    }

    let mut report = String::new();
    report.push_str(&format!("orbit            {}\n", orbit.display()));
    report.push_str(&format!("tail             {} points\n", prob.tail().len()));
    report.push_str(&format!("side             {side:?}\n"));
    report.push_str(&format!("center           {:.12}\n", res.z));
    report.push_str(&format!("radius           {:.6e}\n", res.r));
    report.push_str(&format!("lower bound      {:.6e}\n", res.lower_bound));
    report.push_str(&format!("gap              {:.3e}\n", res.gap()));
    report.push_str(&format!("feasibility      {:.3e}\n", prob.feasibility_margin(&res.z)));
    report.push_str(&format!("iterations       {}\n", res.iterations));
    if let Some(r) = res.fixed_point_residual {
        report.push_str(&format!(
            "|Tz - z|         {r:.3e} {}\n",
            if fixed_ok { "PASS" } else { "FAIL" }
        ));
    }
    print!("{report}");
    if let Some(path) = out {
        let mut w = create(path)?;
        w.write_all(report.as_bytes())?;
        w.flush()?;
    }
    Ok(fixed_ok)
}

fn verify(suite: Suite, config: Option<&Path>, seed: u64, out: &Path) -> Result<bool> {
    let cfg = match config {
        Some(path) => CampaignConfig::load(path).with_context(|| format!("cannot load config {}", path.display()))?,
        None => CampaignConfig::default(),
    };
    log::info!("running suite {} with seed {seed}", suite.name());
    let reports = harness::run_suite(suite, &cfg, seed)?;
    harness::write_outputs(&reports, out)?;
    print!("{}", harness::summary_table(&reports));
    Ok(harness::all_passed(&reports))
}

fn corpus(out: &Path) -> Result<bool> {
    fs::create_dir_all(out)?;
    for s in harness::corpus() {
        let path = out.join(format!("{}.json", s.id));
        fs::write(&path, s.mapping.to_json()? + "\n")?;
        println!("{}", path.display());
    }
    Ok(true)
}
