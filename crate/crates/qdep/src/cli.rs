//! Command-line interface: `surface`, `estimate`, `heatmap`, `test`, and
//! `table` subcommands over the library.
//!
//! The per-subcommand argument structs are the run configuration; [`run`]
//! enforces the cross-flag invariants (exactly one data source, valid grid
//! and levels) and maps every failure onto the process exit contract:
//! 0 on success, 2 for configuration errors, 3 for input errors. The `test`
//! subcommand reports p-values without judging them — it exits 0 however
//! the test comes out.

use crate::copula::{CopulaModel, Sample};
use crate::csvio;
use crate::depfn::{DependenceSurface, Grid};
use crate::empirical::{rank_transform, surface_estimate, PseudoSample, SummaryStats, TiePolicy};
use crate::error::{Error, Result};
use crate::mc::{
    classical_stats, null_statistic_for, simulate_null, run_test_with_table, NullStatistic,
    TestKind,
};
use crate::svg::{heatmap_svg, scatter_svg, HeatMapSpec};
use clap::{Parser, Subcommand, ValueEnum};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Salt mixed into `--seed` for the `random` tie policy, so tie breaking
/// and Monte Carlo replication never share a generator stream.
const TIE_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Top-level command line.
#[derive(Debug, Parser)]
#[command(
    name = "qdep",
    version,
    about = "Local dependence surfaces, rank-based estimators, and \
             distribution-free Monte Carlo tests for bivariate data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the exact dependence surface of a model (or the envelope
    /// bounds) on a grid.
    Surface(SurfaceArgs),
    /// Estimate Q_n/L_n surfaces and global summaries from data.
    Estimate(EstimateArgs),
    /// Render heat maps and the pseudo-observation scatter.
    Heatmap(HeatmapArgs),
    /// Run a Monte Carlo hypothesis test.
    Test(TestArgs),
    /// Tabulate simulated critical values or signed null quantiles.
    Table(TableArgs),
}

/// A `u,v` pair, e.g. `--point 0.5,0.5`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointArg {
    pub u: f64,
    pub v: f64,
}

impl FromStr for PointArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (u, v) = s
            .split_once(',')
            .ok_or_else(|| format!("expected `u,v`, got `{s}`"))?;
        let u: f64 = u.trim().parse().map_err(|_| format!("bad coordinate `{u}`"))?;
        let v: f64 = v.trim().parse().map_err(|_| format!("bad coordinate `{v}`"))?;
        if !(u.is_finite() && v.is_finite()) {
            return Err(format!("coordinates must be finite, got `{s}`"));
        }
        Ok(PointArg { u, v })
    }
}

/// Tie-handling policies exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TiesArg {
    /// Refuse tied data.
    Strict,
    /// Average ranks within tied groups.
    Midrank,
    /// Break ties uniformly at random (seeded from `--seed`).
    Random,
}

impl TiesArg {
    fn to_policy(self, master_seed: u64) -> TiePolicy {
        match self {
            TiesArg::Strict => TiePolicy::Strict,
            TiesArg::Midrank => TiePolicy::Midrank,
            TiesArg::Random => TiePolicy::Random {
                seed: master_seed ^ TIE_SEED_SALT,
            },
        }
    }

    fn name(self) -> &'static str {
        match self {
            TiesArg::Strict => "strict",
            TiesArg::Midrank => "midrank",
            TiesArg::Random => "random",
        }
    }
}

/// Output formats for commands that can write both tables and graphics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Svg,
}

/// Which test to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    /// Two-sided pointwise independence test at `--point`.
    #[value(alias = "pointwise_independence")]
    Pointwise,
    /// Global independence test on L^o.
    #[value(alias = "global_independence_Lo")]
    Independence,
    /// Global PQD test on L_*.
    #[value(alias = "global_pqd_Lstar")]
    Pqd,
    /// Global NQD test on L^*.
    #[value(alias = "global_nqd_Lupper")]
    Nqd,
}

#[derive(Debug, Parser)]
pub struct SurfaceArgs {
    /// Model spec `name[:params]`, e.g. `frechet-mixture:0.5`.
    #[arg(long)]
    pub model: Option<String>,
    /// Write the envelope bound surfaces instead of (or besides) a model's.
    #[arg(long)]
    pub bounds: bool,
    /// Grid resolution g (points i/g, i = 1..g-1).
    #[arg(long, default_value_t = 16)]
    pub grid: u32,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Comma-separated output formats.
    #[arg(long, value_delimiter = ',', default_value = "csv")]
    pub format: Vec<OutputFormat>,
}

#[derive(Debug, Parser)]
pub struct EstimateArgs {
    /// Two-column CSV data file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Model spec to sample instead of reading a file.
    #[arg(long)]
    pub model: Option<String>,
    /// Sample size when drawing from `--model`.
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    /// Grid resolution g.
    #[arg(long, default_value_t = 16)]
    pub grid: u32,
    /// Tie policy for ranking.
    #[arg(long, value_enum, default_value_t = TiesArg::Midrank)]
    pub ties: TiesArg,
    /// Master seed (model sampling and random tie breaking).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Comma-separated output formats.
    #[arg(long, value_delimiter = ',', default_value = "csv")]
    pub format: Vec<OutputFormat>,
}

#[derive(Debug, Parser)]
pub struct HeatmapArgs {
    /// Two-column CSV data file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Model spec to sample instead of reading a file.
    #[arg(long)]
    pub model: Option<String>,
    /// Sample size when drawing from `--model`.
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    /// Grid resolution g.
    #[arg(long, default_value_t = 16)]
    pub grid: u32,
    /// Tie policy for ranking.
    #[arg(long, value_enum, default_value_t = TiesArg::Midrank)]
    pub ties: TiesArg,
    /// Master seed (model sampling and random tie breaking).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Comma-separated output formats.
    #[arg(long, value_delimiter = ',', default_value = "svg")]
    pub format: Vec<OutputFormat>,
}

#[derive(Debug, Parser)]
pub struct TestArgs {
    /// Two-column CSV data file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Model spec to sample instead of reading a file.
    #[arg(long)]
    pub model: Option<String>,
    /// Sample size when drawing from `--model`.
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    /// Which test to run.
    #[arg(long, value_enum, default_value_t = KindArg::Independence)]
    pub kind: KindArg,
    /// Evaluation point for the pointwise test.
    #[arg(long)]
    pub point: Option<PointArg>,
    /// Grid resolution g for the global statistics.
    #[arg(long, default_value_t = 16)]
    pub grid: u32,
    /// Monte Carlo replicates.
    #[arg(long = "B", default_value_t = 10_000)]
    pub b: usize,
    /// Master seed for the null simulation (and model sampling).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Tie policy for ranking.
    #[arg(long, value_enum, default_value_t = TiesArg::Midrank)]
    pub ties: TiesArg,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Reuse a previously written null table instead of simulating.
    #[arg(long)]
    pub null_in: Option<PathBuf>,
    /// Also write the simulated null table for later reuse.
    #[arg(long)]
    pub null_out: Option<PathBuf>,
    /// Also compute classical coefficients with permutation p-values.
    #[arg(long)]
    pub classical: bool,
}

#[derive(Debug, Parser)]
pub struct TableArgs {
    /// Sample size(s); repeat the flag for several.
    #[arg(long = "n", required = true)]
    pub n: Vec<usize>,
    /// Grid point(s) `u,v`; repeat the flag for several.
    #[arg(long = "point", required = true)]
    pub point: Vec<PointArg>,
    /// Level(s) in (0,1); repeat the flag for several.
    #[arg(long = "alpha", required = true)]
    pub alpha: Vec<f64>,
    /// Tabulate signed L_n quantiles instead of two-sided critical values.
    #[arg(long)]
    pub signed: bool,
    /// Monte Carlo replicates.
    #[arg(long = "B", default_value_t = 10_000)]
    pub b: usize,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Executes a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Surface(args) => cmd_surface(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Heatmap(args) => cmd_heatmap(args),
        Command::Test(args) => cmd_test(args),
        Command::Table(args) => cmd_table(args),
    }
}

fn ensure_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| {
        Error::Config(format!(
            "cannot create output directory `{}`: {e}",
            dir.display()
        ))
    })
}

/// Resolves the data source: exactly one of `--input` / `--model`.
fn load_sample(
    input: &Option<PathBuf>,
    model: &Option<String>,
    n: usize,
    seed: u64,
) -> Result<Sample> {
    match (input, model) {
        (Some(_), Some(_)) => Err(Error::Config(
            "give exactly one of --input and --model, not both".into(),
        )),
        (None, None) => Err(Error::Config(
            "a data source is required: --input <file> or --model <spec>".into(),
        )),
        (Some(path), None) => csvio::parse_csv(path),
        (None, Some(spec)) => CopulaModel::parse(spec)?.sample(n, seed),
    }
}

fn warn_ties(ps: &PseudoSample, ties: TiesArg) {
    if ps.has_ties() {
        let report = ps.ties();
        eprintln!(
            "warning: tied observations detected ({} tied group(s) in x, {} in y); \
             ranks resolved by the `{}` policy",
            report.groups_x,
            report.groups_y,
            ties.name()
        );
    }
}

fn surface_caption(surface: &DependenceSurface, symbol: &str) -> String {
    format!(
        "min {symbol} = {}, max {symbol} = {}",
        csvio::fmt_g7(surface.min()),
        csvio::fmt_g7(surface.max())
    )
}

fn cmd_surface(args: SurfaceArgs) -> Result<()> {
    if args.model.is_none() && !args.bounds {
        return Err(Error::Config(
            "surface needs --model <spec> and/or --bounds".into(),
        ));
    }
    let grid = Grid::new(args.grid)?;
    ensure_out(&args.out)?;
    let csv = args.format.contains(&OutputFormat::Csv);
    let svg = args.format.contains(&OutputFormat::Svg);

    let mut emitted: Vec<(String, DependenceSurface, String)> = Vec::new();
    if let Some(spec) = &args.model {
        let model = CopulaModel::parse(spec)?;
        let surface = DependenceSurface::from_model(&model, grid)?;
        let caption = surface_caption(&surface, "q");
        emitted.push(("surface".to_string(), surface, caption));
    }
    if args.bounds {
        let lower = DependenceSurface::lower_bound(grid);
        let upper = DependenceSurface::upper_bound(grid);
        let lower_caption = surface_caption(&lower, "B_*");
        let upper_caption = surface_caption(&upper, "B^*");
        emitted.push(("bound_lower".to_string(), lower, lower_caption));
        emitted.push(("bound_upper".to_string(), upper, upper_caption));
    }
    for (stem, surface, caption) in &emitted {
        if csv {
            let path = args.out.join(format!("{stem}.csv"));
            csvio::write_surface(&path, surface)?;
            println!("wrote {}", path.display());
        }
        if svg {
            let path = args.out.join(format!("{stem}.svg"));
            fs::write(&path, heatmap_svg(surface, &HeatMapSpec::new(caption.clone())))?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn cmd_estimate(args: EstimateArgs) -> Result<()> {
    let grid = Grid::new(args.grid)?;
    let sample = load_sample(&args.input, &args.model, args.n, args.seed)?;
    let ps = rank_transform(&sample, args.ties.to_policy(args.seed))?;
    warn_ties(&ps, args.ties);
    ensure_out(&args.out)?;

    let qn = surface_estimate(&ps, grid, false)?;
    let ln = surface_estimate(&ps, grid, true)?;
    let stats = SummaryStats::from_surface(&ln);

    if args.format.contains(&OutputFormat::Csv) {
        csvio::write_surface(&args.out.join("qn_surface.csv"), &qn)?;
        csvio::write_surface(&args.out.join("ln_surface.csv"), &ln)?;
        csvio::write_summary(&args.out.join("summary.csv"), &stats)?;
        csvio::write_pseudo(&args.out.join("pseudo.csv"), &ps)?;
        println!(
            "wrote {}, {}, {}, {}",
            args.out.join("qn_surface.csv").display(),
            args.out.join("ln_surface.csv").display(),
            args.out.join("summary.csv").display(),
            args.out.join("pseudo.csv").display()
        );
    }
    if args.format.contains(&OutputFormat::Svg) {
        write_estimate_svgs(&args.out, &ln, &stats, &ps)?;
    }
    println!(
        "n = {}, L_* = {}, L^* = {}, L^o = {}",
        ps.n(),
        csvio::fmt_g7(stats.l_star),
        csvio::fmt_g7(stats.l_upper),
        csvio::fmt_g7(stats.l_o)
    );
    Ok(())
}

fn ln_caption(stats: &SummaryStats) -> String {
    format!(
        "L_* = {}, L^* = {}",
        csvio::fmt_g7(stats.l_star),
        csvio::fmt_g7(stats.l_upper)
    )
}

fn write_estimate_svgs(
    out: &Path,
    ln: &DependenceSurface,
    stats: &SummaryStats,
    ps: &PseudoSample,
) -> Result<()> {
    let heat_path = out.join("heatmap_ln.svg");
    fs::write(&heat_path, heatmap_svg(ln, &HeatMapSpec::new(ln_caption(stats))))?;
    let scatter_path = out.join("scatter.svg");
    let caption = format!("pseudo-observations, n = {}", ps.n());
    fs::write(&scatter_path, scatter_svg(&ps.pseudo_obs(), &caption))?;
    println!("wrote {}, {}", heat_path.display(), scatter_path.display());
    Ok(())
}

fn cmd_heatmap(args: HeatmapArgs) -> Result<()> {
    let grid = Grid::new(args.grid)?;
    let model = args
        .model
        .as_deref()
        .map(CopulaModel::parse)
        .transpose()?;
    let sample = load_sample(&args.input, &args.model, args.n, args.seed)?;
    let ps = rank_transform(&sample, args.ties.to_policy(args.seed))?;
    warn_ties(&ps, args.ties);
    ensure_out(&args.out)?;

    let ln = surface_estimate(&ps, grid, true)?;
    let stats = SummaryStats::from_surface(&ln);

    if args.format.contains(&OutputFormat::Svg) {
        write_estimate_svgs(&args.out, &ln, &stats, &ps)?;
        if let Some(model) = &model {
            let exact = DependenceSurface::from_model(model, grid)?;
            let path = args.out.join("heatmap_q.svg");
            fs::write(
                &path,
                heatmap_svg(&exact, &HeatMapSpec::new(surface_caption(&exact, "q"))),
            )?;
            println!("wrote {}", path.display());
        }
    }
    if args.format.contains(&OutputFormat::Csv) {
        csvio::write_surface(&args.out.join("ln_surface.csv"), &ln)?;
        if let Some(model) = &model {
            let exact = DependenceSurface::from_model(model, grid)?;
            csvio::write_surface(&args.out.join("surface.csv"), &exact)?;
        }
        println!("wrote {}", args.out.join("ln_surface.csv").display());
    }
    println!("n = {}, {}", ps.n(), ln_caption(&stats));
    Ok(())
}

fn cmd_test(args: TestArgs) -> Result<()> {
    let grid = Grid::new(args.grid)?;
    let kind = match args.kind {
        KindArg::Pointwise => {
            let point = args.point.ok_or_else(|| {
                Error::Config("the pointwise test needs --point u,v".into())
            })?;
            TestKind::PointwiseIndependence {
                u: point.u,
                v: point.v,
            }
        }
        KindArg::Independence => TestKind::GlobalIndependenceLo,
        KindArg::Pqd => TestKind::GlobalPqdLstar,
        KindArg::Nqd => TestKind::GlobalNqdLupper,
    };
    let sample = load_sample(&args.input, &args.model, args.n, args.seed)?;
    ensure_out(&args.out)?;

    let statistic: NullStatistic = null_statistic_for(kind, grid);
    let table = match &args.null_in {
        Some(path) => csvio::read_null_table(path)?,
        None => simulate_null(sample.n(), statistic, args.b, args.seed)?,
    };
    if let Some(path) = &args.null_out {
        csvio::write_null_table(path, &table)?;
        println!("wrote {}", path.display());
    }

    let report = run_test_with_table(kind, &sample, grid, &table, args.ties.to_policy(args.seed))?;
    let report_path = args.out.join("test_report.csv");
    csvio::write_test_report(&report_path, &report)?;
    println!("wrote {}", report_path.display());
    println!(
        "{}: observed {} = {}, p-value = {} (B = {}, seed = {}, n = {}, grid = {})",
        report.kind.label(),
        report.statistic,
        csvio::fmt_g7(report.observed),
        csvio::fmt_g7(report.p_value),
        report.b,
        report.master_seed,
        report.n,
        report.grid
    );

    if args.classical {
        let stats = classical_stats(&sample, args.b, args.seed)?;
        let path = args.out.join("classical.csv");
        csvio::write_classical(&path, &stats)?;
        println!("wrote {}", path.display());
        for stat in &stats {
            println!(
                "{}: estimate = {}, p-value = {}",
                stat.name,
                csvio::fmt_g7(stat.estimate),
                csvio::fmt_g7(stat.p_value)
            );
        }
    }
    Ok(())
}

fn cmd_table(args: TableArgs) -> Result<()> {
    for &alpha in &args.alpha {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Parameter(format!(
                "significance level must lie in (0, 1), got {alpha}"
            )));
        }
    }
    ensure_out(&args.out)?;
    let mut rows: Vec<csvio::CritRow> = Vec::new();
    for &n in &args.n {
        for point in &args.point {
            let statistic = if args.signed {
                NullStatistic::LnPoint {
                    u: point.u,
                    v: point.v,
                }
            } else {
                NullStatistic::AbsLnPoint {
                    u: point.u,
                    v: point.v,
                }
            };
            let table = simulate_null(n, statistic, args.b, args.seed)?;
            for &alpha in &args.alpha {
                let (value, label) = if args.signed {
                    (table.quantile(alpha)?, "signed_quantile")
                } else {
                    (table.quantile(1.0 - alpha)?, "critical_value")
                };
                rows.push(csvio::CritRow {
                    n,
                    u: point.u,
                    v: point.v,
                    alpha,
                    value,
                    statistic: label,
                });
            }
        }
    }
    let path = args.out.join("table.csv");
    csvio::write_crit_rows(&path, &rows, args.b, args.seed)?;
    println!("wrote {}", path.display());
    for row in &rows {
        println!(
            "n = {}, point = ({}, {}), alpha = {}: {} = {}",
            row.n,
            csvio::fmt_g7(row.u),
            csvio::fmt_g7(row.v),
            csvio::fmt_g7(row.alpha),
            row.statistic,
            csvio::fmt_g7(row.value)
        );
    }
    Ok(())
}
