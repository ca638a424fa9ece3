//! Distribution-free Monte Carlo inference for the dependence function:
//! null simulation under independence, type-7 quantiles, critical values,
//! pointwise and global tests, and classical-coefficient comparisons.
//!
//! Under independence with continuous margins, the ranks of a sample form a
//! uniformly random permutation pair, so the null law of any rank statistic
//! is known exactly and does not depend on the marginals. Each null
//! replicate therefore draws a random permutation of `1..n` (never i.i.d.
//! uniforms, which would admit ties) and evaluates the target statistic
//! through the same counting kernels the estimators use. Holding one margin
//! at the identity permutation loses nothing: the statistics depend only on
//! the relative permutation.
//!
//! Determinism: replicate `k` uses a ChaCha8 generator keyed by the master
//! seed with stream index `k`, so results are bit-identical for any degree
//! of parallelism. P-values are plain Monte Carlo proportions (no
//! add-one-permutation adjustment), so extreme observations genuinely report
//! 0.00 or 1.00.

use crate::copula::Sample;
use crate::depfn::Grid;
use crate::empirical::{
    cn_thresholds, grid_joint_counts, joint_count, ln_from_count, rank_transform,
    surface_estimate, SummaryStats, TiePolicy,
};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Default number of Monte Carlo replicates.
pub const DEFAULT_B: usize = 10_000;

/// A null statistic to simulate under independence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NullStatistic {
    /// `|L_n(u, v)|` at a fixed interior point.
    AbsLnPoint { u: f64, v: f64 },
    /// Signed `L_n(u, v)` at a fixed interior point.
    LnPoint { u: f64, v: f64 },
    /// `L_* = min` of `L_n` over a grid.
    LStar { grid: Grid },
    /// `L^* = max` of `L_n` over a grid.
    LUpper { grid: Grid },
    /// `L^o = max |L_n|` over a grid.
    LO { grid: Grid },
}

impl NullStatistic {
    fn validate(&self) -> Result<()> {
        match *self {
            NullStatistic::AbsLnPoint { u, v } | NullStatistic::LnPoint { u, v } => {
                if u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0 {
                    Ok(())
                } else {
                    Err(Error::Domain(format!(
                        "null statistic point ({u}, {v}) must lie strictly \
                         inside the unit square"
                    )))
                }
            }
            NullStatistic::LStar { .. }
            | NullStatistic::LUpper { .. }
            | NullStatistic::LO { .. } => Ok(()),
        }
    }

    /// Label used in null-table metadata, e.g. `abs_ln_point:0.5,0.5` or
    /// `l_o:16`.
    pub fn label(&self) -> String {
        match *self {
            NullStatistic::AbsLnPoint { u, v } => format!("abs_ln_point:{u},{v}"),
            NullStatistic::LnPoint { u, v } => format!("ln_point:{u},{v}"),
            NullStatistic::LStar { grid } => format!("l_star:{}", grid.g()),
            NullStatistic::LUpper { grid } => format!("l_upper:{}", grid.g()),
            NullStatistic::LO { grid } => format!("l_o:{}", grid.g()),
        }
    }

    /// Parses a [`NullStatistic::label`] string.
    pub fn from_label(label: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unrecognized null statistic `{label}`"));
        let (name, rest) = label.split_once(':').ok_or_else(bad)?;
        let stat = match name {
            "abs_ln_point" | "ln_point" => {
                let (u, v) = rest.split_once(',').ok_or_else(bad)?;
                let u: f64 = u.trim().parse().map_err(|_| bad())?;
                let v: f64 = v.trim().parse().map_err(|_| bad())?;
                if name == "abs_ln_point" {
                    NullStatistic::AbsLnPoint { u, v }
                } else {
                    NullStatistic::LnPoint { u, v }
                }
            }
            "l_star" | "l_upper" | "l_o" => {
                let g: u32 = rest.trim().parse().map_err(|_| bad())?;
                let grid = Grid::new(g)?;
                match name {
                    "l_star" => NullStatistic::LStar { grid },
                    "l_upper" => NullStatistic::LUpper { grid },
                    _ => NullStatistic::LO { grid },
                }
            }
            _ => return Err(bad()),
        };
        stat.validate()?;
        Ok(stat)
    }
}

/// Sorted Monte Carlo null distribution of one statistic under independence.
#[derive(Debug, Clone, PartialEq)]
pub struct NullTable {
    n: usize,
    statistic: NullStatistic,
    b: usize,
    master_seed: u64,
    values: Vec<f64>,
}

impl NullTable {
    /// Reassembles a table from stored parts (e.g. a CSV reload), checking
    /// the replicate count and ascending order.
    pub fn from_parts(
        n: usize,
        statistic: NullStatistic,
        b: usize,
        master_seed: u64,
        values: Vec<f64>,
    ) -> Result<Self> {
        if values.len() != b {
            return Err(Error::Config(format!(
                "null table holds {} values but B={b}",
                values.len()
            )));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Config("null table values are not sorted".into()));
        }
        statistic.validate()?;
        Ok(Self {
            n,
            statistic,
            b,
            master_seed,
            values,
        })
    }

    /// Sample size the null was simulated for.
    pub fn n(&self) -> usize {
        self.n
    }

    /// The simulated statistic.
    pub fn statistic(&self) -> NullStatistic {
        self.statistic
    }

    /// Number of replicates.
    pub fn b(&self) -> usize {
        self.b
    }

    /// Master seed of the simulation.
    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Replicate values, sorted ascending.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Type-7 quantile of the stored null distribution.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        quantile_type7(&self.values, p)
    }

    /// Proportion of replicates `>= t` (upper-tail p-value convention).
    pub fn upper_tail(&self, t: f64) -> f64 {
        let below = self.values.partition_point(|&x| x < t);
        (self.b - below) as f64 / self.b as f64
    }

    /// Proportion of replicates `<= t` (lower-tail p-value convention).
    pub fn lower_tail(&self, t: f64) -> f64 {
        let at_most = self.values.partition_point(|&x| x <= t);
        at_most as f64 / self.b as f64
    }
}

/// Simulates the null distribution of one statistic; see
/// [`simulate_null_many`] for the shared-replicate variant.
pub fn simulate_null(
    n: usize,
    statistic: NullStatistic,
    b: usize,
    master_seed: u64,
) -> Result<NullTable> {
    let tables = simulate_null_many(n, std::slice::from_ref(&statistic), b, master_seed)?;
    Ok(tables.into_iter().next().expect("one table per statistic"))
}

/// Simulates several null statistics over one shared set of permutation
/// replicates. Replicate `k` derives its generator from `master_seed` with
/// stream `k`, so the result is deterministic under any parallelism.
pub fn simulate_null_many(
    n: usize,
    statistics: &[NullStatistic],
    b: usize,
    master_seed: u64,
) -> Result<Vec<NullTable>> {
    if n < 2 {
        return Err(Error::Parameter(format!(
            "null simulation needs n >= 2, got {n}"
        )));
    }
    if b < 1 {
        return Err(Error::Parameter("replicate count B must be >= 1".into()));
    }
    if statistics.is_empty() {
        return Err(Error::Parameter("no null statistics requested".into()));
    }
    for stat in statistics {
        stat.validate()?;
    }
    let prepared: Vec<Prepared> = statistics.iter().map(|s| Prepared::new(n, s)).collect();
    let identity: Vec<f64> = (1..=n).map(|k| k as f64).collect();

    let rows: Vec<Vec<f64>> = (0..b)
        .into_par_iter()
        .map(|k| {
            let mut rng = replicate_rng(master_seed, k as u64);
            let perm = random_rank_permutation(n, &mut rng);
            prepared.iter().map(|p| p.eval(&identity, &perm, n)).collect()
        })
        .collect();

    Ok(prepared
        .iter()
        .enumerate()
        .map(|(j, _)| {
            let mut values: Vec<f64> = rows.iter().map(|row| row[j]).collect();
            values.sort_by(f64::total_cmp);
            NullTable {
                n,
                statistic: statistics[j],
                b,
                master_seed,
                values,
            }
        })
        .collect())
}

fn replicate_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// A uniformly random permutation of `1..n`, as rank reals.
fn random_rank_permutation(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut s: Vec<f64> = (1..=n).map(|k| k as f64).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        s.swap(i, j);
    }
    s
}

enum Prepared {
    Point {
        u: f64,
        v: f64,
        tu: f64,
        tv: f64,
        abs: bool,
    },
    GridFold {
        pts: Vec<f64>,
        thresholds: Vec<f64>,
        fold: GridFold,
    },
}

#[derive(Clone, Copy)]
enum GridFold {
    Min,
    Max,
    MaxAbs,
}

impl Prepared {
    fn new(n: usize, stat: &NullStatistic) -> Self {
        let t = (n + 1) as f64;
        match *stat {
            NullStatistic::AbsLnPoint { u, v } => Prepared::Point {
                u,
                v,
                tu: u * t,
                tv: v * t,
                abs: true,
            },
            NullStatistic::LnPoint { u, v } => Prepared::Point {
                u,
                v,
                tu: u * t,
                tv: v * t,
                abs: false,
            },
            NullStatistic::LStar { grid } | NullStatistic::LUpper { grid }
            | NullStatistic::LO { grid } => {
                let pts = grid.points();
                let thresholds = cn_thresholds(&pts, n);
                let fold = match stat {
                    NullStatistic::LStar { .. } => GridFold::Min,
                    NullStatistic::LUpper { .. } => GridFold::Max,
                    _ => GridFold::MaxAbs,
                };
                Prepared::GridFold {
                    pts,
                    thresholds,
                    fold,
                }
            }
        }
    }

    fn eval(&self, r: &[f64], s: &[f64], n: usize) -> f64 {
        match self {
            Prepared::Point { u, v, tu, tv, abs } => {
                let ln = ln_from_count(joint_count(r, s, *tu, *tv), n, *u, *v);
                if *abs {
                    ln.abs()
                } else {
                    ln
                }
            }
            Prepared::GridFold {
                pts,
                thresholds,
                fold,
            } => {
                let counts = grid_joint_counts(r, s, thresholds, thresholds);
                let mut acc = match fold {
                    GridFold::Min => f64::INFINITY,
                    _ => f64::NEG_INFINITY,
                };
                for (i, row) in counts.iter().enumerate() {
                    for (j, &count) in row.iter().enumerate() {
                        let ln = ln_from_count(count, n, pts[i], pts[j]);
                        acc = match fold {
                            GridFold::Min => acc.min(ln),
                            GridFold::Max => acc.max(ln),
                            GridFold::MaxAbs => acc.max(ln.abs()),
                        };
                    }
                }
                acc
            }
        }
    }
}

/// Quantile per Hyndman-Fan Definition 7 on an ascending list:
/// `h = (m-1)p + 1`, linear interpolation between the bracketing order
/// statistics. `p = 0` gives the minimum, `p = 1` the maximum.
pub fn quantile_type7(sorted: &[f64], p: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::Domain(
            "quantile of an empty list is undefined".into(),
        ));
    }
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::Domain(format!(
            "quantile level p={p} must lie in [0, 1]"
        )));
    }
    if sorted.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Domain("quantile input must be sorted ascending".into()));
    }
    let m = sorted.len();
    let h = (m as f64 - 1.0) * p + 1.0;
    let lo = h.floor() as usize; // 1-based
    let frac = h - h.floor();
    if frac == 0.0 || lo >= m {
        Ok(sorted[lo - 1])
    } else {
        Ok(sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1]))
    }
}

/// Critical value for the two-sided pointwise independence test: the
/// `(1-alpha)` type-7 quantile of simulated `|L_n(u, v)|` under
/// independence.
pub fn critical_value(
    n: usize,
    u: f64,
    v: f64,
    alpha: f64,
    b: usize,
    master_seed: u64,
) -> Result<f64> {
    check_alpha(alpha)?;
    let table = simulate_null(n, NullStatistic::AbsLnPoint { u, v }, b, master_seed)?;
    table.quantile(1.0 - alpha)
}

/// Type-7 `alpha`-quantiles of the signed null `L_n(u, v)` under
/// independence, one per requested level.
pub fn signed_quantiles(
    n: usize,
    u: f64,
    v: f64,
    alphas: &[f64],
    b: usize,
    master_seed: u64,
) -> Result<Vec<f64>> {
    for &a in alphas {
        check_alpha(a)?;
    }
    let table = simulate_null(n, NullStatistic::LnPoint { u, v }, b, master_seed)?;
    alphas.iter().map(|&a| table.quantile(a)).collect()
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "significance level must lie in (0, 1), got {alpha}"
        )))
    }
}

/// Which hypothesis test to run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestKind {
    /// Two-sided pointwise independence test via `|L_n(u, v)|`.
    PointwiseIndependence { u: f64, v: f64 },
    /// Global independence test, upper tail of `L^o = max |L_n|`.
    GlobalIndependenceLo,
    /// Test of PQD (`q >= 0` everywhere), rejecting for small `L_*`.
    GlobalPqdLstar,
    /// Test of NQD (`q <= 0` everywhere), rejecting for large `L^*`.
    GlobalNqdLupper,
}

impl TestKind {
    /// The test's name as reported in CSV output.
    pub fn label(&self) -> &'static str {
        match self {
            TestKind::PointwiseIndependence { .. } => "pointwise_independence",
            TestKind::GlobalIndependenceLo => "global_independence_Lo",
            TestKind::GlobalPqdLstar => "global_pqd_Lstar",
            TestKind::GlobalNqdLupper => "global_nqd_Lupper",
        }
    }
}

/// Result of a Monte Carlo test: the observed statistic, its p-value, and
/// the metadata needed to reproduce both.
#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    /// Which test was run.
    pub kind: TestKind,
    /// Label of the simulated null statistic (includes point or grid).
    pub statistic: String,
    /// Observed value of the test statistic (signed `L_n` for the pointwise
    /// test; `L^o`, `L_*`, or `L^*` for the global tests).
    pub observed: f64,
    /// Monte Carlo p-value: the plain proportion of null replicates at
    /// least as extreme as the observation, in the test's tail direction.
    pub p_value: f64,
    /// Number of null replicates.
    pub b: usize,
    /// Master seed of the null simulation.
    pub master_seed: u64,
    /// Sample size.
    pub n: usize,
    /// Grid resolution used for the statistic.
    pub grid: u32,
}

/// Runs a test against a freshly simulated null table.
pub fn run_test(
    kind: TestKind,
    sample: &Sample,
    grid: Grid,
    b: usize,
    master_seed: u64,
    policy: TiePolicy,
) -> Result<TestReport> {
    let stat = null_statistic_for(kind, grid);
    let table = simulate_null(sample.n(), stat, b, master_seed)?;
    run_test_with_table(kind, sample, grid, &table, policy)
}

/// Runs a test against a previously simulated (or reloaded) null table.
/// The table must match the sample size and the statistic the test needs.
pub fn run_test_with_table(
    kind: TestKind,
    sample: &Sample,
    grid: Grid,
    table: &NullTable,
    policy: TiePolicy,
) -> Result<TestReport> {
    let ps = rank_transform(sample, policy)?;
    let n = ps.n();
    if table.n() != n {
        return Err(Error::Config(format!(
            "null table was simulated for n={}, but the sample has n={n}",
            table.n()
        )));
    }
    let expected = null_statistic_for(kind, grid);
    if table.statistic() != expected {
        return Err(Error::Config(format!(
            "null table holds statistic `{}`, but the test needs `{}`",
            table.statistic().label(),
            expected.label()
        )));
    }
    let (observed, p_value) = match kind {
        TestKind::PointwiseIndependence { u, v } => {
            let ln = ps.ln(u, v)?;
            (ln, table.upper_tail(ln.abs()))
        }
        TestKind::GlobalIndependenceLo | TestKind::GlobalPqdLstar | TestKind::GlobalNqdLupper => {
            let surface = surface_estimate(&ps, grid, true)?;
            let stats = SummaryStats::from_surface(&surface);
            match kind {
                TestKind::GlobalIndependenceLo => (stats.l_o, table.upper_tail(stats.l_o)),
                TestKind::GlobalNqdLupper => (stats.l_upper, table.upper_tail(stats.l_upper)),
                _ => (stats.l_star, table.lower_tail(stats.l_star)),
            }
        }
    };
    Ok(TestReport {
        kind,
        statistic: expected.label(),
        observed,
        p_value,
        b: table.b(),
        master_seed: table.master_seed(),
        n,
        grid: grid.g(),
    })
}

/// The null statistic a test kind needs.
pub fn null_statistic_for(kind: TestKind, grid: Grid) -> NullStatistic {
    match kind {
        TestKind::PointwiseIndependence { u, v } => NullStatistic::AbsLnPoint { u, v },
        TestKind::GlobalIndependenceLo => NullStatistic::LO { grid },
        TestKind::GlobalPqdLstar => NullStatistic::LStar { grid },
        TestKind::GlobalNqdLupper => NullStatistic::LUpper { grid },
    }
}

/// One classical dependence coefficient with its permutation p-value.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalStat {
    /// Coefficient name: `pearson`, `spearman`, `kendall`, or `blomqvist`.
    pub name: &'static str,
    /// Point estimate on the data.
    pub estimate: f64,
    /// Two-sided permutation p-value with `B` permutations.
    pub p_value: f64,
}

/// Pearson, Spearman, Kendall (tau-a), and Blomqvist coefficients with
/// two-sided permutation p-values, all four sharing one permutation stream.
pub fn classical_stats(sample: &Sample, b: usize, master_seed: u64) -> Result<Vec<ClassicalStat>> {
    let n = sample.n();
    if n < 2 {
        return Err(Error::Parameter(
            "classical statistics need a sample of size at least 2".into(),
        ));
    }
    if b < 1 {
        return Err(Error::Parameter("replicate count B must be >= 1".into()));
    }
    let xs: Vec<f64> = sample.xs().collect();
    let ys: Vec<f64> = sample.ys().collect();

    let dx = centered(&xs);
    let dy = centered(&ys);
    let ssx: f64 = dx.iter().map(|d| d * d).sum();
    let ssy: f64 = dy.iter().map(|d| d * d).sum();
    if ssx == 0.0 || ssy == 0.0 {
        return Err(Error::Domain(
            "Pearson correlation is undefined for a zero-variance margin".into(),
        ));
    }
    let pearson_denom = (ssx * ssy).sqrt();

    let ps = rank_transform(sample, TiePolicy::Midrank)?;
    let dr = centered(ps.ranks_x());
    let dsn = centered(ps.ranks_y());
    let ssr: f64 = dr.iter().map(|d| d * d).sum();
    let sss: f64 = dsn.iter().map(|d| d * d).sum();
    let spearman_denom = (ssr * sss).sqrt();

    let cx = median_signs(&xs);
    let cy = median_signs(&ys);

    let identity: Vec<usize> = (0..n).collect();
    let observed = [
        dot_permuted(&dx, &dy, &identity) / pearson_denom,
        dot_permuted(&dr, &dsn, &identity) / spearman_denom,
        kendall_tau(ps.ranks_x(), ps.ranks_y(), &identity),
        blomqvist_beta(&cx, &cy, &identity),
    ];

    let hits: [usize; 4] = (0..b)
        .into_par_iter()
        .map(|k| {
            let mut rng = replicate_rng(master_seed, k as u64);
            let perm = index_permutation(n, &mut rng);
            let stats = [
                dot_permuted(&dx, &dy, &perm) / pearson_denom,
                dot_permuted(&dr, &dsn, &perm) / spearman_denom,
                kendall_tau(ps.ranks_x(), ps.ranks_y(), &perm),
                blomqvist_beta(&cx, &cy, &perm),
            ];
            let mut hit = [0usize; 4];
            for (h, (stat, obs)) in hit.iter_mut().zip(stats.iter().zip(&observed)) {
                if stat.abs() >= obs.abs() {
                    *h = 1;
                }
            }
            hit
        })
        .reduce(
            || [0usize; 4],
            |mut acc, hit| {
                for (a, h) in acc.iter_mut().zip(hit) {
                    *a += h;
                }
                acc
            },
        );

    let names = ["pearson", "spearman", "kendall", "blomqvist"];
    Ok(names
        .iter()
        .zip(observed.iter().zip(hits))
        .map(|(&name, (&estimate, hit))| ClassicalStat {
            name,
            estimate,
            p_value: hit as f64 / b as f64,
        })
        .collect())
}

fn centered(values: &[f64]) -> Vec<f64> {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| v - mean).collect()
}

fn index_permutation(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        idx.swap(i, j);
    }
    idx
}

fn dot_permuted(a: &[f64], b: &[f64], perm: &[usize]) -> f64 {
    a.iter().zip(perm).map(|(&ai, &p)| ai * b[p]).sum()
}

/// Kendall tau-a on rank vectors: (concordant - discordant) / (n(n-1)/2);
/// tied pairs contribute zero.
fn kendall_tau(r: &[f64], s: &[f64], perm: &[usize]) -> f64 {
    let n = r.len();
    let mut net = 0i64;
    for i in 0..n {
        for j in (i + 1)..n {
            let prod = (r[i] - r[j]) * (s[perm[i]] - s[perm[j]]);
            if prod > 0.0 {
                net += 1;
            } else if prod < 0.0 {
                net -= 1;
            }
        }
    }
    net as f64 / (n * (n - 1) / 2) as f64
}

fn median_signs(values: &[f64]) -> Vec<i8> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    values
        .iter()
        .map(|&v| {
            if v > median {
                1
            } else if v < median {
                -1
            } else {
                0
            }
        })
        .collect()
}

/// Blomqvist beta: (concordant - discordant)/(concordant + discordant)
/// over medial quadrant classifications, points on a median excluded.
fn blomqvist_beta(cx: &[i8], cy: &[i8], perm: &[usize]) -> f64 {
    let mut concordant = 0usize;
    let mut discordant = 0usize;
    for (i, &p) in perm.iter().enumerate() {
        match cx[i] * cy[p] {
            1 => concordant += 1,
            -1 => discordant += 1,
            _ => {}
        }
    }
    let total = concordant + discordant;
    if total == 0 {
        0.0
    } else {
        (concordant as f64 - discordant as f64) / total as f64
    }
}
