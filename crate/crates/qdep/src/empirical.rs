//! Rank transforms, empirical copulas, the estimator `Q_n` and its
//! standardized form `L_n`, plug-in estimation on the raw scale, summary
//! statistics over a grid, and the linear-rank decomposition diagnostic.
//!
//! Two empirical copulas appear:
//!
//! ```text
//! D_n(u, v) = (1/n) #{i : R_i/n     <= u, S_i/n     <= v}
//! C_n(u, v) = (1/n) #{i : R_i/(n+1) <= u, S_i/(n+1) <= v}
//! ```
//!
//! where `R_i`, `S_i` are the within-margin ranks. The estimator of the
//! dependence function is `Q_n(u,v) = w(u,v)[C_n(u,v) - uv]` with
//! standardization `L_n = sqrt(n) Q_n`. Both are rank statistics: strictly
//! increasing transforms of either margin leave them unchanged.
//!
//! Counting is done by comparing ranks against precomputed thresholds
//! `u (n+1)` (respectively `u n`), never by forming `R_i/(n+1)` first; on
//! dyadic grids with compatible `n` the thresholds are exact and every count
//! is an exact integer, which the exactness tests rely on.

use crate::copula::Sample;
use crate::depfn::{DependenceSurface, Grid, SurfaceKind};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// How to handle tied values during rank transformation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TiePolicy {
    /// Any tie is an error naming the offending value.
    Strict,
    /// Tied values share the average of the ranks they occupy (may be
    /// half-integer).
    Midrank,
    /// Ties broken uniformly at random, deterministically for a fixed seed.
    Random { seed: u64 },
}

/// How many groups of tied values each margin contained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TieReport {
    /// Tied groups in the first margin.
    pub groups_x: usize,
    /// Tied groups in the second margin.
    pub groups_y: usize,
}

impl TieReport {
    /// True if either margin had any tie.
    pub fn any(&self) -> bool {
        self.groups_x > 0 || self.groups_y > 0
    }
}

/// Ranks of a bivariate sample and the pseudo-observations
/// `(R_i/(n+1), S_i/(n+1))`.
///
/// Ranks are stored as reals: under the `strict` and `random` tie policies
/// each margin is a permutation of `1..n`; under `midrank` tied groups share
/// a (possibly half-integer) average rank.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoSample {
    r: Vec<f64>,
    s: Vec<f64>,
    ties: TieReport,
}

impl PseudoSample {
    /// Builds a pseudo-sample from explicit integer rank vectors, each of
    /// which must be a permutation of `1..n`.
    pub fn from_ranks(r: Vec<usize>, s: Vec<usize>) -> Result<Self> {
        if r.len() != s.len() {
            return Err(Error::Domain(format!(
                "rank vectors have different lengths: {} vs {}",
                r.len(),
                s.len()
            )));
        }
        if r.len() < 2 {
            return Err(Error::Parameter(
                "rank statistics need a sample of size at least 2".into(),
            ));
        }
        for ranks in [&r, &s] {
            let mut seen = vec![false; ranks.len()];
            for &rank in ranks.iter() {
                if rank < 1 || rank > ranks.len() || seen[rank - 1] {
                    return Err(Error::Domain(format!(
                        "rank vector is not a permutation of 1..{}",
                        ranks.len()
                    )));
                }
                seen[rank - 1] = true;
            }
        }
        Ok(Self {
            r: r.into_iter().map(|k| k as f64).collect(),
            s: s.into_iter().map(|k| k as f64).collect(),
            ties: TieReport::default(),
        })
    }

    /// Sample size `n`.
    pub fn n(&self) -> usize {
        self.r.len()
    }

    /// Ranks of the first margin.
    pub fn ranks_x(&self) -> &[f64] {
        &self.r
    }

    /// Ranks of the second margin.
    pub fn ranks_y(&self) -> &[f64] {
        &self.s
    }

    /// The tie report from the rank transformation.
    pub fn ties(&self) -> TieReport {
        self.ties
    }

    /// True if either margin contained ties.
    pub fn has_ties(&self) -> bool {
        self.ties.any()
    }

    /// Pseudo-observations `(R_i/(n+1), S_i/(n+1))`, all strictly in (0,1).
    pub fn pseudo_obs(&self) -> Vec<(f64, f64)> {
        let d = (self.n() + 1) as f64;
        self.r
            .iter()
            .zip(&self.s)
            .map(|(&r, &s)| (r / d, s / d))
            .collect()
    }

    /// Empirical copula `D_n(u, v)` (ranks scaled by `1/n`), for `(u, v)` in
    /// the closed unit square.
    pub fn dn(&self, u: f64, v: f64) -> Result<f64> {
        check_closed(u, v)?;
        let n = self.n() as f64;
        let count = joint_count(&self.r, &self.s, u * n, v * n);
        Ok(count as f64 / n)
    }

    /// Empirical copula `C_n(u, v)` (ranks scaled by `1/(n+1)`), for `(u, v)`
    /// in the closed unit square.
    pub fn cn(&self, u: f64, v: f64) -> Result<f64> {
        check_closed(u, v)?;
        let t = (self.n() + 1) as f64;
        let count = joint_count(&self.r, &self.s, u * t, v * t);
        Ok(count as f64 / self.n() as f64)
    }

    /// The estimator `Q_n(u, v) = w(u, v)[C_n(u, v) - uv]` at an interior
    /// point, evaluated as `(count - n u v) / (n sqrt(uv(1-u)(1-v)))` so that
    /// dyadic inputs stay exact.
    pub fn qn(&self, u: f64, v: f64) -> Result<f64> {
        check_interior(u, v)?;
        let t = (self.n() + 1) as f64;
        let count = joint_count(&self.r, &self.s, u * t, v * t);
        Ok(qn_from_count(count, self.n(), u, v))
    }

    /// Standardized estimator `L_n = sqrt(n) Q_n`.
    pub fn ln(&self, u: f64, v: f64) -> Result<f64> {
        check_interior(u, v)?;
        let t = (self.n() + 1) as f64;
        let count = joint_count(&self.r, &self.s, u * t, v * t);
        Ok(ln_from_count(count, self.n(), u, v))
    }

    /// The process `Z_n(u, v) = sqrt(n) [D_n(u, v) - uv]` on the closed unit
    /// square. (`L_n` is the weighted analogue built on `C_n`.)
    pub fn z_process(&self, u: f64, v: f64) -> Result<f64> {
        let dn = self.dn(u, v)?;
        Ok((self.n() as f64).sqrt() * (dn - u * v))
    }
}

/// Ranks a sample within each margin. Tied values are resolved per `policy`;
/// the returned pseudo-sample records how many tied groups each margin had.
pub fn rank_transform(sample: &Sample, policy: TiePolicy) -> Result<PseudoSample> {
    if sample.n() < 2 {
        return Err(Error::Parameter(
            "rank statistics need a sample of size at least 2".into(),
        ));
    }
    let mut rng = match policy {
        TiePolicy::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let xs: Vec<f64> = sample.xs().collect();
    let ys: Vec<f64> = sample.ys().collect();
    let (r, groups_x) = rank_margin(&xs, policy, &mut rng, "x")?;
    let (s, groups_y) = rank_margin(&ys, policy, &mut rng, "y")?;
    Ok(PseudoSample {
        r,
        s,
        ties: TieReport { groups_x, groups_y },
    })
}

fn rank_margin(
    values: &[f64],
    policy: TiePolicy,
    rng: &mut Option<ChaCha8Rng>,
    margin: &str,
) -> Result<(Vec<f64>, usize)> {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    // Sample construction guarantees finite values, so total order exists.
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![0.0; n];
    let mut groups = 0usize;
    let mut start = 0usize;
    while start < n {
        let mut end = start + 1;
        while end < n && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        if end - start > 1 {
            groups += 1;
            match policy {
                TiePolicy::Strict => {
                    return Err(Error::Ties(format!(
                        "{} values tied at {} in the {margin} margin \
                         (strict tie policy): use midrank or random",
                        end - start,
                        values[idx[start]]
                    )));
                }
                TiePolicy::Midrank => {
                    // Occupied positions are start+1 ..= end (1-based).
                    let avg = (start + 1 + end) as f64 / 2.0;
                    for &i in &idx[start..end] {
                        ranks[i] = avg;
                    }
                }
                TiePolicy::Random { .. } => {
                    let rng = rng.as_mut().expect("rng present for random policy");
                    let mut slots: Vec<usize> = (start + 1..=end).collect();
                    for i in (1..slots.len()).rev() {
                        let j = rng.gen_range(0..=i);
                        slots.swap(i, j);
                    }
                    for (&i, slot) in idx[start..end].iter().zip(slots) {
                        ranks[i] = slot as f64;
                    }
                }
            }
        } else {
            ranks[idx[start]] = (start + 1) as f64;
        }
        start = end;
    }
    Ok((ranks, groups))
}

/// Plug-in estimator of `q` on the raw scale: empirical cdfs `H_n`, `F_n`,
/// `G_n` substituted into `(H - FG)/sqrt(FG(1-F)(1-G))`.
///
/// Defined only where `0 < F_n(x) < 1` and `0 < G_n(y) < 1`; in particular
/// the sample maxima of either margin are outside the domain.
pub fn hat_q_general(sample: &Sample, x: f64, y: f64) -> Result<f64> {
    let n = sample.n() as f64;
    let f = sample.xs().filter(|&xi| xi <= x).count() as f64 / n;
    let g = sample.ys().filter(|&yi| yi <= y).count() as f64 / n;
    if !(f > 0.0 && f < 1.0 && g > 0.0 && g < 1.0) {
        return Err(Error::Domain(format!(
            "({x}, {y}) is outside the empirical domain: F_n={f}, G_n={g} \
             must lie strictly in (0, 1)"
        )));
    }
    let h = sample
        .pairs()
        .iter()
        .filter(|&&(xi, yi)| xi <= x && yi <= y)
        .count() as f64
        / n;
    Ok((h - f * g) / (f * g * (1.0 - f) * (1.0 - g)).sqrt())
}

/// The values `chi_i = hat_q(X_i, Y_i)` at each data point, with points
/// outside the empirical domain (e.g. the sample maxima) skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiValues {
    /// One entry per data point, `None` where the plug-in value is undefined.
    pub values: Vec<Option<f64>>,
    /// How many points were skipped.
    pub skipped: usize,
}

/// Evaluates [`hat_q_general`] at every data point, skipping (not erroring
/// on) points outside the empirical domain.
pub fn chi_values(sample: &Sample) -> ChiValues {
    let values: Vec<Option<f64>> = sample
        .pairs()
        .iter()
        .map(|&(x, y)| hat_q_general(sample, x, y).ok())
        .collect();
    let skipped = values.iter().filter(|v| v.is_none()).count();
    ChiValues { values, skipped }
}

/// Evaluates `Q_n` (or `L_n` when `standardized`) at every grid point.
///
/// Counting is O(n + g^2): each observation is bucketed against the sorted
/// thresholds once, and a 2-D prefix sum turns the bucket histogram into
/// rectangle counts. The result is bit-identical to calling
/// [`PseudoSample::qn`]/[`PseudoSample::ln`] pointwise.
pub fn surface_estimate(
    ps: &PseudoSample,
    grid: Grid,
    standardized: bool,
) -> Result<DependenceSurface> {
    let n = ps.n();
    let pts = grid.points();
    let thresholds = cn_thresholds(&pts, n);
    let counts = grid_joint_counts(&ps.r, &ps.s, &thresholds, &thresholds);
    let values: Vec<Vec<f64>> = counts
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, &count)| {
                    if standardized {
                        ln_from_count(count, n, pts[i], pts[j])
                    } else {
                        qn_from_count(count, n, pts[i], pts[j])
                    }
                })
                .collect()
        })
        .collect();
    let kind = if standardized {
        SurfaceKind::Ln
    } else {
        SurfaceKind::Qn
    };
    DependenceSurface::from_values(grid, kind, format!("sample:n={n}"), values)
}

/// Grid summary `(L_*, L^*, L^o)`: minimum, maximum, and maximum absolute
/// value of a surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    /// `L_* = min` over the grid.
    pub l_star: f64,
    /// `L^* = max` over the grid.
    pub l_upper: f64,
    /// `L^o = max |value|` over the grid.
    pub l_o: f64,
}

impl SummaryStats {
    /// Summarizes a surface.
    pub fn from_surface(surface: &DependenceSurface) -> Self {
        Self {
            l_star: surface.min(),
            l_upper: surface.max(),
            l_o: surface.max_abs(),
        }
    }
}

/// Summary statistics of a surface: `(L_*, L^*, L^o)`.
pub fn summary(surface: &DependenceSurface) -> SummaryStats {
    SummaryStats::from_surface(surface)
}

/// Splits `L_n(u, v)` into the linear rank statistic
/// `n^(-1/2) sum_i phi_u(R_i/(n+1)) phi_v(S_i/(n+1))` and the remainder
/// `L_n - linear`.
///
/// The scores are piecewise constant, so the linear part is evaluated
/// exactly from the four quadrant counts. The remainder reduces
/// algebraically to
///
/// ```text
/// remainder = A_u A_v (v K_u + u K_v - 2 n u v) / sqrt(n),
/// A_u = 1/sqrt(u(1-u)),   K_u = #{i : R_i <= u(n+1)},
/// ```
///
/// which depends on the data only through the marginal counts `K_u`, `K_v`
/// — fixed integers for tie-free ranks — so it is bit-identical across
/// datasets of the same size, and of order `1/sqrt(n)`. The identity
/// `L_n = linear + remainder` holds to floating tolerance 1e-12.
pub fn rank_decomposition(ps: &PseudoSample, u: f64, v: f64) -> Result<(f64, f64)> {
    check_interior(u, v)?;
    if ps.has_ties() {
        return Err(Error::Ties(
            "rank decomposition assumes distinct pseudo-observations; \
             the sample has tied ranks"
            .into(),
        ));
    }
    let n = ps.n();
    let nf = n as f64;
    let t = (n + 1) as f64;
    let (tu, tv) = (u * t, v * t);
    let k = joint_count(&ps.r, &ps.s, tu, tv);
    let k_u = ps.r.iter().filter(|&&r| r <= tu).count();
    let k_v = ps.s.iter().filter(|&&s| s <= tv).count();

    let alpha_u = ((1.0 - u) / u).sqrt();
    let beta_u = (u / (1.0 - u)).sqrt();
    let alpha_v = ((1.0 - v) / v).sqrt();
    let beta_v = (v / (1.0 - v)).sqrt();
    let (n_ll, n_lh, n_hl) = (k, k_u - k, k_v - k);
    let n_hh = (n + k) - k_u - k_v;
    let linear = (alpha_u * alpha_v * n_ll as f64 - alpha_u * beta_v * n_lh as f64
        - beta_u * alpha_v * n_hl as f64
        + beta_u * beta_v * n_hh as f64)
        / nf.sqrt();

    let a_u = 1.0 / (u * (1.0 - u)).sqrt();
    let a_v = 1.0 / (v * (1.0 - v)).sqrt();
    let remainder = a_u * a_v * (v * k_u as f64 + u * k_v as f64 - 2.0 * nf * u * v) / nf.sqrt();
    Ok((linear, remainder))
}

fn check_interior(u: f64, v: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "point ({u}, {v}) must lie strictly inside the unit square"
        )))
    }
}

fn check_closed(u: f64, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v) && !u.is_nan() && !v.is_nan() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "point ({u}, {v}) must lie in the closed unit square"
        )))
    }
}

/// Rank thresholds `u (n+1)` for the `C_n` scaling, one per grid coordinate.
pub(crate) fn cn_thresholds(points: &[f64], n: usize) -> Vec<f64> {
    let t = (n + 1) as f64;
    points.iter().map(|&u| u * t).collect()
}

/// `#{i : r_i <= tu and s_i <= tv}`.
pub(crate) fn joint_count(r: &[f64], s: &[f64], tu: f64, tv: f64) -> usize {
    r.iter()
        .zip(s)
        .filter(|&(&ri, &si)| ri <= tu && si <= tv)
        .count()
}

/// Joint counts `#{i : r_i <= tx[a], s_i <= ty[b]}` for every threshold
/// pair, via bucket histogram and 2-D prefix sums in O(n + |tx||ty|).
/// Thresholds must be ascending.
pub(crate) fn grid_joint_counts(
    r: &[f64],
    s: &[f64],
    tx: &[f64],
    ty: &[f64],
) -> Vec<Vec<usize>> {
    let (gx, gy) = (tx.len(), ty.len());
    let mut hist = vec![vec![0usize; gy + 1]; gx + 1];
    for (&ri, &si) in r.iter().zip(s) {
        // First threshold with ri <= t; gx means "beyond all thresholds".
        let bx = tx.partition_point(|&t| t < ri);
        let by = ty.partition_point(|&t| t < si);
        hist[bx][by] += 1;
    }
    let mut cum = vec![vec![0usize; gy]; gx];
    for i in 0..gx {
        for j in 0..gy {
            let mut c = hist[i][j];
            if i > 0 {
                c += cum[i - 1][j];
            }
            if j > 0 {
                c += cum[i][j - 1];
            }
            if i > 0 && j > 0 {
                c -= cum[i - 1][j - 1];
            }
            cum[i][j] = c;
        }
    }
    cum
}

/// `Q_n` from an exact joint count: `(count - n u v) / (n sqrt(uv(1-u)(1-v)))`.
pub(crate) fn qn_from_count(count: usize, n: usize, u: f64, v: f64) -> f64 {
    let nf = n as f64;
    let d = (u * v * (1.0 - u) * (1.0 - v)).sqrt();
    (count as f64 - nf * u * v) / (nf * d)
}

/// `L_n = sqrt(n) Q_n` from an exact joint count.
pub(crate) fn ln_from_count(count: usize, n: usize, u: f64, v: f64) -> f64 {
    qn_from_count(count, n, u, v) * (n as f64).sqrt()
}
