//! Python bindings for the `qdep` library: copula models, the dependence
//! function `q` and its envelope, rank-based estimators, and the Monte Carlo
//! permutation tests, importable as the `qdep` extension module.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use qdep::depfn::{bounds as q_bounds, q_copula, q_via_correlation};
use qdep::empirical::{rank_transform, surface_estimate};
use qdep::mc::{classical_stats, run_test};
use qdep::{CopulaModel, DependenceSurface, Grid, Sample, SummaryStats, TestKind, TiePolicy};

fn pyerr(e: qdep::Error) -> PyErr {
    match &e {
        qdep::Error::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_grid(g: u32) -> PyResult<Grid> {
    Grid::new(g).map_err(pyerr)
}

fn parse_ties(ties: &str, seed: u64) -> PyResult<TiePolicy> {
    match ties {
        "strict" => Ok(TiePolicy::Strict),
        "midrank" => Ok(TiePolicy::Midrank),
        "random" => Ok(TiePolicy::Random { seed }),
        other => Err(PyValueError::new_err(format!(
            "unknown tie policy `{other}`; use strict, midrank, or random"
        ))),
    }
}

fn surface_rows(surface: &DependenceSurface) -> Vec<(f64, f64, f64)> {
    surface.iter_points().collect()
}

/// A bivariate copula model, built from a spec string such as
/// `"independence"`, `"frechet-mixture:0.5"`, or `"marshall-olkin:0.5,0.75"`.
#[pyclass(frozen)]
struct Model {
    inner: CopulaModel,
}

#[pymethods]
impl Model {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Ok(Self {
            inner: CopulaModel::parse(spec).map_err(pyerr)?,
        })
    }

    /// Canonical spec string for this model.
    fn label(&self) -> String {
        self.inner.label()
    }

    /// Cdf value `C(u, v)` on the closed unit square.
    fn cdf(&self, u: f64, v: f64) -> PyResult<f64> {
        self.inner.cdf(u, v).map_err(pyerr)
    }

    /// Mass the model assigns to the rectangle `[u1, u2] x [v1, v2]`
    /// (negative for the non-2-increasing `quasi-cc` family).
    fn rectangle_volume(&self, u1: f64, u2: f64, v1: f64, v2: f64) -> PyResult<f64> {
        self.inner.rectangle_volume(u1, u2, v1, v2).map_err(pyerr)
    }

    /// Dependence function `q(u, v)` at an interior point.
    fn q(&self, u: f64, v: f64) -> PyResult<f64> {
        q_copula(&self.inner, u, v).map_err(pyerr)
    }

    /// `q(u, v)` through the score-function (correlation) route; agrees with
    /// `q` to floating-point accuracy for genuine copulas.
    fn q_via_correlation(&self, u: f64, v: f64) -> PyResult<f64> {
        q_via_correlation(&self.inner, u, v).map_err(pyerr)
    }

    /// Exact `q` on the interior grid points `i/g`, as `(u, v, q)` rows in
    /// row-major order.
    fn q_surface(&self, g: u32) -> PyResult<Vec<(f64, f64, f64)>> {
        let surface = DependenceSurface::from_model(&self.inner, parse_grid(g)?).map_err(pyerr)?;
        Ok(surface_rows(&surface))
    }

    /// Draws `n` pairs by conditional inversion; deterministic in `seed`.
    fn sample(&self, n: usize, seed: u64) -> PyResult<Vec<(f64, f64)>> {
        Ok(self.inner.sample(n, seed).map_err(pyerr)?.pairs().to_vec())
    }

    fn __repr__(&self) -> String {
        format!("Model(\"{}\")", self.inner.label())
    }
}

/// Rank-transformed data: the inputs to every estimator and test.
#[pyclass(frozen)]
struct RankData {
    inner: qdep::PseudoSample,
}

#[pymethods]
impl RankData {
    /// Ranks a list of `(x, y)` pairs. `ties` is `"strict"` (reject ties),
    /// `"midrank"`, or `"random"` (break ties by `seed`).
    #[new]
    #[pyo3(signature = (pairs, ties = "midrank", seed = 0))]
    fn new(pairs: Vec<(f64, f64)>, ties: &str, seed: u64) -> PyResult<Self> {
        let sample = Sample::new(pairs).map_err(pyerr)?;
        let ps = rank_transform(&sample, parse_ties(ties, seed)?).map_err(pyerr)?;
        Ok(Self { inner: ps })
    }

    /// Sample size.
    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    /// True if either margin contained tied observations.
    #[getter]
    fn has_ties(&self) -> bool {
        self.inner.has_ties()
    }

    /// Pseudo-observations `(R_i/(n+1), S_i/(n+1))`.
    fn pseudo_obs(&self) -> Vec<(f64, f64)> {
        self.inner.pseudo_obs()
    }

    /// Empirical joint cdf `D_n(u, v)`.
    fn dn(&self, u: f64, v: f64) -> PyResult<f64> {
        self.inner.dn(u, v).map_err(pyerr)
    }

    /// Empirical copula `C_n(u, v)`.
    fn cn(&self, u: f64, v: f64) -> PyResult<f64> {
        self.inner.cn(u, v).map_err(pyerr)
    }

    /// Estimated dependence function `Q_n(u, v)`.
    fn qn(&self, u: f64, v: f64) -> PyResult<f64> {
        self.inner.qn(u, v).map_err(pyerr)
    }

    /// Standardized local correlation `L_n(u, v) = sqrt(n) Q_n(u, v)`.
    fn ln(&self, u: f64, v: f64) -> PyResult<f64> {
        self.inner.ln(u, v).map_err(pyerr)
    }

    /// `L_n` (or `Q_n` with `standardized=False`) on the interior grid
    /// points `i/g`, as `(u, v, value)` rows in row-major order.
    #[pyo3(signature = (g = 16, standardized = true))]
    fn surface(&self, g: u32, standardized: bool) -> PyResult<Vec<(f64, f64, f64)>> {
        let surface =
            surface_estimate(&self.inner, parse_grid(g)?, standardized).map_err(pyerr)?;
        Ok(surface_rows(&surface))
    }

    /// Global statistics of the `L_n` surface as the tuple
    /// `(L_star, L_upper, L_o)` = (grid min, grid max, grid max-abs).
    #[pyo3(signature = (g = 16))]
    fn summary(&self, g: u32) -> PyResult<(f64, f64, f64)> {
        let surface = surface_estimate(&self.inner, parse_grid(g)?, true).map_err(pyerr)?;
        let stats = SummaryStats::from_surface(&surface);
        Ok((stats.l_star, stats.l_upper, stats.l_o))
    }

    fn __repr__(&self) -> String {
        format!("RankData(n={})", self.inner.n())
    }
}

/// Result of a Monte Carlo permutation test.
#[pyclass(frozen)]
struct TestOutcome {
    /// Test name, e.g. `"global_nqd_Lupper"`.
    #[pyo3(get)]
    test: String,
    /// Label of the simulated null statistic.
    #[pyo3(get)]
    statistic: String,
    /// Observed value of the statistic on the data.
    #[pyo3(get)]
    observed: f64,
    /// Monte Carlo p-value.
    #[pyo3(get)]
    p_value: f64,
    /// Number of permutation replicates.
    #[pyo3(get)]
    b: usize,
    /// Master seed of the replicate stream.
    #[pyo3(get)]
    seed: u64,
    /// Sample size.
    #[pyo3(get)]
    n: usize,
    /// Grid resolution used by the global statistics.
    #[pyo3(get)]
    grid: u32,
}

#[pymethods]
impl TestOutcome {
    fn __repr__(&self) -> String {
        format!(
            "TestOutcome(test=\"{}\", observed={}, p_value={})",
            self.test, self.observed, self.p_value
        )
    }
}

/// A classical dependence coefficient with its permutation p-value.
#[pyclass(frozen)]
struct Coefficient {
    /// `"pearson"`, `"spearman"`, `"kendall"`, or `"blomqvist"`.
    #[pyo3(get)]
    name: String,
    /// Point estimate on the data.
    #[pyo3(get)]
    estimate: f64,
    /// Two-sided permutation p-value.
    #[pyo3(get)]
    p_value: f64,
}

#[pymethods]
impl Coefficient {
    fn __repr__(&self) -> String {
        format!(
            "Coefficient(name=\"{}\", estimate={}, p_value={})",
            self.name, self.estimate, self.p_value
        )
    }
}

/// Envelope `(B_star, B_upper)` of the dependence function at `(u, v)`:
/// every copula's `q` lies between the two.
#[pyfunction]
#[pyo3(name = "bounds")]
fn bounds_py(u: f64, v: f64) -> PyResult<(f64, f64)> {
    q_bounds(u, v).map_err(pyerr)
}

/// Simulated two-sided critical value of `|L_n(u, v)|` under independence.
#[pyfunction]
#[pyo3(signature = (n, u, v, alpha, b = 10_000, seed = 0))]
fn critical_value(n: usize, u: f64, v: f64, alpha: f64, b: usize, seed: u64) -> PyResult<f64> {
    qdep::mc::critical_value(n, u, v, alpha, b, seed).map_err(pyerr)
}

/// Signed type-7 quantiles of the null of `L_n(u, v)` under independence,
/// one per level in `alphas`.
#[pyfunction]
#[pyo3(signature = (n, u, v, alphas, b = 10_000, seed = 0))]
fn signed_quantiles(
    n: usize,
    u: f64,
    v: f64,
    alphas: Vec<f64>,
    b: usize,
    seed: u64,
) -> PyResult<Vec<f64>> {
    qdep::mc::signed_quantiles(n, u, v, &alphas, b, seed).map_err(pyerr)
}

/// Runs a Monte Carlo permutation test on `(x, y)` pairs. `kind` is
/// `"pointwise"` (requires `point`), `"independence"`, `"pqd"`, or `"nqd"`.
#[pyfunction]
#[pyo3(name = "run_test")]
#[pyo3(signature = (kind, pairs, point = None, g = 16, b = 10_000, seed = 0, ties = "midrank"))]
#[allow(clippy::too_many_arguments)]
fn run_test_py(
    kind: &str,
    pairs: Vec<(f64, f64)>,
    point: Option<(f64, f64)>,
    g: u32,
    b: usize,
    seed: u64,
    ties: &str,
) -> PyResult<TestOutcome> {
    let kind = match kind {
        "pointwise" => {
            let (u, v) = point.ok_or_else(|| {
                PyValueError::new_err("the pointwise test needs point=(u, v)")
            })?;
            TestKind::PointwiseIndependence { u, v }
        }
        "independence" => TestKind::GlobalIndependenceLo,
        "pqd" => TestKind::GlobalPqdLstar,
        "nqd" => TestKind::GlobalNqdLupper,
        other => Err(PyValueError::new_err(format!(
            "unknown test kind `{other}`; use pointwise, independence, pqd, or nqd"
        )))?,
    };
    let sample = Sample::new(pairs).map_err(pyerr)?;
    let report = run_test(
        kind,
        &sample,
        parse_grid(g)?,
        b,
        seed,
        parse_ties(ties, seed)?,
    )
    .map_err(pyerr)?;
    Ok(TestOutcome {
        test: report.kind.label().to_string(),
        statistic: report.statistic,
        observed: report.observed,
        p_value: report.p_value,
        b: report.b,
        seed: report.master_seed,
        n: report.n,
        grid: report.grid,
    })
}

/// Pearson, Spearman, Kendall, and Blomqvist coefficients on `(x, y)` pairs,
/// each with a two-sided permutation p-value over one shared stream.
#[pyfunction]
#[pyo3(name = "classical_stats")]
#[pyo3(signature = (pairs, b = 10_000, seed = 0))]
fn classical_stats_py(pairs: Vec<(f64, f64)>, b: usize, seed: u64) -> PyResult<Vec<Coefficient>> {
    let sample = Sample::new(pairs).map_err(pyerr)?;
    Ok(classical_stats(&sample, b, seed)
        .map_err(pyerr)?
        .into_iter()
        .map(|s| Coefficient {
            name: s.name.to_string(),
            estimate: s.estimate,
            p_value: s.p_value,
        })
        .collect())
}

#[pymodule(name = "qdep")]
fn qdep_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add_class::<RankData>()?;
    m.add_class::<TestOutcome>()?;
    m.add_class::<Coefficient>()?;
    m.add_function(wrap_pyfunction!(bounds_py, m)?)?;
    m.add_function(wrap_pyfunction!(critical_value, m)?)?;
    m.add_function(wrap_pyfunction!(signed_quantiles, m)?)?;
    m.add_function(wrap_pyfunction!(run_test_py, m)?)?;
    m.add_function(wrap_pyfunction!(classical_stats_py, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
