//! The local dependence function `q`, its weight and score functions, the
//! envelope bounds, and surface evaluation on regular grids.
//!
//! For a copula `C` and an interior point `(u, v)`,
//!
//! ```text
//! q_C(u, v) = w(u, v) [C(u, v) - uv],    w(u, v) = 1 / sqrt(uv(1-u)(1-v)),
//! ```
//!
//! a normalized, location-indexed measure of dependence with values in
//! `[-1, 1]`. For a general joint cdf `H` with marginals `F`, `G` the same
//! quantity is `(H - FG) / sqrt(FG(1-F)(1-G))`, which depends on the margins
//! only through `(F(x), G(y))`. The attainable envelope at each point is
//!
//! ```text
//! B_*(u,v) = w (max{u+v-1, 0} - uv)  <=  q_C(u,v)  <=  w (min{u,v} - uv) = B^*(u,v),
//! ```
//!
//! with `B_*(u, 1-u) = -1` and `B^*(u, u) = +1`. All evaluations here divide
//! by `sqrt(uv(1-u)(1-v))` directly (never multiplying by a rounded `w`), so
//! on dyadic grids such as the default 16-grid the envelope attains `-1` and
//! `+1` bit-exactly.

use crate::copula::CopulaModel;
use crate::error::{Error, Result};

/// A regular interior lattice `{(i/g, j/g) : i, j = 1..g-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    g: u32,
}

impl Grid {
    /// Builds a grid of resolution `g >= 2`.
    pub fn new(g: u32) -> Result<Self> {
        if g >= 2 {
            Ok(Self { g })
        } else {
            Err(Error::Parameter(format!(
                "grid resolution must be at least 2, got {g}"
            )))
        }
    }

    /// The resolution `g`.
    pub fn g(&self) -> u32 {
        self.g
    }

    /// Number of interior points per axis, `g - 1`.
    pub fn len(&self) -> usize {
        (self.g - 1) as usize
    }

    /// Whether the grid has no interior points (never true: `g >= 2`).
    pub fn is_empty(&self) -> bool {
        false
    }

    /// The interior coordinates `i/g`, `i = 1..g-1`.
    pub fn points(&self) -> Vec<f64> {
        (1..self.g).map(|i| f64::from(i) / f64::from(self.g)).collect()
    }
}

impl Default for Grid {
    /// The 16-grid used throughout: dyadic, so envelope identities and
    /// rank-count thresholds evaluate exactly.
    fn default() -> Self {
        Self { g: 16 }
    }
}

/// What a [`DependenceSurface`]'s values represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceKind {
    /// Exact `q_C` of an analytic model.
    QExact,
    /// Lower envelope `B_*`.
    BoundLower,
    /// Upper envelope `B^*`.
    BoundUpper,
    /// Empirical estimator `Q_n`.
    Qn,
    /// Standardized empirical process `L_n = sqrt(n) Q_n`.
    Ln,
}

impl SurfaceKind {
    /// The string used in the CSV `kind` column.
    pub fn label(&self) -> &'static str {
        match self {
            SurfaceKind::QExact => "q_exact",
            SurfaceKind::BoundLower => "bound_lower",
            SurfaceKind::BoundUpper => "bound_upper",
            SurfaceKind::Qn => "Q_n",
            SurfaceKind::Ln => "L_n",
        }
    }

    /// Parses a CSV `kind` label.
    pub fn from_label(label: &str) -> Result<Self> {
        Ok(match label {
            "q_exact" => SurfaceKind::QExact,
            "bound_lower" => SurfaceKind::BoundLower,
            "bound_upper" => SurfaceKind::BoundUpper,
            "Q_n" => SurfaceKind::Qn,
            "L_n" => SurfaceKind::Ln,
            other => {
                return Err(Error::Config(format!("unknown surface kind `{other}`")))
            }
        })
    }
}

/// A scalar field evaluated on a [`Grid`], row-major: `values()[i][j]`
/// corresponds to the point `((i+1)/g, (j+1)/g)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DependenceSurface {
    grid: Grid,
    kind: SurfaceKind,
    source: String,
    values: Vec<Vec<f64>>,
}

impl DependenceSurface {
    /// Assembles a surface from parts, checking the matrix shape.
    pub fn from_values(
        grid: Grid,
        kind: SurfaceKind,
        source: impl Into<String>,
        values: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let m = grid.len();
        if values.len() != m || values.iter().any(|row| row.len() != m) {
            return Err(Error::Config(format!(
                "surface matrix must be {m}x{m} for grid resolution {}",
                grid.g()
            )));
        }
        Ok(Self {
            grid,
            kind,
            source: source.into(),
            values,
        })
    }

    /// Exact `q_C` surface of a model (kind `q_exact`).
    pub fn from_model(model: &CopulaModel, grid: Grid) -> Result<Self> {
        model.validate()?;
        let values = fill(grid, |u, v| q_copula_unchecked(model, u, v));
        Ok(Self {
            grid,
            kind: SurfaceKind::QExact,
            source: model.label(),
            values,
        })
    }

    /// Lower envelope surface `B_*` (kind `bound_lower`).
    pub fn lower_bound(grid: Grid) -> Self {
        let values = fill(grid, |u, v| bounds_unchecked(u, v).0);
        Self {
            grid,
            kind: SurfaceKind::BoundLower,
            source: "bound_lower".into(),
            values,
        }
    }

    /// Upper envelope surface `B^*` (kind `bound_upper`).
    pub fn upper_bound(grid: Grid) -> Self {
        let values = fill(grid, |u, v| bounds_unchecked(u, v).1);
        Self {
            grid,
            kind: SurfaceKind::BoundUpper,
            source: "bound_upper".into(),
            values,
        }
    }

    /// The grid the surface is evaluated on.
    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// What the values represent.
    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    /// Model or sample descriptor the surface came from.
    pub fn source(&self) -> &str {
        &self.source
    }

    /// Row-major value matrix; `values()[i][j]` sits at `((i+1)/g, (j+1)/g)`.
    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Smallest value on the grid.
    pub fn min(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest value on the grid.
    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest absolute value on the grid.
    pub fn max_abs(&self) -> f64 {
        self.max().abs().max(self.min().abs())
    }

    /// Iterates `(u, v, value)` in row-major order.
    pub fn iter_points(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let pts = self.grid.points();
        self.values.iter().enumerate().flat_map(move |(i, row)| {
            let u = pts[i];
            let pts = pts.clone();
            row.iter()
                .enumerate()
                .map(move |(j, &val)| (u, pts[j], val))
                .collect::<Vec<_>>()
        })
    }
}

fn fill(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Vec<Vec<f64>> {
    let pts = grid.points();
    pts.iter()
        .map(|&u| pts.iter().map(|&v| f(u, v)).collect())
        .collect()
}

fn check_interior(u: f64, v: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "point ({u}, {v}) must lie strictly inside the unit square \
             (the weight diverges at the boundary)"
        )))
    }
}

/// The weight `w(u, v) = 1 / sqrt(uv(1-u)(1-v))`, at least 4 everywhere.
pub fn weight(u: f64, v: f64) -> Result<f64> {
    check_interior(u, v)?;
    Ok(1.0 / (u * v * (1.0 - u) * (1.0 - v)).sqrt())
}

/// Score function `phi_u(s)`: `-sqrt((1-u)/u)` for `s <= u`,
/// `+sqrt(u/(1-u))` for `s > u`. Mean 0 and variance 1 under the uniform
/// law, so `q(u, v) = E[phi_u(U) phi_v(V)]` is a correlation.
pub fn score_phi(u: f64, s: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!(
            "score function level u={u} must lie in (0, 1)"
        )));
    }
    if !(0.0..=1.0).contains(&s) || s.is_nan() {
        return Err(Error::Domain(format!(
            "score function argument s={s} must lie in [0, 1]"
        )));
    }
    Ok(if s <= u {
        -((1.0 - u) / u).sqrt()
    } else {
        (u / (1.0 - u)).sqrt()
    })
}

/// Envelope `(B_*(u,v), B^*(u,v))`: the attainable range of `q_C(u, v)` over
/// all copulas, from the Fréchet-Hoeffding bounds.
///
/// `B_*(u, 1-u) = -1` and `B^*(u, u) = +1`; on dyadic grid points these hold
/// to exact floating-point equality.
pub fn bounds(u: f64, v: f64) -> Result<(f64, f64)> {
    check_interior(u, v)?;
    Ok(bounds_unchecked(u, v))
}

fn bounds_unchecked(u: f64, v: f64) -> (f64, f64) {
    let denom = (u * v * (1.0 - u) * (1.0 - v)).sqrt();
    let lower = ((u + v - 1.0).max(0.0) - u * v) / denom;
    let upper = (u.min(v) - u * v) / denom;
    (lower, upper)
}

/// `q_C(u, v) = [C(u, v) - uv] / sqrt(uv(1-u)(1-v))` for an interior point.
///
/// `QuasiCopulaCc` with `c != 0` is accepted: `q` is a well-defined function
/// of any boundary-grounded surface, copula or not.
pub fn q_copula(model: &CopulaModel, u: f64, v: f64) -> Result<f64> {
    model.validate()?;
    check_interior(u, v)?;
    Ok(q_copula_unchecked(model, u, v))
}

fn q_copula_unchecked(model: &CopulaModel, u: f64, v: f64) -> f64 {
    let c = model.cdf_unchecked(u, v);
    (c - u * v) / (u * v * (1.0 - u) * (1.0 - v)).sqrt()
}

/// `q` as the correlation `E[phi_u(U) phi_v(V)]`, evaluated exactly from the
/// four quadrant probabilities `{C, u-C, v-C, 1-u-v+C}` (the integrand is
/// piecewise constant on quadrants, so the expectation is a finite sum).
///
/// Agrees with [`q_copula`] to within 1e-12; kept as an independent route
/// for cross-validation.
pub fn q_via_correlation(model: &CopulaModel, u: f64, v: f64) -> Result<f64> {
    model.validate()?;
    if !model.is_genuine_copula() {
        return Err(Error::Domain(format!(
            "correlation route requires a genuine copula, got {}",
            model.label()
        )));
    }
    check_interior(u, v)?;
    let c = model.cdf_unchecked(u, v);
    let (p_ll, p_lh, p_hl, p_hh) = (c, u - c, v - c, 1.0 - u - v + c);
    let phi_u_lo = -((1.0 - u) / u).sqrt();
    let phi_u_hi = (u / (1.0 - u)).sqrt();
    let phi_v_lo = -((1.0 - v) / v).sqrt();
    let phi_v_hi = (v / (1.0 - v)).sqrt();
    Ok(phi_u_lo * phi_v_lo * p_ll
        + phi_u_lo * phi_v_hi * p_lh
        + phi_u_hi * phi_v_lo * p_hl
        + phi_u_hi * phi_v_hi * p_hh)
}

/// A general bivariate distribution given by a joint cdf and its marginals,
/// for evaluating `q` off the copula scale.
pub struct GeneralBivariateCdf {
    joint: Box<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    marginal_x: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    marginal_y: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl GeneralBivariateCdf {
    /// Wraps a joint cdf `H` and marginal cdfs `F`, `G`.
    pub fn new(
        joint: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        marginal_x: impl Fn(f64) -> f64 + Send + Sync + 'static,
        marginal_y: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            joint: Box::new(joint),
            marginal_x: Box::new(marginal_x),
            marginal_y: Box::new(marginal_y),
        }
    }

    /// `H(x, y)`.
    pub fn joint(&self, x: f64, y: f64) -> f64 {
        (self.joint)(x, y)
    }

    /// `F(x)`.
    pub fn marginal_x(&self, x: f64) -> f64 {
        (self.marginal_x)(x)
    }

    /// `G(y)`.
    pub fn marginal_y(&self, y: f64) -> f64 {
        (self.marginal_y)(y)
    }
}

/// `q(x, y) = [H(x,y) - F(x)G(y)] / sqrt(F(x)G(y)(1-F(x))(1-G(y)))` at a
/// point of the domain `{(x, y) : 0 < F(x) < 1, 0 < G(y) < 1}`.
///
/// Margin-free: when `H(x,y) = C(F(x), G(y))` this equals `q_C(F(x), G(y))`.
pub fn q_general(cdf: &GeneralBivariateCdf, x: f64, y: f64) -> Result<f64> {
    let f = cdf.marginal_x(x);
    let g = cdf.marginal_y(y);
    if !(f > 0.0 && f < 1.0 && g > 0.0 && g < 1.0) {
        return Err(Error::Domain(format!(
            "point ({x}, {y}) lies outside the domain: marginal values \
             F(x)={f}, G(y)={g} must lie strictly in (0, 1)"
        )));
    }
    let h = cdf.joint(x, y);
    Ok((h - f * g) / (f * g * (1.0 - f) * (1.0 - g)).sqrt())
}
