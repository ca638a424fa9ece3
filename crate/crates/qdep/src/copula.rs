//! Closed-form copula families, their conditional distributions, samplers,
//! and rectangle volumes.
//!
//! The families provided here are the ones used throughout the crate's
//! surface plots, estimator calibration, and counterexample checks:
//!
//! - `Independence`: `C(u,v) = uv`.
//! - `FrechetUpper` (`M`): `min{u, v}`, the comonotone upper bound.
//! - `FrechetLower` (`W`): `max{u + v - 1, 0}`, the countermonotone lower bound.
//! - `FrechetMixture{theta}`: `(1-theta) uv + theta min{u, v}`, a family that
//!   is linearly ordered in concordance as `theta` grows.
//! - `MarshallOlkin{a, b}`: `min{u^(1-a) v, u v^(1-b)}`, singular mass on the
//!   curve `u^a = v^b`.
//! - `MaiScherer{a, b}`: `min{u^a, v^b} min{u^(1-a), v^(1-b)}`, an
//!   extreme-value family with a singular part.
//! - `QuasiCopulaCc{c}`: `uv + c sqrt(uv(1-u)(1-v))`. Satisfies the copula
//!   boundary conditions but for `c != 0` is *not* 2-increasing, so it is not
//!   a distribution; it exists as a counterexample and cannot be sampled.
//!
//! Sampling uses conditional inversion: draw `U` uniform, then invert the
//! conditional cdf `v -> dC(u,v)/du`. Families whose inverse is known in
//! closed form use it exactly (notably `FrechetUpper` returns `v = u`
//! bit-for-bit); Marshall-Olkin and Mai-Scherer are inverted by bisection to
//! absolute tolerance 1e-12 with the left-continuous generalized inverse, so
//! jump points of singular components receive their correct mass.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Absolute tolerance for the bisection inversion of conditional cdfs.
const BISECTION_TOL: f64 = 1e-12;

/// A bivariate sample of finite real pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pairs: Vec<(f64, f64)>,
}

impl Sample {
    /// Builds a sample, rejecting empty input and non-finite coordinates.
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Domain("sample must contain at least one pair".into()));
        }
        for (i, (x, y)) in pairs.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::Domain(format!(
                    "non-finite value in pair {} of the sample: ({x}, {y})",
                    i + 1
                )));
            }
        }
        Ok(Self { pairs })
    }

    /// Number of pairs.
    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    /// The pairs in input order.
    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    /// Iterator over the first coordinates.
    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        self.pairs.iter().map(|&(x, _)| x)
    }

    /// Iterator over the second coordinates.
    pub fn ys(&self) -> impl Iterator<Item = f64> + '_ {
        self.pairs.iter().map(|&(_, y)| y)
    }
}

/// A parametric copula family (or, for `QuasiCopulaCc`, a quasi-copula).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CopulaModel {
    /// Product copula `uv`.
    Independence,
    /// Upper Fréchet-Hoeffding bound `M(u,v) = min{u, v}`.
    FrechetUpper,
    /// Lower Fréchet-Hoeffding bound `W(u,v) = max{u + v - 1, 0}`.
    FrechetLower,
    /// Mixture `(1-theta) uv + theta M(u,v)` with `theta` in `[0, 1]`.
    FrechetMixture { theta: f64 },
    /// Marshall-Olkin copula `min{u^(1-a) v, u v^(1-b)}`, `a, b` in `(0, 1)`.
    MarshallOlkin { a: f64, b: f64 },
    /// Mai-Scherer copula `min{u^a, v^b} min{u^(1-a), v^(1-b)}`,
    /// `a, b` in `(0, 1]`.
    MaiScherer { a: f64, b: f64 },
    /// `uv + c sqrt(uv(1-u)(1-v))` with `c` in `[-1, 1]`; not 2-increasing
    /// unless `c = 0`.
    QuasiCopulaCc { c: f64 },
}

impl CopulaModel {
    /// Checks the parameter ranges declared for each family.
    pub fn validate(&self) -> Result<()> {
        match *self {
            CopulaModel::Independence | CopulaModel::FrechetUpper | CopulaModel::FrechetLower => {
                Ok(())
            }
            CopulaModel::FrechetMixture { theta } => {
                if theta.is_finite() && (0.0..=1.0).contains(&theta) {
                    Ok(())
                } else {
                    Err(Error::Parameter(format!(
                        "frechet-mixture theta must lie in [0, 1], got {theta}"
                    )))
                }
            }
            CopulaModel::MarshallOlkin { a, b } => {
                if a.is_finite() && b.is_finite() && 0.0 < a && a < 1.0 && 0.0 < b && b < 1.0 {
                    Ok(())
                } else {
                    Err(Error::Parameter(format!(
                        "marshall-olkin parameters must lie in (0, 1), got a={a}, b={b}"
                    )))
                }
            }
            CopulaModel::MaiScherer { a, b } => {
                if a.is_finite() && b.is_finite() && 0.0 < a && a <= 1.0 && 0.0 < b && b <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::Parameter(format!(
                        "mai-scherer parameters must lie in (0, 1], got a={a}, b={b}"
                    )))
                }
            }
            CopulaModel::QuasiCopulaCc { c } => {
                if c.is_finite() && (-1.0..=1.0).contains(&c) {
                    Ok(())
                } else {
                    Err(Error::Parameter(format!(
                        "quasi-cc constant must lie in [-1, 1], got {c}"
                    )))
                }
            }
        }
    }

    /// True for every variant that is a genuine copula (2-increasing);
    /// false only for `QuasiCopulaCc` with `c != 0`.
    pub fn is_genuine_copula(&self) -> bool {
        !matches!(*self, CopulaModel::QuasiCopulaCc { c } if c != 0.0)
    }

    /// Canonical spec string, e.g. `marshall-olkin:0.5,0.75`.
    pub fn label(&self) -> String {
        match *self {
            CopulaModel::Independence => "independence".into(),
            CopulaModel::FrechetUpper => "frechet-upper".into(),
            CopulaModel::FrechetLower => "frechet-lower".into(),
            CopulaModel::FrechetMixture { theta } => format!("frechet-mixture:{theta}"),
            CopulaModel::MarshallOlkin { a, b } => format!("marshall-olkin:{a},{b}"),
            CopulaModel::MaiScherer { a, b } => format!("mai-scherer:{a},{b}"),
            CopulaModel::QuasiCopulaCc { c } => format!("quasi-cc:{c}"),
        }
    }

    /// Parses a model spec string of the form `name` or `name:params`.
    ///
    /// Recognized names (with shorthand aliases in parentheses):
    /// `independence` (`indep`), `frechet-upper` (`m`), `frechet-lower` (`w`),
    /// `frechet-mixture:theta` (`mixture`), `marshall-olkin:a,b` (`mo`),
    /// `mai-scherer:a,b` (`ms`), `quasi-cc:c` (`quasi`).
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = |message: &str| Error::ModelSpec {
            spec: spec.to_string(),
            message: message.to_string(),
        };
        let (name, params) = match spec.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p.trim())),
            None => (spec.trim(), None),
        };
        let parse_params = |p: Option<&str>, k: usize| -> Result<Vec<f64>> {
            let p = p.ok_or_else(|| bad(&format!("expected {k} numeric parameter(s)")))?;
            let vals: Vec<f64> = p
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| bad(&format!("bad numeric parameter: {e}")))?;
            if vals.len() != k {
                return Err(bad(&format!("expected {k} parameter(s), got {}", vals.len())));
            }
            Ok(vals)
        };
        let model = match name {
            "independence" | "indep" => {
                if params.is_some() {
                    return Err(bad("independence takes no parameters"));
                }
                CopulaModel::Independence
            }
            "frechet-upper" | "m" => {
                if params.is_some() {
                    return Err(bad("frechet-upper takes no parameters"));
                }
                CopulaModel::FrechetUpper
            }
            "frechet-lower" | "w" => {
                if params.is_some() {
                    return Err(bad("frechet-lower takes no parameters"));
                }
                CopulaModel::FrechetLower
            }
            "frechet-mixture" | "mixture" => {
                let p = parse_params(params, 1)?;
                CopulaModel::FrechetMixture { theta: p[0] }
            }
            "marshall-olkin" | "mo" => {
                let p = parse_params(params, 2)?;
                CopulaModel::MarshallOlkin { a: p[0], b: p[1] }
            }
            "mai-scherer" | "ms" => {
                let p = parse_params(params, 2)?;
                CopulaModel::MaiScherer { a: p[0], b: p[1] }
            }
            "quasi-cc" | "quasi" => {
                let p = parse_params(params, 1)?;
                CopulaModel::QuasiCopulaCc { c: p[0] }
            }
            other => {
                return Err(bad(&format!(
                    "unknown model `{other}` (expected independence, frechet-upper, \
                     frechet-lower, frechet-mixture, marshall-olkin, mai-scherer, or quasi-cc)"
                )))
            }
        };
        model.validate()?;
        Ok(model)
    }

    /// Evaluates `C(u, v)` for `(u, v)` in the closed unit square.
    ///
    /// Boundary values are returned exactly: `C(u, 0) = C(0, v) = 0`,
    /// `C(u, 1) = u`, `C(1, v) = v`.
    pub fn cdf(&self, u: f64, v: f64) -> Result<f64> {
        self.validate()?;
        if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) || u.is_nan() || v.is_nan() {
            return Err(Error::Domain(format!(
                "cdf evaluation point ({u}, {v}) outside the closed unit square"
            )));
        }
        Ok(self.cdf_unchecked(u, v))
    }

    /// `cdf` without validation; callers guarantee parameters and the point.
    pub(crate) fn cdf_unchecked(&self, u: f64, v: f64) -> f64 {
        // Exact boundary handling keeps groundedness and uniform marginals
        // free of floating-point drift from the interior formulas.
        if u == 0.0 || v == 0.0 {
            return 0.0;
        }
        if u == 1.0 {
            return v;
        }
        if v == 1.0 {
            return u;
        }
        match *self {
            CopulaModel::Independence => u * v,
            CopulaModel::FrechetUpper => u.min(v),
            CopulaModel::FrechetLower => (u + v - 1.0).max(0.0),
            CopulaModel::FrechetMixture { theta } => (1.0 - theta) * (u * v) + theta * u.min(v),
            CopulaModel::MarshallOlkin { a, b } => (u.powf(1.0 - a) * v).min(u * v.powf(1.0 - b)),
            CopulaModel::MaiScherer { a, b } => {
                u.powf(a).min(v.powf(b)) * u.powf(1.0 - a).min(v.powf(1.0 - b))
            }
            CopulaModel::QuasiCopulaCc { c } => {
                u * v + c * (u * v * (1.0 - u) * (1.0 - v)).sqrt()
            }
        }
    }

    /// The conditional cdf `v -> dC(u, v)/du` for interior `(u, v)`.
    ///
    /// Where the partial derivative is ambiguous (along min-switching curves)
    /// a fixed one-sided convention is used: the derivative from the right in
    /// `u`, except that the step of the comonotone component is closed at
    /// `v = u` (value 1) so that `v -> dC(u, v)/du` stays a distribution
    /// function there. Jumps appear exactly where the model has a singular
    /// part. For `QuasiCopulaCc` with `c != 0` this is the formal partial
    /// derivative, which is not a conditional distribution.
    pub fn conditional_cdf(&self, u: f64, v: f64) -> Result<f64> {
        self.validate()?;
        if !(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0) {
            return Err(Error::Domain(format!(
                "conditional cdf point ({u}, {v}) outside the open unit square"
            )));
        }
        Ok(self.conditional_unchecked(u, v))
    }

    fn conditional_unchecked(&self, u: f64, v: f64) -> f64 {
        match *self {
            CopulaModel::Independence => v,
            CopulaModel::FrechetUpper => {
                if v >= u {
                    1.0
                } else {
                    0.0
                }
            }
            CopulaModel::FrechetLower => {
                if v >= 1.0 - u {
                    1.0
                } else {
                    0.0
                }
            }
            CopulaModel::FrechetMixture { theta } => {
                let step = if v >= u { 1.0 } else { 0.0 };
                (1.0 - theta) * v + theta * step
            }
            CopulaModel::MarshallOlkin { a, b } => {
                // C = u^(1-a) v  on u^a >= v^b,  C = u v^(1-b)  otherwise.
                if u.powf(a) >= v.powf(b) {
                    (1.0 - a) * u.powf(-a) * v
                } else {
                    v.powf(1.0 - b)
                }
            }
            CopulaModel::MaiScherer { a, b } => {
                // Product rule on min{u^a, v^b} * min{u^(1-a), v^(1-b)}; each
                // min differentiates to its u-branch only while that branch is
                // strictly the smaller one (right derivative at switch points).
                let t = u.powf(a).min(v.powf(b));
                let s = u.powf(1.0 - a).min(v.powf(1.0 - b));
                let dt = if u.powf(a) < v.powf(b) {
                    a * u.powf(a - 1.0)
                } else {
                    0.0
                };
                let ds = if u.powf(1.0 - a) < v.powf(1.0 - b) {
                    (1.0 - a) * u.powf(-a)
                } else {
                    0.0
                };
                dt * s + t * ds
            }
            CopulaModel::QuasiCopulaCc { c } => {
                v + c * (1.0 - 2.0 * u) * (v * (1.0 - v)).sqrt()
                    / (2.0 * (u * (1.0 - u)).sqrt())
            }
        }
    }

    /// Draws `n` i.i.d. pairs with cdf `C`, deterministically for a fixed
    /// `seed` (ChaCha8 keyed by `seed`).
    ///
    /// `U` is drawn uniform on (0,1) and `V` solves the conditional cdf at
    /// `U`; families with an exact inverse use it in closed form (comonotone
    /// draws satisfy `v = u` bit-for-bit), while Marshall-Olkin and
    /// Mai-Scherer fall back to bisection. `QuasiCopulaCc` with `c != 0` is
    /// rejected: it is not a distribution.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Sample> {
        self.validate()?;
        self.reject_non_copula("sample")?;
        if n == 0 {
            return Err(Error::Parameter("sample size must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairs = (0..n).map(|_| self.draw_pair(&mut rng)).collect();
        Ok(Sample { pairs })
    }

    /// Like [`CopulaModel::sample`] but inverting every conditional cdf by
    /// bisection, including the families that have closed-form inverses.
    /// This is the reference path used to cross-validate the closed forms.
    pub fn sample_via_bisection(&self, n: usize, seed: u64) -> Result<Sample> {
        self.validate()?;
        self.reject_non_copula("sample")?;
        if n == 0 {
            return Err(Error::Parameter("sample size must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairs = (0..n)
            .map(|_| {
                let u = uniform_open01(&mut rng);
                let t = uniform_open01(&mut rng);
                (u, self.invert_conditional(u, t))
            })
            .collect();
        Ok(Sample { pairs })
    }

    fn reject_non_copula(&self, op: &str) -> Result<()> {
        if self.is_genuine_copula() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "cannot {op} from {}: not 2-increasing, hence not a distribution",
                self.label()
            )))
        }
    }

    /// Draws one pair. Every family consumes exactly two uniforms — `u` and
    /// the conditional level `t` — even where the inverse ignores `t`, so
    /// this path and [`CopulaModel::sample_via_bisection`] stay on a common
    /// generator stream and can be cross-validated draw by draw.
    fn draw_pair(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        let u = uniform_open01(rng);
        let t = uniform_open01(rng);
        let v = match *self {
            CopulaModel::Independence | CopulaModel::QuasiCopulaCc { .. } => t,
            // The conditional cdf is a unit step at v = u (resp. v = 1-u),
            // so its generalized inverse is constant in t.
            CopulaModel::FrechetUpper => u,
            CopulaModel::FrechetLower => 1.0 - u,
            CopulaModel::FrechetMixture { theta } => {
                if theta == 1.0 {
                    u
                } else if t <= (1.0 - theta) * u {
                    // Below the atom: the continuous (independent) part.
                    t / (1.0 - theta)
                } else if t <= (1.0 - theta) * u + theta {
                    // The conditional cdf jumps by theta at v = u.
                    u
                } else {
                    (t - theta) / (1.0 - theta)
                }
            }
            CopulaModel::MarshallOlkin { .. } | CopulaModel::MaiScherer { .. } => {
                self.invert_conditional(u, t)
            }
        };
        (u, v)
    }

    /// Left-continuous generalized inverse of the conditional cdf:
    /// the smallest `v` with `dC(u,v)/du >= t`, found by bisection to
    /// absolute tolerance 1e-12. Returning the upper bracket endpoint makes
    /// jump locations (singular components) land on their atom.
    fn invert_conditional(&self, u: f64, t: f64) -> f64 {
        let mut lo = 0.0_f64;
        let mut hi = 1.0_f64;
        while hi - lo > BISECTION_TOL {
            let mid = 0.5 * (lo + hi);
            if self.conditional_unchecked(u, mid) >= t {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// The `C`-volume of the rectangle `[u1, u2] x [v1, v2]`:
    /// `C(u2,v2) - C(u1,v2) - C(u2,v1) + C(u1,v1)`.
    ///
    /// Nonnegative for every genuine copula; `QuasiCopulaCc` with `c != 0`
    /// admits rectangles of strictly negative volume.
    pub fn rectangle_volume(&self, u1: f64, u2: f64, v1: f64, v2: f64) -> Result<f64> {
        self.validate()?;
        let ordered = 0.0 <= u1 && u1 < u2 && u2 <= 1.0 && 0.0 <= v1 && v1 < v2 && v2 <= 1.0;
        if !ordered || [u1, u2, v1, v2].iter().any(|t| t.is_nan()) {
            return Err(Error::Domain(format!(
                "rectangle [{u1}, {u2}] x [{v1}, {v2}] is not an ordered rectangle \
                 inside the unit square"
            )));
        }
        Ok(self.cdf_unchecked(u2, v2) - self.cdf_unchecked(u1, v2) - self.cdf_unchecked(u2, v1)
            + self.cdf_unchecked(u1, v1))
    }
}

/// Uniform draw on the open interval (0, 1): rejects the value 0 that
/// `gen::<f64>()` (range [0, 1)) can produce.
pub(crate) fn uniform_open01(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let x: f64 = rng.gen();
        if x > 0.0 {
            return x;
        }
    }
}
