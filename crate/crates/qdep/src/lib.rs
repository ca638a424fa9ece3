//! Rank-based local dependence analysis for bivariate data.
//!
//! This crate implements the local dependence function
//!
//! ```text
//! q(u, v) = w(u, v) [C(u, v) - uv],      w(u, v) = 1 / sqrt(uv(1-u)(1-v)),
//! ```
//!
//! where `C` is a copula, together with
//!
//! - closed-form copula families (independence, Fréchet bounds and their
//!   mixture, Marshall-Olkin, Mai-Scherer, and a quasi-copula counterexample)
//!   with samplers based on conditional inversion ([`copula`]),
//! - the exact function `q`, its score-function representation, and the
//!   envelope bounds it must live inside ([`depfn`]),
//! - rank-based estimators `Q_n` and `L_n = sqrt(n) Q_n` built from the
//!   empirical copula of pseudo-observations ([`empirical`]),
//! - distribution-free Monte Carlo null tables, critical values, and global
//!   tests for independence and quadrant dependence ([`mc`]),
//! - CSV/SVG serialization and the `qdep` command-line interface
//!   ([`csvio`], [`svg`], [`cli`]).
//!
//! All randomized operations take explicit seeds and are deterministic for a
//! fixed seed, independent of thread count.

pub mod cli;
pub mod copula;
pub mod csvio;
pub mod depfn;
pub mod empirical;
pub mod error;
pub mod mc;
pub mod svg;

pub use copula::{CopulaModel, Sample};
pub use depfn::{DependenceSurface, Grid, SurfaceKind};
pub use empirical::{PseudoSample, SummaryStats, TiePolicy};
pub use error::{Error, Result};
pub use mc::{NullStatistic, NullTable, TestKind, TestReport};
