//! Prime tables, W-trick parameters, the cutoff χ, the majorant ν, the prime
//! weight f, correlation estimators and sums over primes.

mod averages;
mod chi;
mod measure;
mod params;
mod sums;
mod table;

pub use averages::{
    bad_primes, forms_family, polycor_average, polyform_average, BadPrimeReport, Estimate, EstimatorMode,
    PolycorSpec, PolyformReport, BODY_BUDGET,
};
pub use chi::{phi_double_integral, ChiShape, CutoffChi, Normalization, DEFAULT_DELTA};
pub use measure::{check_majorization, half_nu, nu, nu_divisor_bound, prime_weight_f, truncated_divisor_sum};
pub use params::{derive_params, params_from_n, primorial_below, totient, PrimeSet, Scales, SieveParams};
pub use sums::{
    divisor_bound_check, euler_product_diagnostic, exp_fn, explog_check, log_power_sum, mertens_sum,
    DivisorBoundReport, EulerReport, ExplogReport,
};
pub use table::{PrimeTable, DEFAULT_MAX_LIMIT};

use thiserror::Error;

use crate::convexlat::ConvexError;
use crate::polyalg::PolyError;

#[derive(Debug, Error)]
pub enum SieveError {
    #[error("table limit {limit} exceeds the maximum {max}")]
    TableLimit { limit: u64, max: u64 },
    #[error("prime table covers up to {limit} but {needed} is required")]
    TableTooSmall { needed: u64, limit: u64 },
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("invalid cutoff: {0}")]
    BadCutoff(String),
    #[error("f exceeds nu at residue {x}: {f} > {nu}")]
    Majorization { x: usize, f: f64, nu: f64 },
    #[error("window [{lo}, {hi}] with shifts up to {max_shift} leaves [1, {n}]")]
    Wraparound { lo: i64, hi: i64, max_shift: i64, n: u64 },
    #[error("invalid specification: {0}")]
    BadSpec(String),
    #[error("degenerate specification: {0}")]
    Degenerate(String),
    #[error("body contains no lattice points")]
    EmptyBody,
    #[error("integer overflow evaluating a shift")]
    Overflow,
    #[error("corrupt prime table cache: {0}")]
    BadCache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Convex(#[from] ConvexError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}
