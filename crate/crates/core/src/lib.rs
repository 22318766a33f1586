//! Barcode-entropy toolkit.
//!
//! The crate computes with the normal form of one-parameter persistence
//! modules (barcodes), estimates exponential growth rates of bar counts and
//! of periodic-orbit counts, translates bar parameters through radial
//! Hamiltonian profiles, and runs a desk-scale comparison pipeline between
//! barcode growth and orbit growth on symbolic surrogates of hyperbolic
//! flows.
//!
//! Modules:
//!
//! * [`bars`] — bars, barcodes, counting/truncation/reparametrization/rank.
//! * [`filtration`] — filtered complexes over F2 and column reduction.
//! * [`entropy`] — limsup-type growth estimators on finite schedules.
//! * [`profile`] — radial profiles and their action functions.
//! * [`symbolic`] — suspension flows over subshifts and toral automorphisms.
//! * [`lab`] — the barcode-vs-orbit growth comparison pipeline.
//! * [`io`] — text formats and canonical JSON reports.
//!
//! Barcodes and flow models are immutable after construction and safe to
//! share across threads; the estimators parallelize over grid points with
//! deterministic aggregation.

// `!(x > 0.0)` is used instead of `x <= 0.0` throughout: the negated form
// also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bars;
pub mod entropy;
pub mod error;
pub mod filtration;
pub mod io;
pub mod lab;
pub mod profile;
pub mod symbolic;
mod util;

pub use bars::{Bar, Barcode, Reparametrization};
pub use entropy::{
    barcode_entropy, dyn_bar_count, dyn_entropy, eps_entropy, log2_plus, DynSeries,
    EntropyEstimate, EvaluationSchedule, ValueMode,
};
pub use error::{Error, Result};
pub use filtration::{FilteredCell, FilteredComplex};
pub use lab::{
    corollary_c_report, synthesize_floer_barcode, theorem_b_check, BarLengthModel,
    ComparisonReport, CrossingEnergyModel, RatioReport,
};
pub use profile::{OrbitLift, Profile};
pub use symbolic::{ExactOrbit, PeriodicOrbit, SftFlow, ShadowedOrbit, TorusFlow, TorusLoop};

/// Cap the number of worker threads used by the parallel estimators. May be
/// called once, before any parallel work; later calls fail harmlessly.
pub fn set_worker_threads(n: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
}
