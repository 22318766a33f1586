//! Finite-data estimators for limsup-type exponential growth rates.
//!
//! The measured quantity is always `log2+ count(tau) / tau` for a counting
//! function evaluated on a finite grid. An estimate reports the supremum of
//! that ratio over a tail window together with the least-squares slope of
//! `log2+ count` on the same window; which of the two becomes the headline
//! value depends on the counting function (see [`ValueMode`]).

use rayon::prelude::*;

use crate::bars::Barcode;
use crate::error::{Error, Result};

/// Base-2 positive-part logarithm: `max(0, log2 x)` with `log2 0 = -inf`
/// clamped to 0.
pub fn log2_plus(x: f64) -> f64 {
    if x > 1.0 {
        x.log2()
    } else {
        0.0
    }
}

/// Grid on which a limsup is probed: increasing evaluation points, the
/// fraction of them forming the tail window, and a decreasing epsilon grid
/// for the epsilon -> 0 limit.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationSchedule {
    tau_values: Vec<f64>,
    tail_fraction: f64,
    eps_grid: Vec<f64>,
    tolerance: f64,
}

impl EvaluationSchedule {
    pub fn new(
        tau_values: Vec<f64>,
        tail_fraction: f64,
        eps_grid: Vec<f64>,
    ) -> Result<EvaluationSchedule> {
        if tau_values.is_empty() {
            return Err(Error::InvalidSchedule("empty tau grid".into()));
        }
        for w in tau_values.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidSchedule(
                    "tau values must be strictly increasing".into(),
                ));
            }
        }
        if !(tau_values[0] > 0.0) || !tau_values.iter().all(|t| t.is_finite()) {
            return Err(Error::InvalidSchedule(
                "tau values must be positive and finite".into(),
            ));
        }
        if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
            return Err(Error::InvalidSchedule(
                "tail fraction must lie in (0, 1]".into(),
            ));
        }
        for w in eps_grid.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::InvalidSchedule(
                    "eps grid must be strictly decreasing".into(),
                ));
            }
        }
        if !eps_grid.iter().all(|e| *e > 0.0 && e.is_finite()) {
            return Err(Error::InvalidSchedule(
                "eps grid must be positive and finite".into(),
            ));
        }
        Ok(EvaluationSchedule {
            tau_values,
            tail_fraction,
            eps_grid,
            tolerance: 0.05,
        })
    }

    /// Uniform grid `step, 2*step, ..., <= tau_max` with a 50% tail window.
    pub fn uniform(tau_max: f64, step: f64, eps_grid: Vec<f64>) -> Result<EvaluationSchedule> {
        if !(step > 0.0) || !(tau_max >= step) {
            return Err(Error::InvalidSchedule("need 0 < step <= tau_max".into()));
        }
        let n = (tau_max / step).floor() as usize;
        let tau_values = (1..=n).map(|k| k as f64 * step).collect();
        EvaluationSchedule::new(tau_values, 0.5, eps_grid)
    }

    pub fn with_tail_fraction(mut self, tail_fraction: f64) -> Result<EvaluationSchedule> {
        if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
            return Err(Error::InvalidSchedule(
                "tail fraction must lie in (0, 1]".into(),
            ));
        }
        self.tail_fraction = tail_fraction;
        Ok(self)
    }

    /// Override the agreement tolerance (default 0.05 bits per unit action).
    pub fn with_tolerance(mut self, tolerance: f64) -> Result<EvaluationSchedule> {
        if !(tolerance > 0.0) {
            return Err(Error::InvalidSchedule("tolerance must be positive".into()));
        }
        self.tolerance = tolerance;
        Ok(self)
    }

    pub fn tau_values(&self) -> &[f64] {
        &self.tau_values
    }

    pub fn eps_grid(&self) -> &[f64] {
        &self.eps_grid
    }

    pub fn tail_fraction(&self) -> f64 {
        self.tail_fraction
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Largest ratio of consecutive tau values; close to 1 means the grid is
    /// dense enough for sequence-robust limsup evaluation.
    pub fn max_consecutive_tau_ratio(&self) -> f64 {
        self.tau_values
            .windows(2)
            .map(|w| w[1] / w[0])
            .fold(1.0, f64::max)
    }

    fn tail_len(&self) -> usize {
        ((self.tau_values.len() as f64 * self.tail_fraction).ceil() as usize)
            .clamp(1, self.tau_values.len())
    }
}

/// A growth-rate estimate: headline value, tail supremum of the ratio, the
/// regression slope over the tail, a stability flag, and the raw trace.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyEstimate {
    /// Headline estimate in bits per unit of the evaluation parameter.
    pub value: f64,
    /// Supremum of `log2+ count(tau) / tau` over the tail window.
    pub tail_sup: f64,
    /// Least-squares slope of `log2+ count` against `tau` over the tail.
    pub slope: f64,
    /// Whether tail supremum and regression slope agree within tolerance.
    pub stable: bool,
    /// `(tau, log2+ count / tau)` pairs, or `(eps, value)` pairs for
    /// epsilon-limit estimates.
    pub trace: Vec<(f64, f64)>,
}

impl EntropyEstimate {
    fn checked(self) -> EntropyEstimate {
        debug_assert!(self.value.is_finite() && self.value >= 0.0);
        self
    }
}

/// How the headline value is read off the tail window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueMode {
    /// Supremum of the ratio over the tail: the conservative finite-range
    /// surrogate of the limsup. Right for counting functions that grow like a
    /// clean power of two.
    TailSup,
    /// Least-squares slope of `log2+ count` over the tail: cancels constant
    /// prefactors. Right for cumulative orbit counts.
    TailSlope,
    /// Slope of `log2+ count + log2 tau` over the tail, skipping zero counts:
    /// cancels the `1/tau` prefactor of prime-orbit counting functions.
    OrbitCorrectedSlope,
}

/// Aggregate a `(tau, count)` series into an estimate.
pub(crate) fn aggregate_counts(
    points: &[(f64, f64)],
    sched: &EvaluationSchedule,
    mode: ValueMode,
) -> EntropyEstimate {
    debug_assert_eq!(points.len(), sched.tau_values.len());
    let trace: Vec<(f64, f64)> = points
        .iter()
        .map(|&(tau, count)| (tau, log2_plus(count) / tau))
        .collect();
    let tail = &points[points.len() - sched.tail_len()..];
    let tail_sup = tail
        .iter()
        .map(|&(tau, count)| log2_plus(count) / tau)
        .fold(0.0, f64::max);
    let plain: Vec<(f64, f64)> = tail
        .iter()
        .map(|&(tau, count)| (tau, log2_plus(count)))
        .collect();
    let slope = ls_slope(&plain).unwrap_or(tail_sup);
    let value = match mode {
        ValueMode::TailSup => tail_sup,
        ValueMode::TailSlope => slope,
        ValueMode::OrbitCorrectedSlope => {
            let corrected: Vec<(f64, f64)> = tail
                .iter()
                .filter(|&&(_, count)| count >= 1.0)
                .map(|&(tau, count)| (tau, log2_plus(count) + tau.log2()))
                .collect();
            ls_slope(&corrected).unwrap_or(0.0)
        }
    };
    EntropyEstimate {
        value: value.max(0.0),
        tail_sup,
        slope,
        stable: (tail_sup - slope).abs() < sched.tolerance,
        trace,
    }
    .checked()
}

fn ls_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Growth rate of `tau -> count_bars(b, eps, tau)` at a fixed bar-length
/// threshold.
pub fn eps_entropy(b: &Barcode, eps: f64, sched: &EvaluationSchedule) -> Result<EntropyEstimate> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidEpsilon(eps));
    }
    let points = sched
        .tau_values
        .iter()
        .map(|&tau| Ok((tau, b.count_bars(eps, tau)? as f64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate_counts(&points, sched, ValueMode::TailSup))
}

/// The epsilon -> 0 limit of [`eps_entropy`], read at the smallest grid
/// epsilon with no extrapolation. The per-epsilon values must be
/// non-decreasing as epsilon shrinks (they are, exactly, since the counts
/// are); a violation means the input data is inconsistent. The stability flag
/// records whether the last two grid values agree within tolerance.
pub fn barcode_entropy(b: &Barcode, sched: &EvaluationSchedule) -> Result<EntropyEstimate> {
    if sched.eps_grid.is_empty() {
        return Err(Error::InvalidSchedule("empty eps grid".into()));
    }
    let mut per_eps = Vec::with_capacity(sched.eps_grid.len());
    for &eps in &sched.eps_grid {
        per_eps.push((eps, eps_entropy(b, eps, sched)?));
    }
    finish_eps_limit(per_eps, sched)
}

fn finish_eps_limit(
    per_eps: Vec<(f64, EntropyEstimate)>,
    sched: &EvaluationSchedule,
) -> Result<EntropyEstimate> {
    for w in per_eps.windows(2) {
        let (prev, next) = (w[0].1.value, w[1].1.value);
        if next < prev - 1e-12 {
            return Err(Error::EpsMonotonicityViolation {
                from: prev,
                to: next,
            });
        }
    }
    let trace: Vec<(f64, f64)> = per_eps.iter().map(|(e, est)| (*e, est.value)).collect();
    let last = &per_eps[per_eps.len() - 1].1;
    let stable = if per_eps.len() >= 2 {
        let prev = &per_eps[per_eps.len() - 2].1;
        (last.value - prev.value).abs() <= sched.tolerance
    } else {
        false
    };
    Ok(EntropyEstimate {
        value: last.value,
        tail_sup: last.tail_sup,
        slope: last.slope,
        stable,
        trace,
    }
    .checked())
}

/// Bars of length > eps born below `s - eps`: the truncation-robust count.
pub fn dyn_bar_count(b: &Barcode, eps: f64, s: f64) -> Result<u64> {
    b.count_bars(eps, s - eps)
}

/// A family of barcodes evaluated along a schedule, each with the anchor at
/// which its dynamical bar count is taken.
#[derive(Debug, Clone)]
pub struct DynSeries {
    entries: Vec<(f64, Barcode, f64)>,
}

impl DynSeries {
    /// Evaluate `family` at every tau of the schedule. `anchor` names the
    /// parameter below which bars are counted (minus epsilon); for
    /// truncation families it is tau itself, for slope-cutoff families it is
    /// the top of the module.
    pub fn build<F, A>(family: F, anchor: A, sched: &EvaluationSchedule) -> DynSeries
    where
        F: Fn(f64) -> Barcode + Sync,
        A: Fn(f64) -> f64 + Sync,
    {
        let entries = sched
            .tau_values
            .par_iter()
            .map(|&tau| (tau, family(tau), anchor(tau)))
            .collect();
        DynSeries { entries }
    }

    /// Like [`DynSeries::build`] for families whose evaluation can fail.
    pub fn try_build<F, A>(family: F, anchor: A, sched: &EvaluationSchedule) -> Result<DynSeries>
    where
        F: Fn(f64) -> Result<Barcode> + Sync,
        A: Fn(f64) -> f64 + Sync,
    {
        let entries = sched
            .tau_values
            .par_iter()
            .map(|&tau| Ok((tau, family(tau)?, anchor(tau))))
            .collect::<Result<Vec<_>>>()?;
        Ok(DynSeries { entries })
    }

    pub fn entries(&self) -> &[(f64, Barcode, f64)] {
        &self.entries
    }

    fn counts(&self, eps: f64) -> Result<Vec<(f64, f64)>> {
        self.entries
            .iter()
            .map(|(tau, code, anchor)| Ok((*tau, dyn_bar_count(code, eps, *anchor)? as f64)))
            .collect()
    }

    /// Growth rate at one epsilon.
    pub fn entropy(
        &self,
        eps: f64,
        sched: &EvaluationSchedule,
        mode: ValueMode,
    ) -> Result<EntropyEstimate> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidEpsilon(eps));
        }
        let points = self.counts(eps)?;
        Ok(aggregate_counts(&points, sched, mode))
    }

    /// Epsilon -> 0 limit across the schedule grid, value at the smallest
    /// epsilon.
    pub fn entropy_limit(
        &self,
        sched: &EvaluationSchedule,
        mode: ValueMode,
    ) -> Result<EntropyEstimate> {
        if sched.eps_grid.is_empty() {
            return Err(Error::InvalidSchedule("empty eps grid".into()));
        }
        let mut per_eps = Vec::with_capacity(sched.eps_grid.len());
        for &eps in &sched.eps_grid {
            per_eps.push((eps, self.entropy(eps, sched, mode)?));
        }
        finish_eps_limit(per_eps, sched)
    }
}

/// Growth rate of the dynamical bar count of a barcode family, counted at
/// anchor `s` (the truncation-family convention).
pub fn dyn_entropy<F>(family: F, eps: f64, sched: &EvaluationSchedule) -> Result<EntropyEstimate>
where
    F: Fn(f64) -> Barcode + Sync,
{
    DynSeries::build(family, |s| s, sched).entropy(eps, sched, ValueMode::TailSup)
}
