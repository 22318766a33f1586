//! Barcodes: the normal form of the persistence modules this crate works with.
//!
//! A barcode is a finite multiset of half-open intervals `(birth, death]` with
//! `0 <= birth < death <= inf`. Everything downstream (entropy estimators, the
//! profile reparametrizations, the synthetic orbit barcodes) consumes the
//! counting, truncation, reparametrization and rank primitives defined here.
//!
//! Genuinely infinite-dimensional slices (infinitely many bars crossing one
//! parameter value) are outside the representable range: every `Barcode` is a
//! finite multiset by construction.

use std::sync::Arc;

use crate::error::{Error, Result};

/// One bar `(birth, death]` with a positive multiplicity.
///
/// `death` may be `f64::INFINITY`; NaN and zero-length bars are rejected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bar {
    birth: f64,
    death: f64,
    multiplicity: u64,
}

impl Bar {
    pub fn new(birth: f64, death: f64, multiplicity: u64) -> Result<Bar> {
        if birth.is_nan() || death.is_nan() {
            return Err(Error::InvalidBar {
                birth,
                death,
                reason: "NaN endpoint",
            });
        }
        if !birth.is_finite() {
            return Err(Error::InvalidBar {
                birth,
                death,
                reason: "birth must be finite",
            });
        }
        if birth < 0.0 {
            return Err(Error::InvalidBar {
                birth,
                death,
                reason: "birth must be >= 0",
            });
        }
        if !(death > birth) {
            return Err(Error::InvalidBar {
                birth,
                death,
                reason: "death must exceed birth",
            });
        }
        if multiplicity == 0 {
            return Err(Error::InvalidBar {
                birth,
                death,
                reason: "multiplicity must be positive",
            });
        }
        // normalize -0.0 so bit-level merging works
        let birth = if birth == 0.0 { 0.0 } else { birth };
        Ok(Bar {
            birth,
            death,
            multiplicity,
        })
    }

    pub fn birth(&self) -> f64 {
        self.birth
    }

    pub fn death(&self) -> f64 {
        self.death
    }

    pub fn multiplicity(&self) -> u64 {
        self.multiplicity
    }

    pub fn is_infinite(&self) -> bool {
        self.death.is_infinite()
    }

    /// `death - birth`; infinite for infinite bars.
    pub fn length(&self) -> f64 {
        self.death - self.birth
    }
}

/// A finite multiset of bars, kept sorted by `(birth, death)` with equal bars
/// coalesced, plus the explicit spectrum (all endpoints).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Barcode {
    bars: Vec<Bar>,
    spectrum: Vec<f64>,
}

impl Barcode {
    pub fn empty() -> Barcode {
        Barcode::default()
    }

    /// Build a barcode, sorting and merging duplicate intervals.
    pub fn new(bars: Vec<Bar>) -> Barcode {
        let mut bars = bars;
        bars.sort_by(|a, b| {
            a.birth
                .total_cmp(&b.birth)
                .then(a.death.total_cmp(&b.death))
        });
        let mut merged: Vec<Bar> = Vec::with_capacity(bars.len());
        for bar in bars {
            match merged.last_mut() {
                Some(last)
                    if last.birth.to_bits() == bar.birth.to_bits()
                        && last.death.to_bits() == bar.death.to_bits() =>
                {
                    last.multiplicity += bar.multiplicity;
                }
                _ => merged.push(bar),
            }
        }
        let mut spectrum: Vec<f64> = Vec::with_capacity(2 * merged.len());
        for bar in &merged {
            spectrum.push(bar.birth);
            if bar.death.is_finite() {
                spectrum.push(bar.death);
            }
        }
        spectrum.sort_by(f64::total_cmp);
        spectrum.dedup_by(|a, b| a.to_bits() == b.to_bits());
        Barcode {
            bars: merged,
            spectrum,
        }
    }

    /// Convenience constructor with multiplicity one per pair.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Barcode> {
        let bars = pairs
            .iter()
            .map(|&(b, d)| Bar::new(b, d, 1))
            .collect::<Result<Vec<_>>>()?;
        Ok(Barcode::new(bars))
    }

    pub fn bars(&self) -> &[Bar] {
        &self.bars
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    /// All endpoints (births and finite deaths), sorted, deduplicated.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.bars.iter().map(|b| b.multiplicity).sum()
    }

    /// Number of bars of length strictly greater than `eps` born strictly
    /// before `s`, counted with multiplicity. Infinite bars always pass the
    /// length test.
    pub fn count_bars(&self, eps: f64, s: f64) -> Result<u64> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidEpsilon(eps));
        }
        Ok(self
            .bars
            .iter()
            .filter(|b| b.birth < s && b.length() > eps)
            .map(|b| b.multiplicity)
            .sum())
    }

    /// Truncate at `s`: bars dying strictly before `s` survive unchanged, bars
    /// containing `s` (birth < s <= death) become infinite, bars born at or
    /// after `s` disappear.
    pub fn truncate(&self, s: f64) -> Barcode {
        let mut out = Vec::with_capacity(self.bars.len());
        for bar in &self.bars {
            if bar.birth >= s {
                continue;
            }
            if bar.death < s {
                out.push(*bar);
            } else {
                out.push(Bar {
                    birth: bar.birth,
                    death: f64::INFINITY,
                    multiplicity: bar.multiplicity,
                });
            }
        }
        Barcode::new(out)
    }

    /// Rank of the structure map between parameters `s <= t`: bars with
    /// `birth < s` and `death >= t`, with multiplicity.
    pub fn rank_invariant(&self, s: f64, t: f64) -> Result<u64> {
        if !(s <= t) {
            return Err(Error::RankArgumentOrder { s, t });
        }
        Ok(self
            .bars
            .iter()
            .filter(|b| b.birth < s && b.death >= t)
            .map(|b| b.multiplicity)
            .sum())
    }

    /// Multiset union. Bar counts are additive under this operation.
    pub fn direct_sum(&self, other: &Barcode) -> Barcode {
        let mut bars = self.bars.clone();
        bars.extend_from_slice(&other.bars);
        Barcode::new(bars)
    }

    /// Pull the barcode back along a reparametrization of the line: a bar
    /// `(a, b]` of the original module becomes `(xi^-1(a), xi^-1(b)]` in the
    /// reparametrized one. Multiplicities are preserved. Fails if a mapped
    /// birth falls below 0 (the lower-bound axiom) or if a bar degenerates.
    pub fn reparametrize(&self, xi: &Reparametrization) -> Result<Barcode> {
        let mut out = Vec::with_capacity(self.bars.len());
        for bar in &self.bars {
            let mut birth = xi.apply_inverse(bar.birth);
            if birth < 0.0 {
                if birth > -1e-9 {
                    birth = 0.0;
                } else {
                    return Err(Error::NegativeBirth(birth));
                }
            }
            let death = if bar.is_infinite() {
                f64::INFINITY
            } else {
                xi.apply_inverse(bar.death)
            };
            out.push(Bar::new(birth, death, bar.multiplicity)?);
        }
        Ok(Barcode::new(out))
    }
}

#[derive(Clone)]
enum MapRepr {
    Linear { scale: f64, offset: f64 },
    PiecewiseLinear { xs: Arc<[f64]>, ys: Arc<[f64]> },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl MapRepr {
    fn eval(&self, x: f64) -> f64 {
        match self {
            MapRepr::Linear { scale, offset } => scale * x + offset,
            MapRepr::PiecewiseLinear { xs, ys } => eval_piecewise(xs, ys, x),
            MapRepr::Custom(f) => f(x),
        }
    }
}

fn eval_piecewise(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    // affine extension beyond the knot range, using the end slopes
    if x <= xs[0] {
        let m = (ys[1] - ys[0]) / (xs[1] - xs[0]);
        return ys[0] + m * (x - xs[0]);
    }
    if x >= xs[n - 1] {
        let m = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
        return ys[n - 1] + m * (x - xs[n - 1]);
    }
    let i = match xs.binary_search_by(|v| v.total_cmp(&x)) {
        Ok(i) => return ys[i],
        Err(i) => i - 1,
    };
    let m = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
    ys[i] + m * (x - xs[i])
}

/// A continuous, strictly increasing bijection of the real line together with
/// its inverse and, when available, global Lipschitz constants for both
/// directions.
#[derive(Clone)]
pub struct Reparametrization {
    forward: MapRepr,
    inverse: MapRepr,
    lipschitz_forward: Option<f64>,
    lipschitz_inverse: Option<f64>,
}

impl Reparametrization {
    pub fn identity() -> Reparametrization {
        Reparametrization::linear(1.0, 0.0).expect("identity is monotone")
    }

    /// `xi(s) = scale * s + offset` with `scale > 0`.
    pub fn linear(scale: f64, offset: f64) -> Result<Reparametrization> {
        if !(scale > 0.0) || !scale.is_finite() || !offset.is_finite() {
            return Err(Error::NonMonotoneReparametrization);
        }
        Ok(Reparametrization {
            forward: MapRepr::Linear { scale, offset },
            inverse: MapRepr::Linear {
                scale: 1.0 / scale,
                offset: -offset / scale,
            },
            lipschitz_forward: Some(scale),
            lipschitz_inverse: Some(1.0 / scale),
        })
    }

    /// Piecewise-linear map through the given knots, extended affinely with
    /// the end slopes. Knots must be strictly increasing in both coordinates.
    pub fn piecewise_linear(knots: &[(f64, f64)]) -> Result<Reparametrization> {
        if knots.len() < 2 {
            return Err(Error::InvalidArgument(
                "piecewise-linear reparametrization needs at least two knots".into(),
            ));
        }
        let mut min_slope = f64::INFINITY;
        let mut max_slope: f64 = 0.0;
        for w in knots.windows(2) {
            let dx = w[1].0 - w[0].0;
            let dy = w[1].1 - w[0].1;
            if !(dx > 0.0) || !(dy > 0.0) || !dx.is_finite() || !dy.is_finite() {
                return Err(Error::NonMonotoneReparametrization);
            }
            min_slope = min_slope.min(dy / dx);
            max_slope = max_slope.max(dy / dx);
        }
        let xs: Arc<[f64]> = knots.iter().map(|k| k.0).collect();
        let ys: Arc<[f64]> = knots.iter().map(|k| k.1).collect();
        Ok(Reparametrization {
            forward: MapRepr::PiecewiseLinear {
                xs: xs.clone(),
                ys: ys.clone(),
            },
            inverse: MapRepr::PiecewiseLinear { xs: ys, ys: xs },
            lipschitz_forward: Some(max_slope),
            lipschitz_inverse: Some(1.0 / min_slope),
        })
    }

    /// Wrap arbitrary monotone closures. Monotonicity and inverse consistency
    /// are certified by sampling; a failed certification is rejected.
    pub fn from_fns(
        forward: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        inverse: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        lipschitz_forward: Option<f64>,
        lipschitz_inverse: Option<f64>,
    ) -> Result<Reparametrization> {
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=256 {
            let x = -64.0 + k as f64 * 0.5;
            let y = forward(x);
            if !y.is_finite() || y <= prev {
                return Err(Error::NonMonotoneReparametrization);
            }
            let back = inverse(y);
            if (back - x).abs() > 1e-6 * x.abs().max(1.0) {
                return Err(Error::InvalidArgument(
                    "inverse does not match forward map".into(),
                ));
            }
            prev = y;
        }
        Ok(Reparametrization {
            forward: MapRepr::Custom(forward),
            inverse: MapRepr::Custom(inverse),
            lipschitz_forward,
            lipschitz_inverse,
        })
    }

    pub fn apply(&self, s: f64) -> f64 {
        self.forward.eval(s)
    }

    pub fn apply_inverse(&self, s: f64) -> f64 {
        self.inverse.eval(s)
    }

    /// Global Lipschitz constant of the forward map, when known.
    pub fn lipschitz_forward(&self) -> Option<f64> {
        self.lipschitz_forward
    }

    /// Global Lipschitz constant of the inverse map, when known.
    pub fn lipschitz_inverse(&self) -> Option<f64> {
        self.lipschitz_inverse
    }

    /// Swap the two directions.
    pub fn inverted(&self) -> Reparametrization {
        Reparametrization {
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
            lipschitz_forward: self.lipschitz_inverse,
            lipschitz_inverse: self.lipschitz_forward,
        }
    }
}

impl std::fmt::Debug for Reparametrization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Reparametrization")
            .field("lipschitz_forward", &self.lipschitz_forward)
            .field("lipschitz_inverse", &self.lipschitz_inverse)
            .finish()
    }
}

#[cfg(test)]
pub(crate) const INF: f64 = f64::INFINITY;
