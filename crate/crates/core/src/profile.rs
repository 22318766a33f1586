//! Radial Hamiltonian profiles `h(r)` on `[1, inf)`: zero at the inner
//! boundary, strictly convex on `(1, rmax)`, linear of slope `a` beyond, and
//! the action functions they induce.
//!
//! Two constructors are provided: a closed-form quadratic family (exact
//! oracle values) and a clamped cubic spline through user knots. Derivative
//! sign conditions are certified by dense sampling at construction, not by
//! symbolic proof; profiles are only required to be C1 at `rmax`.

use crate::bars::{Bar, Barcode};
use crate::entropy::{DynSeries, EvaluationSchedule};
use crate::error::{Error, Result};

const CERT_SAMPLES: usize = 10_000;
const CERT_TOL: f64 = 1e-9;
const ROOT_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    /// `h(r) = coeff * (r - 1)^2` on `[1, rmax]`.
    Quadratic { coeff: f64 },
    /// Clamped cubic spline on `[1, rmax]` with `h'(1) = 0`, `h'(rmax) = a`.
    Spline {
        xs: Vec<f64>,
        ys: Vec<f64>,
        second: Vec<f64>,
    },
}

/// A certified radial profile with slope `a`, kink radius `rmax`, linear
/// offset `c` (`h(r) = a r - c` beyond `rmax`) and a window on which the
/// third derivative is certified non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    repr: Repr,
    slope: f64,
    rmax: f64,
    offset: f64,
    convex_window_end: f64,
}

/// One invariant check of a certification run.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificationCheck {
    pub name: &'static str,
    pub passed: bool,
    pub worst: f64,
}

impl Profile {
    /// Closed-form family `h(r) = a/(2 (rmax-1)) * (r-1)^2`, linear beyond.
    pub fn quadratic(a: f64, rmax: f64) -> Result<Profile> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::Certification(format!("slope must be > 0, got {a}")));
        }
        if !(rmax > 1.0) || !rmax.is_finite() {
            return Err(Error::Certification(format!(
                "rmax must be > 1, got {rmax}"
            )));
        }
        let coeff = a / (2.0 * (rmax - 1.0));
        Profile::finish(Repr::Quadratic { coeff }, a, rmax, rmax)
    }

    /// Clamped cubic spline through `(r, h)` knots with end slopes 0 and `a`.
    /// Knots must start at `(1, 0)`, end at `r = rmax`, and increase strictly
    /// in `r`. The monotonicity/convexity invariants are certified by
    /// sampling; data violating them is rejected.
    pub fn spline(a: f64, rmax: f64, knots: &[(f64, f64)]) -> Result<Profile> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::Certification(format!("slope must be > 0, got {a}")));
        }
        if knots.len() < 2 {
            return Err(Error::Certification("need at least two knots".into()));
        }
        if (knots[0].0 - 1.0).abs() > CERT_TOL || knots[0].1.abs() > CERT_TOL {
            return Err(Error::Certification("first knot must be (1, 0)".into()));
        }
        let last = knots[knots.len() - 1];
        if (last.0 - rmax).abs() > CERT_TOL {
            return Err(Error::Certification("last knot must sit at rmax".into()));
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Certification(
                    "knot radii must be strictly increasing".into(),
                ));
            }
        }
        let xs: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let ys: Vec<f64> = knots.iter().map(|k| k.1).collect();
        let second = clamped_spline_second_derivatives(&xs, &ys, 0.0, a)?;
        Profile::finish(Repr::Spline { xs, ys, second }, a, rmax, rmax)
    }

    /// Restrict the window on which `h''' >= 0` is certified. Useful for
    /// spline data that is convex everywhere but loses third-derivative
    /// positivity close to `rmax`.
    pub fn with_convex_window_end(self, end: f64) -> Result<Profile> {
        if !(end > 1.0 && end <= self.rmax) {
            return Err(Error::Certification(
                "convex window must end in (1, rmax]".into(),
            ));
        }
        Profile::finish(self.repr, self.slope, self.rmax, end)
    }

    fn finish(repr: Repr, slope: f64, rmax: f64, window_end: f64) -> Result<Profile> {
        let p = Profile {
            repr,
            slope,
            rmax,
            offset: 0.0,
            convex_window_end: window_end,
        };
        let offset = slope * rmax - p.h_inner(rmax);
        let p = Profile { offset, ..p };
        let report = p.certification_report();
        if let Some(bad) = report.iter().find(|c| !c.passed) {
            return Err(Error::Certification(format!(
                "{} failed (worst {:.3e})",
                bad.name, bad.worst
            )));
        }
        Ok(p)
    }

    /// Re-run all sampled invariant checks.
    pub fn certification_report(&self) -> Vec<CertificationCheck> {
        let mut checks = Vec::new();
        let n = CERT_SAMPLES;
        let span = self.rmax - 1.0;
        let mut min_d1 = f64::INFINITY;
        let mut min_d2_any = f64::INFINITY;
        let mut min_d2_interior = f64::INFINITY;
        let mut min_d3_window = f64::INFINITY;
        for k in 0..n {
            // offset sampling avoids landing exactly on spline knots
            let r = 1.0 + span * (k as f64 + 0.618) / n as f64;
            if k > 0 {
                min_d1 = min_d1.min(self.d1(r));
            }
            min_d2_any = min_d2_any.min(self.d2(r));
            if r < self.rmax - span / n as f64 {
                min_d2_interior = min_d2_interior.min(self.d2(r));
            }
            if r <= self.convex_window_end {
                min_d3_window = min_d3_window.min(self.d3(r));
            }
        }
        checks.push(CertificationCheck {
            name: "h(1) = 0",
            passed: self.h_inner(1.0).abs() <= CERT_TOL,
            worst: self.h_inner(1.0),
        });
        checks.push(CertificationCheck {
            name: "h'(1) = 0",
            passed: self.d1(1.0).abs() <= CERT_TOL,
            worst: self.d1(1.0),
        });
        checks.push(CertificationCheck {
            name: "h' > 0 on (1, rmax)",
            passed: min_d1 > 0.0,
            worst: min_d1,
        });
        checks.push(CertificationCheck {
            name: "h'' >= 0",
            passed: min_d2_any >= -CERT_TOL,
            worst: min_d2_any,
        });
        checks.push(CertificationCheck {
            name: "h'' > 0 on (1, rmax)",
            passed: min_d2_interior > 0.0,
            worst: min_d2_interior,
        });
        checks.push(CertificationCheck {
            name: "h''' >= 0 on convex window",
            passed: min_d3_window >= -CERT_TOL,
            worst: min_d3_window,
        });
        let slope_gap = self.d1(self.rmax) - self.slope;
        checks.push(CertificationCheck {
            name: "h'(rmax) = slope",
            passed: slope_gap.abs() <= CERT_TOL * self.slope.max(1.0),
            worst: slope_gap,
        });
        let max_action_gap = self.action_at(self.rmax) - self.offset;
        checks.push(CertificationCheck {
            name: "max action attained at rmax equals c",
            passed: max_action_gap.abs() <= CERT_TOL * self.offset.abs().max(1.0),
            worst: max_action_gap,
        });
        checks.push(CertificationCheck {
            name: "c >= slope",
            passed: self.offset >= self.slope - CERT_TOL,
            worst: self.offset - self.slope,
        });
        checks
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn rmax(&self) -> f64 {
        self.rmax
    }

    /// Linear offset: `h(r) = slope * r - c` for `r >= rmax`.
    pub fn linear_offset(&self) -> f64 {
        self.offset
    }

    /// Largest value the action function attains on `[1, rmax]`; equals the
    /// linear offset.
    pub fn max_action(&self) -> f64 {
        self.offset
    }

    pub fn convex_window(&self) -> (f64, f64) {
        (1.0, self.convex_window_end)
    }

    pub(crate) fn spline_knots(&self) -> Option<Vec<(f64, f64)>> {
        match &self.repr {
            Repr::Quadratic { .. } => None,
            Repr::Spline { xs, ys, .. } => {
                Some(xs.iter().copied().zip(ys.iter().copied()).collect())
            }
        }
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(self.repr, Repr::Quadratic { .. })
    }

    fn h_inner(&self, r: f64) -> f64 {
        match &self.repr {
            Repr::Quadratic { coeff } => coeff * (r - 1.0) * (r - 1.0),
            Repr::Spline { xs, ys, second } => spline_eval(xs, ys, second, r).0,
        }
    }

    /// `h(r)` on `[1, inf)`.
    pub fn h(&self, r: f64) -> f64 {
        if r >= self.rmax {
            self.slope * r - self.offset
        } else {
            self.h_inner(r)
        }
    }

    /// First derivative `h'(r)`.
    pub fn d1(&self, r: f64) -> f64 {
        if r >= self.rmax {
            return self.slope;
        }
        match &self.repr {
            Repr::Quadratic { coeff } => 2.0 * coeff * (r - 1.0),
            Repr::Spline { xs, ys, second } => spline_eval(xs, ys, second, r).1,
        }
    }

    /// Second derivative `h''(r)` (zero beyond `rmax`).
    pub fn d2(&self, r: f64) -> f64 {
        if r >= self.rmax {
            return 0.0;
        }
        match &self.repr {
            Repr::Quadratic { coeff } => 2.0 * coeff,
            Repr::Spline { xs, ys, second } => spline_eval(xs, ys, second, r).2,
        }
    }

    /// Third derivative `h'''(r)` (piecewise constant for splines).
    pub fn d3(&self, r: f64) -> f64 {
        if r >= self.rmax {
            return 0.0;
        }
        match &self.repr {
            Repr::Quadratic { .. } => 0.0,
            Repr::Spline { xs, second, .. } => {
                let i = segment_index(xs, r);
                (second[i + 1] - second[i]) / (xs[i + 1] - xs[i])
            }
        }
    }

    /// The action as a function of the radius: `A(r) = r h'(r) - h(r)` on
    /// `[1, rmax]`. Non-negative and non-decreasing.
    pub fn action_of_radius(&self, r: f64) -> Result<f64> {
        if !(1.0..=self.rmax).contains(&r) {
            return Err(Error::OutOfDomain {
                value: r,
                lo: 1.0,
                hi: self.rmax,
            });
        }
        Ok(self.action_at(r))
    }

    fn action_at(&self, r: f64) -> f64 {
        // mathematically non-negative; clamp the rounding noise at r = 1
        (r * self.d1(r) - self.h(r)).max(0.0)
    }

    /// The unique radius in `[1, rmax]` where `h'` takes the value `T`,
    /// for `T` in `[0, slope]`. Bracketing bisection refined by Newton.
    pub fn radius_of_period(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.slope).contains(&t) {
            return Err(Error::OutOfDomain {
                value: t,
                lo: 0.0,
                hi: self.slope,
            });
        }
        if t == 0.0 {
            return Ok(1.0);
        }
        if t == self.slope {
            return Ok(self.rmax);
        }
        Ok(solve_increasing(
            |r| self.d1(r) - t,
            |r| self.d2(r),
            1.0,
            self.rmax,
        ))
    }

    /// Translate contact action (a period `T`) into Hamiltonian action:
    /// the action at the radius where `h'` equals `T`. Strictly increasing
    /// and convex with derivative equal to that radius.
    pub fn contact_to_hamiltonian(&self, t: f64) -> Result<f64> {
        let r = self.radius_of_period(t)?;
        Ok(self.action_at(r.clamp(1.0, self.rmax)))
    }

    /// The profile of `s * h`: slope `s * a`, same `rmax`.
    pub fn scale_profile(&self, s: f64) -> Result<Profile> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "scale factor must be positive, got {s}"
            )));
        }
        let repr = match &self.repr {
            Repr::Quadratic { coeff } => Repr::Quadratic { coeff: s * coeff },
            Repr::Spline { xs, ys, second } => Repr::Spline {
                xs: xs.clone(),
                ys: ys.iter().map(|y| s * y).collect(),
                second: second.iter().map(|m| s * m).collect(),
            },
        };
        Ok(Profile {
            repr,
            slope: s * self.slope,
            rmax: self.rmax,
            offset: s * self.offset,
            convex_window_end: self.convex_window_end,
        })
    }

    /// Model of the filtered module seen through the scaled profile `s * h`:
    /// truncate at the slope cutoff `s * a`, then push every endpoint through
    /// the contact-to-Hamiltonian action translation of `s * h`. The output
    /// lives on the Hamiltonian-action axis.
    pub fn floer_barcode(&self, code: &Barcode, s: f64) -> Result<Barcode> {
        let scaled = self.scale_profile(s)?;
        let cutoff = scaled.slope();
        let truncated = code.truncate(cutoff);
        let mut bars = Vec::with_capacity(truncated.bars().len());
        for bar in truncated.bars() {
            let birth = scaled.contact_to_hamiltonian(bar.birth())?;
            let death = if bar.is_infinite() {
                f64::INFINITY
            } else {
                scaled.contact_to_hamiltonian(bar.death())?
            };
            bars.push(Bar::new(birth, death, bar.multiplicity())?);
        }
        Ok(Barcode::new(bars))
    }

    /// The family `s -> floer_barcode(code, s)` with the slope-cutoff anchor
    /// (the top of each module) attached, ready for dynamical bar counting.
    pub fn floer_dyn_series(
        &self,
        code: &Barcode,
        sched: &EvaluationSchedule,
    ) -> Result<DynSeries> {
        DynSeries::try_build(
            |s| self.floer_barcode(code, s),
            |s| s * self.max_action(),
            sched,
        )
    }
}

/// Radius and Hamiltonian action of the lift of a closed orbit of period `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitLift {
    pub contact_period: f64,
    pub radius: f64,
    pub hamiltonian_action: f64,
}

impl OrbitLift {
    pub fn new(profile: &Profile, contact_period: f64) -> Result<OrbitLift> {
        let radius = profile.radius_of_period(contact_period)?;
        Ok(OrbitLift {
            contact_period,
            radius,
            hamiltonian_action: profile.action_at(radius.clamp(1.0, profile.rmax())),
        })
    }
}

fn segment_index(xs: &[f64], x: f64) -> usize {
    match xs.binary_search_by(|v| v.total_cmp(&x)) {
        Ok(i) => i.min(xs.len() - 2),
        Err(i) => i.saturating_sub(1).min(xs.len() - 2),
    }
}

fn spline_eval(xs: &[f64], ys: &[f64], second: &[f64], x: f64) -> (f64, f64, f64) {
    let i = segment_index(xs, x);
    let h = xs[i + 1] - xs[i];
    let a = (xs[i + 1] - x) / h;
    let b = (x - xs[i]) / h;
    let val = a * ys[i]
        + b * ys[i + 1]
        + ((a * a * a - a) * second[i] + (b * b * b - b) * second[i + 1]) * h * h / 6.0;
    let d1 = (ys[i + 1] - ys[i]) / h
        + ((3.0 * b * b - 1.0) * second[i + 1] - (3.0 * a * a - 1.0) * second[i]) * h / 6.0;
    let d2 = a * second[i] + b * second[i + 1];
    (val, d1, d2)
}

/// Second derivatives of the clamped cubic spline interpolant (Thomas solve).
fn clamped_spline_second_derivatives(
    xs: &[f64],
    ys: &[f64],
    d_left: f64,
    d_right: f64,
) -> Result<Vec<f64>> {
    let n = xs.len();
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut lower = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let h0 = xs[1] - xs[0];
    diag[0] = 2.0 * h0;
    upper[0] = h0;
    rhs[0] = 6.0 * ((ys[1] - ys[0]) / h0 - d_left);
    for i in 1..n - 1 {
        let hl = xs[i] - xs[i - 1];
        let hr = xs[i + 1] - xs[i];
        lower[i] = hl;
        diag[i] = 2.0 * (hl + hr);
        upper[i] = hr;
        rhs[i] = 6.0 * ((ys[i + 1] - ys[i]) / hr - (ys[i] - ys[i - 1]) / hl);
    }
    let hn = xs[n - 1] - xs[n - 2];
    lower[n - 1] = hn;
    diag[n - 1] = 2.0 * hn;
    rhs[n - 1] = 6.0 * (d_right - (ys[n - 1] - ys[n - 2]) / hn);

    for i in 1..n {
        let w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
        if diag[i].abs() < 1e-300 {
            return Err(Error::Certification("degenerate spline system".into()));
        }
    }
    let mut m = vec![0.0; n];
    m[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
    }
    Ok(m)
}

/// Find the root of an increasing function on `[lo, hi]` with `f(lo) <= 0 <=
/// f(hi)`: bisection to bracket, Newton once the bracket is tight, guarded so
/// iterates never leave the bracket.
fn solve_increasing(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
) -> f64 {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..16 {
        if f(x) > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        x = 0.5 * (lo + hi);
    }
    for _ in 0..60 {
        let fx = f(x);
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let d = df(x);
        let newton = if d > 0.0 { x - fx / d } else { f64::NAN };
        x = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= ROOT_REL_TOL * x.abs().max(1.0) {
            break;
        }
    }
    x
}
