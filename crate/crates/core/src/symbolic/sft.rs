//! Suspension flows over subshifts of finite type: periodic-orbit counting
//! by admissible primitive necklace enumeration, and the growth-rate
//! estimators built on those counts.

use rayon::prelude::*;

use crate::entropy::{aggregate_counts, EntropyEstimate, EvaluationSchedule, ValueMode};
use crate::error::{Error, Result};
use crate::profile::Profile;

/// Hard cap on the symbol length reachable by explicit enumeration. Constant
/// roofs route through the closed form instead and never hit it.
const ENUM_MAX_LEN: usize = 26;

/// Which objects `count_orbits` counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitCounting {
    /// Every (prime orbit, iterate) pair with total period below the cap is
    /// a distinct orbit. Default.
    PrimeIteratePairs,
    /// Prime orbits only, counted once at their prime period.
    PrimesOnly,
}

/// A periodic orbit of the suspension flow: a primitive admissible cycle in
/// canonical (lexicographically minimal rotation) form, its prime period
/// (roof sum), and which iterate of it is meant.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit {
    pub symbol_cycle: Vec<u8>,
    pub prime_period: f64,
    pub multiplicity_index: u32,
}

impl PeriodicOrbit {
    pub fn total_period(&self) -> f64 {
        self.multiplicity_index as f64 * self.prime_period
    }
}

/// Suspension flow over a subshift of finite type with per-symbol return
/// times. The transition matrix must be irreducible; roof values positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SftFlow {
    rows: Vec<u64>,
    alphabet: usize,
    roof: Vec<f64>,
    constant_roof: Option<f64>,
}

impl SftFlow {
    pub fn new(transition: &[Vec<u8>], roof: &[f64]) -> Result<SftFlow> {
        let n = transition.len();
        if n == 0 || n > 64 {
            return Err(Error::InvalidFlow(format!(
                "alphabet size must be in 1..=64, got {n}"
            )));
        }
        let mut rows = vec![0u64; n];
        for (i, row) in transition.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidFlow(
                    "transition matrix must be square".into(),
                ));
            }
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 => rows[i] |= 1 << j,
                    _ => {
                        return Err(Error::InvalidFlow(format!(
                            "transition entries must be 0 or 1, got {v}"
                        )))
                    }
                }
            }
        }
        if roof.len() != n {
            return Err(Error::InvalidFlow(
                "roof must assign one return time per symbol".into(),
            ));
        }
        if !roof.iter().all(|r| *r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidFlow("roof values must be positive".into()));
        }
        if !is_strongly_connected(&rows) {
            return Err(Error::InvalidFlow(
                "transition matrix must be irreducible (strongly connected)".into(),
            ));
        }
        let constant_roof = if roof.iter().all(|r| r.to_bits() == roof[0].to_bits()) {
            Some(roof[0])
        } else {
            None
        };
        Ok(SftFlow {
            rows,
            alphabet: n,
            roof: roof.to_vec(),
            constant_roof,
        })
    }

    /// Unit-roof suspension of the full shift on `k` symbols.
    pub fn full_shift(k: usize) -> Result<SftFlow> {
        let transition = vec![vec![1u8; k]; k];
        SftFlow::new(&transition, &vec![1.0; k])
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    pub fn roof(&self) -> &[f64] {
        &self.roof
    }

    pub fn transition(&self) -> Vec<Vec<u8>> {
        self.rows
            .iter()
            .map(|row| (0..self.alphabet).map(|j| ((row >> j) & 1) as u8).collect())
            .collect()
    }

    fn allows(&self, from: u8, to: u8) -> bool {
        (self.rows[from as usize] >> to) & 1 == 1
    }

    fn min_roof(&self) -> f64 {
        self.roof.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// An irreducible transition matrix has zero orbit growth exactly when it
    /// is a permutation (a single cycle). The check is structural and exact.
    pub fn zero_entropy_certified(&self) -> bool {
        let col_union = self.rows.iter().fold(0u64, |acc, r| acc | r);
        let full = if self.alphabet == 64 {
            u64::MAX
        } else {
            (1u64 << self.alphabet) - 1
        };
        self.rows.iter().all(|r| r.count_ones() == 1) && col_union == full && {
            let mut col_counts = vec![0u32; self.alphabet];
            for r in &self.rows {
                col_counts[r.trailing_zeros() as usize] += 1;
            }
            col_counts.iter().all(|&c| c == 1)
        }
    }

    /// Visit every admissible primitive necklace with roof sum at most `cap`,
    /// in canonical form, partitioned by symbol length across workers with a
    /// deterministic merge.
    fn scan_primes<T, F>(&self, cap: f64, per_word: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&[u8], f64) -> T + Sync,
    {
        if !(cap >= 0.0) {
            return Ok(Vec::new());
        }
        let max_len = (cap / self.min_roof()).floor() as usize;
        if max_len > ENUM_MAX_LEN {
            return Err(Error::InvalidArgument(format!(
                "necklace enumeration capped at symbol length {ENUM_MAX_LEN}, requested {max_len}"
            )));
        }
        let per_len: Vec<Vec<T>> = (1..max_len + 1)
            .into_par_iter()
            .map(|len| {
                let mut out = Vec::new();
                self.scan_primes_of_length(len, cap, &mut |w, t| out.push(per_word(w, t)));
                out
            })
            .collect();
        Ok(per_len.into_iter().flatten().collect())
    }

    /// Lyndon-word generation (pre-necklace recursion) restricted to
    /// transition-admissible words, pruned by partial roof sums.
    fn scan_primes_of_length(&self, len: usize, cap: f64, emit: &mut dyn FnMut(&[u8], f64)) {
        let mut word = vec![0u8; len + 1]; // 1-based
        let mut roof_sum = vec![0.0f64; len + 1];
        let min_roof = self.min_roof();
        self.rec(1, 1, len, cap, min_roof, &mut word, &mut roof_sum, emit);
    }

    #[allow(clippy::too_many_arguments)]
    fn rec(
        &self,
        t: usize,
        p: usize,
        len: usize,
        cap: f64,
        min_roof: f64,
        word: &mut Vec<u8>,
        roof_sum: &mut Vec<f64>,
        emit: &mut dyn FnMut(&[u8], f64),
    ) {
        if t > len {
            if p == len && self.allows(word[len], word[1]) && roof_sum[len] <= cap {
                emit(&word[1..=len], roof_sum[len]);
            }
            return;
        }
        let start = word[t - p];
        for c in start..self.alphabet as u8 {
            if t > 1 && !self.allows(word[t - 1], c) {
                continue;
            }
            let sum = roof_sum[t - 1] + self.roof[c as usize];
            if sum + (len - t) as f64 * min_roof > cap {
                continue;
            }
            word[t] = c;
            roof_sum[t] = sum;
            let np = if c == start { p } else { t };
            self.rec(t + 1, np, len, cap, min_roof, word, roof_sum, emit);
        }
    }

    /// (prime period, number of primes with that period), sorted by period,
    /// by explicit enumeration.
    fn prime_period_multiset_enumerated(&self, cap: f64) -> Result<Vec<(f64, u64)>> {
        let periods = self.scan_primes(cap, |_, t| t)?;
        Ok(group_periods(periods))
    }

    /// Same multiset from the Mobius-inverted closed form, valid for constant
    /// roofs: the number of primitive cycles of length `d` is determined by
    /// the traces of the transition-matrix powers.
    fn prime_period_multiset_closed(&self, cap: f64, rho: f64) -> Result<Vec<(f64, u64)>> {
        let dmax = (cap / rho).floor() as i64;
        if dmax <= 0 {
            return Ok(Vec::new());
        }
        let primes = self.prime_counts_closed(dmax as usize)?;
        Ok(primes
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(i, &n)| ((i + 1) as f64 * rho, n))
            .collect())
    }

    /// `N_d` for `d = 1..=dmax` via Mobius inversion of the trace sequence.
    fn prime_counts_closed(&self, dmax: usize) -> Result<Vec<u64>> {
        let traces = self.trace_powers(dmax)?;
        let mut out = Vec::with_capacity(dmax);
        for d in 1..=dmax {
            let mut sum: i128 = 0;
            for e in 1..=d {
                if d % e == 0 {
                    let mu = moebius((d / e) as u64);
                    if mu != 0 {
                        sum += mu as i128 * traces[e - 1] as i128;
                    }
                }
            }
            if sum < 0 || sum % d as i128 != 0 {
                return Err(Error::InvalidFlow(
                    "trace sequence is not a valid cycle count".into(),
                ));
            }
            let n = sum / d as i128;
            out.push(u64::try_from(n).map_err(|_| Error::Overflow("prime cycle count"))?);
        }
        Ok(out)
    }

    /// `tr(A^n)` for `n = 1..=nmax`, exact integer arithmetic.
    fn trace_powers(&self, nmax: usize) -> Result<Vec<u128>> {
        let n = self.alphabet;
        let base: Vec<Vec<u128>> = self
            .transition()
            .iter()
            .map(|row| row.iter().map(|&v| v as u128).collect())
            .collect();
        let mut power = base.clone();
        let mut traces = Vec::with_capacity(nmax);
        for step in 0..nmax {
            let mut tr: u128 = 0;
            for (i, row) in power.iter().enumerate().take(n) {
                tr = tr
                    .checked_add(row[i])
                    .ok_or(Error::Overflow("transition trace"))?;
            }
            traces.push(tr);
            if step + 1 < nmax {
                power = mat_mul(&power, &base)?;
            }
        }
        Ok(traces)
    }

    fn period_multiset(&self, cap: f64) -> Result<Vec<(f64, u64)>> {
        match self.constant_roof {
            Some(rho) => self.prime_period_multiset_closed(cap, rho),
            None => self.prime_period_multiset_enumerated(cap),
        }
    }

    /// Number of periodic orbits with period at most `s` under the default
    /// (prime, iterate) pair convention.
    pub fn count_orbits(&self, s: f64) -> Result<u64> {
        self.count_orbits_with(s, OrbitCounting::PrimeIteratePairs)
    }

    pub fn count_orbits_with(&self, s: f64, convention: OrbitCounting) -> Result<u64> {
        let primes = self.period_multiset(s)?;
        let mut total: u64 = 0;
        for (period, count) in primes {
            let reps = match convention {
                OrbitCounting::PrimeIteratePairs => (s / period).floor() as u64,
                OrbitCounting::PrimesOnly => 1,
            };
            total = total
                .checked_add(
                    count
                        .checked_mul(reps)
                        .ok_or(Error::Overflow("orbit count"))?,
                )
                .ok_or(Error::Overflow("orbit count"))?;
        }
        Ok(total)
    }

    /// Enumeration route regardless of the roof structure; used to cross-check
    /// the closed form.
    pub fn count_orbits_enumerated(&self, s: f64) -> Result<u64> {
        let primes = self.prime_period_multiset_enumerated(s)?;
        let mut total: u64 = 0;
        for (period, count) in primes {
            total += count * (s / period).floor() as u64;
        }
        Ok(total)
    }

    /// Primitive-necklace counts by symbol length, `1..=dmax`, enumerated.
    pub fn prime_counts_enumerated(&self, dmax: usize) -> Result<Vec<u64>> {
        let max_roof = self.roof.iter().copied().fold(0.0f64, f64::max);
        let words = self.scan_primes(dmax as f64 * max_roof + 1.0, |w, _| w.len())?;
        let mut out = vec![0u64; dmax];
        for len in words {
            if len <= dmax {
                out[len - 1] += 1;
            }
        }
        Ok(out)
    }

    /// All (prime, iterate) orbits with total period at most `s`, canonical
    /// cycles included. Enumeration only; intended for desk-scale listings.
    pub fn orbits_up_to(&self, s: f64) -> Result<Vec<PeriodicOrbit>> {
        let primes = self.scan_primes(s, |w, t| (w.to_vec(), t))?;
        let mut out = Vec::new();
        for (word, period) in primes {
            let reps = (s / period).floor() as u32;
            for k in 1..=reps {
                out.push(PeriodicOrbit {
                    symbol_cycle: word.clone(),
                    prime_period: period,
                    multiplicity_index: k,
                });
            }
        }
        out.sort_by(|a, b| {
            a.total_period()
                .total_cmp(&b.total_period())
                .then(a.symbol_cycle.cmp(&b.symbol_cycle))
                .then(a.multiplicity_index.cmp(&b.multiplicity_index))
        });
        Ok(out)
    }

    /// (total period, pair count) for the band `lo < T <= hi`, merged over
    /// iterates of all primes.
    pub fn periods_in_band(&self, lo: f64, hi: f64) -> Result<Vec<(f64, u64)>> {
        if !(hi >= lo) {
            return Err(Error::InvalidArgument(format!(
                "band must satisfy lo <= hi, got ({lo}, {hi}]"
            )));
        }
        let primes = self.period_multiset(hi)?;
        let mut periods: Vec<(f64, u64)> = Vec::new();
        for (prime, count) in primes {
            // iterate bounds written exactly as in count_orbits, so that the
            // listed multiplicities always sum to the band count
            let lo_k = (lo / prime).floor() as u64;
            let hi_k = (hi / prime).floor() as u64;
            for m in lo_k + 1..=hi_k {
                periods.push((m as f64 * prime, count));
            }
        }
        Ok(group_periods_weighted(periods))
    }

    /// Orbit count weighted by the symbolic length of the prime cycle. For a
    /// constant roof this equals the cumulative trace of transition-matrix
    /// powers, which removes the polynomial factor that plain orbit counts
    /// carry in front of their exponential growth.
    pub fn weighted_orbit_count(&self, s: f64) -> Result<u64> {
        match self.constant_roof {
            Some(rho) => {
                let nmax = (s / rho).floor() as usize;
                if nmax == 0 {
                    return Ok(0);
                }
                let traces = self.trace_powers(nmax)?;
                let mut total: u128 = 0;
                for t in traces {
                    total = total
                        .checked_add(t)
                        .ok_or(Error::Overflow("weighted count"))?;
                }
                u64::try_from(total).map_err(|_| Error::Overflow("weighted count"))
            }
            None => {
                let primes = self.scan_primes(s, |w, t| (w.len() as u64, t))?;
                let mut total: u64 = 0;
                for (len, period) in primes {
                    total += len * (s / period).floor() as u64;
                }
                Ok(total)
            }
        }
    }

    /// Topological-entropy estimate: the tail regression slope of
    /// `log2(weighted orbit count)`. Certified zero-growth systems report an
    /// exact zero with the raw trace kept for diagnostics.
    pub fn htop_estimate(&self, sched: &EvaluationSchedule) -> Result<EntropyEstimate> {
        let points = sched
            .tau_values()
            .iter()
            .map(|&tau| Ok((tau, self.weighted_orbit_count(tau)? as f64)))
            .collect::<Result<Vec<_>>>()?;
        if points.iter().all(|&(_, c)| c == 0.0) {
            return Err(Error::InvalidArgument(
                "schedule never reaches an orbit period".into(),
            ));
        }
        let mut est = aggregate_counts(&points, sched, ValueMode::TailSlope);
        if self.zero_entropy_certified() {
            est.value = 0.0;
            est.stable = true;
        }
        Ok(est)
    }

    /// Orbits whose lift through the profile lands in the radius band
    /// `(r_minus, r_plus]`: the count between the two slope cutoffs.
    pub fn band_count(&self, profile: &Profile, r_minus: f64, r_plus: f64, s: f64) -> Result<u64> {
        let (a_minus, a_plus) = band_slopes(profile, r_minus, r_plus)?;
        Ok(self.count_orbits(a_plus * s)? - self.count_orbits(a_minus * s)?)
    }

    /// Growth rate of the weighted in-band orbit count.
    pub fn band_growth_estimate(
        &self,
        profile: &Profile,
        r_minus: f64,
        r_plus: f64,
        sched: &EvaluationSchedule,
    ) -> Result<EntropyEstimate> {
        let (a_minus, a_plus) = band_slopes(profile, r_minus, r_plus)?;
        let points = sched
            .tau_values()
            .iter()
            .map(|&tau| {
                let hi = self.weighted_orbit_count(a_plus * tau)?;
                let lo = self.weighted_orbit_count(a_minus * tau)?;
                Ok((tau, (hi - lo) as f64))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut est = aggregate_counts(&points, sched, ValueMode::TailSlope);
        if self.zero_entropy_certified() {
            est.value = 0.0;
            est.stable = true;
        }
        Ok(est)
    }

    /// Defect of a sampled loop in the suspension of the shift space: the
    /// fiber speed must be 1, the symbol may only change across the roof, and
    /// any symbol change must be transition-admissible.
    pub fn pseudo_orbit_defect(&self, l: &SymbolLoop) -> Result<f64> {
        if l.samples.len() < 3 {
            return Err(Error::InvalidPseudoOrbit(
                "need at least three samples".into(),
            ));
        }
        if !(l.dt > 0.0) {
            return Err(Error::InvalidPseudoOrbit("step must be positive".into()));
        }
        let n = l.samples.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            let (s_prev, mut th_prev) = l.samples[(i + n - 1) % n];
            let (s_here, th_here) = l.samples[i];
            let (s_next, mut th_next) = l.samples[(i + 1) % n];
            if s_prev >= self.alphabet || s_here >= self.alphabet || s_next >= self.alphabet {
                return Err(Error::InvalidPseudoOrbit("symbol out of range".into()));
            }
            let mut base_jump = 0.0;
            if th_here - th_prev < -0.5 {
                th_prev -= 1.0;
                if s_prev != s_here && !self.allows(s_prev as u8, s_here as u8) {
                    base_jump = 1.0 / l.dt;
                }
            } else if s_prev != s_here {
                base_jump = 1.0 / l.dt;
            }
            if th_next - th_here < -0.5 {
                th_next += 1.0;
                if s_here != s_next && !self.allows(s_here as u8, s_next as u8) {
                    base_jump = base_jump.max(1.0 / l.dt);
                }
            } else if s_here != s_next {
                base_jump = base_jump.max(1.0 / l.dt);
            }
            let fiber_rate = (th_next - th_prev) / (2.0 * l.dt);
            let defect = ((fiber_rate - 1.0).powi(2) + base_jump.powi(2)).sqrt();
            worst = worst.max(defect);
        }
        Ok(worst)
    }
}

/// A sampled loop in the suspension of a shift space: `(symbol, fiber)` at a
/// uniform time step.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolLoop {
    pub samples: Vec<(usize, f64)>,
    pub dt: f64,
}

// equal radii describe an empty band and are allowed
fn band_slopes(profile: &Profile, r_minus: f64, r_plus: f64) -> Result<(f64, f64)> {
    if !(1.0 < r_minus && r_minus <= r_plus && r_plus < profile.rmax()) {
        return Err(Error::InvalidArgument(format!(
            "band radii must satisfy 1 < r_minus <= r_plus < rmax, got ({r_minus}, {r_plus})"
        )));
    }
    Ok((profile.d1(r_minus), profile.d1(r_plus)))
}

fn group_periods(mut periods: Vec<f64>) -> Vec<(f64, u64)> {
    periods.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, u64)> = Vec::new();
    for p in periods {
        match out.last_mut() {
            Some(last) if last.0.to_bits() == p.to_bits() => last.1 += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

fn group_periods_weighted(mut periods: Vec<(f64, u64)>) -> Vec<(f64, u64)> {
    periods.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, u64)> = Vec::new();
    for (p, c) in periods {
        match out.last_mut() {
            Some(last) if last.0.to_bits() == p.to_bits() => last.1 += c,
            _ => out.push((p, c)),
        }
    }
    out
}

fn is_strongly_connected(rows: &[u64]) -> bool {
    let n = rows.len();
    let reach = |adj: &dyn Fn(usize) -> u64| -> u64 {
        let mut seen: u64 = 1;
        let mut frontier: u64 = 1;
        while frontier != 0 {
            let mut next: u64 = 0;
            for i in 0..n {
                if (frontier >> i) & 1 == 1 {
                    next |= adj(i);
                }
            }
            frontier = next & !seen;
            seen |= next;
        }
        seen
    };
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let fwd = reach(&|i| rows[i]);
    let back = reach(&|i| {
        let mut mask = 0u64;
        for (j, r) in rows.iter().enumerate() {
            if (r >> i) & 1 == 1 {
                mask |= 1 << j;
            }
        }
        mask
    });
    fwd == full && back == full
}

fn mat_mul(a: &[Vec<u128>], b: &[Vec<u128>]) -> Result<Vec<Vec<u128>>> {
    let n = a.len();
    let mut out = vec![vec![0u128; n]; n];
    for i in 0..n {
        for k in 0..n {
            let v = a[i][k];
            if v == 0 {
                continue;
            }
            for j in 0..n {
                let add = v
                    .checked_mul(b[k][j])
                    .ok_or(Error::Overflow("transition power"))?;
                out[i][j] = out[i][j]
                    .checked_add(add)
                    .ok_or(Error::Overflow("transition power"))?;
            }
        }
    }
    Ok(out)
}

fn moebius(n: u64) -> i64 {
    let mut n = n;
    let mut factors = 0;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            factors += 1;
        }
        p += 1;
    }
    if n > 1 {
        factors += 1;
    }
    if factors % 2 == 0 {
        1
    } else {
        -1
    }
}
