//! Unit-roof suspension of a hyperbolic toral automorphism: pseudo-orbit
//! defects and constructive shadowing.
//!
//! Shadowing solves the linear conjugacy equation for the section return map
//! in stable/unstable eigencoordinates (explicit geometric series), refines
//! the corrections by Newton iteration, and then rounds to an exact rational
//! periodic point of the integer matrix, verified in exact arithmetic.

use crate::error::{Error, Result};
use crate::util::SplitMix64;

/// Periods beyond this make exact integer arithmetic in the universal cover
/// unreliable; shadowing refuses them explicitly.
const MAX_SYMBOLIC_PERIOD: usize = 60;
/// Certified distance constant: a shadow must land within this multiple of
/// the defect bound.
const SHADOW_DISTANCE_CONSTANT: f64 = 10.0;
const RESIDUAL_BOUND: f64 = 1e-10;

/// One sample of a loop in the suspension: a torus point and a fiber
/// coordinate in [0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusSample {
    pub base: [f64; 2],
    pub fiber: f64,
}

/// A closed curve sampled at a uniform time step.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusLoop {
    pub samples: Vec<TorusSample>,
    pub dt: f64,
}

/// An exact periodic orbit of the section map: points `numerators / denominator`
/// in the unit square, cycled by the matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactOrbit {
    pub numerators: Vec<[i128; 2]>,
    pub denominator: i128,
}

impl ExactOrbit {
    pub fn period(&self) -> usize {
        self.numerators.len()
    }

    pub fn point(&self, j: usize) -> [f64; 2] {
        let q = self.numerators[j % self.numerators.len()];
        [
            q[0] as f64 / self.denominator as f64,
            q[1] as f64 / self.denominator as f64,
        ]
    }
}

/// Outcome of a shadowing run.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowedOrbit {
    pub orbit: ExactOrbit,
    /// Sup distance between the pseudo-orbit section points and the orbit.
    pub section_distance: f64,
    /// Defect of the returned orbit, evaluated on a rebuilt sampled loop.
    pub residual_defect: f64,
    pub newton_iterations: u32,
}

/// Suspension flow (unit roof) over a hyperbolic toral automorphism.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusFlow {
    matrix: [[i64; 2]; 2],
}

impl TorusFlow {
    pub fn new(matrix: [[i64; 2]; 2]) -> Result<TorusFlow> {
        let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
        if det.abs() != 1 {
            return Err(Error::InvalidFlow(format!(
                "matrix must have determinant +-1, got {det}"
            )));
        }
        let trace = matrix[0][0] + matrix[1][1];
        if trace.abs() <= 2 {
            return Err(Error::InvalidFlow(format!(
                "matrix must be hyperbolic (|trace| > 2), got trace {trace}"
            )));
        }
        Ok(TorusFlow { matrix })
    }

    /// Arnold cat map [[2, 1], [1, 1]].
    pub fn cat_map() -> TorusFlow {
        TorusFlow::new([[2, 1], [1, 1]]).expect("cat map is hyperbolic")
    }

    pub fn matrix(&self) -> [[i64; 2]; 2] {
        self.matrix
    }

    fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.matrix[0][0] as f64 * v[0] + self.matrix[0][1] as f64 * v[1],
            self.matrix[1][0] as f64 * v[0] + self.matrix[1][1] as f64 * v[1],
        ]
    }

    fn apply_inverse(&self, v: [f64; 2]) -> [f64; 2] {
        let det =
            (self.matrix[0][0] * self.matrix[1][1] - self.matrix[0][1] * self.matrix[1][0]) as f64;
        [
            (self.matrix[1][1] as f64 * v[0] - self.matrix[0][1] as f64 * v[1]) / det,
            (-self.matrix[1][0] as f64 * v[0] + self.matrix[0][0] as f64 * v[1]) / det,
        ]
    }

    fn eigen(&self) -> Eigen {
        let a = self.matrix[0][0] as f64;
        let b = self.matrix[0][1] as f64;
        let c = self.matrix[1][0] as f64;
        let d = self.matrix[1][1] as f64;
        let tr = a + d;
        let det = a * d - b * c;
        let disc = (tr * tr - 4.0 * det).sqrt();
        let l1 = 0.5 * (tr + disc);
        let l2 = 0.5 * (tr - disc);
        let (lu, ls) = if l1.abs() >= l2.abs() {
            (l1, l2)
        } else {
            (l2, l1)
        };
        let vector_for = |l: f64| -> [f64; 2] {
            // pick the better-conditioned row
            let v = if b.abs() + (l - a).abs() >= c.abs() + (l - d).abs() {
                [b, l - a]
            } else {
                [l - d, c]
            };
            let norm = (v[0] * v[0] + v[1] * v[1]).sqrt();
            [v[0] / norm, v[1] / norm]
        };
        Eigen {
            lambda_u: lu,
            lambda_s: ls,
            e_u: vector_for(lu),
            e_s: vector_for(ls),
        }
    }

    /// Max over samples of the norm of (centered discrete derivative minus
    /// the suspension vector field). Chart transport through the roof gluing
    /// is applied before differencing.
    pub fn pseudo_orbit_defect(&self, l: &TorusLoop) -> Result<f64> {
        self.validate_loop(l)?;
        let n = l.samples.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            let prev = l.samples[(i + n - 1) % n];
            let here = l.samples[i];
            let next = l.samples[(i + 1) % n];
            let (prev_base, prev_fiber) = self.transport_to_chart(&here, &prev, -1);
            let (next_base, next_fiber) = self.transport_to_chart(&here, &next, 1);
            let dx = [
                torus_delta(next_base[0], prev_base[0]),
                torus_delta(next_base[1], prev_base[1]),
            ];
            let rate_x = [dx[0] / (2.0 * l.dt), dx[1] / (2.0 * l.dt)];
            let rate_f = (next_fiber - prev_fiber) / (2.0 * l.dt);
            let defect =
                (rate_x[0] * rate_x[0] + rate_x[1] * rate_x[1] + (rate_f - 1.0).powi(2)).sqrt();
            worst = worst.max(defect);
        }
        Ok(worst)
    }

    fn validate_loop(&self, l: &TorusLoop) -> Result<()> {
        if l.samples.len() < 3 {
            return Err(Error::InvalidPseudoOrbit(
                "need at least three samples".into(),
            ));
        }
        if !(l.dt > 0.0 && l.dt <= 0.2) {
            return Err(Error::InvalidPseudoOrbit(
                "uniform step must lie in (0, 0.2]".into(),
            ));
        }
        for s in &l.samples {
            if !(0.0..1.0).contains(&s.fiber) || !s.base[0].is_finite() || !s.base[1].is_finite() {
                return Err(Error::InvalidPseudoOrbit(
                    "samples must have finite base and fiber in [0, 1)".into(),
                ));
            }
        }
        Ok(())
    }

    /// Express a neighbor sample in the chart of the center sample,
    /// unwrapping at most one roof crossing in the indicated direction.
    fn transport_to_chart(
        &self,
        center: &TorusSample,
        neighbor: &TorusSample,
        direction: i32,
    ) -> ([f64; 2], f64) {
        let diff = neighbor.fiber - center.fiber;
        if direction > 0 && diff < -0.5 {
            // neighbor already wrapped forward: pull it back
            ((self.apply_inverse(neighbor.base)), neighbor.fiber + 1.0)
        } else if direction < 0 && diff > 0.5 {
            // neighbor sits before the previous crossing: push it forward
            ((self.apply(neighbor.base)), neighbor.fiber - 1.0)
        } else {
            (neighbor.base, neighbor.fiber)
        }
    }

    /// Torus points where the loop crosses the roof, in order, expressed in
    /// the post-crossing chart.
    fn section_points(&self, l: &TorusLoop) -> Vec<[f64; 2]> {
        let n = l.samples.len();
        let mut out = Vec::new();
        for i in 0..n {
            let here = l.samples[i];
            let next = l.samples[(i + 1) % n];
            if next.fiber - here.fiber < -0.5 {
                // crossing between i and i+1; interpolate in the pre-crossing chart
                let lifted = self.apply_inverse(next.base);
                let span = (next.fiber + 1.0) - here.fiber;
                let f = if span > 0.0 {
                    (1.0 - here.fiber) / span
                } else {
                    0.0
                };
                let at = [
                    here.base[0] + f * torus_delta(lifted[0], here.base[0]),
                    here.base[1] + f * torus_delta(lifted[1], here.base[1]),
                ];
                let crossed = self.apply(at);
                out.push([wrap_unit(crossed[0]), wrap_unit(crossed[1])]);
            }
        }
        out
    }

    /// Shadow a closed pseudo-orbit: returns the unique nearby exact periodic
    /// orbit of the section map, or fails if the defect exceeds `eta`, the
    /// correction does not converge, or the verified orbit is not within the
    /// certified distance.
    pub fn shadow(&self, pseudo: &TorusLoop, eta: f64) -> Result<ShadowedOrbit> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::InvalidPseudoOrbit(format!(
                "eta must be positive, got {eta}"
            )));
        }
        let defect = self.pseudo_orbit_defect(pseudo)?;
        if defect > eta {
            return Err(Error::InvalidPseudoOrbit(format!(
                "defect {defect:.3e} exceeds eta {eta:.3e}"
            )));
        }
        let section = self.section_points(pseudo);
        let n = section.len();
        if n == 0 {
            return Err(Error::ShadowingFailed(
                "pseudo-orbit never crosses the roof".into(),
            ));
        }
        if n > MAX_SYMBOLIC_PERIOD {
            return Err(Error::ShadowingFailed(format!(
                "period {n} exceeds the exact-arithmetic cap {MAX_SYMBOLIC_PERIOD}"
            )));
        }

        // corrections via the geometric-series solution of w_{j+1} = A w_j + e_j
        let mut points = section.clone();
        let mut iterations = 0u32;
        let mut converged = false;
        for _ in 0..12 {
            iterations += 1;
            let errors: Vec<[f64; 2]> = (0..n)
                .map(|j| {
                    let image = self.apply(points[j]);
                    let target = points[(j + 1) % n];
                    [
                        torus_delta(image[0], target[0]),
                        torus_delta(image[1], target[1]),
                    ]
                })
                .collect();
            let worst = errors
                .iter()
                .map(|e| (e[0] * e[0] + e[1] * e[1]).sqrt())
                .fold(0.0, f64::max);
            if worst <= 1e-13 {
                converged = true;
                break;
            }
            let corrections = self.periodic_corrections(&errors);
            for j in 0..n {
                points[j][0] += corrections[j][0];
                points[j][1] += corrections[j][1];
            }
        }
        if !converged {
            return Err(Error::ShadowingFailed(
                "correction iteration did not converge within budget".into(),
            ));
        }

        let aligned = self.round_to_exact_orbit(&points)?;
        let section_distance = (0..n)
            .map(|j| {
                let q = aligned.point(j);
                let d = [
                    torus_delta(q[0], section[j][0]),
                    torus_delta(q[1], section[j][1]),
                ];
                (d[0] * d[0] + d[1] * d[1]).sqrt()
            })
            .fold(0.0, f64::max);
        let orbit = Self::canonicalize(aligned);
        if section_distance > SHADOW_DISTANCE_CONSTANT * eta {
            return Err(Error::ShadowingFailed(format!(
                "shadow distance {section_distance:.3e} exceeds {SHADOW_DISTANCE_CONSTANT} * eta"
            )));
        }
        let samples_per_segment = (1.0 / pseudo.dt).round().max(8.0) as usize;
        let rebuilt = self.orbit_loop(&orbit, samples_per_segment)?;
        let residual_defect = self.pseudo_orbit_defect(&rebuilt)?;
        if residual_defect > RESIDUAL_BOUND {
            return Err(Error::ShadowingFailed(format!(
                "residual defect {residual_defect:.3e} above bound {RESIDUAL_BOUND:.0e}"
            )));
        }
        Ok(ShadowedOrbit {
            orbit,
            section_distance,
            residual_defect,
            newton_iterations: iterations,
        })
    }

    /// Bounded periodic solution of `w_{j+1} = A w_j + e_j` split into
    /// unstable (summed over the future) and stable (summed over the past)
    /// eigencomponents. The correction is `-w`.
    fn periodic_corrections(&self, errors: &[[f64; 2]]) -> Vec<[f64; 2]> {
        let n = errors.len();
        let eig = self.eigen();
        let det = eig.e_u[0] * eig.e_s[1] - eig.e_u[1] * eig.e_s[0];
        let comp: Vec<(f64, f64)> = errors
            .iter()
            .map(|e| {
                let alpha = (e[0] * eig.e_s[1] - e[1] * eig.e_s[0]) / det;
                let beta = (eig.e_u[0] * e[1] - eig.e_u[1] * e[0]) / det;
                (alpha, beta)
            })
            .collect();
        let lu_inv = 1.0 / eig.lambda_u;
        let lu_inv_n = lu_inv.powi(n as i32);
        let ls_n = eig.lambda_s.powi(n as i32);
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            // unstable: w_j = -sum_{i>=0} lambda_u^-(i+1) alpha_{j+i} / (1 - lambda_u^-n)
            let mut acc_u = 0.0;
            let mut pow = lu_inv;
            for i in 0..n {
                acc_u += pow * comp[(j + i) % n].0;
                pow *= lu_inv;
            }
            let w_u = -acc_u / (1.0 - lu_inv_n);
            // stable: w_j = sum_{i=1..n} lambda_s^(i-1) beta_{j-i} / (1 - lambda_s^n)
            let mut acc_s = 0.0;
            let mut pow = 1.0;
            for i in 1..=n {
                acc_s += pow * comp[(j + n - i) % n].1;
                pow *= eig.lambda_s;
            }
            let w_s = acc_s / (1.0 - ls_n);
            out.push([
                w_u * eig.e_u[0] + w_s * eig.e_s[0],
                w_u * eig.e_u[1] + w_s * eig.e_s[1],
            ]);
        }
        out
    }

    /// Round a numerically periodic section sequence to the exact rational
    /// periodic orbit with the same lattice itinerary.
    fn round_to_exact_orbit(&self, points: &[[f64; 2]]) -> Result<ExactOrbit> {
        let n = points.len();
        let lattice_steps: Vec<[i128; 2]> = (0..n)
            .map(|j| {
                let image = self.apply(points[j]);
                let target = points[(j + 1) % n];
                [
                    (image[0] - target[0]).round() as i128,
                    (image[1] - target[1]).round() as i128,
                ]
            })
            .collect();
        // K = sum_j A^{n-1-j} k_j, assembled as K <- A K + k_j
        let a = self.int_matrix();
        let mut k_acc: [i128; 2] = [0, 0];
        for step in &lattice_steps {
            k_acc = mat_vec_i128(&a, &k_acc)?;
            k_acc[0] = k_acc[0]
                .checked_add(step[0])
                .ok_or(Error::Overflow("cover sum"))?;
            k_acc[1] = k_acc[1]
                .checked_add(step[1])
                .ok_or(Error::Overflow("cover sum"))?;
        }
        // (A^n - I) q_0 = K  =>  q_0 = adj(M) K / det(M)
        let mut m = mat_pow_i128(&a, n)?;
        m[0][0] -= 1;
        m[1][1] -= 1;
        let det = m[0][0]
            .checked_mul(m[1][1])
            .and_then(|x| m[0][1].checked_mul(m[1][0]).map(|y| x - y))
            .ok_or(Error::Overflow("cover determinant"))?;
        if det == 0 {
            return Err(Error::ShadowingFailed(
                "degenerate period for this matrix".into(),
            ));
        }
        let adj = [[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]];
        let raw = mat_vec_i128(&adj, &k_acc)?;
        let den = det.abs();
        let sign = if det > 0 { 1 } else { -1 };
        let mut q = [
            (sign * raw[0]).rem_euclid(den),
            (sign * raw[1]).rem_euclid(den),
        ];
        let mut numerators = Vec::with_capacity(n);
        for _ in 0..n {
            numerators.push(q);
            let next = mat_vec_i128(&a, &q)?;
            q = [next[0].rem_euclid(den), next[1].rem_euclid(den)];
        }
        // exact periodicity in the cover
        if q != numerators[0] {
            return Err(Error::ShadowingFailed(
                "rounded orbit is not exactly periodic".into(),
            ));
        }
        Ok(ExactOrbit {
            numerators,
            denominator: den,
        })
    }

    /// Rotate the point list so the lexicographically smallest point comes
    /// first: one canonical representative per geometric orbit.
    fn canonicalize(orbit: ExactOrbit) -> ExactOrbit {
        let n = orbit.numerators.len();
        let best = (0..n).min_by_key(|&i| orbit.numerators[i]).unwrap_or(0);
        let numerators = (0..n).map(|i| orbit.numerators[(best + i) % n]).collect();
        ExactOrbit {
            numerators,
            denominator: orbit.denominator,
        }
    }

    fn int_matrix(&self) -> [[i128; 2]; 2] {
        [
            [self.matrix[0][0] as i128, self.matrix[0][1] as i128],
            [self.matrix[1][0] as i128, self.matrix[1][1] as i128],
        ]
    }

    /// Sample the suspension loop of an exact orbit: the base point is
    /// constant along each fiber segment.
    pub fn orbit_loop(&self, orbit: &ExactOrbit, samples_per_segment: usize) -> Result<TorusLoop> {
        if samples_per_segment < 5 {
            return Err(Error::InvalidArgument(
                "need at least five samples per segment".into(),
            ));
        }
        let mut samples = Vec::with_capacity(orbit.period() * samples_per_segment);
        for j in 0..orbit.period() {
            let base = orbit.point(j);
            for k in 0..samples_per_segment {
                samples.push(TorusSample {
                    base,
                    fiber: k as f64 / samples_per_segment as f64,
                });
            }
        }
        Ok(TorusLoop {
            samples,
            dt: 1.0 / samples_per_segment as f64,
        })
    }

    /// Exact periodic point of period dividing `n`, nearest to `near` in the
    /// sense of the lattice rounding of `(A^n - I) near`.
    pub fn periodic_point_near(&self, n: usize, near: [f64; 2]) -> Result<ExactOrbit> {
        if n == 0 || n > MAX_SYMBOLIC_PERIOD {
            return Err(Error::InvalidArgument(format!(
                "period must lie in 1..={MAX_SYMBOLIC_PERIOD}"
            )));
        }
        let mut fake = Vec::with_capacity(n);
        let mut x = near;
        for _ in 0..n {
            fake.push(x);
            let y = self.apply(x);
            x = [wrap_unit(y[0]), wrap_unit(y[1])];
        }
        // the rounding machinery wants an approximately periodic sequence;
        // a random point is not one, so one exact correction pass pulls the
        // itinerary onto a periodic orbit first
        let errors: Vec<[f64; 2]> = (0..n)
            .map(|j| {
                let image = self.apply(fake[j]);
                let target = fake[(j + 1) % n];
                [
                    torus_delta(image[0], target[0]),
                    torus_delta(image[1], target[1]),
                ]
            })
            .collect();
        let corr = self.periodic_corrections(&errors);
        let corrected: Vec<[f64; 2]> = (0..n)
            .map(|j| [fake[j][0] + corr[j][0], fake[j][1] + corr[j][1]])
            .collect();
        Ok(Self::canonicalize(self.round_to_exact_orbit(&corrected)?))
    }

    /// Deterministic seeded pseudo-orbit: a random exact periodic orbit whose
    /// section points are perturbed so the loop defect stays below `eta`.
    /// Returns the loop together with the source orbit.
    pub fn seeded_pseudo_orbit(&self, seed: u64, eta: f64) -> Result<(TorusLoop, ExactOrbit)> {
        if !(eta > 0.0) {
            return Err(Error::InvalidArgument("eta must be positive".into()));
        }
        let mut rng = SplitMix64::new(seed.wrapping_mul(0x9e37_79b9).wrapping_add(1));
        let n = rng.range_usize(3, 12);
        let near = [rng.next_f64(), rng.next_f64()];
        let orbit = self.periodic_point_near(n, near)?;
        let delta = eta / 20.0;
        let samples_per_segment = 40;
        let noisy: Vec<[f64; 2]> = (0..orbit.period())
            .map(|j| {
                let p = orbit.point(j);
                [
                    wrap_unit(p[0] + rng.range_f64(-delta, delta)),
                    wrap_unit(p[1] + rng.range_f64(-delta, delta)),
                ]
            })
            .collect();
        let looped = self.loop_through_sections(&noisy, samples_per_segment);
        Ok((looped, orbit))
    }

    /// Build a sampled loop visiting the given section points: along segment
    /// `j` the base drifts linearly from `p_j` to `A^-1 p_{j+1}`, so the
    /// gluing is seamless and the defect is the largest drift speed.
    pub fn loop_through_sections(
        &self,
        section: &[[f64; 2]],
        samples_per_segment: usize,
    ) -> TorusLoop {
        let n = section.len();
        let mut samples = Vec::with_capacity(n * samples_per_segment);
        for j in 0..n {
            let from = section[j];
            let lifted = self.apply_inverse(section[(j + 1) % n]);
            let drift = [
                torus_delta(lifted[0], from[0]),
                torus_delta(lifted[1], from[1]),
            ];
            for k in 0..samples_per_segment {
                let f = k as f64 / samples_per_segment as f64;
                samples.push(TorusSample {
                    base: [
                        wrap_unit(from[0] + f * drift[0]),
                        wrap_unit(from[1] + f * drift[1]),
                    ],
                    fiber: f,
                });
            }
        }
        TorusLoop {
            samples,
            dt: 1.0 / samples_per_segment as f64,
        }
    }
}

struct Eigen {
    lambda_u: f64,
    lambda_s: f64,
    e_u: [f64; 2],
    e_s: [f64; 2],
}

/// Shortest representative of `a - b` modulo 1.
fn torus_delta(a: f64, b: f64) -> f64 {
    let d = a - b;
    d - d.round()
}

fn wrap_unit(x: f64) -> f64 {
    let w = x - x.floor();
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

fn mat_vec_i128(m: &[[i128; 2]; 2], v: &[i128; 2]) -> Result<[i128; 2]> {
    let a = m[0][0]
        .checked_mul(v[0])
        .and_then(|x| m[0][1].checked_mul(v[1]).and_then(|y| x.checked_add(y)))
        .ok_or(Error::Overflow("integer matrix action"))?;
    let b = m[1][0]
        .checked_mul(v[0])
        .and_then(|x| m[1][1].checked_mul(v[1]).and_then(|y| x.checked_add(y)))
        .ok_or(Error::Overflow("integer matrix action"))?;
    Ok([a, b])
}

fn mat_pow_i128(m: &[[i128; 2]; 2], n: usize) -> Result<[[i128; 2]; 2]> {
    let mut out = [[1i128, 0], [0, 1]];
    for _ in 0..n {
        out = mat_mul_i128(&out, m)?;
    }
    Ok(out)
}

fn mat_mul_i128(a: &[[i128; 2]; 2], b: &[[i128; 2]; 2]) -> Result<[[i128; 2]; 2]> {
    let mut out = [[0i128; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut acc: i128 = 0;
            for (k, row) in b.iter().enumerate() {
                acc = a[i][k]
                    .checked_mul(row[j])
                    .and_then(|v| acc.checked_add(v))
                    .ok_or(Error::Overflow("integer matrix power"))?;
            }
            out[i][j] = acc;
        }
    }
    Ok(out)
}
