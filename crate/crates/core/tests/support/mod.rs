//! Shared test oracles and random data generators.
//!
//! Everything here is deliberately independent of the library's own
//! algorithms: ranks come from dense F2 Gaussian elimination, traces from a
//! locally implemented matrix power, spectral radii from power iteration.

#![allow(dead_code)]

use bel_core::{Bar, Barcode, FilteredCell, FilteredComplex, Profile, Reparametrization};
use rand::RngExt;
use rand_chacha::ChaCha8Rng;

pub const INF: f64 = f64::INFINITY;

// ---------------------------------------------------------------------------
// dense F2 linear algebra on u64 bit masks (up to 64 cells)

/// Rank of a set of F2 vectors by Gaussian elimination.
pub fn f2_rank(vectors: &[u64]) -> usize {
    let mut basis: Vec<u64> = Vec::new();
    for &v in vectors {
        let mut v = v;
        for &b in &basis {
            let pivot = 63 - b.leading_zeros();
            if v >> pivot & 1 == 1 {
                v ^= b;
            }
        }
        if v != 0 {
            basis.push(v);
        }
    }
    basis.len()
}

/// Kernel basis of the linear map sending a chain (mask over the given cell
/// positions) to its boundary chain; vectors are combination masks.
fn f2_kernel(columns: &[(usize, u64)]) -> Vec<u64> {
    // (position, boundary mask); reduce left to right tracking combinations
    let mut pivots: Vec<(u64, u64)> = Vec::new(); // (reduced column, combination)
    let mut kernel = Vec::new();
    for &(pos, col) in columns {
        let mut col = col;
        let mut comb = 1u64 << pos;
        loop {
            if col == 0 {
                kernel.push(comb);
                break;
            }
            let low = 63 - col.leading_zeros();
            match pivots.iter().find(|(c, _)| 63 - c.leading_zeros() == low) {
                Some(&(c, cb)) => {
                    col ^= c;
                    comb ^= cb;
                }
                None => {
                    pivots.push((col, comb));
                    break;
                }
            }
        }
    }
    kernel
}

/// Rank of the inclusion-induced map on ungraded F2 homology between the
/// strict sublevel complexes at `s` and `t`.
pub fn oracle_rank(complex: &FilteredComplex, s: f64, t: f64) -> usize {
    assert!(s <= t);
    let cells = complex.cells();
    let in_s: Vec<usize> = (0..cells.len()).filter(|&i| cells[i].birth < s).collect();
    let in_t: Vec<usize> = (0..cells.len()).filter(|&i| cells[i].birth < t).collect();
    let index_of = |id: usize| cells.iter().position(|c| c.id == id).unwrap();
    let boundary_mask = |i: usize| -> u64 {
        cells[i]
            .boundary
            .iter()
            .fold(0u64, |m, &id| m | 1 << index_of(id))
    };
    // cycles of the s-complex
    let cols_s: Vec<(usize, u64)> = in_s.iter().map(|&i| (i, boundary_mask(i))).collect();
    let z_basis = f2_kernel(&cols_s);
    // boundaries of the t-complex: nonzero boundary columns span B_t
    let b_vectors: Vec<u64> = in_t
        .iter()
        .map(|&i| boundary_mask(i))
        .filter(|&m| m != 0)
        .collect();
    let dim_b = f2_rank(&b_vectors);
    let mut stacked = b_vectors;
    stacked.extend_from_slice(&z_basis);
    // rank of the induced map = dim(Z_s + B_t) - dim B_t
    f2_rank(&stacked) - dim_b
}

/// Representative parameter values: one point inside every component of the
/// complement of the birth spectrum (midpoints plus one point before and one
/// beyond).
pub fn sample_points(complex: &FilteredComplex) -> Vec<f64> {
    let spectrum = complex.birth_spectrum();
    if spectrum.is_empty() {
        return vec![0.0];
    }
    let mut pts = vec![spectrum[0] - 0.5];
    for w in spectrum.windows(2) {
        pts.push(0.5 * (w[0] + w[1]));
    }
    pts.push(spectrum[spectrum.len() - 1] + 0.5);
    pts
}

// ---------------------------------------------------------------------------
// transfer-matrix oracle

/// `tr(A^n)` by plain integer matrix powers.
pub fn trace_power_oracle(transition: &[Vec<u8>], n: usize) -> u128 {
    let dim = transition.len();
    let base: Vec<Vec<u128>> = transition
        .iter()
        .map(|row| row.iter().map(|&v| v as u128).collect())
        .collect();
    let mut power = base.clone();
    for _ in 1..n {
        let mut next = vec![vec![0u128; dim]; dim];
        for i in 0..dim {
            for k in 0..dim {
                if power[i][k] == 0 {
                    continue;
                }
                for j in 0..dim {
                    next[i][j] += power[i][k] * base[k][j];
                }
            }
        }
        power = next;
    }
    (0..dim).map(|i| power[i][i]).sum()
}

/// log2 of the spectral radius by power iteration.
pub fn log2_spectral_radius(transition: &[Vec<u8>]) -> f64 {
    let dim = transition.len();
    let mut v = vec![1.0f64; dim];
    let mut rate = 0.0;
    for _ in 0..2000 {
        let mut next = vec![0.0f64; dim];
        for i in 0..dim {
            for j in 0..dim {
                if transition[i][j] == 1 {
                    next[i] += v[j];
                }
            }
        }
        let norm: f64 = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        rate = norm;
        for x in &mut next {
            *x /= norm;
        }
        v = next;
    }
    rate.log2()
}

// ---------------------------------------------------------------------------
// random data generators (seeded, deterministic)

/// Random abstract simplicial complex with at most `max_cells` cells, valid
/// births on a dyadic grid, occasional birth ties.
pub fn random_complex(rng: &mut ChaCha8Rng, max_cells: usize) -> FilteredComplex {
    loop {
        let n_vertices = rng.random_range(1..=4usize);
        let mut cells: Vec<(u32, Vec<usize>, f64)> = Vec::new(); // (dim, boundary ids, birth)
        let mut births = vec![0.0f64; 0];
        for v in 0..n_vertices {
            let birth = rng.random_range(0..8) as f64 / 4.0;
            births.push(birth);
            let _ = v;
            cells.push((0, vec![], birth));
        }
        // candidate edges
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for a in 0..n_vertices {
            for b in a + 1..n_vertices {
                if rng.random_bool(0.6) {
                    edges.push((a, b));
                }
            }
        }
        let mut edge_id = std::collections::BTreeMap::new();
        for &(a, b) in &edges {
            if cells.len() >= max_cells {
                break;
            }
            let base = births[a].max(births[b]);
            let birth = if rng.random_bool(0.3) {
                base
            } else {
                base + rng.random_range(1..6) as f64 / 4.0
            };
            edge_id.insert((a, b), cells.len());
            cells.push((1, vec![a, b], birth));
        }
        // triangles on complete triples
        for a in 0..n_vertices {
            for b in a + 1..n_vertices {
                for c in b + 1..n_vertices {
                    if cells.len() >= max_cells {
                        break;
                    }
                    let (Some(&ab), Some(&bc), Some(&ac)) = (
                        edge_id.get(&(a, b)),
                        edge_id.get(&(b, c)),
                        edge_id.get(&(a, c)),
                    ) else {
                        continue;
                    };
                    if !rng.random_bool(0.5) {
                        continue;
                    }
                    let base = cells[ab].2.max(cells[bc].2).max(cells[ac].2);
                    let birth = if rng.random_bool(0.3) {
                        base
                    } else {
                        base + rng.random_range(1..4) as f64 / 4.0
                    };
                    cells.push((2, vec![ab, bc, ac], birth));
                }
            }
        }
        // order by (birth, dim, id); boundaries have smaller birth-or-equal
        // and strictly smaller dim, so they sort first
        let mut order: Vec<usize> = (0..cells.len()).collect();
        order.sort_by(|&i, &j| {
            cells[i]
                .2
                .total_cmp(&cells[j].2)
                .then(cells[i].0.cmp(&cells[j].0))
                .then(i.cmp(&j))
        });
        let rank_of: Vec<usize> = {
            let mut r = vec![0; cells.len()];
            for (rank, &i) in order.iter().enumerate() {
                r[i] = rank;
            }
            r
        };
        let filtered: Vec<FilteredCell> = order
            .iter()
            .map(|&i| FilteredCell {
                id: rank_of[i],
                dim: cells[i].0,
                birth: cells[i].2,
                boundary: cells[i].1.iter().map(|&b| rank_of[b]).collect(),
            })
            .collect();
        if let Ok(c) = FilteredComplex::new(filtered) {
            return c;
        }
    }
}

/// Random barcode on a dyadic grid: births in [0, 8], lengths in
/// [1/8, 4], some infinite bars, multiplicities up to 3.
pub fn random_barcode(rng: &mut ChaCha8Rng) -> Barcode {
    let n = rng.random_range(0..12usize);
    let bars = (0..n)
        .map(|_| {
            let birth = rng.random_range(0..64) as f64 / 8.0;
            let death = if rng.random_bool(0.2) {
                INF
            } else {
                birth + rng.random_range(1..32) as f64 / 8.0
            };
            Bar::new(birth, death, rng.random_range(1..=3u64)).unwrap()
        })
        .collect();
    Barcode::new(bars)
}

/// Random piecewise-linear reparametrization fixing the origin, with dyadic
/// knots and slopes.
pub fn random_piecewise_linear(rng: &mut ChaCha8Rng) -> Reparametrization {
    let segments = rng.random_range(2..=5usize);
    let mut knots = vec![(0.0, 0.0)];
    let (mut x, mut y) = (0.0f64, 0.0f64);
    for _ in 0..segments {
        let dx = rng.random_range(1..=8) as f64 / 2.0;
        let slope = [0.25, 0.5, 1.0, 1.5, 2.0, 4.0][rng.random_range(0..6usize)];
        x += dx;
        y += slope * dx;
        knots.push((x, y));
    }
    Reparametrization::piecewise_linear(&knots).unwrap()
}

/// Random profile: either quadratic or a spline sampled from a cubic with
/// non-negative third derivative.
pub fn random_profile(rng: &mut ChaCha8Rng) -> Profile {
    if rng.random_bool(0.5) {
        let a = rng.random_range(5..40) as f64 / 10.0;
        let rmax = 1.0 + rng.random_range(5..25) as f64 / 10.0;
        Profile::quadratic(a, rmax).unwrap()
    } else {
        random_spline_profile(rng)
    }
}

pub fn random_spline_profile(rng: &mut ChaCha8Rng) -> Profile {
    let rmax = 1.0 + rng.random_range(5..25) as f64 / 10.0;
    let quad = rng.random_range(2..20) as f64 / 10.0;
    let cubic = rng.random_range(0..15) as f64 / 10.0;
    let span = rmax - 1.0;
    let a = 2.0 * quad * span + 3.0 * cubic * span * span;
    let n_knots = rng.random_range(5..=9usize);
    let knots: Vec<(f64, f64)> = (0..=n_knots)
        .map(|k| {
            let r = 1.0 + span * k as f64 / n_knots as f64;
            let u = r - 1.0;
            (r, quad * u * u + cubic * u * u * u)
        })
        .collect();
    Profile::spline(a, rmax, &knots).unwrap()
}
