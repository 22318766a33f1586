//! Filtered complexes over F2 and the column reduction producing barcodes.

use std::collections::BTreeMap;

use crate::bars::{Bar, Barcode};
use crate::error::{Error, Result};

/// A cell in a filtered complex: an id, a dimension, a birth value and the
/// ids of its boundary cells.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredCell {
    pub id: usize,
    pub dim: u32,
    pub birth: f64,
    pub boundary: Vec<usize>,
}

/// An ordered filtered complex with F2 boundaries.
///
/// Construction validates the filtration axioms: boundary cells precede the
/// cell and have strictly smaller dimension, births are non-negative and
/// non-decreasing along the order, and the boundary of a boundary vanishes
/// over F2.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredComplex {
    cells: Vec<FilteredCell>,
    index_of: BTreeMap<usize, usize>,
}

impl FilteredComplex {
    pub fn new(cells: Vec<FilteredCell>) -> Result<FilteredComplex> {
        let mut index_of = BTreeMap::new();
        for (pos, cell) in cells.iter().enumerate() {
            if index_of.insert(cell.id, pos).is_some() {
                return Err(Error::InvalidComplex(format!("duplicate id {}", cell.id)));
            }
        }
        let mut prev_birth = 0.0_f64;
        for (pos, cell) in cells.iter().enumerate() {
            if !cell.birth.is_finite() || cell.birth < 0.0 {
                return Err(Error::InvalidComplex(format!(
                    "cell {} has invalid birth {}",
                    cell.id, cell.birth
                )));
            }
            if cell.birth < prev_birth {
                return Err(Error::InvalidComplex(format!(
                    "births decrease at cell {}",
                    cell.id
                )));
            }
            prev_birth = cell.birth;
            for &bid in &cell.boundary {
                let bpos = *index_of.get(&bid).ok_or_else(|| {
                    Error::InvalidComplex(format!("cell {} has unknown boundary {}", cell.id, bid))
                })?;
                if bpos >= pos {
                    return Err(Error::InvalidComplex(format!(
                        "boundary {} does not precede cell {}",
                        bid, cell.id
                    )));
                }
                if cells[bpos].dim >= cell.dim {
                    return Err(Error::InvalidComplex(format!(
                        "boundary {} of cell {} must have smaller dimension",
                        bid, cell.id
                    )));
                }
            }
            let mut dd: Vec<usize> = Vec::new();
            for &bid in &cell.boundary {
                for &bbid in &cells[index_of[&bid]].boundary {
                    xor_insert(&mut dd, bbid);
                }
            }
            if !dd.is_empty() {
                return Err(Error::InvalidComplex(format!(
                    "boundary of boundary of cell {} is nonzero over F2",
                    cell.id
                )));
            }
        }
        Ok(FilteredComplex { cells, index_of })
    }

    pub fn cells(&self) -> &[FilteredCell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// All distinct birth values, sorted.
    pub fn birth_spectrum(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.cells.iter().map(|c| c.birth).collect();
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| a.to_bits() == b.to_bits());
        v
    }

    /// Standard left-to-right column reduction over F2, all homological
    /// degrees merged into one ungraded barcode. A reduced column pairs the
    /// creator cell at its pivot with the destroyer cell owning the column;
    /// zero-length pairs (equal births) are discarded, unpaired creators give
    /// infinite bars.
    pub fn reduce(&self) -> Barcode {
        let graded = self.reduce_graded();
        let mut bars = Vec::new();
        for (_, code) in graded {
            bars.extend_from_slice(code.bars());
        }
        Barcode::new(bars)
    }

    /// Column reduction keeping bars separated by homological degree.
    /// Degree-by-degree bookkeeping is off the main path; `reduce` is the
    /// default entry point.
    pub fn reduce_graded(&self) -> BTreeMap<u32, Barcode> {
        let n = self.cells.len();
        let mut columns: Vec<Vec<usize>> = Vec::with_capacity(n);
        for cell in &self.cells {
            let mut col: Vec<usize> = cell.boundary.iter().map(|id| self.index_of[id]).collect();
            col.sort_unstable();
            columns.push(col);
        }
        let mut pivot_owner: Vec<Option<usize>> = vec![None; n];
        let mut paired: Vec<bool> = vec![false; n];
        let mut bars_by_dim: BTreeMap<u32, Vec<Bar>> = BTreeMap::new();
        for j in 0..n {
            while let Some(&low) = columns[j].last() {
                match pivot_owner[low] {
                    Some(i) => {
                        let (a, b) = split_two(&mut columns, i, j);
                        xor_columns(b, a);
                    }
                    None => {
                        pivot_owner[low] = Some(j);
                        paired[low] = true;
                        paired[j] = true;
                        let birth = self.cells[low].birth;
                        let death = self.cells[j].birth;
                        if death > birth {
                            bars_by_dim
                                .entry(self.cells[low].dim)
                                .or_default()
                                .push(Bar::new(birth, death, 1).expect("validated endpoints"));
                        }
                        break;
                    }
                }
            }
        }
        for j in 0..n {
            if columns[j].is_empty() && !paired[j] {
                bars_by_dim.entry(self.cells[j].dim).or_default().push(
                    Bar::new(self.cells[j].birth, f64::INFINITY, 1).expect("validated endpoints"),
                );
            }
        }
        bars_by_dim
            .into_iter()
            .map(|(d, bars)| (d, Barcode::new(bars)))
            .collect()
    }
}

fn split_two(columns: &mut [Vec<usize>], i: usize, j: usize) -> (&Vec<usize>, &mut Vec<usize>) {
    debug_assert!(i < j);
    let (left, right) = columns.split_at_mut(j);
    (&left[i], &mut right[0])
}

// symmetric difference of sorted index vectors
fn xor_columns(target: &mut Vec<usize>, other: &[usize]) {
    let mut merged = Vec::with_capacity(target.len() + other.len());
    let (mut a, mut b) = (0, 0);
    while a < target.len() && b < other.len() {
        match target[a].cmp(&other[b]) {
            std::cmp::Ordering::Less => {
                merged.push(target[a]);
                a += 1;
            }
            std::cmp::Ordering::Greater => {
                merged.push(other[b]);
                b += 1;
            }
            std::cmp::Ordering::Equal => {
                a += 1;
                b += 1;
            }
        }
    }
    merged.extend_from_slice(&target[a..]);
    merged.extend_from_slice(&other[b..]);
    *target = merged;
}

fn xor_insert(set: &mut Vec<usize>, v: usize) {
    match set.binary_search(&v) {
        Ok(i) => {
            set.remove(i);
        }
        Err(i) => set.insert(i, v),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bars::INF;

    fn cell(id: usize, dim: u32, birth: f64, boundary: &[usize]) -> FilteredCell {
        FilteredCell {
            id,
            dim,
            birth,
            boundary: boundary.to_vec(),
        }
    }

    #[test]
    fn single_vertex() {
        let f = FilteredComplex::new(vec![cell(0, 0, 0.0, &[])]).unwrap();
        assert_eq!(f.reduce(), Barcode::from_pairs(&[(0.0, INF)]).unwrap());
    }

    #[test]
    fn edge_joins_two_vertices() {
        let f = FilteredComplex::new(vec![
            cell(0, 0, 0.0, &[]),
            cell(1, 0, 1.0, &[]),
            cell(2, 1, 2.0, &[0, 1]),
        ])
        .unwrap();
        assert_eq!(
            f.reduce(),
            Barcode::from_pairs(&[(0.0, INF), (1.0, 2.0)]).unwrap()
        );
    }

    #[test]
    fn filled_triangle() {
        let f = FilteredComplex::new(vec![
            cell(0, 0, 0.0, &[]),
            cell(1, 0, 0.0, &[]),
            cell(2, 0, 0.0, &[]),
            cell(3, 1, 1.0, &[0, 1]),
            cell(4, 1, 1.0, &[1, 2]),
            cell(5, 1, 1.0, &[0, 2]),
            cell(6, 2, 2.0, &[3, 4, 5]),
        ])
        .unwrap();
        let expected = Barcode::new(vec![
            Bar::new(0.0, INF, 1).unwrap(),
            Bar::new(0.0, 1.0, 2).unwrap(),
            Bar::new(1.0, 2.0, 1).unwrap(),
        ]);
        assert_eq!(f.reduce(), expected);
    }

    #[test]
    fn graded_mode_splits_by_degree() {
        let f = FilteredComplex::new(vec![
            cell(0, 0, 0.0, &[]),
            cell(1, 0, 0.0, &[]),
            cell(2, 1, 1.0, &[0, 1]),
            cell(3, 1, 1.5, &[0, 1]),
        ])
        .unwrap();
        let graded = f.reduce_graded();
        // degree 0: one infinite class and one merge; degree 1: the loop made
        // by the two parallel edges
        assert_eq!(
            graded[&0],
            Barcode::from_pairs(&[(0.0, INF), (0.0, 1.0)]).unwrap()
        );
        assert_eq!(graded[&1], Barcode::from_pairs(&[(1.5, INF)]).unwrap());
    }

    #[test]
    fn zero_length_pairs_are_discarded() {
        let f = FilteredComplex::new(vec![
            cell(0, 0, 0.0, &[]),
            cell(1, 0, 0.0, &[]),
            cell(2, 1, 0.0, &[0, 1]),
        ])
        .unwrap();
        assert_eq!(f.reduce(), Barcode::from_pairs(&[(0.0, INF)]).unwrap());
    }

    #[test]
    fn validation_rejects_malformed_complexes() {
        // boundary after the cell
        assert!(FilteredComplex::new(vec![cell(0, 1, 0.0, &[1]), cell(1, 0, 0.0, &[]),]).is_err());
        // decreasing births
        assert!(FilteredComplex::new(vec![cell(0, 0, 1.0, &[]), cell(1, 0, 0.5, &[]),]).is_err());
        // boundary dimension not smaller
        assert!(FilteredComplex::new(vec![cell(0, 1, 0.0, &[]), cell(1, 1, 0.0, &[0]),]).is_err());
        // duplicate ids
        assert!(FilteredComplex::new(vec![cell(0, 0, 0.0, &[]), cell(0, 0, 0.0, &[]),]).is_err());
        // dd != 0: a "triangle" with only two edges on three vertices
        assert!(FilteredComplex::new(vec![
            cell(0, 0, 0.0, &[]),
            cell(1, 0, 0.0, &[]),
            cell(2, 0, 0.0, &[]),
            cell(3, 1, 0.0, &[0, 1]),
            cell(4, 1, 0.0, &[1, 2]),
            cell(5, 2, 1.0, &[3, 4]),
        ])
        .is_err());
    }
}
