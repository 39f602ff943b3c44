//! Turning rectangular arrays of parallel saturated chains into symmetric
//! chains by peeling perimeters.
//!
//! A row of `k + 1` chains of length `L`, chain `j` starting at rank
//! `r0 + j`, is regrouped into `D_0, ..., D_min(k, L-1)`: `D_t` climbs chain
//! `t` for `L - t` elements and then steps across chains `t+1, ..., k` at
//! position `L - 1 - t`. A grid is handled column by column and then once
//! more across the columns, one group per peel level.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::lattice::{ConcreteChain, LatticeVector};

/// Exact half-integer, stored doubled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInt(i64);

impl HalfInt {
    pub fn from_twice(twice: i64) -> Self {
        Self(twice)
    }

    pub fn twice(self) -> i64 {
        self.0
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("no chains")]
    Empty,
    #[error("expected {expected} chains, found {found}")]
    Count { expected: usize, found: usize },
    #[error("chain {index} has length {found}, expected {expected}")]
    Length {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("chain {index} starts at rank {found}, expected {expected}")]
    StartRank {
        index: usize,
        expected: i64,
        found: i64,
    },
    #[error("chain {index} is not saturated")]
    NotSaturated { index: usize },
    #[error("vector {vector} lies on more than one chain")]
    Overlap { vector: LatticeVector },
    #[error("chains {index} and {next} are not adjacent at position {position}")]
    NotAdjacent {
        index: usize,
        next: usize,
        position: usize,
    },
    #[error("rows are centered at {found}, not {expected}")]
    Asymmetric { expected: HalfInt, found: HalfInt },
}

/// `chains[j]` starts at rank `base_rank + j`; position `s` of chain `j` is
/// covered by position `s` of chain `j + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelRow {
    chains: Vec<ConcreteChain>,
    base_rank: i64,
    center: HalfInt,
}

/// `chains[u][v]` starts at rank `base_rank + u + v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelGrid {
    chains: Vec<Vec<ConcreteChain>>,
    base_rank: i64,
    center: HalfInt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpectedShape {
    Row,
    Grid { rows: usize, cols: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Parallel {
    Row(ParallelRow),
    Grid(ParallelGrid),
}

fn start_rank(c: &ConcreteChain) -> i64 {
    c.first().rank() as i64
}

fn check_common(chains: &[&ConcreteChain]) -> Result<usize, BuildError> {
    let first = chains.first().ok_or(BuildError::Empty)?;
    let len = first.len();
    let mut seen = BTreeSet::new();
    for (index, c) in chains.iter().enumerate() {
        if c.len() != len {
            return Err(BuildError::Length {
                index,
                expected: len,
                found: c.len(),
            });
        }
        if !c.is_saturated() {
            return Err(BuildError::NotSaturated { index });
        }
        for v in c.elements() {
            if !seen.insert(v.clone()) {
                return Err(BuildError::Overlap { vector: v.clone() });
            }
        }
    }
    Ok(len)
}

fn check_adjacent(
    lower: &ConcreteChain,
    upper: &ConcreteChain,
    index: usize,
    next: usize,
) -> Result<(), BuildError> {
    for (position, (a, b)) in lower.elements().iter().zip(upper.elements()).enumerate() {
        if !a.is_covered_by(b) {
            return Err(BuildError::NotAdjacent {
                index,
                next,
                position,
            });
        }
    }
    Ok(())
}

impl ParallelRow {
    /// Orders the chains by start rank and checks the row conditions.
    pub fn new(mut chains: Vec<ConcreteChain>, center: HalfInt) -> Result<Self, BuildError> {
        chains.sort_by_key(start_rank);
        let row = Self::unchecked_center(chains)?;
        let found = row.own_center();
        if found != center {
            return Err(BuildError::Asymmetric {
                expected: center,
                found,
            });
        }
        Ok(Self { center, ..row })
    }

    /// A row whose center is whatever its ranks give.
    fn unchecked_center(chains: Vec<ConcreteChain>) -> Result<Self, BuildError> {
        let refs: Vec<&ConcreteChain> = chains.iter().collect();
        let len = check_common(&refs)?;
        if len == 0 {
            return Err(BuildError::Length {
                index: 0,
                expected: 1,
                found: 0,
            });
        }
        let base_rank = start_rank(&chains[0]);
        for (index, c) in chains.iter().enumerate() {
            let expected = base_rank + index as i64;
            if start_rank(c) != expected {
                return Err(BuildError::StartRank {
                    index,
                    expected,
                    found: start_rank(c),
                });
            }
        }
        for j in 1..chains.len() {
            check_adjacent(&chains[j - 1], &chains[j], j - 1, j)?;
        }
        let k = chains.len() as i64 - 1;
        let center = HalfInt(2 * base_rank + k + len as i64 - 1);
        Ok(Self {
            chains,
            base_rank,
            center,
        })
    }

    fn own_center(&self) -> HalfInt {
        HalfInt(2 * self.base_rank + self.chains.len() as i64 - 1 + self.chain_len() as i64 - 1)
    }

    pub fn chains(&self) -> &[ConcreteChain] {
        &self.chains
    }

    pub fn base_rank(&self) -> i64 {
        self.base_rank
    }

    pub fn center(&self) -> HalfInt {
        self.center
    }

    pub fn chain_len(&self) -> usize {
        self.chains[0].len()
    }
}

impl ParallelGrid {
    /// Orders each row and the rows themselves by start rank and checks the
    /// grid conditions.
    pub fn new(mut chains: Vec<Vec<ConcreteChain>>, center: HalfInt) -> Result<Self, BuildError> {
        if chains.is_empty() || chains[0].is_empty() {
            return Err(BuildError::Empty);
        }
        for row in &mut chains {
            row.sort_by_key(start_rank);
        }
        chains.sort_by_key(|row| row.first().map(start_rank));
        let cols = chains[0].len();
        for row in &chains {
            if row.len() != cols {
                return Err(BuildError::Count {
                    expected: cols,
                    found: row.len(),
                });
            }
        }
        let flat: Vec<&ConcreteChain> = chains.iter().flatten().collect();
        let len = check_common(&flat)?;
        if len == 0 {
            return Err(BuildError::Length {
                index: 0,
                expected: 1,
                found: 0,
            });
        }
        let base_rank = start_rank(&chains[0][0]);
        for (u, row) in chains.iter().enumerate() {
            for (v, c) in row.iter().enumerate() {
                let index = u * cols + v;
                let expected = base_rank + (u + v) as i64;
                if start_rank(c) != expected {
                    return Err(BuildError::StartRank {
                        index,
                        expected,
                        found: start_rank(c),
                    });
                }
                if v + 1 < cols {
                    check_adjacent(c, &row[v + 1], index, index + 1)?;
                }
                if u + 1 < chains.len() {
                    check_adjacent(c, &chains[u + 1][v], index, index + cols)?;
                }
            }
        }
        let found = HalfInt(2 * base_rank + (chains.len() - 1 + cols - 1 + len - 1) as i64);
        if found != center {
            return Err(BuildError::Asymmetric {
                expected: center,
                found,
            });
        }
        Ok(Self {
            chains,
            base_rank,
            center,
        })
    }

    pub fn rows(&self) -> usize {
        self.chains.len()
    }

    pub fn cols(&self) -> usize {
        self.chains[0].len()
    }

    pub fn chain_len(&self) -> usize {
        self.chains[0][0].len()
    }

    pub fn center(&self) -> HalfInt {
        self.center
    }

    pub fn chains(&self) -> &[Vec<ConcreteChain>] {
        &self.chains
    }
}

/// Checks a flat chain list against the expected shape. Grid input is
/// row-major.
pub fn validate_parallel(
    chains: Vec<ConcreteChain>,
    shape: ExpectedShape,
    center: HalfInt,
) -> Result<Parallel, BuildError> {
    match shape {
        ExpectedShape::Row => ParallelRow::new(chains, center).map(Parallel::Row),
        ExpectedShape::Grid { rows, cols } => {
            if chains.len() != rows * cols {
                return Err(BuildError::Count {
                    expected: rows * cols,
                    found: chains.len(),
                });
            }
            let mut it = chains.into_iter();
            let grid = (0..rows)
                .map(|_| it.by_ref().take(cols).collect())
                .collect();
            ParallelGrid::new(grid, center).map(Parallel::Grid)
        }
    }
}

/// Peels a validated row; output ordered by peel level.
fn peel(chains: &[ConcreteChain]) -> Vec<ConcreteChain> {
    let k = chains.len() - 1;
    let len = chains[0].len();
    let mut out = Vec::with_capacity(k.min(len - 1) + 1);
    for t in 0..=k.min(len - 1) {
        let top = len - 1 - t;
        let mut elements: Vec<LatticeVector> = chains[t].elements()[..=top].to_vec();
        elements.extend(chains[t + 1..].iter().map(|c| c.elements()[top].clone()));
        out.push(ConcreteChain::from_unchecked(elements));
    }
    out
}

/// Symmetric chains `D_0, D_1, ...` with `|D_t| = L + k - 2t`.
pub fn row_scd(row: &ParallelRow) -> Vec<ConcreteChain> {
    peel(&row.chains)
}

/// Columns first, then each peel level across the columns. Output ordered
/// by column peel level, then row peel level.
pub fn grid_scd(grid: &ParallelGrid) -> Vec<ConcreteChain> {
    let cols: Vec<Vec<ConcreteChain>> = (0..grid.cols())
        .map(|v| {
            let column: Vec<ConcreteChain> = grid.chains.iter().map(|row| row[v].clone()).collect();
            peel(&column)
        })
        .collect();
    let levels = cols[0].len();
    let mut out = Vec::new();
    for t in 0..levels {
        let group: Vec<ConcreteChain> = cols.iter().map(|c| c[t].clone()).collect();
        out.extend(peel(&group));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[u32], n: u32) -> LatticeVector {
        LatticeVector::new(c.to_vec(), n).unwrap()
    }

    fn chain(cs: &[&[u32]], n: u32) -> ConcreteChain {
        ConcreteChain::new(cs.iter().map(|c| v(c, n)).collect()).unwrap()
    }

    #[test]
    fn single_chain_row() {
        let c = chain(&[&[0], &[1], &[2]], 2);
        let row = ParallelRow::new(vec![c.clone()], HalfInt::from_twice(2)).unwrap();
        assert_eq!(row_scd(&row), vec![c]);
    }

    #[test]
    fn two_by_two_row() {
        // L(2,2): rows (0,1)<(0,2) and (1,1)<(1,2), centered at rank 2
        let a = chain(&[&[0, 1], &[0, 2]], 2);
        let b = chain(&[&[1, 1], &[1, 2]], 2);
        let row = ParallelRow::new(vec![b, a], HalfInt::from_twice(4)).unwrap();
        let out = row_scd(&row);
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].len(), 3);
        assert_eq!(out[1].len(), 1);
        assert!(out
            .iter()
            .all(|c| c.is_saturated() && c.end_rank_sum() == 4));
    }

    #[test]
    fn validation_errors() {
        let a = chain(&[&[0, 1], &[0, 2]], 2);
        let b = chain(&[&[1, 1], &[1, 2]], 2);
        assert!(matches!(
            ParallelRow::new(vec![a.clone(), b.clone()], HalfInt::from_twice(5)),
            Err(BuildError::Asymmetric { .. })
        ));
        assert!(matches!(
            ParallelRow::new(vec![a.clone(), a.clone()], HalfInt::from_twice(4)),
            Err(BuildError::Overlap { .. })
        ));
        let c = chain(&[&[1, 1], &[1, 2], &[2, 2]], 2);
        assert!(matches!(
            ParallelRow::new(vec![a, c], HalfInt::from_twice(4)),
            Err(BuildError::Length { .. })
        ));
    }

    #[test]
    fn two_rank_example() {
        // two disjoint 3-chains from ranks 2 and 3, center 7/2
        let a = chain(&[&[0, 0, 2], &[0, 1, 2], &[0, 2, 2]], 3);
        let b = chain(&[&[0, 0, 3], &[0, 1, 3], &[0, 2, 3]], 3);
        let row = ParallelRow::new(vec![a, b], HalfInt::from_twice(7)).unwrap();
        assert_eq!(row.base_rank(), 2);
        assert_eq!(row.center().to_string(), "7/2");
    }

    #[test]
    fn grid_of_points() {
        // 2x2 grid of single elements in L(2,2): (0,1),(0,2),(1,1),(1,2)
        let g = vec![
            vec![chain(&[&[0, 1]], 2), chain(&[&[0, 2]], 2)],
            vec![chain(&[&[1, 1]], 2), chain(&[&[1, 2]], 2)],
        ];
        let grid = ParallelGrid::new(g, HalfInt::from_twice(4)).unwrap();
        let out = grid_scd(&grid);
        let mut lens: Vec<usize> = out.iter().map(ConcreteChain::len).collect();
        lens.sort();
        assert_eq!(lens, vec![1, 3]);
    }
}
