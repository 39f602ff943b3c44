//! Young's lattice `L(m, n)`: weakly increasing `m`-tuples bounded by `n`,
//! ordered coordinatewise.
//!
//! Vectors are stored least coordinate first, `(a_1, ..., a_m)`. The weight
//! map sends a vector to the monomial
//! `x_0^(n - a_m) x_1^(a_m - a_(m-1)) ... x_(m-1)^(a_2 - a_1) x_m^(a_1)`,
//! which is a bijection between the disjoint union of all `L(m, n)` and the
//! exponent vectors of length `m + 1`.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Default ceiling on the number of lattice elements brute-force routines
/// are willing to materialise.
pub const DEFAULT_ENUMERATION_CAP: u64 = 5_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("width m must be at least 1")]
    ZeroWidth,
    #[error("vector {coords:?} has {len} coordinates, expected {m}")]
    WidthMismatch {
        coords: Vec<u32>,
        len: usize,
        m: usize,
    },
    #[error("vector {coords:?} is not weakly increasing")]
    NotIncreasing { coords: Vec<u32> },
    #[error("vector {coords:?} has a coordinate above n = {n}")]
    AboveCap { coords: Vec<u32>, n: u32 },
    #[error("L({m},{n}) has {size} elements, above the enumeration cap {cap}")]
    TooLarge {
        m: usize,
        n: u32,
        size: u128,
        cap: u64,
    },
    #[error("chain mixes lattices: L({m},{n}) and L({other_m},{other_n})")]
    MixedLattice {
        m: usize,
        n: u32,
        other_m: usize,
        other_n: u32,
    },
    #[error("chain is not strictly increasing at position {index}: {lower} then {upper}")]
    NotAChain {
        index: usize,
        lower: LatticeVector,
        upper: LatticeVector,
    },
    #[error("empty chain")]
    EmptyChain,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// An element of `L(m, n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeVector {
    n: u32,
    coords: Vec<u32>,
}

impl LatticeVector {
    pub fn new(coords: Vec<u32>, n: u32) -> Result<Self, LatticeError> {
        if coords.is_empty() {
            return Err(LatticeError::ZeroWidth);
        }
        if coords.windows(2).any(|w| w[0] > w[1]) {
            return Err(LatticeError::NotIncreasing { coords });
        }
        if coords.iter().any(|&c| c > n) {
            return Err(LatticeError::AboveCap { coords, n });
        }
        Ok(Self { n, coords })
    }

    pub fn zero(m: usize, n: u32) -> Self {
        Self {
            n,
            coords: vec![0; m],
        }
    }

    pub fn m(&self) -> usize {
        self.coords.len()
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    pub fn rank(&self) -> u64 {
        self.coords.iter().map(|&c| u64::from(c)).sum()
    }

    pub fn weight(&self) -> WeightMonomial {
        let m = self.m();
        let mut exponents = Vec::with_capacity(m + 1);
        exponents.push(self.n - self.coords[m - 1]);
        for r in (1..m).rev() {
            exponents.push(self.coords[r] - self.coords[r - 1]);
        }
        exponents.push(self.coords[0]);
        WeightMonomial { exponents }
    }

    /// Inverse of [`LatticeVector::weight`].
    pub fn from_weight(weight: &WeightMonomial) -> Result<Self, LatticeError> {
        let e = &weight.exponents;
        if e.len() < 2 {
            return Err(LatticeError::ZeroWidth);
        }
        let m = e.len() - 1;
        let mut coords = vec![0u32; m];
        coords[0] = e[m];
        for r in 1..m {
            coords[r] = coords[r - 1] + e[m - r];
        }
        Ok(Self {
            n: weight.degree(),
            coords,
        })
    }

    /// `self` is covered by `other`: same lattice, one coordinate larger by one.
    pub fn is_covered_by(&self, other: &LatticeVector) -> bool {
        if self.n != other.n || self.m() != other.m() {
            return false;
        }
        let mut diff = 0;
        for (a, b) in self.coords.iter().zip(&other.coords) {
            match b.checked_sub(*a) {
                Some(0) => {}
                Some(1) => diff += 1,
                _ => return false,
            }
        }
        diff == 1
    }

    /// Coordinatewise `<=`.
    pub fn le(&self, other: &LatticeVector) -> bool {
        self.coords.iter().zip(&other.coords).all(|(a, b)| a <= b)
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// Exponents of `x_0 ... x_m` in the weight of a lattice vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeightMonomial {
    pub exponents: Vec<u32>,
}

impl WeightMonomial {
    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }
}

/// A chain of `L(m, n)`, strictly increasing in the product order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteChain {
    elements: Vec<LatticeVector>,
}

impl ConcreteChain {
    pub fn new(elements: Vec<LatticeVector>) -> Result<Self, LatticeError> {
        let first = elements.first().ok_or(LatticeError::EmptyChain)?;
        for v in &elements[1..] {
            if v.m() != first.m() || v.n() != first.n() {
                return Err(LatticeError::MixedLattice {
                    m: first.m(),
                    n: first.n(),
                    other_m: v.m(),
                    other_n: v.n(),
                });
            }
        }
        for (index, w) in elements.windows(2).enumerate() {
            if !(w[0].le(&w[1]) && w[0] != w[1]) {
                return Err(LatticeError::NotAChain {
                    index,
                    lower: w[0].clone(),
                    upper: w[1].clone(),
                });
            }
        }
        Ok(Self { elements })
    }

    pub(crate) fn from_unchecked(elements: Vec<LatticeVector>) -> Self {
        debug_assert!(Self::new(elements.clone()).is_ok());
        Self { elements }
    }

    pub fn elements(&self) -> &[LatticeVector] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<LatticeVector> {
        self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn first(&self) -> &LatticeVector {
        &self.elements[0]
    }

    pub fn last(&self) -> &LatticeVector {
        &self.elements[self.elements.len() - 1]
    }

    pub fn m(&self) -> usize {
        self.first().m()
    }

    pub fn n(&self) -> u32 {
        self.first().n()
    }

    /// Consecutive elements are cover relations.
    pub fn is_saturated(&self) -> bool {
        self.elements.windows(2).all(|w| w[0].is_covered_by(&w[1]))
    }

    pub fn end_rank_sum(&self) -> u64 {
        self.first().rank() + self.last().rank()
    }

    pub fn is_symmetric(&self) -> bool {
        self.end_rank_sum() == self.m() as u64 * u64::from(self.n())
    }
}

pub fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc
}

/// Number of elements of `L(m, n)`, `binomial(m + n, m)`.
pub fn lattice_size(m: usize, n: u32) -> u128 {
    binomial(m as u64 + u64::from(n), m as u64)
}

pub fn enumerate(m: usize, n: u32) -> Result<Vec<LatticeVector>, LatticeError> {
    enumerate_capped(m, n, DEFAULT_ENUMERATION_CAP)
}

/// All elements of `L(m, n)` in lexicographic order.
pub fn enumerate_capped(m: usize, n: u32, cap: u64) -> Result<Vec<LatticeVector>, LatticeError> {
    if m == 0 {
        return Err(LatticeError::ZeroWidth);
    }
    let size = lattice_size(m, n);
    if size > u128::from(cap) {
        return Err(LatticeError::TooLarge { m, n, size, cap });
    }
    let mut out = Vec::with_capacity(size as usize);
    let mut cur = vec![0u32; m];
    loop {
        out.push(LatticeVector {
            n,
            coords: cur.clone(),
        });
        // odometer on weakly increasing tuples: bump the last coordinate
        // that can grow, reset everything after it to the same value
        let Some(pos) = (0..m).rev().find(|&r| cur[r] < n) else {
            break;
        };
        let v = cur[pos] + 1;
        for c in &mut cur[pos..] {
            *c = v;
        }
    }
    Ok(out)
}

/// Coefficients of `sum q^rank(a)` over `L(m, n)`, indexed by rank.
pub fn rank_generating_function(m: usize, n: u32) -> Result<Vec<u64>, LatticeError> {
    let elems = enumerate(m, n)?;
    let mut coeffs = vec![0u64; m * n as usize + 1];
    for v in &elems {
        coeffs[v.rank() as usize] += 1;
    }
    Ok(coeffs)
}

/// One failed condition of [`check_scd`], with a concrete witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScdWitness {
    RankGap {
        chain: usize,
        lower: LatticeVector,
        upper: LatticeVector,
    },
    Asymmetric {
        chain: usize,
        first: LatticeVector,
        last: LatticeVector,
    },
    Duplicate {
        vector: LatticeVector,
        chains: Vec<usize>,
    },
    Missing {
        vector: LatticeVector,
    },
}

impl fmt::Display for ScdWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScdWitness::RankGap {
                chain,
                lower,
                upper,
            } => {
                write!(
                    f,
                    "chain {chain} is not saturated between {lower} and {upper}"
                )
            }
            ScdWitness::Asymmetric { chain, first, last } => write!(
                f,
                "chain {chain} is not symmetric: rank{first} + rank{last} = {}",
                first.rank() + last.rank()
            ),
            ScdWitness::Duplicate { vector, chains } => {
                write!(
                    f,
                    "vector {vector} is covered more than once (chains {chains:?})"
                )
            }
            ScdWitness::Missing { vector } => write!(f, "vector {vector} is not covered"),
        }
    }
}

/// Outcome of [`check_scd`]. The four conditions are evaluated independently.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScdVerdict {
    pub m: usize,
    pub n: u32,
    pub saturated: Result<(), ScdWitness>,
    pub symmetric: Result<(), ScdWitness>,
    pub disjoint: Result<(), ScdWitness>,
    pub covering: Result<(), ScdWitness>,
    pub element_count: u64,
}

impl ScdVerdict {
    pub fn passed(&self) -> bool {
        self.saturated.is_ok()
            && self.symmetric.is_ok()
            && self.disjoint.is_ok()
            && self.covering.is_ok()
    }

    pub fn witnesses(&self) -> impl Iterator<Item = &ScdWitness> {
        [
            &self.saturated,
            &self.symmetric,
            &self.disjoint,
            &self.covering,
        ]
        .into_iter()
        .filter_map(|r| r.as_ref().err())
    }
}

/// Brute-force check that `chains` form a symmetric chain decomposition of
/// `L(m, n)`.
pub fn check_scd(chains: &[ConcreteChain], m: usize, n: u32) -> Result<ScdVerdict, LatticeError> {
    for c in chains {
        if c.m() != m || c.n() != n {
            return Err(LatticeError::MixedLattice {
                m,
                n,
                other_m: c.m(),
                other_n: c.n(),
            });
        }
    }
    let all = enumerate(m, n)?;

    let mut saturated = Ok(());
    let mut symmetric = Ok(());
    for (ci, c) in chains.iter().enumerate() {
        if saturated.is_ok() {
            if let Some(w) = c.elements().windows(2).find(|w| !w[0].is_covered_by(&w[1])) {
                saturated = Err(ScdWitness::RankGap {
                    chain: ci,
                    lower: w[0].clone(),
                    upper: w[1].clone(),
                });
            }
        }
        if symmetric.is_ok() && !c.is_symmetric() {
            symmetric = Err(ScdWitness::Asymmetric {
                chain: ci,
                first: c.first().clone(),
                last: c.last().clone(),
            });
        }
    }

    let mut owners: HashMap<&LatticeVector, Vec<usize>> = HashMap::new();
    let mut element_count = 0u64;
    for (ci, c) in chains.iter().enumerate() {
        for v in c.elements() {
            owners.entry(v).or_default().push(ci);
            element_count += 1;
        }
    }
    let mut disjoint = Ok(());
    let mut covering = Ok(());
    for v in &all {
        match owners.get(v) {
            None if covering.is_ok() => covering = Err(ScdWitness::Missing { vector: v.clone() }),
            Some(cs) if cs.len() > 1 && disjoint.is_ok() => {
                disjoint = Err(ScdWitness::Duplicate {
                    vector: v.clone(),
                    chains: cs.clone(),
                })
            }
            _ => {}
        }
    }

    Ok(ScdVerdict {
        m,
        n,
        saturated,
        symmetric,
        disjoint,
        covering,
        element_count,
    })
}

/// Writes chains one vector per line, comma separated, with a blank line
/// between chains.
pub fn format_chains(chains: &[ConcreteChain]) -> String {
    let mut out = String::new();
    for (i, c) in chains.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for v in c.elements() {
            let line: Vec<String> = v.coords().iter().map(u32::to_string).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
    }
    out
}

/// Parses the format written by [`format_chains`]; `#` starts a comment.
pub fn parse_chains(text: &str, n: u32) -> Result<Vec<ConcreteChain>, LatticeError> {
    let mut chains = Vec::new();
    let mut current: Vec<LatticeVector> = Vec::new();
    let mut start_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            if raw.trim().is_empty() && !current.is_empty() {
                chains.push(close_chain(std::mem::take(&mut current), start_line)?);
            }
            continue;
        }
        if current.is_empty() {
            start_line = idx + 1;
        }
        let coords = line
            .split(',')
            .map(|tok| {
                tok.trim().parse::<u32>().map_err(|e| LatticeError::Parse {
                    line: idx + 1,
                    message: format!("bad coordinate {:?}: {e}", tok.trim()),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let v = LatticeVector::new(coords, n).map_err(|e| LatticeError::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        current.push(v);
    }
    if !current.is_empty() {
        chains.push(close_chain(current, start_line)?);
    }
    Ok(chains)
}

fn close_chain(elements: Vec<LatticeVector>, line: usize) -> Result<ConcreteChain, LatticeError> {
    ConcreteChain::new(elements).map_err(|e| LatticeError::Parse {
        line,
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(coords: &[u32], n: u32) -> LatticeVector {
        LatticeVector::new(coords.to_vec(), n).unwrap()
    }

    fn chain(vs: &[&[u32]], n: u32) -> ConcreteChain {
        ConcreteChain::new(vs.iter().map(|c| v(c, n)).collect()).unwrap()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(v(&[0; 6], 1).rank(), 0);
        assert_eq!(v(&[1, 1, 2, 2, 2, 2], 2).rank(), 10);
        assert_eq!(v(&[1; 6], 1).rank(), 6);
    }

    #[test]
    fn rejects_invalid_vectors() {
        assert!(matches!(
            LatticeVector::new(vec![1, 0], 2),
            Err(LatticeError::NotIncreasing { .. })
        ));
        assert!(matches!(
            LatticeVector::new(vec![0, 3], 2),
            Err(LatticeError::AboveCap { .. })
        ));
        assert!(matches!(
            LatticeVector::new(vec![], 2),
            Err(LatticeError::ZeroWidth)
        ));
    }

    #[test]
    fn enumerate_examples() {
        let l = enumerate(1, 3).unwrap();
        assert_eq!(l, vec![v(&[0], 3), v(&[1], 3), v(&[2], 3), v(&[3], 3)]);
        let l = enumerate(2, 2).unwrap();
        let coords: Vec<_> = l.iter().map(|v| v.coords().to_vec()).collect();
        assert_eq!(
            coords,
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![0, 2],
                vec![1, 1],
                vec![1, 2],
                vec![2, 2]
            ]
        );
        assert_eq!(enumerate(6, 1).unwrap().len(), 7);
        assert_eq!(enumerate(3, 0).unwrap(), vec![LatticeVector::zero(3, 0)]);
    }

    #[test]
    fn enumeration_cap() {
        assert!(matches!(
            enumerate_capped(6, 8, 100),
            Err(LatticeError::TooLarge { .. })
        ));
        assert_eq!(enumerate_capped(6, 8, 10_000).unwrap().len(), 3003);
    }

    #[test]
    fn weight_examples() {
        assert_eq!(LatticeVector::zero(6, 0).weight().exponents, vec![0; 7]);
        assert_eq!(
            v(&[1, 1, 2, 2, 2, 2], 2).weight().exponents,
            vec![0, 0, 0, 0, 1, 0, 1]
        );
        assert_eq!(
            v(&[0, 0, 0, 0, 1, 1], 2).weight().exponents,
            vec![1, 0, 1, 0, 0, 0, 0]
        );
    }

    #[test]
    fn rank_generating_function_examples() {
        assert_eq!(rank_generating_function(1, 2).unwrap(), vec![1, 1, 1]);
        assert_eq!(rank_generating_function(2, 2).unwrap(), vec![1, 1, 2, 1, 1]);
        assert_eq!(rank_generating_function(6, 1).unwrap(), vec![1; 7]);
    }

    #[test]
    fn rank_generating_function_is_palindromic() {
        for m in 1..=4 {
            for n in 0..=5 {
                let c = rank_generating_function(m, n).unwrap();
                let mut r = c.clone();
                r.reverse();
                assert_eq!(c, r);
                assert_eq!(
                    c.iter().map(|&x| u128::from(x)).sum::<u128>(),
                    lattice_size(m, n)
                );
            }
        }
    }

    #[test]
    fn cc0_chain_is_an_scd_of_l61() {
        let c = chain(
            &[
                &[0, 0, 0, 0, 0, 0],
                &[0, 0, 0, 0, 0, 1],
                &[0, 0, 0, 0, 1, 1],
                &[0, 0, 0, 1, 1, 1],
                &[0, 0, 1, 1, 1, 1],
                &[0, 1, 1, 1, 1, 1],
                &[1, 1, 1, 1, 1, 1],
            ],
            1,
        );
        assert_eq!(c.end_rank_sum(), 6);
        assert!(check_scd(&[c], 6, 1).unwrap().passed());
    }

    #[test]
    fn single_full_chain() {
        let c = chain(&[&[0], &[1], &[2], &[3], &[4]], 4);
        assert!(check_scd(&[c], 1, 4).unwrap().passed());
    }

    #[test]
    fn l22_scd_and_missing_witness() {
        let d0 = chain(&[&[0, 0], &[0, 1], &[0, 2], &[1, 2], &[2, 2]], 2);
        let d1 = chain(&[&[1, 1]], 2);
        let ok = check_scd(&[d0.clone(), d1], 2, 2).unwrap();
        assert!(ok.passed());
        assert_eq!(ok.element_count, 6);
        let bad = check_scd(&[d0], 2, 2).unwrap();
        assert!(!bad.passed());
        assert!(bad.saturated.is_ok() && bad.symmetric.is_ok() && bad.disjoint.is_ok());
        assert_eq!(
            bad.covering,
            Err(ScdWitness::Missing {
                vector: v(&[1, 1], 2)
            })
        );
    }

    #[test]
    fn reports_each_condition_independently() {
        // (0,0)<(0,2) skips a rank; (0,1) twice; (2,2) never.
        let a = chain(&[&[0, 0], &[0, 2]], 2);
        let b = chain(&[&[0, 1], &[1, 1], &[1, 2]], 2);
        let c = chain(&[&[0, 1]], 2);
        let verdict = check_scd(&[a, b, c], 2, 2).unwrap();
        assert!(matches!(
            verdict.saturated,
            Err(ScdWitness::RankGap { chain: 0, .. })
        ));
        assert!(matches!(
            verdict.symmetric,
            Err(ScdWitness::Asymmetric { chain: 0, .. })
        ));
        assert!(matches!(
            verdict.disjoint,
            Err(ScdWitness::Duplicate { .. })
        ));
        assert_eq!(
            verdict.covering,
            Err(ScdWitness::Missing {
                vector: v(&[2, 2], 2)
            })
        );
        assert_eq!(verdict.witnesses().count(), 4);
    }

    #[test]
    fn mixed_lattices_rejected() {
        let a = chain(&[&[0, 0]], 2);
        assert!(matches!(
            check_scd(&[a], 2, 3),
            Err(LatticeError::MixedLattice { .. })
        ));
        let mixed = ConcreteChain::new(vec![v(&[0, 0], 2), v(&[0, 1], 3)]);
        assert!(matches!(mixed, Err(LatticeError::MixedLattice { .. })));
    }

    #[test]
    fn n_zero_is_a_single_chain() {
        let c = ConcreteChain::new(vec![LatticeVector::zero(4, 0)]).unwrap();
        assert!(check_scd(&[c], 4, 0).unwrap().passed());
    }

    #[test]
    fn chain_text_round_trip() {
        let d0 = chain(&[&[0, 0], &[0, 1], &[0, 2], &[1, 2], &[2, 2]], 2);
        let d1 = chain(&[&[1, 1]], 2);
        let text = format_chains(&[d0.clone(), d1.clone()]);
        assert_eq!(text, "0,0\n0,1\n0,2\n1,2\n2,2\n\n1,1\n");
        assert_eq!(parse_chains(&text, 2).unwrap(), vec![d0, d1]);
        assert!(matches!(
            parse_chains("0,1\n0,x\n", 2),
            Err(LatticeError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(7, 6), 7);
        assert_eq!(binomial(14, 6), 3003);
        assert_eq!(binomial(3, 0), 1);
    }
}
