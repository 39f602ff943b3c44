//! Brute-force cross-checks: truncated power series and direct lattice
//! enumeration. Slow and simple on purpose.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::One;
use thiserror::Error;

use crate::chainfam::admissible_points;
use crate::latsum::ParametricMonomial;
use crate::lattice::{enumerate, LatticeError};
use crate::ratfun::{Coeff, Monomial, Poly, RationalExpr};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("term {index} is not a power series: {term}")]
    NotPowerSeries { index: usize, term: String },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

fn truncate(p: Poly, depth: i64) -> Poly {
    let mut out = Poly::zero(p.nvars());
    for (m, c) in p.terms() {
        if m.total_degree() <= depth {
            out.add_term(m.clone(), c.clone());
        }
    }
    out
}

fn mul_trunc(a: &Poly, b: &Poly, depth: i64) -> Poly {
    let mut out = Poly::zero(a.nvars());
    for (m1, c1) in a.terms() {
        let d1 = m1.total_degree();
        for (m2, c2) in b.terms() {
            if d1 + m2.total_degree() <= depth {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
    }
    out
}

/// All monomials of total degree at most `depth` in the power-series
/// expansion of `expr`. Every term must be a power series: nonnegative
/// numerator exponents and nonnegative factor monomials.
pub fn series(expr: &RationalExpr, depth: i64) -> Result<Poly, OracleError> {
    let mut total = Poly::zero(expr.nvars());
    for (index, t) in expr.terms().iter().enumerate() {
        if !t.is_power_series() {
            return Err(OracleError::NotPowerSeries {
                index,
                term: t.to_string(),
            });
        }
        let mut acc = truncate(t.numer().clone(), depth);
        for (f, k) in t.denom() {
            let mu = f.monomial();
            let step = mu.total_degree();
            // 1/(1 - mu)^k = sum_j C(k + j - 1, j) mu^j
            let mut geo = Poly::zero(expr.nvars());
            let mut j = 0i64;
            let mut pow = Monomial::one(expr.nvars());
            let mut binom = BigInt::one();
            while j * step <= depth {
                geo.add_term(pow.clone(), Coeff::from_integer(binom.clone()));
                j += 1;
                pow = pow.mul(mu);
                binom = binom * BigInt::from(i64::from(*k) + j - 1) / BigInt::from(j);
            }
            acc = mul_trunc(&acc, &geo, depth);
        }
        total.add_assign(&acc);
    }
    Ok(total)
}

/// Sum of the parametric monomial over the points of its region inside the
/// box `0 <= p <= bound`, keeping monomials of total degree at most `depth`.
/// Exact whenever every point outside the box has degree above `depth`.
pub fn lattice_series(pm: &ParametricMonomial, bound: i64, depth: i64) -> Poly {
    let bounds: BTreeMap<String, i64> = pm
        .region
        .params
        .iter()
        .map(|p| (p.clone(), bound))
        .collect();
    let mut out = Poly::zero(pm.exponents.len());
    for point in admissible_points(&pm.region, &bounds) {
        let exps: Vec<i64> = pm
            .exponents
            .iter()
            .map(|e| e.eval(&point).expect("names resolved"))
            .collect();
        let mono = Monomial::from_exponents(exps);
        if mono.total_degree() <= depth {
            out.add_term(mono, Coeff::one());
        }
    }
    out
}

/// `sum_{n <= depth} sum_{a in L(m, n)} w(a)`, the truncation of the
/// target generating function.
pub fn weight_series(m: usize, depth: u32) -> Result<Poly, OracleError> {
    let mut out = Poly::zero(m + 1);
    for n in 0..=depth {
        for v in enumerate(m, n)? {
            let e = v.weight().exponents.iter().map(|&x| i64::from(x)).collect();
            out.add_term(Monomial::from_exponents(e), Coeff::one());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latsum::target_gf;

    #[test]
    fn target_series_matches_enumeration() {
        for m in 1..=3 {
            let s = series(&target_gf(m), 5).unwrap();
            assert_eq!(s, weight_series(m, 5).unwrap());
        }
    }

    #[test]
    fn laurent_terms_are_rejected() {
        let e = crate::ratfun::parse_expr("+1 * x0^-1 / (1 - x1)\n", 2).unwrap();
        assert!(matches!(
            series(&e, 3),
            Err(OracleError::NotPowerSeries { index: 0, .. })
        ));
    }
}
