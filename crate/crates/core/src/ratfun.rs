//! Exact rational functions of the form
//! `polynomial / prod (1 - monomial)^multiplicity` over `Q`, and their
//! canonical text form.
//!
//! Monomials are Laurent (negative exponents allowed). A denominator factor
//! `1 - mu` is stored in canonical orientation: the first nonzero exponent of
//! `mu` is positive. Flipping uses `1/(1 - mu) = -mu^-1 / (1 - mu^-1)`.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Coeff = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<i64>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Self(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self(e)
    }

    pub fn from_exponents(e: Vec<i64>) -> Self {
        Self(e)
    }

    pub fn exponents(&self) -> &[i64] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn exp(&self, i: usize) -> i64 {
        self.0[i]
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&e| e >= 0)
    }

    pub fn total_degree(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn pow(&self, k: i64) -> Monomial {
        Monomial(self.0.iter().map(|a| a * k).collect())
    }

    pub fn inv(&self) -> Monomial {
        self.pow(-1)
    }

    /// gcd of the absolute exponents (0 for the constant monomial).
    pub fn content(&self) -> i64 {
        self.0.iter().fold(0i64, |g, &e| g.gcd(&e))
    }

    /// `(nu, g)` with `self = nu^g` and `nu` of content 1.
    pub fn primitive(&self) -> (Monomial, i64) {
        let g = self.content();
        if g <= 1 {
            return (self.clone(), g.max(1));
        }
        (Monomial(self.0.iter().map(|e| e / g).collect()), g)
    }

    /// First nonzero exponent is positive.
    pub fn is_canonically_oriented(&self) -> bool {
        self.0.iter().find(|&&e| e != 0).is_some_and(|&e| e > 0)
    }

    pub fn with_exp(&self, i: usize, e: i64) -> Monomial {
        let mut out = self.clone();
        out.0[i] = e;
        out
    }

    pub fn eval(&self, powers: &PowerTable) -> Coeff {
        let mut acc = Coeff::one();
        for (i, &e) in self.0.iter().enumerate() {
            if e != 0 {
                acc *= powers.get(i, e);
            }
        }
        acc
    }

    fn write_to(&self, out: &mut String) {
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                out.push('*');
            }
            first = false;
            let _ = write!(out, "x{i}");
            if e != 1 {
                let _ = write!(out, "^{e}");
            }
        }
        if first {
            out.push('1');
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_to(&mut s);
        f.write_str(&s)
    }
}

/// Cached integer powers of a fixed evaluation point.
pub struct PowerTable {
    point: Vec<Coeff>,
    cache: std::cell::RefCell<BTreeMap<(usize, i64), Coeff>>,
}

impl PowerTable {
    pub fn new(point: Vec<Coeff>) -> Self {
        Self {
            point,
            cache: Default::default(),
        }
    }

    pub fn from_integers(point: &[i64]) -> Self {
        Self::new(
            point
                .iter()
                .map(|&v| Coeff::from_integer(BigInt::from(v)))
                .collect(),
        )
    }

    pub fn get(&self, i: usize, e: i64) -> Coeff {
        if let Some(v) = self.cache.borrow().get(&(i, e)) {
            return v.clone();
        }
        let base = &self.point[i];
        let mut v = num_traits::pow(base.clone(), e.unsigned_abs() as usize);
        if e < 0 {
            v = v.recip();
        }
        self.cache.borrow_mut().insert((i, e), v.clone());
        v
    }
}

/// Sparse Laurent polynomial with rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, Coeff>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Coeff) -> Self {
        Self::monomial(Monomial::one(nvars), c)
    }

    pub fn monomial(m: Monomial, c: Coeff) -> Self {
        let mut p = Self::zero(m.nvars());
        p.add_term(m, c);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Coeff)> {
        self.terms.iter()
    }

    /// The sole term, if there is exactly one.
    pub fn as_single(&self) -> Option<(&Monomial, &Coeff)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn add_term(&mut self, m: Monomial, c: Coeff) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &Poly) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn sub_assign(&mut self, other: &Poly) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }

    pub fn scale(&self, k: &Coeff) -> Poly {
        if k.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn mul_monomial(&self, mono: &Monomial) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.mul(mono), c.clone()))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut out = Poly::constant(self.nvars, Coeff::one());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn eval(&self, powers: &PowerTable) -> Coeff {
        self.terms
            .iter()
            .map(|(m, c)| c * m.eval(powers))
            .fold(Coeff::zero(), |a, b| a + b)
    }

    /// Coordinatewise minimum exponent over all terms.
    pub fn min_exponents(&self) -> Option<Monomial> {
        let mut it = self.terms.keys();
        let first = it.next()?.clone();
        Some(it.fold(first, |acc, m| {
            Monomial(acc.0.iter().zip(&m.0).map(|(a, b)| *a.min(b)).collect())
        }))
    }

    /// Multiplies by the smallest monomial that makes every exponent
    /// nonnegative.
    pub fn clear_negative(&self) -> Poly {
        match self.min_exponents() {
            Some(min) => {
                let shift = Monomial(min.0.iter().map(|&e| (-e).max(0)).collect());
                self.mul_monomial(&shift)
            }
            None => self.clone(),
        }
    }

    fn leading(&self) -> Option<(&Monomial, &Coeff)> {
        self.terms.iter().next_back()
    }

    /// Exact quotient by `divisor` if it divides `self` in `Q[x]`; both
    /// must be genuine polynomials. Lex-order division with a single divisor
    /// has a unique remainder, so a nonzero remainder settles non-divisibility.
    pub fn div_exact(&self, divisor: &Poly, max_steps: usize) -> Option<Result<Poly, ()>> {
        let (lm, lc) = divisor.leading()?;
        let (lm, lc) = (lm.clone(), lc.clone());
        let mut rem = self.clone();
        let mut quot = Poly::zero(self.nvars);
        let mut steps = 0usize;
        while let Some((m, c)) = rem.leading() {
            steps += 1;
            if steps > max_steps {
                return None;
            }
            let shift = Monomial(m.0.iter().zip(&lm.0).map(|(a, b)| a - b).collect());
            if !shift.is_nonnegative() {
                return Some(Err(()));
            }
            let k = c / &lc;
            quot.add_term(shift.clone(), k.clone());
            let sub = divisor.mul_monomial(&shift).scale(&k);
            rem.sub_assign(&sub);
        }
        Some(Ok(quot))
    }

    fn write_terms(&self, out: &mut String) {
        let mut first = true;
        // descending order reads naturally
        for (m, c) in self.terms.iter().rev() {
            if !first {
                out.push(' ');
            }
            first = false;
            write_coeff(out, c);
            out.push_str(" * ");
            m.write_to(out);
        }
        if first {
            out.push_str("+0 * ");
            Monomial::one(self.nvars).write_to(out);
        }
    }
}

fn write_coeff(out: &mut String, c: &Coeff) {
    out.push(if c.is_negative() { '-' } else { '+' });
    let a = c.abs();
    if a.is_integer() {
        let _ = write!(out, "{}", a.numer());
    } else {
        let _ = write!(out, "{}/{}", a.numer(), a.denom());
    }
}

/// `1 - mu`, canonically oriented. Ordered by total degree, then with
/// earlier variables first, so `(1 - x0) < (1 - x1) < (1 - x0*x1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Factor(Monomial);

impl Ord for Factor {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .total_degree()
            .cmp(&other.0.total_degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Factor {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Factor {
    /// Canonical factor for `1 - mu` and whether `mu` had to be inverted.
    /// `None` if `mu = 1`.
    pub fn oriented(mu: Monomial) -> Option<(Factor, bool)> {
        if mu.is_one() {
            return None;
        }
        if mu.is_canonically_oriented() {
            Some((Factor(mu), false))
        } else {
            Some((Factor(mu.inv()), true))
        }
    }

    pub fn monomial(&self) -> &Monomial {
        &self.0
    }

    pub fn eval(&self, powers: &PowerTable) -> Coeff {
        Coeff::one() - self.0.eval(powers)
    }

    /// `1 - mu` as a polynomial with the monomial `B` cleared when
    /// `mu = A/B`.
    pub fn cleared_poly(&self) -> Poly {
        let n = self.0.nvars();
        let mut p = Poly::constant(n, Coeff::one());
        p.add_term(self.0.clone(), -Coeff::one());
        p.clear_negative()
    }

    fn write_to(&self, out: &mut String) {
        out.push_str("(1 - ");
        self.0.write_to(out);
        out.push(')');
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_to(&mut s);
        f.write_str(&s)
    }
}

/// `numer / prod factor^mult`. Factors are sorted, distinct, multiplicities
/// at least one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalTerm {
    denom: Vec<(Factor, u32)>,
    numer: Poly,
}

impl RationalTerm {
    /// Builds a term from raw `1 - mu` factors in any orientation.
    /// Panics if some `mu` is the constant monomial.
    pub fn new(numer: Poly, raw: impl IntoIterator<Item = (Monomial, u32)>) -> Self {
        let mut numer = numer;
        let mut denom: BTreeMap<Factor, u32> = BTreeMap::new();
        for (mu, mult) in raw {
            if mult == 0 {
                continue;
            }
            let (f, flipped) = Factor::oriented(mu).expect("denominator factor 1 - 1");
            if flipped {
                // 1/(1 - mu)^k = (-mu^-1)^k / (1 - mu^-1)^k with mu^-1 = f
                let sign = if mult % 2 == 1 {
                    -Coeff::one()
                } else {
                    Coeff::one()
                };
                numer = numer.mul_monomial(&f.0.pow(i64::from(mult))).scale(&sign);
            }
            *denom.entry(f).or_insert(0) += mult;
        }
        Self {
            denom: denom.into_iter().collect(),
            numer,
        }
    }

    pub fn atomic(
        coeff: Coeff,
        mono: Monomial,
        raw: impl IntoIterator<Item = (Monomial, u32)>,
    ) -> Self {
        Self::new(Poly::monomial(mono, coeff), raw)
    }

    pub fn numer(&self) -> &Poly {
        &self.numer
    }

    pub fn denom(&self) -> &[(Factor, u32)] {
        &self.denom
    }

    pub fn nvars(&self) -> usize {
        self.numer.nvars()
    }

    pub fn is_atomic(&self) -> bool {
        self.numer.len() <= 1
    }

    pub fn multiplicity(&self, f: &Factor) -> u32 {
        self.denom
            .iter()
            .find(|(g, _)| g == f)
            .map_or(0, |(_, k)| *k)
    }

    pub fn neg(&self) -> RationalTerm {
        RationalTerm {
            denom: self.denom.clone(),
            numer: self.numer.scale(&-Coeff::one()),
        }
    }

    pub fn scale(&self, k: &Coeff) -> RationalTerm {
        RationalTerm {
            denom: self.denom.clone(),
            numer: self.numer.scale(k),
        }
    }

    pub fn mul(&self, other: &RationalTerm) -> RationalTerm {
        let raw = self
            .denom
            .iter()
            .chain(&other.denom)
            .map(|(f, k)| (f.0.clone(), *k))
            .collect::<Vec<_>>();
        RationalTerm::new(self.numer.mul(&other.numer), raw)
    }

    /// `None` when a denominator factor vanishes at the point.
    pub fn eval(&self, powers: &PowerTable) -> Option<Coeff> {
        let mut d = Coeff::one();
        for (f, k) in &self.denom {
            let v = f.eval(powers);
            if v.is_zero() {
                return None;
            }
            d *= num_traits::pow(v, *k as usize);
        }
        Some(self.numer.eval(powers) / d)
    }

    /// Nonnegative numerator exponents and nonnegative factor monomials.
    pub fn is_power_series(&self) -> bool {
        self.numer.terms().all(|(m, _)| m.is_nonnegative())
            && self.denom.iter().all(|(f, _)| f.0.is_nonnegative())
    }

    fn write_to(&self, out: &mut String) {
        if let Some((m, c)) = self.numer.as_single() {
            write_coeff(out, c);
            out.push_str(" * ");
            m.write_to(out);
        } else {
            out.push('(');
            self.numer.write_terms(out);
            out.push(')');
        }
        if !self.denom.is_empty() {
            out.push_str(" /");
            for (f, k) in &self.denom {
                out.push(' ');
                f.write_to(out);
                if *k != 1 {
                    let _ = write!(out, "^{k}");
                }
            }
        }
    }
}

impl fmt::Display for RationalTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_to(&mut s);
        f.write_str(&s)
    }
}

/// A formal sum of [`RationalTerm`]s. Terms are not combined unless asked.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalExpr {
    nvars: usize,
    terms: Vec<RationalTerm>,
}

impl RationalExpr {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: Vec::new(),
        }
    }

    pub fn from_terms(nvars: usize, terms: Vec<RationalTerm>) -> Self {
        debug_assert!(terms.iter().all(|t| t.nvars() == nvars));
        let terms = terms.into_iter().filter(|t| !t.numer.is_zero()).collect();
        Self { nvars, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[RationalTerm] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<RationalTerm> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, t: RationalTerm) {
        if !t.numer.is_zero() {
            self.terms.push(t);
        }
    }

    pub fn extend(&mut self, other: RationalExpr) {
        self.terms.extend(other.terms);
    }

    pub fn neg(&self) -> RationalExpr {
        RationalExpr {
            nvars: self.nvars,
            terms: self.terms.iter().map(RationalTerm::neg).collect(),
        }
    }

    pub fn sub(&self, other: &RationalExpr) -> RationalExpr {
        let mut out = self.clone();
        out.terms.extend(other.neg().terms);
        out
    }

    /// Sorted term order.
    pub fn canonical(&self) -> RationalExpr {
        let mut terms = self.terms.clone();
        terms.sort();
        RationalExpr {
            nvars: self.nvars,
            terms,
        }
    }

    pub fn is_atomic(&self) -> bool {
        self.terms.iter().all(RationalTerm::is_atomic)
    }

    /// Splits numerators into single monomials and merges terms that share
    /// both the monomial and the denominator.
    pub fn combine_like_terms(&self) -> RationalExpr {
        let mut acc: BTreeMap<(Vec<(Factor, u32)>, Monomial), Coeff> = BTreeMap::new();
        for t in &self.terms {
            for (m, c) in t.numer.terms() {
                *acc.entry((t.denom.clone(), m.clone()))
                    .or_insert_with(Coeff::zero) += c;
            }
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((denom, m), c)| RationalTerm {
                denom,
                numer: Poly::monomial(m, c),
            })
            .collect();
        RationalExpr {
            nvars: self.nvars,
            terms,
        }
    }

    pub fn eval(&self, powers: &PowerTable) -> Option<Coeff> {
        let mut acc = Coeff::zero();
        for t in &self.terms {
            acc += t.eval(powers)?;
        }
        Some(acc)
    }

    /// Every distinct denominator factor, sorted.
    pub fn raw_factors(&self) -> Vec<Factor> {
        let mut out: Vec<Factor> = self
            .terms
            .iter()
            .flat_map(|t| t.denom.iter().map(|(f, _)| f.clone()))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Canonical text: one term per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.terms {
            t.write_to(&mut out);
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for RationalExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {message}")]
pub struct ExprParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

struct ExprCursor<'a> {
    s: &'a [u8],
    pos: usize,
    line: usize,
    nvars: usize,
}

impl<'a> ExprCursor<'a> {
    fn err(&self, message: impl Into<String>) -> ExprParseError {
        ExprParseError {
            line: self.line,
            col: self.pos + 1,
            message: message.into(),
        }
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ExprParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected {:?}", c as char)))
        }
    }

    fn uint(&mut self) -> Result<BigInt, ExprParseError> {
        self.ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected digits"));
        }
        let digits = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        Ok(digits.parse().expect("digits"))
    }

    fn int(&mut self) -> Result<i64, ExprParseError> {
        let neg = self.eat(b'-');
        let v = self.uint()?;
        let v: i64 = i64::try_from(&v).map_err(|_| self.err("exponent out of range"))?;
        Ok(if neg { -v } else { v })
    }

    /// `[+-] digits [/digits]`
    fn coeff(&mut self) -> Result<Coeff, ExprParseError> {
        let neg = match self.peek() {
            Some(b'+') => {
                self.pos += 1;
                false
            }
            Some(b'-') => {
                self.pos += 1;
                true
            }
            _ => return Err(self.err("expected a signed coefficient")),
        };
        let num = self.uint()?;
        // a denominator must be glued to the numerator: `1/2`
        let den = if self.s.get(self.pos) == Some(&b'/')
            && self.s.get(self.pos + 1).is_some_and(u8::is_ascii_digit)
        {
            self.pos += 1;
            self.uint()?
        } else {
            BigInt::one()
        };
        let c = Coeff::new(num, den);
        Ok(if neg { -c } else { c })
    }

    fn monomial(&mut self) -> Result<Monomial, ExprParseError> {
        let mut e = vec![0i64; self.nvars];
        if self.peek() == Some(b'1') {
            self.pos += 1;
            return Ok(Monomial(e));
        }
        loop {
            self.expect(b'x')?;
            let idx = self.uint()?;
            let idx = usize::try_from(&idx).ok().filter(|&i| i < self.nvars);
            let Some(idx) = idx else {
                return Err(self.err(format!(
                    "variable index out of range (nvars = {})",
                    self.nvars
                )));
            };
            let k = if self.eat(b'^') { self.int()? } else { 1 };
            e[idx] += k;
            if !self.eat(b'*') {
                return Ok(Monomial(e));
            }
        }
    }

    fn signed_term(&mut self, into: &mut Poly) -> Result<(), ExprParseError> {
        let c = self.coeff()?;
        self.expect(b'*')?;
        let m = self.monomial()?;
        into.add_term(m, c);
        Ok(())
    }

    fn term(&mut self) -> Result<RationalTerm, ExprParseError> {
        let mut numer = Poly::zero(self.nvars);
        if self.eat(b'(') {
            while self.peek() != Some(b')') {
                self.signed_term(&mut numer)?;
            }
            self.expect(b')')?;
        } else {
            self.signed_term(&mut numer)?;
        }
        let mut raw = Vec::new();
        if self.eat(b'/') {
            while self.peek() == Some(b'(') {
                self.pos += 1;
                self.expect(b'1')?;
                self.expect(b'-')?;
                let m = self.monomial()?;
                if m.is_one() {
                    return Err(self.err("factor (1 - 1) is zero"));
                }
                self.expect(b')')?;
                let k = if self.eat(b'^') { self.int()? } else { 1 };
                let k = u32::try_from(k)
                    .ok()
                    .filter(|&k| k >= 1)
                    .ok_or_else(|| self.err("bad multiplicity"))?;
                raw.push((m, k));
            }
            if raw.is_empty() {
                return Err(self.err("expected a factor after `/`"));
            }
        }
        if self.peek().is_some() {
            return Err(self.err("unexpected trailing input"));
        }
        Ok(RationalTerm::new(numer, raw))
    }
}

/// Parses the text written by [`RationalExpr::to_text`]. Blank lines and
/// `#` comments are ignored.
pub fn parse_expr(text: &str, nvars: usize) -> Result<RationalExpr, ExprParseError> {
    let mut expr = RationalExpr::zero(nvars);
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let mut cur = ExprCursor {
            s: line.as_bytes(),
            pos: 0,
            line: idx + 1,
            nvars,
        };
        expr.push(cur.term()?);
    }
    Ok(expr)
}

/// Largest variable index mentioned in an expression text, plus one.
pub fn infer_nvars(text: &str) -> usize {
    let mut best = 0;
    let b = text.as_bytes();
    let mut i = 0;
    while i < b.len() {
        if b[i] == b'x' {
            let start = i + 1;
            let mut j = start;
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            if j > start {
                if let Ok(v) = text[start..j].parse::<usize>() {
                    best = best.max(v + 1);
                }
            }
            i = j;
        } else {
            i += 1;
        }
    }
    best
}
