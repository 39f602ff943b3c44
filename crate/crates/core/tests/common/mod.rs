#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scd_core::chainfam::{
    families_to_chains, parse_family_file, AffineForm, Bound, ChainFamily, Constraint, Region,
    Relation,
};
use scd_core::cli::{prove_against_target, ProveSummary};
use scd_core::fixtures;
use scd_core::latsum::{lattice_sum, split_min, total_weight, ParametricMonomial};
use scd_core::lattice::{check_scd, ConcreteChain, LatticeVector};
use scd_core::oracle::{lattice_series, series};
use scd_core::ratfun::{Coeff, Monomial, Poly, RationalExpr, RationalTerm};
use scd_core::ratproof::ProveConfig;
use scd_core::scdbuild::{HalfInt, ParallelGrid, ParallelRow};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn coeff(c: i64) -> Coeff {
    Coeff::from_integer(BigInt::from(c))
}

pub fn mono(e: &[i64]) -> Monomial {
    Monomial::from_exponents(e.to_vec())
}

// ---------------------------------------------------------------- regions

fn p(i: usize) -> AffineForm {
    AffineForm::var(&format!("p{i}"))
}

/// A random region with at most 3 parameters that the summation engine can
/// eliminate (bounds on `p_j` only mention earlier parameters) and an
/// exponent vector over at most 4 variables whose total degree grows with
/// every parameter, so a box of side `depth + 2` holds every point of total
/// degree at most `depth`.
pub fn random_region(rng: &mut ChaCha8Rng) -> ParametricMonomial {
    let k = rng.gen_range(1..=3usize);
    let nvars = rng.gen_range(1..=4usize);
    let params: Vec<String> = (0..k).map(|i| format!("p{i}")).collect();
    let mut constraints = Vec::new();
    let mut difference: Option<(usize, usize, i64)> = None;
    for j in 0..k {
        let earlier = if j > 0 {
            Some(rng.gen_range(0..j))
        } else {
            None
        };
        match (rng.gen_range(0..7), earlier) {
            (0, _) => {}
            (1, _) => constraints.push(Constraint::le(
                p(j),
                AffineForm::constant(rng.gen_range(0..=4)),
            )),
            (2, Some(i)) => {
                let a = rng.gen_range(1..=2);
                let c = rng.gen_range(0..=2);
                constraints.push(Constraint::le(p(j), p(i).scale(a).add_constant(c)));
            }
            (3, Some(i)) => {
                let c = rng.gen_range(0..=1);
                constraints.push(Constraint::ge(p(j), p(i).add_constant(c)));
                if difference.is_none() {
                    difference = Some((j, i, c));
                }
            }
            (4, Some(i)) => {
                let args = vec![
                    p(i).add_constant(rng.gen_range(0..=2)),
                    AffineForm::constant(rng.gen_range(1..=4)),
                ];
                constraints.push(Constraint::new(p(j), Relation::Le, Bound::Min(args)).unwrap());
            }
            (5, Some(i)) => {
                let args = vec![p(i), AffineForm::constant(rng.gen_range(0..=2))];
                constraints.push(Constraint::new(p(j), Relation::Ge, Bound::Max(args)).unwrap());
            }
            (6, Some(i)) => {
                constraints.push(Constraint::le(
                    p(i).add(&p(j)),
                    AffineForm::constant(rng.gen_range(1..=5)),
                ));
            }
            _ => {}
        }
    }
    loop {
        let mut exponents: Vec<AffineForm> = (0..nvars)
            .map(|_| {
                let mut e = AffineForm::constant(rng.gen_range(0..=1));
                for j in 0..k {
                    let a = [0, 0, 1, 1, 2][rng.gen_range(0..5)];
                    if a != 0 {
                        e.add_term(&format!("p{j}"), a);
                    }
                }
                e
            })
            .collect();
        if let Some((j, i, c)) = difference {
            if rng.gen_bool(0.5) {
                let v = rng.gen_range(0..nvars);
                exponents[v] = exponents[v].add(&p(j).sub(&p(i)).add_constant(-c));
            }
        }
        let total = exponents
            .iter()
            .fold(AffineForm::constant(0), |acc, e| acc.add(e));
        if (0..k).all(|j| total.coeff(&format!("p{j}")) >= 1) {
            return ParametricMonomial {
                label: "random".into(),
                exponents,
                region: Region::new(params, constraints),
            };
        }
    }
}

/// Compares the summed rational function with direct enumeration through
/// total degree `depth`.
pub fn check_region(pm: &ParametricMonomial, depth: i64) -> Result<(), String> {
    let mut sum = RationalExpr::zero(pm.exponents.len());
    for piece in split_min(pm) {
        sum.extend(lattice_sum(&piece).map_err(|e| format!("{pm}: {e}"))?);
    }
    let got = series(&sum, depth).map_err(|e| format!("{pm}: {e}"))?;
    let want = lattice_series(pm, depth + 2, depth);
    if got == want {
        Ok(())
    } else {
        Err(format!("{pm}: series mismatch\nsum:\n{}", sum.to_text()))
    }
}

// ------------------------------------------------------- parallel arrays

/// Three independent directions inside L(6, n): a point `(u, v, s)` raises
/// three distinct coordinates above a fixed weakly increasing base.
#[derive(Debug, Clone)]
pub struct Embedding {
    base: [u32; 6],
    slots: [usize; 3],
    n: u32,
}

impl Embedding {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        let mut low = [
            rng.gen_range(0..=2u32),
            rng.gen_range(0..=2),
            rng.gen_range(0..=2),
        ];
        low.sort_unstable();
        let o3 = low[2] + rng.gen_range(0..=2);
        let o4 = o3 + 4 + rng.gen_range(0..=1);
        let o5 = o4 + 4 + rng.gen_range(0..=1);
        let n = o5 + 4 + rng.gen_range(0..=2);
        let mut slots = [3usize, 4, 5];
        slots.shuffle(rng);
        Self {
            base: [low[0], low[1], low[2], o3, o4, o5],
            slots,
            n,
        }
    }

    pub fn point(&self, d: [u32; 3]) -> LatticeVector {
        let mut c = self.base;
        for (slot, step) in self.slots.iter().zip(d) {
            c[*slot] += step;
        }
        LatticeVector::new(c.to_vec(), self.n).expect("embedding stays in L(6,n)")
    }

    pub fn chain(&self, u: u32, v: u32, len: u32) -> ConcreteChain {
        ConcreteChain::new((0..len).map(|s| self.point([u, v, s])).collect()).expect("chain")
    }

    pub fn base_rank(&self) -> i64 {
        self.point([0, 0, 0]).rank() as i64
    }
}

pub struct RowCase {
    pub row: ParallelRow,
    pub k: usize,
    pub len: usize,
    pub input: Vec<ConcreteChain>,
}

pub struct GridCase {
    pub grid: ParallelGrid,
    pub p: usize,
    pub q: usize,
    pub len: usize,
    pub input: Vec<ConcreteChain>,
}

pub fn random_row(rng: &mut ChaCha8Rng) -> RowCase {
    let emb = Embedding::random(rng);
    let k = rng.gen_range(0..=3u32);
    let len = rng.gen_range(1..=5u32);
    let mut input: Vec<ConcreteChain> = (0..=k).map(|j| emb.chain(j, 0, len)).collect();
    let center = HalfInt::from_twice(2 * emb.base_rank() + i64::from(k) + i64::from(len) - 1);
    input.shuffle(rng);
    let row = ParallelRow::new(input.clone(), center).expect("valid row");
    RowCase {
        row,
        k: k as usize,
        len: len as usize,
        input,
    }
}

pub fn random_grid(rng: &mut ChaCha8Rng) -> GridCase {
    let emb = Embedding::random(rng);
    let p = rng.gen_range(1..=4u32);
    let q = rng.gen_range(1..=4u32);
    let len = rng.gen_range(1..=5u32);
    let mut rows: Vec<Vec<ConcreteChain>> = (0..p)
        .map(|u| (0..q).map(|v| emb.chain(u, v, len)).collect())
        .collect();
    let input: Vec<ConcreteChain> = rows.iter().flatten().cloned().collect();
    for r in &mut rows {
        r.shuffle(rng);
    }
    rows.shuffle(rng);
    let center =
        HalfInt::from_twice(2 * emb.base_rank() + i64::from(p + q - 2) + i64::from(len) - 1);
    let grid = ParallelGrid::new(rows, center).expect("valid grid");
    GridCase {
        grid,
        p: p as usize,
        q: q as usize,
        len: len as usize,
        input,
    }
}

/// Output chains are saturated, symmetric about `center`, and partition
/// the input elements.
pub fn check_perimeter(
    input: &[ConcreteChain],
    output: &[ConcreteChain],
    center: HalfInt,
) -> Result<(), String> {
    let mut want: Vec<&LatticeVector> = input.iter().flat_map(|c| c.elements()).collect();
    let mut got: Vec<&LatticeVector> = output.iter().flat_map(|c| c.elements()).collect();
    want.sort();
    got.sort();
    if want != got {
        return Err(format!(
            "elements differ: {} in, {} out",
            want.len(),
            got.len()
        ));
    }
    if got.windows(2).any(|w| w[0] == w[1]) {
        return Err("duplicate element".into());
    }
    for (i, c) in output.iter().enumerate() {
        if !c.is_saturated() {
            return Err(format!("chain {i} is not saturated"));
        }
        if c.end_rank_sum() as i64 != center.twice() {
            return Err(format!(
                "chain {i} has end-rank sum {} (want {center} * 2)",
                c.end_rank_sum()
            ));
        }
    }
    Ok(())
}

/// `|D_t| = L + k - 2t` for `t = 0..=min(k, L - 1)`.
pub fn row_sizes(k: usize, len: usize) -> Vec<usize> {
    (0..=k.min(len - 1)).map(|t| len + k - 2 * t).collect()
}

/// Columns of height `p` peel into lengths `L + p - 1 - 2t`; each level is
/// then a row of `q` chains.
pub fn grid_sizes(p: usize, q: usize, len: usize) -> Vec<usize> {
    let mut out: Vec<usize> = row_sizes(p - 1, len)
        .into_iter()
        .flat_map(|l| row_sizes(q - 1, l))
        .collect();
    out.sort_unstable();
    out
}

// -------------------------------------------------------------- mutations

pub struct Mutation {
    pub name: String,
    pub m: usize,
    pub families: Vec<ChainFamily>,
}

fn edit(base: &str, from: &str, to: &str) -> String {
    assert!(base.contains(from), "`{from}` not in fixture");
    base.replacen(from, to, 1)
}

fn drop_line(base: &str, line: &str) -> String {
    let out: Vec<&str> = base.lines().filter(|l| *l != line).collect();
    assert_eq!(
        out.len() + 1,
        base.lines().count(),
        "`{line}` not in fixture"
    );
    out.join("\n") + "\n"
}

/// Broken variants of the shipped decompositions of L(1,n) and L(2,n).
pub fn mutations() -> Vec<Mutation> {
    let l1 = fixtures::source("l1").unwrap();
    let l2 = fixtures::source("l2").unwrap();
    let seg1 = "segment j i .. n - i : (i, j)";
    let seg2 = "segment t i + 1 .. n - i : (t, n - i)";
    let line = "segment t 0 .. n : (t)";
    let texts: Vec<(&str, usize, String)> = vec![
        ("l1: drop the family", 1, String::new()),
        (
            "l1: duplicate the family",
            1,
            format!("{l1}{}", l1.replace("family line", "family line2")),
        ),
        ("l1: raise lo", 1, edit(l1, line, "segment t 1 .. n : (t)")),
        (
            "l1: lower hi",
            1,
            edit(l1, line, "segment t 0 .. n - 1 : (t)"),
        ),
        (
            "l1: shift template",
            1,
            edit(l1, line, "segment t 0 .. n : (t + 1)"),
        ),
        ("l2: drop the family", 2, String::new()),
        (
            "l2: duplicate the family",
            2,
            format!("{l2}{}", l2.replace("family hook", "family hook2")),
        ),
        (
            "l2: segment 1 lo + 1",
            2,
            edit(l2, seg1, "segment j i + 1 .. n - i : (i, j)"),
        ),
        (
            "l2: segment 1 lo - 1",
            2,
            edit(l2, seg1, "segment j i - 1 .. n - i : (i, j)"),
        ),
        (
            "l2: segment 1 hi + 1",
            2,
            edit(l2, seg1, "segment j i .. n - i + 1 : (i, j)"),
        ),
        (
            "l2: segment 1 hi - 1",
            2,
            edit(l2, seg1, "segment j i .. n - i - 1 : (i, j)"),
        ),
        (
            "l2: segment 2 lo + 1",
            2,
            edit(l2, seg2, "segment t i + 2 .. n - i : (t, n - i)"),
        ),
        (
            "l2: segment 2 lo - 1",
            2,
            edit(l2, seg2, "segment t i .. n - i : (t, n - i)"),
        ),
        (
            "l2: segment 2 hi + 1",
            2,
            edit(l2, seg2, "segment t i + 1 .. n - i + 1 : (t, n - i)"),
        ),
        (
            "l2: segment 2 hi - 1",
            2,
            edit(l2, seg2, "segment t i + 1 .. n - i - 1 : (t, n - i)"),
        ),
        (
            "l2: constraint 2i <= n - 1",
            2,
            edit(l2, "where 2*i <= n", "where 2*i <= n - 1"),
        ),
        (
            "l2: constraint 2i + 2 <= n",
            2,
            edit(l2, "where 2*i <= n", "where 2*i + 2 <= n"),
        ),
        (
            "l2: constraint 3i <= n",
            2,
            edit(l2, "where 2*i <= n", "where 3*i <= n"),
        ),
        (
            "l2: constraint i >= 1",
            2,
            edit(l2, "where 2*i <= n", "where 2*i <= n\nwhere i >= 1"),
        ),
        ("l2: drop segment 1", 2, drop_line(l2, seg1)),
        ("l2: drop segment 2", 2, drop_line(l2, seg2)),
        (
            "l2: template (i, j + 1)",
            2,
            edit(l2, seg1, "segment j i .. n - i : (i, j + 1)"),
        ),
        (
            "l2: template (i + 1, j)",
            2,
            edit(l2, seg1, "segment j i .. n - i : (i + 1, j)"),
        ),
        (
            "l2: template (t - 1, n - i)",
            2,
            edit(l2, seg2, "segment t i + 1 .. n - i : (t - 1, n - i)"),
        ),
        (
            "l2: template (t, n - i - 1)",
            2,
            edit(l2, seg2, "segment t i + 1 .. n - i : (t, n - i - 1)"),
        ),
    ];
    texts
        .into_iter()
        .map(|(name, m, text)| Mutation {
            name: name.to_string(),
            m,
            families: parse_family_file(&text).unwrap_or_else(|e| panic!("{name}: {e}")),
        })
        .collect()
}

/// First failing `n <= max_n` with a witness, or `None` if every check passes.
pub fn verify_failure(families: &[ChainFamily], m: usize, max_n: u32) -> Option<String> {
    for n in 0..=max_n {
        let chains = match families_to_chains(families, n) {
            Ok(c) => c,
            Err(e) => return Some(format!("n={n}: {e}")),
        };
        match check_scd(&chains, m, n) {
            Ok(v) if v.passed() => {}
            Ok(v) => {
                return Some(format!(
                    "n={n}: {}",
                    v.witnesses().next().expect("failed verdict has a witness")
                ))
            }
            Err(e) => return Some(format!("n={n}: {e}")),
        }
    }
    None
}

/// Sums and proves; `Err` when the families are rejected before proving.
pub fn prove_families(families: &[ChainFamily], m: usize) -> Result<ProveSummary, String> {
    if families.is_empty() {
        return Ok(prove_against_target(
            &RationalExpr::zero(m + 1),
            0,
            m,
            &ProveConfig::default(),
        ));
    }
    let tw = total_weight(families).map_err(|e| e.to_string())?;
    Ok(prove_against_target(
        &tw.expr(),
        tw.grouped_count(),
        m,
        &ProveConfig::default(),
    ))
}

// ------------------------------------------------------ rational functions

/// `1/((1-a)(1-ab)) + b/((1-b)(1-ab)) - 1/((1-a)(1-b))` with a = x0, b = x1.
pub fn partial_fraction_identity() -> RationalExpr {
    let one = coeff(1);
    RationalExpr::from_terms(
        2,
        vec![
            RationalTerm::atomic(
                one.clone(),
                mono(&[0, 0]),
                [(mono(&[1, 0]), 1), (mono(&[1, 1]), 1)],
            ),
            RationalTerm::atomic(
                one.clone(),
                mono(&[0, 1]),
                [(mono(&[0, 1]), 1), (mono(&[1, 1]), 1)],
            ),
            RationalTerm::atomic(
                -one,
                mono(&[0, 0]),
                [(mono(&[1, 0]), 1), (mono(&[0, 1]), 1)],
            ),
        ],
    )
}

/// Plain data for a power-series term: coefficient, numerator exponents and
/// `(mu exponents, multiplicity)` factors.
#[derive(Debug, Clone)]
pub struct TermSpec {
    pub c: i64,
    pub numer: Vec<i64>,
    pub factors: Vec<(Vec<i64>, u32)>,
}

impl TermSpec {
    pub fn term(&self) -> RationalTerm {
        RationalTerm::atomic(
            coeff(self.c),
            mono(&self.numer),
            self.factors.iter().map(|(e, k)| (mono(e), *k)),
        )
    }
}

pub fn expr_of(nvars: usize, specs: &[TermSpec]) -> RationalExpr {
    RationalExpr::from_terms(nvars, specs.iter().map(TermSpec::term).collect())
}

fn mul_exps(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Rewrites one term into an equal sum of terms using
/// `1/(1-mu) = 1 + mu/(1-mu)`, `1/(1-mu) = (1+mu)/(1-mu^2)` or
/// `1/((1-a)(1-b)) = 1/((1-a)(1-ab)) + b/((1-b)(1-ab))`.
pub fn rewrite(spec: &TermSpec, rule: u8) -> Vec<TermSpec> {
    let mut out = Vec::new();
    let mut base = spec.clone();
    match rule % 3 {
        0 => {
            let (mu, k) = base.factors.remove(0);
            let mut a = base.clone();
            if k > 1 {
                a.factors.push((mu.clone(), k - 1));
            }
            let mut b = base.clone();
            b.numer = mul_exps(&b.numer, &mu);
            b.factors.push((mu, k));
            out.push(a);
            out.push(b);
        }
        1 => {
            let (mu, k) = base.factors.remove(0);
            if k > 1 {
                base.factors.push((mu.clone(), k - 1));
            }
            base.factors.push((mu.iter().map(|e| 2 * e).collect(), 1));
            let mut b = base.clone();
            b.numer = mul_exps(&b.numer, &mu);
            out.push(base);
            out.push(b);
        }
        _ => {
            if base.factors.len() < 2 || base.factors[0].0 == base.factors[1].0 {
                return rewrite(spec, 0);
            }
            let (a, ka) = base.factors.remove(0);
            let (b, kb) = base.factors.remove(0);
            let ab = mul_exps(&a, &b);
            let rest = |extra: Vec<(Vec<i64>, u32)>| {
                let mut t = base.clone();
                t.factors.extend(extra);
                t
            };
            let with = |mu: &Vec<i64>, k: u32| {
                if k > 1 {
                    vec![(mu.clone(), k - 1)]
                } else {
                    vec![]
                }
            };
            let mut first = rest([vec![(a.clone(), ka), (ab.clone(), 1)], with(&b, kb)].concat());
            let mut second = rest([vec![(b.clone(), kb), (ab, 1)], with(&a, ka)].concat());
            second.numer = mul_exps(&second.numer, &b);
            first.factors.retain(|(_, k)| *k > 0);
            second.factors.retain(|(_, k)| *k > 0);
            out.push(first);
            out.push(second);
        }
    }
    out
}

/// `rewrite(E) - E`, which is identically zero.
pub fn rewritten_zero(nvars: usize, specs: &[TermSpec], rules: &[u8]) -> RationalExpr {
    let mut pos = Vec::new();
    for (i, s) in specs.iter().enumerate() {
        pos.extend(rewrite(s, rules[i % rules.len()]));
    }
    expr_of(nvars, &pos).sub(&expr_of(nvars, specs))
}

pub fn random_poly(rng: &mut ChaCha8Rng, degs: &[i64]) -> Poly {
    let mut out = Poly::zero(degs.len());
    while out.is_zero() {
        for _ in 0..rng.gen_range(1..=6) {
            let e: Vec<i64> = degs.iter().map(|&d| rng.gen_range(0..=d)).collect();
            out.add_term(mono(&e), coeff(rng.gen_range(-5..=5)));
        }
    }
    out
}

pub fn per_variable_degree(p: &Poly) -> Vec<i64> {
    (0..p.nvars())
        .map(|i| p.terms().map(|(m, _)| m.exp(i)).max().unwrap_or(-1))
        .collect()
}

/// Writes `P` as `sum c m (1 - mu) / (1 - mu)` split into atomic terms.
pub fn disguised_poly(p: &Poly, mu: &Monomial) -> RationalExpr {
    let mut terms = Vec::new();
    for (m, c) in p.terms() {
        terms.push(RationalTerm::atomic(
            c.clone(),
            m.clone(),
            [(mu.clone(), 1)],
        ));
        terms.push(RationalTerm::atomic(
            -c.clone(),
            m.mul(mu),
            [(mu.clone(), 1)],
        ));
    }
    RationalExpr::from_terms(p.nvars(), terms)
}

pub fn bounds_map(region: &Region, b: i64) -> BTreeMap<String, i64> {
    region.params.iter().map(|p| (p.clone(), b)).collect()
}
