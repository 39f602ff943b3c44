//! Generating functions of chain families.
//!
//! Every element `a` of every chain contributes its weight monomial; summing
//! over all parameter points (including `n`) gives a rational function that
//! must equal `1 / prod_{i=0}^{m} (1 - x_i)` exactly when the families
//! partition every `L(m, n)`.
//!
//! Pipeline: [`chain_weight`] (one parametric monomial per segment),
//! [`split_min`] (Min/Max-free disjoint pieces), [`lattice_sum`] (geometric
//! series elimination, one parameter at a time).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::chainfam::{AffineForm, Assignment, Bound, ChainFamily, Constraint, Region, CAP_PARAM};
use crate::ratfun::{Coeff, Factor, Monomial, Poly, RationalExpr, RationalTerm};

/// Upper limit on partial sums explored while summing one piece.
pub const DEFAULT_STATE_LIMIT: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SumError {
    #[error("{context}: {reason}")]
    Malformed { context: String, reason: String },
    #[error("{context}: sum over `{param}` diverges (ratio {ratio})")]
    Divergent {
        context: String,
        param: String,
        ratio: String,
    },
    #[error("{context}: no parameter among [{params}] can be summed under [{constraints}]")]
    Unsolvable {
        context: String,
        params: String,
        constraints: String,
    },
    #[error("{context}: more than {limit} partial sums")]
    TooLarge { context: String, limit: usize },
    #[error("families of different widths: {first} and {other}")]
    MixedWidth { first: usize, other: usize },
}

/// `prod x_i^{exponents[i]}` summed over the lattice points of `region`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParametricMonomial {
    /// Where the monomial came from, used in error messages.
    pub label: String,
    pub exponents: Vec<AffineForm>,
    pub region: Region,
}

impl fmt::Display for ParametricMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.exponents.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "x{i}^({e})")?;
        }
        f.write_str(" over")?;
        if self.region.constraints.is_empty() {
            f.write_str(" all")?;
        }
        for (i, c) in self.region.constraints.iter().enumerate() {
            write!(f, "{}{c}", if i == 0 { " " } else { ", " })?;
        }
        Ok(())
    }
}

/// Weight exponents of a vector given by affine coordinates:
/// `(n - a_m, a_m - a_{m-1}, ..., a_2 - a_1, a_1)`.
pub fn weight_exponents(template: &[AffineForm]) -> Vec<AffineForm> {
    let m = template.len();
    let mut out = Vec::with_capacity(m + 1);
    out.push(AffineForm::var(CAP_PARAM).sub(&template[m - 1]));
    for r in (1..m).rev() {
        out.push(template[r].sub(&template[r - 1]));
    }
    out.push(template[0].clone());
    out
}

/// One parametric monomial per segment. The runner is re-based to start at
/// zero, so each piece sums over `0 <= runner <= hi - lo`.
pub fn chain_weight(family: &ChainFamily) -> Result<Vec<ParametricMonomial>, SumError> {
    let mut out = Vec::with_capacity(family.segments.len());
    for (si, seg) in family.segments.iter().enumerate() {
        let shifted = AffineForm::var(&seg.runner).add(&seg.lo);
        let template: Vec<AffineForm> = seg
            .template
            .iter()
            .map(|a| a.substitute(&seg.runner, &shifted))
            .collect();
        let mut params = family.region.params.clone();
        params.push(seg.runner.clone());
        let mut constraints = family.region.constraints.clone();
        constraints.push(Constraint::le(
            AffineForm::var(&seg.runner),
            seg.hi.sub(&seg.lo),
        ));
        out.push(ParametricMonomial {
            label: format!("family {} segment {si}", family.name),
            exponents: weight_exponents(&template),
            region: Region::new(params, constraints),
        });
    }
    check_small_points(family)?;
    Ok(out)
}

/// Evaluates the weight exponents at every point with `n <= 3` and reports
/// the first negative one.
fn check_small_points(family: &ChainFamily) -> Result<(), SumError> {
    for n in 0..=3u32 {
        let Ok(points) = family.points_at(n) else {
            continue;
        };
        for point in points {
            let mut scratch: Assignment = point.clone();
            for (si, seg) in family.segments.iter().enumerate() {
                let (Some(lo), Some(hi)) = (seg.lo.eval(&point), seg.hi.eval(&point)) else {
                    continue;
                };
                let exps = weight_exponents(&seg.template);
                for t in lo..=hi {
                    scratch.insert(seg.runner.clone(), t);
                    for (i, e) in exps.iter().enumerate() {
                        let v = e.eval(&scratch).unwrap_or(0);
                        if v < 0 {
                            let at: Vec<String> =
                                point.iter().map(|(k, v)| format!("{k}={v}")).collect();
                            return Err(SumError::Malformed {
                                context: format!("family {} segment {si}", family.name),
                                reason: format!(
                                    "exponent of x{i} is {v} at [{}], {}={t}",
                                    at.join(", "),
                                    seg.runner
                                ),
                            });
                        }
                    }
                }
                scratch.remove(&seg.runner);
            }
        }
    }
    Ok(())
}

/// Rewrites every `p <= min(...)` / `p >= max(...)` into disjoint Min/Max-free
/// pieces. Ties go to the first-listed argument.
pub fn split_min(pm: &ParametricMonomial) -> Vec<ParametricMonomial> {
    let mut done: Vec<Vec<Constraint>> = vec![Vec::new()];
    for c in &pm.region.constraints {
        let alternatives: Vec<Vec<Constraint>> = match &c.right {
            Bound::Affine(_) => vec![vec![c.clone()]],
            Bound::Min(args) => (0..args.len())
                .map(|k| {
                    let mut cs = vec![Constraint::le(c.left.clone(), args[k].clone())];
                    for (j, a) in args.iter().enumerate() {
                        if j < k {
                            cs.push(Constraint::le(args[k].clone(), a.add_constant(-1)));
                        } else if j > k {
                            cs.push(Constraint::le(args[k].clone(), a.clone()));
                        }
                    }
                    cs
                })
                .collect(),
            Bound::Max(args) => (0..args.len())
                .map(|k| {
                    let mut cs = vec![Constraint::ge(c.left.clone(), args[k].clone())];
                    for (j, a) in args.iter().enumerate() {
                        if j < k {
                            cs.push(Constraint::ge(args[k].clone(), a.add_constant(1)));
                        } else if j > k {
                            cs.push(Constraint::ge(args[k].clone(), a.clone()));
                        }
                    }
                    cs
                })
                .collect(),
        };
        done = done
            .into_iter()
            .flat_map(|prefix| {
                alternatives
                    .iter()
                    .map(move |alt| prefix.iter().cloned().chain(alt.iter().cloned()).collect())
            })
            .collect();
    }
    let many = done.len() > 1;
    done.into_iter()
        .enumerate()
        .map(|(i, constraints)| ParametricMonomial {
            label: if many {
                format!("{} piece {i}", pm.label)
            } else {
                pm.label.clone()
            },
            exponents: pm.exponents.clone(),
            region: Region::new(pm.region.params.clone(), constraints),
        })
        .collect()
}

/// Affine form over parameter indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Lin {
    c: i64,
    a: Vec<i64>,
}

impl Lin {
    fn constant(c: i64, k: usize) -> Self {
        Lin { c, a: vec![0; k] }
    }

    fn from_affine(f: &AffineForm, params: &[String]) -> Self {
        let mut a = vec![0; params.len()];
        for (name, &c) in f.coeffs() {
            let i = params
                .iter()
                .position(|p| p == name)
                .expect("names resolved against params");
            a[i] += c;
        }
        Lin {
            c: f.constant_term(),
            a,
        }
    }

    fn is_constant(&self) -> bool {
        self.a.iter().all(|&x| x == 0)
    }

    /// Nonnegative at every point of the nonnegative orthant.
    fn always_nonneg(&self) -> bool {
        self.c >= 0 && self.a.iter().all(|&x| x >= 0)
    }

    /// `sum a_i p_i + c >= 0` with the coefficients divided by their gcd and
    /// the constant rounded down; same integer solutions.
    fn tightened(self) -> Lin {
        let g = self.a.iter().fold(0i64, |g, &x| g.gcd(&x));
        if g <= 1 {
            return self;
        }
        Lin {
            c: Integer::div_floor(&self.c, &g),
            a: self.a.iter().map(|x| x / g).collect(),
        }
    }

    /// Negative at every point of the nonnegative orthant.
    fn always_negative(&self) -> bool {
        self.c < 0 && self.a.iter().all(|&x| x <= 0)
    }

    fn add(&self, o: &Lin) -> Lin {
        Lin {
            c: self.c + o.c,
            a: self.a.iter().zip(&o.a).map(|(x, y)| x + y).collect(),
        }
    }

    fn neg(&self) -> Lin {
        Lin {
            c: -self.c,
            a: self.a.iter().map(|x| -x).collect(),
        }
    }

    fn sub(&self, o: &Lin) -> Lin {
        self.add(&o.neg())
    }

    fn add_const(&self, k: i64) -> Lin {
        Lin {
            c: self.c + k,
            a: self.a.clone(),
        }
    }

    fn without(&self, p: usize) -> Lin {
        let mut out = self.clone();
        out.a[p] = 0;
        out
    }

    fn subst(&self, p: usize, val: &Lin) -> Lin {
        let k = self.a[p];
        if k == 0 {
            return self.clone();
        }
        let mut out = self.without(p);
        out.c += k * val.c;
        for (x, y) in out.a.iter_mut().zip(&val.a) {
            *x += k * y;
        }
        out
    }
}

#[derive(Debug, Clone)]
struct State {
    coeff: BigInt,
    exps: Vec<Lin>,
    /// each `>= 0`
    ineqs: Vec<Lin>,
    denom: Vec<Vec<i64>>,
    alive: Vec<bool>,
}

impl State {
    fn subst(&mut self, p: usize, val: &Lin) {
        for e in &mut self.exps {
            *e = e.subst(p, val);
        }
        for f in &mut self.ineqs {
            *f = f.subst(p, val);
        }
        self.alive[p] = false;
    }

    fn ratio(&self, p: usize) -> Vec<i64> {
        self.exps.iter().map(|e| e.a[p]).collect()
    }

    /// Drops tautologies, substitutes unit equalities; `None` if infeasible.
    fn normalize(mut self) -> Option<State> {
        loop {
            let mut kept = Vec::with_capacity(self.ineqs.len());
            for f in self.ineqs.drain(..) {
                let f = f.tightened();
                if f.always_negative() {
                    return None;
                }
                if !f.always_nonneg() {
                    kept.push(f);
                }
            }
            kept.sort();
            kept.dedup();
            self.ineqs = kept;
            let eq = self.ineqs.iter().find_map(|f| {
                let neg = f.neg();
                if !self.ineqs.contains(&neg) {
                    return None;
                }
                let p = (0..f.a.len()).find(|&p| self.alive[p] && f.a[p].abs() == 1)?;
                let val = if f.a[p] == 1 {
                    f.without(p).neg()
                } else {
                    f.without(p)
                };
                Some((p, val))
            });
            match eq {
                Some((p, val)) => {
                    self.subst(p, &val);
                    self.ineqs.push(val);
                }
                None => return Some(self),
            }
        }
    }
}

struct Bounds {
    lowers: Vec<Lin>,
    uppers: Vec<Lin>,
    non_unit: bool,
}

fn bounds_of(state: &State, p: usize) -> Bounds {
    let k = state.alive.len();
    let mut lowers = vec![Lin::constant(0, k)];
    let mut uppers = Vec::new();
    let mut non_unit = false;
    for f in &state.ineqs {
        match f.a[p] {
            0 => {}
            1 => lowers.push(f.without(p).neg()),
            -1 => uppers.push(f.without(p)),
            _ => non_unit = true,
        }
    }
    // a lower bound is redundant if another is always at least as large
    let lowers = prune(lowers, |keep, other| other.sub(keep).always_nonneg());
    let uppers = prune(uppers, |keep, other| keep.sub(other).always_nonneg());
    Bounds {
        lowers,
        uppers,
        non_unit,
    }
}

/// Removes every bound made redundant by another one (`redundant(b, by)`).
/// Among equivalent bounds the first is kept.
fn prune(mut v: Vec<Lin>, redundant: impl Fn(&Lin, &Lin) -> bool) -> Vec<Lin> {
    v.dedup();
    let mut out: Vec<Lin> = Vec::new();
    for (i, b) in v.iter().enumerate() {
        let dominated = v
            .iter()
            .enumerate()
            .any(|(j, o)| j != i && redundant(b, o) && !(redundant(o, b) && j > i));
        if !dominated {
            out.push(b.clone());
        }
    }
    out
}

/// `(chosen bound, side conditions)` making bound `k` the maximum.
fn max_split(bounds: &[Lin]) -> Vec<(Lin, Vec<Lin>)> {
    (0..bounds.len())
        .map(|k| {
            let side = bounds
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != k)
                .map(|(j, b)| {
                    let d = bounds[k].sub(b);
                    if j < k {
                        d.add_const(-1)
                    } else {
                        d
                    }
                })
                .collect();
            (bounds[k].clone(), side)
        })
        .collect()
}

/// `(chosen bound, side conditions)` making bound `k` the minimum.
fn min_split(bounds: &[Lin]) -> Vec<(Lin, Vec<Lin>)> {
    (0..bounds.len())
        .map(|k| {
            let side = bounds
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != k)
                .map(|(j, b)| {
                    let d = b.sub(&bounds[k]);
                    if j < k {
                        d.add_const(-1)
                    } else {
                        d
                    }
                })
                .collect();
            (bounds[k].clone(), side)
        })
        .collect()
}

/// Constant upper bounds implied by the inequalities, by propagation.
fn constant_upper_bounds(state: &State) -> Vec<Option<i64>> {
    let k = state.alive.len();
    let mut ub: Vec<Option<i64>> = vec![None; k];
    for _ in 0..=k {
        let mut changed = false;
        for f in &state.ineqs {
            for p in 0..k {
                let cp = f.a[p];
                if cp >= 0 || !state.alive[p] {
                    continue;
                }
                let mut rhs = f.c;
                let mut known = true;
                for (q, &cq) in f.a.iter().enumerate() {
                    if q == p || cq <= 0 {
                        continue;
                    }
                    match ub[q] {
                        Some(b) => rhs += cq * b,
                        None => {
                            known = false;
                            break;
                        }
                    }
                }
                if known {
                    let b = rhs.div_euclid(-cp);
                    if ub[p].is_none_or(|old| b < old) {
                        ub[p] = Some(b);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    ub
}

/// Widest constant range summed term by term instead of as a series.
const CONSTANT_WIDTH_LIMIT: i64 = 8;

/// Largest constant upper bound enumerated before resorting to a series
/// whose ratio has mixed signs.
const ENUMERATE_LIMIT: i64 = 64;

enum Plan {
    Infinite {
        p: usize,
        lowers: Vec<Lin>,
    },
    Finite {
        p: usize,
        lowers: Vec<Lin>,
        uppers: Vec<Lin>,
        reversed: bool,
    },
    /// every lower/upper pair differs by a constant
    Count {
        p: usize,
        lowers: Vec<Lin>,
        uppers: Vec<Lin>,
    },
    Enumerate {
        p: usize,
        upto: i64,
    },
}

fn is_nonneg(y: &[i64]) -> bool {
    y.iter().all(|&e| e >= 0)
}

fn is_zero(y: &[i64]) -> bool {
    y.iter().all(|&e| e == 0)
}

struct Ctx<'a> {
    label: &'a str,
    params: &'a [String],
}

impl Ctx<'_> {
    fn describe(&self, state: &State) -> (String, String) {
        let params: Vec<&str> = (0..self.params.len())
            .filter(|&p| state.alive[p])
            .map(|p| self.params[p].as_str())
            .collect();
        let cons: Vec<String> = state
            .ineqs
            .iter()
            .map(|f| format!("{} >= 0", self.show(f)))
            .collect();
        (params.join(", "), cons.join(", "))
    }

    fn show(&self, f: &Lin) -> String {
        let mut a = AffineForm::constant(f.c);
        for (p, &c) in f.a.iter().enumerate() {
            a.add_term(&self.params[p], c);
        }
        a.to_string()
    }

    /// Picks the next parameter to sum. Preference: single-value ranges,
    /// infinite geometric series, finite series with a one-signed ratio,
    /// short constant-width ranges, enumeration of a short constant range,
    /// finite series with a mixed ratio, then enumeration of any constant
    /// range. Later-declared parameters first within each kind.
    fn plan(&self, state: &State) -> Result<Plan, SumError> {
        let order: Vec<usize> = (0..state.alive.len())
            .rev()
            .filter(|&p| state.alive[p])
            .collect();
        let mut divergent = None;
        let mut tiers: [Option<Plan>; 5] = [None, None, None, None, None];
        let mut offer = |tier: usize, plan: Plan| {
            if tiers[tier].is_none() {
                tiers[tier] = Some(plan);
            }
        };
        for &p in &order {
            let y = state.ratio(p);
            let b = bounds_of(state, p);
            if b.non_unit {
                continue;
            }
            if b.uppers.is_empty() {
                if is_nonneg(&y) && !is_zero(&y) {
                    offer(
                        1,
                        Plan::Infinite {
                            p,
                            lowers: b.lowers,
                        },
                    );
                } else {
                    divergent.get_or_insert((p, y));
                }
                continue;
            }
            let widths: Option<Vec<i64>> = max_split(&b.lowers)
                .iter()
                .flat_map(|(l, _)| min_split(&b.uppers).into_iter().map(move |(u, _)| u.sub(l)))
                .map(|d| d.is_constant().then_some(d.c))
                .collect();
            let widest = widths.as_ref().and_then(|w| w.iter().copied().max());
            match widest {
                Some(w) if w <= 0 => offer(
                    0,
                    Plan::Count {
                        p,
                        lowers: b.lowers,
                        uppers: b.uppers,
                    },
                ),
                Some(_) if is_zero(&y) => offer(
                    3,
                    Plan::Count {
                        p,
                        lowers: b.lowers,
                        uppers: b.uppers,
                    },
                ),
                _ if is_zero(&y) => {}
                _ if is_nonneg(&y) || y.iter().all(|&e| e <= 0) => {
                    let reversed = !is_nonneg(&y);
                    offer(
                        2,
                        Plan::Finite {
                            p,
                            lowers: b.lowers,
                            uppers: b.uppers,
                            reversed,
                        },
                    )
                }
                Some(w) if w <= CONSTANT_WIDTH_LIMIT => offer(
                    3,
                    Plan::Count {
                        p,
                        lowers: b.lowers,
                        uppers: b.uppers,
                    },
                ),
                _ => offer(
                    4,
                    Plan::Finite {
                        p,
                        lowers: b.lowers,
                        uppers: b.uppers,
                        reversed: false,
                    },
                ),
            }
        }
        if let Some(plan) = tiers[..4].iter_mut().find_map(Option::take) {
            return Ok(plan);
        }
        // a short constant range keeps every term a power series, which a
        // mixed-sign ratio does not
        let ub = constant_upper_bounds(state);
        let enumerable = |limit: i64| {
            order
                .iter()
                .copied()
                .find(|&p| ub[p].is_some_and(|b| b <= limit))
        };
        if let Some(p) = enumerable(ENUMERATE_LIMIT) {
            return Ok(Plan::Enumerate {
                p,
                upto: ub[p].expect("found"),
            });
        }
        if let Some(plan) = tiers[4].take() {
            return Ok(plan);
        }
        if let Some(p) = enumerable(i64::MAX) {
            return Ok(Plan::Enumerate {
                p,
                upto: ub[p].expect("found"),
            });
        }
        if let Some((p, y)) = divergent {
            let ratio = Monomial::from_exponents(y).to_string();
            return Err(SumError::Divergent {
                context: self.label.to_string(),
                param: self.params[p].clone(),
                ratio,
            });
        }
        let (params, constraints) = self.describe(state);
        Err(SumError::Unsolvable {
            context: self.label.to_string(),
            params,
            constraints,
        })
    }

    fn apply(&self, state: State, plan: Plan, out: &mut Vec<State>) {
        let with = |p: usize, val: &Lin, coeff: BigInt, side: &[Lin], ratio: Option<Vec<i64>>| {
            let mut s = state.clone();
            // drop the inequalities on p; the plan's side conditions replace them
            s.ineqs.retain(|f| f.a[p] == 0);
            s.ineqs.extend(side.iter().cloned());
            s.subst(p, val);
            s.coeff = coeff;
            if let Some(r) = ratio {
                s.denom.push(r);
            }
            s
        };
        match plan {
            Plan::Infinite { p, lowers } => {
                let y = state.ratio(p);
                for (l, side) in max_split(&lowers) {
                    out.push(with(p, &l, state.coeff.clone(), &side, Some(y.clone())));
                }
            }
            Plan::Finite {
                p,
                lowers,
                uppers,
                reversed,
            } => {
                let y = state.ratio(p);
                for (l, side_l) in max_split(&lowers) {
                    for (u, side_u) in min_split(&uppers) {
                        let mut side = side_l.clone();
                        side.extend(side_u.iter().cloned());
                        side.push(u.sub(&l));
                        if reversed {
                            // sum_{l..=u} y^p = (y^u - y^(l-1)) / (1 - 1/y)
                            let z: Vec<i64> = y.iter().map(|e| -e).collect();
                            out.push(with(p, &u, state.coeff.clone(), &side, Some(z.clone())));
                            out.push(with(
                                p,
                                &l.add_const(-1),
                                -state.coeff.clone(),
                                &side,
                                Some(z),
                            ));
                        } else {
                            out.push(with(p, &l, state.coeff.clone(), &side, Some(y.clone())));
                            out.push(with(
                                p,
                                &u.add_const(1),
                                -state.coeff.clone(),
                                &side,
                                Some(y.clone()),
                            ));
                        }
                    }
                }
            }
            Plan::Count { p, lowers, uppers } => {
                let summand_free = is_zero(&state.ratio(p));
                for (l, side_l) in max_split(&lowers) {
                    for (u, side_u) in min_split(&uppers) {
                        let width = u.c - l.c + 1;
                        if width <= 0 {
                            continue;
                        }
                        let mut side = side_l.clone();
                        side.extend(side_u.iter().cloned());
                        if summand_free {
                            out.push(with(p, &l, &state.coeff * BigInt::from(width), &side, None));
                        } else {
                            for i in 0..width {
                                out.push(with(
                                    p,
                                    &l.add_const(i),
                                    state.coeff.clone(),
                                    &side,
                                    None,
                                ));
                            }
                        }
                    }
                }
            }
            Plan::Enumerate { p, upto } => {
                let k = state.alive.len();
                for v in 0..=upto {
                    let mut s = state.clone();
                    s.subst(p, &Lin::constant(v, k));
                    out.push(s);
                }
            }
        }
    }
}

/// Exact sum of the monomial over the (Min/Max-free) region. Terms sharing a
/// denominator are merged into one term with a polynomial numerator.
pub fn lattice_sum(pm: &ParametricMonomial) -> Result<RationalExpr, SumError> {
    lattice_sum_limited(pm, DEFAULT_STATE_LIMIT)
}

pub fn lattice_sum_limited(
    pm: &ParametricMonomial,
    limit: usize,
) -> Result<RationalExpr, SumError> {
    let params = &pm.region.params;
    let k = params.len();
    let nvars = pm.exponents.len();
    let mut ineqs = Vec::new();
    for c in &pm.region.constraints {
        if c.has_min_max() {
            return Err(SumError::Malformed {
                context: pm.label.clone(),
                reason: format!("`{c}` must be split before summing"),
            });
        }
        ineqs.extend(c.linear_parts().iter().map(|f| Lin::from_affine(f, params)));
    }
    let start = State {
        coeff: BigInt::one(),
        exps: pm
            .exponents
            .iter()
            .map(|e| Lin::from_affine(e, params))
            .collect(),
        ineqs,
        denom: Vec::new(),
        alive: vec![true; k],
    };
    let ctx = Ctx {
        label: &pm.label,
        params,
    };
    let mut stack = vec![start];
    let mut finished: BTreeMap<Vec<(Factor, u32)>, Poly> = BTreeMap::new();
    let mut visited = 0usize;
    while let Some(state) = stack.pop() {
        visited += 1;
        if visited > limit {
            return Err(SumError::TooLarge {
                context: pm.label.clone(),
                limit,
            });
        }
        let Some(state) = state.normalize() else {
            continue;
        };
        if state.coeff.is_zero() {
            continue;
        }
        if !state.alive.iter().any(|&a| a) {
            let mono = Monomial::from_exponents(state.exps.iter().map(|e| e.c).collect());
            let raw = state
                .denom
                .iter()
                .map(|y| (Monomial::from_exponents(y.clone()), 1));
            let term = RationalTerm::atomic(Coeff::from_integer(state.coeff), mono, raw);
            finished
                .entry(term.denom().to_vec())
                .or_insert_with(|| Poly::zero(nvars))
                .add_assign(term.numer());
            continue;
        }
        let plan = ctx.plan(&state)?;
        let mut next = Vec::new();
        ctx.apply(state, plan, &mut next);
        // reversed so the first branch is summed first
        stack.extend(next.into_iter().rev());
    }
    let terms = finished
        .into_iter()
        .filter(|(_, p)| !p.is_zero())
        .map(|(d, p)| RationalTerm::new(p, d.into_iter().map(|(f, k)| (f.monomial().clone(), k))))
        .collect();
    Ok(RationalExpr::from_terms(nvars, terms))
}

/// The summed weight of one Min/Max-free piece.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightPiece {
    pub label: String,
    pub expr: RationalExpr,
}

/// Every piece of a family list, in family, segment, piece order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TotalWeight {
    pub m: usize,
    pub pieces: Vec<WeightPiece>,
}

impl TotalWeight {
    /// Number of grouped rational terms (one per summed piece).
    pub fn grouped_count(&self) -> usize {
        self.pieces.len()
    }

    pub fn expr(&self) -> RationalExpr {
        let mut out = RationalExpr::zero(self.m + 1);
        for p in &self.pieces {
            out.extend(p.expr.clone());
        }
        out
    }

    /// Canonical text with a `#` comment line before each piece.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.pieces {
            out.push_str("# ");
            out.push_str(&p.label);
            out.push('\n');
            out.push_str(&p.expr.to_text());
        }
        out
    }
}

/// `chain_weight`, `split_min` and `lattice_sum` over all families. Pieces
/// are summed in parallel; the output order does not depend on scheduling.
pub fn total_weight(families: &[ChainFamily]) -> Result<TotalWeight, SumError> {
    let m = families.first().map_or(1, |f| f.m);
    if let Some(f) = families.iter().find(|f| f.m != m) {
        return Err(SumError::MixedWidth {
            first: m,
            other: f.m,
        });
    }
    let mut pieces = Vec::new();
    for f in families {
        for pm in chain_weight(f)? {
            pieces.extend(split_min(&pm));
        }
    }
    let exprs: Vec<Result<RationalExpr, SumError>> = pieces.par_iter().map(lattice_sum).collect();
    let pieces = pieces
        .into_iter()
        .zip(exprs)
        .map(|(pm, e)| {
            e.map(|expr| WeightPiece {
                label: pm.label,
                expr,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TotalWeight { m, pieces })
}

/// `1 / prod_{i=0}^{m} (1 - x_i)`.
pub fn target_gf(m: usize) -> RationalExpr {
    let nvars = m + 1;
    let raw = (0..nvars).map(|i| (Monomial::var(nvars, i), 1));
    RationalExpr::from_terms(
        nvars,
        vec![RationalTerm::atomic(
            Coeff::one(),
            Monomial::one(nvars),
            raw,
        )],
    )
}
