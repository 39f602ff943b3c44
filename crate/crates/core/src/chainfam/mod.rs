//! Parametric chain families.
//!
//! A family is a list of segments. Each segment is a table: a running index
//! `t` sweeps `lo..=hi` and an affine template turns `(params, t)` into a
//! lattice vector. Concatenating the tables at one admissible parameter point
//! gives one saturated chain; ranging over all admissible points gives the
//! whole family.

mod affine;
mod parse;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::lattice::{ConcreteChain, LatticeError, LatticeVector};

pub use affine::{AffineForm, Assignment};
pub use parse::{parse_family_file, print_family_file};

/// Name of the distinguished lattice-cap parameter.
pub const CAP_PARAM: &str = "n";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("line {line}, column {col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("line {line}, column {col}: unknown parameter `{name}`")]
    UnknownParameter {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("line {line}: template has {found} coordinates but family `{family}` declares m = {expected}")]
    WidthMismatch {
        line: usize,
        family: String,
        expected: usize,
        found: usize,
    },
    #[error("family `{family}`: parameter `{param}` is unbounded once n is fixed")]
    Unbounded { family: String, param: String },
    #[error("family `{family}`: no bound supplied for parameter `{param}`")]
    MissingBound { family: String, param: String },
    #[error("family `{family}`: assignment {point} is not admissible")]
    NotAdmissible { family: String, point: String },
    #[error("family `{family}`, segment {segment}, t = {t}: {reason}")]
    Malformed {
        family: String,
        segment: usize,
        t: i64,
        reason: String,
    },
    #[error("family `{family}`: chain at {point} is not saturated between {lower} and {upper}")]
    NotSaturated {
        family: String,
        point: String,
        lower: LatticeVector,
        upper: LatticeVector,
    },
    #[error("family `{family}`: empty chain at {point}")]
    EmptyChain { family: String, point: String },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }
}

/// Right-hand side of a constraint. `Min` only appears under `<=` and `Max`
/// only under `>=`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Bound {
    Affine(AffineForm),
    Min(Vec<AffineForm>),
    Max(Vec<AffineForm>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub relation: Relation,
    pub left: AffineForm,
    pub right: Bound,
}

impl Constraint {
    pub fn new(left: AffineForm, relation: Relation, right: Bound) -> Option<Self> {
        match (&right, relation) {
            (Bound::Min(v), Relation::Le) | (Bound::Max(v), Relation::Ge) if !v.is_empty() => {}
            (Bound::Affine(_), _) => {}
            _ => return None,
        }
        Some(Self {
            relation,
            left,
            right,
        })
    }

    pub fn le(left: AffineForm, right: AffineForm) -> Self {
        Self {
            relation: Relation::Le,
            left,
            right: Bound::Affine(right),
        }
    }

    pub fn ge(left: AffineForm, right: AffineForm) -> Self {
        Self {
            relation: Relation::Ge,
            left,
            right: Bound::Affine(right),
        }
    }

    pub fn eq(left: AffineForm, right: AffineForm) -> Self {
        Self {
            relation: Relation::Eq,
            left,
            right: Bound::Affine(right),
        }
    }

    pub fn has_min_max(&self) -> bool {
        !matches!(self.right, Bound::Affine(_))
    }

    pub fn names(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.left.names().collect();
        match &self.right {
            Bound::Affine(a) => out.extend(a.names()),
            Bound::Min(v) | Bound::Max(v) => v.iter().for_each(|a| out.extend(a.names())),
        }
        out
    }

    pub fn holds_with(&self, lookup: impl Fn(&str) -> Option<i64> + Copy) -> Option<bool> {
        let l = self.left.eval_with(lookup)?;
        let r = match &self.right {
            Bound::Affine(a) => a.eval_with(lookup)?,
            Bound::Min(v) => v
                .iter()
                .map(|a| a.eval_with(lookup))
                .collect::<Option<Vec<_>>>()?
                .into_iter()
                .min()?,
            Bound::Max(v) => v
                .iter()
                .map(|a| a.eval_with(lookup))
                .collect::<Option<Vec<_>>>()?
                .into_iter()
                .max()?,
        };
        Some(match self.relation {
            Relation::Le => l <= r,
            Relation::Ge => l >= r,
            Relation::Eq => l == r,
        })
    }

    pub fn holds(&self, point: &Assignment) -> Option<bool> {
        self.holds_with(|n| point.get(n).copied())
    }

    /// The constraint as a conjunction of `form >= 0` inequalities
    /// (Min/Max expanded argument-wise, equalities doubled).
    pub fn linear_parts(&self) -> Vec<AffineForm> {
        let rights: Vec<&AffineForm> = match &self.right {
            Bound::Affine(a) => vec![a],
            Bound::Min(v) | Bound::Max(v) => v.iter().collect(),
        };
        let mut out = Vec::new();
        for r in rights {
            match self.relation {
                Relation::Le => out.push(r.sub(&self.left)),
                Relation::Ge => out.push(self.left.sub(r)),
                Relation::Eq => {
                    out.push(r.sub(&self.left));
                    out.push(self.left.sub(r));
                }
            }
        }
        out
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} ", self.left, self.relation.symbol())?;
        let list = |f: &mut fmt::Formatter<'_>, name: &str, v: &[AffineForm]| {
            write!(f, "{name}(")?;
            for (i, a) in v.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")
        };
        match &self.right {
            Bound::Affine(a) => write!(f, "{a}"),
            Bound::Min(v) => list(f, "min", v),
            Bound::Max(v) => list(f, "max", v),
        }
    }
}

/// Nonnegative integer points satisfying every constraint.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Region {
    pub params: Vec<String>,
    pub constraints: Vec<Constraint>,
}

impl Region {
    pub fn new(params: Vec<String>, constraints: Vec<Constraint>) -> Self {
        Self {
            params,
            constraints,
        }
    }

    pub fn contains(&self, point: &Assignment) -> bool {
        self.params
            .iter()
            .all(|p| point.get(p).is_some_and(|&v| v >= 0))
            && self
                .constraints
                .iter()
                .all(|c| c.holds(point) == Some(true))
    }

    /// Upper bounds implied by the constraints, with the parameters in
    /// `fixed` pinned to their values. `None` for parameters the constraints
    /// leave unbounded.
    pub fn implied_upper_bounds(&self, fixed: &Assignment) -> BTreeMap<String, Option<i64>> {
        let ineqs: Vec<AffineForm> = self
            .constraints
            .iter()
            .flat_map(Constraint::linear_parts)
            .map(|f| {
                fixed.iter().fold(f, |acc, (name, &v)| {
                    acc.substitute(name, &AffineForm::constant(v))
                })
            })
            .collect();
        let mut ub: BTreeMap<String, Option<i64>> = self
            .params
            .iter()
            .filter(|p| !fixed.contains_key(*p))
            .map(|p| (p.clone(), None))
            .collect();
        for _ in 0..=ub.len() + 1 {
            let mut changed = false;
            for ineq in &ineqs {
                for (p, &cp) in ineq.coeffs() {
                    if cp >= 0 || !ub.contains_key(p) {
                        continue;
                    }
                    // |cp| p <= constant + sum_{q != p} c_q q
                    let mut rhs = ineq.constant_term();
                    let mut known = true;
                    for (q, &cq) in ineq.coeffs() {
                        if q == p || cq <= 0 {
                            continue;
                        }
                        match ub.get(q).copied().flatten() {
                            Some(b) => rhs += cq * b,
                            None => {
                                known = false;
                                break;
                            }
                        }
                    }
                    if !known {
                        continue;
                    }
                    let bound = rhs.div_euclid(-cp);
                    let slot = ub.get_mut(p).expect("checked");
                    if slot.is_none_or(|b| bound < b) {
                        *slot = Some(bound);
                        changed = true;
                    }
                }
            }
            if !changed || ub.values().any(|b| b.is_some_and(|b| b < 0)) {
                break;
            }
        }
        ub
    }
}

/// One table of a chain: `runner` sweeps `lo..=hi`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChainSegment {
    pub runner: String,
    pub lo: AffineForm,
    pub hi: AffineForm,
    pub template: Vec<AffineForm>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChainFamily {
    pub name: String,
    pub m: usize,
    pub region: Region,
    pub segments: Vec<ChainSegment>,
}

fn format_point(point: &Assignment) -> String {
    let parts: Vec<String> = point.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("[{}]", parts.join(", "))
}

/// All points of `region` inside the box `0 <= p <= bounds[p]`, in
/// lexicographic order of the declared parameter list.
pub fn admissible_points(region: &Region, bounds: &BTreeMap<String, i64>) -> Vec<Assignment> {
    let params = &region.params;
    if params.iter().any(|p| !bounds.contains_key(p)) {
        return Vec::new();
    }
    // each constraint is checked as soon as its last parameter is assigned
    let depth_of = |c: &Constraint| {
        c.names()
            .iter()
            .filter_map(|n| params.iter().position(|p| p == n))
            .max()
            .unwrap_or(0)
    };
    let mut by_depth: Vec<Vec<&Constraint>> = vec![Vec::new(); params.len().max(1)];
    for c in &region.constraints {
        by_depth[depth_of(c)].push(c);
    }
    let mut out = Vec::new();
    if params.is_empty() {
        if region
            .constraints
            .iter()
            .all(|c| c.holds(&Assignment::new()) == Some(true))
        {
            out.push(Assignment::new());
        }
        return out;
    }
    let mut values = vec![0i64; params.len()];
    let lookup_in = |values: &[i64], depth: usize, name: &str| {
        params[..=depth]
            .iter()
            .position(|p| p == name)
            .map(|i| values[i])
    };
    type Lookup<'a> = &'a dyn Fn(&[i64], usize, &str) -> Option<i64>;
    fn rec(
        depth: usize,
        values: &mut Vec<i64>,
        params: &[String],
        bounds: &BTreeMap<String, i64>,
        by_depth: &[Vec<&Constraint>],
        lookup_in: Lookup<'_>,
        out: &mut Vec<Assignment>,
    ) {
        let hi = bounds[&params[depth]];
        for v in 0..=hi {
            values[depth] = v;
            let ok = by_depth[depth]
                .iter()
                .all(|c| c.holds_with(|n| lookup_in(values, depth, n)) == Some(true));
            if !ok {
                continue;
            }
            if depth + 1 == params.len() {
                out.push(params.iter().cloned().zip(values.iter().copied()).collect());
            } else {
                rec(depth + 1, values, params, bounds, by_depth, lookup_in, out);
            }
        }
    }
    rec(
        0,
        &mut values,
        params,
        bounds,
        &by_depth,
        &lookup_in,
        &mut out,
    );
    out
}

impl ChainFamily {
    /// Values of the cap parameter `n` at a point.
    fn cap(&self, point: &Assignment) -> Result<u32, FamilyError> {
        let n = point.get(CAP_PARAM).copied().unwrap_or(-1);
        u32::try_from(n).map_err(|_| FamilyError::NotAdmissible {
            family: self.name.clone(),
            point: format_point(point),
        })
    }

    /// The chain at one admissible parameter point.
    pub fn instantiate(&self, point: &Assignment) -> Result<ConcreteChain, FamilyError> {
        if !self.region.contains(point) {
            return Err(FamilyError::NotAdmissible {
                family: self.name.clone(),
                point: format_point(point),
            });
        }
        let n = self.cap(point)?;
        let mut elements: Vec<LatticeVector> = Vec::new();
        let mut scratch = point.clone();
        for (si, seg) in self.segments.iter().enumerate() {
            let lo = seg.lo.eval(point).expect("parser resolves names");
            let hi = seg.hi.eval(point).expect("parser resolves names");
            for t in lo..=hi {
                scratch.insert(seg.runner.clone(), t);
                let malformed = |reason: String| FamilyError::Malformed {
                    family: self.name.clone(),
                    segment: si,
                    t,
                    reason,
                };
                let coords = seg
                    .template
                    .iter()
                    .map(|a| a.eval(&scratch).expect("parser resolves names"))
                    .map(|c| {
                        u32::try_from(c).map_err(|_| malformed(format!("negative coordinate {c}")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let v = LatticeVector::new(coords, n).map_err(|e| malformed(e.to_string()))?;
                if let Some(prev) = elements.last() {
                    if !prev.is_covered_by(&v) {
                        return Err(FamilyError::NotSaturated {
                            family: self.name.clone(),
                            point: format_point(point),
                            lower: prev.clone(),
                            upper: v,
                        });
                    }
                }
                elements.push(v);
            }
            scratch.remove(&seg.runner);
        }
        if elements.is_empty() {
            return Err(FamilyError::EmptyChain {
                family: self.name.clone(),
                point: format_point(point),
            });
        }
        Ok(ConcreteChain::from_unchecked(elements))
    }

    /// Admissible points with `n` fixed.
    pub fn points_at(&self, n: u32) -> Result<Vec<Assignment>, FamilyError> {
        let mut fixed = Assignment::new();
        fixed.insert(CAP_PARAM.to_string(), i64::from(n));
        let ub = self.region.implied_upper_bounds(&fixed);
        let mut bounds = BTreeMap::new();
        bounds.insert(CAP_PARAM.to_string(), i64::from(n));
        for (p, b) in ub {
            match b {
                Some(b) if b < 0 => return Ok(Vec::new()),
                Some(b) => {
                    bounds.insert(p, b);
                }
                None => {
                    return Err(FamilyError::Unbounded {
                        family: self.name.clone(),
                        param: p,
                    })
                }
            }
        }
        let pinned = Region {
            params: self.region.params.clone(),
            constraints: self
                .region
                .constraints
                .iter()
                .cloned()
                .chain([Constraint::eq(
                    AffineForm::var(CAP_PARAM),
                    AffineForm::constant(i64::from(n)),
                )])
                .collect(),
        };
        Ok(admissible_points(&pinned, &bounds))
    }

    /// Every chain of the family in `L(m, n)`, ordered by parameter point.
    pub fn chains_at(&self, n: u32) -> Result<Vec<ConcreteChain>, FamilyError> {
        self.points_at(n)?
            .iter()
            .map(|p| self.instantiate(p))
            .collect()
    }
}

/// Chains of every family at cap `n`, concatenated in family order.
pub fn families_to_chains(
    families: &[ChainFamily],
    n: u32,
) -> Result<Vec<ConcreteChain>, FamilyError> {
    let mut out = Vec::new();
    for f in families {
        out.extend(f.chains_at(n)?);
    }
    Ok(out)
}
