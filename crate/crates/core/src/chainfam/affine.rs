use std::collections::BTreeMap;
use std::fmt;

/// Parameter values keyed by name.
pub type Assignment = BTreeMap<String, i64>;

/// `constant + sum coeff * name` with integer coefficients. Zero coefficients
/// are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffineForm {
    constant: i64,
    coeffs: BTreeMap<String, i64>,
}

impl AffineForm {
    pub fn constant(c: i64) -> Self {
        Self {
            constant: c,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn var(name: &str) -> Self {
        Self::term(name, 1)
    }

    pub fn term(name: &str, coeff: i64) -> Self {
        let mut f = Self::constant(0);
        f.add_term(name, coeff);
        f
    }

    pub fn add_term(&mut self, name: &str, coeff: i64) {
        let entry = self.coeffs.entry(name.to_string()).or_insert(0);
        *entry += coeff;
        if *entry == 0 {
            self.coeffs.remove(name);
        }
    }

    pub fn constant_term(&self) -> i64 {
        self.constant
    }

    pub fn coeffs(&self) -> &BTreeMap<String, i64> {
        &self.coeffs
    }

    pub fn coeff(&self, name: &str) -> i64 {
        self.coeffs.get(name).copied().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.coeffs.keys().map(String::as_str)
    }

    pub fn add(&self, other: &AffineForm) -> AffineForm {
        let mut out = self.clone();
        out.constant += other.constant;
        for (k, &c) in &other.coeffs {
            out.add_term(k, c);
        }
        out
    }

    pub fn sub(&self, other: &AffineForm) -> AffineForm {
        self.add(&other.scale(-1))
    }

    pub fn scale(&self, k: i64) -> AffineForm {
        if k == 0 {
            return AffineForm::constant(0);
        }
        AffineForm {
            constant: self.constant * k,
            coeffs: self
                .coeffs
                .iter()
                .map(|(n, &c)| (n.clone(), c * k))
                .collect(),
        }
    }

    pub fn add_constant(&self, k: i64) -> AffineForm {
        let mut out = self.clone();
        out.constant += k;
        out
    }

    /// Replaces `name` by `value` everywhere.
    pub fn substitute(&self, name: &str, value: &AffineForm) -> AffineForm {
        let c = self.coeff(name);
        if c == 0 {
            return self.clone();
        }
        let mut rest = self.clone();
        rest.coeffs.remove(name);
        rest.add(&value.scale(c))
    }

    /// Evaluates with `lookup`; `None` if some name is unbound.
    pub fn eval_with(&self, lookup: impl Fn(&str) -> Option<i64>) -> Option<i64> {
        let mut acc = self.constant;
        for (n, &c) in &self.coeffs {
            acc += c * lookup(n)?;
        }
        Some(acc)
    }

    pub fn eval(&self, point: &Assignment) -> Option<i64> {
        self.eval_with(|n| point.get(n).copied())
    }
}

impl fmt::Display for AffineForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, &c) in &self.coeffs {
            let mag = c.unsigned_abs();
            if first {
                if c < 0 {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c < 0 { " - " } else { " + " })?;
            }
            if mag == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{mag}*{name}")?;
            }
            first = false;
        }
        if first {
            write!(f, "{}", self.constant)
        } else if self.constant != 0 {
            let sign = if self.constant < 0 { '-' } else { '+' };
            write!(f, " {sign} {}", self.constant.unsigned_abs())
        } else {
            Ok(())
        }
    }
}
