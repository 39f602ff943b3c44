//! Line-oriented family-file format.
//!
//! ```text
//! family <name>
//! m <width>
//! params <p1> <p2> ...
//! where <affine> <= <affine>          # also >=, =, <= min(...), >= max(...)
//! segment <runner> <lo> .. <hi> : (<a1>, ..., <am>)
//! end
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{
    AffineForm, Bound, ChainFamily, ChainSegment, Constraint, FamilyError, Region, Relation,
    CAP_PARAM,
};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
    Comma,
    Le,
    Ge,
    Eq,
    DotDot,
    Colon,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    col: usize,
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> FamilyError {
    FamilyError::Syntax {
        line,
        col,
        message: message.into(),
    }
}

fn lex(line_no: usize, text: &str) -> Result<Vec<Spanned>, FamilyError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let col = i + 1;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            break;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let digits = &text[start..i];
            let v = digits.parse::<i64>().map_err(|_| {
                syntax(
                    line_no,
                    col,
                    format!("integer literal {digits} out of range"),
                )
            })?;
            out.push(Spanned {
                tok: Tok::Int(v),
                col,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Spanned {
                tok: Tok::Ident(text[start..i].to_string()),
                col,
            });
            continue;
        }
        let two = text.get(i..i + 2);
        let (tok, width) = match (c, two) {
            (_, Some("<=")) => (Tok::Le, 2),
            (_, Some(">=")) => (Tok::Ge, 2),
            (_, Some("..")) => (Tok::DotDot, 2),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            (',', _) => (Tok::Comma, 1),
            ('=', _) => (Tok::Eq, 1),
            (':', _) => (Tok::Colon, 1),
            _ => return Err(syntax(line_no, col, format!("unexpected character {c:?}"))),
        };
        out.push(Spanned { tok, col });
        i += width;
    }
    Ok(out)
}

struct Cursor<'a> {
    line: usize,
    toks: &'a [Spanned],
    pos: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |s| s.col)
    }

    fn next(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos).map(|s| &s.tok);
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), FamilyError> {
        let col = self.col();
        match self.next() {
            Some(t) if *t == want => Ok(()),
            _ => Err(syntax(self.line, col, format!("expected {what}"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, FamilyError> {
        let col = self.col();
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s.clone()),
            _ => Err(syntax(self.line, col, format!("expected {what}"))),
        }
    }

    fn finish(&self) -> Result<(), FamilyError> {
        if self.pos < self.toks.len() {
            return Err(syntax(self.line, self.col(), "unexpected trailing input"));
        }
        Ok(())
    }

    /// `expr := term (('+' | '-') term)*`
    fn affine(&mut self, scope: &dyn Fn(&str) -> bool) -> Result<AffineForm, FamilyError> {
        let mut acc = self.term(scope)?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.next();
                    acc = acc.add(&self.term(scope)?);
                }
                Some(Tok::Minus) => {
                    self.next();
                    acc = acc.sub(&self.term(scope)?);
                }
                _ => return Ok(acc),
            }
        }
    }

    /// `term := factor ('*' factor)*`, at most one non-constant factor.
    fn term(&mut self, scope: &dyn Fn(&str) -> bool) -> Result<AffineForm, FamilyError> {
        let mut acc = self.factor(scope)?;
        while self.peek() == Some(&Tok::Star) {
            let col = self.col();
            self.next();
            let rhs = self.factor(scope)?;
            acc = if acc.is_constant() {
                rhs.scale(acc.constant_term())
            } else if rhs.is_constant() {
                acc.scale(rhs.constant_term())
            } else {
                return Err(syntax(
                    self.line,
                    col,
                    "product of two parameters is not affine",
                ));
            };
        }
        Ok(acc)
    }

    fn factor(&mut self, scope: &dyn Fn(&str) -> bool) -> Result<AffineForm, FamilyError> {
        let col = self.col();
        match self.next().cloned() {
            Some(Tok::Int(v)) => Ok(AffineForm::constant(v)),
            Some(Tok::Minus) => Ok(self.factor(scope)?.scale(-1)),
            Some(Tok::Ident(name)) => {
                if name == "min" || name == "max" {
                    return Err(syntax(
                        self.line,
                        col,
                        format!("`{name}` is only allowed on the right of <= or >="),
                    ));
                }
                if !scope(&name) {
                    return Err(FamilyError::UnknownParameter {
                        line: self.line,
                        col,
                        name,
                    });
                }
                Ok(AffineForm::var(&name))
            }
            Some(Tok::LParen) => {
                let inner = self.affine(scope)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            _ => Err(syntax(self.line, col, "expected an affine expression")),
        }
    }
}

#[derive(Default)]
struct Builder {
    name: String,
    start_line: usize,
    m: Option<usize>,
    params: Option<Vec<String>>,
    constraints: Vec<Constraint>,
    segments: Vec<ChainSegment>,
}

/// Parses a family file into its families, in file order.
pub fn parse_family_file(text: &str) -> Result<Vec<ChainFamily>, FamilyError> {
    let mut families = Vec::new();
    let mut current: Option<Builder> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = lex(line, raw)?;
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cursor {
            line,
            toks: &toks,
            pos: 0,
            end_col: raw.len() + 1,
        };
        let keyword = cur.ident("a keyword")?;
        match (keyword.as_str(), current.as_mut()) {
            ("family", None) => {
                let name = cur.ident("a family name")?;
                cur.finish()?;
                current = Some(Builder {
                    name,
                    start_line: line,
                    ..Default::default()
                });
            }
            ("family", Some(_)) => {
                return Err(syntax(
                    line,
                    1,
                    "`family` before `end` of the previous family",
                ))
            }
            (_, None) => {
                return Err(syntax(
                    line,
                    1,
                    format!("`{keyword}` outside a family block"),
                ))
            }
            ("m", Some(b)) => {
                let col = cur.col();
                let m = match cur.next() {
                    Some(Tok::Int(v)) if *v >= 1 => *v as usize,
                    _ => return Err(syntax(line, col, "expected a positive width")),
                };
                cur.finish()?;
                if b.m.replace(m).is_some() {
                    return Err(syntax(line, 1, "duplicate `m`"));
                }
            }
            ("params", Some(b)) => {
                let mut params = Vec::new();
                while cur.peek().is_some() {
                    let col = cur.col();
                    let p = cur.ident("a parameter name")?;
                    if p == "min" || p == "max" {
                        return Err(syntax(line, col, format!("`{p}` is reserved")));
                    }
                    if params.contains(&p) {
                        return Err(syntax(line, col, format!("duplicate parameter `{p}`")));
                    }
                    params.push(p);
                }
                if !params.iter().any(|p| p == CAP_PARAM) {
                    return Err(syntax(line, 1, "parameter list must include `n`"));
                }
                if b.params.replace(params).is_some() {
                    return Err(syntax(line, 1, "duplicate `params`"));
                }
            }
            ("where", Some(b)) => {
                let params = b
                    .params
                    .as_ref()
                    .ok_or_else(|| syntax(line, 1, "`where` before `params`"))?;
                let scope = |n: &str| params.iter().any(|p| p == n);
                let left = cur.affine(&scope)?;
                let col = cur.col();
                let relation = match cur.next() {
                    Some(Tok::Le) => Relation::Le,
                    Some(Tok::Ge) => Relation::Ge,
                    Some(Tok::Eq) => Relation::Eq,
                    _ => return Err(syntax(line, col, "expected <=, >= or =")),
                };
                let col = cur.col();
                let right = match cur.peek() {
                    Some(Tok::Ident(k)) if k == "min" || k == "max" => {
                        let is_min = k == "min";
                        cur.next();
                        if (is_min && relation != Relation::Le)
                            || (!is_min && relation != Relation::Ge)
                        {
                            return Err(syntax(
                                line,
                                col,
                                "min is only allowed after <=, max only after >=",
                            ));
                        }
                        cur.expect(Tok::LParen, "`(`")?;
                        let mut args = vec![cur.affine(&scope)?];
                        while cur.peek() == Some(&Tok::Comma) {
                            cur.next();
                            args.push(cur.affine(&scope)?);
                        }
                        cur.expect(Tok::RParen, "`)`")?;
                        if is_min {
                            Bound::Min(args)
                        } else {
                            Bound::Max(args)
                        }
                    }
                    _ => Bound::Affine(cur.affine(&scope)?),
                };
                cur.finish()?;
                b.constraints.push(Constraint {
                    relation,
                    left,
                    right,
                });
            }
            ("segment", Some(b)) => {
                let params = b
                    .params
                    .as_ref()
                    .ok_or_else(|| syntax(line, 1, "`segment` before `params`"))?;
                let m = b.m.ok_or_else(|| syntax(line, 1, "`segment` before `m`"))?;
                let col = cur.col();
                let runner = cur.ident("a runner name")?;
                if params.contains(&runner) || runner == "min" || runner == "max" {
                    return Err(syntax(
                        line,
                        col,
                        format!("runner `{runner}` clashes with a parameter"),
                    ));
                }
                let scope = |n: &str| params.iter().any(|p| p == n);
                let lo = cur.affine(&scope)?;
                cur.expect(Tok::DotDot, "`..`")?;
                let hi = cur.affine(&scope)?;
                cur.expect(Tok::Colon, "`:`")?;
                cur.expect(Tok::LParen, "`(`")?;
                let inner = |n: &str| n == runner || params.iter().any(|p| p == n);
                let mut template = vec![cur.affine(&inner)?];
                while cur.peek() == Some(&Tok::Comma) {
                    cur.next();
                    template.push(cur.affine(&inner)?);
                }
                cur.expect(Tok::RParen, "`)`")?;
                cur.finish()?;
                if template.len() != m {
                    return Err(FamilyError::WidthMismatch {
                        line,
                        family: b.name.clone(),
                        expected: m,
                        found: template.len(),
                    });
                }
                b.segments.push(ChainSegment {
                    runner,
                    lo,
                    hi,
                    template,
                });
            }
            ("end", Some(_)) => {
                cur.finish()?;
                let b = current.take().expect("matched Some");
                let m = b.m.ok_or_else(|| {
                    syntax(b.start_line, 1, format!("family `{}` has no `m`", b.name))
                })?;
                let params = b.params.ok_or_else(|| {
                    syntax(
                        b.start_line,
                        1,
                        format!("family `{}` has no `params`", b.name),
                    )
                })?;
                families.push(ChainFamily {
                    name: b.name,
                    m,
                    region: Region {
                        params,
                        constraints: b.constraints,
                    },
                    segments: b.segments,
                });
            }
            (other, Some(_)) => return Err(syntax(line, 1, format!("unknown keyword `{other}`"))),
        }
    }
    if let Some(b) = current {
        return Err(syntax(
            b.start_line,
            1,
            format!("family `{}` is missing `end`", b.name),
        ));
    }
    let mut seen = BTreeSet::new();
    for f in &families {
        if !seen.insert(f.name.clone()) {
            return Err(syntax(0, 0, format!("duplicate family name `{}`", f.name)));
        }
    }
    Ok(families)
}

/// Inverse of [`parse_family_file`].
pub fn print_family_file(families: &[ChainFamily]) -> String {
    let mut out = String::new();
    for (i, f) in families.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "family {}", f.name);
        let _ = writeln!(out, "m {}", f.m);
        let _ = writeln!(out, "params {}", f.region.params.join(" "));
        for c in &f.region.constraints {
            let _ = writeln!(out, "where {c}");
        }
        for s in &f.segments {
            let tmpl: Vec<String> = s.template.iter().map(ToString::to_string).collect();
            let _ = writeln!(
                out,
                "segment {} {} .. {} : ({})",
                s.runner,
                s.lo,
                s.hi,
                tmpl.join(", ")
            );
        }
        out.push_str("end\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const L2: &str = include_str!("../../fixtures/l2.fam");

    #[test]
    fn parses_builtin_l2() {
        let fams = parse_family_file(L2).unwrap();
        assert_eq!(fams.len(), 1);
        let f = &fams[0];
        assert_eq!(f.m, 2);
        assert_eq!(f.region.params, vec!["n".to_string(), "i".to_string()]);
        assert_eq!(f.segments.len(), 2);
        assert_eq!(f.region.constraints[0].to_string(), "2*i <= n");
    }

    #[test]
    fn empty_file() {
        assert_eq!(parse_family_file("").unwrap(), vec![]);
        assert_eq!(parse_family_file("# only a comment\n\n").unwrap(), vec![]);
    }

    #[test]
    fn width_mismatch() {
        let text = "family w\nm 6\nparams n\nsegment t 0 .. n : (0, 0, 0, 0, t)\nend\n";
        assert!(matches!(
            parse_family_file(text),
            Err(FamilyError::WidthMismatch {
                line: 4,
                expected: 6,
                found: 5,
                ..
            })
        ));
    }

    #[test]
    fn unknown_parameter_has_position() {
        let text = "family u\nm 1\nparams n\nwhere k <= n\nend\n";
        assert_eq!(
            parse_family_file(text),
            Err(FamilyError::UnknownParameter {
                line: 4,
                col: 7,
                name: "k".into()
            })
        );
        // the runner is only in scope inside the template
        let text = "family u\nm 1\nparams n\nsegment t 0 .. t : (t)\nend\n";
        assert!(matches!(
            parse_family_file(text),
            Err(FamilyError::UnknownParameter { line: 4, .. })
        ));
    }

    #[test]
    fn syntax_errors() {
        let cases = [
            ("family a\nm 1\nparams i\nend\n", 3),
            ("family a\nm 1\nparams n\nwhere n < 3\nend\n", 4),
            ("family a\nm 1\nparams n\nwhere n * n <= 3\nend\n", 4),
            ("family a\nm 1\nparams n\nwhere n >= min(1, 2)\nend\n", 4),
            (
                "family a\nm 1\nparams n\nwhere n <= min(min(1, 2), 3)\nend\n",
                4,
            ),
            ("family a\nm 1\nparams n\n", 1),
            ("m 1\n", 1),
            ("family a\nm 1\nparams n\nsegment n 0 .. n : (n)\nend\n", 4),
            (
                "family a\nm 1\nparams n\nwhere 99999999999999999999 <= n\nend\n",
                4,
            ),
        ];
        for (text, line) in cases {
            match parse_family_file(text) {
                Err(FamilyError::Syntax { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn parses_min_max_and_parentheses() {
        let text =
            "family a\nm 2\nparams n i j\nwhere i <= min(j, n - 2*(j + 1))\nwhere j >= max(i, 1)\n\
                    segment t -i + i .. 3*n*2 - 1 : (i, t)\nend\n";
        let f = &parse_family_file(text).unwrap()[0];
        assert_eq!(
            f.region.constraints[0].to_string(),
            "i <= min(j, -2*j + n - 2)"
        );
        assert_eq!(f.region.constraints[1].to_string(), "j >= max(i, 1)");
        assert_eq!(f.segments[0].lo, AffineForm::constant(0));
        assert_eq!(f.segments[0].hi.to_string(), "6*n - 1");
    }

    #[test]
    fn print_then_parse_fixtures() {
        for text in [
            L2,
            include_str!("../../fixtures/l1.fam"),
            include_str!("../../fixtures/demo6.fam"),
        ] {
            let fams = parse_family_file(text).unwrap();
            let printed = print_family_file(&fams);
            assert_eq!(parse_family_file(&printed).unwrap(), fams);
        }
    }
}
