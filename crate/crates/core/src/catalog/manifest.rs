//! Text manifests describing a single-chart manifold.
//!
//! ```text
//! # flat 2-torus with a warped factor
//! manifold "warped"
//! dim 2
//! chi 0
//! param a = 0.5
//! domain x1 0 2*pi periodic
//! domain x2 0 2*pi periodic
//! metric 1 1 = "1"
//! metric 2 2 = "(1 + a*cos(x1))^2"
//! ```
//!
//! `g` is accepted for `metric`, quotes around formulas are optional, and
//! parameters are substituted as whole words before formulas are parsed.

use std::collections::BTreeMap;
use std::path::Path;

use regex::Regex;
use thiserror::Error;

use crate::expr::{parse, Expression, ParseError};
use crate::geometry::MetricField;
use crate::quadrature::{Axis, Boundary};

use super::{from_chart, CatalogError, ChartManifold, MAX_DIM};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ManifestErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error(transparent)]
    Expression(ParseError),
    #[error("missing {0}")]
    Missing(String),
    #[error("{0} given twice")]
    Duplicate(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// A manifest problem at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ManifestError {
    pub line: usize,
    pub column: usize,
    pub kind: ManifestErrorKind,
}

fn err(line: usize, column: usize, kind: ManifestErrorKind) -> ManifestError {
    ManifestError { line, column, kind }
}

fn syntax(line: usize, column: usize, msg: impl Into<String>) -> ManifestError {
    err(line, column, ManifestErrorKind::Syntax(msg.into()))
}

#[derive(Debug, Clone)]
struct Token {
    text: String,
    column: usize,
}

// Splits a comment-stripped line into words, `=` and quoted strings. The
// text after `=` stays one token.
fn tokenize(line: &str, lineno: usize) -> Result<Vec<Token>, ManifestError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let column = i + 1;
        if c == '"' {
            let end = chars[i + 1..]
                .iter()
                .position(|&d| d == '"')
                .ok_or_else(|| syntax(lineno, column, "unterminated string"))?;
            out.push(Token {
                text: chars[i + 1..i + 1 + end].iter().collect(),
                column: column + 1,
            });
            i += end + 2;
            continue;
        }
        if c == '=' {
            out.push(Token {
                text: "=".into(),
                column,
            });
            i += 1;
            let rest: String = chars[i..].iter().collect();
            let lead = rest.len() - rest.trim_start().len();
            let value = rest.trim();
            if !value.is_empty() {
                let (text, column) = match value.strip_prefix('"') {
                    Some(v) => {
                        let v = v
                            .strip_suffix('"')
                            .ok_or_else(|| syntax(lineno, i + lead + 1, "unterminated string"))?;
                        (v.to_string(), i + lead + 2)
                    }
                    None => (value.to_string(), i + lead + 1),
                };
                out.push(Token { text, column });
            }
            break;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() && chars[i] != '=' && chars[i] != '"' {
            i += 1;
        }
        out.push(Token {
            text: chars[start..i].iter().collect(),
            column,
        });
    }
    Ok(out)
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

struct Statement {
    line: usize,
    tokens: Vec<Token>,
}

impl Statement {
    fn column_after(&self) -> usize {
        self.tokens.last().map_or(1, |t| t.column + t.text.chars().count())
    }

    fn arg(&self, k: usize, what: &str) -> Result<&Token, ManifestError> {
        self.tokens
            .get(k)
            .ok_or_else(|| err(self.line, self.column_after(), ManifestErrorKind::Missing(what.into())))
    }

    fn arity(&self, n: usize) -> Result<(), ManifestError> {
        match self.tokens.get(n) {
            Some(t) => Err(syntax(self.line, t.column, format!("unexpected `{}`", t.text))),
            None => Ok(()),
        }
    }

    fn equals(&self, k: usize) -> Result<(), ManifestError> {
        let t = self.arg(k, "`=`")?;
        if t.text != "=" {
            return Err(syntax(self.line, t.column, format!("expected `=`, found `{}`", t.text)));
        }
        Ok(())
    }
}

fn parse_arg<T: std::str::FromStr>(stmt: &Statement, k: usize, what: &str) -> Result<T, ManifestError> {
    let t = stmt.arg(k, what)?;
    t.text
        .parse()
        .map_err(|_| syntax(stmt.line, t.column, format!("expected {what}, found `{}`", t.text)))
}

struct Params(Vec<(Regex, String)>);

impl Params {
    fn apply(&self, text: &str) -> String {
        let mut s = text.to_string();
        for (re, value) in &self.0 {
            s = re.replace_all(&s, value.as_str()).into_owned();
        }
        s
    }
}

fn expression(stmt: &Statement, k: usize, dim: usize, params: &Params, what: &str) -> Result<Expression, ManifestError> {
    let t = stmt.arg(k, what)?;
    parse(&params.apply(&t.text), dim)
        .map_err(|e| err(stmt.line, t.column + e.position - 1, ManifestErrorKind::Expression(e)))
}

fn axis_index(stmt: &Statement, k: usize, dim: usize, what: &str) -> Result<usize, ManifestError> {
    let t = stmt.arg(k, what)?;
    let digits = t.text.strip_prefix('x').unwrap_or(&t.text);
    let i: usize = digits
        .parse()
        .map_err(|_| syntax(stmt.line, t.column, format!("expected {what}, found `{}`", t.text)))?;
    if i == 0 || i > dim {
        return Err(err(
            stmt.line,
            t.column,
            ManifestErrorKind::Dimension(format!("index {i} outside 1..={dim}")),
        ));
    }
    Ok(i - 1)
}

/// Parses manifest text.
pub fn parse_manifest(text: &str) -> Result<ChartManifold, CatalogError> {
    let mut stmts = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let tokens = tokenize(strip_comment(raw), k + 1)?;
        if !tokens.is_empty() {
            stmts.push(Statement { line: k + 1, tokens });
        }
    }
    let last_line = text.lines().count().max(1);

    // Header fields and parameters first: formulas may precede them.
    let mut name: Option<String> = None;
    let mut dim: Option<usize> = None;
    let mut chi: Option<i64> = None;
    let mut params = Vec::new();
    let mut param_names = BTreeMap::new();
    for s in &stmts {
        let head = &s.tokens[0];
        match head.text.as_str() {
            "manifold" => {
                if name.is_some() {
                    return Err(err(s.line, head.column, ManifestErrorKind::Duplicate("manifold".into())).into());
                }
                name = Some(s.arg(1, "manifold name")?.text.clone());
                s.arity(2)?;
            }
            "dim" => {
                if dim.is_some() {
                    return Err(err(s.line, head.column, ManifestErrorKind::Duplicate("dim".into())).into());
                }
                let n: usize = parse_arg(s, 1, "a dimension")?;
                if n == 0 || n > MAX_DIM {
                    return Err(err(
                        s.line,
                        s.tokens[1].column,
                        ManifestErrorKind::Dimension(format!("dim must be in 1..={MAX_DIM}, got {n}")),
                    )
                    .into());
                }
                dim = Some(n);
                s.arity(2)?;
            }
            "chi" => {
                if chi.is_some() {
                    return Err(err(s.line, head.column, ManifestErrorKind::Duplicate("chi".into())).into());
                }
                chi = Some(parse_arg(s, 1, "an integer Euler characteristic")?);
                s.arity(2)?;
            }
            "param" => {
                let t = s.arg(1, "parameter name")?;
                let valid = t.text.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                    && t.text.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
                if !valid {
                    return Err(syntax(s.line, t.column, format!("invalid parameter name `{}`", t.text)).into());
                }
                if param_names.insert(t.text.clone(), s.line).is_some() {
                    return Err(err(s.line, t.column, ManifestErrorKind::Duplicate(format!("param {}", t.text))).into());
                }
                s.equals(2)?;
                let v: f64 = parse_arg(s, 3, "a number")?;
                let re = Regex::new(&format!(r"\b{}\b", regex::escape(&t.text))).expect("escaped identifier");
                params.push((re, format!("({v:?})")));
            }
            "domain" | "metric" | "g" => {}
            other => {
                return Err(syntax(s.line, head.column, format!("unknown directive `{other}`")).into());
            }
        }
    }
    let params = Params(params);
    let name = name.ok_or_else(|| err(1, 1, ManifestErrorKind::Missing("`manifold` line".into())))?;
    let n = dim.ok_or_else(|| err(1, 1, ManifestErrorKind::Missing("`dim` line".into())))?;

    let mut axes: Vec<Option<Axis>> = vec![None; n];
    let mut comps: Vec<Option<Expression>> = vec![None; n * (n + 1) / 2];
    for s in &stmts {
        match s.tokens[0].text.as_str() {
            "domain" => {
                let i = axis_index(s, 1, n, "an axis name x<i>")?;
                if axes[i].is_some() {
                    return Err(err(
                        s.line,
                        s.tokens[1].column,
                        ManifestErrorKind::Duplicate(format!("domain of x{}", i + 1)),
                    )
                    .into());
                }
                let bound = |k: usize, what: &str| -> Result<f64, ManifestError> {
                    let e = expression(s, k, 0, &params, what)?;
                    e.eval(&[])
                        .map_err(|e| syntax(s.line, s.tokens[k].column, format!("cannot evaluate {what}: {e}")))
                };
                let min = bound(2, "lower bound")?;
                let max = bound(3, "upper bound")?;
                let t = s.arg(4, "`periodic` or `open`")?;
                let flavor = Boundary::parse(&t.text).ok_or_else(|| {
                    syntax(s.line, t.column, format!("expected `periodic` or `open`, found `{}`", t.text))
                })?;
                s.arity(5)?;
                let axis = Axis::new(min, max, flavor)
                    .map_err(|e| syntax(s.line, s.tokens[2].column, e.to_string()))?;
                axes[i] = Some(axis);
            }
            "metric" | "g" => {
                let i = axis_index(s, 1, n, "a row index")?;
                let j = axis_index(s, 2, n, "a column index")?;
                s.equals(3)?;
                let e = expression(s, 4, n, &params, "a formula")?;
                s.arity(5)?;
                let slot = &mut comps[crate::geometry::tri_index(i, j)];
                if slot.is_some() {
                    return Err(err(
                        s.line,
                        s.tokens[1].column,
                        ManifestErrorKind::Duplicate(format!("metric entry {} {}", i + 1, j + 1)),
                    )
                    .into());
                }
                *slot = Some(e);
            }
            _ => {}
        }
    }
    let axes = axes
        .into_iter()
        .enumerate()
        .map(|(i, a)| a.ok_or_else(|| err(last_line, 1, ManifestErrorKind::Missing(format!("domain of x{}", i + 1)))))
        .collect::<Result<Vec<_>, _>>()?;
    let mut exprs = Vec::with_capacity(comps.len());
    for i in 0..n {
        for j in 0..=i {
            let c = comps[crate::geometry::tri_index(i, j)].take();
            exprs.push(match c {
                Some(e) => e,
                None if i == j => {
                    return Err(err(last_line, 1, ManifestErrorKind::Missing(format!("metric entry {} {}", i + 1, i + 1)))
                        .into())
                }
                None => Expression::constant(0.0, n),
            });
        }
    }
    let metric = MetricField::new(n, exprs)?;
    from_chart(name, axes, metric, chi)
}

/// Reads and parses a manifest file.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<ChartManifold, CatalogError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CatalogError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_manifest(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_keep_formula_whole() {
        let t = tokenize(r#"metric 2 2 = "(1 + a*cos(x1))^2""#, 1).unwrap();
        assert_eq!(t.len(), 5);
        assert_eq!(t[4].text, "(1 + a*cos(x1))^2");
        assert_eq!(t[4].column, 15);
    }

    #[test]
    fn comment_inside_quotes_is_kept() {
        assert_eq!(strip_comment(r#"manifold "a#b" # note"#), r#"manifold "a#b" "#);
    }
}
