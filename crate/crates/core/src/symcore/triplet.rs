//! Exact coordinate triplets such as `x, -y+1/2, z`.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{CheckedAdd, One, Signed, Zero};
use thiserror::Error;

pub type Q = Rational64;

const VARS: [char; 3] = ['x', 'y', 'z'];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("triplet parse error at column {column}: {message}")]
pub struct TripletError {
    /// 1-based character column in the input.
    pub column: usize,
    pub message: String,
}

/// An affine map `p -> matrix * p + offset` over exact rationals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffineMap {
    pub matrix: [[Q; 3]; 3],
    pub offset: [Q; 3],
}

impl AffineMap {
    pub fn identity() -> Self {
        let mut matrix = [[Q::zero(); 3]; 3];
        for (i, row) in matrix.iter_mut().enumerate() {
            row[i] = Q::one();
        }
        AffineMap { matrix, offset: [Q::zero(); 3] }
    }

    pub fn apply(&self, p: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = to_f64(self.offset[i]) + (0..3).map(|j| to_f64(self.matrix[i][j]) * p[j]).sum::<f64>();
        }
        out
    }

    /// Rank of the linear part, i.e. the number of free parameters of a
    /// Wyckoff site expression.
    pub fn rank(&self) -> usize {
        rank(&self.matrix.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    pub fn integer_matrix(&self) -> Option<[[i32; 3]; 3]> {
        let mut out = [[0i32; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let q = self.matrix[i][j];
                if !q.is_integer() {
                    return None;
                }
                out[i][j] = i32::try_from(q.to_integer()).ok()?;
            }
        }
        Some(out)
    }
}

pub(crate) fn to_f64(q: Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

pub(crate) fn frac_mod1(q: Q) -> Q {
    q - q.floor()
}

/// Rank of a small rational matrix by exact Gaussian elimination.
pub(crate) fn rank(rows: &[Vec<Q>]) -> usize {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c] / m[r][c];
                for k in c..ncols {
                    let v = m[r][k];
                    m[i][k] -= f * v;
                }
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

/// Parse a coordinate triplet exactly.
///
/// Each of the three comma-separated components is a sum of terms
/// `[±][rational][*]var` or `±rational`, where rationals are written as
/// `p/q`, integers or decimals. Whitespace is ignored.
pub fn parse_triplet(text: &str) -> Result<AffineMap, TripletError> {
    let chars: Vec<char> = text.chars().collect();
    let mut matrix = [[Q::zero(); 3]; 3];
    let mut offset = [Q::zero(); 3];
    let mut component = 0usize;
    let mut pos = 0usize;
    loop {
        if component >= 3 {
            return Err(err(pos, "more than three components"));
        }
        let end = parse_component(&chars, pos, &mut matrix[component], &mut offset[component])?;
        component += 1;
        if end == chars.len() {
            break;
        }
        // parse_component stops only at ',' or end of input
        pos = end + 1;
    }
    if component != 3 {
        return Err(err(chars.len(), &format!("expected 3 components, found {component}")));
    }
    Ok(AffineMap { matrix, offset })
}

fn err(pos: usize, message: &str) -> TripletError {
    TripletError { column: pos + 1, message: message.to_string() }
}

fn skip_ws(chars: &[char], mut i: usize) -> usize {
    while i < chars.len() && chars[i].is_whitespace() {
        i += 1;
    }
    i
}

fn parse_component(chars: &[char], start: usize, row: &mut [Q; 3], offset: &mut Q) -> Result<usize, TripletError> {
    let mut i = skip_ws(chars, start);
    let mut terms = 0;
    while i < chars.len() && chars[i] != ',' {
        let term_start = i;
        let mut sign = Q::one();
        match chars[i] {
            '+' => i += 1,
            '-' => {
                sign = -Q::one();
                i += 1;
            }
            _ if terms > 0 => return Err(err(i, &format!("expected '+' or '-', found '{}'", chars[i]))),
            _ => {}
        }
        i = skip_ws(chars, i);
        let (number, next) = parse_number(chars, i)?;
        i = skip_ws(chars, next);
        let mut star = false;
        if i < chars.len() && chars[i] == '*' {
            if number.is_none() {
                return Err(err(i, "'*' without a coefficient"));
            }
            star = true;
            i = skip_ws(chars, i + 1);
        }
        let var = match chars.get(i) {
            Some(c) if c.is_ascii_alphabetic() => {
                let lc = c.to_ascii_lowercase();
                let Some(v) = VARS.iter().position(|&x| x == lc) else {
                    return Err(err(i, &format!("unknown variable '{c}'")));
                };
                i += 1;
                Some(v)
            }
            _ => None,
        };
        match (number, var) {
            (None, None) => {
                let msg = if term_start == i || chars.get(i).is_none_or(|&c| c == ',') {
                    "empty term"
                } else {
                    "malformed term"
                };
                return Err(err(i, msg));
            }
            (Some(_), None) if star => return Err(err(i, "expected a variable after '*'")),
            (Some(n), None) => *offset = offset.checked_add(&(sign * n)).ok_or_else(|| err(term_start, "number out of range"))?,
            (n, Some(v)) => {
                let term = sign * n.unwrap_or_else(Q::one);
                row[v] = row[v].checked_add(&term).ok_or_else(|| err(term_start, "number out of range"))?;
            }
        }
        terms += 1;
        i = skip_ws(chars, i);
    }
    if terms == 0 {
        return Err(err(i, "empty component"));
    }
    Ok(i)
}

fn parse_number(chars: &[char], start: usize) -> Result<(Option<Q>, usize), TripletError> {
    let mut i = start;
    while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
        i += 1;
    }
    if i == start {
        return Ok((None, start));
    }
    let head: String = chars[start..i].iter().collect();
    let mut value = parse_decimal(&head).ok_or_else(|| err(start, &format!("malformed number '{head}'")))?;
    if i < chars.len() && chars[i] == '/' {
        let dstart = i + 1;
        let mut j = dstart;
        while j < chars.len() && chars[j].is_ascii_digit() {
            j += 1;
        }
        let den: String = chars[dstart..j].iter().collect();
        if den.len() > 9 {
            return Err(err(dstart, "denominator out of range"));
        }
        let den: i64 = den.parse().map_err(|_| err(dstart, "malformed denominator"))?;
        if den == 0 {
            return Err(err(dstart, "zero denominator"));
        }
        if !value.is_integer() {
            return Err(err(start, "decimal numerator in a fraction"));
        }
        value /= Q::from_integer(den);
        i = j;
    }
    Ok((Some(value), i))
}

fn parse_decimal(s: &str) -> Option<Q> {
    let (int, frac) = match s.split_once('.') {
        Some((a, b)) => (a, b),
        None => (s, ""),
    };
    if int.is_empty() && frac.is_empty() || frac.contains('.') || int.len() + frac.len() > 9 {
        return None;
    }
    let digits = format!("{int}{frac}");
    let n: i64 = digits.parse().ok()?;
    Some(Q::new(n, 10i64.pow(frac.len() as u32)))
}

impl FromStr for AffineMap {
    type Err = TripletError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_triplet(s)
    }
}

fn fmt_rational(q: Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn fmt_component(row: &[Q; 3], offset: Q) -> String {
    let mut out = String::new();
    for (c, v) in row.iter().zip(VARS) {
        if c.is_zero() {
            continue;
        }
        if c.is_negative() {
            out.push('-');
        } else if !out.is_empty() {
            out.push('+');
        }
        let mag = c.abs();
        if !mag.is_one() {
            out.push_str(&fmt_rational(mag));
        }
        out.push(v);
    }
    if !offset.is_zero() || out.is_empty() {
        if offset.is_negative() {
            out.push('-');
        } else if !out.is_empty() {
            out.push('+');
        }
        out.push_str(&fmt_rational(offset.abs()));
    }
    out
}

/// Canonical form: variables in x, y, z order, then the constant, with
/// components separated by `", "` (e.g. `-x+1/2, y, z+1/4`).
impl fmt::Display for AffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..3 {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(&fmt_component(&self.matrix[i], self.offset[i]))?;
        }
        Ok(())
    }
}
