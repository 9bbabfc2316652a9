//! Line-level tokenizer shared by the Wyckoff and coordinate block parsers.

use super::ParseError;
use crate::element::Element;
use crate::LatticeParams;

pub(super) struct Lines<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

pub(super) struct Line<'a> {
    pub number: usize,
    pub tokens: Vec<&'a str>,
}

impl Line<'_> {
    pub fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::Lexical { line: self.number, message: message.into() }
    }
}

impl<'a> Lines<'a> {
    pub fn new(text: &'a str) -> Self {
        let mut lines: Vec<&str> = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();
        while lines.last().is_some_and(|l| l.trim().is_empty()) {
            lines.pop();
        }
        Lines { lines, pos: 0 }
    }

    /// Next line, which must exist and be non-blank.
    pub fn next(&mut self, what: &str) -> Result<Line<'a>, ParseError> {
        let number = self.pos + 1;
        let Some(raw) = self.lines.get(self.pos) else {
            return Err(ParseError::Lexical { line: number, message: format!("expected {what}, found end of input") });
        };
        self.pos += 1;
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if tokens.is_empty() {
            return Err(ParseError::Lexical { line: number, message: format!("expected {what}, found a blank line") });
        }
        Ok(Line { number, tokens })
    }

    pub fn remaining(&mut self) -> impl Iterator<Item = Result<Line<'a>, ParseError>> + '_ {
        std::iter::from_fn(move || (self.pos < self.lines.len()).then(|| self.next("a site line")))
    }
}

/// Decimal literal: optional sign, digits with an optional fractional part.
pub(super) fn number(line: &Line, token: &str, what: &str) -> Result<f64, ParseError> {
    let body = token.strip_prefix(['-', '+']).unwrap_or(token);
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    let well_formed = !body.is_empty()
        && body != "."
        && int.bytes().all(|b| b.is_ascii_digit())
        && frac.bytes().all(|b| b.is_ascii_digit())
        && body.len() <= 40;
    if !well_formed {
        return Err(line.error(format!("invalid {what} '{token}'")));
    }
    token.parse::<f64>().map_err(|_| line.error(format!("invalid {what} '{token}'")))
}

pub(super) fn count(line: &Line, digits: &str, what: &str) -> Result<usize, ParseError> {
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(line.error(format!("invalid {what} '{digits}'")));
    }
    match digits.parse::<usize>() {
        Ok(n) if n > 0 && n <= 1_000_000 => Ok(n),
        _ => Err(line.error(format!("{what} '{digits}' out of range"))),
    }
}

pub(super) fn element(line: &Line, token: &str) -> Result<Element, ParseError> {
    Element::from_symbol(token).map_err(|_| line.error(format!("unknown element '{token}'")))
}

pub(super) fn formula(lines: &mut Lines) -> Result<Vec<(Element, usize)>, ParseError> {
    let line = lines.next("a formula")?;
    if line.tokens.len() != 1 {
        return Err(line.error("formula must be a single token"));
    }
    let text = line.tokens[0];
    let bytes = text.as_bytes();
    let mut out: Vec<(Element, usize)> = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if !bytes[i].is_ascii_uppercase() {
            return Err(line.error(format!("expected an element symbol at column {}", i + 1)));
        }
        let start = i;
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_lowercase() {
            i += 1;
        }
        let symbol = &text[start..i];
        let digits_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let el = element(&line, symbol)?;
        let n = count(&line, &text[digits_start..i], &format!("count for {symbol}"))?;
        if out.iter().any(|(e, _)| *e == el) {
            return Err(line.error(format!("element {symbol} repeated in formula")));
        }
        out.push((el, n));
    }
    Ok(out)
}

fn keyword_line<'a>(lines: &mut Lines<'a>, keyword: &str, arity: usize) -> Result<Line<'a>, ParseError> {
    let line = lines.next(&format!("'{keyword}'"))?;
    if line.tokens[0] != keyword {
        return Err(line.error(format!("expected '{keyword}', found '{}'", line.tokens[0])));
    }
    if line.tokens.len() != arity + 1 {
        return Err(line.error(format!("'{keyword}' takes {arity} values, found {}", line.tokens.len() - 1)));
    }
    Ok(line)
}

pub(super) fn spacegroup_symbol<'a>(lines: &mut Lines<'a>) -> Result<&'a str, ParseError> {
    Ok(keyword_line(lines, "Spacegroup:", 1)?.tokens[1])
}

pub(super) fn lattice(lines: &mut Lines) -> Result<LatticeParams, ParseError> {
    let abc = keyword_line(lines, "abc:", 3)?;
    let l: Vec<f64> = abc.tokens[1..].iter().map(|t| number(&abc, t, "length")).collect::<Result<_, _>>()?;
    let angles = keyword_line(lines, "angles:", 3)?;
    let t: Vec<f64> = angles.tokens[1..].iter().map(|s| number(&angles, s, "angle")).collect::<Result<_, _>>()?;
    Ok(LatticeParams::new(l[0], l[1], l[2], t[0], t[1], t[2]))
}

pub(super) fn site_total(lines: &mut Lines) -> Result<usize, ParseError> {
    let line = keyword_line(lines, "Sites", 1)?;
    let inner = line.tokens[1]
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| line.error(format!("expected '(N)', found '{}'", line.tokens[1])))?;
    count(&line, inner, "site total")
}

pub(super) fn coordinates(line: &Line, tokens: &[&str]) -> Result<[f64; 3], ParseError> {
    let mut p = [0.0; 3];
    for (slot, token) in p.iter_mut().zip(tokens) {
        *slot = number(line, token, "coordinate")?;
    }
    Ok(p)
}
