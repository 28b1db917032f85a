//! Regular expressions over the placement alphabet `{0, 1, 2}`.
//!
//! `0` is an empty cell, `1` a cell covered by the part and `2` a halo cell.
//! Repetition counts may be written relative to the grid side, `0^{s-4}`,
//! so a placement expression can be printed once for every grid size.

use std::fmt;

use thiserror::Error;

use crate::shapes::{exterior_halo, OrientationSet, Shape};

pub const EMPTY: u8 = 0;
pub const PART: u8 = 1;
pub const HALO: u8 = 2;

/// A repetition count, either fixed or `s + offset` for grid side `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Count {
    Fixed(u32),
    Grid(i32),
}

impl Count {
    pub fn eval(self, grid: usize) -> usize {
        match self {
            Count::Fixed(n) => n as usize,
            Count::Grid(off) => (grid as i64 + off as i64).max(0) as usize,
        }
    }

    fn render(self, grid: Option<usize>) -> String {
        let n = match (self, grid) {
            (Count::Grid(off), None) => {
                return match off.cmp(&0) {
                    std::cmp::Ordering::Equal => "^{s}".to_string(),
                    std::cmp::Ordering::Less => format!("^{{s-{}}}", -off),
                    std::cmp::Ordering::Greater => format!("^{{s+{off}}}"),
                }
            }
            (c, Some(s)) => c.eval(s),
            (Count::Fixed(n), None) => n as usize,
        };
        if n < 10 {
            format!("^{n}")
        } else {
            format!("^{{{n}}}")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Regex {
    Symbol(u8),
    Concat(Vec<Regex>),
    Alt(Vec<Regex>),
    Repeat(Box<Regex>, Count),
    Star(Box<Regex>),
}

impl Regex {
    pub fn repeat(inner: Regex, count: Count) -> Regex {
        Regex::Repeat(Box::new(inner), count)
    }

    pub fn star(inner: Regex) -> Regex {
        Regex::Star(Box::new(inner))
    }

    /// Renders with symbolic grid counts (`0^{s-4}`).
    pub fn symbolic(&self) -> String {
        self.render(None)
    }

    /// Renders with grid counts evaluated for side `grid`.
    pub fn concrete(&self, grid: usize) -> String {
        self.render(Some(grid))
    }

    fn render(&self, grid: Option<usize>) -> String {
        match self {
            Regex::Symbol(a) => a.to_string(),
            Regex::Concat(items) => items
                .iter()
                .map(|item| match item {
                    Regex::Alt(_) | Regex::Concat(_) => format!("( {} )", item.render(grid)),
                    _ => item.render(grid),
                })
                .collect::<Vec<_>>()
                .join(" "),
            Regex::Alt(items) => items
                .iter()
                .map(|item| match item {
                    Regex::Alt(_) => format!("( {} )", item.render(grid)),
                    _ => item.render(grid),
                })
                .collect::<Vec<_>>()
                .join(" | "),
            Regex::Repeat(inner, count) => format!("{}{}", inner.render_atom(grid), count.render(grid)),
            Regex::Star(inner) => format!("{}*", inner.render_atom(grid)),
        }
    }

    fn render_atom(&self, grid: Option<usize>) -> String {
        match self {
            Regex::Symbol(a) => a.to_string(),
            other => format!("( {} )", other.render(grid)),
        }
    }

    /// Fully expanded symbol sequence of a star-free, alternation-free
    /// expression (used for orientation bodies).
    pub fn expand(&self, grid: usize) -> Option<Vec<u8>> {
        match self {
            Regex::Symbol(a) => Some(vec![*a]),
            Regex::Concat(items) => {
                let mut out = Vec::new();
                for item in items {
                    out.extend(item.expand(grid)?);
                }
                Some(out)
            }
            Regex::Repeat(inner, count) => {
                let once = inner.expand(grid)?;
                Some(once.repeat(count.eval(grid)))
            }
            Regex::Alt(_) | Regex::Star(_) => None,
        }
    }

    /// Parses the notation produced by [`Regex::symbolic`]. Whitespace is
    /// optional; `^n`, `^{n}` and `^{s-k}` / `^{s+k}` / `^{s}` counts are accepted.
    pub fn parse(text: &str) -> Result<Regex, RegexParseError> {
        let tokens: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut parser = Parser { tokens, pos: 0 };
        let re = parser.alt()?;
        if parser.pos != parser.tokens.len() {
            return Err(RegexParseError::Unexpected(parser.pos));
        }
        Ok(re)
    }
}

impl fmt::Display for Regex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.symbolic())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegexParseError {
    #[error("unexpected token at position {0}")]
    Unexpected(usize),
    #[error("unexpected end of expression")]
    Eof,
    #[error("malformed repetition count at position {0}")]
    Count(usize),
}

struct Parser {
    tokens: Vec<char>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.tokens.get(self.pos).copied()
    }

    fn alt(&mut self) -> Result<Regex, RegexParseError> {
        let mut items = vec![self.concat()?];
        while self.peek() == Some('|') {
            self.pos += 1;
            items.push(self.concat()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Regex::Alt(items) })
    }

    fn concat(&mut self) -> Result<Regex, RegexParseError> {
        let mut items = Vec::new();
        while matches!(self.peek(), Some('0'..='2') | Some('(')) {
            items.push(self.postfix()?);
        }
        match items.len() {
            0 => Err(self.peek().map_or(RegexParseError::Eof, |_| RegexParseError::Unexpected(self.pos))),
            1 => Ok(items.pop().unwrap()),
            _ => Ok(Regex::Concat(items)),
        }
    }

    fn postfix(&mut self) -> Result<Regex, RegexParseError> {
        let mut re = self.atom()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    re = Regex::star(re);
                }
                Some('^') => {
                    self.pos += 1;
                    let count = self.count()?;
                    re = Regex::repeat(re, count);
                }
                _ => return Ok(re),
            }
        }
    }

    fn atom(&mut self) -> Result<Regex, RegexParseError> {
        match self.peek() {
            Some(c @ '0'..='2') => {
                self.pos += 1;
                Ok(Regex::Symbol(c as u8 - b'0'))
            }
            Some('(') => {
                self.pos += 1;
                let inner = self.alt()?;
                if self.peek() != Some(')') {
                    return Err(self.peek().map_or(RegexParseError::Eof, |_| RegexParseError::Unexpected(self.pos)));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(_) => Err(RegexParseError::Unexpected(self.pos)),
            None => Err(RegexParseError::Eof),
        }
    }

    fn number(&mut self) -> Option<u32> {
        let start = self.pos;
        while matches!(self.peek(), Some('0'..='9')) {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        self.tokens[start..self.pos].iter().collect::<String>().parse().ok()
    }

    fn count(&mut self) -> Result<Count, RegexParseError> {
        let at = self.pos;
        match self.peek() {
            Some('{') => {
                self.pos += 1;
                let count = if self.peek() == Some('s') {
                    self.pos += 1;
                    match self.peek() {
                        Some('-') => {
                            self.pos += 1;
                            Count::Grid(-(self.number().ok_or(RegexParseError::Count(at))? as i32))
                        }
                        Some('+') => {
                            self.pos += 1;
                            Count::Grid(self.number().ok_or(RegexParseError::Count(at))? as i32)
                        }
                        _ => Count::Grid(0),
                    }
                } else {
                    Count::Fixed(self.number().ok_or(RegexParseError::Count(at))?)
                };
                if self.peek() != Some('}') {
                    return Err(RegexParseError::Count(at));
                }
                self.pos += 1;
                Ok(count)
            }
            Some('0'..='9') => {
                // a bare exponent is a single digit, as in 2^3
                let d = self.tokens[self.pos] as u32 - '0' as u32;
                self.pos += 1;
                Ok(Count::Fixed(d))
            }
            _ => Err(RegexParseError::Count(at)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("digit {digit} orientation {orientation} ({height}x{width}) does not fit a {grid}x{grid} grid with a 1-cell margin")]
    TooLarge { digit: u8, orientation: usize, height: i32, width: i32, grid: usize },
}

/// The placement expression of one part on an `s x s` grid. Words are a
/// control symbol followed by the grid in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacementRegex {
    pub regex: Regex,
    pub digit: u8,
    pub grid: usize,
}

impl PlacementRegex {
    /// Scope length of the regular constraint: control symbol plus grid.
    pub fn word_len(&self) -> usize {
        1 + self.grid * self.grid
    }

    pub fn symbolic(&self) -> String {
        self.regex.symbolic()
    }

    pub fn concrete(&self) -> String {
        self.regex.concrete(self.grid)
    }

    /// Orientation bodies, in orientation order.
    pub fn bodies(&self) -> Vec<&Regex> {
        let Regex::Alt(top) = &self.regex else { return vec![] };
        let Some(Regex::Concat(placed)) = top.first() else { return vec![] };
        match placed.get(2) {
            Some(Regex::Alt(bodies)) => bodies.iter().collect(),
            Some(body) => vec![body],
            None => vec![],
        }
    }
}

/// `1 0* ( body_1 | ... ) 0* | 0 0*`, one body per orientation.
pub fn build_regex(digit: u8, orientations: &OrientationSet, grid: usize) -> Result<PlacementRegex, BuildError> {
    let mut bodies = Vec::new();
    for (i, shape) in orientations.shapes().iter().enumerate() {
        if shape.height() as usize + 2 > grid || shape.width() as usize + 2 > grid {
            return Err(BuildError::TooLarge {
                digit,
                orientation: i,
                height: shape.height(),
                width: shape.width(),
                grid,
            });
        }
        bodies.push(orientation_body(shape));
    }
    let body = if bodies.len() == 1 { bodies.pop().unwrap() } else { Regex::Alt(bodies) };
    let zeros = || Regex::star(Regex::Symbol(EMPTY));
    let placed = Regex::Concat(vec![Regex::Symbol(PART), zeros(), body, zeros()]);
    let absent = Regex::Concat(vec![Regex::Symbol(EMPTY), zeros()]);
    Ok(PlacementRegex { regex: Regex::Alt(vec![placed, absent]), digit, grid })
}

/// Row-major body from the first to the last non-empty symbol of the
/// shape's bounding box extended by one cell. Runs between rows become
/// `0^{s-k}`; consecutive identical row-plus-gap pairs are grouped.
pub fn orientation_body(shape: &Shape) -> Regex {
    let halo = exterior_halo(shape);
    let (h, w) = (shape.height(), shape.width());
    let symbol = |r: i32, c: i32| {
        if shape.contains((r, c)) {
            PART
        } else if halo.contains(&(r, c)) {
            HALO
        } else {
            EMPTY
        }
    };
    // (first col, last col, symbols) per extended row
    let mut segments: Vec<(i32, i32, Vec<u8>)> = Vec::new();
    for r in -1..=h {
        let row: Vec<(i32, u8)> = (-1..=w).map(|c| (c, symbol(r, c))).collect();
        let first = row.iter().find(|(_, a)| *a != EMPTY).map(|(c, _)| *c);
        let last = row.iter().rev().find(|(_, a)| *a != EMPTY).map(|(c, _)| *c);
        if let (Some(first), Some(last)) = (first, last) {
            let syms = row.iter().filter(|(c, _)| *c >= first && *c <= last).map(|(_, a)| *a).collect();
            segments.push((first, last, syms));
        }
    }
    // pair each segment with the offset of the gap that follows it
    let entries: Vec<(Vec<u8>, Option<i32>)> = segments
        .iter()
        .enumerate()
        .map(|(i, (_, last, syms))| {
            let gap = segments.get(i + 1).map(|(next_first, _, _)| next_first - last - 1);
            (syms.clone(), gap)
        })
        .collect();

    let mut items = Vec::new();
    let mut i = 0;
    while i < entries.len() {
        let mut run = 1;
        while entries[i].1.is_some() && i + run < entries.len() && entries[i + run] == entries[i] {
            run += 1;
        }
        let mut piece = run_length(&entries[i].0);
        if let Some(gap) = entries[i].1 {
            piece.push(Regex::repeat(Regex::Symbol(EMPTY), Count::Grid(gap)));
        }
        if run > 1 {
            items.push(Regex::repeat(Regex::Concat(piece), Count::Fixed(run as u32)));
        } else {
            items.extend(piece);
        }
        i += run;
    }
    Regex::Concat(items)
}

fn run_length(symbols: &[u8]) -> Vec<Regex> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < symbols.len() {
        let mut j = i;
        while j < symbols.len() && symbols[j] == symbols[i] {
            j += 1;
        }
        let n = j - i;
        out.push(if n == 1 {
            Regex::Symbol(symbols[i])
        } else {
            Regex::repeat(Regex::Symbol(symbols[i]), Count::Fixed(n as u32))
        });
        i = j;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::{distinct_orientations, zero_ring};

    #[test]
    fn single_cell_body() {
        let cell = Shape::from_cells([(0, 0)]).unwrap();
        let body = orientation_body(&cell);
        assert_eq!(body.symbolic(), "2 0^{s-2} 2 1 2 0^{s-2} 2");
        assert_eq!(body.concrete(4), "2 0^2 2 1 2 0^2 2");
        let expanded = body.expand(4).unwrap();
        assert_eq!(expanded.iter().filter(|&&a| a == HALO).count(), 4);
    }

    #[test]
    fn zero_bodies_have_fourteen_halo_symbols() {
        let re = build_regex(0, &distinct_orientations(&zero_ring()), 8).unwrap();
        let bodies = re.bodies();
        assert_eq!(bodies.len(), 2);
        for body in bodies {
            let expanded = body.expand(8).unwrap();
            assert_eq!(expanded.iter().filter(|&&a| a == HALO).count(), 14);
            assert_eq!(expanded.iter().filter(|&&a| a == PART).count(), 10);
        }
    }

    #[test]
    fn too_small_grid() {
        let err = build_regex(0, &distinct_orientations(&zero_ring()), 5).unwrap_err();
        assert!(matches!(err, BuildError::TooLarge { digit: 0, grid: 5, .. }));
    }

    #[test]
    fn parse_round_trip() {
        let re = build_regex(0, &distinct_orientations(&zero_ring()), 8).unwrap();
        let text = re.symbolic();
        assert_eq!(Regex::parse(&text).unwrap().symbolic(), text);
        assert_eq!(Regex::parse("00*").unwrap(), Regex::Concat(vec![Regex::Symbol(0), Regex::star(Regex::Symbol(0))]));
        assert_eq!(
            Regex::parse("0^{12}").unwrap(),
            Regex::repeat(Regex::Symbol(0), Count::Fixed(12))
        );
        assert!(Regex::parse("(0").is_err());
        assert!(Regex::parse("0^x").is_err());
        assert!(Regex::parse("3").is_err());
        assert!(Regex::parse("").is_err());
    }

    #[test]
    fn counts_render() {
        assert_eq!(Count::Grid(0).render(None), "^{s}");
        assert_eq!(Count::Grid(2).render(None), "^{s+2}");
        assert_eq!(Count::Grid(-5).render(Some(20)), "^{15}");
        assert_eq!(Count::Grid(-25).eval(20), 0);
    }
}
