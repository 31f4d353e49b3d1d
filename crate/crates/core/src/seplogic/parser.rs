//! Recursive-descent parser. Lowest to highest precedence: `->` (right
//! associative), `\/`, `/\`, `*` (the last three left associative).

use num_rational::Ratio;
use thiserror::Error;

use super::formula::Formula;
use crate::psl::Distribution;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at position {position}: {message}")]
pub struct ParseError {
    /// Character offset into the input.
    pub position: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Colon,
    Comma,
    Slash,
    Imp,
    Or,
    And,
    Star,
    Strict,
    NonStrict,
    Alloc,
    Tilde,
    Top,
    Bottom,
}

fn describe(t: Option<&Tok>) -> String {
    match t {
        None => "end of input".into(),
        Some(Tok::Ident(s)) => format!("identifier {s}"),
        Some(Tok::Int(i)) => format!("number {i}"),
        Some(other) => format!("{other:?}"),
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let symbols: &[(&str, Tok)] = &[
        ("|->!", Tok::Alloc),
        ("|->", Tok::Strict),
        ("~>", Tok::NonStrict),
        ("->", Tok::Imp),
        ("/\\", Tok::And),
        ("\\/", Tok::Or),
        ("↦!", Tok::Alloc),
        ("↦", Tok::Strict),
        ("↪", Tok::NonStrict),
        ("→", Tok::Imp),
        ("∧", Tok::And),
        ("∨", Tok::Or),
        ("∗", Tok::Star),
        ("⊤", Tok::Top),
        ("⊥", Tok::Bottom),
        ("*", Tok::Star),
        ("~", Tok::Tilde),
        ("(", Tok::LParen),
        (")", Tok::RParen),
        ("{", Tok::LBrace),
        ("}", Tok::RBrace),
        (":", Tok::Colon),
        (",", Tok::Comma),
        ("/", Tok::Slash),
    ];
    'outer: while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
            continue;
        }
        for (sym, tok) in symbols {
            let s: Vec<char> = sym.chars().collect();
            if chars[i..].starts_with(&s) {
                out.push((i, tok.clone()));
                i += s.len();
                continue 'outer;
            }
        }
        if ch.is_ascii_digit() || (ch == '-' && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit())) {
            let start = i;
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let v = s.parse().map_err(|_| ParseError { position: start, message: format!("number {s} out of range") })?;
            out.push((start, Tok::Int(v)));
            continue;
        }
        if ch.is_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let tok = match s.as_str() {
                "T" => Tok::Top,
                "F" => Tok::Bottom,
                _ => Tok::Ident(s),
            };
            out.push((start, tok));
            continue;
        }
        return Err(ParseError { position: i, message: format!("unexpected character {ch:?}") });
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn fail<T>(&self, what: &str) -> Result<T, ParseError> {
        Err(ParseError { position: self.here(), message: format!("expected {what}, found {}", describe(self.peek())) })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Imp) {
            Ok(Formula::imp(lhs, self.imp()?))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Or) {
            lhs = Formula::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.star()?;
        while self.eat(&Tok::And) {
            lhs = Formula::and(lhs, self.star()?);
        }
        Ok(lhs)
    }

    fn star(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.atom()?;
        while self.eat(&Tok::Star) {
            lhs = Formula::star(lhs, self.atom()?);
        }
        Ok(lhs)
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        match self.peek() {
            Some(Tok::Int(v)) => {
                let v = *v;
                self.pos += 1;
                Ok(v)
            }
            _ => self.fail("a value"),
        }
    }

    fn distribution(&mut self) -> Result<Distribution, ParseError> {
        if !self.eat(&Tok::LBrace) {
            return self.fail("'{' opening a distribution");
        }
        let mut dist = Distribution::new();
        if self.eat(&Tok::RBrace) {
            return Ok(dist);
        }
        loop {
            let at = self.here();
            let v = self.int()?;
            if !self.eat(&Tok::Colon) {
                return self.fail("':'");
            }
            let num = self.int()?;
            let den = if self.eat(&Tok::Slash) { self.int()? } else { 1 };
            if den <= 0 || num < 0 {
                return Err(ParseError { position: at, message: "probabilities must be non-negative fractions".into() });
            }
            if dist.insert(v, Ratio::new(num, den)).is_some() {
                return Err(ParseError { position: at, message: format!("value {v} listed twice") });
            }
            if self.eat(&Tok::RBrace) {
                return Ok(dist);
            }
            if !self.eat(&Tok::Comma) {
                return self.fail("',' or '}'");
            }
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Top) => {
                self.pos += 1;
                Ok(Formula::Top)
            }
            Some(Tok::Bottom) => {
                self.pos += 1;
                Ok(Formula::Bottom)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.imp()?;
                if !self.eat(&Tok::RParen) {
                    return self.fail("')'");
                }
                Ok(f)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if name == "emp" {
                    return Ok(Formula::Emp);
                }
                let op = self.peek().cloned();
                match op {
                    Some(Tok::Strict) | Some(Tok::NonStrict) | Some(Tok::Alloc) => {
                        self.pos += 1;
                        let val = self.int()?;
                        Ok(match op {
                            Some(Tok::Strict) => Formula::PointsToStrict { loc: name, val },
                            Some(Tok::NonStrict) => Formula::PointsToNonStrict { loc: name, val },
                            _ => Formula::PointsToAlloc { loc: name, val },
                        })
                    }
                    Some(Tok::Tilde) => {
                        self.pos += 1;
                        Ok(Formula::DistAtom { var: name, dist: self.distribution()? })
                    }
                    _ => self.fail("'|->', '~>', '|->!' or '~'"),
                }
            }
            _ => self.fail("a formula"),
        }
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.chars().count() };
    let f = p.imp()?;
    if p.pos != p.toks.len() {
        return p.fail("end of input");
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(loc: &str, val: i64) -> Formula {
        Formula::PointsToStrict { loc: loc.into(), val }
    }

    #[test]
    fn star_of_points_to() {
        assert_eq!(parse_formula("x |-> 0 * y |-> 1").unwrap(), Formula::star(pt("x", 0), pt("y", 1)));
    }

    #[test]
    fn precedence() {
        assert_eq!(
            parse_formula("T -> F \\/ T").unwrap(),
            Formula::imp(Formula::Top, Formula::or(Formula::Bottom, Formula::Top))
        );
        assert_eq!(
            parse_formula("T /\\ x |-> 0 * y |-> 1").unwrap(),
            Formula::and(Formula::Top, Formula::star(pt("x", 0), pt("y", 1)))
        );
        assert_eq!(
            parse_formula("T -> T -> F").unwrap(),
            Formula::imp(Formula::Top, Formula::imp(Formula::Top, Formula::Bottom))
        );
        assert_eq!(
            parse_formula("x |-> 0 * x |-> 1 * x |-> 2").unwrap(),
            Formula::star(Formula::star(pt("x", 0), pt("x", 1)), pt("x", 2))
        );
    }

    #[test]
    fn atom_kinds() {
        assert_eq!(parse_formula("x ~> -3").unwrap(), Formula::PointsToNonStrict { loc: "x".into(), val: -3 });
        assert_eq!(parse_formula("x |->! 1").unwrap(), Formula::PointsToAlloc { loc: "x".into(), val: 1 });
        assert_eq!(parse_formula("x ↦ 1 ∗ emp").unwrap(), Formula::star(pt("x", 1), Formula::Emp));
        let d = parse_formula("X ~ {0: 1/2, 1: 1/2}").unwrap();
        let Formula::DistAtom { var, dist } = d else { panic!() };
        assert_eq!(var, "X");
        assert_eq!(dist[&0], Ratio::new(1, 2));
    }

    #[test]
    fn errors_point_at_the_problem() {
        let e = parse_formula("x |->").unwrap_err();
        assert_eq!(e.position, 5);
        assert!(e.message.contains("value"));
        assert!(parse_formula("(T").is_err());
        assert!(parse_formula("T T").is_err());
        assert_eq!(parse_formula("T $").unwrap_err().position, 2);
    }

    #[test]
    fn display_round_trips() {
        for s in ["x |-> 0 * y ~> 1 -> F", "(T \\/ F) /\\ emp", "X ~ {0: 1/3, 2: 2/3} * Y ~ {1: 1}"] {
            let f = parse_formula(s).unwrap();
            assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
        }
    }
}
