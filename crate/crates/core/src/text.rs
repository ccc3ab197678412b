//! Text syntax for Milnor-basis elements and admissible words.
//!
//! Elements: terms joined by `+`; each term is a whitespace-separated
//! product of factors `Q<i>`, `P(r1,r2,...)`, `Sq<n>` or `1`, multiplied in
//! written order. The canonical printed forms (`Q0 Q2 P(1,0,3)` and the
//! `P^R Q^E` form `P(1) Q0`) parse back to the element they denote.
//!
//! Words: `Sq3 Sq1`, or `1` for the empty word.

use std::fmt;

use crate::adem::{self, SqWord, WordElement, WordFlavor};
use crate::milnor::{self, Element, MilnorMonomial, MAX_INDEX};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at position {position}: {message}")]
pub struct ParseError {
    /// Byte offset into the input.
    pub position: usize,
    pub message: String,
}

impl ParseError {
    fn new(position: usize, message: impl fmt::Display) -> Self {
        ParseError {
            position,
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Factor {
    One,
    Q(usize),
    P(Vec<u32>),
    Sq(u32),
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.src.len()
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{c}'")))
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        match self.peek() {
            Some(c) => ParseError::new(self.pos, format!("expected {wanted}, found '{c}'")),
            None => ParseError::new(self.pos, format!("expected {wanted}, found end of input")),
        }
    }

    fn number(&mut self) -> Result<u64, ParseError> {
        let start = self.pos;
        let digits = self.rest().bytes().take_while(u8::is_ascii_digit).count();
        if digits == 0 {
            return Err(self.unexpected("a number"));
        }
        self.pos += digits;
        self.src[start..self.pos]
            .parse()
            .map_err(|_| ParseError::new(start, "number out of range"))
    }

    fn factor(&mut self) -> Result<Factor, ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.eat("Sq") {
            let n = self.number()?;
            return u32::try_from(n)
                .map(Factor::Sq)
                .map_err(|_| ParseError::new(start, "square exponent out of range"));
        }
        if self.eat("Q") {
            let i = self.number()?;
            if i as usize > MAX_INDEX {
                return Err(ParseError::new(start, format!("Q index exceeds {MAX_INDEX}")));
            }
            return Ok(Factor::Q(i as usize));
        }
        if self.eat("P") {
            self.skip_ws();
            self.expect('(')?;
            let mut r = Vec::new();
            loop {
                self.skip_ws();
                let at = self.pos;
                let v = self.number()?;
                r.push(u32::try_from(v).map_err(|_| ParseError::new(at, "exponent out of range"))?);
                self.skip_ws();
                if self.eat(",") {
                    continue;
                }
                self.expect(')')?;
                break;
            }
            return Ok(Factor::P(r));
        }
        if self.eat("1") {
            return Ok(Factor::One);
        }
        Err(self.unexpected("Q<i>, P(...), Sq<n> or 1"))
    }

    /// Factors up to the next `+` or end of input.
    fn term(&mut self) -> Result<Vec<Factor>, ParseError> {
        let mut factors = vec![self.factor()?];
        loop {
            self.skip_ws();
            if self.peek().is_none() || self.peek() == Some('+') {
                return Ok(factors);
            }
            factors.push(self.factor()?);
        }
    }

    /// `term (+ term)*`, or a lone `0`.
    fn sum(&mut self) -> Result<Option<Vec<Vec<Factor>>>, ParseError> {
        self.skip_ws();
        if self.rest().trim() == "0" {
            return Ok(None);
        }
        if self.at_end() {
            return Err(self.unexpected("an expression"));
        }
        let mut terms = vec![self.term()?];
        while !self.at_end() {
            self.expect('+')?;
            terms.push(self.term()?);
        }
        Ok(Some(terms))
    }
}

fn factor_to_element(f: &Factor) -> Element {
    match f {
        Factor::One => Element::one(),
        Factor::Q(i) => MilnorMonomial::q(*i).into(),
        Factor::P(r) => MilnorMonomial::p(r).into(),
        Factor::Sq(n) => adem::sq_to_milnor(*n),
    }
}

/// Parse an element of A₀; products are evaluated in written order.
pub fn parse_element(src: &str) -> Result<Element, ParseError> {
    let Some(terms) = Lexer::new(src).sum()? else {
        return Ok(Element::zero());
    };
    let mut out = Element::zero();
    for term in terms {
        let mut acc = Element::one();
        for f in &term {
            acc = milnor::multiply(&acc, &factor_to_element(f));
        }
        out += &acc;
    }
    Ok(out)
}

/// Parse a single word `Sq3 Sq1` of the given flavor (`1` is the empty word).
pub fn parse_word(src: &str, flavor: WordFlavor) -> Result<SqWord, ParseError> {
    let mut lx = Lexer::new(src);
    if lx.at_end() {
        return Err(lx.unexpected("a word"));
    }
    let mut exps = Vec::new();
    while !lx.at_end() {
        let start = lx.pos;
        match lx.factor()? {
            Factor::Sq(n) => {
                if n == 0 {
                    return Err(ParseError::new(start, "Sq0 is not allowed in a word"));
                }
                if flavor == WordFlavor::GEven && n % 2 == 1 {
                    return Err(ParseError::new(start, format!("odd square Sq{n} in a G word")));
                }
                exps.push(n);
            }
            Factor::One => {}
            _ => return Err(ParseError::new(start, "words may only contain Sq<n> factors")),
        }
    }
    SqWord::new(flavor, exps).map_err(|e| ParseError::new(0, e))
}

/// Parse a sum of words, returned as its admissible reduction.
pub fn parse_word_element(src: &str, flavor: WordFlavor) -> Result<WordElement, ParseError> {
    let mut out = WordElement::zero(flavor);
    if src.trim() == "0" {
        return Ok(out);
    }
    let mut offset = 0;
    for piece in src.split('+') {
        let w = parse_word(piece, flavor).map_err(|mut e| {
            e.position += offset;
            e
        })?;
        let reduced = match flavor {
            WordFlavor::A0 => WordElement::from(w),
            _ => adem::adem_reduce(&w).map_err(|e| ParseError::new(offset, e))?,
        };
        out = out.add(&reduced).map_err(|e| ParseError::new(offset, e))?;
        offset += piece.len() + 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_examples() {
        let m = parse_element("Q0 Q2 P(1,0,3)").unwrap();
        assert_eq!(m, MilnorMonomial::new(&[0, 2], &[1, 0, 3]).into());
        assert_eq!(m.to_string(), "Q0 Q2 P(1,0,3)");
        assert_eq!(parse_element("0").unwrap(), Element::zero());
        assert_eq!(parse_element("1").unwrap(), Element::one());
        assert_eq!(parse_element("Q0 + Q0").unwrap(), Element::zero());
        // products in written order
        assert_eq!(parse_element("P(1) Q0").unwrap().to_string(), "Q0 P(1) + Q1");
        assert_eq!(parse_element("P(1) Q0 + Q1").unwrap(), MilnorMonomial::new(&[0], &[1]).into());
        assert_eq!(parse_element("Sq2 Sq1 + Sq1 Sq2").unwrap(), MilnorMonomial::q(1).into());
        assert_eq!(parse_element(" P( 1 , 2 ) ").unwrap(), MilnorMonomial::p(&[1, 2]).into());
    }

    #[test]
    fn parse_errors_carry_positions() {
        let e = parse_element("Q0 + X1").unwrap_err();
        assert_eq!(e.position, 5);
        let e = parse_element("P(1,").unwrap_err();
        assert_eq!(e.position, 4);
        let e = parse_element("Q0 +").unwrap_err();
        assert_eq!(e.position, 4);
        assert!(parse_element("").is_err());
        assert!(parse_element("Q99").is_err());
        let e = parse_word("Sq3 Q1", WordFlavor::Classical).unwrap_err();
        assert_eq!(e.position, 4);
        assert!(parse_word("Sq0", WordFlavor::Classical).is_err());
        assert!(parse_word("Sq3", WordFlavor::GEven).is_err());
    }

    #[test]
    fn parse_words() {
        let w = parse_word("Sq3 Sq1", WordFlavor::Classical).unwrap();
        assert_eq!(w.exponents(), &[3, 1]);
        assert_eq!(w.to_string(), "Sq3 Sq1");
        assert_eq!(parse_word("1", WordFlavor::A0).unwrap(), SqWord::empty(WordFlavor::A0));
        let x = parse_word_element("Sq2 Sq2 + Sq3 Sq1", WordFlavor::Classical).unwrap();
        assert!(x.is_zero());
        let e = parse_word_element("Sq2 + Sq", WordFlavor::Classical).unwrap_err();
        assert_eq!(e.position, 8);
    }

    fn arb_monomial() -> impl Strategy<Value = MilnorMonomial> {
        (0u64..16, proptest::collection::vec(0u32..6, 0..4))
            .prop_map(|(mask, r)| MilnorMonomial::from_parts(mask, r))
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(terms in proptest::collection::vec(arb_monomial(), 0..5)) {
            let x = Element::from_terms(terms);
            prop_assert_eq!(parse_element(&x.to_string()).unwrap(), x.clone());
            let prqe = milnor::qepr_to_prqe(&x);
            prop_assert_eq!(parse_element(&prqe.to_string()).unwrap(), x);
        }
    }
}
