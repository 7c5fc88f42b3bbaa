//! Recursive-descent parser for the scalar grammar:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' ['-'] integer)?
//! atom    := integer | 'i' | parameter | '(' sum ')'
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{GaussRat, ParamSpace, Scalar, ScalarError};

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    space: &'a ParamSpace,
}

pub(super) fn parse_scalar(text: &str, space: &ParamSpace) -> Result<Scalar, ScalarError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        space,
    };
    let v = p.sum()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(v)
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> ScalarError {
        ScalarError::Parse {
            col: self.pos + 1,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Scalar, ScalarError> {
        let mut acc = self.product()?;
        loop {
            if self.eat(b'+') {
                acc = &acc + &self.product()?;
            } else if self.eat(b'-') {
                acc = &acc - &self.product()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> Result<Scalar, ScalarError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = &acc * &self.unary()?;
            } else if self.eat(b'/') {
                let rhs = self.unary()?;
                acc = acc.checked_div(&rhs)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Scalar, ScalarError> {
        if self.eat(b'-') {
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Scalar, ScalarError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let neg = self.eat(b'-');
            let e = self.integer()?;
            let e: i32 = e
                .try_into()
                .map_err(|_| self.error("exponent out of range"))?;
            return base.pow(if neg { -e } else { e });
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<BigInt, ScalarError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected integer"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(s.parse().expect("digits parse"))
    }

    fn atom(&mut self) -> Result<Scalar, ScalarError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.sum()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                Ok(Scalar::constant(GaussRat::from_rational(
                    BigRational::from_integer(n),
                )))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                if name == "i" {
                    return Ok(Scalar::i());
                }
                match self.space.index_of(name) {
                    Some(idx) => Ok(Scalar::param(idx)),
                    None => {
                        self.pos = start;
                        Err(self.error(&format!("unknown parameter `{name}`")))
                    }
                }
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let s = ParamSpace::new(["c"]);
        assert_eq!(
            parse_scalar("1 + 2*c^2", &s).unwrap(),
            parse_scalar("(2*(c*c)) + 1", &s).unwrap()
        );
        assert_eq!(
            parse_scalar("c^-1", &s).unwrap(),
            parse_scalar("1/c", &s).unwrap()
        );
        assert_eq!(parse_scalar("-2^2", &s).unwrap(), Scalar::from_int(-4));
    }

    #[test]
    fn errors_carry_columns() {
        let s = ParamSpace::new(["c"]);
        match parse_scalar("c + q", &s) {
            Err(ScalarError::Parse { col, .. }) => assert_eq!(col, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_scalar("(c", &s).is_err());
        assert!(parse_scalar("c c", &s).is_err());
    }
}
