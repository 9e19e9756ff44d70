//! Recursive-descent parser for constraint text.
//!
//! ```text
//! formula := implies [ "where" "y" "==" ("0" | "1") ]
//! implies := or [ "->" implies ]
//! or      := and { "|" and }
//! and     := not { "&" not }
//! not     := "!" not | "(" implies ")" | atom
//! atom    := "I" "[" name "]" ("<" | "<=" | ">" | ">=") number
//! ```

use super::{Atom, ConstraintError, ConstraintFormula, Direction, DomainFilter, Expr};

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    names: &'a [String],
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ConstraintError> {
        Err(ConstraintError::Parse {
            position: self.pos,
            message: message.into(),
        })
    }

    /// Consumes `token` if the input continues with it.
    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), ConstraintError> {
        if self.eat(token) {
            Ok(())
        } else {
            self.error(format!("expected `{token}`"))
        }
    }

    fn at_keyword(&mut self, word: &str) -> bool {
        self.skip_ws();
        let rest = self.rest();
        rest.starts_with(word)
            && !rest[word.len()..]
                .chars()
                .next()
                .is_some_and(|c| c.is_alphanumeric() || c == '_')
    }

    fn formula(&mut self) -> Result<ConstraintFormula, ConstraintError> {
        let expr = self.implies()?;
        let mut filter = None;
        if self.at_keyword("where") {
            self.pos += "where".len();
            if !self.at_keyword("y") {
                return self.error("expected `y` after `where`");
            }
            self.pos += 1;
            self.expect("==")?;
            self.skip_ws();
            let label = match self.rest().chars().next() {
                Some('0') => 0,
                Some('1') => 1,
                _ => return self.error("expected label 0 or 1"),
            };
            self.pos += 1;
            filter = Some(DomainFilter { label });
        }
        self.skip_ws();
        if !self.rest().is_empty() {
            return self.error("unexpected trailing input");
        }
        Ok(ConstraintFormula {
            expr,
            filter,
            lambda: 1.0,
        })
    }

    fn implies(&mut self) -> Result<Expr, ConstraintError> {
        let lhs = self.or()?;
        if self.eat("->") {
            let rhs = self.implies()?;
            return Ok(Expr::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Expr, ConstraintError> {
        let mut lhs = self.and()?;
        while self.eat("|") {
            let rhs = self.and()?;
            lhs = Expr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr, ConstraintError> {
        let mut lhs = self.not()?;
        while self.eat("&") {
            let rhs = self.not()?;
            lhs = Expr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn not(&mut self) -> Result<Expr, ConstraintError> {
        if self.eat("!") {
            return Ok(Expr::Not(Box::new(self.not()?)));
        }
        if self.eat("(") {
            let inner = self.implies()?;
            self.expect(")")?;
            return Ok(inner);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ConstraintError> {
        if !self.eat("I") {
            return self.error("expected `I[<feature>]`, `!` or `(`");
        }
        self.expect("[")?;
        let Some(close) = self.rest().find(']') else {
            return self.error("unterminated feature name");
        };
        let name_pos = self.pos;
        let name = self.rest()[..close].trim();
        self.pos += close + 1;
        let feature = self
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| ConstraintError::UnknownFeature {
                name: name.to_string(),
                position: name_pos,
            })?;

        let direction = if self.eat("<=") || self.eat("<") {
            Direction::Below
        } else if self.eat(">=") || self.eat(">") {
            Direction::Above
        } else {
            return self.error("expected `<` or `>`");
        };
        self.skip_ws();
        let num_pos = self.pos;
        let threshold = self.number()?;
        let atom = Atom {
            feature,
            direction,
            threshold,
            strength: 1.0,
        };
        atom.validate().map_err(|message| ConstraintError::Parse {
            position: num_pos,
            message,
        })?;
        Ok(Expr::Atom(atom))
    }

    /// Unsigned decimal with optional exponent. A `-` is only taken right
    /// after `e`/`E`, so `0.1->` leaves the arrow in place.
    fn number(&mut self) -> Result<f64, ConstraintError> {
        let bytes = self.rest().as_bytes();
        let mut end = 0;
        while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
            end += 1;
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut k = end + 1;
            if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                k += 1;
            }
            let digits = k;
            while k < bytes.len() && bytes[k].is_ascii_digit() {
                k += 1;
            }
            if k > digits {
                end = k;
            }
        }
        match self.rest()[..end].parse::<f64>() {
            Ok(v) => {
                self.pos += end;
                Ok(v)
            }
            Err(_) => self.error("expected a threshold in [0, 1]"),
        }
    }
}

/// Parses constraint text against the model's feature names. The result has
/// `lambda = 1`; set the strength with [`ConstraintFormula::with_lambda`].
pub fn parse_formula(text: &str, names: &[String]) -> Result<ConstraintFormula, ConstraintError> {
    Parser {
        src: text,
        pos: 0,
        names,
    }
    .formula()
}
