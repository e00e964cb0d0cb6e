//! Weight functions w(σ) = 2^(-f(σ)) on strings of bounded length.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Signed;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::rational::{floor, render, to_i64, weight_of_exponent, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    IntegerExponent,
    RationalTable,
    BuiltinFamily,
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightMode::IntegerExponent => "integer-exponent",
            WeightMode::RationalTable => "rational-table",
            WeightMode::BuiltinFamily => "length-scaled",
        })
    }
}

type ExponentFn = Arc<dyn Fn(&BitString) -> i64 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    /// Dense table indexed by canonical position.
    Exponents(Vec<i64>),
    Table(Vec<Rational>),
    /// Exponent ⌈s·|σ|⌉.
    LengthScaled(Rational),
    ExponentFn(ExponentFn),
}

/// A positive rational weight on every string of length at most `depth`.
#[derive(Clone)]
pub struct WeightFunction {
    depth: usize,
    repr: Repr,
}

fn dense_len(depth: usize) -> usize {
    assert!(depth < 28, "dense weight table of depth {depth} is too large");
    (1usize << (depth + 1)) - 1
}

impl WeightFunction {
    /// Integer-exponent table: w(σ) = 2^(-exponents[σ]). Must be total up to `depth`.
    pub fn from_exponents(depth: usize, exponents: &BTreeMap<BitString, i64>) -> Result<Self> {
        let mut dense = Vec::with_capacity(dense_len(depth));
        for s in BitString::all_up_to(depth) {
            match exponents.get(&s) {
                Some(&k) => dense.push(k),
                None => return Err(Error::MissingWeight(s)),
            }
        }
        Ok(WeightFunction {
            depth,
            repr: Repr::Exponents(dense),
        })
    }

    /// Rational table. Must be total and positive up to `depth`.
    pub fn from_table(depth: usize, table: &BTreeMap<BitString, Rational>) -> Result<Self> {
        let mut dense = Vec::with_capacity(dense_len(depth));
        for s in BitString::all_up_to(depth) {
            match table.get(&s) {
                Some(w) if w.is_positive() => dense.push(w.clone()),
                Some(_) => return Err(Error::NonPositiveWeight(s)),
                None => return Err(Error::MissingWeight(s)),
            }
        }
        Ok(WeightFunction {
            depth,
            repr: Repr::Table(dense),
        })
    }

    /// Tabulates `f` as a rational table.
    pub fn tabulate(depth: usize, f: impl Fn(&BitString) -> Rational) -> Result<Self> {
        let table = BitString::all_up_to(depth).map(|s| {
            let w = f(&s);
            (s, w)
        });
        Self::from_table(depth, &table.collect())
    }

    /// Integer-exponent weight given by a function of the string (not materialized).
    pub fn from_exponent_fn(
        depth: usize,
        f: impl Fn(&BitString) -> i64 + Send + Sync + 'static,
    ) -> Self {
        WeightFunction {
            depth,
            repr: Repr::ExponentFn(Arc::new(f)),
        }
    }

    /// Built-in family with exponent ⌈s·|σ|⌉, rational s ∈ (0, 1].
    pub fn length_scaled(s: Rational, depth: usize) -> Result<Self> {
        if !s.is_positive() || s > Rational::from_integer(1.into()) {
            return Err(Error::Precondition(format!(
                "length-scaled parameter {} outside (0, 1]",
                render(&s)
            )));
        }
        Ok(WeightFunction {
            depth,
            repr: Repr::LengthScaled(s),
        })
    }

    /// w(σ) = 2^(-|σ|).
    pub fn length(depth: usize) -> Self {
        WeightFunction {
            depth,
            repr: Repr::LengthScaled(Rational::from_integer(1.into())),
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn mode(&self) -> WeightMode {
        match self.repr {
            Repr::Exponents(_) | Repr::ExponentFn(_) => WeightMode::IntegerExponent,
            Repr::Table(_) => WeightMode::RationalTable,
            Repr::LengthScaled(_) => WeightMode::BuiltinFamily,
        }
    }

    /// The parameter s of a `length-scaled` family.
    pub fn length_scale(&self) -> Option<&Rational> {
        match &self.repr {
            Repr::LengthScaled(s) => Some(s),
            _ => None,
        }
    }

    /// Whether the exponent view f = -log₂ w is available.
    pub fn has_exponents(&self) -> bool {
        !matches!(self.repr, Repr::Table(_))
    }

    pub fn check_domain(&self, s: &BitString) -> Result<()> {
        if s.len() > self.depth {
            Err(Error::DomainDepthExceeded {
                string: s.clone(),
                len: s.len(),
                depth: self.depth,
            })
        } else {
            Ok(())
        }
    }

    pub fn weight(&self, s: &BitString) -> Result<Rational> {
        self.check_domain(s)?;
        Ok(match &self.repr {
            Repr::Table(t) => t[s.canonical_index()].clone(),
            _ => weight_of_exponent(self.exponent_unchecked(s)),
        })
    }

    /// f(σ) with w(σ) = 2^(-f(σ)); only in integer-exponent modes.
    pub fn exponent(&self, s: &BitString) -> Result<i64> {
        self.check_domain(s)?;
        match self.repr {
            Repr::Table(_) => Err(Error::NotIntegerExponent(s.clone())),
            _ => Ok(self.exponent_unchecked(s)),
        }
    }

    fn exponent_unchecked(&self, s: &BitString) -> i64 {
        match &self.repr {
            Repr::Exponents(e) => e[s.canonical_index()],
            Repr::LengthScaled(scale) => {
                let x = scale * Rational::from_integer(BigInt::from(s.len()));
                let c = -floor(&-x);
                to_i64(&c).expect("exponent fits in i64")
            }
            Repr::ExponentFn(f) => f(s),
            Repr::Table(_) => unreachable!("table weights carry no exponent"),
        }
    }

    /// The same weights with a smaller domain.
    pub fn restrict(&self, depth: usize) -> WeightFunction {
        WeightFunction {
            depth: depth.min(self.depth),
            repr: self.repr.clone(),
        }
    }
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            Repr::Exponents(_) => "exponents".to_string(),
            Repr::Table(_) => "table".to_string(),
            Repr::LengthScaled(s) => format!("length-scaled s={}", render(s)),
            Repr::ExponentFn(_) => "exponent-fn".to_string(),
        };
        write!(f, "WeightFunction({kind}, depth {})", self.depth)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;
    use crate::rational::ratio;

    #[test]
    fn length_scaled_rounds_up() {
        let w = WeightFunction::length_scaled(ratio(1, 2), 8).unwrap();
        assert_eq!(w.exponent(&bs("0")).unwrap(), 1);
        assert_eq!(w.exponent(&bs("01")).unwrap(), 1);
        assert_eq!(w.exponent(&bs("010")).unwrap(), 2);
        assert_eq!(w.weight(&bs("e")).unwrap(), ratio(1, 1));
        assert!(WeightFunction::length_scaled(ratio(3, 2), 4).is_err());
    }

    #[test]
    fn domain_is_enforced() {
        let w = WeightFunction::length(2);
        assert_eq!(w.weight(&bs("01")).unwrap(), ratio(1, 4));
        assert!(matches!(
            w.weight(&bs("010")),
            Err(Error::DomainDepthExceeded { len: 3, .. })
        ));
    }

    #[test]
    fn tables_must_be_total_and_positive() {
        let mut t = BTreeMap::new();
        t.insert(bs("e"), ratio(1, 2));
        t.insert(bs("0"), ratio(1, 2));
        assert!(matches!(
            WeightFunction::from_table(1, &t),
            Err(Error::MissingWeight(_))
        ));
        t.insert(bs("1"), ratio(0, 1));
        assert!(matches!(
            WeightFunction::from_table(1, &t),
            Err(Error::NonPositiveWeight(_))
        ));
        t.insert(bs("1"), ratio(1, 3));
        let w = WeightFunction::from_table(1, &t).unwrap();
        assert_eq!(w.mode(), WeightMode::RationalTable);
        assert!(w.exponent(&bs("1")).is_err());
    }
}
