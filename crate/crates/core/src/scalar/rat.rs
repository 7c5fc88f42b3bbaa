//! Rationals that stay inline while numerator and denominator fit in `i64`.
//!
//! The representation is canonical: a value is `Small` exactly when its
//! reduced form fits, so derived equality and hashing are sound.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub(crate) enum Rat {
    /// Reduced, denominator positive.
    Small(i64, i64),
    Big(Box<BigRational>),
}

impl Rat {
    pub fn int(n: i64) -> Rat {
        Rat::Small(n, 1)
    }

    pub fn from_big(q: BigRational) -> Rat {
        match (q.numer().to_i64(), q.denom().to_i64()) {
            (Some(n), Some(d)) => Rat::Small(n, d),
            _ => Rat::Big(Box::new(q)),
        }
    }

    fn from_i128(n: i128, d: i128) -> Rat {
        debug_assert!(d != 0);
        let g = n.gcd(&d);
        let (mut n, mut d) = (n / g, d / g);
        if d < 0 {
            n = -n;
            d = -d;
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) => Rat::Small(n, d),
            _ => Rat::Big(Box::new(BigRational::new(BigInt::from(n), BigInt::from(d)))),
        }
    }

    pub fn to_big(&self) -> BigRational {
        match self {
            Rat::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Rat::Big(q) => (**q).clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Rat::Small(0, _))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Rat::Small(1, 1))
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Rat::Small(n, _) => *n < 0,
            Rat::Big(q) => q.is_negative(),
        }
    }

    pub fn recip(&self) -> Rat {
        match self {
            Rat::Small(n, d) => Rat::from_i128(*d as i128, *n as i128),
            Rat::Big(q) => Rat::from_big(q.recip()),
        }
    }

    pub fn div(&self, rhs: &Rat) -> Rat {
        self * &rhs.recip()
    }

    pub fn render(&self) -> String {
        match self {
            Rat::Small(n, 1) => n.to_string(),
            Rat::Small(n, d) => format!("{n}/{d}"),
            Rat::Big(q) if q.is_integer() => q.numer().to_string(),
            Rat::Big(q) => format!("{}/{}", q.numer(), q.denom()),
        }
    }
}

impl Add for &Rat {
    type Output = Rat;
    fn add(self, rhs: &Rat) -> Rat {
        match (self, rhs) {
            (Rat::Small(0, _), x) | (x, Rat::Small(0, _)) => x.clone(),
            (Rat::Small(a, b), Rat::Small(c, d)) => {
                if b == d {
                    Rat::from_i128(*a as i128 + *c as i128, *b as i128)
                } else {
                    let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                    Rat::from_i128(a * d + c * b, b * d)
                }
            }
            _ => Rat::from_big(self.to_big() + rhs.to_big()),
        }
    }
}

impl Sub for &Rat {
    type Output = Rat;
    fn sub(self, rhs: &Rat) -> Rat {
        self + &-rhs
    }
}

impl Mul for &Rat {
    type Output = Rat;
    fn mul(self, rhs: &Rat) -> Rat {
        match (self, rhs) {
            (Rat::Small(0, _), _) | (_, Rat::Small(0, _)) => Rat::int(0),
            (Rat::Small(1, 1), x) | (x, Rat::Small(1, 1)) => x.clone(),
            (Rat::Small(a, b), Rat::Small(c, d)) => {
                Rat::from_i128(*a as i128 * *c as i128, *b as i128 * *d as i128)
            }
            _ => Rat::from_big(self.to_big() * rhs.to_big()),
        }
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        match self {
            Rat::Small(n, d) => match n.checked_neg() {
                Some(m) => Rat::Small(m, *d),
                None => Rat::Big(Box::new(-self.to_big())),
            },
            Rat::Big(q) => Rat::from_big(-(**q).clone()),
        }
    }
}

impl Zero for Rat {
    fn zero() -> Rat {
        Rat::int(0)
    }
    fn is_zero(&self) -> bool {
        Rat::is_zero(self)
    }
}

impl Add for Rat {
    type Output = Rat;
    fn add(self, rhs: Rat) -> Rat {
        &self + &rhs
    }
}

impl One for Rat {
    fn one() -> Rat {
        Rat::int(1)
    }
}

impl Mul for Rat {
    type Output = Rat;
    fn mul(self, rhs: Rat) -> Rat {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overflow_promotes_and_demotes() {
        let big = Rat::int(i64::MAX);
        let sq = &big * &big;
        assert!(matches!(sq, Rat::Big(_)));
        let back = sq.div(&big);
        assert_eq!(back, big);
        assert_eq!(&(&big + &Rat::int(1)) - &Rat::int(1), big);
        assert!(matches!(-&Rat::int(i64::MIN), Rat::Big(_)));
    }

    #[test]
    fn reduces() {
        let x = &Rat::Small(1, 6) + &Rat::Small(1, 3);
        assert_eq!(x, Rat::Small(1, 2));
        assert_eq!(&Rat::Small(2, 3) * &Rat::Small(-3, 4), Rat::Small(-1, 2));
        assert_eq!(Rat::Small(-2, 3).recip(), Rat::Small(-3, 2));
    }
}
