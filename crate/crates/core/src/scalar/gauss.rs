//! Gaussian rationals: `a + b*i` with `a, b` rational.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::rat::Rat;

/// An element of the field of Gaussian rationals.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct GaussRat {
    re: Rat,
    im: Rat,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat {
            re: Rat::from_big(re),
            im: Rat::from_big(im),
        }
    }

    pub fn from_int(n: i64) -> Self {
        GaussRat {
            re: Rat::int(n),
            im: Rat::int(0),
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator in GaussRat::from_ratio");
        GaussRat::from_rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_rational(re: BigRational) -> Self {
        GaussRat {
            re: Rat::from_big(re),
            im: Rat::int(0),
        }
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        GaussRat {
            re: Rat::int(0),
            im: Rat::int(1),
        }
    }

    pub fn re(&self) -> BigRational {
        self.re.to_big()
    }

    pub fn im(&self) -> BigRational {
        self.im.to_big()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRat {
            re: self.re.clone(),
            im: -&self.im,
        }
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if self.im.is_zero() {
            return Some(GaussRat {
                re: self.re.recip(),
                im: Rat::int(0),
            });
        }
        let norm = &(&self.re * &self.re) + &(&self.im * &self.im);
        Some(GaussRat {
            re: self.re.div(&norm),
            im: -&self.im.div(&norm),
        })
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = GaussRat::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }
}

impl Zero for GaussRat {
    fn zero() -> Self {
        GaussRat::from_int(0)
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussRat {
    fn one() -> Self {
        GaussRat::from_int(1)
    }

    fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }
}

impl<'a> Add<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn add(self, rhs: &GaussRat) -> GaussRat {
        GaussRat {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Add for GaussRat {
    type Output = GaussRat;
    fn add(self, rhs: GaussRat) -> GaussRat {
        &self + &rhs
    }
}

impl AddAssign<&GaussRat> for GaussRat {
    fn add_assign(&mut self, rhs: &GaussRat) {
        self.re = &self.re + &rhs.re;
        if !rhs.im.is_zero() {
            self.im = &self.im + &rhs.im;
        }
    }
}

impl<'a> Sub<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn sub(self, rhs: &GaussRat) -> GaussRat {
        GaussRat {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Sub for GaussRat {
    type Output = GaussRat;
    fn sub(self, rhs: GaussRat) -> GaussRat {
        &self - &rhs
    }
}

impl<'a> Mul<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn mul(self, rhs: &GaussRat) -> GaussRat {
        if self.im.is_zero() && rhs.im.is_zero() {
            return GaussRat {
                re: &self.re * &rhs.re,
                im: Rat::int(0),
            };
        }
        GaussRat {
            re: &(&self.re * &rhs.re) - &(&self.im * &rhs.im),
            im: &(&self.re * &rhs.im) + &(&self.im * &rhs.re),
        }
    }
}

impl Mul for GaussRat {
    type Output = GaussRat;
    fn mul(self, rhs: GaussRat) -> GaussRat {
        &self * &rhs
    }
}

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        -&self
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat {
            re: -&self.re,
            im: -&self.im,
        }
    }
}

impl GaussRat {
    /// Rendering used inside products: `3`, `-1/2`, `i`, `-2*i`, `(1 + 2*i)`.
    pub(crate) fn render(&self) -> String {
        if self.im.is_zero() {
            return self.re.render();
        }
        let im_part = |q: &Rat| -> String {
            if q.is_one() {
                "i".to_string()
            } else if (-q).is_one() {
                "-i".to_string()
            } else {
                format!("{}*i", q.render())
            }
        };
        if self.re.is_zero() {
            return im_part(&self.im);
        }
        if self.im.is_negative() {
            format!("({} - {})", self.re.render(), im_part(&-&self.im))
        } else {
            format!("({} + {})", self.re.render(), im_part(&self.im))
        }
    }

    /// True when the rendered form starts with a minus sign that can be pulled out.
    pub(crate) fn is_negative_like(&self) -> bool {
        if self.re.is_zero() {
            self.im.is_negative()
        } else {
            self.im.is_zero() && self.re.is_negative()
        }
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.render();
        // top level never needs the surrounding parentheses
        if s.starts_with('(') && s.ends_with(')') {
            f.write_str(&s[1..s.len() - 1])
        } else {
            f.write_str(&s)
        }
    }
}
