//! Integer Laurent polynomials in one variable.
//!
//! Used for the Alexander and Jones polynomials (variable `t`) and for the
//! Kauffman bracket (variable `A`). The text form is `lowest_degree, [c0, c1, ...]`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Laurent {
    low: i32,
    coeffs: Vec<i64>,
}

impl Laurent {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(1, 0)
    }

    pub fn monomial(c: i64, exp: i32) -> Self {
        Self::new(exp, vec![c])
    }

    /// Builds `sum coeffs[i] * x^(low + i)`, trimming zero ends.
    pub fn new(low: i32, coeffs: Vec<i64>) -> Self {
        let mut p = Self { low, coeffs };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|&&c| c == 0).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.low += lead as i32;
        }
        if self.coeffs.is_empty() {
            self.low = 0;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest exponent with a nonzero coefficient (0 for the zero polynomial).
    pub fn low_degree(&self) -> i32 {
        self.low
    }

    pub fn high_degree(&self) -> i32 {
        self.low + self.coeffs.len() as i32 - 1
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn coeff(&self, exp: i32) -> i64 {
        let i = exp - self.low;
        if i < 0 {
            return 0;
        }
        self.coeffs.get(i as usize).copied().unwrap_or(0)
    }

    pub fn shift(&self, k: i32) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Self { low: self.low + k, coeffs: self.coeffs.clone() }
    }

    pub fn scale(&self, c: i64) -> Self {
        Self::new(self.low, self.coeffs.iter().map(|x| x * c).collect())
    }

    /// `x -> x^-1`.
    pub fn invert_variable(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut c = self.coeffs.clone();
        c.reverse();
        Self::new(-self.high_degree(), c)
    }

    /// `x -> x^k`; `k` may be negative.
    pub fn substitute_power(&self, k: i32) -> Self {
        assert!(k != 0);
        let mut out = Self::zero();
        for (i, &c) in self.coeffs.iter().enumerate() {
            out = &out + &Self::monomial(c, (self.low + i as i32) * k);
        }
        out
    }

    /// Divides every exponent by `k`; `None` if some exponent is not a multiple.
    pub fn compress_exponents(&self, k: i32) -> Option<Self> {
        let mut out = Self::zero();
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let e = self.low + i as i32;
            if e % k != 0 {
                return None;
            }
            out = &out + &Self::monomial(c, e / k);
        }
        Some(out)
    }

    /// Evaluates at `x = ±1` or any nonzero integer where the result is integral.
    pub fn eval_unit(&self, x: i64) -> i64 {
        assert!(x == 1 || x == -1);
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| if (self.low + i as i32).rem_euclid(2) == 1 && x == -1 { -c } else { c })
            .sum()
    }

    /// Exact division; `None` when `other` does not divide `self`.
    pub fn div_exact(&self, other: &Self) -> Option<Self> {
        assert!(!other.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(Self::zero());
        }
        let d_lead = *other.coeffs.last().unwrap();
        let d_len = other.coeffs.len();
        let mut rem = self.coeffs.clone();
        if rem.len() < d_len {
            return None;
        }
        let q_len = rem.len() - d_len + 1;
        let mut q = vec![0i64; q_len];
        for i in (0..q_len).rev() {
            let r = rem[i + d_len - 1];
            if r % d_lead != 0 {
                return None;
            }
            let f = r / d_lead;
            q[i] = f;
            for (j, &dc) in other.coeffs.iter().enumerate() {
                rem[i + j] -= f * dc;
            }
        }
        if rem.iter().any(|&c| c != 0) {
            return None;
        }
        Some(Self::new(self.low - other.low, q))
    }

    pub fn is_palindromic(&self) -> bool {
        let n = self.coeffs.len();
        (0..n / 2).all(|i| self.coeffs[i] == self.coeffs[n - 1 - i])
    }

    /// Renders with the given variable name, e.g. `-t^-4 + t^-3 + t^-1`.
    pub fn display_with(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let e = self.low + i as i32;
            let mag = c.unsigned_abs();
            if s.is_empty() {
                if c < 0 {
                    s.push('-');
                }
            } else {
                s.push_str(if c < 0 { " - " } else { " + " });
            }
            let mono = match e {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{e}"),
            };
            if mag != 1 || e == 0 {
                s.push_str(&mag.to_string());
            }
            s.push_str(&mono);
        }
        s
    }

    pub fn to_text(&self) -> String {
        let body: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        format!("{}, [{}]", self.low, body.join(", "))
    }
}

impl fmt::Debug for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Laurent({})", self.display_with("x"))
    }
}

impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with("t"))
    }
}

#[derive(Debug, thiserror::Error)]
#[error("malformed polynomial text: {0:?}")]
pub struct PolyParseError(String);

impl FromStr for Laurent {
    type Err = PolyParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || PolyParseError(s.to_string());
        let (low, rest) = s.split_once(',').ok_or_else(err)?;
        let low: i32 = low.trim().parse().map_err(|_| err())?;
        let rest = rest.trim();
        let inner = rest.strip_prefix('[').and_then(|r| r.strip_suffix(']')).ok_or_else(err)?;
        let coeffs = if inner.trim().is_empty() {
            Vec::new()
        } else {
            inner
                .split(',')
                .map(|c| c.trim().parse::<i64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| err())?
        };
        Ok(Laurent::new(low, coeffs))
    }
}

impl Serialize for Laurent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_text())
    }
}

impl<'de> Deserialize<'de> for Laurent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl Add for &Laurent {
    type Output = Laurent;

    fn add(self, o: &Laurent) -> Laurent {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let low = self.low.min(o.low);
        let high = self.high_degree().max(o.high_degree());
        let coeffs = (low..=high).map(|e| self.coeff(e) + o.coeff(e)).collect();
        Laurent::new(low, coeffs)
    }
}

impl Sub for &Laurent {
    type Output = Laurent;

    fn sub(self, o: &Laurent) -> Laurent {
        self + &(-o)
    }
}

impl Neg for &Laurent {
    type Output = Laurent;

    fn neg(self) -> Laurent {
        self.scale(-1)
    }
}

impl Mul for &Laurent {
    type Output = Laurent;

    fn mul(self, o: &Laurent) -> Laurent {
        if self.is_zero() || o.is_zero() {
            return Laurent::zero();
        }
        let mut c = vec![0i64; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Laurent::new(self.low + o.low, c)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Laurent {
            type Output = Laurent;
            fn $m(self, o: Laurent) -> Laurent {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trims_and_displays() {
        let p = Laurent::new(-5, vec![0, -1, 1, 0, 1, 0]);
        assert_eq!(p.low_degree(), -4);
        assert_eq!(p.coeffs(), &[-1, 1, 0, 1]);
        assert_eq!(p.display_with("t"), "t^-1 + t^-3 - t^-4");
        assert_eq!(p.to_text(), "-4, [-1, 1, 0, 1]");
        assert_eq!(p.to_text().parse::<Laurent>().unwrap(), p);
    }

    #[test]
    fn exact_division() {
        let a = Laurent::new(-1, vec![1, 1]);
        let b = Laurent::new(0, vec![2, -3, 1]);
        let prod = &a * &b;
        assert_eq!(prod.div_exact(&a).unwrap(), b);
        assert_eq!(prod.div_exact(&b).unwrap(), a);
        assert!(Laurent::new(0, vec![1, 0, 1]).div_exact(&Laurent::new(0, vec![1, 1])).is_none());
    }

    #[test]
    fn eval_and_invert() {
        let p = Laurent::new(-1, vec![1, -1, 1]);
        assert_eq!(p.eval_unit(1), 1);
        assert_eq!(p.eval_unit(-1), -3);
        assert_eq!(p.invert_variable(), p);
        let q = Laurent::new(1, vec![1, 2]);
        assert_eq!(q.invert_variable(), Laurent::new(-2, vec![2, 1]));
        assert_eq!(q.substitute_power(-4), Laurent::new(-8, vec![2, 0, 0, 0, 1]));
        assert_eq!(q.substitute_power(-4).compress_exponents(-4).unwrap(), q);
    }
}
