//! Exact Laurent polynomials in the bracket variable `A`.
//!
//! Coefficients are arbitrary-precision integers. Every value is kept in
//! canonical form: no zero coefficient is ever stored, so structural equality
//! is polynomial equality.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LaurentError {
    #[error("polynomial {0} is not divisible by d = -A^2 - A^-2")]
    NonDivisible(String),
}

/// Sparse Laurent polynomial in `A` with big-integer coefficients.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    terms: BTreeMap<i64, BigInt>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, 1)
    }

    pub fn monomial(exp: i64, coef: impl Into<BigInt>) -> Self {
        let coef = coef.into();
        let mut terms = BTreeMap::new();
        if !coef.is_zero() {
            terms.insert(exp, coef);
        }
        Self { terms }
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs; repeated
    /// exponents are summed.
    pub fn from_terms<I, C>(terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, C)>,
        C: Into<BigInt>,
    {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c.into());
        }
        p
    }

    /// The loop value `d = -A^2 - A^-2`.
    pub fn d() -> Self {
        Self::from_terms([(2, -1), (-2, -1)])
    }

    /// `(-A^3)^k` for any integer `k`.
    pub fn writhe_factor(k: i64) -> Self {
        let sign = if k.rem_euclid(2) == 0 { 1 } else { -1 };
        Self::monomial(3 * k, sign)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exp: i64) -> BigInt {
        self.terms.get(&exp).cloned().unwrap_or_default()
    }

    /// Terms in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigInt)> + '_ {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    pub fn add_term(&mut self, exp: i64, coef: BigInt) {
        if coef.is_zero() {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coef);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coef;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Multiplies by `A^k`.
    pub fn shift(&self, k: i64) -> Self {
        Self {
            terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect(),
        }
    }

    pub fn scale(&self, s: &BigInt) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(e, c)| (*e, c * s)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// The substitution `A -> A^-1`.
    pub fn invert_variable(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(e, c)| (-e, c.clone())).collect(),
        }
    }

    /// Exact quotient by `d`. Fails when `d` does not divide `self`.
    pub fn div_exact_d(&self) -> Result<Self, LaurentError> {
        // q * (-A^2 - A^-2) = p. Peel the top term: c A^e in p forces
        // -c A^(e-2) in q, which removes c A^e + c A^(e-4) from p.
        let mut rem = self.terms.clone();
        let mut q = Self::zero();
        let Some(low) = self.min_exp() else {
            return Ok(q);
        };
        while let Some((&e, _)) = rem.iter().next_back() {
            if e < low + 4 {
                return Err(LaurentError::NonDivisible(self.to_string()));
            }
            let c = rem.remove(&e).expect("top term present");
            let lower = e - 4;
            let entry = rem.entry(lower).or_default();
            *entry -= &c;
            if entry.is_zero() {
                rem.remove(&lower);
            }
            q.add_term(e - 2, -c);
        }
        Ok(q)
    }

    /// Substitutes `A = t^(-1/4)`.
    pub fn to_t(&self) -> TPoly {
        TPoly {
            quarters: self.terms.iter().map(|(e, c)| (-e, c.clone())).collect(),
        }
    }

    /// Evaluates at a rational point.
    pub fn eval(&self, a: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let pow = if *e >= 0 {
                num_traits::pow(a.clone(), *e as usize)
            } else {
                num_traits::pow(a.recip(), (-*e) as usize)
            };
            acc += pow * BigRational::from_integer(c.clone());
        }
        acc
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            variable: "A".into(),
            terms: self.terms.iter().map(|(e, c)| (*e, 1, c.to_string())).collect(),
        }
    }
}

/// `d^k`, memoised process-wide.
pub fn pow_d(k: u32) -> LaurentPoly {
    static CACHE: OnceLock<RwLock<Vec<LaurentPoly>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(vec![LaurentPoly::one()]));
    let k = k as usize;
    {
        let powers = cache.read().expect("d-power cache poisoned");
        if let Some(p) = powers.get(k) {
            return p.clone();
        }
    }
    let mut powers = cache.write().expect("d-power cache poisoned");
    let d = LaurentPoly::d();
    while powers.len() <= k {
        let next = powers.last().expect("nonempty") * &d;
        powers.push(next);
    }
    powers[k].clone()
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.terms.iter().map(|(e, c)| (c, Exp::Int(*e))), "A")
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly({self})")
    }
}

enum Exp {
    Int(i64),
    Quarter(i64),
}

fn write_terms<'a>(
    f: &mut fmt::Formatter<'_>,
    terms: impl Iterator<Item = (&'a BigInt, Exp)>,
    var: &str,
) -> fmt::Result {
    let mut first = true;
    for (c, e) in terms {
        let (num, den) = match e {
            Exp::Int(e) => (e, 1),
            Exp::Quarter(q) => reduce(q, 4),
        };
        let neg = c.is_negative();
        let mag = c.abs();
        if first {
            if neg {
                f.write_str("-")?;
            }
        } else {
            f.write_str(if neg { " - " } else { " + " })?;
        }
        first = false;
        let unit = mag.is_one();
        if num == 0 {
            write!(f, "{mag}")?;
            continue;
        }
        if !unit {
            write!(f, "{mag}*")?;
        }
        match (num, den) {
            (1, 1) => write!(f, "{var}")?,
            (n, 1) => write!(f, "{var}^{n}")?,
            (n, d) => write!(f, "{var}^({n}/{d})")?,
        }
    }
    if first {
        f.write_str("0")?;
    }
    Ok(())
}

fn reduce(num: i64, den: i64) -> (i64, i64) {
    let g = num.gcd(&den);
    (num / g, den / g)
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<LaurentPoly> for LaurentPoly {
            type Output = LaurentPoly;
            fn $method(self, rhs: LaurentPoly) -> LaurentPoly {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&LaurentPoly> for LaurentPoly {
            type Output = LaurentPoly;
            fn $method(self, rhs: &LaurentPoly) -> LaurentPoly {
                (&self).$method(rhs)
            }
        }
    };
}

impl Add<&LaurentPoly> for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&LaurentPoly> for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c);
        }
        out
    }
}

impl Mul<&LaurentPoly> for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term(ea + eb, ca * cb);
            }
        }
        out
    }
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl AddAssign<&LaurentPoly> for LaurentPoly {
    fn add_assign(&mut self, rhs: &LaurentPoly) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, c.clone());
        }
    }
}

impl AddAssign<LaurentPoly> for LaurentPoly {
    fn add_assign(&mut self, rhs: LaurentPoly) {
        for (e, c) in rhs.terms {
            self.add_term(e, c);
        }
    }
}

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            terms: self.terms.into_iter().map(|(e, c)| (e, -c)).collect(),
        }
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -self.clone()
    }
}

impl std::iter::Sum for LaurentPoly {
    fn sum<I: Iterator<Item = LaurentPoly>>(iter: I) -> Self {
        let mut acc = LaurentPoly::zero();
        for p in iter {
            acc += p;
        }
        acc
    }
}

/// Polynomial in `t` with exponents in `Z/4`, as produced by `A = t^(-1/4)`.
/// Exponents are stored as numerators over 4.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct TPoly {
    quarters: BTreeMap<i64, BigInt>,
}

impl TPoly {
    /// Builds from `(exponent, coefficient)` pairs with integral exponents.
    pub fn from_integral<I, C>(terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, C)>,
        C: Into<BigInt>,
    {
        let mut a = LaurentPoly::zero();
        for (e, c) in terms {
            a.add_term(-4 * e, c.into());
        }
        a.to_t()
    }

    /// Terms as `(exponent numerator, exponent denominator, coefficient)`,
    /// exponent in lowest terms, ascending.
    pub fn terms(&self) -> impl Iterator<Item = (i64, i64, &BigInt)> + '_ {
        self.quarters.iter().map(|(q, c)| {
            let (n, d) = reduce(*q, 4);
            (n, d, c)
        })
    }

    pub fn is_integral(&self) -> bool {
        self.quarters.keys().all(|q| q % 4 == 0)
    }

    pub fn to_a(&self) -> LaurentPoly {
        LaurentPoly {
            terms: self.quarters.iter().map(|(q, c)| (-q, c.clone())).collect(),
        }
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            variable: "t".into(),
            terms: self.terms().map(|(n, d, c)| (n, d, c.to_string())).collect(),
        }
    }
}

impl fmt::Display for TPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.quarters.iter().map(|(q, c)| (c, Exp::Quarter(*q))), "t")
    }
}

impl fmt::Debug for TPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TPoly({self})")
    }
}

/// Laurent polynomial in `A` with exact rational coefficients; the result of
/// averaging integer polynomials.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RationalPoly {
    terms: BTreeMap<i64, BigRational>,
}

impl RationalPoly {
    /// `sum / n`, exact.
    pub fn average(sum: &LaurentPoly, n: u64) -> Self {
        let den = BigInt::from(n);
        Self {
            terms: sum
                .terms()
                .map(|(e, c)| (e, BigRational::new(c.clone(), den.clone())))
                .collect(),
        }
    }

    pub fn coeff(&self, exp: i64) -> BigRational {
        self.terms.get(&exp).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigRational)> + '_ {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn to_json(&self, var: Variable) -> PolyJson {
        let terms = match var {
            Variable::A => self.terms.iter().map(|(e, c)| (*e, 1, c.to_string())).collect(),
            Variable::T => self
                .terms
                .iter()
                .rev()
                .map(|(e, c)| {
                    let (n, d) = reduce(-e, 4);
                    (n, d, c.to_string())
                })
                .collect(),
        };
        PolyJson {
            variable: var.name().into(),
            terms,
        }
    }
}

/// Output variable selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Variable {
    #[default]
    A,
    T,
}

impl Variable {
    pub fn name(self) -> &'static str {
        match self {
            Variable::A => "A",
            Variable::T => "t",
        }
    }
}

impl std::str::FromStr for Variable {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "A" | "a" => Ok(Variable::A),
            "t" | "T" => Ok(Variable::T),
            other => Err(format!("unknown variable {other:?}, expected A or t")),
        }
    }
}

/// JSON form: `{"variable": "A"|"t", "terms": [[num, den, "coef"], ...]}`,
/// sorted by exponent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyJson {
    pub variable: String,
    pub terms: Vec<(i64, i64, String)>,
}

impl LaurentPoly {
    pub fn to_json_in(&self, var: Variable) -> PolyJson {
        match var {
            Variable::A => self.to_json(),
            Variable::T => self.to_t().to_json(),
        }
    }
}

impl PolyJson {
    /// Reads back an integer-coefficient polynomial in either variable.
    pub fn to_laurent(&self) -> Option<LaurentPoly> {
        let mut p = LaurentPoly::zero();
        for (num, den, c) in &self.terms {
            let c: BigInt = c.parse().ok()?;
            let e = match self.variable.as_str() {
                "A" if *den == 1 => *num,
                "t" if 4 % den == 0 => -num * (4 / den),
                _ => return None,
            };
            p.add_term(e, c);
        }
        Some(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(terms: &[(i64, i64)]) -> LaurentPoly {
        LaurentPoly::from_terms(terms.iter().copied())
    }

    #[test]
    fn additive_inverse_cancels() {
        let sum = p(&[(2, 1)]) + p(&[(2, -1)]);
        assert!(sum.is_zero());
        assert_eq!(sum.len(), 0);
    }

    #[test]
    fn doubling_d() {
        let d = LaurentPoly::d();
        assert_eq!(&d + &d, p(&[(2, -2), (-2, -2)]));
    }

    #[test]
    fn d_squared() {
        let d = LaurentPoly::d();
        assert_eq!(&d * &d, p(&[(4, 1), (0, 2), (-4, 1)]));
    }

    #[test]
    fn odd_power_of_minus_a_cubed() {
        let m = p(&[(3, -1)]);
        let inv = p(&[(-3, -1)]);
        assert_eq!(inv.pow(3), p(&[(-9, -1)]));
        assert_eq!(&m * &inv, LaurentPoly::one());
        assert_eq!(LaurentPoly::writhe_factor(-3), p(&[(-9, -1)]));
        assert_eq!(LaurentPoly::writhe_factor(2), p(&[(6, 1)]));
    }

    #[test]
    fn pow_d_values() {
        assert_eq!(pow_d(0), LaurentPoly::one());
        assert_eq!(pow_d(1), p(&[(2, -1), (-2, -1)]));
        assert_eq!(pow_d(3), p(&[(6, -1), (2, -3), (-2, -3), (-6, -1)]));
    }

    #[test]
    fn division_by_d() {
        let d = LaurentPoly::d();
        assert_eq!((&d * &d).div_exact_d().unwrap(), d);
        assert_eq!(LaurentPoly::zero().div_exact_d().unwrap(), LaurentPoly::zero());
        let a3 = p(&[(3, 1)]);
        let am1 = p(&[(-1, 1)]);
        let num = &(&a3 * &d) + &(&am1 * &pow_d(3));
        let q = num.div_exact_d().unwrap();
        assert_eq!(q, &a3 + &(&am1 * &pow_d(2)));
        assert_eq!(&q * &d, num);
    }

    #[test]
    fn division_rejects_non_multiples() {
        assert!(LaurentPoly::one().div_exact_d().is_err());
        assert!(p(&[(4, 1), (0, 2)]).div_exact_d().is_err());
        assert_eq!(p(&[(4, 1), (0, 1)]).div_exact_d().unwrap(), p(&[(2, -1)]));
    }

    #[test]
    fn t_substitution() {
        assert_eq!(p(&[(-4, 1)]).to_t(), TPoly::from_integral([(1, 1)]));
        assert_eq!(LaurentPoly::one().to_t(), TPoly::from_integral([(0, 1)]));
        let q = p(&[(-4, -1), (-12, -1), (-16, 1)]).to_t();
        assert!(q.is_integral());
        assert_eq!(q, TPoly::from_integral([(1, -1), (3, -1), (4, 1)]));
        assert!(!p(&[(2, 1)]).to_t().is_integral());
        assert_eq!(p(&[(2, 1), (-1, 3)]).to_t().to_a(), p(&[(2, 1), (-1, 3)]));
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(p(&[(-16, -1), (-12, 1), (-4, 1)]).to_string(), "-A^-16 + A^-12 + A^-4");
        assert_eq!(LaurentPoly::zero().to_string(), "0");
        assert_eq!(p(&[(0, 2), (1, -3)]).to_string(), "2 - 3*A");
        assert_eq!(p(&[(2, 1)]).to_t().to_string(), "t^(-1/2)");
    }

    #[test]
    fn json_roundtrip() {
        let q = p(&[(-16, -1), (-12, 1), (-4, 1)]);
        let j = q.to_json_in(Variable::T);
        assert_eq!(j.variable, "t");
        assert_eq!(j.terms[0], (1, 1, "1".to_string()));
        assert_eq!(j.to_laurent().unwrap(), q);
        assert_eq!(q.to_json().to_laurent().unwrap(), q);
    }

    #[test]
    fn rational_average() {
        let s = p(&[(0, 3), (4, 1)]);
        let r = RationalPoly::average(&s, 2);
        assert_eq!(r.coeff(0), BigRational::new(3.into(), 2.into()));
        let j = r.to_json(Variable::T);
        assert_eq!(j.terms[0], (-1, 1, "1/2".to_string()));
    }
}
