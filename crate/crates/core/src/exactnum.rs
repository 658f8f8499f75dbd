//! Exact rationals, polynomials in θ with rational coefficients, mediant
//! fractions and exact real-root isolation.
//!
//! Every generating function in the crate (normalizers, `W(N,k)` tables,
//! their differences) is a [`ThetaPoly`]. Conditional win probabilities are
//! carried as [`WinFraction`] pairs so that mediant addition stays meaningful.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type BigRat = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("cannot parse {0:?} as an exact rational \"p/q\"")]
    ParseRational(String),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("cannot combine a symbolic fraction with a rational one")]
    KindMismatch,
    #[error("fraction is symbolic in θ; evaluate it first")]
    NotRational,
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("polynomial division is not exact")]
    InexactDivision,
    #[error("the zero polynomial has no isolated roots")]
    ZeroPolynomial,
    #[error("tolerance must be positive")]
    NonPositiveTolerance,
    #[error("empty interval: lower bound must be below upper bound")]
    EmptyInterval,
}

/// Integer as a rational.
pub fn rat(n: i64) -> BigRat {
    BigRat::from_integer(BigInt::from(n))
}

/// `n / d` in lowest terms. Panics on `d == 0`.
pub fn ratio(n: i64, d: i64) -> BigRat {
    BigRat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"` or a bare integer `"p"`. Decimal notation is rejected.
pub fn parse_rational(s: &str) -> Result<BigRat, ExactError> {
    let err = || ExactError::ParseRational(s.to_string());
    let t = s.trim();
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n = BigInt::from_str(n).map_err(|_| err())?;
    let d = BigInt::from_str(d).map_err(|_| err())?;
    if d.is_zero() {
        return Err(ExactError::ZeroDenominator);
    }
    Ok(BigRat::new(n, d))
}

/// Always renders `"p/q"`, including `"6/1"` for integers.
pub fn format_rational(r: &BigRat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Best-effort conversion for reporting only.
pub fn rat_to_f64(r: &BigRat) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() && (v != 0.0 || r.is_zero()) {
            return v;
        }
    }
    // Huge numerator/denominator: shift both down to a common scale.
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift_n = (nb - 60).max(0) as usize;
    let shift_d = (db - 60).max(0) as usize;
    let n = (r.numer() >> shift_n).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift_d).to_f64().unwrap_or(1.0);
    n / d * 2f64.powi((shift_n as i64 - shift_d as i64) as i32)
}

/// Serde adapter writing a [`BigRat`] as a `"p/q"` string.
pub mod rational_string {
    use super::*;

    pub fn serialize<S: Serializer>(r: &BigRat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Univariate polynomial in θ; `coeffs[i]` multiplies θ^i.
///
/// Trailing zero coefficients are always trimmed, so the zero polynomial has
/// an empty coefficient vector and `degree() == None`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ThetaPoly {
    coeffs: Vec<BigRat>,
}

impl ThetaPoly {
    pub fn from_coeffs(mut coeffs: Vec<BigRat>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        ThetaPoly { coeffs }
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| rat(c)).collect())
    }

    pub fn zero() -> Self {
        ThetaPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigRat::one())
    }

    pub fn constant(c: BigRat) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// The indeterminate θ.
    pub fn theta() -> Self {
        Self::monomial(BigRat::one(), 1)
    }

    /// `c · θ^deg`.
    pub fn monomial(c: BigRat, deg: usize) -> Self {
        let mut coeffs = vec![BigRat::zero(); deg + 1];
        coeffs[deg] = c;
        Self::from_coeffs(coeffs)
    }

    /// `θ - r`.
    pub fn linear_root(r: &BigRat) -> Self {
        Self::from_coeffs(vec![-r.clone(), BigRat::one()])
    }

    pub fn coeffs(&self) -> &[BigRat] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigRat {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRat::zero)
    }

    /// `None` stands for the degree −∞ of the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Option<&BigRat> {
        self.coeffs.last()
    }

    /// Horner evaluation.
    pub fn eval(&self, theta: &BigRat) -> BigRat {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRat::zero(), |acc, c| acc * theta + c)
    }

    pub fn eval_f64(&self, theta: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * theta + rat_to_f64(c))
    }

    pub fn scale(&self, c: &BigRat) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Multiplies by θ^k.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![BigRat::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        ThetaPoly { coeffs }
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::one(), |acc, _| &acc * self)
    }

    pub fn derivative(&self) -> Self {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * rat(i as i64))
                .collect(),
        )
    }

    /// Euclidean division over the rationals.
    pub fn div_rem(&self, divisor: &ThetaPoly) -> Result<(ThetaPoly, ThetaPoly), ExactError> {
        let dd = divisor.degree().ok_or(ExactError::DivisionByZero)?;
        let lead = divisor.leading().expect("nonzero divisor");
        let mut rem = self.coeffs.clone();
        let Some(nd) = self.degree() else {
            return Ok((Self::zero(), Self::zero()));
        };
        if nd < dd {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![BigRat::zero(); nd - dd + 1];
        for i in (0..=nd - dd).rev() {
            let c = &rem[i + dd] / lead;
            if c.is_zero() {
                continue;
            }
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                rem[i + j] -= &c * dc;
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        Ok((Self::from_coeffs(quot), Self::from_coeffs(rem)))
    }

    /// Quotient of an exact division; a nonzero remainder is an error.
    pub fn exact_div(&self, divisor: &ThetaPoly) -> Result<ThetaPoly, ExactError> {
        let (q, r) = self.div_rem(divisor)?;
        if r.is_zero() {
            Ok(q)
        } else {
            Err(ExactError::InexactDivision)
        }
    }

    /// Scales to leading coefficient 1 (zero stays zero).
    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(l) => self.scale(&l.recip()),
            None => Self::zero(),
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &ThetaPoly) -> ThetaPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("b is nonzero");
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// `p / gcd(p, p')`: same roots, all simple.
    pub fn squarefree(&self) -> ThetaPoly {
        if self.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        self.exact_div(&g).expect("gcd divides p")
    }

    /// Rescales to a primitive polynomial with integer coefficients and the
    /// same sign pattern.
    pub fn primitive_integer(&self) -> Vec<BigInt> {
        let l = self
            .coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| (c * BigRat::from_integer(l.clone())).to_integer())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if g.is_zero() {
            return ints;
        }
        ints.into_iter().map(|c| c / &g).collect()
    }

    /// True when every coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }
}

impl fmt::Debug for ThetaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ThetaPoly({self})")
    }
}

impl fmt::Display for ThetaPoly {
    /// Highest power first, e.g. `θ^4 + 6θ^3 + 11θ^2 + 6θ`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            match (first, neg) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            first = false;
            let show_coeff = i == 0 || !a.is_one();
            if show_coeff {
                if a.is_integer() {
                    write!(f, "{}", a.numer())?;
                } else {
                    write!(f, "({}/{})", a.numer(), a.denom())?;
                }
            }
            match i {
                0 => {}
                1 => write!(f, "θ")?,
                _ => write!(f, "θ^{i}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for ThetaPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let strings: Vec<String> = self.coeffs.iter().map(format_rational).collect();
        strings.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ThetaPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let strings = Vec::<String>::deserialize(d)?;
        let coeffs = strings
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(serde::de::Error::custom)?;
        Ok(ThetaPoly::from_coeffs(coeffs))
    }
}

impl Add<&ThetaPoly> for &ThetaPoly {
    type Output = ThetaPoly;
    fn add(self, rhs: &ThetaPoly) -> ThetaPoly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        ThetaPoly::from_coeffs((0..len).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub<&ThetaPoly> for &ThetaPoly {
    type Output = ThetaPoly;
    fn sub(self, rhs: &ThetaPoly) -> ThetaPoly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        ThetaPoly::from_coeffs((0..len).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul<&ThetaPoly> for &ThetaPoly {
    type Output = ThetaPoly;
    fn mul(self, rhs: &ThetaPoly) -> ThetaPoly {
        if self.is_zero() || rhs.is_zero() {
            return ThetaPoly::zero();
        }
        let mut out = vec![BigRat::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ThetaPoly::from_coeffs(out)
    }
}

impl Neg for &ThetaPoly {
    type Output = ThetaPoly;
    fn neg(self) -> ThetaPoly {
        ThetaPoly::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Neg for ThetaPoly {
    type Output = ThetaPoly;
    fn neg(self) -> ThetaPoly {
        -&self
    }
}

macro_rules! forward_owned_binop {
    ($tr:ident, $m:ident) => {
        impl $tr for ThetaPoly {
            type Output = ThetaPoly;
            fn $m(self, rhs: ThetaPoly) -> ThetaPoly {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&ThetaPoly> for ThetaPoly {
            type Output = ThetaPoly;
            fn $m(self, rhs: &ThetaPoly) -> ThetaPoly {
                (&self).$m(rhs)
            }
        }
        impl $tr<ThetaPoly> for &ThetaPoly {
            type Output = ThetaPoly;
            fn $m(self, rhs: ThetaPoly) -> ThetaPoly {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

impl std::iter::Sum for ThetaPoly {
    fn sum<I: Iterator<Item = ThetaPoly>>(iter: I) -> Self {
        iter.fold(ThetaPoly::zero(), |acc, p| acc + p)
    }
}

impl std::iter::Product for ThetaPoly {
    fn product<I: Iterator<Item = ThetaPoly>>(iter: I) -> Self {
        iter.fold(ThetaPoly::one(), |acc, p| acc * p)
    }
}

/// Rising factorial ⟨N⟩! = θ(θ+1)⋯(θ+N−1); ⟨0⟩! = 1.
pub fn rising_factorial(n: usize) -> ThetaPoly {
    (0..n)
        .map(|j| ThetaPoly::from_coeffs(vec![rat(j as i64), BigRat::one()]))
        .product()
}

/// θ-integer [N]_θ = 1 + θ + ⋯ + θ^{N−1}; [0]_θ = 0.
pub fn theta_integer(n: usize) -> ThetaPoly {
    ThetaPoly::from_coeffs(vec![BigRat::one(); n])
}

/// θ-factorial [N]! = [N]_θ [N−1]_θ ⋯ [1]_θ; [0]! = 1.
pub fn theta_factorial(n: usize) -> ThetaPoly {
    (1..=n).map(theta_integer).product()
}

/// A conditional probability kept as an unreduced (numerator, denominator)
/// pair, either symbolic in θ or evaluated at a fixed rational θ.
///
/// Pairs are combined with the mediant [`WinFraction::oplus`]; reducing a pair
/// before that would change the result, so reduction only happens in
/// [`WinFraction::to_reduced_rational`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WinFraction {
    Symbolic { num: ThetaPoly, den: ThetaPoly },
    Exact { num: BigRat, den: BigRat },
}

impl WinFraction {
    pub fn exact(num: BigRat, den: BigRat) -> Result<Self, ExactError> {
        if den.is_zero() {
            return Err(ExactError::ZeroDenominator);
        }
        Ok(WinFraction::Exact { num, den })
    }

    pub fn symbolic(num: ThetaPoly, den: ThetaPoly) -> Result<Self, ExactError> {
        if den.is_zero() {
            return Err(ExactError::ZeroDenominator);
        }
        Ok(WinFraction::Symbolic { num, den })
    }

    /// Mediant `a/b ⊕ c/d = (a+c)/(b+d)`. The operands must describe disjoint
    /// conditioning sets; that is the caller's responsibility.
    pub fn oplus(&self, other: &WinFraction) -> Result<WinFraction, ExactError> {
        match (self, other) {
            (WinFraction::Exact { num: a, den: b }, WinFraction::Exact { num: c, den: d }) => {
                WinFraction::exact(a + c, b + d)
            }
            (
                WinFraction::Symbolic { num: a, den: b },
                WinFraction::Symbolic { num: c, den: d },
            ) => WinFraction::symbolic(a + c, b + d),
            _ => Err(ExactError::KindMismatch),
        }
    }

    /// ⊕ over a nonempty sequence; `None` for an empty one.
    pub fn oplus_all<'a, I>(iter: I) -> Option<Result<WinFraction, ExactError>>
    where
        I: IntoIterator<Item = &'a WinFraction>,
    {
        let mut it = iter.into_iter();
        let first = it.next()?.clone();
        Some(it.try_fold(first, |acc, f| acc.oplus(f)))
    }

    /// Substitutes a rational θ into a symbolic pair; exact pairs pass through.
    pub fn evaluate(&self, theta: &BigRat) -> Result<WinFraction, ExactError> {
        match self {
            WinFraction::Symbolic { num, den } => {
                WinFraction::exact(num.eval(theta), den.eval(theta))
            }
            exact => Ok(exact.clone()),
        }
    }

    /// num/den in lowest terms. Symbolic pairs must be evaluated first.
    pub fn to_reduced_rational(&self) -> Result<BigRat, ExactError> {
        match self {
            WinFraction::Exact { num, den } => Ok(num / den),
            WinFraction::Symbolic { .. } => Err(ExactError::NotRational),
        }
    }

    pub fn to_f64(&self) -> Result<f64, ExactError> {
        self.to_reduced_rational().map(|r| rat_to_f64(&r))
    }

    /// Compares the values of two exact fractions.
    pub fn value_cmp(&self, other: &WinFraction) -> Result<Ordering, ExactError> {
        Ok(self
            .to_reduced_rational()?
            .cmp(&other.to_reduced_rational()?))
    }
}

impl fmt::Display for WinFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WinFraction::Exact { num, den } => {
                if num.is_integer() && den.is_integer() {
                    write!(f, "{}/{}", num.numer(), den.numer())
                } else {
                    write!(f, "({})/({})", format_rational(num), format_rational(den))
                }
            }
            WinFraction::Symbolic { num, den } => write!(f, "({num})/({den})"),
        }
    }
}

/// Location of one real root found by [`isolate_positive_roots`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RootLocation {
    /// The root itself, verified by exact substitution.
    Exact(BigRat),
    /// `lo < root < hi`, a single simple root of the squarefree part.
    Bracket { lo: BigRat, hi: BigRat },
}

impl RootLocation {
    /// Representative value for reporting.
    pub fn approx(&self) -> f64 {
        match self {
            RootLocation::Exact(r) => rat_to_f64(r),
            RootLocation::Bracket { lo, hi } => rat_to_f64(&((lo + hi) / rat(2))),
        }
    }

    fn lower(&self) -> &BigRat {
        match self {
            RootLocation::Exact(r) => r,
            RootLocation::Bracket { lo, .. } => lo,
        }
    }
}

struct SturmChain(Vec<ThetaPoly>);

impl SturmChain {
    fn new(p: &ThetaPoly) -> Self {
        let mut chain = vec![p.clone(), p.derivative()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            let (_, r) = chain[n - 2].div_rem(&chain[n - 1]).expect("nonzero");
            if r.is_zero() {
                break;
            }
            // Positive rescaling keeps the sign pattern and tames coefficient growth.
            let l = r.leading().expect("nonzero").abs();
            chain.push(-r.scale(&l.recip()));
        }
        SturmChain(chain)
    }

    fn variations(&self, x: &BigRat) -> usize {
        let mut count = 0;
        let mut last: Option<bool> = None;
        for p in &self.0 {
            let v = p.eval(x);
            if v.is_zero() {
                continue;
            }
            let pos = v.is_positive();
            if last.is_some_and(|l| l != pos) {
                count += 1;
            }
            last = Some(pos);
        }
        count
    }

    /// Distinct roots in `(a, b)`, assuming neither endpoint is a root.
    fn count(&self, a: &BigRat, b: &BigRat) -> usize {
        self.variations(a) - self.variations(b)
    }
}

/// Smallest-denominator rational in the closed interval `[x, y]`.
fn simplest_between(x: &BigRat, y: &BigRat) -> BigRat {
    let c = x.ceil();
    if &c <= y {
        return c;
    }
    let fl = x.floor();
    let inner = simplest_between(&(y - &fl).recip(), &(x - &fl).recip());
    fl + inner.recip()
}

/// Isolates every real root of `p` inside `[lo, hi]`.
///
/// Works on the squarefree part with a Sturm chain, so multiple roots are
/// reported once. Each isolated root is bisected to a bracket of width at most
/// `tol`, then narrowed further until at most one rational with a plausible
/// denominator fits; if that rational is a root it is reported exactly.
/// Endpoints that are roots are reported exactly. All arithmetic is exact.
pub fn isolate_positive_roots(
    p: &ThetaPoly,
    lo: &BigRat,
    hi: &BigRat,
    tol: &BigRat,
) -> Result<Vec<RootLocation>, ExactError> {
    if p.is_zero() {
        return Err(ExactError::ZeroPolynomial);
    }
    if !tol.is_positive() {
        return Err(ExactError::NonPositiveTolerance);
    }
    if lo >= hi {
        return Err(ExactError::EmptyInterval);
    }
    let mut q = p.squarefree();
    let mut found = Vec::new();
    for end in [lo, hi] {
        if q.eval(end).is_zero() {
            found.push(RootLocation::Exact(end.clone()));
            q = q.exact_div(&ThetaPoly::linear_root(end))?;
        }
    }
    let mut chain = SturmChain::new(&q);
    let mut pending = vec![(lo.clone(), hi.clone())];
    while let Some((a, b)) = pending.pop() {
        match chain.count(&a, &b) {
            0 => {}
            1 => found.push(refine_single(&q, a, b, tol)),
            _ => {
                let m = (&a + &b) / rat(2);
                if q.eval(&m).is_zero() {
                    found.push(RootLocation::Exact(m.clone()));
                    q = q.exact_div(&ThetaPoly::linear_root(&m))?;
                    chain = SturmChain::new(&q);
                }
                pending.push((a, m.clone()));
                pending.push((m, b));
            }
        }
    }
    found.sort_by(|x, y| x.lower().cmp(y.lower()));
    Ok(found)
}

fn refine_single(q: &ThetaPoly, mut a: BigRat, mut b: BigRat, tol: &BigRat) -> RootLocation {
    let ints = q.primitive_integer();
    let lead = BigRat::from_integer(ints.last().expect("nonzero").abs());
    // Two rationals with denominators dividing `lead` differ by at least 1/lead².
    let separation = (&lead * &lead).recip();
    let sign_a = q.eval(&a).is_positive();
    while &b - &a > *tol || &b - &a >= separation {
        let m = (&a + &b) / rat(2);
        let v = q.eval(&m);
        if v.is_zero() {
            return RootLocation::Exact(m);
        }
        if v.is_positive() == sign_a {
            a = m;
        } else {
            b = m;
        }
    }
    let candidate = simplest_between(&a, &b);
    if q.eval(&candidate).is_zero() {
        RootLocation::Exact(candidate)
    } else {
        RootLocation::Bracket { lo: a, hi: b }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[i64]) -> ThetaPoly {
        ThetaPoly::from_integers(c)
    }

    #[test]
    fn eval_direct_substitution() {
        assert_eq!(poly(&[1, 0, 1]).eval(&rat(2)), rat(5));
        assert_eq!(rising_factorial(4).eval(&rat(1)), rat(24));
    }

    #[test]
    fn rising_factorial_small() {
        assert_eq!(rising_factorial(0), ThetaPoly::one());
        assert_eq!(rising_factorial(4), poly(&[0, 6, 11, 6, 1]));
        assert_eq!(rising_factorial(4).to_string(), "θ^4 + 6θ^3 + 11θ^2 + 6θ");
    }

    #[test]
    fn theta_factorials() {
        assert_eq!(theta_factorial(0), ThetaPoly::one());
        assert_eq!(theta_factorial(1), ThetaPoly::one());
        assert_eq!(theta_factorial(3), poly(&[1, 2, 2, 1]));
        for n in 1..8 {
            let f = theta_factorial(n);
            assert_eq!(f.degree(), Some(n * (n - 1) / 2));
            assert!(f.coeffs().iter().all(|c| c.is_positive()));
        }
        assert!(theta_integer(0).is_zero());
    }

    #[test]
    fn degree_of_zero_is_sentinel() {
        assert_eq!(ThetaPoly::zero().degree(), None);
        assert_eq!(poly(&[0, 0, 0]).degree(), None);
        assert_eq!(poly(&[3, 0, 0]).degree(), Some(0));
    }

    #[test]
    fn division() {
        let a = poly(&[-1, 0, 1]);
        let b = poly(&[-1, 1]);
        assert_eq!(a.exact_div(&b).unwrap(), poly(&[1, 1]));
        assert_eq!(
            poly(&[1, 0, 1]).exact_div(&b),
            Err(ExactError::InexactDivision)
        );
        assert_eq!(
            a.div_rem(&ThetaPoly::zero()),
            Err(ExactError::DivisionByZero)
        );
        let (q, r) = poly(&[5, 3, 2, 1]).div_rem(&poly(&[1, 1])).unwrap();
        assert_eq!(&(&q * &poly(&[1, 1])) + &r, poly(&[5, 3, 2, 1]));
    }

    #[test]
    fn gcd_and_squarefree() {
        // (θ-1)^2 (θ+2)
        let p = &poly(&[-1, 1]).pow(2) * &poly(&[2, 1]);
        assert_eq!(p.gcd(&p.derivative()), poly(&[-1, 1]));
        assert_eq!(p.squarefree(), poly(&[-2, 1, 1]));
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("6/11").unwrap(), ratio(6, 11));
        assert_eq!(parse_rational(" 12/8 ").unwrap(), ratio(3, 2));
        assert_eq!(parse_rational("-3").unwrap(), rat(-3));
        assert!(matches!(
            parse_rational("1.5"),
            Err(ExactError::ParseRational(_))
        ));
        assert_eq!(parse_rational("1/0"), Err(ExactError::ZeroDenominator));
        assert_eq!(format_rational(&rat(6)), "6/1");
    }

    #[test]
    fn polynomial_json_is_lowest_order_first() {
        let p = ThetaPoly::from_coeffs(vec![ratio(1, 2), rat(0), rat(3)]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"["1/2","0/1","3/1"]"#);
        let back: ThetaPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn mediant_examples() {
        let half = WinFraction::exact(rat(1), rat(2)).unwrap();
        let sum = half.oplus(&half).unwrap();
        assert_eq!(sum, WinFraction::exact(rat(2), rat(4)).unwrap());
        assert_eq!(sum.to_reduced_rational().unwrap(), ratio(1, 2));

        let mut parts = vec![
            WinFraction::exact(rat(6), rat(12)).unwrap(),
            WinFraction::exact(rat(3), rat(4)).unwrap(),
            WinFraction::exact(rat(1), rat(1)).unwrap(),
            WinFraction::exact(rat(1), rat(1)).unwrap(),
        ];
        parts.extend((0..6).map(|_| WinFraction::exact(rat(0), rat(1)).unwrap()));
        let total = WinFraction::oplus_all(&parts).unwrap().unwrap();
        assert_eq!(total, WinFraction::exact(rat(11), rat(24)).unwrap());
        assert_eq!(total.to_string(), "11/24");
    }

    #[test]
    fn mediant_kind_mismatch() {
        let a = WinFraction::exact(rat(1), rat(2)).unwrap();
        let b = WinFraction::symbolic(ThetaPoly::theta(), rising_factorial(2)).unwrap();
        assert_eq!(a.oplus(&b), Err(ExactError::KindMismatch));
        assert_eq!(b.to_reduced_rational(), Err(ExactError::NotRational));
        assert_eq!(
            WinFraction::exact(rat(1), rat(0)),
            Err(ExactError::ZeroDenominator)
        );
    }

    #[test]
    fn root_of_linear() {
        let roots =
            isolate_positive_roots(&poly(&[-1, 1]), &rat(0), &rat(2), &ratio(1, 1000)).unwrap();
        assert_eq!(roots, vec![RootLocation::Exact(rat(1))]);
    }

    #[test]
    fn roots_at_endpoints_are_exact() {
        // θ(θ-2)(θ-1)
        let p = &(&ThetaPoly::theta() * &poly(&[-2, 1])) * &poly(&[-1, 1]);
        let roots = isolate_positive_roots(&p, &rat(0), &rat(2), &ratio(1, 8)).unwrap();
        assert_eq!(
            roots,
            vec![
                RootLocation::Exact(rat(0)),
                RootLocation::Exact(rat(1)),
                RootLocation::Exact(rat(2))
            ]
        );
    }

    #[test]
    fn irrational_roots_are_bracketed() {
        // θ² - 2 on (0, 2)
        let tol = ratio(1, 1 << 20);
        let roots = isolate_positive_roots(&poly(&[-2, 0, 1]), &rat(0), &rat(2), &tol).unwrap();
        assert_eq!(roots.len(), 1);
        match &roots[0] {
            RootLocation::Bracket { lo, hi } => {
                assert!(hi - lo <= tol);
                assert!(lo * lo < rat(2) && hi * hi > rat(2));
            }
            other => panic!("expected a bracket, got {other:?}"),
        }
    }

    #[test]
    fn repeated_and_clustered_roots() {
        // (θ - 1/3)^3 (θ - 1/2)(θ - 5/9)
        let p = &(&ThetaPoly::linear_root(&ratio(1, 3)).pow(3)
            * &ThetaPoly::linear_root(&ratio(1, 2)))
            * &ThetaPoly::linear_root(&ratio(5, 9));
        let roots = isolate_positive_roots(&p, &rat(0), &rat(1), &ratio(1, 10)).unwrap();
        assert_eq!(
            roots,
            vec![
                RootLocation::Exact(ratio(1, 3)),
                RootLocation::Exact(ratio(1, 2)),
                RootLocation::Exact(ratio(5, 9))
            ]
        );
    }

    #[test]
    fn root_isolation_errors() {
        let one = rat(1);
        assert_eq!(
            isolate_positive_roots(&ThetaPoly::zero(), &rat(0), &one, &one),
            Err(ExactError::ZeroPolynomial)
        );
        assert_eq!(
            isolate_positive_roots(&ThetaPoly::theta(), &rat(0), &one, &rat(0)),
            Err(ExactError::NonPositiveTolerance)
        );
        assert_eq!(
            isolate_positive_roots(&ThetaPoly::theta(), &one, &one, &one),
            Err(ExactError::EmptyInterval)
        );
    }

    #[test]
    fn simplest_rational() {
        assert_eq!(simplest_between(&ratio(3, 10), &ratio(4, 10)), ratio(1, 3));
        assert_eq!(simplest_between(&ratio(1, 2), &ratio(3, 2)), rat(1));
        assert_eq!(
            simplest_between(&ratio(545, 1000), &ratio(546, 1000)),
            ratio(6, 11)
        );
    }

    #[test]
    fn display_forms() {
        assert_eq!(poly(&[-1, 1]).to_string(), "θ - 1");
        assert_eq!(ThetaPoly::zero().to_string(), "0");
        let p = ThetaPoly::from_coeffs(vec![ratio(-1, 2), rat(0), rat(-3)]);
        assert_eq!(p.to_string(), "-3θ^2 - (1/2)");
    }
}
