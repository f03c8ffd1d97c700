//! Exact and high-precision scalar arithmetic shared by all modules.
//!
//! The deformation parameter q is a fixed rational in (0, 1). Exact
//! computations take place in the quadratic extension Q(sqrt(q)): every
//! q-power with a half-integer exponent, and hence every coefficient produced
//! by the algebra layer, lives there. When sqrt(q) happens to be rational the
//! extension collapses and scalars are plain rationals.
//!
//! The floating layer works at a configurable precision (bits) on top of
//! MPFR/MPC through [`rug`]; ln(q) is computed once per context with guard
//! bits and cached.

use crate::error::{Error, Result};
use rug::ops::{CompleteRound, Pow};
use rug::{Complex, Float, Integer, Rational};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Guard bits used for cached constants and intermediate values.
pub const GUARD_BITS: u32 = 32;

/// Minimum working precision accepted by the floating layer.
pub const MIN_PREC: u32 = 64;

/// Default working precision in bits.
pub const DEFAULT_PREC: u32 = 128;

// ---------------------------------------------------------------------------
// Half-integers
// ---------------------------------------------------------------------------

/// A half-integer x, stored as 2x.
///
/// The parity of `twice` distinguishes integers from strict half-integers.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct HalfInt {
    twice: i64,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };
    pub const HALF: HalfInt = HalfInt { twice: 1 };
    pub const ONE: HalfInt = HalfInt { twice: 2 };

    pub const fn from_twice(twice: i64) -> Self {
        HalfInt { twice }
    }

    pub const fn from_int(n: i64) -> Self {
        HalfInt { twice: 2 * n }
    }

    pub fn twice(self) -> i64 {
        self.twice
    }

    pub fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    /// The value as an integer, if it is one.
    pub fn as_integer(self) -> Option<i64> {
        if self.is_integer() {
            Some(self.twice / 2)
        } else {
            None
        }
    }

    pub fn to_f64(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub fn to_rational(self) -> Rational {
        Rational::from((self.twice, 2))
    }

    pub fn abs(self) -> Self {
        HalfInt {
            twice: self.twice.abs(),
        }
    }

    pub fn is_negative(self) -> bool {
        self.twice < 0
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt {
            twice: self.twice + rhs.twice,
        }
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt {
            twice: self.twice - rhs.twice,
        }
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt { twice: -self.twice }
    }
}

impl Mul<i64> for HalfInt {
    type Output = HalfInt;
    fn mul(self, rhs: i64) -> HalfInt {
        HalfInt {
            twice: self.twice * rhs,
        }
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

// ---------------------------------------------------------------------------
// Deformation parameter
// ---------------------------------------------------------------------------

/// The deformation parameter: an exact rational q in (0, 1), together with
/// its exact square root v when that root is itself rational.
///
/// Exact q-powers with half-integer exponents are formed in Q(sqrt(q)); when
/// v is rational they collapse to plain rationals, which is the regime used
/// by the exact algebra test suites (for example q = 1/4 or q = 9/16).
#[derive(Clone, Debug, PartialEq)]
pub struct DeformationParameter {
    q: Rational,
    v: Option<Rational>,
}

fn rational_sqrt(r: &Rational) -> Option<Rational> {
    let (num, den) = (r.numer(), r.denom());
    if num.is_perfect_square() && den.is_perfect_square() {
        Some(Rational::from((
            Integer::from(num.sqrt_ref()),
            Integer::from(den.sqrt_ref()),
        )))
    } else {
        None
    }
}

impl DeformationParameter {
    /// Build from q, recovering the exact square root when it is rational.
    pub fn from_q(q: Rational) -> Result<Self> {
        if q <= 0 || q >= 1 {
            return Err(Error::InvalidParameter(format!(
                "q must lie strictly between 0 and 1, got {q}"
            )));
        }
        let v = rational_sqrt(&q);
        Ok(DeformationParameter { q, v })
    }

    /// Build from v = sqrt(q); q is set to v^2 exactly.
    pub fn from_v(v: Rational) -> Result<Self> {
        if v <= 0 || v >= 1 {
            return Err(Error::InvalidParameter(format!(
                "v must lie strictly between 0 and 1, got {v}"
            )));
        }
        let q = Rational::from(&v * &v);
        Ok(DeformationParameter { q, v: Some(v) })
    }

    /// Parse q from a `"p/r"` (or plain integer-free decimal-free) string.
    pub fn from_q_str(s: &str) -> Result<Self> {
        let q = Rational::from_str_radix(s.trim(), 10)
            .map_err(|e| Error::Parse(format!("bad rational {s:?}: {e}")))?;
        Self::from_q(q)
    }

    pub fn q(&self) -> &Rational {
        &self.q
    }

    /// The exact square root of q, when rational.
    pub fn v_exact(&self) -> Option<&Rational> {
        self.v.as_ref()
    }

    /// q^e for an integer exponent, exact.
    pub fn q_int_pow(&self, e: i64) -> Rational {
        self.q.clone().pow(e as i32)
    }

    /// q^x for a half-integer x, exact in Q(sqrt(q)).
    ///
    /// For odd `twice` this is q^((twice-1)/2) * sqrt(q).
    pub fn q_pow(&self, x: HalfInt) -> ExactScalar {
        if let Some(n) = x.as_integer() {
            ExactScalar::from_rational(self.q_int_pow(n))
        } else {
            let k = (x.twice() - 1) / 2; // twice = 2k + 1, exact for negatives too
            debug_assert_eq!(2 * k + 1, x.twice());
            ExactScalar::normalized(Rational::new(), self.q_int_pow(k), self)
        }
    }

    /// The q-number [x] = (q^-x - q^x)/(q^-1 - q), exact in Q(sqrt(q)).
    pub fn q_number(&self, x: HalfInt) -> ExactScalar {
        let num = self.q_pow(-x) - self.q_pow(x);
        let den = self.q_int_pow(-1) - self.q_int_pow(1);
        num.mul_rational(&den.recip())
    }
}

// ---------------------------------------------------------------------------
// Exact scalars in Q(sqrt(q))
// ---------------------------------------------------------------------------

/// An exact scalar re + rad * sqrt(q) over the session's rational q.
///
/// Values are kept normalized with respect to one [`DeformationParameter`]:
/// when sqrt(q) is rational the radical part is folded into `re` at
/// construction time, so equality is plain component-wise equality. Scalars
/// built against different parameters must not be mixed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExactScalar {
    re: Rational,
    rad: Rational,
}

impl ExactScalar {
    pub fn zero() -> Self {
        ExactScalar {
            re: Rational::new(),
            rad: Rational::new(),
        }
    }

    pub fn one() -> Self {
        ExactScalar {
            re: Rational::from(1),
            rad: Rational::new(),
        }
    }

    pub fn from_rational(re: Rational) -> Self {
        ExactScalar {
            re,
            rad: Rational::new(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(Rational::from(n))
    }

    /// Build re + rad*sqrt(q), folding the radical part when sqrt(q) is rational.
    pub fn normalized(re: Rational, rad: Rational, dp: &DeformationParameter) -> Self {
        match (dp.v_exact(), rad.cmp0()) {
            (Some(v), ord) if ord != std::cmp::Ordering::Equal => ExactScalar {
                re: re + rad * v,
                rad: Rational::new(),
            },
            _ => ExactScalar { re, rad },
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.cmp0() == std::cmp::Ordering::Equal && self.rad.cmp0() == std::cmp::Ordering::Equal
    }

    /// Rational part (the full value when the radical part vanishes).
    pub fn rational_part(&self) -> &Rational {
        &self.re
    }

    /// The value as a rational, if the radical part vanishes.
    pub fn as_rational(&self) -> Option<&Rational> {
        if self.rad.cmp0() == std::cmp::Ordering::Equal {
            Some(&self.re)
        } else {
            None
        }
    }

    pub fn mul(&self, other: &ExactScalar, dp: &DeformationParameter) -> ExactScalar {
        // (a + b s)(c + d s) = (ac + bd q) + (ad + bc) s  with s^2 = q.
        let ac = Rational::from(&self.re * &other.re);
        let bd = Rational::from(&self.rad * &other.rad);
        let ad = Rational::from(&self.re * &other.rad);
        let bc = Rational::from(&self.rad * &other.re);
        ExactScalar {
            re: ac + bd * dp.q(),
            rad: ad + bc,
        }
    }

    pub fn mul_rational(&self, r: &Rational) -> ExactScalar {
        ExactScalar {
            re: Rational::from(&self.re * r),
            rad: Rational::from(&self.rad * r),
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, dp: &DeformationParameter) -> Option<ExactScalar> {
        if self.is_zero() {
            return None;
        }
        if self.rad.cmp0() == std::cmp::Ordering::Equal {
            return Some(ExactScalar::from_rational(self.re.clone().recip()));
        }
        // (a + b s)^-1 = (a - b s) / (a^2 - b^2 q); the norm cannot vanish
        // since sqrt(q) is irrational here and (a, b) != (0, 0).
        let norm = Rational::from(&self.re * &self.re) - Rational::from(&self.rad * &self.rad) * dp.q();
        debug_assert_ne!(norm.cmp0(), std::cmp::Ordering::Equal);
        let inv_norm = norm.recip();
        Some(ExactScalar {
            re: Rational::from(&self.re * &inv_norm),
            rad: -Rational::from(&self.rad * &inv_norm),
        })
    }

    /// Evaluate to a float at the given precision, using v = sqrt(q) at
    /// matching precision.
    pub fn to_float(&self, prec: u32, v: &Float) -> Float {
        let mut out = Float::with_val(prec, &self.re);
        if self.rad.cmp0() != std::cmp::Ordering::Equal {
            out += Float::with_val(prec, &self.rad) * v;
        }
        out
    }
}

impl Add for ExactScalar {
    type Output = ExactScalar;
    fn add(self, rhs: ExactScalar) -> ExactScalar {
        ExactScalar {
            re: self.re + rhs.re,
            rad: self.rad + rhs.rad,
        }
    }
}

impl AddAssign for ExactScalar {
    fn add_assign(&mut self, rhs: ExactScalar) {
        self.re += rhs.re;
        self.rad += rhs.rad;
    }
}

impl Sub for ExactScalar {
    type Output = ExactScalar;
    fn sub(self, rhs: ExactScalar) -> ExactScalar {
        ExactScalar {
            re: self.re - rhs.re,
            rad: self.rad - rhs.rad,
        }
    }
}

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar {
            re: -self.re,
            rad: -self.rad,
        }
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rad.cmp0() == std::cmp::Ordering::Equal {
            write!(f, "{}", self.re)
        } else if self.re.cmp0() == std::cmp::Ordering::Equal {
            write!(f, "{}*s", self.rad)
        } else {
            write!(f, "({} + {}*s)", self.re, self.rad)
        }
    }
}

// ---------------------------------------------------------------------------
// Floating context
// ---------------------------------------------------------------------------

/// Working-precision context for the floating layer.
///
/// Caches ln(q) and sqrt(q) at `prec + GUARD_BITS`. All values handed out are
/// rounded to `prec`; intermediates carry the guard bits.
#[derive(Clone, Debug)]
pub struct FloatContext {
    dp: DeformationParameter,
    prec: u32,
    v_f: Float,
    ln_q: Float,
}

impl FloatContext {
    pub fn new(dp: DeformationParameter, prec: u32) -> Result<Self> {
        if prec < MIN_PREC {
            return Err(Error::InvalidParameter(format!(
                "precision must be at least {MIN_PREC} bits, got {prec}"
            )));
        }
        let wide = prec + GUARD_BITS;
        let q_f = Float::with_val(wide, dp.q());
        let v_f = q_f.clone().sqrt();
        let ln_q = q_f.ln();
        Ok(FloatContext {
            dp,
            prec,
            v_f,
            ln_q,
        })
    }

    pub fn dp(&self) -> &DeformationParameter {
        &self.dp
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    fn wide(&self) -> u32 {
        self.prec + GUARD_BITS
    }

    pub fn ln_q(&self) -> &Float {
        &self.ln_q
    }

    pub fn float<T>(&self, x: T) -> Float
    where
        Float: rug::Assign<T>,
    {
        Float::with_val(self.prec, x)
    }

    pub fn complex(&self, re: f64, im: f64) -> Complex {
        Complex::with_val(self.prec, (re, im))
    }

    pub fn exact_to_float(&self, s: &ExactScalar) -> Float {
        s.to_float(self.wide(), &self.v_f)
    }

    /// q^x for a half-integer x, as a float.
    pub fn q_pow_half(&self, x: HalfInt) -> Float {
        let t = x.twice();
        if t >= 0 {
            self.v_f.clone().pow(t as u32)
        } else {
            self.v_f.clone().pow(t as i32)
        }
    }

    /// q^e for a float exponent e, via exp(e ln q).
    pub fn q_pow_float(&self, e: &Float) -> Float {
        (e * &self.ln_q).complete(self.wide()).exp()
    }

    pub fn q_pow_f64(&self, e: f64) -> Float {
        self.q_pow_float(&Float::with_val(self.wide(), e))
    }

    /// q^z for complex z: exp(z ln q), principal branch (ln q is real).
    pub fn q_complex_pow(&self, z: &Complex) -> Complex {
        (z * &self.ln_q).complete((self.wide(), self.wide())).exp()
    }

    /// The q-number [x] as a float; exact path through Q(sqrt(q)), rounded once.
    pub fn q_number_f(&self, x: HalfInt) -> Float {
        self.exact_to_float(&self.dp.q_number(x))
    }
}

// ---------------------------------------------------------------------------
// Generalized binomial and gamma
// ---------------------------------------------------------------------------

/// Generalized binomial coefficient C(z + k - 1, k) = prod_{m=1..k} (z+m-1)/m.
///
/// These are the coefficients of the binomial series (1 - x)^(-z).
pub fn gen_binomial(z: &Complex, k: u64) -> Complex {
    let prec = z.prec();
    let mut acc = Complex::with_val(prec, (1, 0));
    for m in 1..=k {
        let factor = (z + Complex::with_val(prec, m - 1)) / Complex::with_val(prec, m);
        acc *= factor;
    }
    acc
}

/// Gamma function for real arguments at the argument's precision.
///
/// Errors on nonpositive integers (poles).
pub fn gamma(x: &Float) -> Result<Float> {
    if x.is_integer() && *x <= 0 {
        return Err(Error::GammaPole { z0: x.to_f64() });
    }
    Ok(x.clone().gamma())
}

// ---------------------------------------------------------------------------
// Compensated summation
// ---------------------------------------------------------------------------

/// Neumaier-compensated accumulator for complex values, so trace sums are
/// reproducible in the deterministic lattice order.
#[derive(Debug)]
pub struct CompensatedSum {
    sum: Complex,
    comp: Complex,
}

impl CompensatedSum {
    pub fn new(prec: u32) -> Self {
        CompensatedSum {
            sum: Complex::with_val(prec, (0, 0)),
            comp: Complex::with_val(prec, (0, 0)),
        }
    }

    pub fn add(&mut self, term: &Complex) {
        fn add_part(sum: &mut Float, comp: &mut Float, term: &Float) {
            let prec = sum.prec();
            let t = (&*sum + term).complete(prec);
            let correction = if sum.clone().abs() >= term.clone().abs() {
                (&*sum - &t).complete(prec) + term
            } else {
                (term - &t).complete(prec) + &*sum
            };
            *comp += correction;
            *sum = t;
        }
        add_part(self.sum.mut_real(), self.comp.mut_real(), term.real());
        add_part(self.sum.mut_imag(), self.comp.mut_imag(), term.imag());
    }

    pub fn value(&self) -> Complex {
        self.sum.clone() + &self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dp(q: (i64, i64)) -> DeformationParameter {
        DeformationParameter::from_q(Rational::from(q)).unwrap()
    }

    #[test]
    fn q_pow_examples() {
        let d = dp((1, 4));
        assert_eq!(d.q_pow(HalfInt::ZERO), ExactScalar::from_int(1));
        assert_eq!(
            d.q_pow(HalfInt::HALF),
            ExactScalar::from_rational(Rational::from((1, 2)))
        );
        assert_eq!(
            d.q_pow(HalfInt::from_int(-1)),
            ExactScalar::from_int(4)
        );
    }

    #[test]
    fn q_pow_is_multiplicative() {
        let d = dp((1, 4));
        for tx in -8..=8i64 {
            for ty in -8..=8i64 {
                let x = HalfInt::from_twice(tx);
                let y = HalfInt::from_twice(ty);
                let lhs = d.q_pow(x + y);
                let rhs = d.q_pow(x).mul(&d.q_pow(y), &d);
                assert_eq!(lhs, rhs, "x = {x}, y = {y}");
            }
        }
    }

    #[test]
    fn q_pow_radical_at_irrational_root() {
        // q = 1/2 has no rational square root; q^(3/2) = q * sqrt(q).
        let d = dp((1, 2));
        assert!(d.v_exact().is_none());
        let s = d.q_pow(HalfInt::from_twice(3));
        assert_eq!(s.as_rational(), None);
        let sq = s.mul(&s, &d);
        assert_eq!(sq.as_rational(), Some(&Rational::from((1, 8))));
    }

    #[test]
    fn q_number_examples() {
        let d = dp((1, 4));
        assert_eq!(d.q_number(HalfInt::ONE), ExactScalar::from_int(1));
        // [2] = (q^-2 - q^2)/(q^-1 - q) at q = 1/4: (16 - 1/16)/(4 - 1/4) = 17/4.
        assert_eq!(
            d.q_number(HalfInt::from_int(2)),
            ExactScalar::from_rational(Rational::from((17, 4)))
        );
        assert_eq!(d.q_number(HalfInt::ZERO), ExactScalar::zero());
        // Odd function.
        for t in -9..=9i64 {
            let x = HalfInt::from_twice(t);
            assert_eq!(d.q_number(-x), -d.q_number(x));
        }
    }

    #[test]
    fn q_number_three_term_recurrence() {
        // (q^-1 + q) [x] = [x+1] + [x-1] for integer x.
        for qv in [(1i64, 4i64), (9, 16), (3, 10)] {
            let d = dp(qv);
            let coeff = d.q_int_pow(-1) + d.q_int_pow(1);
            for x in -6..=6i64 {
                let lhs = d.q_number(HalfInt::from_int(x)).mul_rational(&coeff);
                let rhs = d.q_number(HalfInt::from_int(x + 1)) + d.q_number(HalfInt::from_int(x - 1));
                assert_eq!(lhs, rhs, "q = {qv:?}, x = {x}");
            }
        }
    }

    #[test]
    fn exact_scalar_inverse() {
        let d = dp((1, 2));
        let s = d.q_pow(HalfInt::from_twice(-3)) + ExactScalar::from_int(2);
        let inv = s.inv(&d).unwrap();
        let prod = s.mul(&inv, &d);
        assert_eq!(prod, ExactScalar::one());
        assert!(ExactScalar::zero().inv(&d).is_none());
    }

    #[test]
    fn complex_pow_examples() {
        let d = dp((1, 2));
        let ctx = FloatContext::new(d, 128).unwrap();
        let one = ctx.q_complex_pow(&ctx.complex(0.0, 0.0));
        assert!((one - Complex::with_val(128, (1, 0))).abs().real().to_f64() < 1e-35);

        let half = ctx.q_complex_pow(&ctx.complex(1.0, 0.0));
        assert!((half - Complex::with_val(128, (0.5, 0.0))).abs().real().to_f64() < 1e-30);

        // q^(i pi / ln 2) = exp(-i pi) = -1 at q = 1/2.
        let pi = Float::with_val(160, rug::float::Constant::Pi);
        let ln2 = Float::with_val(160, 2).ln();
        let z = Complex::with_val(160, (Float::with_val(160, 0), pi / ln2));
        let val = ctx.q_complex_pow(&z);
        assert!((val + Complex::with_val(128, (1, 0))).abs().real().to_f64() < 1e-25);
    }

    #[test]
    fn complex_pow_is_multiplicative() {
        let d = dp((3, 10));
        let ctx = FloatContext::new(d, 128).unwrap();
        let z1 = ctx.complex(1.7, -0.4);
        let z2 = ctx.complex(-2.3, 0.9);
        let lhs = ctx.q_complex_pow(&(z1.clone() + &z2));
        let rhs = ctx.q_complex_pow(&z1) * ctx.q_complex_pow(&z2);
        let rel = ((lhs.clone() - &rhs) / lhs).abs().real().to_f64();
        assert!(rel < 2f64.powi(-(128 - 8)), "relative error {rel:.3e}");
    }

    #[test]
    fn gen_binomial_examples() {
        let z3 = Complex::with_val(128, (3, 0));
        let b = gen_binomial(&z3, 2);
        assert!((b - Complex::with_val(128, (6, 0))).abs().real().to_f64() < 1e-30);

        let zx = Complex::with_val(128, (2.71, -3.1));
        assert_eq!(gen_binomial(&zx, 0), Complex::with_val(128, (1, 0)));

        let zh = Complex::with_val(128, (0.5, 0.0));
        let b1 = gen_binomial(&zh, 1);
        assert!((b1 - Complex::with_val(128, (0.5, 0.0))).abs().real().to_f64() < 1e-35);
    }

    #[test]
    fn gen_binomial_recurrence() {
        let z = Complex::with_val(128, (1.37, 0.56));
        for k in 1..30u64 {
            let prev = gen_binomial(&z, k - 1);
            let step = (z.clone() + Complex::with_val(128, k - 1)) / Complex::with_val(128, k);
            let expect = prev * step;
            let got = gen_binomial(&z, k);
            let rel = ((got.clone() - &expect) / got).abs().real().to_f64();
            assert!(rel < 1e-30);
        }
    }

    #[test]
    fn gamma_reference_values() {
        let two = Float::with_val(128, 2);
        assert!((gamma(&two).unwrap() - 1f64).abs().to_f64() < 1e-35);

        let half = Float::with_val(128, 0.5);
        let g = gamma(&half).unwrap();
        let pi = Float::with_val(128, rug::float::Constant::Pi);
        assert!((g.clone() * g - pi).abs().to_f64() < 1e-35);

        assert!(matches!(
            gamma(&Float::with_val(128, -3)),
            Err(Error::GammaPole { .. })
        ));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(DeformationParameter::from_q(Rational::from(1)).is_err());
        assert!(DeformationParameter::from_q(Rational::from(0)).is_err());
        assert!(DeformationParameter::from_q(Rational::from((5, 4))).is_err());
        let d = dp((1, 2));
        assert!(FloatContext::new(d, 32).is_err());
    }
}
