//! The non-commutative integral and its comparison with the Haar state.
//!
//! The integral of an algebra element is the residue, at the spectral
//! dimension, of the weighted zeta function with that element inserted.
//! Through the lattice representation only the monomials b^n c^n touch the
//! diagonal, so the integral is computed entirely from the closed-form
//! residue calculus with exponent-shift insertions; the brute-force
//! truncated sums remain available as an independent oracle. Normalizing by
//! the value at 1 recovers the Haar state, independently of the weight
//! exponent a, and the modular group of the weight matches the Haar modular
//! automorphism exactly when b = 1.

use crate::error::{Error, Result};
use crate::numerics::{DeformationParameter, FloatContext};
use crate::qalgebra::{
    sigma_l_exponent, sigma_r_exponent, AlgebraContext, AlgebraElement, Monomial,
};
use crate::spectral::is_lattice_diagonal;
use crate::zeta::{residue, ResidueMode, ZetaParams};
use rug::{Complex, Float};
use std::cell::RefCell;
use std::collections::BTreeMap;

/// Weight exponents (a, b) of the diagonal weight family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightSpec {
    pub a: f64,
    pub b: f64,
}

impl WeightSpec {
    pub fn new(a: f64, b: f64) -> Self {
        WeightSpec { a, b }
    }

    /// The Haar-comparison regime b = 1.
    pub fn haar(a: f64) -> Self {
        WeightSpec { a, b: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.a + self.b <= 0.0 || self.a - self.b <= 0.0 {
            return Err(Error::DivergentParameters {
                a: self.a,
                b: self.b,
            });
        }
        Ok(())
    }

    /// Spectral dimension a + |b|.
    pub fn dimension(&self) -> f64 {
        self.a + self.b.abs()
    }
}

/// Modular automorphism descriptor: exponents of the left and right modular
/// automorphisms whose composition it is.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModularDescriptor {
    pub left_exp: f64,
    pub right_exp: f64,
}

impl ModularDescriptor {
    pub fn compose(self, other: ModularDescriptor) -> ModularDescriptor {
        ModularDescriptor {
            left_exp: self.left_exp + other.left_exp,
            right_exp: self.right_exp + other.right_exp,
        }
    }

    /// The descriptor of the Haar modular automorphism.
    pub fn haar_modular() -> ModularDescriptor {
        ModularDescriptor {
            left_exp: 1.0,
            right_exp: 1.0,
        }
    }
}

/// Modular group of the non-commutative integral for a weight: the
/// composition of the weight's modular automorphism with the n-th power of
/// the commutator twist. The a-dependence cancels, leaving (|b|, b).
pub fn modular_descriptor(w: &WeightSpec) -> Result<ModularDescriptor> {
    w.validate()?;
    Ok(ModularDescriptor {
        left_exp: w.b.abs(),
        right_exp: w.b,
    })
}

/// Evaluation context for the non-commutative integral at one weight.
///
/// Residue values for the diagonal insertions are cached per power n.
pub struct IntegralContext {
    alg: AlgebraContext,
    fctx: FloatContext,
    weight: WeightSpec,
    prec: u32,
    cache: RefCell<BTreeMap<u32, Complex>>,
}

impl IntegralContext {
    /// The b = 1 regime required for the Haar comparison.
    pub fn new(dp: DeformationParameter, weight: WeightSpec, prec: u32) -> Result<Self> {
        weight.validate()?;
        if weight.b != 1.0 {
            return Err(Error::InvalidParameter(format!(
                "the non-commutative integral is computed in the b = 1 regime, got b = {}",
                weight.b
            )));
        }
        let fctx = FloatContext::new(dp.clone(), prec)?;
        Ok(IntegralContext {
            alg: AlgebraContext::new(dp),
            fctx,
            weight,
            prec,
            cache: RefCell::new(BTreeMap::new()),
        })
    }

    pub fn algebra(&self) -> &AlgebraContext {
        &self.alg
    }

    pub fn weight(&self) -> WeightSpec {
        self.weight
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// Residue of the zeta function with the b^n c^n insertion at the
    /// spectral dimension, including the insertion's constant factor.
    fn diagonal_residue(&self, n: u32) -> Result<Complex> {
        if let Some(v) = self.cache.borrow().get(&n) {
            return Ok(v.clone());
        }
        let params = ZetaParams::with_insertion_exponents(
            self.alg.dp().clone(),
            self.weight.a,
            self.weight.b,
            n,
        );
        let z0 = self.weight.dimension();
        let rep = residue(&params, z0, self.prec, ResidueMode::Fast)?;
        self.cache.borrow_mut().insert(n, rep.residue.clone());
        Ok(rep.residue)
    }

    /// The non-commutative integral: linear, with only the lattice-diagonal
    /// monomials b^n c^n contributing.
    pub fn nc_integral(&self, x: &AlgebraElement) -> Result<Complex> {
        let wide = self.prec + 32;
        let mut acc = Complex::with_val(wide, (0, 0));
        for (mono, coeff) in x.terms() {
            if !is_lattice_diagonal(mono) {
                continue;
            }
            let n = mono.b_power();
            let phi_n = self.diagonal_residue(n)?;
            let c = self.fctx.exact_to_float(coeff);
            acc += phi_n * Complex::with_val(wide, (c, Float::new(wide)));
        }
        Ok(Complex::with_val(self.prec, acc))
    }

    /// The integral of the unit, used for normalization.
    pub fn phi_one(&self) -> Result<Complex> {
        self.diagonal_residue(0)
    }

    /// The normalized integral, which is a state on the samples checked in
    /// the test suites.
    pub fn normalized_integral(&self, x: &AlgebraElement) -> Result<Complex> {
        let phi = self.nc_integral(x)?;
        let phi1 = self.phi_one()?;
        Ok(Complex::with_val(self.prec, phi / phi1))
    }

    /// Compare the normalized integral with the Haar state per monomial of
    /// `x`, and across the exponent sweep a in {1.5, 2, 3}.
    pub fn haar_equality_check(&self, x: &AlgebraElement, tol: f64) -> Result<HaarReport> {
        let mut rows = Vec::new();
        let mut pass = true;
        for (mono, _) in x.terms() {
            let elem = AlgebraElement::from_monomial(*mono);
            let phi = self.normalized_integral(&elem)?.real().to_f64();
            let h = self
                .fctx
                .exact_to_float(&self.alg.haar_state(&elem))
                .to_f64();
            let diff = (phi - h).abs();
            pass &= diff <= tol;
            rows.push(HaarRow {
                monomial: mono.to_string(),
                normalized_integral: phi,
                haar_state: h,
                abs_diff: diff,
            });
        }

        let phi_whole = self.normalized_integral(x)?.real().to_f64();
        let h_whole = self.fctx.exact_to_float(&self.alg.haar_state(x)).to_f64();
        let whole_diff = (phi_whole - h_whole).abs();
        pass &= whole_diff <= tol;

        // a-independence sweep: the normalized values agree across weights.
        let mut sweep = Vec::new();
        let mut sweep_values = Vec::new();
        for a in [1.5, 2.0, 3.0] {
            let sib = IntegralContext::new(
                self.alg.dp().clone(),
                WeightSpec::haar(a),
                self.prec,
            )?;
            let v = sib.normalized_integral(x)?.real().to_f64();
            sweep_values.push(v);
            sweep.push((a, v));
        }
        let mut sweep_spread = 0.0f64;
        for v in &sweep_values {
            for w in &sweep_values {
                sweep_spread = sweep_spread.max((v - w).abs());
            }
        }
        pass &= sweep_spread <= tol;

        Ok(HaarReport {
            rows,
            whole_value: phi_whole,
            whole_haar: h_whole,
            whole_diff,
            a_sweep: sweep,
            a_spread: sweep_spread,
            tol,
            pass,
        })
    }

    /// Check the modular property of the integral on a pair of monomials:
    /// the integral of xy equals the integral of theta(y) x, with theta
    /// applied as an exact q-power scaling of y.
    pub fn modular_property_check(
        &self,
        x: &Monomial,
        y: &Monomial,
        tol: f64,
    ) -> Result<ModularCheck> {
        let desc = modular_descriptor(&self.weight)?;
        let xe = AlgebraElement::from_monomial(*x);
        let ye = AlgebraElement::from_monomial(*y);

        let lhs = self
            .nc_integral(&self.alg.multiply(&xe, &ye))?
            .real()
            .to_f64();

        // theta scales the homogeneous y by q^(left wL + right wR).
        let exp = desc.left_exp * sigma_l_exponent(y) as f64
            + desc.right_exp * sigma_r_exponent(y) as f64;
        let scale = self.fctx.q_pow_f64(exp).to_f64();
        let yx = self.alg.multiply(&ye, &xe);
        let rhs = scale * self.nc_integral(&yx)?.real().to_f64();

        let diff = (lhs - rhs).abs();
        Ok(ModularCheck {
            lhs,
            rhs,
            abs_diff: diff,
            pass: diff <= tol,
        })
    }
}

/// Per-monomial comparison row of a Haar equality check.
#[derive(Clone, Debug)]
pub struct HaarRow {
    pub monomial: String,
    pub normalized_integral: f64,
    pub haar_state: f64,
    pub abs_diff: f64,
}

/// Result of a Haar equality check, including the a-independence sweep.
#[derive(Clone, Debug)]
pub struct HaarReport {
    pub rows: Vec<HaarRow>,
    pub whole_value: f64,
    pub whole_haar: f64,
    pub whole_diff: f64,
    pub a_sweep: Vec<(f64, f64)>,
    pub a_spread: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Result of one modular-property comparison.
#[derive(Clone, Copy, Debug)]
pub struct ModularCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub abs_diff: f64,
    pub pass: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qalgebra::{Gen, Side};
    use rug::Rational;

    fn dp(num: i64, den: i64) -> DeformationParameter {
        DeformationParameter::from_q(Rational::from((num, den))).unwrap()
    }

    fn ictx(num: i64, den: i64, a: f64) -> IntegralContext {
        IntegralContext::new(dp(num, den), WeightSpec::haar(a), 128).unwrap()
    }

    #[test]
    fn integral_of_unit_matches_residue_value() {
        let ctx = ictx(1, 2, 2.0);
        let v = ctx.nc_integral(&AlgebraElement::one()).unwrap();
        assert!((v.real().to_f64() - 14.6074).abs() < 5e-4);
    }

    #[test]
    fn integral_kills_off_diagonal_monomials() {
        let ctx = ictx(1, 2, 2.0);
        let a = AlgebraElement::from_gen(Gen::A);
        assert_eq!(ctx.nc_integral(&a).unwrap().real().to_f64(), 0.0);
        let b2c = AlgebraElement::from_monomial(Monomial::new(Side::A, 0, 2, 1));
        assert_eq!(ctx.nc_integral(&b2c).unwrap().real().to_f64(), 0.0);
    }

    #[test]
    fn normalized_integral_examples() {
        // bc -> -1/[2] = -4/17 at q = 1/4, independently of a.
        let ctx = ictx(1, 4, 2.0);
        let bc = AlgebraElement::from_monomial(Monomial::new(Side::A, 0, 1, 1));
        let v = ctx.normalized_integral(&bc).unwrap().real().to_f64();
        assert!((v - (-4.0 / 17.0)).abs() < 1e-10, "got {v}");

        // b^2 c^2 -> +1/[3] = 16/273 at q = 1/4.
        let b2c2 = AlgebraElement::from_monomial(Monomial::new(Side::A, 0, 2, 2));
        let v2 = ctx.normalized_integral(&b2c2).unwrap().real().to_f64();
        assert!((v2 - 16.0 / 273.0).abs() < 1e-10, "got {v2}");

        let one = ctx
            .normalized_integral(&AlgebraElement::one())
            .unwrap()
            .real()
            .to_f64();
        assert!((one - 1.0).abs() < 1e-25);
    }

    #[test]
    fn haar_equality_on_product_element() {
        // x = a d = 1 + q cb: the normalized integral is 1 - q/[2].
        let ctx = ictx(1, 2, 2.0);
        let ad = ctx.alg.multiply(
            &AlgebraElement::from_gen(Gen::A),
            &AlgebraElement::from_gen(Gen::D),
        );
        let report = ctx.haar_equality_check(&ad, 1e-9).unwrap();
        assert!(report.pass, "{report:?}");
        let expect = 1.0 - 0.5 / (2.0 + 0.5);
        assert!((report.whole_value - expect).abs() < 1e-10);
    }

    #[test]
    fn descriptor_matches_haar_modular_iff_b_is_one() {
        for b in [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0] {
            let w = WeightSpec::new(3.0, b);
            let desc = modular_descriptor(&w).unwrap();
            assert_eq!(desc == ModularDescriptor::haar_modular(), b == 1.0);
        }
        // a-independence of the descriptor.
        assert_eq!(
            modular_descriptor(&WeightSpec::new(2.0, 1.0)).unwrap(),
            modular_descriptor(&WeightSpec::new(3.0, 1.0)).unwrap()
        );
        assert_eq!(
            modular_descriptor(&WeightSpec::new(2.0, -1.0)).unwrap(),
            ModularDescriptor {
                left_exp: 1.0,
                right_exp: -1.0
            }
        );
        assert!(modular_descriptor(&WeightSpec::new(0.5, 1.0)).is_err());
    }

    #[test]
    fn modular_property_on_generator_pair() {
        let ctx = ictx(1, 2, 2.0);
        let check = ctx
            .modular_property_check(&Gen::B.monomial(), &Gen::C.monomial(), 1e-9)
            .unwrap();
        assert!(check.pass, "{check:?}");
        assert!(check.lhs.abs() > 1.0, "bc integral should be macroscopic");

        let trivial = ctx
            .modular_property_check(&Gen::A.monomial(), &Monomial::one(), 1e-12)
            .unwrap();
        assert!(trivial.pass);

        let ad = ctx
            .modular_property_check(&Gen::A.monomial(), &Gen::D.monomial(), 1e-9)
            .unwrap();
        assert!(ad.pass, "{ad:?}");
    }

    #[test]
    fn rejects_non_haar_weights() {
        assert!(IntegralContext::new(dp(1, 2), WeightSpec::new(2.0, -1.0), 128).is_err());
        assert!(IntegralContext::new(dp(1, 2), WeightSpec::new(0.5, 1.0), 128).is_err());
    }
}
