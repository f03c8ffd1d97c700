//! Closed-form evaluation of the weighted zeta family, its pole structure
//! and residues.
//!
//! The weighted trace over the lattice reduces, shell by shell, to geometric
//! sums; expanding [l+1/2]^(-z) by the binomial series gives
//!
//! ```text
//! zeta(z) = (q^(-z/2) + q^(z/2)) (q^-1 - q)^z sum_k C(z+k-1, k) S_k(z),
//!
//! S_k(z) = q^(k + z/2) (1 - q^(2K+z)) /
//!          [(1 - q^(z-(a+B)+K)) (1 - q^(z-(a-B)+K)) (1 - q^(a+B+K)) (1 - q^(a-B+K))]
//! ```
//!
//! with B = b + shift_i and K = k + shift_l (diagonal insertions shift the
//! i- and l-exponents uniformly through the four geometric sums). Since
//! 0 < q < 1 the k-series converges for every z away from the poles, so the
//! series *is* the meromorphic extension; poles on the real axis sit at
//! z = (a + B) - K and z = (a - B) - K. Simple-pole residues come from
//! dropping the vanishing factor and multiplying by -1/ln q, optionally
//! cross-checked against the numeric limit (z - z0) zeta(z).

use crate::error::{Error, Result};
use crate::numerics::{gamma, gen_binomial, DeformationParameter, FloatContext};
use rug::ops::CompleteRound;
use rug::{Complex, Float, Rational};

/// Parameters selecting one member of the zeta family: the deformation
/// parameter, the weight exponents (a, b), and an optional diagonal
/// insertion encoded by exponent shifts and a constant prefactor.
#[derive(Clone, Debug)]
pub struct ZetaParams {
    dp: DeformationParameter,
    a: f64,
    b: f64,
    shift_i: u32,
    shift_l: u32,
    const_factor: Rational,
}

impl ZetaParams {
    pub fn new(dp: DeformationParameter, a: f64, b: f64) -> Self {
        ZetaParams {
            dp,
            a,
            b,
            shift_i: 0,
            shift_l: 0,
            const_factor: Rational::from(1),
        }
    }

    /// Parameters with the diagonal insertion of b^n c^n: exponent shifts
    /// shift_i = shift_l = n and constant factor (-1)^n q^n.
    pub fn with_insertion_exponents(dp: DeformationParameter, a: f64, b: f64, n: u32) -> Self {
        let mut const_factor = dp.q_int_pow(n as i64);
        if n % 2 == 1 {
            const_factor = -const_factor;
        }
        ZetaParams {
            dp,
            a,
            b,
            shift_i: n,
            shift_l: n,
            const_factor,
        }
    }

    pub fn dp(&self) -> &DeformationParameter {
        &self.dp
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn shift_i(&self) -> u32 {
        self.shift_i
    }

    pub fn shift_l(&self) -> u32 {
        self.shift_l
    }

    pub fn const_factor(&self) -> &Rational {
        &self.const_factor
    }

    /// Effective i-exponent parameter B = b + shift_i.
    fn b_eff(&self) -> f64 {
        self.b + self.shift_i as f64
    }

    /// The convergence precondition a +- b > 0.
    pub fn validate(&self) -> Result<()> {
        if self.a + self.b <= 0.0 || self.a - self.b <= 0.0 {
            return Err(Error::DivergentParameters {
                a: self.a,
                b: self.b,
            });
        }
        Ok(())
    }
}

/// The spectral dimension a + |b| of a convergent member of the family.
pub fn spectral_dimension(params: &ZetaParams) -> Result<f64> {
    params.validate()?;
    Ok(params.a + params.b.abs())
}

/// Result of a closed-form zeta evaluation.
#[derive(Debug)]
pub struct ZetaValue {
    pub value: Complex,
    /// Number of k-terms summed.
    pub k_used: usize,
    /// Geometric majorant of the dropped tail, on the scale of `value`.
    pub tail_bound: Float,
}

/// Which denominator family a pole comes from.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PoleFamily {
    /// Factor 1 - q^(z - (a+B) + K).
    Sum,
    /// Factor 1 - q^(z - (a-B) + K).
    Difference,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PoleOrder {
    Simple,
    Double,
}

/// Pole data at one real point, before residue extraction.
#[derive(Clone, Debug)]
pub struct PoleStructure {
    pub z0: f64,
    pub order: PoleOrder,
    pub contributing: Vec<(PoleFamily, u64)>,
}

impl PoleStructure {
    pub fn is_pole(&self) -> bool {
        !self.contributing.is_empty()
    }

    pub fn contributing_k(&self) -> Vec<u64> {
        let mut ks: Vec<u64> = self.contributing.iter().map(|&(_, k)| k).collect();
        ks.sort_unstable();
        ks.dedup();
        ks
    }
}

/// A residue value with its provenance and a measured error bound.
#[derive(Clone, Debug)]
pub struct ResidueReport {
    pub z0: f64,
    pub order: PoleOrder,
    pub contributing_k: Vec<u64>,
    pub residue: Complex,
    pub error_bound: Float,
}

/// Whether residues are cross-checked against the numeric limit
/// (z - z0) zeta(z) on a shrinking sequence.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ResidueMode {
    Fast,
    Verified,
}

const INTEGER_DETECT_TOL: f64 = 1e-9;
const MAX_K_TERMS: usize = 20_000;

struct Evaluator {
    ctx: FloatContext,
    wide: u32,
}

impl Evaluator {
    fn new(params: &ZetaParams, prec: u32) -> Result<Self> {
        let ctx = FloatContext::new(params.dp.clone(), prec)?;
        Ok(Evaluator {
            wide: prec + 32,
            ctx,
        })
    }

    fn complex(&self, re: f64) -> Complex {
        Complex::with_val(self.wide, (re, 0.0))
    }

    /// 1 - q^e for complex e, with pole-proximity detection: a factor below
    /// 2^(-prec/2) in absolute value counts as a pole hit.
    fn one_minus_qpow(&self, e: &Complex, z: &Complex) -> Result<Complex> {
        let f = 1u32 - self.ctx.q_complex_pow(e);
        let abs = f.clone().abs().into_real_imag().0;
        let threshold = Float::with_val(32, Float::i_exp(1, -((self.ctx.prec() / 2) as i32)));
        if abs < threshold {
            return Err(Error::PoleHit {
                z_re: z.real().to_f64(),
                z_im: z.imag().to_f64(),
                exponent_re: e.real().to_f64(),
                factor_abs: abs.to_f64(),
            });
        }
        Ok(f)
    }

    /// The term S_k, optionally with one denominator family removed
    /// (for residue extraction at a simple pole).
    fn s_k(&self, params: &ZetaParams, k: u64, z: &Complex, drop: Option<PoleFamily>) -> Result<Complex> {
        let a = params.a;
        let b_eff = params.b_eff();
        let kk = k as f64 + params.shift_l as f64; // K = k + shift_l
        let wide = self.wide;

        // Numerator q^(k + z/2) (1 - q^(2K + z)).
        let half_z = z / Complex::with_val(wide, 2);
        let mut num = self
            .ctx
            .q_complex_pow(&(half_z + Complex::with_val(wide, k)));
        let e_num = z + Complex::with_val(wide, 2.0 * kk);
        num *= 1u32 - self.ctx.q_complex_pow(&e_num);

        // Denominator factors.
        let mut den = Complex::with_val(wide, (1, 0));
        if drop != Some(PoleFamily::Sum) {
            let e = z + Complex::with_val(wide, kk - (a + b_eff));
            den *= self.one_minus_qpow(&e, z)?;
        }
        if drop != Some(PoleFamily::Difference) {
            let e = z + Complex::with_val(wide, kk - (a - b_eff));
            den *= self.one_minus_qpow(&e, z)?;
        }
        for real_e in [a + b_eff + kk, a - b_eff + kk] {
            den *= self.one_minus_qpow(&self.complex(real_e), z)?;
        }
        Ok(num / den)
    }

    /// Prefactor (q^(-z/2) + q^(z/2)) (q^-1 - q)^z const.
    fn prefactor(&self, params: &ZetaParams, z: &Complex) -> Complex {
        let wide = self.wide;
        let half_z = z / Complex::with_val(wide, 2);
        let spin = self.ctx.q_complex_pow(&(-half_z.clone()))
            + self.ctx.q_complex_pow(&half_z);
        let base = Float::with_val(wide, params.dp.q_int_pow(-1) - params.dp.q_int_pow(1));
        let scale = (z * base.ln()).complete((wide, wide)).exp();
        let cf = Float::with_val(wide, &params.const_factor);
        (spin * scale) * cf
    }
}

/// Closed-form evaluation of the zeta function by adaptive truncation of the
/// k-series; valid for every z away from the poles (the series is the
/// meromorphic extension).
pub fn zeta_closed(
    params: &ZetaParams,
    z: &Complex,
    prec: u32,
    target_eps: f64,
) -> Result<ZetaValue> {
    params.validate()?;
    let ev = Evaluator::new(params, prec)?;
    let wide = ev.wide;
    let q = params.dp.q().to_f64();

    let pre = ev.prefactor(params, z);
    let pre_abs = pre.clone().abs().into_real_imag().0.to_f64();

    let mut sum = Complex::with_val(wide, (0, 0));
    let mut binom = Complex::with_val(wide, (1, 0));
    let z_abs = z.clone().abs().into_real_imag().0.to_f64();
    let mut k = 0u64;
    let mut prev_term_abs = f64::INFINITY;
    loop {
        if k > 0 {
            // C(z+k-1, k) = C(z+k-2, k-1) (z+k-1)/k.
            let step =
                (z + Complex::with_val(wide, k as f64 - 1.0)) / Complex::with_val(wide, k);
            binom *= step;
        }
        let term = ev.s_k(params, k, z, None)? * &binom;
        let term_abs = term.clone().abs().into_real_imag().0.to_f64();
        sum += term;

        // Geometric majorant of the tail: the term ratio approaches
        // q (z+k)/(k+1); take the measured ratio as a fallback near poles.
        let ratio_bound = q * (1.0 + (z_abs + 2.0) / (k as f64 + 2.0));
        let measured = if prev_term_abs.is_finite() && prev_term_abs > 0.0 {
            term_abs / prev_term_abs
        } else {
            1.0
        };
        let rho = ratio_bound.max(measured).min(1.0 - 1e-9);
        let tail = term_abs * pre_abs * rho / (1.0 - rho);
        if k >= 4 && tail < target_eps {
            let value = sum * pre;
            return Ok(ZetaValue {
                value: Complex::with_val(prec, value),
                k_used: k as usize + 1,
                tail_bound: Float::with_val(prec, tail),
            });
        }
        prev_term_abs = term_abs;
        k += 1;
        if k as usize > MAX_K_TERMS {
            return Err(Error::SeriesDivergence {
                max_terms: MAX_K_TERMS,
                tail,
            });
        }
    }
}

/// Enumerate the series terms whose denominators vanish at the real point
/// z0. Errors with `DoublePole` when the weight has b = 0 (both families
/// coincide there).
pub fn pole_structure(params: &ZetaParams, z0: f64) -> Result<PoleStructure> {
    params.validate()?;
    if params.b == 0.0 {
        return Err(Error::DoublePole { z0 });
    }
    let mut contributing = Vec::new();
    for (family, offset) in [
        (PoleFamily::Sum, params.a + params.b_eff()),
        (PoleFamily::Difference, params.a - params.b_eff()),
    ] {
        // z0 - offset + K = 0 with K = k + shift_l.
        let k_real = offset - z0 - params.shift_l as f64;
        let k_round = k_real.round();
        if k_round >= 0.0 && (k_real - k_round).abs() < INTEGER_DETECT_TOL {
            contributing.push((family, k_round as u64));
        }
    }
    // Both families vanishing at the same k would be a double pole; with
    // b != 0 and nonnegative insertion shifts this needs B = 0.
    if contributing.len() == 2 && contributing[0].1 == contributing[1].1 {
        return Err(Error::DoublePole { z0 });
    }
    Ok(PoleStructure {
        z0,
        order: PoleOrder::Simple,
        contributing,
    })
}

/// Residue at a simple real pole, by dropping the vanishing factor of each
/// contributing term and multiplying by -1/ln q. In `Verified` mode the
/// value is cross-checked against the numeric limit (z - z0) zeta(z) on a
/// shrinking sequence and the disagreement is reported as `error_bound`.
pub fn residue(
    params: &ZetaParams,
    z0: f64,
    prec: u32,
    mode: ResidueMode,
) -> Result<ResidueReport> {
    let structure = pole_structure(params, z0)?;
    let ev = Evaluator::new(params, prec)?;
    let wide = ev.wide;
    let z = ev.complex(z0);

    let mut res = Complex::with_val(wide, (0, 0));
    if structure.is_pole() {
        let pre = ev.prefactor(params, &z);
        // Residue of 1/(1 - q^(z-z0)) at z0 is -1/ln q.
        let minus_inv_lnq = -Float::with_val(wide, ev.ctx.ln_q()).recip();
        for &(family, k) in &structure.contributing {
            let binom = gen_binomial(&z, k);
            let hat = ev.s_k(params, k, &z, Some(family))?;
            res += hat * binom;
        }
        res *= pre;
        res *= &minus_inv_lnq;
    }

    let res_out = Complex::with_val(prec, &res);
    let res_abs = res.clone().abs().into_real_imag().0.to_f64();

    let error_bound = match mode {
        ResidueMode::Fast => {
            Float::with_val(prec, res_abs.abs() * 2f64.powi(-(prec as i32) + 24))
        }
        ResidueMode::Verified => {
            // Linear extrapolation of (z - z0) zeta(z) from two offsets.
            let eps1 = 1e-6;
            let eps2 = 1e-7;
            let scale = res_abs.max(1.0);
            let eps_target = (scale * 1e-25).max(1e-35);
            let r_at = |eps: f64| -> Result<Complex> {
                // Form z0 + eps at working precision; an f64 sum would move
                // the pole offset by an ulp of z0.
                let zz = Complex::with_val(wide, (z0, 0.0)) + Complex::with_val(wide, (eps, 0.0));
                let v = zeta_closed(params, &zz, prec, eps_target)?;
                Ok(v.value * Complex::with_val(wide, eps))
            };
            let r1 = r_at(eps1)?;
            let r2 = r_at(eps2)?;
            // res ~ (eps1 r(eps2) - eps2 r(eps1)) / (eps1 - eps2).
            let num =
                r2 * Complex::with_val(wide, eps1) - r1 * Complex::with_val(wide, eps2);
            let res_num = num / Complex::with_val(wide, eps1 - eps2);
            let diff = (res_num - &res).abs().into_real_imag().0;
            Float::with_val(prec, diff)
        }
    };

    Ok(ResidueReport {
        z0,
        order: structure.order,
        contributing_k: structure.contributing_k(),
        residue: res_out,
        error_bound,
    })
}

/// Gamma-weighted residue Gamma(z0) res_{z=z0} zeta(z); errors when the
/// gamma factor itself has a pole at z0.
pub fn residue_gamma_weighted(
    params: &ZetaParams,
    z0: f64,
    prec: u32,
    mode: ResidueMode,
) -> Result<ResidueReport> {
    if z0 <= 0.0 && (z0 - z0.round()).abs() < 1e-12 {
        return Err(Error::GammaPole { z0 });
    }
    let mut report = residue(params, z0, prec, mode)?;
    let g = gamma(&Float::with_val(prec + 32, z0))?;
    report.residue = Complex::with_val(prec, report.residue * &g);
    report.error_bound = Float::with_val(prec, report.error_bound * g.abs());
    Ok(report)
}

/// Root report of the scan for the vanishing residue two steps below the
/// spectral dimension.
#[derive(Clone, Debug)]
pub struct ScanReport {
    pub a_star: Option<f64>,
    pub bracket: Option<(f64, f64)>,
    pub residual: f64,
    pub evaluations: usize,
}

/// Scan a-values (with b = 1) for the root of the residue at z = n - 2 by
/// sign-change bracketing and bisection; the unique root is the classical
/// weight exponent.
pub fn a2_criterion_scan(
    dp: &DeformationParameter,
    a_min: f64,
    a_max: f64,
    prec: u32,
) -> Result<ScanReport> {
    if !(a_min > 1.0) || !(a_max > a_min) {
        return Err(Error::InvalidParameter(format!(
            "scan range must satisfy 1 < a_min < a_max, got [{a_min}, {a_max}]"
        )));
    }
    let mut evaluations = 0usize;
    let mut f = |a: f64| -> Result<f64> {
        evaluations += 1;
        let params = ZetaParams::new(dp.clone(), a, 1.0);
        let rep = residue(&params, a - 1.0, prec, ResidueMode::Fast)?;
        Ok(rep.residue.real().to_f64())
    };

    let grid_points = 32usize;
    let mut prev_a = a_min;
    let mut prev_f = f(prev_a)?;
    let mut bracket = None;
    for g in 1..=grid_points {
        let a = a_min + (a_max - a_min) * g as f64 / grid_points as f64;
        let fa = f(a)?;
        if prev_f == 0.0 {
            bracket = Some((prev_a, prev_a));
            break;
        }
        if prev_f.signum() != fa.signum() {
            bracket = Some((prev_a, a));
            break;
        }
        prev_a = a;
        prev_f = fa;
    }

    let Some((mut lo, mut hi)) = bracket else {
        return Ok(ScanReport {
            a_star: None,
            bracket: None,
            residual: prev_f,
            evaluations,
        });
    };

    let mut f_lo = f(lo)?;
    for _ in 0..64 {
        if hi - lo < 1e-10 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if f_lo.signum() == f_mid.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let a_star = 0.5 * (lo + hi);
    let residual = f(a_star)?;
    Ok(ScanReport {
        a_star: Some(a_star),
        bracket: Some((lo, hi)),
        residual,
        evaluations,
    })
}
