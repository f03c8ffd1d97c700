//! Named verification suites shared by the command-line driver and the
//! acceptance tests.
//!
//! Each suite runs a list of checks and reports them individually; exact
//! checks compare rationals, floating checks carry explicit tolerances.
//! Randomized checks draw from a seeded generator, so a run is fully
//! determined by its configuration.

use crate::error::Result;
use crate::integral::{modular_descriptor, IntegralContext, ModularDescriptor, WeightSpec};
use crate::numerics::{DeformationParameter, ExactScalar, FloatContext, HalfInt};
use crate::qalgebra::{
    random_element, random_monomial, AlgebraContext, AlgebraElement, AutomorphismSpec, Gen,
    Monomial, Side, UqGen,
};
use crate::spectral::{
    build_dirac, is_lattice_diagonal, norm_probe, op_casimir, op_chi, op_modular_l, rho_apply,
    rho_gen, truncated_zeta, Lattice, ProbeKind,
};
use crate::zeta::{
    a2_criterion_scan, pole_structure, residue, spectral_dimension, zeta_closed, ResidueMode,
    ZetaParams,
};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rug::ops::CompleteRound;
use rug::ops::Pow;
use rug::{Complex, Float};

/// One named check with a pass flag and a short diagnostic.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: String) -> Self {
        Check {
            name: name.to_string(),
            pass,
            detail,
        }
    }
}

/// A suite of checks.
#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Configuration shared by the suites.
#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub dp: DeformationParameter,
    pub prec: u32,
    pub l_max: HalfInt,
    pub a: f64,
    pub b: f64,
    pub seed: u64,
}

// ---------------------------------------------------------------------------
// Algebra suite
// ---------------------------------------------------------------------------

pub fn algebra_suite(cfg: &VerifyConfig) -> SuiteReport {
    let ctx = AlgebraContext::new(cfg.dp.clone());
    let mut checks = Vec::new();
    let gen = AlgebraElement::from_gen;

    // The seven defining relations, normal-ordered.
    {
        let q = |e: i64| ExactScalar::from_rational(cfg.dp.q_int_pow(e));
        let pairs: Vec<(&str, AlgebraElement, AlgebraElement)> = vec![
            (
                "ab = q ba",
                ctx.multiply(&gen(Gen::A), &gen(Gen::B)),
                ctx.multiply(&gen(Gen::B), &gen(Gen::A)).scale(&q(1), &cfg.dp),
            ),
            (
                "ac = q ca",
                ctx.multiply(&gen(Gen::A), &gen(Gen::C)),
                ctx.multiply(&gen(Gen::C), &gen(Gen::A)).scale(&q(1), &cfg.dp),
            ),
            (
                "bd = q db",
                ctx.multiply(&gen(Gen::B), &gen(Gen::D)),
                ctx.multiply(&gen(Gen::D), &gen(Gen::B)).scale(&q(1), &cfg.dp),
            ),
            (
                "cd = q dc",
                ctx.multiply(&gen(Gen::C), &gen(Gen::D)),
                ctx.multiply(&gen(Gen::D), &gen(Gen::C)).scale(&q(1), &cfg.dp),
            ),
            (
                "bc = cb",
                ctx.multiply(&gen(Gen::B), &gen(Gen::C)),
                ctx.multiply(&gen(Gen::C), &gen(Gen::B)),
            ),
            (
                "ad = 1 + q cb",
                ctx.multiply(&gen(Gen::A), &gen(Gen::D)),
                AlgebraElement::one().add(
                    &ctx.multiply(&gen(Gen::C), &gen(Gen::B)).scale(&q(1), &cfg.dp),
                ),
            ),
            (
                "da = 1 + q^-1 bc",
                ctx.multiply(&gen(Gen::D), &gen(Gen::A)),
                AlgebraElement::one().add(
                    &ctx.multiply(&gen(Gen::B), &gen(Gen::C)).scale(&q(-1), &cfg.dp),
                ),
            ),
        ];
        let failed: Vec<&str> = pairs
            .iter()
            .filter(|(_, l, r)| l != r)
            .map(|(n, _, _)| *n)
            .collect();
        checks.push(Check::new(
            "defining-relations",
            failed.is_empty(),
            if failed.is_empty() {
                "all seven relations hold exactly".into()
            } else {
                format!("violated: {failed:?}")
            },
        ));
    }

    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);

    // Star: involutive and antimultiplicative.
    {
        let mut ok = true;
        for _ in 0..50 {
            let x = random_element(&mut rng, 4, 3);
            let y = random_element(&mut rng, 4, 3);
            ok &= ctx.star(&ctx.star(&x)) == x;
            ok &= ctx.star(&ctx.multiply(&x, &y)) == ctx.multiply(&ctx.star(&y), &ctx.star(&x));
        }
        checks.push(Check::new(
            "star-involution-antimultiplicative",
            ok,
            "50 random pairs, exact".into(),
        ));
    }

    // Associativity on random monomial triples of total degree <= 6.
    {
        let mut ok = true;
        for _ in 0..60 {
            let x = AlgebraElement::from_monomial(random_monomial(&mut rng, 2));
            let y = AlgebraElement::from_monomial(random_monomial(&mut rng, 2));
            let z = AlgebraElement::from_monomial(random_monomial(&mut rng, 2));
            ok &= ctx.multiply(&ctx.multiply(&x, &y), &z) == ctx.multiply(&x, &ctx.multiply(&y, &z));
        }
        checks.push(Check::new(
            "associativity",
            ok,
            "60 random triples, total degree <= 6, exact".into(),
        ));
    }

    // KMS property of the Haar state.
    {
        let mut ok = true;
        for _ in 0..200 {
            let x = random_element(&mut rng, 3, 3);
            let y = random_element(&mut rng, 3, 3);
            let lhs = ctx.haar_state(&ctx.multiply(&x, &y));
            let theta_y = ctx.apply_diag_automorphism(AutomorphismSpec::THETA, &y);
            let rhs = ctx.haar_state(&ctx.multiply(&theta_y, &x));
            ok &= lhs == rhs;
        }
        checks.push(Check::new(
            "haar-kms",
            ok,
            "h(xy) = h(theta(y) x), 200 random pairs, exact".into(),
        ));
    }

    // Module-algebra (coproduct) rule for the e-action.
    {
        let mut ok = true;
        for _ in 0..60 {
            let x = AlgebraElement::from_monomial(random_monomial(&mut rng, 3));
            let y = AlgebraElement::from_monomial(random_monomial(&mut rng, 3));
            let lhs = ctx.left_action(UqGen::E, &ctx.multiply(&x, &y));
            let rhs = ctx
                .multiply(&ctx.left_action(UqGen::E, &x), &ctx.left_action(UqGen::K, &y))
                .add(&ctx.multiply(
                    &ctx.left_action(UqGen::KInv, &x),
                    &ctx.left_action(UqGen::E, &y),
                ));
            ok &= lhs == rhs;
        }
        checks.push(Check::new(
            "module-algebra-rule",
            ok,
            "e(xy) = e(x) k(y) + k^-1(x) e(y), 60 random pairs, exact".into(),
        ));
    }

    // Left and right actions commute.
    {
        let gens = [UqGen::K, UqGen::KInv, UqGen::E, UqGen::F];
        let mut ok = true;
        for _ in 0..20 {
            let x = random_element(&mut rng, 3, 2);
            for gl in gens {
                for gr in gens {
                    let lhs = ctx.right_action(&ctx.left_action(gl, &x), gr);
                    let rhs = ctx.left_action(gl, &ctx.right_action(&x, gr));
                    ok &= lhs == rhs;
                }
            }
        }
        checks.push(Check::new(
            "actions-commute",
            ok,
            "all generator pairs on 20 random elements, exact".into(),
        ));
    }

    // Twisted Leibniz rule for the off-diagonal derivation.
    {
        let mut ok = true;
        let del = |x: &AlgebraElement| {
            ctx.left_action(UqGen::E, &ctx.left_action(UqGen::KInv, x))
        };
        let sig = |x: &AlgebraElement| ctx.apply_diag_automorphism(AutomorphismSpec::SIGMA_L, x);
        let mut pairs: Vec<(AlgebraElement, AlgebraElement)> = Vec::new();
        for gx in Gen::ALL {
            for gy in Gen::ALL {
                pairs.push((gen(gx), gen(gy)));
            }
        }
        for _ in 0..100 {
            pairs.push((
                AlgebraElement::from_monomial(random_monomial(&mut rng, 3)),
                AlgebraElement::from_monomial(random_monomial(&mut rng, 3)),
            ));
        }
        for (x, y) in &pairs {
            let lhs = del(&ctx.multiply(x, y)).sub(&ctx.multiply(&sig(x), &del(y)));
            let rhs = ctx.multiply(&del(x), y);
            ok &= lhs == rhs;
        }
        checks.push(Check::new(
            "twisted-leibniz",
            ok,
            format!(
                "del(xy) - sigma_L(x) del(y) = del(x) y on {} pairs, exact",
                pairs.len()
            ),
        ));
    }

    // Positivity sample: the Gram matrix of {1, a, b, c, d}.
    {
        let basis = [
            AlgebraElement::one(),
            gen(Gen::A),
            gen(Gen::B),
            gen(Gen::C),
            gen(Gen::D),
        ];
        let n = basis.len();
        let mut gram = vec![vec![0f64; n]; n];
        for (r, x) in basis.iter().enumerate() {
            for (c, y) in basis.iter().enumerate() {
                let v = ctx.haar_inner_product(x, y);
                let f = FloatContext::new(cfg.dp.clone(), cfg.prec.max(64)).unwrap();
                gram[r][c] = f.exact_to_float(&v).to_f64();
            }
        }
        let eigs = jacobi_eigenvalues(&gram);
        let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        checks.push(Check::new(
            "gram-positive",
            min >= -1e-20,
            format!("smallest eigenvalue {min:.3e}"),
        ));
    }

    SuiteReport {
        suite: "algebra".into(),
        checks,
    }
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
fn jacobi_eigenvalues(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    for _ in 0..100 {
        let mut off = 0.0;
        for r in 0..n {
            for c in (r + 1)..n {
                off += a[r][c] * a[r][c];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|k| a[k][k]).collect()
}

// ---------------------------------------------------------------------------
// Spectral suite
// ---------------------------------------------------------------------------

pub fn spectral_suite(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let fctx = FloatContext::new(cfg.dp.clone(), cfg.prec)?;
    let l_op = cfg.l_max.min(HalfInt::from_int(12));
    let lattice = Lattice::new(l_op);

    // Dirac square identity, scaled entrywise.
    {
        let d = build_dirac(&fctx, &lattice);
        let d2 = d.compose(&d);
        let chi = op_chi(&fctx, &lattice);
        let dl = op_modular_l(&fctx, &lattice);
        let cas = op_casimir(&fctx, &lattice);
        let wide = cfg.prec + 32;
        let mut worst = Float::with_val(wide, 0);
        for idx in 0..lattice.len() as u32 {
            let den = (chi.diagonal_at(idx).unwrap().real()
                * dl.diagonal_at(idx).unwrap().real())
            .complete(wide);
            let rhs = Float::with_val(wide, cas.diagonal_at(idx).unwrap().real()) / den;
            let lhs = d2
                .diagonal_at(idx)
                .map(|v| Float::with_val(wide, v.real()))
                .unwrap_or_else(|| Float::new(wide));
            let scale = rhs.clone().abs().max(&Float::with_val(wide, 1));
            let err = ((lhs - &rhs) / scale).abs();
            if err > worst {
                worst = err;
            }
        }
        // Off-diagonal residue of D^2, scaled by the local diagonal.
        for (&(r, c), v) in d2.entries() {
            if r == c {
                continue;
            }
            let scale = d2
                .diagonal_at(r)
                .map(|x| Float::with_val(wide, x.real()))
                .unwrap_or_else(|| Float::with_val(wide, 1))
                .abs()
                .max(&Float::with_val(wide, 1));
            let err = v.clone().abs().into_real_imag().0 / scale;
            if err > worst {
                worst = err;
            }
        }
        let bound = Float::with_val(64, 2f64).pow(-((cfg.prec as i32) - 28));
        checks.push(Check::new(
            "dirac-square-identity",
            worst <= bound,
            format!("worst scaled entry error 2^{:.1}", worst.to_f64().log2()),
        ));
    }

    // Representation respects the relations on bulk sites.
    {
        let actx = AlgebraContext::new(cfg.dp.clone());
        let mut worst = 0f64;
        let margin = HalfInt::from_int(2);
        for gx in Gen::ALL {
            for gy in Gen::ALL {
                let rx = rho_gen(&fctx, &lattice, gx);
                let ry = rho_gen(&fctx, &lattice, gy);
                let lhs = rx.compose(&ry);
                // Normal-ordered product mapped through the representation.
                let prod = actx.multiply(
                    &AlgebraElement::from_gen(gx),
                    &AlgebraElement::from_gen(gy),
                );
                let mut rhs: Option<crate::spectral::TruncatedOperator> = None;
                for (mono, coeff) in prod.terms() {
                    let op = rho_apply(&fctx, &lattice, mono);
                    let cf = Complex::with_val(
                        cfg.prec,
                        (fctx.exact_to_float(coeff), Float::new(cfg.prec)),
                    );
                    let scaled = op.scale(&cf);
                    rhs = Some(match rhs {
                        None => scaled,
                        Some(acc) => acc.add(&scaled),
                    });
                }
                let diff = lhs.sub(&rhs.expect("nonempty product"));
                for (&(r, c), v) in diff.entries() {
                    let bulk = |idx: u32| {
                        let s = lattice.site(idx as usize);
                        let p = s.point;
                        p.l + margin <= l_op
                            && (p.l - p.i.abs()) >= margin
                            && (p.l - p.j.abs()) >= margin
                    };
                    if bulk(r) && bulk(c) {
                        worst = worst.max(v.clone().abs().real().to_f64());
                    }
                }
            }
        }
        checks.push(Check::new(
            "rho-defining-relations",
            worst < 1e-30,
            format!("worst bulk entry deviation {worst:.3e}"),
        ));
    }

    // Star compatibility of the representation, mask included.
    {
        let ra = rho_gen(&fctx, &lattice, Gen::A);
        let rd = rho_gen(&fctx, &lattice, Gen::D);
        let rb = rho_gen(&fctx, &lattice, Gen::B);
        let rc = rho_gen(&fctx, &lattice, Gen::C);
        let q = Complex::with_val(cfg.prec, (Float::with_val(cfg.prec, cfg.dp.q()), 0));
        let mut worst = 0f64;
        for (_, v) in ra.adjoint().sub(&rd).entries() {
            worst = worst.max(v.clone().abs().real().to_f64());
        }
        for (_, v) in rb.adjoint().sub(&rc.scale(&(-q))).entries()
        {
            worst = worst.max(v.clone().abs().real().to_f64());
        }
        checks.push(Check::new(
            "rho-star-compatible",
            worst < 1e-30,
            format!("worst entry deviation {worst:.3e}"),
        ));
    }

    // Diagonal selection rule over all monomials of degree <= 4.
    {
        let mut ok = true;
        for side in [Side::A, Side::D] {
            for p in 0..=4u32 {
                if side == Side::D && p == 0 {
                    continue;
                }
                for m in 0..=4u32 {
                    for n in 0..=4u32 {
                        if p + m + n > 4 || p + m + n == 0 {
                            continue;
                        }
                        let mono = Monomial::new(side, p, m, n);
                        let op = rho_apply(&fctx, &lattice, &mono);
                        let has_diag =
                            (0..lattice.len() as u32).any(|i| op.diagonal_at(i).is_some());
                        ok &= has_diag == is_lattice_diagonal(&mono);
                    }
                }
            }
        }
        checks.push(Check::new(
            "diagonal-selection-rule",
            ok,
            "only b^n c^n monomials reach the diagonal (degree <= 4)".into(),
        ));
    }

    // Truncated traces grow monotonically in the truncation for real z.
    {
        let params = ZetaParams::new(cfg.dp.clone(), cfg.a, cfg.b.abs().max(0.5));
        let n = params.a() + params.b().abs();
        let z = Complex::with_val(cfg.prec, (n + 1.0, 0));
        let mut prev = 0.0;
        let mut ok = true;
        for t in [4i64, 8, 12, 16] {
            let v = truncated_zeta(&params, &z, HalfInt::from_twice(t), None, cfg.prec)?
                .value
                .real()
                .to_f64();
            ok &= v > prev;
            prev = v;
        }
        checks.push(Check::new(
            "truncated-trace-monotone",
            ok,
            "partial sums increase with l_max at real z".into(),
        ));
    }

    // Boundedness probes: twisted commutator plateaus along the schedule.
    {
        let schedule = [
            cfg.l_max.min(HalfInt::from_int(8)),
            cfg.l_max.min(HalfInt::from_int(14)),
        ];
        let mut detail = String::new();
        let mut ok = true;
        for g in [Gen::A, Gen::C] {
            let kind = ProbeKind::TwistedCommutator(g.monomial());
            let norms = norm_probe(&fctx, &kind, &schedule, cfg.seed);
            let rel = (norms[1] - norms[0]).abs() / norms[0].max(1e-12);
            ok &= rel < 0.10;
            detail.push_str(&format!("{}: {:.6} -> {:.6}; ", g.symbol(), norms[0], norms[1]));
        }
        checks.push(Check::new(
            "twisted-commutator-probe",
            ok,
            format!("{detail}(probe, not proof)"),
        ));
    }

    Ok(SuiteReport {
        suite: "spectral".into(),
        checks,
    })
}

// ---------------------------------------------------------------------------
// Zeta suite
// ---------------------------------------------------------------------------

pub fn zeta_suite(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let dp = &cfg.dp;

    // Closed form against the brute-force truncated oracle.
    {
        let params = ZetaParams::new(dp.clone(), cfg.a, if cfg.b == 0.0 { 1.0 } else { cfg.b });
        let n = spectral_dimension(&params)?;
        let z = Complex::with_val(cfg.prec, (n + 2.0, 0));
        let closed = zeta_closed(&params, &z, cfg.prec, 1e-25)?;
        let oracle = truncated_zeta(&params, &z, cfg.l_max, None, cfg.prec)?;
        let scale = closed.value.clone().abs().into_real_imag().0.to_f64();
        let diff = (closed.value.clone() - &oracle.value)
            .abs()
            .into_real_imag()
            .0
            .to_f64();
        let budget =
            1.5 * oracle.tail_estimate.to_f64() + closed.tail_bound.to_f64() + 1e-10 * scale;
        checks.push(Check::new(
            "closed-form-vs-oracle",
            diff <= budget,
            format!("difference {diff:.3e} within budget {budget:.3e}"),
        ));
    }

    // Symmetry under b -> -b.
    {
        let b = if cfg.b == 0.0 { 1.0 } else { cfg.b };
        let pa = ZetaParams::new(dp.clone(), cfg.a, b);
        let pb = ZetaParams::new(dp.clone(), cfg.a, -b);
        let n = spectral_dimension(&pa)?;
        let z = Complex::with_val(cfg.prec, (n + 1.5, 0.4));
        let va = zeta_closed(&pa, &z, cfg.prec, 1e-25)?.value;
        let vb = zeta_closed(&pb, &z, cfg.prec, 1e-25)?.value;
        let rel = ((va.clone() - &vb) / va).abs().into_real_imag().0.to_f64();
        checks.push(Check::new(
            "b-reflection-symmetry",
            rel < 1e-20,
            format!("relative difference {rel:.3e}"),
        ));
    }

    // Pole lattice on a window.
    {
        let params = ZetaParams::new(dp.clone(), 2.0, 1.0);
        let mut ok = true;
        let mut z0 = -2.0;
        while z0 <= 3.51 {
            let ps = pole_structure(&params, z0)?;
            let expected = (z0 - z0.round()).abs() < 1e-9 && z0.round() <= 3.0;
            ok &= ps.is_pole() == expected;
            z0 += 0.25;
        }
        checks.push(Check::new(
            "pole-lattice-window",
            ok,
            "poles exactly at {a+b-k} union {a-b-k} on [-2, 3.5]".into(),
        ));
    }

    // Residue at the spectral dimension against its closed form.
    {
        let a = cfg.a;
        let params = ZetaParams::new(dp.clone(), a, 1.0);
        let rep = residue(&params, a + 1.0, cfg.prec, ResidueMode::Verified)?;
        let got = rep.residue.real().to_f64();
        let prec = cfg.prec + 64;
        let q = Float::with_val(prec, dp.q());
        let powf = |b: &Float, e: f64| b.clone().pow(Float::with_val(prec, e));
        let num = powf(&(q.clone().recip() - &q), a) * (powf(&q, a + 1.0) + 1u32);
        let den = (powf(&q, a) - &q) * q.clone().ln();
        let expect = (num / den).to_f64();
        let rel = ((got - expect) / expect).abs();
        checks.push(Check::new(
            "residue-at-dimension-closed-form",
            rel < 1e-10 && rep.error_bound.to_f64() < 1e-6 * got.abs(),
            format!("relative error {rel:.3e}, numeric-limit gap {:.3e}", rep.error_bound.to_f64()),
        ));
    }

    // Verification mode of the spectral dimension: finite just above it,
    // truncated sums growing without bound just below it.
    {
        let params = ZetaParams::new(dp.clone(), 2.0, 1.0);
        let n = spectral_dimension(&params)?;
        let above = zeta_closed(
            &params,
            &Complex::with_val(cfg.prec, (n + 0.25, 0.0)),
            cfg.prec,
            1e-20,
        )?;
        let finite = above.value.real().to_f64().is_finite();
        // Below the dimension the partial sums diverge: the increments
        // between doublings of l_max must themselves grow.
        let below = Complex::with_val(cfg.prec, (n - 0.25, 0.0));
        let at = |t: i64| -> Result<f64> {
            Ok(
                truncated_zeta(&params, &below, HalfInt::from_int(t), None, cfg.prec)?
                    .value
                    .real()
                    .to_f64(),
            )
        };
        let (v8, v16, v32) = (at(8)?, at(16)?, at(32)?);
        let growing = v32 - v16 > 1.2 * (v16 - v8) && v16 > v8;
        checks.push(Check::new(
            "spectral-dimension-window",
            finite && growing,
            format!(
                "zeta(n+1/4) finite: {finite}; truncated at n-1/4: {v8:.3e}, {v16:.3e}, {v32:.3e}"
            ),
        ));
    }

    // Scan for the vanishing residue two steps below the dimension.
    {
        let report = a2_criterion_scan(dp, 1.2, 3.5, cfg.prec)?;
        let pass = report
            .a_star
            .map(|r| (r - 2.0).abs() <= 1e-8)
            .unwrap_or(false);
        checks.push(Check::new(
            "residue-root-scan",
            pass,
            format!("root {:?}", report.a_star),
        ));
    }

    Ok(SuiteReport {
        suite: "zeta".into(),
        checks,
    })
}

// ---------------------------------------------------------------------------
// Integral suite
// ---------------------------------------------------------------------------

pub fn integral_suite(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let ictx = IntegralContext::new(cfg.dp.clone(), WeightSpec::haar(cfg.a), cfg.prec)?;
    let actx = ictx.algebra().clone();
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);

    // Normalized integral equals the Haar state on monomials and random
    // elements, including the a-sweep.
    {
        let mut ok = true;
        let mut worst = 0f64;
        for deg in 0..=4u32 {
            for m in monomials_of_degree(deg) {
                let report =
                    ictx.haar_equality_check(&AlgebraElement::from_monomial(m), 1e-9)?;
                ok &= report.pass;
                worst = worst.max(report.whole_diff).max(report.a_spread);
            }
        }
        for _ in 0..25 {
            let x = random_element(&mut rng, 5, 4);
            let report = ictx.haar_equality_check(&x, 1e-9)?;
            ok &= report.pass;
            worst = worst.max(report.whole_diff).max(report.a_spread);
        }
        checks.push(Check::new(
            "normalized-integral-equals-haar",
            ok,
            format!("worst deviation {worst:.3e} (monomials to degree 4 + 25 random)"),
        ));
    }

    // The normalized integral behaves as a state on samples.
    {
        let one = ictx
            .normalized_integral(&AlgebraElement::one())?
            .real()
            .to_f64();
        let mut ok = (one - 1.0).abs() < 1e-12;
        let mut min = f64::INFINITY;
        for _ in 0..20 {
            let x = random_element(&mut rng, 3, 3);
            let xx = actx.multiply(&actx.star(&x), &x);
            let v = ictx.normalized_integral(&xx)?.real().to_f64();
            min = min.min(v);
            ok &= v >= -1e-12;
        }
        checks.push(Check::new(
            "normalized-integral-state",
            ok,
            format!("unit value {one}, smallest positivity sample {min:.3e}"),
        ));
    }

    // Modular descriptor matches the Haar modular group exactly when b = 1.
    {
        let mut ok = true;
        for b in [-2.0f64, -1.0, -0.5, 0.5, 1.0, 2.0] {
            let a = if f64::abs(b) >= 2.0 { 2.5 } else { 2.0 };
            let desc = modular_descriptor(&WeightSpec::new(a, b))?;
            ok &= (desc == ModularDescriptor::haar_modular()) == (b == 1.0);
        }
        ok &= modular_descriptor(&WeightSpec::new(2.0, 1.0))?
            == modular_descriptor(&WeightSpec::new(3.0, 1.0))?;
        checks.push(Check::new(
            "modular-descriptor-criterion",
            ok,
            "descriptor equals the Haar one iff b = 1; a-independent".into(),
        ));
    }

    // Modular property of the integral on generator pairs and random pairs.
    {
        let mut ok = true;
        let mut worst = 0f64;
        for gx in Gen::ALL {
            for gy in Gen::ALL {
                let check =
                    ictx.modular_property_check(&gx.monomial(), &gy.monomial(), 1e-9)?;
                ok &= check.pass;
                worst = worst.max(check.abs_diff);
            }
        }
        for _ in 0..50 {
            let x = random_monomial(&mut rng, 3);
            let y = random_monomial(&mut rng, 3);
            let check = ictx.modular_property_check(&x, &y, 1e-9)?;
            ok &= check.pass;
            worst = worst.max(check.abs_diff);
        }
        checks.push(Check::new(
            "integral-modular-property",
            ok,
            format!("worst |phi(xy) - phi(theta(y)x)| = {worst:.3e}"),
        ));
    }

    Ok(SuiteReport {
        suite: "integral".into(),
        checks,
    })
}

/// All normal-ordered monomials of the given total degree.
pub fn monomials_of_degree(deg: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    if deg == 0 {
        out.push(Monomial::one());
        return out;
    }
    for p in 0..=deg {
        for m in 0..=(deg - p) {
            let n = deg - p - m;
            out.push(Monomial::new(Side::A, p, m, n));
            if p >= 1 {
                out.push(Monomial::new(Side::D, p, m, n));
            }
        }
    }
    out
}

/// Run the requested suites.
pub fn run_suites(cfg: &VerifyConfig, which: &str) -> Result<Vec<SuiteReport>> {
    let mut out = Vec::new();
    match which {
        "algebra" => out.push(algebra_suite(cfg)),
        "spectral" => out.push(spectral_suite(cfg)?),
        "zeta" => out.push(zeta_suite(cfg)?),
        "integral" => out.push(integral_suite(cfg)?),
        "all" => {
            out.push(algebra_suite(cfg));
            out.push(spectral_suite(cfg)?);
            out.push(zeta_suite(cfg)?);
            out.push(integral_suite(cfg)?);
        }
        other => {
            return Err(crate::error::Error::InvalidParameter(format!(
                "unknown suite {other:?} (expected algebra, spectral, zeta, integral or all)"
            )))
        }
    }
    Ok(out)
}
