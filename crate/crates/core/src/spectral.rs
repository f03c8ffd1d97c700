//! Truncated-Hilbert-space realization on the spinor-doubled GNS lattice.
//!
//! Basis vectors are indexed by (l, i, j) with l in half-integers, |i| <= l,
//! |j| <= l and l - i, l - j integers, doubled by a two-valued spinor
//! component. Operators are sparse maps on this lattice, truncated at l_max:
//! matrix elements whose target falls outside the lattice are dropped, so
//! every identity is asserted only on interior sites (the operator's
//! `interior_l` tracks how far in from l_max its action is exact; tests on
//! products of lattice-shift operators additionally stay clear of the inner
//! |i| = l, |j| = l walls, where truncated shift paths differ from the
//! untruncated ones).
//!
//! The module provides the diagonal modular/Casimir operators, the Dirac
//! operator and its |D|^-z powers, the lattice-shift representation of the
//! coordinate generators, brute-force weighted trace sums (the oracle for the
//! closed-form zeta layer), and operator-norm probes for the boundedness
//! claims.

use crate::error::Result;
use crate::numerics::{CompensatedSum, FloatContext, HalfInt};
use crate::qalgebra::{sigma_l_exponent, Gen, Monomial, Side};
use crate::zeta::ZetaParams;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rug::ops::CompleteRound;
use rug::ops::Pow;
use rug::{Complex, Float};
use std::collections::BTreeMap;

/// Spinor component of a lattice site.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Spinor {
    Up,
    Down,
}

/// Index (l, i, j) of a GNS basis vector.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LatticePoint {
    pub l: HalfInt,
    pub i: HalfInt,
    pub j: HalfInt,
}

impl LatticePoint {
    pub fn new(l: HalfInt, i: HalfInt, j: HalfInt) -> Self {
        LatticePoint { l, i, j }
    }

    /// Whether the index triple denotes an actual basis vector.
    pub fn is_valid(&self) -> bool {
        self.l.twice() >= 0
            && self.i.abs() <= self.l
            && self.j.abs() <= self.l
            && (self.l - self.i).is_integer()
            && (self.l - self.j).is_integer()
    }
}

/// A basis vector of the spinor-doubled space.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SpinorSite {
    pub point: LatticePoint,
    pub comp: Spinor,
}

/// The ordered site list for l <= l_max.
///
/// Ordering is l ascending, then i, then j, then spinor (up before down);
/// shell t = 2l holds 2 (t+1)^2 sites.
pub struct Lattice {
    l_max: HalfInt,
    sites: Vec<SpinorSite>,
    shell_offsets: Vec<usize>,
}

impl Lattice {
    pub fn new(l_max: HalfInt) -> Self {
        assert!(l_max.twice() >= 0, "l_max must be nonnegative");
        let t_max = l_max.twice();
        let mut sites = Vec::new();
        let mut shell_offsets = Vec::with_capacity(t_max as usize + 1);
        for t in 0..=t_max {
            shell_offsets.push(sites.len());
            let l = HalfInt::from_twice(t);
            let mut i2 = -t;
            while i2 <= t {
                let mut j2 = -t;
                while j2 <= t {
                    let point =
                        LatticePoint::new(l, HalfInt::from_twice(i2), HalfInt::from_twice(j2));
                    sites.push(SpinorSite {
                        point,
                        comp: Spinor::Up,
                    });
                    sites.push(SpinorSite {
                        point,
                        comp: Spinor::Down,
                    });
                    j2 += 2;
                }
                i2 += 2;
            }
        }
        Lattice {
            l_max,
            sites,
            shell_offsets,
        }
    }

    pub fn l_max(&self) -> HalfInt {
        self.l_max
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[SpinorSite] {
        &self.sites
    }

    pub fn site(&self, idx: usize) -> SpinorSite {
        self.sites[idx]
    }

    /// O(1) arithmetic index of a site; `None` if it lies outside the lattice.
    pub fn index_of(&self, s: &SpinorSite) -> Option<usize> {
        let p = s.point;
        if !p.is_valid() || p.l > self.l_max {
            return None;
        }
        let t = p.l.twice();
        let dim = (t + 1) as usize;
        let ii = ((p.i.twice() + t) / 2) as usize;
        let jj = ((p.j.twice() + t) / 2) as usize;
        let comp = match s.comp {
            Spinor::Up => 0,
            Spinor::Down => 1,
        };
        Some(self.shell_offsets[t as usize] + 2 * (ii * dim + jj) + comp)
    }
}

/// Sparse linear operator on the spinor lattice with high-precision entries.
///
/// `interior_l` is the largest l for which the truncated action agrees with
/// the untruncated one in the l-direction: l_max minus the operator's
/// l-bandwidth.
#[derive(Clone, Debug)]
pub struct TruncatedOperator {
    l_max: HalfInt,
    interior_l: HalfInt,
    entries: BTreeMap<(u32, u32), Complex>,
}

impl TruncatedOperator {
    fn empty(l_max: HalfInt, interior_l: HalfInt) -> Self {
        TruncatedOperator {
            l_max,
            interior_l,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(lattice: &Lattice, prec: u32) -> Self {
        let mut op = Self::empty(lattice.l_max(), lattice.l_max());
        for idx in 0..lattice.len() as u32 {
            op.entries
                .insert((idx, idx), Complex::with_val(prec, (1, 0)));
        }
        op
    }

    /// Diagonal operator from a per-site value.
    pub fn from_diag(lattice: &Lattice, f: impl Fn(&SpinorSite) -> Complex) -> Self {
        let mut op = Self::empty(lattice.l_max(), lattice.l_max());
        for (idx, site) in lattice.sites().iter().enumerate() {
            let v = f(site);
            if v.is_zero() {
                continue;
            }
            op.entries.insert((idx as u32, idx as u32), v);
        }
        op
    }

    pub fn l_max(&self) -> HalfInt {
        self.l_max
    }

    pub fn interior_l(&self) -> HalfInt {
        self.interior_l
    }

    pub fn num_entries(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(u32, u32), &Complex)> {
        self.entries.iter()
    }

    pub fn get(&self, row: u32, col: u32) -> Option<&Complex> {
        self.entries.get(&(row, col))
    }

    pub fn diagonal_at(&self, idx: u32) -> Option<&Complex> {
        self.get(idx, idx)
    }

    fn insert_add(&mut self, row: u32, col: u32, val: Complex) {
        use std::collections::btree_map::Entry;
        if val.is_zero() {
            return;
        }
        match self.entries.entry((row, col)) {
            Entry::Vacant(e) => {
                e.insert(val);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += val;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// Composition self . other (other applied first).
    pub fn compose(&self, other: &TruncatedOperator) -> TruncatedOperator {
        assert_eq!(self.l_max, other.l_max, "operators on different lattices");
        // Index self's entries by column for the contraction.
        let mut by_col: BTreeMap<u32, Vec<(u32, &Complex)>> = BTreeMap::new();
        for (&(r, c), v) in &self.entries {
            by_col.entry(c).or_default().push((r, v));
        }
        let interior = self.interior_l + other.interior_l - self.l_max;
        let mut out = Self::empty(self.l_max, interior);
        for (&(k, c), v) in &other.entries {
            if let Some(rows) = by_col.get(&k) {
                for &(r, sv) in rows {
                    let prec = sv.prec();
                    out.insert_add(r, c, (sv * v).complete(prec));
                }
            }
        }
        out
    }

    pub fn add(&self, other: &TruncatedOperator) -> TruncatedOperator {
        assert_eq!(self.l_max, other.l_max);
        let mut out = self.clone();
        out.interior_l = self.interior_l.min(other.interior_l);
        for (&(r, c), v) in &other.entries {
            out.insert_add(r, c, v.clone());
        }
        out
    }

    pub fn sub(&self, other: &TruncatedOperator) -> TruncatedOperator {
        let mut out = self.clone();
        out.interior_l = self.interior_l.min(other.interior_l);
        for (&(r, c), v) in &other.entries {
            out.insert_add(r, c, (-v).complete(v.prec()));
        }
        out
    }

    pub fn scale(&self, s: &Complex) -> TruncatedOperator {
        let mut out = Self::empty(self.l_max, self.interior_l);
        for (&(r, c), v) in &self.entries {
            out.insert_add(r, c, (v * s).complete(v.prec()));
        }
        out
    }

    /// Conjugate transpose in the lattice inner product.
    pub fn adjoint(&self) -> TruncatedOperator {
        let mut out = Self::empty(self.l_max, self.interior_l);
        for (&(r, c), v) in &self.entries {
            out.insert_add(c, r, v.clone().conj());
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Operator constructors
// ---------------------------------------------------------------------------

fn real_complex(prec: u32, re: Float) -> Complex {
    Complex::with_val(prec, (re, Float::new(prec)))
}

/// The left modular operator: diagonal q^(2j).
pub fn op_modular_l(ctx: &FloatContext, lattice: &Lattice) -> TruncatedOperator {
    TruncatedOperator::from_diag(lattice, |s| {
        real_complex(
            ctx.prec(),
            ctx.q_pow_half(HalfInt::from_twice(2 * s.point.j.twice())),
        )
    })
}

/// The right modular operator: diagonal q^(2i).
pub fn op_modular_r(ctx: &FloatContext, lattice: &Lattice) -> TruncatedOperator {
    TruncatedOperator::from_diag(lattice, |s| {
        real_complex(
            ctx.prec(),
            ctx.q_pow_half(HalfInt::from_twice(2 * s.point.i.twice())),
        )
    })
}

/// The Casimir: diagonal [l + 1/2]^2.
pub fn op_casimir(ctx: &FloatContext, lattice: &Lattice) -> TruncatedOperator {
    TruncatedOperator::from_diag(lattice, |s| {
        real_complex(
            ctx.prec(),
            ctx.q_number_f(s.point.l + HalfInt::HALF).square(),
        )
    })
}

/// The constant spinor matrix: q^-1 on the up component, q on the down one.
pub fn op_chi(ctx: &FloatContext, lattice: &Lattice) -> TruncatedOperator {
    TruncatedOperator::from_diag(lattice, |s| {
        let e = match s.comp {
            Spinor::Up => -1,
            Spinor::Down => 1,
        };
        real_complex(ctx.prec(), ctx.q_pow_half(HalfInt::from_int(e)))
    })
}

/// sqrt([l+1/2]^2 - [w]^2) at working precision; exact zero when |w| = l + 1/2.
fn ladder_coeff(ctx: &FloatContext, l: HalfInt, w: HalfInt) -> Float {
    if w.abs() == l + HalfInt::HALF {
        return Float::new(ctx.prec());
    }
    let big = ctx.q_number_f(l + HalfInt::HALF).square();
    let small = ctx.q_number_f(w).square();
    (big - small).sqrt()
}

/// The Dirac operator.
///
/// Diagonal entries (q q^(-2j) - 1)/(q^-1 - q) on up and
/// (1 - q^-1 q^(-2j))/(q^-1 - q) on down; off-diagonal entries
/// q^(-+1/2) q^(-j) sqrt([l+1/2]^2 - [j -+ 1/2]^2) shifting j by -+1 between
/// the spinor components. The operator does not move l, so its action is
/// exact on the whole truncated lattice.
pub fn build_dirac(ctx: &FloatContext, lattice: &Lattice) -> TruncatedOperator {
    let prec = ctx.prec();
    let wide = prec + 32;
    let denom = Float::with_val(wide, ctx.q_pow_half(HalfInt::from_int(-1)))
        - Float::with_val(wide, ctx.q_pow_half(HalfInt::ONE));
    let mut op = TruncatedOperator::empty(lattice.l_max(), lattice.l_max());
    for (idx, site) in lattice.sites().iter().enumerate() {
        let p = site.point;
        let qm2j = ctx.q_pow_half(HalfInt::from_twice(-2 * p.j.twice()));
        match site.comp {
            Spinor::Up => {
                let num = Float::with_val(wide, ctx.q_pow_half(HalfInt::ONE) * &qm2j) - 1u32;
                op.insert_add(idx as u32, idx as u32, real_complex(prec, num / &denom));
                // Lowering part into the down component at j - 1.
                let coeff = ladder_coeff(ctx, p.l, p.j - HalfInt::HALF);
                if !coeff.is_zero() {
                    let target = SpinorSite {
                        point: LatticePoint::new(p.l, p.i, p.j - HalfInt::ONE),
                        comp: Spinor::Down,
                    };
                    let row = lattice.index_of(&target).expect("in-shell j shift");
                    let val = ctx.q_pow_half(HalfInt::HALF - p.j) * coeff;
                    op.insert_add(row as u32, idx as u32, real_complex(prec, val));
                }
            }
            Spinor::Down => {
                let num =
                    1u32 - Float::with_val(wide, ctx.q_pow_half(HalfInt::from_int(-1)) * &qm2j);
                op.insert_add(idx as u32, idx as u32, real_complex(prec, num / &denom));
                // Raising part into the up component at j + 1.
                let coeff = ladder_coeff(ctx, p.l, p.j + HalfInt::HALF);
                if !coeff.is_zero() {
                    let target = SpinorSite {
                        point: LatticePoint::new(p.l, p.i, p.j + HalfInt::ONE),
                        comp: Spinor::Up,
                    };
                    let row = lattice.index_of(&target).expect("in-shell j shift");
                    let val = ctx.q_pow_half(-HalfInt::HALF - p.j) * coeff;
                    op.insert_add(row as u32, idx as u32, real_complex(prec, val));
                }
            }
        }
    }
    op
}

/// ln |D| on a single site: (spin - j) ln q + ln [l + 1/2], with
/// spin = +-1/2.
fn ln_abs_dirac(ctx: &FloatContext, site: &SpinorSite, prec: u32) -> Float {
    let spin_twice = match site.comp {
        Spinor::Up => 1i64,
        Spinor::Down => -1i64,
    };
    let e2 = spin_twice - site.point.j.twice();
    let mut out = Float::with_val(prec, ctx.ln_q());
    out *= Float::with_val(prec, e2);
    out /= 2u32;
    out += Float::with_val(prec, ctx.q_number_f(site.point.l + HalfInt::HALF)).ln();
    out
}

/// The diagonal operator |D|^(-z) for complex z.
pub fn op_absd_power(ctx: &FloatContext, lattice: &Lattice, z: &Complex) -> TruncatedOperator {
    let prec = ctx.prec();
    let wide = prec + 32;
    TruncatedOperator::from_diag(lattice, |s| {
        let ln_base = ln_abs_dirac(ctx, s, wide);
        let expo = (-(z * &ln_base).complete((wide, wide))).exp();
        Complex::with_val(prec, expo)
    })
}

// ---------------------------------------------------------------------------
// Approximating representation
// ---------------------------------------------------------------------------

/// Lattice displacement (2 dl, 2 di, 2 dj) of a generator under the
/// approximating representation.
fn gen_shift(g: Gen) -> (i64, i64, i64) {
    match g {
        Gen::A => (-1, -1, -1),
        Gen::B => (1, -1, 1),
        Gen::C => (-1, 1, -1),
        Gen::D => (1, 1, 1),
    }
}

/// Net lattice displacement (2 dl, 2 di, 2 dj) of a normal-ordered monomial.
pub fn monomial_shift(m: &Monomial) -> (i64, i64, i64) {
    let corner = match m.side() {
        Side::A => gen_shift(Gen::A),
        Side::D => gen_shift(Gen::D),
    };
    let p = m.corner_power() as i64;
    let bm = m.b_power() as i64;
    let cn = m.c_power() as i64;
    let b = gen_shift(Gen::B);
    let c = gen_shift(Gen::C);
    (
        p * corner.0 + bm * b.0 + cn * c.0,
        p * corner.1 + bm * b.1 + cn * c.1,
        p * corner.2 + bm * b.2 + cn * c.2,
    )
}

/// Whether the representation of a monomial is diagonal on the lattice
/// (no net displacement): exactly the monomials b^n c^n.
pub fn is_lattice_diagonal(m: &Monomial) -> bool {
    monomial_shift(m) == (0, 0, 0)
}

/// Target point and coefficient of one generator applied at `p`, or `None`
/// when the matrix element vanishes or leaves the lattice.
fn rho_gen_step(
    ctx: &FloatContext,
    l_max: HalfInt,
    g: Gen,
    p: LatticePoint,
) -> Option<(LatticePoint, Float)> {
    let (dl, di, dj) = gen_shift(g);
    let target = LatticePoint::new(
        p.l + HalfInt::from_twice(dl),
        p.i + HalfInt::from_twice(di),
        p.j + HalfInt::from_twice(dj),
    );
    if !target.is_valid() || target.l > l_max {
        return None;
    }
    let x1 = (p.l + p.i).twice() / 2; // l + i, a nonnegative integer
    let prec = ctx.prec();
    let coeff = match g {
        Gen::A => {
            if x1 == 0 {
                return None;
            }
            let t = 1u32 - Float::with_val(prec, ctx.q_pow_half(HalfInt::from_int(2 * x1)));
            t.sqrt()
        }
        Gen::D => {
            let t = 1u32 - Float::with_val(prec, ctx.q_pow_half(HalfInt::from_int(2 * (x1 + 1))));
            t.sqrt()
        }
        Gen::B => -ctx.q_pow_half(HalfInt::from_int(x1 + 1)),
        Gen::C => ctx.q_pow_half(HalfInt::from_int(x1)),
    };
    Some((target, coeff))
}

/// Sparse matrix of one generator under the approximating representation,
/// acting identically on both spinor components.
pub fn rho_gen(ctx: &FloatContext, lattice: &Lattice, g: Gen) -> TruncatedOperator {
    let prec = ctx.prec();
    let mut op = TruncatedOperator::empty(lattice.l_max(), lattice.l_max() - HalfInt::HALF);
    for (idx, site) in lattice.sites().iter().enumerate() {
        if let Some((target, coeff)) = rho_gen_step(ctx, lattice.l_max(), g, site.point) {
            let t = SpinorSite {
                point: target,
                comp: site.comp,
            };
            let row = lattice.index_of(&t).expect("validated target");
            op.insert_add(row as u32, idx as u32, real_complex(prec, coeff));
        }
    }
    op
}

/// Generator word of a normal-ordered monomial, leftmost factor first.
fn monomial_word(m: &Monomial) -> Vec<Gen> {
    let corner = match m.side() {
        Side::A => Gen::A,
        Side::D => Gen::D,
    };
    let mut word = Vec::with_capacity(m.degree() as usize);
    word.extend(std::iter::repeat(corner).take(m.corner_power() as usize));
    word.extend(std::iter::repeat(Gen::B).take(m.b_power() as usize));
    word.extend(std::iter::repeat(Gen::C).take(m.c_power() as usize));
    word
}

/// The approximating representation of a monomial: the generator matrices
/// composed in normal-order sequence (rightmost factor applied first).
/// Sites pushed beyond the truncation are dropped.
pub fn rho_apply(ctx: &FloatContext, lattice: &Lattice, m: &Monomial) -> TruncatedOperator {
    let word = monomial_word(m);
    if word.is_empty() {
        return TruncatedOperator::identity(lattice, ctx.prec());
    }
    let mut op: Option<TruncatedOperator> = None;
    for g in word.into_iter().rev() {
        let gen_op = rho_gen(ctx, lattice, g);
        op = Some(match op {
            None => gen_op,
            Some(acc) => gen_op.compose(&acc),
        });
    }
    op.unwrap()
}

/// Diagonal matrix element of rho(monomial) at one point, walking the word
/// with every intermediate site masked by the truncation.
fn rho_path_diag(ctx: &FloatContext, l_max: HalfInt, m: &Monomial, start: LatticePoint) -> Float {
    let word = monomial_word(m);
    let mut acc = Float::with_val(ctx.prec(), 1);
    let mut at = start;
    for g in word.into_iter().rev() {
        match rho_gen_step(ctx, l_max, g, at) {
            None => return Float::new(ctx.prec()),
            Some((next, coeff)) => {
                acc *= coeff;
                at = next;
            }
        }
    }
    debug_assert_eq!(at, start, "diagonal path must close");
    acc
}

// ---------------------------------------------------------------------------
// Brute-force weighted trace sums
// ---------------------------------------------------------------------------

/// Result of a truncated trace sum.
#[derive(Debug)]
pub struct TruncatedZeta {
    pub value: Complex,
    /// Geometric estimate of the dropped l > l_max tail.
    pub tail_estimate: Float,
}

/// Brute-force sum of the weighted trace over the truncated lattice, in the
/// deterministic site order with compensated accumulation.
///
/// Per site the summand is
/// `const q^((z-2a)j) q^((2b + 2 shift_i) i) q^(2 shift_l l) [l+1/2]^(-z)`
/// times the spinor factor `q^(-+z/2)` and, when an insertion monomial is
/// given, the diagonal of its lattice representation (masked by truncation).
pub fn truncated_zeta(
    params: &ZetaParams,
    z: &Complex,
    l_max: HalfInt,
    insertion: Option<&Monomial>,
    prec: u32,
) -> Result<TruncatedZeta> {
    params.validate()?;
    let ctx = FloatContext::new(params.dp().clone(), prec)?;
    let wide = prec + 32;

    // Spinor factors q^(-z/2) (up) and q^(z/2) (down).
    let half_z = z / Complex::with_val(wide, 2);
    let up_fac = ctx.q_complex_pow(&(-half_z.clone()));
    let dn_fac = ctx.q_complex_pow(&half_z);

    // Ratios along j and i within a shell.
    let zm2a = z - Complex::with_val(wide, params.a() * 2.0);
    let r_j = ctx.q_complex_pow(&zm2a);
    let i_exp = 2.0 * params.b() + 2.0 * params.shift_i() as f64;
    let r_i = ctx.q_pow_f64(i_exp);

    let const_f = Float::with_val(wide, params.const_factor());

    let mut sum = CompensatedSum::new(wide);
    let mut prev_shell_abs: Option<Float> = None;
    let mut last_ratio = Float::with_val(wide, 0);
    let mut last_shell_abs = Float::with_val(wide, 0);

    let ins_diag: Option<Vec<Float>> = insertion.map(|m| {
        let lat = Lattice::new(l_max);
        lat.sites()
            .iter()
            .map(|s| rho_path_diag(&ctx, l_max, m, s.point))
            .collect()
    });

    let mut site_idx = 0usize;
    for t in 0..=l_max.twice() {
        let l = HalfInt::from_twice(t);
        // [l+1/2]^(-z), the l-dependent insertion power and the constant.
        let ln_qnum = ctx.q_number_f(l + HalfInt::HALF).ln();
        let mut shell = (-(z * Complex::with_val(wide, (ln_qnum, 0)))).exp();
        shell *= ctx.q_pow_f64(params.shift_l() as f64 * t as f64); // q^(2 shift_l l)
        shell *= &const_f;

        let mut shell_sum = Complex::with_val(wide, (0, 0));
        // Start values q^((z-2a)(-l)) and q^(i_exp (-l)), advanced by the
        // per-step ratios.
        let mut i_fac = ctx.q_pow_f64(i_exp * (-(t as f64)) / 2.0);
        let j_start =
            ctx.q_complex_pow(&(zm2a.clone() * Complex::with_val(wide, -(t as f64) / 2.0)));
        for _ii in 0..=t {
            let mut j_fac = j_start.clone();
            for _jj in 0..=t {
                let mut w = (&shell * &j_fac).complete((wide, wide));
                w *= &i_fac;
                if let Some(diag) = &ins_diag {
                    let up = (&w * &diag[site_idx]).complete((wide, wide));
                    let dn = (&w * &diag[site_idx + 1]).complete((wide, wide));
                    let tu = up * &up_fac;
                    let td = dn * &dn_fac;
                    sum.add(&tu);
                    shell_sum += &tu;
                    sum.add(&td);
                    shell_sum += &td;
                } else {
                    let tu = (&w * &up_fac).complete((wide, wide));
                    let td = w * &dn_fac;
                    sum.add(&tu);
                    shell_sum += &tu;
                    sum.add(&td);
                    shell_sum += &td;
                }
                site_idx += 2;
                j_fac *= &r_j;
            }
            i_fac *= &r_i;
        }

        let abs = shell_sum.abs().into_real_imag().0;
        if let Some(prev) = prev_shell_abs.take() {
            if prev.is_zero() {
                last_ratio = Float::with_val(wide, 0);
            } else {
                last_ratio = (&abs / &prev).complete(wide);
            }
        }
        last_shell_abs = abs.clone();
        prev_shell_abs = Some(abs);
    }

    // Geometric tail estimate from the last measured shell ratio.
    let tail = if last_shell_abs.is_zero() {
        Float::with_val(prec, 0)
    } else if last_ratio.clone().abs() < 1 && !last_ratio.is_zero() {
        let gm = last_ratio.clone() / (1u32 - last_ratio.clone());
        Float::with_val(prec, last_shell_abs * gm)
    } else {
        Float::with_val(prec, rug::float::Special::Infinity)
    };

    Ok(TruncatedZeta {
        value: Complex::with_val(prec, sum.value()),
        tail_estimate: tail,
    })
}

// ---------------------------------------------------------------------------
// Norm probes
// ---------------------------------------------------------------------------

/// Which operator a norm probe assembles.
#[derive(Clone, Debug)]
pub enum ProbeKind {
    /// [D, rho(x)] twisted by sigma_L.
    TwistedCommutator(Monomial),
    /// [|D|, rho(x)] twisted by sigma_L.
    Lipschitz(Monomial),
    /// The regularity bracket |D|^r [|D|^s, rho(x)]_{sigma^s} |D|^-s.
    PowerRegularity { x: Monomial, s: f64, r: f64 },
}

impl ProbeKind {
    fn monomial(&self) -> &Monomial {
        match self {
            ProbeKind::TwistedCommutator(x) => x,
            ProbeKind::Lipschitz(x) => x,
            ProbeKind::PowerRegularity { x, .. } => x,
        }
    }
}

struct Csr {
    n: usize,
    indptr: Vec<usize>,
    cols: Vec<u32>,
    data: Vec<f64>,
}

impl Csr {
    fn from_triplets(n: usize, mut triplets: Vec<(u32, u32, f64)>) -> Csr {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut data = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            indptr[r as usize + 1] += 1;
            cols.push(c);
            data.push(v);
        }
        for r in 0..n {
            indptr[r + 1] += indptr[r];
        }
        Csr {
            n,
            indptr,
            cols,
            data,
        }
    }

    fn transpose(&self) -> Csr {
        let mut triplets = Vec::with_capacity(self.data.len());
        for r in 0..self.n {
            for k in self.indptr[r]..self.indptr[r + 1] {
                triplets.push((self.cols[k], r as u32, self.data[k]));
            }
        }
        Csr::from_triplets(self.n, triplets)
    }

    fn matvec(&self, v: &[f64], out: &mut [f64]) {
        for r in 0..self.n {
            let mut acc = 0.0;
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.data[k] * v[self.cols[k] as usize];
            }
            out[r] = acc;
        }
    }
}

/// Largest singular value by power iteration on A^T A with a fixed seed
/// vector; capped at `max_iter` iterations.
fn sigma_max(a: &Csr, seed: u64, max_iter: usize, tol: f64) -> f64 {
    let n = a.n;
    if n == 0 || a.data.is_empty() {
        return 0.0;
    }
    let at = a.transpose();
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm0);
    let mut w = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut sigma = 0.0f64;
    for _ in 0..max_iter {
        a.matvec(&v, &mut w);
        let new_sigma = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if new_sigma == 0.0 {
            return 0.0;
        }
        at.matvec(&w, &mut u);
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return new_sigma;
        }
        v.iter_mut().zip(&u).for_each(|(x, y)| *x = y / norm);
        if (new_sigma - sigma).abs() <= tol * new_sigma {
            return new_sigma;
        }
        sigma = new_sigma;
    }
    sigma
}

/// Probe precision: differences between neighboring |D|-scales cancel to
/// relative depth about q^(2 l_max), so entry assembly needs that many bits
/// before the f64 downcast.
fn probe_prec(ctx: &FloatContext, l_max: HalfInt) -> u32 {
    let q = ctx.dp().q().to_f64();
    let depth = (2.0 * l_max.to_f64() * (1.0 / q).log2()).ceil() as u32;
    (depth + 96).max(ctx.prec())
}

/// Cached per-probe scalars: sqrt(q), ln q, the commutator denominator and
/// the per-shell q-numbers, all at the probe precision.
struct ProbeTables {
    prec: u32,
    v: Float,
    denom: Float,
    lnq: Float,
    /// [l + 1/2] indexed by the shell t = 2l.
    qnum: Vec<Float>,
    /// ln [l + 1/2] indexed by t = 2l.
    ln_qnum: Vec<Float>,
}

impl ProbeTables {
    fn new(ctx: &FloatContext, l_max: HalfInt, prec: u32) -> Self {
        let v = Float::with_val(prec, ctx.dp().q()).sqrt();
        let lnq = Float::with_val(prec, ctx.dp().q()).ln();
        let denom = v.clone().pow(-2i32) - v.clone().pow(2u32);
        let mut qnum = Vec::with_capacity(l_max.twice() as usize + 1);
        let mut ln_qnum = Vec::with_capacity(l_max.twice() as usize + 1);
        for t in 0..=l_max.twice() {
            // [l + 1/2] with 2(l + 1/2) = t + 1.
            let e = (t + 1) as u32;
            let x = (v.clone().pow(-(e as i32)) - v.clone().pow(e)) / &denom;
            ln_qnum.push(x.clone().ln());
            qnum.push(x);
        }
        ProbeTables {
            prec,
            v,
            denom,
            lnq,
            qnum,
            ln_qnum,
        }
    }

    /// q^e for a half-integer e.
    fn q_pow(&self, e: HalfInt) -> Float {
        let t = e.twice();
        if t >= 0 {
            self.v.clone().pow(t as u32)
        } else {
            self.v.clone().pow(t as i32)
        }
    }

    /// The q-number [x] for a half-integer x.
    fn q_number(&self, x: HalfInt) -> Float {
        (self.q_pow(-x) - self.q_pow(x)) / &self.denom
    }

    /// sqrt([l+1/2]^2 - [w]^2), `None` on the exact zero |w| = l + 1/2.
    fn ladder(&self, l: HalfInt, w: HalfInt) -> Option<Float> {
        if w.abs() == l + HalfInt::HALF {
            return None;
        }
        let big = self.qnum[l.twice() as usize].clone().square();
        let small = self.q_number(w).square();
        Some((big - small).sqrt())
    }

    /// ln |D| at a site: (spin - j) ln q + ln [l + 1/2].
    fn ln_abs_dirac(&self, site: &SpinorSite) -> Float {
        let spin_twice = match site.comp {
            Spinor::Up => 1i64,
            Spinor::Down => -1i64,
        };
        let e2 = spin_twice - site.point.j.twice();
        let mut out = Float::with_val(self.prec, e2) * &self.lnq;
        out /= 2u32;
        out += &self.ln_qnum[site.point.l.twice() as usize];
        out
    }

    /// rho(x) column at a start site: the word is a chain of single-target
    /// shifts, so there is at most one matrix element per column.
    fn rho_column(
        &self,
        l_max: HalfInt,
        word: &[Gen],
        start: LatticePoint,
    ) -> Option<(LatticePoint, Float)> {
        let mut acc = Float::with_val(self.prec, 1);
        let mut at = start;
        for g in word.iter().rev() {
            let (dl, di, dj) = gen_shift(*g);
            let target = LatticePoint::new(
                at.l + HalfInt::from_twice(dl),
                at.i + HalfInt::from_twice(di),
                at.j + HalfInt::from_twice(dj),
            );
            if !target.is_valid() || target.l > l_max {
                return None;
            }
            let x1 = (at.l + at.i).twice() / 2;
            let coeff = match g {
                Gen::A => {
                    if x1 == 0 {
                        return None;
                    }
                    (1u32 - self.q_pow(HalfInt::from_int(2 * x1))).sqrt()
                }
                Gen::D => (1u32 - self.q_pow(HalfInt::from_int(2 * (x1 + 1)))).sqrt(),
                Gen::B => -self.q_pow(HalfInt::from_int(x1 + 1)),
                Gen::C => self.q_pow(HalfInt::from_int(x1)),
            };
            acc *= coeff;
            at = target;
        }
        Some((at, acc))
    }

    /// Dirac column at a site as (target, value) pairs.
    fn dirac_column(&self, site: &SpinorSite) -> Vec<(SpinorSite, Float)> {
        let p = site.point;
        let qm2j = self.q_pow(HalfInt::from_twice(-2 * p.j.twice()));
        let mut out = Vec::with_capacity(2);
        match site.comp {
            Spinor::Up => {
                let diag = (self.q_pow(HalfInt::ONE) * &qm2j - 1u32) / &self.denom;
                out.push((*site, diag));
                if let Some(coeff) = self.ladder(p.l, p.j - HalfInt::HALF) {
                    let target = SpinorSite {
                        point: LatticePoint::new(p.l, p.i, p.j - HalfInt::ONE),
                        comp: Spinor::Down,
                    };
                    out.push((target, self.q_pow(HalfInt::HALF - p.j) * coeff));
                }
            }
            Spinor::Down => {
                let diag = (1u32 - self.q_pow(HalfInt::from_int(-1)) * &qm2j) / &self.denom;
                out.push((*site, diag));
                if let Some(coeff) = self.ladder(p.l, p.j + HalfInt::HALF) {
                    let target = SpinorSite {
                        point: LatticePoint::new(p.l, p.i, p.j + HalfInt::ONE),
                        comp: Spinor::Up,
                    };
                    out.push((target, self.q_pow(-HalfInt::HALF - p.j) * coeff));
                }
            }
        }
        out
    }
}

/// Assemble the probe operator at one truncation, restricted to interior
/// sites, and estimate its largest singular value.
fn probe_norm_at(ctx: &FloatContext, kind: &ProbeKind, l_max: HalfInt, seed: u64) -> f64 {
    let lattice = Lattice::new(l_max);
    let n = lattice.len();
    let prec = probe_prec(ctx, l_max);
    let tables = ProbeTables::new(ctx, l_max, prec);
    let x = kind.monomial();
    let word = monomial_word(x);
    let bandwidth = HalfInt::from_twice(x.degree() as i64);
    let interior = l_max - bandwidth;
    let sigma_exp = sigma_l_exponent(x);

    let in_interior = |s: &SpinorSite| s.point.l <= interior;

    let mut triplets: Vec<(u32, u32, f64)> = Vec::new();
    match kind {
        ProbeKind::TwistedCommutator(_) => {
            // Columns of D rho(x) - q^w rho(x) D; the big diagonal scales of
            // D cancel against the sigma_L twist, hence the high-precision
            // assembly.
            let lam = tables.q_pow(HalfInt::from_int(sigma_exp));
            for (idx, site) in lattice.sites().iter().enumerate() {
                if !in_interior(site) {
                    continue;
                }
                let mut entries: BTreeMap<usize, Float> = BTreeMap::new();
                if let Some((mid, r)) = tables.rho_column(l_max, &word, site.point) {
                    let mid_site = SpinorSite {
                        point: mid,
                        comp: site.comp,
                    };
                    for (target, dv) in tables.dirac_column(&mid_site) {
                        if let Some(row) = lattice.index_of(&target) {
                            let term = (&r * &dv).complete(prec);
                            *entries.entry(row).or_insert_with(|| Float::new(prec)) += term;
                        }
                    }
                }
                for (mid_site, dv) in tables.dirac_column(site) {
                    if let Some((target, r)) = tables.rho_column(l_max, &word, mid_site.point) {
                        let t = SpinorSite {
                            point: target,
                            comp: mid_site.comp,
                        };
                        if let Some(row) = lattice.index_of(&t) {
                            let val = -(&lam * &r).complete(prec) * dv;
                            *entries.entry(row).or_insert_with(|| Float::new(prec)) += val;
                        }
                    }
                }
                for (row, v) in entries {
                    if in_interior(&lattice.site(row)) {
                        let f = v.to_f64();
                        if f != 0.0 {
                            triplets.push((row as u32, idx as u32, f));
                        }
                    }
                }
            }
        }
        ProbeKind::Lipschitz(_) => {
            let lam = tables.q_pow(HalfInt::from_int(sigma_exp));
            for (idx, site) in lattice.sites().iter().enumerate() {
                if !in_interior(site) {
                    continue;
                }
                if let Some((target, r)) = tables.rho_column(l_max, &word, site.point) {
                    let t = SpinorSite {
                        point: target,
                        comp: site.comp,
                    };
                    if let Some(row) = lattice.index_of(&t) {
                        if in_interior(&lattice.site(row)) {
                            let absd_t = tables.ln_abs_dirac(&t).exp();
                            let absd_s = tables.ln_abs_dirac(site).exp();
                            let val = r * (absd_t - (&lam * &absd_s).complete(prec));
                            let f = val.to_f64();
                            if f != 0.0 {
                                triplets.push((row as u32, idx as u32, f));
                            }
                        }
                    }
                }
            }
        }
        ProbeKind::PowerRegularity { s, r: rr, .. } => {
            // A rho-entry t -> u becomes |D_u|^r ((|D_u|/|D_t|)^s - q^(w s)),
            // evaluated through log-ratios so the near cancellation survives
            // the downcast.
            let s_f = Float::with_val(prec, *s);
            let r_f = Float::with_val(prec, *rr);
            let lam_s = {
                let e = Float::with_val(prec, sigma_exp as f64 * *s);
                (e * &tables.lnq).exp()
            };
            for (idx, site) in lattice.sites().iter().enumerate() {
                if !in_interior(site) {
                    continue;
                }
                if let Some((target, rv)) = tables.rho_column(l_max, &word, site.point) {
                    let t = SpinorSite {
                        point: target,
                        comp: site.comp,
                    };
                    if let Some(row) = lattice.index_of(&t) {
                        if in_interior(&lattice.site(row)) {
                            let ln_u = tables.ln_abs_dirac(&t);
                            let ln_t = tables.ln_abs_dirac(site);
                            let ratio_s = ((ln_u.clone() - &ln_t) * &s_f).exp();
                            let bracket = ratio_s - &lam_s;
                            let val = (ln_u * &r_f).exp() * bracket * rv;
                            let f = val.to_f64();
                            if f != 0.0 {
                                triplets.push((row as u32, idx as u32, f));
                            }
                        }
                    }
                }
            }
        }
    }
    let csr = Csr::from_triplets(n, triplets);
    sigma_max(&csr, seed, 200, 1e-6)
}

/// Largest-singular-value estimates of a probe operator along a schedule of
/// truncations. A numerical probe, not a proof: it reports the plateau (or
/// absence of one) of the truncated operator norms.
pub fn norm_probe(
    ctx: &FloatContext,
    kind: &ProbeKind,
    schedule: &[HalfInt],
    seed: u64,
) -> Vec<f64> {
    schedule
        .iter()
        .map(|&l_max| probe_norm_at(ctx, kind, l_max, seed))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::numerics::DeformationParameter;
    use rug::Rational;

    fn fctx(num: i64, den: i64, prec: u32) -> FloatContext {
        FloatContext::new(
            DeformationParameter::from_q(Rational::from((num, den))).unwrap(),
            prec,
        )
        .unwrap()
    }

    #[test]
    fn lattice_sizes() {
        assert_eq!(Lattice::new(HalfInt::ZERO).len(), 2);
        assert_eq!(Lattice::new(HalfInt::HALF).len(), 10);
        assert_eq!(Lattice::new(HalfInt::ONE).len(), 28);
    }

    #[test]
    fn lattice_index_round_trip() {
        let lat = Lattice::new(HalfInt::from_twice(5));
        for (idx, site) in lat.sites().iter().enumerate() {
            assert_eq!(lat.index_of(site), Some(idx));
        }
        let outside = SpinorSite {
            point: LatticePoint::new(HalfInt::from_int(3), HalfInt::ZERO, HalfInt::ZERO),
            comp: Spinor::Up,
        };
        assert_eq!(lat.index_of(&outside), None);
    }

    #[test]
    fn diagonal_operator_values() {
        let ctx = fctx(1, 4, 128);
        let lat = Lattice::new(HalfInt::ONE);
        let dl = op_modular_l(&ctx, &lat);
        let site = SpinorSite {
            point: LatticePoint::new(HalfInt::HALF, HalfInt::HALF, HalfInt::HALF),
            comp: Spinor::Up,
        };
        let idx = lat.index_of(&site).unwrap() as u32;
        // q^(2j) = q at j = 1/2.
        let got = dl.diagonal_at(idx).unwrap().real().to_f64();
        assert!((got - 0.25).abs() < 1e-30);

        // Delta_R is 1 at i = 0.
        let dr = op_modular_r(&ctx, &lat);
        let site0 = SpinorSite {
            point: LatticePoint::new(HalfInt::ONE, HalfInt::ZERO, HalfInt::ZERO),
            comp: Spinor::Down,
        };
        let idx0 = lat.index_of(&site0).unwrap() as u32;
        assert!((dr.diagonal_at(idx0).unwrap().real().to_f64() - 1.0).abs() < 1e-30);

        // Casimir at l = 0 is [1/2]^2.
        let cas = op_casimir(&ctx, &lat);
        let expect = ctx.q_number_f(HalfInt::HALF).square().to_f64();
        assert!((cas.diagonal_at(0).unwrap().real().to_f64() - expect).abs() < 1e-25);
    }

    #[test]
    fn dirac_diagonal_example() {
        // Up-diagonal at j = 0, q = 1/4: (q - 1)/(q^-1 - q) = -1/5.
        let ctx = fctx(1, 4, 128);
        let lat = Lattice::new(HalfInt::ONE);
        let d = build_dirac(&ctx, &lat);
        let site = SpinorSite {
            point: LatticePoint::new(HalfInt::ONE, HalfInt::ZERO, HalfInt::ZERO),
            comp: Spinor::Up,
        };
        let idx = lat.index_of(&site).unwrap() as u32;
        let got = d.diagonal_at(idx).unwrap().real().to_f64();
        assert!((got + 0.2).abs() < 1e-30, "got {got}");
    }

    #[test]
    fn dirac_top_weight_has_no_raising_entry() {
        // The ladder factor vanishes at j = l, so nothing leaves the shell.
        let ctx = fctx(1, 4, 128);
        let lat = Lattice::new(HalfInt::from_int(2));
        let d = build_dirac(&ctx, &lat);
        let top = SpinorSite {
            point: LatticePoint::new(HalfInt::from_int(2), HalfInt::ZERO, HalfInt::from_int(2)),
            comp: Spinor::Down,
        };
        let col = lat.index_of(&top).unwrap() as u32;
        let entries: Vec<_> = d.entries().filter(|(&(_, c), _)| c == col).collect();
        assert_eq!(entries.len(), 1, "only the diagonal entry survives at j = l");
    }

    #[test]
    fn dirac_is_symmetric() {
        let ctx = fctx(1, 2, 128);
        let lat = Lattice::new(HalfInt::from_int(3));
        let d = build_dirac(&ctx, &lat);
        for (&(r, c), v) in d.entries() {
            let vt = d.get(c, r).expect("symmetric support");
            let diff = (v - vt).complete((160, 160)).abs().real().to_f64();
            assert!(diff < 1e-35);
        }
    }

    #[test]
    fn dirac_squared_is_diagonal_identity() {
        // D^2 agrees with Casimir / (chi Delta_L) entrywise.
        let ctx = fctx(1, 2, 128);
        let lat = Lattice::new(HalfInt::from_int(4));
        let d = build_dirac(&ctx, &lat);
        let d2 = d.compose(&d);
        let chi = op_chi(&ctx, &lat);
        let dl = op_modular_l(&ctx, &lat);
        let cas = op_casimir(&ctx, &lat);
        for idx in 0..lat.len() as u32 {
            let lhs = d2
                .diagonal_at(idx)
                .map(|v| v.real().to_f64())
                .unwrap_or(0.0);
            let chi_v = chi.diagonal_at(idx).unwrap().real().to_f64();
            let dl_v = dl.diagonal_at(idx).unwrap().real().to_f64();
            let cas_v = cas.diagonal_at(idx).unwrap().real().to_f64();
            let rhs = cas_v / (chi_v * dl_v);
            let scale = rhs.abs().max(1.0);
            assert!(
                ((lhs - rhs) / scale).abs() < 1e-30,
                "site {idx}: {lhs} vs {rhs}"
            );
        }
        // Off-diagonal entries of D^2 cancel to rounding level.
        for (&(r, c), v) in d2.entries() {
            if r != c {
                let scale = d2
                    .diagonal_at(r)
                    .map(|x| x.real().to_f64().abs())
                    .unwrap_or(1.0)
                    .max(1.0);
                assert!(v.real().to_f64().abs() / scale < 1e-30);
            }
        }
    }

    #[test]
    fn absd_power_examples() {
        let ctx = fctx(1, 4, 128);
        let lat = Lattice::new(HalfInt::ONE);
        // z = 0 gives the identity.
        let id = op_absd_power(&ctx, &lat, &Complex::with_val(128, (0, 0)));
        for idx in 0..lat.len() as u32 {
            assert!((id.diagonal_at(idx).unwrap().real().to_f64() - 1.0).abs() < 1e-30);
        }
        // (l = 1/2, j = 1/2, up, z = 1): (q^(1/2) q^(-1/2) [1])^-1 = 1.
        let p1 = op_absd_power(&ctx, &lat, &Complex::with_val(128, (1, 0)));
        let site = SpinorSite {
            point: LatticePoint::new(HalfInt::HALF, HalfInt::HALF, HalfInt::HALF),
            comp: Spinor::Up,
        };
        let idx = lat.index_of(&site).unwrap() as u32;
        assert!((p1.diagonal_at(idx).unwrap().real().to_f64() - 1.0).abs() < 1e-30);

        // z = -2 reproduces the D^2 diagonal.
        let pm2 = op_absd_power(&ctx, &lat, &Complex::with_val(128, (-2, 0)));
        let d = build_dirac(&ctx, &lat);
        let d2 = d.compose(&d);
        for idx in 0..lat.len() as u32 {
            let got = pm2.diagonal_at(idx).unwrap().real().to_f64();
            let expect = d2.diagonal_at(idx).unwrap().real().to_f64();
            assert!((got - expect).abs() / expect.abs().max(1.0) < 1e-25);
        }
    }

    #[test]
    fn rho_single_step_example() {
        // rho(c) at (l=1/2, i=-1/2, j=1/2): coefficient q^0 = 1 into the
        // l = 0 site.
        let ctx = fctx(1, 4, 128);
        let lat = Lattice::new(HalfInt::ONE);
        let rc = rho_gen(&ctx, &lat, Gen::C);
        let from = SpinorSite {
            point: LatticePoint::new(HalfInt::HALF, -HalfInt::HALF, HalfInt::HALF),
            comp: Spinor::Up,
        };
        let to = SpinorSite {
            point: LatticePoint::new(HalfInt::ZERO, HalfInt::ZERO, HalfInt::ZERO),
            comp: Spinor::Up,
        };
        let col = lat.index_of(&from).unwrap() as u32;
        let row = lat.index_of(&to).unwrap() as u32;
        let v = rc.get(row, col).unwrap().real().to_f64();
        assert!((v - 1.0).abs() < 1e-30);
    }

    #[test]
    fn rho_unit_is_identity() {
        let ctx = fctx(1, 4, 96);
        let lat = Lattice::new(HalfInt::ONE);
        let id = rho_apply(&ctx, &lat, &Monomial::one());
        assert_eq!(id.num_entries(), lat.len());
    }

    #[test]
    fn rho_diagonal_selection_rule() {
        // Among monomials of degree <= 4 only b^n c^n have a diagonal.
        let ctx = fctx(1, 2, 96);
        let lat = Lattice::new(HalfInt::from_int(3));
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
                        let expect_diag = side == Side::A && p == 0 && m == n;
                        assert_eq!(is_lattice_diagonal(&mono), expect_diag, "{mono}");
                        let op = rho_apply(&ctx, &lat, &mono);
                        let has_diag =
                            (0..lat.len() as u32).any(|i| op.diagonal_at(i).is_some());
                        assert_eq!(has_diag, expect_diag, "monomial {mono}");
                    }
                }
            }
        }
    }

    #[test]
    fn rho_bncn_diagonal_value() {
        // rho(b^n c^n) is diagonal (-1)^n q^(2n(l+i)) q^n away from the mask.
        let ctx = fctx(1, 2, 128);
        let lat = Lattice::new(HalfInt::from_int(4));
        for n in 1..=2u32 {
            let mono = Monomial::new(Side::A, 0, n, n);
            let op = rho_apply(&ctx, &lat, &mono);
            for (idx, site) in lat.sites().iter().enumerate() {
                let p = site.point;
                let x2 = (p.l - p.i).twice() / 2;
                let x4 = (p.l + p.j).twice() / 2;
                let got = op
                    .diagonal_at(idx as u32)
                    .map(|v| v.real().to_f64())
                    .unwrap_or(0.0);
                if x2 >= n as i64 && x4 >= n as i64 {
                    let x1 = (p.l + p.i).twice() / 2;
                    let expect = (-1f64).powi(n as i32)
                        * 0.5f64.powi((2 * n as i64 * x1 + n as i64) as i32);
                    assert!(
                        (got - expect).abs() < 1e-25,
                        "n={n} site {p:?}: {got} vs {expect}"
                    );
                } else {
                    assert_eq!(got, 0.0, "masked site should vanish at {p:?}");
                }
            }
        }
    }

    #[test]
    fn rho_star_compatibility() {
        // rho(a)^dag = rho(d) and rho(b)^dag = -q rho(c), exactly including
        // the truncation masks.
        let ctx = fctx(1, 4, 128);
        let lat = Lattice::new(HalfInt::from_int(3));
        let ra = rho_gen(&ctx, &lat, Gen::A);
        let rd = rho_gen(&ctx, &lat, Gen::D);
        let diff = ra.adjoint().sub(&rd);
        for (_, v) in diff.entries() {
            assert!(v.clone().abs().real().to_f64() < 1e-35);
        }
        let rb = rho_gen(&ctx, &lat, Gen::B);
        let rc = rho_gen(&ctx, &lat, Gen::C);
        let minus_q = Complex::with_val(128, (-0.25, 0.0));
        let diff2 = rb.adjoint().sub(&rc.scale(&minus_q));
        for (_, v) in diff2.entries() {
            assert!(v.clone().abs().real().to_f64() < 1e-35);
        }
    }

    #[test]
    fn truncated_zeta_single_shell() {
        // l_max = 0: the two spinor sites give (q^(-z/2) + q^(z/2)) [1/2]^-z.
        let dp = DeformationParameter::from_q(Rational::from((1, 2))).unwrap();
        let params = ZetaParams::new(dp.clone(), 2.0, 1.0);
        let z = Complex::with_val(128, (5, 0));
        let got = truncated_zeta(&params, &z, HalfInt::ZERO, None, 128).unwrap();
        let ctx = FloatContext::new(dp, 128).unwrap();
        let q = 0.5f64;
        let qn = ctx.q_number_f(HalfInt::HALF).to_f64();
        let expect = (q.powf(-2.5) + q.powf(2.5)) * qn.powf(-5.0);
        assert!((got.value.real().to_f64() - expect).abs() < 1e-12);
    }

    #[test]
    fn truncated_zeta_monotone_in_truncation() {
        let dp = DeformationParameter::from_q(Rational::from((1, 2))).unwrap();
        let params = ZetaParams::new(dp, 2.0, 1.0);
        let z = Complex::with_val(96, (4, 0));
        let mut prev = 0.0;
        for t in [2i64, 6, 10, 16] {
            let v = truncated_zeta(&params, &z, HalfInt::from_twice(t), None, 96)
                .unwrap()
                .value
                .real()
                .to_f64();
            assert!(v > prev, "not monotone at 2l = {t}");
            prev = v;
        }
    }

    #[test]
    fn truncated_zeta_rejects_divergent_weights() {
        let dp = DeformationParameter::from_q(Rational::from((1, 2))).unwrap();
        let params = ZetaParams::new(dp, 1.0, 1.0);
        let z = Complex::with_val(96, (5, 0));
        assert!(matches!(
            truncated_zeta(&params, &z, HalfInt::from_int(2), None, 96),
            Err(Error::DivergentParameters { .. })
        ));
    }

    #[test]
    fn norm_probe_of_unit_vanishes() {
        let ctx = fctx(1, 2, 128);
        let kind = ProbeKind::TwistedCommutator(Monomial::one());
        let norms = norm_probe(&ctx, &kind, &[HalfInt::from_int(3)], 7);
        assert_eq!(norms, vec![0.0]);
    }

    #[test]
    fn lipschitz_probe_is_bounded_and_stable() {
        let ctx = fctx(1, 2, 128);
        let kind = ProbeKind::Lipschitz(Gen::C.monomial());
        let norms = norm_probe(
            &ctx,
            &kind,
            &[HalfInt::from_int(6), HalfInt::from_int(10)],
            7,
        );
        assert!(norms[0] > 0.0);
        let rel = (norms[1] - norms[0]).abs() / norms[0];
        assert!(rel < 0.2, "norms {norms:?}");
    }

    #[test]
    fn insertion_ratio_reproduces_haar_value_near_pole() {
        // The ratio of the inserted to the plain trace tends to -1/[2] as
        // z approaches the spectral dimension (the truncation mask only
        // changes the trace by an entire function, so residues agree).
        let dp = DeformationParameter::from_q(Rational::from((1, 2))).unwrap();
        let params = ZetaParams::new(dp.clone(), 2.0, 1.0);
        let bc = Monomial::new(Side::A, 0, 1, 1);
        let l_max = HalfInt::from_int(60);
        let ratio_at = |eps: f64| -> f64 {
            let z = Complex::with_val(128, (3.0 + eps, 0.0));
            let ins = truncated_zeta(&params, &z, l_max, Some(&bc), 128).unwrap();
            let plain = truncated_zeta(&params, &z, l_max, None, 128).unwrap();
            (ins.value.real() / plain.value.real()).complete(128).to_f64()
        };
        // Quadratic extrapolation of the ratio to the pole from three
        // offsets; the ratio is analytic in the offset with unit radius, so
        // desk-scale offsets leave a few-percent extrapolation remainder.
        let r1 = ratio_at(0.5);
        let r2 = ratio_at(0.25);
        let r3 = ratio_at(0.125);
        let extrapolated = r1 / 3.0 - 2.0 * r2 + 8.0 * r3 / 3.0;
        let ctx = FloatContext::new(dp, 128).unwrap();
        let expect = -1.0 / ctx.q_number_f(HalfInt::from_int(2)).to_f64();
        assert!(
            (r3 - expect).abs() < (r2 - expect).abs()
                && (r2 - expect).abs() < (r1 - expect).abs(),
            "ratios must approach the limit: {r1}, {r2}, {r3} -> {expect}"
        );
        assert!(
            (extrapolated - expect).abs() < 0.10 * expect.abs(),
            "ratio {extrapolated} vs -1/[2] = {expect}"
        );
    }

    #[test]
    fn norm_probe_smoke_plateau() {
        let ctx = fctx(1, 2, 128);
        let kind = ProbeKind::TwistedCommutator(Gen::A.monomial());
        let norms = norm_probe(
            &ctx,
            &kind,
            &[HalfInt::from_int(6), HalfInt::from_int(10)],
            7,
        );
        assert!(norms[0] > 0.0);
        let rel = (norms[1] - norms[0]).abs() / norms[0];
        assert!(rel < 0.2, "norms {norms:?}");
    }
}
