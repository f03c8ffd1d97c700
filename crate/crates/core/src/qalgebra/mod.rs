//! Exact computer algebra for the coordinate algebra of quantum SU(2).
//!
//! The algebra is generated by a, b, c, d subject to
//!
//! ```text
//! ab = q ba,  ac = q ca,  bd = q db,  cd = q dc,  bc = cb,
//! ad = 1 + q cb,  da = 1 + q^-1 bc,
//! ```
//!
//! with involution a* = d, b* = -q c, c* = -q^-1 b, d* = a. Elements are kept
//! in the normal-ordered basis a^p b^m c^n (or d^p b^m c^n with p >= 1).
//!
//! The quantized enveloping algebra acting on it is generated by k, k^-1, e, f
//! with ke = q ek, kf = q^-1 fk and [e, f] = (k^2 - k^-2)/(q - q^-1); the
//! left/right actions of e and f extend from the generators through the
//! coproduct (Leibniz) rule, and k-actions are algebra automorphisms.

mod parse;

pub use parse::parse_element;

use crate::error::Result;
use crate::numerics::{DeformationParameter, ExactScalar, HalfInt};
use rug::Rational;
use std::collections::BTreeMap;
use std::fmt;

/// Which corner generator a normal-ordered monomial starts with.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Side {
    /// Monomials a^p b^m c^n (p may be zero).
    A,
    /// Monomials d^p b^m c^n with p >= 1.
    D,
}

/// The four algebra generators.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Gen {
    A,
    B,
    C,
    D,
}

impl Gen {
    pub const ALL: [Gen; 4] = [Gen::A, Gen::B, Gen::C, Gen::D];

    pub fn monomial(self) -> Monomial {
        match self {
            Gen::A => Monomial::new(Side::A, 1, 0, 0),
            Gen::B => Monomial::new(Side::A, 0, 1, 0),
            Gen::C => Monomial::new(Side::A, 0, 0, 1),
            Gen::D => Monomial::new(Side::D, 1, 0, 0),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Gen::A => 'a',
            Gen::B => 'b',
            Gen::C => 'c',
            Gen::D => 'd',
        }
    }
}

/// A normal-ordered monomial a^p b^m c^n or d^p b^m c^n.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Monomial {
    side: Side,
    p: u32,
    m: u32,
    n: u32,
}

impl Monomial {
    pub fn new(side: Side, p: u32, m: u32, n: u32) -> Self {
        assert!(
            !(side == Side::D && p == 0),
            "d-side monomials need p >= 1"
        );
        Monomial { side, p, m, n }
    }

    pub fn one() -> Self {
        Monomial::new(Side::A, 0, 0, 0)
    }

    pub fn is_one(&self) -> bool {
        self.p == 0 && self.m == 0 && self.n == 0
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Power of a (or of d on the d-side).
    pub fn corner_power(&self) -> u32 {
        self.p
    }

    pub fn b_power(&self) -> u32 {
        self.m
    }

    pub fn c_power(&self) -> u32 {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.p + self.m + self.n
    }

    /// Twice the total left (j-type) weight under the k-action.
    fn j_weight_twice(&self) -> i64 {
        let (p, m, n) = (self.p as i64, self.m as i64, self.n as i64);
        match self.side {
            Side::A => -p + m - n,
            Side::D => p + m - n,
        }
    }

    /// Twice the total right (i-type) weight under the k-action.
    fn i_weight_twice(&self) -> i64 {
        let (p, m, n) = (self.p as i64, self.m as i64, self.n as i64);
        match self.side {
            Side::A => -p - m + n,
            Side::D => p - m + n,
        }
    }

    /// Split off the leftmost generator of the word, if any.
    fn split_first(&self) -> Option<(Gen, Monomial)> {
        if self.p > 0 {
            let gen = match self.side {
                Side::A => Gen::A,
                Side::D => Gen::D,
            };
            let side = if self.p == 1 { Side::A } else { self.side };
            Some((gen, Monomial::new(side, self.p - 1, self.m, self.n)))
        } else if self.m > 0 {
            Some((Gen::B, Monomial::new(Side::A, 0, self.m - 1, self.n)))
        } else if self.n > 0 {
            Some((Gen::C, Monomial::new(Side::A, 0, 0, self.n - 1)))
        } else {
            None
        }
    }

    /// Split off the rightmost generator of the word, if any.
    fn split_last(&self) -> Option<(Monomial, Gen)> {
        if self.n > 0 {
            Some((
                Monomial::new(self.side, self.p, self.m, self.n - 1),
                Gen::C,
            ))
        } else if self.m > 0 {
            Some((
                Monomial::new(self.side, self.p, self.m - 1, self.n),
                Gen::B,
            ))
        } else if self.p > 0 {
            let gen = match self.side {
                Side::A => Gen::A,
                Side::D => Gen::D,
            };
            let side = if self.p == 1 { Side::A } else { self.side };
            Some((Monomial::new(side, self.p - 1, 0, 0), gen))
        } else {
            None
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut parts = Vec::new();
        let corner = match self.side {
            Side::A => 'a',
            Side::D => 'd',
        };
        for (sym, pow) in [(corner, self.p), ('b', self.m), ('c', self.n)] {
            match pow {
                0 => {}
                1 => parts.push(sym.to_string()),
                _ => parts.push(format!("{sym}^{pow}")),
            }
        }
        write!(f, "{}", parts.join(" "))
    }
}

/// A finite linear combination of normal-ordered monomials with exact
/// coefficients. No zero coefficients are stored.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct AlgebraElement {
    terms: BTreeMap<Monomial, ExactScalar>,
}

impl AlgebraElement {
    pub fn zero() -> Self {
        AlgebraElement {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::from_monomial(Monomial::one())
    }

    pub fn from_monomial(m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(m, ExactScalar::one());
        AlgebraElement { terms }
    }

    pub fn from_gen(g: Gen) -> Self {
        Self::from_monomial(g.monomial())
    }

    pub fn scaled_monomial(m: Monomial, coeff: ExactScalar) -> Self {
        let mut out = AlgebraElement::zero();
        out.add_term(m, coeff);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &ExactScalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> ExactScalar {
        self.terms.get(m).cloned().unwrap_or_else(ExactScalar::zero)
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    fn add_term(&mut self, m: Monomial, coeff: ExactScalar) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &AlgebraElement) -> AlgebraElement {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &AlgebraElement) -> AlgebraElement {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, -c.clone());
        }
        out
    }

    pub fn neg(&self) -> AlgebraElement {
        AlgebraElement {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (*m, -c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, s: &ExactScalar, dp: &DeformationParameter) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        for (m, c) in &self.terms {
            out.add_term(*m, c.mul(s, dp));
        }
        out
    }

    pub fn scale_rational(&self, r: &Rational) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        for (m, c) in &self.terms {
            out.add_term(*m, c.mul_rational(r));
        }
        out
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if m.is_one() {
                write!(f, "{c}")?;
            } else if *c == ExactScalar::one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{c} {m}")?;
            }
        }
        Ok(())
    }
}

/// Diagonal algebra automorphism a -> q^s a, b -> q^t b, c -> q^-t c,
/// d -> q^-s d, stored through the exponent pair (s, t).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct AutomorphismSpec {
    pub lambda_exp: HalfInt,
    pub mu_exp: HalfInt,
}

impl AutomorphismSpec {
    pub const IDENTITY: AutomorphismSpec = AutomorphismSpec {
        lambda_exp: HalfInt::ZERO,
        mu_exp: HalfInt::ZERO,
    };

    /// The left modular automorphism (left action of k^-2).
    pub const SIGMA_L: AutomorphismSpec = AutomorphismSpec {
        lambda_exp: HalfInt::ONE,
        mu_exp: HalfInt::from_int(-1),
    };

    /// The right modular automorphism (right action of k^-2).
    pub const SIGMA_R: AutomorphismSpec = AutomorphismSpec {
        lambda_exp: HalfInt::ONE,
        mu_exp: HalfInt::ONE,
    };

    /// The modular automorphism of the Haar state (sigma_L followed by
    /// sigma_R): a -> q^2 a, b -> b, c -> c, d -> q^-2 d.
    pub const THETA: AutomorphismSpec = AutomorphismSpec {
        lambda_exp: HalfInt::from_int(2),
        mu_exp: HalfInt::ZERO,
    };

    pub fn compose(self, other: AutomorphismSpec) -> AutomorphismSpec {
        AutomorphismSpec {
            lambda_exp: self.lambda_exp + other.lambda_exp,
            mu_exp: self.mu_exp + other.mu_exp,
        }
    }

    /// Exponent of q by which the automorphism scales a monomial.
    pub fn weight(&self, m: &Monomial) -> HalfInt {
        let p = m.p as i64;
        let corner = match m.side {
            Side::A => self.lambda_exp * p,
            Side::D => -(self.lambda_exp * p),
        };
        corner + self.mu_exp * (m.m as i64 - m.n as i64)
    }
}

/// Generators of the quantized enveloping algebra acting on the coordinates.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum UqGen {
    K,
    KInv,
    E,
    F,
}

/// Exponent of q by which sigma_L scales a monomial (always an integer).
pub fn sigma_l_exponent(m: &Monomial) -> i64 {
    -m.j_weight_twice()
}

/// Exponent of q by which sigma_R scales a monomial (always an integer).
pub fn sigma_r_exponent(m: &Monomial) -> i64 {
    -m.i_weight_twice()
}

/// Context for exact algebra computations at a fixed rational q.
#[derive(Clone, Debug)]
pub struct AlgebraContext {
    dp: DeformationParameter,
}

impl AlgebraContext {
    pub fn new(dp: DeformationParameter) -> Self {
        AlgebraContext { dp }
    }

    pub fn dp(&self) -> &DeformationParameter {
        &self.dp
    }

    fn q_int(&self, e: i64) -> Rational {
        self.dp.q_int_pow(e)
    }

    // -- multiplication ----------------------------------------------------

    /// Normal-ordered product of two elements.
    pub fn multiply(&self, x: &AlgebraElement, y: &AlgebraElement) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        for (mx, cx) in &x.terms {
            for (my, cy) in &y.terms {
                let coeff = cx.mul(cy, &self.dp);
                let prod = self.mono_mul(mx, my);
                for (m, c) in &prod.terms {
                    out.add_term(*m, c.mul(&coeff, &self.dp));
                }
            }
        }
        out
    }

    pub fn multiply_all(&self, factors: &[AlgebraElement]) -> AlgebraElement {
        let mut acc = AlgebraElement::one();
        for f in factors {
            acc = self.multiply(&acc, f);
        }
        acc
    }

    /// x^n by repeated multiplication.
    pub fn power(&self, x: &AlgebraElement, n: u32) -> AlgebraElement {
        let mut acc = AlgebraElement::one();
        for _ in 0..n {
            acc = self.multiply(&acc, x);
        }
        acc
    }

    fn mono_mul(&self, x: &Monomial, y: &Monomial) -> AlgebraElement {
        // Commute y's corner block left past x's b^m c^n: each of b, c picks
        // up q^-1 against a and q against d.
        let cross = (x.m as i64 + x.n as i64) * y.p as i64;
        let head_exp = match y.side {
            Side::A => -cross,
            Side::D => cross,
        };
        let scale = ExactScalar::from_rational(self.q_int(head_exp));
        let m = x.m + y.m;
        let n = x.n + y.n;

        if y.p == 0 || x.p == 0 {
            let (side, p) = if y.p == 0 {
                (x.side, x.p)
            } else {
                (y.side, y.p)
            };
            let side = if p == 0 { Side::A } else { side };
            return AlgebraElement::scaled_monomial(Monomial::new(side, p, m, n), scale);
        }
        if x.side == y.side {
            return AlgebraElement::scaled_monomial(
                Monomial::new(x.side, x.p + y.p, m, n),
                scale,
            );
        }

        // Mixed corners: reduce a^p d^r (or d^p a^r) to the PBW basis. Each
        // contraction step frees one factor of (1 + q^{+-(2t-1)} bc).
        let (p, r) = (x.p, y.p);
        let s = p.min(r);
        let sign: i64 = match x.side {
            Side::A => 1,  // a^p d^r
            Side::D => -1, // d^p a^r
        };
        let mut poly: Vec<Rational> = vec![Rational::from(1)];
        for t in (r - s + 1)..=r {
            let w = self.q_int(sign * (2 * t as i64 - 1));
            let mut next = vec![Rational::new(); poly.len() + 1];
            for (j, cj) in poly.iter().enumerate() {
                next[j] += cj;
                next[j + 1] += Rational::from(cj * &w);
            }
            poly = next;
        }
        let (head_side, head_p) = if p > r {
            (x.side, p - r)
        } else if r > p {
            (y.side, r - p)
        } else {
            (Side::A, 0)
        };
        let mut out = AlgebraElement::zero();
        for (extra, cj) in poly.into_iter().enumerate() {
            let mono = Monomial::new(head_side, head_p, m + extra as u32, n + extra as u32);
            out.add_term(mono, scale.mul_rational(&cj));
        }
        out
    }

    // -- star structure -----------------------------------------------------

    /// The involution, antilinear and antimultiplicative, in normal form.
    /// Coefficients here are real, so conjugation acts trivially on them.
    pub fn star(&self, x: &AlgebraElement) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        for (m, c) in &x.terms {
            let deg_bc = (m.m + m.n) as i64;
            let sign = if deg_bc % 2 == 0 { 1 } else { -1 };
            let (exp, side) = match m.side {
                Side::A => (
                    m.m as i64 - m.n as i64 + m.p as i64 * deg_bc,
                    if m.p > 0 { Side::D } else { Side::A },
                ),
                Side::D => (m.m as i64 - m.n as i64 - m.p as i64 * deg_bc, Side::A),
            };
            let coeff = c.mul_rational(&(self.q_int(exp) * sign));
            out.add_term(Monomial::new(side, m.p, m.n, m.m), coeff);
        }
        out
    }

    // -- automorphisms and actions ------------------------------------------

    pub fn apply_diag_automorphism(
        &self,
        spec: AutomorphismSpec,
        x: &AlgebraElement,
    ) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        for (m, c) in &x.terms {
            let w = spec.weight(m);
            out.add_term(*m, c.mul(&self.dp.q_pow(w), &self.dp));
        }
        out
    }

    /// Left action of a generator of the enveloping algebra, extended from
    /// the generator values by the coproduct rule.
    pub fn left_action(&self, g: UqGen, x: &AlgebraElement) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        for (m, c) in &x.terms {
            let acted = match g {
                UqGen::K => self.k_left_scaled(m, 1),
                UqGen::KInv => self.k_left_scaled(m, -1),
                UqGen::E => self.e_left_mono(m),
                UqGen::F => self.f_left_mono(m),
            };
            for (mm, cc) in &acted.terms {
                out.add_term(*mm, cc.mul(c, &self.dp));
            }
        }
        out
    }

    /// Right action, mirror of [`Self::left_action`].
    pub fn right_action(&self, x: &AlgebraElement, g: UqGen) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        for (m, c) in &x.terms {
            let acted = match g {
                UqGen::K => self.k_right_scaled(m, 1),
                UqGen::KInv => self.k_right_scaled(m, -1),
                UqGen::E => self.e_right_mono(m),
                UqGen::F => self.f_right_mono(m),
            };
            for (mm, cc) in &acted.terms {
                out.add_term(*mm, cc.mul(c, &self.dp));
            }
        }
        out
    }

    fn k_left_scaled(&self, m: &Monomial, dir: i64) -> AlgebraElement {
        let w = HalfInt::from_twice(dir * m.j_weight_twice());
        AlgebraElement::scaled_monomial(*m, self.dp.q_pow(w))
    }

    fn k_right_scaled(&self, m: &Monomial, dir: i64) -> AlgebraElement {
        let w = HalfInt::from_twice(dir * m.i_weight_twice());
        AlgebraElement::scaled_monomial(*m, self.dp.q_pow(w))
    }

    fn e_left_gen(&self, g: Gen) -> AlgebraElement {
        match g {
            Gen::A => AlgebraElement::from_gen(Gen::B),
            Gen::C => AlgebraElement::from_gen(Gen::D),
            Gen::B | Gen::D => AlgebraElement::zero(),
        }
    }

    fn f_left_gen(&self, g: Gen) -> AlgebraElement {
        match g {
            Gen::B => AlgebraElement::from_gen(Gen::A),
            Gen::D => AlgebraElement::from_gen(Gen::C),
            Gen::A | Gen::C => AlgebraElement::zero(),
        }
    }

    fn e_right_gen(&self, g: Gen) -> AlgebraElement {
        match g {
            Gen::C => AlgebraElement::from_gen(Gen::A),
            Gen::D => AlgebraElement::from_gen(Gen::B),
            Gen::A | Gen::B => AlgebraElement::zero(),
        }
    }

    fn f_right_gen(&self, g: Gen) -> AlgebraElement {
        match g {
            Gen::A => AlgebraElement::from_gen(Gen::C),
            Gen::B => AlgebraElement::from_gen(Gen::D),
            Gen::C | Gen::D => AlgebraElement::zero(),
        }
    }

    /// e acting on a monomial word: e(gw) = e(g) k(w) + k^-1(g) e(w).
    fn e_left_mono(&self, m: &Monomial) -> AlgebraElement {
        match m.split_first() {
            None => AlgebraElement::zero(),
            Some((g, rest)) => {
                let head = self.e_left_gen(g);
                let k_rest = self.k_left_scaled(&rest, 1);
                let mut out = self.multiply(&head, &k_rest);

                let kinv_g = self.k_left_scaled(&g.monomial(), -1);
                let e_rest = self.e_left_mono(&rest);
                out = out.add(&self.multiply(&kinv_g, &e_rest));
                out
            }
        }
    }

    fn f_left_mono(&self, m: &Monomial) -> AlgebraElement {
        match m.split_first() {
            None => AlgebraElement::zero(),
            Some((g, rest)) => {
                let head = self.f_left_gen(g);
                let k_rest = self.k_left_scaled(&rest, 1);
                let mut out = self.multiply(&head, &k_rest);

                let kinv_g = self.k_left_scaled(&g.monomial(), -1);
                let f_rest = self.f_left_mono(&rest);
                out = out.add(&self.multiply(&kinv_g, &f_rest));
                out
            }
        }
    }

    /// e acting from the right: (wg)e = (w e)(g k) + (w k^-1)(g e).
    fn e_right_mono(&self, m: &Monomial) -> AlgebraElement {
        match m.split_last() {
            None => AlgebraElement::zero(),
            Some((rest, g)) => {
                let e_rest = self.e_right_mono(&rest);
                let k_g = self.k_right_scaled(&g.monomial(), 1);
                let mut out = self.multiply(&e_rest, &k_g);

                let kinv_rest = self.k_right_scaled(&rest, -1);
                let e_g = self.e_right_gen(g);
                out = out.add(&self.multiply(&kinv_rest, &e_g));
                out
            }
        }
    }

    fn f_right_mono(&self, m: &Monomial) -> AlgebraElement {
        match m.split_last() {
            None => AlgebraElement::zero(),
            Some((rest, g)) => {
                let f_rest = self.f_right_mono(&rest);
                let k_g = self.k_right_scaled(&g.monomial(), 1);
                let mut out = self.multiply(&f_rest, &k_g);

                let kinv_rest = self.k_right_scaled(&rest, -1);
                let f_g = self.f_right_gen(g);
                out = out.add(&self.multiply(&kinv_rest, &f_g));
                out
            }
        }
    }

    // -- Haar state -----------------------------------------------------------

    /// The Haar state: a^p b^m c^n (and d^p b^m c^n) map to
    /// delta_{p,0} delta_{m,n} (-1)^n / [n+1], extended linearly.
    pub fn haar_state(&self, x: &AlgebraElement) -> ExactScalar {
        let mut acc = ExactScalar::zero();
        for (m, c) in &x.terms {
            if m.p != 0 || m.m != m.n {
                continue;
            }
            let qn = self
                .dp
                .q_number(HalfInt::from_int(m.n as i64 + 1))
                .inv(&self.dp)
                .expect("[n+1] is nonzero");
            let signed = if m.n % 2 == 0 { qn } else { -qn };
            acc += c.mul(&signed, &self.dp);
        }
        acc
    }

    /// GNS inner product (x, y) = h(x* y).
    pub fn haar_inner_product(&self, x: &AlgebraElement, y: &AlgebraElement) -> ExactScalar {
        self.haar_state(&self.multiply(&self.star(x), y))
    }

    // -- twisted commutator --------------------------------------------------

    /// The three algebra elements whose 2x2 matrix assembly is the twisted
    /// commutator of the Dirac operator with x:
    ///
    /// ```text
    /// ( (sigma_L(x) - x)/(q^-1 - q),  q^-1/2 e(k^-1 x),  q^1/2 f(k^-1 x) )
    /// ```
    pub fn twisted_commutator_components(
        &self,
        x: &AlgebraElement,
    ) -> (AlgebraElement, AlgebraElement, AlgebraElement) {
        let denom = (self.q_int(-1) - self.q_int(1)).recip();
        let diag = self
            .apply_diag_automorphism(AutomorphismSpec::SIGMA_L, x)
            .sub(x)
            .scale_rational(&denom);

        let kinv_x = self.left_action(UqGen::KInv, x);
        let upper = self
            .left_action(UqGen::E, &kinv_x)
            .scale(&self.dp.q_pow(-HalfInt::HALF), &self.dp);
        let lower = self
            .left_action(UqGen::F, &kinv_x)
            .scale(&self.dp.q_pow(HalfInt::HALF), &self.dp);
        (diag, upper, lower)
    }

    /// Split an element into its homogeneous components under sigma_L,
    /// keyed by the integer exponent of the scaling q-power.
    pub fn sigma_l_weight_components(&self, x: &AlgebraElement) -> BTreeMap<i64, AlgebraElement> {
        let mut out: BTreeMap<i64, AlgebraElement> = BTreeMap::new();
        for (m, c) in &x.terms {
            out.entry(sigma_l_exponent(m))
                .or_insert_with(AlgebraElement::zero)
                .add_term(*m, c.clone());
        }
        out
    }

    /// Parse the plain-text monomial syntax, e.g. `"a^2 b c^3 + -1/4 d b^2"`.
    pub fn parse(&self, input: &str) -> Result<AlgebraElement> {
        parse_element(self, input)
    }
}

/// A uniformly-shaped random monomial of total degree at most `max_degree`.
pub fn random_monomial(rng: &mut impl rand::Rng, max_degree: u32) -> Monomial {
    let p = rng.random_range(0..=max_degree);
    let m = rng.random_range(0..=(max_degree - p));
    let n = rng.random_range(0..=(max_degree - p - m));
    let side = if p > 0 && rng.random_bool(0.5) {
        Side::D
    } else {
        Side::A
    };
    Monomial::new(side, p, m, n)
}

/// A random element with small rational coefficients.
pub fn random_element(
    rng: &mut impl rand::Rng,
    max_degree: u32,
    max_terms: usize,
) -> AlgebraElement {
    let terms = rng.random_range(1..=max_terms);
    let mut out = AlgebraElement::zero();
    for _ in 0..terms {
        let num = rng.random_range(-9i64..=9);
        let den = rng.random_range(1i64..=9);
        if num == 0 {
            continue;
        }
        let coeff = ExactScalar::from_rational(Rational::from((num, den)));
        out = out.add(&AlgebraElement::scaled_monomial(
            random_monomial(rng, max_degree),
            coeff,
        ));
    }
    if out.is_zero() {
        AlgebraElement::one()
    } else {
        out
    }
}
