//! Plain-text syntax for algebra elements.
//!
//! Terms are `+`-separated; each term is an optional rational coefficient
//! (with optional sign) followed by whitespace-separated generator factors
//! `a`, `b`, `c`, `d`, each optionally raised by `^<power>`. Generators are
//! case-sensitive and multiply in written order, so non-normal-ordered input
//! such as `"b a"` is accepted and reordered. The bare term `"1"` is the unit.
//!
//! Examples: `"a^2 b c^3"`, `"d b^2"`, `"b c + -1/4 a^2"`.

use super::{AlgebraContext, AlgebraElement, Gen, Monomial};
use crate::error::{Error, Result};
use crate::numerics::ExactScalar;
use rug::Rational;

pub fn parse_element(ctx: &AlgebraContext, input: &str) -> Result<AlgebraElement> {
    let trimmed = input.trim();
    if trimmed.is_empty() {
        return Err(Error::Parse("empty expression".into()));
    }
    let mut out = AlgebraElement::zero();
    for term in trimmed.split('+') {
        out = out.add(&parse_term(ctx, term)?);
    }
    Ok(out)
}

fn parse_term(ctx: &AlgebraContext, term: &str) -> Result<AlgebraElement> {
    let tokens: Vec<&str> = term.split_whitespace().collect();
    if tokens.is_empty() {
        return Err(Error::Parse(format!("empty term in {term:?}")));
    }
    let mut coeff = Rational::from(1);
    let mut factors: Vec<AlgebraElement> = Vec::new();
    for (idx, tok) in tokens.iter().enumerate() {
        if idx == 0 && looks_numeric(tok) {
            coeff = parse_rational(tok)?;
            continue;
        }
        factors.push(parse_factor(tok)?);
    }
    if factors.is_empty() && !looks_numeric(tokens[0]) {
        return Err(Error::Parse(format!("no factors in term {term:?}")));
    }
    let product = ctx.multiply_all(&factors);
    Ok(product.scale(&ExactScalar::from_rational(coeff), ctx.dp()))
}

fn looks_numeric(tok: &str) -> bool {
    let body = tok.strip_prefix('-').unwrap_or(tok);
    !body.is_empty() && body.chars().all(|c| c.is_ascii_digit() || c == '/')
}

fn parse_rational(tok: &str) -> Result<Rational> {
    Rational::from_str_radix(tok, 10)
        .map_err(|e| Error::Parse(format!("bad coefficient {tok:?}: {e}")))
}

fn parse_factor(tok: &str) -> Result<AlgebraElement> {
    let (sym, pow) = match tok.split_once('^') {
        Some((s, p)) => {
            let pow: u32 = p
                .parse()
                .map_err(|_| Error::Parse(format!("bad power in {tok:?}")))?;
            (s, pow)
        }
        None => (tok, 1),
    };
    let gen = match sym {
        "a" => Gen::A,
        "b" => Gen::B,
        "c" => Gen::C,
        "d" => Gen::D,
        _ => return Err(Error::Parse(format!("unknown generator {sym:?}"))),
    };
    // A power of a single generator is already a normal-ordered monomial.
    let mono = match gen {
        Gen::A => Monomial::new(super::Side::A, pow, 0, 0),
        Gen::B => Monomial::new(super::Side::A, 0, pow, 0),
        Gen::C => Monomial::new(super::Side::A, 0, 0, pow),
        Gen::D => {
            if pow == 0 {
                Monomial::one()
            } else {
                Monomial::new(super::Side::D, pow, 0, 0)
            }
        }
    };
    Ok(AlgebraElement::from_monomial(mono))
}

#[cfg(test)]
mod tests {
    use super::super::{AlgebraContext, AlgebraElement, Gen, Monomial, Side};
    use crate::numerics::{DeformationParameter, ExactScalar};
    use rug::Rational;

    fn ctx() -> AlgebraContext {
        AlgebraContext::new(DeformationParameter::from_q(Rational::from((1, 4))).unwrap())
    }

    #[test]
    fn parses_monomials() {
        let c = ctx();
        assert_eq!(c.parse("1").unwrap(), AlgebraElement::one());
        assert_eq!(
            c.parse("a^2 b c^3").unwrap(),
            AlgebraElement::from_monomial(Monomial::new(Side::A, 2, 1, 3))
        );
        assert_eq!(
            c.parse("d b^2").unwrap(),
            AlgebraElement::from_monomial(Monomial::new(Side::D, 1, 2, 0))
        );
    }

    #[test]
    fn parses_coefficients_and_sums() {
        let c = ctx();
        let got = c.parse("3/2 b c + -1/4 a^2 + 2").unwrap();
        let mut expect = AlgebraElement::scaled_monomial(
            Monomial::new(Side::A, 0, 1, 1),
            ExactScalar::from_rational(Rational::from((3, 2))),
        );
        expect = expect.add(&AlgebraElement::scaled_monomial(
            Monomial::new(Side::A, 2, 0, 0),
            ExactScalar::from_rational(Rational::from((-1, 4))),
        ));
        expect = expect.add(&AlgebraElement::scaled_monomial(
            Monomial::one(),
            ExactScalar::from_int(2),
        ));
        assert_eq!(got, expect);
    }

    #[test]
    fn reorders_non_normal_words() {
        let c = ctx();
        // "b a" = q^-1 a b.
        let got = c.parse("b a").unwrap();
        let expect = AlgebraElement::scaled_monomial(
            Monomial::new(Side::A, 1, 1, 0),
            ExactScalar::from_rational(Rational::from((4, 1))),
        );
        assert_eq!(got, expect);
    }

    #[test]
    fn display_round_trips() {
        let c = ctx();
        for src in ["1", "a^2 b c^3", "d b^2", "3/2 b c + -1/4 a^2"] {
            let parsed = c.parse(src).unwrap();
            let reparsed = c.parse(&parsed.to_string()).unwrap();
            assert_eq!(parsed, reparsed, "source {src:?}");
        }
    }

    #[test]
    fn rejects_garbage() {
        let c = ctx();
        assert!(c.parse("").is_err());
        assert!(c.parse("x").is_err());
        assert!(c.parse("A").is_err());
        assert!(c.parse("a^").is_err());
        assert!(c.parse("a^-2").is_err());
        assert!(c.parse("1/0 a").is_err());
    }
}
