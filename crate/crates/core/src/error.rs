use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// The weight parameters lie outside the convergence region a ± b > 0.
    #[error("divergent parameters: a = {a}, b = {b} (need a + b > 0 and a - b > 0)")]
    DivergentParameters { a: f64, b: f64 },

    /// An evaluation point is too close to a pole of the zeta function: one of
    /// the factors 1 - q^e in a series denominator is below the pole threshold.
    #[error("pole hit near z = {z_re} + {z_im}i (denominator factor |1 - q^e| = {factor_abs:.3e} with e = {exponent_re})")]
    PoleHit {
        z_re: f64,
        z_im: f64,
        exponent_re: f64,
        factor_abs: f64,
    },

    /// Residue extraction was requested at a double pole (b = 0 weights).
    #[error("double pole at z0 = {z0}: residue calculus requires b != 0")]
    DoublePole { z0: f64 },

    /// The gamma factor itself has a pole at the requested point.
    #[error("gamma factor has a pole at z0 = {z0} (nonpositive integer)")]
    GammaPole { z0: f64 },

    /// The k-series did not reach the requested tail bound.
    #[error("series did not converge within {max_terms} terms (tail bound {tail:.3e})")]
    SeriesDivergence { max_terms: usize, tail: f64 },

    /// Malformed textual input (monomial expressions, rationals, config files).
    #[error("parse error: {0}")]
    Parse(String),

    /// A structurally invalid parameter (q outside (0,1), bad precision, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
