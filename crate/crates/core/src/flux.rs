//! Advective flux derivative f(u) = F'(u) used by the characteristic feet.
//!
//! Only f itself enters the scheme; the antiderivative F is never needed.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum FluxSpec {
    /// f(u) = 0: pure dispersion.
    Zero,
    /// f(u) = u, the KdV case (F(u) = u^2 / 2).
    Kdv,
    /// f(u) = sum c_k u^k over the stored coefficients.
    Polynomial(Vec<f64>),
}

impl FluxSpec {
    pub fn polynomial(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                what: "flux coefficient",
            });
        }
        Ok(FluxSpec::Polynomial(coefficients))
    }

    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        match self {
            FluxSpec::Zero => 0.0,
            FluxSpec::Kdv => u,
            FluxSpec::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ck| acc * u + ck),
        }
    }

    #[inline]
    pub fn f_prime(&self, u: f64) -> f64 {
        match self {
            FluxSpec::Zero => 0.0,
            FluxSpec::Kdv => 1.0,
            FluxSpec::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, &ck)| acc * u + k as f64 * ck),
        }
    }

    #[inline]
    pub fn f_double_prime(&self, u: f64) -> f64 {
        match self {
            FluxSpec::Zero | FluxSpec::Kdv => 0.0,
            FluxSpec::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(2)
                .rev()
                .fold(0.0, |acc, (k, &ck)| acc * u + (k * (k - 1)) as f64 * ck),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FluxSpec::Zero => true,
            FluxSpec::Kdv => false,
            FluxSpec::Polynomial(c) => c.iter().all(|&ck| ck == 0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kdv_equals_linear_polynomial() {
        let kdv = FluxSpec::Kdv;
        let poly = FluxSpec::polynomial(vec![0.0, 1.0]).unwrap();
        for &u in &[-2.0, 0.0, 0.7, 31.0] {
            assert_eq!(kdv.f(u), poly.f(u));
            assert_eq!(kdv.f_prime(u), poly.f_prime(u));
        }
    }

    #[test]
    fn polynomial_derivatives() {
        // f(u) = 1 + 2u + 3u^2
        let f = FluxSpec::polynomial(vec![1.0, 2.0, 3.0]).unwrap();
        let u = 0.5;
        assert!((f.f(u) - (1.0 + 1.0 + 0.75)).abs() < 1e-15);
        assert!((f.f_prime(u) - (2.0 + 3.0)).abs() < 1e-15);
        assert!((f.f_double_prime(u) - 6.0).abs() < 1e-15);
        assert!(FluxSpec::polynomial(vec![f64::NAN]).is_err());
    }
}
