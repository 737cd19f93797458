//! Real trigonometric polynomials on the torus.
//!
//! These serve as exactly-representable test functions: translations and
//! Sobolev (semi)norms are available in closed form through the Fourier
//! coefficients, independent of any interpolation or quadrature.

use rand::Rng;
use std::f64::consts::PI;

/// A function on T = R/Z with eval for derivatives up to some order.
pub trait Smooth {
    fn eval_deriv(&self, x: f64, order: u32) -> f64;

    fn eval(&self, x: f64) -> f64 {
        self.eval_deriv(x, 0)
    }
}

/// v(x) = a0 + sum_m cos_coeffs[m-1] cos(2 pi m x) + sin_coeffs[m-1] sin(2 pi m x).
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    pub a0: f64,
    pub cos_coeffs: Vec<f64>,
    pub sin_coeffs: Vec<f64>,
}

impl TrigPoly {
    pub fn new(a0: f64, cos_coeffs: Vec<f64>, sin_coeffs: Vec<f64>) -> Self {
        assert_eq!(cos_coeffs.len(), sin_coeffs.len());
        TrigPoly {
            a0,
            cos_coeffs,
            sin_coeffs,
        }
    }

    pub fn constant(c: f64) -> Self {
        TrigPoly::new(c, vec![], vec![])
    }

    /// sin(2 pi m x), scaled.
    pub fn sine(m: usize, amplitude: f64) -> Self {
        let mut sin_coeffs = vec![0.0; m];
        sin_coeffs[m - 1] = amplitude;
        TrigPoly::new(0.0, vec![0.0; m], sin_coeffs)
    }

    /// cos(2 pi m x), scaled.
    pub fn cosine(m: usize, amplitude: f64) -> Self {
        let mut cos_coeffs = vec![0.0; m];
        cos_coeffs[m - 1] = amplitude;
        TrigPoly::new(0.0, cos_coeffs, vec![0.0; m])
    }

    pub fn degree(&self) -> usize {
        self.cos_coeffs.len()
    }

    /// Uniform random coefficients in [-1, 1] up to `degree`.
    pub fn random(rng: &mut impl Rng, degree: usize) -> Self {
        let a0 = rng.random_range(-1.0..1.0);
        let cos_coeffs = (0..degree).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sin_coeffs = (0..degree).map(|_| rng.random_range(-1.0..1.0)).collect();
        TrigPoly::new(a0, cos_coeffs, sin_coeffs)
    }

    /// T_y v with (T_y v)(x) = v(x - y), exact in the coefficients.
    pub fn translate(&self, y: f64) -> Self {
        let mut out = self.clone();
        for m in 1..=self.degree() {
            let (s, c) = (2.0 * PI * m as f64 * y).sin_cos();
            let a = self.cos_coeffs[m - 1];
            let b = self.sin_coeffs[m - 1];
            out.cos_coeffs[m - 1] = a * c - b * s;
            out.sin_coeffs[m - 1] = a * s + b * c;
        }
        out
    }

    pub fn add_scaled(&self, other: &TrigPoly, alpha: f64) -> Self {
        let deg = self.degree().max(other.degree());
        let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        TrigPoly::new(
            self.a0 + alpha * other.a0,
            (0..deg)
                .map(|i| get(&self.cos_coeffs, i) + alpha * get(&other.cos_coeffs, i))
                .collect(),
            (0..deg)
                .map(|i| get(&self.sin_coeffs, i) + alpha * get(&other.sin_coeffs, i))
                .collect(),
        )
    }

    /// L^2(T) norm by Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.seminorm(0)
    }

    /// |v|_{s,2} = || d^s v / dx^s ||_{L^2}, exact.
    pub fn seminorm(&self, s: u32) -> f64 {
        let mut acc = if s == 0 { self.a0 * self.a0 } else { 0.0 };
        for m in 1..=self.degree() {
            let w = (2.0 * PI * m as f64).powi(2 * s as i32);
            let a = self.cos_coeffs[m - 1];
            let b = self.sin_coeffs[m - 1];
            acc += 0.5 * w * (a * a + b * b);
        }
        acc.sqrt()
    }
}

impl Smooth for TrigPoly {
    fn eval_deriv(&self, x: f64, order: u32) -> f64 {
        let mut acc = if order == 0 { self.a0 } else { 0.0 };
        for m in 1..=self.degree() {
            let omega = 2.0 * PI * m as f64;
            let theta = omega * x;
            let w = omega.powi(order as i32);
            let a = self.cos_coeffs[m - 1];
            let b = self.sin_coeffs[m - 1];
            // d/dx rotates the phase by pi/2
            let (s, c) = (theta + order as f64 * PI / 2.0).sin_cos();
            acc += w * (a * c + b * s);
        }
        acc
    }
}
