//! L^2 norms, Sobolev seminorms, and the weighted H^s norm, all through
//! composite 7-node Gauss-Legendre quadrature per mesh cell.

use crate::interp::PiecewiseCubic;
use crate::torus::TorusGrid;
use crate::{Error, Result};
use std::sync::LazyLock;

/// Gauss-Legendre rule on (-1, 1).
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Legendre P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    // (1 - x^2) P_n' = n (P_{n-1} - x P_n)
    let d = n as f64 * (p0 - x * p1) / (1.0 - x * x);
    (p1, d)
}

impl QuadratureRule {
    /// Compute the n-node rule by Newton iteration on the Legendre roots;
    /// no tabulated decimals.
    pub fn gauss_legendre(n: usize) -> Self {
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            // Chebyshev-based initial guess, roots ordered decreasing
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_deriv(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_deriv(n, x);
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * d * d));
        }
        nodes.reverse();
        weights.reverse();
        QuadratureRule { nodes, weights }
    }

    pub fn gauss7() -> &'static QuadratureRule {
        static RULE: LazyLock<QuadratureRule> = LazyLock::new(|| QuadratureRule::gauss_legendre(7));
        &RULE
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Check the defining invariants: weights sum to 2 and the rule
    /// integrates monomials up to degree 2n - 1 exactly.
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        let sum: f64 = self.weights.iter().sum();
        if (sum - 2.0).abs() > 1e-14 {
            return Err(Error::InvalidInput(format!(
                "quadrature weights sum to {sum}, want 2"
            )));
        }
        for degree in 0..=(2 * n - 1) {
            let got: f64 = self
                .nodes
                .iter()
                .zip(&self.weights)
                .map(|(&x, &w)| w * x.powi(degree as i32))
                .sum();
            let want = if degree % 2 == 0 {
                2.0 / (degree as f64 + 1.0)
            } else {
                0.0
            };
            if (got - want).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "quadrature not exact at degree {degree}: got {got}, want {want}"
                )));
            }
        }
        Ok(())
    }

    /// Integrate `f` over one cell [a, a + len].
    #[inline]
    pub fn integrate_cell(&self, a: f64, len: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * len;
        let mid = a + half;
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        half * acc
    }
}

/// Composite integral of `f` over the torus on `grid` cells.
pub fn integrate(f: impl Fn(f64) -> f64, grid: TorusGrid) -> Result<f64> {
    let rule = QuadratureRule::gauss7();
    let h = grid.h();
    let mut acc = 0.0;
    for j in 0..grid.nx() {
        let cell = rule.integrate_cell(grid.node(j), h, &f);
        if !cell.is_finite() {
            return Err(Error::NonFiniteInCell { cell: j });
        }
        acc += cell;
    }
    Ok(acc)
}

/// || f ||_{L^2(T)} by composite 7-node Gauss-Legendre.
pub fn l2_norm(f: impl Fn(f64) -> f64, grid: TorusGrid) -> Result<f64> {
    Ok(integrate(|x| f(x) * f(x), grid)?.max(0.0).sqrt())
}

/// | pc |_{s,2} for s in {1, 2}; exact per cell (the integrand is a
/// polynomial of degree <= 4, well inside the rule's degree-13 exactness).
pub fn hs_seminorm(pc: &PiecewiseCubic, s: u32) -> Result<f64> {
    if !(s == 1 || s == 2) {
        return Err(Error::Unsupported(format!(
            "hs_seminorm supports s in {{1, 2}}, got {s}"
        )));
    }
    l2_norm(|x| pc.eval_unchecked(x, s), pc.grid())
}

/// The weighted H^s norm (||v||^2 + (h^{2s} / dt) |v|_{s,2}^2)^{1/2}.
///
/// With h^{2s}/dt = 1 this is the equivalent-H^s norm ||v||_{s,2,*}.
pub fn weighted_norm(v_l2: f64, v_seminorm: f64, s: u32, h: f64, dt: f64) -> f64 {
    let w = h.powi(2 * s as i32) / dt;
    (v_l2 * v_l2 + w * v_seminorm * v_seminorm).sqrt()
}

/// ||v||_{s,2,*} = (||v||^2 + |v|_{s,2}^2)^{1/2}.
pub fn star_norm(v_l2: f64, v_seminorm: f64) -> f64 {
    v_l2.hypot(v_seminorm)
}

/// Relative L^2 error ||numeric - exact|| / ||exact|| on the grid quadrature.
pub fn relative_l2_error(
    numeric: impl Fn(f64) -> f64,
    exact: impl Fn(f64) -> f64,
    grid: TorusGrid,
) -> Result<f64> {
    let num = l2_norm(|x| numeric(x) - exact(x), grid)?;
    let den = l2_norm(&exact, grid)?;
    if den < 1e-300 {
        return Err(Error::VanishingNorm { norm: den });
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::build_periodic_cubic_spline;
    use crate::torus::GridFunction;
    use std::f64::consts::PI;

    #[test]
    fn rule_is_valid() {
        QuadratureRule::gauss7().validate().unwrap();
        QuadratureRule::gauss_legendre(5).validate().unwrap();
    }

    #[test]
    fn l2_of_constant_and_cosine() {
        let grid = TorusGrid::new(16).unwrap();
        assert!((l2_norm(|_| 1.0, grid).unwrap() - 1.0).abs() < 1e-14);
        let n = l2_norm(|x| (2.0 * PI * x).cos(), grid).unwrap();
        assert!((n - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn l2_exact_for_aligned_piecewise_cubic() {
        // spline of sampled data is a piecewise cubic aligned with the grid;
        // compare against per-cell closed-form integration of the squared cubic
        let grid = TorusGrid::new(8).unwrap();
        let gf = GridFunction::sample(grid, |x| (2.0 * PI * x).sin() + 0.3).unwrap();
        let pc = build_periodic_cubic_spline(&gf).unwrap();
        let got = l2_norm(|x| pc.eval_unchecked(x, 0), grid).unwrap();

        let mut acc = 0.0;
        for j in 0..grid.nx() {
            let c = pc.cell_coeffs(j);
            // integral over the cell of (sum c_i xi^i)^2 dx, xi = (x - x_j)/h
            let mut cell = 0.0;
            for p in 0..4 {
                for q in 0..4 {
                    cell += c[p] * c[q] / (p + q + 1) as f64;
                }
            }
            acc += cell * grid.h();
        }
        assert!((got - acc.sqrt()).abs() <= 1e-14 * acc.sqrt().max(1.0));
    }

    #[test]
    fn seminorm_of_hermite_sine() {
        // |sin(2 pi x)|_{2,2} = (2 pi)^2 / sqrt 2; the interpolant's
        // seminorm carries an O(h^2) defect
        use crate::interp::{interpolate_smooth, InterpKind};
        use crate::trig::TrigPoly;
        let grid = TorusGrid::new(64).unwrap();
        let pc = interpolate_smooth(&TrigPoly::sine(1, 1.0), grid, InterpKind::Hermite).unwrap();
        let got = hs_seminorm(&pc, 2).unwrap();
        let want = (2.0 * PI).powi(2) / 2.0f64.sqrt();
        assert!((got - want).abs() <= 0.02 * want, "{got} vs {want}");
    }

    #[test]
    fn seminorm_of_known_cellwise_artifact() {
        // alternating nodal slopes with zero values make each cell the
        // cubic h v_j (xi - xi^2), whose second derivative is the
        // constant -2 v_j / h: the seminorm is exactly 2 |s| nx
        use crate::interp::{build_cubic_hermite, HermiteData};
        let nx = 8;
        let s = 0.37;
        let grid = TorusGrid::new(nx).unwrap();
        let derivs: Vec<f64> = (0..nx).map(|j| if j % 2 == 0 { s } else { -s }).collect();
        let hd = HermiteData::new(grid, vec![0.0; nx], derivs).unwrap();
        let pc = build_cubic_hermite(&hd).unwrap();
        let want = 2.0 * s * nx as f64;
        let got = hs_seminorm(&pc, 2).unwrap();
        assert!((got - want).abs() <= 1e-12 * want, "{got} vs {want}");
    }

    #[test]
    fn seminorm_rejects_unsupported_order() {
        let grid = TorusGrid::new(8).unwrap();
        let gf = GridFunction::constant(grid, 1.0).unwrap();
        let pc = build_periodic_cubic_spline(&gf).unwrap();
        assert!(hs_seminorm(&pc, 3).is_err());
        assert_eq!(hs_seminorm(&pc, 2).unwrap(), 0.0);
    }

    #[test]
    fn weighted_norm_values() {
        assert_eq!(weighted_norm(1.0, 0.0, 2, 0.125, 0.7), 1.0);
        // 3-4-5 with h^4/dt = 1
        let h: f64 = 0.1;
        let dt = h.powi(4);
        assert!((weighted_norm(3.0, 4.0, 2, h, dt) - 5.0).abs() < 1e-12);
        // weight vanishes as h -> 0
        assert!((weighted_norm(2.0, 100.0, 2, 1e-6, 0.1) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn relative_error_basics() {
        let grid = TorusGrid::new(16).unwrap();
        let f = |x: f64| (2.0 * PI * x).cos() + 2.0;
        assert!(relative_l2_error(f, f, grid).unwrap() < 1e-15);
        let twice = |x: f64| 2.0 * f(x);
        assert!((relative_l2_error(twice, f, grid).unwrap() - 1.0).abs() < 1e-13);
        assert!(relative_l2_error(|_| 1.0, |_| 0.0, grid).is_err());
    }

    #[test]
    fn triangle_inequality_sanity() {
        use crate::trig::{Smooth, TrigPoly};
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let grid = TorusGrid::new(16).unwrap();
        for _ in 0..20 {
            let f = TrigPoly::random(&mut rng, 5);
            let g = TrigPoly::random(&mut rng, 5);
            let nf = l2_norm(|x| f.eval(x), grid).unwrap();
            let ng = l2_norm(|x| g.eval(x), grid).unwrap();
            let nfg = l2_norm(|x| f.eval(x) + g.eval(x), grid).unwrap();
            assert!(nfg <= nf + ng + 1e-12);
        }
    }

    #[test]
    fn weighted_norm_monotone() {
        let base = weighted_norm(1.0, 2.0, 2, 0.1, 0.01);
        assert!(weighted_norm(1.5, 2.0, 2, 0.1, 0.01) >= base);
        assert!(weighted_norm(1.0, 2.5, 2, 0.1, 0.01) >= base);
        assert!(weighted_norm(1.0, 2.0, 2, 0.2, 0.01) >= base);
    }
}
