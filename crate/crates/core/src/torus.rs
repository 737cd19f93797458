//! Uniform periodic mesh on the torus T = R/Z and grid-sampled functions.

use crate::{Error, Result};

/// Wrap a point onto the fundamental domain [0, 1).
///
/// Uses floor-based reduction so large characteristic displacements stay
/// robust. For tiny negative inputs `x - floor(x)` can round up to exactly
/// 1.0; that case is folded back to 0.0.
pub fn wrap(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite { what: "wrap input" });
    }
    let mut r = x - x.floor();
    if r >= 1.0 {
        r -= 1.0;
    }
    Ok(r)
}

/// Infallible wrap for values already checked finite (hot path).
#[inline]
pub(crate) fn wrap_unchecked(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        r - 1.0
    } else {
        r
    }
}

/// Uniform periodic mesh with nodes x_j = j / nx, j = 0 .. nx - 1.
///
/// The node x_0 = 0 is identified with x = 1 on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusGrid {
    nx: usize,
}

impl TorusGrid {
    /// Build a uniform grid with `nx` cells. Requires nx >= 4.
    pub fn new(nx: usize) -> Result<Self> {
        if nx < 4 {
            return Err(Error::GridTooCoarse { nx });
        }
        Ok(TorusGrid { nx })
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Mesh size h = 1 / nx.
    #[inline]
    pub fn h(&self) -> f64 {
        1.0 / self.nx as f64
    }

    /// Node position x_j = j / nx.
    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        debug_assert!(j < self.nx);
        j as f64 / self.nx as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.nx).map(move |j| self.node(j))
    }

    /// Index of the cell [x_j, x_{j+1}) containing wrap(x), left-closed.
    #[inline]
    pub fn cell_of(&self, x_wrapped: f64) -> usize {
        let s = x_wrapped * self.nx as f64;
        // rounding of the product can spill to nx for x just below 1
        (s as usize).min(self.nx - 1)
    }
}

/// Nodal values of a function on a [`TorusGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.nx() {
            return Err(Error::InvalidInput(format!(
                "values length {} does not match nx = {}",
                values.len(),
                grid.nx()
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample {
                index: j,
                x: grid.node(j),
            });
        }
        Ok(GridFunction { grid, values })
    }

    /// Sample `f` at every node.
    pub fn sample(grid: TorusGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.nx());
        for j in 0..grid.nx() {
            let x = grid.node(j);
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::NonFiniteSample { index: j, x });
            }
            values.push(v);
        }
        Ok(GridFunction { grid, values })
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.nx()])
    }

    #[inline]
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wrap_basics() {
        assert_eq!(wrap(0.25).unwrap(), 0.25);
        assert_eq!(wrap(1.0).unwrap(), 0.0);
        assert!((wrap(-0.1).unwrap() - 0.9).abs() < 1e-15);
        assert!(wrap(f64::NAN).is_err());
        assert!(wrap(f64::INFINITY).is_err());
    }

    #[test]
    fn wrap_tiny_negative_stays_in_range() {
        let r = wrap(-1e-20).unwrap();
        assert!((0.0..1.0).contains(&r));
    }

    #[test]
    fn grid_construction() {
        let g = TorusGrid::new(4).unwrap();
        assert_eq!(g.h(), 0.25);
        let nodes: Vec<f64> = g.nodes().collect();
        assert_eq!(nodes, vec![0.0, 0.25, 0.5, 0.75]);
        assert!(matches!(
            TorusGrid::new(3),
            Err(Error::GridTooCoarse { nx: 3 })
        ));
        let g = TorusGrid::new(1000).unwrap();
        assert_eq!(g.h(), 0.001);
        // h * nx = 1 up to one unit of rounding
        assert!((g.h() * g.nx() as f64 - 1.0).abs() <= f64::EPSILON);
    }

    #[test]
    fn sample_values() {
        let g = TorusGrid::new(8).unwrap();
        let gf = GridFunction::sample(g, |_| 1.0).unwrap();
        assert!(gf.values().iter().all(|&v| v == 1.0));

        let g = TorusGrid::new(4).unwrap();
        let gf = GridFunction::sample(g, |x| (2.0 * std::f64::consts::PI * x).sin()).unwrap();
        let expect = [0.0, 1.0, 0.0, -1.0];
        for (v, e) in gf.values().iter().zip(expect) {
            assert!((v - e).abs() < 1e-15, "{v} vs {e}");
        }
    }

    #[test]
    fn sample_rejects_non_finite_with_index() {
        let g = TorusGrid::new(8).unwrap();
        let err = GridFunction::sample(g, |x| if x == 0.25 { f64::NAN } else { 0.0 }).unwrap_err();
        match err {
            Error::NonFiniteSample { index, .. } => assert_eq!(index, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn wrap_idempotent(x in -1e6f64..1e6) {
            let once = wrap(x).unwrap();
            let twice = wrap(once).unwrap();
            prop_assert_eq!(once, twice);
            prop_assert!((0.0..1.0).contains(&once));
        }

        #[test]
        fn wrap_periodic(x in -1e6f64..1e6) {
            let a = wrap(x).unwrap();
            let b = wrap(x + 1.0).unwrap();
            // compare on the circle: x + 1 itself carries the rounding of
            // the addition at magnitude |x|, and a result near the seam may
            // fold to the other side
            let d = (a - b).abs();
            let d = d.min(1.0 - d);
            prop_assert!(d <= 1e-9, "wrap({x}) = {a}, wrap(x+1) = {b}");
        }

        #[test]
        fn sample_constant_is_constant(c in -1e3f64..1e3, nx in 4usize..64) {
            let g = TorusGrid::new(nx).unwrap();
            let gf = GridFunction::sample(g, |_| c).unwrap();
            prop_assert!(gf.values().iter().all(|&v| v == c));
        }
    }
}
