//! Periodic piecewise-cubic interpolation: the C^2 spline and the C^1
//! Hermite operator, plus executable checks of the orthogonality and
//! approximation hypotheses they are assumed to satisfy.

use crate::norms::QuadratureRule;
use crate::torus::{wrap_unchecked, GridFunction, TorusGrid};
use crate::trig::Smooth;
use crate::{Error, Result};

/// Smoothness class of a periodic piecewise cubic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothnessClass {
    C2Spline,
    C1Hermite,
}

/// Which interpolation operator to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpKind {
    Spline,
    Hermite,
}

/// Nodal values plus nodal first derivatives, the data of the Hermite
/// operator.
#[derive(Debug, Clone)]
pub struct HermiteData {
    grid: TorusGrid,
    values: Vec<f64>,
    derivs: Vec<f64>,
}

impl HermiteData {
    pub fn new(grid: TorusGrid, values: Vec<f64>, derivs: Vec<f64>) -> Result<Self> {
        if values.len() != grid.nx() || derivs.len() != grid.nx() {
            return Err(Error::InvalidInput(format!(
                "hermite data lengths ({}, {}) do not match nx = {}",
                values.len(),
                derivs.len(),
                grid.nx()
            )));
        }
        if let Some(j) = values
            .iter()
            .chain(derivs.iter())
            .position(|v| !v.is_finite())
        {
            return Err(Error::NonFiniteSample {
                index: j % grid.nx(),
                x: grid.node(j % grid.nx()),
            });
        }
        Ok(HermiteData {
            grid,
            values,
            derivs,
        })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn derivs(&self) -> &[f64] {
        &self.derivs
    }
}

/// A periodic piecewise cubic, stored as monomial coefficients per cell in
/// the local coordinate xi = (x - x_j) / h of the cell [x_j, x_{j+1}).
#[derive(Debug, Clone)]
pub struct PiecewiseCubic {
    grid: TorusGrid,
    /// coeffs[j] = [c0, c1, c2, c3]: p_j(xi) = c0 + c1 xi + c2 xi^2 + c3 xi^3
    coeffs: Vec<[f64; 4]>,
    smoothness: SmoothnessClass,
}

impl PiecewiseCubic {
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn smoothness(&self) -> SmoothnessClass {
        self.smoothness
    }

    pub fn cell_coeffs(&self, j: usize) -> [f64; 4] {
        self.coeffs[j]
    }

    /// Evaluate the interpolant or its `order`-th derivative at wrap(x).
    ///
    /// The cell is located as floor(wrap(x) * nx); a point landing exactly
    /// on a node belongs to the cell on its right (left-closed convention).
    pub fn eval(&self, x: f64, order: u32) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::NonFinite { what: "eval point" });
        }
        if order > 3 {
            return Err(Error::InvalidInput(format!("derivative order {order} > 3")));
        }
        Ok(self.eval_unchecked(x, order))
    }

    /// `eval` without the input checks, for quadrature and stepping loops.
    #[inline]
    pub fn eval_unchecked(&self, x: f64, order: u32) -> f64 {
        let nx = self.grid.nx() as f64;
        let s = wrap_unchecked(x) * nx;
        let j = (s as usize).min(self.grid.nx() - 1);
        let xi = s - j as f64;
        let c = &self.coeffs[j];
        let h = self.grid.h();
        match order {
            0 => ((c[3] * xi + c[2]) * xi + c[1]) * xi + c[0],
            1 => ((3.0 * c[3] * xi + 2.0 * c[2]) * xi + c[1]) / h,
            2 => (6.0 * c[3] * xi + 2.0 * c[2]) / (h * h),
            _ => 6.0 * c[3] / (h * h * h),
        }
    }
}

/// Monomial coefficients of the cubic matching values and first derivatives
/// at both cell endpoints.
#[inline]
fn hermite_cell(h: f64, u0: f64, u1: f64, v0: f64, v1: f64) -> [f64; 4] {
    let d = u1 - u0;
    [
        u0,
        h * v0,
        3.0 * d - h * (2.0 * v0 + v1),
        -2.0 * d + h * (v0 + v1),
    ]
}

/// The unique periodic C^1 piecewise cubic matching the Hermite data.
pub fn build_cubic_hermite(hd: &HermiteData) -> Result<PiecewiseCubic> {
    let grid = hd.grid();
    let nx = grid.nx();
    let h = grid.h();
    let u = hd.values();
    let v = hd.derivs();
    let coeffs = (0..nx)
        .map(|j| {
            let jn = (j + 1) % nx;
            hermite_cell(h, u[j], u[jn], v[j], v[jn])
        })
        .collect();
    Ok(PiecewiseCubic {
        grid,
        coeffs,
        smoothness: SmoothnessClass::C1Hermite,
    })
}

/// The unique periodic C^2 cubic spline interpolating the nodal values.
///
/// Second-derivative continuity at the nodes gives the cyclic tridiagonal
/// system m_{j-1} + 4 m_j + m_{j+1} = 3 (u_{j+1} - u_{j-1}) / h for the
/// nodal slopes m_j, solved by a rank-one (Sherman-Morrison) correction of
/// the Thomas algorithm.
pub fn build_periodic_cubic_spline(gf: &GridFunction) -> Result<PiecewiseCubic> {
    let grid = gf.grid();
    let nx = grid.nx();
    let h = grid.h();
    let u = gf.values();

    let sub = vec![1.0; nx];
    let diag = vec![4.0; nx];
    let sup = vec![1.0; nx];
    let rhs: Vec<f64> = (0..nx)
        .map(|j| {
            let jp = (j + 1) % nx;
            let jm = (j + nx - 1) % nx;
            3.0 * (u[jp] - u[jm]) / h
        })
        .collect();
    let m = solve_cyclic_tridiagonal(&sub, &diag, &sup, 1.0, 1.0, &rhs)?;

    let coeffs = (0..nx)
        .map(|j| {
            let jn = (j + 1) % nx;
            hermite_cell(h, u[j], u[jn], m[j], m[jn])
        })
        .collect();
    Ok(PiecewiseCubic {
        grid,
        coeffs,
        smoothness: SmoothnessClass::C2Spline,
    })
}

/// Sample a smooth function and build the requested interpolant.
pub fn interpolate_smooth(
    v: &dyn Smooth,
    grid: TorusGrid,
    kind: InterpKind,
) -> Result<PiecewiseCubic> {
    match kind {
        InterpKind::Spline => {
            let gf = GridFunction::sample(grid, |x| v.eval(x))?;
            build_periodic_cubic_spline(&gf)
        }
        InterpKind::Hermite => {
            let values = grid.nodes().map(|x| v.eval(x)).collect();
            let derivs = grid.nodes().map(|x| v.eval_deriv(x, 1)).collect();
            build_cubic_hermite(&HermiteData::new(grid, values, derivs)?)
        }
    }
}

/// Solve the cyclic tridiagonal system with corner entries
/// A[0][n-1] = `corner_tr` and A[n-1][0] = `corner_bl`.
fn solve_cyclic_tridiagonal(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    corner_bl: f64,
    corner_tr: f64,
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    if n < 3 {
        return Err(Error::SplineSolve("system too small".into()));
    }
    let gamma = -diag[0];
    let mut dmod = diag.to_vec();
    dmod[0] -= gamma;
    dmod[n - 1] -= corner_tr * corner_bl / gamma;

    let x = solve_tridiagonal(sub, &dmod, sup, rhs)?;
    let mut uvec = vec![0.0; n];
    uvec[0] = gamma;
    uvec[n - 1] = corner_bl;
    let z = solve_tridiagonal(sub, &dmod, sup, &uvec)?;

    let denom = 1.0 + z[0] + corner_tr * z[n - 1] / gamma;
    if denom.abs() < 1e-300 || !denom.is_finite() {
        return Err(Error::SplineSolve(format!(
            "rank-one correction denominator {denom}"
        )));
    }
    let fact = (x[0] + corner_tr * x[n - 1] / gamma) / denom;
    Ok(x.iter().zip(&z).map(|(&xi, &zi)| xi - fact * zi).collect())
}

/// Thomas algorithm; reports rather than divides through a vanishing pivot.
fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot.abs() < 1e-300 || !pivot.is_finite() {
        return Err(Error::SplineSolve("zero pivot at row 0".into()));
    }
    c[0] = sup[0] / pivot;
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - sub[i] * c[i - 1];
        if pivot.abs() < 1e-300 || !pivot.is_finite() {
            return Err(Error::SplineSolve(format!("zero pivot at row {i}")));
        }
        if i < n - 1 {
            c[i] = sup[i] / pivot;
        }
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / pivot;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

/// Residual of the orthogonality hypothesis:
/// integral over T of d^2(v - I_h v) * d^2(I_h w) dx.
///
/// Per cell the interpolant factors are polynomials (integrated exactly by
/// the degree-13 rule) while the d^2 v factor rides on the same 7-node
/// Gauss-Legendre points.
pub fn p1_orthogonality_residual(
    v: &dyn Smooth,
    w: &dyn Smooth,
    grid: TorusGrid,
    kind: InterpKind,
) -> Result<f64> {
    let iv = interpolate_smooth(v, grid, kind)?;
    let iw = interpolate_smooth(w, grid, kind)?;
    let rule = QuadratureRule::gauss7();
    let h = grid.h();
    let mut acc = 0.0;
    for j in 0..grid.nx() {
        acc += rule.integrate_cell(grid.node(j), h, |x| {
            (v.eval_deriv(x, 2) - iv.eval_unchecked(x, 2)) * iw.eval_unchecked(x, 2)
        });
    }
    Ok(acc)
}

/// (||v - I_h v||_{L^2}, |v - I_h v|_{2,2}) by composite quadrature.
pub fn interpolation_error_norms(
    v: &dyn Smooth,
    grid: TorusGrid,
    kind: InterpKind,
) -> Result<(f64, f64)> {
    let iv = interpolate_smooth(v, grid, kind)?;
    let rule = QuadratureRule::gauss7();
    let h = grid.h();
    let mut l2 = 0.0;
    let mut h2 = 0.0;
    for j in 0..grid.nx() {
        l2 += rule.integrate_cell(grid.node(j), h, |x| {
            let e = v.eval(x) - iv.eval_unchecked(x, 0);
            e * e
        });
        h2 += rule.integrate_cell(grid.node(j), h, |x| {
            let e = v.eval_deriv(x, 2) - iv.eval_unchecked(x, 2);
            e * e
        });
    }
    Ok((l2.max(0.0).sqrt(), h2.max(0.0).sqrt()))
}
