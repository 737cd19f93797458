//! Jacobi elliptic integrals, the cn function, and the exact cnoidal
//! traveling-wave reference solution, with a finite-difference residual
//! oracle against the governing equation.

use crate::flux::FluxSpec;
use crate::norms::QuadratureRule;
use crate::{Error, Result};
use std::f64::consts::PI;

/// Double-double helpers for the one place plain f64 is not enough: the
/// period used in cn argument reduction. At |x| ~ 1e6 a 1 ulp error in 4K
/// drifts by ~1e5 periods worth of rounding, so the period is carried to
/// roughly 1e-32.
mod dd {
    #[derive(Debug, Clone, Copy)]
    pub struct Dd {
        pub hi: f64,
        pub lo: f64,
    }

    #[inline]
    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    #[inline]
    fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        (s, b - (s - a))
    }

    #[inline]
    pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
        let p = a * b;
        (p, f64::mul_add(a, b, -p))
    }

    impl Dd {
        pub fn from_f64(x: f64) -> Dd {
            Dd { hi: x, lo: 0.0 }
        }

        /// pi to double-double: sin(PI) is the defect of the f64 constant.
        pub fn pi() -> Dd {
            Dd {
                hi: std::f64::consts::PI,
                lo: std::f64::consts::PI.sin(),
            }
        }

        pub fn add(self, o: Dd) -> Dd {
            let (s, e) = two_sum(self.hi, o.hi);
            let (hi, lo) = quick_two_sum(s, e + self.lo + o.lo);
            Dd { hi, lo }
        }

        pub fn sub(self, o: Dd) -> Dd {
            self.add(Dd {
                hi: -o.hi,
                lo: -o.lo,
            })
        }

        pub fn mul(self, o: Dd) -> Dd {
            let (p, e) = two_prod(self.hi, o.hi);
            let (hi, lo) = quick_two_sum(p, e + self.hi * o.lo + self.lo * o.hi);
            Dd { hi, lo }
        }

        pub fn div(self, o: Dd) -> Dd {
            let q1 = self.hi / o.hi;
            let r = self.sub(o.mul(Dd::from_f64(q1)));
            let q2 = r.hi / o.hi;
            let r2 = r.sub(o.mul(Dd::from_f64(q2)));
            let q3 = r2.hi / o.hi;
            let (s, e) = quick_two_sum(q1, q2);
            Dd { hi: s, lo: e + q3 }
        }

        pub fn sqrt(self) -> Dd {
            let x0 = self.hi.sqrt();
            if x0 == 0.0 {
                return Dd::from_f64(0.0);
            }
            let diff = self.sub(Dd::from_f64(x0).mul(Dd::from_f64(x0)));
            let corr = diff.hi / (2.0 * x0);
            let (hi, lo) = quick_two_sum(x0, corr);
            Dd { hi, lo }
        }

        /// Exact for powers of two.
        pub fn scale(self, c: f64) -> Dd {
            Dd {
                hi: self.hi * c,
                lo: self.lo * c,
            }
        }
    }
}

use dd::Dd;

const AGM_TOL: f64 = 1e-16;
const AGM_MAX_ITER: usize = 40;

/// Complete elliptic integral of the first kind, K(k) = pi / (2 AGM(1, k')).
pub fn complete_k(k: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::Domain(format!("modulus k = {k} outside [0, 1)")));
    }
    let mut a = 1.0f64;
    let mut b = (1.0 - k * k).sqrt();
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() <= AGM_TOL * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    Ok(PI / (2.0 * a))
}

/// K(k) in double-double, for the cn period.
fn complete_k_dd(k: f64) -> Dd {
    let ksq = {
        let (p, e) = dd::two_prod(k, k);
        Dd { hi: p, lo: e }
    };
    let mut a = Dd::from_f64(1.0);
    let mut b = Dd::from_f64(1.0).sub(ksq).sqrt();
    for _ in 0..AGM_MAX_ITER {
        if (a.hi - b.hi).abs() <= 1e-30 * a.hi {
            break;
        }
        let an = a.add(b).scale(0.5);
        b = a.mul(b).sqrt();
        a = an;
    }
    Dd::pi().div(a.scale(2.0))
}

/// Incomplete elliptic integral of the first kind,
/// F(phi, k) = integral_0^phi dtheta / sqrt(1 - k^2 sin^2 theta).
///
/// The argument is reduced by the quasi-period F(phi + pi) = F(phi) + 2K
/// and the remainder integrated by composite 7-node Gauss-Legendre panels.
pub fn incomplete_f(phi: f64, k: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::Domain(format!("modulus k = {k} outside [0, 1)")));
    }
    if !phi.is_finite() {
        return Err(Error::NonFinite { what: "amplitude" });
    }
    let m = (phi / PI).round();
    let phi_r = phi - m * PI;
    let base = if m == 0.0 {
        0.0
    } else {
        2.0 * m * complete_k(k)?
    };

    let ksq = k * k;
    let rule = QuadratureRule::gauss7();
    let panels = ((phi_r.abs() / 0.05).ceil() as usize).max(1);
    let width = phi_r / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        acc += rule.integrate_cell(p as f64 * width, width, |t| {
            1.0 / (1.0 - ksq * t.sin() * t.sin()).sqrt()
        });
    }
    Ok(base + acc)
}

/// Jacobi amplitude on a reduced argument, by the AGM ladder with the
/// classical backward half-angle recursion.
fn jacobi_am_reduced(x: f64, k: f64) -> f64 {
    let mut a = [0.0f64; AGM_MAX_ITER + 1];
    let mut c = [0.0f64; AGM_MAX_ITER + 1];
    a[0] = 1.0;
    c[0] = k;
    let mut b = (1.0 - k * k).sqrt();
    let mut n = 0;
    while c[n].abs() > 1e-17 * a[n] && n < AGM_MAX_ITER {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
    }
    let mut phi = (1u64 << n) as f64 * a[n] * x;
    for i in (1..=n).rev() {
        let s = (c[i] / a[i] * phi.sin()).clamp(-1.0, 1.0);
        phi = 0.5 * (phi + s.asin());
    }
    phi
}

/// sn, cn, dn at x for modulus k in [0, 1), with the argument folded into
/// one 4K period in double-double precision first.
pub fn jacobi_sn_cn_dn(x: f64, k: f64) -> Result<(f64, f64, f64)> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::Domain(format!("modulus k = {k} outside [0, 1)")));
    }
    if !x.is_finite() {
        return Err(Error::NonFinite {
            what: "cn argument",
        });
    }
    let period = complete_k_dd(k).scale(4.0);
    let n = (x / period.hi).round();
    let xr = if n == 0.0 {
        x
    } else {
        let (p, e) = dd::two_prod(n, period.hi);
        ((x - p) - e) - n * period.lo
    };
    let phi = jacobi_am_reduced(xr, k);
    let (sn, cn) = phi.sin_cos();
    let dn = (1.0 - (k * sn) * (k * sn)).max(0.0).sqrt();
    Ok((sn, cn, dn))
}

/// cn(x, k) = cos(am(x, k)).
pub fn jacobi_cn(x: f64, k: f64) -> Result<f64> {
    Ok(jacobi_sn_cn_dn(x, k)?.1)
}

/// A solution u(x, t) with analytic x-derivatives up to order 2.
pub trait ExactSolution {
    fn eval_xt(&self, x: f64, t: f64) -> f64;
    fn deriv_x(&self, x: f64, t: f64, order: u32) -> f64;
}

/// u(x, t) = mean + amplitude * cn^power(wavenumber * (x - speed t), modulus).
#[derive(Debug, Clone)]
struct TravelingCn {
    mean: f64,
    amplitude: f64,
    wavenumber: f64,
    modulus: f64,
    speed: f64,
    power: u8,
}

impl TravelingCn {
    fn theta(&self, x: f64, t: f64) -> f64 {
        self.wavenumber * (x - self.speed * t)
    }
}

impl ExactSolution for TravelingCn {
    fn eval_xt(&self, x: f64, t: f64) -> f64 {
        let (_, cn, _) = jacobi_sn_cn_dn(self.theta(x, t), self.modulus)
            .expect("validated modulus and finite argument");
        let profile = if self.power == 2 { cn * cn } else { cn };
        self.mean + self.amplitude * profile
    }

    fn deriv_x(&self, x: f64, t: f64, order: u32) -> f64 {
        let k = self.modulus;
        let (sn, cn, dn) =
            jacobi_sn_cn_dn(self.theta(x, t), k).expect("validated modulus and finite argument");
        let b = self.amplitude;
        let c = self.wavenumber;
        // cn' = -sn dn, cn'' = -cn (dn^2 - k^2 sn^2)
        match (order, self.power) {
            (0, _) => self.eval_xt(x, t),
            (1, 2) => -2.0 * b * c * cn * sn * dn,
            (1, 1) => -b * c * sn * dn,
            (2, 2) => {
                2.0 * b
                    * c
                    * c
                    * (sn * sn * dn * dn - cn * cn * dn * dn + k * k * sn * sn * cn * cn)
            }
            (2, 1) => -b * c * c * cn * (dn * dn - k * k * sn * sn),
            _ => panic!("analytic x-derivatives available up to order 2"),
        }
    }
}

/// A 1-periodic exact cnoidal traveling wave.
#[derive(Debug, Clone)]
pub struct CnoidalWave {
    inner: TravelingCn,
}

impl CnoidalWave {
    /// Validates modulus, wavenumber, and 1-periodicity of the profile:
    /// cn^2 has theta-period 2K and cn has 4K, so the wavenumber must be an
    /// integer multiple of that period.
    pub fn new(
        mean: f64,
        amplitude: f64,
        wavenumber: f64,
        modulus: f64,
        speed: f64,
        power: u8,
    ) -> Result<Self> {
        if !(modulus > 0.0 && modulus < 1.0) {
            return Err(Error::Domain(format!(
                "modulus k = {modulus} outside (0, 1)"
            )));
        }
        if wavenumber.is_nan() || wavenumber <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "wavenumber {wavenumber} must be positive"
            )));
        }
        if !(power == 1 || power == 2) {
            return Err(Error::InvalidInput(format!("profile power {power}")));
        }
        let kk = complete_k(modulus)?;
        let theta_period = if power == 2 { 2.0 * kk } else { 4.0 * kk };
        let cycles = wavenumber / theta_period;
        if (cycles - cycles.round()).abs() > 1e-9 || cycles.round() < 1.0 {
            return Err(Error::InvalidInput(format!(
                "wavenumber {wavenumber} is not a whole number of profile periods \
                 ({cycles} cycles): the wave would not be 1-periodic"
            )));
        }
        Ok(CnoidalWave {
            inner: TravelingCn {
                mean,
                amplitude,
                wavenumber,
                modulus,
                speed,
                power,
            },
        })
    }

    pub fn mean(&self) -> f64 {
        self.inner.mean
    }

    pub fn amplitude(&self) -> f64 {
        self.inner.amplitude
    }

    pub fn wavenumber(&self) -> f64 {
        self.inner.wavenumber
    }

    pub fn modulus(&self) -> f64 {
        self.inner.modulus
    }

    pub fn speed(&self) -> f64 {
        self.inner.speed
    }

    pub fn power(&self) -> u8 {
        self.inner.power
    }

    /// Residuals of the traveling-wave conditions b = 12 nu k^2 c^2 and
    /// v = mean + nu c^2 (8 k^2 - 4), relative; both must vanish for the
    /// wave to solve the equation with f(u) = u.
    pub fn traveling_wave_residuals(&self, nu: f64) -> (f64, f64) {
        let w = &self.inner;
        let k2 = w.modulus * w.modulus;
        let c2 = w.wavenumber * w.wavenumber;
        let b_exact = 12.0 * nu * k2 * c2;
        let v_exact = w.mean + nu * c2 * (8.0 * k2 - 4.0);
        (
            (w.amplitude - b_exact).abs() / b_exact.abs().max(1e-300),
            (w.speed - v_exact).abs() / v_exact.abs().max(1e-300),
        )
    }

    pub fn initial_condition(&self) -> impl Fn(f64) -> f64 + '_ {
        move |x| self.inner.eval_xt(x, 0.0)
    }

    pub fn initial_derivative(&self) -> impl Fn(f64) -> f64 + '_ {
        move |x| self.inner.deriv_x(x, 0.0, 1)
    }
}

impl ExactSolution for CnoidalWave {
    fn eval_xt(&self, x: f64, t: f64) -> f64 {
        self.inner.eval_xt(x, t)
    }

    fn deriv_x(&self, x: f64, t: f64, order: u32) -> f64 {
        self.inner.deriv_x(x, t, order)
    }
}

/// The 1-periodic cnoidal wave solving u_t + u u_x + nu u_xxx = 0 with
/// mean 1/10, modulus 1/sqrt(2), wavenumber 2K: amplitude 12 nu k^2 c^2
/// = 6 nu c^2 and speed equal to the mean (8 k^2 - 4 vanishes here).
pub fn corrected_cnoidal(nu: f64) -> Result<CnoidalWave> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::InvalidInput(format!("nu = {nu} must be positive")));
    }
    let modulus = 0.5f64.sqrt();
    let kk = complete_k(modulus)?;
    let c = 2.0 * kk;
    let mean = 0.1;
    let amplitude = 6.0 * nu * c * c;
    let speed = mean;
    let wave = CnoidalWave::new(mean, amplitude, c, modulus, speed, 2)?;
    let (rb, rv) = wave.traveling_wave_residuals(nu);
    debug_assert!(rb <= 1e-12 && rv <= 1e-12);
    Ok(wave)
}

/// The initial-condition formula as printed in the experiment writeup,
/// u0(x) = 1/10 + (3 nu / 2K) cn(2K x, 1/sqrt 2), translated at speed 1/10.
///
/// This profile is kept verbatim for comparison. It is not 1-periodic
/// (cn at argument scale 2K has x-period 2) and does not satisfy the
/// equation; see `pde_residual`. The 1-periodic reference that does is
/// [`corrected_cnoidal`].
#[derive(Debug, Clone)]
pub struct PrintedWave {
    inner: TravelingCn,
}

pub fn paper_initial_condition(nu: f64) -> Result<PrintedWave> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::InvalidInput(format!("nu = {nu} must be positive")));
    }
    let modulus = 0.5f64.sqrt();
    let kk = complete_k(modulus)?;
    Ok(PrintedWave {
        inner: TravelingCn {
            mean: 0.1,
            amplitude: 3.0 * nu / (2.0 * kk),
            wavenumber: 2.0 * kk,
            modulus,
            speed: 0.1,
            power: 1,
        },
    })
}

impl PrintedWave {
    pub fn initial_condition(&self) -> impl Fn(f64) -> f64 + '_ {
        move |x| self.inner.eval_xt(x, 0.0)
    }
}

impl ExactSolution for PrintedWave {
    fn eval_xt(&self, x: f64, t: f64) -> f64 {
        self.inner.eval_xt(x, t)
    }

    fn deriv_x(&self, x: f64, t: f64, order: u32) -> f64 {
        self.inner.deriv_x(x, t, order)
    }
}

/// Finite-difference estimate of u_t + f(u) u_x + nu u_xxx at (x, t).
///
/// Fourth-order central differences for u_t and u_x; third derivative by
/// Richardson extrapolation of the five-point stencil with an x-step on
/// the dispersive length scale nu^{1/3}. On the exact wave the value is
/// pure truncation + rounding noise, around 1e-9 for nu = 1e-3.
pub fn pde_residual(sol: &dyn ExactSolution, nu: f64, flux: &FluxSpec, x: f64, t: f64) -> f64 {
    let ht = 1e-3;
    let hx = 1e-2 * nu.cbrt();
    let u = sol.eval_xt(x, t);
    let ut = (sol.eval_xt(x, t - 2.0 * ht) - 8.0 * sol.eval_xt(x, t - ht)
        + 8.0 * sol.eval_xt(x, t + ht)
        - sol.eval_xt(x, t + 2.0 * ht))
        / (12.0 * ht);
    let ux = (sol.eval_xt(x - 2.0 * hx, t) - 8.0 * sol.eval_xt(x - hx, t)
        + 8.0 * sol.eval_xt(x + hx, t)
        - sol.eval_xt(x + 2.0 * hx, t))
        / (12.0 * hx);
    let d3 = |h: f64| {
        (-sol.eval_xt(x - 2.0 * h, t) + 2.0 * sol.eval_xt(x - h, t) - 2.0 * sol.eval_xt(x + h, t)
            + sol.eval_xt(x + 2.0 * h, t))
            / (2.0 * h * h * h)
    };
    let uxxx = (4.0 * d3(0.5 * hx) - d3(hx)) / 3.0;
    ut + flux.f(u) * ux + nu * uxxx
}
