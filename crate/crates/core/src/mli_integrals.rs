//! Main-lobe integral matrices `R_S = ∫_S h(θ) h(θ)^H dθ`.
//!
//! [`r_matrix_closed`] follows the per-subinterval change of variables that
//! reduces every entry to a scaled [`g_b`] value. [`r_matrix_quadrature`]
//! integrates the outer product directly in `θ` and serves as the
//! independent reference.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::array_model::{ArrayGeometry, IntervalUnion};
use crate::error::{Error, Result};
use crate::quadrature::{adaptive_simpson, gauss_kronrod};

/// Default absolute accuracy for every `g_b` evaluation.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

/// Arguments of the generalized Bessel-type integral
/// `g_b(a, b, c) = (1/2π) ∫_{-π}^{π} exp(a cos(cx) + b sin(cx)) dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbArgs {
    pub a: Complex64,
    pub b: Complex64,
    pub c: f64,
}

impl GbArgs {
    /// Arguments for element lag `lag = p − q` on the subinterval centred at
    /// `centre` with width `width`.
    pub fn for_lag(geom: &ArrayGeometry, lag: i64, centre: f64, width: f64) -> Self {
        let k = 2.0 * PI * lag as f64 * geom.spacing_wl();
        Self {
            a: Complex64::new(0.0, k * centre.cos()),
            b: Complex64::new(0.0, -k * centre.sin()),
            c: width / (2.0 * PI),
        }
    }
}

pub fn g_b(args: &GbArgs, quad_tol: f64) -> Result<Complex64> {
    let GbArgs { a, b, c } = *args;
    let finite = a.re.is_finite() && a.im.is_finite() && b.re.is_finite() && b.im.is_finite();
    if !finite || !c.is_finite() {
        return Err(Error::Domain(format!("non-finite g_b arguments {args:?}")));
    }
    if c < 0.0 {
        return Err(Error::Domain(format!("g_b width parameter must be nonnegative, got {c}")));
    }
    if !(quad_tol > 0.0) {
        return Err(Error::Domain(format!("quad_tol must be positive, got {quad_tol}")));
    }
    if c == 0.0 {
        return Ok(a.exp());
    }
    if a == Complex64::new(0.0, 0.0) && b == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let integrand = |x: f64| {
        let (s, co) = (c * x).sin_cos();
        (a * co + b * s).exp()
    };
    let integral = gauss_kronrod(integrand, -PI, PI, 2.0 * PI * quad_tol)?;
    Ok(integral / (2.0 * PI))
}

/// An `N × N` Hermitian positive semidefinite integral matrix together with
/// the angle set it was integrated over.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralMatrix {
    r: DMatrix<Complex64>,
    source: IntervalUnion,
}

impl IntegralMatrix {
    pub fn zeros(n: usize, source: IntervalUnion) -> Self {
        Self {
            r: DMatrix::zeros(n, n),
            source,
        }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.r
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.r
    }

    pub fn source(&self) -> &IntervalUnion {
        &self.source
    }

    pub fn trace(&self) -> f64 {
        self.r.trace().re
    }

    /// `v^H R v`.
    pub fn quadratic_form(&self, v: &DVector<Complex64>) -> f64 {
        v.dotc(&(&self.r * v)).re
    }
}

/// Entry `(p, q)` of `R_S` depends only on `p − q`; this fills the matrix
/// from the first column `lags[m] = R(m, 0)`.
fn hermitian_toeplitz(lags: &[Complex64]) -> DMatrix<Complex64> {
    let n = lags.len();
    DMatrix::from_fn(n, n, |p, q| {
        if p >= q {
            lags[p - q]
        } else {
            lags[q - p].conj()
        }
    })
}

/// Closed-form integral matrix built from `g_b` evaluations summed over the
/// subintervals of `s`. An empty set yields the zero matrix.
pub fn r_matrix_closed(geom: &ArrayGeometry, s: &IntervalUnion, quad_tol: f64) -> Result<IntegralMatrix> {
    let n = geom.n_elements();
    let nf = n as f64;
    let mut lags = vec![Complex64::new(0.0, 0.0); n];
    for &(lo, hi) in s.intervals() {
        let centre = 0.5 * (lo + hi);
        let width = hi - lo;
        lags[0] += Complex64::new(width / nf, 0.0);
        for (m, lag) in lags.iter_mut().enumerate().skip(1) {
            let args = GbArgs::for_lag(geom, m as i64, centre, width);
            *lag += g_b(&args, quad_tol)? * (width / nf);
        }
    }
    Ok(IntegralMatrix {
        r: hermitian_toeplitz(&lags),
        source: s.clone(),
    })
}

/// Entrywise adaptive quadrature of `h(θ) h(θ)^H` over each subinterval.
pub fn r_matrix_quadrature(geom: &ArrayGeometry, s: &IntervalUnion, tol: f64) -> Result<IntegralMatrix> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let n = geom.n_elements();
    let mut r = DMatrix::zeros(n, n);
    let pieces = s.intervals().len().max(1) as f64;
    for &(lo, hi) in s.intervals() {
        let integrand = |theta: f64, out: &mut [Complex64]| {
            let h = geom.steering_unchecked(theta);
            for q in 0..n {
                for p in 0..n {
                    out[p + q * n] = h[p] * h[q].conj();
                }
            }
        };
        let piece = adaptive_simpson(integrand, n * n, lo, hi, tol / pieces)?;
        r += DMatrix::from_column_slice(n, n, &piece);
    }
    Ok(IntegralMatrix {
        r,
        source: s.clone(),
    })
}
