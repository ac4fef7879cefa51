//! Adaptive quadrature rules for complex-valued integrands.
//!
//! Two unrelated rules live here on purpose: a globally adaptive 15-point
//! Gauss–Kronrod rule for scalar integrands, and a locally adaptive Simpson
//! rule with Richardson correction for vector-valued integrands. The integral
//! matrix oracle uses the latter so it shares no nodes with the former.

use num_complex::Complex64;

use crate::error::{Error, Result};

// Kronrod abscissae on [0, 1); the odd-indexed ones are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SEGMENTS: usize = 10_000;

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: Complex64,
    error: f64,
}

fn gk15<F: Fn(f64) -> Complex64>(f: &F, lo: f64, hi: f64) -> Segment {
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    Segment {
        lo,
        hi,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).norm(),
    }
}

/// Integrates `f` over `[lo, hi]` to an absolute error estimate below `tol`,
/// bisecting the segment with the largest error estimate until done.
pub(crate) fn gauss_kronrod<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("quadrature tolerance must be positive, got {tol}")));
    }
    if hi == lo {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut segments = vec![gk15(&f, lo, hi)];
    loop {
        let total_error: f64 = segments.iter().map(|s| s.error).sum();
        if total_error <= tol {
            return Ok(segments.iter().map(|s| s.value).sum());
        }
        if segments.len() >= MAX_SEGMENTS {
            return Err(Error::Numerical(format!(
                "Gauss-Kronrod did not converge: error estimate {total_error:e} > {tol:e}"
            )));
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .expect("at least one segment");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.lo + seg.hi);
        segments.push(gk15(&f, seg.lo, mid));
        segments.push(gk15(&f, mid, seg.hi));
    }
}

/// Adaptive Simpson integration of a vector-valued integrand. `f` writes
/// `dim` values into the provided buffer. The local acceptance test is
/// proportional to segment width, so the summed error stays below `tol` in
/// every component.
pub(crate) fn adaptive_simpson<F>(f: F, dim: usize, lo: f64, hi: f64, tol: f64) -> Result<Vec<Complex64>>
where
    F: Fn(f64, &mut [Complex64]),
{
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("quadrature tolerance must be positive, got {tol}")));
    }
    let mut total = vec![Complex64::new(0.0, 0.0); dim];
    if hi == lo {
        return Ok(total);
    }
    let width = hi - lo;
    let eval = |x: f64| {
        let mut buf = vec![Complex64::new(0.0, 0.0); dim];
        f(x, &mut buf);
        buf
    };

    struct Panel {
        lo: f64,
        hi: f64,
        f_lo: Vec<Complex64>,
        f_mid: Vec<Complex64>,
        f_hi: Vec<Complex64>,
        depth: u32,
    }

    let mut stack = vec![Panel {
        lo,
        hi,
        f_lo: eval(lo),
        f_mid: eval(0.5 * (lo + hi)),
        f_hi: eval(hi),
        depth: 0,
    }];

    while let Some(p) = stack.pop() {
        let h = p.hi - p.lo;
        let mid = 0.5 * (p.lo + p.hi);
        let f_l = eval(0.5 * (p.lo + mid));
        let f_r = eval(0.5 * (mid + p.hi));
        let mut worst = 0.0f64;
        let mut refined = vec![Complex64::new(0.0, 0.0); dim];
        for i in 0..dim {
            let coarse = (p.f_lo[i] + p.f_mid[i] * 4.0 + p.f_hi[i]) * (h / 6.0);
            let fine = (p.f_lo[i] + f_l[i] * 4.0 + p.f_mid[i] * 2.0 + f_r[i] * 4.0 + p.f_hi[i])
                * (h / 12.0);
            let diff = fine - coarse;
            worst = worst.max(diff.norm());
            refined[i] = fine + diff / 15.0;
        }
        // a minimum depth keeps the rule from trusting a coarse panel whose
        // samples happen to agree on an oscillating integrand
        let settled = p.depth >= 4 && worst <= 15.0 * tol * h / width;
        if settled {
            for (t, r) in total.iter_mut().zip(refined) {
                *t += r;
            }
        } else if p.depth >= 50 {
            return Err(Error::Numerical(format!(
                "adaptive Simpson did not converge near [{}, {}]",
                p.lo, p.hi
            )));
        } else {
            stack.push(Panel {
                lo: p.lo,
                hi: mid,
                f_lo: p.f_lo,
                f_mid: f_l,
                f_hi: p.f_mid.clone(),
                depth: p.depth + 1,
            });
            stack.push(Panel {
                lo: mid,
                hi: p.hi,
                f_lo: p.f_mid,
                f_mid: f_r,
                f_hi: p.f_hi,
                depth: p.depth + 1,
            });
        }
    }
    Ok(total)
}
