//! Adaptive Gauss–Kronrod quadrature and a Brent root finder.
//!
//! The 7/15-point Gauss–Kronrod pair is the workhorse for every one-off
//! integral in the crate; piecewise-smooth integrands are split at their
//! junctions by the callers so each panel sees a smooth function.

use crate::error::{Error, Result};

/// Kronrod-15 abscissae on [0, 1] (positive half; symmetric).
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

/// Kronrod-15 weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_23,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Gauss-7 weights for the odd-indexed abscissae of `XGK`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_93,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// One Gauss–Kronrod 7/15 panel; returns (integral, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = 0.0;
    let mut gauss = 0.0;
    for i in 0..8 {
        let (fp, fm) = if i == 7 {
            let v = f(c);
            (v, 0.0)
        } else {
            (f(c + h * XGK[i]), f(c - h * XGK[i]))
        };
        let s = if i == 7 { fp } else { fp + fm };
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    kron *= h;
    gauss *= h;
    let err = (200.0 * (kron - gauss).abs()).powf(1.5).min((kron - gauss).abs());
    (kron, err)
}

/// Adaptive quadrature of `f` over [a, b] to absolute tolerance `abs_tol`.
///
/// Bisects panels whose Kronrod error estimate exceeds their share of the
/// budget. Handles a > b by sign flip; a == b gives 0.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut total = 0.0;
    // manual stack of (a, b, tol, depth)
    let mut stack: Vec<(f64, f64, f64, u32)> = vec![(lo, hi, abs_tol.max(1e-300), 0)];
    while let Some((pa, pb, tol, depth)) = stack.pop() {
        let (val, err) = gk15(&f, pa, pb);
        if err <= tol || depth >= 48 {
            if depth >= 48 && err > tol * 16.0 {
                return Err(Error::QuadratureNoConverge { a: pa, b: pb, err });
            }
            total += val;
        } else {
            let mid = 0.5 * (pa + pb);
            if mid <= pa || mid >= pb {
                // interval cannot be split further in f64
                total += val;
                continue;
            }
            stack.push((pa, mid, 0.5 * tol, depth + 1));
            stack.push((mid, pb, 0.5 * tol, depth + 1));
        }
    }
    Ok(sign * total)
}

/// Brent's method for a root of `f` in [a, b]; requires a sign change.
pub fn brent<F: Fn(f64) -> f64>(
    f: F,
    mut a: f64,
    mut b: f64,
    xtol: f64,
    what: &'static str,
) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(Error::NoBracket { what });
    }
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut mflag = true;
    for _ in 0..200 {
        if fb == 0.0 || (b - a).abs() < xtol {
            return Ok(b);
        }
        let mut s = if fa != fc && fb != fc {
            // inverse quadratic
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let lo = (3.0 * a + b) / 4.0;
        let cond = !((lo.min(b) < s && s < lo.max(b))
            && !(mflag && (s - b).abs() >= (b - c).abs() / 2.0)
            && !(!mflag && (s - b).abs() >= (c - d).abs() / 2.0));
        if cond {
            s = 0.5 * (a + b);
            mflag = true;
        } else {
            mflag = false;
        }
        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if fa * fs < 0.0 {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| 3.0 * x * x, 0.0, 2.0, 1e-13).unwrap();
        assert!((v - 8.0).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_meets_tolerance() {
        let v = integrate(|x| (10.0 * x).sin(), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        let exact = (1.0 - (10.0 * std::f64::consts::PI).cos()) / 10.0;
        assert!((v - exact).abs() < 1e-11);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let v1 = integrate(|x| x.exp(), 0.0, 1.0, 1e-12).unwrap();
        let v2 = integrate(|x| x.exp(), 1.0, 0.0, 1e-12).unwrap();
        assert!((v1 + v2).abs() < 1e-14);
    }

    #[test]
    fn near_singular_log_integrand() {
        // integral of 1/(1-x) over [0, 1 - 1e-9] = ln(1e9)
        let v = integrate(|x| 1.0 / (1.0 - x), 0.0, 1.0 - 1e-9, 1e-10).unwrap();
        assert!((v - 9.0 * std::f64::consts::LN_10).abs() < 1e-8, "v = {v}");
    }

    #[test]
    fn brent_finds_sqrt2() {
        let r = brent(|x| x * x - 2.0, 0.0, 2.0, 1e-15, "sqrt2").unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn brent_requires_bracket() {
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12, "none").is_err());
    }
}
