//! Rotationally symmetric metrics ds^2 = dr^2 + phi(r)^2 dtheta^2 on the
//! closed unit (n-1)-disk, built around the explicit warped profile
//!
//!   phi(r) = exp(((n-1)/(n-2)) H asin(r - r1)) / (1 - (r1 - r)^2)^(1/(2(n-2)))
//!
//! on [r0, r1], capped near the axis by an odd polynomial and flattened to a
//! constant on [r2, 1]. The cap is fitted so that the accumulated integral
//! h(r) = (n-1) H int_0^r phi^(n-2) matches the closed form
//! h(r) = exp((n-1) H asin(r - r1)) on [r0, r1]; without that matching the
//! zero-flux graph solution misses the axis and the graph leaves would
//! asymptote to the wrong cylinder.

use crate::error::{Error, Result};
use crate::quad;
use crate::report::{Check, Provenance, VerificationReport};
use serde::{Deserialize, Serialize};

/// Ambient dimension n >= 3 of the product D^(n-1) x R.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Dimension(u32);

impl Dimension {
    pub fn new(n: u32) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: format!("ambient dimension must be >= 3, got {n}"),
            });
        }
        Ok(Dimension(n))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// Exponent n - 2 applied to phi in volumes and the first integral.
    pub fn sphere_exponent(self) -> f64 {
        (self.0 - 2) as f64
    }
}

impl TryFrom<u32> for Dimension {
    type Error = Error;
    fn try_from(n: u32) -> Result<Self> {
        Dimension::new(n)
    }
}

impl From<Dimension> for u32 {
    fn from(d: Dimension) -> u32 {
        d.0
    }
}

const QUAD_TOL: f64 = 1e-12;
const CAP_FIT_TOL: f64 = 1e-13;
const JUNCTION_TOL: f64 = 1e-9;
const CAP_GRID: usize = 10_000;
const BLEND_GRID: usize = 2_001;
const MAX_R0_HALVINGS: u32 = 6;
const MAX_BLEND_BUMPS: u32 = 60;

/// Evaluate a polynomial and its first two derivatives at x (Horner).
fn poly_eval2(coeffs: &[f64], x: f64) -> (f64, f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    let mut ddp = 0.0;
    for &c in coeffs.iter().rev() {
        ddp = ddp * x + 2.0 * dp;
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp, ddp)
}

/// Solve a 3x3 linear system with partial pivoting.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut s = b[row];
        for k in row + 1..3 {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x
}

/// The explicit closed-form branch of phi and its companions.
#[derive(Debug, Clone, Copy)]
struct Explicit {
    a: f64,    // (n-1)/(n-2) * H
    beta: f64, // 1/(2(n-2))
    nh: f64,   // (n-1) * H
    r1: f64,
}

impl Explicit {
    fn new(n: Dimension, h: f64, r1: f64) -> Self {
        let nm2 = n.sphere_exponent();
        let nm1 = (n.get() - 1) as f64;
        Explicit {
            a: nm1 / nm2 * h,
            beta: 1.0 / (2.0 * nm2),
            nh: nm1 * h,
            r1,
        }
    }

    fn eval(&self, r: f64) -> Result<(f64, f64, f64)> {
        let u = r - self.r1;
        let q = 1.0 - u * u;
        if q <= 0.0 {
            return Err(Error::Domain {
                what: "explicit profile argument 1 - (r1 - r)^2",
                value: q,
            });
        }
        let phi = (self.a * u.asin()).exp() / q.powf(self.beta);
        let l = self.a / q.sqrt() + 2.0 * self.beta * u / q;
        let lp = self.a * u * q.powf(-1.5) + 2.0 * self.beta * (1.0 + u * u) / (q * q);
        Ok((phi, phi * l, phi * (l * l + lp)))
    }

    /// Closed form of the accumulated integral on the explicit branch.
    fn h_closed(&self, r: f64) -> f64 {
        (self.nh * (r - self.r1).asin()).exp()
    }
}

/// Warped-profile generator: piecewise phi on [0, 1] with cached integral
/// constants. Immutable after construction; all evaluators are pure.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    n: Dimension,
    h_target: f64,
    r0: f64,
    r1: f64,
    r2: f64,
    /// phi(r) = r * p(r^2) on [0, r0]; coefficients of p.
    cap_coeffs: Vec<f64>,
    /// degree-5 coefficients in t = (r - r1)/(r2 - r1) on [r1, r2].
    blend_coeffs: Vec<f64>,
    /// constant value of phi on [r2, 1].
    c: f64,
    expl: Explicit,
    // accumulated (n-1) H int phi^(n-2) at the junctions
    h_r0: f64,
    h_r1: f64,
    h_r2: f64,
    // cumulative panel table for h on [0, r2]: (panel end, accumulated value);
    // built once at construction so h() only integrates a partial panel
    h_table: Vec<(f64, f64)>,
}

/// Serialized form: just the construction data.
#[derive(Serialize, Deserialize)]
struct ProfileRepr {
    n: u32,
    #[serde(rename = "H")]
    h: f64,
    r0: f64,
    r1: f64,
    r2: f64,
    cap_coeffs: Vec<f64>,
    blend_coeffs: Vec<f64>,
    c: f64,
}

impl Serialize for RadialProfile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ProfileRepr {
            n: self.n.get(),
            h: self.h_target,
            r0: self.r0,
            r1: self.r1,
            r2: self.r2,
            cap_coeffs: self.cap_coeffs.clone(),
            blend_coeffs: self.blend_coeffs.clone(),
            c: self.c,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RadialProfile {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = ProfileRepr::deserialize(d)?;
        RadialProfile::from_parts(
            repr.n,
            repr.h,
            repr.r0,
            repr.r1,
            repr.r2,
            repr.cap_coeffs,
            repr.blend_coeffs,
            repr.c,
        )
        .map_err(serde::de::Error::custom)
    }
}

impl RadialProfile {
    /// Construct the profile, fitting the axis cap and the outer blend.
    ///
    /// The cap polynomial is odd in r (phi' (0) = 1, all even derivatives
    /// vanish), matches value/first/second derivative of the closed form at
    /// r0, and reproduces its accumulated integral. If the positivity or
    /// ratio constraints fail on the audit grid the bump exponent is raised
    /// and then r0 is halved, as a fallback.
    pub fn build(n: u32, h: f64, r0: f64, r1: f64, r2: f64) -> Result<Self> {
        let n = Dimension::new(n)?;
        if !(h > 0.0) {
            return Err(Error::InvalidParameter {
                name: "H",
                reason: format!("target mean curvature must be positive, got {h}"),
            });
        }
        for (name, lo, v, hi) in [
            ("r0", 0.0, r0, r1),
            ("r1", 0.0, r1, 1.0),
            ("r2", r1, r2, 1.0),
        ] {
            if !(v > lo && v < hi) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("need {lo} < {name} < {hi}, got {v}"),
                });
            }
        }
        let expl = Explicit::new(n, h, r1);
        let mut r0_try = r0;
        for _ in 0..=MAX_R0_HALVINGS {
            for bump_exp in 1..=4usize {
                if let Ok(cap) = fit_cap(n, &expl, r0_try, bump_exp) {
                    if audit_cap(n, &expl, r0_try, r1, &cap).is_ok() {
                        let (blend, c) = fit_blend(&expl, r1, r2)?;
                        return Self::from_parts_unchecked(
                            n, h, r0_try, r1, r2, cap, blend, c, expl,
                        );
                    }
                }
            }
            r0_try *= 0.5;
        }
        Err(Error::CapConstruction { last_r0: r0_try })
    }

    /// Rebuild from serialized parts, revalidating the basic invariants.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        n: u32,
        h: f64,
        r0: f64,
        r1: f64,
        r2: f64,
        cap_coeffs: Vec<f64>,
        blend_coeffs: Vec<f64>,
        c: f64,
    ) -> Result<Self> {
        let n = Dimension::new(n)?;
        if !(h > 0.0 && r0 > 0.0 && r0 < r1 && r1 < r2 && r2 < 1.0 && c > 0.0) {
            return Err(Error::InvalidParameter {
                name: "profile",
                reason: "inconsistent serialized parameters".into(),
            });
        }
        let expl = Explicit::new(n, h, r1);
        Self::from_parts_unchecked(n, h, r0, r1, r2, cap_coeffs, blend_coeffs, c, expl)
    }

    #[allow(clippy::too_many_arguments)]
    fn from_parts_unchecked(
        n: Dimension,
        h_target: f64,
        r0: f64,
        r1: f64,
        r2: f64,
        cap_coeffs: Vec<f64>,
        blend_coeffs: Vec<f64>,
        c: f64,
        expl: Explicit,
    ) -> Result<Self> {
        let mut p = RadialProfile {
            n,
            h_target,
            r0,
            r1,
            r2,
            cap_coeffs,
            blend_coeffs,
            c,
            expl,
            h_r0: 0.0,
            h_r1: 0.0,
            h_r2: 0.0,
            h_table: Vec::new(),
        };
        let nm2 = n.sphere_exponent();
        let nh = p.expl.nh;
        let integrand = |r: f64| match p.eval(r) {
            Ok((phi, _, _)) => phi.powf(nm2) * nh,
            Err(_) => f64::NAN,
        };
        // cumulative panels per smooth piece; partial panels finish with a
        // short adaptive pass in h()
        let mut table = Vec::with_capacity(1024);
        let mut acc = 0.0;
        let mut prev = 0.0;
        for (end, panels) in [(r0, 400usize), (r1, 400), (r2, 200)] {
            for k in 1..=panels {
                let r = prev + (end - prev) * k as f64 / panels as f64;
                acc += quad::integrate(integrand, table.last().map_or(prev, |t: &(f64, f64)| t.0), r, QUAD_TOL)?;
                table.push((r, acc));
            }
            prev = end;
        }
        p.h_r0 = table[399].1;
        p.h_r1 = table[799].1;
        p.h_r2 = table[999].1;
        p.h_table = table;
        Ok(p)
    }

    pub fn n(&self) -> Dimension {
        self.n
    }

    /// The target mean curvature H of the graph leaves.
    pub fn h_target(&self) -> f64 {
        self.h_target
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn r1(&self) -> f64 {
        self.r1
    }

    pub fn r2(&self) -> f64 {
        self.r2
    }

    /// Constant value of phi on the flat band [r2, 1].
    pub fn flat_value(&self) -> f64 {
        self.c
    }

    fn eval_cap(&self, r: f64) -> (f64, f64, f64) {
        let x = r * r;
        let (p, dp, ddp) = poly_eval2(&self.cap_coeffs, x);
        (r * p, p + 2.0 * x * dp, 2.0 * r * (3.0 * dp + 2.0 * x * ddp))
    }

    fn eval_blend(&self, r: f64) -> (f64, f64, f64) {
        let d = self.r2 - self.r1;
        let t = (r - self.r1) / d;
        let (p, dp, ddp) = poly_eval2(&self.blend_coeffs, t);
        (p, dp / d, ddp / (d * d))
    }

    /// The closed-form branch and its analytic derivatives.
    ///
    /// Valid wherever 1 - (r1 - r)^2 > 0; the assembled profile uses it on
    /// [r0, r1] only.
    pub fn phi_explicit(&self, r: f64) -> Result<(f64, f64, f64)> {
        self.expl.eval(r)
    }

    /// Assembled piecewise profile (phi, phi', phi'') on [0, 1].
    pub fn eval(&self, r: f64) -> Result<(f64, f64, f64)> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::Domain {
                what: "radius r",
                value: r,
            });
        }
        if r < self.r0 {
            Ok(self.eval_cap(r))
        } else if r <= self.r1 {
            self.expl.eval(r)
        } else if r < self.r2 {
            Ok(self.eval_blend(r))
        } else {
            Ok((self.c, 0.0, 0.0))
        }
    }

    /// phi(r) alone.
    pub fn phi(&self, r: f64) -> Result<f64> {
        Ok(self.eval(r)?.0)
    }

    /// Evaluation with the flat band continued slightly past r = 1, for
    /// integrator stages that probe just outside the disk before the
    /// boundary stop is localized. The public domain stays [0, 1].
    pub(crate) fn eval_extended(&self, r: f64) -> Result<(f64, f64, f64)> {
        if r > 1.0 && r <= 1.05 {
            return Ok((self.c, 0.0, 0.0));
        }
        self.eval(r)
    }

    /// Accumulated integral h(r) = (n-1) H int_0^r phi(u)^(n-2) du by
    /// adaptive quadrature from the nearest cumulative-table entry.
    pub fn h(&self, r: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::Domain {
                what: "radius r",
                value: r,
            });
        }
        let (start, base) = match self
            .h_table
            .binary_search_by(|(end, _)| end.total_cmp(&r))
        {
            Ok(i) => return Ok(self.h_table[i].1),
            Err(0) => (0.0, 0.0),
            Err(i) => self.h_table[i - 1],
        };
        let nm2 = self.n.sphere_exponent();
        let nh = self.expl.nh;
        let f = |u: f64| match self.eval(u) {
            Ok((phi, _, _)) => phi.powf(nm2) * nh,
            Err(_) => f64::NAN,
        };
        Ok(base + quad::integrate(f, start, r, QUAD_TOL)?)
    }

    /// Closed form of h on the explicit branch (cross-check only).
    pub fn h_closed_form(&self, r: f64) -> f64 {
        self.expl.h_closed(r)
    }

    /// h(r) / phi(r)^(n-2), the sine of the graph angle on the zero-flux branch.
    pub fn ratio(&self, r: f64) -> Result<f64> {
        let (phi, _, _) = self.eval(r)?;
        if phi <= 0.0 {
            return Err(Error::Domain {
                what: "phi at ratio evaluation",
                value: phi,
            });
        }
        Ok(self.h(r)? / phi.powf(self.n.sphere_exponent()))
    }

    /// Mean curvature of the geodesic sphere S^(n-2)(r) with respect to the
    /// inward normal: kappa_r = phi'(r)/phi(r).
    pub fn kappa_r(&self, r: f64) -> Result<f64> {
        if r <= 0.0 {
            return Err(Error::Domain {
                what: "kappa_r radius",
                value: r,
            });
        }
        let (phi, dphi, _) = self.eval(r)?;
        Ok(dphi / phi)
    }

    /// Constant mean curvature of the vertical cylinder C(r) = bd D(r) x R:
    /// (n-2)/(n-1) * phi'(r)/phi(r).
    pub fn cylinder_h(&self, r: f64) -> Result<f64> {
        let nm2 = self.n.sphere_exponent();
        let nm1 = (self.n.get() - 1) as f64;
        Ok(nm2 / nm1 * self.kappa_r(r)?)
    }

    /// Ric(d_r, d_r) = -(n-2) phi''(r)/phi(r) for the product metric
    /// ds^2 + dz^2: the Ricci curvature normal to the cylinder leaves.
    pub fn ricci_normal(&self, r: f64) -> Result<f64> {
        if r <= 0.0 {
            return Err(Error::Domain {
                what: "ricci_normal radius",
                value: r,
            });
        }
        let (phi, _, ddphi) = self.eval(r)?;
        Ok(-self.n.sphere_exponent() * ddphi / phi)
    }

    /// Sampled CSV with header "r,phi,dphi,ddphi,h,kappa_r,cylinder_H".
    pub fn sample_csv(&self, samples: usize) -> Result<String> {
        let mut out = String::from("r,phi,dphi,ddphi,h,kappa_r,cylinder_H\n");
        let m = samples.max(2);
        for i in 0..m {
            let r = i as f64 / (m - 1) as f64;
            let (phi, dphi, ddphi) = self.eval(r)?;
            let h = self.h(r)?;
            let (kr, ch) = if r > 0.0 {
                (self.kappa_r(r)?, self.cylinder_h(r)?)
            } else {
                (f64::NAN, f64::NAN)
            };
            out.push_str(&format!("{r},{phi},{dphi},{ddphi},{h},{kr},{ch}\n"));
        }
        Ok(out)
    }

    /// Run the profile invariant suite.
    pub fn verify(&self) -> VerificationReport {
        let mut rep = VerificationReport::new();
        let nm2 = self.n.sphere_exponent();
        let nm1 = (self.n.get() - 1) as f64;

        // axis conditions
        let (p0, dp0, ddp0) = self.eval(0.0).unwrap();
        rep.push(Check::new("phi_at_axis", p0, 0.0, 0.0, false, Provenance::Exact));
        rep.push(Check::new("dphi_at_axis", dp0, 1.0, 0.0, false, Provenance::Exact));
        rep.push(Check::new("ddphi_at_axis", ddp0, 0.0, 0.0, false, Provenance::Exact));
        // finite-difference audit of even derivatives at the axis
        let fd = |r: f64| self.eval(r).map(|v| v.0).unwrap_or(f64::NAN);
        let h_fd = self.r0 / 64.0;
        let d2 = (2.0 * fd(0.0) - 5.0 * fd(h_fd) + 4.0 * fd(2.0 * h_fd) - fd(3.0 * h_fd))
            / (h_fd * h_fd);
        let f5 = 120.0 * self.cap_coeffs.get(2).copied().unwrap_or(0.0);
        let tol2 = 4.0 * f5.abs() * h_fd.powi(3) + 1e-9;
        rep.push(Check::new("even_derivative_2_fd", d2, 0.0, tol2, false, Provenance::Exact));
        let d4 = (3.0 * fd(0.0) - 14.0 * fd(h_fd) + 26.0 * fd(2.0 * h_fd)
            - 24.0 * fd(3.0 * h_fd)
            + 11.0 * fd(4.0 * h_fd)
            - 2.0 * fd(5.0 * h_fd))
            / h_fd.powi(4);
        let tol4 = 8.0 * f5.abs() * h_fd + 1e-6;
        rep.push(Check::new("even_derivative_4_fd", d4, 0.0, tol4, false, Provenance::Exact));

        // junction C^2 continuity
        for (name, r, left, right) in [
            ("junction_r0", self.r0, self.eval_cap(self.r0), self.expl.eval(self.r0).unwrap()),
            ("junction_r1", self.r1, self.expl.eval(self.r1).unwrap(), self.eval_blend(self.r1)),
            ("junction_r2", self.r2, self.eval_blend(self.r2), (self.c, 0.0, 0.0)),
        ] {
            let _ = r;
            let jump = [
                (left.0 - right.0).abs() / left.0.abs().max(1.0),
                (left.1 - right.1).abs() / left.1.abs().max(1.0),
                (left.2 - right.2).abs() / left.2.abs().max(1.0),
            ]
            .into_iter()
            .fold(0.0f64, f64::max);
            rep.push(Check::upper_bound(
                format!("{name}_c2_jump"),
                jump,
                JUNCTION_TOL,
                Provenance::Exact,
            ));
        }

        // positivity and flatness
        let mut min_phi = f64::INFINITY;
        for i in 1..=1000 {
            let r = i as f64 / 1000.0;
            min_phi = min_phi.min(self.phi(r).unwrap());
        }
        rep.push(Check::upper_bound("phi_positive", -min_phi, 0.0, Provenance::Exact));
        let flat_dev = [self.r2, 0.5 * (self.r2 + 1.0), 1.0]
            .into_iter()
            .map(|r| {
                let (phi, dphi, _) = self.eval(r).unwrap();
                (phi - self.c).abs().max(dphi.abs())
            })
            .fold(0.0f64, f64::max);
        rep.push(Check::new("flat_band_constant", flat_dev, 0.0, 0.0, false, Provenance::Theory));

        // imposed relation h/phi^(n-2) = sqrt(1 - (r1 - r)^2) on [r0, r1)
        let mut rel_err = 0.0f64;
        for i in 0..400 {
            let r = self.r0 + (self.r1 - 1e-6 - self.r0) * i as f64 / 399.0;
            let want = (1.0 - (self.r1 - r) * (self.r1 - r)).sqrt();
            rel_err = rel_err.max((self.ratio(r).unwrap() - want).abs());
        }
        rep.push(Check::upper_bound("imposed_ratio_relation", rel_err, 1e-9, Provenance::Theory));

        // additive constant between quadrature h and the closed form
        let delta0 = self.h(self.r0).unwrap() - self.expl.h_closed(self.r0);
        rep.push(Check::new("h_cap_additive_constant", delta0, 0.0, 1e-9, false, Provenance::Oracle));

        // axis limits of the ratio
        rep.push(Check::upper_bound(
            "ratio_axis_limit",
            self.ratio(1e-5).unwrap().abs(),
            1e-3,
            Provenance::Theory,
        ));
        let slope = (self.ratio(1e-4 + 1e-5).unwrap() - self.ratio(1e-4 - 1e-5).unwrap()) / 2e-5;
        rep.push(Check::new(
            "ratio_axis_slope",
            slope,
            self.h_target,
            1e-3,
            false,
            Provenance::Theory,
        ));

        // ratio stays in [0, 1)
        let mut max_ratio = f64::NEG_INFINITY;
        let mut min_ratio = f64::INFINITY;
        for i in 0..=2000 {
            let r = 1e-6 + (self.r1 - 1e-4 - 1e-6) * i as f64 / 2000.0;
            let q = self.ratio(r).unwrap();
            max_ratio = max_ratio.max(q);
            min_ratio = min_ratio.min(q);
        }
        rep.push(Check::upper_bound("ratio_below_one", max_ratio, 1.0 - 1e-9, Provenance::Theory));
        rep.push(Check::upper_bound("ratio_nonnegative", -min_ratio, 1e-12, Provenance::Theory));

        // cylinder curvature facts
        let ch_r1 = self.cylinder_h(self.r1).unwrap();
        rep.push(Check::new("cylinder_h_at_r1", ch_r1, self.h_target, 1e-9, false, Provenance::Theory));
        let mut ch_flat = 0.0f64;
        for r in [self.r2, 0.9, 1.0] {
            ch_flat = ch_flat.max(self.cylinder_h(r).unwrap().abs());
        }
        rep.push(Check::new("cylinder_h_flat_band", ch_flat, 0.0, 0.0, false, Provenance::Theory));
        let mut alg = 0.0f64;
        for i in 1..=100 {
            let r = i as f64 / 100.0;
            let lhs = self.cylinder_h(r).unwrap() * nm1 / nm2;
            let rhs = self.kappa_r(r).unwrap();
            alg = alg.max((lhs - rhs).abs() / rhs.abs().max(1.0));
        }
        rep.push(Check::upper_bound("cylinder_vs_sphere_curvature", alg, 1e-14, Provenance::Exact));

        // Ricci scan: some point with Ric(d_r) <= -(n-1) H^2
        let mut ric_min = f64::INFINITY;
        for i in 1..=2048 {
            let r = i as f64 / 2048.0;
            ric_min = ric_min.min(self.ricci_normal(r).unwrap());
        }
        rep.push(Check::upper_bound(
            "ricci_normal_attains_bound",
            ric_min,
            -nm1 * self.h_target * self.h_target,
            Provenance::Theory,
        ));

        rep
    }
}

/// Fit the cap polynomial on [0, r0]:
/// base r (1 + c1 x + c2 x^2 + c3 x^3) matching phi, phi', phi'' at r0, plus
/// a bump mu * r * (x/x0)^k (1 - x/x0)^3 (x = r^2) tuned so the accumulated
/// integral of phi^(n-2) matches the closed form at r0.
fn fit_cap(n: Dimension, expl: &Explicit, r0: f64, bump_exp: usize) -> Result<Vec<f64>> {
    let (p0, p1, p2) = expl.eval(r0)?;
    let a = [
        [r0.powi(3), r0.powi(5), r0.powi(7)],
        [3.0 * r0.powi(2), 5.0 * r0.powi(4), 7.0 * r0.powi(6)],
        [6.0 * r0, 20.0 * r0.powi(3), 42.0 * r0.powi(5)],
    ];
    let rhs = [p0 - r0, p1 - 1.0, p2];
    let c = solve3(a, rhs);

    // assemble base coefficients and the bump in powers of x = r^2
    let x0 = r0 * r0;
    let mut base = vec![1.0, c[0], c[1], c[2]];
    // (x/x0)^k (1 - x/x0)^3 = sum_{j=0..3} binom(3,j) (-1)^j x^(k+j) / x0^(k+j)
    let binom = [1.0, -3.0, 3.0, -1.0];
    let mut bump = vec![0.0; bump_exp + 4];
    for (j, &bc) in binom.iter().enumerate() {
        bump[bump_exp + j] = bc / x0.powi((bump_exp + j) as i32);
    }

    let nm2 = n.sphere_exponent();
    let target = expl.h_closed(r0) / expl.nh;
    let mismatch = |mu: f64| {
        let coeffs: Vec<f64> = (0..base.len().max(bump.len()))
            .map(|i| base.get(i).copied().unwrap_or(0.0) + mu * bump.get(i).copied().unwrap_or(0.0))
            .collect();
        let f = |r: f64| {
            let (p, _, _) = poly_eval2(&coeffs, r * r);
            (r * p).powf(nm2)
        };
        quad::integrate(f, 0.0, r0, CAP_FIT_TOL).unwrap_or(f64::NAN) - target
    };

    let m0 = mismatch(0.0);
    let mut hi = 1.0;
    let mut found = false;
    for _ in 0..60 {
        if m0 * mismatch(hi) <= 0.0 {
            found = true;
            break;
        }
        if m0 * mismatch(-hi) <= 0.0 {
            hi = -hi;
            found = true;
            break;
        }
        hi *= 2.0;
    }
    if !found {
        return Err(Error::NoBracket { what: "cap integral bump scale" });
    }
    let mu = quad::brent(mismatch, 0.0, hi, 1e-14, "cap integral bump scale")?;

    if base.len() < bump.len() {
        base.resize(bump.len(), 0.0);
    }
    for (i, &bv) in bump.iter().enumerate() {
        base[i] += mu * bv;
    }
    Ok(base)
}

/// Grid audit of the fitted cap: positivity of phi on (0, r0] and the
/// accumulated-ratio constraint h/phi^(n-2) in [0, 1) up to r1.
fn audit_cap(n: Dimension, expl: &Explicit, r0: f64, r1: f64, cap: &[f64]) -> Result<()> {
    let nm2 = n.sphere_exponent();
    let phi_cap = |r: f64| {
        let (p, _, _) = poly_eval2(cap, r * r);
        r * p
    };
    for i in 1..=CAP_GRID {
        let r = r0 * i as f64 / CAP_GRID as f64;
        if phi_cap(r) <= 0.0 {
            return Err(Error::Domain { what: "cap positivity", value: r });
        }
    }
    // cumulative ratio audit over [0, r1 - 1e-4]
    let hi_end = r1 - 1e-4;
    let mut acc = 0.0;
    let mut prev = 0.0;
    for i in 1..=CAP_GRID {
        let r = hi_end * i as f64 / CAP_GRID as f64;
        let f = |u: f64| {
            if u < r0 {
                phi_cap(u).powf(nm2)
            } else {
                expl.eval(u).map(|v| v.0).unwrap_or(f64::NAN).powf(nm2)
            }
        };
        acc += quad::integrate(f, prev, r, 1e-11)?;
        prev = r;
        let phi = if r < r0 {
            phi_cap(r)
        } else {
            expl.eval(r)?.0
        };
        let ratio = expl.nh * acc / phi.powf(nm2);
        if !(-1e-12..1.0 - 1e-9).contains(&ratio) {
            return Err(Error::Domain { what: "cap ratio constraint", value: ratio });
        }
    }
    Ok(())
}

/// Quintic Hermite blend on [r1, r2] from the explicit branch data at r1 to
/// (c, 0, 0) at r2, escalating c until phi' >= 0 across the blend.
fn fit_blend(expl: &Explicit, r1: f64, r2: f64) -> Result<(Vec<f64>, f64)> {
    let d = r2 - r1;
    let (p0, v0r, a0r) = expl.eval(r1)?;
    let v0 = v0r * d;
    let a0 = a0r * d * d;
    let mut c_target = 1.05 * p0;
    for _ in 0..MAX_BLEND_BUMPS {
        let coeffs = hermite5(p0, v0, a0, c_target, 0.0, 0.0);
        let mut ok = true;
        for i in 0..BLEND_GRID {
            let t = i as f64 / (BLEND_GRID - 1) as f64;
            let (_, dp, _) = poly_eval2(&coeffs, t);
            if dp < -1e-12 {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok((coeffs, c_target));
        }
        c_target *= 1.05;
    }
    Err(Error::BlendConstruction { last_c: c_target })
}

/// Coefficients (in t) of the quintic with given endpoint values and
/// t-scaled first/second derivatives at t = 0 and t = 1.
fn hermite5(p0: f64, v0: f64, a0: f64, p1: f64, v1: f64, a1: f64) -> Vec<f64> {
    let c0 = p0;
    let c1 = v0;
    let c2 = 0.5 * a0;
    let r = [
        p1 - (c0 + c1 + c2),
        v1 - (c1 + 2.0 * c2),
        a1 - 2.0 * c2,
    ];
    let x = solve3([[1.0, 1.0, 1.0], [3.0, 4.0, 5.0], [6.0, 12.0, 20.0]], r);
    vec![c0, c1, c2, x[0], x[1], x[2]]
}
