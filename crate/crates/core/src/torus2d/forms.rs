//! The admissible curvature function f, the primitive one-form with
//! d omega = f dV, and the symmetry-averaging steps that pin its grid
//! symmetries exactly.

use super::foliation::{Foliation2D, Region};
use super::FlatTorus;
use crate::error::{Error, Result};

/// Odd quintic sigmoid on [-1, 1]: sig(+-1) = +-1, flat ends (C^2 junctions).
pub(crate) fn odd_sigmoid(t: f64) -> f64 {
    (15.0 * t - 10.0 * t * t * t + 3.0 * t * t * t * t * t) / 8.0
}

/// Antiderivative of `odd_sigmoid` vanishing at 0.
fn odd_sigmoid_int(t: f64) -> f64 {
    let v = t * t;
    (7.5 * v - 2.5 * v * v + 0.5 * v * v * v) / 8.0
}

/// The prescribed leaf-curvature function with the required symmetries:
/// -1 on the component of l1, +1 on the component of l3, invariant under
/// vertical translations and the reflections in l1, l3, odd under the
/// reflections in l0, l2.
#[derive(Debug, Clone)]
pub struct AdmissibleF {
    torus: FlatTorus,
    eps: f64,
    pub(crate) values: Vec<f64>,
}

impl AdmissibleF {
    /// Build on the grid by odd/even extension of the transition branch, so
    /// the symmetry conditions hold exactly on grid columns.
    pub fn build(torus: FlatTorus, eps_strip: f64) -> Result<Self> {
        if !(eps_strip > 0.0 && eps_strip < torus.lx() / 4.0) {
            return Err(Error::StripOverlap {
                eps: eps_strip,
                limit: torus.lx() / 4.0,
            });
        }
        let nx = torus.nx();
        let quarter = nx / 4;
        let mut values = vec![0.0; nx];
        for (j, value) in values.iter_mut().enumerate().take(quarter + 1) {
            let x = torus.x(j);
            *value = if x <= eps_strip {
                -odd_sigmoid(x / eps_strip)
            } else {
                -1.0
            };
        }
        for j in 1..=quarter {
            values[quarter + j] = values[quarter - j]; // reflection in l1
        }
        for j in 1..2 * quarter {
            values[nx - j] = -values[j]; // reflection in l0
        }
        Ok(AdmissibleF {
            torus,
            eps: eps_strip,
            values,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.values
    }

    /// Continuous evaluation (same piecewise formula the grid came from).
    pub fn value(&self, x: f64) -> f64 {
        let lx = self.torus.lx();
        let xm = x.rem_euclid(lx);
        if xm > lx / 2.0 {
            return -self.value(lx - xm);
        }
        if xm <= self.eps {
            -odd_sigmoid(xm / self.eps)
        } else if xm <= lx / 2.0 - self.eps {
            -1.0
        } else {
            -odd_sigmoid((lx / 2.0 - xm) / self.eps)
        }
    }

    /// Exact closed-form primitive b(x) = int_0^x f, even about l0 and l2.
    pub(crate) fn primitive(&self, x: f64) -> f64 {
        let lx = self.torus.lx();
        let e = self.eps;
        let i1 = odd_sigmoid_int(1.0);
        let xm = x.rem_euclid(lx);
        if xm > lx / 2.0 {
            return self.primitive(lx - xm);
        }
        if xm <= e {
            -e * odd_sigmoid_int(xm / e)
        } else if xm <= lx / 2.0 - e {
            -e * i1 - (xm - e)
        } else {
            -e * i1 - (lx / 2.0 - 2.0 * e) - e * (i1 - odd_sigmoid_int((lx / 2.0 - xm) / e))
        }
    }

    /// Grid integral of f over the torus with exact antisymmetric pairing:
    /// the mirror columns cancel termwise, so the sum is exactly zero.
    pub fn integral(&self) -> f64 {
        let nx = self.torus.nx();
        let cell = self.torus.dx() * 1.0; // Ly = 1, all rows identical
        let mut acc = 0.0;
        acc += self.values[0] + self.values[nx / 2];
        for j in 1..nx / 2 {
            acc += self.values[j] + self.values[nx - j];
        }
        acc * cell
    }
}

/// The solved one-form omega = a dx + b dy (grid columns) with
/// d omega = f dV, the exact reflection parities R_i* omega = (-1)^i omega,
/// vertical-translation invariance, and omega nowhere zero on leaf tangents.
#[derive(Debug, Clone)]
pub struct SolvedForm {
    pub(crate) a: Vec<f64>,
    pub(crate) b: Vec<f64>,
    torus: FlatTorus,
    /// recorded min |omega(T)| over grid columns
    pub leaf_margin: f64,
}

impl SolvedForm {
    /// Solve d omega = f dV with the symmetry-averaging steps applied as
    /// grid operators: vertical-translation average, then the two
    /// reflection symmetrizations. The dx-component is chosen so that
    /// omega annihilates the flat leaf normal; this aligns the kernel of
    /// omega with the normal bundle and is what makes the constructed
    /// metric realize -f as the leaf curvature.
    pub fn solve(f: &AdmissibleF, fol: &Foliation2D, margin: f64) -> Result<SolvedForm> {
        let torus = *fol.torus();
        let nx = torus.nx();
        let quarter = nx / 4;
        let hw = fol.comp_half_width();
        let steep = fol.shape().steepness;

        // primitive of f (dy-component) and the normal-annihilating
        // dx-component, built on the fundamental domain + exact extension
        let bl1 = f.primitive(torus.lx() / 4.0);
        let mut a_raw = vec![0.0; nx];
        let mut b_raw = vec![0.0; nx];
        for j in 0..nx {
            b_raw[j] = f.primitive(torus.x(j)) - bl1;
        }
        for (j, a) in a_raw.iter_mut().enumerate().take(quarter + 1) {
            let x = torus.x(j);
            *a = match fol.region(x) {
                Region::Comp1 | Region::Comp2 => {
                    let xi = fol.xi(x);
                    hw * (1.0 - xi * xi) / steep
                }
                _ => 0.0,
            };
        }
        for j in 1..=quarter {
            a_raw[quarter + j] = a_raw[quarter - j]; // even about l1
        }
        for j in 1..2 * quarter {
            a_raw[nx - j] = -a_raw[j]; // odd about l0
        }

        let (a, b) = Self::average(&a_raw, &b_raw, &torus);

        let mut form = SolvedForm {
            a,
            b,
            torus,
            leaf_margin: f64::INFINITY,
        };

        // sign alignment: omega(T) must be positive; flip globally if needed
        let w0 = form.omega_t(fol, 0);
        if w0 < 0.0 {
            for v in form.a.iter_mut().chain(form.b.iter_mut()) {
                *v = -*v;
            }
        }
        let mut min_abs = f64::INFINITY;
        for j in 0..nx {
            let w = form.omega_t(fol, j);
            if w.abs() < min_abs {
                min_abs = w.abs();
            }
            if w.abs() < margin {
                return Err(Error::LeafwiseVanishing {
                    i: j,
                    j: 0,
                    value: w.abs(),
                    margin,
                });
            }
            if w <= 0.0 {
                return Err(Error::NonpositiveW { i: j, value: w });
            }
        }
        form.leaf_margin = min_abs;
        Ok(form)
    }

    /// The three averaging steps as grid operators: vertical-translation
    /// mean, omega_3 = (omega_2 - R1* omega_2)/2, omega = (omega_3 + R2*
    /// omega_3)/2. Under pullback by a reflection the dx-component flips
    /// sign in addition to composing with the reflection.
    pub(crate) fn average(a_in: &[f64], b_in: &[f64], torus: &FlatTorus) -> (Vec<f64>, Vec<f64>) {
        let nx = torus.nx();
        let ny = torus.ny();
        // vertical-translation average over all grid shifts; the fields are
        // stored per column, so this is the mean of ny identical copies
        let s1 = |cols: &[f64]| -> Vec<f64> {
            cols.iter()
                .map(|&v| {
                    let mut acc = 0.0;
                    for _ in 0..ny {
                        acc += v;
                    }
                    acc / ny as f64
                })
                .collect()
        };
        let a2 = s1(a_in);
        let b2 = s1(b_in);
        let r1 = |j: usize| (nx / 2 + nx - j) % nx;
        let r2 = |j: usize| (nx - j) % nx; // reflection across l2 on indices is 2*(nx/2) - j
        let mut a3 = vec![0.0; nx];
        let mut b3 = vec![0.0; nx];
        for j in 0..nx {
            // R1*(a dx + b dy) = -a(R1 x) dx + b(R1 x) dy
            a3[j] = 0.5 * (a2[j] + a2[r1(j)]);
            b3[j] = 0.5 * (b2[j] - b2[r1(j)]);
        }
        let mut a_out = vec![0.0; nx];
        let mut b_out = vec![0.0; nx];
        for j in 0..nx {
            a_out[j] = 0.5 * (a3[j] - a3[r2(j)]);
            b_out[j] = 0.5 * (b3[j] + b3[r2(j)]);
        }
        (a_out, b_out)
    }

    pub fn torus(&self) -> &FlatTorus {
        &self.torus
    }

    /// omega applied to the leaf tangent at grid column j.
    pub fn omega_t(&self, fol: &Foliation2D, j: usize) -> f64 {
        let t = fol.tangent(j);
        self.a[j] * t[0] + self.b[j] * t[1]
    }

    /// omega applied to the transverse orientation at grid column j.
    pub fn omega_n(&self, fol: &Foliation2D, j: usize) -> f64 {
        let n = fol.normal(j);
        self.a[j] * n[0] + self.b[j] * n[1]
    }

    /// Max abs error of the centered discrete derivative of b against f.
    pub fn exactness_centered(&self, f: &AdmissibleF) -> f64 {
        let nx = self.torus.nx();
        let dx = self.torus.dx();
        let mut worst = 0.0f64;
        for j in 0..nx {
            let db = (self.b[(j + 1) % nx] - self.b[(j + nx - 1) % nx]) / (2.0 * dx);
            worst = worst.max((db - f.values[j]).abs());
        }
        worst
    }

    /// Max abs error of the 6th-order discrete derivative of b against f,
    /// skipping stencils that straddle the C^2 transition junctions.
    pub fn exactness_high_order(&self, f: &AdmissibleF, eps_strip: f64) -> f64 {
        let nx = self.torus.nx();
        let dx = self.torus.dx();
        let lx = self.torus.lx();
        let junctions = [
            eps_strip,
            lx / 2.0 - eps_strip,
            lx / 2.0 + eps_strip,
            lx - eps_strip,
        ];
        let mut worst = 0.0f64;
        for j in 0..nx {
            let x = self.torus.x(j);
            let near = junctions.iter().any(|&u| {
                let d = (x - u).abs();
                d.min(lx - d) <= 3.5 * dx
            });
            if near {
                continue;
            }
            let g = |k: i64| self.b[((j as i64 + k).rem_euclid(nx as i64)) as usize];
            let db = (-g(-3) + 9.0 * g(-2) - 45.0 * g(-1) + 45.0 * g(1) - 9.0 * g(2) + g(3))
                / (60.0 * dx);
            worst = worst.max((db - f.values[j]).abs());
        }
        worst
    }

    /// Max deviation from the reflection pullback identities
    /// R_i* omega = (-1)^i omega (0 when the averaging has been applied).
    pub fn reflection_residual(&self) -> f64 {
        let nx = self.torus.nx();
        let mut worst = 0.0f64;
        for i in 0..4usize {
            let centre = i * nx / 4;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            for j in 0..nx {
                let rj = (2 * centre + nx - j) % nx;
                // R_i* omega = -a(R_i x) dx + b(R_i x) dy
                worst = worst.max((-self.a[rj] - sign * self.a[j]).abs());
                worst = worst.max((self.b[rj] - sign * self.b[j]).abs());
            }
        }
        worst
    }

    /// Distance of a second averaging pass from the identity (bit-exact 0).
    pub fn idempotence_residual(&self) -> f64 {
        let (a2, b2) = Self::average(&self.a, &self.b, &self.torus);
        let mut worst = 0.0f64;
        for j in 0..self.torus.nx() {
            worst = worst.max((a2[j] - self.a[j]).abs());
            worst = worst.max((b2[j] - self.b[j]).abs());
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus2d::foliation::ReebShape;
    use crate::torus2d::FlatTorus;

    fn setup(nx: usize) -> (AdmissibleF, Foliation2D) {
        let torus = FlatTorus::new(4.0, nx, 16).unwrap();
        let f = AdmissibleF::build(torus, 0.55).unwrap();
        let fol = Foliation2D::build(torus, 0.55, ReebShape::default()).unwrap();
        (f, fol)
    }

    #[test]
    fn f_prescribed_values() {
        let (f, _) = setup(128);
        assert_eq!(f.values[32], -1.0); // l1
        assert_eq!(f.values[96], 1.0); // l3
        assert_eq!(f.values[0], 0.0); // l0, forced by oddness
        assert_eq!(f.values[64], 0.0); // l2
    }

    #[test]
    fn f_symmetries_bit_exact() {
        let (f, _) = setup(128);
        let nx = 128;
        for j in 0..nx {
            // R1-even, R3-even
            assert_eq!(f.values[(64 + nx - j) % nx].to_bits(), f.values[j].to_bits());
            assert_eq!(
                f.values[(192 + nx - j) % nx].to_bits(),
                f.values[j].to_bits()
            );
            // R0-odd, R2-odd
            assert_eq!(f.values[(nx - j) % nx].to_bits(), (-f.values[j]).to_bits());
        }
    }

    #[test]
    fn f_integral_is_exactly_zero() {
        let (f, _) = setup(256);
        assert_eq!(f.integral(), 0.0);
    }

    #[test]
    fn primitive_differentiates_to_f() {
        let (f, _) = setup(512);
        let h = 1e-6;
        for x in [0.2, 0.5, 1.3, 2.2, 3.1, 3.8] {
            let d = (f.primitive(x + h) - f.primitive(x - h)) / (2.0 * h);
            assert!((d - f.value(x)).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn primitive_is_periodic_and_even() {
        let (f, _) = setup(128);
        assert_eq!(f.primitive(0.0), 0.0);
        assert!((f.primitive(4.0) - 0.0).abs() < 1e-15);
        for x in [0.3, 1.1, 1.9] {
            assert!((f.primitive(4.0 - x) - f.primitive(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn solve_produces_positive_leafwise_form() {
        let (f, fol) = setup(512);
        let form = SolvedForm::solve(&f, &fol, 0.05).unwrap();
        assert!(form.leaf_margin > 0.3, "margin {}", form.leaf_margin);
        for j in 0..512 {
            assert!(form.omega_t(&fol, j) > 0.0);
        }
    }

    #[test]
    fn solved_form_annihilates_normals() {
        let (f, fol) = setup(512);
        let form = SolvedForm::solve(&f, &fol, 0.05).unwrap();
        for j in 0..512 {
            assert!(
                form.omega_n(&fol, j).abs() < 1e-13,
                "omega(N) = {} at {j}",
                form.omega_n(&fol, j)
            );
        }
    }

    #[test]
    fn b_affine_with_slope_minus_one_on_l1_component() {
        let (f, fol) = setup(512);
        let form = SolvedForm::solve(&f, &fol, 0.05).unwrap();
        // quadrature oracle: b(x) - b(l1) = -(x - l1) where f = -1
        let torus = fol.torus();
        for j in 0..512 {
            let x = torus.x(j);
            if matches!(fol.region(x), Region::Comp1) {
                let want = -(x - 1.0);
                assert!((form.b[j] - want).abs() < 1e-12, "x={x}");
            }
        }
    }

    #[test]
    fn averaging_is_idempotent_and_symmetries_exact() {
        let (f, fol) = setup(256);
        let form = SolvedForm::solve(&f, &fol, 0.05).unwrap();
        assert_eq!(form.idempotence_residual(), 0.0);
        assert_eq!(form.reflection_residual(), 0.0);
    }

    #[test]
    fn exactness_orders() {
        let (f, fol) = setup(512);
        let form = SolvedForm::solve(&f, &fol, 0.05).unwrap();
        let c = form.exactness_centered(&f);
        assert!(c < 1e-4, "centered exactness {c}");
        let h = form.exactness_high_order(&f, 0.55);
        assert!(h < 1e-8, "6th-order exactness {h}");
    }

    #[test]
    fn margin_violation_is_reported() {
        let (f, fol) = setup(128);
        let err = SolvedForm::solve(&f, &fol, 10.0);
        assert!(matches!(err, Err(Error::LeafwiseVanishing { .. })));
    }
}
