//! The two-dimensional construction: a flat torus carrying a foliation with
//! two Reeb components, a sign-changing curvature function f with the
//! required symmetries, a primitive one-form with d omega = f dV solved by
//! symmetry-reduced quadrature, and the split metric for which -f is the
//! signed geodesic curvature of every leaf.

pub mod foliation;
pub mod forms;
pub mod metric;

pub use foliation::{CurveSample, Foliation2D, ReebShape, Region, SampledCurve};
pub use forms::{AdmissibleF, SolvedForm};
pub use metric::Metric2D;

use crate::error::{Error, Result};
use crate::report::{Check, Provenance, VerificationReport};
use serde::Serialize;

/// The flat torus [0, Lx) x [0, 1) with a uniform Nx x Ny grid and the four
/// marked vertical lines l_i = i Lx / 4.
#[derive(Debug, Clone, Copy)]
pub struct FlatTorus {
    lx: f64,
    nx: usize,
    ny: usize,
}

impl FlatTorus {
    /// Grid sizes must be positive multiples of 4 so the reflections across
    /// the marked lines act exactly on grid columns.
    pub fn new(lx: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(lx > 0.0) {
            return Err(Error::InvalidParameter {
                name: "Lx",
                reason: format!("horizontal period must be positive, got {lx}"),
            });
        }
        if nx == 0 || nx % 4 != 0 {
            return Err(Error::GridDivisibility {
                name: "Nx",
                value: nx,
            });
        }
        if ny == 0 || ny % 4 != 0 {
            return Err(Error::GridDivisibility {
                name: "Ny",
                value: ny,
            });
        }
        Ok(FlatTorus { lx, nx, ny })
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    /// The vertical period is normalized to 1.
    pub fn ly(&self) -> f64 {
        1.0
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        1.0 / self.ny as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx()
    }

    /// x-coordinate of the marked line l_i, i in 0..4.
    pub fn line(&self, i: usize) -> f64 {
        i as f64 * self.lx / 4.0
    }

    /// Grid column of the reflection across l_i.
    pub fn reflect_index(&self, i: usize, j: usize) -> usize {
        (2 * (i * self.nx / 4) + self.nx - j) % self.nx
    }
}

/// Pipeline parameters.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TorusConfig {
    pub lx: f64,
    pub nx: usize,
    pub ny: usize,
    pub eps_strip: f64,
    pub steepness: f64,
    /// required lower bound for |omega(T)| over the grid
    pub margin: f64,
    /// leaf samples with |dy/dx| above this are excluded from the
    /// curvature comparison (asymptotic Reeb tails)
    pub slope_cutoff: f64,
}

impl Default for TorusConfig {
    fn default() -> Self {
        TorusConfig {
            lx: 4.0,
            nx: 512,
            ny: 64,
            eps_strip: 0.55,
            steepness: 1.0,
            margin: 0.05,
            slope_cutoff: 10.0,
        }
    }
}

/// One row of the leaf-curvature report.
#[derive(Debug, Clone)]
pub struct KappaRow {
    pub leaf_id: String,
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub kappa: f64,
    pub f: f64,
    pub abs_err: f64,
}

/// The assembled pipeline: foliation -> f -> omega -> g.
#[derive(Debug, Clone)]
pub struct TorusPipeline {
    pub config: TorusConfig,
    pub torus: FlatTorus,
    pub foliation: Foliation2D,
    pub f: AdmissibleF,
    pub omega: SolvedForm,
    pub metric: Metric2D,
}

impl TorusPipeline {
    pub fn run(config: TorusConfig) -> Result<Self> {
        let torus = FlatTorus::new(config.lx, config.nx, config.ny)?;
        let foliation = Foliation2D::build(
            torus,
            config.eps_strip,
            ReebShape {
                steepness: config.steepness,
            },
        )?;
        let f = AdmissibleF::build(torus, config.eps_strip)?;
        let omega = SolvedForm::solve(&f, &foliation, config.margin)?;
        let metric = Metric2D::build(&omega, &foliation)?;
        Ok(TorusPipeline {
            config,
            torus,
            foliation,
            f,
            omega,
            metric,
        })
    }

    /// The sampled leaves used by the curvature comparison: the marked
    /// strip lines, generic strip lines, and Reeb leaves in both components.
    fn report_leaves(&self) -> Vec<SampledCurve> {
        let e = self.config.eps_strip;
        let lx = self.config.lx;
        let mut leaves = Vec::new();
        for (tag, x0) in [
            ("strip_l0", 0.0),
            ("strip_l0_off", 0.5 * e),
            ("strip_l2", 0.5 * lx),
            ("strip_l2_off", 0.5 * lx - 0.5 * e),
        ] {
            leaves.push(self.foliation.strip_leaf(tag, x0, 64));
        }
        let xi_max = 0.999;
        for (tag, comp, c) in [
            ("reeb_a1_c0", Region::Comp1, 0.0),
            ("reeb_a1_c1", Region::Comp1, 0.37),
            ("reeb_a2_c0", Region::Comp2, 0.0),
            ("reeb_a2_c1", Region::Comp2, 0.61),
        ] {
            leaves.push(
                self.foliation
                    .reeb_leaf(tag, comp, c, xi_max, 801)
                    .expect("component leaves exist by construction"),
            );
        }
        leaves
    }

    /// Leafwise curvature comparison: rows for every sample within the
    /// slope cutoff and the maximum |kappa + f| over them.
    pub fn curvature_report(&self) -> Result<(Vec<KappaRow>, f64)> {
        let mut rows = Vec::new();
        let mut worst = 0.0f64;
        for leaf in self.report_leaves() {
            let kappas = self.metric.geodesic_curvature(&leaf)?;
            for (smp, kappa) in leaf.samples.iter().zip(kappas) {
                let slope = if smp.d1[0].abs() < 1e-300 {
                    0.0 // vertical strip leaves compare everywhere
                } else {
                    (smp.d1[1] / smp.d1[0]).abs()
                };
                if slope > self.config.slope_cutoff {
                    continue;
                }
                let fv = self.f.value(smp.x);
                let err = (kappa + fv).abs();
                worst = worst.max(err);
                rows.push(KappaRow {
                    leaf_id: leaf.id.clone(),
                    s: smp.s,
                    x: smp.x,
                    y: smp.y,
                    kappa,
                    f: fv,
                    abs_err: err,
                });
            }
        }
        Ok((rows, worst))
    }

    /// CSV of the curvature report: "leaf_id,s,x,y,kappa,f,abs_err".
    pub fn curvature_csv(&self) -> Result<String> {
        let (rows, _) = self.curvature_report()?;
        let mut out = String::from("leaf_id,s,x,y,kappa,f,abs_err\n");
        for r in rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.leaf_id, r.s, r.x, r.y, r.kappa, r.f, r.abs_err
            ));
        }
        Ok(out)
    }

    /// Grid field CSV matrices (rows = y index, columns = x index). All
    /// pipeline fields are vertical-translation invariant, so rows repeat.
    pub fn field_csv(&self, name: &str) -> Result<String> {
        let cols: Vec<f64> = match name {
            "f" => self.f.grid().to_vec(),
            "omega_a" => self.omega.a.clone(),
            "omega_b" => self.omega.b.clone(),
            "w" => self.metric.w.clone(),
            "gxx" => self.metric.g.iter().map(|s| s[0]).collect(),
            "gxy" => self.metric.g.iter().map(|s| s[1]).collect(),
            "gyy" => self.metric.g.iter().map(|s| s[2]).collect(),
            _ => {
                return Err(Error::InvalidParameter {
                    name: "field",
                    reason: format!("unknown grid field '{name}'"),
                })
            }
        };
        let mut out = String::new();
        let row = cols
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        for _ in 0..self.torus.ny() {
            out.push_str(&row);
            out.push('\n');
        }
        Ok(out)
    }

    /// The pipeline invariant suite (everything except the cross-grid
    /// curvature convergence, which needs several resolutions).
    pub fn verify(&self) -> Result<VerificationReport> {
        let mut rep = VerificationReport::new();
        let nx = self.config.nx;

        rep.push(Check::new(
            "f_integral_zero",
            self.f.integral(),
            0.0,
            0.0,
            false,
            Provenance::Exact,
        ));
        let l1 = self.torus.line(1);
        let l3 = self.torus.line(3);
        rep.push(Check::new("f_at_l1", self.f.value(l1), -1.0, 0.0, false, Provenance::Theory));
        rep.push(Check::new("f_at_l3", self.f.value(l3), 1.0, 0.0, false, Provenance::Theory));
        rep.push(Check::new("f_at_l0", self.f.value(0.0), 0.0, 0.0, false, Provenance::Exact));

        // d omega = f dV at second order, and at sixth order off-junction
        let bound2 = 1e-4 * (512.0 / nx as f64).powi(2);
        rep.push(Check::upper_bound(
            "exactness_centered",
            self.omega.exactness_centered(&self.f),
            bound2,
            Provenance::Oracle,
        ));
        rep.push(Check::upper_bound(
            "exactness_high_order",
            self.omega.exactness_high_order(&self.f, self.config.eps_strip),
            1e-8,
            Provenance::Oracle,
        ));

        rep.push(Check::new(
            "omega_reflection_parities",
            self.omega.reflection_residual(),
            0.0,
            0.0,
            false,
            Provenance::Exact,
        ));
        rep.push(Check::new(
            "omega_averaging_idempotent",
            self.omega.idempotence_residual(),
            0.0,
            0.0,
            false,
            Provenance::Exact,
        ));
        rep.push(Check::upper_bound(
            "omega_leaf_margin",
            self.config.margin - self.omega.leaf_margin,
            0.0,
            Provenance::Oracle,
        ));

        rep.push(Check::upper_bound(
            "det_g_unit",
            self.metric.det_deviation(),
            1e-9,
            Provenance::Theory,
        ));
        rep.push(Check::upper_bound(
            "omega_is_leafwise_length_form",
            self.metric.length_form_deviation(&self.foliation),
            1e-9,
            Provenance::Theory,
        ));
        rep.push(Check::new(
            "g_reflection_equivariant",
            self.metric.equivariance_residual(),
            0.0,
            0.0,
            false,
            Provenance::Oracle,
        ));

        let (_, worst) = self.curvature_report()?;
        rep.push(Check::upper_bound(
            "leaf_curvature_matches_minus_f",
            worst,
            5e-2,
            Provenance::Oracle,
        ));

        Ok(rep)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_divisibility_enforced() {
        assert!(FlatTorus::new(4.0, 100, 16).is_err());
        assert!(FlatTorus::new(4.0, 128, 10).is_err());
        assert!(FlatTorus::new(-1.0, 128, 16).is_err());
        assert!(FlatTorus::new(4.0, 128, 16).is_ok());
    }

    #[test]
    fn reflection_indices() {
        let t = FlatTorus::new(4.0, 128, 16).unwrap();
        assert_eq!(t.reflect_index(0, 5), 123);
        assert_eq!(t.reflect_index(1, 5), 59);
        assert_eq!(t.reflect_index(2, 5), 123); // same circle isometry as l0
        assert_eq!(t.reflect_index(1, 32), 32);
    }

    #[test]
    fn pipeline_runs_and_verifies_at_256() {
        let cfg = TorusConfig {
            nx: 256,
            ny: 16,
            ..TorusConfig::default()
        };
        let pipe = TorusPipeline::run(cfg).unwrap();
        let rep = pipe.verify().unwrap();
        for c in &rep.checks {
            // the curvature bound is certified at 512 only
            if c.name == "leaf_curvature_matches_minus_f" {
                continue;
            }
            assert!(c.pass, "failed {}: {} vs {}", c.name, c.value, c.reference);
        }
    }

    #[test]
    fn curvature_error_decreases_under_refinement() {
        let mut errs = Vec::new();
        for nx in [128, 256] {
            let cfg = TorusConfig {
                nx,
                ny: 16,
                ..TorusConfig::default()
            };
            let pipe = TorusPipeline::run(cfg).unwrap();
            let (_, worst) = pipe.curvature_report().unwrap();
            errs.push(worst);
        }
        assert!(errs[1] < errs[0], "errors {errs:?}");
    }

    #[test]
    fn curvature_csv_header() {
        let cfg = TorusConfig {
            nx: 128,
            ny: 8,
            ..TorusConfig::default()
        };
        let pipe = TorusPipeline::run(cfg).unwrap();
        let csv = pipe.curvature_csv().unwrap();
        assert!(csv.starts_with("leaf_id,s,x,y,kappa,f,abs_err\n"));
        let err = pipe.field_csv("nope");
        assert!(err.is_err());
        let w = pipe.field_csv("w").unwrap();
        assert_eq!(w.lines().count(), 8);
    }
}
