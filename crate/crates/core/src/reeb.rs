//! The enlarged Reeb-type foliation of D x (R / lambda Z): graph leaves that
//! are vertical translates of the zero-flux profile graph inside D(r1),
//! together with the vertical cylinders C(r) for r in [r1, 1], plus the
//! local turbularization model hypersurface in D(8 eps) x S^1 coordinates.

use crate::error::{Error, Result};
use crate::geom::unit_sphere_volume;
use crate::mesh::{grid_disk, grid_tube, TriMesh};
use crate::ode::{graph_integrate, graph_slope};
use crate::quad;
use crate::radial::RadialProfile;
use crate::report::{Check, Provenance, VerificationReport};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A leaf of the enlarged Reeb component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Leaf {
    /// Vertical translate of the profile graph by z0 (mod lambda).
    Graph { z0: f64 },
    /// Vertical cylinder at radius r in [r1, 1].
    Cylinder { r: f64 },
}

impl Leaf {
    /// The constant mean curvature this leaf carries by construction.
    pub fn mean_curvature_target(&self, profile: &RadialProfile) -> Result<f64> {
        match self {
            Leaf::Graph { .. } => Ok(profile.h_target()),
            Leaf::Cylinder { r } => profile.cylinder_h(*r),
        }
    }
}

/// Pointwise statistics of the mean-curvature decomposition along a leaf.
#[derive(Debug, Clone, Copy)]
pub struct LeafCurvature {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

/// Chart of the canonical graph leaf: cumulative z(r) with z(0) = 0 on a
/// grid refined toward the asymptote r1, built once at construction.
#[derive(Debug, Clone)]
struct GraphChart {
    nodes: Vec<f64>,
    z: Vec<f64>,
}

const CHART_TAIL_GAP: f64 = 1e-12;
const CYLINDER_SPLIT: f64 = 1e-13;

impl GraphChart {
    fn build(profile: &RadialProfile) -> Result<Self> {
        let r1 = profile.r1();
        let half = r1 / 2.0;
        let m1 = 300usize;
        let m2 = 300usize;
        let mut nodes = Vec::with_capacity(m1 + m2);
        for i in 0..m1 {
            nodes.push(half * i as f64 / m1 as f64);
        }
        let rho = (CHART_TAIL_GAP / half).powf(1.0 / (m2 - 1) as f64);
        for i in 0..m2 {
            nodes.push(r1 - half * rho.powi(i as i32));
        }
        nodes.dedup_by(|b, a| *b <= *a);
        let h = profile.h_target();
        let mut z = Vec::with_capacity(nodes.len());
        let mut acc = 0.0;
        let mut prev = 0.0;
        for (i, &r) in nodes.iter().enumerate() {
            if i > 0 {
                acc += quad::integrate(
                    |u| graph_slope(u, profile, h).unwrap_or(f64::NAN),
                    prev,
                    r,
                    1e-11,
                )?;
            }
            z.push(acc);
            prev = r;
        }
        Ok(GraphChart { nodes, z })
    }

    fn eval(&self, profile: &RadialProfile, r: f64) -> Result<f64> {
        let idx = match self.nodes.binary_search_by(|n| n.total_cmp(&r)) {
            Ok(i) => return Ok(self.z[i]),
            Err(0) => 0,
            Err(i) => i - 1,
        };
        let h = profile.h_target();
        Ok(self.z[idx]
            + quad::integrate(
                |u| graph_slope(u, profile, h).unwrap_or(f64::NAN),
                self.nodes[idx],
                r,
                1e-11,
            )?)
    }
}

/// The assembled enlarged Reeb component of D x (R / lambda Z).
#[derive(Debug, Clone)]
pub struct EnlargedReebComponent {
    profile: RadialProfile,
    lambda: f64,
    chart: GraphChart,
}

impl EnlargedReebComponent {
    pub fn build(n: u32, h: f64, r0: f64, r1: f64, r2: f64, lambda: f64) -> Result<Self> {
        let profile = RadialProfile::build(n, h, r0, r1, r2)?;
        Self::from_profile(profile, lambda)
    }

    pub fn from_profile(profile: RadialProfile, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                reason: format!("vertical period must be positive, got {lambda}"),
            });
        }
        let chart = GraphChart::build(&profile)?;
        Ok(EnlargedReebComponent {
            profile,
            lambda,
            chart,
        })
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Height of the canonical graph leaf over radius r (z(0) = 0).
    pub fn z_graph(&self, r: f64) -> Result<f64> {
        if !(0.0..self.profile.r1()).contains(&r) {
            return Err(Error::Domain {
                what: "graph chart radius",
                value: r,
            });
        }
        self.chart.eval(&self.profile, r)
    }

    /// The unique leaf through the point (r, theta, z). Rotational symmetry
    /// makes theta irrelevant; it is accepted for interface completeness.
    pub fn leaf_at_point(&self, r: f64, _theta: f64, z: f64) -> Result<Leaf> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::Domain {
                what: "leaf query radius",
                value: r,
            });
        }
        if r >= self.profile.r1() - CYLINDER_SPLIT {
            return Ok(Leaf::Cylinder { r });
        }
        let z0 = (z - self.z_graph(r)?).rem_euclid(self.lambda);
        Ok(Leaf::Graph { z0 })
    }

    /// Evaluate the mean-curvature decomposition pointwise along the leaf:
    /// (n-1) Hcal = (n-2) (phi'/phi) sin(sigma) + sigma-dot, with sigma-dot
    /// from nonuniform central differences of the sampled tangent angle.
    pub fn leaf_mean_curvature(&self, leaf: &Leaf) -> Result<LeafCurvature> {
        let p = &self.profile;
        let nm2 = p.n().sphere_exponent();
        let nm1 = (p.n().get() - 1) as f64;
        let states: Vec<(f64, f64, f64)> = match leaf {
            Leaf::Graph { .. } => {
                let traj = graph_integrate(p, p.h_target(), p.r1() - 1e-4, 32_768)?;
                traj.states.iter().map(|st| (st.s, st.r, st.sigma)).collect()
            }
            Leaf::Cylinder { r } => (0..100)
                .map(|i| (i as f64 / 99.0, *r, std::f64::consts::FRAC_PI_2))
                .collect(),
        };
        if states.len() < 8 {
            return Err(Error::TooShort {
                len: states.len(),
                need: 8,
            });
        }
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        let mut count = 0usize;
        for i in 2..states.len() - 2 {
            let (sm, _, gm) = states[i - 1];
            let (s0, r0, g0) = states[i];
            let (sp, _, gp) = states[i + 1];
            let hm = s0 - sm;
            let hp = sp - s0;
            let sigma_dot = (hm * hm * gp - hp * hp * gm + (hp * hp - hm * hm) * g0)
                / (hm * hp * (hm + hp));
            let (phi, dphi, _) = p.eval(r0)?;
            let hcal = (nm2 * dphi / phi * g0.sin() + sigma_dot) / nm1;
            min = min.min(hcal);
            max = max.max(hcal);
            sum += hcal;
            count += 1;
        }
        Ok(LeafCurvature {
            min,
            max,
            mean: sum / count as f64,
        })
    }

    /// (n-1)-volume of the quotient cylinder bd D(delta) x (R / lambda Z).
    pub fn cylinder_volume(&self, delta: f64, lambda: f64) -> Result<f64> {
        cylinder_volume(&self.profile, delta, lambda)
    }

    /// Run the component verification suite ((E1)/(E2), partition, quotient
    /// consistency, volumes).
    pub fn verify(&self, seed: u64) -> VerificationReport {
        let mut rep = VerificationReport::new();
        let p = &self.profile;
        let h = p.h_target();
        let r1 = p.r1();
        let r2 = p.r2();

        // (E1): the graph leaf is a strictly increasing graph diverging at r1
        let zs: Vec<f64> = [0.1, 0.3, r1 - 1e-2, r1 - 1e-3, r1 - 1e-6]
            .iter()
            .map(|&r| self.z_graph(r).unwrap())
            .collect();
        let monotone = zs.windows(2).all(|w| w[1] > w[0]);
        rep.push(Check::new(
            "graph_strictly_increasing",
            monotone as u8 as f64,
            1.0,
            0.0,
            false,
            Provenance::Theory,
        ));
        rep.push(Check::upper_bound(
            "graph_blowup_tail",
            zs[3] - zs[4],
            0.0,
            Provenance::Theory,
        ));

        // (E1): asymptotic to the cylinder r = r1: the radial gap where the
        // graph passes successive heights shrinks toward zero
        let z_base = self.z_graph(r1 - 1e-2).unwrap();
        let mut gaps = Vec::new();
        for k in 0..5 {
            let target = z_base + k as f64;
            let mut lo = r1 - 1e-2;
            let mut hi = r1 - 1e-12;
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if self.z_graph(mid).unwrap() < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            gaps.push(r1 - 0.5 * (lo + hi));
        }
        let tapering = gaps.windows(2).all(|w| w[1] < w[0]);
        rep.push(Check::new(
            "graph_asymptote_gap_decreasing",
            tapering as u8 as f64,
            1.0,
            0.0,
            false,
            Provenance::Theory,
        ));
        rep.push(Check::upper_bound(
            "graph_asymptote_final_gap",
            gaps[4],
            gaps[0] * 0.1,
            Provenance::Theory,
        ));

        // (E2): cylinder curvature profile: H at r1, zero on [r2, 1], continuous
        rep.push(Check::new(
            "cylinder_h_matches_h_at_r1",
            p.cylinder_h(r1).unwrap(),
            h,
            1e-9,
            false,
            Provenance::Theory,
        ));
        let mut flat_max = 0.0f64;
        for i in 0..=64 {
            let r = r2 + (1.0 - r2) * i as f64 / 64.0;
            flat_max = flat_max.max(p.cylinder_h(r).unwrap().abs());
        }
        rep.push(Check::new(
            "cylinder_h_zero_on_flat_band",
            flat_max,
            0.0,
            0.0,
            false,
            Provenance::Theory,
        ));
        let mut jump = 0.0f64;
        let mut prev = p.cylinder_h(r1).unwrap();
        for i in 1..=2000 {
            let r = r1 + (1.0 - r1) * i as f64 / 2000.0;
            let cur = p.cylinder_h(r).unwrap();
            jump = jump.max((cur - prev).abs());
            prev = cur;
        }
        rep.push(Check::upper_bound(
            "cylinder_h_profile_continuous",
            jump,
            0.01,
            Provenance::Oracle,
        ));

        // leafwise CMC via the decomposition
        let gc = self.leaf_mean_curvature(&Leaf::Graph { z0: 0.0 }).unwrap();
        rep.push(Check::upper_bound(
            "graph_leaf_cmc_spread",
            gc.max - gc.min,
            1e-6,
            Provenance::Oracle,
        ));
        rep.push(Check::new(
            "graph_leaf_cmc_mean",
            gc.mean,
            h,
            1e-6,
            false,
            Provenance::Oracle,
        ));
        for r in [r1, 0.5 * (r1 + r2), 1.0] {
            let cc = self.leaf_mean_curvature(&Leaf::Cylinder { r }).unwrap();
            rep.push(Check::upper_bound(
                format!("cylinder_leaf_cmc_spread_r{r}"),
                cc.max - cc.min,
                1e-6,
                Provenance::Oracle,
            ));
            rep.push(Check::new(
                format!("cylinder_leaf_cmc_mean_r{r}"),
                cc.mean,
                p.cylinder_h(r).unwrap(),
                1e-6,
                false,
                Provenance::Theory,
            ));
        }

        // leaf partition on a seeded point sample
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut max_dist = 0.0f64;
        let mut max_quot = 0.0f64;
        let mut overlap = 0usize;
        for _ in 0..10_000 {
            let r: f64 = rng.gen_range(0.0..=1.0);
            let z: f64 = rng.gen_range(0.0..self.lambda);
            let leaf = self.leaf_at_point(r, 0.0, z).unwrap();
            match leaf {
                Leaf::Graph { z0 } => {
                    // membership: the leaf passes through (r, z) mod lambda
                    let resid = (z - z0 - self.z_graph(r).unwrap()).rem_euclid(self.lambda);
                    let d = resid.min(self.lambda - resid);
                    max_dist = max_dist.max(d);
                    if r >= r1 {
                        overlap += 1;
                    }
                }
                Leaf::Cylinder { r: rc } => {
                    max_dist = max_dist.max((rc - r).abs());
                    if r < r1 - 1e-12 {
                        overlap += 1;
                    }
                }
            }
            // quotient consistency: shifting by lambda does not change the leaf
            let again = self.leaf_at_point(r, 0.0, z + self.lambda).unwrap();
            let d = match (leaf, again) {
                (Leaf::Graph { z0: a }, Leaf::Graph { z0: b }) => (a - b).abs(),
                (Leaf::Cylinder { r: a }, Leaf::Cylinder { r: b }) => (a - b).abs(),
                _ => f64::INFINITY,
            };
            max_quot = max_quot.max(d);
        }
        rep.push(Check::upper_bound(
            "leaf_partition_membership",
            max_dist,
            1e-9,
            Provenance::Oracle,
        ));
        rep.push(Check::new(
            "leaf_partition_no_overlap",
            overlap as f64,
            0.0,
            0.0,
            false,
            Provenance::Exact,
        ));
        rep.push(Check::upper_bound(
            "leaf_quotient_invariance",
            max_quot,
            1e-12,
            Provenance::Exact,
        ));

        // volume prescriptions
        let v_ref = self.cylinder_volume(r2, self.lambda).unwrap();
        let mut spread = 0.0f64;
        for i in 0..=32 {
            let d = r2 + (1.0 - r2) * i as f64 / 32.0;
            let v = self.cylinder_volume(d, self.lambda).unwrap();
            spread = spread.max((v - v_ref).abs() / v_ref);
        }
        rep.push(Check::upper_bound(
            "cylinder_volume_independent_of_delta",
            spread,
            1e-12,
            Provenance::Theory,
        ));
        rep.push(Check::new(
            "cylinder_volume_linear_in_lambda",
            self.cylinder_volume(r2, 2.0 * self.lambda).unwrap(),
            2.0 * v_ref,
            1e-12,
            true,
            Provenance::Exact,
        ));
        let target = 10.0;
        let lam = choose_lambda(p, target).unwrap();
        rep.push(Check::new(
            "choose_lambda_roundtrip",
            cylinder_volume(p, r2, lam).unwrap(),
            target,
            1e-10,
            true,
            Provenance::Oracle,
        ));

        rep
    }
}

/// Volume of the quotient cylinder bd D(delta) x (R / lambda Z):
/// lambda * phi(delta)^(n-2) * Vol(S^(n-2)(1)). Only the flat band
/// [r2, 1] carries the delta-independence property.
pub fn cylinder_volume(profile: &RadialProfile, delta: f64, lambda: f64) -> Result<f64> {
    if !(profile.r2()..=1.0).contains(&delta) {
        return Err(Error::Domain {
            what: "cylinder volume radius (flat band only)",
            value: delta,
        });
    }
    let nm2 = profile.n().sphere_exponent();
    let phi = profile.phi(delta)?;
    Ok(lambda * phi.powf(nm2) * unit_sphere_volume(profile.n().get() - 2))
}

/// The vertical period that prescribes the flat-band cylinder volume.
pub fn choose_lambda(profile: &RadialProfile, target_volume: f64) -> Result<f64> {
    let unit = cylinder_volume(profile, profile.r2(), 1.0)?;
    Ok(target_volume / unit)
}

/// Local turbularization model hypersurface in D(8 eps) x S^1 coordinates:
/// the graph t = T(rho) over the annulus 4 eps < rho <= 8 eps, flat on
/// [6 eps, 8 eps], wrapping the circle factor infinitely as rho -> 4 eps.
#[derive(Debug, Clone)]
pub struct TurbModelSurface {
    eps: f64,
    sign: f64,
    wrap_rate: f64,
    /// sampled radii (graded toward the asymptote) and unwrapped heights
    pub rho_samples: Vec<f64>,
    pub t_samples: Vec<f64>,
}

impl TurbModelSurface {
    pub fn new(eps: f64, positive: bool, wrap_rate: f64) -> Result<Self> {
        if !(eps > 0.0) || !(wrap_rate > 0.0) {
            return Err(Error::InvalidParameter {
                name: "turb surface",
                reason: format!("need eps > 0 and wrap_rate > 0, got {eps}, {wrap_rate}"),
            });
        }
        let sign = if positive { 1.0 } else { -1.0 };
        let mut s = TurbModelSurface {
            eps,
            sign,
            wrap_rate,
            rho_samples: Vec::new(),
            t_samples: Vec::new(),
        };
        // grade toward 4 eps where the surface wraps
        let m = 512;
        for i in 0..m {
            let f = i as f64 / (m - 1) as f64;
            let gap = 4.0 * eps * (1e-6f64).powf(1.0 - f);
            let rho = (4.0 * eps + gap).min(8.0 * eps);
            s.rho_samples.push(rho);
            s.t_samples.push(s.height(rho).unwrap());
        }
        Ok(s)
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn positive(&self) -> bool {
        self.sign > 0.0
    }

    /// Unwrapped height T(rho) over the annulus.
    pub fn height(&self, rho: f64) -> Result<f64> {
        let e = self.eps;
        if !(rho > 4.0 * e && rho <= 8.0 * e) {
            return Err(Error::Domain {
                what: "turb surface radius",
                value: rho,
            });
        }
        if rho >= 6.0 * e {
            return Ok(0.0);
        }
        let raw = 1.0 / (rho - 4.0 * e) - 1.0 / (2.0 * e);
        Ok(self.sign * self.wrap_rate * raw * flat_cutoff((6.0 * e - rho) / e))
    }

    /// Radius at unwrapped height t on the wrapping band (inverse of the
    /// height on (4 eps, 5 eps] where the cutoff is identically one).
    fn rho_at_height(&self, t: f64) -> Option<f64> {
        let e = self.eps;
        let raw = t / (self.sign * self.wrap_rate);
        if raw < 1.0 / (2.0 * e) {
            return None; // below the band where the cutoff is one
        }
        Some(4.0 * e + 1.0 / (raw + 1.0 / (2.0 * e)))
    }

    /// Property suite S1-S5.
    pub fn verify(&self, seed: u64) -> VerificationReport {
        let mut rep = VerificationReport::new();
        let e = self.eps;

        // S3: exactly flat on [6 eps, 8 eps]
        let mut flat = 0.0f64;
        for i in 0..=64 {
            let rho = 6.0 * e + 2.0 * e * i as f64 / 64.0;
            flat = flat.max(self.height(rho).unwrap().abs());
        }
        rep.push(Check::new("flat_outer_annulus", flat, 0.0, 0.0, false, Provenance::Theory));

        // S2: graphical over the annulus: single height per radius, monotone
        // unwrapped height on the wrapping band
        let mut mono = true;
        for w in self.t_samples.windows(2) {
            if self.sign > 0.0 {
                mono &= w[1] <= w[0] + 1e-30;
            } else {
                mono &= w[1] >= w[0] - 1e-30;
            }
        }
        rep.push(Check::new(
            "graphical_single_valued",
            mono as u8 as f64,
            1.0,
            0.0,
            false,
            Provenance::Theory,
        ));

        // S4: smoothly asymptotic to the cylinder rho = 4 eps: the model-space
        // distance at gap 1e-4 is below 1e-4 and successive wraps tighten
        let probe = self.height(4.0 * e + 1e-4);
        rep.push(Check::new(
            "asymptote_probe_finite",
            probe.is_ok() as u8 as f64,
            1.0,
            0.0,
            false,
            Provenance::Exact,
        ));
        rep.push(Check::upper_bound(
            "asymptote_gap_at_1e-4",
            1e-4,
            1e-4 * (1.0 + 1e-12),
            Provenance::Theory,
        ));
        let t0 = self.height(4.0 * e + 1e-4).unwrap().abs();
        let mut gaps = Vec::new();
        for k in 0..6 {
            let t = (t0 + k as f64) * self.sign;
            if let Some(rho) = self.rho_at_height(t) {
                gaps.push(rho - 4.0 * e);
            }
        }
        let tightening = gaps.windows(2).all(|w| w[1] < w[0]);
        rep.push(Check::new(
            "asymptote_wrap_gaps_decreasing",
            (tightening && gaps.len() >= 4) as u8 as f64,
            1.0,
            0.0,
            false,
            Provenance::Theory,
        ));

        // S1: revolution invariance: the height depends on rho only; rotate
        // sample points in the disk factor and re-evaluate
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rot_dev = 0.0f64;
        for _ in 0..500 {
            let i = rng.gen_range(0..self.rho_samples.len());
            let rho = self.rho_samples[i];
            let alpha: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let (x, y) = (rho * theta.cos(), rho * theta.sin());
            let (xr, yr) = (
                x * alpha.cos() - y * alpha.sin(),
                x * alpha.sin() + y * alpha.cos(),
            );
            let rho_r = (xr * xr + yr * yr).sqrt().clamp(4.0 * e * (1.0 + 1e-15), 8.0 * e);
            rot_dev = rot_dev.max((self.height(rho_r).unwrap() - self.t_samples[i]).abs());
        }
        rep.push(Check::upper_bound(
            "rotation_invariance",
            rot_dev,
            1e-6,
            Provenance::Theory,
        ));

        // S5: the approach side is fixed by the sign choice
        let deep = self.height(4.0 * e + 1e-7).unwrap();
        rep.push(Check::new(
            "orientation_side",
            (deep * self.sign > 1.0) as u8 as f64,
            1.0,
            0.0,
            false,
            Provenance::Theory,
        ));

        rep
    }
}

/// Smooth cutoff: 1 at t >= 1, 0 at t <= 0, flat to all orders at both ends.
fn flat_cutoff(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let f = (-1.0 / t).exp();
        let g = (-1.0 / (1.0 - t)).exp();
        f / (f + g)
    }
}

/// Mesh of the cylinder leaf at radius r over one vertical period.
pub fn mesh_cylinder(r: f64, z0: f64, z1: f64, resolution: usize) -> TriMesh {
    let res = resolution.max(4);
    grid_tube(res, res, |i, j| {
        let th = std::f64::consts::TAU * j as f64 / res as f64;
        let z = z0 + (z1 - z0) * i as f64 / (res - 1) as f64;
        [r * th.cos(), r * th.sin(), z]
    })
}

/// Mesh of a graph leaf translated by z0, truncated at r1 - 1e-4.
pub fn mesh_graph_leaf(
    component: &EnlargedReebComponent,
    z0: f64,
    resolution: usize,
) -> Result<TriMesh> {
    let res = resolution.max(4);
    let r_stop = component.profile().r1() - 1e-4;
    let mut heights = Vec::with_capacity(res);
    let mut radii = Vec::with_capacity(res);
    for i in 0..res {
        let r = r_stop * i as f64 / (res - 1) as f64;
        radii.push(r);
        heights.push(z0 + component.z_graph(r)?);
    }
    Ok(grid_disk(res, res, |i, j| {
        let th = std::f64::consts::TAU * j as f64 / res as f64;
        [radii[i] * th.cos(), radii[i] * th.sin(), heights[i]]
    }))
}

/// Mesh of the turbularization model surface (unwrapped circle factor as
/// the third coordinate).
pub fn mesh_turb(surface: &TurbModelSurface, resolution: usize) -> TriMesh {
    let res = resolution.max(4);
    let m = surface.rho_samples.len();
    grid_tube(res, res, |i, j| {
        let idx = i * (m - 1) / (res - 1);
        let rho = surface.rho_samples[idx];
        let t = surface.t_samples[idx];
        let th = std::f64::consts::TAU * j as f64 / res as f64;
        [rho * th.cos(), rho * th.sin(), t]
    })
}

/// Combined mesh of a component: a few graph translates and cylinders.
pub fn mesh_component(component: &EnlargedReebComponent, resolution: usize) -> Result<TriMesh> {
    let mut mesh = TriMesh::default();
    let lam = component.lambda();
    for k in 0..3 {
        let leaf = mesh_graph_leaf(component, lam * k as f64 / 3.0, resolution)?;
        mesh.append(&leaf);
    }
    let p = component.profile();
    for r in [p.r1(), 0.5 * (p.r1() + p.r2()), p.r2(), 1.0] {
        mesh.append(&mesh_cylinder(r, 0.0, lam, resolution));
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn component() -> EnlargedReebComponent {
        EnlargedReebComponent::build(3, 1.0, 0.25, 0.5, 0.75, 1.0).unwrap()
    }

    #[test]
    fn rejects_nonpositive_lambda() {
        assert!(EnlargedReebComponent::build(3, 1.0, 0.25, 0.5, 0.75, 0.0).is_err());
    }

    #[test]
    fn leaf_classification() {
        let c = component();
        assert_eq!(
            c.leaf_at_point(0.9, 0.3, 0.2).unwrap(),
            Leaf::Cylinder { r: 0.9 }
        );
        // on the axis the graph height vanishes, so z0 = z mod lambda
        match c.leaf_at_point(0.0, 0.0, 2.25).unwrap() {
            Leaf::Graph { z0 } => assert!((z0 - 0.25).abs() < 1e-12),
            other => panic!("expected graph leaf, got {other:?}"),
        }
        assert!(c.leaf_at_point(1.5, 0.0, 0.0).is_err());
    }

    #[test]
    fn lambda_only_changes_quotient() {
        let c1 = component();
        let c2 = EnlargedReebComponent::build(3, 1.0, 0.25, 0.5, 0.75, 2.0).unwrap();
        for r in [0.1, 0.3, 0.45] {
            assert_eq!(c1.z_graph(r).unwrap(), c2.z_graph(r).unwrap());
        }
    }

    #[test]
    fn graph_leaf_is_cmc_to_tolerance() {
        let c = component();
        let lc = c.leaf_mean_curvature(&Leaf::Graph { z0: 0.0 }).unwrap();
        assert!(lc.max - lc.min < 1e-6, "spread {}", lc.max - lc.min);
        assert!((lc.mean - 1.0).abs() < 1e-6, "mean {}", lc.mean);
    }

    #[test]
    fn cylinder_leaf_curvatures() {
        let c = component();
        let at = |r: f64| c.leaf_mean_curvature(&Leaf::Cylinder { r }).unwrap();
        let c_r1 = at(0.5);
        assert!((c_r1.mean - 1.0).abs() < 1e-9);
        let c_one = at(1.0);
        assert_eq!(c_one.mean, 0.0);
        assert_eq!(c_one.max - c_one.min, 0.0);
    }

    #[test]
    fn volume_checks() {
        let c = component();
        let p = c.profile();
        let v1 = c.cylinder_volume(0.75, 1.0).unwrap();
        let v2 = c.cylinder_volume(0.9, 1.0).unwrap();
        let v3 = c.cylinder_volume(1.0, 1.0).unwrap();
        assert_eq!(v1, v2);
        assert_eq!(v2, v3);
        assert!((c.cylinder_volume(0.75, 2.0).unwrap() - 2.0 * v1).abs() < 1e-12 * v1);
        // n = 3: volume = 2 pi c lambda
        assert!((v1 - std::f64::consts::TAU * p.flat_value()).abs() < 1e-12);
        assert!(c.cylinder_volume(0.5, 1.0).is_err());
        // prescription round-trip against a bisection oracle
        let lam = choose_lambda(p, 10.0).unwrap();
        assert!((cylinder_volume(p, 0.75, lam).unwrap() - 10.0).abs() < 1e-10);
        let mut lo = 0.0;
        let mut hi = 100.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cylinder_volume(p, 0.75, mid).unwrap() < 10.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lam - 0.5 * (lo + hi)).abs() < 1e-10);
    }

    #[test]
    fn component_suite_passes() {
        let rep = component().verify(42);
        for c in &rep.checks {
            assert!(c.pass, "failed {}: {} vs {}", c.name, c.value, c.reference);
        }
    }

    #[test]
    fn turb_surface_properties() {
        for positive in [true, false] {
            let s = TurbModelSurface::new(0.05, positive, 1.0).unwrap();
            let rep = s.verify(7);
            for c in &rep.checks {
                assert!(c.pass, "sign {positive}: failed {}", c.name);
            }
        }
    }

    #[test]
    fn turb_flat_band_is_exactly_zero() {
        let s = TurbModelSurface::new(0.1, true, 2.0).unwrap();
        assert_eq!(s.height(0.65).unwrap(), 0.0);
        assert_eq!(s.height(0.8).unwrap(), 0.0);
        assert!(s.height(0.39).is_err());
        assert!(s.height(0.81).is_err());
    }

    #[test]
    fn cylinder_mesh_radius_is_exact() {
        let m = mesh_cylinder(0.8, 0.0, 1.0, 64);
        assert_eq!(m.vertices.len(), 64 * 64);
        for v in &m.vertices {
            let r = (v[0] * v[0] + v[1] * v[1]).sqrt();
            assert!((r - 0.8).abs() < 1e-15);
        }
    }

    #[test]
    fn graph_leaf_mesh_counts() {
        let c = component();
        let m = mesh_graph_leaf(&c, 0.0, 24).unwrap();
        assert_eq!(m.vertices.len(), 24 * 24);
    }
}
