use std::f64::consts::{FRAC_PI_4, SQRT_2};
use std::sync::Arc;

use serde::Serialize;

use crate::group::{ElementKind, Entries, GroupElement};
use crate::numeric::{binomial_radius, qi, RHO};
use crate::par::{self, Exec};
use crate::space::SpaceModel;
use crate::{Error, Result};

use super::leaves::{Foliation, MIN_BIN_SAMPLES};

const GEOMETRY_TOL: f64 = 1e-12;

/// The unit cube standing on a square inscribed in the unit sphere, with the
/// quarter turn `f` that carries its lower face onto the `+x` wall.
#[derive(Clone, Debug, Serialize)]
pub struct CubeDiffuser {
    pub h: f64,
    pub rho: f64,
    pub vertices: [[f64; 3]; 8],
    pub face_a: [usize; 4],
    pub face_b: [usize; 4],
    pub f: GroupElement,
    pub d: f64,
}

pub fn construct_cube() -> CubeDiffuser {
    let h = SQRT_2 / 2.0;
    let mut vertices = [[0.0; 3]; 8];
    for (i, v) in vertices.iter_mut().enumerate() {
        *v = [
            if i & 1 == 0 { -0.5 } else { 0.5 },
            if i & 2 == 0 { -0.5 } else { 0.5 },
            if i & 4 == 0 { h } else { h + 1.0 },
        ];
    }
    let c = h + 0.5;
    // rotation by -π/2 about the vertical-plane axis through the centre
    let linear = [0, 0, -1, 0, 1, 0, 1, 0, 0].iter().map(|&x| qi(x)).collect();
    let f = GroupElement::new(ElementKind::RigidMotion, 3, Entries::Exact(linear), Entries::Float(vec![c, 0.0, c]))
        .expect("quarter turn is a rigid motion");
    CubeDiffuser { h, rho: h + 1.0, vertices, face_a: [0, 1, 2, 3], face_b: [4, 5, 6, 7], f, d: 0.5 }
}

/// `(x1, x2, x3) -> (x1, 1 - x3, x2)`, an order-4 symmetry of `[0,1]^3` that
/// carries horizontal layers to vertical ones.
pub fn quarter_turn() -> GroupElement {
    let linear = [1, 0, 0, 0, 0, -1, 0, 1, 0].iter().map(|&x| qi(x)).collect();
    GroupElement::new(ElementKind::RigidMotion, 3, Entries::Exact(linear), Entries::Exact(vec![qi(0), qi(1), qi(0)]))
        .expect("quarter turn is a rigid motion")
}

fn norm(p: &[f64]) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

/// Angle between the tangent plane of the leaf through `p` and the horizontal.
pub fn tangent_angle(p: &[f64; 3]) -> f64 {
    (p[2] / norm(p)).clamp(-1.0, 1.0).acos()
}

impl CubeDiffuser {
    pub fn contains(&self, p: &[f64; 3]) -> bool {
        p[0].abs() <= 0.5 && p[1].abs() <= 0.5 && p[2] >= self.h && p[2] <= self.h + 1.0
    }

    pub fn f_inverse(&self) -> GroupElement {
        self.f.inverse().expect("rigid motions invert")
    }

    pub fn geometry(&self) -> CubeGeometry {
        let v = &self.vertices;
        let mut edge_dev = 0.0f64;
        for i in 0..8 {
            for bit in [1, 2, 4] {
                let j = i ^ bit;
                if j > i {
                    let d = [v[i][0] - v[j][0], v[i][1] - v[j][1], v[i][2] - v[j][2]];
                    edge_dev = edge_dev.max((norm(&d) - 1.0).abs());
                }
            }
        }
        let corner_dev = self.face_a.iter().map(|&i| (norm(&v[i]) - 1.0).abs()).fold(0.0, f64::max);
        let corner_angle = self.face_a.iter().map(|&i| tangent_angle(&v[i])).fold(0.0, f64::max);
        // face B lies in x3 = h + 1; the nearest point to the origin is its centre
        let face_b_gap = (self.h + 1.0) - self.rho;
        let foot = [0.0, 0.0, self.h + 1.0];
        let mut max_angle = 0.0f64;
        let g = 48;
        for i in 0..=g {
            for j in 0..=g {
                for k in 0..=g {
                    let p = [
                        -0.5 + i as f64 / g as f64,
                        -0.5 + j as f64 / g as f64,
                        self.h + k as f64 / g as f64,
                    ];
                    let r = norm(&p);
                    if (1.0 - 1e-12..=self.rho + 1e-12).contains(&r) {
                        max_angle = max_angle.max(tangent_angle(&p));
                    }
                }
            }
        }
        let wall_dev = self
            .face_a
            .iter()
            .map(|&i| (self.f.apply_f64(&v[i])[0] - 0.5).abs())
            .fold(0.0, f64::max);
        let maps_to_itself = v.iter().all(|p| {
            let q = self.f.apply_f64(p);
            v.iter().any(|w| (0..3).all(|k| (w[k] - q[k]).abs() < GEOMETRY_TOL))
        });
        CubeGeometry {
            h: self.h,
            rho: self.rho,
            h_error: (self.h - SQRT_2 / 2.0).abs(),
            rho_error: (self.rho - RHO).abs(),
            edge_error: edge_dev,
            corner_norm_error: corner_dev,
            face_b_gap,
            face_b_touch_inside: self.contains(&foot) && (norm(&foot) - self.rho).abs() < GEOMETRY_TOL,
            corner_angle,
            corner_angle_error: (corner_angle - FRAC_PI_4).abs(),
            max_sampled_angle: max_angle,
            wall_error: wall_dev,
            f_preserves_cube: maps_to_itself,
            f_order: (1..=4).find(|&k| self.f.pow(k).map(|g| g.is_identity()).unwrap_or(false)),
        }
    }

    /// `max_z μ_z(K)` over bins, estimated from a cloud.
    pub fn max_leaf_mass(&self, model: &Arc<SpaceModel>, foliation: &Foliation) -> Result<(f64, f64)> {
        let mask = model.coords.iter().map(|p| self.contains(p)).collect();
        let set = crate::space::SampledSet::from_mask(model, mask)?;
        let rows = foliation.leaf_measures(model, &set)?;
        Ok(rows.iter().map(|r| (r.mu_z, r.radius)).fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a }))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CubeGeometry {
    pub h: f64,
    pub rho: f64,
    pub h_error: f64,
    pub rho_error: f64,
    pub edge_error: f64,
    pub corner_norm_error: f64,
    pub face_b_gap: f64,
    pub face_b_touch_inside: bool,
    pub corner_angle: f64,
    pub corner_angle_error: f64,
    pub max_sampled_angle: f64,
    pub wall_error: f64,
    pub f_preserves_cube: bool,
    pub f_order: Option<u32>,
}

impl CubeGeometry {
    pub fn checks(&self) -> Vec<(&'static str, bool)> {
        vec![
            ("height h = sqrt(2)/2", self.h_error <= GEOMETRY_TOL),
            ("h + 1 = rho", self.rho_error <= GEOMETRY_TOL && (self.h + 1.0 - self.rho).abs() <= GEOMETRY_TOL),
            ("side length 1", self.edge_error <= GEOMETRY_TOL),
            ("lower corners on the unit sphere", self.corner_norm_error <= GEOMETRY_TOL),
            ("upper face tangent to the outer sphere", self.face_b_gap.abs() <= GEOMETRY_TOL && self.face_b_touch_inside),
            ("corner angle pi/4", self.corner_angle_error <= GEOMETRY_TOL),
            ("tangent angle at most pi/4", self.max_sampled_angle <= FRAC_PI_4 + GEOMETRY_TOL),
            ("f maps the lower face to a side wall", self.wall_error <= GEOMETRY_TOL && self.f_preserves_cube),
        ]
    }

    pub fn pass(&self) -> bool {
        self.checks().iter().all(|c| c.1)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DiffuserRow {
    pub lo: f64,
    pub hi: f64,
    pub samples: u64,
    pub estimate: f64,
    pub radius: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiffuserReport {
    pub r: Vec<(f64, f64)>,
    pub mu_k_r: f64,
    pub mu_k_r_radius: f64,
    pub rows: Vec<DiffuserRow>,
    pub pass: bool,
    pub citation: &'static str,
}

impl DiffuserReport {
    pub fn plot_csv(&self) -> String {
        let mut s = String::from("z_lo,z_hi,estimate,radius,rhs\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{},{}\n", r.lo, r.hi, r.estimate, r.radius, r.rhs));
        }
        s
    }
}

fn in_union(r: &[(f64, f64)], z: f64) -> bool {
    r.iter().any(|&(a, b)| a <= z && z <= b)
}

/// Per leaf bin, estimates `μ_z(f(K_R))` as the sample mass of
/// `{y ∈ K : |y| in the bin, |f⁻¹ y| ∈ R}` per unit `z`, and tests it against
/// `D·μ(K_R)` with the rule `est >= rhs·(1 - 3·radius/est)`.
pub fn diffuser_check(
    cube: &CubeDiffuser,
    model: &Arc<SpaceModel>,
    r: &[(f64, f64)],
    foliation: &Foliation,
) -> Result<DiffuserReport> {
    if model.dim != 3 {
        return Err(Error::Dimension("diffuser check needs a 3-dimensional cloud".into()));
    }
    if r.iter().any(|&(a, b)| a > b || a < 1.0 - 1e-12 || b > RHO + 1e-12) {
        return Err(Error::InvalidArgument("R must be a union of subintervals of [1, rho]".into()));
    }
    let inv = cube.f_inverse();
    let bins = foliation.bins.len();
    // per bin: (samples of K, samples of f(K_R)); plus the K_R count
    let parts = par::map_chunks(Exec::Parallel, model.len(), par::CHUNK, |range| {
        let mut c = vec![(0u64, 0u64); bins];
        let mut k_r = 0u64;
        for i in range {
            let p = model.coords[i];
            if !cube.contains(&p) {
                continue;
            }
            let z = norm(&p);
            if in_union(r, z) {
                k_r += 1;
            }
            if let Some(b) = foliation.bin_of(z) {
                c[b].0 += 1;
                if in_union(r, norm(&inv.apply_f64(&p))) {
                    c[b].1 += 1;
                }
            }
        }
        (c, k_r)
    });
    let mut counts = vec![(0u64, 0u64); bins];
    let mut k_r = 0u64;
    for (c, k) in parts {
        k_r += k;
        for (t, x) in counts.iter_mut().zip(c) {
            t.0 += x.0;
            t.1 += x.1;
        }
    }
    let n = model.len();
    let mu_k_r = k_r as f64 * model.weight;
    let rhs = cube.d * mu_k_r;
    let mut rows = Vec::with_capacity(bins);
    for (&(samples, hit), bin) in counts.iter().zip(&foliation.bins) {
        if bin.nu == 0.0 {
            continue;
        }
        if (samples as usize) < MIN_BIN_SAMPLES {
            return Err(Error::Resolution(format!(
                "bin [{:.4}, {:.4}] holds {samples} samples of the cube",
                bin.lo, bin.hi
            )));
        }
        let estimate = hit as f64 * model.weight / bin.nu;
        let radius = model.total_mass * binomial_radius(hit as f64 / n as f64, n) / bin.nu;
        let pass = if estimate > 0.0 { estimate >= rhs * (1.0 - 3.0 * radius / estimate) } else { rhs == 0.0 };
        rows.push(DiffuserRow { lo: bin.lo, hi: bin.hi, samples, estimate, radius, rhs, pass });
    }
    Ok(DiffuserReport {
        r: r.to_vec(),
        mu_k_r,
        mu_k_r_radius: model.total_mass * binomial_radius(k_r as f64 / n as f64, n),
        pass: rows.iter().all(|r| r.pass),
        rows,
        citation: "mu_z(f(K_R)) >= 1/2 mu(K_R) for every leaf z",
    })
}
