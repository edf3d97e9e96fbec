use std::collections::HashMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::group::{lps_generators, GroupElement};
use crate::numeric::{q, Q, RHO};
use crate::par::{self, Exec};
use crate::{Error, Result};

pub const MODEL_CSV_SCHEMA: &str = "equidecomp.model-csv/v1";

/// Sentinel for "image leaves the model".
pub const NONE: u32 = u32::MAX;

/// Samples drawn per RNG stream; fixed so clouds do not depend on thread count.
const SAMPLE_CHUNK: usize = 1 << 16;

const ORBIT_TOL: f64 = 1e-9;
const ORBIT_CELL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    /// Points `(a/q, b/q)`, `0 <= a, b < q`; with `punctured` the origin is removed.
    RationalTorus {
        q: u64,
        #[serde(default)]
        punctured: bool,
    },
    /// Points `(i/q, j/q)` with `lo <= (i, j) < hi` in the plane.
    PlaneGrid { q: u64, lo: [i64; 2], hi: [i64; 2] },
    SphereCloud {
        n: usize,
        seed: u64,
        #[serde(default)]
        total_mass: Option<f64>,
    },
    /// Uniform samples of `1 <= |y| <= rho`; total mass defaults to the volume.
    AnnulusCloud {
        n: usize,
        seed: u64,
        #[serde(default)]
        total_mass: Option<f64>,
    },
    /// Uniform samples of the box `[lo, hi)`; total mass defaults to the volume.
    CubeCloud { n: usize, seed: u64, lo: [f64; 3], hi: [f64; 3] },
    /// Unit-sphere seeds closed under the rotation generators up to `depth` letters.
    OrbitCloud { seeds: usize, seed: u64, depth: usize },
}

/// Image table of one group element on an exact model.
#[derive(Clone, Debug)]
pub struct PointMap {
    pub image: Vec<u32>,
}

impl PointMap {
    pub fn get(&self, i: usize) -> Option<usize> {
        let j = self.image[i];
        (j != NONE).then_some(j as usize)
    }

    pub fn is_total(&self) -> bool {
        self.image.iter().all(|&j| j != NONE)
    }
}

#[derive(Debug)]
pub struct SpaceModel {
    pub spec: ModelSpec,
    pub dim: usize,
    pub coords: Vec<[f64; 3]>,
    /// Uniform per-point mass.
    pub weight: f64,
    pub exact_weight: Option<Q>,
    pub total_mass: f64,
    orbit_cells: HashMap<[i64; 3], Vec<u32>>,
}

fn sample_chunks<F>(n: usize, seed: u64, f: F) -> Vec<[f64; 3]>
where
    F: Fn(&mut ChaCha8Rng) -> [f64; 3] + Sync + Send,
{
    par::map_chunks(Exec::Parallel, n, SAMPLE_CHUNK, |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((r.start / SAMPLE_CHUNK) as u64);
        r.map(|_| f(&mut rng)).collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

fn unit_vector(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-12 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

pub fn annulus_volume() -> f64 {
    4.0 * std::f64::consts::PI / 3.0 * (RHO.powi(3) - 1.0)
}

fn cell_of(x: &[f64; 3]) -> [i64; 3] {
    x.map(|c| (c / ORBIT_CELL).round() as i64)
}

impl SpaceModel {
    pub fn build(spec: &ModelSpec) -> Result<SpaceModel> {
        let bad = |m: &str| Err(Error::InvalidModel(m.to_string()));
        let mut model = SpaceModel {
            spec: spec.clone(),
            dim: 3,
            coords: Vec::new(),
            weight: 0.0,
            exact_weight: None,
            total_mass: 0.0,
            orbit_cells: HashMap::new(),
        };
        match *spec {
            ModelSpec::RationalTorus { q: qq, punctured } => {
                if qq == 0 || qq > 1 << 15 || (punctured && qq < 2) {
                    return bad("torus size must be in 1..=32768 (2.. when punctured)");
                }
                let n = qq * qq - punctured as u64;
                model.dim = 2;
                model.coords = (0..qq * qq)
                    .skip(punctured as usize)
                    .map(|k| [(k / qq) as f64 / qq as f64, (k % qq) as f64 / qq as f64, 0.0])
                    .collect();
                model.exact_weight = Some(q(1, n as i128));
                model.weight = 1.0 / n as f64;
                model.total_mass = 1.0;
            }
            ModelSpec::PlaneGrid { q: qq, lo, hi } => {
                if qq == 0 || hi[0] <= lo[0] || hi[1] <= lo[1] {
                    return bad("plane grid needs q >= 1 and a nonempty window");
                }
                let (w, h) = ((hi[0] - lo[0]) as u64, (hi[1] - lo[1]) as u64);
                if w * h > 1 << 26 {
                    return bad("plane grid window too large");
                }
                model.dim = 2;
                model.coords = (0..w * h)
                    .map(|k| {
                        let (i, j) = (lo[0] + (k / h) as i64, lo[1] + (k % h) as i64);
                        [i as f64 / qq as f64, j as f64 / qq as f64, 0.0]
                    })
                    .collect();
                model.exact_weight = Some(q(1, (qq * qq) as i128));
                model.weight = 1.0 / (qq * qq) as f64;
                model.total_mass = (w * h) as f64 * model.weight;
            }
            ModelSpec::SphereCloud { n, seed, total_mass } => {
                if n == 0 {
                    return bad("cloud size must be at least 1");
                }
                model.coords = sample_chunks(n, seed, unit_vector);
                model.total_mass = total_mass.unwrap_or(1.0);
            }
            ModelSpec::AnnulusCloud { n, seed, total_mass } => {
                if n == 0 {
                    return bad("cloud size must be at least 1");
                }
                let r3 = RHO.powi(3);
                model.coords = sample_chunks(n, seed, |rng| {
                    let u = unit_vector(rng);
                    let r = (1.0 + rng.random::<f64>() * (r3 - 1.0)).cbrt();
                    u.map(|c| c * r)
                });
                model.total_mass = total_mass.unwrap_or_else(annulus_volume);
            }
            ModelSpec::CubeCloud { n, seed, lo, hi } => {
                if n == 0 || (0..3).any(|k| hi[k] <= lo[k]) {
                    return bad("cube cloud needs n >= 1 and lo < hi");
                }
                model.coords = sample_chunks(n, seed, |rng| {
                    [0, 1, 2].map(|k| lo[k] + rng.random::<f64>() * (hi[k] - lo[k]))
                });
                model.total_mass = (0..3).map(|k| hi[k] - lo[k]).product();
            }
            ModelSpec::OrbitCloud { seeds, seed, depth } => {
                if seeds == 0 {
                    return bad("orbit cloud needs at least one seed");
                }
                let gens: Vec<GroupElement> = lps_generators().members.into_iter().map(|m| m.element).collect();
                let mut frontier = sample_chunks(seeds, seed, unit_vector);
                for x in std::mem::take(&mut frontier) {
                    if model.orbit_insert(x) {
                        frontier.push(x);
                    }
                }
                for _ in 0..depth {
                    let mut next = Vec::new();
                    for x in &frontier {
                        for g in &gens {
                            let y = g.apply_f64(x);
                            let y = [y[0], y[1], y[2]];
                            if model.orbit_insert(y) {
                                next.push(y);
                            }
                        }
                    }
                    if model.coords.len() > 1 << 24 {
                        return bad("orbit cloud exceeds 2^24 points");
                    }
                    frontier = next;
                }
                model.total_mass = 1.0;
            }
        }
        if model.exact_weight.is_none() {
            model.weight = model.total_mass / model.coords.len() as f64;
        }
        Ok(model)
    }

    fn orbit_insert(&mut self, x: [f64; 3]) -> bool {
        if self.orbit_find(&x).is_some() {
            return false;
        }
        self.orbit_cells.entry(cell_of(&x)).or_default().push(self.coords.len() as u32);
        self.coords.push(x);
        true
    }

    fn orbit_find(&self, x: &[f64; 3]) -> Option<usize> {
        let c = cell_of(x);
        for d in 0..27i64 {
            let key = [c[0] + d % 3 - 1, c[1] + (d / 3) % 3 - 1, c[2] + d / 9 - 1];
            if let Some(ids) = self.orbit_cells.get(&key) {
                for &i in ids {
                    let p = &self.coords[i as usize];
                    if (0..3).all(|k| (p[k] - x[k]).abs() <= ORBIT_TOL) {
                        return Some(i as usize);
                    }
                }
            }
        }
        None
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Models on which group elements act by exact index permutations.
    pub fn is_exact(&self) -> bool {
        matches!(self.spec, ModelSpec::RationalTorus { .. } | ModelSpec::PlaneGrid { .. })
    }

    /// Models on which graphings and averaging operators can be built.
    pub fn supports_transport(&self) -> bool {
        self.is_exact() || matches!(self.spec, ModelSpec::OrbitCloud { .. })
    }

    pub fn is_torus(&self) -> bool {
        matches!(self.spec, ModelSpec::RationalTorus { .. })
    }

    pub fn sample_size(&self) -> usize {
        self.len()
    }

    /// Exact rational coordinates of a grid point.
    pub fn exact_point(&self, i: usize) -> Option<Vec<Q>> {
        let (a, b, qq) = self.grid_coords(i)?;
        Some(vec![q(a as i128, qq as i128), q(b as i128, qq as i128)])
    }

    /// Integer grid coordinates `(a, b)` and the denominator `q`.
    pub fn grid_coords(&self, i: usize) -> Option<(i64, i64, u64)> {
        match self.spec {
            ModelSpec::RationalTorus { q: qq, punctured } => {
                let k = i as u64 + punctured as u64;
                Some(((k / qq) as i64, (k % qq) as i64, qq))
            }
            ModelSpec::PlaneGrid { q: qq, lo, hi } => {
                let h = (hi[1] - lo[1]) as u64;
                Some((lo[0] + (i as u64 / h) as i64, lo[1] + (i as u64 % h) as i64, qq))
            }
            _ => None,
        }
    }

    /// Index of the grid point with integer coordinates `(a, b)`.
    pub fn grid_index(&self, a: i64, b: i64) -> Option<usize> {
        match self.spec {
            ModelSpec::RationalTorus { q: qq, punctured } => {
                let qq = qq as i64;
                let k = a.rem_euclid(qq) * qq + b.rem_euclid(qq);
                match (punctured, k) {
                    (true, 0) => None,
                    (true, _) => Some(k as usize - 1),
                    (false, _) => Some(k as usize),
                }
            }
            ModelSpec::PlaneGrid { lo, hi, .. } => {
                if a < lo[0] || a >= hi[0] || b < lo[1] || b >= hi[1] {
                    return None;
                }
                Some(((a - lo[0]) * (hi[1] - lo[1]) + (b - lo[1])) as usize)
            }
            _ => None,
        }
    }

    /// Index of the model point equal to an exact rational point, if any.
    pub fn index_of_exact(&self, x: &[Q]) -> Option<usize> {
        let (_, _, qq) = self.grid_coords(0)?;
        let scale = Q::from_integer(qq as i128);
        let a = x[0] * scale;
        let b = x[1] * scale;
        if !a.is_integer() || !b.is_integer() {
            return None;
        }
        self.grid_index(i64::try_from(a.to_integer()).ok()?, i64::try_from(b.to_integer()).ok()?)
    }

    /// Index table of `x -> g.x`. Exact models need elements preserving the
    /// grid; orbit clouds look images up within tolerance.
    pub fn transport(&self, g: &GroupElement) -> Result<PointMap> {
        let n = self.len();
        let image = match self.spec {
            ModelSpec::RationalTorus { q: qq, .. } | ModelSpec::PlaneGrid { q: qq, .. } => {
                if g.dim != 2 {
                    return Err(Error::Dimension("grid models are planar".into()));
                }
                if self.is_torus() != (g.kind == crate::group::ElementKind::TorusAutomorphism) {
                    return Err(Error::Kind(format!("{:?} does not act on this model", g.kind)));
                }
                let (m, s) = g.torus_grid_data(qq).ok_or_else(|| {
                    Error::NotExact(format!("element does not preserve the 1/{qq} grid"))
                })?;
                par::collect(Exec::Parallel, n, |i| {
                    let (a, b, _) = self.grid_coords(i).unwrap();
                    let a2 = m[0] * a + m[1] * b + s[0];
                    let b2 = m[2] * a + m[3] * b + s[1];
                    self.grid_index(a2, b2).map_or(NONE, |j| j as u32)
                })
            }
            ModelSpec::OrbitCloud { .. } => par::collect(Exec::Parallel, n, |i| {
                let y = g.apply_f64(&self.coords[i]);
                self.orbit_find(&[y[0], y[1], y[2]]).map_or(NONE, |j| j as u32)
            }),
            _ => {
                return Err(Error::NotExact(
                    "sample clouds are not closed under group elements".into(),
                ))
            }
        };
        Ok(PointMap { image })
    }

    /// CSV export: a schema comment line, a header, then `x,y,z,weight`.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.len() * 48);
        let spec = serde_json::to_string(&self.spec).unwrap_or_default();
        let _ = writeln!(s, "# schema={MODEL_CSV_SCHEMA} spec={spec}");
        s.push_str("x,y,z,weight\n");
        for p in &self.coords {
            let _ = writeln!(s, "{},{},{},{}", p[0], p[1], p[2], self.weight);
        }
        s
    }
}

/// Convenience wrapper: `kind` is one of `rational-torus`, `punctured-torus`,
/// `sphere-cloud`, `annulus-cloud`; `size` is `q` for tori and `N` for clouds.
pub fn build_model(kind: &str, size: usize, seed: u64) -> Result<SpaceModel> {
    if size == 0 {
        return Err(Error::InvalidModel("size must be at least 1".into()));
    }
    let spec = match kind {
        "rational-torus" => ModelSpec::RationalTorus { q: size as u64, punctured: false },
        "punctured-torus" => ModelSpec::RationalTorus { q: size as u64, punctured: true },
        "sphere-cloud" => ModelSpec::SphereCloud { n: size, seed, total_mass: None },
        "annulus-cloud" => ModelSpec::AnnulusCloud { n: size, seed, total_mass: None },
        "cube-cloud" => ModelSpec::CubeCloud { n: size, seed, lo: [-RHO; 3], hi: [RHO; 3] },
        other => return Err(Error::InvalidModel(format!("unknown model kind {other:?}"))),
    };
    SpaceModel::build(&spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::sl2z_generators;

    #[test]
    fn torus_three() {
        let m = build_model("rational-torus", 3, 0).unwrap();
        assert_eq!(m.len(), 9);
        assert_eq!(m.exact_weight, Some(q(1, 9)));
        assert!((m.weight * 9.0 - m.total_mass).abs() < 1e-12);
    }

    #[test]
    fn sphere_cloud_is_reproducible_and_centered() {
        let a = build_model("sphere-cloud", 1000, 7).unwrap();
        let b = build_model("sphere-cloud", 1000, 7).unwrap();
        assert_eq!(a.coords, b.coords);
        let mean: Vec<f64> = (0..3).map(|k| a.coords.iter().map(|p| p[k]).sum::<f64>() / 1000.0).collect();
        assert!(mean.iter().map(|x| x * x).sum::<f64>().sqrt() < 0.1);
    }

    #[test]
    fn annulus_points_in_range() {
        let m = build_model("annulus-cloud", 20_000, 3).unwrap();
        for p in &m.coords {
            let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            assert!((1.0 - 1e-12..=RHO + 1e-12).contains(&r));
        }
        assert!((m.weight * m.len() as f64 - m.total_mass).abs() < 1e-12);
    }

    #[test]
    fn torus_closed_under_sl2() {
        let m = build_model("rational-torus", 11, 0).unwrap();
        for g in sl2z_generators().elements() {
            let map = m.transport(g).unwrap();
            assert!(map.is_total());
            let mut seen = vec![false; m.len()];
            for &j in &map.image {
                assert!(!seen[j as usize]);
                seen[j as usize] = true;
            }
        }
        let p = build_model("punctured-torus", 11, 0).unwrap();
        assert_eq!(p.len(), 120);
        for g in sl2z_generators().elements() {
            assert!(p.transport(g).unwrap().is_total());
        }
    }

    #[test]
    fn invalid_sizes() {
        assert!(build_model("rational-torus", 0, 0).is_err());
        assert!(build_model("bogus", 3, 0).is_err());
        assert!(SpaceModel::build(&ModelSpec::PlaneGrid { q: 4, lo: [0, 0], hi: [0, 3] }).is_err());
    }

    #[test]
    fn orbit_cloud_is_closed_inside() {
        let m = SpaceModel::build(&ModelSpec::OrbitCloud { seeds: 2, seed: 1, depth: 3 }).unwrap();
        // 1 + 6 + 30 + 150 points per seed for a free action
        assert_eq!(m.len(), 2 * 187);
        let map = m.transport(&lps_generators().members[0].element).unwrap();
        assert!(map.image.iter().filter(|&&j| j != NONE).count() >= 2 * 37);
    }

    #[test]
    fn csv_has_schema_line() {
        let m = build_model("rational-torus", 2, 0).unwrap();
        let csv = m.to_csv();
        assert!(csv.starts_with("# schema=equidecomp.model-csv/v1"));
        assert_eq!(csv.lines().count(), 2 + 4);
    }
}
