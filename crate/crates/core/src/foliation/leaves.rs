use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::numeric::{binomial_radius, RHO};
use crate::par::{self, Exec};
use crate::space::{SampledSet, SpaceModel};
use crate::{Error, Result};

/// Fewest samples a bin may hold before its estimate is considered unresolved.
pub const MIN_BIN_SAMPLES: usize = 64;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    /// Length of the bin inside `Z`.
    pub nu: f64,
    /// `∫ 4πz² dz` over the bin inside `Z`.
    pub shell_volume: f64,
}

/// Spherical shells `Y_z = {|y| = z}` for `z ∈ Z ⊂ [1, ρ]`, with leaf measure
/// the surface area (`μ_z(Y) = 4πz²`) and `ν` the length on `Z`.
#[derive(Clone, Debug, Serialize)]
pub struct Foliation {
    pub z_min: f64,
    pub z_max: f64,
    /// `Z` as disjoint sorted intervals.
    pub support: Vec<(f64, f64)>,
    pub bins: Vec<Bin>,
    /// `M` with `M >= μ_z(Y) >= 1/M` and `M >= ν(Z) >= 1/M`.
    pub m_bound: f64,
}

fn cube_primitive(z: f64) -> f64 {
    4.0 * PI * z * z * z / 3.0
}

impl Foliation {
    pub fn annulus(bins: usize) -> Result<Foliation> {
        Foliation::on_support(vec![(1.0, RHO)], bins)
    }

    /// Foliation over `Z = ∪ support`, which may be a fat Cantor set.
    pub fn on_support(support: Vec<(f64, f64)>, bins: usize) -> Result<Foliation> {
        if bins == 0 {
            return Err(Error::InvalidArgument("need at least one bin".into()));
        }
        if support.iter().any(|&(a, b)| !(1.0 <= a && a < b && b <= RHO + 1e-15)) {
            return Err(Error::InvalidArgument("leaf support must lie in [1, ρ]".into()));
        }
        let width = (RHO - 1.0) / bins as f64;
        let bins = (0..bins)
            .map(|i| {
                let lo = 1.0 + i as f64 * width;
                let hi = if i + 1 == bins { RHO } else { lo + width };
                let mut nu = 0.0;
                let mut shell_volume = 0.0;
                for &(a, b) in &support {
                    let (a, b) = (a.max(lo), b.min(hi));
                    if b > a {
                        nu += b - a;
                        shell_volume += cube_primitive(b) - cube_primitive(a);
                    }
                }
                Bin { lo, hi, nu, shell_volume }
            })
            .collect();
        Ok(Foliation { z_min: 1.0, z_max: RHO, support, bins, m_bound: 4.0 * PI * RHO * RHO })
    }

    pub fn leaf_area(z: f64) -> f64 {
        4.0 * PI * z * z
    }

    pub fn nu_total(&self) -> f64 {
        self.bins.iter().map(|b| b.nu).sum()
    }

    /// Total `μ(Y) = ∫_Z 4πz² dz`.
    pub fn total_mass(&self) -> f64 {
        self.bins.iter().map(|b| b.shell_volume).sum()
    }

    pub fn in_support(&self, z: f64) -> bool {
        self.support.iter().any(|&(a, b)| a <= z && z <= b)
    }

    /// Bin of a radius, or `None` off `Z`.
    pub fn bin_of(&self, z: f64) -> Option<usize> {
        if !self.in_support(z) {
            return None;
        }
        let b = self.bins.len();
        let i = ((z - 1.0) / (RHO - 1.0) * b as f64).floor();
        Some((i.max(0.0) as usize).min(b - 1))
    }

    /// Per-bin sample counts: `(in bin, in bin and in set)`.
    pub fn bin_counts(&self, model: &SpaceModel, set: Option<&SampledSet>) -> Vec<(u64, u64)> {
        let b = self.bins.len();
        let parts = par::map_chunks(Exec::Parallel, model.len(), par::CHUNK, |r| {
            let mut c = vec![(0u64, 0u64); b];
            for i in r {
                let p = model.coords[i];
                if let Some(k) = self.bin_of((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()) {
                    c[k].0 += 1;
                    if set.is_none_or(|s| s.mask[i]) {
                        c[k].1 += 1;
                    }
                }
            }
            c
        });
        let mut total = vec![(0u64, 0u64); b];
        for c in parts {
            for (t, x) in total.iter_mut().zip(c) {
                t.0 += x.0;
                t.1 += x.1;
            }
        }
        total
    }

    /// Estimated `μ_z(U)` averaged over each bin, from sample mass per unit `z`.
    pub fn leaf_measures(&self, model: &Arc<SpaceModel>, set: &SampledSet) -> Result<Vec<LeafEstimate>> {
        require_cloud(model)?;
        let n = model.len();
        Ok(self
            .bin_counts(model, Some(set))
            .into_iter()
            .zip(&self.bins)
            .map(|((samples, inside), bin)| {
                let p = inside as f64 / n as f64;
                let nu = bin.nu.max(f64::MIN_POSITIVE);
                LeafEstimate {
                    lo: bin.lo,
                    hi: bin.hi,
                    nu: bin.nu,
                    samples,
                    in_set: inside,
                    mu_z: inside as f64 * model.weight / nu,
                    radius: model.total_mass * binomial_radius(p, n) / nu,
                }
            })
            .collect())
    }

    /// Compares `Σ_bins ∫_bin 4πz² dz · (fraction of the bin in U)` with the
    /// direct sample mass of `U ∩ Y_Z`.
    pub fn consistency(&self, model: &Arc<SpaceModel>, set: &SampledSet) -> Result<ConsistencyReport> {
        require_cloud(model)?;
        let n = model.len() as f64;
        let counts = self.bin_counts(model, Some(set));
        let mut leaf_integral = 0.0;
        let mut var_leaf = 0.0;
        let mut inside_total = 0u64;
        for (&(samples, inside), bin) in counts.iter().zip(&self.bins) {
            if bin.shell_volume == 0.0 {
                continue;
            }
            if (samples as usize) < MIN_BIN_SAMPLES {
                return Err(Error::Resolution(format!(
                    "bin [{:.4}, {:.4}] holds {samples} samples",
                    bin.lo, bin.hi
                )));
            }
            let f = inside as f64 / samples as f64;
            leaf_integral += bin.shell_volume * f;
            var_leaf += bin.shell_volume.powi(2) * f * (1.0 - f) / samples as f64;
            inside_total += inside;
        }
        let p = inside_total as f64 / n;
        let direct = inside_total as f64 * model.weight;
        let var_direct = model.total_mass.powi(2) * p * (1.0 - p) / n;
        let standard_error = (var_leaf + var_direct).sqrt();
        let deviation = leaf_integral - direct;
        Ok(ConsistencyReport {
            samples: model.len(),
            leaf_integral,
            direct,
            analytic_total: self.total_mass(),
            standard_error,
            deviation,
            pass: deviation.abs() <= 3.0 * standard_error + 1e-12 * self.total_mass(),
        })
    }
}

fn require_cloud(model: &SpaceModel) -> Result<()> {
    if model.dim != 3 {
        return Err(Error::Dimension(format!("foliation needs a 3-dimensional model, got {}", model.dim)));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct LeafEstimate {
    pub lo: f64,
    pub hi: f64,
    pub nu: f64,
    pub samples: u64,
    pub in_set: u64,
    pub mu_z: f64,
    pub radius: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyReport {
    pub samples: usize,
    pub leaf_integral: f64,
    pub direct: f64,
    pub analytic_total: f64,
    pub standard_error: f64,
    pub deviation: f64,
    pub pass: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins_partition_the_annulus_volume() {
        let f = Foliation::annulus(32).unwrap();
        let exact = 4.0 * PI * (RHO.powi(3) - 1.0) / 3.0;
        assert!((f.total_mass() - exact).abs() < 1e-12);
        assert!((f.nu_total() - (RHO - 1.0)).abs() < 1e-12);
        assert!(f.m_bound >= Foliation::leaf_area(RHO) && f.m_bound * f.nu_total() >= 1.0);
    }

    #[test]
    fn cantor_support_drops_gaps() {
        let f = Foliation::on_support(vec![(1.0, 1.2), (1.5, RHO)], 8).unwrap();
        assert!(f.bin_of(1.3).is_none());
        assert!((f.nu_total() - (0.2 + RHO - 1.5)).abs() < 1e-12);
    }
}
