use std::sync::Arc;

use nalgebra::DMatrix;

use crate::group::GeneratorSet;
use crate::par::{self, Exec};
use crate::space::SpaceModel;
use crate::{Error, Result};

/// `(T_Q f)(x) = (1/|Q|) Σ_{g ∈ Q} f(g.x)` on a transport model.
#[derive(Clone, Debug)]
pub struct AveragingOperator {
    pub model: Arc<SpaceModel>,
    pub q: GeneratorSet,
    maps: Vec<Vec<u32>>,
}

impl AveragingOperator {
    pub fn new(model: &Arc<SpaceModel>, q: &GeneratorSet) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::InvalidArgument("empty generator multiset".into()));
        }
        if !model.supports_transport() {
            return Err(Error::NotExact("averaging needs an exact or orbit-closed model".into()));
        }
        let maps = q
            .elements()
            .map(|g| {
                let m = model.transport(g)?;
                if !m.is_total() {
                    return Err(Error::NotExact("model is not closed under the generators".into()));
                }
                Ok(m.image)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AveragingOperator { model: model.clone(), q: q.clone(), maps })
    }

    pub fn dim(&self) -> usize {
        self.model.len()
    }

    pub fn apply_with(&self, exec: Exec, f: &[f64]) -> Vec<f64> {
        let k = self.maps.len() as f64;
        par::collect(exec, f.len(), |x| self.maps.iter().map(|m| f[m[x] as usize]).sum::<f64>() / k)
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.apply_with(Exec::Parallel, f)
    }

    /// Weighted inner product of the model measure.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        let w = self.model.weight;
        par::sum(Exec::Parallel, f.len(), |i| f[i] * g[i]) * w
    }

    pub fn mean(&self, f: &[f64]) -> f64 {
        par::sum(Exec::Parallel, f.len(), |i| f[i]) / f.len() as f64
    }

    /// Dense matrix of `T` in the point basis.
    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let k = self.maps.len() as f64;
        let mut m = DMatrix::zeros(n, n);
        for map in &self.maps {
            for x in 0..n {
                m[(x, map[x] as usize)] += 1.0 / k;
            }
        }
        m
    }

    pub fn maps(&self) -> &[Vec<u32>] {
        &self.maps
    }
}
