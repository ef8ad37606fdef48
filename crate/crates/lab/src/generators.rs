//! Synthetic linear models with correlated uniform features.
//!
//! Each feature is a fixed linear combination of earlier features plus a
//! scaled uniform draw, and the target is `y = wᵀx + ε` with Gaussian
//! noise. The same loadings give the population mean and covariance in
//! closed form.

use lincfa::{Dataset, Matrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::rng::{substream, Purpose};
use crate::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Bivariate,
    Trivariate,
    Ddim,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub scenario: Scenario,
    pub n: usize,
    /// Noise standard deviation.
    pub sigma: f64,
    /// Empty for `Ddim` means "draw U[0,1] weights from the structure stream".
    pub weights: Vec<f64>,
    /// Share of `x1` in `x2` for the bivariate model.
    pub mix: f64,
    pub dim: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn bivariate(n: usize, sigma: f64, weights: [f64; 2], seed: u64) -> Self {
        Self {
            scenario: Scenario::Bivariate,
            n,
            sigma,
            weights: weights.to_vec(),
            mix: 0.7,
            dim: 2,
            seed,
        }
    }

    pub fn trivariate(n: usize, seed: u64) -> Self {
        Self {
            scenario: Scenario::Trivariate,
            n,
            sigma: 0.5,
            weights: vec![0.4, 0.6, 0.2],
            mix: 0.7,
            dim: 3,
            seed,
        }
    }

    pub fn ddim(n: usize, dim: usize, sigma: f64, seed: u64) -> Self {
        Self {
            scenario: Scenario::Ddim,
            n,
            sigma,
            weights: Vec::new(),
            mix: 0.7,
            dim,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::Spec(m));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return bad(format!("sigma must be finite and nonnegative, got {}", self.sigma));
        }
        if !(0.0..=1.0).contains(&self.mix) {
            return bad(format!("mix must lie in [0, 1], got {}", self.mix));
        }
        if self.weights.iter().any(|w| !w.is_finite()) {
            return bad("weights must be finite".into());
        }
        let need = match self.scenario {
            Scenario::Bivariate => Some(2),
            Scenario::Trivariate => Some(3),
            Scenario::Ddim => {
                if self.dim < 2 {
                    return bad(format!("dim must be at least 2, got {}", self.dim));
                }
                (!self.weights.is_empty()).then_some(self.dim)
            }
        };
        if let Some(k) = need {
            if self.weights.len() != k {
                return bad(format!("expected {k} weights, got {}", self.weights.len()));
            }
        }
        Ok(())
    }
}

/// `x_i = Σ coef·x_parent + scale·u_i`, parents strictly earlier.
#[derive(Debug, Clone, PartialEq)]
pub struct Structure {
    pub terms: Vec<Vec<(usize, f64)>>,
    pub scale: Vec<f64>,
}

impl Structure {
    pub fn dim(&self) -> usize {
        self.scale.len()
    }

    /// Row `i` expresses feature `i` in the independent uniforms.
    pub fn loadings(&self) -> Matrix<f64> {
        let d = self.dim();
        let mut rows = vec![vec![0.0; d]; d];
        for i in 0..d {
            let mut row = vec![0.0; d];
            row[i] = self.scale[i];
            for &(p, c) in &self.terms[i] {
                for k in 0..d {
                    row[k] += c * rows[p][k];
                }
            }
            rows[i] = row;
        }
        Matrix::from_rows(d, d, rows.concat())
    }
}

/// The data-generating process plus its population moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    pub weights: Vec<f64>,
    pub sigma2: f64,
    pub structure: Structure,
    pub pop_mean: Vec<f64>,
    pub pop_cov: Matrix<f64>,
}

impl Truth {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn pop_sd(&self, i: usize) -> f64 {
        self.pop_cov[(i, i)].sqrt()
    }

    pub fn pop_corr(&self, i: usize, j: usize) -> f64 {
        self.pop_cov[(i, j)] / (self.pop_sd(i) * self.pop_sd(j))
    }

    /// Weights expressed per population standard deviation of each feature.
    pub fn standardized_weights(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.weights[i] * self.pop_sd(i)).collect()
    }

    pub fn signal(&self, x: &Dataset<f64>) -> Vec<f64> {
        (0..x.n())
            .map(|r| (0..self.dim()).map(|i| self.weights[i] * x.get(r, i)).sum())
            .collect()
    }

    /// Draw `n` rows: features row by row, then the noise.
    pub fn draw(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<Sample> {
        let d = self.dim();
        let mut cols = vec![vec![0.0; n]; d];
        let mut row = vec![0.0; d];
        for r in 0..n {
            for i in 0..d {
                let u: f64 = rng.random();
                let mut v = self.structure.scale[i] * u;
                for &(p, c) in &self.structure.terms[i] {
                    v += c * row[p];
                }
                row[i] = v;
                cols[i][r] = v;
            }
        }
        let x = Dataset::from_unnamed(cols)?;
        let f = self.signal(&x);
        let sigma = self.sigma2.sqrt();
        let y = f.iter().map(|&fi| fi + sigma * noise(rng)).collect();
        Ok(Sample { x, f, y })
    }

    pub fn noise(&self, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let sigma = self.sigma2.sqrt();
        (0..k).map(|_| sigma * noise(rng)).collect()
    }
}

fn noise(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Dataset<f64>,
    /// Noise-free signal `wᵀx`.
    pub f: Vec<f64>,
    pub y: Vec<f64>,
}

/// Build the process for `spec`. `structure_rep` keys the random parent map
/// and weights of the D-dimensional model; other scenarios are fixed.
pub fn truth_for(spec: &GeneratorSpec, structure_rep: u64) -> Result<Truth> {
    spec.validate()?;
    let (structure, weights) = match spec.scenario {
        Scenario::Bivariate => (
            Structure {
                terms: vec![vec![], vec![(0, spec.mix)]],
                scale: vec![1.0, 1.0 - spec.mix],
            },
            spec.weights.clone(),
        ),
        Scenario::Trivariate => (
            Structure {
                terms: vec![vec![], vec![(0, 0.65)], vec![(0, 0.5), (1, 0.5)]],
                scale: vec![1.0, 0.35, 0.5],
            },
            spec.weights.clone(),
        ),
        Scenario::Ddim => {
            let mut rng = substream(spec.seed, 0, structure_rep, Purpose::Structure);
            let mut terms = vec![vec![]];
            let mut scale = vec![1.0];
            for i in 1..spec.dim {
                let p = rng.random_range(0..i);
                terms.push(vec![(p, spec.mix)]);
                scale.push(1.0 - spec.mix);
            }
            let weights = if spec.weights.is_empty() {
                (0..spec.dim).map(|_| rng.random::<f64>()).collect()
            } else {
                spec.weights.clone()
            };
            (Structure { terms, scale }, weights)
        }
    };
    let l = structure.loadings();
    let d = structure.dim();
    let pop_mean = (0..d).map(|i| 0.5 * l.row(i).iter().sum::<f64>()).collect();
    let pop_cov = l.matmul(&l.transpose()).scale(1.0 / 12.0);
    Ok(Truth {
        weights,
        sigma2: spec.sigma * spec.sigma,
        structure,
        pop_mean,
        pop_cov,
    })
}

fn generate(spec: &GeneratorSpec) -> Result<(Dataset<f64>, Vec<f64>, Truth)> {
    let truth = truth_for(spec, 0)?;
    let s = truth.draw(spec.n, &mut substream(spec.seed, 0, 0, Purpose::Train))?;
    Ok((s.x, s.y, truth))
}

/// `x1 ~ U[0,1]`, `x2 = mix·x1 + (1-mix)·u`.
pub fn gen_bivariate(spec: &GeneratorSpec) -> Result<(Dataset<f64>, Vec<f64>, Truth)> {
    expect(spec, Scenario::Bivariate)?;
    generate(spec)
}

/// `x2 = 0.65·x1 + 0.35·u`, `x3 = 0.5·x1 + 0.5·x2 + 0.5·u`.
pub fn gen_trivariate(spec: &GeneratorSpec) -> Result<(Dataset<f64>, Vec<f64>, Truth)> {
    expect(spec, Scenario::Trivariate)?;
    generate(spec)
}

/// Each feature after the first copies a random earlier parent:
/// `x_i = mix·x_parent + (1-mix)·u`.
pub fn gen_ddim(spec: &GeneratorSpec) -> Result<(Dataset<f64>, Vec<f64>, Truth)> {
    expect(spec, Scenario::Ddim)?;
    generate(spec)
}

fn expect(spec: &GeneratorSpec, s: Scenario) -> Result<()> {
    if spec.scenario != s {
        return Err(LabError::Spec(format!("expected a {s:?} spec, got {:?}", spec.scenario)));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bivariate_moments() {
        let t = truth_for(&GeneratorSpec::bivariate(10, 1.0, [0.2, 0.8], 1), 0).unwrap();
        assert!((t.pop_corr(0, 1) - 0.7 / (0.49f64 + 0.09).sqrt()).abs() < 1e-12);
        assert!((t.pop_mean[1] - 0.5).abs() < 1e-12);
        assert!((t.pop_cov[(0, 0)] - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn trivariate_moments() {
        let t = truth_for(&GeneratorSpec::trivariate(10, 1), 0).unwrap();
        assert!((t.pop_corr(0, 1) - 0.8805).abs() < 1e-4);
        assert!((t.pop_corr(0, 2) - 0.8415).abs() < 1e-4);
        assert!((t.pop_corr(1, 2) - 0.8255).abs() < 1e-4);
        assert!((t.pop_cov[(2, 2)] - 0.96125 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn ddim_of_two_is_the_bivariate_structure() {
        let t = truth_for(&GeneratorSpec::ddim(10, 2, 1.0, 3), 0).unwrap();
        assert_eq!(t.structure.terms, vec![vec![], vec![(0, 0.7)]]);
        assert!((t.structure.scale[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = GeneratorSpec::bivariate(10, 1.0, [0.2, 0.8], 1);
        s.sigma = -1.0;
        assert!(gen_bivariate(&s).is_err());
        let s = GeneratorSpec::trivariate(10, 1);
        assert!(gen_bivariate(&s).is_err());
    }
}
