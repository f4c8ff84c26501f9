//! The multilinear extension `F(x) = E[f(R(x))]` and its gradient.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{FmsmError, Result};
use crate::objective::SubmodularOracle;
use crate::seed::rng_for;

/// Ground sets up to this size use exact evaluation inside the optimisers.
pub const AUTO_EXACT_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorMode {
    Exact,
    Sampled { samples: usize, seed: u64 },
}

/// `⌈64 · n · ln(n + 1)⌉`.
pub fn default_samples(n: usize) -> usize {
    (64.0 * n as f64 * ((n + 1) as f64).ln()).ceil().max(1.0) as usize
}

#[derive(Debug, Clone)]
pub struct MultilinearEstimator {
    oracle: SubmodularOracle,
    mode: EstimatorMode,
    table: Option<Arc<Vec<f64>>>,
}

impl MultilinearEstimator {
    /// Exact mode; tabulates `f` once.
    pub fn exact(oracle: SubmodularOracle) -> Result<Self> {
        let table = Arc::new(oracle.value_table()?);
        Ok(MultilinearEstimator {
            oracle,
            mode: EstimatorMode::Exact,
            table: Some(table),
        })
    }

    pub fn sampled(oracle: SubmodularOracle, samples: usize, seed: u64) -> Result<Self> {
        if samples == 0 {
            return Err(FmsmError::Config("sample count must be positive".into()));
        }
        Ok(MultilinearEstimator {
            oracle,
            mode: EstimatorMode::Sampled { samples, seed },
            table: None,
        })
    }

    /// Exact for `n ≤ AUTO_EXACT_LIMIT`, otherwise sampled with `samples`
    /// (or the default count).
    pub fn auto(oracle: SubmodularOracle, samples: Option<usize>, seed: u64) -> Result<Self> {
        let n = oracle.ground_size();
        if n <= AUTO_EXACT_LIMIT {
            Self::exact(oracle)
        } else {
            Self::sampled(oracle, samples.unwrap_or_else(|| default_samples(n)), seed)
        }
    }

    pub fn mode(&self) -> EstimatorMode {
        self.mode
    }

    pub fn oracle(&self) -> &SubmodularOracle {
        &self.oracle
    }

    fn check(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.oracle.ground_size();
        if x.len() != n {
            return Err(FmsmError::Argument(format!(
                "point has {} coordinates, expected {n}",
                x.len()
            )));
        }
        if let Some((i, v)) = x
            .iter()
            .enumerate()
            .find(|(_, v)| !(-1e-12..=1.0 + 1e-12).contains(*v))
        {
            return Err(FmsmError::Argument(format!(
                "coordinate {i} = {v} is outside [0, 1]"
            )));
        }
        Ok(x.iter().map(|v| v.clamp(0.0, 1.0)).collect())
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.eval_stream(x, 0)
    }

    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.grad_stream(x, 0)
    }

    /// Evaluation using the random stream `stream` (ignored in exact mode).
    pub fn eval_stream(&self, x: &[f64], stream: u64) -> Result<f64> {
        let x = self.check(x)?;
        match (self.mode, &self.table) {
            (EstimatorMode::Exact, Some(t)) => Ok(exact_eval(t, &x)),
            (EstimatorMode::Sampled { samples, .. }, _) => {
                let v = self.sample_values(&x, stream)?;
                Ok(v.iter().sum::<f64>() / samples as f64)
            }
            _ => unreachable!("exact mode always carries a table"),
        }
    }

    /// Gradient using the random stream `stream` (ignored in exact mode).
    /// Sampled gradients reuse each draw `R` for both `f(R + i)` and
    /// `f(R − i)`.
    pub fn grad_stream(&self, x: &[f64], stream: u64) -> Result<Vec<f64>> {
        let x = self.check(x)?;
        let n = x.len();
        match (self.mode, &self.table) {
            (EstimatorMode::Exact, Some(t)) => Ok((0..n)
                .into_par_iter()
                .map(|i| exact_partial(t, &x, i))
                .collect()),
            (EstimatorMode::Sampled { samples, seed }, _) => {
                let per_sample: Vec<Vec<f64>> = (0..samples as u64)
                    .into_par_iter()
                    .map(|s| {
                        let mut set = draw(&x, seed, stream, s);
                        let base = self.oracle.value(&set);
                        let mut g = vec![0.0; n];
                        for (i, gi) in g.iter_mut().enumerate() {
                            match set.binary_search(&i) {
                                Ok(pos) => {
                                    set.remove(pos);
                                    *gi = base - self.oracle.value(&set);
                                    set.insert(pos, i);
                                }
                                Err(pos) => {
                                    set.insert(pos, i);
                                    *gi = self.oracle.value(&set) - base;
                                    set.remove(pos);
                                }
                            }
                        }
                        g
                    })
                    .collect();
                let mut g = vec![0.0; n];
                for row in &per_sample {
                    for (a, b) in g.iter_mut().zip(row) {
                        *a += b;
                    }
                }
                g.iter_mut().for_each(|v| *v /= samples as f64);
                Ok(g)
            }
            _ => unreachable!("exact mode always carries a table"),
        }
    }

    /// The individual sample values `f(R_s)` behind a sampled evaluation, in
    /// sample order.
    pub fn sample_values(&self, x: &[f64], stream: u64) -> Result<Vec<f64>> {
        let EstimatorMode::Sampled { samples, seed } = self.mode else {
            return Err(FmsmError::Config("sample values need sampled mode".into()));
        };
        let x = self.check(x)?;
        Ok((0..samples as u64)
            .into_par_iter()
            .map(|s| self.oracle.value(&draw(&x, seed, stream, s)))
            .collect())
    }
}

fn draw(x: &[f64], seed: u64, stream: u64, sample: u64) -> Vec<usize> {
    let mut rng = rng_for(seed, &[stream, sample]);
    (0..x.len())
        .filter(|&i| rng.random::<f64>() < x[i])
        .collect()
}

/// Product weights `Π_{i∈S} x_i Π_{i∉S} (1 − x_i)` for every mask.
fn product_weights(x: &[f64]) -> Vec<f64> {
    let mut w = Vec::with_capacity(1 << x.len());
    w.push(1.0);
    for &xi in x {
        let len = w.len();
        for m in 0..len {
            let v = w[m];
            w.push(v * xi);
            w[m] = v * (1.0 - xi);
        }
    }
    w
}

fn exact_eval(table: &[f64], x: &[f64]) -> f64 {
    product_weights(x)
        .iter()
        .zip(table)
        .map(|(w, f)| w * f)
        .sum()
}

fn exact_partial(table: &[f64], x: &[f64], i: usize) -> f64 {
    let mut xi0 = x.to_vec();
    xi0[i] = 0.0;
    let bit = 1usize << i;
    product_weights(&xi0)
        .iter()
        .enumerate()
        .filter(|(m, _)| m & bit == 0)
        .map(|(m, w)| w * (table[m | bit] - table[m]))
        .sum()
}
