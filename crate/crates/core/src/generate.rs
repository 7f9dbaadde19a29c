//! Synthetic samples from ten parametric data models.
//!
//! All draws come from a single ChaCha8 stream seeded with the caller's
//! seed, so the same `(model, n, noise, seed)` always yields bit-identical
//! output on every platform.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::DataMatrix;
use crate::error::{DimError, Result};
use crate::linalg::orthonormalize_columns;

/// Seed for the fixed basis of the low-rank model.
const LOWRANK_BASIS_SEED: u64 = 0x6c6f_7772_616e_6b00;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    SwissRoll,
    SCurve,
    Helix,
    TwinPeaks,
    Mobius,
    Sphere,
    Saddle,
    Ribbon,
    /// Mixture of three unit-variance Gaussians in `dim` dimensions.
    GaussMix { dim: usize },
    /// Standard normal latent `z ∈ ℝ^intrinsic` mapped by a fixed matrix with
    /// orthonormal rows into `ℝ^ambient`.
    LowRank { ambient: usize, intrinsic: usize },
}

impl Model {
    pub const IDS: [&'static str; 10] = [
        "swissroll", "scurve", "helix", "twinpeaks", "mobius", "sphere", "saddle", "ribbon", "gaussmix", "lowrank",
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Model::SwissRoll => "swissroll",
            Model::SCurve => "scurve",
            Model::Helix => "helix",
            Model::TwinPeaks => "twinpeaks",
            Model::Mobius => "mobius",
            Model::Sphere => "sphere",
            Model::Saddle => "saddle",
            Model::Ribbon => "ribbon",
            Model::GaussMix { .. } => "gaussmix",
            Model::LowRank { .. } => "lowrank",
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match *self {
            Model::GaussMix { dim } => dim,
            Model::LowRank { ambient, .. } => ambient,
            _ => 3,
        }
    }

    pub fn intrinsic_dim(&self) -> usize {
        match *self {
            Model::Helix => 1,
            Model::GaussMix { dim } => dim,
            Model::LowRank { intrinsic, .. } => intrinsic,
            _ => 2,
        }
    }

    pub fn min_samples(&self) -> usize {
        2
    }

    fn latent_dim(&self) -> usize {
        match *self {
            Model::Helix | Model::GaussMix { .. } => 1,
            Model::LowRank { intrinsic, .. } => intrinsic,
            _ => 2,
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Model {
    type Err = DimError;

    /// Parses a model id with its default parameters.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "swissroll" => Model::SwissRoll,
            "scurve" => Model::SCurve,
            "helix" => Model::Helix,
            "twinpeaks" => Model::TwinPeaks,
            "mobius" => Model::Mobius,
            "sphere" => Model::Sphere,
            "saddle" => Model::Saddle,
            "ribbon" => Model::Ribbon,
            "gaussmix" => Model::GaussMix { dim: 3 },
            "lowrank" => Model::LowRank { ambient: 72, intrinsic: 12 },
            other => return Err(DimError::UnknownModel(other.to_string())),
        })
    }
}

/// Latent parameters of each sample and the model's intrinsic dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// One row per sample: unrolled coordinates, angles, the latent normal
    /// vector, or (for the mixture) the component index.
    pub latent: DMatrix<f64>,
    pub intrinsic_dim: usize,
}

/// The fixed `intrinsic x ambient` matrix with orthonormal rows used by the
/// low-rank model.
pub fn lowrank_basis(ambient: usize, intrinsic: usize) -> DMatrix<f64> {
    let seed = LOWRANK_BASIS_SEED ^ ((ambient as u64) << 32) ^ intrinsic as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(ambient, intrinsic, |_, _| rng.sample::<f64, _>(StandardNormal));
    orthonormalize_columns(&g).transpose()
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn gaussmix_center(k: usize, dim: usize) -> Vec<f64> {
    let mut c = vec![0.0; dim];
    match k {
        0 => {}
        1 => c[0] = 5.0,
        _ if dim >= 2 => c[1] = 5.0,
        _ => c[0] = 10.0,
    }
    c
}

/// Draws `n` samples from `model` with isotropic Gaussian noise of standard
/// deviation `noise` added in the ambient space.
pub fn generate(model: Model, n: usize, noise: f64, seed: u64) -> Result<(DataMatrix, GroundTruth)> {
    if n < model.min_samples() {
        return Err(DimError::BadSampleCount { model: model.id().into(), n, min: model.min_samples() });
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(DimError::InvalidParameter(format!("noise must be a nonnegative real, got {noise}")));
    }
    match model {
        Model::GaussMix { dim } | Model::LowRank { ambient: dim, .. } if dim == 0 => {
            return Err(DimError::InvalidParameter("ambient dimension must be positive".into()));
        }
        Model::LowRank { ambient, intrinsic } if intrinsic == 0 || intrinsic > ambient => {
            return Err(DimError::InvalidParameter(format!(
                "low-rank model needs 1 <= intrinsic <= ambient, got {intrinsic} and {ambient}"
            )));
        }
        _ => {}
    }
    let p = model.ambient_dim();
    let basis = match model {
        Model::LowRank { ambient, intrinsic } => Some(lowrank_basis(ambient, intrinsic)),
        _ => None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = DMatrix::zeros(n, p);
    let mut latent = DMatrix::zeros(n, model.latent_dim());
    let mut point = vec![0.0; p];
    for i in 0..n {
        let lat: Vec<f64> = match model {
            Model::SwissRoll => {
                let t = uniform(&mut rng, 1.5 * PI, 4.5 * PI);
                let h = uniform(&mut rng, 0.0, 21.0);
                point.copy_from_slice(&[t * t.cos(), h, t * t.sin()]);
                vec![t, h]
            }
            Model::SCurve => {
                let t = uniform(&mut rng, -1.5 * PI, 1.5 * PI);
                let h = uniform(&mut rng, 0.0, 2.0);
                point.copy_from_slice(&[t.sin(), h, t.signum() * (t.cos() - 1.0)]);
                vec![t, h]
            }
            Model::Helix => {
                let t = uniform(&mut rng, 0.0, 6.0 * PI);
                point.copy_from_slice(&[t.cos(), t.sin(), 0.2 * t]);
                vec![t]
            }
            Model::TwinPeaks => {
                let u = uniform(&mut rng, -1.0, 1.0);
                let v = uniform(&mut rng, -1.0, 1.0);
                point.copy_from_slice(&[u, v, (PI * u).sin() * (3.0 * v).tanh()]);
                vec![u, v]
            }
            Model::Mobius => {
                let theta = uniform(&mut rng, 0.0, 2.0 * PI);
                let w = uniform(&mut rng, -0.4, 0.4);
                let r = 1.0 + w * (0.5 * theta).cos();
                point.copy_from_slice(&[r * theta.cos(), r * theta.sin(), w * (0.5 * theta).sin()]);
                vec![theta, w]
            }
            Model::Sphere => {
                let g = loop {
                    let g: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
                    let norm = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
                    if norm > 0.0 {
                        break g.map(|v| v / norm);
                    }
                };
                point.copy_from_slice(&g);
                vec![g[2].clamp(-1.0, 1.0).acos(), g[1].atan2(g[0])]
            }
            Model::Saddle => {
                let u = uniform(&mut rng, -1.0, 1.0);
                let v = uniform(&mut rng, -1.0, 1.0);
                point.copy_from_slice(&[u, v, u * u - v * v]);
                vec![u, v]
            }
            Model::Ribbon => {
                let t = uniform(&mut rng, 0.0, PI);
                let h = uniform(&mut rng, 0.0, 2.0);
                point.copy_from_slice(&[t.cos(), t.sin(), h]);
                vec![t, h]
            }
            Model::GaussMix { dim } => {
                let k = ((rng.random::<f64>() * 3.0) as usize).min(2);
                let center = gaussmix_center(k, dim);
                for (x, c) in point.iter_mut().zip(&center) {
                    *x = c + rng.sample::<f64, _>(StandardNormal);
                }
                vec![k as f64]
            }
            Model::LowRank { intrinsic, .. } => {
                let z: Vec<f64> = (0..intrinsic).map(|_| rng.sample(StandardNormal)).collect();
                let a = basis.as_ref().expect("basis built for low-rank model");
                for (j, x) in point.iter_mut().enumerate() {
                    *x = z.iter().enumerate().map(|(r, zr)| zr * a[(r, j)]).sum();
                }
                z
            }
        };
        if noise > 0.0 {
            for x in point.iter_mut() {
                *x += noise * rng.sample::<f64, _>(StandardNormal);
            }
        }
        for (j, x) in point.iter().enumerate() {
            data[(i, j)] = *x;
        }
        for (j, v) in lat.iter().enumerate() {
            latent[(i, j)] = *v;
        }
    }
    let truth = GroundTruth { latent, intrinsic_dim: model.intrinsic_dim() };
    Ok((DataMatrix::new(data)?, truth))
}
