// SPDX-License-Identifier: Apache-2.0

//! Initial-data presets and microscopic forcing terms.

use super::Setup;
use crate::error::{MacrolabError, Result};
use crate::kinetics::burnett;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Initial-data family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Smooth random combination of Burnett functions; `Pf = 0`.
    RandomMicroscopic,
    /// Smooth random `a`, `b`, `c` plus a random microscopic part.
    RandomFull,
    /// Gaussian bump in `a`, `b`, `c` at a random interior point.
    MomentBump,
}

impl Preset {
    pub fn parse(s: &str) -> Result<Preset> {
        match s {
            "random_microscopic" => Ok(Preset::RandomMicroscopic),
            "random_full" => Ok(Preset::RandomFull),
            "moment_bump" => Ok(Preset::MomentBump),
            _ => Err(MacrolabError::Config(format!("unknown preset `{s}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::RandomMicroscopic => "random_microscopic",
            Preset::RandomFull => "random_full",
            Preset::MomentBump => "moment_bump",
        }
    }
}

/// Forcing family; every member has a vanishing macroscopic part.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Forcing {
    Zero,
    /// Independent random Burnett coefficients per cell and step.
    MicroscopicNoise { amplitude: f64, seed: u64 },
    /// Fixed smooth microscopic profile times `sin(2πt/period)`.
    PeriodicMicroscopic { amplitude: f64, period: f64, seed: u64 },
}

impl Forcing {
    pub fn parse(s: &str, amplitude: f64, seed: u64) -> Result<Forcing> {
        match s {
            "zero" => Ok(Forcing::Zero),
            "microscopic_noise" => Ok(Forcing::MicroscopicNoise { amplitude, seed }),
            "periodic_microscopic" => Ok(Forcing::PeriodicMicroscopic { amplitude, period: 0.25, seed }),
            _ => Err(MacrolabError::Config(format!("unknown forcing `{s}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Forcing::Zero => "zero",
            Forcing::MicroscopicNoise { .. } => "microscopic_noise",
            Forcing::PeriodicMicroscopic { .. } => "periodic_microscopic",
        }
    }

    /// `g` at step `step` and time `t`, or `None` for zero forcing.
    pub fn eval(&self, setup: &Setup, step: usize, t: f64) -> Option<Vec<f64>> {
        let basis = micro_basis(setup);
        let nn = setup.grid.len();
        match *self {
            Forcing::Zero => None,
            Forcing::MicroscopicNoise { amplitude, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(step as u64 + 1);
                let mut g = vec![0.0; setup.geom.cells() * nn];
                for cell in g.chunks_mut(nn) {
                    for b in &basis {
                        let c = amplitude * (2.0 * rng.gen::<f64>() - 1.0);
                        cell.iter_mut().zip(b).for_each(|(x, y)| *x += c * y);
                    }
                }
                Some(g)
            }
            Forcing::PeriodicMicroscopic { amplitude, period, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
                let fields: Vec<SmoothField> = basis.iter().map(|_| SmoothField::random(&mut rng)).collect();
                let s = amplitude * (2.0 * std::f64::consts::PI * t / period).sin();
                let mut g = vec![0.0; setup.geom.cells() * nn];
                for (c, cell) in g.chunks_mut(nn).enumerate() {
                    let x = setup.geom.centroids[c];
                    for (b, fld) in basis.iter().zip(&fields) {
                        let coef = s * fld.eval(x);
                        cell.iter_mut().zip(b).for_each(|(y, z)| *y += coef * z);
                    }
                }
                Some(g)
            }
        }
    }
}

/// Random quadratic polynomial in `x` with coefficients in `[−1, 1]`.
#[derive(Clone, Debug)]
pub struct SmoothField {
    coef: [f64; 10],
}

impl SmoothField {
    pub fn random(rng: &mut impl Rng) -> SmoothField {
        SmoothField { coef: std::array::from_fn(|_| 2.0 * rng.gen::<f64>() - 1.0) }
    }

    pub fn eval(&self, x: [f64; 3]) -> f64 {
        let m = [1.0, x[0], x[1], x[2], x[0] * x[0], x[1] * x[1], x[2] * x[2], x[0] * x[1], x[0] * x[2], x[1] * x[2]];
        m.iter().zip(&self.coef).map(|(a, b)| a * b).sum()
    }
}

/// The eight Burnett functions `Â₁₁, Â₂₂, Â₁₂, Â₁₃, Â₂₃, B̂₁, B̂₂, B̂₃` on the grid.
pub fn micro_basis(setup: &Setup) -> Vec<Vec<f64>> {
    let bs: Vec<_> = setup.grid.nodes.iter().map(|&v| burnett(v)).collect();
    let pick = |f: &dyn Fn(&([[f64; 3]; 3], [f64; 3])) -> f64| bs.iter().map(f).collect::<Vec<f64>>();
    vec![
        pick(&|b| b.0[0][0]),
        pick(&|b| b.0[1][1]),
        pick(&|b| b.0[0][1]),
        pick(&|b| b.0[0][2]),
        pick(&|b| b.0[1][2]),
        pick(&|b| b.1[0]),
        pick(&|b| b.1[1]),
        pick(&|b| b.1[2]),
    ]
}

/// Builds the initial distribution (before the normalization constraints).
pub fn raw_initial(setup: &Setup, preset: Preset, seed: u64) -> Vec<f64> {
    let nn = setup.grid.len();
    let cells = setup.geom.cells();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = vec![0.0; cells * nn];
    let chi = &setup.chi.chi;
    let basis = micro_basis(setup);
    let add = |f: &mut [f64], coef: &dyn Fn([f64; 3]) -> f64, shape: &[f64]| {
        for (c, cell) in f.chunks_mut(nn).enumerate() {
            let a = coef(setup.geom.centroids[c]);
            cell.iter_mut().zip(shape).for_each(|(x, y)| *x += a * y);
        }
    };
    match preset {
        Preset::RandomMicroscopic | Preset::RandomFull => {
            if preset == Preset::RandomFull {
                for k in 0..5 {
                    let fld = SmoothField::random(&mut rng);
                    add(&mut f, &|x| fld.eval(x), &chi[k]);
                }
            }
            for b in &basis {
                let fld = SmoothField::random(&mut rng);
                add(&mut f, &|x| 0.5 * fld.eval(x), b);
            }
        }
        Preset::MomentBump => {
            let axes: [f64; 3] = std::array::from_fn(|d| {
                setup.system.mesh.vertices.iter().map(|x| x[d].abs()).fold(0.0, f64::max)
            });
            let centre: [f64; 3] = std::array::from_fn(|d| 0.4 * axes[d] * (2.0 * rng.gen::<f64>() - 1.0));
            let mut dir: [f64; 3] = std::array::from_fn(|_| rng.gen::<f64>() - 0.5);
            let len = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
            dir.iter_mut().for_each(|d| *d /= len);
            let bump = move |x: [f64; 3]| {
                let r2: f64 = (0..3).map(|d| (x[d] - centre[d]).powi(2)).sum();
                (-r2 / 0.15).exp()
            };
            add(&mut f, &bump, &chi[0]);
            for d in 0..3 {
                add(&mut f, &|x| dir[d] * bump(x), &chi[1 + d]);
            }
            add(&mut f, &|x| 0.5 * bump(x), &chi[4]);
        }
    }
    f
}
