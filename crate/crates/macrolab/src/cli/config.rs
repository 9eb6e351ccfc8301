// SPDX-License-Identifier: Apache-2.0

//! Run configuration assembled from defaults, a key-value file and flags.

use crate::ellipticfem::Shape;
use crate::error::{MacrolabError, Result};
use crate::estimatelab::{Forcing, Preset, Scaling, SimConfig};
use serde::Serialize;
use std::path::PathBuf;

/// Every accepted configuration key.
pub const KEYS: [&str; 17] = [
    "out", "shape", "refine", "grid", "eps", "s", "k", "seed", "preset", "forcing", "amplitude", "steps",
    "horizon", "cfl", "cadence", "collisions", "mass_tol",
];

/// Options shared by all subcommands. `None` means the subcommand default.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub out: Option<PathBuf>,
    pub shape: String,
    pub refine: Option<usize>,
    pub grid: Option<usize>,
    pub eps: f64,
    pub s: i32,
    pub k: i32,
    pub seed: u64,
    pub preset: String,
    pub forcing: String,
    pub amplitude: f64,
    pub steps: Option<usize>,
    pub horizon: f64,
    pub cfl: f64,
    pub cadence: usize,
    pub collisions: bool,
    /// Largest accepted per-step mass change.
    pub mass_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sim = SimConfig::default();
        RunConfig {
            out: None,
            shape: "ball".into(),
            refine: None,
            grid: None,
            eps: 1.0,
            s: 0,
            k: 0,
            seed: 1,
            preset: sim.preset.name().into(),
            forcing: "zero".into(),
            amplitude: 0.1,
            steps: None,
            horizon: sim.horizon,
            cfl: sim.cfl,
            cadence: 0,
            collisions: true,
            mass_tol: 1e-12,
        }
    }
}

fn bad(key: &str, value: &str) -> MacrolabError {
    MacrolabError::Config(format!("invalid value `{value}` for `{key}`"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| bad(key, value))
}

fn positive(key: &str, value: &str) -> Result<f64> {
    let x: f64 = num(key, value)?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(bad(key, value))
    }
}

impl RunConfig {
    /// Sets one key; unknown keys and malformed values are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "out" => self.out = Some(PathBuf::from(value)),
            "shape" => {
                Shape::parse(value).map_err(|_| bad(key, value))?;
                self.shape = value.into();
            }
            "refine" => self.refine = Some(num(key, value)?),
            "grid" => {
                let n: usize = num(key, value)?;
                if n < 2 {
                    return Err(bad(key, value));
                }
                self.grid = Some(n);
            }
            "eps" => self.eps = positive(key, value)?,
            "s" => self.s = num(key, value)?,
            "k" => self.k = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "preset" => {
                Preset::parse(value)?;
                self.preset = value.into();
            }
            "forcing" => {
                Forcing::parse(value, 0.0, 0)?;
                self.forcing = value.into();
            }
            "amplitude" => {
                let a: f64 = num(key, value)?;
                if !a.is_finite() {
                    return Err(bad(key, value));
                }
                self.amplitude = a;
            }
            "steps" => self.steps = Some(num(key, value)?),
            "horizon" => self.horizon = positive(key, value)?,
            "cfl" => {
                let c = positive(key, value)?;
                if c > 1.0 {
                    return Err(bad(key, value));
                }
                self.cfl = c;
            }
            "cadence" => self.cadence = num(key, value)?,
            "collisions" => self.collisions = num(key, value)?,
            "mass_tol" => self.mass_tol = positive(key, value)?,
            _ => {
                return Err(MacrolabError::Config(format!("unknown key `{key}` (accepted: {})", KEYS.join(", "))));
            }
        }
        Ok(())
    }

    /// Applies a `key = value` file; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| MacrolabError::Config(format!("line {}: expected `key = value`", n + 1)))?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn shape(&self) -> Result<Shape> {
        Shape::parse(&self.shape)
    }

    /// Simulation parameters with the simulation defaults for unset options.
    pub fn sim_config(&self) -> Result<SimConfig> {
        let d = SimConfig::default();
        Ok(SimConfig {
            shape: self.shape()?,
            refine: self.refine.unwrap_or(d.refine),
            grid: self.grid.unwrap_or(d.grid),
            scaling: Scaling { eps: self.eps, s: self.s, k: self.k, collisions: self.collisions },
            seed: self.seed,
            preset: Preset::parse(&self.preset)?,
            forcing: Forcing::parse(&self.forcing, self.amplitude, self.seed)?,
            steps: self.steps,
            horizon: self.horizon,
            cfl: self.cfl,
            cadence: self.cadence,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let mut c = RunConfig::default();
        c.apply_text("# run\nshape = spheroid\ngrid=12  # velocity\n\nseed = 7\n").unwrap();
        c.set("grid", "10").unwrap();
        assert_eq!(c.shape, "spheroid");
        assert_eq!(c.grid, Some(10));
        assert_eq!(c.seed, 7);
        assert_eq!(c.sim_config().unwrap().grid, 10);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let mut c = RunConfig::default();
        assert!(c.apply_text("colour = blue").is_err());
        assert!(c.set("eps", "-1").is_err());
        assert!(c.set("mass_tol", "0").is_err());
        assert!(c.set("cfl", "1.5").is_err());
        assert!(c.set("shape", "torus").is_err());
        assert!(c.apply_text("no equals sign").is_err());
    }
}
