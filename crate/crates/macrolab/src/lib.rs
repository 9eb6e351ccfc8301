// SPDX-License-Identifier: Apache-2.0

//! Verification workbench for macroscopic estimates of linear kinetic
//! equations in bounded domains with specular reflection.
//!
//! * [`symkernel`]: exact Gaussian-rational polynomial algebra and ideal membership.
//! * [`adnverify`]: replay of the Agmon–Douglis–Nirenberg complementing-condition computation.
//! * [`ellipticfem`]: P1 finite elements for the symmetric Poisson system, rigid modes and Korn constants.
//! * [`kinetics`]: Gauss–Hermite velocity grids, moments, test functions and Landau σ-coefficients.
//! * [`estimatelab`]: specular transport simulator and the L² / L⁶ estimate harness.
//! * [`cli`]: the `macrolab` command-line front end.

pub mod adnverify;
pub mod cli;
pub mod ellipticfem;
pub mod estimatelab;
pub mod error;
pub mod kinetics;
pub mod symkernel;

pub use error::{MacrolabError, Result};
