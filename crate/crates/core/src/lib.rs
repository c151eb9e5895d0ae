//! Nested fractals generated by similitudes: vertex sets, harmonic structures,
//! Dirichlet energies and integral Lipschitz norms.
//!
//! The usual pipeline is
//!
//! 1. build a [`FractalSystem`] from a preset or a [`FractalDefinition`],
//! 2. solve for its [`HarmonicStructure`] with [`solve_ndhs`],
//! 3. sample functions ([`FunctionSpec`]) on `V_n` and compare
//!    [`energy_m`] against the Lipschitz coefficients in [`lipschitz`].

pub mod characteristics;
pub mod definition;
pub mod energy;
pub mod error;
pub mod function;
pub mod harmonic;
pub mod ifs;
pub mod lipschitz;
pub mod presets;
pub mod summation;

pub use characteristics::{dimensions, DimensionReport};
pub use definition::{FractalDefinition, MapDefinition};
pub use energy::{energy_m, energy_sequence, harmonic_extension, EnergySequence, VertexFunction};
pub use error::{FractalError, Result};
pub use function::{Combination, FunctionSpec, Sampler};
pub use harmonic::{decimate, reproduce, solve_ndhs, ConductivityMatrix, HarmonicStructure, SolveOptions};
pub use ifs::{Address, BuildOptions, FractalSystem, Similitude, ValidationReport};
pub use lipschitz::{LipschitzParams, NormReport};
