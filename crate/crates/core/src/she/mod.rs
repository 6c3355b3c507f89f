//! Half-line stochastic heat equation with Dirichlet boundary: noise,
//! mild-solution stepping and the Picard layer recursion.

mod noise;
mod picard;
mod solver;

pub use noise::{sample_noise, sample_noise_stream, NoiseGrid, SheGrid, MAX_CELLS};
pub use picard::{picard_layers, PicardBound, PicardGrid, PicardState, MAX_LAYERS};
pub use solver::{
    moment_estimate, second_moment_centered, solve_ensemble, solve_mild, solve_mild_with, IcFn, IcKind, MildSolution, Scheme, SolveOptions,
};
