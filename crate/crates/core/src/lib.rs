//! Weakly asymmetric facilitated exclusion on ℤ, its image as a half-line
//! exclusion process with a reservoir, the discrete Hopf-Cole transform, and
//! numerics for the half-line stochastic heat equation with Dirichlet
//! boundary.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod hopfcole;
pub mod kernels;
pub mod rng;
pub mod she;
pub mod stats;

pub use error::{Error, Result};
