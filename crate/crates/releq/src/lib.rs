//! Branches of relative equilibria bifurcating from symmetric equilibria of
//! simple mechanical systems.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod branch;
pub mod catalog;
pub mod cli;
pub mod config;
pub mod error;
pub mod geometry;
pub mod lie;
pub mod linalg;
pub mod mechanics;
pub mod numerics;
pub mod problem;
pub mod reduction;
pub mod report;
pub mod splittings;
pub mod stability;
