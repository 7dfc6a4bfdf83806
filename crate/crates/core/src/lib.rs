// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cahn_hilliard;
pub mod config;
pub mod constitutive;
pub mod error;
pub mod grid;
pub mod mms;
pub mod heat;
pub mod io;
pub mod navier_stokes;
pub mod sim;
pub mod thermo_audit;
