#![no_std]

extern crate alloc;

pub mod endgame;
pub mod error;
pub mod graphsim;
pub mod mc;
pub mod numerics;
pub mod process;
pub mod ratefn;

pub use error::{Error, Result};
