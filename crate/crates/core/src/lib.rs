//! Computational ludics: designs, interaction, paths and behaviours.

pub mod acceptance;
pub mod behaviours;
pub mod compact;
pub mod datatypes;
pub mod error;
pub mod functional;
pub mod gen;
pub mod multidesign;
pub mod paths;
pub mod reduction;
pub mod syntax;

pub use error::{Error, Result};
