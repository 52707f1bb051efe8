//! Exact computational kernel.

pub mod groebner;
pub mod matrix;
pub mod numtheory;
pub mod poly;
pub mod roots;
pub mod solve;
pub mod univariate;
