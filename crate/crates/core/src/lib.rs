//! Radial simulation and comparison-function toolkit for the fast-diffusion
//! viscous Hamilton-Jacobi equation `u_t - Δ_p u + |∇u|^q = 0`.

pub mod analysis;
pub mod cli;
pub mod closedform;
pub mod config;
pub mod exponents;
pub mod gridop;
pub mod io;
pub mod solver;
pub mod verify;
