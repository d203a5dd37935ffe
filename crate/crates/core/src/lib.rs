//! Fermi-Hubbard toolkit: variational ground states, qEOM excitations, Lehmann
//! spectral functions, Trotter dynamics and resource estimates, all checked
//! against exact diagonalization on a dense statevector simulator.
//!
//! Numerical kernels are generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix `f64`, which every experiment uses.

pub mod ansatz;
pub mod dynamics;
pub mod exact;
pub mod model;
pub mod qeom;
pub mod resources;
pub mod scalar;
pub mod simulator;
pub mod spectral;
pub mod vqe;

mod error;

pub use error::Error;
pub use scalar::{lit, Real, C};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Complex64 = num_complex::Complex<f64>;
pub type State64 = simulator::State<f64>;
pub type QubitOperator64 = model::QubitOperator<f64>;
pub type SparseOperator64 = model::SparseOperator<f64>;
pub type Spectrum64 = exact::SpectrumResult<f64>;
pub type VqeResult64 = vqe::VqeResult<f64>;
pub type QeomSolution64 = qeom::QeomSolution<f64>;
pub type SpectralResult64 = spectral::SpectralResult<f64>;
