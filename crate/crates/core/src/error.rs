use thiserror::Error;

use crate::ansatz::AnsatzError;
use crate::exact::ExactError;
use crate::model::ModelError;
use crate::qeom::QeomError;
use crate::resources::ResourceError;
use crate::simulator::SimError;
use crate::spectral::SpectralError;
use crate::vqe::VqeError;

/// Any failure raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Ansatz(#[from] AnsatzError),
    #[error(transparent)]
    Vqe(#[from] VqeError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Qeom(#[from] QeomError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Resource(#[from] ResourceError),
}

impl Error {
    /// True for invalid inputs, as opposed to numerical breakdowns.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Model(_)
                | Error::Ansatz(_)
                | Error::Resource(_)
                | Error::Vqe(VqeError::Ansatz(_) | VqeError::Model(_) | VqeError::OddLattice(_))
                | Error::Qeom(QeomError::TooFewSites(_) | QeomError::Model(_))
                | Error::Spectral(SpectralError::Incommensurate { .. } | SpectralError::BadEta(_) | SpectralError::Model(_))
        )
    }
}
