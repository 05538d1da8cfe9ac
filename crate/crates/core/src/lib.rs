//! Casimir-force and electrostatic-calibration toolkit for sphere-plane
//! force experiments.
//!
//! Forces are reported attraction-positive; energies per area are negative
//! for attracting plates.

pub mod constants;
pub mod contact;
pub mod electrostatics;
pub mod lifshitz;
pub mod numerics;
pub mod patches;
pub mod permittivity;
pub mod screening;
pub mod simkit;
pub mod table;

use thiserror::Error;

/// Any error raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Permittivity(#[from] permittivity::PermittivityError),
    #[error(transparent)]
    Lifshitz(#[from] lifshitz::LifshitzError),
    #[error(transparent)]
    Electrostatics(#[from] electrostatics::ElectrostaticsError),
    #[error(transparent)]
    Screening(#[from] screening::ScreeningError),
    #[error(transparent)]
    Patch(#[from] patches::PatchError),
    #[error(transparent)]
    Contact(#[from] contact::ContactError),
    #[error(transparent)]
    Sim(#[from] simkit::SimError),
    #[error(transparent)]
    Analysis(#[from] simkit::AnalysisError),
    #[error(transparent)]
    Table(#[from] table::TableError),
    #[error(transparent)]
    Budget(#[from] constants::BudgetError),
}

impl Error {
    /// True for numerical non-convergence (as opposed to bad input).
    pub fn is_convergence(&self) -> bool {
        match self {
            Self::Lifshitz(e) => e.is_convergence(),
            Self::Electrostatics(e) => e.is_convergence(),
            Self::Patch(e) => e.is_convergence(),
            Self::Contact(e) => e.is_convergence(),
            Self::Sim(e) => e.is_convergence(),
            Self::Analysis(e) => e.is_convergence(),
            Self::Screening(screening::ScreeningError::Fit(f)) => {
                matches!(f, numerics::lsq::FitError::NotConverged { .. })
            }
            _ => false,
        }
    }
}
