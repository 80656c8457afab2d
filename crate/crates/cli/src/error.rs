use thiserror::Error;
use tpoly_core::beta::BetaError;
use tpoly_core::combos::CombosError;
use tpoly_core::dwork::DworkError;
use tpoly_core::hodge::HodgeError;
use tpoly_core::lattice::LatticeError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Hodge(#[from] HodgeError),
    #[error(transparent)]
    Dwork(#[from] DworkError),
    #[error(transparent)]
    Combos(#[from] CombosError),
    #[error(transparent)]
    Beta(#[from] BetaError),
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for bad input (matching clap's usage errors), 3 for failed computations.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Lattice(_) => 2,
            _ => 3,
        }
    }
}
