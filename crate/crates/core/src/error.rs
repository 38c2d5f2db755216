use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("infeasible sector: {0}")]
    InfeasibleSector(String),

    #[error("constraint clauses overlap on qubit {qubit}")]
    OverlappingClauses { qubit: usize },

    #[error("sector is not closed under the requested symmetry: {0}")]
    Symmetry(String),

    #[error("state {state:#b} is not a member of the sector")]
    Membership { state: u64 },

    #[error("term {term} maps state {from:#b} to {to:#b}, outside the sector")]
    SectorViolation { term: usize, from: u64, to: u64 },

    #[error("{0}")]
    Range(String),

    #[error("dimension {dim} exceeds the dense cap of {cap}")]
    DenseCap { dim: usize, cap: usize },

    #[error("Lanczos did not converge after {iterations} matvecs (best: {best:?})")]
    Convergence { iterations: usize, best: Vec<f64> },

    #[error("at s = {s}: {source}")]
    AtParameter {
        s: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("instance {id}: {source}")]
    Instance {
        id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("screening kept {kept} of {requested} after {attempts} attempts (n = {n}, d = {d})")]
    ScreeningYield {
        n: usize,
        d: usize,
        requested: usize,
        kept: usize,
        attempts: usize,
    },

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
