use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("invalid lattice parameter: {0}")]
    InvalidParams(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("sector mismatch: {0}")]
    SectorMismatch(String),
    #[error("mode index {mode} is not valid on a {sector} state")]
    ModeParity { mode: String, sector: String },
    #[error("not implemented for twisted sectors: {0}")]
    TwistedUnsupported(String),
    #[error("element is not homogeneous: {0}")]
    NotHomogeneous(String),
    #[error("element is not in the lattice VOA: {0}")]
    NotInLattice(String),
    #[error("theta does not preserve coset {0}; no theta-eigenspace exists")]
    ThetaNotPreserved(u32),
    #[error("vector is not in the module truncation: {0}")]
    NotInModule(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}
