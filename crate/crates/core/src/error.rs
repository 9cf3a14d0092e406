use alloc::string::String;

/// Every failure the engine can report.
///
/// Variants that carry a `String` hold a human-readable witness (the failing
/// element, square or diagram) so reports can name what went wrong.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("not a group: {0}")]
    NotAGroup(String),
    #[error("order bound {bound} exceeded")]
    OrderBound { bound: usize },
    #[error("index {index} out of range for a carrier of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("subgroups belong to different parent groups")]
    ParentMismatch,
    #[error("subgroup is not normal")]
    NotNormalSubgroup,
    #[error("not a homomorphism: {0}")]
    NotAHom(String),
    #[error("codomains do not match")]
    CodMismatch,
    #[error("search budget of {budget} nodes exceeded")]
    SearchBudgetExceeded { budget: u64 },
    #[error("group is not abelian")]
    NotAbelian,
    #[error("homomorphism is not surjective: {0}")]
    NotSurjective(String),
    #[error("axiom violation in {diagram}: {witness}")]
    AxiomViolation { diagram: String, witness: String },
    #[error("reflected groupoid is not a groupoid: {0}")]
    NotAGroupoidAfterReflection(String),
    #[error("loops at the base object do not form a group: {0}")]
    NotAGroupOnLoops(String),
    #[error("functor does not restrict to loops: {0}")]
    RestrictionEscapes(String),
    #[error("not a normal extension: {0}")]
    NotNormalExtension(String),
    #[error("the two Galois group computations disagree: {0}")]
    ComparisonFailure(String),
    #[error("square does not commute: {0}")]
    SquareDoesNotCommute(String),
    #[error("no lifting exists: {0}")]
    NoLifting(String),
    #[error("missing weak-universality certificate: {0}")]
    MissingCertificate(String),
    #[error("naturality violated on {square}: {detail}")]
    NaturalityViolation { square: String, detail: String },
    #[error("schema error: {0}")]
    SchemaError(String),
    #[error("map is not étale at vertex {vertex}: {detail}")]
    NotEtale { vertex: usize, detail: String },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("graph is not connected")]
    NotConnected,
    #[error("covering is not normal: {0}")]
    NotNormalCover(String),
    #[error("homology has a free part of rank {0}")]
    InfiniteHomology(usize),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
