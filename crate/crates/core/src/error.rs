use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BraidError {
    #[error("braid group needs at least one strand")]
    ZeroStrands,
    #[error("generator {letter} is out of range for {strands} strands")]
    GeneratorOutOfRange { letter: i32, strands: usize },
    #[error("strand count mismatch: {left} vs {right}")]
    StrandMismatch { left: usize, right: usize },
    #[error("block <{first},{last}> is not a consecutive block of 1..{strands}")]
    BadBlock { first: usize, last: usize, strands: usize },
    #[error("image table is not a permutation")]
    NotAPermutation,
}
