//! Causal direction between two symbolic sequences via dictionaries of
//! flip-aligned patterns and their weighted binary entropy.
//!
//! The crate is split along the pipeline:
//!
//! * [`seqcore`]: symbol sequences, discretisation, CSV / FASTA ingestion.
//! * [`pattern_entropy`]: flip dictionaries, sliding-match pattern extraction,
//!   response determinism, weighted entropy scoring and the verdict.
//! * [`baselines`]: LZ76 and Effort-To-Compress primitives plus the
//!   compression-complexity direction measures used for comparison.
//! * [`synth`]: seeded generators for the synthetic experiment families.
//! * [`bench`]: sweep harness, genomic and predator-prey drivers, CSV output.

pub mod baselines;
pub mod bench;
pub mod error;
pub mod pattern_entropy;
pub mod seqcore;
pub mod synth;

pub use error::{Error, Result};
pub use pattern_entropy::{infer_causal_direction, CausalReport};
pub use seqcore::{Direction, SequencePair, SymbolSequence};
