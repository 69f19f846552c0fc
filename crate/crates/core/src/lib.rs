//! Link-level toolkit for one-step grant-free random access.
//!
//! Users are identified by binary protocol sequences (columns of a regular
//! LDPC-style spreading matrix), packets are repeated on the slots of the
//! sequence, and the receiver runs a two-stage iterative detector: a cover
//! decoder narrows the candidate set from slot load states, then message
//! passing decodes payloads while belief propagation prunes false alarms
//! flagged by decoded zero symbols.
//!
//! Modules:
//! - [`seqmat`]: spreading-matrix construction (PEG), cycle census, files.
//! - [`theory`]: closed-form false-alarm/complexity models and optimizers.
//! - [`phy`]: alphabets, spreading, superposition, AWGN, sub-vectors.
//! - [`detect`]: energy detector, cover decoder, BP, MPA, outer loop.
//! - [`sim`]: Monte-Carlo trials, metrics, sweeps, CSV persistence.
//!
//! The numeric core is generic over the scalar type through [`Float`];
//! `f64` aliases for the common types are exported at the crate root.

pub mod detect;
mod float;
pub mod phy;
pub mod seqmat;
pub mod sim;
pub mod theory;

pub use float::Float;

/// `f64` design point for the closed-form models.
pub type DesignPoint64 = theory::DesignPoint<f64>;
/// `f64` degree profile.
pub type DegreeProfile64 = theory::DegreeProfile<f64>;
/// `f64` user alphabet.
pub type UserAlphabet64 = phy::UserAlphabet<f64>;
/// `f64` received frame.
pub type Frame64 = phy::Frame<f64>;
/// `f64` detector parameters.
pub type TwoStageParams64 = detect::TwoStageParams<f64>;
