//! Weighted sums of independent variables under almost-orthogonal weights.
//!
//! The crate builds partial sums `S_{n,k} = Σ_j u_{kj} X_j` (and the paired
//! `T_{n,k}`) from reproducible random streams, then measures how close their
//! empirical distribution is to the standard normal law along one sample path.
//! Around that core sit periodogram and circulant-spectrum tools and four
//! Monte Carlo harnesses (trajectory KS, characteristic-function variance,
//! CLT fluctuations, large deviations).

pub mod cli;
pub mod empirical;
pub mod error;
pub mod experiments;
pub mod kv;
pub mod numeric;
pub mod sources;
pub mod spectra;
pub mod transform;
pub mod weights;

pub use empirical::{normal_cdf, EmpiricalMeasure};
pub use error::{Error, Result};
pub use experiments::{ExperimentResult, Schedule};
pub use sources::{SourceFamily, SourceSpec};
pub use spectra::Spectrum;
pub use transform::{partial_sums, FastTrig, PartialSums, SumPath};
pub use weights::{make_trig_pair, WeightKind, WeightMatrixPair};
