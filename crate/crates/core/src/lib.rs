//! Synthesis of n-qubit unitaries into CNOT + single-qubit circuits.
//!
//! A [`Skeleton`] fixes where the CNOTs go; the single-qubit gates are
//! parameterized by Euler angles and optimized by sweeping over the circuit,
//! replacing each gate by the closest unitary to its environment. The
//! [`params`] module decides whether a skeleton has enough effective
//! parameters to reach a generic target at all.
//!
//! ```
//! use rand::SeedableRng;
//! use unisynth::{haar_random_unitary, optimizer, skeletons, Status};
//!
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
//! let target = haar_random_unitary(2, &mut rng);
//! let skeleton = skeletons::full_skeleton(2).unwrap();
//! let result = optimizer::synthesize(&target, &skeleton, &Default::default()).unwrap();
//! assert_eq!(result.status, Status::Converged);
//! ```

pub mod circuit;
pub mod error;
pub mod exec;
pub mod linalg;
pub mod normalize;
pub mod optimizer;
pub mod params;
pub mod skeletons;

pub use circuit::{evaluate, export_qasm, Circuit, CnotLayer, Dressing, ParamAssignment, Skeleton};
pub use error::{Error, Result};
pub use exec::Execution;
pub use linalg::{haar_random_unitary, ComplexMatrix, EulerTriple, Mat2, C64};
pub use normalize::{normalize, NormalizedAssignment};
pub use optimizer::{synthesize, OptimizerConfig, Status, SynthesisResult, Variant};
pub use params::{ParamReport, RankOptions};
