//! Classical simulation of the joint correlations of traceless binary
//! observables on bipartite qudit pure states.
//!
//! The quantum side ([`oracle`]) computes exact expectations and embeds each
//! observable as a real unit vector whose dot products reproduce the joint
//! correlations. The classical side ([`protocol`]) reproduces those
//! correlations with shared randomness and a rejection-sampled message whose
//! average length grows like `log₂ d`. [`sphere`] holds the hypersphere
//! mathematics both rely on and [`harness`] runs Monte-Carlo experiments
//! against the oracle.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the scalar to `f64`, which the harness uses throughout.

pub mod harness;
pub mod oracle;
pub mod protocol;
pub mod scalar;
pub mod sphere;

pub use scalar::Real;

pub type UnitVector = sphere::UnitVector<f64>;
pub type ComplexMatrix = oracle::ComplexMatrix<f64>;
pub type TracelessBinaryObservable = oracle::TracelessBinaryObservable<f64>;
pub type PureBipartiteState = oracle::PureBipartiteState<f64>;
pub type Tolerances = oracle::Tolerances<f64>;
pub type BiasedSampleResult = sphere::BiasedSampleResult<f64>;

pub type UnitVector32 = sphere::UnitVector<f32>;
pub type TracelessBinaryObservable32 = oracle::TracelessBinaryObservable<f32>;
pub type PureBipartiteState32 = oracle::PureBipartiteState<f32>;
