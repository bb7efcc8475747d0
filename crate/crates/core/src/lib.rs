//! Random Cayley graphs of finite abelian groups and their lattice limits.
//!
//! A generating set `s` of `Z^n / Sigma` of size `m` gives a Cayley graph
//! isomorphic to the one of `Z^m / Lambda_s` with the standard generators,
//! where `Lambda_s` is the kernel of `Z^m -> Z^n / Sigma`. Graph metrics are
//! computed by breadth-first search on that quotient; their limits are the
//! matching lattice functionals of `Lambda_s` after normalization.

pub mod cayley;
pub mod experiment;
pub mod graphmetrics;
pub mod intlinalg;
pub mod latgeom;
pub mod randomlat;
pub mod rng;
pub mod stats;

pub use cayley::{AbelianQuotient, CayleyError, GeneratingSet, IntegerLattice, SortedBoxWindow, Window};
pub use experiment::{ExperimentConfig, ExperimentError, XiKind};
pub use graphmetrics::{DistanceProfile, GraphError};
pub use intlinalg::{HnfBasis, IntMatrix, LinalgError, SnfDecomposition};
pub use latgeom::{Interval, LatgeomError, NormBall, RealLattice, ReducedLattice};
pub use randomlat::{Functional, RandomLatError, ReferenceMethod};
pub use stats::{EmpiricalDistribution, StatsError, Summary};
