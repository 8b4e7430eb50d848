//! Locality and noncontextuality n-cycle inequalities: dense complex linear
//! algebra, cycle evaluation and classical bounds, the KCBS observable family,
//! the joint-violation constructions, and search over the qubit-qutrit system.

pub mod analysis;
pub mod cycle;
pub mod error;
pub mod identities;
pub mod kcbs;
pub mod linalg;
pub mod scenarios;
pub mod simplex;

pub use cycle::{
    canonical_cycle, evaluate, evaluate_with_tolerance, lhv_max, CycleExpression, DichotomicObservable,
    EvaluationReport, ObservableCycle,
};
pub use error::{Error, Result};
pub use kcbs::{C3Selector, KcbsFamily};
pub use linalg::{ComplexMatrix, PureState, C64};
