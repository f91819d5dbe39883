//! Numerical laboratory for Jacobi matrices whose entries grow without
//! bound under an `N`-periodic modulation: finite-truncation spectra,
//! Christoffel–Darboux kernels, transfer-matrix asymptotics, and the
//! Cauchy-transform route to limiting eigenvalue-counting densities.

pub mod params;
pub mod spectra;
pub mod orthopoly;
pub mod transfer;
pub mod cauchy;
pub mod convergence;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub(crate) mod extrap;

pub use params::{ExtendRule, JacobiFamily, NormalizerKind, ParamError, PeriodicBase};
pub use spectra::{CountingQuery, SpectraError, SpectrumResult, SturmProbe};
pub use orthopoly::{
    MinimalSolution, OrthoError, QuadratureRule, ScaledPair, ScaledQuad, ScaledValue,
};
pub use transfer::{
    BranchMeta, CaseClass, CaseVariant, Diagonalization, EigenPair, HEstimate, LevinsonProduct,
    Mat2C, ParabolicData, ParabolicFrame, TransferError, XiModulus,
};
pub use cauchy::{
    CauchyError, CauchySample, DensityEstimate, DensityModel, GapReport, KnownWeight, OmegaTilde,
};
pub use convergence::{
    ConvergenceError, DensityRow, DensityTable, ExperimentPlan, GapCountTable, KernelRatioRow,
    KernelRatioTable, TestFunction,
};
