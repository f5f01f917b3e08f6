//! Floquet effective Hamiltonians and micromotion operators for
//! amplitude-modulated periodically driven quantum systems.
//!
//! The driven Hamiltonian is given as Fourier harmonics h^(n)(t) spanned by a
//! finite algebra of Hermitian generators. Flow equations in an auxiliary
//! variable block diagonalize the quasienergy operator order by order in the
//! inverse driving frequency; every order reduces to linear first-order ODEs
//! that are solved exactly in a ring of exp-polynomials with Gaussian-rational
//! coefficients. Three expansion engines are provided (a band-preserving Toda
//! flow, the Verdeny-Mielke-Mintert flow, and a discrete flow), together with
//! the Magnus construction of the micromotion exponent, a fast-envelope
//! variant, and an independent dense-matrix numerical oracle.

pub mod algebra;
pub mod error;
pub mod fastmod;
pub mod flow;
pub mod fourier;
pub mod linalg;
pub mod micromotion;
pub mod model;
pub mod numeric;
pub mod scalar;
pub mod symbolic;

pub use algebra::{builtin_dimer, builtin_su2, close_from_representation, commutator, ClosureReport, LieAlgebra};
pub use error::{Error, Result};
pub use fourier::{EpsSeries, FourierOperator};
pub use symbolic::{equal, equal_sampled, Atom, Bindings, EnvelopeExpr, ExpPolyS};
