//! Numerical building blocks shared by the solvers.

pub mod ode;
pub mod quad;
pub mod sum;
pub mod tridiag;

pub use ode::{find_event, integrate_on_grid, Dopri5, OdeOptions};
pub use sum::KahanSum;
pub use tridiag::{symmetric_tridiagonal_eigen, TridiagEigen};
