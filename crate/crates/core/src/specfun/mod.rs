//! Numerical kernel shared by every analytical expression: the Gauss
//! hypergeometric function on the negative real axis, the principal branch of
//! the Lambert W function, and adaptive Gauss–Kronrod quadrature.
//!
//! Everything here is a pure function of its arguments.

mod gamma;
mod hyp2f1;
mod lambert;
mod quadrature;

pub use gamma::{digamma, gamma, rgamma};
pub use hyp2f1::{gauss_2f1, Hyp2F1};
pub use lambert::lambert_w0;
pub use quadrature::{
    integrate, integrate_semi_infinite, try_integrate, try_integrate_breaks,
    try_integrate_semi_infinite, QuadratureSpec,
};
