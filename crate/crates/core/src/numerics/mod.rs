//! Quadrature, root bracketing and numerical differentiation.

mod derivative;
mod quadrature;
mod roots;

pub use derivative::{richardson_central, Derivative};
pub use quadrature::{
    gauss_hermite, integrate_adaptive, integrate_on_mesh, AdaptiveOptions, AdaptiveResult, Mesh, Moments4,
};
pub use roots::bisect;
