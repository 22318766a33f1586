//! Desk-scale surrogates of hyperbolic flows: suspension flows over
//! subshifts of finite type and over hyperbolic toral automorphisms.

mod sft;
mod torus;

pub use sft::{OrbitCounting, PeriodicOrbit, SftFlow, SymbolLoop};
pub use torus::{ExactOrbit, ShadowedOrbit, TorusFlow, TorusLoop, TorusSample};
