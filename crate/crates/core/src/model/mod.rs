//! Reaction networks, mass-action propensities, observables and scaling
//! diagnostics.

mod network;
mod observable;
mod scaling;

pub use network::{Reaction, ReactionNetwork, Species, State};
pub use observable::Observable;
pub use scaling::{a_of_h, compute_scaling, ScalingProfile};
