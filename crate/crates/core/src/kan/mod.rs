//! Kolmogorov-Arnold network building blocks: spline bases, edge functions,
//! network evaluation with spatial jets, and parameter Jacobians.

pub mod edge;
pub mod io;
pub mod jet;
pub mod knots;
pub mod network;

pub use edge::{edge_eval, silu_derivs, EdgeFunction};
pub use io::{load_network, save_network};
pub use jet::{JetLayout, JetValue};
pub use knots::{bspline_basis, make_knots, ActiveBasis, KnotVector};
pub use network::{
    Backend, Embedding, KanLayer, LayerParams, MlpLayer, Network, NetworkSpec, ParamSlot,
    ParamVector, ScaleMode,
};
