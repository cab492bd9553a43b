//! Order-by-order solution of the homological equations for the invariant
//! torus of a weakly delay-coupled oscillator network.
//!
//! At order `l` the torus embedding is split as `e_l = T g_l + N h_l`. The
//! tangential part is solved in normal form (resonant Fourier modes stay in
//! the reduced vector field `f_l`), the normal part through the hyperbolic
//! matrix `L`, and the history `E_l(phi, s)` by integrating the transport
//! equation in closed form. Orders above two are rejected.
//!
//! The Fourier relation of the tangential equation is implemented as
//! `i<k, omega> g_k + f_k = zeta_k`, so nonresonant modes get
//! `g_k = zeta_k / (i<k, omega>)`.

mod expansion;
mod frame;
mod model;
mod solve;

pub use expansion::{
    conjugacy_residual, reduce, Expansion, ExpansionDocument, OrderDocument, OrderTerms, ReduceOptions, MAX_ORDER,
};
pub use frame::{FloquetFrame, FrameReport};
pub use model::{orbit_residual, Edge, ModelSpec, NodeDynamics, Oscillator, PairCoupling, ORBIT_TOL};
pub use solve::{
    assemble_e, build_order0, eta1, eta2, h2, lift_history, order0_residual, solve_normal, solve_tangential,
    NormalSolution, Order0, TangentialSolution, MAX_NORMAL_CONDITION,
};
