//! momentlab: a numerical laboratory for unitary connections with
//! symplectic curvature over flat tori.
//!
//! The crate discretizes T^{2n} = (ℝ/ℤ)^{2n} (n = 1, 2) with a spectral
//! exterior calculus and builds on it:
//!
//! * the space of connections whose curvature is symplectic, its pairing
//!   Ω and compatible complex structures ([`connection`]);
//! * the moment maps for bundle isometries and gauge transformations,
//!   with numerically checkable identities and witnesses ([`gauge`]);
//! * the prescribed-volume problem solved by a Kempf–Ness gradient flow
//!   of Kähler potentials ([`calabi`]);
//! * the circle-valued holonomy of Hamiltonian loops on S², integrated
//!   on the Hopf bundle ([`weinstein`]);
//! * deterministic verification suites with machine-readable reports
//!   ([`suite`]) and file formats for fields and traces ([`io`]).

pub mod calabi;
pub mod connection;
pub mod error;
pub mod forms;
pub mod gauge;
pub mod grid;
pub mod io;
pub mod sample;
pub mod suite;
pub mod weinstein;

mod spectral;

pub use error::{Error, Result};
pub use grid::{Field, Grid};

/// Worker-thread cap from MOMENTLAB_THREADS; defaults to 1 (sequential).
/// Only embarrassingly parallel sample integration consults this, and the
/// aggregation order is fixed, so results do not depend on the value.
pub fn configured_threads() -> usize {
    std::env::var("MOMENTLAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .map(|v| v.clamp(1, 64))
        .unwrap_or(1)
}
