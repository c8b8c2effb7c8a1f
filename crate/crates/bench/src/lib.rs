//! Shared fixtures for the criterion benches in `benches/`.

use gbsde_core::{Claim, Lattice, Result};

/// `tanh(W_T)` on the given lattice.
pub fn tanh_claim(lattice: &Lattice) -> Result<Claim> {
    Claim::from_terminal_w(lattice, f64::tanh)
}
