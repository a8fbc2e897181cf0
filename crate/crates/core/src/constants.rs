//! Physical constants used throughout the crate.
//!
//! | symbol | value                  | unit |
//! |--------|------------------------|------|
//! | k_B    | 1.380649e-23 (exact)   | J/K  |

use std::f64::consts::PI;

/// Boltzmann constant, CODATA exact value.
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Prefactor of the low-temperature Debye heat capacity, 12π⁴/5.
pub const DEBYE_PREFACTOR: f64 = 12.0 * PI * PI * PI * PI / 5.0;

/// Electron-volt in joules, used by the unit parser.
pub const ELECTRON_VOLT: f64 = 1.602_176_634e-19;
