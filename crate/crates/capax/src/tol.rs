//! Numerical tolerances, centralized so every module pins the same constants.

/// Relative tolerances used by invariant checks throughout the crate.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Stationarity balance residual, relative to `mu(y) * lambda(y)`.
    pub stationarity: f64,
    /// Round-trip error of the time-reversal involution.
    pub involution: f64,
    /// Harmonicity residual of equilibrium potentials, relative to `lambda(x)`.
    pub harmonicity: f64,
    /// Weighted mean of the right-hand side in the saddle-point solve.
    pub mean_zero: f64,
    /// Divergence-free checks on flows.
    pub divergence: f64,
    /// Feasibility of candidate flows in the Thomson functional.
    pub feasibility: f64,
    /// Cross-route capacity agreement.
    pub agreement: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            stationarity: 1e-12,
            involution: 1e-14,
            harmonicity: 1e-10,
            mean_zero: 1e-12,
            divergence: 1e-12,
            feasibility: 1e-10,
            agreement: 1e-10,
        }
    }
}

/// Relative deviation |a - b| / max(|a|, |b|), zero when both vanish.
pub fn rel_dev(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
