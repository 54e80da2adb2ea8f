//! Power series for the modified Bessel functions that appear in the
//! transient Raman Green kernel.
//!
//! The kernel is most naturally written with the entire functions
//!
//! ```text
//! R0(y) = Σ y^k / (k!)²        = I0(2√y)
//! R1(y) = Σ y^k / (k! (k+1)!)  = I1(2√y) / √y
//! ```
//!
//! which are smooth at `y = 0` and avoid the square root.

use crate::{Error, Result};

/// Relative size of the last retained term.
pub const SERIES_TOLERANCE: f64 = 1e-12;
/// Hard cap on the number of terms.
pub const SERIES_CAP: usize = 10_000;

/// Sums `Σ t_k` with `t_0 = 1`, `t_k = t_{k-1} · y / (k (k + shift))`.
fn series(y: f64, shift: f64) -> Result<f64> {
    if !(y >= 0.0) || !y.is_finite() {
        return Err(Error::Domain(alloc::format!(
            "series argument {y} must be finite and nonnegative"
        )));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..SERIES_CAP {
        let kf = k as f64;
        term *= y / (kf * (kf + shift));
        sum += term;
        if !sum.is_finite() {
            return Err(Error::Domain(alloc::format!("series overflow at argument {y}")));
        }
        // Terms grow while k(k+shift) < y; only stop on the decreasing tail.
        if kf * (kf + shift) > y && term < SERIES_TOLERANCE * sum {
            return Ok(sum);
        }
    }
    Err(Error::SeriesCap(SERIES_CAP))
}

/// `R0(y) = I0(2√y)`.
pub fn r0(y: f64) -> Result<f64> {
    series(y, 0.0)
}

/// `R1(y) = I1(2√y)/√y`.
pub fn r1(y: f64) -> Result<f64> {
    series(y, 1.0)
}

/// Modified Bessel function of the first kind, order 0.
pub fn i0(x: f64) -> Result<f64> {
    r0(0.25 * x * x)
}

/// Modified Bessel function of the first kind, order 1.
pub fn i1(x: f64) -> Result<f64> {
    Ok(0.5 * x * r1(0.25 * x * x)?)
}
