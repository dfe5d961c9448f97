use serde::Serialize;

use super::CircleLift;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotationEstimate {
    pub estimate: f64,
    /// For a lift of a circle homeomorphism, `|F^n(x) − x − nρ| < 1`, so the
    /// estimate is within `1/n` of the rotation number.
    pub error_bound: f64,
    pub iterations: u64,
}

/// `(F^n(x₀) − x₀) / n`. The orbit is tracked as an integer winding plus a
/// point of `[0, 1)`, so precision does not degrade with `n`.
pub fn rotation_number(lift: &CircleLift, n_iters: u64, x0: f64) -> RotationEstimate {
    assert!(n_iters >= 1, "rotation_number needs at least one iteration");
    let mut winding: i64 = x0.floor() as i64;
    let mut r = x0 - x0.floor();
    for _ in 0..n_iters {
        let y = lift.eval(r);
        let k = y.floor();
        winding += k as i64;
        r = y - k;
    }
    let displacement = (winding as f64 - x0.floor()) + (r - (x0 - x0.floor()));
    RotationEstimate {
        estimate: displacement / n_iters as f64,
        error_bound: 1.0 / n_iters as f64,
        iterations: n_iters,
    }
}
