//! Small scalar helpers shared by the integrators and quadratures.

/// `(1 - e^{-x}) / x`, accurate near zero.
pub fn phi1_neg(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0 + x.powi(4) / 120.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// `(x - 1 + e^{-x}) / x^2`, accurate near zero.
pub fn phi2_neg(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        0.5 - x / 6.0 + x * x / 24.0 - x.powi(3) / 120.0 + x.powi(4) / 720.0 - x.powi(5) / 5040.0
    } else {
        (x + (-x).exp_m1()) / (x * x)
    }
}

/// `(1 - e^{-x}(1 + x)) / x`, accurate near zero.
pub fn xe_weight(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        x / 2.0 - x * x / 3.0 + x.powi(3) / 8.0 - x.powi(4) / 30.0 + x.powi(5) / 144.0 - x.powi(6) / 840.0
    } else {
        (-(-x).exp_m1() - x * (-x).exp()) / x
    }
}

/// `(1 - e^{-2x})/(2x) - ((1 - e^{-x})/x)^2`: conditional variance factor of an
/// OU integral given the Brownian increment, accurate near zero.
pub fn ou_residual(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        x * x / 12.0 - x.powi(3) / 12.0 + 17.0 * x.powi(4) / 360.0 - 7.0 * x.powi(5) / 360.0
            + 43.0 * x.powi(6) / 6720.0
    } else {
        let p = phi1_neg(x);
        (phi1_neg(2.0 * x) - p * p).max(0.0)
    }
}
