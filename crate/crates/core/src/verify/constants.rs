//! Gap constants of the sphere theorems.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::VerifyError;

/// Every threshold that depends only on `n`, `α₀` and (in dimension 4) `χ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapConstants {
    pub n: usize,
    /// `ε₀ = (n−1)/4`, which equals `min{Λₙ, (n−1)/4}`.
    pub epsilon0: f64,
    /// `Λₙ = n/3`.
    pub lambda_n: f64,
    pub alpha0: f64,
    /// `τ₀ = 3α₀ / (32 n (n−1))`.
    pub tau0: f64,
    /// `δ₀ = α₀ / (4 n (n−1))`.
    pub delta0: f64,
    /// `C_S = 4 n (n−1) / (3α₀)`.
    pub sobolev_constant: f64,
    /// `(32/3) π² (χ − 2) + α₀/192`; dimension 4 with known `χ` only.
    pub theorem_c_threshold: Option<f64>,
}

pub fn gap_constants(n: usize, alpha0: f64, chi: Option<i64>) -> Result<GapConstants, VerifyError> {
    if n < 3 {
        return Err(VerifyError::Dimension(n));
    }
    if !(alpha0 > 0.0 && alpha0.is_finite()) {
        return Err(VerifyError::Alpha0(alpha0));
    }
    let nf = n as f64;
    let lambda_n = nf / 3.0;
    let epsilon0 = lambda_n.min((nf - 1.0) / 4.0);
    let theorem_c_threshold = match (n, chi) {
        (4, Some(chi)) => Some(32.0 / 3.0 * PI * PI * (chi as f64 - 2.0) + alpha0 / 192.0),
        _ => None,
    };
    Ok(GapConstants {
        n,
        epsilon0,
        lambda_n,
        alpha0,
        tau0: 3.0 * alpha0 / (32.0 * nf * (nf - 1.0)),
        delta0: alpha0 / (4.0 * nf * (nf - 1.0)),
        sobolev_constant: 4.0 * nf * (nf - 1.0) / (3.0 * alpha0),
        theorem_c_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_four() {
        let a = 8.0 * 6f64.sqrt() * PI;
        let c = gap_constants(4, a, Some(2)).unwrap();
        assert_eq!(c.epsilon0, 0.75);
        assert!((c.tau0 - a / 128.0).abs() < 1e-15);
        assert!((c.delta0 - a / 48.0).abs() < 1e-15);
        assert!((c.sobolev_constant - 16.0 / a).abs() < 1e-15);
        assert!((c.theorem_c_threshold.unwrap() - a / 192.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(gap_constants(2, 1.0, None), Err(VerifyError::Dimension(2))));
        assert!(gap_constants(4, 0.0, None).is_err());
        assert!(gap_constants(4, f64::NAN, None).is_err());
    }
}
