//! Smoothed Heaviside penalty and the level of its relaxed profile that
//! corresponds to the sharp free boundary.

use crate::error::Result;
use crate::functional::{lambda_star, Density};

/// `H_ε(s)`: 0 below 0, `3(s/ε)² − 2(s/ε)³` on `[0, ε]`, 1 above.
#[inline]
pub fn heaviside(s: f64, eps: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= eps {
        1.0
    } else {
        let t = s / eps;
        t * t * (3.0 - 2.0 * t)
    }
}

#[inline]
pub fn heaviside_d(s: f64, eps: f64) -> f64 {
    if s <= 0.0 || s >= eps {
        0.0
    } else {
        let t = s / eps;
        6.0 * t * (1.0 - t) / eps
    }
}

/// Relative level `σ` such that the sharp free boundary of the relaxed
/// problem sits on `{u = σ ε}`.
///
/// Across a flat interface the relaxed minimizer obeys the first integral
/// `G(u'²) = λ H_ε(u)`, so `u' = Λ(λ H(u/ε))` with `Λ = lambda_star(F, ·)`.
/// Continuing the outer profile `u' = Λ(λ)` linearly to zero lands on the
/// level `σ ε` with `∫_σ^1 dt / Λ(λ H(t)) = 1 / Λ(λ)`.
pub fn interface_level(density: &Density, lambda: f64) -> Result<f64> {
    let outer = lambda_star(density, lambda)?;
    if outer == 0.0 {
        return Ok(0.0);
    }
    let target = 1.0 / outer;
    let slope = |t: f64| lambda_star(density, lambda * heaviside(t, 1.0));
    // substitution t = e^s removes the 1/t growth at the lower end
    let integral = |sigma: f64| -> Result<f64> {
        let (a, b) = (sigma.ln(), 0.0);
        let n = 256;
        let step = (b - a) / n as f64;
        let mut acc = 0.0;
        for k in 0..=n {
            let s = a + step * k as f64;
            let t = s.exp();
            let w = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += w * t / slope(t)?;
        }
        Ok(acc * step / 3.0)
    };
    let (mut lo, mut hi) = (1e-8_f64, 1.0_f64);
    for _ in 0..60 {
        let mid = (lo * hi).sqrt();
        if integral(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heaviside_shape() {
        assert_eq!(heaviside(-1.0, 0.1), 0.0);
        assert_eq!(heaviside(0.2, 0.1), 1.0);
        assert!((heaviside(0.05, 0.1) - 0.5).abs() < 1e-15);
        let (s, e, d) = (0.03, 0.1, 1e-7);
        let fd = (heaviside(s + d, e) - heaviside(s - d, e)) / (2.0 * d);
        assert!((fd - heaviside_d(s, e)).abs() < 1e-6);
    }

    #[test]
    fn linear_level_matches_closed_form() {
        // ∫_σ^1 dt / (t √(3 − 2t)) = 1 gives, with v = √(3 − 2σ),
        // ln((√3 + v)/(√3 − v)) = √3 + ln((√3 + 1)/(√3 − 1)).
        let r3 = 3f64.sqrt();
        let rhs = r3 + ((r3 + 1.0) / (r3 - 1.0)).ln();
        let q = rhs.exp();
        let v = r3 * (q - 1.0) / (q + 1.0);
        let sigma = (3.0 - v * v) / 2.0;
        let got = interface_level(&Density::Linear, 1.0).unwrap();
        assert!((got - sigma).abs() < 1e-7, "{got} vs {sigma}");
        assert!((sigma - 0.2592).abs() < 1e-3);
        // λ-independent for linear F
        assert!((interface_level(&Density::Linear, 2.5).unwrap() - sigma).abs() < 1e-7);
    }

    #[test]
    fn perturbed_level_differs() {
        let s = interface_level(&Density::perturbed(0.5).unwrap(), 1.0).unwrap();
        assert!(s > 0.0 && s < 1.0);
        assert!((s - interface_level(&Density::Linear, 1.0).unwrap()).abs() > 1e-4);
    }
}
