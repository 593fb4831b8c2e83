//! Special functions needed by the LogNormal and Gamma severities.
//!
//! Evaluated in double precision and cast back to the working scalar.

use statrs::function::gamma;

use crate::scalar::Real;

/// Standard normal cdf Φ(x), via `erfc` so the lower tail keeps full
/// relative precision. Uses the musl `erfc`, which is accurate to about one ulp.
pub fn std_normal_cdf<T: Real>(x: T) -> T {
    let x = x.to_f64_lossy();
    T::lit(0.5 * libm::erfc(-x / std::f64::consts::SQRT_2))
}

/// Regularized upper incomplete gamma Q(a, x) = Γ(a, x)/Γ(a).
pub fn gamma_q<T: Real>(a: T, x: T) -> T {
    let (a, x) = (a.to_f64_lossy(), x.to_f64_lossy());
    if x <= 0.0 {
        return T::one();
    }
    T::lit(gamma::gamma_ur(a, x))
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p<T: Real>(a: T, x: T) -> T {
    let (a, x) = (a.to_f64_lossy(), x.to_f64_lossy());
    if x <= 0.0 {
        return T::zero();
    }
    T::lit(gamma::gamma_lr(a, x))
}
