use super::{ln_gamma, GeometryError};
use crate::scalar::Real;

/// `ln S_n`, where `S_n` is the area of the unit sphere in `R^{n+1}`.
pub fn ln_surface_area<T: Real>(n: usize) -> T {
    let half_np1 = T::from_usize_lossy(n + 1) / T::lit(2.0);
    T::lit(2.0).ln() + half_np1 * T::PI().ln() - ln_gamma(half_np1)
}

/// `S_n = 2π^{(n+1)/2} / Γ((n+1)/2)`, evaluated in log space.
pub fn surface_area<T: Real>(n: usize) -> T {
    ln_surface_area::<T>(n).exp()
}

fn positive(n: usize) -> Result<(), GeometryError> {
    if n == 0 {
        Err(GeometryError::NonpositiveDimension)
    } else {
        Ok(())
    }
}

/// `R_n = (2/n) S_{n−1}`: the integral of `|b·λ|` over `S_n` for any unit `b`.
pub fn normalization_r<T: Real>(n: usize) -> Result<T, GeometryError> {
    positive(n)?;
    Ok(T::lit(2.0) / T::from_usize_lossy(n) * surface_area::<T>(n - 1))
}

/// `Γ((n+1)/2) / Γ(n/2)`.
pub fn half_gamma_ratio<T: Real>(n: usize) -> Result<T, GeometryError> {
    positive(n)?;
    let nf = T::from_usize_lossy(n);
    let two = T::lit(2.0);
    Ok((ln_gamma((nf + T::one()) / two) - ln_gamma(nf / two)).exp())
}

/// Probability that one uniform `λ` on `S_n` is accepted with probability
/// `|a·λ|`: `R_n / S_n = (2/(n√π)) Γ((n+1)/2)/Γ(n/2)`.
pub fn acceptance_probability<T: Real>(n: usize) -> Result<T, GeometryError> {
    let ratio = half_gamma_ratio::<T>(n)?;
    let nf = T::from_usize_lossy(n);
    Ok(T::lit(2.0) / (nf * T::PI().sqrt()) * ratio)
}

/// `(√(1/(2πn)), √(2/(πn)))`, the closed-form bracket on the acceptance
/// probability.
pub fn acceptance_bounds<T: Real>(n: usize) -> Result<(T, T), GeometryError> {
    positive(n)?;
    let pn = T::PI() * T::from_usize_lossy(n);
    Ok((
        (T::one() / (T::lit(2.0) * pn)).sqrt(),
        (T::lit(2.0) / pn).sqrt(),
    ))
}

/// `P(i) = (1−p)^{i−1} p` for `i ≥ 1`.
pub fn geometric_pmf<T: Real>(p: T, i: u64) -> T {
    if i == 0 {
        return T::zero();
    }
    let exp = T::from_u64(i - 1).expect("u64 representable");
    (T::one() - p).powf(exp) * p
}

/// Shannon entropy in bits of the geometric law with success probability `p`:
/// `log₂(1/p) + ((1−p)/p) log₂(1/(1−p))`.
pub fn geometric_entropy<T: Real>(p: T) -> Result<T, GeometryError> {
    if !(p > T::zero() && p < T::one()) {
        return Err(GeometryError::OutOfRange {
            value: p.to_f64_lossy(),
        });
    }
    let q = T::one() - p;
    Ok(-p.log2() - q / p * q.log2())
}
