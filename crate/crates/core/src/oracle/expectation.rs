use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, OracleError, PureBipartiteState, TracelessBinaryObservable};
use crate::scalar::Real;
use crate::sphere::UnitVector;

/// Which subsystem an observable acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Alice,
    Bob,
}

/// Point on `S_{2d²−1}` produced by [`tsirelson_embed`].
pub type EmbeddedVector<T> = UnitVector<T>;

fn check_dims<T: Real>(
    state: &PureBipartiteState<T>,
    obs: &TracelessBinaryObservable<T>,
) -> Result<(), OracleError> {
    if state.dim() != obs.dim() {
        return Err(OracleError::DimensionMismatch {
            expected: state.dim(),
            found: obs.dim(),
        });
    }
    Ok(())
}

/// Raw `⟨ψ|(A⊗B)|ψ⟩` built from the explicit `d²×d²` Kronecker product.
pub fn joint_expectation_raw<T: Real>(
    state: &PureBipartiteState<T>,
    alice: &TracelessBinaryObservable<T>,
    bob: &TracelessBinaryObservable<T>,
) -> Result<Complex<T>, OracleError> {
    check_dims(state, alice)?;
    check_dims(state, bob)?;
    let op = alice.matrix().kron(bob.matrix());
    let psi = state.amplitudes();
    let applied = op.mul_vec(psi)?;
    Ok(psi.iter().zip(&applied).map(|(a, b)| a.conj() * b).sum())
}

/// `E(AB) = ⟨ψ|(A⊗B)|ψ⟩`, clamped to `[-1, 1]`.
pub fn joint_expectation<T: Real>(
    state: &PureBipartiteState<T>,
    alice: &TracelessBinaryObservable<T>,
    bob: &TracelessBinaryObservable<T>,
) -> Result<T, OracleError> {
    let raw = joint_expectation_raw(state, alice, bob)?;
    Ok(raw.re.max(-T::one()).min(T::one()))
}

/// `⟨ψ|(T⊗I)|ψ⟩` or `⟨ψ|(I⊗T)|ψ⟩`.
pub fn marginal_expectation<T: Real>(
    state: &PureBipartiteState<T>,
    obs: &TracelessBinaryObservable<T>,
    side: Side,
) -> Result<T, OracleError> {
    check_dims(state, obs)?;
    let id = ComplexMatrix::identity(state.dim());
    let op = match side {
        Side::Alice => obs.matrix().kron(&id),
        Side::Bob => id.kron(obs.matrix()),
    };
    let psi = state.amplitudes();
    let applied = op.mul_vec(psi)?;
    let v: Complex<T> = psi.iter().zip(&applied).map(|(a, b)| a.conj() * b).sum();
    Ok(v.re.max(-T::one()).min(T::one()))
}

/// `(T⊗I)|ψ⟩` or `(I⊗T)|ψ⟩`, applying the factor without forming the
/// Kronecker product.
pub fn apply_local<T: Real>(
    state: &PureBipartiteState<T>,
    obs: &TracelessBinaryObservable<T>,
    side: Side,
) -> Result<Vec<Complex<T>>, OracleError> {
    check_dims(state, obs)?;
    let d = state.dim();
    let psi = state.amplitudes();
    let m = obs.matrix();
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = vec![zero; d * d];
    match side {
        Side::Alice => {
            for i in 0..d {
                for j in 0..d {
                    let mij = m.get(i, j);
                    for b in 0..d {
                        out[d * i + b] += mij * psi[d * j + b];
                    }
                }
            }
        }
        Side::Bob => {
            for a in 0..d {
                for i in 0..d {
                    out[d * a + i] = (0..d).map(|j| m.get(i, j) * psi[d * a + j]).sum();
                }
            }
        }
    }
    Ok(out)
}

/// Maps an observable to a unit vector in `R^{2d²}` such that, for the same
/// state, `ν_A(A)·ν_B(B) = ⟨ψ|A⊗B|ψ⟩`.
///
/// The vector is the local action on the state, `(T⊗I)|ψ⟩` or `(I⊗T)|ψ⟩`,
/// written as all real parts followed by all imaginary parts. Its Euclidean
/// dot product is `Re⟨u, v⟩`, and since both factors are Hermitian,
/// `⟨(A⊗I)ψ, (I⊗B)ψ⟩ = ⟨ψ|A⊗B|ψ⟩`, which is real. The norm is
/// `⟨ψ|T²⊗I|ψ⟩ = 1`.
pub fn tsirelson_embed<T: Real>(
    state: &PureBipartiteState<T>,
    obs: &TracelessBinaryObservable<T>,
    side: Side,
) -> Result<EmbeddedVector<T>, OracleError> {
    let u = apply_local(state, obs, side)?;
    let coords: Vec<T> = u
        .iter()
        .map(|z| z.re)
        .chain(u.iter().map(|z| z.im))
        .collect();
    Ok(UnitVector::new(coords)?)
}
