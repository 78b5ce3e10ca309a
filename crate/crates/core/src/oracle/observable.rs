use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, OracleError};
use crate::scalar::Real;

/// Entrywise tolerances used when validating observables and states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T> {
    pub hermitian: T,
    pub trace: T,
    pub square: T,
    pub norm: T,
}

impl<T: Real> Tolerances<T> {
    /// `1e-9` everywhere, raised to what the scalar type can resolve.
    pub fn standard() -> Self {
        Self::uniform(T::lit(1e-9))
    }

    pub fn uniform(tol: T) -> Self {
        let tol = tol.max(T::resolvable_tolerance());
        Self {
            hermitian: tol,
            trace: tol,
            square: tol,
            norm: tol,
        }
    }
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Self::standard()
    }
}

/// Hermitian, traceless involution: a two-outcome observable with
/// outcomes ±1 that are equally likely on the maximally mixed state.
#[derive(Debug, Clone, PartialEq)]
pub struct TracelessBinaryObservable<T> {
    matrix: ComplexMatrix<T>,
}

impl<T: Real> TracelessBinaryObservable<T> {
    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }

    pub fn pauli_x() -> Self {
        let (o, l) = (
            Complex::new(T::zero(), T::zero()),
            Complex::new(T::one(), T::zero()),
        );
        Self {
            matrix: ComplexMatrix::new(2, vec![o, l, l, o]).expect("2x2"),
        }
    }

    pub fn pauli_y() -> Self {
        let o = Complex::new(T::zero(), T::zero());
        let i = Complex::new(T::zero(), T::one());
        Self {
            matrix: ComplexMatrix::new(2, vec![o, -i, i, o]).expect("2x2"),
        }
    }

    pub fn pauli_z() -> Self {
        Self {
            matrix: ComplexMatrix::from_real_diagonal(&[T::one(), -T::one()]),
        }
    }
}

/// Checks the defining properties in order: Hermitian, traceless, squares
/// to the identity, even dimension.
pub fn validate_tbo<T: Real>(
    matrix: ComplexMatrix<T>,
    tol: &Tolerances<T>,
) -> Result<TracelessBinaryObservable<T>, OracleError> {
    let d = matrix.dim();

    let herm_dev = matrix.max_abs_diff(&matrix.adjoint())?.to_f64_lossy();
    if herm_dev.is_nan() || herm_dev > tol.hermitian.to_f64_lossy() {
        return Err(OracleError::NotHermitian {
            deviation: herm_dev,
        });
    }

    let trace = matrix.trace().norm().to_f64_lossy();
    if trace.is_nan() || trace > tol.trace.to_f64_lossy() {
        return Err(OracleError::NotTraceless { trace });
    }

    let square = matrix.matmul(&matrix)?;
    let sq_dev = square
        .max_abs_diff(&ComplexMatrix::identity(d))?
        .to_f64_lossy();
    if sq_dev.is_nan() || sq_dev > tol.square.to_f64_lossy() {
        return Err(OracleError::NotInvolutory { deviation: sq_dev });
    }

    if d % 2 == 1 {
        return Err(OracleError::OddDimension { dim: d });
    }
    Ok(TracelessBinaryObservable { matrix })
}

/// Haar-distributed unitary: modified Gram-Schmidt on the columns of a
/// complex Ginibre matrix. Gram-Schmidt yields the QR factor whose `R` has a
/// positive real diagonal, which is the phase fix that makes `Q` exactly Haar.
pub fn haar_unitary<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix<T> {
    let half = T::lit(0.5).sqrt();
    loop {
        let mut cols: Vec<Vec<Complex<T>>> = (0..dim)
            .map(|_| {
                (0..dim)
                    .map(|_| {
                        Complex::new(
                            T::sample_standard_normal(rng) * half,
                            T::sample_standard_normal(rng) * half,
                        )
                    })
                    .collect()
            })
            .collect();

        let mut degenerate = false;
        for k in 0..dim {
            let (done, rest) = cols.split_at_mut(k);
            let col = &mut rest[0];
            for q in done.iter() {
                let proj: Complex<T> = q.iter().zip(col.iter()).map(|(a, b)| a.conj() * b).sum();
                for (c, qa) in col.iter_mut().zip(q) {
                    *c -= qa * proj;
                }
            }
            let norm = col.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
            if norm <= T::epsilon() {
                degenerate = true;
                break;
            }
            for c in col.iter_mut() {
                *c /= norm;
            }
        }
        if degenerate {
            continue;
        }

        let mut u = ComplexMatrix::zeros(dim);
        for (c, col) in cols.iter().enumerate() {
            for (r, &z) in col.iter().enumerate() {
                u.set(r, c, z);
            }
        }
        return u;
    }
}

/// `U diag(+1 ×d/2, −1 ×d/2) U†` with Haar `U`.
pub fn random_tbo<T: Real, R: Rng + ?Sized>(
    dim: usize,
    rng: &mut R,
) -> Result<TracelessBinaryObservable<T>, OracleError> {
    if dim == 0 || dim % 2 == 1 {
        return Err(OracleError::OddDimension { dim });
    }
    let signs: Vec<T> = (0..dim)
        .map(|k| if k < dim / 2 { T::one() } else { -T::one() })
        .collect();
    let u = haar_unitary::<T, R>(dim, rng);
    let m = u
        .matmul(&ComplexMatrix::from_real_diagonal(&signs))?
        .matmul(&u.adjoint())?;
    // Re-symmetrise to remove rounding asymmetry.
    let m = m.add(&m.adjoint())?.scale(T::lit(0.5));
    validate_tbo(m, &Tolerances::standard())
}

impl<T: Real + Serialize> Serialize for TracelessBinaryObservable<T> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.matrix.serialize(serializer)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for TracelessBinaryObservable<T> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let m = ComplexMatrix::<T>::deserialize(deserializer)?;
        validate_tbo(m, &Tolerances::standard()).map_err(serde::de::Error::custom)
    }
}
