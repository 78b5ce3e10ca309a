use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::OracleError;
use crate::scalar::Real;

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    dim: usize,
    entries: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn new(dim: usize, entries: Vec<Complex<T>>) -> Result<Self, OracleError> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(OracleError::ShapeMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(Self { dim, entries })
    }

    /// Builds a matrix from separate real and imaginary row arrays.
    pub fn from_parts(re: &[Vec<T>], im: &[Vec<T>]) -> Result<Self, OracleError> {
        let dim = re.len();
        let ragged = re.iter().chain(im.iter()).find(|row| row.len() != dim);
        if im.len() != dim || ragged.is_some() {
            return Err(OracleError::ShapeMismatch {
                expected: dim * dim,
                found: re.iter().chain(im.iter()).map(Vec::len).sum::<usize>() / 2,
            });
        }
        let entries = re
            .iter()
            .zip(im)
            .flat_map(|(r, i)| r.iter().zip(i).map(|(&a, &b)| Complex::new(a, b)))
            .collect();
        Self::new(dim, entries)
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let dim = diag.len();
        let mut m = Self::zeros(dim);
        for (k, &v) in diag.iter().enumerate() {
            m.entries[k * dim + k] = Complex::new(v, T::zero());
        }
        m
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![Complex::new(T::zero(), T::zero()); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_real_diagonal(&vec![T::one(); dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.entries[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex<T>) {
        self.entries[row * self.dim + col] = value;
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for r in 0..d {
            for c in 0..d {
                out.entries[c * d + r] = self.entries[r * d + c].conj();
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self, OracleError> {
        self.check_dim(rhs.dim)?;
        let d = self.dim;
        let mut out = Self::zeros(d);
        for r in 0..d {
            for k in 0..d {
                let lhs = self.entries[r * d + k];
                for c in 0..d {
                    out.entries[r * d + c] += lhs * rhs.entries[k * d + c];
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, factor: T) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, OracleError> {
        self.check_dim(rhs.dim)?;
        Ok(Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).map(|k| self.get(k, k)).sum()
    }

    /// Largest entrywise modulus of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> Result<T, OracleError> {
        self.check_dim(rhs.dim)?;
        Ok(self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max))
    }

    /// `self ⊗ rhs` with the left factor's index major.
    pub fn kron(&self, rhs: &Self) -> ComplexMatrix<T> {
        let (p, q) = (self.dim, rhs.dim);
        let dim = p * q;
        let mut out = Self::zeros(dim);
        for i in 0..p {
            for j in 0..p {
                let s = self.get(i, j);
                for k in 0..q {
                    for l in 0..q {
                        out.entries[(i * q + k) * dim + (j * q + l)] = s * rhs.get(k, l);
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Result<Vec<Complex<T>>, OracleError> {
        self.check_dim(v.len())?;
        let d = self.dim;
        Ok((0..d)
            .map(|r| {
                self.entries[r * d..(r + 1) * d]
                    .iter()
                    .zip(v)
                    .map(|(m, x)| m * x)
                    .sum()
            })
            .collect())
    }

    fn check_dim(&self, other: usize) -> Result<(), OracleError> {
        if self.dim == other {
            Ok(())
        } else {
            Err(OracleError::DimensionMismatch {
                expected: self.dim,
                found: other,
            })
        }
    }

    pub fn to_document(&self) -> MatrixDocument<T> {
        let d = self.dim;
        let rows = |f: fn(&Complex<T>) -> T| {
            (0..d)
                .map(|r| self.entries[r * d..(r + 1) * d].iter().map(f).collect())
                .collect()
        };
        MatrixDocument {
            dim: d,
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }
}

/// JSON shape of a matrix: `{"dim": d, "re": [[..]..], "im": [[..]..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDocument<T> {
    pub dim: usize,
    pub re: Vec<Vec<T>>,
    pub im: Vec<Vec<T>>,
}

impl<T: Real> TryFrom<MatrixDocument<T>> for ComplexMatrix<T> {
    type Error = OracleError;

    fn try_from(doc: MatrixDocument<T>) -> Result<Self, Self::Error> {
        let m = Self::from_parts(&doc.re, &doc.im)?;
        if m.dim != doc.dim {
            return Err(OracleError::DimensionMismatch {
                expected: doc.dim,
                found: m.dim,
            });
        }
        Ok(m)
    }
}

impl<T: Real + Serialize> Serialize for ComplexMatrix<T> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_document().serialize(serializer)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for ComplexMatrix<T> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = MatrixDocument::<T>::deserialize(deserializer)?;
        Self::try_from(doc).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn rejects_wrong_entry_count() {
        let err = ComplexMatrix::<f64>::new(2, vec![c(1.0, 0.0); 3]).unwrap_err();
        assert!(matches!(
            err,
            OracleError::ShapeMismatch {
                expected: 4,
                found: 3
            }
        ));
    }

    #[test]
    fn ragged_parts_rejected() {
        let re = vec![vec![1.0, 0.0], vec![0.0]];
        let im = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        assert!(ComplexMatrix::from_parts(&re, &im).is_err());
    }

    #[test]
    fn kron_is_alice_major() {
        let a = ComplexMatrix::new(2, vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)])
            .unwrap();
        let b = ComplexMatrix::new(2, vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        let k = a.kron(&b);
        // block (0,1) is 2*b
        assert_eq!(k.get(0, 3), c(2.0, 0.0));
        assert_eq!(k.get(1, 2), c(2.0, 0.0));
        assert_eq!(k.get(3, 0), c(3.0, 0.0));
        assert_eq!(k.get(0, 0), c(0.0, 0.0));
    }

    #[test]
    fn adjoint_and_trace() {
        let m = ComplexMatrix::new(
            2,
            vec![c(1.0, 1.0), c(2.0, -1.0), c(0.0, 3.0), c(-1.0, 0.0)],
        )
        .unwrap();
        let a = m.adjoint();
        assert_eq!(a.get(0, 1), c(0.0, -3.0));
        assert_eq!(a.get(1, 0), c(2.0, 1.0));
        assert_eq!(m.trace(), c(0.0, 1.0));
    }

    #[test]
    fn json_document_shape() {
        let m = ComplexMatrix::new(
            2,
            vec![c(1.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(-1.0, 0.0)],
        )
        .unwrap();
        let json = serde_json::to_value(&m).unwrap();
        assert_eq!(json["dim"], 2);
        assert_eq!(json["re"], serde_json::json!([[1.0, 0.0], [0.0, -1.0]]));
        assert_eq!(json["im"], serde_json::json!([[0.0, -1.0], [1.0, 0.0]]));
        let back: ComplexMatrix<f64> = serde_json::from_value(json).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn json_dim_must_agree() {
        let doc = serde_json::json!({"dim": 3, "re": [[1.0, 0.0], [0.0, 1.0]], "im": [[0.0, 0.0], [0.0, 0.0]]});
        assert!(serde_json::from_value::<ComplexMatrix<f64>>(doc).is_err());
    }
}
