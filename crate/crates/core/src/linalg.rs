//! Column-stacking `vec` operator and the Kronecker product.
//!
//! Conventions match the identity `vec(A Σ B) = (Bᵀ ⊗ A) vec(Σ)`, which the
//! weighted-variance recursion in [`crate::theory`] relies on.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Stacks the columns of `m` into a single vector.
pub fn vec(m: &DMatrix<f64>) -> DVector<f64> {
    // nalgebra storage is column-major, so the raw slice is already vec(m).
    DVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vec`] for an `n x n` matrix.
pub fn unvec(v: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = (v.len() as f64).sqrt().round() as usize;
    if n * n != v.len() {
        return Err(Error::InvalidArgument(format!(
            "vector of length {} is not vec of a square matrix",
            v.len()
        )));
    }
    Ok(DMatrix::from_column_slice(n, n, v.as_slice()))
}

/// Kronecker product: block `(i, j)` of the result is `a[(i, j)] * b`.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = DMatrix::zeros(ar * br, ac * bc);
    for j in 0..ac {
        for i in 0..ar {
            let aij = a[(i, j)];
            if aij == 0.0 {
                continue;
            }
            out.view_mut((i * br, j * bc), (br, bc))
                .zip_apply(b, |o, x| *o = aij * x);
        }
    }
    out
}

/// `(m + mᵀ) / 2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Entry-wise max absolute value.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn vec_of_identity() {
        let v = vec(&DMatrix::identity(2, 2));
        assert_eq!(v.as_slice(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn vec_stacks_columns() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(vec(&m).as_slice(), &[1.0, 3.0, 2.0, 4.0]);
        assert_eq!(unvec(&vec(&m)).unwrap(), m);
    }

    #[test]
    fn unvec_rejects_non_square_length() {
        assert!(unvec(&DVector::zeros(5)).is_err());
    }

    #[test]
    fn kron_with_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = random(&mut rng, 2, 3);
        let k = kron(&DMatrix::identity(2, 2), &b);
        assert_eq!(k.view((0, 0), (2, 3)), b.view((0, 0), (2, 3)));
        assert_eq!(k.view((2, 3), (2, 3)), b.view((0, 0), (2, 3)));
        assert!(k.view((0, 3), (2, 3)).iter().all(|&x| x == 0.0));
        assert!(k.view((2, 0), (2, 3)).iter().all(|&x| x == 0.0));

        let a = random(&mut rng, 3, 2);
        assert_eq!(kron(&a, &DMatrix::identity(1, 1)), a);
    }

    #[test]
    fn kron_mixed_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (a, b, c, d) = (
            random(&mut rng, 2, 2),
            random(&mut rng, 2, 2),
            random(&mut rng, 2, 2),
            random(&mut rng, 2, 2),
        );
        let lhs = kron(&a, &b) * kron(&c, &d);
        let rhs = kron(&(&a * &c), &(&b * &d));
        assert!(max_abs(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn vec_kron_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [3, 4] {
            let (a, s, b) = (
                random(&mut rng, n, n),
                random(&mut rng, n, n),
                random(&mut rng, n, n),
            );
            let lhs = vec(&(&a * &s * &b));
            let rhs = kron(&b.transpose(), &a) * vec(&s);
            assert!((lhs - rhs).amax() < 1e-12);
        }
    }
}
