//! Small dense complex linear algebra on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// σ_x, σ_y, σ_z.
pub fn pauli() -> [CMatrix; 3] {
    [
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    ]
}

/// v·σ for a real 3-vector.
pub fn bloch(v: [f64; 3]) -> CMatrix {
    let [x, y, z] = pauli();
    x * c(v[0], 0.0) + y * c(v[1], 0.0) + z * c(v[2], 0.0)
}

/// |ψ⟩⟨ψ|.
pub fn outer(psi: &CVector) -> CMatrix {
    psi * psi.adjoint()
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().sum()
}

/// Tr[AB] without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// columns are the eigenvectors
    pub vectors: CMatrix,
}

/// Eigendecomposition of the Hermitian part of `m`.
///
/// Panics if the residual ‖Hv − λv‖ exceeds 1e-8‖H‖, which would mean the
/// solver failed to converge.
pub fn hermitian_eigen(m: &CMatrix) -> Eigen {
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    let scale = h.norm().max(1.0);
    for (k, &lambda) in values.iter().enumerate() {
        let v = vectors.column(k);
        let residual = (&h * v - v * c(lambda, 0.0)).norm();
        assert!(
            residual <= 1e-8 * scale,
            "eigensolver residual {residual:e} for a matrix of norm {scale:e}"
        );
    }
    Eigen { values, vectors }
}

/// Projector onto the eigenspace with eigenvalue > `threshold`, and the sum
/// of those eigenvalues.
pub fn positive_part(m: &CMatrix, threshold: f64) -> (CMatrix, f64) {
    let eig = hermitian_eigen(m);
    let d = m.nrows();
    let mut proj = CMatrix::zeros(d, d);
    let mut sum = 0.0;
    for (k, &lambda) in eig.values.iter().enumerate() {
        if lambda > threshold {
            let v = eig.vectors.column(k);
            proj += v * v.adjoint();
            sum += lambda;
        }
    }
    (proj, sum)
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen(m).values[0]
}

/// Top eigenvalue and a unit eigenvector for it.
pub fn top_eigenpair(m: &CMatrix) -> (f64, CVector) {
    let eig = hermitian_eigen(m);
    let k = eig.values.len() - 1;
    (eig.values[k], eig.vectors.column(k).into_owned())
}
