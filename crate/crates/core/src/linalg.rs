//! Small dense complex linear algebra on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn sigma_x() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn sigma_y() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn sigma_z() -> CMat {
    CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// `cos φ·σ_X + sin φ·σ_Y`.
pub fn sigma_xy(phi: f64) -> CMat {
    sigma_x() * c(phi.cos(), 0.0) + sigma_y() * c(phi.sin(), 0.0)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Block-diagonal sum `a ⊕ b`.
pub fn direct_sum(a: &CMat, b: &CMat) -> CMat {
    let n = a.nrows() + b.nrows();
    let m = a.ncols() + b.ncols();
    let mut out = CMat::zeros(n, m);
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), (b.nrows(), b.ncols())).copy_from(b);
    out
}

pub fn trace(a: &CMat) -> Complex64 {
    a.diagonal().iter().sum()
}

/// Largest singular value.
pub fn op_norm(a: &CMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().max()
}

/// Entrywise max-abs distance.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_hermitian(a: &CMat, tol: f64) -> bool {
    a.is_square() && max_abs_diff(a, &a.adjoint()) <= tol
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    let sym = (a + a.adjoint()) * c(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<_>>());
    (values, vectors)
}

/// `f(A)` for Hermitian `A`, applied through its spectral decomposition.
pub fn hermitian_apply(a: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(a);
    let diag = CMat::from_diagonal(&CVec::from_iterator(vals.len(), vals.iter().map(|&v| c(f(v), 0.0))));
    &vecs * diag * vecs.adjoint()
}

/// Principal square root of a PSD matrix; tiny negative eigenvalues are clamped.
pub fn psd_sqrt(a: &CMat) -> CMat {
    hermitian_apply(a, |v| v.max(0.0).sqrt())
}

/// Sign of a Hermitian matrix (zero eigenvalues mapped to +1); turns a
/// perturbed observable back into one with square identity.
pub fn matrix_sign(a: &CMat) -> CMat {
    hermitian_apply(a, |v| if v >= 0.0 { 1.0 } else { -1.0 })
}

/// `‖A‖₁` for Hermitian `A`.
pub fn trace_norm_hermitian(a: &CMat) -> f64 {
    hermitian_eigen(a).0.iter().map(|v| v.abs()).sum()
}

pub fn outer(v: &CVec) -> CMat {
    v * v.adjoint()
}

/// Multiplies `v` by the unit phase that makes its first non-negligible entry real and positive.
pub fn canonical_phase(v: &CVec) -> CVec {
    match v.iter().find(|z| z.norm() > 1e-12) {
        Some(z) => v * (z.conj() / z.norm()),
        None => v.clone(),
    }
}

/// Haar-random unitary via QR of a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(d, d, |_, _| c(standard_normal(rng), standard_normal(rng)));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // fix the phases of R's diagonal so the distribution is Haar
    let phases = CMat::from_diagonal(&CVec::from_iterator(
        d,
        (0..d).map(|i| {
            let z = r[(i, i)];
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                ONE
            }
        }),
    ));
    q * phases
}

/// Random pure state of dimension `d`.
pub fn random_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVec {
    let v = CVec::from_fn(d, |_, _| c(standard_normal(rng), standard_normal(rng)));
    let n = v.norm();
    v / c(n, 0.0)
}

/// Random full-rank density matrix `GG†/Tr(GG†)`.
pub fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(d, d, |_, _| c(standard_normal(rng), standard_normal(rng)));
    let m = &g * g.adjoint();
    let t = trace(&m).re;
    m / c(t, 0.0)
}

/// Random binary observable `U·diag(±1)·U†` with `k` eigenvalues equal to +1.
pub fn random_observable<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> CMat {
    let u = random_unitary(d, rng);
    let diag = CMat::from_diagonal(&CVec::from_iterator(d, (0..d).map(|i| if i < k { ONE } else { -ONE })));
    &u * diag * u.adjoint()
}

/// Random Hermitian matrix with operator norm 1.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(d, d, |_, _| c(standard_normal(rng), standard_normal(rng)));
    let h = (&g + g.adjoint()) * c(0.5, 0.0);
    let n = op_norm(&h);
    h / c(n, 0.0)
}

fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn paulis_anticommute() {
        let (x, y, z) = (sigma_x(), sigma_y(), sigma_z());
        assert!(max_abs_diff(&(&x * &y + &y * &x), &CMat::zeros(2, 2)) < 1e-15);
        assert!(max_abs_diff(&(&x * &y), &(&z * I)) < 1e-15);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for d in [2, 4, 8] {
            let u = random_unitary(d, &mut rng);
            assert!(max_abs_diff(&(u.adjoint() * &u), &identity(d)) < 1e-12);
        }
    }

    #[test]
    fn sign_and_sqrt() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let o = random_observable(4, 2, &mut rng);
        assert!(max_abs_diff(&(&o * &o), &identity(4)) < 1e-12);
        assert!(max_abs_diff(&matrix_sign(&o), &o) < 1e-12);
        let rho = random_density(3, &mut rng);
        let s = psd_sqrt(&rho);
        assert!(max_abs_diff(&(&s * &s), &rho) < 1e-12);
    }
}
