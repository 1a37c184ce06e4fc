//! Dense complex linear algebra and a small subspace calculus.
//!
//! Everything here works on [`ComplexMatrix`] values and a single
//! [`TolerancePolicy`]. Subspaces are carried by orthonormal column bases, so
//! sums, intersections and complements all reduce to singular value
//! decompositions with the same rank cutoff.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense complex matrix. Column-major storage, row-major semantics at the
/// serialization boundary.
pub type ComplexMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Numerical thresholds shared by every rank decision and operator identity
/// check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    /// Relative singular-value cutoff used for rank decisions.
    pub rank_rtol: f64,
    /// Absolute residual tolerance for operator identities.
    pub eq_atol: f64,
}

impl TolerancePolicy {
    pub const DEFAULT: TolerancePolicy = TolerancePolicy {
        rank_rtol: 1e-10,
        eq_atol: 1e-8,
    };

    pub fn new(rank_rtol: f64, eq_atol: f64) -> Result<Self> {
        let pol = TolerancePolicy { rank_rtol, eq_atol };
        pol.validate()?;
        Ok(pol)
    }

    pub fn validate(&self) -> Result<()> {
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        if !open_unit(self.rank_rtol) || !open_unit(self.eq_atol) {
            return Err(Error::InvalidInput(format!(
                "tolerances must lie in (0, 1), got rank_rtol={} eq_atol={}",
                self.rank_rtol, self.eq_atol
            )));
        }
        Ok(())
    }

    /// Absolute singular-value cutoff for a matrix of the given shape.
    pub fn rank_cutoff(&self, sigma_max: f64, rows: usize, cols: usize) -> f64 {
        self.rank_rtol * sigma_max * rows.max(cols) as f64
    }
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self::DEFAULT
    }
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(rows, cols)
}

/// Build a matrix from row-major real entries.
pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> ComplexMatrix {
    assert_eq!(entries.len(), rows * cols);
    ComplexMatrix::from_row_iterator(rows, cols, entries.iter().map(|&x| re(x)))
}

pub fn diag(entries: &[Complex64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&DVector::from_column_slice(entries))
}

/// Standard basis vector `e_index` of `C^dim` as a column.
pub fn basis_vector(dim: usize, index: usize) -> ComplexMatrix {
    let mut v = zeros(dim, 1);
    v[(index, 0)] = ONE;
    v
}

pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Block diagonal matrix with the given square or rectangular blocks.
pub fn block_diag(blocks: &[&ComplexMatrix]) -> ComplexMatrix {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(*b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Horizontal concatenation; all parts must share the row count.
pub fn hstack(parts: &[&ComplexMatrix], rows: usize) -> ComplexMatrix {
    let cols = parts.iter().map(|p| p.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut c = 0;
    for p in parts {
        debug_assert_eq!(p.nrows(), rows);
        out.view_mut((0, c), (rows, p.ncols())).copy_from(*p);
        c += p.ncols();
    }
    out
}

/// Vertical concatenation; all parts must share the column count.
pub fn vstack(parts: &[&ComplexMatrix], cols: usize) -> ComplexMatrix {
    let rows = parts.iter().map(|p| p.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut r = 0;
    for p in parts {
        debug_assert_eq!(p.ncols(), cols);
        out.view_mut((r, 0), (p.nrows(), cols)).copy_from(*p);
        r += p.nrows();
    }
    out
}

/// Thin singular value decomposition `A = U diag(sigma) V*` with `sigma`
/// descending, `U` of size `m × r`, `V` of size `n × r`, `r = min(m, n)`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub v: ComplexMatrix,
}

/// One-sided Jacobi (Hestenes) SVD.
///
/// nalgebra's complex SVD can return an inaccurate factorization on
/// rank-deficient inputs, which corrupts every subspace computed from it;
/// Jacobi rotations are slower but accurate to a small multiple of machine
/// precision relative to each singular value.
pub fn svd(a: &ComplexMatrix) -> Svd {
    let (m, n) = a.shape();
    if m < n {
        let t = svd(&a.adjoint());
        return Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        };
    }
    let mut w = a.clone();
    let mut v = identity(n);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dotc(&w.column(q));
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = c * t;
                for mat in [&mut w, &mut v] {
                    for i in 0..mat.nrows() {
                        let x = mat[(i, p)];
                        let y = mat[(i, q)] * phase.conj();
                        mat[(i, p)] = x * c - y * sn;
                        mat[(i, q)] = x * sn + y * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(f64, usize)> = (0..n).map(|j| (w.column(j).norm(), j)).collect();
    order.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut u = zeros(m, n);
    let mut v_sorted = zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for (dst, &(s, src)) in order.iter().enumerate() {
        sigma.push(s);
        if s > 0.0 {
            u.set_column(dst, &(w.column(src) / re(s)));
        }
        v_sorted.set_column(dst, &v.column(src));
    }
    complete_columns(&mut u, &sigma);
    Svd {
        u,
        sigma,
        v: v_sorted,
    }
}

/// Replace the columns of `u` that belong to zero singular values with an
/// orthonormal completion, so `U` always has orthonormal columns.
#[allow(clippy::needless_range_loop)]
fn complete_columns(u: &mut ComplexMatrix, sigma: &[f64]) {
    let m = u.nrows();
    for j in 0..sigma.len() {
        if sigma[j] > 0.0 {
            continue;
        }
        for e in 0..m {
            let mut cand = ComplexMatrix::zeros(m, 1);
            cand[(e, 0)] = re(1.0);
            for i in 0..u.ncols() {
                if i == j || (sigma[i] == 0.0 && i > j) {
                    continue;
                }
                let proj = u.column(i).dotc(&cand.column(0));
                let col = u.column(i).into_owned();
                cand.column_mut(0).axpy(-proj, &col, re(1.0));
            }
            let norm = cand.column(0).norm();
            if norm > 0.5 {
                u.set_column(j, &(cand.column(0) / re(norm)));
                break;
            }
        }
    }
}

/// Moore-Penrose pseudo-inverse with singular values at or below the rank
/// cutoff treated as zero.
pub fn pseudo_inverse(a: &ComplexMatrix, pol: &TolerancePolicy) -> ComplexMatrix {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return zeros(n, m);
    }
    let d = svd(a);
    let smax = d.sigma.first().copied().unwrap_or(0.0);
    let cutoff = pol.rank_cutoff(smax, m, n);
    let inv: Vec<Complex64> = d
        .sigma
        .iter()
        .map(|&s| {
            if s > cutoff && s > 0.0 {
                re(1.0 / s)
            } else {
                re(0.0)
            }
        })
        .collect();
    &d.v * diag(&inv) * d.u.adjoint()
}

/// Singular values, descending. Empty for matrices with a zero dimension.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    svd(m).sigma
}

/// Numerical rank: singular values above `rank_rtol * sigma_max * max(m, n)`.
pub fn rank(m: &ComplexMatrix, pol: &TolerancePolicy) -> usize {
    let s = singular_values(m);
    let Some(&smax) = s.first() else { return 0 };
    if smax == 0.0 {
        return 0;
    }
    let cutoff = pol.rank_cutoff(smax, m.nrows(), m.ncols());
    s.iter().filter(|&&x| x > cutoff).count()
}

/// Smallest singular value of a square matrix, with the rank cutoff that
/// applies to it.
fn sigma_min_and_cutoff(m: &ComplexMatrix, pol: &TolerancePolicy) -> (f64, f64) {
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    let smin = s.last().copied().unwrap_or(0.0);
    (smin, pol.rank_cutoff(smax, m.nrows(), m.ncols()))
}

/// A linear subspace of `C^ambient_dim`, stored as an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: ComplexMatrix,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: zeros(ambient_dim, 0),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: identity(ambient_dim),
        }
    }

    /// Wrap a basis that is already orthonormal. Checked against `eq_atol`.
    pub fn from_orthonormal(basis: ComplexMatrix, pol: &TolerancePolicy) -> Result<Self> {
        let gram = basis.adjoint() * &basis;
        let res = frobenius(&(gram - identity(basis.ncols())));
        if res > pol.eq_atol {
            return Err(Error::InvalidInput(format!(
                "basis is not orthonormal (residual {res:e})"
            )));
        }
        Ok(Subspace {
            ambient_dim: basis.nrows(),
            basis,
        })
    }

    /// Coordinate subspace spanned by `e_start .. e_{start+len}`.
    pub fn coordinate(ambient_dim: usize, start: usize, len: usize) -> Self {
        assert!(start + len <= ambient_dim);
        let mut basis = zeros(ambient_dim, len);
        for j in 0..len {
            basis[(start + j, j)] = ONE;
        }
        Subspace { ambient_dim, basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn into_basis(self) -> ComplexMatrix {
        self.basis
    }

    /// Orthogonal projection onto the subspace.
    pub fn projector(&self) -> ComplexMatrix {
        &self.basis * self.basis.adjoint()
    }

    /// Frobenius norm of the part of `vectors` lying outside the subspace.
    pub fn exclusion_residual(&self, vectors: &ComplexMatrix) -> f64 {
        let inside = &self.basis * (self.basis.adjoint() * vectors);
        frobenius(&(vectors - inside))
    }

    /// Residual of `self ⊆ other`: how far our basis sticks out of `other`.
    pub fn containment_residual(&self, other: &Subspace) -> f64 {
        other.exclusion_residual(&self.basis)
    }

    /// Largest residual `‖(I - P) g P‖_F` over the given operators.
    pub fn invariance_residual(&self, ops: &[ComplexMatrix]) -> f64 {
        ops.iter()
            .map(|g| self.exclusion_residual(&(g * &self.basis)))
            .fold(0.0, f64::max)
    }
}

/// Orthonormal basis of the column span of `columns`.
pub fn orthonormal_basis(columns: &ComplexMatrix, pol: &TolerancePolicy) -> Subspace {
    let ambient = columns.nrows();
    if ambient == 0 || columns.ncols() == 0 {
        return Subspace::zero(ambient);
    }
    let d = svd(columns);
    let smax = d.sigma.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Subspace::zero(ambient);
    }
    let cutoff = pol.rank_cutoff(smax, columns.nrows(), columns.ncols());
    let r = d.sigma.iter().take_while(|&&s| s > cutoff).count();
    Subspace {
        ambient_dim: ambient,
        basis: d.u.columns(0, r).into_owned(),
    }
}

fn check_same_ambient(u: &Subspace, v: &Subspace) {
    assert_eq!(
        u.ambient_dim, v.ambient_dim,
        "subspaces live in different ambient spaces"
    );
}

pub fn subspace_sum(u: &Subspace, v: &Subspace, pol: &TolerancePolicy) -> Subspace {
    check_same_ambient(u, v);
    orthonormal_basis(&hstack(&[&u.basis, &v.basis], u.ambient_dim), pol)
}

pub fn orthogonal_complement(u: &Subspace, pol: &TolerancePolicy) -> Subspace {
    let n = u.ambient_dim;
    if u.dim() == 0 {
        return Subspace::full(n);
    }
    if u.dim() == n {
        return Subspace::zero(n);
    }
    let residual_projector = identity(n) - u.projector();
    let comp = orthonormal_basis(&residual_projector, pol);
    debug_assert_eq!(comp.dim() + u.dim(), n);
    comp
}

/// Null space of `m` as an orthonormal basis of `C^{cols}`.
pub fn null_space(m: &ComplexMatrix, pol: &TolerancePolicy) -> Subspace {
    let row_space = orthonormal_basis(&m.adjoint(), pol);
    orthogonal_complement(&row_space, pol)
}

/// `U ∩ V` from the null space of `[B_U | -B_V]`.
pub fn subspace_intersection(u: &Subspace, v: &Subspace, pol: &TolerancePolicy) -> Subspace {
    check_same_ambient(u, v);
    let n = u.ambient_dim;
    let (p, q) = (u.dim(), v.dim());
    if p == 0 || q == 0 {
        return Subspace::zero(n);
    }
    let stacked = hstack(&[&u.basis, &(-&v.basis)], n);
    let ns = null_space(&stacked, pol);
    if ns.is_zero() {
        return Subspace::zero(n);
    }
    let coeffs = ns.basis.rows(0, p).into_owned();
    let vectors = &u.basis * coeffs;
    let meet = orthonormal_basis(&vectors, pol);
    debug_assert_eq!(meet.dim(), ns.dim());
    meet
}

/// Hermitian part `(m + m*) / 2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * re(0.5)
}

/// Principal square root of a Hermitian positive semidefinite matrix, through
/// its eigendecomposition. Small negative eigenvalues from rounding are
/// clamped to zero.
pub fn psd_sqrt(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.nrows();
    if n == 0 {
        return zeros(0, 0);
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let roots: Vec<Complex64> = eig
        .eigenvalues
        .iter()
        .map(|&l| re(l.max(0.0).sqrt()))
        .collect();
    let v = &eig.eigenvectors;
    v * diag(&roots) * v.adjoint()
}

/// Inverse of a square matrix that is invertible at the rank cutoff.
pub fn inverse(m: &ComplexMatrix, pol: &TolerancePolicy) -> Result<ComplexMatrix> {
    if m.nrows() != m.ncols() {
        return Err(Error::Shape(format!(
            "cannot invert a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Ok(zeros(0, 0));
    }
    let (smin, cutoff) = sigma_min_and_cutoff(m, pol);
    if smin <= cutoff {
        return Err(Error::NotInvertible {
            sigma_min: smin,
            cutoff,
        });
    }
    m.clone().lu().try_inverse().ok_or(Error::NotInvertible {
        sigma_min: smin,
        cutoff,
    })
}

/// Polar factors `T = W |T|` of an invertible square matrix.
#[derive(Debug, Clone)]
pub struct Polar {
    pub unitary: ComplexMatrix,
    pub modulus: ComplexMatrix,
}

/// Polar decomposition of an invertible square matrix.
///
/// `|T| = (T*T)^{1/2}` is assembled from the right singular vectors of `T`
/// (the eigenvectors of `T*T`) and `W = U V*`, which equals `T |T|^{-1}`
/// without forming the inverse.
pub fn polar_decompose(t: &ComplexMatrix, pol: &TolerancePolicy) -> Result<Polar> {
    if t.nrows() != t.ncols() {
        return Err(Error::Shape(format!(
            "polar decomposition needs a square matrix, got {}x{}",
            t.nrows(),
            t.ncols()
        )));
    }
    let n = t.nrows();
    if n == 0 {
        return Ok(Polar {
            unitary: zeros(0, 0),
            modulus: zeros(0, 0),
        });
    }
    let d = svd(t);
    let sv = &d.sigma;
    let smax = sv[0];
    let smin = sv[n - 1];
    let cutoff = pol.rank_cutoff(smax, n, n);
    // negated so that a NaN singular value is rejected too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(smin > cutoff) {
        return Err(Error::NotInvertible {
            sigma_min: smin,
            cutoff,
        });
    }
    let sigma: Vec<Complex64> = sv.iter().map(|&s| re(s)).collect();
    let v_t = d.v.adjoint();
    let modulus = hermitian_part(&(&d.v * diag(&sigma) * &v_t));
    let unitary = &d.u * &v_t;
    Ok(Polar { unitary, modulus })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pol() -> TolerancePolicy {
        TolerancePolicy::DEFAULT
    }

    fn col(entries: &[f64]) -> ComplexMatrix {
        real_matrix(entries.len(), 1, entries)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn svd_reconstructs_rank_deficient_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..300 {
            let m = rng.random_range(1..=14);
            let n = rng.random_range(1..=28);
            let r = rng.random_range(0..=m.min(n));
            let a = random_matrix(&mut rng, m, r) * random_matrix(&mut rng, r, n);
            let d = svd(&a);
            let s: Vec<Complex64> = d.sigma.iter().map(|&x| re(x)).collect();
            let back = &d.u * diag(&s) * d.v.adjoint();
            assert!(max_abs(&(back - &a)) < 1e-12, "trial {trial}");
            let k = m.min(n);
            assert!(
                max_abs(&(d.u.adjoint() * &d.u - identity(k))) < 1e-12,
                "trial {trial}"
            );
            assert!(
                max_abs(&(d.v.adjoint() * &d.v - identity(k))) < 1e-12,
                "trial {trial}"
            );
            assert!(d.sigma.windows(2).all(|w| w[0] >= w[1]));
            assert_eq!(rank(&a, &pol()), r, "trial {trial}");
        }
    }

    #[test]
    fn pseudo_inverse_satisfies_penrose_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for _ in 0..100 {
            let (m, n, r) = (
                rng.random_range(1..=8),
                rng.random_range(1..=8),
                rng.random_range(1..=4),
            );
            let a = random_matrix(&mut rng, m, r) * random_matrix(&mut rng, r, n);
            let p = pseudo_inverse(&a, &pol());
            assert!(max_abs(&(&a * &p * &a - &a)) < 1e-10);
            assert!(max_abs(&(&p * &a * &p - &p)) < 1e-10);
            let ap = &a * &p;
            assert!(max_abs(&(&ap - ap.adjoint())) < 1e-10);
        }
    }

    fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        random_matrix(rng, n, n).qr().q()
    }

    #[test]
    fn tolerance_policy_rejects_out_of_range() {
        assert!(TolerancePolicy::new(0.0, 1e-8).is_err());
        assert!(TolerancePolicy::new(1e-10, 1.0).is_err());
        assert!(TolerancePolicy::new(1e-10, 1e-8).is_ok());
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&identity(2), &pol()), 2);
        assert_eq!(rank(&zeros(3, 2), &pol()), 0);
        let dup = real_matrix(2, 2, &[1.0, 1.0, 0.0, 0.0]);
        assert_eq!(rank(&dup, &pol()), 1);
        assert_eq!(rank(&zeros(0, 4), &pol()), 0);
    }

    #[test]
    fn orthonormal_basis_examples() {
        let s = orthonormal_basis(&col(&[2.0, 0.0]), &pol());
        assert_eq!(s.dim(), 1);
        assert!((s.basis()[(0, 0)].norm() - 1.0).abs() < 1e-14);
        assert!(s.basis()[(1, 0)].norm() < 1e-14);

        let full = orthonormal_basis(&real_matrix(2, 2, &[1.0, 1.0, 0.0, 1.0]), &pol());
        assert!(full.is_full());

        let empty = orthonormal_basis(&zeros(2, 0), &pol());
        assert!(empty.is_zero());
        assert_eq!(empty.ambient_dim(), 2);
    }

    #[test]
    fn intersection_examples() {
        let e1 = orthonormal_basis(&col(&[1.0, 0.0]), &pol());
        let diag_line = orthonormal_basis(&col(&[1.0, 1.0]), &pol());
        assert!(subspace_intersection(&e1, &diag_line, &pol()).is_zero());

        let u = orthonormal_basis(&real_matrix(3, 2, &[1.0, 0.0, 1.0, 1.0, 0.0, 2.0]), &pol());
        let uu = subspace_intersection(&u, &u, &pol());
        assert_eq!(uu.dim(), 2);
        assert!(uu.containment_residual(&u) < 1e-12);

        let graph = orthonormal_basis(&col(&[1.0, 2.0]), &pol());
        assert!(subspace_intersection(&graph, &e1, &pol()).is_zero());
    }

    #[test]
    fn intersection_of_planes_in_c3_is_a_line() {
        let xy = Subspace::coordinate(3, 0, 2);
        let yz = Subspace::coordinate(3, 1, 2);
        let meet = subspace_intersection(&xy, &yz, &pol());
        assert_eq!(meet.dim(), 1);
        assert!((meet.basis()[(1, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sum_and_complement_examples() {
        let e1 = Subspace::coordinate(2, 0, 1);
        let e2 = Subspace::coordinate(2, 1, 1);
        assert!(subspace_sum(&e1, &e2, &pol()).is_full());
        assert!(orthogonal_complement(&Subspace::full(2), &pol()).is_zero());

        let line = orthonormal_basis(&col(&[1.0, 2.0]), &pol());
        let comp = orthogonal_complement(&line, &pol());
        assert_eq!(comp.dim(), 1);
        // Expected span{(2, -1)/sqrt 5}: orthogonal to (1, 2) and one-dimensional.
        let expected = col(&[2.0 / 5f64.sqrt(), -1.0 / 5f64.sqrt()]);
        assert!(comp.exclusion_residual(&expected) < 1e-12);
        assert!((line.basis().adjoint() * comp.basis())[(0, 0)].norm() < 1e-12);
    }

    #[test]
    fn polar_examples() {
        let two = identity(2) * re(2.0);
        let p = polar_decompose(&two, &pol()).unwrap();
        assert!(frobenius(&(p.unitary - identity(2))) < 1e-12);
        assert!(frobenius(&(p.modulus - &two)) < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(&mut rng, 3);
        let p = polar_decompose(&u, &pol()).unwrap();
        assert!(frobenius(&(&p.unitary - &u)) < 1e-12);
        assert!(frobenius(&(&p.modulus - identity(3))) < 1e-12);

        // diag(1, -1): |T| = I by hand, so W = T.
        let d = real_matrix(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let p = polar_decompose(&d, &pol()).unwrap();
        assert!(frobenius(&(&p.unitary - &d)) < 1e-12);
        assert!(frobenius(&(&p.modulus - identity(2))) < 1e-12);
        assert!(frobenius(&(&p.unitary * &p.modulus - &d)) < 1e-12);
    }

    #[test]
    fn polar_rejects_singular_and_rectangular() {
        let singular = real_matrix(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            polar_decompose(&singular, &pol()),
            Err(Error::NotInvertible { .. })
        ));
        assert!(matches!(
            polar_decompose(&zeros(2, 3), &pol()),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn polar_modulus_matches_psd_sqrt() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let t = random_matrix(&mut rng, 4, 4);
            let p = polar_decompose(&t, &pol()).unwrap();
            let oracle = psd_sqrt(&(t.adjoint() * &t));
            assert!(frobenius(&(p.modulus - oracle)) < 1e-9);
        }
    }

    #[test]
    fn polar_round_trip_on_random_invertible() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut trials = 0;
        while trials < 500 {
            let n = rng.random_range(1..=6);
            let t = random_matrix(&mut rng, n, n);
            if *singular_values(&t).last().unwrap() < 1e-3 {
                continue;
            }
            trials += 1;
            let p = polar_decompose(&t, &pol()).unwrap();
            assert!(frobenius(&(&p.unitary * &p.modulus - &t)) <= pol().eq_atol);
            assert!(frobenius(&(p.unitary.adjoint() * &p.unitary - identity(n))) <= pol().eq_atol);
        }
    }

    #[test]
    fn rank_is_unitarily_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let (m, n) = (rng.random_range(1..=6), rng.random_range(1..=6));
            let r = rng.random_range(0..=m.min(n));
            let a = random_matrix(&mut rng, m, r) * random_matrix(&mut rng, r, n);
            let u = random_unitary(&mut rng, m);
            let v = random_unitary(&mut rng, n);
            assert_eq!(rank(&a, &pol()), r);
            assert_eq!(rank(&(u * &a * v), &pol()), rank(&a, &pol()));
        }
    }

    #[test]
    fn inverse_rejects_singular() {
        assert!(inverse(&zeros(2, 2), &pol()).is_err());
        let m = real_matrix(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let inv = inverse(&m, &pol()).unwrap();
        assert!(frobenius(&(inv * m - identity(2))) < 1e-14);
    }
}
