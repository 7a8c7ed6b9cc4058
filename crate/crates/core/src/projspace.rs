//! Rank-one projections on `C^n` and the elementary geometry of the
//! projective space: transition probabilities, orthogonality, complete
//! orthogonal systems (COSPs) and the triple-overlap invariant.
//!
//! Inner products are linear in the first argument and conjugate-linear in
//! the second: `⟨a, b⟩ = Σ_k a_k · conj(b_k)`.
//!
//! Projections are stored as full matrices. A representative unit vector is
//! only extracted on demand, see [`Projection::representative`].

use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, trace};
use crate::rng::{complex_normal, seeded};
use crate::scalar::{lit, modulus, CMatrix, CVector, Real};
use crate::tolerance::Tolerances;

/// `⟨a, b⟩ = Σ_k a_k · conj(b_k)`.
pub fn inner<T: Real>(a: &CVector<T>, b: &CVector<T>) -> Complex<T> {
    b.dotc(a)
}

/// A unit vector in `C^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector<T: Real> {
    entries: CVector<T>,
}

impl<T: Real> UnitVector<T> {
    /// Wraps `entries`, which must already have norm 1 within `tol.unit`.
    pub fn new(entries: CVector<T>, tol: &Tolerances<T>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::DimensionTooSmall { dim: 0, min: 1 });
        }
        let deviation = (entries.norm() - T::one()).abs();
        if !(deviation <= tol.unit) {
            return Err(Error::NotNormalized {
                deviation: crate::scalar::to_f64(deviation),
            });
        }
        Ok(Self { entries })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalize(entries: CVector<T>) -> Result<Self> {
        let norm = entries.norm();
        if entries.is_empty() || !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::DegenerateVector);
        }
        Ok(Self {
            entries: entries.unscale(norm),
        })
    }

    /// Standard basis vector `e_j` of `C^dim`.
    pub fn basis(dim: usize, j: usize) -> Self {
        assert!(j < dim, "basis index {j} out of range for dimension {dim}");
        let mut entries = CVector::zeros(dim);
        entries[j] = Complex::new(T::one(), T::zero());
        Self { entries }
    }

    pub(crate) fn from_normalized(entries: CVector<T>) -> Self {
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &CVector<T> {
        &self.entries
    }

    pub fn into_entries(self) -> CVector<T> {
        self.entries
    }

    pub fn inner(&self, other: &Self) -> Complex<T> {
        inner(&self.entries, &other.entries)
    }

    /// The same vector multiplied by a unimodular scalar so that its
    /// largest-magnitude entry is real and positive. Entries within a
    /// relative `sqrt(eps)` of the maximum count as ties; the lowest index wins.
    pub fn canonical(&self) -> Self {
        let mags: Vec<T> = self.entries.iter().map(|z| modulus(*z)).collect();
        let max = mags
            .iter()
            .fold(T::zero(), |m, &v| if v > m { v } else { m });
        if max.is_zero() {
            return self.clone();
        }
        let window = max * (T::one() - T::default_epsilon().sqrt());
        let k = mags.iter().position(|&m| m >= window).unwrap_or(0);
        let pivot = self.entries[k];
        let phase = Complex::new(pivot.re / mags[k], -pivot.im / mags[k]);
        Self {
            entries: self.entries.map(|z| z * phase),
        }
    }
}

/// A rank-one orthogonal projection on `C^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection<T: Real> {
    matrix: CMatrix<T>,
}

impl<T: Real> Projection<T> {
    /// Validates `matrix` against the rank-one projection invariants:
    /// Hermitian within `tol.herm`, idempotent within `tol.idem` (Frobenius)
    /// and unit trace within `tol.trace`.
    pub fn from_matrix(matrix: CMatrix<T>, tol: &Tolerances<T>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidProjection(format!(
                "expected a nonempty square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm = (&matrix - matrix.adjoint()).norm();
        if !(herm <= tol.herm) {
            return Err(Error::InvalidProjection(format!(
                "Hermiticity defect {:e}",
                crate::scalar::to_f64(herm)
            )));
        }
        let idem = (&matrix * &matrix - &matrix).norm();
        if !(idem <= tol.idem) {
            return Err(Error::InvalidProjection(format!(
                "idempotency defect {:e}",
                crate::scalar::to_f64(idem)
            )));
        }
        let tr = trace(&matrix);
        let trace_defect = modulus(tr - Complex::new(T::one(), T::zero()));
        if !(trace_defect <= tol.trace) {
            return Err(Error::InvalidProjection(format!(
                "trace defect {:e}",
                crate::scalar::to_f64(trace_defect)
            )));
        }
        Ok(Self { matrix })
    }

    /// Trusted constructor for matrices that are projections by construction.
    pub(crate) fn from_matrix_unchecked(matrix: CMatrix<T>) -> Self {
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.matrix
    }

    /// `‖self − other‖_F`.
    pub fn distance(&self, other: &Self) -> Result<T> {
        check_dims(self.dim(), other.dim())?;
        Ok((&self.matrix - &other.matrix).norm())
    }

    /// Canonical unit vector spanning the range: the dominant eigenvector,
    /// rotated so its largest-magnitude entry is real positive.
    pub fn representative(&self) -> Result<UnitVector<T>> {
        let (_, vectors) = hermitian_eigen(&self.matrix)?;
        let dominant = vectors.column(self.dim() - 1).into_owned();
        // one power step against the projection removes eigen-solver noise
        let polished = &self.matrix * &dominant;
        let v = if polished.norm() > lit(0.5) {
            polished
        } else {
            dominant
        };
        Ok(UnitVector::normalize(v)?.canonical())
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Rank-one projection `v v*` onto the span of `v`.
pub fn projector<T: Real>(v: &UnitVector<T>) -> Projection<T> {
    let e = v.entries();
    Projection::from_matrix_unchecked(e * e.adjoint())
}

/// `P_v` for a raw vector, validating its normalization first.
pub fn projector_of<T: Real>(entries: CVector<T>, tol: &Tolerances<T>) -> Result<Projection<T>> {
    Ok(projector(&UnitVector::new(entries, tol)?))
}

/// Transition probability `tr(PQ)`, clamped to `[0, 1]`.
pub fn transition<T: Real>(p: &Projection<T>, q: &Projection<T>) -> Result<T> {
    check_dims(p.dim(), q.dim())?;
    // tr(PQ) = Σ P_ij Q_ji = Σ P_ij conj(Q_ij) for Hermitian Q
    let t = q.matrix().dotc(p.matrix()).re;
    Ok(t.clamp(T::zero(), T::one()))
}

pub fn is_orthogonal<T: Real>(
    p: &Projection<T>,
    q: &Projection<T>,
    tol: &Tolerances<T>,
) -> Result<bool> {
    Ok(transition(p, q)? <= tol.orth)
}

/// Whether `list` is a complete orthogonal system of rank-one projections
/// in `C^dim`: `dim` members, pairwise orthogonal and summing to the identity.
pub fn is_cosp<T: Real>(list: &[Projection<T>], dim: usize, tol: &Tolerances<T>) -> bool {
    if list.len() != dim || list.iter().any(|p| p.dim() != dim) {
        return false;
    }
    for (i, p) in list.iter().enumerate() {
        for q in &list[i + 1..] {
            match transition(p, q) {
                Ok(t) if t <= tol.orth => {}
                _ => return false,
            }
        }
    }
    let mut sum = CMatrix::<T>::zeros(dim, dim);
    for p in list {
        sum += p.matrix();
    }
    (sum - CMatrix::<T>::identity(dim, dim)).norm() <= tol.complete
}

/// Triple overlap `⟨x,y⟩⟨y,z⟩⟨z,x⟩` of `P = P_x`, `Q = P_y`, `R = P_z`,
/// computed as `tr(RQP)` (the conjugate of `tr(PQR)`). Unitary conjugation
/// preserves it and antiunitary conjugation maps it to its complex conjugate.
pub fn triple_overlap<T: Real>(
    p: &Projection<T>,
    q: &Projection<T>,
    r: &Projection<T>,
) -> Result<Complex<T>> {
    check_dims(p.dim(), q.dim())?;
    check_dims(p.dim(), r.dim())?;
    Ok(trace(&(r.matrix() * q.matrix() * p.matrix())))
}

/// An ordered complete orthogonal system of rank-one projections together
/// with the orthonormal basis spanning their ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct Cosp<T: Real> {
    projections: Vec<Projection<T>>,
    basis: Vec<UnitVector<T>>,
}

impl<T: Real> Cosp<T> {
    /// `{P_{e_1}, …, P_{e_n}}`.
    pub fn standard(dim: usize) -> Self {
        let basis: Vec<_> = (0..dim).map(|j| UnitVector::basis(dim, j)).collect();
        let projections = basis.iter().map(projector).collect();
        Self { projections, basis }
    }

    pub fn from_basis(basis: Vec<UnitVector<T>>, tol: &Tolerances<T>) -> Result<Self> {
        let dim = basis.first().map(UnitVector::dim).unwrap_or(0);
        let projections: Vec<_> = basis.iter().map(projector).collect();
        if !is_cosp(&projections, dim, tol) {
            return Err(Error::InvalidProjection(
                "basis is not orthonormal and complete".into(),
            ));
        }
        Ok(Self { projections, basis })
    }

    /// The COSP formed by the columns of a unitary matrix.
    pub fn from_unitary(u: &CMatrix<T>, tol: &Tolerances<T>) -> Result<Self> {
        let basis = u
            .column_iter()
            .map(|c| UnitVector::new(c.into_owned(), tol))
            .collect::<Result<Vec<_>>>()?;
        Self::from_basis(basis, tol)
    }

    pub fn from_projections(projections: Vec<Projection<T>>, tol: &Tolerances<T>) -> Result<Self> {
        let dim = projections.first().map(Projection::dim).unwrap_or(0);
        if !is_cosp(&projections, dim, tol) {
            return Err(Error::ImageNotCosp);
        }
        let basis = projections
            .iter()
            .map(Projection::representative)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { projections, basis })
    }

    pub fn dim(&self) -> usize {
        self.projections.len()
    }

    pub fn projections(&self) -> &[Projection<T>] {
        &self.projections
    }

    pub fn basis(&self) -> &[UnitVector<T>] {
        &self.basis
    }

    /// Matrix whose columns are the basis vectors.
    pub fn basis_matrix(&self) -> CMatrix<T> {
        let n = self.dim();
        CMatrix::from_fn(n, n, |r, c| self.basis[c].entries()[r])
    }
}

/// Vectors behind [`ic_family`], in the same order.
pub fn ic_vectors<T: Real>(dim: usize) -> Result<Vec<UnitVector<T>>> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall { dim, min: 2 });
    }
    let s = lit::<T>(std::f64::consts::FRAC_1_SQRT_2);
    let one = Complex::new(s, T::zero());
    let i = Complex::new(T::zero(), s);
    let mut out: Vec<UnitVector<T>> = (0..dim).map(|j| UnitVector::basis(dim, j)).collect();
    for coeff in [one, i] {
        for j in 0..dim {
            for k in j + 1..dim {
                let mut v = CVector::zeros(dim);
                v[j] = one;
                v[k] = coeff;
                out.push(UnitVector::from_normalized(v));
            }
        }
    }
    Ok(out)
}

/// Informationally complete family of `dim²` projections:
/// `{P_{e_j}} ∪ {P_{(e_j+e_k)/√2}} ∪ {P_{(e_j+i·e_k)/√2}}` for `j < k`.
/// Their real span is the whole space of Hermitian `dim × dim` matrices.
pub fn ic_family<T: Real>(dim: usize) -> Result<Vec<Projection<T>>> {
    Ok(ic_vectors(dim)?.iter().map(projector).collect())
}

/// Haar-distributed unit vector in `C^dim`.
pub fn random_unit_vector<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> UnitVector<T> {
    loop {
        let v = CVector::<T>::from_fn(dim, |_, _| complex_normal(rng));
        if let Ok(u) = UnitVector::normalize(v) {
            return u;
        }
    }
}

/// Projector of a Haar-distributed unit vector, deterministic per seed.
pub fn random_projection<T: Real>(dim: usize, seed: u64) -> Result<Projection<T>> {
    if dim == 0 {
        return Err(Error::DimensionTooSmall { dim, min: 1 });
    }
    Ok(projector(&random_unit_vector(dim, &mut seeded(seed))))
}

/// Random pair `(P, Q)` with `Q` drawn inside the orthocomplement of `P`'s range.
pub fn random_orthogonal_pair<T: Real, R: Rng + ?Sized>(
    dim: usize,
    rng: &mut R,
) -> (Projection<T>, Projection<T>) {
    let v = random_unit_vector::<T, _>(dim, rng);
    loop {
        let w = random_unit_vector::<T, _>(dim, rng);
        let overlap = inner(w.entries(), v.entries());
        let rest = w.entries() - v.entries() * overlap;
        if let Ok(w) = UnitVector::normalize(rest) {
            // second Gram-Schmidt pass for orthogonality at round-off level
            let overlap = inner(w.entries(), v.entries());
            let w = UnitVector::normalize(w.entries() - v.entries() * overlap).unwrap_or(w);
            return (projector(&v), projector(&w));
        }
    }
}

/// Haar-distributed unitary matrix (QR of a complex Ginibre matrix with the
/// phases of `R`'s diagonal absorbed into `Q`).
pub fn random_unitary<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix<T> {
    let g = CMatrix::<T>::from_fn(dim, dim, |_, _| complex_normal(rng));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let m = modulus(d);
        let phase = if m > T::zero() {
            Complex::new(d.re / m, d.im / m)
        } else {
            Complex::new(T::one(), T::zero())
        };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}
