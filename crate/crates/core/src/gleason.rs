//! Finite-dimensional Gleason machinery.
//!
//! A frame function assigns a number in `[0, 1]` to every rank-one projection
//! and sums to 1 over every COSP. In finite dimension ≥ 3 every such function
//! has the form `P ↦ tr(DP)` for a density operator `D`; this module recovers
//! `D` from sampled values by linear least squares. It is a reconstruction
//! procedure, not a proof of Gleason's theorem: the frame-function property
//! is only checked on the samples supplied.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, trace};
use crate::mapspec::ProjectionMap;
use crate::projspace::{ic_family, random_unitary, Cosp, Projection};
use crate::scalar::{lit, modulus, to_f64, CMatrix, Real};
use crate::tolerance::Tolerances;

/// Smallest admissible singular value of the sample design matrix.
pub const DESIGN_SIGMA_FLOOR: f64 = 1e-6;

/// Positive semidefinite operator of unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator<T: Real> {
    matrix: CMatrix<T>,
}

impl<T: Real> DensityOperator<T> {
    /// Validates Hermiticity (`tol.herm`), spectrum `≥ −tol.herm` and trace
    /// within `tol.trace` of 1.
    pub fn from_matrix(matrix: CMatrix<T>, tol: &Tolerances<T>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidDensity(
                "expected a nonempty square matrix".into(),
            ));
        }
        let herm = (&matrix - matrix.adjoint()).norm();
        if !(herm <= tol.herm) {
            return Err(Error::InvalidDensity(format!(
                "Hermiticity defect {:e}",
                to_f64(herm)
            )));
        }
        let tr_defect = modulus(trace(&matrix) - Complex::new(T::one(), T::zero()));
        if !(tr_defect <= tol.trace) {
            return Err(Error::InvalidDensity(format!(
                "trace defect {:e}",
                to_f64(tr_defect)
            )));
        }
        let (values, _) = hermitian_eigen(&matrix)?;
        if !(values[0] >= -tol.herm) {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {:e}",
                to_f64(values[0])
            )));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix<T>) -> Self {
        Self { matrix }
    }

    /// `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        let w = Complex::new(T::one() / lit(dim as f64), T::zero());
        Self::from_matrix_unchecked(CMatrix::identity(dim, dim) * w)
    }

    /// The pure state `P`.
    pub fn pure(p: &Projection<T>) -> Self {
        Self::from_matrix_unchecked(p.matrix().clone())
    }

    /// `U diag(λ) U*` with Haar `U` and `λ` a normalized vector of
    /// exponential samples (uniform on the simplex).
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let u = random_unitary::<T, _>(dim, rng);
        let raw: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = raw.iter().sum();
        let diag = CMatrix::<T>::from_fn(dim, dim, |r, c| {
            if r == c {
                Complex::new(lit(raw[r] / total), T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        });
        Self::from_matrix_unchecked(crate::linalg::hermitian_part(&(&u * diag * u.adjoint())))
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
    pub fn distance(&self, other: &Self) -> T {
        (&self.matrix - &other.matrix).norm()
    }
}

/// One observed value of a frame function.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSample<T: Real> {
    pub projection: Projection<T>,
    pub value: T,
}

impl<T: Real> FrameSample<T> {
    /// Rejects values outside `[−tol.fit, 1 + tol.fit]`.
    pub fn new(projection: Projection<T>, value: T, tol: &Tolerances<T>) -> Result<Self> {
        if !(value >= -tol.fit && value <= T::one() + tol.fit) {
            return Err(Error::InvalidDensity(format!(
                "frame value {} outside [0, 1]",
                to_f64(value)
            )));
        }
        Ok(Self { projection, value })
    }
}

/// Result of [`fit_density`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport<T: Real> {
    pub density: DensityOperator<T>,
    /// Largest absolute misfit `|tr(DP_k) − value_k|` of the unconstrained solution.
    pub residual: T,
    /// Most negative eigenvalue before clipping.
    pub eigen_floor: T,
}

/// `tr(DP)`.
pub fn frame_value<T: Real>(d: &DensityOperator<T>, p: &Projection<T>) -> Result<T> {
    if d.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: d.dim(),
            found: p.dim(),
        });
    }
    Ok(p.matrix().dotc(d.matrix()).re)
}

/// Row of the real design matrix for `tr(DP)`: `dim` diagonal coefficients,
/// then `(Re, Im)` coefficient pairs for each upper off-diagonal `D_jk`.
fn design_row<T: Real>(p: &Projection<T>) -> Vec<T> {
    let n = p.dim();
    let m = p.matrix();
    let two = lit::<T>(2.0);
    let mut row = Vec::with_capacity(n * n);
    row.extend((0..n).map(|j| m[(j, j)].re));
    for j in 0..n {
        for k in j + 1..n {
            // D_jk P_kj + D_kj P_jk = 2 Re(D_jk conj(P_jk))
            row.push(two * m[(j, k)].re);
            row.push(two * m[(j, k)].im);
        }
    }
    row
}

fn density_from_params<T: Real>(theta: &DVector<T>, n: usize) -> CMatrix<T> {
    let mut d = CMatrix::<T>::zeros(n, n);
    for j in 0..n {
        d[(j, j)] = Complex::new(theta[j], T::zero());
    }
    let mut idx = n;
    for j in 0..n {
        for k in j + 1..n {
            let z = Complex::new(theta[idx], theta[idx + 1]);
            d[(j, k)] = z;
            d[(k, j)] = z.conj();
            idx += 2;
        }
    }
    d
}

/// Least-squares density operator for the given frame samples.
///
/// Unknowns are the `dim²` real parameters of a Hermitian matrix; the
/// system is solved through an SVD of the design matrix. Negative
/// eigenvalues no deeper than `−tol.fit` are clipped and the spectrum is
/// renormalized to unit trace.
///
/// Fails with [`Error::DesignDeficient`] when the sampled projections do not
/// determine a Hermitian matrix, [`Error::InconsistentSamples`] when the best
/// fit misses a sample by more than `tol.fit`, [`Error::NegativeSpectrum`]
/// for eigenvalues below `−tol.fit` and [`Error::TraceDeficit`] when the
/// fitted trace is further than `tol.fit` from 1.
pub fn fit_density<T: Real>(
    samples: &[FrameSample<T>],
    dim: usize,
    tol: &Tolerances<T>,
) -> Result<FitReport<T>> {
    if dim == 0 {
        return Err(Error::DimensionTooSmall { dim, min: 1 });
    }
    if let Some(s) = samples.iter().find(|s| s.projection.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: s.projection.dim(),
        });
    }
    let unknowns = dim * dim;
    if samples.len() < unknowns {
        return Err(Error::DesignDeficient { sigma_min: 0.0 });
    }
    let rows: Vec<Vec<T>> = samples.iter().map(|s| design_row(&s.projection)).collect();
    let a = DMatrix::<T>::from_fn(samples.len(), unknowns, |r, c| rows[r][c]);
    let b = DVector::<T>::from_iterator(samples.len(), samples.iter().map(|s| s.value));

    let svd = a.clone().svd(true, true);
    let sigma_min =
        svd.singular_values
            .iter()
            .fold(T::max_value().unwrap_or_else(T::one), |m, &s| {
                if s < m {
                    s
                } else {
                    m
                }
            });
    if !(sigma_min >= lit(DESIGN_SIGMA_FLOOR)) {
        return Err(Error::DesignDeficient {
            sigma_min: to_f64(sigma_min),
        });
    }
    let theta = svd
        .solve(&b, T::default_epsilon())
        .map_err(|e| Error::Numerical(e.to_string()))?;
    let residual = (&a * &theta - &b).amax();
    if !(residual <= tol.fit) {
        return Err(Error::InconsistentSamples {
            residual: to_f64(residual),
        });
    }

    let fitted = density_from_params(&theta, dim);
    let (values, vectors) = hermitian_eigen(&fitted)?;
    let eigen_floor = values[0];
    if !(eigen_floor >= -tol.fit) {
        return Err(Error::NegativeSpectrum {
            eigen_floor: to_f64(eigen_floor),
        });
    }
    let clipped = values.map(|v| if v < T::zero() { T::zero() } else { v });
    let tr = clipped.sum();
    if !((tr - T::one()).abs() <= tol.fit) {
        return Err(Error::TraceDeficit { trace: to_f64(tr) });
    }
    let matrix = if eigen_floor < T::zero() {
        let diag = CMatrix::from_diagonal(&clipped.map(|v| Complex::new(v / tr, T::zero())));
        crate::linalg::hermitian_part(&(&vectors * diag * vectors.adjoint()))
    } else {
        fitted * Complex::new(T::one() / tr, T::zero())
    };
    Ok(FitReport {
        density: DensityOperator::from_matrix_unchecked(matrix),
        residual,
        eigen_floor,
    })
}

/// Largest `|Σ_j frame(P_j) − 1|` over the supplied COSPs.
pub fn check_frame_additivity<T: Real, F>(mut frame: F, cosps: &[Cosp<T>]) -> Result<T>
where
    F: FnMut(&Projection<T>) -> Result<T>,
{
    let dim = cosps.first().map_or(0, Cosp::dim);
    let mut worst = T::zero();
    for cosp in cosps {
        if cosp.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: cosp.dim(),
            });
        }
        let mut total = T::zero();
        for p in cosp.projections() {
            total += frame(p)?;
        }
        let dev = (total - T::one()).abs();
        if dev > worst {
            worst = dev;
        }
    }
    Ok(worst)
}

/// `P ↦ tr(D · map(P))`.
pub fn pushforward_frame<'a, T: Real, M: ProjectionMap<T> + ?Sized>(
    d: &'a DensityOperator<T>,
    map: &'a M,
) -> Result<impl Fn(&Projection<T>) -> Result<T> + 'a> {
    if d.dim() != map.dim() {
        return Err(Error::DimensionMismatch {
            expected: map.dim(),
            found: d.dim(),
        });
    }
    Ok(move |p: &Projection<T>| frame_value(d, &map.apply(p)?))
}

/// The density operator `E` with `tr(D · map(P)) = tr(EP)`, fitted on the
/// informationally complete family. A fit failure certifies that the
/// pushed-forward function is not a frame function.
pub fn conjugate_density<T: Real, M: ProjectionMap<T> + ?Sized>(
    map: &M,
    d: &DensityOperator<T>,
    tol: &Tolerances<T>,
) -> Result<DensityOperator<T>> {
    let frame = pushforward_frame(d, map)?;
    let samples = ic_family(d.dim())?
        .into_iter()
        .map(|p| {
            let value = frame(&p)?;
            FrameSample::new(p, value, tol)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fit_density(&samples, d.dim(), tol)?.density)
}
