//! Unitary and antiunitary operators acting on projections, and the
//! constructive reconstruction of the inducing operator from a
//! transition-preserving map.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{closest_unitary, conjugate, hermitian_part, unitarity_defect};
use crate::mapspec::ProjectionMap;
use crate::projspace::{
    ic_family, inner, projector, random_unit_vector, transition, triple_overlap, Projection,
    UnitVector,
};
use crate::rng::seeded_stream;
use crate::scalar::{lit, modulus, phase_of, to_f64, CMatrix, CVector, Real};
use crate::tolerance::Tolerances;

/// Random projections checked on top of the informationally complete family.
pub const VERIFY_RANDOM_PROBES: usize = 50;
/// Seed used by [`reconstruct_isometry`].
pub const DEFAULT_VERIFY_SEED: u64 = 0;
const VERIFY_STREAM: u64 = 0x5752_4543; // "WREC"
/// Below this, `|tr(B*A)|` means the two operators share no global phase.
const GAUGE_TRACE_FLOOR: f64 = 1e-6;

/// A unitary matrix `U` together with a linearity flag. The operator acts as
/// `x ↦ U x` when linear and as `x ↦ U conj(x)` (conjugation in the standard
/// basis) when antilinear.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryOperator<T: Real> {
    matrix: CMatrix<T>,
    antilinear: bool,
}

impl<T: Real> SymmetryOperator<T> {
    /// Checks that `matrix` is unitary within `tol.herm`.
    pub fn new(matrix: CMatrix<T>, antilinear: bool, tol: &Tolerances<T>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::NotUnitary {
                defect: f64::INFINITY,
            });
        }
        let defect = unitarity_defect(&matrix);
        if !(defect <= tol.herm) {
            return Err(Error::NotUnitary {
                defect: to_f64(defect),
            });
        }
        Ok(Self { matrix, antilinear })
    }

    pub(crate) fn from_parts_unchecked(matrix: CMatrix<T>, antilinear: bool) -> Self {
        Self { matrix, antilinear }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_parts_unchecked(CMatrix::identity(dim, dim), false)
    }

    /// Entrywise complex conjugation.
    pub fn conjugation(dim: usize) -> Self {
        Self::from_parts_unchecked(CMatrix::identity(dim, dim), true)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn is_antilinear(&self) -> bool {
        self.antilinear
    }

    pub fn apply_vector(&self, x: &CVector<T>) -> CVector<T> {
        if self.antilinear {
            &self.matrix * x.map(|z| z.conj())
        } else {
            &self.matrix * x
        }
    }

    /// `self ∘ inner`: first `inner`, then `self`. Linearity flags combine by XOR.
    pub fn compose(&self, inner: &Self) -> Self {
        let right = if self.antilinear {
            conjugate(&inner.matrix)
        } else {
            inner.matrix.clone()
        };
        Self::from_parts_unchecked(&self.matrix * right, self.antilinear ^ inner.antilinear)
    }

    pub fn inverse(&self) -> Self {
        if self.antilinear {
            // y = U conj(x)  =>  x = conj(U* y) = U^T conj(y)
            Self::from_parts_unchecked(self.matrix.transpose(), true)
        } else {
            Self::from_parts_unchecked(self.matrix.adjoint(), false)
        }
    }

    /// The same operator multiplied by the scalar `z`.
    pub fn scaled(&self, z: Complex<T>) -> Self {
        Self::from_parts_unchecked(&self.matrix * z, self.antilinear)
    }
}

/// `S P S*`, honouring the linearity flag.
pub fn apply_symmetry<T: Real>(
    s: &SymmetryOperator<T>,
    p: &Projection<T>,
) -> Result<Projection<T>> {
    if s.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: p.dim(),
        });
    }
    let inner = if s.antilinear {
        conjugate(p.matrix())
    } else {
        p.matrix().clone()
    };
    let image = &s.matrix * inner * s.matrix.adjoint();
    Ok(Projection::from_matrix_unchecked(hermitian_part(&image)))
}

/// Witness vectors `x = b₀`, `y = (b₀+b₁)/√2`, `z = (b₀+i·b₁)/√2`; their
/// triple overlap is `(1−i)/4` for any orthonormal `b₀, b₁`.
pub fn witness_triple<T: Real>(b0: &UnitVector<T>, b1: &UnitVector<T>) -> [Projection<T>; 3] {
    let s = lit::<T>(std::f64::consts::FRAC_1_SQRT_2);
    let one = Complex::new(s, T::zero());
    let i = Complex::new(T::zero(), s);
    let y = b0.entries() * one + b1.entries() * one;
    let z = b0.entries() * one + b1.entries() * i;
    [
        projector(b0),
        projector(&UnitVector::from_normalized(y)),
        projector(&UnitVector::from_normalized(z)),
    ]
}

/// Decides whether a transition-preserving map is induced by an antilinear
/// operator by comparing the triple overlap of the witness triple before and
/// after the map: unchanged means linear, conjugated means antilinear.
pub fn detect_antilinearity<T: Real, M: ProjectionMap<T> + ?Sized>(
    map: &M,
    basis: &[UnitVector<T>],
    tol: &Tolerances<T>,
) -> Result<bool> {
    if basis.len() < 3 || map.dim() < 3 {
        return Err(Error::DimensionTooSmall {
            dim: basis.len().min(map.dim()),
            min: 3,
        });
    }
    let sources = witness_triple(&basis[0], &basis[1]);
    let source = triple_overlap(&sources[0], &sources[1], &sources[2])?;
    if !(modulus(source - source.conj()) >= lit::<T>(10.0) * tol.orth) {
        return Err(Error::AmbiguousWitness);
    }
    let images = sources
        .iter()
        .map(|p| map.apply(p))
        .collect::<Result<Vec<_>>>()?;
    let image = triple_overlap(&images[0], &images[1], &images[2])?;
    let linear_gap = modulus(image - source);
    let antilinear_gap = modulus(image - source.conj());
    if linear_gap <= tol.fit && linear_gap <= antilinear_gap {
        Ok(false)
    } else if antilinear_gap <= tol.fit {
        Ok(true)
    } else {
        Err(Error::NotTransitionPreserving {
            deviation: to_f64(if linear_gap < antilinear_gap {
                linear_gap
            } else {
                antilinear_gap
            }),
        })
    }
}

/// Outcome of [`reconstruct_isometry`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult<T: Real> {
    pub operator: SymmetryOperator<T>,
    /// Worst `‖map(P) − S P S*‖_F` over the verification set.
    pub max_deviation: T,
    pub verified_pairs: usize,
}

/// [`reconstruct_isometry_seeded`] with [`DEFAULT_VERIFY_SEED`].
pub fn reconstruct_isometry<T: Real, M: ProjectionMap<T> + ?Sized>(
    map: &M,
    dim: usize,
    tol: &Tolerances<T>,
) -> Result<ReconstructionResult<T>> {
    reconstruct_isometry_seeded(map, dim, DEFAULT_VERIFY_SEED, tol)
}

/// Recovers the operator inducing a transition-preserving map.
///
/// Columns are the canonical representatives `f_j` of `map(P_{e_j})`, with
/// phases fixed through the images `y_j` of `P_{(e_1+e_j)/√2}`: each `y_j`
/// is rotated so that `⟨y_j, f_1⟩ > 0`, then `f_j` so that `⟨y_j, f_j⟩ > 0`.
/// Linearity comes from [`detect_antilinearity`]. The result is checked on
/// the informationally complete family plus [`VERIFY_RANDOM_PROBES`] random
/// projections drawn from `seed`.
pub fn reconstruct_isometry_seeded<T: Real, M: ProjectionMap<T> + ?Sized>(
    map: &M,
    dim: usize,
    seed: u64,
    tol: &Tolerances<T>,
) -> Result<ReconstructionResult<T>> {
    if dim < 3 {
        return Err(Error::DimensionTooSmall { dim, min: 3 });
    }
    if map.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: map.dim(),
        });
    }
    let basis: Vec<UnitVector<T>> = (0..dim).map(|j| UnitVector::basis(dim, j)).collect();
    let s = lit::<T>(std::f64::consts::FRAC_1_SQRT_2);

    let mut sources: Vec<Projection<T>> = basis.iter().map(projector).collect();
    for j in 1..dim {
        let mut v = CVector::<T>::zeros(dim);
        v[0] = Complex::new(s, T::zero());
        v[j] = Complex::new(s, T::zero());
        sources.push(projector(&UnitVector::from_normalized(v)));
    }
    let images = sources
        .iter()
        .map(|p| map.apply(p))
        .collect::<Result<Vec<_>>>()?;

    let mut worst = T::zero();
    for a in 0..sources.len() {
        for b in a + 1..sources.len() {
            let gap =
                (transition(&images[a], &images[b])? - transition(&sources[a], &sources[b])?).abs();
            if gap > worst {
                worst = gap;
            }
        }
    }
    if worst > tol.fit {
        return Err(Error::NotTransitionPreserving {
            deviation: to_f64(worst),
        });
    }

    let reps = images
        .iter()
        .map(Projection::representative)
        .collect::<Result<Vec<_>>>()?;
    let floor = lit::<T>(0.25);
    let f0 = reps[0].entries().clone();
    let mut columns = vec![f0.clone()];
    for j in 1..dim {
        let y = reps[dim + j - 1].entries();
        let c = phase_of(inner(y, &f0), floor)
            .ok_or(Error::NotTransitionPreserving { deviation: 0.5 })?;
        let y = y * c.conj();
        let f = reps[j].entries();
        let d = phase_of(inner(&y, f), floor)
            .ok_or(Error::NotTransitionPreserving { deviation: 0.5 })?;
        columns.push(f * d);
    }
    let raw = CMatrix::from_fn(dim, dim, |r, c| columns[c][r]);
    let antilinear = detect_antilinearity(map, &basis, tol)?;
    let operator = SymmetryOperator::from_parts_unchecked(closest_unitary(&raw)?, antilinear);

    let mut probes = ic_family(dim)?;
    let mut rng = seeded_stream(seed, VERIFY_STREAM);
    probes.extend((0..VERIFY_RANDOM_PROBES).map(|_| projector(&random_unit_vector(dim, &mut rng))));
    let mut max_deviation = T::zero();
    for p in &probes {
        let dev = map.apply(p)?.distance(&apply_symmetry(&operator, p)?)?;
        if !(dev <= max_deviation) {
            max_deviation = dev;
        }
    }
    if !(max_deviation <= tol.fit) {
        return Err(Error::VerificationFailed {
            deviation: to_f64(max_deviation),
        });
    }
    Ok(ReconstructionResult {
        operator,
        max_deviation,
        verified_pairs: probes.len(),
    })
}

/// `‖A − zB‖_F` for the phase `z` of `tr(B*A)`, or `None` when the flags
/// differ or no such phase exists.
pub fn gauge_defect<T: Real>(
    a: &SymmetryOperator<T>,
    b: &SymmetryOperator<T>,
) -> Result<Option<T>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if a.antilinear != b.antilinear {
        return Ok(None);
    }
    let t = crate::linalg::trace(&(b.matrix.adjoint() * &a.matrix));
    Ok(phase_of(t, lit(GAUGE_TRACE_FLOOR)).map(|z| (&a.matrix - &b.matrix * z).norm()))
}

/// Whether `A = zB` for a unimodular `z`, within `tol.gauge`, with matching
/// linearity flags.
pub fn gauge_compare<T: Real>(
    a: &SymmetryOperator<T>,
    b: &SymmetryOperator<T>,
    tol: &Tolerances<T>,
) -> Result<bool> {
    Ok(matches!(gauge_defect(a, b)?, Some(d) if d <= tol.gauge))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapspec::MapOracle;
    use crate::projspace::{projector_of, random_projection, random_unitary};
    use crate::rng::seeded;
    use crate::scalar::{cplx, unimodular};

    fn tol() -> Tolerances<f64> {
        Tolerances::default()
    }

    fn h() -> f64 {
        std::f64::consts::FRAC_1_SQRT_2
    }

    fn random_op(dim: usize, antilinear: bool, seed: u64) -> SymmetryOperator<f64> {
        let u = random_unitary(dim, &mut seeded(seed));
        SymmetryOperator::new(u, antilinear, &tol()).unwrap()
    }

    #[test]
    fn new_rejects_non_unitary() {
        let m = CMatrix::<f64>::identity(3, 3) * cplx(0.5, 0.0);
        assert!(matches!(
            SymmetryOperator::new(m, false, &tol()),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn apply_symmetry_examples() {
        let p = random_projection::<f64>(3, 4).unwrap();
        assert!(
            apply_symmetry(&SymmetryOperator::identity(3), &p)
                .unwrap()
                .distance(&p)
                .unwrap()
                < 1e-15
        );

        let real = projector_of(
            CVector::from_vec(vec![cplx(h(), 0.0), cplx(h(), 0.0), cplx(0.0, 0.0)]),
            &tol(),
        )
        .unwrap();
        let conj = SymmetryOperator::<f64>::conjugation(3);
        assert_eq!(apply_symmetry(&conj, &real).unwrap(), real);

        let plus_i = projector_of(
            CVector::from_vec(vec![cplx(h(), 0.0), cplx(0.0, h()), cplx(0.0, 0.0)]),
            &tol(),
        )
        .unwrap();
        let minus_i = projector_of(
            CVector::from_vec(vec![cplx(h(), 0.0), cplx(0.0, -h()), cplx(0.0, 0.0)]),
            &tol(),
        )
        .unwrap();
        assert!(
            apply_symmetry(&conj, &plus_i)
                .unwrap()
                .distance(&minus_i)
                .unwrap()
                < 1e-15
        );
    }

    #[test]
    fn apply_symmetry_dimension_mismatch() {
        let p = random_projection::<f64>(4, 1).unwrap();
        assert!(apply_symmetry(&SymmetryOperator::identity(3), &p).is_err());
    }

    #[test]
    fn inverse_undoes_operator() {
        for antilinear in [false, true] {
            let s = random_op(4, antilinear, 8);
            let p = random_projection::<f64>(4, 2).unwrap();
            let back = apply_symmetry(&s.inverse(), &apply_symmetry(&s, &p).unwrap()).unwrap();
            assert!(back.distance(&p).unwrap() < 1e-13);
            assert!(gauge_compare(
                &s.compose(&s.inverse()),
                &SymmetryOperator::identity(4),
                &tol()
            )
            .unwrap());
        }
    }

    #[test]
    fn antilinearity_of_identity_and_conjugation() {
        let basis: Vec<_> = (0..3).map(|j| UnitVector::basis(3, j)).collect();
        let id = MapOracle::Induced(SymmetryOperator::<f64>::identity(3));
        let cj = MapOracle::Induced(SymmetryOperator::<f64>::conjugation(3));
        assert!(!detect_antilinearity(&id, &basis, &tol()).unwrap());
        assert!(detect_antilinearity(&cj, &basis, &tol()).unwrap());
    }

    #[test]
    fn antilinearity_of_random_antiunitary_dim5() {
        let basis: Vec<_> = (0..5).map(|j| UnitVector::basis(5, j)).collect();
        for seed in 0..10 {
            let map = MapOracle::Induced(random_op(5, true, seed));
            assert!(detect_antilinearity(&map, &basis, &tol()).unwrap());
            let map = MapOracle::Induced(random_op(5, false, seed));
            assert!(!detect_antilinearity(&map, &basis, &tol()).unwrap());
        }
    }

    #[test]
    fn antilinearity_rejects_non_preserving_map() {
        let basis: Vec<_> = (0..3).map(|j| UnitVector::basis(3, j)).collect();
        let r = random_projection::<f64>(3, 5).unwrap();
        let constant = crate::mapspec::FnMap::new(3, move |_: &Projection<f64>| Ok(r.clone()));
        assert!(matches!(
            detect_antilinearity(&constant, &basis, &tol()),
            Err(Error::NotTransitionPreserving { .. })
        ));
    }

    #[test]
    fn ambiguous_witness_when_tolerance_is_huge() {
        let basis: Vec<_> = (0..3).map(|j| UnitVector::basis(3, j)).collect();
        let id = MapOracle::Induced(SymmetryOperator::<f64>::identity(3));
        let mut loose = tol();
        loose.orth = 0.1;
        assert_eq!(
            detect_antilinearity(&id, &basis, &loose),
            Err(Error::AmbiguousWitness)
        );
    }

    #[test]
    fn reconstruct_identity_and_conjugation() {
        let id = SymmetryOperator::<f64>::identity(4);
        let r = reconstruct_isometry(&MapOracle::Induced(id.clone()), 4, &tol()).unwrap();
        assert!(!r.operator.is_antilinear());
        assert!(gauge_compare(&r.operator, &id, &tol()).unwrap());
        assert!(r.max_deviation <= 1e-10);
        assert_eq!(r.verified_pairs, 16 + VERIFY_RANDOM_PROBES);

        let cj = SymmetryOperator::<f64>::conjugation(4);
        let r = reconstruct_isometry(&MapOracle::Induced(cj.clone()), 4, &tol()).unwrap();
        assert!(r.operator.is_antilinear());
        assert!(gauge_compare(&r.operator, &cj, &tol()).unwrap());
    }

    #[test]
    fn reconstruct_random_unitary_dim4() {
        for seed in 0..20 {
            let u = random_op(4, false, seed);
            let r = reconstruct_isometry(&MapOracle::Induced(u.clone()), 4, &tol()).unwrap();
            assert!(
                gauge_compare(&r.operator, &u, &tol()).unwrap(),
                "seed {seed}"
            );
            assert!(r.max_deviation <= 1e-8);
        }
    }

    #[test]
    fn reconstructions_with_different_seeds_agree() {
        let map = MapOracle::Induced(random_op(5, true, 3));
        let a = reconstruct_isometry_seeded(&map, 5, 1, &tol()).unwrap();
        let b = reconstruct_isometry_seeded(&map, 5, 2, &tol()).unwrap();
        assert!(gauge_compare(&a.operator, &b.operator, &tol()).unwrap());
    }

    #[test]
    fn reconstruct_rejects_small_dim_and_mismatch() {
        let map = MapOracle::Induced(SymmetryOperator::<f64>::identity(3));
        assert!(matches!(
            reconstruct_isometry(&map, 2, &tol()),
            Err(Error::DimensionTooSmall { .. })
        ));
        assert!(matches!(
            reconstruct_isometry(&map, 4, &tol()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gauge_compare_examples() {
        let u = random_op(3, false, 1);
        let v = u.scaled(unimodular(0.7));
        assert!(gauge_compare(&u, &v, &tol()).unwrap());
        let id = SymmetryOperator::<f64>::identity(3);
        let mut flip = CMatrix::<f64>::identity(3, 3);
        flip[(1, 1)] = cplx(-1.0, 0.0);
        let flip = SymmetryOperator::new(flip, false, &tol()).unwrap();
        assert!(!gauge_compare(&id, &flip, &tol()).unwrap());
        assert!(!gauge_compare(&id, &SymmetryOperator::conjugation(3), &tol()).unwrap());
        assert!(gauge_compare(&id, &SymmetryOperator::identity(4), &tol()).is_err());
    }

    #[test]
    fn gauge_compare_orthogonal_operators_are_unrelated() {
        // tr(B*A) = 0 for these two unitaries
        let id = SymmetryOperator::<f64>::identity(3);
        let mut cyc = CMatrix::<f64>::zeros(3, 3);
        cyc[(1, 0)] = cplx(1.0, 0.0);
        cyc[(2, 1)] = cplx(1.0, 0.0);
        cyc[(0, 2)] = cplx(1.0, 0.0);
        let cyc = SymmetryOperator::new(cyc, false, &tol()).unwrap();
        assert_eq!(gauge_defect(&id, &cyc).unwrap(), None);
        assert!(!gauge_compare(&id, &cyc, &tol()).unwrap());
    }
}
