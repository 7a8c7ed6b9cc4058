//! End-to-end reconstruction of a Wigner symmetry from a map that preserves
//! orthogonality in one direction and sends one COSP onto a COSP.
//!
//! The pipeline:
//!
//! 1. sample the orthogonality-preservation hypothesis ([`verify_orth_preserving`]);
//! 2. align the image of the COSP back onto the COSP with a unitary `V`
//!    ([`align_cosp`]), after which the map fixes every `P_j`;
//! 3. restrict the aligned map to the nested blocks
//!    `S_k = {e_1, e_2, e_3} ∪ {e_4 … e_{k+1}}` ([`restrict_to_block`]) and
//!    reconstruct on each one an operator normalized by `W_S e_1 = e_1`
//!    ([`block_operator`]);
//! 4. check that all blocks agree on linearity and on the phases of shared
//!    basis vectors, and patch them into one diagonal operator `W`
//!    ([`patch_blocks`]);
//! 5. verify the recovered symmetry against the map on random projections.
//!
//! Orthogonality preservation cannot be checked on a continuum. The gate
//! samples random orthogonal pairs plus a fixed set of rotated pairs, and the
//! report records how many.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{closest_unitary, compress, embed, hermitian_part, trace};
use crate::mapspec::ProjectionMap;
use crate::projspace::{
    ic_vectors, is_cosp, projector, random_orthogonal_pair, random_unit_vector, transition, Cosp,
    Projection, UnitVector,
};
use crate::rng::seeded_stream;
use crate::scalar::{lit, modulus, phase_of, to_f64, CMatrix, CVector, Real};
use crate::tolerance::Tolerances;
use crate::wigner::{apply_symmetry, reconstruct_isometry, ReconstructionResult, SymmetryOperator};

const GATE_STREAM: u64 = 0x4741_5445; // "GATE"
const PROBE_STREAM: u64 = 0x5052_4f42; // "PROB"
const FINAL_STREAM: u64 = 0x4649_4e4c; // "FINL"

pub const STAGE_GATE: &str = "verify_orth_preserving";
pub const STAGE_ALIGN: &str = "align_cosp";
pub const STAGE_RESTRICT: &str = "restrict_to_block";
pub const STAGE_BLOCK: &str = "block_operator";
pub const STAGE_PATCH: &str = "patch_blocks";
pub const STAGE_FINAL: &str = "final_verification";

/// Largest transition between the images of orthogonal pairs.
///
/// Pairs are `pairs` random orthogonal pairs drawn from `seed` (random `P`,
/// then `Q` inside the orthocomplement of `P`'s range), plus for every
/// `j < k` the rotated pairs `{P_{(e_j+e_k)/√2}, P_{(e_j−e_k)/√2}}` and
/// `{P_{(e_j+i·e_k)/√2}, P_{(e_j−i·e_k)/√2}}`. Pairs of basis projections are
/// left to [`align_cosp`], which checks the image of the whole COSP.
pub fn verify_orth_preserving<T: Real, M: ProjectionMap<T> + ?Sized>(
    map: &M,
    dim: usize,
    pairs: usize,
    seed: u64,
) -> Result<T> {
    if map.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: map.dim(),
        });
    }
    let mut worst = T::zero();
    let mut check = |p: &Projection<T>, q: &Projection<T>| -> Result<()> {
        let t = transition(&map.apply(p)?, &map.apply(q)?)?;
        if !(t <= worst) {
            worst = t;
        }
        Ok(())
    };
    for (p, q) in rotated_pairs(dim) {
        check(&p, &q)?;
    }
    let mut rng = seeded_stream(seed, GATE_STREAM);
    for _ in 0..pairs {
        let (p, q) = random_orthogonal_pair(dim, &mut rng);
        check(&p, &q)?;
    }
    Ok(worst)
}

/// Number of deterministic pairs [`verify_orth_preserving`] adds to the random ones.
pub fn rotated_pair_count(dim: usize) -> usize {
    dim * dim.saturating_sub(1)
}

fn rotated_pairs<T: Real>(dim: usize) -> Vec<(Projection<T>, Projection<T>)> {
    let s = lit::<T>(std::f64::consts::FRAC_1_SQRT_2);
    let mut out = Vec::with_capacity(rotated_pair_count(dim));
    for coeff in [Complex::new(s, T::zero()), Complex::new(T::zero(), s)] {
        for j in 0..dim {
            for k in j + 1..dim {
                let mut plus = CVector::<T>::zeros(dim);
                plus[j] = Complex::new(s, T::zero());
                plus[k] = coeff;
                let mut minus = plus.clone();
                minus[k] = -coeff;
                out.push((
                    projector(&UnitVector::from_normalized(plus)),
                    projector(&UnitVector::from_normalized(minus)),
                ));
            }
        }
    }
    out
}

/// Unitary `V` with `V · map(P_j) · V* = P_j` for every member of `cosp`.
///
/// `V = B F*`, where the columns of `B` are the COSP basis and those of `F`
/// the canonical representatives of the images `map(P_j)`, matched by index.
/// For the standard COSP the columns of `V*` are exactly those representatives.
pub fn align_cosp<T: Real, M: ProjectionMap<T> + ?Sized>(
    map: &M,
    cosp: &Cosp<T>,
    tol: &Tolerances<T>,
) -> Result<SymmetryOperator<T>> {
    let dim = cosp.dim();
    if map.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: map.dim(),
        });
    }
    let images = cosp
        .projections()
        .iter()
        .map(|p| map.apply(p))
        .collect::<Result<Vec<_>>>()?;
    if !is_cosp(&images, dim, tol) {
        return Err(Error::ImageNotCosp);
    }
    let reps = images
        .iter()
        .map(Projection::representative)
        .collect::<Result<Vec<_>>>()?;
    let f = CMatrix::from_fn(dim, dim, |r, c| reps[c].entries()[r]);
    let f = closest_unitary(&f)?;
    Ok(SymmetryOperator::from_parts_unchecked(
        cosp.basis_matrix() * f.adjoint(),
        false,
    ))
}

/// A set of basis indices (0-based) containing `{0, 1, 2}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockIndex {
    indices: Vec<usize>,
}

impl BlockIndex {
    pub fn new(mut indices: Vec<usize>, ambient_dim: usize) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if !(0..3).all(|j| indices.contains(&j)) {
            return Err(Error::InvalidBlock(format!(
                "block {:?} must contain the first three basis indices",
                one_based(&indices)
            )));
        }
        if let Some(&j) = indices.iter().find(|&&j| j >= ambient_dim) {
            return Err(Error::InvalidBlock(format!(
                "index {} exceeds the ambient dimension {ambient_dim}",
                j + 1
            )));
        }
        Ok(Self { indices })
    }

    /// `{0, 1, 2} ∪ {3, …, k}`.
    pub fn chain(k: usize, ambient_dim: usize) -> Result<Self> {
        Self::new((0..=k.max(2)).collect(), ambient_dim)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.binary_search(&j).is_ok()
    }

    /// Position of ambient index `j` inside the block.
    pub fn position(&self, j: usize) -> Option<usize> {
        self.indices.binary_search(&j).ok()
    }

    /// 1-based indices, as used in reports.
    pub fn one_based(&self) -> Vec<usize> {
        one_based(&self.indices)
    }
}

fn one_based(indices: &[usize]) -> Vec<usize> {
    indices.iter().map(|j| j + 1).collect()
}

/// The restriction of a map to the projections supported on a block.
///
/// A block projection is embedded into the ambient space, mapped, and
/// compressed back. Images whose weight outside the block exceeds
/// `tol.fit` are rejected.
pub struct BlockMap<'a, T: Real, M: ?Sized> {
    map: &'a M,
    block: BlockIndex,
    ambient: usize,
    fit: T,
    max_leakage: T,
}

impl<T: Real, M: ProjectionMap<T> + ?Sized> BlockMap<'_, T, M> {
    pub fn block(&self) -> &BlockIndex {
        &self.block
    }

    /// Largest leakage seen while validating the restriction.
    pub fn max_leakage(&self) -> T {
        self.max_leakage
    }

    fn image_with_leakage(&self, p: &Projection<T>) -> Result<(Projection<T>, T)> {
        let lifted = Projection::from_matrix_unchecked(embed(
            p.matrix(),
            self.block.indices(),
            self.ambient,
        ));
        let image = self.map.apply(&lifted)?;
        let inside = compress(image.matrix(), self.block.indices());
        let weight = trace(&inside).re;
        let leakage = (T::one() - weight).abs();
        if !(leakage <= self.fit) {
            return Err(Error::Leakage {
                energy: to_f64(leakage),
            });
        }
        let normalized = inside * Complex::new(T::one() / weight, T::zero());
        Ok((
            Projection::from_matrix_unchecked(hermitian_part(&normalized)),
            leakage,
        ))
    }
}

impl<T: Real, M: ProjectionMap<T> + ?Sized> ProjectionMap<T> for BlockMap<'_, T, M> {
    fn dim(&self) -> usize {
        self.block.len()
    }

    fn apply(&self, p: &Projection<T>) -> Result<Projection<T>> {
        if p.dim() != self.block.len() {
            return Err(Error::DimensionMismatch {
                expected: self.block.len(),
                found: p.dim(),
            });
        }
        Ok(self.image_with_leakage(p)?.0)
    }
}

/// Restricts `map` to the block `block`, validating on `probes` random block
/// projections that no image leaks out of the block by more than `tol.fit`.
pub fn restrict_to_block<'a, T: Real, M: ProjectionMap<T> + ?Sized>(
    map: &'a M,
    block: &BlockIndex,
    probes: usize,
    seed: u64,
    tol: &Tolerances<T>,
) -> Result<BlockMap<'a, T, M>> {
    let ambient = map.dim();
    if let Some(&j) = block.indices().iter().find(|&&j| j >= ambient) {
        return Err(Error::InvalidBlock(format!(
            "index {} exceeds the ambient dimension {ambient}",
            j + 1
        )));
    }
    let mut restricted = BlockMap {
        map,
        block: block.clone(),
        ambient,
        fit: tol.fit,
        max_leakage: T::zero(),
    };
    let mut rng = seeded_stream(seed, PROBE_STREAM ^ (block.len() as u64));
    let mut worst = T::zero();
    for _ in 0..probes {
        let p = projector(&random_unit_vector(block.len(), &mut rng));
        let (_, leakage) = restricted.image_with_leakage(&p)?;
        if leakage > worst {
            worst = leakage;
        }
    }
    restricted.max_leakage = worst;
    Ok(restricted)
}

/// Operator `W_S` inducing a block restriction, normalized so that
/// `W_S e_1 = e_1`. For an aligned map it is diagonal: `W_S e_j = z_j e_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator<T: Real> {
    pub block: BlockIndex,
    pub operator: SymmetryOperator<T>,
    /// Verification deviation of the underlying reconstruction.
    pub max_deviation: T,
}

impl<T: Real> BlockOperator<T> {
    /// Phase `z_j` for ambient index `j`, if `j` belongs to the block.
    pub fn phase(&self, j: usize) -> Option<Complex<T>> {
        self.block
            .position(j)
            .map(|a| self.operator.matrix()[(a, a)])
    }

    pub fn phases(&self) -> Vec<Complex<T>> {
        (0..self.block.len())
            .map(|a| self.operator.matrix()[(a, a)])
            .collect()
    }
}

/// Reconstructs the operator of a block map and fixes its global phase by
/// `W_S e_1 = e_1`. Fails with [`Error::NonDiagonalBlock`] when the result
/// does not map each basis vector to a multiple of itself.
pub fn block_operator<T: Real, M: ProjectionMap<T> + ?Sized>(
    blockmap: &M,
    block: &BlockIndex,
    tol: &Tolerances<T>,
) -> Result<BlockOperator<T>> {
    if blockmap.dim() != block.len() {
        return Err(Error::DimensionMismatch {
            expected: block.len(),
            found: blockmap.dim(),
        });
    }
    let ReconstructionResult {
        operator,
        max_deviation,
        ..
    } = reconstruct_isometry(blockmap, block.len(), tol)?;
    let z = phase_of(operator.matrix()[(0, 0)], lit(0.5))
        .ok_or(Error::NonDiagonalBlock { mass: 1.0 })?;
    let normalized = operator.scaled(z.conj());
    let m = normalized.matrix();
    let mut off = T::zero();
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if r != c {
                let a = modulus(m[(r, c)]);
                off += a * a;
            }
        }
    }
    let off = off.sqrt();
    if !(off <= tol.fit) {
        return Err(Error::NonDiagonalBlock { mass: to_f64(off) });
    }
    Ok(BlockOperator {
        block: block.clone(),
        operator: normalized,
        max_deviation,
    })
}

/// Largest `|z_j − z'_j|` over all pairs of blocks and their shared indices.
pub fn max_overlap_gap<T: Real>(blocks: &[BlockOperator<T>]) -> T {
    let mut worst = T::zero();
    for (i, a) in blocks.iter().enumerate() {
        for b in &blocks[i + 1..] {
            for &j in a.block.indices() {
                if let (Some(za), Some(zb)) = (a.phase(j), b.phase(j)) {
                    let gap = modulus(za - zb);
                    if gap > worst {
                        worst = gap;
                    }
                }
            }
        }
    }
    worst
}

/// Patches block operators into the global diagonal operator
/// `W e_j = W_S e_j`. All blocks must share one linearity flag and agree on
/// the phase of every shared index within `tol.gauge`, and together they
/// must cover `0..ambient_dim`.
pub fn patch_blocks<T: Real>(
    blocks: &[BlockOperator<T>],
    ambient_dim: usize,
    tol: &Tolerances<T>,
) -> Result<SymmetryOperator<T>> {
    let first = blocks.first().ok_or(Error::UncoveredIndex(0))?;
    for b in blocks {
        BlockIndex::new(b.block.indices().to_vec(), ambient_dim)?;
        if b.operator.dim() != b.block.len() {
            return Err(Error::DimensionMismatch {
                expected: b.block.len(),
                found: b.operator.dim(),
            });
        }
    }
    let antilinear = first.operator.is_antilinear();
    if blocks
        .iter()
        .any(|b| b.operator.is_antilinear() != antilinear)
    {
        return Err(Error::MixedLinearity);
    }
    for (i, a) in blocks.iter().enumerate() {
        for b in &blocks[i + 1..] {
            for &j in a.block.indices() {
                if let (Some(za), Some(zb)) = (a.phase(j), b.phase(j)) {
                    let gap = modulus(za - zb);
                    if !(gap <= tol.gauge) {
                        return Err(Error::OverlapPhaseMismatch {
                            index: j + 1,
                            gap: to_f64(gap),
                        });
                    }
                }
            }
        }
    }
    let mut w = CMatrix::<T>::zeros(ambient_dim, ambient_dim);
    for j in 0..ambient_dim {
        let z = blocks
            .iter()
            .find_map(|b| b.phase(j))
            .ok_or(Error::UncoveredIndex(j + 1))?;
        w[(j, j)] = z;
    }
    Ok(SymmetryOperator::from_parts_unchecked(w, antilinear))
}

/// Sampling parameters of [`reconstruct_symmetry_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineOptions {
    /// Random orthogonal pairs sampled by the gate.
    pub gate_pairs: usize,
    /// Random probes per block restriction.
    pub block_probes: usize,
    /// Random projections in the final verification.
    pub final_probes: usize,
    pub seed: u64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            gate_pairs: 200,
            block_probes: 20,
            final_probes: 100,
            seed: 0,
        }
    }
}

/// One line of the stage log.
#[derive(Debug, Clone, PartialEq)]
pub struct StageEntry {
    pub stage: &'static str,
    /// 1-based block indices for per-block stages.
    pub block: Option<Vec<usize>>,
    pub max_deviation: Option<f64>,
    pub passed: bool,
}

impl StageEntry {
    fn ok(stage: &'static str, block: Option<&BlockIndex>, deviation: f64) -> Self {
        Self {
            stage,
            block: block.map(BlockIndex::one_based),
            max_deviation: Some(deviation),
            passed: true,
        }
    }
}

/// Successful pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport<T: Real> {
    pub dim: usize,
    pub options: PipelineOptions,
    /// Total orthogonal pairs checked by the gate.
    pub gate_pairs_checked: usize,
    pub aligner: SymmetryOperator<T>,
    pub blocks: Vec<BlockOperator<T>>,
    /// Recovered symmetry of the original map.
    pub global: SymmetryOperator<T>,
    pub final_check: ReconstructionResult<T>,
    pub stage_log: Vec<StageEntry>,
}

/// Failed pipeline run; `stage` names where it stopped.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineFailure {
    pub dim: usize,
    pub options: PipelineOptions,
    pub stage: &'static str,
    pub error: Error,
    pub stage_log: Vec<StageEntry>,
}

impl std::fmt::Display for PipelineFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} failed: {}", self.stage, self.error)
    }
}

impl std::error::Error for PipelineFailure {}

/// `after ∘ map ∘ before`.
struct Conjugated<'a, T: Real, M: ?Sized> {
    before: SymmetryOperator<T>,
    map: &'a M,
    after: SymmetryOperator<T>,
}

impl<T: Real, M: ProjectionMap<T> + ?Sized> ProjectionMap<T> for Conjugated<'_, T, M> {
    fn dim(&self) -> usize {
        self.map.dim()
    }

    fn apply(&self, p: &Projection<T>) -> Result<Projection<T>> {
        let inner = apply_symmetry(&self.before, p)?;
        apply_symmetry(&self.after, &self.map.apply(&inner)?)
    }
}

/// [`reconstruct_symmetry_with`] under default [`PipelineOptions`].
pub fn reconstruct_symmetry<T: Real, M: ProjectionMap<T> + ?Sized>(
    map: &M,
    cosp: &Cosp<T>,
    dim: usize,
    tol: &Tolerances<T>,
) -> Result<PipelineReport<T>, PipelineFailure> {
    reconstruct_symmetry_with(map, cosp, dim, tol, &PipelineOptions::default())
}

/// Runs the full reconstruction pipeline, returning the recovered symmetry
/// or the stage at which a hypothesis failed.
pub fn reconstruct_symmetry_with<T: Real, M: ProjectionMap<T> + ?Sized>(
    map: &M,
    cosp: &Cosp<T>,
    dim: usize,
    tol: &Tolerances<T>,
    options: &PipelineOptions,
) -> Result<PipelineReport<T>, PipelineFailure> {
    let mut log: Vec<StageEntry> = Vec::new();
    let fail = |stage: &'static str,
                block: Option<&BlockIndex>,
                error: Error,
                log: &mut Vec<StageEntry>| {
        let deviation = match &error {
            Error::OrthogonalityViolated { max_transition } => Some(*max_transition),
            Error::Leakage { energy } => Some(*energy),
            Error::VerificationFailed { deviation }
            | Error::NotTransitionPreserving { deviation } => Some(*deviation),
            Error::NonDiagonalBlock { mass } => Some(*mass),
            Error::OverlapPhaseMismatch { gap, .. } => Some(*gap),
            _ => None,
        };
        log.push(StageEntry {
            stage,
            block: block.map(BlockIndex::one_based),
            max_deviation: deviation,
            passed: false,
        });
        PipelineFailure {
            dim,
            options: *options,
            stage,
            error,
            stage_log: std::mem::take(log),
        }
    };

    if let Err(e) = tol.validate() {
        return Err(fail(STAGE_GATE, None, e, &mut log));
    }
    if dim < 3 {
        return Err(fail(
            STAGE_GATE,
            None,
            Error::DimensionTooSmall { dim, min: 3 },
            &mut log,
        ));
    }
    for found in [map.dim(), cosp.dim()] {
        if found != dim {
            return Err(fail(
                STAGE_GATE,
                None,
                Error::DimensionMismatch {
                    expected: dim,
                    found,
                },
                &mut log,
            ));
        }
    }

    let gate = match verify_orth_preserving(map, dim, options.gate_pairs, options.seed) {
        Ok(t) => t,
        Err(e) => return Err(fail(STAGE_GATE, None, e, &mut log)),
    };
    if !(gate <= tol.orth) {
        let e = Error::OrthogonalityViolated {
            max_transition: to_f64(gate),
        };
        return Err(fail(STAGE_GATE, None, e, &mut log));
    }
    log.push(StageEntry::ok(STAGE_GATE, None, to_f64(gate)));

    let aligner = match align_cosp(map, cosp, tol) {
        Ok(v) => v,
        Err(e) => return Err(fail(STAGE_ALIGN, None, e, &mut log)),
    };
    // the aligned map expressed in the COSP basis fixes every P_{e_j}
    let basis = SymmetryOperator::from_parts_unchecked(cosp.basis_matrix(), false);
    let aligned = Conjugated {
        before: basis.clone(),
        map,
        after: basis.inverse().compose(&aligner),
    };
    let mut align_dev = T::zero();
    for j in 0..dim {
        let pj = projector(&UnitVector::basis(dim, j));
        match aligned.apply(&pj).and_then(|img| img.distance(&pj)) {
            Ok(d) if d > align_dev => align_dev = d,
            Ok(_) => {}
            Err(e) => return Err(fail(STAGE_ALIGN, None, e, &mut log)),
        }
    }
    if !(align_dev <= tol.fit) {
        let e = Error::VerificationFailed {
            deviation: to_f64(align_dev),
        };
        return Err(fail(STAGE_ALIGN, None, e, &mut log));
    }
    log.push(StageEntry::ok(STAGE_ALIGN, None, to_f64(align_dev)));

    let mut blocks = Vec::with_capacity(dim - 2);
    for k in 2..dim {
        let block = BlockIndex::chain(k, dim).expect("chain blocks are valid for dim >= 3");
        let restricted =
            match restrict_to_block(&aligned, &block, options.block_probes, options.seed, tol) {
                Ok(r) => r,
                Err(e) => return Err(fail(STAGE_RESTRICT, Some(&block), e, &mut log)),
            };
        log.push(StageEntry::ok(
            STAGE_RESTRICT,
            Some(&block),
            to_f64(restricted.max_leakage()),
        ));
        let op = match block_operator(&restricted, &block, tol) {
            Ok(op) => op,
            Err(e) => return Err(fail(STAGE_BLOCK, Some(&block), e, &mut log)),
        };
        log.push(StageEntry::ok(
            STAGE_BLOCK,
            Some(&block),
            to_f64(op.max_deviation),
        ));
        blocks.push(op);
    }

    let w = match patch_blocks(&blocks, dim, tol) {
        Ok(w) => w,
        Err(e) => return Err(fail(STAGE_PATCH, None, e, &mut log)),
    };
    log.push(StageEntry::ok(
        STAGE_PATCH,
        None,
        to_f64(max_overlap_gap(&blocks)),
    ));

    // map = V⁻¹ ∘ B ∘ W ∘ B⁻¹
    let global = aligner
        .inverse()
        .compose(&basis)
        .compose(&w)
        .compose(&basis.inverse());
    let mut rng = seeded_stream(options.seed, FINAL_STREAM);
    let mut final_dev = T::zero();
    for _ in 0..options.final_probes {
        let q = projector(&random_unit_vector(dim, &mut rng));
        let dev = map
            .apply(&q)
            .and_then(|img| apply_symmetry(&global, &q)?.distance(&img));
        match dev {
            Ok(d) if !(d <= final_dev) => final_dev = d,
            Ok(_) => {}
            Err(e) => return Err(fail(STAGE_FINAL, None, e, &mut log)),
        }
    }
    if !(final_dev <= tol.fit) {
        let e = Error::VerificationFailed {
            deviation: to_f64(final_dev),
        };
        return Err(fail(STAGE_FINAL, None, e, &mut log));
    }
    log.push(StageEntry::ok(STAGE_FINAL, None, to_f64(final_dev)));

    Ok(PipelineReport {
        dim,
        options: *options,
        gate_pairs_checked: options.gate_pairs + rotated_pair_count(dim),
        aligner,
        blocks,
        global: global.clone(),
        final_check: ReconstructionResult {
            operator: global,
            max_deviation: final_dev,
            verified_pairs: options.final_probes,
        },
        stage_log: log,
    })
}

/// Vectors of the informationally complete family, re-exported for callers
/// building tabulated maps.
pub fn design_vectors<T: Real>(dim: usize) -> Result<Vec<UnitVector<T>>> {
    ic_vectors(dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapspec::{adversarial_oracle, induced_oracle, FnMap, MapOracle};
    use crate::projspace::random_unitary;
    use crate::rng::seeded;
    use crate::scalar::{cplx, unimodular};
    use crate::wigner::gauge_compare;
    use std::collections::BTreeMap;

    fn tol() -> Tolerances<f64> {
        Tolerances::default()
    }

    fn random_op(dim: usize, antilinear: bool, seed: u64) -> SymmetryOperator<f64> {
        SymmetryOperator::new(random_unitary(dim, &mut seeded(seed)), antilinear, &tol()).unwrap()
    }

    fn diagonal_op(phases: &[f64], antilinear: bool) -> SymmetryOperator<f64> {
        let n = phases.len();
        let m = CMatrix::from_fn(n, n, |r, c| {
            if r == c {
                unimodular(phases[r])
            } else {
                cplx(0.0, 0.0)
            }
        });
        SymmetryOperator::new(m, antilinear, &tol()).unwrap()
    }

    #[test]
    fn gate_examples() {
        let u = induced_oracle(random_op(4, false, 1));
        assert!(verify_orth_preserving(&u, 4, 200, 0).unwrap() <= 1e-10);
        let constant = adversarial_oracle::<f64>("constant", 4, &BTreeMap::new(), 0).unwrap();
        assert!((verify_orth_preserving(&constant, 4, 200, 0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gate_grows_with_noise() {
        let mut last = 0.0;
        for eps in [1e-4, 1e-3, 1e-2] {
            let mut params = BTreeMap::new();
            params.insert("epsilon".to_string(), eps);
            let map = adversarial_oracle::<f64>("noisy_induced", 4, &params, 2).unwrap();
            let g = verify_orth_preserving(&map, 4, 200, 0).unwrap();
            assert!(g > last);
            last = g;
        }
    }

    #[test]
    fn align_identity_map() {
        let id = induced_oracle(SymmetryOperator::<f64>::identity(4));
        let v = align_cosp(&id, &Cosp::standard(4), &tol()).unwrap();
        assert!((v.matrix() - CMatrix::identity(4, 4)).norm() < 1e-12);
    }

    #[test]
    fn align_permutation_map() {
        // P_j ↦ P_{σ(j)} with σ = (0 1 2 3) ↦ (2 0 3 1)
        let sigma = [2usize, 0, 3, 1];
        let mut perm = CMatrix::<f64>::zeros(4, 4);
        for (j, &s) in sigma.iter().enumerate() {
            perm[(s, j)] = cplx(1.0, 0.0);
        }
        let map = induced_oracle(SymmetryOperator::new(perm.clone(), false, &tol()).unwrap());
        let v = align_cosp(&map, &Cosp::standard(4), &tol()).unwrap();
        // V = permutation of σ⁻¹ up to column phases
        let inv = perm.adjoint();
        for r in 0..4 {
            for c in 0..4 {
                assert!((v.matrix()[(r, c)].norm() - inv[(r, c)].norm()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn align_makes_unitary_diagonal() {
        let u = random_op(5, false, 4);
        let v = align_cosp(&induced_oracle(u.clone()), &Cosp::standard(5), &tol()).unwrap();
        let vu = v.matrix() * u.matrix();
        let mut off = 0.0;
        for r in 0..5 {
            for c in 0..5 {
                if r != c {
                    off += vu[(r, c)].norm_sqr();
                }
            }
            assert!((vu[(r, r)].norm() - 1.0).abs() < 1e-10);
        }
        assert!(off.sqrt() <= 1e-8);
    }

    #[test]
    fn align_rejects_cosp_breaker() {
        let map = adversarial_oracle::<f64>("cosp_breaker", 4, &BTreeMap::new(), 0).unwrap();
        assert_eq!(
            align_cosp(&map, &Cosp::standard(4), &tol()),
            Err(Error::ImageNotCosp)
        );
    }

    #[test]
    fn align_is_idempotent() {
        let map = induced_oracle(random_op(4, true, 6));
        let cosp = Cosp::standard(4);
        let v = align_cosp(&map, &cosp, &tol()).unwrap();
        let aligned = Conjugated {
            before: SymmetryOperator::identity(4),
            map: &map,
            after: v,
        };
        let again = align_cosp(&aligned, &cosp, &tol()).unwrap();
        let m = again.matrix();
        for r in 0..4 {
            for c in 0..4 {
                let want = if r == c { 1.0 } else { 0.0 };
                assert!((m[(r, c)].norm() - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn block_index_validation() {
        assert!(BlockIndex::new(vec![0, 1, 3], 5).is_err());
        assert!(BlockIndex::new(vec![0, 1, 2, 5], 5).is_err());
        let b = BlockIndex::new(vec![3, 0, 2, 1, 2], 5).unwrap();
        assert_eq!(b.indices(), &[0, 1, 2, 3]);
        assert_eq!(b.one_based(), vec![1, 2, 3, 4]);
        assert_eq!(BlockIndex::chain(4, 6).unwrap().indices(), &[0, 1, 2, 3, 4]);
    }

    #[test]
    fn restrict_identity() {
        let id = induced_oracle(SymmetryOperator::<f64>::identity(5));
        let block = BlockIndex::new(vec![0, 1, 2], 5).unwrap();
        let r = restrict_to_block(&id, &block, 20, 0, &tol()).unwrap();
        assert_eq!(r.dim(), 3);
        for p in crate::projspace::ic_family::<f64>(3).unwrap() {
            assert!(r.apply(&p).unwrap().distance(&p).unwrap() < 1e-14);
        }
    }

    #[test]
    fn restrict_block_diagonal_unitary() {
        let inner = random_unitary::<f64, _>(3, &mut seeded(2));
        let mut full = CMatrix::<f64>::identity(5, 5);
        for r in 0..3 {
            for c in 0..3 {
                full[(r, c)] = inner[(r, c)];
            }
        }
        full[(3, 3)] = unimodular(0.3);
        full[(4, 4)] = unimodular(-1.1);
        let map = induced_oracle(SymmetryOperator::new(full, false, &tol()).unwrap());
        let block = BlockIndex::new(vec![0, 1, 2], 5).unwrap();
        let restricted = restrict_to_block(&map, &block, 20, 0, &tol()).unwrap();
        let expected = induced_oracle(SymmetryOperator::new(inner, false, &tol()).unwrap());
        let mut rng = seeded(30);
        for _ in 0..20 {
            let p = projector(&random_unit_vector::<f64, _>(3, &mut rng));
            let d = restricted
                .apply(&p)
                .unwrap()
                .distance(&expected.apply(&p).unwrap())
                .unwrap();
            assert!(d < 1e-12);
        }
    }

    #[test]
    fn restrict_detects_leakage() {
        // rotation mixing e1 and e4 moves block projections out of span{e1,e2,e3}
        let (c, s) = (
            std::f64::consts::FRAC_1_SQRT_2,
            std::f64::consts::FRAC_1_SQRT_2,
        );
        let mut rot = CMatrix::<f64>::identity(4, 4);
        rot[(0, 0)] = cplx(c, 0.0);
        rot[(0, 3)] = cplx(-s, 0.0);
        rot[(3, 0)] = cplx(s, 0.0);
        rot[(3, 3)] = cplx(c, 0.0);
        let map = induced_oracle(SymmetryOperator::new(rot, false, &tol()).unwrap());
        let block = BlockIndex::new(vec![0, 1, 2], 4).unwrap();
        assert!(matches!(
            restrict_to_block(&map, &block, 20, 0, &tol()),
            Err(Error::Leakage { .. })
        ));
    }

    #[test]
    fn block_operator_examples() {
        let block = BlockIndex::new(vec![0, 1, 2], 3).unwrap();
        let id = induced_oracle(SymmetryOperator::<f64>::identity(3));
        let op = block_operator(&id, &block, &tol()).unwrap();
        assert!((op.operator.matrix() - CMatrix::identity(3, 3)).norm() < 1e-12);
        assert!(!op.operator.is_antilinear());

        let d = diagonal_op(
            &[0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI],
            false,
        );
        let op = block_operator(&induced_oracle(d.clone()), &block, &tol()).unwrap();
        assert!((op.operator.matrix() - d.matrix()).norm() < 1e-12);

        let cj = induced_oracle(SymmetryOperator::<f64>::conjugation(3));
        let op = block_operator(&cj, &block, &tol()).unwrap();
        assert!(op.operator.is_antilinear());
        assert!(gauge_compare(&op.operator, &SymmetryOperator::conjugation(3), &tol()).unwrap());
    }

    #[test]
    fn block_operator_rejects_unaligned_map() {
        let block = BlockIndex::new(vec![0, 1, 2], 3).unwrap();
        let map = induced_oracle(random_op(3, false, 3));
        assert!(matches!(
            block_operator(&map, &block, &tol()),
            Err(Error::NonDiagonalBlock { .. })
        ));
    }

    fn cut(global: &[f64], block: Vec<usize>, antilinear: bool) -> BlockOperator<f64> {
        let b = BlockIndex::new(block, global.len()).unwrap();
        let phases: Vec<f64> = b.indices().iter().map(|&j| global[j]).collect();
        BlockOperator {
            block: b,
            operator: diagonal_op(&phases, antilinear),
            max_deviation: 0.0,
        }
    }

    #[test]
    fn patch_recovers_global_diagonal() {
        let global = [0.0, 0.4, -1.3, 2.2, 0.9];
        let blocks = vec![
            cut(&global, vec![0, 1, 2, 3], false),
            cut(&global, vec![0, 1, 2, 4], false),
        ];
        let w = patch_blocks(&blocks, 5, &tol()).unwrap();
        assert!((w.matrix() - diagonal_op(&global, false).matrix()).norm() < 1e-15);
    }

    #[test]
    fn patch_rejects_mixed_linearity() {
        let global = [0.0, 0.4, -1.3, 2.2];
        let blocks = vec![
            cut(&global, vec![0, 1, 2], false),
            cut(&global, vec![0, 1, 2, 3], true),
        ];
        assert_eq!(patch_blocks(&blocks, 4, &tol()), Err(Error::MixedLinearity));
    }

    #[test]
    fn patch_rejects_phase_disagreement_and_gaps() {
        let a = [0.0, 0.4, -1.3, 2.2];
        let b = [0.0, 0.4, -1.2, 2.2];
        let blocks = vec![
            cut(&a, vec![0, 1, 2], false),
            cut(&b, vec![0, 1, 2, 3], false),
        ];
        assert!(matches!(
            patch_blocks(&blocks, 4, &tol()),
            Err(Error::OverlapPhaseMismatch { index: 3, .. })
        ));
        let blocks = vec![cut(&a, vec![0, 1, 2], false)];
        assert_eq!(
            patch_blocks(&blocks, 4, &tol()),
            Err(Error::UncoveredIndex(4))
        );
        assert_eq!(
            patch_blocks::<f64>(&[], 4, &tol()),
            Err(Error::UncoveredIndex(0))
        );
    }

    #[test]
    fn pipeline_round_trip_unitary_dim6() {
        let u = random_op(6, false, 42);
        let report =
            reconstruct_symmetry(&induced_oracle(u.clone()), &Cosp::standard(6), 6, &tol())
                .unwrap();
        assert!(gauge_compare(&report.global, &u, &tol()).unwrap());
        assert!(report.final_check.max_deviation <= 1e-8);
        assert_eq!(report.blocks.len(), 4);
        assert!(max_overlap_gap(&report.blocks) <= 1e-9);
    }

    #[test]
    fn pipeline_round_trip_antiunitary_dim5() {
        let u = random_op(5, true, 43);
        let report =
            reconstruct_symmetry(&induced_oracle(u.clone()), &Cosp::standard(5), 5, &tol())
                .unwrap();
        assert!(report.global.is_antilinear());
        assert!(gauge_compare(&report.global, &u, &tol()).unwrap());
    }

    #[test]
    fn pipeline_with_non_standard_cosp() {
        for antilinear in [false, true] {
            let u = random_op(5, antilinear, 44);
            let basis = random_unitary::<f64, _>(5, &mut seeded(45));
            let cosp = Cosp::from_unitary(&basis, &tol()).unwrap();
            let report =
                reconstruct_symmetry(&induced_oracle(u.clone()), &cosp, 5, &tol()).unwrap();
            assert!(gauge_compare(&report.global, &u, &tol()).unwrap());
        }
    }

    #[test]
    fn pipeline_rejects_constant_map_at_gate() {
        let map = adversarial_oracle::<f64>("constant", 4, &BTreeMap::new(), 0).unwrap();
        let err = reconstruct_symmetry(&map, &Cosp::standard(4), 4, &tol()).unwrap_err();
        assert_eq!(err.stage, STAGE_GATE);
        assert!(matches!(err.error, Error::OrthogonalityViolated { .. }));
        assert_eq!(err.stage_log.len(), 1);
    }

    #[test]
    fn pipeline_rejects_bad_arguments() {
        let map = induced_oracle(SymmetryOperator::<f64>::identity(3));
        assert!(reconstruct_symmetry(&map, &Cosp::standard(3), 4, &tol()).is_err());
        let small = FnMap::new(2, |p: &Projection<f64>| Ok(p.clone()));
        assert!(reconstruct_symmetry(&small, &Cosp::standard(2), 2, &tol()).is_err());
        let _ = MapOracle::<f64>::Induced(SymmetryOperator::identity(3));
    }
}
