use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_part, trace};
use crate::projspace::{projector, random_unit_vector, random_unitary, Projection, UnitVector};
use crate::rng::{complex_normal, seeded_stream};
use crate::scalar::{lit, modulus, CMatrix, Real};
use crate::wigner::{apply_symmetry, SymmetryOperator};

/// Radius within which an input matches a tabulated or special-cased projection.
pub const MATCH_RADIUS: f64 = 1e-6;
const ADVERSARIAL_STREAM: u64 = 0x4144_5653; // "ADVS"

/// A total map on the rank-one projections of `C^dim`.
///
/// Evaluation must be pure and repeatable; implementors are shared across
/// threads, hence the `Sync` bound.
pub trait ProjectionMap<T: Real>: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, p: &Projection<T>) -> Result<Projection<T>>;
}

impl<T: Real, M: ProjectionMap<T> + ?Sized> ProjectionMap<T> for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, p: &Projection<T>) -> Result<Projection<T>> {
        (**self).apply(p)
    }
}

impl<T: Real, M: ProjectionMap<T> + ?Sized> ProjectionMap<T> for Box<M> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, p: &Projection<T>) -> Result<Projection<T>> {
        (**self).apply(p)
    }
}

/// Adapts a closure into a [`ProjectionMap`].
pub struct FnMap<F> {
    dim: usize,
    f: F,
}

impl<F> FnMap<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<T: Real, F> ProjectionMap<T> for FnMap<F>
where
    F: Fn(&Projection<T>) -> Result<Projection<T>> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, p: &Projection<T>) -> Result<Projection<T>> {
        check_input(self.dim, p)?;
        (self.f)(p)
    }
}

fn check_input<T: Real>(dim: usize, p: &Projection<T>) -> Result<()> {
    if p.dim() == dim {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: dim,
            found: p.dim(),
        })
    }
}

/// Finite table of `(input, output)` rays. Inputs farther than the match
/// radius from every tabulated input are rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct Table<T: Real> {
    dim: usize,
    pairs: Vec<(UnitVector<T>, UnitVector<T>)>,
    projections: Vec<(Projection<T>, Projection<T>)>,
    radius: T,
}

impl<T: Real> Table<T> {
    pub fn new(dim: usize, pairs: Vec<(UnitVector<T>, UnitVector<T>)>) -> Result<Self> {
        for (a, b) in &pairs {
            for v in [a, b] {
                if v.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: v.dim(),
                    });
                }
            }
        }
        let projections = pairs
            .iter()
            .map(|(a, b)| (projector(a), projector(b)))
            .collect();
        Ok(Self {
            dim,
            pairs,
            projections,
            radius: lit(MATCH_RADIUS),
        })
    }

    pub fn pairs(&self) -> &[(UnitVector<T>, UnitVector<T>)] {
        &self.pairs
    }

    fn lookup(&self, p: &Projection<T>) -> Result<Projection<T>> {
        let mut best: Option<(T, usize)> = None;
        for (i, (input, _)) in self.projections.iter().enumerate() {
            let d = input.distance(p)?;
            if best.is_none_or(|(b, _)| d < b) {
                best = Some((d, i));
            }
        }
        match best {
            Some((d, i)) if d <= self.radius => Ok(self.projections[i].1.clone()),
            Some((d, _)) => Err(Error::TableMiss {
                distance: crate::scalar::to_f64(d),
                radius: MATCH_RADIUS,
            }),
            None => Err(Error::TableMiss {
                distance: f64::INFINITY,
                radius: MATCH_RADIUS,
            }),
        }
    }
}

/// Named generators of maps that violate one hypothesis of the
/// reconstruction theorem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdversarialKind {
    /// `P ↦ R` for a fixed random `R`; breaks orthogonality preservation.
    Constant,
    /// Folds the `e_b` component of every ray into `e_a` before a random
    /// unitary; breaks orthogonality preservation.
    CollapsePair { a: usize, b: usize },
    /// Random unitary followed by the non-unitary distortion
    /// `Q ↦ AQA*/tr(AQA*)` with `A = I + εK`; degrades every tolerance
    /// continuously in `ε`.
    NoisyInduced { epsilon: f64 },
    /// Random unitary, except that `P_{e_2}` is sent to the image of
    /// `P_{e_1}`; the image of the standard COSP is no longer a COSP.
    CospBreaker,
}

impl AdversarialKind {
    pub const NAMES: [&'static str; 4] =
        ["constant", "collapse_pair", "noisy_induced", "cosp_breaker"];

    /// Builds a kind from its name and numeric parameters. Missing parameters
    /// take defaults (`a = 0`, `b = 1`, `epsilon = 1e-3`).
    pub fn from_name(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let allowed: &[&str] = match name {
            "constant" | "cosp_breaker" => &[],
            "collapse_pair" => &["a", "b"],
            "noisy_induced" => &["epsilon"],
            _ => return Err(Error::UnknownGenerator(name.to_string())),
        };
        if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::Schema(format!(
                "generator `{name}` takes no parameter `{k}`"
            )));
        }
        let index = |key: &str, default: usize| -> Result<usize> {
            match params.get(key) {
                None => Ok(default),
                Some(&v) if v >= 0.0 && v.fract() == 0.0 && v < 1e9 => Ok(v as usize),
                Some(v) => Err(Error::Schema(format!(
                    "parameter `{key}` must be a non-negative integer, got {v}"
                ))),
            }
        };
        Ok(match name {
            "constant" => Self::Constant,
            "cosp_breaker" => Self::CospBreaker,
            "collapse_pair" => {
                let (a, b) = (index("a", 0)?, index("b", 1)?);
                if a == b {
                    return Err(Error::Schema("collapse_pair needs distinct indices".into()));
                }
                Self::CollapsePair { a, b }
            }
            _ => {
                let epsilon = params.get("epsilon").copied().unwrap_or(1e-3);
                if !(epsilon.is_finite() && epsilon >= 0.0) {
                    return Err(Error::Schema(
                        "epsilon must be finite and non-negative".into(),
                    ));
                }
                Self::NoisyInduced { epsilon }
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Constant => "constant",
            Self::CollapsePair { .. } => "collapse_pair",
            Self::NoisyInduced { .. } => "noisy_induced",
            Self::CospBreaker => "cosp_breaker",
        }
    }

    pub fn params(&self) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        match *self {
            Self::CollapsePair { a, b } => {
                out.insert("a".to_string(), a as f64);
                out.insert("b".to_string(), b as f64);
            }
            Self::NoisyInduced { epsilon } => {
                out.insert("epsilon".to_string(), epsilon);
            }
            Self::Constant | Self::CospBreaker => {}
        }
        out
    }
}

impl fmt::Display for AdversarialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A seeded adversarial map. All random ingredients are drawn once at
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Adversarial<T: Real> {
    kind: AdversarialKind,
    dim: usize,
    seed: u64,
    base: SymmetryOperator<T>,
    target: Projection<T>,
    distortion: CMatrix<T>,
}

impl<T: Real> Adversarial<T> {
    pub fn new(kind: AdversarialKind, dim: usize, seed: u64) -> Result<Self> {
        if dim < 3 {
            return Err(Error::DimensionTooSmall { dim, min: 3 });
        }
        if let AdversarialKind::CollapsePair { a, b } = kind {
            if a >= dim || b >= dim {
                return Err(Error::Schema(format!(
                    "collapse_pair indices must be below {dim}"
                )));
            }
        }
        let mut rng = seeded_stream(seed, ADVERSARIAL_STREAM);
        let base = SymmetryOperator::from_parts_unchecked(random_unitary(dim, &mut rng), false);
        let target = projector(&random_unit_vector(dim, &mut rng));
        let k = CMatrix::<T>::from_fn(dim, dim, |_, _| complex_normal(&mut rng));
        let k = hermitian_part(&k);
        let k = &k * Complex::new(T::one() / k.norm(), T::zero());
        let eps = match kind {
            AdversarialKind::NoisyInduced { epsilon } => lit::<T>(epsilon),
            _ => T::zero(),
        };
        let distortion = CMatrix::<T>::identity(dim, dim) + k * Complex::new(eps, T::zero());
        Ok(Self {
            kind,
            dim,
            seed,
            base,
            target,
            distortion,
        })
    }

    pub fn kind(&self) -> AdversarialKind {
        self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, p: &Projection<T>) -> Result<Projection<T>> {
        match self.kind {
            AdversarialKind::Constant => Ok(self.target.clone()),
            AdversarialKind::CospBreaker => {
                let e2 = projector(&UnitVector::basis(self.dim, 1));
                if e2.distance(p)? <= lit(MATCH_RADIUS) {
                    apply_symmetry(&self.base, &projector(&UnitVector::basis(self.dim, 0)))
                } else {
                    apply_symmetry(&self.base, p)
                }
            }
            AdversarialKind::CollapsePair { a, b } => {
                let v = p.representative()?;
                let mut w = v.entries().clone();
                let (va, vb) = (w[a], w[b]);
                let merged = (modulus(va) * modulus(va) + modulus(vb) * modulus(vb)).sqrt();
                let pivot = if modulus(va) > T::zero() { va } else { vb };
                let m = modulus(pivot);
                if m > T::zero() {
                    w[a] = pivot * Complex::new(merged / m, T::zero());
                    w[b] = Complex::new(T::zero(), T::zero());
                }
                apply_symmetry(&self.base, &projector(&UnitVector::normalize(w)?))
            }
            AdversarialKind::NoisyInduced { .. } => {
                let q = apply_symmetry(&self.base, p)?;
                let raw = &self.distortion * q.matrix() * self.distortion.adjoint();
                let tr = trace(&raw).re;
                let scaled = raw * Complex::new(T::one() / tr, T::zero());
                Ok(Projection::from_matrix_unchecked(hermitian_part(&scaled)))
            }
        }
    }
}

/// Concrete, serializable map oracles.
#[derive(Debug, Clone, PartialEq)]
pub enum MapOracle<T: Real> {
    /// `P ↦ S P S*`.
    Induced(SymmetryOperator<T>),
    Tabulated(Table<T>),
    /// Applied left to right: the first component acts first.
    Composed(Vec<MapOracle<T>>),
    Adversarial(Adversarial<T>),
}

impl<T: Real> MapOracle<T> {
    pub fn induced(s: SymmetryOperator<T>) -> Self {
        Self::Induced(s)
    }

    pub fn adversarial(kind: AdversarialKind, dim: usize, seed: u64) -> Result<Self> {
        Ok(Self::Adversarial(Adversarial::new(kind, dim, seed)?))
    }

    pub fn composed(parts: Vec<MapOracle<T>>) -> Result<Self> {
        let dim = parts
            .first()
            .map(ProjectionMap::dim)
            .ok_or_else(|| Error::Schema("composed map needs at least one component".into()))?;
        if let Some(p) = parts.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        Ok(Self::Composed(parts))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Induced(_) => "induced",
            Self::Tabulated(_) => "tabulated",
            Self::Composed(_) => "composed",
            Self::Adversarial(_) => "adversarial",
        }
    }
}

impl<T: Real> ProjectionMap<T> for MapOracle<T> {
    fn dim(&self) -> usize {
        match self {
            Self::Induced(s) => s.dim(),
            Self::Tabulated(t) => t.dim,
            Self::Composed(parts) => parts.first().map_or(0, ProjectionMap::dim),
            Self::Adversarial(a) => a.dim,
        }
    }

    fn apply(&self, p: &Projection<T>) -> Result<Projection<T>> {
        check_input(self.dim(), p)?;
        match self {
            Self::Induced(s) => apply_symmetry(s, p),
            Self::Tabulated(t) => t.lookup(p),
            Self::Composed(parts) => parts.iter().try_fold(p.clone(), |acc, m| m.apply(&acc)),
            Self::Adversarial(a) => a.apply(p),
        }
    }
}

/// Induced oracle `P ↦ S P S*`.
pub fn induced_oracle<T: Real>(s: SymmetryOperator<T>) -> MapOracle<T> {
    MapOracle::Induced(s)
}

/// Adversarial oracle by generator name; see [`AdversarialKind`].
pub fn adversarial_oracle<T: Real>(
    name: &str,
    dim: usize,
    params: &BTreeMap<String, f64>,
    seed: u64,
) -> Result<MapOracle<T>> {
    MapOracle::adversarial(AdversarialKind::from_name(name, params)?, dim, seed)
}
