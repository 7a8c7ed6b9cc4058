use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Named numerical tolerances used throughout the library.
///
/// `orth` bounds transition probabilities counted as zero, `herm`/`idem`/
/// `trace`/`complete` bound the structural invariants of operators, `fit`
/// bounds least-squares and verification residuals, `gauge` bounds the
/// Frobenius defect of phase-equivalent operators and `unit` bounds the
/// norm deviation of unit vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T> {
    pub orth: T,
    pub herm: T,
    pub idem: T,
    pub trace: T,
    pub complete: T,
    pub fit: T,
    pub gauge: T,
    pub unit: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            orth: lit(1e-8),
            herm: lit(1e-8),
            idem: lit(1e-8),
            trace: lit(1e-8),
            complete: lit(1e-8),
            fit: lit(1e-7),
            gauge: lit(1e-8),
            unit: lit(1e-10),
        }
    }
}

impl<T: Real> Tolerances<T> {
    fn fields(&self) -> [(&'static str, T); 8] {
        [
            ("orth", self.orth),
            ("herm", self.herm),
            ("idem", self.idem),
            ("trace", self.trace),
            ("complete", self.complete),
            ("fit", self.fit),
            ("gauge", self.gauge),
            ("unit", self.unit),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in self.fields() {
            if !(value > T::zero()) || !value.is_finite() {
                return Err(Error::InvalidTolerance { name });
            }
        }
        Ok(())
    }

    /// Every tolerance multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        Self {
            orth: self.orth * factor,
            herm: self.herm * factor,
            idem: self.idem * factor,
            trace: self.trace * factor,
            complete: self.complete * factor,
            fit: self.fit * factor,
            gauge: self.gauge * factor,
            unit: self.unit * factor,
        }
    }
}
