//! Canonical coefficients.

use crate::qpcore::input::CoefficientSpec;
use crate::qpcore::{LiftedMedium, QPMatrix, WindingMap, DEFAULT_P_CHECK};
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// `a ≡ 1`.
    ConstantIdentity,
    /// `a ≡ 2.5`.
    ConstantScaled,
    /// `a = 2 + cos x`, `Λ = (1)`.
    PeriodicCos,
    /// `a = 3 + sin x + sin √2x`, `Λ = (1, √2)ᵀ`.
    QpSinSqrt2,
    /// The `2 × 2` matrix with entries `sin x + sin √2x`, `cos √2x`,
    /// `cos √3x` on the line, `Λ = (1, √2, √3)ᵀ`. It lifts but is not
    /// coercive.
    RemarkMatrix,
}

const CONSTANT_IDENTITY: &str = r#"{"dim": 1, "lambda": [[1]], "entries": [
  {"k": 0, "l": 0, "terms": [{"freq": [0], "cos": 1}]}]}"#;

const CONSTANT_SCALED: &str = r#"{"dim": 1, "lambda": [[1]], "entries": [
  {"k": 0, "l": 0, "terms": [{"freq": [0], "cos": 2.5}]}]}"#;

const PERIODIC_COS: &str = r#"{"dim": 1, "lambda": [[1]], "entries": [
  {"k": 0, "l": 0, "terms": [{"freq": [0], "cos": 2}, {"freq": [1], "cos": 1}]}]}"#;

const QP_SIN_SQRT2: &str = r#"{"dim": 1, "lambda": [[1], ["sqrt(2)"]], "entries": [
  {"k": 0, "l": 0, "terms": [
    {"freq": [0], "cos": 3}, {"freq": [1], "sin": 1}, {"freq": ["sqrt(2)"], "sin": 1}]}]}"#;

const REMARK_MATRIX: &str = r#"{"dim": 1, "size": 2, "lambda": [[1], ["sqrt(2)"], ["sqrt(3)"]], "entries": [
  {"k": 0, "l": 0, "terms": [{"freq": [1], "sin": 1}, {"freq": ["sqrt(2)"], "sin": 1}]},
  {"k": 0, "l": 1, "terms": [{"freq": ["sqrt(2)"], "cos": 1}]},
  {"k": 1, "l": 1, "terms": [{"freq": ["sqrt(3)"], "cos": 1}]}]}"#;

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::ConstantIdentity,
        Preset::ConstantScaled,
        Preset::PeriodicCos,
        Preset::QpSinSqrt2,
        Preset::RemarkMatrix,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::ConstantIdentity => "constant-identity",
            Preset::ConstantScaled => "constant-scaled",
            Preset::PeriodicCos => "periodic-cos",
            Preset::QpSinSqrt2 => "qp-sin-sqrt2",
            Preset::RemarkMatrix => "remark-matrix",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown preset {name:?}")))
    }

    /// Whether the preset is a coercive scalar medium usable by every stage.
    pub fn is_elliptic(self) -> bool {
        self != Preset::RemarkMatrix
    }

    pub fn json(self) -> &'static str {
        match self {
            Preset::ConstantIdentity => CONSTANT_IDENTITY,
            Preset::ConstantScaled => CONSTANT_SCALED,
            Preset::PeriodicCos => PERIODIC_COS,
            Preset::QpSinSqrt2 => QP_SIN_SQRT2,
            Preset::RemarkMatrix => REMARK_MATRIX,
        }
    }

    pub fn spec(self) -> CoefficientSpec {
        CoefficientSpec::from_json(self.json()).expect("preset JSON is valid")
    }

    pub fn matrix<T: Real>(self) -> QPMatrix<T> {
        self.spec().to_matrix().expect("preset coefficients are valid")
    }

    pub fn winding<T: Real>(self) -> WindingMap<T> {
        self.spec()
            .winding(DEFAULT_P_CHECK)
            .expect("preset winding is valid")
            .expect("presets carry a winding matrix")
    }

    /// Lifted medium; fails with a coercivity error for the remark matrix.
    pub fn medium<T: Real>(self) -> Result<LiftedMedium<T>> {
        LiftedMedium::new(&self.matrix(), self.winding())
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_name(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qpcore::{detect_module, lift, FREQ_TOL};

    #[test]
    fn presets_build() {
        for p in Preset::ALL {
            assert_eq!(Preset::from_name(p.name()).unwrap(), p);
            let a = p.matrix::<f64>();
            let w = p.winding::<f64>();
            assert!(lift(&a, &w).is_ok(), "{p}");
            assert_eq!(p.medium::<f64>().is_ok(), p.is_elliptic(), "{p}");
        }
        assert!(Preset::from_name("nope").is_err());
    }

    #[test]
    fn remark_matrix_module() {
        let a = Preset::RemarkMatrix.matrix::<f64>();
        assert_eq!((a.dim(), a.size()), (1, 2));
        let w = detect_module(&a.frequencies(), DEFAULT_P_CHECK, FREQ_TOL).unwrap();
        assert_eq!(w.m(), 3);
        assert!(matches!(
            Preset::RemarkMatrix.medium::<f64>(),
            Err(Error::CoercivityViolation { .. }) | Err(Error::LiftMismatch(_))
        ));
    }
}
