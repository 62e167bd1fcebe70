//! Boundedness of the curvature near the zero section, which decides whether
//! an instanton extends over CP².

use serde::Serialize;
use thiserror::Error;

use super::families::{FamilyError, SolutionFamily};
use super::InstantonCondition;
use crate::bundles::{extensions, Target};
use crate::connections::{AnsatzShape, ConnectionError};
use crate::gauge::GaugeAlgebra;
use crate::geometry::{least_squares_slope, ComplexStructure};
use crate::scalar::ScalarError;

/// Slopes of `log|F|²` against `log(r−1)` at or above `−ε` count as bounded.
pub const BOUNDEDNESS_THRESHOLD: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtensionError {
    #[error("the {gauge} bundle E_{n} does not extend over the zero section (n must be even)")]
    NoBundleExtension { gauge: String, n: i64 },
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Connection(#[from] ConnectionError),
}

impl From<ScalarError> for ExtensionError {
    fn from(e: ScalarError) -> Self {
        ExtensionError::Connection(e.into())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtensionReport {
    pub condition: String,
    pub gauge: String,
    pub n: i64,
    pub constants: Vec<(String, f64)>,
    /// Fitted exponent of `|F|²` in `r − 1`.
    pub exponent: f64,
    /// Slope test verdict.
    pub extends: bool,
    /// Verdict of the closed-form criterion on the constants.
    pub analytic: bool,
    pub agrees: bool,
    /// `(r − 1, |F|²)` probe values.
    pub probe: Vec<(f64, f64)>,
}

/// `r − 1 = 10^{−1}, 10^{−1.5}, …, 10^{−6}`.
pub fn probe_offsets() -> Vec<f64> {
    (0..=10).map(|i| 10f64.powf(-1.0 - 0.5 * i as f64)).collect()
}

fn bundle_target(algebra: GaugeAlgebra) -> Target {
    match algebra {
        GaugeAlgebra::U1 => Target::Circle,
        GaugeAlgebra::So3 => Target::So3,
    }
}

pub fn extension_check(fam: &SolutionFamily) -> Result<ExtensionReport, ExtensionError> {
    if extensions(fam.n, bundle_target(fam.algebra), fam.n.abs() + 1).is_empty() {
        return Err(ExtensionError::NoBundleExtension { gauge: fam.algebra.tag().into(), n: fam.n });
    }
    let norm = fam.ansatz.curvature()?.norm_sq()?;
    let probe: Vec<(f64, f64)> =
        probe_offsets().into_iter().map(|u| Ok((u, norm.evaluate_shifted(u)?))).collect::<Result<_, ScalarError>>()?;
    let exponent = if probe.iter().all(|(_, v)| *v == 0.0) {
        0.0
    } else {
        let xs: Vec<f64> = probe.iter().map(|(u, _)| u.ln()).collect();
        let ys: Vec<f64> = probe.iter().map(|(_, v)| v.abs().max(f64::MIN_POSITIVE).ln()).collect();
        least_squares_slope(&xs, &ys)
    };
    let extends = exponent >= -BOUNDEDNESS_THRESHOLD;
    let analytic = analytic_criterion(fam);
    Ok(ExtensionReport {
        condition: fam.condition.tag(),
        gauge: fam.algebra.tag().into(),
        n: fam.n,
        constants: fam.constants.clone(),
        exponent,
        extends,
        analytic,
        agrees: extends == analytic,
        probe,
    })
}

/// Which constants must vanish for the curvature to stay bounded.
pub fn analytic_criterion(fam: &SolutionFamily) -> bool {
    use ComplexStructure::*;
    use InstantonCondition::*;
    let c = |name: &str| fam.constant(name).unwrap_or(0.0);
    // C₀ enters the I and K families only through n·C₀
    let n_c0 = fam.n as f64 * c("C0");
    match (AnsatzShape::of(fam.algebra, fam.n), fam.condition) {
        (Ok(AnsatzShape::Trivial), _) => fam.constants.iter().all(|(_, v)| *v == 0.0),
        (_, Spin7(I)) => n_c0 == 0.0 && c("C2") == 0.0,
        (_, Spin7(J)) => c("C1") == 0.0 && c("C2") == 0.0,
        (_, Spin7(K)) => n_c0 == 0.0 && c("C1") == 0.0,
        (_, Su4(I)) => n_c0 == 0.0,
        (_, Su4(J)) => c("C2") == 0.0,
        (_, Su4(K)) => c("C1") == 0.0,
        (_, Sp2) => true,
    }
}
