//! Closed-form solution families of the reduced instanton equations.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num::BigRational;
use serde::Serialize;
use thiserror::Error;

use super::ode::{extract_ode, OdeError, OdeSystem};
use super::{residual_of, InstantonCondition};
use crate::connections::{AnsatzShape, ConnectionAnsatz, ConnectionError};
use crate::gauge::GaugeAlgebra;
use crate::geometry::ComplexStructure;
use crate::scalar::{Radicand, Samples, ScalarError, ScalarField};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error("no closed-form {condition} family for {gauge} with n = {n}")]
    Unsupported { condition: String, gauge: String, n: i64 },
    #[error("expected {expected} constants, got {got}")]
    ConstantCount { expected: usize, got: usize },
    #[error("constant {0} is not finite")]
    NonFinite(String),
    #[error(transparent)]
    Connection(#[from] ConnectionError),
    #[error(transparent)]
    Ode(#[from] OdeError),
}

impl From<ScalarError> for FamilyError {
    fn from(e: ScalarError) -> Self {
        FamilyError::Connection(e.into())
    }
}

/// One member of a closed-form family.
#[derive(Clone, Debug)]
pub struct SolutionFamily {
    pub condition: InstantonCondition,
    pub algebra: GaugeAlgebra,
    pub n: i64,
    pub constants: Vec<(String, f64)>,
    /// Coefficients in terms of the parameters `n` and the constants.
    pub template: ConnectionAnsatz,
    pub ansatz: ConnectionAnsatz,
}

fn unsupported(cond: InstantonCondition, algebra: GaugeAlgebra, n: i64) -> FamilyError {
    FamilyError::Unsupported { condition: cond.tag(), gauge: algebra.tag().into(), n }
}

/// Names of the free constants of the family.
pub fn constant_names(
    cond: InstantonCondition,
    algebra: GaugeAlgebra,
    n: i64,
) -> Result<&'static [&'static str], FamilyError> {
    use ComplexStructure::*;
    use InstantonCondition::*;
    Ok(match (AnsatzShape::of(algebra, n)?, cond) {
        (AnsatzShape::Abelian, Spin7(_)) => &["C0", "C1", "C2"],
        (AnsatzShape::Abelian, Su4(I)) => &["C0"],
        (AnsatzShape::Abelian, Su4(J)) => &["C2"],
        (AnsatzShape::Abelian, Su4(K)) => &["C1"],
        (AnsatzShape::Abelian, Sp2) | (AnsatzShape::Trivial, Sp2) => &[],
        (AnsatzShape::Trivial, Su4(_)) => &["C1", "C2", "C3"],
        _ => return Err(unsupported(cond, algebra, n)),
    })
}

/// `(r⁴−1)^(k/2)`
fn r4m1(half_exponent: i32) -> ScalarField {
    ScalarField::radical(Radicand::RFourthMinusOne, half_exponent)
}

/// The family with `n` and the constants left symbolic.
pub fn template(cond: InstantonCondition, algebra: GaugeAlgebra, n: i64) -> Result<ConnectionAnsatz, FamilyError> {
    use ComplexStructure::*;
    use InstantonCondition::*;
    let names = constant_names(cond, algebra, n)?;
    let c = |name: &str| ScalarField::param(name);
    let r = ScalarField::r();
    let one = ScalarField::one();
    let zero = ScalarField::zero();
    let base = -(ScalarField::param("n") * r.pow(-2));
    // −(n/r²)(1 + C₀/(r⁴−1))
    let shifted = &base * (&one + c("C0") * r4m1(-2));
    let decaying = |k: &str| c(k) * r4m1(-3);
    let coefficients = match (AnsatzShape::of(algebra, n)?, cond) {
        (AnsatzShape::Abelian, Spin7(I)) => vec![shifted, c("C1") * r4m1(1), decaying("C2")],
        (AnsatzShape::Abelian, Spin7(J)) => {
            vec![&base + c("C0") * (&one - r.pow(4)) * r.pow(-2), decaying("C1"), decaying("C2")]
        }
        (AnsatzShape::Abelian, Spin7(K)) => vec![shifted, decaying("C1"), c("C2") * r4m1(1)],
        (AnsatzShape::Abelian, Su4(I)) => vec![shifted, zero.clone(), zero],
        (AnsatzShape::Abelian, Su4(J)) => vec![base, zero, decaying("C2")],
        (AnsatzShape::Abelian, Su4(K)) => vec![base, decaying("C1"), zero],
        (AnsatzShape::Abelian, Sp2) => vec![base, zero.clone(), zero],
        (AnsatzShape::Trivial, Sp2) => vec![zero; 9],
        (AnsatzShape::Trivial, Su4(l)) => {
            let slot = match l {
                I => 0,
                J => 2,
                K => 1,
            };
            let mut out = vec![zero; 9];
            for (g, name) in names.iter().enumerate() {
                out[3 * g + slot] = match l {
                    // C/(r²(1−r⁴))
                    I => -(c(name) * r.pow(-2) * r4m1(-2)),
                    _ => decaying(name),
                };
            }
            out
        }
        _ => return Err(unsupported(cond, algebra, n)),
    };
    Ok(ConnectionAnsatz::new(algebra, n, coefficients)?)
}

fn exact(name: &str, v: f64) -> Result<BigRational, FamilyError> {
    ScalarField::from_f64(v)
        .and_then(|f| f.as_rational().cloned())
        .ok_or_else(|| FamilyError::NonFinite(name.into()))
}

/// The family member with the given constants, in the order of
/// [`constant_names`].
pub fn closed_form(
    cond: InstantonCondition,
    algebra: GaugeAlgebra,
    n: i64,
    constants: &[f64],
) -> Result<SolutionFamily, FamilyError> {
    let names = constant_names(cond, algebra, n)?;
    if constants.len() != names.len() {
        return Err(FamilyError::ConstantCount { expected: names.len(), got: constants.len() });
    }
    let template = template(cond, algebra, n)?;
    let mut values = BTreeMap::new();
    values.insert("n".to_string(), BigRational::from_integer(n.into()));
    for (name, v) in names.iter().zip(constants) {
        values.insert(name.to_string(), exact(name, *v)?);
    }
    let ansatz = template.substitute(&values);
    Ok(SolutionFamily {
        condition: cond,
        algebra,
        n,
        constants: names.iter().map(|s| s.to_string()).zip(constants.iter().copied()).collect(),
        template,
        ansatz,
    })
}

impl SolutionFamily {
    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    /// The same family with one coefficient multiplied by `factor`.
    pub fn perturbed(&self, name: &str, factor: f64) -> Result<ConnectionAnsatz, FamilyError> {
        let f = ScalarField::from_f64(factor).ok_or_else(|| FamilyError::NonFinite(name.into()))?;
        let current = self.ansatz.coefficient(name).cloned().unwrap_or_else(ScalarField::zero);
        Ok(self.ansatz.clone().with(name, current * f)?)
    }

    /// Coefficient values at `r`, by name.
    pub fn values_at(&self, names: &[String], r: f64) -> Result<Vec<f64>, FamilyError> {
        names
            .iter()
            .map(|name| {
                let f = self.ansatz.coefficient(name).ok_or_else(|| ConnectionError::UnknownCoefficient(name.clone()))?;
                Ok(f.evaluate(r)?)
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub condition: String,
    pub passed: bool,
    /// Largest residual coefficient over the samples.
    pub residual: f64,
    pub samples: usize,
}

/// Substitutes the family into its own instanton condition.
pub fn verify_solution(fam: &SolutionFamily, samples: &Samples) -> Result<VerificationReport, FamilyError> {
    verify_ansatz(&fam.ansatz, fam.condition, samples)
}

pub fn verify_ansatz(
    a: &ConnectionAnsatz,
    cond: InstantonCondition,
    samples: &Samples,
) -> Result<VerificationReport, FamilyError> {
    let res = residual_of(a, cond)?;
    Ok(VerificationReport {
        condition: cond.tag(),
        passed: res.is_zero(samples),
        residual: res.max_abs(samples),
        samples: samples.len(),
    })
}

/// Agreement between integrated trajectories and the closed form.
#[derive(Clone, Debug, Serialize)]
pub struct CrossCheck {
    pub condition: String,
    pub r0: f64,
    pub r1: f64,
    /// Largest absolute deviation along the trajectory.
    pub max_deviation: f64,
    pub endpoint_deviation: f64,
    /// Largest deviation of the algebraic constraints from the family.
    pub constraint_deviation: f64,
}

/// Integrates the extracted system from the closed form at `r0` to `r1`.
pub fn cross_check(fam: &SolutionFamily, sys: &OdeSystem, r0: f64, r1: f64) -> Result<CrossCheck, FamilyError> {
    let start = fam.values_at(&sys.unknowns, r0)?;
    let traj = sys.integrate(r0, &start, r1)?;
    let mut max_deviation: f64 = 0.0;
    let mut endpoint_deviation = 0.0;
    for (r, v) in traj.r.iter().zip(&traj.values) {
        let exact = fam.values_at(&sys.unknowns, *r)?;
        let d = v.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        max_deviation = max_deviation.max(d);
        endpoint_deviation = d;
    }
    let samples = Samples::spread(20, r0.min(r1), r0.max(r1));
    let mut constraint_deviation: f64 = 0.0;
    for (name, g) in &sys.constraints {
        let f = fam.ansatz.coefficient(name).cloned().unwrap_or_else(ScalarField::zero);
        constraint_deviation = constraint_deviation.max((f - g).max_abs(&samples));
    }
    Ok(CrossCheck {
        condition: fam.condition.tag(),
        r0,
        r1,
        max_deviation,
        endpoint_deviation,
        constraint_deviation,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CompletenessReport {
    pub condition: String,
    pub gauge: String,
    pub n: i64,
    pub dimension: usize,
    /// Largest distance from an integrated solution to the family.
    pub max_deviation: f64,
    pub passed: bool,
}

/// Integrates the affine system from `k + 1` independent initial values at
/// `r = 2`, fits the family constants to each start, and measures how far
/// each trajectory strays from the fitted family member on `[2, 5]`.
pub fn completeness(
    cond: InstantonCondition,
    algebra: GaugeAlgebra,
    n: i64,
    tol: f64,
) -> Result<CompletenessReport, FamilyError> {
    let sys = extract_ode(cond, algebra, n)?;
    let names = constant_names(cond, algebra, n)?;
    let k = sys.unknowns.len();
    let (r0, r1) = (2.0, 5.0);
    let base = closed_form(cond, algebra, n, &vec![0.0; names.len()])?;
    let origin = base.values_at(&sys.unknowns, r0)?;
    // columns: response of the free unknowns to each constant
    let mut phi = DMatrix::zeros(k, names.len());
    for j in 0..names.len() {
        let mut cs = vec![0.0; names.len()];
        cs[j] = 1.0;
        let v = closed_form(cond, algebra, n, &cs)?.values_at(&sys.unknowns, r0)?;
        for i in 0..k {
            phi[(i, j)] = v[i] - origin[i];
        }
    }
    let mut max_deviation: f64 = 0.0;
    // with no free unknowns the solution set is the single closed form
    let starts = if k == 0 { 0 } else { k + 1 };
    for start in 0..starts {
        let mut y0 = vec![0.0; k];
        if start < k {
            y0[start] = 1.0;
        }
        let rhs = DVector::from_iterator(k, y0.iter().zip(&origin).map(|(y, o)| y - o));
        let fit = if names.is_empty() {
            Vec::new()
        } else {
            let x = phi.clone().svd(true, true).solve(&rhs, 1e-12).map_err(|_| unsupported(cond, algebra, n))?;
            x.as_slice().to_vec()
        };
        let fam = closed_form(cond, algebra, n, &fit)?;
        let start_gap = fam.values_at(&sys.unknowns, r0)?.iter().zip(&y0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let traj = sys.integrate(r0, &y0, r1)?;
        let mut gap = start_gap;
        for (r, v) in traj.r.iter().zip(&traj.values) {
            let exact = fam.values_at(&sys.unknowns, *r)?;
            gap = v.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(gap, f64::max);
        }
        max_deviation = max_deviation.max(gap);
    }
    Ok(CompletenessReport {
        condition: cond.tag(),
        gauge: algebra.tag().into(),
        n,
        dimension: k,
        passed: max_deviation < tol,
        max_deviation,
    })
}
