//! Reduction of an instanton condition on the invariant ansatz to a linear
//! first-order system `dp/dr = M(r)·p + b(r)`.
//!
//! For `A = A₀ + Σ pⱼBⱼ` the curvature is
//! `F = F₀ + Σ pⱼ' dr∧Bⱼ + Σ pⱼ(dBⱼ + [A₀∧Bⱼ]) + ½Σ pⱼpₖ[Bⱼ∧Bₖ]`, so the
//! residual `⋆F + Ω∧F` is a polynomial in `p, p'` whose coefficients, one
//! row per (basis 6-form, generator), are closed-form functions of `r`.

use std::cell::Cell;
use std::collections::BTreeMap;

use ode_solvers::{DVector, Dopri5, System};
use serde_json::json;
use thiserror::Error;

use super::{apply, InstantonCondition};
use crate::connections::{canonical_form, unknowns, AnsatzShape, ConnectionError};
use crate::exterior::{FormError, InvariantForm, LieValuedForm};
use crate::gauge::GaugeAlgebra;
use crate::scalar::{Samples, ScalarError, ScalarField};

/// Local error tolerance of the integrator.
pub const INTEGRATION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error(transparent)]
    Connection(#[from] ConnectionError),
    #[error("the {condition} equations are nonlinear in the coefficients of this ansatz")]
    Nonlinear { condition: String },
    #[error("the {condition} equations are inconsistent: row {row} does not vanish")]
    Inconsistent { condition: String, row: String },
    #[error("the {condition} equations give no evolution equation for {unknown}")]
    Underdetermined { condition: String, unknown: String },
    #[error("expected {expected} initial values, got {got}")]
    InitialData { expected: usize, got: usize },
    #[error("integration failed at r = {r}: {reason}")]
    StepFailure { r: f64, reason: String },
}

impl From<FormError> for OdeError {
    fn from(e: FormError) -> Self {
        OdeError::Connection(e.into())
    }
}

impl From<ScalarError> for OdeError {
    fn from(e: ScalarError) -> Self {
        OdeError::Connection(e.into())
    }
}

/// One coefficient equation
/// `Σ deriv·p' + Σ linear·p + constant + Σ quad·pⱼpₖ = 0`.
#[derive(Clone, Debug)]
struct Row {
    label: String,
    deriv: Vec<ScalarField>,
    linear: Vec<ScalarField>,
    constant: ScalarField,
    quad: BTreeMap<(usize, usize), ScalarField>,
}

impl Row {
    fn new(label: String, k: usize) -> Self {
        Row {
            label,
            deriv: vec![ScalarField::zero(); k],
            linear: vec![ScalarField::zero(); k],
            constant: ScalarField::zero(),
            quad: BTreeMap::new(),
        }
    }

    fn entries_mut(&mut self) -> impl Iterator<Item = &mut ScalarField> {
        self.deriv
            .iter_mut()
            .chain(self.linear.iter_mut())
            .chain(std::iter::once(&mut self.constant))
            .chain(self.quad.values_mut())
    }

    fn is_zero(&self) -> bool {
        self.deriv.iter().chain(&self.linear).all(ScalarField::is_structurally_zero)
            && self.constant.is_structurally_zero()
            && self.quad.is_empty()
    }

    /// Replaces entries certified zero by the literal zero.
    fn clean(&mut self, samples: &Samples) {
        for e in self.entries_mut() {
            if !e.is_structurally_zero() && e.is_zero(samples) {
                *e = ScalarField::zero();
            }
        }
        self.quad.retain(|_, v| !v.is_structurally_zero());
    }

    fn scale(&mut self, f: &ScalarField) {
        for e in self.entries_mut() {
            if !e.is_structurally_zero() {
                *e = &*e * f;
            }
        }
    }

    /// `self −= f·other`.
    fn sub_multiple(&mut self, f: &ScalarField, other: &Row) {
        let sub = |a: &ScalarField, b: &ScalarField| {
            if b.is_structurally_zero() {
                a.clone()
            } else {
                a - f * b
            }
        };
        for j in 0..self.deriv.len() {
            self.deriv[j] = sub(&self.deriv[j], &other.deriv[j]);
            self.linear[j] = sub(&self.linear[j], &other.linear[j]);
        }
        self.constant = sub(&self.constant, &other.constant);
        for (key, v) in &other.quad {
            let cur = self.quad.remove(key).unwrap_or_else(ScalarField::zero);
            self.quad.insert(*key, sub(&cur, v));
        }
    }

    /// Replaces the unknown `l` by the known function `g`.
    fn fix(&mut self, l: usize, g: &ScalarField, dg: &ScalarField) {
        let mut c = &self.constant + &self.linear[l] * g + &self.deriv[l] * dg;
        let keys: Vec<(usize, usize)> = self.quad.keys().copied().filter(|&(a, b)| a == l || b == l).collect();
        for key in keys {
            let q = self.quad.remove(&key).unwrap();
            if key.0 == key.1 {
                c = c + q * g * g;
            } else {
                let other = if key.0 == l { key.1 } else { key.0 };
                self.linear[other] = &self.linear[other] + q * g;
            }
        }
        self.constant = c;
        self.linear[l] = ScalarField::zero();
        self.deriv[l] = ScalarField::zero();
    }
}

/// A linear system `dp/dr = M(r)·p + b(r)` for the free unknowns, plus the
/// unknowns fixed algebraically.
#[derive(Clone, Debug)]
pub struct OdeSystem {
    pub condition: InstantonCondition,
    pub algebra: GaugeAlgebra,
    pub n: i64,
    /// Names of the evolving unknowns, in ansatz order.
    pub unknowns: Vec<String>,
    pub matrix: Vec<Vec<ScalarField>>,
    pub inhomogeneity: Vec<ScalarField>,
    /// Unknowns determined without integration: `(name, value)`.
    pub constraints: Vec<(String, ScalarField)>,
    /// Nonzero coefficient equations before reduction.
    pub equations: usize,
    /// Equations left after row reduction (evolution equations plus constraints).
    pub independent: usize,
}

impl OdeSystem {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.unknowns.iter().position(|u| u == name)
    }

    /// `M[i][j]` by unknown names.
    pub fn entry(&self, row: &str, col: &str) -> Option<&ScalarField> {
        Some(&self.matrix[self.index_of(row)?][self.index_of(col)?])
    }

    pub fn constraint(&self, name: &str) -> Option<&ScalarField> {
        self.constraints.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn rhs(&self, r: f64, p: &[f64]) -> Result<Vec<f64>, ScalarError> {
        let mut out = Vec::with_capacity(p.len());
        for (row, b) in self.matrix.iter().zip(&self.inhomogeneity) {
            let mut v = b.evaluate(r)?;
            for (m, x) in row.iter().zip(p) {
                if !m.is_structurally_zero() {
                    v += m.evaluate(r)? * x;
                }
            }
            out.push(v);
        }
        Ok(out)
    }

    /// Integrates from `(r0, p0)` to `r1` with an adaptive Dormand–Prince
    /// RK4(5) scheme at local tolerance 1e−10.
    pub fn integrate(&self, r0: f64, p0: &[f64], r1: f64) -> Result<Trajectory, OdeError> {
        if p0.len() != self.unknowns.len() {
            return Err(OdeError::InitialData { expected: self.unknowns.len(), got: p0.len() });
        }
        for r in [r0, r1] {
            if r <= 1.0 || !r.is_finite() {
                return Err(OdeError::StepFailure { r, reason: "outside the domain r > 1".into() });
            }
        }
        if self.unknowns.is_empty() {
            return Ok(Trajectory { r: vec![r0, r1], values: vec![vec![], vec![]] });
        }
        let rhs = Rhs { system: self, failed: Cell::new(None) };
        let dx = (r1 - r0) / 100.0;
        let mut stepper = Dopri5::new(
            rhs,
            r0,
            r1,
            dx,
            DVector::from_vec(p0.to_vec()),
            INTEGRATION_TOLERANCE,
            INTEGRATION_TOLERANCE,
        );
        let result = stepper.integrate();
        let (xs, ys) = (stepper.x_out().clone(), stepper.y_out().clone());
        result.map_err(|e| OdeError::StepFailure { r: *xs.last().unwrap_or(&r0), reason: e.to_string() })?;
        let values: Vec<Vec<f64>> = ys.iter().map(|y| y.as_slice().to_vec()).collect();
        if let Some(r) = values.iter().zip(&xs).find(|(v, _)| v.iter().any(|x| !x.is_finite())).map(|(_, r)| *r) {
            return Err(OdeError::StepFailure { r, reason: "right-hand side is undefined".into() });
        }
        Ok(Trajectory { r: xs, values })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let matrix: Vec<Vec<String>> =
            self.matrix.iter().map(|row| row.iter().map(ScalarField::to_prefix).collect()).collect();
        json!({
            "condition": self.condition.tag(),
            "gauge": self.algebra.tag(),
            "n": self.n,
            "unknowns": self.unknowns,
            "matrix": matrix,
            "inhomogeneity": self.inhomogeneity.iter().map(ScalarField::to_prefix).collect::<Vec<_>>(),
            "constraints": self.constraints.iter().map(|(n, v)| json!({"unknown": n, "value": v.to_prefix()})).collect::<Vec<_>>(),
            "equations": self.equations,
            "independent": self.independent,
        })
    }
}

struct Rhs<'a> {
    system: &'a OdeSystem,
    failed: Cell<Option<f64>>,
}

impl System<f64, DVector<f64>> for Rhs<'_> {
    fn system(&self, x: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        match self.system.rhs(x, y.as_slice()) {
            Ok(v) => dy.copy_from_slice(&v),
            Err(_) => {
                self.failed.set(Some(x));
                dy.fill(f64::NAN);
            }
        }
    }

    fn solout(&mut self, _x: f64, _y: &DVector<f64>, _dy: &DVector<f64>) -> bool {
        self.failed.get().is_some()
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub r: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn last(&self) -> (f64, &[f64]) {
        (*self.r.last().unwrap(), self.values.last().unwrap())
    }
}

pub fn extract_ode(cond: InstantonCondition, algebra: GaugeAlgebra, n: i64) -> Result<OdeSystem, OdeError> {
    extract_ode_on(cond, algebra, n, &Samples::standard())
}

/// Builds and row-reduces the coefficient equations, certifying
/// cancellations on `samples`.
pub fn extract_ode_on(
    cond: InstantonCondition,
    algebra: GaugeAlgebra,
    n: i64,
    samples: &Samples,
) -> Result<OdeSystem, OdeError> {
    if AnsatzShape::of(algebra, n)? == AnsatzShape::Resonant {
        return Err(ConnectionError::UnsupportedAnsatz(n).into());
    }
    let us = unknowns(algebra, n)?;
    let k = us.len();
    let omega = cond.omega();
    let project = |x: &LieValuedForm| -> Result<LieValuedForm, OdeError> {
        let x = x.drop_vanishing_zeta(samples)?.to_e_basis()?;
        Ok(apply(&x, &omega)?)
    };

    let mut table: BTreeMap<(usize, Vec<usize>), Row> = BTreeMap::new();
    let names = algebra.generator_names();
    let mut collect = |form: &LieValuedForm, put: &dyn Fn(&mut Row, ScalarField)| {
        for (g, comp) in form.components.iter().enumerate() {
            for (idx, f) in comp.terms() {
                let digits: String = idx.iter().map(|i| i.to_string()).collect();
                let label = format!("e^{{{digits}}}⊗{}", names[g]);
                let row = table.entry((g, idx)).or_insert_with(|| Row::new(label, k));
                put(row, f.clone());
            }
        }
    };

    let a0 = canonical_form(algebra, n);
    let f0 = a0.exterior_derivative().add(&a0.bracket_wedge(&a0)?.scale(&ScalarField::rational(1, 2)));
    collect(&project(&f0)?, &|row, f| row.constant = &row.constant + f);
    let forms: Vec<LieValuedForm> = us.iter().map(|u| u.form(algebra)).collect();
    for (j, b) in forms.iter().enumerate() {
        let radial = b.wedge_scalar_left(&InvariantForm::dr())?;
        collect(&project(&radial)?, &|row, f| row.deriv[j] = &row.deriv[j] + f);
        let lin = b.exterior_derivative().add(&a0.bracket_wedge(b)?);
        collect(&project(&lin)?, &|row, f| row.linear[j] = &row.linear[j] + f);
        for (m, c) in forms.iter().enumerate().skip(j) {
            let mut q = b.bracket_wedge(c)?;
            if m == j {
                q = q.scale(&ScalarField::rational(1, 2));
            }
            collect(&project(&q)?, &|row, f| {
                let cur = row.quad.remove(&(j, m)).unwrap_or_else(ScalarField::zero);
                row.quad.insert((j, m), cur + f);
            });
        }
    }

    let mut rows: Vec<Row> = table.into_values().collect();
    for r in rows.iter_mut() {
        r.clean(samples);
    }
    rows.retain(|r| !r.is_zero());
    let equations = rows.len();

    let tag = cond.tag();
    let mut active = vec![true; k];
    let mut fixed: Vec<Option<ScalarField>> = vec![None; k];
    let pivots = loop {
        rows.retain(|r| !r.is_zero());
        let pivots = gauss_jordan(&mut rows, &active, samples);
        let is_pivot = |i: usize| pivots.contains(&Some(i));
        let constraint = rows.iter().enumerate().filter(|(i, _)| !is_pivot(*i)).find_map(|(_, row)| {
            if !row.quad.is_empty() {
                return None;
            }
            let nz: Vec<usize> = (0..k).filter(|&j| !row.linear[j].is_structurally_zero()).collect();
            match nz[..] {
                [l] => Some((l, -(&row.constant / &row.linear[l]))),
                _ => None,
            }
        });
        match constraint {
            Some((l, g)) => {
                let dg = g.derivative();
                for row in rows.iter_mut() {
                    row.fix(l, &g, &dg);
                    row.clean(samples);
                }
                active[l] = false;
                fixed[l] = Some(g);
            }
            None => break pivots,
        }
    };

    let is_pivot = |i: usize| pivots.contains(&Some(i));
    for (i, row) in rows.iter().enumerate() {
        if !row.quad.is_empty() {
            return Err(OdeError::Nonlinear { condition: tag });
        }
        if !is_pivot(i) && !row.is_zero() {
            return Err(OdeError::Inconsistent { condition: tag, row: row.label.clone() });
        }
    }
    let free: Vec<usize> = (0..k).filter(|&j| active[j]).collect();
    let mut matrix = Vec::new();
    let mut inhomogeneity = Vec::new();
    for &j in &free {
        let Some(p) = pivots[j] else {
            return Err(OdeError::Underdetermined { condition: tag, unknown: us[j].name.clone() });
        };
        let row = &rows[p];
        matrix.push(free.iter().map(|&m| -&row.linear[m]).collect());
        inhomogeneity.push(-&row.constant);
    }
    let constraints: Vec<(String, ScalarField)> =
        (0..k).filter_map(|j| fixed[j].clone().map(|g| (us[j].name.clone(), g))).collect();
    Ok(OdeSystem {
        condition: cond,
        algebra,
        n,
        unknowns: free.iter().map(|&j| us[j].name.clone()).collect(),
        matrix,
        inhomogeneity,
        independent: free.len() + constraints.len(),
        constraints,
        equations,
    })
}

/// Reduces the derivative columns of the active unknowns to the identity on
/// a subset of rows; returns the pivot row of each column.
fn gauss_jordan(rows: &mut [Row], active: &[bool], samples: &Samples) -> Vec<Option<usize>> {
    let k = active.len();
    let mut pivot_of = vec![None; k];
    let mut used = vec![false; rows.len()];
    for col in (0..k).filter(|&c| active[c]) {
        let candidate = (0..rows.len())
            .filter(|&i| !used[i] && !rows[i].deriv[col].is_structurally_zero())
            .min_by_key(|&i| rows[i].deriv[col].node_count());
        let Some(p) = candidate else { continue };
        let inv = rows[p].deriv[col].recip();
        rows[p].scale(&inv);
        rows[p].deriv[col] = ScalarField::one();
        rows[p].clean(samples);
        let pivot = rows[p].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == p || row.deriv[col].is_structurally_zero() {
                continue;
            }
            let f = row.deriv[col].clone();
            row.sub_multiple(&f, &pivot);
            row.deriv[col] = ScalarField::zero();
            row.clean(samples);
        }
        used[p] = true;
        pivot_of[col] = Some(p);
    }
    pivot_of
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ComplexStructure::*;

    fn r() -> ScalarField {
        ScalarField::r()
    }

    fn r4m1() -> ScalarField {
        r().pow(4) - ScalarField::one()
    }

    fn same(a: &ScalarField, b: &ScalarField) -> bool {
        (a - b).is_zero(&Samples::spread(20, 1.05, 20.0))
    }

    #[test]
    fn spin7_i_matches_the_displayed_system() {
        let n = 2;
        let sys = extract_ode(InstantonCondition::Spin7(I), GaugeAlgebra::U1, n).unwrap();
        assert_eq!(sys.unknowns, ["p0", "p1", "p2"]);
        let six = ScalarField::integer(6);
        let m00 = (ScalarField::integer(2) - &six * r().pow(4)) / (r() * r4m1());
        assert!(same(sys.entry("p0", "p0").unwrap(), &m00));
        assert!(same(sys.entry("p1", "p1").unwrap(), &(ScalarField::integer(2) * r().pow(3) / r4m1())));
        assert!(same(sys.entry("p2", "p2").unwrap(), &(-&six * r().pow(3) / r4m1())));
        assert!(same(sys.entry("p0", "p1").unwrap(), &ScalarField::zero()));
        let b0 = ScalarField::integer(-4 * n) * r() / r4m1();
        assert!(same(&sys.inhomogeneity[0], &b0));
        assert!(sys.inhomogeneity[1].is_structurally_zero());
    }

    #[test]
    fn su4_j_fixes_p0_and_p1() {
        let sys = extract_ode(InstantonCondition::Su4(J), GaugeAlgebra::U1, 2).unwrap();
        assert_eq!(sys.unknowns, ["p2"]);
        assert!(same(sys.constraint("p0").unwrap(), &(ScalarField::integer(-2) * r().pow(-2))));
        assert!(same(sys.constraint("p1").unwrap(), &ScalarField::zero()));
    }

    #[test]
    fn e0_su4_i_decouples() {
        let sys = extract_ode(InstantonCondition::Su4(I), GaugeAlgebra::So3, 0).unwrap();
        assert_eq!(sys.unknowns, ["p0", "q0", "s0"]);
        let rate = ScalarField::integer(-2) * (ScalarField::integer(3) * r().pow(4) - ScalarField::one()) / (r() * r4m1());
        for (i, row) in sys.matrix.iter().enumerate() {
            for (j, m) in row.iter().enumerate() {
                let expected = if i == j { rate.clone() } else { ScalarField::zero() };
                assert!(same(m, &expected));
            }
        }
        assert_eq!(sys.constraints.len(), 6);
        assert!(sys.constraints.iter().all(|(_, v)| v.is_structurally_zero()));
        assert_eq!((sys.equations, sys.independent), (36, 9));
    }

    #[test]
    fn twelve_equations_reduce_to_three() {
        let sys = extract_ode(InstantonCondition::Spin7(J), GaugeAlgebra::U1, 1).unwrap();
        assert_eq!((sys.equations, sys.independent), (12, 3));
    }

    #[test]
    fn spin7_on_the_trivial_bundle_is_nonlinear() {
        let e = extract_ode(InstantonCondition::Spin7(K), GaugeAlgebra::So3, 0).unwrap_err();
        assert!(matches!(e, OdeError::Nonlinear { .. }));
    }

    #[test]
    fn resonant_ansatz_is_unsupported() {
        let e = extract_ode(InstantonCondition::Sp2, GaugeAlgebra::So3, 3).unwrap_err();
        assert_eq!(e, OdeError::Connection(ConnectionError::UnsupportedAnsatz(3)));
    }

    #[test]
    fn integration_of_zero_data_stays_zero() {
        let sys = extract_ode(InstantonCondition::Spin7(I), GaugeAlgebra::U1, 0).unwrap();
        let t = sys.integrate(2.0, &[0.0, 0.0, 0.0], 5.0).unwrap();
        assert!(t.values.iter().all(|v| v.iter().all(|x| *x == 0.0)));
        assert!(matches!(sys.integrate(0.5, &[0.0; 3], 2.0), Err(OdeError::StepFailure { .. })));
        assert!(matches!(sys.integrate(2.0, &[0.0; 2], 3.0), Err(OdeError::InitialData { .. })));
    }
}
