//! SU(3)-invariant connections on `E_n → X*` in temporal gauge and their
//! curvature.
//!
//! A connection is `A = nζ⊗T₀ + Σⱼ pⱼ(r)·Bⱼ`, where each `Bⱼ` is a fixed
//! gauge-algebra-valued left-invariant 1-form spanning one direction of the
//! space of equivariant maps.

use std::collections::BTreeMap;

use num::BigRational;
use serde::Serialize;
use thiserror::Error;

use crate::exterior::{Frame, FormError, InvariantForm, LieValuedForm};
use crate::gauge::GaugeAlgebra;
use crate::scalar::{Samples, ScalarError, ScalarField};
use crate::su3::Coframe;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConnectionError {
    #[error("no invariant connection ansatz is implemented for so(3) with n = {0}")]
    UnsupportedAnsatz(i64),
    #[error("expected {expected} coefficient functions, got {got}")]
    CoefficientCount { expected: usize, got: usize },
    #[error("ansatz has no coefficient named `{0}`")]
    UnknownCoefficient(String),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Which family of equivariant maps the ansatz is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AnsatzShape {
    /// Everything along a single generator: `u(1)`, or `so(3)` with `n ∉ {0, ±3}`.
    Abelian,
    /// `so(3)` with `n = 0`: each of κ, ν₁, ν₂ may point along any generator.
    Trivial,
    /// `so(3)` with `n = 3`: the weight-3 modules map onto the T₂T₃-plane,
    /// one rotation-free direction per module.
    Resonant,
}

impl AnsatzShape {
    pub fn of(algebra: GaugeAlgebra, n: i64) -> Result<Self, ConnectionError> {
        match (algebra, n) {
            (GaugeAlgebra::U1, _) => Ok(AnsatzShape::Abelian),
            (GaugeAlgebra::So3, 0) => Ok(AnsatzShape::Trivial),
            (GaugeAlgebra::So3, 3) => Ok(AnsatzShape::Resonant),
            (GaugeAlgebra::So3, -3) => Err(ConnectionError::UnsupportedAnsatz(n)),
            (GaugeAlgebra::So3, _) => Ok(AnsatzShape::Abelian),
        }
    }
}

/// One unknown coefficient function and the 1-form it multiplies:
/// `Σ sign · θ ⊗ T_generator`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Unknown {
    pub name: String,
    pub slots: Vec<(i64, Coframe, usize)>,
}

impl Unknown {
    fn single(name: &str, c: Coframe, generator: usize) -> Self {
        Unknown { name: name.into(), slots: vec![(1, c, generator)] }
    }

    pub fn form(&self, algebra: GaugeAlgebra) -> LieValuedForm {
        self.slots.iter().fold(LieValuedForm::zero(algebra, Frame::MaurerCartan, 1), |acc, &(s, c, g)| {
            let f = InvariantForm::coframe(c).scale(&ScalarField::integer(s));
            acc.add(&LieValuedForm::along(algebra, g, f))
        })
    }
}

/// The unknowns of the invariant ansatz on `E_n`, in canonical order.
pub fn unknowns(algebra: GaugeAlgebra, n: i64) -> Result<Vec<Unknown>, ConnectionError> {
    let abelian = |g: usize, names: [&str; 3]| {
        vec![
            Unknown::single(names[0], Coframe::Kappa, g),
            Unknown::single(names[1], Coframe::Nu1, g),
            Unknown::single(names[2], Coframe::Nu2, g),
        ]
    };
    Ok(match AnsatzShape::of(algebra, n)? {
        AnsatzShape::Abelian => abelian(0, ["p0", "p1", "p2"]),
        AnsatzShape::Trivial => {
            let mut out = abelian(0, ["p0", "p1", "p2"]);
            out.extend(abelian(1, ["q0", "q1", "q2"]));
            out.extend(abelian(2, ["s0", "s1", "s2"]));
            out
        }
        AnsatzShape::Resonant => {
            let mut out = abelian(0, ["p0", "p1", "p2"]);
            out.push(Unknown { name: "w1".into(), slots: vec![(1, Coframe::Mu1, 1), (1, Coframe::Mu2, 2)] });
            out.push(Unknown { name: "w2".into(), slots: vec![(1, Coframe::Sigma1, 1), (1, Coframe::Sigma2, 2)] });
            out
        }
    })
}

/// `A_{n,0} = nζ ⊗ T₀`, the canonical connection.
pub fn canonical_form(algebra: GaugeAlgebra, n: i64) -> LieValuedForm {
    LieValuedForm::along(algebra, 0, InvariantForm::coframe(Coframe::Zeta).scale(&ScalarField::integer(n)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionAnsatz {
    pub algebra: GaugeAlgebra,
    pub n: i64,
    pub shape: AnsatzShape,
    pub unknowns: Vec<Unknown>,
    pub coefficients: Vec<ScalarField>,
}

impl ConnectionAnsatz {
    /// The canonical connection (all coefficients zero).
    pub fn canonical(algebra: GaugeAlgebra, n: i64) -> Result<Self, ConnectionError> {
        let unknowns = unknowns(algebra, n)?;
        let coefficients = vec![ScalarField::zero(); unknowns.len()];
        Ok(ConnectionAnsatz { algebra, n, shape: AnsatzShape::of(algebra, n)?, unknowns, coefficients })
    }

    pub fn new(algebra: GaugeAlgebra, n: i64, coefficients: Vec<ScalarField>) -> Result<Self, ConnectionError> {
        let mut a = Self::canonical(algebra, n)?;
        if coefficients.len() != a.unknowns.len() {
            return Err(ConnectionError::CoefficientCount { expected: a.unknowns.len(), got: coefficients.len() });
        }
        a.coefficients = coefficients;
        Ok(a)
    }

    /// Sets one named coefficient.
    pub fn with(mut self, name: &str, f: ScalarField) -> Result<Self, ConnectionError> {
        let i = self.index_of(name)?;
        self.coefficients[i] = f;
        Ok(self)
    }

    pub fn index_of(&self, name: &str) -> Result<usize, ConnectionError> {
        self.unknowns
            .iter()
            .position(|u| u.name == name)
            .ok_or_else(|| ConnectionError::UnknownCoefficient(name.into()))
    }

    pub fn coefficient(&self, name: &str) -> Option<&ScalarField> {
        self.index_of(name).ok().map(|i| &self.coefficients[i])
    }

    pub fn names(&self) -> Vec<&str> {
        self.unknowns.iter().map(|u| u.name.as_str()).collect()
    }

    pub fn substitute(&self, values: &BTreeMap<String, BigRational>) -> Self {
        let mut out = self.clone();
        out.coefficients = self.coefficients.iter().map(|c| c.substitute(values)).collect();
        out
    }

    /// The gauge-algebra-valued 1-form in the Maurer–Cartan coframe.
    pub fn one_form(&self) -> LieValuedForm {
        self.unknowns.iter().zip(&self.coefficients).fold(canonical_form(self.algebra, self.n), |acc, (u, p)| {
            if p.is_structurally_zero() {
                acc
            } else {
                acc.add(&u.form(self.algebra).scale(p))
            }
        })
    }

    /// `F = dA + ½[A ∧ A]`.
    pub fn curvature(&self) -> Result<CurvatureForm, ConnectionError> {
        self.curvature_on(&Samples::standard())
    }

    /// As [`Self::curvature`], certifying the vanishing ζ-terms on `samples`.
    pub fn curvature_on(&self, samples: &Samples) -> Result<CurvatureForm, ConnectionError> {
        let a = self.one_form();
        let da = a.exterior_derivative();
        let aa = a.bracket_wedge(&a)?.scale(&ScalarField::rational(1, 2));
        let mc = da.add(&aa).drop_vanishing_zeta(samples)?;
        let e = mc.to_e_basis()?;
        Ok(CurvatureForm { mc, e })
    }

    /// `d_A F = dF + [A ∧ F]`, in the Maurer–Cartan coframe.
    pub fn bianchi_residual(&self, f: &CurvatureForm) -> Result<LieValuedForm, ConnectionError> {
        let a = self.one_form();
        Ok(f.mc.exterior_derivative().add(&a.bracket_wedge(&f.mc)?))
    }
}

/// A curvature 2-form with its orthonormal-coframe expansion.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureForm {
    pub mc: LieValuedForm,
    pub e: LieValuedForm,
}

impl CurvatureForm {
    /// `|F|²` with the generators orthonormal.
    pub fn norm_sq(&self) -> Result<ScalarField, ConnectionError> {
        Ok(self.e.norm_sq()?)
    }

    /// `|(F, T_a)|²` for each generator.
    pub fn generator_norms_sq(&self) -> Result<Vec<ScalarField>, ConnectionError> {
        Ok(self.e.components.iter().map(|c| c.norm_sq()).collect::<Result<_, _>>()?)
    }

    pub fn norm_sq_at(&self, r: f64) -> Result<f64, ConnectionError> {
        if r <= 1.0 {
            return Err(ScalarError::Domain { r }.into());
        }
        Ok(self.norm_sq()?.evaluate(r)?)
    }
}
