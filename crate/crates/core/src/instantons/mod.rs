//! Spin(7)-, SU(4)- and Sp(2)-instanton conditions for invariant
//! connections, and their analysis.

pub mod classify;
pub mod extension;
pub mod families;
pub mod ode;

use serde::{Deserialize, Serialize};

use crate::connections::{ConnectionAnsatz, ConnectionError, CurvatureForm};
use crate::exterior::{FormError, InvariantForm, LieValuedForm};
use crate::geometry::{CalabiStructure, ComplexStructure};
use crate::scalar::ScalarField;

/// `⋆F = −Ω ∧ F` for one of the seven calibrating 4-forms `Ω`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum InstantonCondition {
    Spin7(ComplexStructure),
    Su4(ComplexStructure),
    Sp2,
}

impl InstantonCondition {
    pub const ALL: [InstantonCondition; 7] = [
        InstantonCondition::Spin7(ComplexStructure::I),
        InstantonCondition::Spin7(ComplexStructure::J),
        InstantonCondition::Spin7(ComplexStructure::K),
        InstantonCondition::Su4(ComplexStructure::I),
        InstantonCondition::Su4(ComplexStructure::J),
        InstantonCondition::Su4(ComplexStructure::K),
        InstantonCondition::Sp2,
    ];

    /// `Φ_L`, `½ω_L²` or `Θ`, in the orthonormal coframe.
    pub fn omega(self) -> InvariantForm {
        let c = CalabiStructure::get();
        match self {
            InstantonCondition::Spin7(l) => c.phi(l).clone(),
            InstantonCondition::Su4(l) => c.omega_sq[l.index()].scale(&ScalarField::rational(1, 2)),
            InstantonCondition::Sp2 => c.theta.clone(),
        }
    }

    pub fn tag(self) -> String {
        match self {
            InstantonCondition::Spin7(l) => format!("spin7-{}", l.name()),
            InstantonCondition::Su4(l) => format!("su4-{}", l.name()),
            InstantonCondition::Sp2 => "sp2".into(),
        }
    }
}

impl std::fmt::Display for InstantonCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.tag())
    }
}

impl std::str::FromStr for InstantonCondition {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let lower = s.to_ascii_lowercase();
        if lower == "sp2" {
            return Ok(InstantonCondition::Sp2);
        }
        let (kind, l) = lower
            .split_once('-')
            .ok_or_else(|| format!("unknown family `{s}` (expected spin7-L, su4-L or sp2)"))?;
        let l: ComplexStructure = l.parse()?;
        match kind {
            "spin7" => Ok(InstantonCondition::Spin7(l)),
            "su4" => Ok(InstantonCondition::Su4(l)),
            _ => Err(format!("unknown family `{s}` (expected spin7-L, su4-L or sp2)")),
        }
    }
}

/// `⋆F + Ω ∧ F` for a curvature form.
pub fn residual(f: &CurvatureForm, cond: InstantonCondition) -> Result<LieValuedForm, FormError> {
    apply(&f.e, &cond.omega())
}

/// `⋆X + Ω ∧ X` for an orthonormal-frame 2-form `X`.
pub(crate) fn apply(x: &LieValuedForm, omega: &InvariantForm) -> Result<LieValuedForm, FormError> {
    Ok(x.hodge_star()?.add(&x.wedge_scalar_left(omega)?))
}

/// Residual of an ansatz with concrete coefficients.
pub fn residual_of(a: &ConnectionAnsatz, cond: InstantonCondition) -> Result<LieValuedForm, ConnectionError> {
    let f = a.curvature()?;
    Ok(residual(&f, cond)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::GaugeAlgebra;
    use crate::scalar::Samples;

    fn sp2(alg: GaugeAlgebra, n: i64) -> ConnectionAnsatz {
        let p0 = ScalarField::integer(-n) * ScalarField::r().pow(-2);
        ConnectionAnsatz::canonical(alg, n).unwrap().with("p0", p0).unwrap()
    }

    #[test]
    fn calibrating_forms_are_closed() {
        let s = Samples::standard();
        for c in InstantonCondition::ALL {
            assert!(c.omega().exterior_derivative().is_zero(&s), "{c}");
        }
    }

    #[test]
    fn sp2_solution_satisfies_every_condition() {
        let s = Samples::standard();
        for alg in [GaugeAlgebra::U1, GaugeAlgebra::So3] {
            let a = sp2(alg, 2);
            for c in InstantonCondition::ALL {
                assert!(residual_of(&a, c).unwrap().is_zero(&s), "{alg:?} {c}");
            }
        }
    }

    #[test]
    fn canonical_connection_is_not_sp2_for_nonzero_n() {
        let s = Samples::standard();
        let a = ConnectionAnsatz::canonical(GaugeAlgebra::U1, 2).unwrap();
        assert!(!residual_of(&a, InstantonCondition::Sp2).unwrap().is_zero(&s));
        let flat = ConnectionAnsatz::canonical(GaugeAlgebra::So3, 0).unwrap();
        assert!(residual_of(&flat, InstantonCondition::Su4(ComplexStructure::I)).unwrap().is_zero(&s));
    }

    #[test]
    fn tags_round_trip() {
        for c in InstantonCondition::ALL {
            assert_eq!(c.tag().parse::<InstantonCondition>().unwrap(), c);
        }
        assert!("g2-I".parse::<InstantonCondition>().is_err());
        assert_eq!("spin7-i".parse::<InstantonCondition>().unwrap().tag(), "spin7-I");
    }
}
