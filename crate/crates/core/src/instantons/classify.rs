//! Evaluation of all seven instanton conditions on one connection, and the
//! implications between them.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::families::{closed_form, constant_names, FamilyError};
use super::{residual, InstantonCondition};
use crate::connections::{ConnectionAnsatz, ConnectionError};
use crate::gauge::GaugeAlgebra;
use crate::geometry::ComplexStructure;
use crate::scalar::Samples;

#[derive(Clone, Debug, Serialize)]
pub struct ConditionResidual {
    pub condition: String,
    pub residual: f64,
    pub zero: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LatticeCheck {
    pub statement: String,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub residuals: Vec<ConditionResidual>,
    pub lattice: Vec<LatticeCheck>,
    pub consistent: bool,
}

impl Classification {
    pub fn satisfies(&self, cond: InstantonCondition) -> bool {
        self.residuals.iter().any(|r| r.condition == cond.tag() && r.zero)
    }
}

/// Evaluates every residual and checks
/// `SU4(L) ⇔ Spin7(L) ∧ Spin7(L'')` (with `L → L' → L''` cyclic) and
/// `Sp2 ⇔ all Spin7 ⇔ any two SU4`.
pub fn cross_equivalences(a: &ConnectionAnsatz, samples: &Samples) -> Result<Classification, ConnectionError> {
    let f = a.curvature_on(samples)?;
    let mut residuals = Vec::new();
    let mut zero = std::collections::BTreeMap::new();
    for cond in InstantonCondition::ALL {
        let res = residual(&f, cond)?;
        let z = res.is_zero(samples);
        zero.insert(cond, z);
        residuals.push(ConditionResidual { condition: cond.tag(), residual: res.max_abs(samples), zero: z });
    }
    let spin7 = |l: ComplexStructure| zero[&InstantonCondition::Spin7(l)];
    let su4 = |l: ComplexStructure| zero[&InstantonCondition::Su4(l)];
    let mut lattice = Vec::new();
    for l in ComplexStructure::ALL {
        let prev = l.next().next();
        lattice.push(LatticeCheck {
            statement: format!("su4-{0} <=> spin7-{0} and spin7-{1}", l.name(), prev.name()),
            holds: su4(l) == (spin7(l) && spin7(prev)),
        });
    }
    let all_spin7 = ComplexStructure::ALL.iter().all(|&l| spin7(l));
    let su4_count = ComplexStructure::ALL.iter().filter(|&&l| su4(l)).count();
    let sp2 = zero[&InstantonCondition::Sp2];
    lattice.push(LatticeCheck { statement: "sp2 <=> spin7-I and spin7-J and spin7-K".into(), holds: sp2 == all_spin7 });
    lattice.push(LatticeCheck { statement: "sp2 <=> at least two su4".into(), holds: sp2 == (su4_count >= 2) });
    let consistent = lattice.iter().all(|c| c.holds);
    Ok(Classification { residuals, lattice, consistent })
}

#[derive(Clone, Debug, Serialize)]
pub struct GridReport {
    pub condition: String,
    pub n: i64,
    pub evaluated: usize,
    /// Constants whose family member satisfies all three Spin(7) conditions.
    pub solutions: Vec<Vec<f64>>,
}

/// Searches a constant grid of the `Spin7(L)` family for members that are
/// Spin(7)-instantons for all three complex structures.
pub fn sp2_grid(l: ComplexStructure, algebra: GaugeAlgebra, n: i64, values: &[f64]) -> Result<GridReport, FamilyError> {
    let samples = Samples::spread(12, 1.1, 10.0);
    let mut solutions = Vec::new();
    let mut evaluated = 0;
    for &c0 in values {
        for &c1 in values {
            for &c2 in values {
                let cs = [c0, c1, c2];
                let fam = closed_form(InstantonCondition::Spin7(l), algebra, n, &cs)?;
                let f = fam.ansatz.curvature_on(&samples)?;
                evaluated += 1;
                let mut all = true;
                for m in ComplexStructure::ALL {
                    let res = residual(&f, InstantonCondition::Spin7(m)).map_err(ConnectionError::from)?;
                    if !res.is_zero(&samples) {
                        all = false;
                        break;
                    }
                }
                if all {
                    solutions.push(cs.to_vec());
                }
            }
        }
    }
    Ok(GridReport { condition: InstantonCondition::Spin7(l).tag(), n, evaluated, solutions })
}

#[derive(Clone, Debug, Serialize)]
pub struct LatticeSweep {
    pub seed: u64,
    pub checked: usize,
    pub violations: Vec<String>,
    /// How often each condition held, in the order of `InstantonCondition::ALL`.
    pub satisfied: Vec<(String, usize)>,
}

/// Checks the implication lattice on `count` random members of the abelian
/// families, with each constant zeroed half of the time so that the
/// intersections are populated.
pub fn lattice_sweep(seed: u64, count: usize, samples: &Samples) -> Result<LatticeSweep, FamilyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    let mut satisfied = vec![0usize; InstantonCondition::ALL.len()];
    for _ in 0..count {
        let cond = InstantonCondition::ALL[rng.random_range(0..InstantonCondition::ALL.len())];
        let n: i64 = rng.random_range(-4..=4);
        let names = constant_names(cond, GaugeAlgebra::U1, n)?;
        let cs: Vec<f64> = names
            .iter()
            .map(|_| if rng.random_bool(0.5) { 0.0 } else { (rng.random_range(-2.0..2.0f64) * 8.0).round() / 8.0 })
            .collect();
        let fam = closed_form(cond, GaugeAlgebra::U1, n, &cs)?;
        let c = cross_equivalences(&fam.ansatz, samples)?;
        for (i, cond) in InstantonCondition::ALL.iter().enumerate() {
            if c.satisfies(*cond) {
                satisfied[i] += 1;
            }
        }
        for check in c.lattice.iter().filter(|c| !c.holds) {
            violations.push(format!("{} n={n} C={cs:?}: {}", fam.condition, check.statement));
        }
    }
    Ok(LatticeSweep {
        seed,
        checked: count,
        violations,
        satisfied: InstantonCondition::ALL.iter().map(|c| c.tag()).zip(satisfied).collect(),
    })
}
