//! The Calabi hyperkähler structure on T*CP²: metric coefficients, Kähler
//! forms, Cayley forms and their defining identities.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::exterior::{Frame, InvariantForm, MetricCoefficients};
use crate::scalar::{Samples, ScalarField};

/// One of the three complex structures of the hyperkähler triple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ComplexStructure {
    I,
    J,
    K,
}

impl ComplexStructure {
    pub const ALL: [ComplexStructure; 3] = [ComplexStructure::I, ComplexStructure::J, ComplexStructure::K];

    /// The next structure in the cycle I → J → K → I.
    pub fn next(self) -> Self {
        match self {
            ComplexStructure::I => ComplexStructure::J,
            ComplexStructure::J => ComplexStructure::K,
            ComplexStructure::K => ComplexStructure::I,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ComplexStructure::I => "I",
            ComplexStructure::J => "J",
            ComplexStructure::K => "K",
        }
    }
}

impl std::str::FromStr for ComplexStructure {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "I" | "i" => Ok(ComplexStructure::I),
            "J" | "j" => Ok(ComplexStructure::J),
            "K" | "k" => Ok(ComplexStructure::K),
            other => Err(format!("unknown complex structure `{other}`")),
        }
    }
}

/// Real and imaginary parts of a holomorphic volume form.
#[derive(Clone, Debug)]
pub struct HolomorphicVolume {
    pub re: InvariantForm,
    pub im: InvariantForm,
}

/// The Calabi hyperkähler data, built once.
#[derive(Clone, Debug)]
pub struct CalabiStructure {
    pub coefficients: MetricCoefficients,
    /// e⁰ … e⁷ written in the Maurer–Cartan coframe.
    pub coframe: Vec<InvariantForm>,
    /// ω_I, ω_J, ω_K in the orthonormal coframe.
    pub omega: [InvariantForm; 3],
    /// ω_L ∧ ω_L.
    pub omega_sq: [InvariantForm; 3],
    /// Cayley forms Φ_I, Φ_J, Φ_K.
    pub phi: [InvariantForm; 3],
    /// Θ = (ω_I² + ω_J² + ω_K²)/6.
    pub theta: InvariantForm,
    pub volume: InvariantForm,
}

fn two_form(terms: &[(i64, usize, usize)]) -> InvariantForm {
    terms.iter().fold(InvariantForm::zero(Frame::Orthonormal, 2), |acc, &(s, i, j)| {
        &acc + &InvariantForm::e_multi(&[i, j]).scale(&ScalarField::integer(s))
    })
}

fn half() -> ScalarField {
    ScalarField::rational(1, 2)
}

impl CalabiStructure {
    /// The shared instance.
    pub fn get() -> &'static CalabiStructure {
        static CELL: OnceLock<CalabiStructure> = OnceLock::new();
        CELL.get_or_init(CalabiStructure::build)
    }

    pub fn build() -> CalabiStructure {
        let coefficients = MetricCoefficients::calabi().clone();
        let coframe = (0..8).map(|i| InvariantForm::e(i).from_e_basis()).collect();
        let omega = [
            two_form(&[(-1, 0, 7), (1, 5, 6), (1, 1, 2), (-1, 3, 4)]),
            two_form(&[(-1, 0, 6), (-1, 5, 7), (-1, 2, 3), (1, 1, 4)]),
            two_form(&[(1, 0, 5), (-1, 6, 7), (1, 2, 4), (1, 1, 3)]),
        ];
        let omega_sq: [InvariantForm; 3] = std::array::from_fn(|i| omega[i].wedge(&omega[i]).unwrap());
        let phi = std::array::from_fn(|i| {
            let l = ComplexStructure::ALL[i];
            let ups = upsilon_from(&omega, l);
            &omega_sq[i].scale(&half()) + &ups.re
        });
        let theta = (&(&omega_sq[0] + &omega_sq[1]) + &omega_sq[2]).scale(&ScalarField::rational(1, 6));
        CalabiStructure { coefficients, coframe, omega, omega_sq, phi, theta, volume: InvariantForm::volume() }
    }

    pub fn omega(&self, l: ComplexStructure) -> &InvariantForm {
        &self.omega[l.index()]
    }

    pub fn phi(&self, l: ComplexStructure) -> &InvariantForm {
        &self.phi[l.index()]
    }

    /// Υ_L = ½(ω_{L'} + iω_{L''})² with (L, L', L'') cyclic.
    pub fn upsilon(&self, l: ComplexStructure) -> HolomorphicVolume {
        upsilon_from(&self.omega, l)
    }

    /// Certifies every defining identity on the given samples.
    pub fn identities(&self, samples: &Samples) -> Vec<IdentityCheck> {
        let mut out = Vec::new();
        let mut push = |name: String, form: InvariantForm| {
            out.push(IdentityCheck { residual: form.max_abs(samples), passed: form.is_zero(samples), name });
        };
        let m = &self.coefficients;
        let r = ScalarField::r();
        let scalar = |f: ScalarField| InvariantForm::function(Frame::Orthonormal, f);
        push("a^2 - (r^2-1)/2".into(), scalar(&m.a * &m.a - (&r * &r - ScalarField::one()) * half()));
        push("b^2 - (r^2+1)/2".into(), scalar(&m.b * &m.b - (&r * &r + ScalarField::one()) * half()));
        push("c - r".into(), scalar(&m.c - &r));
        push("2ab - cf".into(), scalar(ScalarField::integer(2) * &m.a * &m.b - &m.c * &m.f));
        let vol24 = self.volume.scale(&ScalarField::integer(24));
        for l in ComplexStructure::ALL {
            let i = l.index();
            push(format!("d(omega_{})", l.name()), self.omega[i].exterior_derivative());
            let fourth = self.omega_sq[i].wedge(&self.omega_sq[i]).unwrap();
            push(format!("omega_{0}^4 - 24 vol", l.name()), &fourth - &vol24);
            let ups = self.upsilon(l);
            let rhs = &self.omega_sq[i].scale(&half()) + &ups.re;
            push(format!("Phi_{0} - omega_{0}^2/2 - Re(Upsilon_{0})", l.name()), &self.phi[i] - &rhs);
            push(format!("d(Phi_{})", l.name()), self.phi[i].exterior_derivative());
        }
        let sum = &self.phi[2] + &self.phi[0];
        push("Phi_K + Phi_I - omega_I^2".into(), &sum - &self.omega_sq[0]);
        push("*Theta - Theta".into(), &self.theta.hodge_star().unwrap() - &self.theta);
        out
    }
}

fn upsilon_from(omega: &[InvariantForm; 3], l: ComplexStructure) -> HolomorphicVolume {
    let a = &omega[l.next().index()];
    let b = &omega[l.next().next().index()];
    // ½(a + ib)² = ½(a² − b²) + i a∧b
    let re = (&a.wedge(a).unwrap() - &b.wedge(b).unwrap()).scale(&half());
    let im = a.wedge(b).unwrap();
    HolomorphicVolume { re, im }
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
}

/// Decay of the Calabi metric towards the cone metric.
#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub r: Vec<f64>,
    pub deviation: Vec<f64>,
    /// Least-squares slope of log deviation against log r.
    pub slope: f64,
}

/// Ratios of the Calabi coefficients to the cone coefficients, minus one,
/// in the order dr, σ₁, σ₂, μ₁, μ₂, ν₁, ν₂, κ.
pub fn cone_deviation_components() -> Vec<ScalarField> {
    let r = ScalarField::r();
    let one = ScalarField::one();
    let r2 = r.pow(2);
    let r4 = r.pow(4);
    let sigma = (&r2 - &one) / &r2 - &one;
    let mu = (&r2 + &one) / &r2 - &one;
    vec![
        &r4 / (&r4 - &one) - &one,
        sigma.clone(),
        sigma,
        mu.clone(),
        mu,
        ScalarField::zero(),
        ScalarField::zero(),
        (&r4 - &one) / &r4 - &one,
    ]
}

/// Fits the rate at which `|g − g_C|_{g_C}` decays.
pub fn asymptotic_rate_probe(r_values: &[f64]) -> DecayReport {
    let comps = cone_deviation_components();
    let deviation: Vec<f64> = r_values
        .iter()
        .map(|&r| comps.iter().map(|c| c.evaluate(r).unwrap().powi(2)).sum::<f64>().sqrt())
        .collect();
    let xs: Vec<f64> = r_values.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = deviation.iter().map(|d| d.ln()).collect();
    DecayReport { r: r_values.to_vec(), deviation, slope: least_squares_slope(&xs, &ys) }
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}
