//! Invariant differential forms on (1, ∞) × SU(3).
//!
//! Forms are expanded either in the Maurer–Cartan coframe
//! `(dr, ζ, κ, ν₁, ν₂, σ₁, σ₂, μ₁, μ₂)` or in the Calabi orthonormal coframe
//! `(e⁰, …, e⁷)`. Basis k-forms are bitmasks over the frame slots; all signs
//! come from the two orderings fixed here.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::gauge::GaugeAlgebra;
use crate::scalar::{Radicand, Samples, ScalarField};
use crate::su3::{Coframe, StructureEquationTable};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("wedge product of degree {0} exceeds the dimension")]
    DegreeOverflow(usize),
    #[error("form has a ζ-component and cannot be written in the orthonormal coframe")]
    NonHorizontalForm,
    #[error("forms are expanded in different frames")]
    FrameMismatch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Frame {
    /// Slots `0 = dr`, `1..=8` = ζ, κ, ν₁, ν₂, σ₁, σ₂, μ₁, μ₂.
    MaurerCartan,
    /// Slots `0..=7` = e⁰ … e⁷.
    Orthonormal,
}

impl Frame {
    pub fn slots(self) -> usize {
        match self {
            Frame::MaurerCartan => 9,
            Frame::Orthonormal => 8,
        }
    }
}

/// The MC slot of `dr`.
pub const DR: usize = 0;

/// The MC slot of a left-invariant coframe form.
pub fn slot(c: Coframe) -> usize {
    c.index() + 1
}

pub type Mask = u16;

pub fn mask_of(indices: &[usize]) -> Mask {
    indices.iter().fold(0, |m, &i| m | (1 << i))
}

pub fn indices_of(mask: Mask) -> Vec<usize> {
    (0..16).filter(|i| mask & (1 << i) != 0).collect()
}

/// Sign of `e^a ∧ e^b` relative to `e^{a∪b}`, or `None` if they overlap.
pub fn wedge_sign(a: Mask, b: Mask) -> Option<i64> {
    if a & b != 0 {
        return None;
    }
    // count pairs (i in a, j in b) with i > j
    let mut inversions = 0;
    for j in indices_of(b) {
        inversions += (a >> (j + 1)).count_ones();
    }
    Some(if inversions % 2 == 0 { 1 } else { -1 })
}

/// Sorts a list of distinct slots, returning the sign of the permutation.
fn sort_with_sign(list: &mut [usize]) -> Option<i64> {
    let mut sign = 1;
    for i in 0..list.len() {
        for j in 0..list.len() - 1 - i {
            if list[j] == list[j + 1] {
                return None;
            }
            if list[j] > list[j + 1] {
                list.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    if list.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some(sign)
}

/// Metric coefficient functions of the Calabi metric.
#[derive(Clone, Debug)]
pub struct MetricCoefficients {
    /// `a = ((r²−1)/2)^½`
    pub a: ScalarField,
    /// `b = ((r²+1)/2)^½`
    pub b: ScalarField,
    /// `c = r`
    pub c: ScalarField,
    /// `f = (r⁴−1)^½ / r`
    pub f: ScalarField,
    /// `dt/dr = r² / (r⁴−1)^½`
    pub dt_dr: ScalarField,
}

impl MetricCoefficients {
    pub fn calabi() -> &'static MetricCoefficients {
        static CELL: OnceLock<MetricCoefficients> = OnceLock::new();
        CELL.get_or_init(|| {
            let r = ScalarField::r();
            let inv_sqrt2 = ScalarField::radical(Radicand::Integer(2), -1);
            MetricCoefficients {
                a: &inv_sqrt2 * ScalarField::radical(Radicand::RSquaredMinusOne, 1),
                b: &inv_sqrt2 * ScalarField::radical(Radicand::RSquaredPlusOne, 1),
                c: r.clone(),
                f: r.recip() * ScalarField::radical(Radicand::RFourthMinusOne, 1),
                dt_dr: r.pow(2) * ScalarField::radical(Radicand::RFourthMinusOne, -1),
            }
        })
    }
}

struct BasisChange {
    /// MC slot → (e index, g) with θ = g·eⁱ; ζ has no image.
    to_e: Vec<Option<(usize, ScalarField)>>,
    /// e index → (MC slot, h) with eⁱ = h·θ.
    from_e: Vec<(usize, ScalarField)>,
}

fn basis_change() -> &'static BasisChange {
    static CELL: OnceLock<BasisChange> = OnceLock::new();
    CELL.get_or_init(|| {
        let m = MetricCoefficients::calabi();
        // eⁱ = h·θ
        let from_e: Vec<(usize, ScalarField)> = vec![
            (DR, m.dt_dr.clone()),
            (slot(Coframe::Sigma1), m.a.clone()),
            (slot(Coframe::Sigma2), m.a.clone()),
            (slot(Coframe::Mu1), m.b.clone()),
            (slot(Coframe::Mu2), m.b.clone()),
            (slot(Coframe::Nu1), m.c.clone()),
            (slot(Coframe::Nu2), m.c.clone()),
            (slot(Coframe::Kappa), m.f.clone()),
        ];
        let mut to_e = vec![None; 9];
        for (i, (s, h)) in from_e.iter().enumerate() {
            to_e[*s] = Some((i, h.recip()));
        }
        BasisChange { to_e, from_e }
    })
}

fn structure_table() -> &'static StructureEquationTable {
    static CELL: OnceLock<StructureEquationTable> = OnceLock::new();
    CELL.get_or_init(StructureEquationTable::computed)
}

/// Exterior derivative of a constant-coefficient MC basis form.
fn d_basis(mask: Mask) -> Vec<(i64, Mask)> {
    let idx = indices_of(mask);
    let mut out: BTreeMap<Mask, i64> = BTreeMap::new();
    for (pos, &s) in idx.iter().enumerate() {
        if s == DR {
            continue;
        }
        let c = Coframe::ALL[s - 1];
        let sign = if pos % 2 == 0 { 1 } else { -1 };
        for (&(x, y), k) in structure_table().d(c) {
            let mut list: Vec<usize> = idx[..pos].to_vec();
            list.push(slot(x));
            list.push(slot(y));
            list.extend_from_slice(&idx[pos + 1..]);
            if let Some(ps) = sort_with_sign(&mut list) {
                assert!(k.is_integer());
                *out.entry(mask_of(&list)).or_insert(0) += sign * ps * k.to_integer();
            }
        }
    }
    out.into_iter().filter(|(_, v)| *v != 0).map(|(m, v)| (v, m)).collect()
}

/// A scalar-valued invariant form of fixed degree.
#[derive(Clone, PartialEq)]
pub struct InvariantForm {
    frame: Frame,
    degree: usize,
    terms: BTreeMap<Mask, ScalarField>,
}

impl InvariantForm {
    pub fn zero(frame: Frame, degree: usize) -> Self {
        InvariantForm { frame, degree, terms: BTreeMap::new() }
    }

    /// A 0-form.
    pub fn function(frame: Frame, f: ScalarField) -> Self {
        Self::zero(frame, 0).with_term(&[], f)
    }

    pub fn basis(frame: Frame, indices: &[usize]) -> Self {
        Self::zero(frame, indices.len()).with_term(indices, ScalarField::one())
    }

    /// The orthonormal 1-form `eⁱ`.
    pub fn e(i: usize) -> Self {
        Self::basis(Frame::Orthonormal, &[i])
    }

    /// `e^{i₁} ∧ … ∧ e^{iₖ}` (indices in any order).
    pub fn e_multi(indices: &[usize]) -> Self {
        indices.iter().fold(InvariantForm::function(Frame::Orthonormal, ScalarField::one()), |acc, &i| {
            acc.wedge(&Self::e(i)).expect("degree within range")
        })
    }

    pub fn dr() -> Self {
        Self::basis(Frame::MaurerCartan, &[DR])
    }

    pub fn coframe(c: Coframe) -> Self {
        Self::basis(Frame::MaurerCartan, &[slot(c)])
    }

    /// `vol = e⁰ ∧ … ∧ e⁷`.
    pub fn volume() -> Self {
        Self::basis(Frame::Orthonormal, &[0, 1, 2, 3, 4, 5, 6, 7])
    }

    /// Adds `f` to the coefficient of the basis form with the given
    /// increasing indices.
    pub fn with_term(mut self, indices: &[usize], f: ScalarField) -> Self {
        assert_eq!(indices.len(), self.degree, "index count must equal the degree");
        assert!(indices.windows(2).all(|w| w[0] < w[1]), "indices must be strictly increasing");
        self.add_term(mask_of(indices), f);
        self
    }

    fn add_term(&mut self, mask: Mask, f: ScalarField) {
        if f.is_structurally_zero() {
            return;
        }
        let entry = self.terms.remove(&mask);
        let v = match entry {
            Some(g) => g + f,
            None => f,
        };
        if !v.is_structurally_zero() {
            self.terms.insert(mask, v);
        }
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, &ScalarField)> {
        self.terms.iter().map(|(m, f)| (indices_of(*m), f))
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, indices: &[usize]) -> ScalarField {
        let mut list = indices.to_vec();
        match sort_with_sign(&mut list) {
            None => ScalarField::zero(),
            Some(s) => match self.terms.get(&mask_of(&list)) {
                None => ScalarField::zero(),
                Some(f) => ScalarField::integer(s) * f,
            },
        }
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Every coefficient certified zero on the samples.
    pub fn is_zero(&self, samples: &Samples) -> bool {
        self.terms.values().all(|f| f.is_zero(samples))
    }

    /// Largest `|coefficient|` over all terms and samples.
    pub fn max_abs(&self, samples: &Samples) -> f64 {
        self.terms.values().map(|f| f.max_abs(samples)).fold(0.0, f64::max)
    }

    pub fn map_coefficients(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        let mut out = Self::zero(self.frame, self.degree);
        for (m, c) in &self.terms {
            out.add_term(*m, f(c));
        }
        out
    }

    pub fn scale(&self, f: &ScalarField) -> Self {
        self.map_coefficients(|c| c * f)
    }

    fn check_compatible(&self, other: &Self) -> Result<Frame, FormError> {
        if self.frame == other.frame {
            Ok(self.frame)
        } else if self.degree == 0 {
            Ok(other.frame)
        } else if other.degree == 0 {
            Ok(self.frame)
        } else {
            Err(FormError::FrameMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, FormError> {
        let frame = self.check_compatible(other)?;
        assert_eq!(self.degree, other.degree, "adding forms of different degree");
        let mut out = self.clone();
        out.frame = frame;
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        Ok(out)
    }

    pub fn wedge(&self, other: &Self) -> Result<Self, FormError> {
        let frame = self.check_compatible(other)?;
        let degree = self.degree + other.degree;
        if degree > frame.slots() {
            return Err(FormError::DegreeOverflow(degree));
        }
        let mut out = Self::zero(frame, degree);
        for (ma, fa) in &self.terms {
            for (mb, fb) in &other.terms {
                if let Some(s) = wedge_sign(*ma, *mb) {
                    let c = if s == 1 { fa * fb } else { -(fa * fb) };
                    out.add_term(ma | mb, c);
                }
            }
        }
        Ok(out)
    }

    /// Exterior derivative. Orthonormal forms are differentiated through the
    /// MC frame and converted back when the result is horizontal; otherwise
    /// the result stays in the MC frame.
    pub fn exterior_derivative(&self) -> Self {
        match self.frame {
            Frame::MaurerCartan => self.d_mc(),
            Frame::Orthonormal => {
                let d = self.from_e_basis().d_mc();
                d.to_e_basis().unwrap_or(d)
            }
        }
    }

    fn d_mc(&self) -> Self {
        let mut out = Self::zero(Frame::MaurerCartan, self.degree + 1);
        for (m, f) in &self.terms {
            let df = f.derivative();
            if let Some(s) = wedge_sign(1 << DR, *m) {
                out.add_term(m | (1 << DR), ScalarField::integer(s) * df);
            }
            for (k, dm) in d_basis(*m) {
                out.add_term(dm, ScalarField::integer(k) * f);
            }
        }
        out
    }

    pub fn has_zeta(&self) -> bool {
        self.frame == Frame::MaurerCartan && self.terms.keys().any(|m| m & (1 << slot(Coframe::Zeta)) != 0)
    }

    /// Drops ζ-terms whose coefficients vanish on the samples; any other
    /// ζ-term is an error.
    pub fn drop_vanishing_zeta(&self, samples: &Samples) -> Result<Self, FormError> {
        let z: Mask = 1 << slot(Coframe::Zeta);
        if !self.has_zeta() {
            return Ok(self.clone());
        }
        let mut out = Self::zero(self.frame, self.degree);
        for (m, f) in &self.terms {
            if m & z == 0 {
                out.add_term(*m, f.clone());
            } else if !f.is_zero(samples) {
                return Err(FormError::NonHorizontalForm);
            }
        }
        Ok(out)
    }

    /// Rewrites an MC form in the orthonormal coframe.
    pub fn to_e_basis(&self) -> Result<Self, FormError> {
        if self.frame == Frame::Orthonormal {
            return Ok(self.clone());
        }
        let bc = basis_change();
        let mut out = Self::zero(Frame::Orthonormal, self.degree);
        for (m, f) in &self.terms {
            let mut images = Vec::with_capacity(self.degree);
            let mut coeff = f.clone();
            for s in indices_of(*m) {
                let (i, g) = bc.to_e[s].as_ref().ok_or(FormError::NonHorizontalForm)?;
                images.push(*i);
                coeff = coeff * g;
            }
            let sign = sort_with_sign(&mut images).expect("basis change is injective");
            out.add_term(mask_of(&images), ScalarField::integer(sign) * coeff);
        }
        Ok(out)
    }

    pub fn from_e_basis(&self) -> Self {
        if self.frame == Frame::MaurerCartan {
            return self.clone();
        }
        let bc = basis_change();
        let mut out = Self::zero(Frame::MaurerCartan, self.degree);
        for (m, f) in &self.terms {
            let mut images = Vec::with_capacity(self.degree);
            let mut coeff = f.clone();
            for i in indices_of(*m) {
                let (s, h) = &bc.from_e[i];
                images.push(*s);
                coeff = coeff * h;
            }
            let sign = sort_with_sign(&mut images).expect("basis change is injective");
            out.add_term(mask_of(&images), ScalarField::integer(sign) * coeff);
        }
        out
    }

    /// Hodge star with respect to the Calabi metric and `vol = e⁰…e⁷`.
    pub fn hodge_star(&self) -> Result<Self, FormError> {
        let e = self.to_e_basis()?;
        let full: Mask = 0xff;
        let mut out = Self::zero(Frame::Orthonormal, 8 - self.degree);
        for (m, f) in &e.terms {
            let comp = full & !m;
            let sign = wedge_sign(*m, comp).unwrap();
            out.add_term(comp, ScalarField::integer(sign) * f);
        }
        Ok(out)
    }

    /// Pointwise inner product `Σ α_I β_I` in the orthonormal coframe.
    pub fn inner(&self, other: &Self) -> Result<ScalarField, FormError> {
        let a = self.to_e_basis()?;
        let b = other.to_e_basis()?;
        Ok(a.terms
            .iter()
            .filter_map(|(m, f)| b.terms.get(m).map(|g| f * g))
            .sum())
    }

    /// Pointwise squared norm.
    pub fn norm_sq(&self) -> Result<ScalarField, FormError> {
        self.inner(self)
    }

    /// Text in the notation `e^{07}` / `μ1∧μ2`.
    pub fn pretty(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, f)| {
                let basis = match self.frame {
                    Frame::Orthonormal => {
                        let digits: String = indices_of(*m).iter().map(|i| i.to_string()).collect();
                        if digits.is_empty() { String::new() } else { format!("e^{{{digits}}}") }
                    }
                    Frame::MaurerCartan => indices_of(*m)
                        .iter()
                        .map(|&s| if s == DR { "dr" } else { Coframe::ALL[s - 1].symbol() })
                        .collect::<Vec<_>>()
                        .join("∧"),
                };
                let coeff = f.to_prefix();
                match (coeff.as_str(), basis.is_empty()) {
                    (c, true) => c.to_string(),
                    ("1", false) => basis,
                    ("-1", false) => format!("-{basis}"),
                    (c, false) => format!("{c}·{basis}"),
                }
            })
            .collect();
        parts.join(" + ")
    }
}

impl fmt::Debug for InvariantForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "InvariantForm[{}]({})", self.degree, self.pretty())
    }
}

impl std::ops::Add for &InvariantForm {
    type Output = InvariantForm;
    fn add(self, rhs: &InvariantForm) -> InvariantForm {
        self.try_add(rhs).expect("adding forms in different frames")
    }
}

impl std::ops::Sub for &InvariantForm {
    type Output = InvariantForm;
    fn sub(self, rhs: &InvariantForm) -> InvariantForm {
        self + &(-rhs)
    }
}

impl std::ops::Neg for &InvariantForm {
    type Output = InvariantForm;
    fn neg(self) -> InvariantForm {
        self.map_coefficients(|c| -c)
    }
}

/// A form with values in a gauge algebra: one scalar form per generator.
#[derive(Clone, PartialEq)]
pub struct LieValuedForm {
    pub algebra: GaugeAlgebra,
    pub components: Vec<InvariantForm>,
}

impl LieValuedForm {
    pub fn zero(algebra: GaugeAlgebra, frame: Frame, degree: usize) -> Self {
        LieValuedForm { algebra, components: vec![InvariantForm::zero(frame, degree); algebra.dim()] }
    }

    /// `form ⊗ T_generator`.
    pub fn along(algebra: GaugeAlgebra, generator: usize, form: InvariantForm) -> Self {
        let mut out = Self::zero(algebra, form.frame(), form.degree());
        out.components[generator] = form;
        out
    }

    pub fn degree(&self) -> usize {
        self.components[0].degree()
    }

    pub fn map(&self, f: impl Fn(&InvariantForm) -> InvariantForm) -> Self {
        LieValuedForm { algebra: self.algebra, components: self.components.iter().map(f).collect() }
    }

    pub fn try_map(&self, f: impl Fn(&InvariantForm) -> Result<InvariantForm, FormError>) -> Result<Self, FormError> {
        Ok(LieValuedForm {
            algebra: self.algebra,
            components: self.components.iter().map(f).collect::<Result<_, _>>()?,
        })
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.algebra, other.algebra);
        LieValuedForm {
            algebra: self.algebra,
            components: self.components.iter().zip(&other.components).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, f: &ScalarField) -> Self {
        self.map(|c| c.scale(f))
    }

    pub fn exterior_derivative(&self) -> Self {
        self.map(InvariantForm::exterior_derivative)
    }

    pub fn to_e_basis(&self) -> Result<Self, FormError> {
        self.try_map(InvariantForm::to_e_basis)
    }

    pub fn hodge_star(&self) -> Result<Self, FormError> {
        self.try_map(InvariantForm::hodge_star)
    }

    /// `ω ∧ α` for a scalar form `ω`.
    pub fn wedge_scalar_left(&self, omega: &InvariantForm) -> Result<Self, FormError> {
        self.try_map(|c| omega.wedge(c))
    }

    /// `[α ∧ β] = Σ α^a ∧ β^b ⊗ [T_a, T_b]`.
    pub fn bracket_wedge(&self, other: &Self) -> Result<Self, FormError> {
        assert_eq!(self.algebra, other.algebra);
        let frame = self.components[0].frame();
        let mut out = Self::zero(self.algebra, frame, self.degree() + other.degree());
        if self.algebra == GaugeAlgebra::U1 {
            return Ok(out);
        }
        for a in 0..self.algebra.dim() {
            for b in 0..self.algebra.dim() {
                if a == b || self.components[a].is_structurally_zero() || other.components[b].is_structurally_zero() {
                    continue;
                }
                let w = self.components[a].wedge(&other.components[b])?;
                for (k, c) in self.algebra.bracket(a, b).into_iter().enumerate() {
                    if c != 0 {
                        out.components[k] = &out.components[k] + &w.scale(&ScalarField::integer(c));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn has_zeta(&self) -> bool {
        self.components.iter().any(InvariantForm::has_zeta)
    }

    pub fn drop_vanishing_zeta(&self, samples: &Samples) -> Result<Self, FormError> {
        self.try_map(|c| c.drop_vanishing_zeta(samples))
    }

    pub fn is_zero(&self, samples: &Samples) -> bool {
        self.components.iter().all(|c| c.is_zero(samples))
    }

    pub fn max_abs(&self, samples: &Samples) -> f64 {
        self.components.iter().map(|c| c.max_abs(samples)).fold(0.0, f64::max)
    }

    /// `Σ_a |α^a|²` with the generators orthonormal.
    pub fn norm_sq(&self) -> Result<ScalarField, FormError> {
        Ok(self.components.iter().map(|c| c.norm_sq()).collect::<Result<Vec<_>, _>>()?.into_iter().sum())
    }

    pub fn pretty(&self) -> String {
        let names = self.algebra.generator_names();
        self.components
            .iter()
            .zip(names)
            .filter(|(c, _)| !c.is_structurally_zero())
            .map(|(c, n)| format!("({})⊗{n}", c.pretty()))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl fmt::Debug for LieValuedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LieValuedForm({})", self.pretty())
    }
}
