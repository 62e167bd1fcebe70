//! The Lie algebra su(3) in the basis adapted to the Aloff–Wallach space
//! SU(3)/U(1), and the Maurer–Cartan structure equations of its left-invariant
//! coframe.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{Complex, One, Rational64, Zero};
use serde::Serialize;

pub type Entry = Complex<Rational64>;

fn re(v: i64) -> Entry {
    Complex::new(Rational64::from_integer(v), Rational64::zero())
}

fn im(v: i64) -> Entry {
    Complex::new(Rational64::zero(), Rational64::from_integer(v))
}

/// A 3×3 complex matrix with exact Gaussian-rational entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix3(pub [[Entry; 3]; 3]);

impl Matrix3 {
    pub fn zero() -> Self {
        Matrix3(std::array::from_fn(|_| std::array::from_fn(|_| Entry::zero())))
    }

    fn from_fn(f: impl Fn(usize, usize) -> Entry) -> Self {
        Matrix3(std::array::from_fn(|i| std::array::from_fn(|j| f(i, j))))
    }

    pub fn trace(&self) -> Entry {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn conjugate_transpose(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i].conj())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().all(Zero::is_zero)
    }

    /// Anti-Hermitian and traceless.
    pub fn is_in_su3(&self) -> bool {
        (self.conjugate_transpose() + self.clone()).is_zero() && self.trace().is_zero()
    }

    pub fn scale(&self, c: Rational64) -> Self {
        Self::from_fn(|i, j| self.0[i][j] * Complex::new(c, Rational64::zero()))
    }
}

impl Add for Matrix3 {
    type Output = Matrix3;
    fn add(self, rhs: Matrix3) -> Matrix3 {
        Matrix3::from_fn(|i, j| self.0[i][j] + rhs.0[i][j])
    }
}

impl Sub for Matrix3 {
    type Output = Matrix3;
    fn sub(self, rhs: Matrix3) -> Matrix3 {
        Matrix3::from_fn(|i, j| self.0[i][j] - rhs.0[i][j])
    }
}

impl Neg for Matrix3 {
    type Output = Matrix3;
    fn neg(self) -> Matrix3 {
        Matrix3::from_fn(|i, j| -self.0[i][j])
    }
}

impl Mul for &Matrix3 {
    type Output = Matrix3;
    fn mul(self, rhs: &Matrix3) -> Matrix3 {
        Matrix3::from_fn(|i, j| (0..3).fold(Entry::zero(), |acc, k| acc + self.0[i][k] * rhs.0[k][j]))
    }
}

/// `xy − yx`.
pub fn bracket(x: &Matrix3, y: &Matrix3) -> Matrix3 {
    x * y - y * x
}

/// `⟨x, y⟩ = −Re tr(xy)`.
pub fn killing_pairing(x: &Matrix3, y: &Matrix3) -> Rational64 {
    -(x * y).trace().re
}

/// The basis {H, X₁, …, X₇} of su(3).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Generator {
    H,
    X1,
    X2,
    X3,
    X4,
    X5,
    X6,
    X7,
}

impl Generator {
    pub const ALL: [Generator; 8] = [
        Generator::H,
        Generator::X1,
        Generator::X2,
        Generator::X3,
        Generator::X4,
        Generator::X5,
        Generator::X6,
        Generator::X7,
    ];

    /// X₁…X₇, spanning the reductive complement m.
    pub const COMPLEMENT: [Generator; 7] = [
        Generator::X1,
        Generator::X2,
        Generator::X3,
        Generator::X4,
        Generator::X5,
        Generator::X6,
        Generator::X7,
    ];

    pub fn matrix(self) -> Matrix3 {
        let mut m = Matrix3::zero();
        let mut set = |i: usize, j: usize, v: Entry| m.0[i][j] = v;
        match self {
            Generator::H => {
                set(0, 0, im(1));
                set(1, 1, im(1));
                set(2, 2, im(-2));
            }
            Generator::X4 => {
                set(0, 0, im(1));
                set(1, 1, im(-1));
            }
            Generator::X1 => {
                set(0, 1, re(1));
                set(1, 0, re(-1));
            }
            Generator::X2 => {
                set(1, 2, re(1));
                set(2, 1, re(-1));
            }
            Generator::X3 => {
                set(0, 2, re(-1));
                set(2, 0, re(1));
            }
            Generator::X5 => {
                set(0, 1, im(1));
                set(1, 0, im(1));
            }
            Generator::X6 => {
                set(1, 2, im(1));
                set(2, 1, im(1));
            }
            Generator::X7 => {
                set(0, 2, im(1));
                set(2, 0, im(1));
            }
        }
        m
    }

    pub fn name(self) -> &'static str {
        match self {
            Generator::H => "H",
            Generator::X1 => "X1",
            Generator::X2 => "X2",
            Generator::X3 => "X3",
            Generator::X4 => "X4",
            Generator::X5 => "X5",
            Generator::X6 => "X6",
            Generator::X7 => "X7",
        }
    }
}

/// Expands an element of su(3) in the basis {H, X₁, …, X₇}.
pub fn coordinates(m: &Matrix3) -> [Rational64; 8] {
    // the basis is ⟨·,·⟩-orthogonal
    std::array::from_fn(|i| {
        let g = Generator::ALL[i].matrix();
        killing_pairing(m, &g) / killing_pairing(&g, &g)
    })
}

/// Left-invariant 1-forms on SU(3), the components of the Maurer–Cartan form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Coframe {
    Zeta,
    Kappa,
    Nu1,
    Nu2,
    Sigma1,
    Sigma2,
    Mu1,
    Mu2,
}

impl Coframe {
    pub const ALL: [Coframe; 8] = [
        Coframe::Zeta,
        Coframe::Kappa,
        Coframe::Nu1,
        Coframe::Nu2,
        Coframe::Sigma1,
        Coframe::Sigma2,
        Coframe::Mu1,
        Coframe::Mu2,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// The element `E` with `η = Σ θ ⊗ E`; note the sign on σ₁.
    pub fn dual(self) -> (i64, Generator) {
        match self {
            Coframe::Zeta => (1, Generator::H),
            Coframe::Kappa => (1, Generator::X4),
            Coframe::Nu1 => (1, Generator::X1),
            Coframe::Nu2 => (1, Generator::X5),
            Coframe::Sigma1 => (-1, Generator::X3),
            Coframe::Sigma2 => (1, Generator::X7),
            Coframe::Mu1 => (1, Generator::X2),
            Coframe::Mu2 => (1, Generator::X6),
        }
    }

    pub fn dual_matrix(self) -> Matrix3 {
        let (s, g) = self.dual();
        g.matrix().scale(Rational64::from_integer(s))
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Coframe::Zeta => "ζ",
            Coframe::Kappa => "κ",
            Coframe::Nu1 => "ν1",
            Coframe::Nu2 => "ν2",
            Coframe::Sigma1 => "σ1",
            Coframe::Sigma2 => "σ2",
            Coframe::Mu1 => "μ1",
            Coframe::Mu2 => "μ2",
        }
    }

    pub fn ascii(self) -> &'static str {
        match self {
            Coframe::Zeta => "zeta",
            Coframe::Kappa => "kappa",
            Coframe::Nu1 => "nu1",
            Coframe::Nu2 => "nu2",
            Coframe::Sigma1 => "sigma1",
            Coframe::Sigma2 => "sigma2",
            Coframe::Mu1 => "mu1",
            Coframe::Mu2 => "mu2",
        }
    }
}

impl fmt::Display for Coframe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// `dθ = Σ c·θᵢ∧θⱼ` with `i < j` in coframe order.
pub type TwoFormTerms = BTreeMap<(Coframe, Coframe), Rational64>;

/// Exterior derivatives of the eight coframe forms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureEquationTable {
    entries: BTreeMap<Coframe, TwoFormTerms>,
}

fn add_wedge(terms: &mut TwoFormTerms, c: Rational64, a: Coframe, b: Coframe) {
    if a == b || c.is_zero() {
        return;
    }
    let (key, c) = if a < b { ((a, b), c) } else { ((b, a), -c) };
    let slot = terms.entry(key).or_insert_with(Rational64::zero);
    *slot += c;
    if slot.is_zero() {
        terms.remove(&key);
    }
}

impl StructureEquationTable {
    /// Derived from matrix brackets: `dθ^C = −Σ_{A<B} c^C_{AB} θ^A∧θ^B`.
    pub fn computed() -> Self {
        let mut entries: BTreeMap<Coframe, TwoFormTerms> =
            Coframe::ALL.iter().map(|&c| (c, TwoFormTerms::new())).collect();
        for (i, &a) in Coframe::ALL.iter().enumerate() {
            for &b in &Coframe::ALL[i + 1..] {
                let br = bracket(&a.dual_matrix(), &b.dual_matrix());
                for &c in &Coframe::ALL {
                    let e = c.dual_matrix();
                    let coeff = killing_pairing(&br, &e) / killing_pairing(&e, &e);
                    add_wedge(entries.get_mut(&c).unwrap(), -coeff, a, b);
                }
            }
        }
        StructureEquationTable { entries }
    }

    /// The eight displayed structure equations, entered term by term.
    pub fn literal() -> Self {
        use Coframe::*;
        type Display<'a> = (Coframe, &'a [(i64, Coframe, Coframe)]);
        let rows: [Display; 8] = [
            (Sigma1, &[(1, Kappa, Sigma2), (1, Mu1, Nu1), (-1, Mu2, Nu2), (-3, Sigma2, Zeta)]),
            (Sigma2, &[(-1, Kappa, Sigma1), (1, Mu1, Nu2), (1, Mu2, Nu1), (3, Sigma1, Zeta)]),
            (Mu1, &[(1, Mu2, Kappa), (-1, Sigma1, Nu1), (-1, Sigma2, Nu2), (-3, Mu2, Zeta)]),
            (Mu2, &[(-1, Mu1, Kappa), (-1, Sigma2, Nu1), (1, Sigma1, Nu2), (3, Mu1, Zeta)]),
            (Nu1, &[(-1, Mu1, Sigma1), (-1, Mu2, Sigma2), (-2, Nu2, Kappa)]),
            (Nu2, &[(1, Mu2, Sigma1), (-1, Mu1, Sigma2), (2, Nu1, Kappa)]),
            (Kappa, &[(1, Mu1, Mu2), (-1, Sigma1, Sigma2), (-2, Nu1, Nu2)]),
            (Zeta, &[(-1, Mu1, Mu2), (-1, Sigma1, Sigma2)]),
        ];
        let mut entries = BTreeMap::new();
        for (c, terms) in rows {
            let mut t = TwoFormTerms::new();
            for &(k, a, b) in terms {
                add_wedge(&mut t, Rational64::from_integer(k), a, b);
            }
            entries.insert(c, t);
        }
        StructureEquationTable { entries }
    }

    pub fn d(&self, c: Coframe) -> &TwoFormTerms {
        &self.entries[&c]
    }

    /// `d(dθ)` as a 3-form, keyed by increasing index triples.
    pub fn second_derivative(&self, c: Coframe) -> BTreeMap<[Coframe; 3], Rational64> {
        let mut out: BTreeMap<[Coframe; 3], Rational64> = BTreeMap::new();
        let mut push = |coeff: Rational64, f: [Coframe; 3]| {
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return;
            }
            let mut idx = f;
            let mut sign = 1i64;
            for i in 0..3 {
                for j in 0..2 - i {
                    if idx[j] > idx[j + 1] {
                        idx.swap(j, j + 1);
                        sign = -sign;
                    }
                }
            }
            let slot = out.entry(idx).or_insert_with(Rational64::zero);
            *slot += coeff * Rational64::from_integer(sign);
        };
        // d(a∧b) = da∧b − a∧db
        for (&(a, b), &k) in self.d(c) {
            for (&(x, y), &m) in self.d(a) {
                push(k * m, [x, y, b]);
            }
            for (&(x, y), &m) in self.d(b) {
                push(-k * m, [a, x, y]);
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// JSON dump: `{ "kappa": [[1, "mu1", "mu2"], …], … }`.
    pub fn to_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (c, terms) in &self.entries {
            let list: Vec<serde_json::Value> = terms
                .iter()
                .map(|((a, b), k)| serde_json::json!([k.to_string(), a.ascii(), b.ascii()]))
                .collect();
            map.insert(c.ascii().to_string(), serde_json::Value::Array(list));
        }
        serde_json::Value::Object(map)
    }
}

/// Per-generator comparison of the derived and literal tables.
#[derive(Clone, Debug, Serialize)]
pub struct StructureEquationReport {
    /// Generators whose derived and literal `dθ` differ.
    pub mismatches: Vec<String>,
    /// Generators whose `d²θ` is not exactly zero.
    pub nonclosed: Vec<String>,
    pub jacobi_failures: usize,
    pub jacobi_checked: usize,
}

impl StructureEquationReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.nonclosed.is_empty() && self.jacobi_failures == 0
    }
}

pub fn verify_structure_equations() -> StructureEquationReport {
    let computed = StructureEquationTable::computed();
    let literal = StructureEquationTable::literal();
    let mismatches = Coframe::ALL
        .iter()
        .filter(|&&c| computed.d(c) != literal.d(c))
        .map(|c| c.ascii().to_string())
        .collect();
    let nonclosed = Coframe::ALL
        .iter()
        .filter(|&&c| !literal.second_derivative(c).is_empty())
        .map(|c| c.ascii().to_string())
        .collect();
    let (jacobi_checked, jacobi_failures) = jacobi_check();
    StructureEquationReport { mismatches, nonclosed, jacobi_failures, jacobi_checked }
}

/// Checks the Jacobi identity on every unordered triple of distinct basis
/// elements; returns `(checked, failures)`.
pub fn jacobi_check() -> (usize, usize) {
    let b: Vec<Matrix3> = Generator::ALL.iter().map(|g| g.matrix()).collect();
    let mut checked = 0;
    let mut failures = 0;
    for i in 0..8 {
        for j in i + 1..8 {
            for k in j + 1..8 {
                let s = bracket(&b[i], &bracket(&b[j], &b[k]))
                    + bracket(&b[j], &bracket(&b[k], &b[i]))
                    + bracket(&b[k], &bracket(&b[i], &b[j]));
                checked += 1;
                if !s.is_zero() {
                    failures += 1;
                }
            }
        }
    }
    (checked, failures)
}

/// The matrix of `ad_H` on m in the basis X₁…X₇: column `j` holds `[H, Xⱼ]`.
pub fn ad_h_on_complement() -> [[Rational64; 7]; 7] {
    let h = Generator::H.matrix();
    let mut m = [[Rational64::zero(); 7]; 7];
    for (j, g) in Generator::COMPLEMENT.iter().enumerate() {
        let c = coordinates(&bracket(&h, &g.matrix()));
        for i in 0..7 {
            m[i][j] = c[i + 1];
        }
    }
    m
}

/// An `ad_H`-invariant subspace of m together with its rotation rate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightSpace {
    pub span: Vec<Generator>,
    pub weight: i64,
}

/// Splits m into `ad_H`-invariant lines (weight 0) and planes, reading the
/// planes off the sparsity pattern of `ad_H`.
pub fn complement_weight_spaces() -> Vec<WeightSpace> {
    let ad = ad_h_on_complement();
    let mut seen = [false; 7];
    let mut out = Vec::new();
    for j in 0..7 {
        if seen[j] {
            continue;
        }
        seen[j] = true;
        let partner = (0..7).find(|&i| !ad[i][j].is_zero());
        match partner {
            None => out.push(WeightSpace { span: vec![Generator::COMPLEMENT[j]], weight: 0 }),
            Some(i) => {
                seen[i] = true;
                // [H, Xj] = w·Xi, [H, Xi] = −w·Xj
                let w = ad[i][j];
                assert!(w.is_integer() && ad[j][i] == -w, "ad_H is not a rotation on this plane");
                out.push(WeightSpace {
                    span: vec![Generator::COMPLEMENT[j], Generator::COMPLEMENT[i]],
                    weight: w.to_integer(),
                });
            }
        }
    }
    out
}

impl fmt::Display for Matrix3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.0 {
            let cells: Vec<String> = row
                .iter()
                .map(|z| match (z.re.is_zero(), z.im.is_zero()) {
                    (true, true) => "0".into(),
                    (false, true) => z.re.to_string(),
                    (true, false) if z.im.is_one() => "i".into(),
                    (true, false) => format!("{}i", z.im),
                    _ => format!("{}+{}i", z.re, z.im),
                })
                .collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i64) -> Rational64 {
        Rational64::from_integer(v)
    }

    #[test]
    fn basis_lies_in_su3() {
        for g in Generator::ALL {
            assert!(g.matrix().is_in_su3(), "{g:?}");
        }
    }

    #[test]
    fn bracket_examples() {
        use Generator::*;
        assert_eq!(bracket(&X1.matrix(), &X5.matrix()), X4.matrix().scale(q(2)));
        assert!(bracket(&H.matrix(), &H.matrix()).is_zero());
        assert_eq!(bracket(&H.matrix(), &X2.matrix()), X6.matrix().scale(q(3)));
        for a in Generator::ALL {
            for b in Generator::ALL {
                assert!(bracket(&a.matrix(), &b.matrix()).is_in_su3());
            }
        }
    }

    #[test]
    fn pairing_examples() {
        use Generator::*;
        assert_eq!(killing_pairing(&H.matrix(), &H.matrix()), q(6));
        assert_eq!(killing_pairing(&X1.matrix(), &X2.matrix()), q(0));
        assert_eq!(killing_pairing(&H.matrix(), &X4.matrix()), q(0));
        for a in Generator::COMPLEMENT {
            assert_eq!(killing_pairing(&a.matrix(), &a.matrix()), q(2));
            for b in Generator::ALL {
                if a != b {
                    assert_eq!(killing_pairing(&a.matrix(), &b.matrix()), q(0));
                }
            }
        }
    }

    #[test]
    fn structure_equations_match_display() {
        let report = verify_structure_equations();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.jacobi_checked, 56);
        let t = StructureEquationTable::literal();
        let dz = t.d(Coframe::Zeta);
        assert_eq!(dz.len(), 2);
        assert_eq!(dz[&(Coframe::Mu1, Coframe::Mu2)], q(-1));
        assert_eq!(dz[&(Coframe::Sigma1, Coframe::Sigma2)], q(-1));
        let dk = t.d(Coframe::Kappa);
        assert_eq!(dk[&(Coframe::Nu1, Coframe::Nu2)], q(-2));
    }

    #[test]
    fn a_corrupted_table_is_detected() {
        let mut t = StructureEquationTable::literal();
        t.entries.get_mut(&Coframe::Kappa).unwrap().insert((Coframe::Nu1, Coframe::Nu2), q(2));
        assert_ne!(t, StructureEquationTable::computed());
    }

    #[test]
    fn complement_splits_into_expected_modules() {
        use Generator::*;
        let spaces = complement_weight_spaces();
        let lines: Vec<_> = spaces.iter().filter(|s| s.weight == 0).flat_map(|s| s.span.clone()).collect();
        assert_eq!(lines.len(), 3);
        for g in [X1, X4, X5] {
            assert!(lines.contains(&g));
        }
        let planes: Vec<_> = spaces.iter().filter(|s| s.weight != 0).collect();
        assert_eq!(planes.len(), 2);
        for p in planes {
            assert_eq!(p.weight.abs(), 3);
            let mut span = p.span.clone();
            span.sort();
            assert!(span == vec![X2, X6] || span == vec![X3, X7]);
        }
    }
}
