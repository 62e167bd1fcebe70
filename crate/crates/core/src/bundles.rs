//! Homogeneous bundles over SU(3)/U(1) and SU(3)/U(2): isotropy
//! homomorphisms, the extension criterion across the zero section, and the
//! spaces of equivariant maps that parametrize invariant connections.

#![allow(clippy::needless_range_loop)]

use std::fmt;

use num::{Complex, Rational64, Signed, Zero};
use serde::Serialize;

use crate::gauge::GaugeAlgebra;
use crate::su3::{self, Generator, Matrix3};

/// Structure group of the bundle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Target {
    Circle,
    So3,
}

impl Target {
    pub fn algebra(self) -> GaugeAlgebra {
        match self {
            Target::Circle => GaugeAlgebra::U1,
            Target::So3 => GaugeAlgebra::So3,
        }
    }
}

/// Homomorphisms from the principal isotropy U(1) or the singular isotropy
/// U(2) into the structure group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum GroupHom {
    /// U(1) → S or SO(3): `z ↦ zⁿ` (rotation about the first axis for SO(3)).
    Lambda { target: Target, n: i64 },
    /// U(2) → S or SO(3): `A ↦ det(A)^k`.
    Chi { target: Target, k: i64 },
    /// U(2) → SO(3) through the double cover SU(2) → SO(3).
    ChiHat,
}

type U2Matrix = [[Complex<Rational64>; 2]; 2];

/// A value of a differential: a multiple of `T` or an so(3) matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlgebraValue {
    Circle(Rational64),
    So3([[Rational64; 3]; 3]),
}

impl AlgebraValue {
    /// Rotation weights of the one-parameter subgroup it generates.
    fn weights(&self) -> Result<Vec<i64>, BundleError> {
        match self {
            AlgebraValue::Circle(w) => {
                if !w.is_integer() {
                    return Err(BundleError::NonIntegralWeight);
                }
                Ok(vec![w.to_integer()])
            }
            AlgebraValue::So3(m) => {
                // eigenvalues 0, ±iw with w² = −tr(M²)/2
                let mut tr = Rational64::zero();
                for i in 0..3 {
                    for k in 0..3 {
                        tr += m[i][k] * m[k][i];
                    }
                }
                let w2 = -tr / Rational64::from_integer(2);
                if !w2.is_integer() {
                    return Err(BundleError::NonIntegralWeight);
                }
                let w2 = w2.to_integer();
                let w = (w2 as f64).sqrt().round() as i64;
                if w * w != w2 {
                    return Err(BundleError::NonIntegralWeight);
                }
                Ok(vec![-w, 0, w])
            }
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum BundleError {
    #[error("homomorphism has the wrong source group for this operation")]
    WrongSource,
    #[error("differential does not generate a closed circle subgroup")]
    NonIntegralWeight,
}

/// `dι(∂_θ)` for the inclusion U(1) → U(2), `e^{iθ} ↦ diag(e^{iθ}, e^{iθ})`.
fn iota_generator() -> U2Matrix {
    let i = Complex::new(Rational64::zero(), Rational64::from_integer(1));
    let z = Complex::zero();
    [[i, z], [z, i]]
}

/// Differential of the double cover SU(2) → SO(3) on a traceless
/// anti-Hermitian 2×2 matrix, in the basis `Eₐ = −(i/2)σₐ`.
fn double_cover_differential(y: &U2Matrix) -> [[Rational64; 3]; 3] {
    let half = Rational64::new(1, 2);
    let c = |re: i64, im: i64| Complex::new(Rational64::from_integer(re) * half, Rational64::from_integer(im) * half);
    let z = Complex::zero();
    // E₁ = −(i/2)σ₁, E₂ = −(i/2)σ₂, E₃ = −(i/2)σ₃ satisfy [Eₐ, E_b] = ε_abc E_c
    let basis: [U2Matrix; 3] = [
        [[z, c(0, -1)], [c(0, -1), z]],
        [[z, c(-1, 0)], [c(1, 0), z]],
        [[c(0, -1), z], [z, c(0, 1)]],
    ];
    let mul = |a: &U2Matrix, b: &U2Matrix| -> U2Matrix {
        std::array::from_fn(|i| std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j]))
    };
    // coordinate along E_a: ⟨X, E_a⟩ / ⟨E_a, E_a⟩ with ⟨X, Y⟩ = −Re tr(XY), ⟨E_a, E_a⟩ = ½
    let coord = |x: &U2Matrix, a: usize| -> Rational64 {
        let p = mul(x, &basis[a]);
        -(p[0][0] + p[1][1]).re * Rational64::from_integer(2)
    };
    let mut out = [[Rational64::zero(); 3]; 3];
    for b in 0..3 {
        let yb = mul(y, &basis[b]);
        let by = mul(&basis[b], y);
        let br: U2Matrix = std::array::from_fn(|i| std::array::from_fn(|j| yb[i][j] - by[i][j]));
        for a in 0..3 {
            out[a][b] = coord(&br, a);
        }
    }
    out
}

fn t1_times(w: Rational64) -> [[Rational64; 3]; 3] {
    let t = GaugeAlgebra::so3_matrix(0);
    std::array::from_fn(|i| std::array::from_fn(|j| Rational64::from_integer(t[i][j]) * w))
}

impl GroupHom {
    pub fn target(self) -> Target {
        match self {
            GroupHom::Lambda { target, .. } | GroupHom::Chi { target, .. } => target,
            GroupHom::ChiHat => Target::So3,
        }
    }

    pub fn is_principal(self) -> bool {
        matches!(self, GroupHom::Lambda { .. })
    }

    /// `dλ(∂_θ)` for a U(1) homomorphism.
    pub fn differential_u1(self) -> Result<AlgebraValue, BundleError> {
        match self {
            GroupHom::Lambda { target: Target::Circle, n } => Ok(AlgebraValue::Circle(Rational64::from_integer(n))),
            GroupHom::Lambda { target: Target::So3, n } => Ok(AlgebraValue::So3(t1_times(Rational64::from_integer(n)))),
            _ => Err(BundleError::WrongSource),
        }
    }

    /// `dχ(X)` for a U(2) homomorphism and `X ∈ u(2)`.
    pub fn differential_u2(self, x: &U2Matrix) -> Result<AlgebraValue, BundleError> {
        let trace = x[0][0] + x[1][1];
        match self {
            // d(det^k)(X) = k·tr X, read as a multiple of i
            GroupHom::Chi { target: Target::Circle, k } => Ok(AlgebraValue::Circle(trace.im * Rational64::from_integer(k))),
            GroupHom::Chi { target: Target::So3, k } => Ok(AlgebraValue::So3(t1_times(trace.im * Rational64::from_integer(k)))),
            GroupHom::ChiHat => {
                let half_tr = trace * Complex::new(Rational64::new(1, 2), Rational64::zero());
                let traceless: U2Matrix = std::array::from_fn(|i| {
                    std::array::from_fn(|j| if i == j { x[i][j] - half_tr } else { x[i][j] })
                });
                Ok(AlgebraValue::So3(double_cover_differential(&traceless)))
            }
            GroupHom::Lambda { .. } => Err(BundleError::WrongSource),
        }
    }

    /// The circle homomorphism `χ ∘ ι`, as its differential.
    pub fn restrict_to_principal(self) -> Result<AlgebraValue, BundleError> {
        self.differential_u2(&iota_generator())
    }

    pub fn label(self) -> String {
        match self {
            GroupHom::Lambda { n, .. } => format!("lambda_{n}"),
            GroupHom::Chi { k, .. } => format!("chi_{k}"),
            GroupHom::ChiHat => "chi_hat".into(),
        }
    }
}

impl fmt::Display for GroupHom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Element-conjugacy invariant of a circle homomorphism.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConjugacyKey {
    pub target: Target,
    /// Sorted rotation weights; for SO(3) this is `{−|n|, 0, |n|}`.
    pub weights: Vec<i64>,
}

fn key_of(target: Target, value: &AlgebraValue) -> Result<ConjugacyKey, BundleError> {
    let mut weights = value.weights()?;
    weights.sort();
    Ok(ConjugacyKey { target, weights })
}

/// Conjugacy key of a U(1) homomorphism, or of `χ ∘ ι` for a U(2) one.
pub fn conjugacy_class_key(h: GroupHom) -> Result<ConjugacyKey, BundleError> {
    let value = if h.is_principal() { h.differential_u1()? } else { h.restrict_to_principal()? };
    key_of(h.target(), &value)
}

/// Whether the bundle built from `candidate` over CP² extends the bundle
/// `E_n` over the principal locus.
pub fn bundle_extends(n: i64, candidate: GroupHom) -> Result<bool, BundleError> {
    if candidate.is_principal() {
        return Err(BundleError::WrongSource);
    }
    let lambda = GroupHom::Lambda { target: candidate.target(), n };
    Ok(conjugacy_class_key(lambda)? == conjugacy_class_key(candidate)?)
}

/// All singular-orbit homomorphisms with `|k| ≤ k_max` that extend `E_n`.
pub fn extensions(n: i64, target: Target, k_max: i64) -> Vec<GroupHom> {
    let mut candidates: Vec<GroupHom> = (-k_max..=k_max).map(|k| GroupHom::Chi { target, k }).collect();
    if target == Target::So3 {
        candidates.push(GroupHom::ChiHat);
    }
    candidates.into_iter().filter(|&c| bundle_extends(n, c).unwrap_or(false)).collect()
}

/// Linear maps `Λ: m → s` intertwining the isotropy actions.
#[derive(Clone, Debug, Serialize)]
pub struct EquivariantMapSpace {
    pub n: i64,
    pub algebra: GaugeAlgebra,
    /// Each map as a `dim s × 7` array over the bases `X₁…X₇` and `T…`.
    #[serde(serialize_with = "serialize_maps")]
    pub basis: Vec<Vec<Vec<Rational64>>>,
    pub dimension: usize,
}

fn serialize_maps<S: serde::Serializer>(maps: &[Vec<Vec<Rational64>>], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(maps.len()))?;
    for m in maps {
        let rows: Vec<Vec<String>> = m.iter().map(|row| row.iter().map(|v| v.to_string()).collect()).collect();
        seq.serialize_element(&rows)?;
    }
    seq.end()
}

/// `ad_{dλ(H)}` on s as a matrix.
fn target_ad(n: i64, algebra: GaugeAlgebra) -> Vec<Vec<Rational64>> {
    match algebra {
        GaugeAlgebra::U1 => vec![vec![Rational64::zero()]],
        GaugeAlgebra::So3 => {
            let mut m = vec![vec![Rational64::zero(); 3]; 3];
            for b in 0..3 {
                for (a, c) in GaugeAlgebra::So3.bracket(0, b).into_iter().enumerate() {
                    m[a][b] = Rational64::from_integer(n * c);
                }
            }
            m
        }
    }
}

/// Null space of a rational matrix by Gauss–Jordan elimination.
pub fn null_space(mut rows: Vec<Vec<Rational64>>, cols: usize) -> Vec<Vec<Rational64>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for v in rows[r].iter_mut() {
            *v *= inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c];
                for j in 0..cols {
                    let d = rows[r][j] * f;
                    rows[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational64::zero(); cols];
            v[f] = Rational64::from_integer(1);
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -rows[i][f];
            }
            v
        })
        .collect()
}

/// Kernel of `Λ ↦ Λ∘ad_H − ad_{dλ(H)}∘Λ`.
pub fn equivariant_map_space(n: i64, algebra: GaugeAlgebra) -> EquivariantMapSpace {
    let a = su3::ad_h_on_complement();
    let b = target_ad(n, algebra);
    let s = algebra.dim();
    let unknowns = s * 7;
    let var = |i: usize, k: usize| i * 7 + k;
    let mut rows = Vec::new();
    for i in 0..s {
        for j in 0..7 {
            let mut row = vec![Rational64::zero(); unknowns];
            for k in 0..7 {
                row[var(i, k)] += a[k][j];
            }
            for k in 0..s {
                row[var(k, j)] -= b[i][k];
            }
            rows.push(row);
        }
    }
    let kernel = null_space(rows, unknowns);
    let basis: Vec<Vec<Vec<Rational64>>> =
        kernel.iter().map(|v| (0..s).map(|i| v[i * 7..(i + 1) * 7].to_vec()).collect()).collect();
    EquivariantMapSpace { n, algebra, dimension: basis.len(), basis }
}

/// The group-level action `Ad(exp θH)` on m, in the basis X₁…X₇.
pub fn isotropy_action_on_complement(theta: f64) -> [[f64; 7]; 7] {
    type C = Complex<f64>;
    let g = [C::from_polar(1.0, theta), C::from_polar(1.0, theta), C::from_polar(1.0, -2.0 * theta)];
    let to_f = |m: &Matrix3| -> [[C; 3]; 3] {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let z = m.0[i][j];
                C::new(*z.re.numer() as f64 / *z.re.denom() as f64, *z.im.numer() as f64 / *z.im.denom() as f64)
            })
        })
    };
    let mut out = [[0.0; 7]; 7];
    for (j, gen) in Generator::COMPLEMENT.iter().enumerate() {
        let x = to_f(&gen.matrix());
        // g X g⁻¹ for diagonal g
        let conj: [[C; 3]; 3] = std::array::from_fn(|a| std::array::from_fn(|b| g[a] * x[a][b] * g[b].conj()));
        for (i, other) in Generator::COMPLEMENT.iter().enumerate() {
            let y = to_f(&other.matrix());
            let mut tr = C::new(0.0, 0.0);
            for a in 0..3 {
                for b in 0..3 {
                    tr += conj[a][b] * y[b][a];
                }
            }
            out[i][j] = -tr.re / 2.0;
        }
    }
    out
}

/// `Ad(λ(e^{iθ}))` on s.
pub fn isotropy_action_on_algebra(n: i64, algebra: GaugeAlgebra, theta: f64) -> Vec<Vec<f64>> {
    match algebra {
        GaugeAlgebra::U1 => vec![vec![1.0]],
        GaugeAlgebra::So3 => {
            let (s, c) = ((n as f64) * theta).sin_cos();
            let rot = [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]];
            let mut out = vec![vec![0.0; 3]; 3];
            for b in 0..3 {
                let t = GaugeAlgebra::so3_matrix(b).map(|row| row.map(|v| v as f64));
                // R T_b Rᵀ, read off in the orthonormal basis via −½ tr(· T_a)
                let mut conj = [[0.0; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        for k in 0..3 {
                            for l in 0..3 {
                                conj[i][j] += rot[i][k] * t[k][l] * rot[j][l];
                            }
                        }
                    }
                }
                for a in 0..3 {
                    let ma = GaugeAlgebra::so3_matrix(a);
                    let mut tr = 0.0;
                    for i in 0..3 {
                        for k in 0..3 {
                            tr += conj[i][k] * ma[k][i] as f64;
                        }
                    }
                    out[a][b] = -tr / 2.0;
                }
            }
            out
        }
    }
}

impl EquivariantMapSpace {
    /// Largest violation of `Λ∘Ad(g) = Ad(λ(g))∘Λ` over `angles` sample angles.
    pub fn group_level_defect(&self, angles: usize) -> f64 {
        let s = self.algebra.dim();
        let mut worst: f64 = 0.0;
        for step in 0..angles {
            let theta = 0.37 + step as f64 * std::f64::consts::TAU / angles as f64;
            let am = isotropy_action_on_complement(theta);
            let bs = isotropy_action_on_algebra(self.n, self.algebra, theta);
            for map in &self.basis {
                let l: Vec<Vec<f64>> = map
                    .iter()
                    .map(|row| row.iter().map(|v| *v.numer() as f64 / *v.denom() as f64).collect())
                    .collect();
                for i in 0..s {
                    for j in 0..7 {
                        let lhs: f64 = (0..7).map(|k| l[i][k] * am[k][j]).sum();
                        let rhs: f64 = (0..s).map(|k| bs[i][k] * l[k][j]).sum();
                        worst = worst.max((lhs - rhs).abs());
                    }
                }
            }
        }
        worst
    }

    /// Generators of m on which some basis map is nonzero.
    pub fn support(&self) -> Vec<Generator> {
        Generator::COMPLEMENT
            .iter()
            .enumerate()
            .filter(|(j, _)| self.basis.iter().any(|m| m.iter().any(|row| !row[*j].is_zero())))
            .map(|(_, g)| *g)
            .collect()
    }

    /// Generators of s hit by some basis map.
    pub fn image(&self) -> Vec<usize> {
        (0..self.algebra.dim())
            .filter(|&i| self.basis.iter().any(|m| m[i].iter().any(|v| !v.is_zero())))
            .collect()
    }

    /// True when every basis map has integer entries of absolute value ≤ 1.
    pub fn is_unimodular(&self) -> bool {
        self.basis.iter().flatten().flatten().all(|v| v.is_integer() && v.abs() <= Rational64::from_integer(1))
    }
}

/// Row of the bundle table.
#[derive(Clone, Debug, Serialize)]
pub struct BundleRow {
    pub n: i64,
    pub gauge: GaugeAlgebra,
    pub dimension: usize,
    pub extends_to: String,
}

pub fn bundle_table(n_min: i64, n_max: i64) -> Vec<BundleRow> {
    let mut rows = Vec::new();
    for n in n_min..=n_max {
        for (algebra, target) in [(GaugeAlgebra::U1, Target::Circle), (GaugeAlgebra::So3, Target::So3)] {
            let ext = extensions(n, target, n.abs().max(1));
            let extends_to =
                if ext.is_empty() { "none".to_string() } else { ext.iter().map(|h| h.label()).collect::<Vec<_>>().join(";") };
            rows.push(BundleRow { n, gauge: algebra, dimension: equivariant_map_space(n, algebra).dimension, extends_to });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugacy_key_examples() {
        let k = conjugacy_class_key(GroupHom::Lambda { target: Target::Circle, n: 3 }).unwrap();
        assert_eq!(k.weights, vec![3]);
        for n in -4..=4 {
            assert_eq!(
                conjugacy_class_key(GroupHom::Lambda { target: Target::So3, n }).unwrap(),
                conjugacy_class_key(GroupHom::Lambda { target: Target::So3, n: -n }).unwrap()
            );
        }
        for k in -3..=3 {
            let key = conjugacy_class_key(GroupHom::Chi { target: Target::Circle, k }).unwrap();
            assert_eq!(key.weights, vec![2 * k]);
        }
    }

    #[test]
    fn lambda_n_is_conjugate_to_lambda_minus_n() {
        // conjugating by the half-turn about the second axis reverses the first
        let r = [[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]];
        let theta: f64 = 0.7;
        for n in 1..4 {
            let rot = |m: i64| {
                let (s, c) = ((m as f64) * theta).sin_cos();
                [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]
            };
            let a = rot(n);
            let mut conj = [[0.0f64; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        for l in 0..3 {
                            conj[i][j] += r[i][k] * a[k][l] * r[j][l];
                        }
                    }
                }
            }
            let b = rot(-n);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((conj[i][j] - b[i][j]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn circle_bundles_extend_only_for_even_degree() {
        assert!(bundle_extends(4, GroupHom::Chi { target: Target::Circle, k: 2 }).unwrap());
        for k in -5..=5 {
            assert!(!bundle_extends(3, GroupHom::Chi { target: Target::Circle, k }).unwrap());
        }
        for n in -6..=6 {
            let ext = extensions(n, Target::Circle, 6);
            if n % 2 == 0 {
                assert_eq!(ext, vec![GroupHom::Chi { target: Target::Circle, k: n / 2 }]);
            } else {
                assert!(ext.is_empty());
            }
        }
    }

    #[test]
    fn so3_bundle_extensions() {
        assert!(bundle_extends(0, GroupHom::ChiHat).unwrap());
        assert!(bundle_extends(0, GroupHom::Chi { target: Target::So3, k: 0 }).unwrap());
        assert!(!bundle_extends(0, GroupHom::Chi { target: Target::So3, k: 1 }).unwrap());
        assert!(!bundle_extends(2, GroupHom::ChiHat).unwrap());
        assert!(bundle_extends(2, GroupHom::Chi { target: Target::So3, k: 1 }).unwrap());
        for n in [-3, -1, 1, 3, 5] {
            assert!(extensions(n, Target::So3, 6).is_empty());
        }
    }

    #[test]
    fn double_cover_is_a_homomorphism_of_brackets() {
        // dϖ maps −(i/2)σ₁ to T₁ under the chosen bases
        let h = Rational64::new(1, 2);
        let z = Complex::zero();
        let e1 = [[z, Complex::new(Rational64::zero(), -h)], [Complex::new(Rational64::zero(), -h), z]];
        let m = double_cover_differential(&e1);
        let t1 = GaugeAlgebra::so3_matrix(0);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m[i][j], Rational64::from_integer(t1[i][j]));
            }
        }
    }

    #[test]
    fn equivariant_dimensions() {
        use Generator::*;
        let s = equivariant_map_space(5, GaugeAlgebra::So3);
        assert_eq!(s.dimension, 3);
        let mut support = s.support();
        support.sort();
        assert_eq!(support, vec![X1, X4, X5]);
        assert_eq!(s.image(), vec![0]);
        assert_eq!(equivariant_map_space(0, GaugeAlgebra::So3).dimension, 9);
        assert_eq!(equivariant_map_space(2, GaugeAlgebra::U1).dimension, 3);
        for n in -6..=6 {
            assert_eq!(equivariant_map_space(n, GaugeAlgebra::U1).dimension, 3);
            let d = equivariant_map_space(n, GaugeAlgebra::So3).dimension;
            match n {
                0 => assert_eq!(d, 9),
                3 | -3 => assert_eq!(d, 7),
                _ => assert_eq!(d, 3),
            }
        }
    }

    #[test]
    fn equivariance_holds_at_group_level() {
        for n in -4..=4 {
            for algebra in [GaugeAlgebra::U1, GaugeAlgebra::So3] {
                let s = equivariant_map_space(n, algebra);
                assert!(s.group_level_defect(12) < 1e-12, "n = {n}, {algebra:?}");
            }
        }
    }
}
