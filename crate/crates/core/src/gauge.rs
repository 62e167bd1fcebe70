//! Structure algebras of the gauge groups S¹ and SO(3).

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GaugeAlgebra {
    /// u(1) with generator `T`.
    U1,
    /// so(3) with orthonormal generators `T₁, T₂, T₃`.
    So3,
}

impl GaugeAlgebra {
    pub fn dim(self) -> usize {
        match self {
            GaugeAlgebra::U1 => 1,
            GaugeAlgebra::So3 => 3,
        }
    }

    pub fn generator_names(self) -> &'static [&'static str] {
        match self {
            GaugeAlgebra::U1 => &["T"],
            GaugeAlgebra::So3 => &["T1", "T2", "T3"],
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            GaugeAlgebra::U1 => "u1",
            GaugeAlgebra::So3 => "so3",
        }
    }

    /// Matrix of the so(3) generator `T_{i+1}`.
    pub fn so3_matrix(i: usize) -> [[i64; 3]; 3] {
        match i {
            0 => [[0, 0, 0], [0, 0, -1], [0, 1, 0]],
            1 => [[0, 0, 1], [0, 0, 0], [-1, 0, 0]],
            2 => [[0, -1, 0], [1, 0, 0], [0, 0, 0]],
            _ => panic!("so(3) has three generators"),
        }
    }

    /// Coefficients `c` with `[T_a, T_b] = Σ c_k T_k`.
    pub fn bracket(self, a: usize, b: usize) -> Vec<i64> {
        match self {
            GaugeAlgebra::U1 => vec![0],
            GaugeAlgebra::So3 => {
                let (x, y) = (Self::so3_matrix(a), Self::so3_matrix(b));
                let c = sub(&mul(&x, &y), &mul(&y, &x));
                // read off the skew entries: T₁ ↔ (2,1), T₂ ↔ (0,2), T₃ ↔ (1,0)
                vec![c[2][1], c[0][2], c[1][0]]
            }
        }
    }
}

fn mul(x: &[[i64; 3]; 3], y: &[[i64; 3]; 3]) -> [[i64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| x[i][k] * y[k][j]).sum()))
}

fn sub(x: &[[i64; 3]; 3], y: &[[i64; 3]; 3]) -> [[i64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| x[i][j] - y[i][j]))
}

impl std::str::FromStr for GaugeAlgebra {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "u1" => Ok(GaugeAlgebra::U1),
            "so3" => Ok(GaugeAlgebra::So3),
            other => Err(format!("unknown gauge algebra `{other}` (expected u1 or so3)")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn so3_brackets_are_cyclic() {
        let g = GaugeAlgebra::So3;
        assert_eq!(g.bracket(0, 1), vec![0, 0, 1]);
        assert_eq!(g.bracket(1, 2), vec![1, 0, 0]);
        assert_eq!(g.bracket(2, 0), vec![0, 1, 0]);
        assert_eq!(g.bracket(1, 0), vec![0, 0, -1]);
        assert_eq!(g.bracket(2, 2), vec![0, 0, 0]);
    }

    #[test]
    fn so3_generators_are_orthonormal() {
        for a in 0..3 {
            for b in 0..3 {
                let m = mul(&GaugeAlgebra::so3_matrix(a), &GaugeAlgebra::so3_matrix(b));
                let pairing = -(m[0][0] + m[1][1] + m[2][2]);
                // (X, Y) = −½ tr(XY)
                assert_eq!(pairing, if a == b { 2 } else { 0 });
            }
        }
    }
}
