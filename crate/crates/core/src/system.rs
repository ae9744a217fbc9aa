//! Reduced even-odd moment systems.
//!
//! Both problems reduce to `[[0, M0], [M0ᵀ, 0]] dŵ/dy = -ŵ / Kn` where
//! `ŵ = L f̂` and `M0 = L1⁻¹ A L2⁻¹` with `A_ij = <φ_i, ξ2 ψ_j>`.
//!
//! Logical indices are 1-based as in the usual k-indexing of the test
//! functions (`φ_1, φ_2 = φ_{2k}, ...`); storage is 0-based, so logical
//! entry `(i, j)` lives at `(i - 1, j - 1)`.
//!
//! Temperature jump, odd M: `f̂_even = (t0, t2, g2, t4, g4, ...)`,
//! `f̂_odd = (t1 - q2/5, t3, g3, ...)`, with `t_i = f_{(i+2)e2}` and
//! `g_i = f_{2e1+ie2} + f_{2e3+ie2}`.
//!
//! Kramers, even M: `f̂_even = (f_{e1+2e2}, f_{e1+4e2}, ...)`,
//! `f̂_odd = (f_{e1+3e2}, f_{e1+5e2}, ...)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_positive, KnudsenError, Result};
use crate::special::MultiIndex;

/// Largest supported temperature-jump order.
pub const MAX_TEMPERATURE_ORDER: usize = 4097;
/// Largest supported Kramers order.
pub const MAX_KRAMERS_ORDER: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProblemKind {
    TemperatureJump,
    Kramers,
}

/// Rectangular lower band with entries at `0 <= i - j <= 2`.
///
/// `diags[d][j]` stores `A[j + d, j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBand {
    rows: usize,
    cols: usize,
    diags: [Vec<f64>; 3],
}

impl LowerBand {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            diags: [vec![0.0; cols], vec![0.0; cols], vec![0.0; cols]],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// 0-based access; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i < j || i - j > 2 || i >= self.rows || j >= self.cols {
            return 0.0;
        }
        self.diags[i - j][j]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(i >= j && i - j <= 2 && i < self.rows && j < self.cols);
        self.diags[i - j][j] = v;
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.diags.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.diags.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Even-odd moment system for one problem and order.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub kind: ProblemKind,
    pub order: usize,
    pub m_e: usize,
    pub m_o: usize,
    pub m0: LowerBand,
    /// `ln a_i`; the scalings themselves overflow for large orders.
    pub ln_l1: Vec<f64>,
    /// `ln b_j`.
    pub ln_l2: Vec<f64>,
    pub prandtl: Option<f64>,
}

impl ReducedSystem {
    /// `a_i` for logical index `i` (1-based).
    pub fn a(&self, i: usize) -> f64 {
        self.ln_l1[i - 1].exp()
    }

    /// `b_j` for logical index `j` (1-based).
    pub fn b(&self, j: usize) -> f64 {
        self.ln_l2[j - 1].exp()
    }

    /// Dense `[[0, M0], [M0ᵀ, 0]]`.
    pub fn full_matrix(&self) -> DMatrix<f64> {
        let n = self.m_e + self.m_o;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..self.m_e {
            for j in 0..self.m_o {
                let v = self.m0.get(i, j);
                m[(i, self.m_e + j)] = v;
                m[(self.m_e + j, i)] = v;
            }
        }
        m
    }
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Temperature-jump system for odd `3 <= M <= 4097`.
pub fn build_temperature_system(order: usize) -> Result<ReducedSystem> {
    if order.is_multiple_of(2) {
        return Err(KnudsenError::InvalidOrder {
            order,
            reason: "temperature-jump system requires odd M",
        });
    }
    if !(3..=MAX_TEMPERATURE_ORDER).contains(&order) {
        return Err(KnudsenError::InvalidOrder {
            order,
            reason: "temperature-jump system requires 3 <= M <= 4097",
        });
    }
    let m_o = 2 * ((order - 1) / 2) - 1;
    let m_e = 2 * (order / 2) - 1;

    let ln_a = |i: usize| -> f64 {
        if i == 1 {
            0.5 * 3f64.ln()
        } else if i.is_multiple_of(2) {
            0.5 * ln_factorial(i + 2)
        } else {
            0.5 * ln_factorial(i - 1)
        }
    };
    let ln_b = |j: usize| -> f64 {
        if j == 1 {
            0.5 * 15f64.ln()
        } else if j.is_multiple_of(2) {
            0.5 * ln_factorial(j + 3)
        } else {
            0.5 * ln_factorial(j)
        }
    };

    let mut m0 = LowerBand::zeros(m_e, m_o);
    let mut put = |i: usize, j: usize, v: f64| {
        if i <= m_e && j <= m_o {
            m0.set(i - 1, j - 1, v);
        }
    };
    // φ_1, ψ_1 rows/columns: <φ1,ξ2ψ1> = 9, <φ2,ξ2ψ1> = 24, <φ3,ξ2ψ1> = -6
    put(1, 1, 3.0 / 5f64.sqrt());
    put(2, 1, (8.0f64 / 5.0).sqrt());
    put(3, 1, -(6.0f64 / 5.0).sqrt());
    for i in 2..=m_e {
        if i % 2 == 0 {
            let k = i / 2;
            // (2k+3)! / (a_2k b_2k) and (2k+2)! / (a_2k b_{2k-2})
            put(i, i, ((2 * k + 3) as f64).sqrt());
            if k >= 2 {
                put(i, i - 2, ((2 * k + 2) as f64).sqrt());
            }
        } else {
            let k = (i - 1) / 2;
            // (2k+1)! / (a_{2k+1} b_{2k+1}) and (2k)! / (a_{2k+1} b_{2k-1})
            put(i, i, ((2 * k + 1) as f64).sqrt());
            if k >= 2 {
                put(i, i - 2, ((2 * k) as f64).sqrt());
            }
        }
    }

    Ok(ReducedSystem {
        kind: ProblemKind::TemperatureJump,
        order,
        m_e,
        m_o,
        m0,
        ln_l1: (1..=m_e).map(ln_a).collect(),
        ln_l2: (1..=m_o).map(ln_b).collect(),
        prandtl: None,
    })
}

/// Shakhov weight `1 - (1 - Pr)/5` on the first even Kramers row.
pub fn kramers_prandtl_weight(prandtl: f64) -> f64 {
    1.0 - (1.0 - prandtl) / 5.0
}

/// Kramers system for even `4 <= M <= 4096`.
pub fn build_kramers_system(order: usize, prandtl: f64) -> Result<ReducedSystem> {
    if order % 2 == 1 {
        return Err(KnudsenError::InvalidOrder {
            order,
            reason: "Kramers system requires even M",
        });
    }
    if !(4..=MAX_KRAMERS_ORDER).contains(&order) {
        return Err(KnudsenError::InvalidOrder {
            order,
            reason: "Kramers system requires 4 <= M <= 4096",
        });
    }
    check_positive("prandtl", prandtl)?;
    let m_e = (order - 1) / 2;
    let m_o = (order - 2) / 2;
    let w = kramers_prandtl_weight(prandtl);

    let mut m0 = LowerBand::zeros(m_e, m_o);
    for j in 1..=m_o {
        let diag = ((2 * j + 1) as f64).sqrt();
        m0.set(j - 1, j - 1, if j == 1 { diag / w.sqrt() } else { diag });
        if j < m_e {
            m0.set(j, j - 1, ((2 * j + 2) as f64).sqrt());
        }
    }
    let ln_l1 = (1..=m_e)
        .map(|i| {
            let base = 0.5 * ln_factorial(2 * i);
            if i == 1 {
                base + 0.5 * w.ln()
            } else {
                base
            }
        })
        .collect();
    let ln_l2 = (1..=m_o).map(|j| 0.5 * ln_factorial(2 * j + 1)).collect();

    Ok(ReducedSystem {
        kind: ProblemKind::Kramers,
        order,
        m_e,
        m_o,
        m0,
        ln_l1,
        ln_l2,
        prandtl: Some(prandtl),
    })
}

/// Independent route to the matrix entries via Hermite recursion and orthogonality.
///
/// These are test oracles; the builders above never call them.
pub mod oracle {
    use super::MultiIndex;

    /// A linear combination of Hermite polynomials `Σ c He_α`.
    pub type Combination = Vec<(f64, MultiIndex)>;

    /// `<He_α, ξ2 He_β>` under the unit Gaussian weight, using
    /// `ξ2 He_β = β2 He_{β-e2} + He_{β+e2}` and `<He_α, He_β> = α! δ`.
    pub fn inner_product_oracle(phi: MultiIndex, psi: MultiIndex) -> f64 {
        let [p1, p2, p3] = phi.0;
        let [q1, q2, q3] = psi.0;
        if p1 != q1 || p3 != q3 {
            return 0.0;
        }
        let mut acc = 0.0;
        if q2 >= 1 && p2 == q2 - 1 {
            acc += q2 as f64 * phi.factorial();
        }
        if p2 == q2 + 1 {
            acc += phi.factorial();
        }
        acc
    }

    pub fn gram(a: &Combination, b: &Combination) -> f64 {
        let mut acc = 0.0;
        for (ca, ia) in a {
            for (cb, ib) in b {
                if ia == ib {
                    acc += ca * cb * ia.factorial();
                }
            }
        }
        acc
    }

    pub fn streaming(a: &Combination, b: &Combination) -> f64 {
        let mut acc = 0.0;
        for (ca, ia) in a {
            for (cb, ib) in b {
                acc += ca * cb * inner_product_oracle(*ia, *ib);
            }
        }
        acc
    }

    fn m(a1: usize, a2: usize, a3: usize) -> MultiIndex {
        MultiIndex::new(a1, a2, a3)
    }

    /// Even temperature test function `φ_i`.
    pub fn temperature_phi(i: usize) -> Combination {
        if i == 1 {
            vec![(1.0, m(0, 2, 0)), (-0.5, m(2, 0, 0)), (-0.5, m(0, 0, 2))]
        } else if i.is_multiple_of(2) {
            vec![(1.0, m(0, i + 2, 0))]
        } else {
            let e = i - 1;
            vec![(0.5, m(2, e, 0)), (0.5, m(0, e, 2))]
        }
    }

    /// Odd temperature test function `ψ_j`.
    pub fn temperature_psi(j: usize) -> Combination {
        if j == 1 {
            vec![(1.0, m(0, 3, 0)), (-1.5, m(2, 1, 0)), (-1.5, m(0, 1, 2))]
        } else if j.is_multiple_of(2) {
            vec![(1.0, m(0, j + 3, 0))]
        } else {
            vec![(0.5, m(2, j, 0)), (0.5, m(0, j, 2))]
        }
    }

    pub fn kramers_phi(i: usize) -> Combination {
        vec![(1.0, m(1, 2 * i, 0))]
    }

    pub fn kramers_psi(j: usize) -> Combination {
        vec![(1.0, m(1, 2 * j + 1, 0))]
    }
}

#[cfg(test)]
mod tests {
    use super::oracle::*;
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dimensions() {
        for order in (3..=41).step_by(2) {
            let s = build_temperature_system(order).unwrap();
            assert_eq!(s.m_o, 2 * ((order - 1) / 2) - 1);
            assert_eq!(s.m_e, 2 * (order / 2) - 1);
            assert_eq!(s.m_e + s.m_o, 2 * (order - 2));
        }
        for order in (4..=40).step_by(2) {
            let s = build_kramers_system(order, 1.0).unwrap();
            assert_eq!(s.m_e, (order - 1) / 2);
            assert_eq!(s.m_o, (order - 2) / 2);
        }
    }

    #[test]
    fn rejects_bad_orders() {
        assert!(build_temperature_system(4).is_err());
        assert!(build_temperature_system(1).is_err());
        assert!(build_temperature_system(4099).is_err());
        assert!(build_kramers_system(5, 1.0).is_err());
        assert!(build_kramers_system(2, 1.0).is_err());
        assert!(build_kramers_system(4098, 1.0).is_err());
        assert!(build_kramers_system(4, 0.0).is_err());
        assert!(build_kramers_system(4, -1.0).is_err());
    }

    #[test]
    fn order_three_temperature() {
        let s = build_temperature_system(3).unwrap();
        assert_eq!((s.m_e, s.m_o), (1, 1));
        assert_relative_eq!(s.m0.get(0, 0), 3.0 / 5f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(s.a(1), 3f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(s.b(1), 15f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn order_five_entries() {
        // logical (2,2) = sqrt(5), (3,3) = sqrt(3); from 5!/(sqrt(4!) sqrt(5!)) and 3!/(sqrt(2!) sqrt(3!))
        let s = build_temperature_system(5).unwrap();
        assert_relative_eq!(s.m0.get(1, 1), 5f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(s.m0.get(2, 2), 3f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(s.m0.get(1, 0), 24.0 / (24f64.sqrt() * 15f64.sqrt()), max_relative = 1e-15);
        assert_relative_eq!(s.m0.get(2, 0), -6.0 / (2f64.sqrt() * 15f64.sqrt()), max_relative = 1e-15);
    }

    #[test]
    fn kramers_examples() {
        let s = build_kramers_system(4, 1.0).unwrap();
        assert_relative_eq!(s.a(1), 2f64.sqrt(), max_relative = 1e-15);
        let s = build_kramers_system(4, 2.0 / 3.0).unwrap();
        assert_relative_eq!(s.a(1), (28.0f64 / 15.0).sqrt(), max_relative = 1e-14);
        let ratio = build_kramers_system(4, 1.0).unwrap().a(1) / s.a(1);
        assert_relative_eq!(ratio, (5.0 / (4.0 + 2.0 / 3.0f64)).sqrt(), max_relative = 1e-14);
        let s = build_kramers_system(6, 1.0).unwrap();
        assert_relative_eq!(s.m0.get(0, 0), 3f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn inner_product_examples() {
        let m = MultiIndex::new;
        assert_eq!(inner_product_oracle(m(0, 2, 0), m(0, 3, 0)), 6.0);
        assert_eq!(inner_product_oracle(m(1, 0, 0), m(0, 1, 0)), 0.0);
        assert_eq!(inner_product_oracle(m(2, 0, 0), m(2, 1, 0)), 2.0);
    }

    #[test]
    fn special_inner_products() {
        assert_eq!(streaming(&temperature_phi(1), &temperature_psi(1)), 9.0);
        assert_eq!(streaming(&temperature_phi(2), &temperature_psi(1)), 24.0);
        assert_eq!(streaming(&temperature_phi(3), &temperature_psi(1)), -6.0);
        assert_eq!(gram(&temperature_phi(1), &temperature_phi(1)), 3.0);
        assert_eq!(gram(&temperature_psi(1), &temperature_psi(1)), 15.0);
    }

    #[test]
    fn temperature_entries_match_oracle() {
        for order in (3..=31).step_by(2) {
            let s = build_temperature_system(order).unwrap();
            for i in 1..=s.m_e {
                let phi = temperature_phi(i);
                let a = gram(&phi, &phi).sqrt();
                assert_relative_eq!(a, s.a(i), max_relative = 1e-12);
                for j in 1..=s.m_o {
                    let psi = temperature_psi(j);
                    let b = gram(&psi, &psi).sqrt();
                    let expected = streaming(&phi, &psi) / (a * b);
                    let got = s.m0.get(i - 1, j - 1);
                    if expected == 0.0 {
                        assert_eq!(got, 0.0, "M={order} ({i},{j})");
                    } else {
                        assert_relative_eq!(got, expected, max_relative = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn kramers_entries_match_oracle() {
        for &pr in &[0.5, 2.0 / 3.0, 1.0, 1.5] {
            for order in (4..=30).step_by(2) {
                let s = build_kramers_system(order, pr).unwrap();
                for i in 1..=s.m_e {
                    let phi = kramers_phi(i);
                    let w = if i == 1 { kramers_prandtl_weight(pr) } else { 1.0 };
                    let a = (w * gram(&phi, &phi)).sqrt();
                    assert_relative_eq!(a, s.a(i), max_relative = 1e-12);
                    for j in 1..=s.m_o {
                        let psi = kramers_psi(j);
                        let b = gram(&psi, &psi).sqrt();
                        let expected = streaming(&phi, &psi) / (a * b);
                        let got = s.m0.get(i - 1, j - 1);
                        if expected == 0.0 {
                            assert_eq!(got, 0.0);
                        } else {
                            assert_relative_eq!(got, expected, max_relative = 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn band_structure_and_magnitude() {
        for order in (3..=1025).step_by(2) {
            let s = build_temperature_system(order).unwrap();
            let bound = ((order + 3) as f64).sqrt();
            assert!(s.m0.max_abs() <= bound, "M={order}");
            assert!(s.ln_l1.iter().chain(&s.ln_l2).all(|v| v.is_finite() && *v >= 0.0));
        }
        let d = build_temperature_system(9).unwrap().m0.to_dense();
        for i in 0..d.nrows() {
            for j in 0..d.ncols() {
                if i < j || i - j > 2 {
                    assert_eq!(d[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn full_matrix_is_symmetric_block() {
        let s = build_temperature_system(7).unwrap();
        let m = s.full_matrix();
        assert_eq!(m, m.transpose());
        let d = s.m0.to_dense();
        for i in 0..s.m_e {
            for j in 0..s.m_o {
                assert_eq!(m[(i, s.m_e + j)], d[(i, j)]);
            }
        }
    }
}
