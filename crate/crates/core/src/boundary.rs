//! Maxwell-wall boundary matrices and the wall-value solve.
//!
//! Matrices are held in normalized form: the half-space integrals enter as
//! `S(a, b) / sqrt(a! b!)`, and the factorials cancel against the `L₁`
//! sandwich, so nothing here overflows at large order.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{check_chi, KnudsenError, Result};
use crate::special::{accommodation_factor, half_space_s, HalfSpaceTable};
use crate::spectral::ParityEigen;
use crate::system::{kramers_prandtl_weight, ProblemKind, ReducedSystem};

#[derive(Debug, Clone)]
pub struct WallBoundarySystem {
    pub kind: ProblemKind,
    pub order: usize,
    /// Normalized `T^b` (temperature) or `S_k` (Kramers).
    pub tb_or_sk: DMatrix<f64>,
    /// `T` or `T̃_k`, the `L₁`-sandwiched matrix entering `K(χ)`.
    pub t_scaled: DMatrix<f64>,
    /// `c_r` or `r_k`, length `m_o + 1`.
    pub c_vec: DVector<f64>,
    pub b_chi: f64,
    pub chi: f64,
}

/// Wall unknowns for a prescribed flux.
#[derive(Debug, Clone, PartialEq)]
pub struct WallSolution {
    /// `θ̄(0)` or `ū₁(0)`.
    pub wall_unknown: f64,
    /// `θ̄(0) - θ̄^W` or `ū₁(0) - ū₁^W`.
    pub offset: f64,
    /// `v̂₊(0)`.
    pub v_plus: DVector<f64>,
}

/// `α₂` of the Hermite index behind position `p` (1-based) of `T^b`.
///
/// Odd positions `2k-1` carry `t̄`-type moments (`α₂ = 2k`), even positions
/// `2k` carry `ḡ`-type moments (`α₂ = 2k - 2`).
pub fn tb_alpha(p: usize) -> usize {
    if p % 2 == 1 {
        p + 1
    } else {
        p - 2
    }
}

fn tb_entry(i: usize, j: usize, s: impl Fn(usize, usize) -> f64) -> f64 {
    match (i % 2, j % 2) {
        (0, 0) => s(tb_alpha(i), tb_alpha(j)),
        (1, 1) => {
            let (a, b) = (tb_alpha(i), tb_alpha(j));
            s(a, b) - s(a, 0) * s(0, b) / s(0, 0)
        }
        _ => 0.0,
    }
}

/// Normalized `T^b`, i.e. `N⁻¹ T^b N⁻¹` with `N = diag(sqrt(α₂!))`.
pub fn assemble_temperature_tb(order: usize, table: &HalfSpaceTable) -> DMatrix<f64> {
    let n = order - 1;
    assert!(table.max_order() >= order, "half-space table too small");
    DMatrix::from_fn(n, n, |i, j| tb_entry(i + 1, j + 1, |a, b| table.s_normalized(a, b)))
}

/// Unscaled `T^b` from raw `S` values; only available while factorials fit.
pub fn temperature_tb_raw(order: usize) -> Result<DMatrix<f64>> {
    let n = order - 1;
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (tb_alpha(i + 1), tb_alpha(j + 1));
            half_space_s(a, b)?;
            out[(i, j)] = tb_entry(i + 1, j + 1, |a, b| half_space_s(a, b).unwrap());
        }
    }
    Ok(out)
}

/// `T = diag(1, L₁⁻¹) diag(P₁, I) T^b diag(P₁, I) diag(1, L₁⁻¹)` from normalized `T^b`.
///
/// Past the leading 2×2 block the factorials in `L₁` and in the
/// normalization cancel exactly; only the `P₁` block remains.
pub fn assemble_t(tb_normalized: &DMatrix<f64>) -> DMatrix<f64> {
    let n = tb_normalized.nrows();
    let mut b = DMatrix::identity(n, n);
    // diag(1, 1/a₁) P₁ diag(sqrt 2!, sqrt 0!)
    let inv_a1 = 1.0 / 3f64.sqrt();
    let s2 = 2f64.sqrt();
    b[(0, 0)] = 0.5 * s2;
    b[(0, 1)] = 1.0;
    b[(1, 0)] = inv_a1 * s2;
    b[(1, 1)] = -inv_a1;
    &b * tb_normalized * b.transpose()
}

/// Normalized `S_k` with entries `S(2i-2, 2j-2) / sqrt((2i-2)! (2j-2)!)`.
pub fn assemble_kramers_sk(m_e: usize, table: &HalfSpaceTable) -> DMatrix<f64> {
    let n = m_e + 1;
    assert!(table.max_order() >= 2 * m_e, "half-space table too small");
    DMatrix::from_fn(n, n, |i, j| table.s_normalized(2 * i, 2 * j))
}

/// `T̃_k = diag(1, L₁ᵏ)⁻¹ S_k diag(1, L₁ᵏ)⁻¹` from normalized `S_k`.
pub fn assemble_kramers_t(sk_normalized: &DMatrix<f64>, prandtl: f64) -> DMatrix<f64> {
    let mut t = sk_normalized.clone();
    if t.nrows() > 1 {
        let f = 1.0 / kramers_prandtl_weight(prandtl).sqrt();
        t.row_mut(1).scale_mut(f);
        t.column_mut(1).scale_mut(f);
    }
    t
}

/// `c_r = (1, 4/(5 sqrt 3), 2 sqrt 6 / 5, 2 sqrt 2 / 5, 0, ...)` truncated to `len`.
pub fn temperature_c_vec(len: usize) -> DVector<f64> {
    let head = [
        1.0,
        4.0 / (5.0 * 3f64.sqrt()),
        2.0 * 6f64.sqrt() / 5.0,
        2.0 * 2f64.sqrt() / 5.0,
    ];
    DVector::from_fn(len, |i, _| head.get(i).copied().unwrap_or(0.0))
}

/// `r_k = (1, 2/a₁ᵏ, 0, ...)`.
pub fn kramers_r_vec(len: usize, a1: f64) -> DVector<f64> {
    DVector::from_fn(len, |i, _| match i {
        0 => 1.0,
        1 => 2.0 / a1,
        _ => 0.0,
    })
}

/// Builds the boundary system for either problem. The table must cover
/// half-space indices up to `M`.
pub fn wall_system(
    system: &ReducedSystem,
    chi: f64,
    table: &HalfSpaceTable,
) -> Result<WallBoundarySystem> {
    check_chi(chi)?;
    if system.m_e != system.m_o {
        return Err(KnudsenError::InvalidOrder {
            order: system.order,
            reason: "wall solve needs m_e = m_o (odd M temperature, even M Kramers)",
        });
    }
    let (tb, t, c) = match system.kind {
        ProblemKind::TemperatureJump => {
            let tb = assemble_temperature_tb(system.order, table);
            let t = assemble_t(&tb);
            (tb, t, temperature_c_vec(system.m_o + 1))
        }
        ProblemKind::Kramers => {
            let pr = system.prandtl.unwrap_or(1.0);
            let sk = assemble_kramers_sk(system.m_e, table);
            let t = assemble_kramers_t(&sk, pr);
            (sk, t, kramers_r_vec(system.m_o + 1, system.a(1)))
        }
    };
    Ok(WallBoundarySystem {
        kind: system.kind,
        order: system.order,
        tb_or_sk: tb,
        t_scaled: t,
        c_vec: c,
        b_chi: accommodation_factor(chi),
        chi,
    })
}

/// `K(χ) = b(χ) T - 2 diag(0, R_even Λ₊ R_evenᵀ)`.
pub fn k_matrix(wall: &WallBoundarySystem, eigen: &ParityEigen) -> Result<DMatrix<f64>> {
    let n = wall.t_scaled.nrows();
    if eigen.m_e() + 1 != n {
        return Err(KnudsenError::DimensionMismatch(format!(
            "boundary matrix is {n}x{n} but eigenbasis has m_e = {}",
            eigen.m_e()
        )));
    }
    let mut k = &wall.t_scaled * wall.b_chi;
    let mut scaled = eigen.r_even.clone();
    for (j, lam) in eigen.lambda_plus.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*lam);
    }
    let core = scaled * eigen.r_even.transpose();
    let mut block = k.view_mut((1, 1), (n - 1, n - 1));
    block -= core * 2.0;
    Ok(k)
}

/// True if `-A` admits a Cholesky factorization.
pub fn is_negative_definite(a: &DMatrix<f64>) -> bool {
    Cholesky::new(-a.clone()).is_some()
}

/// Solves `K(χ) diag(1, R_even) (offset; v̂₊(0)) = flux · c_vec`.
pub fn solve_wall(
    wall: &WallBoundarySystem,
    eigen: &ParityEigen,
    flux: f64,
    wall_value: f64,
) -> Result<WallSolution> {
    let k = k_matrix(wall, eigen)?;
    let chol = Cholesky::new(-k).ok_or(KnudsenError::NotNegativeDefinite {
        chi: wall.chi,
        order: wall.order,
    })?;
    let rhs = &wall.c_vec * (-flux);
    let x = chol.solve(&rhs);
    let n = x.len();
    // R_even is square with R_evenᵀ R_even = I/2, so its inverse is 2 R_evenᵀ.
    let v_plus = eigen.r_even.transpose() * x.rows(1, n - 1) * 2.0;
    Ok(WallSolution {
        wall_unknown: x[0] + wall_value,
        offset: x[0],
        v_plus,
    })
}
