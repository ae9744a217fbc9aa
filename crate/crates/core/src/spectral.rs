//! Structured eigendecomposition of `[[0, M0], [M0ᵀ, 0]]`.
//!
//! With the thin SVD `M0 = U Σ Vᵀ`, the positive eigenpairs are
//! `(σ_i, [u_i; v_i] / sqrt 2)`, the negative ones `(-σ_i, [u_i; -v_i] / sqrt 2)`
//! and the remaining `m_e - m_o` eigenvectors span the null space of `M0ᵀ`.
//! The SVD is a one-sided (Hestenes) Jacobi iteration with a fixed cyclic
//! pair ordering, so results are reproducible bit-for-bit.

use nalgebra::DMatrix;

use crate::error::{KnudsenError, Result};
use crate::system::ReducedSystem;

/// Sweep cap for the Jacobi iteration.
pub const MAX_SWEEPS: usize = 60;
/// Singular values at or below this fraction of `‖M0‖_F` are a rank failure.
pub const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct ParityEigen {
    /// Positive spectrum, descending.
    pub lambda_plus: Vec<f64>,
    /// `m_e × m_o`, equal to `U / sqrt 2`.
    pub r_even: DMatrix<f64>,
    /// `m_o × m_o`, equal to `V / sqrt 2`.
    pub r_odd: DMatrix<f64>,
    /// `m_e × (m_e - m_o)` orthonormal basis of `ker M0ᵀ`.
    pub r_zero: DMatrix<f64>,
    pub sweeps: usize,
}

impl ParityEigen {
    pub fn m_e(&self) -> usize {
        self.r_even.nrows()
    }

    pub fn m_o(&self) -> usize {
        self.r_odd.nrows()
    }

    /// `R = [[R_even, R_zero, R_even], [R_odd, 0, -R_odd]]`.
    pub fn assemble_full_r(&self) -> DMatrix<f64> {
        let (m_e, m_o) = (self.m_e(), self.m_o());
        let nz = m_e - m_o;
        let n = m_e + m_o;
        let mut r = DMatrix::zeros(n, n);
        r.view_mut((0, 0), (m_e, m_o)).copy_from(&self.r_even);
        r.view_mut((0, m_o), (m_e, nz)).copy_from(&self.r_zero);
        r.view_mut((0, m_o + nz), (m_e, m_o)).copy_from(&self.r_even);
        r.view_mut((m_e, 0), (m_o, m_o)).copy_from(&self.r_odd);
        r.view_mut((m_e, m_o + nz), (m_o, m_o)).copy_from(&(-&self.r_odd));
        r
    }

    /// Diagonal of `Λ = diag(Λ₊, 0, -Λ₊)` matching [`Self::assemble_full_r`].
    pub fn full_spectrum(&self) -> Vec<f64> {
        let nz = self.m_e() - self.m_o();
        self.lambda_plus
            .iter()
            .copied()
            .chain(std::iter::repeat_n(0.0, nz))
            .chain(self.lambda_plus.iter().map(|l| -l))
            .collect()
    }
}

pub fn decompose(system: &ReducedSystem) -> Result<ParityEigen> {
    decompose_matrix(&system.m0.to_dense())
}

/// Decomposition for an arbitrary `m_e × m_o` block with `m_e >= m_o`.
pub fn decompose_matrix(m0: &DMatrix<f64>) -> Result<ParityEigen> {
    let (m_e, m_o) = m0.shape();
    if m_e < m_o {
        return Err(KnudsenError::DimensionMismatch(format!(
            "even block has fewer rows ({m_e}) than columns ({m_o})"
        )));
    }
    let norm = m0.norm();
    let svd = jacobi_svd(m0)?;

    let tol = RANK_TOLERANCE * norm;
    for (index, &value) in svd.sigma.iter().enumerate() {
        if value <= tol {
            return Err(KnudsenError::RankDeficient {
                index,
                value,
                tolerance: tol,
            });
        }
    }

    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r_zero = orthogonal_complement(&svd.u, m_e - m_o);
    Ok(ParityEigen {
        lambda_plus: svd.sigma,
        r_even: svd.u * h,
        r_odd: svd.v * h,
        r_zero,
        sweeps: svd.sweeps,
    })
}

/// Thin SVD, singular values descending, with each column of `V` carrying a
/// positive largest-magnitude entry.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<f64>,
    pub sweeps: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn rotate(data: &mut [f64], len: usize, p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = data.split_at_mut(q * len);
    let cp = &mut lo[p * len..(p + 1) * len];
    let cq = &mut hi[..len];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

/// One-sided Jacobi SVD of a tall matrix (`rows >= cols`).
///
/// A pair `(p, q)` is rotated when `|a_pᵀ a_q| > tol sqrt(‖a_p‖² ‖a_q‖²)` with
/// `tol = sqrt(rows) ε`; iteration stops after the first sweep with no rotation.
pub fn jacobi_svd(a: &DMatrix<f64>) -> Result<ThinSvd> {
    let (m, n) = a.shape();
    assert!(m >= n, "jacobi_svd expects rows >= cols");
    let mut w: Vec<f64> = a.as_slice().to_vec();
    let mut v: Vec<f64> = DMatrix::<f64>::identity(n, n).as_slice().to_vec();
    let tol = (m.max(1) as f64).sqrt() * f64::EPSILON;

    let mut norms: Vec<f64> = (0..n)
        .map(|j| {
            let c = &w[j * m..(j + 1) * m];
            dot(c, c)
        })
        .collect();

    let mut sweeps = 0;
    let mut converged = n < 2;
    let mut worst = 0.0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut rotated = false;
        worst = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = norms[p];
                let beta = norms[q];
                let gamma = dot(&w[p * m..(p + 1) * m], &w[q * m..(q + 1) * m]);
                let scale = (alpha * beta).sqrt();
                if scale == 0.0 {
                    continue;
                }
                let rel = gamma.abs() / scale;
                worst = worst.max(rel);
                if rel <= tol {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, m, p, q, c, s);
                rotate(&mut v, n, p, q, c, s);
                let cp = &w[p * m..(p + 1) * m];
                let cq = &w[q * m..(q + 1) * m];
                norms[p] = dot(cp, cp);
                norms[q] = dot(cq, cq);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(KnudsenError::NoConvergence {
            sweeps,
            residual: worst,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let sigma_raw: Vec<f64> = (0..n)
        .map(|j| {
            let c = &w[j * m..(j + 1) * m];
            dot(c, c).sqrt()
        })
        .collect();
    order.sort_by(|&i, &j| sigma_raw[j].total_cmp(&sigma_raw[i]).then(i.cmp(&j)));

    let mut u_out = DMatrix::zeros(m, n);
    let mut v_out = DMatrix::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let s = sigma_raw[src];
        let vcol = &v[src * n..(src + 1) * n];
        let mut pivot = 0;
        for (i, x) in vcol.iter().enumerate() {
            if x.abs() > vcol[pivot].abs() {
                pivot = i;
            }
        }
        let flip = if vcol[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            v_out[(i, dst)] = flip * vcol[i];
        }
        let wcol = &w[src * m..(src + 1) * m];
        for i in 0..m {
            u_out[(i, dst)] = if s > 0.0 { flip * wcol[i] / s } else { 0.0 };
        }
        sigma.push(s);
    }
    Ok(ThinSvd {
        u: u_out,
        sigma,
        v: v_out,
        sweeps,
    })
}

/// Completes the orthonormal columns of `u` with `extra` further columns by
/// twice-repeated Gram-Schmidt against unit vectors, in index order.
fn orthogonal_complement(u: &DMatrix<f64>, extra: usize) -> DMatrix<f64> {
    let m = u.nrows();
    let mut basis: Vec<Vec<f64>> = u.column_iter().map(|c| c.iter().copied().collect()).collect();
    let mut out = Vec::with_capacity(extra);
    for k in 0..m {
        if out.len() == extra {
            break;
        }
        let mut x = vec![0.0; m];
        x[k] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &x);
                x.iter_mut().zip(b).for_each(|(xi, bi)| *xi -= c * bi);
            }
        }
        let nrm = dot(&x, &x).sqrt();
        if nrm > 0.5 {
            x.iter_mut().for_each(|xi| *xi /= nrm);
            basis.push(x.clone());
            out.push(x);
        }
    }
    DMatrix::from_fn(m, extra, |i, j| out[j][i])
}
