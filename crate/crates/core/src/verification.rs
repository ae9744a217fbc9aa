//! Independent oracles: adaptive quadrature for `S(α, β)`, a dense cyclic
//! Jacobi eigensolver, and a finite-difference two-point BVP solver for the
//! reduced systems.
//!
//! None of these reuse the closed forms, the parity SVD or `K(χ)`; they are
//! what the fast paths are checked against.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::boundary::{assemble_kramers_sk, assemble_temperature_tb, is_negative_definite, k_matrix, wall_system};
use crate::error::{check_chi, check_positive, KnudsenError, Result};
use crate::profiles::{KramersProblem, LayerParams, TemperatureProblem};
use crate::special::{accommodation_factor, half_space_s_normalized, HalfSpaceTable};
use crate::spectral::decompose;
use crate::system::{build_kramers_system, build_temperature_system, ReducedSystem};

/// Largest half-space index the double-precision quadrature is trusted for.
pub const QUADRATURE_MAX_ORDER: usize = 30;
/// Integration window in standard deviations; the Gaussian tail beyond it is
/// below 1e-28 relative for every index up to [`QUADRATURE_MAX_ORDER`].
pub const QUADRATURE_WINDOW: f64 = 20.0;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Kronrod-15 value, Gauss-7 error estimate and Kronrod `∫|f|`.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut abs = WGK[7] * fc.abs();
    for j in 0..7 {
        let x = h * XGK[j];
        let (f1, f2) = (f(c - x), f(c + x));
        k += WGK[j] * (f1 + f2);
        abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            g += WG[j / 2] * (f1 + f2);
        }
    }
    (k * h, ((k - g) * h).abs(), abs * h.abs())
}

/// Globally adaptive Gauss-Kronrod on `[a, b]`, bisecting the worst panel
/// until the summed error estimate is below `rel_tol · ∫|f|`.
pub fn integrate_adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    const INITIAL: usize = 40;
    const MAX_PANELS: usize = 4000;
    let w = (b - a) / INITIAL as f64;
    let mut panels: Vec<(f64, f64, f64, f64, f64)> = (0..INITIAL)
        .map(|i| {
            let (lo, hi) = (a + w * i as f64, a + w * (i + 1) as f64);
            let (v, e, m) = gk15(&f, lo, hi);
            (lo, hi, v, e, m)
        })
        .collect();
    loop {
        let err: f64 = panels.iter().map(|p| p.3).sum();
        let mag: f64 = panels.iter().map(|p| p.4).sum();
        if err <= rel_tol * mag || panels.len() >= MAX_PANELS {
            break;
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, ..) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        for (l, h) in [(lo, mid), (mid, hi)] {
            let (v, e, m) = gk15(&f, l, h);
            panels.push((l, h, v, e, m));
        }
    }
    panels.sort_by(|x, y| x.0.total_cmp(&y.0));
    panels.iter().map(|p| p.2).sum()
}

/// Orthonormal Hermite value `He_n(x) / sqrt(n!)`.
fn hermite_orthonormal(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..n {
        let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
    }
    cur
}

fn check_quadrature_order(alpha: usize, beta: usize) -> Result<()> {
    if alpha > QUADRATURE_MAX_ORDER || beta > QUADRATURE_MAX_ORDER {
        return Err(KnudsenError::IndexOutOfRange {
            alpha,
            beta,
            limit: QUADRATURE_MAX_ORDER,
        });
    }
    Ok(())
}

/// `S(α, β) / sqrt(α! β!)` by quadrature of
/// `sqrt(2π/θ) ∫_{-∞}^0 ξ θ^{(α+β)/2} He_α^{[0,θ]} He_β^{[0,θ]} ω^{[0,θ]} dξ`.
pub fn quadrature_s_normalized(alpha: usize, beta: usize, theta: f64) -> Result<f64> {
    check_quadrature_order(alpha, beta)?;
    check_positive("theta", theta)?;
    let st = theta.sqrt();
    let pre = (2.0 * PI / theta).sqrt() / (2.0 * PI * theta).sqrt();
    // θ^{n/2} He_n^{[0,θ]}(ξ) = He_n(ξ/sqrt θ)
    let integrand = |xi: f64| {
        let x = xi / st;
        pre * xi * hermite_orthonormal(alpha, x) * hermite_orthonormal(beta, x) * (-0.5 * xi * xi / theta).exp()
    };
    Ok(integrate_adaptive(integrand, -QUADRATURE_WINDOW * st, 0.0, 1e-15))
}

pub fn quadrature_s(alpha: usize, beta: usize, theta: f64) -> Result<f64> {
    let fact = |n: usize| (1..=n).fold(1.0, |a, k| a * k as f64);
    Ok(quadrature_s_normalized(alpha, beta, theta)? * (fact(alpha) * fact(beta)).sqrt())
}

/// Eigenvalues ascending and the matching orthonormal eigenvectors (columns).
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

/// Classical cyclic Jacobi on a dense symmetric matrix.
pub fn dense_symmetric_eig(a: &DMatrix<f64>) -> Result<SymmetricEigen> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(KnudsenError::DimensionMismatch(format!("{}x{} is not square", n, a.ncols())));
    }
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let asym = (a - a.transpose()).abs().max();
    if asym > 1e-12 * scale {
        return Err(KnudsenError::NotSymmetric(asym));
    }
    let mut m = (a + a.transpose()) * 0.5;
    let mut v = DMatrix::identity(n, n);
    const MAX_SWEEPS: usize = 100;
    let mut sweeps = 0;
    loop {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale * (n.max(1) as f64) {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(KnudsenError::NoConvergence { sweeps, residual: off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    Ok(SymmetricEigen {
        values: idx.iter().map(|&i| m[(i, i)]).collect(),
        vectors: DMatrix::from_fn(n, n, |r, c| v[(r, idx[c])]),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BvpConfig {
    /// Truncation length; `None` means `40 λ₁ Kn`.
    pub y_max: Option<f64>,
    pub n_cells: usize,
    /// Grid map `y(s) = y_max (e^{κs} - 1)/(e^κ - 1)`; larger κ clusters toward the wall.
    pub stretch: f64,
    /// Bound on the wall linear-solve residual.
    pub tolerance: f64,
}

impl Default for BvpConfig {
    fn default() -> Self {
        Self {
            y_max: None,
            n_cells: 20_000,
            stretch: 6.0,
            tolerance: 1e-10,
        }
    }
}

/// Oracle profile on the grid nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BvpProfile {
    pub y: Vec<f64>,
    pub value: Vec<f64>,
    pub wall_residual: f64,
}

/// Richardson-extrapolated oracle profile together with the raw runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinedProfile {
    pub y: Vec<f64>,
    pub value: Vec<f64>,
    pub coarse: Vec<f64>,
    /// Fine-grid values restricted to the coarse nodes.
    pub fine: Vec<f64>,
}

impl RefinedProfile {
    /// `max|fine - coarse|`, which bounds the first-order error of the fine run.
    pub fn refinement_change(&self) -> f64 {
        self.fine.iter().zip(&self.coarse).map(|(f, c)| (f - c).abs()).fold(0.0, f64::max)
    }
}

fn grid(y_max: f64, n_cells: usize, stretch: f64) -> Vec<f64> {
    let denom = stretch.exp_m1();
    (0..=n_cells)
        .map(|i| y_max * (stretch * i as f64 / n_cells as f64).exp_m1() / denom)
        .collect()
}

struct Characteristics {
    rates: Vec<f64>,
    q_even: DMatrix<f64>,
    q_odd: DMatrix<f64>,
}

/// Outgoing characteristic directions of the dense system (positive eigenvalues).
fn characteristics(sys: &ReducedSystem) -> Result<Characteristics> {
    let eig = dense_symmetric_eig(&sys.full_matrix())?;
    let pos: Vec<usize> = (0..eig.values.len()).filter(|&i| eig.values[i] > 0.0).rev().collect();
    if pos.len() != sys.m_o {
        return Err(KnudsenError::DimensionMismatch(format!(
            "expected {} positive eigenvalues, found {}",
            sys.m_o,
            pos.len()
        )));
    }
    let q = &eig.vectors;
    Ok(Characteristics {
        rates: pos.iter().map(|&i| eig.values[i]).collect(),
        q_even: DMatrix::from_fn(sys.m_e, pos.len(), |r, c| q[(r, pos[c])]),
        q_odd: DMatrix::from_fn(sys.m_o, pos.len(), |r, c| q[(sys.m_e + r, pos[c])]),
    })
}

/// Solves `flux·c + diag(0, M0)(Δ; ŵ_odd) = b·T(Δ; ŵ_even)` for `(Δ, v̂₊(0))`.
fn wall_values(
    sys: &ReducedSystem,
    ch: &Characteristics,
    t: &DMatrix<f64>,
    c: &DVector<f64>,
    b: f64,
    flux: f64,
    tolerance: f64,
) -> Result<(f64, DVector<f64>, f64)> {
    let n = sys.m_o + 1;
    let m0 = sys.m0.to_dense();
    let mut a = DMatrix::zeros(n, n);
    a.view_mut((1, 1), (n - 1, n - 1)).copy_from(&(&m0 * &ch.q_odd));
    let mut lift = DMatrix::zeros(n, n);
    lift[(0, 0)] = 1.0;
    lift.view_mut((1, 1), (n - 1, n - 1)).copy_from(&ch.q_even);
    a -= t * lift * b;
    let rhs = c * (-flux);
    let z = a.clone().lu().solve(&rhs).ok_or(KnudsenError::LinearSolve("singular oracle wall system"))?;
    let residual = (&a * &z - &rhs).abs().max();
    if residual > tolerance * (1.0 + rhs.abs().max()) {
        return Err(KnudsenError::LinearSolve("oracle wall residual above tolerance"));
    }
    Ok((z[0], z.rows(1, n - 1).into_owned(), residual))
}

/// Implicit upwind march of the outgoing characteristics. The incoming ones
/// start from zero at `y_max` and remain zero under the backward sweep.
fn march(ch: &Characteristics, v0: &DVector<f64>, y: &[f64], kn: f64) -> Vec<DVector<f64>> {
    let mut out = Vec::with_capacity(y.len());
    let mut v = v0.clone();
    out.push(v.clone());
    for w in y.windows(2) {
        let h = w[1] - w[0];
        for (j, vj) in v.iter_mut().enumerate() {
            *vj /= 1.0 + h / (ch.rates[j] * kn);
        }
        out.push(v.clone());
    }
    out
}

fn resolve_y_max(cfg: &BvpConfig, lambda1: f64, kn: f64) -> Result<f64> {
    if cfg.n_cells < 1000 {
        return Err(KnudsenError::InvalidParameter {
            name: "n_cells",
            value: cfg.n_cells as f64,
            reason: "oracle grid needs at least 1000 cells",
        });
    }
    let y_max = cfg.y_max.unwrap_or(40.0 * lambda1 * kn);
    if y_max < 20.0 * lambda1 * kn {
        return Err(KnudsenError::InvalidParameter {
            name: "y_max",
            value: y_max,
            reason: "must be at least 20 λ₁ Kn",
        });
    }
    Ok(y_max)
}

/// Raw `T` for small orders, assembled from quadrature values of `S`.
fn oracle_temperature_t(sys: &ReducedSystem) -> Result<DMatrix<f64>> {
    let n = sys.m_e + 1;
    let s = |a: usize, b: usize| quadrature_s(a, b, 1.0);
    let alpha = |p: usize| if p % 2 == 1 { p + 1 } else { p - 2 };
    let mut tb = DMatrix::zeros(n, n);
    for i in 1..=n {
        for j in 1..=n {
            let (a, b) = (alpha(i), alpha(j));
            tb[(i - 1, j - 1)] = match (i % 2, j % 2) {
                (0, 0) => s(a, b)?,
                (1, 1) => s(a, b)? - s(a, 0)? * s(0, b)? / s(0, 0)?,
                _ => 0.0,
            };
        }
    }
    let mut p = DMatrix::identity(n, n);
    p[(0, 0)] = 0.5;
    p[(0, 1)] = 1.0;
    p[(1, 0)] = 1.0;
    p[(1, 1)] = -1.0;
    let d = DMatrix::from_fn(n, n, |i, j| match (i == j, i) {
        (false, _) => 0.0,
        (true, 0) => 1.0,
        (true, i) => 1.0 / sys.a(i),
    });
    Ok(&d * &p * tb * &p * &d)
}

/// Finite-difference oracle for the temperature profile, odd `M <= 15`.
pub fn bvp_temperature(order: usize, params: &LayerParams, cfg: &BvpConfig) -> Result<BvpProfile> {
    if order > 15 {
        return Err(KnudsenError::InvalidOrder {
            order,
            reason: "BVP oracle is limited to M <= 15",
        });
    }
    check_chi(params.chi)?;
    check_positive("kn", params.kn)?;
    check_positive("pr", params.pr)?;
    let sys = build_temperature_system(order)?;
    let ch = characteristics(&sys)?;
    let y_max = resolve_y_max(cfg, ch.rates[0], params.kn)?;
    let t = oracle_temperature_t(&sys)?;
    let c = DVector::from_fn(sys.m_o + 1, |i, _| match i {
        0 => 1.0,
        1 => 4.0 / (5.0 * 3f64.sqrt()),
        2 => 2.0 * 6f64.sqrt() / 5.0,
        3 => 2.0 * 2f64.sqrt() / 5.0,
        _ => 0.0,
    });
    let b = accommodation_factor(params.chi);
    let (offset, v0, wall_residual) = wall_values(&sys, &ch, &t, &c, b, params.flux, cfg.tolerance)?;
    let y = grid(y_max, cfg.n_cells, cfg.stretch);
    let vs = march(&ch, &v0, &y, params.kn);
    // t̄₀ + 6t̄₂ + ḡ₂ from the unscaled moments f = L₁⁻¹ ŵ_even
    let weights: Vec<f64> = [1.0, 6.0, 1.0]
        .iter()
        .enumerate()
        .take(sys.m_e.min(3))
        .map(|(i, w)| w / sys.a(i + 1))
        .collect();
    let defect = |v: &DVector<f64>| {
        let w = &ch.q_even * v;
        weights.iter().enumerate().map(|(i, c)| c * w[i]).sum::<f64>()
    };
    let d0 = defect(&vs[0]);
    let theta0 = params.wall_value + offset;
    let slope = -0.4 * params.pr / params.kn * params.flux;
    let value = y
        .iter()
        .zip(&vs)
        .map(|(&yi, v)| theta0 + slope * yi - 0.8 * (defect(v) - d0))
        .collect();
    Ok(BvpProfile { y, value, wall_residual })
}

/// Finite-difference oracle for the Kramers velocity profile, even `M <= 14`.
pub fn bvp_kramers(order: usize, params: &LayerParams, cfg: &BvpConfig) -> Result<BvpProfile> {
    if order > 14 {
        return Err(KnudsenError::InvalidOrder {
            order,
            reason: "BVP oracle is limited to M <= 14",
        });
    }
    check_chi(params.chi)?;
    check_positive("kn", params.kn)?;
    let sys = build_kramers_system(order, params.pr)?;
    let ch = characteristics(&sys)?;
    let y_max = resolve_y_max(cfg, ch.rates[0], params.kn)?;
    let n = sys.m_e + 1;
    let mut sk = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            sk[(i, j)] = quadrature_s(2 * i, 2 * j, 1.0)?;
        }
    }
    let d = DMatrix::from_fn(n, n, |i, j| match (i == j, i) {
        (false, _) => 0.0,
        (true, 0) => 1.0,
        (true, i) => 1.0 / sys.a(i),
    });
    let t = &d * sk * &d;
    let a1 = sys.a(1);
    let c = DVector::from_fn(sys.m_o + 1, |i, _| match i {
        0 => 1.0,
        1 => 2.0 / a1,
        _ => 0.0,
    });
    let b = accommodation_factor(params.chi);
    let (offset, v0, wall_residual) = wall_values(&sys, &ch, &t, &c, b, params.flux, cfg.tolerance)?;
    let y = grid(y_max, cfg.n_cells, cfg.stretch);
    let vs = march(&ch, &v0, &y, params.kn);
    let f2 = |v: &DVector<f64>| (ch.q_even.row(0) * v)[0] / a1;
    let f20 = f2(&vs[0]);
    let u0 = params.wall_value + offset;
    let value = y
        .iter()
        .zip(&vs)
        .map(|(&yi, v)| u0 - params.flux * yi / params.kn - 2.0 * (f2(v) - f20))
        .collect();
    Ok(BvpProfile { y, value, wall_residual })
}

/// Runs an oracle at `n` and `2n` cells and extrapolates `2 u_{2n} - u_n`
/// on the coarse nodes.
pub fn refine(
    solve: impl Fn(&BvpConfig) -> Result<BvpProfile>,
    cfg: &BvpConfig,
) -> Result<RefinedProfile> {
    let coarse = solve(cfg)?;
    let fine_cfg = BvpConfig {
        n_cells: 2 * cfg.n_cells,
        ..*cfg
    };
    let fine = solve(&fine_cfg)?;
    let fine_on_coarse: Vec<f64> = fine.value.iter().step_by(2).copied().collect();
    let value = fine_on_coarse
        .iter()
        .zip(&coarse.value)
        .map(|(f, c)| 2.0 * f - c)
        .collect();
    Ok(RefinedProfile {
        y: coarse.y,
        value,
        coarse: coarse.value,
        fine: fine_on_coarse,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyLevel {
    Quick,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub max_residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub level: VerifyLevel,
    pub checks: Vec<CheckResult>,
    pub seconds: f64,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &str, residual: f64, tolerance: f64, detail: String) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed: residual.is_finite() && residual <= tolerance,
        max_residual: residual,
        tolerance,
        detail,
    }
}

fn failed(name: &str, tolerance: f64, err: KnudsenError) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed: false,
        max_residual: f64::INFINITY,
        tolerance,
        detail: err.to_string(),
    }
}

/// Closed-form vs quadrature over `0 <= α, β <= max`: relative error on
/// nonzero entries, absolute on exact zeros, all in normalized form.
pub fn check_half_space(max: usize, s_normalized: &dyn Fn(usize, usize) -> f64) -> CheckResult {
    let name = "half-space integrals vs quadrature";
    let mut worst = 0.0f64;
    let mut at = (0, 0);
    let mut structural = true;
    for a in 0..=max {
        for b in 0..=max {
            let closed = s_normalized(a, b);
            let quad = match quadrature_s_normalized(a, b, 1.0) {
                Ok(v) => v,
                Err(e) => return failed(name, 1e-9, e),
            };
            let err = if closed == 0.0 {
                // 1e-12 absolute mapped onto the 1e-9 scale of the check
                quad.abs() * 1e3
            } else {
                ((closed - quad) / closed).abs()
            };
            if err > worst {
                worst = err;
                at = (a, b);
            }
            if closed != s_normalized(b, a) || (a % 2 == 0 && b % 2 == 1 && a.abs_diff(b) != 1 && closed != 0.0) {
                structural = false;
            }
        }
    }
    let residual = if structural { worst } else { f64::INFINITY };
    check(name, residual, 1e-9, format!("alpha, beta <= {max}; worst at {at:?}; symmetry/zero pattern {}", if structural { "exact" } else { "violated" }))
}

/// Dense-oracle eigenvalues against `{±λ_i} ∪ {0}` plus orthogonality of `R`.
pub fn check_spectral(systems: &[ReducedSystem]) -> CheckResult {
    let name = "parity spectrum vs dense Jacobi";
    let mut worst = 0.0f64;
    let mut worst_order = 0;
    for sys in systems {
        let r = (|| -> Result<f64> {
            let e = decompose(sys)?;
            let dense = dense_symmetric_eig(&sys.full_matrix())?;
            let mut expected = e.full_spectrum();
            expected.sort_by(f64::total_cmp);
            let mut err = expected
                .iter()
                .zip(&dense.values)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            let r = e.assemble_full_r();
            let n = r.nrows();
            err = err.max((r.transpose() * &r - DMatrix::<f64>::identity(n, n)).abs().max());
            let m_o = e.m_o();
            let half = e.r_even.transpose() * &e.r_even - DMatrix::<f64>::identity(m_o, m_o) * 0.5;
            Ok(err.max(half.abs().max()))
        })();
        match r {
            Ok(err) if err > worst || err.is_nan() => {
                worst = err;
                worst_order = sys.order;
            }
            Ok(_) => {}
            Err(e) => return failed(name, 1e-10, e),
        }
    }
    check(name, worst, 1e-10, format!("{} systems; worst at M = {worst_order}", systems.len()))
}

/// Negative definiteness of `T^b`/`S_k`, `T` and `K(χ)`; residual 0 on success.
pub fn check_definiteness(systems: &[ReducedSystem], chis: &[f64]) -> CheckResult {
    let name = "negative definiteness of boundary matrices";
    let mut bad = Vec::new();
    for sys in systems {
        let table = HalfSpaceTable::new(sys.order + 2);
        let e = match decompose(sys) {
            Ok(e) => e,
            Err(err) => return failed(name, 0.0, err),
        };
        let base = match sys.kind {
            crate::system::ProblemKind::TemperatureJump => assemble_temperature_tb(sys.order, &table),
            crate::system::ProblemKind::Kramers => assemble_kramers_sk(sys.m_e, &table),
        };
        if !is_negative_definite(&base) {
            bad.push(format!("base M={}", sys.order));
        }
        for &chi in chis {
            let w = match wall_system(sys, chi, &table) {
                Ok(w) => w,
                Err(err) => return failed(name, 0.0, err),
            };
            if !is_negative_definite(&w.t_scaled) {
                bad.push(format!("T M={} chi={chi}", sys.order));
            }
            match k_matrix(&w, &e) {
                Ok(k) if is_negative_definite(&k) => {}
                _ => bad.push(format!("K M={} chi={chi}", sys.order)),
            }
        }
    }
    let detail = if bad.is_empty() {
        format!("{} systems x {} chi values", systems.len(), chis.len())
    } else {
        format!("failed: {}", bad.join(", "))
    };
    check(name, if bad.is_empty() { 0.0 } else { 1.0 }, 0.0, detail)
}

/// Analytic profile against the refined BVP oracle on the oracle nodes.
pub fn check_bvp_temperature(order: usize, params: &LayerParams, cfg: &BvpConfig) -> CheckResult {
    let name = format!("temperature profile vs BVP oracle (M = {order})");
    let run = || -> Result<f64> {
        let sol = TemperatureProblem::new(order)?.solve(params)?;
        let oracle = refine(|c| bvp_temperature(order, params, c), cfg)?;
        Ok(oracle
            .y
            .iter()
            .zip(&oracle.value)
            .map(|(&y, v)| (sol.theta(y) - v).abs())
            .fold(0.0, f64::max))
    };
    match run() {
        Ok(err) => check(&name, err, 1e-6, format!("chi = {}, {} cells refined", params.chi, cfg.n_cells)),
        Err(e) => failed(&name, 1e-6, e),
    }
}

pub fn check_bvp_kramers(order: usize, params: &LayerParams, cfg: &BvpConfig) -> CheckResult {
    let name = format!("velocity profile vs BVP oracle (M = {order})");
    let run = || -> Result<f64> {
        let sol = KramersProblem::new(order, params.pr)?.solve(params.chi, params.kn, params.flux, params.wall_value)?;
        let oracle = refine(|c| bvp_kramers(order, params, c), cfg)?;
        Ok(oracle
            .y
            .iter()
            .zip(&oracle.value)
            .map(|(&y, v)| (sol.u1(y) - v).abs())
            .fold(0.0, f64::max))
    };
    match run() {
        Ok(err) => check(&name, err, 1e-6, format!("chi = {}, {} cells refined", params.chi, cfg.n_cells)),
        Err(e) => failed(&name, 1e-6, e),
    }
}

pub fn run_verification(level: VerifyLevel) -> VerifyReport {
    run_verification_with(level, &half_space_s_normalized)
}

/// As [`run_verification`] but with a caller-supplied normalized `S`, so a
/// corrupted table can be fed in.
pub fn run_verification_with(level: VerifyLevel, s_normalized: &dyn Fn(usize, usize) -> f64) -> VerifyReport {
    let start = Instant::now();
    let (s_max, t_max, k_max) = match level {
        VerifyLevel::Quick => (12, 7, 6),
        VerifyLevel::Full => (QUADRATURE_MAX_ORDER, 99, 98),
    };
    let mut systems: Vec<ReducedSystem> = (3..=t_max)
        .step_by(2)
        .map(|m| build_temperature_system(m).expect("valid odd order"))
        .collect();
    systems.extend((4..=k_max).step_by(2).map(|m| build_kramers_system(m, 2.0 / 3.0).expect("valid even order")));

    let mut checks = vec![
        check_half_space(s_max, s_normalized),
        check_spectral(&systems),
        check_definiteness(&systems, &[0.1, 0.5, 1.0]),
    ];
    let cfg = BvpConfig::default();
    let (temps, kramers): (&[usize], &[usize]) = match level {
        VerifyLevel::Quick => (&[3], &[4]),
        VerifyLevel::Full => (&[3, 7], &[4, 8]),
    };
    for &m in temps {
        checks.push(check_bvp_temperature(m, &LayerParams::default(), &cfg));
    }
    for &m in kramers {
        checks.push(check_bvp_kramers(m, &LayerParams::default(), &cfg));
    }
    VerifyReport {
        level,
        checks,
        seconds: start.elapsed().as_secs_f64(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::half_space_s;
    use approx::assert_relative_eq;

    #[test]
    fn quadrature_anchors() {
        assert!((quadrature_s(0, 0, 1.0).unwrap() + 1.0).abs() < 1e-10);
        assert!((quadrature_s(0, 1, 1.0).unwrap() - (2.0 * PI).sqrt() / 2.0).abs() < 1e-10);
        assert!((quadrature_s(0, 0, 2.0).unwrap() + 1.0).abs() < 1e-9);
        assert!((quadrature_s(1, 1, 1.0).unwrap() + 2.0).abs() < 1e-10);
        assert!(quadrature_s(31, 0, 1.0).is_err());
    }

    #[test]
    fn quadrature_theta_independent() {
        for (a, b) in [(2, 4), (7, 8), (12, 12), (30, 28)] {
            let base = quadrature_s_normalized(a, b, 1.0).unwrap();
            for theta in [0.5, 2.0] {
                assert_relative_eq!(quadrature_s_normalized(a, b, theta).unwrap(), base, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn quadrature_matches_closed_form_small() {
        for a in 0..=10 {
            for b in 0..=10 {
                let s = half_space_s(a, b).unwrap();
                if s == 0.0 {
                    assert!(quadrature_s_normalized(a, b, 1.0).unwrap().abs() < 1e-12);
                } else {
                    let q = quadrature_s(a, b, 1.0).unwrap();
                    assert_relative_eq!(q, s, max_relative = 1e-9);
                }
            }
        }
    }

    #[test]
    fn jacobi_examples() {
        let v = 3.0 / 5f64.sqrt();
        let e = dense_symmetric_eig(&DMatrix::from_row_slice(2, 2, &[0.0, v, v, 0.0])).unwrap();
        assert_relative_eq!(e.values[0], -v, max_relative = 1e-15);
        assert_relative_eq!(e.values[1], v, max_relative = 1e-15);
        let id = dense_symmetric_eig(&DMatrix::identity(4, 4)).unwrap();
        assert!(id.values.iter().all(|&x| x == 1.0));
        assert!(dense_symmetric_eig(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0])).is_err());
    }

    #[test]
    fn jacobi_reconstruction() {
        // deterministic pseudo-random symmetric matrix
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut a = DMatrix::zeros(10, 10);
        for i in 0..10 {
            for j in 0..=i {
                let x = next();
                a[(i, j)] = x;
                a[(j, i)] = x;
            }
        }
        let e = dense_symmetric_eig(&a).unwrap();
        let d = DMatrix::from_diagonal(&DVector::from_vec(e.values.clone()));
        let res = (&a * &e.vectors - &e.vectors * d).abs().max();
        assert!(res <= 1e-10 * a.norm());
        for w in e.values.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn bvp_order_three_first_order_convergence() {
        let p = LayerParams::default();
        let sol = TemperatureProblem::new(3).unwrap().solve(&p).unwrap();
        let cfg = BvpConfig { n_cells: 2000, ..BvpConfig::default() };
        let r = refine(|c| bvp_temperature(3, &p, c), &cfg).unwrap();
        let err = |v: &[f64]| r.y.iter().zip(v).map(|(&y, x)| (sol.theta(y) - x).abs()).fold(0.0, f64::max);
        let (ec, ef, er) = (err(&r.coarse), err(&r.fine), err(&r.value));
        let ratio = ec / ef;
        assert!((1.8..2.2).contains(&ratio), "ratio {ratio}");
        assert!(er < ef / 10.0);
        // far-field slope
        let n = r.y.len();
        let slope = (r.value[n - 1] - r.value[n - 2]) / (r.y[n - 1] - r.y[n - 2]);
        assert!((slope - sol.far_field_slope()).abs() < 1e-8);
    }

    #[test]
    fn bvp_kramers_linear_in_shear() {
        let cfg = BvpConfig { n_cells: 1000, ..BvpConfig::default() };
        let p = LayerParams::default();
        let a = bvp_kramers(4, &p, &cfg).unwrap();
        let b = bvp_kramers(4, &LayerParams { flux: 3.0, ..p }, &cfg).unwrap();
        for (x, y) in a.value.iter().zip(&b.value) {
            assert!((3.0 * x - y).abs() <= 1e-10 * y.abs().max(1.0));
        }
    }

    #[test]
    fn bvp_rejects_bad_config() {
        let p = LayerParams::default();
        assert!(bvp_temperature(3, &p, &BvpConfig { n_cells: 10, ..BvpConfig::default() }).is_err());
        assert!(bvp_temperature(3, &p, &BvpConfig { y_max: Some(0.1), ..BvpConfig::default() }).is_err());
        assert!(bvp_temperature(17, &p, &BvpConfig::default()).is_err());
    }

    #[test]
    fn quick_suite_passes() {
        let report = run_verification(VerifyLevel::Quick);
        for c in &report.checks {
            assert!(c.passed, "{}: {} ({})", c.name, c.max_residual, c.detail);
        }
    }

    #[test]
    fn corrupted_entry_is_caught() {
        let corrupt = |a: usize, b: usize| {
            let v = half_space_s_normalized(a, b);
            if (a, b) == (6, 4) { v * (1.0 + 1e-6) } else { v }
        };
        let report = run_verification_with(VerifyLevel::Quick, &corrupt);
        assert!(!report.checks[0].passed);
        assert!(report.checks[1..].iter().all(|c| c.passed));
    }
}
