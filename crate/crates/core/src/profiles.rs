//! Closed-form layer solutions built on the spectral and wall solves.

use serde::{Deserialize, Serialize};

use crate::boundary::{solve_wall, wall_system, WallSolution};
use crate::error::{check_chi, check_positive, KnudsenError, Result};
use crate::special::HalfSpaceTable;
use crate::spectral::{decompose, ParityEigen};
use crate::system::{build_kramers_system, build_temperature_system, ReducedSystem};

/// Knudsen number of the reference normalization, `sqrt 2 / 2`.
pub const REFERENCE_KN: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Weights of `t̄₀ + 6 t̄₂ + ḡ₂` in terms of the scaled `ŵ_even`.
const DEFECT_ROW: [f64; 3] = [
    0.577_350_269_189_625_8,  // sqrt 3 / 3
    1.224_744_871_391_589,    // sqrt 6 / 2
    std::f64::consts::FRAC_1_SQRT_2,
];

/// Physical parameters of one layer solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    pub chi: f64,
    pub kn: f64,
    pub pr: f64,
    /// `q̄₂` or `σ̄₁₂`.
    pub flux: f64,
    /// `θ̄^W` or `ū₁^W`.
    pub wall_value: f64,
}

impl Default for LayerParams {
    fn default() -> Self {
        Self {
            chi: 1.0,
            kn: REFERENCE_KN,
            pr: 1.0,
            flux: 1.0,
            wall_value: 0.0,
        }
    }
}

impl LayerParams {
    pub fn with_chi(chi: f64) -> Self {
        Self {
            chi,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        check_chi(self.chi)?;
        check_positive("kn", self.kn)?;
        check_positive("pr", self.pr)?;
        for (name, v) in [("flux", self.flux), ("wall_value", self.wall_value)] {
            if !v.is_finite() {
                return Err(KnudsenError::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be finite",
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureLayerSolution {
    pub order: usize,
    pub chi: f64,
    pub kn: f64,
    pub pr: f64,
    pub q2: f64,
    pub theta_wall: f64,
    pub c0: f64,
    pub theta0: f64,
    /// Decay rates, descending. The layer widths are `λ_i Kn`.
    pub lambda: Vec<f64>,
    pub r_tilde: Vec<f64>,
    /// Defect amplitudes, independent of `Kn` and `q̄₂`.
    pub c_tilde: Vec<f64>,
    pub v_plus: Vec<f64>,
}

impl TemperatureLayerSolution {
    fn decay(&self, i: usize, y: f64) -> f64 {
        (-y / (self.lambda[i] * self.kn)).exp()
    }

    /// Far-field slope `-(2/5)(Pr/Kn) q̄₂`.
    pub fn far_field_slope(&self) -> f64 {
        -0.4 * self.pr / self.kn * self.q2
    }

    pub fn theta(&self, y: f64) -> f64 {
        let layer: f64 = (0..self.lambda.len()).map(|i| self.r_tilde[i] * self.decay(i, y)).sum();
        self.far_field_slope() * y + self.c0 + layer
    }

    pub fn theta_profile(&self, ys: &[f64]) -> Vec<f64> {
        ys.iter().map(|&y| self.theta(y)).collect()
    }

    /// `θ_d(ȳ) = -(2Kn/Pr) Σ c̃_i exp(-ȳ/(λ_i Kn))`.
    pub fn temperature_defect(&self, y: f64) -> f64 {
        let s: f64 = (0..self.lambda.len()).map(|i| self.c_tilde[i] * self.decay(i, y)).sum();
        -2.0 * self.kn / self.pr * s
    }

    pub fn temperature_defect_derivative(&self, y: f64) -> f64 {
        let s: f64 = (0..self.lambda.len())
            .map(|i| self.c_tilde[i] / self.lambda[i] * self.decay(i, y))
            .sum();
        2.0 / self.pr * s
    }

    /// `θ̃(ȳ) = ȳ + ζ - θ_d(ȳ)`, the temperature in units of the far-field gradient.
    pub fn normalized_temperature(&self, y: f64) -> f64 {
        y + self.jump_coefficient() - self.temperature_defect(y)
    }

    /// `ζ = -(5Kn/(2 Pr q̄₂)) c₀`, taken relative to `θ̄^W` so that the
    /// reference normalization `θ̄^W = 0`, `q̄₂ = 1` is applied regardless of
    /// the values this solution was built with.
    pub fn jump_coefficient(&self) -> f64 {
        -2.5 * self.kn / (self.pr * self.q2) * (self.c0 - self.theta_wall)
    }

    /// `κ_eff/κ₀ = 1 / (1 - θ_d'(ȳ))`.
    pub fn effective_conductivity(&self, y: f64) -> Result<f64> {
        let denominator = 1.0 - self.temperature_defect_derivative(y);
        if denominator <= 0.0 {
            return Err(KnudsenError::ConductivityPole { y, denominator });
        }
        Ok(1.0 / denominator)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityLayerSolution {
    pub order: usize,
    pub chi: f64,
    pub kn: f64,
    pub pr: f64,
    pub sigma12: f64,
    pub u1_wall: f64,
    pub c0k: f64,
    pub u1_0: f64,
    pub lambda_k: Vec<f64>,
    /// `-(2/a₁ᵏ) R_even[1, i] v̂_{k,+,i}(0)`.
    pub amplitudes: Vec<f64>,
    pub v_plus: Vec<f64>,
}

impl VelocityLayerSolution {
    pub fn u1(&self, y: f64) -> f64 {
        let layer: f64 = self
            .lambda_k
            .iter()
            .zip(&self.amplitudes)
            .map(|(l, a)| a * (-y / (l * self.kn)).exp())
            .sum();
        -self.sigma12 * y / self.kn + self.c0k + layer
    }

    pub fn u1_profile(&self, ys: &[f64]) -> Vec<f64> {
        ys.iter().map(|&y| self.u1(y)).collect()
    }

    /// `ζ_v = -(Kn/σ̄₁₂)(c₀ᵏ - ū₁^W)`.
    pub fn viscous_slip_coefficient(&self) -> f64 {
        -self.kn / self.sigma12 * (self.c0k - self.u1_wall)
    }
}

/// System, eigenbasis and half-space table for one temperature order,
/// reusable across `χ`, `Kn`, `Pr` and `q̄₂`.
#[derive(Debug, Clone)]
pub struct TemperatureProblem {
    pub system: ReducedSystem,
    pub eigen: ParityEigen,
    table: HalfSpaceTable,
}

impl TemperatureProblem {
    pub fn new(order: usize) -> Result<Self> {
        let system = build_temperature_system(order)?;
        let eigen = decompose(&system)?;
        let table = HalfSpaceTable::new(order + 2);
        Ok(Self {
            system,
            eigen,
            table,
        })
    }

    /// Uses a caller-supplied eigenbasis, e.g. one with permuted or sign-flipped columns.
    pub fn from_parts(system: ReducedSystem, eigen: ParityEigen) -> Self {
        let table = HalfSpaceTable::new(system.order + 2);
        Self {
            system,
            eigen,
            table,
        }
    }

    pub fn order(&self) -> usize {
        self.system.order
    }

    pub fn wall(&self, chi: f64, flux: f64, wall_value: f64) -> Result<WallSolution> {
        let w = wall_system(&self.system, chi, &self.table)?;
        solve_wall(&w, &self.eigen, flux, wall_value)
    }

    pub fn solve(&self, p: &LayerParams) -> Result<TemperatureLayerSolution> {
        p.validate()?;
        let wall = self.wall(p.chi, p.flux, p.wall_value)?;
        let m_o = self.system.m_o;
        let rows = self.system.m_e.min(3);
        let r_even = &self.eigen.r_even;
        let weights: Vec<f64> = (0..m_o)
            .map(|i| (0..rows).map(|r| DEFECT_ROW[r] * r_even[(r, i)]).sum())
            .collect();
        let v = wall.v_plus.as_slice();
        let r_tilde: Vec<f64> = (0..m_o).map(|i| -0.8 * weights[i] * v[i]).collect();
        let c_tilde: Vec<f64> = if p.flux == 0.0 {
            vec![0.0; m_o]
        } else {
            (0..m_o).map(|i| weights[i] * v[i] / p.flux).collect()
        };
        let c0 = wall.wall_unknown - r_tilde.iter().sum::<f64>();
        Ok(TemperatureLayerSolution {
            order: self.system.order,
            chi: p.chi,
            kn: p.kn,
            pr: p.pr,
            q2: p.flux,
            theta_wall: p.wall_value,
            c0,
            theta0: wall.wall_unknown,
            lambda: self.eigen.lambda_plus.clone(),
            r_tilde,
            c_tilde,
            v_plus: v.to_vec(),
        })
    }

    /// `ζ` under `θ̄^W = 0`, `q̄₂ = 1`.
    pub fn jump_coefficient(&self, chi: f64, kn: f64, pr: f64) -> Result<f64> {
        let p = LayerParams {
            chi,
            kn,
            pr,
            flux: 1.0,
            wall_value: 0.0,
        };
        Ok(self.solve(&p)?.jump_coefficient())
    }
}

/// Kramers counterpart of [`TemperatureProblem`]; fixed `Pr` since it enters `a₁ᵏ`.
#[derive(Debug, Clone)]
pub struct KramersProblem {
    pub system: ReducedSystem,
    pub eigen: ParityEigen,
    table: HalfSpaceTable,
}

impl KramersProblem {
    pub fn new(order: usize, pr: f64) -> Result<Self> {
        let system = build_kramers_system(order, pr)?;
        let eigen = decompose(&system)?;
        let table = HalfSpaceTable::new(order + 2);
        Ok(Self {
            system,
            eigen,
            table,
        })
    }

    pub fn prandtl(&self) -> f64 {
        self.system.prandtl.unwrap_or(1.0)
    }

    pub fn solve(&self, chi: f64, kn: f64, sigma12: f64, u1_wall: f64) -> Result<VelocityLayerSolution> {
        let p = LayerParams {
            chi,
            kn,
            pr: self.prandtl(),
            flux: sigma12,
            wall_value: u1_wall,
        };
        p.validate()?;
        let w = wall_system(&self.system, chi, &self.table)?;
        let wall = solve_wall(&w, &self.eigen, sigma12, u1_wall)?;
        let scale = -2.0 / self.system.a(1);
        let amplitudes: Vec<f64> = (0..self.system.m_o)
            .map(|i| scale * self.eigen.r_even[(0, i)] * wall.v_plus[i])
            .collect();
        let c0k = wall.wall_unknown - amplitudes.iter().sum::<f64>();
        Ok(VelocityLayerSolution {
            order: self.system.order,
            chi,
            kn,
            pr: self.prandtl(),
            sigma12,
            u1_wall,
            c0k,
            u1_0: wall.wall_unknown,
            lambda_k: self.eigen.lambda_plus.clone(),
            amplitudes,
            v_plus: wall.v_plus.as_slice().to_vec(),
        })
    }
}

pub fn temperature_solution(
    order: usize,
    chi: f64,
    kn: f64,
    pr: f64,
    q2: f64,
    theta_wall: f64,
) -> Result<TemperatureLayerSolution> {
    TemperatureProblem::new(order)?.solve(&LayerParams {
        chi,
        kn,
        pr,
        flux: q2,
        wall_value: theta_wall,
    })
}

pub fn velocity_solution(
    order: usize,
    chi: f64,
    kn: f64,
    pr: f64,
    sigma12: f64,
    u1_wall: f64,
) -> Result<VelocityLayerSolution> {
    KramersProblem::new(order, pr)?.solve(chi, kn, sigma12, u1_wall)
}

/// `ζ` at order `M` under the reference normalization.
pub fn jump_coefficient(order: usize, chi: f64, kn: f64, pr: f64) -> Result<f64> {
    TemperatureProblem::new(order)?.jump_coefficient(chi, kn, pr)
}

/// `lim_{χ→0} χ/(2-χ) ζ = 5 sqrt(π) / 8` at `Kn = sqrt 2 / 2`, `Pr = 1`.
pub fn chi_zero_limit() -> f64 {
    5.0 * std::f64::consts::PI.sqrt() / 8.0
}

/// Which three orders enter `β_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ConvergenceIndexing {
    /// `M = 2^{k+1}+1, 2^{k+2}+1, 2^{k+3}+1`.
    #[default]
    FromKPlusOne,
    /// `M = 2^k+1, 2^{k+1}+1, 2^{k+2}+1`.
    FromK,
}

impl ConvergenceIndexing {
    pub fn orders(self, k: u32) -> [usize; 3] {
        let base = match self {
            Self::FromKPlusOne => k + 1,
            Self::FromK => k,
        };
        [0, 1, 2].map(|d| (1usize << (base + d)) + 1)
    }
}

/// `β = -log₂((ζ₃ - ζ₂)/(ζ₂ - ζ₁))`.
pub fn convergence_from_zetas(z: [f64; 3]) -> Result<f64> {
    let den = z[1] - z[0];
    if den.abs() < 1e-14 {
        return Err(KnudsenError::DegenerateDifference(den));
    }
    let ratio = (z[2] - z[1]) / den;
    if ratio <= 0.0 {
        return Err(KnudsenError::DegenerateDifference(ratio));
    }
    Ok(-ratio.log2())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceEstimate {
    pub chi: f64,
    pub k: u32,
    pub orders: [usize; 3],
    pub zetas: [f64; 3],
    pub beta: f64,
}

/// `β_k` for several `χ`, sharing one decomposition per order.
pub fn convergence_orders(
    chis: &[f64],
    k: u32,
    kn: f64,
    indexing: ConvergenceIndexing,
) -> Result<Vec<ConvergenceEstimate>> {
    if k == 0 {
        return Err(KnudsenError::InvalidParameter {
            name: "k",
            value: 0.0,
            reason: "convergence index starts at 1",
        });
    }
    let orders = indexing.orders(k);
    let mut zetas = vec![[0.0; 3]; chis.len()];
    for (slot, &m) in orders.iter().enumerate() {
        let problem = TemperatureProblem::new(m)?;
        for (c, &chi) in chis.iter().enumerate() {
            zetas[c][slot] = problem.jump_coefficient(chi, kn, 1.0)?;
        }
    }
    chis.iter()
        .zip(zetas)
        .map(|(&chi, z)| {
            Ok(ConvergenceEstimate {
                chi,
                k,
                orders,
                zetas: z,
                beta: convergence_from_zetas(z)?,
            })
        })
        .collect()
}

pub fn convergence_order(chi: f64, k: u32, indexing: ConvergenceIndexing) -> Result<f64> {
    Ok(convergence_orders(&[chi], k, REFERENCE_KN, indexing)?[0].beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    #[default]
    Geometric,
}

/// `count` points from `min` to `max` inclusive.
pub fn sample_grid(min: f64, max: f64, count: usize, spacing: Spacing) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite()) || max <= min || min < 0.0 {
        return Err(KnudsenError::InvalidParameter {
            name: "ymax",
            value: max,
            reason: "grid needs 0 <= min < max",
        });
    }
    if count < 2 {
        return Err(KnudsenError::InvalidParameter {
            name: "samples",
            value: count as f64,
            reason: "need at least 2 samples",
        });
    }
    let last = (count - 1) as f64;
    let grid = match spacing {
        Spacing::Linear => (0..count).map(|i| min + (max - min) * i as f64 / last).collect(),
        Spacing::Geometric => {
            check_positive("ymin", min)?;
            let ratio = (max / min).ln();
            (0..count).map(|i| min * (ratio * i as f64 / last).exp()).collect()
        }
    };
    Ok(grid)
}

/// Geometric grid from `1e-3` to `60 λ₁ Kn` with 400 points.
pub fn default_grid(lambda_max: f64, kn: f64) -> Vec<f64> {
    sample_grid(1e-3, (60.0 * lambda_max * kn).max(2e-3), 400, Spacing::Geometric)
        .expect("default grid parameters are valid")
}
