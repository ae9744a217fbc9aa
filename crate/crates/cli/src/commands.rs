use std::collections::BTreeMap;

use knudsen_core::profiles::{
    convergence_from_zetas, default_grid, sample_grid, ConvergenceEstimate, ConvergenceIndexing, KramersProblem,
    LayerParams, Spacing, TemperatureProblem, REFERENCE_KN,
};
use knudsen_core::system::{build_kramers_system, build_temperature_system};
use knudsen_core::verification::{run_verification, VerifyLevel};
use knudsen_core::Result;
use rayon::prelude::*;

use crate::records::*;

pub const TABLE_CHIS: [f64; 7] = [0.1, 0.3, 0.5, 0.6, 0.7, 0.9, 1.0];
pub const TABLE_ORDERS: [usize; 6] = [3, 5, 7, 9, 11, 13];

pub struct GridRequest {
    pub ymin: Option<f64>,
    pub ymax: Option<f64>,
    pub samples: usize,
    pub spacing: Spacing,
}

impl GridRequest {
    fn build(&self, widest_layer: f64, kn: f64) -> Result<Vec<f64>> {
        let default_max = *default_grid(widest_layer, kn).last().expect("default grid is nonempty");
        let min = self.ymin.unwrap_or(match self.spacing {
            Spacing::Linear => 0.0,
            Spacing::Geometric => 1e-3,
        });
        sample_grid(min, self.ymax.unwrap_or(default_max), self.samples, self.spacing)
    }
}

pub fn temperature_jump(order: usize, chi: f64, kn: f64, pr: f64, flux: f64) -> Result<TemperatureJumpRecord> {
    let solution = TemperatureProblem::new(order)?.solve(&LayerParams {
        chi,
        kn,
        pr,
        flux,
        wall_value: 0.0,
    })?;
    Ok(TemperatureJumpRecord {
        command: "temperature-jump".into(),
        zeta: solution.jump_coefficient(),
        solution,
    })
}

pub fn kramers(order: usize, chi: f64, kn: f64, pr: f64, sigma12: f64) -> Result<KramersRecord> {
    let solution = KramersProblem::new(order, pr)?.solve(chi, kn, sigma12, 0.0)?;
    Ok(KramersRecord {
        command: "kramers".into(),
        slip: solution.viscous_slip_coefficient(),
        solution,
    })
}

/// One problem per order, built in parallel; results come back in order.
fn jump_grid(orders: &[usize], chis: &[f64], kn: f64, pr: f64) -> Result<Vec<Vec<f64>>> {
    orders
        .par_iter()
        .map(|&m| {
            let p = TemperatureProblem::new(m)?;
            chis.iter().map(|&chi| p.jump_coefficient(chi, kn, pr)).collect()
        })
        .collect()
}

pub fn table1() -> Result<Table1Record> {
    let by_order = jump_grid(&TABLE_ORDERS, &TABLE_CHIS, REFERENCE_KN, 1.0)?;
    let zeta = (0..TABLE_CHIS.len())
        .map(|c| by_order.iter().map(|col| col[c]).collect())
        .collect();
    Ok(Table1Record {
        command: "table1".into(),
        kn: REFERENCE_KN,
        pr: 1.0,
        chis: TABLE_CHIS.to_vec(),
        orders: TABLE_ORDERS.to_vec(),
        zeta,
    })
}

pub fn table2(k_max: u32, indexing: ConvergenceIndexing) -> Result<Table2Record> {
    let ks: Vec<u32> = (6..=k_max).collect();
    let mut orders: Vec<usize> = ks.iter().flat_map(|&k| indexing.orders(k)).collect();
    orders.sort_unstable();
    orders.dedup();
    let columns = jump_grid(&orders, &TABLE_CHIS, REFERENCE_KN, 1.0)?;
    let by_order: BTreeMap<usize, Vec<f64>> = orders.into_iter().zip(columns).collect();

    let mut estimates = Vec::new();
    for &k in &ks {
        let ms = indexing.orders(k);
        for (c, &chi) in TABLE_CHIS.iter().enumerate() {
            let zetas = ms.map(|m| by_order[&m][c]);
            estimates.push(ConvergenceEstimate {
                chi,
                k,
                orders: ms,
                zetas,
                beta: convergence_from_zetas(zetas)?,
            });
        }
    }
    Ok(Table2Record {
        command: "table2".into(),
        kn: REFERENCE_KN,
        indexing,
        chis: TABLE_CHIS.to_vec(),
        ks,
        estimates,
    })
}

pub fn sweep_chi(
    order: usize,
    chi_min: f64,
    chi_max: f64,
    samples: usize,
    spacing: Spacing,
    kn: f64,
    pr: f64,
) -> Result<SweepRecord> {
    let chi = sample_grid(chi_min, chi_max, samples, spacing)?;
    let problem = TemperatureProblem::new(order)?;
    let zeta: Vec<f64> = chi
        .par_iter()
        .map(|&c| problem.jump_coefficient(c, kn, pr))
        .collect::<Result<_>>()?;
    let scaled_zeta = chi.iter().zip(&zeta).map(|(c, z)| c / (2.0 - c) * z).collect();
    Ok(SweepRecord {
        command: "sweep-chi".into(),
        order,
        kn,
        pr,
        spacing,
        chi,
        zeta,
        scaled_zeta,
    })
}

pub fn temperature_profile(
    order: usize,
    chi: f64,
    kn: f64,
    pr: f64,
    flux: f64,
    grid: &GridRequest,
) -> Result<ProfileRecord> {
    let solution = temperature_jump(order, chi, kn, pr, flux)?.solution;
    let y = grid.build(widest(&solution.lambda), kn)?;
    let data = ProfileData::Temperature {
        zeta: solution.jump_coefficient(),
        theta_defect: y.iter().map(|&v| solution.temperature_defect(v)).collect(),
        theta_normalized: y.iter().map(|&v| solution.normalized_temperature(v)).collect(),
        conductivity_ratio: y.iter().map(|&v| solution.effective_conductivity(v).ok()).collect(),
        solution,
    };
    Ok(ProfileRecord {
        command: "profile".into(),
        spacing: grid.spacing,
        y,
        data,
    })
}

pub fn kramers_profile(
    order: usize,
    chi: f64,
    kn: f64,
    pr: f64,
    sigma12: f64,
    grid: &GridRequest,
) -> Result<ProfileRecord> {
    let solution = kramers(order, chi, kn, pr, sigma12)?.solution;
    let y = grid.build(widest(&solution.lambda_k), kn)?;
    let data = ProfileData::Kramers {
        slip: solution.viscous_slip_coefficient(),
        u1: solution.u1_profile(&y),
        solution,
    };
    Ok(ProfileRecord {
        command: "profile".into(),
        spacing: grid.spacing,
        y,
        data,
    })
}

pub fn verify(level: VerifyLevel) -> VerifyRecord {
    let report = run_verification(level);
    VerifyRecord {
        command: "verify".into(),
        passed: report.all_passed(),
        report,
    }
}

pub fn matrix(kramers: bool, order: usize, pr: f64) -> Result<MatrixRecord> {
    let system = if kramers {
        build_kramers_system(order, pr)?
    } else {
        build_temperature_system(order)?
    };
    let band = &system.m0;
    let mut entries = Vec::new();
    for j in 0..band.cols() {
        for i in j..(j + 3).min(band.rows()) {
            let v = band.get(i, j);
            if v != 0.0 {
                entries.push((i + 1, j + 1, v));
            }
        }
    }
    Ok(MatrixRecord {
        command: "matrix".into(),
        kind: if kramers { "kramers" } else { "temperature" }.into(),
        order,
        pr: system.prandtl,
        rows: band.rows(),
        cols: band.cols(),
        entries,
    })
}

fn widest(lambda: &[f64]) -> f64 {
    lambda.iter().copied().fold(0.0, f64::max)
}
