//! Columnar text: `#` header lines, then whitespace-separated records.
//! Values use the shortest representation that round-trips, except the
//! table commands which print five significant digits.

use std::fmt::Write;

use crate::records::*;

fn sig5(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = 4 - x.abs().log10().floor() as i32;
    format!("{:.*}", digits.max(0) as usize, x)
}

/// Plain notation where it stays short, exponent notation otherwise.
fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) || !a.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn row(out: &mut String, values: &[f64]) {
    let cols: Vec<String> = values.iter().map(|&v| num(v)).collect();
    out.push_str(&cols.join(" "));
    out.push('\n');
}

fn modes(out: &mut String, lambda: &[f64], amplitudes: &[(&str, &[f64])]) {
    let names: Vec<&str> = amplitudes.iter().map(|(n, _)| *n).collect();
    let _ = writeln!(out, "# mode lambda {}", names.join(" "));
    for i in 0..lambda.len() {
        let mut line = format!("{} {}", i + 1, lambda[i]);
        for (_, a) in amplitudes {
            let _ = write!(line, " {}", a[i]);
        }
        out.push_str(&line);
        out.push('\n');
    }
}

pub fn temperature_jump(r: &TemperatureJumpRecord) -> String {
    let s = &r.solution;
    let mut out = String::new();
    let _ = writeln!(out, "# temperature-jump");
    let _ = writeln!(
        out,
        "# order={} chi={} kn={} pr={} flux={} theta_wall={}",
        s.order, s.chi, s.kn, s.pr, s.q2, s.theta_wall
    );
    let _ = writeln!(out, "# zeta={} c0={} theta0={}", r.zeta, s.c0, s.theta0);
    modes(&mut out, &s.lambda, &[("r_tilde", &s.r_tilde), ("c_tilde", &s.c_tilde)]);
    out
}

pub fn kramers(r: &KramersRecord) -> String {
    let s = &r.solution;
    let mut out = String::new();
    let _ = writeln!(out, "# kramers");
    let _ = writeln!(
        out,
        "# order={} chi={} kn={} pr={} sigma12={} u1_wall={}",
        s.order, s.chi, s.kn, s.pr, s.sigma12, s.u1_wall
    );
    let _ = writeln!(out, "# slip={} c0={} u1_0={}", r.slip, s.c0k, s.u1_0);
    modes(&mut out, &s.lambda_k, &[("amplitude", &s.amplitudes)]);
    out
}

pub fn table1(r: &Table1Record) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# table1: jump coefficient zeta");
    let _ = writeln!(out, "# kn={} pr={} flux=1 theta_wall=0", r.kn, r.pr);
    let header: Vec<String> = r.orders.iter().map(|m| format!("M={m}")).collect();
    let _ = writeln!(out, "# chi {}", header.join(" "));
    for (chi, zs) in r.chis.iter().zip(&r.zeta) {
        let cells: Vec<String> = zs.iter().map(|&z| sig5(z)).collect();
        let _ = writeln!(out, "{chi} {}", cells.join(" "));
    }
    out
}

pub fn table2(r: &Table2Record) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# table2: convergence order beta_k of zeta");
    let _ = writeln!(out, "# kn={} pr=1 indexing={:?}", r.kn, r.indexing);
    for &k in &r.ks {
        if let Some(e) = r.estimates.iter().find(|e| e.k == k) {
            let _ = writeln!(out, "# k={k} orders={:?}", e.orders);
        }
    }
    let header: Vec<String> = r.ks.iter().map(|k| format!("k={k}")).collect();
    let _ = writeln!(out, "# chi {}", header.join(" "));
    for &chi in &r.chis {
        let cells: Vec<String> = r
            .ks
            .iter()
            .filter_map(|&k| r.estimates.iter().find(|e| e.k == k && e.chi == chi))
            .map(|e| format!("{:.3}", e.beta))
            .collect();
        let _ = writeln!(out, "{chi} {}", cells.join(" "));
    }
    out
}

pub fn sweep_chi(r: &SweepRecord) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# sweep-chi");
    let _ = writeln!(out, "# order={} kn={} pr={} flux=1 theta_wall=0 spacing={:?}", r.order, r.kn, r.pr, r.spacing);
    let _ = writeln!(out, "# chi zeta scaled_zeta");
    for i in 0..r.chi.len() {
        row(&mut out, &[r.chi[i], r.zeta[i], r.scaled_zeta[i]]);
    }
    out
}

pub fn profile(r: &ProfileRecord) -> String {
    let mut out = String::new();
    match &r.data {
        ProfileData::Temperature {
            zeta,
            solution: s,
            theta_defect,
            theta_normalized,
            conductivity_ratio,
        } => {
            let _ = writeln!(out, "# profile kind=temperature");
            let _ = writeln!(
                out,
                "# order={} chi={} kn={} pr={} flux={} theta_wall={} spacing={:?} samples={}",
                s.order,
                s.chi,
                s.kn,
                s.pr,
                s.q2,
                s.theta_wall,
                r.spacing,
                r.y.len()
            );
            let _ = writeln!(out, "# zeta={zeta}");
            let _ = writeln!(out, "# y theta_defect theta_normalized conductivity_ratio");
            for i in 0..r.y.len() {
                let k = conductivity_ratio[i].unwrap_or(f64::NAN);
                row(&mut out, &[r.y[i], theta_defect[i], theta_normalized[i], k]);
            }
        }
        ProfileData::Kramers { slip, solution: s, u1 } => {
            let _ = writeln!(out, "# profile kind=kramers");
            let _ = writeln!(
                out,
                "# order={} chi={} kn={} pr={} sigma12={} u1_wall={} spacing={:?} samples={}",
                s.order,
                s.chi,
                s.kn,
                s.pr,
                s.sigma12,
                s.u1_wall,
                r.spacing,
                r.y.len()
            );
            let _ = writeln!(out, "# slip={slip}");
            let _ = writeln!(out, "# y u1");
            for (y, u) in r.y.iter().zip(u1) {
                row(&mut out, &[*y, *u]);
            }
        }
    }
    out
}

pub fn verify(r: &VerifyRecord) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# verify level={:?} seconds={:.2}", r.report.level, r.report.seconds);
    let _ = writeln!(out, "# status name max_residual tolerance detail");
    for c in &r.report.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "{status} {} {:e} {:e} {}", c.name, c.max_residual, c.tolerance, c.detail);
    }
    let _ = writeln!(out, "# {}", if r.passed { "all checks passed" } else { "some checks failed" });
    out
}

pub fn matrix(r: &MatrixRecord) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# matrix kind={} order={} pr={:?} rows={} cols={}", r.kind, r.order, r.pr, r.rows, r.cols);
    let _ = writeln!(out, "# i j value");
    for (i, j, v) in &r.entries {
        let _ = writeln!(out, "{i} {j} {v}");
    }
    out
}
