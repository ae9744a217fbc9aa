//! Hermite machinery and the half-space integrals behind the wall conditions.
//!
//! Everything here is evaluated at unit temperature. The half-space integral
//!
//! ```text
//! S(a, b) = sqrt(2π/θ) ∫_{-∞}^0 ξ θ^{(a+b)/2} He_b(ξ) He_a(ξ) ω(ξ) dξ
//! ```
//!
//! does not depend on θ, and neither does the z-sequence `z_n = θ^{n/2} He_n(0)`.
//! Raw values grow like factorials, so downstream code consumes the
//! normalized form `S(a, b) / sqrt(a! b!)`, which stays O(sqrt(n)).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, KnudsenError, Result};

/// Largest index for which raw (unnormalized) `S` and `I` are exposed in f64.
pub const RAW_ORDER_LIMIT: usize = 150;

/// `sqrt(2π) / 2`, i.e. `I(0, 0)`.
pub const HALF_SQRT_2PI: f64 = 1.253_314_137_315_500_3;

/// Generalized Hermite polynomial `He_n^{[u,θ]}(ξ)` by the three-term recursion
/// `(ξ-u) He_{n+1} = (n+1) He_n + θ He_{n+2}`.
pub fn hermite_eval(order: usize, xi: f64, u: f64, theta: f64) -> Result<f64> {
    check_positive("theta", theta)?;
    let x = xi - u;
    let mut prev = 1.0;
    if order == 0 {
        return Ok(prev);
    }
    let mut cur = x / theta;
    for n in 0..order - 1 {
        let next = (x * cur - (n + 1) as f64 * prev) / theta;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// A member of the z-sequence, kept as sign plus log-magnitude.
///
/// `z_{2m} = (-1)^m (2m-1)!!` overflows f64 near `n = 300`, so the magnitude is
/// stored as a natural logarithm. Zero is its own variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ZValue {
    Zero,
    Signed { negative: bool, ln_magnitude: f64 },
}

impl ZValue {
    pub fn is_zero(&self) -> bool {
        matches!(self, ZValue::Zero)
    }

    pub fn sign(&self) -> f64 {
        match self {
            ZValue::Zero => 0.0,
            ZValue::Signed { negative: true, .. } => -1.0,
            ZValue::Signed { negative: false, .. } => 1.0,
        }
    }

    /// Value as f64; overflows to ±inf past roughly n = 300.
    pub fn to_f64(&self) -> f64 {
        match self {
            ZValue::Zero => 0.0,
            ZValue::Signed { ln_magnitude, .. } => self.sign() * ln_magnitude.exp(),
        }
    }
}

/// `z_n` from `z_0 = 1`, `z_1 = 0`, `z_{n+1} = -n z_{n-1}`.
pub fn z_value(n: usize) -> ZValue {
    if n % 2 == 1 {
        return ZValue::Zero;
    }
    let m = n / 2;
    let ln_magnitude = (1..=m).map(|j| ((2 * j - 1) as f64).ln()).sum();
    ZValue::Signed {
        negative: m % 2 == 1,
        ln_magnitude,
    }
}

/// `z_n / sqrt(n!)`. For even `n = 2m` the magnitude is `sqrt(C(2m, m) / 4^m) <= 1`.
pub fn z_normalized(n: usize) -> f64 {
    if n % 2 == 1 {
        return 0.0;
    }
    let mut z = 1.0;
    for j in 1..=n / 2 {
        z = -z * (((2 * j - 1) as f64) / ((2 * j) as f64)).sqrt();
    }
    z
}

fn check_raw(alpha: usize, beta: usize, limit: usize) -> Result<()> {
    if alpha > limit || beta > limit {
        Err(KnudsenError::IndexOutOfRange { alpha, beta, limit })
    } else {
        Ok(())
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Half-space product integral
/// `I(a, b) = sqrt(2π) ∫_{-∞}^0 θ^{(a+b)/2} He_a He_b ω dξ`.
///
/// Only exposed for `a, b <= 149` since `z_{b+1}` is needed.
pub fn half_space_i(alpha: usize, beta: usize) -> Result<f64> {
    check_raw(alpha, beta, RAW_ORDER_LIMIT - 1)?;
    if alpha == beta {
        return Ok(factorial(alpha) * HALF_SQRT_2PI);
    }
    let z = |n: usize| z_value(n).to_f64();
    let num = z(alpha + 1) * z(beta) - z(beta + 1) * z(alpha);
    Ok(num / (alpha as f64 - beta as f64))
}

/// Raw half-space integral `S(a, b)` for `a, b <= 150`.
pub fn half_space_s(alpha: usize, beta: usize) -> Result<f64> {
    check_raw(alpha, beta, RAW_ORDER_LIMIT)?;
    if beta == alpha + 1 {
        return Ok(HALF_SQRT_2PI * factorial(alpha + 1));
    }
    if alpha == beta + 1 {
        return Ok(HALF_SQRT_2PI * factorial(alpha));
    }
    let d = alpha as f64 - beta as f64;
    match (alpha % 2, beta % 2) {
        (0, 0) => {
            let z = z_value(alpha).to_f64() * z_value(beta).to_f64();
            Ok((alpha + beta + 1) as f64 / (d * d - 1.0) * z)
        }
        (1, 1) => {
            let z = z_value(alpha + 1).to_f64() * z_value(beta + 1).to_f64();
            Ok(2.0 * z / (d * d - 1.0))
        }
        _ => Ok(0.0),
    }
}

/// `S(a, b) / sqrt(a! b!)`, finite for any index size.
pub fn half_space_s_normalized(alpha: usize, beta: usize) -> f64 {
    normalized_from_z(alpha, beta, z_normalized)
}

/// Both-odd indices use `S(a, b) = 2 z_{a+1} z_{b+1} / ((a - b)^2 - 1)`.
fn normalized_from_z(alpha: usize, beta: usize, zhat: impl Fn(usize) -> f64) -> f64 {
    if beta == alpha + 1 {
        return HALF_SQRT_2PI * ((alpha + 1) as f64).sqrt();
    }
    if alpha == beta + 1 {
        return HALF_SQRT_2PI * (alpha as f64).sqrt();
    }
    let d = alpha as f64 - beta as f64;
    match (alpha % 2, beta % 2) {
        (0, 0) => (alpha + beta + 1) as f64 / (d * d - 1.0) * (zhat(alpha) * zhat(beta)),
        (1, 1) => {
            let lift = (((alpha + 1) * (beta + 1)) as f64).sqrt();
            2.0 * lift * (zhat(alpha + 1) * zhat(beta + 1)) / (d * d - 1.0)
        }
        _ => 0.0,
    }
}

/// Memoized normalized half-space integrals for `0 <= a, b <= max_order`.
///
/// Built once per solve and read-only afterwards.
#[derive(Debug, Clone)]
pub struct HalfSpaceTable {
    max_order: usize,
    normalized: Vec<f64>,
}

impl HalfSpaceTable {
    pub fn new(max_order: usize) -> Self {
        let n = max_order + 1;
        let z: Vec<f64> = {
            let mut z = vec![0.0; n + 1];
            z[0] = 1.0;
            let mut k = 2;
            while k <= n {
                z[k] = -z[k - 2] * (((k - 1) as f64) / (k as f64)).sqrt();
                k += 2;
            }
            z
        };
        let mut normalized = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..=a {
                let v = normalized_from_z(a, b, |k| z[k]);
                normalized[a * n + b] = v;
                normalized[b * n + a] = v;
            }
        }
        Self {
            max_order,
            normalized,
        }
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Normalized value `S(a, b) / sqrt(a! b!)`.
    ///
    /// Panics if either index exceeds `max_order`.
    pub fn s_normalized(&self, alpha: usize, beta: usize) -> f64 {
        let n = self.max_order + 1;
        assert!(alpha < n && beta < n, "index beyond table order");
        self.normalized[alpha * n + beta]
    }

    /// Raw `S(a, b)`, available for indices up to [`RAW_ORDER_LIMIT`].
    pub fn s(&self, alpha: usize, beta: usize) -> Result<f64> {
        check_raw(alpha, beta, self.max_order.min(RAW_ORDER_LIMIT))?;
        half_space_s(alpha, beta)
    }
}

/// Wall-Maxwellian moment integral `J_m(x)` by
/// `J_m = ((θ^W - θ) J_{m-2} + x J_{m-1}) / m`, `J_0 = 1`, `J_1 = x`.
///
/// `dtheta` is the dimensionless offset `θ̄^W - θ̄`; the dimensional
/// temperature difference is `theta0 * dtheta`.
pub fn wall_j(m: usize, x: f64, theta0: f64, dtheta: f64) -> Result<f64> {
    check_positive("theta0", theta0)?;
    let dt = theta0 * dtheta;
    let mut prev = 1.0;
    if m == 0 {
        return Ok(prev);
    }
    let mut cur = x;
    for k in 2..=m {
        let next = (dt * prev + x * cur) / k as f64;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Three-dimensional Hermite multi-index `(a1, a2, a3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub [usize; 3]);

impl MultiIndex {
    pub const ZERO: MultiIndex = MultiIndex([0, 0, 0]);

    /// `e_i` for `i` in 1..=3.
    pub fn unit(i: usize) -> Self {
        let mut a = [0; 3];
        a[i - 1] = 1;
        MultiIndex(a)
    }

    pub fn new(a1: usize, a2: usize, a3: usize) -> Self {
        MultiIndex([a1, a2, a3])
    }

    pub fn order(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&a| factorial(a)).product()
    }
}

/// Linearized wall-Maxwellian state, all quantities dimensionless perturbations.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WallMoments {
    pub theta_bar_wall: f64,
    pub theta_bar_gas: f64,
    pub u_bar_wall: [f64; 3],
    pub u_bar_gas: [f64; 3],
    pub rho_bar_wall: f64,
    pub rho_bar_gas: f64,
}

impl WallMoments {
    /// Fixes `rho_bar_wall` from the zero-flux condition
    /// `S(0,0)(ρ̄^W - ρ̄) = Σ_{β even >= 2} S(0,β)(f̄_{β e2} - m̄_{β e2})`.
    ///
    /// `gas_even[j]` holds `f̄_{(2j+2) e2}`.
    pub fn with_wall_density(mut self, gas_even: &[f64]) -> Self {
        let mut rhs = 0.0;
        for (j, &f) in gas_even.iter().enumerate() {
            let beta = 2 * j + 2;
            let m = linearized_wall_moment(MultiIndex::new(0, beta, 0), &self);
            rhs += half_space_s_normalized(0, beta) * factorial_sqrt(beta) * (f - m);
        }
        self.rho_bar_wall = self.rho_bar_gas + rhs / half_space_s_normalized(0, 0);
        self
    }
}

fn factorial_sqrt(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).sqrt()).product()
}

/// Linearized moment `m̄_α` of the wall Maxwellian.
///
/// Nonzero only for `α ∈ {0, e_i, 2e_i}`.
pub fn linearized_wall_moment(alpha: MultiIndex, wm: &WallMoments) -> f64 {
    let a = alpha.0;
    match alpha.order() {
        0 => wm.rho_bar_wall - wm.rho_bar_gas,
        1 => {
            let i = a.iter().position(|&x| x == 1).unwrap_or(0);
            wm.u_bar_wall[i] - wm.u_bar_gas[i]
        }
        2 if a.contains(&2) => 0.5 * (wm.theta_bar_wall - wm.theta_bar_gas),
        _ => 0.0,
    }
}

/// Maxwell accommodation factor `b(χ) = 2χ / ((2-χ) sqrt(2π))`.
pub fn accommodation_factor(chi: f64) -> f64 {
    2.0 * chi / ((2.0 - chi) * (2.0 * PI).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Explicit sum `He_n(x) = n! Σ_m (-1)^m x^{n-2m} / (m! (n-2m)! 2^m)`.
    fn hermite_explicit(n: usize, x: f64) -> f64 {
        (0..=n / 2)
            .map(|m| {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                sign * factorial(n) / (factorial(m) * factorial(n - 2 * m) * 2f64.powi(m as i32))
                    * x.powi((n - 2 * m) as i32)
            })
            .sum()
    }

    #[test]
    fn hermite_examples() {
        assert_eq!(hermite_eval(0, 3.7, 0.0, 1.0).unwrap(), 1.0);
        assert_eq!(hermite_eval(1, 2.0, 0.0, 1.0).unwrap(), 2.0);
        assert_eq!(hermite_eval(2, 0.0, 0.0, 1.0).unwrap(), -1.0);
        assert!(hermite_eval(2, 0.0, 0.0, 0.0).is_err());
        assert!(hermite_eval(2, 0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn hermite_matches_explicit_sum() {
        for n in 0..15 {
            for &x in &[-2.5, -0.3, 0.0, 1.1, 3.0] {
                let r = hermite_eval(n, x, 0.0, 1.0).unwrap();
                let e = hermite_explicit(n, x);
                assert_relative_eq!(r, e, epsilon = 1e-9, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn hermite_scaling_in_theta() {
        // He_n^{[u,θ]}(ξ) = θ^{-n/2} He_n((ξ-u)/sqrt θ)
        for n in 0..10 {
            let theta: f64 = 2.3;
            let (xi, u) = (1.4, 0.2);
            let lhs = hermite_eval(n, xi, u, theta).unwrap();
            let rhs = theta.powf(-(n as f64) / 2.0) * hermite_explicit(n, (xi - u) / theta.sqrt());
            assert_relative_eq!(lhs, rhs, epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    #[test]
    fn z_examples() {
        assert_eq!(z_value(0).to_f64(), 1.0);
        assert!(z_value(3).is_zero());
        assert_relative_eq!(z_value(4).to_f64(), 3.0, max_relative = 1e-15);
        assert_relative_eq!(z_value(2).to_f64(), -1.0, max_relative = 1e-15);
    }

    #[test]
    fn z_matches_hermite_at_origin() {
        for n in 0..25 {
            let he = hermite_eval(n, 0.0, 0.0, 1.0).unwrap();
            let z = z_value(n).to_f64();
            assert_relative_eq!(z, he, epsilon = 1e-12, max_relative = 1e-13);
            // θ-independence of θ^{n/2} He_n^{[0,θ]}(0)
            let theta: f64 = 0.7;
            let scaled = theta.powf(n as f64 / 2.0) * hermite_eval(n, 0.0, 0.0, theta).unwrap();
            assert_relative_eq!(scaled, he, epsilon = 1e-12, max_relative = 1e-12);
            assert_relative_eq!(z_normalized(n), z / factorial(n).sqrt(), epsilon = 1e-15, max_relative = 1e-13);
        }
    }

    #[test]
    fn z_large_order_stays_finite() {
        let z = z_value(4096);
        if let ZValue::Signed { ln_magnitude, negative } = z {
            assert!(ln_magnitude.is_finite());
            assert!(!negative); // m = 2048 even
        } else {
            panic!("z_4096 must be nonzero");
        }
        assert!(z_normalized(4096).abs() < 1.0);
    }

    #[test]
    fn i_examples() {
        assert_relative_eq!(half_space_i(0, 0).unwrap(), (2.0 * PI).sqrt() / 2.0, max_relative = 1e-15);
        assert_relative_eq!(half_space_i(0, 1).unwrap(), -1.0, max_relative = 1e-15);
        assert_eq!(half_space_i(2, 0).unwrap(), half_space_i(0, 2).unwrap());
    }

    #[test]
    fn s_examples() {
        assert_relative_eq!(half_space_s(0, 0).unwrap(), -1.0, max_relative = 1e-15);
        assert_relative_eq!(half_space_s(0, 1).unwrap(), HALF_SQRT_2PI, max_relative = 1e-15);
        assert_relative_eq!(half_space_s(2, 0).unwrap(), -1.0, max_relative = 1e-15);
        assert_eq!(half_space_s(4, 1).unwrap(), 0.0);
        assert_relative_eq!(half_space_s(1, 1).unwrap(), -2.0, max_relative = 1e-15);
        assert_relative_eq!(half_space_s(3, 1).unwrap(), -2.0, max_relative = 1e-15);
        assert!(half_space_s(151, 0).is_err());
    }

    #[test]
    fn s_consistent_with_i() {
        for a in 0..=30 {
            assert_relative_eq!(
                half_space_s(a, 0).unwrap(),
                half_space_i(a, 1).unwrap(),
                epsilon = 1e-300,
                max_relative = 1e-12
            );
            for b in 1..=30 {
                let s = half_space_s(a, b).unwrap();
                let via_i = b as f64 * half_space_i(a, b - 1).unwrap() + half_space_i(a, b + 1).unwrap();
                if s == 0.0 {
                    assert_eq!(via_i, 0.0, "({a},{b})");
                } else {
                    assert_relative_eq!(s, via_i, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn s_zero_pattern_and_symmetry() {
        for a in 0..=60 {
            for b in 0..=60 {
                let s = half_space_s(a, b).unwrap();
                assert_eq!(s, half_space_s(b, a).unwrap());
                if a % 2 == 0 && b % 2 == 1 && a.abs_diff(b) != 1 {
                    assert_eq!(s, 0.0);
                }
            }
        }
    }

    #[test]
    fn normalized_matches_direct_evaluation() {
        for a in 0..=30 {
            for b in 0..=30 {
                let direct = half_space_s(a, b).unwrap() / (factorial(a) * factorial(b)).sqrt();
                assert_relative_eq!(
                    half_space_s_normalized(a, b),
                    direct,
                    epsilon = 1e-300,
                    max_relative = 1e-13
                );
            }
        }
        assert_relative_eq!(half_space_s_normalized(0, 0), -1.0);
        assert_relative_eq!(half_space_s_normalized(0, 1), HALF_SQRT_2PI);
        let direct = half_space_s(20, 22).unwrap() / (factorial(20) * factorial(22)).sqrt();
        assert_relative_eq!(half_space_s_normalized(20, 22), direct, max_relative = 1e-13);
    }

    #[test]
    fn normalized_finite_to_4096() {
        for &a in &[0, 1, 2, 1000, 4095, 4096] {
            for &b in &[0, 2, 3, 4094, 4096] {
                assert!(half_space_s_normalized(a, b).is_finite());
            }
        }
    }

    #[test]
    fn table_agrees_with_free_functions() {
        let t = HalfSpaceTable::new(40);
        for a in 0..=40 {
            for b in 0..=40 {
                assert_relative_eq!(
                    t.s_normalized(a, b),
                    half_space_s_normalized(a, b),
                    epsilon = 1e-300,
                    max_relative = 1e-14
                );
                assert_eq!(t.s_normalized(a, b), t.s_normalized(b, a));
            }
        }
        assert_eq!(t.s(0, 0).unwrap(), -1.0);
        assert!(t.s(41, 0).is_err());
    }

    #[test]
    fn wall_j_examples() {
        assert_eq!(wall_j(0, 0.7, 1.0, 0.3).unwrap(), 1.0);
        assert_eq!(wall_j(1, 0.3, 1.0, 0.0).unwrap(), 0.3);
        assert_relative_eq!(wall_j(2, 0.2, 1.0, 0.1).unwrap(), 0.07, max_relative = 1e-14);
        assert!(wall_j(2, 0.2, 0.0, 0.1).is_err());
    }

    #[test]
    fn wall_j_small_parameter_order() {
        // J_m(ε) with θ^W - θ = ε is O(ε^ceil(m/2))
        for m in 0..=8usize {
            let p = m.div_ceil(2) as i32;
            for &eps in &[1e-2, 1e-3, 1e-4] {
                let j = wall_j(m, eps, 1.0, eps).unwrap();
                assert!(j.abs() <= 2.0 * eps.powi(p), "m={m} eps={eps} J={j}");
            }
        }
    }

    #[test]
    fn wall_moment_examples() {
        let wm = WallMoments {
            theta_bar_wall: 0.1,
            ..Default::default()
        };
        assert_relative_eq!(linearized_wall_moment(MultiIndex::new(0, 2, 0), &wm), 0.05);
        assert_eq!(linearized_wall_moment(MultiIndex::new(1, 2, 0), &wm), 0.0);
        let wm = WallMoments {
            u_bar_wall: [0.2, 0.0, 0.0],
            u_bar_gas: [0.05, 0.0, 0.0],
            ..Default::default()
        };
        assert_relative_eq!(linearized_wall_moment(MultiIndex::unit(1), &wm), 0.15);
        assert_eq!(linearized_wall_moment(MultiIndex::new(1, 1, 0), &wm), 0.0);
    }

    #[test]
    fn wall_density_from_zero_flux() {
        // Only the β = 2 term: S(0,2) = -1, m̄_{2e2} = (θ̄^W - θ̄)/2
        let wm = WallMoments {
            theta_bar_wall: 0.2,
            theta_bar_gas: 0.0,
            rho_bar_gas: 0.01,
            ..Default::default()
        }
        .with_wall_density(&[0.03]);
        // -(ρ̄^W - ρ̄) = -(0.03 - 0.1)
        assert_relative_eq!(wm.rho_bar_wall - wm.rho_bar_gas, 0.03 - 0.1, max_relative = 1e-14);
        assert_relative_eq!(
            linearized_wall_moment(MultiIndex::ZERO, &wm),
            wm.rho_bar_wall - wm.rho_bar_gas
        );
    }

    #[test]
    fn accommodation_factor_values() {
        assert_relative_eq!(accommodation_factor(1.0), 2.0 / (2.0 * PI).sqrt());
        assert_eq!(accommodation_factor(0.0), 0.0);
    }
}
