//! Scalar special functions: harmonic numbers, digamma, trigamma and the
//! log binomial probability mass function.

use crate::error::{Error, Result};

/// Euler–Mascheroni constant γ.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

const SHORT_SPAN: usize = 8;

/// Prefix table of harmonic numbers `H_0 = 0, H_1, ..., H_{n_max}`.
///
/// Built once in a single compensated pass so that every difference
/// `H_n − H_m` is accurate to a few ulp of `H_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicTable {
    values: Vec<f64>,
}

impl HarmonicTable {
    pub fn new(n_max: usize) -> Self {
        let mut values = Vec::with_capacity(n_max + 1);
        values.push(0.0);
        // Neumaier summation.
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for k in 1..=n_max {
            let term = 1.0 / k as f64;
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
            values.push(sum + comp);
        }
        HarmonicTable { values }
    }

    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    /// `H_i`. Panics if `i > n_max`.
    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// `H_n − H_m` for `m ≤ n ≤ n_max`. Short spans are summed directly,
    /// which keeps `H_n − H_{n−1}` exactly `1/n`.
    #[inline]
    pub fn diff(&self, n: usize, m: usize) -> f64 {
        if n - m <= SHORT_SPAN {
            return (m + 1..=n).rev().map(|k| 1.0 / k as f64).sum();
        }
        self.values[n] - self.values[m]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Harmonic prefix table up to `n_max` (`n_max = 0` yields just `H_0 = 0`).
pub fn harmonic_prefix(n_max: usize) -> HarmonicTable {
    HarmonicTable::new(n_max)
}

// Recurrence lifts the argument to at least this value before the
// asymptotic series is applied.
const ASYMPTOTIC_THRESHOLD: f64 = 10.0;

// B_{2k} / (2k), k = 1..7
const DIGAMMA_SERIES: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
];

// B_{2k}, k = 1..7
const TRIGAMMA_SERIES: [f64; 7] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
];

fn check_positive(x: f64, name: &str) -> Result<()> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::domain(format!("{name} requires x > 0, got {x}")));
    }
    Ok(())
}

/// Digamma function `ψ(x) = Γ′(x)/Γ(x)` for `x > 0`.
///
/// Upward recurrence `ψ(x) = ψ(x+1) − 1/x` until `x ≥ 10`, then
/// `ψ(x) ≈ ln x − 1/(2x) − Σ B_{2k} / (2k x^{2k})`.
pub fn digamma(x: f64) -> Result<f64> {
    check_positive(x, "digamma")?;
    let mut shift = 0.0;
    let mut x = x;
    while x < ASYMPTOTIC_THRESHOLD {
        shift += 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let mut series = 0.0;
    for &c in DIGAMMA_SERIES.iter().rev() {
        series = series * inv2 + c;
    }
    series *= inv2;
    Ok(x.ln() - 0.5 / x - series - shift)
}

/// Trigamma function `ψ′(x)` for `x > 0`.
///
/// Recurrence `ψ′(x) = ψ′(x+1) + 1/x²` until `x ≥ 10`, then
/// `ψ′(x) ≈ 1/x + 1/(2x²) + Σ B_{2k} / x^{2k+1}`.
pub fn trigamma(x: f64) -> Result<f64> {
    check_positive(x, "trigamma")?;
    let mut shift = 0.0;
    let mut x = x;
    while x < ASYMPTOTIC_THRESHOLD {
        shift += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    for &c in TRIGAMMA_SERIES.iter().rev() {
        series = series * inv2 + c;
    }
    series *= inv2 * inv;
    Ok(inv + 0.5 * inv2 + series + shift)
}

/// Stirling-formula error `ln n! − ln(√(2πn) (n/e)^n)` for integer `n ≥ 1`.
fn stirling_error(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    let nf = n as f64;
    if n <= 15 {
        let ln_fact: f64 = (2..=n).map(|k| (k as f64).ln()).sum();
        return ln_fact - (nf + 0.5) * nf.ln() + nf - LN_SQRT_2PI;
    }
    let nn = nf * nf;
    if n > 500 {
        return (S0 - S1 / nn) / nf;
    }
    if n > 80 {
        return (S0 - (S1 - S2 / nn) / nn) / nf;
    }
    if n > 35 {
        return (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / nf;
    }
    (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / nf
}

/// Deviance term `x ln(x/m) + m − x`, evaluated without cancellation when
/// `x ≈ m`.
fn binomial_deviance(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// `ln Pr[Bin(n_trials, p) = i]`.
///
/// Uses the saddle-point expansion (Loader, 2000), which keeps full relative
/// precision for `n_trials` in the millions where a difference of log-gamma
/// values would lose about nine digits. Degenerate `p ∈ {0, 1}` returns `0`
/// or `−∞`.
pub fn log_binomial_pmf(i: u64, n_trials: u64, p: f64) -> Result<f64> {
    if i > n_trials {
        return Err(Error::domain(format!(
            "binomial outcome {i} exceeds number of trials {n_trials}"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("binomial probability {p} outside [0, 1]")));
    }
    let q = 1.0 - p;
    if p == 0.0 {
        return Ok(if i == 0 { 0.0 } else { f64::NEG_INFINITY });
    }
    if p == 1.0 {
        return Ok(if i == n_trials { 0.0 } else { f64::NEG_INFINITY });
    }
    let n = n_trials as f64;
    if i == 0 {
        return Ok(n * (-p).ln_1p());
    }
    if i == n_trials {
        return Ok(n * p.ln());
    }
    let x = i as f64;
    let lc = stirling_error(n_trials)
        - stirling_error(i)
        - stirling_error(n_trials - i)
        - binomial_deviance(x, n * p)
        - binomial_deviance(n - x, n * q);
    let lf = 2.0 * LN_SQRT_2PI + x.ln() + (-x / n).ln_1p();
    Ok(lc - 0.5 * lf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn harmonic_examples() {
        let t = harmonic_prefix(10);
        assert_eq!(t.get(0), 0.0);
        assert_eq!(t.get(1), 1.0);
        assert!((t.get(5) - 2.283_333_333_333_333_3).abs() < 1e-15);
        assert!((t.get(10) - 2.928_968_253_968_254).abs() < 1e-15);
        assert_eq!(harmonic_prefix(0).values(), &[0.0]);
    }

    #[test]
    fn harmonic_increments() {
        let t = harmonic_prefix(100_000);
        for i in 1..=t.n_max() {
            let d = t.get(i) - t.get(i - 1);
            let ulp = f64::EPSILON * t.get(i);
            assert!((d - 1.0 / i as f64).abs() <= 2.0 * ulp, "i={i}");
            assert!(d > 0.0);
        }
    }

    #[test]
    fn digamma_examples() {
        assert!(close(digamma(1.0).unwrap(), -EULER_GAMMA, 1e-14));
        assert!(close(digamma(2.0).unwrap(), 1.0 - EULER_GAMMA, 1e-14));
        assert!(close(digamma(6.0).unwrap(), 1.706_117_668_431_800_5, 1e-14));
        // frozen from 40-digit arithmetic
        assert!(close(digamma(0.5).unwrap(), -1.963_510_026_021_423_5, 1e-13));
        assert!(close(digamma(7.3).unwrap(), 1.917_820_335_637_986_1, 1e-13));
        assert!(close(digamma(12.5).unwrap(), 2.485_195_651_274_912, 1e-13));
        assert!(close(digamma(1e-3).unwrap(), -1000.575_571_931_810_3, 1e-13));
        assert!(close(digamma(1e8).unwrap(), 18.420_680_738_952_365, 1e-14));
    }

    #[test]
    fn trigamma_examples() {
        let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
        assert!(close(trigamma(1.0).unwrap(), pi2_6, 1e-14));
        assert!(close(trigamma(2.0).unwrap(), pi2_6 - 1.0, 1e-14));
        let d = trigamma(5.0).unwrap() - trigamma(9.0).unwrap();
        assert!((d - 0.103_810_941_043_083_9).abs() < 1e-13);
        assert!(close(trigamma(0.5).unwrap(), 4.934_802_200_544_679, 1e-13));
        assert!(close(trigamma(7.3).unwrap(), 0.146_795_768_131_427_1, 1e-13));
        assert!(close(trigamma(12.5).unwrap(), 0.083_285_224_601_578_37, 1e-13));
        assert!(close(trigamma(1e-3).unwrap(), 1_000_001.642_533_195_9, 1e-13));
        assert!(close(trigamma(1e8).unwrap(), 1.000_000_005e-8, 1e-13));
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(digamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(digamma(-1.5), Err(Error::Domain(_))));
        assert!(matches!(trigamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(trigamma(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(log_binomial_pmf(8, 7, 0.5), Err(Error::Domain(_))));
        assert!(matches!(log_binomial_pmf(1, 7, 1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn recurrences() {
        let mut x = 1e-3;
        while x < 1e7 {
            let d0 = digamma(x).unwrap();
            let d1 = digamma(x + 1.0).unwrap();
            assert!(close(d1, d0 + 1.0 / x, 1e-12), "digamma x={x}");
            let t0 = trigamma(x).unwrap();
            let t1 = trigamma(x + 1.0).unwrap();
            assert!(close(t0, t1 + 1.0 / (x * x), 1e-12), "trigamma x={x}");
            x *= 1.37;
        }
    }

    #[test]
    fn trigamma_sandwich() {
        for n in 1..5000u32 {
            let n = n as f64;
            let t = trigamma(n).unwrap();
            let lo = 1.0 / n + 0.5 / (n * n);
            let hi = 1.0 / n + 1.0 / (n * n);
            let slack = 4.0 * f64::EPSILON * t;
            assert!(t >= lo - slack && t <= hi + slack, "n={n}");
        }
    }

    #[test]
    fn harmonic_digamma_identity() {
        let t = harmonic_prefix(100_000);
        for n in 1..=100_000usize {
            let h = digamma(n as f64 + 1.0).unwrap() + EULER_GAMMA;
            assert!((t.get(n) - h).abs() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn log_binomial_examples() {
        assert_eq!(log_binomial_pmf(0, 7, 0.0).unwrap(), 0.0);
        assert_eq!(log_binomial_pmf(3, 7, 0.0).unwrap(), f64::NEG_INFINITY);
        assert_eq!(log_binomial_pmf(7, 7, 1.0).unwrap(), 0.0);
        assert_eq!(log_binomial_pmf(6, 7, 1.0).unwrap(), f64::NEG_INFINITY);
        let exact = (35.0f64 / 128.0).ln();
        assert!((log_binomial_pmf(3, 7, 0.5).unwrap() - exact).abs() < 1e-14);
        assert!((log_binomial_pmf(3, 7, 0.5).unwrap() + 1.296_682_202_430_203_5).abs() < 1e-14);
        assert!((log_binomial_pmf(1, 1, 0.25).unwrap() - 0.25f64.ln()).abs() < 1e-15);
        // 40-digit reference
        let big = log_binomial_pmf(300_000, 1_000_000, 0.3).unwrap();
        assert!((big + 7.046_370_251_546_539).abs() < 1e-12, "{big}");
    }

    #[test]
    fn log_binomial_against_exact_products() {
        // small n: compare with the product form computed directly
        for n in 1..=40u64 {
            for &p in &[0.01, 0.2, 0.5, 0.77, 0.999] {
                let mut total = 0.0;
                for i in 0..=n {
                    let mut c = 1.0f64;
                    for k in 0..i {
                        c = c * (n - k) as f64 / (k + 1) as f64;
                    }
                    let direct = c.ln() + i as f64 * f64::ln(p) + (n - i) as f64 * f64::ln(1.0 - p);
                    let got = log_binomial_pmf(i, n, p).unwrap();
                    assert!((got - direct).abs() < 1e-11 * direct.abs().max(1.0), "n={n} i={i} p={p}");
                    total += got.exp();
                }
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }
}
