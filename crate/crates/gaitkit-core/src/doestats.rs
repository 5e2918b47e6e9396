//! Statistics for single-factor design-of-experiment tables: Shapiro-Wilk
//! normality testing and Pearson/Spearman correlation with the normality
//! result deciding which correlation applies.

use crate::error::{Error, Result};

use alloc::string::String;
use alloc::vec::Vec;

pub const ALPHA: f64 = 0.05;

/// One single-factor sweep: factor value vs stiffness and peak von Mises
/// stress responses.
#[derive(Debug, Clone, PartialEq)]
pub struct DoeTable {
    pub factor_name: String,
    /// `(factor value, stiffness Nm/degree, max VMS MPa)` rows.
    pub rows: Vec<(f64, f64, f64)>,
}

impl DoeTable {
    pub fn validate(&self) -> Result<()> {
        if self.rows.len() < 3 {
            return Err(Error::invalid("a factor table needs at least 3 rows"));
        }
        for (i, a) in self.rows.iter().enumerate() {
            for b in &self.rows[i + 1..] {
                if a.0 == b.0 {
                    return Err(Error::invalid("factor values must be distinct"));
                }
            }
        }
        Ok(())
    }

    pub fn factor_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.0).collect()
    }

    pub fn stiffness_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.1).collect()
    }

    pub fn vms_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.2).collect()
    }
}

/// Statistic, p-value, and the reject/accept decision at `ALPHA`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    /// True when p < `ALPHA`.
    pub significant: bool,
}

impl TestResult {
    fn new(statistic: f64, p_value: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        TestResult {
            statistic,
            p_value,
            significant: p_value < ALPHA,
        }
    }
}

// ---- special functions ------------------------------------------------

/// Lanczos log-gamma, g = 7, 9 coefficients.
fn ln_gamma(x: f64) -> f64 {
    const C: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection.
        let pi = core::f64::consts::PI;
        return libm::log(pi / libm::sin(pi * x)) - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    for (i, &c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * libm::log(2.0 * core::f64::consts::PI) + (x + 0.5) * libm::log(t) - t + libm::log(a)
}

/// Continued fraction for the regularized incomplete beta function.
fn betacf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_IT: usize = 300;
    const EPS: f64 = 1e-15;
    const FPMIN: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_IT {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta I_x(a, b).
fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)
        + a * libm::log(x)
        + b * libm::log(1.0 - x);
    let front = libm::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * betacf(a, b, x) / a
    } else {
        1.0 - front * betacf(b, a, 1.0 - x) / b
    }
}

/// Two-sided p-value of a t statistic with `df` degrees of freedom.
fn t_two_sided_p(t: f64, df: f64) -> f64 {
    reg_inc_beta(df / 2.0, 0.5, df / (df + t * t))
}

/// Standard normal upper-tail probability.
fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / core::f64::consts::SQRT_2)
}

/// Inverse standard normal CDF (Acklam's rational approximation, |err| < 1.2e-9).
fn inv_normal_cdf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_690e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = libm::sqrt(-2.0 * libm::log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -inv_normal_cdf(1.0 - p)
    }
}

fn poly(coeffs: &[f64], x: f64) -> f64 {
    // coeffs[0] + coeffs[1] x + coeffs[2] x^2 + ...
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

// ---- Shapiro-Wilk -----------------------------------------------------

/// Shapiro-Wilk W test per the AS R94 approximation (Royston 1995),
/// 3 <= n <= 5000.
pub fn shapiro_wilk(sample: &[f64]) -> Result<TestResult> {
    let n = sample.len();
    if !(3..=5000).contains(&n) {
        return Err(Error::invalid("shapiro-wilk needs 3 <= n <= 5000"));
    }
    let mut x: Vec<f64> = sample.to_vec();
    x.sort_by(|a, b| a.partial_cmp(b).expect("finite sample"));
    if x[0] == x[n - 1] {
        return Err(Error::Degenerate(String::from(
            "shapiro-wilk sample has zero variance",
        )));
    }

    // Expected normal order statistics and the weight vector.
    let nf = n as f64;
    let mut m: Vec<f64> = (1..=n)
        .map(|i| inv_normal_cdf((i as f64 - 0.375) / (nf + 0.25)))
        .collect();
    let ssm: f64 = m.iter().map(|v| v * v).sum();
    let rsn = 1.0 / libm::sqrt(nf);
    let norm = libm::sqrt(ssm);
    let mut a: Vec<f64> = m.iter().map(|v| v / norm).collect();

    const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056];
    const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
    if n > 5 {
        let an = a[n - 1] + poly(&C1, rsn);
        let an1 = a[n - 2] + poly(&C2, rsn);
        let phi = (ssm - 2.0 * m[n - 1] * m[n - 1] - 2.0 * m[n - 2] * m[n - 2])
            / (1.0 - 2.0 * an * an - 2.0 * an1 * an1);
        let sp = libm::sqrt(phi);
        for v in m.iter_mut() {
            *v /= sp;
        }
        a = m.clone();
        a[n - 1] = an;
        a[n - 2] = an1;
        a[0] = -an;
        a[1] = -an1;
    } else if n > 3 {
        let an = a[n - 1] + poly(&C1, rsn);
        let phi = (ssm - 2.0 * m[n - 1] * m[n - 1]) / (1.0 - 2.0 * an * an);
        let sp = libm::sqrt(phi);
        for v in m.iter_mut() {
            *v /= sp;
        }
        a = m.clone();
        a[n - 1] = an;
        a[0] = -an;
    } else {
        a[0] = -libm::sqrt(0.5);
        a[1] = 0.0;
        a[2] = libm::sqrt(0.5);
    }

    let mean = x.iter().sum::<f64>() / nf;
    let ssx: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    let num: f64 = a.iter().zip(&x).map(|(ai, xi)| ai * xi).sum();
    let w = (num * num / ssx).min(1.0);

    // P-value per the Royston normalizing transforms.
    let p = if n == 3 {
        let pi6 = 6.0 / core::f64::consts::PI;
        let stqr = libm::asin(libm::sqrt(0.75));
        (pi6 * (libm::asin(libm::sqrt(w)) - stqr)).clamp(0.0, 1.0)
    } else if n <= 11 {
        let g = -2.273 + 0.459 * nf;
        let mu = poly(&[0.5440, -0.39978, 0.025054, -0.0006714], nf);
        let sigma = libm::exp(poly(&[1.3822, -0.77857, 0.062767, -0.0020322], nf));
        let z = (-libm::log(g - libm::log(1.0 - w)) - mu) / sigma;
        normal_sf(z)
    } else {
        let ln_n = libm::log(nf);
        let mu = poly(&[-1.5861, -0.31082, -0.083751, 0.0038915], ln_n);
        let sigma = libm::exp(poly(&[-0.4803, -0.082676, 0.0030302], ln_n));
        let z = (libm::log(1.0 - w) - mu) / sigma;
        normal_sf(z)
    };
    Ok(TestResult::new(w, p))
}

// ---- correlations -----------------------------------------------------

fn check_paired(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::invalid("correlation inputs must have equal length"));
    }
    if x.len() < 3 {
        return Err(Error::invalid("correlation needs at least 3 pairs"));
    }
    Ok(())
}

fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        syy += (yi - my) * (yi - my);
        sxy += (xi - mx) * (yi - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate(String::from(
            "correlation input has zero variance",
        )));
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Pearson linear correlation with a two-sided t-distribution p-value
/// (n − 2 degrees of freedom).
pub fn pearson(x: &[f64], y: &[f64]) -> Result<TestResult> {
    check_paired(x, y)?;
    let r = pearson_r(x, y)?;
    let df = (x.len() - 2) as f64;
    let p = if r.abs() == 1.0 {
        0.0
    } else {
        let t = r * libm::sqrt(df / (1.0 - r * r));
        t_two_sided_p(t, df)
    };
    Ok(TestResult::new(r, p))
}

/// Average ranks, ties sharing the mean of their rank range.
fn ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite sample"));
    let mut out = alloc::vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with the t-approximation p-value.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<TestResult> {
    check_paired(x, y)?;
    let rx = ranks(x);
    let ry = ranks(y);
    let rho = pearson_r(&rx, &ry)?;
    let df = (x.len() - 2) as f64;
    let p = if rho.abs() == 1.0 {
        0.0
    } else {
        let t = rho * libm::sqrt(df / (1.0 - rho * rho));
        t_two_sided_p(t, df)
    };
    Ok(TestResult::new(rho, p))
}

// ---- report -----------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationBranch {
    Pearson,
    Spearman,
}

impl CorrelationBranch {
    pub fn name(&self) -> &'static str {
        match self {
            CorrelationBranch::Pearson => "pearson",
            CorrelationBranch::Spearman => "spearman",
        }
    }
}

/// One response column's analysis within a table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseReport {
    pub response: &'static str,
    pub shapiro: TestResult,
    pub branch: CorrelationBranch,
    pub correlation: TestResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableReport {
    pub factor_name: String,
    pub responses: Vec<ResponseReport>,
}

fn analyze_response(
    factor: &[f64],
    response: &[f64],
    name: &'static str,
) -> Result<ResponseReport> {
    let shapiro = shapiro_wilk(response)?;
    // Normality not rejected: the paper's flow runs the linear test;
    // otherwise fall back to ranks.
    let (branch, correlation) = if shapiro.p_value >= ALPHA {
        (CorrelationBranch::Pearson, pearson(factor, response)?)
    } else {
        (CorrelationBranch::Spearman, spearman(factor, response)?)
    };
    Ok(ResponseReport {
        response: name,
        shapiro,
        branch,
        correlation,
    })
}

/// Per table and per response: Shapiro-Wilk, then Pearson when normality is
/// not rejected at `ALPHA`, Spearman otherwise.
pub fn correlation_report(tables: &[DoeTable]) -> Result<Vec<TableReport>> {
    let mut out = Vec::with_capacity(tables.len());
    for table in tables {
        table.validate()?;
        let factor = table.factor_values();
        out.push(TableReport {
            factor_name: table.factor_name.clone(),
            responses: alloc::vec![
                analyze_response(&factor, &table.stiffness_values(), "stiffness_nm_per_deg")?,
                analyze_response(&factor, &table.vms_values(), "max_vms_mpa")?,
            ],
        });
    }
    Ok(out)
}

/// Synthetic demo sweep: stiffness roughly linear in the factor with mild
/// noise, VMS heavy-tailed.
pub fn demo_table(seed: u64) -> DoeTable {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for i in 0..10 {
        let factor = 1.0 + i as f64 * 0.5;
        let stiffness = 7.5 * factor / 4.0 + rng.random_range(-0.2..0.2);
        // Occasional stress spikes give the column a heavy tail.
        let spike = if i % 4 == 3 { rng.random_range(40.0..90.0) } else { 0.0 };
        let vms = 120.0 - 6.0 * factor + rng.random_range(-2.0..2.0) + spike;
        rows.push((factor, stiffness, vms));
    }
    DoeTable {
        factor_name: String::from("spring_thickness_mm"),
        rows,
    }
}
