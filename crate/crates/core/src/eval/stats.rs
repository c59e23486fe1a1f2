use super::EvalError;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

/// Two-sided 95% normal quantile used for every interval in the reports.
pub const Z95: f64 = 1.959964;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilsonInterval {
    /// Observed proportion k/n.
    pub point: f64,
    pub low: f64,
    pub high: f64,
    /// Midpoint of the score interval before clamping.
    pub center: f64,
    pub n: u64,
    pub k: u64,
    pub z: f64,
}

/// Wilson score interval for k successes out of n.
pub fn wilson_ci(k: u64, n: u64, z: f64) -> Result<WilsonInterval, EvalError> {
    if n == 0 {
        return Err(EvalError::Domain("Wilson interval needs n > 0".into()));
    }
    if k > n {
        return Err(EvalError::Domain(format!("k = {k} exceeds n = {n}")));
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    Ok(WilsonInterval {
        point: p,
        low: (center - half).clamp(0.0, 1.0),
        high: (center + half).clamp(0.0, 1.0),
        center,
        n,
        k,
        z,
    })
}

/// Exact two-sided McNemar p-value from the discordant counts: twice the
/// lower binomial tail at 1/2, capped at 1.
pub fn mcnemar_exact(row_only: u64, col_only: u64) -> f64 {
    let n = row_only + col_only;
    if n == 0 {
        return 1.0;
    }
    let b = Binomial::new(0.5, n).expect("valid binomial");
    (2.0 * b.cdf(row_only.min(col_only))).min(1.0)
}

/// Holm step-down adjustment, returned in input order.
pub fn holm_adjust(p_values: &[f64]) -> Vec<f64> {
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]).then(a.cmp(&b)));
    let mut out = vec![0.0; m];
    let mut running: f64 = 0.0;
    for (rank, &i) in order.iter().enumerate() {
        let adj = (p_values[i] * (m - rank) as f64).min(1.0);
        running = running.max(adj);
        out[i] = running;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McNemarResult {
    pub row_model: String,
    pub col_model: String,
    pub row_only: u64,
    pub col_only: u64,
    pub p_raw: f64,
    /// `None` when the pair has no discordant items and was not tested.
    pub p_holm: Option<f64>,
    /// Sign of `row_only - col_only`.
    pub direction: i8,
}

impl McNemarResult {
    pub fn swapped(&self) -> Self {
        McNemarResult {
            row_model: self.col_model.clone(),
            col_model: self.row_model.clone(),
            row_only: self.col_only,
            col_only: self.row_only,
            p_raw: self.p_raw,
            p_holm: self.p_holm,
            direction: -self.direction,
        }
    }

    pub fn tested(&self) -> bool {
        self.row_only + self.col_only > 0
    }

    /// Adjusted p with the sign of the direction, four decimals; `--` when
    /// untested.
    pub fn signed_text(&self) -> String {
        match self.p_holm {
            None => "--".to_string(),
            Some(p) if self.direction < 0 => format!("-{p:.4}"),
            Some(p) => format!("{p:.4}"),
        }
    }
}

/// Tests every pair of discordance counts and Holm-adjusts across the pairs
/// that have at least one discordant item.
pub fn mcnemar_family(pairs: &[(String, String, u64, u64)]) -> Vec<McNemarResult> {
    let mut results: Vec<McNemarResult> = pairs
        .iter()
        .map(|(r, c, a, b)| McNemarResult {
            row_model: r.clone(),
            col_model: c.clone(),
            row_only: *a,
            col_only: *b,
            p_raw: mcnemar_exact(*a, *b),
            p_holm: None,
            direction: (*a as i64 - *b as i64).signum() as i8,
        })
        .collect();
    let tested: Vec<usize> = (0..results.len()).filter(|&i| results[i].tested()).collect();
    let raw: Vec<f64> = tested.iter().map(|&i| results[i].p_raw).collect();
    for (&i, p) in tested.iter().zip(holm_adjust(&raw)) {
        results[i].p_holm = Some(p);
    }
    results
}
