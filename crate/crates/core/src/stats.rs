//! Binomial proportion estimates.

use serde::{Deserialize, Serialize};

/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
}

impl Proportion {
    pub fn new(successes: u64, trials: u64) -> Self {
        debug_assert!(successes <= trials);
        Self { successes, trials }
    }

    pub fn estimate(&self) -> Option<f64> {
        (self.trials > 0).then(|| self.successes as f64 / self.trials as f64)
    }

    /// Wilson score interval at normal quantile `z`.
    pub fn wilson(&self, z: f64) -> Option<(f64, f64)> {
        if self.trials == 0 {
            return None;
        }
        let n = self.trials as f64;
        let p = self.successes as f64 / n;
        let z2 = z * z;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Some(((center - half).max(0.0), (center + half).min(1.0)))
    }

    pub fn wilson95(&self) -> Option<(f64, f64)> {
        self.wilson(Z95)
    }
}

/// Normal quantile for a two-sided interval at confidence `1 - alpha`.
///
/// Acklam's rational approximation; relative error below 1.2e-9.
pub fn normal_quantile_two_sided(alpha: f64) -> f64 {
    inverse_normal_cdf(1.0 - alpha / 2.0)
}

fn inverse_normal_cdf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
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
    let lo = 0.02425;
    if p < lo {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - lo {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -inverse_normal_cdf(1.0 - p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_estimate() {
        let p = Proportion::new(30, 100);
        let (lo, hi) = p.wilson95().unwrap();
        assert!(lo < 0.3 && 0.3 < hi);
        // statsmodels wilson: 0.218949, 0.395849
        assert!((lo - 0.218_949).abs() < 1e-6, "{lo}");
        assert!((hi - 0.395_849).abs() < 1e-6, "{hi}");
    }

    #[test]
    fn wilson_zero_trials() {
        assert!(Proportion::new(0, 0).wilson95().is_none());
    }

    #[test]
    fn quantile_matches_table() {
        assert!((normal_quantile_two_sided(0.05) - Z95).abs() < 1e-8);
        assert!((normal_quantile_two_sided(0.01) - 2.575_829_303_549).abs() < 1e-8);
    }
}
