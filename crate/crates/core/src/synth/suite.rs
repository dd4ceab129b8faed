//! Seeded scenario families for training and evaluation suites.

use rand::Rng;
use rand_distr::{Distribution, LogNormal};

use crate::synth::{Baseline, CrowdWaves, PumpMode, PumpScenario, PumpShape, PumpSpec};
use crate::trade::Millis;

/// 2018-01-01T00:00:00Z.
pub const SUITE_EPOCH: Millis = 1_514_764_800_000;

/// Layout shared by every scenario of a suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub span_hours: u32,
    /// Signal times are drawn on `:00` / `:30` in this range of hours after
    /// the scenario start.
    pub injection_hours: (u32, u32),
    /// Log-normal sigma of the per-scenario pump volume factor.
    pub volume_sigma: f64,
    pub volume_factor_range: (f64, f64),
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            span_hours: 18,
            injection_hours: (13, 15),
            volume_sigma: 0.5,
            volume_factor_range: (0.3, 3.0),
        }
    }
}

impl SuiteConfig {
    fn rng(&self, seed: u64, index: u64) -> rand_chacha::ChaCha8Rng {
        let mut r = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed ^ 0x0005_eed5_u64.wrapping_mul(index + 1));
        r.set_stream(2);
        r
    }

    fn baseline<R: Rng>(&self, rng: &mut R) -> Baseline {
        Baseline {
            orders_per_minute: rng.random_range(2.0..8.0),
            price: 10f64.powf(rng.random_range(-5.0..-3.0)),
            ..Baseline::default()
        }
    }

    fn start<R: Rng>(&self, rng: &mut R) -> Millis {
        SUITE_EPOCH + rng.random_range(0..700) * 86_400_000
    }

    fn injection<R: Rng>(&self, rng: &mut R, start: Millis) -> Millis {
        let (lo, hi) = self.injection_hours;
        let half_hours = rng.random_range(lo as i64 * 2..hi as i64 * 2);
        start + half_hours * 1_800_000
    }

    /// Standard pump scenario number `index` of the suite seeded `seed`.
    pub fn standard(&self, seed: u64, index: u64) -> PumpScenario {
        let mut rng = self.rng(seed, index);
        let baseline = self.baseline(&mut rng);
        let start = self.start(&mut rng);
        let injection_time = self.injection(&mut rng, start);
        let factor = LogNormal::new(0.0, self.volume_sigma)
            .expect("valid sigma")
            .sample(&mut rng)
            .clamp(self.volume_factor_range.0, self.volume_factor_range.1);
        let mut shape = PumpShape::default().scaled(factor);
        shape.price_ramp = 1.0 + rng.random_range(0.15..0.6);
        PumpScenario {
            pair: format!("SYN{index:03}BTC"),
            exchange: "synthetic".into(),
            start,
            duration_secs: self.span_hours as u64 * 3600,
            baseline,
            pump: Some(PumpSpec {
                injection_time,
                shape,
                mode: PumpMode::Standard,
            }),
        }
    }

    /// Multi-wave crowd pump: buying spread over waves minutes apart.
    pub fn crowd(&self, seed: u64, index: u64) -> PumpScenario {
        let mut s = self.standard(seed, index);
        s.pair = format!("CRD{index:03}BTC");
        if let Some(p) = s.pump.as_mut() {
            p.mode = PumpMode::Crowd(CrowdWaves::default());
        }
        s
    }

    /// Background market only, `days` long.
    pub fn quiet(&self, seed: u64, index: u64, days: u32) -> PumpScenario {
        let mut rng = self.rng(seed, index);
        let baseline = self.baseline(&mut rng);
        let start = self.start(&mut rng);
        PumpScenario {
            pair: format!("QUI{index:03}BTC"),
            exchange: "synthetic".into(),
            start,
            duration_secs: days as u64 * 86_400,
            baseline,
            pump: None,
        }
    }
}
