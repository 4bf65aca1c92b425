//! Seeded synthetic multiplex generator.

use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal, Pareto};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exposure::{
    BankId, BankRecord, BankRecords, LayerId, LiabilityMatrix, MultiLayerSnapshot,
};

type EdgeList = Vec<((usize, usize), f64)>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum SizeLaw {
    LogNormal {
        mu: f64,
        sigma: f64,
    },
    /// Density `∝ x^-alpha` above `xmin`.
    Pareto {
        alpha: f64,
        xmin: f64,
    },
}

impl SizeLaw {
    fn check(&self) -> Result<()> {
        let ok = match *self {
            SizeLaw::LogNormal { mu, sigma } => mu.is_finite() && sigma.is_finite() && sigma >= 0.0,
            SizeLaw::Pareto { alpha, xmin } => {
                alpha > 1.0 && alpha.is_finite() && xmin > 0.0 && xmin.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InfeasibleConfig(format!(
                "bad exposure size law {self:?}"
            )))
        }
    }

    fn sampler(&self) -> Box<dyn Fn(&mut ChaCha8Rng) -> f64> {
        match *self {
            SizeLaw::LogNormal { mu, sigma } => {
                let d = LogNormal::new(mu, sigma).expect("checked");
                Box::new(move |rng| d.sample(rng))
            }
            SizeLaw::Pareto { alpha, xmin } => {
                let d = Pareto::new(xmin, alpha - 1.0).expect("checked");
                Box::new(move |rng| d.sample(rng))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub bank_count: usize,
    /// Target density per layer.
    pub densities: BTreeMap<LayerId, f64>,
    pub size_law: SizeLaw,
    pub capital_median: f64,
    pub capital_sigma: f64,
    /// 0 draws each layer's edges independently, 1 gives every layer the
    /// same ranking of candidate pairs.
    pub participation_correlation: f64,
    pub seed: u64,
    /// Number of consecutive daily snapshots.
    pub days: usize,
    pub start: NaiveDate,
    /// Day-to-day log-volatility of exposure amounts.
    pub daily_volatility: f64,
    /// Broadcast default probability for the generated bundle.
    pub default_probability: Option<f64>,
}

pub fn default_densities() -> BTreeMap<LayerId, f64> {
    BTreeMap::from([
        (LayerId::new(LayerId::DEPOSITS_LOANS), 0.076),
        (LayerId::new(LayerId::FOREIGN_EXCHANGE), 0.08),
        (LayerId::new(LayerId::SECURITIES), 0.07),
        (LayerId::new(LayerId::DERIVATIVES), 0.098),
    ])
}

impl GeneratorConfig {
    /// 30 banks, four layers, lognormal exposure sizes, one day.
    pub fn standard(seed: u64) -> Self {
        GeneratorConfig {
            bank_count: 30,
            densities: default_densities(),
            size_law: SizeLaw::LogNormal {
                mu: 10f64.ln(),
                sigma: 1.0,
            },
            capital_median: 150.0,
            capital_sigma: 0.8,
            participation_correlation: 0.5,
            seed,
            days: 1,
            start: NaiveDate::from_ymd_opt(2013, 1, 2).expect("valid date"),
            daily_volatility: 0.05,
            default_probability: Some(0.01),
        }
    }

    pub fn with_bank_count(mut self, b: usize) -> Self {
        self.bank_count = b;
        self
    }

    pub fn with_days(mut self, days: usize) -> Self {
        self.days = days;
        self
    }

    /// Target edge count per layer.
    pub fn edge_targets(&self) -> Result<BTreeMap<LayerId, usize>> {
        let b = self.bank_count;
        if b < 2 {
            return Err(Error::InfeasibleConfig(format!(
                "need at least 2 banks, got {b}"
            )));
        }
        let pairs = b * (b - 1);
        self.densities
            .iter()
            .map(|(l, &d)| {
                if !(d > 0.0 && d <= 1.0) {
                    return Err(Error::InfeasibleConfig(format!(
                        "density {d} for layer {l} is outside (0, 1]"
                    )));
                }
                let k = (d * pairs as f64).round() as usize;
                if k == 0 {
                    return Err(Error::InfeasibleConfig(format!(
                        "density {d} for layer {l} gives no edges with {b} banks"
                    )));
                }
                Ok((l.clone(), k))
            })
            .collect()
    }

    fn check(&self) -> Result<()> {
        self.edge_targets()?;
        self.size_law.check()?;
        let bad = |what: &str| Err(Error::InfeasibleConfig(what.to_string()));
        if self.densities.is_empty() {
            return bad("no layers");
        }
        if !(0.0..=1.0).contains(&self.participation_correlation) {
            return bad("participation correlation outside [0, 1]");
        }
        if !(self.capital_median > 0.0 && self.capital_median.is_finite()) {
            return bad("capital median must be positive");
        }
        if !(self.capital_sigma >= 0.0 && self.capital_sigma.is_finite()) {
            return bad("capital sigma must be non-negative");
        }
        if !(self.daily_volatility >= 0.0 && self.daily_volatility.is_finite()) {
            return bad("daily volatility must be non-negative");
        }
        if self.days == 0 {
            return bad("days must be at least 1");
        }
        if let Some(p) = self.default_probability {
            if !(0.0..=1.0).contains(&p) {
                return bad("default probability outside [0, 1]");
            }
        }
        Ok(())
    }
}

pub fn bank_name(k: usize) -> BankId {
    BankId::new(format!("B{:02}", k + 1))
}

/// Generates `cfg.days` consecutive daily snapshots. The edge sets and
/// capitals are fixed; amounts drift with a daily lognormal factor.
pub fn generate_multiplex(cfg: &GeneratorConfig) -> Result<Vec<MultiLayerSnapshot>> {
    cfg.check()?;
    let targets = cfg.edge_targets()?;
    let b = cfg.bank_count;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let pairs: Vec<(usize, usize)> = (0..b)
        .flat_map(|d| (0..b).filter(move |&c| c != d).map(move |c| (d, c)))
        .collect();
    let shared: Vec<f64> = pairs.iter().map(|_| rng.random()).collect();
    let rho = cfg.participation_correlation;
    let size = cfg.size_law.sampler();

    let mut base: BTreeMap<LayerId, EdgeList> = BTreeMap::new();
    for (layer, &k) in &targets {
        let mut scored: Vec<(f64, usize)> = shared
            .iter()
            .enumerate()
            .map(|(n, u)| (rho * u + (1.0 - rho) * rng.random::<f64>(), n))
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        scored.truncate(k);
        scored.sort_by_key(|s| s.1);
        let edges = scored
            .into_iter()
            .map(|(_, n)| (pairs[n], size(&mut rng)))
            .collect();
        base.insert(layer.clone(), edges);
    }

    let capital = LogNormal::new(cfg.capital_median.ln(), cfg.capital_sigma).expect("checked");
    let leverage = LogNormal::new(10f64.ln(), 0.25).expect("valid");
    let banks: BankRecords = (0..b)
        .map(|k| {
            let c = capital.sample(&mut rng);
            let id = bank_name(k);
            (
                id.clone(),
                BankRecord::new(id, c).with_external_assets(c * leverage.sample(&mut rng)),
            )
        })
        .collect();

    let drift = Normal::new(0.0, cfg.daily_volatility).expect("checked");
    let mut out = Vec::with_capacity(cfg.days);
    for day in 0..cfg.days {
        let date = cfg
            .start
            .checked_add_days(Days::new(day as u64))
            .ok_or_else(|| Error::InfeasibleConfig("date overflow".into()))?;
        let layers = base
            .iter()
            .map(|(l, edges)| {
                let m =
                    LiabilityMatrix::from_entries_unchecked(edges.iter().map(|&((d, c), a)| {
                        let a = if day == 0 {
                            a
                        } else {
                            a * drift.sample(&mut rng).exp()
                        };
                        ((bank_name(d), bank_name(c)), a)
                    }));
                (l.clone(), m)
            })
            .collect();
        out.push(MultiLayerSnapshot::new(date, layers, banks.clone())?);
    }
    Ok(out)
}
