//! Row types emitted by the command-line tool and their CSV layouts.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::debtrank::RiskProfile;
use crate::exposure::{BankId, LayerId};
use crate::io::{Cell, Tabular};
use crate::loss::{ExposureMarginal, LossMethod, LossReport};
use crate::stats::{CdfPoint, LayerPairStats, NullBand, PowerLawFit};

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

impl Tabular for [LossReport] {
    fn csv_header(&self) -> Vec<String> {
        header(&[
            "date",
            "bank_count",
            "total_value",
            "method",
            "el_syst",
            "el_approx",
            "el_exact",
            "approx_error",
            "el_credit",
        ])
    }

    fn csv_rows(&self) -> Vec<Vec<Cell>> {
        self.iter()
            .map(|r| {
                vec![
                    r.date.into(),
                    r.bank_count.into(),
                    r.total_value.into(),
                    match r.method {
                        LossMethod::Exact => "exact",
                        LossMethod::Approx => "approx",
                    }
                    .into(),
                    r.el_syst.into(),
                    r.el_approx.into(),
                    r.el_exact.into(),
                    r.approx_error.into(),
                    r.el_credit_total.into(),
                ]
            })
            .collect()
    }
}

/// One row per bank and date; per-layer raw and normalized columns.
impl Tabular for [RiskProfile] {
    fn csv_header(&self) -> Vec<String> {
        let mut h = header(&["date", "rank", "bank", "r_comb"]);
        if let Some(p) = self.first() {
            for l in &p.layers {
                h.push(format!("r_{l}"));
                h.push(format!("r_hat_{l}"));
            }
        }
        h.push("layer_sum".into());
        h.push("margin".into());
        h
    }

    fn csv_rows(&self) -> Vec<Vec<Cell>> {
        let Some(first) = self.first() else {
            return Vec::new();
        };
        let mut rows = Vec::new();
        for p in self {
            for e in &p.entries {
                let mut row: Vec<Cell> = vec![
                    p.date.into(),
                    e.rank.into(),
                    e.bank.as_str().into(),
                    e.r_combined.into(),
                ];
                for l in &first.layers {
                    let c = e.layers.get(l);
                    row.push(c.map(|c| c.raw).into());
                    row.push(c.map(|c| c.normalized).into());
                }
                row.push(e.layer_sum.into());
                row.push(e.margin.into());
                rows.push(row);
            }
        }
        rows
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DebtRankRow {
    pub date: NaiveDate,
    /// A layer label, or `comb` for the combined network.
    pub scope: String,
    /// Distressed banks, `;`-separated.
    pub seeds: String,
    pub debtrank: f64,
    pub debtrank_excluding_initial: f64,
}

impl Tabular for [DebtRankRow] {
    fn csv_header(&self) -> Vec<String> {
        header(&[
            "date",
            "scope",
            "seeds",
            "debtrank",
            "debtrank_excluding_initial",
        ])
    }

    fn csv_rows(&self) -> Vec<Vec<Cell>> {
        self.iter()
            .map(|r| {
                vec![
                    r.date.into(),
                    r.scope.as_str().into(),
                    r.seeds.as_str().into(),
                    r.debtrank.into(),
                    r.debtrank_excluding_initial.into(),
                ]
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AverageRow {
    pub date: NaiveDate,
    pub scope: String,
    pub average_debtrank: f64,
}

impl Tabular for [AverageRow] {
    fn csv_header(&self) -> Vec<String> {
        header(&["date", "scope", "average_debtrank"])
    }

    fn csv_rows(&self) -> Vec<Vec<Cell>> {
        self.iter()
            .map(|r| {
                vec![
                    r.date.into(),
                    r.scope.as_str().into(),
                    r.average_debtrank.into(),
                ]
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalRow {
    pub date: NaiveDate,
    #[serde(flatten)]
    pub marginal: ExposureMarginal,
}

impl Tabular for [MarginalRow] {
    fn csv_header(&self) -> Vec<String> {
        header(&[
            "date",
            "layer",
            "debtor",
            "creditor",
            "amount",
            "d_el_syst",
            "d_el_credit",
            "d_el_syst_clamped",
        ])
    }

    fn csv_rows(&self) -> Vec<Vec<Cell>> {
        self.iter()
            .map(|r| {
                let m = &r.marginal;
                vec![
                    r.date.into(),
                    m.layer.as_str().into(),
                    m.debtor.as_str().into(),
                    m.creditor.as_str().into(),
                    m.amount.into(),
                    m.d_el_syst.into(),
                    m.d_el_credit.into(),
                    m.d_el_syst_clamped.into(),
                ]
            })
            .collect()
    }
}

/// Significance of a layer-pair statistic against the null model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Significance {
    pub p025: f64,
    pub p975: f64,
    pub significant: bool,
}

impl From<&NullBand> for Significance {
    fn from(b: &NullBand) -> Self {
        Significance {
            p025: b.p025,
            p975: b.p975,
            significant: b.significant,
        }
    }
}

fn stars(s: &Option<Significance>) -> Cell {
    match s {
        Some(s) if s.significant => "*".into(),
        _ => Cell::Empty,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairStatsRow {
    pub date: NaiveDate,
    pub density_a: f64,
    pub density_b: f64,
    #[serde(flatten)]
    pub stats: LayerPairStats,
    pub jaccard_significance: Option<Significance>,
    pub rho_exposure_significance: Option<Significance>,
    pub rho_liability_significance: Option<Significance>,
}

impl Tabular for [PairStatsRow] {
    fn csv_header(&self) -> Vec<String> {
        header(&[
            "date",
            "layer_a",
            "layer_b",
            "density_a",
            "density_b",
            "jaccard",
            "jaccard_sig",
            "rho_exposure",
            "rho_exposure_sig",
            "rho_liability",
            "rho_liability_sig",
            "rho_debtrank",
            "degree_all",
            "degree_in",
            "degree_out",
            "weight_all",
            "weight_in",
            "weight_out",
        ])
    }

    fn csv_rows(&self) -> Vec<Vec<Cell>> {
        self.iter()
            .map(|r| {
                let s = &r.stats;
                vec![
                    r.date.into(),
                    s.layer_a.as_str().into(),
                    s.layer_b.as_str().into(),
                    r.density_a.into(),
                    r.density_b.into(),
                    s.jaccard.into(),
                    stars(&r.jaccard_significance),
                    s.rho_exposure.into(),
                    stars(&r.rho_exposure_significance),
                    s.rho_liability.into(),
                    stars(&r.rho_liability_significance),
                    s.rho_debtrank.into(),
                    s.degree.all.into(),
                    s.degree.inbound.into(),
                    s.degree.outbound.into(),
                    s.weight.all.into(),
                    s.weight.inbound.into(),
                    s.weight.outbound.into(),
                ]
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandRow {
    pub date: NaiveDate,
    pub layer_a: LayerId,
    pub layer_b: LayerId,
    pub statistic: String,
    #[serde(flatten)]
    pub band: NullBand,
}

impl Tabular for [BandRow] {
    fn csv_header(&self) -> Vec<String> {
        header(&[
            "date",
            "layer_a",
            "layer_b",
            "statistic",
            "observed",
            "mean",
            "std_dev",
            "p025",
            "p975",
            "replicates",
            "significant",
        ])
    }

    fn csv_rows(&self) -> Vec<Vec<Cell>> {
        self.iter()
            .map(|r| {
                let b = &r.band;
                vec![
                    r.date.into(),
                    r.layer_a.as_str().into(),
                    r.layer_b.as_str().into(),
                    r.statistic.as_str().into(),
                    b.observed.into(),
                    b.mean.into(),
                    b.std_dev.into(),
                    b.p025.into(),
                    b.p975.into(),
                    b.replicates.into(),
                    b.significant.into(),
                ]
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub date: Option<NaiveDate>,
    /// Layer label, or the sample file name.
    pub source: String,
    #[serde(flatten)]
    pub fit: PowerLawFit,
}

impl Tabular for [FitRow] {
    fn csv_header(&self) -> Vec<String> {
        header(&[
            "date",
            "source",
            "n",
            "n_tail",
            "xmin",
            "alpha",
            "ks_statistic",
            "p_value",
        ])
    }

    fn csv_rows(&self) -> Vec<Vec<Cell>> {
        self.iter()
            .map(|r| {
                let f = &r.fit;
                vec![
                    r.date.map_or(Cell::Empty, Cell::from),
                    r.source.as_str().into(),
                    f.n.into(),
                    f.n_tail.into(),
                    f.xmin.into(),
                    f.alpha.into(),
                    f.ks_statistic.into(),
                    f.p_value.into(),
                ]
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdfRow {
    pub date: Option<NaiveDate>,
    pub source: String,
    #[serde(flatten)]
    pub point: CdfPoint,
}

impl Tabular for [CdfRow] {
    fn csv_header(&self) -> Vec<String> {
        header(&["date", "source", "value", "cdf", "ccdf"])
    }

    fn csv_rows(&self) -> Vec<Vec<Cell>> {
        self.iter()
            .map(|r| {
                vec![
                    r.date.map_or(Cell::Empty, Cell::from),
                    r.source.as_str().into(),
                    r.point.value.into(),
                    r.point.cdf.into(),
                    r.point.ccdf.into(),
                ]
            })
            .collect()
    }
}

pub fn seed_label(seeds: &[BankId]) -> String {
    seeds
        .iter()
        .map(BankId::as_str)
        .collect::<Vec<_>>()
        .join(";")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::debtrank::sr_profile;
    use crate::exposure::{bank_records, LiabilityMatrix, MultiLayerSnapshot};
    use crate::io::{render_report, ReportFormat};
    use crate::loss::{loss_report, DefaultProbabilities, LossGivenDefault};
    use std::collections::BTreeMap;

    fn snap() -> MultiLayerSnapshot {
        let dl = LiabilityMatrix::new().with("A", "B", 50.0).unwrap();
        let fx = LiabilityMatrix::new().with("B", "A", 20.0).unwrap();
        MultiLayerSnapshot::new(
            "2013-01-02".parse().unwrap(),
            BTreeMap::from([("dl".into(), dl), ("fx".into(), fx)]),
            bank_records([("A", 100.0), ("B", 100.0)]),
        )
        .unwrap()
    }

    #[test]
    fn loss_report_json_round_trips() {
        let s = snap();
        let p = DefaultProbabilities::broadcast(s.banks().keys(), 0.1).unwrap();
        let r = loss_report(&s, &p, &LossGivenDefault::default(), 20).unwrap();
        let text = render_report(std::slice::from_ref(&r), ReportFormat::Json).unwrap();
        let back: Vec<LossReport> = serde_json::from_str(&text).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].date, r.date);
        assert_eq!(back[0].method, r.method);
        assert!((back[0].el_syst - r.el_syst).abs() <= 1e-9 * r.el_syst.abs());
        assert!(text.contains("\"el_syst\""));
    }

    #[test]
    fn profile_csv_has_layer_columns() {
        let p = sr_profile(&snap()).unwrap();
        let text = render_report(std::slice::from_ref(&p), ReportFormat::Csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "date,rank,bank,r_comb,r_dl,r_hat_dl,r_fx,r_hat_fx,layer_sum,margin"
        );
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn empty_profile_is_header_only() {
        let empty: Vec<RiskProfile> = Vec::new();
        let text = render_report(&empty[..], ReportFormat::Csv).unwrap();
        assert_eq!(text, "date,rank,bank,r_comb,layer_sum,margin\n");
    }
}
