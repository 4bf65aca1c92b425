//! Expected systemic loss, credit expected loss and the marginal effect of
//! single exposures on both.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::debtrank::{CascadeWorkspace, Network};
use crate::error::{Error, Result};
use crate::exposure::{BankId, BankRecords, LayerId, LiabilityMatrix, MultiLayerSnapshot};

pub const DEFAULT_EXACT_CAP: usize = 20;
pub const DEFAULT_LGD: f64 = 0.6;
pub const DEFAULT_RECOVERY_RATE: f64 = 0.4;

/// Leading banks whose in/out assignment fixes one parallel work unit of the
/// power-set enumeration.
const SPLIT_DEPTH: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Direct,
    FromSpread,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefaultProbabilities {
    pub values: BTreeMap<BankId, f64>,
    pub provenance: Provenance,
}

impl DefaultProbabilities {
    pub fn new(values: BTreeMap<BankId, f64>, provenance: Provenance) -> Result<Self> {
        for p in values.values() {
            check_unit("default probability", *p)?;
        }
        Ok(DefaultProbabilities { values, provenance })
    }

    /// Same probability for every bank.
    pub fn broadcast<'a, I>(banks: I, p: f64) -> Result<Self>
    where
        I: IntoIterator<Item = &'a BankId>,
    {
        Self::new(
            banks.into_iter().map(|b| (b.clone(), p)).collect(),
            Provenance::Direct,
        )
    }

    /// Takes `default_probability` from each record.
    pub fn from_records(banks: &BankRecords) -> Result<Self> {
        let values = banks
            .iter()
            .map(|(id, r)| {
                r.default_probability
                    .map(|p| (id.clone(), p))
                    .ok_or_else(|| Error::MissingProbability(id.clone()))
            })
            .collect::<Result<_>>()?;
        Self::new(values, Provenance::Direct)
    }

    pub fn get(&self, b: &BankId) -> Result<f64> {
        self.values
            .get(b)
            .copied()
            .ok_or_else(|| Error::MissingProbability(b.clone()))
    }

    /// Probabilities aligned with the network's bank order.
    pub fn aligned(&self, net: &Network) -> Result<Vec<f64>> {
        net.index().ids().iter().map(|b| self.get(b)).collect()
    }
}

/// Loss given default: a default with optional per-bank overrides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossGivenDefault {
    pub default: f64,
    pub per_bank: BTreeMap<BankId, f64>,
}

impl Default for LossGivenDefault {
    fn default() -> Self {
        Self::uniform(DEFAULT_LGD)
    }
}

impl LossGivenDefault {
    pub fn uniform(lgd: f64) -> Self {
        LossGivenDefault {
            default: lgd,
            per_bank: BTreeMap::new(),
        }
    }

    /// Uses each record's `lgd` where present.
    pub fn from_records(banks: &BankRecords, default: f64) -> Self {
        LossGivenDefault {
            default,
            per_bank: banks
                .iter()
                .filter_map(|(id, r)| r.lgd.map(|l| (id.clone(), l)))
                .collect(),
        }
    }

    pub fn get(&self, b: &BankId) -> f64 {
        self.per_bank.get(b).copied().unwrap_or(self.default)
    }

    fn check(&self) -> Result<()> {
        check_unit("lgd", self.default)?;
        self.per_bank
            .values()
            .try_for_each(|l| check_unit("lgd", *l))
    }
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            lo: 0.0,
            hi: 1.0,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossMethod {
    Exact,
    Approx,
}

/// Sum over every default set `S` of `P(S) * R_S`, times `V`.
///
/// Subsets are enumerated depth-first with running probability products, so
/// no division by survival probabilities is needed and zero-probability
/// branches are skipped whole. The first few banks split the work across
/// threads; partial sums are added in a fixed order.
pub fn expected_systemic_loss_exact(
    net: &Network,
    p: &DefaultProbabilities,
    exact_cap: usize,
) -> Result<f64> {
    let b = net.bank_count();
    if b > exact_cap {
        return Err(Error::OverExactCap {
            banks: b,
            cap: exact_cap,
        });
    }
    let probs = p.aligned(net)?;
    let v = net.total_value();
    if v <= 0.0 {
        return Ok(0.0);
    }
    let split = b.min(SPLIT_DEPTH);
    let partials = (0u64..1 << split)
        .into_par_iter()
        .map_init(CascadeWorkspace::default, |ws, prefix| {
            let mut weight = 1.0;
            let mut seeds = Vec::with_capacity(b);
            for (k, &pk) in probs.iter().enumerate().take(split) {
                if prefix >> k & 1 == 1 {
                    weight *= pk;
                    seeds.push(k);
                } else {
                    weight *= 1.0 - pk;
                }
            }
            let mut acc = 0.0;
            if weight > 0.0 {
                enumerate(net, &probs, split, weight, &mut seeds, ws, &mut acc)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<f64>>>()?;
    let el = v * partials.iter().sum::<f64>();
    if el > v * (1.0 + 1e-9) {
        return Err(Error::Internal(format!(
            "exact expected systemic loss {el} exceeds total value {v}"
        )));
    }
    Ok(el)
}

fn enumerate(
    net: &Network,
    probs: &[f64],
    k: usize,
    weight: f64,
    seeds: &mut Vec<usize>,
    ws: &mut CascadeWorkspace,
    acc: &mut f64,
) -> Result<()> {
    if k == probs.len() {
        if !seeds.is_empty() {
            *acc += weight * net.debtrank_of(seeds, 1.0, ws)?;
        }
        return Ok(());
    }
    let out = weight * (1.0 - probs[k]);
    if out > 0.0 {
        enumerate(net, probs, k + 1, out, seeds, ws, acc)?;
    }
    let inn = weight * probs[k];
    if inn > 0.0 {
        seeds.push(k);
        enumerate(net, probs, k + 1, inn, seeds, ws, acc)?;
        seeds.pop();
    }
    Ok(())
}

/// Total probability of all default sets among the banks other than
/// `excluded`: `sum over J of prod_{j in J} p_j prod_{k not in J} (1 - p_k)`.
/// Enumerates every subset, so it is limited to `exact_cap` banks.
pub fn subset_probability_mass(probs: &[f64], excluded: usize, exact_cap: usize) -> Result<f64> {
    if excluded >= probs.len() {
        return Err(Error::LengthMismatch(excluded, probs.len()));
    }
    if probs.len() > exact_cap {
        return Err(Error::OverExactCap {
            banks: probs.len(),
            cap: exact_cap,
        });
    }
    for p in probs {
        check_unit("default probability", *p)?;
    }
    let others: Vec<f64> = probs
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != excluded)
        .map(|(_, p)| *p)
        .collect();
    let mut total = 0.0;
    for mask in 0u64..1 << others.len() {
        total += others
            .iter()
            .enumerate()
            .map(|(k, p)| if mask >> k & 1 == 1 { *p } else { 1.0 - p })
            .product::<f64>();
    }
    Ok(total)
}

/// `V * sum_i p_i R_i`, with `R_i` including the seed's own value.
pub fn expected_systemic_loss_approx(net: &Network, p: &DefaultProbabilities) -> Result<f64> {
    let probs = p.aligned(net)?;
    if net.total_value() <= 0.0 {
        return Ok(0.0);
    }
    let r = net.single_seed_debtranks(1.0)?;
    Ok(approx_from_parts(net.total_value(), &probs, &r))
}

fn approx_from_parts(v: f64, probs: &[f64], r: &[f64]) -> f64 {
    v * probs.iter().zip(r).map(|(p, r)| p * r).sum::<f64>()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxErrorReport {
    pub exact: f64,
    pub approx: f64,
    /// `(approx - exact) / exact`
    pub relative_error: f64,
    /// False flags an instance where the approximation undershoots.
    pub approx_at_least_exact: bool,
}

pub fn approx_error_report(
    net: &Network,
    p: &DefaultProbabilities,
    exact_cap: usize,
) -> Result<ApproxErrorReport> {
    let exact = expected_systemic_loss_exact(net, p, exact_cap)?;
    let approx = expected_systemic_loss_approx(net, p)?;
    let relative_error = if exact > 0.0 {
        (approx - exact) / exact
    } else if approx > 0.0 {
        return Err(Error::ZeroExactLoss { approx });
    } else {
        0.0
    };
    Ok(ApproxErrorReport {
        exact,
        approx,
        relative_error,
        approx_at_least_exact: approx >= exact * (1.0 - 1e-12),
    })
}

/// Expected credit loss of each creditor: `EL_i = sum_j p_j LGD_j L_ji`.
/// Every bank in `banks` gets an entry.
pub fn credit_expected_loss(
    m: &LiabilityMatrix,
    banks: &BankRecords,
    p: &DefaultProbabilities,
    lgd: &LossGivenDefault,
) -> Result<BTreeMap<BankId, f64>> {
    lgd.check()?;
    let mut out: BTreeMap<BankId, f64> = banks.keys().map(|b| (b.clone(), 0.0)).collect();
    for (debtor, creditor, amount) in m.iter() {
        let el = p.get(debtor)? * lgd.get(debtor) * amount;
        *out.get_mut(creditor)
            .ok_or_else(|| Error::UnknownBank(creditor.clone()))? += el;
    }
    Ok(out)
}

/// One bilateral exposure to add to (or find in) a layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExposureDelta {
    pub layer: LayerId,
    pub debtor: BankId,
    pub creditor: BankId,
    pub amount: f64,
}

impl ExposureDelta {
    pub fn new(layer: impl Into<LayerId>, debtor: &str, creditor: &str, amount: f64) -> Self {
        ExposureDelta {
            layer: layer.into(),
            debtor: debtor.into(),
            creditor: creditor.into(),
            amount,
        }
    }

    fn check(&self, banks: &BankRecords) -> Result<()> {
        let reason = if self.debtor == self.creditor {
            Some("self-entry")
        } else if !(self.amount.is_finite() && self.amount > 0.0) {
            Some("non-positive amount")
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(Error::InvalidExposure {
                debtor: self.debtor.clone(),
                creditor: self.creditor.clone(),
                reason,
            });
        }
        for b in [&self.debtor, &self.creditor] {
            if !banks.contains_key(b) {
                return Err(Error::UnknownBank(b.clone()));
            }
        }
        Ok(())
    }
}

/// Increase in total credit expected loss from adding `x`; equals
/// `p_debtor * LGD_debtor * amount`.
pub fn marginal_credit(
    banks: &BankRecords,
    p: &DefaultProbabilities,
    lgd: &LossGivenDefault,
    x: &ExposureDelta,
) -> Result<f64> {
    x.check(banks)?;
    lgd.check()?;
    Ok(p.get(&x.debtor)? * lgd.get(&x.debtor) * x.amount)
}

/// How `EL_syst` is evaluated inside a marginal computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarginalMethod {
    Approx,
    Exact { cap: usize },
}

fn el_syst(net: &Network, p: &DefaultProbabilities, method: MarginalMethod) -> Result<f64> {
    match method {
        MarginalMethod::Approx => expected_systemic_loss_approx(net, p),
        MarginalMethod::Exact { cap } => expected_systemic_loss_exact(net, p, cap),
    }
}

fn with_exposure(s: &MultiLayerSnapshot, x: &ExposureDelta) -> Result<MultiLayerSnapshot> {
    let mut layer = s.layers().get(&x.layer).cloned().unwrap_or_default();
    layer.add(x.debtor.clone(), x.creditor.clone(), x.amount)?;
    Ok(s.with_layer_replaced(&x.layer, layer))
}

/// `EL_syst(L + X) - EL_syst(L)` on the combined network. Negative values
/// mean the exposure lowers systemic loss.
pub fn marginal_systemic(
    s: &MultiLayerSnapshot,
    p: &DefaultProbabilities,
    x: &ExposureDelta,
    method: MarginalMethod,
) -> Result<f64> {
    x.check(s.banks())?;
    let before = el_syst(&Network::combined(s)?, p, method)?;
    let after = el_syst(&Network::combined(&with_exposure(s, x)?)?, p, method)?;
    Ok(after - before)
}

/// `max(marginal_systemic, marginal_credit)`.
pub fn marginal_systemic_clamped(
    s: &MultiLayerSnapshot,
    p: &DefaultProbabilities,
    lgd: &LossGivenDefault,
    x: &ExposureDelta,
    method: MarginalMethod,
) -> Result<f64> {
    let syst = marginal_systemic(s, p, x, method)?;
    let credit = marginal_credit(s.banks(), p, lgd, x)?;
    Ok(syst.max(credit))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExposureMarginal {
    pub layer: LayerId,
    pub debtor: BankId,
    pub creditor: BankId,
    pub amount: f64,
    pub d_el_syst: f64,
    pub d_el_credit: f64,
    pub d_el_syst_clamped: f64,
}

/// Marginal contribution of every existing exposure of the snapshot:
/// `EL(L) - EL(L without the exposure)` for systemic loss, next to its
/// credit-risk counterpart.
pub fn exposure_marginals(
    s: &MultiLayerSnapshot,
    p: &DefaultProbabilities,
    lgd: &LossGivenDefault,
    method: MarginalMethod,
) -> Result<Vec<ExposureMarginal>> {
    let full = el_syst(&Network::combined(s)?, p, method)?;
    let exposures: Vec<ExposureDelta> = s
        .layers()
        .iter()
        .flat_map(|(l, m)| {
            m.iter().map(move |(d, c, a)| ExposureDelta {
                layer: l.clone(),
                debtor: d.clone(),
                creditor: c.clone(),
                amount: a,
            })
        })
        .collect();
    exposures
        .into_par_iter()
        .map(|x| {
            let mut layer = s.layer(&x.layer)?.clone();
            layer.remove(&x.debtor, &x.creditor);
            let without = s.with_layer_replaced(&x.layer, layer);
            let d_el_syst = full - el_syst(&Network::combined(&without)?, p, method)?;
            let d_el_credit = marginal_credit(s.banks(), p, lgd, &x)?;
            Ok(ExposureMarginal {
                d_el_syst_clamped: d_el_syst.max(d_el_credit),
                layer: x.layer,
                debtor: x.debtor,
                creditor: x.creditor,
                amount: x.amount,
                d_el_syst,
                d_el_credit,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpreadConvention {
    /// `p = 1 - exp(-s T / (1 - RR))`
    #[default]
    ConstantHazard,
    /// `p = min(1, s T / (1 - RR))`
    Linear,
}

/// Default probability implied by a credit spread (decimal per year).
pub fn spread_to_pd(
    spread: f64,
    recovery_rate: f64,
    horizon: f64,
    convention: SpreadConvention,
) -> Result<f64> {
    if recovery_rate == 1.0 {
        return Err(Error::FullRecovery);
    }
    if !(0.0..1.0).contains(&recovery_rate) {
        return Err(Error::OutOfRange {
            name: "recovery_rate",
            value: recovery_rate,
            lo: 0.0,
            hi: 1.0,
        });
    }
    if !(spread >= 0.0 && spread.is_finite()) {
        return Err(Error::OutOfRange {
            name: "spread",
            value: spread,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::OutOfRange {
            name: "horizon",
            value: horizon,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let intensity = spread * horizon / (1.0 - recovery_rate);
    Ok(match convention {
        SpreadConvention::ConstantHazard => -(-intensity).exp_m1(),
        SpreadConvention::Linear => intensity.min(1.0),
    })
}

/// Systemic and credit expected loss of one snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub date: NaiveDate,
    pub bank_count: usize,
    pub total_value: f64,
    /// The exact value when computed, the approximation otherwise.
    pub el_syst: f64,
    pub method: LossMethod,
    pub el_approx: f64,
    pub el_exact: Option<f64>,
    pub approx_error: Option<f64>,
    pub el_credit_total: f64,
    pub el_credit_per_bank: BTreeMap<BankId, f64>,
}

/// Computes the approximation always and the exact value when the bank count
/// is within `exact_cap`.
pub fn loss_report(
    s: &MultiLayerSnapshot,
    p: &DefaultProbabilities,
    lgd: &LossGivenDefault,
    exact_cap: usize,
) -> Result<LossReport> {
    let combined = s.combined();
    let net = Network::interbank(&combined, s.banks())?;
    let el_approx = expected_systemic_loss_approx(&net, p)?;
    let el_exact = if net.bank_count() <= exact_cap {
        Some(expected_systemic_loss_exact(&net, p, exact_cap)?)
    } else {
        None
    };
    let approx_error = el_exact.and_then(|e| (e > 0.0).then(|| (el_approx - e) / e));
    let el_credit_per_bank = credit_expected_loss(&combined, s.banks(), p, lgd)?;
    Ok(LossReport {
        date: s.date(),
        bank_count: net.bank_count(),
        total_value: net.total_value(),
        el_syst: el_exact.unwrap_or(el_approx),
        method: if el_exact.is_some() {
            LossMethod::Exact
        } else {
            LossMethod::Approx
        },
        el_approx,
        el_exact,
        approx_error,
        el_credit_total: el_credit_per_bank.values().sum(),
        el_credit_per_bank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exposure::bank_records;

    #[test]
    fn subset_mass_is_one() {
        let probs = [0.1, 0.5, 0.0, 1.0, 0.33];
        for i in 0..probs.len() {
            assert!((subset_probability_mass(&probs, i, 20).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(subset_probability_mass(&probs, 5, 20).is_err());
        assert!(subset_probability_mass(&probs, 0, 4).is_err());
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    fn snap(m: LiabilityMatrix, banks: BankRecords) -> MultiLayerSnapshot {
        MultiLayerSnapshot::new(
            NaiveDate::from_ymd_opt(2013, 9, 30).unwrap(),
            BTreeMap::from([("dl".into(), m)]),
            banks,
        )
        .unwrap()
    }

    fn two_bank() -> (Network, DefaultProbabilities) {
        let m = LiabilityMatrix::new().with("A", "B", 50.0).unwrap();
        let banks = bank_records([("A", 100.0), ("B", 100.0)]);
        let p = DefaultProbabilities::broadcast(banks.keys(), 0.1).unwrap();
        (Network::interbank(&m, &banks).unwrap(), p)
    }

    #[test]
    fn single_bank_exact_equals_approx() {
        // a lone creditor: only its own value can be lost
        let m = LiabilityMatrix::new().with("A", "B", 50.0).unwrap();
        let banks = bank_records([("A", 100.0), ("B", 100.0)]);
        let p = DefaultProbabilities::new(
            BTreeMap::from([("A".into(), 0.0), ("B".into(), 0.1)]),
            Provenance::Direct,
        )
        .unwrap();
        let net = Network::interbank(&m, &banks).unwrap();
        let exact = expected_systemic_loss_exact(&net, &p, 20).unwrap();
        let approx = expected_systemic_loss_approx(&net, &p).unwrap();
        assert!(close(exact, 5.0, 1e-12));
        assert!(close(approx, 5.0, 1e-12));
    }

    #[test]
    fn two_bank_exact_and_approx() {
        let (net, p) = two_bank();
        let exact = expected_systemic_loss_exact(&net, &p, 20).unwrap();
        let approx = expected_systemic_loss_approx(&net, &p).unwrap();
        assert!(close(exact, 7.25, 1e-12), "{exact}");
        assert!(close(approx, 7.5, 1e-12), "{approx}");
        let rep = approx_error_report(&net, &p, 20).unwrap();
        assert!(close(rep.relative_error, 0.25 / 7.25, 1e-12));
        assert!(rep.approx_at_least_exact);
    }

    #[test]
    fn zero_probabilities_give_zero_loss() {
        let (net, _) = two_bank();
        let p = DefaultProbabilities::broadcast(net.index().ids(), 0.0).unwrap();
        assert_eq!(expected_systemic_loss_exact(&net, &p, 20).unwrap(), 0.0);
        assert_eq!(
            approx_error_report(&net, &p, 20).unwrap().relative_error,
            0.0
        );
    }

    #[test]
    fn unconnected_network_is_exact() {
        // every creditor has infinite capital relative to its claims: R_i = v_i
        let m = LiabilityMatrix::new()
            .with("A", "B", 10.0)
            .unwrap()
            .with("C", "D", 30.0)
            .unwrap()
            .with("B", "C", 5.0)
            .unwrap();
        let banks = bank_records([("A", 1e300), ("B", 1e300), ("C", 1e300), ("D", 1e300)]);
        let net = Network::interbank(&m, &banks).unwrap();
        let p = DefaultProbabilities::new(
            BTreeMap::from([
                ("A".into(), 0.3),
                ("B".into(), 0.05),
                ("C".into(), 0.2),
                ("D".into(), 0.7),
            ]),
            Provenance::Direct,
        )
        .unwrap();
        let rep = approx_error_report(&net, &p, 20).unwrap();
        assert!(close(rep.exact, rep.approx, 1e-9));
        assert!(rep.relative_error.abs() < 1e-9);
    }

    #[test]
    fn over_cap_rejected() {
        let (net, p) = two_bank();
        assert!(matches!(
            expected_systemic_loss_exact(&net, &p, 1),
            Err(Error::OverExactCap { banks: 2, cap: 1 })
        ));
    }

    #[test]
    fn missing_probability_rejected() {
        let (net, _) = two_bank();
        let p = DefaultProbabilities::new(BTreeMap::from([("A".into(), 0.1)]), Provenance::Direct)
            .unwrap();
        assert!(matches!(
            expected_systemic_loss_approx(&net, &p),
            Err(Error::MissingProbability(_))
        ));
        assert!(DefaultProbabilities::broadcast(net.index().ids(), 1.5).is_err());
    }

    #[test]
    fn credit_el_examples() {
        let banks = bank_records([("A", 1.0), ("B", 1.0), ("C", 1.0)]);
        let p = DefaultProbabilities::broadcast(banks.keys(), 0.01).unwrap();
        let lgd = LossGivenDefault::uniform(0.6);
        let m = LiabilityMatrix::new().with("A", "B", 50.0).unwrap();
        let el = credit_expected_loss(&m, &banks, &p, &lgd).unwrap();
        assert!(close(el[&"B".into()], 0.3, 1e-12));
        assert_eq!(el[&"A".into()], 0.0);

        let m = m.with("A", "C", 50.0).unwrap();
        let el = credit_expected_loss(&m, &banks, &p, &lgd).unwrap();
        assert!(close(el[&"B".into()], 0.3, 1e-12));
        assert!(close(el[&"C".into()], 0.3, 1e-12));

        let el = credit_expected_loss(&m, &banks, &p, &LossGivenDefault::uniform(0.0)).unwrap();
        assert!(el.values().all(|x| *x == 0.0));
        assert!(credit_expected_loss(&m, &banks, &p, &LossGivenDefault::uniform(1.2)).is_err());
    }

    #[test]
    fn marginal_credit_matches_difference() {
        let banks = bank_records([("A", 1.0), ("B", 1.0), ("C", 1.0)]);
        let p = DefaultProbabilities::broadcast(banks.keys(), 0.01).unwrap();
        let lgd = LossGivenDefault::uniform(0.6);
        let base = LiabilityMatrix::new().with("C", "B", 20.0).unwrap();
        let x = ExposureDelta::new("dl", "A", "B", 100.0);
        let closed = marginal_credit(&banks, &p, &lgd, &x).unwrap();
        assert!(close(closed, 0.6, 1e-12));

        let before: f64 = credit_expected_loss(&base, &banks, &p, &lgd)
            .unwrap()
            .values()
            .sum();
        let after_m = base.clone().with("A", "B", 100.0).unwrap();
        let after: f64 = credit_expected_loss(&after_m, &banks, &p, &lgd)
            .unwrap()
            .values()
            .sum();
        assert!(close(after - before, closed, 1e-12));

        let other = ExposureDelta::new("dl", "A", "C", 100.0);
        assert_eq!(marginal_credit(&banks, &p, &lgd, &other).unwrap(), closed);

        let tiny = ExposureDelta::new("dl", "A", "B", 1e-12);
        assert!(marginal_credit(&banks, &p, &lgd, &tiny).unwrap() < 1e-13);
        let zero = ExposureDelta::new("dl", "A", "B", 0.0);
        assert!(marginal_credit(&banks, &p, &lgd, &zero).is_err());
    }

    #[test]
    fn marginal_systemic_from_empty() {
        let banks = bank_records([("A", 100.0), ("B", 100.0)]);
        let s = snap(LiabilityMatrix::new(), banks.clone());
        let p = DefaultProbabilities::broadcast(banks.keys(), 0.01).unwrap();
        let x = ExposureDelta::new("dl", "A", "B", 50.0);
        let d = marginal_systemic(&s, &p, &x, MarginalMethod::Approx).unwrap();
        assert!(close(d, 0.75, 1e-12), "{d}");

        let lgd = LossGivenDefault::uniform(0.6);
        let c = marginal_systemic_clamped(&s, &p, &lgd, &x, MarginalMethod::Approx).unwrap();
        assert!(close(c, 0.75, 1e-12));

        let p0 = DefaultProbabilities::broadcast(banks.keys(), 0.0).unwrap();
        assert_eq!(
            marginal_systemic(&s, &p0, &x, MarginalMethod::Approx).unwrap(),
            0.0
        );
    }

    #[test]
    fn add_and_remove_are_antisymmetric() {
        let banks = bank_records([("A", 100.0), ("B", 100.0), ("C", 60.0)]);
        let p = DefaultProbabilities::broadcast(banks.keys(), 0.02).unwrap();
        let lgd = LossGivenDefault::default();
        let base = LiabilityMatrix::new().with("B", "C", 40.0).unwrap();
        let s = snap(base.clone(), banks.clone());
        let x = ExposureDelta::new("dl", "A", "B", 50.0);
        let add = marginal_systemic(&s, &p, &x, MarginalMethod::Approx).unwrap();

        let with = snap(base.with("A", "B", 50.0).unwrap(), banks);
        let all = exposure_marginals(&with, &p, &lgd, MarginalMethod::Approx).unwrap();
        let removed = all
            .iter()
            .find(|e| e.debtor.as_str() == "A" && e.creditor.as_str() == "B")
            .unwrap();
        assert!(close(removed.d_el_syst, add, 1e-12));

        let exact = marginal_systemic(&s, &p, &x, MarginalMethod::Exact { cap: 20 }).unwrap();
        assert!(exact > 0.0 && exact <= add * (1.0 + 1e-9));
    }

    #[test]
    fn shortcut_exposure_reduces_systemic_loss() {
        // A -> B -> C -> D at full impact. A small direct A -> C claim makes C
        // distressed one step early with h = 0.1, so only 0.1 reaches D.
        let m = LiabilityMatrix::new()
            .with("A", "B", 100.0)
            .unwrap()
            .with("B", "C", 100.0)
            .unwrap()
            .with("C", "D", 100.0)
            .unwrap();
        let banks = bank_records([("A", 100.0), ("B", 100.0), ("C", 100.0), ("D", 100.0)]);
        let s = snap(m, banks.clone());
        let p = DefaultProbabilities::broadcast(banks.keys(), 0.01).unwrap();
        let lgd = LossGivenDefault::uniform(0.6);
        let x = ExposureDelta::new("dl", "A", "C", 10.0);
        let syst = marginal_systemic(&s, &p, &x, MarginalMethod::Approx).unwrap();
        // sum_i V R_i drops from 900 to 840
        assert!(close(syst, -0.6, 1e-12), "{syst}");
        let clamped = marginal_systemic_clamped(&s, &p, &lgd, &x, MarginalMethod::Approx).unwrap();
        assert!(close(clamped, 0.06, 1e-12));
    }

    #[test]
    fn spread_examples() {
        let hz = SpreadConvention::ConstantHazard;
        assert_eq!(spread_to_pd(0.0, 0.4, 1.0, hz).unwrap(), 0.0);
        let p = spread_to_pd(0.012, 0.4, 1.0, hz).unwrap();
        assert!(close(p, 1.0 - (-0.02f64).exp(), 1e-15));
        assert!((p - 0.0198).abs() < 1e-4);
        assert_eq!(spread_to_pd(0.012, 0.4, 0.0, hz).unwrap(), 0.0);
        assert!(matches!(
            spread_to_pd(0.01, 1.0, 1.0, hz),
            Err(Error::FullRecovery)
        ));
        assert!(spread_to_pd(-0.01, 0.4, 1.0, hz).is_err());
        let lin = spread_to_pd(0.012, 0.4, 1.0, SpreadConvention::Linear).unwrap();
        assert!(close(lin, 0.02, 1e-15));
        assert_eq!(
            spread_to_pd(1.0, 0.4, 1.0, SpreadConvention::Linear).unwrap(),
            1.0
        );
    }

    #[test]
    fn loss_report_switches_method() {
        let m = LiabilityMatrix::new().with("A", "B", 50.0).unwrap();
        let banks = bank_records([("A", 100.0), ("B", 100.0)]);
        let s = snap(m, banks.clone());
        let p = DefaultProbabilities::broadcast(banks.keys(), 0.1).unwrap();
        let lgd = LossGivenDefault::default();
        let r = loss_report(&s, &p, &lgd, 20).unwrap();
        assert_eq!(r.method, LossMethod::Exact);
        assert!(close(r.el_syst, 7.25, 1e-12));
        assert!(close(r.approx_error.unwrap(), 0.25 / 7.25, 1e-12));
        assert!(close(r.el_credit_total, 0.1 * 0.6 * 50.0, 1e-12));
        let r = loss_report(&s, &p, &lgd, 1).unwrap();
        assert_eq!(r.method, LossMethod::Approx);
        assert!(r.el_exact.is_none());
        assert!(close(r.el_syst, 7.5, 1e-12));
    }
}
