//! DebtRank cascades and the quantities derived from them.
//!
//! Each node carries a distress level `h` in `[0, 1]` and a state in
//! {Undistressed, Distressed, Inactive}. A distressed node passes
//! `W[j][i] * h[j]` to every creditor `i` exactly once, then turns inactive.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exposure::{
    BankId, BankIndex, BankRecords, LayerId, LiabilityMatrix, MultiLayerSnapshot,
};

pub const DEFAULT_LOSS_RATE: f64 = 0.6;

/// Sparse `W[i][j] = min(1, L[i][j] / C[j])`, the impact of `i`'s default on `j`.
#[derive(Clone, Debug)]
pub struct ImpactMatrix {
    rows: Vec<Vec<(usize, f64)>>,
}

impl ImpactMatrix {
    pub fn build(m: &LiabilityMatrix, index: &BankIndex, banks: &BankRecords) -> Result<Self> {
        let mut rows = vec![Vec::new(); index.len()];
        for (d, c, amount) in m.iter() {
            let i = index.position(d)?;
            let j = index.position(c)?;
            let capital = banks
                .get(c)
                .ok_or_else(|| Error::UnknownBank(c.clone()))?
                .capital;
            rows[i].push((j, impact_weight(amount, capital)));
        }
        Ok(ImpactMatrix { rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Creditors of `i` with their impact weights.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .iter()
            .find(|(k, _)| *k == j)
            .map_or(0.0, |(_, w)| *w)
    }
}

/// `min(1, amount / capital)`, with zero capital treated as the `C -> 0+` limit.
pub fn impact_weight(amount: f64, capital: f64) -> f64 {
    if amount <= 0.0 {
        0.0
    } else if capital <= 0.0 {
        1.0
    } else {
        (amount / capital).min(1.0)
    }
}

/// Builds the impact matrix over the sorted bank set of `banks`.
pub fn impact_matrix(m: &LiabilityMatrix, banks: &BankRecords) -> Result<ImpactMatrix> {
    ImpactMatrix::build(m, &BankIndex::of_records(banks), banks)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueMode {
    /// `v_i = L_i / sum_j L_j`
    #[default]
    InterbankOnly,
    /// `v_i = (L_i + r A_i) / sum_j (L_j + r A_j)`
    WithExternalAssets,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EconomicValueVector {
    pub values: Vec<f64>,
    pub mode: ValueMode,
    pub loss_rate: f64,
    /// The normalizing denominator.
    pub total: f64,
}

impl EconomicValueVector {
    fn zeros(n: usize, mode: ValueMode, loss_rate: f64) -> Self {
        EconomicValueVector {
            values: vec![0.0; n],
            mode,
            loss_rate,
            total: 0.0,
        }
    }

    pub fn compute(
        m: &LiabilityMatrix,
        index: &BankIndex,
        banks: &BankRecords,
        mode: ValueMode,
        loss_rate: f64,
    ) -> Result<Self> {
        let mut raw = vec![0.0; index.len()];
        for (_, c, a) in m.iter() {
            raw[index.position(c)?] += a;
        }
        if mode == ValueMode::WithExternalAssets {
            for (k, id) in index.ids().iter().enumerate() {
                let assets = banks
                    .get(id)
                    .and_then(|r| r.total_noninterbank_assets)
                    .ok_or_else(|| Error::MissingExternalAssets(id.clone()))?;
                raw[k] += loss_rate * assets;
            }
        }
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroTotalValue);
        }
        let values = raw.into_iter().map(|x| x / total).collect();
        Ok(EconomicValueVector {
            values,
            mode,
            loss_rate,
            total,
        })
    }

    pub fn get(&self, k: usize) -> f64 {
        self.values[k]
    }
}

/// Economic values keyed by bank.
pub fn economic_value(
    m: &LiabilityMatrix,
    banks: &BankRecords,
    mode: ValueMode,
    loss_rate: f64,
) -> Result<BTreeMap<BankId, f64>> {
    let index = BankIndex::of_records(banks);
    let v = EconomicValueVector::compute(m, &index, banks, mode, loss_rate)?;
    Ok(index.ids().iter().cloned().zip(v.values).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeState {
    Undistressed,
    Distressed,
    Inactive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CascadeState {
    pub h: Vec<f64>,
    pub s: Vec<NodeState>,
    pub step: usize,
}

impl CascadeState {
    pub fn any_distressed(&self) -> bool {
        self.s.contains(&NodeState::Distressed)
    }
}

/// Step-by-step cascade over an impact matrix.
pub struct Cascade<'a> {
    impact: &'a ImpactMatrix,
    state: CascadeState,
    delta: Vec<f64>,
}

impl<'a> Cascade<'a> {
    pub fn new(impact: &'a ImpactMatrix, seeds: &[usize], psi: f64) -> Self {
        let n = impact.len();
        let mut state = CascadeState {
            h: vec![0.0; n],
            s: vec![NodeState::Undistressed; n],
            step: 1,
        };
        for &k in seeds {
            state.h[k] = psi;
            state.s[k] = NodeState::Distressed;
        }
        Cascade {
            impact,
            state,
            delta: vec![0.0; n],
        }
    }

    pub fn state(&self) -> &CascadeState {
        &self.state
    }

    /// Advances one step. Returns false once no node is distressed.
    pub fn step(&mut self) -> bool {
        if !self.state.any_distressed() {
            return false;
        }
        advance(
            self.impact,
            &mut self.state.h,
            &mut self.state.s,
            &mut self.delta,
        );
        self.state.step += 1;
        true
    }

    /// Runs to convergence; more than `n + 1` steps is an internal error.
    pub fn run(mut self) -> Result<CascadeState> {
        let cap = self.impact.len() + 1;
        while self.step() {
            if self.state.step > cap + 1 {
                return Err(Error::Internal(format!(
                    "cascade exceeded {cap} iterations"
                )));
            }
        }
        Ok(self.state)
    }
}

fn advance(impact: &ImpactMatrix, h: &mut [f64], s: &mut [NodeState], delta: &mut [f64]) {
    delta.iter_mut().for_each(|x| *x = 0.0);
    for (j, state) in s.iter().enumerate() {
        if *state == NodeState::Distressed && h[j] > 0.0 {
            for &(i, w) in impact.row(j) {
                delta[i] += w * h[j];
            }
        }
    }
    for i in 0..h.len() {
        h[i] = (h[i] + delta[i]).min(1.0);
        s[i] = match s[i] {
            NodeState::Distressed => NodeState::Inactive,
            NodeState::Undistressed if h[i] > 0.0 => NodeState::Distressed,
            other => other,
        };
    }
}

/// Reusable buffers for running many cascades on one network.
#[derive(Clone, Debug, Default)]
pub struct CascadeWorkspace {
    h: Vec<f64>,
    s: Vec<NodeState>,
    delta: Vec<f64>,
}

impl CascadeWorkspace {
    /// Returns `sum_j h_j(T) v_j` and the number of steps taken.
    pub fn total_loss(
        &mut self,
        impact: &ImpactMatrix,
        values: &[f64],
        seeds: &[usize],
        psi: f64,
    ) -> Result<(f64, usize)> {
        let n = impact.len();
        self.h.clear();
        self.h.resize(n, 0.0);
        self.s.clear();
        self.s.resize(n, NodeState::Undistressed);
        self.delta.resize(n, 0.0);
        for &k in seeds {
            self.h[k] = psi;
            self.s[k] = NodeState::Distressed;
        }
        let mut step = 1;
        while self.s.contains(&NodeState::Distressed) {
            advance(impact, &mut self.h, &mut self.s, &mut self.delta);
            step += 1;
            if step > n + 2 {
                return Err(Error::Internal(format!(
                    "cascade exceeded {} iterations",
                    n + 1
                )));
            }
        }
        let r = self.h.iter().zip(values).map(|(h, v)| h * v).sum();
        Ok((r, step))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DebtRankResult {
    pub seed_set: BTreeSet<BankId>,
    pub psi: f64,
    /// `R_S`: final distress weighted by economic value, seeds included.
    pub r_including_initial: f64,
    /// `R'_S`: as above minus the seeds' initial distress.
    pub r_excluding_initial: f64,
    pub steps_to_convergence: usize,
    pub final_h: BTreeMap<BankId, f64>,
}

/// A liability matrix prepared for repeated cascades: fixed bank order,
/// impact weights and economic values.
#[derive(Clone, Debug)]
pub struct Network {
    index: BankIndex,
    impact: ImpactMatrix,
    values: EconomicValueVector,
}

impl Network {
    /// Builds over every bank in `banks`. A matrix with zero total value
    /// yields all-zero economic values.
    pub fn new(
        m: &LiabilityMatrix,
        banks: &BankRecords,
        mode: ValueMode,
        loss_rate: f64,
    ) -> Result<Self> {
        let index = BankIndex::of_records(banks);
        let impact = ImpactMatrix::build(m, &index, banks)?;
        let values = match EconomicValueVector::compute(m, &index, banks, mode, loss_rate) {
            Ok(v) => v,
            Err(Error::ZeroTotalValue) => EconomicValueVector::zeros(index.len(), mode, loss_rate),
            Err(e) => return Err(e),
        };
        Ok(Network {
            index,
            impact,
            values,
        })
    }

    pub fn interbank(m: &LiabilityMatrix, banks: &BankRecords) -> Result<Self> {
        Self::new(m, banks, ValueMode::InterbankOnly, DEFAULT_LOSS_RATE)
    }

    pub fn combined(s: &MultiLayerSnapshot) -> Result<Self> {
        Self::interbank(&s.combined(), s.banks())
    }

    pub fn layer(s: &MultiLayerSnapshot, id: &LayerId) -> Result<Self> {
        Self::interbank(s.layer(id)?, s.banks())
    }

    pub fn index(&self) -> &BankIndex {
        &self.index
    }

    pub fn impact(&self) -> &ImpactMatrix {
        &self.impact
    }

    pub fn values(&self) -> &EconomicValueVector {
        &self.values
    }

    /// The normalizing total `V` (total interbank assets in interbank-only mode).
    pub fn total_value(&self) -> f64 {
        self.values.total
    }

    pub fn bank_count(&self) -> usize {
        self.index.len()
    }

    pub fn debtrank(&self, seeds: &[BankId], psi: f64) -> Result<DebtRankResult> {
        if seeds.is_empty() {
            return Err(Error::EmptySeedSet);
        }
        check_psi(psi)?;
        let mut positions = seeds
            .iter()
            .map(|b| self.index.position(b))
            .collect::<Result<Vec<_>>>()?;
        positions.sort_unstable();
        positions.dedup();
        let state = Cascade::new(&self.impact, &positions, psi).run()?;
        let v = &self.values.values;
        let r: f64 = state.h.iter().zip(v).map(|(h, v)| h * v).sum();
        let initial: f64 = positions.iter().map(|&k| psi * v[k]).sum();
        Ok(DebtRankResult {
            seed_set: positions
                .iter()
                .map(|&k| self.index.id(k).clone())
                .collect(),
            psi,
            r_including_initial: r,
            r_excluding_initial: (r - initial).max(0.0),
            steps_to_convergence: state.step,
            final_h: self.index.ids().iter().cloned().zip(state.h).collect(),
        })
    }

    /// `R_S` for seed positions, without building the result maps.
    pub fn debtrank_of(&self, seeds: &[usize], psi: f64, ws: &mut CascadeWorkspace) -> Result<f64> {
        if seeds.is_empty() {
            return Ok(0.0);
        }
        Ok(ws
            .total_loss(&self.impact, &self.values.values, seeds, psi)?
            .0)
    }

    /// `R_i` (seeds included) for every single-bank seed, in index order.
    pub fn single_seed_debtranks(&self, psi: f64) -> Result<Vec<f64>> {
        check_psi(psi)?;
        (0..self.bank_count())
            .into_par_iter()
            .map_init(CascadeWorkspace::default, |ws, k| {
                self.debtrank_of(&[k], psi, ws)
            })
            .collect()
    }

    /// Full results for every single-bank seed, in index order.
    pub fn single_seed_sweep(&self, psi: f64) -> Result<Vec<DebtRankResult>> {
        self.index
            .ids()
            .par_iter()
            .map(|b| self.debtrank(std::slice::from_ref(b), psi))
            .collect()
    }
}

fn check_psi(psi: f64) -> Result<()> {
    if (0.0..=1.0).contains(&psi) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "psi",
            value: psi,
            lo: 0.0,
            hi: 1.0,
        })
    }
}

/// DebtRank of `seed_set` on `m` with the given economic values.
pub fn debtrank(
    m: &LiabilityMatrix,
    banks: &BankRecords,
    seed_set: &[BankId],
    psi: f64,
    mode: ValueMode,
    loss_rate: f64,
) -> Result<DebtRankResult> {
    Network::new(m, banks, mode, loss_rate)?.debtrank(seed_set, psi)
}

/// Per-layer DebtRanks for all banks of a snapshot, with their normalized
/// counterparts `(V_layer / V_comb) * R_layer`.
#[derive(Clone, Debug)]
pub struct LayerDebtRanks {
    pub layer: LayerId,
    pub layer_value: f64,
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
}

/// Computes per-layer DebtRanks (psi) for every layer, banks in index order.
pub fn layer_debtranks(
    s: &MultiLayerSnapshot,
    combined_value: f64,
    psi: f64,
) -> Result<Vec<LayerDebtRanks>> {
    s.layer_ids()
        .map(|id| {
            let net = Network::layer(s, id)?;
            let layer_value = net.total_value();
            let raw = if layer_value > 0.0 {
                net.single_seed_debtranks(psi)?
            } else {
                vec![0.0; net.bank_count()]
            };
            let scale = if combined_value > 0.0 {
                layer_value / combined_value
            } else {
                0.0
            };
            let normalized = raw.iter().map(|r| r * scale).collect();
            Ok(LayerDebtRanks {
                layer: id.clone(),
                layer_value,
                raw,
                normalized,
            })
        })
        .collect()
}

/// Normalized layer DebtRank of bank `i` with psi = 1.
pub fn normalized_layer_debtrank(
    s: &MultiLayerSnapshot,
    layer: &LayerId,
    i: &BankId,
) -> Result<f64> {
    let v_comb = s.combined().total_economic_value();
    if v_comb <= 0.0 {
        return Err(Error::ZeroTotalValue);
    }
    let net = Network::layer(s, layer)?;
    let pos = net.index().position(i)?;
    if net.total_value() <= 0.0 {
        return Ok(0.0);
    }
    let r = net.debtrank_of(&[pos], 1.0, &mut CascadeWorkspace::default())?;
    Ok(net.total_value() / v_comb * r)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scope {
    Layer(LayerId),
    Combined,
}

/// Mean over all banks of the normalized layer DebtRank, or of the combined
/// DebtRank. Isolated banks count in the denominator.
pub fn average_debtrank(s: &MultiLayerSnapshot, scope: &Scope) -> Result<f64> {
    let b = s.bank_count();
    if b == 0 {
        return Ok(0.0);
    }
    let comb = Network::combined(s)?;
    if comb.total_value() <= 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = match scope {
        Scope::Combined => comb.single_seed_debtranks(1.0)?.iter().sum(),
        Scope::Layer(id) => {
            let net = Network::layer(s, id)?;
            if net.total_value() <= 0.0 {
                0.0
            } else {
                let scale = net.total_value() / comb.total_value();
                net.single_seed_debtranks(1.0)?
                    .iter()
                    .map(|r| r * scale)
                    .sum()
            }
        }
    };
    Ok(sum / b as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerContribution {
    pub raw: f64,
    pub normalized: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub rank: usize,
    pub bank: BankId,
    pub r_combined: f64,
    pub layers: BTreeMap<LayerId, LayerContribution>,
    /// Sum of the normalized layer values.
    pub layer_sum: f64,
    /// `r_combined - layer_sum`.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskProfile {
    pub date: NaiveDate,
    pub layers: Vec<LayerId>,
    pub entries: Vec<ProfileEntry>,
    pub average_combined: f64,
    pub average_by_layer: BTreeMap<LayerId, f64>,
}

impl RiskProfile {
    /// Fraction of banks whose combined DebtRank is at least the sum of
    /// their normalized layer values (minus `tol`).
    pub fn superadditive_fraction(&self, tol: f64) -> f64 {
        if self.entries.is_empty() {
            return 1.0;
        }
        let n = self.entries.iter().filter(|e| e.margin >= -tol).count();
        n as f64 / self.entries.len() as f64
    }
}

/// Banks ranked by combined DebtRank (descending, ties by id) with their
/// per-layer decomposition.
pub fn sr_profile(s: &MultiLayerSnapshot) -> Result<RiskProfile> {
    sr_profile_with_psi(s, 1.0)
}

pub fn sr_profile_with_psi(s: &MultiLayerSnapshot, psi: f64) -> Result<RiskProfile> {
    let comb = Network::combined(s)?;
    let v_comb = comb.total_value();
    let n = comb.bank_count();
    let r_comb = if v_comb > 0.0 {
        comb.single_seed_debtranks(psi)?
    } else {
        vec![0.0; n]
    };
    let per_layer = layer_debtranks(s, v_comb, psi)?;

    let mut entries: Vec<ProfileEntry> = (0..n)
        .map(|k| {
            let layers: BTreeMap<_, _> = per_layer
                .iter()
                .map(|l| {
                    (
                        l.layer.clone(),
                        LayerContribution {
                            raw: l.raw[k],
                            normalized: l.normalized[k],
                        },
                    )
                })
                .collect();
            let layer_sum = layers.values().map(|c| c.normalized).sum::<f64>();
            ProfileEntry {
                rank: 0,
                bank: comb.index().id(k).clone(),
                r_combined: r_comb[k],
                layers,
                layer_sum,
                margin: r_comb[k] - layer_sum,
            }
        })
        .collect();
    entries.sort_by(|a, b| {
        b.r_combined
            .total_cmp(&a.r_combined)
            .then_with(|| a.bank.cmp(&b.bank))
    });
    for (k, e) in entries.iter_mut().enumerate() {
        e.rank = k + 1;
    }

    let mean = |xs: &[f64]| {
        if n == 0 {
            0.0
        } else {
            xs.iter().sum::<f64>() / n as f64
        }
    };
    Ok(RiskProfile {
        date: s.date(),
        layers: s.layer_ids().cloned().collect(),
        average_combined: mean(&r_comb),
        average_by_layer: per_layer
            .iter()
            .map(|l| (l.layer.clone(), mean(&l.normalized)))
            .collect(),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exposure::{bank_records, BankRecord};
    use proptest::prelude::*;

    fn approx(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    fn two_bank() -> (LiabilityMatrix, BankRecords) {
        (
            LiabilityMatrix::new().with("A", "B", 50.0).unwrap(),
            bank_records([("A", 100.0), ("B", 100.0)]),
        )
    }

    fn chain() -> (LiabilityMatrix, BankRecords) {
        (
            LiabilityMatrix::new()
                .with("A", "B", 50.0)
                .unwrap()
                .with("B", "C", 80.0)
                .unwrap(),
            bank_records([("A", 100.0), ("B", 100.0), ("C", 100.0)]),
        )
    }

    fn snap(layers: Vec<(&str, LiabilityMatrix)>, banks: BankRecords) -> MultiLayerSnapshot {
        let layers = layers.into_iter().map(|(l, m)| (l.into(), m)).collect();
        MultiLayerSnapshot::new(NaiveDate::from_ymd_opt(2013, 9, 30).unwrap(), layers, banks)
            .unwrap()
    }

    #[test]
    fn impact_examples() {
        assert_eq!(impact_weight(50.0, 100.0), 0.5);
        assert_eq!(impact_weight(200.0, 100.0), 1.0);
        assert_eq!(impact_weight(50.0, 0.0), 1.0);
        assert_eq!(impact_weight(0.0, 0.0), 0.0);
        let (m, banks) = two_bank();
        let w = impact_matrix(&m, &banks).unwrap();
        assert_eq!(w.get(0, 1), 0.5);
        assert_eq!(w.get(1, 0), 0.0);
    }

    #[test]
    fn economic_value_examples() {
        let (m, banks) = two_bank();
        let v = economic_value(&m, &banks, ValueMode::InterbankOnly, 0.6).unwrap();
        assert_eq!(v[&"A".into()], 0.0);
        assert_eq!(v[&"B".into()], 1.0);

        let (m, banks) = chain();
        let v = economic_value(&m, &banks, ValueMode::InterbankOnly, 0.6).unwrap();
        assert!(approx(v[&"B".into()], 50.0 / 130.0));
        assert!(approx(v[&"C".into()], 80.0 / 130.0));

        let (m, _) = two_bank();
        let banks: BankRecords = [("A", 100.0), ("B", 100.0)]
            .into_iter()
            .map(|(id, c)| {
                (
                    id.into(),
                    BankRecord::new(id, c).with_external_assets(100.0),
                )
            })
            .collect();
        let v = economic_value(&m, &banks, ValueMode::WithExternalAssets, 0.6).unwrap();
        assert!(approx(v[&"A".into()], 60.0 / 170.0));
        assert!(approx(v[&"B".into()], 110.0 / 170.0));
    }

    #[test]
    fn economic_value_errors() {
        let (m, banks) = two_bank();
        assert!(matches!(
            economic_value(&m, &banks, ValueMode::WithExternalAssets, 0.6),
            Err(Error::MissingExternalAssets(_))
        ));
        assert!(matches!(
            economic_value(
                &LiabilityMatrix::new(),
                &banks,
                ValueMode::InterbankOnly,
                0.6
            ),
            Err(Error::ZeroTotalValue)
        ));
    }

    #[test]
    fn two_bank_debtrank() {
        let (m, banks) = two_bank();
        let net = Network::interbank(&m, &banks).unwrap();
        let a = net.debtrank(&["A".into()], 1.0).unwrap();
        assert!(approx(a.r_including_initial, 0.5));
        assert!(approx(a.r_excluding_initial, 0.5));
        assert!(approx(a.final_h[&"B".into()], 0.5));
        let b = net.debtrank(&["B".into()], 1.0).unwrap();
        assert!(approx(b.r_including_initial, 1.0));
        assert!(approx(b.r_excluding_initial, 0.0));
        let ab = net.debtrank(&["A".into(), "B".into()], 1.0).unwrap();
        assert!(approx(ab.r_including_initial, 1.0));
    }

    #[test]
    fn chain_debtrank_and_trajectory() {
        let (m, banks) = chain();
        let net = Network::interbank(&m, &banks).unwrap();
        let a = net.debtrank(&["A".into()], 1.0).unwrap();
        assert!(approx(a.r_including_initial, 57.0 / 130.0));
        assert!(approx(a.final_h[&"C".into()], 0.4));
        // A distressed at 1, B at 2, C at 3, all inactive at 4
        assert_eq!(a.steps_to_convergence, 4);

        let mut c = Cascade::new(net.impact(), &[0], 1.0);
        let mut prev = c.state().clone();
        while c.step() {
            let cur = c.state();
            for k in 0..3 {
                assert!(cur.h[k] >= prev.h[k]);
                if prev.s[k] == NodeState::Distressed {
                    assert_eq!(cur.s[k], NodeState::Inactive);
                }
                if prev.s[k] == NodeState::Inactive {
                    assert_eq!(cur.s[k], NodeState::Inactive);
                }
            }
            prev = cur.clone();
        }
    }

    #[test]
    fn empty_seed_and_bad_psi() {
        let (m, banks) = two_bank();
        let net = Network::interbank(&m, &banks).unwrap();
        assert!(matches!(net.debtrank(&[], 1.0), Err(Error::EmptySeedSet)));
        assert!(net.debtrank(&["A".into()], 1.5).is_err());
        assert!(matches!(
            net.debtrank(&["Z".into()], 1.0),
            Err(Error::UnknownBank(_))
        ));
    }

    #[test]
    fn normalized_layer_examples() {
        let (m, banks) = chain();
        let s = snap(vec![("dl", m.clone())], banks.clone());
        let r = Network::combined(&s)
            .unwrap()
            .debtrank(&["A".into()], 1.0)
            .unwrap()
            .r_including_initial;
        let hat = normalized_layer_debtrank(&s, &"dl".into(), &"A".into()).unwrap();
        assert!(approx(hat, r));

        let s2 = snap(vec![("dl", m.clone()), ("fx", m.clone())], banks.clone());
        let raw = Network::layer(&s2, &"fx".into())
            .unwrap()
            .debtrank(&["A".into()], 1.0)
            .unwrap()
            .r_including_initial;
        let hat = normalized_layer_debtrank(&s2, &"fx".into(), &"A".into()).unwrap();
        assert!(approx(hat, raw / 2.0));

        let s3 = snap(
            vec![("dl", m), ("fx", LiabilityMatrix::new())],
            banks.clone(),
        );
        for b in ["A", "B", "C"] {
            assert_eq!(
                normalized_layer_debtrank(&s3, &"fx".into(), &b.into()).unwrap(),
                0.0
            );
        }

        let empty = snap(vec![("dl", LiabilityMatrix::new())], banks);
        assert!(matches!(
            normalized_layer_debtrank(&empty, &"dl".into(), &"A".into()),
            Err(Error::ZeroTotalValue)
        ));
    }

    #[test]
    fn average_debtrank_examples() {
        let (m, banks) = two_bank();
        let s = snap(vec![("dl", m.clone())], banks);
        assert!(approx(
            average_debtrank(&s, &Scope::Combined).unwrap(),
            0.75
        ));
        assert!(approx(
            average_debtrank(&s, &Scope::Layer("dl".into())).unwrap(),
            0.75
        ));

        let s = snap(
            vec![("dl", m)],
            bank_records([("A", 100.0), ("B", 100.0), ("C", 100.0)]),
        );
        assert!(approx(average_debtrank(&s, &Scope::Combined).unwrap(), 0.5));

        let s = snap(
            vec![("dl", LiabilityMatrix::new())],
            bank_records([("A", 1.0)]),
        );
        assert_eq!(average_debtrank(&s, &Scope::Combined).unwrap(), 0.0);
    }

    #[test]
    fn sr_profile_examples() {
        let (m, banks) = two_bank();
        let s = snap(vec![("dl", m)], banks);
        let p = sr_profile(&s).unwrap();
        let order: Vec<_> = p.entries.iter().map(|e| e.bank.as_str()).collect();
        assert_eq!(order, ["B", "A"]);
        assert!(approx(p.entries[0].r_combined, 1.0));
        assert!(approx(p.entries[1].r_combined, 0.5));
        for e in &p.entries {
            assert!(approx(
                e.layers[&LayerId::from("dl")].normalized,
                e.r_combined
            ));
            assert!(e.margin.abs() < 1e-12);
        }

        let s = snap(
            vec![("dl", LiabilityMatrix::new())],
            bank_records([("C", 1.0), ("A", 1.0), ("B", 1.0)]),
        );
        let p = sr_profile(&s).unwrap();
        let order: Vec<_> = p.entries.iter().map(|e| e.bank.as_str()).collect();
        assert_eq!(order, ["A", "B", "C"]);
        assert!(p.entries.iter().all(|e| e.r_combined == 0.0));
    }

    #[test]
    fn full_seeding_saturates() {
        let (m, banks) = chain();
        let net = Network::interbank(&m, &banks).unwrap();
        let all: Vec<BankId> = net.index().ids().to_vec();
        let r = net.debtrank(&all, 1.0).unwrap();
        assert!(approx(r.r_including_initial, 1.0));
    }

    // random network over n banks: entries (d, c, amount), capitals
    fn arb_network(max_n: usize) -> impl Strategy<Value = (LiabilityMatrix, BankRecords)> {
        (2..=max_n).prop_flat_map(|n| {
            (
                prop::collection::vec((0..n, 0..n, 1.0f64..100.0), 0..(n * n)),
                prop::collection::vec(0.0f64..300.0, n),
            )
                .prop_map(move |(edges, caps)| {
                    let name = |k: usize| format!("b{k:02}");
                    let mut m = LiabilityMatrix::new();
                    for (d, c, a) in edges {
                        if d != c {
                            m.add(name(d).into(), name(c).into(), a).unwrap();
                        }
                    }
                    let banks = bank_records(caps.iter().enumerate().map(|(k, c)| (name(k), *c)));
                    (m, banks)
                })
        })
    }

    proptest! {
        #[test]
        #[allow(clippy::needless_range_loop)]
        fn bounds_and_monotone_convergence(
            (m, banks) in arb_network(8),
            seed_mask in 1u32..256,
            psi in 0.0f64..=1.0,
        ) {
            let net = Network::interbank(&m, &banks).unwrap();
            let n = net.bank_count();
            let seeds: Vec<usize> = (0..n).filter(|k| seed_mask >> k & 1 == 1).collect();
            prop_assume!(!seeds.is_empty());
            let mut c = Cascade::new(net.impact(), &seeds, psi);
            let mut prev = c.state().clone();
            let mut distressed_count = vec![0usize; n];
            while c.step() {
                let cur = c.state();
                prop_assert!(cur.step <= n + 2);
                for k in 0..n {
                    prop_assert!(cur.h[k] >= prev.h[k] && cur.h[k] <= 1.0);
                    if prev.s[k] == NodeState::Distressed {
                        distressed_count[k] += 1;
                        prop_assert_eq!(cur.s[k], NodeState::Inactive);
                    }
                    if prev.s[k] == NodeState::Inactive {
                        prop_assert_eq!(cur.s[k], NodeState::Inactive);
                    }
                }
                prev = cur.clone();
            }
            prop_assert!(distressed_count.iter().all(|&c| c <= 1));
            let ids: Vec<BankId> = seeds.iter().map(|&k| net.index().id(k).clone()).collect();
            let r = net.debtrank(&ids, psi).unwrap();
            prop_assert!(r.r_excluding_initial >= 0.0);
            prop_assert!(r.r_excluding_initial <= r.r_including_initial + 1e-12);
            prop_assert!(r.r_including_initial <= 1.0 + 1e-12);
            let initial: f64 = seeds.iter().map(|&k| psi * net.values().get(k)).sum();
            prop_assert!((r.r_including_initial - r.r_excluding_initial - initial).abs() < 1e-12);
        }

        #[test]
        fn more_capital_never_raises_debtrank((m, banks) in arb_network(7), bump in 1.0f64..3.0) {
            let richer: BankRecords = banks
                .iter()
                .map(|(k, r)| {
                    let mut r = r.clone();
                    r.capital = r.capital * bump + 1.0;
                    (k.clone(), r)
                })
                .collect();
            let a = Network::interbank(&m, &banks).unwrap().single_seed_debtranks(1.0).unwrap();
            let b = Network::interbank(&m, &richer).unwrap().single_seed_debtranks(1.0).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!(*y <= *x + 1e-12);
            }
        }
    }

    #[test]
    fn psi_linear_on_uncapped_chain() {
        let (m, banks) = chain();
        let net = Network::interbank(&m, &banks).unwrap();
        let at_one = net
            .debtrank(&["A".into()], 1.0)
            .unwrap()
            .r_excluding_initial;
        for psi in [0.0, 0.1, 0.25, 0.5, 0.9] {
            let r = net
                .debtrank(&["A".into()], psi)
                .unwrap()
                .r_excluding_initial;
            assert!(approx(r, psi * at_one), "psi={psi}: {r}");
        }
    }
}
