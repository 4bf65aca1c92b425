//! Layered liability networks.
//!
//! `L[(i, j)]` is the amount bank `i` (the debtor) owes bank `j` (the creditor).
//! Reading a matrix by creditor gives each bank's interbank assets.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BankId(String);

impl BankId {
    pub fn new(id: impl Into<String>) -> Self {
        BankId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for BankId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for BankId {
    fn from(s: &str) -> Self {
        BankId(s.to_owned())
    }
}

impl From<String> for BankId {
    fn from(s: String) -> Self {
        BankId(s)
    }
}

/// Exposure-type tag. The four canonical layers are `deri`, `secu`, `fx` and
/// `dl`; any other non-empty label is accepted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LayerId(String);

impl LayerId {
    pub const DERIVATIVES: &'static str = "deri";
    pub const SECURITIES: &'static str = "secu";
    pub const FOREIGN_EXCHANGE: &'static str = "fx";
    pub const DEPOSITS_LOANS: &'static str = "dl";

    pub fn new(label: impl Into<String>) -> Self {
        LayerId(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// 1-based index of a canonical layer (derivatives = 1 ... deposits & loans = 4).
    pub fn canonical_index(&self) -> Option<u8> {
        match self.0.as_str() {
            Self::DERIVATIVES => Some(1),
            Self::SECURITIES => Some(2),
            Self::FOREIGN_EXCHANGE => Some(3),
            Self::DEPOSITS_LOANS => Some(4),
            _ => None,
        }
    }
}

impl fmt::Display for LayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&LayerId> for LayerId {
    fn from(l: &LayerId) -> Self {
        l.clone()
    }
}

impl From<&str> for LayerId {
    fn from(s: &str) -> Self {
        LayerId(s.to_owned())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LiabilityMatrix {
    entries: BTreeMap<(BankId, BankId), f64>,
}

impl LiabilityMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a matrix without checking the entries. Use [`validate_matrix`]
    /// or snapshot validation to find bad entries.
    pub fn from_entries_unchecked<I>(entries: I) -> Self
    where
        I: IntoIterator<Item = ((BankId, BankId), f64)>,
    {
        LiabilityMatrix {
            entries: entries.into_iter().collect(),
        }
    }

    /// Adds `amount` to the (debtor, creditor) entry.
    pub fn add(&mut self, debtor: BankId, creditor: BankId, amount: f64) -> Result<()> {
        check_exposure(&debtor, &creditor, amount)?;
        *self.entries.entry((debtor, creditor)).or_insert(0.0) += amount;
        Ok(())
    }

    pub fn with(mut self, debtor: &str, creditor: &str, amount: f64) -> Result<Self> {
        self.add(debtor.into(), creditor.into(), amount)?;
        Ok(self)
    }

    pub fn remove(&mut self, debtor: &BankId, creditor: &BankId) -> Option<f64> {
        self.entries.remove(&(debtor.clone(), creditor.clone()))
    }

    pub fn get(&self, debtor: &BankId, creditor: &BankId) -> f64 {
        self.entries
            .get(&(debtor.clone(), creditor.clone()))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BankId, &BankId, f64)> {
        self.entries.iter().map(|((d, c), a)| (d, c, *a))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Unweighted directed edge set.
    pub fn edges(&self) -> BTreeSet<(BankId, BankId)> {
        self.entries.keys().cloned().collect()
    }

    /// Money owed to bank `i`: the creditor-side column sum.
    pub fn interbank_assets(&self, i: &BankId) -> f64 {
        self.iter()
            .filter(|(_, c, _)| *c == i)
            .map(|(_, _, a)| a)
            .sum()
    }

    /// Money bank `i` owes: the debtor-side row sum.
    pub fn interbank_liabilities(&self, i: &BankId) -> f64 {
        self.iter()
            .filter(|(d, _, _)| *d == i)
            .map(|(_, _, a)| a)
            .sum()
    }

    /// Sum of all entries, i.e. total interbank assets.
    pub fn total_economic_value(&self) -> f64 {
        self.entries.values().sum()
    }

    /// Creditor-side weighted in-degree for every bank appearing in the matrix.
    pub fn weighted_in_degrees(&self) -> BTreeMap<BankId, f64> {
        let mut out = BTreeMap::new();
        for (_, c, a) in self.iter() {
            *out.entry(c.clone()).or_insert(0.0) += a;
        }
        out
    }

    pub fn weighted_out_degrees(&self) -> BTreeMap<BankId, f64> {
        let mut out = BTreeMap::new();
        for (d, _, a) in self.iter() {
            *out.entry(d.clone()).or_insert(0.0) += a;
        }
        out
    }

    /// Every bank appearing as debtor or creditor.
    pub fn banks(&self) -> BTreeSet<BankId> {
        self.entries
            .keys()
            .flat_map(|(d, c)| [d.clone(), c.clone()])
            .collect()
    }
}

fn check_exposure(debtor: &BankId, creditor: &BankId, amount: f64) -> Result<()> {
    let reason = if debtor == creditor {
        "self-entry"
    } else if !amount.is_finite() {
        "non-finite amount"
    } else if amount <= 0.0 {
        "non-positive amount"
    } else {
        return Ok(());
    };
    Err(Error::InvalidExposure {
        debtor: debtor.clone(),
        creditor: creditor.clone(),
        reason,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BankRecord {
    pub id: BankId,
    pub capital: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_noninterbank_assets: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_probability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lgd: Option<f64>,
}

impl BankRecord {
    pub fn new(id: impl Into<BankId>, capital: f64) -> Self {
        BankRecord {
            id: id.into(),
            capital,
            total_noninterbank_assets: None,
            default_probability: None,
            lgd: None,
        }
    }

    pub fn with_external_assets(mut self, assets: f64) -> Self {
        self.total_noninterbank_assets = Some(assets);
        self
    }
}

pub type BankRecords = BTreeMap<BankId, BankRecord>;

/// Convenience for building record maps in tests and examples.
pub fn bank_records<I, S>(items: I) -> BankRecords
where
    I: IntoIterator<Item = (S, f64)>,
    S: Into<BankId>,
{
    items
        .into_iter()
        .map(|(id, c)| {
            let id = id.into();
            (id.clone(), BankRecord::new(id, c))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    SelfEntry {
        layer: LayerId,
        bank: BankId,
    },
    NonPositiveAmount {
        layer: LayerId,
        debtor: BankId,
        creditor: BankId,
        amount: f64,
    },
    NonFinite {
        layer: LayerId,
        debtor: BankId,
        creditor: BankId,
    },
    MissingBankRecord {
        bank: BankId,
    },
    MismatchedRecordId {
        key: BankId,
        record: BankId,
    },
    EmptyId,
    NegativeCapital {
        bank: BankId,
        capital: f64,
    },
    FieldOutOfRange {
        bank: BankId,
        field: &'static str,
        value: f64,
    },
}

impl Violation {
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::SelfEntry { .. } => "self-entry",
            Violation::NonPositiveAmount { .. } => "non-positive amount",
            Violation::NonFinite { .. } => "non-finite amount",
            Violation::MissingBankRecord { .. } => "missing bank record",
            Violation::MismatchedRecordId { .. } => "record id mismatch",
            Violation::EmptyId => "empty identifier",
            Violation::NegativeCapital { .. } => "negative capital",
            Violation::FieldOutOfRange { .. } => "field out of range",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SelfEntry { layer, bank } => {
                write!(f, "self-entry {bank} -> {bank} in layer {layer}")
            }
            Violation::NonPositiveAmount {
                layer,
                debtor,
                creditor,
                amount,
            } => write!(
                f,
                "non-positive amount {amount} for {debtor} -> {creditor} in layer {layer}"
            ),
            Violation::NonFinite {
                layer,
                debtor,
                creditor,
            } => write!(
                f,
                "non-finite amount for {debtor} -> {creditor} in layer {layer}"
            ),
            Violation::MissingBankRecord { bank } => write!(f, "no bank record for {bank}"),
            Violation::MismatchedRecordId { key, record } => {
                write!(f, "record keyed {key} carries id {record}")
            }
            Violation::EmptyId => f.write_str("empty bank or layer identifier"),
            Violation::NegativeCapital { bank, capital } => {
                write!(f, "negative capital {capital} for {bank}")
            }
            Violation::FieldOutOfRange { bank, field, value } => {
                write!(f, "{field} = {value} out of range for {bank}")
            }
        }
    }
}

/// Entry-level checks of one matrix (no bank-record checks).
pub fn validate_matrix(layer: &LayerId, m: &LiabilityMatrix) -> Vec<Violation> {
    let mut out = Vec::new();
    for (d, c, a) in m.iter() {
        if d.as_str().is_empty() || c.as_str().is_empty() {
            out.push(Violation::EmptyId);
        }
        if d == c {
            out.push(Violation::SelfEntry {
                layer: layer.clone(),
                bank: d.clone(),
            });
        }
        if !a.is_finite() {
            out.push(Violation::NonFinite {
                layer: layer.clone(),
                debtor: d.clone(),
                creditor: c.clone(),
            });
        } else if a <= 0.0 {
            out.push(Violation::NonPositiveAmount {
                layer: layer.clone(),
                debtor: d.clone(),
                creditor: c.clone(),
                amount: a,
            });
        }
    }
    out
}

/// One trading day of the multiplex. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiLayerSnapshot {
    date: NaiveDate,
    layers: BTreeMap<LayerId, LiabilityMatrix>,
    banks: BankRecords,
}

impl MultiLayerSnapshot {
    pub fn new(
        date: NaiveDate,
        layers: BTreeMap<LayerId, LiabilityMatrix>,
        banks: BankRecords,
    ) -> Result<Self> {
        let s = Self::new_unchecked(date, layers, banks);
        let report = s.validate();
        if report.is_empty() {
            Ok(s)
        } else {
            Err(Error::Invalid(report))
        }
    }

    pub fn new_unchecked(
        date: NaiveDate,
        layers: BTreeMap<LayerId, LiabilityMatrix>,
        banks: BankRecords,
    ) -> Self {
        MultiLayerSnapshot {
            date,
            layers,
            banks,
        }
    }

    pub fn date(&self) -> NaiveDate {
        self.date
    }

    pub fn layers(&self) -> &BTreeMap<LayerId, LiabilityMatrix> {
        &self.layers
    }

    pub fn layer(&self, id: &LayerId) -> Result<&LiabilityMatrix> {
        self.layers
            .get(id)
            .ok_or_else(|| Error::UnknownLayer(id.clone()))
    }

    pub fn layer_ids(&self) -> impl Iterator<Item = &LayerId> {
        self.layers.keys()
    }

    pub fn banks(&self) -> &BankRecords {
        &self.banks
    }

    pub fn bank_count(&self) -> usize {
        self.banks.len()
    }

    /// Returns every violation found; empty iff the snapshot is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (layer, m) in &self.layers {
            if layer.as_str().is_empty() {
                out.push(Violation::EmptyId);
            }
            out.extend(validate_matrix(layer, m));
            for b in m.banks() {
                if !self.banks.contains_key(&b)
                    && !out
                        .iter()
                        .any(|v| matches!(v, Violation::MissingBankRecord { bank } if *bank == b))
                {
                    out.push(Violation::MissingBankRecord { bank: b });
                }
            }
        }
        for (key, rec) in &self.banks {
            if key.as_str().is_empty() {
                out.push(Violation::EmptyId);
            }
            if *key != rec.id {
                out.push(Violation::MismatchedRecordId {
                    key: key.clone(),
                    record: rec.id.clone(),
                });
            }
            if !rec.capital.is_finite() || rec.capital < 0.0 {
                out.push(Violation::NegativeCapital {
                    bank: key.clone(),
                    capital: rec.capital,
                });
            }
            let unit = [
                ("default_probability", rec.default_probability),
                ("lgd", rec.lgd),
            ];
            for (field, value) in unit {
                if let Some(v) = value {
                    if !(0.0..=1.0).contains(&v) {
                        out.push(Violation::FieldOutOfRange {
                            bank: key.clone(),
                            field,
                            value: v,
                        });
                    }
                }
            }
            if let Some(a) = rec.total_noninterbank_assets {
                if !a.is_finite() || a < 0.0 {
                    out.push(Violation::FieldOutOfRange {
                        bank: key.clone(),
                        field: "total_noninterbank_assets",
                        value: a,
                    });
                }
            }
        }
        out
    }

    /// Entrywise sum over all layers.
    pub fn combined(&self) -> LiabilityMatrix {
        combine_layers(self.layers.values())
    }

    /// Combined matrix over a subset of layers.
    pub fn combined_of<'a, I>(&self, ids: I) -> Result<LiabilityMatrix>
    where
        I: IntoIterator<Item = &'a LayerId>,
    {
        let ms = ids
            .into_iter()
            .map(|id| self.layer(id))
            .collect::<Result<Vec<_>>>()?;
        Ok(combine_layers(ms))
    }

    /// Interbank assets of `i` in the combined network.
    pub fn interbank_assets(&self, i: &BankId) -> Result<f64> {
        if !self.banks.contains_key(i) {
            return Err(Error::UnknownBank(i.clone()));
        }
        Ok(self.layers.values().map(|m| m.interbank_assets(i)).sum())
    }

    /// Copy of this snapshot restricted to `ids`.
    pub fn with_layers(&self, ids: &[LayerId]) -> Result<Self> {
        let mut layers = BTreeMap::new();
        for id in ids {
            layers.insert(id.clone(), self.layer(id)?.clone());
        }
        Ok(Self::new_unchecked(self.date, layers, self.banks.clone()))
    }

    /// Copy of this snapshot with one layer replaced.
    pub fn with_layer_replaced(&self, id: &LayerId, m: LiabilityMatrix) -> Self {
        let mut layers = self.layers.clone();
        layers.insert(id.clone(), m);
        Self::new_unchecked(self.date, layers, self.banks.clone())
    }
}

/// Entrywise sum; absent entries count as zero.
pub fn combine_layers<'a, I>(layers: I) -> LiabilityMatrix
where
    I: IntoIterator<Item = &'a LiabilityMatrix>,
{
    let mut entries: BTreeMap<(BankId, BankId), f64> = BTreeMap::new();
    for m in layers {
        for ((d, c), a) in &m.entries {
            *entries.entry((d.clone(), c.clone())).or_insert(0.0) += *a;
        }
    }
    LiabilityMatrix { entries }
}

/// Dense positions for a fixed, sorted bank set.
#[derive(Clone, Debug)]
pub struct BankIndex {
    ids: Vec<BankId>,
    pos: HashMap<BankId, usize>,
}

impl BankIndex {
    pub fn new<I: IntoIterator<Item = BankId>>(ids: I) -> Self {
        let set: BTreeSet<BankId> = ids.into_iter().collect();
        let ids: Vec<BankId> = set.into_iter().collect();
        let pos = ids
            .iter()
            .enumerate()
            .map(|(k, b)| (b.clone(), k))
            .collect();
        BankIndex { ids, pos }
    }

    pub fn of_records(banks: &BankRecords) -> Self {
        Self::new(banks.keys().cloned())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn position(&self, id: &BankId) -> Result<usize> {
        self.pos
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownBank(id.clone()))
    }

    pub fn id(&self, k: usize) -> &BankId {
        &self.ids[k]
    }

    pub fn ids(&self) -> &[BankId] {
        &self.ids
    }
}
