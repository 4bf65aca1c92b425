//! Layer similarity, topology statistics, exposure-size distributions and the
//! in-degree preserving null model.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::AddAssign;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::debtrank::Network;
use crate::error::{Error, Result};
use crate::exposure::{BankId, BankRecords, LayerId, LiabilityMatrix, MultiLayerSnapshot};

/// |E_a ∩ E_b| / |E_a ∪ E_b| over unweighted directed edges; 0 when both are empty.
pub fn jaccard(a: &LiabilityMatrix, b: &LiabilityMatrix) -> f64 {
    let ea = a.edges();
    let eb = b.edges();
    let union = ea.union(&eb).count();
    if union == 0 {
        return 0.0;
    }
    ea.intersection(&eb).count() as f64 / union as f64
}

/// Pearson correlation. `None` when either input has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: x.len(),
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Ok(None);
    }
    Ok(Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)))
}

/// |E| / (b (b - 1)).
pub fn density(m: &LiabilityMatrix, bank_count: usize) -> Result<f64> {
    if bank_count < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: bank_count,
        });
    }
    Ok(m.len() as f64 / (bank_count * (bank_count - 1)) as f64)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BankScope {
    /// Every bank of the snapshot; inactive banks contribute zeros.
    #[default]
    All,
    /// Only banks with at least one edge in either layer.
    ActiveOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionalCorrelations {
    pub all: Option<f64>,
    pub inbound: Option<f64>,
    pub outbound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerPairStats {
    pub layer_a: LayerId,
    pub layer_b: LayerId,
    pub jaccard: f64,
    /// Weighted in-degrees (interbank assets).
    pub rho_exposure: Option<f64>,
    /// Weighted out-degrees (interbank liabilities).
    pub rho_liability: Option<f64>,
    /// Per-layer DebtRank.
    pub rho_debtrank: Option<f64>,
    pub degree: DirectionalCorrelations,
    pub weight: DirectionalCorrelations,
}

/// Per-bank degree vectors of one layer over a fixed bank order.
struct LayerProfile {
    in_deg: Vec<f64>,
    out_deg: Vec<f64>,
    in_w: Vec<f64>,
    out_w: Vec<f64>,
}

impl LayerProfile {
    fn new(m: &LiabilityMatrix, ids: &[BankId]) -> Self {
        let pos: BTreeMap<&BankId, usize> = ids.iter().enumerate().map(|(k, b)| (b, k)).collect();
        let n = ids.len();
        let mut p = LayerProfile {
            in_deg: vec![0.0; n],
            out_deg: vec![0.0; n],
            in_w: vec![0.0; n],
            out_w: vec![0.0; n],
        };
        for (d, c, a) in m.iter() {
            if let Some(&k) = pos.get(d) {
                p.out_deg[k] += 1.0;
                p.out_w[k] += a;
            }
            if let Some(&k) = pos.get(c) {
                p.in_deg[k] += 1.0;
                p.in_w[k] += a;
            }
        }
        p
    }
}

fn sum_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn directional(
    a_in: &[f64],
    a_out: &[f64],
    b_in: &[f64],
    b_out: &[f64],
) -> Result<DirectionalCorrelations> {
    Ok(DirectionalCorrelations {
        all: pearson(&sum_vec(a_in, a_out), &sum_vec(b_in, b_out))?,
        inbound: pearson(a_in, b_in)?,
        outbound: pearson(a_out, b_out)?,
    })
}

fn layer_debtranks(s: &MultiLayerSnapshot, id: &LayerId) -> Result<BTreeMap<BankId, f64>> {
    let net = Network::layer(s, id)?;
    let r = if net.total_value() > 0.0 {
        net.single_seed_debtranks(1.0)?
    } else {
        vec![0.0; net.bank_count()]
    };
    Ok(net.index().ids().iter().cloned().zip(r).collect())
}

pub fn layer_pair_stats(
    s: &MultiLayerSnapshot,
    a: &LayerId,
    b: &LayerId,
) -> Result<LayerPairStats> {
    layer_pair_stats_with(s, a, b, BankScope::All)
}

pub fn layer_pair_stats_with(
    s: &MultiLayerSnapshot,
    a: &LayerId,
    b: &LayerId,
    scope: BankScope,
) -> Result<LayerPairStats> {
    let ma = s.layer(a)?;
    let mb = s.layer(b)?;
    let ids: Vec<BankId> = match scope {
        BankScope::All => s.banks().keys().cloned().collect(),
        BankScope::ActiveOnly => {
            let active: BTreeSet<BankId> = ma.banks().union(&mb.banks()).cloned().collect();
            active.into_iter().collect()
        }
    };
    let pa = LayerProfile::new(ma, &ids);
    let pb = LayerProfile::new(mb, &ids);
    let ra = layer_debtranks(s, a)?;
    let rb = layer_debtranks(s, b)?;
    let pick = |r: &BTreeMap<BankId, f64>| ids.iter().map(|k| r[k]).collect::<Vec<_>>();
    Ok(LayerPairStats {
        layer_a: a.clone(),
        layer_b: b.clone(),
        jaccard: jaccard(ma, mb),
        rho_exposure: pearson(&pa.in_w, &pb.in_w)?,
        rho_liability: pearson(&pa.out_w, &pb.out_w)?,
        rho_debtrank: pearson(&pick(&ra), &pick(&rb))?,
        degree: directional(&pa.in_deg, &pa.out_deg, &pb.in_deg, &pb.out_deg)?,
        weight: directional(&pa.in_w, &pa.out_w, &pb.in_w, &pb.out_w)?,
    })
}

/// Stats for every unordered pair of distinct layers, in layer order.
pub fn all_layer_pairs(s: &MultiLayerSnapshot) -> Result<Vec<LayerPairStats>> {
    let ids: Vec<&LayerId> = s.layer_ids().collect();
    let mut out = Vec::new();
    for (k, a) in ids.iter().enumerate() {
        for b in &ids[k + 1..] {
            out.push(layer_pair_stats(s, a, b)?);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub value: f64,
    /// Fraction of samples `<= value`.
    pub cdf: f64,
    pub ccdf: f64,
}

/// Empirical CDF at each distinct sample value, ascending.
pub fn exposure_cdf(samples: &[f64]) -> Result<Vec<CdfPoint>> {
    if samples.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut out: Vec<CdfPoint> = Vec::new();
    for (k, &x) in xs.iter().enumerate() {
        let cdf = (k + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.value == x => {
                last.cdf = cdf;
                last.ccdf = 1.0 - cdf;
            }
            _ => out.push(CdfPoint {
                value: x,
                cdf,
                ccdf: 1.0 - cdf,
            }),
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum XminStrategy {
    /// Pick the x_min that minimizes the KS distance.
    Scan,
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions {
    pub xmin: XminStrategy,
    /// Parametric bootstrap replicates for the p-value; 0 skips it.
    pub replicates: usize,
    pub seed: u64,
    pub min_tail: usize,
    /// Upper bound on x_min candidates tried by the scan.
    pub max_candidates: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            xmin: XminStrategy::Scan,
            replicates: 1000,
            seed: 0,
            min_tail: 10,
            max_candidates: 200,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub xmin: f64,
    pub alpha: f64,
    pub ks_statistic: f64,
    pub p_value: Option<f64>,
    pub n_tail: usize,
    pub n: usize,
}

impl PowerLawFit {
    /// True when the bootstrap rejects the power law at the 5% level.
    pub fn rejected(&self) -> bool {
        self.p_value.is_some_and(|p| p < 0.05)
    }
}

/// Continuous power-law fit: MLE exponent above x_min, KS distance, and a
/// semi-parametric bootstrap p-value.
pub fn powerlaw_fit(samples: &[f64], opts: &FitOptions) -> Result<PowerLawFit> {
    if samples.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::OutOfRange {
            name: "power-law sample",
            value: samples
                .iter()
                .copied()
                .find(|x| !(x.is_finite() && *x > 0.0))
                .unwrap_or(f64::NAN),
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let (xmin, alpha, ks, n_tail) = fit_sorted(&xs, opts)?;
    let p_value = if opts.replicates == 0 {
        None
    } else {
        Some(bootstrap_p(&xs, xmin, alpha, ks, n_tail, opts))
    };
    Ok(PowerLawFit {
        xmin,
        alpha,
        ks_statistic: ks,
        p_value,
        n_tail,
        n: xs.len(),
    })
}

/// Fits sorted samples; returns (x_min, alpha, KS distance, tail size).
fn fit_sorted(xs: &[f64], opts: &FitOptions) -> Result<(f64, f64, f64, usize)> {
    match opts.xmin {
        XminStrategy::Fixed(xmin) => {
            let start = xs.partition_point(|x| *x < xmin);
            let tail = &xs[start..];
            if tail.len() < opts.min_tail {
                return Err(Error::InsufficientData {
                    needed: opts.min_tail,
                    got: tail.len(),
                });
            }
            let log_sum: f64 = tail.iter().map(|x| (x / xmin).ln()).sum();
            let alpha = mle_alpha(tail.len(), log_sum)?;
            Ok((xmin, alpha, ks_distance(tail, xmin, alpha), tail.len()))
        }
        XminStrategy::Scan => scan_xmin(xs, opts),
    }
}

fn mle_alpha(n: usize, log_sum: f64) -> Result<f64> {
    if log_sum <= 0.0 {
        return Err(Error::DegenerateTail);
    }
    Ok(1.0 + n as f64 / log_sum)
}

/// Max distance between the empirical CDF of `tail` (sorted, all >= xmin)
/// and the fitted power-law CDF.
fn ks_distance(tail: &[f64], xmin: f64, alpha: f64) -> f64 {
    let n = tail.len() as f64;
    tail.iter()
        .enumerate()
        .map(|(k, x)| {
            let model = 1.0 - (x / xmin).powf(1.0 - alpha);
            let above = (k + 1) as f64 / n - model;
            let below = model - k as f64 / n;
            above.abs().max(below.abs())
        })
        .fold(0.0, f64::max)
}

fn scan_xmin(xs: &[f64], opts: &FitOptions) -> Result<(f64, f64, f64, usize)> {
    let n = xs.len();
    // suffix sums of ln x
    let mut suffix = vec![0.0; n + 1];
    for k in (0..n).rev() {
        suffix[k] = suffix[k + 1] + xs[k].ln();
    }
    let mut starts: Vec<usize> = Vec::new();
    for k in 0..n {
        if n - k < opts.min_tail {
            break;
        }
        if k == 0 || xs[k] != xs[k - 1] {
            starts.push(k);
        }
    }
    if starts.is_empty() {
        return Err(Error::InsufficientData {
            needed: opts.min_tail,
            got: n,
        });
    }
    if starts.len() > opts.max_candidates.max(1) {
        let m = opts.max_candidates.max(1);
        let step = starts.len() as f64 / m as f64;
        starts = (0..m).map(|i| starts[(i as f64 * step) as usize]).collect();
    }
    let mut best: Option<(f64, f64, f64, usize)> = None;
    for k in starts {
        let xmin = xs[k];
        let n_tail = n - k;
        let log_sum = suffix[k] - n_tail as f64 * xmin.ln();
        let Ok(alpha) = mle_alpha(n_tail, log_sum) else {
            continue;
        };
        let d = ks_distance(&xs[k..], xmin, alpha);
        if best.is_none_or(|b| d < b.2) {
            best = Some((xmin, alpha, d, n_tail));
        }
    }
    best.ok_or(Error::DegenerateTail)
}

fn bootstrap_p(
    xs: &[f64],
    xmin: f64,
    alpha: f64,
    ks: f64,
    n_tail: usize,
    opts: &FitOptions,
) -> f64 {
    let n = xs.len();
    let body = &xs[..n - n_tail];
    let tail_frac = n_tail as f64 / n as f64;
    let inner = FitOptions {
        replicates: 0,
        ..*opts
    };
    let outcomes: Vec<Option<bool>> = (0..opts.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(r));
            let mut synth: Vec<f64> = (0..n)
                .map(|_| {
                    if body.is_empty() || rng.random::<f64>() < tail_frac {
                        let u: f64 = rng.random();
                        xmin * (1.0 - u).powf(-1.0 / (alpha - 1.0))
                    } else {
                        body[rng.random_range(0..body.len())]
                    }
                })
                .collect();
            synth.sort_by(f64::total_cmp);
            fit_sorted(&synth, &inner).ok().map(|(_, _, d, _)| d >= ks)
        })
        .collect();
    let valid: Vec<bool> = outcomes.into_iter().flatten().collect();
    if valid.is_empty() {
        return 0.0;
    }
    valid.iter().filter(|x| **x).count() as f64 / valid.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeFit {
    pub lo: f64,
    pub hi: f64,
    pub alpha: f64,
    pub n: usize,
}

/// MLE exponent of a power law truncated to `[lo, hi]`, for fitting a chosen
/// region of a distribution.
pub fn powerlaw_fit_range(samples: &[f64], lo: f64, hi: f64) -> Result<RangeFit> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::OutOfRange {
            name: "range lower bound",
            value: lo,
            lo: 0.0,
            hi,
        });
    }
    let logs: Vec<f64> = samples
        .iter()
        .filter(|x| **x >= lo && **x <= hi)
        .map(|x| x.ln())
        .collect();
    if logs.len() < 10 {
        return Err(Error::InsufficientData {
            needed: 10,
            got: logs.len(),
        });
    }
    let n = logs.len() as f64;
    let mean_log = logs.iter().sum::<f64>() / n;
    let (llo, lhi) = (lo.ln(), hi.ln());
    // average log-likelihood of density x^-a / Z(a) on [lo, hi]
    let loglik = |a: f64| -> f64 {
        let e = 1.0 - a;
        let log_z = if e.abs() < 1e-9 {
            (lhi - llo).ln()
        } else if e > 0.0 {
            e * lhi + (-(-(e * (lhi - llo))).exp_m1()).ln() - e.ln()
        } else {
            e * llo + (-(e * (lhi - llo)).exp_m1()).ln() - (-e).ln()
        };
        -a * mean_log - log_z
    };
    let (mut a, mut b) = (-10.0f64, 20.0f64);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    while b - a > 1e-10 {
        if loglik(c) > loglik(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    Ok(RangeFit {
        lo,
        hi,
        alpha: (a + b) / 2.0,
        n: logs.len(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NullModelSample {
    pub matrix: LiabilityMatrix,
    pub seed: u64,
    /// Weighted in-degree of every bank, identical before and after rewiring.
    pub preserved: BTreeMap<BankId, f64>,
}

/// Reassigns the debtor of every exposure uniformly among banks other than
/// its creditor. Parallel entries that land on the same pair are summed.
pub fn null_model_rewire(
    m: &LiabilityMatrix,
    banks: &BankRecords,
    seed: u64,
) -> Result<NullModelSample> {
    let ids: Vec<BankId> = banks.keys().cloned().collect();
    let rewired = rewire_entries(m.iter(), &ids, &mut rng_for(seed, 0))?;
    let mut preserved: BTreeMap<BankId, f64> = ids.iter().map(|b| (b.clone(), 0.0)).collect();
    for (_, c, a) in m.iter() {
        *preserved.entry(c.clone()).or_insert(0.0) += a;
    }
    Ok(NullModelSample {
        matrix: LiabilityMatrix::from_entries_unchecked(rewired),
        seed,
        preserved,
    })
}

/// Integer amounts, e.g. cents.
pub type CentMatrix = BTreeMap<(BankId, BankId), i64>;

pub fn to_cents(m: &LiabilityMatrix) -> CentMatrix {
    m.iter()
        .map(|(d, c, a)| ((d.clone(), c.clone()), (a * 100.0).round() as i64))
        .collect()
}

/// Same draws as [`null_model_rewire`] on integer amounts, so column sums are
/// preserved bit for bit.
pub fn null_model_rewire_cents(
    m: &CentMatrix,
    banks: &BankRecords,
    seed: u64,
) -> Result<CentMatrix> {
    let ids: Vec<BankId> = banks.keys().cloned().collect();
    rewire_entries(
        m.iter().map(|((d, c), a)| (d, c, *a)),
        &ids,
        &mut rng_for(seed, 0),
    )
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn rewire_entries<'a, T, I>(
    entries: I,
    ids: &[BankId],
    rng: &mut ChaCha8Rng,
) -> Result<BTreeMap<(BankId, BankId), T>>
where
    T: Copy + AddAssign + 'a,
    I: Iterator<Item = (&'a BankId, &'a BankId, T)>,
{
    if ids.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: ids.len(),
        });
    }
    let mut out: BTreeMap<(BankId, BankId), T> = BTreeMap::new();
    for (_, creditor, amount) in entries {
        let c = ids
            .binary_search(creditor)
            .map_err(|_| Error::UnknownBank(creditor.clone()))?;
        let mut k = rng.random_range(0..ids.len() - 1);
        if k >= c {
            k += 1;
        }
        out.entry((ids[k].clone(), creditor.clone()))
            .and_modify(|x| *x += amount)
            .or_insert(amount);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullBand {
    pub observed: f64,
    pub mean: f64,
    pub std_dev: f64,
    pub p025: f64,
    pub p975: f64,
    pub replicates: usize,
    /// Observed value lies outside the central 95% of the null samples, by
    /// more than a relative 1e-9.
    pub significant: bool,
}

/// Summarizes `statistic(seed_i)` over `seed_i = base_seed + i`.
pub fn null_model_band<F>(
    observed: f64,
    replicates: usize,
    base_seed: u64,
    statistic: F,
) -> Result<NullBand>
where
    F: Fn(u64) -> Result<f64> + Sync,
{
    if replicates < 100 {
        return Err(Error::InsufficientData {
            needed: 100,
            got: replicates,
        });
    }
    let mut xs = (0..replicates as u64)
        .into_par_iter()
        .map(|i| statistic(base_seed.wrapping_add(i)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(summarize(observed, &mut xs))
}

fn summarize(observed: f64, xs: &mut [f64]) -> NullBand {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let p025 = percentile(xs, 0.025);
    let p975 = percentile(xs, 0.975);
    // statistics the null model preserves differ from the observed value only by rounding
    let tol = 1e-9 * observed.abs().max(1.0);
    NullBand {
        observed,
        mean,
        std_dev: var.sqrt(),
        p025,
        p975,
        replicates: xs.len(),
        significant: observed < p025 - tol || observed > p975 + tol,
    }
}

/// Linear interpolation between order statistics of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Null band of a single-matrix statistic under rewiring of `m`.
pub fn null_model_band_for_matrix<F>(
    m: &LiabilityMatrix,
    banks: &BankRecords,
    replicates: usize,
    base_seed: u64,
    statistic: F,
) -> Result<NullBand>
where
    F: Fn(&LiabilityMatrix) -> f64 + Sync,
{
    null_model_band(statistic(m), replicates, base_seed, |seed| {
        Ok(statistic(&null_model_rewire(m, banks, seed)?.matrix))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairNullBands {
    pub layer_a: LayerId,
    pub layer_b: LayerId,
    pub jaccard: NullBand,
    pub rho_exposure: NullBand,
    pub rho_liability: NullBand,
}

/// Bands for the overlap and degree correlations of a layer pair, rewiring
/// both layers independently in each replicate. Undefined correlations
/// count as 0.
pub fn layer_pair_null_bands(
    s: &MultiLayerSnapshot,
    a: &LayerId,
    b: &LayerId,
    replicates: usize,
    base_seed: u64,
) -> Result<PairNullBands> {
    if replicates < 100 {
        return Err(Error::InsufficientData {
            needed: 100,
            got: replicates,
        });
    }
    let ma = s.layer(a)?;
    let mb = s.layer(b)?;
    let ids: Vec<BankId> = s.banks().keys().cloned().collect();
    let triple = |x: &LiabilityMatrix, y: &LiabilityMatrix| -> Result<[f64; 3]> {
        let px = LayerProfile::new(x, &ids);
        let py = LayerProfile::new(y, &ids);
        Ok([
            jaccard(x, y),
            pearson(&px.in_w, &py.in_w)?.unwrap_or(0.0),
            pearson(&px.out_w, &py.out_w)?.unwrap_or(0.0),
        ])
    };
    let observed = triple(ma, mb)?;
    let samples = (0..replicates as u64)
        .into_par_iter()
        .map(|i| {
            let seed = base_seed.wrapping_add(i);
            let ra = rewire_entries(ma.iter(), &ids, &mut rng_for(seed, 0))?;
            let rb = rewire_entries(mb.iter(), &ids, &mut rng_for(seed, 1))?;
            triple(
                &LiabilityMatrix::from_entries_unchecked(ra),
                &LiabilityMatrix::from_entries_unchecked(rb),
            )
        })
        .collect::<Result<Vec<[f64; 3]>>>()?;
    let band = |k: usize| {
        let mut xs: Vec<f64> = samples.iter().map(|t| t[k]).collect();
        summarize(observed[k], &mut xs)
    };
    Ok(PairNullBands {
        layer_a: a.clone(),
        layer_b: b.clone(),
        jaccard: band(0),
        rho_exposure: band(1),
        rho_liability: band(2),
    })
}
