//! Command-line front end.
//!
//! Every command reads a dataset, processes each snapshot date in range
//! independently, and writes one report sorted by date.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::debtrank::{average_debtrank, sr_profile_with_psi, Network, Scope, ValueMode};
use crate::error::{Error, Result};
use crate::exposure::{BankId, LayerId, MultiLayerSnapshot};
use crate::io::{
    parse_exposures, write_capitals, write_exposures, write_probabilities, write_report,
    DatasetBundle, ProbabilityRow, ProbabilityTable, ReportFormat, Tabular, BROADCAST,
};
use crate::loss::{
    exposure_marginals, loss_report, LossGivenDefault, MarginalMethod, DEFAULT_EXACT_CAP,
};
use crate::report::{
    seed_label, AverageRow, BandRow, CdfRow, DebtRankRow, FitRow, MarginalRow, PairStatsRow,
};
use crate::stats::{
    all_layer_pairs, density, exposure_cdf, layer_pair_null_bands, powerlaw_fit, FitOptions,
    XminStrategy,
};
use crate::synth::{generate_multiplex, GeneratorConfig};

pub const THREADS_ENV: &str = "MULTIRISK_THREADS";

/// A validated command line.
#[derive(Clone, Debug, Parser)]
#[command(
    name = "multirisk",
    version,
    about = "Systemic risk analytics for layered interbank networks"
)]
pub struct CommandPlan {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// DebtRank of every bank (or of one distressed set) per layer and combined.
    Debtrank(DebtRankArgs),
    /// Banks ranked by combined DebtRank with the per-layer decomposition.
    Profile(ProfileArgs),
    /// Expected systemic and credit loss per date.
    ElSyst(LossArgs),
    /// Systemic and credit marginal loss of every exposure.
    Marginal(MarginalArgs),
    /// Overlap and correlations for every pair of layers.
    Stats(StatsArgs),
    /// Null-model bands for layer-pair statistics.
    Nullmodel(NullArgs),
    /// Power-law fit or empirical CDF of exposure sizes.
    Fit(FitArgs),
    /// Write a synthetic dataset.
    Generate(GenerateArgs),
}

#[derive(Clone, Debug, Args)]
pub struct InputArgs {
    /// Exposure files (`date,layer,debtor,creditor,amount`); comma-separated or repeated.
    #[arg(long, required = true, value_delimiter = ',')]
    pub exposures: Vec<PathBuf>,
    /// Capital file (`date,bank,capital[,total_assets]`).
    #[arg(long)]
    pub capitals: PathBuf,
    /// Restrict to these layers.
    #[arg(long, value_delimiter = ',')]
    pub layers: Option<Vec<String>>,
    #[arg(long)]
    pub from: Option<NaiveDate>,
    #[arg(long)]
    pub to: Option<NaiveDate>,
}

#[derive(Clone, Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ReportFormat::Csv,
            Format::Json => ReportFormat::Json,
        }
    }
}

#[derive(Clone, Debug, Args)]
pub struct DebtRankArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Initial distress of the seed banks, in (0, 1].
    #[arg(long, default_value_t = 1.0, value_parser = parse_psi)]
    pub psi: f64,
    /// Distress this set of banks jointly instead of each bank alone.
    #[arg(long, value_delimiter = ',')]
    pub distress: Option<Vec<String>>,
    /// Include non-interbank assets in economic values.
    #[arg(long)]
    pub external_assets: bool,
    /// Loss rate on non-interbank assets.
    #[arg(long, default_value_t = 0.6, value_parser = parse_unit)]
    pub r_loss: f64,
    /// Emit the average DebtRank per scope instead of per-bank rows.
    #[arg(long)]
    pub average: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 1.0, value_parser = parse_psi)]
    pub psi: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct ProbabilityArgs {
    /// Probability file (`date,bank,pd` or `date,bank,spread`), or a single
    /// probability applied to every bank.
    #[arg(long)]
    pub pd: String,
    /// Recovery rate used to convert spreads.
    #[arg(long, default_value_t = 0.4, value_parser = parse_recovery)]
    pub recovery: f64,
}

#[derive(Clone, Debug, Args)]
pub struct LossArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub probabilities: ProbabilityArgs,
    #[arg(long, default_value_t = 0.6, value_parser = parse_unit)]
    pub lgd: f64,
    /// Largest bank count for which the exact expected loss is computed.
    #[arg(long, default_value_t = DEFAULT_EXACT_CAP)]
    pub exact_cap: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct MarginalArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub probabilities: ProbabilityArgs,
    #[arg(long, default_value_t = 0.6, value_parser = parse_unit)]
    pub lgd: f64,
    /// Use the exact expected loss (bank count must be within the cap).
    #[arg(long)]
    pub exact: bool,
    #[arg(long, default_value_t = DEFAULT_EXACT_CAP)]
    pub exact_cap: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Null-model replicates for significance marks; 0 disables them.
    #[arg(long, default_value_t = 100, value_parser = parse_replicates)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct NullArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 1000, value_parser = parse_replicates)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct FitArgs {
    /// Exposure files; each date and layer is fitted separately.
    #[arg(
        long,
        value_delimiter = ',',
        required_unless_present = "samples",
        conflicts_with = "samples"
    )]
    pub exposures: Vec<PathBuf>,
    /// A one-column CSV with header `value`.
    #[arg(long)]
    pub samples: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub layers: Option<Vec<String>>,
    #[arg(long)]
    pub from: Option<NaiveDate>,
    #[arg(long)]
    pub to: Option<NaiveDate>,
    /// Fixed lower cutoff; scanned when absent.
    #[arg(long)]
    pub xmin: Option<f64>,
    /// Bootstrap replicates for the p-value; 0 skips it.
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Emit the empirical CDF instead of a fit.
    #[arg(long)]
    pub cdf: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 30)]
    pub banks: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub days: usize,
    /// Cross-layer participation correlation in [0, 1].
    #[arg(long, default_value_t = 0.5, value_parser = parse_unit)]
    pub rho: f64,
    /// Broadcast default probability written to probabilities.csv.
    #[arg(long, default_value_t = 0.01, value_parser = parse_unit)]
    pub pd: f64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    s.parse::<f64>().map_err(|e| format!("`{s}`: {e}"))
}

fn parse_psi(s: &str) -> std::result::Result<f64, String> {
    let x = parse_f64(s)?;
    if x > 0.0 && x <= 1.0 {
        Ok(x)
    } else {
        Err(format!("{x} is outside (0, 1]"))
    }
}

fn parse_unit(s: &str) -> std::result::Result<f64, String> {
    let x = parse_f64(s)?;
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(format!("{x} is outside [0, 1]"))
    }
}

fn parse_recovery(s: &str) -> std::result::Result<f64, String> {
    let x = parse_f64(s)?;
    if (0.0..1.0).contains(&x) {
        Ok(x)
    } else {
        Err(format!("{x} is outside [0, 1)"))
    }
}

fn parse_replicates(s: &str) -> std::result::Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("`{s}`: {e}"))?;
    if n == 0 || n >= 100 {
        Ok(n)
    } else {
        Err(format!(
            "{n} replicates is too few for a band; use 0 or at least 100"
        ))
    }
}

pub fn parse_args<I, T>(argv: I) -> std::result::Result<CommandPlan, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    CommandPlan::try_parse_from(argv)
}

/// Runs a plan and returns the process exit status: 0 on success, 1 for bad
/// input data, 2 when a computation fails.
pub fn run(plan: &CommandPlan) -> i32 {
    configure_threads();
    match execute(plan) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_data_error() {
                1
            } else {
                2
            }
        }
    }
}

fn configure_threads() {
    let n = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    // fails harmlessly if the pool was already built
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
}

pub fn execute(plan: &CommandPlan) -> Result<()> {
    match &plan.command {
        Command::Debtrank(a) => debtrank_cmd(a),
        Command::Profile(a) => {
            let snaps = load(&a.input, None)?.0;
            let rows = per_snapshot(&snaps, |s| sr_profile_with_psi(s, a.psi))?;
            emit(&rows[..], &a.output)
        }
        Command::ElSyst(a) => {
            let (snaps, probs) = load(&a.input, Some(&a.probabilities))?;
            let probs = probs.expect("requested");
            let lgd = LossGivenDefault::uniform(a.lgd);
            let rows = per_snapshot(&snaps, |s| {
                loss_report(s, &probs.for_banks(s.date(), s.banks())?, &lgd, a.exact_cap)
            })?;
            emit(&rows[..], &a.output)
        }
        Command::Marginal(a) => {
            let (snaps, probs) = load(&a.input, Some(&a.probabilities))?;
            let probs = probs.expect("requested");
            let lgd = LossGivenDefault::uniform(a.lgd);
            let method = if a.exact {
                MarginalMethod::Exact { cap: a.exact_cap }
            } else {
                MarginalMethod::Approx
            };
            let rows = per_snapshot(&snaps, |s| {
                let p = probs.for_banks(s.date(), s.banks())?;
                Ok(exposure_marginals(s, &p, &lgd, method)?
                    .into_iter()
                    .map(|marginal| MarginalRow {
                        date: s.date(),
                        marginal,
                    })
                    .collect::<Vec<_>>())
            })?;
            emit(&rows.concat()[..], &a.output)
        }
        Command::Stats(a) => stats_cmd(a),
        Command::Nullmodel(a) => {
            let snaps = load(&a.input, None)?.0;
            let rows = per_snapshot(&snaps, |s| {
                let mut out = Vec::new();
                for (la, lb) in layer_pairs(s) {
                    let bands = layer_pair_null_bands(s, la, lb, a.replicates, a.seed)?;
                    for (name, band) in [
                        ("jaccard", bands.jaccard),
                        ("rho_exposure", bands.rho_exposure),
                        ("rho_liability", bands.rho_liability),
                    ] {
                        out.push(BandRow {
                            date: s.date(),
                            layer_a: la.clone(),
                            layer_b: lb.clone(),
                            statistic: name.into(),
                            band,
                        });
                    }
                }
                Ok(out)
            })?;
            emit(&rows.concat()[..], &a.output)
        }
        Command::Fit(a) => fit_cmd(a),
        Command::Generate(a) => generate_cmd(a),
    }
}

/// Maps `f` over snapshots in parallel; results stay in date order.
fn per_snapshot<T, F>(snaps: &[MultiLayerSnapshot], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&MultiLayerSnapshot) -> Result<T> + Sync,
{
    snaps.par_iter().map(&f).collect()
}

fn emit<R>(report: &R, out: &OutputArgs) -> Result<()>
where
    R: serde::Serialize + Tabular + ?Sized,
{
    match &out.out {
        Some(path) => write_report(report, out.format.into(), path),
        None => {
            let text = crate::io::render_report(report, out.format.into())?;
            let mut stdout = std::io::stdout().lock();
            match stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
            {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source: e,
                }),
                _ => Ok(()),
            }
        }
    }
}

fn in_range(date: NaiveDate, from: Option<NaiveDate>, to: Option<NaiveDate>) -> bool {
    from.is_none_or(|f| date >= f) && to.is_none_or(|t| date <= t)
}

fn layer_ids(layers: &Option<Vec<String>>) -> Option<Vec<LayerId>> {
    layers
        .as_ref()
        .map(|ls| ls.iter().map(|l| LayerId::new(l.trim())).collect())
}

fn load(
    input: &InputArgs,
    probs: Option<&ProbabilityArgs>,
) -> Result<(Vec<MultiLayerSnapshot>, Option<ProbabilityTable>)> {
    let file_probs = probs.and_then(|p| p.pd.parse::<f64>().is_err().then(|| PathBuf::from(&p.pd)));
    let bundle = DatasetBundle {
        exposures: input.exposures.clone(),
        capitals: input.capitals.clone(),
        probabilities: file_probs,
    };
    let data = bundle.load(probs.map_or(0.4, |p| p.recovery))?;
    let table = match (probs, data.probabilities) {
        (Some(p), None) => Some(ProbabilityTable::constant(
            p.pd.parse::<f64>().expect("numeric"),
        )?),
        (_, t) => t,
    };
    let layers = layer_ids(&input.layers);
    let snaps = data
        .snapshots
        .into_iter()
        .filter(|s| in_range(s.date(), input.from, input.to))
        .map(|s| match &layers {
            Some(ls) => s.with_layers(ls),
            None => Ok(s),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((snaps, table))
}

fn layer_pairs(s: &MultiLayerSnapshot) -> Vec<(&LayerId, &LayerId)> {
    let ids: Vec<&LayerId> = s.layer_ids().collect();
    let mut out = Vec::new();
    for (k, a) in ids.iter().enumerate() {
        for b in &ids[k + 1..] {
            out.push((*a, *b));
        }
    }
    out
}

fn debtrank_cmd(a: &DebtRankArgs) -> Result<()> {
    let snaps = load(&a.input, None)?.0;
    let mode = if a.external_assets {
        ValueMode::WithExternalAssets
    } else {
        ValueMode::InterbankOnly
    };
    let scopes = |s: &MultiLayerSnapshot| -> Result<Vec<(String, Network)>> {
        let mut out: Vec<(String, Network)> = s
            .layers()
            .iter()
            .map(|(l, m)| Ok((l.to_string(), Network::new(m, s.banks(), mode, a.r_loss)?)))
            .collect::<Result<_>>()?;
        out.push((
            "comb".into(),
            Network::new(&s.combined(), s.banks(), mode, a.r_loss)?,
        ));
        Ok(out)
    };
    if a.average {
        if a.distress.is_some() || a.external_assets {
            return Err(Error::InfeasibleConfig(
                "--average covers single-bank interbank DebtRank only".into(),
            ));
        }
        let rows = per_snapshot(&snaps, |s| {
            let mut out: Vec<AverageRow> = s
                .layer_ids()
                .map(|l| {
                    Ok(AverageRow {
                        date: s.date(),
                        scope: l.to_string(),
                        average_debtrank: average_debtrank(s, &Scope::Layer(l.clone()))?,
                    })
                })
                .collect::<Result<_>>()?;
            out.push(AverageRow {
                date: s.date(),
                scope: "comb".into(),
                average_debtrank: average_debtrank(s, &Scope::Combined)?,
            });
            Ok(out)
        })?;
        return emit(&rows.concat()[..], &a.output);
    }
    let rows = per_snapshot(&snaps, |s| {
        let mut out = Vec::new();
        for (scope, net) in scopes(s)? {
            let results = match &a.distress {
                Some(ids) => {
                    let seeds: Vec<BankId> = ids.iter().map(|b| BankId::new(b.trim())).collect();
                    vec![net.debtrank(&seeds, a.psi)?]
                }
                None => net.single_seed_sweep(a.psi)?,
            };
            for r in results {
                let seeds: Vec<BankId> = r.seed_set.iter().cloned().collect();
                out.push(DebtRankRow {
                    date: s.date(),
                    scope: scope.clone(),
                    seeds: seed_label(&seeds),
                    debtrank: r.r_including_initial,
                    debtrank_excluding_initial: r.r_excluding_initial,
                });
            }
        }
        Ok(out)
    })?;
    emit(&rows.concat()[..], &a.output)
}

fn stats_cmd(a: &StatsArgs) -> Result<()> {
    let snaps = load(&a.input, None)?.0;
    let rows = per_snapshot(&snaps, |s| {
        let b = s.bank_count();
        all_layer_pairs(s)?
            .into_iter()
            .map(|stats| {
                let bands = (a.replicates > 0)
                    .then(|| {
                        layer_pair_null_bands(
                            s,
                            &stats.layer_a,
                            &stats.layer_b,
                            a.replicates,
                            a.seed,
                        )
                    })
                    .transpose()?;
                Ok(PairStatsRow {
                    date: s.date(),
                    density_a: density(s.layer(&stats.layer_a)?, b)?,
                    density_b: density(s.layer(&stats.layer_b)?, b)?,
                    jaccard_significance: bands.as_ref().map(|x| (&x.jaccard).into()),
                    rho_exposure_significance: bands.as_ref().map(|x| (&x.rho_exposure).into()),
                    rho_liability_significance: bands.as_ref().map(|x| (&x.rho_liability).into()),
                    stats,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    emit(&rows.concat()[..], &a.output)
}

fn read_samples(path: &Path) -> Result<Vec<f64>> {
    #[derive(serde::Deserialize)]
    struct Row {
        value: f64,
    }
    let file = std::fs::File::open(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut out = Vec::new();
    for row in rdr.deserialize::<Row>() {
        let row = row.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        out.push(row.value);
    }
    Ok(out)
}

fn fit_cmd(a: &FitArgs) -> Result<()> {
    let mut groups: Vec<(Option<NaiveDate>, String, Vec<f64>)> = Vec::new();
    if let Some(path) = &a.samples {
        let name = path.file_name().map_or_else(
            || path.display().to_string(),
            |n| n.to_string_lossy().into_owned(),
        );
        groups.push((None, name, read_samples(path)?));
    } else {
        let wanted = layer_ids(&a.layers);
        let mut data = crate::io::ExposureData::new();
        for p in &a.exposures {
            for (date, layers) in parse_exposures(p)? {
                let slot = data.entry(date).or_default();
                for (l, m) in layers {
                    let target = slot.entry(l).or_default();
                    for (d, c, x) in m.iter() {
                        target.add(d.clone(), c.clone(), x)?;
                    }
                }
            }
        }
        for (date, layers) in data {
            if !in_range(date, a.from, a.to) {
                continue;
            }
            for (l, m) in layers {
                if wanted.as_ref().is_none_or(|w| w.contains(&l)) {
                    groups.push((
                        Some(date),
                        l.to_string(),
                        m.iter().map(|(_, _, x)| x).collect(),
                    ));
                }
            }
        }
    }
    if a.cdf {
        let rows = groups
            .par_iter()
            .map(|(date, source, xs)| {
                Ok(exposure_cdf(xs)?
                    .into_iter()
                    .map(|point| CdfRow {
                        date: *date,
                        source: source.clone(),
                        point,
                    })
                    .collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>>>()?;
        return emit(&rows.concat()[..], &a.output);
    }
    let opts = FitOptions {
        xmin: a.xmin.map_or(XminStrategy::Scan, XminStrategy::Fixed),
        replicates: a.replicates,
        seed: a.seed,
        ..FitOptions::default()
    };
    let rows = groups
        .par_iter()
        .map(|(date, source, xs)| {
            Ok(FitRow {
                date: *date,
                source: source.clone(),
                fit: powerlaw_fit(xs, &opts)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    emit(&rows[..], &a.output)
}

fn generate_cmd(a: &GenerateArgs) -> Result<()> {
    let cfg = GeneratorConfig {
        participation_correlation: a.rho,
        default_probability: Some(a.pd),
        ..GeneratorConfig::standard(a.seed)
            .with_bank_count(a.banks)
            .with_days(a.days)
    };
    let snaps = generate_multiplex(&cfg)?;
    std::fs::create_dir_all(&a.out).map_err(|e| Error::Io {
        path: a.out.clone(),
        source: e,
    })?;
    write_exposures(a.out.join("exposures.csv"), &snaps)?;
    write_capitals(a.out.join("capitals.csv"), &snaps)?;
    let rows: Vec<ProbabilityRow> = cfg
        .default_probability
        .map(|pd| ProbabilityRow {
            date: cfg.start,
            bank: BROADCAST.into(),
            pd: Some(pd),
            spread: None,
        })
        .into_iter()
        .collect();
    write_probabilities(a.out.join("probabilities.csv"), &rows)
}
