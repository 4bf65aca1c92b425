//! Writes a generated dataset to CSV, loads it back, and writes a loss
//! report as JSON.

use multirisk::io::{
    write_capitals, write_exposures, write_probabilities, write_report, DatasetBundle,
    ProbabilityRow, ReportFormat, BROADCAST,
};
use multirisk::loss::loss_report;
use multirisk::synth::{generate_multiplex, GeneratorConfig};
use multirisk::LossGivenDefault;

pub fn main() -> multirisk::Result<()> {
    let dir = std::env::temp_dir().join(format!("multirisk-roundtrip-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| multirisk::Error::Io {
        path: dir.clone(),
        source: e,
    })?;

    let cfg = GeneratorConfig::standard(3).with_days(5);
    let generated = generate_multiplex(&cfg)?;
    write_exposures(dir.join("exposures.csv"), &generated)?;
    write_capitals(dir.join("capitals.csv"), &generated)?;
    write_probabilities(
        dir.join("probabilities.csv"),
        &[ProbabilityRow {
            date: cfg.start,
            bank: BROADCAST.into(),
            pd: None,
            spread: Some(0.012),
        }],
    )?;

    let bundle = DatasetBundle {
        exposures: vec![dir.join("exposures.csv")],
        capitals: dir.join("capitals.csv"),
        probabilities: Some(dir.join("probabilities.csv")),
    };
    let data = bundle.load(0.4)?;
    println!(
        "{} snapshots, identical: {}",
        data.snapshots.len(),
        data.snapshots == generated
    );

    let probs = data.probabilities.expect("probabilities file given");
    let reports = data
        .snapshots
        .iter()
        .map(|s| {
            loss_report(
                s,
                &probs.for_banks(s.date(), s.banks())?,
                &LossGivenDefault::default(),
                20,
            )
        })
        .collect::<multirisk::Result<Vec<_>>>()?;
    for r in &reports {
        println!(
            "{}  EL_syst {:.3}  EL_credit {:.3}",
            r.date, r.el_syst, r.el_credit_total
        );
    }
    write_report(&reports[..], ReportFormat::Json, dir.join("losses.json"))?;
    println!("wrote {}", dir.display());
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}
