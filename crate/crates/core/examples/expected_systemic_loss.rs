//! Exact and approximate expected systemic loss, and credit expected loss.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use multirisk::debtrank::Network;
use multirisk::loss::{approx_error_report, loss_report, spread_to_pd, SpreadConvention};
use multirisk::{
    bank_records, DefaultProbabilities, LiabilityMatrix, LossGivenDefault, MultiLayerSnapshot,
};

pub fn main() -> multirisk::Result<()> {
    let m = LiabilityMatrix::new().with("A", "B", 50.0)?;
    let banks = bank_records([("A", 100.0), ("B", 100.0)]);
    let net = Network::interbank(&m, &banks)?;
    let p = DefaultProbabilities::broadcast(banks.keys(), 0.1)?;

    let r = approx_error_report(&net, &p, 20)?;
    println!("exact  {:.4}", r.exact);
    println!("approx {:.4}", r.approx);
    println!("relative error {:.2}%", 100.0 * r.relative_error);

    // probabilities implied by a 120bp spread at 40% recovery
    let pd = spread_to_pd(0.012, 0.4, 1.0, SpreadConvention::ConstantHazard)?;
    println!("\npd from spread: {pd:.5}");

    let snapshot = MultiLayerSnapshot::new(
        NaiveDate::from_ymd_opt(2013, 1, 2).expect("valid date"),
        BTreeMap::from([("dl".into(), m)]),
        banks.clone(),
    )?;
    let report = loss_report(
        &snapshot,
        &DefaultProbabilities::broadcast(banks.keys(), pd)?,
        &LossGivenDefault::default(),
        20,
    )?;
    println!(
        "EL_syst {:.4} ({:?}), EL_credit {:.4}",
        report.el_syst, report.method, report.el_credit_total
    );
    Ok(())
}
