//! Systemic versus credit marginal loss of each exposure in a generated
//! network.

use multirisk::loss::{exposure_marginals, MarginalMethod};
use multirisk::synth::{generate_multiplex, GeneratorConfig};
use multirisk::{DefaultProbabilities, LossGivenDefault};

pub fn main() -> multirisk::Result<()> {
    let snapshot = generate_multiplex(&GeneratorConfig::standard(7))?.remove(0);
    let p = DefaultProbabilities::broadcast(snapshot.banks().keys(), 0.01)?;
    let lgd = LossGivenDefault::uniform(0.6);

    let mut rows = exposure_marginals(&snapshot, &p, &lgd, MarginalMethod::Approx)?;
    let above = rows.iter().filter(|r| r.d_el_syst > r.d_el_credit).count();
    println!(
        "{above} of {} exposures add more systemic than credit loss",
        rows.len()
    );

    rows.sort_by(|a, b| (b.d_el_syst / b.d_el_credit).total_cmp(&(a.d_el_syst / a.d_el_credit)));
    println!("\nlargest systemic/credit ratios");
    for r in rows.iter().take(5) {
        println!(
            "  {:<4} {}->{} amount {:>7.2}  syst {:>8.4}  credit {:>7.4}",
            r.layer, r.debtor, r.creditor, r.amount, r.d_el_syst, r.d_el_credit
        );
    }
    // exposures that lower systemic loss when present
    for r in rows.iter().filter(|r| r.d_el_syst < 0.0).take(3) {
        println!(
            "  reducing: {:<4} {}->{} syst {:.4}, clamped to {:.4}",
            r.layer, r.debtor, r.creditor, r.d_el_syst, r.d_el_syst_clamped
        );
    }
    Ok(())
}
