//! DebtRank on the smallest interesting network: A owes B 50, both banks
//! hold 100 of capital.

use multirisk::{bank_records, debtrank, LiabilityMatrix, ValueMode};

pub fn main() -> multirisk::Result<()> {
    let m = LiabilityMatrix::new().with("A", "B", 50.0)?;
    let banks = bank_records([("A", 100.0), ("B", 100.0)]);

    for seed in ["A", "B"] {
        let r = debtrank(
            &m,
            &banks,
            &[seed.into()],
            1.0,
            ValueMode::InterbankOnly,
            0.6,
        )?;
        println!(
            "seed {seed}: R = {:.3}, R excluding the seed = {:.3}, {} steps",
            r.r_including_initial, r.r_excluding_initial, r.steps_to_convergence
        );
        for (bank, h) in &r.final_h {
            println!("  h[{bank}] = {h:.3}");
        }
    }
    Ok(())
}
