//! Power-law fits: a Pareto sample, an exponential sample, and the
//! exposure sizes of a generated layer.

use multirisk::stats::{exposure_cdf, powerlaw_fit, FitOptions, XminStrategy};
use multirisk::synth::{generate_multiplex, GeneratorConfig};
use multirisk::LayerId;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Pareto};

pub fn main() -> multirisk::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    // density exponent 2.5
    let pareto = Pareto::new(1.0, 1.5).expect("valid");
    let xs: Vec<f64> = (0..10_000).map(|_| pareto.sample(&mut rng)).collect();
    let exp = Exp::new(1.0).expect("valid");
    let ys: Vec<f64> = (0..10_000).map(|_| exp.sample(&mut rng)).collect();

    let fixed = FitOptions {
        xmin: XminStrategy::Fixed(1.0),
        replicates: 200,
        ..FitOptions::default()
    };
    for (name, sample) in [("pareto", &xs), ("exponential", &ys)] {
        let f = powerlaw_fit(sample, &fixed)?;
        println!(
            "{name:<12} alpha {:.3}  KS {:.4}  p {:.3}  rejected: {}",
            f.alpha,
            f.ks_statistic,
            f.p_value.unwrap_or(f64::NAN),
            f.rejected()
        );
    }

    let s = generate_multiplex(&GeneratorConfig::standard(7))?.remove(0);
    let sizes: Vec<f64> = s
        .layer(&LayerId::new(LayerId::DEPOSITS_LOANS))?
        .iter()
        .map(|(_, _, a)| a)
        .collect();
    let f = powerlaw_fit(
        &sizes,
        &FitOptions {
            replicates: 200,
            ..FitOptions::default()
        },
    )?;
    println!(
        "\ndl exposures: n {} tail {} xmin {:.2} alpha {:.3} p {:.3}",
        f.n,
        f.n_tail,
        f.xmin,
        f.alpha,
        f.p_value.unwrap_or(f64::NAN)
    );
    let cdf = exposure_cdf(&sizes)?;
    for pt in cdf.iter().step_by(cdf.len() / 5) {
        println!("  P(X > {:>7.2}) = {:.3}", pt.value, pt.ccdf);
    }
    Ok(())
}
