//! Overlap and correlation between layers, with null-model bands.

use multirisk::stats::{all_layer_pairs, density, layer_pair_null_bands};
use multirisk::synth::{generate_multiplex, GeneratorConfig};

pub fn main() -> multirisk::Result<()> {
    let s = generate_multiplex(&GeneratorConfig::standard(7))?.remove(0);

    for (layer, m) in s.layers() {
        println!("{layer:<5} density {:.3}", density(m, s.bank_count())?);
    }
    println!();

    let show = |x: Option<f64>| x.map_or("  n/a".to_string(), |v| format!("{v:>5.2}"));
    for st in all_layer_pairs(&s)? {
        let bands = layer_pair_null_bands(&s, &st.layer_a, &st.layer_b, 200, 1)?;
        println!(
            "{:>4}/{:<4} J {:.3}{} [null {:.3}..{:.3}]  rho_in {}  rho_out {}{}  rho_R {}",
            st.layer_a,
            st.layer_b,
            st.jaccard,
            if bands.jaccard.significant { "*" } else { " " },
            bands.jaccard.p025,
            bands.jaccard.p975,
            show(st.rho_exposure),
            show(st.rho_liability),
            if bands.rho_liability.significant {
                "*"
            } else {
                " "
            },
            show(st.rho_debtrank),
        );
    }
    Ok(())
}
