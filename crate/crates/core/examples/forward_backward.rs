//! Inference on a hand-built three-unit turn: partition function, posterior
//! marginals and the Viterbi path.
//!
//! cargo run --example forward_backward

use isocrf::crf::FeatureIndex;
use isocrf::{CrfModel, FeatureVector, OrdinalLabel};

fn main() -> isocrf::Result<()> {
    let index = FeatureIndex::from_names(["lex:uni=agree", "lex:uni=wrong", "disc:hedge"]);
    let mut model = CrfModel::new(index);
    for y in OrdinalLabel::ALL {
        let centered = y.index() as f64 - 2.0;
        model.set_emission(0, y, 0.8 * centered);
        model.set_emission(1, y, -0.8 * centered);
        model.set_emission(2, y, -0.3 * centered.abs());
        model.set_transition(y, y, 0.5);
    }

    let turn = vec![
        FeatureVector::from_names(["lex:uni=agree"]),
        FeatureVector::from_names(["disc:hedge", "lex:uni=unseen"]),
        FeatureVector::from_names(["lex:uni=wrong", "lex:uni=wrong"]),
    ];
    let lattice = model.forward_backward(&turn)?;
    println!("log Z forward  = {:.12}", lattice.log_partition());
    println!("log Z backward = {:.12}", lattice.log_partition_backward());

    println!("unit  NN     N      O      P      PP");
    for t in 0..lattice.len() {
        let p = lattice.unary_marginals(t);
        println!("{t:>4}  {}", p.map(|v| format!("{v:.3}")).join("  "));
    }
    let path = model.viterbi(&turn)?;
    println!(
        "viterbi: {}",
        path.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")
    );
    println!("path score: {:.4}", model.score(&turn, &path));
    Ok(())
}
