//! Strict and soft F1 on a toy set where some labels were inherited from
//! turn-level annotation.
//!
//! cargo run --example evaluate

use isocrf::eval::{score, GoldUnit, ScoreMode, ThreeWay};

fn main() -> isocrf::Result<()> {
    use ThreeWay::{Agreement as A, Disagreement as D, Neutral as O};
    let gold = [
        GoldUnit::new(A),
        GoldUnit::inherited(A),
        GoldUnit::new(D),
        GoldUnit::inherited(D),
        GoldUnit::inherited(D),
        GoldUnit::new(O),
        GoldUnit::new(O),
        GoldUnit::new(O),
    ];
    let pred = [A, O, D, O, D, O, A, O];
    for mode in [ScoreMode::Strict, ScoreMode::Soft] {
        let report = score(&gold, &pred, mode)?;
        println!("{mode}:");
        print!("{}", report.table());
        println!("macro F1 {:.3}\n", report.macro_f1());
    }
    Ok(())
}
