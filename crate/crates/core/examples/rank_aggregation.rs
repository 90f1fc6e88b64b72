//! Borda aggregation and rank-correlation shift on toy ballots.
//!
//!     cargo run --example rank_aggregation

use axis_elicit::consensus::{borda_scores, kendall_tau, rank_by_score};

fn main() {
    let first = [
        vec!["Source", "Empathy", "Confidence Level"],
        vec!["Empathy", "Source", "Cultural Context"],
        vec!["Cultural Context", "Source", "Empathy"],
    ];
    let last = [
        vec!["Source", "Cultural Context", "Empathy"],
        vec!["Source", "Empathy", "Cultural Context"],
        vec!["Cultural Context", "Source", "Empathy"],
    ];

    for (name, ballots) in [("segment 1", &first), ("segment 5", &last)] {
        let scores = borda_scores(ballots, 5);
        println!("{name}:");
        for axis in rank_by_score(&scores, |a| *a) {
            println!("  {:>2}  {axis}", scores[axis]);
        }
    }

    println!("\nper-voter tau, segment 1 vs 5:");
    let mut taus = Vec::new();
    for (i, (a, b)) in first.iter().zip(&last).enumerate() {
        match kendall_tau(a, b) {
            Ok(t) => {
                println!("  voter {i}: {t:+.3}");
                taus.push(t);
            }
            Err(e) => println!("  voter {i}: undefined ({e})"),
        }
    }
    let mean = taus.iter().sum::<f64>() / taus.len() as f64;
    println!("  mean: {mean:+.3}");
}
