//! Lay out initial codes on a 2D board and query nearest labels.
//!
//!     cargo run --example affinity_board

use axis_elicit::affinity::{build_layout, embed_label, nearest_neighbors, LabelInput};
use axis_elicit::fixtures;

fn main() -> axis_elicit::Result<()> {
    let inputs: Vec<LabelInput> = fixtures::mit_initial_labels()
        .into_iter()
        .enumerate()
        .map(|(i, l)| LabelInput {
            label_raw: l.into(),
            annotation_id: format!("ann-demo-{i:06x}").into(),
        })
        .collect();

    let layout = build_layout(&inputs)?;
    println!(
        "explained variance: {:.3} / {:.3}",
        layout.explained_variance[0], layout.explained_variance[1]
    );
    for p in &layout.points {
        println!("{:>7.3} {:>7.3}  {}", p.x, p.y, p.label);
    }

    let embeddings = layout
        .points
        .iter()
        .map(|p| embed_label(&p.label))
        .collect::<axis_elicit::Result<Vec<_>>>()?;
    println!("\nclosest to \"bias\":");
    for n in nearest_neighbors(&embeddings, "bias", 3)? {
        println!("  {:.3}  {}", n.cosine, n.label);
    }

    // The layout is what the facilitator UI draws.
    println!("\n{}", serde_json::to_string_pretty(&layout)?);
    Ok(())
}
