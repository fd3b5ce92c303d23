//! Viterbi training from a perturbed start; the total best-path score climbs.

use trellis::{viterbi_training_step, HmmModel};

fn main() -> trellis::Result<()> {
    let data: Vec<Vec<usize>> = (0..20)
        .map(|s| (0..60).map(|t| if (t / 12 + s) % 2 == 0 { (t * 3 + s) % 2 } else { 2 + (t + s) % 2 }).collect())
        .collect();
    let mut model = HmmModel::new(
        2,
        4,
        &[0.5, 0.5],
        &[0.6, 0.4, 0.4, 0.6],
        &[0.3, 0.2, 0.2, 0.3, 0.2, 0.3, 0.3, 0.2],
    )?;
    for it in 1..=8 {
        let step = viterbi_training_step(&model, &data, 1e-3)?;
        println!("iteration {it}: {:.3}", step.total_log_joint);
        model = step.model;
    }
    println!("{}", model.to_json_string());
    Ok(())
}
