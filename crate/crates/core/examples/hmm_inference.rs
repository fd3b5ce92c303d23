//! Most probable state path and posterior marginals of a two-state HMM.

use trellis::{hmm_forward_backward, hmm_viterbi, HmmModel};

fn main() -> trellis::Result<()> {
    // fair / loaded die, symbols 0..6
    let loaded = [0.1, 0.1, 0.1, 0.1, 0.1, 0.5];
    let fair = [1.0 / 6.0; 6];
    let emission: Vec<f64> = fair.iter().chain(&loaded).copied().collect();
    let model = HmmModel::new(2, 6, &[0.5, 0.5], &[0.95, 0.05, 0.1, 0.9], &emission)?;

    let rolls = [0, 3, 1, 5, 5, 5, 2, 5, 5, 5, 5, 1, 4, 2, 0, 3];
    let (path, lp) = hmm_viterbi(&model, &rolls)?;
    let sm = hmm_forward_backward(&model, &rolls)?;
    println!("log P(best path, rolls) = {lp:.3}, log P(rolls) = {:.3}", sm.log_likelihood);
    for (t, roll) in rolls.iter().enumerate() {
        println!("{t:2} roll {} state {} P(loaded)={:.3}", roll + 1, path[t], sm.posterior(t)[1]);
    }
    Ok(())
}
