//! Short BER sweeps of the NASA code and uncoded BPSK, then the gain at 1e-3.

use trellis::sim::report::coding_gain;
use trellis::sim::sweep::{run_sweep, CodedMetric, NoiseKind, StopRule, SweepConfig, System};
use trellis::ConvCode;

fn main() -> trellis::Result<()> {
    let stop = StopRule { min_errors: 50, max_bits: 200_000 };
    let mut coded = SweepConfig::new(
        System::coded(ConvCode::nasa(), CodedMetric::soft()),
        NoiseKind::Awgn,
        vec![1.0, 2.0, 3.0],
        42,
    );
    coded.stop = stop;
    let mut reference = SweepConfig::new(System::uncoded(), NoiseKind::Awgn, vec![5.0, 6.0, 7.0, 8.0], 42);
    reference.stop = stop;

    let coded = run_sweep(&coded)?;
    let reference = run_sweep(&reference)?;
    print!("{}", coded.to_csv());
    print!("{}", reference.to_csv());
    match coding_gain(&coded, &reference, 1e-3) {
        Ok(g) => println!("coding gain at 1e-3: {g:.2} dB"),
        Err(e) => println!("gain unavailable: {e}"),
    }
    Ok(())
}
