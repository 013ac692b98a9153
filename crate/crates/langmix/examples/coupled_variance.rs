//! Couples the noisy chain to its mean-field twin on the d = 1 model
//! H(θ, x) = θ + x with i.i.d. standard normal data and compares the
//! Monte Carlo squared gap to the closed form
//! λ(1 − (1−λ)^{2n})/(2 − λ), which tends to 1/3 at λ = 1/2.

use langmix::model::QuadraticOracle;
use langmix::samplers::{run_coupled, InitialLaw, SamplerConfig};
use langmix::streams::{coupled_variance_exact, LinearProcessSpec};

fn main() -> langmix::Result<()> {
    let oracle = QuadraticOracle::unit();
    let spec = LinearProcessSpec::iid_gaussian();
    let steps = 200u64;
    let replicas = 20_000;

    println!("{:>6} {:>12} {:>12} {:>10} {:>8}", "lambda", "monte carlo", "closed form", "std err", "sigmas");
    for lambda in [0.5, 0.1, 0.02] {
        let config = SamplerConfig::new(lambda, steps, replicas, 42, InitialLaw::at(vec![0.0]))
            .with_record_every(steps);
        let run = run_coupled(&oracle, &spec, &config)?;
        let mc = *run.mean_sq.last().unwrap();
        let se = *run.se.last().unwrap();
        let exact = coupled_variance_exact(&spec, lambda, steps as usize)?;
        println!(
            "{lambda:>6} {mc:>12.6} {exact:>12.6} {se:>10.2e} {:>8.2}",
            (mc - exact).abs() / se
        );
    }

    let limit = 0.5 * (1.0 - 0.5f64.powi(400)) / 1.5;
    println!("\nlimit at lambda = 1/2: {limit:.12} (= 1/3 up to 2^-400)");
    Ok(())
}
