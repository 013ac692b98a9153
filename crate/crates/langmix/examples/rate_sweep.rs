//! Sweeps the step size over a dyadic grid, reads off the stationary
//! coupled distance at each point, and fits the log-log slope. The
//! theory says distance = Θ(√λ), so the fitted slope should land
//! near 1/2 with the bootstrap interval covering it.

use langmix::harness::runs::rate_sweep;
use langmix::model::QuadraticOracle;
use langmix::streams::LinearProcessSpec;

fn main() -> langmix::Result<()> {
    let oracle = QuadraticOracle::unit();
    let spec = LinearProcessSpec::iid_gaussian();
    let lambdas: Vec<f64> = (4..=8).map(|k| 0.5f64.powi(k)).collect();

    let report = rate_sweep(&oracle, &spec, &lambdas, 1000, 42, None)?;

    println!("{:>10} {:>12} {:>10} {:>8}", "lambda", "distance", "std err", "plateau");
    for p in &report.points {
        println!(
            "{:>10.6} {:>12.6} {:>10.2e} {:>8}",
            p.lambda, p.distance, p.se, p.plateau
        );
    }
    let slope = report.fitted_slope.expect("sweep is not degenerate");
    println!(
        "\nfitted slope {:.4}, 95% bootstrap interval [{:.4}, {:.4}]",
        slope,
        report.ci_low.unwrap(),
        report.ci_high.unwrap()
    );
    Ok(())
}
