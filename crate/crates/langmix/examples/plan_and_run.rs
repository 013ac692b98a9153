//! Plans a sampling run for a target Wasserstein accuracy on the
//! d = 1 workhorse model with independent data, executes the plan,
//! and measures the achieved distance against the exact Gaussian
//! target. The planner's guarantee is a worst-case bound, so the
//! achieved error typically comes in far under the target.

use langmix::constants::{plan_iid, IidPlanInputs};
use langmix::harness::runs::execute_plan;
use langmix::model::QuadraticOracle;
use langmix::streams::LinearProcessSpec;

fn main() -> langmix::Result<()> {
    let inputs = IidPlanInputs::gaussian_data(1.0, 1.0, 1.0, 1, 0.0, 0.0, 0, 1, 1.0, 0.0)?;
    let oracle = QuadraticOracle::unit();
    let spec = LinearProcessSpec::iid_gaussian();

    println!("{:>8} {:>12} {:>10} {:>12} {:>6}", "epsilon", "lambda", "horizon", "achieved W2", "pass");
    for epsilon in [0.3, 0.2] {
        let plan = plan_iid(epsilon, &inputs)?;
        let n = plan.n_min.expect("horizon fits u64");
        let exec = execute_plan(&oracle, &spec, epsilon, plan.lambda, n, 1000, 42)?;
        println!(
            "{epsilon:>8} {:>12.4e} {n:>10} {:>12.4} {:>6}",
            plan.lambda, exec.w2_empirical, exec.pass
        );
    }
    Ok(())
}
