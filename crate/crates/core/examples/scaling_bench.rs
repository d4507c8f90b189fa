//! Line search events per gradient step as the data grows.

use aum_search::cli::{bench, BenchArgs, VariantArg};

fn main() -> aum_search::Result<()> {
    let args = BenchArgs {
        sizes: vec![50, 100, 200],
        seeds: vec![1, 2],
        variants: vec![VariantArg::FirstMin, VariantArg::Linear, VariantArg::Quadratic],
        p: 2,
        imbalance: 0.1,
        separation: 1.0,
        max_steps: 100,
        aum_tol: 1e-3,
        timings: true,
        out: None,
    };
    println!(
        "{:>4} {:>4} {:>10} {:>12} {:>6} {:>10}",
        "n", "seed", "variant", "events/step", "steps", "ms"
    );
    for r in bench(&args)? {
        println!(
            "{:>4} {:>4} {:>10} {:>12.1} {:>6} {:>10.1}",
            r.n,
            r.seed,
            format!("{:?}", r.variant),
            r.mean_events_per_step,
            r.gradient_steps,
            r.elapsed_ns.unwrap_or(0) as f64 / 1e6
        );
    }
    Ok(())
}
