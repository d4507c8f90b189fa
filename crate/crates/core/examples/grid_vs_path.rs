//! The exact path against a from-scratch grid search over step sizes.

use aum_search::synth::changepoint_nonmono;
use aum_search::{grid_evaluate, line_search, Variant};
use ndarray::Array1;

fn main() -> aum_search::Result<()> {
    let data = changepoint_nonmono(8, 3, 5)?;
    let w = Array1::zeros(3);
    let d = Array1::from(vec![1.0, -0.5, 0.25]);
    let path = line_search(
        w.view(),
        d.view(),
        data.features.view(),
        &data.model,
        Variant::Quadratic,
        None,
    )?;
    let steps: Vec<f64> = (0..=40).map(|k| k as f64 * 0.1).collect();
    let grid = grid_evaluate(w.view(), d.view(), data.features.view(), &data.model, &steps)?;
    let mut worst: f64 = 0.0;
    for g in &grid {
        let v = path.query(g.step)?;
        worst = worst.max((v.aum - g.aum).abs()).max((v.auc - g.auc).abs());
        println!("step {:.1}: AUM {:.4} AUC {:.4}", g.step, g.aum, g.auc);
    }
    println!("{} events; largest path/grid difference {worst:.2e}", path.events);
    Ok(())
}
