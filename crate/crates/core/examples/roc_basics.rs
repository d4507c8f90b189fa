//! ROC curve, AUC and AUM of fixed predictions.

use aum_search::{roc, ErrorModel};

fn main() -> aum_search::Result<()> {
    let labels = [1, -1, 1, -1, -1];
    let model = ErrorModel::binary(&labels)?;
    for predictions in [[2.0, -1.0, 0.5, 0.0, -2.0], [0.0, 1.0, 0.5, -1.0, 2.0]] {
        let curve = roc(&predictions, &model)?;
        println!("predictions {predictions:?}");
        for ((t, fpr), fnr) in curve.thresholds.iter().zip(&curve.fpr[1..]).zip(&curve.fnr[1..]) {
            println!("  from {t:>5}: FPR {fpr:.3} FNR {fnr:.3}");
        }
        println!("  AUC {:.4}  AUM {:.4}", curve.auc(), curve.aum());
    }
    Ok(())
}
