//! Gradient descent with exact line search on an unbalanced binary problem,
//! choosing the iterate with the best validation AUC.

use aum_search::descent::{train, Split, TrainConfig, TrainVariant};
use aum_search::synth::{binary_unbalanced, Classes};
use ndarray::{s, Axis};

fn main() -> aum_search::Result<()> {
    let data = binary_unbalanced(300, 5, 0.1, Classes::Overlapping { separation: 1.5 }, 3)?;
    let (sub, val) = (0..225, 225..300);
    let sub_model = data.error_model()?.subset(&sub.clone().collect::<Vec<_>>())?;
    let val_model = data.error_model()?.subset(&val.clone().collect::<Vec<_>>())?;
    let sub_x = data.features.slice(s![sub, ..]);
    let val_x = data.features.select(Axis(0), &val.collect::<Vec<_>>());

    for variant in [TrainVariant::FirstMin, TrainVariant::Linear, TrainVariant::Grid] {
        let config = TrainConfig {
            variant,
            ..TrainConfig::default()
        };
        let (_, log) = train(
            Split {
                features: sub_x,
                model: &sub_model,
            },
            Some(Split {
                features: val_x.view(),
                model: &val_model,
            }),
            &config,
        )?;
        let last = log.steps.last().unwrap();
        let (at, best) = log.max_validation_auc().unwrap();
        println!(
            "{variant:?}: {} steps, subtrain AUM {:.4} AUC {:.4}, best validation AUC {best:.4} at step {at}",
            log.gradient_steps(),
            last.aum_subtrain,
            last.auc_subtrain
        );
    }
    Ok(())
}
