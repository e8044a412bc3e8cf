//! The evaluation protocol on toy data: nested mean accuracy, ranked
//! precision/recall, the history-aware split, and k-fold partitions.
//!
//! ```bash
//! cargo run --example evaluate_metrics
//! ```

use spotcast::eval::{
    kfold, mean_avg_precision_recall, mean_classification_accuracy, split_train_test,
    AccuracyRecord, RankedRecord,
};

fn main() {
    let accuracy_records: Vec<AccuracyRecord> = [
        ("u1", "Opinions/Positive", "Food", "Food"),
        ("u2", "Opinions/Positive", "Arts & Entertainment", "Food"),
        ("u3", "Temporal/Night", "Food", "Food"),
        ("u4", "Temporal/Night", "Residence", "Residence"),
    ]
    .iter()
    .map(|&(user, community, predicted, truth)| AccuracyRecord {
        user: user.into(),
        community: community.into(),
        cluster: community.into(),
        predicted: predicted.into(),
        truth: truth.into(),
    })
    .collect();
    let acc = mean_classification_accuracy(&accuracy_records).unwrap();
    println!("mean classification accuracy: {:.3}", acc.overall);
    for (c, v) in &acc.per_community {
        println!("  {c}: {v:.3}");
    }

    let ranked: Vec<RankedRecord> = [
        (vec!["Food", "Arts & Entertainment"], "Food"),
        (vec!["Arts & Entertainment", "Food"], "Food"),
        (vec!["Shop & Service"], "Food"),
    ]
    .into_iter()
    .enumerate()
    .map(|(i, (order, truth))| RankedRecord {
        user: format!("u{i}"),
        community: "Opinions/Positive".into(),
        cluster: "Positive".into(),
        ranked: order.into_iter().map(String::from).collect(),
        truth: truth.into(),
    })
    .collect();
    let pr = mean_avg_precision_recall(&ranked).unwrap();
    println!("\nranked forecasts: precision {:.3}, recall {:.3}", pr.precision, pr.recall);

    let users: Vec<(String, Vec<i64>)> = (0..10)
        .map(|i| {
            let span = if i < 6 { 45 } else { 3 };
            (format!("user{i}"), vec![0, span * 86_400])
        })
        .collect();
    let (train, test) = split_train_test(&users, 0.8, 30, 7).unwrap();
    println!("\nsplit: {} train / {} test (test limited to 30-day histories)", train.len(), test.len());
    println!("test users: {test:?}");

    let folds = kfold(23, 5, 7).unwrap();
    let sizes: Vec<usize> = folds.iter().map(|(_, va)| va.len()).collect();
    println!("\n5-fold over 23 samples, validation sizes: {sizes:?}");
}
