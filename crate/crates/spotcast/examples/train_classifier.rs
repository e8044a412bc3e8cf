//! Train the feed-forward classifier and the three baselines on a
//! separable blob dataset and compare their accuracy.
//!
//! ```bash
//! cargo run --example train_classifier
//! ```

use spotcast::baselines::{
    Classifier, DecisionTree, GaussianNb, LogRegConfig, LogisticRegression, TreeConfig,
};
use spotcast::nn::{self, blob_dataset, TrainConfig};

fn main() {
    let data = blob_dataset(300, 109, 42);
    println!("dataset: {} samples, {} dims, 3 classes", data.len(), data[0].0.len());

    let mut model = nn::init_model(109, &[64], 3, 7);
    let history = nn::train(&mut model, &data, &TrainConfig::default()).expect("multi-class data");
    let nn_acc = data
        .iter()
        .filter(|(x, y)| nn::predict_top(&model, x).unwrap().0 == *y)
        .count() as f64
        / data.len() as f64;
    println!("neural network: {} epochs, final loss {:.5}, accuracy {:.3}",
        history.len(), history.last().unwrap(), nn_acc);

    let err = nn::gradient_check(&nn::init_model(4, &[3], 2, 11), &[0.5, -0.2, 0.8, 0.1], 1, 1e-5);
    println!("gradient check max relative error: {err:.2e}");

    let gnb = GaussianNb::fit(&data).unwrap();
    let lr = LogisticRegression::fit(&data, &LogRegConfig::default()).unwrap();
    let tree = DecisionTree::fit(&data, &TreeConfig::default()).unwrap();
    for (name, correct) in [
        ("gaussian nb", data.iter().filter(|(x, y)| gnb.predict(x).unwrap() == *y).count()),
        ("logistic reg", data.iter().filter(|(x, y)| lr.predict(x).unwrap() == *y).count()),
        ("decision tree", data.iter().filter(|(x, y)| tree.predict(x).unwrap() == *y).count()),
    ] {
        println!("{name}: accuracy {:.3}", correct as f64 / data.len() as f64);
    }
}
