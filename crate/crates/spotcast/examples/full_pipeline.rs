//! The whole system end to end: generate a fixture, run every stage,
//! print the report tables, and forecast one user.
//!
//! ```bash
//! cargo run --release --example full_pipeline
//! ```

use spotcast::eval::{algorithm_table_csv, community_table_csv};
use spotcast::pipeline::{forecast_user, run_pipeline, PipelineConfig};
use spotcast::synth::{generate, write_fixture, SynthConfig};

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let fixture = generate(&SynthConfig::default());
    write_fixture(&fixture, dir.path()).expect("writable");

    let cfg = PipelineConfig {
        input: dir.path().join("stream.jsonl"),
        venues: dir.path().join("venues.tsv"),
        model_dir: dir.path().join("models"),
        report_dir: dir.path().join("reports"),
        diversity: 40,
        nn_hidden: 48,
        nn_epochs: 25,
        embed_epochs: 25,
        ..PipelineConfig::default()
    };
    let outcome = run_pipeline(&cfg).expect("pipeline completes");

    let c = &outcome.report.counters;
    println!(
        "parsed {} tuples, kept {}, {} communities allowed / {} blocked, {} models trained",
        c.parsed, c.kept, c.communities_allowed, c.communities_blocked, c.trained_models
    );
    println!("\nmean classification accuracy: {:.4}\n", outcome.report.eval.mca);
    print!("{}", algorithm_table_csv(&outcome.report.eval));
    println!();
    print!("{}", community_table_csv(&outcome.report.eval));

    let user = outcome.artifacts.users.keys().next().unwrap().clone();
    let forecast = forecast_user(&outcome.artifacts, &user, 5, 19).unwrap();
    println!(
        "\nforecast for {user} on Saturday 19:00 -> {} (confidence {:.3}, via {})",
        forecast.category, forecast.confidence, forecast.community
    );
}
