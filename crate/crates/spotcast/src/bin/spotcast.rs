use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spotcast::affect::SentimentLexicon;
use spotcast::annotate::{annotate_stream, VenueDirectory};
use spotcast::community::{
    block_filter, language_search, opinion_search, temporal_search, BlockThresholds,
    CommunityReport,
};
use spotcast::embed::{embed_text, train_text_embeddings, EmbedConfig, EmbedMode};
use spotcast::eval::{algorithm_table_csv, community_table_csv};
use spotcast::geonet::{geonet_search, GeoNetConfig};
use spotcast::ingest::{dedup_stream, parse_tuple, serialize_tuple, StreamTuple};
use spotcast::pipeline::{
    forecast_user, load_artifacts, run_pipeline, PipelineConfig, PipelineError,
};

#[derive(Parser)]
#[command(name = "spotcast", about = "Venue-category forecasting from self-report streams")]
struct Cli {
    /// Flat key=value config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a JSONL stream, dedup it, and reprint the kept tuples.
    Ingest {
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        max_dist: usize,
    },
    /// Run the opinion, language, and temporal searches plus blocking.
    Communities { input: PathBuf },
    /// Build the proximity graph and report geo communities.
    Geonet {
        input: PathBuf,
        #[arg(long, default_value_t = 140.0)]
        radius_m: f64,
    },
    /// Resolve venue references against a directory fixture.
    Annotate {
        input: PathBuf,
        #[arg(long)]
        fixture: PathBuf,
    },
    /// Train text embeddings on a stream and print one vector.
    Embed {
        input: PathBuf,
        #[arg(long, default_value_t = 56)]
        dim: usize,
        #[arg(long, default_value_t = 20)]
        epochs: usize,
    },
    /// Train models for every allowed community (runs the pipeline).
    Train,
    /// Evaluate and print the report tables.
    Eval {
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Forecast a venue category for a user at a local weekday/hour.
    Forecast {
        user: String,
        #[arg(long, default_value_t = 0)]
        weekday: usize,
        #[arg(long, default_value_t = 12)]
        hour: usize,
    },
    /// Run every stage end to end and write reports plus artifacts.
    RunAll,
}

fn load_stream(path: &PathBuf) -> Result<Vec<StreamTuple>, PipelineError> {
    let content = std::fs::read_to_string(path)?;
    let mut tuples = Vec::new();
    let mut errors = 0usize;
    for line in content.lines().filter(|l| !l.trim().is_empty()) {
        match parse_tuple(line) {
            Ok(t) => tuples.push(t),
            Err(_) => errors += 1,
        }
    }
    if errors > 0 {
        eprintln!("skipped {errors} unparseable lines");
    }
    if tuples.is_empty() {
        return Err(PipelineError::NoTuples);
    }
    Ok(tuples)
}

fn config_from(cli: &Cli) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::from_file(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), PipelineError> {
    match &cli.command {
        Command::Ingest { input, max_dist } => {
            let tuples = load_stream(input)?;
            let kept = dedup_stream(&tuples, *max_dist);
            eprintln!("parsed {}, kept {} after dedup", tuples.len(), kept.len());
            for t in &kept {
                println!("{}", serialize_tuple(t));
            }
        }
        Command::Communities { input } => {
            let tuples = load_stream(input)?;
            let cfg = config_from(cli)?;
            let lex = SentimentLexicon::builtin();
            let opinion = opinion_search(&tuples, &lex);
            let mut communities = opinion.communities;
            communities.extend(language_search(&tuples));
            communities.extend(temporal_search(&tuples, cfg.dedup_max_dist));
            let thresholds = BlockThresholds { diversity: cfg.diversity, per_day: cfg.per_day };
            let outcome = block_filter(communities, thresholds);
            let mut reports: Vec<CommunityReport> =
                outcome.allowed.iter().map(|c| CommunityReport::new(c, None)).collect();
            reports.extend(
                outcome.blocked.iter().map(|(c, r)| CommunityReport::new(c, Some(r))),
            );
            println!("{}", serde_json::to_string_pretty(&reports).expect("serializable"));
        }
        Command::Geonet { input, radius_m } => {
            let tuples = load_stream(input)?;
            let cfg = config_from(cli)?;
            let geo_cfg =
                GeoNetConfig { radius_m: *radius_m, seed: cfg.seed, ..GeoNetConfig::default() };
            let communities = geonet_search(&tuples, &geo_cfg);
            let reports: Vec<CommunityReport> =
                communities.iter().map(|c| CommunityReport::new(c, None)).collect();
            println!("{}", serde_json::to_string_pretty(&reports).expect("serializable"));
        }
        Command::Annotate { input, fixture } => {
            let tuples = load_stream(input)?;
            let mut directory = VenueDirectory::from_fixture(fixture)?;
            let out = annotate_stream(&tuples, &mut directory);
            eprintln!("labeled {}, dropped {}", out.labeled.len(), out.dropped);
            for (t, cat) in &out.labeled {
                println!("{}\t{}\t{}", t.user_id, t.timestamp, cat.top_level);
            }
        }
        Command::Embed { input, dim, epochs } => {
            let tuples = load_stream(input)?;
            let corpus: Vec<String> = tuples.iter().map(|t| t.text.clone()).collect();
            let cfg = config_from(cli)?;
            let embed_cfg =
                EmbedConfig { dim: *dim, epochs: *epochs, seed: cfg.seed, ..EmbedConfig::default() };
            let model = train_text_embeddings(&corpus, &embed_cfg)?;
            let vec = embed_text(&model, &corpus[0], EmbedMode::Document);
            eprintln!("trained on {} documents", corpus.len());
            println!("{}", serde_json::to_string(&vec).expect("serializable"));
        }
        Command::Train | Command::RunAll => {
            let cfg = config_from(cli)?;
            let outcome = run_pipeline(&cfg)?;
            eprintln!(
                "allowed {} communities, blocked {}, trained {} models",
                outcome.report.counters.communities_allowed,
                outcome.report.counters.communities_blocked,
                outcome.report.counters.trained_models,
            );
            println!("mca {:.4}", outcome.report.eval.mca);
            println!("reports written to {}", cfg.report_dir.display());
        }
        Command::Eval { format } => {
            let cfg = config_from(cli)?;
            let outcome = run_pipeline(&cfg)?;
            match format.as_str() {
                "json" => println!(
                    "{}",
                    serde_json::to_string_pretty(&outcome.report.eval).expect("serializable")
                ),
                _ => {
                    print!("{}", algorithm_table_csv(&outcome.report.eval));
                    print!("{}", community_table_csv(&outcome.report.eval));
                }
            }
        }
        Command::Forecast { user, weekday, hour } => {
            let cfg = config_from(cli)?;
            let artifacts = load_artifacts(&cfg.model_dir)?;
            let f = forecast_user(&artifacts, user, *weekday, *hour)?;
            println!("{}", serde_json::to_string(&f).expect("serializable"));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
