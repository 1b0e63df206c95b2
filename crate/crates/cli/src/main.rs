use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::error;

use revsum::pipeline::{self, CandidateSource, PipelineConfig, RunContext};
use revsum::Error;

#[derive(Parser)]
#[command(name = "revsum", version, about = "Extractive summaries of customer reviews")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set k_summary=3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[arg(long, global = true)]
    dataset: Option<PathBuf>,
    #[arg(long, global = true)]
    assets: Option<PathBuf>,
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Maximum worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Corpus statistics.
    Stats,
    /// Segment, normalize and tag every sentence.
    Preprocess,
    /// Select K and train the review and summary topic models.
    TrainTopics,
    /// Train the summary-style classifier.
    TrainStyle,
    /// Score review sentences and write one summary per product.
    Summarize,
    /// ROUGE against the reference summaries.
    Evaluate {
        /// Evaluate a baseline instead of the generated summaries.
        #[arg(long, value_enum)]
        baseline: Option<Baseline>,
        /// Comma-separated list, e.g. `rouge1,rougeL`.
        #[arg(long)]
        variants: Option<String>,
    },
    /// Every stage in order.
    Pipeline,
}

#[derive(Clone, Copy, ValueEnum)]
enum Baseline {
    Lead,
    Random,
}

fn build_config(common: &Common, variants: Option<&str>) -> Result<PipelineConfig, Error> {
    let mut config = PipelineConfig::default();
    if let Some(path) = &common.config {
        config.apply_file(path)?;
    }
    for kv in &common.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        config.set(k.trim(), v, None)?;
    }
    if let Some(p) = &common.dataset {
        config.dataset_path = Some(p.clone());
    }
    if let Some(p) = &common.assets {
        config.asset_dir = Some(p.clone());
    }
    if let Some(p) = &common.output {
        config.output_dir = p.clone();
    }
    if let Some(s) = common.seed {
        config.seed = s;
    }
    if let Some(j) = common.jobs {
        config.jobs = Some(j);
    }
    if let Some(v) = variants {
        config.set("rouge_variants", v, None)?;
    }
    Ok(config)
}

fn print_stats(stats: &revsum::corpus::CorpusStats) {
    println!("{}", serde_json::to_string_pretty(stats).expect("serializable"));
}

fn run(cli: Cli) -> Result<(), Error> {
    let variants = match &cli.command {
        Command::Evaluate { variants, .. } => variants.as_deref(),
        _ => None,
    };
    let config = build_config(&cli.common, variants)?;
    let jobs = config.jobs;
    if let Command::Pipeline = cli.command {
        let outcome = pipeline::run_pipeline(config)?;
        println!("config_hash {}", outcome.config_hash);
        println!("LDAreview K={}", outcome.review_k);
        match outcome.summary_k {
            Some(k) => println!("LDAsummary K={k}"),
            None => println!("LDAsummary not trained"),
        }
        println!("summaries {}", outcome.summaries.len());
        if let Some(report) = outcome.evaluation {
            print!("{}", report.render_table());
        }
        return Ok(());
    }
    let ctx = RunContext::open(config)?;
    pipeline::with_jobs(jobs, || -> Result<(), Error> {
        match cli.command {
            Command::Stats => print_stats(&pipeline::stage_stats(&ctx)?),
            Command::Preprocess => {
                let n = pipeline::stage_preprocess(&ctx)?.len();
                println!("sentences {n}");
            }
            Command::TrainTopics => {
                let models = pipeline::stage_train_topics(&ctx)?;
                println!("LDAreview K={}", models.review.k);
                if let Some((m, _)) = &models.summary {
                    println!("LDAsummary K={}", m.k);
                }
            }
            Command::TrainStyle => {
                let model = pipeline::stage_train_style(&ctx)?;
                println!("style base models {}", model.n_splits);
            }
            Command::Summarize => {
                for s in pipeline::stage_summarize(&ctx)? {
                    println!("{}: {} sentences", s.product_id, s.k_used);
                }
            }
            Command::Evaluate { baseline, .. } => {
                let source = match baseline {
                    None => CandidateSource::Pipeline,
                    Some(Baseline::Lead) => CandidateSource::Lead,
                    Some(Baseline::Random) => CandidateSource::Random,
                };
                print!("{}", pipeline::stage_evaluate(&ctx, source)?.render_table());
            }
            Command::Pipeline => unreachable!(),
        }
        Ok(())
    })?
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e} [{}]", e.code());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
