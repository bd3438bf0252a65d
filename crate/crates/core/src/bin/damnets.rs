use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use damnets::dataset::{load_nts, save_nts};
use damnets::eval::{build_report, write_plots, EvalReport, StatisticId};
use damnets::generators::{
    gen_ba, gen_bipartite, gen_community_decay, gen_many, BAParams, BipartiteParams,
    CommunityDecayParams,
};
use damnets::graph::NetworkTimeSeries;
use damnets::model::{
    load_checkpoint, save_checkpoint, train, AnyModel, CheckpointMeta, ModelConfig, ModelKind,
};
use damnets::rng::{child_seeds, entropy_seed, rng_from_seed};

#[derive(Parser)]
#[command(name = "damnets", version, about = "Generative modelling of network time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset as JSON Lines.
    Gen(GenArgs),
    /// Train a transition model and write a checkpoint.
    Train(TrainArgs),
    /// Roll a trained model forward from the first snapshot of each test series.
    Sample(SampleArgs),
    /// Compare samples against a test set and write an MMD report.
    Eval(EvalArgs),
    /// Render the curves of an evaluation report as SVG files.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    Ba,
    Bipartite,
    Community,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    model: Generator,
    #[arg(long)]
    num_series: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Node count (ba).
    #[arg(long)]
    n: Option<usize>,
    /// Edges per arriving node (ba).
    #[arg(long)]
    m: Option<usize>,
    /// Number of transitions (bipartite, community).
    #[arg(long = "T")]
    t: Option<usize>,
    /// Nodes on each side (bipartite).
    #[arg(long)]
    per_side: Option<usize>,
    /// Initial edge probability (bipartite).
    #[arg(long)]
    p: Option<f64>,
    /// Per-step concentration probability (bipartite).
    #[arg(long)]
    p_con: Option<f64>,
    /// Comma-separated community sizes (community).
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    p_int: Option<f64>,
    #[arg(long)]
    p_ext: Option<f64>,
    #[arg(long)]
    f_dec: Option<f64>,
    /// Index of the decaying community; defaults to the last one.
    #[arg(long)]
    decay: Option<usize>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "damnets")]
    model: ModelKind,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` overrides applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    /// Per-epoch CSV log; defaults to `<out>.log.csv`.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    ckpt: PathBuf,
    #[arg(long)]
    init_from: PathBuf,
    #[arg(long)]
    steps: usize,
    #[arg(long, default_value_t = 1)]
    per_series: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    samples: PathBuf,
    #[arg(long, default_value = "all")]
    stats: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

type CliResult<T> = Result<T, String>;

fn need<T>(value: Option<T>, flag: &str, generator: &str) -> CliResult<T> {
    value.ok_or_else(|| format!("--{flag} is required for --model {generator}"))
}

fn seed_or_entropy(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = entropy_seed();
        info!("no --seed given, using {s}");
        s
    })
}

fn cmd_gen(a: GenArgs) -> CliResult<()> {
    let seed = seed_or_entropy(a.seed);
    let series = match a.model {
        Generator::Ba => {
            let n = need(a.n, "n", "ba")?;
            let m = need(a.m, "m", "ba")?;
            gen_many(a.num_series, seed, |seed| gen_ba(BAParams { n, m, seed }))
        }
        Generator::Bipartite => {
            let params = BipartiteParams {
                per_side: need(a.per_side, "per-side", "bipartite")?,
                p: need(a.p, "p", "bipartite")?,
                p_con: need(a.p_con, "p-con", "bipartite")?,
                steps: need(a.t, "T", "bipartite")?,
                seed: 0,
            };
            gen_many(a.num_series, seed, |seed| {
                gen_bipartite(BipartiteParams { seed, ..params })
            })
        }
        Generator::Community => {
            let sizes = need(a.sizes, "sizes", "community")?;
            let params = CommunityDecayParams {
                decay: a.decay.unwrap_or(sizes.len().saturating_sub(1)),
                community_sizes: sizes,
                p_int: need(a.p_int, "p-int", "community")?,
                p_ext: need(a.p_ext, "p-ext", "community")?,
                f_dec: need(a.f_dec, "f-dec", "community")?,
                steps: need(a.t, "T", "community")?,
                seed: 0,
            };
            gen_many(a.num_series, seed, |seed| {
                gen_community_decay(&CommunityDecayParams {
                    seed,
                    ..params.clone()
                })
            })
        }
    }
    .map_err(|e| e.to_string())?;
    save_nts(&series, &a.out).map_err(|e| e.to_string())?;
    let first = &series[0];
    println!(
        "wrote {} series (n={}, T={}, seed={seed}) to {}",
        series.len(),
        first.n,
        first.num_transitions(),
        a.out.display()
    );
    Ok(())
}

fn has_seed_key(path: &Path) -> CliResult<bool> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(text.lines().any(|l| {
        let l = l.split('#').next().unwrap_or("");
        l.split_once('=').is_some_and(|(k, _)| k.trim() == "seed")
    }))
}

fn load_dataset(path: &Path) -> CliResult<Vec<NetworkTimeSeries>> {
    let data = load_nts(path).map_err(|e| e.to_string())?;
    if data.is_empty() {
        return Err(format!("{}: no series", path.display()));
    }
    Ok(data)
}

fn cmd_train(a: TrainArgs) -> CliResult<()> {
    let mut config = match &a.config {
        Some(p) => ModelConfig::load(p).map_err(|e| e.to_string())?,
        None => ModelConfig::default(),
    };
    for kv in &a.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| format!("--set expects KEY=VALUE, got `{kv}`"))?;
        config.set(k.trim(), v.trim())?;
    }
    let config_seeded = match &a.config {
        Some(p) => has_seed_key(p)?,
        None => false,
    } || a.overrides.iter().any(|kv| kv.trim_start().starts_with("seed"));
    config.seed = match a.seed {
        Some(s) => s,
        None if config_seeded => config.seed,
        None => seed_or_entropy(None),
    };
    config.validate().map_err(|e| e.to_string())?;

    let data = load_dataset(&a.data)?;
    let n = data[0].n;
    if let Some(bad) = data.iter().find(|s| s.n != n) {
        return Err(format!("series `{}` has n={} but the first has n={n}", bad.id, bad.n));
    }
    let mut model = AnyModel::new(a.model, n, &config).map_err(|e| e.to_string())?;

    let log_path = a
        .log
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.log.csv", a.out.display())));
    let mut log = BufWriter::new(File::create(&log_path).map_err(|e| format!("{}: {e}", log_path.display()))?);
    writeln!(log, "epoch,train_nll,val_nll,train_nll_per_decision,val_nll_per_decision")
        .map_err(|e| e.to_string())?;
    let mut io_err = None;
    let report = train(model.model_mut(), &data, |e| {
        info!("epoch {} train {:.4} val {:.4}", e.epoch, e.train_nll, e.val_nll);
        if let Err(err) = writeln!(
            log,
            "{},{},{},{},{}",
            e.epoch, e.train_nll, e.val_nll, e.train_nll_per_decision, e.val_nll_per_decision
        ) {
            io_err.get_or_insert(err);
        }
    })
    .map_err(|e| e.to_string())?;
    if let Some(err) = io_err {
        return Err(format!("{}: {err}", log_path.display()));
    }
    log.flush().map_err(|e| e.to_string())?;

    let meta = CheckpointMeta {
        best_val_nll: Some(report.best_val_nll),
        best_epoch: Some(report.best_epoch),
        epochs_run: report.history.len(),
        val_indices: report.val_indices.clone(),
    };
    save_checkpoint(model.model(), &meta, &a.out).map_err(|e| e.to_string())?;
    println!(
        "trained {} on {} series (n={n}, seed={}): best epoch {} of {}, val NLL {:.4}; wrote {}",
        a.model.name(),
        data.len(),
        config.seed,
        report.best_epoch,
        report.history.len(),
        report.best_val_nll,
        a.out.display()
    );
    Ok(())
}

fn cmd_sample(a: SampleArgs) -> CliResult<()> {
    let (model, _) = load_checkpoint(&a.ckpt).map_err(|e| e.to_string())?;
    let model = model.model();
    let init = load_dataset(&a.init_from)?;
    if let Some(bad) = init.iter().find(|s| s.n != model.n()) {
        return Err(format!(
            "series `{}` has n={} but the checkpoint models n={}",
            bad.id,
            bad.n,
            model.n()
        ));
    }
    let seed = seed_or_entropy(a.seed);
    let seeds = child_seeds(seed, init.len() * a.per_series);
    let mut out = Vec::with_capacity(seeds.len());
    for (i, s) in init.iter().enumerate() {
        for k in 0..a.per_series {
            let mut rng = rng_from_seed(seeds[i * a.per_series + k]);
            let id = format!("{}/sample{k}@seed={seed}", s.id);
            out.push(
                model
                    .sample_series(&id, &s.graphs[0], a.steps, &mut rng)
                    .map_err(|e| e.to_string())?,
            );
        }
    }
    save_nts(&out, &a.out).map_err(|e| e.to_string())?;
    println!("wrote {} sampled series of {} steps to {}", out.len(), a.steps, a.out.display());
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> CliResult<()> {
    let stats = StatisticId::parse_list(&a.stats).map_err(|e| e.to_string())?;
    let test = load_dataset(&a.test)?;
    let samples = load_dataset(&a.samples)?;
    let report = build_report(&test, &samples, &stats, None).map_err(|e| e.to_string())?;
    report.save(&a.out).map_err(|e| e.to_string())?;
    for (id, r) in &report.per_stat {
        println!("{id:<22} {:.6}", r.mmd_bar);
    }
    Ok(())
}

fn cmd_plot(a: PlotArgs) -> CliResult<()> {
    let report = EvalReport::load(&a.report).map_err(|e| format!("{}: {e}", a.report.display()))?;
    let files = write_plots(&report, &a.out).map_err(|e| e.to_string())?;
    println!("wrote {} plots to {}", files.len(), a.out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Train(a) => cmd_train(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Plot(a) => cmd_plot(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
