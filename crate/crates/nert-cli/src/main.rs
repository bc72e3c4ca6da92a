//! Command-line front end for the training and evaluation pipeline.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nert_core::coords::{default_hourly_fields, CoordMode, CoordinateConfig};
use nert_core::error::Error;
use nert_core::eval::{aggregate_runs, compare_table, write_summary_csv};
use nert_core::ingest::{write_csv, write_role_csv, BlockLayout};
use nert_core::models::{Model, ModelKind};
use nert_core::modulation::{
    adapt, family_split, meta_train, ModulatedNert, ModulationMode, ModulationSpec,
};
use nert_core::presets::Preset;
use nert_core::runner::{execute, read_manifest, read_report, DataSelector, RunConfig};
use nert_core::synthetic::{make_benchmark, OscillatorTask, BENCHMARK_NAMES};

#[derive(Parser)]
#[command(
    name = "nert",
    about = "Factored implicit neural representations for periodic signals",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a benchmark dataset as CSV plus a role-mask CSV.
    Generate(GenerateArgs),
    /// Train a model and write a self-describing run directory.
    Train(TrainArgs),
    /// Re-evaluate a finished run from its checkpoint.
    Evaluate(EvaluateArgs),
    /// Predict at explicit coordinates using a run's checkpoint.
    Predict(PredictArgs),
    /// Meta-train a latent-modulated model on a family of samples.
    MetaTrain(MetaTrainArgs),
    /// Adapt a meta-trained model to an unseen sample and report metrics.
    Adapt(AdaptArgs),
    /// Aggregate run directories into a side-by-side comparison table.
    Compare(CompareArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// One of: sine50, oscillator-undamped, oscillator-damped, helmholtz2d,
    /// coupled-spring, lorenz.
    benchmark: String,
    /// Oscillator split: interp, extrap, or mixed.
    #[arg(long, default_value = "interp")]
    task: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (defaults under NERT_LAB_HOME or ./runs).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Model kind: nert, siren, or ffn.
    #[arg(long, default_value = "nert")]
    model: String,
    /// Benchmark name, "periodic-series", or a CSV path. Not needed when
    /// --config provides a full manifest.
    #[arg(long)]
    data: Option<String>,
    /// Full run manifest (JSON); overrides every other flag.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// Comma-separated seed list; each seed becomes its own run directory.
    #[arg(long, default_value = "0")]
    seed: String,
    /// Active missing blocks for the block protocol (1-3).
    #[arg(long)]
    blocks: Option<usize>,
    /// Drop ratio in (0,1) for the random imputation protocol.
    #[arg(long)]
    drop_ratio: Option<f64>,
    #[arg(long)]
    penalty_lambda: Option<f64>,
    /// Oscillator task variant when --data is an oscillator benchmark.
    #[arg(long)]
    task: Option<String>,
    /// Parallel (seed x model) workers.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Run directory containing manifest.json and checkpoint.json.
    #[arg(long)]
    run: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    run: PathBuf,
    /// Comma-separated raw coordinate values (first temporal component).
    #[arg(long)]
    at: String,
    /// Feature index to predict.
    #[arg(long, default_value_t = 0)]
    feature: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MetaTrainArgs {
    /// Family size used for meta-training.
    #[arg(long, default_value_t = 8)]
    samples: usize,
    /// Points per sample.
    #[arg(long, default_value_t = 240)]
    points: usize,
    /// Modulation mode: scale or scale-and-period.
    #[arg(long, default_value = "scale")]
    mode: String,
    #[arg(long, default_value_t = 64)]
    latent_dim: usize,
    #[arg(long, default_value_t = 3)]
    inner_steps: usize,
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AdaptArgs {
    /// Run directory written by meta-train.
    #[arg(long)]
    run: PathBuf,
    /// Seed offset of the unseen family sample to adapt to.
    #[arg(long, default_value_t = 0)]
    sample: usize,
    #[arg(long)]
    inner_steps: Option<usize>,
}

#[derive(Args)]
struct CompareArgs {
    /// Two or more run directories.
    dirs: Vec<PathBuf>,
    /// Write the comparison CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-configuration aggregate summaries next to --out.
    #[arg(long, default_value_t = false)]
    summaries: bool,
}

fn output_root() -> PathBuf {
    std::env::var_os("NERT_LAB_HOME")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"))
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Numeric(_) => 3,
        Error::Io(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Train(args) => cmd_train(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Predict(args) => cmd_predict(args),
        Command::MetaTrain(args) => cmd_meta_train(args),
        Command::Adapt(args) => cmd_adapt(args),
        Command::Compare(args) => cmd_compare(args),
    }
}

fn parse_task(task: &str) -> Result<OscillatorTask, Error> {
    match task {
        "interp" => Ok(OscillatorTask::Interp),
        "extrap" => Ok(OscillatorTask::Extrap),
        "mixed" => Ok(OscillatorTask::Mixed),
        other => Err(Error::config(format!("unknown task '{other}'"))),
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Error> {
    if !BENCHMARK_NAMES.contains(&args.benchmark.as_str()) {
        return Err(Error::config(format!(
            "unknown benchmark '{}'; expected one of {BENCHMARK_NAMES:?}",
            args.benchmark
        )));
    }
    let preset = Preset::for_benchmark(&args.benchmark)?;
    let mut bench = preset.bench.clone();
    bench.seed = args.seed;
    bench.osc_task = parse_task(&args.task)?;
    let ds = make_benchmark(&args.benchmark, &bench)?;

    let dir = args
        .out
        .unwrap_or_else(|| output_root().join(format!("data-{}", args.benchmark)));
    std::fs::create_dir_all(&dir)?;
    write_csv(&dir.join("data.csv"), &ds.axis, &ds.targets, &ds.feature_names)?;
    write_role_csv(&dir.join("roles.csv"), &ds)?;
    println!(
        "wrote {} rows x {} features to {}",
        ds.n(),
        ds.m(),
        dir.display()
    );
    Ok(())
}

fn parse_seeds(text: &str) -> Result<Vec<u64>, Error> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| Error::config(format!("bad seed '{s}'")))
        })
        .collect()
}

/// Resolve CLI flags into one RunConfig per requested seed.
fn resolve_run_configs(args: &TrainArgs) -> Result<Vec<RunConfig>, Error> {
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        return Ok(vec![cfg]);
    }
    let kind: ModelKind = args.model.parse()?;
    let seeds = parse_seeds(&args.seed)?;
    let data_name = args
        .data
        .as_deref()
        .ok_or_else(|| Error::config("--data is required unless --config is given"))?;

    let mut configs = Vec::new();
    for &seed in &seeds {
        let (data, coord, preset, normalize, eval_raw) = if data_name == "periodic-series" {
            let layout = BlockLayout::default_12();
            let data = DataSelector::PeriodicSeries {
                points: layout.total_points(),
                series_seed: 0,
                layout,
                active_blocks: args.blocks.unwrap_or(1),
            };
            let coord = CoordinateConfig {
                mode: CoordMode::Calendar,
                fields: default_hourly_fields(),
                smin: 0.0,
                smax: 1.0,
            };
            (data, coord, Preset::periodic_series(1), true, false)
        } else if data_name.ends_with(".csv") {
            let path = PathBuf::from(data_name);
            let coord = CoordinateConfig {
                mode: CoordMode::Calendar,
                fields: default_hourly_fields(),
                smin: 0.0,
                smax: 1.0,
            };
            let data = if let Some(ratio) = args.drop_ratio {
                DataSelector::CsvDrop { path, ratio, mask_seed: seed }
            } else {
                DataSelector::CsvBlocks {
                    path,
                    layout: BlockLayout::default_12(),
                    active_blocks: args.blocks.unwrap_or(1),
                }
            };
            (data, coord, Preset::periodic_series(1), true, false)
        } else {
            let preset = Preset::for_benchmark(data_name)?;
            let mut bench = preset.bench.clone();
            if let Some(task) = &args.task {
                bench.osc_task = parse_task(task)?;
            }
            let data = DataSelector::Benchmark { name: data_name.to_string(), config: bench };
            let normalize = preset.normalize;
            (data, CoordinateConfig::default(), preset, normalize, normalize)
        };

        let mut train = preset.train.clone();
        train.seed = seed;
        if let Some(epochs) = args.epochs {
            train.epochs = epochs;
        }
        if let Some(lr) = args.lr {
            train.learning_rate = lr;
        }
        if let Some(lambda) = args.penalty_lambda {
            train.penalty_weight = lambda;
        }
        let model = preset.model_spec(kind, seed)?;
        configs.push(RunConfig {
            run_name: format!("{data_name}-{}-s{seed}", args.model),
            model,
            train,
            data,
            coord,
            normalize,
            eval_raw_units: eval_raw,
        });
    }
    Ok(configs)
}

fn cmd_train(args: TrainArgs) -> Result<(), Error> {
    let configs = resolve_run_configs(&args)?;
    let root = args.out.clone().unwrap_or_else(output_root);
    let jobs = args.jobs.max(1);

    let work: Vec<(RunConfig, PathBuf)> = configs
        .into_iter()
        .map(|cfg| {
            let dir = root.join(&cfg.run_name);
            (cfg, dir)
        })
        .collect();

    // Independent (seed, model) runs execute in parallel threads with
    // isolated state; outputs land in separate directories. At most `jobs`
    // workers run at once.
    let results: Vec<Result<String, Error>> = if jobs == 1 || work.len() == 1 {
        work.iter().map(|(cfg, dir)| run_one(cfg, dir)).collect()
    } else {
        let mut results = Vec::with_capacity(work.len());
        for chunk in work.chunks(jobs) {
            let chunk_results: Vec<Result<String, Error>> = std::thread::scope(|scope| {
                let handles: Vec<_> = chunk
                    .iter()
                    .map(|(cfg, dir)| scope.spawn(move || run_one(cfg, dir)))
                    .collect();
                handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
            });
            results.extend(chunk_results);
        }
        results
    };

    let mut failed = None;
    for result in results {
        match result {
            Ok(line) => println!("{line}"),
            Err(err) => {
                eprintln!("run failed: {err}");
                failed = Some(err);
            }
        }
    }
    match failed {
        Some(err) => Err(err),
        None => Ok(()),
    }
}

fn run_one(cfg: &RunConfig, dir: &PathBuf) -> Result<String, Error> {
    let outcome = execute(cfg, Some(dir))?;
    let m = &outcome.report.metrics;
    Ok(format!(
        "{}: train={} val={} interp={} extrap={} -> {}",
        cfg.run_name,
        fmt_opt(m.train_mse),
        fmt_opt(m.validation_mse),
        fmt_opt(m.interp_mse),
        fmt_opt(m.extrap_mse),
        dir.display()
    ))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "-".into())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), Error> {
    let metrics = nert_core::runner::evaluate_run(&args.run)?;
    println!("{}", serde_json::to_string_pretty(&metrics)?);
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<(), Error> {
    let manifest = read_manifest(&args.run)?;
    let dataset = manifest.data.load(&manifest.coord)?;
    let model = Model::load_checkpoint(&args.run.join("checkpoint.json"))?;
    if args.feature >= dataset.m() {
        return Err(Error::Index(format!(
            "feature {} out of {}",
            args.feature,
            dataset.m()
        )));
    }
    let raw: Vec<f64> = args
        .at
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::config(format!("bad coordinate '{s}'")))
        })
        .collect::<Result<_, _>>()?;
    if dataset.coords.d_ct != 1 {
        return Err(Error::config(
            "predict --at supports one-dimensional temporal coordinates; use traces for grids",
        ));
    }
    let mut ct = Vec::with_capacity(raw.len());
    for &t in &raw {
        let coord = dataset.coords.map_raw(&[t])?;
        ct.push(coord.components[0]);
    }
    let m = dataset.m();
    let mut cf = vec![0.0; raw.len() * m];
    for row in 0..raw.len() {
        cf[row * m + args.feature] = 1.0;
    }
    let batch = nert_core::dataset::CoordBatch {
        ct,
        cf,
        d_ct: 1,
        m,
        cells: (0..raw.len()).map(|i| (i, args.feature)).collect(),
        targets: vec![f64::NAN; raw.len()],
    };
    let pred = model.predict(&batch)?;
    let mut out = String::from("t,pred,period,scale\n");
    for (i, &t) in raw.iter().enumerate() {
        out.push_str(&format!("{t},{}", pred.pred[i]));
        out.push(',');
        if let Some(p) = &pred.period {
            out.push_str(&format!("{}", p[i]));
        }
        out.push(',');
        if let Some(s) = &pred.scale {
            out.push_str(&format!("{}", s[i]));
        }
        out.push('\n');
    }
    match args.out {
        Some(path) => std::fs::write(path, out)?,
        None => print!("{out}"),
    }
    Ok(())
}

fn parse_mode(mode: &str) -> Result<ModulationMode, Error> {
    match mode {
        "scale" => Ok(ModulationMode::ScaleOnly),
        "scale-and-period" => Ok(ModulationMode::ScaleAndPeriod),
        other => Err(Error::config(format!("unknown modulation mode '{other}'"))),
    }
}

fn modulation_nert_spec(seed: u64) -> nert_core::models::NertSpec {
    nert_core::models::NertSpec {
        d_ct: 1,
        m: 1,
        dim_psi_t: 8,
        dim_psi_f: 8,
        dim_psi_fourier: 16,
        dim_hidden_period: 12,
        dim_hidden_scale: 12,
        omega_init: 50.0,
        omega_inner: 1.0,
        learn_frequencies: true,
        seed,
        ..Default::default()
    }
}

fn cmd_meta_train(args: MetaTrainArgs) -> Result<(), Error> {
    let mode = parse_mode(&args.mode)?;
    let total = args.samples + 2;
    let (train_samples, _held) = family_split(total, args.samples, args.points, args.seed)?;
    let spec = ModulationSpec {
        latent_dim: args.latent_dim,
        mode,
        inner_steps: args.inner_steps,
        epochs: args.epochs,
        seed: args.seed,
        ..Default::default()
    };
    let mut mm = ModulatedNert::new(modulation_nert_spec(args.seed), spec)?;
    let report = meta_train(&mut mm, &train_samples)?;
    let dir = args
        .out
        .unwrap_or_else(|| output_root().join(format!("meta-{}-{}", args.mode, args.seed)));
    std::fs::create_dir_all(&dir)?;
    let ck = mm.to_checkpoint(&report.registry);
    std::fs::write(dir.join("mod-checkpoint.json"), serde_json::to_string(&ck)?)?;
    let summary = serde_json::json!({
        "samples": args.samples,
        "points": args.points,
        "mode": args.mode,
        "episode_loss_first": report.episode_loss.first(),
        "episode_loss_last": report.episode_loss.last(),
        "registry_len": report.registry.len(),
    });
    std::fs::write(dir.join("meta-report.json"), serde_json::to_string_pretty(&summary)?)?;
    println!(
        "meta-trained {} epochs; episode loss {} -> {}; wrote {}",
        args.epochs,
        report.episode_loss.first().copied().unwrap_or(f64::NAN),
        report.episode_loss.last().copied().unwrap_or(f64::NAN),
        dir.display()
    );
    Ok(())
}

fn cmd_adapt(args: AdaptArgs) -> Result<(), Error> {
    let text = std::fs::read_to_string(args.run.join("mod-checkpoint.json"))?;
    let ck: nert_core::modulation::ModulatedCheckpoint = serde_json::from_str(&text)?;
    let mm = ModulatedNert::from_checkpoint(&ck)?;
    let meta_text = std::fs::read_to_string(args.run.join("meta-report.json"))?;
    let meta: serde_json::Value = serde_json::from_str(&meta_text)?;
    let samples = meta["samples"].as_u64().unwrap_or(8) as usize;
    let points = meta["points"].as_u64().unwrap_or(240) as usize;
    let total = samples + 2;
    let (_train, held) = family_split(total, samples, points, mm.spec.seed)?;
    let sample = held
        .get(args.sample)
        .ok_or_else(|| Error::Index(format!("held-out sample {} out of {}", args.sample, held.len())))?;
    let steps = args.inner_steps.unwrap_or(mm.spec.inner_steps);
    let outcome = adapt(&mm, sample, steps)?;
    let report = serde_json::json!({
        "sample": args.sample,
        "inner_steps": steps,
        "adapted": outcome.adapted,
        "zero_latent": outcome.zero_latent,
        "train_mse_trajectory": outcome.latent.trajectory,
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<(), Error> {
    if args.dirs.len() < 2 {
        return Err(Error::config("compare needs at least two run directories"));
    }
    let reports: Vec<_> = args
        .dirs
        .iter()
        .map(|d| read_report(d))
        .collect::<Result<_, _>>()?;
    let table = compare_table(&reports)?;
    match &args.out {
        Some(path) => std::fs::write(path, &table)?,
        None => print!("{table}"),
    }
    if args.summaries {
        use std::collections::BTreeMap;
        let mut groups: BTreeMap<String, Vec<nert_core::eval::RunReport>> = BTreeMap::new();
        for r in reports {
            groups.entry(r.config_hash.clone()).or_default().push(r);
        }
        let root = args
            .out
            .as_ref()
            .and_then(|p| p.parent().map(PathBuf::from))
            .unwrap_or_else(output_root);
        for (hash, group) in groups {
            let summary = aggregate_runs(&group)?;
            write_summary_csv(&root.join(format!("summary-{hash}.csv")), &summary)?;
        }
    }
    Ok(())
}
