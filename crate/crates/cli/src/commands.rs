use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use tripsel::experiment::{all_cells, cell_name, grid_csv_row, run_grid, GRID_CSV_HEADER};
use tripsel::retrieval::{default_k, evaluate, format_table, report_csv_row, REPORT_CSV_HEADER};
use tripsel::trainer::{mining_dump, train_with_observer};
use tripsel::{Dataset, Embedder};

use crate::args::{AblateArgs, Cli, Command, EvaluateArgs, MineDebugArgs, RunArgs, TrainArgs};
use crate::settings::{manifest_text, read_config, Settings};

pub const TRAIN_LOG: &str = "train_log.csv";
pub const METRICS: &str = "metrics.csv";
pub const GRID: &str = "grid.csv";
pub const CURVE: &str = "curve.csv";
pub const MANIFEST: &str = "manifest.txt";
pub const MODEL: &str = "model.ckpt";

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Train(a) => train(&a, stdout),
        Command::Evaluate(a) => evaluate_cmd(&a, stdout),
        Command::Ablate(a) => ablate(&a, stdout),
        Command::MineDebug(a) => mine_debug(&a, stdout),
    }
}

pub fn resolve(run: &RunArgs) -> Result<Settings> {
    let config = match &run.config {
        Some(path) => read_config(path)?,
        None => Vec::new(),
    };
    Settings::resolve(&config, &run.overrides())
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn write_manifest(
    dir: &Path,
    settings: &Settings,
    command: &str,
    artifacts: &[(&str, PathBuf)],
) -> Result<()> {
    let refs: Vec<(&str, &Path)> = artifacts.iter().map(|(n, p)| (*n, p.as_path())).collect();
    write_file(
        &dir.join(MANIFEST),
        manifest_text(settings, command, &refs).as_bytes(),
    )
}

fn load_checkpoint(path: &Path, ds: &Dataset) -> Result<Embedder> {
    let net = Embedder::load(path)?;
    if net.input_dim() != ds.feature_dim() {
        bail!(
            "checkpoint {} expects {} input features but the dataset has {}",
            path.display(),
            net.input_dim(),
            ds.feature_dim()
        );
    }
    Ok(net)
}

fn retrieval_k(settings: &Settings, ds: &Dataset) -> usize {
    settings
        .k
        .unwrap_or_else(|| default_k(ds.splits.test.len()))
}

fn train(args: &TrainArgs, stdout: &mut dyn Write) -> Result<()> {
    let settings = resolve(&args.run)?;
    let ds = settings.dataset()?;
    let dir = &args.run.out;
    prepare_out(dir)?;
    let model_path = dir.join(MODEL);
    let every = settings.checkpoint_every;
    let (net, log) = train_with_observer(&ds, &settings.train, |net, entry| {
        if every > 0 && (entry.epoch + 1) % every == 0 {
            net.save(&model_path)?;
        }
        Ok(())
    })?;
    net.save(&model_path)?;

    let log_path = dir.join(TRAIN_LOG);
    let mut csv = Vec::new();
    log.write_csv(&mut csv, settings.wall_time)?;
    write_file(&log_path, &csv)?;
    write_manifest(
        dir,
        &settings,
        "train",
        &[("model", model_path), ("train_log", log_path)],
    )?;

    match log.epochs.last() {
        Some(last) => writeln!(
            stdout,
            "trained {} epochs: mean loss {:.6}, {} triplets",
            log.epochs.len(),
            last.mean_loss,
            last.cum_triplets
        )?,
        None => writeln!(stdout, "0 epochs: wrote the initial weights")?,
    }
    writeln!(stdout, "outputs in {}", dir.display())?;
    Ok(())
}

fn evaluate_cmd(args: &EvaluateArgs, stdout: &mut dyn Write) -> Result<()> {
    let settings = resolve(&args.run)?;
    let ds = settings.dataset()?;
    let dir = &args.run.out;
    let ckpt = args.checkpoint.clone().unwrap_or_else(|| dir.join(MODEL));
    let net = load_checkpoint(&ckpt, &ds)?;
    let k = retrieval_k(&settings, &ds);
    let report = evaluate(&net, &ds, &ds.splits.val, &ds.splits.test, k)?;

    prepare_out(dir)?;
    let sampler = &settings.train.sampler;
    let method = cell_name(sampler.anchor_strategy, sampler.image_strategy);
    let metrics_path = dir.join(METRICS);
    let csv = format!(
        "{REPORT_CSV_HEADER}\n{}\n",
        report_csv_row(&method, &report)
    );
    write_file(&metrics_path, csv.as_bytes())?;
    write_manifest(
        dir,
        &settings,
        "evaluate",
        &[("checkpoint", ckpt), ("metrics", metrics_path)],
    )?;

    write!(stdout, "{}", format_table(&[(method, report)]))?;
    writeln!(stdout, "k={k} queries={}", report.queries)?;
    Ok(())
}

fn ablate(args: &AblateArgs, stdout: &mut dyn Write) -> Result<()> {
    let settings = resolve(&args.run)?;
    let ds = settings.dataset()?;
    let k = retrieval_k(&settings, &ds);
    let dir = &args.run.out;
    let cells = run_grid(&ds, &settings.train, &all_cells(), k, args.curve)?;
    prepare_out(dir)?;

    let grid_path = dir.join(GRID);
    let mut grid = format!("{GRID_CSV_HEADER}\n");
    for c in &cells {
        grid.push_str(&grid_csv_row(c));
        grid.push('\n');
    }
    write_file(&grid_path, grid.as_bytes())?;
    let mut artifacts = vec![("grid", grid_path)];

    if args.curve {
        let curve_path = dir.join(CURVE);
        let mut w = BufWriter::new(
            File::create(&curve_path)
                .with_context(|| format!("cannot write {}", curve_path.display()))?,
        );
        writeln!(w, "anchor,images,epoch,cum_triplets,f1")?;
        for c in &cells {
            for p in &c.curve {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    c.anchor, c.images, p.epoch, p.cum_triplets, p.f1
                )?;
            }
        }
        w.flush()?;
        artifacts.push(("curve", curve_path));
    }
    write_manifest(dir, &settings, "ablate", &artifacts)?;

    let rows: Vec<_> = cells.iter().map(|c| (c.name(), c.report)).collect();
    write!(stdout, "{}", format_table(&rows))?;
    for c in &cells {
        writeln!(stdout, "{:<10} triplets={}", c.name(), c.cum_triplets)?;
    }
    Ok(())
}

fn mine_debug(args: &MineDebugArgs, stdout: &mut dyn Write) -> Result<()> {
    let settings = resolve(&args.run)?;
    let ds = settings.dataset()?;
    let net = match &args.checkpoint {
        Some(path) => load_checkpoint(path, &ds)?,
        None => settings.train.initial_embedder(ds.feature_dim())?,
    };
    let traces = mining_dump(&ds, &settings.train, &net, args.batches)?;
    if traces.len() < args.batches {
        writeln!(
            stdout,
            "# only {} full batches in the training split",
            traces.len()
        )?;
    }
    for (b, t) in traces.iter().enumerate() {
        if args.full {
            t.write_full(b, stdout)?;
        } else {
            t.write_summary(b, stdout)?;
        }
    }
    Ok(())
}
