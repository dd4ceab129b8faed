use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use pumpwatch::classifiers::{train_adaboost, train_forest, Dataset, FeatureMask, Model, ModelFile};
use pumpwatch::detectors::{
    write_alerts, ChunkRule, CrowdConfig, DetectorState, KampsConfig, KampsPreset, KampsTable, StreamingDetector,
};
use pumpwatch::evaluation::{
    build_slices, kfold_evaluate, load_trade_files, read_events_csv, split_covered, write_events_csv, Averaging,
    DetectorSpec, EvalOptions, PumpEvent,
};
use pumpwatch::features::{extract_features, grid_floor, read_feature_csv, write_feature_csv, FeatureRow, WindowConfig};
use pumpwatch::ingest::{fetch_historical, parse_trades, write_trades_csv, ExchangeClient, TradeFormat};
use pumpwatch::synth::{generate, PumpScenario, SuiteConfig};
use pumpwatch::{AlertEvent, Millis, Pair, TradeRecord};

use crate::config::{window_config, Config};
use crate::error::CliError;
use crate::{
    AveragingArg, DetectArgs, DetectorArg, EnsembleKind, EvaluateArgs, FetchArgs, IngestArgs, KampsArg, MaskArg,
    Preset, SynthArgs, TrainArgs,
};

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(CliError::io(path))?))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    Ok(BufReader::new(File::open(path).map_err(CliError::io(path))?))
}

fn pair_for(path: &Path, explicit: Option<&str>) -> Pair {
    let name = explicit
        .map(str::to_string)
        .or_else(|| path.file_stem().map(|s| s.to_string_lossy().to_uppercase()))
        .unwrap_or_else(|| "UNKNOWN".into());
    Pair::new(&name)
}

fn read_trades(path: &Path, pair: &Pair) -> Result<Vec<TradeRecord>, CliError> {
    parse_trades(open(path)?, TradeFormat::from_path(path), pair).map_err(CliError::ingest(path))
}

fn read_events(path: &Path) -> Result<Vec<PumpEvent>, CliError> {
    Ok(read_events_csv(open(path)?)?)
}

fn mask(m: MaskArg) -> FeatureMask {
    match m {
        MaskArg::All => FeatureMask::All,
        MaskArg::NoTime => FeatureMask::NoTime,
    }
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string(value).expect("summary serializes"));
}

pub fn fetch(config: &Config, a: FetchArgs) -> Result<(), CliError> {
    let mut cfg = config.exchange.clone();
    if let Some(u) = a.base_url {
        cfg.base_url = u;
    }
    if let Some(n) = a.page_size {
        cfg.page_size = n;
    }
    if let Some(n) = a.rate_limit {
        cfg.requests_per_minute = n;
    }
    let pair = Pair::new(&a.pair);
    let mut client = ExchangeClient::new(cfg);
    let (trades, manifest) = fetch_historical(&pair, a.start, a.end, &mut client)?;
    let mut out = create(&a.out)?;
    write_trades_csv(&trades, &mut out, true).map_err(CliError::io(&a.out))?;
    let manifest_path = a.manifest.unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".manifest.json");
        p.into()
    });
    let mut m = create(&manifest_path)?;
    serde_json::to_writer_pretty(&mut m, &manifest).map_err(|e| CliError::Data(e.to_string()))?;
    m.flush().map_err(CliError::io(&manifest_path))?;
    print_json(&serde_json::json!({ "trades": trades.len(), "manifest": manifest }));
    Ok(())
}

fn signals_for(events: &[PumpEvent], pair: Option<&Pair>) -> BTreeSet<Millis> {
    events
        .iter()
        .filter(|e| pair.is_none_or(|p| &e.pair == p))
        .map(|e| e.signal_timestamp)
        .collect()
}

fn chunk_has_signal(signals: &BTreeSet<Millis>, start: Millis, chunk_ms: i64) -> bool {
    signals.range(start..start + chunk_ms).next().is_some()
}

pub fn ingest(config: &Config, a: IngestArgs) -> Result<(), CliError> {
    let window = window_config(&config.features, a.chunk, a.window.as_deref(), a.exclusive)?;
    let pair = pair_for(&a.input, a.pair.as_deref());
    let trades = read_trades(&a.input, &pair)?;
    let chunk_ms = window.chunk_ms();
    let origin = a.start.or(trades.first().map(|t| t.timestamp)).map(|t| grid_floor(t, chunk_ms));
    let mut rows: Vec<FeatureRow> = match origin {
        Some(origin) => extract_features(&trades, &window, origin, a.end)?.iter().map(FeatureRow::from).collect(),
        None => Vec::new(),
    };
    let mut positives = 0;
    if let Some(path) = &a.events {
        let signals = signals_for(&read_events(path)?, Some(&pair));
        for r in &mut rows {
            let hit = chunk_has_signal(&signals, r.chunk_start, chunk_ms);
            positives += hit as usize;
            r.label = Some(hit);
        }
    }
    let out = create(&a.features_out)?;
    write_feature_csv(&rows, out).map_err(CliError::io(&a.features_out))?;
    print_json(&serde_json::json!({
        "pair": pair,
        "trades": trades.len(),
        "chunks": rows.len(),
        "labeled_chunks": positives,
        "window": window,
    }));
    Ok(())
}

pub fn synth(a: SynthArgs) -> Result<(), CliError> {
    let scenario = match (&a.scenario, a.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
            PumpScenario::from_toml(&text)?
        }
        (None, Some(p)) => {
            let suite = SuiteConfig::default();
            match p {
                Preset::Standard => suite.standard(a.seed, a.index),
                Preset::Crowd => suite.crowd(a.seed, a.index),
                Preset::Quiet => suite.quiet(a.seed, a.index, a.days),
            }
        }
        (None, None) => return Err(CliError::Usage("one of --scenario or --preset is required".into())),
    };
    let output = generate(&scenario, a.seed)?;
    let mut out = create(&a.out)?;
    write_trades_csv(&output.trades, &mut out, true).map_err(CliError::io(&a.out))?;
    out.flush().map_err(CliError::io(&a.out))?;
    if let Some(path) = &a.truth {
        write_events_csv(&output.events, create(path)?)?;
    }
    if let Some(path) = &a.scenario_out {
        let mut w = create(path)?;
        w.write_all(scenario.to_toml().as_bytes()).map_err(CliError::io(path))?;
        w.flush().map_err(CliError::io(path))?;
    }
    print_json(&serde_json::json!({
        "pair": scenario.pair,
        "trades": output.trades.len(),
        "events": output.events,
    }));
    Ok(())
}

/// Smallest gap between consecutive chunk starts.
fn chunk_spacing(rows: &[FeatureRow]) -> Option<i64> {
    rows.windows(2).map(|w| w[1].chunk_start - w[0].chunk_start).filter(|&d| d > 0).min()
}

pub fn train(config: &Config, a: TrainArgs) -> Result<(), CliError> {
    let window = window_config(&config.features, a.chunk, a.window.as_deref(), a.exclusive)?;
    let feature_mask = mask(a.mask);
    let signals = match &a.events {
        Some(path) => Some(signals_for(&read_events(path)?, a.pair.as_ref().map(|p| Pair::new(p)).as_ref())),
        None => None,
    };
    let mut data = Dataset::new(feature_mask.names());
    for path in &a.features {
        let rows = read_feature_csv(open(path)?).map_err(CliError::ingest(path))?;
        if let Some(d) = chunk_spacing(&rows).filter(|&d| d != window.chunk_ms()) {
            return Err(CliError::Data(format!(
                "{}: chunks are {} ms apart but the chunk size is {} s",
                path.display(),
                d,
                window.chunk_seconds
            )));
        }
        for r in rows.iter().filter(|r| !r.warm_up) {
            let label = match &signals {
                Some(s) => chunk_has_signal(s, r.chunk_start, window.chunk_ms()),
                None => r.label.ok_or_else(|| {
                    CliError::Data(format!("{}: unlabeled rows; pass --events", path.display()))
                })?,
            };
            data.push(&feature_mask.select(&r.features), label)?;
        }
    }
    if data.n_positive() == 0 {
        return Err(CliError::Data("training set has no positive chunks".into()));
    }
    let model = match a.model {
        EnsembleKind::Rf => Model::RandomForest(train_forest(&data, &config.forest, a.seed)?),
        EnsembleKind::Ada => Model::AdaBoost(train_adaboost(&data, &config.boost, a.seed)?),
    };
    let file = ModelFile::new(model, feature_mask, Some(window))?;
    let mut out = create(&a.out)?;
    file.save(&mut out)?;
    out.flush().map_err(CliError::io(&a.out))?;
    print_json(&serde_json::json!({
        "rows": data.n_rows(),
        "positives": data.n_positive(),
        "model": a.out,
    }));
    Ok(())
}

fn kamps_config(config: &Config, preset: KampsArg) -> Result<KampsConfig, CliError> {
    let preset = match preset {
        KampsArg::Initial => KampsPreset::Initial,
        KampsArg::Balanced => KampsPreset::Balanced,
        KampsArg::Strict => KampsPreset::Strict,
    };
    match &config.evaluate.kamps_table {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
            Ok(KampsTable::from_toml(&text)?.config(preset))
        }
        None => Ok(KampsConfig::preset(preset)),
    }
}

pub fn evaluate(config: &Config, a: EvaluateArgs) -> Result<(), CliError> {
    let window = window_config(&config.features, a.chunk, a.window.as_deref(), a.exclusive)?;
    let cooldown_secs = a.cooldown.unwrap_or(config.detect.cooldown_secs);
    let spec = match a.model {
        DetectorArg::Rf => DetectorSpec::RandomForest {
            forest: config.forest,
            mask: mask(a.mask),
            cooldown_secs,
        },
        DetectorArg::Ada => DetectorSpec::AdaBoost {
            boost: config.boost,
            mask: mask(a.mask),
            cooldown_secs,
        },
        DetectorArg::Threshold => DetectorSpec::Threshold {
            threshold: a.threshold.unwrap_or(config.detect.rush_threshold),
            cooldown_secs,
        },
        DetectorArg::Kamps => DetectorSpec::Kamps {
            kamps: kamps_config(config, a.preset)?,
        },
    };
    let ev = &config.evaluate;
    let opts = EvalOptions {
        window,
        folds: a.k.unwrap_or(ev.folds),
        seed: a.seed.unwrap_or(ev.seed),
        tolerance_chunks: a.match_tolerance_chunks.unwrap_or(ev.tolerance_chunks),
        averaging: match a.averaging {
            Some(AveragingArg::Micro) => Averaging::Micro,
            Some(AveragingArg::Macro) => Averaging::Macro,
            None => ev.averaging,
        },
    };
    if opts.folds == 0 {
        return Err(CliError::Usage("--k must be positive".into()));
    }
    let events = read_events(&a.events)?;
    let data = load_trade_files(&events, &a.trades_dir)?;
    let (covered, uncovered) = split_covered(&events, &data, ev.slice);
    let slices = build_slices(&covered, &data, ev.slice)?;
    let report = kfold_evaluate(&slices, &spec, &opts)?;
    if let Some(path) = &a.report_out {
        let mut w = create(path)?;
        w.write_all(report.to_json().as_bytes()).map_err(CliError::io(path))?;
        w.flush().map_err(CliError::io(path))?;
    }
    if a.json {
        println!("{}", report.to_json());
    } else {
        print!("{report}");
        println!("events: {} evaluated, {} without trade coverage", covered.len(), uncovered.len());
    }
    Ok(())
}

/// Rule, chunking and cooldown for a detect run.
fn detect_setup(config: &Config, a: &DetectArgs) -> Result<(ChunkRule, WindowConfig, u32), CliError> {
    if let Some(t) = a.threshold {
        let window = window_config(&config.features, a.chunk, a.window.as_deref(), false)?;
        let cooldown = a.cooldown.unwrap_or(config.detect.cooldown_secs);
        return Ok((ChunkRule::RushThreshold(t), window, cooldown));
    }
    let path = a.model.as_ref().expect("clap requires --model without --threshold");
    let model = Arc::new(ModelFile::load(open(path)?)?);
    if a.crowd {
        let crowd = CrowdConfig {
            chunk_seconds: a.chunk.unwrap_or(config.detect.crowd_chunk_seconds),
            cooldown_secs: a.cooldown.unwrap_or(config.detect.crowd_cooldown_secs),
        };
        let window = crowd.inference_window(&model)?;
        return Ok((ChunkRule::crowd(model), window, crowd.cooldown_secs));
    }
    let window = match (model.window, a.chunk, &a.window) {
        (Some(w), None, None) => w,
        (trained, chunk, text) => {
            let mut settings = config.features.clone();
            if let Some(w) = trained {
                settings.chunk_seconds = w.chunk_seconds;
                settings.window = w.window_seconds.to_string();
                settings.form = w.form;
                settings.exclusive = !w.include_current;
            }
            window_config(&settings, chunk, text.as_deref(), false)?
        }
    };
    let cooldown = a.cooldown.unwrap_or(config.detect.cooldown_secs);
    Ok((ChunkRule::model(model), window, cooldown))
}

/// Writes and flushes pending alerts as soon as they exist.
fn drain(alerts: &mut Vec<AlertEvent>, sink: &mut dyn Write) -> std::io::Result<usize> {
    let n = alerts.len();
    if n > 0 {
        write_alerts(alerts, sink)?;
        alerts.clear();
    }
    Ok(n)
}

pub fn detect(config: &Config, a: DetectArgs) -> Result<(), CliError> {
    if let Some(s) = a.replay_speed.filter(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(CliError::Usage(format!("--replay-speed must be positive, got {s}")));
    }
    let (rule, window, cooldown) = detect_setup(config, &a)?;
    let pair = pair_for(&a.input, a.pair.as_deref());
    let trades = read_trades(&a.input, &pair)?;
    let state = DetectorState::new(pair, rule, cooldown);
    let mut det = StreamingDetector::new(window, None, state)?;

    let to_stdout = a.alerts_out.as_os_str() == "-";
    let mut sink: Box<dyn Write> = if to_stdout {
        Box::new(std::io::stdout().lock())
    } else {
        Box::new(create(&a.alerts_out)?)
    };
    let mut alerts = Vec::new();
    let mut total = 0;
    let started = Instant::now();
    let t0 = trades.first().map(|t| t.timestamp);
    for t in &trades {
        if let (Some(speed), Some(t0)) = (a.replay_speed, t0) {
            let due = Duration::from_secs_f64((t.timestamp - t0) as f64 / 1000.0 / speed);
            if let Some(wait) = due.checked_sub(started.elapsed()) {
                std::thread::sleep(wait);
            }
        }
        det.push(t, &mut alerts)?;
        total += drain(&mut alerts, &mut sink).map_err(CliError::io(&a.alerts_out))?;
    }
    det.finish(None, &mut alerts)?;
    total += drain(&mut alerts, &mut sink).map_err(CliError::io(&a.alerts_out))?;
    drop(sink);
    if !to_stdout {
        print_json(&serde_json::json!({ "trades": trades.len(), "alerts": total }));
    }
    Ok(())
}
