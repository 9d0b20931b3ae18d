use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use repchain::fibergrid::{
    bonn_berlin_grid, enumerate_placements, load_fiber_path, select_configuration, LoadOptions,
    CITY_REPEATER_SITES,
};
use repchain::hardware::Parameter;
use repchain::metrics::{compute_metric, skr_from_records, werner_qber, Metric};
use repchain::modes::{minimal_modes, ModesError, MinModesSettings};
use repchain::optimizer::{
    genetic_search, local_search, Bounds, OptimizerConfig, Problem, Weights,
};
use repchain::sim::{parse_records, run_chain_with_stats, write_records};
use repchain::{ChainConfiguration, FiberPath, HardwareParams, SimConfig};

use crate::config::{usage, ConfigFile, ParamsSpec, PlacementSpec, Seconds};
use crate::manifest::{read_header, RunManifest};
use crate::{EnumerateArgs, MetricsArgs, MinModesArgs, OptimizeArgs, SimulateArgs};

const BUILTIN_PATH: &str = "builtin:bonn-berlin-grid";

fn record_inputs(manifest: &mut RunManifest, config: &ConfigFile) {
    if let Some(src) = config.source() {
        manifest.set("config_file", src.display());
    }
}

/// The given path file, or the bundled grid when absent.
fn load_path(file: Option<&Path>, manifest: &mut RunManifest) -> anyhow::Result<FiberPath> {
    match file {
        None => {
            manifest.set("path_file", BUILTIN_PATH);
            Ok(bonn_berlin_grid())
        }
        Some(p) => {
            manifest.set("path_file", p.display());
            load_fiber_path(p, LoadOptions::default()).map_err(|e| usage(format!("path file: {e}")))
        }
    }
}

/// Writes `text` to `out`, or to stdout when `out` is `None`.
fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn key_values<K: AsRef<str>, V: AsRef<str>>(pairs: &[(K, V)]) -> String {
    pairs
        .iter()
        .map(|(k, v)| format!("{}={}\n", k.as_ref(), v.as_ref()))
        .collect()
}

fn join_sites(sites: &[usize]) -> String {
    sites.iter().map(usize::to_string).collect::<Vec<_>>().join(";")
}

fn resolve_placement(path: &FiberPath, spec: &PlacementSpec) -> anyhow::Result<ChainConfiguration> {
    let chain = match spec {
        PlacementSpec::Sites(sites) => ChainConfiguration::on_path(path, sites),
        PlacementSpec::Selector { r: 0, .. } => ChainConfiguration::direct(path),
        PlacementSpec::Selector { r, a } => {
            let table = enumerate_placements(path, *r);
            select_configuration(&table, *r, *a).cloned()
        }
    };
    chain.map_err(|e| usage(format!("placement {spec}: {e}")))
}

pub fn simulate(args: SimulateArgs, mut config: ConfigFile) -> anyhow::Result<()> {
    let path_file = config.merge(args.path_file, "path_file")?;
    let placement = config.merge(args.placement, "placement")?;
    let params = config.merge(args.params, "params")?.map_or_else(HardwareParams::baseline, |p| p.0);
    let cutoff = config.merge(args.cutoff, "cutoff")?.unwrap_or(Seconds(f64::INFINITY)).0;
    let seed = config.merge(args.seed, "seed")?.unwrap_or(0);
    let pairs = config.merge(args.pairs, "pairs")?.unwrap_or(100);
    let out = config.merge(args.out, "out")?;
    let summary_out = config.merge(args.summary, "summary")?;
    let mut manifest = RunManifest::new("simulate");
    record_inputs(&mut manifest, &config);
    config.finish()?;

    if pairs == 0 {
        return Err(usage("--pairs must be at least 1"));
    }
    let path = load_path(path_file.as_deref(), &mut manifest)?;
    let placement = match (placement, &path_file) {
        (Some(p), _) => p,
        (None, None) => PlacementSpec::Sites(CITY_REPEATER_SITES.to_vec()),
        (None, Some(_)) => return Err(usage("--placement is required with a custom path file")),
    };
    let chain = resolve_placement(&path, &placement)?;
    let sim = SimConfig::new(chain.clone(), params, pairs, seed).with_cutoff(cutoff);
    sim.validate().map_err(|e| usage(e.to_string()))?;

    manifest.set("placement", &placement);
    manifest.set("num_repeaters", chain.num_repeaters());
    manifest.set("repeater_sites", join_sites(chain.repeater_sites()));
    manifest.set("asymmetry", chain.asymmetry());
    manifest.set("params", ParamsSpec(params));
    manifest.set("coherence_time_s", params.coherence_time);
    manifest.set("cutoff_s", cutoff);
    manifest.set("seed", seed);
    manifest.set("pairs", pairs);

    let outcome = run_chain_with_stats(&sim).context("simulation failed")?;
    let records = &outcome.records;
    let skr = skr_from_records(records)?;
    let mean_werner = records.iter().map(|r| r.werner).sum::<f64>() / records.len() as f64;

    let mut dump = Vec::new();
    write_records(&mut dump, &manifest.entries(), records)?;
    emit(out.as_deref(), std::str::from_utf8(&dump)?)?;

    let stats = &outcome.stats;
    let summary = [
        ("records", records.len().to_string()),
        ("entanglement_rate_hz", skr.entanglement_rate.to_string()),
        ("mean_werner", mean_werner.to_string()),
        ("mean_fidelity", ((1.0 + 3.0 * mean_werner) / 4.0).to_string()),
        ("qber", werner_qber(mean_werner).to_string()),
        ("skr_hz", skr.skr.to_string()),
        ("elapsed_s", outcome.elapsed.to_string()),
        ("attempts", stats.attempts.to_string()),
        ("swaps", stats.swaps.to_string()),
        ("cutoff_discards", stats.cutoff_discards.to_string()),
    ];
    let text = manifest.header() + &key_values(&summary);
    match (summary_out, &out) {
        (Some(p), _) => emit(Some(&p), &text),
        (None, Some(_)) => emit(None, &text),
        (None, None) => {
            eprint!("{text}");
            Ok(())
        }
    }
}

pub fn metrics(args: MetricsArgs, mut config: ConfigFile) -> anyhow::Result<()> {
    let dump_path: PathBuf = config
        .merge(args.dump, "dump")?
        .ok_or_else(|| usage("a record dump is required"))?;
    let metric = config.merge(args.metric, "metric")?.unwrap_or(Metric::Skr);
    let coherence = config.merge(args.coherence_time, "coherence_time")?;
    let csv = config.merge(args.csv, "csv")?;
    let out = config.merge(args.out, "out")?;
    let mut manifest = RunManifest::new("metrics");
    record_inputs(&mut manifest, &config);
    config.finish()?;

    let text = fs::read_to_string(&dump_path)
        .map_err(|e| usage(format!("reading dump {}: {e}", dump_path.display())))?;
    let records = parse_records::<f64>(&text).map_err(|e| usage(format!("dump {}: {e}", dump_path.display())))?;
    let dump_header = read_header(&text);
    let from_dump = dump_header
        .iter()
        .find(|(k, _)| k == "coherence_time_s")
        .map(|(_, v)| v.parse::<Seconds>())
        .transpose()
        .map_err(|e| usage(format!("dump header coherence_time_s: {e}")))?;
    let coherence_time = match (coherence.or(from_dump), metric) {
        (Some(t), _) => t.0,
        (None, Metric::Skr) => f64::INFINITY,
        (None, Metric::Bqc) => return Err(usage("bqc needs --coherence-time (the dump header has none)")),
    };

    manifest.set("dump", dump_path.display());
    for key in ["seed", "placement", "params", "cutoff_s", "path_file"] {
        if let Some((_, v)) = dump_header.iter().find(|(k, _)| k == key) {
            manifest.set(&format!("dump_{key}"), v);
        }
    }
    manifest.set("metric", metric);
    manifest.set("coherence_time_s", coherence_time);

    let result = compute_metric(metric, &records, coherence_time).context("computing metric")?;
    let fields = result.fields();
    emit(out.as_deref(), &(manifest.header() + &key_values(&fields)))?;

    if let Some(csv) = csv {
        let fresh = fs::metadata(&csv).map_or(true, |m| m.len() == 0);
        let mut file = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&csv)
            .with_context(|| format!("opening {}", csv.display()))?;
        let mut text = String::new();
        if fresh {
            text += &manifest.header();
            let names: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
            writeln!(text, "dump,coherence_time_s,{}", names.join(","))?;
        }
        let values: Vec<&str> = fields.iter().map(|(_, v)| v.as_str()).collect();
        writeln!(text, "{},{},{}", dump_path.display(), coherence_time, values.join(","))?;
        file.write_all(text.as_bytes())?;
    }
    Ok(())
}

pub fn enumerate(args: EnumerateArgs, mut config: ConfigFile) -> anyhow::Result<()> {
    let path_file = config.merge(args.path_file, "path_file")?;
    let max_repeaters = config.merge(args.max_repeaters, "max_repeaters")?.unwrap_or(7);
    let out = config.merge(args.out, "out")?;
    let mut manifest = RunManifest::new("enumerate");
    record_inputs(&mut manifest, &config);
    config.finish()?;

    let path = load_path(path_file.as_deref(), &mut manifest)?;
    let table = enumerate_placements(&path, max_repeaters);
    manifest.set("max_repeaters", max_repeaters);
    manifest.set("placements", table.total());

    let mut text = manifest.header();
    text += "r,n,asymmetry,sites\n";
    for (r, n, c) in table.iter() {
        writeln!(text, "{r},{n},{},{}", c.asymmetry(), join_sites(c.repeater_sites()))?;
    }
    emit(out.as_deref(), &text)
}

pub fn min_modes(args: MinModesArgs, mut config: ConfigFile) -> anyhow::Result<()> {
    let length = config.merge(args.length, "length")?;
    let attenuation = config.merge(args.attenuation, "attenuation")?;
    let path_file = config.merge(args.path_file, "path_file")?;
    let repeaters = config
        .merge(args.repeaters, "repeaters")?
        .ok_or_else(|| usage("--repeaters is required"))?;
    let target = config.merge(args.target, "target")?.ok_or_else(|| usage("--target is required"))?;
    let metric = config.merge(args.metric, "metric")?.unwrap_or(Metric::Skr);
    let mut settings = MinModesSettings::new(target, metric);
    settings.runs = config.merge(args.runs, "runs")?.unwrap_or(settings.runs);
    settings.pairs_per_run = config.merge(args.pairs, "pairs")?.unwrap_or(settings.pairs_per_run);
    settings.seed = config.merge(args.seed, "seed")?.unwrap_or(settings.seed);
    settings.z = config.merge(args.z, "z")?.unwrap_or(settings.z);
    settings.modes_cap = config.merge(args.modes_cap, "modes_cap")?.unwrap_or(settings.modes_cap);
    let out = config.merge(args.out, "out")?;
    let mut manifest = RunManifest::new("min-modes");
    record_inputs(&mut manifest, &config);
    config.finish()?;

    if settings.runs == 0 || settings.pairs_per_run == 0 {
        return Err(usage("--runs and --pairs must be at least 1"));
    }
    if metric == Metric::Bqc && settings.pairs_per_run < 2 {
        return Err(usage("bqc needs at least 2 pairs per run"));
    }
    if !(target > 0.0) || !target.is_finite() {
        return Err(usage(format!("target rate must be positive, got {target}")));
    }
    let (length, attenuation) = match (length, attenuation) {
        (Some(l), Some(a)) => {
            manifest.set("path_file", "none");
            (l, a)
        }
        (None, None) => {
            let path = load_path(path_file.as_deref(), &mut manifest)?;
            (path.total_length(), path.total_attenuation())
        }
        _ => return Err(usage("--length and --attenuation must be given together")),
    };
    if !(length > 0.0) || !(attenuation >= 0.0) {
        return Err(usage("length must be positive and attenuation non-negative"));
    }
    for (k, v) in [
        ("total_length_km", length.to_string()),
        ("total_attenuation_db", attenuation.to_string()),
        ("num_repeaters", repeaters.to_string()),
        ("target_hz", target.to_string()),
        ("metric", metric.to_string()),
        ("runs", settings.runs.to_string()),
        ("pairs", settings.pairs_per_run.to_string()),
        ("seed", settings.seed.to_string()),
        ("z", settings.z.to_string()),
        ("modes_cap", settings.modes_cap.to_string()),
    ] {
        manifest.set(k, v);
    }

    let res = match minimal_modes(length, attenuation, repeaters, &settings) {
        Err(ModesError::Path(e)) => return Err(usage(e.to_string())),
        other => other?,
    };
    let fields = [
        ("modes", res.modes.to_string()),
        ("rate_hz", res.rate.to_string()),
        ("rate_lower_bound_hz", res.rate_lower_bound.to_string()),
        ("probes", res.probes.to_string()),
    ];
    emit(out.as_deref(), &(manifest.header() + &key_values(&fields)))
}

fn optimizer_config(config: &mut ConfigFile, args: &OptimizeArgs) -> anyhow::Result<OptimizerConfig> {
    let d = OptimizerConfig::default();
    macro_rules! get {
        ($key:literal, $default:expr) => {
            config.take($key)?.unwrap_or($default)
        };
    }
    let bounds = Bounds {
        factor: (get!("factor_min", d.bounds.factor.0), get!("factor_max", d.bounds.factor.1)),
        modes_cap: get!("modes_cap", d.bounds.modes_cap),
        repeaters: (get!("min_repeaters", d.bounds.repeaters.0), get!("max_repeaters", d.bounds.repeaters.1)),
        cutoff_fraction: (
            get!("cutoff_min", d.bounds.cutoff_fraction.0),
            get!("cutoff_max", d.bounds.cutoff_fraction.1),
        ),
    };
    let cfg = OptimizerConfig {
        weights: Weights {
            penalty: get!("penalty_weight", d.weights.penalty),
            hardware: get!("hardware_weight", d.weights.hardware),
        },
        target_rate: config.merge(args.target, "target")?.unwrap_or(d.target_rate),
        target_metric: config.merge(args.metric, "metric")?.unwrap_or(d.target_metric),
        population_size: get!("population_size", d.population_size),
        generations: get!("generations", d.generations),
        mutation_scale: get!("mutation_scale", d.mutation_scale),
        mutation_rate: get!("mutation_rate", d.mutation_rate),
        crossover_rate: get!("crossover_rate", d.crossover_rate),
        tournament_size: get!("tournament_size", d.tournament_size),
        elitism_count: get!("elitism_count", d.elitism_count),
        sims_per_eval: get!("sims_per_eval", d.sims_per_eval),
        pairs_per_sim: get!("pairs_per_sim", d.pairs_per_sim),
        rng_seed: config.merge(args.seed, "seed")?.unwrap_or(d.rng_seed),
        bounds,
        optimize_cutoff: get!("optimize_cutoff", d.optimize_cutoff),
        time_limit_factor: get!("time_limit_factor", d.time_limit_factor),
        max_sim_time: get!("max_sim_time", d.max_sim_time),
        local_step: get!("local_step", d.local_step),
        local_budget: get!("local_budget", d.local_budget),
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn record_optimizer_config(m: &mut RunManifest, c: &OptimizerConfig) {
    m.set("target", c.target_rate);
    m.set("metric", c.target_metric);
    m.set("seed", c.rng_seed);
    m.set("penalty_weight", c.weights.penalty);
    m.set("hardware_weight", c.weights.hardware);
    m.set("population_size", c.population_size);
    m.set("generations", c.generations);
    m.set("mutation_scale", c.mutation_scale);
    m.set("mutation_rate", c.mutation_rate);
    m.set("crossover_rate", c.crossover_rate);
    m.set("tournament_size", c.tournament_size);
    m.set("elitism_count", c.elitism_count);
    m.set("sims_per_eval", c.sims_per_eval);
    m.set("pairs_per_sim", c.pairs_per_sim);
    m.set("factor_min", c.bounds.factor.0);
    m.set("factor_max", c.bounds.factor.1);
    m.set("modes_cap", c.bounds.modes_cap);
    m.set("min_repeaters", c.bounds.repeaters.0);
    m.set("max_repeaters", c.bounds.repeaters.1);
    m.set("cutoff_min", c.bounds.cutoff_fraction.0);
    m.set("cutoff_max", c.bounds.cutoff_fraction.1);
    m.set("optimize_cutoff", c.optimize_cutoff);
    m.set("time_limit_factor", c.time_limit_factor);
    m.set("max_sim_time", c.max_sim_time);
    m.set("local_step", c.local_step);
    m.set("local_budget", c.local_budget);
}

pub fn optimize(args: OptimizeArgs, mut config: ConfigFile) -> anyhow::Result<()> {
    let path_file = config.merge(args.path_file.clone(), "path_file")?;
    let out_dir = config.merge(args.out_dir.clone(), "out_dir")?.unwrap_or_else(|| PathBuf::from("."));
    let cfg = optimizer_config(&mut config, &args)?;
    let mut manifest = RunManifest::new("optimize");
    record_inputs(&mut manifest, &config);
    config.finish()?;

    let path = load_path(path_file.as_deref(), &mut manifest)?;
    record_optimizer_config(&mut manifest, &cfg);
    manifest.set("evaluation_seed", cfg.evaluation_seed());
    let problem = Problem::new(path, cfg.bounds.repeaters.1);
    if problem.admissible_repeaters(&cfg.bounds).is_empty() {
        return Err(usage(format!(
            "no placement with {}..={} repeaters on this path",
            cfg.bounds.repeaters.0, cfg.bounds.repeaters.1
        )));
    }

    let ga = genetic_search(&cfg, &problem).context("genetic search failed")?;
    let local = local_search(&ga.best.candidate, &cfg, &problem).context("local search failed")?;
    let best = &local.best;
    let c = &best.candidate;
    let p = &c.params;

    fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let header = manifest.header();

    let mut result: Vec<(String, String)> = vec![
        ("target_met".into(), (best.achieved_rate >= cfg.target_rate).to_string()),
        ("achieved_rate_hz".into(), best.achieved_rate.to_string()),
        ("target_rate_hz".into(), cfg.target_rate.to_string()),
        ("total_cost".into(), best.cost.total_cost.to_string()),
        ("hardware_cost".into(), best.cost.hardware_cost.to_string()),
        ("penalty".into(), best.cost.penalty.to_string()),
    ];
    for param in Parameter::ALL {
        result.push((param.name().into(), p.value(param).to_string()));
    }
    for param in Parameter::ALL {
        result.push((format!("factor_{}", param.name()), best.cost.factor(param).to_string()));
    }
    result.extend([
        ("num_repeaters".into(), c.r.to_string()),
        ("selector".into(), c.a.to_string()),
        ("placement_rank".into(), best.placement_rank.to_string()),
        ("repeater_sites".into(), join_sites(&best.repeater_sites)),
        ("cutoff_fraction".into(), c.cutoff_fraction.map_or("inf".into(), |f| f.to_string())),
        ("cutoff_s".into(), c.cutoff_time().to_string()),
        ("genetic_best_cost".into(), ga.best.cost.total_cost.to_string()),
        ("genetic_evaluations".into(), ga.evaluations.to_string()),
        ("local_evaluations".into(), local.evaluations.to_string()),
        ("local_accepted_steps".into(), local.accepted_steps.to_string()),
    ]);
    let result_text = header.clone() + &key_values(&result);
    emit(Some(&out_dir.join("result.txt")), &result_text)?;

    let mut history = header.clone();
    history += "generation,best_cost,best_hardware_cost,best_rate_hz,feasible\n";
    for g in &ga.history {
        writeln!(
            history,
            "{},{},{},{},{}",
            g.generation, g.best_cost, g.best_hardware_cost, g.best_rate, g.feasible
        )?;
    }
    emit(Some(&out_dir.join("history.csv")), &history)?;

    let mut radar = header;
    radar += "parameter,improvement_factor,value,baseline_value\n";
    let baseline = HardwareParams::baseline();
    for param in Parameter::ALL {
        let k = best.cost.factor(param);
        writeln!(radar, "{},{},{},{}", param.name(), k, p.value(param), baseline.value(param))?;
    }
    emit(Some(&out_dir.join("radar.csv")), &radar)?;

    emit(None, &result_text)
}
