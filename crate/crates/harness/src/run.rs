//! Subcommand execution: sweeps, scaling studies, fits and presets.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::json;
use starkqfi::model::ProbeClass;
use starkqfi::scaling::{fit_exponential_in_l, fit_hmax_scaling, fit_power_law, meta_fit_linear_in_a};

use crate::config::{ConfigError, Experiment, ExperimentConfig, FitKind, RawConfig, Select};
use crate::manifest::RunManifest;
use crate::output::{append_table, fmt_f64, write_table};
use crate::pool::map_points;
use crate::presets::{preset, Pipeline};
use crate::studies::{
    bound_point, dyn_scaling_point, eq_scaling_point, gap_point, probe_model, scaling_fits, DynFom, DynSettings,
    EqSettings, FitRow, PeakSearch, ScalingRow, FIT_HEADER,
};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{0}")]
    Input(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSummary {
    pub ok: usize,
    pub failed: usize,
    pub outputs: Vec<PathBuf>,
}

impl RunSummary {
    fn absorb(&mut self, other: RunSummary) {
        self.ok += other.ok;
        self.failed += other.failed;
        self.outputs.extend(other.outputs);
    }

    /// 0 when anything succeeded, 2 when every point failed.
    pub fn exit_code(&self) -> i32 {
        if self.ok == 0 && self.failed > 0 {
            2
        } else {
            0
        }
    }
}

struct Run {
    dir: PathBuf,
    manifest: RunManifest,
    started: std::time::Instant,
}

impl Run {
    fn start(cfg: &ExperimentConfig, name: &str, dir: PathBuf) -> Result<Self, RunError> {
        std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let resolved = json!({
            "probe": cfg.probe.label(),
            "a": cfg.rates,
            "L": cfg.lens,
            "h": cfg.h_grid,
            "h_zero": cfg.h_zero,
            "state": cfg.state.label(),
            "field_sign": cfg.field_sign.label(),
            "initial": cfg.initial.label(),
            "workers": cfg.workers,
        });
        Ok(Self {
            dir,
            manifest: RunManifest::new(name, cfg.raw.entries().clone(), resolved),
            started: std::time::Instant::now(),
        })
    }

    fn table(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), RunError> {
        let path = self.dir.join(name);
        write_table(&path, header, rows).map_err(io_err(&path))?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    fn finish(mut self) -> Result<RunSummary, RunError> {
        self.manifest.wall_clock_s = self.started.elapsed().as_secs_f64();
        let path = self.dir.join("manifest.json");
        self.manifest.write(&path).map_err(io_err(&path))?;
        Ok(RunSummary {
            ok: self.manifest.points_ok,
            failed: self.manifest.points_failed,
            outputs: self
                .manifest
                .outputs
                .iter()
                .map(|o| self.dir.join(o))
                .chain([path])
                .collect(),
        })
    }
}

fn eq_settings(cfg: &ExperimentConfig) -> EqSettings {
    EqSettings {
        state: cfg.state,
        sign: cfg.field_sign,
        method: cfg.method,
        fd_dh: cfg.fd_dh,
    }
}

pub fn dyn_settings(cfg: &ExperimentConfig) -> DynSettings {
    let fom = match cfg.probe {
        ProbeClass::SingleParticle => DynFom::Average {
            t_min: cfg.avg_window.0,
            t_max: cfg.avg_window.1,
        },
        ProbeClass::ManyBody => DynFom::LateNormalized {
            lo: cfg.t2_window.0,
            hi: cfg.t2_window.1,
        },
    };
    DynSettings {
        initial: cfg.initial,
        sign: cfg.field_sign,
        fom,
    }
}

fn peak_search(cfg: &ExperimentConfig) -> Option<PeakSearch> {
    cfg.peak_rule.map(|rule| PeakSearch {
        grid: cfg.peak_grid.clone(),
        rule,
        tol: cfg.peak_tol,
    })
}

fn grid3(cfg: &ExperimentConfig) -> Vec<(f64, usize, f64)> {
    let mut pts = vec![];
    for &a in &cfg.rates {
        for &l in &cfg.lens {
            for &h in &cfg.h_grid {
                pts.push((a, l, h));
            }
        }
    }
    pts
}

fn grid2(cfg: &ExperimentConfig) -> Vec<(f64, usize)> {
    cfg.rates
        .iter()
        .flat_map(|&a| cfg.lens.iter().map(move |&l| (a, l)))
        .collect()
}

fn s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn run_eq_sweep(cfg: &ExperimentConfig, dir: PathBuf) -> Result<RunSummary, RunError> {
    let mut run = Run::start(cfg, "eq-sweep", dir)?;
    let settings = eq_settings(cfg);
    let pts = grid3(cfg);
    let results = map_points(cfg.workers, &pts, |&(a, l, h)| {
        let model = probe_model(cfg.probe, l, a).map_err(s)?;
        let q = settings.qfi(&model, h).map_err(s)?;
        Ok((q, settings.method_for(&model).label()))
    });
    let mut rows = vec![];
    for (&(a, l, h), r) in pts.iter().zip(&results) {
        run.manifest.record(format!("L={l} a={a} h={h}"), r);
        if let Ok((q, method)) = r {
            rows.push(vec![
                cfg.probe.label().to_string(),
                l.to_string(),
                fmt_f64(a),
                fmt_f64(h),
                fmt_f64(*q),
                method.to_string(),
            ]);
        }
    }
    run.table("eq_sweep.csv", &["probe", "L", "a", "h", "qfi", "method"], &rows)?;
    run.finish()
}

fn run_dyn_sweep(cfg: &ExperimentConfig, dir: PathBuf) -> Result<RunSummary, RunError> {
    let mut run = Run::start(cfg, "dyn-sweep", dir)?;
    let settings = dyn_settings(cfg);
    let pts = grid3(cfg);
    let results = map_points(cfg.workers, &pts, |&(a, l, h)| dyn_point(cfg, &settings, a, l, h));
    let (series, agg) = dyn_rows(cfg, &pts, &results, &mut run);
    run.table("dyn_series.csv", &["probe", "L", "a", "h", "t", "qfi"], &series)?;
    run.table("dyn_aggregate.csv", &["probe", "L", "a", "h", settings.fom.column()], &agg)?;
    run.finish()
}

fn dyn_point(cfg: &ExperimentConfig, settings: &DynSettings, a: f64, l: usize, h: f64) -> Result<(Vec<f64>, f64), String> {
    let model = probe_model(cfg.probe, l, a).map_err(s)?;
    let ev = settings.evaluator(&model, h).map_err(s)?;
    let series = ev.qfi_many(&cfg.times).map_err(s)?;
    let fom = settings.fom.eval(&ev).map_err(s)?;
    Ok((series, fom))
}

type Rows = Vec<Vec<String>>;

fn dyn_rows(
    cfg: &ExperimentConfig,
    pts: &[(f64, usize, f64)],
    results: &[Result<(Vec<f64>, f64), String>],
    run: &mut Run,
) -> (Rows, Rows) {
    let (mut series, mut agg) = (vec![], vec![]);
    let probe = cfg.probe.label().to_string();
    for (&(a, l, h), r) in pts.iter().zip(results) {
        run.manifest.record(format!("L={l} a={a} h={h}"), r);
        if let Ok((values, fom)) = r {
            for (t, q) in cfg.times.iter().zip(values) {
                series.push(vec![probe.clone(), l.to_string(), fmt_f64(a), fmt_f64(h), fmt_f64(*t), fmt_f64(*q)]);
            }
            agg.push(vec![probe.clone(), l.to_string(), fmt_f64(a), fmt_f64(h), fmt_f64(*fom)]);
        }
    }
    (series, agg)
}

fn run_gap_scan(cfg: &ExperimentConfig, dir: PathBuf) -> Result<RunSummary, RunError> {
    let mut run = Run::start(cfg, "gap-scan", dir)?;
    let pts = grid2(cfg);
    let results = map_points(cfg.workers, &pts, |&(a, l)| {
        gap_point(cfg.probe, a, l, cfg.field_sign, cfg.h_zero).map_err(s)
    });
    let mut rows = vec![];
    for (&(a, l), r) in pts.iter().zip(&results) {
        run.manifest.record(format!("L={l} a={a}"), r);
        if let Ok(g) = r {
            rows.push(vec![cfg.probe.label().to_string(), l.to_string(), fmt_f64(a), fmt_f64(*g)]);
        }
    }
    run.table("gaps.csv", &["probe", "L", "a", "gap"], &rows)?;
    let mut fits = vec![];
    for &a in &cfg.rates {
        let (x, y): (Vec<f64>, Vec<f64>) = pts
            .iter()
            .zip(&results)
            .filter(|((ra, _), _)| *ra == a)
            .filter_map(|((_, l), r)| r.as_ref().ok().map(|g| (*l as f64, *g)))
            .unzip();
        if let Ok(fit) = fit_power_law(&x, &y) {
            fits.push(
                FitRow {
                    group: a.to_string(),
                    kind: "gap-power".to_string(),
                    fit,
                }
                .record(),
            );
        }
    }
    run.table("fits.csv", &FIT_HEADER, &fits)?;
    run.finish()
}

fn run_bound_check(cfg: &ExperimentConfig, dir: PathBuf) -> Result<RunSummary, RunError> {
    if cfg.probe != ProbeClass::SingleParticle {
        return Err(ConfigError::Invalid {
            key: "probe".into(),
            reason: "the analytic bound concerns the single-particle probe".into(),
        }
        .into());
    }
    let mut run = Run::start(cfg, "bound-check", dir)?;
    let pts = grid2(cfg);
    let results = map_points(cfg.workers, &pts, |&(a, l)| bound_point(a, l, cfg.bound).map_err(s));
    let mut rows = vec![];
    for (&(a, l), r) in pts.iter().zip(&results) {
        run.manifest.record(format!("L={l} a={a}"), r);
        if let Ok(b) = r {
            rows.push(vec![
                l.to_string(),
                fmt_f64(a),
                fmt_f64(b.bound_log10),
                fmt_f64(b.qfi_log10),
                b.ok().to_string(),
            ]);
        }
    }
    run.table("bound_check.csv", &["L", "a", "bound_log", "qfi_log", "ok"], &rows)?;
    run.finish()
}

/// Writes `scaling.csv` and, when `fit` is set, the per-rate fits to `fits.csv`.
fn scaling_table(
    cfg: &ExperimentConfig,
    pts: &[(f64, usize)],
    results: &[Result<ScalingRow, String>],
    fit: bool,
    run: &mut Run,
) -> Result<Vec<ScalingRow>, RunError> {
    let mut rows = vec![];
    let mut ok = vec![];
    for (&(a, l), r) in pts.iter().zip(results) {
        run.manifest.record(format!("L={l} a={a}"), r);
        if let Ok(row) = r {
            let (hm, vm) = row
                .peak
                .map(|p| (fmt_f64(p.h_max), fmt_f64(p.value)))
                .unwrap_or_default();
            rows.push(vec![
                cfg.probe.label().to_string(),
                fmt_f64(a),
                l.to_string(),
                fmt_f64(row.value_h0),
                hm,
                vm,
            ]);
            ok.push(*row);
        }
    }
    run.table("scaling.csv", &["probe", "a", "L", "qfi_h0", "h_max", "qfi_hmax"], &rows)?;
    if !fit {
        return Ok(ok);
    }
    let (fits, skipped) = scaling_fits(&ok);
    for msg in skipped {
        run.manifest.record::<()>("fit".to_string(), &Err(msg));
    }
    let fit_rows: Vec<_> = fits.iter().map(FitRow::record).collect();
    run.table("fits.csv", &FIT_HEADER, &fit_rows)?;
    Ok(ok)
}

fn run_eq_scaling(cfg: &ExperimentConfig, dir: PathBuf) -> Result<(RunSummary, Vec<FitRow>), RunError> {
    let mut run = Run::start(cfg, "eq-scaling", dir)?;
    let settings = eq_settings(cfg);
    let search = peak_search(cfg);
    let pts = grid2(cfg);
    let results = map_points(cfg.workers, &pts, |&(a, l)| {
        eq_scaling_point(cfg.probe, a, l, &settings, cfg.h_zero, search.as_ref()).map_err(s)
    });
    let ok = scaling_table(cfg, &pts, &results, true, &mut run)?;
    Ok((run.finish()?, scaling_fits(&ok).0))
}

fn run_dyn_scaling(cfg: &ExperimentConfig, dir: PathBuf) -> Result<(RunSummary, Vec<FitRow>), RunError> {
    let mut run = Run::start(cfg, "dyn-scaling", dir)?;
    let settings = dyn_settings(cfg);
    let search = peak_search(cfg);
    let pts = grid2(cfg);
    let results = map_points(cfg.workers, &pts, |&(a, l)| {
        dyn_scaling_point(cfg.probe, a, l, &settings, cfg.h_zero, search.as_ref()).map_err(s)
    });
    let ok = scaling_table(cfg, &pts, &results, true, &mut run)?;
    Ok((run.finish()?, scaling_fits(&ok).0))
}

/// Series at `h_zero`, at the located peak, and at each field of `h`.
fn run_dyn_peak_series(cfg: &ExperimentConfig, dir: PathBuf) -> Result<RunSummary, RunError> {
    let mut run = Run::start(cfg, "dyn-peak-series", dir)?;
    let settings = dyn_settings(cfg);
    let search = peak_search(cfg).ok_or(ConfigError::Invalid {
        key: "peak_rule".into(),
        reason: "this preset needs a peak search".into(),
    })?;
    let pairs = grid2(cfg);
    let peaks = map_points(cfg.workers, &pairs, |&(a, l)| {
        dyn_scaling_point(cfg.probe, a, l, &settings, cfg.h_zero, Some(&search)).map_err(s)
    });
    scaling_table(cfg, &pairs, &peaks, false, &mut run)?;
    let mut pts = vec![];
    for (&(a, l), r) in pairs.iter().zip(&peaks) {
        if let Ok(ScalingRow { peak: Some(p), .. }) = r {
            let mut fields = vec![cfg.h_zero, p.h_max];
            fields.extend(&cfg.h_grid);
            pts.extend(fields.into_iter().map(|h| (a, l, h)));
        }
    }
    let results = map_points(cfg.workers, &pts, |&(a, l, h)| dyn_point(cfg, &settings, a, l, h));
    let (series, agg) = dyn_rows(cfg, &pts, &results, &mut run);
    run.table("dyn_series.csv", &["probe", "L", "a", "h", "t", "qfi"], &series)?;
    run.table("dyn_aggregate.csv", &["probe", "L", "a", "h", settings.fom.column()], &agg)?;
    run.finish()
}

/// Reads `cfg.input`, fits one line per group and appends the rows to `fits.csv`.
fn run_fit(cfg: &ExperimentConfig, dir: PathBuf) -> Result<RunSummary, RunError> {
    let input = cfg.input.clone().ok_or(ConfigError::Missing("input"))?;
    let csv_err = |source| RunError::Csv {
        path: input.clone(),
        source,
    };
    let mut reader = csv::Reader::from_path(&input).map_err(csv_err)?;
    let headers = reader.headers().map_err(csv_err)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| RunError::Input(format!("{}: missing column `{name}`", input.display())))
    };
    let (xi, yi) = (col(&cfg.x)?, col(&cfg.y)?);
    let gi = if cfg.group == "none" { None } else { Some(col(&cfg.group)?) };
    let hi = if cfg.select == Select::MinH { Some(col("h")?) } else { None };

    // group -> x -> (h, y)
    let mut groups: BTreeMap<String, Vec<(f64, f64, f64)>> = BTreeMap::new();
    let mut order: Vec<String> = vec![];
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let num = |i: usize| -> Result<f64, RunError> {
            rec.get(i)
                .unwrap_or("")
                .parse::<f64>()
                .map_err(|e| RunError::Input(format!("{}: row {}: {e}", input.display(), line + 2)))
        };
        if rec.get(yi).is_some_and(str::is_empty) {
            continue;
        }
        let g = gi.map(|i| rec.get(i).unwrap_or("").to_string()).unwrap_or_else(|| "all".into());
        let h = hi.map(num).transpose()?.unwrap_or(0.0);
        if !groups.contains_key(&g) {
            order.push(g.clone());
        }
        groups.entry(g).or_default().push((num(xi)?, h, num(yi)?));
    }
    let mut run = Run::start(cfg, "fit", dir)?;
    let kind = match cfg.fit_kind {
        FitKind::ExpL => "exp-l",
        FitKind::Power => "power",
        FitKind::Hmax => "hmax",
    };
    let mut out = vec![];
    let mut per_group = vec![];
    for g in &order {
        let r = select_rows(&groups[g], cfg.select).and_then(|(x, y)| {
            match cfg.fit_kind {
                FitKind::ExpL => fit_exponential_in_l(&x, &y),
                FitKind::Power => fit_power_law(&x, &y),
                FitKind::Hmax => fit_hmax_scaling(&x, &y),
            }
            .map_err(s)
        });
        run.manifest.record(format!("{}={g}", cfg.group), &r);
        if let Ok(fit) = r {
            per_group.push((g.clone(), fit.slope));
            out.push(FitRow {
                group: g.clone(),
                kind: kind.to_string(),
                fit,
            });
        }
    }
    let numeric: Option<Vec<(f64, f64)>> = per_group
        .iter()
        .map(|(g, b)| g.parse::<f64>().ok().map(|a| (a, *b)))
        .collect();
    if let Some(pairs) = numeric.filter(|p| p.len() >= 3) {
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        if let Ok(fit) = meta_fit_linear_in_a(&a, &b) {
            out.push(FitRow {
                group: "meta".into(),
                kind: format!("{kind}-vs-{}", cfg.group),
                fit,
            });
        }
    }
    let path = run.dir.join("fits.csv");
    let rows: Vec<_> = out.iter().map(FitRow::record).collect();
    append_table(&path, &FIT_HEADER, &rows).map_err(io_err(&path))?;
    run.manifest.outputs.push("fits.csv".into());
    run.finish()
}

fn select_rows(rows: &[(f64, f64, f64)], select: Select) -> Result<(Vec<f64>, Vec<f64>), String> {
    let mut by_x: BTreeMap<u64, (f64, f64, f64)> = BTreeMap::new();
    let mut xs = vec![];
    for &(x, h, y) in rows {
        let key = x.to_bits();
        match by_x.get(&key) {
            None => {
                xs.push(x);
                by_x.insert(key, (x, h, y));
            }
            Some(&(_, h0, y0)) => match select {
                Select::Unique => return Err(format!("several rows share x = {x}; set `select`")),
                Select::MinH if h < h0 => {
                    by_x.insert(key, (x, h, y));
                }
                Select::Max if y > y0 => {
                    by_x.insert(key, (x, h, y));
                }
                _ => {}
            },
        }
    }
    Ok(xs.iter().map(|x| (*x, by_x[&x.to_bits()].2)).unzip())
}

/// Sub-presets whose meta-fits make up the exponent table.
const TABLE_PARTS: [(&str, &str, &str, &str); 5] = [
    ("fig1b", "equilibrium", "sp", "ground"),
    ("fig2b", "equilibrium", "sp", "mid"),
    ("fig3b", "equilibrium", "mb", "ground"),
    ("fig5c", "dynamic", "sp", "center-site"),
    ("fig6d", "dynamic", "mb", "neel"),
];

fn preset_config(id: &str, overrides: &RawConfig, kind: Experiment) -> Result<(Pipeline, ExperimentConfig), RunError> {
    let p = preset(id).ok_or_else(|| ConfigError::Invalid {
        key: "figure".into(),
        reason: format!("unknown preset `{id}`"),
    })?;
    let mut raw = RawConfig::parse(p.text)?;
    raw.merge(overrides);
    raw.set("figure", id)?;
    let kind = match p.pipeline {
        Pipeline::Sweep(k) => k,
        _ => kind,
    };
    Ok((p.pipeline, ExperimentConfig::from_raw(kind, raw)?))
}

fn run_pipeline(pipeline: Pipeline, cfg: &ExperimentConfig, dir: PathBuf) -> Result<(RunSummary, Vec<FitRow>), RunError> {
    let plain = |r: RunSummary| (r, vec![]);
    match pipeline {
        Pipeline::Sweep(Experiment::EqSweep) => run_eq_sweep(cfg, dir).map(plain),
        Pipeline::Sweep(Experiment::DynSweep) => run_dyn_sweep(cfg, dir).map(plain),
        Pipeline::Sweep(Experiment::GapScan) => run_gap_scan(cfg, dir).map(plain),
        Pipeline::Sweep(Experiment::BoundCheck) => run_bound_check(cfg, dir).map(plain),
        Pipeline::Sweep(other) => Err(RunError::Input(format!("`{}` is not a sweep", other.name()))),
        Pipeline::EqScaling => run_eq_scaling(cfg, dir),
        Pipeline::DynScaling => run_dyn_scaling(cfg, dir),
        Pipeline::DynPeakSeries => run_dyn_peak_series(cfg, dir).map(plain),
        Pipeline::Table => run_table(cfg, dir).map(plain),
    }
}

fn overrides(cfg: &ExperimentConfig) -> RawConfig {
    let mut raw = RawConfig::default();
    for (k, v) in cfg.raw.entries() {
        if k != "figure" && k != "output" {
            // keys are already validated
            let _ = raw.set(k, v);
        }
    }
    raw
}

fn run_table(cfg: &ExperimentConfig, dir: PathBuf) -> Result<RunSummary, RunError> {
    let mut summary = RunSummary::default();
    let mut rows = vec![];
    for (id, regime, probe, state) in TABLE_PARTS {
        let (pipeline, sub) = preset_config(id, &overrides(cfg), Experiment::Reproduce)?;
        let (r, fits) = run_pipeline(pipeline, &sub, dir.join(id))?;
        summary.absorb(r);
        for f in fits.iter().filter(|f| f.group == "meta" && f.kind.starts_with("beta")) {
            let limit = if f.kind.starts_with("beta-h0") { "h0" } else { "hmax" };
            rows.push(vec![
                regime.to_string(),
                probe.to_string(),
                state.to_string(),
                limit.to_string(),
                fmt_f64(f.fit.slope),
                fmt_f64(f.fit.intercept),
                fmt_f64(f.fit.r_squared),
            ]);
        }
    }
    let path = dir.join("table1.csv");
    write_table(&path, &["regime", "probe", "state", "limit", "c1", "c0", "r2"], &rows).map_err(io_err(&path))?;
    summary.outputs.push(path);
    Ok(summary)
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunSummary, RunError> {
    let dir = cfg.output.clone();
    match cfg.kind {
        Experiment::EqSweep => run_eq_sweep(cfg, dir),
        Experiment::DynSweep => run_dyn_sweep(cfg, dir),
        Experiment::GapScan => run_gap_scan(cfg, dir),
        Experiment::BoundCheck => run_bound_check(cfg, dir),
        Experiment::Fit => run_fit(cfg, dir),
        Experiment::Reproduce => {
            let id = cfg.figure.clone().ok_or(ConfigError::Missing("figure"))?;
            let (pipeline, sub) = preset_config(&id, &overrides(cfg), Experiment::Reproduce)?;
            run_pipeline(pipeline, &sub, dir.join(&id)).map(|(r, _)| r)
        }
    }
}
