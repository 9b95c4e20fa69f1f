//! Command-line interface.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use taxicast_core::demand::Partitioning;

use crate::artifacts::{self, ExpertErrors};
use crate::config::{parse_metric, ExperimentConfig, Schema, Source};
use crate::error::{Error, Result, StageExt};
use crate::io::csv_writer;
use crate::pipeline;
use crate::report::{self, HedgeReport, PeriodReport, ReportBundle, StrategyReport, BUNDLE_FILE};
use crate::synth;

#[derive(Debug, Parser)]
#[command(name = "taxicast", version, about = "Taxi demand forecasting on Voronoi and geohash tessellations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic city's bookings as a schema A CSV.
    Synth(Opts),
    /// Read, clean and bound the input events.
    Ingest(Opts),
    /// Cluster training events and build both partitionings.
    Tessellate(Opts),
    /// Aggregate demand and fit one model per cell.
    Forecast(Opts),
    /// Tune and run the expert combination on a per-instant errors CSV.
    Hedge(Opts),
    /// Run the whole experiment and write every report.
    Run(Opts),
    /// Re-render the report files from a bundle.json.
    Report(Opts),
}

#[derive(Debug, Clone, Args)]
pub struct Opts {
    /// Config file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sampling period in minutes: 5, 15, 30 or 60.
    #[arg(long)]
    pub period: Option<u32>,
    /// Number of K-Means clusters.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub geohash_level: Option<usize>,
    /// smape or mase.
    #[arg(long)]
    pub metric: Option<String>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Input CSV schema, a or b.
    #[arg(long)]
    pub schema: Option<String>,
    /// Input file: events CSV, errors CSV for `hedge`, bundle for `report`.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

impl Opts {
    /// The config file, or the defaults, with command-line overrides applied.
    pub fn config(&self, events_input: bool) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(p) = self.period {
            cfg.periods = vec![p];
        }
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if let Some(l) = self.geohash_level {
            cfg.geohash_level = l;
        }
        if let Some(m) = &self.metric {
            cfg.metric = parse_metric(m)?;
        }
        let schema = self.schema.as_deref().map(Schema::parse).transpose()?;
        match (&self.input, events_input) {
            (Some(path), true) => {
                cfg.source = Source::Csv {
                    path: path.clone(),
                    schema: schema.unwrap_or(Schema::A),
                }
            }
            _ => {
                if let (Some(s), Source::Csv { schema, .. }) = (schema, &mut cfg.source) {
                    *schema = s;
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cmd: &Command) -> Result<()> {
    match cmd {
        Command::Synth(o) => synth_cmd(o),
        Command::Ingest(o) => ingest_cmd(o),
        Command::Tessellate(o) => tessellate_cmd(o),
        Command::Forecast(o) => forecast_cmd(o),
        Command::Hedge(o) => hedge_cmd(o),
        Command::Run(o) => {
            let cfg = o.config(true)?;
            let bundle = artifacts::run_to_dir(&cfg, &o.out)?;
            for p in &bundle.periods {
                let means: Vec<String> = p
                    .strategies
                    .iter()
                    .map(|s| format!("{} {:.4}", s.name, s.mean_error))
                    .collect();
                println!(
                    "period {}min {}: {}, dhedge {:.4} (beta {}, gamma {})",
                    p.period_minutes,
                    p.metric,
                    means.join(", "),
                    p.hedge.mean_error,
                    p.hedge.beta,
                    p.hedge.gamma
                );
            }
            Ok(())
        }
        Command::Report(o) => {
            let input = o.input.clone().unwrap_or_else(|| o.out.join(BUNDLE_FILE));
            let bundle = ReportBundle::load(&input)?;
            report::write_reports(&bundle, &o.out)
        }
    }
}

fn synth_cmd(o: &Opts) -> Result<()> {
    let cfg = o.config(false)?;
    let spec = cfg
        .synthetic()
        .ok_or_else(|| Error::Config("synth needs a synthetic source".into()))?;
    let events = synth::generate(spec, cfg.seed)?;
    let path = o.out.join("events.csv");
    crate::io::write_events(&path, &events)?;
    println!("{} events -> {}", events.len(), path.display());
    Ok(())
}

fn ingest_cmd(o: &Opts) -> Result<()> {
    let cfg = o.config(true)?;
    let data = pipeline::ingest(&cfg).stage("ingest")?;
    crate::io::write_events(&o.out.join("events.csv"), &data.events)?;
    let json = serde_json::to_string_pretty(&data.summary).map_err(|e| Error::Data(e.to_string()))?;
    report::write_text(&o.out.join("ingest.json"), &(json + "\n"))?;
    println!(
        "{} events kept of {} rows ({} invalid, {} outside the study area)",
        data.summary.events, data.summary.rows, data.summary.invalid, data.summary.out_of_bounds
    );
    Ok(())
}

fn write_geohash_cells(tess: &pipeline::Tessellation, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["partition_id", "area_km2", "modeled"])?;
    for i in 0..tess.geohash.len() {
        let modeled = tess.geohash_modeled.binary_search(&i).is_ok();
        w.write_record([
            tess.geohash.partition_id(i),
            tess.geohash.area_km2(i).to_string(),
            modeled.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn tessellate_cmd(o: &Opts) -> Result<()> {
    let cfg = o.config(true)?;
    let data = pipeline::ingest(&cfg).stage("ingest")?;
    let tess = pipeline::tessellate(&cfg, &data).stage("tessellate")?;
    artifacts::write_tessellation(&tess, &o.out)?;
    write_geohash_cells(&tess, &o.out.join("geohash_cells.csv"))?;
    println!(
        "{} Voronoi cells, {} geohash cells ({} modeled)",
        tess.voronoi.len(),
        tess.geohash.len(),
        tess.geohash_modeled.len()
    );
    Ok(())
}

fn forecast_cmd(o: &Opts) -> Result<()> {
    let cfg = o.config(true)?;
    let data = pipeline::ingest(&cfg).stage("ingest")?;
    let tess = pipeline::tessellate(&cfg, &data).stage("tessellate")?;
    for (i, &period) in cfg.periods.iter().enumerate() {
        let p = pipeline::run_period(&cfg, &data, &tess, period)?;
        let dir = report::period_dir(&o.out, i, period);
        artifacts::write_period(&p, &dir)?;
        report::write_per_cell(&p.report, &dir.join("per_cell.csv"))?;
        report::write_models(&p.report, &dir.join("models.json"))?;
    }
    Ok(())
}

fn hedge_cmd(o: &Opts) -> Result<()> {
    let cfg = o.config(false)?;
    let input = o.input.clone().unwrap_or_else(|| o.out.join("errors.csv"));
    let errors = ExpertErrors::read(&input)?;
    let hedge: HedgeReport = pipeline::combine(
        &cfg,
        &errors.validation,
        &errors.test,
        &errors.test_bin_starts,
        errors.period_minutes,
    )
    .stage("hedge")?;
    let strategies = errors
        .names
        .iter()
        .zip(errors.validation.iter().zip(&errors.test))
        .map(|(name, (v, t))| StrategyReport {
            name: name.clone(),
            cells: Vec::new(),
            validation_errors: v.clone(),
            test_errors: t.clone(),
            mean_error: pipeline::mean(t),
            zero_demand_cells: 0,
            kept_events: 0,
            dedup_dropped: 0,
        })
        .collect();
    let period = PeriodReport {
        period_minutes: errors.period_minutes,
        metric: crate::config::metric_name(cfg.metric).into(),
        season_bins: 0,
        train_bins: 0,
        test_bin_starts: errors.test_bin_starts.clone(),
        strategies,
        hedge,
        ks: None,
    };
    report::write_trace(&period, &o.out.join("trace.csv"))?;
    report::write_cumulative(&period, &o.out.join("cumulative.csv"))?;
    println!(
        "beta {}, gamma {}: hybrid mean error {:.4}, {} switches",
        period.hedge.beta, period.hedge.gamma, period.hedge.mean_error, period.hedge.switches
    );
    Ok(())
}
