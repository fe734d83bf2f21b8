use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use harborsim_core::bathymetry::{
    build_occupancy, export_heightmap, load_raster, save_ascii_grid, stitch_tiles, DepthGrid, RasterFormat,
    TilePlacement, TileSet, UkcPolicy,
};
use harborsim_core::log::SimulationLog;
use harborsim_core::metrics::{compute_pis, compute_pis_with, export, PIReport};
use harborsim_core::scenario::{build_reference_scenario, load_scenario, run, Scenario};
use harborsim_core::study::{batch, radar_label, render_table, weather_label, seed_range, sweep, table_csv, CellSummary};

#[derive(Parser)]
#[command(name = "harborsim", version, about = "Harbor collision-avoidance simulation harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its log, report and plot CSVs.
    Run {
        /// scenario TOML, or `reference` for the built-in encounter
        scenario: String,
        /// override the scenario seed
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out/run")]
        out: PathBuf,
    },
    /// Run every scenario in a directory over N seeds.
    Batch {
        dir: PathBuf,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        /// write per-run reports and a summary CSV here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Weather × radar study matrix over a base scenario.
    Sweep {
        /// base scenario, `reference` by default
        #[arg(long, default_value = "reference")]
        scenario: String,
        #[arg(long, value_delimiter = ',', default_value = "ideal,moderate,severe")]
        weather: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "nominal")]
        radar: Vec<String>,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        /// also write the table as CSV and the cells as JSON here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute performance indicators from a log CSV.
    Metrics {
        log: PathBuf,
        /// minimum on-time for a sustained trigger activation, s
        #[arg(long)]
        sustain: Option<f64>,
        /// re-export plot CSVs into this directory
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Bathymetry raster tools.
    Bathy {
        #[command(subcommand)]
        cmd: BathyCommand,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Ascii,
    Raw16,
}

impl From<FormatArg> for RasterFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Ascii => RasterFormat::AsciiGrid,
            FormatArg::Raw16 => RasterFormat::Raw16,
        }
    }
}

#[derive(Subcommand)]
enum BathyCommand {
    /// Load a raster, print its summary and optionally rewrite it as ASCII grid.
    Ingest {
        input: PathBuf,
        /// guessed from the extension when omitted
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge tiles into one ASCII grid. Placement comes from each tile's origin.
    Stitch {
        #[arg(required = true)]
        tiles: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a 16-bit heightmap with its range sidecar.
    Export {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify cells against draft plus under-keel clearance.
    Occupancy {
        input: PathBuf,
        /// m
        #[arg(long, default_value_t = 9.5)]
        draft: f64,
        /// fixed clearance, m
        #[arg(long, conflicts_with = "ukc_fraction")]
        ukc: Option<f64>,
        /// clearance as a fraction of draft
        #[arg(long)]
        ukc_fraction: Option<f64>,
        /// ASCII grid with 1 for blocked cells, 0 for navigable
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { scenario, seed, out } => cmd_run(&scenario, seed, &out),
        Command::Batch { dir, seeds, out } => cmd_batch(&dir, seeds, out.as_deref()),
        Command::Sweep { scenario, weather, radar, seeds, out } => cmd_sweep(&scenario, &weather, &radar, seeds, out.as_deref()),
        Command::Metrics { log, sustain, export } => cmd_metrics(&log, sustain, export.as_deref()),
        Command::Bathy { cmd } => cmd_bathy(cmd),
    }
}

fn resolve_scenario(arg: &str) -> Result<Scenario> {
    if arg == "reference" {
        return Ok(build_reference_scenario());
    }
    load_scenario(Path::new(arg)).with_context(|| format!("loading {arg}"))
}

fn target_names(sc: &Scenario) -> BTreeMap<u32, String> {
    sc.targets.iter().map(|t| (t.id, t.label())).collect()
}

fn print_report(r: &PIReport, names: &BTreeMap<u32, String>) {
    println!("scenario {} (seed {}, hash {})", r.scenario_name, r.seed, &r.scenario_hash[..12.min(r.scenario_hash.len())]);
    for (id, m) in &r.mpd_per_target {
        let name = names.get(id).cloned().unwrap_or_else(|| format!("T{id}"));
        println!("  MPD {name:<8} {m:10.1} m");
    }
    println!("  RMSE_V        {:10.4} m/s ({:.4} kn)", r.rmse_speed, r.rmse_speed_knots);
    println!("  RMSE_psi      {:10.3} deg", r.rmse_heading);
    println!("  triggers      {:10}", r.trigger_transitions);
    match r.sustained_onset {
        Some(t) => println!("  sustained at  {t:10.1} s after {} short activations", r.activations_before_sustained),
        None => println!("  no sustained activation"),
    }
    if r.grounded {
        println!("  GROUNDED");
    }
    if r.cdca_infeasible_ticks > 0 {
        println!("  avoidance infeasible on {} ticks", r.cdca_infeasible_ticks);
    }
}

fn cmd_run(arg: &str, seed: Option<u64>, out: &Path) -> Result<()> {
    let mut sc = resolve_scenario(arg)?;
    if let Some(s) = seed {
        sc = sc.with_seed(s);
    }
    let log = run(&sc)?;
    let report = compute_pis(&log)?;
    let written = export(&log, &report, out)?;
    fs::write(out.join("scenario.toml"), sc.to_toml()).with_context(|| format!("writing {}", out.display()))?;
    print_report(&report, &target_names(&sc));
    println!("wrote {} files to {}", written.len() + 1, out.display());
    Ok(())
}

fn cmd_batch(dir: &Path, seeds: u64, out: Option<&Path>) -> Result<()> {
    let results = batch(dir, seeds)?;
    let mut cells = Vec::new();
    for (sc, runs) in &results {
        let reports: Vec<PIReport> = runs.iter().map(|r| r.report.clone()).collect();
        let cell = CellSummary::from_reports(weather_label(&sc.environment.weather), radar_label(&sc.radar), reports);
        println!("{}", sc.name);
        print!("{}", render_table(std::slice::from_ref(&cell), &target_names(sc)));
        if let Some(out) = out {
            let d = out.join(&sc.name);
            fs::create_dir_all(&d).with_context(|| format!("creating {}", d.display()))?;
            for r in runs {
                let json = serde_json::to_string_pretty(&r.report)? + "\n";
                fs::write(d.join(format!("report_seed{}.json", r.seed)), json)?;
            }
        }
        cells.push(cell);
    }
    if let Some(out) = out {
        fs::write(out.join("summary.csv"), table_csv(&cells))?;
        println!("wrote {}", out.join("summary.csv").display());
    }
    Ok(())
}

fn cmd_sweep(arg: &str, weather: &[String], radar: &[String], seeds: u64, out: Option<&Path>) -> Result<()> {
    let base = resolve_scenario(arg)?;
    let w: Vec<&str> = weather.iter().map(String::as_str).collect();
    let r: Vec<&str> = radar.iter().map(String::as_str).collect();
    let cells = sweep(&base, &w, &r, &seed_range(&base, seeds))?;
    print!("{}", render_table(&cells, &target_names(&base)));
    if let Some(out) = out {
        fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        fs::write(out.join("sweep.csv"), table_csv(&cells))?;
        fs::write(out.join("sweep.json"), serde_json::to_string_pretty(&cells)? + "\n")?;
        println!("wrote sweep.csv and sweep.json to {}", out.display());
    }
    Ok(())
}

fn cmd_metrics(path: &Path, sustain: Option<f64>, export_dir: Option<&Path>) -> Result<()> {
    let log = SimulationLog::read(path)?;
    let report = match sustain {
        Some(s) => compute_pis_with(&log, s)?,
        None => compute_pis(&log)?,
    };
    let names = log.header.targets.iter().map(|t| (t.id, t.name.clone())).collect();
    print_report(&report, &names);
    if let Some(dir) = export_dir {
        let written = export(&log, &report, dir)?;
        println!("wrote {} files to {}", written.len(), dir.display());
    }
    Ok(())
}

fn load(input: &Path, format: Option<FormatArg>) -> Result<DepthGrid> {
    let fmt = format.map_or_else(|| RasterFormat::from_path(input), Into::into);
    load_raster(input, fmt).with_context(|| format!("loading {}", input.display()))
}

fn summarize(grid: &DepthGrid) {
    let g = grid.geometry();
    let nodata = grid.depths().iter().filter(|&&v| grid.is_nodata_value(v)).count();
    println!("{} rows x {} cols, cell {} m, origin ({}, {})", g.rows, g.cols, g.cell_size, g.origin.x, g.origin.y);
    match grid.depth_range() {
        Some((lo, hi)) => println!("depth {lo} .. {hi} m, {nodata} nodata cells"),
        None => println!("no valid cells"),
    }
}

/// Placement indices from the distinct tile origins.
fn place_by_origin(tiles: Vec<DepthGrid>) -> TileSet {
    let mut xs: Vec<f64> = tiles.iter().map(|t| t.geometry().origin.x).collect();
    let mut ys: Vec<f64> = tiles.iter().map(|t| t.geometry().origin.y).collect();
    for v in [&mut xs, &mut ys] {
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    }
    let rank = |v: &[f64], x: f64| v.iter().position(|&u| (u - x).abs() < 1e-6).unwrap();
    TileSet {
        tiles: tiles
            .into_iter()
            .map(|t| {
                let o = t.geometry().origin;
                (TilePlacement { row: rank(&ys, o.y), col: rank(&xs, o.x) }, t)
            })
            .collect(),
    }
}

fn cmd_bathy(cmd: BathyCommand) -> Result<()> {
    match cmd {
        BathyCommand::Ingest { input, format, out } => {
            let grid = load(&input, format)?;
            summarize(&grid);
            if let Some(out) = out {
                save_ascii_grid(&grid, &out)?;
                println!("wrote {}", out.display());
            }
        }
        BathyCommand::Stitch { tiles, out } => {
            let grids = tiles.iter().map(|p| load(p, None)).collect::<Result<Vec<_>>>()?;
            let grid = stitch_tiles(&place_by_origin(grids))?;
            summarize(&grid);
            save_ascii_grid(&grid, &out)?;
            println!("wrote {}", out.display());
        }
        BathyCommand::Export { input, out } => {
            let grid = load(&input, None)?;
            export_heightmap(&grid, &out)?;
            println!("wrote {} and {}", out.display(), harborsim_core::bathymetry::sidecar_path(&out).display());
        }
        BathyCommand::Occupancy { input, draft, ukc, ukc_fraction, out } => {
            let policy = match (ukc, ukc_fraction) {
                (_, Some(f)) => UkcPolicy::FractionOfDraft(f),
                (Some(m), None) => UkcPolicy::Fixed(m),
                (None, None) => UkcPolicy::default(),
            };
            let clearance = policy.clearance(draft);
            if clearance < 0.0 {
                bail!("under-keel clearance must not be negative");
            }
            let grid = load(&input, None)?;
            let occ = build_occupancy(&grid, draft, clearance)?;
            let g = *occ.geometry();
            println!(
                "threshold {} m: {} of {} cells blocked",
                occ.threshold(),
                occ.blocked_count(),
                g.len()
            );
            if let Some(out) = out {
                let mask = (0..g.rows)
                    .flat_map(|r| (0..g.cols).map(move |c| (r, c)))
                    .map(|(r, c)| if occ.is_blocked(r, c) { 1.0 } else { 0.0 })
                    .collect();
                save_ascii_grid(&DepthGrid::new(g, mask, -9999.0)?, &out)?;
                println!("wrote {}", out.display());
            }
        }
    }
    Ok(())
}
