//! Argument parsing and subcommand drivers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use tactile_core::calibration::{fit_cubic_origin, last_per_step, resample_sync};
use tactile_core::contact::estimate;
use tactile_core::flow::dis_flow;
use tactile_core::grasp::{run_grasp, GraspScenario};
use tactile_core::imaging::generate_marker_pattern;
use tactile_core::membrane::{simulate_sequence, stepped_shear_schedule, ScheduleEntry, SimOptions};
use tactile_core::{Frame, MarkerPattern};

use crate::bench::{run_bench, BenchOptions};
use crate::calib_io::{load_model, read_series, ModelFile};
use crate::config::RunConfig;
use crate::error::{csv as csv_err, io, json};
use crate::flowio::{read_vikf, write_flow_csv, write_vikf};
use crate::grasp_io::{write_jsonl, write_summary, OutcomeReport};
use crate::meta::{load_frame, save_frame};
use crate::pgm::write_pgm;
use crate::records::{ContactRow, CsvOut, TruthRow};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "tactile", version, about = "Vision-based tactile sensing pipeline")]
pub struct Cli {
    /// Seed for marker patterns, sensor noise and synthetic sequences.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for flow computation (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
    /// JSON file with `flow`, `estimator`, `calibration`, `sim` and `grasp` sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a deformation schedule to numbered PGMs plus truth.csv.
    Simulate(SimulateArgs),
    /// Dense flow between two PGM frames.
    Flow(FlowArgs),
    /// Contact area and shear force for every frame of a sequence.
    Estimate(EstimateArgs),
    /// Fit the cubic force model to force and displacement logs.
    Calibrate(CalibrateArgs),
    /// Run a closed-loop grasp scenario.
    Grasp(GraspArgs),
    /// Time flow plus estimation on a synthetic sequence.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Schedule JSON: an array of `{"time": s, "spec": {...}}` entries.
    #[arg(long, conflicts_with = "steps", required_unless_present = "steps")]
    pub schedule: Option<PathBuf>,
    /// Generate a stepped uniform-shear schedule instead.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Shear added per step, pixels.
    #[arg(long, default_value_t = 2.5, requires = "steps")]
    pub increment: f64,
    /// Seconds between steps.
    #[arg(long, default_value_t = 1.0, requires = "steps")]
    pub dt: f64,
    #[arg(long, default_value_t = 352)]
    pub width: usize,
    #[arg(long, default_value_t = 352)]
    pub height: usize,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[arg(long)]
    pub prev: PathBuf,
    #[arg(long)]
    pub next: PathBuf,
    /// Initial flow (VIKF) to start from.
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Binary VIKF output.
    #[arg(long, required_unless_present = "csv")]
    pub out: Option<PathBuf>,
    /// `x,y,dx,dy` CSV output.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Directory of PGM frames; the first by name is the reference.
    #[arg(long)]
    pub input: PathBuf,
    /// Calibration model JSON (default: the reference model or the config's).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// CSV output (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write each contact mask as `<frame>_mask.pgm` here.
    #[arg(long)]
    pub masks: Option<PathBuf>,
    /// Start every flow from zero instead of the previous frame's result.
    #[arg(long)]
    pub cold_start: bool,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// `t_s,value` force log, newtons.
    #[arg(long)]
    pub force: PathBuf,
    /// `t_s,value` displacement log, pixels.
    #[arg(long)]
    pub disp: PathBuf,
    /// Keep only the last pair of each hold window of this many seconds.
    #[arg(long)]
    pub hold: Option<f64>,
    /// Also write the model JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GraspArgs {
    /// Scenario JSON.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Fingertip states as JSON lines.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Phase transitions and outcome as CSV.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 352)]
    pub width: usize,
    #[arg(long, default_value_t = 352)]
    pub height: usize,
    #[arg(long, default_value_t = 100)]
    pub frames: usize,
}

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    GraspFailed,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::GraspFailed => 3,
        }
    }
}

/// Exit status for usage, schema and IO errors.
pub const ERROR_EXIT: u8 = 2;

/// Runs a parsed command line, writing machine-readable output to `stdout`
/// and progress to stderr.
pub fn run(cli: &Cli, stdout: &mut (dyn Write + Send)) -> Result<Status> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let go = |out: &mut (dyn Write + Send)| dispatch(cli, &cfg, out);
    match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build()
            .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?
            .install(|| go(stdout)),
        None => go(stdout),
    }
}

fn dispatch(cli: &Cli, cfg: &RunConfig, stdout: &mut (dyn Write + Send)) -> Result<Status> {
    match &cli.command {
        Command::Simulate(a) => simulate(a, cfg, cli.seed),
        Command::Flow(a) => flow(a, cfg),
        Command::Estimate(a) => estimate_cmd(a, cfg, stdout),
        Command::Calibrate(a) => calibrate(a, stdout),
        Command::Grasp(a) => return grasp(a, cfg, cli.seed, stdout),
        Command::Bench(a) => bench(a, cfg, cli.seed, stdout),
    }?;
    Ok(Status::Success)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(io(path))?))
}

fn read_json<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(io(path))?;
    serde_json::from_str(&text).map_err(json(path))
}

/// `frame_0000.pgm` is the reference.
pub fn frame_name(index: usize) -> String {
    format!("frame_{index:04}.pgm")
}

fn simulate(a: &SimulateArgs, cfg: &RunConfig, seed: u64) -> Result<()> {
    let schedule: Vec<ScheduleEntry> = match (&a.schedule, a.steps) {
        (Some(path), _) => read_json(path)?,
        (None, Some(n)) => stepped_shear_schedule(n, a.increment, [1.0, 0.0], a.dt, a.dt),
        (None, None) => unreachable!("clap requires one of --schedule and --steps"),
    };
    let reference = generate_marker_pattern(&MarkerPattern::new(seed, a.width, a.height))?;
    let opts = SimOptions {
        noise_seed: seed ^ 0x9e37_79b9_7f4a_7c15,
        ..cfg.sim
    };
    let frames = simulate_sequence(&reference, &schedule, &cfg.calibration, &opts)?;

    std::fs::create_dir_all(&a.out).map_err(io(&a.out))?;
    save_frame(&a.out.join(frame_name(0)), &reference)?;
    let truth_path = a.out.join("truth.csv");
    let mut truth = CsvOut::new(create(&truth_path)?, &TruthRow::HEADER).map_err(csv_err(&truth_path))?;
    for (i, sim) in frames.iter().enumerate() {
        save_frame(&a.out.join(frame_name(i + 1)), &sim.frame)?;
        truth
            .row(&TruthRow::new(i + 1, sim.frame.timestamp, &sim.truth))
            .map_err(csv_err(&truth_path))?;
    }
    truth.finish().map_err(io(&truth_path))?;
    eprintln!("wrote {} frames and truth.csv to {}", frames.len() + 1, a.out.display());
    Ok(())
}

fn flow(a: &FlowArgs, cfg: &RunConfig) -> Result<()> {
    let prev = load_frame(&a.prev)?;
    let next = load_frame(&a.next)?;
    let init = match &a.init {
        Some(path) => {
            let bytes = std::fs::read(path).map_err(io(path))?;
            Some(read_vikf(&bytes).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?)
        }
        None => None,
    };
    let field = dis_flow(&prev, &next, &cfg.flow, init.as_ref())?;
    if let Some(path) = &a.out {
        std::fs::write(path, write_vikf(&field)).map_err(io(path))?;
    }
    if let Some(path) = &a.csv {
        write_flow_csv(create(path)?, &field).map_err(io(path))?;
    }
    let n = field.data().len() as f64;
    let (sx, sy) = field.data().iter().fold((0.0, 0.0), |(x, y), d| (x + d[0] as f64, y + d[1] as f64));
    eprintln!("{}x{} flow, mean displacement ({:.3}, {:.3}) px", field.width(), field.height(), sx / n, sy / n);
    Ok(())
}

/// PGM files in `dir`, sorted by name.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io(dir))?
        .map(|e| e.map(|e| e.path()).map_err(io(dir)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")) && p.is_file())
        .collect();
    paths.sort();
    Ok(paths)
}

fn mask_frame(mask: &tactile_core::Mask) -> Frame {
    let pixels = mask.data.iter().map(|&m| if m { 255 } else { 0 }).collect();
    Frame::new(mask.width, mask.height, pixels).expect("mask has non-zero size")
}

fn estimate_cmd(a: &EstimateArgs, cfg: &RunConfig, stdout: &mut (dyn Write + Send)) -> Result<()> {
    let model = match &a.model {
        Some(path) => load_model(path)?,
        None => cfg.calibration,
    };
    let paths = list_frames(&a.input)?;
    let Some((first, rest)) = paths.split_first() else {
        return Err(Error::MissingReference(a.input.clone()));
    };
    let reference = load_frame(first)?;
    let frames = rest
        .iter()
        .map(|p| {
            let f = load_frame(p)?;
            if f.dims() != reference.dims() {
                return Err(Error::Core(tactile_core::Error::DimensionMismatch {
                    expected: reference.dims(),
                    found: f.dims(),
                }));
            }
            Ok(f)
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(dir) = &a.masks {
        std::fs::create_dir_all(dir).map_err(io(dir))?;
    }

    let out_name = a.out.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
    let sink: Box<dyn Write + '_> = match &a.out {
        Some(path) => Box::new(create(path)?),
        None => Box::new(stdout),
    };
    let mut csv = CsvOut::new(sink, &ContactRow::HEADER).map_err(csv_err(&out_name))?;
    let mut previous = None;
    for (path, frame) in rest.iter().zip(&frames) {
        let init = if a.cold_start { None } else { previous.as_ref() };
        let field = dis_flow(&reference, frame, &cfg.flow, init)?;
        let state = estimate(&field, &cfg.estimator, &model, frame.timestamp)?;
        csv.row(&ContactRow::from(&state)).map_err(csv_err(&out_name))?;
        if let Some(dir) = &a.masks {
            let stem = path.file_stem().unwrap_or_default().to_string_lossy();
            let mask_path = dir.join(format!("{stem}_mask.pgm"));
            std::fs::write(&mask_path, write_pgm(&mask_frame(&state.contact_mask))).map_err(io(&mask_path))?;
        }
        eprintln!(
            "{}: contact {:.1}%, force ({:.3}, {:.3}) N",
            path.file_name().unwrap_or_default().to_string_lossy(),
            100.0 * state.area_fraction,
            state.shear_force[0],
            state.shear_force[1]
        );
        previous = Some(field);
    }
    csv.finish().map_err(io(&out_name))?;
    Ok(())
}

fn calibrate(a: &CalibrateArgs, stdout: &mut (dyn Write + Send)) -> Result<()> {
    let force = read_series(&a.force)?;
    let disp = read_series(&a.disp)?;
    let synced = resample_sync(&force, &disp)?;
    let pairs = match a.hold {
        Some(hold) => {
            let t0 = disp.samples()[0].0;
            last_per_step(&synced.pairs, t0, hold)
        }
        None => synced.pairs,
    };
    let xy: Vec<(f64, f64)> = pairs.iter().map(|p| (p.x, p.f)).collect();
    let fit = fit_cubic_origin(&xy)?;
    let report = ModelFile::from(&fit);
    let text = serde_json::to_string_pretty(&report).expect("plain struct serializes");
    writeln!(stdout, "{text}").map_err(io("<stdout>"))?;
    if let Some(path) = &a.out {
        std::fs::write(path, text + "\n").map_err(io(path))?;
    }
    eprintln!(
        "fitted {} pairs ({} dropped outside the overlap), R^2 = {:.6}",
        fit.n_pairs, synced.dropped, fit.r_squared
    );
    Ok(())
}

fn grasp(a: &GraspArgs, cfg: &RunConfig, seed: u64, stdout: &mut (dyn Write + Send)) -> Result<Status> {
    let scenario: GraspScenario = read_json(&a.scenario)?;
    scenario.validate()?;
    let params = cfg.grasp_params(seed);
    let trace = run_grasp(&scenario, &params)?;
    if let Some(path) = &a.trace {
        write_jsonl(create(path)?, &trace).map_err(io(path))?;
    }
    if let Some(path) = &a.summary {
        write_summary(create(path)?, &trace).map_err(csv_err(path))?;
    }
    let report = OutcomeReport::from(&trace.outcome);
    serde_json::to_writer(&mut *stdout, &report).map_err(json("<stdout>"))?;
    writeln!(stdout).map_err(io("<stdout>"))?;
    let o = &trace.outcome;
    eprintln!(
        "{}: pitches {:.1}/{:.1} deg, contact {:.1}%/{:.1}%, payload limit {:.2} N",
        report.outcome,
        o.final_pitch[0],
        o.final_pitch[1],
        100.0 * o.final_area[0],
        100.0 * o.final_area[1],
        o.payload_limit
    );
    Ok(if o.success { Status::Success } else { Status::GraspFailed })
}

fn bench(a: &BenchArgs, cfg: &RunConfig, seed: u64, stdout: &mut (dyn Write + Send)) -> Result<()> {
    let report = run_bench(&BenchOptions {
        width: a.width,
        height: a.height,
        frames: a.frames,
        seed,
        flow: cfg.flow,
        estimator: cfg.estimator,
        calibration: cfg.calibration,
    })?;
    serde_json::to_writer_pretty(&mut *stdout, &report).map_err(json("<stdout>"))?;
    writeln!(stdout).map_err(io("<stdout>"))?;
    match report.mean_fps {
        Some(fps) => eprintln!("{}x{}: {fps:.1} FPS mean on {} threads", a.width, a.height, report.threads),
        None => eprintln!("no frames"),
    }
    Ok(())
}
