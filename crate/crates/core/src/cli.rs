//! Command-line front end.
//!
//! Exit status: 0 on success, 2 for configuration errors, 3 when a numerical
//! invariant fails. Values from `--config <json>` are overridden by flags.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::chain::{BlockSpec, ChainSpec};
use crate::error::{Error, Result};
use crate::lindblad::LindbladModel;
use crate::output::{format_sig, CsvTable};
use crate::presets::{
    chain_comment, controllable_dissipation, qubit_mixing, qubit_reset, spontaneous_decay,
    DecayComparisonConfig,
};
use crate::propagator::{
    default_dt, light_cone_sites, occupation_heatmap, simulate, time_grid, AmplitudeVector,
    Observable, DEFAULT_MARGIN,
};
use crate::reduced::{TargetDensityMatrix, TargetState};
use crate::spectral::{classify, phase_diagram, GridAxis};

#[derive(Debug, Parser)]
#[command(
    name = "specdis",
    version,
    about = "Spectrally gated dissipation on an ancilla chain"
)]
pub struct Cli {
    /// Worker threads for parallel sections.
    #[arg(long, global = true, env = "SPECDIS_THREADS")]
    pub threads: Option<usize>,

    /// JSON file with default parameter values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Omit the generation timestamp comment.
    #[arg(long, global = true)]
    pub no_timestamp: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Propagate one chain and write observables or an occupation map.
    Simulate(SimulateArgs),
    /// Decay/trapped verdicts over a (mu/B, C/B) grid.
    PhaseDiagram(PhaseArgs),
    /// Block model: |E_0> occupation for every initial target eigenstate.
    Block(BlockArgs),
    /// Two-level Lindblad decay baseline.
    Lindblad(LindbladArgs),
    /// Reproduce one of the four preset scenarios.
    Example(ExampleArgs),
}

#[derive(Debug, Args, Default)]
pub struct SimulateArgs {
    #[arg(long = "B", allow_negative_numbers = true)]
    pub bulk: Option<f64>,
    #[arg(long = "C", allow_negative_numbers = true)]
    pub boundary: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    /// Chain length; defaults to the light-cone length for --t-max.
    #[arg(long)]
    pub sites: Option<usize>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Observables: n<j>, parity, norm (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub obs: Vec<String>,
    /// Write the occupation map (t,j,n) instead of a time series.
    #[arg(long)]
    pub heatmap: bool,
    /// Initially occupied site.
    #[arg(long)]
    pub init_site: Option<usize>,
    /// Safety factor for the light-cone chain length.
    #[arg(long)]
    pub margin: Option<f64>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct PhaseArgs {
    /// mu/B grid as lo:hi:step.
    #[arg(long, allow_hyphen_values = true)]
    pub mu_range: Option<String>,
    /// C/B grid as lo:hi:step.
    #[arg(long, allow_hyphen_values = true)]
    pub c_range: Option<String>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct BlockArgs {
    #[arg(long = "B", allow_negative_numbers = true)]
    pub bulk: Option<f64>,
    #[arg(long = "C", allow_negative_numbers = true)]
    pub boundary: Option<f64>,
    /// Target energies E_0,E_1,...
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub energies: Vec<f64>,
    #[arg(long)]
    pub sites: Option<usize>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct LindbladArgs {
    #[arg(long = "E0", allow_negative_numbers = true)]
    pub e0: Option<f64>,
    #[arg(long = "E1", allow_negative_numbers = true)]
    pub e1: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Initial target state: excited, ground or plus.
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct ExampleArgs {
    /// Scenario number 1-4.
    pub number: u8,
    #[arg(long = "B", allow_negative_numbers = true)]
    pub bulk: Option<f64>,
    #[arg(long = "C", allow_negative_numbers = true)]
    pub boundary: Option<f64>,
    #[arg(long)]
    pub sites: Option<usize>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

/// Keys accepted in a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    #[serde(rename = "B")]
    pub bulk: Option<f64>,
    #[serde(rename = "C")]
    pub boundary: Option<f64>,
    pub mu: Option<f64>,
    pub sites: Option<usize>,
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
    pub obs: Option<Vec<String>>,
    pub heatmap: Option<bool>,
    pub init_site: Option<usize>,
    pub margin: Option<f64>,
    pub mu_range: Option<String>,
    pub c_range: Option<String>,
    pub energies: Option<Vec<f64>>,
    #[serde(rename = "E0")]
    pub e0: Option<f64>,
    #[serde(rename = "E1")]
    pub e1: Option<f64>,
    pub gamma: Option<f64>,
    pub init: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Runs the tool on `args` (including the program name) and returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        // downstream reader closed early, e.g. `| head`
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let ctx = Context {
        timestamp: !cli.no_timestamp,
    };
    let job = move || match cli.command {
        Command::Simulate(a) => cmd_simulate(a, &file, &ctx),
        Command::PhaseDiagram(a) => cmd_phase_diagram(a, &file, &ctx),
        Command::Block(a) => cmd_block(a, &file, &ctx),
        Command::Lindblad(a) => cmd_lindblad(a, &file, &ctx),
        Command::Example(a) => cmd_example(a, &file, &ctx),
    };
    match cli.threads {
        Some(0) => Err(Error::Config("--threads must be at least 1".into())),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(job),
        None => job(),
    }
}

struct Context {
    timestamp: bool,
}

impl Context {
    fn emit(&self, mut table: CsvTable, out: Option<&Path>) -> Result<()> {
        if self.timestamp {
            table.prepend_comments(vec![format!(
                "generated {}",
                chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
            )]);
        }
        match out {
            Some(path) => {
                let file = File::create(path)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                table.write(BufWriter::new(file))
            }
            None => table.write(io::stdout().lock()),
        }
    }
}

fn pick<T: Clone>(flag: Option<T>, file: &Option<T>, default: T) -> T {
    flag.or_else(|| file.clone()).unwrap_or(default)
}

fn cmd_simulate(args: SimulateArgs, file: &FileConfig, ctx: &Context) -> Result<()> {
    let bulk = pick(args.bulk, &file.bulk, 1.0);
    let boundary = pick(args.boundary, &file.boundary, 1.0);
    let mu = pick(args.mu, &file.mu, 0.0);
    let t_max = pick(args.t_max, &file.t_max, 40.0);
    let margin = pick(args.margin, &file.margin, DEFAULT_MARGIN);
    let dt = pick(args.dt, &file.dt, default_dt(bulk));
    let init_site = pick(args.init_site, &file.init_site, 0);
    let heatmap = args.heatmap || file.heatmap.unwrap_or(false);
    let obs_names = if !args.obs.is_empty() {
        args.obs
    } else {
        file.obs.clone().unwrap_or_else(|| vec!["n0".to_string()])
    };
    if bulk.is_nan() || bulk <= 0.0 {
        return Err(Error::InvalidSpec(format!(
            "B must be positive, got {bulk}"
        )));
    }
    let sites = args
        .sites
        .or(file.sites)
        .unwrap_or_else(|| light_cone_sites(bulk, t_max, margin));
    let spec = ChainSpec::new(bulk, boundary, mu, sites)?;
    let observables = obs_names
        .iter()
        .map(|s| s.parse::<Observable>())
        .collect::<Result<Vec<_>>>()?;
    for obs in &observables {
        if let Observable::Occupation(j) = obs {
            if *j >= sites {
                return Err(Error::IndexOutOfRange {
                    index: *j,
                    len: sites,
                });
            }
        }
    }
    let psi0 = AmplitudeVector::site(sites, init_site)?;

    let mut comments = vec![
        chain_comment("simulate", &spec),
        format!(
            "t_max={} dt={} init_site={init_site}",
            format_sig(t_max),
            format_sig(dt)
        ),
    ];
    if boundary > 0.0 {
        let verdict = classify(spec.reduced_energy(), spec.reduced_coupling())?;
        comments.push(format!(
            "decay_condition decays={} branch={} n_bound={}",
            verdict.decays as u8,
            verdict.branch,
            verdict.bound_states.len()
        ));
        comments.push(format!(
            "trapped_weight prediction={}",
            format_sig(verdict.trapped_weight())
        ));
    } else {
        comments.push("decay_condition n/a: site 0 decoupled (C=0)".to_string());
    }
    comments.push(format!(
        "valid_horizon={}",
        format_sig(spec.valid_horizon())
    ));
    if t_max > spec.valid_horizon() / DEFAULT_MARGIN {
        let msg = format!(
            "warning: t_max={} exceeds N/(2B)/{DEFAULT_MARGIN}={}; wall reflections may contaminate late times",
            format_sig(t_max),
            format_sig(spec.valid_horizon() / DEFAULT_MARGIN)
        );
        eprintln!("{msg}");
        comments.push(msg);
    }

    let mut table;
    if heatmap {
        let map = occupation_heatmap(&spec, &psi0, t_max, dt)?;
        comments.push(boundary_comment(map.boundary_time));
        table = CsvTable::new(["t", "j", "n"]);
        for (t, row) in map.times.iter().zip(&map.occupations) {
            for (j, n) in row.iter().enumerate() {
                table.push_row(vec![format_sig(*t), j.to_string(), format_sig(*n)]);
            }
        }
    } else {
        let times = time_grid(t_max, dt)?;
        let result = simulate(&spec, &psi0, &times, &observables)?;
        comments.push(boundary_comment(result.boundary_time));
        let mut header = vec!["t".to_string()];
        header.extend(observables.iter().map(|o| o.to_string()));
        table = CsvTable::new(header);
        let columns: Vec<&Vec<f64>> = observables
            .iter()
            .map(|o| &result.series[&o.to_string()].values)
            .collect();
        for (k, t) in times.iter().enumerate() {
            let mut row = vec![*t];
            row.extend(columns.iter().map(|c| c[k]));
            table.push_values(&row);
        }
    }
    table.prepend_comments(comments);
    ctx.emit(table, args.out.as_deref())
}

fn boundary_comment(t: Option<f64>) -> String {
    match t {
        Some(t) => format!("boundary_time={}", format_sig(t)),
        None => "boundary_time=none".to_string(),
    }
}

fn cmd_phase_diagram(args: PhaseArgs, file: &FileConfig, ctx: &Context) -> Result<()> {
    let mu_axis: GridAxis = pick(args.mu_range, &file.mu_range, "-3:3:0.02".into()).parse()?;
    let c_axis: GridAxis = pick(args.c_range, &file.c_range, "0.02:3:0.02".into()).parse()?;
    let pd = phase_diagram(&mu_axis, &c_axis)?;
    let mut table = pd.to_table();
    table.prepend_comments(vec![
        format!(
            "phase diagram mu_B={}:{}:{} C_B={}:{}:{}",
            format_sig(mu_axis.lo),
            format_sig(mu_axis.hi),
            format_sig(mu_axis.step),
            format_sig(c_axis.lo),
            format_sig(c_axis.hi),
            format_sig(c_axis.step)
        ),
        format!(
            "rows: C_B outer ({} values), mu_B inner ({} values)",
            pd.c_values.len(),
            pd.mu_values.len()
        ),
    ]);
    ctx.emit(table, args.out.as_deref())
}

fn cmd_block(args: BlockArgs, file: &FileConfig, ctx: &Context) -> Result<()> {
    let bulk = pick(args.bulk, &file.bulk, 1.0);
    let boundary = pick(args.boundary, &file.boundary, 0.5);
    let energies = if args.energies.is_empty() {
        file.energies
            .clone()
            .unwrap_or_else(|| vec![0.0, 1.0, 2.0, 3.0])
    } else {
        args.energies
    };
    let t_max = pick(args.t_max, &file.t_max, 160.0);
    let dt = pick(
        args.dt,
        &file.dt,
        default_dt(bulk.abs().max(f64::MIN_POSITIVE)),
    );
    let sites = args
        .sites
        .or(file.sites)
        .unwrap_or_else(|| light_cone_sites(bulk.abs(), t_max, DEFAULT_MARGIN));
    let block = BlockSpec::new(bulk, boundary, energies, sites)?;
    let run = controllable_dissipation(&block, t_max, dt)?;
    ctx.emit(run.to_table(), args.out.as_deref())
}

fn initial_target(name: &str) -> Result<TargetDensityMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let state = match name {
        "excited" => TargetState::basis(2, 1)?,
        "ground" => TargetState::basis(2, 0)?,
        "plus" => TargetState::from_real(&[s, s])?,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown initial state '{other}' (excited, ground, plus)"
            )))
        }
    };
    TargetDensityMatrix::pure(&state)
}

fn cmd_lindblad(args: LindbladArgs, file: &FileConfig, ctx: &Context) -> Result<()> {
    let e0 = pick(args.e0, &file.e0, 0.0);
    let e1 = pick(args.e1, &file.e1, 1.0);
    let gamma = pick(args.gamma, &file.gamma, 1.0);
    let t_max = pick(args.t_max, &file.t_max, 5.0);
    let dt = pick(args.dt, &file.dt, 0.05);
    let init = pick(args.init, &file.init, "excited".to_string());
    let model = LindbladModel::spontaneous_decay(e0, e1, gamma)?;
    let rho0 = initial_target(&init)?;
    let times = time_grid(t_max, dt)?;
    let traj = model.integrate(&rho0, &times)?;
    let mut table = CsvTable::new([
        "t",
        "rho_00",
        "rho_11",
        "re_rho_01",
        "im_rho_01",
        "exp_minus_gamma_t",
        "exp_minus_2gamma_t",
    ]);
    table.comment(format!(
        "Lindblad decay L=|0><1| Gamma={} E0={} E1={} init={init}",
        format_sig(gamma),
        format_sig(e0),
        format_sig(e1)
    ));
    table.comment("exp_minus_gamma_t: closed-form population of |1> from the integrated equation");
    table.comment("exp_minus_2gamma_t: reference curve exp(-2 Gamma t) as quoted for this example");
    for (t, rho) in times.iter().zip(&traj) {
        let coh = rho.element(0, 1);
        table.push_values(&[
            *t,
            rho.population(0),
            rho.population(1),
            coh.re,
            coh.im,
            (-gamma * t).exp(),
            (-2.0 * gamma * t).exp(),
        ]);
    }
    ctx.emit(table, args.out.as_deref())
}

fn write_json(path: &Path, rho: &TargetDensityMatrix) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer(&mut w, &rho.to_json()).map_err(|e| Error::Io(e.into()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn cmd_example(args: ExampleArgs, file: &FileConfig, ctx: &Context) -> Result<()> {
    if !(1..=4).contains(&args.number) {
        return Err(Error::InvalidArgument(format!(
            "no example {}; choose 1-4",
            args.number
        )));
    }
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| Error::Config(format!("{}: {e}", args.out_dir.display())))?;
    let dir = args.out_dir.as_path();
    let mut written = Vec::new();
    let bulk = pick(args.bulk, &file.bulk, 1.0);
    let dt = pick(
        args.dt,
        &file.dt,
        default_dt(bulk.abs().max(f64::MIN_POSITIVE)),
    );
    match args.number {
        1 | 2 => {
            let boundary = pick(args.boundary, &file.boundary, 1.0);
            let sites = pick(args.sites, &file.sites, 400);
            let spec = ChainSpec::new(bulk, boundary, 0.0, sites)?;
            let t_max = pick(args.t_max, &file.t_max, 0.8 * spec.valid_horizon());
            if args.number == 1 {
                let run = qubit_reset(&spec, t_max, dt)?;
                let csv = dir.join("example1_reset.csv");
                ctx.emit(run.to_table(), Some(&csv))?;
                let json = dir.join("example1_final_rho.json");
                write_json(&json, run.states.last().expect("non-empty grid"))?;
                written.extend([csv, json]);
            } else {
                let run = qubit_mixing(&spec, 0.6, t_max, dt)?;
                let csv = dir.join("example2_mixing.csv");
                ctx.emit(run.to_table(), Some(&csv))?;
                let orth = dir.join("example2_final_rho_orthogonal.json");
                write_json(&orth, run.orthogonal.last().expect("non-empty grid"))?;
                let over = dir.join("example2_final_rho_overlap.json");
                write_json(&over, run.overlapping.last().expect("non-empty grid"))?;
                written.extend([csv, orth, over]);
            }
        }
        3 => {
            let cfg = DecayComparisonConfig {
                bulk_hopping: bulk,
                boundary_hopping: pick(args.boundary, &file.boundary, 1.0),
                n_sites: pick(args.sites, &file.sites, 400),
                t_max: pick(args.t_max, &file.t_max, 60.0),
                dt,
                ..DecayComparisonConfig::default()
            };
            let cmp = spontaneous_decay(&cfg)?;
            let micro = dir.join("example3_microscopic.csv");
            ctx.emit(cmp.microscopic_table(), Some(&micro))?;
            let lind = dir.join("example3_lindblad.csv");
            ctx.emit(cmp.lindblad_table(), Some(&lind))?;
            written.extend([micro, lind]);
        }
        4 => {
            let block = BlockSpec::new(
                bulk,
                pick(args.boundary, &file.boundary, 0.5),
                file.energies
                    .clone()
                    .unwrap_or_else(|| vec![0.0, 1.0, 2.0, 3.0]),
                pick(args.sites, &file.sites, 400),
            )?;
            let t_max = pick(
                args.t_max,
                &file.t_max,
                0.8 * block.n_sites as f64 / (2.0 * bulk),
            );
            let run = controllable_dissipation(&block, t_max, dt)?;
            let csv = dir.join("example4_block.csv");
            ctx.emit(run.to_table(), Some(&csv))?;
            written.push(csv);
        }
        _ => unreachable!("example number checked above"),
    }
    let mut stdout = io::stdout().lock();
    for path in written {
        writeln!(stdout, "{}", path.display())?;
    }
    Ok(())
}
