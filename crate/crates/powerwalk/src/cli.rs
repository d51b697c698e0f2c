use crate::commands::{columns, run, Outcome, TRAJECTORY_COLUMNS};
use crate::config::{Command, DeltaChoice, ExperimentConfig, Format, TSchedule};
use crate::records::{columns_help, Table};
use anyhow::{bail, Context};
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "powerwalk",
    version,
    about = "Multi-step quantum walk search on the 2D torus: spectra, search sweeps, Tulsi's ancilla variant, grid sums and Szegedy walks",
    after_help = "Exit status: 0 when every check passes, 1 when a check fails, 2 on usage or configuration errors."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Subcommand, Debug)]
pub enum Sub {
    /// Dense eigendecomposition of W_t: eigenphases, projections, overlap law,
    /// path components and reduced-vs-full search trajectories.
    VerifySpectrum(GridArgs),
    /// Search sweep: alpha, Q, p_s and query counts per size.
    Search(SearchArgs),
    /// Search with the rotated ancilla.
    Tulsi(TulsiArgs),
    /// Grid sums S1, S2, S3 with their bounds.
    Sums(GridArgs),
    /// Szegedy walks W_k(M) on symmetric chains.
    Szegedy(SzegedyArgs),
    /// Spectral gap of graph powers.
    Gap(GapArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScheduleArg {
    Fixed,
    LogN,
    Sweep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Args, Debug, Default)]
pub struct OutputArgs {
    /// Output format for records.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Write records here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the scaling report (slopes and bands) as JSON here.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Random seed for generated chains.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Read the whole configuration from a JSON file; other flags are ignored.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Print the canonical JSON configuration and exit.
    #[arg(long)]
    pub print_config: bool,
}

#[derive(Args, Debug, Default)]
pub struct TolArgs {
    /// Eigenphase multiset tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tol_phase: f64,
    /// Tolerance on projection sums of 1/2.
    #[arg(long, default_value_t = 1e-9)]
    pub tol_projection: f64,
    /// Tolerance on the overlap law 1/(2N).
    #[arg(long, default_value_t = 1e-9)]
    pub tol_overlap: f64,
    /// Tolerance on path-basis components.
    #[arg(long, default_value_t = 1e-9)]
    pub tol_component: f64,
    /// Pointwise tolerance between reduced and full-space trajectories.
    #[arg(long, default_value_t = 1e-9)]
    pub tol_trajectory: f64,
    /// Relative tolerance on S3 = 1 - N + 2 S1.
    #[arg(long, default_value_t = 1e-9)]
    pub tol_identity: f64,
    /// Tolerance on Szegedy isometries and A^T B = M^k.
    #[arg(long, default_value_t = 1e-10)]
    pub tol_discriminant: f64,
    /// Slack below 1 - 1/e allowed for powered spectral gaps.
    #[arg(long, default_value_t = 0.05)]
    pub tol_gap: f64,
}

#[derive(Args, Debug, Default)]
pub struct GridArgs {
    /// Torus sides L, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Step counts t, comma separated. One value implies --t-schedule fixed,
    /// several imply sweep.
    #[arg(long = "t", value_delimiter = ',')]
    pub t: Option<Vec<u32>>,
    /// How t is chosen per size: fixed, log-n (nearest odd integer to c ln N)
    /// or sweep.
    #[arg(long, value_enum)]
    pub t_schedule: Option<ScheduleArg>,
    /// The constant c of the log-n schedule.
    #[arg(long, default_value_t = 1.0)]
    pub log_c: f64,
    /// Marked vertex index y*L + x.
    #[arg(long, default_value_t = 0)]
    pub marked: usize,
    /// Dense full-space dimension budget for verify-spectrum.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Reduced-model dimension budget for the dense alpha cross-check.
    #[arg(long)]
    pub reduced_budget: Option<usize>,
    #[command(flatten)]
    pub tol: TolArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Default)]
pub struct AmpArgs {
    /// Iteration rounding: floor or nearest of pi/(2 alpha).
    #[arg(long, default_value = "floor")]
    pub rounding: String,
    /// Constant c in the amplification round count ceil(c/sqrt(p_s)).
    #[arg(long, default_value_t = 1.0)]
    pub amp_c: f64,
    /// Amplify only when p_s is below this.
    #[arg(long)]
    pub amp_threshold: Option<f64>,
    /// Write per-iteration success probabilities (columns L,t,q,p) here.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct SearchArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub amp: AmpArgs,
}

#[derive(Args, Debug, Default)]
pub struct TulsiArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub amp: AmpArgs,
    /// Fixed ancilla angle delta in [0, pi/2).
    #[arg(long, conflicts_with = "delta_policy")]
    pub delta: Option<f64>,
    /// Angle policy: original_tulsi (t = 1, tan^2 = ln N), balanced
    /// (tan^2 = ln N / t) or optimal_QO (tan^2 = clamp(ln N / t - 1, 0, 1)).
    #[arg(long)]
    pub delta_policy: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct SzegedyArgs {
    /// Chain: cycle:N, complete:N, lazy-cycle:N:p, lazy-complete:N:p,
    /// random:N, or a CSV file with an N x N matrix. Repeatable.
    #[arg(long = "chain")]
    pub chains: Vec<String>,
    /// Append this many random:N chains, N from --chain-size.
    #[arg(long, default_value_t = 0)]
    pub random_chains: usize,
    /// Sizes for --random-chains, cycled.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    pub chain_size: Vec<usize>,
    /// Walk steps k, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<u32>>,
    /// Cost Q of one state-preparation map.
    #[arg(long, default_value_t = 1)]
    pub queries: u64,
    /// Register dimension budget N^(k+1).
    #[arg(long)]
    pub budget: Option<usize>,
    #[command(flatten)]
    pub tol: TolArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Default)]
pub struct GapArgs {
    /// Spectral gaps g of G, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub gaps: Option<Vec<f64>>,
    /// Powers t; default ceil(1/g) for each g.
    #[arg(long = "t", value_delimiter = ',')]
    pub t: Option<Vec<u32>>,
    #[command(flatten)]
    pub tol: TolArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn apply_tol(cfg: &mut ExperimentConfig, tol: &TolArgs) {
    let t = &mut cfg.tolerances;
    t.phase = tol.tol_phase;
    t.projection = tol.tol_projection;
    t.overlap = tol.tol_overlap;
    t.component = tol.tol_component;
    t.trajectory = tol.tol_trajectory;
    t.identity = tol.tol_identity;
    t.discriminant = tol.tol_discriminant;
    t.gap = tol.tol_gap;
}

fn path_string(p: &Option<PathBuf>) -> Option<String> {
    p.as_ref().map(|p| p.to_string_lossy().into_owned())
}

fn apply_output(cfg: &mut ExperimentConfig, out: &OutputArgs) {
    if let Some(f) = out.format {
        cfg.output.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
    }
    cfg.output.path = path_string(&out.out);
    cfg.output.summary = path_string(&out.summary);
    if let Some(s) = out.seed {
        cfg.seed = s;
    }
}

fn schedule(
    ts: &Option<Vec<u32>>,
    kind: Option<ScheduleArg>,
    c: f64,
    default: &TSchedule,
) -> anyhow::Result<TSchedule> {
    Ok(match (kind, ts) {
        (Some(ScheduleArg::LogN), _) => TSchedule::LogN { c },
        (Some(ScheduleArg::Fixed), Some(ts)) => match ts.as_slice() {
            [t] => TSchedule::Fixed { t: *t },
            _ => bail!("--t-schedule fixed takes exactly one --t value"),
        },
        (Some(ScheduleArg::Sweep), Some(ts)) => TSchedule::Sweep { ts: ts.clone() },
        (Some(k), None) => bail!("--t-schedule {k:?} needs --t"),
        (None, Some(ts)) if ts.len() == 1 => TSchedule::Fixed { t: ts[0] },
        (None, Some(ts)) => TSchedule::Sweep { ts: ts.clone() },
        (None, None) => match default {
            TSchedule::LogN { .. } => TSchedule::LogN { c },
            other => other.clone(),
        },
    })
}

fn apply_grid(cfg: &mut ExperimentConfig, g: &GridArgs) -> anyhow::Result<()> {
    if let Some(s) = &g.sizes {
        cfg.sizes = s.clone();
    }
    cfg.t_schedule = schedule(&g.t, g.t_schedule, g.log_c, &cfg.t_schedule)?;
    cfg.marked = g.marked;
    if let Some(b) = g.budget {
        cfg.budgets.dense = b;
    }
    if let Some(b) = g.reduced_budget {
        cfg.budgets.reduced = b;
    }
    apply_tol(cfg, &g.tol);
    apply_output(cfg, &g.output);
    Ok(())
}

fn apply_amp(cfg: &mut ExperimentConfig, a: &AmpArgs) {
    cfg.search.rounding = a.rounding.clone();
    cfg.search.amplification_c = a.amp_c;
    if let Some(th) = a.amp_threshold {
        cfg.search.amplification_threshold = th;
    }
    cfg.output.trajectory = path_string(&a.trajectory);
}

impl Sub {
    fn output_args(&self) -> &OutputArgs {
        match self {
            Sub::VerifySpectrum(g) | Sub::Sums(g) => &g.output,
            Sub::Search(s) => &s.grid.output,
            Sub::Tulsi(s) => &s.grid.output,
            Sub::Szegedy(s) => &s.output,
            Sub::Gap(s) => &s.output,
        }
    }

    pub fn config(&self) -> anyhow::Result<ExperimentConfig> {
        if let Some(path) = &self.output_args().config {
            let cfg = ExperimentConfig::load(path)?;
            let expected = self.command();
            if cfg.command != expected {
                bail!(
                    "{} configures command {:?}, not {:?}",
                    path.display(),
                    cfg.command.name(),
                    expected.name()
                );
            }
            return Ok(cfg);
        }
        let mut cfg = ExperimentConfig::defaults(self.command());
        match self {
            Sub::VerifySpectrum(g) | Sub::Sums(g) => apply_grid(&mut cfg, g)?,
            Sub::Search(s) => {
                apply_grid(&mut cfg, &s.grid)?;
                apply_amp(&mut cfg, &s.amp);
            }
            Sub::Tulsi(s) => {
                apply_grid(&mut cfg, &s.grid)?;
                apply_amp(&mut cfg, &s.amp);
                if let Some(d) = s.delta {
                    cfg.delta = DeltaChoice::Fixed { delta: d };
                } else if let Some(p) = &s.delta_policy {
                    cfg.delta = DeltaChoice::Policy { policy: p.clone() };
                }
            }
            Sub::Szegedy(s) => {
                if !s.chains.is_empty() || s.random_chains > 0 {
                    cfg.szegedy.chains = s.chains.clone();
                }
                if s.random_chains > 0 && s.chain_size.is_empty() {
                    bail!("--chain-size is empty");
                }
                for i in 0..s.random_chains {
                    cfg.szegedy
                        .chains
                        .push(format!("random:{}", s.chain_size[i % s.chain_size.len()]));
                }
                if let Some(k) = &s.k {
                    cfg.szegedy.ks = k.clone();
                }
                cfg.szegedy.queries = s.queries;
                if let Some(b) = s.budget {
                    cfg.budgets.register = b;
                }
                apply_tol(&mut cfg, &s.tol);
                apply_output(&mut cfg, &s.output);
            }
            Sub::Gap(s) => {
                if let Some(g) = &s.gaps {
                    cfg.gaps = g.clone();
                }
                cfg.t_schedule = match s.t.as_deref() {
                    None => TSchedule::InverseGap,
                    Some([t]) => TSchedule::Fixed { t: *t },
                    Some(ts) => TSchedule::Sweep { ts: ts.to_vec() },
                };
                apply_tol(&mut cfg, &s.tol);
                apply_output(&mut cfg, &s.output);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn command(&self) -> Command {
        match self {
            Sub::VerifySpectrum(_) => Command::VerifySpectrum,
            Sub::Search(_) => Command::Search,
            Sub::Tulsi(_) => Command::Tulsi,
            Sub::Sums(_) => Command::Sums,
            Sub::Szegedy(_) => Command::Szegedy,
            Sub::Gap(_) => Command::Gap,
        }
    }
}

/// The clap command with each subcommand's output columns in its help.
pub fn command() -> clap::Command {
    let mut cmd = Cli::command();
    for c in [
        Command::VerifySpectrum,
        Command::Search,
        Command::Tulsi,
        Command::Sums,
        Command::Szegedy,
        Command::Gap,
    ] {
        let mut help = columns_help(columns(c));
        if matches!(c, Command::Search | Command::Tulsi) {
            help.push_str("\nWith --trajectory:\n");
            help.push_str(&columns_help(TRAJECTORY_COLUMNS));
        }
        cmd = cmd.mut_subcommand(c.name(), |s| s.after_help(help));
    }
    cmd
}

fn open_output(path: &Option<String>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {p}"))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn write_table(table: &Table, format: Format, path: &Option<String>) -> anyhow::Result<()> {
    let mut out = open_output(path)?;
    match format {
        Format::Csv => table.write_csv(&mut out),
        Format::Json => table.write_json(&mut out),
    }
    .with_context(|| format!("writing {}", path.as_deref().unwrap_or("standard output")))?;
    out.flush()?;
    Ok(())
}

pub fn write_outcome(cfg: &ExperimentConfig, outcome: &Outcome, log: &mut dyn Write) -> anyhow::Result<()> {
    if let Some(table) = &outcome.table {
        write_table(table, cfg.output.format, &cfg.output.path)?;
    }
    if let (Some(path), Some(table)) = (&cfg.output.trajectory, &outcome.trajectories) {
        write_table(table, cfg.output.format, &Some(path.clone()))?;
    }
    if let Some(report) = &outcome.report {
        write!(log, "{report}")?;
        if let Some(path) = &cfg.output.summary {
            let text = serde_json::to_string_pretty(report)?;
            std::fs::write(Path::new(path), text + "\n").with_context(|| format!("writing {path}"))?;
        }
    }
    for w in &outcome.warnings {
        writeln!(log, "warning: {w}")?;
    }
    for c in &outcome.checks {
        writeln!(
            log,
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        )?;
    }
    Ok(())
}

/// Parses arguments, runs, writes outputs; returns the exit code.
pub fn main_with_args(args: Vec<String>) -> i32 {
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return EXIT_USAGE;
        }
    };
    let cfg = match cli.command.config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_USAGE;
        }
    };
    if cli.command.output_args().print_config {
        println!("{}", cfg.canonical_json());
        return EXIT_OK;
    }
    let outcome = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_USAGE;
        }
    };
    let mut log = io::stderr();
    if let Err(e) = write_outcome(&cfg, &outcome, &mut log) {
        eprintln!("error: {e:#}");
        return EXIT_USAGE;
    }
    if outcome.all_passed() {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(args: &[&str]) -> anyhow::Result<ExperimentConfig> {
        let mut v = vec!["powerwalk"];
        v.extend_from_slice(args);
        let m = command().try_get_matches_from(v)?;
        Cli::from_arg_matches(&m)?.command.config()
    }

    #[test]
    fn schedule_inference() {
        let c = cfg(&["search", "--t", "3"]).unwrap();
        assert_eq!(c.t_schedule, TSchedule::Fixed { t: 3 });
        let c = cfg(&["search", "--t", "1,3"]).unwrap();
        assert_eq!(c.t_schedule, TSchedule::Sweep { ts: vec![1, 3] });
        let c = cfg(&["search", "--t-schedule", "log-n", "--log-c", "0.5"]).unwrap();
        assert_eq!(c.t_schedule, TSchedule::LogN { c: 0.5 });
        assert!(cfg(&["search", "--t-schedule", "fixed", "--t", "1,3"]).is_err());
        assert!(cfg(&["search", "--t-schedule", "sweep"]).is_err());
    }

    #[test]
    fn tulsi_flags() {
        let c = cfg(&["tulsi", "--delta", "0.3"]).unwrap();
        assert_eq!(c.delta, DeltaChoice::Fixed { delta: 0.3 });
        let c = cfg(&["tulsi", "--delta-policy", "optimal_QO", "--t", "5"]).unwrap();
        assert_eq!(
            c.delta,
            DeltaChoice::Policy {
                policy: "optimal_QO".into()
            }
        );
        assert!(cfg(&["tulsi", "--delta-policy", "greedy"]).is_err());
        assert!(cfg(&["tulsi", "--delta", "2.0"]).is_err());
    }

    #[test]
    fn szegedy_random_chains_cycle_sizes() {
        let c = cfg(&[
            "szegedy",
            "--chain",
            "cycle:3",
            "--random-chains",
            "4",
            "--chain-size",
            "2,3",
        ])
        .unwrap();
        assert_eq!(
            c.szegedy.chains,
            ["cycle:3", "random:2", "random:3", "random:2", "random:3"]
        );
    }

    #[test]
    fn help_documents_every_column() {
        for c in [
            Command::VerifySpectrum,
            Command::Search,
            Command::Tulsi,
            Command::Sums,
            Command::Szegedy,
            Command::Gap,
        ] {
            let mut cmd = command();
            let help = cmd.find_subcommand_mut(c.name()).unwrap().render_help().to_string();
            for (name, _) in columns(c) {
                assert!(help.contains(&format!("  {name} ")), "{} help lacks {name}", c.name());
            }
        }
    }

    #[test]
    fn tolerances_are_flags() {
        let c = cfg(&["sums", "--tol-identity", "1e-6"]).unwrap();
        assert_eq!(c.tolerances.identity, 1e-6);
    }
}
