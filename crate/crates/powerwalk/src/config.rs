use anyhow::{bail, ensure, Context};
use powerwalk_core::search::{log_schedule, Rounding, DEFAULT_AMPLIFICATION_THRESHOLD, DEFAULT_REDUCED_BUDGET};
use powerwalk_core::szegedy::DEFAULT_REGISTER_BUDGET;
use powerwalk_core::tulsi::DeltaPolicy;
use powerwalk_core::walk::DEFAULT_DENSE_BUDGET;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifySpectrum,
    Search,
    Tulsi,
    Sums,
    Szegedy,
    Gap,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifySpectrum => "verify-spectrum",
            Command::Search => "search",
            Command::Tulsi => "tulsi",
            Command::Sums => "sums",
            Command::Szegedy => "szegedy",
            Command::Gap => "gap",
        }
    }
}

/// How the step count `t` is chosen for each grid size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TSchedule {
    Fixed {
        t: u32,
    },
    /// `t = nearest odd integer to c·ln N`.
    LogN {
        c: f64,
    },
    Sweep {
        ts: Vec<u32>,
    },
    /// `t = ⌈1/g⌉`; only meaningful for the `gap` command.
    InverseGap,
}

impl TSchedule {
    pub fn steps(&self, side: usize) -> Vec<u32> {
        match self {
            TSchedule::Fixed { t } => vec![*t],
            TSchedule::LogN { c } => vec![log_schedule(side * side, *c)],
            TSchedule::Sweep { ts } => ts.clone(),
            TSchedule::InverseGap => Vec::new(),
        }
    }

    /// Step counts for spectral gap `g` in the `gap` command.
    pub fn gap_steps(&self, g: f64) -> Vec<u32> {
        match self {
            TSchedule::Fixed { t } => vec![*t],
            TSchedule::Sweep { ts } => ts.clone(),
            TSchedule::LogN { .. } | TSchedule::InverseGap => vec![(1.0 / g).ceil() as u32],
        }
    }

    /// Label of the scaling series a `(side, t)` instance belongs to.
    pub fn series_label(&self, t: u32) -> String {
        match self {
            TSchedule::LogN { c } => format!("t=nearest-odd({c}*ln N)"),
            _ => format!("t={t}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DeltaChoice {
    None,
    Fixed { delta: f64 },
    Policy { policy: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub path: Option<String>,
    pub format: Format,
    pub summary: Option<String>,
    pub trajectory: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    /// Full-space dimension `N·4ᵗ` allowed for dense eigendecomposition.
    pub dense: usize,
    /// Reduced-model dimension allowed for the dense alpha cross-check.
    pub reduced: usize,
    /// Szegedy register dimension `N^{k+1}`.
    pub register: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            dense: DEFAULT_DENSE_BUDGET,
            reduced: DEFAULT_REDUCED_BUDGET,
            register: DEFAULT_REGISTER_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub phase: f64,
    pub projection: f64,
    pub overlap: f64,
    pub component: f64,
    pub trajectory: f64,
    pub identity: f64,
    pub discriminant: f64,
    pub gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            phase: 1e-9,
            projection: 1e-9,
            overlap: 1e-9,
            component: 1e-9,
            trajectory: 1e-9,
            identity: 1e-9,
            discriminant: 1e-10,
            gap: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSettings {
    pub rounding: String,
    pub amplification_c: f64,
    pub amplification_threshold: f64,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            rounding: "floor".into(),
            amplification_c: 1.0,
            amplification_threshold: DEFAULT_AMPLIFICATION_THRESHOLD,
        }
    }
}

impl SearchSettings {
    pub fn rounding(&self) -> anyhow::Result<Rounding> {
        match self.rounding.as_str() {
            "floor" => Ok(Rounding::Floor),
            "nearest" => Ok(Rounding::Nearest),
            other => bail!("unknown rounding {other:?} (expected floor or nearest)"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SzegedySettings {
    /// Chain specs: a generator name (`cycle:N`, `complete:N`,
    /// `lazy-cycle:N:p`, `lazy-complete:N:p`, `random:N`) or a CSV path.
    pub chains: Vec<String>,
    pub ks: Vec<u32>,
    /// Cost `Q` of one `V₁`/`V₂` application.
    pub queries: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    pub sizes: Vec<usize>,
    pub t_schedule: TSchedule,
    pub delta: DeltaChoice,
    pub marked: usize,
    pub output: Output,
    pub seed: u64,
    pub budgets: Budgets,
    pub tolerances: Tolerances,
    pub search: SearchSettings,
    pub szegedy: SzegedySettings,
    /// Spectral gaps for the `gap` command.
    pub gaps: Vec<f64>,
}

impl ExperimentConfig {
    /// Defaults for `command`, matching the sweeps used by the checks.
    pub fn defaults(command: Command) -> Self {
        let (sizes, t_schedule) = match command {
            Command::VerifySpectrum => (vec![5], TSchedule::Sweep { ts: vec![1, 3] }),
            Command::Search => (vec![17, 33, 65, 129, 257], TSchedule::LogN { c: 1.0 }),
            Command::Tulsi => (vec![17, 33, 65, 129, 257], TSchedule::Fixed { t: 1 }),
            Command::Sums => (vec![8, 16, 32, 64, 128, 256, 512], TSchedule::LogN { c: 1.0 }),
            Command::Szegedy => (Vec::new(), TSchedule::Fixed { t: 1 }),
            Command::Gap => (Vec::new(), TSchedule::InverseGap),
        };
        let delta = match command {
            Command::Tulsi => DeltaChoice::Policy {
                policy: DeltaPolicy::OriginalTulsi.name().into(),
            },
            _ => DeltaChoice::None,
        };
        let szegedy = match command {
            Command::Szegedy => SzegedySettings {
                chains: vec!["cycle:4".into(), "complete:4".into(), "random:4".into()],
                ks: vec![1, 2, 3],
                queries: 1,
            },
            _ => SzegedySettings::default(),
        };
        let gaps = match command {
            Command::Gap => vec![0.5, 0.1, 0.01],
            _ => Vec::new(),
        };
        Self {
            command,
            sizes,
            t_schedule,
            delta,
            marked: 0,
            output: Output {
                path: None,
                format: Format::Csv,
                summary: None,
                trajectory: None,
            },
            seed: 0,
            budgets: Budgets::default(),
            tolerances: Tolerances::default(),
            search: SearchSettings::default(),
            szegedy,
            gaps,
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        match self.command {
            Command::VerifySpectrum | Command::Search | Command::Tulsi | Command::Sums => {
                ensure!(!self.sizes.is_empty(), "--sizes is empty");
                for &l in &self.sizes {
                    ensure!(l >= 2, "grid side must be at least 2, got {l}");
                    ensure!(
                        self.marked < l * l,
                        "marked vertex {} out of range for L = {l}",
                        self.marked
                    );
                }
                match &self.t_schedule {
                    TSchedule::Fixed { t } => ensure!(*t >= 1, "t must be at least 1"),
                    TSchedule::LogN { c } => ensure!(*c > 0.0, "--log-c must be positive"),
                    TSchedule::Sweep { ts } => {
                        ensure!(!ts.is_empty(), "t sweep is empty");
                        ensure!(ts.iter().all(|&t| t >= 1), "t must be at least 1");
                    }
                    TSchedule::InverseGap => bail!("the inverse-gap schedule only applies to the gap command"),
                }
            }
            Command::Szegedy => {
                ensure!(!self.szegedy.chains.is_empty(), "no chains given");
                ensure!(!self.szegedy.ks.is_empty(), "no k values given");
                ensure!(self.szegedy.ks.iter().all(|&k| k >= 1), "k must be at least 1");
            }
            Command::Gap => {
                ensure!(!self.gaps.is_empty(), "--gaps is empty");
                for &g in &self.gaps {
                    ensure!(g > 0.0 && g <= 1.0, "spectral gap {g} outside (0, 1]");
                }
                ensure!(
                    self.t_schedule.gap_steps(1.0).iter().all(|&t| t >= 1),
                    "t must be at least 1"
                );
            }
        }
        self.search.rounding()?;
        ensure!(
            self.search.amplification_c > 0.0,
            "amplification constant must be positive"
        );
        if let DeltaChoice::Fixed { delta } = self.delta {
            ensure!(
                (0.0..std::f64::consts::FRAC_PI_2).contains(&delta),
                "delta = {delta} outside [0, pi/2)"
            );
        }
        if let DeltaChoice::Policy { policy } = &self.delta {
            ensure!(
                DeltaPolicy::from_name(policy).is_some(),
                "unknown delta policy {policy:?} (expected original_tulsi, balanced or optimal_QO)"
            );
        }
        Ok(())
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let cfg: Self = serde_json::from_str(text).context("parsing experiment config")?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    /// `(side, t)` instances in sweep order: sizes as given, then `t`.
    pub fn instances(&self) -> Vec<(usize, u32)> {
        let mut out = Vec::new();
        for &l in &self.sizes {
            for t in self.t_schedule.steps(l) {
                out.push((l, t));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_validate() {
        for c in [
            Command::VerifySpectrum,
            Command::Search,
            Command::Tulsi,
            Command::Sums,
            Command::Szegedy,
            Command::Gap,
        ] {
            ExperimentConfig::defaults(c).validate().unwrap();
        }
    }

    #[test]
    fn log_schedule_instances() {
        let cfg = ExperimentConfig::defaults(Command::Search);
        let ts: Vec<u32> = cfg.instances().iter().map(|x| x.1).collect();
        assert_eq!(ts, vec![5, 7, 9, 9, 11]);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let mut v: serde_json::Value =
            serde_json::from_str(&ExperimentConfig::defaults(Command::Gap).canonical_json()).unwrap();
        v["bogus"] = 1.into();
        assert!(ExperimentConfig::from_json(&v.to_string()).is_err());
    }

    fn schedule() -> impl Strategy<Value = TSchedule> {
        prop_oneof![
            (1u32..20).prop_map(|t| TSchedule::Fixed { t }),
            (0.01f64..4.0).prop_map(|c| TSchedule::LogN { c }),
            proptest::collection::vec(1u32..20, 1..5).prop_map(|ts| TSchedule::Sweep { ts }),
        ]
    }

    proptest! {
        #[test]
        fn canonical_json_round_trips(
            sizes in proptest::collection::vec(2usize..600, 0..6),
            sched in schedule(),
            delta in prop_oneof![
                Just(DeltaChoice::None),
                (0.0f64..1.5).prop_map(|delta| DeltaChoice::Fixed { delta }),
                Just(DeltaChoice::Policy { policy: "optimal_QO".into() }),
            ],
            seed in any::<u64>(),
            tol in 1e-14f64..1e-3,
            json in any::<bool>(),
            out in proptest::option::of("[a-z]{1,8}\\.csv"),
        ) {
            let mut cfg = ExperimentConfig::defaults(Command::Search);
            cfg.sizes = sizes;
            cfg.t_schedule = sched;
            cfg.delta = delta;
            cfg.seed = seed;
            cfg.tolerances.phase = tol;
            cfg.output.format = if json { Format::Json } else { Format::Csv };
            cfg.output.path = out;
            let text = cfg.canonical_json();
            let back = ExperimentConfig::from_json(&text).unwrap();
            prop_assert_eq!(&back, &cfg);
            prop_assert_eq!(back.canonical_json(), text);
        }
    }
}
