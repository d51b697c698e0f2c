use crate::chains::resolve_chain;
use crate::config::{Command, DeltaChoice, ExperimentConfig};
use crate::records::{Column, Record, Table};
use crate::report::{Quantity, ScalingReport};
use anyhow::{bail, Context};
use powerwalk_core::linalg::multiset_distance;
use powerwalk_core::search::{
    alpha_dense, grid_sums, iterate_search, spectral_gap_power, success_probability, SearchOptions, SearchResult,
};
use powerwalk_core::szegedy::query_cost;
use powerwalk_core::tulsi::{build_tulsi, compute_alpha_delta, tulsi_search, tune_delta, DeltaPolicy};
use powerwalk_core::walk::{momentum_resolved, path_component_with_overlaps, PhaseClass};
use powerwalk_core::{MarkovChain, SpectralModel, SzegedyWalk, TorusGrid, WalkOperator, WalkSpectrum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type InstanceRows = (Record, Vec<Check>, Vec<String>);

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: String, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }

    /// `value <= tol`.
    fn within(name: String, value: f64, tol: f64) -> Self {
        Self::new(name, value <= tol, format!("{value:.3e} (tol {tol:.1e})"))
    }
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub table: Option<Table>,
    pub report: Option<ScalingReport>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    /// Long-format success trajectories, when requested.
    pub trajectories: Option<Table>,
}

impl Outcome {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn run(cfg: &ExperimentConfig) -> anyhow::Result<Outcome> {
    cfg.validate()?;
    match cfg.command {
        Command::VerifySpectrum => verify_spectrum(cfg),
        Command::Search => search(cfg),
        Command::Tulsi => tulsi(cfg),
        Command::Sums => sums(cfg),
        Command::Szegedy => szegedy(cfg),
        Command::Gap => gap(cfg),
    }
}

fn vertex_count(l: usize) -> f64 {
    (l * l) as f64
}

fn ln_n(l: usize) -> f64 {
    vertex_count(l).ln()
}

pub const SPECTRUM_COLUMNS: &[Column] = &[
    ("L", "torus side"),
    ("N", "vertex count L^2"),
    ("t", "walk steps per graph query"),
    ("dim", "full-space dimension N*4^t"),
    ("nonreal", "number of non-real eigenphases of W_t"),
    (
        "predicted_nonreal",
        "number of phases +-arccos(cos^t phi_k) over nonzero grid modes",
    ),
    (
        "phase_max_error",
        "multiset distance between measured and predicted non-real phases",
    ),
    (
        "invariant_dim",
        "non-real eigenvectors plus real eigenvectors overlapping the coin states",
    ),
    (
        "expected_invariant_dim",
        "2N-1 for odd L, 2N-2 for even L with odd t, empty otherwise",
    ),
    (
        "projection_max_deviation",
        "max |<v|P|v> - 1/2| over non-real eigenvectors, P the coin-state projector",
    ),
    (
        "overlap_law_max_error",
        "max ||a_m|^2 - 1/(2N)| over momentum eigenvectors and vertices m",
    ),
    (
        "component_max_error",
        "max error of the path-basis component formula over non-real eigenvectors",
    ),
    (
        "trajectory_steps",
        "iterations compared between reduced and full-space search (empty if skipped)",
    ),
    (
        "trajectory_max_error",
        "max pointwise success-probability difference (empty if skipped)",
    ),
    (
        "bipartite",
        "true when L is even and W_t has a -1 eigenvector overlapping the coins",
    ),
];

fn verify_spectrum(cfg: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let instances = cfg.instances();
    let ops = instances
        .iter()
        .map(|&(l, t)| {
            let op = WalkOperator::new(TorusGrid::new(l)?, t)?;
            if op.dim() > cfg.budgets.dense {
                bail!(
                    "L = {l}, t = {t}: full-space dimension {} exceeds the dense budget {}; \
                     raise --budget or choose a smaller instance",
                    op.dim(),
                    cfg.budgets.dense
                );
            }
            Ok(op)
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let tol = &cfg.tolerances;
    let results: Vec<anyhow::Result<InstanceRows>> = ops
        .par_iter()
        .map(|op| {
            let (l, t) = (op.grid().side(), op.steps());
            let n = op.grid().vertex_count();
            let spec = WalkSpectrum::compute(op, cfg.budgets.dense)?;
            let phases = spec.phase_check(op);
            let inv = spec.invariant_subspace_dim(op);
            let expected = if l % 2 == 1 {
                Some(2 * n - 1)
            } else if t % 2 == 1 {
                Some(2 * n - 2)
            } else {
                None
            };
            let proj = spec.max_projection_deviation();
            let flat = 1.0 / (2.0 * n as f64);
            let overlap_err = momentum_resolved(op, &spec)?
                .iter()
                .flat_map(|mv| op.coin_overlaps(mv.vector.as_slice()))
                .map(|a| (a.norm_sqr() - flat).abs())
                .fold(0.0, f64::max);
            let mut component_err: f64 = 0.0;
            for j in spec.indices(PhaseClass::NonReal) {
                let v = spec.vectors.column(j);
                let a = op.coin_overlaps(v.as_slice());
                for start in 0..op.dim() {
                    let pc = path_component_with_overlaps(op, v.as_slice(), &a, spec.phases[j], start);
                    component_err = component_err.max(pc.max_error());
                }
            }
            let bipartite = !spec.touching_vectors(op, PhaseClass::MinusOne).is_empty();
            let mut warnings = Vec::new();
            let (steps, traj_err) = if l % 2 == 0 || t % 2 == 0 {
                warnings.push(format!(
                    "L = {l}, t = {t}: {}; search checks skipped",
                    if l % 2 == 0 {
                        "bipartite grid, -1 eigenvector overlaps the coin states"
                    } else {
                        "even t"
                    }
                ));
                (None, None)
            } else {
                let model = SpectralModel::torus(op.grid(), t, cfg.marked)?;
                let r = success_probability(&model, &SearchOptions::default())?;
                let q = 3 * r.q as usize;
                let reduced = iterate_search(&model, q);
                let full = op.search_trajectory(cfg.marked, q)?;
                let err = reduced
                    .iter()
                    .zip(&full)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                (Some(q), Some(err))
            };

            let tag = format!("L={l} t={t}");
            let mut checks = vec![
                Check::new(
                    format!("{tag} non-real eigenphases"),
                    phases.passes(tol.phase),
                    format!(
                        "{} measured, {} predicted, max error {:.3e} (tol {:.1e})",
                        phases.measured, phases.predicted, phases.max_error, tol.phase
                    ),
                ),
                Check::within(format!("{tag} projection sum 1/2"), proj, tol.projection),
                Check::within(format!("{tag} overlap law 1/(2N)"), overlap_err, tol.overlap),
                Check::within(format!("{tag} path components"), component_err, tol.component),
            ];
            if let Some(e) = expected {
                checks.push(Check::new(
                    format!("{tag} invariant subspace dimension"),
                    inv == e,
                    format!("{inv} (expected {e})"),
                ));
            }
            if let Some(err) = traj_err {
                checks.push(Check::within(
                    format!("{tag} reduced vs full trajectory"),
                    err,
                    tol.trajectory,
                ));
            }
            let record = Record::new()
                .with("L", l)
                .with("N", n)
                .with("t", t)
                .with("dim", op.dim())
                .with("nonreal", phases.measured)
                .with("predicted_nonreal", phases.predicted)
                .with("phase_max_error", phases.max_error)
                .with("invariant_dim", inv)
                .with("expected_invariant_dim", expected)
                .with("projection_max_deviation", proj)
                .with("overlap_law_max_error", overlap_err)
                .with("component_max_error", component_err)
                .with("trajectory_steps", steps)
                .with("trajectory_max_error", traj_err)
                .with("bipartite", bipartite);
            Ok((record, checks, warnings))
        })
        .collect();
    let mut out = Outcome {
        table: Some(Table::new(SPECTRUM_COLUMNS)),
        ..Outcome::default()
    };
    for r in results {
        let (record, checks, warnings) = r?;
        out.table.as_mut().unwrap().push(record);
        out.checks.extend(checks);
        out.warnings.extend(warnings);
    }
    Ok(out)
}

fn search_options(cfg: &ExperimentConfig) -> anyhow::Result<SearchOptions> {
    Ok(SearchOptions {
        rounding: cfg.search.rounding()?,
        amplification_c: cfg.search.amplification_c,
        amplification_threshold: cfg.search.amplification_threshold,
        keep_trajectory: cfg.output.trajectory.is_some(),
    })
}

pub const TRAJECTORY_COLUMNS: &[Column] = &[
    ("L", "torus side"),
    ("t", "walk steps per graph query"),
    ("q", "iteration"),
    ("p", "success probability after q iterations"),
];

fn trajectory_table(runs: &[(usize, &SearchResult)]) -> Table {
    let mut table = Table::new(TRAJECTORY_COLUMNS);
    for (l, r) in runs {
        for (q, p) in r.trajectory.iter().flatten().enumerate() {
            table.push(Record::new().with("L", *l).with("t", r.t).with("q", q).with("p", *p));
        }
    }
    table
}

fn torus_model(l: usize, t: u32, marked: usize) -> anyhow::Result<SpectralModel> {
    SpectralModel::torus(&TorusGrid::new(l)?, t, marked)
        .with_context(|| format!("building the search model for L = {l}, t = {t}"))
}

pub const SEARCH_COLUMNS: &[Column] = &[
    ("L", "torus side"),
    ("N", "vertex count L^2"),
    ("t", "walk steps per graph query"),
    (
        "alpha_exact",
        "smallest positive eigenphase of the search operator (secular equation)",
    ),
    (
        "alpha_estimate",
        "a_0 / sqrt(sum a_k^2/a_0^2 / (1 - cos^t phi_k)) over grid modes",
    ),
    (
        "alpha_dense",
        "alpha from a dense eigendecomposition of the reduced operator (empty above --reduced-budget)",
    ),
    (
        "Q",
        "search iterations floor(pi/(2 alpha)) (or nearest, per --rounding)",
    ),
    ("p_s", "success probability after Q iterations"),
    ("p_bound", "cos^2(alpha) ws^2 wt^2"),
    ("ws", "overlap estimate with the start state"),
    ("wt", "overlap estimate with the target"),
    (
        "below_gap",
        "alpha < phi_1/2, with phi_1 the smallest nonzero walk eigenphase",
    ),
    (
        "amplification_rounds",
        "ceil(c/sqrt(p_s)) below the amplification threshold, else 0",
    ),
    ("Q_O", "oracle queries (amplification_rounds + 1) * Q"),
    ("Q_G", "graph queries t * Q_O"),
    ("S1", "sum over nonzero modes of 1/(1 - cos^t phi_k)"),
    ("S2", "sum over nonzero modes of 1/(1 - cos^t phi_k)^2"),
    ("S3", "sum over nonzero modes of cot^2(phi_k^(t)/2)"),
    ("lower", "lower bound (1/t) sum 1/(1 - cos phi_k) on S1"),
    ("upper", "shell upper bound 8 sum_l l/(1 - exp(-4 l^2 t/N)) on S1"),
];

fn ratio(r: &Record, num: &str, den: impl Fn(f64) -> f64) -> Option<f64> {
    Some(r.f64(num)? / den(r.f64("N")?))
}

fn search(cfg: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let opts = search_options(cfg)?;
    let instances = cfg.instances();
    let results: Vec<anyhow::Result<(usize, SearchResult, Record)>> = instances
        .par_iter()
        .map(|&(l, t)| {
            let model = torus_model(l, t, cfg.marked)?;
            let r = success_probability(&model, &opts)?;
            let dense = if model.dim() <= cfg.budgets.reduced {
                Some(alpha_dense(&model, cfg.budgets.reduced)?)
            } else {
                None
            };
            let s = grid_sums(&TorusGrid::new(l)?, t)?;
            let record = Record::new()
                .with("L", l)
                .with("N", l * l)
                .with("t", t)
                .with("alpha_exact", r.alpha_exact)
                .with("alpha_estimate", r.alpha_estimate)
                .with("alpha_dense", dense)
                .with("Q", r.q)
                .with("p_s", r.p_s)
                .with("p_bound", r.p_bound)
                .with("ws", r.ws)
                .with("wt", r.wt)
                .with("below_gap", r.below_gap)
                .with("amplification_rounds", r.amplification_rounds)
                .with("Q_O", r.q_o)
                .with("Q_G", r.q_g)
                .with("S1", s.s1)
                .with("S2", s.s2)
                .with("S3", s.s3)
                .with("lower", s.lower)
                .with("upper", s.upper);
            Ok((l, r, record))
        })
        .collect();
    let mut table = Table::new(SEARCH_COLUMNS);
    let mut runs = Vec::new();
    let mut checks = Vec::new();
    for res in results {
        let (l, r, record) = res?;
        checks.push(Check::new(
            format!("L={l} t={} alpha below half gap", r.t),
            r.below_gap,
            format!("alpha = {:.6e}", r.alpha_exact),
        ));
        if let Some(d) = record.f64("alpha_dense") {
            checks.push(Check::within(
                format!("L={l} t={} secular vs dense alpha", r.t),
                (d - r.alpha_exact).abs(),
                cfg.tolerances.phase,
            ));
        }
        table.push(record);
        runs.push((l, r));
    }
    let report = ScalingReport::build(
        "search",
        &table.records,
        |r| cfg.t_schedule.series_label(r.f64("t").unwrap_or(0.0) as u32),
        &[
            Quantity {
                name: "Q",
                eval: |r| r.f64("Q"),
            },
            Quantity {
                name: "Q_O",
                eval: |r| r.f64("Q_O"),
            },
            Quantity {
                name: "Q_O/ln N",
                eval: |r| ratio(r, "Q_O", f64::ln),
            },
        ],
        &[
            Quantity {
                name: "p_s",
                eval: |r| r.f64("p_s"),
            },
            Quantity {
                name: "Q_O/sqrt(N)",
                eval: |r| ratio(r, "Q_O", f64::sqrt),
            },
            Quantity {
                name: "Q_O/sqrt(N ln N)",
                eval: |r| ratio(r, "Q_O", |n| (n * n.ln()).sqrt()),
            },
            Quantity {
                name: "alpha_exact/alpha_estimate",
                eval: |r| Some(r.f64("alpha_exact")? / r.f64("alpha_estimate")?),
            },
        ],
    );
    let trajectories = cfg
        .output
        .trajectory
        .is_some()
        .then(|| trajectory_table(&runs.iter().map(|(l, r)| (*l, r)).collect::<Vec<_>>()));
    Ok(Outcome {
        table: Some(table),
        report: Some(report),
        checks,
        warnings: Vec::new(),
        trajectories,
    })
}

pub const TULSI_COLUMNS: &[Column] = &[
    ("L", "torus side"),
    ("N", "vertex count L^2"),
    ("t", "walk steps per graph query"),
    ("delta", "ancilla rotation angle"),
    ("tan2_delta", "tan^2(delta)"),
    ("a_pi", "overlap sin(delta) of the added pi-phase mode"),
    (
        "alpha_delta",
        "smallest positive eigenphase of the ancilla-extended search operator",
    ),
    (
        "alpha_delta_estimate",
        "estimate of alpha_delta from the extended spectral model",
    ),
    ("Q_delta", "search iterations floor(pi/(2 alpha_delta))"),
    ("p_s", "success probability after Q_delta iterations"),
    ("p_bound", "cos^2(alpha_delta) ws^2 wt^2"),
    ("ws", "overlap estimate with the start state"),
    ("wt", "overlap estimate with the target"),
    ("below_gap", "alpha_delta < phi_1/2"),
    (
        "amplification_rounds",
        "ceil(c/sqrt(p_s)) below the amplification threshold, else 0",
    ),
    ("Q_O", "oracle queries (amplification_rounds + 1) * Q_delta"),
    ("Q_G", "graph queries t * Q_O"),
];

pub fn resolve_delta(choice: &DeltaChoice, l: usize, t: u32) -> anyhow::Result<f64> {
    Ok(match choice {
        DeltaChoice::None => 0.0,
        DeltaChoice::Fixed { delta } => *delta,
        DeltaChoice::Policy { policy } => {
            let p = DeltaPolicy::from_name(policy).with_context(|| format!("unknown delta policy {policy:?}"))?;
            tune_delta(ln_n(l), t, p).with_context(|| format!("L = {l}, t = {t}"))?
        }
    })
}

fn tulsi(cfg: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let opts = search_options(cfg)?;
    let instances = cfg.instances();
    let results: Vec<anyhow::Result<(usize, SearchResult, Record)>> = instances
        .par_iter()
        .map(|&(l, t)| {
            let base = torus_model(l, t, cfg.marked)?;
            let delta = resolve_delta(&cfg.delta, l, t)?;
            let tm = build_tulsi(&base, delta)?;
            let r = tulsi_search(&tm, &opts)?;
            let record = Record::new()
                .with("L", l)
                .with("N", l * l)
                .with("t", t)
                .with("delta", delta)
                .with("tan2_delta", tm.tan2_delta())
                .with("a_pi", tm.a_pi())
                .with("alpha_delta", r.alpha_exact)
                .with("alpha_delta_estimate", compute_alpha_delta(&tm)?)
                .with("Q_delta", r.q)
                .with("p_s", r.p_s)
                .with("p_bound", r.p_bound)
                .with("ws", r.ws)
                .with("wt", r.wt)
                .with("below_gap", r.below_gap)
                .with("amplification_rounds", r.amplification_rounds)
                .with("Q_O", r.q_o)
                .with("Q_G", r.q_g);
            Ok((l, r, record))
        })
        .collect();
    let mut table = Table::new(TULSI_COLUMNS);
    let mut runs = Vec::new();
    for res in results {
        let (l, r, record) = res?;
        table.push(record);
        runs.push((l, r));
    }
    let report = ScalingReport::build(
        "tulsi",
        &table.records,
        |r| cfg.t_schedule.series_label(r.f64("t").unwrap_or(0.0) as u32),
        &[
            Quantity {
                name: "Q_delta",
                eval: |r| r.f64("Q_delta"),
            },
            Quantity {
                name: "Q_O",
                eval: |r| r.f64("Q_O"),
            },
        ],
        &[
            Quantity {
                name: "p_s",
                eval: |r| r.f64("p_s"),
            },
            Quantity {
                name: "Q_delta/sqrt(N ln N)",
                eval: |r| ratio(r, "Q_delta", |n| (n * n.ln()).sqrt()),
            },
            Quantity {
                name: "Q_O/sqrt(N ln N)",
                eval: |r| ratio(r, "Q_O", |n| (n * n.ln()).sqrt()),
            },
            Quantity {
                name: "Q_O*Q_G/(N ln N)",
                eval: |r| Some(r.f64("Q_O")? * r.f64("Q_G")? / (r.f64("N")? * r.f64("N")?.ln())),
            },
        ],
    );
    let trajectories = cfg
        .output
        .trajectory
        .is_some()
        .then(|| trajectory_table(&runs.iter().map(|(l, r)| (*l, r)).collect::<Vec<_>>()));
    Ok(Outcome {
        table: Some(table),
        report: Some(report),
        checks: Vec::new(),
        warnings: Vec::new(),
        trajectories,
    })
}

pub const SUMS_COLUMNS: &[Column] = &[
    ("L", "torus side"),
    ("N", "vertex count L^2"),
    ("t", "walk steps per graph query"),
    ("S1", "sum over nonzero modes of 1/(1 - cos^t phi_k)"),
    ("S2", "sum over nonzero modes of 1/(1 - cos^t phi_k)^2"),
    ("S3", "sum over nonzero modes of cot^2(phi_k^(t)/2)"),
    ("lower", "(1/t) sum 1/(1 - cos phi_k), lower bound on S1"),
    (
        "upper",
        "8 sum_{l=1}^{floor(L/2)} l/(1 - exp(-4 l^2 t/N)), upper bound on S1",
    ),
    (
        "upper_split",
        "(4N/t) H(l~) + 8/(1 - 1/e) sum_{l>l~} l with l~ = floor(sqrt(N/(4t))), bound on upper",
    ),
    ("S2_lower", "(1/t^2) sum 1/(1 - cos phi_k)^2"),
    ("S2_upper", "8 sum_l l/(1 - exp(-4 l^2 t/N))^2"),
    ("identity_residual", "relative residual of S3 = 1 - N + 2 S1"),
    ("s1_bracketed", "lower <= S1 <= upper <= upper_split"),
    ("s2_bracketed", "S2_lower <= S2 <= S2_upper"),
    ("S1_t_over_NlnN", "S1 * t / (N ln N)"),
];

fn sums(cfg: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let instances = cfg.instances();
    let results: Vec<anyhow::Result<Record>> = instances
        .par_iter()
        .map(|&(l, t)| {
            let s = grid_sums(&TorusGrid::new(l)?, t).with_context(|| format!("L = {l}, t = {t}"))?;
            let n = vertex_count(l);
            Ok(Record::new()
                .with("L", l)
                .with("N", l * l)
                .with("t", t)
                .with("S1", s.s1)
                .with("S2", s.s2)
                .with("S3", s.s3)
                .with("lower", s.lower)
                .with("upper", s.upper)
                .with("upper_split", s.upper_split)
                .with("S2_lower", s.s2_lower)
                .with("S2_upper", s.s2_upper)
                .with("identity_residual", s.identity_residual())
                .with("s1_bracketed", s.s1_bracketed())
                .with("s2_bracketed", s.s2_bracketed())
                .with("S1_t_over_NlnN", s.s1 * t as f64 / (n * n.ln())))
        })
        .collect();
    let mut table = Table::new(SUMS_COLUMNS);
    let mut checks = Vec::new();
    for r in results {
        let r = r?;
        let tag = format!("L={} t={}", r.f64("L").unwrap(), r.f64("t").unwrap());
        checks.push(Check::within(
            format!("{tag} S3 = 1 - N + 2 S1"),
            r.f64("identity_residual").unwrap(),
            cfg.tolerances.identity,
        ));
        checks.push(Check::new(
            format!("{tag} lower <= S1 <= upper"),
            r.get("s1_bracketed") == Some(&true.into()),
            format!(
                "{:.6e} <= {:.6e} <= {:.6e}",
                r.f64("lower").unwrap(),
                r.f64("S1").unwrap(),
                r.f64("upper").unwrap()
            ),
        ));
        table.push(r);
    }
    let report = ScalingReport::build(
        "sums",
        &table.records,
        |r| cfg.t_schedule.series_label(r.f64("t").unwrap_or(0.0) as u32),
        &[Quantity {
            name: "S1",
            eval: |r| r.f64("S1"),
        }],
        &[
            Quantity {
                name: "S1*t/(N ln N)",
                eval: |r| r.f64("S1_t_over_NlnN"),
            },
            Quantity {
                name: "S1/(N ln N)",
                eval: |r| ratio(r, "S1", |n| n * n.ln()),
            },
        ],
    );
    Ok(Outcome {
        table: Some(table),
        report: Some(report),
        checks,
        ..Outcome::default()
    })
}

pub const SZEGEDY_COLUMNS: &[Column] = &[
    ("chain", "chain spec (generator name or CSV path)"),
    ("N", "number of states"),
    ("k", "walk steps per application"),
    ("dim", "register dimension N^(k+1)"),
    ("isometry_error", "max entry of |A^T A - I| and |B^T B - I|"),
    ("discriminant_error", "max entry of |A^T B - M^k|"),
    (
        "phase_distance",
        "multiset distance between nontrivial phases of W_k(M) and W(M^k)",
    ),
    (
        "predicted_distance",
        "multiset distance between nontrivial phases of W_k(M) and +-2 arccos(sigma)",
    ),
    ("nontrivial", "number of nontrivial eigenphases of W_k(M)"),
    ("queries", "cost Q of one state-preparation map"),
    ("query_cost", "queries per application of W_k: 4kQ"),
];

/// Chains resolved in order from a single seeded stream, so `random:N`
/// entries are reproducible.
pub fn resolve_chains(specs: &[String], seed: u64) -> anyhow::Result<Vec<(String, MarkovChain)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    specs.iter().map(|s| resolve_chain(s, &mut rng)).collect()
}

pub fn szegedy_record(label: &str, chain: &MarkovChain, k: u32, queries: u64, budget: usize) -> anyhow::Result<Record> {
    let wk = SzegedyWalk::new(chain, k, budget).with_context(|| format!("chain {label}, k = {k}"))?;
    let w1 = SzegedyWalk::new(&chain.powered(k)?, 1, budget)?;
    let disc = (wk.discriminant() - chain.power(k)).amax();
    let phases = wk.nontrivial_phases();
    Ok(Record::new()
        .with("chain", label)
        .with("N", chain.size())
        .with("k", k)
        .with("dim", wk.dim())
        .with("isometry_error", wk.isometry_error())
        .with("discriminant_error", disc)
        .with("phase_distance", multiset_distance(&phases, &w1.nontrivial_phases()))
        .with(
            "predicted_distance",
            multiset_distance(&phases, &wk.predicted_nontrivial_phases()),
        )
        .with("nontrivial", phases.len())
        .with("queries", queries)
        .with("query_cost", wk.query_cost(queries)))
}

fn szegedy(cfg: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let chains = resolve_chains(&cfg.szegedy.chains, cfg.seed)?;
    let jobs: Vec<(usize, u32)> = (0..chains.len())
        .flat_map(|c| cfg.szegedy.ks.iter().map(move |&k| (c, k)))
        .collect();
    let q = cfg.szegedy.queries;
    let results: Vec<anyhow::Result<Record>> = jobs
        .par_iter()
        .map(|&(c, k)| szegedy_record(&chains[c].0, &chains[c].1, k, q, cfg.budgets.register))
        .collect();
    let tol = &cfg.tolerances;
    let mut table = Table::new(SZEGEDY_COLUMNS);
    let mut checks = Vec::new();
    for (r, &(c, k)) in results.into_iter().zip(&jobs) {
        let r = r?;
        let tag = format!("{} k={k}", chains[c].0);
        checks.push(Check::within(
            format!("{tag} isometries"),
            r.f64("isometry_error").unwrap(),
            tol.discriminant,
        ));
        checks.push(Check::within(
            format!("{tag} A^T B = M^k"),
            r.f64("discriminant_error").unwrap(),
            tol.discriminant,
        ));
        checks.push(Check::within(
            format!("{tag} phases of W_k(M) vs W(M^k)"),
            r.f64("phase_distance").unwrap(),
            tol.phase,
        ));
        checks.push(Check::within(
            format!("{tag} phases vs 2 arccos(sigma)"),
            r.f64("predicted_distance").unwrap(),
            tol.phase,
        ));
        let cost = r.f64("query_cost").unwrap() as u64;
        let expected = query_cost(k, q)?;
        checks.push(Check::new(
            format!("{tag} query count 4kQ"),
            cost == expected,
            format!("{cost} (expected {expected})"),
        ));
        table.push(r);
    }
    Ok(Outcome {
        table: Some(table),
        checks,
        ..Outcome::default()
    })
}

pub const GAP_COLUMNS: &[Column] = &[
    ("g", "spectral gap of G"),
    ("t", "number of powers"),
    ("g_t", "spectral gap of G^t: 1 - (1 - g)^t"),
    ("floor", "1 - 1/e - tol_gap, required of g_t when t = ceil(1/g)"),
    ("checked", "true when t = ceil(1/g)"),
];

fn gap(cfg: &ExperimentConfig) -> anyhow::Result<Outcome> {
    let floor = 1.0 - (-1.0f64).exp() - cfg.tolerances.gap;
    let mut table = Table::new(GAP_COLUMNS);
    let mut checks = Vec::new();
    for &g in &cfg.gaps {
        for t in cfg.t_schedule.gap_steps(g) {
            let gt = spectral_gap_power(g, t)?;
            let checked = t == (1.0 / g).ceil() as u32;
            if checked {
                checks.push(Check::new(
                    format!("g={g} t={t} powered gap"),
                    gt >= floor,
                    format!("{gt:.6} (floor {floor:.6})"),
                ));
            }
            table.push(
                Record::new()
                    .with("g", g)
                    .with("t", t)
                    .with("g_t", gt)
                    .with("floor", floor)
                    .with("checked", checked),
            );
        }
    }
    Ok(Outcome {
        table: Some(table),
        checks,
        ..Outcome::default()
    })
}

pub fn columns(command: Command) -> &'static [Column] {
    match command {
        Command::VerifySpectrum => SPECTRUM_COLUMNS,
        Command::Search => SEARCH_COLUMNS,
        Command::Tulsi => TULSI_COLUMNS,
        Command::Sums => SUMS_COLUMNS,
        Command::Szegedy => SZEGEDY_COLUMNS,
        Command::Gap => GAP_COLUMNS,
    }
}
