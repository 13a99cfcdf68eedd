//! Runs learners on a prepared loss stream and writes CSV, traces, summary
//! and an optional SVG plot.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use maler_core::universal::{build_learner, RegretDiagnostics};
use maler_core::{
    CurvatureClass, DecisionSet, Execution, Learner, LearnerKind, LossOracle, ProblemParams,
    RoundRecord,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certify::{certify, CertificateReport};
use crate::comparator::{offline_comparator, Comparator};
use crate::error::{Error, Result};
use crate::libsvm::read_libsvm;
use crate::plot::render_svg;
use crate::tasks::{ClassificationConfig, ClassificationTask, RegressionConfig, RegressionTask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Regression,
    Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub task: TaskKind,
    pub algos: Vec<LearnerKind>,
    pub rounds: usize,
    pub dim: usize,
    pub batch: usize,
    pub lambda: f64,
    pub noise_std: f64,
    pub seed: u64,
    pub data: Option<PathBuf>,
    pub radius: f64,
    pub out: Option<PathBuf>,
    pub svg: bool,
}

impl ExperimentConfig {
    pub fn regression() -> Self {
        let r = RegressionConfig::default();
        Self {
            task: TaskKind::Regression,
            algos: LearnerKind::ALL.to_vec(),
            rounds: r.rounds,
            dim: r.dim,
            batch: r.batch,
            lambda: r.lambda,
            noise_std: r.noise_std,
            seed: 0,
            data: None,
            radius: r.radius,
            out: None,
            svg: false,
        }
    }

    pub fn classification(data: PathBuf) -> Self {
        let c = ClassificationConfig::default();
        Self {
            task: TaskKind::Classification,
            algos: vec![
                LearnerKind::Maler,
                LearnerKind::MetaGrad,
                LearnerKind::OgdConvex,
                LearnerKind::Ons,
            ],
            rounds: c.rounds,
            batch: c.batch,
            radius: c.radius,
            data: Some(data),
            ..Self::regression()
        }
    }
}

/// A loss stream together with everything a run needs.
pub struct Prepared {
    pub task: String,
    pub seed: u64,
    pub params: ProblemParams,
    pub set: Arc<DecisionSet>,
    pub curvature: CurvatureClass,
    pub losses: Vec<Box<dyn LossOracle>>,
    pub comparator: Comparator,
}

impl Prepared {
    pub fn new(
        task: impl Into<String>,
        seed: u64,
        params: ProblemParams,
        set: Arc<DecisionSet>,
        curvature: CurvatureClass,
        losses: Vec<Box<dyn LossOracle>>,
    ) -> Result<Self> {
        params.check_set(&set)?;
        if losses.len() != params.horizon() {
            return Err(Error::Config(format!(
                "{} losses for horizon {}",
                losses.len(),
                params.horizon()
            )));
        }
        let comparator = offline_comparator(&losses, &set, Execution::default())?;
        Ok(Self {
            task: task.into(),
            seed,
            params,
            set,
            curvature,
            losses,
            comparator,
        })
    }
}

/// Builds the stream described by `config`.
pub fn prepare(config: &ExperimentConfig) -> Result<Prepared> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    match config.task {
        TaskKind::Regression => {
            let rc = RegressionConfig {
                rounds: config.rounds,
                dim: config.dim,
                batch: config.batch,
                lambda: config.lambda,
                noise_std: config.noise_std,
                radius: config.radius,
                ..RegressionConfig::default()
            };
            let task = RegressionTask::generate(&rc, &mut rng)?;
            let set = Arc::new(task.set);
            let params = ProblemParams::for_set(config.rounds, task.grad_bound, &set)?;
            let curvature = task.losses[0].curvature();
            let losses = task
                .losses
                .into_iter()
                .map(|l| Box::new(l) as Box<dyn LossOracle>)
                .collect();
            Prepared::new("regression", config.seed, params, set, curvature, losses)
        }
        TaskKind::Classification => {
            let path = config.data.as_ref().ok_or_else(|| {
                Error::Config("classification needs a LIBSVM file (--data)".into())
            })?;
            let rows = read_libsvm(path)?;
            let cc = ClassificationConfig {
                rounds: config.rounds,
                batch: config.batch,
                radius: config.radius,
            };
            let task = ClassificationTask::build(rows, &cc, &mut rng)?;
            let set = Arc::new(task.set);
            let params = ProblemParams::for_set(config.rounds, task.grad_bound, &set)?;
            let curvature = CurvatureClass::ExpConcave { alpha: task.alpha };
            let losses = task
                .losses
                .into_iter()
                .map(|l| Box::new(l) as Box<dyn LossOracle>)
                .collect();
            Prepared::new(
                "classification",
                config.seed,
                params,
                set,
                curvature,
                losses,
            )
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub algo: LearnerKind,
    pub task: String,
    pub seed: u64,
    pub params: ProblemParams,
    pub set: DecisionSet,
    pub curvature: CurvatureClass,
    pub comparator: Comparator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRound {
    #[serde(flatten)]
    pub record: RoundRecord,
    /// `f_t(x_t)`.
    pub loss: f64,
    /// `f_t(x_*)`.
    pub comparator_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub header: TraceHeader,
    pub rounds: Vec<TraceRound>,
}

impl Trace {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// Per-round curve recomputed from the stored rounds.
    pub fn curve(&self) -> Vec<CurvePoint> {
        let comparator = self.header.comparator.vector();
        let g = self.header.params.grad_bound();
        let mut diag = RegretDiagnostics::default();
        self.rounds
            .iter()
            .map(|r| {
                diag.accumulate(
                    g,
                    &r.record.play_vector(),
                    &r.record.gradient_vector(),
                    &comparator,
                    r.loss - r.comparator_loss,
                );
                CurvePoint {
                    round: r.record.round,
                    cum_regret: diag.regret,
                    v_s: diag.v_s,
                    v_ell: diag.v_ell,
                    log_phi: r.record.meta.as_ref().map(|m| m.log_potential),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub round: usize,
    pub cum_regret: f64,
    pub v_s: f64,
    pub v_ell: f64,
    pub log_phi: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct AlgoRun {
    pub trace: Trace,
    pub curve: Vec<CurvePoint>,
}

impl AlgoRun {
    pub fn algo(&self) -> LearnerKind {
        self.trace.header.algo
    }

    pub fn final_regret(&self) -> f64 {
        self.curve.last().map_or(0.0, |c| c.cum_regret)
    }
}

/// Plays `learner` against every loss of the stream.
pub fn run_learner(
    learner: &mut dyn Learner,
    algo: LearnerKind,
    prepared: &Prepared,
) -> Result<AlgoRun> {
    let comparator = prepared.comparator.vector();
    let mut rounds = Vec::with_capacity(prepared.losses.len());
    for loss in &prepared.losses {
        let x = learner.predict()?;
        let g = loss.gradient(&x);
        let record = learner.observe(&g)?;
        rounds.push(TraceRound {
            loss: loss.value(&x),
            comparator_loss: loss.value(&comparator),
            record,
        });
    }
    let trace = Trace {
        header: TraceHeader {
            algo,
            task: prepared.task.clone(),
            seed: prepared.seed,
            params: prepared.params,
            set: (*prepared.set).clone(),
            curvature: prepared.curvature,
            comparator: prepared.comparator.clone(),
        },
        rounds,
    };
    Ok(AlgoRun {
        curve: trace.curve(),
        trace,
    })
}

pub fn run_algorithm(
    prepared: &Prepared,
    algo: LearnerKind,
    execution: Execution,
) -> Result<AlgoRun> {
    let mut learner = build_learner(
        algo,
        &prepared.params,
        prepared.set.clone(),
        prepared.curvature,
        execution,
    )?;
    run_learner(learner.as_mut(), algo, prepared)
}

/// Runs every algorithm as an independent cell; cells run in parallel when
/// `execution` allows, each one sequential inside.
pub fn run_cells(
    prepared: &Prepared,
    algos: &[LearnerKind],
    execution: Execution,
) -> Result<Vec<AlgoRun>> {
    let inner = if execution.is_parallel() {
        Execution::Sequential
    } else {
        execution
    };
    execution
        .map(algos, |&a| run_algorithm(prepared, a, inner))
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgoSummary {
    pub algo: LearnerKind,
    pub final_regret: f64,
    pub v_s: f64,
    pub v_ell: f64,
    pub certificates: CertificateReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub params: ProblemParams,
    pub curvature: CurvatureClass,
    pub comparator: Comparator,
    pub algos: Vec<AlgoSummary>,
}

pub struct Outcome {
    pub runs: Vec<AlgoRun>,
    pub summary: Summary,
}

pub fn run_experiment(config: &ExperimentConfig, execution: Execution) -> Result<Outcome> {
    if config.algos.is_empty() {
        return Err(Error::Config("no algorithms selected".into()));
    }
    let prepared = prepare(config)?;
    let runs = run_cells(&prepared, &config.algos, execution)?;
    let algos = runs
        .iter()
        .map(|r| {
            let last = r.curve.last().copied();
            Ok(AlgoSummary {
                algo: r.algo(),
                final_regret: r.final_regret(),
                v_s: last.map_or(0.0, |c| c.v_s),
                v_ell: last.map_or(0.0, |c| c.v_ell),
                certificates: certify(&r.trace, execution)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = Summary {
        config: config.clone(),
        params: prepared.params,
        curvature: prepared.curvature,
        comparator: prepared.comparator.clone(),
        algos,
    };
    let outcome = Outcome { runs, summary };
    if let Some(dir) = &config.out {
        write_outputs(dir, &outcome, config.svg)?;
    }
    Ok(outcome)
}

pub const CSV_HEADER: [&str; 6] = ["round", "algo", "cum_regret", "V_s", "V_ell", "log_phi"];

pub fn write_csv(path: &Path, runs: &[AlgoRun]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for run in runs {
        for c in &run.curve {
            w.write_record([
                c.round.to_string(),
                run.algo().name().to_string(),
                c.cum_regret.to_string(),
                c.v_s.to_string(),
                c.v_ell.to_string(),
                c.log_phi.map(|v| v.to_string()).unwrap_or_default(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn trace_path(dir: &Path, algo: LearnerKind) -> PathBuf {
    dir.join(format!("trace_{}.json", algo.name()))
}

fn write_outputs(dir: &Path, outcome: &Outcome, svg: bool) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_csv(&dir.join("regret.csv"), &outcome.runs)?;
    for run in &outcome.runs {
        run.trace.write(&trace_path(dir, run.algo()))?;
    }
    let summary = dir.join("summary.json");
    fs::write(&summary, serde_json::to_string_pretty(&outcome.summary)?)
        .map_err(|e| Error::io(&summary, e))?;
    if svg {
        let path = dir.join("regret.svg");
        fs::write(&path, render_svg(&outcome.runs)).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Mean of the final regrets per algorithm over seeds `0..seeds`.
pub fn mean_final_regret(
    config: &ExperimentConfig,
    seeds: u64,
    execution: Execution,
) -> Result<Vec<(LearnerKind, f64)>> {
    let mut totals = vec![0.0; config.algos.len()];
    for seed in 0..seeds {
        let prepared = prepare(&ExperimentConfig {
            seed,
            ..config.clone()
        })?;
        for (t, run) in totals
            .iter_mut()
            .zip(run_cells(&prepared, &config.algos, execution)?)
        {
            *t += run.final_regret();
        }
    }
    Ok(config
        .algos
        .iter()
        .zip(totals)
        .map(|(a, t)| (*a, t / seeds as f64))
        .collect())
}
