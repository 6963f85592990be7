//! Seeded verification suites, their configuration and their reports.
//!
//! A run evaluates every selected suite on `trials` seeded random inputs for
//! every exponent of the grid. Trial `i` draws from `trial_rng(seed, i)`, so
//! the same trial sees the same martingale under every exponent and every
//! suite, and the output does not depend on scheduling. Suites are either
//! exact (an inequality with an explicit constant, a reconstruction or an
//! atom condition; a violation fails the run) or empirical (an unspecified
//! constant; the ratio is only reported).

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use serde::Deserialize;

use crate::atomic::{
    cond_square_norm, davis_decompose, decompose_envelope, decompose_regular, decompose_s, decomposition_norm,
    default_t, equivalence_report, level_sets_match, AtomKind, AtomicDecomposition, EnvelopeKind, ATOM_TOL,
};
use crate::error::{Error, Result};
use crate::martingale::Martingale;
use crate::mixed_norm::{mixed_norm, MixedExponent};
use crate::operators::{
    doob_counterexample, martingale_transform, maximal, square_function, tilde_maximal, vector_inequality_ratio,
    weighted_weak_type_check, TransformMultipliers,
};
use crate::sampling::{random_martingale, random_multipliers, random_variable, random_weight, trial_rng};
use crate::space::{make_dyadic_space, regularity_constant, ProductFilteredSpace};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Tolerance of the exact assertions, relative to `max(1, scale)`.
pub const EXACT_TOL: f64 = 1e-9;

/// Thresholds per trial in the weak-type sweep.
const WEAK_TYPE_SWEEP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    DoobCheck,
    Counterexample,
    WeakType,
    VectorIneq,
    AtomicRoundtrip,
    Davis,
    BdgRatio,
    TransformBound,
    EquivalenceReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteClass {
    Exact,
    Empirical,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::DoobCheck,
        Suite::Counterexample,
        Suite::WeakType,
        Suite::VectorIneq,
        Suite::AtomicRoundtrip,
        Suite::Davis,
        Suite::BdgRatio,
        Suite::TransformBound,
        Suite::EquivalenceReport,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::DoobCheck => "doob-check",
            Suite::Counterexample => "counterexample",
            Suite::WeakType => "weak-type",
            Suite::VectorIneq => "vector-ineq",
            Suite::AtomicRoundtrip => "atomic-roundtrip",
            Suite::Davis => "davis",
            Suite::BdgRatio => "bdg-ratio",
            Suite::TransformBound => "transform-bound",
            Suite::EquivalenceReport => "equivalence-report",
        }
    }

    pub fn class(self) -> SuiteClass {
        match self {
            Suite::VectorIneq | Suite::BdgRatio => SuiteClass::Empirical,
            _ => SuiteClass::Exact,
        }
    }

    /// The measured column shown in histograms and summaries.
    pub fn headline(self) -> &'static str {
        match self {
            Suite::DoobCheck => "ratio",
            Suite::Counterexample => "maximal_norm",
            Suite::WeakType => "max_ratio",
            Suite::VectorIneq => "ratio",
            Suite::AtomicRoundtrip => "s_norm_ratio",
            Suite::Davis => "g_ratio",
            Suite::BdgRatio => "ratio",
            Suite::TransformBound => "norm_ratio",
            Suite::EquivalenceReport => "five_spread",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpaceSpec {
    Dyadic { dims: usize, depth: usize },
    File { path: PathBuf },
}

impl Default for SpaceSpec {
    fn default() -> Self {
        SpaceSpec::Dyadic { dims: 2, depth: 3 }
    }
}

impl SpaceSpec {
    pub fn build(&self) -> Result<Arc<ProductFilteredSpace>> {
        match self {
            SpaceSpec::Dyadic { dims, depth } => make_dyadic_space(*dims, *depth),
            SpaceSpec::File { path } => crate::io::load_space(path),
        }
    }
}

/// An exponent vector written as a list of numbers or as text such as
/// `"2,inf"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ExponentSpec {
    Entries(Vec<f64>),
    Text(String),
}

impl ExponentSpec {
    pub fn build(&self) -> Result<MixedExponent> {
        match self {
            ExponentSpec::Entries(v) => MixedExponent::new(v.clone()),
            ExponentSpec::Text(s) => s.parse(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Directory for `<suite>.csv` (and histograms); nothing is written when
    /// absent.
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub svg: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleSpec {
    /// Largest `n`; records are produced for `1..=n`.
    pub n: usize,
    pub p: f64,
}

impl Default for CounterexampleSpec {
    fn default() -> Self {
        Self { n: 16, p: 2.0 }
    }
}

/// Experiment configuration, read from TOML:
///
/// ```toml
/// schema_version = 1
/// suites = ["doob-check", "bdg-ratio"]
/// trials = 100
/// seed = 7
/// exponents = [[1.5, 1.5], "2,3"]
///
/// [space]
/// kind = "dyadic"
/// dims = 2
/// depth = 4
///
/// [output]
/// dir = "out"
/// svg = true
/// ```
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub suites: Vec<Suite>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Defaults to `(2, ..., 2)`.
    #[serde(default)]
    pub exponents: Vec<ExponentSpec>,
    #[serde(default)]
    pub space: SpaceSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub counterexample: CounterexampleSpec,
    /// Decomposition parameter; defaults to `min(1, p_min)` (halved for the
    /// regular decompositions).
    #[serde(default)]
    pub t: Option<f64>,
}

impl ExperimentConfig {
    pub fn new(suites: Vec<Suite>, space: SpaceSpec, trials: usize, seed: u64) -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            suites,
            trials,
            seed,
            exponents: Vec::new(),
            space,
            output: OutputSpec::default(),
            counterexample: CounterexampleSpec::default(),
            t: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file; relative paths inside it are taken relative to
    /// the file.
    pub fn load(path: &Path) -> Result<Self> {
        let mut config = Self::from_toml(&fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let SpaceSpec::File { path } = &mut config.space {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
        if let Some(dir) = &mut config.output.dir {
            if dir.is_relative() {
                *dir = base.join(&*dir);
            }
        }
        Ok(config)
    }

    /// Checks the config and resolves the space and exponent grid.
    pub fn resolve(&self) -> Result<(Arc<ProductFilteredSpace>, Vec<MixedExponent>)> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.suites.is_empty() {
            return Err(Error::Config("no suites selected".into()));
        }
        if let Some(t) = self.t {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::Config(format!("t = {t} must lie in (0, 1]")));
            }
        }
        let space = self.space.build()?;
        let exponents = if self.exponents.is_empty() {
            vec![MixedExponent::uniform(2.0, space.dims())?]
        } else {
            self.exponents.iter().map(ExponentSpec::build).collect::<Result<Vec<_>>>()?
        };
        for p in &exponents {
            if p.dims() != space.dims() {
                return Err(Error::Config(format!("exponent {p} does not match {} coordinates", space.dims())));
            }
        }
        Ok((space, exponents))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Nothing asserted: an empirical quantity, or an exponent outside the
    /// hypotheses of the checked statement.
    Report,
}

impl Status {
    fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Report => "report",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub suite: Suite,
    pub seed: u64,
    pub trial: usize,
    pub exponent: String,
    /// Whether the exponent satisfies the hypotheses of the checked statement.
    pub in_hypotheses: bool,
    pub status: Status,
    /// Measured quantities in a fixed per-suite order.
    pub measures: Vec<(&'static str, f64)>,
    /// Not part of the CSV data.
    pub wall_time: Duration,
}

impl TrialRecord {
    pub fn measure(&self, name: &str) -> Option<f64> {
        self.measures.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSummary {
    pub suite: Suite,
    pub records: usize,
    pub failures: usize,
    pub reported: usize,
    /// Range of the headline measure over finite values.
    pub headline_min: f64,
    pub headline_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub suites: Vec<SuiteSummary>,
    pub wall_time: Duration,
}

impl RunSummary {
    pub fn exact_failures(&self) -> usize {
        self.suites.iter().map(|s| s.failures).sum()
    }

    pub fn passed(&self) -> bool {
        self.exact_failures() == 0
    }
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<20} {:>8} {:>8} {:>8} {:>14} {:>14}  headline",
            "suite", "records", "fail", "report", "min", "max"
        )?;
        for s in &self.suites {
            writeln!(
                f,
                "{:<20} {:>8} {:>8} {:>8} {:>14.6} {:>14.6}  {}",
                s.suite.name(),
                s.records,
                s.failures,
                s.reported,
                s.headline_min,
                s.headline_max,
                s.suite.headline()
            )?;
        }
        write!(f, "exact failures: {}", self.exact_failures())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<TrialRecord>,
    pub summary: RunSummary,
    pub files: Vec<PathBuf>,
}

/// Runs every selected suite and writes the reports if an output directory
/// is configured.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    let start = Instant::now();
    let (space, exponents) = config.resolve()?;
    let mut suites = config.suites.clone();
    suites.sort();
    suites.dedup();
    let mut records = Vec::new();
    for suite in suites {
        records.extend(run_suite(suite, config, &space, &exponents)?);
    }
    let summary = summarize(&records, start.elapsed());
    let files = match &config.output.dir {
        Some(dir) => report(&records, dir, config.output.svg)?,
        None => Vec::new(),
    };
    Ok(RunOutput { records, summary, files })
}

/// Records of one suite, ordered by exponent then trial.
pub fn run_suite(
    suite: Suite,
    config: &ExperimentConfig,
    space: &Arc<ProductFilteredSpace>,
    exponents: &[MixedExponent],
) -> Result<Vec<TrialRecord>> {
    if suite == Suite::Counterexample {
        return counterexample_records(config);
    }
    // Suites that ignore the exponent run once per trial.
    let grid: Vec<Option<&MixedExponent>> = match suite {
        Suite::WeakType => vec![None],
        _ => exponents.iter().map(Some).collect(),
    };
    let jobs: Vec<(Option<&MixedExponent>, usize)> =
        grid.iter().flat_map(|p| (0..config.trials).map(move |i| (*p, i))).collect();
    jobs.par_iter()
        .map(|&(p, trial)| {
            let start = Instant::now();
            let outcome = run_trial(suite, config, space, p, trial)?;
            Ok(TrialRecord {
                suite,
                seed: config.seed,
                trial,
                exponent: p.map_or_else(|| "-".to_string(), ToString::to_string),
                in_hypotheses: outcome.in_hypotheses,
                status: outcome.status,
                measures: outcome.measures,
                wall_time: start.elapsed(),
            })
        })
        .collect()
}

struct Outcome {
    in_hypotheses: bool,
    status: Status,
    measures: Vec<(&'static str, f64)>,
}

impl Outcome {
    fn exact(ok: bool, measures: Vec<(&'static str, f64)>) -> Self {
        Self { in_hypotheses: true, status: if ok { Status::Pass } else { Status::Fail }, measures }
    }

    /// An exact assertion that only applies inside the hypotheses.
    fn gated(in_hypotheses: bool, ok: bool, measures: Vec<(&'static str, f64)>) -> Self {
        let status = match (in_hypotheses, ok) {
            (false, _) => Status::Report,
            (true, true) => Status::Pass,
            (true, false) => Status::Fail,
        };
        Self { in_hypotheses, status, measures }
    }

    fn empirical(in_hypotheses: bool, measures: Vec<(&'static str, f64)>) -> Self {
        Self { in_hypotheses, status: Status::Report, measures }
    }
}

fn within(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + EXACT_TOL * rhs.abs().max(1.0)
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn run_trial(
    suite: Suite,
    config: &ExperimentConfig,
    space: &Arc<ProductFilteredSpace>,
    p: Option<&MixedExponent>,
    trial: usize,
) -> Result<Outcome> {
    let mut rng = trial_rng(config.seed, trial as u64);
    let p = match p {
        Some(p) => p,
        None => return weak_type_trial(space, &mut rng),
    };
    match suite {
        Suite::DoobCheck => doob_trial(&random_martingale(space, &mut rng), p),
        Suite::VectorIneq => {
            let fs: Vec<_> = (0..=space.depth()).map(|_| random_variable(space, &mut rng, 0.0, 1.0)).collect();
            let r = vector_inequality_ratio(&fs, p)?;
            Ok(Outcome::empirical(p.is_vector_admissible(), vec![("ratio", r)]))
        }
        Suite::AtomicRoundtrip => atomic_trial(&random_martingale(space, &mut rng), p, config.t),
        Suite::Davis => davis_trial(&random_martingale(space, &mut rng), p),
        Suite::BdgRatio => {
            let f = random_martingale(space, &mut rng);
            let hs = mixed_norm(&square_function(&f, None), p)?;
            let hm = mixed_norm(&maximal(&f, None), p)?;
            let bdg = p.is_finite() && p.within(1.0, f64::INFINITY) || p.is_vector_admissible();
            Ok(Outcome::empirical(bdg, vec![("square_norm", hs), ("maximal_norm", hm), ("ratio", ratio(hs, hm))]))
        }
        Suite::TransformBound => {
            let f = random_martingale(space, &mut rng);
            let signs = rng.gen_bool(0.5);
            let b = TransformMultipliers::new(space, random_multipliers(space, &mut rng, signs))?;
            transform_trial(&f, &b, p)
        }
        Suite::EquivalenceReport => equivalence_trial(&random_martingale(space, &mut rng), p),
        Suite::WeakType | Suite::Counterexample => unreachable!("handled separately"),
    }
}

fn doob_trial(f: &Martingale, p: &MixedExponent) -> Result<Outcome> {
    let terminal = f.terminal();
    let mf = maximal(f, None);
    let tilde = tilde_maximal(&terminal);
    let tilde_excess = mf.values().iter().zip(tilde.values()).fold(f64::NEG_INFINITY, |m, (a, b)| m.max(a - b));
    let norm_f = mixed_norm(&terminal, p)?;
    let norm_m = mixed_norm(&mf, p)?;
    let r = ratio(norm_m, norm_f);
    let constant = p.doob_constant();
    // Only `1 < p < ∞` comes with the product of the scalar constants.
    let asserted = p.is_finite() && p.within(1.0, f64::INFINITY);
    let ok = r <= constant * (1.0 + EXACT_TOL) && tilde_excess <= EXACT_TOL * tilde.sup_norm().max(1.0);
    Ok(Outcome::gated(
        asserted,
        ok,
        vec![
            ("norm_f", norm_f),
            ("maximal_norm", norm_m),
            ("ratio", r),
            ("doob_constant", constant),
            ("tilde_excess", tilde_excess),
        ],
    ))
}

fn weak_type_trial<R: Rng>(space: &Arc<ProductFilteredSpace>, rng: &mut R) -> Result<Outcome> {
    let g = random_variable(space, rng, -1.0, 1.0);
    let phi = random_weight(space, rng);
    let top = maximal(&Martingale::from_terminal(&g), None).max_value();
    let (mut worst_gap, mut max_ratio) = (f64::NEG_INFINITY, 0.0f64);
    let mut ok = true;
    for j in 0..WEAK_TYPE_SWEEP {
        let rho = top * (j as f64 + 0.5) / WEAK_TYPE_SWEEP as f64;
        if rho <= 0.0 {
            continue;
        }
        let c = weighted_weak_type_check(&g, &phi, rho)?;
        ok &= within(c.lhs, c.rhs);
        worst_gap = worst_gap.max(c.lhs - c.rhs);
        max_ratio = max_ratio.max(ratio(c.lhs, c.rhs));
    }
    Ok(Outcome::exact(ok, vec![("worst_gap", worst_gap), ("max_ratio", max_ratio)]))
}

fn atomic_trial(f: &Martingale, p: &MixedExponent, t: Option<f64>) -> Result<Outcome> {
    if !p.is_finite() {
        let nan = f64::NAN;
        let measures = ATOMIC_COLUMNS.iter().map(|&c| (c, nan)).collect();
        return Ok(Outcome::empirical(false, measures));
    }
    let t_plain = t.unwrap_or_else(|| default_t(p, false));
    let scale = f.values().iter().fold(1.0f64, |m, v| m.max(v.sup_norm()));
    let tol = EXACT_TOL * scale;

    let mut recon = 0.0f64;
    let mut invalid = 0usize;
    let mut ok = true;
    let mut tally = |dec: &AtomicDecomposition| -> Result<()> {
        let check = dec.check(f)?;
        recon = recon.max(check.reconstruction_error);
        invalid += check.invalid_atoms.len();
        ok &= check.passed(tol);
        Ok(())
    };

    let s_dec = decompose_s(f, p, t_plain)?;
    tally(&s_dec)?;
    let level_sets = level_sets_match(f, &s_dec);
    let s_norm = cond_square_norm(f, p)?;
    let s_ratio = ratio(decomposition_norm(&s_dec)?, s_norm);
    tally(&decompose_envelope(f, p, t_plain, EnvelopeKind::P)?)?;
    tally(&decompose_envelope(f, p, t_plain, EnvelopeKind::Q)?)?;

    let (mut stopping_ratio, mut covers) = (f64::NAN, true);
    if regularity_constant(f.space())?.is_regular() {
        let t_strict = t.filter(|&t| t < p.min().min(1.0)).unwrap_or_else(|| default_t(p, true));
        stopping_ratio = 0.0;
        for kind in [AtomKind::Maximal, AtomKind::Square] {
            let reg = decompose_regular(f, p, t_strict, kind)?;
            tally(&reg.decomposition)?;
            covers &= reg.covers_bounded();
            stopping_ratio = stopping_ratio.max(reg.max_stopping_ratio());
        }
    }
    // A zero martingale has s-norm 0 and an empty decomposition.
    let band_ok = s_norm == 0.0 || (s_ratio > 0.0 && s_ratio.is_finite());
    let pass = ok && level_sets && covers && band_ok && stopping_ratio.is_finite() | stopping_ratio.is_nan();
    Ok(Outcome::exact(
        pass,
        vec![
            ("atoms", s_dec.len() as f64),
            ("reconstruction_error", recon),
            ("invalid_atoms", invalid as f64),
            ("level_sets_match", f64::from(u8::from(level_sets))),
            ("s_norm_ratio", s_ratio),
            ("stopping_ratio", stopping_ratio),
            ("covers_bounded", f64::from(u8::from(covers))),
        ],
    ))
}

const ATOMIC_COLUMNS: [&str; 7] = [
    "atoms",
    "reconstruction_error",
    "invalid_atoms",
    "level_sets_match",
    "s_norm_ratio",
    "stopping_ratio",
    "covers_bounded",
];

fn davis_trial(f: &Martingale, p: &MixedExponent) -> Result<Outcome> {
    let dec = davis_decompose(f, p, None)?;
    let scale = square_function(f, None).sup_norm().max(1.0);
    let ok = dec.split_error <= EXACT_TOL * scale && dec.certificates.hold(ATOM_TOL * scale);
    let c = dec.certificates;
    Ok(Outcome::exact(
        ok,
        vec![
            ("split_error", dec.split_error),
            ("large_jump_excess", c.large_jump),
            ("small_jump_excess", c.small_jump),
            ("g_jump_excess", c.g_jump),
            ("h_ratio", ratio(dec.h_variation, dec.f_square)),
            ("g_ratio", ratio(dec.g_q_value, dec.f_square)),
        ],
    ))
}

fn transform_trial(f: &Martingale, b: &TransformMultipliers, p: &MixedExponent) -> Result<Outcome> {
    let tf = martingale_transform(f, b)?;
    let (sf, stf) = (square_function(f, None), square_function(&tf, None));
    let excess = stf.values().iter().zip(sf.values()).fold(f64::NEG_INFINITY, |m, (a, b)| m.max(a - b));
    let ok = excess <= EXACT_TOL * sf.sup_norm().max(1.0);
    let norm_ratio = ratio(mixed_norm(&tf.terminal(), p)?, mixed_norm(&f.terminal(), p)?);
    let square_ratio = ratio(mixed_norm(&stf, p)?, mixed_norm(&sf, p)?);
    Ok(Outcome::exact(ok, vec![("square_excess", excess), ("square_ratio", square_ratio), ("norm_ratio", norm_ratio)]))
}

fn equivalence_trial(f: &Martingale, p: &MixedExponent) -> Result<Outcome> {
    let report = equivalence_report(std::slice::from_ref(f), p)?;
    let mut measures = Vec::with_capacity(report.rows.len());
    for row in &report.rows {
        let value = if row.samples == 0 { f64::NAN } else { row.max_ratio };
        measures.push((column_key(row.name), value));
    }
    Ok(Outcome::exact(report.exact_violations() == 0, measures))
}

/// CSV-friendly column name for an equivalence row.
fn column_key(name: &'static str) -> &'static str {
    match name {
        "HM<=c*Hs" => "HM_over_Hs",
        "HS<=c*Hs" => "HS_over_Hs",
        "HM<=P" => "HM_over_P",
        "HS<=Q" => "HS_over_Q",
        "HS<=c*P" => "HS_over_P",
        "HM<=c*Q" => "HM_over_Q",
        "P<=c*Q" => "P_over_Q",
        "Q<=c*P" => "Q_over_P",
        "Hs<=c*P" => "Hs_over_P",
        "Hs<=c*Q" => "Hs_over_Q",
        "Q<=c*HS" => "Q_over_HS",
        "P<=c*HM" => "P_over_HM",
        "HS<=c*HM" => "HS_over_HM",
        "HM<=c*HS" => "HM_over_HS",
        "max/min of five" => "five_spread",
        "S_n<=sqrt(R)*s_n pointwise" => "pointwise_S_over_sqrtR_s",
        other => other,
    }
}

/// Records for `n = 1..=N` of the Doob counterexample with exponent `(p, ∞)`.
///
/// Asserted: `‖f_n‖ = 1`, the inner integral is at least `n / 4^p`, the
/// maximal norm is at least `(n / 4^p)^{1/p}`, and the inner integral grows
/// with `n`. The columns `stated_inner_bound = n/4` and
/// `stated_maximal_bound = (n/4)^{1/p}` are reported alongside; they are not
/// attained (the inner integral is `n/4^p`-sized).
fn counterexample_records(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    let CounterexampleSpec { n, p } = config.counterexample;
    if n == 0 {
        return Err(Error::Config("counterexample n must be at least 1".into()));
    }
    let exponent = MixedExponent::new(vec![p, f64::INFINITY])?.to_string();
    let reports: Vec<_> = (1..=n)
        .into_par_iter()
        .map(|k| {
            let start = Instant::now();
            doob_counterexample(k, p, n).map(|r| (r, start.elapsed()))
        })
        .collect::<Result<_>>()?;
    let mut previous = f64::NEG_INFINITY;
    let mut records = Vec::with_capacity(n);
    for (i, (r, wall_time)) in reports.into_iter().enumerate() {
        let stated = r.n as f64 / 4.0;
        let growth = r.inner_integral - previous;
        let ok = (r.norm_f - 1.0).abs() <= EXACT_TOL
            && r.inner_integral >= r.inner_bound * (1.0 - EXACT_TOL)
            && r.maximal_norm >= r.maximal_bound() * (1.0 - EXACT_TOL)
            && growth > 0.0;
        previous = r.inner_integral;
        records.push(TrialRecord {
            suite: Suite::Counterexample,
            seed: config.seed,
            trial: i,
            exponent: exponent.clone(),
            in_hypotheses: true,
            status: if ok { Status::Pass } else { Status::Fail },
            measures: vec![
                ("n", r.n as f64),
                ("norm_f", r.norm_f),
                ("maximal_norm", r.maximal_norm),
                ("inner_integral", r.inner_integral),
                ("inner_bound", r.inner_bound),
                ("maximal_bound", r.maximal_bound()),
                ("stated_inner_bound", stated),
                ("stated_maximal_bound", stated.powf(1.0 / p)),
            ],
            wall_time,
        });
    }
    Ok(records)
}

pub fn summarize(records: &[TrialRecord], wall_time: Duration) -> RunSummary {
    let mut suites: Vec<Suite> = records.iter().map(|r| r.suite).collect();
    suites.dedup();
    let suites = suites
        .into_iter()
        .map(|suite| {
            let rs: Vec<&TrialRecord> = records.iter().filter(|r| r.suite == suite).collect();
            let values = rs.iter().filter_map(|r| r.measure(suite.headline())).filter(|v| v.is_finite());
            let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            SuiteSummary {
                suite,
                records: rs.len(),
                failures: rs.iter().filter(|r| r.status == Status::Fail).count(),
                reported: rs.iter().filter(|r| r.status == Status::Report).count(),
                headline_min: lo,
                headline_max: hi,
            }
        })
        .collect();
    RunSummary { suites, wall_time }
}

/// CSV text for the records of one suite: a header and one row per record.
pub fn to_csv(records: &[TrialRecord]) -> Result<String> {
    let first = records.first().ok_or_else(|| Error::InvalidParameter("no records to report".into()))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["suite", "trial", "seed", "exponent", "hypotheses", "status"];
    header.extend(first.measures.iter().map(|(n, _)| *n));
    w.write_record(&header)?;
    for r in records {
        if r.suite != first.suite || r.measures.len() != first.measures.len() {
            return Err(Error::InvalidParameter("records of different suites in one table".into()));
        }
        let mut row = vec![
            r.suite.name().to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            r.exponent.clone(),
            if r.in_hypotheses { "stated" } else { "outside stated hypotheses" }.to_string(),
            r.status.name().to_string(),
        ];
        row.extend(r.measures.iter().map(|(_, v)| v.to_string()));
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes `<suite>.csv` per suite (and `<suite>.svg` with `svg`) into `dir`.
pub fn report(records: &[TrialRecord], dir: &Path, svg: bool) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("no records to report".into()));
    }
    fs::create_dir_all(dir)?;
    let mut suites: Vec<Suite> = records.iter().map(|r| r.suite).collect();
    suites.sort();
    suites.dedup();
    let mut files = Vec::new();
    for suite in suites {
        let rs: Vec<TrialRecord> = records.iter().filter(|r| r.suite == suite).cloned().collect();
        let path = dir.join(format!("{}.csv", suite.name()));
        fs::write(&path, to_csv(&rs)?)?;
        files.push(path);
        if svg {
            let values: Vec<f64> = rs.iter().filter_map(|r| r.measure(suite.headline())).collect();
            let path = dir.join(format!("{}.svg", suite.name()));
            fs::write(&path, histogram_svg(&format!("{} {}", suite.name(), suite.headline()), &values))?;
            files.push(path);
        }
    }
    Ok(files)
}

/// A 20-bin histogram of the finite values as a standalone SVG document.
pub fn histogram_svg(title: &str, values: &[f64]) -> String {
    const BINS: usize = 20;
    const W: f64 = 640.0;
    const H: f64 = 360.0;
    const PAD: f64 = 40.0;
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let (lo, hi) = finite.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let mut counts = [0usize; BINS];
    if !finite.is_empty() {
        let width = (hi - lo).max(f64::MIN_POSITIVE);
        for v in &finite {
            let b = (((v - lo) / width) * BINS as f64) as usize;
            counts[b.min(BINS - 1)] += 1;
        }
    }
    let peak = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let bar_w = (W - 2.0 * PAD) / BINS as f64;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{PAD}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
        escape(title)
    );
    for (i, &c) in counts.iter().enumerate() {
        let h = (H - 2.0 * PAD - 10.0) * c as f64 / peak;
        out.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"steelblue\"><title>{c}</title></rect>\n",
            PAD + i as f64 * bar_w,
            H - PAD - h,
            bar_w - 1.0,
            h
        ));
    }
    let axis = H - PAD;
    out.push_str(&format!("<line x1=\"{PAD}\" y1=\"{axis}\" x2=\"{}\" y2=\"{axis}\" stroke=\"black\"/>\n", W - PAD));
    let label = |x: f64, anchor: &str, v: f64| {
        format!("<text x=\"{x}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"{anchor}\">{v:.6}</text>\n", H - 16.0)
    };
    if !finite.is_empty() {
        out.push_str(&label(PAD, "start", lo));
        out.push_str(&label(W - PAD, "end", hi));
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">n = {}, max = {}</text>\n</svg>\n",
        W - PAD,
        finite.len(),
        if finite.is_empty() { "-".to_string() } else { format!("{hi:.6}") }
    ));
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(suite: Suite, dims: usize, depth: usize, trials: usize) -> ExperimentConfig {
        ExperimentConfig::new(vec![suite], SpaceSpec::Dyadic { dims, depth }, trials, 7)
    }

    #[test]
    fn parses_toml_config() {
        let text = r#"
            schema_version = 1
            suites = ["doob-check", "bdg-ratio"]
            trials = 3
            seed = 9
            exponents = [[1.5, 1.5], "2,inf"]
            [space]
            kind = "dyadic"
            dims = 2
            depth = 2
        "#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(c.suites, vec![Suite::DoobCheck, Suite::BdgRatio]);
        let (space, ps) = c.resolve().unwrap();
        assert_eq!(space.dims(), 2);
        assert_eq!(ps[1].entries(), &[2.0, f64::INFINITY]);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(config(Suite::DoobCheck, 1, 2, 0).resolve(), Err(Error::Config(_))));
        let unknown = "schema_version = 1\nsuites = [\"nope\"]\ntrials = 1\n";
        assert!(matches!(ExperimentConfig::from_toml(unknown), Err(Error::Config(_))));
        let mut c = config(Suite::DoobCheck, 2, 2, 1);
        c.exponents = vec![ExponentSpec::Entries(vec![2.0])];
        assert!(matches!(c.resolve(), Err(Error::Config(_))));
        c.exponents = vec![ExponentSpec::Entries(vec![2.0, 0.0])];
        assert!(c.resolve().is_err());
        c.exponents.clear();
        c.schema_version = 2;
        assert!(matches!(c.resolve(), Err(Error::Config(_))));
        assert_eq!("davis".parse::<Suite>().unwrap(), Suite::Davis);
        assert!("Davis".parse::<Suite>().is_err());
    }

    #[test]
    fn atomic_roundtrip_run_passes() {
        let out = run(&config(Suite::AtomicRoundtrip, 2, 2, 4)).unwrap();
        assert_eq!(out.records.len(), 4);
        assert!(out.summary.passed());
        for r in &out.records {
            assert!(r.measure("reconstruction_error").unwrap() < 1e-9);
        }
    }

    #[test]
    fn outside_hypotheses_are_reported_not_asserted() {
        let mut c = config(Suite::DoobCheck, 2, 2, 2);
        c.exponents = vec![ExponentSpec::Text("2,inf".into()), ExponentSpec::Text("0.5,2".into())];
        let out = run(&c).unwrap();
        assert!(out.records.iter().all(|r| r.status == Status::Report && !r.in_hypotheses));
        let csv = to_csv(&out.records).unwrap();
        assert!(csv.contains("outside stated hypotheses"));
    }

    #[test]
    fn counterexample_records_use_corrected_bound() {
        let mut c = config(Suite::Counterexample, 1, 1, 1);
        c.counterexample = CounterexampleSpec { n: 4, p: 2.0 };
        let out = run(&c).unwrap();
        assert_eq!(out.records.len(), 4);
        assert!(out.summary.passed());
        let last = &out.records[3];
        assert!((last.measure("norm_f").unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(last.measure("stated_inner_bound"), Some(1.0));
        assert_eq!(last.exponent, "(2,inf)");
    }

    #[test]
    fn csv_has_header_and_one_row_per_record() {
        let out = run(&config(Suite::BdgRatio, 1, 3, 1)).unwrap();
        let csv = to_csv(&out.records).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "suite,trial,seed,exponent,hypotheses,status,square_norm,maximal_norm,ratio");
        assert!(to_csv(&[]).is_err());
        assert!(report(&[], Path::new("unused"), false).is_err());
    }

    #[test]
    fn reports_one_csv_per_suite_and_are_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = config(Suite::DoobCheck, 2, 2, 5);
        c.suites.push(Suite::TransformBound);
        c.suites.push(Suite::WeakType);
        c.output = OutputSpec { dir: Some(dir.path().to_path_buf()), svg: true };
        let first = run(&c).unwrap();
        assert_eq!(first.files.len(), 6);
        let bytes: Vec<Vec<u8>> = first.files.iter().map(|f| fs::read(f).unwrap()).collect();
        let second = run(&c).unwrap();
        for (f, b) in second.files.iter().zip(&bytes) {
            assert_eq!(&fs::read(f).unwrap(), b);
        }
        let svg = fs::read_to_string(dir.path().join("doob-check.svg")).unwrap();
        assert!(svg.starts_with("<svg") && svg.contains("max ="));
    }

    #[test]
    fn every_suite_runs() {
        for suite in Suite::ALL {
            let mut c = config(suite, 2, 2, 2);
            c.counterexample.n = 2;
            c.exponents = vec![ExponentSpec::Entries(vec![1.5, 3.0])];
            let out = run(&c).unwrap();
            assert!(!out.records.is_empty(), "{suite}");
            assert!(out.summary.passed(), "{suite}");
            let empirical = suite.class() == SuiteClass::Empirical;
            assert_eq!(out.records.iter().all(|r| r.status == Status::Report), empirical, "{suite}");
        }
    }

    #[test]
    fn histogram_handles_degenerate_input() {
        assert!(histogram_svg("x", &[]).contains("max = -"));
        let s = histogram_svg("a<b", &[1.0, 1.0, f64::NAN]);
        assert!(s.contains("a&lt;b") && s.contains("n = 2"));
    }
}
