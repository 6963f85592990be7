use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mixed_hardy::atomic::{
    decompose_envelope, decompose_regular, decompose_s, default_t, equivalence_report, AtomKind, AtomicDecomposition,
    EnvelopeKind,
};
use mixed_hardy::experiment::{self, ExperimentConfig, ExponentSpec, OutputSpec, SpaceSpec, Suite};
use mixed_hardy::operators::hardy_norms;
use mixed_hardy::sampling::{random_martingale, trial_rng};
use mixed_hardy::{io, mixed_norm, Martingale, MixedExponent, ProductFilteredSpace};

/// Mixed-norm martingale Hardy spaces on finite dyadic product spaces.
#[derive(Debug, Parser)]
#[command(name = "mixed-hardy", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Space description file (JSON); overrides --dims/--depth.
    #[arg(long, global = true)]
    space: Option<PathBuf>,
    /// Number of coordinates of the dyadic space.
    #[arg(long, global = true, default_value_t = 2)]
    dims: usize,
    /// Number of dyadic levels N.
    #[arg(long, global = true, default_value_t = 3)]
    depth: usize,
    /// Exponent vector such as `2,inf`; repeat for a grid.
    #[arg(long = "p", global = true)]
    p: Vec<String>,
    #[arg(long, global = true, default_value_t = 100)]
    trials: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory; CSV goes to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write an SVG histogram per suite (needs --out).
    #[arg(long, global = true)]
    svg: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hardy quasi-norms of a martingale file or of a seeded random martingale.
    Norm {
        /// Martingale file (JSON); a random martingale is used when absent.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Doob maximal inequality against the product of scalar constants.
    DoobCheck,
    /// The two-dimensional counterexample with exponent (p, inf); p is the
    /// first entry of --p (default 2).
    Counterexample {
        #[arg(long, default_value_t = 16)]
        n: usize,
    },
    /// Weighted weak-type inequality with constant one.
    WeakType,
    /// Vector-valued Doob inequality ratios.
    VectorIneq,
    /// Atomic decompositions: reconstruction, atom conditions, level sets.
    AtomicRoundtrip,
    /// One atomic decomposition with its manifest.
    Decompose {
        #[arg(long, value_enum, default_value = "s")]
        kind: DecomposeKind,
        /// Aggregation exponent t in (0, 1].
        #[arg(long)]
        t: Option<f64>,
        /// Martingale file (JSON); a random martingale is used when absent.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Davis decomposition certificates.
    Davis,
    /// Ratio of the square and maximal Hardy norms.
    BdgRatio,
    /// Square-function domination under martingale transforms.
    TransformBound,
    /// Ratios between the five Hardy quasi-norms.
    EquivalenceReport,
    /// Run suites from a TOML config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DecomposeKind {
    /// s-atoms from the conditional square function.
    #[value(name = "s")]
    CondSquare,
    /// M-atoms from the minimal predictable envelope of |f_n|.
    #[value(name = "P")]
    P,
    /// S-atoms from the minimal predictable envelope of S_n f.
    #[value(name = "Q")]
    Q,
    /// M-atoms on a regular space.
    #[value(name = "M")]
    RegularM,
    /// S-atoms on a regular space.
    #[value(name = "S")]
    RegularS,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Returns whether every exact assertion held.
fn dispatch(cli: &Cli) -> Result<bool> {
    let g = &cli.global;
    let suite = match &cli.command {
        Command::Norm { input } => return norm(g, input.as_ref()),
        Command::Decompose { kind, t, input } => return decompose(g, *kind, *t, input.as_ref()),
        Command::Run { config } => {
            let config = ExperimentConfig::load(config).with_context(|| format!("reading {}", config.display()))?;
            return run(&config);
        }
        Command::DoobCheck => Suite::DoobCheck,
        Command::Counterexample { .. } => Suite::Counterexample,
        Command::WeakType => Suite::WeakType,
        Command::VectorIneq => Suite::VectorIneq,
        Command::AtomicRoundtrip => Suite::AtomicRoundtrip,
        Command::Davis => Suite::Davis,
        Command::BdgRatio => Suite::BdgRatio,
        Command::TransformBound => Suite::TransformBound,
        Command::EquivalenceReport => Suite::EquivalenceReport,
    };
    let mut config = ExperimentConfig::new(vec![suite], space_spec(g), g.trials, g.seed);
    config.exponents = g.p.iter().cloned().map(ExponentSpec::Text).collect();
    config.output = OutputSpec { dir: g.out.clone(), svg: g.svg };
    if let Command::Counterexample { n } = cli.command {
        config.counterexample.n = n;
        if let Some(p) = g.p.first() {
            config.counterexample.p =
                p.trim().parse().with_context(|| format!("counterexample needs a scalar p, got '{p}'"))?;
        }
        // The counterexample builds its own space and exponent.
        config.exponents.clear();
        config.space = SpaceSpec::Dyadic { dims: 2, depth: 1 };
    }
    if suite == Suite::EquivalenceReport {
        print_equivalence_table(&config)?;
    }
    run(&config)
}

fn space_spec(g: &Global) -> SpaceSpec {
    match &g.space {
        Some(path) => SpaceSpec::File { path: path.clone() },
        None => SpaceSpec::Dyadic { dims: g.dims, depth: g.depth },
    }
}

fn exponents(g: &Global, space: &ProductFilteredSpace) -> Result<Vec<MixedExponent>> {
    if g.p.is_empty() {
        return Ok(vec![MixedExponent::uniform(2.0, space.dims())?]);
    }
    g.p.iter().map(|p| p.parse::<MixedExponent>().with_context(|| format!("exponent '{p}'"))).collect()
}

fn run(config: &ExperimentConfig) -> Result<bool> {
    if config.output.svg && config.output.dir.is_none() {
        bail!("--svg needs --out");
    }
    let out = experiment::run(config)?;
    if config.output.dir.is_none() {
        let mut stdout = std::io::stdout().lock();
        let mut suites: Vec<Suite> = out.records.iter().map(|r| r.suite).collect();
        suites.dedup();
        for suite in suites {
            let records: Vec<_> = out.records.iter().filter(|r| r.suite == suite).cloned().collect();
            stdout.write_all(experiment::to_csv(&records)?.as_bytes())?;
        }
    }
    for file in &out.files {
        eprintln!("wrote {}", file.display());
    }
    eprintln!("{}", out.summary);
    Ok(out.summary.passed())
}

fn load_or_sample(g: &Global, input: Option<&PathBuf>) -> Result<Martingale> {
    match input {
        Some(path) => io::load_martingale(path).with_context(|| format!("reading {}", path.display())),
        None => {
            let space: Arc<ProductFilteredSpace> = space_spec(g).build()?;
            Ok(random_martingale(&space, &mut trial_rng(g.seed, 0)))
        }
    }
}

fn norm(g: &Global, input: Option<&PathBuf>) -> Result<bool> {
    let f = load_or_sample(g, input)?;
    println!("exponent,terminal,maximal,square,cond_square,p_value,q_value,g_value");
    for p in exponents(g, f.space())? {
        let r = hardy_norms(&f, &p)?;
        let terminal = mixed_norm(&f.terminal(), &p)?;
        println!(
            "\"{p}\",{terminal},{},{},{},{},{},{}",
            r.maximal, r.square, r.cond_square, r.p_value, r.q_value, r.g_value
        );
    }
    Ok(true)
}

fn decompose(g: &Global, kind: DecomposeKind, t: Option<f64>, input: Option<&PathBuf>) -> Result<bool> {
    let f = load_or_sample(g, input)?;
    let ps = exponents(g, f.space())?;
    let [p] = ps.as_slice() else { bail!("decompose takes a single --p") };
    let regular = matches!(kind, DecomposeKind::RegularM | DecomposeKind::RegularS);
    let t = t.unwrap_or_else(|| default_t(p, regular));
    let (dec, extra): (AtomicDecomposition, Option<String>) = match kind {
        DecomposeKind::CondSquare => (decompose_s(&f, p, t)?, None),
        DecomposeKind::P => (decompose_envelope(&f, p, t, EnvelopeKind::P)?, None),
        DecomposeKind::Q => (decompose_envelope(&f, p, t, EnvelopeKind::Q)?, None),
        DecomposeKind::RegularM | DecomposeKind::RegularS => {
            let atom = if matches!(kind, DecomposeKind::RegularM) { AtomKind::Maximal } else { AtomKind::Square };
            let reg = decompose_regular(&f, p, t, atom)?;
            let line = format!(
                "regularity={} covers_bounded={} max_stopping_ratio={}",
                reg.regularity,
                reg.covers_bounded(),
                reg.max_stopping_ratio()
            );
            (reg.decomposition, Some(line))
        }
    };
    let mut text = String::from("k,mu,chi_norm,atom_sup\n");
    for (k, mu, chi, sup) in dec.manifest()? {
        text.push_str(&format!("{k},{mu},{chi},{sup}\n"));
    }
    match &g.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join("decomposition.csv");
            std::fs::write(&path, &text)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    let check = dec.check(&f)?;
    println!("reconstruction_error={}", check.reconstruction_error);
    if let Some(line) = extra {
        println!("{line}");
    }
    for (k, messages) in &check.invalid_atoms {
        eprintln!("atom k={k}: {}", messages.join("; "));
    }
    Ok(check.passed(1e-9))
}

fn print_equivalence_table(config: &ExperimentConfig) -> Result<()> {
    let (space, ps) = config.resolve()?;
    let samples: Vec<Martingale> =
        (0..config.trials).map(|i| random_martingale(&space, &mut trial_rng(config.seed, i as u64))).collect();
    for p in ps {
        let report = equivalence_report(&samples, &p)?;
        eprintln!("p = {p}, regularity = {}", report.regularity);
        eprintln!(
            "{:<28} {:<26} {:>9} {:>12} {:>12} {:>6}",
            "inequality", "hypotheses", "assertion", "min", "max", "viol"
        );
        for row in &report.rows {
            let regime = if row.in_regime { row.regime.to_string() } else { format!("{} (outside)", row.regime) };
            eprintln!(
                "{:<28} {:<26} {:>9} {:>12.6} {:>12.6} {:>6}",
                row.name,
                regime,
                format!("{:?}", row.assertion).to_lowercase(),
                row.min_ratio,
                row.max_ratio,
                row.violations
            );
        }
    }
    Ok(())
}
