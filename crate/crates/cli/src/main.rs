//! `sardist`: stochastic distances between relaxed complex Wishart models,
//! the associated chi-square tests, Monte Carlo experiments, and k-means
//! clustering of covariance imagery, from the command line.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use sardist::clustering::{self, InitMethod};
use sardist::distances::{self, CaseSelector, DistanceKind};
use sardist::hypothesis::{two_sample_test, DfMode};
use sardist::io;
use sardist::montecarlo::{
    empirical_power, empirical_size, sensitivity_curve, ExperimentConfig, SensitivityVary,
};
use sardist::sampler::{sample_wishart_relaxed, SeededRng};
use sardist::wishart::{estimate_n, estimate_sigma, SampleSet, WishartParams};

mod config;

use config::ExperimentConfigDoc;

#[derive(Parser)]
#[command(name = "sardist", version, about)]
struct Cli {
    /// Cap worker parallelism for Monte Carlo and clustering; 1 gives
    /// identical output to any other value.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit Wishart parameters (mean covariance, ML number of looks) to a sample set.
    Fit(FitArgs),
    /// Draw a sample set from a parameter file.
    Sample(SampleArgs),
    /// Evaluate a stochastic distance between two parameter files.
    Distance(DistanceArgs),
    /// Two-sample hypothesis test between sample-set files.
    Test(TestArgs),
    /// Empirical test size experiment driven by a config document.
    SizeExperiment(ExperimentArgs),
    /// Empirical test power experiment driven by a config document.
    PowerExperiment(ExperimentArgs),
    /// Exact-parameter sensitivity curves over a grid.
    Sensitivity(SensitivityArgs),
    /// k-means clustering of a covariance image.
    Cluster(ClusterArgs),
    /// Generate the three-class synthetic covariance image.
    SynthImage(SynthArgs),
    /// Convert between text (JSON) and PWIF binary forms.
    Convert(ConvertArgs),
}

#[derive(Args)]
struct FitArgs {
    /// Sample-set file (header line, then one matrix document per line).
    #[arg(long)]
    input: PathBuf,
    /// Output parameter file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    /// Parameter file with `n` and `sigma`.
    #[arg(long)]
    params: PathBuf,
    /// Number of matrices to draw.
    #[arg(long)]
    count: usize,
    /// Seed of the generator (stream 0).
    #[arg(long)]
    seed: u64,
    /// Output sample-set file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DistanceArgs {
    /// kl | renyi | bhattacharyya | hellinger | bartlett | rw
    #[arg(long)]
    measure: String,
    /// Rényi order in (0,1); alternative to `--measure renyi:BETA`.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// auto | general | equal-looks | equal-sigma
    #[arg(long, default_value = "auto")]
    case: String,
}

#[derive(Args)]
struct TestArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    measure: String,
    #[arg(long)]
    beta: Option<f64>,
    /// Nominal level in (0,1).
    #[arg(long, default_value_t = 0.05)]
    level: f64,
    /// full (p^2 + 1 parameters) | sigma-only (p^2)
    #[arg(long, default_value = "full")]
    df: String,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config document (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SensitivityArgs {
    /// Parameter file holding the fixed null parameters.
    #[arg(long)]
    params: PathBuf,
    /// sigma-entry (vary the (0,0) covariance entry) | looks
    #[arg(long)]
    vary: String,
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    #[arg(long)]
    steps: usize,
    /// Per-sample size N of the statistic prefactor (N1 = N2 = N).
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Measures to evaluate (repeatable); Rényi as `renyi:BETA`.
    #[arg(long = "measure", default_values_t = [
        "kl".to_string(),
        "renyi:0.9".to_string(),
        "bhattacharyya".to_string(),
        "hellinger".to_string(),
    ])]
    measures: Vec<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ClusterArgs {
    /// PWIF covariance image.
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    measure: String,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    /// farthest-local-means | random-pixels
    #[arg(long, default_value = "farthest-local-means")]
    init: String,
    /// Output stem; writes `<out>.pgm` and `<out>.csv`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    seed: u64,
    /// Output PWIF path; ground-truth labels land next to it as
    /// `<out>.labels.pgm` / `<out>.labels.csv`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(long)]
    input: PathBuf,
    /// text | pwif
    #[arg(long)]
    to: String,
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        // a later duplicate initialization only matters in tests; ignore it
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
        eprintln!("config: threads = {t}");
    }
    let result = match cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Distance(a) => cmd_distance(a),
        Command::Test(a) => cmd_test(a),
        Command::SizeExperiment(a) => cmd_size(a),
        Command::PowerExperiment(a) => cmd_power(a),
        Command::Sensitivity(a) => cmd_sensitivity(a),
        Command::Cluster(a) => cmd_cluster(a),
        Command::SynthImage(a) => cmd_synth(a),
        Command::Convert(a) => cmd_convert(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn resolve_measure(measure: &str, beta: Option<f64>) -> Result<DistanceKind> {
    let kind = if measure.eq_ignore_ascii_case("renyi") {
        let beta = beta.context("--measure renyi requires --beta")?;
        DistanceKind::renyi(beta)?
    } else {
        let k = DistanceKind::from_str(measure)?;
        if beta.is_some() && !matches!(k, DistanceKind::Renyi { .. }) {
            bail!("--beta only applies to the renyi measure");
        }
        k
    };
    Ok(kind)
}

fn cmd_fit(a: FitArgs) -> Result<()> {
    eprintln!(
        "config: fit input = {} out = {}",
        a.input.display(),
        a.out.display()
    );
    let sample = io::read_sample_set(&a.input)
        .with_context(|| format!("reading {}", a.input.display()))?;
    let sigma_hat = estimate_sigma(&sample)?;
    let n_hat = estimate_n(&sample, &sigma_hat).map_err(|e| {
        anyhow::anyhow!(
            "{e}\nhint: the profile score has no root for degenerate samples \
             (for example a single observation); fit needs a sample with real dispersion"
        )
    })?;
    let params = WishartParams::new(sigma_hat, n_hat)?;
    io::write_params(&a.out, &params)?;
    println!(
        "n_hat = {:.6}  logdet_sigma_hat = {:.6}  N = {}",
        n_hat,
        params.sigma().logdet()?,
        sample.len()
    );
    Ok(())
}

fn cmd_sample(a: SampleArgs) -> Result<()> {
    eprintln!(
        "config: sample params = {} count = {} seed = {} out = {}",
        a.params.display(),
        a.count,
        a.seed,
        a.out.display()
    );
    if a.count == 0 {
        bail!("--count must be at least 1");
    }
    let params = io::read_params(&a.params)?;
    let mut rng = SeededRng::new(a.seed, 0);
    let draws = (0..a.count)
        .map(|_| sample_wishart_relaxed(&params, &mut rng))
        .collect::<sardist::Result<Vec<_>>>()?;
    io::write_sample_set(&a.out, &SampleSet::new(draws)?)?;
    Ok(())
}

fn cmd_distance(a: DistanceArgs) -> Result<()> {
    let kind = resolve_measure(&a.measure, a.beta)?;
    let case = CaseSelector::from_str(&a.case)?;
    eprintln!(
        "config: distance measure = {kind} case = {case:?} a = {} b = {}",
        a.a.display(),
        a.b.display()
    );
    let t1 = io::read_params(&a.a)?;
    let t2 = io::read_params(&a.b)?;
    let value = distances::distance(kind, &t1, &t2, case)?;
    let resolved = if kind.is_h_phi() {
        format!("{:?}", case.resolve(&t1, &t2)?).to_ascii_lowercase()
    } else {
        // Bartlett / revised Wishart compare covariances only
        "covariance-only".to_string()
    };
    println!(
        "{}",
        serde_json::json!({
            "measure": kind.label(),
            "case": resolved,
            "value": value,
        })
    );
    Ok(())
}

fn cmd_test(a: TestArgs) -> Result<()> {
    let kind = resolve_measure(&a.measure, a.beta)?;
    let df = match a.df.as_str() {
        "full" => DfMode::Full,
        "sigma-only" => DfMode::SigmaOnly,
        other => bail!("unknown df mode `{other}` (expected full | sigma-only)"),
    };
    eprintln!(
        "config: test measure = {kind} level = {} df = {:?} a = {} b = {}",
        a.level,
        df,
        a.a.display(),
        a.b.display()
    );
    let s1 = io::read_sample_set(&a.a)?;
    let s2 = io::read_sample_set(&a.b)?;
    let result = two_sample_test(&s1, &s2, kind, a.level, df)?;
    println!("{}", serde_json::to_string_pretty(&result)?);
    Ok(())
}

fn load_experiment(args: &ExperimentArgs) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let doc: ExperimentConfigDoc = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", args.config.display()))?;
    let mut cfg = doc.into_config()?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    eprintln!(
        "config: sigma p = {} n_values = {:?} sample_sizes = {:?} replicas = {} levels = {:?} \
         measures = [{}] seed = {} scale_factor = {}",
        cfg.sigma.dim(),
        cfg.n_values,
        cfg.sample_sizes,
        cfg.replicas,
        cfg.nominal_levels,
        cfg.measures
            .iter()
            .map(|m| m.label())
            .collect::<Vec<_>>()
            .join(", "),
        cfg.seed,
        cfg.scale_factor
    );
    Ok(cfg)
}

fn cmd_size(a: ExperimentArgs) -> Result<()> {
    let cfg = load_experiment(&a)?;
    let rows = empirical_size(&cfg)?;
    let mut out = String::from("measure,n,n1,n2,level,size,mean_s,cv_s\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.measure, r.n, r.n1, r.n2, r.level, r.size, r.mean_s, r.cv_s
        )?;
    }
    fs::write(&a.out, out)?;
    eprintln!("wrote {}", a.out.display());
    Ok(())
}

fn cmd_power(a: ExperimentArgs) -> Result<()> {
    let cfg = load_experiment(&a)?;
    let rows = empirical_power(&cfg)?;
    let mut out = String::from("measure,n_per_sample,power\n");
    for r in rows {
        writeln!(out, "{},{},{}", r.measure, r.n_per_sample, r.power)?;
    }
    fs::write(&a.out, out)?;
    eprintln!("wrote {}", a.out.display());
    Ok(())
}

fn cmd_sensitivity(a: SensitivityArgs) -> Result<()> {
    if a.steps < 2 {
        bail!("--steps must be at least 2");
    }
    let measures = a
        .measures
        .iter()
        .map(|m| Ok(DistanceKind::from_str(m)?))
        .collect::<Result<Vec<_>>>()?;
    let fixed = io::read_params(&a.params)?;
    let grid: Vec<f64> = (0..a.steps)
        .map(|i| a.from + (a.to - a.from) * i as f64 / (a.steps - 1) as f64)
        .collect();
    let vary = match a.vary.as_str() {
        "sigma-entry" => SensitivityVary::SigmaEntry { grid },
        "looks" => SensitivityVary::Looks { grid },
        other => bail!("unknown vary mode `{other}` (expected sigma-entry | looks)"),
    };
    eprintln!(
        "config: sensitivity vary = {} from = {} to = {} steps = {} n = {} measures = {:?}",
        a.vary, a.from, a.to, a.steps, a.n, a.measures
    );
    let points = sensitivity_curve(&fixed, &vary, a.n, &measures)?;
    let mut out = String::from("grid,measure,statistic\n");
    for pt in points {
        match pt.statistics {
            Ok(stats) => {
                for (kind, s) in measures.iter().zip(stats) {
                    writeln!(out, "{},{},{}", pt.value, kind.label(), s)?;
                }
            }
            Err(e) => eprintln!("skipping grid point {}: {e}", pt.value),
        }
    }
    fs::write(&a.out, out)?;
    eprintln!("wrote {}", a.out.display());
    Ok(())
}

fn cmd_cluster(a: ClusterArgs) -> Result<()> {
    let kind = resolve_measure(&a.measure, a.beta)?;
    let init = match a.init.as_str() {
        "farthest-local-means" => InitMethod::FarthestLocalMeans,
        "random-pixels" => InitMethod::RandomPixels,
        other => bail!("unknown init `{other}` (expected farthest-local-means | random-pixels)"),
    };
    eprintln!(
        "config: cluster image = {} k = {} measure = {kind} seed = {} max_iter = {} init = {:?}",
        a.image.display(),
        a.k,
        a.seed,
        a.max_iter,
        init
    );
    let img = io::read_pwif(&a.image)?;
    let state = clustering::kmeans(&img, a.k, kind, a.seed, a.max_iter, init)?;
    let pgm = a.out.with_extension("pgm");
    let csv = a.out.with_extension("csv");
    io::write_labels_pgm(&pgm, &state.labels, img.height(), img.width())?;
    io::write_labels_csv(&csv, &state.labels, img.height(), img.width())?;
    println!(
        "{}",
        serde_json::json!({
            "iterations": state.iterations,
            "converged": state.converged,
            "labels_pgm": pgm.display().to_string(),
            "labels_csv": csv.display().to_string(),
        })
    );
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    eprintln!("config: synth-image seed = {} out = {}", a.seed, a.out.display());
    let (img, truth) = clustering::synth_image(a.seed)?;
    io::write_pwif(&a.out, &img)?;
    let pgm = a.out.with_extension("labels.pgm");
    let csv = a.out.with_extension("labels.csv");
    io::write_labels_pgm(&pgm, &truth, img.height(), img.width())?;
    io::write_labels_csv(&csv, &truth, img.height(), img.width())?;
    eprintln!(
        "wrote {} and ground truth {} / {}",
        a.out.display(),
        pgm.display(),
        csv.display()
    );
    Ok(())
}

/// What kind of document a convert input turned out to be.
enum Detected {
    Pwif,
    ImageText(io::ImageDoc),
    Matrix(io::MatrixDoc),
    Params(io::ParamsDoc),
    SampleSet,
}

fn detect(path: &Path) -> Result<Detected> {
    let bytes = fs::read(path)?;
    if bytes.len() >= 4 && &bytes[0..4] == io::PWIF_MAGIC.as_slice() {
        return Ok(Detected::Pwif);
    }
    let text = String::from_utf8(bytes).context("input is neither PWIF nor UTF-8 text")?;
    let first_line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    if let Ok(v) = serde_json::from_str::<serde_json::Value>(first_line) {
        if v.get("N").is_some() && v.get("height").is_none() && text.lines().count() > 1 {
            return Ok(Detected::SampleSet);
        }
    }
    if let Ok(doc) = serde_json::from_str::<io::ImageDoc>(&text) {
        return Ok(Detected::ImageText(doc));
    }
    if let Ok(doc) = serde_json::from_str::<io::ParamsDoc>(&text) {
        return Ok(Detected::Params(doc));
    }
    if let Ok(doc) = serde_json::from_str::<io::MatrixDoc>(&text) {
        return Ok(Detected::Matrix(doc));
    }
    bail!(
        "{} is not a recognized document (PWIF, image text, matrix, params, or sample set)",
        path.display()
    )
}

fn cmd_convert(a: ConvertArgs) -> Result<()> {
    eprintln!(
        "config: convert input = {} to = {} out = {}",
        a.input.display(),
        a.to,
        a.out.display()
    );
    let detected = detect(&a.input)?;
    match (detected, a.to.as_str()) {
        (Detected::Pwif, "text") => {
            let img = io::read_pwif(&a.input)?;
            io::write_image_text(&a.out, &img)?;
        }
        (Detected::Pwif, "pwif") => {
            let img = io::read_pwif(&a.input)?;
            io::write_pwif(&a.out, &img)?;
        }
        (Detected::ImageText(doc), "pwif") => {
            io::write_pwif(&a.out, &doc.into_image()?)?;
        }
        (Detected::ImageText(doc), "text") => {
            io::write_image_text(&a.out, &doc.into_image()?)?;
        }
        (Detected::Matrix(doc), "text") => {
            io::write_matrix(&a.out, &doc.into_matrix()?)?;
        }
        (Detected::Params(doc), "text") => {
            io::write_params(&a.out, &doc.into_params()?)?;
        }
        (Detected::SampleSet, "text") => {
            let s = io::read_sample_set(&a.input)?;
            io::write_sample_set(&a.out, &s)?;
        }
        (_, "pwif") => bail!("only covariance images have a PWIF form"),
        (_, other) => bail!("unknown target format `{other}` (expected text | pwif)"),
    }
    eprintln!("wrote {}", a.out.display());
    Ok(())
}
