//! Command-line front end: load JSON model files, sample, tabulate
//! densities and Laplace transforms, project onto reward directions, and
//! run the verification suite. Outputs are CSV (data) or JSON/NDJSON
//! (models, check reports) for downstream plotting and diffing.
//!
//! Exit codes: 0 success, 1 validation failure, 2 check failure, 3 I/O.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fracphase::model::{Model, ModelFile};
use fracphase::random::RngStream;
use fracphase::verify::{
    check_kolmogorov, check_laplace, check_projection, check_sampler_agreement, check_tail_index,
    CheckReport, SamplerKind,
};
use fracphase::{Error, Result};

/// Density grids for heavy-tailed models never start exactly at zero: the
/// density diverges like x^{α-1} there, so a requested 0 lower edge is
/// clamped to this floor when α < 1.
const GRID_FLOOR: f64 = 1e-4;

#[derive(Parser)]
#[command(name = "fracphase", about = "Multivariate fractional phase-type toolkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Sampler {
    Path,
    Product,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Fast,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Draw samples and write them as CSV
    Sample {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Sampler::Path)]
        sampler: Sampler,
        /// Output path; `-` streams to standard output
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Tabulate a closed-form density on a grid
    Density {
        #[arg(long)]
        model: PathBuf,
        /// Per-axis `min:max:steps`, comma-separated for two axes
        #[arg(long)]
        grid: String,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Evaluate the (joint) Laplace transform at given arguments
    Laplace {
        #[arg(long)]
        model: PathBuf,
        /// Transform argument, comma-separated; repeatable
        #[arg(long, required = true)]
        theta: Vec<String>,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Project onto a reward direction; emits the reduced model as JSON
    Project {
        #[arg(long)]
        model: PathBuf,
        /// Direction, comma-separated nonnegative weights
        #[arg(long)]
        w: String,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Run verification checks; NDJSON reports, nonzero exit on failure
    Verify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Suite::Fast)]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "-")]
        out: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(RunError::Validation(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(RunError::Io(e)) => {
            eprintln!("i/o error: {e}");
            ExitCode::from(3)
        }
    }
}

enum RunError {
    Validation(Error),
    Io(std::io::Error),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Validation(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

fn load_model(path: &PathBuf) -> std::result::Result<Model, RunError> {
    let text = fs::read_to_string(path)?;
    Ok(ModelFile::from_json(&text)?.build()?)
}

fn write_out(out: &str, content: &str) -> std::result::Result<(), RunError> {
    if out == "-" {
        std::io::stdout().write_all(content.as_bytes())?;
    } else {
        fs::write(out, content)?;
    }
    Ok(())
}

fn parse_floats(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Invalid(format!("{what}: cannot parse '{p}' as a number")))
        })
        .collect()
}

struct Axis {
    min: f64,
    max: f64,
    steps: usize,
}

fn parse_grid(s: &str) -> Result<Vec<Axis>> {
    s.split(',')
        .map(|axis| {
            let parts: Vec<&str> = axis.split(':').collect();
            if parts.len() != 3 {
                return Err(Error::Invalid(format!("grid axis '{axis}' is not min:max:steps")));
            }
            let min: f64 = parts[0]
                .trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("bad grid min '{}'", parts[0])))?;
            let max: f64 = parts[1]
                .trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("bad grid max '{}'", parts[1])))?;
            let steps: usize = parts[2]
                .trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("bad grid steps '{}'", parts[2])))?;
            if !(max > min) || steps < 2 {
                return Err(Error::Invalid(format!("grid axis '{axis}': need max > min, steps >= 2")));
            }
            Ok(Axis { min, max, steps })
        })
        .collect()
}

fn axis_points(a: &Axis, floor: Option<f64>) -> Vec<f64> {
    (0..a.steps)
        .map(|i| {
            let x = a.min + (a.max - a.min) * i as f64 / (a.steps - 1) as f64;
            match floor {
                Some(f) if x < f => f,
                _ => x,
            }
        })
        .collect()
}

fn run(cmd: Command) -> std::result::Result<ExitCode, RunError> {
    match cmd {
        Command::Sample { model, n, seed, sampler, out } => {
            let m = load_model(&model)?;
            let mut rng = RngStream::new(seed, 0);
            let p = m.components();
            let mut csv = String::new();
            if p == 1 {
                csv.push_str("x\n");
            } else {
                let header: Vec<String> = (1..=p).map(|k| format!("y{k}")).collect();
                csv.push_str(&header.join(","));
                csv.push('\n');
            }
            for _ in 0..n {
                let row = draw_row(&m, sampler, &mut rng)?;
                let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
                csv.push_str(&cells.join(","));
                csv.push('\n');
            }
            write_out(&out, &csv)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Density { model, grid, out } => {
            let m = load_model(&model)?;
            let axes = parse_grid(&grid)?;
            let csv = density_table(&m, &axes)?;
            write_out(&out, &csv)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Laplace { model, theta, out } => {
            let m = load_model(&model)?;
            let p = m.components();
            let mut csv = String::new();
            if p == 1 {
                csv.push_str("theta,L\n");
            } else {
                let header: Vec<String> = (1..=p).map(|k| format!("theta{k}")).collect();
                csv.push_str(&header.join(","));
                csv.push_str(",L\n");
            }
            for spec in &theta {
                let th = parse_floats(spec, "--theta")?;
                if th.len() != p {
                    return Err(Error::Invalid(format!(
                        "theta '{spec}' has {} entries, model has {p} components",
                        th.len()
                    ))
                    .into());
                }
                let l = model_laplace(&m, &th)?;
                let mut cells: Vec<String> = th.iter().map(|v| format!("{v}")).collect();
                cells.push(format!("{l}"));
                csv.push_str(&cells.join(","));
                csv.push('\n');
            }
            write_out(&out, &csv)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Project { model, w, out } => {
            let m = load_model(&model)?;
            let weights = parse_floats(&w, "--w")?;
            let d = m.as_mpha().ok_or_else(|| {
                Error::Invalid("project requires a multivariate fractional model".into())
            })?;
            if weights.len() != d.components() {
                return Err(Error::Invalid(format!(
                    "--w has {} entries, model has {} components",
                    weights.len(),
                    d.components()
                ))
                .into());
            }
            let proj = d.project(&weights)?;
            let mut text = ModelFile::from_projection(&proj).to_json();
            text.push('\n');
            write_out(&out, &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { model, suite, seed, out } => {
            let m = load_model(&model)?;
            let reports = run_suite(&m, suite, seed)?;
            let mut text = String::new();
            let mut all_pass = true;
            for r in &reports {
                all_pass &= r.pass;
                text.push_str(&r.to_json());
                text.push('\n');
            }
            write_out(&out, &text)?;
            if all_pass {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(2))
            }
        }
    }
}

fn draw_row(m: &Model, sampler: Sampler, rng: &mut RngStream) -> Result<Vec<f64>> {
    match m {
        Model::Ph(d) => Ok(vec![d.sample_path(rng)?.total]),
        Model::Fph(d) => match sampler {
            Sampler::Path => Ok(vec![d.sample_path(rng)?.total]),
            Sampler::Product => Ok(vec![d.sample_product(rng)?]),
        },
        Model::Mph(d) => d.sample(rng),
        Model::Mpha { dist, nu } => {
            let y = match sampler {
                Sampler::Path => dist.sample_path(rng)?,
                Sampler::Product => dist.sample_product(rng)?,
            };
            Ok(match nu {
                // power transform: componentwise y ↦ y^{1/ν}
                Some(nv) => y
                    .iter()
                    .zip(nv.exponents())
                    .map(|(&v, &e)| if v == 0.0 { 0.0 } else { v.powf(1.0 / e) })
                    .collect(),
                None => y,
            })
        }
        Model::Bivariate(b) => match sampler {
            Sampler::Path => b.dist().sample_path(rng),
            Sampler::Product => b.dist().sample_product(rng),
        },
    }
}

fn model_laplace(m: &Model, theta: &[f64]) -> Result<f64> {
    match m {
        Model::Ph(d) => d.laplace(theta[0]),
        Model::Fph(d) => d.laplace(theta[0]),
        Model::Mph(d) => d.laplace(theta),
        Model::Mpha { dist, nu } => {
            if nu.is_some() {
                return Err(Error::NoClosedForm(
                    "Laplace transform of a power-transformed model".into(),
                ));
            }
            dist.laplace(theta)
        }
        Model::Bivariate(b) => b.dist().laplace(theta),
    }
}

fn density_table(m: &Model, axes: &[Axis]) -> Result<String> {
    match m {
        Model::Ph(d) => {
            let [a] = axes else {
                return Err(Error::Invalid("univariate model needs one grid axis".into()));
            };
            let mut csv = String::from("x,f\n");
            for x in axis_points(a, None) {
                csv.push_str(&format!("{x},{}\n", d.density(x)?));
            }
            Ok(csv)
        }
        Model::Fph(d) => {
            let floor = (d.alpha() < 1.0).then_some(GRID_FLOOR);
            let [a] = axes else {
                return Err(Error::Invalid("univariate model needs one grid axis".into()));
            };
            let mut csv = String::from("x,f\n");
            for x in axis_points(a, floor) {
                csv.push_str(&format!("{x},{}\n", d.density(x)?));
            }
            Ok(csv)
        }
        Model::Mpha { dist, nu } => {
            if nu.is_some() {
                return Err(Error::NoClosedForm(
                    "density table of a power-transformed model".into(),
                ));
            }
            if dist.components() != 1 {
                return Err(Error::NoClosedForm(
                    "joint density of a general multivariate model (use a bivariate block model)"
                        .into(),
                ));
            }
            let proj = dist.project(&[1.0])?;
            let floor = (dist.alpha() < 1.0).then_some(GRID_FLOOR);
            let [a] = axes else {
                return Err(Error::Invalid("univariate model needs one grid axis".into()));
            };
            let mut csv = String::from("x,f\n");
            for x in axis_points(a, floor) {
                csv.push_str(&format!("{x},{}\n", proj.dist.density(x)?));
            }
            Ok(csv)
        }
        Model::Mph(_) => Err(Error::NoClosedForm(
            "joint density of a general multivariate model".into(),
        )),
        Model::Bivariate(b) => {
            let [ax, ay] = axes else {
                return Err(Error::Invalid("bivariate model needs two grid axes".into()));
            };
            let floor = (b.alpha() < 1.0).then_some(GRID_FLOOR);
            let xs = axis_points(ax, floor);
            let ys = axis_points(ay, floor);
            let mut csv = String::from("x,y,f\n");
            for &x in &xs {
                for &y in &ys {
                    let (_, f) = b.density(x, y)?;
                    csv.push_str(&format!("{x},{y},{f}\n"));
                }
            }
            Ok(csv)
        }
    }
}

fn run_suite(m: &Model, suite: Suite, seed: u64) -> Result<Vec<CheckReport>> {
    let mut reports = Vec::new();
    // deterministic fractional-Kolmogorov check where a fractional view exists
    let frac = match m {
        Model::Fph(d) => Some(d.clone()),
        Model::Mpha { dist, .. } => Some(dist.frac().clone()),
        Model::Bivariate(b) => Some(b.dist().frac().clone()),
        _ => None,
    };
    if let Some(f) = &frac {
        if f.alpha() < 1.0 {
            reports.push(check_kolmogorov(f, &[0.5, 1.0])?);
        }
    }
    let Some(d) = m.as_mpha() else {
        if reports.is_empty() {
            return Err(Error::Invalid(
                "verify requires a fractional model (fph, mpha, feedforward, bivariate, preset)"
                    .into(),
            ));
        }
        return Ok(reports);
    };
    let p = d.components();
    // transform-argument grid: axes, diagonal and a mixed point
    let mut grid: Vec<Vec<f64>> = Vec::new();
    for k in 0..p {
        let mut th = vec![0.0; p];
        th[k] = 1.0;
        grid.push(th);
    }
    grid.push(vec![0.5; p]);
    grid.push(vec![1.0; p]);
    grid.push((0..p).map(|k| 0.5 + k as f64).collect());
    grid.push(vec![2.0; p]);
    let (n_laplace, n_ks, n_proj) = match suite {
        Suite::Fast => (20_000, 10_000, 20_000),
        Suite::Full => (200_000, 10_000, 100_000),
    };
    reports.push(check_laplace(d, SamplerKind::Path, &grid, n_laplace, seed)?);
    reports.push(check_laplace(d, SamplerKind::Product, &grid, n_laplace, seed)?);
    reports.push(check_sampler_agreement(d, n_ks, seed)?);
    reports.push(check_projection(d, &vec![1.0; p], n_proj, seed)?);
    if suite == Suite::Full {
        reports.push(check_tail_index(d, 0, 1_000_000, seed)?);
    }
    Ok(reports)
}
