//! The `vbdist` command line: `check`, `coords` and `regularize`.
//!
//! Exit codes are 0 on success, 1 when an invariant fails and 2 for usage,
//! parse or input errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::distributions::pair;
use crate::error::{Error, Result};
use crate::geometry::{TestDensity, MIN_NODES};
use crate::random::DEFAULT_SEED;
use crate::scene::{Scene, SceneSpec};
use crate::smoothing::{self, MollifierRegistry};
use crate::suite::{Context, InvariantRegistry, Report, DEFAULT_RESOLUTION};
use crate::vdist::{hom_to_coord, nu_tensor_to_hom, CoordRep};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "vbdist", version, about = "Vector-bundle-valued distributions and smoothing operators")]
struct Cli {
    /// RNG seed, decimal or 0x-prefixed hex.
    #[arg(long, global = true, default_value = "0x5EED", value_parser = parse_seed)]
    seed: u64,
    /// Nodes per axis when a scene leaves it open, and for the check suite.
    #[arg(long, global = true, default_value_t = DEFAULT_RESOLUTION)]
    resolution: usize,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// JSON scene file.
    #[arg(long, global = true)]
    scene: Option<PathBuf>,
    /// Tolerance override, NAME=VALUE; NAME `*` applies to every invariant.
    #[arg(long = "tol", global = true, value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the invariant suites and write report.json.
    Check {
        /// Run only the named invariants.
        #[arg(long)]
        only: Vec<String>,
        /// List invariant names and default tolerances, then exit.
        #[arg(long)]
        list: bool,
    },
    /// Pair each coordinate of the scene's distribution with the hat battery.
    Coords,
    /// Mollify the scene's distribution at each width.
    Regularize {
        /// Comma-separated mollifier widths.
        #[arg(long, default_value = "0.4,0.2,0.1", value_parser = parse_eps)]
        eps: EpsList,
        /// Mollifier family.
        #[arg(long, default_value = "gaussian")]
        kernel: String,
        /// Also write the kernel for each width as a product-grid CSV.
        #[arg(long)]
        dump_kernel: bool,
    },
}

#[derive(Debug, Clone)]
struct EpsList(Vec<f64>);

fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("bad seed {s:?}: {e}"))
}

fn parse_tol(s: &str) -> std::result::Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got {s:?}"))?;
    let value: f64 = value.trim().parse().map_err(|e| format!("bad tolerance {value:?}: {e}"))?;
    if !(value > 0.0 && value.is_finite()) {
        return Err(format!("tolerance must be positive and finite, got {value}"));
    }
    Ok((name.trim().to_string(), value))
}

fn parse_eps(s: &str) -> std::result::Result<EpsList, String> {
    let parts = s.split(',').map(str::trim).filter(|p| !p.is_empty());
    let values = parts
        .map(|p| p.parse::<f64>().map_err(|e| format!("bad width {p:?}: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if let Some(bad) = values.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(format!("widths must be positive, got {bad}"));
    }
    Ok(EpsList(values))
}

/// Everything a subcommand needs, after parsing.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub resolution: usize,
    pub tolerances: Vec<(String, f64)>,
    pub out: PathBuf,
    pub scene: Option<SceneSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, resolution: DEFAULT_RESOLUTION, tolerances: Vec::new(), out: PathBuf::from("out"), scene: None }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.resolution < MIN_NODES {
            return Err(Error::TooFewNodes { min: MIN_NODES, got: self.resolution });
        }
        Ok(())
    }

    fn context(&self) -> Context {
        Context { seed: self.seed, resolution: self.resolution }
    }

    fn scene(&self) -> Result<Option<Scene>> {
        self.scene.as_ref().map(|s| s.build(self.resolution)).transpose()
    }

    fn require_scene(&self) -> Result<Scene> {
        self.scene()?.ok_or_else(|| Error::Scene("this command needs --scene FILE.json".into()))
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

/// Runs the suites (plus the scene invariants when a scene is given) and
/// writes `report.json` into the output directory.
pub fn cmd_check(config: &RunConfig, only: &[String]) -> Result<Report> {
    config.validate()?;
    let registry = match config.scene()? {
        Some(scene) => InvariantRegistry::for_scene(&scene),
        None => InvariantRegistry::with_defaults(),
    };
    let mut overrides = BTreeMap::new();
    for (name, tol) in &config.tolerances {
        if name == "*" {
            for n in registry.names() {
                overrides.insert(n.to_string(), *tol);
            }
        } else {
            overrides.insert(name.clone(), *tol);
        }
    }
    let report = registry.run(&config.context(), &overrides, only)?;
    write(&config.out, "report.json", &report.to_json())?;
    Ok(report)
}

/// The hat-battery table for one coordinate: `node,x[,x1],pairing`.
fn coordinate_csv(u: &crate::distributions::ScalarDistribution) -> Result<String> {
    let base = u.base();
    let mut out = String::from(if base.dim() == 1 { "node,x,pairing\n" } else { "node,x0,x1,pairing\n" });
    for node in (0..base.len()).filter(|&i| !base.in_boundary_layer(i)) {
        let value = pair(u, &TestDensity::hat(base, node)?)?;
        let mut row = vec![node.to_string()];
        row.extend(base.node(node).iter().map(|&x| crate::format_float(x)));
        row.push(crate::format_float(value));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Writes `coord_<i>.csv` for every ambient coordinate of the scene's
/// distribution and returns the coordinates.
pub fn cmd_coords(config: &RunConfig) -> Result<CoordRep> {
    config.validate()?;
    let scene = config.require_scene()?;
    let coords = hom_to_coord(&nu_tensor_to_hom(&scene.vdist)?)?;
    for (i, c) in coords.coords().iter().enumerate() {
        write(&config.out, &format!("coord_{i}.csv"), &coordinate_csv(c)?)?;
    }
    Ok(coords)
}

/// Result of [`cmd_regularize`]: one row per width, with the sup error when
/// the scene's distribution is a smooth section.
#[derive(Debug, Clone, PartialEq)]
pub struct Regularization {
    pub eps: Vec<f64>,
    pub errors: Option<Vec<f64>>,
}

/// Smooths the scene's distribution at each width and writes
/// `smoothed_eps_<ε>.csv` plus `convergence.csv`. Without a smooth
/// reference the table carries the widths only.
pub fn cmd_regularize(config: &RunConfig, eps: &[f64], kernel: &str, dump_kernel: bool) -> Result<Regularization> {
    config.validate()?;
    let scene = config.require_scene()?;
    let registry = MollifierRegistry::default();
    let family = registry.get(kernel)?;
    let u = &scene.vdist;
    let reference = u.as_section();
    let mut errors = Vec::with_capacity(eps.len());
    for &e in eps {
        let smoothed = smoothing::regularize(family, e, u)?;
        write(&config.out, &format!("smoothed_eps_{e}.csv"), &smoothed.to_csv())?;
        if dump_kernel {
            let k = smoothing::mollifier_with(family, &scene.base, e)?;
            write(&config.out, &format!("kernel_eps_{e}.csv"), &k.to_csv())?;
        }
        if let Some(r) = &reference {
            errors.push(smoothed.distance(r)?);
        }
    }
    let table = match &reference {
        Some(_) => smoothing::convergence_csv(&eps.iter().copied().zip(errors.iter().copied()).collect::<Vec<_>>()),
        None => eps.iter().fold(String::from("eps\n"), |acc, e| acc + &crate::format_float(*e) + "\n"),
    };
    write(&config.out, "convergence.csv", &table)?;
    Ok(Regularization { eps: eps.to_vec(), errors: reference.map(|_| errors) })
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("vbdist: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    let scene = cli
        .scene
        .as_deref()
        .map(|p| SceneSpec::load(p).map_err(|e| Error::Scene(format!("{}: {e}", p.display()))))
        .transpose()?;
    let config = RunConfig { seed: cli.seed, resolution: cli.resolution, tolerances: cli.tol, out: cli.out, scene };
    match cli.command {
        Command::Check { only, list } => {
            if list {
                let registry = InvariantRegistry::with_defaults();
                for name in registry.names() {
                    let inv = registry.get(name)?;
                    println!("{name}\t{:e}\t{}", inv.tolerance(), inv.description());
                }
                return Ok(EXIT_OK);
            }
            let report = cmd_check(&config, &only)?;
            print!("{}", report.to_json());
            for o in report.failures() {
                eprintln!("FAILED {}: deviation {:?} > tolerance {:e}{}", o.name, o.max_deviation, o.tolerance,
                    o.error.as_ref().map(|e| format!(" ({e})")).unwrap_or_default());
            }
            Ok(if report.passed { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Coords => {
            let coords = cmd_coords(&config)?;
            eprintln!("wrote {} coordinate tables to {}", coords.coords().len(), config.out.display());
            Ok(EXIT_OK)
        }
        Command::Regularize { eps, kernel, dump_kernel } => {
            let result = cmd_regularize(&config, &eps.0, &kernel, dump_kernel)?;
            if let Some(errors) = &result.errors {
                for (e, err) in result.eps.iter().zip(errors) {
                    println!("eps {e}: sup error {err:e}");
                }
            }
            Ok(EXIT_OK)
        }
    }
}
