//! Command-line front end.
//!
//! Every data output starts with `#` manifest lines recording the tool
//! version, the resolved parameters, and a command line that reproduces it.

pub mod files;

use std::fmt::Display;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Deployment, Domain, Signature};
use crate::montecarlo::{self, format_sig, Metric, TrialConfig};
use crate::rss::{self, PathLossParams};
use crate::sigmap::{build_signature_map, localize, GridSpec};

pub const TOOL: &str = "beaconloc";

#[derive(Debug, Parser)]
#[command(name = TOOL, version, about = "Binary proximity localization and uncertainty sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Localize a target from a binary reading against a deployment file.
    Localize(LocalizeArgs),
    /// Monte Carlo sweep over radius or beacon count.
    Sweep(SweepArgs),
    /// Dump every grid cell's signature.
    Dump(DumpArgs),
    /// Evaluate the log-distance path-loss model.
    Rss(RssArgs),
    /// Generate a random deployment file.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 100.0)]
    pub width: f64,
    #[arg(long, default_value_t = 100.0)]
    pub height: f64,
    #[arg(long, default_value_t = GridSpec::DEFAULT_CELL_SIZE)]
    pub cell_size: f64,
}

impl GridArgs {
    fn domain(&self) -> Result<Domain> {
        Ok(Domain::new(self.width, self.height)?)
    }

    fn grid(&self) -> Result<GridSpec> {
        Ok(GridSpec::new(self.domain()?, self.cell_size)?)
    }

    fn flags(&self) -> Vec<(&'static str, String)> {
        vec![
            ("width", self.width.to_string()),
            ("height", self.height.to_string()),
            ("cell-size", self.cell_size.to_string()),
        ]
    }
}

#[derive(Debug, Args)]
pub struct LocalizeArgs {
    #[arg(long)]
    pub deployment: PathBuf,
    /// '0'/'1' string, one character per beacon row.
    #[arg(long, allow_hyphen_values = true)]
    pub reading: String,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepMode {
    Radius,
    Beacons,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Expected,
    Sampled,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Expected => Metric::ExpectedAreaWeighted,
            MetricArg::Sampled => Metric::SampledTarget,
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub mode: SweepMode,
    /// Beacon count (radius mode).
    #[arg(long)]
    pub beacons: Option<usize>,
    /// Inclusive `start:stop:step` (radius mode).
    #[arg(long, allow_hyphen_values = true)]
    pub radii: Option<String>,
    /// Common beacon radius (beacons mode).
    #[arg(long)]
    pub radius: Option<f64>,
    /// Comma-separated beacon counts (beacons mode).
    #[arg(long, value_delimiter = ',')]
    pub counts: Option<Vec<usize>>,
    #[arg(long, default_value_t = TrialConfig::DEFAULT_TRIALS)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = MetricArg::Expected)]
    pub metric: MetricArg,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct DumpArgs {
    #[arg(long)]
    pub deployment: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("query").required(true).args(["threshold_dbm", "distance"])))]
pub struct RssArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub p_d0_dbm: f64,
    #[arg(long, default_value_t = 1.0)]
    pub d0: f64,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    /// Print the sensing radius for this detection threshold.
    #[arg(long, allow_hyphen_values = true)]
    pub threshold_dbm: Option<f64>,
    /// Print the received power at this distance (one shadowing draw when sigma > 0).
    #[arg(long)]
    pub distance: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub count: usize,
    #[arg(long)]
    pub radius: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 100.0)]
    pub width: f64,
    #[arg(long, default_value_t = 100.0)]
    pub height: f64,
}

/// Resolved parameters of one invocation, rendered as `#` comment lines.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: &'static str,
    pub params: Vec<(&'static str, String)>,
    pub seed: Option<u64>,
    pub version: &'static str,
}

impl RunManifest {
    fn new(command: &'static str, seed: Option<u64>) -> Self {
        Self {
            command,
            params: Vec::new(),
            seed,
            version: env!("CARGO_PKG_VERSION"),
        }
    }

    fn param(mut self, name: &'static str, value: impl Display) -> Self {
        self.params.push((name, value.to_string()));
        self
    }

    fn params(mut self, extra: Vec<(&'static str, String)>) -> Self {
        self.params.extend(extra);
        self
    }

    pub fn rerun_command(&self) -> String {
        let mut cmd = format!("{TOOL} {}", self.command);
        for (k, v) in &self.params {
            cmd.push_str(&format!(" --{k} {}", shell_word(v)));
        }
        if let Some(seed) = self.seed {
            cmd.push_str(&format!(" --seed {seed}"));
        }
        cmd
    }

    pub fn write<W: Write + ?Sized>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "# {TOOL} {}", self.version)?;
        writeln!(out, "# command: {}", self.command)?;
        if let Some(seed) = self.seed {
            writeln!(out, "# seed: {seed}")?;
        }
        for (k, v) in &self.params {
            writeln!(out, "# param: {k}={v}")?;
        }
        writeln!(out, "# rerun: {}", self.rerun_command())
    }
}

fn shell_word(s: &str) -> String {
    if !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || "-_.:/,+".contains(c))
    {
        s.to_string()
    } else {
        format!("'{}'", s.replace('\'', r"'\''"))
    }
}

fn load_deployment(path: &Path, grid: &GridArgs) -> Result<Deployment> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    files::read_deployment(file, grid.domain()?)
        .with_context(|| format!("reading deployment {}", path.display()))
}

fn with_output<F>(path: Option<&Path>, stdout: &mut dyn Write, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match path {
        Some(p) => {
            let file = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            let mut w = BufWriter::new(file);
            body(&mut w)?;
            w.flush()
                .with_context(|| format!("writing {}", p.display()))?;
            Ok(())
        }
        None => body(stdout),
    }
}

pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Localize(a) => cmd_localize(&a, stdout, stderr),
        Command::Sweep(a) => cmd_sweep(&a, stdout, stderr),
        Command::Dump(a) => cmd_dump(&a, stdout),
        Command::Rss(a) => cmd_rss(&a, stdout),
        Command::Gen(a) => cmd_gen(&a, stdout),
    }
}

pub fn cmd_localize(
    args: &LocalizeArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<()> {
    let reading: Signature = args
        .reading
        .parse()
        .with_context(|| format!("parsing reading {:?}", args.reading))?;
    let grid = args.grid.grid()?;
    let dep = load_deployment(&args.deployment, &args.grid)?;
    let map = build_signature_map(&dep, &grid)?;
    let result = localize(&map, &reading)?;

    RunManifest::new("localize", None)
        .param("deployment", args.deployment.display())
        .param("reading", &args.reading)
        .params(args.grid.flags())
        .write(stdout)?;
    writeln!(stdout, "uncertainty_pct,area,centroid_x,centroid_y,cells")?;
    let (cx, cy) = result.centroid.map_or((f64::NAN, f64::NAN), |c| (c.x, c.y));
    writeln!(
        stdout,
        "{},{},{},{},{}",
        format_sig(result.uncertainty_pct, 6),
        format_sig(result.area, 6),
        format_sig(cx, 6),
        format_sig(cy, 6),
        result.cells.len()
    )?;
    if result.is_empty() {
        writeln!(
            stderr,
            "warning: no grid cell carries reading {:?}",
            args.reading
        )?;
    }
    Ok(())
}

pub fn cmd_sweep(args: &SweepArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let grid = args.grid.grid()?;
    let metric = Metric::from(args.metric);
    let mut manifest = RunManifest::new("sweep", Some(args.seed)).param(
        "mode",
        match args.mode {
            SweepMode::Radius => "radius",
            SweepMode::Beacons => "beacons",
        },
    );
    let result = match args.mode {
        SweepMode::Radius => {
            let (Some(beacons), Some(radii)) = (args.beacons, args.radii.as_deref()) else {
                bail!("radius mode needs --beacons and --radii");
            };
            let values = files::parse_range(radii)?;
            manifest = manifest.param("beacons", beacons).param("radii", radii);
            let base = TrialConfig {
                grid,
                beacon_count: beacons,
                radius: values[0],
                trials: args.trials,
                seed: args.seed,
                metric,
            };
            montecarlo::sweep_radius(&base, &values)?
        }
        SweepMode::Beacons => {
            let (Some(radius), Some(counts)) = (args.radius, args.counts.as_deref()) else {
                bail!("beacons mode needs --radius and --counts");
            };
            let joined = counts
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",");
            manifest = manifest.param("radius", radius).param("counts", joined);
            let base = TrialConfig {
                grid,
                beacon_count: counts.first().copied().unwrap_or(1).max(1),
                radius,
                trials: args.trials,
                seed: args.seed,
                metric,
            };
            montecarlo::sweep_beacons(&base, counts)?
        }
    };
    let manifest = manifest
        .param("trials", args.trials)
        .param("metric", metric)
        .params(args.grid.flags());

    let to_file = args.output.is_some();
    with_output(args.output.as_deref(), stdout, |w| {
        manifest.write(w)?;
        result.write_csv(w)?;
        Ok(())
    })?;

    let best = result.optimum();
    let line = format!(
        "optimum: beacons={} radius={} mean_uncertainty_pct={}",
        best.beacon_count,
        format_sig(best.radius, 6),
        format_sig(best.mean_uncertainty_pct, 6)
    );
    // keep stdout pure CSV when the CSV itself goes there
    if to_file {
        writeln!(stdout, "{line}")?;
    } else {
        writeln!(stderr, "{line}")?;
    }
    Ok(())
}

pub fn cmd_dump(args: &DumpArgs, stdout: &mut dyn Write) -> Result<()> {
    let grid = args.grid.grid()?;
    let dep = load_deployment(&args.deployment, &args.grid)?;
    let map = build_signature_map(&dep, &grid)?;
    let manifest = RunManifest::new("dump", None)
        .param("deployment", args.deployment.display())
        .params(args.grid.flags());
    with_output(args.output.as_deref(), stdout, |w| {
        manifest.write(w)?;
        files::write_signature_dump(w, &map)?;
        Ok(())
    })
}

/// Prints a single number: the radius for `--threshold-dbm`, or the received power at `--distance`.
pub fn cmd_rss(args: &RssArgs, stdout: &mut dyn Write) -> Result<()> {
    let p = PathLossParams::new(args.p_d0_dbm, args.d0, args.gamma, args.sigma)?;
    let value = match (args.threshold_dbm, args.distance) {
        (Some(t), None) => rss::radius_from_threshold(&p, t)?,
        (None, Some(d)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let shadow = rss::sample_shadow(&p, &mut rng);
            rss::rss_at(&p, d, shadow)?
        }
        _ => bail!("give exactly one of --threshold-dbm or --distance"),
    };
    writeln!(stdout, "{value}")?;
    Ok(())
}

pub fn cmd_gen(args: &GenArgs, stdout: &mut dyn Write) -> Result<()> {
    let domain = Domain::new(args.width, args.height)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let dep = montecarlo::random_deployment(&domain, args.count, args.radius, &mut rng)?;
    let manifest = RunManifest::new("gen", Some(args.seed))
        .param("count", args.count)
        .param("radius", args.radius)
        .param("width", args.width)
        .param("height", args.height);
    with_output(args.output.as_deref(), stdout, |w| {
        manifest.write(w)?;
        files::write_deployment(w, &dep)?;
        Ok(())
    })
}
