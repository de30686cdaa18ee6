//! Random deployments, repeated trials, and radius / beacon-count sweeps.
//!
//! Every trial owns its own ChaCha8 stream seeded from a mixed 64-bit seed,
//! so trials can run on any number of threads and still aggregate to the
//! same bits. Seeds are derived as:
//!
//! * sweep point: `mix(master, key)`, where `key` is the radius bit pattern
//!   for radius sweeps and the beacon count for beacon sweeps;
//! * trial: `mix(point_seed, trial_index)`.
//!
//! A standalone [`run_trials`] uses `cfg.seed` as its point seed. Rerunning
//! one sweep point alone therefore reproduces it exactly.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{signature_at, Beacon, Deployment, Domain, GeometryError, Point};
use crate::sigmap::{
    build_signature_map, expected_uncertainty, uncertainty_for_reading, GridError, GridSpec,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonteCarloError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid trial configuration: {0}")]
    InvalidConfig(String),
    #[error("sweep list is empty")]
    EmptySweep,
    #[error("sweep values must be strictly increasing")]
    NotIncreasing,
}

/// How one trial's uncertainty is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    /// Area-weighted mean over a uniformly random target; deterministic per deployment.
    #[default]
    ExpectedAreaWeighted,
    /// Uncertainty of the reading at one uniformly drawn target point.
    SampledTarget,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::ExpectedAreaWeighted => "expected",
            Metric::SampledTarget => "sampled",
        })
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "expected" | "expected_area_weighted" => Ok(Metric::ExpectedAreaWeighted),
            "sampled" | "sampled_target" => Ok(Metric::SampledTarget),
            other => Err(format!("unknown metric {other:?} (expected | sampled)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialConfig {
    pub grid: GridSpec,
    pub beacon_count: usize,
    pub radius: f64,
    pub trials: usize,
    pub seed: u64,
    pub metric: Metric,
}

impl TrialConfig {
    pub const DEFAULT_TRIALS: usize = 500;

    /// Default 100 x 100 domain, unit cells, 500 trials, seed 0.
    pub fn new(beacon_count: usize, radius: f64) -> Self {
        Self {
            grid: GridSpec::new(Domain::default(), GridSpec::DEFAULT_CELL_SIZE)
                .expect("default grid is valid"),
            beacon_count,
            radius,
            trials: Self::DEFAULT_TRIALS,
            seed: 0,
            metric: Metric::default(),
        }
    }

    pub fn domain(&self) -> &Domain {
        self.grid.domain()
    }

    pub fn validate(&self) -> Result<(), MonteCarloError> {
        if self.trials == 0 {
            return Err(MonteCarloError::InvalidConfig("trials must be >= 1".into()));
        }
        if self.beacon_count == 0 {
            return Err(MonteCarloError::InvalidConfig(
                "beacon count must be >= 1".into(),
            ));
        }
        if !(self.radius.is_finite() && self.radius >= 0.0) {
            return Err(GeometryError::InvalidRadius(self.radius).into());
        }
        Ok(())
    }
}

/// SplitMix64 finalizer over `a` combined with `b`.
pub fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a
        .wrapping_add(b.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `count` beacons i.i.d. uniform over the domain, all with `radius`.
pub fn random_deployment<R: Rng + ?Sized>(
    domain: &Domain,
    count: usize,
    radius: f64,
    rng: &mut R,
) -> Result<Deployment, GeometryError> {
    let beacons = (0..count)
        .map(|_| {
            let p = Point {
                x: rng.random_range(0.0..domain.width()),
                y: rng.random_range(0.0..domain.height()),
            };
            Beacon::new(p, radius)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Deployment::new(*domain, beacons)
}

/// Sample statistics of per-trial uncertainty values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialStats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (N − 1); 0 for a single sample.
    pub std: f64,
    /// `std / mean`; `None` when the mean is 0.
    pub cov: Option<f64>,
}

impl TrialStats {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        assert!(n > 0, "statistics need at least one sample");
        let mean = samples.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            let ss: f64 = samples.iter().map(|v| (v - mean) * (v - mean)).sum();
            (ss / (n - 1) as f64).sqrt()
        };
        let cov = (mean > 0.0).then(|| std / mean);
        Self { n, mean, std, cov }
    }

    pub fn is_single_sample(&self) -> bool {
        self.n == 1
    }
}

fn trial_value(cfg: &TrialConfig, trial: usize) -> Result<f64, MonteCarloError> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, trial as u64));
    let domain = cfg.domain();
    let dep = random_deployment(domain, cfg.beacon_count, cfg.radius, &mut rng)?;
    let map = build_signature_map(&dep, &cfg.grid)?;
    Ok(match cfg.metric {
        Metric::ExpectedAreaWeighted => expected_uncertainty(&map),
        Metric::SampledTarget => {
            let target = Point {
                x: rng.random_range(0.0..domain.width()),
                y: rng.random_range(0.0..domain.height()),
            };
            uncertainty_for_reading(&map, &signature_at(&dep, &target))?
        }
    })
}

/// Per-trial uncertainty values in trial-index order.
pub fn trial_values(cfg: &TrialConfig) -> Result<Vec<f64>, MonteCarloError> {
    cfg.validate()?;
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| trial_value(cfg, t))
        .collect()
}

pub fn run_trials(cfg: &TrialConfig) -> Result<TrialStats, MonteCarloError> {
    Ok(TrialStats::from_samples(&trial_values(cfg)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub beacon_count: usize,
    pub radius: f64,
    pub trials: usize,
    pub mean_uncertainty_pct: f64,
    pub std_uncertainty_pct: f64,
    pub cov: Option<f64>,
}

impl SweepRecord {
    fn new(cfg: &TrialConfig, stats: TrialStats) -> Self {
        Self {
            beacon_count: cfg.beacon_count,
            radius: cfg.radius,
            trials: cfg.trials,
            mean_uncertainty_pct: stats.mean,
            std_uncertainty_pct: stats.std,
            cov: stats.cov,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub records: Vec<SweepRecord>,
    optimum: usize,
}

/// Index of the record with the smallest mean; ties go to the smaller radius,
/// then the smaller beacon count.
pub fn optimum_index(records: &[SweepRecord]) -> Option<usize> {
    (0..records.len()).min_by(|&a, &b| {
        let (ra, rb) = (&records[a], &records[b]);
        ra.mean_uncertainty_pct
            .total_cmp(&rb.mean_uncertainty_pct)
            .then(ra.radius.total_cmp(&rb.radius))
            .then(ra.beacon_count.cmp(&rb.beacon_count))
    })
}

impl SweepResult {
    pub fn from_records(records: Vec<SweepRecord>) -> Result<Self, MonteCarloError> {
        let optimum = optimum_index(&records).ok_or(MonteCarloError::EmptySweep)?;
        Ok(Self { records, optimum })
    }

    pub fn optimum(&self) -> &SweepRecord {
        &self.records[self.optimum]
    }

    /// Sweep CSV: fixed header, one row per point, then an `# optimum:` line.
    pub fn write_csv<W: Write + ?Sized>(&self, out: &mut W) -> io::Result<()> {
        writeln!(
            out,
            "beacons,radius,trials,mean_uncertainty_pct,std_uncertainty_pct,cov"
        )?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.beacon_count,
                format_sig(r.radius, 6),
                r.trials,
                format_sig(r.mean_uncertainty_pct, 6),
                format_sig(r.std_uncertainty_pct, 6),
                r.cov
                    .map_or_else(|| "NaN".to_string(), |c| format_sig(c, 6)),
            )?;
        }
        let best = self.optimum();
        writeln!(
            out,
            "# optimum: beacons={},radius={}",
            best.beacon_count,
            format_sig(best.radius, 6)
        )?;
        if self.records.iter().any(|r| r.trials == 1) {
            writeln!(out, "# note: single-trial points report std=0 and cov=0")?;
        }
        Ok(())
    }
}

fn strictly_increasing<T: PartialOrd>(values: &[T]) -> Result<(), MonteCarloError> {
    if values.is_empty() {
        return Err(MonteCarloError::EmptySweep);
    }
    if values
        .windows(2)
        .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
    {
        return Err(MonteCarloError::NotIncreasing);
    }
    Ok(())
}

fn sweep(points: Vec<TrialConfig>) -> Result<SweepResult, MonteCarloError> {
    let records = points
        .iter()
        .map(|cfg| Ok(SweepRecord::new(cfg, run_trials(cfg)?)))
        .collect::<Result<Vec<_>, MonteCarloError>>()?;
    SweepResult::from_records(records)
}

pub fn sweep_radius(base: &TrialConfig, radii: &[f64]) -> Result<SweepResult, MonteCarloError> {
    strictly_increasing(radii)?;
    let points = radii
        .iter()
        .map(|&radius| TrialConfig {
            radius,
            seed: mix_seed(base.seed, radius.to_bits()),
            ..*base
        })
        .collect();
    sweep(points)
}

pub fn sweep_beacons(base: &TrialConfig, counts: &[usize]) -> Result<SweepResult, MonteCarloError> {
    strictly_increasing(counts)?;
    if counts[0] == 0 {
        return Err(MonteCarloError::InvalidConfig(
            "beacon count must be >= 1".into(),
        ));
    }
    let points = counts
        .iter()
        .map(|&beacon_count| TrialConfig {
            beacon_count,
            seed: mix_seed(base.seed, beacon_count as u64),
            ..*base
        })
        .collect();
    sweep(points)
}

/// Shortest of fixed or exponent notation with `digits` significant digits,
/// trailing zeros removed (C `%.6g` for `digits = 6`).
pub fn format_sig(v: f64, digits: usize) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(beacons: usize, radius: f64, trials: usize) -> TrialConfig {
        TrialConfig {
            trials,
            seed: 42,
            ..TrialConfig::new(beacons, radius)
        }
    }

    #[test]
    fn statistics_kernel() {
        let s = TrialStats::from_samples(&[1.0, 2.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.std, 1.0);
        assert_eq!(s.cov, Some(0.5));

        let one = TrialStats::from_samples(&[7.5]);
        assert!(one.is_single_sample());
        assert_eq!((one.std, one.cov), (0.0, Some(0.0)));

        let zero = TrialStats::from_samples(&[0.0, 0.0]);
        assert_eq!(zero.cov, None);
    }

    #[test]
    fn empty_and_seeded_deployments() {
        let d = Domain::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(random_deployment(&d, 0, 5.0, &mut rng).unwrap().is_empty());

        let a = random_deployment(&d, 16, 5.0, &mut ChaCha8Rng::seed_from_u64(99)).unwrap();
        let b = random_deployment(&d, 16, 5.0, &mut ChaCha8Rng::seed_from_u64(99)).unwrap();
        assert_eq!(a, b);
        assert!(a.beacons().iter().all(|b| b.radius == 5.0));
    }

    #[test]
    fn deployment_is_uniform_per_axis() {
        let d = Domain::default();
        let dep = random_deployment(&d, 10_000, 1.0, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let n = dep.len() as f64;
        let mx = dep.beacons().iter().map(|b| b.position.x).sum::<f64>() / n;
        let my = dep.beacons().iter().map(|b| b.position.y).sum::<f64>() / n;
        assert!((mx - 50.0).abs() < 1.0, "{mx}");
        assert!((my - 50.0).abs() < 1.0, "{my}");
    }

    #[test]
    fn zero_radius_gives_full_uncertainty() {
        for metric in [Metric::ExpectedAreaWeighted, Metric::SampledTarget] {
            let cfg = TrialConfig {
                metric,
                ..quick(6, 0.0, 20)
            };
            let s = run_trials(&cfg).unwrap();
            assert_eq!((s.mean, s.std, s.cov), (100.0, 0.0, Some(0.0)));
        }
    }

    #[test]
    fn covering_radius_gives_full_uncertainty() {
        let diag = Domain::default().diagonal();
        let s = run_trials(&quick(5, diag, 10)).unwrap();
        assert_eq!((s.mean, s.std), (100.0, 0.0));
    }

    #[test]
    fn single_trial_is_degenerate() {
        let s = run_trials(&quick(4, 30.0, 1)).unwrap();
        assert_eq!(s.n, 1);
        assert_eq!((s.std, s.cov), (0.0, Some(0.0)));
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(run_trials(&quick(0, 10.0, 5)).is_err());
        assert!(run_trials(&quick(3, 10.0, 0)).is_err());
        assert!(run_trials(&quick(3, -1.0, 5)).is_err());
        assert_eq!(
            sweep_radius(&quick(3, 0.0, 2), &[]),
            Err(MonteCarloError::EmptySweep)
        );
        assert_eq!(
            sweep_radius(&quick(3, 0.0, 2), &[10.0, 10.0]),
            Err(MonteCarloError::NotIncreasing)
        );
        assert_eq!(
            sweep_beacons(&quick(3, 10.0, 2), &[4, 4]),
            Err(MonteCarloError::NotIncreasing)
        );
        assert!(sweep_beacons(&quick(3, 10.0, 2), &[0, 4]).is_err());
    }

    #[test]
    fn single_point_sweeps() {
        let r = sweep_radius(&quick(4, 0.0, 5), &[20.0]).unwrap();
        assert_eq!(r.records.len(), 1);
        assert_eq!(r.optimum().radius, 20.0);
        let b = sweep_beacons(&quick(1, 20.0, 5), &[8]).unwrap();
        assert_eq!(b.optimum().beacon_count, 8);
    }

    #[test]
    fn sweep_points_are_independent() {
        let base = quick(4, 0.0, 12);
        let full = sweep_radius(&base, &[10.0, 20.0, 30.0]).unwrap();
        let alone = sweep_radius(&base, &[20.0]).unwrap();
        assert_eq!(full.records[1], alone.records[0]);
        let other = sweep_radius(&base, &[5.0, 20.0, 45.0]).unwrap();
        assert_eq!(other.records[1], full.records[1]);
    }

    #[test]
    fn sweeps_are_deterministic() {
        let base = quick(6, 0.0, 16);
        let a = sweep_radius(&base, &[15.0, 25.0]).unwrap();
        let b = sweep_radius(&base, &[15.0, 25.0]).unwrap();
        assert_eq!(a, b);
        let sampled = TrialConfig {
            metric: Metric::SampledTarget,
            ..base
        };
        assert_eq!(
            trial_values(&sampled).unwrap(),
            trial_values(&sampled).unwrap()
        );
    }

    #[test]
    fn optimum_tie_break() {
        let rec = |b, r, m| SweepRecord {
            beacon_count: b,
            radius: r,
            trials: 1,
            mean_uncertainty_pct: m,
            std_uncertainty_pct: 0.0,
            cov: Some(0.0),
        };
        let res = SweepResult::from_records(vec![
            rec(8, 40.0, 1.0),
            rec(16, 30.0, 1.0),
            rec(4, 30.0, 1.0),
            rec(4, 20.0, 2.0),
        ])
        .unwrap();
        assert_eq!(
            (res.optimum().beacon_count, res.optimum().radius),
            (4, 30.0)
        );
    }

    #[test]
    fn csv_layout() {
        let res = SweepResult::from_records(vec![
            SweepRecord {
                beacon_count: 8,
                radius: 35.0,
                trials: 500,
                mean_uncertainty_pct: 1.234_567_89,
                std_uncertainty_pct: 0.5,
                cov: Some(0.5 / 1.234_567_89),
            },
            SweepRecord {
                beacon_count: 8,
                radius: 36.0,
                trials: 1,
                mean_uncertainty_pct: 0.0,
                std_uncertainty_pct: 0.0,
                cov: None,
            },
        ])
        .unwrap();
        let mut buf = Vec::new();
        res.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "beacons,radius,trials,mean_uncertainty_pct,std_uncertainty_pct,cov\n\
             8,35,500,1.23457,0.5,0.405\n\
             8,36,1,0,0,NaN\n\
             # optimum: beacons=8,radius=36\n\
             # note: single-trial points report std=0 and cov=0\n"
        );
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(format_sig(100.0, 6), "100");
        assert_eq!(format_sig(0.12, 6), "0.12");
        assert_eq!(format_sig(5.123456789, 6), "5.12346");
        assert_eq!(format_sig(123456.7, 6), "123457");
        assert_eq!(format_sig(1234567.0, 6), "1.23457e+06");
        assert_eq!(format_sig(0.000012345, 6), "1.2345e-05");
        assert_eq!(format_sig(0.0001, 6), "0.0001");
        assert_eq!(format_sig(-2.5, 6), "-2.5");
        assert_eq!(format_sig(f64::NAN, 6), "NaN");
        assert_eq!(format_sig(99.99999999, 6), "100");
    }

    #[test]
    fn metric_parsing() {
        assert_eq!(
            "expected".parse::<Metric>().unwrap(),
            Metric::ExpectedAreaWeighted
        );
        assert_eq!(
            "sampled_target".parse::<Metric>().unwrap(),
            Metric::SampledTarget
        );
        assert!("median".parse::<Metric>().is_err());
        assert_eq!(Metric::SampledTarget.to_string(), "sampled");
    }

    #[test]
    fn mix_seed_spreads_neighbours() {
        let a = mix_seed(1, 0);
        let b = mix_seed(1, 1);
        let c = mix_seed(2, 0);
        assert!(a != b && a != c && b != c);
        assert!((a ^ b).count_ones() > 10);
    }
}
