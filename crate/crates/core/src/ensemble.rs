//! Trajectories, seeded ensembles and parameter sweeps.
//!
//! A trajectory starts from the initial tableau, performs
//! `total_steps_factor · L²` random check measurements and, once past
//! `burn_in_factor · L²` steps, evaluates every observable each
//! `sample_stride_factor · L²` steps. Its record is the time average of
//! those samples. An ensemble averages `n_runs` independent trajectories
//! and reports the standard error across runs.
//!
//! Randomness: run `k` of an ensemble with master seed `s` draws from a
//! ChaCha8 stream seeded with [`run_seed`]`(s, k)`, so results do not
//! depend on execution order or thread count.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{initial_tableau_for, CheckOp, CheckSampler, Lattice, LatticeSpec, MixChances};
use crate::observables::{measure_all, ObservableRecord, Scalar};
use crate::tableau::{MeasureEffect, SectorTableau};

/// SplitMix64 finalizer, used for all seed derivation.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `run_index` under `master_seed`.
pub fn run_seed(master_seed: u64, run_index: u64) -> u64 {
    mix64(master_seed ^ mix64(run_index))
}

/// Seed of a sweep grid point, hashed from its coordinates.
pub fn point_seed(master_seed: u64, l: usize, p1: f64, p2: f64) -> u64 {
    let mut h = mix64(master_seed);
    for word in [l as u64, p1.to_bits(), p2.to_bits()] {
        h = mix64(h ^ word);
    }
    h
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub total_steps_factor: u32,
    pub burn_in_factor: u32,
    pub sample_stride_factor: u32,
    pub n_runs: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Self { total_steps_factor: 100, burn_in_factor: 50, sample_stride_factor: 1, n_runs: 32 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub lattice: LatticeSpec,
    pub mix: MixChances,
    pub schedule: Schedule,
    pub master_seed: u64,
}

impl RunConfig {
    pub fn new(lattice: LatticeSpec, mix: MixChances, schedule: Schedule, master_seed: u64) -> Result<Self> {
        let c = Self { lattice, mix, schedule, master_seed };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.schedule;
        if s.sample_stride_factor == 0 {
            return Err(Error::Schedule("sample_stride_factor must be at least 1".into()));
        }
        if s.burn_in_factor >= s.total_steps_factor {
            return Err(Error::Schedule("burn_in_factor must be below total_steps_factor".into()));
        }
        if s.n_runs == 0 {
            return Err(Error::Schedule("n_runs must be at least 1".into()));
        }
        Ok(())
    }

    fn unit(&self) -> u64 {
        self.lattice.n_sites() as u64
    }

    pub fn total_steps(&self) -> u64 {
        self.schedule.total_steps_factor as u64 * self.unit()
    }

    pub fn burn_in_steps(&self) -> u64 {
        self.schedule.burn_in_factor as u64 * self.unit()
    }

    pub fn stride_steps(&self) -> u64 {
        self.schedule.sample_stride_factor as u64 * self.unit()
    }

    pub fn samples_per_run(&self) -> usize {
        ((self.total_steps() - self.burn_in_steps()) / self.stride_steps()) as usize
    }

    /// Same settings at another grid point, seeded from the point's
    /// coordinates.
    pub fn at_point(&self, point: &GridPoint) -> Result<Self> {
        let lattice = LatticeSpec::new(point.l, self.lattice.boundary())?;
        let mix = MixChances::new(point.p1, point.p2)?;
        let master_seed = point_seed(self.master_seed, point.l, point.p1, point.p2);
        RunConfig::new(lattice, mix, self.schedule, master_seed)
    }
}

/// One random measurement history.
pub struct Trajectory {
    lattice: Lattice,
    sampler: CheckSampler,
    tableau: SectorTableau,
    rng: ChaCha8Rng,
    steps: u64,
}

impl Trajectory {
    pub fn new(config: &RunConfig, run_index: u64) -> Result<Self> {
        Self::from_parts(
            config.lattice,
            &config.mix,
            initial_tableau_for(&config.lattice, &config.mix)?,
            run_seed(config.master_seed, run_index),
        )
    }

    /// Trajectory from an explicit starting tableau and raw stream seed.
    pub fn from_parts(spec: LatticeSpec, mix: &MixChances, tableau: SectorTableau, seed: u64) -> Result<Self> {
        if tableau.n_sites() != spec.n_sites() {
            return Err(Error::InvalidTableau("tableau size differs from lattice".into()));
        }
        Ok(Self {
            lattice: Lattice::new(spec),
            sampler: CheckSampler::new(mix),
            tableau,
            rng: ChaCha8Rng::seed_from_u64(seed),
            steps: 0,
        })
    }

    /// Samples and measures one check.
    #[inline]
    pub fn step(&mut self) -> (CheckOp, MeasureEffect) {
        let check = self.lattice.sample_check(&self.sampler, &mut self.rng);
        let effect = self.tableau.measure_pair(check.basis(), check.a, check.b);
        self.steps += 1;
        (check, effect)
    }

    pub fn advance(&mut self, n: u64) {
        for _ in 0..n {
            self.step();
        }
    }

    pub fn tableau(&self) -> &SectorTableau {
        &self.tableau
    }

    pub fn spec(&self) -> &LatticeSpec {
        self.lattice.spec()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }
}

/// Every post-burn-in sample of run `run_index`, in time order.
pub fn trajectory_samples(config: &RunConfig, run_index: u64) -> Result<Vec<ObservableRecord>> {
    config.validate()?;
    let mut traj = Trajectory::new(config, run_index)?;
    let spec = config.lattice;
    let cut = spec.left_half();
    traj.advance(config.burn_in_steps());
    let n = config.samples_per_run();
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        traj.advance(config.stride_steps());
        samples.push(measure_all(traj.tableau(), &spec, &cut));
    }
    Ok(samples)
}

/// Time-averaged observables of run `run_index`.
pub fn run_trajectory(config: &RunConfig, run_index: u64) -> Result<ObservableRecord> {
    let samples = trajectory_samples(config, run_index)?;
    Ok(ObservableRecord::mean(&samples).expect("at least one sample per run"))
}

/// Mean and standard error of the mean.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub config: RunConfig,
    /// Mean over runs of each run's time average.
    pub mean: ObservableRecord,
    /// Standard error of the mean across runs (zero when `n_runs == 1`).
    pub err: ObservableRecord,
    /// Per-run time averages, in run order.
    pub runs: Vec<ObservableRecord>,
    pub samples_per_run: usize,
    pub n_samples: usize,
    /// Set when there is a single run and no error estimate exists.
    pub zero_dof: bool,
    pub wall_time_secs: f64,
}

impl EnsembleStats {
    pub fn estimate(&self, s: Scalar) -> Estimate {
        Estimate { mean: self.mean.scalar(s), err: self.err.scalar(s) }
    }

    /// Across-run sample standard deviation of a scalar.
    pub fn run_std(&self, s: Scalar) -> f64 {
        self.err.scalar(s) * (self.runs.len() as f64).sqrt()
    }

    /// Aggregates per-run records (in run order).
    pub fn from_runs(config: RunConfig, runs: Vec<ObservableRecord>, wall_time_secs: f64) -> Self {
        let n = runs.len();
        let mean = ObservableRecord::mean(&runs).expect("at least one run");
        let mut var = ObservableRecord::zeros(config.lattice.l());
        let mut neg = mean.clone();
        neg.scale(-1.0);
        for r in &runs {
            let mut d = r.clone();
            d.accumulate(&neg);
            square(&mut d);
            var.accumulate(&d);
        }
        let zero_dof = n < 2;
        if zero_dof {
            var.scale(0.0);
        } else {
            // Standard error: sqrt(Σ(x−x̄)² / (n(n−1))).
            var.scale(1.0 / (n * (n - 1)) as f64);
        }
        sqrt(&mut var);
        let samples_per_run = config.samples_per_run();
        Self {
            config,
            mean,
            err: var,
            runs,
            samples_per_run,
            n_samples: n * samples_per_run,
            zero_dof,
            wall_time_secs,
        }
    }
}

fn map_fields(r: &mut ObservableRecord, f: impl Fn(f64) -> f64) {
    for s in Scalar::ALL {
        let v = r.scalar(s);
        set_scalar(r, s, f(v));
    }
    for p in r.profiles.all_mut() {
        p.iter_mut().for_each(|v| *v = f(*v));
    }
}

fn set_scalar(r: &mut ObservableRecord, s: Scalar, v: f64) {
    match s {
        Scalar::Xr => r.xr = v,
        Scalar::Xc => r.xc = v,
        Scalar::Zr => r.zr = v,
        Scalar::Zc => r.zc = v,
        Scalar::Yr => r.yr = v,
        Scalar::Yc => r.yc = v,
        Scalar::EntropyBits => r.entropy_bits = v,
        Scalar::XSiteDensity => r.x_site_density = v,
        Scalar::ZSiteDensity => r.z_site_density = v,
    }
}

fn square(r: &mut ObservableRecord) {
    map_fields(r, |v| v * v);
}

fn sqrt(r: &mut ObservableRecord) {
    map_fields(r, f64::sqrt);
}

/// Runs the ensemble one trajectory after another on the calling thread.
pub fn run_ensemble_seq(config: &RunConfig) -> Result<EnsembleStats> {
    config.validate()?;
    let start = Instant::now();
    let runs = (0..config.schedule.n_runs as u64)
        .map(|k| run_trajectory(config, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleStats::from_runs(*config, runs, start.elapsed().as_secs_f64()))
}

/// Runs trajectories in parallel on the current rayon pool.
#[cfg(feature = "parallel")]
pub fn run_ensemble_par(config: &RunConfig) -> Result<EnsembleStats> {
    use rayon::prelude::*;
    config.validate()?;
    let start = Instant::now();
    let runs = (0..config.schedule.n_runs as u64)
        .into_par_iter()
        .map(|k| run_trajectory(config, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleStats::from_runs(*config, runs, start.elapsed().as_secs_f64()))
}

/// Ensemble statistics for one parameter point. Parallel when the
/// `parallel` feature is enabled; the result is identical either way.
pub fn run_ensemble(config: &RunConfig) -> Result<EnsembleStats> {
    #[cfg(feature = "parallel")]
    {
        run_ensemble_par(config)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_ensemble_seq(config)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub l: usize,
    pub p1: f64,
    pub p2: f64,
}

/// Cartesian product grid, ordered L-major, then p2, then p1.
pub fn grid(l_list: &[usize], p1_list: &[f64], p2_list: &[f64]) -> Vec<GridPoint> {
    let mut out = Vec::with_capacity(l_list.len() * p1_list.len() * p2_list.len());
    for &l in l_list {
        for &p2 in p2_list {
            for &p1 in p1_list {
                out.push(GridPoint { l, p1, p2 });
            }
        }
    }
    out
}

/// Runs every grid point in order, handing each result to `sink` as soon
/// as it is ready. A sink error stops the sweep; results already handed
/// over stay with the sink.
pub fn sweep<F>(points: &[GridPoint], template: &RunConfig, mut sink: F) -> Result<Vec<EnsembleStats>>
where
    F: FnMut(&GridPoint, &EnsembleStats) -> std::io::Result<()>,
{
    if points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        let stats = run_ensemble(&template.at_point(p)?)?;
        sink(p, &stats)?;
        out.push(stats);
    }
    Ok(out)
}
