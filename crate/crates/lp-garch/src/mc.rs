//! Monte Carlo harness: replication grid, standard-error aggregation, and
//! the summary tables behind the figure and table outputs.
//!
//! Every replication is a pure function of `(master_seed, cell, r)`: the
//! child seed is a splitmix64 hash of the master seed, the cell's `beta1`
//! and `alpha2` bit patterns, the sample length, and the replication index.
//! Adding cells to the grid therefore never changes the series another cell
//! sees, and results are identical for any worker count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lp::{estimate_all_horizons, LpModel};
use crate::num::Scalar;
use crate::optim::OptimizerConfig;
use crate::sim::{simulate_series, DgpParams};
use crate::truth::fit_true_model;

/// An estimator tracked by the harness: one of the LP variants or the
/// AR(1)-GARCH(1,1) benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelId {
    Lp,
    LpGarch,
    LpGarchX,
    LpGarchHar,
    Truth,
}

impl ModelId {
    pub const ALL: [ModelId; 5] = [
        ModelId::Lp,
        ModelId::LpGarch,
        ModelId::LpGarchX,
        ModelId::LpGarchHar,
        ModelId::Truth,
    ];

    /// Name used in tables and CSV output.
    pub fn name(self) -> &'static str {
        match self {
            ModelId::Lp => "LP",
            ModelId::LpGarch => "LP-GARCH",
            ModelId::LpGarchX => "LP-GARCHX",
            ModelId::LpGarchHar => "LP-GARCH-HAR",
            ModelId::Truth => "AR(1)-GARCH(1,1)",
        }
    }

    /// The LP estimator behind this id, or `None` for the benchmark.
    pub fn lp_model(self) -> Option<LpModel> {
        match self {
            ModelId::Lp => Some(LpModel::Lp),
            ModelId::LpGarch => Some(LpModel::LpGarch),
            ModelId::LpGarchX => Some(LpModel::LpGarchX),
            ModelId::LpGarchHar => Some(LpModel::LpGarchHar),
            ModelId::Truth => None,
        }
    }
}

impl std::str::FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lp" => Ok(ModelId::Lp),
            "lp-garch" | "lpgarch" => Ok(ModelId::LpGarch),
            "lp-garchx" | "lpgarchx" => Ok(ModelId::LpGarchX),
            "lp-garch-har" | "lpgarchhar" => Ok(ModelId::LpGarchHar),
            "truth" | "ar-garch" => Ok(ModelId::Truth),
            other => Err(Error::InvalidParameter(format!(
                "unknown model '{other}' (expected lp, lp-garch, lp-garchx, lp-garch-har, or truth)"
            ))),
        }
    }
}

/// One grid point of the Monte Carlo design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell<S> {
    pub beta1: S,
    pub alpha2: S,
    pub t_len: usize,
}

/// Full Monte Carlo configuration. The defaults reproduce the full-scale
/// design: 500 replications over every combination of
/// `beta1 in {0.6, 0.8, 0.9, 0.95}`, `alpha2 in {0.3, 0.4, 0.48}`, and
/// `T in {500, 1000, 2000, 5000}`, with 24 horizons.
#[derive(Debug, Clone)]
pub struct McConfig<S> {
    pub beta1_grid: Vec<S>,
    pub alpha2_grid: Vec<S>,
    pub alpha1: S,
    pub gamma: S,
    pub beta0: S,
    pub t_grid: Vec<usize>,
    pub replications: u32,
    pub horizons: usize,
    pub models: Vec<ModelId>,
    pub master_seed: u64,
    /// Worker threads; 0 means one per available core.
    pub workers: usize,
    pub optimizer: OptimizerConfig,
}

impl<S: Scalar> Default for McConfig<S> {
    fn default() -> Self {
        Self {
            beta1_grid: [0.6, 0.8, 0.9, 0.95].iter().map(|&v| S::from_f64_c(v)).collect(),
            alpha2_grid: [0.3, 0.4, 0.48].iter().map(|&v| S::from_f64_c(v)).collect(),
            alpha1: S::from_f64_c(0.5),
            gamma: S::one(),
            beta0: S::zero(),
            t_grid: vec![500, 1000, 2000, 5000],
            replications: 500,
            horizons: 24,
            models: ModelId::ALL.to_vec(),
            master_seed: 1,
            workers: 0,
            optimizer: OptimizerConfig::default(),
        }
    }
}

impl<S: Scalar> McConfig<S> {
    /// Validate the whole design before any compute starts.
    pub fn validate(&self) -> Result<()> {
        if self.replications < 2 {
            return Err(Error::InvalidParameter(format!(
                "replications must be >= 2, got {}",
                self.replications
            )));
        }
        if self.horizons < 1 {
            return Err(Error::InvalidParameter("horizons must be >= 1".into()));
        }
        if self.beta1_grid.is_empty() || self.alpha2_grid.is_empty() || self.t_grid.is_empty() {
            return Err(Error::InvalidParameter("parameter grids must be nonempty".into()));
        }
        if self.models.is_empty() {
            return Err(Error::InvalidParameter("at least one model must be selected".into()));
        }
        for cell in self.cells() {
            let params = self.dgp_params(&cell);
            params.validate()?;
            if cell.t_len < self.horizons + 30 {
                return Err(Error::InvalidParameter(format!(
                    "T = {} leaves fewer than 30 observations at horizon {}",
                    cell.t_len, self.horizons
                )));
            }
        }
        Ok(())
    }

    /// All grid cells in emission order: `beta1` outermost, then `alpha2`,
    /// then `T`.
    pub fn cells(&self) -> Vec<GridCell<S>> {
        let mut out = Vec::with_capacity(
            self.beta1_grid.len() * self.alpha2_grid.len() * self.t_grid.len(),
        );
        for &beta1 in &self.beta1_grid {
            for &alpha2 in &self.alpha2_grid {
                for &t_len in &self.t_grid {
                    out.push(GridCell {
                        beta1,
                        alpha2,
                        t_len,
                    });
                }
            }
        }
        out
    }

    fn dgp_params(&self, cell: &GridCell<S>) -> DgpParams<S> {
        DgpParams {
            beta0: self.beta0,
            beta1: cell.beta1,
            gamma: self.gamma,
            alpha1: self.alpha1,
            alpha2: cell.alpha2,
            t_len: cell.t_len,
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Child seed for replication `r` of a grid cell.
///
/// Chained splitmix64 over the master seed, the `f64` bit patterns of the
/// cell's `beta1` and `alpha2`, the sample length, and `r`. Independent of
/// grid shape and evaluation order.
pub fn child_seed(master_seed: u64, beta1: f64, alpha2: f64, t_len: usize, r: u32) -> u64 {
    let mut s = splitmix64(master_seed);
    for v in [beta1.to_bits(), alpha2.to_bits(), t_len as u64, u64::from(r)] {
        s = splitmix64(s ^ v);
    }
    s
}

/// Impulse-response estimates from one model on one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelEstimates<S> {
    pub model: ModelId,
    /// `beta_hat` per horizon, `1..=H`; entries are meaningful only where
    /// `usable` is true.
    pub betas: Vec<S>,
    /// Per-horizon flag: converged and finite.
    pub usable: Vec<bool>,
}

/// Simulate replication `r` of `cell` and estimate every configured model.
///
/// Estimation failures (singularities, non-convergence) are recorded in the
/// `usable` flags; they never abort the replication.
pub fn run_replication<S: Scalar>(
    cell: &GridCell<S>,
    r: u32,
    cfg: &McConfig<S>,
) -> Vec<ModelEstimates<S>> {
    let horizons = cfg.horizons;
    let seed = child_seed(
        cfg.master_seed,
        cell.beta1.to_f64().unwrap(),
        cell.alpha2.to_f64().unwrap(),
        cell.t_len,
        r,
    );
    let params = cfg.dgp_params(cell);
    let sample = simulate_series(&params, seed).expect("validated config simulates");

    cfg.models
        .iter()
        .map(|&model| {
            let failed = || ModelEstimates {
                model,
                betas: vec![S::nan(); horizons],
                usable: vec![false; horizons],
            };
            match model.lp_model() {
                Some(lp) => {
                    match estimate_all_horizons(&sample.values, horizons, lp, &cfg.optimizer) {
                        Ok((fits, _)) => {
                            let mut betas = Vec::with_capacity(horizons);
                            let mut usable = Vec::with_capacity(horizons);
                            for f in &fits {
                                let b = f.fit.mean_coeffs.1;
                                betas.push(b);
                                usable.push(f.fit.converged && b.is_finite());
                            }
                            ModelEstimates {
                                model,
                                betas,
                                usable,
                            }
                        }
                        Err(_) => failed(),
                    }
                }
                None => match fit_true_model(&sample.values, horizons, &cfg.optimizer) {
                    Ok(out) => {
                        let ok = out.fit.converged && out.irf.iter().all(|b| b.is_finite());
                        ModelEstimates {
                            model,
                            usable: vec![ok; horizons],
                            betas: out.irf,
                        }
                    }
                    Err(_) => failed(),
                },
            }
        })
        .collect()
}

/// Dispersion of one model's estimates at one horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeEntry<S> {
    /// Sample standard deviation across usable replications (divisor
    /// `n_used - 1`), or `None` when fewer than two replications survive.
    pub se: Option<S>,
    pub n_used: u32,
    pub n_failed: u32,
}

/// Standard deviation of per-horizon estimates across replications.
///
/// `reps` holds one [`ModelEstimates`] per replication, all from the same
/// model and cell. Flagged replications are excluded per horizon and the
/// divisor shrinks accordingly; keys with fewer than two usable replications
/// come back as `None` rather than a fabricated value.
pub fn aggregate_se<S: Scalar>(reps: &[&ModelEstimates<S>], horizons: usize) -> Vec<SeEntry<S>> {
    (0..horizons)
        .map(|h| {
            let mut n_used = 0u32;
            let mut sum = S::zero();
            for m in reps {
                if m.usable[h] {
                    n_used += 1;
                    sum += m.betas[h];
                }
            }
            let n_failed = reps.len() as u32 - n_used;
            if n_used < 2 {
                return SeEntry {
                    se: None,
                    n_used,
                    n_failed,
                };
            }
            let mean = sum / S::from_u32(n_used).unwrap();
            let mut ss = S::zero();
            for m in reps {
                if m.usable[h] {
                    let d = m.betas[h] - mean;
                    ss += d * d;
                }
            }
            let var = ss / S::from_u32(n_used - 1).unwrap();
            SeEntry {
                se: Some(var.sqrt()),
                n_used,
                n_failed,
            }
        })
        .collect()
}

/// Standard errors over the full grid, keyed by `(cell, model, horizon)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeTable<S> {
    pub cells: Vec<GridCell<S>>,
    pub models: Vec<ModelId>,
    pub horizons: usize,
    pub replications: u32,
    entries: Vec<SeEntry<S>>,
}

impl<S: Scalar> SeTable<S> {
    fn index(&self, cell_idx: usize, model_idx: usize, h: usize) -> usize {
        debug_assert!(h >= 1 && h <= self.horizons);
        (cell_idx * self.models.len() + model_idx) * self.horizons + (h - 1)
    }

    /// Entry for `(cell, model, h)`, `h` counted from 1.
    pub fn get(&self, cell_idx: usize, model: ModelId, h: usize) -> Option<&SeEntry<S>> {
        let model_idx = self.models.iter().position(|&m| m == model)?;
        self.entries.get(self.index(cell_idx, model_idx, h))
    }

    /// Rows in emission order: cells, then models, then horizons.
    pub fn rows(&self) -> impl Iterator<Item = (GridCell<S>, ModelId, usize, &SeEntry<S>)> + '_ {
        self.cells.iter().enumerate().flat_map(move |(ci, &cell)| {
            self.models.iter().enumerate().flat_map(move |(mi, &model)| {
                (1..=self.horizons).map(move |h| {
                    (cell, model, h, &self.entries[self.index(ci, mi, h)])
                })
            })
        })
    }
}

/// Run the whole replication grid and aggregate standard errors.
///
/// The output is a pure function of the configuration (including the master
/// seed) and does not depend on the worker count.
pub fn run_grid<S: Scalar>(cfg: &McConfig<S>) -> Result<SeTable<S>> {
    cfg.validate()?;
    let cells = cfg.cells();
    let reps = cfg.replications;

    let tasks: Vec<(usize, u32)> = cells
        .iter()
        .enumerate()
        .flat_map(|(ci, _)| (0..reps).map(move |r| (ci, r)))
        .collect();

    let mut pool = rayon::ThreadPoolBuilder::new();
    if cfg.workers > 0 {
        pool = pool.num_threads(cfg.workers);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::WorkerPool(e.to_string()))?;

    // Ordered collection: results[i] corresponds to tasks[i] regardless of
    // scheduling, so aggregation sees a fixed order.
    let results: Vec<Vec<ModelEstimates<S>>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(ci, r)| run_replication(&cells[ci], r, cfg))
            .collect()
    });

    let mut entries = Vec::with_capacity(cells.len() * cfg.models.len() * cfg.horizons);
    for ci in 0..cells.len() {
        let cell_results = &results[ci * reps as usize..(ci + 1) * reps as usize];
        for mi in 0..cfg.models.len() {
            let per_rep: Vec<&ModelEstimates<S>> =
                cell_results.iter().map(|bymodel| &bymodel[mi]).collect();
            entries.extend(aggregate_se(&per_rep, cfg.horizons));
        }
    }

    Ok(SeTable {
        cells,
        models: cfg.models.clone(),
        horizons: cfg.horizons,
        replications: reps,
        entries,
    })
}

/// One model-vs-benchmark comparison at one horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffEntry<S> {
    /// `se_model - se_truth`; `None` when the model's se is missing.
    pub diff: Option<S>,
    /// `se_model / se_truth`; `None` when undefined.
    pub ratio: Option<S>,
    pub n_used: u32,
    pub n_failed: u32,
}

/// Differences of standard errors against the benchmark, keyed like
/// [`SeTable`].
#[derive(Debug, Clone, PartialEq)]
pub struct DiffTable<S> {
    pub cells: Vec<GridCell<S>>,
    pub models: Vec<ModelId>,
    pub horizons: usize,
    entries: Vec<DiffEntry<S>>,
}

impl<S: Scalar> DiffTable<S> {
    fn index(&self, cell_idx: usize, model_idx: usize, h: usize) -> usize {
        (cell_idx * self.models.len() + model_idx) * self.horizons + (h - 1)
    }

    pub fn get(&self, cell_idx: usize, model: ModelId, h: usize) -> Option<&DiffEntry<S>> {
        let model_idx = self.models.iter().position(|&m| m == model)?;
        self.entries.get(self.index(cell_idx, model_idx, h))
    }

    pub fn rows(&self) -> impl Iterator<Item = (GridCell<S>, ModelId, usize, &DiffEntry<S>)> + '_ {
        self.cells.iter().enumerate().flat_map(move |(ci, &cell)| {
            self.models.iter().enumerate().flat_map(move |(mi, &model)| {
                (1..=self.horizons).map(move |h| {
                    (cell, model, h, &self.entries[self.index(ci, mi, h)])
                })
            })
        })
    }
}

/// Subtract the benchmark's standard errors from every model's, per cell and
/// horizon. The benchmark must be present with a usable se for every key.
pub fn diff_vs_truth<S: Scalar>(se: &SeTable<S>) -> Result<DiffTable<S>> {
    if !se.models.contains(&ModelId::Truth) {
        return Err(Error::MissingKey(
            "benchmark model absent from the standard-error table".into(),
        ));
    }
    let mut entries = Vec::with_capacity(se.cells.len() * se.models.len() * se.horizons);
    for ci in 0..se.cells.len() {
        let cell = se.cells[ci];
        for &model in &se.models {
            for h in 1..=se.horizons {
                let truth = se.get(ci, ModelId::Truth, h).expect("index in range");
                let truth_se = truth.se.ok_or_else(|| {
                    Error::MissingKey(format!(
                        "benchmark se missing at (beta1={}, alpha2={}, T={}, h={h})",
                        cell.beta1, cell.alpha2, cell.t_len
                    ))
                })?;
                let entry = se.get(ci, model, h).expect("index in range");
                let diff = entry.se.map(|s| s - truth_se);
                let ratio = entry.se.and_then(|s| {
                    (truth_se > S::zero()).then(|| s / truth_se)
                });
                entries.push(DiffEntry {
                    diff,
                    ratio,
                    n_used: entry.n_used,
                    n_failed: entry.n_failed,
                });
            }
        }
    }
    Ok(DiffTable {
        cells: se.cells.clone(),
        models: se.models.clone(),
        horizons: se.horizons,
        entries,
    })
}

/// Horizon-averaged summary per cell and model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryEntry<S> {
    /// Mean over `h = 1..=H` of `se_model - se_truth`.
    pub mean_diff: S,
    /// Mean over `h = 1..=H` of `se_model / se_truth`, when defined at every
    /// horizon.
    pub mean_ratio: Option<S>,
}

/// Horizon-averaged comparison table (the shape of the headline table).
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable<S> {
    pub cells: Vec<GridCell<S>>,
    pub models: Vec<ModelId>,
    pub horizons: usize,
    entries: Vec<SummaryEntry<S>>,
}

impl<S: Scalar> SummaryTable<S> {
    pub fn get(&self, cell_idx: usize, model: ModelId) -> Option<&SummaryEntry<S>> {
        let model_idx = self.models.iter().position(|&m| m == model)?;
        self.entries.get(cell_idx * self.models.len() + model_idx)
    }

    pub fn rows(&self) -> impl Iterator<Item = (GridCell<S>, ModelId, &SummaryEntry<S>)> + '_ {
        self.cells.iter().enumerate().flat_map(move |(ci, &cell)| {
            self.models.iter().enumerate().map(move |(mi, &model)| {
                (cell, model, &self.entries[ci * self.models.len() + mi])
            })
        })
    }
}

/// Average the difference table over horizons `1..=horizons`.
///
/// Every key must be present; missing differences are reported as an error
/// listing the offending keys.
pub fn summarize<S: Scalar>(diff: &DiffTable<S>, horizons: usize) -> Result<SummaryTable<S>> {
    if horizons < 1 || horizons > diff.horizons {
        return Err(Error::Domain(format!(
            "summary horizon {horizons} outside the table's range 1..={}",
            diff.horizons
        )));
    }
    let mut missing = Vec::new();
    let mut entries = Vec::with_capacity(diff.cells.len() * diff.models.len());
    for (ci, cell) in diff.cells.iter().enumerate() {
        for &model in &diff.models {
            let mut acc = S::zero();
            let mut ratio_acc = Some(S::zero());
            for h in 1..=horizons {
                let entry = diff.get(ci, model, h).expect("index in range");
                match entry.diff {
                    Some(d) => acc += d,
                    None => missing.push(format!(
                        "(beta1={}, alpha2={}, T={}, model={}, h={h})",
                        cell.beta1,
                        cell.alpha2,
                        cell.t_len,
                        model.name()
                    )),
                }
                ratio_acc = match (ratio_acc, entry.ratio) {
                    (Some(a), Some(r)) => Some(a + r),
                    _ => None,
                };
            }
            let nh = S::from_usize(horizons).unwrap();
            entries.push(SummaryEntry {
                mean_diff: acc / nh,
                mean_ratio: ratio_acc.map(|a| a / nh),
            });
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingKey(missing.join(", ")));
    }
    Ok(SummaryTable {
        cells: diff.cells.clone(),
        models: diff.models.clone(),
        horizons,
        entries,
    })
}
