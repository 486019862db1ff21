//! Recovery of point clouds in `d` dimensions from scalar recoveries.
//!
//! Each coordinate and each sum `x_1 + x_q` of the unknown points is a
//! one-dimensional sparse measure, so it can be recovered with
//! [`crate::superres`]. The recovered coordinate lists carry no labels;
//! they are reassembled into points by matching `x_1 + x_q` against the
//! recovered sums ("gluing"). A random Gaussian projection first spreads
//! well-separated points on the sphere so that coordinates and sums become
//! separated too.
//!
//! All scalar instances share one affine change of variables
//! `t ↦ (t + 2)·π/5`, which sends `[-2, 2]` into `[0, 4π/5] ⊂ [0, π]`.

pub mod linalg;

use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{RecoveryError, Result};
use crate::fourier::moments;
use crate::measures::{min_separation, SparseMeasure1D};
use crate::superres::{init_particles, recover_1d_with, RecoveryConfig, RunOptions};

/// Gluing threshold as a fraction of β used when none is given.
pub const DEFAULT_GLUE_FRACTION: f64 = 0.5;
/// The tighter `β/5` threshold.
pub const STRICT_GLUE_FRACTION: f64 = 0.2;
/// Default constant `c` in the β formula `c·ℓκ / (d n ln(1/κ))`.
pub const DEFAULT_BETA_CONSTANT: f64 = 0.125;

const SPHERE_TOL: f64 = 1e-12;
const COORD_SLACK: f64 = 1e-9;
const MAX_PROJECTION_ATTEMPTS: usize = 5;
const MAX_SPHERE_DRAWS: usize = 10_000;
const GLUE_SEARCH_BUDGET: usize = 1_000_000;

/// `n` points in `d` dimensions, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloudND {
    n: usize,
    d: usize,
    coords: Vec<f64>,
}

impl PointCloudND {
    pub fn new(n: usize, d: usize, coords: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(RecoveryError::InvalidArgument(
                "a point cloud needs n >= 1 and d >= 1".into(),
            ));
        }
        if coords.len() != n * d {
            return Err(RecoveryError::SizeMismatch {
                left: coords.len(),
                right: n * d,
            });
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(RecoveryError::InvalidArgument("coordinates must be finite".into()));
        }
        Ok(Self { n, d, coords })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(RecoveryError::InvalidArgument("rows have different lengths".into()));
        }
        Self::new(rows.len(), d, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.d)
    }

    /// Values of coordinate `q` across all points.
    pub fn coordinate(&self, q: usize) -> Vec<f64> {
        self.points().map(|p| p[q]).collect()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.n, self.d, self.coords.iter().map(|x| x * factor).collect())
    }

    pub fn is_on_unit_sphere(&self, tol: f64) -> bool {
        self.points().all(|p| (euclidean(p) - 1.0).abs() <= tol)
    }

    /// Smallest Euclidean distance between two points.
    pub fn min_pairwise_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.n {
            for j in i + 1..self.n {
                let diff: Vec<f64> = self.point(i).iter().zip(self.point(j)).map(|(a, b)| a - b).collect();
                best = best.min(euclidean(&diff));
            }
        }
        best
    }
}

fn euclidean(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Separation constant of a cloud: the smallest gap between two points in
/// any single coordinate or in any sum `x_1 + x_r`, `r ≥ 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assumption2Params {
    pub beta: f64,
}

pub fn beta_of(cloud: &PointCloudND) -> Result<Assumption2Params> {
    if cloud.n() < 2 || cloud.d() < 2 {
        return Err(RecoveryError::InvalidArgument(format!(
            "separation constant needs n >= 2 and d >= 2, got n = {}, d = {}",
            cloud.n(),
            cloud.d()
        )));
    }
    Ok(Assumption2Params {
        beta: separation_constant(cloud),
    })
}

fn separation_constant(cloud: &PointCloudND) -> f64 {
    let mut beta = f64::INFINITY;
    for i in 0..cloud.n() {
        for j in i + 1..cloud.n() {
            let (a, b) = (cloud.point(i), cloud.point(j));
            for q in 0..cloud.d() {
                beta = beta.min((a[q] - b[q]).abs());
                if q > 0 {
                    beta = beta.min(((a[0] + a[q]) - (b[0] + b[q])).abs());
                }
            }
        }
    }
    beta
}

/// Affine change of variables `t ↦ (t + shift)·scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub scale: f64,
    pub shift: f64,
}

impl AffineMap {
    /// Sends `[-2, 2]` onto `[0, 4π/5]`.
    pub fn standard() -> Self {
        Self {
            scale: PI / 5.0,
            shift: 2.0,
        }
    }

    pub fn apply(&self, t: f64) -> f64 {
        (t + self.shift) * self.scale
    }

    pub fn invert(&self, y: f64) -> f64 {
        y / self.scale - self.shift
    }
}

/// Which scalar measure an instance recovers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    /// Coordinate `q` (0-based).
    Coordinate(usize),
    /// The sum of coordinate 0 and coordinate `q` (0-based).
    Sum(usize),
}

/// Outcome of one scalar recovery inside the d-dimensional pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceReport {
    pub kind: InstanceKind,
    pub seed: u64,
    /// Recovered values in the original (unscaled) units.
    pub recovered: Vec<f64>,
    /// W∞ error of this instance in the original units.
    pub matched_error: f64,
    pub distinct_evaluations: usize,
}

/// How one coordinate of one point was glued.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlueMatch {
    pub point: usize,
    pub coord: usize,
    /// Index into the recovered list of coordinate `coord`.
    pub partner: usize,
    /// Index into the recovered list of sums for `coord`.
    pub witness: usize,
    pub residual: f64,
    /// Number of (partner, witness) pairs under the threshold.
    pub candidates: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlueOutcome {
    pub cloud: PointCloudND,
    pub matches: Vec<GlueMatch>,
}

/// Reassembles points from unlabeled coordinate lists.
///
/// `coords[q]` holds the recovered values of coordinate `q` and `sums[q]`
/// those of `x_0 + x_q`; `sums[0]` is accepted for shape symmetry but not
/// used. Point `i` takes its first coordinate from `coords[0][i]`. For each
/// other coordinate a pair `(j, r)` is a candidate when
/// `|coords[0][i] + coords[q][j] - sums[q][r]| < fraction·β`. Among the
/// candidates, the assignment must use every `j` and every `r` once; a
/// coordinate without such an assignment, or with more than one, is an
/// assumption violation.
pub fn glue(coords: &[Vec<f64>], sums: &[Vec<f64>], beta: f64, fraction: f64) -> Result<GlueOutcome> {
    let d = coords.len();
    if d == 0 || sums.len() != d {
        return Err(RecoveryError::SizeMismatch {
            left: sums.len(),
            right: d,
        });
    }
    let n = coords[0].len();
    if let Some(bad) = coords.iter().chain(sums).find(|list| list.len() != n) {
        return Err(RecoveryError::SizeMismatch {
            left: bad.len(),
            right: n,
        });
    }
    if !(beta > 0.0) || !(fraction > 0.0) {
        return Err(RecoveryError::InvalidArgument(format!(
            "gluing needs positive beta and fraction, got {beta} and {fraction}"
        )));
    }
    let threshold = fraction * beta;
    let first = &coords[0];

    let mut rows: Vec<Vec<f64>> = first.iter().map(|&x| vec![x]).collect();
    let mut matches = Vec::new();
    for q in 1..d {
        let candidates: Vec<Vec<(usize, usize, f64)>> = (0..n)
            .map(|i| {
                let mut found = Vec::new();
                for j in 0..n {
                    for r in 0..n {
                        let residual = (first[i] + coords[q][j] - sums[q][r]).abs();
                        if residual < threshold {
                            found.push((j, r, residual));
                        }
                    }
                }
                found
            })
            .collect();
        if let Some(i) = candidates.iter().position(Vec::is_empty) {
            return Err(RecoveryError::AssumptionViolation(format!(
                "no gluing candidate for point {i}, coordinate {q}"
            )));
        }

        let assignment = unique_assignment(&candidates, n).map_err(|count| {
            RecoveryError::AssumptionViolation(if count == 0 {
                format!("no consistent gluing for coordinate {q}")
            } else {
                format!("ambiguous gluing for coordinate {q}: several consistent assignments")
            })
        })?;
        for (i, &choice) in assignment.iter().enumerate() {
            let (j, r, residual) = candidates[i][choice];
            rows[i].push(coords[q][j]);
            matches.push(GlueMatch {
                point: i,
                coord: q,
                partner: j,
                witness: r,
                residual,
                candidates: candidates[i].len(),
            });
        }
    }
    Ok(GlueOutcome {
        cloud: PointCloudND::from_rows(&rows)?,
        matches,
    })
}

/// Finds the single choice per row that uses distinct partners and distinct
/// witnesses. Returns the number of assignments found (0 or 2, capped) when
/// it is not exactly one.
fn unique_assignment(
    candidates: &[Vec<(usize, usize, f64)>],
    n: usize,
) -> std::result::Result<Vec<usize>, usize> {
    struct Search<'a> {
        candidates: &'a [Vec<(usize, usize, f64)>],
        used_partner: Vec<bool>,
        used_witness: Vec<bool>,
        current: Vec<usize>,
        found: Option<Vec<usize>>,
        count: usize,
        budget: usize,
    }

    impl Search<'_> {
        fn visit(&mut self, row: usize) {
            if self.count >= 2 || self.budget == 0 {
                return;
            }
            self.budget -= 1;
            if row == self.candidates.len() {
                self.count += 1;
                self.found.get_or_insert_with(|| self.current.clone());
                return;
            }
            for (choice, &(j, r, _)) in self.candidates[row].iter().enumerate() {
                if self.used_partner[j] || self.used_witness[r] {
                    continue;
                }
                self.used_partner[j] = true;
                self.used_witness[r] = true;
                self.current.push(choice);
                self.visit(row + 1);
                self.current.pop();
                self.used_partner[j] = false;
                self.used_witness[r] = false;
            }
        }
    }

    let mut search = Search {
        candidates,
        used_partner: vec![false; n],
        used_witness: vec![false; n],
        current: Vec::with_capacity(n),
        found: None,
        count: 0,
        budget: GLUE_SEARCH_BUDGET,
    };
    search.visit(0);
    if search.budget == 0 && search.count < 2 {
        // An exhausted search cannot certify uniqueness.
        return Err(2);
    }
    match (search.count, search.found) {
        (1, Some(found)) => Ok(found),
        (count, _) => Err(count),
    }
}

/// Norm used to compare matched points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointNorm {
    Max,
    Euclidean,
}

/// Smallest achievable largest distance over all one-to-one matchings of
/// the two clouds (bottleneck assignment).
pub fn matched_error_nd(a: &PointCloudND, b: &PointCloudND, norm: PointNorm) -> Result<f64> {
    if a.n() != b.n() || a.d() != b.d() {
        return Err(RecoveryError::SizeMismatch {
            left: a.n() * a.d(),
            right: b.n() * b.d(),
        });
    }
    let n = a.n();
    let cost: Vec<f64> = (0..n)
        .flat_map(|i| {
            (0..n).map(move |j| {
                let diffs = a.point(i).iter().zip(b.point(j)).map(|(x, y)| (x - y).abs());
                match norm {
                    PointNorm::Max => diffs.fold(0.0, f64::max),
                    PointNorm::Euclidean => diffs.map(|t| t * t).sum::<f64>().sqrt(),
                }
            })
        })
        .collect();
    let mut levels = cost.clone();
    levels.sort_by(f64::total_cmp);
    levels.dedup();

    let (mut lo, mut hi) = (0, levels.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if has_perfect_matching(&cost, n, levels[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(levels[lo])
}

fn has_perfect_matching(cost: &[f64], n: usize, limit: f64) -> bool {
    fn augment(u: usize, cost: &[f64], n: usize, limit: f64, seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for v in 0..n {
            if cost[u * n + v] <= limit && !seen[v] {
                seen[v] = true;
                if owner[v].is_none_or(|w| augment(w, cost, n, limit, seen, owner)) {
                    owner[v] = Some(u);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![None; n];
    (0..n).all(|u| augment(u, cost, n, limit, &mut vec![false; n], &mut owner))
}

/// Parameter schedule for every scalar instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    Theory,
    Empirical { moments: usize, iterations: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NdOptions {
    pub schedule: Schedule,
    /// Upper bound on worker threads for the scalar instances.
    pub threads: usize,
    pub glue_fraction: f64,
}

impl Default for NdOptions {
    fn default() -> Self {
        Self {
            schedule: Schedule::Theory,
            threads: 1,
            glue_fraction: DEFAULT_GLUE_FRACTION,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NdRecovery {
    pub cloud: PointCloudND,
    /// Shared configuration of the scalar instances, in mapped units.
    pub config: RecoveryConfig,
    pub instances: Vec<InstanceReport>,
    pub gluing: Vec<GlueMatch>,
    /// Max-norm matched error against the truth.
    pub matched_error: f64,
}

/// Stepsize `min(ε/2, β/10)` after mapping both into scalar-instance units.
pub fn nd_stepsize(beta: f64, accuracy: f64) -> f64 {
    let scale = AffineMap::standard().scale;
    (scale * accuracy / 2.0).min(scale * beta / 10.0)
}

/// Recovers `truth` from moments of its coordinates and coordinate sums.
///
/// `beta` is the separation constant the caller vouches for and `accuracy`
/// the target max-norm error. Coordinates must lie in `[-1, 1]`.
pub fn recover_nd_deterministic<R: Rng + ?Sized>(
    truth: &PointCloudND,
    beta: f64,
    accuracy: f64,
    rng: &mut R,
    options: &NdOptions,
) -> Result<NdRecovery> {
    if !(beta > 0.0 && beta.is_finite()) || !(accuracy > 0.0 && accuracy.is_finite()) {
        return Err(RecoveryError::InvalidArgument(format!(
            "beta and accuracy must be positive, got {beta} and {accuracy}"
        )));
    }
    if let Some(bad) = truth.coords().iter().find(|x| x.abs() > 1.0 + COORD_SLACK) {
        return Err(RecoveryError::InvalidArgument(format!(
            "coordinate {bad} lies outside [-1, 1]"
        )));
    }
    let (n, d) = (truth.n(), truth.d());
    if n >= 2 && separation_constant(truth) == 0.0 {
        return Err(RecoveryError::AssumptionViolation(
            "two points share a coordinate value or a coordinate sum (beta = 0)".into(),
        ));
    }

    let map = AffineMap::standard();
    let gamma = nd_stepsize(beta, accuracy);
    let config = match options.schedule {
        Schedule::Theory => {
            let mut c = RecoveryConfig::theory(n, gamma)?;
            c.separation = Some(map.scale * beta);
            c.accuracy = Some(map.scale * accuracy);
            c
        }
        Schedule::Empirical { moments, iterations } => RecoveryConfig::empirical(gamma, moments, iterations)?,
    };

    let kinds: Vec<InstanceKind> = (0..d)
        .map(InstanceKind::Coordinate)
        .chain((0..d).map(InstanceKind::Sum))
        .collect();
    let seeds: Vec<u64> = kinds.iter().map(|_| rng.gen()).collect();

    let run = |idx: usize| -> Result<InstanceReport> {
        let values: Vec<f64> = truth
            .points()
            .map(|p| match kinds[idx] {
                InstanceKind::Coordinate(q) => map.apply(p[q]),
                InstanceKind::Sum(q) => map.apply(p[0] + p[q]),
            })
            .collect();
        let target = SparseMeasure1D::new(values)?;
        let phimu = moments(&target, config.moments)?;
        let init = init_particles(n, &mut ChaCha8Rng::seed_from_u64(seeds[idx]))?;
        let run_options = RunOptions {
            stride: Some(config.iterations.max(1)),
            truth: Some(target),
        };
        let result = recover_1d_with(&phimu, n, &init, &config, &run_options)?;
        Ok(InstanceReport {
            kind: kinds[idx],
            seed: seeds[idx],
            recovered: result.final_measure.support().iter().map(|&y| map.invert(y)).collect(),
            matched_error: result.matched_error.unwrap_or(f64::NAN) / map.scale,
            distinct_evaluations: result.distinct_evaluations,
        })
    };
    let instances = parallel_map(kinds.len(), options.threads, run)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let coords: Vec<Vec<f64>> = instances[..d].iter().map(|r| r.recovered.clone()).collect();
    let sums: Vec<Vec<f64>> = instances[d..].iter().map(|r| r.recovered.clone()).collect();
    let glued = glue(&coords, &sums, beta, options.glue_fraction)?;
    let matched_error = matched_error_nd(&glued.cloud, truth, PointNorm::Max)?;
    Ok(NdRecovery {
        cloud: glued.cloud,
        config,
        instances,
        gluing: glued.matches,
        matched_error,
    })
}

/// Evaluates `job(0..count)` on up to `threads` scoped workers; output order
/// follows the index, independent of scheduling.
pub(crate) fn parallel_map<T, F>(count: usize, threads: usize, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = threads.clamp(1, count.max(1));
    if workers == 1 {
        return (0..count).map(job).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..count).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= count {
                    break;
                }
                let value = job(idx);
                slots.lock().expect("worker panicked")[idx] = Some(value);
            });
        }
    });
    slots
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|slot| slot.expect("every index is processed"))
        .collect()
}

/// A `d × d` standard Gaussian matrix with its spectral norm and inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianProjection {
    pub d: usize,
    /// Row-major entries.
    pub matrix: Vec<f64>,
    pub spectral_norm: f64,
    pub inverse: Vec<f64>,
    /// Spectral norm of the inverse.
    pub inverse_norm: f64,
    /// Number of draws needed to obtain an invertible matrix.
    pub attempts: usize,
}

impl GaussianProjection {
    /// `Z w / ‖Z‖` for every point.
    pub fn project(&self, cloud: &PointCloudND) -> Result<PointCloudND> {
        self.check_dim(cloud)?;
        let coords = cloud
            .points()
            .flat_map(|p| linalg::mat_vec(&self.matrix, self.d, self.d, p))
            .map(|x| x / self.spectral_norm)
            .collect();
        PointCloudND::new(cloud.n(), cloud.d(), coords)
    }

    /// `‖Z‖ Z⁻¹ v` for every point; undoes [`GaussianProjection::project`].
    pub fn unproject(&self, cloud: &PointCloudND) -> Result<PointCloudND> {
        self.check_dim(cloud)?;
        let coords = cloud
            .points()
            .flat_map(|p| linalg::mat_vec(&self.inverse, self.d, self.d, p))
            .map(|x| x * self.spectral_norm)
            .collect();
        PointCloudND::new(cloud.n(), cloud.d(), coords)
    }

    fn check_dim(&self, cloud: &PointCloudND) -> Result<()> {
        if cloud.d() == self.d {
            Ok(())
        } else {
            Err(RecoveryError::SizeMismatch {
                left: cloud.d(),
                right: self.d,
            })
        }
    }
}

/// Draws a Gaussian matrix, redrawing (at most five times in total) when
/// elimination meets a pivot below `1e-12`.
pub fn random_projection<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<GaussianProjection> {
    if d == 0 {
        return Err(RecoveryError::InvalidArgument("dimension must be at least 1".into()));
    }
    let mut last_error = None;
    for attempt in 1..=MAX_PROJECTION_ATTEMPTS {
        let matrix: Vec<f64> = (0..d * d).map(|_| rng.sample(StandardNormal)).collect();
        match linalg::invert(&matrix, d) {
            Ok(inverse) => {
                return Ok(GaussianProjection {
                    d,
                    spectral_norm: linalg::spectral_norm(&matrix, d, d)?,
                    inverse_norm: linalg::spectral_norm(&inverse, d, d)?,
                    matrix,
                    inverse,
                    attempts: attempt,
                });
            }
            Err(e) => last_error = Some(e),
        }
    }
    Err(last_error.unwrap_or_else(|| RecoveryError::Numerical("projection sampling failed".into())))
}

/// Where the separation constant of the projected cloud comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaSource {
    /// Computed from the projected ground truth.
    Exact,
    /// `constant · ℓκ / (d n ln(1/κ))`.
    Formula { constant: f64 },
}

/// β predicted for a projected cloud of `n` points in `d` dimensions with
/// separation `separation`, failing with probability at most `kappa`.
pub fn beta_formula(constant: f64, separation: f64, kappa: f64, n: usize, d: usize) -> f64 {
    constant * separation * kappa / (d as f64 * n as f64 * -kappa.ln())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedRecovery {
    pub cloud: PointCloudND,
    pub projection: GaussianProjection,
    pub projected_truth: PointCloudND,
    /// Separation constant handed to the deterministic stage.
    pub beta: f64,
    pub inner: NdRecovery,
    /// Euclidean matched error against the truth.
    pub matched_error: f64,
}

/// Recovers unit vectors separated by at least `separation` after a random
/// Gaussian projection.
pub fn recover_nd_randomized<R: Rng + ?Sized>(
    truth: &PointCloudND,
    separation: f64,
    kappa: f64,
    accuracy: f64,
    beta_source: BetaSource,
    rng: &mut R,
    options: &NdOptions,
) -> Result<RandomizedRecovery> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(RecoveryError::InvalidArgument(format!("kappa must lie in (0, 1), got {kappa}")));
    }
    if !(separation > 0.0) || !(accuracy > 0.0) {
        return Err(RecoveryError::InvalidArgument(
            "separation and accuracy must be positive".into(),
        ));
    }
    if !truth.is_on_unit_sphere(SPHERE_TOL) {
        return Err(RecoveryError::InvalidArgument("points must have unit norm".into()));
    }
    if truth.n() >= 2 && truth.min_pairwise_distance() < separation {
        return Err(RecoveryError::AssumptionViolation(format!(
            "points are {} apart, less than the required separation {separation}",
            truth.min_pairwise_distance()
        )));
    }

    let (n, d) = (truth.n(), truth.d());
    let projection = random_projection(d, rng)?;
    let projected_truth = projection.project(truth)?;
    let beta = match beta_source {
        BetaSource::Exact if n >= 2 => separation_constant(&projected_truth),
        // A single point imposes no separation; any positive value works.
        BetaSource::Exact => 1.0,
        BetaSource::Formula { constant } => beta_formula(constant, separation, kappa, n, d),
    };
    if !(beta > 0.0) {
        return Err(RecoveryError::AssumptionViolation(
            "projected points share a coordinate or a coordinate sum".into(),
        ));
    }

    let inner = recover_nd_deterministic(&projected_truth, beta, accuracy / d as f64, rng, options)?;
    let cloud = projection.unproject(&inner.cloud)?;
    let matched_error = matched_error_nd(&cloud, truth, PointNorm::Euclidean)?;
    Ok(RandomizedRecovery {
        cloud,
        projection,
        projected_truth,
        beta,
        inner,
        matched_error,
    })
}

/// `n` unit vectors in `d` dimensions, pairwise at least `separation` apart,
/// by rejection from the uniform distribution on the sphere.
pub fn sample_sphere_cloud<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    separation: f64,
    rng: &mut R,
) -> Result<PointCloudND> {
    if n == 0 || d == 0 {
        return Err(RecoveryError::InvalidArgument("n and d must be at least 1".into()));
    }
    for _ in 0..MAX_SPHERE_DRAWS {
        let mut coords = Vec::with_capacity(n * d);
        for _ in 0..n {
            let raw: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let len = euclidean(&raw);
            coords.extend(raw.iter().map(|x| x / len));
        }
        let cloud = PointCloudND::new(n, d, coords)?;
        if n < 2 || cloud.min_pairwise_distance() >= separation {
            return Ok(cloud);
        }
    }
    Err(RecoveryError::Numerical(format!(
        "no {n}-point cloud with separation {separation} after {MAX_SPHERE_DRAWS} draws"
    )))
}

/// `n` points with coordinates uniform on `[-1, 1]` and separation constant
/// at least `beta`, by rejection.
pub fn sample_box_cloud<R: Rng + ?Sized>(n: usize, d: usize, beta: f64, rng: &mut R) -> Result<PointCloudND> {
    if n == 0 || d == 0 {
        return Err(RecoveryError::InvalidArgument("n and d must be at least 1".into()));
    }
    for _ in 0..MAX_SPHERE_DRAWS {
        let coords: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let cloud = PointCloudND::new(n, d, coords)?;
        if n < 2 || separation_constant(&cloud) >= beta {
            return Ok(cloud);
        }
    }
    Err(RecoveryError::Numerical(format!(
        "no {n}-point cloud with separation constant {beta} after {MAX_SPHERE_DRAWS} draws"
    )))
}

/// Minimum separation of the measure formed by one coordinate.
pub fn coordinate_separation(cloud: &PointCloudND, q: usize) -> Result<f64> {
    let measure = SparseMeasure1D::new(cloud.coordinate(q))?;
    Ok(min_separation(&measure)?.min_separation)
}
