//! Estimators: exact marginals, shot-based frequencies, maximum-likelihood
//! amplitude estimation, and the two classical oracles (random-injection
//! Monte Carlo and exhaustive grid sampling) used for equivalence and
//! convergence checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuits::{build_grover_operator, BooleanThreadFunction};
use crate::error::{Error, Result};
use crate::sim::{Circuit, StateVector};

/// Configuration for maximum-likelihood amplitude estimation.
#[derive(Debug, Clone)]
pub struct MlaeConfig {
    /// Grover powers, nondecreasing (e.g. 0, 1, 2, 4, 8).
    pub grover_powers: Vec<u32>,
    pub shots_per_power: u64,
    /// Coarse grid resolution for the likelihood search over theta in [0, pi/2].
    pub grid_points: usize,
}

impl MlaeConfig {
    pub fn new(grover_powers: Vec<u32>, shots_per_power: u64, grid_points: usize) -> Result<Self> {
        if grover_powers.is_empty() {
            return Err(Error::InvalidArgument("grover_powers must be nonempty".into()));
        }
        if grover_powers.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument("grover_powers must be nondecreasing".into()));
        }
        if shots_per_power == 0 {
            return Err(Error::InvalidArgument("shots_per_power must be >= 1".into()));
        }
        if grid_points < 1000 {
            return Err(Error::InvalidArgument("grid_points must be >= 1000".into()));
        }
        Ok(MlaeConfig { grover_powers, shots_per_power, grid_points })
    }

    /// Oracle cost of one run: sum over powers of (2k+1) * shots_per_power.
    pub fn oracle_cost(&self) -> u64 {
        self.grover_powers.iter().map(|&k| (2 * k as u64 + 1) * self.shots_per_power).sum()
    }

    /// Linear power schedule 0..M sized so that the oracle cost
    /// s*(M+1)^2 lands nearest `budget`. Linear increments keep consecutive
    /// likelihood factors close enough to suppress mode-picking errors that
    /// plague sparse geometric schedules at small shot counts.
    pub fn for_budget(budget: u64, shots_per_power: u64) -> Result<Self> {
        if budget == 0 {
            return Err(Error::InvalidArgument("budget must be >= 1".into()));
        }
        if shots_per_power == 0 {
            return Err(Error::InvalidArgument("shots_per_power must be >= 1".into()));
        }
        let top = ((budget as f64 / shots_per_power as f64).sqrt().round() as u32).max(1);
        MlaeConfig::new((0..top).collect(), shots_per_power, 10_000)
    }

    /// Shots per power used by the budgeted convergence schedule.
    pub const BUDGET_SHOTS: u64 = 8;
}

/// Result of one MLAE run.
#[derive(Debug, Clone, Copy)]
pub struct MlaeEstimate {
    pub amplitude: f64,
    pub oracle_cost: u64,
    /// Set when every power returned all-zero or all-one counts; the
    /// returned amplitude is then a boundary value.
    pub degenerate: bool,
}

/// One point on a convergence curve.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct ConvergencePoint {
    pub cost: u64,
    pub rmse: f64,
    /// Jackknife standard error of the RMSE.
    pub stderr: f64,
}

/// Both convergence curves plus their fitted log-log slopes.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ConvergenceResult {
    pub classical: Vec<ConvergencePoint>,
    pub mlae: Vec<ConvergencePoint>,
    pub classical_slope: f64,
    pub mlae_slope: f64,
}

/// Exact P(good_qubit = 1) after applying `prep` to the all-zeros state.
pub fn exact_amplitude(prep: &Circuit, good_qubit: usize) -> Result<f64> {
    let mut s = StateVector::new(prep.n_qubits)?;
    s.apply_circuit(prep)?;
    s.marginal_probability(good_qubit, true)
}

/// Classical Method-1 oracle: draw a thread uniformly and r uniform in
/// {0,1,2,3}, accumulate f(x) XOR (r == 3), return the sample mean.
pub fn mc_random_injection(f: &BooleanThreadFunction, samples: u64, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be >= 1".into()));
    }
    let threads = 1usize << f.thread_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = 0u64;
    for _ in 0..samples {
        let x = rng.random_range(0..threads);
        let r = rng.random_range(0u8..4);
        let g = f.eval(x) ^ (r == 3);
        acc += u64::from(g);
    }
    Ok(acc as f64 / samples as f64)
}

/// Classical Method-2 oracle: exhaustive mean of f(x) XOR (r == 3) over all
/// (thread, r) pairs. Equals (3/4) fbar + (1/4)(1 - fbar) exactly.
pub fn grid_sampling_exact(f: &BooleanThreadFunction) -> f64 {
    let threads = 1usize << f.thread_count();
    let mut acc = 0u64;
    for x in 0..threads {
        for r in 0..4u8 {
            acc += u64::from(f.eval(x) ^ (r == 3));
        }
    }
    acc as f64 / (4 * threads) as f64
}

/// Shot-frequency estimate of the good-qubit marginal.
pub fn sampled_amplitude(prep: &Circuit, good_qubit: usize, shots: u64, seed: u64) -> Result<f64> {
    let mut s = StateVector::new(prep.n_qubits)?;
    s.apply_circuit(prep)?;
    let hist = s.sample_shots(shots, seed)?;
    let ones: u64 = hist
        .counts
        .iter()
        .enumerate()
        .filter(|(i, _)| (i >> good_qubit) & 1 == 1)
        .map(|(_, &c)| c)
        .sum();
    Ok(ones as f64 / shots as f64)
}

fn log_likelihood(theta: f64, counts: &[(u32, u64, u64)]) -> f64 {
    // counts: (power k, hits, shots); success probability sin^2((2k+1) theta)
    let eps = 1e-12;
    counts
        .iter()
        .map(|&(k, h, n)| {
            let p = ((2.0 * k as f64 + 1.0) * theta).sin().powi(2).clamp(eps, 1.0 - eps);
            h as f64 * p.ln() + (n - h) as f64 * (1.0 - p).ln()
        })
        .sum()
}

fn grid_maximize(counts: &[(u32, u64, u64)], lo: f64, hi: f64, points: usize) -> f64 {
    let step = (hi - lo) / points as f64;
    let mut best = lo;
    let mut best_ll = f64::NEG_INFINITY;
    for j in 0..=points {
        let theta = lo + j as f64 * step;
        let ll = log_likelihood(theta, counts);
        if ll > best_ll {
            best_ll = ll;
            best = theta;
        }
    }
    best
}

/// Maximum-likelihood amplitude estimation: sample the good qubit after
/// prep . Q^k for each configured power, then maximize the product of
/// binomial likelihoods over a theta grid with two 10x local refinements.
pub fn mlae_estimate(
    prep: &Circuit,
    good_qubit: usize,
    cfg: &MlaeConfig,
    seed: u64,
) -> Result<MlaeEstimate> {
    let grover = build_grover_operator(prep, good_qubit)?;
    let mut counts = Vec::with_capacity(cfg.grover_powers.len());
    let mut state = StateVector::new(prep.n_qubits)?;
    state.apply_circuit(prep)?;
    let mut applied_power = 0u32;
    for (idx, &k) in cfg.grover_powers.iter().enumerate() {
        // powers are nondecreasing: extend the same state instead of rebuilding
        while applied_power < k {
            state.apply_circuit(&grover)?;
            applied_power += 1;
        }
        let p_good = state.marginal_probability(good_qubit, true)?;
        // binomial draw of the good bit; one stream per power
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(idx as u64));
        let hits = (0..cfg.shots_per_power).filter(|_| rng.random::<f64>() < p_good).count() as u64;
        counts.push((k, hits, cfg.shots_per_power));
    }

    let oracle_cost = cfg.oracle_cost();
    let all_zero = counts.iter().all(|&(_, h, _)| h == 0);
    let all_one = counts.iter().all(|&(_, h, n)| h == n);
    if all_zero || all_one {
        return Ok(MlaeEstimate {
            amplitude: if all_zero { 0.0 } else { 1.0 },
            oracle_cost,
            degenerate: true,
        });
    }

    let mut lo = 0.0f64;
    let mut hi = std::f64::consts::FRAC_PI_2;
    let mut points = cfg.grid_points;
    let mut theta = grid_maximize(&counts, lo, hi, points);
    for _ in 0..2 {
        let step = (hi - lo) / points as f64;
        lo = (theta - step).max(0.0);
        hi = (theta + step).min(std::f64::consts::FRAC_PI_2);
        // 20 points over a 2-step window: 10x finer resolution per pass
        points = 20;
        theta = grid_maximize(&counts, lo, hi, points);
    }
    Ok(MlaeEstimate { amplitude: theta.sin().powi(2), oracle_cost, degenerate: false })
}

/// Least-squares slope of ln(y) against ln(x).
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

fn rmse_with_jackknife(errors_sq: &[f64]) -> (f64, f64) {
    let n = errors_sq.len();
    let total: f64 = errors_sq.iter().sum();
    let rmse = (total / n as f64).sqrt();
    if n < 2 {
        return (rmse, 0.0);
    }
    let loo: Vec<f64> =
        errors_sq.iter().map(|e| ((total - e) / (n as f64 - 1.0)).sqrt()).collect();
    let mean = loo.iter().sum::<f64>() / n as f64;
    let var = loo.iter().map(|r| (r - mean).powi(2)).sum::<f64>() * (n as f64 - 1.0) / n as f64;
    (rmse, var.sqrt())
}

/// Derives one generator stream per (method, cost, trial) so results do not
/// depend on execution order.
fn trial_seed(master: u64, method: u64, cost: u64, trial: u64) -> u64 {
    // splitmix64 over the packed identifiers
    let mut z = master
        .wrapping_add(method.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(cost.wrapping_mul(0xBF58_476D_1CE4_E5B9))
        .wrapping_add(trial.wrapping_mul(0x94D0_49BB_1331_11EB));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs both estimators over a cost grid and reports RMSE per cost point:
/// (a) plain shot sampling with `cost` shots, (b) MLAE with total oracle
/// cost near `cost` (linear power schedule, 8 shots per power).
pub fn convergence_experiment(
    prep: &Circuit,
    good_qubit: usize,
    cost_grid: &[u64],
    trials: u64,
    seed: u64,
) -> Result<ConvergenceResult> {
    if cost_grid.is_empty() {
        return Err(Error::InvalidArgument("cost grid must be nonempty".into()));
    }
    if trials < 10 {
        return Err(Error::InvalidArgument("trials must be >= 10".into()));
    }
    let a = exact_amplitude(prep, good_qubit)?;

    let mut classical = Vec::new();
    for &m in cost_grid {
        let errs: Vec<f64> = (0..trials)
            .map(|t| {
                let s = trial_seed(seed, 0, m, t);
                sampled_amplitude(prep, good_qubit, m, s).map(|est| (est - a).powi(2))
            })
            .collect::<Result<_>>()?;
        let (rmse, stderr) = rmse_with_jackknife(&errs);
        classical.push(ConvergencePoint { cost: m, rmse, stderr });
    }

    let mut mlae = Vec::new();
    for &m in cost_grid {
        let cfg = MlaeConfig::for_budget(m, MlaeConfig::BUDGET_SHOTS)?;
        let cost = cfg.oracle_cost();
        let errs: Vec<f64> = (0..trials)
            .map(|t| {
                let s = trial_seed(seed, 1, m, t);
                mlae_estimate(prep, good_qubit, &cfg, s).map(|e| (e.amplitude - a).powi(2))
            })
            .collect::<Result<_>>()?;
        let (rmse, stderr) = rmse_with_jackknife(&errs);
        mlae.push(ConvergencePoint { cost, rmse, stderr });
    }

    let fit = |pts: &[ConvergencePoint]| {
        let xy: Vec<(f64, f64)> =
            pts.iter().map(|p| (p.cost as f64, p.rmse.max(1e-300))).collect();
        log_log_slope(&xy)
    };
    Ok(ConvergenceResult {
        classical_slope: fit(&classical),
        mlae_slope: fit(&mlae),
        classical,
        mlae,
    })
}
