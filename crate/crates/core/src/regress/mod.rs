//! OLS with k-fold out-of-sample R², a random-intercept mixed model fitted
//! by profiled REML, and Elo win probability.

mod linalg;

pub use linalg::DesignMatrix;

use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::rng::StreamRng;
use crate::stats::dist;

/// Ordinary least squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub se: Vec<f64>,
    /// Residual variance with n - p denominator.
    pub sigma2: f64,
    /// In-sample R² about the mean of y.
    pub r_squared: f64,
    pub residuals: Vec<f64>,
    pub n: usize,
}

/// Least squares via Householder QR. Requires more rows than columns and a
/// full-rank design.
pub fn ols_fit(x: &DesignMatrix, y: &[f64]) -> Result<OlsFit, RegressError> {
    let sol = linalg::qr_least_squares(x, y)?;
    let n = x.n_rows();
    let p = x.n_cols();
    let fitted = x.predict(&sol.coeffs);
    let residuals: Vec<f64> = y.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    let sigma2 = rss / (n - p) as f64;
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean_y) * (v - mean_y)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - rss / ss_tot } else { 1.0 };
    let se = (0..p)
        .map(|j| math::sqrt(sigma2 * sol.xtx_inv[j * p + j]))
        .collect();
    Ok(OlsFit {
        coefficients: sol.coeffs,
        se,
        sigma2,
        r_squared,
        residuals,
        n,
    })
}

/// What SS_tot is computed about in held-out R².
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsTotMode {
    /// About the held-out fold's own mean (default; folds need >= 2 points).
    HoldoutMean,
    /// About the training mean (permits singleton folds, e.g. leave-one-out).
    TrainingMean,
}

/// Cross-validated out-of-sample R².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvR2 {
    pub mean_r2: f64,
    /// Sample standard deviation across folds.
    pub sd_r2: f64,
    pub k: usize,
}

/// k-fold out-of-sample R²: shuffle rows with substream 0 of `rng`, split
/// into k near-equal folds, fit on k-1 folds, and score the held-out fold as
/// `1 - SS_res / SS_tot`.
pub fn kfold_r2(
    x: &DesignMatrix,
    y: &[f64],
    k: usize,
    rng: &StreamRng,
    ss_tot_mode: SsTotMode,
) -> Result<CvR2, RegressError> {
    let n = x.n_rows();
    if y.len() != n {
        return Err(RegressError::LengthMismatch {
            left: n,
            right: y.len(),
        });
    }
    if k < 2 || k > n {
        return Err(RegressError::BadFoldCount { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    rng.stream(0).shuffle(&mut order);

    let base = n / k;
    let extra = n % k;
    let mut r2s = Vec::with_capacity(k);
    let mut start = 0usize;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        let test: Vec<usize> = order[start..start + size].to_vec();
        let train: Vec<usize> = order[..start]
            .iter()
            .chain(order[start + size..].iter())
            .copied()
            .collect();
        start += size;

        if ss_tot_mode == SsTotMode::HoldoutMean && size < 2 {
            return Err(RegressError::FoldTooSmall { size });
        }
        let x_train = x.select_rows(&train);
        let y_train: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let fit = ols_fit(&x_train, &y_train)?;

        let x_test = x.select_rows(&test);
        let y_test: Vec<f64> = test.iter().map(|&i| y[i]).collect();
        let pred = x_test.predict(&fit.coefficients);
        let ss_res: f64 = y_test
            .iter()
            .zip(pred.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let center = match ss_tot_mode {
            SsTotMode::HoldoutMean => y_test.iter().sum::<f64>() / size as f64,
            SsTotMode::TrainingMean => y_train.iter().sum::<f64>() / train.len() as f64,
        };
        let ss_tot: f64 = y_test
            .iter()
            .map(|v| (v - center) * (v - center))
            .sum();
        if ss_tot <= 0.0 {
            if ss_res <= 1e-24 {
                // Constant held-out values matched exactly.
                r2s.push(1.0);
                continue;
            }
            return Err(RegressError::DegenerateFold { fold });
        }
        r2s.push(1.0 - ss_res / ss_tot);
    }

    let kf = k as f64;
    let mean = r2s.iter().sum::<f64>() / kf;
    let var = if k > 1 {
        r2s.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (kf - 1.0)
    } else {
        0.0
    };
    Ok(CvR2 {
        mean_r2: mean,
        sd_r2: math::sqrt(var),
        k,
    })
}

/// Random-intercept mixed model fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmmFit {
    /// Fixed-effect slope.
    pub beta: f64,
    pub intercept: f64,
    pub sigma2_group: f64,
    pub sigma2_resid: f64,
    pub se_beta: f64,
    /// Two-sided p for the slope from a normal (Wald) z statistic.
    pub p_two_sided: f64,
    /// Wald 95% interval for the slope.
    pub ci95: (f64, f64),
    /// Profiled variance ratio sigma2_group / sigma2_resid.
    pub theta: f64,
    pub converged: bool,
    pub n_groups: usize,
}

const THETA_MAX: f64 = 1e7;
const Z_975: f64 = 1.959963984540054;

struct ProfileEval {
    objective: f64,
    intercept: f64,
    beta: f64,
    sigma2: f64,
    xtwx: [[f64; 2]; 2],
}

struct GroupSums {
    n: f64,
    sx: f64,
    sy: f64,
    sxx: f64,
    sxy: f64,
    syy: f64,
}

/// -2 restricted log-likelihood profiled over the fixed effects and residual
/// variance, as a function of the variance ratio theta. The per-group
/// weight matrix (I + theta J)^{-1} = I - theta/(1 + theta n_g) J is applied
/// in closed form through group sums.
fn profile_objective(groups: &[GroupSums], n: usize, theta: f64) -> Result<ProfileEval, RegressError> {
    let mut xtwx = [[0.0f64; 2]; 2];
    let mut xtwy = [0.0f64; 2];
    let mut logdet_v = 0.0;
    for g in groups {
        let c = theta / (1.0 + theta * g.n);
        xtwx[0][0] += g.n - c * g.n * g.n;
        xtwx[0][1] += g.sx - c * g.n * g.sx;
        xtwx[1][1] += g.sxx - c * g.sx * g.sx;
        xtwy[0] += g.sy - c * g.n * g.sy;
        xtwy[1] += g.sxy - c * g.sx * g.sy;
        logdet_v += math::ln(1.0 + theta * g.n);
    }
    xtwx[1][0] = xtwx[0][1];
    let det = xtwx[0][0] * xtwx[1][1] - xtwx[0][1] * xtwx[1][0];
    if !(det > 0.0) || !det.is_finite() {
        return Err(RegressError::SingularSystem);
    }
    let [b0, b1] = linalg::solve_2x2(xtwx, xtwy)?;

    let mut rss = 0.0;
    for g in groups {
        let c = theta / (1.0 + theta * g.n);
        // Sum of squared residuals and plain residual sum within the group.
        let sq = g.syy - 2.0 * b0 * g.sy - 2.0 * b1 * g.sxy
            + b0 * b0 * g.n
            + 2.0 * b0 * b1 * g.sx
            + b1 * b1 * g.sxx;
        let lin = g.sy - b0 * g.n - b1 * g.sx;
        rss += sq - c * lin * lin;
    }
    let dof = (n - 2) as f64;
    let sigma2 = rss / dof;
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(RegressError::SingularSystem);
    }
    Ok(ProfileEval {
        objective: dof * math::ln(sigma2) + logdet_v + math::ln(det),
        intercept: b0,
        beta: b1,
        sigma2,
        xtwx,
    })
}

/// Fits `y ~ intercept + x` with a random intercept per group by REML:
/// the variance ratio theta is profiled with a bracketed golden-section
/// search to tolerance `tol`, fixed effects come from GLS at the optimum,
/// and the slope gets a Wald se, z-based two-sided p, and 95% CI.
///
/// A single distinct group is the documented degenerate case: theta is
/// pinned to zero and the fit equals OLS.
pub fn lmm_random_intercept(
    y: &[f64],
    x: &[f64],
    groups: &[usize],
    tol: f64,
) -> Result<LmmFit, RegressError> {
    let n = y.len();
    if x.len() != n || groups.len() != n {
        return Err(RegressError::LengthMismatch {
            left: n,
            right: x.len().min(groups.len()),
        });
    }
    if n < 3 {
        return Err(RegressError::TooFewRows { rows: n, cols: 2 });
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(RegressError::NonFinite);
    }
    if x.iter().all(|&v| v == x[0]) {
        return Err(RegressError::AllEqualX);
    }
    let tol = if tol > 0.0 { tol } else { 1e-8 };

    let n_group_slots = groups.iter().max().map(|&g| g + 1).unwrap_or(0);
    let mut sums: Vec<GroupSums> = (0..n_group_slots)
        .map(|_| GroupSums {
            n: 0.0,
            sx: 0.0,
            sy: 0.0,
            sxx: 0.0,
            sxy: 0.0,
            syy: 0.0,
        })
        .collect();
    for ((&yi, &xi), &g) in y.iter().zip(x.iter()).zip(groups.iter()) {
        let s = &mut sums[g];
        s.n += 1.0;
        s.sx += xi;
        s.sy += yi;
        s.sxx += xi * xi;
        s.sxy += xi * yi;
        s.syy += yi * yi;
    }
    sums.retain(|s| s.n > 0.0);
    let n_groups = sums.len();
    if n_groups == 0 {
        return Err(RegressError::TooFewRows { rows: 0, cols: 2 });
    }

    let (theta, converged) = if n_groups == 1 {
        (0.0, true)
    } else {
        // Coarse bracket on a log-spaced grid (plus zero), then
        // golden-section inside the bracketing interval.
        let mut grid = alloc::vec![0.0f64];
        let lo_exp = -6.0;
        let hi_exp = math::log10(THETA_MAX);
        let steps = 80usize;
        for i in 0..=steps {
            grid.push(math::exp10(lo_exp + (hi_exp - lo_exp) * i as f64 / steps as f64));
        }
        let mut best_idx = 0usize;
        let mut best_val = f64::INFINITY;
        for (i, &t) in grid.iter().enumerate() {
            if let Ok(e) = profile_objective(&sums, n, t) {
                if e.objective < best_val {
                    best_val = e.objective;
                    best_idx = i;
                }
            }
        }
        let lo = if best_idx == 0 { 0.0 } else { grid[best_idx - 1] };
        let hi = if best_idx + 1 < grid.len() {
            grid[best_idx + 1]
        } else {
            THETA_MAX
        };
        let mut a = lo;
        let mut b = hi;
        const INV_PHI: f64 = 0.618033988749895;
        let mut c = b - INV_PHI * (b - a);
        let mut d = a + INV_PHI * (b - a);
        let mut fc = profile_objective(&sums, n, c)?.objective;
        let mut fd = profile_objective(&sums, n, d)?.objective;
        while b - a > tol * (1.0 + a) {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - INV_PHI * (b - a);
                fc = profile_objective(&sums, n, c)?.objective;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + INV_PHI * (b - a);
                fd = profile_objective(&sums, n, d)?.objective;
            }
        }
        let theta = 0.5 * (a + b);
        let at_boundary = theta <= tol || theta >= THETA_MAX * (1.0 - 1e-6);
        (theta, !at_boundary)
    };

    let eval = profile_objective(&sums, n, theta)?;
    let det = eval.xtwx[0][0] * eval.xtwx[1][1] - eval.xtwx[0][1] * eval.xtwx[1][0];
    let var_beta = eval.sigma2 * eval.xtwx[0][0] / det;
    let se_beta = math::sqrt(var_beta);
    let z = eval.beta / se_beta;
    Ok(LmmFit {
        beta: eval.beta,
        intercept: eval.intercept,
        sigma2_group: theta * eval.sigma2,
        sigma2_resid: eval.sigma2,
        se_beta,
        p_two_sided: dist::normal_two_sided_p(z),
        ci95: (eval.beta - Z_975 * se_beta, eval.beta + Z_975 * se_beta),
        theta,
        converged,
        n_groups,
    })
}

/// Probability that the rater with rating `r_a` is preferred over the rater
/// with rating `r_b`: `1 / (1 + 10^((r_b - r_a)/400))`.
///
/// Computed in a canonical orientation so that
/// `elo_win_prob(a, b) + elo_win_prob(b, a) == 1.0` holds exactly.
pub fn elo_win_prob(r_a: f64, r_b: f64) -> f64 {
    let d = r_b - r_a;
    if d >= 0.0 {
        1.0 / (1.0 + math::exp10(d / 400.0))
    } else {
        1.0 - 1.0 / (1.0 + math::exp10(-d / 400.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegressError {
    EmptyDesign,
    LengthMismatch { left: usize, right: usize },
    TooFewRows { rows: usize, cols: usize },
    RankDeficient { column: usize },
    NonFinite,
    SingularSystem,
    AllEqualX,
    BadFoldCount { k: usize, n: usize },
    FoldTooSmall { size: usize },
    DegenerateFold { fold: usize },
}

impl fmt::Display for RegressError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegressError::EmptyDesign => write!(f, "design matrix has no columns"),
            RegressError::LengthMismatch { left, right } => {
                write!(f, "lengths differ: {left} vs {right}")
            }
            RegressError::TooFewRows { rows, cols } => {
                write!(f, "{rows} rows cannot fit {cols} columns")
            }
            RegressError::RankDeficient { column } => {
                write!(f, "design is rank deficient at column {column}")
            }
            RegressError::NonFinite => write!(f, "input contains non-finite values"),
            RegressError::SingularSystem => write!(f, "GLS system is singular"),
            RegressError::AllEqualX => write!(f, "predictor is constant"),
            RegressError::BadFoldCount { k, n } => {
                write!(f, "fold count {k} invalid for {n} rows (need 2 <= k <= n)")
            }
            RegressError::FoldTooSmall { size } => {
                write!(f, "fold of {size} points cannot anchor held-out SS_tot")
            }
            RegressError::DegenerateFold { fold } => {
                write!(f, "held-out fold {fold} has zero variance")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for RegressError {}
