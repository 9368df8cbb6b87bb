//! Rank-distribution law fitting and class membership.
//!
//! Three laws describe the systems of interest: Zipf's rank-frequency law
//! `p(i) = c i^(-alpha)`, the size-rank law `l(i) = a_ns log_N i + b_ns`, and
//! the size-probability law `l(i) = a_ud (-log_N p(i)) + b_ud`. Any two of
//! them determine the third; in particular `alpha = a_ns / a_ud` and
//! `c = N^((b_ud - b_ns) / a_ud)`.
//!
//! Naming note: the literature is not consistent about which subscript goes
//! with which regressor. Here the binding is fixed by the regressor:
//! `a_ns`/`b_ns` always belong to the law on log-rank (the non-singular
//! optimum), `a_ud`/`b_ud` to the law on negative log-probability (the
//! uniquely decodable optimum). That is the binding under which the
//! conversions above hold.

use serde::Serialize;
use thiserror::Error;

use crate::rank::{self, LengthProfile, RankDistribution, RankError};

/// Largest support accepted when materializing a Zipf distribution.
pub const MAX_ZIPF_SUPPORT: usize = 100_000_000;

/// Exponent bracket searched by the Zipf maximum-likelihood fit.
pub const ZIPF_ALPHA_BRACKET: (f64, f64) = (0.0, 20.0);

#[derive(Debug, Error)]
pub enum FitError {
    #[error("exponent must be finite and non-negative, got {0}")]
    InvalidAlpha(f64),
    #[error("support of {got} is too small, need at least {needed}")]
    SupportTooSmall { needed: usize, got: usize },
    #[error("support of {0} exceeds {MAX_ZIPF_SUPPORT}")]
    SupportTooLarge(usize),
    #[error("base must be at least 2, got {0}")]
    InvalidBase(usize),
    #[error("counts must be positive (entry {0})")]
    InvalidCount(usize),
    #[error("score has no root in the bracket; boundary {boundary} has score {score}")]
    NonConvergence { boundary: f64, score: f64 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("regressor is constant, slope is undefined")]
    CollinearRegressor,
    #[error("slope of the size-probability law must be positive, got {0}")]
    NonPositiveSlope(f64),
    #[error(transparent)]
    Rank(#[from] RankError),
}

fn check_base(base: usize) -> Result<f64, FitError> {
    if base < 2 {
        return Err(FitError::InvalidBase(base));
    }
    Ok((base as f64).ln())
}

/// A fitted (or exact) truncated Zipf law `p(i) = c i^(-alpha)` on ranks
/// `1..=n`, with `c = 1 / sum(i^-alpha)` and `beta = -log_N c`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZipfFit {
    pub alpha: f64,
    pub c: f64,
    pub beta: f64,
    pub n: usize,
    pub log_likelihood: f64,
    pub base: usize,
}

/// A fitted truncated geometric law `p(i)` proportional to `exp(-lambda i)`
/// on ranks `1..=n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentialFit {
    pub lambda: f64,
    pub n: usize,
    pub log_likelihood: f64,
}

/// Which of the two magnitude laws a linear fit describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LawKind {
    /// Magnitude on log-rank.
    SizeRank,
    /// Magnitude on negative log-probability.
    SizeProbability,
}

/// Least-squares line of a magnitude law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearLawFit {
    pub law: LawKind,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub weighted: bool,
}

/// Outcome of power-law versus exponential model selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelVerdict {
    PowerLaw,
    Exponential,
    Inconclusive,
}

/// Both fits plus the AIC comparison. `delta_aic` is AIC(exponential) minus
/// AIC(power law): positive favors the power law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSelection {
    pub verdict: ModelVerdict,
    pub delta_aic: f64,
    pub zipf: ZipfFit,
    pub exponential: ExponentialFit,
}

/// The six parameters linking the three laws in one base.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupParams {
    pub alpha: f64,
    pub c: f64,
    pub a_ns: f64,
    pub b_ns: f64,
    pub a_ud: f64,
    pub b_ud: f64,
    pub base: usize,
}

/// Pass thresholds for class membership.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassThresholds {
    /// Minimum r-squared demanded of both law fits.
    pub min_r2: f64,
    /// Allowed relative gap between the implied and the directly fitted
    /// exponent. Reported; not part of the verdict.
    pub alpha_tolerance: f64,
}

impl Default for ClassThresholds {
    fn default() -> Self {
        Self {
            min_r2: 0.95,
            alpha_tolerance: 0.05,
        }
    }
}

/// Residuals of the linear-separation identities at given `(alpha, beta)`:
/// `H = alpha <log_N i> + beta` and, on a profile,
/// `eta_ud = alpha eta_ns + beta / <l>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationResiduals {
    pub expectation: f64,
    pub efficiency: Option<f64>,
}

/// Evidence and verdict for membership in the class of systems linearly
/// displaced from both coding optima.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMembershipReport {
    pub n: usize,
    pub base: usize,
    /// Tau between probabilities and magnitudes; absent when degenerate
    /// (uniform distribution).
    pub tau: Option<f64>,
    pub tau_ok: bool,
    pub size_rank: Option<LinearLawFit>,
    pub size_probability: Option<LinearLawFit>,
    pub slopes_nonnegative: bool,
    /// `a_ns / a_ud` when the size-probability slope is positive.
    pub implied_alpha: Option<f64>,
    /// `N^((b_ud - b_ns) / a_ud)` when defined.
    pub implied_c: Option<f64>,
    /// Direct maximum-likelihood Zipf fit, when counts are available.
    pub direct_zipf: Option<ZipfFit>,
    /// Relative gap between implied and fitted exponent.
    pub alpha_discrepancy: Option<f64>,
    pub alpha_within_tolerance: Option<bool>,
    /// Linear-separation residuals at the fitted `(alpha, beta)`.
    pub separation: Option<SeparationResiduals>,
    /// The six law parameters implied by the two fits.
    pub group: Option<GroupParams>,
    pub verdict: bool,
    pub thresholds: ClassThresholds,
    pub diagnostics: Vec<String>,
}

/// Exact truncated Zipf distribution `p(i) = c i^(-alpha)` over `1..=n`.
pub fn zipf_distribution(alpha: f64, n: usize) -> Result<RankDistribution, FitError> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(FitError::InvalidAlpha(alpha));
    }
    if n < 1 {
        return Err(FitError::SupportTooSmall { needed: 1, got: 0 });
    }
    if n > MAX_ZIPF_SUPPORT {
        return Err(FitError::SupportTooLarge(n));
    }
    let weights: Vec<f64> = (1..=n).map(|i| (i as f64).powf(-alpha)).collect();
    let z: f64 = weights.iter().sum();
    let probs = weights.iter().map(|w| w / z).collect();
    Ok(RankDistribution::new(probs)?)
}

/// ln of the truncated power-law normalizer and the model mean of ln(rank).
fn zipf_moments(log_ranks: &[f64], alpha: f64) -> (f64, f64) {
    let mut z = 0.0;
    let mut weighted = 0.0;
    for &lr in log_ranks {
        let w = (-alpha * lr).exp();
        z += w;
        weighted += w * lr;
    }
    (z, weighted / z)
}

/// Maximum-likelihood fit of a truncated discrete power law over the
/// observed support. `counts[i]` is the count of rank `i + 1`; the score
/// function's root is bracketed in alpha within [`ZIPF_ALPHA_BRACKET`].
pub fn fit_zipf_mle(counts: &[u64], base: usize) -> Result<ZipfFit, FitError> {
    let ln_base = check_base(base)?;
    let n = counts.len();
    if n < 2 {
        return Err(FitError::SupportTooSmall { needed: 2, got: n });
    }
    for (i, &c) in counts.iter().enumerate() {
        if c == 0 {
            return Err(FitError::InvalidCount(i));
        }
    }
    let log_ranks: Vec<f64> = (1..=n).map(|i| (i as f64).ln()).collect();
    let total: f64 = counts.iter().map(|&c| c as f64).sum();
    let observed_mean: f64 = counts
        .iter()
        .zip(&log_ranks)
        .map(|(&c, &lr)| c as f64 * lr)
        .sum::<f64>()
        / total;

    // The model mean of ln(rank) decreases in alpha; bisect the score
    // g(alpha) = model_mean(alpha) - observed_mean.
    let score = |alpha: f64| zipf_moments(&log_ranks, alpha).1 - observed_mean;
    let (mut lo, mut hi) = ZIPF_ALPHA_BRACKET;
    let score_lo = score(lo);
    let score_hi = score(hi);
    let alpha = if score_lo <= 0.0 {
        // Data no more top-heavy than uniform: root at or below zero.
        if score_lo.abs() <= 1e-12 {
            0.0
        } else {
            return Err(FitError::NonConvergence {
                boundary: lo,
                score: score_lo,
            });
        }
    } else if score_hi > 0.0 {
        return Err(FitError::NonConvergence {
            boundary: hi,
            score: score_hi,
        });
    } else {
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            if score(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };

    let (z, _) = zipf_moments(&log_ranks, alpha);
    let log_likelihood = -alpha * observed_mean * total - total * z.ln();
    Ok(ZipfFit {
        alpha,
        c: 1.0 / z,
        beta: z.ln() / ln_base,
        n,
        log_likelihood,
        base,
    })
}

/// Model mean rank of a truncated geometric law with decay `lambda` over
/// `1..=n`.
fn geometric_mean_rank(lambda: f64, n: usize) -> f64 {
    let nf = n as f64;
    if lambda * nf < 1e-8 {
        // Uniform limit with the first-order correction in lambda.
        return (nf + 1.0) / 2.0 - lambda * (nf * nf - 1.0) / 12.0;
    }
    let t = (-lambda).exp();
    let tn = (-lambda * nf).exp();
    let one_minus_t = -(-lambda).exp_m1();
    let one_minus_tn = -(-lambda * nf).exp_m1();
    (1.0 - tn * (nf + 1.0 - nf * t)) / (one_minus_t * one_minus_tn)
}

fn geometric_log_normalizer(lambda: f64, n: usize) -> f64 {
    if lambda * (n as f64) < 1e-8 {
        return (n as f64).ln() - lambda * (n as f64 + 1.0) / 2.0;
    }
    let one_minus_t = -(-lambda).exp_m1();
    let one_minus_tn = -(-lambda * n as f64).exp_m1();
    -lambda + one_minus_tn.ln() - one_minus_t.ln()
}

/// Maximum-likelihood fit of a truncated geometric law over ranks `1..=n`.
/// The decay solves mean-rank inversion; closed-form moments make each
/// evaluation O(1).
pub fn fit_exponential_mle(counts: &[u64]) -> Result<ExponentialFit, FitError> {
    let n = counts.len();
    if n < 2 {
        return Err(FitError::SupportTooSmall { needed: 2, got: n });
    }
    for (i, &c) in counts.iter().enumerate() {
        if c == 0 {
            return Err(FitError::InvalidCount(i));
        }
    }
    let total: f64 = counts.iter().map(|&c| c as f64).sum();
    let observed_mean: f64 = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| c as f64 * (i + 1) as f64)
        .sum::<f64>()
        / total;
    if observed_mean <= 1.0 + 1e-12 {
        return Err(FitError::Degenerate("all mass on rank 1".into()));
    }

    let score = |lambda: f64| geometric_mean_rank(lambda, n) - observed_mean;
    let lambda = if score(0.0) <= 1e-12 {
        // Flat (or anti-sorted) data: the decay degenerates to zero.
        0.0
    } else {
        let mut hi = 1.0;
        while score(hi) > 0.0 {
            hi *= 2.0;
            if hi > 1024.0 {
                return Err(FitError::NonConvergence {
                    boundary: hi,
                    score: score(hi),
                });
            }
        }
        let mut lo = 0.0;
        while hi - lo > 1e-12 * (1.0 + hi) {
            let mid = 0.5 * (lo + hi);
            if score(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };

    let log_likelihood = -lambda * observed_mean * total - total * geometric_log_normalizer(lambda, n);
    Ok(ExponentialFit {
        lambda,
        n,
        log_likelihood,
    })
}

/// Straight-line fit of the rank-frequency relation in double logarithmic
/// scale. The negated slope estimates the exponent; kept as a diagnostic
/// beside the maximum-likelihood fit, which handles ties and heavy tails
/// better.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogLogDiagnostic {
    pub alpha: f64,
    pub c: f64,
    pub r_squared: f64,
    pub base: usize,
}

pub fn zipf_loglog_diagnostic(
    dist: &RankDistribution,
    base: usize,
) -> Result<LogLogDiagnostic, FitError> {
    let ln_base = check_base(base)?;
    let n = dist.support();
    if n < 3 {
        return Err(FitError::SupportTooSmall { needed: 3, got: n });
    }
    let xs: Vec<f64> = (1..=n).map(|i| (i as f64).ln() / ln_base).collect();
    let ys: Vec<f64> = dist.probs().iter().map(|&p| p.ln() / ln_base).collect();
    let (slope, intercept, r_squared) = weighted_least_squares(&xs, &ys, None)?;
    Ok(LogLogDiagnostic {
        alpha: -slope,
        c: (intercept * ln_base).exp(),
        r_squared,
        base,
    })
}

/// Fits both one-parameter models and compares them by AIC. An absolute AIC
/// difference under 2 is reported as inconclusive.
pub fn select_model(counts: &[u64], base: usize) -> Result<ModelSelection, FitError> {
    let n = counts.len();
    if n < 5 {
        return Err(FitError::SupportTooSmall { needed: 5, got: n });
    }
    let zipf = fit_zipf_mle(counts, base)?;
    let exponential = fit_exponential_mle(counts)?;
    let aic_zipf = 2.0 - 2.0 * zipf.log_likelihood;
    let aic_exp = 2.0 - 2.0 * exponential.log_likelihood;
    let delta_aic = aic_exp - aic_zipf;
    let verdict = if delta_aic >= 2.0 {
        ModelVerdict::PowerLaw
    } else if delta_aic <= -2.0 {
        ModelVerdict::Exponential
    } else {
        ModelVerdict::Inconclusive
    };
    Ok(ModelSelection {
        verdict,
        delta_aic,
        zipf,
        exponential,
    })
}

fn weighted_least_squares(
    xs: &[f64],
    ys: &[f64],
    weights: Option<&[f64]>,
) -> Result<(f64, f64, f64), FitError> {
    let n = xs.len();
    let weight = |i: usize| weights.map_or(1.0, |w| w[i]);
    let total: f64 = (0..n).map(weight).sum();
    let mean_x: f64 = (0..n).map(|i| weight(i) * xs[i]).sum::<f64>() / total;
    let mean_y: f64 = (0..n).map(|i| weight(i) * ys[i]).sum::<f64>() / total;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        let dx = xs[i] - mean_x;
        sxx += weight(i) * dx * dx;
        sxy += weight(i) * dx * (ys[i] - mean_y);
    }
    if sxx <= 1e-18 * n as f64 {
        return Err(FitError::CollinearRegressor);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut sse = 0.0;
    let mut sst = 0.0;
    for i in 0..n {
        let resid = ys[i] - (slope * xs[i] + intercept);
        sse += weight(i) * resid * resid;
        let dy = ys[i] - mean_y;
        sst += weight(i) * dy * dy;
    }
    let r_squared = if sst == 0.0 {
        1.0
    } else {
        (1.0 - sse / sst).clamp(0.0, 1.0)
    };
    Ok((slope, intercept, r_squared))
}

/// Least squares of the magnitudes on log-rank, optionally weighting each
/// rank by its probability.
pub fn fit_size_rank_law(
    profile: &LengthProfile,
    dist: &RankDistribution,
    base: usize,
    weighted: bool,
) -> Result<LinearLawFit, FitError> {
    let ln_base = check_base(base)?;
    if dist.support() != profile.len() {
        return Err(RankError::DimensionMismatch {
            expected: dist.support(),
            got: profile.len(),
        }
        .into());
    }
    let n = dist.support();
    if n < 3 {
        return Err(FitError::SupportTooSmall { needed: 3, got: n });
    }
    let xs: Vec<f64> = (1..=n).map(|i| (i as f64).ln() / ln_base).collect();
    let weights = weighted.then(|| dist.probs());
    let (slope, intercept, r_squared) =
        weighted_least_squares(&xs, profile.lengths(), weights)?;
    Ok(LinearLawFit {
        law: LawKind::SizeRank,
        slope,
        intercept,
        r_squared,
        weighted,
    })
}

/// Least squares of the magnitudes on negative log-probability. Errs with
/// [`FitError::CollinearRegressor`] on a uniform distribution.
pub fn fit_size_probability_law(
    profile: &LengthProfile,
    dist: &RankDistribution,
    base: usize,
    weighted: bool,
) -> Result<LinearLawFit, FitError> {
    let ln_base = check_base(base)?;
    if dist.support() != profile.len() {
        return Err(RankError::DimensionMismatch {
            expected: dist.support(),
            got: profile.len(),
        }
        .into());
    }
    let n = dist.support();
    if n < 3 {
        return Err(FitError::SupportTooSmall { needed: 3, got: n });
    }
    let xs: Vec<f64> = dist.probs().iter().map(|&p| -p.ln() / ln_base).collect();
    let weights = weighted.then(|| dist.probs());
    let (slope, intercept, r_squared) =
        weighted_least_squares(&xs, profile.lengths(), weights)?;
    Ok(LinearLawFit {
        law: LawKind::SizeProbability,
        slope,
        intercept,
        r_squared,
        weighted,
    })
}

/// Zipf parameters from the two law fits: `alpha = a_ns / a_ud`,
/// `c = N^((b_ud - b_ns) / a_ud)`.
pub fn zipf_from_law_params(
    a_ns: f64,
    b_ns: f64,
    a_ud: f64,
    b_ud: f64,
    base: usize,
) -> Result<(f64, f64), FitError> {
    let ln_base = check_base(base)?;
    if a_ud <= 0.0 {
        return Err(FitError::NonPositiveSlope(a_ud));
    }
    let alpha = a_ns / a_ud;
    let c = (ln_base * (b_ud - b_ns) / a_ud).exp();
    Ok((alpha, c))
}

/// Size-probability parameters from Zipf plus the size-rank law:
/// `a_ud = a_ns / alpha`, `b_ud = b_ns + a_ns log_N(c) / alpha`.
pub fn size_probability_from_zipf(
    alpha: f64,
    c: f64,
    a_ns: f64,
    b_ns: f64,
    base: usize,
) -> Result<(f64, f64), FitError> {
    let ln_base = check_base(base)?;
    if alpha <= 0.0 || !alpha.is_finite() {
        return Err(FitError::InvalidAlpha(alpha));
    }
    let a_ud = a_ns / alpha;
    let b_ud = b_ns + a_ns * (c.ln() / ln_base) / alpha;
    Ok((a_ud, b_ud))
}

/// Size-rank parameters from Zipf plus the size-probability law:
/// `a_ns = alpha a_ud`, `b_ns = b_ud - a_ud log_N c`.
pub fn size_rank_from_zipf(
    alpha: f64,
    c: f64,
    a_ud: f64,
    b_ud: f64,
    base: usize,
) -> Result<(f64, f64), FitError> {
    let ln_base = check_base(base)?;
    let a_ns = alpha * a_ud;
    let b_ns = b_ud - a_ud * (c.ln() / ln_base);
    Ok((a_ns, b_ns))
}

/// Residuals of the linear-separation identities at `(alpha, beta)`. The
/// efficiency residual needs a profile with positive mean length.
pub fn check_linear_separation(
    dist: &RankDistribution,
    alpha: f64,
    beta: f64,
    base: usize,
    profile: Option<&LengthProfile>,
) -> Result<SeparationResiduals, FitError> {
    check_base(base)?;
    let h = rank::entropy(dist, base)?;
    let mlr = rank::mean_log_rank(dist, base)?;
    let expectation = (h - (alpha * mlr + beta)).abs();
    let efficiency = match profile {
        None => None,
        Some(profile) => {
            let pair = rank::efficiency_pair(dist, profile, base)?;
            Some((pair.eta_ud - (alpha * pair.eta_ns + beta / pair.mean_length)).abs())
        }
    };
    Ok(SeparationResiduals {
        expectation,
        efficiency,
    })
}

/// Tests class membership: the law of abbreviation must be compatible with
/// optimal coding (tau <= 0), and both magnitude laws must fit with
/// non-negative slopes and r-squared at or above the threshold. The implied
/// Zipf parameters, a direct fit when counts exist, and the
/// linear-separation residuals are reported as evidence.
pub fn assess_class_membership(
    dist: &RankDistribution,
    profile: &LengthProfile,
    base: usize,
    thresholds: ClassThresholds,
) -> Result<ClassMembershipReport, FitError> {
    check_base(base)?;
    if dist.support() != profile.len() {
        return Err(RankError::DimensionMismatch {
            expected: dist.support(),
            got: profile.len(),
        }
        .into());
    }
    let n = dist.support();
    if n < 5 {
        return Err(FitError::SupportTooSmall { needed: 5, got: n });
    }

    let mut diagnostics = Vec::new();
    let probs = dist.probs();
    let uniform = probs[0] == probs[n - 1];

    if uniform {
        // Tau and the size-probability regressor both degenerate.
        diagnostics.push(
            "distribution is uniform: tau and the size-probability law are undefined".to_string(),
        );
        let size_rank = fit_size_rank_law(profile, dist, base, false)?;
        return Ok(ClassMembershipReport {
            n,
            base,
            tau: None,
            tau_ok: false,
            size_rank: Some(size_rank),
            size_probability: None,
            slopes_nonnegative: false,
            implied_alpha: None,
            implied_c: None,
            direct_zipf: None,
            alpha_discrepancy: None,
            alpha_within_tolerance: None,
            separation: None,
            group: None,
            verdict: false,
            thresholds,
            diagnostics,
        });
    }

    let (tau, _) = rank::law_of_abbreviation_holds(dist, profile)?;
    let tau_ok = tau <= 0.0;
    if !tau_ok {
        diagnostics.push(format!("tau = {tau:.4} > 0: frequent units are not shorter"));
    }

    let size_rank = fit_size_rank_law(profile, dist, base, false)?;
    let size_probability = fit_size_probability_law(profile, dist, base, false)?;
    let slopes_nonnegative = size_rank.slope >= 0.0 && size_probability.slope >= 0.0;
    if !slopes_nonnegative {
        diagnostics.push("a fitted slope is negative".to_string());
    }
    let r2_ok = size_rank.r_squared >= thresholds.min_r2
        && size_probability.r_squared >= thresholds.min_r2;
    if !r2_ok {
        diagnostics.push(format!(
            "r-squared below {} (size-rank {:.4}, size-probability {:.4})",
            thresholds.min_r2, size_rank.r_squared, size_probability.r_squared
        ));
    }

    let (implied_alpha, implied_c) = if size_probability.slope > 0.0 {
        let (alpha, c) = zipf_from_law_params(
            size_rank.slope,
            size_rank.intercept,
            size_probability.slope,
            size_probability.intercept,
            base,
        )?;
        (Some(alpha), Some(c))
    } else {
        diagnostics.push("size-probability slope is not positive; implied Zipf parameters undefined".to_string());
        (None, None)
    };

    let direct_zipf = match dist.counts() {
        Some(counts) => Some(fit_zipf_mle(counts, base)?),
        None => None,
    };
    let alpha_discrepancy = match (implied_alpha, &direct_zipf) {
        (Some(ia), Some(z)) if z.alpha.abs() > f64::EPSILON => Some((ia - z.alpha).abs() / z.alpha.abs()),
        _ => None,
    };
    let alpha_within_tolerance = alpha_discrepancy.map(|d| d <= thresholds.alpha_tolerance);
    if let Some(false) = alpha_within_tolerance {
        diagnostics.push(format!(
            "implied alpha deviates from the fitted alpha by {:.2}%",
            alpha_discrepancy.unwrap() * 100.0
        ));
    }

    let separation = match &direct_zipf {
        Some(z) => Some(check_linear_separation(dist, z.alpha, z.beta, base, Some(profile))?),
        None => None,
    };

    let group = match (implied_alpha, implied_c) {
        (Some(alpha), Some(c)) => Some(GroupParams {
            alpha,
            c,
            a_ns: size_rank.slope,
            b_ns: size_rank.intercept,
            a_ud: size_probability.slope,
            b_ud: size_probability.intercept,
            base,
        }),
        _ => None,
    };

    let verdict = tau_ok && slopes_nonnegative && r2_ok;
    Ok(ClassMembershipReport {
        n,
        base,
        tau: Some(tau),
        tau_ok,
        size_rank: Some(size_rank),
        size_probability: Some(size_probability),
        slopes_nonnegative,
        implied_alpha,
        implied_c,
        direct_zipf,
        alpha_discrepancy,
        alpha_within_tolerance,
        separation,
        group,
        verdict,
        thresholds,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    #[test]
    fn zipf_distribution_examples() {
        let uniform = zipf_distribution(0.0, 4).unwrap();
        assert_eq!(uniform.probs(), [0.25, 0.25, 0.25, 0.25]);

        let two = zipf_distribution(1.0, 2).unwrap();
        assert_abs_diff_eq!(two.probs()[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(two.probs()[1], 1.0 / 3.0, epsilon = 1e-15);

        let three = zipf_distribution(2.0, 3).unwrap();
        assert_abs_diff_eq!(three.probs()[0], 36.0 / 49.0, epsilon = 1e-15);
        assert_abs_diff_eq!(three.probs()[1], 9.0 / 49.0, epsilon = 1e-15);
        assert_abs_diff_eq!(three.probs()[2], 4.0 / 49.0, epsilon = 1e-15);

        assert!(matches!(
            zipf_distribution(-1.0, 4),
            Err(FitError::InvalidAlpha(_))
        ));
        assert!(matches!(
            zipf_distribution(1.0, MAX_ZIPF_SUPPORT + 1),
            Err(FitError::SupportTooLarge(_))
        ));
    }

    #[test]
    fn zipf_mle_on_exact_power_law() {
        // counts proportional to 1/i, scaled and rounded
        let counts: Vec<u64> = (1..=100u64).map(|i| (1e6 / i as f64).round() as u64).collect();
        let fit = fit_zipf_mle(&counts, 2).unwrap();
        assert!((fit.alpha - 1.0).abs() < 0.01, "alpha = {}", fit.alpha);
        assert_abs_diff_eq!(fit.c, zipf_normalizer(fit.alpha, 100), epsilon = 1e-12);
        assert!(fit.beta >= 0.0);
    }

    #[test]
    fn zipf_mle_on_uniform_counts() {
        let counts = vec![7u64; 50];
        let fit = fit_zipf_mle(&counts, 2).unwrap();
        assert!(fit.alpha <= 0.02, "alpha = {}", fit.alpha);
    }

    #[test]
    fn zipf_mle_rejects_increasing_counts() {
        let counts: Vec<u64> = (1..=50).collect();
        assert!(matches!(
            fit_zipf_mle(&counts, 2),
            Err(FitError::NonConvergence { .. })
        ));
    }

    fn zipf_normalizer(alpha: f64, n: usize) -> f64 {
        1.0 / (1..=n).map(|i| (i as f64).powf(-alpha)).sum::<f64>()
    }

    #[test]
    fn exponential_mle_on_exact_geometrics() {
        // scale large enough that the deepest rank still rounds to a
        // positive count
        let counts: Vec<u64> = (1..=20).map(|i| (1e9 * (-(i as f64)).exp()).round() as u64).collect();
        let fit = fit_exponential_mle(&counts).unwrap();
        assert!((fit.lambda - 1.0).abs() < 0.01, "lambda = {}", fit.lambda);

        let counts: Vec<u64> = (1..=30)
            .map(|i| (1e9 * (-0.5 * i as f64).exp()).round() as u64)
            .collect();
        let fit = fit_exponential_mle(&counts).unwrap();
        assert!((fit.lambda - 0.5).abs() < 0.01, "lambda = {}", fit.lambda);

        let flat = fit_exponential_mle(&[1, 1]).unwrap();
        assert!(flat.lambda.abs() < 1e-9);
    }

    #[test]
    fn size_rank_fit_recovers_exact_lines() {
        let n = 64;
        let d = zipf_distribution(1.0, n).unwrap();
        let exact = LengthProfile::new((1..=n).map(|i| (i as f64).log2()).collect()).unwrap();
        let fit = fit_size_rank_law(&exact, &d, 2, false).unwrap();
        assert_abs_diff_eq!(fit.slope, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.intercept, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);

        let shifted =
            LengthProfile::new((1..=n).map(|i| 2.0 * (i as f64).log2() + 3.0).collect()).unwrap();
        let fit = fit_size_rank_law(&shifted, &d, 2, true).unwrap();
        assert_abs_diff_eq!(fit.slope, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.intercept, 3.0, epsilon = 1e-9);
    }

    #[test]
    fn size_probability_fit_recovers_exact_lines() {
        let d = zipf_distribution(1.3, 40).unwrap();
        let exact =
            LengthProfile::new(d.probs().iter().map(|&p| -p.log2()).collect()).unwrap();
        let fit = fit_size_probability_law(&exact, &d, 2, false).unwrap();
        assert_abs_diff_eq!(fit.slope, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.intercept, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);

        let uniform = zipf_distribution(0.0, 10).unwrap();
        let lengths = LengthProfile::new((1..=10).map(|i| i as f64).collect()).unwrap();
        assert!(matches!(
            fit_size_probability_law(&lengths, &uniform, 2, false),
            Err(FitError::CollinearRegressor)
        ));
    }

    #[test]
    fn law_parameter_conversions() {
        // random-typing values at p_s = 1/2, N = 2
        let (alpha, c) = zipf_from_law_params(1.0, 0.0, 0.5, 0.0, 2).unwrap();
        assert_abs_diff_eq!(alpha, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c, 1.0, epsilon = 1e-12);

        let (alpha, c) = zipf_from_law_params(1.0, 0.0, 1.0, 0.0, 5).unwrap();
        assert_eq!((alpha, c), (1.0, 1.0));

        let (alpha, c) = zipf_from_law_params(0.0, 7.0, 3.0, 7.0, 2).unwrap();
        assert_eq!((alpha, c), (0.0, 1.0));

        assert!(matches!(
            zipf_from_law_params(1.0, 0.0, 0.0, 0.0, 2),
            Err(FitError::NonPositiveSlope(_))
        ));

        let (a_ud, b_ud) = size_probability_from_zipf(2.0, 1.0, 1.0, 0.0, 2).unwrap();
        assert_abs_diff_eq!(a_ud, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(b_ud, 0.0, epsilon = 1e-12);

        let (a_ud, b_ud) = size_probability_from_zipf(1.0, 1.0, 1.0, 5.0, 3).unwrap();
        assert_abs_diff_eq!(a_ud, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b_ud, 5.0, epsilon = 1e-12);

        let (a_ud, b_ud) = size_probability_from_zipf(1.0, 0.5, 2.0, 0.0, 2).unwrap();
        assert_abs_diff_eq!(a_ud, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b_ud, -2.0, epsilon = 1e-12);

        let (a_ns, b_ns) = size_rank_from_zipf(2.0, 1.0, 0.5, 0.0, 2).unwrap();
        assert_abs_diff_eq!(a_ns, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b_ns, 0.0, epsilon = 1e-12);

        let (a_ns, b_ns) = size_rank_from_zipf(1.0, 1.0, 3.0, 4.0, 2).unwrap();
        assert_abs_diff_eq!(a_ns, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b_ns, 4.0, epsilon = 1e-12);

        let (a_ns, b_ns) = size_rank_from_zipf(0.5, 0.25, 2.0, 1.0, 2).unwrap();
        assert_abs_diff_eq!(a_ns, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b_ns, 5.0, epsilon = 1e-12);
    }

    #[test]
    fn separation_residuals_vanish_on_exact_zipf() {
        let alpha = 1.2;
        let n = 10_000;
        let d = zipf_distribution(alpha, n).unwrap();
        let beta = -zipf_normalizer(alpha, n).log2();
        let profile =
            LengthProfile::new((1..=n).map(|i| 1.0 + (i as f64).log2()).collect()).unwrap();
        let res = check_linear_separation(&d, alpha, beta, 2, Some(&profile)).unwrap();
        assert!(res.expectation <= 1e-9, "residual {}", res.expectation);
        assert!(res.efficiency.unwrap() <= 1e-9);
    }

    #[test]
    fn separation_residual_of_a_point_mass() {
        let d = RankDistribution::new(vec![1.0]).unwrap();
        // entropy and mean log-rank are both zero, so any alpha with beta = 0
        // leaves no residual
        for alpha in [0.0, 1.0, 3.7] {
            let res = check_linear_separation(&d, alpha, 0.0, 2, None).unwrap();
            assert_eq!(res.expectation, 0.0);
        }
        let res = check_linear_separation(&d, 1.0, 0.5, 2, None).unwrap();
        assert_eq!(res.expectation, 0.5);
    }

    #[test]
    fn separation_residuals_detect_exponentials() {
        // truncated geometric rank distribution
        let n = 200;
        let lambda = 0.1f64;
        let weights: Vec<f64> = (1..=n).map(|i| (-lambda * i as f64).exp()).collect();
        let z: f64 = weights.iter().sum();
        let d = RankDistribution::new(weights.iter().map(|w| w / z).collect()).unwrap();
        let counts: Vec<u64> = weights
            .iter()
            .map(|w| ((w / z * 1e9).round() as u64).max(1))
            .collect();
        let fitted = fit_zipf_mle(&counts, 2).unwrap();
        let res = check_linear_separation(&d, fitted.alpha, fitted.beta, 2, None).unwrap();
        assert!(res.expectation > 1e-3, "residual {}", res.expectation);
    }

    #[test]
    fn membership_rejects_anti_abbreviation() {
        let n = 50;
        let d = zipf_distribution(1.0, n).unwrap();
        // lengths grow with probability: the exact opposite of abbreviation
        let profile =
            LengthProfile::new(d.probs().iter().map(|&p| 1.0 + 10.0 * p).collect()).unwrap();
        let report = assess_class_membership(&d, &profile, 2, ClassThresholds::default()).unwrap();
        assert!(!report.verdict);
        assert!(!report.tau_ok);
    }

    #[test]
    fn membership_rejects_exponential_with_linear_lengths() {
        let n = 200;
        let lambda = 0.05f64;
        let weights: Vec<f64> = (1..=n).map(|i| (-lambda * i as f64).exp()).collect();
        let z: f64 = weights.iter().sum();
        let d = RankDistribution::new(weights.iter().map(|w| w / z).collect()).unwrap();
        let profile = LengthProfile::new((1..=n).map(|i| i as f64).collect()).unwrap();
        let report = assess_class_membership(&d, &profile, 2, ClassThresholds::default()).unwrap();
        assert!(!report.verdict);
        // the magnitude is exactly linear in -log p, so only the size-rank
        // law can fail
        assert!(report.size_probability.unwrap().r_squared > 0.999);
        assert!(report.size_rank.unwrap().r_squared < 0.95);
    }

    #[test]
    fn membership_handles_uniform_input() {
        let d = zipf_distribution(0.0, 10).unwrap();
        let profile = LengthProfile::new((1..=10).map(|i| i as f64).collect()).unwrap();
        let report = assess_class_membership(&d, &profile, 2, ClassThresholds::default()).unwrap();
        assert!(!report.verdict);
        assert!(report.tau.is_none());
        assert!(report.size_probability.is_none());
        assert!(!report.diagnostics.is_empty());
    }

    #[test]
    fn membership_accepts_constructed_member() {
        // lengths built from the size-probability law on an exact Zipf
        let alpha = 1.25;
        let n = 2_000;
        let d = zipf_distribution(alpha, n).unwrap();
        let (a_ud, b_ud) = (0.8, 0.4);
        let profile = LengthProfile::new(
            d.probs().iter().map(|&p| a_ud * -p.log2() + b_ud).collect(),
        )
        .unwrap();
        let report = assess_class_membership(&d, &profile, 2, ClassThresholds::default()).unwrap();
        assert!(report.verdict, "diagnostics: {:?}", report.diagnostics);
        let implied = report.implied_alpha.unwrap();
        assert_abs_diff_eq!(implied, alpha, epsilon = 1e-9);
        let group = report.group.unwrap();
        assert_abs_diff_eq!(group.a_ud, a_ud, epsilon = 1e-9);
        assert_abs_diff_eq!(group.b_ud, b_ud, epsilon = 1e-9);
    }

    #[test]
    fn loglog_diagnostic_on_exact_and_bent_data() {
        let d = zipf_distribution(1.3, 500).unwrap();
        let diag = zipf_loglog_diagnostic(&d, 2).unwrap();
        assert_abs_diff_eq!(diag.alpha, 1.3, epsilon = 1e-9);
        assert_abs_diff_eq!(diag.c, d.probs()[0], epsilon = 1e-12);
        assert!(diag.r_squared > 1.0 - 1e-12);

        // a geometric law is curved in log-log scale
        let weights: Vec<f64> = (1..=200).map(|i| (-0.1 * i as f64).exp()).collect();
        let z: f64 = weights.iter().sum();
        let geo = RankDistribution::new(weights.iter().map(|w| w / z).collect()).unwrap();
        let diag = zipf_loglog_diagnostic(&geo, 2).unwrap();
        assert!(diag.r_squared < 0.9, "r2 {}", diag.r_squared);
    }

    #[test]
    fn model_selection_prefers_the_generating_family() {
        let zipf_counts: Vec<u64> = (1..=200u64)
            .map(|i| ((1e7 / (i as f64).powf(1.1)).round() as u64).max(1))
            .collect();
        let sel = select_model(&zipf_counts, 2).unwrap();
        assert_eq!(sel.verdict, ModelVerdict::PowerLaw);
        assert!(sel.delta_aic >= 2.0);

        let geo_counts: Vec<u64> = (1..=200u64)
            .map(|i| ((1e7 * (-0.3 * i as f64).exp()).round() as u64).max(1))
            .collect();
        let sel = select_model(&geo_counts, 2).unwrap();
        assert_eq!(sel.verdict, ModelVerdict::Exponential);
        assert!(sel.delta_aic <= -2.0);
    }
}
