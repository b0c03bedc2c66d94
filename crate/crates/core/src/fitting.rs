//! Weibull and power-law fits to cohort histograms.
//!
//! Weibull parameters come from ordinary least squares on the double-log
//! transform of the empirical CDF,
//!
//! ```text
//! log(-log(1 - F(x))) = k log x - k log λ
//! ```
//!
//! so the slope is the shape `k` and `λ = exp(-intercept / k)`. Power laws
//! are a straight line through `(log Δt, log count)`.
//!
//! Histogram bins hold lifetimes rounded half up, so the cumulative count up
//! to `Δt` covers lifetimes below `Δt + 0.5`; that bin edge is the abscissa
//! the regression uses. The empirical CDF is normalized by the cohort total,
//! truncated lifetimes included, so the curve tops out below one when the
//! tail was cut.
//!
//! Goodness of fit is Pearson χ² on bin counts, with adjacent bins pooled
//! until each group expects at least five observations.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cohorts::{CohortTable, EntityKind};
use crate::{exec, Error, Result};

pub const DEFAULT_MIN_SAMPLES: u64 = 30;
pub const DEFAULT_XMIN: u32 = 1;
/// Pooling threshold for χ² groups.
pub const MIN_EXPECTED: f64 = 5.0;

/// Why a cohort produced no fit.
#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
pub enum NoFit {
    #[error("insufficient samples ({have} < {need})")]
    InsufficientSamples { have: u64, need: u64 },
    #[error("too few usable points ({have} < {need})")]
    TooFewPoints { have: usize, need: usize },
    #[error("nonpositive shape (slope {0})")]
    NonpositiveShape(f64),
    #[error("degenerate x-range")]
    DegenerateRange,
    #[error("insufficient bins at or above xmin ({have} < 2)")]
    InsufficientBins { have: usize },
    #[error("central point index {index} out of range for {len} points")]
    CentralIndex { index: usize, len: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitVariant {
    Powerlaw,
    Weibull,
    WeibullExclCentral,
}

impl FitVariant {
    pub const ALL: [FitVariant; 3] = [
        FitVariant::Powerlaw,
        FitVariant::Weibull,
        FitVariant::WeibullExclCentral,
    ];

    /// Parses a comma-separated list such as `powerlaw,weibull`.
    pub fn parse_list(s: &str) -> Result<Vec<FitVariant>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let v: FitVariant = part.parse()?;
            if !out.contains(&v) {
                out.push(v);
            }
        }
        if out.is_empty() {
            return Err(Error::Parameter("no fit variants given".into()));
        }
        Ok(out)
    }
}

impl FromStr for FitVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "powerlaw" => Ok(FitVariant::Powerlaw),
            "weibull" => Ok(FitVariant::Weibull),
            "weibull-excl-central" | "weibull_excl_central" => Ok(FitVariant::WeibullExclCentral),
            other => Err(Error::Parameter(format!("unknown fit variant '{other}'"))),
        }
    }
}

impl fmt::Display for FitVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitVariant::Powerlaw => "powerlaw",
            FitVariant::Weibull => "weibull",
            FitVariant::WeibullExclCentral => "weibull-excl-central",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeibullParams {
    pub k: f64,
    pub lambda: f64,
}

impl WeibullParams {
    pub fn new(k: f64, lambda: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0 && lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Parameter(format!(
                "Weibull parameters must be positive, got k={k}, lambda={lambda}"
            )));
        }
        Ok(WeibullParams { k, lambda })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        -(-(x / self.lambda).powf(self.k)).exp_m1()
    }

    /// Probability of a lifetime that rounds half up to `dt`.
    pub fn bin_mass(&self, dt: u32) -> f64 {
        let hi = dt as f64 + 0.5;
        let lo = (dt as f64 - 0.5).max(0.0);
        self.cdf(hi) - self.cdf(lo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawParams {
    pub alpha: f64,
    /// Intercept of `log count` against `log Δt`.
    pub c: f64,
}

impl PowerLawParams {
    pub fn expected_count(&self, dt: u32) -> f64 {
        (self.c - self.alpha * (dt as f64).ln()).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum FitParams {
    Weibull(WeibullParams),
    PowerLaw(PowerLawParams),
}

/// A point of the empirical (or exact) CDF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    /// Lifetime label in years; central-point selection works on `log dt`.
    pub dt: f64,
    /// Abscissa used by the regression.
    pub x: f64,
    pub f: f64,
}

impl CdfPoint {
    /// A point whose abscissa is its label, e.g. an exact CDF evaluation.
    pub fn exact(x: f64, f: f64) -> Self {
        CdfPoint { dt: x, x, f }
    }
}

/// Empirical CDF of a cohort at its non-empty bins.
///
/// `F(Δt)` is the cumulative count through `Δt` over the cohort total. Points
/// with `Δt = 0`, `F = 0` or `F = 1` are dropped (outside the transform's
/// domain), and so are empty bins, which leaves `F` strictly increasing.
pub fn empirical_cdf(table: &CohortTable, min_samples: u64) -> Result<Vec<CdfPoint>, NoFit> {
    if table.in_range() < min_samples.max(1) {
        return Err(NoFit::InsufficientSamples {
            have: table.in_range(),
            need: min_samples.max(1),
        });
    }
    let total = table.total as f64;
    let mut cum = 0u64;
    let mut out = Vec::new();
    for (dt, &count) in table.histogram.iter().enumerate() {
        cum += count;
        if count == 0 || dt == 0 || cum == table.total {
            continue;
        }
        out.push(CdfPoint {
            dt: dt as f64,
            x: dt as f64 + 0.5,
            f: cum as f64 / total,
        });
    }
    if out.is_empty() {
        return Err(NoFit::TooFewPoints { have: 0, need: 1 });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Unweighted least squares, accumulated around the means.
pub fn ols(xs: &[f64], ys: &[f64]) -> Result<LineFit, NoFit> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return Err(NoFit::TooFewPoints { have: n, need: 2 });
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= 0.0 || !sxx.is_finite() {
        return Err(NoFit::DegenerateRange);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeibullFit {
    pub params: WeibullParams,
    pub line: LineFit,
    pub n_points: usize,
}

/// Weibull parameters from the double-log regression over `points`.
pub fn fit_weibull(points: &[CdfPoint]) -> Result<WeibullFit, NoFit> {
    let usable: Vec<&CdfPoint> = points
        .iter()
        .filter(|p| p.x > 0.0 && p.f > 0.0 && p.f < 1.0)
        .collect();
    if usable.len() < 2 {
        return Err(NoFit::TooFewPoints {
            have: usable.len(),
            need: 2,
        });
    }
    let xs: Vec<f64> = usable.iter().map(|p| p.x.ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|p| (-(-p.f).ln_1p()).ln()).collect();
    let line = ols(&xs, &ys)?;
    if line.slope.is_nan() || line.slope <= 0.0 {
        return Err(NoFit::NonpositiveShape(line.slope));
    }
    let k = line.slope;
    let lambda = (-line.intercept / k).exp();
    let params = WeibullParams::new(k, lambda).map_err(|_| NoFit::NonpositiveShape(k))?;
    Ok(WeibullFit {
        params,
        line,
        n_points: usable.len(),
    })
}

/// Index of the point whose `log dt` is closest to the middle of the log
/// range; ties go to the smaller `dt`.
pub fn central_point_index(points: &[CdfPoint]) -> Option<usize> {
    if points.is_empty() {
        return None;
    }
    let logs: Vec<f64> = points.iter().map(|p| p.dt.ln()).collect();
    let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mid = 0.5 * (lo + hi);
    let mut best: Option<(usize, f64)> = None;
    for (i, &l) in logs.iter().enumerate() {
        let d = (l - mid).abs();
        best = match best {
            None => Some((i, d)),
            Some((bi, bd)) => {
                let tie = (d - bd).abs() <= 1e-12 * (1.0 + bd);
                if (tie && points[i].dt < points[bi].dt) || (!tie && d < bd) {
                    Some((i, d))
                } else {
                    Some((bi, bd))
                }
            }
        };
    }
    best.map(|(i, _)| i)
}

/// [`fit_weibull`] after removing the central point, or the point at
/// `override_index` when given.
pub fn fit_weibull_excluding_central(
    points: &[CdfPoint],
    override_index: Option<usize>,
) -> Result<WeibullFit, NoFit> {
    if points.len() < 3 {
        return Err(NoFit::TooFewPoints {
            have: points.len(),
            need: 3,
        });
    }
    let drop = match override_index {
        Some(index) if index >= points.len() => {
            return Err(NoFit::CentralIndex {
                index,
                len: points.len(),
            })
        }
        Some(index) => index,
        None => central_point_index(points).expect("non-empty"),
    };
    let rest: Vec<CdfPoint> = points
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != drop)
        .map(|(_, p)| *p)
        .collect();
    fit_weibull(&rest)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub params: PowerLawParams,
    pub line: LineFit,
    pub n_points: usize,
}

/// Line through `(log Δt, log count)` over non-empty bins with `Δt >= xmin`.
pub fn fit_powerlaw(table: &CohortTable, xmin: u32) -> Result<PowerLawFit, NoFit> {
    let start = xmin.max(1) as usize;
    let (xs, ys): (Vec<f64>, Vec<f64>) = table
        .histogram
        .iter()
        .enumerate()
        .skip(start)
        .filter(|(_, &c)| c > 0)
        .map(|(dt, &c)| ((dt as f64).ln(), (c as f64).ln()))
        .unzip();
    if xs.len() < 2 {
        return Err(NoFit::InsufficientBins { have: xs.len() });
    }
    let line = ols(&xs, &ys)?;
    Ok(PowerLawFit {
        params: PowerLawParams {
            alpha: -line.slope,
            c: line.intercept,
        },
        line,
        n_points: xs.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquared {
    pub chi2: f64,
    /// Pooled groups minus two; zero when fewer than three groups remain.
    pub dof: u32,
    /// `chi2 / dof`, absent when `dof` is zero.
    pub reduced: Option<f64>,
    pub groups: usize,
}

/// Merges adjacent `(observed, expected)` bins until each group expects at
/// least [`MIN_EXPECTED`]; a short final group joins its predecessor.
pub fn pool_bins(bins: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut groups: Vec<(f64, f64)> = Vec::new();
    let mut current = (0.0, 0.0);
    let mut open = false;
    for &(o, e) in bins {
        current.0 += o;
        current.1 += e;
        open = true;
        if current.1 >= MIN_EXPECTED {
            groups.push(current);
            current = (0.0, 0.0);
            open = false;
        }
    }
    if open {
        match groups.last_mut() {
            Some(last) => {
                last.0 += current.0;
                last.1 += current.1;
            }
            None => groups.push(current),
        }
    }
    groups
}

/// Pearson χ² of `table` against `params`.
///
/// Weibull expectations cover every bin `0..=max_lifetime` as
/// `total × bin mass`; power-law expectations are the fitted line evaluated
/// at each bin from `xmin` on.
pub fn chi_squared(table: &CohortTable, params: &FitParams, xmin: u32) -> ChiSquared {
    let bins: Vec<(f64, f64)> = match params {
        FitParams::Weibull(w) => table
            .histogram
            .iter()
            .enumerate()
            .map(|(dt, &c)| (c as f64, table.total as f64 * w.bin_mass(dt as u32)))
            .collect(),
        FitParams::PowerLaw(p) => table
            .histogram
            .iter()
            .enumerate()
            .skip(xmin.max(1) as usize)
            .map(|(dt, &c)| (c as f64, p.expected_count(dt as u32)))
            .collect(),
    };
    let groups = pool_bins(&bins);
    let chi2: f64 = groups
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum();
    let dof = groups.len().saturating_sub(2) as u32;
    let dof = if groups.len() < 3 { 0 } else { dof };
    ChiSquared {
        chi2,
        dof,
        reduced: (dof > 0).then(|| chi2 / dof as f64),
        groups: groups.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub min_samples: u64,
    pub xmin: u32,
    /// Replaces the log-midpoint rule for the excluded-central variant.
    pub central_index: Option<usize>,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            min_samples: DEFAULT_MIN_SAMPLES,
            xmin: DEFAULT_XMIN,
            central_index: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub variant: FitVariant,
    pub params: FitParams,
    pub chi2: f64,
    pub reduced_chi2: Option<f64>,
    pub dof: u32,
    pub n_points: usize,
    /// In-range lifetimes in the cohort.
    pub n_samples: u64,
}

impl FitResult {
    pub fn weibull(&self) -> Option<WeibullParams> {
        match self.params {
            FitParams::Weibull(w) => Some(w),
            FitParams::PowerLaw(_) => None,
        }
    }

    pub fn powerlaw(&self) -> Option<PowerLawParams> {
        match self.params {
            FitParams::PowerLaw(p) => Some(p),
            FitParams::Weibull(_) => None,
        }
    }
}

/// One variant fitted to one cohort table, with χ².
pub fn fit_table(table: &CohortTable, variant: FitVariant, config: &FitConfig) -> Result<FitResult, NoFit> {
    let need = config.min_samples.max(1);
    if table.in_range() < need {
        return Err(NoFit::InsufficientSamples {
            have: table.in_range(),
            need,
        });
    }
    let (params, n_points) = match variant {
        FitVariant::Weibull => {
            let fit = fit_weibull(&empirical_cdf(table, need)?)?;
            (FitParams::Weibull(fit.params), fit.n_points)
        }
        FitVariant::WeibullExclCentral => {
            let points = empirical_cdf(table, need)?;
            let fit = fit_weibull_excluding_central(&points, config.central_index)?;
            (FitParams::Weibull(fit.params), fit.n_points)
        }
        FitVariant::Powerlaw => {
            let fit = fit_powerlaw(table, config.xmin)?;
            (FitParams::PowerLaw(fit.params), fit.n_points)
        }
    };
    let chi = chi_squared(table, &params, config.xmin);
    Ok(FitResult {
        variant,
        params,
        chi2: chi.chi2,
        reduced_chi2: chi.reduced,
        dof: chi.dof,
        n_points,
        n_samples: table.in_range(),
    })
}

/// Fitted parameters of one variant across cohort years.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSeries {
    pub kind: EntityKind,
    pub variant: FitVariant,
    /// Sorted by cohort year, at most one entry per year.
    pub points: Vec<(i32, FitResult)>,
    /// Cohorts where the fit failed, with the reason.
    pub gaps: Vec<(i32, NoFit)>,
}

impl ParameterSeries {
    pub fn get(&self, cohort: i32) -> Option<&FitResult> {
        self.points
            .binary_search_by_key(&cohort, |(y, _)| *y)
            .ok()
            .map(|i| &self.points[i].1)
    }

    /// `(t0, k)` for Weibull variants.
    pub fn shape_series(&self) -> Vec<(i32, f64)> {
        self.points
            .iter()
            .filter_map(|(y, r)| r.weibull().map(|w| (*y, w.k)))
            .collect()
    }

    pub fn scale_series(&self) -> Vec<(i32, f64)> {
        self.points
            .iter()
            .filter_map(|(y, r)| r.weibull().map(|w| (*y, w.lambda)))
            .collect()
    }
}

/// Fits every variant to every table, one series per `(kind, variant)` that
/// has at least one table. Fits run in parallel; assembly is ordered.
pub fn parameter_evolution(
    tables: &[CohortTable],
    variants: &[FitVariant],
    config: &FitConfig,
) -> Vec<ParameterSeries> {
    let jobs: Vec<(usize, FitVariant)> = tables
        .iter()
        .enumerate()
        .flat_map(|(i, _)| variants.iter().map(move |&v| (i, v)))
        .collect();
    let results = exec::map(&jobs, |&(i, v)| fit_table(&tables[i], v, config));

    let mut series: Vec<ParameterSeries> = Vec::new();
    for kind in [EntityKind::Node, EntityKind::Edge] {
        for &variant in variants {
            let mut s = ParameterSeries {
                kind,
                variant,
                points: Vec::new(),
                gaps: Vec::new(),
            };
            let mut any = false;
            for ((i, v), r) in jobs.iter().zip(&results) {
                let t = &tables[*i];
                if t.kind != kind || *v != variant {
                    continue;
                }
                any = true;
                match r {
                    Ok(fit) => s.points.push((t.cohort, fit.clone())),
                    Err(e) => s.gaps.push((t.cohort, e.clone())),
                }
            }
            if any {
                s.points.sort_by_key(|(y, _)| *y);
                s.gaps.sort_by_key(|(y, _)| *y);
                series.push(s);
            }
        }
    }
    series
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the series as a table, one row per `(kind, variant, t0)`; gaps
/// appear with empty numeric fields and a `nofit` status.
pub fn write_fits<W: Write>(out: W, series: &[ParameterSeries], config: &FitConfig) -> Result<()> {
    let mut out = std::io::BufWriter::new(out);
    writeln!(
        out,
        "# collabspan {} fits; weibull: OLS on log(-log(1-F)) vs log(dt+0.5), F over cohort total; \
         powerlaw: OLS on log(count) vs log(dt), dt >= {}; chi2: Pearson on counts, bins pooled to expected >= {}, reduced = chi2/(groups-2)",
        crate::VERSION,
        config.xmin.max(1),
        MIN_EXPECTED
    )?;
    writeln!(
        out,
        "kind\tvariant\tt0\tk\tlambda\talpha\tc\tchi2\treduced_chi2\tn_points\tn_samples\tstatus"
    )?;
    for s in series {
        let mut rows: Vec<(i32, String)> = Vec::with_capacity(s.points.len() + s.gaps.len());
        for (y, r) in &s.points {
            let (k, lambda, alpha, c) = match r.params {
                FitParams::Weibull(w) => (Some(w.k), Some(w.lambda), None, None),
                FitParams::PowerLaw(p) => (None, None, Some(p.alpha), Some(p.c)),
            };
            rows.push((
                *y,
                format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\tok",
                    s.kind,
                    s.variant,
                    y,
                    opt(k),
                    opt(lambda),
                    opt(alpha),
                    opt(c),
                    r.chi2,
                    opt(r.reduced_chi2),
                    r.n_points,
                    r.n_samples
                ),
            ));
        }
        for (y, e) in &s.gaps {
            rows.push((
                *y,
                format!("{}\t{}\t{}\t\t\t\t\t\t\t\t\tnofit: {}", s.kind, s.variant, y, e),
            ));
        }
        rows.sort_by_key(|(y, _)| *y);
        for (_, row) in rows {
            writeln!(out, "{row}")?;
        }
    }
    out.flush()?;
    Ok(())
}
