//! `analyze` (power-law fits of scalar tables) and `collapse` (rescaled
//! radial profiles and their pairwise metric).

use std::path::{Path, PathBuf};

use serde::Serialize;
use torwalk_core::asymptotics::{predict_scaling, Regime};
use torwalk_core::fss::{
    collapse, collapse_metric, fit_cubic_shape, scan_l_min, select_l_min, CollapsePoint, CollapseSeries, FitPoint,
    FitResult, RadialProfile, CHI2_THRESHOLD,
};

use crate::error::{Result, RunError};
use crate::tables::{read_radial, read_scalars, ScalarRow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    #[serde(rename = "meanN")]
    MeanN,
    #[serde(rename = "chi")]
    Chi,
}

impl Observable {
    pub fn point(self, r: &ScalarRow) -> FitPoint {
        match self {
            Observable::MeanN => FitPoint { l: r.l as f64, y: r.mean_n, err: r.mean_n_err },
            Observable::Chi => FitPoint { l: r.l as f64, y: r.chi, err: r.chi_err },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitRecord {
    /// `null` for runs at a fixed `z`.
    pub lambda: Option<f64>,
    pub observable: Observable,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub err_a: f64,
    pub err_b: f64,
    pub err_c: f64,
    #[serde(rename = "L_min")]
    pub l_min: f64,
    pub chi2: f64,
    pub dof: usize,
    pub chi2_per_dof: f64,
    /// Whether `χ²/dof` met the threshold; otherwise the largest-`L_min` fit is reported.
    pub accepted: bool,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentRecord {
    pub lambda: Option<f64>,
    pub observable: Observable,
    pub b: f64,
    pub err_b: f64,
    pub predicted: Option<f64>,
}

/// Fit `Y = a L^b + c`, scanning `L_min` upward until `χ²/dof ≤ threshold`.
pub fn fit_points(points: &[FitPoint]) -> Result<(FitResult, bool)> {
    let scan = scan_l_min(points, None);
    if let Some(f) = select_l_min(&scan, CHI2_THRESHOLD) {
        return Ok((f, true));
    }
    let last = scan.iter().rev().find_map(|(_, r)| r.as_ref().ok().copied());
    match last {
        Some(f) => Ok((f, false)),
        None => match scan.into_iter().next() {
            Some((_, Err(e))) => Err(e.into()),
            _ => Err(RunError::Core(torwalk_core::Error::Input("need at least four sizes to fit".into()))),
        },
    }
}

fn lambda_key(x: f64) -> Option<f64> {
    (!x.is_nan()).then_some(x)
}

pub fn analyze_rows(rows: &[ScalarRow], dim: Option<usize>) -> Result<(Vec<FitRecord>, Vec<ExponentRecord>)> {
    let mut lambdas: Vec<Option<f64>> = Vec::new();
    for r in rows {
        let k = lambda_key(r.lambda);
        if !lambdas.contains(&k) {
            lambdas.push(k);
        }
    }
    let mut fits = Vec::new();
    let mut exps = Vec::new();
    for lambda in lambdas {
        let group: Vec<&ScalarRow> = rows.iter().filter(|r| lambda_key(r.lambda) == lambda).collect();
        let predicted = match dim {
            Some(d) => {
                let regime = lambda.map_or(Regime::Critical, |l| Regime::Pseudocritical { lambda: l });
                Some(predict_scaling(regime, d)?)
            }
            None => None,
        };
        for obs in [Observable::MeanN, Observable::Chi] {
            let pts: Vec<FitPoint> = group.iter().map(|r| obs.point(r)).collect();
            let (f, accepted) = fit_points(&pts)?;
            fits.push(FitRecord {
                lambda,
                observable: obs,
                a: f.a,
                b: f.b,
                c: f.c,
                err_a: f.err_a,
                err_b: f.err_b,
                err_c: f.err_c,
                l_min: f.l_min,
                chi2: f.chi2,
                dof: f.dof,
                chi2_per_dof: f.chi2_per_dof,
                accepted,
                points: pts.len(),
            });
            exps.push(ExponentRecord {
                lambda,
                observable: obs,
                b: f.b,
                err_b: f.err_b,
                predicted: predicted.map(|p| match obs {
                    Observable::MeanN => p.mean_len_exponent,
                    Observable::Chi => p.chi_exponent,
                }),
            });
        }
    }
    Ok((fits, exps))
}

pub fn analyze_files(inputs: &[PathBuf], dim: Option<usize>) -> Result<(Vec<FitRecord>, Vec<ExponentRecord>)> {
    let mut rows = Vec::new();
    for p in inputs {
        let path = if p.is_dir() { p.join("scalars.csv") } else { p.clone() };
        rows.extend(read_scalars(&path)?);
    }
    analyze_rows(&rows, dim)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CollapseReport {
    pub d: usize,
    pub mu: f64,
    pub kappa: f64,
    pub r_min: f64,
    pub metric: f64,
    pub pairs: usize,
    pub points: usize,
    /// Weighted fit `Y = a + b y³` over all series.
    pub shape_a: Option<f64>,
    pub shape_b: Option<f64>,
    pub shape_err_b: Option<f64>,
}

pub fn collapse_profiles(
    profiles: &[(usize, RadialProfile)],
    d: usize,
    mu: f64,
    r_min: f64,
) -> Result<(Vec<CollapseSeries>, CollapseReport)> {
    let series = collapse(profiles, d, mu, r_min)?;
    let m = collapse_metric(&series)?;
    let all: Vec<CollapsePoint> = series.iter().flat_map(|s| s.points.iter().copied()).collect();
    let shape = fit_cubic_shape(&all).ok();
    let report = CollapseReport {
        d,
        mu,
        kappa: series.first().map_or(f64::NAN, |s| s.kappa),
        r_min,
        metric: m.value,
        pairs: m.pairs,
        points: m.points,
        shape_a: shape.map(|s| s.a),
        shape_b: shape.map(|s| s.b),
        shape_err_b: shape.map(|s| s.err_b),
    };
    Ok((series, report))
}

/// `radial_L13.csv` → 13.
pub fn side_from_name(path: &Path) -> Option<usize> {
    let stem = path.file_stem()?.to_str()?;
    let (_, tail) = stem.rsplit_once("_L")?;
    tail.parse().ok()
}

/// Inputs are `path` (side read from a `_L<side>` suffix) or `L=path`.
pub fn read_profiles(inputs: &[String]) -> Result<Vec<(usize, RadialProfile)>> {
    inputs
        .iter()
        .map(|s| {
            let (l, path) = match s.split_once('=') {
                Some((l, p)) => {
                    let l = l.parse().map_err(|_| RunError::config(format!("input: bad side in `{s}`")))?;
                    (l, PathBuf::from(p))
                }
                None => {
                    let p = PathBuf::from(s);
                    let l = side_from_name(&p)
                        .ok_or_else(|| RunError::config(format!("input: cannot read L from `{s}`; use L=path")))?;
                    (l, p)
                }
            };
            Ok((l, read_radial(&path)?))
        })
        .collect()
}
