//! CSV tables. Writers render to a `String` (fixed header, `%.12g`, LF) so
//! the bytes can be hashed before they hit the disk; readers check the header
//! and name the first missing column.

use std::path::Path;

use torwalk_core::fss::{CollapsePoint, CollapseSeries, RadialBin, RadialProfile};
use torwalk_core::rlrw::OccupationField;

use crate::error::{Result, RunError};
use crate::format::fmt_g;

fn line(out: &mut String, cells: &[String]) {
    out.push_str(&cells.join(","));
    out.push('\n');
}

/// `coord_0..coord_{d-1}, g, stderr`; exact fields report the truncation bound as `stderr`.
pub fn field_csv(field: &OccupationField) -> String {
    let d = field.domain.dim();
    let mut out = String::new();
    let mut header: Vec<String> = (0..d).map(|k| format!("coord_{k}")).collect();
    header.push("g".into());
    header.push("stderr".into());
    line(&mut out, &header);
    for (site, g, err) in field.rows() {
        let mut row: Vec<String> = site.iter().map(|c| c.to_string()).collect();
        row.push(fmt_g(g));
        row.push(fmt_g(if field.is_exact() { field.truncation_bound } else { err }));
        line(&mut out, &row);
    }
    out
}

pub fn radial_csv(profile: &RadialProfile) -> String {
    let mut out = String::from("r,g,stderr,n_sites_in_bin\n");
    for b in &profile.bins {
        line(&mut out, &[fmt_g(b.r), fmt_g(b.g), fmt_g(b.stderr), b.multiplicity.to_string()]);
    }
    out
}

/// `P(N = k)` of a sampled length distribution.
pub fn length_csv(dist: &[(f64, f64)]) -> String {
    let mut out = String::from("k,p,stderr\n");
    for (k, &(p, e)) in dist.iter().enumerate() {
        line(&mut out, &[k.to_string(), fmt_g(p), fmt_g(e)]);
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarRow {
    pub l: usize,
    pub z: f64,
    pub lambda: f64,
    pub chi: f64,
    pub chi_err: f64,
    pub mean_n: f64,
    pub mean_n_err: f64,
    pub tau_int: f64,
    /// Ising only: trail length averaged over `C_2`.
    pub mean_n_ising_conditional: Option<f64>,
}

const SCALAR_COLUMNS: [&str; 8] = ["L", "z", "lambda", "chi", "chi_err", "meanN", "meanN_err", "tau_int"];
const ISING_COLUMN: &str = "meanN_ising_conditional";

pub fn scalars_csv(rows: &[ScalarRow]) -> String {
    let ising = rows.iter().any(|r| r.mean_n_ising_conditional.is_some());
    let mut out = SCALAR_COLUMNS.join(",");
    if ising {
        out.push(',');
        out.push_str(ISING_COLUMN);
    }
    out.push('\n');
    for r in rows {
        let mut cells = vec![
            r.l.to_string(),
            fmt_g(r.z),
            fmt_g(r.lambda),
            fmt_g(r.chi),
            fmt_g(r.chi_err),
            fmt_g(r.mean_n),
            fmt_g(r.mean_n_err),
            fmt_g(r.tau_int),
        ];
        if ising {
            cells.push(fmt_g(r.mean_n_ising_conditional.unwrap_or(f64::NAN)));
        }
        line(&mut out, &cells);
    }
    out
}

pub fn collapse_csv(series: &[CollapseSeries]) -> String {
    let mut out = String::from("L,y,Y,err\n");
    for s in series {
        for p in &s.points {
            line(&mut out, &[s.l.to_string(), fmt_g(p.y), fmt_g(p.big_y), fmt_g(p.err)]);
        }
    }
    out
}

/// Parsed table with column lookup by name.
struct Table {
    path: std::path::PathBuf,
    header: Vec<String>,
    rows: Vec<csv::StringRecord>,
}

impl Table {
    fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
        Self::parse(path, &text)
    }

    fn parse(path: &Path, text: &str) -> Result<Self> {
        let parse_err = |msg: String| RunError::Parse { path: path.into(), msg };
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let header = rdr.headers().map_err(|e| parse_err(e.to_string()))?.iter().map(str::to_string).collect();
        let rows = rdr.records().collect::<Result<Vec<_>, _>>().map_err(|e| parse_err(e.to_string()))?;
        Ok(Table { path: path.into(), header, rows })
    }

    fn column(&self, name: &str) -> Result<usize> {
        self.header.iter().position(|h| h == name).ok_or_else(|| RunError::Parse {
            path: self.path.clone(),
            msg: format!("missing column `{name}`"),
        })
    }

    fn has(&self, name: &str) -> bool {
        self.header.iter().any(|h| h == name)
    }

    fn num<T: std::str::FromStr>(&self, row: usize, col: usize) -> Result<T> {
        let cell = self.rows[row].get(col).unwrap_or("");
        cell.trim().parse().map_err(|_| RunError::Parse {
            path: self.path.clone(),
            msg: format!("row {}: column `{}`: cannot parse `{cell}`", row + 2, self.header[col]),
        })
    }
}

pub fn read_radial(path: &Path) -> Result<RadialProfile> {
    let t = Table::read(path)?;
    let cols = [t.column("r")?, t.column("g")?, t.column("stderr")?, t.column("n_sites_in_bin")?];
    let mut bins = Vec::with_capacity(t.rows.len());
    for i in 0..t.rows.len() {
        let r: f64 = t.num(i, cols[0])?;
        bins.push(RadialBin {
            r2: (r * r).round() as i64,
            r,
            g: t.num(i, cols[1])?,
            stderr: t.num(i, cols[2])?,
            multiplicity: t.num(i, cols[3])?,
        });
    }
    if bins.is_empty() {
        return Err(RunError::Parse { path: path.into(), msg: "no bins".into() });
    }
    Ok(RadialProfile { bins })
}

pub fn read_scalars(path: &Path) -> Result<Vec<ScalarRow>> {
    let t = Table::read(path)?;
    let cols: Vec<usize> = SCALAR_COLUMNS.iter().map(|c| t.column(c)).collect::<Result<_>>()?;
    let cond = if t.has(ISING_COLUMN) { Some(t.column(ISING_COLUMN)?) } else { None };
    (0..t.rows.len())
        .map(|i| {
            Ok(ScalarRow {
                l: t.num(i, cols[0])?,
                z: t.num(i, cols[1])?,
                lambda: t.num(i, cols[2])?,
                chi: t.num(i, cols[3])?,
                chi_err: t.num(i, cols[4])?,
                mean_n: t.num(i, cols[5])?,
                mean_n_err: t.num(i, cols[6])?,
                tau_int: t.num(i, cols[7])?,
                mean_n_ising_conditional: cond.map(|c| t.num(i, c)).transpose()?,
            })
        })
        .collect()
}

pub fn read_collapse(path: &Path) -> Result<Vec<CollapseSeries>> {
    let t = Table::read(path)?;
    let cols = [t.column("L")?, t.column("y")?, t.column("Y")?, t.column("err")?];
    let mut series: Vec<CollapseSeries> = Vec::new();
    for i in 0..t.rows.len() {
        let l: usize = t.num(i, cols[0])?;
        let p = CollapsePoint { y: t.num(i, cols[1])?, big_y: t.num(i, cols[2])?, err: t.num(i, cols[3])? };
        match series.iter_mut().find(|s| s.l == l) {
            Some(s) => s.points.push(p),
            None => series.push(CollapseSeries { l, kappa: f64::NAN, points: vec![p] }),
        }
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalars_round_trip() {
        let rows = vec![
            ScalarRow { l: 5, z: 0.1, lambda: f64::NAN, chi: 12.5, chi_err: 0.25, mean_n: 3.0, mean_n_err: 0.1, tau_int: 4.0, mean_n_ising_conditional: Some(7.5) },
            ScalarRow { l: 7, z: 0.2, lambda: 1.0, chi: 1e6, chi_err: 1e-3, mean_n: 1.0 / 3.0, mean_n_err: 0.0, tau_int: 0.5, mean_n_ising_conditional: Some(8.0) },
        ];
        let text = scalars_csv(&rows);
        assert!(text.starts_with("L,z,lambda,chi,chi_err,meanN,meanN_err,tau_int,meanN_ising_conditional\n"));
        assert!(!text.contains('\r'));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        std::fs::write(&p, &text).unwrap();
        let back = read_scalars(&p).unwrap();
        assert_eq!(back.len(), 2);
        assert!(back[0].lambda.is_nan());
        assert_eq!(back[1].chi, 1e6);
        assert_eq!(back[1].mean_n, 0.333333333333);
        assert_eq!(back[0].mean_n_ising_conditional, Some(7.5));
    }

    #[test]
    fn missing_column_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        std::fs::write(&p, "r,g,n_sites_in_bin\n1,0.5,6\n").unwrap();
        let err = read_radial(&p).unwrap_err();
        assert!(err.to_string().contains("missing column `stderr`"), "{err}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn radial_round_trip_recovers_classes() {
        let prof = RadialProfile {
            bins: vec![
                RadialBin { r2: 0, r: 0.0, g: 1.5, stderr: 0.0, multiplicity: 1 },
                RadialBin { r2: 2, r: 2f64.sqrt(), g: 0.25, stderr: 0.01, multiplicity: 12 },
            ],
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        std::fs::write(&p, radial_csv(&prof)).unwrap();
        let back = read_radial(&p).unwrap();
        assert_eq!(back.bins[1].r2, 2);
        assert_eq!(back.bins[1].multiplicity, 12);
    }
}
