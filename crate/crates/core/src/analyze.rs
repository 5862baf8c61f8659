//! Power-law trend fits `y = a * n^b` and CSV/JSON reporting.
//!
//! The fit minimises squared residuals in the original space by damped
//! Gauss-Newton, started from ordinary least squares on `(ln n, ln y)`. The
//! goodness figure is `sqrt(max(0, 1 - SSres / SStot))`, the coefficient a
//! nonlinear regression tool reports as `r`.

use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 200;
pub const RELATIVE_STEP_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub n: f64,
    pub observed: f64,
    pub predicted: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub a: f64,
    pub b: f64,
    /// `None` when every observation is equal.
    pub r: Option<f64>,
    pub ss_res: f64,
    pub log_log_a: f64,
    pub log_log_b: f64,
    pub log_log_ss_res: f64,
    pub iterations: usize,
    pub converged: bool,
    pub points: Vec<Residual>,
}

impl FitResult {
    pub fn predict(&self, n: f64) -> f64 {
        self.a * n.powf(self.b)
    }
}

fn ss_res(points: &[(f64, f64)], a: f64, b: f64) -> f64 {
    points
        .iter()
        .map(|&(n, y)| {
            let e = y - a * n.powf(b);
            e * e
        })
        .sum()
}

/// `sqrt(max(0, 1 - SSres / SStot))` for the model `a * n^b`; `None` when
/// `SStot` is zero.
pub fn goodness(points: &[(f64, f64)], a: f64, b: f64) -> Option<f64> {
    if points.is_empty() {
        return None;
    }
    let mean = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean) * (p.1 - mean)).sum();
    if ss_tot == 0.0 {
        return None;
    }
    Some((1.0 - ss_res(points, a, b) / ss_tot).max(0.0).sqrt())
}

fn log_log(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    let m = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let zs: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let mz = zs.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument(
            "curve fitting needs at least two distinct n values".into(),
        ));
    }
    let sxz: f64 = xs.iter().zip(&zs).map(|(x, z)| (x - mx) * (z - mz)).sum();
    let b = sxz / sxx;
    Ok(((mz - b * mx).exp(), b))
}

/// Least-squares fit of `y = a * n^b`.
///
/// Stops when the accepted step is below `1e-10` relative to the parameters,
/// when no damped step lowers the residual any further, or after 200
/// iterations; `converged` is false only in the last case, and the best
/// iterate is returned either way.
pub fn power_fit(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints(points.len()));
    }
    if let Some(&(n, y)) = points
        .iter()
        .find(|(n, y)| !(*n > 0.0 && *y > 0.0 && n.is_finite() && y.is_finite()))
    {
        return Err(Error::NonPositiveData(n, y));
    }
    let (a0, b0) = log_log(points)?;
    let ss0 = ss_res(points, a0, b0);
    let (mut a, mut b, mut ss) = (a0, b0, ss0);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        // normal equations of the linearised problem
        let (mut jaa, mut jab, mut jbb, mut ga, mut gb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(n, y) in points {
            let nb = n.powf(b);
            let da = nb;
            let db = a * nb * n.ln();
            let e = y - a * nb;
            jaa += da * da;
            jab += da * db;
            jbb += db * db;
            ga += da * e;
            gb += db * e;
        }
        let det = jaa * jbb - jab * jab;
        if det == 0.0 || !det.is_finite() {
            converged = true;
            break;
        }
        let step_a = (jbb * ga - jab * gb) / det;
        let step_b = (jaa * gb - jab * ga) / det;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let (na, nb) = (a + t * step_a, b + t * step_b);
            if na > 0.0 {
                let nss = ss_res(points, na, nb);
                if nss < ss {
                    accepted = Some((na, nb, nss));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((na, nb, nss)) = accepted else {
            converged = true;
            break;
        };
        let rel = ((na - a).powi(2) + (nb - b).powi(2)).sqrt() / (a * a + b * b).sqrt().max(1e-300);
        a = na;
        b = nb;
        ss = nss;
        if rel < RELATIVE_STEP_TOL {
            converged = true;
            break;
        }
    }
    let residuals = points
        .iter()
        .map(|&(n, y)| {
            let predicted = a * n.powf(b);
            Residual {
                n,
                observed: y,
                predicted,
                residual: y - predicted,
            }
        })
        .collect();
    Ok(FitResult {
        a,
        b,
        r: goodness(points, a, b),
        ss_res: ss,
        log_log_a: a0,
        log_log_b: b0,
        log_log_ss_res: ss0,
        iterations,
        converged,
        points: residuals,
    })
}

/// Signs of the residuals in point order, e.g. `++--+`.
pub fn residual_signs(fit: &FitResult) -> String {
    fit.points
        .iter()
        .map(|r| match r.residual.partial_cmp(&0.0) {
            Some(std::cmp::Ordering::Greater) => '+',
            Some(std::cmp::Ordering::Less) => '-',
            _ => '0',
        })
        .collect()
}

/// Number of maximal runs of equal residual sign.
pub fn sign_runs(fit: &FitResult) -> usize {
    let s: Vec<char> = residual_signs(fit).chars().collect();
    if s.is_empty() {
        0
    } else {
        1 + s.windows(2).filter(|w| w[0] != w[1]).count()
    }
}

// ---------------------------------------------------------------------------
// reports

pub const LENGTH_SUMMARY_HEADER: [&str; 5] = ["n", "max", "count_at_max", "sum", "average"];
pub const SAMPLE_STATS_HEADER: [&str; 8] =
    ["n", "m", "mean", "sd", "ci_low", "ci_high", "level", "seed"];
pub const FIT_HEADER: [&str; 4] = ["n", "observed", "predicted", "residual"];
pub const POINTS_HEADER: [&str; 2] = ["n", "y"];

/// Output encoding for tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Writes `rows` under an explicit header, so an empty table still gets one.
pub fn emit_csv<T: Serialize, W: Write>(header: &[&str], rows: &[T], w: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wtr.write_record(header)?;
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn parse_csv<T: DeserializeOwned, R: Read>(r: R) -> Result<Vec<T>> {
    let mut rdr = csv::Reader::from_reader(r);
    Ok(rdr.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// CSV with the given header, or a pretty JSON array.
pub fn emit_report<T: Serialize, W: Write>(
    header: &[&str],
    rows: &[T],
    format: Format,
    mut w: W,
) -> Result<()> {
    match format {
        Format::Csv => emit_csv(header, rows, w),
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, rows)?;
            writeln!(w)?;
            Ok(())
        }
    }
}

pub fn emit_fit<W: Write>(fit: &FitResult, format: Format, mut w: W) -> Result<()> {
    match format {
        Format::Csv => emit_csv(&FIT_HEADER, &fit.points, w),
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, fit)?;
            writeln!(w)?;
            Ok(())
        }
    }
}

/// Reads `(n, y)` pairs; a leading header line is skipped when it is not numeric.
pub fn read_points<R: Read>(r: R) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() < 2 {
            return Err(Error::Format(format!("line {}: expected two columns", i + 1)));
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(n), Ok(y)) => out.push((n, y)),
            _ if i == 0 => continue,
            _ => {
                return Err(Error::Format(format!(
                    "line {}: not numeric: {:?}",
                    i + 1,
                    rec.iter().collect::<Vec<_>>()
                )))
            }
        }
    }
    Ok(out)
}

/// Two-column `n,y` CSV for external plotting tools.
pub fn write_points<W: Write>(points: &[(f64, f64)], w: W) -> Result<()> {
    emit_csv(&POINTS_HEADER, points, w)
}
