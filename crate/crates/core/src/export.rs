//! CSV and JSON artifacts. Floats are written with 17 significant digits so a
//! rerun with the same configuration reproduces files byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::ensemble::Histogram2D;
use crate::error::{Error, Result};
use crate::fluctuation::{FrCheck, PiHistogram, RateFunction};
use crate::markov::DbReport;
use crate::transport::{GKResult, SweepRow};

pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Rows of preformatted cells under a header.
pub fn csv(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::with_capacity(1024);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn float_rows<'a>(
    rows: impl IntoIterator<Item = &'a [f64]> + 'a,
) -> impl Iterator<Item = Vec<String>> + 'a {
    rows.into_iter()
        .map(|r| r.iter().map(|&v| fmt_float(v)).collect())
}

pub fn histogram_csv(h: &Histogram2D) -> String {
    let mut out = String::with_capacity(h.counts.len() * 12);
    out.push_str("x_bin,y_bin,count\n");
    for ix in 0..h.nx {
        for iy in 0..h.ny {
            let _ = writeln!(out, "{ix},{iy},{}", h.get(ix, iy));
        }
    }
    out
}

/// One marginal density on uniform bins of `[0, 1]`.
pub fn marginal_csv(density: &[f64]) -> String {
    let bins = density.len() as f64;
    csv(
        "bin,center,density",
        density.iter().enumerate().map(|(i, &d)| {
            vec![
                i.to_string(),
                fmt_float((i as f64 + 0.5) / bins),
                fmt_float(d),
            ]
        }),
    )
}

pub fn pi_csv(pi: &PiHistogram) -> String {
    let rows: Vec<[f64; 2]> = pi.p.iter().zip(pi.masses()).map(|(&p, m)| [p, m]).collect();
    csv("p,pi_n", float_rows(rows.iter().map(|r| r.as_slice())))
}

pub fn zeta_csv(rate: &RateFunction) -> String {
    let rows: Vec<[f64; 2]> = rate.points.iter().map(|pt| [pt.p, pt.zeta]).collect();
    csv("p,zeta_n", float_rows(rows.iter().map(|r| r.as_slice())))
}

pub fn fr_csv(fr: &FrCheck) -> String {
    let rows: Vec<[f64; 2]> = fr.points.iter().map(|pt| [pt.p, pt.c]).collect();
    csv("p,fr_value", float_rows(rows.iter().map(|r| r.as_slice())))
}

pub fn surface_csv(rows: &[[f64; 3]]) -> String {
    csv(
        "ell,q,mean_lambda",
        float_rows(rows.iter().map(|r| r.as_slice())),
    )
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let rows: Vec<[f64; 3]> = rows.iter().map(|r| [r.bias, r.l_value, r.stderr]).collect();
    csv(
        "F_e,L,stderr",
        float_rows(rows.iter().map(|r| r.as_slice())),
    )
}

pub fn partial_sums_csv(result: &GKResult) -> String {
    csv(
        "k,partial_sum",
        result
            .partial_sums
            .iter()
            .enumerate()
            .map(|(k, &s)| vec![k.to_string(), fmt_float(s)]),
    )
}

pub fn db_csv(report: &DbReport) -> String {
    csv(
        "from,to,forward,reverse,mismatch",
        report.pairs.iter().map(|p| {
            vec![
                p.from.to_string(),
                p.to.to_string(),
                fmt_float(p.forward),
                fmt_float(p.reverse),
                fmt_float(p.mismatch()),
            ]
        }),
    )
}

pub fn write_text(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, body)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let body = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    write_text(path, &(body + "\n"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_significant_digits() {
        assert_eq!(fmt_float(0.25), "2.5000000000000000e-1");
        assert_eq!(fmt_float(0.1).parse::<f64>().unwrap(), 0.1);
        let v = std::f64::consts::PI;
        assert_eq!(fmt_float(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
    }

    #[test]
    fn histogram_rows() {
        let mut h = Histogram2D::new(2, 2).unwrap();
        h.add(0.1, 0.9);
        let body = histogram_csv(&h);
        assert_eq!(body, "x_bin,y_bin,count\n0,0,0\n0,1,1\n1,0,0\n1,1,0\n");
    }

    #[test]
    fn files_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("m.csv");
        write_text(&path, &surface_csv(&[[0.15, 0.0, 0.0]])).unwrap();
        let body = std::fs::read_to_string(&path).unwrap();
        assert!(body.starts_with("ell,q,mean_lambda\n1.4999999999999999e-1,"));
    }
}
