//! Curve JSON and the CSV traces, with every float written to 17
//! significant digits so that files round-trip exactly.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::curve::{CentroAffineCurve, ProjectiveCurve};
use crate::error::{Error, Result};
use crate::kdv::FlowRow;
use crate::monodromy::SpectralScan;
use crate::periodic::{Parity, PeriodicFn};

/// JSON formatter that writes `f64` as `{:.16e}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", fmt_f64(value))
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serialize with [`FullPrecision`] floats.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::InvalidArgument(format!("json: {e}")))?;
    Ok(String::from_utf8(buf).expect("serde_json writes utf-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveFile {
    Projective {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        psi: Vec<f64>,
    },
    CentroAffine {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        gamma1: Vec<f64>,
        gamma2: Vec<f64>,
    },
}

/// Either kind of curve, as read from a file.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyCurve {
    Projective(ProjectiveCurve),
    CentroAffine(CentroAffineCurve),
}

impl CurveFile {
    pub fn projective(curve: &ProjectiveCurve, seed: Option<u64>) -> Self {
        CurveFile::Projective {
            n: curve.n(),
            seed,
            psi: curve.psi().samples().to_vec(),
        }
    }

    pub fn centro_affine(curve: &CentroAffineCurve, seed: Option<u64>) -> Self {
        CurveFile::CentroAffine {
            n: curve.n(),
            seed,
            gamma1: curve.gamma1().samples().to_vec(),
            gamma2: curve.gamma2().samples().to_vec(),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            CurveFile::Projective { seed, .. } | CurveFile::CentroAffine { seed, .. } => *seed,
        }
    }

    pub fn to_curve(&self) -> Result<AnyCurve> {
        match self {
            CurveFile::Projective { n, psi, .. } => {
                check_len(*n, psi.len())?;
                Ok(AnyCurve::Projective(ProjectiveCurve::new(
                    PeriodicFn::new(psi.clone(), Parity::Periodic)?,
                )?))
            }
            CurveFile::CentroAffine {
                n, gamma1, gamma2, ..
            } => {
                check_len(*n, gamma1.len())?;
                check_len(*n, gamma2.len())?;
                Ok(AnyCurve::CentroAffine(CentroAffineCurve::new(
                    PeriodicFn::new(gamma1.clone(), Parity::Antiperiodic)?,
                    PeriodicFn::new(gamma2.clone(), Parity::Antiperiodic)?,
                )?))
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        to_json(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("curve json: {e}")))
    }
}

fn check_len(n: usize, got: usize) -> Result<()> {
    if n != got {
        return Err(Error::GridMismatch(n, got));
    }
    Ok(())
}

fn seed_line(seed: Option<u64>) -> String {
    seed.map(|s| format!("# seed={s}\n")).unwrap_or_default()
}

/// Scan CSV: optional `# seed=` line, header `lambda,tr2`.
pub fn scan_csv(scan: &SpectralScan, seed: Option<u64>) -> String {
    let mut out = seed_line(seed);
    out.push_str("lambda,tr2\n");
    for (l, v) in scan.lambdas.iter().zip(&scan.tr2) {
        out.push_str(&format!("{},{}\n", fmt_f64(*l), fmt_f64(*v)));
    }
    out
}

/// Flow trace CSV with header `s,H1,H2,I,J,K`.
pub fn flow_csv(rows: &[FlowRow], seed: Option<u64>) -> String {
    let mut out = seed_line(seed);
    out.push_str("s,H1,H2,I,J,K\n");
    for r in rows {
        let cells = [r.s, r.h1, r.h2, r.i, r.j, r.k].map(fmt_f64);
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Numeric rows of a CSV written above, checked against `header`.
pub fn read_csv(text: &str, header: &str) -> Result<Vec<Vec<f64>>> {
    let mut lines = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == header => {}
        other => {
            return Err(Error::InvalidArgument(format!(
                "expected header {header:?}, found {:?}",
                other.unwrap_or("")
            )))
        }
    }
    let width = header.split(',').count();
    lines
        .map(|line| {
            let row = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::InvalidArgument(format!("csv cell in {line:?}: {e}")))?;
            if row.len() != width {
                return Err(Error::InvalidArgument(format!(
                    "row {line:?} has {} cells",
                    row.len()
                )));
            }
            Ok(row)
        })
        .collect()
}

pub fn read_scan_csv(text: &str) -> Result<SpectralScan> {
    let rows = read_csv(text, "lambda,tr2")?;
    Ok(SpectralScan {
        lambdas: rows.iter().map(|r| r[0]).collect(),
        tr2: rows.iter().map(|r| r[1]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_every_bit() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(to_json(&vec![0.1f64]).unwrap(), "[1.0000000000000001e-1]");
    }

    #[test]
    fn curve_file_round_trip() {
        let c = ProjectiveCurve::trig(16, &[(0.05, -0.02)]).unwrap();
        let file = CurveFile::projective(&c, Some(7));
        let text = file.to_json().unwrap();
        assert!(text.contains("\"kind\":\"projective\""));
        let back = CurveFile::from_json(&text).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.to_curve().unwrap(), AnyCurve::Projective(c));
    }

    #[test]
    fn length_mismatch_is_reported() {
        let text = r#"{"kind":"projective","n":16,"psi":[0.0,0.0]}"#;
        let file = CurveFile::from_json(text).unwrap();
        assert_eq!(file.to_curve().unwrap_err(), Error::GridMismatch(16, 2));
    }

    #[test]
    fn scan_csv_round_trip() {
        let scan = SpectralScan {
            lambdas: vec![0.0, 0.5],
            tr2: vec![4.0, 1.0 / 7.0],
        };
        let text = scan_csv(&scan, Some(3));
        assert!(text.starts_with("# seed=3\nlambda,tr2\n"));
        assert_eq!(read_scan_csv(&text).unwrap(), scan);
        assert!(read_csv(&text, "s,H1").is_err());
    }
}
