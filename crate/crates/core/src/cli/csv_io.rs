//! Two-column CSV for paired samples.
//!
//! Rows are `x,y`. An optional single header line is recognised by a
//! non-numeric first row; blank lines are skipped. Written values use 17
//! significant digits so a write/read cycle reproduces every `f64` exactly.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sample::PairedSample;

pub fn read_paired_csv<R: Read>(reader: R) -> Result<PairedSample> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut first = true;
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: Vec<Option<f64>> = record.iter().map(|f| f.parse::<f64>().ok()).collect();
        if first && parsed.iter().all(Option::is_none) {
            first = false;
            continue;
        }
        first = false;
        if record.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 columns, found {}", record.len()),
            });
        }
        match (parsed[0], parsed[1]) {
            (Some(x), Some(y)) if x.is_finite() && y.is_finite() => {
                xs.push(x);
                ys.push(y);
            }
            _ => {
                return Err(Error::Parse {
                    line,
                    message: format!(
                        "non-numeric or non-finite value in '{}'",
                        record.iter().collect::<Vec<_>>().join(",")
                    ),
                })
            }
        }
    }
    PairedSample::new(xs, ys)
}

pub fn read_paired_csv_file(path: &Path) -> Result<PairedSample> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_paired_csv(std::io::BufReader::new(file))
}

pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_paired_csv<W: Write>(sample: &PairedSample, mut w: W) -> Result<()> {
    for (x, y) in sample.iter() {
        writeln!(w, "{},{}", format_f64(x), format_f64(y))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_and_blank_lines() {
        let text = "x,y\n1,1\n\n2,3\n3,2\n4,4\n";
        let s = read_paired_csv(text.as_bytes()).unwrap();
        assert_eq!(s.xs(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.ys(), &[1.0, 3.0, 2.0, 4.0]);
    }

    #[test]
    fn bad_token_names_line() {
        let text = "1,1\n2,3\n3,abc\n";
        match read_paired_csv(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let text = "1,1\n2,3,4\n";
        assert!(matches!(read_paired_csv(text.as_bytes()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn too_few_rows() {
        assert!(read_paired_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(pts in prop::collection::vec((any::<f64>(), any::<f64>()), 2..50)) {
            let pts: Vec<(f64, f64)> = pts.into_iter().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
            prop_assume!(pts.len() >= 2);
            let s = PairedSample::from_pairs(&pts).unwrap();
            let mut buf = Vec::new();
            write_paired_csv(&s, &mut buf).unwrap();
            let back = read_paired_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(&back, &s);
            let mut again = Vec::new();
            write_paired_csv(&back, &mut again).unwrap();
            prop_assert_eq!(buf, again);
        }
    }
}
