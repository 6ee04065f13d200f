//! Reading sample tables and distance matrices, and writing results.
//!
//! Numeric text is written with 17 significant digits so that every f64
//! survives a write/read round trip bit-exactly. Result documents are JSON
//! with a fixed key set; the local correlation map is optional and emitted
//! row-major.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ComparisonKind, DistanceMatrix, SampleSet};
use crate::localcorr::LocalCorrMap;
use crate::mat::Mat;

/// Tolerated asymmetry when loading a distance matrix; larger asymmetries
/// are rejected as corrupt rather than silently averaged away.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Tolerated negative magnitude in loaded distances (rounding dust).
pub const NEGATIVE_TOLERANCE: f64 = 1e-12;

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Reads a rectangular numeric table. Blank lines and ragged rows are
/// format errors that name the offending physical line; cells that fail to
/// parse as finite numbers are parse errors with row and column.
pub fn load_table(path: &Path, delimiter: char, skip_header: bool) -> Result<Mat> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if skip_header && idx == 0 {
            continue;
        }
        if line.trim().is_empty() {
            return Err(Error::Format {
                path: path.to_path_buf(),
                message: format!("line {line_no} is blank"),
            });
        }
        let mut row = Vec::new();
        for (col_idx, cell) in line.split(delimiter).enumerate() {
            let cell = cell.trim();
            let value: f64 = cell.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                column: col_idx + 1,
                message: format!("'{cell}' is not a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: line_no,
                    column: col_idx + 1,
                    message: format!("'{cell}' is not finite"),
                });
            }
            row.push(value);
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Format {
                    path: path.to_path_buf(),
                    message: format!("line {line_no} has {} columns, expected {w}", row.len()),
                });
            }
            _ => {}
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: "no data rows".into(),
        });
    }
    Ok(Mat::from_rows(&rows))
}

/// Loads an n x p sample table (n >= 3 samples).
pub fn load_samples(path: &Path, delimiter: char, skip_header: bool) -> Result<SampleSet> {
    SampleSet::new(load_table(path, delimiter, skip_header)?)
}

/// Writes a sample table with round-trip-exact decimals.
pub fn write_samples(s: &SampleSet, path: &Path, delimiter: char) -> Result<()> {
    write_mat(s.values(), path, delimiter)
}

fn write_mat(m: &Mat, path: &Path, delimiter: char) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|&v| fmt17(v)).collect();
        out.push_str(&row.join(&delimiter.to_string()));
        out.push('\n');
    }
    let mut file = fs::File::create(path).map_err(io_err)?;
    file.write_all(out.as_bytes()).map_err(io_err)?;
    Ok(())
}

/// Loads a square distance matrix: symmetrized by averaging when the
/// asymmetry stays within [`SYMMETRY_TOLERANCE`], rejected otherwise; tiny
/// negative entries are clamped to zero and the diagonal is forced to zero.
pub fn load_distance_matrix(
    path: &Path,
    delimiter: char,
    skip_header: bool,
) -> Result<DistanceMatrix> {
    let raw = load_table(path, delimiter, skip_header)?;
    if raw.rows() != raw.cols() {
        return Err(Error::Shape(format!(
            "distance matrix in {} must be square, got {}x{}",
            path.display(),
            raw.rows(),
            raw.cols()
        )));
    }
    let n = raw.rows();
    let mut values = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = raw[(i, j)];
            if v < -NEGATIVE_TOLERANCE {
                return Err(Error::Domain(format!(
                    "negative distance {v} at ({},{}) in {}",
                    i + 1,
                    j + 1,
                    path.display()
                )));
            }
            let gap = (v - raw[(j, i)]).abs();
            if gap > SYMMETRY_TOLERANCE {
                return Err(Error::Domain(format!(
                    "asymmetry {gap} at ({},{}) in {} exceeds tolerance {SYMMETRY_TOLERANCE}",
                    i + 1,
                    j + 1,
                    path.display()
                )));
            }
            values[(i, j)] = (0.5 * (v + raw[(j, i)])).max(0.0);
        }
    }
    for i in 0..n {
        values[(i, i)] = 0.0;
    }
    DistanceMatrix::new(values, ComparisonKind::Distance)
}

/// Exports a local correlation map as a row-major delimited grid
/// (row index k, column index l).
pub fn write_map_grid(map: &LocalCorrMap, path: &Path, delimiter: char) -> Result<()> {
    write_mat(map.grid(), path, delimiter)
}

/// The serialized outcome of a test run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub method: String,
    pub statistic: f64,
    /// Absent for runs without permutations (e.g. map-only runs).
    pub p_value: Option<f64>,
    pub optimal_scales: Vec<(usize, usize)>,
    pub canonical_scale: (usize, usize),
    /// Absent for global methods, which have no scale threshold.
    pub threshold: Option<f64>,
    pub num_permutations: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<Vec<Vec<f64>>>,
}

impl ResultDocument {
    fn validate(&self) -> Result<()> {
        if let Some(p) = self.p_value {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Domain(format!("p-value {p} outside [0,1]")));
            }
        }
        if !self.optimal_scales.is_empty() && !self.optimal_scales.contains(&self.canonical_scale) {
            return Err(Error::Domain(
                "canonical scale missing from optimal scales".into(),
            ));
        }
        Ok(())
    }
}

/// Writes a validated result document as JSON.
pub fn write_result(doc: &ResultDocument, path: &Path) -> Result<()> {
    doc.validate()?;
    let io_err = |p: &Path| {
        let path: PathBuf = p.to_path_buf();
        move |source: std::io::Error| Error::Io {
            path: path.clone(),
            source,
        }
    };
    let mut file = fs::File::create(path).map_err(io_err(path))?;
    serde_json::to_writer_pretty(&mut file, doc).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    file.write_all(b"\n").map_err(io_err(path))?;
    Ok(())
}

/// Reads a result document back.
pub fn read_result(path: &Path) -> Result<ResultDocument> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let doc: ResultDocument = serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    doc.validate()?;
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    fn tmpdir() -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("mgc-dataio-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    fn write_text(name: &str, text: &str) -> std::path::PathBuf {
        let path = tmpdir().join(name);
        fs::write(&path, text).unwrap();
        path
    }

    #[test]
    fn reads_single_column_file() {
        let path = write_text("single.csv", "0\n1\n2\n");
        let s = load_samples(&path, ',', false).unwrap();
        assert_eq!(s.n(), 3);
        assert_eq!(s.p(), 1);
        assert_eq!(s.row(0)[0], 0.0);
        assert_eq!(s.row(2)[0], 2.0);
    }

    #[test]
    fn blank_line_is_named() {
        let path = write_text("blank.csv", "1,2\n3,4\n\n5,6\n7,8\n");
        match load_samples(&path, ',', false) {
            Err(Error::Format { message, .. }) => assert!(message.contains("line 3")),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn ragged_and_non_numeric_rows_are_rejected() {
        let ragged = write_text("ragged.csv", "1,2\n3\n5,6\n");
        assert!(matches!(
            load_samples(&ragged, ',', false),
            Err(Error::Format { .. })
        ));

        let alpha = write_text("alpha.csv", "1,2\n3,x\n5,6\n");
        match load_samples(&alpha, ',', false) {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(column, 2);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn too_few_samples_is_a_size_error() {
        let path = write_text("short.csv", "1\n2\n");
        assert!(matches!(
            load_samples(&path, ',', false),
            Err(Error::Size(_))
        ));
    }

    #[test]
    fn header_is_skipped_on_request() {
        let path = write_text("header.csv", "a,b\n1,2\n3,4\n5,6\n");
        let s = load_samples(&path, ',', true).unwrap();
        assert_eq!(s.n(), 3);
    }

    #[test]
    fn sample_round_trip_is_bit_exact() {
        let mut stream = Stream::new(5, &[1]);
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|_| (0..3).map(|_| stream.standard_normal() * 1e3).collect())
            .collect();
        let s = SampleSet::new(Mat::from_rows(&rows)).unwrap();
        let path = tmpdir().join("roundtrip.csv");
        write_samples(&s, &path, ',').unwrap();
        let back = load_samples(&path, ',', false).unwrap();
        for i in 0..10 {
            for j in 0..3 {
                assert_eq!(s.row(i)[j].to_bits(), back.row(i)[j].to_bits());
            }
        }
    }

    #[test]
    fn distance_matrix_well_formed_and_shape_checked() {
        let ok = write_text("d_ok.csv", "0,1\n1,0\n");
        let d = load_distance_matrix(&ok, ',', false).unwrap();
        assert_eq!(d.n(), 2);
        assert_eq!(d.values()[(0, 1)], 1.0);

        let bad = write_text("d_bad.csv", "0,1,2\n1,0,3\n");
        assert!(matches!(
            load_distance_matrix(&bad, ',', false),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn small_asymmetry_is_averaged_large_is_rejected() {
        let tiny = write_text("d_tiny.csv", "0,1.0000000000005\n1,0\n");
        let d = load_distance_matrix(&tiny, ',', false).unwrap();
        let expect = 0.5 * (1.0000000000005 + 1.0);
        assert_eq!(d.values()[(0, 1)], expect);
        assert_eq!(d.values()[(1, 0)], expect);

        let big = write_text("d_big.csv", "0,1.1\n1,0\n");
        assert!(matches!(
            load_distance_matrix(&big, ',', false),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn negative_and_diagonal_handling() {
        let neg = write_text("d_neg.csv", "0,-0.5\n-0.5,0\n");
        assert!(matches!(
            load_distance_matrix(&neg, ',', false),
            Err(Error::Domain(_))
        ));

        let dust = write_text("d_dust.csv", "1e-13,-1e-13\n-1e-13,2e-13\n");
        let d = load_distance_matrix(&dust, ',', false).unwrap();
        assert_eq!(d.values()[(0, 0)], 0.0);
        assert_eq!(d.values()[(1, 1)], 0.0);
        assert_eq!(d.values()[(0, 1)], 0.0);
    }

    #[test]
    fn result_document_round_trip() {
        let doc = ResultDocument {
            method: "mgc".into(),
            statistic: 0.12345678901234568,
            p_value: Some(1.0 / 101.0),
            optimal_scales: vec![(3, 4), (5, 4)],
            canonical_scale: (3, 4),
            threshold: Some(0.035),
            num_permutations: 100,
            seed: 42,
            map: Some(vec![vec![0.1, 0.2], vec![0.3, 0.4]]),
        };
        let path = tmpdir().join("result.json");
        write_result(&doc, &path).unwrap();
        let back = read_result(&path).unwrap();
        assert_eq!(doc, back);
        assert!((back.statistic - doc.statistic).abs() < 1e-15);
    }

    #[test]
    fn map_key_only_present_when_emitted() {
        let mut doc = ResultDocument {
            method: "dcorr".into(),
            statistic: 0.5,
            p_value: Some(0.01),
            optimal_scales: vec![(10, 10)],
            canonical_scale: (10, 10),
            threshold: None,
            num_permutations: 100,
            seed: 0,
            map: None,
        };
        let path = tmpdir().join("nomap.json");
        write_result(&doc, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(!text.contains("\"map\""));

        doc.map = Some(vec![vec![0.0; 5]; 5]);
        let path5 = tmpdir().join("map5.json");
        write_result(&doc, &path5).unwrap();
        let back = read_result(&path5).unwrap();
        let map = back.map.unwrap();
        assert_eq!(map.len(), 5);
        assert!(map.iter().all(|row| row.len() == 5));
    }

    #[test]
    fn invalid_documents_are_rejected() {
        let doc = ResultDocument {
            method: "mgc".into(),
            statistic: 0.5,
            p_value: Some(1.5),
            optimal_scales: vec![(1, 1)],
            canonical_scale: (1, 1),
            threshold: None,
            num_permutations: 10,
            seed: 0,
            map: None,
        };
        let path = tmpdir().join("invalid.json");
        assert!(matches!(write_result(&doc, &path), Err(Error::Domain(_))));

        let doc2 = ResultDocument {
            p_value: Some(0.5),
            canonical_scale: (2, 2),
            optimal_scales: vec![(1, 1)],
            ..doc
        };
        assert!(matches!(write_result(&doc2, &path), Err(Error::Domain(_))));
    }

    #[test]
    fn unwritable_path_is_an_io_error() {
        let doc = ResultDocument {
            method: "mgc".into(),
            statistic: 0.5,
            p_value: None,
            optimal_scales: vec![(1, 1)],
            canonical_scale: (1, 1),
            threshold: None,
            num_permutations: 0,
            seed: 0,
            map: None,
        };
        let path = Path::new("/nonexistent-dir-zzz/out.json");
        assert!(matches!(write_result(&doc, path), Err(Error::Io { .. })));
    }
}
