//! Delimited text ingestion.
//!
//! Accepts comma separated or whitespace separated rows with an optional
//! header. Blank lines and lines starting with `#` are skipped. The label
//! column may hold integers or arbitrary tokens; labels are re-encoded to
//! `0..C` in ascending order (numeric order when every label is numeric).

use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{LabeledPointCloud, PointCloud};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Which column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
    Last,
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        Ok(if s.eq_ignore_ascii_case("last") || s == "-1" {
            LabelColumn::Last
        } else if let Ok(i) = s.parse::<usize>() {
            LabelColumn::Index(i)
        } else {
            LabelColumn::Name(s.to_string())
        })
    }
}

fn split_fields(line: &str) -> Vec<&str> {
    if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

pub fn load_csv(path: impl AsRef<Path>, label: &LabelColumn) -> Result<LabeledPointCloud> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| {
        if source.kind() == ErrorKind::NotFound {
            Error::MissingFile {
                path: path.to_path_buf(),
            }
        } else {
            Error::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    parse_delimited(&text, path, label)
}

/// Parses delimited text; `origin` is only used in error messages.
pub fn parse_delimited(text: &str, origin: &Path, label: &LabelColumn) -> Result<LabeledPointCloud> {
    let parse_err = |row: usize, column: usize, message: String| Error::Parse {
        path: PathBuf::from(origin),
        row,
        column,
        message,
    };

    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .peekable();

    let Some(&(first_no, first)) = lines.peek() else {
        return Err(Error::EmptyFile {
            path: origin.to_path_buf(),
        });
    };
    let first_fields = split_fields(first);
    let width = first_fields.len();
    if width < 2 {
        return Err(parse_err(
            first_no,
            0,
            "need at least one feature column and a label column".into(),
        ));
    }

    // A header is a first row with any non-numeric cell outside the label
    // column; with a named label column the first row must be a header.
    let resolve = |header: Option<&[&str]>| -> Result<usize> {
        match label {
            LabelColumn::Last => Ok(width - 1),
            LabelColumn::Index(i) if *i < width => Ok(*i),
            LabelColumn::Index(i) => Err(Error::invalid(format!(
                "label column {i} out of range for {width} columns"
            ))),
            LabelColumn::Name(name) => header
                .and_then(|h| h.iter().position(|c| c == name))
                .ok_or_else(|| Error::invalid(format!("no header column named {name:?}"))),
        }
    };
    let has_header = match label {
        LabelColumn::Name(_) => true,
        _ => {
            let lc = resolve(None)?;
            first_fields
                .iter()
                .enumerate()
                .any(|(j, c)| j != lc && c.parse::<f64>().is_err())
        }
    };
    let label_col = resolve(has_header.then_some(first_fields.as_slice()))?;
    if has_header {
        lines.next();
    }

    let mut features = Vec::new();
    let mut raw_labels = Vec::new();
    for (line_no, line) in lines {
        let fields = split_fields(line);
        if fields.len() != width {
            return Err(parse_err(
                line_no,
                fields.len().min(width),
                format!("expected {width} fields, found {}", fields.len()),
            ));
        }
        for (j, cell) in fields.iter().enumerate() {
            if j == label_col {
                raw_labels.push(cell.to_string());
                continue;
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(line_no, j, format!("non-numeric value {cell:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(line_no, j, format!("non-finite value {cell:?}")));
            }
            features.push(v);
        }
    }
    if raw_labels.is_empty() {
        return Err(Error::EmptyFile {
            path: origin.to_path_buf(),
        });
    }

    let mut classes: Vec<&String> = raw_labels.iter().collect();
    let numeric = classes.iter().all(|c| c.parse::<f64>().is_ok());
    if numeric {
        classes.sort_by(|a, b| {
            let (x, y) = (a.parse::<f64>().unwrap(), b.parse::<f64>().unwrap());
            x.total_cmp(&y)
        });
    } else {
        classes.sort();
    }
    classes.dedup();
    let labels = raw_labels
        .iter()
        .map(|l| classes.iter().position(|c| *c == l).expect("seen label"))
        .collect();

    let n = raw_labels.len();
    let cloud = PointCloud::new(Matrix::from_row_major(n, width - 1, features))?;
    LabeledPointCloud::new(cloud, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, label: &str) -> Result<LabeledPointCloud> {
        parse_delimited(text, Path::new("mem"), &label.parse().unwrap())
    }

    #[test]
    fn comma_without_header() {
        let c = parse("1.0,2.0,0\n3.0,4.0,1\n5,6,1\n", "last").unwrap();
        assert_eq!((c.len(), c.cloud().dim(), c.num_classes()), (3, 2, 2));
        assert_eq!(c.cloud().point(2), &[5.0, 6.0]);
    }

    #[test]
    fn whitespace_with_header_and_name() {
        let text = "a b cls\n1 2 x\n3 4 y\n";
        let by_name = parse(text, "cls").unwrap();
        let by_index = parse(text, "2").unwrap();
        assert_eq!(by_name, by_index);
        assert_eq!(by_name.labels(), &[0, 1]);
    }

    #[test]
    fn label_in_first_column() {
        let c = parse("7,0.5,0.25\n3,1,1\n", "0").unwrap();
        // numeric labels sort numerically: 3 -> 0, 7 -> 1
        assert_eq!(c.labels(), &[1, 0]);
        assert_eq!(c.cloud().point(0), &[0.5, 0.25]);
    }

    #[test]
    fn single_row_file() {
        let c = parse("1,2,3,0\n", "last").unwrap();
        assert_eq!((c.len(), c.num_classes()), (1, 1));
    }

    #[test]
    fn errors_are_distinct() {
        assert!(matches!(parse("", "last"), Err(Error::EmptyFile { .. })));
        assert!(matches!(parse("# only comment\n", "last"), Err(Error::EmptyFile { .. })));
        let err = parse("1,2,0\n1,oops,1\n", "last").unwrap_err();
        match err {
            Error::Parse { row, column, .. } => assert_eq!((row, column), (2, 1)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            load_csv("/definitely/not/here.csv", &LabelColumn::Last),
            Err(Error::MissingFile { .. })
        ));
        assert!(matches!(parse("1,2,0\n1,2\n", "last"), Err(Error::Parse { .. })));
    }
}
