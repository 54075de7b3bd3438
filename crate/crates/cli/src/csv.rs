//! CSV ingestion: comma-separated decimal floats, one point per row, with an
//! optional single header row detected by its first cell failing to parse.

use std::path::Path;

use oscul_core::PointCloud;

use crate::CliError;

/// Read a point cloud from a CSV file.
///
/// The column count of the first row fixes the dimension; every later row
/// must match it ([`CliError::RaggedRows`] names the offending 1-based
/// line).  A first row with any non-numeric cell is treated as a header and
/// skipped; anywhere else a bad cell is [`CliError::NonNumericCell`] with
/// its row and 1-based column.  Blank lines are ignored.
pub fn read_points(path: &Path) -> Result<PointCloud, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    let mut first_content_row = true;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        match width {
            None => width = Some(cells.len()),
            Some(w) if cells.len() != w => {
                return Err(CliError::RaggedRows {
                    line: idx + 1,
                    expected: w,
                    got: cells.len(),
                });
            }
            Some(_) => {}
        }
        let mut row = Vec::with_capacity(cells.len());
        let mut bad: Option<usize> = None;
        for (c, cell) in cells.iter().enumerate() {
            match cell.parse::<f64>() {
                Ok(v) => row.push(v),
                Err(_) => {
                    bad = Some(c);
                    break;
                }
            }
        }
        match bad {
            None => rows.push(row),
            // Header row: drop it, but keep its width as the reference.
            Some(_) if first_content_row => {}
            Some(c) => {
                return Err(CliError::NonNumericCell {
                    row: idx + 1,
                    col: c + 1,
                    token: cells[c].to_string(),
                });
            }
        }
        first_content_row = false;
    }
    if rows.is_empty() {
        return Err(CliError::EmptyFile { path: path.to_path_buf() });
    }
    Ok(PointCloud::from_rows(&rows)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn plain_rows_parse() {
        let f = write_tmp("0,0\n0,1\n1,0\n");
        let cloud = read_points(f.path()).unwrap();
        assert_eq!(cloud.len(), 3);
        assert_eq!(cloud.dim(), 2);
        assert_eq!(cloud.point(2)[0], 1.0);
    }

    #[test]
    fn header_row_is_skipped() {
        let f = write_tmp("x,y\n0,0\n0,1\n1,0\n");
        let cloud = read_points(f.path()).unwrap();
        assert_eq!(cloud.len(), 3);
        assert_eq!(cloud.dim(), 2);
    }

    #[test]
    fn ragged_row_names_its_line() {
        let f = write_tmp("0,0\n1\n2,2\n");
        match read_points(f.path()) {
            Err(CliError::RaggedRows { line: 2, expected: 2, got: 1 }) => {}
            other => panic!("expected ragged-row error, got {other:?}"),
        }
    }

    #[test]
    fn non_numeric_cell_is_located() {
        let f = write_tmp("0,0\n0,zebra\n1,0\n");
        match read_points(f.path()) {
            Err(CliError::NonNumericCell { row: 2, col: 2, token }) => {
                assert_eq!(token, "zebra");
            }
            other => panic!("expected non-numeric-cell error, got {other:?}"),
        }
    }

    #[test]
    fn empty_and_header_only_files_are_rejected() {
        for content in ["", "\n\n", "x,y\n"] {
            let f = write_tmp(content);
            assert!(matches!(read_points(f.path()), Err(CliError::EmptyFile { .. })));
        }
    }
}
