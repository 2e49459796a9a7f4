//! Numeric CSV input for `fit`.
//!
//! Comma separated, one header row, `.` as decimal point, UTF-8. Every data
//! cell must parse as a finite number.

use std::path::Path;

use crate::error::{AppError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn from_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?;
        Self::from_reader(file).map_err(|e| match e {
            AppError::Data(msg) => AppError::Data(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let names: Vec<String> = rdr
            .headers()
            .map_err(|e| AppError::Data(e.to_string()))?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        if names.iter().all(|n| n.is_empty()) {
            return Err(AppError::Data("missing header row".into()));
        }
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(AppError::Data(format!("column {} has an empty header", i + 1)));
            }
            if names[..i].contains(name) {
                return Err(AppError::Data(format!("duplicate column \"{name}\"")));
            }
        }
        let mut columns = vec![Vec::new(); names.len()];
        for (i, record) in rdr.records().enumerate() {
            let row = i + 1;
            let record = record.map_err(|e| AppError::Data(format!("row {row}: {e}")))?;
            for (j, cell) in record.iter().enumerate() {
                let value: f64 = cell.trim().parse().map_err(|_| {
                    AppError::Data(format!("row {row}, column \"{}\": cannot read `{cell}` as a number", names[j]))
                })?;
                if !value.is_finite() {
                    return Err(AppError::Data(format!("row {row}, column \"{}\": value is not finite", names[j])));
                }
                columns[j].push(value);
            }
        }
        if columns[0].is_empty() {
            return Err(AppError::Data("no data rows".into()));
        }
        Ok(Self { names, columns })
    }

    pub fn nrows(&self) -> usize {
        self.columns[0].len()
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| AppError::Data(format!("no column named \"{name}\"")))
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        Ok(&self.columns[self.index(name)?])
    }

    /// Resolves a column selection. `selection` is either a comma-separated list
    /// of names or a prefix: `z*`, or a bare `z` that names no column. Prefix
    /// matches skip the `exclude`d columns; header order is kept.
    pub fn select(&self, selection: &str, exclude: &[&str]) -> Result<Vec<usize>> {
        let selection = selection.trim();
        let prefix = match selection.strip_suffix('*') {
            Some(p) => Some(p),
            None if !selection.contains(',') && !self.names.iter().any(|n| n == selection) => Some(selection),
            None => None,
        };
        let picked: Vec<usize> = match prefix {
            Some(p) => (0..self.names.len())
                .filter(|&j| self.names[j].starts_with(p) && !exclude.contains(&self.names[j].as_str()))
                .collect(),
            None => {
                let mut out = Vec::new();
                for name in selection.split(',').map(str::trim) {
                    let j = self.index(name)?;
                    if exclude.contains(&name) {
                        return Err(AppError::Data(format!("column \"{name}\" is already used as outcome or treatment")));
                    }
                    if !out.contains(&j) {
                        out.push(j);
                    }
                }
                out
            }
        };
        if picked.is_empty() {
            return Err(AppError::Data(format!("`{selection}` matches no columns")));
        }
        Ok(picked)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(text: &str) -> Result<Dataset> {
        Dataset::from_reader(text.as_bytes())
    }

    #[test]
    fn reads_columns() {
        let d = ds("y,d,x1,x2\n1,2,3,4\n5,6,7,-8.5e-1\n").unwrap();
        assert_eq!(d.nrows(), 2);
        assert_eq!(d.column("x2").unwrap(), &[4.0, -0.85]);
    }

    #[test]
    fn bad_cells_name_row_and_column() {
        let e = ds("y,z12\n1,2\n3,abc\n").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let msg = e.to_string();
        assert!(msg.contains("row 2") && msg.contains("\"z12\""), "{msg}");
        assert!(ds("y,z\n1,NaN\n").unwrap_err().to_string().contains("not finite"));
        assert!(ds("y,z\n1,\n").is_err());
        assert!(ds("y,z\n1,2,3\n").unwrap_err().to_string().contains("row 1"));
        assert!(ds("y,y\n1,2\n").unwrap_err().to_string().contains("duplicate"));
        assert!(ds("y,z\n").unwrap_err().to_string().contains("no data"));
    }

    #[test]
    fn selections() {
        let d = ds("y,d,z1,z2,w,z10\n1,2,3,4,5,6\n").unwrap();
        assert_eq!(d.select("z*", &["y", "d"]).unwrap(), vec![2, 3, 5]);
        assert_eq!(d.select("z", &["y", "d"]).unwrap(), vec![2, 3, 5]);
        assert_eq!(d.select("z1", &[]).unwrap(), vec![2]);
        assert_eq!(d.select("w, z2,w", &[]).unwrap(), vec![4, 3]);
        assert!(d.select("q*", &[]).is_err());
        assert!(d.select("w,nope", &[]).is_err());
        assert!(d.select("y,w", &["y"]).is_err());
        assert!(d.select("d*", &["d"]).is_err());
    }
}
