//! CSV input: a header row, comma separated, decimal point.

use std::collections::HashMap;
use std::path::Path;

use crate::Failure;

/// Named numeric columns read from a CSV file.
pub struct Columns {
    rows: usize,
    values: HashMap<String, Vec<f64>>,
}

impl Columns {
    /// Reads `required` columns (and `optional` ones when present). Cells
    /// must parse as finite numbers; errors name the 1-based data row.
    pub fn read(path: &Path, required: &[&str], optional: &[&str]) -> Result<Columns, Failure> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
        let headers = reader
            .headers()
            .map_err(|e| Failure::Usage(format!("{}: bad header: {e}", path.display())))?
            .clone();
        let index_of = |name: &str| headers.iter().position(|h| h == name);
        let mut wanted = Vec::new();
        for &name in required {
            let i = index_of(name).ok_or_else(|| {
                Failure::Usage(format!("{}: missing column `{name}`", path.display()))
            })?;
            wanted.push((name, i));
        }
        wanted.extend(
            optional
                .iter()
                .filter_map(|&name| index_of(name).map(|i| (name, i))),
        );

        let mut values: HashMap<String, Vec<f64>> = wanted
            .iter()
            .map(|(n, _)| (n.to_string(), Vec::new()))
            .collect();
        let mut rows = 0;
        for (r, record) in reader.records().enumerate() {
            let row = r + 1;
            let record = record
                .map_err(|e| Failure::Usage(format!("{}: row {row}: {e}", path.display())))?;
            for &(name, i) in &wanted {
                let cell = record.get(i).unwrap_or("");
                let v: f64 = cell.parse().map_err(|_| {
                    Failure::Usage(format!(
                        "{}: row {row}, column `{name}`: cannot parse `{cell}` as a number",
                        path.display()
                    ))
                })?;
                if !v.is_finite() {
                    return Err(Failure::Usage(format!(
                        "{}: row {row}, column `{name}`: value `{cell}` is not finite",
                        path.display()
                    )));
                }
                values.get_mut(name).expect("declared column").push(v);
            }
            rows += 1;
        }
        if rows == 0 {
            return Err(Failure::Usage(format!("{}: no data rows", path.display())));
        }
        Ok(Columns { rows, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.values.get(name).map(Vec::as_slice)
    }

    /// A column that [`Columns::read`] was told is required.
    pub fn column(&self, name: &str) -> &[f64] {
        self.get(name).expect("required column")
    }
}
