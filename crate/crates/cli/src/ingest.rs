//! Comma-separated input: header row, one observation per row, row order is
//! time order.

use std::io::Read;
use std::path::Path;

use constancy::models::{markov_transitions, Family, FamilyId, Observation};

use crate::data;
use crate::error::{CliError, Result};

/// Which columns feed the observations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ColumnMap {
    /// Response column; the last column when unset.
    pub response: Option<String>,
    /// Second coordinate of a binormal pair; the column before the response
    /// when unset.
    pub second: Option<String>,
    /// Regression covariates, in order.
    pub covariates: Vec<String>,
    /// Prepend a constant `1` to every covariate row.
    pub intercept: bool,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub source: String,
    pub family: Family,
    pub observations: Vec<Observation>,
    /// Number of data rows read (one more than the transitions for a Markov chain).
    pub rows: usize,
}

/// Reads `source`, which is a file path or `builtin:<name>`.
pub fn ingest(source: &str, map: &ColumnMap, family: FamilyId) -> Result<Dataset> {
    if let Some(name) = source.strip_prefix("builtin:") {
        let text = data::builtin(name).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown builtin dataset `{name}`; try {}",
                data::NAMES.join(", ")
            ))
        })?;
        return ingest_reader(text.as_bytes(), source, map, family);
    }
    let file = std::fs::File::open(source).map_err(|e| CliError::Io {
        path: Path::new(source).to_path_buf(),
        source: e,
    })?;
    ingest_reader(file, source, map, family)
}

struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn column(&self, name: &str) -> Result<usize> {
        self.headers.iter().position(|h| h == name).ok_or_else(|| {
            CliError::Data(format!(
                "missing column `{name}` (have {})",
                self.headers.join(", ")
            ))
        })
    }

    fn number(&self, row: usize, col: usize) -> Result<f64> {
        let cell = self.rows[row][col].trim();
        cell.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.cell_error(row, col, format!("`{cell}` is not a finite number")))
    }

    fn cell_error(&self, row: usize, col: usize, message: String) -> CliError {
        CliError::Cell {
            row: row + 1,
            column: col + 1,
            name: self.headers[col].clone(),
            message,
        }
    }
}

fn read_table<R: Read>(reader: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::Data(format!("unreadable header: {e}")))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if headers.iter().all(|h| h.is_empty()) {
        return Err(CliError::Data("empty file".into()));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Data(format!("row {}: {e}", i + 1)))?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    if rows.is_empty() {
        return Err(CliError::Data(
            "empty file: no data rows after the header".into(),
        ));
    }
    Ok(Table { headers, rows })
}

pub fn ingest_reader<R: Read>(
    reader: R,
    source: &str,
    map: &ColumnMap,
    id: FamilyId,
) -> Result<Dataset> {
    let table = read_table(reader)?;
    let response = match &map.response {
        Some(name) => table.column(name)?,
        None => table.headers.len() - 1,
    };
    let covariates = map
        .covariates
        .iter()
        .map(|c| table.column(c))
        .collect::<Result<Vec<_>>>()?;
    let q = covariates.len() + usize::from(map.intercept);
    let family = Family::from_id(id, q)?;
    let n = table.rows.len();
    let observations = match family {
        Family::MarkovTwoState => {
            let states = (0..n)
                .map(|r| {
                    let v = table.number(r, response)?;
                    if v == 0.0 || v == 1.0 {
                        Ok(v as usize)
                    } else {
                        Err(table.cell_error(r, response, format!("state {v} is not 0 or 1")))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            markov_transitions(&states)?
        }
        _ => {
            let second = match (&family, &map.second) {
                (Family::Binormal, Some(name)) => Some(table.column(name)?),
                (Family::Binormal, None) if response > 0 => Some(response - 1),
                (Family::Binormal, None) => {
                    return Err(CliError::Usage("a binormal pair needs two columns".into()));
                }
                _ => None,
            };
            let mut out = Vec::with_capacity(n);
            for r in 0..n {
                let y = table.number(r, response)?;
                let obs = match &family {
                    Family::Multinomial6 => {
                        if y.fract() != 0.0 || !(1.0..=6.0).contains(&y) {
                            return Err(table.cell_error(
                                r,
                                response,
                                format!("category {y} is not one of 1..6"),
                            ));
                        }
                        Observation::Category(y as usize - 1)
                    }
                    Family::Binormal => Observation::Pair(table.number(r, second.unwrap())?, y),
                    Family::NormalRegression { .. } | Family::PoissonRegression { .. } => {
                        let mut x = Vec::with_capacity(q);
                        if map.intercept {
                            x.push(1.0);
                        }
                        for &c in &covariates {
                            x.push(table.number(r, c)?);
                        }
                        Observation::Regression { y, x }
                    }
                    _ => Observation::Scalar(y),
                };
                family
                    .check_observation(&obs)
                    .map_err(|e| table.cell_error(r, response, e.to_string()))?;
                out.push(obs);
            }
            out
        }
    };
    Ok(Dataset {
        source: source.to_string(),
        family,
        observations,
        rows: n,
    })
}
