//! Daily time-series tables: parsing, validation, cleaning, and derived columns.
//!
//! A [`TimeSeriesTable`] holds one record per consecutive calendar day. Each
//! variable is a named column of optional values; metadata tracks its unit,
//! role in modeling, and missing fraction. Tables are immutable once built —
//! every operation returns a new table.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// How a variable participates in modeling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableRole {
    /// Forecast target; never interpolated.
    Target,
    /// Input signal.
    Driver,
    /// Computed from other columns (e.g. a rolling average).
    Derived,
}

/// Per-variable metadata carried alongside the values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableMeta {
    pub name: String,
    /// Free-text unit; "%" and "counts" enable range validation.
    pub unit: String,
    pub role: VariableRole,
    /// Fraction of records where this variable is missing, in [0, 1].
    pub missing_fraction: f64,
}

/// Ontario-style public-health restriction stages and their ordinal levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RestrictionStage {
    Normal,
    Opening3,
    Opening2,
    Opening1,
    Lockdown,
}

impl RestrictionStage {
    /// Parses one of the five stage names.
    pub fn from_name(name: &str) -> Result<Self, TableError> {
        match name.trim() {
            "Normal" => Ok(Self::Normal),
            "Opening 3" => Ok(Self::Opening3),
            "Opening 2" => Ok(Self::Opening2),
            "Opening 1" => Ok(Self::Opening1),
            "Lockdown" => Ok(Self::Lockdown),
            other => Err(TableError::UnknownStage(other.to_string())),
        }
    }

    /// Ordinal severity level, 0 (Normal) through 4 (Lockdown).
    pub fn level(self) -> i64 {
        match self {
            Self::Normal => 0,
            Self::Opening3 => 1,
            Self::Opening2 => 2,
            Self::Opening1 => 3,
            Self::Lockdown => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Normal => "Normal",
            Self::Opening3 => "Opening 3",
            Self::Opening2 => "Opening 2",
            Self::Opening1 => "Opening 1",
            Self::Lockdown => "Lockdown",
        }
    }
}

/// Maps stage names to their ordinal levels.
pub fn encode_restrictions<S: AsRef<str>>(stage_names: &[S]) -> Result<Vec<i64>, TableError> {
    stage_names
        .iter()
        .map(|s| RestrictionStage::from_name(s.as_ref()).map(RestrictionStage::level))
        .collect()
}

/// Errors from table construction and transformation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TableError {
    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),
    #[error("gap in dates: {0} is missing")]
    DateGap(NaiveDate),
    #[error("cannot parse cell at row {row}, column {column:?}: {cell:?}")]
    ParseError {
        row: usize,
        column: String,
        cell: String,
    },
    #[error("missing value in target variable {variable:?} on {date}")]
    MissingTarget { variable: String, date: NaiveDate },
    #[error("all variables were dropped")]
    EmptyTable,
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("unknown restriction stage {0:?}")]
    UnknownStage(String),
    #[error("table too short: {got} records, need at least {need}")]
    TooShort { got: usize, need: usize },
    #[error("variable {variable:?} is missing on {date} but must be fully present")]
    MissingValue { variable: String, date: NaiveDate },
    #[error("variable {0:?} has no present values to interpolate from")]
    AllMissing(String),
    #[error("duplicate variable name {0:?}")]
    DuplicateVariable(String),
    #[error("value {value} of {variable:?} on {date} outside the valid range for unit {unit:?}")]
    OutOfRange {
        variable: String,
        date: NaiveDate,
        value: f64,
        unit: String,
    },
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("date column {0:?} not found in header")]
    MissingDateColumn(String),
}

/// Ordered daily records of named numeric variables with missing-value slots.
///
/// Invariants: dates are consecutive (stored as a start date plus offset),
/// every variable has one slot per record, and there is at least one record.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesTable {
    start_date: NaiveDate,
    variables: Vec<VariableMeta>,
    /// Column-major values: `columns[v][d]`.
    columns: Vec<Vec<Option<f64>>>,
}

impl TimeSeriesTable {
    /// Builds a table from column-major data, recomputing missing fractions
    /// and validating unit ranges.
    pub fn from_columns(
        start_date: NaiveDate,
        variables: Vec<VariableMeta>,
        columns: Vec<Vec<Option<f64>>>,
    ) -> Result<Self, TableError> {
        if variables.len() != columns.len() {
            return Err(TableError::BadParameter(format!(
                "{} variable metas for {} columns",
                variables.len(),
                columns.len()
            )));
        }
        if columns.is_empty() {
            return Err(TableError::EmptyTable);
        }
        let len = columns[0].len();
        if len == 0 {
            return Err(TableError::TooShort { got: 0, need: 1 });
        }
        for (meta, col) in variables.iter().zip(&columns) {
            if col.len() != len {
                return Err(TableError::BadParameter(format!(
                    "column {:?} has {} values, expected {}",
                    meta.name,
                    col.len(),
                    len
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for meta in &variables {
            if !seen.insert(meta.name.clone()) {
                return Err(TableError::DuplicateVariable(meta.name.clone()));
            }
        }
        let mut table = Self {
            start_date,
            variables,
            columns,
        };
        table.recompute_missing_fractions();
        table.validate_ranges()?;
        Ok(table)
    }

    fn recompute_missing_fractions(&mut self) {
        let len = self.len() as f64;
        for (meta, col) in self.variables.iter_mut().zip(&self.columns) {
            let missing = col.iter().filter(|v| v.is_none()).count();
            meta.missing_fraction = missing as f64 / len;
        }
    }

    fn validate_ranges(&self) -> Result<(), TableError> {
        for (meta, col) in self.variables.iter().zip(&self.columns) {
            let bounds: Option<(f64, f64)> = match meta.unit.as_str() {
                "%" => Some((0.0, 100.0)),
                "counts" => Some((0.0, f64::INFINITY)),
                _ => None,
            };
            if let Some((lo, hi)) = bounds {
                for (d, v) in col.iter().enumerate() {
                    if let Some(x) = v {
                        if !x.is_finite() || *x < lo || *x > hi {
                            return Err(TableError::OutOfRange {
                                variable: meta.name.clone(),
                                date: self.date_at(d),
                                value: *x,
                                unit: meta.unit.clone(),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Number of daily records.
    pub fn len(&self) -> usize {
        self.columns[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false // at least one record by construction
    }

    pub fn start_date(&self) -> NaiveDate {
        self.start_date
    }

    pub fn end_date(&self) -> NaiveDate {
        self.date_at(self.len() - 1)
    }

    /// Date of record `i`.
    pub fn date_at(&self, i: usize) -> NaiveDate {
        self.start_date + chrono::Duration::days(i as i64)
    }

    /// Record index for `date`, if it falls inside the table.
    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        let off = (date - self.start_date).num_days();
        if off >= 0 && (off as usize) < self.len() {
            Some(off as usize)
        } else {
            None
        }
    }

    pub fn variables(&self) -> &[VariableMeta] {
        &self.variables
    }

    pub fn variable_names(&self) -> Vec<&str> {
        self.variables.iter().map(|m| m.name.as_str()).collect()
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|m| m.name == name)
    }

    pub fn meta(&self, name: &str) -> Result<&VariableMeta, TableError> {
        let idx = self
            .variable_index(name)
            .ok_or_else(|| TableError::UnknownVariable(name.to_string()))?;
        Ok(&self.variables[idx])
    }

    /// Raw column including missing slots.
    pub fn column(&self, name: &str) -> Result<&[Option<f64>], TableError> {
        let idx = self
            .variable_index(name)
            .ok_or_else(|| TableError::UnknownVariable(name.to_string()))?;
        Ok(&self.columns[idx])
    }

    /// Fully-present column values; errors on the first missing slot.
    pub fn column_values(&self, name: &str) -> Result<Vec<f64>, TableError> {
        let col = self.column(name)?;
        col.iter()
            .enumerate()
            .map(|(d, v)| {
                v.ok_or_else(|| TableError::MissingValue {
                    variable: name.to_string(),
                    date: self.date_at(d),
                })
            })
            .collect()
    }

    /// Value of `name` on record `i` (None when missing).
    pub fn value(&self, i: usize, name: &str) -> Result<Option<f64>, TableError> {
        Ok(self.column(name)?[i])
    }

    /// Returns a copy with `name`'s role changed.
    pub fn with_role(mut self, name: &str, role: VariableRole) -> Result<Self, TableError> {
        let idx = self
            .variable_index(name)
            .ok_or_else(|| TableError::UnknownVariable(name.to_string()))?;
        self.variables[idx].role = role;
        Ok(self)
    }

    /// Returns a copy with `name`'s unit changed, re-validating ranges.
    pub fn with_unit(mut self, name: &str, unit: &str) -> Result<Self, TableError> {
        let idx = self
            .variable_index(name)
            .ok_or_else(|| TableError::UnknownVariable(name.to_string()))?;
        self.variables[idx].unit = unit.to_string();
        self.validate_ranges()?;
        Ok(self)
    }

    /// Applies units and roles from sidecar metadata, matching by name.
    /// Unknown names are ignored; missing fractions are kept as computed.
    pub fn apply_metadata(mut self, metas: &[VariableMeta]) -> Result<Self, TableError> {
        for m in metas {
            if let Some(idx) = self.variable_index(&m.name) {
                self.variables[idx].unit = m.unit.clone();
                self.variables[idx].role = m.role;
            }
        }
        self.validate_ranges()?;
        Ok(self)
    }

    /// Serializes to the CSV dialect accepted by [`parse_table`]: a `date`
    /// column of ISO dates, then one numeric column per variable, empty cell
    /// for missing. Values round-trip bit-exactly.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("date");
        for meta in &self.variables {
            out.push(',');
            out.push_str(&meta.name);
        }
        out.push('\n');
        for d in 0..self.len() {
            out.push_str(&self.date_at(d).format("%Y-%m-%d").to_string());
            for col in &self.columns {
                out.push(',');
                if let Some(v) = col[d] {
                    out.push_str(&format_value(v));
                }
            }
            out.push('\n');
        }
        out
    }

    /// Variable metadata as a JSON array (the CSV sidecar format).
    pub fn metadata_json(&self) -> String {
        serde_json::to_string_pretty(&self.variables).expect("metadata serializes")
    }
}

/// Formats a value so that parsing it back recovers the identical f64.
fn format_value(v: f64) -> String {
    format!("{v}")
}

/// Parses CSV text into a table.
///
/// The header row must contain `date_column` with ISO-8601 dates; all other
/// columns are numeric with empty cells treated as missing. Rows may arrive
/// unordered; the result is sorted by date. Duplicate or non-consecutive
/// dates are rejected.
pub fn parse_table(csv_text: &str, date_column: &str) -> Result<TimeSeriesTable, TableError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|_| TableError::BadParameter("unreadable header row".into()))?
        .iter()
        .map(|h| h.to_string())
        .collect();
    let date_idx = headers
        .iter()
        .position(|h| h == date_column)
        .ok_or_else(|| TableError::MissingDateColumn(date_column.to_string()))?;
    let var_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != date_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut rows: BTreeMap<NaiveDate, Vec<Option<f64>>> = BTreeMap::new();
    for (row_no, record) in reader.records().enumerate() {
        let row = row_no + 1; // 1-based data row for diagnostics
        let record = record.map_err(|_| TableError::ParseError {
            row,
            column: String::new(),
            cell: String::new(),
        })?;
        let raw_date = record.get(date_idx).unwrap_or("");
        let date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d").map_err(|_| {
            TableError::ParseError {
                row,
                column: date_column.to_string(),
                cell: raw_date.to_string(),
            }
        })?;
        let mut values = Vec::with_capacity(var_names.len());
        for (i, header) in headers.iter().enumerate() {
            if i == date_idx {
                continue;
            }
            let cell = record.get(i).unwrap_or("");
            if cell.is_empty() {
                values.push(None);
            } else {
                let v: f64 = cell.parse().map_err(|_| TableError::ParseError {
                    row,
                    column: header.clone(),
                    cell: cell.to_string(),
                })?;
                values.push(Some(v));
            }
        }
        if rows.insert(date, values).is_some() {
            return Err(TableError::DuplicateDate(date));
        }
    }
    if rows.is_empty() {
        return Err(TableError::TooShort { got: 0, need: 1 });
    }

    let start = *rows.keys().next().unwrap();
    for (i, date) in rows.keys().enumerate() {
        let expected = start + chrono::Duration::days(i as i64);
        if *date != expected {
            return Err(TableError::DateGap(expected));
        }
    }

    let variables = var_names
        .into_iter()
        .map(|name| VariableMeta {
            name,
            unit: String::new(),
            role: VariableRole::Driver,
            missing_fraction: 0.0,
        })
        .collect::<Vec<_>>();
    let mut columns = vec![Vec::with_capacity(rows.len()); variables.len()];
    for values in rows.values() {
        for (v, col) in values.iter().zip(columns.iter_mut()) {
            col.push(*v);
        }
    }
    TimeSeriesTable::from_columns(start, variables, columns)
}

/// Drops variables with more than `max_missing` missing fraction and fills
/// the remaining stray gaps by linear interpolation between nearest present
/// neighbors (endpoints take the nearest present value). Target variables are
/// never interpolated; a missing target is an error.
pub fn clean_table(table: &TimeSeriesTable, max_missing: f64) -> Result<TimeSeriesTable, TableError> {
    if !(0.0..=1.0).contains(&max_missing) {
        return Err(TableError::BadParameter(format!(
            "max_missing {max_missing} outside [0, 1]"
        )));
    }
    let mut variables = Vec::new();
    let mut columns = Vec::new();
    for (meta, col) in table.variables.iter().zip(&table.columns) {
        if meta.missing_fraction > max_missing {
            continue;
        }
        let filled = if meta.role == VariableRole::Target {
            if let Some(d) = col.iter().position(|v| v.is_none()) {
                return Err(TableError::MissingTarget {
                    variable: meta.name.clone(),
                    date: table.date_at(d),
                });
            }
            col.clone()
        } else {
            interpolate(col).ok_or_else(|| TableError::AllMissing(meta.name.clone()))?
        };
        variables.push(meta.clone());
        columns.push(filled);
    }
    if variables.is_empty() {
        return Err(TableError::EmptyTable);
    }
    TimeSeriesTable::from_columns(table.start_date, variables, columns)
}

/// Linear interpolation over missing runs; None when nothing is present.
fn interpolate(col: &[Option<f64>]) -> Option<Vec<Option<f64>>> {
    let present: Vec<usize> = col
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|_| i))
        .collect();
    if present.is_empty() {
        return None;
    }
    let mut out = col.to_vec();
    for i in 0..out.len() {
        if out[i].is_some() {
            continue;
        }
        let after = present.iter().copied().find(|&p| p > i);
        let before = present.iter().copied().rev().find(|&p| p < i);
        let v = match (before, after) {
            (Some(b), Some(a)) => {
                let vb = col[b].unwrap();
                let va = col[a].unwrap();
                vb + (va - vb) * ((i - b) as f64) / ((a - b) as f64)
            }
            (Some(b), None) => col[b].unwrap(),
            (None, Some(a)) => col[a].unwrap(),
            (None, None) => unreachable!("present is non-empty"),
        };
        out[i] = Some(v);
    }
    Some(out)
}

/// Appends a derived variable holding the trailing mean of the last `width`
/// values of `variable` ending at each day; the first `width - 1` days
/// average over the available prefix only. The source table is unmodified.
///
/// The new column is named `{variable}_avg{width}` with role
/// [`VariableRole::Derived`] and the source's unit.
pub fn rolling_average(
    table: &TimeSeriesTable,
    variable: &str,
    width: usize,
) -> Result<TimeSeriesTable, TableError> {
    if width == 0 {
        return Err(TableError::BadParameter("width must be >= 1".into()));
    }
    let source = table.column_values(variable)?;
    let out_name = format!("{variable}_avg{width}");
    if table.variable_index(&out_name).is_some() {
        return Err(TableError::DuplicateVariable(out_name));
    }
    let mut derived = Vec::with_capacity(source.len());
    let mut window_sum = 0.0;
    for d in 0..source.len() {
        window_sum += source[d];
        if d >= width {
            window_sum -= source[d - width];
        }
        let n = (d + 1).min(width);
        derived.push(Some(window_sum / n as f64));
    }
    let mut variables = table.variables.clone();
    let unit = table.meta(variable)?.unit.clone();
    variables.push(VariableMeta {
        name: out_name,
        unit,
        role: VariableRole::Derived,
        missing_fraction: 0.0,
    });
    let mut columns = table.columns.clone();
    columns.push(derived);
    TimeSeriesTable::from_columns(table.start_date, variables, columns)
}

impl fmt::Display for TimeSeriesTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} records {}..{}, {} variables",
            self.len(),
            self.start_date,
            self.end_date(),
            self.variables.len()
        )
    }
}
