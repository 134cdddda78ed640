//! Supervised-learning views of a table: sliding windows of input days with
//! forecast targets, in sequence or flattened layout, plus per-variable
//! normalization fitted strictly on a training span.

use crate::table::{TableError, TimeSeriesTable};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::ops::Range;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WindowError {
    #[error("table too short: {len} records cannot fit window {window} + horizon {horizon}")]
    TooShort {
        len: usize,
        window: usize,
        horizon: usize,
    },
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("variable {0:?} has zero variance over the training span")]
    ZeroVariance(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("span {start}..{end} is empty or outside the {len} samples")]
    BadSpan { start: usize, end: usize, len: usize },
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Table(#[from] TableError),
}

/// Arrangement of each sample's inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// Window-by-variable matrix, one row per day (recurrent models).
    Sequence,
    /// Day-major concatenation into one row of `window * variables` columns.
    Flat,
}

/// One supervised sample: `window * variables` inputs in day-major order and
/// `horizon` raw target values. The anchor is day D0, the last input day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub anchor_date: NaiveDate,
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
}

/// Windowed dataset. Sequence and flat layouts hold identical numbers; the
/// layout tag records how models should interpret each sample's inputs, and
/// `column_names` labels flat columns with day offsets (`D-13|temp` ...
/// `D-0|temp`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupervisedDataset {
    pub layout: Layout,
    pub window: usize,
    pub horizon: usize,
    pub input_variables: Vec<String>,
    pub target_variable: String,
    pub column_names: Vec<String>,
    pub samples: Vec<Sample>,
}

impl SupervisedDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn input_width(&self) -> usize {
        self.window * self.input_variables.len()
    }

    /// Input value for (day offset from window start, variable index).
    pub fn input_at(&self, sample: usize, day: usize, var: usize) -> f64 {
        self.samples[sample].inputs[day * self.input_variables.len() + var]
    }

    /// Re-labels a flat dataset as sequence layout (or vice versa). The
    /// numbers are identical in both layouts, so this only rewrites the tags.
    pub fn with_layout(&self, layout: Layout) -> SupervisedDataset {
        let mut out = self.clone();
        out.layout = layout;
        out.column_names = column_names(layout, self.window, &self.input_variables);
        out
    }

    /// Flat CSV export with day-offset column headers and one row per sample.
    pub fn to_flat_csv(&self) -> String {
        let names = column_names(Layout::Flat, self.window, &self.input_variables);
        let mut out = String::from("anchor_date");
        for n in &names {
            out.push(',');
            out.push_str(n);
        }
        for h in 1..=self.horizon {
            out.push_str(&format!(",D+{h}|{}", self.target_variable));
        }
        out.push('\n');
        for s in &self.samples {
            out.push_str(&s.anchor_date.format("%Y-%m-%d").to_string());
            for v in &s.inputs {
                out.push_str(&format!(",{v}"));
            }
            for t in &s.targets {
                out.push_str(&format!(",{t}"));
            }
            out.push('\n');
        }
        out
    }

    /// JSON manifest describing the dataset shape (the export header).
    pub fn manifest_json(&self) -> String {
        #[derive(Serialize)]
        struct Manifest<'a> {
            format_version: u32,
            layout: Layout,
            window: usize,
            horizon: usize,
            input_variables: &'a [String],
            target_variable: &'a str,
            samples: usize,
            first_anchor: Option<NaiveDate>,
            last_anchor: Option<NaiveDate>,
        }
        serde_json::to_string_pretty(&Manifest {
            format_version: 1,
            layout: self.layout,
            window: self.window,
            horizon: self.horizon,
            input_variables: &self.input_variables,
            target_variable: &self.target_variable,
            samples: self.samples.len(),
            first_anchor: self.samples.first().map(|s| s.anchor_date),
            last_anchor: self.samples.last().map(|s| s.anchor_date),
        })
        .expect("manifest serializes")
    }
}

fn column_names(layout: Layout, window: usize, variables: &[String]) -> Vec<String> {
    match layout {
        Layout::Sequence => variables.to_vec(),
        Layout::Flat => {
            let mut names = Vec::with_capacity(window * variables.len());
            for day in 0..window {
                let offset = window - 1 - day;
                for v in variables {
                    names.push(format!("D-{offset}|{v}"));
                }
            }
            names
        }
    }
}

/// Builds supervised samples: sample i takes input days [i, i+W) and target
/// days [i+W, i+W+H). Inputs are stored day-major; targets stay raw.
pub fn build_windows(
    table: &TimeSeriesTable,
    inputs: &[&str],
    target: &str,
    window: usize,
    horizon: usize,
    layout: Layout,
) -> Result<SupervisedDataset, WindowError> {
    if window == 0 || horizon == 0 {
        return Err(WindowError::BadParameter(
            "window and horizon must be >= 1".into(),
        ));
    }
    if inputs.is_empty() {
        return Err(WindowError::BadParameter("no input variables".into()));
    }
    let len = table.len();
    if window + horizon > len {
        return Err(WindowError::TooShort {
            len,
            window,
            horizon,
        });
    }
    let mut input_cols = Vec::with_capacity(inputs.len());
    for name in inputs {
        if table.variable_index(name).is_none() {
            return Err(WindowError::UnknownVariable(name.to_string()));
        }
        input_cols.push(table.column_values(name)?);
    }
    let target_col = table
        .column_values(target)
        .map_err(|e| match e {
            TableError::UnknownVariable(v) => WindowError::UnknownVariable(v),
            other => WindowError::Table(other),
        })?;

    let count = len - window - horizon + 1;
    let mut samples = Vec::with_capacity(count);
    for i in 0..count {
        let mut sample_inputs = Vec::with_capacity(window * inputs.len());
        for day in i..i + window {
            for col in &input_cols {
                sample_inputs.push(col[day]);
            }
        }
        let targets = target_col[i + window..i + window + horizon].to_vec();
        samples.push(Sample {
            anchor_date: table.date_at(i + window - 1),
            inputs: sample_inputs,
            targets,
        });
    }
    let input_variables: Vec<String> = inputs.iter().map(|s| s.to_string()).collect();
    Ok(SupervisedDataset {
        layout,
        window,
        horizon,
        column_names: column_names(layout, window, &input_variables),
        input_variables,
        target_variable: target.to_string(),
        samples,
    })
}

/// Normalization method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMethod {
    MinMax,
    ZScore,
}

/// Per-variable affine transform `(x - shift) / scale`, fitted on a training
/// span only. A variable's statistics pool every day offset of the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub method: NormMethod,
    pub variables: Vec<String>,
    pub shifts: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Normalizer {
    pub fn apply_value(&self, var: usize, x: f64) -> f64 {
        (x - self.shifts[var]) / self.scales[var]
    }

    pub fn invert_value(&self, var: usize, z: f64) -> f64 {
        z * self.scales[var] + self.shifts[var]
    }

    /// Identity transform over the given variables.
    pub fn identity(variables: &[String]) -> Self {
        Self {
            method: NormMethod::MinMax,
            variables: variables.to_vec(),
            shifts: vec![0.0; variables.len()],
            scales: vec![1.0; variables.len()],
        }
    }
}

/// Fits a normalizer on the inputs of `dataset.samples[train_span]` only.
/// MinMax uses shift=min, scale=max-min; ZScore uses shift=mean,
/// scale=population standard deviation.
pub fn fit_normalizer(
    dataset: &SupervisedDataset,
    train_span: Range<usize>,
    method: NormMethod,
) -> Result<Normalizer, WindowError> {
    if train_span.is_empty() || train_span.end > dataset.len() {
        return Err(WindowError::BadSpan {
            start: train_span.start,
            end: train_span.end,
            len: dataset.len(),
        });
    }
    let n_vars = dataset.input_variables.len();
    let mut shifts = Vec::with_capacity(n_vars);
    let mut scales = Vec::with_capacity(n_vars);
    for var in 0..n_vars {
        let values = dataset.samples[train_span.clone()]
            .iter()
            .flat_map(|s| {
                (0..dataset.window).map(move |day| s.inputs[day * n_vars + var])
            })
            .collect::<Vec<f64>>();
        let (shift, scale) = match method {
            NormMethod::MinMax => {
                let min = values.iter().copied().fold(f64::INFINITY, f64::min);
                let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (min, max - min)
            }
            NormMethod::ZScore => {
                let n = values.len() as f64;
                let mean = values.iter().sum::<f64>() / n;
                let var_ = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                (mean, var_.sqrt())
            }
        };
        if scale <= 0.0 {
            return Err(WindowError::ZeroVariance(
                dataset.input_variables[var].clone(),
            ));
        }
        shifts.push(shift);
        scales.push(scale);
    }
    Ok(Normalizer {
        method,
        variables: dataset.input_variables.clone(),
        shifts,
        scales,
    })
}

/// Applies the normalizer to every sample's inputs; targets are untouched.
pub fn apply_normalizer(
    normalizer: &Normalizer,
    dataset: &SupervisedDataset,
) -> Result<SupervisedDataset, WindowError> {
    if normalizer.variables != dataset.input_variables {
        return Err(WindowError::SchemaMismatch(format!(
            "normalizer fitted on {:?}, dataset has {:?}",
            normalizer.variables, dataset.input_variables
        )));
    }
    let n_vars = dataset.input_variables.len();
    let mut out = dataset.clone();
    for sample in &mut out.samples {
        for (i, x) in sample.inputs.iter_mut().enumerate() {
            *x = normalizer.apply_value(i % n_vars, *x);
        }
    }
    Ok(out)
}

/// Inverse of [`apply_normalizer`], for round-trip checks and reporting.
pub fn invert_normalizer(
    normalizer: &Normalizer,
    dataset: &SupervisedDataset,
) -> Result<SupervisedDataset, WindowError> {
    if normalizer.variables != dataset.input_variables {
        return Err(WindowError::SchemaMismatch(
            "normalizer/dataset variable mismatch".into(),
        ));
    }
    let n_vars = dataset.input_variables.len();
    let mut out = dataset.clone();
    for sample in &mut out.samples {
        for (i, x) in sample.inputs.iter_mut().enumerate() {
            *x = normalizer.invert_value(i % n_vars, *x);
        }
    }
    Ok(out)
}
