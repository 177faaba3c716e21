//! Feature matrices on disk: a CSV of `label,path,f0,f1,...` rows and a JSON
//! layout manifest naming the `(rule, k, memory, bin)` of every column.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{DescriptorConfig, FeatureColumn};
use crate::error::{Error, Result};
use crate::eval::LabeledDataset;
use crate::fsutil;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    /// Extraction settings; absent for matrices assembled by column
    /// selection from a larger one.
    pub config: Option<DescriptorConfig>,
    pub columns: Vec<FeatureColumn>,
}

impl Layout {
    pub fn from_config(config: &DescriptorConfig) -> Self {
        Layout {
            config: Some(config.clone()),
            columns: config.layout(),
        }
    }

    /// `features.csv` -> `features.layout.json`
    pub fn path_for(features: &Path) -> PathBuf {
        features.with_extension("layout.json")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_vec_pretty(self)?;
        fsutil::write_atomic(path, |w| {
            w.write_all(&json)?;
            w.write_all(b"\n")
        })?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        Ok(serde_json::from_reader(io::BufReader::new(file))?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub label: String,
    pub path: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub layout: Option<Layout>,
    pub dimension: usize,
    pub rows: Vec<FeatureRow>,
}

impl FeatureMatrix {
    pub fn new(layout: Layout, rows: Vec<FeatureRow>) -> Result<Self> {
        let dimension = layout.columns.len();
        if let Some(bad) = rows.iter().find(|r| r.values.len() != dimension) {
            return Err(Error::invalid(format!(
                "row {} has {} features, layout has {dimension}",
                bad.path,
                bad.values.len()
            )));
        }
        Ok(FeatureMatrix {
            layout: Some(layout),
            dimension,
            rows,
        })
    }

    pub fn columns(&self) -> Option<&[FeatureColumn]> {
        self.layout.as_ref().map(|l| l.columns.as_slice())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let mut header = vec!["label".to_string(), "path".to_string()];
        header.extend((0..self.dimension).map(|i| format!("f{i}")));
        w.write_record(&header).map_err(csv_io)?;
        let mut record = Vec::with_capacity(self.dimension + 2);
        for row in &self.rows {
            record.clear();
            record.push(row.label.clone());
            record.push(row.path.clone());
            // Display for f64 is locale-free and round-trips exactly
            record.extend(row.values.iter().map(|v| v.to_string()));
            w.write_record(&record).map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(input);
        let header = rdr.headers().map_err(|e| csv_parse(e, 1))?.clone();
        if header.len() < 2 || &header[0] != "label" || &header[1] != "path" {
            return Err(Error::Parse {
                line: 1,
                message: "header must start with label,path".into(),
            });
        }
        let dimension = header.len() - 2;
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let fallback = i + 2;
            let rec = rec.map_err(|e| csv_parse(e, fallback))?;
            let line = rec
                .position()
                .map(|p| p.line() as usize)
                .unwrap_or(fallback);
            if rec.len() != header.len() {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} fields, found {}", header.len(), rec.len()),
                });
            }
            let values = rec
                .iter()
                .skip(2)
                .enumerate()
                .map(|(j, s)| match s.trim().parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(Error::Parse {
                        line,
                        message: format!("column f{j}: {s:?} is not a finite number"),
                    }),
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(FeatureRow {
                label: rec[0].to_string(),
                path: rec[1].to_string(),
                values,
            });
        }
        Ok(FeatureMatrix {
            layout: None,
            dimension,
            rows,
        })
    }

    /// Writes the CSV at `path` and its layout next to it.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut csv_bytes = Vec::new();
        self.write_csv(&mut csv_bytes)?;
        fsutil::write_atomic(path, |w| w.write_all(&csv_bytes))?;
        if let Some(layout) = &self.layout {
            layout.save(&Layout::path_for(path))?;
        }
        Ok(())
    }

    /// Reads the CSV at `path`, picking up the sibling layout when present.
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::Ingestion {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        let mut m = Self::read_csv(io::BufReader::new(file))?;
        let layout_path = Layout::path_for(path);
        if layout_path.exists() {
            let layout = Layout::load(&layout_path)?;
            if layout.columns.len() != m.dimension {
                return Err(Error::invalid(format!(
                    "{} lists {} columns but {} has {}",
                    layout_path.display(),
                    layout.columns.len(),
                    path.display(),
                    m.dimension
                )));
            }
            m.layout = Some(layout);
        }
        Ok(m)
    }

    /// Keeps the columns accepted by `keep`, in their current order.
    pub fn select(&self, keep: impl Fn(&FeatureColumn) -> bool) -> Result<FeatureMatrix> {
        let columns = self
            .columns()
            .ok_or_else(|| Error::invalid("column selection needs a layout"))?;
        let idx: Vec<usize> = (0..columns.len()).filter(|&i| keep(&columns[i])).collect();
        let layout = Layout {
            config: None,
            columns: idx.iter().map(|&i| columns[i]).collect(),
        };
        let rows = self
            .rows
            .iter()
            .map(|r| FeatureRow {
                label: r.label.clone(),
                path: r.path.clone(),
                values: idx.iter().map(|&i| r.values[i]).collect(),
            })
            .collect();
        FeatureMatrix::new(layout, rows)
    }

    /// Labeled dataset with class ids assigned in sorted label order.
    pub fn to_dataset(&self) -> Result<LabeledDataset> {
        let mut names: Vec<String> = self.rows.iter().map(|r| r.label.clone()).collect();
        names.sort();
        names.dedup();
        let labels = self
            .rows
            .iter()
            .map(|r| {
                names
                    .binary_search(&r.label)
                    .expect("label collected above")
            })
            .collect();
        let features = self.rows.iter().map(|r| r.values.clone()).collect();
        LabeledDataset::new(features, labels, names)
    }
}

fn csv_io(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::Io(io::Error::other(format!("{other:?}"))),
    }
}

fn csv_parse(e: csv::Error, fallback_line: usize) -> Error {
    let line = e
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or(fallback_line);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}
