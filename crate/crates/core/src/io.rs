//! CSV and partition-JSON persistence.
//!
//! CSV files have a mandatory header, comma separators and `.` decimals.
//! Numbers are written with 17 significant digits so that a reload is
//! bit-identical. Every write goes to a temporary sibling file that is
//! renamed into place.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::{DeserializeOwned, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::reducer::{FittedReducer, Partition, ReducerConfig};
use crate::scalar::Scalar;
use crate::stats::{Dataset, StandardizationState};
use crate::{Error, Result};

/// `%.17g`-style rendering: shortest of fixed or exponent form, trailing
/// zeros removed.
pub fn format_number<T: Scalar>(x: T) -> String {
    let v = x.as_f64();
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0');
    t.strip_suffix('.').unwrap_or(t).to_string()
}

/// Write `bytes` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::InvalidInput(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        file_name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

/// Write a header and string rows as CSV, atomically.
pub fn write_table<S: AsRef<str>>(path: &Path, header: &[S], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(header.iter().map(|h| h.as_ref()))?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    write_atomic(path, &bytes)
}

fn parse_cell<T: Scalar>(raw: &str, row: usize, column: usize) -> Result<T> {
    let s = raw.trim();
    let v: f64 = s.parse().map_err(|_| Error::Parse {
        row,
        column,
        message: format!("`{s}` is not a decimal number"),
    })?;
    if !v.is_finite() {
        return Err(Error::NonFiniteCell { row, column });
    }
    Ok(T::lit(v))
}

/// Read every column of a CSV file. Rows and columns in error messages are
/// 1-based, counting the header as row 1.
pub fn load_table<T: Scalar>(path: &Path) -> Result<(Vec<String>, Vec<Vec<T>>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let mut columns: Vec<Vec<T>> = vec![Vec::new(); header.len()];
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = r + 2;
        for (c, raw) in rec.iter().enumerate() {
            columns[c].push(parse_cell(raw, row, c + 1)?);
        }
    }
    Ok((header, columns))
}

/// Load features and a named target.
pub fn load_csv<T: Scalar>(path: &Path, target: &str) -> Result<(Dataset<T>, Vec<T>)> {
    let (mut names, mut columns) = load_table::<T>(path)?;
    let t = names
        .iter()
        .position(|n| n == target)
        .ok_or_else(|| Error::MissingTarget(target.to_string()))?;
    names.remove(t);
    let y = columns.remove(t);
    Ok((Dataset::from_columns(names, columns)?, y))
}

/// Load a feature-only file.
pub fn load_features<T: Scalar>(path: &Path) -> Result<Dataset<T>> {
    let (names, columns) = load_table::<T>(path)?;
    Dataset::from_columns(names, columns)
}

/// Load features, dropping `target` if present.
pub fn load_features_without<T: Scalar>(path: &Path, target: Option<&str>) -> Result<Dataset<T>> {
    let (mut names, mut columns) = load_table::<T>(path)?;
    if let Some(t) = target.and_then(|t| names.iter().position(|n| n == t)) {
        names.remove(t);
        columns.remove(t);
    }
    Dataset::from_columns(names, columns)
}

pub fn save_csv<T: Scalar>(path: &Path, d: &Dataset<T>) -> Result<()> {
    save_csv_with_target(path, d, None)
}

/// Save features, optionally followed by a target column.
pub fn save_csv_with_target<T: Scalar>(path: &Path, d: &Dataset<T>, target: Option<(&str, &[T])>) -> Result<()> {
    let mut header: Vec<String> = d.names().to_vec();
    if let Some((name, y)) = target {
        if y.len() != d.n() {
            return Err(Error::LengthMismatch {
                left: d.n(),
                right: y.len(),
            });
        }
        header.push(name.to_string());
    }
    let rows: Vec<Vec<String>> = (0..d.n())
        .map(|r| {
            let mut row: Vec<String> = (0..d.dim()).map(|c| format_number(d.get(r, c))).collect();
            if let Some((_, y)) = target {
                row.push(format_number(y[r]));
            }
            row
        })
        .collect();
    write_table(path, &header, &rows)
}

// ---- partition document -------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDoc {
    pub name: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnScale<T> {
    pub mean: T,
    pub std: T,
}

/// Column-ordered map from name to scale; serialized as a JSON object
/// whose key order is the source column order.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedScales<T>(pub Vec<(String, ColumnScale<T>)>);

impl<T: Serialize> Serialize for OrderedScales<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for OrderedScales<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V<T>(std::marker::PhantomData<T>);
        impl<'de, T: Deserialize<'de>> Visitor<'de> for V<T> {
            type Value = OrderedScales<T>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from column name to {mean, std}")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut a: A) -> std::result::Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = a.next_entry::<String, ColumnScale<T>>()? {
                    out.push((k, v));
                }
                Ok(OrderedScales(out))
            }
        }
        d.deserialize_map(V(std::marker::PhantomData))
    }
}

/// On-disk form of a fitted reducer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionDocument<T> {
    pub groups: Vec<GroupDoc>,
    pub standardization: OrderedScales<T>,
    pub config: ReducerConfig<T>,
}

impl<T: Scalar> PartitionDocument<T> {
    pub fn from_fitted(r: &FittedReducer<T>, config: &ReducerConfig<T>) -> Self {
        let p = &r.partition;
        let groups = (0..p.d())
            .map(|k| GroupDoc {
                name: p.group_name(k),
                members: p.groups[k].iter().map(|&i| p.source_columns[i].clone()).collect(),
            })
            .collect();
        let st = &r.standardization;
        let scales = st
            .names
            .iter()
            .zip(st.means.iter().zip(&st.stds))
            .map(|(n, (&mean, &std))| (n.clone(), ColumnScale { mean, std }))
            .collect();
        Self {
            groups,
            standardization: OrderedScales(scales),
            config: config.clone(),
        }
    }

    /// Rebuild the reducer; pair decisions are not stored and come back
    /// empty.
    pub fn to_fitted(&self) -> Result<FittedReducer<T>> {
        let names: Vec<String> = self.standardization.0.iter().map(|(n, _)| n.clone()).collect();
        let mut groups = Vec::with_capacity(self.groups.len());
        for g in &self.groups {
            let idx = g
                .members
                .iter()
                .map(|m| {
                    names.iter().position(|n| n == m).ok_or_else(|| {
                        Error::InvalidInput(format!("group member `{m}` has no standardization entry"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            groups.push(idx);
        }
        let partition = Partition {
            groups,
            source_columns: names.clone(),
        };
        partition.validate()?;
        for (n, s) in &self.standardization.0 {
            if !(s.std > T::zero()) || !s.mean.is_finite() || !s.std.is_finite() {
                return Err(Error::InvalidInput(format!("invalid scale for column `{n}`")));
            }
        }
        Ok(FittedReducer {
            partition,
            standardization: StandardizationState {
                names,
                means: self.standardization.0.iter().map(|(_, s)| s.mean).collect(),
                stds: self.standardization.0.iter().map(|(_, s)| s.std).collect(),
            },
            decisions: Vec::new(),
        })
    }
}

pub fn save_partition<T: Scalar + Serialize>(path: &Path, doc: &PartitionDocument<T>) -> Result<()> {
    let mut s = serde_json::to_string_pretty(doc)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub fn load_partition<T: Scalar + DeserializeOwned>(path: &Path) -> Result<PartitionDocument<T>> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
