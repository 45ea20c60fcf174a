use std::collections::HashMap;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;

use super::schema::{ColumnRole, Feature, FeatureKind, FeatureSchema, SchemaHint};
use crate::error::{Error, Result};
use crate::seed;

/// Marker for a missing value; rows containing it are dropped at load.
pub const MISSING: &str = "?";

/// Encoded tabular data: row-major values plus binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Arc<FeatureSchema>,
    values: Vec<f64>,
    labels: Vec<u8>,
}

impl Dataset {
    pub fn new(schema: Arc<FeatureSchema>, rows: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<Self> {
        let d = schema.n_features();
        if rows.len() != labels.len() {
            return Err(Error::Schema(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let mut values = Vec::with_capacity(rows.len() * d);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::Schema(format!("row {i} has {} values, expected {d}", r.len())));
            }
            values.extend_from_slice(r);
        }
        Self::from_flat(schema, values, labels)
    }

    pub fn from_flat(schema: Arc<FeatureSchema>, values: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        let d = schema.n_features();
        if d == 0 && !labels.is_empty() {
            return Err(Error::Schema("dataset has no features".into()));
        }
        if values.len() != labels.len() * d {
            return Err(Error::Schema("value buffer does not match row count".into()));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::Schema(format!("label {bad} is not binary")));
        }
        for (j, f) in schema.features().iter().enumerate() {
            if f.is_categorical() {
                let card = f.cardinality() as f64;
                if let Some(v) = values
                    .iter()
                    .skip(j)
                    .step_by(d)
                    .find(|&&v| v < 0.0 || v >= card || v.fract() != 0.0)
                {
                    return Err(Error::Schema(format!(
                        "feature `{}` has code {v} outside [0, {card})",
                        f.name
                    )));
                }
            }
        }
        Ok(Dataset { schema, values, labels })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn schema_arc(&self) -> &Arc<FeatureSchema> {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.schema.n_features()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.n_features();
        &self.values[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.n_features().max(1))
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().skip(j).step_by(self.n_features()).copied()
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        [self.labels.len() - ones, ones]
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let d = self.n_features();
        let mut values = Vec::with_capacity(indices.len() * d);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            values.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            schema: Arc::clone(&self.schema),
            values,
            labels,
        }
    }

    /// Keeps only the columns at `keep`, producing a narrower schema.
    pub fn select_columns(&self, keep: &[usize]) -> Dataset {
        let schema = Arc::new(self.schema.project(keep));
        let mut values = Vec::with_capacity(self.n_rows() * keep.len());
        for r in self.rows() {
            values.extend(keep.iter().map(|&j| r[j]));
        }
        Dataset {
            schema,
            values,
            labels: self.labels.clone(),
        }
    }

    /// Appends the rows of `other`, which must share this schema.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if self.schema != other.schema {
            return Err(Error::Schema(
                "cannot concatenate datasets with different schemas".into(),
            ));
        }
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        Ok(Dataset {
            schema: Arc::clone(&self.schema),
            values,
            labels,
        })
    }

    pub(crate) fn push_row(&mut self, row: &[f64], label: u8) {
        debug_assert_eq!(row.len(), self.n_features());
        self.values.extend_from_slice(row);
        self.labels.push(label);
    }

    /// Raw strings of row `i`, features followed by the target.
    pub fn decode_row(&self, i: usize) -> Vec<String> {
        let mut out: Vec<String> = self
            .row(i)
            .iter()
            .enumerate()
            .map(|(j, &v)| self.schema.decode(j, v))
            .collect();
        out.push(self.schema.class_labels()[self.labels[i] as usize].clone());
        out
    }
}

/// Reads a CSV file. See [`load_csv_from_reader`].
pub fn load_csv(path: impl AsRef<Path>, hint: Option<&SchemaHint>) -> Result<Dataset> {
    let file = std::fs::File::open(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
    load_csv_from_reader(file, hint)
}

/// Parses a headered CSV. Categorical columns are label-encoded in order of
/// first appearance; rows holding a `?` field are skipped.
pub fn load_csv_from_reader<R: Read>(reader: R, hint: Option<&SchemaHint>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.len() < 2 {
        return Err(Error::Parse {
            line: 1,
            message: "header needs at least one feature and a target".into(),
        });
    }
    let default_hint = SchemaHint::default();
    let hint = hint.unwrap_or(&default_hint);
    for name in hint.columns.keys() {
        if !header.contains(name) {
            return Err(Error::Schema(format!("schema hint names unknown column `{name}`")));
        }
    }
    let target_col = match hint.target() {
        Some(t) => header.iter().position(|h| h == t).unwrap(),
        None => header.len() - 1,
    };

    let mut records: Vec<(usize, Vec<String>)> = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        // header is line 1
        let line = k + 2;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        if rec.len() != header.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        if rec.iter().any(|f| f == MISSING) {
            continue;
        }
        records.push((line, rec.iter().map(str::to_owned).collect()));
    }

    let feature_cols: Vec<usize> = (0..header.len()).filter(|&c| c != target_col).collect();
    let kinds: Vec<FeatureKind> = feature_cols
        .iter()
        .map(|&c| match hint.columns.get(&header[c]) {
            Some(ColumnRole::Numerical) => Ok(FeatureKind::Numerical),
            Some(ColumnRole::Categorical) => Ok(FeatureKind::Categorical),
            Some(ColumnRole::Target) => Err(Error::Schema(format!("more than one target column (`{}`)", header[c]))),
            None => {
                let numeric = records.iter().all(|(_, r)| r[c].parse::<f64>().is_ok());
                Ok(if numeric {
                    FeatureKind::Numerical
                } else {
                    FeatureKind::Categorical
                })
            }
        })
        .collect::<Result<_>>()?;

    let mut encoders: Vec<HashMap<String, usize>> = vec![HashMap::new(); feature_cols.len()];
    let mut categories: Vec<Vec<String>> = vec![Vec::new(); feature_cols.len()];
    let d = feature_cols.len();
    let mut values = Vec::with_capacity(records.len() * d);
    for (line, rec) in &records {
        for (j, &c) in feature_cols.iter().enumerate() {
            let raw = &rec[c];
            let v = match kinds[j] {
                FeatureKind::Numerical => raw.parse::<f64>().map_err(|_| Error::Parse {
                    line: *line,
                    message: format!("column `{}`: cannot parse `{raw}` as a number", header[c]),
                })?,
                FeatureKind::Categorical => {
                    let next = encoders[j].len();
                    let code = *encoders[j].entry(raw.clone()).or_insert_with(|| {
                        categories[j].push(raw.clone());
                        next
                    });
                    code as f64
                }
            };
            values.push(v);
        }
    }

    let class_labels = target_classes(records.iter().map(|(_, r)| r[target_col].as_str()), hint)?;
    let labels: Vec<u8> = records
        .iter()
        .map(|(_, r)| u8::from(r[target_col] == class_labels[1]))
        .collect();

    let features = feature_cols
        .iter()
        .zip(kinds)
        .zip(categories)
        .map(|((&c, kind), cats)| match kind {
            FeatureKind::Numerical => Feature::numerical(header[c].clone()),
            FeatureKind::Categorical => Feature::categorical(header[c].clone(), cats),
        })
        .collect();
    let schema = FeatureSchema::new(features, header[target_col].clone(), class_labels)?;
    Dataset::from_flat(Arc::new(schema), values, labels)
}

/// Picks the two class strings; index 1 is the positive class. Absent an
/// explicit positive label, `0`/`1` targets map to themselves and otherwise the
/// lexicographically larger value is positive.
fn target_classes<'a>(values: impl Iterator<Item = &'a str>, hint: &SchemaHint) -> Result<[String; 2]> {
    let mut distinct: Vec<&str> = Vec::new();
    for v in values {
        if !distinct.contains(&v) {
            distinct.push(v);
            if distinct.len() > 2 {
                return Err(Error::Schema(format!(
                    "target is not binary: saw `{}`, `{}` and `{}`",
                    distinct[0], distinct[1], distinct[2]
                )));
            }
        }
    }
    if distinct.len() < 2 {
        // Single-class files still load; downstream steps reject them where it matters.
        let only = distinct.first().copied().unwrap_or("1");
        let other = if only == "0" { "1" } else { "0" };
        return Ok(match hint.positive_label.as_deref() {
            Some(p) if p == only => [other.to_owned(), only.to_owned()],
            _ if only == "1" => [other.to_owned(), only.to_owned()],
            _ => [only.to_owned(), format!("not {only}")],
        });
    }
    distinct.sort_unstable();
    match hint.positive_label.as_deref() {
        Some(p) => {
            let pos = distinct
                .iter()
                .position(|&v| v == p)
                .ok_or_else(|| Error::Schema(format!("positive label `{p}` does not occur in the target")))?;
            Ok([distinct[1 - pos].to_owned(), distinct[pos].to_owned()])
        }
        None => Ok([distinct[0].to_owned(), distinct[1].to_owned()]),
    }
}

/// Seeded random partition into `(train, test)` with
/// `|test| = round(test_fraction * N)`. Both parts keep the original row order.
pub fn train_test_split(d: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::argument(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    if d.is_empty() {
        return Err(Error::argument("cannot split an empty dataset"));
    }
    let n = d.n_rows();
    let n_test = (test_fraction * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed));
    let mut test_idx = order[..n_test].to_vec();
    let mut train_idx = order[n_test..].to_vec();
    test_idx.sort_unstable();
    train_idx.sort_unstable();
    Ok((d.subset(&train_idx), d.subset(&test_idx)))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = "x,color,y\n1.5,a,0\n2,b,1\n3,a,1\n";

    #[test]
    fn first_appearance_encoding() {
        let d = load_csv_from_reader(TINY.as_bytes(), None).unwrap();
        assert_eq!(d.column(1).collect::<Vec<_>>(), vec![0.0, 1.0, 0.0]);
        assert_eq!(d.labels(), &[0, 1, 1]);
        assert_eq!(d.schema().feature(0).kind, FeatureKind::Numerical);
        assert_eq!(d.decode_row(1), vec!["2", "b", "1"]);
    }

    #[test]
    fn short_row_is_a_parse_error_at_its_line() {
        let csv = "a,b,c\n1,2,0\n1,2\n";
        match load_csv_from_reader(csv.as_bytes(), None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bad_numeral_names_the_column() {
        let mut hint = SchemaHint::default();
        hint.columns.insert("a".into(), ColumnRole::Numerical);
        let err = load_csv_from_reader("a,b\n1,0\nxx,1\n".as_bytes(), Some(&hint)).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        assert!(err.to_string().contains("`a`"));
    }

    #[test]
    fn non_binary_target_rejected() {
        let err = load_csv_from_reader("a,y\n1,x\n2,y\n3,z\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn missing_rows_dropped() {
        let d = load_csv_from_reader("a,b,y\n1,?,0\n2,u,1\n3,v,0\n".as_bytes(), None).unwrap();
        assert_eq!(d.n_rows(), 2);
        assert_eq!(d.schema().feature(1).categories, vec!["u", "v"]);
    }

    #[test]
    fn positive_label_from_hint() {
        let hint = SchemaHint {
            positive_label: Some("bad".into()),
            ..Default::default()
        };
        let d = load_csv_from_reader("a,y\n1,good\n2,bad\n".as_bytes(), Some(&hint)).unwrap();
        assert_eq!(d.labels(), &[0, 1]);
        let d = load_csv_from_reader("a,y\n1,good\n2,bad\n".as_bytes(), None).unwrap();
        assert_eq!(d.labels(), &[1, 0]);
    }

    #[test]
    fn split_sizes_and_partition() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let schema =
            Arc::new(FeatureSchema::new(vec![Feature::numerical("i")], "y", ["0".into(), "1".into()]).unwrap());
        let d = Dataset::new(schema, rows, vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1]).unwrap();
        let (tr, te) = train_test_split(&d, 0.2, 7).unwrap();
        assert_eq!((tr.n_rows(), te.n_rows()), (8, 2));
        let mut all: Vec<f64> = tr.column(0).chain(te.column(0)).collect();
        all.sort_by(f64::total_cmp);
        assert_eq!(all, (0..10).map(|i| i as f64).collect::<Vec<_>>());
        let (tr2, te2) = train_test_split(&d, 0.2, 7).unwrap();
        assert_eq!((tr, te), (tr2, te2));
        assert!(train_test_split(&d, 1.0, 7).is_err());
        assert!(train_test_split(&d, 0.0, 7).is_err());
    }
}
