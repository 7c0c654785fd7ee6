use crate::error::{Error, Result};

use super::FeatureName;

/// One row per document, with the document id as the first CSV column.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub ids: Vec<String>,
    pub names: Vec<FeatureName>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    /// Header `id,<feature names...>`; values use the shortest
    /// representation that parses back to the same `f64`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["id".to_string()];
        header.extend(self.names.iter().map(ToString::to_string));
        w.write_record(&header).expect("in-memory write");
        for (id, row) in self.ids.iter().zip(&self.rows) {
            let mut rec = vec![id.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }
}

pub fn parse_matrix_csv(input: &str) -> Result<FeatureMatrix> {
    let bad = |line: usize, m: String| Error::Features(format!("matrix line {line}: {m}"));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(input.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| bad(1, e.to_string()))?,
        None => return Err(bad(1, "missing header".into())),
    };
    if header.get(0) != Some("id") {
        return Err(bad(1, "first column must be id".into()));
    }
    let names = header
        .iter()
        .skip(1)
        .map(str::parse)
        .collect::<Result<Vec<FeatureName>>>()?;
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    for (i, rec) in records.enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| bad(line, e.to_string()))?;
        if rec.len() != names.len() + 1 {
            return Err(bad(line, format!("expected {} fields, got {}", names.len() + 1, rec.len())));
        }
        ids.push(rec[0].to_string());
        rows.push(
            rec.iter()
                .skip(1)
                .map(|v| v.parse::<f64>().map_err(|e| bad(line, format!("{v:?}: {e}"))))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    Ok(FeatureMatrix { ids, names, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_is_exact() {
        let m = FeatureMatrix {
            ids: vec!["a,1".into(), "b".into()],
            names: vec!["T:fres".parse().unwrap(), "SE:oov_count".parse().unwrap()],
            rows: vec![vec![0.1 + 0.2, -1e-300], vec![std::f64::consts::PI, 3.0]],
        };
        assert_eq!(parse_matrix_csv(&m.to_csv()).unwrap(), m);
    }

    #[test]
    fn malformed_matrix() {
        assert!(parse_matrix_csv("").is_err());
        assert!(parse_matrix_csv("name,T:fres\n").is_err());
        assert!(parse_matrix_csv("id,T:fres\na,1,2\n").is_err());
        assert!(parse_matrix_csv("id,T:fres\na,x\n").is_err());
    }
}
