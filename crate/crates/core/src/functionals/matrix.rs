use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::audio::{Group, Vowel};
use crate::error::{Error, Result};

const META: [&str; 3] = ["participant_id", "group", "vowel"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub participant_id: String,
    pub group: Group,
    pub vowel: Vowel,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    pub rows: Vec<FeatureVector>,
}

impl FeatureMatrix {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        let want = super::normalize_name(name);
        self.names.iter().position(|n| super::normalize_name(n) == want)
    }

    /// Values of one feature for recordings of `vowel` in `group`.
    pub fn values(&self, column: usize, group: Group, vowel: Vowel) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.group == group && r.vowel == vowel)
            .map(|r| r.values[column])
            .collect()
    }
}

/// Nine significant digits, plain notation where it stays short.
pub fn format_value(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.8e}")
    }
}

pub fn write_matrix<W: Write>(out: W, m: &FeatureMatrix) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(META.iter().copied().chain(m.names.iter().map(String::as_str)))?;
    for r in &m.rows {
        let mut rec = vec![r.participant_id.clone(), r.group.to_string(), r.vowel.to_string()];
        rec.extend(r.values.iter().map(|&v| format_value(v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix<R: Read>(input: R) -> Result<FeatureMatrix> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.len() < 3 || header.iter().take(3).ne(META) {
        return Err(Error::InvalidMatrix(format!(
            "header must start with {}",
            META.join(",")
        )));
    }
    let names: Vec<String> = header.iter().skip(3).map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let bad = |what: String| Error::InvalidMatrix(format!("line {line}: {what}"));
        if rec.len() != header.len() {
            return Err(bad(format!("{} fields, expected {}", rec.len(), header.len())));
        }
        let group: Group = rec[1].parse().map_err(|e| bad(format!("{e}")))?;
        let vowel: Vowel = rec[2].parse().map_err(|e| bad(format!("{e}")))?;
        let values = rec
            .iter()
            .skip(3)
            .zip(&names)
            .map(|(s, n)| match s.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(bad(format!("{n}: not a finite number: {s:?}"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(FeatureVector {
            participant_id: rec[0].to_string(),
            group,
            vowel,
            values,
        });
    }
    Ok(FeatureMatrix { names, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FeatureMatrix {
        FeatureMatrix {
            names: vec!["mean F0".into(), "F0 SDnorm".into()],
            rows: vec![
                FeatureVector {
                    participant_id: "neg01".into(),
                    group: Group::Neg,
                    vowel: Vowel::A,
                    values: vec![38.123456789, 1.5e-9],
                },
                FeatureVector {
                    participant_id: "pos01".into(),
                    group: Group::Pos,
                    vowel: Vowel::U,
                    values: vec![-0.25, 123456789012.0],
                },
            ],
        }
    }

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_value(38.123456789), "38.1234568");
        assert_eq!(format_value(0.5), "0.5");
        assert_eq!(format_value(-1234.0), "-1234");
        assert_eq!(format_value(1.5e-9), "1.50000000e-9");
        assert_eq!(format_value(0.0), "0");
    }

    #[test]
    fn roundtrip() {
        let m = sample();
        let mut buf = Vec::new();
        write_matrix(&mut buf, &m).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("participant_id,group,vowel,mean F0,F0 SDnorm\n"));
        let back = read_matrix(buf.as_slice()).unwrap();
        assert_eq!(back.names, m.names);
        for (a, b) in back.rows.iter().zip(&m.rows) {
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!(((x - y) / y).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_matrix("id,group,vowel\n".as_bytes()).is_err());
        let nan = "participant_id,group,vowel,x\np1,neg,a,NaN\n";
        assert!(matches!(read_matrix(nan.as_bytes()), Err(Error::InvalidMatrix(m)) if m.contains("line 2")));
        let grp = "participant_id,group,vowel,x\np1,other,a,1\n";
        assert!(read_matrix(grp.as_bytes()).is_err());
    }

    #[test]
    fn header_only() {
        let m = read_matrix("participant_id,group,vowel,x\n".as_bytes()).unwrap();
        assert!(m.rows.is_empty());
        assert_eq!(m.column_index("x"), Some(0));
    }
}
