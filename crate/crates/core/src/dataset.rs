//! Labeled samples, simulation ground truth, and CSV / JSON file I/O.
//!
//! Covariates are stored row-major in one buffer so gradient sets and
//! moment products can stream over them without per-sample allocations.
//! Sample order is fixed at construction; nothing in this module reorders.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One covariate/response pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: f64,
}

impl Sample {
    pub fn new(x: Vec<f64>, y: f64) -> Self {
        Sample { x, y }
    }
}

/// Simulation metadata. Never written into the CSV body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub w_star: Vec<f64>,
    pub sigma: f64,
    pub eta: f64,
    pub kappa: f64,
    pub corrupted_indices: Vec<usize>,
}

impl GroundTruth {
    pub fn validate(&self, n: usize, d: usize) -> Result<()> {
        if self.w_star.len() != d {
            return Err(Error::Dimension {
                expected: d,
                found: self.w_star.len(),
            });
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid("sigma must be finite and nonnegative"));
        }
        if !(0.0..=1.0 / 3.0 + 1e-12).contains(&self.eta) {
            return Err(Error::invalid("eta must lie in [0, 1/3]"));
        }
        if !(self.kappa >= 1.0) {
            return Err(Error::invalid("kappa must be at least 1"));
        }
        let budget = (self.eta * n as f64 + 1e-9).floor() as usize;
        if self.corrupted_indices.len() > budget {
            return Err(Error::invalid(format!(
                "{} corrupted indices exceed the budget floor(eta n) = {budget}",
                self.corrupted_indices.len()
            )));
        }
        if self.corrupted_indices.iter().any(|&i| i >= n) {
            return Err(Error::invalid("corrupted index out of range"));
        }
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let file = File::open(path)?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    d: usize,
    xs: Vec<f64>,
    ys: Vec<f64>,
    pub truth: Option<GroundTruth>,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if samples.is_empty() {
            return Err(Error::NoSamples);
        }
        let mut xs = Vec::with_capacity(samples.len() * d);
        let mut ys = Vec::with_capacity(samples.len());
        for s in samples {
            if s.x.len() != d {
                return Err(Error::Dimension {
                    expected: d,
                    found: s.x.len(),
                });
            }
            xs.extend_from_slice(&s.x);
            ys.push(s.y);
        }
        Self::from_parts(d, xs, ys)
    }

    /// Builds a dataset from a row-major covariate buffer and responses.
    pub fn from_parts(d: usize, xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if ys.is_empty() {
            return Err(Error::NoSamples);
        }
        if xs.len() != ys.len() * d {
            return Err(Error::Dimension {
                expected: ys.len() * d,
                found: xs.len(),
            });
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite value in dataset"));
        }
        Ok(Dataset {
            d,
            xs,
            ys,
            truth: None,
        })
    }

    pub fn with_truth(mut self, truth: GroundTruth) -> Result<Self> {
        truth.validate(self.len(), self.d)?;
        self.truth = Some(truth);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn x(&self, i: usize) -> &[f64] {
        &self.xs[i * self.d..(i + 1) * self.d]
    }

    pub fn y(&self, i: usize) -> f64 {
        self.ys[i]
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.xs.chunks_exact(self.d).zip(self.ys.iter().copied())
    }

    pub fn sample(&self, i: usize) -> Sample {
        Sample::new(self.x(i).to_vec(), self.y(i))
    }

    /// Replaces sample `i` in place.
    pub(crate) fn set_sample(&mut self, i: usize, x: &[f64], y: f64) {
        self.xs[i * self.d..(i + 1) * self.d].copy_from_slice(x);
        self.ys[i] = y;
    }

    /// New dataset holding `indices` (ascending) in their original order.
    /// Ground truth is carried over with corrupted indices renumbered.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::NoSamples);
        }
        let d = self.d;
        let mut xs = Vec::with_capacity(indices.len() * d);
        let mut ys = Vec::with_capacity(indices.len());
        for &i in indices {
            xs.extend_from_slice(self.x(i));
            ys.push(self.ys[i]);
        }
        let truth = self.truth.as_ref().map(|t| {
            let bad: BTreeSet<usize> = t.corrupted_indices.iter().copied().collect();
            GroundTruth {
                corrupted_indices: indices
                    .iter()
                    .enumerate()
                    .filter(|(_, i)| bad.contains(i))
                    .map(|(new, _)| new)
                    .collect(),
                ..t.clone()
            }
        });
        Ok(Dataset { d, xs, ys, truth })
    }

    /// Reads `x1,...,xd,y` CSV. Ground truth is not part of the file.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let file = File::open(path)?;
        Self::read_csv(file)
    }

    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = rdr.headers()?.clone();
        let width = header.len();
        if width < 2 {
            return Err(Error::Parse {
                line: 1,
                message: "header must name at least one covariate and y".into(),
            });
        }
        for (j, name) in header.iter().enumerate() {
            let expected = if j + 1 == width {
                "y".to_string()
            } else {
                format!("x{}", j + 1)
            };
            if name != expected {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("header field {} is {name:?}, expected {expected:?}", j + 1),
                });
            }
        }
        let d = width - 1;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
            if record.len() != width {
                return Err(Error::Width {
                    line,
                    expected: width,
                    found: record.len(),
                });
            }
            for (j, field) in record.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("field {} ({field:?}) is not a number", j + 1),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line,
                        message: format!("field {} is not finite", j + 1),
                    });
                }
                if j < d {
                    xs.push(v);
                } else {
                    ys.push(v);
                }
            }
        }
        if ys.is_empty() {
            return Err(Error::NoSamples);
        }
        Self::from_parts(d, xs, ys)
    }

    /// Writes the dataset with shortest round-trip decimal formatting.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = File::create(path)?;
        let mut w = BufWriter::new(file);
        self.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        let header: Vec<String> = (1..=self.d)
            .map(|j| format!("x{j}"))
            .chain(std::iter::once("y".to_string()))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        let mut line = String::new();
        for (x, y) in self.rows() {
            line.clear();
            for v in x {
                line.push_str(&format!("{v},"));
            }
            line.push_str(&format!("{y}"));
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Dataset> {
        Dataset::read_csv(s.as_bytes())
    }

    #[test]
    fn parses_two_rows() {
        let ds = parse("x1,x2,y\n1,0,3\n0,1,-1\n").unwrap();
        assert_eq!((ds.len(), ds.dim()), (2, 2));
        assert_eq!(ds.x(1), &[0.0, 1.0]);
        assert_eq!(ds.y(1), -1.0);
        assert!(ds.truth.is_none());
    }

    #[test]
    fn empty_body_is_no_samples() {
        assert!(matches!(parse("x1,x2,y\n"), Err(Error::NoSamples)));
    }

    #[test]
    fn short_row_names_its_line() {
        let err = parse("x1,x2,x3,y\n1,2,3,4\n1,2,3\n").unwrap_err();
        match err {
            Error::Width {
                line,
                expected,
                found,
            } => assert_eq!((line, expected, found), (3, 4, 3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_number_names_its_line() {
        let err = parse("x1,y\n1,2\nabc,3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        assert!(matches!(parse("x1,y\n1,inf\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn bad_header_rejected() {
        assert!(matches!(parse("a,b\n1,2\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn single_sample_serialization() {
        let ds = Dataset::new(vec![Sample::new(vec![2.0], 5.0)], 1).unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x1,y\n2,5\n");
    }

    #[test]
    fn subset_renumbers_corruption() {
        let samples = (0..5).map(|i| Sample::new(vec![i as f64], 0.0)).collect();
        let ds = Dataset::new(samples, 1)
            .unwrap()
            .with_truth(GroundTruth {
                w_star: vec![0.0],
                sigma: 1.0,
                eta: 1.0 / 3.0,
                kappa: 1.0,
                corrupted_indices: vec![3],
            })
            .unwrap();
        let sub = ds.subset(&[1, 3, 4]).unwrap();
        assert_eq!(sub.truth.as_ref().unwrap().corrupted_indices, vec![1]);
        assert_eq!(sub.x(1), &[3.0]);
    }

    #[test]
    fn rejects_mixed_dimensions() {
        let samples = vec![Sample::new(vec![1.0], 0.0), Sample::new(vec![1.0, 2.0], 0.0)];
        assert!(matches!(Dataset::new(samples, 1), Err(Error::Dimension { .. })));
    }
}
