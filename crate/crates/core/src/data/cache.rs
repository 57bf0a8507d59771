//! On-disk dataset cache.
//!
//! A dataset `NAME` in directory `DIR` is stored as `DIR/NAME_train.csv`,
//! `DIR/NAME_test.csv` and `DIR/NAME_manifest.txt`. Feature datasets use the
//! header `label,f0,...,f{m-1}`; quantum-state datasets use
//! `label,re0,im0,...,re{m-1},im{m-1}`. Floats are written in the shortest
//! decimal form that parses back to the identical `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use super::{Dataset, LabeledSample, SampleInput};
use crate::error::{Error, Result};
use crate::qsim::StateVector;

pub fn train_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}_train.csv"))
}

pub fn test_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}_test.csv"))
}

pub fn manifest_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}_manifest.txt"))
}

pub fn split_to_csv(samples: &[LabeledSample]) -> Result<String> {
    let first = samples.first().ok_or_else(|| Error::invalid("cannot write an empty split"))?;
    let mut out = String::new();
    match &first.input {
        SampleInput::Features(f) => {
            out.push_str("label");
            for k in 0..f.len() {
                write!(out, ",f{k}").unwrap();
            }
        }
        SampleInput::State(s) => {
            out.push_str("label");
            for k in 0..s.dim() {
                write!(out, ",re{k},im{k}").unwrap();
            }
        }
    }
    out.push('\n');
    for s in samples {
        write!(out, "{}", s.label).unwrap();
        match (&first.input, &s.input) {
            (SampleInput::Features(a), SampleInput::Features(f)) if a.len() == f.len() => {
                for v in f {
                    write!(out, ",{v}").unwrap();
                }
            }
            (SampleInput::State(a), SampleInput::State(st)) if a.dim() == st.dim() => {
                for z in st.amplitudes() {
                    write!(out, ",{},{}", z.re, z.im).unwrap();
                }
            }
            _ => return Err(Error::invalid("split mixes sample kinds or widths")),
        }
        out.push('\n');
    }
    Ok(out)
}

enum Schema {
    Features(usize),
    State(usize),
}

fn parse_header(header: &str, source: &str) -> Result<Schema> {
    let cols: Vec<&str> = header.trim_end().split(',').collect();
    let bad = |msg: &str| Error::at_line(source, 1, msg.to_string());
    if cols.first() != Some(&"label") || cols.len() < 2 {
        return Err(bad("header must start with `label` followed by feature columns"));
    }
    let rest = &cols[1..];
    if rest[0] == "f0" {
        if rest.iter().enumerate().any(|(k, c)| *c != format!("f{k}")) {
            return Err(bad("feature columns must be f0,f1,... in order"));
        }
        return Ok(Schema::Features(rest.len()));
    }
    if rest[0] == "re0" {
        if rest.len() % 2 != 0
            || rest.chunks(2).enumerate().any(|(k, c)| c[0] != format!("re{k}") || c[1] != format!("im{k}"))
        {
            return Err(bad("state columns must be re0,im0,re1,im1,... in order"));
        }
        return Ok(Schema::State(rest.len() / 2));
    }
    Err(bad("unrecognised column layout"))
}

pub fn split_from_csv(text: &str, source: &str) -> Result<Vec<LabeledSample>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::at_line(source, 1, "empty file"))?;
    let schema = parse_header(header, source)?;
    let width = match schema {
        Schema::Features(m) => m,
        Schema::State(m) => 2 * m,
    };
    let mut samples = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width + 1 {
            return Err(Error::at_line(source, lineno, format!("expected {} fields, found {}", width + 1, fields.len())));
        }
        let label: u8 = match fields[0].trim() {
            "0" => 0,
            "1" => 1,
            other => return Err(Error::at_line(source, lineno, format!("label {other:?} is not 0 or 1"))),
        };
        let values: Vec<f64> = fields[1..]
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::at_line(source, lineno, format!("bad number: {e}")))?;
        let sample = match schema {
            Schema::Features(_) => LabeledSample::features(values, label),
            Schema::State(_) => {
                let amps = values.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
                let state = StateVector::from_amplitudes(amps)
                    .map_err(|e| Error::at_line(source, lineno, e.to_string()))?;
                LabeledSample::state(state, label)
            }
        };
        samples.push(sample);
    }
    if samples.is_empty() {
        return Err(Error::at_line(source, 2, "no samples after header"));
    }
    Ok(samples)
}

pub fn manifest_text(dataset: &Dataset) -> String {
    let mut out = String::new();
    writeln!(out, "name={}", dataset.name).unwrap();
    if !dataset.provenance.iter().any(|(k, _)| k == "seed") {
        writeln!(out, "seed={}", dataset.seed).unwrap();
    }
    writeln!(out, "n_train={}", dataset.train.len()).unwrap();
    writeln!(out, "n_test={}", dataset.test.len()).unwrap();
    for (k, v) in &dataset.provenance {
        writeln!(out, "{k}={v}").unwrap();
    }
    out
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Write the two split files and the manifest; returns their paths.
pub fn write_dataset(dataset: &Dataset, dir: &Path) -> Result<[PathBuf; 3]> {
    dataset.validate()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = [
        train_path(dir, &dataset.name),
        test_path(dir, &dataset.name),
        manifest_path(dir, &dataset.name),
    ];
    write(&paths[0], &split_to_csv(&dataset.train)?)?;
    write(&paths[1], &split_to_csv(&dataset.test)?)?;
    write(&paths[2], &manifest_text(dataset))?;
    Ok(paths)
}

/// Read a cached dataset. The manifest is optional; when present its `seed`
/// entry is restored.
pub fn read_dataset(dir: &Path, name: &str) -> Result<Dataset> {
    let read = |p: PathBuf| fs::read_to_string(&p).map_err(|e| Error::io(&p, e)).map(|t| (t, p));
    let (train_text, tp) = read(train_path(dir, name))?;
    let (test_text, sp) = read(test_path(dir, name))?;
    let train = split_from_csv(&train_text, &tp.display().to_string())?;
    let test = split_from_csv(&test_text, &sp.display().to_string())?;
    let mut seed = 0;
    let mut provenance = Vec::new();
    if let Ok(text) = fs::read_to_string(manifest_path(dir, name)) {
        for line in text.lines() {
            if let Some((k, v)) = line.split_once('=') {
                match k {
                    "name" | "n_train" | "n_test" => {}
                    _ => {
                        if k == "seed" {
                            seed = v.parse().unwrap_or(0);
                        }
                        provenance.push((k.to_string(), v.to_string()));
                    }
                }
            }
        }
    }
    let ds = Dataset { name: name.to_string(), train, test, seed, provenance };
    ds.validate().map_err(|e| Error::Format { location: dir.join(name).display().to_string(), message: e.to_string() })?;
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_csv_round_trip() {
        let f = |v: f64, l| LabeledSample::features(vec![v, 0.1 + v, 1.0 / 3.0, 0.0], l);
        let ds = Dataset::new("toy", vec![f(0.5, 0), f(2.25, 1)], vec![f(1e-300, 1), f(7.0, 0)], 4).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&ds, dir.path()).unwrap();
        let back = read_dataset(dir.path(), "toy").unwrap();
        assert_eq!(back.train, ds.train);
        assert_eq!(back.test, ds.test);
        assert_eq!(back.seed, 4);
        let header = fs::read_to_string(train_path(dir.path(), "toy")).unwrap();
        assert!(header.starts_with("label,f0,f1,f2,f3\n"));
    }

    #[test]
    fn state_csv_header() {
        let s = |l| LabeledSample::state(StateVector::zero(1).unwrap(), l);
        let text = split_to_csv(&[s(0), s(1)]).unwrap();
        assert!(text.starts_with("label,re0,im0,re1,im1\n"));
        let back = split_from_csv(&text, "mem").unwrap();
        assert_eq!(back, vec![s(0), s(1)]);
    }

    #[test]
    fn malformed_rows_report_line() {
        let err = split_from_csv("label,f0,f1\n1,0.5,0.5\n2,0.1,0.2\n", "x.csv").unwrap_err();
        assert!(err.to_string().contains("x.csv:3"), "{err}");
        assert!(split_from_csv("label,f0,f1\n1,0.5\n", "x").is_err());
        assert!(split_from_csv("label,f0,f2\n", "x").is_err());
        assert!(split_from_csv("label,f0\n", "x").is_err());
    }
}
