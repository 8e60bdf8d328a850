use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DomainSequence;
use crate::error::{Error, Result};

/// Sidecar describing an exported sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub d: usize,
    pub k: usize,
    pub n: usize,
    pub shift_params: Vec<f64>,
    pub seed: u64,
    pub files: Vec<DomainFiles>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainFiles {
    pub train: String,
    pub eval: String,
}

fn write_csv<'a>(
    path: &Path,
    d: usize,
    rows: impl Iterator<Item = (&'a [f64], Option<usize>)>,
    with_label: bool,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (0..d).map(|j| format!("f{j}")).collect();
    if with_label {
        header.push("label".into());
    }
    w.write_record(&header)?;
    for (features, label) in rows {
        let mut rec: Vec<String> = features.iter().map(f64::to_string).collect();
        if with_label {
            rec.push(label.map(|y| y.to_string()).unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(Error::io_at(path))
}

/// Writes `domain_<t>_train.csv`, `domain_<t>_eval.csv` and `manifest.json`.
///
/// Training CSVs carry a `label` column only for the labeled source.
pub fn export_sequence(seq: &DomainSequence, dir: impl AsRef<Path>, seed: u64) -> Result<Manifest> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(Error::io_at(dir))?;
    let mut files = Vec::new();
    for (t, domain) in seq.domains().iter().enumerate() {
        let train = format!("domain_{t}_train.csv");
        let eval = format!("domain_{t}_eval.csv");
        write_csv(
            &dir.join(&train),
            seq.dim(),
            domain
                .samples()
                .iter()
                .map(|s| (s.features.as_slice(), s.label)),
            t == 0,
        )?;
        let split = seq.eval(t);
        write_csv(
            &dir.join(&eval),
            seq.dim(),
            split
                .features
                .iter_rows()
                .zip(split.labels.iter().map(|&y| Some(y))),
            true,
        )?;
        files.push(DomainFiles { train, eval });
    }
    let manifest = Manifest {
        d: seq.dim(),
        k: seq.class_count(),
        n: seq.n(),
        shift_params: seq.shift_params(),
        seed,
        files,
    };
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(Error::io_at(&path))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_rotating_moons;

    #[test]
    fn export_writes_csvs_and_manifest() {
        let seq = gen_rotating_moons(3, 0.0, 20.0, 24, 0.1, 6).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let m = export_sequence(&seq, dir.path(), 6).unwrap();
        assert_eq!((m.d, m.k, m.n), (2, 2, 2));
        let text = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        let back: Manifest = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);

        let mut r = csv::Reader::from_path(dir.path().join("domain_0_train.csv")).unwrap();
        assert_eq!(r.headers().unwrap(), vec!["f0", "f1", "label"]);
        assert_eq!(r.records().count(), 24);
        let mut r = csv::Reader::from_path(dir.path().join("domain_1_train.csv")).unwrap();
        assert_eq!(r.headers().unwrap(), vec!["f0", "f1"]);
        let first: Vec<f64> = r
            .records()
            .next()
            .unwrap()
            .unwrap()
            .iter()
            .map(|v| v.parse().unwrap())
            .collect();
        assert_eq!(first, seq.domain(1).samples()[0].features);
    }
}
