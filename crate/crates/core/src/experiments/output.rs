//! CSV and JSON-lines writers. Both emit the same fields in the same order;
//! absent values are empty CSV cells and JSON `null`.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

pub fn write_csv<T: Serialize, W: Write>(records: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_jsonl<T: Serialize, W: Write>(records: &[T], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// `path` with its extension replaced by `jsonl`.
pub fn jsonl_path(path: &Path) -> PathBuf {
    path.with_extension("jsonl")
}

/// Writes `path` as CSV and its JSON-lines mirror next to it.
pub fn write_both<T: Serialize>(records: &[T], path: &Path) -> Result<()> {
    write_csv(records, std::io::BufWriter::new(std::fs::File::create(path)?))?;
    write_jsonl(records, std::io::BufWriter::new(std::fs::File::create(jsonl_path(path))?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::sweep::SweepRecord;

    #[test]
    fn sweep_header_and_mirror() {
        let rec = SweepRecord {
            eps: 0.1,
            k1: 0.1,
            k2: 10.0,
            gamma: 81.0 / 121.0,
            m: 1,
            probe_x: 0.0,
            probe_y: 0.025,
            deriv_abs: Some(0.5),
            series_k: Some(12),
            tail_est: Some(1e-11),
            oracle_dev: None,
            error: None,
            wall_time: std::time::Duration::from_secs(3),
        };
        let mut buf = Vec::new();
        write_csv(&[rec.clone()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "eps,k1,k2,gamma,m,probe_x,probe_y,deriv_abs,series_k,tail_est,oracle_dev,error");
        assert!(lines.next().unwrap().ends_with(",0.5,12,1e-11,,"));
        let mut js = Vec::new();
        write_jsonl(&[rec], &mut js).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&js).unwrap();
        assert_eq!(v["oracle_dev"], serde_json::Value::Null);
        assert!(v.get("wall_time").is_none());
    }
}
