//! Benchmark records and the speedup report.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One timed run. Column order is the CSV schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub algorithm: String,
    pub dataset: String,
    pub n: usize,
    pub d: usize,
    pub threads: usize,
    pub seconds: f64,
    pub summary: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub algorithm: String,
    pub dataset: String,
    pub n: usize,
    pub d: usize,
    pub threads: usize,
    pub seconds: f64,
    pub summary: String,
    /// Self-relative speedup `T1 / Tp`.
    pub speedup: f64,
}

pub fn write_records(w: impl Write, records: &[BenchRecord]) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(["algorithm", "dataset", "n", "d", "threads", "seconds", "summary"])?;
    for r in records {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_records(r: impl Read) -> Result<Vec<BenchRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

/// Speedup per (algorithm, dataset) against the fastest single-thread row.
/// Records without a single-thread baseline are skipped; one warning per
/// skipped group is returned.
pub fn report(records: &[BenchRecord]) -> (Vec<ReportRow>, Vec<String>) {
    let mut t1: HashMap<(&str, &str), f64> = HashMap::new();
    for r in records.iter().filter(|r| r.threads == 1) {
        let e = t1.entry((&r.algorithm, &r.dataset)).or_insert(f64::INFINITY);
        *e = e.min(r.seconds);
    }
    let mut rows = Vec::new();
    let mut warnings: Vec<String> = Vec::new();
    for r in records {
        match t1.get(&(r.algorithm.as_str(), r.dataset.as_str())) {
            Some(&base) => rows.push(ReportRow {
                algorithm: r.algorithm.clone(),
                dataset: r.dataset.clone(),
                n: r.n,
                d: r.d,
                threads: r.threads,
                seconds: r.seconds,
                summary: r.summary.clone(),
                speedup: if r.seconds > 0.0 { base / r.seconds } else { 1.0 },
            }),
            None => {
                let w = format!(
                    "no single-thread run for {} on {}; skipped",
                    r.algorithm, r.dataset
                );
                if !warnings.contains(&w) {
                    warnings.push(w);
                }
            }
        }
    }
    (rows, warnings)
}

pub fn write_report(w: impl Write, rows: &[ReportRow]) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record([
        "algorithm", "dataset", "n", "d", "threads", "seconds", "summary", "speedup",
    ])?;
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// FNV-1a over a sequence of integers: the order-sensitive checksum used in
/// result summaries.
pub fn checksum(values: impl IntoIterator<Item = u64>) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for v in values {
        for b in v.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(alg: &str, threads: usize, seconds: f64) -> BenchRecord {
        BenchRecord {
            algorithm: alg.into(),
            dataset: "2D-U-1M".into(),
            n: 1_000_000,
            d: 2,
            threads,
            seconds,
            summary: "vertices=10".into(),
        }
    }

    #[test]
    fn speedups() {
        let (rows, warn) = report(&[rec("dc", 1, 10.0)]);
        assert_eq!(rows[0].speedup, 1.0);
        assert!(warn.is_empty());
        let (rows, _) = report(&[rec("dc", 1, 10.0), rec("dc", 8, 2.0)]);
        assert_eq!(rows[1].speedup, 5.0);
        let (rows, warn) = report(&[rec("dc", 8, 2.0), rec("dc", 4, 3.0)]);
        assert!(rows.is_empty());
        assert_eq!(warn.len(), 1);
    }

    #[test]
    fn header_always_present() {
        let mut buf = Vec::new();
        write_records(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "algorithm,dataset,n,d,threads,seconds,summary\n");
    }

    proptest! {
        #[test]
        fn csv_round_trip(
            alg in "[a-z][a-z0-9,\" -]{0,12}",
            n in 0usize..1_000_000_000,
            threads in 1usize..128,
            seconds in 0.0f64..1e6,
            summary in "[ -~]{0,20}",
        ) {
            let r = BenchRecord { algorithm: alg, dataset: "3D-IS-100K".into(), n, d: 3, threads, seconds, summary };
            let mut buf = Vec::new();
            write_records(&mut buf, std::slice::from_ref(&r)).unwrap();
            prop_assert_eq!(read_records(buf.as_slice()).unwrap(), vec![r]);
        }
    }
}
