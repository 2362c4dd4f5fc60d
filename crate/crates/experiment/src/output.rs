//! File formats written into a run directory.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use cvqrng_core::eavesdropper::AttackRun;
use cvqrng_core::stat_tests::TestReport;
use serde::Serialize;

use crate::{ExperimentError, MetricsRow, Result};

pub const METRICS_FILE: &str = "metrics.csv";
pub const RESULTS_FILE: &str = "results.json";
pub const BITSTREAM_FILE: &str = "bitstream.bin";
pub const STAT_TESTS_FILE: &str = "stat_tests.csv";

/// Bytes per dumped shot record.
pub const SHOT_RECORD_LEN: usize = 8 + 8 + 8 + 8 + 1 + 2;

pub fn shots_file(index: usize) -> String {
    format!("shots_{index:03}.bin")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| ExperimentError::io(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| ExperimentError::io(path, e))
}

pub fn write_metrics(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| ExperimentError::io(path, e))
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|source| ExperimentError::Json { path: path.into(), source })?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| ExperimentError::io(path, e))
}

#[derive(Serialize)]
struct StatRow<'a> {
    test_name: &'a str,
    p_value: Option<f64>,
    sub_p_values: String,
    verdict: String,
    bits_consumed: usize,
}

pub fn write_stat_tests(path: &Path, reports: &[TestReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for r in reports {
        let subs: Vec<String> = r.sub_p_values.iter().map(|p| p.to_string()).collect();
        w.serialize(StatRow {
            test_name: &r.test_name,
            p_value: r.p_value,
            sub_p_values: subs.join(";"),
            verdict: format!("{:?}", r.verdict),
            bits_consumed: r.bits_consumed,
        })?;
    }
    w.flush().map_err(|e| ExperimentError::io(path, e))
}

/// One record of a shot dump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DumpedShot {
    pub shot_index: u64,
    pub alice_raw: f64,
    pub eve_x: f64,
    pub eve_p: f64,
    pub alice_bin: u8,
    /// Rank of Alice's bin in Eve's guessing order.
    pub rank: u16,
}

impl DumpedShot {
    fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.shot_index.to_le_bytes());
        out.extend_from_slice(&self.alice_raw.to_le_bytes());
        out.extend_from_slice(&self.eve_x.to_le_bytes());
        out.extend_from_slice(&self.eve_p.to_le_bytes());
        out.push(self.alice_bin);
        out.extend_from_slice(&self.rank.to_le_bytes());
    }

    fn decode(b: &[u8; SHOT_RECORD_LEN]) -> Self {
        let u64_at = |i: usize| u64::from_le_bytes(b[i..i + 8].try_into().expect("8 bytes"));
        Self {
            shot_index: u64_at(0),
            alice_raw: f64::from_bits(u64_at(8)),
            eve_x: f64::from_bits(u64_at(16)),
            eve_p: f64::from_bits(u64_at(24)),
            alice_bin: b[32],
            rank: u16::from_le_bytes([b[33], b[34]]),
        }
    }
}

/// Writes the attack's shots as little-endian records. Bins above 255 and
/// ranks above 65535 do not fit the format and are rejected.
pub fn write_shots(path: &Path, run: &AttackRun) -> Result<()> {
    let mut w = create(path)?;
    let mut buf = Vec::with_capacity(SHOT_RECORD_LEN * 4096);
    for (s, g) in run.shots.iter().zip(&run.guesses) {
        let alice_bin = u8::try_from(s.alice_bin)
            .map_err(|_| ExperimentError::config("binning.bin_count", "shot dumps store bins as u8"))?;
        let rank = u16::try_from(g.rank)
            .map_err(|_| ExperimentError::config("binning.bin_count", "shot dumps store ranks as u16"))?;
        DumpedShot { shot_index: s.index, alice_raw: s.alice_raw, eve_x: s.eve_x, eve_p: s.eve_p, alice_bin, rank }
            .encode(&mut buf);
        if buf.len() >= SHOT_RECORD_LEN * 4096 {
            w.write_all(&buf).map_err(|e| ExperimentError::io(path, e))?;
            buf.clear();
        }
    }
    w.write_all(&buf).and_then(|_| w.flush()).map_err(|e| ExperimentError::io(path, e))
}

pub fn read_shots(path: &Path) -> Result<Vec<DumpedShot>> {
    let mut bytes = Vec::new();
    File::open(path)
        .map(BufReader::new)
        .and_then(|mut r| r.read_to_end(&mut bytes))
        .map_err(|e| ExperimentError::io(path, e))?;
    if bytes.len() % SHOT_RECORD_LEN != 0 {
        return Err(ExperimentError::io(
            path,
            std::io::Error::new(std::io::ErrorKind::InvalidData, "truncated shot record"),
        ));
    }
    Ok(bytes.chunks_exact(SHOT_RECORD_LEN).map(|c| DumpedShot::decode(c.try_into().expect("exact chunk"))).collect())
}
