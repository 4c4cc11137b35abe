use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::time::Duration;

use super::config::SweepPoint;
use crate::error::{Error, Result};
use crate::mapping::MappingScheme;
use crate::nn::InferenceReport;
use crate::xbar::Resolution;

/// Column order of the results CSV. Wall time is kept out of this file so
/// that reruns are byte-identical; see [`write_timing_csv`].
pub const CSV_COLUMNS: [&str; 16] = [
    "point",
    "trial",
    "mapping",
    "adc_bits",
    "alpha",
    "sigma_lrs",
    "sigma_hrs",
    "i_hrs",
    "i_lrs",
    "seed",
    "samples",
    "correct",
    "accuracy",
    "writes",
    "mvms",
    "status",
];

/// One (point, trial) outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub point: SweepPoint,
    pub trial: usize,
    pub seed: u64,
    pub samples: usize,
    pub correct: usize,
    /// `None` when the row failed.
    pub accuracy: Option<f64>,
    pub writes: u64,
    pub mvms: u64,
    /// `"ok"` or the error message.
    pub status: String,
    pub wall: Duration,
}

impl ResultRow {
    pub(super) fn new(
        point: SweepPoint,
        trial: usize,
        seed: u64,
        samples: usize,
        outcome: Result<InferenceReport>,
        wall: Duration,
    ) -> Self {
        let mut row = ResultRow {
            point,
            trial,
            seed,
            samples,
            correct: 0,
            accuracy: None,
            writes: 0,
            mvms: 0,
            status: "ok".into(),
            wall,
        };
        match outcome {
            Ok(r) => {
                row.correct = r.correct;
                row.accuracy = Some(r.accuracy);
                row.writes = r.stats.writes;
                row.mvms = r.stats.mvms;
            }
            Err(e) => row.status = format!("error: {e}"),
        }
        row
    }

    pub fn is_ok(&self) -> bool {
        self.accuracy.is_some()
    }

    fn record(&self) -> [String; 16] {
        let p = &self.point;
        [
            p.index.to_string(),
            self.trial.to_string(),
            p.mapping.name(),
            p.adc_bits.to_string(),
            p.alpha.to_string(),
            p.sigma_lrs.to_string(),
            p.sigma_hrs.to_string(),
            p.i_hrs.to_string(),
            p.i_lrs.to_string(),
            self.seed.to_string(),
            self.samples.to_string(),
            self.correct.to_string(),
            self.accuracy.map(|a| a.to_string()).unwrap_or_default(),
            self.writes.to_string(),
            self.mvms.to_string(),
            self.status.clone(),
        ]
    }
}

/// Streams rows to a CSV file, header first.
pub struct CsvSink<W: Write> {
    writer: csv::Writer<W>,
}

impl CsvSink<File> {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        CsvSink::new(file)
    }
}

impl<W: Write> CsvSink<W> {
    pub fn new(inner: W) -> Result<Self> {
        let mut writer = csv::Writer::from_writer(inner);
        writer.write_record(CSV_COLUMNS).map_err(csv_err)?;
        Ok(CsvSink { writer })
    }

    pub fn write(&mut self, row: &ResultRow) -> Result<()> {
        self.writer.write_record(row.record()).map_err(csv_err)?;
        // flush per row so partial sweeps leave usable output
        self.writer.flush().map_err(|e| Error::Config(format!("writing CSV: {e}")))
    }

    pub fn into_inner(self) -> Result<W> {
        self.writer
            .into_inner()
            .map_err(|e| Error::Config(format!("writing CSV: {e}")))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("writing CSV: {e}"))
}

/// `point,trial,wall_ms` for each row.
pub fn write_timing_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["point", "trial", "wall_ms"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.point.index.to_string(),
            r.trial.to_string(),
            format!("{:.3}", r.wall.as_secs_f64() * 1e3),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Config(format!("writing CSV: {e}")))
}

/// Reads a results CSV back; wall times are not stored there and come back as zero.
pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e.to_string()))?;
    let header = reader
        .headers()
        .map_err(|e| Error::parse(path, e.to_string()))?
        .clone();
    if header.iter().ne(CSV_COLUMNS) {
        return Err(Error::parse(
            path,
            format!("unexpected header, expected {}", CSV_COLUMNS.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::parse(path, e.to_string()))?;
        let bad = |col: usize| Error::parse(path, format!("line {line}: bad `{}`", CSV_COLUMNS[col]));
        let num = |col: usize| rec[col].parse::<f64>().map_err(|_| bad(col));
        let int = |col: usize| rec[col].parse::<u64>().map_err(|_| bad(col));
        let mapping: MappingScheme = rec[2].parse().map_err(|_| bad(2))?;
        let adc_bits: Resolution = rec[3].parse().map_err(|_| bad(3))?;
        rows.push(ResultRow {
            point: SweepPoint {
                index: int(0)? as usize,
                mapping,
                adc_bits,
                alpha: num(4)?,
                sigma_lrs: num(5)?,
                sigma_hrs: num(6)?,
                i_hrs: num(7)?,
                i_lrs: num(8)?,
            },
            trial: int(1)? as usize,
            seed: int(9)?,
            samples: int(10)? as usize,
            correct: int(11)? as usize,
            accuracy: if rec[12].is_empty() { None } else { Some(num(12)?) },
            writes: int(13)?,
            mvms: int(14)?,
            status: rec[15].to_string(),
            wall: Duration::ZERO,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::InferenceReport;
    use crate::tiler::WriteStats;

    fn point() -> SweepPoint {
        SweepPoint {
            index: 3,
            mapping: "bnn-iii+cycles".parse().unwrap(),
            i_hrs: 5.0,
            i_lrs: 30.0,
            sigma_lrs: 0.0,
            sigma_hrs: 2.5,
            adc_bits: Resolution::Bits(4),
            alpha: 0.125,
        }
    }

    #[test]
    fn csv_round_trip() {
        let ok = ResultRow::new(
            point(),
            1,
            77,
            4,
            Ok(InferenceReport {
                predictions: vec![0, 1, 2, 3],
                correct: 3,
                accuracy: 0.75,
                stats: WriteStats { writes: 3, mvms: 24 },
            }),
            Duration::from_millis(5),
        );
        let failed = ResultRow::new(point(), 0, 78, 4, Err(Error::Model("boom, really".into())), Duration::ZERO);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let mut sink = CsvSink::create(&path).unwrap();
        sink.write(&ok).unwrap();
        sink.write(&failed).unwrap();
        drop(sink);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("point,trial,mapping,adc_bits,alpha,"));
        assert!(text.contains("3,1,bnn-iii+cycles,4,0.125,0,2.5,5,30,77,4,3,0.75,3,24,ok\n"));
        let back = read_csv(&path).unwrap();
        assert_eq!(back[0], ResultRow { wall: Duration::ZERO, ..ok });
        assert_eq!(back[1], failed);
        assert!(!back[1].is_ok());
    }
}
