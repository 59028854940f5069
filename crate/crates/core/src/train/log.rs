use std::path::Path;

use super::{EpochRecord, TrainError};

pub const TRAINING_LOG_HEADER: [&str; 9] = [
    "epoch",
    "g_loss",
    "d_loss",
    "ssim_mean",
    "ssim_std",
    "psnr_mean",
    "psnr_std",
    "is_mean",
    "is_std",
];

fn log_err(e: impl std::fmt::Display) -> TrainError {
    TrainError::Log(e.to_string())
}

/// One row per epoch; metric columns are empty on non-evaluation epochs.
/// Floats use the shortest representation that round-trips.
pub fn write_training_log(records: &[EpochRecord], path: &Path) -> Result<(), TrainError> {
    let mut w = csv::Writer::from_path(path).map_err(log_err)?;
    w.write_record(TRAINING_LOG_HEADER).map_err(log_err)?;
    for r in records {
        let mut row = vec![
            r.epoch.to_string(),
            r.g_loss.to_string(),
            r.d_loss.to_string(),
        ];
        match &r.metric_snapshot {
            Some(s) => row.extend(
                [
                    s.ssim_mean,
                    s.ssim_std,
                    s.psnr_mean,
                    s.psnr_std,
                    s.is_mean,
                    s.is_std,
                ]
                .iter()
                .map(f64::to_string),
            ),
            None => row.extend(std::iter::repeat_n(String::new(), 6)),
        }
        w.write_record(&row).map_err(log_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Parsed rows: `(epoch, g_loss, d_loss, metrics)` where `metrics` holds the
/// six metric columns when present.
pub fn read_training_log(
    path: &Path,
) -> Result<Vec<(usize, f64, f64, Option<[f64; 6]>)>, TrainError> {
    let mut r = csv::Reader::from_path(path).map_err(log_err)?;
    let header = r.headers().map_err(log_err)?.clone();
    if header.iter().ne(TRAINING_LOG_HEADER.iter().copied()) {
        return Err(TrainError::Log(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(log_err)?;
        let num = |i: usize| rec[i].parse::<f64>().map_err(log_err);
        let epoch = rec[0].parse::<usize>().map_err(log_err)?;
        let metrics = if rec[3].is_empty() {
            None
        } else {
            Some([num(3)?, num(4)?, num(5)?, num(6)?, num(7)?, num(8)?])
        };
        out.push((epoch, num(1)?, num(2)?, metrics));
    }
    Ok(out)
}
