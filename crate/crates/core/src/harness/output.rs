use super::{HarnessError, ResultRow};
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

/// First line of every result CSV. The numbers come from a reference
/// denoiser, not a trained generator, and the file says so.
pub fn reference_header(backend: &str) -> String {
    format!("# reference backend: {backend} (analytic denoiser, not a trained generator)")
}

/// Writes `rows` as CSV after a `#` comment line.
pub fn write_csv<W: Write, T: Serialize>(
    out: W,
    comment: &str,
    rows: &[T],
) -> Result<(), HarnessError> {
    let mut out = out;
    for line in comment.lines() {
        writeln!(out, "# {}", line.trim_start_matches('#').trim_start())?;
    }
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV written by [`write_csv`], skipping comment lines.
pub fn read_csv<R: Read, T: DeserializeOwned>(input: R) -> Result<Vec<T>, HarnessError> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    let rows = r.deserialize().collect::<Result<Vec<T>, _>>()?;
    Ok(rows)
}

/// Path of the timing file that sits next to a result CSV.
pub fn timing_path(csv: &Path) -> PathBuf {
    let mut name = csv.file_stem().unwrap_or_default().to_os_string();
    name.push(".timing.csv");
    csv.with_file_name(name)
}

/// Writes result rows to `path` and their wall times to the timing file.
pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<(), HarnessError> {
    let backend = rows.first().map(|r| r.backend.as_str()).unwrap_or("none");
    write_csv(
        BufWriter::new(File::create(path)?),
        &reference_header(backend),
        rows,
    )?;

    #[derive(Serialize)]
    struct Timing<'a> {
        experiment: &'a str,
        attack: &'a str,
        capacity: usize,
        steps: usize,
        wall_time_s: f64,
    }
    let timing: Vec<Timing> = rows
        .iter()
        .map(|r| Timing {
            experiment: &r.experiment,
            attack: &r.attack,
            capacity: r.capacity,
            steps: r.steps,
            wall_time_s: r.wall_time_s,
        })
        .collect();
    write_csv(
        BufWriter::new(File::create(timing_path(path))?),
        "summed per-cell wall time in seconds",
        &timing,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::HistogramRow;

    #[test]
    fn round_trip_with_comment() {
        let rows = vec![
            HistogramRow {
                correct_bits: 0,
                watermarked: 1,
                unwatermarked: 2,
            },
            HistogramRow {
                correct_bits: 1,
                watermarked: 3,
                unwatermarked: 4,
            },
        ];
        let mut buf = Vec::new();
        write_csv(&mut buf, &reference_header("zero"), &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# reference backend: zero"));
        assert!(text.contains("correct_bits,watermarked,unwatermarked\n0,1,2\n"));
        let back: Vec<HistogramRow> = read_csv(&buf[..]).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn timing_sits_beside_results() {
        assert_eq!(
            timing_path(Path::new("out/robustness.csv")),
            Path::new("out/robustness.timing.csv")
        );
    }
}
