//! Plain-text CSV forms of the analysis products, with matching readers.
//!
//! Reals are written with 17 significant digits so that every file reads
//! back bit-exactly.

use ndarray::Array2;

use crate::numfmt::sig17;
use crate::pca::CorrelationMap;
use crate::spectral::PsdEstimate;

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("malformed CSV at row {row}: {reason}")]
    Malformed { row: usize, reason: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn malformed(row: usize, reason: impl Into<String>) -> ExportError {
    ExportError::Malformed {
        row,
        reason: reason.into(),
    }
}

fn records(text: &str) -> Result<(Vec<String>, Vec<csv::StringRecord>), ExportError> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = reader.headers()?.iter().map(str::to_owned).collect();
    let rows = reader.records().collect::<Result<Vec<_>, _>>()?;
    Ok((header, rows))
}

fn parse_f64(row: usize, cell: &str) -> Result<f64, ExportError> {
    cell.trim()
        .parse()
        .map_err(|_| malformed(row, format!("not a number: {cell:?}")))
}

/// Square matrix with a `channel` header column and one row per channel.
pub fn correlation_map_csv(map: &CorrelationMap) -> String {
    let mut out = String::from("channel");
    for name in &map.channel_names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, name) in map.channel_names.iter().enumerate() {
        out.push_str(name);
        for v in map.values.row(i) {
            out.push(',');
            out.push_str(&sig17(*v));
        }
        out.push('\n');
    }
    out
}

/// Degenerate channels are recovered from their zero diagonal.
pub fn read_correlation_map_csv(text: &str) -> Result<CorrelationMap, ExportError> {
    let (header, rows) = records(text)?;
    if header.first().map(String::as_str) != Some("channel") {
        return Err(malformed(0, "first header cell must be \"channel\""));
    }
    let names: Vec<String> = header[1..].to_vec();
    let n = names.len();
    if rows.len() != n {
        return Err(malformed(rows.len(), format!("expected {n} rows")));
    }
    let mut values = Array2::zeros((n, n));
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n + 1 || row[0] != names[i] {
            return Err(malformed(i + 1, "row does not match header"));
        }
        for j in 0..n {
            values[[i, j]] = parse_f64(i + 1, &row[j + 1])?;
        }
    }
    let degenerate_channels = names
        .iter()
        .enumerate()
        .filter(|(i, _)| values[[*i, *i]] == 0.0)
        .map(|(_, n)| n.clone())
        .collect();
    Ok(CorrelationMap {
        values,
        channel_names: names,
        degenerate_channels,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MainsLevelRow {
    pub channel: String,
    pub level: f64,
    pub level_normalized: f64,
}

pub fn mains_levels_csv(rows: &[MainsLevelRow]) -> String {
    let mut out = String::from("channel,mains_level,mains_level_normalized\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            r.channel,
            sig17(r.level),
            sig17(r.level_normalized)
        ));
    }
    out
}

pub fn read_mains_levels_csv(text: &str) -> Result<Vec<MainsLevelRow>, ExportError> {
    let (header, rows) = records(text)?;
    if header != ["channel", "mains_level", "mains_level_normalized"] {
        return Err(malformed(0, "unexpected header"));
    }
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            if r.len() != 3 {
                return Err(malformed(i + 1, "expected 3 cells"));
            }
            Ok(MainsLevelRow {
                channel: r[0].to_owned(),
                level: parse_f64(i + 1, &r[1])?,
                level_normalized: parse_f64(i + 1, &r[2])?,
            })
        })
        .collect()
}

/// Two columns, `freq_hz,power`, one row per bin.
pub fn psd_csv(psd: &PsdEstimate) -> String {
    let mut out = String::from("freq_hz,power\n");
    for (f, p) in psd.frequencies().zip(&psd.power) {
        out.push_str(&format!("{},{}\n", sig17(f), sig17(*p)));
    }
    out
}

pub fn read_psd_csv(text: &str) -> Result<Vec<(f64, f64)>, ExportError> {
    let (header, rows) = records(text)?;
    if header != ["freq_hz", "power"] {
        return Err(malformed(0, "unexpected header"));
    }
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            if r.len() != 2 {
                return Err(malformed(i + 1, "expected 2 cells"));
            }
            Ok((parse_f64(i + 1, &r[0])?, parse_f64(i + 1, &r[1])?))
        })
        .collect()
}

/// File name for a channel's spectrum; path separators are replaced.
pub fn psd_file_name(channel: &str) -> String {
    let safe: String = channel
        .chars()
        .map(|c| if c == '/' || c == '\\' { '_' } else { c })
        .collect();
    format!("psd_{safe}.csv")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn correlation_map_round_trip() {
        let map = CorrelationMap {
            values: ndarray::array![[1.0, -0.1 / 3.0, 0.0], [-0.1 / 3.0, 1.0, 0.0], [0.0, 0.0, 0.0]],
            channel_names: vec!["AF3".into(), "A.X".into(), "O1".into()],
            degenerate_channels: vec!["O1".into()],
        };
        let back = read_correlation_map_csv(&correlation_map_csv(&map)).unwrap();
        assert_eq!(back, map);
    }

    #[test]
    fn mains_levels_round_trip() {
        let rows = vec![
            MainsLevelRow {
                channel: "T8".into(),
                level: 1.0 / 7.0,
                level_normalized: 1.0,
            },
            MainsLevelRow {
                channel: "O1".into(),
                level: 1e-300,
                level_normalized: 0.0,
            },
        ];
        assert_eq!(read_mains_levels_csv(&mains_levels_csv(&rows)).unwrap(), rows);
    }

    #[test]
    fn psd_round_trip() {
        let psd = PsdEstimate {
            channel_name: "P7".into(),
            bin_hz: 0.5,
            power: vec![0.0, 0.1, std::f64::consts::PI],
            segment_count: 3,
        };
        let rows = read_psd_csv(&psd_csv(&psd)).unwrap();
        assert_eq!(rows, vec![(0.0, 0.0), (0.5, 0.1), (1.0, std::f64::consts::PI)]);
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_psd_csv("freq_hz,power\n1,abc\n").is_err());
        assert!(read_mains_levels_csv("a,b\n").is_err());
        assert!(read_correlation_map_csv("channel,A\nB,1\n").is_err());
    }

    #[test]
    fn psd_names() {
        assert_eq!(psd_file_name("O1"), "psd_O1.csv");
        assert_eq!(psd_file_name("a/b"), "psd_a_b.csv");
    }
}
