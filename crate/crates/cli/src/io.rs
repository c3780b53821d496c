//! Output files and genome input.

use std::io::Write;
use std::path::Path;

use crate::error::{CliError, Result};

/// Seventeen significant digits: parses back to the identical `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write via a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(CliError::runtime)?;
    for r in rows {
        w.write_record(r).map_err(CliError::runtime)?;
    }
    w.into_inner().map_err(CliError::runtime)
}

/// Gene column names for `n_ord` ordinary satellites.
pub fn gene_columns(n_ord: u32) -> Vec<String> {
    let mut cols = vec!["a_index".to_string()];
    for k in 1..=n_ord {
        cols.extend([format!("i_{k}"), format!("raan_{k}"), format!("nu_{k}")]);
    }
    cols.push("xi_1".into());
    cols
}

pub fn genome_fields(genes: &[f64]) -> Vec<String> {
    genes
        .iter()
        .enumerate()
        .map(|(k, &g)| if k == 0 { format!("{}", g as usize) } else { fmt_f64(g) })
        .collect()
}

fn parse_number(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| CliError::Validation(format!("{what}: '{s}' is not a number")))
}

/// Read a genome from a JSON array, a plain list of numbers, or a
/// `pareto.csv` row (the row whose `individual_id` is `row`, default 0).
pub fn read_genome(path: &Path, row: Option<usize>) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    parse_genome(&text, row).map_err(|e| match e {
        CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_genome(text: &str, row: Option<usize>) -> Result<Vec<f64>> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(CliError::Validation("genome: empty file".into()));
    }
    if trimmed.starts_with('[') {
        return serde_json::from_str::<Vec<f64>>(trimmed)
            .map_err(|e| CliError::Validation(format!("genome: {e}")));
    }
    if trimmed.starts_with("individual_id") {
        let want = row.unwrap_or(0);
        let mut reader = csv::Reader::from_reader(trimmed.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| CliError::Validation(format!("genome: {e}")))?
            .clone();
        let first_gene = headers
            .iter()
            .position(|h| h == "a_index")
            .ok_or_else(|| CliError::Validation("genome: no a_index column".into()))?;
        for record in reader.records() {
            let record = record.map_err(|e| CliError::Validation(format!("genome: {e}")))?;
            let id = parse_number(&record[0], "individual_id")?;
            if id == want as f64 {
                return record
                    .iter()
                    .skip(first_gene)
                    .map(|s| parse_number(s, "gene"))
                    .collect();
            }
        }
        return Err(CliError::Validation(format!("genome: no row with individual_id {want}")));
    }
    if row.is_some() {
        return Err(CliError::Validation("genome: --row needs a pareto.csv file".into()));
    }
    trimmed
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_number(s, "gene"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_text() {
        for x in [0.1, 1.0 / 3.0, 137.0000000001, 1e-300, 359.99999999999994, -0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn genome_formats() {
        assert_eq!(parse_genome("[1, 2.5, 3]", None).unwrap(), vec![1.0, 2.5, 3.0]);
        assert_eq!(parse_genome("1, 2.5\n3", None).unwrap(), vec![1.0, 2.5, 3.0]);
        let csv = "individual_id,aoi,cov,a_index,i_1,raan_1,nu_1,xi_1\n\
                   0,150.0,0.9,3,1.0,2.0,3.0,4.0\n\
                   1,160.0,0.95,2,5.0,6.0,7.0,8.0\n";
        assert_eq!(parse_genome(csv, None).unwrap(), vec![3.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(parse_genome(csv, Some(1)).unwrap(), vec![2.0, 5.0, 6.0, 7.0, 8.0]);
        assert!(parse_genome(csv, Some(2)).is_err());
        assert!(parse_genome("1, x", None).is_err());
        assert!(parse_genome("", None).is_err());
        assert!(parse_genome("[1, \"a\"]", None).is_err());
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nested/out.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
