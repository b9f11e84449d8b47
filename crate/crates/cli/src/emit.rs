//! CSV emission with the fixed experiment schema:
//! `experiment,n,K,M,h,dp_value,limit_value,abs_error,runtime_ms`.
//! UTF-8, comma-separated, decimal points, shortest round-trip float
//! formatting; no locale dependence.

use std::path::Path;

use gcltlab_core::harness::ConvergenceRow;

use crate::CliError;

pub const HEADER: [&str; 9] = [
    "experiment",
    "n",
    "K",
    "M",
    "h",
    "dp_value",
    "limit_value",
    "abs_error",
    "runtime_ms",
];

fn fmt_opt_u64(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn csv_text(rows: &[ConvergenceRow]) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(HEADER).expect("in-memory writes cannot fail");
    for r in rows {
        wtr.write_record([
            r.experiment.clone(),
            r.n.to_string(),
            fmt_opt_u64(r.k),
            fmt_opt_u64(r.m),
            fmt_opt_f64(r.h),
            r.dp_value.to_string(),
            r.limit_value.to_string(),
            r.abs_error.to_string(),
            r.runtime_ms.to_string(),
        ])
        .expect("in-memory writes cannot fail");
    }
    String::from_utf8(wtr.into_inner().expect("in-memory writes cannot fail")).expect("CSV output is UTF-8")
}

/// Writes rows to `path`, or to stdout when no path is given.
pub fn emit_csv(rows: &[ConvergenceRow], path: Option<&Path>) -> Result<(), CliError> {
    let text = csv_text(rows);
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_only() {
        assert_eq!(csv_text(&[]), "experiment,n,K,M,h,dp_value,limit_value,abs_error,runtime_ms\n");
    }

    #[test]
    fn one_row_round_trips_through_a_reader() {
        let row = ConvergenceRow::new("demo", 16, 0.25, 0.5, 3).with_m(10).with_h(0.01);
        let text = csv_text(std::slice::from_ref(&row));
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let record = rdr.records().next().unwrap().unwrap();
        assert_eq!(&record[0], "demo");
        assert_eq!(record[1].parse::<usize>().unwrap(), 16);
        assert_eq!(&record[2], "");
        assert_eq!(record[3].parse::<u64>().unwrap(), 10);
        assert_eq!(record[4].parse::<f64>().unwrap(), 0.01);
        assert_eq!(record[5].parse::<f64>().unwrap(), row.dp_value);
        assert_eq!(record[6].parse::<f64>().unwrap(), row.limit_value);
        assert_eq!(record[7].parse::<f64>().unwrap(), row.abs_error);
        assert_eq!(record[8].parse::<u64>().unwrap(), 3);
    }
}
