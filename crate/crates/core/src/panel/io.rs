//! CSV readers and writers for loans, yields and panels.

use std::io::{Read, Write};

use super::{AlignedPanel, Grade, LoanRecord, Month, SeriesKey, SeriesKind, Term, YieldCurvePoint};
use crate::error::{Error, Result};

fn reader<R: Read>(rdr: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(rdr)
}

fn check_header(rdr: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let headers = rdr.headers()?;
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(Error::Parse {
            location: "header".into(),
            message: format!("expected `{}`, found `{}`", expected.join(","), got.join(",")),
        });
    }
    Ok(())
}

fn field(rec: &csv::StringRecord, i: usize, line: u64) -> Result<&str> {
    rec.get(i).ok_or_else(|| Error::Parse { location: format!("line {line}"), message: format!("missing field {i}") })
}

fn number(s: &str, line: u64, what: &str) -> Result<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse { location: format!("line {line}"), message: format!("bad {what} `{s}`") })
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

/// Reads `date,rate,grade,term`.
pub fn read_loans_csv<R: Read>(rdr: R) -> Result<Vec<LoanRecord>> {
    let mut rdr = reader(rdr);
    check_header(&mut rdr, &["date", "rate", "grade", "term"])?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec);
        let month: Month = field(&rec, 0, line)?.parse()?;
        let rate = number(field(&rec, 1, line)?, line, "rate")?;
        let grade: Grade = field(&rec, 2, line)?.parse()?;
        let term_months: u32 = field(&rec, 3, line)?.parse().map_err(|_| Error::Parse {
            location: format!("line {line}"),
            message: "bad term".into(),
        })?;
        let term = Term::from_months(term_months)?;
        out.push(LoanRecord::new(month, rate, grade, term)?);
    }
    Ok(out)
}

/// Reads `date,maturity_months,yield`.
pub fn read_yields_csv<R: Read>(rdr: R) -> Result<Vec<YieldCurvePoint>> {
    let mut rdr = reader(rdr);
    check_header(&mut rdr, &["date", "maturity_months", "yield"])?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec);
        let month: Month = field(&rec, 0, line)?.parse()?;
        let maturity_months = field(&rec, 1, line)?.parse().map_err(|_| Error::Parse {
            location: format!("line {line}"),
            message: "bad maturity".into(),
        })?;
        let yield_pct = number(field(&rec, 2, line)?, line, "yield")?;
        out.push(YieldCurvePoint { month, maturity_months, yield_pct });
    }
    Ok(out)
}

/// Reads a panel: first column `date` (`YYYY-MM`), one column per series,
/// empty cells missing. Lines starting with `#` are ignored. Every column
/// is tagged with `kind`.
pub fn read_panel_csv<R: Read>(rdr: R, kind: SeriesKind) -> Result<AlignedPanel> {
    let mut rdr = reader(rdr);
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some("date") {
        return Err(Error::Parse { location: "header".into(), message: "first column must be `date`".into() });
    }
    let columns: Vec<SeriesKey> = headers.iter().skip(1).map(|h| SeriesKey::new(h, kind)).collect();
    let mut months = Vec::new();
    let mut values = vec![Vec::new(); columns.len()];
    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec);
        months.push(field(&rec, 0, line)?.parse::<Month>()?);
        for (j, col) in values.iter_mut().enumerate() {
            let cell = field(&rec, j + 1, line)?;
            col.push(if cell.is_empty() { None } else { Some(number(cell, line, "value")?) });
        }
    }
    AlignedPanel::new(months, columns, values)
}

/// Writes a panel in the format read by [`read_panel_csv`]. Each entry in
/// `comments` becomes a leading `# ` line.
///
/// Values use the shortest representation that parses back to the same
/// `f64`, so a write/read cycle is lossless.
pub fn write_panel_csv<W: Write>(mut w: W, panel: &AlignedPanel, comments: &[String]) -> Result<()> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["date".to_string()];
    header.extend(panel.names());
    wtr.write_record(&header)?;
    for (t, month) in panel.months().iter().enumerate() {
        let mut row = vec![month.to_string()];
        for j in 0..panel.n_cols() {
            row.push(panel.column(j)[t].map_or_else(String::new, |v| v.to_string()));
        }
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loans_parse() {
        let data = "date,rate,grade,term\n2010-05-03,7.12,A,36\n2010-06,13.5,F,60\n";
        let loans = read_loans_csv(data.as_bytes()).unwrap();
        assert_eq!(loans.len(), 2);
        assert_eq!(loans[0].origination_month.to_string(), "2010-05");
        assert_eq!(loans[1].term, Term::M60);
        assert_eq!(loans[1].grade, Grade::F);
    }

    #[test]
    fn loans_reject_bad_rows() {
        for bad in [
            "date,rate,grade,term\n2010-05,7.1,G,36\n",
            "date,rate,grade,term\n2010-05,7.1,A,48\n",
            "date,rate,grade,term\n2010-05,-1,A,36\n",
            "date,rate,grade,term\n2010-5,7.1,A,36\n",
            "date,rate,term,grade\n2010-05,7.1,36,A\n",
        ] {
            assert!(read_loans_csv(bad.as_bytes()).is_err(), "{bad}");
        }
    }

    #[test]
    fn yields_parse() {
        let y = read_yields_csv("date,maturity_months,yield\n2010-05,36,1.25\n".as_bytes()).unwrap();
        assert_eq!(y[0].maturity_months, 36);
        assert_eq!(y[0].yield_pct, 1.25);
    }

    #[test]
    fn panel_round_trip_with_missing() {
        let data = "# note\ndate,36-A,60-A\n2010-05,1.5,\n2010-06,0.1,2.25\n";
        let p = read_panel_csv(data.as_bytes(), SeriesKind::SpreadLevel).unwrap();
        assert_eq!(p.column(1), &[None, Some(2.25)]);
        let mut buf = Vec::new();
        write_panel_csv(&mut buf, &p, &["note".into()]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), data);
    }
}
