//! File plumbing: bivariate CSV samples, directed edge lists, price series,
//! and the CSV/JSON artifacts written by the command line front end.
//!
//! Numbers are written with Rust's `Display` for `f64`, which is the shortest
//! decimal that parses back to the same value.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::angular::{AngularSample, EmpiricalAngularMeasure};
use crate::error::{Error, Result};
use crate::geometry::{Point2, Sample2};
use crate::hrv::HrvReport;
use crate::risk::StudyTable;
use crate::tailest::EstimatorCurve;

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(PathBuf::from(path)),
        _ => Error::Io(e),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader)
}

fn parse_field(field: &str, row: usize, column: usize) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| Error::Parse {
        row,
        column,
        message: format!("not a number: {field:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            row,
            column,
            message: format!("non-finite value {field:?}"),
        });
    }
    Ok(v)
}

/// Rows of a numeric CSV table restricted to `columns`. A first row whose
/// selected fields are all non-numeric is taken as a header and skipped.
/// Row numbers in errors count physical records from 1, header included.
pub fn read_numeric_columns<R: Read>(reader: R, columns: &[usize]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv_reader(reader);
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let fields: Vec<Option<&str>> = columns.iter().map(|&c| record.get(c)).collect();
        if row == 1 && fields.iter().all(|f| f.is_none_or(|s| s.parse::<f64>().is_err())) {
            continue;
        }
        let mut values = Vec::with_capacity(columns.len());
        for (&c, f) in columns.iter().zip(&fields) {
            let field = f.ok_or_else(|| Error::Parse {
                row,
                column: c + 1,
                message: format!("row has {} fields", record.len()),
            })?;
            values.push(parse_field(field, row, c + 1)?);
        }
        out.push(values);
    }
    if out.is_empty() {
        return Err(Error::EmptyFile);
    }
    Ok(out)
}

/// Bivariate sample from columns `cols` (0-based) of a CSV stream.
pub fn read_xy<R: Read>(reader: R, cols: (usize, usize)) -> Result<Sample2> {
    Ok(read_numeric_columns(reader, &[cols.0, cols.1])?
        .into_iter()
        .map(|v| Point2::new(v[0], v[1]))
        .collect())
}

/// Bivariate sample from the first two columns of a CSV file.
pub fn read_xy_csv(path: impl AsRef<Path>) -> Result<Sample2> {
    read_xy(open(path.as_ref())?, (0, 1))
}

pub fn read_xy_csv_columns(path: impl AsRef<Path>, cols: (usize, usize)) -> Result<Sample2> {
    read_xy(open(path.as_ref())?, cols)
}

/// Single numeric column, e.g. a tail sample or a price series.
pub fn read_column_csv(path: impl AsRef<Path>, column: usize) -> Result<Vec<f64>> {
    Ok(read_numeric_columns(open(path.as_ref())?, &[column])?
        .into_iter()
        .map(|v| v[0])
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeRecord {
    pub node: String,
    pub out_degree: u64,
    pub in_degree: u64,
}

impl DegreeRecord {
    /// `(out, in)` as a point for the bivariate analysis.
    pub fn as_point(&self) -> Point2 {
        Point2::new(self.out_degree as f64, self.in_degree as f64)
    }
}

/// Degree counts from an edge list, one `src dst` pair per line separated by
/// whitespace or a comma. Fields past the second (timestamps) are ignored;
/// blank lines and lines starting with `#` or `%` are skipped. Nodes are
/// reported in order of first appearance and repeated edges count with
/// multiplicity.
pub fn parse_edges<R: BufRead>(reader: R) -> Result<Vec<DegreeRecord>> {
    let mut degrees: IndexMap<String, (u64, u64)> = IndexMap::new();
    let mut edges = 0usize;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let mut fields = trimmed
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty());
        let (Some(src), Some(dst)) = (fields.next(), fields.next()) else {
            return Err(Error::Parse {
                row: i + 1,
                column: 2,
                message: "expected a source and a destination".into(),
            });
        };
        degrees.entry(src.to_owned()).or_default().0 += 1;
        degrees.entry(dst.to_owned()).or_default().1 += 1;
        edges += 1;
    }
    if edges == 0 {
        return Err(Error::EmptyFile);
    }
    Ok(degrees
        .into_iter()
        .map(|(node, (out_degree, in_degree))| DegreeRecord {
            node,
            out_degree,
            in_degree,
        })
        .collect())
}

pub fn edges_to_degrees(path: impl AsRef<Path>) -> Result<Vec<DegreeRecord>> {
    parse_edges(BufReader::new(open(path.as_ref())?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReturnKind {
    /// `(P_t - P_{t-1}) / P_{t-1}`
    #[default]
    Simple,
    /// `ln(P_t / P_{t-1})`
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub kind: ReturnKind,
    /// One shorter than the price series.
    pub returns: Vec<f64>,
}

pub fn prices_to_returns(prices: &[f64], kind: ReturnKind) -> Result<ReturnSeries> {
    if prices.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: prices.len(),
        });
    }
    if let Some((index, &value)) = prices
        .iter()
        .enumerate()
        .find(|(_, &p)| !(p > 0.0 && p.is_finite()))
    {
        return Err(Error::NonPositivePrice { index, value });
    }
    let returns = prices
        .windows(2)
        .map(|w| match kind {
            ReturnKind::Simple => (w[1] - w[0]) / w[0],
            ReturnKind::Log => (w[1] / w[0]).ln(),
        })
        .collect();
    Ok(ReturnSeries { kind, returns })
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

/// `k,value`, or `theta,k,value` when every entry carries a theta.
pub fn write_curve_to<W: Write>(curve: &EstimatorCurve, w: W) -> Result<()> {
    let mut wtr = csv_writer(w);
    if curve.has_theta() {
        wtr.write_record(["theta", "k", "value"])?;
        for e in curve.entries() {
            let theta = e.theta.expect("has_theta checked every entry");
            wtr.write_record([theta.to_string(), e.k.to_string(), e.value.to_string()])?;
        }
    } else {
        wtr.write_record(["k", "value"])?;
        for e in curve.entries() {
            wtr.write_record([e.k.to_string(), e.value.to_string()])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_curve(curve: &EstimatorCurve, path: impl AsRef<Path>) -> Result<()> {
    write_curve_to(curve, create(path.as_ref())?)
}

pub fn write_report_to<W: Write>(report: &HrvReport, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, report)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn write_report(report: &HrvReport, path: impl AsRef<Path>) -> Result<()> {
    write_report_to(report, create(path.as_ref())?)
}

pub fn read_report(path: impl AsRef<Path>) -> Result<HrvReport> {
    Ok(serde_json::from_reader(BufReader::new(open(path.as_ref())?))?)
}

/// `x1,x2` with a header row.
pub fn write_sample_to<W: Write>(points: &[Point2], w: W) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(["x1", "x2"])?;
    for p in points {
        wtr.write_record([p.x1.to_string(), p.x2.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_sample(points: &[Point2], path: impl AsRef<Path>) -> Result<()> {
    write_sample_to(points, create(path.as_ref())?)
}

/// Diamond-plot data: `theta1,theta2,norm` for the retained points.
pub fn write_angles_to<W: Write>(angles: &AngularSample, w: W) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(["theta1", "theta2", "norm"])?;
    for (p, norm) in angles.points.iter().zip(&angles.norms) {
        wtr.write_record([
            (p.x1 / norm).to_string(),
            (p.x2 / norm).to_string(),
            norm.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_angles(angles: &AngularSample, path: impl AsRef<Path>) -> Result<()> {
    write_angles_to(angles, create(path.as_ref())?)
}

/// `mu1,mu2,weight,branch`, one row per atom.
pub fn write_measure_to<W: Write>(measure: &EmpiricalAngularMeasure, w: W) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(["mu1", "mu2", "weight", "branch"])?;
    for a in &measure.atoms {
        wtr.write_record([
            a.mu.x1.to_string(),
            a.mu.x2.to_string(),
            a.weight.to_string(),
            a.branch.as_str().to_owned(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_measure(measure: &EmpiricalAngularMeasure, path: impl AsRef<Path>) -> Result<()> {
    write_measure_to(measure, create(path.as_ref())?)
}

/// Per-replication rows `rep,quantity,x,ratio`.
pub fn write_study_rows_to<W: Write>(table: &StudyTable, w: W) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(["rep", "quantity", "x", "ratio"])?;
    for r in &table.rows {
        wtr.write_record([
            r.rep.to_string(),
            r.quantity.as_str().to_owned(),
            r.x.to_string(),
            r.ratio.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Boxplot statistics `quantity,x,min,q1,median,q3,max`.
pub fn write_study_summary_to<W: Write>(table: &StudyTable, w: W) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(["quantity", "x", "min", "q1", "median", "q3", "max"])?;
    for s in &table.summary {
        wtr.write_record([
            s.quantity.as_str().to_owned(),
            s.x.to_string(),
            s.min.to_string(),
            s.q1.to_string(),
            s.median.to_string(),
            s.q3.to_string(),
            s.max.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_study(
    table: &StudyTable,
    rows_path: impl AsRef<Path>,
    summary_path: impl AsRef<Path>,
) -> Result<()> {
    write_study_rows_to(table, create(rows_path.as_ref())?)?;
    write_study_summary_to(table, create(summary_path.as_ref())?)
}

/// `node,out_degree,in_degree`.
pub fn write_degrees_to<W: Write>(records: &[DegreeRecord], w: W) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(["node", "out_degree", "in_degree"])?;
    for r in records {
        wtr.write_record([r.node.clone(), r.out_degree.to_string(), r.in_degree.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_degrees(records: &[DegreeRecord], path: impl AsRef<Path>) -> Result<()> {
    write_degrees_to(records, create(path.as_ref())?)
}

/// One column per series under the given header names; all series must have
/// the same length.
pub fn write_columns_to<W: Write>(names: &[&str], columns: &[&[f64]], w: W) -> Result<()> {
    if names.len() != columns.len() {
        return Err(Error::LengthMismatch {
            left: names.len(),
            right: columns.len(),
        });
    }
    let len = columns.first().map_or(0, |c| c.len());
    if let Some(bad) = columns.iter().find(|c| c.len() != len) {
        return Err(Error::LengthMismatch {
            left: len,
            right: bad.len(),
        });
    }
    let mut wtr = csv_writer(w);
    wtr.write_record(names)?;
    for i in 0..len {
        wtr.write_record(columns.iter().map(|c| c[i].to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tailest::CurvePoint;

    fn xy(s: &str) -> Result<Sample2> {
        read_xy(s.as_bytes(), (0, 1))
    }

    #[test]
    fn reads_plain_and_header() {
        assert_eq!(
            xy("1.0,2.0\n3.0,4.0").unwrap(),
            vec![Point2::new(1.0, 2.0), Point2::new(3.0, 4.0)]
        );
        assert_eq!(xy("x,y\n1,2").unwrap(), vec![Point2::new(1.0, 2.0)]);
        assert_eq!(xy(" 1 , 2 \n\n3,4\n").unwrap().len(), 2);
    }

    #[test]
    fn parse_errors_carry_position() {
        match xy("1,abc") {
            Err(Error::Parse { row, column, .. }) => assert_eq!((row, column), (1, 2)),
            other => panic!("{other:?}"),
        }
        match xy("x,y\n1,2\n3,NaN") {
            Err(Error::Parse { row, column, .. }) => assert_eq!((row, column), (3, 2)),
            other => panic!("{other:?}"),
        }
        match xy("1,2\n3") {
            Err(Error::Parse { row, column, .. }) => assert_eq!((row, column), (2, 2)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(xy(""), Err(Error::EmptyFile)));
        assert!(matches!(xy("x,y\n"), Err(Error::EmptyFile)));
        assert!(matches!(
            read_xy_csv("/definitely/not/here.csv"),
            Err(Error::FileNotFound(_))
        ));
    }

    #[test]
    fn column_selection() {
        let s = read_xy("a,b,c\n1,2,3\n4,5,6".as_bytes(), (2, 0)).unwrap();
        assert_eq!(s, vec![Point2::new(3.0, 1.0), Point2::new(6.0, 4.0)]);
    }

    #[test]
    fn degree_counts() {
        let d = parse_edges("1 2\n1,3\n2\t1\n".as_bytes()).unwrap();
        let get = |n: &str| d.iter().find(|r| r.node == n).map(|r| (r.out_degree, r.in_degree));
        assert_eq!(d.len(), 3);
        assert_eq!(get("1"), Some((2, 1)));
        assert_eq!(get("2"), Some((1, 1)));
        assert_eq!(get("3"), Some((0, 1)));
        assert_eq!(d.iter().map(|r| r.node.as_str()).collect::<Vec<_>>(), ["1", "2", "3"]);
    }

    #[test]
    fn degree_edge_cases() {
        let d = parse_edges("1 1\n".as_bytes()).unwrap();
        assert_eq!(d, vec![DegreeRecord { node: "1".into(), out_degree: 1, in_degree: 1 }]);
        let d = parse_edges("% header\n# comment\n5 6 1234567\n5 6 1234568\n".as_bytes()).unwrap();
        assert_eq!(d[0].out_degree, 2);
        assert_eq!(d[1].in_degree, 2);
        assert!(matches!(parse_edges("# nothing\n".as_bytes()), Err(Error::EmptyFile)));
        assert!(matches!(
            parse_edges("1 2\n7\n".as_bytes()),
            Err(Error::Parse { row: 2, .. })
        ));
    }

    #[test]
    fn returns() {
        let r = prices_to_returns(&[100.0, 110.0, 99.0], ReturnKind::Simple).unwrap();
        assert!((r.returns[0] - 0.1).abs() < 1e-15);
        assert!((r.returns[1] + 0.1).abs() < 1e-15);
        let flat = prices_to_returns(&[5.0; 4], ReturnKind::Simple).unwrap();
        assert_eq!(flat.returns, vec![0.0; 3]);
        let l = prices_to_returns(&[1.0, std::f64::consts::E], ReturnKind::Log).unwrap();
        assert!((l.returns[0] - 1.0).abs() < 1e-15);
        assert!(matches!(
            prices_to_returns(&[1.0], ReturnKind::Simple),
            Err(Error::TooShort { needed: 2, got: 1 })
        ));
        assert!(matches!(
            prices_to_returns(&[1.0, 0.0, 2.0], ReturnKind::Simple),
            Err(Error::NonPositivePrice { index: 1, .. })
        ));
    }

    fn curve_text(c: &EstimatorCurve) -> String {
        let mut buf = Vec::new();
        write_curve_to(c, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn curve_csv() {
        let c = EstimatorCurve::from_entries(vec![CurvePoint { k: 10, value: 1.5, theta: None }]).unwrap();
        assert_eq!(curve_text(&c), "k,value\n10,1.5\n");
        let empty = EstimatorCurve::from_entries(vec![]).unwrap();
        assert_eq!(curve_text(&empty), "k,value\n");
        let t = EstimatorCurve::from_entries(vec![CurvePoint { k: 3, value: 2.0, theta: Some(0.5) }]).unwrap();
        assert_eq!(curve_text(&t), "theta,k,value\n0.5,3,2\n");
    }

    #[test]
    fn sample_round_trip_is_exact() {
        let pts = vec![Point2::new(0.1, 1e-300), Point2::new(1.0 / 3.0, 12345.678901234567)];
        let mut buf = Vec::new();
        write_sample_to(&pts, &mut buf).unwrap();
        assert_eq!(read_xy(buf.as_slice(), (0, 1)).unwrap(), pts);
    }

    #[test]
    fn columns_writer_checks_lengths() {
        let mut buf = Vec::new();
        write_columns_to(&["a", "b"], &[&[1.0, 2.0], &[3.0, 4.5]], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1,3\n2,4.5\n");
        assert!(write_columns_to(&["a", "b"], &[&[1.0], &[]], Vec::new()).is_err());
    }
}
