//! CSV formats read and written by the command-line tool.

use std::io::{Read, Write};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use crate::geometry::{Beacon, Deployment, Domain, Point};
use crate::sigmap::SignatureMap;

pub const DEPLOYMENT_HEADER: [&str; 4] = ["id", "x", "y", "r"];

#[derive(Debug, Deserialize)]
struct BeaconRow {
    #[allow(dead_code)]
    id: String,
    x: f64,
    y: f64,
    r: f64,
}

/// Parse `id,x,y,r` rows; `#` lines are skipped and row order is beacon order.
pub fn read_deployment<R: Read>(reader: R, domain: Domain) -> Result<Deployment> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().context("reading deployment header")?.clone();
    if header.iter().ne(DEPLOYMENT_HEADER) {
        bail!(
            "deployment header must be `id,x,y,r`, got `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        );
    }
    let mut beacons = Vec::new();
    for (i, row) in rdr.deserialize::<BeaconRow>().enumerate() {
        let row = row.with_context(|| format!("deployment row {}", i + 1))?;
        let p = Point::new(row.x, row.y).with_context(|| format!("deployment row {}", i + 1))?;
        beacons.push(Beacon::new(p, row.r).with_context(|| format!("deployment row {}", i + 1))?);
    }
    Ok(Deployment::new(domain, beacons)?)
}

pub fn write_deployment<W: Write + ?Sized>(out: &mut W, dep: &Deployment) -> std::io::Result<()> {
    writeln!(out, "{}", DEPLOYMENT_HEADER.join(","))?;
    for (i, b) in dep.beacons().iter().enumerate() {
        writeln!(out, "{},{},{},{}", i, b.position.x, b.position.y, b.radius)?;
    }
    Ok(())
}

/// `cell_ix,cell_iy,signature` rows in row-major cell order.
pub fn write_signature_dump<W: Write + ?Sized>(
    out: &mut W,
    map: &SignatureMap,
) -> std::io::Result<()> {
    writeln!(out, "cell_ix,cell_iy,signature")?;
    for (ix, iy, sig) in map.cells() {
        writeln!(out, "{ix},{iy},{sig}")?;
    }
    Ok(())
}

/// Inclusive `start:stop:step` range.
pub fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, step] = parts[..] else {
        bail!("range {spec:?} must look like start:stop:step");
    };
    let num = |s: &str, what: &str| -> Result<f64> {
        let v: f64 = s
            .trim()
            .parse()
            .with_context(|| format!("range {what} {s:?} is not a number"))?;
        if !v.is_finite() {
            bail!("range {what} must be finite");
        }
        Ok(v)
    };
    let (start, stop, step) = (num(start, "start")?, num(stop, "stop")?, num(step, "step")?);
    if step <= 0.0 {
        bail!("range step must be > 0, got {step}");
    }
    if start > stop {
        bail!("range start {start} exceeds stop {stop}");
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    // snap away accumulated float noise so 0.1-steps print and seed cleanly
    Ok((0..n)
        .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigmap::{build_signature_map, GridSpec};

    #[test]
    fn reads_deployment_with_comments() {
        let text = "# generated\nid,x,y,r\n0, 50,50,10\nb1,1.5,2,0\n";
        let dep = read_deployment(text.as_bytes(), Domain::default()).unwrap();
        assert_eq!(dep.len(), 2);
        assert_eq!(dep.beacons()[0].radius, 10.0);
        assert_eq!(dep.beacons()[1].position.x, 1.5);
    }

    #[test]
    fn header_only_is_empty_deployment() {
        let dep = read_deployment("id,x,y,r\n".as_bytes(), Domain::default()).unwrap();
        assert!(dep.is_empty());
    }

    #[test]
    fn rejects_malformed_deployments() {
        let d = Domain::default();
        assert!(read_deployment("x,y,r\n1,2,3\n".as_bytes(), d).is_err());
        assert!(read_deployment("id,x,y,r\n0,abc,2,3\n".as_bytes(), d).is_err());
        assert!(read_deployment("id,x,y,r\n0,1,2\n".as_bytes(), d).is_err());
        assert!(read_deployment("id,x,y,r\n0,1,2,-3\n".as_bytes(), d).is_err());
        assert!(read_deployment("id,x,y,r\n0,101,2,3\n".as_bytes(), d).is_err());
    }

    #[test]
    fn deployment_round_trip() {
        let dep = Deployment::new(
            Domain::default(),
            vec![
                Beacon::new(Point::new(0.1, 99.999).unwrap(), 12.25).unwrap(),
                Beacon::new(Point::new(33.333333333333336, 0.0).unwrap(), 0.0).unwrap(),
            ],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_deployment(&mut buf, &dep).unwrap();
        assert_eq!(read_deployment(&buf[..], Domain::default()).unwrap(), dep);
    }

    #[test]
    fn dump_rows_row_major() {
        let d = Domain::new(3.0, 2.0).unwrap();
        let dep = Deployment::new(
            d,
            vec![Beacon::new(Point::new(0.0, 0.0).unwrap(), 1.0).unwrap()],
        )
        .unwrap();
        let map = build_signature_map(&dep, &GridSpec::new(d, 1.0).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_signature_dump(&mut buf, &map).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "cell_ix,cell_iy,signature\n0,0,1\n1,0,0\n2,0,0\n0,1,0\n1,1,0\n2,1,0\n"
        );
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("25:45:1").unwrap().len(), 21);
        assert_eq!(
            parse_range("5:95:5").unwrap(),
            (1..=19).map(|i| i as f64 * 5.0).collect::<Vec<_>>()
        );
        assert_eq!(parse_range("0:0.3:0.1").unwrap(), vec![0.0, 0.1, 0.2, 0.3]);
        assert_eq!(parse_range("7:7:1").unwrap(), vec![7.0]);
        assert!(parse_range("45:25:1").is_err());
        assert!(parse_range("1:5:0").is_err());
        assert!(parse_range("1:5").is_err());
        assert!(parse_range("a:5:1").is_err());
    }
}
