//! Pose CSV files: header `timestamp_ns,x,y,z,roll,pitch,yaw`, radians.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Pose;

pub const HEADER: [&str; 7] = ["timestamp_ns", "x", "y", "z", "roll", "pitch", "yaw"];

const WHAT: &str = "pose CSV";

pub fn parse(reader: impl Read) -> Result<Vec<Pose>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::parse(WHAT, e.to_string()))?
        .clone();
    if header.iter().ne(HEADER) {
        return Err(Error::parse(
            WHAT,
            format!("expected header `{}`, found `{}`", HEADER.join(","), header.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut poses = Vec::new();
    for row in rdr.deserialize::<Pose>() {
        let pose = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::parse(WHAT, format!("line {line}: {e}"))
        })?;
        pose.validate()?;
        poses.push(pose);
    }
    Ok(poses)
}

pub fn parse_str(text: &str) -> Result<Vec<Pose>> {
    parse(text.as_bytes())
}

pub fn read(path: &Path) -> Result<Vec<Pose>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse(std::io::BufReader::new(file))
}

pub fn write(writer: impl Write, poses: &[Pose]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for p in poses {
        w.serialize(p).map_err(|e| Error::parse(WHAT, e.to_string()))?;
    }
    if poses.is_empty() {
        w.write_record(HEADER).map_err(|e| Error::parse(WHAT, e.to_string()))?;
    }
    w.flush().map_err(|e| Error::parse(WHAT, e.to_string()))?;
    Ok(())
}

pub fn write_file(path: &Path, poses: &[Pose]) -> Result<()> {
    let mut buf = Vec::new();
    write(&mut buf, poses)?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}
