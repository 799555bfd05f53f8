//! Text point files: an optional `pargeo <d>` header, then one point per line
//! as whitespace-separated decimal floats. Blank lines are ignored.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::point::PointSet;

pub fn read_points(reader: impl BufRead) -> Result<PointSet> {
    let mut dim: Option<usize> = None;
    let mut coords = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if let Some(rest) = text.strip_prefix("pargeo") {
            if dim.is_some() || !coords.is_empty() {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "header must come first".into(),
                });
            }
            let d: usize = rest.trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("bad header {text:?}"),
            })?;
            if d == 0 {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "dimension must be positive".into(),
                });
            }
            dim = Some(d);
            continue;
        }
        let row: Vec<f64> = text
            .split_whitespace()
            .map(|f| match f.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Parse {
                    line: lineno,
                    msg: format!("{f:?} is not a finite number"),
                }),
            })
            .collect::<Result<_>>()?;
        let d = *dim.get_or_insert(row.len());
        if row.len() != d {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected {d} fields, found {}", row.len()),
            });
        }
        coords.extend(row);
    }
    let Some(d) = dim else {
        return Err(Error::Parse {
            line: 0,
            msg: "no header and no points: dimension unknown".into(),
        });
    };
    PointSet::new(d, coords)
}

pub fn read_points_file(path: &std::path::Path) -> Result<PointSet> {
    let f = std::fs::File::open(path)?;
    read_points(std::io::BufReader::new(f))
}

/// Writes the header and every point. Floats use the shortest
/// representation that parses back to the same value.
pub fn write_points(mut w: impl Write, points: &PointSet) -> Result<()> {
    writeln!(w, "pargeo {}", points.dim())?;
    let mut line = String::new();
    for p in points.iter() {
        line.clear();
        for (j, c) in p.iter().enumerate() {
            if j > 0 {
                line.push(' ');
            }
            line.push_str(&c.to_string());
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_points_file(path: &std::path::Path, points: &PointSet) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_points(std::io::BufWriter::new(f), points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_on_sphere;
    use proptest::prelude::*;

    #[test]
    fn header_optional() {
        let a = read_points("pargeo 2\n1 2\n3 4\n".as_bytes()).unwrap();
        let b = read_points("1 2\n\n3 4\n".as_bytes()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match read_points("pargeo 2\n1 2\n3\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(read_points("1 nan\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
        assert!(read_points("".as_bytes()).is_err());
        let empty = read_points("pargeo 3\n".as_bytes()).unwrap();
        assert!(empty.is_empty() && empty.dim() == 3);
    }

    proptest! {
        #[test]
        fn round_trip(seed in 0u64..1000, d in 2usize..5) {
            let p = gen_on_sphere(50, d, seed);
            let mut buf = Vec::new();
            write_points(&mut buf, &p).unwrap();
            prop_assert_eq!(read_points(buf.as_slice()).unwrap(), p);
        }
    }
}
