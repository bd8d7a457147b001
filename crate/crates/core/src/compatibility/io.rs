//! One CSV file per field component: a `# nx=..,ny=..,hx=..,hy=..,x0=..,y0=..`
//! comment line followed by `ny` rows of `nx` values.

use std::fmt::Write as _;

use super::{CompatError, Constraint, ShapeField};
use crate::numfmt::{fmt17, parse_f64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldHeader {
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    pub x0: f64,
    pub y0: f64,
}

pub fn write_field_csv(header: &FieldHeader, values: &[f64]) -> String {
    assert_eq!(values.len(), header.nx * header.ny, "component length does not match header");
    let mut s = format!(
        "# nx={},ny={},hx={},hy={},x0={},y0={}\n",
        header.nx,
        header.ny,
        fmt17(header.hx),
        fmt17(header.hy),
        fmt17(header.x0),
        fmt17(header.y0)
    );
    for row in values.chunks(header.nx.max(1)) {
        let line: Vec<String> = row.iter().map(|v| fmt17(*v)).collect();
        writeln!(s, "{}", line.join(",")).unwrap();
    }
    s
}

fn parse_err(line: usize, msg: impl Into<String>) -> CompatError {
    CompatError::Invalid(format!("line {line}: {}", msg.into()))
}

pub fn parse_field_csv(text: &str) -> Result<(FieldHeader, Vec<f64>), CompatError> {
    let mut lines = text.lines();
    let head = lines.next().and_then(|l| l.strip_prefix('#')).ok_or_else(|| parse_err(1, "missing '# nx=..' header"))?;
    let get = |key: &str| -> Result<String, CompatError> {
        head.split(',')
            .filter_map(|kv| kv.trim().split_once('='))
            .find(|(k, _)| k.trim() == key)
            .map(|(_, v)| v.trim().to_string())
            .ok_or_else(|| parse_err(1, format!("header lacks {key}")))
    };
    let int = |v: String| v.parse::<usize>().map_err(|e| parse_err(1, e.to_string()));
    let float = |v: String| parse_f64(&v).map_err(|e| parse_err(1, e));
    let header = FieldHeader {
        nx: int(get("nx")?)?,
        ny: int(get("ny")?)?,
        hx: float(get("hx")?)?,
        hy: float(get("hy")?)?,
        x0: float(get("x0")?)?,
        y0: float(get("y0")?)?,
    };
    let mut values = Vec::with_capacity(header.nx * header.ny);
    let mut rows = 0;
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let no = k + 2;
        let row = line.split(',').map(parse_f64).collect::<Result<Vec<_>, _>>().map_err(|e| parse_err(no, e))?;
        if row.len() != header.nx {
            return Err(parse_err(no, format!("expected {} values, got {}", header.nx, row.len())));
        }
        values.extend(row);
        rows += 1;
    }
    if rows != header.ny {
        return Err(parse_err(1, format!("expected {} rows, got {rows}", header.ny)));
    }
    Ok((header, values))
}

/// Assembles a field from three component files; headers must agree.
pub fn read_shape_field(h11: &str, h12: &str, h22: &str, constraint: Constraint) -> Result<(FieldHeader, ShapeField), CompatError> {
    let (a, v11) = parse_field_csv(h11)?;
    let (b, v12) = parse_field_csv(h12)?;
    let (c, v22) = parse_field_csv(h22)?;
    if a != b || a != c {
        return Err(CompatError::Invalid("component headers disagree".into()));
    }
    Ok((a, ShapeField { nx: a.nx, ny: a.ny, h11: v11, h12: v12, h22: v22, constraint }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_bit_exact() {
        let h = FieldHeader { nx: 3, ny: 2, hx: 0.1, hy: 1.0 / 3.0, x0: -0.5, y0: 0.25 };
        let v = vec![0.1, -2.5e-300, std::f64::consts::PI, 1.0 / 7.0, 0.0, -1e17];
        let text = write_field_csv(&h, &v);
        assert!(text.starts_with("# nx=3,ny=2,"));
        let (h2, v2) = parse_field_csv(&text).unwrap();
        assert_eq!(h, h2);
        assert!(v.iter().zip(&v2).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn malformed_rows_name_the_line() {
        let text = "# nx=2,ny=2,hx=1,hy=1,x0=0,y0=0\n1,2\n3\n";
        let e = parse_field_csv(text).unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
        assert!(parse_field_csv("1,2\n").is_err());
        assert!(parse_field_csv("# nx=2,ny=3,hx=1,hy=1,x0=0,y0=0\n1,2\n").is_err());
    }
}
