//! Plain-text field dumps: a header line `nx ny h x0 y0` followed by one value
//! per line in row-major order, all at 17 significant digits.

use std::io::{BufRead, Write};

use super::{GridSpec, ScalarField};
use crate::error::{LabError, Result};

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_field(u: &ScalarField, mut w: impl Write) -> Result<()> {
    let g = u.grid();
    let o = g.origin();
    writeln!(w, "{} {} {} {} {}", g.nx(), g.ny(), fmt(g.h()), fmt(o[0]), fmt(o[1]))?;
    let mut buf = String::with_capacity(24 * u.values().len());
    for v in u.values() {
        buf.push_str(&fmt(*v));
        buf.push('\n');
    }
    w.write_all(buf.as_bytes())?;
    Ok(())
}

pub fn read_field(r: impl BufRead) -> Result<ScalarField> {
    let mut lines = r.lines();
    let perr = |line: usize, msg: String| LabError::Parse { line, msg };
    let header = lines.next().ok_or_else(|| perr(1, "empty dump".into()))??;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 5 {
        return Err(perr(1, format!("expected `nx ny h x0 y0`, got `{header}`")));
    }
    let nx: usize = parts[0].parse().map_err(|e| perr(1, format!("nx: {e}")))?;
    let ny: usize = parts[1].parse().map_err(|e| perr(1, format!("ny: {e}")))?;
    let float = |s: &str, what: &str| -> Result<f64> { s.parse().map_err(|e| perr(1, format!("{what}: {e}"))) };
    let h = float(parts[2], "h")?;
    let x0 = float(parts[3], "x0")?;
    let y0 = float(parts[4], "y0")?;
    let grid = GridSpec::new([x0, y0], h, nx, ny)?;
    let mut values = Vec::with_capacity(grid.len());
    for (k, line) in lines.enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        values.push(t.parse::<f64>().map_err(|e| perr(k + 2, format!("{e}")))?);
    }
    ScalarField::new(grid, values)
}

pub fn save_field(u: &ScalarField, path: &std::path::Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_field(u, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_field(path: &std::path::Path) -> Result<ScalarField> {
    let f = std::fs::File::open(path)?;
    read_field(std::io::BufReader::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn dump_round_trips_bit_exactly(vals in proptest::collection::vec(-1e300f64..1e300, 12),
                                        h in 1e-6f64..10.0, x0 in -1e3f64..1e3) {
            let g = GridSpec::new([x0, -x0], h, 4, 3).unwrap();
            let u = ScalarField::new(g, vals).unwrap();
            let mut buf = Vec::new();
            write_field(&u, &mut buf).unwrap();
            let back = read_field(&buf[..]).unwrap();
            prop_assert_eq!(back.grid(), u.grid());
            for (a, b) in back.values().iter().zip(u.values()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
