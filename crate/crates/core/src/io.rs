//! JSON interchange with floats written to 17 significant digits.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cocycle::CyclicCocycle;
use crate::error::{CoreError, Result};
use crate::linalg::Matrix;

/// `x` with 17 significant digits, enough for a bit-exact round trip.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    format!("{x:.16e}")
}

/// `serde_json` formatter that prints every `f64` through [`format_float`].
#[derive(Clone, Copy, Debug, Default)]
pub struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(format_float(value).as_bytes())
    }
}

/// Serializes any value with [`FullPrecision`] floats.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    value.serialize(&mut ser).map_err(|e| CoreError::Schema(e.to_string()))?;
    String::from_utf8(buf).map_err(|e| CoreError::Schema(e.to_string()))
}

#[derive(Serialize, Deserialize)]
struct CocycleFile {
    dim: usize,
    period: usize,
    matrices: Vec<Vec<f64>>,
}

pub fn cocycle_to_json(c: &CyclicCocycle) -> Result<String> {
    let d = c.dim();
    let matrices = c.maps().iter().map(|a| (0..d).flat_map(|r| (0..d).map(move |col| a[(r, col)])).collect()).collect();
    to_json(&CocycleFile { dim: d, period: c.period(), matrices })
}

/// Parses and validates a cocycle file.
pub fn cocycle_from_json(text: &str) -> Result<CyclicCocycle> {
    let f: CocycleFile = serde_json::from_str(text).map_err(|e| CoreError::Schema(e.to_string()))?;
    if f.dim == 0 {
        return Err(CoreError::Schema("dim must be positive".into()));
    }
    if f.matrices.len() != f.period {
        return Err(CoreError::Schema(format!("period is {} but {} matrices were given", f.period, f.matrices.len())));
    }
    let mut maps = Vec::with_capacity(f.period);
    for (j, m) in f.matrices.iter().enumerate() {
        if m.len() != f.dim * f.dim {
            return Err(CoreError::Schema(format!("matrix {j} has {} entries, expected {}", m.len(), f.dim * f.dim)));
        }
        maps.push(Matrix::from_row_slice(f.dim, f.dim, m));
    }
    CyclicCocycle::new(maps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::LyapunovGraph;

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-2.0), "-2.0000000000000000e0");
        let x = 1.0 / 3.0;
        assert_eq!(format_float(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn cocycle_round_trip() {
        let a = Matrix::from_row_slice(2, 2, &[0.1, 0.2, -0.3, 1.0 / 7.0]);
        let c = CyclicCocycle::new(vec![a.clone(), a.transpose()]).unwrap();
        let s = cocycle_to_json(&c).unwrap();
        assert!(s.starts_with(r#"{"dim":2,"period":2,"matrices":[[1.0000000000000001e-1,"#));
        assert_eq!(cocycle_from_json(&s).unwrap(), c);
    }

    #[test]
    fn graph_round_trip() {
        let g = LyapunovGraph::new(vec![0.0, -0.7, 0.1]).unwrap();
        let s = to_json(&g).unwrap();
        let back: LyapunovGraph = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(cocycle_from_json("{\"dim\":2}"), Err(CoreError::Schema(_))));
        let bad = r#"{"dim":2,"period":1,"matrices":[[1,0,0]]}"#;
        assert!(matches!(cocycle_from_json(bad), Err(CoreError::Schema(_))));
        let count = r#"{"dim":1,"period":2,"matrices":[[1]]}"#;
        assert!(matches!(cocycle_from_json(count), Err(CoreError::Schema(_))));
    }
}
