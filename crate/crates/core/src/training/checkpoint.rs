//! Text checkpoint container.
//!
//! ```text
//! PUPCKPT1
//! variant pup
//! seed 42
//! config alpha = 1
//! tensor global 715 48
//! <48 space-separated values>   (one line per row, row-major)
//! ...
//! end
//! ```
//! Values use the shortest round-trip decimal form, so a reload is
//! bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{PupError, Result};
use crate::matrix::Matrix;
use crate::model::Variant;

pub const MAGIC: &str = "PUPCKPT1";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub variant: Variant,
    pub seed: u64,
    /// Echo of the training configuration as `key = value` pairs.
    pub config: Vec<(String, String)>,
    pub tensors: Vec<(String, Matrix)>,
}

impl Checkpoint {
    pub fn tensor(&self, name: &str) -> Option<&Matrix> {
        self.tensors.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }

    pub fn config_value(&self, key: &str) -> Option<&str> {
        self.config
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC}");
        let _ = writeln!(out, "variant {}", self.variant);
        let _ = writeln!(out, "seed {}", self.seed);
        for (k, v) in &self.config {
            let _ = writeln!(out, "config {k} = {v}");
        }
        for (name, m) in &self.tensors {
            let _ = writeln!(out, "tensor {name} {} {}", m.rows(), m.cols());
            for r in 0..m.rows() {
                let mut first = true;
                for x in m.row(r) {
                    if !first {
                        out.push(' ');
                    }
                    first = false;
                    let _ = write!(out, "{x}");
                }
                out.push('\n');
            }
        }
        out.push_str("end\n");
        out
    }

    pub fn parse(text: &str) -> Result<Checkpoint> {
        let bad = |m: String| PupError::Checkpoint(m);
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, MAGIC)) => {}
            other => {
                return Err(bad(format!(
                    "missing {MAGIC} header, got {:?}",
                    other.map(|l| l.1)
                )))
            }
        }
        let mut variant = None;
        let mut seed = None;
        let mut config = Vec::new();
        let mut tensors = Vec::new();
        let mut finished = false;
        while let Some((no, line)) = lines.next() {
            let (head, rest) = line.split_once(' ').unwrap_or((line, ""));
            match head {
                "variant" => {
                    variant = Some(rest.parse::<Variant>().map_err(|e| bad(e.to_string()))?)
                }
                "seed" => {
                    seed = Some(
                        rest.parse::<u64>()
                            .map_err(|e| bad(format!("line {}: {e}", no + 1)))?,
                    )
                }
                "config" => {
                    let (k, v) = rest
                        .split_once(" = ")
                        .ok_or_else(|| bad(format!("line {}: bad config echo", no + 1)))?;
                    config.push((k.to_string(), v.to_string()));
                }
                "tensor" => {
                    let parts: Vec<&str> = rest.split(' ').collect();
                    if parts.len() != 3 {
                        return Err(bad(format!("line {}: bad tensor header", no + 1)));
                    }
                    let rows: usize = parts[1]
                        .parse()
                        .map_err(|_| bad(format!("line {}: bad rows", no + 1)))?;
                    let cols: usize = parts[2]
                        .parse()
                        .map_err(|_| bad(format!("line {}: bad cols", no + 1)))?;
                    let mut data = Vec::with_capacity(rows * cols);
                    for _ in 0..rows {
                        let (rno, row) =
                            lines.next().ok_or_else(|| bad("truncated tensor".into()))?;
                        let before = data.len();
                        for tok in row.split(' ').filter(|t| !t.is_empty()) {
                            data.push(
                                tok.parse::<f64>()
                                    .map_err(|e| bad(format!("line {}: {e}", rno + 1)))?,
                            );
                        }
                        if data.len() - before != cols {
                            return Err(bad(format!("line {}: expected {cols} values", rno + 1)));
                        }
                    }
                    tensors.push((parts[0].to_string(), Matrix::from_vec(rows, cols, data)));
                }
                "end" => {
                    finished = true;
                    break;
                }
                "" => {}
                other => return Err(bad(format!("line {}: unexpected {other:?}", no + 1))),
            }
        }
        if !finished {
            return Err(bad("missing end marker".into()));
        }
        Ok(Checkpoint {
            variant: variant.ok_or_else(|| bad("missing variant".into()))?,
            seed: seed.ok_or_else(|| bad("missing seed".into()))?,
            config,
            tensors,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| PupError::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Checkpoint> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| PupError::io(path, e))?;
        Checkpoint::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn text_round_trip_is_bit_exact(
            values in proptest::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 6),
            seed in any::<u64>(),
        ) {
            let ck = Checkpoint {
                variant: Variant::Fm,
                seed,
                config: vec![("alpha".into(), "0.5".into())],
                tensors: vec![("table".into(), Matrix::from_vec(2, 3, values.clone()))],
            };
            let back = Checkpoint::parse(&ck.to_text()).unwrap();
            let got = back.tensor("table").unwrap().as_slice();
            prop_assert!(got.iter().zip(&values).all(|(a, b)| a.to_bits() == b.to_bits()));
            prop_assert_eq!(back, ck);
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(Checkpoint::parse("hello").is_err());
        assert!(Checkpoint::parse("PUPCKPT1\nvariant pup\nseed 1\n").is_err());
        assert!(Checkpoint::parse("PUPCKPT1\nvariant nope\nseed 1\nend\n").is_err());
        assert!(
            Checkpoint::parse("PUPCKPT1\nvariant pup\nseed 1\ntensor t 1 2\n1.0\nend\n").is_err()
        );
    }
}
