//! Cosine-similarity condensation diagnostics.
//!
//! A neuron is represented by its incoming weight row (bias excluded). The
//! similarity of two neurons is `u.v / (|u| |v|)`; rows with norm below
//! [`ZERO_ROW_NORM`] are similar to nothing, themselves included.

use crate::csv::{fmt_f64, parse_f64_row, CsvBuf};
use crate::net::Layer;
use crate::{Error, Result};

pub const ZERO_ROW_NORM: f64 = 1e-12;
pub const DEFAULT_THRESHOLD: f64 = 0.95;

/// Symmetric `m x m` neuron similarity matrix of one layer at one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct CondensationMatrix {
    pub m: usize,
    pub values: Vec<f64>,
    pub layer_index: usize,
    pub epoch: usize,
}

impl CondensationMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.m + j]
    }
}

/// Pairwise cosine similarity between the rows of an `m x d` matrix.
pub fn cosine_matrix(weights: &[f64], m: usize, d: usize) -> Result<Vec<f64>> {
    if m == 0 || weights.len() != m * d {
        return Err(Error::Shape(format!("{} weights do not form a {m} x {d} matrix", weights.len())));
    }
    let rows: Vec<&[f64]> = weights.chunks_exact(d.max(1)).collect();
    let norms: Vec<f64> = rows.iter().map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let mut values = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let v = if norms[i] < ZERO_ROW_NORM || norms[j] < ZERO_ROW_NORM {
                0.0
            } else if i == j {
                1.0
            } else {
                let dot: f64 = rows[i].iter().zip(rows[j]).map(|(a, b)| a * b).sum();
                (dot / (norms[i] * norms[j])).clamp(-1.0, 1.0)
            };
            values[i * m + j] = v;
            values[j * m + i] = v;
        }
    }
    Ok(values)
}

/// Similarity matrix of a layer's neurons.
pub fn layer_condensation(layer: &Layer, layer_index: usize, epoch: usize) -> CondensationMatrix {
    let values = cosine_matrix(&layer.weights, layer.out_dim, layer.in_dim)
        .expect("layer weights match their shape");
    CondensationMatrix { m: layer.out_dim, values, layer_index, epoch }
}

/// Fraction of off-diagonal neuron pairs with `|similarity| > threshold`.
/// A single neuron has no pairs and scores 0.
pub fn condensation_score(matrix: &CondensationMatrix, threshold: f64) -> Result<f64> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidConfig(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    let m = matrix.m;
    if m < 2 {
        return Ok(0.0);
    }
    let mut hits = 0usize;
    for i in 0..m {
        for j in i + 1..m {
            if matrix.get(i, j).abs() > threshold {
                hits += 1;
            }
        }
    }
    Ok(hits as f64 / (m * (m - 1) / 2) as f64)
}

/// Heatmap CSV: `# layer=<i> epoch=<e> m=<m>` then `m` rows of `m` values.
pub fn export_heatmap(matrix: &CondensationMatrix) -> String {
    let mut out = String::new();
    out.push_str(&format!("# layer={} epoch={} m={}\n", matrix.layer_index, matrix.epoch, matrix.m));
    let mut body = CsvBuf::default();
    for row in matrix.values.chunks_exact(matrix.m) {
        body.row(row.iter().map(|&v| fmt_f64(v)));
    }
    out.push_str(body.as_str());
    out
}

pub fn parse_heatmap(text: &str) -> Result<CondensationMatrix> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .and_then(|h| h.strip_prefix("# "))
        .ok_or_else(|| Error::Parse("missing heatmap header".into()))?;
    let mut fields = [None; 3];
    for kv in header.split_whitespace() {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::Parse(format!("bad header field {kv:?}")))?;
        let slot = match k {
            "layer" => 0,
            "epoch" => 1,
            "m" => 2,
            _ => continue,
        };
        fields[slot] = Some(v.parse::<usize>().map_err(|e| Error::Parse(format!("{k}: {e}")))?);
    }
    let [Some(layer_index), Some(epoch), Some(m)] = fields else {
        return Err(Error::Parse("heatmap header needs layer=, epoch= and m=".into()));
    };
    let mut values = Vec::with_capacity(m * m);
    for line in lines.filter(|l| !l.is_empty()) {
        let row = parse_f64_row(line)?;
        if row.len() != m {
            return Err(Error::Parse(format!("row has {} values, expected {m}", row.len())));
        }
        values.extend(row);
    }
    if values.len() != m * m {
        return Err(Error::Parse(format!("expected {m} rows")));
    }
    Ok(CondensationMatrix { m, values, layer_index, epoch })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat(w: &[f64], m: usize, d: usize) -> CondensationMatrix {
        CondensationMatrix { m, values: cosine_matrix(w, m, d).unwrap(), layer_index: 0, epoch: 0 }
    }

    #[test]
    fn hand_values() {
        assert!((cosine_matrix(&[1., 2., 2., 4.], 2, 2).unwrap()[1] - 1.0).abs() < 1e-15);
        assert_eq!(cosine_matrix(&[1., 0., 0., 1.], 2, 2).unwrap()[1], 0.0);
        let v = cosine_matrix(&[1., 0., 1., 1.], 2, 2).unwrap()[1];
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((v - 0.70711).abs() < 1e-5);
    }

    #[test]
    fn zero_rows_are_similar_to_nothing() {
        let v = cosine_matrix(&[0., 0., 1., 1.], 2, 2).unwrap();
        assert_eq!(v, vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn scores() {
        assert_eq!(condensation_score(&mat(&[1., 2., 1., 2., 1., 2.], 3, 2), 0.95).unwrap(), 1.0);
        assert_eq!(condensation_score(&mat(&[1., 0., 0., 0., 1., 0., 0., 0., 1.], 3, 3), 0.95).unwrap(), 0.0);
        let s = condensation_score(&mat(&[1., 0., 2., 0., 0., 1.], 3, 2), 0.95).unwrap();
        assert!((s - 1.0 / 3.0).abs() < 1e-15);
        // anti-aligned neurons count as condensed
        assert_eq!(condensation_score(&mat(&[1., 1., -1., -1.], 2, 2), 0.95).unwrap(), 1.0);
        assert!(condensation_score(&mat(&[1., 1.], 1, 2), 1.0).is_err());
    }

    #[test]
    fn identity_heatmap() {
        let m = CondensationMatrix { m: 2, values: vec![1., 0., 0., 1.], layer_index: 1, epoch: 50 };
        assert_eq!(export_heatmap(&m), "# layer=1 epoch=50 m=2\n1,0\n0,1\n");
        assert_eq!(parse_heatmap(&export_heatmap(&m)).unwrap(), m);
    }

    fn weights() -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
        (1usize..7, 1usize..5).prop_flat_map(|(m, d)| {
            (Just(m), Just(d), prop::collection::vec(-3.0f64..3.0, m * d))
        })
    }

    proptest! {
        #[test]
        fn matrix_invariants((m, d, w) in weights()) {
            let v = cosine_matrix(&w, m, d).unwrap();
            for i in 0..m {
                for j in 0..m {
                    prop_assert_eq!(v[i * m + j], v[j * m + i]);
                    prop_assert!(v[i * m + j].abs() <= 1.0);
                }
                let norm: f64 = w[i * d..(i + 1) * d].iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm >= ZERO_ROW_NORM {
                    prop_assert_eq!(v[i * m + i], 1.0);
                }
            }
        }

        #[test]
        fn scale_invariant((m, d, w) in weights(), c in 1e-3f64..1e3) {
            let a = cosine_matrix(&w, m, d).unwrap();
            let scaled: Vec<f64> = w.iter().map(|x| c * x).collect();
            let b = cosine_matrix(&scaled, m, d).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }

        #[test]
        fn permutation_equivariant((m, d, w) in weights(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            let mut perm: Vec<usize> = (0..m).collect();
            perm.shuffle(&mut crate::rng::root(seed));
            let permuted: Vec<f64> = perm.iter().flat_map(|&p| w[p * d..(p + 1) * d].to_vec()).collect();
            let a = cosine_matrix(&w, m, d).unwrap();
            let b = cosine_matrix(&permuted, m, d).unwrap();
            for i in 0..m {
                for j in 0..m {
                    prop_assert_eq!(b[i * m + j], a[perm[i] * m + perm[j]]);
                }
            }
        }

        #[test]
        fn score_non_increasing_in_threshold((m, d, w) in weights(), t1 in 0.01f64..0.99, t2 in 0.01f64..0.99) {
            let mx = mat(&w, m, d);
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            prop_assert!(condensation_score(&mx, lo).unwrap() >= condensation_score(&mx, hi).unwrap());
        }

        #[test]
        fn heatmap_roundtrip_is_bit_exact((m, d, w) in weights(), epoch in 0usize..1000) {
            let mx = CondensationMatrix { m, values: cosine_matrix(&w, m, d).unwrap(), layer_index: 2, epoch };
            let back = parse_heatmap(&export_heatmap(&mx)).unwrap();
            prop_assert_eq!(back.epoch, epoch);
            for (a, b) in mx.values.iter().zip(&back.values) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
