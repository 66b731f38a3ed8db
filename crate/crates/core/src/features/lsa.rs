use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::matrix::dot;
use crate::numerics::{truncated_svd, Matrix};

/// Power iterations used when the randomized SVD path is taken.
pub const LSA_POWER_ITERATIONS: usize = 2;

/// Projection onto the top right singular vectors of a document-term matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsaModel {
    /// Vocabulary size the model was fit on.
    pub dimension: usize,
    pub k: usize,
    pub singular_values: Vec<f64>,
    pub right_vectors: Vec<Vec<f64>>,
}

/// Fits LSA on training document vectors (one row per document).
pub fn fit_lsa(documents: &[Vec<f64>], k: usize, seed: u64) -> Result<LsaModel> {
    let m = Matrix::from_rows(documents)?;
    let max_k = m.rows().min(m.cols());
    if k == 0 || k > max_k {
        return Err(Error::invalid(format!(
            "lsa rank {k} out of range 1..={max_k} for {} documents x {} terms",
            m.rows(),
            m.cols()
        )));
    }
    let svd = truncated_svd(&m, k, seed, LSA_POWER_ITERATIONS)?;
    Ok(LsaModel {
        dimension: m.cols(),
        k,
        singular_values: svd.singular_values,
        right_vectors: svd.right_vectors,
    })
}

impl LsaModel {
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dimension {
            return Err(Error::invalid(format!(
                "lsa input has {} components, model expects {}",
                x.len(),
                self.dimension
            )));
        }
        Ok(self.right_vectors.iter().map(|v| dot(v, x)).collect())
    }
}

pub fn project_lsa(model: &LsaModel, x: &[f64]) -> Result<Vec<f64>> {
    model.project(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn fixture() -> Vec<Vec<f64>> {
        vec![
            vec![2.0, 1.0, 0.0, 0.0],
            vec![1.0, 2.0, 0.0, 1.0],
            vec![0.0, 0.0, 3.0, 1.0],
            vec![0.0, 1.0, 2.0, 2.0],
            vec![1.0, 0.0, 0.0, 1.0],
            vec![3.0, 1.0, 1.0, 0.0],
        ]
    }

    #[test]
    fn full_rank_is_isometry() {
        let docs = fixture();
        let model = fit_lsa(&docs, 4, 1).unwrap();
        for a in &docs {
            for b in &docs {
                let pa = model.project(a).unwrap();
                let pb = model.project(b).unwrap();
                assert_abs_diff_eq!(dot(&pa, &pb), dot(a, b), epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn rank_two_matches_dense_oracle() {
        let docs = fixture();
        let model = fit_lsa(&docs, 2, 1).unwrap();
        let m = nalgebra::DMatrix::from_fn(6, 4, |i, j| docs[i][j]);
        let svd = m.svd(false, true);
        let vt = svd.v_t.unwrap();
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        // singular vectors are defined up to sign; align each pair first
        let signs: Vec<f64> = order
            .iter()
            .take(2)
            .enumerate()
            .map(|(c, &row)| {
                let d: f64 = (0..4).map(|j| vt[(row, j)] * model.right_vectors[c][j]).sum();
                d.signum()
            })
            .collect();
        for doc in &docs {
            let ours = model.project(doc).unwrap();
            for (c, &row) in order.iter().take(2).enumerate() {
                let oracle: f64 = (0..4).map(|j| vt[(row, j)] * doc[j]).sum();
                assert_abs_diff_eq!(ours[c], signs[c] * oracle, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn zero_vector_and_bad_rank() {
        let model = fit_lsa(&fixture(), 2, 1).unwrap();
        assert_eq!(model.project(&[0.0; 4]).unwrap(), vec![0.0, 0.0]);
        assert!(model.project(&[0.0; 3]).is_err());
        assert!(fit_lsa(&fixture(), 5, 1).is_err());
        assert!(fit_lsa(&fixture(), 0, 1).is_err());
    }
}
