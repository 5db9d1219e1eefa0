//! k-nearest-neighbour regression under Euclidean distance.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{Dataset, LearnError, Predict};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub train: Dataset,
}

impl KnnModel {
    pub fn fit(train: &Dataset, k: usize) -> Result<Self, LearnError> {
        train.validate()?;
        if train.is_empty() {
            return Err(LearnError::EmptyDataset);
        }
        if k == 0 {
            return Err(LearnError::BadParams("k must be at least 1"));
        }
        if k > train.len() {
            return Err(LearnError::KTooLarge { k, n: train.len() });
        }
        Ok(KnnModel { k, train: train.clone() })
    }
}

impl Predict for KnnModel {
    fn n_features(&self) -> usize {
        self.train.n_features
    }

    /// Mean target of the k closest rows; equal distances go to the lower index.
    fn predict_row(&self, row: &[f64]) -> f64 {
        let mut dist: Vec<(f64, usize)> = self
            .train
            .rows()
            .enumerate()
            .map(|(i, r)| (r.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k - 1, cmp);
            dist.truncate(self.k);
        }
        dist.sort_by(cmp);
        dist.iter().map(|&(_, i)| self.train.y[i]).sum::<f64>() / self.k as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;
    use alloc::vec;

    fn line() -> Dataset {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
        Dataset::from_rows(&rows, vec![1.0, 2.0, 3.0, 4.0, 10.0], vec![String::from("d"); 5]).unwrap()
    }

    #[test]
    fn k_equals_n_gives_mean() {
        let m = KnnModel::fit(&line(), 5).unwrap();
        assert_eq!(m.predict_row(&[-100.0]), 4.0);
        assert_eq!(m.predict_row(&[2.5]), 4.0);
    }

    #[test]
    fn nearest_with_index_tiebreak() {
        let m = KnnModel::fit(&line(), 1).unwrap();
        assert_eq!(m.predict_row(&[3.9]), 10.0);
        // 1.5 is equidistant from rows 1 and 2.
        assert_eq!(m.predict_row(&[1.5]), 2.0);
        let m = KnnModel::fit(&line(), 2).unwrap();
        assert_eq!(m.predict_row(&[4.2]), 7.0);
    }

    #[test]
    fn k_too_large() {
        assert_eq!(KnnModel::fit(&line(), 6), Err(LearnError::KTooLarge { k: 6, n: 5 }));
    }
}
