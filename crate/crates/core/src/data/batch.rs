use crate::data::VectorDataset;
use crate::error::{Error, Result};
use crate::foundation::{Rng, Tensor};

/// Row indices for one epoch, chunked into batches of `batch_size` (the last
/// batch may be short). With `shuffle` the order is a permutation drawn from
/// `rng`; otherwise rows keep their original order and `rng` is untouched.
pub fn epoch_batches(
    n: usize,
    batch_size: usize,
    shuffle: bool,
    rng: &mut Rng,
) -> Result<Vec<Vec<usize>>> {
    if batch_size == 0 {
        return Err(Error::Argument("batch size must be at least 1".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    if shuffle {
        rng.shuffle(&mut order);
    }
    Ok(order.chunks(batch_size).map(<[usize]>::to_vec).collect())
}

/// Iterator over `(features, labels_onehot)` mini-batches of a dataset.
pub struct BatchIter<'a> {
    ds: &'a VectorDataset,
    batches: std::vec::IntoIter<Vec<usize>>,
}

impl Iterator for BatchIter<'_> {
    type Item = (Tensor, Tensor);

    fn next(&mut self) -> Option<Self::Item> {
        let idx = self.batches.next()?;
        Some((
            self.ds.features.select_rows(&idx),
            self.ds.labels_onehot.select_rows(&idx),
        ))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.batches.size_hint()
    }
}

impl ExactSizeIterator for BatchIter<'_> {}

pub fn batch_iter<'a>(
    ds: &'a VectorDataset,
    batch_size: usize,
    shuffle: bool,
    rng: &mut Rng,
) -> Result<BatchIter<'a>> {
    let batches = epoch_batches(ds.len(), batch_size, shuffle, rng)?;
    Ok(BatchIter {
        ds,
        batches: batches.into_iter(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foundation::Rng;
    use proptest::prelude::*;

    fn toy(n: usize) -> VectorDataset {
        let features = Tensor::matrix(n, 1, (0..n).map(|i| i as f64).collect()).unwrap();
        let labels: Vec<u8> = (0..n).map(|i| (i % 10) as u8).collect();
        VectorDataset::from_labels(features, &labels).unwrap()
    }

    #[test]
    fn partition_sizes() {
        let ds = toy(10);
        let sizes: Vec<usize> = batch_iter(&ds, 4, true, &mut Rng::seed_from_u64(0))
            .unwrap()
            .map(|(x, _)| x.rows())
            .collect();
        assert_eq!(sizes, vec![4, 4, 2]);
    }

    #[test]
    fn unshuffled_keeps_order() {
        let ds = toy(7);
        let rows: Vec<f64> = batch_iter(&ds, 3, false, &mut Rng::seed_from_u64(0))
            .unwrap()
            .flat_map(|(x, _)| x.into_data())
            .collect();
        assert_eq!(rows, vec![0., 1., 2., 3., 4., 5., 6.]);
    }

    #[test]
    fn shuffle_is_seeded() {
        let a = epoch_batches(50, 8, true, &mut Rng::seed_from_u64(9)).unwrap();
        let b = epoch_batches(50, 8, true, &mut Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.concat(), (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn labels_follow_features() {
        let ds = toy(12);
        for (x, y) in batch_iter(&ds, 5, true, &mut Rng::seed_from_u64(2)).unwrap() {
            for i in 0..x.rows() {
                let label = y.argmax_rows()[i];
                assert_eq!(label, x.row(i)[0] as usize % 10);
            }
        }
    }

    #[test]
    fn zero_batch_size() {
        assert!(epoch_batches(3, 0, false, &mut Rng::seed_from_u64(0)).is_err());
    }

    proptest! {
        #[test]
        fn every_row_once_per_epoch(n in 0usize..200, bs in 1usize..40, seed: u64) {
            let mut seen = epoch_batches(n, bs, true, &mut Rng::seed_from_u64(seed)).unwrap().concat();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..n).collect::<Vec<_>>());
        }
    }
}
