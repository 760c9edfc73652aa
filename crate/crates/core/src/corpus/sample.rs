use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};

use super::{CorpusError, Instance};

fn stream(seed: u64, dataset_id: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(b"demonstrations\0");
    h.update(seed.to_le_bytes());
    h.update(dataset_id.as_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// Uniform integer in `0..bound` by rejection, so the draw has no modulo bias.
fn below(rng: &mut ChaCha8Rng, bound: usize) -> usize {
    let bound = bound as u64;
    let zone = u64::MAX - (u64::MAX % bound);
    loop {
        let x = rng.next_u64();
        if x < zone {
            return (x % bound) as usize;
        }
    }
}

/// Draws `n_per_class` demonstrations of every answer class the dataset uses.
///
/// Classes are visited in [`DatasetKind::classes`](super::DatasetKind::classes)
/// order and each class takes the first `n_per_class` positions of a partial
/// Fisher-Yates shuffle over its members (pool order). The random stream
/// depends only on the seed and the dataset id.
pub fn sample_demonstrations(
    pool: &[Instance],
    seed: u64,
    n_per_class: usize,
) -> Result<Vec<Instance>, CorpusError> {
    let dataset = pool.first().ok_or(CorpusError::EmptyPool)?.dataset;
    let mut rng = stream(seed, dataset.id());
    let mut out = Vec::with_capacity(n_per_class * dataset.classes().len());
    for &class in dataset.classes() {
        let mut members: Vec<usize> = pool
            .iter()
            .enumerate()
            .filter(|(_, i)| i.answer_class == class)
            .map(|(idx, _)| idx)
            .collect();
        if members.len() < n_per_class {
            return Err(CorpusError::InsufficientPool {
                class,
                available: members.len(),
                needed: n_per_class,
            });
        }
        for i in 0..n_per_class {
            let j = i + below(&mut rng, members.len() - i);
            members.swap(i, j);
            out.push(pool[members[i]].clone());
        }
    }
    Ok(out)
}
