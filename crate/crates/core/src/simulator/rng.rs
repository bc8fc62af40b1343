//! Per-path random streams and the order-independent parallel driver.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Paths per work unit. Partial results are always combined in chunk order,
/// so the output does not depend on how chunks are spread over threads.
pub(crate) const CHUNK: u64 = 1024;

/// Independent ChaCha stream `path` under the key derived from `seed`.
pub(crate) fn path_rng(key: &[u8; 32], path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(*key);
    rng.set_stream(path);
    rng
}

pub(crate) fn key_from_seed(seed: u64) -> [u8; 32] {
    ChaCha8Rng::seed_from_u64(seed).get_seed()
}

/// Runs `path` once per simulated path, each with its own stream, and folds
/// the per-chunk accumulators sequentially.
pub(crate) fn run_paths<A, I, P, M>(
    paths: u64,
    seed: u64,
    workers: Option<usize>,
    init: I,
    path: P,
    merge: M,
) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    P: Fn(&mut ChaCha8Rng, &mut A) + Sync,
    M: Fn(&mut A, A),
{
    let key = key_from_seed(seed);
    let chunks = paths.div_ceil(CHUNK);
    let work = || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = init();
                for p in c * CHUNK..((c + 1) * CHUNK).min(paths) {
                    let mut rng = path_rng(&key, p);
                    path(&mut rng, &mut acc);
                }
                acc
            })
            .collect::<Vec<A>>()
    };
    let parts =
        match workers.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
            Some(pool) => pool.install(work),
            None => work(),
        };
    let mut total = init();
    for part in parts {
        merge(&mut total, part);
    }
    total
}
