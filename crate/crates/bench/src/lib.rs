//! Fixture graphs shared by the criterion benchmarks under `benches/`.

use graphsim::{SquareMatrix, WeightedGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random connected graph on `n` vertices: a random spanning tree plus each
/// remaining pair with probability `density`, weights in (0, 3].
#[allow(clippy::needless_range_loop)]
pub fn random_graph(seed: u64, n: usize, density: f64) -> WeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = vec![vec![0.0; n]; n];
    for v in 1..n {
        let u = rng.gen_range(0..v);
        let x = 3.0 - rng.gen_range(0.0..3.0);
        w[u][v] = x;
        w[v][u] = x;
    }
    for u in 0..n {
        for v in u + 1..n {
            if w[u][v] == 0.0 && rng.gen_bool(density) {
                let x = 3.0 - rng.gen_range(0.0..3.0);
                w[u][v] = x;
                w[v][u] = x;
            }
        }
    }
    let w = SquareMatrix::from_rows(&w).expect("square rows");
    WeightedGraph::from_weights(w).expect("spanning tree keeps the graph connected")
}

/// Graph sizes used across the benchmarks.
pub const SIZES: [usize; 3] = [5, 20, 60];
