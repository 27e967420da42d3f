//! Benchmark fixtures for `nogo-core`; the benchmarks live in `benches/`.

use nogo_core::realizability::RealizabilityProblem;

/// Pure-pairwise triples spread over the correlation cube, half of them
/// outside the realizable tetrahedron.
pub fn triple_fixtures(count: usize) -> Vec<RealizabilityProblem> {
    (0..count)
        .map(|k| {
            let t = k as f64 / count.max(1) as f64;
            let c12 = (7.0 * t).sin();
            let c13 = (11.0 * t + 0.3).cos();
            let c23 = (13.0 * t + 1.1).sin();
            RealizabilityProblem::triple(c12, c13, c23).expect("entries lie in [-1, 1]")
        })
        .collect()
}
