//! Parallel drivers. Work is split into ordered pieces and merged in order,
//! so results never depend on the worker count.

use rayon::prelude::*;
use xda_core::extrinsic::{
    assemble_cantor, cantor_level, cantor_partials, CantorLevel, CantorSearch, CantorSearchParams, ExtrinsicError,
};
use xda_core::lattice::{good_pair_search_with, Candidate, GoodPair, LatticeError, SearchParams};
use xda_core::{Coordinate, TargetPoint};

/// Blocks smaller than this are scanned on the calling thread.
const MIN_SPLIT: u64 = 4096;

fn pieces(lo: u64, hi: u64, threads: u64) -> Vec<(u64, u64)> {
    let len = hi - lo + 1;
    let size = (len / (4 * threads)).max(MIN_SPLIT / 4).max(1);
    let mut out = Vec::new();
    let mut a = lo;
    while a <= hi {
        let b = a.saturating_add(size - 1).min(hi);
        out.push((a, b));
        a = b + 1;
    }
    out
}

/// Good-pair search with each height block split across the pool.
pub fn good_pair(x: &TargetPoint, params: &SearchParams) -> Result<GoodPair, LatticeError> {
    let threads = rayon::current_num_threads() as u64;
    good_pair_search_with(x, params, |plan, lo, hi| {
        if hi < lo {
            return Ok(Vec::new());
        }
        if threads == 1 || hi - lo < MIN_SPLIT {
            return plan.candidates(lo, hi);
        }
        let parts: Vec<Result<Vec<Candidate>, LatticeError>> =
            pieces(lo, hi, threads).into_par_iter().map(|(a, b)| plan.candidates(a, b)).collect();
        let mut out = Vec::new();
        for p in parts {
            out.extend(p?);
        }
        Ok(out)
    })
}

/// The semiconvergent experiment with levels computed in parallel.
pub fn cantor_search(x: &Coordinate, params: &CantorSearchParams) -> Result<CantorSearch, ExtrinsicError> {
    if params.n_min == 0 || params.n_min > params.n_max {
        return Err(ExtrinsicError::BadParams("need 1 ≤ n_min ≤ n_max"));
    }
    let partials = cantor_partials(x, params.n_max, params.cap)?;
    let levels: Vec<Result<CantorLevel, ExtrinsicError>> = (params.n_min..=params.n_max)
        .into_par_iter()
        .map(|n| cantor_level(x, &partials, n, params.window, params.max_window, params.cap))
        .collect();
    let levels = levels.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(assemble_cantor(partials, levels, params.bucket_base))
}

#[cfg(test)]
mod tests {
    use super::*;
    use xda_core::extrinsic::extrinsic_search_cantor;
    use xda_core::lattice::good_pair_search;
    use xda_core::{DigitGenerator, DigitStream, QuadScalar};

    fn pool(n: usize) -> rayon::ThreadPool {
        rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap()
    }

    #[test]
    fn pieces_cover_in_order() {
        for (lo, hi, t) in [(1, 1, 4), (10, 100_000, 3), (5, 9000, 8), (1, 1_000_000, 1)] {
            let p = pieces(lo, hi, t);
            assert_eq!(p.first().unwrap().0, lo);
            assert_eq!(p.last().unwrap().1, hi);
            assert!(p.windows(2).all(|w| w[0].1 + 1 == w[1].0));
        }
    }

    #[test]
    fn parallel_matches_sequential_good_pairs() {
        let x = TargetPoint::new(vec![
            Coordinate::Quadratic(QuadScalar::sqrt(2).unwrap()),
            Coordinate::Quadratic(QuadScalar::sqrt(3).unwrap()),
        ])
        .unwrap();
        for q in [10, 10_000, 100_000] {
            let params = SearchParams::with_min_q0(q);
            let seq = good_pair_search(&x, &params).unwrap();
            for n in [1, 3, 8] {
                assert_eq!(pool(n).install(|| good_pair(&x, &params)).unwrap(), seq, "Q = {q}, {n} workers");
            }
        }
    }

    #[test]
    fn parallel_matches_sequential_cantor() {
        let x = Coordinate::Digits(DigitStream::new(3, DigitGenerator::ThueMorse(0, 2)).unwrap());
        let params = CantorSearchParams::new(20, 8);
        let seq = extrinsic_search_cantor(&x, &params).unwrap();
        assert_eq!(pool(4).install(|| cantor_search(&x, &params)).unwrap(), seq);
    }
}
