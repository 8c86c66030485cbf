//! Ordering helpers with uniformly random tie-breaking, and scores that are
//! compared in floating point unless two values are close enough to need
//! the exact rational.

use std::cell::OnceCell;
use std::cmp::Ordering;

use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;

/// `0..n` ordered best-first by `cmp` (which compares scores, larger is
/// better). Items with equal scores appear in uniformly random order.
pub(crate) fn rank_desc<R, F>(n: usize, rng: &mut R, mut cmp: F) -> Vec<usize>
where
    R: Rng + ?Sized,
    F: FnMut(usize, usize) -> Ordering,
{
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx.sort_by(|&a, &b| cmp(b, a));
    idx
}

/// Picks uniformly among the maximal elements of `items` under `cmp`.
pub(crate) fn argmax_uniform<R, F>(items: &[usize], rng: &mut R, mut cmp: F) -> Option<usize>
where
    R: Rng + ?Sized,
    F: FnMut(usize, usize) -> Ordering,
{
    let mut best: Vec<usize> = Vec::new();
    for &item in items {
        match best.first().map(|&b| cmp(item, b)) {
            None | Some(Ordering::Greater) => {
                best.clear();
                best.push(item);
            }
            Some(Ordering::Equal) => best.push(item),
            Some(Ordering::Less) => {}
        }
    }
    match best.len() {
        0 => None,
        1 => Some(best[0]),
        n => Some(best[rng.random_range(0..n)]),
    }
}

/// Scores known approximately as `f64` and exactly on demand.
pub(crate) struct HybridScores<F> {
    approx: Vec<f64>,
    exact: Vec<OnceCell<BigRational>>,
    exact_fn: F,
}

impl<F: Fn(usize) -> BigRational> HybridScores<F> {
    pub(crate) fn new(approx: Vec<f64>, exact_fn: F) -> Self {
        let exact = (0..approx.len()).map(|_| OnceCell::new()).collect();
        Self {
            approx,
            exact,
            exact_fn,
        }
    }

    fn exact(&self, i: usize) -> &BigRational {
        self.exact[i].get_or_init(|| (self.exact_fn)(i))
    }

    /// Exact comparison of score `a` with score `b`.
    pub(crate) fn cmp(&self, a: usize, b: usize) -> Ordering {
        let (x, y) = (self.approx[a], self.approx[b]);
        // Float sums here carry relative error far below this tolerance.
        let tol = 1e-9 * x.abs().max(y.abs()).max(1.0);
        if (x - y).abs() > tol {
            return x.partial_cmp(&y).expect("finite scores");
        }
        self.exact(a).cmp(self.exact(b))
    }
}
