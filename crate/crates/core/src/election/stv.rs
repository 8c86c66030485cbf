//! Single transferable vote with a Droop quota and fractional (Gregory)
//! surplus transfers.
//!
//! Ballot weights are fixed-point integers in units of [`WEIGHT_UNIT`]ths of
//! a vote. Transfer values are truncated to that grid, so tallies and
//! comparisons are exact integers and denominators never grow.

use rand::Rng;

use super::check_k;
use crate::ballots::OrdinalBallots;
use crate::error::Result;
use crate::tiebreak::{argmax_uniform, rank_desc};

/// Fixed-point units per whole vote.
pub const WEIGHT_UNIT: u64 = 1_000_000_000;

/// `floor(n / (k + 1)) + 1`.
pub fn droop_quota(n_voters: usize, k: usize) -> usize {
    n_voters / (k + 1) + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Continuing,
    Elected,
    Excluded,
}

/// Ballots sitting with a candidate that all carry the same weight.
struct Parcel {
    weight: u64,
    /// (voter, position in the voter's order of the current holder)
    ballots: Vec<(u32, u32)>,
}

struct Count<'b> {
    ballots: &'b OrdinalBallots,
    status: Vec<Status>,
    parcels: Vec<Vec<Parcel>>,
    tally: Vec<u128>,
}

impl Count<'_> {
    fn continuing(&self) -> Vec<usize> {
        (0..self.status.len())
            .filter(|&c| self.status[c] == Status::Continuing)
            .collect()
    }

    /// Moves every parcel held by `from` to the next continuing preference,
    /// scaling weights by `numer / denom` (rounded down).
    fn transfer(&mut self, from: usize, scale: Option<(u128, u128)>) {
        let parcels = std::mem::take(&mut self.parcels[from]);
        self.tally[from] = 0;
        let m = self.status.len();
        let mut by_dest: Vec<Vec<(u32, u32)>> = vec![Vec::new(); m];
        for parcel in parcels {
            let weight = match scale {
                Some((numer, denom)) => (parcel.weight as u128 * numer / denom) as u64,
                None => parcel.weight,
            };
            if weight == 0 {
                continue;
            }
            for (voter, pos) in parcel.ballots {
                let order = self.ballots.order(voter as usize);
                let next = (pos as usize + 1..m).find(|&p| self.status[order[p] as usize] == Status::Continuing);
                if let Some(p) = next {
                    by_dest[order[p] as usize].push((voter, p as u32));
                }
            }
            for (dest, moved) in by_dest.iter_mut().enumerate() {
                if moved.is_empty() {
                    continue;
                }
                let moved = std::mem::take(moved);
                self.tally[dest] += weight as u128 * moved.len() as u128;
                let held = &mut self.parcels[dest];
                match held.iter_mut().find(|p| p.weight == weight) {
                    Some(p) => p.ballots.extend(moved),
                    None => held.push(Parcel { weight, ballots: moved }),
                }
            }
        }
    }
}

/// Elects `k` candidates. Each round elects the highest candidate at or above
/// the quota (transferring its surplus at weight `(tally - q) / tally`) or, if
/// none qualifies, excludes the lowest. When the continuing candidates exactly
/// fill the open seats they are all elected. Ties are broken uniformly.
pub fn stv<R: Rng + ?Sized>(ballots: &OrdinalBallots, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    let (n, m) = (ballots.n_voters(), ballots.n_candidates());
    check_k(k, m)?;
    let quota = droop_quota(n, k) as u128 * WEIGHT_UNIT as u128;
    let mut count = Count {
        ballots,
        status: vec![Status::Continuing; m],
        parcels: (0..m).map(|_| Vec::new()).collect(),
        tally: vec![0; m],
    };
    let mut firsts: Vec<Vec<(u32, u32)>> = vec![Vec::new(); m];
    for j in 0..n {
        firsts[ballots.order(j)[0] as usize].push((j as u32, 0));
    }
    for (c, held) in firsts.into_iter().enumerate() {
        count.tally[c] = held.len() as u128 * WEIGHT_UNIT as u128;
        if !held.is_empty() {
            count.parcels[c].push(Parcel {
                weight: WEIGHT_UNIT,
                ballots: held,
            });
        }
    }

    let mut elected = Vec::with_capacity(k);
    while elected.len() < k {
        let open = k - elected.len();
        let continuing = count.continuing();
        let tally = count.tally.clone();
        if continuing.len() <= open {
            let order = rank_desc(continuing.len(), rng, |a, b| {
                tally[continuing[a]].cmp(&tally[continuing[b]])
            });
            elected.extend(order.into_iter().map(|i| continuing[i]));
            break;
        }
        let reached: Vec<usize> = continuing.iter().copied().filter(|&c| tally[c] >= quota).collect();
        if let Some(winner) = argmax_uniform(&reached, rng, |a, b| tally[a].cmp(&tally[b])) {
            count.status[winner] = Status::Elected;
            elected.push(winner);
            let surplus = tally[winner] - quota;
            if elected.len() < k && surplus > 0 {
                count.transfer(winner, Some((surplus, tally[winner])));
            } else {
                count.parcels[winner].clear();
            }
        } else {
            let loser = argmax_uniform(&continuing, rng, |a, b| tally[b].cmp(&tally[a]))
                .expect("more continuing candidates than open seats");
            count.status[loser] = Status::Excluded;
            count.transfer(loser, None);
        }
    }
    Ok(elected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    fn ballots(orders: &[&[usize]]) -> OrdinalBallots {
        OrdinalBallots::from_orders(orders.iter().map(|o| o.to_vec()).collect()).unwrap()
    }

    #[test]
    fn droop_quota_values() {
        assert_eq!(droop_quota(3, 1), 2);
        assert_eq!(droop_quota(5, 1), 3);
        assert_eq!(droop_quota(501, 21), 23);
    }

    #[test]
    fn unanimous_first_choice_wins() {
        let b = ballots(&[&[0, 1, 2], &[0, 2, 1], &[0, 1, 2]]);
        assert_eq!(stv(&b, 1, &mut rng_from_seed(0)).unwrap(), vec![0]);
    }

    #[test]
    fn exclusion_transfers_to_second_preference() {
        // First choices (2, 2, 1); the c3 supporter ranks c1 second.
        let b = ballots(&[&[0, 1, 2], &[0, 2, 1], &[1, 0, 2], &[1, 2, 0], &[2, 0, 1]]);
        for s in 0..20 {
            assert_eq!(stv(&b, 1, &mut rng_from_seed(s)).unwrap(), vec![0]);
        }
    }

    #[test]
    fn full_committee_when_k_equals_m() {
        let b = ballots(&[&[0, 1, 2], &[2, 1, 0]]);
        let mut w = stv(&b, 3, &mut rng_from_seed(0)).unwrap();
        w.sort();
        assert_eq!(w, vec![0, 1, 2]);
    }

    #[test]
    fn surplus_transfers_fractionally() {
        // N = 6, k = 2, q = 3. c0 gets 5 first choices (surplus 2, factor 2/5):
        // four go on to c1 (8/5) and one to c2 (2/5). c2 also holds one ballot
        // of its own (total 7/5) and c3 holds none, so c3 is excluded, then
        // c2 (7/5 < 8/5) and c1 takes the last seat.
        let b = ballots(&[
            &[0, 1, 2, 3],
            &[0, 1, 2, 3],
            &[0, 1, 2, 3],
            &[0, 1, 2, 3],
            &[0, 2, 1, 3],
            &[2, 3, 1, 0],
        ]);
        for s in 0..10 {
            assert_eq!(stv(&b, 2, &mut rng_from_seed(s)).unwrap(), vec![0, 1]);
        }
    }
}
