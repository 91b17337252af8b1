//! Exact maximum-weight bipartite matching with VCG prices, used by the
//! replica-surrogate reduction. Matchings may leave nodes unmatched
//! (negative-weight edges are never forced); the canonical solution is the
//! lexicographically smallest optimal assignment by (left index, right
//! index), preferring nonnegative partners, which in particular includes
//! zero-weight edges whenever that costs nothing.
//!
//! Internally the problem is solved as a perfect assignment on the weights
//! clamped at zero (a left node "matched" through a negative edge is
//! unmatched in the output). The assignment runs on exact integers after
//! clearing denominators, on `i128` when the scaled weights fit and `BigInt`
//! otherwise; canonicalization walks the tight graph of the optimal duals,
//! so no re-solves are needed.

use crate::error::{Error, Result};
use crate::rat::Rat;
use num::bigint::BigInt;
use num::{Integer, Zero};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct MatchingResult {
    /// Per left node: the matched right node, for edges of nonnegative
    /// weight only.
    pub matched: Vec<Option<usize>>,
    /// Total weight of the matched edges (the maximum over all matchings).
    pub total_weight: Rat,
    /// VCG price per matched left node: (optimum without the node) minus
    /// (weight of the other matched edges).
    pub vcg_prices: Vec<Option<Rat>>,
}

trait Wt: Clone + Ord {
    fn zero() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
}

impl Wt for i128 {
    fn zero() -> Self {
        0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
}

impl Wt for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
}

/// Max-weight perfect assignment of `nl <= nr` left nodes to distinct right
/// nodes (weights already clamped nonnegative). Returns the assignment and
/// dual potentials witnessing optimality: `u[i] + v[j] >= w[i][j]` with
/// equality on assigned edges.
fn assign_max<W: Wt>(w: &[Vec<W>]) -> (Vec<usize>, Vec<W>, Vec<W>) {
    let nl = w.len();
    let nr = if nl == 0 { 0 } else { w[0].len() };
    debug_assert!(nl <= nr);
    // shortest-augmenting-path method on costs = -w, with potentials kept
    // exact; p[j] = left node matched to right j (1-based, 0 = none)
    let mut u = vec![W::zero(); nl + 1];
    let mut v = vec![W::zero(); nr + 1];
    let mut p = vec![0usize; nr + 1];
    let mut way = vec![0usize; nr + 1];
    let cost = |i: usize, j: usize| -> W {
        // min-cost formulation of max-weight
        W::zero().sub(&w[i - 1][j - 1])
    };
    for i in 1..=nl {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv: Vec<Option<W>> = vec![None; nr + 1];
        let mut used = vec![false; nr + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta: Option<W> = None;
            let mut j1 = 0usize;
            for j in 1..=nr {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j).sub(&u[i0]).sub(&v[j]);
                let better = match &minv[j] {
                    None => true,
                    Some(m) => cur < *m,
                };
                if better {
                    minv[j] = Some(cur);
                    way[j] = j0;
                }
                let is_new_min = match (&minv[j], &delta) {
                    (Some(m), None) => Some(m.clone()),
                    (Some(m), Some(d)) if m < d => Some(m.clone()),
                    _ => None,
                };
                if let Some(d) = is_new_min {
                    delta = Some(d);
                    j1 = j;
                }
            }
            let d = delta.expect("nl <= nr guarantees a free column");
            for j in 0..=nr {
                if used[j] {
                    u[p[j]] = u[p[j]].add(&d);
                    v[j] = v[j].sub(&d);
                } else if let Some(m) = &minv[j] {
                    minv[j] = Some(m.sub(&d));
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![usize::MAX; nl];
    for j in 1..=nr {
        if p[j] != 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    // convert cost potentials to weight potentials: w = -cost, so the weight
    // duals are (-u, -v) with u[i] + v[j] <= cost(i,j)
    let wu: Vec<W> = u[1..].iter().map(|x| W::zero().sub(x)).collect();
    let wv: Vec<W> = v[1..].iter().map(|x| W::zero().sub(x)).collect();
    (assign, wu, wv)
}

/// Canonicalize an optimal square assignment to the lexicographically
/// smallest one: left nodes in order prefer the smallest tight partner,
/// trying nonnegative-weight partners before negative ones. Works entirely
/// inside the tight graph of the given optimal duals, repairing the
/// maintained perfect matching with alternating paths.
fn canonicalize<W: Wt>(
    w: &[Vec<W>],            // clamped weights
    nonneg: &[Vec<bool>],    // original weight >= 0
    assign: &mut [usize],    // perfect assignment, left -> right
    u: &[W],
    v: &[W],
) {
    let nl = assign.len();
    let nr = if nl == 0 { 0 } else { w[0].len() };
    let tight = |i: usize, j: usize| -> bool { u[i].add(&v[j]) == w[i][j] };
    let mut right_of: Vec<usize> = assign.to_vec();
    let mut left_of = vec![usize::MAX; nr];
    for (i, &j) in right_of.iter().enumerate() {
        left_of[j] = i;
    }
    for i in 0..nl {
        // candidate partners in canonical order
        let mut candidates: Vec<usize> = (0..nr).filter(|&j| nonneg[i][j] && tight(i, j)).collect();
        let mut negs: Vec<usize> = (0..nr).filter(|&j| !nonneg[i][j] && tight(i, j)).collect();
        candidates.append(&mut negs);
        for j in candidates {
            if right_of[i] == j {
                break;
            }
            // try to rewire so that i is matched to j, touching only
            // not-yet-canonicalized left nodes (> i)
            let j_old = right_of[i];
            let i_old = left_of[j];
            debug_assert!(i_old > i, "smaller lefts are already fixed");
            // tentative: i -> j; now i_old needs a partner and j_old is free
            let mut visited_l = vec![false; nl];
            let mut path: Vec<(usize, usize)> = Vec::new();
            if augment(
                i_old, j_old, w, u, v, &right_of, &left_of, i, &mut visited_l, &mut path,
            ) {
                right_of[i] = j;
                left_of[j] = i;
                // apply the alternating path relinks
                for &(pi, pj) in &path {
                    right_of[pi] = pj;
                    left_of[pj] = pi;
                }
                break;
            }
        }
    }
    assign.copy_from_slice(&right_of);

    fn augment<W: Wt>(
        from_left: usize,
        free_right: usize,
        w: &[Vec<W>],
        u: &[W],
        v: &[W],
        right_of: &[usize],
        left_of: &[usize],
        fixed_below: usize,
        visited_l: &mut [bool],
        path: &mut Vec<(usize, usize)>,
    ) -> bool {
        if visited_l[from_left] {
            return false;
        }
        visited_l[from_left] = true;
        let nr = w[0].len();
        for j in 0..nr {
            if u[from_left].add(&v[j]) != w[from_left][j] {
                continue;
            }
            if j == free_right {
                path.push((from_left, j));
                return true;
            }
            let holder = left_of[j];
            if holder == usize::MAX || holder <= fixed_below || right_of[from_left] == j {
                continue;
            }
            if augment(
                holder,
                free_right,
                w,
                u,
                v,
                right_of,
                left_of,
                fixed_below,
                visited_l,
                path,
            ) {
                path.push((from_left, j));
                return true;
            }
        }
        false
    }
}

struct Scaled {
    /// Clamped weights as integers over a common denominator.
    big: Vec<Vec<BigInt>>,
    nonneg: Vec<Vec<bool>>,
    denom: BigInt,
}

fn scale(weights: &[Vec<Rat>]) -> Result<Scaled> {
    let nl = weights.len();
    let nr = weights.first().map(|r| r.len()).unwrap_or(0);
    if weights.iter().any(|r| r.len() != nr) {
        return Err(Error::Parameter("ragged weight matrix".into()));
    }
    let mut denom = BigInt::from(1);
    for row in weights {
        for x in row {
            denom = denom.lcm(x.denom());
        }
    }
    let mut big = Vec::with_capacity(nl);
    let mut nonneg = Vec::with_capacity(nl);
    for row in weights {
        let mut brow = Vec::with_capacity(nr);
        let mut nrow = Vec::with_capacity(nr);
        for x in row {
            let pos = !x.is_negative();
            nrow.push(pos);
            brow.push(if pos {
                x.numer() * (&denom / x.denom())
            } else {
                Zero::zero()
            });
        }
        big.push(brow);
        nonneg.push(nrow);
    }
    Ok(Scaled { big, nonneg, denom })
}

fn to_rat(x: &BigInt, denom: &BigInt) -> Rat {
    Rat::from_big(num::BigRational::new(x.clone(), denom.clone()))
}

/// Solve the square problem: canonical max-weight matching. Returns per-left
/// matched partner (nonnegative edges only) and the total weight.
pub fn matched_set(weights: &[Vec<Rat>]) -> Result<(Vec<Option<usize>>, Rat)> {
    let s = scale(weights)?;
    let nl = s.big.len();
    if nl == 0 {
        return Ok((Vec::new(), Rat::zero()));
    }
    let nr = s.big[0].len();
    if nl > nr {
        return Err(Error::Parameter("more left nodes than right nodes".into()));
    }
    let fits = s
        .big
        .iter()
        .flatten()
        .all(|x| x.bits() <= 64 && nl <= 1024);
    let assign = if fits {
        let w128: Vec<Vec<i128>> = s
            .big
            .iter()
            .map(|r| r.iter().map(|x| i128::try_from(x).unwrap()).collect())
            .collect();
        let (mut a, u, v) = assign_max(&w128);
        canonicalize(&w128, &s.nonneg, &mut a, &u, &v);
        a
    } else {
        let (mut a, u, v) = assign_max(&s.big);
        canonicalize(&s.big, &s.nonneg, &mut a, &u, &v);
        a
    };
    let mut total = BigInt::from(0);
    let matched: Vec<Option<usize>> = assign
        .iter()
        .enumerate()
        .map(|(i, &j)| {
            if s.nonneg[i][j] {
                total += &s.big[i][j];
                Some(j)
            } else {
                None
            }
        })
        .collect();
    Ok((matched, to_rat(&total, &s.denom)))
}

/// Maximum matching weight when one left node is removed.
pub fn max_weight_without(weights: &[Vec<Rat>], drop_left: usize) -> Result<Rat> {
    let reduced: Vec<Vec<Rat>> = weights
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != drop_left)
        .map(|(_, r)| r.clone())
        .collect();
    if reduced.is_empty() {
        return Ok(Rat::zero());
    }
    let s = scale(&reduced)?;
    let fits = s
        .big
        .iter()
        .flatten()
        .all(|x| x.bits() <= 64 && s.big.len() <= 1024);
    let total = if fits {
        let w128: Vec<Vec<i128>> = s
            .big
            .iter()
            .map(|r| r.iter().map(|x| i128::try_from(x).unwrap()).collect())
            .collect();
        let (a, _, _) = assign_max(&w128);
        let mut t: i128 = 0;
        for (i, &j) in a.iter().enumerate() {
            t += w128[i][j];
        }
        BigInt::from(t)
    } else {
        let (a, _, _) = assign_max(&s.big);
        let mut t = BigInt::from(0);
        for (i, &j) in a.iter().enumerate() {
            t += &s.big[i][j];
        }
        t
    };
    Ok(to_rat(&total, &s.denom))
}

/// VCG price of a matched left node given the canonical matching and total.
pub fn vcg_price_for(
    weights: &[Vec<Rat>],
    matched: &[Option<usize>],
    total: &Rat,
    left: usize,
) -> Result<Option<Rat>> {
    let j = match matched[left] {
        Some(j) => j,
        None => return Ok(None),
    };
    let without = max_weight_without(weights, left)?;
    let others = total - &weights[left][j];
    Ok(Some(without - others))
}

/// Full canonical matching with VCG prices for every matched left node.
pub fn vcg_matching(weights: &[Vec<Rat>]) -> Result<MatchingResult> {
    let (matched, total_weight) = matched_set(weights)?;
    let mut vcg_prices = Vec::with_capacity(matched.len());
    for i in 0..matched.len() {
        vcg_prices.push(vcg_price_for(weights, &matched, &total_weight, i)?);
    }
    Ok(MatchingResult {
        matched,
        total_weight,
        vcg_prices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Vec<Vec<Rat>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| Rat::int(x)).collect())
            .collect()
    }

    #[test]
    fn all_negative_leaves_everything_unmatched() {
        let w = m(&[&[-1, -2], &[-3, -1]]);
        let r = vcg_matching(&w).unwrap();
        assert_eq!(r.total_weight, Rat::zero());
        assert!(r.matched.iter().all(|x| x.is_none()));
        assert!(r.vcg_prices.iter().all(|x| x.is_none()));
    }

    #[test]
    fn single_positive_edge_is_free() {
        let w = m(&[&[7]]);
        let r = vcg_matching(&w).unwrap();
        assert_eq!(r.matched, vec![Some(0)]);
        assert_eq!(r.total_weight, Rat::int(7));
        assert_eq!(r.vcg_prices, vec![Some(Rat::zero())]);
    }

    #[test]
    fn zero_weight_edge_included_and_priced() {
        // [[3,1],[2,0]]: weight 3 via {(0,0),(1,1)} (zero edge kept) and
        // also via {(0,1),(1,0)}; canonical picks the lex-smaller first
        let w = m(&[&[3, 1], &[2, 0]]);
        let r = vcg_matching(&w).unwrap();
        assert_eq!(r.matched, vec![Some(0), Some(1)]);
        assert_eq!(r.total_weight, Rat::int(3));
        // price of left 0: best without it is 2, others in matching carry 0
        assert_eq!(r.vcg_prices[0], Some(Rat::int(2)));
        assert_eq!(r.vcg_prices[1], Some(Rat::zero()));
    }

    #[test]
    fn antidiagonal_forced() {
        let w = m(&[&[0, 5], &[5, 0]]);
        let r = vcg_matching(&w).unwrap();
        assert_eq!(r.matched, vec![Some(1), Some(0)]);
        assert_eq!(r.total_weight, Rat::int(10));
    }

    #[test]
    fn negative_edge_never_blocks_unmatching() {
        // left 1 can only reach negative edges once right 1 is taken
        let w = m(&[&[0, 9], &[-1, 9]]);
        let r = vcg_matching(&w).unwrap();
        // both {(0,0),(1,1)} (weight 9, cardinality 2) and {(0,1)} tie at 9;
        // canonical prefers left 0 matched to the smallest right
        assert_eq!(r.matched, vec![Some(0), Some(1)]);
        assert_eq!(r.total_weight, Rat::int(9));
    }

    #[test]
    fn utilities_are_nonnegative() {
        let w = m(&[&[5, 3, 0], &[2, 8, 1], &[0, 4, 9]]);
        let r = vcg_matching(&w).unwrap();
        for i in 0..3 {
            if let (Some(j), Some(price)) = (r.matched[i], r.vcg_prices[i].clone()) {
                assert!(!price.is_negative());
                assert!(w[i][j] >= price);
            }
        }
    }

    /// Brute-force oracle: enumerate every matching over nonnegative edges.
    pub(crate) fn oracle(weights: &[Vec<Rat>]) -> (Vec<Option<usize>>, Rat, Vec<Option<Rat>>) {
        let nl = weights.len();
        let nr = weights[0].len();
        let mut best_sets: Vec<Vec<Option<usize>>> = Vec::new();
        let mut best_val: Option<Rat> = None;
        let mut cur = vec![None; nl];
        enumerate(0, nl, nr, weights, &mut cur, &mut best_sets, &mut best_val);
        let total = best_val.unwrap();
        // lex-min by (matched?, partner) per left index
        best_sets.sort_by(|a, b| {
            for i in 0..nl {
                let ka = a[i].map(|j| (0usize, j)).unwrap_or((1, 0));
                let kb = b[i].map(|j| (0usize, j)).unwrap_or((1, 0));
                match ka.cmp(&kb) {
                    std::cmp::Ordering::Equal => continue,
                    o => return o,
                }
            }
            std::cmp::Ordering::Equal
        });
        let chosen = best_sets[0].clone();
        let mut prices = vec![None; nl];
        for i in 0..nl {
            if let Some(j) = chosen[i] {
                // best total without left i
                let mut sub_best: Option<Rat> = None;
                let reduced: Vec<Vec<Rat>> = weights
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != i)
                    .map(|(_, r)| r.clone())
                    .collect();
                if reduced.is_empty() {
                    sub_best = Some(Rat::zero());
                } else {
                    let mut c = vec![None; reduced.len()];
                    let mut sets = Vec::new();
                    enumerate(0, reduced.len(), nr, &reduced, &mut c, &mut sets, &mut sub_best);
                }
                let without = sub_best.unwrap();
                let others = &total - &weights[i][j];
                prices[i] = Some(without - others);
            }
        }
        return (chosen, total, prices);

        fn enumerate(
            i: usize,
            nl: usize,
            nr: usize,
            w: &[Vec<Rat>],
            cur: &mut Vec<Option<usize>>,
            best_sets: &mut Vec<Vec<Option<usize>>>,
            best: &mut Option<Rat>,
        ) {
            if i == nl {
                let total: Rat = cur
                    .iter()
                    .enumerate()
                    .filter_map(|(l, j)| j.map(|j| w[l][j].clone()))
                    .sum();
                match best.clone() {
                    None => {
                        *best = Some(total);
                        best_sets.clear();
                        best_sets.push(cur.clone());
                    }
                    Some(b) if total > b => {
                        *best = Some(total);
                        best_sets.clear();
                        best_sets.push(cur.clone());
                    }
                    Some(b) if total == b => best_sets.push(cur.clone()),
                    _ => {}
                }
                return;
            }
            cur[i] = None;
            enumerate(i + 1, nl, nr, w, cur, best_sets, best);
            for j in 0..nr {
                if w[i][j].is_negative() {
                    continue;
                }
                if cur[..i].iter().any(|&x| x == Some(j)) {
                    continue;
                }
                cur[i] = Some(j);
                enumerate(i + 1, nl, nr, w, cur, best_sets, best);
            }
            cur[i] = None;
        }
    }

    #[test]
    fn agrees_with_oracle_on_random_matrices() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(2_024);
        for case in 0..200 {
            let r = rng.random_range(1..=5usize);
            let w: Vec<Vec<Rat>> = (0..r)
                .map(|_| {
                    (0..r)
                        .map(|_| Rat::new(rng.random_range(-4..=6), rng.random_range(1..=2)))
                        .collect()
                })
                .collect();
            let ours = vcg_matching(&w).unwrap();
            let (set, total, prices) = oracle(&w);
            assert_eq!(ours.total_weight, total, "case {case}: {w:?}");
            assert_eq!(ours.matched, set, "case {case}: {w:?}");
            assert_eq!(ours.vcg_prices, prices, "case {case}: {w:?}");
        }
    }
}
