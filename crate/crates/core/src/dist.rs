//! One-dimensional discrete value distributions and the scalar reserve-price
//! primitives built on them: the optimal reserve (Myerson), and the optimal
//! reserve constrained to sell with probability at most `q`, where the sale
//! probability is realized exactly by splitting the atom at the reserve with
//! an independent coin.

use crate::error::{Error, Result};
use crate::rat::Rat;
use serde::{Deserialize, Serialize};

/// Discrete distribution of a nonnegative scalar value. Values are sorted
/// ascending and distinct; probabilities are positive and sum to one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneDimDist {
    pub atoms: Vec<(Rat, Rat)>,
}

impl OneDimDist {
    /// Build from arbitrary (value, prob) pairs: merges equal values, drops
    /// zero-probability atoms, sorts, and validates.
    pub fn new(pairs: Vec<(Rat, Rat)>) -> Result<Self> {
        let mut pairs: Vec<(Rat, Rat)> = pairs.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let mut atoms: Vec<(Rat, Rat)> = Vec::new();
        for (v, p) in pairs {
            if p.is_negative() {
                return Err(Error::Parameter("negative probability".into()));
            }
            if v.is_negative() {
                return Err(Error::Parameter("negative value in distribution".into()));
            }
            match atoms.last_mut() {
                Some((lv, lp)) if *lv == v => *lp += &p,
                _ => atoms.push((v, p)),
            }
        }
        if atoms.is_empty() {
            return Err(Error::Parameter("empty distribution".into()));
        }
        let total: Rat = atoms.iter().map(|(_, p)| p).sum();
        if total != Rat::one() {
            return Err(Error::Parameter(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(OneDimDist { atoms })
    }

    pub fn point_mass(v: Rat) -> Self {
        OneDimDist {
            atoms: vec![(v, Rat::one())],
        }
    }

    pub fn support(&self) -> impl Iterator<Item = &Rat> {
        self.atoms.iter().map(|(v, _)| v)
    }

    pub fn prob_eq(&self, v: &Rat) -> Rat {
        self.atoms
            .iter()
            .find(|(w, _)| w == v)
            .map(|(_, p)| p.clone())
            .unwrap_or_else(Rat::zero)
    }

    pub fn prob_gt(&self, v: &Rat) -> Rat {
        self.atoms
            .iter()
            .filter(|(w, _)| w > v)
            .map(|(_, p)| p)
            .sum()
    }

    pub fn prob_ge(&self, v: &Rat) -> Rat {
        self.atoms
            .iter()
            .filter(|(w, _)| w >= v)
            .map(|(_, p)| p)
            .sum()
    }

    pub fn prob_le(&self, v: &Rat) -> Rat {
        self.atoms
            .iter()
            .filter(|(w, _)| w <= v)
            .map(|(_, p)| p)
            .sum()
    }

    pub fn expectation(&self) -> Rat {
        self.atoms.iter().map(|(v, p)| v * p).sum()
    }

    pub fn max_value(&self) -> &Rat {
        &self.atoms.last().expect("nonempty").0
    }

    /// Smallest support value `a` with `P[v <= a] >= 1/2`.
    pub fn median(&self) -> Rat {
        let half = Rat::new(1, 2);
        let mut cdf = Rat::zero();
        for (v, p) in &self.atoms {
            cdf += p;
            if cdf >= half {
                return v.clone();
            }
        }
        unreachable!("probabilities sum to 1")
    }

    /// Mixture of distributions with the given weights (weights positive,
    /// summing to one).
    pub fn mix(parts: &[(Rat, &OneDimDist)]) -> Result<Self> {
        let mut pairs = Vec::new();
        for (w, d) in parts {
            for (v, p) in &d.atoms {
                pairs.push((v.clone(), w * p));
            }
        }
        OneDimDist::new(pairs)
    }
}

/// A reserve price together with the exact sale probability it realizes.
/// `atom_fraction` is the share of the atom at `price` that ends in a sale:
/// the infinitesimal tie-breaker of the one-dimensional model is realized by
/// an independent coin, so `sale_prob = P[v > price] + atom_fraction * P[v = price]`
/// holds exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantilePrice {
    pub price: Rat,
    pub sale_prob: Rat,
    pub atom_fraction: Rat,
}

/// Optimal reserve price: maximizes `p * P[v >= p]` over support prices,
/// breaking ties toward the lowest price. Returns `(price, revenue)`.
pub fn myerson_one_dim(d: &OneDimDist) -> (Rat, Rat) {
    let mut best: Option<(Rat, Rat)> = None;
    let mut tail = Rat::one(); // P[v >= current] scanning ascending
    for (idx, (v, _)) in d.atoms.iter().enumerate() {
        let rev = v * &tail;
        match &best {
            Some((_, r)) if *r >= rev => {}
            _ => best = Some((v.clone(), rev.clone())),
        }
        if idx + 1 < d.atoms.len() {
            tail = &tail - &d.atoms[idx].1;
        }
    }
    best.expect("nonempty distribution")
}

/// Optimal revenue from a reserve that sells with probability at most `q`,
/// realized exactly (footnote tie-breaker): maximizes `q' * F^{-1}(q')` over
/// `q'` in the finite candidate set of support quantiles plus `q` itself.
pub fn rev_q(d: &OneDimDist, q: &Rat) -> (Rat, QuantilePrice) {
    assert!(
        !q.is_negative() && q <= &Rat::one(),
        "q must lie in [0, 1]"
    );
    if q.is_zero() {
        // a price strictly above the support never sells
        let price = d.max_value() + &Rat::one();
        return (
            Rat::zero(),
            QuantilePrice {
                price,
                sale_prob: Rat::zero(),
                atom_fraction: Rat::zero(),
            },
        );
    }
    // candidate sale probabilities: support quantiles <= q, plus q
    let mut candidates: Vec<Rat> = d
        .support()
        .map(|w| d.prob_ge(w))
        .filter(|p| p <= q && p.is_positive())
        .collect();
    candidates.push(q.clone());
    candidates.sort();
    candidates.dedup();

    let mut best: Option<(Rat, Rat, Rat)> = None; // (revenue, q', price)
    for qp in candidates {
        // F^{-1}(q') = max support value w with P[v >= w] >= q'
        let price = d
            .support()
            .filter(|w| d.prob_ge(w) >= qp)
            .max()
            .expect("q' <= 1 so the minimum support value qualifies")
            .clone();
        let rev = &qp * &price;
        let better = match &best {
            None => true,
            Some((r, _, _)) => rev > *r,
        };
        if better {
            best = Some((rev, qp, price));
        }
    }
    let (rev, sale_prob, price) = best.expect("candidate set nonempty");
    let p_gt = d.prob_gt(&price);
    let p_eq = d.prob_eq(&price);
    let atom_fraction = if p_eq.is_zero() {
        Rat::zero()
    } else {
        (&sale_prob - &p_gt) / &p_eq
    };
    debug_assert!(!atom_fraction.is_negative() && atom_fraction <= Rat::one());
    (
        rev,
        QuantilePrice {
            price,
            sale_prob,
            atom_fraction,
        },
    )
}
