//! Coupled dominated distribution pairs and approximate revenue
//! monotonicity. A pair couples a base spec with a pointwise value-raising
//! transform of its private information, so first-order stochastic dominance
//! holds by construction and is verified exhaustively; the single-dimensional
//! dominator replaces every valuation by `max_i v({i}) * |S|`.

use crate::error::{Caps, Error, Result};
use crate::items::ItemSet;
use crate::optimal::exact_rev;
use crate::rat::Rat;
use crate::simple::{brev_ts, srev_star_ts};
use crate::typespace::{TypeEntry, TypeSpace};
use crate::valuation::{PrivateInfo, PrivateInfoDist, SupportAtom, ValuationSpec};
use serde::{Deserialize, Serialize};

/// Monotone value-raising map applied to every coordinate of an item's
/// private information.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InfoTransform {
    Identity,
    /// Add a nonnegative amount.
    Shift { amount: Rat },
    /// Multiply by a factor at least one.
    Scale { factor: Rat },
    /// Raise to a floor: `x -> max(x, floor)`.
    Floor { floor: Rat },
}

impl InfoTransform {
    fn validate(&self) -> Result<()> {
        match self {
            InfoTransform::Identity => Ok(()),
            InfoTransform::Shift { amount } if !amount.is_negative() => Ok(()),
            InfoTransform::Scale { factor } if *factor >= Rat::one() => Ok(()),
            InfoTransform::Floor { floor } if !floor.is_negative() => Ok(()),
            _ => Err(Error::Parameter(
                "transform must be value-raising (shift >= 0, scale >= 1, floor >= 0)".into(),
            )),
        }
    }

    fn apply_scalar(&self, x: &Rat) -> Rat {
        match self {
            InfoTransform::Identity => x.clone(),
            InfoTransform::Shift { amount } => x + amount,
            InfoTransform::Scale { factor } => x * factor,
            InfoTransform::Floor { floor } => x.clone().max(floor.clone()),
        }
    }

    pub fn apply(&self, x: &PrivateInfo) -> PrivateInfo {
        match x {
            PrivateInfo::Scalar(v) => PrivateInfo::Scalar(self.apply_scalar(v)),
            PrivateInfo::Vector(vs) => {
                PrivateInfo::Vector(vs.iter().map(|v| self.apply_scalar(v)).collect())
            }
        }
    }
}

/// A base spec together with per-item transforms and the induced dominating
/// spec. The coupling is explicit: sampling the base atom and applying the
/// transform yields the dominating draw.
#[derive(Clone, Debug)]
pub struct CoupledPair {
    pub base: ValuationSpec,
    pub transforms: Vec<InfoTransform>,
    pub plus: ValuationSpec,
}

impl CoupledPair {
    pub fn new(base: ValuationSpec, transforms: Vec<InfoTransform>) -> Result<Self> {
        if transforms.len() != base.n as usize {
            return Err(Error::Parameter("one transform per item".into()));
        }
        for t in &transforms {
            t.validate()?;
        }
        let items = base
            .items
            .iter()
            .zip(&transforms)
            .map(|(d, t)| {
                // transformed atoms can collide (floors); merge probabilities
                let mut support: Vec<SupportAtom> = Vec::new();
                for atom in &d.support {
                    let x = t.apply(&atom.x);
                    match support.iter_mut().find(|s| s.x == x) {
                        Some(s) => s.p += &atom.p,
                        None => support.push(SupportAtom { x, p: atom.p.clone() }),
                    }
                }
                PrivateInfoDist { support }
            })
            .collect();
        let plus = ValuationSpec::new(base.n, base.class.clone(), items)?;
        Ok(CoupledPair {
            base,
            transforms,
            plus,
        })
    }

    pub fn identity(base: ValuationSpec) -> Result<Self> {
        let n = base.n as usize;
        CoupledPair::new(base, vec![InfoTransform::Identity; n])
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DominanceReport {
    pub ok: bool,
    /// Exact `E[max_S (v+(S) - v(S))]` under the coupling.
    pub delta_bar: Rat,
    pub violation: Option<String>,
}

/// Exhaustively verify the coupled dominance `v+(S) >= v(S)` for every
/// support profile and subset, and compute the expected maximal difference.
pub fn check_dominance(pair: &CoupledPair, caps: &Caps) -> Result<DominanceReport> {
    let work = pair
        .base
        .profile_count()
        .saturating_mul(1u128 << pair.base.n);
    caps.check("dominance check", work, caps.support_profiles)?;
    let mut delta_bar = Rat::zero();
    for (idxs, prob) in pair.base.profiles() {
        let infos = pair.base.profile_infos(&idxs);
        let transformed: Vec<PrivateInfo> = infos
            .iter()
            .zip(&pair.transforms)
            .map(|(x, t)| t.apply(x))
            .collect();
        let trefs: Vec<&PrivateInfo> = transformed.iter().collect();
        let mut max_delta = Rat::zero();
        for s in ItemSet::all(pair.base.n) {
            let base_v = pair.base.evaluate(&infos, s)?;
            let plus_v = pair.plus.evaluate(&trefs, s)?;
            let delta = &plus_v - &base_v;
            if delta.is_negative() {
                return Ok(DominanceReport {
                    ok: false,
                    delta_bar: Rat::zero(),
                    violation: Some(format!(
                        "profile {idxs:?}, set {s}: dominated value {base_v} exceeds {plus_v}"
                    )),
                });
            }
            if delta > max_delta {
                max_delta = delta;
            }
        }
        delta_bar += prob * max_delta;
    }
    Ok(DominanceReport {
        ok: true,
        delta_bar,
        violation: None,
    })
}

/// The single-dimensional dominator: every type's valuation is replaced by
/// `v+(S) = max_i v({i}) * |S|`. Dominance follows from subadditivity and is
/// asserted exhaustively. Identical dominating types are merged.
pub fn single_dim_dominator(ts: &TypeSpace) -> Result<TypeSpace> {
    let n = ts.n;
    let entries: Result<Vec<TypeEntry>> = ts
        .entries
        .iter()
        .map(|e| {
            let best = (0..n)
                .map(|i| e.table[ItemSet::singleton(i).0 as usize].clone())
                .max()
                .unwrap_or_else(Rat::zero);
            let table: Vec<Rat> = ItemSet::all(n)
                .map(|s| &best * &Rat::int(s.len() as i64))
                .collect();
            for s in ItemSet::all(n) {
                if table[s.0 as usize] < e.table[s.0 as usize] {
                    return Err(Error::Dominance(format!(
                        "single-dimensional table below the base on {s}"
                    )));
                }
            }
            Ok(TypeEntry {
                prob: e.prob.clone(),
                table,
            })
        })
        .collect();
    Ok(TypeSpace::new(n, entries?)?.canonical())
}

#[derive(Clone, Debug, Serialize)]
pub enum Gap {
    Finite(Rat),
    Infinite,
}

/// `Rev(D) / Rev(D+)`, the factor by which revenue drops under the
/// dominating distribution.
pub fn monotonicity_gap(base: &TypeSpace, plus: &TypeSpace, caps: &Caps) -> Result<Gap> {
    let (rev_base, _) = exact_rev(base, caps)?;
    let (rev_plus, _) = exact_rev(plus, caps)?;
    if rev_plus.is_zero() {
        if rev_base.is_zero() {
            return Ok(Gap::Finite(Rat::one()));
        }
        return Ok(Gap::Infinite);
    }
    Ok(Gap::Finite(rev_base / rev_plus))
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotonePairReport {
    pub rev_base: Rat,
    pub rev_plus: Rat,
    pub gap: Gap,
    /// `alpha * Rev(D+) >= Rev(D)`.
    pub alpha_pass: bool,
    pub brev_base: Rat,
    pub brev_plus: Rat,
    pub brev_monotone: bool,
    pub srev_star_base: Option<Rat>,
    pub srev_star_plus: Option<Rat>,
    pub srev_star_monotone: Option<bool>,
    /// For single-dimensional dominators: `Rev(D+) = BRev(D+)` exactly.
    pub single_dim_brev_equals_rev: Option<bool>,
}

impl MonotonePairReport {
    pub fn all_pass(&self) -> bool {
        self.alpha_pass
            && self.brev_monotone
            && self.srev_star_monotone.unwrap_or(true)
            && self.single_dim_brev_equals_rev.unwrap_or(true)
    }
}

/// Verify one dominated/dominating pair at a given `alpha`, plus the
/// monotone-component facts: grand-bundle revenue and the quantile proxy (at
/// a fixed quantile vector, when provided) never decrease under dominance.
/// `single_dim` additionally asserts that the dominating space is optimally
/// sold by its grand-bundle reserve.
pub fn verify_pair(
    base: &TypeSpace,
    plus: &TypeSpace,
    alpha: &Rat,
    qvec: Option<&[Rat]>,
    single_dim: bool,
    caps: &Caps,
) -> Result<MonotonePairReport> {
    let (rev_base, _) = exact_rev(base, caps)?;
    let (rev_plus, _) = exact_rev(plus, caps)?;
    let alpha_pass = alpha * &rev_plus >= rev_base;
    let (_, brev_base) = brev_ts(base)?;
    let (_, brev_plus) = brev_ts(plus)?;
    let (srev_star_base, srev_star_plus, srev_star_monotone) = match qvec {
        Some(q) => {
            let b = srev_star_ts(base, q)?;
            let p = srev_star_ts(plus, q)?;
            let mono = p >= b;
            (Some(b), Some(p), Some(mono))
        }
        None => (None, None, None),
    };
    let single_dim_brev_equals_rev = if single_dim {
        Some(brev_plus == rev_plus)
    } else {
        None
    };
    let gap = if rev_plus.is_zero() {
        if rev_base.is_zero() {
            Gap::Finite(Rat::one())
        } else {
            Gap::Infinite
        }
    } else {
        Gap::Finite(&rev_base / &rev_plus)
    };
    Ok(MonotonePairReport {
        alpha_pass,
        gap,
        brev_monotone: brev_plus >= brev_base,
        rev_base,
        rev_plus,
        brev_base,
        brev_plus,
        srev_star_base,
        srev_star_plus,
        srev_star_monotone,
        single_dim_brev_equals_rev,
    })
}

/// The converse report: a measured monotonicity factor `alpha` implies the
/// bound `alpha ((37 alpha + 24) SRev + 6 BRev)` on optimal revenue. This is
/// reported, never asserted.
pub fn converse_bound(alpha: &Rat, srev: &Rat, brev: &Rat) -> Rat {
    alpha * &((Rat::int(37) * alpha + Rat::int(24)) * srev + Rat::int(6) * brev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuation::ValClass;

    fn caps() -> Caps {
        Caps::default()
    }

    fn u12_spec(n: u32) -> ValuationSpec {
        ValuationSpec::new(
            n,
            ValClass::Additive,
            vec![
                PrivateInfoDist::scalar(vec![(1, Rat::new(1, 2)), (2, Rat::new(1, 2))]);
                n as usize
            ],
        )
        .unwrap()
    }

    #[test]
    fn identity_coupling_has_zero_delta() {
        let pair = CoupledPair::identity(u12_spec(2)).unwrap();
        let report = check_dominance(&pair, &caps()).unwrap();
        assert!(report.ok);
        assert_eq!(report.delta_bar, Rat::zero());
    }

    #[test]
    fn shift_coupling_delta_is_n() {
        // +1 on every additive item raises every set by |S|; max at [n]
        let n = 2;
        let pair = CoupledPair::new(
            u12_spec(n),
            vec![InfoTransform::Shift { amount: Rat::one() }; n as usize],
        )
        .unwrap();
        let report = check_dominance(&pair, &caps()).unwrap();
        assert!(report.ok);
        assert_eq!(report.delta_bar, Rat::int(n as i64));
    }

    #[test]
    fn lowering_transform_rejected() {
        let bad = CoupledPair::new(
            u12_spec(1),
            vec![InfoTransform::Scale {
                factor: Rat::new(1, 2),
            }],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn floor_transform_merges_atoms() {
        let pair = CoupledPair::new(
            u12_spec(1),
            vec![InfoTransform::Floor {
                floor: Rat::int(2),
            }],
        )
        .unwrap();
        // both atoms map to 2
        assert_eq!(pair.plus.items[0].support.len(), 1);
        assert!(check_dominance(&pair, &caps()).unwrap().ok);
    }

    #[test]
    fn single_dim_dominator_tables() {
        // point mass additive (1,2): dominator is 2|S|
        let spec = ValuationSpec::new(
            2,
            ValClass::Additive,
            vec![
                PrivateInfoDist::scalar(vec![(1, Rat::one())]),
                PrivateInfoDist::scalar(vec![(2, Rat::one())]),
            ],
        )
        .unwrap();
        let ts = spec.enumerate_type_space(&caps()).unwrap();
        let plus = single_dim_dominator(&ts).unwrap();
        assert_eq!(plus.entries.len(), 1);
        assert_eq!(
            plus.entries[0].table,
            vec![Rat::zero(), Rat::int(2), Rat::int(2), Rat::int(4)]
        );
        // n = 1: identity
        let one = u12_spec(1).enumerate_type_space(&caps()).unwrap();
        let dom = single_dim_dominator(&one).unwrap();
        assert_eq!(dom.canonical(), one.canonical());
    }

    #[test]
    fn single_dim_brev_is_optimal() {
        // for every single-dimensional space the bundle reserve is optimal
        let ts = u12_spec(2).enumerate_type_space(&caps()).unwrap();
        let plus = single_dim_dominator(&ts).unwrap();
        let (rev, _) = exact_rev(&plus, &caps()).unwrap();
        let (_, brev_rev) = brev_ts(&plus).unwrap();
        assert_eq!(rev, brev_rev);
    }

    #[test]
    fn identity_pair_passes_alpha_one() {
        let ts = u12_spec(2).enumerate_type_space(&caps()).unwrap();
        let report = verify_pair(&ts, &ts, &Rat::one(), None, false, &caps()).unwrap();
        assert!(report.all_pass());
        match report.gap {
            Gap::Finite(g) => assert_eq!(g, Rat::one()),
            Gap::Infinite => panic!("identity pair has finite gap"),
        }
    }

    #[test]
    fn shift_pair_alpha_338() {
        let base_spec = u12_spec(2);
        let pair = CoupledPair::new(
            base_spec.clone(),
            vec![InfoTransform::Shift { amount: Rat::one() }; 2],
        )
        .unwrap();
        let base = base_spec.enumerate_type_space(&caps()).unwrap();
        let plus = pair.plus.enumerate_type_space(&caps()).unwrap();
        let report = compute_report(&base, &plus);
        assert!(report.all_pass());
    }

    fn compute_report(base: &TypeSpace, plus: &TypeSpace) -> MonotonePairReport {
        verify_pair(base, plus, &Rat::int(338), None, false, &caps()).unwrap()
    }

    #[test]
    fn converse_bound_formula() {
        assert_eq!(
            converse_bound(&Rat::int(2), &Rat::int(3), &Rat::int(5)),
            Rat::int(2) * (Rat::int(98) * Rat::int(3) + Rat::int(30))
        );
    }
}
