//! Core-tail machinery: the cutoff that splits items into a high-value tail
//! and a bounded core, exact per-item conditioning on tail membership (with
//! the atom at the cutoff split fractionally by an independent coin), and
//! the verified inequality chain that assembles the headline revenue bound
//! from its components.
//!
//! The cutoff realizes "empty tail with probability exactly one half" on
//! discrete supports: tail membership of item `i` is `v({i}) > t`, plus a
//! `theta`-fraction of the atom at `t`. The fraction is solved exactly when
//! the pivotal polynomial is linear and by bisection otherwise; bisection
//! always leaves the empty-tail probability at or above the target, the
//! direction in which the halved-form constants stay sound.

use crate::dist::myerson_one_dim;
use crate::error::{Caps, Error, Result};
use crate::interval::{le_verdict, ln, ln2, pow_log2_6, Enclosure, Verdict, DEFAULT_TERMS};
use crate::items::ItemSet;
use crate::optimal::exact_rev;
use crate::rat::Rat;
use crate::simple::{brev, srev_star_dists};
use crate::typespace::TypeSpace;
use crate::valuation::{PrivateInfoDist, SupportAtom, ValuationSpec};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffMode {
    /// Solve for the atom fraction so the empty-tail probability hits the
    /// target exactly (up to the stated bisection tolerance, from above).
    ExactHalf,
    /// Smallest support threshold with empty-tail probability at least the
    /// target; no atom splitting.
    ThresholdOnly,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CutoffReport {
    pub t: Rat,
    pub theta: Rat,
    /// Whether theta is an exact root (vs. a bisection approximation).
    pub theta_exact: bool,
    pub p_items: Vec<Rat>,
    pub p_empty: Rat,
    pub mode: CutoffMode,
}

const BISECT_MAX_ITERS: u32 = 200;

fn rel_tol() -> Rat {
    Rat::one()
        / Rat::from_big(num::BigRational::from_integer(num::bigint::BigInt::from(
            1u128 << 40,
        )))
}

/// Tail probability of one item at threshold `t` with atom fraction `theta`.
fn item_tail_prob(d: &crate::dist::OneDimDist, t: &Rat, theta: &Rat) -> Rat {
    d.prob_gt(t) + theta * &d.prob_eq(t)
}

/// Compute the core-tail cutoff targeting `P[tail empty] = target`
/// (default one half).
pub fn compute_cutoff(
    spec: &ValuationSpec,
    target: &Rat,
    mode: CutoffMode,
) -> Result<CutoffReport> {
    if !target.is_positive() || target >= &Rat::one() {
        return Err(Error::Parameter("target must lie in (0,1)".into()));
    }
    if spec.n == 0 {
        return Err(Error::Degenerate("empty ground set".into()));
    }
    let dists = spec.single_item_dists()?;
    if dists.iter().all(|d| d.max_value().is_zero()) {
        return Err(Error::Degenerate("all singleton values are zero".into()));
    }
    let mut thresholds: Vec<Rat> = dists.iter().flat_map(|d| d.support().cloned()).collect();
    thresholds.sort();
    thresholds.dedup();

    let p_empty_at = |t: &Rat, theta: &Rat| -> Rat {
        dists
            .iter()
            .map(|d| Rat::one() - item_tail_prob(d, t, theta))
            .product()
    };

    match mode {
        CutoffMode::ThresholdOnly => {
            let t = thresholds
                .iter()
                .find(|t| p_empty_at(t, &Rat::zero()) >= *target)
                .expect("the maximal support value leaves the tail empty")
                .clone();
            let theta = Rat::zero();
            let p_items: Vec<Rat> = dists
                .iter()
                .map(|d| item_tail_prob(d, &t, &theta))
                .collect();
            let p_empty = p_empty_at(&t, &theta);
            Ok(CutoffReport {
                t,
                theta,
                theta_exact: true,
                p_items,
                p_empty,
                mode,
            })
        }
        CutoffMode::ExactHalf => {
            // largest threshold where fully closing the atom reaches the target
            let t = thresholds
                .iter()
                .rev()
                .find(|t| p_empty_at(t, &Rat::one()) <= *target)
                .expect("the minimal support value puts every item in the tail")
                .clone();
            // p_empty(t, theta) moves from above the target (theta=0) to at
            // most the target (theta=1); solve for theta
            let atoms: Vec<usize> = dists
                .iter()
                .enumerate()
                .filter(|(_, d)| d.prob_eq(&t).is_positive())
                .map(|(i, _)| i)
                .collect();
            debug_assert!(!atoms.is_empty());
            let (theta, theta_exact) = if atoms.len() == 1 {
                // linear: (1 - a - theta b) * rest = target
                let i = atoms[0];
                let a = dists[i].prob_gt(&t);
                let b = dists[i].prob_eq(&t);
                let rest: Rat = dists
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, d)| Rat::one() - item_tail_prob(d, &t, &Rat::one()))
                    .product();
                debug_assert!(rest.is_positive());
                let theta = (Rat::one() - &a - target / &rest) / &b;
                (theta.max(Rat::zero()).min(Rat::one()), true)
            } else {
                // bisection, keeping the lower endpoint (p_empty >= target)
                let mut lo = Rat::zero();
                let mut hi = Rat::one();
                let tol = target * rel_tol();
                let mut exact = false;
                for _ in 0..BISECT_MAX_ITERS {
                    let at_lo = p_empty_at(&t, &lo);
                    if at_lo == *target {
                        exact = true;
                        break;
                    }
                    if &at_lo - target <= tol {
                        break;
                    }
                    let mid = (&lo + &hi) / Rat::int(2);
                    let at_mid = p_empty_at(&t, &mid);
                    if at_mid >= *target {
                        lo = mid;
                        if at_mid == *target {
                            exact = true;
                            break;
                        }
                    } else {
                        hi = mid;
                    }
                }
                (lo, exact)
            };
            let p_items: Vec<Rat> = dists
                .iter()
                .map(|d| item_tail_prob(d, &t, &theta))
                .collect();
            let p_empty: Rat = p_items.iter().map(|p| Rat::one() - p).product();
            debug_assert!(p_empty >= *target);
            Ok(CutoffReport {
                t,
                theta,
                theta_exact,
                p_items,
                p_empty,
                mode,
            })
        }
    }
}

/// `p_A`: the probability that `A` is exactly the tail set.
pub fn subset_prob(report: &CutoffReport, a: ItemSet) -> Rat {
    report
        .p_items
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if a.contains(i as u32) {
                p.clone()
            } else {
                Rat::one() - p
            }
        })
        .product()
}

/// The spec conditioned on `A` being exactly the tail set, as a product spec
/// over the full ground set: item `i` is conditioned on tail membership if
/// `i` is in `A` and on core membership otherwise. The atom at the cutoff is
/// split by `theta` into both branches. Errors if the event has zero
/// probability.
pub fn conditioned_spec(
    spec: &ValuationSpec,
    report: &CutoffReport,
    a: ItemSet,
) -> Result<ValuationSpec> {
    let mut items = Vec::with_capacity(spec.n as usize);
    for i in 0..spec.n {
        let tail_side = a.contains(i);
        let d = &spec.items[i as usize];
        let mut support = Vec::new();
        let mut mass = Rat::zero();
        for atom in &d.support {
            let mut infos: Vec<&crate::valuation::PrivateInfo> = Vec::new();
            for j in 0..spec.n {
                infos.push(if j == i {
                    &atom.x
                } else {
                    &spec.items[j as usize].support[0].x
                });
            }
            let w = spec.evaluate(&infos, ItemSet::singleton(i))?;
            let share = if w > report.t {
                if tail_side {
                    Rat::one()
                } else {
                    Rat::zero()
                }
            } else if w == report.t {
                if tail_side {
                    report.theta.clone()
                } else {
                    Rat::one() - &report.theta
                }
            } else if tail_side {
                Rat::zero()
            } else {
                Rat::one()
            };
            let p = &atom.p * &share;
            if p.is_positive() {
                mass += &p;
                support.push(SupportAtom {
                    x: atom.x.clone(),
                    p,
                });
            }
        }
        if !mass.is_positive() {
            return Err(Error::EmptyEvent(format!(
                "item {} cannot lie on the {} side of the cutoff",
                i + 1,
                if tail_side { "tail" } else { "core" }
            )));
        }
        for atom in &mut support {
            atom.p = &atom.p / &mass;
        }
        items.push(PrivateInfoDist { support });
    }
    ValuationSpec::new(spec.n, spec.class.clone(), items)
}

/// Tail and core type spaces for tail set `A`: the conditioned distribution
/// restricted to `A` and to its complement, respectively.
pub fn conditioned_spaces(
    spec: &ValuationSpec,
    report: &CutoffReport,
    a: ItemSet,
    caps: &Caps,
) -> Result<(TypeSpace, TypeSpace)> {
    let cond = conditioned_spec(spec, report, a)?;
    let tail = cond.restrict(a)?.enumerate_type_space(caps)?;
    let core = cond
        .restrict(ItemSet::full(spec.n).minus(a))?
        .enumerate_type_space(caps)?;
    Ok((tail, core))
}

/// Expected value of the whole core ground set under the empty-tail
/// conditioning.
pub fn core_value(spec: &ValuationSpec, report: &CutoffReport, caps: &Caps) -> Result<Rat> {
    let cond = conditioned_spec(spec, report, ItemSet::EMPTY)?;
    cond.bundle_expectation(caps)
}

/// `sum_A p_A Rev(D_A^T)` over tail sets of positive probability.
pub fn tail_contribution(spec: &ValuationSpec, report: &CutoffReport, caps: &Caps) -> Result<Rat> {
    let mut total = Rat::zero();
    for a in ItemSet::all(spec.n) {
        if a.is_empty() {
            continue;
        }
        let p_a = subset_prob(report, a);
        if !p_a.is_positive() {
            continue;
        }
        let cond = conditioned_spec(spec, report, a)?;
        let tail = cond.restrict(a)?.enumerate_type_space(caps)?;
        let (rev, _) = exact_rev(&tail, caps)?;
        total += p_a * rev;
    }
    Ok(total)
}

#[derive(Clone, Debug, Serialize)]
pub struct MarginalReport {
    pub lhs: Rat,
    pub rhs: Rat,
    pub slack: Rat,
    pub pass: bool,
}

/// The approximate-marginal inequality for one partition `(S, T)` of the
/// ground set: optimal revenue against `(1/e + 1/(1-e)) * E[v(S)]` plus
/// `1/(1-e)` times the expected conditional optimal revenue of the items in
/// `T` given the realized valuation on `S`. Both sides computed exactly.
pub fn verify_marginal(
    ts: &TypeSpace,
    s_side: ItemSet,
    eps: &Rat,
    caps: &Caps,
) -> Result<MarginalReport> {
    if !eps.is_positive() || eps >= &Rat::one() {
        return Err(Error::Parameter("epsilon must lie in (0,1)".into()));
    }
    if !s_side.is_subset_of(ts.full_set()) {
        return Err(Error::Parameter("partition outside ground set".into()));
    }
    let t_side = ts.full_set().minus(s_side);
    let (lhs, _) = exact_rev(ts, caps)?;

    let restricted_s = ts.restrict(s_side)?;
    let val_s = restricted_s.bundle_expectation();

    // group types by their full valuation profile on subsets of S
    let s_subsets: Vec<ItemSet> = s_side.subsets().collect();
    let mut groups: Vec<(Vec<Rat>, Rat, Vec<usize>)> = Vec::new();
    for (idx, e) in ts.entries.iter().enumerate() {
        let key: Vec<Rat> = s_subsets
            .iter()
            .map(|s| e.table[s.0 as usize].clone())
            .collect();
        match groups.iter_mut().find(|(k, _, _)| *k == key) {
            Some((_, w, members)) => {
                *w += &e.prob;
                members.push(idx);
            }
            None => groups.push((key, e.prob.clone(), vec![idx])),
        }
    }
    let mut expected_cond_rev = Rat::zero();
    for (_, w, members) in &groups {
        let entries: Vec<crate::typespace::TypeEntry> = members
            .iter()
            .map(|&i| crate::typespace::TypeEntry {
                prob: &ts.entries[i].prob / w,
                table: ts.entries[i].table.clone(),
            })
            .collect();
        let cond = TypeSpace::new(ts.n, entries)?.restrict(t_side)?;
        let (rev, _) = exact_rev(&cond, caps)?;
        expected_cond_rev += w * &rev;
    }

    let one = Rat::one();
    let coef_val = &one / eps + &one / (&one - eps);
    let coef_rev = &one / (&one - eps);
    let rhs = &coef_val * &val_s + &coef_rev * &expected_cond_rev;
    let slack = &rhs - &lhs;
    Ok(MarginalReport {
        pass: !slack.is_negative(),
        lhs,
        rhs,
        slack,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct IneqEntry {
    pub name: String,
    pub lhs: Rat,
    pub rhs_lo: Rat,
    pub rhs_hi: Rat,
    /// `rhs_lo - lhs`: nonnegative on a sound pass.
    pub slack: Rat,
    pub verdict: Verdict,
}

impl IneqEntry {
    pub fn exact(name: &str, lhs: Rat, rhs: Rat) -> IneqEntry {
        let slack = &rhs - &lhs;
        IneqEntry {
            name: name.to_string(),
            verdict: if slack.is_negative() {
                Verdict::Fail
            } else {
                Verdict::Pass
            },
            rhs_lo: rhs.clone(),
            rhs_hi: rhs,
            lhs,
            slack,
        }
    }

    pub fn enclosed(name: &str, lhs: Rat, rhs: Enclosure) -> IneqEntry {
        let verdict = le_verdict(&lhs, &rhs);
        IneqEntry {
            name: name.to_string(),
            slack: &rhs.lo - &lhs,
            rhs_lo: rhs.lo,
            rhs_hi: rhs.hi,
            lhs,
            verdict,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    pub cutoff: CutoffReport,
    pub epsilon: Rat,
    pub rev: Rat,
    pub brev: Rat,
    pub srev_star_p: Rat,
    pub val_core: Rat,
    pub tail_contribution: Rat,
    pub entries: Vec<IneqEntry>,
    pub notes: Vec<String>,
}

impl DecompositionReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.verdict == Verdict::Pass)
    }
}

/// Verify the full inequality chain on one instance. The halved-form
/// entries (`tail_bound_halved`, `main_theorem`) are emitted in `ExactHalf`
/// mode, where the empty-tail probability is pinned to one half from above;
/// `ThresholdOnly` mode reports the general-form constants instead.
pub fn verify_chain(
    spec: &ValuationSpec,
    eps: &Rat,
    mode: CutoffMode,
    caps: &Caps,
) -> Result<DecompositionReport> {
    if !eps.is_positive() || eps >= &Rat::one() {
        return Err(Error::Parameter("epsilon must lie in (0,1)".into()));
    }
    let half = Rat::new(1, 2);
    let report = compute_cutoff(spec, &half, mode)?;
    let mut notes = Vec::new();
    if !report.theta_exact {
        notes.push(format!(
            "theta found by bisection; p_empty - 1/2 = {}",
            &report.p_empty - &half
        ));
    }

    let ts = spec.enumerate_type_space(caps)?;
    let (rev, _) = exact_rev(&ts, caps)?;

    // conditioned revenues per tail set
    let mut stitch_sum = Rat::zero();
    let mut tail_sum = Rat::zero();
    for a in ItemSet::all(spec.n) {
        let p_a = subset_prob(&report, a);
        if !p_a.is_positive() {
            continue;
        }
        let cond = conditioned_spec(spec, &report, a)?;
        let full_space = cond.enumerate_type_space(caps)?;
        let (rev_a, _) = exact_rev(&full_space, caps)?;
        stitch_sum += &p_a * &rev_a;
        if !a.is_empty() {
            let tail_space = cond.restrict(a)?.enumerate_type_space(caps)?;
            let (rev_t, _) = exact_rev(&tail_space, caps)?;
            tail_sum += &p_a * &rev_t;
        }
    }

    let val_core = core_value(spec, &report, caps)?;
    let (_, brev_rev) = brev(spec, caps)?;
    let dists = spec.single_item_dists()?;
    let srev_star_p = srev_star_dists(&dists, &report.p_items)?;

    let one = Rat::one();
    let coef_val = &one / eps + &one / (&one - eps);
    let coef_tail = &one / (&one - eps);

    let mut entries = Vec::new();
    entries.push(IneqEntry::exact(
        "subdomain_stitching",
        rev.clone(),
        stitch_sum,
    ));
    entries.push(IneqEntry::exact(
        "core_decomposition",
        rev.clone(),
        &coef_val * &val_core + &coef_tail * &tail_sum,
    ));
    entries.push(IneqEntry::exact(
        "cutoff_vs_srev_star",
        &report.t * &report.p_empty * (&one - &report.p_empty),
        srev_star_p.clone(),
    ));

    // core value bound: 6 BRev + 4t / ln 2 (round the irrational side down)
    let l2 = ln2(DEFAULT_TERMS);
    let four_t = Rat::int(4) * &report.t;
    let core_rhs = Enclosure {
        lo: Rat::int(6) * &brev_rev + &four_t / &l2.hi,
        hi: Rat::int(6) * &brev_rev + &four_t / &l2.lo,
    };
    entries.push(IneqEntry::enclosed(
        "core_value_bound",
        val_core.clone(),
        core_rhs,
    ));

    // weak per-item bound: Rev <= 6 n^{log2 6} sum_i Rev(D_i)
    let sum_item_rev: Rat = dists.iter().map(|d| myerson_one_dim(d).1).sum();
    let pow = pow_log2_6(spec.n, DEFAULT_TERMS);
    entries.push(IneqEntry::enclosed(
        "weak_per_item_bound",
        rev.clone(),
        pow.scale(&(Rat::int(6) * &sum_item_rev)),
    ));

    // general tail bound: (6/p_empty)(1 + 7L + 6L^2 + L^3) srev*_p
    let tail_general = tail_coefficient(&report.p_empty).scale(&srev_star_p);
    entries.push(IneqEntry::enclosed(
        "tail_bound_general",
        tail_sum.clone(),
        tail_general,
    ));

    match mode {
        CutoffMode::ExactHalf => {
            entries.push(IneqEntry::exact(
                "tail_bound_halved",
                tail_sum.clone(),
                Rat::int(109) * &srev_star_p,
            ));
            entries.push(IneqEntry::exact(
                "main_theorem",
                rev.clone(),
                Rat::int(314) * &srev_star_p + Rat::int(24) * &brev_rev,
            ));
        }
        CutoffMode::ThresholdOnly => {
            if report.p_empty < one {
                // general-form composition of the chain
                let denom = &report.p_empty * (&one - &report.p_empty);
                let coef_t = &coef_val * Rat::int(4);
                let tail_coef = tail_coefficient(&report.p_empty);
                let srev_coef_lo = &coef_t / &l2.hi / &denom + &coef_tail * &tail_coef.lo;
                let srev_coef_hi = &coef_t / &l2.lo / &denom + &coef_tail * &tail_coef.hi;
                let rhs = Enclosure {
                    lo: &coef_val * Rat::int(6) * &brev_rev + &srev_coef_lo * &srev_star_p,
                    hi: &coef_val * Rat::int(6) * &brev_rev + &srev_coef_hi * &srev_star_p,
                };
                entries.push(IneqEntry::enclosed(
                    "main_theorem_general",
                    rev.clone(),
                    rhs,
                ));
            } else {
                notes.push(
                    "tail is empty almost surely; the general-form theorem entry is vacuous and omitted"
                        .to_string(),
                );
            }
        }
    }

    Ok(DecompositionReport {
        cutoff: report,
        epsilon: eps.clone(),
        rev,
        brev: brev_rev,
        srev_star_p,
        val_core,
        tail_contribution: tail_sum,
        entries,
        notes,
    })
}

/// `(6/p)(1 + 7 ln(1/p) + 6 ln(1/p)^2 + ln(1/p)^3)` as an enclosure.
fn tail_coefficient(p_empty: &Rat) -> Enclosure {
    let one = Rat::one();
    if p_empty == &one {
        return Enclosure::exact(Rat::int(6));
    }
    let l = ln(&(&one / p_empty), DEFAULT_TERMS);
    let l2 = l.mul_nonneg(&l);
    let l3 = l2.mul_nonneg(&l);
    let poly = Enclosure::exact(one.clone())
        .add(&l.scale(&Rat::int(7)))
        .add(&l2.scale(&Rat::int(6)))
        .add(&l3);
    poly.scale(&(Rat::int(6) / p_empty))
}
