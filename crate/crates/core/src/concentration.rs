//! Lipschitz machinery and the exponential concentration bound for
//! subadditive functions of independent item information, with exact
//! verification by support enumeration and a seeded Monte-Carlo fallback
//! (marked statistical) for supports too large to enumerate.

use crate::core_tail::IneqEntry;
use crate::dist::OneDimDist;
use crate::error::{Caps, Error, Result};
use crate::interval::{exp as exp_enc, ln, ln2, Enclosure, DEFAULT_TERMS};
use crate::items::ItemSet;
use crate::rat::Rat;
use crate::valuation::ValuationSpec;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConcentrationParams {
    /// Anchor (median in the specialized form).
    pub a: Rat,
    /// Lipschitz constant.
    pub c: Rat,
    pub q: Rat,
    pub k: Rat,
}

/// Largest singleton value, which bounds the per-item Lipschitz movement;
/// additionally verifies the two-profile Lipschitz definition exhaustively
/// over all support pairs and subset pairs.
pub fn lipschitz_constant(spec: &ValuationSpec, caps: &Caps) -> Result<Rat> {
    let c = spec.max_singleton_value()?;
    let profiles = spec.profile_count();
    let work = profiles
        .saturating_mul(profiles)
        .saturating_mul(1u128 << (2 * spec.n.min(15)));
    caps.check("lipschitz check", work, caps.support_profiles)?;

    let mut tables: Vec<(Vec<usize>, Vec<Rat>)> = Vec::new();
    for (idxs, _) in spec.profiles() {
        tables.push((idxs.clone(), spec.table(&idxs)?));
    }
    check_lipschitz_profiles(spec.n, &tables, &c).map_err(Error::Invariant)?;
    Ok(c)
}

/// Exhaustive Lipschitz check over explicit profiles: entries are (per-item
/// information identifiers, full table). Two profiles disagree on item `i`
/// when their identifiers differ.
pub fn check_lipschitz_profiles(
    n: u32,
    profiles: &[(Vec<usize>, Vec<Rat>)],
    c: &Rat,
) -> std::result::Result<(), String> {
    for (xi, xt) in profiles {
        for (yi, yt) in profiles {
            for s in ItemSet::all(n) {
                for t in ItemSet::all(n) {
                    let mut moves = s.union(t).len() - s.intersect(t).len();
                    for i in s.intersect(t).iter() {
                        if xi[i as usize] != yi[i as usize] {
                            moves += 1;
                        }
                    }
                    let diff = (&xt[s.0 as usize] - &yt[t.0 as usize]).abs();
                    let allowed = c * &Rat::int(moves as i64);
                    if diff > allowed {
                        return Err(format!(
                            "|v(x,{s}) - v(y,{t})| = {diff} exceeds {moves} moves * c = {allowed}"
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Median of the grand-bundle value distribution.
pub fn median_grand_bundle(bundle: &OneDimDist) -> Rat {
    bundle.median()
}

/// The median-form concentration bound `2^q * q^{-k}` (the probability
/// factor `P[v <= a]^{-q}` is at most `2^q` when `a` is a median). Exact
/// when `q = 2` and `k` is a nonnegative integer; otherwise a certified
/// enclosure. Requires `q > 1`.
pub fn schechtman_bound(params: &ConcentrationParams) -> Result<Enclosure> {
    if params.q <= Rat::one() {
        return Err(Error::Parameter("concentration bound needs q > 1".into()));
    }
    if params.k.is_negative() {
        return Err(Error::Parameter("k must be nonnegative".into()));
    }
    if params.q == Rat::int(2) && params.k.denom() == &num::bigint::BigInt::from(1) {
        let k: u32 = params
            .k
            .numer()
            .try_into()
            .map_err(|_| Error::Parameter("k too large".into()))?;
        return Ok(Enclosure::exact(schechtman_bound_q2(k)));
    }
    // 2^q / q^k = exp(q ln 2) / exp(k ln q)
    let num = exp_enc(
        &ln2(DEFAULT_TERMS).scale(&params.q),
        DEFAULT_TERMS.max(64),
    );
    let den = exp_enc(
        &ln(&params.q, DEFAULT_TERMS).scale(&params.k),
        DEFAULT_TERMS.max(64),
    );
    Ok(num.div_pos(&den))
}

/// `4 * 2^{-k}` exactly.
pub fn schechtman_bound_q2(k: u32) -> Rat {
    Rat::int(4) / Rat::from_big(num::BigRational::from_integer(num::bigint::BigInt::from(1u8) << k))
}

#[derive(Clone, Debug, Serialize)]
pub struct TailCheck {
    pub k: u32,
    pub threshold: Rat,
    /// Exact probability, or the empirical point estimate in sampled mode.
    pub prob: Rat,
    /// Upper end of the Wilson interval in sampled mode (equals `prob`
    /// when exact).
    pub prob_upper: Rat,
    pub bound: Rat,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationReport {
    pub a: Rat,
    pub c: Rat,
    pub tails: Vec<TailCheck>,
    pub expectation: IneqEntry,
    /// True when the tail probabilities are Monte-Carlo estimates rather
    /// than exact sums.
    pub statistical: bool,
}

impl ConcentrationReport {
    pub fn all_pass(&self) -> bool {
        self.tails.iter().all(|t| t.pass)
            && self.expectation.verdict == crate::interval::Verdict::Pass
    }
}

/// Exact verification against an explicit grand-bundle distribution:
/// `P[v >= 3a + k c] <= 4 * 2^{-k}` for each requested `k`, and
/// `E[v] <= 3a + 4c/ln 2` with the right side rounded down.
pub fn verify_concentration(bundle: &OneDimDist, a: &Rat, c: &Rat, ks: &[u32]) -> ConcentrationReport {
    let three_a = Rat::int(3) * a;
    let tails = ks
        .iter()
        .map(|&k| {
            let threshold = &three_a + &(Rat::int(k as i64) * c);
            let prob = bundle.prob_ge(&threshold);
            let bound = schechtman_bound_q2(k);
            TailCheck {
                k,
                threshold,
                pass: prob <= bound,
                prob_upper: prob.clone(),
                prob,
                bound,
            }
        })
        .collect();
    let expectation = expectation_entry(bundle.expectation(), a, c);
    ConcentrationReport {
        a: a.clone(),
        c: c.clone(),
        tails,
        expectation,
        statistical: false,
    }
}

fn expectation_entry(expect: Rat, a: &Rat, c: &Rat) -> IneqEntry {
    let l2 = ln2(DEFAULT_TERMS);
    let four_c = Rat::int(4) * c;
    let rhs = Enclosure {
        lo: Rat::int(3) * a + &four_c / &l2.hi,
        hi: Rat::int(3) * a + &four_c / &l2.lo,
    };
    IneqEntry::enclosed("expected_bundle_bound", expect, rhs)
}

/// Exact verification for a spec: `a` is the bundle median and `c` the
/// verified Lipschitz constant.
pub fn verify_concentration_spec(
    spec: &ValuationSpec,
    ks: &[u32],
    caps: &Caps,
) -> Result<ConcentrationReport> {
    let bundle = spec.bundle_dist(caps)?;
    let a = bundle.median();
    let c = lipschitz_constant(spec, caps)?;
    Ok(verify_concentration(&bundle, &a, &c, ks))
}

/// Seeded Monte-Carlo fallback for supports too large to enumerate. Tail
/// probabilities are Wilson upper confidence bounds at roughly three sigma;
/// the report is marked statistical.
pub fn verify_concentration_sampled(
    spec: &ValuationSpec,
    a: &Rat,
    c: &Rat,
    ks: &[u32],
    trials: u32,
    seed: u64,
) -> Result<ConcentrationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let full = ItemSet::full(spec.n);
    let three_a = Rat::int(3) * a;
    let thresholds: Vec<Rat> = ks
        .iter()
        .map(|&k| &three_a + &(Rat::int(k as i64) * c))
        .collect();
    let mut hits = vec![0u32; ks.len()];
    let mut value_sum = Rat::zero();
    for _ in 0..trials {
        let mut idxs = Vec::with_capacity(spec.n as usize);
        for d in &spec.items {
            // inverse-CDF sampling with an exact rational uniform draw
            let u = Rat::new(rng.random_range(0..1_000_000_000i64), 1_000_000_000);
            let mut cum = Rat::zero();
            let mut chosen = d.support.len() - 1;
            for (j, atom) in d.support.iter().enumerate() {
                cum += &atom.p;
                if u < cum {
                    chosen = j;
                    break;
                }
            }
            idxs.push(chosen);
        }
        let infos = spec.profile_infos(&idxs);
        let v = spec.evaluate(&infos, full)?;
        for (slot, th) in thresholds.iter().enumerate() {
            if &v >= th {
                hits[slot] += 1;
            }
        }
        value_sum += v;
    }
    let z2 = Rat::int(9); // z = 3
    let n = Rat::int(trials as i64);
    let tails = ks
        .iter()
        .zip(&thresholds)
        .zip(&hits)
        .map(|((&k, threshold), &h)| {
            let phat = Rat::int(h as i64) / &n;
            // Wilson upper bound: (phat + z^2/2n + z sqrt(...)) / (1 + z^2/n);
            // we use the conservative rational bound with sqrt replaced by
            // its certified upper estimate via (x <= (1+x)/2 for x <= 1)
            let radic = (&phat * (Rat::one() - &phat) + &z2 / (Rat::int(4) * &n)) / &n;
            let sqrt_upper = rational_sqrt_upper(&radic);
            let upper = (&phat + &z2 / (Rat::int(2) * &n) + Rat::int(3) * sqrt_upper)
                / (Rat::one() + &z2 / &n);
            let bound = schechtman_bound_q2(k);
            TailCheck {
                k,
                threshold: threshold.clone(),
                pass: upper <= bound,
                prob: phat,
                prob_upper: upper.min(Rat::one()),
                bound,
            }
        })
        .collect();
    let expectation = expectation_entry(value_sum / &n, a, c);
    Ok(ConcentrationReport {
        a: a.clone(),
        c: c.clone(),
        tails,
        expectation,
        statistical: true,
    })
}

/// A rational upper bound on sqrt(x) for x >= 0: Newton iterations from
/// above (each iterate stays an upper bound).
fn rational_sqrt_upper(x: &Rat) -> Rat {
    if x.is_zero() {
        return Rat::zero();
    }
    let mut g = if *x >= Rat::one() { x.clone() } else { Rat::one() };
    for _ in 0..40 {
        g = (&g + x / &g) / Rat::int(2);
    }
    g
}
