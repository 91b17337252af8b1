//! Explicit finite type spaces: a list of (probability, full valuation
//! table) pairs. This is the universal representation fed to the exact
//! revenue LP; product specs materialize into it, and conditioning /
//! restriction / coupling constructions produce it directly.

use crate::dist::OneDimDist;
use crate::error::{Error, Result};
use crate::items::ItemSet;
use crate::rat::Rat;
use crate::valuation::check_table_axioms;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeEntry {
    pub prob: Rat,
    /// Value for every subset, indexed by bitmask; length `2^n`.
    pub table: Vec<Rat>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeSpace {
    pub n: u32,
    pub entries: Vec<TypeEntry>,
}

impl TypeSpace {
    pub fn new(n: u32, entries: Vec<TypeEntry>) -> Result<Self> {
        let ts = TypeSpace { n, entries };
        ts.validate()?;
        Ok(ts)
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::Parameter("type space has no entries".into()));
        }
        let mut total = Rat::zero();
        for e in &self.entries {
            if !e.prob.is_positive() {
                return Err(Error::Parameter("type probabilities must be positive".into()));
            }
            total += &e.prob;
            check_table_axioms(self.n, &e.table).map_err(Error::Parameter)?;
        }
        if total != Rat::one() {
            return Err(Error::Parameter(format!(
                "type probabilities sum to {total}, expected 1"
            )));
        }
        Ok(())
    }

    pub fn full_set(&self) -> ItemSet {
        ItemSet::full(self.n)
    }

    /// Trivial space on an empty ground set.
    pub fn trivial() -> TypeSpace {
        TypeSpace {
            n: 0,
            entries: vec![TypeEntry {
                prob: Rat::one(),
                table: vec![Rat::zero()],
            }],
        }
    }

    /// Restriction to `keep`: tables projected onto subsets of `keep`
    /// (re-indexed), probabilities untouched.
    pub fn restrict(&self, keep: ItemSet) -> Result<TypeSpace> {
        if !keep.is_subset_of(self.full_set()) {
            return Err(Error::Parameter("restriction outside ground set".into()));
        }
        let kept: Vec<u32> = keep.iter().collect();
        let m = kept.len() as u32;
        let entries = self
            .entries
            .iter()
            .map(|e| {
                let table = ItemSet::all(m)
                    .map(|s| {
                        let mut orig = ItemSet::EMPTY;
                        for j in s.iter() {
                            orig = orig.insert(kept[j as usize]);
                        }
                        e.table[orig.0 as usize].clone()
                    })
                    .collect();
                TypeEntry {
                    prob: e.prob.clone(),
                    table,
                }
            })
            .collect();
        TypeSpace::new(m, entries)
    }

    /// Distribution of the value of a fixed subset.
    pub fn set_value_dist(&self, s: ItemSet) -> Result<OneDimDist> {
        OneDimDist::new(
            self.entries
                .iter()
                .map(|e| (e.table[s.0 as usize].clone(), e.prob.clone()))
                .collect(),
        )
    }

    /// Distribution of the grand-bundle value.
    pub fn bundle_dist(&self) -> Result<OneDimDist> {
        self.set_value_dist(self.full_set())
    }

    /// Distribution of `v({i})`.
    pub fn single_item_dist(&self, i: u32) -> Result<OneDimDist> {
        if i >= self.n {
            return Err(Error::Parameter(format!("item {} of {}", i + 1, self.n)));
        }
        self.set_value_dist(ItemSet::singleton(i))
    }

    pub fn single_item_dists(&self) -> Result<Vec<OneDimDist>> {
        (0..self.n).map(|i| self.single_item_dist(i)).collect()
    }

    /// Expected grand-bundle value.
    pub fn bundle_expectation(&self) -> Rat {
        let full = self.full_set();
        self.entries
            .iter()
            .map(|e| &e.prob * &e.table[full.0 as usize])
            .sum()
    }

    /// All values scaled by a positive rational.
    pub fn scale(&self, c: &Rat) -> Result<TypeSpace> {
        if !c.is_positive() {
            return Err(Error::Parameter("scale factor must be positive".into()));
        }
        let entries = self
            .entries
            .iter()
            .map(|e| TypeEntry {
                prob: e.prob.clone(),
                table: e.table.iter().map(|v| v * c).collect(),
            })
            .collect();
        TypeSpace::new(self.n, entries)
    }

    /// Mixture of type spaces over the same ground set; weights must be
    /// positive and sum to one. Entries are concatenated, not merged.
    pub fn mix(parts: &[(Rat, &TypeSpace)]) -> Result<TypeSpace> {
        let n = parts
            .first()
            .ok_or_else(|| Error::Parameter("empty mixture".into()))?
            .1
            .n;
        let mut entries = Vec::new();
        for (w, ts) in parts {
            if ts.n != n {
                return Err(Error::Parameter("mixture over different ground sets".into()));
            }
            if !w.is_positive() {
                return Err(Error::Parameter("mixture weights must be positive".into()));
            }
            for e in &ts.entries {
                entries.push(TypeEntry {
                    prob: w * &e.prob,
                    table: e.table.clone(),
                });
            }
        }
        TypeSpace::new(n, entries)
    }

    /// Canonical form for comparisons: identical tables merged (probabilities
    /// summed), entries sorted by table.
    pub fn canonical(&self) -> TypeSpace {
        let mut entries: Vec<TypeEntry> = self.entries.clone();
        entries.sort_by(|a, b| a.table.cmp(&b.table));
        let mut merged: Vec<TypeEntry> = Vec::new();
        for e in entries {
            match merged.last_mut() {
                Some(last) if last.table == e.table => last.prob += &e.prob,
                _ => merged.push(e),
            }
        }
        TypeSpace {
            n: self.n,
            entries: merged,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_item_space() -> TypeSpace {
        // additive tables (1,1) and (2,1) with probs 1/2 each
        TypeSpace::new(
            2,
            vec![
                TypeEntry {
                    prob: Rat::new(1, 2),
                    table: vec![Rat::zero(), Rat::int(1), Rat::int(1), Rat::int(2)],
                },
                TypeEntry {
                    prob: Rat::new(1, 2),
                    table: vec![Rat::zero(), Rat::int(2), Rat::int(1), Rat::int(3)],
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn validates_axioms_and_probs() {
        assert!(TypeSpace::new(
            1,
            vec![TypeEntry {
                prob: Rat::new(1, 2),
                table: vec![Rat::zero(), Rat::one()],
            }],
        )
        .is_err());
        // non-monotone table rejected
        assert!(TypeSpace::new(
            1,
            vec![TypeEntry {
                prob: Rat::one(),
                table: vec![Rat::zero(), -Rat::one()],
            }],
        )
        .is_err());
    }

    #[test]
    fn restriction_projects_tables() {
        let ts = two_item_space();
        let r = ts.restrict(ItemSet(0b01)).unwrap();
        assert_eq!(r.n, 1);
        assert_eq!(r.entries[0].table, vec![Rat::zero(), Rat::int(1)]);
        assert_eq!(r.entries[1].table, vec![Rat::zero(), Rat::int(2)]);
        let full = ts.restrict(ItemSet(0b11)).unwrap();
        assert_eq!(full, ts);
    }

    #[test]
    fn bundle_and_canonical() {
        let ts = two_item_space();
        assert_eq!(ts.bundle_expectation(), Rat::new(5, 2));
        let d = ts.bundle_dist().unwrap();
        assert_eq!(
            d.atoms,
            vec![(Rat::int(2), Rat::new(1, 2)), (Rat::int(3), Rat::new(1, 2))]
        );
        // merging duplicates
        let dup = TypeSpace::mix(&[(Rat::new(1, 2), &ts), (Rat::new(1, 2), &ts)]).unwrap();
        assert_eq!(dup.entries.len(), 4);
        let canon = dup.canonical();
        assert_eq!(canon.entries.len(), 2);
        assert_eq!(canon, ts.canonical());
    }
}
