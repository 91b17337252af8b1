//! Exact-arithmetic primal simplex. The tableau is kept fraction-free by
//! integer pivoting (each pivot divides out the previous pivot value, which
//! is exact by the Sylvester identity), so no gcd reductions happen in the
//! inner loop and every intermediate quantity is an exact minor of the scaled
//! input. Arithmetic runs on `i128` with overflow checks and transparently
//! falls back to `BigInt` when a product would overflow.
//!
//! Problems are `maximize c.x  s.t.  A x <= b, x >= 0` with `b >= 0`, which
//! makes the all-slack basis feasible; every LP in this crate has that form.

use crate::error::{Error, Result};
use crate::rat::Rat;
use num::bigint::BigInt;
use num::{Integer, One, Signed, Zero};

#[derive(Clone, Debug)]
pub struct LpProblem {
    pub num_vars: usize,
    /// Objective coefficients, maximization.
    pub objective: Vec<Rat>,
    /// Rows `coeffs . x <= rhs` with sparse coefficients; `rhs >= 0`.
    pub rows: Vec<LpRow>,
}

#[derive(Clone, Debug)]
pub struct LpRow {
    pub coeffs: Vec<(usize, Rat)>,
    pub rhs: Rat,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub value: Rat,
    pub x: Vec<Rat>,
}

/// Integer cell for the fraction-free tableau.
trait Cell: Clone + Ord {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn is_positive(&self) -> bool;
    fn checked_mul(&self, other: &Self) -> Option<Self>;
    fn checked_sub(&self, other: &Self) -> Option<Self>;
    /// Exact division; caller guarantees divisibility and nonzero divisor.
    fn exact_div(&self, other: &Self) -> Self;
    fn from_bigint(b: &BigInt) -> Option<Self>;
    fn to_rat(&self) -> Rat;
}

impl Cell for i128 {
    fn zero() -> Self {
        0
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_positive(&self) -> bool {
        *self > 0
    }
    fn checked_mul(&self, other: &Self) -> Option<Self> {
        i128::checked_mul(*self, *other)
    }
    fn checked_sub(&self, other: &Self) -> Option<Self> {
        i128::checked_sub(*self, *other)
    }
    fn exact_div(&self, other: &Self) -> Self {
        debug_assert!(*other != 0 && self % other == 0);
        self / other
    }
    fn from_bigint(b: &BigInt) -> Option<Self> {
        i128::try_from(b).ok()
    }
    fn to_rat(&self) -> Rat {
        Rat::from_big(num::BigRational::from_integer(BigInt::from(*self)))
    }
}

impl Cell for BigInt {
    fn zero() -> Self {
        <BigInt as Zero>::zero()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn checked_mul(&self, other: &Self) -> Option<Self> {
        Some(self * other)
    }
    fn checked_sub(&self, other: &Self) -> Option<Self> {
        Some(self - other)
    }
    fn exact_div(&self, other: &Self) -> Self {
        debug_assert!(!Zero::is_zero(other));
        debug_assert!(Zero::is_zero(&(self % other)));
        self / other
    }
    fn from_bigint(b: &BigInt) -> Option<Self> {
        Some(b.clone())
    }
    fn to_rat(&self) -> Rat {
        Rat::from_big(num::BigRational::from_integer(self.clone()))
    }
}

/// Scaled integer form of the input: per-row denominators cleared, objective
/// scaled by its own lcm (tracked separately).
struct ScaledInput {
    m: usize,
    n: usize,
    /// Constraint rows as dense BigInt (structural columns + rhs).
    rows: Vec<Vec<BigInt>>,
    /// Objective row, negated (z-row convention), scaled by `obj_scale`.
    obj: Vec<BigInt>,
    obj_scale: BigInt,
}

fn scale_input(p: &LpProblem) -> Result<ScaledInput> {
    let n = p.num_vars;
    if p.objective.len() != n {
        return Err(Error::Parameter("objective arity".into()));
    }
    let mut rows = Vec::with_capacity(p.rows.len());
    for row in &p.rows {
        if row.rhs.is_negative() {
            return Err(Error::Parameter(
                "simplex requires nonnegative right-hand sides".into(),
            ));
        }
        let mut lcm = BigInt::one();
        for (_, c) in &row.coeffs {
            lcm = lcm.lcm(c.denom());
        }
        lcm = lcm.lcm(row.rhs.denom());
        let mut dense = vec![<BigInt as Zero>::zero(); n + 1];
        for (j, c) in &row.coeffs {
            if *j >= n {
                return Err(Error::Parameter("coefficient column out of range".into()));
            }
            dense[*j] += c.numer() * (&lcm / c.denom());
        }
        dense[n] = row.rhs.numer() * (&lcm / row.rhs.denom());
        rows.push(dense);
    }
    let mut obj_scale = BigInt::one();
    for c in &p.objective {
        obj_scale = obj_scale.lcm(c.denom());
    }
    let obj = p
        .objective
        .iter()
        .map(|c| -(c.numer() * (&obj_scale / c.denom())))
        .collect();
    Ok(ScaledInput {
        m: p.rows.len(),
        n,
        rows,
        obj,
        obj_scale,
    })
}

struct Tableau<T: Cell> {
    m: usize,
    n: usize,
    width: usize, // n + m + 1
    /// Rows 0..m are constraints, row m is the z-row.
    cells: Vec<T>,
    delta: T,
    basis: Vec<usize>,
}

enum PivotOutcome {
    Optimal,
    Unbounded,
    Overflow,
}

impl<T: Cell> Tableau<T> {
    fn build(s: &ScaledInput) -> Option<Tableau<T>> {
        let (m, n) = (s.m, s.n);
        let width = n + m + 1;
        let mut cells = vec![T::zero(); (m + 1) * width];
        let one = T::from_bigint(&BigInt::one())?;
        for (i, row) in s.rows.iter().enumerate() {
            for j in 0..n {
                cells[i * width + j] = T::from_bigint(&row[j])?;
            }
            cells[i * width + n + i] = one.clone();
            cells[i * width + width - 1] = T::from_bigint(&row[n])?;
        }
        for j in 0..n {
            cells[m * width + j] = T::from_bigint(&s.obj[j])?;
        }
        Some(Tableau {
            m,
            n,
            width,
            cells,
            delta: one,
            basis: (0..m).map(|i| n + i).collect(),
        })
    }

    fn at(&self, i: usize, j: usize) -> &T {
        &self.cells[i * self.width + j]
    }

    /// Entering column: most negative reduced cost (Dantzig) or smallest
    /// index with negative reduced cost (Bland).
    fn entering(&self, bland: bool) -> Option<usize> {
        let zrow = self.m;
        let mut best: Option<(usize, &T)> = None;
        for j in 0..self.width - 1 {
            let c = self.at(zrow, j);
            if c < &T::zero() {
                if bland {
                    return Some(j);
                }
                match best {
                    Some((_, b)) if b <= c => {}
                    _ => best = Some((j, c)),
                }
            }
        }
        best.map(|(j, _)| j)
    }

    /// Leaving row by exact ratio test; ties to the smallest basis variable.
    fn leaving(&self, col: usize) -> Option<(usize, bool)> {
        let rhs = self.width - 1;
        let mut best: Option<usize> = None;
        for i in 0..self.m {
            if !self.at(i, col).is_positive() {
                continue;
            }
            best = Some(match best {
                None => i,
                Some(b) => {
                    // compare rhs_i / a_i vs rhs_b / a_b by cross multiplication
                    let lhs = self.at(i, rhs).checked_mul(self.at(b, col));
                    let r = self.at(b, rhs).checked_mul(self.at(i, col));
                    match (lhs, r) {
                        (Some(l), Some(r)) => match l.cmp(&r) {
                            std::cmp::Ordering::Less => i,
                            std::cmp::Ordering::Greater => b,
                            std::cmp::Ordering::Equal => {
                                if self.basis[i] < self.basis[b] {
                                    i
                                } else {
                                    b
                                }
                            }
                        },
                        _ => return None, // overflow sentinel handled by caller
                    }
                }
            });
        }
        best.map(|r| (r, self.at(r, rhs).is_zero()))
    }

    fn pivot(&mut self, row: usize, col: usize) -> bool {
        let width = self.width;
        let pivot_val = self.at(row, col).clone();
        debug_assert!(pivot_val.is_positive());
        for i in 0..=self.m {
            if i == row {
                continue;
            }
            let factor = self.at(i, col).clone();
            for j in 0..width {
                let a = &self.cells[i * width + j];
                let prod1 = match a.checked_mul(&pivot_val) {
                    Some(v) => v,
                    None => return false,
                };
                let prod2 = match factor.checked_mul(&self.cells[row * width + j]) {
                    Some(v) => v,
                    None => return false,
                };
                let num = match prod1.checked_sub(&prod2) {
                    Some(v) => v,
                    None => return false,
                };
                self.cells[i * width + j] = num.exact_div(&self.delta);
            }
        }
        self.delta = pivot_val;
        self.basis[row] = col;
        true
    }

    fn run(&mut self) -> PivotOutcome {
        let mut bland = false;
        let mut degenerate_streak = 0u32;
        let mut pivots = 0u64;
        loop {
            pivots += 1;
            if pivots > 2_000_000 {
                return PivotOutcome::Overflow; // treated as solver failure upstream
            }
            let col = match self.entering(bland) {
                None => return PivotOutcome::Optimal,
                Some(c) => c,
            };
            let (row, degenerate) = match self.leaving(col) {
                None => {
                    // distinguish unbounded from ratio-test overflow
                    let any_positive = (0..self.m).any(|i| self.at(i, col).is_positive());
                    return if any_positive {
                        PivotOutcome::Overflow
                    } else {
                        PivotOutcome::Unbounded
                    };
                }
                Some(rc) => rc,
            };
            if degenerate {
                degenerate_streak += 1;
                if degenerate_streak > 200 {
                    bland = true;
                }
            } else {
                degenerate_streak = 0;
            }
            if !self.pivot(row, col) {
                return PivotOutcome::Overflow;
            }
        }
    }

    fn solution(&self, obj_scale: &BigInt) -> LpSolution {
        let rhs = self.width - 1;
        let delta = self.delta.to_rat();
        let mut x = vec![Rat::zero(); self.n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                x[b] = self.at(i, rhs).to_rat() / &delta;
            }
        }
        let scale = Rat::from_big(num::BigRational::from_integer(obj_scale.clone()));
        let value = self.at(self.m, rhs).to_rat() / &delta / scale;
        LpSolution { value, x }
    }
}

/// Solve `maximize c.x  s.t.  A x <= b, x >= 0` exactly. Requires `b >= 0`
/// (the all-slack basis is then feasible). Errors on unbounded problems.
pub fn solve_max(p: &LpProblem) -> Result<LpSolution> {
    let scaled = scale_input(p)?;
    if let Some(mut t) = Tableau::<i128>::build(&scaled) {
        match t.run() {
            PivotOutcome::Optimal => return Ok(t.solution(&scaled.obj_scale)),
            PivotOutcome::Unbounded => return Err(Error::Solver("LP is unbounded".into())),
            PivotOutcome::Overflow => {} // fall through to BigInt
        }
    }
    let mut t = Tableau::<BigInt>::build(&scaled).expect("bigint build is total");
    match t.run() {
        PivotOutcome::Optimal => Ok(t.solution(&scaled.obj_scale)),
        PivotOutcome::Unbounded => Err(Error::Solver("LP is unbounded".into())),
        PivotOutcome::Overflow => Err(Error::Solver("pivot limit exceeded".into())),
    }
}
