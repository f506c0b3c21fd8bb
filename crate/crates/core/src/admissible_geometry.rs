//! Admissible inequalities, hyperplanes, and half-spaces in weight space:
//! exact membership tests, complete enumeration of the hyperplanes through a
//! weight, hyperplanes meeting a metric ball, conflict-free local radii, and
//! the simplicial projection onto the cube boundary.
//!
//! An *admissible inequality* is `α_i ≥ Σ_{j≠i} m_j α_j` with non-negative
//! integer coefficients, not all zero. Its boundary `α_i = Σ m_j α_j` is an
//! *admissible hyperplane*. These are exactly the walls across which the
//! stabilizer of a monomial valuation changes, so everything downstream
//! (stabilizers, links, linearization) leans on the exact tests here.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
#[cfg(test)]
use num_traits::One;

use crate::error::{Error, Result};
use crate::valuation_space::Weight;

/// Largest enumeration bound `⌈α₁⁺/αₙ⁺⌉` (possibly inflated for a ball
/// query) that hyperplane enumeration will accept before reporting an
/// exhausted budget; beyond this the candidate count grows uselessly large.
const ENUMERATION_BOUND_LIMIT: u64 = 2_000;

// ---------------------------------------------------------------------------
// Admissible inequalities
// ---------------------------------------------------------------------------

/// The half-space `α_i ≥ Σ_{j≠i} m_j α_j` (its boundary is the admissible
/// hyperplane `α_i = Σ m_j α_j`).
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct AdmissibleInequality {
    /// 1-based index of the distinguished coordinate.
    i: usize,
    /// Non-negative coefficients of the right-hand side; `m[i-1] == 0` and
    /// at least one entry is positive.
    m: Vec<u64>,
}

impl AdmissibleInequality {
    /// Validated constructor.
    pub fn new(i: usize, m: Vec<u64>) -> Result<AdmissibleInequality> {
        let n = m.len();
        if i == 0 || i > n {
            return Err(Error::VariableOutOfRange(i, n));
        }
        if m[i - 1] != 0 {
            return Err(Error::precondition(format!(
                "admissible inequality for a{i} must not use a{i} on the right-hand side"
            )));
        }
        if m.iter().all(|&c| c == 0) {
            return Err(Error::precondition(
                "admissible inequality needs a nonzero right-hand side",
            ));
        }
        Ok(AdmissibleInequality { i, m })
    }

    pub fn n_vars(&self) -> usize {
        self.m.len()
    }

    /// The distinguished (left-hand side) coordinate, 1-based.
    pub fn index(&self) -> usize {
        self.i
    }

    /// Right-hand side coefficients.
    pub fn coefficients(&self) -> &[u64] {
        &self.m
    }

    /// True when the right-hand side is a single monomial `m_k α_k`.
    pub fn is_principal(&self) -> bool {
        self.m.iter().filter(|&&c| c > 0).count() == 1
    }

    /// Exact value of the right-hand side at `α`.
    pub fn rhs_at(&self, alpha: &Weight) -> BigRational {
        let mut acc = BigRational::zero();
        for (j, &c) in self.m.iter().enumerate() {
            if c > 0 {
                acc += alpha.coord(j + 1) * BigRational::from_integer(BigInt::from(c));
            }
        }
        acc
    }

    /// Exact half-space test `α_i ≥ Σ m_j α_j`.
    pub fn holds_at(&self, alpha: &Weight) -> bool {
        debug_assert_eq!(alpha.n(), self.n_vars());
        *alpha.coord(self.i) >= self.rhs_at(alpha)
    }

    /// Exact hyperplane test `α_i = Σ m_j α_j`.
    pub fn on_hyperplane(&self, alpha: &Weight) -> bool {
        debug_assert_eq!(alpha.n(), self.n_vars());
        *alpha.coord(self.i) == self.rhs_at(alpha)
    }

    fn rhs_string(&self) -> String {
        let mut out = String::new();
        for (j, &c) in self.m.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !out.is_empty() {
                out.push_str(" + ");
            }
            out.push_str(&format!("{c}*a{}", j + 1));
        }
        out
    }

    /// The boundary hyperplane, rendered `a1 = 2*a2 + 1*a3`.
    pub fn equation_string(&self) -> String {
        format!("a{} = {}", self.i, self.rhs_string())
    }
}

impl std::fmt::Display for AdmissibleInequality {
    /// The half-space, rendered `a1 >= 2*a2 + 1*a3`.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "a{} >= {}", self.i, self.rhs_string())
    }
}

// ---------------------------------------------------------------------------
// Fixed regions
// ---------------------------------------------------------------------------

/// A finite conjunction of admissible inequalities (deduplicated), with an
/// `impossible` marker for conjunctions that contain a structurally false
/// constraint (one that no strictly positive weight can satisfy, e.g. from a
/// component whose extra monomials involve its own variable).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FixedRegion {
    n: usize,
    impossible: bool,
    inequalities: Vec<AdmissibleInequality>,
}

impl FixedRegion {
    /// The full weight space (no constraints).
    pub fn everything(n: usize) -> FixedRegion {
        FixedRegion {
            n,
            impossible: false,
            inequalities: Vec::new(),
        }
    }

    /// The empty region.
    pub fn empty(n: usize) -> FixedRegion {
        FixedRegion {
            n,
            impossible: true,
            inequalities: Vec::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    /// True when the conjunction contains a structurally false constraint.
    pub fn is_impossible(&self) -> bool {
        self.impossible
    }

    /// The deduplicated constraints, in insertion order.
    pub fn inequalities(&self) -> &[AdmissibleInequality] {
        &self.inequalities
    }

    /// Adds a constraint, skipping exact duplicates.
    pub fn push(&mut self, ineq: AdmissibleInequality) -> Result<()> {
        if ineq.n_vars() != self.n {
            return Err(Error::DimensionMismatch(ineq.n_vars(), self.n));
        }
        if !self.inequalities.contains(&ineq) {
            self.inequalities.push(ineq);
        }
        Ok(())
    }

    /// Marks the region as containing a structurally false constraint.
    pub fn mark_impossible(&mut self) {
        self.impossible = true;
    }

    /// Exact membership test.
    pub fn contains(&self, alpha: &Weight) -> Result<bool> {
        if alpha.n() != self.n {
            return Err(Error::DimensionMismatch(alpha.n(), self.n));
        }
        if self.impossible {
            return Ok(false);
        }
        Ok(self.inequalities.iter().all(|ineq| ineq.holds_at(alpha)))
    }

    /// Conjunction of two regions.
    pub fn intersect(&self, other: &FixedRegion) -> Result<FixedRegion> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch(other.n, self.n));
        }
        let mut out = self.clone();
        out.impossible = self.impossible || other.impossible;
        for ineq in &other.inequalities {
            out.push(ineq.clone())?;
        }
        Ok(out)
    }

    /// Adds the chamber constraints `α_1 ≥ α_2 ≥ … ≥ α_n`.
    pub fn restrict_to_sorted(&mut self) -> Result<()> {
        for j in 1..self.n {
            let mut m = vec![0u64; self.n];
            m[j] = 1;
            self.push(AdmissibleInequality::new(j, m)?)?;
        }
        Ok(())
    }

    /// Deterministic search for a weight inside the region: scans integer
    /// vectors with coordinates in `1..=bound` for increasing `bound`, and
    /// returns the first exact member (a certificate, not an approximation).
    pub fn sample(&self, max_coordinate: u64) -> Option<Weight> {
        if self.impossible {
            return None;
        }
        for bound in 1..=max_coordinate {
            let mut coords = vec![1u64; self.n];
            loop {
                // Only consider vectors that actually use the new bound, so
                // each vector is visited once across all rounds.
                if coords.iter().any(|&c| c == bound) {
                    let candidate = Weight::from_integers(
                        &coords.iter().map(|&c| c as i64).collect::<Vec<_>>(),
                    )
                    .expect("positive coordinates");
                    if self.contains(&candidate).expect("dimension checked") {
                        return Some(candidate);
                    }
                }
                // Odometer increment over {1..bound}^n.
                let mut k = 0;
                loop {
                    if k == self.n {
                        break;
                    }
                    if coords[k] < bound {
                        coords[k] += 1;
                        for c in coords.iter_mut().take(k) {
                            *c = 1;
                        }
                        break;
                    }
                    k += 1;
                }
                if k == self.n {
                    break;
                }
            }
        }
        None
    }
}

// ---------------------------------------------------------------------------
// Enumeration of hyperplanes
// ---------------------------------------------------------------------------

/// All coefficient vectors `m` of length `n` with `m[i-1] = 0` and
/// `1 ≤ Σ m_j ≤ bound`, in lexicographic order.
fn coefficient_vectors(n: usize, i: usize, bound: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut current = vec![0u64; n];
    fn recurse(
        current: &mut Vec<u64>,
        slot: usize,
        remaining: u64,
        i: usize,
        out: &mut Vec<Vec<u64>>,
    ) {
        if slot == current.len() {
            if current.iter().any(|&c| c > 0) {
                out.push(current.clone());
            }
            return;
        }
        if slot == i - 1 {
            current[slot] = 0;
            recurse(current, slot + 1, remaining, i, out);
            return;
        }
        for c in 0..=remaining {
            current[slot] = c;
            recurse(current, slot + 1, remaining - c, i, out);
        }
        current[slot] = 0;
    }
    recurse(&mut current, 0, bound, i, &mut out);
    out
}

/// Reading order for enumerated hyperplanes: by distinguished index, then
/// with weight on the earlier right-hand-side variables (so `a1 = 1*a2`
/// precedes `a1 = 1*a3`).
fn canonical_sort(list: &mut [AdmissibleInequality]) {
    list.sort_by(|a, b| a.i.cmp(&b.i).then_with(|| b.m.cmp(&a.m)));
}

/// True for the redundant member of a swap pair: the hyperplanes
/// `α_i = α_j` and `α_j = α_i` coincide, and we keep the one with `i < j`
/// (these are the only coincidences among admissible equations, since
/// proportional integer normals `e_i - m` force the unit swap pattern).
fn is_redundant_swap(i: usize, m: &[u64]) -> bool {
    let support: Vec<usize> = m
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(j, _)| j + 1)
        .collect();
    support.len() == 1 && m[support[0] - 1] == 1 && support[0] < i
}

fn enumeration_bound(alpha: &Weight, inflation: Option<&BigRational>) -> Result<u64> {
    let sorted = alpha.sorted_desc();
    let mut ratio = sorted.coord(1) / sorted.coord(alpha.n());
    if let Some(factor) = inflation {
        ratio *= factor;
    }
    let bound = ratio
        .ceil()
        .to_integer()
        .to_u64()
        .ok_or_else(|| Error::SearchBudgetExceeded("hyperplane enumeration bound overflow".into()))?;
    if bound > ENUMERATION_BOUND_LIMIT {
        return Err(Error::SearchBudgetExceeded(format!(
            "hyperplane enumeration bound {bound} exceeds limit {ENUMERATION_BOUND_LIMIT}"
        )));
    }
    Ok(bound)
}

/// Every admissible hyperplane through `α`, as (boundaries of) admissible
/// inequalities, deduplicated and deterministically ordered.
///
/// A hyperplane `α_i = Σ m_j α_j` through `α` forces
/// `Σ m_j ≤ α_i / min α ≤ ⌈α₁⁺/αₙ⁺⌉`, so scanning coefficient vectors up to
/// that bound is complete.
pub fn hyperplanes_through(alpha: &Weight) -> Result<Vec<AdmissibleInequality>> {
    let n = alpha.n();
    let bound = enumeration_bound(alpha, None)?;
    let mut out = Vec::new();
    for i in 1..=n {
        for m in coefficient_vectors(n, i, bound) {
            if is_redundant_swap(i, &m) {
                continue;
            }
            let ineq = AdmissibleInequality { i, m };
            if ineq.on_hyperplane(alpha) {
                out.push(ineq);
            }
        }
    }
    canonical_sort(&mut out);
    Ok(out)
}

/// The number of admissible hyperplanes through `α` (counting each
/// geometric hyperplane once).
pub fn multiplicity(alpha: &Weight) -> Result<usize> {
    Ok(hyperplanes_through(alpha)?.len())
}

/// A rational upper bound for `exp(x)`, safe for use as a directed-rounding
/// inflation factor (monotone in `x`).
fn exp_upper_bound(x: f64) -> Result<BigRational> {
    let y = x.exp() * (1.0 + 1e-12);
    if !y.is_finite() {
        return Err(Error::precondition("radius too large for exp bound"));
    }
    BigRational::from_f64(y).ok_or_else(|| Error::precondition("radius is not a finite number"))
}

/// Every admissible hyperplane meeting the closed log-metric ball of radius
/// `r` around `[α]` — superset-safe: near misses may be included, but no
/// meeting hyperplane is ever omitted.
///
/// Any point `[β]` of the ball satisfies `|ln(β_j/α_j) − ln(β_i/α_i)| ≤ √2·r`
/// coordinate-pairwise, so after normalizing `β_i = α_i` each coordinate sits
/// in the multiplicative box `β_j/α_j ∈ [1/ê, ê]` with `ê ≥ e^{2r}` a rational
/// upper bound. A hyperplane `α_i = Σ m_j α_j` meets the box iff
/// `Σ m_j α_j / ê ≤ α_i ≤ ê · Σ m_j α_j`, and the candidate coefficient sum
/// is bounded by the ball-inflated ratio `⌈ê·α₁⁺/αₙ⁺⌉`.
pub fn hyperplanes_meeting_ball(alpha: &Weight, r: f64) -> Result<Vec<AdmissibleInequality>> {
    if !(r > 0.0) {
        return Err(Error::precondition("ball radius must be positive"));
    }
    let n = alpha.n();
    let e_hat = exp_upper_bound(2.0 * r)?;
    let bound = enumeration_bound(alpha, Some(&e_hat))?;
    let mut out = Vec::new();
    for i in 1..=n {
        for m in coefficient_vectors(n, i, bound) {
            if is_redundant_swap(i, &m) {
                continue;
            }
            let ineq = AdmissibleInequality { i, m };
            let rhs = ineq.rhs_at(alpha);
            let lhs = alpha.coord(i);
            if &rhs / &e_hat <= *lhs && *lhs <= rhs * &e_hat {
                out.push(ineq);
            }
        }
    }
    canonical_sort(&mut out);
    Ok(out)
}

/// A radius `ε > 0` such that every admissible hyperplane meeting
/// `B([α], ε)` passes through `[α]`, found by halving against
/// [`hyperplanes_meeting_ball`]. Deterministic.
pub fn local_radius(alpha: &Weight) -> Result<f64> {
    let mut r = 0.5f64;
    for _ in 0..200 {
        let clean = hyperplanes_meeting_ball(alpha, r)?
            .iter()
            .all(|h| h.on_hyperplane(alpha));
        if clean {
            return Ok(r);
        }
        r /= 2.0;
    }
    Err(Error::SearchBudgetExceeded(
        "local radius bisection did not separate the non-through hyperplanes".into(),
    ))
}

// ---------------------------------------------------------------------------
// Local cells of the through-hyperplane arrangement
// ---------------------------------------------------------------------------

/// Exact sample weights for the cells of the through-hyperplane arrangement
/// in a small punctured neighborhood of `[α]` (dimensions 2 and 3).
///
/// For n = 3 the cells are rays (one per hyperplane direction, listed in
/// circular order around `[α]`) and the open sectors between consecutive
/// rays: `sectors[k]` lies between `rays[k]` and `rays[(k+1) % r]`. For
/// n = 2 the two "rays" are the two sides of `[α]` on the projective line
/// and there are no sectors.
///
/// Every sample carries an exact certificate: any admissible hyperplane
/// separating it from `α` passes through `[α]`. Hence for every tame word,
/// membership of the sample in the fixed region equals membership of the
/// whole germ cell, which makes these samples universal for germ
/// comparisons at `[α]`.
#[derive(Clone, Debug)]
pub struct LocalCells {
    center: Weight,
    ray_directions: Vec<Vec<BigRational>>,
    rays: Vec<Weight>,
    sectors: Vec<Weight>,
}

impl LocalCells {
    pub fn center(&self) -> &Weight {
        &self.center
    }

    /// Chart tangent vectors of the rays (coordinates summing to zero),
    /// parallel to the ray samples' displacement from `α`.
    pub fn ray_directions(&self) -> &[Vec<BigRational>] {
        &self.ray_directions
    }

    pub fn rays(&self) -> &[Weight] {
        &self.rays
    }

    pub fn sectors(&self) -> &[Weight] {
        &self.sectors
    }
}

fn signed_distance(h: &AdmissibleInequality, x: &Weight) -> BigRational {
    x.coord(h.index()) - h.rhs_at(x)
}

/// Walks `t` down until `α + t·dir` is a positive weight, stays inside the
/// multiplicative box `x_i/α_i ∈ [3/4, 4/3]` (which keeps it within
/// log-metric distance 1 of `[α]`, so `guard` covers every hyperplane that
/// could separate), and sits strictly on the `α`-side of every non-through
/// hyperplane in `guard`.
fn certified_sample(
    alpha: &Weight,
    dir: &[BigRational],
    guard: &[AdmissibleInequality],
    through: &[AdmissibleInequality],
) -> Result<Weight> {
    let n = alpha.n();
    let mut t = BigRational::new(BigInt::from(1), BigInt::from(4));
    let lo = BigRational::new(BigInt::from(3), BigInt::from(4));
    let hi = BigRational::new(BigInt::from(4), BigInt::from(3));
    for _ in 0..200 {
        let coords: Vec<BigRational> = (0..n)
            .map(|k| alpha.coords()[k].clone() + &t * &dir[k])
            .collect();
        let boxed = (0..n).all(|k| {
            let a = &alpha.coords()[k];
            coords[k] >= &lo * a && coords[k] <= &hi * a
        });
        if boxed {
            let x = Weight::new(coords).expect("box keeps coordinates positive");
            let safe = guard.iter().all(|h| {
                if through.contains(h) {
                    return true;
                }
                let fa = signed_distance(h, alpha);
                let fx = signed_distance(h, &x);
                (fa > BigRational::zero() && fx > BigRational::zero())
                    || (fa < BigRational::zero() && fx < BigRational::zero())
            });
            if safe {
                return Ok(x);
            }
        }
        t /= BigRational::from_integer(BigInt::from(2));
    }
    Err(Error::SearchBudgetExceeded(
        "could not certify a local cell sample".into(),
    ))
}

/// Chart image of a 3-vector: subtract the mean so coordinates sum to zero.
fn center_sum_zero(v: &[BigRational]) -> Vec<BigRational> {
    let n = BigRational::from_integer(BigInt::from(v.len() as i64));
    let mean: BigRational = v.iter().sum::<BigRational>() / n;
    v.iter().map(|c| c - &mean).collect()
}

/// Circular-order key on the chart plane (first two coordinates): which
/// half-turn the vector lies in, then exact cross products within a half.
fn circular_less(a: &[BigRational], b: &[BigRational]) -> Ordering {
    fn half(v: &[BigRational]) -> u8 {
        let zero = BigRational::zero();
        if v[1] > zero || (v[1] == zero && v[0] > zero) {
            0
        } else {
            1
        }
    }
    half(a).cmp(&half(b)).then_with(|| {
        let cross = &a[0] * &b[1] - &a[1] * &b[0];
        cross.cmp(&BigRational::zero()).reverse()
    })
}

/// Builds the certified local-cell samples around `[α]` for n ∈ {2, 3}.
pub fn local_cell_samples(alpha: &Weight) -> Result<LocalCells> {
    let n = alpha.n();
    let through = hyperplanes_through(alpha)?;
    let guard = hyperplanes_meeting_ball(alpha, 1.0)?;
    match n {
        2 => {
            let dirs = vec![
                vec![
                    BigRational::from_integer(BigInt::from(1)),
                    BigRational::from_integer(BigInt::from(-1)),
                ],
                vec![
                    BigRational::from_integer(BigInt::from(-1)),
                    BigRational::from_integer(BigInt::from(1)),
                ],
            ];
            let rays = dirs
                .iter()
                .map(|d| certified_sample(alpha, d, &guard, &through))
                .collect::<Result<Vec<_>>>()?;
            Ok(LocalCells {
                center: alpha.clone(),
                ray_directions: dirs,
                rays,
                sectors: Vec::new(),
            })
        }
        3 => {
            // Tangent direction of a hyperplane's trace through [α] in the
            // sum-zero chart: the cross product of its normal with (1,1,1).
            let mut dirs: Vec<Vec<BigRational>> = Vec::new();
            for h in &through {
                let mut normal = vec![BigRational::zero(); 3];
                normal[h.index() - 1] += BigRational::from_integer(BigInt::from(1));
                for (j, &c) in h.coefficients().iter().enumerate() {
                    normal[j] -= BigRational::from_integer(BigInt::from(c));
                }
                let u = vec![
                    &normal[1] - &normal[2],
                    &normal[2] - &normal[0],
                    &normal[0] - &normal[1],
                ];
                let neg: Vec<BigRational> = u.iter().map(|c| -c).collect();
                dirs.push(u);
                dirs.push(neg);
            }
            dirs.sort_by(|a, b| circular_less(a, b));

            let rays = dirs
                .iter()
                .map(|d| certified_sample(alpha, d, &guard, &through))
                .collect::<Result<Vec<_>>>()?;

            let sector_dirs: Vec<Vec<BigRational>> = if dirs.is_empty() {
                vec![vec![
                    BigRational::from_integer(BigInt::from(1)),
                    BigRational::from_integer(BigInt::from(-1)),
                    BigRational::zero(),
                ]]
            } else if dirs.len() == 2 {
                // A single hyperplane: its two sides, split by the chart
                // projection of the normal (orthogonal to the trace).
                let h = &through[0];
                let mut normal = vec![BigRational::zero(); 3];
                normal[h.index() - 1] += BigRational::from_integer(BigInt::from(1));
                for (j, &c) in h.coefficients().iter().enumerate() {
                    normal[j] -= BigRational::from_integer(BigInt::from(c));
                }
                let w = center_sum_zero(&normal);
                let neg: Vec<BigRational> = w.iter().map(|c| -c).collect();
                let cross = &dirs[0][0] * &w[1] - &dirs[0][1] * &w[0];
                if cross > BigRational::zero() {
                    vec![w, neg]
                } else {
                    vec![neg, w]
                }
            } else {
                (0..dirs.len())
                    .map(|k| {
                        let a = &dirs[k];
                        let b = &dirs[(k + 1) % dirs.len()];
                        (0..3).map(|i| &a[i] + &b[i]).collect()
                    })
                    .collect()
            };
            let sectors = sector_dirs
                .iter()
                .map(|d| certified_sample(alpha, d, &guard, &through))
                .collect::<Result<Vec<_>>>()?;
            Ok(LocalCells {
                center: alpha.clone(),
                ray_directions: dirs,
                rays,
                sectors,
            })
        }
        _ => Err(Error::UnsupportedWeightShape(format!(
            "local cell sampling supports 2 or 3 variables, got {n}"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Simplicial projection
// ---------------------------------------------------------------------------

/// Projects a weight onto the boundary complex: `α′_i = min(2, α_i/α_min)`,
/// together with the types of the simplex vertices spanning the cell that
/// contains the projection.
///
/// Writing the sorted projection `β₁ ≥ … ≥ βₙ` with the convention `β₀ = 2`,
/// each strict descent `β_{i-1} > β_i` contributes the vertex of type
/// `n − i + 1` (the type-`r` vertex is `(2,…,2,1,…,1)` with `r` trailing
/// ones). Types are returned in increasing order.
pub fn simplicial_projection(alpha: &Weight) -> (Weight, Vec<usize>) {
    let n = alpha.n();
    let min = alpha
        .coords()
        .iter()
        .min()
        .expect("weights are nonempty")
        .clone();
    let two = BigRational::from_integer(BigInt::from(2));
    let coords: Vec<BigRational> = alpha
        .coords()
        .iter()
        .map(|a| {
            let scaled = a / &min;
            if scaled > two {
                two.clone()
            } else {
                scaled
            }
        })
        .collect();
    let projected = Weight::new(coords.clone()).expect("projection keeps positivity");
    let mut sorted = coords;
    sorted.sort_by(|a, b| b.cmp(a));
    let mut types = Vec::new();
    let mut prev = two;
    for (idx, value) in sorted.iter().enumerate() {
        if prev > *value {
            types.push(n - idx);
        }
        prev = value.clone();
    }
    types.reverse();
    (projected, types)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_poly::Field;
    use crate::tame_group::{Generator, TameWord};
    use crate::valuation_space::fixes;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn w(coords: &[i64]) -> Weight {
        Weight::from_integers(coords).unwrap()
    }

    fn ineq(i: usize, m: &[u64]) -> AdmissibleInequality {
        AdmissibleInequality::new(i, m.to_vec()).unwrap()
    }

    fn equations(alpha: &Weight) -> Vec<String> {
        hyperplanes_through(alpha)
            .unwrap()
            .iter()
            .map(AdmissibleInequality::equation_string)
            .collect()
    }

    #[test]
    fn membership_examples() {
        assert!(ineq(1, &[0, 1, 1]).on_hyperplane(&w(&[3, 2, 1])));
        assert!(ineq(1, &[0, 2, 0]).on_hyperplane(&w(&[6, 3, 2])));
        assert!(ineq(1, &[0, 0, 3]).on_hyperplane(&w(&[6, 3, 2])));
        assert!(ineq(1, &[0, 2, 0]).holds_at(&w(&[7, 3, 2])));
        assert!(!ineq(1, &[0, 2, 0]).holds_at(&w(&[5, 3, 2])));

        // The all-ones weight lies only on unit-pair hyperplanes.
        let ones = w(&[1, 1, 1]);
        for h in hyperplanes_through(&ones).unwrap() {
            assert!(h.is_principal());
            assert_eq!(h.coefficients().iter().sum::<u64>(), 1);
        }
    }

    #[test]
    fn constructor_rejects_bad_shapes() {
        assert!(AdmissibleInequality::new(1, vec![1, 0, 0]).is_err());
        assert!(AdmissibleInequality::new(2, vec![0, 0, 0]).is_err());
        assert!(AdmissibleInequality::new(4, vec![0, 1, 0]).is_err());
    }

    #[test]
    fn through_hyperplanes_at_3_2_1() {
        assert_eq!(
            equations(&w(&[3, 2, 1])),
            vec!["a1 = 1*a2 + 1*a3", "a1 = 3*a3", "a2 = 2*a3"]
        );
    }

    #[test]
    fn through_hyperplanes_at_6_3_2() {
        assert_eq!(equations(&w(&[6, 3, 2])), vec!["a1 = 2*a2", "a1 = 3*a3"]);
    }

    #[test]
    fn through_hyperplanes_at_11_3_2() {
        assert_eq!(
            equations(&w(&[11, 3, 2])),
            vec!["a1 = 3*a2 + 1*a3", "a1 = 1*a2 + 4*a3"]
        );
    }

    #[test]
    fn multiplicity_of_m_p_1_is_q_plus_2() {
        // For α = (m, p, 1): q is the quotient of m by p.
        for p in 1u64..=6 {
            for m in (p + 1)..=12 {
                let q = m / p;
                let count = multiplicity(&w(&[m as i64, p as i64, 1])).unwrap();
                assert_eq!(count as u64, q + 2, "multiplicity at ({m},{p},1)");
            }
        }
        assert_eq!(multiplicity(&w(&[7, 3, 1])).unwrap(), 4);
    }

    #[test]
    fn unit_pair_hyperplanes_are_deduplicated() {
        // At (1,1,1) the pairs α_i = α_j appear once each: 3 hyperplanes.
        assert_eq!(
            equations(&w(&[1, 1, 1])),
            vec!["a1 = 1*a2", "a1 = 1*a3", "a2 = 1*a3"]
        );
    }

    #[test]
    fn ball_queries_are_superset_safe_and_monotone() {
        // Multiplicity-0 interior weight: a tiny ball meets nothing.
        let isolated = w(&[7, 5, 3]);
        assert_eq!(multiplicity(&isolated).unwrap(), 0);
        assert!(hyperplanes_meeting_ball(&isolated, 1e-4).unwrap().is_empty());

        // A generous ball at (3,2,1) reaches the wall a1 = a2 near (2,2,1).
        let list = hyperplanes_meeting_ball(&w(&[3, 2, 1]), 0.5).unwrap();
        assert!(list.contains(&ineq(1, &[0, 1, 0])));

        // Monotone in the radius.
        let alpha = w(&[3, 2, 1]);
        let radii = [0.01, 0.05, 0.1, 0.3, 0.5, 0.8];
        for pair in radii.windows(2) {
            let small = hyperplanes_meeting_ball(&alpha, pair[0]).unwrap();
            let large = hyperplanes_meeting_ball(&alpha, pair[1]).unwrap();
            for h in &small {
                assert!(large.contains(h), "r={} ⊆ r={}", pair[0], pair[1]);
            }
        }

        // Every through-hyperplane is in every ball.
        for r in radii {
            let list = hyperplanes_meeting_ball(&alpha, r).unwrap();
            for h in hyperplanes_through(&alpha).unwrap() {
                assert!(list.contains(&h));
            }
        }
    }

    #[test]
    fn local_radius_guarantee() {
        // At the barycenter the nearest foreign wall is a1 = 2*a2 at
        // log-distance ln2/√2 ≈ 0.49, so the radius must come in under that.
        let ones = w(&[1, 1, 1]);
        let eps = local_radius(&ones).unwrap();
        assert!(eps > 0.0 && eps < 0.49);
        for h in hyperplanes_meeting_ball(&ones, eps).unwrap() {
            assert!(h.on_hyperplane(&ones));
        }

        // Isolated weight: positive radius, empty list.
        let isolated = w(&[7, 5, 3]);
        let eps = local_radius(&isolated).unwrap();
        assert!(eps > 0.0);
        assert!(hyperplanes_meeting_ball(&isolated, eps).unwrap().is_empty());
    }

    #[test]
    fn local_radius_audit_on_random_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..10_000 {
            let alpha = w(&[
                rng.gen_range(1..=9),
                rng.gen_range(1..=9),
                rng.gen_range(1..=9),
            ]);
            let eps = local_radius(&alpha).unwrap();
            for h in hyperplanes_meeting_ball(&alpha, eps).unwrap() {
                assert!(h.on_hyperplane(&alpha), "foreign wall inside B({alpha}, {eps})");
            }
        }
    }

    #[test]
    fn projection_examples() {
        let (proj, types) = simplicial_projection(&w(&[3, 2, 1]));
        assert_eq!(proj, w(&[2, 2, 1]));
        assert_eq!(types, vec![1]);

        let (proj, types) = simplicial_projection(&w(&[1, 1, 1]));
        assert_eq!(proj, w(&[1, 1, 1]));
        assert_eq!(types, vec![3]);

        // Idempotent on the projected complex.
        let (again, types2) = simplicial_projection(&proj);
        assert_eq!(again, proj);
        assert_eq!(types2, types);

        let (proj, types) = simplicial_projection(&w(&[2, 1, 1]));
        assert_eq!(proj, w(&[2, 1, 1]));
        assert_eq!(types, vec![2]);

        // An interior point of an edge of the complex: two vertex types.
        let (proj, types) = simplicial_projection(&w(&[4, 3, 2]));
        assert_eq!(
            proj,
            Weight::parse("2,3/2,1", 3).unwrap()
        );
        assert_eq!(types, vec![1, 2]);
    }

    #[test]
    fn display_formats_are_stable() {
        let h = ineq(1, &[0, 2, 1]);
        assert_eq!(h.equation_string(), "a1 = 2*a2 + 1*a3");
        assert_eq!(h.to_string(), "a1 >= 2*a2 + 1*a3");
        assert_eq!(ineq(2, &[0, 0, 2]).equation_string(), "a2 = 2*a3");
    }

    #[test]
    fn principal_means_single_support() {
        assert!(ineq(1, &[0, 3, 0]).is_principal());
        assert!(!ineq(1, &[0, 1, 1]).is_principal());
        let through = hyperplanes_through(&w(&[6, 3, 2])).unwrap();
        assert!(through.iter().all(|h| h.is_principal()));
    }

    #[test]
    fn region_sampling_returns_exact_members() {
        let mut region = FixedRegion::everything(3);
        region.push(ineq(1, &[0, 1, 1])).unwrap();
        region.restrict_to_sorted().unwrap();
        let sample = region.sample(12).unwrap();
        assert!(region.contains(&sample).unwrap());

        let mut impossible = FixedRegion::everything(3);
        impossible.mark_impossible();
        assert!(impossible.sample(12).is_none());
        assert!(!impossible.contains(&w(&[1, 1, 1])).unwrap());
    }

    #[test]
    fn region_intersection_merges_and_dedups() {
        let mut a = FixedRegion::everything(3);
        a.push(ineq(1, &[0, 1, 1])).unwrap();
        let mut b = FixedRegion::everything(3);
        b.push(ineq(1, &[0, 1, 1])).unwrap();
        b.push(ineq(2, &[0, 0, 2])).unwrap();
        let both = a.intersect(&b).unwrap();
        assert_eq!(both.inequalities().len(), 2);
        assert!(both.contains(&w(&[3, 2, 1])).unwrap());
        assert!(!both.contains(&w(&[3, 2, 2])).unwrap());
    }

    /// Stabilizers grow along the curve α(t) = (t², 2t, t+1) for t ≥ 5/2: on
    /// that range every admissible half-space membership is monotone
    /// non-decreasing in t, so a fixed automorphism stays fixed.
    #[test]
    fn stabilizers_increase_along_the_test_curve() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let field = Field::Rational;
        let ts: Vec<Weight> = [(5i64, 2i64), (3, 1), (7, 2), (4, 1), (6, 1), (9, 1)]
            .iter()
            .map(|&(num, den)| {
                let t = BigRational::new(BigInt::from(num), BigInt::from(den));
                let two = BigRational::from_integer(BigInt::from(2));
                Weight::new(vec![&t * &t, &t * &two, &t + BigRational::one()]).unwrap()
            })
            .collect();
        for _ in 0..60 {
            // Random triangular-ish word so that fixing is sometimes true.
            let exps = (
                rng.gen_range(1..=3u32),
                rng.gen_range(1..=3u32),
                rng.gen_range(1..=2u32),
            );
            let p1 = crate::field_poly::Polynomial::parse(
                &format!("x2^{} + x3^{}", exps.0, exps.1),
                3,
                field,
            )
            .unwrap();
            let p2 =
                crate::field_poly::Polynomial::parse(&format!("x3^{}", exps.2), 3, field).unwrap();
            let word = TameWord::new(
                3,
                field,
                vec![
                    Generator::elementary(1, p1).unwrap(),
                    Generator::elementary(2, p2).unwrap(),
                ],
            )
            .unwrap();
            for pair in ts.windows(2) {
                if fixes(&word, &pair[0], 64).unwrap() {
                    assert!(
                        fixes(&word, &pair[1], 64).unwrap(),
                        "stabilizer shrank along the curve"
                    );
                }
            }
        }
    }
}
