//! Monomial valuations and the tame-group action on them.
//!
//! A weight `α` (strictly positive rational coordinates) defines the monomial
//! valuation `ν_{id,α}(P) = min over supp P of −Σ α_k e_k`, and a tame word
//! `f` transports it to `ν_{f,α}(P) = ν_{id,α}(P ∘ f)`. This module gives the
//! exact evaluation of these valuations, the group action `g·ν_{f,α} =
//! ν_{g∘f,α}`, a complete equality test on points (projective weight classes
//! plus a stabilizer-membership check), the retractions onto sorted weights,
//! and explicit exact certificates that any non-identity automorphism moves
//! some point.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::admissible_geometry::{AdmissibleInequality, FixedRegion};
use crate::error::{Error, Result};
use crate::field_poly::{Field, Monomial, Polynomial};
use crate::tame_group::{apply_permutation, bruhat_permutation, is_permutation, Generator, TameWord};

// ---------------------------------------------------------------------------
// Values
// ---------------------------------------------------------------------------

/// The value of a valuation on a polynomial: an exact rational, or `+∞` for
/// the zero polynomial.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub enum Value {
    Finite(BigRational),
    Infinite,
}

impl Value {
    pub fn zero() -> Value {
        Value::Finite(BigRational::zero())
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Value::Infinite)
    }

    /// The finite value, if any.
    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Value::Finite(q) => Some(q),
            Value::Infinite => None,
        }
    }

    /// Addition with `+∞` absorbing.
    pub fn add(&self, other: &Value) -> Value {
        match (self, other) {
            (Value::Finite(a), Value::Finite(b)) => Value::Finite(a + b),
            _ => Value::Infinite,
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Value) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Value) -> Ordering {
        match (self, other) {
            (Value::Finite(a), Value::Finite(b)) => a.cmp(b),
            (Value::Finite(_), Value::Infinite) => Ordering::Less,
            (Value::Infinite, Value::Finite(_)) => Ordering::Greater,
            (Value::Infinite, Value::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Finite(q) => write!(f, "{q}"),
            Value::Infinite => write!(f, "inf"),
        }
    }
}

// ---------------------------------------------------------------------------
// Weights
// ---------------------------------------------------------------------------

/// A strictly positive rational weight vector.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct Weight {
    coords: Vec<BigRational>,
}

fn parse_rational(token: &str) -> Option<BigRational> {
    let token = token.trim();
    if let Some((numer, denom)) = token.split_once('/') {
        let numer: BigInt = numer.trim().parse().ok()?;
        let denom: BigInt = denom.trim().parse().ok()?;
        if denom.is_zero() {
            return None;
        }
        Some(BigRational::new(numer, denom))
    } else {
        let numer: BigInt = token.parse().ok()?;
        Some(BigRational::from_integer(numer))
    }
}

impl Weight {
    /// Validated constructor: nonempty, all coordinates strictly positive.
    pub fn new(coords: Vec<BigRational>) -> Result<Weight> {
        if coords.is_empty() || coords.iter().any(|c| *c <= BigRational::zero()) {
            return Err(Error::NonPositiveWeight);
        }
        Ok(Weight { coords })
    }

    pub fn from_integers(coords: &[i64]) -> Result<Weight> {
        Weight::new(
            coords
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    /// Parses `3,2,1` or `1/2,3,2` into an `n`-coordinate weight.
    pub fn parse(src: &str, n: usize) -> Result<Weight> {
        let tokens: Vec<&str> = src.split(',').collect();
        if tokens.len() != n {
            return Err(Error::DimensionMismatch(tokens.len(), n));
        }
        let mut coords = Vec::with_capacity(n);
        let mut offset = 0;
        for token in tokens {
            let q = parse_rational(token).ok_or_else(|| {
                Error::parse_at(src, offset, "expected a rational number like 3 or 1/2")
            })?;
            coords.push(q);
            offset += token.len() + 1;
        }
        Weight::new(coords)
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    /// 1-based coordinate access.
    pub fn coord(&self, i: usize) -> &BigRational {
        &self.coords[i - 1]
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn is_sorted_desc(&self) -> bool {
        self.coords.windows(2).all(|w| w[0] >= w[1])
    }

    /// The sorted weight `α⁺` (coordinates non-increasing).
    pub fn sorted_desc(&self) -> Weight {
        let mut coords = self.coords.clone();
        coords.sort_by(|a, b| b.cmp(a));
        Weight { coords }
    }

    /// Transports the weight by a permutation: the result places coordinate
    /// `j` of `self` at position `σ(j)`.
    pub fn permute(&self, sigma: &[usize]) -> Result<Weight> {
        if sigma.len() != self.n() || !is_permutation(sigma) {
            return Err(Error::NotAPermutation(sigma.to_vec(), self.n()));
        }
        Ok(Weight {
            coords: apply_permutation(sigma, &self.coords),
        })
    }

    /// The weighted degree `Σ α_k e_k` of a monomial.
    pub fn weighted_degree(&self, monomial: &Monomial) -> BigRational {
        let mut acc = BigRational::zero();
        for (k, &e) in monomial.exponents().iter().enumerate() {
            if e > 0 {
                acc += &self.coords[k] * BigRational::from_integer(BigInt::from(e));
            }
        }
        acc
    }

    /// True when the two weights differ by a positive scalar factor.
    pub fn proportional(&self, other: &Weight) -> bool {
        self.n() == other.n()
            && (1..=self.n()).all(|i| {
                self.coord(i) * other.coord(1) == other.coord(i) * self.coord(1)
            })
    }

    /// The representative scaled so its minimum coordinate is exactly 1.
    pub fn scaled_to_min_one(&self) -> Weight {
        let min = self.coords.iter().min().expect("weights are nonempty");
        Weight {
            coords: self.coords.iter().map(|c| c / min).collect(),
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// The sorted weight `α⁺`.
pub fn alpha_plus(alpha: &Weight) -> Weight {
    alpha.sorted_desc()
}

// ---------------------------------------------------------------------------
// Projective weights
// ---------------------------------------------------------------------------

/// A weight up to positive scaling, canonicalized so the minimum coordinate
/// is exactly 1 (keeping everything rational). Equality and hashing are on
/// the canonical representative, hence scale-free.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct ProjWeight {
    weight: Weight,
}

impl ProjWeight {
    pub fn new(weight: &Weight) -> ProjWeight {
        ProjWeight {
            weight: weight.scaled_to_min_one(),
        }
    }

    pub fn parse(src: &str, n: usize) -> Result<ProjWeight> {
        Ok(ProjWeight::new(&Weight::parse(src, n)?))
    }

    /// The canonical representative (minimum coordinate 1).
    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn n(&self) -> usize {
        self.weight.n()
    }

    /// True when the representative is sorted non-increasing.
    pub fn in_chamber(&self) -> bool {
        self.weight.is_sorted_desc()
    }

    /// True when all coordinates are pairwise distinct.
    pub fn is_interior(&self) -> bool {
        let coords = self.weight.coords();
        for (k, a) in coords.iter().enumerate() {
            if coords[k + 1..].contains(a) {
                return false;
            }
        }
        true
    }
}

impl fmt::Display for ProjWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.weight)
    }
}

// ---------------------------------------------------------------------------
// Valuation points
// ---------------------------------------------------------------------------

/// The valuation `ν_{f,[α]}`: a frame (tame word) together with a projective
/// weight. Different (frame, weight) pairs can present the same valuation;
/// [`points_equal`] decides that exactly, so this struct deliberately does
/// not implement `PartialEq`.
#[derive(Clone, Debug)]
pub struct ValuationPoint {
    frame: TameWord,
    proj: ProjWeight,
}

impl ValuationPoint {
    /// A valuation point with the given frame; the weight is stored as its
    /// canonical projective representative.
    pub fn new(frame: TameWord, weight: &Weight) -> Result<ValuationPoint> {
        if frame.n_vars() != weight.n() {
            return Err(Error::DimensionMismatch(weight.n(), frame.n_vars()));
        }
        Ok(ValuationPoint {
            frame,
            proj: ProjWeight::new(weight),
        })
    }

    /// The monomial valuation `ν_{id,[α]}`.
    pub fn monomial(field: Field, weight: &Weight) -> ValuationPoint {
        ValuationPoint::new(TameWord::identity(weight.n(), field), weight)
            .expect("identity frame always matches the weight dimension")
    }

    pub fn frame(&self) -> &TameWord {
        &self.frame
    }

    /// The canonical weight representative (minimum coordinate 1).
    pub fn weight(&self) -> &Weight {
        self.proj.weight()
    }

    pub fn proj_weight(&self) -> &ProjWeight {
        &self.proj
    }

    pub fn n_vars(&self) -> usize {
        self.frame.n_vars()
    }

    pub fn field(&self) -> Field {
        self.frame.field()
    }

    /// Rewrites the point with a sorted weight: returns `ν_{f∘a_σ, α⁺}`
    /// (the same valuation) and the sorting permutation `σ`.
    pub fn sorted(&self) -> Result<(ValuationPoint, Vec<usize>)> {
        let sigma = sorting_permutation(self.weight());
        let n = self.n_vars();
        let identity: Vec<usize> = (1..=n).collect();
        let frame = if sigma == identity {
            self.frame.clone()
        } else {
            let perm = TameWord::new(
                n,
                self.field(),
                vec![Generator::permutation(sigma.clone())?],
            )?;
            self.frame.compose(&perm)?
        };
        let point = ValuationPoint::new(frame, &self.weight().sorted_desc())?;
        Ok((point, sigma))
    }

    /// Exact equality of the underlying valuations; see [`points_equal`].
    pub fn equals(&self, other: &ValuationPoint, cap: u32) -> Result<bool> {
        points_equal(self, other, cap)
    }
}

impl fmt::Display for ValuationPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "weight {} with frame:", self.proj)?;
        if self.frame.generators().is_empty() {
            write!(f, " identity")
        } else {
            write!(f, "\n{}", self.frame)
        }
    }
}

// ---------------------------------------------------------------------------
// Evaluation and the action
// ---------------------------------------------------------------------------

/// `ν_{id,α}(P) = min over supp P of −Σ α_k e_k`, exactly; `+∞` iff `P = 0`.
pub fn nu_eval(alpha: &Weight, p: &Polynomial) -> Result<Value> {
    if p.n_vars() != alpha.n() {
        return Err(Error::DimensionMismatch(p.n_vars(), alpha.n()));
    }
    let mut max_degree: Option<BigRational> = None;
    for monomial in p.support() {
        let d = alpha.weighted_degree(monomial);
        match &max_degree {
            Some(current) if *current >= d => {}
            _ => max_degree = Some(d),
        }
    }
    Ok(match max_degree {
        Some(d) => Value::Finite(-d),
        None => Value::Infinite,
    })
}

/// `ν_{f,α}(P) = ν_{id,α}(P ∘ f)`, evaluated exactly at the canonical weight
/// representative of the point.
pub fn point_eval(nu: &ValuationPoint, p: &Polynomial, cap: u32) -> Result<Value> {
    if p.n_vars() != nu.n_vars() {
        return Err(Error::DimensionMismatch(p.n_vars(), nu.n_vars()));
    }
    let pullback = p.substitute(nu.frame().components(cap)?, cap)?;
    nu_eval(nu.weight(), &pullback)
}

/// The action `g · ν_{f,α} = ν_{g∘f,α}` (so that `(g·ν)(P) = ν(P ∘ g)`).
pub fn act(g: &TameWord, nu: &ValuationPoint) -> Result<ValuationPoint> {
    ValuationPoint::new(g.compose(nu.frame())?, nu.weight())
}

/// The lexicographically smallest permutation `σ` with
/// `alpha.sorted_desc().permute(σ) == alpha` (one-line notation): position
/// `σ(j)` of `α` receives the `j`-th largest coordinate.
pub fn sorting_permutation(alpha: &Weight) -> Vec<usize> {
    let n = alpha.n();
    let sorted = alpha.sorted_desc();
    let mut used = vec![false; n];
    let mut sigma = Vec::with_capacity(n);
    for j in 1..=n {
        let target = sorted.coord(j);
        let k = (1..=n)
            .find(|&k| !used[k - 1] && alpha.coord(k) == target)
            .expect("sorted coordinates are a permutation of the original");
        used[k - 1] = true;
        sigma.push(k);
    }
    sigma
}

// ---------------------------------------------------------------------------
// Fixed loci
// ---------------------------------------------------------------------------

/// The region of weights `α` with `f · ν_{id,α} = ν_{id,α}`, described by one
/// admissible inequality `α_i ≥ Σ m_j α_j` per non-`x_i`, non-constant
/// monomial `x^m` of each component `f_i` (duplicates merged). A monomial
/// involving `x_i` other than `x_i` itself cannot satisfy its inequality at
/// any strictly positive weight, and marks the region impossible.
pub fn fixed_inequalities(f: &TameWord, cap: u32) -> Result<FixedRegion> {
    let n = f.n_vars();
    let components = f.components(cap)?;
    let mut region = FixedRegion::everything(n);
    for i in 1..=n {
        let xi = Monomial::variable(n, i)?;
        for monomial in components[i - 1].support() {
            if monomial.is_constant() || *monomial == xi {
                continue;
            }
            if monomial.exponent(i) > 0 {
                region.mark_impossible();
                continue;
            }
            let m: Vec<u64> = monomial.exponents().iter().map(|&e| e as u64).collect();
            region.push(AdmissibleInequality::new(i, m)?)?;
        }
    }
    Ok(region)
}

/// True iff `f` fixes the monomial valuation `ν_{id,α}` (exact test).
pub fn fixes(f: &TameWord, alpha: &Weight, cap: u32) -> Result<bool> {
    if f.n_vars() != alpha.n() {
        return Err(Error::DimensionMismatch(alpha.n(), f.n_vars()));
    }
    fixed_inequalities(f, cap)?.contains(alpha)
}

/// Exact equality of the valuations presented by two points: rewrite both
/// with sorted weights (adjusting the frames by sorting permutations), then
/// the points agree iff the sorted projective weights coincide and
/// `F⁻¹ ∘ G` fixes `ν_{id,α⁺}`.
pub fn points_equal(a: &ValuationPoint, b: &ValuationPoint, cap: u32) -> Result<bool> {
    if a.n_vars() != b.n_vars() {
        return Err(Error::DimensionMismatch(b.n_vars(), a.n_vars()));
    }
    if a.field() != b.field() {
        return Err(Error::FieldMismatch(a.field(), b.field()));
    }
    let (sa, _) = a.sorted()?;
    let (sb, _) = b.sorted()?;
    if sa.proj_weight() != sb.proj_weight() {
        return Ok(false);
    }
    let h = sa.frame().invert()?.compose(sb.frame())?;
    fixes(&h, sa.weight(), cap)
}

// ---------------------------------------------------------------------------
// Retractions
// ---------------------------------------------------------------------------

/// The sorted projective weight `[α⁺]` of a point (independent of the
/// presenting pair).
pub fn rho_plus(nu: &ValuationPoint) -> ProjWeight {
    ProjWeight::new(&nu.weight().sorted_desc())
}

/// The retraction onto the reference apartment: rewrite the point with a
/// sorted weight `α⁺` and frame `F`, split off the translation part of `F`,
/// and transport `α⁺` by the pivot permutation of the differential at the
/// origin — `ρ(ν_{F,α⁺}) = [σ_F(α⁺)]`.
pub fn rho(nu: &ValuationPoint, cap: u32) -> Result<ProjWeight> {
    let (sorted, _) = nu.sorted()?;
    let (linear_part, _translation) = sorted.frame().split_translation(cap)?;
    let differential = linear_part.diff_at_origin(cap)?;
    let sigma = bruhat_permutation(&differential)?;
    Ok(ProjWeight::new(&sorted.weight().permute(&sigma)?))
}

// ---------------------------------------------------------------------------
// Moved-valuation witnesses
// ---------------------------------------------------------------------------

/// An exact certificate that `f` moves the valuation point `ν`: the scaling
/// classes of `ν` and `f·ν` differ because the cross products
/// `ν(P)·(f·ν)(Q)` and `ν(Q)·(f·ν)(P)` disagree.
#[derive(Clone, Debug)]
pub struct MovedWitness {
    /// The moved point `ν`.
    pub point: ValuationPoint,
    /// The polynomial `P` exhibiting the discrepancy.
    pub poly: Polynomial,
    /// The normalizing polynomial `Q` ruling out a scaling coincidence.
    pub normalizer: Polynomial,
    /// `ν(P)`.
    pub value_poly: Value,
    /// `(f·ν)(P)`.
    pub moved_value_poly: Value,
    /// `ν(Q)`.
    pub value_normalizer: Value,
    /// `(f·ν)(Q)`.
    pub moved_value_normalizer: Value,
}

impl MovedWitness {
    /// True when the four recorded values certify `f·ν ≠ ν` up to scaling:
    /// all finite and `ν(P)·(f·ν)(Q) ≠ ν(Q)·(f·ν)(P)`.
    pub fn certifies(&self) -> bool {
        match (
            self.value_poly.as_rational(),
            self.moved_value_poly.as_rational(),
            self.value_normalizer.as_rational(),
            self.moved_value_normalizer.as_rational(),
        ) {
            (Some(vp), Some(mvp), Some(vq), Some(mvq)) => vp * mvq != vq * mvp,
            _ => false,
        }
    }
}

impl fmt::Display for MovedWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "moved point: {}", self.point)?;
        writeln!(f, "poly P = {}", self.poly)?;
        writeln!(f, "normalizer Q = {}", self.normalizer)?;
        writeln!(
            f,
            "nu(P) = {}, (f.nu)(P) = {}",
            self.value_poly, self.moved_value_poly
        )?;
        write!(
            f,
            "nu(Q) = {}, (f.nu)(Q) = {}",
            self.value_normalizer, self.moved_value_normalizer
        )
    }
}

fn try_witness(
    f: &TameWord,
    point: &ValuationPoint,
    p: &Polynomial,
    q: &Polynomial,
    cap: u32,
) -> Result<Option<MovedWitness>> {
    let moved = act(f, point)?;
    let witness = MovedWitness {
        value_poly: point_eval(point, p, cap)?,
        moved_value_poly: point_eval(&moved, p, cap)?,
        value_normalizer: point_eval(point, q, cap)?,
        moved_value_normalizer: point_eval(&moved, q, cap)?,
        point: point.clone(),
        poly: p.clone(),
        normalizer: q.clone(),
    };
    Ok(if witness.certifies() {
        Some(witness)
    } else {
        None
    })
}

/// The all-ones weight with coordinate `bump` (if any) raised to 2.
fn bumped_weight(n: usize, bump: Option<usize>) -> Weight {
    let mut coords = vec![1i64; n];
    if let Some(j) = bump {
        coords[j - 1] = 2;
    }
    Weight::from_integers(&coords).expect("positive coordinates")
}

/// Produces a valuation point moved by `f ≠ id`, certified by two exact
/// evaluations (on a polynomial `P` and a normalizer `Q`).
///
/// If some component `f_i` carries a monomial other than `x_i` and constants,
/// the identity-frame point at the all-ones weight (or with one coordinate
/// bumped to 2 for a linear cross term) already drops strictly on `x_i`, and
/// a normalizer is found among the variables and the components of `f⁻¹`.
/// Otherwise `f` is diagonal-affine and fixes every identity-frame point, so
/// the point is taken in a sheared frame `g = (x_i − x_j^r)`: the pullback of
/// `P = x_i + x_j^r` through `g ∘ f` reveals the diagonal part exactly.
pub fn moved_valuation_witness(f: &TameWord, cap: u32) -> Result<MovedWitness> {
    let n = f.n_vars();
    let field = f.field();
    if n < 2 {
        return Err(Error::precondition(
            "moved-valuation witnesses need at least two variables",
        ));
    }
    if f.is_identity(cap)? {
        return Err(Error::precondition(
            "the identity automorphism fixes every valuation",
        ));
    }
    let components = f.components(cap)?;

    // Classify: a non-{x_i, constant} monomial of total degree >= 2 anywhere,
    // or a linear cross term x_j in component i.
    let mut higher: Option<usize> = None;
    let mut cross: Option<(usize, usize)> = None;
    for i in 1..=n {
        let xi = Monomial::variable(n, i)?;
        for monomial in components[i - 1].support() {
            if monomial.is_constant() || *monomial == xi {
                continue;
            }
            if monomial.total_degree() >= 2 {
                higher.get_or_insert(i);
            } else {
                let j = (1..=n)
                    .find(|&j| monomial.exponent(j) == 1)
                    .expect("a linear monomial has a variable");
                cross.get_or_insert((i, j));
            }
        }
    }

    if higher.is_some() || cross.is_some() {
        // Identity-frame witness: nu(x_i) drops strictly under f.
        let (i, alpha) = match higher {
            Some(i) => (i, bumped_weight(n, None)),
            None => {
                let (i, j) = cross.expect("checked above");
                (i, bumped_weight(n, Some(j)))
            }
        };
        let point = ValuationPoint::monomial(field, &alpha);
        let p = Polynomial::variable(n, i, field)?;
        let mut pool: Vec<Polynomial> = (1..=n)
            .map(|k| Polynomial::variable(n, k, field))
            .collect::<Result<_>>()?;
        pool.extend(f.invert()?.components(cap)?.iter().cloned());
        for q in &pool {
            if let Some(witness) = try_witness(f, &point, &p, q, cap)? {
                return Ok(witness);
            }
        }
        return Err(Error::SearchBudgetExceeded(
            "no normalizing polynomial certified the moved valuation".into(),
        ));
    }

    // Diagonal-affine case: every component is c_i x_i + t_i.
    let j_star = (1..=n)
        .find(|&i| components[i - 1] != Polynomial::variable(n, i, field).expect("valid index"))
        .expect("a non-identity word has a nontrivial component");
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    if let Some(i0) = (1..=n).find(|&i| i != j_star) {
        pairs.push((i0, j_star));
    }
    for i in 1..=n {
        for j in 1..=n {
            if i != j && !pairs.contains(&(i, j)) {
                pairs.push((i, j));
            }
        }
    }
    for &(i, j) in &pairs {
        for r in 2u32..=5 {
            let xj_pow = Polynomial::variable(n, j, field)?.pow(r, cap)?;
            let shear = TameWord::new(
                n,
                field,
                vec![Generator::elementary(i, xj_pow.neg())?],
            )?;
            let alpha = bumped_weight(n, Some(j));
            let point = ValuationPoint::new(shear, &alpha)?;
            let p = Polynomial::variable(n, i, field)?.add(&xj_pow)?;
            let q = Polynomial::variable(n, j, field)?;
            if let Some(witness) = try_witness(f, &point, &p, &q, cap)? {
                return Ok(witness);
            }
        }
    }
    Err(Error::SearchBudgetExceeded(
        "no sheared frame certified the moved valuation".into(),
    ))
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
