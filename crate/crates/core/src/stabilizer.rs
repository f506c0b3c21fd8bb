//! Structure of the stabilizer of a sorted monomial valuation: the block
//! data read off a sorted weight, the unipotent triangular group `M_α`, the
//! block-diagonal linear group `L_α`, the normal subgroup `N_α` at weights
//! of shape `(m, p, 1)`, the exact semidirect decomposition of a stabilizer
//! element, local equivalence of two stabilizer elements at a point, and the
//! common-sector classification of their shared fixed germ.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::admissible_geometry::local_cell_samples;
use crate::error::{Error, Result};
use crate::field_poly::{Polynomial, Scalar};
use crate::tame_group::{Generator, TameWord};
use crate::valuation_space::{fixes, ValuationPoint, Weight};

// ---------------------------------------------------------------------------
// Block structure of a sorted weight
// ---------------------------------------------------------------------------

/// The strictly descending distinct values `γ_1 > … > γ_r` of a sorted
/// weight together with their multiplicities, and the block index of every
/// coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockStructure {
    values: Vec<BigRational>,
    multiplicities: Vec<usize>,
    block_of: Vec<usize>,
}

impl BlockStructure {
    /// Reads the blocks off a weight sorted in non-increasing order.
    pub fn new(alpha: &Weight) -> Result<BlockStructure> {
        if !alpha.is_sorted_desc() {
            return Err(Error::WeightNotSorted(alpha.to_string()));
        }
        let mut values: Vec<BigRational> = Vec::new();
        let mut multiplicities: Vec<usize> = Vec::new();
        let mut block_of: Vec<usize> = Vec::with_capacity(alpha.n());
        for c in alpha.coords() {
            if values.last() != Some(c) {
                values.push(c.clone());
                multiplicities.push(0);
            }
            let last = multiplicities.len() - 1;
            multiplicities[last] += 1;
            block_of.push(values.len());
        }
        Ok(BlockStructure {
            values,
            multiplicities,
            block_of,
        })
    }

    pub fn n(&self) -> usize {
        self.block_of.len()
    }

    /// Distinct weight values, strictly descending.
    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn block_count(&self) -> usize {
        self.values.len()
    }

    /// 1-based block index of the 1-based coordinate `i`.
    pub fn block_of(&self, i: usize) -> usize {
        self.block_of[i - 1]
    }
}

// ---------------------------------------------------------------------------
// Membership tests
// ---------------------------------------------------------------------------

/// The offsets `P_i = f_i − x_i` of a word's expanded components.
fn component_offsets(f: &TameWord, cap: u32) -> Result<Vec<Polynomial>> {
    let n = f.n_vars();
    let field = f.field();
    let comps = f.components(cap)?;
    (1..=n)
        .map(|i| {
            let xi = Polynomial::variable(n, i, field)?;
            comps[i - 1].sub(&xi)
        })
        .collect()
}

/// Membership in `M_α`: every component is `x_i + P_i` where `P_i` involves
/// only variables from strictly later blocks (strictly smaller weight
/// values; constants allowed) and every monomial of `P_i` has weighted
/// degree at most `α_i`. Requires `α` sorted.
pub fn in_m_alpha(f: &TameWord, alpha: &Weight, cap: u32) -> Result<bool> {
    let blocks = BlockStructure::new(alpha)?;
    let n = f.n_vars();
    if n != alpha.n() {
        return Err(Error::DimensionMismatch(n, alpha.n()));
    }
    let offsets = component_offsets(f, cap)?;
    for (i, p_i) in offsets.iter().enumerate() {
        let i = i + 1;
        for (mono, _) in p_i.terms() {
            if mono.is_constant() {
                continue;
            }
            for j in 1..=n {
                if mono.exponent(j) > 0 && blocks.block_of(j) <= blocks.block_of(i) {
                    return Ok(false);
                }
            }
            if alpha.weighted_degree(mono) > *alpha.coord(i) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Membership in `L_α`: the word is linear with no constant terms and each
/// component involves only variables from its own block. (Words are
/// automorphisms, so invertibility is automatic.) Requires `α` sorted.
pub fn in_l_alpha(f: &TameWord, alpha: &Weight, cap: u32) -> Result<bool> {
    let blocks = BlockStructure::new(alpha)?;
    let n = f.n_vars();
    if n != alpha.n() {
        return Err(Error::DimensionMismatch(n, alpha.n()));
    }
    let comps = f.components(cap)?;
    for (i, c_i) in comps.iter().enumerate() {
        let i = i + 1;
        for (mono, _) in c_i.terms() {
            if mono.total_degree() != 1 {
                return Ok(false);
            }
            let j = (1..=n).find(|&j| mono.exponent(j) > 0).expect("degree 1");
            if blocks.block_of(j) != blocks.block_of(i) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Recognizes the shape `(m, p, 1)` with `m > p > 1` after scaling to
/// minimum 1, returning `(m, p)`.
fn mp1_shape(alpha: &Weight) -> Option<(BigRational, BigRational)> {
    if alpha.n() != 3 {
        return None;
    }
    let c = alpha.scaled_to_min_one();
    let one = BigRational::one();
    if *c.coord(3) == one && *c.coord(2) > one && c.coord(1) > c.coord(2) {
        Some((c.coord(1).clone(), c.coord(2).clone()))
    } else {
        None
    }
}

/// Membership in `N_α` at a weight of shape `(m, p, 1)` with `m > p > 1`:
/// membership in `M_α` with all weighted-degree bounds strict. Errors on
/// any other weight shape.
pub fn in_n_alpha(f: &TameWord, alpha: &Weight, cap: u32) -> Result<bool> {
    if mp1_shape(alpha).is_none() {
        return Err(Error::UnsupportedWeightShape(format!(
            "N_alpha is defined at weights of shape (m, p, 1) with m > p > 1, got {alpha}"
        )));
    }
    let scaled = alpha.scaled_to_min_one();
    if !in_m_alpha(f, &scaled, cap)? {
        return Ok(false);
    }
    let offsets = component_offsets(f, cap)?;
    for (i, p_i) in offsets.iter().enumerate() {
        let i = i + 1;
        for (mono, _) in p_i.terms() {
            if scaled.weighted_degree(mono) >= *scaled.coord(i) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Semidirect decomposition
// ---------------------------------------------------------------------------

/// Renders the right-hand side `Σ e_j·a_j` of the inequality violated by a
/// monomial appearing in component `i`.
fn render_rhs(mono: &crate::field_poly::Monomial, n: usize) -> String {
    let parts: Vec<String> = (1..=n)
        .filter(|&j| mono.exponent(j) > 0)
        .map(|j| format!("{}*a{}", mono.exponent(j), j))
        .collect();
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(" + ")
    }
}

/// Checks that `f` fixes the valuation at `α`, reporting the first violated
/// weighted-degree inequality otherwise.
fn require_stabilizer(f: &TameWord, alpha: &Weight, cap: u32) -> Result<()> {
    let n = f.n_vars();
    let offsets = component_offsets(f, cap)?;
    for (i, p_i) in offsets.iter().enumerate() {
        let i = i + 1;
        for (mono, _) in p_i.terms() {
            if mono.is_constant() {
                continue;
            }
            if alpha.weighted_degree(mono) > *alpha.coord(i) {
                return Err(Error::NotInStabilizer {
                    index: i,
                    rhs: render_rhs(mono, n),
                });
            }
        }
    }
    Ok(())
}

/// The two exact factors of a stabilizer element: `f = m ∘ l` with
/// `m ∈ M_α` and `l ∈ L_α` (stored as its block-diagonal matrix).
#[derive(Clone, Debug)]
pub struct StabDecomposition {
    /// Unipotent triangular factor.
    pub m: TameWord,
    /// Block-diagonal invertible matrix of the linear factor.
    pub l: Vec<Vec<Scalar>>,
}

impl StabDecomposition {
    /// The linear factor as a one-generator word.
    pub fn l_word(&self) -> Result<TameWord> {
        let n = self.l.len();
        let field = self.l[0][0].field();
        let zeros = vec![field.zero(); n];
        let gen = Generator::affine(self.l.clone(), zeros)?;
        Ok(TameWord::new(n, field, vec![gen])?)
    }
}

/// Splits a stabilizer element of the valuation at a sorted weight `α` as
/// `f = m ∘ l`: `l` is the block-diagonal part of the linear part of `f`
/// (invertible because the linear part is block-upper-triangular), and
/// `m = f ∘ l⁻¹` lands in `M_α`. The factorization is verified exactly by
/// recomposition before returning.
pub fn decompose_stabilizer(f: &TameWord, alpha: &Weight, cap: u32) -> Result<StabDecomposition> {
    let blocks = BlockStructure::new(alpha)?;
    let n = f.n_vars();
    if n != alpha.n() {
        return Err(Error::DimensionMismatch(n, alpha.n()));
    }
    require_stabilizer(f, alpha, cap)?;
    let field = f.field();
    let comps = f.components(cap)?;
    let mut l = vec![vec![field.zero(); n]; n];
    for i in 1..=n {
        for j in 1..=n {
            if blocks.block_of(i) == blocks.block_of(j) {
                l[i - 1][j - 1] = comps[i - 1].linear_coefficient(j)?;
            }
        }
    }
    let decomposition = StabDecomposition { m: f.clone(), l };
    let l_word = decomposition.l_word()?;
    let m = f.compose(&l_word.invert()?)?;
    if !in_m_alpha(&m, alpha, cap)? {
        return Err(Error::precondition(
            "stabilizer decomposition produced a factor outside M_alpha",
        ));
    }
    if !m.compose(&l_word)?.same_map(f, cap)? {
        return Err(Error::precondition(
            "stabilizer decomposition failed to recompose",
        ));
    }
    Ok(StabDecomposition {
        m,
        l: decomposition.l,
    })
}

// ---------------------------------------------------------------------------
// Local equivalence at a point
// ---------------------------------------------------------------------------

/// Conjugates `f` and `g` into the frame of the sorted representative of
/// `nu` and returns them with the sorted canonical weight.
fn localize_pair(
    f: &TameWord,
    g: &TameWord,
    nu: &ValuationPoint,
    cap: u32,
) -> Result<(TameWord, TameWord, Weight)> {
    let (sorted_nu, _) = nu.sorted()?;
    let frame = sorted_nu.frame();
    let frame_inv = frame.invert()?;
    let alpha = sorted_nu.weight().clone();
    let f_loc = frame_inv.compose(f)?.compose(frame)?;
    let g_loc = frame_inv.compose(g)?.compose(frame)?;
    if !fixes(&f_loc, &alpha, cap)? {
        return Err(Error::precondition(
            "first word does not fix the valuation point",
        ));
    }
    if !fixes(&g_loc, &alpha, cap)? {
        return Err(Error::precondition(
            "second word does not fix the valuation point",
        ));
    }
    Ok((f_loc, g_loc, alpha))
}

/// Whether two stabilizer elements of `nu` have the same germ of fixed
/// locus at `nu` inside the surrounding apartment.
///
/// At an interior weight of shape `(m, p, 1)` with `m > p > 1` this is the
/// exact algebraic criterion: discard the block-diagonal linear factors
/// (they fix every nearby monomial valuation) and test whether the
/// quotient of the unipotent factors lies in `N_α`. At every other sorted
/// shape in dimension 2 or 3 it is decided by exact evaluation on one
/// certified sample per local arrangement cell.
pub fn locally_equivalent(
    f: &TameWord,
    g: &TameWord,
    nu: &ValuationPoint,
    cap: u32,
) -> Result<bool> {
    let (f_loc, g_loc, alpha) = localize_pair(f, g, nu, cap)?;
    if mp1_shape(&alpha).is_some() {
        let df = decompose_stabilizer(&f_loc, &alpha, cap)?;
        let dg = decompose_stabilizer(&g_loc, &alpha, cap)?;
        let quotient = df.m.invert()?.compose(&dg.m)?;
        in_n_alpha(&quotient, &alpha, cap)
    } else {
        let cells = local_cell_samples(&alpha)?;
        for sample in cells.rays().iter().chain(cells.sectors()) {
            if fixes(&f_loc, sample, cap)? != fixes(&g_loc, sample, cap)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

// ---------------------------------------------------------------------------
// Common sectors
// ---------------------------------------------------------------------------

/// The shape of the common fixed germ of two stabilizer elements at a
/// weight `(m, p, 1)`, read off the normal form of `f⁻¹ ∘ g` modulo `N_α`.
/// Ideal endpoints are projective directions on the boundary of the sorted
/// simplex, written as coordinate triples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SectorDescriptor {
    /// The two germs agree on a full neighborhood.
    Full,
    /// Bounded by the rays toward `[m − p·a, 0, 1]` and `[b, 1, 0]`, where
    /// `a` and `b` are the extreme exponents of `x₂` in the top weighted
    /// part of the first component.
    Cone {
        a: u32,
        b: u32,
        ends: [Vec<BigRational>; 2],
    },
    /// The half-space `α₂ ≥ p·α₃`, with ideal endpoints `[0, p, 1]` and
    /// `[1, 0, 0]`.
    HalfSpace {
        p: BigRational,
        ends: [Vec<BigRational>; 2],
    },
    /// Bounded by the rays toward `[1, 0, 0]` and `[b, 1, 0]`.
    EdgeCone {
        b: u32,
        ends: [Vec<BigRational>; 2],
    },
}

fn render_direction(v: &[BigRational]) -> String {
    let inner: Vec<String> = v.iter().map(|c| c.to_string()).collect();
    format!("[{}]", inner.join(","))
}

impl fmt::Display for SectorDescriptor {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SectorDescriptor::Full => write!(out, "full neighborhood"),
            SectorDescriptor::Cone { a, b, ends } => write!(
                out,
                "cone a={} b={} between {} and {}",
                a,
                b,
                render_direction(&ends[0]),
                render_direction(&ends[1])
            ),
            SectorDescriptor::HalfSpace { p, ends } => write!(
                out,
                "half-space a2 >= {}*a3 between {} and {}",
                p,
                render_direction(&ends[0]),
                render_direction(&ends[1])
            ),
            SectorDescriptor::EdgeCone { b, ends } => write!(
                out,
                "cone b={} between {} and {}",
                b,
                render_direction(&ends[0]),
                render_direction(&ends[1])
            ),
        }
    }
}

fn rational(i: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(i))
}

/// Classifies the common fixed germ of two stabilizer elements at a point
/// whose sorted weight has shape `(m, p, 1)` with `m > p > 1`.
///
/// The quotient `f⁻¹ ∘ g` is reduced to its unipotent factor and then to a
/// normal form modulo `N_α`: only the weighted-degree-exactly-`m` part `P`
/// of the first component offset and the degree-exactly-`p` part `Q` of the
/// second survive. The germ is full iff both vanish; otherwise the
/// surviving parts cut out a cone or half-space through `[α]`.
pub fn sector(
    f: &TameWord,
    g: &TameWord,
    nu: &ValuationPoint,
    cap: u32,
) -> Result<SectorDescriptor> {
    let (sorted_nu, _) = nu.sorted()?;
    let (m_val, p_val) = mp1_shape(sorted_nu.weight()).ok_or_else(|| {
        Error::UnsupportedWeightShape(format!(
            "sector classification needs a weight of shape (m, p, 1) with m > p > 1, got {}",
            sorted_nu.weight()
        ))
    })?;
    let (f_loc, g_loc, alpha) = localize_pair(f, g, nu, cap)?;
    let quotient = f_loc.invert()?.compose(&g_loc)?;
    let d = decompose_stabilizer(&quotient, &alpha, cap)?;
    let offsets = component_offsets(&d.m, cap)?;

    let top_part = |poly: &Polynomial, bound: &BigRational| -> Polynomial {
        let field = poly.field();
        let kept: Vec<_> = poly
            .terms()
            .filter(|(mono, _)| alpha.weighted_degree(mono) == *bound)
            .map(|(mono, coef)| (mono.clone(), coef.clone()))
            .collect();
        Polynomial::from_terms(3, field, kept).expect("filtered terms are well-formed")
    };
    let p_top = top_part(&offsets[0], &m_val);
    let q_top = top_part(&offsets[1], &p_val);

    let x2_exponents: Vec<u32> = p_top.support().map(|mono| mono.exponent(2)).collect();
    let a = x2_exponents.iter().copied().min();
    let b = x2_exponents.iter().copied().max();

    match (p_top.is_zero(), q_top.is_zero()) {
        (true, true) => Ok(SectorDescriptor::Full),
        (false, true) => {
            let (a, b) = (a.expect("nonzero"), b.expect("nonzero"));
            let low = &m_val - &p_val * rational(i64::from(a));
            Ok(SectorDescriptor::Cone {
                a,
                b,
                ends: [
                    vec![low, rational(0), rational(1)],
                    vec![rational(i64::from(b)), rational(1), rational(0)],
                ],
            })
        }
        (true, false) => Ok(SectorDescriptor::HalfSpace {
            p: p_val.clone(),
            ends: [
                vec![rational(0), p_val, rational(1)],
                vec![rational(1), rational(0), rational(0)],
            ],
        }),
        (false, false) => {
            let b = b.expect("nonzero");
            Ok(SectorDescriptor::EdgeCone {
                b,
                ends: [
                    vec![rational(1), rational(0), rational(0)],
                    vec![rational(i64::from(b)), rational(1), rational(0)],
                ],
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
