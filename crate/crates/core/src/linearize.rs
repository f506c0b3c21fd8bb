//! Linearization of finite groups of tame automorphisms by exact averaging.
//!
//! A finite group whose elements all fix the monomial valuation at a sorted
//! weight `α` sits inside the semidirect stabilizer `M_α ⋊ L_α`.  Averaging
//! the twisted representatives `l_g⁻¹ ∘ g` over the group produces a single
//! conjugator `h ∈ M_α` with `h ∘ g ∘ h⁻¹ = l_g` for every element — the
//! whole group becomes linear in one exact computation, provided the field
//! characteristic does not divide the group order.

use std::collections::BTreeMap;

use crate::admissible_geometry::FixedRegion;
use crate::error::{Error, Result};
use crate::field_poly::{Field, Polynomial};
use crate::stabilizer::{decompose_stabilizer, in_m_alpha};
use crate::tame_group::{Generator, TameWord};
use crate::valuation_space::{fixed_inequalities, ProjWeight, Weight};

/// Largest element count accepted when closing a generating set.
pub const GROUP_CLOSURE_LIMIT: usize = 4096;

/// Deepest coordinate bound scanned for a rational sample of a fixed region.
const SAMPLE_COORDINATE_BOUND: u64 = 16;

/// A finite group of tame automorphisms with exact closure certificates:
/// the element list contains the identity and is closed under composition
/// and inverse, all verified on expanded components.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    elements: Vec<TameWord>,
    n: usize,
    field: Field,
}

fn component_key(word: &TameWord, cap: u32) -> Result<String> {
    Ok(word
        .components(cap)?
        .iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join(";"))
}

impl FiniteGroup {
    /// Accept an explicit element list after verifying the group axioms
    /// exactly: duplicates are removed, the identity must be present, and
    /// every product and inverse must land back in the list.
    pub fn from_elements(elements: Vec<TameWord>, cap: u32) -> Result<FiniteGroup> {
        let Some(first) = elements.first() else {
            return Err(Error::NotAGroup("the element list is empty".to_string()));
        };
        let n = first.n_vars();
        let field = first.field();
        let mut keys: BTreeMap<String, usize> = BTreeMap::new();
        let mut unique: Vec<TameWord> = Vec::new();
        for g in &elements {
            if g.n_vars() != n {
                return Err(Error::DimensionMismatch(g.n_vars(), n));
            }
            if g.field() != field {
                return Err(Error::FieldMismatch(g.field(), field));
            }
            let key = component_key(g, cap)?;
            if !keys.contains_key(&key) {
                keys.insert(key, unique.len());
                unique.push(g.clone());
            }
        }
        let identity = TameWord::identity(n, field);
        if !keys.contains_key(&component_key(&identity, cap)?) {
            return Err(Error::NotAGroup(
                "the element list does not contain the identity".to_string(),
            ));
        }
        for g in &unique {
            let inverse_key = component_key(&g.invert()?, cap)?;
            if !keys.contains_key(&inverse_key) {
                return Err(Error::NotAGroup(format!(
                    "the list is not closed under inverse: missing the inverse of [{}]",
                    component_key(g, cap)?
                )));
            }
            for h in &unique {
                let product_key = component_key(&g.compose(h)?, cap)?;
                if !keys.contains_key(&product_key) {
                    return Err(Error::NotAGroup(format!(
                        "the list is not closed under composition: missing [{product_key}]"
                    )));
                }
            }
        }
        let group = FiniteGroup { elements: unique, n, field };
        group.check_characteristic()?;
        Ok(group)
    }

    /// Close a generating set under composition, up to `bound` elements.
    pub fn from_generators(generators: &[TameWord], bound: usize, cap: u32) -> Result<FiniteGroup> {
        let Some(first) = generators.first() else {
            return Err(Error::NotAGroup("the generator list is empty".to_string()));
        };
        let n = first.n_vars();
        let field = first.field();
        let bound = bound.min(GROUP_CLOSURE_LIMIT);
        let identity = TameWord::identity(n, field);
        let mut elements = vec![identity];
        let mut keys: BTreeMap<String, usize> = BTreeMap::new();
        keys.insert(component_key(&elements[0], cap)?, 0);
        let mut frontier: Vec<TameWord> = Vec::new();
        for g in generators {
            if g.n_vars() != n {
                return Err(Error::DimensionMismatch(g.n_vars(), n));
            }
            if g.field() != field {
                return Err(Error::FieldMismatch(g.field(), field));
            }
            let key = component_key(g, cap)?;
            if !keys.contains_key(&key) {
                keys.insert(key, elements.len());
                elements.push(g.clone());
                frontier.push(g.clone());
            }
        }
        while let Some(g) = frontier.pop() {
            for h in elements.clone() {
                for product in [g.compose(&h)?, h.compose(&g)?] {
                    let key = component_key(&product, cap)?;
                    if !keys.contains_key(&key) {
                        if elements.len() >= bound {
                            return Err(Error::SearchBudgetExceeded(format!(
                                "group closure exceeds {bound} elements"
                            )));
                        }
                        keys.insert(key, elements.len());
                        elements.push(product.clone());
                        frontier.push(product);
                    }
                }
            }
        }
        let group = FiniteGroup { elements, n, field };
        group.check_characteristic()?;
        Ok(group)
    }

    fn check_characteristic(&self) -> Result<()> {
        let p = self.field.characteristic();
        if p != 0 && self.elements.len() % (p as usize) == 0 {
            return Err(Error::CharacteristicDividesOrder {
                p,
                order: self.elements.len(),
            });
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[TameWord] {
        &self.elements
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> Field {
        self.field
    }
}

/// Intersection of the fixed half-space systems of every group element,
/// restricted to sorted weights, with a deterministic rational sample when
/// the integer scan finds one.
pub fn common_fixed_region(
    group: &FiniteGroup,
    cap: u32,
) -> Result<(FixedRegion, Option<ProjWeight>)> {
    let mut region = FixedRegion::everything(group.n_vars());
    for g in group.elements() {
        region = region.intersect(&fixed_inequalities(g, cap)?)?;
    }
    region.restrict_to_sorted()?;
    let sample = region
        .sample(SAMPLE_COORDINATE_BOUND)
        .map(|w| ProjWeight::new(&w));
    Ok((region, sample))
}

/// The outcome of linearizing a finite group at a common fixed weight: the
/// conjugator and the linear images of the elements, in element order.
#[derive(Clone, Debug)]
pub struct Linearization {
    conjugator: TameWord,
    linearized: Vec<TameWord>,
}

impl Linearization {
    /// The averaging conjugator `h ∈ M_α`.
    pub fn conjugator(&self) -> &TameWord {
        &self.conjugator
    }

    /// The linear words `h ∘ g ∘ h⁻¹`, aligned with the group's elements.
    pub fn linearized(&self) -> &[TameWord] {
        &self.linearized
    }
}

/// Conjugate the whole group into its linear part at the sorted weight
/// `alpha`: decompose each element as `g = m_g ∘ l_g`, average the twisted
/// representatives `h = (1/|G|) Σ_g l_g⁻¹ ∘ g` componentwise, and verify
/// exactly that `h ∈ M_α` and `h ∘ g ∘ h⁻¹ = l_g` for every element.
pub fn linearize_at(group: &FiniteGroup, alpha: &Weight, cap: u32) -> Result<Linearization> {
    group.check_characteristic()?;
    if group.n_vars() != alpha.n() {
        return Err(Error::DimensionMismatch(group.n_vars(), alpha.n()));
    }
    let field = group.field();
    let n = group.n_vars();

    // Every element must stabilize the valuation at alpha; the exact
    // factorization g = m_g ∘ l_g certifies it.
    let mut linear_words = Vec::with_capacity(group.order());
    for g in group.elements() {
        let decomposition = decompose_stabilizer(g, alpha, cap)?;
        linear_words.push(decomposition.l_word()?);
    }

    // Componentwise average of the twisted representatives l_g⁻¹ ∘ g.
    let weight_of = |count: usize| -> Result<_> {
        field.integer(count as i64).inv()
    };
    let scale = weight_of(group.order())?;
    let mut sums: Vec<Polynomial> = (0..n).map(|_| Polynomial::zero(n, field)).collect();
    for (g, l_word) in group.elements().iter().zip(&linear_words) {
        let twisted = l_word.invert()?.compose(g)?;
        for (sum, comp) in sums.iter_mut().zip(twisted.components(cap)?) {
            *sum = sum.add(comp)?;
        }
    }
    let h_components: Vec<Polynomial> = sums
        .iter()
        .map(|p| p.scale(&scale))
        .collect::<Result<_>>()?;

    // Express the average as a word of elementary shears, applied from the
    // smallest weight upward so each component reads its raw later-block
    // variables.
    let mut order: Vec<usize> = (1..=n).collect();
    order.sort_by(|&i, &j| {
        alpha
            .coord(i)
            .cmp(alpha.coord(j))
            .then(i.cmp(&j))
    });
    let mut gens = Vec::new();
    for &i in &order {
        let offset = h_components[i - 1].sub(&Polynomial::variable(n, i, field)?)?;
        if !offset.is_zero() {
            gens.push(Generator::elementary(i, offset)?);
        }
    }
    let h = if gens.is_empty() {
        TameWord::identity(n, field)
    } else {
        TameWord::new(n, field, gens)?
    };
    if h.components(cap)? != h_components.as_slice() {
        return Err(Error::precondition(
            "the averaged map does not factor into later-block shears",
        ));
    }
    if !in_m_alpha(&h, alpha, cap)? {
        return Err(Error::precondition(
            "the averaged conjugator does not lie in M_alpha",
        ));
    }

    // Exact verification of the intertwining on every element.
    let h_inverse = h.invert()?;
    let mut linearized = Vec::with_capacity(group.order());
    for (g, l_word) in group.elements().iter().zip(&linear_words) {
        let conjugate = h.compose(g)?.compose(&h_inverse)?;
        if !conjugate.same_map(l_word, cap)? {
            return Err(Error::precondition(
                "averaging failed to linearize an element exactly",
            ));
        }
        linearized.push(l_word.clone());
    }
    Ok(Linearization { conjugator: h, linearized })
}

/// Whether every expanded component of the word has total degree at most
/// one.
pub fn verify_linear(f: &TameWord, cap: u32) -> Result<bool> {
    Ok(f
        .components(cap)?
        .iter()
        .all(|p| p.total_degree().map_or(true, |d| d <= 1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_poly::Monomial;
    use crate::valuation_space::ValuationPoint;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    const CAP: u32 = 512;

    fn weight(coords: &[i64]) -> Weight {
        Weight::from_integers(coords).unwrap()
    }

    fn word(src: &str, n: usize, field: Field) -> TameWord {
        TameWord::parse(src, n, field).unwrap()
    }

    fn involution_by(shear: &str, field: Field) -> TameWord {
        // (-x1 + shear, x2, x3) as one affine flip after one shear.
        let src = format!("aff [[-1,0,0],[0,1,0],[0,0,1]] [0,0,0]\nelem 1 \"{shear}\"");
        word(&src, 3, field)
    }

    #[test]
    fn group_axioms_are_verified() {
        let field = Field::Rational;
        let g = involution_by("-2*x2^2", field);
        // {id, g} is a group: g² = id because the shear flips sign with x1.
        let id = TameWord::identity(3, field);
        assert!(g.compose(&g).unwrap().same_map(&id, CAP).unwrap());
        let group = FiniteGroup::from_elements(vec![id.clone(), g.clone()], CAP).unwrap();
        assert_eq!(group.order(), 2);

        // Dropping the identity fails, as does an unclosed list.
        assert!(matches!(
            FiniteGroup::from_elements(vec![g.clone()], CAP),
            Err(Error::NotAGroup(_))
        ));
        let rotation = word("aff [[0,-1,0],[1,0,0],[0,0,1]] [0,0,0]", 3, field);
        assert!(matches!(
            FiniteGroup::from_elements(vec![id, rotation.clone()], CAP),
            Err(Error::NotAGroup(_))
        ));

        // Closure from generators finds the full cyclic group of order 4.
        let closed = FiniteGroup::from_generators(&[rotation], 64, CAP).unwrap();
        assert_eq!(closed.order(), 4);

        // Closure budget is enforced.
        let shift = word("aff [[1,0,0],[0,1,0],[0,0,1]] [1,0,0]", 3, field);
        assert!(matches!(
            FiniteGroup::from_generators(&[shift], 16, CAP),
            Err(Error::SearchBudgetExceeded(_))
        ));
    }

    #[test]
    fn even_order_is_rejected_in_characteristic_two() {
        let field = Field::prime(2).unwrap();
        let id = TameWord::identity(3, field);
        let swap = word("perm [2,1,3]", 3, field);
        let err = FiniteGroup::from_elements(vec![id, swap], CAP).unwrap_err();
        assert!(matches!(
            err,
            Error::CharacteristicDividesOrder { p: 2, order: 2 }
        ));
    }

    #[test]
    fn fixed_region_examples() {
        let field = Field::Rational;
        let id = TameWord::identity(3, field);

        // One quadratic shear pins the half-space a1 >= 2*a2; the integer
        // scan lands on (2,1,1).
        let g = involution_by("-2*x2^2", field);
        let group = FiniteGroup::from_elements(vec![id.clone(), g], CAP).unwrap();
        let (region, sample) = common_fixed_region(&group, CAP).unwrap();
        assert!(region
            .inequalities()
            .iter()
            .any(|ineq| ineq.equation_string() == "a1 = 2*a2"));
        assert_eq!(sample.unwrap().weight(), &weight(&[2, 1, 1]));
        assert!(region.contains(&weight(&[2, 1, 1])).unwrap());
        assert!(!region.contains(&weight(&[3, 2, 1])).unwrap());

        // A linear group fixes the barycentric weight.
        let rotation = word("aff [[0,-1,0],[1,0,0],[0,0,1]] [0,0,0]", 3, field);
        let linear_group = FiniteGroup::from_generators(&[rotation], 8, CAP).unwrap();
        let (linear_region, linear_sample) = common_fixed_region(&linear_group, CAP).unwrap();
        assert!(linear_region.contains(&weight(&[1, 1, 1])).unwrap());
        assert_eq!(linear_sample.unwrap().weight(), &weight(&[1, 1, 1]));

        // The trivial group fixes the whole sorted cone and nothing else.
        let trivial = FiniteGroup::from_elements(vec![id], CAP).unwrap();
        let (cone, cone_sample) = common_fixed_region(&trivial, CAP).unwrap();
        assert!(cone.contains(&weight(&[5, 3, 1])).unwrap());
        assert!(!cone.contains(&weight(&[3, 5, 1])).unwrap());
        assert_eq!(cone_sample.unwrap().weight(), &weight(&[1, 1, 1]));
    }

    #[test]
    fn linearizes_quadratic_involutions() {
        let field = Field::Rational;
        let id = TameWord::identity(3, field);
        let alpha = weight(&[2, 1, 1]);

        for (shear, expected_offset) in [("-2*x2^2", "-x2^2"), ("-2*x2*x3", "-x2*x3")] {
            let g = involution_by(shear, field);
            let group = FiniteGroup::from_elements(vec![id.clone(), g.clone()], CAP).unwrap();
            let result = linearize_at(&group, &alpha, CAP).unwrap();
            let h = result.conjugator();

            // The conjugator is the shear by the averaged offset.
            let expected = word(&format!("elem 1 \"{expected_offset}\""), 3, field);
            assert!(h.same_map(&expected, CAP).unwrap());
            assert!(in_m_alpha(h, &alpha, CAP).unwrap());

            // Its conjugate of g is the diagonal flip, exactly.
            let flip = word("aff [[-1,0,0],[0,1,0],[0,0,1]] [0,0,0]", 3, field);
            let conjugated = &result.linearized()[group
                .elements()
                .iter()
                .position(|e| e.same_map(&g, CAP).unwrap())
                .unwrap()];
            assert!(conjugated.same_map(&flip, CAP).unwrap());
            assert!(verify_linear(conjugated, CAP).unwrap());

            // Intertwining without inversion: h ∘ g = l_g ∘ h.
            assert!(h
                .compose(&g)
                .unwrap()
                .same_map(&flip.compose(h).unwrap(), CAP)
                .unwrap());
        }
    }

    #[test]
    fn linearizes_a_cyclic_group_of_order_four() {
        let field = Field::Rational;
        // Rotation of the first two coordinates twisted by a x3^2 shear.
        let g = word(
            "aff [[0,-1,0],[1,0,0],[0,0,1]] [0,0,0]\nelem 2 \"-x3^2\"",
            3,
            field,
        );
        // Components: (-x2 + x3^2, x1, x3); the fourth power is the identity.
        let group = FiniteGroup::from_generators(&[g.clone()], 16, CAP).unwrap();
        assert_eq!(group.order(), 4);
        let alpha = weight(&[2, 2, 1]);
        let result = linearize_at(&group, &alpha, CAP).unwrap();

        // The average over the four twisted representatives has exact
        // rational halves.
        let expected = word("elem 1 \"-1/2*x3^2\"\nelem 2 \"-1/2*x3^2\"", 3, field);
        assert!(result.conjugator().same_map(&expected, CAP).unwrap());

        // Every conjugate is linear, and conjugation preserves the whole
        // multiplication table.
        for linear in result.linearized() {
            assert!(verify_linear(linear, CAP).unwrap());
        }
        let index_of = |w: &TameWord| -> usize {
            group
                .elements()
                .iter()
                .position(|e| e.same_map(w, CAP).unwrap())
                .unwrap()
        };
        for (i, a) in group.elements().iter().enumerate() {
            for (j, b) in group.elements().iter().enumerate() {
                let product = index_of(&a.compose(b).unwrap());
                let conjugated_product = result.linearized()[i]
                    .compose(&result.linearized()[j])
                    .unwrap();
                assert!(conjugated_product
                    .same_map(&result.linearized()[product], CAP)
                    .unwrap());
            }
        }
    }

    #[test]
    fn linear_groups_average_to_the_identity() {
        let field = Field::Rational;
        let rotation = word("aff [[0,-1,0],[1,0,0],[0,0,1]] [0,0,0]", 3, field);
        let group = FiniteGroup::from_generators(&[rotation], 8, CAP).unwrap();
        let result = linearize_at(&group, &weight(&[1, 1, 1]), CAP).unwrap();
        assert!(result
            .conjugator()
            .same_map(&TameWord::identity(3, field), CAP)
            .unwrap());
        for (g, l) in group.elements().iter().zip(result.linearized()) {
            assert!(g.same_map(l, CAP).unwrap());
        }
    }

    #[test]
    fn linearizes_in_odd_characteristic() {
        let field = Field::prime(5).unwrap();
        let id = TameWord::identity(3, field);
        let g = involution_by("-2*x2^2", field);
        let group = FiniteGroup::from_elements(vec![id, g.clone()], CAP).unwrap();
        let alpha = weight(&[2, 1, 1]);
        let result = linearize_at(&group, &alpha, CAP).unwrap();
        // 1/2 = 3 over the five-element field: h = (x1 + 4*x2^2, x2, x3).
        let expected = word("elem 1 \"4*x2^2\"", 3, field);
        assert!(result.conjugator().same_map(&expected, CAP).unwrap());
        for linear in result.linearized() {
            assert!(verify_linear(linear, CAP).unwrap());
        }
    }

    #[test]
    fn rejects_elements_outside_the_stabilizer() {
        let field = Field::Rational;
        let id = TameWord::identity(3, field);
        let g = involution_by("-2*x2^2", field);
        let group = FiniteGroup::from_elements(vec![id, g], CAP).unwrap();
        // At the barycenter the x2^2 monomial breaks the weight inequality.
        assert!(linearize_at(&group, &weight(&[1, 1, 1]), CAP).is_err());
    }

    #[test]
    fn averages_of_shear_families_stay_in_m_alpha() {
        let field = Field::Rational;
        let alpha = weight(&[6, 3, 2]);
        let mut rng = StdRng::seed_from_u64(20_260_816);

        // Admissible offsets per component: monomials on strictly later
        // blocks with weighted degree at most the component weight.
        let admissible: Vec<Vec<Monomial>> = vec![
            // x2^a x3^b with 3a + 2b <= 6, not constant.
            vec![(0u32, 1u32), (0, 2), (0, 3), (1, 0), (1, 1), (2, 0)]
                .into_iter()
                .map(|(a, b)| Monomial::new(vec![0, a, b]))
                .collect(),
            // x3^b with 2b <= 3.
            vec![Monomial::new(vec![0, 0, 1])],
            vec![],
        ];

        for _ in 0..200 {
            let count = rng.gen_range(2..=5usize);
            let members: Vec<TameWord> = (0..count)
                .map(|_| {
                    let mut gens = Vec::new();
                    for (i, monos) in admissible.iter().enumerate() {
                        if monos.is_empty() {
                            continue;
                        }
                        let mut offset = Polynomial::zero(3, field);
                        for mono in monos {
                            let c = rng.gen_range(-3..=3i64);
                            if c != 0 {
                                offset = offset
                                    .add(&Polynomial::term(mono.clone(), field.integer(c)))
                                    .unwrap();
                            }
                        }
                        if !offset.is_zero() {
                            gens.push(Generator::elementary(i + 1, offset).unwrap());
                        }
                    }
                    if gens.is_empty() {
                        TameWord::identity(3, field)
                    } else {
                        TameWord::new(3, field, gens).unwrap()
                    }
                })
                .collect();
            for m in &members {
                assert!(in_m_alpha(m, &alpha, CAP).unwrap());
            }

            // Componentwise mean of the family.
            let scale = field.integer(count as i64).inv().unwrap();
            let mut sums: Vec<Polynomial> =
                (0..3).map(|_| Polynomial::zero(3, field)).collect();
            for m in &members {
                for (sum, comp) in sums.iter_mut().zip(m.components(CAP).unwrap()) {
                    *sum = sum.add(comp).unwrap();
                }
            }
            let mut gens = Vec::new();
            for i in (1..=3usize).rev() {
                let average = sums[i - 1].scale(&scale).unwrap();
                let offset = average
                    .sub(&Polynomial::variable(3, i, field).unwrap())
                    .unwrap();
                if !offset.is_zero() {
                    gens.push(Generator::elementary(i, offset).unwrap());
                }
            }
            let mean = if gens.is_empty() {
                TameWord::identity(3, field)
            } else {
                TameWord::new(3, field, gens).unwrap()
            };
            assert!(in_m_alpha(&mean, &alpha, CAP).unwrap());
        }
    }

    #[test]
    fn linearized_groups_keep_their_common_fixed_point() {
        // After linearization the group fixes the valuation at the same
        // weight through its linear parts alone.
        let field = Field::Rational;
        let id = TameWord::identity(3, field);
        let g = involution_by("-2*x2*x3", field);
        let group = FiniteGroup::from_elements(vec![id, g], CAP).unwrap();
        let alpha = weight(&[2, 1, 1]);
        let result = linearize_at(&group, &alpha, CAP).unwrap();
        let nu = ValuationPoint::new(TameWord::identity(3, field), &alpha).unwrap();
        for linear in result.linearized() {
            let moved = crate::valuation_space::act(linear, &nu).unwrap();
            assert!(crate::valuation_space::points_equal(&moved, &nu, CAP).unwrap());
        }
    }
}
