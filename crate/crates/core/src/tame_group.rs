//! Tame automorphisms as words in affine, elementary, and permutation
//! generators: composition, inversion, expanded components, differential at
//! the origin, and the Bruhat permutation of an invertible matrix.
//!
//! An automorphism is stored as the word that produced it, never only as its
//! component tuple: the word inverts by reversal, while inverting an
//! arbitrary component tuple would require solving a polynomial system.
//! Components are expanded lazily (the composition of a word can blow up
//! doubly exponentially, so every expansion takes a degree cap) and cached
//! once expansion succeeds.

use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::field_poly::{Field, Monomial, Polynomial, Scalar};

// ---------------------------------------------------------------------------
// Permutation helpers (one-line notation, 1-based)
// ---------------------------------------------------------------------------

/// True when `sigma` lists each of `1..=n` exactly once.
pub fn is_permutation(sigma: &[usize]) -> bool {
    let n = sigma.len();
    let mut seen = vec![false; n];
    for &s in sigma {
        if s == 0 || s > n || seen[s - 1] {
            return false;
        }
        seen[s - 1] = true;
    }
    true
}

/// The inverse permutation: `inv[σ(j) - 1] = j`.
pub fn permutation_inverse(sigma: &[usize]) -> Vec<usize> {
    let mut inv = vec![0usize; sigma.len()];
    for (j, &s) in sigma.iter().enumerate() {
        inv[s - 1] = j + 1;
    }
    inv
}

/// Composition `(a ∘ b)(j) = a(b(j))`.
pub fn compose_permutations(a: &[usize], b: &[usize]) -> Vec<usize> {
    b.iter().map(|&j| a[j - 1]).collect()
}

/// Moves the entry at slot `j` to slot `σ(j)`: `out[σ(j) - 1] = values[j - 1]`.
pub fn apply_permutation<T: Clone>(sigma: &[usize], values: &[T]) -> Vec<T> {
    debug_assert_eq!(sigma.len(), values.len());
    let mut out: Vec<Option<T>> = vec![None; values.len()];
    for (j, &s) in sigma.iter().enumerate() {
        out[s - 1] = Some(values[j].clone());
    }
    out.into_iter().map(Option::unwrap).collect()
}

// ---------------------------------------------------------------------------
// Exact matrix helpers
// ---------------------------------------------------------------------------

/// The n×n identity matrix over `field`.
pub fn identity_matrix(n: usize, field: Field) -> Vec<Vec<Scalar>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { field.one() } else { field.zero() })
                .collect()
        })
        .collect()
}

fn check_square(m: &[Vec<Scalar>]) -> Result<usize> {
    let n = m.len();
    for row in m {
        if row.len() != n {
            return Err(Error::DimensionMismatch(row.len(), n));
        }
    }
    Ok(n)
}

/// Exact matrix product.
pub fn matrix_mul(a: &[Vec<Scalar>], b: &[Vec<Scalar>]) -> Result<Vec<Vec<Scalar>>> {
    let n = check_square(a)?;
    if check_square(b)? != n {
        return Err(Error::DimensionMismatch(b.len(), n));
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let mut acc = a[i][j].field().zero();
            for (k, b_row) in b.iter().enumerate() {
                acc = acc.add(&a[i][k].mul(&b_row[j])?)?;
            }
            row.push(acc);
        }
        out.push(row);
    }
    Ok(out)
}

/// Exact matrix–vector product.
pub fn matrix_vec_mul(a: &[Vec<Scalar>], v: &[Scalar]) -> Result<Vec<Scalar>> {
    let n = check_square(a)?;
    if v.len() != n {
        return Err(Error::DimensionMismatch(v.len(), n));
    }
    let mut out = Vec::with_capacity(n);
    for row in a {
        let mut acc = v[0].field().zero();
        for (k, entry) in row.iter().enumerate() {
            acc = acc.add(&entry.mul(&v[k])?)?;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Exact determinant by fraction-free-enough Gaussian elimination (entries
/// live in a field, so ordinary elimination with exact division is exact).
pub fn matrix_determinant(m: &[Vec<Scalar>]) -> Result<Scalar> {
    let n = check_square(m)?;
    if n == 0 {
        return Err(Error::DimensionMismatch(0, 1));
    }
    let field = m[0][0].field();
    let mut a: Vec<Vec<Scalar>> = m.to_vec();
    let mut det = field.one();
    for col in 0..n {
        let pivot = match (col..n).find(|&r| !a[r][col].is_zero()) {
            Some(r) => r,
            None => return Ok(field.zero()),
        };
        if pivot != col {
            a.swap(pivot, col);
            det = det.neg();
        }
        det = det.mul(&a[col][col])?;
        let inv = a[col][col].inv()?;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].mul(&inv)?;
            for c in col..n {
                let delta = factor.mul(&a[col][c])?;
                a[r][c] = a[r][c].sub(&delta)?;
            }
        }
    }
    Ok(det)
}

/// Exact inverse by Gauss–Jordan elimination.
pub fn matrix_inverse(m: &[Vec<Scalar>]) -> Result<Vec<Vec<Scalar>>> {
    let n = check_square(m)?;
    if n == 0 {
        return Err(Error::DimensionMismatch(0, 1));
    }
    let field = m[0][0].field();
    let mut a: Vec<Vec<Scalar>> = m.to_vec();
    let mut inv = identity_matrix(n, field);
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or(Error::SingularMatrix)?;
        a.swap(pivot, col);
        inv.swap(pivot, col);
        let scale = a[col][col].inv()?;
        for c in 0..n {
            a[col][c] = a[col][c].mul(&scale)?;
            inv[col][c] = inv[col][c].mul(&scale)?;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c in 0..n {
                let da = factor.mul(&a[col][c])?;
                a[r][c] = a[r][c].sub(&da)?;
                let di = factor.mul(&inv[col][c])?;
                inv[r][c] = inv[r][c].sub(&di)?;
            }
        }
    }
    Ok(inv)
}

/// The permutation `σ` with `a ∈ B σ B` for `B` the upper-triangular Borel
/// subgroup, in one-line notation.
///
/// Scan columns left to right; the pivot of column `j` is its lowest nonzero
/// row in the partially reduced matrix, and `σ(j)` is that row. Clearing the
/// pivot row rightward is a right multiplication by an upper-triangular
/// unipotent; clearing the pivot column upward is a left multiplication by
/// one. Both leave the double coset unchanged, and the scan terminates on a
/// monomial matrix whose nonzero pattern is `σ`.
pub fn bruhat_permutation(m: &[Vec<Scalar>]) -> Result<Vec<usize>> {
    let n = check_square(m)?;
    if n == 0 {
        return Err(Error::DimensionMismatch(0, 1));
    }
    let mut a: Vec<Vec<Scalar>> = m.to_vec();
    let mut sigma = vec![0usize; n];
    for j in 0..n {
        let i = (0..n)
            .rev()
            .find(|&r| !a[r][j].is_zero())
            .ok_or(Error::SingularMatrix)?;
        sigma[j] = i + 1;
        let pivot_inv = a[i][j].inv()?;
        // Clear the pivot row to the right (column operations).
        for c in j + 1..n {
            if a[i][c].is_zero() {
                continue;
            }
            let factor = a[i][c].mul(&pivot_inv)?;
            for r in 0..n {
                let delta = factor.mul(&a[r][j])?;
                a[r][c] = a[r][c].sub(&delta)?;
            }
        }
        // Clear the pivot column upward (row operations).
        for r in 0..i {
            if a[r][j].is_zero() {
                continue;
            }
            let factor = a[r][j].mul(&pivot_inv)?;
            for c in 0..n {
                let delta = factor.mul(&a[i][c])?;
                a[r][c] = a[r][c].sub(&delta)?;
            }
        }
    }
    Ok(sigma)
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// One letter of a tame-automorphism word.
#[derive(Clone, Debug)]
pub enum Generator {
    /// `x ↦ Ax + t` with `A` exactly invertible.
    Affine {
        matrix: Vec<Vec<Scalar>>,
        translation: Vec<Scalar>,
    },
    /// `x_i ↦ x_i + P` with `P` independent of `x_i`; other coordinates fixed.
    Elementary { index: usize, poly: Polynomial },
    /// The coordinate permutation whose `i`-th component is `x_{σ⁻¹(i)}`
    /// (as a linear map it sends the `j`-th basis vector to the `σ(j)`-th).
    Permutation { sigma: Vec<usize> },
}

impl Generator {
    /// Validated affine generator; rejects non-square shapes, mixed fields,
    /// and exactly-singular matrices.
    pub fn affine(matrix: Vec<Vec<Scalar>>, translation: Vec<Scalar>) -> Result<Generator> {
        let n = check_square(&matrix)?;
        if translation.len() != n {
            return Err(Error::DimensionMismatch(translation.len(), n));
        }
        if n == 0 {
            return Err(Error::DimensionMismatch(0, 1));
        }
        let field = matrix[0][0].field();
        for entry in matrix.iter().flatten().chain(translation.iter()) {
            if entry.field() != field {
                return Err(Error::FieldMismatch(entry.field(), field));
            }
        }
        if matrix_determinant(&matrix)?.is_zero() {
            return Err(Error::SingularMatrix);
        }
        Ok(Generator::Affine {
            matrix,
            translation,
        })
    }

    /// Validated elementary generator `x_index ↦ x_index + poly`.
    pub fn elementary(index: usize, poly: Polynomial) -> Result<Generator> {
        let n = poly.n_vars();
        if index == 0 || index > n {
            return Err(Error::VariableOutOfRange(index, n));
        }
        if !poly.is_independent_of(index) {
            return Err(Error::ElementaryInvolvesOwnVariable { index });
        }
        Ok(Generator::Elementary { index, poly })
    }

    /// Validated permutation generator.
    pub fn permutation(sigma: Vec<usize>) -> Result<Generator> {
        if !is_permutation(&sigma) {
            let n = sigma.len();
            return Err(Error::NotAPermutation(sigma, n));
        }
        Ok(Generator::Permutation { sigma })
    }

    /// Number of variables this generator acts on.
    pub fn n_vars(&self) -> usize {
        match self {
            Generator::Affine { matrix, .. } => matrix.len(),
            Generator::Elementary { poly, .. } => poly.n_vars(),
            Generator::Permutation { sigma } => sigma.len(),
        }
    }

    /// Coefficient field, when the generator carries one (permutations are
    /// field-agnostic).
    pub fn field(&self) -> Option<Field> {
        match self {
            Generator::Affine { matrix, .. } => Some(matrix[0][0].field()),
            Generator::Elementary { poly, .. } => Some(poly.field()),
            Generator::Permutation { .. } => None,
        }
    }

    /// Expanded components of this single generator.
    pub fn components(&self, field: Field) -> Result<Vec<Polynomial>> {
        let n = self.n_vars();
        match self {
            Generator::Affine {
                matrix,
                translation,
            } => {
                let mut out = Vec::with_capacity(n);
                for i in 0..n {
                    let mut terms = Vec::with_capacity(n + 1);
                    for (j, coef) in matrix[i].iter().enumerate() {
                        terms.push((Monomial::variable(n, j + 1)?, coef.clone()));
                    }
                    terms.push((Monomial::one(n), translation[i].clone()));
                    out.push(Polynomial::from_terms(n, field, terms)?);
                }
                Ok(out)
            }
            Generator::Elementary { index, poly } => {
                let mut out = Vec::with_capacity(n);
                for i in 1..=n {
                    let xi = Polynomial::variable(n, i, field)?;
                    out.push(if i == *index { xi.add(poly)? } else { xi });
                }
                Ok(out)
            }
            Generator::Permutation { sigma } => {
                let inv = permutation_inverse(sigma);
                (1..=n)
                    .map(|i| Polynomial::variable(n, inv[i - 1], field))
                    .collect()
            }
        }
    }

    /// The inverse generator of the same kind.
    pub fn inverse(&self) -> Result<Generator> {
        Ok(match self {
            Generator::Affine {
                matrix,
                translation,
            } => {
                let inv = matrix_inverse(matrix)?;
                let back: Vec<Scalar> = matrix_vec_mul(&inv, translation)?
                    .into_iter()
                    .map(|s| s.neg())
                    .collect();
                Generator::Affine {
                    matrix: inv,
                    translation: back,
                }
            }
            Generator::Elementary { index, poly } => Generator::Elementary {
                index: *index,
                poly: poly.neg(),
            },
            Generator::Permutation { sigma } => Generator::Permutation {
                sigma: permutation_inverse(sigma),
            },
        })
    }
}

impl fmt::Display for Generator {
    /// One line of the word-file format: `aff [[…],[…]] […]`,
    /// `elem i "P"`, or `perm […]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Affine {
                matrix,
                translation,
            } => {
                write!(f, "aff [")?;
                for (i, row) in matrix.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "[")?;
                    for (j, entry) in row.iter().enumerate() {
                        if j > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{entry}")?;
                    }
                    write!(f, "]")?;
                }
                write!(f, "] [")?;
                for (j, entry) in translation.iter().enumerate() {
                    if j > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{entry}")?;
                }
                write!(f, "]")
            }
            Generator::Elementary { index, poly } => write!(f, "elem {index} \"{poly}\""),
            Generator::Permutation { sigma } => {
                write!(f, "perm [")?;
                for (j, s) in sigma.iter().enumerate() {
                    if j > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{s}")?;
                }
                write!(f, "]")
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Words
// ---------------------------------------------------------------------------

/// A tame automorphism spelled as a sequence of generators. The first
/// generator is outermost: the word `[g, h]` is the map `g ∘ h`, whose
/// components are `gᵢ(h₁,…,hₙ)`.
#[derive(Clone, Debug)]
pub struct TameWord {
    n: usize,
    field: Field,
    gens: Vec<Generator>,
    cache: OnceLock<Vec<Polynomial>>,
}

impl TameWord {
    /// A word from validated generators; every generator must act on `n`
    /// variables over `field`.
    pub fn new(n: usize, field: Field, gens: Vec<Generator>) -> Result<TameWord> {
        for g in &gens {
            if g.n_vars() != n {
                return Err(Error::DimensionMismatch(g.n_vars(), n));
            }
            if let Some(gf) = g.field() {
                if gf != field {
                    return Err(Error::FieldMismatch(gf, field));
                }
            }
        }
        Ok(TameWord {
            n,
            field,
            gens,
            cache: OnceLock::new(),
        })
    }

    /// The empty word (identity automorphism).
    pub fn identity(n: usize, field: Field) -> TameWord {
        TameWord {
            n,
            field,
            gens: Vec::new(),
            cache: OnceLock::new(),
        }
    }

    /// The translation `x ↦ x + offset`.
    pub fn translation(field: Field, offset: Vec<Scalar>) -> Result<TameWord> {
        let n = offset.len();
        let gen = Generator::affine(identity_matrix(n, field), offset)?;
        TameWord::new(n, field, vec![gen])
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    /// Expanded components `(f₁,…,fₙ)`.
    ///
    /// The cap bounds the degree of every intermediate substitution; once an
    /// expansion has succeeded the result is cached and returned regardless
    /// of the cap passed later (the polynomials are exact either way).
    pub fn components(&self, cap: u32) -> Result<&[Polynomial]> {
        if self.cache.get().is_none() {
            let expanded = self.expand(cap)?;
            let _ = self.cache.set(expanded);
        }
        Ok(self.cache.get().expect("cache populated above"))
    }

    fn expand(&self, cap: u32) -> Result<Vec<Polynomial>> {
        let mut acc: Vec<Polynomial> = (1..=self.n)
            .map(|i| Polynomial::variable(self.n, i, self.field))
            .collect::<Result<_>>()?;
        for gen in &self.gens {
            let inner = gen.components(self.field)?;
            acc = acc
                .into_iter()
                .map(|p| p.substitute(&inner, cap))
                .collect::<Result<_>>()?;
        }
        Ok(acc)
    }

    /// Word concatenation: `(f ∘ g)ᵢ = fᵢ(g₁,…,gₙ)`.
    pub fn compose(&self, other: &TameWord) -> Result<TameWord> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field, other.field));
        }
        let mut gens = Vec::with_capacity(self.gens.len() + other.gens.len());
        gens.extend(self.gens.iter().cloned());
        gens.extend(other.gens.iter().cloned());
        Ok(TameWord {
            n: self.n,
            field: self.field,
            gens,
            cache: OnceLock::new(),
        })
    }

    /// The inverse word: reversed generators, each inverted.
    pub fn invert(&self) -> Result<TameWord> {
        let gens: Vec<Generator> = self
            .gens
            .iter()
            .rev()
            .map(Generator::inverse)
            .collect::<Result<_>>()?;
        Ok(TameWord {
            n: self.n,
            field: self.field,
            gens,
            cache: OnceLock::new(),
        })
    }

    /// True when the expanded components are exactly `(x₁,…,xₙ)`.
    pub fn is_identity(&self, cap: u32) -> Result<bool> {
        let comps = self.components(cap)?;
        for (i, comp) in comps.iter().enumerate() {
            if *comp != Polynomial::variable(self.n, i + 1, self.field)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// True when both words expand to the same component tuple (equality of
    /// automorphisms, not of spellings).
    pub fn same_map(&self, other: &TameWord, cap: u32) -> Result<bool> {
        if self.n != other.n || self.field != other.field {
            return Ok(false);
        }
        Ok(self.components(cap)? == other.components(cap)?)
    }

    /// The matrix of linear parts of the components; requires every
    /// component to have zero constant term.
    pub fn diff_at_origin(&self, cap: u32) -> Result<Vec<Vec<Scalar>>> {
        let comps = self.components(cap)?;
        let mut rows = Vec::with_capacity(self.n);
        for (i, comp) in comps.iter().enumerate() {
            if !comp.constant_term().is_zero() {
                return Err(Error::NonzeroConstantTerm { component: i + 1 });
            }
            let mut row = Vec::with_capacity(self.n);
            for j in 1..=self.n {
                row.push(comp.linear_coefficient(j)?);
            }
            rows.push(row);
        }
        Ok(rows)
    }

    /// Factors `f = f₀ ∘ t` with `t` the translation sending `f⁻¹(0)` to `0`
    /// and `f₀` fixing the origin; returns `(f₀, t)`.
    pub fn split_translation(&self, cap: u32) -> Result<(TameWord, TameWord)> {
        let inverse = self.invert()?;
        let preimage_of_origin: Vec<Scalar> = inverse
            .components(cap)?
            .iter()
            .map(Polynomial::constant_term)
            .collect();
        let minus: Vec<Scalar> = preimage_of_origin.iter().map(Scalar::neg).collect();
        let t = TameWord::translation(self.field, minus)?;
        let forward = TameWord::translation(self.field, preimage_of_origin)?;
        let f0 = self.compose(&forward)?;
        Ok((f0, t))
    }

    /// Parses the line-oriented word-file format: one generator per line
    /// (`aff [[…],[…]] […]`, `elem i "P"`, `perm […]`), first line
    /// outermost; blank lines and `#` comments are skipped.
    pub fn parse(src: &str, n: usize, field: Field) -> Result<TameWord> {
        let mut gens = Vec::new();
        let mut offset = 0usize;
        for line in src.split('\n') {
            let line_start = offset;
            offset += line.len() + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let gen = parse_generator_line(src, line_start, line, n, field)?;
            gens.push(gen);
        }
        TameWord::new(n, field, gens)
    }
}

impl fmt::Display for TameWord {
    /// The word-file format: one generator per line, first line outermost.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for gen in &self.gens {
            writeln!(f, "{gen}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Word-file parsing
// ---------------------------------------------------------------------------

struct LineCursor<'a> {
    src: &'a str,
    line_start: usize,
    line: &'a str,
    pos: usize,
}

impl<'a> LineCursor<'a> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::parse_at(self.src, self.line_start + self.pos, message)
    }

    fn skip_ws(&mut self) {
        let bytes = self.line.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.line.as_bytes().get(self.pos).copied()
    }

    fn expect(&mut self, byte: u8) -> Result<()> {
        if self.peek() == Some(byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {:?}", byte as char)))
        }
    }

    fn parse_unsigned(&mut self, what: &str) -> Result<u64> {
        self.skip_ws();
        let bytes = self.line.as_bytes();
        let start = self.pos;
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error(format!("expected {what}")));
        }
        self.line[start..self.pos]
            .parse()
            .map_err(|_| self.error(format!("{what} too large")))
    }

    fn parse_scalar(&mut self, field: Field) -> Result<Scalar> {
        self.skip_ws();
        let negative = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let numer = self.parse_unsigned("integer")? as i64;
        let mut value = field.integer(if negative { -numer } else { numer });
        self.skip_ws();
        if self.peek() == Some(b'/') {
            self.pos += 1;
            let denom = self.parse_unsigned("denominator")? as i64;
            value = value
                .div(&field.integer(denom))
                .map_err(|e| self.error(e.to_string()))?;
        }
        Ok(value)
    }

    fn parse_scalar_list(&mut self, field: Field) -> Result<Vec<Scalar>> {
        self.skip_ws();
        self.expect(b'[')?;
        let mut out = Vec::new();
        loop {
            out.push(self.parse_scalar(field)?);
            self.skip_ws();
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b']') => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return Err(self.error("expected ',' or ']'")),
            }
        }
    }

    fn parse_index_list(&mut self) -> Result<Vec<usize>> {
        self.skip_ws();
        self.expect(b'[')?;
        let mut out = Vec::new();
        loop {
            out.push(self.parse_unsigned("index")? as usize);
            self.skip_ws();
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b']') => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return Err(self.error("expected ',' or ']'")),
            }
        }
    }

    fn parse_quoted(&mut self) -> Result<(usize, &'a str)> {
        self.skip_ws();
        self.expect(b'"')?;
        let start = self.pos;
        let bytes = self.line.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos] != b'"' {
            self.pos += 1;
        }
        if self.pos == bytes.len() {
            return Err(self.error("unterminated quote"));
        }
        let content = &self.line[start..self.pos];
        self.pos += 1;
        Ok((start, content))
    }

    fn finish(&mut self) -> Result<()> {
        self.skip_ws();
        if self.pos != self.line.len() {
            return Err(self.error("unexpected trailing input"));
        }
        Ok(())
    }
}

fn parse_generator_line(
    src: &str,
    line_start: usize,
    line: &str,
    n: usize,
    field: Field,
) -> Result<Generator> {
    let mut cur = LineCursor {
        src,
        line_start,
        line,
        pos: 0,
    };
    cur.skip_ws();
    let keyword_start = cur.pos;
    let bytes = line.as_bytes();
    while cur.pos < bytes.len() && bytes[cur.pos].is_ascii_alphabetic() {
        cur.pos += 1;
    }
    let keyword = &line[keyword_start..cur.pos];
    match keyword {
        "aff" => {
            cur.skip_ws();
            cur.expect(b'[')?;
            let mut matrix = Vec::new();
            loop {
                matrix.push(cur.parse_scalar_list(field)?);
                cur.skip_ws();
                match cur.peek() {
                    Some(b',') => cur.pos += 1,
                    Some(b']') => {
                        cur.pos += 1;
                        break;
                    }
                    _ => return Err(cur.error("expected ',' or ']'")),
                }
            }
            let translation = cur.parse_scalar_list(field)?;
            cur.finish()?;
            if matrix.len() != n {
                return Err(cur.error(format!("expected a {n}×{n} matrix, got {}", matrix.len())));
            }
            Generator::affine(matrix, translation)
        }
        "elem" => {
            let index = cur.parse_unsigned("variable index")? as usize;
            let (quote_start, content) = cur.parse_quoted()?;
            cur.finish()?;
            let poly = Polynomial::parse(content, n, field).map_err(|e| match e {
                Error::Parse {
                    column, message, ..
                } => Error::parse_at(src, line_start + quote_start + column - 1, message),
                other => other,
            })?;
            Generator::elementary(index, poly)
        }
        "perm" => {
            let sigma = cur.parse_index_list()?;
            cur.finish()?;
            if sigma.len() != n {
                return Err(cur.error(format!(
                    "expected a permutation of 1..={n}, got {} entries",
                    sigma.len()
                )));
            }
            Generator::permutation(sigma)
        }
        other => Err(Error::parse_at(
            src,
            line_start + keyword_start,
            format!("unknown generator {other:?}; expected aff, elem, or perm"),
        )),
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const CAP: u32 = 4096;

    fn q() -> Field {
        Field::Rational
    }

    fn qi(v: i64) -> Scalar {
        q().integer(v)
    }

    fn poly(src: &str, n: usize) -> Polynomial {
        Polynomial::parse(src, n, q()).unwrap()
    }

    /// The shear `(x₂, x₁ + x₂)` as an affine word.
    fn fibonacci_shear() -> TameWord {
        let gen = Generator::affine(
            vec![vec![qi(0), qi(1)], vec![qi(1), qi(1)]],
            vec![qi(0), qi(0)],
        )
        .unwrap();
        TameWord::new(2, q(), vec![gen]).unwrap()
    }

    fn components_of(word: &TameWord) -> Vec<String> {
        word.components(CAP)
            .unwrap()
            .iter()
            .map(|p| p.to_string())
            .collect()
    }

    #[test]
    fn permutation_helpers_round_trip() {
        let sigma = vec![3, 1, 2];
        assert!(is_permutation(&sigma));
        assert!(!is_permutation(&[1, 1, 3]));
        assert!(!is_permutation(&[0, 1]));
        let inv = permutation_inverse(&sigma);
        assert_eq!(compose_permutations(&sigma, &inv), vec![1, 2, 3]);
        assert_eq!(compose_permutations(&inv, &sigma), vec![1, 2, 3]);
        // Entry at slot j lands at slot σ(j).
        assert_eq!(apply_permutation(&sigma, &["a", "b", "c"]), ["b", "c", "a"]);
    }

    #[test]
    fn compose_of_shear_with_itself() {
        let f = fibonacci_shear();
        let ff = f.compose(&f).unwrap();
        assert_eq!(components_of(&ff), ["x1 + x2", "x1 + 2*x2"]);
    }

    #[test]
    fn word_times_inverse_is_identity() {
        let e1 = Generator::elementary(1, poly("x2^3", 2)).unwrap();
        let e2 = Generator::elementary(2, poly("x1^2 - 1/2", 2)).unwrap();
        let p = Generator::permutation(vec![2, 1]).unwrap();
        let f = TameWord::new(2, q(), vec![e1, p, e2]).unwrap();
        let round = f.compose(&f.invert().unwrap()).unwrap();
        assert!(round.is_identity(CAP).unwrap());
        let round = f.invert().unwrap().compose(&f).unwrap();
        assert!(round.is_identity(CAP).unwrap());
    }

    #[test]
    fn permutation_words_multiply() {
        let sigma = vec![2, 3, 1];
        let tau = vec![2, 1, 3];
        let word = TameWord::new(
            3,
            q(),
            vec![
                Generator::permutation(sigma.clone()).unwrap(),
                Generator::permutation(tau.clone()).unwrap(),
            ],
        )
        .unwrap();
        let product = TameWord::new(
            3,
            q(),
            vec![Generator::permutation(compose_permutations(&sigma, &tau)).unwrap()],
        )
        .unwrap();
        assert!(word.same_map(&product, CAP).unwrap());
    }

    #[test]
    fn permutation_components_use_inverse_indices() {
        // σ = (2,3,1) sends slot j to slot σ(j); component i is x_{σ⁻¹(i)}.
        let word = TameWord::new(
            3,
            q(),
            vec![Generator::permutation(vec![2, 3, 1]).unwrap()],
        )
        .unwrap();
        assert_eq!(components_of(&word), ["x3", "x1", "x2"]);
    }

    #[test]
    fn elementary_inverse_flips_sign() {
        let f = TameWord::new(
            2,
            q(),
            vec![Generator::elementary(1, poly("x2^3", 2)).unwrap()],
        )
        .unwrap();
        assert_eq!(components_of(&f.invert().unwrap()), ["-x2^3 + x1", "x2"]);
    }

    #[test]
    fn affine_inverse_solves_exactly() {
        let f = TameWord::new(
            2,
            q(),
            vec![Generator::affine(vec![vec![qi(2), qi(0)], vec![qi(0), qi(1)]], vec![qi(1), qi(0)]).unwrap()],
        )
        .unwrap();
        assert_eq!(components_of(&f.invert().unwrap()), ["1/2*x1 - 1/2", "x2"]);
        let double = f.invert().unwrap().invert().unwrap();
        assert!(double.same_map(&f, CAP).unwrap());
    }

    #[test]
    fn elementary_rejects_own_variable() {
        assert_eq!(
            Generator::elementary(1, poly("x1*x2", 2)).unwrap_err(),
            Error::ElementaryInvolvesOwnVariable { index: 1 }
        );
    }

    #[test]
    fn affine_rejects_singular_matrix() {
        let err = Generator::affine(
            vec![vec![qi(1), qi(2)], vec![qi(2), qi(4)]],
            vec![qi(0), qi(0)],
        )
        .unwrap_err();
        assert_eq!(err, Error::SingularMatrix);
    }

    #[test]
    fn diff_examples() {
        let shear3 = TameWord::new(
            3,
            q(),
            vec![Generator::elementary(1, poly("x2^2", 3)).unwrap()],
        )
        .unwrap();
        assert_eq!(shear3.diff_at_origin(CAP).unwrap(), identity_matrix(3, q()));

        let f = fibonacci_shear();
        assert_eq!(
            f.diff_at_origin(CAP).unwrap(),
            vec![vec![qi(0), qi(1)], vec![qi(1), qi(1)]]
        );

        let shifted = TameWord::new(
            2,
            q(),
            vec![Generator::elementary(1, poly("x2 + 1", 2)).unwrap()],
        )
        .unwrap();
        assert_eq!(
            shifted.diff_at_origin(CAP).unwrap_err(),
            Error::NonzeroConstantTerm { component: 1 }
        );
    }

    #[test]
    fn diff_is_multiplicative_on_random_words() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..40 {
            let f = random_origin_fixing_word(&mut rng, 3);
            let g = random_origin_fixing_word(&mut rng, 3);
            let lhs = f.compose(&g).unwrap().diff_at_origin(CAP).unwrap();
            let rhs = matrix_mul(
                &f.diff_at_origin(CAP).unwrap(),
                &g.diff_at_origin(CAP).unwrap(),
            )
            .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn bruhat_examples() {
        let upper = vec![vec![qi(2), qi(5)], vec![qi(0), qi(3)]];
        assert_eq!(bruhat_permutation(&upper).unwrap(), vec![1, 2]);

        let shear = vec![vec![qi(0), qi(1)], vec![qi(1), qi(1)]];
        assert_eq!(bruhat_permutation(&shear).unwrap(), vec![2, 1]);

        let antidiag = vec![
            vec![qi(0), qi(0), qi(1)],
            vec![qi(0), qi(1), qi(0)],
            vec![qi(1), qi(0), qi(0)],
        ];
        assert_eq!(bruhat_permutation(&antidiag).unwrap(), vec![3, 2, 1]);

        // A permutation matrix whose j-th column is e_{σ(j)} recovers σ.
        let sigma = vec![2, 3, 1];
        let mut m = vec![vec![qi(0); 3]; 3];
        for (j, &s) in sigma.iter().enumerate() {
            m[s - 1][j] = qi(1);
        }
        assert_eq!(bruhat_permutation(&m).unwrap(), sigma);
    }

    #[test]
    fn bruhat_is_invariant_under_borel_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..60 {
            let a = random_invertible(&mut rng, 3);
            let b1 = random_upper_triangular(&mut rng, 3);
            let b2 = random_upper_triangular(&mut rng, 3);
            let product = matrix_mul(&matrix_mul(&b1, &a).unwrap(), &b2).unwrap();
            assert_eq!(
                bruhat_permutation(&product).unwrap(),
                bruhat_permutation(&a).unwrap()
            );
        }
    }

    #[test]
    fn split_translation_examples() {
        // Pure translation splits as (identity, itself).
        let t = TameWord::translation(q(), vec![qi(3), qi(-2)]).unwrap();
        let (f0, part) = t.split_translation(CAP).unwrap();
        assert!(f0.is_identity(CAP).unwrap());
        assert!(part.same_map(&t, CAP).unwrap());

        // Origin-fixing word splits as (itself, identity).
        let f = fibonacci_shear();
        let (f0, part) = f.split_translation(CAP).unwrap();
        assert!(f0.same_map(&f, CAP).unwrap());
        assert!(part.is_identity(CAP).unwrap());

        // Mixed word: f₀ has zero constants and recomposes to f.
        let mixed = TameWord::new(
            2,
            q(),
            vec![
                Generator::elementary(1, poly("x2^2 + 1", 2)).unwrap(),
                Generator::affine(identity_matrix(2, q()), vec![qi(0), qi(2)]).unwrap(),
            ],
        )
        .unwrap();
        let (f0, part) = mixed.split_translation(CAP).unwrap();
        for comp in f0.components(CAP).unwrap() {
            assert!(comp.constant_term().is_zero());
        }
        let recomposed = f0.compose(&part).unwrap();
        assert!(recomposed.same_map(&mixed, CAP).unwrap());
    }

    #[test]
    fn random_words_invert_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for field in [q(), Field::prime(5).unwrap()] {
            for _ in 0..30 {
                let f = random_word(&mut rng, 2, field);
                let round = f.compose(&f.invert().unwrap()).unwrap();
                assert!(round.is_identity(CAP).unwrap());
            }
        }
    }

    #[test]
    fn word_file_round_trip() {
        let src = "aff [[0,1],[1,1]] [1,-1/2]\nelem 2 \"x1^2 - 3*x1\"\nperm [2,1]\n";
        let word = TameWord::parse(src, 2, q()).unwrap();
        assert_eq!(word.to_string(), src);
        // Printed components survive a parse of the printed word.
        let reparsed = TameWord::parse(&word.to_string(), 2, q()).unwrap();
        assert!(word.same_map(&reparsed, CAP).unwrap());
    }

    #[test]
    fn word_file_skips_comments_and_reports_positions() {
        let src = "# a comment\n\nelem 1 \"x2\"\n";
        let word = TameWord::parse(src, 2, q()).unwrap();
        assert_eq!(word.generators().len(), 1);

        match TameWord::parse("elem 1 \"x1\"", 2, q()) {
            Err(Error::ElementaryInvolvesOwnVariable { index: 1 }) => {}
            other => panic!("expected own-variable rejection, got {other:?}"),
        }
        match TameWord::parse("perm [2,1]\nelem 1 \"x9\"\n", 2, q()) {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("expected parse error on line 2, got {other:?}"),
        }
        match TameWord::parse("spin [1,2]", 2, q()) {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn first_line_is_outermost() {
        // Word g∘h with g the shear, h the swap: components gᵢ(h).
        let src = "elem 1 \"x2^2\"\nperm [2,1]\n";
        let word = TameWord::parse(src, 2, q()).unwrap();
        assert_eq!(components_of(&word), ["x1^2 + x2", "x1"]);
    }

    // --- random generators for property tests ---

    fn random_upper_triangular(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<Scalar>> {
        let mut m = vec![vec![qi(0); n]; n];
        for i in 0..n {
            for j in i..n {
                m[i][j] = if i == j {
                    qi(*[1, -1, 2, 3].get(rng.gen_range(0..4)).unwrap())
                } else {
                    qi(rng.gen_range(-3..=3))
                };
            }
        }
        m
    }

    fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<Scalar>> {
        loop {
            let m: Vec<Vec<Scalar>> = (0..n)
                .map(|_| (0..n).map(|_| qi(rng.gen_range(-3..=3))).collect())
                .collect();
            if !matrix_determinant(&m).unwrap().is_zero() {
                return m;
            }
        }
    }

    fn random_origin_fixing_word(rng: &mut ChaCha8Rng, n: usize) -> TameWord {
        let len = rng.gen_range(1..=4);
        let mut gens = Vec::new();
        for _ in 0..len {
            match rng.gen_range(0..3) {
                0 => {
                    gens.push(
                        Generator::affine(random_invertible(rng, n), vec![qi(0); n]).unwrap(),
                    );
                }
                1 => {
                    let i = rng.gen_range(1..=n);
                    let j = (i % n) + 1;
                    let e = rng.gen_range(1..=2u32);
                    let mono = Polynomial::variable(n, j, q())
                        .unwrap()
                        .pow(e, CAP)
                        .unwrap();
                    gens.push(Generator::elementary(i, mono).unwrap());
                }
                _ => {
                    let mut sigma: Vec<usize> = (1..=n).collect();
                    for k in (1..n).rev() {
                        let swap = rng.gen_range(0..=k);
                        sigma.swap(k, swap);
                    }
                    gens.push(Generator::permutation(sigma).unwrap());
                }
            }
        }
        TameWord::new(n, q(), gens).unwrap()
    }

    fn random_word(rng: &mut ChaCha8Rng, n: usize, field: Field) -> TameWord {
        let len = rng.gen_range(0..=6);
        let mut gens = Vec::new();
        for _ in 0..len {
            match rng.gen_range(0..3) {
                0 => {
                    let m = loop {
                        let m: Vec<Vec<Scalar>> = (0..n)
                            .map(|_| {
                                (0..n)
                                    .map(|_| field.integer(rng.gen_range(-2..=2)))
                                    .collect()
                            })
                            .collect();
                        if !matrix_determinant(&m).unwrap().is_zero() {
                            break m;
                        }
                    };
                    let t: Vec<Scalar> = (0..n)
                        .map(|_| field.integer(rng.gen_range(-2..=2)))
                        .collect();
                    gens.push(Generator::affine(m, t).unwrap());
                }
                1 => {
                    let i = rng.gen_range(1..=n);
                    let j = (i % n) + 1;
                    let e = rng.gen_range(1..=2u32);
                    let c = loop {
                        let c = field.integer(rng.gen_range(-2..=2));
                        if !c.is_zero() {
                            break c;
                        }
                    };
                    let mono = Polynomial::variable(n, j, field)
                        .unwrap()
                        .pow(e, CAP)
                        .unwrap()
                        .scale(&c)
                        .unwrap();
                    gens.push(Generator::elementary(i, mono).unwrap());
                }
                _ => {
                    let mut sigma: Vec<usize> = (1..=n).collect();
                    for k in (1..n).rev() {
                        let swap = rng.gen_range(0..=k);
                        sigma.swap(k, swap);
                    }
                    gens.push(Generator::permutation(sigma).unwrap());
                }
            }
        }
        TameWord::new(n, field, gens).unwrap()
    }
}
