//! Exact scalars and sparse multivariate polynomial arithmetic.
//!
//! Coefficients live in `ℚ` (arbitrary-precision rationals) or in a prime
//! field `𝔽_p`; every operation is exact. Polynomials are sparse maps from
//! exponent vectors to nonzero coefficients, kept in a canonical graded-lex
//! order so that iteration, printing, and hashing are deterministic.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Fields and scalars
// ---------------------------------------------------------------------------

/// The coefficient field: exact rationals or a prime field.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Field {
    Rational,
    Prime(u64),
}

impl Field {
    /// Constructs `𝔽_p`, rejecting non-primes.
    pub fn prime(p: u64) -> Result<Field> {
        if is_prime(p) {
            Ok(Field::Prime(p))
        } else {
            Err(Error::NotPrime(p))
        }
    }

    /// 0 for `ℚ`, `p` for `𝔽_p`.
    pub fn characteristic(&self) -> u64 {
        match self {
            Field::Rational => 0,
            Field::Prime(p) => *p,
        }
    }

    /// The zero element.
    pub fn zero(&self) -> Scalar {
        match self {
            Field::Rational => Scalar::Rational(BigRational::zero()),
            Field::Prime(p) => Scalar::Prime { p: *p, value: 0 },
        }
    }

    /// The one element.
    pub fn one(&self) -> Scalar {
        match self {
            Field::Rational => Scalar::Rational(BigRational::one()),
            Field::Prime(p) => Scalar::Prime { p: *p, value: 1 % *p },
        }
    }

    /// Embeds a signed integer.
    pub fn integer(&self, value: i64) -> Scalar {
        match self {
            Field::Rational => Scalar::Rational(BigRational::from_integer(BigInt::from(value))),
            Field::Prime(p) => Scalar::Prime {
                p: *p,
                value: value.rem_euclid(*p as i64) as u64,
            },
        }
    }

    /// Embeds a rational `numer/denom`; over `𝔽_p` the denominator must be
    /// invertible.
    pub fn fraction(&self, numer: i64, denom: i64) -> Result<Scalar> {
        if denom == 0 {
            return Err(Error::DivisionByZero);
        }
        self.integer(numer).div(&self.integer(denom))
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rational => write!(f, "Q"),
            Field::Prime(p) => write!(f, "F{p}"),
        }
    }
}

/// Deterministic trial-division primality test; fine for the field sizes the
/// library targets (small prime fields chosen to make stabilizers finite).
fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut d = 3u64;
    while d.checked_mul(d).map_or(false, |sq| sq <= p) {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// An exact field element. Arithmetic between scalars of different fields is
/// rejected, never coerced.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Scalar {
    Rational(BigRational),
    Prime { p: u64, value: u64 },
}

impl Scalar {
    /// The field this scalar belongs to.
    pub fn field(&self) -> Field {
        match self {
            Scalar::Rational(_) => Field::Rational,
            Scalar::Prime { p, .. } => Field::Prime(*p),
        }
    }

    /// Wraps an exact rational.
    pub fn from_rational(q: BigRational) -> Scalar {
        Scalar::Rational(q)
    }

    /// The underlying rational, when over `ℚ`.
    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Rational(q) => Some(q),
            Scalar::Prime { .. } => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(q) => q.is_zero(),
            Scalar::Prime { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rational(q) => q.is_one(),
            Scalar::Prime { p, value } => *value == 1 % *p,
        }
    }

    fn check_same_field(&self, other: &Scalar) -> Result<()> {
        let (a, b) = (self.field(), other.field());
        if a == b {
            Ok(())
        } else {
            Err(Error::FieldMismatch(a, b))
        }
    }

    pub fn add(&self, other: &Scalar) -> Result<Scalar> {
        self.check_same_field(other)?;
        Ok(match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a + b),
            (Scalar::Prime { p, value: a }, Scalar::Prime { value: b, .. }) => Scalar::Prime {
                p: *p,
                value: ((*a as u128 + *b as u128) % *p as u128) as u64,
            },
            _ => unreachable!("field equality checked above"),
        })
    }

    pub fn sub(&self, other: &Scalar) -> Result<Scalar> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rational(a) => Scalar::Rational(-a),
            Scalar::Prime { p, value } => Scalar::Prime {
                p: *p,
                value: if *value == 0 { 0 } else { p - value },
            },
        }
    }

    pub fn mul(&self, other: &Scalar) -> Result<Scalar> {
        self.check_same_field(other)?;
        Ok(match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a * b),
            (Scalar::Prime { p, value: a }, Scalar::Prime { value: b, .. }) => Scalar::Prime {
                p: *p,
                value: ((*a as u128 * *b as u128) % *p as u128) as u64,
            },
            _ => unreachable!("field equality checked above"),
        })
    }

    /// Multiplicative inverse; errors on zero.
    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(match self {
            Scalar::Rational(a) => Scalar::Rational(a.recip()),
            Scalar::Prime { p, value } => Scalar::Prime {
                p: *p,
                value: mod_inverse(*value, *p).ok_or(Error::NotInvertible)?,
            },
        })
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar> {
        self.mul(&other.inv()?)
    }

    /// Non-negative integer power.
    pub fn pow(&self, exp: u32) -> Scalar {
        match self {
            Scalar::Rational(a) => Scalar::Rational(a.pow(exp as i32)),
            Scalar::Prime { p, value } => {
                let mut acc = 1u128;
                let mut base = *value as u128 % *p as u128;
                let mut e = exp;
                while e > 0 {
                    if e & 1 == 1 {
                        acc = acc * base % *p as u128;
                    }
                    base = base * base % *p as u128;
                    e >>= 1;
                }
                Scalar::Prime {
                    p: *p,
                    value: acc as u64,
                }
            }
        }
    }
}

/// Inverse of `a` modulo prime `p` by the extended Euclidean algorithm.
fn mod_inverse(a: u64, p: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128, p as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(p as i128) as u64)
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(q) => {
                if q.denom().is_one() {
                    write!(f, "{}", q.numer())
                } else {
                    write!(f, "{}/{}", q.numer(), q.denom())
                }
            }
            Scalar::Prime { value, .. } => write!(f, "{value}"),
        }
    }
}

// ---------------------------------------------------------------------------
// Monomials
// ---------------------------------------------------------------------------

/// An exponent vector of fixed length `n`. Ordered by graded lexicographic
/// comparison (total degree first), which fixes the canonical term order used
/// everywhere for iteration and printing.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Monomial {
        Monomial { exps }
    }

    /// The constant monomial `1` in `n` variables.
    pub fn one(n: usize) -> Monomial {
        Monomial { exps: vec![0; n] }
    }

    /// The monomial `x_i` (1-based index).
    pub fn variable(n: usize, i: usize) -> Result<Monomial> {
        if i == 0 || i > n {
            return Err(Error::VariableOutOfRange(i, n));
        }
        let mut exps = vec![0; n];
        exps[i - 1] = 1;
        Ok(Monomial { exps })
    }

    pub fn n_vars(&self) -> usize {
        self.exps.len()
    }

    /// Exponent of `x_i` (1-based index).
    pub fn exponent(&self, i: usize) -> u32 {
        self.exps[i - 1]
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn total_degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    /// Product (exponent-wise sum).
    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.exps.len(), other.exps.len());
        Monomial {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_constant() {
            return write!(f, "1");
        }
        let mut first = true;
        for (idx, &e) in self.exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "x{}", idx + 1)?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Polynomials
// ---------------------------------------------------------------------------

/// A sparse multivariate polynomial with exact coefficients.
///
/// Invariants: no stored zero coefficients (zero is the empty map), all
/// monomials have length `n`, all coefficients lie in `field`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Polynomial {
    n: usize,
    field: Field,
    terms: BTreeMap<Monomial, Scalar>,
}

impl Polynomial {
    /// The zero polynomial.
    pub fn zero(n: usize, field: Field) -> Polynomial {
        Polynomial {
            n,
            field,
            terms: BTreeMap::new(),
        }
    }

    /// A constant polynomial.
    pub fn constant(n: usize, value: Scalar) -> Polynomial {
        let mut poly = Polynomial::zero(n, value.field());
        if !value.is_zero() {
            poly.terms.insert(Monomial::one(n), value);
        }
        poly
    }

    /// The variable `x_i` (1-based).
    pub fn variable(n: usize, i: usize, field: Field) -> Result<Polynomial> {
        let mut poly = Polynomial::zero(n, field);
        poly.terms.insert(Monomial::variable(n, i)?, field.one());
        Ok(poly)
    }

    /// A single term `coef · monomial`.
    pub fn term(monomial: Monomial, coef: Scalar) -> Polynomial {
        let mut poly = Polynomial::zero(monomial.n_vars(), coef.field());
        if !coef.is_zero() {
            poly.terms.insert(monomial, coef);
        }
        poly
    }

    /// Builds a polynomial from `(monomial, coefficient)` pairs, merging
    /// duplicates and dropping zeros.
    pub fn from_terms(
        n: usize,
        field: Field,
        terms: impl IntoIterator<Item = (Monomial, Scalar)>,
    ) -> Result<Polynomial> {
        let mut poly = Polynomial::zero(n, field);
        for (monomial, coef) in terms {
            if monomial.n_vars() != n {
                return Err(Error::DimensionMismatch(monomial.n_vars(), n));
            }
            if coef.field() != field {
                return Err(Error::FieldMismatch(coef.field(), field));
            }
            poly.add_term_in_place(monomial, coef)?;
        }
        Ok(poly)
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_constant)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::total_degree).max()
    }

    /// The monomials with nonzero coefficient, in ascending canonical order.
    pub fn support(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.keys()
    }

    /// `(monomial, coefficient)` pairs in ascending canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    /// The coefficient of `monomial` (zero if absent).
    pub fn coefficient(&self, monomial: &Monomial) -> Scalar {
        self.terms
            .get(monomial)
            .cloned()
            .unwrap_or_else(|| self.field.zero())
    }

    /// The constant term.
    pub fn constant_term(&self) -> Scalar {
        self.coefficient(&Monomial::one(self.n))
    }

    /// The coefficient of the linear monomial `x_j` (1-based).
    pub fn linear_coefficient(&self, j: usize) -> Result<Scalar> {
        Ok(self.coefficient(&Monomial::variable(self.n, j)?))
    }

    /// True when `x_i` appears in no monomial of `self`.
    pub fn is_independent_of(&self, i: usize) -> bool {
        self.terms.keys().all(|m| m.exponent(i) == 0)
    }

    fn check_compatible(&self, other: &Polynomial) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field, other.field));
        }
        Ok(())
    }

    fn add_term_in_place(&mut self, monomial: Monomial, coef: Scalar) -> Result<()> {
        if coef.is_zero() {
            return Ok(());
        }
        match self.terms.remove(&monomial) {
            None => {
                self.terms.insert(monomial, coef);
            }
            Some(existing) => {
                let sum = existing.add(&coef)?;
                if !sum.is_zero() {
                    self.terms.insert(monomial, sum);
                }
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term_in_place(m.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial {
            n: self.n,
            field: self.field,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_compatible(other)?;
        let mut out = Polynomial::zero(self.n, self.field);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term_in_place(ma.mul(mb), ca.mul(cb)?)?;
            }
        }
        Ok(out)
    }

    /// Multiplies by a scalar.
    pub fn scale(&self, s: &Scalar) -> Result<Polynomial> {
        if s.field() != self.field {
            return Err(Error::FieldMismatch(s.field(), self.field));
        }
        if s.is_zero() {
            return Ok(Polynomial::zero(self.n, self.field));
        }
        let mut out = Polynomial::zero(self.n, self.field);
        for (m, c) in &self.terms {
            out.add_term_in_place(m.clone(), c.mul(s)?)?;
        }
        Ok(out)
    }

    /// `self^exp` by repeated squaring, guarded by the degree cap.
    pub fn pow(&self, exp: u32, cap: u32) -> Result<Polynomial> {
        if let Some(d) = self.total_degree() {
            let needed = d.saturating_mul(exp);
            if needed > cap {
                return Err(Error::DegreeCapExceeded { cap, needed });
            }
        }
        let mut acc = Polynomial::constant(self.n, self.field.one());
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Pullback `P(g₁,…,gₙ)`, expanded exactly.
    ///
    /// The degree of every intermediate product is bounded before it is
    /// formed: a term `c·x^e` contributes at most `Σ eᵢ·deg(gᵢ)`, and the call
    /// fails with [`Error::DegreeCapExceeded`] when any term would exceed
    /// `cap`.
    pub fn substitute(&self, g: &[Polynomial], cap: u32) -> Result<Polynomial> {
        if g.len() != self.n {
            return Err(Error::DimensionMismatch(g.len(), self.n));
        }
        for gi in g {
            self.check_compatible(gi)?;
        }
        let degrees: Vec<u32> = g.iter().map(|gi| gi.total_degree().unwrap_or(0)).collect();
        for m in self.terms.keys() {
            let needed: u32 = m
                .exponents()
                .iter()
                .zip(&degrees)
                .map(|(&e, &d)| e.saturating_mul(d))
                .sum();
            if needed > cap {
                return Err(Error::DegreeCapExceeded { cap, needed });
            }
        }
        // Cache powers gᵢ^k for every exponent k that actually occurs.
        let mut wanted: Vec<std::collections::BTreeSet<u32>> = vec![Default::default(); self.n];
        for m in self.terms.keys() {
            for (idx, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    wanted[idx].insert(e);
                }
            }
        }
        let mut powers: Vec<BTreeMap<u32, Polynomial>> = vec![BTreeMap::new(); self.n];
        for (idx, exps) in wanted.iter().enumerate() {
            let mut k = 0u32;
            let mut acc = Polynomial::constant(self.n, self.field.one());
            for &e in exps {
                while k < e {
                    acc = acc.mul(&g[idx])?;
                    k += 1;
                }
                powers[idx].insert(e, acc.clone());
            }
        }
        let mut out = Polynomial::zero(self.n, self.field);
        for (m, c) in &self.terms {
            let mut term = Polynomial::constant(self.n, c.clone());
            for (idx, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    term = term.mul(&powers[idx][&e])?;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Evaluates at a point given by scalars.
    pub fn eval(&self, point: &[Scalar]) -> Result<Scalar> {
        if point.len() != self.n {
            return Err(Error::DimensionMismatch(point.len(), self.n));
        }
        let mut acc = self.field.zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (idx, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    term = term.mul(&point[idx].pow(e))?;
                }
            }
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    /// Parses the textual grammar: terms joined by `+`/`-`; a term is
    /// `coef*x1^a*x2^b*…` with rational `coef` like `3/4` (omitted
    /// coefficient = 1, omitted exponent = 1). Round-trips with `Display`.
    pub fn parse(src: &str, n: usize, field: Field) -> Result<Polynomial> {
        Parser {
            src,
            bytes: src.as_bytes(),
            pos: 0,
            n,
            field,
        }
        .parse_polynomial()
    }
}

impl fmt::Display for Polynomial {
    /// Canonical form: terms in descending graded-lex order; coefficient `1`
    /// omitted before a non-constant monomial; rationals printed `p/q`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (pos, (m, c)) in self.terms.iter().rev().enumerate() {
            let (sign_neg, magnitude) = match c {
                Scalar::Rational(q) if q.is_negative() => (true, Scalar::Rational(-q)),
                _ => (false, c.clone()),
            };
            if pos == 0 {
                if sign_neg {
                    write!(f, "-")?;
                }
            } else if sign_neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_constant() {
                write!(f, "{magnitude}")?;
            } else if magnitude.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{magnitude}*{m}")?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    n: usize,
    field: Field,
}

impl<'a> Parser<'a> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::parse_at(self.src, self.pos, message)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, byte: u8) -> bool {
        if self.peek() == Some(byte) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse_polynomial(&mut self) -> Result<Polynomial> {
        let mut acc = Polynomial::zero(self.n, self.field);
        self.skip_ws();
        if self.pos == self.bytes.len() {
            return Err(self.error("empty polynomial"));
        }
        let mut negate = false;
        if self.eat(b'-') {
            negate = true;
        } else {
            let _ = self.eat(b'+');
        }
        loop {
            let term = self.parse_term()?;
            acc = acc.add(&if negate { term.neg() } else { term })?;
            self.skip_ws();
            match self.peek() {
                None => break,
                Some(b'+') => {
                    self.pos += 1;
                    negate = false;
                }
                Some(b'-') => {
                    self.pos += 1;
                    negate = true;
                }
                Some(other) => {
                    return Err(self.error(format!(
                        "expected '+', '-', or end of input, found {:?}",
                        other as char
                    )))
                }
            }
        }
        Ok(acc)
    }

    fn parse_term(&mut self) -> Result<Polynomial> {
        self.skip_ws();
        let mut coef = self.field.one();
        let mut monomial = Monomial::one(self.n);
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'x') => {
                    let (i, e) = self.parse_variable_power()?;
                    let mut exps = vec![0u32; self.n];
                    exps[i - 1] = e;
                    monomial = monomial.mul(&Monomial::new(exps));
                }
                Some(c) if c.is_ascii_digit() => {
                    let q = self.parse_rational()?;
                    coef = coef.mul(&q)?;
                }
                _ => return Err(self.error("expected a coefficient or a variable")),
            }
            self.skip_ws();
            if !self.eat(b'*') {
                break;
            }
        }
        Ok(Polynomial::term(monomial, coef))
    }

    fn parse_variable_power(&mut self) -> Result<(usize, u32)> {
        debug_assert_eq!(self.peek(), Some(b'x'));
        self.pos += 1;
        let i = self.parse_usize("variable index")?;
        if i == 0 || i > self.n {
            return Err(self.error(format!("variable x{i} out of range 1..={}", self.n)));
        }
        let e = if self.eat(b'^') {
            let e = self.parse_usize("exponent")?;
            u32::try_from(e).map_err(|_| self.error("exponent too large"))?
        } else {
            1
        };
        Ok((i, e))
    }

    fn parse_usize(&mut self, what: &str) -> Result<usize> {
        let start = self.pos;
        while self.peek().map_or(false, |c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error(format!("expected {what}")));
        }
        self.src[start..self.pos]
            .parse()
            .map_err(|_| self.error(format!("{what} too large")))
    }

    fn parse_rational(&mut self) -> Result<Scalar> {
        let numer = self.parse_usize("integer")? as i64;
        if self.eat(b'/') {
            let denom = self.parse_usize("denominator")? as i64;
            if denom == 0 {
                return Err(self.error("zero denominator"));
            }
            self.field
                .fraction(numer, denom)
                .map_err(|e| self.error(e.to_string()))
        } else {
            Ok(self.field.integer(numer))
        }
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
