//! Exact arithmetic for edge weights and matching counts.
//!
//! Weights live in the polynomial ring Z[x1, x2, ...]: arbitrary-precision
//! integer coefficients, finitely many named variables. [`RingElement`] is a
//! sparse canonical representation (no zero coefficients, no zero exponents),
//! so structural equality is ring equality. [`RingMatrix`] carries labelled
//! rows and columns and knows how to take exact determinants by fraction-free
//! elimination, over plain integers when every entry is constant and over the
//! polynomial ring otherwise.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("{dividend} is not divisible by {divisor}")]
    NotDivisible { dividend: String, divisor: String },
    #[error("variable {0} has no binding")]
    UnboundVariable(String),
    #[error("matrix is {rows}x{cols}, determinant needs a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

/// A power product of variables, e.g. `a^2*b`. The constant monomial is empty.
///
/// Exponents are strictly positive; a variable with exponent zero is removed.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct Monomial(BTreeMap<String, u32>);

impl Monomial {
    pub fn unit() -> Self {
        Monomial(BTreeMap::new())
    }

    pub fn var(name: &str) -> Self {
        let mut m = BTreeMap::new();
        m.insert(name.to_string(), 1);
        Monomial(m)
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = self.0.clone();
        for (v, e) in &other.0 {
            *out.entry(v.clone()).or_insert(0) += e;
        }
        Monomial(out)
    }

    /// Exact monomial quotient, `None` when some exponent would go negative.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = self.0.clone();
        for (v, e) in &other.0 {
            let slot = out.get_mut(v)?;
            if *slot < *e {
                return None;
            }
            *slot -= e;
            if *slot == 0 {
                out.remove(v);
            }
        }
        Some(Monomial(out))
    }

    pub fn vars(&self) -> impl Iterator<Item = (&str, u32)> {
        self.0.iter().map(|(v, e)| (v.as_str(), *e))
    }
}

impl Ord for Monomial {
    /// Lexicographic by variable name: compare exponents of the
    /// alphabetically first variable where the two monomials differ,
    /// higher exponent first. Total, multiplicative, unit-minimal.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let mut a = self.0.iter().peekable();
        let mut b = other.0.iter().peekable();
        loop {
            match (a.peek(), b.peek()) {
                (None, None) => return std::cmp::Ordering::Equal,
                (None, Some(_)) => return std::cmp::Ordering::Less,
                (Some(_), None) => return std::cmp::Ordering::Greater,
                (Some((va, ea)), Some((vb, eb))) => {
                    if va == vb {
                        if ea != eb {
                            return ea.cmp(eb);
                        }
                        a.next();
                        b.next();
                    } else if va < vb {
                        // self has a power of an earlier variable
                        return std::cmp::Ordering::Greater;
                    } else {
                        return std::cmp::Ordering::Less;
                    }
                }
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// An element of Z[x1, x2, ...] in canonical sparse form.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct RingElement {
    // invariant: no zero coefficients
    terms: BTreeMap<Monomial, BigInt>,
}

impl RingElement {
    pub fn zero() -> Self {
        RingElement::default()
    }

    pub fn one() -> Self {
        RingElement::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        RingElement::from_bigint(BigInt::from(n))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        let mut terms = BTreeMap::new();
        if !n.is_zero() {
            terms.insert(Monomial::unit(), n);
        }
        RingElement { terms }
    }

    pub fn var(name: &str) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::var(name), BigInt::one());
        RingElement { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_integer().map(|n| n.is_one()).unwrap_or(false)
    }

    /// `Some(n)` when the element is the constant `n` (including zero).
    pub fn as_integer(&self) -> Option<BigInt> {
        match self.terms.len() {
            0 => Some(BigInt::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_unit().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_integer().is_some()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Greatest term in the monomial order, `None` for zero.
    pub fn leading_term(&self) -> Option<(&Monomial, &BigInt)> {
        self.terms.iter().next_back()
    }

    pub fn add(&self, other: &RingElement) -> RingElement {
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            let slot = terms.entry(m.clone()).or_insert_with(BigInt::zero);
            *slot += c;
            if slot.is_zero() {
                terms.remove(m);
            }
        }
        RingElement { terms }
    }

    pub fn neg(&self) -> RingElement {
        RingElement {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &RingElement) -> RingElement {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RingElement) -> RingElement {
        let mut terms: BTreeMap<Monomial, BigInt> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                let slot = terms.entry(m).or_insert_with(BigInt::zero);
                *slot += ca * cb;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        RingElement { terms }
    }

    pub fn scale(&self, k: &BigInt) -> RingElement {
        if k.is_zero() {
            return RingElement::zero();
        }
        RingElement {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    /// Exact quotient `self / divisor` in the polynomial ring.
    ///
    /// The quotient is unique when it exists (the ring is an integral
    /// domain); when it does not, the division fails rather than rounding.
    pub fn exact_div(&self, divisor: &RingElement) -> Result<RingElement, RingError> {
        if divisor.is_zero() {
            return Err(RingError::DivisionByZero);
        }
        let not_div = || RingError::NotDivisible {
            dividend: self.to_string(),
            divisor: divisor.to_string(),
        };
        let (dm, dc) = divisor.leading_term().unwrap();
        let mut rem = self.clone();
        let mut quot = RingElement::zero();
        while let Some((rm, rc)) = rem.leading_term() {
            // each step strips the leading term of a genuine multiple, so
            // failure here certifies the dividend is not a multiple
            let m = rm.div(dm).ok_or_else(not_div)?;
            let (q, r) = num_integer::div_rem(rc.clone(), dc.clone());
            if !r.is_zero() {
                return Err(not_div());
            }
            let mut t = BTreeMap::new();
            t.insert(m, q);
            let t = RingElement { terms: t };
            rem = rem.sub(&t.mul(divisor));
            quot = quot.add(&t);
        }
        Ok(quot)
    }

    /// Substitute an integer for every variable.
    pub fn evaluate(&self, env: &BTreeMap<String, BigInt>) -> Result<BigInt, RingError> {
        let mut total = BigInt::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (name, exp) in m.vars() {
                let x = env
                    .get(name)
                    .ok_or_else(|| RingError::UnboundVariable(name.to_string()))?;
                v *= x.pow(exp);
            }
            total += v;
        }
        Ok(total)
    }

    /// Substitute 1 for every variable: the sum of coefficients.
    pub fn evaluate_all_ones(&self) -> BigInt {
        self.terms.values().sum()
    }

    pub fn variables(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for m in self.terms.keys() {
            for (v, _) in m.vars() {
                if !out.iter().any(|o| o == v) {
                    out.push(v.to_string());
                }
            }
        }
        out.sort();
        out
    }
}

// ---------------------------------------------------------------------------
// text form
// ---------------------------------------------------------------------------

impl fmt::Display for RingElement {
    /// Canonical text form, e.g. `3*a^2*b - c + 4`. Terms in descending
    /// monomial order; unit coefficients of nonconstant terms are omitted.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let abs = c.abs();
            let mut wrote_coeff = false;
            if !abs.is_one() || m.is_unit() {
                write!(f, "{}", abs)?;
                wrote_coeff = true;
            }
            for (v, e) in m.vars() {
                if wrote_coeff {
                    write!(f, "*")?;
                }
                wrote_coeff = true;
                if e == 1 {
                    write!(f, "{}", v)?;
                } else {
                    write!(f, "{}^{}", v, e)?;
                }
            }
        }
        Ok(())
    }
}

impl FromStr for RingElement {
    type Err = RingError;

    fn from_str(s: &str) -> Result<Self, RingError> {
        Parser { s: s.as_bytes(), pos: 0 }.parse()
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: &str) -> Result<T, RingError> {
        Err(RingError::Parse { pos: self.pos, msg: msg.to_string() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn parse(&mut self) -> Result<RingElement, RingError> {
        let mut acc = RingElement::zero();
        self.skip_ws();
        if self.peek().is_none() {
            return self.err("empty input");
        }
        let mut sign = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -1
            }
            Some(b'+') => {
                self.pos += 1;
                1
            }
            _ => 1,
        };
        loop {
            let term = self.parse_term(sign)?;
            acc = acc.add(&term);
            self.skip_ws();
            match self.peek() {
                None => return Ok(acc),
                Some(b'+') => {
                    self.pos += 1;
                    sign = 1;
                }
                Some(b'-') => {
                    self.pos += 1;
                    sign = -1;
                }
                Some(_) => return self.err("expected '+' or '-' between terms"),
            }
        }
    }

    fn parse_term(&mut self, sign: i32) -> Result<RingElement, RingError> {
        self.skip_ws();
        let mut coeff: Option<BigInt> = None;
        let mut mono = Monomial::unit();
        let mut saw_factor = false;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(c) if c.is_ascii_digit() => {
                    if coeff.is_some() || saw_factor {
                        return self.err("unexpected number inside term");
                    }
                    coeff = Some(self.parse_uint()?);
                }
                Some(c) if c.is_ascii_alphabetic() => {
                    let name = self.parse_ident()?;
                    let exp = if self.peek() == Some(b'^') {
                        self.pos += 1;
                        let e = self.parse_uint()?;
                        u32::try_from(e).map_err(|_| RingError::Parse {
                            pos: self.pos,
                            msg: "exponent too large".to_string(),
                        })?
                    } else {
                        1
                    };
                    mono = mono.mul(&Monomial(BTreeMap::from([(name, exp)])));
                    saw_factor = true;
                }
                _ => return self.err("expected a coefficient or variable"),
            }
            self.skip_ws();
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                break;
            }
        }
        let c = coeff.unwrap_or_else(BigInt::one) * BigInt::from(sign);
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(mono, c);
        }
        Ok(RingElement { terms })
    }

    fn parse_uint(&mut self) -> Result<BigInt, RingError> {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected digits");
        }
        let digits = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        Ok(BigInt::from_str(digits).unwrap())
    }

    fn parse_ident(&mut self) -> Result<String, RingError> {
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() => self.pos += 1,
            _ => return self.err("expected identifier"),
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(std::str::from_utf8(&self.s[start..self.pos]).unwrap().to_string())
    }
}

// ---------------------------------------------------------------------------
// matrices
// ---------------------------------------------------------------------------

/// A dense matrix over the weight ring with labelled rows and columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingMatrix {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    entries: Vec<RingElement>, // row-major, len = rows * cols
}

impl RingMatrix {
    pub fn zero(row_labels: Vec<String>, col_labels: Vec<String>) -> Self {
        let n = row_labels.len() * col_labels.len();
        RingMatrix {
            row_labels,
            col_labels,
            entries: vec![RingElement::zero(); n],
        }
    }

    pub fn rows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn get(&self, r: usize, c: usize) -> &RingElement {
        &self.entries[r * self.cols() + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: RingElement) {
        let c_total = self.cols();
        self.entries[r * c_total + c] = v;
    }

    /// Exact determinant by fraction-free elimination: plain machine or big
    /// integers when every entry is constant, polynomial arithmetic with
    /// exact divisions otherwise.
    pub fn determinant(&self) -> Result<RingElement, RingError> {
        let n = self.rows();
        if n != self.cols() {
            return Err(RingError::NotSquare { rows: n, cols: self.cols() });
        }
        if n == 0 {
            return Ok(RingElement::one());
        }
        let ints: Option<Vec<BigInt>> =
            self.entries.iter().map(|e| e.as_integer()).collect();
        match ints {
            Some(m) => Ok(RingElement::from_bigint(det_integer(m, n))),
            None => det_bareiss_ring(self.entries.clone(), n),
        }
    }
}

/// Determinant of an integer matrix, trying fixed-width arithmetic before
/// falling back to big integers. Consumes the row-major entries.
fn det_integer(entries: Vec<BigInt>, n: usize) -> BigInt {
    let small: Option<Vec<i128>> = entries.iter().map(|v| i128::try_from(v).ok()).collect();
    if let Some(m) = small {
        if let Some(d) = det_bareiss_i128(m, n) {
            return BigInt::from(d);
        }
    }
    det_bareiss_big(entries, n)
}

/// Fraction-free (Bareiss) elimination over i128. Every division is exact;
/// `None` on overflow.
fn det_bareiss_i128(mut m: Vec<i128>, n: usize) -> Option<i128> {
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if m[k * n + k] == 0 {
            let pivot_row = (k + 1..n).find(|&r| m[r * n + k] != 0)?;
            // a fully zero column means a zero determinant
            for c in 0..n {
                m.swap(k * n + c, pivot_row * n + c);
            }
            sign = -sign;
        }
        let pivot = m[k * n + k];
        for r in k + 1..n {
            for c in k + 1..n {
                let a = pivot.checked_mul(m[r * n + c])?;
                let b = m[r * n + k].checked_mul(m[k * n + c])?;
                m[r * n + c] = a.checked_sub(b)? / prev;
            }
            m[r * n + k] = 0;
        }
        prev = pivot;
    }
    Some(sign * m[(n - 1) * n + (n - 1)])
}

fn det_bareiss_big(mut m: Vec<BigInt>, n: usize) -> BigInt {
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k * n + k].is_zero() {
            let Some(pivot_row) = (k + 1..n).find(|&r| !m[r * n + k].is_zero()) else {
                return BigInt::zero();
            };
            for c in 0..n {
                m.swap(k * n + c, pivot_row * n + c);
            }
            negate = !negate;
        }
        for r in k + 1..n {
            for c in k + 1..n {
                let v = (&m[k * n + k] * &m[r * n + c] - &m[r * n + k] * &m[k * n + c]) / &prev;
                m[r * n + c] = v;
            }
            m[r * n + k] = BigInt::zero();
        }
        prev = m[k * n + k].clone();
    }
    let d = std::mem::take(&mut m[(n - 1) * n + (n - 1)]);
    if negate {
        -d
    } else {
        d
    }
}

/// Fraction-free elimination over the polynomial ring, mirroring
/// [`det_bareiss_big`]. Intermediate entries are minors of the input, so
/// every division by the previous pivot is exact.
fn det_bareiss_ring(mut m: Vec<RingElement>, n: usize) -> Result<RingElement, RingError> {
    let mut negate = false;
    let mut prev = RingElement::one();
    for k in 0..n {
        if m[k * n + k].is_zero() {
            let Some(pivot_row) = (k + 1..n).find(|&r| !m[r * n + k].is_zero()) else {
                return Ok(RingElement::zero());
            };
            for c in 0..n {
                m.swap(k * n + c, pivot_row * n + c);
            }
            negate = !negate;
        }
        for r in k + 1..n {
            for c in k + 1..n {
                let v = m[k * n + k]
                    .mul(&m[r * n + c])
                    .sub(&m[r * n + k].mul(&m[k * n + c]))
                    .exact_div(&prev)?;
                m[r * n + c] = v;
            }
            m[r * n + k] = RingElement::zero();
        }
        prev = m[k * n + k].clone();
    }
    let d = std::mem::take(&mut m[(n - 1) * n + (n - 1)]);
    Ok(if negate { d.neg() } else { d })
}
