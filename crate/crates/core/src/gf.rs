//! Arithmetic in GF(q) for any prime power q ≤ 2^16.
//!
//! Elements are stored as integers in `[0, q)`. For extension fields
//! GF(p^m) the integer is the polynomial-basis coordinate vector written in
//! base p, so digit i is the coefficient of x^i.
//!
//! ```text
//! GF(8), reduction x^3 + x + 1
//!   2 = x,  4 = x^2,  3 = x + 1   and   2 * 4 = x^3 = x + 1 = 3
//! ```

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Largest supported field order.
pub const MAX_ORDER: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("field order {0} is larger than the supported maximum 65536")]
    Unsupported(u64),
    #[error("value {value} is not an element of GF({q})")]
    FieldMismatch { value: u32, q: u32 },
    #[error("division by zero")]
    DivisionByZero,
}

/// A field element. Only meaningful together with the [`Field`] it came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FieldElement(u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    /// Canonical integer representative.
    #[inline]
    pub const fn value(self) -> u32 {
        self.0
    }

    #[inline]
    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Wraps a raw value without range checking. Callers must guarantee
    /// `value < q` for the field the element is used with.
    #[cfg(test)]
    pub(crate) const fn from_raw(value: u32) -> Self {
        FieldElement(value)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug)]
struct LogTables {
    /// exp[i] = g^i for i in [0, 2(q-1)), doubled so log sums need no reduction.
    exp: Vec<u32>,
    /// log[a] for a != 0; log[0] is unused.
    log: Vec<u32>,
}

#[derive(Debug)]
struct Inner {
    q: u32,
    p: u32,
    m: u32,
    /// Low-to-high coefficients of the monic reduction polynomial, leading 1
    /// included. Empty for prime fields.
    reduction_poly: Vec<u32>,
    tables: Option<LogTables>,
}

/// Arithmetic context for GF(q). Cheap to clone and immutable.
#[derive(Clone)]
pub struct Field(Arc<Inner>);

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("q", &self.0.q)
            .field("p", &self.0.p)
            .field("m", &self.0.m)
            .field("reduction_poly", &self.0.reduction_poly)
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.q == other.0.q && self.0.reduction_poly == other.0.reduction_poly)
    }
}

impl Eq for Field {}

/// Returns `Some((p, m))` when `q = p^m` with p prime.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q {
        if q.is_multiple_of(p) {
            break;
        }
        p += 1;
    }
    if !q.is_multiple_of(p) {
        // q itself is prime
        return Some((q, 1));
    }
    let mut rest = q;
    let mut m = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        m += 1;
    }
    (rest == 1).then_some((p, m))
}

impl Field {
    /// Builds GF(q). For q = p^m with m > 1 the reduction polynomial is the
    /// smallest monic irreducible of degree m, ordering candidates by the
    /// base-p integer formed from their non-leading coefficients.
    pub fn new(q: u64) -> Result<Field, FieldError> {
        if q > MAX_ORDER {
            return Err(FieldError::Unsupported(q));
        }
        let (p, m) = prime_power(q).ok_or(FieldError::NotPrimePower(q))?;
        let (p, q) = (p as u32, q as u32);
        if m == 1 {
            return Ok(Field(Arc::new(Inner {
                q,
                p,
                m,
                reduction_poly: Vec::new(),
                tables: None,
            })));
        }
        let reduction_poly = least_irreducible(p, m);
        let mut inner = Inner {
            q,
            p,
            m,
            reduction_poly,
            tables: None,
        };
        inner.tables = Some(build_tables(&inner));
        Ok(Field(Arc::new(inner)))
    }

    #[inline]
    pub fn order(&self) -> u32 {
        self.0.q
    }

    #[inline]
    pub fn characteristic(&self) -> u32 {
        self.0.p
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.0.m
    }

    /// Monic reduction polynomial, low-to-high, or empty for prime fields.
    pub fn reduction_poly(&self) -> &[u32] {
        &self.0.reduction_poly
    }

    /// Range-checked element constructor.
    pub fn element(&self, value: u32) -> Result<FieldElement, FieldError> {
        if value < self.0.q {
            Ok(FieldElement(value))
        } else {
            Err(FieldError::FieldMismatch { value, q: self.0.q })
        }
    }

    /// Maps an arbitrary integer to the element with representative `value mod q`.
    pub fn element_wrapping(&self, value: u64) -> FieldElement {
        FieldElement((value % self.0.q as u64) as u32)
    }

    #[inline]
    pub fn contains(&self, a: FieldElement) -> bool {
        a.0 < self.0.q
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.0.q).map(FieldElement)
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement::ZERO
    }

    pub fn one(&self) -> FieldElement {
        FieldElement::ONE
    }

    /// The additive inverse of one.
    pub fn minus_one(&self) -> FieldElement {
        self.neg(FieldElement::ONE)
    }

    /// `(-1)^e`.
    pub fn sign(&self, exponent: usize) -> FieldElement {
        if exponent.is_multiple_of(2) {
            FieldElement::ONE
        } else {
            self.minus_one()
        }
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let Inner { q, p, m, .. } = *self.0;
        if p == 2 {
            return FieldElement(a.0 ^ b.0);
        }
        if m == 1 {
            let s = a.0 + b.0;
            return FieldElement(if s >= q { s - q } else { s });
        }
        let (mut x, mut y, mut out, mut scale) = (a.0, b.0, 0, 1);
        for _ in 0..m {
            out += ((x % p + y % p) % p) * scale;
            x /= p;
            y /= p;
            scale *= p;
        }
        FieldElement(out)
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        let Inner { p, m, .. } = *self.0;
        if p == 2 {
            return a;
        }
        if m == 1 {
            return FieldElement(if a.0 == 0 { 0 } else { p - a.0 });
        }
        let (mut x, mut out, mut scale) = (a.0, 0, 1);
        for _ in 0..m {
            out += ((p - x % p) % p) * scale;
            x /= p;
            scale *= p;
        }
        FieldElement(out)
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 == 0 || b.0 == 0 {
            return FieldElement::ZERO;
        }
        match &self.0.tables {
            None => FieldElement(((a.0 as u64 * b.0 as u64) % self.0.p as u64) as u32),
            Some(t) => FieldElement(t.exp[(t.log[a.0 as usize] + t.log[b.0 as usize]) as usize]),
        }
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        if a.0 == 0 {
            return Err(FieldError::DivisionByZero);
        }
        Ok(match &self.0.tables {
            None => FieldElement(mod_inverse(a.0, self.0.p)),
            Some(t) => {
                let order = self.0.q - 1;
                FieldElement(t.exp[((order - t.log[a.0 as usize]) % order) as usize])
            }
        })
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: FieldElement, mut e: u64) -> FieldElement {
        let mut base = a;
        let mut acc = FieldElement::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Checked variants reject values outside `[0, q)`, which is how an
    /// element from a different (larger) field shows up.
    pub fn try_add(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add(a, b))
    }

    pub fn try_sub(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.sub(a, b))
    }

    pub fn try_mul(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul(a, b))
    }

    pub fn try_neg(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        self.check(a)?;
        Ok(self.neg(a))
    }

    pub fn try_inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        self.check(a)?;
        self.inv(a)
    }

    fn check(&self, a: FieldElement) -> Result<(), FieldError> {
        self.element(a.0).map(|_| ())
    }

    /// `dst[i] += coef * src[i]`.
    pub fn axpy(&self, dst: &mut [FieldElement], coef: FieldElement, src: &[FieldElement]) {
        debug_assert_eq!(dst.len(), src.len());
        if coef.is_zero() {
            return;
        }
        if coef == FieldElement::ONE {
            for (d, s) in dst.iter_mut().zip(src) {
                *d = self.add(*d, *s);
            }
        } else {
            for (d, s) in dst.iter_mut().zip(src) {
                *d = self.add(*d, self.mul(coef, *s));
            }
        }
    }

    /// Dot product of two equal-length vectors.
    pub fn dot(&self, a: &[FieldElement], b: &[FieldElement]) -> FieldElement {
        a.iter().zip(b).fold(FieldElement::ZERO, |acc, (x, y)| {
            self.add(acc, self.mul(*x, *y))
        })
    }

    /// Polynomial-basis product reduced by the field's reduction polynomial,
    /// computed without the log tables. Prime fields fall back to `mul`.
    pub fn mul_by_polynomial(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if self.0.m == 1 {
            return self.mul(a, b);
        }
        FieldElement(poly_mulmod(&self.0, a.0, b.0))
    }
}

fn mod_inverse(a: u32, p: u32) -> u32 {
    let (mut r0, mut r1) = (p as i64, a as i64);
    let (mut s0, mut s1) = (0i64, 1i64);
    while r1 != 0 {
        let quot = r0 / r1;
        (r0, r1) = (r1, r0 - quot * r1);
        (s0, s1) = (s1, s0 - quot * s1);
    }
    s0.rem_euclid(p as i64) as u32
}

fn digits(mut v: u32, p: u32, m: u32) -> Vec<u32> {
    let mut out = vec![0; m as usize];
    for d in out.iter_mut() {
        *d = v % p;
        v /= p;
    }
    out
}

fn undigits(d: &[u32], p: u32) -> u32 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

fn poly_mulmod(f: &Inner, a: u32, b: u32) -> u32 {
    let (p, m) = (f.p, f.m as usize);
    let (da, db) = (digits(a, p, f.m), digits(b, p, f.m));
    let mut prod = vec![0u32; 2 * m - 1];
    for (i, &x) in da.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in db.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    // reduce using x^m = -(c_{m-1} x^{m-1} + ... + c_0)
    for deg in (m..prod.len()).rev() {
        let lead = prod[deg];
        if lead == 0 {
            continue;
        }
        prod[deg] = 0;
        for (i, &c) in f.reduction_poly[..m].iter().enumerate() {
            let idx = deg - m + i;
            prod[idx] = (prod[idx] + (p - (lead * c) % p)) % p;
        }
    }
    undigits(&prod[..m], p)
}

/// Remainder of `num` modulo monic `den`, both low-to-high over GF(p).
fn poly_rem(num: &[u32], den: &[u32], p: u32) -> Vec<u32> {
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    while r.len() > dd {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dd;
        if lead != 0 {
            for (i, &c) in den.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p - (lead * c) % p) % p;
            }
        }
        r.pop();
    }
    r
}

/// Exhaustive factor test: no monic divisor of degree 1..=deg/2.
pub(crate) fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let deg = poly.len() - 1;
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for code in 0..count {
            let mut cand = digits(code as u32, p, d as u32);
            cand.push(1);
            if poly_rem(poly, &cand, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn least_irreducible(p: u32, m: u32) -> Vec<u32> {
    let count = p.pow(m);
    for code in 0..count {
        let mut poly = digits(code, p, m);
        poly.push(1);
        if is_irreducible(&poly, p) {
            return poly;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists over GF(p)")
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn build_tables(f: &Inner) -> LogTables {
    let q = f.q;
    let order = q - 1;
    let factors = prime_factors(order);
    let pow = |mut base: u32, mut e: u32| {
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = poly_mulmod(f, acc, base);
            }
            base = poly_mulmod(f, base, base);
            e >>= 1;
        }
        acc
    };
    let generator = (2..q)
        .find(|&g| factors.iter().all(|&r| pow(g, order / r) != 1))
        .unwrap_or(1); // only q = 2 has no candidate, and that is a prime field
    let mut exp = vec![0u32; 2 * order as usize];
    let mut log = vec![0u32; q as usize];
    let mut x = 1;
    for i in 0..order {
        exp[i as usize] = x;
        log[x as usize] = i;
        x = poly_mulmod(f, x, generator);
    }
    for i in order..2 * order {
        exp[i as usize] = exp[(i - order) as usize];
    }
    LogTables { exp, log }
}
