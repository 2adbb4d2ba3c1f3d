//! Arithmetic in GF(p^r) backed by full discrete-log tables.
//!
//! Elements are identified by their *label*: the base-p integer whose digits
//! are the polynomial-basis coordinates, constant coefficient least
//! significant. Label 0 is the additive identity and label 1 the
//! multiplicative one. Tables are built once at construction; every later
//! operation is a pure read, so a `FieldCtx` can be shared across threads.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest field order accepted by [`FieldCtx::new`].
pub const MAX_ORDER: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("characteristic {0} is not an odd prime")]
    NonPrimeCharacteristic(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("modulus {coeffs:?} is not a monic polynomial of degree {degree}")]
    BadModulus { coeffs: Vec<i64>, degree: u32 },
    #[error("modulus {0:?} is reducible over the prime field")]
    ReducibleModulus(Vec<u32>),
    #[error("field order {p}^{r} exceeds 2^20")]
    OverflowingOrder { p: u64, r: u32 },
    #[error("discrete logarithm of zero")]
    LogOfZero,
    #[error("division by zero")]
    DivisionByZero,
    #[error("field of order {0} is not a quadratic extension (odd degree over the prime field)")]
    OddDegreeField(u32),
    #[error("{0} is not the order of a proper subfield of GF({1})")]
    NotSubfield(u64, u32),
    #[error("label {0} is not an element of the field of order {1}")]
    LabelOutOfRange(u64, u32),
}

/// Characteristic, degree and defining polynomial of a field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub r: u32,
    /// `r + 1` coefficients, constant term first, reduced into `[0, p)`.
    pub modulus: Vec<u32>,
}

/// An element of some [`FieldCtx`], stored as its label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FieldElement(pub u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn label(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Index of the multiplicative coset `g^value · F_q^*` inside `F_{q^2}^*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CosetIndex(pub u32);

impl fmt::Display for CosetIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Dense univariate polynomials over GF(p), constant term first.
mod poly {
    pub fn trim(a: &mut Vec<u32>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub fn inv_mod(a: u32, p: u32) -> u32 {
        pow_mod_int(a as u64, (p - 2) as u64, p as u64) as u32
    }

    pub fn pow_mod_int(mut b: u64, mut e: u64, m: u64) -> u64 {
        let mut acc = 1 % m;
        b %= m;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % m;
            }
            b = b * b % m;
            e >>= 1;
        }
        acc
    }

    pub fn sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let n = a.len().max(b.len());
        let mut out: Vec<u32> = (0..n)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                (x + p - y) % p
            })
            .collect();
        trim(&mut out);
        out
    }

    pub fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let p = p as u64;
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x as u64 * y as u64) % p;
            }
        }
        let mut out: Vec<u32> = out.into_iter().map(|c| c as u32).collect();
        trim(&mut out);
        out
    }

    /// Remainder of `a` modulo the nonzero polynomial `m`.
    pub fn rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        let mut r = a.to_vec();
        trim(&mut r);
        let dm = m.len() - 1;
        let lead_inv = inv_mod(m[dm], p) as u64;
        while r.len() > dm {
            let shift = r.len() - 1 - dm;
            let factor = r[r.len() - 1] as u64 * lead_inv % p as u64;
            for (i, &c) in m.iter().enumerate() {
                let sub = factor * c as u64 % p as u64;
                r[shift + i] = ((r[shift + i] as u64 + p as u64 - sub) % p as u64) as u32;
            }
            trim(&mut r);
        }
        r
    }

    pub fn gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        while !y.is_empty() {
            let r = rem(&x, &y, p);
            x = y;
            y = r;
        }
        x
    }

    pub fn pow_mod(base: &[u32], mut e: u64, m: &[u32], p: u32) -> Vec<u32> {
        let mut acc = vec![1u32];
        let mut b = rem(base, m, p);
        while e > 0 {
            if e & 1 == 1 {
                acc = rem(&mul(&acc, &b, p), m, p);
            }
            b = rem(&mul(&b, &b, p), m, p);
            e >>= 1;
        }
        acc
    }

    /// Ben-Or test: `f` of degree `r` is irreducible iff it has no factor of
    /// degree `i ≤ r/2`, i.e. `gcd(x^{p^i} - x, f) = 1` for those `i`.
    pub fn is_irreducible(f: &[u32], p: u32) -> bool {
        let r = f.len() - 1;
        if r <= 1 {
            return r == 1;
        }
        let x = vec![0, 1];
        let mut h = x.clone();
        for _ in 0..r / 2 {
            h = pow_mod(&h, p as u64, f, p);
            let g = gcd(&sub(&h, &x, p), f, p);
            if g.len() > 1 {
                return false;
            }
        }
        true
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime divisors of `n`.
pub(crate) fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
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

/// Immutable finite-field context with log/antilog tables.
#[derive(Debug, Clone)]
pub struct FieldCtx {
    spec: FieldSpec,
    order: u32,
    generator: FieldElement,
    log: Vec<u32>,
    exp: Vec<u32>,
}

impl FieldCtx {
    /// Builds GF(p^r). With no modulus, the least monic irreducible (ordered by
    /// the label of its non-leading coefficients) for which `x` is primitive
    /// is chosen. Negative modulus coefficients are reduced mod p.
    pub fn new(p: u64, r: u32, modulus: Option<&[i64]>) -> Result<Self, FieldError> {
        if p == 2 || !is_prime(p) {
            return Err(FieldError::NonPrimeCharacteristic(p));
        }
        if r == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let order = (p as u128).checked_pow(r).filter(|&o| o <= MAX_ORDER as u128);
        let order = match order {
            Some(o) => o as u32,
            None => return Err(FieldError::OverflowingOrder { p, r }),
        };
        let p32 = p as u32;

        let modulus = match modulus {
            Some(coeffs) => {
                if coeffs.len() != r as usize + 1 || coeffs[r as usize].rem_euclid(p as i64) != 1 {
                    return Err(FieldError::BadModulus { coeffs: coeffs.to_vec(), degree: r });
                }
                let reduced: Vec<u32> =
                    coeffs.iter().map(|&c| c.rem_euclid(p as i64) as u32).collect();
                if !poly::is_irreducible(&reduced, p32) {
                    return Err(FieldError::ReducibleModulus(reduced));
                }
                reduced
            }
            None => default_modulus(p32, r, order),
        };

        let spec = FieldSpec { p: p32, r, modulus };
        let x_elem = x_label(&spec);
        let generator = if is_primitive_poly(&spec, order, x_elem) {
            FieldElement(x_elem)
        } else {
            (2..order)
                .find(|&g| is_primitive_poly(&spec, order, g))
                .map(FieldElement)
                .expect("every finite field has a primitive root")
        };

        let mut exp = Vec::with_capacity(order as usize - 1);
        let mut log = vec![u32::MAX; order as usize];
        let mut cur = 1u32;
        for k in 0..order - 1 {
            exp.push(cur);
            log[cur as usize] = k;
            cur = mul_labels(&spec, cur, generator.0);
        }
        debug_assert_eq!(cur, 1);
        Ok(FieldCtx { spec, order, generator, log, exp })
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn p(&self) -> u32 {
        self.spec.p
    }

    /// Degree over the prime field.
    pub fn degree(&self) -> u32 {
        self.spec.r
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn generator(&self) -> FieldElement {
        self.generator
    }

    pub fn element(&self, label: u64) -> Result<FieldElement, FieldError> {
        if label >= self.order as u64 {
            return Err(FieldError::LabelOutOfRange(label, self.order));
        }
        Ok(FieldElement(label as u32))
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.order).map(FieldElement)
    }

    pub fn coords(&self, x: FieldElement) -> Vec<u32> {
        let p = self.spec.p;
        let mut v = x.0;
        (0..self.spec.r)
            .map(|_| {
                let d = v % p;
                v /= p;
                d
            })
            .collect()
    }

    pub fn from_coords(&self, coords: &[u32]) -> FieldElement {
        let p = self.spec.p;
        FieldElement(coords.iter().rev().fold(0, |acc, &c| acc * p + c % p))
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let p = self.spec.p;
        let (mut x, mut y, mut out, mut place) = (a.0, b.0, 0u32, 1u32);
        while x > 0 || y > 0 {
            out += ((x % p + y % p) % p) * place;
            x /= p;
            y /= p;
            place *= p;
        }
        FieldElement(out)
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        let p = self.spec.p;
        let (mut x, mut out, mut place) = (a.0, 0u32, 1u32);
        while x > 0 {
            out += ((p - x % p) % p) * place;
            x /= p;
            place *= p;
        }
        FieldElement(out)
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let p = self.spec.p;
        let (mut x, mut y, mut out, mut place) = (a.0, b.0, 0u32, 1u32);
        while x > 0 || y > 0 {
            out += ((x % p + p - y % p) % p) * place;
            x /= p;
            y /= p;
            place *= p;
        }
        FieldElement(out)
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.is_zero() || b.is_zero() {
            return FieldElement::ZERO;
        }
        let n = self.order as u64 - 1;
        let k = (self.log[a.0 as usize] as u64 + self.log[b.0 as usize] as u64) % n;
        FieldElement(self.exp[k as usize])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let n = self.order - 1;
        let k = (n - self.log[a.0 as usize]) % n;
        Ok(FieldElement(self.exp[k as usize]))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: FieldElement, e: u64) -> FieldElement {
        if e == 0 {
            return FieldElement::ONE;
        }
        if a.is_zero() {
            return FieldElement::ZERO;
        }
        let n = self.order as u64 - 1;
        let k = (self.log[a.0 as usize] as u64 * (e % n)) % n;
        FieldElement(self.exp[k as usize])
    }

    /// `generator^k`, with `k` taken modulo `order - 1`.
    pub fn exp(&self, k: u64) -> FieldElement {
        FieldElement(self.exp[(k % (self.order as u64 - 1)) as usize])
    }

    pub fn dlog(&self, x: FieldElement) -> Result<u32, FieldError> {
        if x.is_zero() {
            return Err(FieldError::LogOfZero);
        }
        Ok(self.log[x.0 as usize])
    }

    /// Integer scalar `n · 1` in the prime field.
    pub fn from_int(&self, n: i64) -> FieldElement {
        FieldElement(n.rem_euclid(self.spec.p as i64) as u32)
    }

    /// `q` such that this field has order `q^2`.
    pub fn base_order(&self) -> Result<u32, FieldError> {
        if self.spec.r % 2 != 0 {
            return Err(FieldError::OddDegreeField(self.order));
        }
        Ok(self.spec.p.pow(self.spec.r / 2))
    }

    /// Elements of the subfield of the given order, in label order.
    pub fn subfield_of_order(&self, sub_order: u64) -> Result<Vec<FieldElement>, FieldError> {
        let p = self.spec.p as u64;
        let r = self.spec.r;
        let s = (1..=r).find(|&s| p.pow(s) == sub_order);
        let s = match s {
            Some(s) if r % s == 0 => s,
            _ => return Err(FieldError::NotSubfield(sub_order, self.order)),
        };
        let step = (self.order as u64 - 1) / (p.pow(s) - 1);
        let mut out: Vec<FieldElement> = std::iter::once(FieldElement::ZERO)
            .chain((0..p.pow(s) - 1).map(|k| self.exp(k * step)))
            .collect();
        out.sort();
        Ok(out)
    }

    /// The subfield `F_q` of `F_{q^2}`, in label order.
    pub fn subfield_elements(&self) -> Result<Vec<FieldElement>, FieldError> {
        let q = self.base_order()?;
        self.subfield_of_order(q as u64)
    }

    pub fn coset_index(&self, x: FieldElement) -> Result<CosetIndex, FieldError> {
        let q = self.base_order()?;
        Ok(CosetIndex(self.dlog(x)? % (q + 1)))
    }

    /// Writes `x` as `g^k` (or `0`), where `g` is the generator.
    pub fn power_form(&self, x: FieldElement) -> String {
        match self.dlog(x) {
            Err(_) => "0".to_string(),
            Ok(0) => "1".to_string(),
            Ok(1) => "g".to_string(),
            Ok(k) => format!("g^{k}"),
        }
    }
}

/// Label of the residue class of `x` modulo the defining polynomial.
fn x_label(spec: &FieldSpec) -> u32 {
    if spec.r >= 2 {
        spec.p
    } else {
        (spec.p - spec.modulus[0]) % spec.p
    }
}

fn label_to_poly(spec: &FieldSpec, mut label: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(spec.r as usize);
    while label > 0 {
        out.push(label % spec.p);
        label /= spec.p;
    }
    out
}

fn poly_to_label(spec: &FieldSpec, coeffs: &[u32]) -> u32 {
    coeffs.iter().rev().fold(0, |acc, &c| acc * spec.p + c)
}

fn mul_labels(spec: &FieldSpec, a: u32, b: u32) -> u32 {
    let prod = poly::mul(&label_to_poly(spec, a), &label_to_poly(spec, b), spec.p);
    poly_to_label(spec, &poly::rem(&prod, &spec.modulus, spec.p))
}

fn is_primitive_poly(spec: &FieldSpec, order: u32, g: u32) -> bool {
    if g == 0 {
        return false;
    }
    let n = order as u64 - 1;
    let base = label_to_poly(spec, g);
    prime_divisors(n).into_iter().all(|l| {
        let h = poly::pow_mod(&base, n / l, &spec.modulus, spec.p);
        h != [1]
    }) && poly::pow_mod(&base, n, &spec.modulus, spec.p) == [1]
}

fn default_modulus(p: u32, r: u32, order: u32) -> Vec<u32> {
    for tail in 0..order {
        let mut coeffs: Vec<u32> = (0..r).map(|i| tail / p.pow(i) % p).collect();
        coeffs.push(1);
        if r >= 2 && coeffs[0] == 0 {
            continue;
        }
        if !poly::is_irreducible(&coeffs, p) {
            continue;
        }
        let spec = FieldSpec { p, r, modulus: coeffs.clone() };
        if is_primitive_poly(&spec, order, x_label(&spec)) {
            return coeffs;
        }
    }
    unreachable!("the minimal polynomial of a primitive element always qualifies")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf81() -> FieldCtx {
        FieldCtx::new(3, 4, Some(&[-1, 0, 0, -1, 1])).unwrap()
    }

    #[test]
    fn gf81_with_pinned_modulus_has_x_primitive() {
        let f = gf81();
        assert_eq!(f.order(), 81);
        assert_eq!(f.spec().modulus, vec![2, 0, 0, 2, 1]);
        assert_eq!(f.generator(), FieldElement(3));
        let a = f.generator();
        // a^4 - a^3 - 1 = 0
        let lhs = f.sub(f.sub(f.pow(a, 4), f.pow(a, 3)), FieldElement::ONE);
        assert!(lhs.is_zero());
        assert!((1..80).all(|k| f.pow(a, k) != FieldElement::ONE));
        assert_eq!(f.pow(a, 80), FieldElement::ONE);
    }

    #[test]
    fn gf3_generator_is_two() {
        let f = FieldCtx::new(3, 1, None).unwrap();
        assert_eq!(f.order(), 3);
        assert_eq!(f.generator(), FieldElement(2));
    }

    #[test]
    fn gf25_generator_half_power_is_minus_one() {
        let f = FieldCtx::new(5, 2, None).unwrap();
        let g = f.generator();
        assert_eq!(f.pow(g, 24), FieldElement::ONE);
        assert_eq!(f.pow(g, 12), f.neg(FieldElement::ONE));
    }

    #[test]
    fn dlog_examples() {
        let f = gf81();
        assert_eq!(f.dlog(FieldElement::ONE).unwrap(), 0);
        assert_eq!(f.dlog(f.generator()).unwrap(), 1);
        assert_eq!(f.dlog(f.neg(FieldElement::ONE)).unwrap(), 40);
        assert_eq!(f.dlog(FieldElement::ZERO), Err(FieldError::LogOfZero));
    }

    #[test]
    fn construction_errors() {
        assert_eq!(FieldCtx::new(9, 1, None).unwrap_err(), FieldError::NonPrimeCharacteristic(9));
        assert_eq!(FieldCtx::new(2, 3, None).unwrap_err(), FieldError::NonPrimeCharacteristic(2));
        assert!(matches!(
            FieldCtx::new(3, 13, None).unwrap_err(),
            FieldError::OverflowingOrder { .. }
        ));
        // x^2 + 2 = (x+1)(x+2) over GF(3)
        assert!(matches!(
            FieldCtx::new(3, 2, Some(&[2, 0, 1])).unwrap_err(),
            FieldError::ReducibleModulus(_)
        ));
        assert!(matches!(
            FieldCtx::new(3, 2, Some(&[1, 1])).unwrap_err(),
            FieldError::BadModulus { .. }
        ));
    }

    #[test]
    fn non_primitive_x_falls_back_to_least_primitive_label() {
        // x^2 + 1 over GF(3): x has order 4, not 8.
        let f = FieldCtx::new(3, 2, Some(&[1, 0, 1])).unwrap();
        let g = f.generator();
        assert_ne!(g, FieldElement(3));
        assert!((1..8).all(|k| f.pow(g, k) != FieldElement::ONE));
        for label in 2..g.0 {
            let x = FieldElement(label);
            assert!((1..8).any(|k| f.pow(x, k) == FieldElement::ONE));
        }
    }

    #[test]
    fn subfield_of_gf81_is_frobenius_fixed() {
        let f = gf81();
        let sub = f.subfield_elements().unwrap();
        assert_eq!(sub.len(), 9);
        for x in f.elements() {
            let fixed = f.pow(x, 9) == x;
            assert_eq!(fixed, sub.contains(&x), "element {x}");
        }
    }

    #[test]
    fn prime_subfield_of_gf9() {
        let f = FieldCtx::new(3, 2, None).unwrap();
        let sub = f.subfield_elements().unwrap();
        assert_eq!(sub, vec![FieldElement(0), FieldElement(1), FieldElement(2)]);
        let odd = FieldCtx::new(3, 3, None).unwrap();
        assert_eq!(odd.subfield_elements().unwrap_err(), FieldError::OddDegreeField(27));
    }

    #[test]
    fn coset_indices() {
        let f = gf81();
        assert_eq!(f.coset_index(f.exp(13)).unwrap(), CosetIndex(3));
        let sub = f.subfield_elements().unwrap();
        for &y in sub.iter().skip(1) {
            assert_eq!(f.coset_index(y).unwrap(), CosetIndex(0));
        }
        for x in f.elements().skip(1) {
            let c = f.coset_index(x).unwrap();
            for &s in sub.iter().skip(1) {
                assert_eq!(f.coset_index(f.mul(x, s)).unwrap(), c);
            }
        }
        let mut sizes = [0usize; 10];
        for x in f.elements().skip(1) {
            sizes[f.coset_index(x).unwrap().0 as usize] += 1;
        }
        assert!(sizes.iter().all(|&s| s == 8));
    }

    #[test]
    fn log_tables_round_trip() {
        let f = FieldCtx::new(7, 2, None).unwrap();
        for x in f.elements().skip(1) {
            assert_eq!(f.exp(f.dlog(x).unwrap() as u64), x);
        }
        assert_eq!(f.exp(0), FieldElement::ONE);
    }

    #[test]
    fn coords_round_trip() {
        let f = gf81();
        for x in f.elements() {
            assert_eq!(f.from_coords(&f.coords(x)), x);
        }
    }
}
