//! Exact arithmetic in the cyclotomic field `Q(z_N) = Q[q]/(Phi_N(q))`.
//!
//! Elements are stored densely in the power basis `1, z, ..., z^(phi(N)-1)` of
//! a fixed primitive root `z = z_N`. Because `Phi_N` is the minimal polynomial
//! of `z_N`, a fully reduced representation is zero exactly when every stored
//! coefficient is zero.
//!
//! The module also hosts the q-combinatorics (q-integers, q-factorials and
//! Gaussian binomials). They are built as integer polynomials first and only
//! then evaluated at a root, so no q-factorial that vanishes at a root of unity
//! is ever inverted.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Largest supported modulus `N`.
pub const MAX_MODULUS: u32 = 24;

/// Dense polynomial with integer coefficients; index `i` holds the
/// coefficient of `q^i`. Trailing zeros are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_i64(&[1])
    }

    /// `c * q^degree`
    pub fn monomial(c: i64, degree: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); degree + 1];
        coeffs[degree] = BigInt::from(c);
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![BigInt::zero(); len];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        IntPoly::new(out)
    }

    pub fn sub(&self, other: &IntPoly) -> IntPoly {
        self.add(&other.scale(&BigInt::from(-1)))
    }

    pub fn scale(&self, c: &BigInt) -> IntPoly {
        IntPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }

    /// Exact division in `Z[q]`; `None` when `divisor` does not divide `self`.
    pub fn div_exact(&self, divisor: &IntPoly) -> Option<IntPoly> {
        let dd = divisor.degree()?;
        let lead = &divisor.coeffs[dd];
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return self.is_zero().then(IntPoly::zero);
        }
        let mut quot = vec![BigInt::zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            if rem[i].is_zero() {
                continue;
            }
            let (c, r) = rem[i].div_rem(lead);
            if !r.is_zero() {
                return None;
            }
            for (j, b) in divisor.coeffs.iter().enumerate() {
                rem[i - dd + j] -= &c * b;
            }
            quot[i - dd] = c;
        }
        rem.iter().all(Zero::is_zero).then(|| IntPoly::new(quot))
    }

    /// Value at the given root of unity, reduced modulo `Phi_N`.
    pub fn evaluate(&self, root: RootExponent) -> CycNum {
        let n = root.modulus();
        let mut folded = vec![BigRational::zero(); n as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            let e = (i as u64 * root.exponent() as u64 % n as u64) as usize;
            folded[e] += BigRational::from_integer(c.clone());
        }
        CycNum::from_reduced_unchecked(n, reduce(n, folded))
    }
}

impl fmt::Display for IntPoly {
    /// Descending powers: `q^2 + q + 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let unit = mag.is_one();
            match (i, unit) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "q")?,
                (1, false) => write!(f, "{mag} q")?,
                (_, true) => write!(f, "q^{i}")?,
                (_, false) => write!(f, "{mag} q^{i}")?,
            }
        }
        Ok(())
    }
}

fn divisors(n: u32) -> Vec<u32> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

/// `Phi_n`, by dividing `q^n - 1` by `Phi_d` for every proper divisor `d`.
pub fn cyclotomic_polynomial(n: u32) -> IntPoly {
    assert!(n >= 1, "cyclotomic polynomials are indexed from 1");
    let mut known: BTreeMap<u32, IntPoly> = BTreeMap::new();
    for d in divisors(n) {
        let mut p = IntPoly::monomial(1, d as usize).sub(&IntPoly::one());
        for e in divisors(d) {
            if e < d {
                p = p
                    .div_exact(&known[&e])
                    .expect("Phi_e divides q^d - 1 for e | d");
            }
        }
        known.insert(d, p);
    }
    known.remove(&n).unwrap()
}

fn phi_table() -> &'static [Vec<BigRational>] {
    static TABLE: OnceLock<Vec<Vec<BigRational>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![Vec::new()];
        for n in 1..=MAX_MODULUS {
            let coeffs = cyclotomic_polynomial(n).coeffs().to_vec();
            t.push(coeffs.into_iter().map(BigRational::from_integer).collect());
        }
        t
    })
}

fn check_modulus(n: u32) -> Result<()> {
    if (1..=MAX_MODULUS).contains(&n) {
        Ok(())
    } else {
        Err(Error::UnsupportedModulus(n))
    }
}

/// Euler totient, i.e. `deg Phi_n`.
pub fn totient(n: u32) -> usize {
    (1..=n).filter(|k| k.gcd(&n) == 1).count()
}

/// Reduce a dense polynomial modulo the monic `Phi_n`.
fn reduce(n: u32, mut v: Vec<BigRational>) -> Vec<BigRational> {
    let phi = &phi_table()[n as usize];
    let d = phi.len() - 1;
    for i in (d..v.len()).rev() {
        if v[i].is_zero() {
            continue;
        }
        let c = std::mem::replace(&mut v[i], BigRational::zero());
        for (j, p) in phi.iter().enumerate().take(d) {
            if !p.is_zero() {
                v[i - d + j] -= &c * p;
            }
        }
    }
    v.resize(d, BigRational::zero());
    v
}

/// Exact element of `Q(z_N)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycNum {
    modulus: u32,
    coeffs: Vec<BigRational>,
}

impl CycNum {
    /// Builds `sum coeffs[i] z^i` for a coefficient vector of any length.
    pub fn new(modulus: u32, coeffs: Vec<BigRational>) -> Result<Self> {
        check_modulus(modulus)?;
        Ok(Self::from_reduced_unchecked(modulus, reduce(modulus, coeffs)))
    }

    fn from_reduced_unchecked(modulus: u32, coeffs: Vec<BigRational>) -> Self {
        CycNum { modulus, coeffs }
    }

    /// Panics for an unsupported modulus; validated entry points are
    /// [`CycNum::new`] and [`RootExponent::new`].
    pub fn zero(modulus: u32) -> Self {
        check_modulus(modulus).expect("unsupported modulus");
        CycNum {
            modulus,
            coeffs: vec![BigRational::zero(); totient(modulus)],
        }
    }

    pub fn one(modulus: u32) -> Self {
        Self::from_integer(modulus, 1)
    }

    pub fn from_integer(modulus: u32, c: i64) -> Self {
        Self::from_rational(modulus, BigRational::from_integer(c.into()))
    }

    pub fn from_rational(modulus: u32, c: BigRational) -> Self {
        let mut z = Self::zero(modulus);
        z.coeffs[0] = c;
        z
    }

    /// `z_N^k`, negative `k` allowed.
    pub fn root_of_unity(modulus: u32, k: i64) -> Self {
        check_modulus(modulus).expect("unsupported modulus");
        let e = k.rem_euclid(modulus as i64) as usize;
        let mut v = vec![BigRational::zero(); e + 1];
        v[e] = BigRational::one();
        CycNum::from_reduced_unchecked(modulus, reduce(modulus, v))
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// Coefficients in the power basis of `z_N`, length `phi(N)`.
    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// The rational value when the element lies in `Q`.
    pub fn as_rational(&self) -> Option<&BigRational> {
        self.coeffs[1..]
            .iter()
            .all(Zero::is_zero)
            .then(|| &self.coeffs[0])
    }

    fn check(&self, other: &CycNum) -> Result<()> {
        if self.modulus == other.modulus {
            Ok(())
        } else {
            Err(Error::ModulusMismatch {
                left: self.modulus,
                right: other.modulus,
            })
        }
    }

    pub fn checked_add(&self, other: &CycNum) -> Result<CycNum> {
        self.check(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(CycNum::from_reduced_unchecked(self.modulus, coeffs))
    }

    pub fn checked_sub(&self, other: &CycNum) -> Result<CycNum> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &CycNum) -> Result<CycNum> {
        self.check(other)?;
        let d = self.coeffs.len();
        let mut out = vec![BigRational::zero(); 2 * d - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Ok(CycNum::from_reduced_unchecked(
            self.modulus,
            reduce(self.modulus, out),
        ))
    }

    pub fn scale(&self, c: &BigRational) -> CycNum {
        CycNum::from_reduced_unchecked(self.modulus, self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Integer power; negative exponents go through the field inverse.
    pub fn pow(&self, e: i64) -> Result<CycNum> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = CycNum::one(self.modulus);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            sq = &sq * &sq;
            e >>= 1;
        }
        Ok(acc)
    }

    /// Field inverse via the extended Euclidean algorithm against `Phi_N`.
    pub fn inverse(&self) -> Result<CycNum> {
        if self.is_zero() {
            return Err(Error::NotInvertible);
        }
        let phi = phi_table()[self.modulus as usize].clone();
        // invariant: s_i * a = r_i (mod phi)
        let (mut r0, mut r1) = (phi, trim(self.coeffs.clone()));
        let (mut s0, mut s1) = (Vec::new(), vec![BigRational::one()]);
        while !r1.is_empty() {
            let (quot, rem) = rat_divrem(&r0, &r1);
            let s2 = rat_sub(&s0, &rat_mul(&quot, &s1));
            r0 = std::mem::replace(&mut r1, rem);
            s0 = std::mem::replace(&mut s1, s2);
        }
        // r0 is a nonzero constant since Phi_N is irreducible
        let c = r0[0].recip();
        let inv: Vec<BigRational> = s0.into_iter().map(|x| x * &c).collect();
        CycNum::new(self.modulus, inv)
    }

    /// Field automorphism `z -> z^m`; `m` must be a unit mod `N`.
    pub fn galois(&self, m: u32) -> Result<CycNum> {
        let n = self.modulus;
        if m.gcd(&n) != 1 {
            return Err(Error::NotAUnit {
                exponent: m,
                modulus: n,
            });
        }
        let mut folded = vec![BigRational::zero(); n as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            let e = (i as u64 * m as u64 % n as u64) as usize;
            folded[e] += c;
        }
        Ok(CycNum::from_reduced_unchecked(n, reduce(n, folded)))
    }

    /// Complex conjugation, `z -> z^(N-1)`.
    pub fn conj(&self) -> CycNum {
        let m = if self.modulus == 1 { 1 } else { self.modulus - 1 };
        self.galois(m).expect("N - 1 is a unit")
    }

    /// Coefficients with respect to the power basis of `root` instead of `z_N`.
    ///
    /// Every primitive root shares the minimal polynomial `Phi_N`, so its
    /// powers `1, r, .., r^(phi(N)-1)` form a basis as well.
    pub fn coeffs_in_root_basis(&self, root: RootExponent) -> Result<Vec<BigRational>> {
        let inv = root.unit_inverse()?;
        Ok(self.galois(inv)?.coeffs)
    }

    /// Inverse of [`CycNum::coeffs_in_root_basis`].
    pub fn from_root_basis(root: RootExponent, coeffs: Vec<BigRational>) -> Result<CycNum> {
        CycNum::new(root.modulus(), coeffs)?.galois(root.exponent())
    }

    /// The exponent `k` with `self = z_N^k`, if any.
    pub fn as_root_of_unity(&self) -> Option<u32> {
        (0..self.modulus).find(|&k| *self == CycNum::root_of_unity(self.modulus, k as i64))
    }

    /// Renders the value as a polynomial in `var`, positive terms first,
    /// each group in ascending powers, e.g. `q - 1` or `-1 - q`.
    pub fn render_in(&self, var: &str) -> String {
        render_coeffs(&self.coeffs, var)
    }
}

/// Shared polynomial renderer for [`CycNum::render_in`] and the report layer.
pub fn render_coeffs(coeffs: &[BigRational], var: &str) -> String {
    let terms: Vec<(usize, &BigRational)> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .collect();
    if terms.is_empty() {
        return "0".to_string();
    }
    let ordered = terms
        .iter()
        .filter(|(_, c)| c.is_positive())
        .chain(terms.iter().filter(|(_, c)| c.is_negative()));
    let mut out = String::new();
    for (idx, (i, c)) in ordered.enumerate() {
        let neg = c.is_negative();
        let mag = c.abs();
        if idx == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let power = match i {
            0 => String::new(),
            1 => var.to_string(),
            _ => format!("{var}^{i}"),
        };
        if power.is_empty() {
            out.push_str(&mag.to_string());
        } else if mag.is_one() {
            out.push_str(&power);
        } else {
            out.push_str(&format!("{mag} {power}"));
        }
    }
    out
}

fn trim(mut v: Vec<BigRational>) -> Vec<BigRational> {
    while v.last().is_some_and(Zero::is_zero) {
        v.pop();
    }
    v
}

fn rat_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let len = a.len().max(b.len());
    let mut out = vec![BigRational::zero(); len];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] -= c;
    }
    trim(out)
}

fn rat_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn rat_divrem(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut rem = trim(a.to_vec());
    let db = b.len() - 1;
    if rem.len() <= db {
        return (Vec::new(), rem);
    }
    let mut quot = vec![BigRational::zero(); rem.len() - db];
    let lead = &b[db];
    while rem.len() > db {
        let shift = rem.len() - 1 - db;
        let c = rem.last().unwrap() / lead;
        for (j, y) in b.iter().enumerate() {
            rem[shift + j] -= &c * y;
        }
        quot[shift] = c;
        rem = trim(rem);
    }
    (trim(quot), rem)
}

impl fmt::Debug for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycNum<{}>({})", self.modulus, self.render_in("z"))
    }
}

impl fmt::Display for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_in("z"))
    }
}

// Operator impls panic on a modulus mismatch; use the `checked_*` methods
// at boundaries where the moduli are not already known to agree.
impl Add for &CycNum {
    type Output = CycNum;
    fn add(self, rhs: &CycNum) -> CycNum {
        self.checked_add(rhs).expect("modulus mismatch")
    }
}

impl Sub for &CycNum {
    type Output = CycNum;
    fn sub(self, rhs: &CycNum) -> CycNum {
        self.checked_sub(rhs).expect("modulus mismatch")
    }
}

impl Mul for &CycNum {
    type Output = CycNum;
    fn mul(self, rhs: &CycNum) -> CycNum {
        self.checked_mul(rhs).expect("modulus mismatch")
    }
}

impl Neg for &CycNum {
    type Output = CycNum;
    fn neg(self) -> CycNum {
        CycNum::from_reduced_unchecked(self.modulus, self.coeffs.iter().map(|a| -a).collect())
    }
}

impl Neg for CycNum {
    type Output = CycNum;
    fn neg(self) -> CycNum {
        -&self
    }
}

/// An `N`-th root of unity `z_N^k`, stored by its exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootExponent {
    modulus: u32,
    k: u32,
}

impl RootExponent {
    pub fn new(modulus: u32, k: i64) -> Result<Self> {
        check_modulus(modulus)?;
        Ok(RootExponent {
            modulus,
            k: k.rem_euclid(modulus as i64) as u32,
        })
    }

    /// The fixed primitive root `z_N`.
    pub fn primitive(modulus: u32) -> Result<Self> {
        Self::new(modulus, 1)
    }

    pub fn all(modulus: u32) -> Result<Vec<Self>> {
        (0..modulus as i64).map(|k| Self::new(modulus, k)).collect()
    }

    pub fn all_primitive(modulus: u32) -> Result<Vec<Self>> {
        Ok(Self::all(modulus)?
            .into_iter()
            .filter(|r| r.is_primitive())
            .collect())
    }

    pub fn modulus(self) -> u32 {
        self.modulus
    }

    pub fn exponent(self) -> u32 {
        self.k
    }

    pub fn is_primitive(self) -> bool {
        self.k.gcd(&self.modulus) == 1
    }

    /// Multiplicative order of the root.
    pub fn order(self) -> u32 {
        self.modulus / self.k.gcd(&self.modulus)
    }

    pub fn require_primitive(self) -> Result<Self> {
        if self.is_primitive() {
            Ok(self)
        } else {
            Err(Error::NotPrimitive {
                modulus: self.modulus,
                k: self.k,
                order: self.order(),
            })
        }
    }

    pub fn to_cyc(self) -> CycNum {
        CycNum::root_of_unity(self.modulus, self.k as i64)
    }

    /// `r^e` as a root exponent.
    pub fn pow(self, e: i64) -> Self {
        let n = self.modulus as i64;
        RootExponent {
            modulus: self.modulus,
            k: ((self.k as i64 % n) * e.rem_euclid(n)).rem_euclid(n) as u32,
        }
    }

    /// `r^e` as a field element.
    pub fn pow_cyc(self, e: i64) -> CycNum {
        self.pow(e).to_cyc()
    }

    pub fn conj(self) -> Self {
        self.pow(-1)
    }

    /// The product root, `z^(k + l)`.
    pub fn times(self, other: Self) -> Result<Self> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch {
                left: self.modulus,
                right: other.modulus,
            });
        }
        Self::new(self.modulus, self.k as i64 + other.k as i64)
    }

    /// `m` with `k * m = 1 (mod N)`.
    fn unit_inverse(self) -> Result<u32> {
        if self.modulus == 1 {
            return Ok(1);
        }
        (1..self.modulus)
            .find(|m| (self.k as u64 * *m as u64) % self.modulus as u64 == 1)
            .ok_or(Error::NotAUnit {
                exponent: self.k,
                modulus: self.modulus,
            })
    }
}

impl fmt::Display for RootExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z_{}^{}", self.modulus, self.k)
    }
}

pub fn is_primitive(root: RootExponent) -> bool {
    root.is_primitive()
}

/// `[n]_q = 1 + q + ... + q^(n-1)`.
pub fn q_int(n: u32) -> IntPoly {
    IntPoly::new(vec![BigInt::one(); n as usize])
}

/// `[n]_q! = [1]_q [2]_q ... [n]_q`, the product of `(1 - q^i)/(1 - q)`.
pub fn q_factorial(n: u32) -> IntPoly {
    (1..=n).fold(IntPoly::one(), |acc, i| acc.mul(&q_int(i)))
}

/// Gaussian binomial as a polynomial in `Z[q]`:
/// `prod_{i=1..k} (1 - q^(n-k+i)) / (1 - q^i)`.
pub fn gaussian_binomial(n: u32, k: u32) -> Result<IntPoly> {
    if k > n {
        return Err(Error::BinomialRange { n, k });
    }
    let one_minus = |e: u32| IntPoly::one().sub(&IntPoly::monomial(1, e as usize));
    let num = (1..=k).fold(IntPoly::one(), |acc, i| acc.mul(&one_minus(n - k + i)));
    let den = (1..=k).fold(IntPoly::one(), |acc, i| acc.mul(&one_minus(i)));
    Ok(num
        .div_exact(&den)
        .expect("Gaussian binomials are integer polynomials"))
}

/// Gaussian binomial `[n k]_q` evaluated at `q = root`.
pub fn q_binomial(n: u32, k: u32, root: RootExponent) -> Result<CycNum> {
    Ok(gaussian_binomial(n, k)?.evaluate(root))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn j() -> CycNum {
        CycNum::root_of_unity(3, 1)
    }

    #[test]
    fn cyclotomic_examples() {
        assert_eq!(cyclotomic_polynomial(1), IntPoly::from_i64(&[-1, 1]));
        assert_eq!(cyclotomic_polynomial(3), IntPoly::from_i64(&[1, 1, 1]));
        assert_eq!(cyclotomic_polynomial(6), IntPoly::from_i64(&[1, -1, 1]));
        assert_eq!(cyclotomic_polynomial(4), IntPoly::from_i64(&[1, 0, 1]));
        assert_eq!(cyclotomic_polynomial(12), IntPoly::from_i64(&[1, 0, -1, 0, 1]));
    }

    #[test]
    fn phi_degree_is_totient() {
        for n in 1..=MAX_MODULUS {
            assert_eq!(cyclotomic_polynomial(n).degree(), Some(totient(n)));
        }
    }

    #[test]
    fn arithmetic_examples() {
        let jj = &j() * &j();
        assert_eq!(jj.coeffs(), &[rat(-1), rat(-1)]);
        let sum = &(&CycNum::one(3) + &j()) + &jj;
        assert!(sum.is_zero());
        let m1 = CycNum::from_integer(2, -1);
        assert!((&m1 * &m1).is_one());
    }

    #[test]
    fn modulus_mismatch_is_rejected() {
        let err = CycNum::one(3).checked_add(&CycNum::one(4)).unwrap_err();
        assert_eq!(err, Error::ModulusMismatch { left: 3, right: 4 });
        assert!(CycNum::new(25, vec![]).is_err());
        assert!(RootExponent::new(0, 0).is_err());
    }

    #[test]
    fn pow_and_inverse() {
        assert_eq!(j().pow(-1).unwrap(), CycNum::root_of_unity(3, 2));
        assert_eq!(j().pow(3).unwrap(), CycNum::one(3));
        let a = CycNum::new(5, vec![rat(2), rat(-1), rat(3)]).unwrap();
        assert!((&a * &a.inverse().unwrap()).is_one());
        assert_eq!(CycNum::zero(5).pow(-2), Err(Error::NotInvertible));
        assert!(CycNum::zero(5).pow(0).unwrap().is_one());
    }

    #[test]
    fn conjugation_examples() {
        assert_eq!(j().conj(), CycNum::new(3, vec![rat(-1), rat(-1)]).unwrap());
        assert!(CycNum::one(7).conj().is_one());
        let i = CycNum::root_of_unity(4, 1);
        assert_eq!(i.conj(), -&i);
    }

    #[test]
    fn q_binomial_examples() {
        let z3 = RootExponent::new(3, 1).unwrap();
        assert!(q_binomial(3, 1, z3).unwrap().is_zero());
        for n in [2, 3, 5] {
            let r = RootExponent::new(n, 1).unwrap();
            assert!(q_binomial(5, 0, r).unwrap().is_one());
        }
        let z4 = RootExponent::new(4, 1).unwrap();
        assert!(q_binomial(4, 2, z4).unwrap().is_zero());
        assert_eq!(
            gaussian_binomial(4, 2).unwrap(),
            IntPoly::from_i64(&[1, 1, 2, 1, 1])
        );
        assert_eq!(
            q_binomial(2, 3, z3),
            Err(Error::BinomialRange { n: 2, k: 3 })
        );
    }

    #[test]
    fn primitivity() {
        assert!(RootExponent::new(3, 1).unwrap().is_primitive());
        assert!(!RootExponent::new(4, 2).unwrap().is_primitive());
        assert!(RootExponent::new(6, 5).unwrap().is_primitive());
        assert_eq!(RootExponent::new(4, 2).unwrap().order(), 2);
    }

    #[test]
    fn rendering_orders_positive_terms_first() {
        let jm1 = &j() - &CycNum::one(3);
        assert_eq!(jm1.render_in("q"), "q - 1");
        assert_eq!((&j() * &j()).render_in("q"), "-1 - q");
        assert_eq!(CycNum::zero(3).render_in("q"), "0");
        let half = CycNum::from_rational(3, BigRational::new(1.into(), 2.into()));
        assert_eq!(half.render_in("q"), "1/2");
    }

    #[test]
    fn root_basis_roundtrip() {
        let jbar = RootExponent::new(3, 2).unwrap();
        // j^2 = jbar, so in the jbar basis it is the basis vector `r`.
        let v = (&j() * &j()).coeffs_in_root_basis(jbar).unwrap();
        assert_eq!(v, vec![rat(0), rat(1)]);
        let back = CycNum::from_root_basis(jbar, v).unwrap();
        assert_eq!(back, &j() * &j());
    }
}
