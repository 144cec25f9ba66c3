//! Arithmetic in `F_p` and `F_{p^2} = F_p[i] / (i^2 + 1)`, valid for `p = 3 mod 4`.
//!
//! Elements carry their modulus so that they can be passed around as plain
//! values; mixing elements of different fields is a logic error caught by
//! debug assertions.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use thiserror::Error;

use crate::arith::{inv_mod, mul_mod};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
}

/// Element `c0 + c1*i` of `F_{p^2}`; both coordinates are reduced.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp2 {
    c0: u64,
    c1: u64,
    p: u64,
}

impl fmt::Debug for Fp2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}*i", self.c0, self.c1)
    }
}

impl fmt::Display for Fp2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:x}+{:x}*i", self.c0, self.c1)
    }
}

/// Lexicographic on `(c0, c1)`; used for canonical choices.
impl Ord for Fp2 {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.c0, self.c1).cmp(&(other.c0, other.c1))
    }
}

impl PartialOrd for Fp2 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Fp2 {
    pub fn new(c0: u64, c1: u64, p: u64) -> Self {
        Fp2 { c0: c0 % p, c1: c1 % p, p }
    }

    pub fn from_u64(v: u64, p: u64) -> Self {
        Fp2::new(v, 0, p)
    }

    pub fn from_i64(v: i64, p: u64) -> Self {
        Fp2::new(v.rem_euclid(p as i64) as u64, 0, p)
    }

    pub fn zero(p: u64) -> Self {
        Fp2 { c0: 0, c1: 0, p }
    }

    pub fn one(p: u64) -> Self {
        Fp2 { c0: 1 % p, c1: 0, p }
    }

    /// The imaginary unit `i`.
    pub fn i(p: u64) -> Self {
        Fp2 { c0: 0, c1: 1, p }
    }

    pub fn c0(&self) -> u64 {
        self.c0
    }

    pub fn c1(&self) -> u64 {
        self.c1
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.c0 == 0 && self.c1 == 0
    }

    pub fn is_one(&self) -> bool {
        self.c0 == 1 && self.c1 == 0
    }

    /// True when the element lies in the prime subfield.
    pub fn is_base_field(&self) -> bool {
        self.c1 == 0
    }

    pub fn square(&self) -> Self {
        *self * *self
    }

    pub fn double(&self) -> Self {
        *self + *self
    }

    /// `x^p = c0 - c1*i`.
    pub fn frobenius(&self) -> Self {
        Fp2 { c0: self.c0, c1: (self.p - self.c1) % self.p, p: self.p }
    }

    /// `c0^2 + c1^2 in F_p`.
    pub fn norm(&self) -> u64 {
        let p = self.p;
        (mul_mod(self.c0, self.c0, p) + mul_mod(self.c1, self.c1, p)) % p
    }

    pub fn inv(&self) -> Result<Self, FieldError> {
        let n = self.norm();
        let n_inv = inv_mod(n, self.p).ok_or(FieldError::DivisionByZero)?;
        Ok(Fp2 {
            c0: mul_mod(self.c0, n_inv, self.p),
            c1: mul_mod((self.p - self.c1) % self.p, n_inv, self.p),
            p: self.p,
        })
    }

    pub fn pow(&self, mut exp: u128) -> Self {
        let mut base = *self;
        let mut acc = Fp2::one(self.p);
        while exp > 0 {
            if exp & 1 == 1 {
                acc *= base;
            }
            base = base.square();
            exp >>= 1;
        }
        acc
    }

    pub fn pow_i64(&self, exp: i64) -> Result<Self, FieldError> {
        if exp >= 0 {
            Ok(self.pow(exp as u128))
        } else {
            Ok(self.inv()?.pow(exp.unsigned_abs() as u128))
        }
    }

    /// Quadratic-residue test in `F_{p^2}` (zero counts as a square).
    pub fn is_square(&self) -> bool {
        if self.is_zero() {
            return true;
        }
        // x is a square in F_{p^2} iff its norm is a square in F_p.
        let n = Fp2::from_u64(self.norm(), self.p);
        n.pow(((self.p - 1) / 2) as u128).is_one()
    }

    /// Canonical square root: the lexicographically smaller of `±r`.
    pub fn sqrt(&self) -> Option<Self> {
        let p = self.p;
        if self.is_zero() {
            return Some(*self);
        }
        // Specialised algorithm for p = 3 mod 4 (complex method).
        let a1 = self.pow(((p - 3) / 4) as u128);
        let alpha = a1 * (a1 * *self);
        let a0 = alpha.frobenius() * alpha;
        let minus_one = -Fp2::one(p);
        if a0 == minus_one {
            return None;
        }
        let x0 = a1 * *self;
        let root = if alpha == minus_one {
            Fp2::i(p) * x0
        } else {
            let b = (Fp2::one(p) + alpha).pow(((p - 1) / 2) as u128);
            b * x0
        };
        if root.square() != *self {
            return None;
        }
        Some(root.min(-root))
    }

    /// All cube roots of `self` in `F_{p^2}`, sorted lexicographically.
    pub fn cube_roots(&self) -> Vec<Self> {
        let p = self.p;
        if self.is_zero() {
            return vec![*self];
        }
        let order = (p as u128) * (p as u128) - 1;
        if !order.is_multiple_of(3) {
            // cubing is a bijection
            let inv3 = mod_inverse_u128(3, order);
            return vec![self.pow(inv3)];
        }
        if !self.pow(order / 3).is_one() {
            return Vec::new();
        }
        // order = 3^s * t with gcd(t, 3) = 1
        let mut t = order;
        let mut s = 0u32;
        while t.is_multiple_of(3) {
            t /= 3;
            s += 1;
        }
        // a non-cube generates the 3-Sylow subgroup after raising to t
        let mut gen = None;
        'scan: for c0 in 1..p {
            for c1 in 0..3u64.min(p) {
                let cand = Fp2::new(c0, c1, p);
                if !cand.pow(order / 3).is_one() {
                    gen = Some(cand.pow(t));
                    break 'scan;
                }
            }
        }
        let z = gen.expect("F_{p^2}^* has non-cubes when 3 | p^2 - 1");
        // r^3 = self * e with e in the 3-Sylow subgroup
        let k = mod_inverse_u128(3 % t, t);
        let r = self.pow(k);
        let e = (r.square() * r) * self.inv().expect("nonzero");
        let sylow = 3u128.pow(s);
        let mut root = None;
        let mut zj = Fp2::one(p);
        for _ in 0..sylow {
            if (zj.square() * zj) * e == Fp2::one(p) {
                root = Some(r * zj);
                break;
            }
            zj *= z;
        }
        let root = root.expect("cube root exists once the residue test passes");
        let omega = z.pow(sylow / 3);
        let mut roots = vec![root, root * omega, root * omega * omega];
        roots.sort();
        roots.dedup();
        roots
    }
}

fn mod_inverse_u128(a: u128, m: u128) -> u128 {
    if m == 1 {
        return 0;
    }
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1);
    old_s.rem_euclid(m as i128) as u128
}

impl Add for Fp2 {
    type Output = Fp2;
    #[inline]
    fn add(self, rhs: Fp2) -> Fp2 {
        debug_assert_eq!(self.p, rhs.p);
        let p = self.p;
        let mut c0 = self.c0 + rhs.c0;
        if c0 >= p {
            c0 -= p;
        }
        let mut c1 = self.c1 + rhs.c1;
        if c1 >= p {
            c1 -= p;
        }
        Fp2 { c0, c1, p }
    }
}

impl Sub for Fp2 {
    type Output = Fp2;
    #[inline]
    fn sub(self, rhs: Fp2) -> Fp2 {
        debug_assert_eq!(self.p, rhs.p);
        let p = self.p;
        let c0 = if self.c0 >= rhs.c0 { self.c0 - rhs.c0 } else { self.c0 + p - rhs.c0 };
        let c1 = if self.c1 >= rhs.c1 { self.c1 - rhs.c1 } else { self.c1 + p - rhs.c1 };
        Fp2 { c0, c1, p }
    }
}

impl Neg for Fp2 {
    type Output = Fp2;
    #[inline]
    fn neg(self) -> Fp2 {
        let p = self.p;
        Fp2 { c0: (p - self.c0) % p, c1: (p - self.c1) % p, p }
    }
}

impl Mul for Fp2 {
    type Output = Fp2;
    #[inline]
    fn mul(self, rhs: Fp2) -> Fp2 {
        debug_assert_eq!(self.p, rhs.p);
        let p = self.p;
        // (a + bi)(c + di) = (ac - bd) + (ad + bc)i
        let ac = mul_mod(self.c0, rhs.c0, p);
        let bd = mul_mod(self.c1, rhs.c1, p);
        let ad = mul_mod(self.c0, rhs.c1, p);
        let bc = mul_mod(self.c1, rhs.c0, p);
        let c0 = if ac >= bd { ac - bd } else { ac + p - bd };
        let mut c1 = ad + bc;
        if c1 >= p {
            c1 -= p;
        }
        Fp2 { c0, c1, p }
    }
}

impl AddAssign for Fp2 {
    fn add_assign(&mut self, rhs: Fp2) {
        *self = *self + rhs;
    }
}

impl SubAssign for Fp2 {
    fn sub_assign(&mut self, rhs: Fp2) {
        *self = *self - rhs;
    }
}

impl MulAssign for Fp2 {
    fn mul_assign(&mut self, rhs: Fp2) {
        *self = *self * rhs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    const P: u64 = 26_879;

    fn random(rng: &mut impl Rng) -> Fp2 {
        Fp2::new(rng.gen_range(0..P), rng.gen_range(0..P), P)
    }

    /// Independent extended-Euclid oracle on `i64`.
    fn egcd_inverse(a: i64, m: i64) -> i64 {
        let (mut r0, mut r1, mut s0, mut s1) = (a, m, 1i64, 0i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        s0.rem_euclid(m)
    }

    #[test]
    fn inverse_of_two() {
        let two = Fp2::from_u64(2, P);
        let r = egcd_inverse(2, P as i64) as u64;
        assert_eq!(r, 13_440);
        assert_eq!(two.inv().unwrap(), Fp2::from_u64(r, P));
    }

    #[test]
    fn zero_has_no_inverse() {
        assert_eq!(Fp2::zero(P).inv(), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn axioms_on_random_triples() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let (x, y, z) = (random(&mut rng), random(&mut rng), random(&mut rng));
            assert_eq!(x + y, y + x);
            assert_eq!(x * y, y * x);
            assert_eq!((x + y) + z, x + (y + z));
            assert_eq!((x * y) * z, x * (y * z));
            assert_eq!(x * (y + z), x * y + x * z);
            assert_eq!(x - x, Fp2::zero(P));
            assert_eq!(x.frobenius().frobenius(), x);
            assert_eq!(x.pow(P as u128), x.frobenius());
            if !x.is_zero() {
                assert!((x * x.inv().unwrap()).is_one());
            }
        }
    }

    #[test]
    fn field_order() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        for _ in 0..50 {
            let x = random(&mut rng);
            assert_eq!(x.pow((P as u128) * (P as u128)), x);
        }
    }

    #[test]
    fn square_roots() {
        assert_eq!(Fp2::one(P).sqrt(), Some(Fp2::one(P)));
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        for _ in 0..500 {
            let r = random(&mut rng);
            let s = r.square().sqrt().expect("squares have roots");
            assert_eq!(s, r.min(-r));
        }
    }

    #[test]
    fn non_square_found_by_exhaustive_scan() {
        // Euler's criterion on the norm, evaluated by brute-force over all
        // candidate roots in F_p for the norm.
        let squares_mod_p: std::collections::HashSet<u64> =
            (0..P).map(|t| t * t % P).collect();
        let mut found = None;
        'outer: for c0 in 0..P {
            for c1 in 0..P {
                let x = Fp2::new(c0, c1, P);
                if !squares_mod_p.contains(&x.norm()) {
                    found = Some(x);
                    break 'outer;
                }
            }
        }
        let x = found.expect("F_{p^2} has non-squares");
        assert!(!x.is_square());
        assert_eq!(x.sqrt(), None);
    }

    #[test]
    fn cube_roots_cube_back() {
        let mut rng = ChaCha20Rng::seed_from_u64(10);
        for _ in 0..50 {
            let r = random(&mut rng);
            let c = r.square() * r;
            let roots = c.cube_roots();
            assert_eq!(roots.len(), 3);
            assert!(roots.contains(&r));
            for t in roots {
                assert_eq!(t.square() * t, c);
            }
        }
    }
}
