//! Arbitrary-precision arithmetic in the prime field `Z_p`.
//!
//! A [`PrimeField`] is the arithmetic context (it owns `p` and the
//! precomputed Tonelli-Shanks parameters); a [`Fe`] is a canonical residue
//! in `[0, p-1]`. Elements do not carry the modulus: the solver works in
//! exactly one field per instance, fixed at parse time.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use std::fmt;

/// A canonical residue modulo the solver prime: `0 <= residue < p`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fe(BigUint);

impl Fe {
    pub fn to_biguint(&self) -> &BigUint {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldError {
    /// The requested modulus failed the primality check.
    NotPrime(BigUint),
    /// Inverse of zero requested.
    ZeroInverse,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::NotPrime(n) => write!(f, "{} is not prime", n),
            FieldError::ZeroInverse => write!(f, "zero has no multiplicative inverse"),
        }
    }
}

impl std::error::Error for FieldError {}

/// The prime field context. All element operations go through this type.
#[derive(Debug, Clone)]
pub struct PrimeField {
    p: BigUint,
    /// `(p-1)/2`, used by the Legendre symbol and balanced representation.
    half: BigUint,
}

impl PrimeField {
    /// Builds the field, verifying primality (trial division by small primes
    /// plus Miller-Rabin with 40 deterministic witness rounds).
    pub fn new(p: BigUint) -> Result<Self, FieldError> {
        if !is_prime(&p) {
            return Err(FieldError::NotPrime(p));
        }
        let half = (&p - 1u32) >> 1;
        Ok(PrimeField { p, half })
    }

    pub fn modulus(&self) -> &BigUint {
        &self.p
    }

    pub fn zero(&self) -> Fe {
        Fe(BigUint::zero())
    }

    pub fn one(&self) -> Fe {
        Fe(BigUint::one())
    }

    /// Canonical element from an unsigned integer.
    pub fn elem(&self, n: BigUint) -> Fe {
        Fe(n % &self.p)
    }

    pub fn elem_u64(&self, n: u64) -> Fe {
        self.elem(BigUint::from(n))
    }

    /// Canonical element from a (possibly negative) integer.
    pub fn elem_int(&self, n: &BigInt) -> Fe {
        let p = BigInt::from(self.p.clone());
        let r = n.mod_floor(&p);
        Fe(r.to_biguint().expect("mod_floor of positive modulus"))
    }

    pub fn add(&self, a: &Fe, b: &Fe) -> Fe {
        let mut r = &a.0 + &b.0;
        if r >= self.p {
            r -= &self.p;
        }
        Fe(r)
    }

    pub fn sub(&self, a: &Fe, b: &Fe) -> Fe {
        if a.0 >= b.0 {
            Fe(&a.0 - &b.0)
        } else {
            Fe(&self.p - &b.0 + &a.0)
        }
    }

    pub fn neg(&self, a: &Fe) -> Fe {
        if a.0.is_zero() {
            Fe(BigUint::zero())
        } else {
            Fe(&self.p - &a.0)
        }
    }

    pub fn mul(&self, a: &Fe, b: &Fe) -> Fe {
        Fe(&a.0 * &b.0 % &self.p)
    }

    pub fn pow(&self, a: &Fe, e: &BigUint) -> Fe {
        Fe(a.0.modpow(e, &self.p))
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    pub fn inverse(&self, a: &Fe) -> Result<Fe, FieldError> {
        if a.0.is_zero() {
            return Err(FieldError::ZeroInverse);
        }
        let a_int = BigInt::from(a.0.clone());
        let p_int = BigInt::from(self.p.clone());
        let ext = a_int.extended_gcd(&p_int);
        debug_assert!(ext.gcd.is_one());
        Ok(self.elem_int(&ext.x))
    }

    /// Legendre symbol: 0 for zero, +1 for nonzero squares, -1 otherwise.
    pub fn legendre(&self, a: &Fe) -> i8 {
        if a.0.is_zero() {
            return 0;
        }
        if self.p == BigUint::from(2u32) {
            return 1;
        }
        let r = a.0.modpow(&self.half, &self.p);
        if r.is_one() {
            1
        } else {
            -1
        }
    }

    /// Square roots by Tonelli-Shanks. Returns `(r, p-r)` with `r` the
    /// smaller canonical representative, `(0, 0)` for zero, and `None`
    /// when `a` is a quadratic non-residue.
    pub fn sqrt(&self, a: &Fe) -> Option<(Fe, Fe)> {
        if a.0.is_zero() {
            return Some((self.zero(), self.zero()));
        }
        if self.p == BigUint::from(2u32) {
            // x^2 = x in GF(2)
            return Some((a.clone(), a.clone()));
        }
        if self.legendre(a) != 1 {
            return None;
        }
        let one = BigUint::one();
        let r = if (&self.p % 4u32) == BigUint::from(3u32) {
            // fast path: r = a^((p+1)/4)
            let e = (&self.p + &one) >> 2;
            a.0.modpow(&e, &self.p)
        } else {
            self.tonelli_shanks(&a.0)
        };
        let s = &self.p - &r;
        let (lo, hi) = if r <= s { (r, s) } else { (s, r) };
        Some((Fe(lo), Fe(hi)))
    }

    fn tonelli_shanks(&self, a: &BigUint) -> BigUint {
        // p - 1 = q * 2^s with q odd
        let one = BigUint::one();
        let two = BigUint::from(2u32);
        let mut q = &self.p - &one;
        let mut s = 0u64;
        while (&q % &two).is_zero() {
            q >>= 1;
            s += 1;
        }
        // find a non-residue z by scanning small values
        let mut z = two.clone();
        loop {
            if self.legendre(&Fe(z.clone() % &self.p)) == -1 {
                break;
            }
            z += &one;
        }
        let mut m = s;
        let mut c = z.modpow(&q, &self.p);
        let mut t = a.modpow(&q, &self.p);
        let mut r = a.modpow(&((&q + &one) >> 1), &self.p);
        while !t.is_one() {
            // smallest i with t^(2^i) = 1
            let mut i = 0u64;
            let mut t2 = t.clone();
            while !t2.is_one() {
                t2 = &t2 * &t2 % &self.p;
                i += 1;
            }
            let mut b = c.clone();
            for _ in 0..(m - i - 1) {
                b = &b * &b % &self.p;
            }
            m = i;
            c = &b * &b % &self.p;
            t = &t * &c % &self.p;
            r = &r * &b % &self.p;
        }
        r
    }

    /// Signed representative with magnitude at most `(p-1)/2` for odd `p`:
    /// `a` itself when `a <= (p-1)/2`, otherwise `a - p`.
    pub fn balanced(&self, a: &Fe) -> BigInt {
        if a.0 <= self.half {
            BigInt::from(a.0.clone())
        } else {
            BigInt::from(a.0.clone()) - BigInt::from(self.p.clone())
        }
    }
}

/// Deterministic primality check: trial division by small primes, then
/// Miller-Rabin with the first 40 primes as witnesses.
pub fn is_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    const SMALL: [u32; 40] = [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83,
        89, 97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173,
    ];
    for &q in &SMALL {
        let q = BigUint::from(q);
        if *n == q {
            return true;
        }
        if (n % &q).is_zero() {
            return false;
        }
    }
    // n - 1 = d * 2^s
    let n_minus_1 = n - 1u32;
    let mut d = n_minus_1.clone();
    let mut s = 0u64;
    while (&d % &two).is_zero() {
        d >>= 1;
        s += 1;
    }
    'witness: for &w in &SMALL {
        let a = BigUint::from(w) % n;
        if a.is_zero() {
            continue;
        }
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = &x * &x % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u64) -> PrimeField {
        PrimeField::new(BigUint::from(p)).unwrap()
    }

    #[test]
    fn ring_ops_mod_7() {
        let zp = f(7);
        assert_eq!(zp.add(&zp.elem_u64(3), &zp.elem_u64(5)), zp.elem_u64(1));
        assert_eq!(zp.neg(&zp.elem_u64(0)), zp.elem_u64(0));
        assert_eq!(zp.mul(&zp.elem_u64(3), &zp.elem_u64(5)), zp.elem_u64(1));
        assert_eq!(zp.sub(&zp.elem_u64(2), &zp.elem_u64(5)), zp.elem_u64(4));
    }

    #[test]
    fn inverse_matches_brute_force() {
        let zp = f(7);
        assert_eq!(zp.inverse(&zp.elem_u64(3)).unwrap(), zp.elem_u64(5));
        assert_eq!(zp.inverse(&zp.elem_u64(1)).unwrap(), zp.elem_u64(1));
        let z13 = f(13);
        assert_eq!(z13.inverse(&z13.elem_u64(2)).unwrap(), z13.elem_u64(7));
        assert!(zp.inverse(&zp.zero()).is_err());
        // exhaustive check on a few primes
        for p in [3u64, 5, 7, 11, 13, 101] {
            let zp = f(p);
            for a in 1..p {
                let a = zp.elem_u64(a);
                let inv = zp.inverse(&a).unwrap();
                assert!(zp.mul(&a, &inv).is_one());
            }
        }
    }

    #[test]
    fn sqrt_examples() {
        let zp = f(7);
        assert_eq!(
            zp.sqrt(&zp.elem_u64(2)),
            Some((zp.elem_u64(3), zp.elem_u64(4)))
        );
        assert_eq!(
            zp.sqrt(&zp.elem_u64(0)),
            Some((zp.elem_u64(0), zp.elem_u64(0)))
        );
        assert_eq!(zp.sqrt(&zp.elem_u64(3)), None);
    }

    #[test]
    fn sqrt_agrees_with_enumeration() {
        for p in [3u64, 5, 7, 13, 17, 41, 97, 101] {
            let zp = f(p);
            for a in 0..p {
                let a = zp.elem_u64(a);
                let roots: Vec<u64> = (0..p)
                    .filter(|r| zp.mul(&zp.elem_u64(*r), &zp.elem_u64(*r)) == a)
                    .collect();
                match zp.sqrt(&a) {
                    Some((r, s)) => {
                        assert!(!roots.is_empty());
                        assert!(zp.mul(&r, &r) == a && zp.mul(&s, &s) == a);
                        assert!(r <= s);
                        if !a.is_zero() {
                            assert!(zp.add(&r, &s).is_zero());
                        }
                    }
                    None => assert!(roots.is_empty()),
                }
            }
        }
    }

    #[test]
    fn legendre_agrees_with_enumeration() {
        let zp = f(7);
        assert_eq!(zp.legendre(&zp.elem_u64(2)), 1);
        assert_eq!(zp.legendre(&zp.elem_u64(0)), 0);
        assert_eq!(zp.legendre(&zp.elem_u64(3)), -1);
        for p in [3u64, 5, 7, 13, 31, 71, 101] {
            let zp = f(p);
            for a in 0..p {
                let a = zp.elem_u64(a);
                let is_sq = (0..p).any(|r| zp.mul(&zp.elem_u64(r), &zp.elem_u64(r)) == a);
                let expect = if a.is_zero() {
                    0
                } else if is_sq {
                    1
                } else {
                    -1
                };
                assert_eq!(zp.legendre(&a), expect);
            }
        }
    }

    #[test]
    fn balanced_representation() {
        let zp = f(7);
        assert_eq!(zp.balanced(&zp.elem_u64(6)), BigInt::from(-1));
        assert_eq!(zp.balanced(&zp.elem_u64(3)), BigInt::from(3));
        assert_eq!(zp.balanced(&zp.elem_u64(0)), BigInt::from(0));
        for p in [3u64, 5, 7, 13, 101] {
            let zp = f(p);
            for a in 0..p {
                let fe = zp.elem_u64(a);
                let b = zp.balanced(&fe);
                assert_eq!(zp.elem_int(&b), fe);
                assert!(b.magnitude() <= &((BigUint::from(p) - 1u32) >> 1));
            }
        }
    }

    #[test]
    fn primality() {
        for p in [2u64, 3, 5, 7, 13, 101, 257, 7919] {
            assert!(is_prime(&BigUint::from(p)), "{p}");
        }
        for n in [0u64, 1, 4, 9, 15, 100, 255, 561, 7917] {
            assert!(!is_prime(&BigUint::from(n)), "{n}");
        }
        // a couple of large primes used in ZKP systems
        let bn254: BigUint = "21888242871839275222246405745257275088548364400416034343698204186575808495617"
            .parse()
            .unwrap();
        assert!(is_prime(&bn254));
        assert!(!is_prime(&(bn254 + 2u32)));
        assert!(PrimeField::new(BigUint::from(6u32)).is_err());
    }

    #[test]
    fn sqrt_large_prime() {
        // p = 2^61 - 1 (Mersenne), p % 4 == 3 exercises the fast path;
        // p = 257 (p % 4 == 1) exercises full Tonelli-Shanks.
        for p in [BigUint::from(2305843009213693951u64), BigUint::from(257u32)] {
            let zp = PrimeField::new(p.clone()).unwrap();
            for a in [5u64, 12345, 999999] {
                let a = zp.elem(BigUint::from(a));
                let sq = zp.mul(&a, &a);
                let (r, s) = zp.sqrt(&sq).unwrap();
                assert!(zp.mul(&r, &r) == sq && zp.mul(&s, &s) == sq);
            }
        }
    }
}
