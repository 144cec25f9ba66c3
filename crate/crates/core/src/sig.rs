//! The underlying toy signature: hash to a challenge index, challenge walks,
//! key generation, signing by explicit composition and layered verification.

use log::warn;
use rand::Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::arith::{as_prime_power, factorize, gcd};
use crate::curve::{Curve, Point};
use crate::dlog::{recover_isogeny_with, RecoveryError};
use crate::exec::Execution;
use crate::field::Fp2;
use crate::isogeny::{efficient_rep, isogeny_from_kernel, EfficientRep, IsogenyChain, IsogenyError};
use crate::params::ParamSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SigError {
    #[error("challenge index {h} outside [1, {mu}]")]
    IndexOutOfRange { h: u64, mu: u64 },
    #[error("walk degree {0} is not a prime power")]
    NotPrimePower(u64),
    #[error(transparent)]
    Isogeny(#[from] IsogenyError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct KeyPair {
    pub sk: IsogenyChain,
    pub pk: Curve,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlainSignature {
    pub e1: Curve,
    pub rep: EfficientRep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Light,
    Strict,
}

/// `mu(D) = prod l^(e-1) (l + 1)`: the number of cyclic subgroups of order `D`.
pub fn mu(d: u64) -> u64 {
    factorize(d).into_iter().map(|(l, e)| l.pow(e - 1) * (l + 1)).product()
}

/// Big-endian bytes of `x`, padded to the byte length of `p`.
pub fn fixed_be(x: u64, p: u64) -> Vec<u8> {
    let len = (64 - p.leading_zeros()).div_ceil(8) as usize;
    x.to_be_bytes()[8 - len..].to_vec()
}

/// `1 + (SHA-256(c0 || c1 || m) mod mu)`.
pub fn hash_to_challenge_index(j: &Fp2, m: &[u8], mu: u64) -> u64 {
    assert!(mu >= 1, "mu must be positive");
    let p = j.modulus();
    let mut hasher = Sha256::new();
    hasher.update(fixed_be(j.c0(), p));
    hasher.update(fixed_be(j.c1(), p));
    hasher.update(m);
    let digest = hasher.finalize();
    let r = digest.iter().fold(0u128, |acc, &byte| (acc * 256 + byte as u128) % mu as u128);
    1 + r as u64
}

/// Generator of the `h`-th cyclic subgroup of order `d = l^e` on the
/// canonical basis of `E[d]`.
pub fn indexed_kernel(curve: &Curve, h: u64, d: u64) -> Result<Point, SigError> {
    let (ell, e) = as_prime_power(d).ok_or(SigError::NotPrimePower(d))?;
    let mu = mu(d);
    if h == 0 || h > mu {
        return Err(SigError::IndexOutOfRange { h, mu });
    }
    let basis = curve.torsion_basis(d).map_err(IsogenyError::from)?;
    Ok(curve.indexed_cyclic_generator(&basis, ell, e, h).expect("index checked"))
}

pub fn challenge_walk(curve: &Curve, h: u64, d: u64) -> Result<IsogenyChain, SigError> {
    let k = indexed_kernel(curve, h, d)?;
    Ok(isogeny_from_kernel(curve, &[k], d)?)
}

/// Uniform cyclic kernel of order `d` (any smooth `d | p + 1`), built from
/// one indexed generator per prime power.
pub fn random_cyclic_isogeny(curve: &Curve, d: u64, rng: &mut impl Rng) -> Result<IsogenyChain, SigError> {
    let mut gen = Point::Infinity;
    for (ell, e) in factorize(d) {
        let pe = ell.pow(e);
        let h = rng.gen_range(1..=mu(pe));
        gen = curve.add(&gen, &indexed_kernel(curve, h, pe)?);
    }
    Ok(isogeny_from_kernel(curve, &[gen], d)?)
}

pub fn keygen(ps: &ParamSet, rng: &mut impl Rng) -> KeyPair {
    let sk = random_cyclic_isogeny(&ps.e0, ps.d_tau, rng).expect("D_tau divides p + 1");
    KeyPair { pk: sk.codomain(), sk }
}

/// `phi = walk(pk, H(j(E1), m))`.
pub fn challenge_for(pk: &Curve, e1: &Curve, m: &[u8], ps: &ParamSet) -> Result<IsogenyChain, SigError> {
    let h = hash_to_challenge_index(&e1.j_invariant(), m, mu(ps.d_phi));
    challenge_walk(pk, h, ps.d_phi)
}

/// Response `phi ∘ tau ∘ psi0^` exported on the `A`-torsion of `E1`.
pub fn sign(kp: &KeyPair, m: &[u8], ps: &ParamSet, rng: &mut impl Rng) -> Result<PlainSignature, SigError> {
    let psi0 = random_cyclic_isogeny(&ps.e0, ps.big_b(), rng)?;
    let e1 = psi0.codomain();
    let phi = challenge_for(&kp.pk, &e1, m, ps)?;
    let sigma = psi0.dual()?.then(&kp.sk)?.then(&phi)?;
    Ok(PlainSignature { e1, rep: efficient_rep(&sigma, ps.big_a())? })
}

/// Outcome of the layered checks. `strict` is `None` when recovery was not
/// requested or the uniqueness bound does not hold for this representation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepReport {
    pub light: Result<(), String>,
    pub strict: Option<Result<(), RecoveryError>>,
}

impl RepReport {
    pub fn ok(&self) -> bool {
        self.light.is_ok() && !matches!(self.strict, Some(Err(_)))
    }
}

/// Endpoints, orders and the pairing law `e_N(img) = e_N(basis)^q`; in
/// strict mode also certify an actual isogeny of degree `q` by recovery.
pub fn check_rep(
    rep: &EfficientRep,
    domain: &Curve,
    codomain: &Curve,
    required_order: u64,
    mode: Mode,
    exec: Execution,
) -> RepReport {
    let light = light_checks(rep, domain, codomain, required_order);
    let strict = match (mode, &light) {
        (Mode::Strict, Ok(())) => {
            let (q, n) = (rep.degree as u128, rep.basis_order as u128);
            if 4 * q < n * n && gcd(rep.degree, rep.basis_order) == 1 {
                Some(recover_isogeny_with(rep, exec).map(|_| ()))
            } else {
                warn!("strict check skipped: degree {q} with basis order {n} exceeds the uniqueness bound; light result only");
                None
            }
        }
        _ => None,
    };
    RepReport { light, strict }
}

fn light_checks(rep: &EfficientRep, domain: &Curve, codomain: &Curve, required_order: u64) -> Result<(), String> {
    if rep.domain != *domain {
        return Err("representation domain differs from the commitment curve".into());
    }
    if rep.codomain != *codomain {
        return Err("representation codomain differs from the challenge codomain".into());
    }
    let n = rep.basis_order;
    if n == 0 || required_order == 0 || !n.is_multiple_of(required_order) {
        return Err(format!("basis order {n} is not a multiple of {required_order}"));
    }
    if rep.degree == 0 {
        return Err("zero degree".into());
    }
    for img in [&rep.images.0, &rep.images.1] {
        if !codomain.contains(img) {
            return Err("image point is not on the codomain".into());
        }
        if !codomain.mul_u64(img, n).is_infinity() {
            return Err(format!("image point is not killed by {n}"));
        }
    }
    let basis = domain.torsion_basis(n).map_err(|e| e.to_string())?;
    let lhs = codomain.weil_pairing(&rep.images.0, &rep.images.1, n).map_err(|e| e.to_string())?;
    let rhs = domain.weil_pairing(&basis.0, &basis.1, n).map_err(|e| e.to_string())?;
    if lhs != rhs.pow((rep.degree % n) as u128) {
        return Err("pairing law fails".into());
    }
    Ok(())
}

pub fn verify_report(pk: &Curve, m: &[u8], sig: &PlainSignature, mode: Mode, ps: &ParamSet, exec: Execution) -> RepReport {
    let e2 = match challenge_for(pk, &sig.e1, m, ps) {
        Ok(phi) => phi.codomain(),
        Err(e) => return RepReport { light: Err(e.to_string()), strict: None },
    };
    check_rep(&sig.rep, &sig.e1, &e2, ps.big_a(), mode, exec)
}

pub fn verify(pk: &Curve, m: &[u8], sig: &PlainSignature, mode: Mode, ps: &ParamSet) -> bool {
    verify_report(pk, m, sig, mode, ps, Execution::default()).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::same_cyclic_subgroup;
    use crate::params::{generate_params, ProfileSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn t0() -> ParamSet {
        generate_params(&ProfileSpec::t0(), &mut ChaCha20Rng::seed_from_u64(0)).unwrap()
    }

    #[test]
    fn hash_properties() {
        let j = Fp2::from_u64(1728, 26_879);
        assert_eq!(hash_to_challenge_index(&j, b"anything", 1), 1);
        assert_eq!(hash_to_challenge_index(&j, b"m", 12), hash_to_challenge_index(&j, b"m", 12));
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let mut buckets = [0u32; 12];
        for _ in 0..10_000 {
            let m: [u8; 16] = rng.gen();
            let h = hash_to_challenge_index(&j, &m, 12);
            assert!((1..=12).contains(&h));
            buckets[h as usize - 1] += 1;
        }
        // expected 833.3, sigma ~ 27.6
        for b in buckets {
            assert!((750..=917).contains(&b), "{buckets:?}");
        }
    }

    #[test]
    fn walks_enumerate_distinct_subgroups() {
        let ps = t0();
        let e = ps.e0;
        assert_eq!(mu(3), 4);
        let gens: Vec<Point> = (1..=4).map(|h| indexed_kernel(&e, h, 3).unwrap()).collect();
        for i in 0..4 {
            for j in 0..i {
                assert!(!same_cyclic_subgroup(&e, &gens[i], &gens[j], 3));
            }
        }
        assert!(matches!(challenge_walk(&e, 0, 3), Err(SigError::IndexOutOfRange { .. })));
        assert!(matches!(challenge_walk(&e, 5, 3), Err(SigError::IndexOutOfRange { .. })));
        assert!(matches!(challenge_walk(&e, 1, 15), Err(SigError::NotPrimePower(15))));
    }

    #[test]
    fn sign_and_verify() {
        let ps = t0();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let kp = keygen(&ps, &mut rng);
        assert_eq!(kp.sk.degree(), 35);
        assert_eq!(kp, keygen(&ps, &mut ChaCha20Rng::seed_from_u64(2)));
        let sig = sign(&kp, b"hello", &ps, &mut rng).unwrap();
        assert_eq!(sig.rep.degree, 35 * 35 * 3);
        assert!(verify(&kp.pk, b"hello", &sig, Mode::Light, &ps));
        assert!(verify(&kp.pk, b"hello", &sig, Mode::Strict, &ps));
        assert!(!verify(&kp.pk, b"hellp", &sig, Mode::Light, &ps));
        let other = keygen(&ps, &mut rng);
        assert!(!verify(&other.pk, b"hello", &sig, Mode::Light, &ps));
        let mut swapped = sig.clone();
        swapped.rep.images = (sig.rep.images.1, sig.rep.images.0);
        assert!(!verify(&kp.pk, b"hello", &swapped, Mode::Light, &ps));
        let mut negated = sig.clone();
        negated.rep.images.0 = sig.rep.codomain.neg(&sig.rep.images.0);
        negated.rep.images.1 = sig.rep.codomain.neg(&sig.rep.images.1);
        // [-1] composed keeps the pairing, recovery finds -sigma: still an isogeny
        assert!(verify(&kp.pk, b"hello", &negated, Mode::Strict, &ps));
        let mut one = sig.clone();
        one.rep.images.0 = sig.rep.codomain.neg(&sig.rep.images.0);
        assert!(!verify(&kp.pk, b"hello", &one, Mode::Light, &ps));
    }

    #[test]
    fn degree_at_t1() {
        let ps = generate_params(&ProfileSpec::t1(), &mut ChaCha20Rng::seed_from_u64(0)).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let kp = keygen(&ps, &mut rng);
        let sig = sign(&kp, b"t1", &ps, &mut rng).unwrap();
        assert_eq!(sig.rep.degree, 11_025);
        assert!(verify(&kp.pk, b"t1", &sig, Mode::Light, &ps));
    }
}
