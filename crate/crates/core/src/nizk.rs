//! Non-interactive proof that `E1 = Ew / <w(O)_b>` for a hidden choice
//! vector `b`: a parallel-square sigma protocol with `2^a` masks, made
//! non-interactive by hashing the corner curves.

use rand::Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::curve::{Curve, Point};
use crate::exec::{self, Execution};
use crate::isogeny::{isogeny_from_kernel, IsogenyError};
use crate::orientation::{oriented_generator, oriented_kernel, ChoiceVector, Orientation, OrientationError};
use crate::params::ParamSet;
use crate::sig::fixed_be;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NizkError {
    #[error("witness vector does not map the statement curve onto E1")]
    WitnessMismatch,
    #[error(transparent)]
    Orientation(#[from] OrientationError),
    #[error(transparent)]
    Isogeny(#[from] IsogenyError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NizkStatement {
    pub ew: Curve,
    pub oriented_image: Orientation,
    pub e1: Curve,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reveal {
    /// Challenge bit 0: mask kernels on `Ew` and on `E1`.
    Masks { m: Point, m_prime: Point },
    /// Challenge bit 1: kernel of the parallel isogeny `F -> F'`.
    Parallel { k: Point },
}

impl Reveal {
    pub fn tag(&self) -> u8 {
        match self {
            Reveal::Masks { .. } => 0,
            Reveal::Parallel { .. } => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Round {
    pub f: Curve,
    pub f_prime: Curve,
    pub reveal: Reveal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NizkProof {
    pub rounds: Vec<Round>,
}

fn absorb_fp2(h: &mut Sha256, x: &crate::field::Fp2) {
    let p = x.modulus();
    h.update(fixed_be(x.c0(), p));
    h.update(fixed_be(x.c1(), p));
}

fn absorb_curve(h: &mut Sha256, c: &Curve) {
    absorb_fp2(h, &c.a());
    absorb_fp2(h, &c.b());
}

fn absorb_point(h: &mut Sha256, pt: &Point) {
    match pt {
        Point::Infinity => h.update([0u8]),
        Point::Affine(x, y) => {
            h.update([1u8]);
            absorb_fp2(h, x);
            absorb_fp2(h, y);
        }
    }
}

/// Challenge bits from the statement and the corner j-invariants.
pub fn challenge_bits(stmt: &NizkStatement, corners: &[(Curve, Curve)]) -> Vec<bool> {
    let mut h = Sha256::new();
    h.update(b"parallel-square-nizk");
    absorb_curve(&mut h, &stmt.ew);
    absorb_curve(&mut h, &stmt.e1);
    for part in &stmt.oriented_image.parts {
        h.update(part.ell.to_be_bytes());
        absorb_point(&mut h, &part.g1);
        absorb_point(&mut h, &part.g2);
    }
    h.update((corners.len() as u64).to_be_bytes());
    for (f, fp) in corners {
        absorb_fp2(&mut h, &f.j_invariant());
        absorb_fp2(&mut h, &fp.j_invariant());
    }
    let seed = h.finalize();
    let mut bits = Vec::with_capacity(corners.len());
    let mut counter = 0u32;
    while bits.len() < corners.len() {
        let block = Sha256::new().chain_update(seed).chain_update(counter.to_be_bytes()).finalize();
        for byte in block {
            for i in (0..8).rev() {
                bits.push((byte >> i) & 1 == 1);
            }
        }
        counter += 1;
    }
    bits.truncate(corners.len());
    bits
}

fn random_exact_order(curve: &Curve, n: u64, rng: &mut impl Rng) -> Point {
    loop {
        let pt = curve.random_torsion_point(n, rng);
        if curve.has_exact_order(&pt, n) {
            return pt;
        }
    }
}

pub fn prove_parallel(
    stmt: &NizkStatement,
    b: &ChoiceVector,
    ps: &ParamSet,
    rng: &mut impl Rng,
) -> Result<NizkProof, NizkError> {
    prove_parallel_with(stmt, b, ps, rng, Execution::default())
}

pub fn prove_parallel_with(
    stmt: &NizkStatement,
    b: &ChoiceVector,
    ps: &ParamSet,
    rng: &mut impl Rng,
    exec: Execution,
) -> Result<NizkProof, NizkError> {
    let (big_a, big_b) = (ps.big_a(), stmt.oriented_image.order());
    let psi = isogeny_from_kernel(&stmt.ew, &oriented_kernel(&stmt.oriented_image, b)?, big_b)?;
    if psi.codomain() != stmt.e1 {
        return Err(NizkError::WitnessMismatch);
    }
    let k = oriented_generator(&stmt.oriented_image, b)?;
    let masks: Vec<Point> = (0..ps.nizk_rounds).map(|_| random_exact_order(&stmt.ew, big_a, rng)).collect();
    let commitments = exec::map(exec, masks, |m| -> Result<_, IsogenyError> {
        let mask = isogeny_from_kernel(&stmt.ew, &[m], big_a)?;
        let k_j = mask.eval(&k);
        let parallel = isogeny_from_kernel(&mask.codomain(), &[k_j], big_b)?;
        Ok((m, psi.eval(&m), k_j, mask.codomain(), parallel.codomain()))
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let corners: Vec<(Curve, Curve)> = commitments.iter().map(|c| (c.3, c.4)).collect();
    let bits = challenge_bits(stmt, &corners);
    let rounds = commitments
        .into_iter()
        .zip(bits)
        .map(|((m, m_prime, k_j, f, f_prime), bit)| Round {
            f,
            f_prime,
            reveal: if bit { Reveal::Parallel { k: k_j } } else { Reveal::Masks { m, m_prime } },
        })
        .collect();
    Ok(NizkProof { rounds })
}

/// Index of the first failing round, or `None` when the proof verifies.
pub fn first_failure(stmt: &NizkStatement, proof: &NizkProof, ps: &ParamSet, exec: Execution) -> Option<usize> {
    if proof.rounds.len() != ps.nizk_rounds {
        return Some(0);
    }
    let corners: Vec<(Curve, Curve)> = proof.rounds.iter().map(|r| (r.f, r.f_prime)).collect();
    let bits = challenge_bits(stmt, &corners);
    let (big_a, big_b) = (ps.big_a(), stmt.oriented_image.order());
    let checks = exec::map(exec, proof.rounds.iter().zip(bits).collect(), |(round, bit)| match (&round.reveal, bit) {
        (Reveal::Masks { m, m_prime }, false) => {
            stmt.ew.contains(m)
                && stmt.ew.has_exact_order(m, big_a)
                && stmt.e1.contains(m_prime)
                && stmt.e1.has_exact_order(m_prime, big_a)
                && isogeny_from_kernel(&stmt.ew, &[*m], big_a).is_ok_and(|c| c.codomain() == round.f)
                && isogeny_from_kernel(&stmt.e1, &[*m_prime], big_a)
                    .is_ok_and(|c| c.codomain().j_invariant() == round.f_prime.j_invariant())
        }
        (Reveal::Parallel { k }, true) => {
            round.f.contains(k)
                && round.f.has_exact_order(k, big_b)
                && isogeny_from_kernel(&round.f, &[*k], big_b).is_ok_and(|c| c.codomain() == round.f_prime)
        }
        _ => false,
    });
    checks.iter().position(|ok| !ok)
}

pub fn verify_parallel(stmt: &NizkStatement, proof: &NizkProof, ps: &ParamSet) -> bool {
    first_failure(stmt, proof, ps, Execution::default()).is_none()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{generate_params, ProfileSpec};
    use crate::relation::gen_r;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn setup(seed: u64) -> (ParamSet, NizkStatement, ChoiceVector) {
        let ps = generate_params(&ProfileSpec::t0(), &mut ChaCha20Rng::seed_from_u64(0)).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (_, s) = gen_r(&ps, &mut rng);
        let b = ChoiceVector::sample(2, &mut rng);
        let psi = isogeny_from_kernel(&s.ew, &oriented_kernel(&s.oriented_image, &b).unwrap(), 35).unwrap();
        let stmt = NizkStatement { ew: s.ew, oriented_image: s.oriented_image, e1: psi.codomain() };
        (ps, stmt, b)
    }

    #[test]
    fn completeness_and_determinism() {
        let (ps, stmt, b) = setup(1);
        let proof = prove_parallel(&stmt, &b, &ps, &mut ChaCha20Rng::seed_from_u64(7)).unwrap();
        assert_eq!(proof.rounds.len(), 24);
        assert!(verify_parallel(&stmt, &proof, &ps));
        let again = prove_parallel_with(&stmt, &b, &ps, &mut ChaCha20Rng::seed_from_u64(7), Execution::Sequential).unwrap();
        assert_eq!(proof, again);
        let tags: Vec<u8> = proof.rounds.iter().map(|r| r.reveal.tag()).collect();
        assert!(tags.contains(&0) && tags.contains(&1));
    }

    #[test]
    fn wrong_vector_is_rejected_at_prove_time() {
        let (ps, stmt, b) = setup(2);
        let flipped = ChoiceVector::new(b.entries().iter().map(|&x| 3 - x).collect()).unwrap();
        let res = prove_parallel(&stmt, &flipped, &ps, &mut ChaCha20Rng::seed_from_u64(1));
        assert_eq!(res, Err(NizkError::WitnessMismatch));
    }

    #[test]
    fn tampering_breaks_verification() {
        let (ps, stmt, b) = setup(3);
        let proof = prove_parallel(&stmt, &b, &ps, &mut ChaCha20Rng::seed_from_u64(2)).unwrap();
        let mut corner = proof.clone();
        corner.rounds[0].f = stmt.e1;
        assert!(!verify_parallel(&stmt, &corner, &ps));
        let mut shuffled = proof.clone();
        shuffled.rounds.swap(0, 1);
        if shuffled != proof {
            assert!(!verify_parallel(&stmt, &shuffled, &ps));
        }
        let (_, other, _) = setup(4);
        let forged = NizkStatement { e1: other.e1, ..stmt.clone() };
        assert!(!verify_parallel(&forged, &proof, &ps));
    }
}
