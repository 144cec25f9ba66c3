//! The hard relation: `w: E0 -> Ew = E0/<P + [alpha]Q>` together with the
//! transported orientation `w(O)`.

use rand::Rng;

use crate::curve::Curve;
use crate::isogeny::{isogeny_from_kernel, IsogenyChain, IsogenyError};
use crate::orientation::{orientation_image, Orientation};
use crate::params::ParamSet;

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub alpha: u64,
    pub chain: IsogenyChain,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Statement {
    pub ew: Curve,
    pub oriented_image: Orientation,
}

/// `E0/<P + [alpha]Q>`.
pub fn witness_chain(ps: &ParamSet, alpha: u64) -> Result<IsogenyChain, IsogenyError> {
    let c = ps.big_c();
    let (p, q) = ps.pq;
    let kernel = ps.e0.lin_comb(&p, 1, &q, alpha % c);
    isogeny_from_kernel(&ps.e0, &[kernel], c)
}

pub fn witness_from_alpha(ps: &ParamSet, alpha: u64) -> Witness {
    let alpha = alpha % ps.big_c();
    let chain = witness_chain(ps, alpha).expect("P + [alpha]Q has exact order C");
    Witness { alpha, chain }
}

pub fn statement_for(ps: &ParamSet, w: &Witness) -> Statement {
    let oriented_image = orientation_image(&w.chain, &ps.orientation).expect("gcd(B, C) = 1");
    Statement { ew: w.chain.codomain(), oriented_image }
}

pub fn gen_r(ps: &ParamSet, rng: &mut impl Rng) -> (Witness, Statement) {
    let w = witness_from_alpha(ps, rng.gen_range(0..ps.big_c()));
    let s = statement_for(ps, &w);
    (w, s)
}

/// Recomputes `E0/<P + [alpha]Q>` and accepts iff some isomorphism onto `Ew`
/// carries every transported orientation generator onto the stated one.
pub fn verify_relation(ps: &ParamSet, w: &Witness, s: &Statement) -> bool {
    let Ok(chain) = witness_chain(ps, w.alpha) else { return false };
    let Ok(image) = orientation_image(&chain, &ps.orientation) else { return false };
    if image.parts.len() != s.oriented_image.parts.len() || s.oriented_image.curve != s.ew {
        return false;
    }
    chain.codomain().isomorphisms_to(&s.ew).iter().any(|iso| {
        image.parts.iter().zip(&s.oriented_image.parts).all(|(mine, theirs)| {
            mine.ell == theirs.ell && iso.apply(&mine.g1) == theirs.g1 && iso.apply(&mine.g2) == theirs.g2
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{generate_params, ProfileSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn t0() -> ParamSet {
        generate_params(&ProfileSpec::t0(), &mut ChaCha20Rng::seed_from_u64(0)).unwrap()
    }

    #[test]
    fn every_alpha_round_trips() {
        let ps = t0();
        for alpha in 0..ps.big_c() {
            let w = witness_from_alpha(&ps, alpha);
            assert_eq!(w.chain.degree(), ps.big_c());
            assert!(w.chain.kills(&ps.e0.lin_comb(&ps.pq.0, 1, &ps.pq.1, alpha)));
            let s = statement_for(&ps, &w);
            assert!(verify_relation(&ps, &w, &s));
        }
        let (w, s) = gen_r(&ps, &mut ChaCha20Rng::seed_from_u64(9));
        assert!(verify_relation(&ps, &w, &s));
    }

    #[test]
    fn mismatches_are_rejected() {
        let ps = generate_params(&ProfileSpec::t1(), &mut ChaCha20Rng::seed_from_u64(0)).unwrap();
        let c = ps.big_c();
        let mut fingerprints = Vec::new();
        for alpha in 0..c {
            let w = witness_from_alpha(&ps, alpha);
            let s = statement_for(&ps, &w);
            let next = witness_from_alpha(&ps, alpha + 1);
            assert!(!verify_relation(&ps, &next, &s));
            let mut doubled = s.clone();
            doubled.oriented_image.parts[0].g1 = s.ew.double(&s.oriented_image.parts[0].g1);
            assert!(!verify_relation(&ps, &w, &doubled));
            fingerprints.push((s.ew.j_invariant(), s.oriented_image.parts.clone()));
        }
        let distinct = (0..fingerprints.len())
            .filter(|&i| !fingerprints[..i].contains(&fingerprints[i]))
            .count();
        assert!(distinct as u64 >= c - 1);
    }
}
