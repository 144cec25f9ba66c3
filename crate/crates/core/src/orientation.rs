//! Artificial orientations: per prime `l | B` two distinct cyclic subgroups
//! of order `l`, the oriented kernels selected by a choice vector, and their
//! transport along isogenies of coprime degree.

use rand::Rng;
use thiserror::Error;

use crate::arith::gcd;
use crate::curve::{same_cyclic_subgroup, Curve, Point};
use crate::isogeny::IsogenyChain;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrientationError {
    #[error("{0}-torsion is not rational on this curve")]
    TorsionUnavailable(u64),
    #[error("choice vector has length {got}, orientation has {want} primes")]
    LengthMismatch { got: usize, want: usize },
    #[error("choice entries must be 1 or 2")]
    BadChoice,
    #[error("isogeny degree {0} shares a factor with the orientation order {1}")]
    NonCoprimeDegree(u64, u64),
    #[error("invalid orientation: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrientedPrime {
    pub ell: u64,
    pub g1: Point,
    pub g2: Point,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orientation {
    pub curve: Curve,
    pub parts: Vec<OrientedPrime>,
}

/// `b in {1, 2}^t`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChoiceVector(Vec<u8>);

impl ChoiceVector {
    pub fn new(entries: Vec<u8>) -> Result<Self, OrientationError> {
        if entries.iter().any(|&b| b != 1 && b != 2) {
            return Err(OrientationError::BadChoice);
        }
        Ok(ChoiceVector(entries))
    }

    pub fn sample(t: usize, rng: &mut impl Rng) -> Self {
        ChoiceVector((0..t).map(|_| rng.gen_range(1..=2)).collect())
    }

    /// All `2^t` vectors in lexicographic order.
    pub fn all(t: usize) -> Vec<Self> {
        (0..1u32 << t)
            .map(|bits| ChoiceVector((0..t).map(|i| 1 + ((bits >> (t - 1 - i)) & 1) as u8).collect()))
            .collect()
    }

    pub fn entries(&self) -> &[u8] {
        &self.0
    }
}

impl Orientation {
    /// Product of the orientation primes.
    pub fn order(&self) -> u64 {
        self.parts.iter().map(|part| part.ell).product()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Checks orders, curve membership and that `<g1> != <g2>` per prime.
    pub fn validate(&self) -> Result<(), OrientationError> {
        let mut seen = Vec::new();
        for part in &self.parts {
            let ell = part.ell;
            if seen.contains(&ell) || !crate::arith::is_prime(ell) {
                return Err(OrientationError::Invalid(format!("prime {ell} repeated or not prime")));
            }
            seen.push(ell);
            for g in [&part.g1, &part.g2] {
                if !self.curve.contains(g) || !self.curve.has_exact_order(g, ell) {
                    return Err(OrientationError::Invalid(format!("generator for {ell} has wrong order")));
                }
            }
            if same_cyclic_subgroup(&self.curve, &part.g1, &part.g2, ell) {
                return Err(OrientationError::Invalid(format!("subgroups for {ell} intersect")));
            }
        }
        Ok(())
    }
}

/// Two distinct random cyclic subgroups per prime, each with a random
/// generator.
pub fn sample_orientation(curve: &Curve, primes: &[u64], rng: &mut impl Rng) -> Result<Orientation, OrientationError> {
    let mut parts = Vec::with_capacity(primes.len());
    for &ell in primes {
        let basis = curve.torsion_basis(ell).map_err(|_| OrientationError::TorsionUnavailable(ell))?;
        let h1 = rng.gen_range(1..=ell + 1);
        let h2 = loop {
            let h = rng.gen_range(1..=ell + 1);
            if h != h1 {
                break h;
            }
        };
        let gen = |h: u64, unit: u64| {
            let g = curve.indexed_cyclic_generator(&basis, ell, 1, h).expect("index in range");
            curve.mul_u64(&g, unit)
        };
        let g1 = gen(h1, rng.gen_range(1..ell));
        let g2 = gen(h2, rng.gen_range(1..ell));
        parts.push(OrientedPrime { ell, g1, g2 });
    }
    let o = Orientation { curve: *curve, parts };
    o.validate()?;
    Ok(o)
}

/// `<G^1_{b_1}, ..., G^t_{b_t}>` as one generator per prime.
pub fn oriented_kernel(o: &Orientation, b: &ChoiceVector) -> Result<Vec<Point>, OrientationError> {
    if b.0.len() != o.parts.len() {
        return Err(OrientationError::LengthMismatch { got: b.0.len(), want: o.parts.len() });
    }
    Ok(o.parts
        .iter()
        .zip(&b.0)
        .map(|(part, &bi)| if bi == 1 { part.g1 } else { part.g2 })
        .collect())
}

/// The oriented kernel as a single generator of order `B`.
pub fn oriented_generator(o: &Orientation, b: &ChoiceVector) -> Result<Point, OrientationError> {
    Ok(oriented_kernel(o, b)?.iter().fold(Point::Infinity, |acc, g| o.curve.add(&acc, g)))
}

pub fn orientation_image(phi: &IsogenyChain, o: &Orientation) -> Result<Orientation, OrientationError> {
    if phi.domain() != o.curve {
        return Err(OrientationError::Invalid("orientation is not on the isogeny domain".into()));
    }
    if gcd(phi.degree(), o.order()) != 1 {
        return Err(OrientationError::NonCoprimeDegree(phi.degree(), o.order()));
    }
    Ok(Orientation {
        curve: phi.codomain(),
        parts: o
            .parts
            .iter()
            .map(|part| OrientedPrime { ell: part.ell, g1: phi.eval(&part.g1), g2: phi.eval(&part.g2) })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isogeny::isogeny_from_kernel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    const P: u64 = 26_879;

    #[test]
    fn sampled_orientation_is_valid_and_deterministic() {
        let e0 = Curve::e0(P);
        let o1 = sample_orientation(&e0, &[5, 7], &mut ChaCha20Rng::seed_from_u64(3)).unwrap();
        let o2 = sample_orientation(&e0, &[5, 7], &mut ChaCha20Rng::seed_from_u64(3)).unwrap();
        assert_eq!(o1, o2);
        assert_eq!(o1.order(), 35);
        for part in &o1.parts {
            // trivial intersection by scanning every multiple
            for k in 1..part.ell {
                let m = e0.mul_u64(&part.g1, k);
                for j in 1..part.ell {
                    assert_ne!(m, e0.mul_u64(&part.g2, j));
                }
            }
        }
        let empty = sample_orientation(&e0, &[], &mut ChaCha20Rng::seed_from_u64(3)).unwrap();
        assert!(empty.is_empty());
        assert_eq!(oriented_generator(&empty, &ChoiceVector::new(vec![]).unwrap()).unwrap(), Point::Infinity);
    }

    #[test]
    fn oriented_kernels_are_distinct() {
        let e0 = Curve::e0(P);
        let o = sample_orientation(&e0, &[5, 7], &mut ChaCha20Rng::seed_from_u64(4)).unwrap();
        let vectors = ChoiceVector::all(2);
        assert_eq!(vectors.len(), 4);
        let gens: Vec<Point> = vectors.iter().map(|b| oriented_generator(&o, b).unwrap()).collect();
        for i in 0..4 {
            let psi = isogeny_from_kernel(&e0, &oriented_kernel(&o, &vectors[i]).unwrap(), 35).unwrap();
            assert_eq!(psi.degree(), 35);
            for j in 0..4 {
                assert_eq!(i == j, same_cyclic_subgroup(&e0, &gens[i], &gens[j], 35));
            }
        }
        let short = ChoiceVector::new(vec![1]).unwrap();
        assert_eq!(oriented_kernel(&o, &short), Err(OrientationError::LengthMismatch { got: 1, want: 2 }));
        assert!(ChoiceVector::new(vec![0, 1]).is_err());
    }

    #[test]
    fn transport_requires_coprime_degree() {
        let e0 = Curve::e0(P);
        let o = sample_orientation(&e0, &[5, 7], &mut ChaCha20Rng::seed_from_u64(5)).unwrap();
        let id = IsogenyChain::identity(e0);
        assert_eq!(orientation_image(&id, &o).unwrap(), o);
        let (k3, _) = e0.torsion_basis(3).unwrap();
        let w = isogeny_from_kernel(&e0, &[k3], 3).unwrap();
        let image = orientation_image(&w, &o).unwrap();
        image.validate().unwrap();
        let (k5, _) = e0.torsion_basis(5).unwrap();
        let phi5 = isogeny_from_kernel(&e0, &[k5], 5).unwrap();
        assert_eq!(orientation_image(&phi5, &o), Err(OrientationError::NonCoprimeDegree(5, 35)));
    }
}
