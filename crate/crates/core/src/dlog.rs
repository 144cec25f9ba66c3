//! Extraction and verification oracles: discrete logarithms among roots of
//! unity (Pohlig-Hellman), two-dimensional basis decomposition through the
//! Weil pairing, and exhaustive isogeny recovery from torsion images.

use log::debug;
use thiserror::Error;

use crate::arith::{crt, factorize, gcd};
use crate::curve::{root_has_exact_order, same_cyclic_subgroup, Curve, Point};
use crate::exec::{self, Execution};
use crate::field::Fp2;
use crate::isogeny::{EfficientRep, IsogenyChain, Step, VeluStep};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DlogError {
    #[error("points do not form a basis of E[{0}]")]
    NotABasis(u64),
    #[error("point is not killed by {0}")]
    OrderMismatch(u64),
    #[error("element is not in the subgroup generated by the base")]
    NotInSubgroup,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecoveryError {
    #[error("no isogeny of degree {0} matches the torsion images")]
    NotFound(u64),
    #[error("uniqueness bound violated: degree {degree}, basis order {order}")]
    AmbiguityBound { degree: u64, order: u64 },
    #[error("{0}-torsion needed by the search is not rational")]
    TorsionUnavailable(u64),
}

/// Discrete log of `h` to base `g`, where `g` has exact order `n`.
pub fn dlog_root_of_unity(g: &Fp2, h: &Fp2, n: u64) -> Result<u64, DlogError> {
    let mut residues = Vec::new();
    for (ell, e) in factorize(n) {
        let pe = ell.pow(e);
        let cof = (n / pe) as u128;
        let gi = g.pow(cof);
        let hi = h.pow(cof);
        let gamma = gi.pow(pe as u128 / ell as u128);
        let gi_inv = gi.inv().map_err(|_| DlogError::NotInSubgroup)?;
        let mut x = 0u64;
        let mut scale = 1u64;
        for k in 0..e {
            let shifted = hi * gi_inv.pow(x as u128);
            let hk = shifted.pow((pe / scale / ell) as u128);
            let d = (0..ell).find(|&d| gamma.pow(d as u128) == hk).ok_or(DlogError::NotInSubgroup)?;
            x += d * scale;
            if k + 1 < e {
                scale *= ell;
            }
        }
        residues.push((x, pe));
    }
    let x = crt(&residues);
    if g.pow(x as u128) != *h {
        return Err(DlogError::NotInSubgroup);
    }
    Ok(x)
}

/// `T = [x]U + [y]V` with `x, y` reduced mod `N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasisDecomposition {
    pub x: u64,
    pub y: u64,
}

impl BasisDecomposition {
    pub fn pair(self) -> (u64, u64) {
        (self.x, self.y)
    }
}

/// Decompose `t` in the basis `(u, v)` of `E[n]`:
/// `e(T, V) = e(U, V)^x` and `e(U, T) = e(U, V)^y`.
pub fn decompose_2d(curve: &Curve, u: &Point, v: &Point, t: &Point, n: u64) -> Result<BasisDecomposition, DlogError> {
    if n == 1 {
        return Ok(BasisDecomposition { x: 0, y: 0 });
    }
    if !curve.mul_u64(t, n).is_infinity() {
        return Err(DlogError::OrderMismatch(n));
    }
    let base = curve.weil_pairing(u, v, n).map_err(|_| DlogError::NotABasis(n))?;
    if !root_has_exact_order(&base, n) {
        return Err(DlogError::NotABasis(n));
    }
    let etv = curve.weil_pairing(t, v, n).map_err(|_| DlogError::OrderMismatch(n))?;
    let eut = curve.weil_pairing(u, t, n).map_err(|_| DlogError::OrderMismatch(n))?;
    let x = dlog_root_of_unity(&base, &etv, n)?;
    let y = dlog_root_of_unity(&base, &eut, n)?;
    Ok(BasisDecomposition { x, y })
}

/// Number of isogenies of degree `d` out of a fixed curve, up to
/// post-composition with isomorphisms: per prime power `l^e`, the maps
/// `[l^k] ∘ (cyclic of degree l^(e-2k))`.
pub fn candidate_count(degree: u64) -> u64 {
    factorize(degree)
        .into_iter()
        .map(|(ell, e)| (0..=e / 2).map(|k| cyclic_walk_count(ell, e - 2 * k)).sum::<u64>())
        .product()
}

fn cyclic_walk_count(ell: u64, m: u32) -> u64 {
    if m == 0 {
        1
    } else {
        (ell + 1) * ell.pow(m - 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecoveryStats {
    pub candidates: u64,
    pub matches: u64,
}

/// Search node: a partial walk with the images of the domain's basis.
#[derive(Clone)]
struct Node {
    curve: Curve,
    steps: Vec<Step>,
    images: (Point, Point),
    /// Generator of the backtracking kernel on `curve`, if the last move
    /// was a step of the prime currently being walked.
    back: Option<Point>,
    scalar: u64,
}

pub fn recover_isogeny(rep: &EfficientRep) -> Result<IsogenyChain, RecoveryError> {
    recover_isogeny_with(rep, Execution::default()).map(|(chain, _)| chain)
}

/// The unique isogeny of degree `rep.degree` out of `rep.domain` whose action
/// on the canonical `rep.basis_order` basis equals `rep.images`.
pub fn recover_isogeny_with(rep: &EfficientRep, exec: Execution) -> Result<(IsogenyChain, RecoveryStats), RecoveryError> {
    let (q, n) = (rep.degree, rep.basis_order);
    if q == 0 || 4 * q as u128 >= (n as u128) * (n as u128) || gcd(q, n) != 1 {
        return Err(RecoveryError::AmbiguityBound { degree: q, order: n });
    }
    let p = rep.domain.modulus();
    let stages = factorize(q);
    if let Some(&(ell, _)) = stages.iter().find(|(ell, _)| !(p + 1).is_multiple_of(*ell)) {
        return Err(RecoveryError::TorsionUnavailable(ell));
    }
    if !rep.codomain.contains(&rep.images.0) || !rep.codomain.contains(&rep.images.1) {
        return Err(RecoveryError::NotFound(q));
    }
    let basis = rep.domain.torsion_basis(n).map_err(|_| RecoveryError::TorsionUnavailable(n))?;
    let root = Node { curve: rep.domain, steps: Vec::new(), images: basis, back: None, scalar: 1 };

    let mut frontier = vec![root];
    let (last, init) = match stages.split_last() {
        Some((last, init)) => (Some(*last), init),
        None => (None, &[][..]),
    };
    for &(ell, e) in init {
        frontier = exec::flat_map(exec, frontier, |node| expand_prime_power(node, ell, e));
    }
    let leaves_per_node: Vec<Vec<(u64, Option<IsogenyChain>)>> = exec::map(exec, frontier, |node| {
        let leaves = match last {
            Some((ell, e)) => expand_prime_power(node, ell, e),
            None => vec![node],
        };
        leaves.into_iter().map(|leaf| (1, match_leaf(leaf, rep))).collect()
    });
    let mut stats = RecoveryStats { candidates: 0, matches: 0 };
    let mut found = None;
    for (count, hit) in leaves_per_node.into_iter().flatten() {
        stats.candidates += count;
        if let Some(chain) = hit {
            stats.matches += 1;
            found.get_or_insert(chain);
        }
    }
    debug!("recovery of degree {q}: {} candidates, {} matches", stats.candidates, stats.matches);
    match found {
        Some(chain) => Ok((chain, stats)),
        None => Err(RecoveryError::NotFound(q)),
    }
}

/// All `[l^k] ∘ walk` continuations of `node` for one prime power.
fn expand_prime_power(node: Node, ell: u64, e: u32) -> Vec<Node> {
    let start = Node { back: None, ..node };
    let mut out = Vec::new();
    for k in 0..=e / 2 {
        let mut layer = vec![start.clone()];
        for _ in 0..e - 2 * k {
            layer = layer.into_iter().flat_map(|n| walk_step(&n, ell)).collect();
        }
        let mult = ell.pow(k);
        out.extend(layer.into_iter().map(|mut n| {
            n.images = (n.curve.mul_u64(&n.images.0, mult), n.curve.mul_u64(&n.images.1, mult));
            n.scalar *= mult;
            n.back = None;
            n
        }));
    }
    out
}

/// Non-backtracking `ell`-steps from `node`, in canonical kernel order.
fn walk_step(node: &Node, ell: u64) -> Vec<Node> {
    let Ok(basis) = node.curve.torsion_basis(ell) else { return Vec::new() };
    let mut out = Vec::with_capacity(ell as usize + 1);
    for h in 1..=ell + 1 {
        let g = node.curve.indexed_cyclic_generator(&basis, ell, 1, h).expect("index in range");
        if let Some(back) = node.back {
            if same_cyclic_subgroup(&node.curve, &g, &back, ell) {
                continue;
            }
        }
        let Ok(step) = VeluStep::new(node.curve, g, ell) else { continue };
        let other = if h <= ell { basis.1 } else { basis.0 };
        let mut steps = node.steps.clone();
        let next = Node {
            curve: step.codomain(),
            images: (step.eval(&node.images.0), step.eval(&node.images.1)),
            back: Some(step.eval(&other)),
            scalar: node.scalar,
            steps: Vec::new(),
        };
        steps.push(Step::Velu(step));
        out.push(Node { steps, ..next });
    }
    out
}

fn match_leaf(leaf: Node, rep: &EfficientRep) -> Option<IsogenyChain> {
    if leaf.curve.j_invariant() != rep.codomain.j_invariant() {
        return None;
    }
    let iso = leaf
        .curve
        .isomorphisms_to(&rep.codomain)
        .into_iter()
        .find(|iso| iso.apply(&leaf.images.0) == rep.images.0 && iso.apply(&leaf.images.1) == rep.images.1)?;
    let walk = IsogenyChain::from_steps(rep.domain, leaf.steps).ok()?.then_iso(iso).ok()?;
    if leaf.scalar == 1 {
        return Some(walk);
    }
    walk.then(&scalar_chain(&rep.codomain, leaf.scalar)?).ok()
}

/// `[m]` on `curve` as a chain of prime steps and their duals.
pub fn scalar_chain(curve: &Curve, m: u64) -> Option<IsogenyChain> {
    let mut chain = IsogenyChain::identity(*curve);
    for (ell, e) in factorize(m) {
        for _ in 0..e {
            let (u, _) = curve.torsion_basis(ell).ok()?;
            let step = IsogenyChain::from_steps(*curve, vec![Step::Velu(VeluStep::new(*curve, u, ell).ok()?)]).ok()?;
            let there_and_back = step.then(&step.dual().ok()?).ok()?;
            chain = chain.then(&there_and_back).ok()?;
        }
    }
    Some(chain)
}

/// `x` with `a x = b (mod n)` when `a` is a unit mod `n`.
pub fn div_mod(b: u64, a: u64, n: u64) -> Option<u64> {
    crate::arith::inv_mod(a % n, n).map(|inv| crate::arith::mul_mod(b % n, inv, n))
}
