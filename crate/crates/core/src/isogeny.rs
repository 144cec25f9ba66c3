//! Separable isogenies as explicit chains of prime-degree Vélu steps (with
//! isomorphism steps where codomains must be pinned), plus duals,
//! push-forwards, pull-backs and torsion-image representations.

use thiserror::Error;

use crate::arith::{factorize, gcd};
use crate::curve::{Curve, CurveError, Isomorphism, Point};
use crate::dlog::{decompose_2d, DlogError};
use crate::field::Fp2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IsogenyError {
    #[error("bad kernel: {0}")]
    BadKernel(String),
    #[error("point is not on the domain curve")]
    PointNotOnCurve,
    #[error("domain mismatch")]
    DomainMismatch,
    #[error("degrees {0} and {1} are not coprime")]
    NonCoprimeDegrees(u64, u64),
    #[error("no preimage for the requested kernel")]
    NoPreimage,
    #[error("{0}-torsion is not rational on this curve")]
    TorsionUnavailable(u64),
    #[error("no isomorphism makes the square commute")]
    NoCommutingIsomorphism,
    #[error(transparent)]
    Curve(#[from] CurveError),
}

impl From<DlogError> for IsogenyError {
    fn from(_: DlogError) -> Self {
        IsogenyError::NoPreimage
    }
}

/// One Vélu step of prime degree `ell` with kernel `<kernel>`.
#[derive(Clone, Debug)]
pub struct VeluStep {
    ell: u64,
    kernel: Point,
    domain: Curve,
    codomain: Curve,
    /// `(x_Q, v_Q, u_Q)` over one representative of each `±Q` in the kernel.
    terms: Vec<(Fp2, Fp2, Fp2)>,
}

impl PartialEq for VeluStep {
    fn eq(&self, other: &Self) -> bool {
        self.ell == other.ell && self.kernel == other.kernel && self.domain == other.domain
    }
}

impl VeluStep {
    pub fn new(domain: Curve, kernel: Point, ell: u64) -> Result<Self, IsogenyError> {
        if !domain.contains(&kernel) {
            return Err(IsogenyError::PointNotOnCurve);
        }
        if !crate::arith::is_prime(ell) || !domain.has_exact_order(&kernel, ell) {
            return Err(IsogenyError::BadKernel(format!("kernel point does not have prime order {ell}")));
        }
        let p = domain.modulus();
        let three = Fp2::from_u64(3, p);
        let mut terms = Vec::new();
        let half = if ell == 2 { 1 } else { (ell - 1) / 2 };
        let mut q = kernel;
        for _ in 0..half {
            let Point::Affine(xq, yq) = q else { unreachable!("multiples below the order are affine") };
            let gx = three * xq.square() + domain.a();
            let (v, u) = if yq.is_zero() {
                (gx, Fp2::zero(p))
            } else {
                (gx.double(), (yq.double()).square())
            };
            terms.push((xq, v, u));
            q = domain.add(&q, &kernel);
        }
        let v_sum = terms.iter().fold(Fp2::zero(p), |acc, t| acc + t.1);
        let w_sum = terms.iter().fold(Fp2::zero(p), |acc, t| acc + t.2 + t.0 * t.1);
        let codomain = Curve::new(
            domain.a() - Fp2::from_u64(5, p) * v_sum,
            domain.b() - Fp2::from_u64(7, p) * w_sum,
        )?;
        Ok(VeluStep { ell, kernel, domain, codomain, terms })
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn kernel(&self) -> Point {
        self.kernel
    }

    pub fn domain(&self) -> Curve {
        self.domain
    }

    pub fn codomain(&self) -> Curve {
        self.codomain
    }

    /// `X = x + sum(v/(x-xQ) + u/(x-xQ)^2)`, `Y = y * dX/dx`.
    pub fn eval(&self, pt: &Point) -> Point {
        let (x, y) = match pt {
            Point::Infinity => return Point::Infinity,
            Point::Affine(x, y) => (*x, *y),
        };
        let p = x.modulus();
        let mut big_x = x;
        let mut dx = Fp2::one(p);
        for &(xq, v, u) in &self.terms {
            let diff = x - xq;
            if diff.is_zero() {
                return Point::Infinity;
            }
            let inv = diff.inv().expect("nonzero");
            let inv2 = inv.square();
            big_x += v * inv + u * inv2;
            dx -= v * inv2 + (u * inv2 * inv).double();
        }
        Point::Affine(big_x, y * dx)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    Velu(VeluStep),
    Iso(Isomorphism),
}

impl Step {
    pub fn domain(&self) -> Curve {
        match self {
            Step::Velu(s) => s.domain,
            Step::Iso(i) => i.domain,
        }
    }

    pub fn codomain(&self) -> Curve {
        match self {
            Step::Velu(s) => s.codomain,
            Step::Iso(i) => i.codomain,
        }
    }

    pub fn eval(&self, pt: &Point) -> Point {
        match self {
            Step::Velu(s) => s.eval(pt),
            Step::Iso(i) => i.apply(pt),
        }
    }

    pub fn degree(&self) -> u64 {
        match self {
            Step::Velu(s) => s.ell,
            Step::Iso(_) => 1,
        }
    }
}

/// A separable isogeny `domain -> codomain` as an ordered list of steps.
#[derive(Clone, Debug, PartialEq)]
pub struct IsogenyChain {
    domain: Curve,
    codomain: Curve,
    steps: Vec<Step>,
}

impl IsogenyChain {
    pub fn identity(curve: Curve) -> Self {
        IsogenyChain { domain: curve, codomain: curve, steps: Vec::new() }
    }

    /// Rebuild a chain from serialized steps, recomputing every codomain.
    pub fn from_steps(domain: Curve, steps: Vec<Step>) -> Result<Self, IsogenyError> {
        let mut cur = domain;
        for s in &steps {
            if s.domain() != cur {
                return Err(IsogenyError::DomainMismatch);
            }
            cur = s.codomain();
        }
        Ok(IsogenyChain { domain, codomain: cur, steps })
    }

    pub fn domain(&self) -> Curve {
        self.domain
    }

    pub fn codomain(&self) -> Curve {
        self.codomain
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn degree(&self) -> u64 {
        self.steps.iter().map(Step::degree).product()
    }

    pub fn evaluate(&self, pt: &Point) -> Result<Point, IsogenyError> {
        if !self.domain.contains(pt) {
            return Err(IsogenyError::PointNotOnCurve);
        }
        Ok(self.eval(pt))
    }

    /// Evaluation without the on-curve check.
    pub fn eval(&self, pt: &Point) -> Point {
        self.steps.iter().fold(*pt, |acc, s| s.eval(&acc))
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &IsogenyChain) -> Result<IsogenyChain, IsogenyError> {
        if next.domain != self.codomain {
            return Err(IsogenyError::DomainMismatch);
        }
        let mut steps = self.steps.clone();
        steps.extend(next.steps.iter().cloned());
        Ok(IsogenyChain { domain: self.domain, codomain: next.codomain, steps })
    }

    pub fn then_iso(&self, iso: Isomorphism) -> Result<IsogenyChain, IsogenyError> {
        if iso.domain != self.codomain {
            return Err(IsogenyError::DomainMismatch);
        }
        let mut steps = self.steps.clone();
        steps.push(Step::Iso(iso));
        Ok(IsogenyChain { domain: self.domain, codomain: iso.codomain, steps })
    }

    /// The dual `codomain -> domain` with `dual ∘ self = [deg]` exactly.
    pub fn dual(&self) -> Result<IsogenyChain, IsogenyError> {
        let mut steps = Vec::new();
        for step in self.steps.iter().rev() {
            match step {
                Step::Iso(iso) => steps.push(Step::Iso(iso.inverse())),
                Step::Velu(s) => steps.extend(dual_velu(s)?),
            }
        }
        Ok(IsogenyChain { domain: self.codomain, codomain: self.domain, steps })
    }

    /// Generators of the kernel as rational points of the domain. Needs every
    /// prime-power part of the degree to have rational torsion.
    pub fn kernel_generators(&self) -> Result<Vec<Point>, IsogenyError> {
        let mut gens = Vec::new();
        for (ell, e) in factorize(self.degree()) {
            let n = ell.pow(e);
            let basis = self.domain.torsion_basis(n).map_err(|_| IsogenyError::TorsionUnavailable(n))?;
            let target = self.codomain.torsion_basis(n).map_err(|_| IsogenyError::TorsionUnavailable(n))?;
            let iu = self.eval(&basis.0);
            let iv = self.eval(&basis.1);
            let (a, b) = decompose_2d(&self.codomain, &target.0, &target.1, &iu, n)?.pair();
            let (c, d) = decompose_2d(&self.codomain, &target.0, &target.1, &iv, n)?.pair();
            let kernel: Vec<(u64, u64)> = (0..n)
                .flat_map(|x| (0..n).map(move |y| (x, y)))
                .filter(|&(x, y)| {
                    (x as u128 * a as u128 + y as u128 * c as u128).is_multiple_of(n as u128)
                        && (x as u128 * b as u128 + y as u128 * d as u128).is_multiple_of(n as u128)
                })
                .collect();
            // primary parts have coprime orders, so summing them slot-wise
            // still generates their direct sum
            for (slot, (x, y)) in subgroup_generators(&kernel, n).into_iter().enumerate() {
                let g = self.domain.lin_comb(&basis.0, x, &basis.1, y);
                match gens.get_mut(slot) {
                    Some(acc) => *acc = self.domain.add(acc, &g),
                    None => gens.push(g),
                }
            }
        }
        Ok(gens)
    }

    /// True if `pt` lies in the kernel.
    pub fn kills(&self, pt: &Point) -> bool {
        self.eval(pt).is_infinity()
    }
}

fn element_order(x: u64, y: u64, n: u64) -> u64 {
    n / gcd(gcd(x, y), n)
}

/// Small generating set of a subgroup of `(Z/n)^2` given by its elements.
fn subgroup_generators(elements: &[(u64, u64)], n: u64) -> Vec<(u64, u64)> {
    use std::collections::HashSet;
    let mut span: HashSet<(u64, u64)> = HashSet::from([(0, 0)]);
    let mut gens = Vec::new();
    while span.len() < elements.len() {
        let g = elements
            .iter()
            .filter(|e| !span.contains(e))
            .max_by_key(|&&(x, y)| element_order(x, y, n))
            .copied()
            .expect("span is a proper subset");
        let mut next = span.clone();
        for &(sx, sy) in &span {
            let (mut cx, mut cy) = (sx, sy);
            loop {
                cx = (cx + g.0) % n;
                cy = (cy + g.1) % n;
                if !next.insert((cx, cy)) {
                    break;
                }
            }
        }
        span = next;
        gens.push(g);
    }
    gens
}

/// `[dual step, isomorphism]` such that their composition after `s` is `[ell]`.
/// A point of `E[l]` outside the kernel of `s`. For `l = 2` the other roots
/// of the cubic solve `x^2 + x_K x + x_K^2 + a = 0`.
fn torsion_point_off_kernel(s: &VeluStep) -> Result<Point, IsogenyError> {
    if let (2, Point::Affine(xk, _)) = (s.ell, s.kernel) {
        let p = xk.modulus();
        let disc = -(Fp2::from_u64(3, p) * xk.square() + Fp2::from_u64(4, p) * s.domain.a());
        let root = disc.sqrt().ok_or(IsogenyError::TorsionUnavailable(2))?;
        let x = (root - xk) * Fp2::from_u64(2, p).inv().expect("p is odd");
        return Ok(Point::Affine(x, Fp2::zero(p)));
    }
    let (u, v) = s.domain.torsion_basis(s.ell)?;
    Ok(if !s.eval(&u).is_infinity() { u } else { v })
}

fn dual_velu(s: &VeluStep) -> Result<Vec<Step>, IsogenyError> {
    let t = torsion_point_off_kernel(s)?;
    let back = VeluStep::new(s.codomain, s.eval(&t), s.ell)?;
    let isos = back.codomain.isomorphisms_to(&s.domain);
    let iso = pick_commuting_iso(&s.domain, &isos, |r| back.eval(&s.eval(r)), |r| s.domain.mul_u64(r, s.ell))?;
    Ok(vec![Step::Velu(back), Step::Iso(iso)])
}

/// Among `isos: X -> E`, the unique one with `iso(lhs(R)) = rhs(R)` for
/// sample points `R` of `E` (skipping points where several agree).
pub(crate) fn pick_commuting_iso(
    sample_curve: &Curve,
    isos: &[Isomorphism],
    lhs: impl Fn(&Point) -> Point,
    rhs: impl Fn(&Point) -> Point,
) -> Result<Isomorphism, IsogenyError> {
    if isos.is_empty() {
        return Err(IsogenyError::NoCommutingIsomorphism);
    }
    for r in sample_curve.scan_points().take(64) {
        let want = rhs(&r);
        let have = lhs(&r);
        let matching: Vec<&Isomorphism> = isos.iter().filter(|i| i.apply(&have) == want).collect();
        match matching.len() {
            0 => return Err(IsogenyError::NoCommutingIsomorphism),
            1 => return Ok(*matching[0]),
            _ => continue,
        }
    }
    Err(IsogenyError::NoCommutingIsomorphism)
}

/// Isogeny with kernel generated by `gens`, of the stated degree, decomposed
/// into prime steps in ascending prime order.
pub fn isogeny_from_kernel(curve: &Curve, gens: &[Point], degree: u64) -> Result<IsogenyChain, IsogenyError> {
    for g in gens {
        if !curve.contains(g) {
            return Err(IsogenyError::PointNotOnCurve);
        }
    }
    if degree == 0 {
        return Err(IsogenyError::BadKernel("degree must be positive".into()));
    }
    let mut cur = *curve;
    let mut gens: Vec<Point> = gens.to_vec();
    let mut remaining = degree;
    let mut steps = Vec::new();
    for (ell, e) in factorize(degree) {
        for _ in 0..e {
            if gens.iter().any(|g| !cur.mul_u64(g, remaining).is_infinity()) {
                return Err(IsogenyError::BadKernel(format!("generators not killed by {remaining}")));
            }
            let mut ell_part = remaining;
            while ell_part.is_multiple_of(ell) {
                ell_part /= ell;
            }
            let kernel_point = gens.iter().find_map(|g| {
                let h = cur.mul_u64(g, ell_part);
                if h.is_infinity() {
                    return None;
                }
                let ord = cur.order_dividing(&h, remaining / ell_part).ok()?;
                Some(cur.mul_u64(&h, ord / ell))
            });
            let Some(k) = kernel_point else {
                return Err(IsogenyError::BadKernel(format!("subgroup is smaller than {degree}")));
            };
            let step = VeluStep::new(cur, k, ell)?;
            gens = gens.iter().map(|g| step.eval(g)).collect();
            cur = step.codomain;
            remaining /= ell;
            steps.push(Step::Velu(step));
        }
    }
    if gens.iter().any(|g| !g.is_infinity()) {
        return Err(IsogenyError::BadKernel(format!("subgroup is larger than {degree}")));
    }
    Ok(IsogenyChain { domain: *curve, codomain: cur, steps })
}

/// `[phi2]_* phi1`: the isogeny from `codomain(phi2)` with kernel `phi2(ker phi1)`.
pub fn push_forward(phi2: &IsogenyChain, phi1: &IsogenyChain) -> Result<IsogenyChain, IsogenyError> {
    if phi1.domain != phi2.domain {
        return Err(IsogenyError::DomainMismatch);
    }
    let (d1, d2) = (phi1.degree(), phi2.degree());
    if gcd(d1, d2) != 1 {
        return Err(IsogenyError::NonCoprimeDegrees(d1, d2));
    }
    let gens: Vec<Point> = phi1.kernel_generators()?.iter().map(|g| phi2.eval(g)).collect();
    isogeny_from_kernel(&phi2.codomain, &gens, d1)
}

/// `phi1` on `domain(phi2)` with `[phi2]_* phi1 = psi1`.
pub fn pull_back(phi2: &IsogenyChain, psi1: &IsogenyChain) -> Result<IsogenyChain, IsogenyError> {
    if psi1.domain != phi2.codomain {
        return Err(IsogenyError::DomainMismatch);
    }
    let (d1, d2) = (psi1.degree(), phi2.degree());
    if gcd(d1, d2) != 1 {
        return Err(IsogenyError::NonCoprimeDegrees(d1, d2));
    }
    if d1 == 1 {
        return Ok(IsogenyChain::identity(phi2.domain));
    }
    let basis = phi2.domain.torsion_basis(d1).map_err(|_| IsogenyError::TorsionUnavailable(d1))?;
    let images = (phi2.eval(&basis.0), phi2.eval(&basis.1));
    pull_back_via_basis(&phi2.domain, &basis, &phi2.codomain, &images, &psi1.kernel_generators()?, d1)
}

/// Pull a kernel back using only a basis of `E[n]` and its images: each
/// generator `[x]U' + [y]V'` on the target becomes `[x]U + [y]V`.
pub fn pull_back_via_basis(
    curve: &Curve,
    basis: &(Point, Point),
    target: &Curve,
    images: &(Point, Point),
    kernel_gens: &[Point],
    n: u64,
) -> Result<IsogenyChain, IsogenyError> {
    let mut gens = Vec::with_capacity(kernel_gens.len());
    for g in kernel_gens {
        let dec = decompose_2d(target, &images.0, &images.1, g, n)?;
        gens.push(curve.lin_comb(&basis.0, dec.x, &basis.1, dec.y));
    }
    isogeny_from_kernel(curve, &gens, n)
}

/// Torsion-image representation: the images of the canonical basis of
/// `domain[basis_order]` plus the degree.
#[derive(Clone, Debug, PartialEq)]
pub struct EfficientRep {
    pub domain: Curve,
    pub codomain: Curve,
    pub degree: u64,
    pub basis_order: u64,
    pub images: (Point, Point),
}

impl EfficientRep {
    /// Evaluate on `domain[basis_order]` by decomposing in the canonical basis.
    pub fn evaluate_torsion(&self, pt: &Point) -> Result<Point, IsogenyError> {
        let basis = self.domain.torsion_basis(self.basis_order)?;
        let dec = decompose_2d(&self.domain, &basis.0, &basis.1, pt, self.basis_order)?;
        Ok(self.codomain.lin_comb(&self.images.0, dec.x, &self.images.1, dec.y))
    }
}

pub fn efficient_rep(phi: &IsogenyChain, n: u64) -> Result<EfficientRep, IsogenyError> {
    let basis = phi.domain.torsion_basis(n)?;
    Ok(EfficientRep {
        domain: phi.domain,
        codomain: phi.codomain,
        degree: phi.degree(),
        basis_order: n,
        images: (phi.eval(&basis.0), phi.eval(&basis.1)),
    })
}
