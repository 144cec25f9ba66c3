//! Pre-signing, pre-verification, adaptation and witness extraction.

use log::{debug, warn};
use rand::Rng;
use thiserror::Error;

use crate::arith::{crt, inv_mod, mul_mod};
use crate::curve::{Curve, Point};
use crate::dlog::{decompose_2d, div_mod, recover_isogeny_with, DlogError, RecoveryError};
use crate::exec::Execution;
use crate::isogeny::{efficient_rep, isogeny_from_kernel, pull_back_via_basis, EfficientRep, IsogenyError};
use crate::nizk::{first_failure, prove_parallel_with, NizkError, NizkProof, NizkStatement};
use crate::orientation::{oriented_kernel, ChoiceVector, OrientationError};
use crate::params::ParamSet;
use crate::relation::{verify_relation, Statement, Witness};
use crate::sig::{challenge_for, check_rep, KeyPair, Mode, PlainSignature, RepReport, SigError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresignError {
    #[error(transparent)]
    Orientation(#[from] OrientationError),
    #[error(transparent)]
    Isogeny(#[from] IsogenyError),
    #[error(transparent)]
    Nizk(#[from] NizkError),
    #[error(transparent)]
    Sig(#[from] SigError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdaptError {
    #[error("the witness isogeny does not land on E1")]
    WitnessStatementMismatch,
    #[error("pre-signature representation cannot be evaluated: {0}")]
    Representation(String),
    #[error(transparent)]
    Isogeny(#[from] IsogenyError),
}

/// Why extraction returned bottom.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("signature does not belong to this pre-signature")]
    CurveMismatch,
    #[error("torsion decomposition failed: {0}")]
    Decomposition(#[from] DlogError),
    #[error("recovery of the dual witness isogeny failed: {0}")]
    Recovery(#[from] RecoveryError),
    #[error("kernel coefficient {0} of psi(P) is not invertible")]
    NonInvertibleCoefficient(u64),
    #[error("isogeny computation failed: {0}")]
    Isogeny(#[from] IsogenyError),
    #[error("extracted witness is not in the relation")]
    RelationCheckFailed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreSignature {
    pub e1: Curve,
    pub proof: NizkProof,
    pub epsi: Curve,
    pub s: (Point, Point),
    pub rep_tilde: EfficientRep,
}

pub type AdaptedSignature = PlainSignature;

pub fn nizk_statement(s: &Statement, e1: &Curve) -> NizkStatement {
    NizkStatement { ew: s.ew, oriented_image: s.oriented_image.clone(), e1: *e1 }
}

pub fn presign(kp: &KeyPair, m: &[u8], s: &Statement, ps: &ParamSet, rng: &mut impl Rng) -> Result<PreSignature, PresignError> {
    presign_with(kp, m, s, ps, rng, Execution::default())
}

pub fn presign_with(
    kp: &KeyPair,
    m: &[u8],
    s: &Statement,
    ps: &ParamSet,
    rng: &mut impl Rng,
    exec: Execution,
) -> Result<PreSignature, PresignError> {
    let big_b = ps.big_b();
    let b = ChoiceVector::sample(ps.primes.len(), rng);
    let psi = isogeny_from_kernel(&ps.e0, &oriented_kernel(&ps.orientation, &b)?, big_b)?;
    let epsi = psi.codomain();
    let s_pts = (psi.eval(&ps.pq.0), psi.eval(&ps.pq.1));
    let psi_prime = isogeny_from_kernel(&s.ew, &oriented_kernel(&s.oriented_image, &b)?, big_b)?;
    let e1 = psi_prime.codomain();
    let proof = prove_parallel_with(&nizk_statement(s, &e1), &b, ps, rng, exec)?;
    let phi = challenge_for(&kp.pk, &e1, m, ps)?;
    let sigma_tilde = psi.dual()?.then(&kp.sk)?.then(&phi)?;
    let rep_tilde = efficient_rep(&sigma_tilde, ps.big_a())?;
    Ok(PreSignature { e1, proof, epsi, s: s_pts, rep_tilde })
}

/// The first failing pre-verification check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PreverifyFailure {
    /// S points malformed or the pairing identity with exponent `B` fails.
    TorsionPoints(String),
    Nizk(usize),
    Challenge(String),
    Representation(String),
    Recovery(RecoveryError),
}

impl std::fmt::Display for PreverifyFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PreverifyFailure::TorsionPoints(s) => write!(f, "check 1 (torsion points): {s}"),
            PreverifyFailure::Nizk(r) => write!(f, "check 2 (proof): round {r} fails"),
            PreverifyFailure::Challenge(s) => write!(f, "check 3 (challenge): {s}"),
            PreverifyFailure::Representation(s) => write!(f, "check 4 (representation): {s}"),
            PreverifyFailure::Recovery(e) => write!(f, "check 4 (strict recovery): {e}"),
        }
    }
}

pub fn preverify_report(
    pk: &Curve,
    m: &[u8],
    s: &Statement,
    presig: &PreSignature,
    mode: Mode,
    ps: &ParamSet,
    exec: Execution,
) -> Result<(), PreverifyFailure> {
    let c = ps.big_c();
    let (sp, sq) = presig.s;
    let epsi = presig.epsi;
    if !epsi.contains(&sp) || !epsi.contains(&sq) {
        return Err(PreverifyFailure::TorsionPoints("S is not on E_psi".into()));
    }
    if !epsi.has_exact_order(&sp, c) || !epsi.has_exact_order(&sq, c) {
        return Err(PreverifyFailure::TorsionPoints(format!("S points do not have order {c}")));
    }
    let lhs = epsi.weil_pairing(&sp, &sq, c).map_err(|e| PreverifyFailure::TorsionPoints(e.to_string()))?;
    let rhs = ps.e0.weil_pairing(&ps.pq.0, &ps.pq.1, c).expect("params basis has order C");
    if lhs != rhs.pow(ps.big_b() as u128) {
        return Err(PreverifyFailure::TorsionPoints("e_C(S) != e_C(P, Q)^B".into()));
    }
    if let Some(round) = first_failure(&nizk_statement(s, &presig.e1), &presig.proof, ps, exec) {
        return Err(PreverifyFailure::Nizk(round));
    }
    let phi = challenge_for(pk, &presig.e1, m, ps).map_err(|e| PreverifyFailure::Challenge(e.to_string()))?;
    let rep = &presig.rep_tilde;
    if rep.degree != ps.response_degree() {
        return Err(PreverifyFailure::Representation(format!("degree {} is not {}", rep.degree, ps.response_degree())));
    }
    let RepReport { light, strict } = check_rep(rep, &epsi, &phi.codomain(), ps.big_a(), mode, exec);
    light.map_err(PreverifyFailure::Representation)?;
    match strict {
        Some(Err(e)) => Err(PreverifyFailure::Recovery(e)),
        _ => Ok(()),
    }
}

pub fn preverify(pk: &Curve, m: &[u8], s: &Statement, presig: &PreSignature, mode: Mode, ps: &ParamSet) -> bool {
    preverify_report(pk, m, s, presig, mode, ps, Execution::default()).is_ok()
}

/// `sigma = sigma~ ∘ w'^` on the canonical `AC` basis of `E1`. The `A`-part
/// of each point goes through `rep_tilde`; the `C`-part needs `sigma~` on
/// `C`-torsion, obtained from `rep_tilde` by recovery.
pub fn adapt(presig: &PreSignature, w: &Witness, ps: &ParamSet) -> Result<AdaptedSignature, AdaptError> {
    adapt_with(presig, w, ps, Execution::default())
}

pub fn adapt_with(presig: &PreSignature, w: &Witness, ps: &ParamSet, exec: Execution) -> Result<AdaptedSignature, AdaptError> {
    let (a, c) = (ps.big_a(), ps.big_c());
    let epsi = presig.epsi;
    let kernel = epsi.lin_comb(&presig.s.0, 1, &presig.s.1, w.alpha % c);
    let w_prime = isogeny_from_kernel(&epsi, &[kernel], c)?;
    let iso = w_prime
        .codomain()
        .isomorphisms_to(&presig.e1)
        .into_iter()
        .next()
        .ok_or(AdaptError::WitnessStatementMismatch)?;
    let w_hat = w_prime.then_iso(iso)?.dual()?;
    let (sigma_tilde, _) = recover_isogeny_with(&presig.rep_tilde, exec).map_err(|e| AdaptError::Representation(e.to_string()))?;

    let n = a * c;
    let basis = presig.e1.torsion_basis(n).map_err(IsogenyError::from)?;
    // idempotents of Z/AC splitting a point into its A- and C-parts
    let e_a = crt(&[(1, a), (0, c)]);
    let e_c = crt(&[(0, a), (1, c)]);
    let codomain = presig.rep_tilde.codomain;
    let image = |pt: &Point| -> Result<Point, AdaptError> {
        let y = w_hat.eval(pt);
        let a_part = presig
            .rep_tilde
            .evaluate_torsion(&epsi.mul_u64(&y, e_a))
            .map_err(|e| AdaptError::Representation(e.to_string()))?;
        let c_part = sigma_tilde.eval(&epsi.mul_u64(&y, e_c));
        Ok(codomain.add(&a_part, &c_part))
    };
    let images = (image(&basis.0)?, image(&basis.1)?);
    Ok(PlainSignature {
        e1: presig.e1,
        rep: EfficientRep { domain: presig.e1, codomain, degree: presig.rep_tilde.degree * c, basis_order: n, images },
    })
}

/// Full-signature verification at toy scale: light checks on the `AC` basis
/// (strict recovery does not apply to adapted signatures).
pub fn verify_adapted(pk: &Curve, m: &[u8], sig: &AdaptedSignature, ps: &ParamSet) -> RepReport {
    let e2 = match challenge_for(pk, &sig.e1, m, ps) {
        Ok(phi) => phi.codomain(),
        Err(e) => return RepReport { light: Err(e.to_string()), strict: None },
    };
    check_rep(&sig.rep, &sig.e1, &e2, ps.big_a(), Mode::Light, Execution::default())
}

pub fn extract(sig: &AdaptedSignature, presig: &PreSignature, s: &Statement, ps: &ParamSet) -> Result<Witness, ExtractError> {
    extract_with(sig, presig, s, ps, Execution::default())
}

pub fn extract_with(
    sig: &AdaptedSignature,
    presig: &PreSignature,
    s: &Statement,
    ps: &ParamSet,
    exec: Execution,
) -> Result<Witness, ExtractError> {
    let res = extract_inner(sig, presig, s, ps, exec);
    match &res {
        Ok(w) => debug!("extracted alpha = {}", w.alpha),
        Err(e) => warn!("extraction returned bottom: {e}"),
    }
    res
}

fn extract_inner(
    sig: &AdaptedSignature,
    presig: &PreSignature,
    s: &Statement,
    ps: &ParamSet,
    exec: Execution,
) -> Result<Witness, ExtractError> {
    let (a, c) = (ps.big_a(), ps.big_c());
    let e1 = presig.e1;
    let epsi = presig.epsi;
    let rep = &sig.rep;
    if sig.e1 != e1
        || rep.domain != e1
        || rep.codomain != presig.rep_tilde.codomain
        || rep.basis_order != a * c
        || presig.rep_tilde.domain != epsi
        || presig.rep_tilde.basis_order != a
    {
        return Err(ExtractError::CurveMismatch);
    }
    let e2 = rep.codomain;
    if !e2.contains(&rep.images.0) || !e2.contains(&rep.images.1) {
        return Err(ExtractError::CurveMismatch);
    }
    // P1 = [C]P0, Q1 = [C]Q0 and sigma(P1), sigma(Q1)
    let (p0, q0) = e1.torsion_basis(a * c).map_err(IsogenyError::from)?;
    let (p1, q1) = (e1.mul_u64(&p0, c), e1.mul_u64(&q0, c));
    let (pp, qp) = (e2.mul_u64(&rep.images.0, c), e2.mul_u64(&rep.images.1, c));
    // sigma~ is injective on A-torsion, so coefficients in (sigma~ R1, sigma~ R2)
    // are those of w'^(P1), w'^(Q1) in (R1, R2)
    let (t1, t2) = presig.rep_tilde.images;
    let (r1, r2) = epsi.torsion_basis(a).map_err(IsogenyError::from)?;
    let dp = decompose_2d(&e2, &t1, &t2, &pp, a)?;
    let dq = decompose_2d(&e2, &t1, &t2, &qp, a)?;
    let wp = epsi.lin_comb(&r1, dp.x, &r2, dp.y);
    let wq = epsi.lin_comb(&r1, dq.x, &r2, dq.y);
    // rewrite on the canonical A-basis of E1
    let (u, v) = e1.torsion_basis(a).map_err(IsogenyError::from)?;
    let du = decompose_2d(&e1, &p1, &q1, &u, a)?;
    let dv = decompose_2d(&e1, &p1, &q1, &v, a)?;
    let w_hat_rep = EfficientRep {
        domain: e1,
        codomain: epsi,
        degree: c,
        basis_order: a,
        images: (epsi.lin_comb(&wp, du.x, &wq, du.y), epsi.lin_comb(&wp, dv.x, &wq, dv.y)),
    };
    let (w_hat, _) = recover_isogeny_with(&w_hat_rep, exec)?;
    let w_prime = w_hat.dual()?;
    let gens = w_prime.kernel_generators()?;
    let [g] = gens.as_slice() else {
        return Err(ExtractError::RelationCheckFailed);
    };
    let d = decompose_2d(&epsi, &presig.s.0, &presig.s.1, g, c)?;
    let alpha = div_mod(d.y, d.x, c).ok_or(ExtractError::NonInvertibleCoefficient(d.x))?;
    let unit = inv_mod(d.x, c).expect("checked invertible");
    let normalized = epsi.mul_u64(g, unit);
    debug_assert_eq!(normalized, epsi.lin_comb(&presig.s.0, 1, &presig.s.1, mul_mod(d.y, unit, c)));
    let chain = pull_back_via_basis(&ps.e0, &ps.pq, &epsi, &presig.s, &[normalized], c)?;
    let w = Witness { alpha, chain };
    if !verify_relation(ps, &w, s) {
        return Err(ExtractError::RelationCheckFailed);
    }
    Ok(w)
}
