//! Toy parameter sets `p = A B C f - 1` with `A = 2^a`, `B` a product of
//! small odd primes and `C = 3^c`.

use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::arith::{factorize, gcd, is_prime};
use crate::curve::{root_has_exact_order, Curve, Point};
use crate::orientation::{sample_orientation, Orientation, OrientationError};

/// Search bound for the cofactor `f`.
const MAX_COFACTOR: u64 = 1 << 20;
/// Keeps every field product inside `u128`.
const MAX_P: u64 = 1 << 62;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamsError {
    #[error("no prime p = {0} * f - 1 for f below the search bound")]
    NoPrimeFound(u64),
    #[error("constraint violated: {0}")]
    ConstraintViolation(String),
    #[error(transparent)]
    Orientation(#[from] OrientationError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    T0,
    T1,
    Custom,
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::T0 => "T0",
            Profile::T1 => "T1",
            Profile::Custom => "custom",
        })
    }
}

/// The inputs of parameter generation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProfileSpec {
    pub profile: Profile,
    pub a: u32,
    pub primes: Vec<u64>,
    pub c: u32,
    pub d_tau: u64,
    pub d_phi: u64,
    pub nizk_rounds: usize,
}

pub const DEFAULT_NIZK_ROUNDS: usize = 24;

impl ProfileSpec {
    pub fn t0() -> Self {
        ProfileSpec { profile: Profile::T0, a: 7, primes: vec![5, 7], c: 1, d_tau: 35, d_phi: 3, nizk_rounds: DEFAULT_NIZK_ROUNDS }
    }

    pub fn t1() -> Self {
        ProfileSpec { profile: Profile::T1, a: 9, primes: vec![5, 7], c: 2, d_tau: 35, d_phi: 9, nizk_rounds: DEFAULT_NIZK_ROUNDS }
    }

    /// Custom bounds with the defaults `D_tau = B` and `D_phi = C`.
    pub fn custom(a: u32, primes: Vec<u64>, c: u32) -> Self {
        let d_tau = primes.iter().product();
        ProfileSpec { profile: Profile::Custom, a, primes, c, d_tau, d_phi: 3u64.pow(c), nizk_rounds: DEFAULT_NIZK_ROUNDS }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamSet {
    pub profile: Profile,
    pub p: u64,
    pub a: u32,
    pub primes: Vec<u64>,
    pub c: u32,
    pub f: u64,
    pub d_tau: u64,
    pub d_phi: u64,
    pub e0: Curve,
    pub orientation: Orientation,
    /// Basis of `E0[C]`.
    pub pq: (Point, Point),
    pub nizk_rounds: usize,
}

impl ParamSet {
    pub fn big_a(&self) -> u64 {
        1 << self.a
    }

    pub fn big_b(&self) -> u64 {
        self.primes.iter().product()
    }

    pub fn big_c(&self) -> u64 {
        3u64.pow(self.c)
    }

    /// Degree of the presignature response `B * D_tau * D_phi`.
    pub fn response_degree(&self) -> u64 {
        self.big_b() * self.d_tau * self.d_phi
    }
}

fn check_shape(spec: &ProfileSpec) -> Result<(), ParamsError> {
    let violation = |s: String| Err(ParamsError::ConstraintViolation(s));
    if spec.a < 2 || spec.a > 40 {
        return violation(format!("a = {} must lie in [2, 40]", spec.a));
    }
    if spec.c < 1 || spec.c > 20 {
        return violation(format!("c = {} must lie in [1, 20]", spec.c));
    }
    for (i, &ell) in spec.primes.iter().enumerate() {
        if !is_prime(ell) || ell == 2 {
            return violation(format!("{ell} is not an odd prime"));
        }
        if ell == 3 {
            return violation("A, B, C pairwise coprime: 3 divides both B and C".into());
        }
        if spec.primes[..i].contains(&ell) {
            return violation(format!("prime {ell} repeated in B"));
        }
    }
    let big_a = 1u128 << spec.a;
    let big_b: u128 = spec.primes.iter().map(|&l| l as u128).product();
    let big_c = 3u128.pow(spec.c);
    if 4 * big_c >= big_a * big_a {
        return violation(format!("4C < A^2 fails: 4*{big_c} >= {}", big_a * big_a));
    }
    let bound = 4 * big_b * spec.d_tau as u128 * spec.d_phi as u128;
    if bound >= big_a * big_a {
        return violation(format!("4*B*D_tau*D_phi < A^2 fails: {bound} >= {}", big_a * big_a));
    }
    let bc = (big_b * big_c) as u64;
    if spec.d_tau == 0 || !bc.is_multiple_of(spec.d_tau) {
        return violation(format!("D_tau = {} must divide B*C = {bc}", spec.d_tau));
    }
    if spec.d_phi < 2 || !bc.is_multiple_of(spec.d_phi) || factorize(spec.d_phi).len() != 1 {
        return violation(format!("D_phi = {} must be a prime power dividing B*C = {bc}", spec.d_phi));
    }
    if spec.nizk_rounds == 0 {
        return violation("nizk_rounds must be positive".into());
    }
    Ok(())
}

/// Smallest `f >= 1` with `A B C f - 1` prime.
pub fn find_prime(abc: u64) -> Result<(u64, u64), ParamsError> {
    for f in 1..=MAX_COFACTOR {
        let Some(n) = abc.checked_mul(f) else { break };
        if n > MAX_P {
            break;
        }
        if is_prime(n - 1) {
            return Ok((f, n - 1));
        }
    }
    Err(ParamsError::NoPrimeFound(abc))
}

pub fn generate_params(spec: &ProfileSpec, rng: &mut impl Rng) -> Result<ParamSet, ParamsError> {
    check_shape(spec)?;
    let big_b: u64 = spec.primes.iter().product();
    let abc = (1u64 << spec.a)
        .checked_mul(big_b)
        .and_then(|x| x.checked_mul(3u64.pow(spec.c)))
        .filter(|&x| x <= MAX_P)
        .ok_or_else(|| ParamsError::ConstraintViolation("A*B*C exceeds the supported size".into()))?;
    let (f, p) = find_prime(abc)?;
    let e0 = Curve::e0(p);
    let orientation = sample_orientation(&e0, &spec.primes, rng)?;
    let pq = e0.torsion_basis(3u64.pow(spec.c)).map_err(|e| ParamsError::ConstraintViolation(e.to_string()))?;
    Ok(ParamSet {
        profile: spec.profile,
        p,
        a: spec.a,
        primes: spec.primes.clone(),
        c: spec.c,
        f,
        d_tau: spec.d_tau,
        d_phi: spec.d_phi,
        e0,
        orientation,
        pq,
        nizk_rounds: spec.nizk_rounds,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    /// Magnitudes `log_p A`, `log_p B`, `log_p C`, reported but never enforced.
    pub info: Vec<(String, String)>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name).collect()
    }
}

pub fn validate_params(ps: &ParamSet) -> ValidationReport {
    let mut checks = Vec::new();
    let mut push = |name: &'static str, pass: bool, detail: String| checks.push(Check { name, pass, detail });
    let (a, b, c) = (ps.big_a() as u128, ps.big_b() as u128, ps.big_c() as u128);
    let abcf = a * b * c * ps.f as u128;
    push("p = ABCf-1", abcf == ps.p as u128 + 1, format!("ABCf = {abcf}, p + 1 = {}", ps.p as u128 + 1));
    push("p prime", is_prime(ps.p), format!("p = {}", ps.p));
    push("p = 3 mod 4", ps.p % 4 == 3, format!("p mod 4 = {}", ps.p % 4));
    let coprime = gcd(a as u64, b as u64) == 1 && gcd(a as u64, c as u64) == 1 && gcd(b as u64, c as u64) == 1;
    push("A, B, C pairwise coprime", coprime, format!("A = {a}, B = {b}, C = {c}"));
    let mut primes_ok = true;
    for (i, &l) in ps.primes.iter().enumerate() {
        primes_ok &= is_prime(l) && l != 2 && l != 3 && !ps.primes[..i].contains(&l);
    }
    push("primes distinct, odd, not 3", primes_ok, format!("{:?}", ps.primes));
    push("4C < A^2", 4 * c < a * a, format!("{} < {}", 4 * c, a * a));
    let strict = 4 * b * ps.d_tau as u128 * ps.d_phi as u128;
    push("4*B*D_tau*D_phi < A^2", strict < a * a, format!("{strict} < {}", a * a));
    let e0_ok = ps.e0 == Curve::e0(ps.p);
    push("E0 is y^2 = x^3 + x", e0_ok, String::new());
    let count = if ps.p < 1 << 24 { ps.e0.count_points_over_fp2() } else { None };
    let expected = (ps.p as u128 + 1).pow(2);
    push(
        "|E0| = (p+1)^2",
        count == Some(expected),
        match count {
            Some(n) => format!("{n} vs {expected}"),
            None => "point count skipped (p too large)".into(),
        },
    );
    let (pp, qq) = ps.pq;
    let basis_ok = ps.e0.contains(&pp)
        && ps.e0.contains(&qq)
        && ps.e0.weil_pairing(&pp, &qq, c as u64).map(|z| root_has_exact_order(&z, c as u64)).unwrap_or(false);
    push("(P, Q) basis of E0[C]", basis_ok, String::new());
    let orientation_ok = ps.orientation.curve == ps.e0
        && ps.orientation.parts.iter().map(|x| x.ell).collect::<Vec<_>>() == ps.primes
        && ps.orientation.validate().is_ok();
    push("orientation valid", orientation_ok, String::new());

    let lp = (ps.p as f64).log2();
    let info = vec![
        ("log_p A (paper 0.3)".to_string(), format!("{:.3}", (a as f64).log2() / lp)),
        ("log_p B (paper 0.6)".to_string(), format!("{:.3}", (b as f64).log2() / lp)),
        ("log_p C (paper 0.1)".to_string(), format!("{:.3}", (c as f64).log2() / lp)),
    ];
    ValidationReport { checks, info }
}
