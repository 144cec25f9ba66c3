//! Canonical JSON wire format: sorted keys, lowercase hex big-endian integers,
//! no floats. Decoding re-validates every type invariant and reports the
//! JSON path of the offending value.

use serde_json::{Map, Value};
use thiserror::Error;

use crate::adaptor::PreSignature;
use crate::curve::{Curve, Point};
use crate::field::Fp2;
use crate::isogeny::{isogeny_from_kernel, EfficientRep};
use crate::nizk::{NizkProof, Reveal, Round};
use crate::orientation::{Orientation, OrientedPrime};
use crate::params::{validate_params, ParamSet, Profile};
use crate::relation::{witness_chain, Statement, Witness};
use crate::sig::{KeyPair, PlainSignature};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("parse error: {0}")]
    ParseError(String),
    #[error("invariant violation at {path}: {reason}")]
    InvariantViolation { path: String, reason: String },
}

fn violation<T>(path: &str, reason: impl Into<String>) -> Result<T, CodecError> {
    Err(CodecError::InvariantViolation { path: path.to_string(), reason: reason.into() })
}

pub fn hex(x: u64) -> String {
    format!("{x:x}")
}

pub fn hex_bytes(bytes: &[u8]) -> String {
    ::hex::encode(bytes)
}

/// Lowercase only, as emitted by `hex_bytes`.
pub fn parse_hex_bytes(s: &str) -> Option<Vec<u8>> {
    if s.bytes().any(|c| c.is_ascii_uppercase()) {
        return None;
    }
    ::hex::decode(s).ok()
}

pub fn to_string(v: &Value) -> String {
    serde_json::to_string(v).expect("values built here always serialize")
}

pub fn parse(text: &str) -> Result<Value, CodecError> {
    serde_json::from_str(text).map_err(|e| CodecError::ParseError(e.to_string()))
}

/// Accessor over a JSON object that tracks the current path.
struct Obj<'a> {
    map: &'a Map<String, Value>,
    path: String,
}

impl<'a> Obj<'a> {
    fn new(v: &'a Value, path: &str) -> Result<Self, CodecError> {
        match v {
            Value::Object(map) => Ok(Obj { map, path: path.to_string() }),
            _ => violation(path, "expected an object"),
        }
    }

    fn at(&self, key: &str) -> String {
        format!("{}.{key}", self.path)
    }

    fn get(&self, key: &str) -> Result<&'a Value, CodecError> {
        self.map.get(key).map_or_else(|| violation(&self.path, format!("missing field `{key}`")), Ok)
    }

    fn only(&self, keys: &[&str]) -> Result<(), CodecError> {
        match self.map.keys().find(|k| !keys.contains(&k.as_str())) {
            Some(k) => violation(&self.path, format!("unexpected field `{k}`")),
            None => Ok(()),
        }
    }

    fn u64(&self, key: &str) -> Result<u64, CodecError> {
        parse_u64(self.get(key)?, &self.at(key))
    }

    fn str(&self, key: &str) -> Result<&'a str, CodecError> {
        self.get(key)?.as_str().map_or_else(|| violation(&self.at(key), "expected a string"), Ok)
    }

    fn array(&self, key: &str) -> Result<&'a Vec<Value>, CodecError> {
        self.get(key)?.as_array().map_or_else(|| violation(&self.at(key), "expected an array"), Ok)
    }
}

fn parse_u64(v: &Value, path: &str) -> Result<u64, CodecError> {
    let Some(s) = v.as_str() else { return violation(path, "expected a hex string") };
    let canonical = !s.is_empty()
        && s.len() <= 16
        && s.bytes().all(|c| c.is_ascii_digit() || (b'a'..=b'f').contains(&c))
        && (s == "0" || !s.starts_with('0'));
    if !canonical {
        return violation(path, format!("`{s}` is not canonical lowercase hex"));
    }
    Ok(u64::from_str_radix(s, 16).expect("validated hex"))
}

fn pair_of<'a>(v: &'a Value, path: &str) -> Result<(&'a Value, &'a Value), CodecError> {
    match v.as_array().map(Vec::as_slice) {
        Some([a, b]) => Ok((a, b)),
        _ => violation(path, "expected a two-element array"),
    }
}

pub fn fp2_to_json(x: &Fp2) -> Value {
    serde_json::json!({ "c0": hex(x.c0()), "c1": hex(x.c1()) })
}

pub fn fp2_from_json(v: &Value, p: u64, path: &str) -> Result<Fp2, CodecError> {
    let o = Obj::new(v, path)?;
    o.only(&["c0", "c1"])?;
    let (c0, c1) = (o.u64("c0")?, o.u64("c1")?);
    if c0 >= p || c1 >= p {
        return violation(path, "coordinate is not reduced mod p");
    }
    Ok(Fp2::new(c0, c1, p))
}

pub fn curve_to_json(c: &Curve) -> Value {
    serde_json::json!({ "a": fp2_to_json(&c.a()), "b": fp2_to_json(&c.b()) })
}

pub fn curve_from_json(v: &Value, p: u64, path: &str) -> Result<Curve, CodecError> {
    let o = Obj::new(v, path)?;
    o.only(&["a", "b"])?;
    let a = fp2_from_json(o.get("a")?, p, &o.at("a"))?;
    let b = fp2_from_json(o.get("b")?, p, &o.at("b"))?;
    Curve::new(a, b).or_else(|_| violation(path, "singular curve"))
}

pub fn point_to_json(pt: &Point) -> Value {
    match pt {
        Point::Infinity => Value::String("inf".into()),
        Point::Affine(x, y) => serde_json::json!({ "x": fp2_to_json(x), "y": fp2_to_json(y) }),
    }
}

pub fn point_from_json(v: &Value, curve: &Curve, path: &str) -> Result<Point, CodecError> {
    if v.as_str() == Some("inf") {
        return Ok(Point::Infinity);
    }
    let o = Obj::new(v, path)?;
    o.only(&["x", "y"])?;
    let p = curve.modulus();
    let pt = Point::Affine(fp2_from_json(o.get("x")?, p, &o.at("x"))?, fp2_from_json(o.get("y")?, p, &o.at("y"))?);
    if !curve.contains(&pt) {
        return violation(path, "point is not on its curve");
    }
    Ok(pt)
}

fn points_to_json(pts: &(Point, Point)) -> Value {
    Value::Array(vec![point_to_json(&pts.0), point_to_json(&pts.1)])
}

fn points_from_json(v: &Value, curve: &Curve, path: &str) -> Result<(Point, Point), CodecError> {
    let (a, b) = pair_of(v, path)?;
    Ok((point_from_json(a, curve, &format!("{path}[0]"))?, point_from_json(b, curve, &format!("{path}[1]"))?))
}

/// Orientation as a list of `{ell, g1, g2}`; the curve comes from context.
pub fn orientation_to_json(o: &Orientation) -> Value {
    Value::Array(
        o.parts
            .iter()
            .map(|part| {
                serde_json::json!({ "ell": hex(part.ell), "g1": point_to_json(&part.g1), "g2": point_to_json(&part.g2) })
            })
            .collect(),
    )
}

pub fn orientation_from_json(v: &Value, curve: &Curve, path: &str) -> Result<Orientation, CodecError> {
    let Some(items) = v.as_array() else { return violation(path, "expected an array") };
    let mut parts = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let o = Obj::new(item, &format!("{path}[{i}]"))?;
        o.only(&["ell", "g1", "g2"])?;
        parts.push(OrientedPrime {
            ell: o.u64("ell")?,
            g1: point_from_json(o.get("g1")?, curve, &o.at("g1"))?,
            g2: point_from_json(o.get("g2")?, curve, &o.at("g2"))?,
        });
    }
    let orientation = Orientation { curve: *curve, parts };
    if let Err(e) = orientation.validate() {
        return violation(path, e.to_string());
    }
    Ok(orientation)
}

/// Protocol objects with a canonical JSON form. `ps` supplies the field
/// and the public constants needed to re-validate.
pub trait Codec: Sized {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value, ps: &ParamSet, path: &str) -> Result<Self, CodecError>;

    fn encode(&self) -> String {
        to_string(&self.to_json())
    }

    fn decode(text: &str, ps: &ParamSet) -> Result<Self, CodecError> {
        Self::from_json(&parse(text)?, ps, "$")
    }
}

impl Codec for EfficientRep {
    fn to_json(&self) -> Value {
        serde_json::json!({
            "domain": curve_to_json(&self.domain),
            "codomain": curve_to_json(&self.codomain),
            "degree": hex(self.degree),
            "basis_order": hex(self.basis_order),
            "images": points_to_json(&self.images),
        })
    }

    fn from_json(v: &Value, ps: &ParamSet, path: &str) -> Result<Self, CodecError> {
        let o = Obj::new(v, path)?;
        o.only(&["domain", "codomain", "degree", "basis_order", "images"])?;
        let domain = curve_from_json(o.get("domain")?, ps.p, &o.at("domain"))?;
        let codomain = curve_from_json(o.get("codomain")?, ps.p, &o.at("codomain"))?;
        let (degree, basis_order) = (o.u64("degree")?, o.u64("basis_order")?);
        if degree == 0 {
            return violation(&o.at("degree"), "degree must be positive");
        }
        if basis_order == 0 || !(ps.p + 1).is_multiple_of(basis_order) {
            return violation(&o.at("basis_order"), "basis order must divide p + 1");
        }
        let images = points_from_json(o.get("images")?, &codomain, &o.at("images"))?;
        for (i, img) in [images.0, images.1].iter().enumerate() {
            if !codomain.mul_u64(img, basis_order).is_infinity() {
                return violation(&format!("{}[{i}]", o.at("images")), "image is not killed by the basis order");
            }
        }
        Ok(EfficientRep { domain, codomain, degree, basis_order, images })
    }
}

impl Codec for PlainSignature {
    fn to_json(&self) -> Value {
        serde_json::json!({ "e1": curve_to_json(&self.e1), "rep": self.rep.to_json() })
    }

    fn from_json(v: &Value, ps: &ParamSet, path: &str) -> Result<Self, CodecError> {
        let o = Obj::new(v, path)?;
        o.only(&["e1", "rep"])?;
        let e1 = curve_from_json(o.get("e1")?, ps.p, &o.at("e1"))?;
        let rep = EfficientRep::from_json(o.get("rep")?, ps, &o.at("rep"))?;
        if rep.domain != e1 {
            return violation(&o.at("rep.domain"), "representation domain is not E1");
        }
        Ok(PlainSignature { e1, rep })
    }
}

impl Codec for Statement {
    fn to_json(&self) -> Value {
        serde_json::json!({ "ew": curve_to_json(&self.ew), "orientation": orientation_to_json(&self.oriented_image) })
    }

    fn from_json(v: &Value, ps: &ParamSet, path: &str) -> Result<Self, CodecError> {
        let o = Obj::new(v, path)?;
        o.only(&["ew", "orientation"])?;
        let ew = curve_from_json(o.get("ew")?, ps.p, &o.at("ew"))?;
        let oriented_image = orientation_from_json(o.get("orientation")?, &ew, &o.at("orientation"))?;
        if oriented_image.parts.iter().map(|x| x.ell).collect::<Vec<_>>() != ps.primes {
            return violation(&o.at("orientation"), "orientation primes differ from the parameters");
        }
        Ok(Statement { ew, oriented_image })
    }
}

impl Codec for Witness {
    fn to_json(&self) -> Value {
        serde_json::json!({ "alpha": hex(self.alpha) })
    }

    fn from_json(v: &Value, ps: &ParamSet, path: &str) -> Result<Self, CodecError> {
        let o = Obj::new(v, path)?;
        o.only(&["alpha"])?;
        let alpha = o.u64("alpha")?;
        if alpha >= ps.big_c() {
            return violation(&o.at("alpha"), "alpha is not reduced mod C");
        }
        let chain = witness_chain(ps, alpha).or_else(|e| violation(path, e.to_string()))?;
        Ok(Witness { alpha, chain })
    }
}

impl Codec for KeyPair {
    /// The secret isogeny is stored as its cyclic kernel generator.
    fn to_json(&self) -> Value {
        let kernel = self.sk.kernel_generators().ok().and_then(|g| g.first().copied()).unwrap_or(Point::Infinity);
        serde_json::json!({
            "pk": curve_to_json(&self.pk),
            "sk": { "degree": hex(self.sk.degree()), "kernel": point_to_json(&kernel) },
        })
    }

    fn from_json(v: &Value, ps: &ParamSet, path: &str) -> Result<Self, CodecError> {
        let o = Obj::new(v, path)?;
        o.only(&["pk", "sk"])?;
        let pk = curve_from_json(o.get("pk")?, ps.p, &o.at("pk"))?;
        let sk_obj = Obj::new(o.get("sk")?, &o.at("sk"))?;
        sk_obj.only(&["degree", "kernel"])?;
        let degree = sk_obj.u64("degree")?;
        let kernel = point_from_json(sk_obj.get("kernel")?, &ps.e0, &sk_obj.at("kernel"))?;
        let sk = isogeny_from_kernel(&ps.e0, &[kernel], degree).or_else(|e| violation(&o.at("sk"), e.to_string()))?;
        if sk.codomain() != pk {
            return violation(&o.at("pk"), "public key is not the codomain of the secret isogeny");
        }
        Ok(KeyPair { sk, pk })
    }
}

impl Codec for NizkProof {
    fn to_json(&self) -> Value {
        let rounds = self
            .rounds
            .iter()
            .map(|r| {
                let mut m = Map::new();
                m.insert("f".into(), curve_to_json(&r.f));
                m.insert("f_prime".into(), curve_to_json(&r.f_prime));
                m.insert("tag".into(), Value::String(format!("{:02x}", r.reveal.tag())));
                match &r.reveal {
                    Reveal::Masks { m: mask, m_prime } => {
                        m.insert("m".into(), point_to_json(mask));
                        m.insert("m_prime".into(), point_to_json(m_prime));
                    }
                    Reveal::Parallel { k } => {
                        m.insert("k".into(), point_to_json(k));
                    }
                }
                Value::Object(m)
            })
            .collect();
        serde_json::json!({ "rounds": Value::Array(rounds) })
    }

    /// Mask points are only checked for membership on their curves here;
    /// which curves they live on is fixed by the statement.
    fn from_json(v: &Value, ps: &ParamSet, path: &str) -> Result<Self, CodecError> {
        let o = Obj::new(v, path)?;
        o.only(&["rounds"])?;
        let mut rounds = Vec::new();
        for (i, item) in o.array("rounds")?.iter().enumerate() {
            let r = Obj::new(item, &format!("{}[{i}]", o.at("rounds")))?;
            let f = curve_from_json(r.get("f")?, ps.p, &r.at("f"))?;
            let f_prime = curve_from_json(r.get("f_prime")?, ps.p, &r.at("f_prime"))?;
            let reveal = match r.str("tag")? {
                "00" => {
                    r.only(&["f", "f_prime", "tag", "m", "m_prime"])?;
                    Reveal::Masks { m: raw_point(r.get("m")?, ps.p, &r.at("m"))?, m_prime: raw_point(r.get("m_prime")?, ps.p, &r.at("m_prime"))? }
                }
                "01" => {
                    r.only(&["f", "f_prime", "tag", "k"])?;
                    Reveal::Parallel { k: point_from_json(r.get("k")?, &f, &r.at("k"))? }
                }
                other => return violation(&r.at("tag"), format!("unknown reveal tag `{other}`")),
            };
            rounds.push(Round { f, f_prime, reveal });
        }
        Ok(NizkProof { rounds })
    }
}

/// Point whose curve is not known at decode time.
fn raw_point(v: &Value, p: u64, path: &str) -> Result<Point, CodecError> {
    if v.as_str() == Some("inf") {
        return Ok(Point::Infinity);
    }
    let o = Obj::new(v, path)?;
    o.only(&["x", "y"])?;
    Ok(Point::Affine(fp2_from_json(o.get("x")?, p, &o.at("x"))?, fp2_from_json(o.get("y")?, p, &o.at("y"))?))
}

impl Codec for PreSignature {
    fn to_json(&self) -> Value {
        serde_json::json!({
            "e1": curve_to_json(&self.e1),
            "proof": self.proof.to_json(),
            "epsi": curve_to_json(&self.epsi),
            "s": points_to_json(&self.s),
            "rep_tilde": self.rep_tilde.to_json(),
        })
    }

    fn from_json(v: &Value, ps: &ParamSet, path: &str) -> Result<Self, CodecError> {
        let o = Obj::new(v, path)?;
        o.only(&["e1", "proof", "epsi", "s", "rep_tilde"])?;
        let e1 = curve_from_json(o.get("e1")?, ps.p, &o.at("e1"))?;
        let epsi = curve_from_json(o.get("epsi")?, ps.p, &o.at("epsi"))?;
        let proof = NizkProof::from_json(o.get("proof")?, ps, &o.at("proof"))?;
        for (i, r) in proof.rounds.iter().enumerate() {
            if let Reveal::Masks { m_prime, .. } = &r.reveal {
                if !e1.contains(m_prime) {
                    return violation(&format!("{}.rounds[{i}].m_prime", o.at("proof")), "point is not on E1");
                }
            }
        }
        let s = points_from_json(o.get("s")?, &epsi, &o.at("s"))?;
        let c = ps.big_c();
        for (i, pt) in [s.0, s.1].iter().enumerate() {
            if !epsi.mul_u64(pt, c).is_infinity() {
                return violation(&format!("{}[{i}]", o.at("s")), "point is not killed by C");
            }
        }
        let rep_tilde = EfficientRep::from_json(o.get("rep_tilde")?, ps, &o.at("rep_tilde"))?;
        if rep_tilde.domain != epsi {
            return violation(&o.at("rep_tilde.domain"), "representation domain is not E_psi");
        }
        Ok(PreSignature { e1, proof, epsi, s, rep_tilde })
    }
}

pub fn params_to_json(ps: &ParamSet) -> Value {
    serde_json::json!({
        "profile": ps.profile.to_string(),
        "p": hex(ps.p),
        "a": hex(ps.a as u64),
        "primes": ps.primes.iter().map(|&l| Value::String(hex(l))).collect::<Vec<_>>(),
        "c": hex(ps.c as u64),
        "f": hex(ps.f),
        "d_tau": hex(ps.d_tau),
        "d_phi": hex(ps.d_phi),
        "e0": curve_to_json(&ps.e0),
        "orientation": orientation_to_json(&ps.orientation),
        "pq": points_to_json(&ps.pq),
        "nizk_rounds": hex(ps.nizk_rounds as u64),
    })
}

pub fn params_from_json(v: &Value) -> Result<ParamSet, CodecError> {
    let path = "$";
    let o = Obj::new(v, path)?;
    o.only(&["profile", "p", "a", "primes", "c", "f", "d_tau", "d_phi", "e0", "orientation", "pq", "nizk_rounds"])?;
    let profile = match o.str("profile")? {
        "T0" => Profile::T0,
        "T1" => Profile::T1,
        "custom" => Profile::Custom,
        other => return violation(&o.at("profile"), format!("unknown profile `{other}`")),
    };
    let p = o.u64("p")?;
    if p < 7 || p % 4 != 3 {
        return violation(&o.at("p"), "p must be a prime = 3 mod 4");
    }
    let small = |key: &str| -> Result<u32, CodecError> {
        let x = o.u64(key)?;
        if x > 63 {
            return violation(&o.at(key), "exponent out of range");
        }
        Ok(x as u32)
    };
    let (a, c) = (small("a")?, small("c")?);
    let primes = o
        .array("primes")?
        .iter()
        .enumerate()
        .map(|(i, x)| parse_u64(x, &format!("{}[{i}]", o.at("primes"))))
        .collect::<Result<Vec<_>, _>>()?;
    let e0 = curve_from_json(o.get("e0")?, p, &o.at("e0"))?;
    let ps = ParamSet {
        profile,
        p,
        a,
        primes,
        c,
        f: o.u64("f")?,
        d_tau: o.u64("d_tau")?,
        d_phi: o.u64("d_phi")?,
        e0,
        orientation: orientation_from_json(o.get("orientation")?, &e0, &o.at("orientation"))?,
        pq: points_from_json(o.get("pq")?, &e0, &o.at("pq"))?,
        nizk_rounds: o.u64("nizk_rounds")? as usize,
    };
    let report = validate_params(&ps);
    if let Some(check) = report.checks.iter().find(|c| !c.pass) {
        return violation(path, format!("parameter check `{}` fails: {}", check.name, check.detail));
    }
    if ps.nizk_rounds == 0 {
        return violation(&o.at("nizk_rounds"), "must be positive");
    }
    Ok(ps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adaptor::presign;
    use crate::params::{generate_params, ProfileSpec};
    use crate::relation::gen_r;
    use crate::sig::keygen;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn t0() -> ParamSet {
        generate_params(&ProfileSpec::t0(), &mut ChaCha20Rng::seed_from_u64(0)).unwrap()
    }

    #[test]
    fn round_trips_are_byte_identical() {
        let ps = t0();
        let text = to_string(&params_to_json(&ps));
        assert_eq!(params_from_json(&parse(&text).unwrap()).unwrap(), ps);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let kp = keygen(&ps, &mut rng);
        let (w, s) = gen_r(&ps, &mut rng);
        let presig = presign(&kp, b"m", &s, &ps, &mut rng).unwrap();
        let enc = presig.encode();
        let dec = PreSignature::decode(&enc, &ps).unwrap();
        assert_eq!(dec, presig);
        assert_eq!(dec.encode(), enc);
        // the rebuilt chain may pick other step kernel representatives
        let kp2 = KeyPair::decode(&kp.encode(), &ps).unwrap();
        assert_eq!(kp2.encode(), kp.encode());
        assert_eq!(kp2.sk.evaluate(&ps.pq.0), kp.sk.evaluate(&ps.pq.0));
        assert_eq!(Witness::decode(&w.encode(), &ps).unwrap(), w);
        assert_eq!(Statement::decode(&s.encode(), &ps).unwrap(), s);
        // keys come out sorted
        let keys: Vec<String> = parse(&enc).unwrap().as_object().unwrap().keys().cloned().collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn malformed_documents() {
        let ps = t0();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let kp = keygen(&ps, &mut rng);
        let (_, s) = gen_r(&ps, &mut rng);
        let enc = presign(&kp, b"m", &s, &ps, &mut rng).unwrap().encode();
        assert!(matches!(PreSignature::decode(&enc[..enc.len() / 2], &ps), Err(CodecError::ParseError(_))));

        let mut v = parse(&enc).unwrap();
        let y = &mut v["s"][1]["y"]["c0"];
        let old = u64::from_str_radix(y.as_str().unwrap(), 16).unwrap();
        *y = Value::String(hex((old + 1) % ps.p));
        match PreSignature::from_json(&v, &ps, "$") {
            Err(CodecError::InvariantViolation { path, .. }) => assert_eq!(path, "$.s[1]"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_u64(&Value::String("0A".into()), "$"), Err(CodecError::InvariantViolation { .. })));
        assert!(matches!(parse_u64(&Value::String("01".into()), "$"), Err(CodecError::InvariantViolation { .. })));
    }

    #[test]
    fn byte_helpers() {
        assert_eq!(hex_bytes(&[0, 171, 16]), "00ab10");
        assert_eq!(parse_hex_bytes("00ab10"), Some(vec![0, 171, 16]));
        assert_eq!(parse_hex_bytes("0"), None);
    }
}
