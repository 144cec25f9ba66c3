//! Two-party atomic swap over a shared statement: Alice holds the witness,
//! both parties pre-sign, Alice's adapted signature leaks the witness to Bob.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::adaptor::{adapt, extract, preverify_report, presign, verify_adapted};
use crate::codec::{curve_to_json, hex, hex_bytes, params_to_json, to_string, Codec};
use crate::curve::Curve;
use crate::exec::Execution;
use crate::params::ParamSet;
use crate::relation::{gen_r, verify_relation};
use crate::sig::{keygen, Mode};

pub const ALICE_MESSAGE: &[u8] = b"alice pays bob 1 coin on chain X";
pub const BOB_MESSAGE: &[u8] = b"bob pays alice 1 coin on chain Y";

#[derive(Clone, Debug, PartialEq)]
pub struct SwapTranscript {
    pub seed: u64,
    pub events: Vec<(String, Value)>,
    pub verdict: bool,
    pub failure: Option<String>,
}

impl SwapTranscript {
    pub fn to_json(&self) -> Value {
        let events: Vec<Value> = self.events.iter().map(|(name, data)| json!({ "event": name, "data": data })).collect();
        json!({
            "seed": hex(self.seed),
            "events": events,
            "verdict": if self.verdict { "success" } else { "failure" },
            "failure": self.failure.clone().map_or(Value::Null, Value::String),
        })
    }
}

fn fingerprint(v: &Value) -> String {
    hex_bytes(&Sha256::digest(to_string(v).as_bytes())[..8])
}

fn key_fingerprint(pk: &Curve) -> String {
    fingerprint(&curve_to_json(pk))
}

/// Runs the swap; `fault` corrupts the signature Alice publishes.
pub fn demo_swap(ps: &ParamSet, seed: u64, fault: bool) -> SwapTranscript {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut t = SwapTranscript { seed, events: Vec::new(), verdict: false, failure: None };
    let log = |t: &mut SwapTranscript, name: &str, data: Value| t.events.push((name.to_string(), data));
    let fail = |mut t: SwapTranscript, why: String| {
        t.failure = Some(why);
        t.verdict = false;
        t
    };

    log(&mut t, "params", json!({ "profile": ps.profile.to_string(), "p": hex(ps.p), "fingerprint": fingerprint(&params_to_json(ps)) }));
    let alice = keygen(ps, &mut rng);
    let bob = keygen(ps, &mut rng);
    log(&mut t, "keys", json!({ "alice": key_fingerprint(&alice.pk), "bob": key_fingerprint(&bob.pk) }));

    let (witness, statement) = gen_r(ps, &mut rng);
    log(&mut t, "statement", statement.to_json());

    let presig_alice = match presign(&alice, ALICE_MESSAGE, &statement, ps, &mut rng) {
        Ok(x) => x,
        Err(e) => return fail(t, format!("alice presign: {e}")),
    };
    log(&mut t, "presign_alice", presig_alice.to_json());
    let presig_bob = match presign(&bob, BOB_MESSAGE, &statement, ps, &mut rng) {
        Ok(x) => x,
        Err(e) => return fail(t, format!("bob presign: {e}")),
    };
    log(&mut t, "presign_bob", presig_bob.to_json());

    let exec = Execution::default();
    for (who, pk, m, pre) in [("alice", &alice.pk, ALICE_MESSAGE, &presig_alice), ("bob", &bob.pk, BOB_MESSAGE, &presig_bob)] {
        if let Err(e) = preverify_report(pk, m, &statement, pre, Mode::Strict, ps, exec) {
            return fail(t, format!("{who}'s presignature rejected: {e}"));
        }
    }
    log(&mut t, "preverify", json!({ "alice": true, "bob": true }));

    let mut sig_bob = match adapt(&presig_bob, &witness, ps) {
        Ok(x) => x,
        Err(e) => return fail(t, format!("alice adapt: {e}")),
    };
    if fault {
        sig_bob.rep.images = (sig_bob.rep.images.1, sig_bob.rep.images.0);
    }
    let bob_ok = verify_adapted(&bob.pk, BOB_MESSAGE, &sig_bob, ps).ok();
    log(&mut t, "adapt_bob_signature", json!({ "signature": sig_bob.to_json(), "verifies": bob_ok, "fault_injected": fault }));

    let extracted = match extract(&sig_bob, &presig_bob, &statement, ps) {
        Ok(w) => w,
        Err(e) => {
            log(&mut t, "extract_bob", json!({ "result": "bottom", "reason": e.to_string() }));
            return fail(t, format!("bob extraction returned bottom: {e}"));
        }
    };
    log(&mut t, "extract_bob", json!({ "result": extracted.to_json() }));

    let sig_alice = match adapt(&presig_alice, &extracted, ps) {
        Ok(x) => x,
        Err(e) => return fail(t, format!("bob adapt: {e}")),
    };
    let alice_ok = verify_adapted(&alice.pk, ALICE_MESSAGE, &sig_alice, ps).ok();
    log(&mut t, "adapt_alice_signature", json!({ "signature": sig_alice.to_json(), "verifies": alice_ok }));

    let relations = verify_relation(ps, &witness, &statement) && verify_relation(ps, &extracted, &statement);
    log(&mut t, "relations", json!({ "alice_witness": verify_relation(ps, &witness, &statement), "bob_extracted": verify_relation(ps, &extracted, &statement) }));
    t.verdict = alice_ok && bob_ok && relations;
    if !t.verdict {
        t.failure = Some("final checks failed".into());
    }
    t
}
