use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use sqiasign_core::adaptor::{adapt, adapt_with, extract, extract_with, preverify, preverify_report, presign, presign_with, PreverifyFailure};
use sqiasign_core::codec::Codec;
use sqiasign_core::exec::Execution;
use sqiasign_core::params::{generate_params, validate_params, ParamSet, ProfileSpec};
use sqiasign_core::relation::{gen_r, verify_relation, witness_from_alpha};
use sqiasign_core::sig::{keygen, sign, verify, Mode};
use sqiasign_core::swap::demo_swap;

fn t0() -> ParamSet {
    generate_params(&ProfileSpec::t0(), &mut ChaCha20Rng::seed_from_u64(0)).unwrap()
}

#[test]
fn profiles_validate() {
    for spec in [ProfileSpec::t0(), ProfileSpec::t1(), ProfileSpec::custom(9, vec![5, 7], 3)] {
        let ps = generate_params(&spec, &mut ChaCha20Rng::seed_from_u64(0)).unwrap();
        let report = validate_params(&ps);
        assert!(report.passed(), "{:?}", report.failed());
    }
    let ps = t0();
    assert_eq!((ps.p, ps.big_a(), ps.big_b(), ps.big_c()), (26_879, 128, 35, 3));
    assert_eq!(ps.response_degree(), 3675);
}

#[test]
fn honest_round_trip_in_both_modes() {
    let ps = t0();
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let kp = keygen(&ps, &mut rng);
    let (w, s) = gen_r(&ps, &mut rng);
    let pre = presign(&kp, b"pay 1", &s, &ps, &mut rng).unwrap();
    assert_eq!(pre.rep_tilde.degree, 3675);
    assert!(preverify(&kp.pk, b"pay 1", &s, &pre, Mode::Light, &ps));
    assert!(preverify(&kp.pk, b"pay 1", &s, &pre, Mode::Strict, &ps));
    let sig = adapt(&pre, &w, &ps).unwrap();
    assert_eq!(sig.rep.degree, 3675 * 3);
    assert_eq!(sig.rep.basis_order, 128 * 3);
    let got = extract(&sig, &pre, &s, &ps).unwrap();
    assert_eq!(got.alpha, w.alpha);
    assert!(verify_relation(&ps, &got, &s));
}

#[test]
fn sequential_and_parallel_agree() {
    let ps = t0();
    let mut rng = ChaCha20Rng::seed_from_u64(12);
    let kp = keygen(&ps, &mut rng);
    let (w, s) = gen_r(&ps, &mut rng);
    let run = |exec| {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let pre = presign_with(&kp, b"m", &s, &ps, &mut rng, exec).unwrap();
        let sig = adapt_with(&pre, &w, &ps, exec).unwrap();
        let got = extract_with(&sig, &pre, &s, &ps, exec).unwrap();
        (pre.encode(), sig.encode(), got.alpha)
    };
    assert_eq!(run(Execution::Sequential), run(Execution::Parallel));
}

#[test]
fn presignature_is_deterministic_under_seed() {
    let ps = t0();
    let mut rng = ChaCha20Rng::seed_from_u64(13);
    let kp = keygen(&ps, &mut rng);
    let (_, s) = gen_r(&ps, &mut rng);
    let a = presign(&kp, b"m", &s, &ps, &mut ChaCha20Rng::seed_from_u64(9)).unwrap();
    let b = presign(&kp, b"m", &s, &ps, &mut ChaCha20Rng::seed_from_u64(9)).unwrap();
    assert_eq!(a.encode(), b.encode());
}

#[test]
fn tampered_presignatures_fail_at_the_documented_check() {
    let ps = t0();
    let mut rng = ChaCha20Rng::seed_from_u64(14);
    let kp = keygen(&ps, &mut rng);
    let (_, s) = gen_r(&ps, &mut rng);
    let pre = presign(&kp, b"m", &s, &ps, &mut rng).unwrap();
    let check = |x| preverify_report(&kp.pk, b"m", &s, x, Mode::Light, &ps, Execution::default());

    let mut t = pre.clone();
    t.s.1 = t.epsi.double(&t.s.1);
    let err = check(&t).unwrap_err();
    assert!(matches!(err, PreverifyFailure::TorsionPoints(_)));
    assert!(err.to_string().starts_with("check 1"));

    let mut t = pre.clone();
    t.rep_tilde.images = (t.rep_tilde.images.1, t.rep_tilde.images.0);
    assert!(check(&t).unwrap_err().to_string().starts_with("check 4"));

    let mut t = pre.clone();
    t.proof.rounds[0].f = kp.pk;
    assert!(matches!(check(&t), Err(PreverifyFailure::Nizk(_))));
}

#[test]
fn only_the_true_witness_adapts() {
    let ps = t0();
    let mut rng = ChaCha20Rng::seed_from_u64(15);
    let kp = keygen(&ps, &mut rng);
    let (w, s) = gen_r(&ps, &mut rng);
    let pre = presign(&kp, b"m", &s, &ps, &mut rng).unwrap();
    let ok: Vec<u64> = (0..ps.big_c()).filter(|&a| adapt(&pre, &witness_from_alpha(&ps, a), &ps).is_ok()).collect();
    assert_eq!(ok, vec![w.alpha]);
}

#[test]
fn plain_signatures_verify_strictly() {
    let ps = t0();
    let mut rng = ChaCha20Rng::seed_from_u64(16);
    let kp = keygen(&ps, &mut rng);
    let sig = sign(&kp, b"hello", &ps, &mut rng).unwrap();
    assert!(verify(&kp.pk, b"hello", &sig, Mode::Strict, &ps));
    let other = keygen(&ps, &mut rng);
    assert!(!verify(&other.pk, b"hello", &sig, Mode::Light, &ps));
}

#[test]
fn swap_demo_replays() {
    let ps = t0();
    let a = demo_swap(&ps, 3, false);
    assert!(a.verdict);
    assert_eq!(a.to_json(), demo_swap(&ps, 3, false).to_json());
    let names: Vec<&str> = a.events.iter().map(|e| e.0.as_str()).collect();
    assert_eq!(
        names,
        ["params", "keys", "statement", "presign_alice", "presign_bob", "preverify", "adapt_bob_signature", "extract_bob", "adapt_alice_signature", "relations"]
    );
}
