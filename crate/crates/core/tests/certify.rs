mod common;

use common::*;
use sfm_core::certify::*;
use sfm_core::oracle::brute_min;
use sfm_core::{Oracle, Rat};

#[test]
fn e1_and_e2_round_trip() {
    for f in [e1(), e2(), constant(2, 3, 4)] {
        let cert = prove(&f, BUDGET).unwrap();
        assert_eq!(cert.version, CERT_VERSION);
        assert_eq!(cert.claimed_min, brute_min(&f, BUDGET).unwrap().0);
        assert_eq!(f.eval(&cert.witness), cert.claimed_min);
        assert_eq!(cert.vectors.len(), f.n() * f.k() + 1);
        assert_eq!(cert.chains.len(), cert.vectors.len());
        assert!(cert.chains.iter().all(|c| c.len() == 2 * f.n()));
        let rep = verify(&cert, &f);
        assert!(rep.verdict.is_accept(), "{:?}", rep.verdict);
        assert!(rep.oracle_calls > 0);
    }
}

#[test]
fn generated_round_trip_and_mutations() {
    for seed in 0..12u64 {
        let (n, k) = [(1, 3), (2, 3)][seed as usize % 2];
        let f = gen(n, k, 20, 500 + seed);
        let cert = prove(&f, BUDGET).unwrap();
        assert!(verify(&cert, &f).verdict.is_accept(), "seed {seed}");
        for m in Mutation::ALL {
            let bad = mutate(&cert, m).unwrap();
            let v = verify(&bad, &f).verdict;
            assert!(!v.is_accept(), "{m:?} accepted on seed {seed}");
        }
    }
}

#[test]
fn mutation_checks() {
    let f = gen(2, 3, 20, 41);
    let cert = prove(&f, BUDGET).unwrap();
    let at = |m| verify(&mutate(&cert, m).unwrap(), &f).verdict.check();
    assert!(matches!(at(Mutation::RaiseVectorEntry), Some(Check::Tightness) | Some(Check::Membership)));
    assert!(matches!(at(Mutation::SwapChainTuples), Some(Check::ChainShape)));
    assert!(matches!(at(Mutation::ClaimedMinPlusOne), Some(Check::Dual)));
    assert!(matches!(at(Mutation::Deunify), Some(Check::Dual) | Some(Check::Feasibility)));
    assert!(matches!(at(Mutation::BreakFeasibility), Some(Check::Feasibility)));
}

#[test]
fn hand_made_rejections() {
    let f = e2();
    let cert = prove(&f, BUDGET).unwrap();
    let mut wrong = cert.clone();
    wrong.claimed_min = -3;
    let v = verify(&wrong, &f).verdict;
    assert_eq!(v.check().map(Check::number), Some(5));

    // lower a chain tuple's vector entry so it is no longer tight
    let mut loose = cert.clone();
    let x = &mut loose.vectors[0];
    for a in 1..=3 {
        let v = x.get(0, a) - Rat::from_int(1);
        x.set(0, a, v);
    }
    let check = verify(&loose, &f).verdict.check().unwrap();
    assert!(matches!(check, Check::Tightness | Check::Feasibility), "{check}");

    // the certificate of one function does not certify another
    let other = constant(1, 3, 0);
    assert!(!verify(&cert, &other).verdict.is_accept());

    // wrong shape
    let mut short = cert.clone();
    short.vectors.pop();
    assert_eq!(verify(&short, &f).verdict.check(), Some(Check::Structure));
    let mut shallow = cert.clone();
    shallow.chains[0].pop();
    assert!(!verify(&shallow, &f).verdict.is_accept());
}

#[test]
fn non_tight_chain_entry_is_rejected_at_tightness() {
    let f = gen(2, 3, 20, 9);
    let cert = prove(&f, BUDGET).unwrap();
    // replace an interior chain tuple by a comparable one that is not tight
    for j in 0..cert.chains.len() {
        let x = &cert.vectors[j];
        let ch = &cert.chains[j];
        for p in 1..ch.len() - 1 {
            for cand in ch[p - 1].upper_covers() {
                if cand == ch[p] || !cand.leq(&ch[p + 1]).unwrap() {
                    continue;
                }
                let fno = f.eval(&cand) - f.eval(&sfm_core::LatticeTuple::bottom(2, 3));
                if x.eval(&cand) != Rat::from_int(fno) {
                    let mut bad = cert.clone();
                    bad.chains[j][p] = cand;
                    assert_eq!(verify(&bad, &f).verdict.check(), Some(Check::Tightness));
                    return;
                }
            }
        }
    }
    panic!("no replacement found");
}

#[test]
fn json_round_trip_and_malformed_input() {
    let f = gen(2, 3, 20, 4);
    let cert = prove(&f, BUDGET).unwrap();
    let text = cert.to_string_pretty();
    let back = Certificate::parse(&text).unwrap();
    assert_eq!(back, cert);
    assert!(verify(&back, &f).verdict.is_accept());
    let v = cert.to_json();
    assert_eq!(Certificate::from_json(&v).unwrap(), cert);
    assert_eq!(v["version"], 1);
    assert_eq!(v["witness"], cert.witness.to_string());

    assert!(Certificate::parse(&text[..text.len() / 2]).is_err());
    let mut future = v.clone();
    future["version"] = serde_json::json!(2);
    let err = Certificate::from_json(&future).unwrap_err().to_string();
    assert!(err.contains("version"), "{err}");
    let mut missing = v.clone();
    missing.as_object_mut().unwrap().remove("dual");
    assert!(Certificate::from_json(&missing).is_err());
    let mut bad_tuple = v.clone();
    bad_tuple["witness"] = serde_json::json!("a9,0");
    assert!(Certificate::from_json(&bad_tuple).is_err());
}

#[test]
fn verifier_calls_grow_mildly() {
    let mut calls = Vec::new();
    for n in 1..=2 {
        let f = gen(n, 3, 20, 8);
        let cert = prove(&f, BUDGET).unwrap();
        let rep = verify(&cert, &f);
        assert!(rep.verdict.is_accept());
        calls.push(rep.oracle_calls);
    }
    // far below the 5^n growth of enumeration times the vector count
    assert!(calls[1] < 25 * calls[0], "{calls:?}");
}
