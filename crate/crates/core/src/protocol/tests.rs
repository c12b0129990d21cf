use std::collections::BTreeSet;

use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::party::PartyId;
use crate::qcore::{
    expected_withheld_density, fidelity, trace_distance, BellKind, DensityMatrix, QuantumRegister,
    RandomSource, TwoBits,
};

fn haar(n: usize, seed: u64) -> Vec<Complex64> {
    RandomSource::new(seed).haar_state(n)
}

fn run_one_to_one(width: usize, k: usize, seed: u64) -> ProtocolRun {
    ProtocolRun::setup(
        width,
        width,
        haar(width, seed ^ 0xabc),
        AccessPolicy::one_to_one(width, k),
        RandomSource::new(seed),
    )
    .unwrap()
}

fn complete(run: &mut ProtocolRun) {
    run.distribute_all(None).unwrap();
    run.transport_shares().unwrap();
}

#[test]
fn setup_examples() {
    let run = run_one_to_one(3, 3, 1);
    assert_eq!(run.transcript(), &Transcript::default());
    assert_eq!(run.links_left().iter().sum::<usize>(), 6);

    let err = ProtocolRun::setup(
        4,
        3,
        haar(3, 0),
        AccessPolicy::round_robin(3, 3, 3, 3),
        RandomSource::new(0),
    )
    .unwrap_err();
    assert!(matches!(err, ProtocolError::Config { field: "players", .. }), "{err}");

    let err = ProtocolRun::setup(
        3,
        4,
        haar(3, 0),
        AccessPolicy::round_robin(3, 3, 4, 3),
        RandomSource::new(0),
    )
    .unwrap_err();
    assert!(matches!(err, ProtocolError::Config { field: "controllers", .. }), "{err}");

    let bad = vec![Complex64::new(1.0, 0.0); 8];
    assert!(ProtocolRun::setup(3, 3, bad, AccessPolicy::one_to_one(3, 3), RandomSource::new(0)).is_err());
}

#[test]
fn phi_minus_outcome_needs_no_correction() {
    let mut found = false;
    for seed in 0..64 {
        let mut run = run_one_to_one(3, 3, seed);
        if run.distribute_qubit(1).unwrap() != BellKind::PhiMinus {
            continue;
        }
        found = true;
        let order: Vec<_> = vec![
            run.carrier_of(1).unwrap(),
            run.carrier_of(2).unwrap(),
            run.carrier_of(3).unwrap(),
        ];
        let state = run.register().state_in_order(&order).unwrap();
        assert!(fidelity(&state, run.secret()).unwrap() > 1.0 - 1e-12);
        assert_eq!(run.register().owner(order[0]), Some(PartyId::player(1)));
        break;
    }
    assert!(found);
}

#[test]
fn distribution_outcomes_are_uniform() {
    let trials = 4000u64;
    let mut counts = [0usize; 4];
    for seed in 0..trials {
        let mut run = run_one_to_one(2, 2, seed);
        counts[run.distribute_qubit(2).unwrap().bits().index()] += 1;
    }
    let sigma = (0.25f64 * 0.75 / trials as f64).sqrt();
    for n in counts {
        assert!((n as f64 / trials as f64 - 0.25).abs() < 4.0 * sigma, "{counts:?}");
    }
}

#[test]
fn double_distribution_is_rejected() {
    let mut run = run_one_to_one(2, 2, 3);
    run.distribute_qubit(1).unwrap();
    assert_eq!(run.distribute_qubit(1), Err(ProtocolError::AlreadyDistributed(1)));
    assert_eq!(run.distribute_qubit(7), Err(ProtocolError::UnknownIndex(7)));
    assert_eq!(run.transcript().dealer_measurements, 1);
}

#[test]
fn bit_encoding() {
    assert_eq!(encode_bits(BellKind::PhiMinus), TwoBits::new(false, false));
    assert_eq!(encode_bits(BellKind::PhiPlus), TwoBits::new(false, true));
    assert_eq!(encode_bits(BellKind::VarphiMinus), TwoBits::new(true, false));
    assert_eq!(encode_bits(BellKind::VarphiPlus), TwoBits::new(true, true));
    for k in BellKind::ALL {
        assert_eq!(decode_bits(encode_bits(k)), k);
    }
}

#[test]
fn classical_share_xor_example() {
    let secret = TwoBits::new(false, true);
    let mut seen = false;
    for seed in 0..64 {
        let mut run = run_one_to_one(1, 1, seed);
        run.distribute_qubit(1).unwrap();
        run.send_bits_classical(
            PartyId::controller(1),
            ClassicalShare {
                bits: secret,
                about_qubit: 1,
            },
        )
        .unwrap();
        let (_, announced) = run.transcript().announcements().next().unwrap();
        let (holder, decoded) = run.controller_bits(1).unwrap();
        assert_eq!(holder, 1);
        assert_eq!(decoded, secret);
        if announced ^ secret == TwoBits::new(true, true) {
            assert_eq!(announced, TwoBits::new(true, false));
            seen = true;
        }
    }
    assert!(seen);
}

#[test]
fn classical_share_counts_and_link_errors() {
    let mut run = run_one_to_one(2, 2, 4);
    run.distribute_all(None).unwrap();
    let share = |i: usize| ClassicalShare {
        bits: TwoBits::new(true, false),
        about_qubit: i,
    };
    run.send_bits_classical(PartyId::controller(1), share(1)).unwrap();
    let t = run.transcript();
    assert_eq!((t.epr_controller, t.dealer_measurements, t.controller_measurements), (2, 3, 1));
    let err = run.send_bits_classical(PartyId::controller(1), share(2)).unwrap_err();
    assert!(matches!(err, ProtocolError::InsufficientLinks { left: 0, .. }), "{err}");
    assert!(matches!(
        run.send_bits_classical(PartyId::player(1), share(2)),
        Err(ProtocolError::NotAController(_))
    ));
}

fn split_run(kind_seed: u64) -> ProtocolRun {
    let mut run = ProtocolRun::setup(
        1,
        2,
        haar(1, kind_seed),
        AccessPolicy::all_split(1, 1),
        RandomSource::new(kind_seed),
    )
    .unwrap();
    complete(&mut run);
    run
}

#[test]
fn split_share_is_private_and_jointly_recoverable() {
    let mut covered = BTreeSet::new();
    for seed in 0..40 {
        let mut run = split_run(seed);
        let psi = run.transcript().bell_record[&1];
        covered.insert(psi);
        let (reg, halves) = run.split_share(1).unwrap();
        let probs = reg.bell_probabilities(halves[0], halves[1]).unwrap();
        assert!((probs[psi.bits().index()] - 1.0).abs() < 1e-12);
        for h in halves {
            let rho = reg.reduced_density(&[h]).unwrap();
            assert!(trace_distance(&rho, &DensityMatrix::maximally_mixed(1)).unwrap() <= 1e-10);
        }
        let got = run
            .joint_identify(PartyId::controller(1), PartyId::controller(2), 1)
            .unwrap();
        assert_eq!(got, psi);
        assert_eq!(run.transcript().dealer_measurements, 3);
    }
    assert_eq!(covered.len(), 4);
}

#[test]
fn split_preconditions() {
    let mut run = ProtocolRun::setup(
        1,
        2,
        haar(1, 0),
        AccessPolicy::all_split(1, 1),
        RandomSource::new(0),
    )
    .unwrap();
    assert_eq!(
        run.split_bell_between_controllers(PartyId::controller(1), PartyId::controller(2), 1),
        Err(ProtocolError::UnknownRecord(1))
    );
    run.distribute_all(None).unwrap();
    assert_eq!(
        run.split_bell_between_controllers(PartyId::controller(1), PartyId::controller(1), 1),
        Err(ProtocolError::SameController(PartyId::controller(1)))
    );
    run.transport_shares().unwrap();
    assert!(matches!(
        run.joint_identify(PartyId::controller(2), PartyId::controller(1), 1),
        Err(ProtocolError::NoSplitShare { .. })
    ));
}

#[test]
fn defecting_controller_refuses() {
    let mut run = ProtocolRun::setup(
        1,
        2,
        haar(1, 5),
        AccessPolicy {
            release: vec![Release::Released, Release::Withheld],
            ..AccessPolicy::all_split(1, 1)
        },
        RandomSource::new(5),
    )
    .unwrap();
    complete(&mut run);
    assert_eq!(
        run.joint_identify(PartyId::controller(1), PartyId::controller(2), 1),
        Err(ProtocolError::Refused(PartyId::controller(2)))
    );
    let (reg, halves) = run.split_share(1).unwrap();
    let rho = reg.reduced_density(&[halves[0]]).unwrap();
    assert!(trace_distance(&rho, &DensityMatrix::maximally_mixed(1)).unwrap() <= 1e-10);
    assert!(!run.reconstruct().unwrap().is_recovered());
}

#[test]
fn split_teleport_every_branch_preserves_bell_state() {
    // Exhaustive over the 16 dealer outcome pairs with post-selection.
    for kind in BellKind::ALL {
        let mut reg = QuantumRegister::new();
        let (p, q) = reg.alloc_bell_pair(kind).unwrap();
        let (a1, b1) = reg.alloc_bell_pair(BellKind::PhiMinus).unwrap();
        let (a2, b2) = reg.alloc_bell_pair(BellKind::PhiMinus).unwrap();
        for o1 in BellKind::ALL {
            for o2 in BellKind::ALL {
                let mut r = reg.clone();
                r.bell_project(p, a1, o1).unwrap();
                r.apply_pauli(b1, o1.correction()).unwrap();
                r.bell_project(q, a2, o2).unwrap();
                r.apply_pauli(b2, o2.correction()).unwrap();
                let probs = r.bell_probabilities(b1, b2).unwrap();
                assert!((probs[kind.bits().index()] - 1.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn identity_branch_leaves_pair_intact() {
    let mut reg = QuantumRegister::new();
    let (p, q) = reg.alloc_bell_pair(BellKind::PhiMinus).unwrap();
    let (alpha, beta) = reg.alloc_bell_pair(BellKind::PhiMinus).unwrap();
    reg.bell_project(p, alpha, BellKind::PhiMinus).unwrap();
    let state = reg.state_in_order(&[beta, q]).unwrap();
    let want = BellKind::PhiMinus.amplitudes();
    assert!(fidelity(&state, &want).unwrap() > 1.0 - 1e-12);
}

#[test]
fn full_release_recovers() {
    for width in 1..=4 {
        let mut run = run_one_to_one(width, width, 10 + width as u64);
        complete(&mut run);
        match run.reconstruct().unwrap() {
            Reconstruction::Recovered { state, corrected, .. } => {
                assert_eq!(corrected, (1..=width).collect::<Vec<_>>());
                assert!(fidelity(&state, run.secret()).unwrap() >= 1.0 - 1e-10);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(run.reconstruct(), Err(ProtocolError::AlreadyReconstructed));
    }
}

#[test]
fn withholding_or_too_few_players_seals() {
    let mut policy = AccessPolicy::one_to_one(3, 3);
    policy.release[1] = Release::Withheld;
    let mut run =
        ProtocolRun::setup(3, 3, haar(3, 2), policy, RandomSource::new(2)).unwrap();
    complete(&mut run);
    match run.reconstruct().unwrap() {
        Reconstruction::Sealed(reason) => {
            assert_eq!(reason.released_records, vec![1, 3]);
            assert_eq!(reason.eligible_players, vec![1, 3]);
        }
        other => panic!("{other:?}"),
    }

    let mut policy = AccessPolicy::one_to_one(3, 2);
    policy.cooperating_players = [3].into_iter().collect();
    let mut run =
        ProtocolRun::setup(3, 3, haar(3, 2), policy, RandomSource::new(2)).unwrap();
    complete(&mut run);
    assert!(!run.reconstruct().unwrap().is_recovered());
}

#[test]
fn reconstruct_requires_complete_distribution() {
    let mut run = run_one_to_one(2, 2, 0);
    run.distribute_qubit(1).unwrap();
    assert_eq!(run.reconstruct(), Err(ProtocolError::DistributionIncomplete));
    run.distribute_qubit(2).unwrap();
    assert_eq!(run.reconstruct(), Err(ProtocolError::SharesNotTransported));
    assert_eq!(run.resource_report(), Err(ProtocolError::SharesNotTransported));
}

#[test]
fn withheld_state_examples() {
    let mut run = run_one_to_one(3, 3, 6);
    complete(&mut run);
    for i in 1..=3 {
        let got = run.withheld_state(&[i].into_iter().collect()).unwrap();
        let want = expected_withheld_density(run.secret(), i - 1).unwrap();
        assert!(trace_distance(&got, &want).unwrap() <= 1e-10);
        let own = got.reduce(&[i - 1]).unwrap();
        assert!(trace_distance(&own, &DensityMatrix::maximally_mixed(1)).unwrap() <= 1e-12);
    }
    let none = run.withheld_state(&BTreeSet::new()).unwrap();
    let pure = DensityMatrix::pure(run.secret()).unwrap();
    assert!(trace_distance(&none, &pure).unwrap() <= 1e-10);
    assert_eq!(
        run.withheld_state(&[4].into_iter().collect()),
        Err(ProtocolError::UnknownIndex(4))
    );
}

#[test]
fn resource_examples() {
    let mut run = run_one_to_one(3, 3, 0);
    complete(&mut run);
    let r = run.resource_report().unwrap();
    assert_eq!(
        (r.epr_player, r.epr_controller, r.dealer_measurements, r.controller_measurements, r.decoy_overhead),
        (3, 6, 6, 3, 0)
    );
    assert!(ResourceReport::expected(3, 0, 0).matches(&r));

    let mut run = ProtocolRun::setup(
        3,
        6,
        haar(3, 0),
        AccessPolicy::all_split(3, 3),
        RandomSource::new(0),
    )
    .unwrap();
    complete(&mut run);
    let r = run.resource_report().unwrap();
    assert_eq!(r.dealer_measurements, 9);
    assert_eq!(r.epr_controller, 6);
    assert!(ResourceReport::expected(3, 3, 0).matches(&r));
}

#[test]
fn transcripts_are_deterministic() {
    let go = |seed| {
        let mut run = run_one_to_one(4, 3, seed);
        complete(&mut run);
        run.reconstruct().unwrap();
        run.transcript().to_bytes()
    };
    assert_eq!(go(9), go(9));
    assert_ne!(go(9), go(10));
}

fn arb_policy() -> impl Strategy<Value = (usize, usize, usize, AccessPolicy)> {
    (1usize..=6)
        .prop_flat_map(|width| (Just(width), 1..=width, 1..=width))
        .prop_flat_map(|(width, players, controllers)| {
            (
                Just((width, players, controllers)),
                prop::collection::vec(any::<prop::sample::Index>(), width),
                prop::collection::vec(any::<prop::sample::Index>(), width),
                1..=players,
            )
        })
        .prop_map(|((width, players, controllers), qp, rc, k)| {
            // first `players` qubits pin one per player so nobody is empty;
            // likewise for controllers.
            let qubit_to_player = (0..width)
                .map(|i| if i < players { i + 1 } else { 1 + qp[i].index(players) })
                .collect();
            let record_holders = (0..width)
                .map(|i| {
                    ShareHolders::Single(if i < controllers {
                        i + 1
                    } else {
                        1 + rc[i].index(controllers)
                    })
                })
                .collect();
            let policy = AccessPolicy {
                threshold: k,
                qubit_to_player,
                record_holders,
                release: vec![Release::Released; controllers],
                cooperating_players: (1..=players).collect(),
            };
            (width, players, controllers, policy)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn end_to_end_identity((width, players, controllers, policy) in arb_policy(), seed in any::<u64>()) {
        let secret = haar(width, seed.wrapping_add(1));
        let mut run = ProtocolRun::setup(players, controllers, secret, policy, RandomSource::new(seed)).unwrap();
        complete(&mut run);
        match run.reconstruct().unwrap() {
            Reconstruction::Recovered { state, .. } => {
                prop_assert!(fidelity(&state, run.secret()).unwrap() >= 1.0 - 1e-10);
            }
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn sealing_soundness(
        (width, players, controllers, mut policy) in arb_policy(),
        release_mask in any::<u8>(),
        coop_mask in any::<u8>(),
        seed in any::<u64>(),
    ) {
        policy.release = (0..controllers)
            .map(|c| if release_mask & (1 << c) != 0 { Release::Released } else { Release::Withheld })
            .collect();
        policy.cooperating_players = (1..=players).filter(|p| coop_mask & (1 << (p - 1)) != 0).collect();
        let released: BTreeSet<usize> = (1..=width)
            .filter(|&i| match policy.record_holders[i - 1] {
                ShareHolders::Single(c) => release_mask & (1 << (c - 1)) != 0,
                ShareHolders::Split(_) => unreachable!(),
            })
            .collect();
        let eligible = policy
            .cooperating_players
            .iter()
            .filter(|&&p| (1..=width).filter(|&i| policy.qubit_to_player[i - 1] == p).all(|i| released.contains(&i)))
            .count();
        let k = policy.threshold;
        let mut run = ProtocolRun::setup(players, controllers, haar(width, seed), policy, RandomSource::new(seed)).unwrap();
        complete(&mut run);
        let outcome = run.reconstruct().unwrap();
        prop_assert_eq!(outcome.is_recovered(), eligible >= k);
    }

    #[test]
    fn counts_never_decrease(seed in any::<u64>(), width in 1usize..=4) {
        let mut run = run_one_to_one(width, width, seed);
        let snapshot = |r: &ProtocolRun| {
            let t = r.transcript();
            [t.epr_player, t.epr_controller, t.dealer_measurements, t.controller_measurements, t.messages.len()]
        };
        let mut prev = snapshot(&run);
        for i in 1..=width {
            run.distribute_qubit(i).unwrap();
            let now = snapshot(&run);
            prop_assert!(now.iter().zip(prev).all(|(a, b)| *a >= b));
            prev = now;
        }
        run.transport_shares().unwrap();
        let now = snapshot(&run);
        prop_assert!(now.iter().zip(prev).all(|(a, b)| *a >= b));
        prop_assert_eq!(run.transcript().bell_record.len(), width);
    }
}
