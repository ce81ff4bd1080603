//! Seeded experiment drivers behind the CLI, one per subcommand.
//!
//! Each driver is a thin loop over one library operation, accumulating
//! metrics into an [`ExperimentReport`]. Nothing here computes anything the
//! library cannot; the drivers only choose parameters, count outcomes, and
//! attach expectations. Identical configs produce identical reports.

use std::collections::HashSet;

use ndarray::{Array1, Array2};
use rand::RngCore;

use crate::algorithms::bomb::{
    bomb_rounds, bomb_test, explosion_probability, BombFinding, BombTruth,
};
use crate::algorithms::grover::{
    amplitude_amplify, grover_iterations, grover_search, grover_success_probability,
};
use crate::algorithms::hh::decode_demo;
use crate::algorithms::prep::PrepCircuit;
use crate::algorithms::simon::{find_shift, shift_oracle};
use crate::error::{Error, Result};
use crate::f2::{random_subspace, VecF2};
use crate::linalg::{C, ZERO};
use crate::money::{
    adaptive_attack, avalanche_fraction, bomb_extract, channel_counterfeit, interaction_rounds,
    measure_resend_channel, naive_counterfeit, optimize_clone_channel,
    per_probe_catch_probability, verify_pair, BombExtractionOutcome, ChaChaPrf, CloneChannel,
    RejectionPolicy, WiesnerBank, DEFAULT_STREAK,
};
use crate::oracle::BooleanOracle;
use crate::public::noisy_attack::MAX_ATTACK_QUBITS;
use crate::public::{
    grover_forge, hs_accept_probability, hs_keygen, hs_mint, hs_verify, noisy_poly_attack,
    polys_from_text, polys_generate, polys_to_text, sec_reduction_forge, subspace_state,
    HsOracle, PerfectCloner,
};
use crate::report::{ExperimentConfig, ExperimentReport, Metric};
use crate::rng::Stream;
use crate::sim::{
    fidelity, trace_distance, DensityMatrix, GentleMeasurement, PureState, Unitary,
};

/// The full subcommand menu, in canonical order.
pub const COMMANDS: [&str; 10] = [
    "selftest", "wiesner", "bbbw", "bomb", "attack", "simon", "grover", "hs", "hh", "clonopt",
];

/// Gradient-ascent iteration cap for the cloning channel; convergence to the
/// ceiling is far faster than this.
pub const CLONE_OPT_ITERS: usize = 300;

/// Usage-level validation: unknown commands or variants, and parameter
/// ranges the drivers rely on. Failures here are caller mistakes, as opposed
/// to invariant violations during a run.
pub fn validate(config: &ExperimentConfig) -> Result<()> {
    config.validate()?;
    let variants: &[&str] = match config.command.as_str() {
        "wiesner" => &["naive", "optimal", "resend"],
        "attack" => &["adaptive", "bomb"],
        "hs" => &["verify", "forge", "reduction", "noisy"],
        "selftest" | "bbbw" | "bomb" | "simon" | "grover" | "hh" | "clonopt" => &[],
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown command {other:?}, expected one of {COMMANDS:?}"
            )))
        }
    };
    if let Some(v) = &config.variant {
        if !variants.contains(&v.as_str()) {
            return Err(Error::InvalidArgument(format!(
                "command {} does not know variant {v:?} (choices: {variants:?})",
                config.command
            )));
        }
    }
    let n = config.n;
    let cap = |max: usize, why: &str| -> Result<()> {
        if n > max {
            return Err(Error::InvalidArgument(format!(
                "n = {n} too large for {}: {why} (max {max})",
                config.command
            )));
        }
        Ok(())
    };
    match config.command.as_str() {
        // Counterfeit pairs live on a 2n-qubit joint register.
        "wiesner" | "bbbw" | "clonopt" => cap(crate::MAX_QUBITS / 2, "pairs need 2n qubits")?,
        "simon" => cap(crate::MAX_QUBITS / 2, "the oracle register is 2n qubits")?,
        "grover" => cap(16, "dense search beyond 2^16 items is unreasonable")?,
        "hh" => cap(6, "the heralded register has n + 2 qubits and the demo diagonalizes it")?,
        "attack" => {
            if config.variant.as_deref() == Some("bomb") {
                cap(crate::MAX_QUBITS - 1, "the probe adds a control qubit")?;
                if config.epsilon > 0.05 {
                    return Err(Error::InvalidArgument(format!(
                        "probe attack needs epsilon <= 0.05, got {}",
                        config.epsilon
                    )));
                }
            } else {
                cap(crate::MAX_QUBITS, "note width")?;
            }
        }
        "bomb" => {
            if config.epsilon > std::f64::consts::FRAC_PI_2 {
                return Err(Error::InvalidArgument(format!(
                    "bomb test needs epsilon in (0, pi/2], got {}",
                    config.epsilon
                )));
            }
        }
        "hs" => {
            if n % 2 != 0 {
                return Err(Error::InvalidArgument(format!(
                    "hidden-subspace experiments need even n, got {n}"
                )));
            }
            match config.variant.as_deref() {
                Some("noisy") => cap(MAX_ATTACK_QUBITS, "the attack builds dense reflections")?,
                Some("forge") => cap(12, "forging walks 2^(n/2) Grover searches")?,
                _ => cap(16, "subspace states live on n qubits")?,
            }
        }
        _ => {}
    }
    Ok(())
}

/// Run the experiment a config describes. The caller is expected to have
/// passed `validate` first for clean usage errors; this calls it again as a
/// backstop.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    validate(config)?;
    let mut rng = Stream::from_seed(config.seed);
    match config.command.as_str() {
        "selftest" => selftest(config, &mut rng),
        "wiesner" => wiesner(config, &mut rng),
        "bbbw" => bbbw(config, &mut rng),
        "bomb" => bomb(config, &mut rng),
        "attack" => attack(config, &mut rng),
        "simon" => simon(config, &mut rng),
        "grover" => grover(config, &mut rng),
        "hs" => hs(config, &mut rng),
        "hh" => hh(config, &mut rng),
        "clonopt" => clonopt(config, &mut rng),
        other => Err(Error::InvalidArgument(format!("unknown command {other:?}"))),
    }
}

fn expect(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidState(msg.into()))
    }
}

// ---------------------------------------------------------------- selftest

fn selftest(config: &ExperimentConfig, rng: &mut Stream) -> Result<ExperimentReport> {
    let checks: [(&str, fn(&mut Stream) -> Result<()>); 12] = [
        ("hadamard_involution", check_hadamard_involution),
        ("bell_marginal_is_maximally_mixed", check_bell_marginal),
        ("subspace_hadamard_duality", check_subspace_duality),
        ("born_rule_on_uniform_state", check_born_rule),
        ("state_preparation_roundtrip", check_prep_roundtrip),
        ("simon_recovers_planted_shift", check_simon_shift),
        ("grover_single_iteration_exact", check_grover_exact),
        ("wiesner_mint_verifies", check_wiesner_roundtrip),
        ("hidden_subspace_mint_verifies", check_hs_roundtrip),
        ("fidelity_trace_distance_sandwich", check_fidelity_sandwich),
        ("gentle_measurement_damage_bound", check_gentle_bound),
        ("serialization_roundtrips", check_serialization),
    ];
    let mut metrics = Vec::with_capacity(checks.len() + 1);
    for (name, f) in checks {
        f(rng).map_err(|e| Error::InvalidState(format!("selftest {name}: {e}")))?;
        metrics.push(Metric::exact(name, 1.0));
    }
    metrics.push(Metric::exact("checks_total", checks.len() as f64));
    Ok(ExperimentReport::new(config, metrics))
}

fn check_hadamard_involution(rng: &mut Stream) -> Result<()> {
    let psi = PureState::random(3, rng)?;
    let h3 = Unitary::hadamard_n(3)?;
    let all = [0, 1, 2];
    let back = psi.apply(&h3, &all)?.apply(&h3, &all)?;
    expect(back.overlap_sq(&psi)? > 1.0 - 1e-12, "H applied twice moved the state")
}

fn check_bell_marginal(_: &mut Stream) -> Result<()> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let amps = Array1::from(vec![C::new(r, 0.0), ZERO, ZERO, C::new(r, 0.0)]);
    let bell = PureState::new(2, amps)?;
    let half = DensityMatrix::from_pure(&bell).partial_trace(&[0])?;
    let mixed = DensityMatrix::maximally_mixed(1)?;
    expect(
        trace_distance(&half, &mixed)? < 1e-12,
        "Bell marginal is not the maximally mixed qubit",
    )
}

fn check_subspace_duality(rng: &mut Stream) -> Result<()> {
    let s = random_subspace(6, 3, rng)?;
    let targets: Vec<usize> = (0..6).collect();
    let rotated = subspace_state(&s)?.apply(&Unitary::hadamard_n(6)?, &targets)?;
    let dual = subspace_state(&s.dual())?;
    expect(rotated.overlap_sq(&dual)? > 1.0 - 1e-12, "H^n did not map |S> to the dual state")
}

fn check_born_rule(_: &mut Stream) -> Result<()> {
    let u = PureState::uniform(2)?;
    for idx in 0..4 {
        let p = u.overlap_sq(&PureState::basis(2, idx)?)?;
        expect((p - 0.25).abs() < 1e-12, format!("uniform state weight at {idx} is {p}"))?;
    }
    Ok(())
}

fn check_prep_roundtrip(rng: &mut Stream) -> Result<()> {
    let psi = PureState::random(4, rng)?;
    let again = PrepCircuit::for_state(&psi)?.prepare()?;
    expect(again.overlap_sq(&psi)? > 1.0 - 1e-10, "prepared state differs from its target")
}

fn check_simon_shift(rng: &mut Stream) -> Result<()> {
    let shift = loop {
        let v = VecF2::random(4, rng);
        if v.to_index() != 0 {
            break v;
        }
    };
    let oracle = shift_oracle(4, &shift, rng)?;
    let finding = find_shift(&oracle, rng)?;
    expect(finding.shift == shift, "recovered shift differs from the planted one")
}

fn check_grover_exact(rng: &mut Stream) -> Result<()> {
    let target = PureState::basis(2, rng.below(4) as usize)?;
    let entry = PureState::uniform(2)?;
    let p = amplitude_amplify(&entry, &target, &entry, 1)?.overlap_sq(&target)?;
    expect((p - 1.0).abs() < 1e-9, format!("one iteration at four items hit {p}"))
}

fn check_wiesner_roundtrip(rng: &mut Stream) -> Result<()> {
    let mut bank = WiesnerBank::with_ledger(4, RejectionPolicy::Destroy, rng.split())?;
    let note = bank.mint()?;
    let v = bank.verify(note)?;
    expect(v.accepted, "fresh note rejected")?;
    let v2 = bank.verify(v.returned.ok_or_else(|| Error::InvalidState("note kept".into()))?)?;
    expect(v2.accepted, "note rejected on the second pass")?;
    expect(bank.failure_log() == 0, "failure log moved on genuine notes")
}

fn check_hs_roundtrip(rng: &mut Stream) -> Result<()> {
    let key = hs_keygen(6, rng)?;
    let mut oracle = HsOracle::new();
    oracle.register(&key)?;
    let note = hs_mint(&key)?;
    let (ok, post) = hs_verify(&oracle, key.serial(), &note.state, rng)?;
    expect(ok, "genuine subspace note rejected")?;
    expect(post.overlap_sq(&note.state)? > 1.0 - 1e-9, "verification damaged a genuine note")?;
    expect(oracle.queries(key.serial())? == (1, 1), "verification spent a wrong query count")
}

fn check_fidelity_sandwich(rng: &mut Stream) -> Result<()> {
    for _ in 0..20 {
        let w = rng.uniform();
        let mix = |rng: &mut Stream| -> Result<DensityMatrix> {
            DensityMatrix::mix(&[
                (w, DensityMatrix::from_pure(&PureState::random(2, rng)?)),
                (1.0 - w, DensityMatrix::from_pure(&PureState::random(2, rng)?)),
            ])
        };
        let (a, b) = (mix(rng)?, mix(rng)?);
        let f = fidelity(&a, &b)?;
        let d = trace_distance(&a, &b)?;
        expect(1.0 - f <= d + 1e-10, format!("lower bound broken: F {f}, D {d}"))?;
        expect(d <= (1.0 - f * f).sqrt() + 1e-10, format!("upper bound broken: F {f}, D {d}"))?;
    }
    Ok(())
}

fn check_gentle_bound(_: &mut Stream) -> Result<()> {
    // Membership readout for P = {|00>, |01>}: flip the ancilla on the
    // complement, accept on ancilla 0.
    let dim = 8;
    let mut u = Array2::from_elem((dim, dim), ZERO);
    for x in 0..4 {
        for b in 0..2 {
            let flip = usize::from(x >= 2);
            u[((x << 1) | (b ^ flip), (x << 1) | b)] = C::new(1.0, 0.0);
        }
    }
    let mut pi0 = Array2::from_elem((dim, dim), ZERO);
    for i in (0..dim).step_by(2) {
        pi0[(i, i)] = C::new(1.0, 0.0);
    }
    let m = GentleMeasurement::new(2, 1, Unitary::new(u)?, pi0)?;
    let eps = 0.1f64;
    let amps = Array1::from(vec![
        C::new((1.0 - eps).sqrt(), 0.0),
        ZERO,
        C::new(eps.sqrt(), 0.0),
        ZERO,
    ]);
    let rho = DensityMatrix::from_pure(&PureState::new(2, amps)?);
    let (p, post) = m.measure(&rho)?;
    expect((p - (1.0 - eps)).abs() < 1e-12, format!("accept probability {p}"))?;
    let damage = trace_distance(&rho, &post)?;
    let bound = (eps * (1.0 - eps)).sqrt();
    expect(damage <= bound + 1e-9, format!("damage {damage} above bound {bound}"))
}

fn check_serialization(rng: &mut Stream) -> Result<()> {
    let mut bank = WiesnerBank::with_ledger(3, RejectionPolicy::Destroy, rng.split())?;
    let note = bank.mint()?;
    let back = crate::money::Banknote::from_json(&note.to_json())?;
    expect(back.serial == note.serial, "serial changed across JSON")?;
    expect(back.state.overlap_sq(&note.state)? > 1.0 - 1e-12, "state changed across JSON")?;

    let key = hs_keygen(4, rng)?;
    let (inst, _) = polys_generate(&key, 8, 0.25, rng)?;
    let (n, ps) = polys_from_text(&polys_to_text(4, &inst.ps))?;
    expect(n == 4 && ps == inst.ps, "polynomial text did not round-trip")?;

    let oracle = BooleanOracle::from_fn(3, 2, |x| (x * 5) % 4)?;
    let again = BooleanOracle::from_text(&oracle.to_text())?;
    expect(again.to_text() == oracle.to_text(), "oracle text did not round-trip")
}

// ------------------------------------------------------- private-key money

/// Mint, counterfeit, submit both copies; counts how often both pass.
fn counterfeit_loop(
    bank: &mut WiesnerBank,
    channel: Option<&CloneChannel>,
    trials: u64,
    rng: &mut Stream,
) -> Result<u64> {
    let mut both = 0;
    for _ in 0..trials {
        let note = bank.mint()?;
        let pair = match channel {
            None => naive_counterfeit(&note, rng)?,
            Some(ch) => channel_counterfeit(&note, ch, rng)?,
        };
        let (a, b) = verify_pair(bank, pair)?;
        if a && b {
            both += 1;
        }
    }
    Ok(both)
}

fn wiesner(config: &ExperimentConfig, rng: &mut Stream) -> Result<ExperimentReport> {
    let variant = config.variant.as_deref().unwrap_or("naive");
    let (channel, per_qubit): (Option<CloneChannel>, f64) = match variant {
        "naive" => (None, 5.0 / 8.0),
        "resend" => (Some(measure_resend_channel()?), 5.0 / 8.0),
        "optimal" => (Some(optimize_clone_channel(CLONE_OPT_ITERS)?.channel), 3.0 / 4.0),
        other => return Err(Error::InvalidArgument(format!("unknown attack {other:?}"))),
    };
    let mut bank = WiesnerBank::with_ledger(config.n, RejectionPolicy::Destroy, rng.split())?;
    let both = counterfeit_loop(&mut bank, channel.as_ref(), config.trials, rng)?;
    let mut metrics = vec![
        Metric::rate("both_pass", both, config.trials),
        Metric::exact("both_pass_expected", per_qubit.powi(config.n as i32)),
    ];
    if let Some(ch) = &channel {
        metrics.push(Metric::exact("channel_objective", ch.objective()));
    }
    Ok(ExperimentReport::new(config, metrics))
}

fn bbbw(config: &ExperimentConfig, rng: &mut Stream) -> Result<ExperimentReport> {
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&rng.next_u64().to_le_bytes());
    }
    let mut bank = WiesnerBank::with_derived_keys(
        config.n,
        RejectionPolicy::Destroy,
        Box::new(ChaChaPrf::from_key(key)),
        rng.split(),
    )?;
    let both = counterfeit_loop(&mut bank, None, config.trials, rng)?;

    let serials = 64usize;
    let prf = ChaChaPrf::from_key(key);
    let frac = avalanche_fraction(&prf, config.n, serials, rng)?;
    let flips = (serials * 64 * config.n) as u64;
    let changed = (frac * flips as f64).round() as u64;
    Ok(ExperimentReport::new(
        config,
        vec![
            Metric::rate("both_pass", both, config.trials),
            Metric::exact("both_pass_expected", (5.0f64 / 8.0).powi(config.n as i32)),
            Metric::rate("avalanche", changed, flips),
            Metric::exact("avalanche_expected", 0.75),
        ],
    ))
}

fn attack(config: &ExperimentConfig, rng: &mut Stream) -> Result<ExperimentReport> {
    match config.variant.as_deref().unwrap_or("adaptive") {
        "adaptive" => attack_adaptive(config, rng),
        "bomb" => attack_bomb(config, rng),
        other => Err(Error::InvalidArgument(format!("unknown attack variant {other:?}"))),
    }
}

fn attack_adaptive(config: &ExperimentConfig, rng: &mut Stream) -> Result<ExperimentReport> {
    let n = config.n;
    let budget = 64 * n as u64 * u64::from(usize::BITS - n.leading_zeros());
    let mut recovered = 0u64;
    let mut failures_logged = 0u64;
    let mut verifications = Vec::new();
    for _ in 0..config.trials {
        let mut bank = WiesnerBank::with_ledger(n, RejectionPolicy::ReturnDamaged, rng.split())?;
        let note = bank.mint()?;
        let truth = bank.key(note.serial)?;
        match adaptive_attack(&mut bank, note, DEFAULT_STREAK) {
            Ok(rec) => {
                if rec.key == truth {
                    recovered += 1;
                    verifications.push(rec.verifications as f64);
                }
            }
            Err(Error::BudgetExceeded { .. }) => {}
            Err(e) => return Err(e),
        }
        failures_logged += bank.failure_log();
    }
    let mut metrics = vec![
        Metric::rate("recovered", recovered, config.trials),
        Metric::exact("budget", budget as f64),
        Metric::exact("failures_logged", failures_logged as f64),
    ];
    if !verifications.is_empty() {
        metrics.insert(1, Metric::from_samples("verifications_mean", &verifications));
    }
    Ok(ExperimentReport::new(config, metrics))
}

fn attack_bomb(config: &ExperimentConfig, rng: &mut Stream) -> Result<ExperimentReport> {
    let eps = config.epsilon;
    let rounds = interaction_rounds(eps)?;
    let mut identified = 0u64;
    let mut caught = 0u64;
    let mut verifications = Vec::new();
    for _ in 0..config.trials {
        let mut bank = WiesnerBank::with_ledger(config.n, RejectionPolicy::Destroy, rng.split())?;
        let note = bank.mint()?;
        let truth = bank.key(note.serial)?;
        match bomb_extract(&mut bank, note, eps, rng)? {
            BombExtractionOutcome::Recovered(rec) => {
                if rec.key == truth {
                    identified += 1;
                }
                verifications.push(rec.verifications as f64);
            }
            BombExtractionOutcome::Caught { .. } => caught += 1,
        }
    }
    let mut metrics = vec![
        Metric::rate("identified", identified, config.trials),
        Metric::rate("caught", caught, config.trials),
        Metric::exact("rounds_per_probe", rounds as f64),
        Metric::exact("per_probe_catch", per_probe_catch_probability(rounds)),
    ];
    if !verifications.is_empty() {
        metrics.insert(2, Metric::from_samples("verifications_mean", &verifications));
    }
    Ok(ExperimentReport::new(config, metrics))
}

// ------------------------------------------------------------- algorithms

fn bomb(config: &ExperimentConfig, rng: &mut Stream) -> Result<ExperimentReport> {
    let eps = config.epsilon;
    let mut dud_correct = 0u64;
    for _ in 0..config.trials {
        if bomb_test(BombTruth::Dud, eps, rng)?.finding == BombFinding::NoBomb {
            dud_correct += 1;
        }
    }
    let mut detected = 0u64;
    let mut exploded = 0u64;
    for _ in 0..config.trials {
        match bomb_test(BombTruth::Live, eps, rng)?.finding {
            BombFinding::BombPresent => detected += 1,
            BombFinding::Exploded => exploded += 1,
            BombFinding::NoBomb => {}
        }
    }
    Ok(ExperimentReport::new(
        config,
        vec![
            Metric::rate("dud_correct", dud_correct, config.trials),
            Metric::rate("live_detected", detected, config.trials),
            Metric::rate("live_exploded", exploded, config.trials),
            Metric::exact("explosion_expected", explosion_probability(eps)?),
            Metric::exact("rounds", bomb_rounds(eps)? as f64),
        ],
    ))
}

fn simon(config: &ExperimentConfig, rng: &mut Stream) -> Result<ExperimentReport> {
    let n = config.n;
    let mut hits = 0u64;
    let mut rounds = Vec::new();
    let mut queries = Vec::new();
    for _ in 0..config.trials {
        let shift = loop {
            let v = VecF2::random(n, rng);
            if v.to_index() != 0 {
                break v;
            }
        };
        let oracle = shift_oracle(n, &shift, rng)?;
        match find_shift(&oracle, rng) {
            Ok(finding) => {
                if finding.shift == shift {
                    hits += 1;
                }
                rounds.push(finding.rounds as f64);
                queries.push(finding.queries as f64);
            }
            Err(Error::RoundCap { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    let mut metrics = vec![Metric::rate("success", hits, config.trials)];
    if !rounds.is_empty() {
        metrics.push(Metric::from_samples("rounds_mean", &rounds));
        metrics.push(Metric::from_samples("queries_mean", &queries));
    }
    metrics.push(Metric::exact("rounds_cap", (50 * n) as f64));
    Ok(ExperimentReport::new(config, metrics))
}

fn grover(config: &ExperimentConfig, rng: &mut Stream) -> Result<ExperimentReport> {
    // Exact sweep: measured amplitude after k rounds against the closed form,
    // over every register width up to 6 qubits.
    let mut max_err = 0.0f64;
    for bits in 1..=config.n.min(6) {
        let n_items = 1usize << bits;
        let target = PureState::basis(bits, rng.below(n_items as u64) as usize)?;
        let entry = PureState::uniform(bits)?;
        for k in 0..=grover_iterations(n_items, 1) + 2 {
            let p = amplitude_amplify(&entry, &target, &entry, k)?.overlap_sq(&target)?;
            max_err = max_err.max((p - grover_success_probability(n_items, 1, k)).abs());
        }
    }
    let target = PureState::basis(2, rng.below(4) as usize)?;
    let entry = PureState::uniform(2)?;
    let single = amplitude_amplify(&entry, &target, &entry, 1)?.overlap_sq(&target)?;

    // Sampled end-to-end searches at the configured width.
    let n_items = 1u64 << config.n;
    let mut hit = 0u64;
    for _ in 0..config.trials {
        let needle = rng.below(n_items) as usize;
        let oracle = BooleanOracle::from_fn(config.n, 1, |x| usize::from(x == needle))?;
        if grover_search(&oracle, 1, rng)?.hit {
            hit += 1;
        }
    }
    let kopt = grover_iterations(n_items as usize, 1);
    Ok(ExperimentReport::new(
        config,
        vec![
            Metric::exact("formula_max_abs_error", max_err),
            Metric::exact("single_iteration_success", single),
            Metric::rate("hit", hit, config.trials),
            Metric::exact("hit_expected", grover_success_probability(n_items as usize, 1, kopt)),
            Metric::exact("iterations", kopt as f64),
        ],
    ))
}

fn hh(config: &ExperimentConfig, rng: &mut Stream) -> Result<ExperimentReport> {
    let demo = decode_demo(config.n, config.trials as usize, rng)?;
    Ok(ExperimentReport::new(
        config,
        vec![
            Metric::exact("shared_bell_before", demo.shared_before),
            Metric::exact("shared_bell_after", demo.shared_after),
            Metric::exact("shared_blocks_disjoint", f64::from(u8::from(demo.shared_certificate))),
            Metric::exact("disjoint_bell_best", demo.disjoint_best),
            Metric::exact(
                "disjoint_blocks_disjoint",
                f64::from(u8::from(demo.disjoint_certificate)),
            ),
            Metric::exact("disjoint_cap", demo.disjoint_cap),
        ],
    ))
}

// ------------------------------------------------------- hidden subspaces

fn hs(config: &ExperimentConfig, rng: &mut Stream) -> Result<ExperimentReport> {
    match config.variant.as_deref().unwrap_or("verify") {
        "verify" => hs_verify_experiment(config, rng),
        "forge" => hs_forge_experiment(config, rng),
        "reduction" => hs_reduction_experiment(config, rng),
        "noisy" => hs_noisy_experiment(config, rng),
        other => Err(Error::InvalidArgument(format!("unknown hs variant {other:?}"))),
    }
}

fn hs_verify_experiment(config: &ExperimentConfig, rng: &mut Stream) -> Result<ExperimentReport> {
    let n = config.n;
    let key = hs_keygen(n, rng)?;
    let mut oracle = HsOracle::new();
    oracle.register(&key)?;
    let note = hs_mint(&key)?;

    let mut legit = 0u64;
    let mut state = note.state.clone();
    for _ in 0..config.trials {
        let (ok, post) = hs_verify(&oracle, key.serial(), &state, rng)?;
        if ok {
            legit += 1;
        }
        state = post;
    }

    let members: HashSet<u64> = key.subspace().enumerate().iter().map(|v| v.to_index()).collect();
    let mut forged_accepts = 0u64;
    let mut expected_sum = 0.0;
    for _ in 0..config.trials {
        let t = random_subspace(n, n / 2, rng)?;
        let meet = t.enumerate().iter().filter(|v| members.contains(&v.to_index())).count();
        expected_sum += (meet * meet) as f64 / (1u64 << n) as f64;
        let (ok, _) = hs_verify(&oracle, key.serial(), &subspace_state(&t)?, rng)?;
        if ok {
            forged_accepts += 1;
        }
    }
    let (chi_s, chi_perp) = oracle.queries(key.serial())?;
    Ok(ExperimentReport::new(
        config,
        vec![
            Metric::rate("legit_accept", legit, config.trials),
            Metric::exact(
                "legit_accept_exact",
                hs_accept_probability(&oracle, key.serial(), &note.state)?,
            ),
            Metric::rate("random_t_accept", forged_accepts, config.trials),
            Metric::exact("random_t_accept_expected", expected_sum / config.trials as f64),
            Metric::exact("oracle_queries", (chi_s + chi_perp) as f64),
        ],
    ))
}

fn hs_forge_experiment(config: &ExperimentConfig, rng: &mut Stream) -> Result<ExperimentReport> {
    let key = hs_keygen(config.n, rng)?;
    let mut oracle = HsOracle::new();
    oracle.register(&key)?;
    let forge = grover_forge(&oracle, key.serial(), rng)?;
    let accept = hs_accept_probability(&oracle, key.serial(), &forge.note.state)?;
    Ok(ExperimentReport::new(
        config,
        vec![
            Metric::exact("search_queries", forge.search_queries as f64),
            Metric::exact("confirm_queries", forge.confirm_queries as f64),
            Metric::exact("total_queries", forge.total_queries() as f64),
            Metric::exact("log2_search_queries", (forge.search_queries as f64).log2()),
            Metric::exact("attempts", forge.attempts as f64),
            Metric::exact("forged_accept_exact", accept),
        ],
    ))
}

fn hs_reduction_experiment(
    config: &ExperimentConfig,
    rng: &mut Stream,
) -> Result<ExperimentReport> {
    let n = config.n;
    let key = hs_keygen(n, rng)?;
    let (inst, _) = polys_generate(&key, 2 * n, 0.0, rng)?;
    let cloner = PerfectCloner::for_key(&key)?;
    let outcome = sec_reduction_forge(&inst, &cloner, config.trials, rng)?;
    let spans = outcome.bases.iter().filter(|b| *b == key.subspace()).count() as u64;
    Ok(ExperimentReport::new(
        config,
        vec![
            Metric::rate("postselect", outcome.successes, outcome.trials),
            Metric::exact("postselect_expected", 0.5f64.powi((n / 2) as i32)),
            Metric::rate("basis_spans_key", spans, outcome.successes.max(1)),
        ],
    ))
}

fn hs_noisy_experiment(config: &ExperimentConfig, rng: &mut Stream) -> Result<ExperimentReport> {
    let n = config.n;
    let m = 2 * n + 4;
    let flags_match = |flags: &[bool], noisy: &[usize]| {
        flags.iter().enumerate().all(|(i, &genuine)| genuine == !noisy.contains(&i))
    };
    let mut success = 0u64;
    let mut ambiguous = 0u64;
    let mut worst_fidelity = f64::INFINITY;
    let mut restore_iters = Vec::new();
    for _ in 0..config.trials {
        let key = hs_keygen(n, rng)?;
        let (inst, truth) = polys_generate(&key, m, 0.25, rng)?;
        let note = hs_mint(&key)?;
        match noisy_poly_attack(&inst, &note, rng) {
            Ok(out) => {
                worst_fidelity = worst_fidelity.min(out.min_fidelity);
                restore_iters.push(out.restore_iterations as f64);
                let classified = flags_match(&out.genuine_ps, &truth.noisy_ps)
                    && flags_match(&out.genuine_qs, &truth.noisy_qs);
                if classified && out.basis == *key.subspace() {
                    success += 1;
                }
            }
            Err(Error::InvalidState(_)) => ambiguous += 1,
            Err(e) => return Err(e),
        }
    }
    let mut metrics = vec![
        Metric::rate("full_recovery", success, config.trials),
        Metric::exact("ambiguous", ambiguous as f64),
        Metric::exact("decoys_per_side", (m / 4) as f64),
    ];
    if worst_fidelity.is_finite() {
        metrics.insert(1, Metric::exact("worst_note_fidelity", worst_fidelity));
        metrics.push(Metric::from_samples("restore_iterations_mean", &restore_iters));
    }
    Ok(ExperimentReport::new(config, metrics))
}

// ------------------------------------------------------------ clone tuner

fn clonopt(config: &ExperimentConfig, rng: &mut Stream) -> Result<ExperimentReport> {
    let opt = optimize_clone_channel(CLONE_OPT_ITERS)?;
    let monotone = opt.history.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    let mut bank = WiesnerBank::with_ledger(config.n, RejectionPolicy::Destroy, rng.split())?;
    let both = counterfeit_loop(&mut bank, Some(&opt.channel), config.trials, rng)?;
    Ok(ExperimentReport::new(
        config,
        vec![
            Metric::exact("objective", opt.channel.objective()),
            Metric::exact("objective_target", 0.75),
            Metric::exact("ascent_steps", (opt.history.len() - 1) as f64),
            Metric::exact("history_monotone", f64::from(u8::from(monotone))),
            Metric::rate("both_pass", both, config.trials),
            Metric::exact("both_pass_expected", 0.75f64.powi(config.n as i32)),
        ],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Format;

    fn config(command: &str, variant: Option<&str>, n: usize, trials: u64, seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            command: command.into(),
            variant: variant.map(str::to_owned),
            n,
            trials,
            epsilon: 0.01,
            seed,
            output: None,
            format: Format::Json,
        }
    }

    #[test]
    fn selftest_passes_and_lists_every_check() {
        let report = run(&config("selftest", None, 4, 1, 11)).unwrap();
        assert_eq!(report.metric("checks_total").unwrap().value, 12.0);
        assert!(report.metrics.iter().all(|m| m.value >= 1.0));
    }

    #[test]
    fn wiesner_naive_rate_tracks_five_eighths() {
        let report = run(&config("wiesner", None, 1, 4000, 12)).unwrap();
        let m = report.metric("both_pass").unwrap();
        let (lo, hi) = m.ci.unwrap();
        assert!(lo <= 0.625 && 0.625 <= hi, "band [{lo}, {hi}]");
        assert_eq!(report.metric("both_pass_expected").unwrap().value, 0.625);
    }

    #[test]
    fn reports_are_deterministic_per_seed() {
        let c = config("simon", None, 5, 12, 99);
        let a = run(&c).unwrap().render(Format::Json).unwrap();
        let b = run(&c).unwrap().render(Format::Json).unwrap();
        assert_eq!(a, b);
        let other = run(&config("simon", None, 5, 12, 100)).unwrap();
        assert_ne!(a, other.render(Format::Json).unwrap());
    }

    #[test]
    fn validation_rejects_unknown_commands_variants_and_ranges() {
        assert!(matches!(
            run(&config("teleport", None, 4, 1, 1)),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            run(&config("wiesner", Some("subtle"), 4, 1, 1)),
            Err(Error::InvalidArgument(_))
        ));
        assert!(validate(&config("wiesner", None, 11, 1, 1)).is_err());
        assert!(validate(&config("hs", None, 5, 1, 1)).is_err());
        let mut c = config("bomb", None, 1, 1, 1);
        c.epsilon = 2.0;
        assert!(validate(&c).is_err());
        let mut c = config("attack", Some("bomb"), 1, 1, 1);
        c.epsilon = 0.2;
        assert!(validate(&c).is_err());
    }

    #[test]
    fn grover_driver_closed_form_is_exact() {
        let report = run(&config("grover", None, 4, 40, 5)).unwrap();
        assert!(report.metric("formula_max_abs_error").unwrap().value < 1e-9);
        assert!((report.metric("single_iteration_success").unwrap().value - 1.0).abs() < 1e-9);
        let hit = report.metric("hit").unwrap();
        let expected = report.metric("hit_expected").unwrap().value;
        let (lo, hi) = hit.ci.unwrap();
        assert!(lo <= expected && expected <= hi);
    }

    #[test]
    fn hs_verify_driver_accepts_legit_notes_always() {
        let report = run(&config("hs", None, 4, 60, 21)).unwrap();
        assert_eq!(report.metric("legit_accept").unwrap().value, 1.0);
        assert!((report.metric("legit_accept_exact").unwrap().value - 1.0).abs() < 1e-9);
        let rate = report.metric("random_t_accept").unwrap().value;
        let expected = report.metric("random_t_accept_expected").unwrap().value;
        assert!((rate - expected).abs() < 0.25, "rate {rate} vs expected {expected}");
    }

    #[test]
    fn bomb_driver_dud_verdicts_are_exact() {
        let mut c = config("bomb", None, 1, 300, 8);
        c.epsilon = 0.05;
        let report = run(&c).unwrap();
        assert_eq!(report.metric("dud_correct").unwrap().value, 1.0);
        let exploded = report.metric("live_exploded").unwrap();
        let expected = report.metric("explosion_expected").unwrap().value;
        let (lo, hi) = exploded.ci.unwrap();
        assert!(lo <= expected && expected <= hi, "band [{lo}, {hi}] vs {expected}");
    }

    #[test]
    fn attack_bomb_driver_identifies_single_qubits() {
        let mut c = config("attack", Some("bomb"), 1, 40, 17);
        c.epsilon = 0.02;
        let report = run(&c).unwrap();
        assert!(report.metric("identified").unwrap().value >= 0.9);
        assert!(report.metric("caught").unwrap().value <= 0.1);
    }

    #[test]
    fn hh_driver_reports_the_separable_gap() {
        let report = run(&config("hh", None, 3, 30, 23)).unwrap();
        assert!((report.metric("shared_bell_after").unwrap().value - 1.0).abs() < 1e-9);
        assert_eq!(report.metric("shared_blocks_disjoint").unwrap().value, 0.0);
        assert!(report.metric("disjoint_bell_best").unwrap().value <= 0.5 + 1e-9);
        assert_eq!(report.metric("disjoint_blocks_disjoint").unwrap().value, 1.0);
    }
}
