//! Interaction-free testing: decide whether a detector is live by routing a
//! slowly rotated probe qubit through it and letting repeated collapse pin
//! the probe in place.

use crate::error::{Error, Result};
use crate::rng::Stream;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BombTruth {
    Live,
    Dud,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BombFinding {
    BombPresent,
    NoBomb,
    Exploded,
}

#[derive(Clone, Copy, Debug)]
pub struct BombOutcome {
    pub finding: BombFinding,
    pub rounds_used: usize,
}

/// Rounds used for tolerance `eps`: ceil(pi / (2 eps)). The per-round
/// rotation is pi/2 divided by that count, so it never exceeds `eps` and the
/// total rotation is exactly a quarter turn.
pub fn bomb_rounds(eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps <= std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidArgument(format!(
            "eps {eps} outside (0, pi/2]"
        )));
    }
    Ok((std::f64::consts::PI / (2.0 * eps)).ceil() as usize)
}

/// Theoretical explosion probability for a live detector:
/// 1 - cos^(2R)(pi / 2R).
pub fn explosion_probability(eps: f64) -> Result<f64> {
    let r = bomb_rounds(eps)?;
    let theta = std::f64::consts::FRAC_PI_2 / r as f64;
    Ok(1.0 - theta.cos().powi(2 * r as i32))
}

/// One run of the test on a simulated probe qubit starting in |0> (the
/// "pass" arm). Each round rotates it by pi/(2R); a live detector then
/// measures it in the computational basis, exploding on |1> and collapsing
/// it back to |0> otherwise. A dud never measures, so the probe accumulates
/// the full quarter turn and the final readout reports |1> ("no bomb")
/// deterministically.
pub fn bomb_test(truth: BombTruth, eps: f64, rng: &mut Stream) -> Result<BombOutcome> {
    let rounds = bomb_rounds(eps)?;
    let theta = std::f64::consts::FRAC_PI_2 / rounds as f64;
    let rot = crate::sim::Unitary::rotation(theta);
    let mut probe = crate::sim::PureState::zero(1)?;
    for round in 1..=rounds {
        probe = probe.apply_1q(&rot, 0)?;
        if truth == BombTruth::Live {
            let (bits, collapsed) = probe.measure(&[0], rng)?;
            if bits[0] == 1 {
                return Ok(BombOutcome { finding: BombFinding::Exploded, rounds_used: round });
            }
            probe = collapsed;
        }
    }
    let (bits, _) = probe.measure(&[0], rng)?;
    let finding = if bits[0] == 1 { BombFinding::NoBomb } else { BombFinding::BombPresent };
    Ok(BombOutcome { finding, rounds_used: rounds })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_count() {
        assert_eq!(bomb_rounds(0.1).unwrap(), 16);
        assert_eq!(bomb_rounds(std::f64::consts::FRAC_PI_2).unwrap(), 1);
        assert!(bomb_rounds(0.0).is_err());
        assert!(bomb_rounds(-1.0).is_err());
    }

    #[test]
    fn dud_is_classified_deterministically() {
        let mut rng = Stream::from_seed(401);
        for _ in 0..200 {
            let out = bomb_test(BombTruth::Dud, 0.1, &mut rng).unwrap();
            assert_eq!(out.finding, BombFinding::NoBomb);
        }
    }

    #[test]
    fn surviving_live_runs_always_report_the_bomb() {
        let mut rng = Stream::from_seed(409);
        for _ in 0..500 {
            let out = bomb_test(BombTruth::Live, 0.15, &mut rng).unwrap();
            assert_ne!(out.finding, BombFinding::NoBomb);
        }
    }

    #[test]
    fn explosion_rate_matches_theory() {
        let mut rng = Stream::from_seed(419);
        let eps = 0.1;
        let p = explosion_probability(eps).unwrap();
        let trials = 4000;
        let mut explosions = 0;
        for _ in 0..trials {
            if bomb_test(BombTruth::Live, eps, &mut rng).unwrap().finding
                == BombFinding::Exploded
            {
                explosions += 1;
            }
        }
        let freq = explosions as f64 / trials as f64;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((freq - p).abs() < 4.0 * sigma, "freq {freq} vs p {p}");
    }

    #[test]
    fn finer_steps_explode_less() {
        let mut probs = Vec::new();
        for &eps in &[0.4, 0.2, 0.1, 0.05] {
            probs.push(explosion_probability(eps).unwrap());
        }
        for w in probs.windows(2) {
            assert!(w[1] < w[0], "explosion probability should fall: {probs:?}");
        }
    }
}
