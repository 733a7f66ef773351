//! Property tests for the codec and decoder invariants.

use proptest::prelude::*;

use phasecode::detection::{analytic_detection, decode, BeamState, DecodeOutcome};
use phasecode::encoding::{
    bits_to_track, quantize_theta, theta_of_level, track_to_bits, LevelCode, PhaseSymbol, Track,
    Transform,
};

proptest! {
    /// Any payload survives encode -> serialize -> parse -> decode at zero
    /// noise, regardless of padding.
    #[test]
    fn codec_round_trips(
        bits in prop::collection::vec(any::<bool>(), 0..400),
        lpt_pow in 0u32..7,
    ) {
        let code = LevelCode::new(1 << lpt_pow).unwrap();
        let track = bits_to_track::<f64>(&bits, code, 650e-9).unwrap();
        prop_assert_eq!(track_to_bits(&track).unwrap(), bits.clone());

        let mut buf = Vec::new();
        track.write(&mut buf).unwrap();
        let parsed = Track::<f64>::read(buf.as_slice()).unwrap();
        prop_assert_eq!(&parsed, &track);
        prop_assert_eq!(track_to_bits(&parsed).unwrap(), bits);
    }

    /// The theta quantizer is monotone nondecreasing and inverts the level
    /// centers.
    #[test]
    fn quantizer_is_monotone(
        a in 0.0f64..std::f64::consts::PI,
        b in 0.0f64..std::f64::consts::PI,
        lpt in 1u32..200,
    ) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(quantize_theta(lo, lpt) <= quantize_theta(hi, lpt));
        let level = quantize_theta(lo, lpt);
        prop_assert_eq!(quantize_theta(theta_of_level::<f64>(level, lpt), lpt), level);
    }

    /// A noiseless phi scan identifies every symbol on the detectable
    /// circle: matching shape, and (sign, theta) equal up to the canonical
    /// representation.
    #[test]
    fn noiseless_decode_inverts_encoding(
        idx in 0u8..4,
        theta in 0.0f64..(std::f64::consts::PI * 0.999),
        alpha in 0.8f64..20.0,
        beta in 0.8f64..20.0,
    ) {
        let transform = Transform::from_index(idx).unwrap();
        let symbol = PhaseSymbol::new(transform, theta).unwrap();
        let beam3 = BeamState::coherent(alpha, 0.0);
        let beam2 = BeamState::coherent(beta, 0.0);
        let out = decode(
            |phi| analytic_detection(&symbol, &beam3, &beam2.with_phase(phi)),
            64,
        ).unwrap();
        match out {
            DecodeOutcome::Decoded(d) => {
                prop_assert_eq!(d.transform.is_flipped(), transform.is_flipped());
                let got = d.symbol();
                // Compare on the phase circle: distance between zeta values.
                let two_pi = 2.0 * std::f64::consts::PI;
                let mut dz = (got.zeta() - symbol.zeta()).abs() % two_pi;
                if dz > std::f64::consts::PI {
                    dz = two_pi - dz;
                }
                prop_assert!(dz < 1e-7, "zeta distance {dz}");
            }
            DecodeOutcome::Undecidable { .. } => {
                // Only possible when the fitted amplitude 2*alpha*beta sits
                // at or below the noise sigma sqrt(alpha^2 + beta^2).
                let amp = 2.0 * alpha * beta;
                let sigma = (alpha * alpha + beta * beta).sqrt();
                prop_assert!(amp <= sigma * 1.0000001);
            }
        }
    }
}
