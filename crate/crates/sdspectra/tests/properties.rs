//! Property tests for the structural invariants.

use proptest::prelude::*;

use sdspectra::codec::{encode, make_selector, EncodedPayload};
use sdspectra::diffmat::{apply_d, apply_d_inv, apply_d_pow, binom, reverse};
use sdspectra::sigmadelta::{quantize_order_r, verify_run, Alphabet};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inverse_identity(v in prop::collection::vec(-1.0f64..1.0, 2..80)) {
        let back = apply_d_inv(&apply_d(&v));
        for (a, b) in v.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn reverse_involution(v in prop::collection::vec(-1e6f64..1e6, 1..80)) {
        prop_assert_eq!(reverse(&reverse(&v)), v);
    }

    #[test]
    fn pascal_identity(n in 1u64..2100, k in 1u64..=12) {
        // k stays within the band widths the crate uses (r <= 6, 2r <= 12);
        // beyond that the checked product would legitimately overflow.
        prop_assert_eq!(binom(n, k), binom(n - 1, k - 1) + binom(n - 1, k));
    }

    #[test]
    fn payload_round_trips(
        bits in prop::collection::vec(any::<bool>(), 8..160),
        r in 1usize..=3,
        m in 1usize..40,
        seed in any::<u64>(),
    ) {
        let n = bits.len();
        let q: Vec<f64> = bits.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect();
        let sel = make_selector(m, n, seed).unwrap();
        let payload = encode(&q, r, &sel, &Alphabet::OneBit).unwrap();
        let back = EncodedPayload::from_bytes(&payload.to_bytes()).unwrap();
        prop_assert_eq!(&payload, &back);
        // magnitude invariant
        let cap = binom((n + r - 1) as u64, r as u64);
        for &t in &payload.entries {
            prop_assert!(t.abs() <= cap);
        }
    }

    #[test]
    fn state_equation_identity(
        y in prop::collection::vec(-1.0f64..1.0, 4..200),
        r in 1usize..=3,
    ) {
        let alphabet = if r == 1 {
            Alphabet::OneBit
        } else {
            Alphabet::midrise(1.0, (3 + (1usize << r)).div_ceil(2)).unwrap()
        };
        let run = quantize_order_r(&y, r, alphabet).unwrap();
        let rep = verify_run(&run);
        prop_assert!(rep.state_equation_ok, "residual {}", rep.max_state_residual);
        prop_assert!(rep.stable, "u_inf {}", rep.u_inf);
    }

    #[test]
    fn d_pow_linearity(
        v in prop::collection::vec(-1.0f64..1.0, 8..40),
        w in prop::collection::vec(-1.0f64..1.0, 8..40),
        r in 1usize..=4,
        a in -2.0f64..2.0,
    ) {
        let n = v.len().min(w.len());
        let combo: Vec<f64> = (0..n).map(|i| a * v[i] + w[i]).collect();
        let lhs = apply_d_pow(&combo, r);
        let dv = apply_d_pow(&v[..n], r);
        let dw = apply_d_pow(&w[..n], r);
        for i in 0..n {
            prop_assert!((lhs[i] - (a * dv[i] + dw[i])).abs() <= 1e-10);
        }
    }
}
