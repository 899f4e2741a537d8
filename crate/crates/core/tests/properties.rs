use almostrep::group::Sl2Int;
use almostrep::hyperfinite::BlockSubalgebra;
use almostrep::linalg::{d2_distance, normalized_hs_norm, normalized_trace, random_ginibre, random_unitary};
use almostrep::report::{read_csv, RecordSet, ReportFormat};
use almostrep::sl2::{sigma_swap, CongruenceKind, ScanRow, SwapDirection};
use almostrep::spectral::GapReport;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Products of the plus-side letters for p = 2.
fn plus_element(letters: &[u8]) -> Sl2Int {
    let gens = [
        Sl2Int::from_i64(1, 0, 2, 1).unwrap(),
        Sl2Int::from_i64(1, 1, 0, 1).unwrap(),
        Sl2Int::from_i64(-1, 0, 0, -1).unwrap(),
    ];
    letters.iter().fold(Sl2Int::identity(), |acc, &l| {
        let g = &gens[(l % 3) as usize];
        acc.mul(&if l >= 3 { g.inverse() } else { g.clone() })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn d2_triangle(seed in any::<u64>(), a in 1usize..7, b in 1usize..7, c in 1usize..7) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (x, y, z) = (random_unitary(&mut r, a), random_unitary(&mut r, b), random_unitary(&mut r, c));
        let d = |p, q| d2_distance(p, q).unwrap();
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-12);
        prop_assert!((d(&x, &y) - d(&y, &x)).abs() <= 1e-12);
    }

    #[test]
    fn swap_is_multiplicative(u in prop::collection::vec(0u8..6, 0..10), v in prop::collection::vec(0u8..6, 0..10)) {
        let (x, y) = (plus_element(&u), plus_element(&v));
        let sw = |z: &Sl2Int| sigma_swap(z, 2, SwapDirection::PlusToMinus).unwrap();
        prop_assert_eq!(sw(&x.mul(&y)), sw(&x).mul(&sw(&y)));
        prop_assert_eq!(sigma_swap(&sw(&x), 2, SwapDirection::MinusToPlus).unwrap(), x);
    }

    #[test]
    fn expectation_is_a_trace_preserving_projection(seed in any::<u64>(), d in 1usize..4, m in 1usize..3, extra in 0usize..3) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let blocks = if extra > 0 { vec![(d, m), (extra, 1)] } else { vec![(d, m)] };
        let n = d * m + extra;
        let q = BlockSubalgebra::new(random_unitary(&mut r, n), blocks, 1e-10).unwrap();
        let x = random_ginibre(&mut r, n, n);
        let e = q.conditional_expectation(&x).unwrap();
        let ee = q.conditional_expectation(&e).unwrap();
        prop_assert!(normalized_hs_norm(&(&ee - &e)).unwrap() < 1e-10);
        prop_assert!((normalized_trace(&e) - normalized_trace(&x)).norm() < 1e-10);
        prop_assert!(normalized_hs_norm(&e).unwrap() <= normalized_hs_norm(&x).unwrap() + 1e-12);
    }

    #[test]
    fn gap_report_round_trips(lambda in 1e-3f64..2.0, w in 0.0f64..1.0, eps in 0.0f64..1.0, c in proptest::option::of(0.0f64..1e6)) {
        let rows = vec![GapReport {
            lambda,
            alpha: lambda / 4.0,
            epsilon_measured: eps,
            interval_weight: w,
            pass: w <= eps,
            c,
            c_prime: c.map(|v| 2.0 * v / lambda),
        }];
        let text = RecordSet::from_records(&rows).unwrap().to_string(ReportFormat::Csv).unwrap();
        prop_assert_eq!(read_csv::<GapReport, _>(text.as_bytes()).unwrap(), rows);
    }

    #[test]
    fn scan_row_round_trips(n in 2u64..100, dim in 1usize..5000, defect in 0.0f64..2.0, dist in 0.0f64..2.0, it in 0usize..10_000) {
        let rows = vec![ScanRow {
            n,
            kind: if n % 2 == 0 { CongruenceKind::Regular } else { CongruenceKind::ProjectiveLine },
            dim,
            defect,
            dist_upper_bound: dist,
            iterations: it,
            wallclock_ms: 0,
        }];
        let text = RecordSet::from_records(&rows).unwrap().to_string(ReportFormat::Csv).unwrap();
        prop_assert_eq!(read_csv::<ScanRow, _>(text.as_bytes()).unwrap(), rows);
    }
}
