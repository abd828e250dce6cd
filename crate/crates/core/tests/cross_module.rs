use proptest::prelude::*;

use denomkit::arith::IntMatrix;
use denomkit::enumerate::{count_solutions, has_solution, solve_scaled_isometry, EnumerateOptions};
use denomkit::forms::{genus_equivalent, Form, FormKind, GenusOptions, GenusVerdict};
use denomkit::locals::{local_profile, LocalOptions};
use denomkit::so3::denominator_n_rotations;

fn forms() -> Vec<Form> {
    vec![
        Form::identity(FormKind::Quadratic, 2).unwrap(),
        Form::identity(FormKind::Quadratic, 3).unwrap(),
        Form::identity(FormKind::Quadratic, 4).unwrap(),
        Form::from_rows(&[[2, 1], [1, 2]]).unwrap(),
        Form::from_rows(&[[1, 0, 0], [0, 1, 0], [0, 0, 3]]).unwrap(),
        Form::identity(FormKind::Hermitian, 2).unwrap(),
    ]
}

/// A global solution reduces to a local one everywhere, so a certified
/// local "no" must come with an empty level.
#[test]
fn local_no_implies_global_empty() {
    for form in forms() {
        for n in 1..=12u64 {
            let profile = local_profile(&form, n, LocalOptions::default()).unwrap();
            let global = has_solution(&form, n, EnumerateOptions::default()).unwrap();
            if profile.verdicts.iter().any(|v| v.is_no()) {
                assert!(!global, "{} n={n}: local no but a global solution exists", form.label());
            }
            if global {
                assert_eq!(profile.member(), Some(true), "{} n={n}", form.label());
            }
        }
    }
}

#[test]
fn even_levels_of_three_squares_are_empty() {
    let id3 = Form::identity(FormKind::Quadratic, 3).unwrap();
    for n in (2..=10u64).step_by(2) {
        assert_eq!(count_solutions(&id3, n, EnumerateOptions::default()).unwrap(), 0, "n={n}");
        assert!(denominator_n_rotations(n).is_err());
    }
}

#[test]
fn rotation_sets_match_as_solution_sets() {
    let id3 = Form::identity(FormKind::Quadratic, 3).unwrap();
    for n in [1u64, 7, 15] {
        let a = denominator_n_rotations(n).unwrap();
        let b = solve_scaled_isometry(&id3, n, EnumerateOptions::default()).unwrap();
        let mut x = a.solutions.clone();
        x.sort();
        assert_eq!(x, b.solutions, "n={n}");
    }
}

fn unimodular() -> impl Strategy<Value = [[i64; 2]; 2]> {
    // products of elementary moves stay in GL₂(Z)
    prop::collection::vec((0usize..2, -2i64..=2), 1..5).prop_map(|moves| {
        let mut g = [[1i64, 0], [0, 1]];
        for (which, t) in moves {
            let (i, j) = if which == 0 { (0, 1) } else { (1, 0) };
            for row in g.iter_mut() {
                row[j] += t * row[i];
            }
        }
        g
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Integrally equivalent forms share a genus and every count.
    #[test]
    fn equivalent_forms_have_equal_counts(g in unimodular(), a in 1i64..4, b in -1i64..=1, c in 1i64..4) {
        prop_assume!(a * c - b * b > 0);
        let q = IntMatrix::from_rows(&[[a, b], [b, c]]).unwrap();
        let g = IntMatrix::from_rows(&g).unwrap();
        let q2 = g.transpose().mul(&q).mul(&g);
        let f = Form::quadratic(&q).unwrap();
        let f2 = Form::quadratic(&q2).unwrap();
        let verdict = genus_equivalent(&f, &f2, GenusOptions::default()).unwrap();
        let same = matches!(verdict, GenusVerdict::SameGenus { .. });
        prop_assert!(same);
        for n in 1..=6u64 {
            let opts = EnumerateOptions::default();
            prop_assert_eq!(count_solutions(&f, n, opts).unwrap(), count_solutions(&f2, n, opts).unwrap());
        }
    }
}
