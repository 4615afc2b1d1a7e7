use std::sync::OnceLock;

use num_bigint::BigUint;
use proptest::prelude::*;
use rand::SeedableRng;
use thinlie::maxclass::random_sequence;
use thinlie::*;

fn binomial(n: u64, k: u64) -> BigUint {
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

fn small_corpus() -> &'static [GradedAlgebra] {
    static CORPUS: OnceLock<Vec<GradedAlgebra>> = OnceLock::new();
    CORPUS.get_or_init(|| {
        [Family::A, Family::C { s: 1 }, Family::L0q, Family::B { third: 2 }]
            .iter()
            .map(|fam| compile_family(fam, 7, 7, 45).unwrap().0)
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lucas_matches_big_integer_binomial(p in prop::sample::select(vec![5u32, 7, 11, 13]), n in 0u64..2197, k in 0u64..2197) {
        let n = n % (p as u64).pow(3);
        let k = k % (n + 1);
        let want = (binomial(n, k) % BigUint::from(p)).to_u32_digits().first().copied().unwrap_or(0);
        prop_assert_eq!(lucas_binom(n, k, p), want);
    }

    #[test]
    fn solutions_satisfy_the_system(
        rows in 1usize..6,
        cols in 1usize..6,
        seed in prop::collection::vec(0u32..7, 36),
        x in prop::collection::vec(0u32..7, 6),
    ) {
        let f = PrimeField::new(7).unwrap();
        let mut a = FpMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                a.set(i, j, seed[i * 6 + j]);
            }
        }
        let b = a.apply(&f, &x[..cols]);
        match solve_or_kernel(&f, &a, &b.0).unwrap() {
            Solution::Solved { particular, kernel } => {
                prop_assert_eq!(a.apply(&f, &particular.0), b);
                for k in &kernel {
                    prop_assert!(a.apply(&f, &k.0).is_zero());
                }
                prop_assert_eq!(a.rank(&f) + kernel.len(), cols);
            }
            Solution::Inconsistent => prop_assert!(false, "consistent system reported inconsistent"),
        }
    }

    #[test]
    fn divided_powers_commute_and_associate(i in 0usize..7, j in 0usize..7, k in 0usize..7) {
        let dp = DividedPowerAlgebra::new(7, 7).unwrap();
        let f = PrimeField::new(7).unwrap();
        prop_assert_eq!(dp.product(i, j), dp.product(j, i));
        let left = dp.product(i, j).and_then(|(c, d)| dp.product(d, k).map(|(c2, e)| (f.mul(c, c2), e)));
        let right = dp.product(j, k).and_then(|(c, d)| dp.product(i, d).map(|(c2, e)| (f.mul(c, c2), e)));
        prop_assert_eq!(left.filter(|t| t.0 != 0), right.filter(|t| t.0 != 0));
    }

    #[test]
    fn sequence_text_and_json_round_trip(bits in prop::collection::vec(any::<bool>(), 1..60)) {
        // no two consecutive CX, first entry CY
        let mut s = String::from("Y");
        for b in bits {
            s.push(if b && !s.ends_with('X') { 'X' } else { 'Y' });
        }
        let seq = CentralizerSequence::parse(7, &s).unwrap();
        prop_assert_eq!(seq.to_string(), s);
        let back: CentralizerSequence = serde_json::from_str(&serde_json::to_string(&seq).unwrap()).unwrap();
        prop_assert_eq!(back, seq);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn cached_brackets_agree_with_recomputation(which in 0usize..4, a in any::<prop::sample::Index>(), b in any::<prop::sample::Index>()) {
        let alg = &small_corpus()[which];
        // recomputation is exponential in the degree of the right factor
        let low = alg.basis().iter().take_while(|e| e.degree <= 12).count();
        let (a, b) = (a.index(alg.basis().len()), b.index(low));
        if alg.basis()[a].degree + alg.basis()[b].degree <= alg.built_degree() {
            let cached = alg.bracket_basis(a, b).unwrap().to_vec();
            prop_assert_eq!(cached, alg.bracket_uncached(a, b).unwrap().coords.0);
            let ab = alg.bracket(&alg.basis_element(a), &alg.basis_element(b)).unwrap();
            let ba = alg.bracket(&alg.basis_element(b), &alg.basis_element(a)).unwrap();
            prop_assert!(alg.add(&ab, &ba).is_zero());
        }
    }

    #[test]
    fn jacobi_on_random_triples(which in 0usize..4, i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>(), k in any::<prop::sample::Index>()) {
        let alg = &small_corpus()[which];
        let n = alg.basis().len();
        let [a, b, c] = [i.index(n), j.index(n), k.index(n)].map(|g| alg.basis_element(g));
        if a.degree + b.degree + c.degree <= alg.built_degree() {
            let t1 = alg.bracket(&alg.bracket(&a, &b).unwrap(), &c).unwrap();
            let t2 = alg.bracket(&alg.bracket(&b, &c).unwrap(), &a).unwrap();
            let t3 = alg.bracket(&alg.bracket(&c, &a).unwrap(), &b).unwrap();
            prop_assert!(alg.add(&alg.add(&t1, &t2), &t3).is_zero());
        }
    }

    #[test]
    fn detect_inverts_compile_on_class_sequences(seed in any::<u64>()) {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let sequence = random_sequence(7, 14, &mut rng).unwrap();
        let pattern = family_pattern_for(&Family::Tq2 { sequence }, 7, 7, 60).unwrap();
        let (alg, report) = compile(&pattern, 60).unwrap();
        prop_assert!(report.passed());
        prop_assert_eq!(detect(&alg).unwrap().pattern, pattern.truncated(alg.nominal_degree()));
    }

    #[test]
    fn detect_inverts_compile_on_progressions(third in 2i64..6, second in 2i64..6) {
        for fam in [Family::B { third }, Family::D { s: 1, second }] {
            let pattern = family_pattern_for(&fam, 7, 7, 60).unwrap();
            let (alg, report) = compile(&pattern, 60).unwrap();
            prop_assert!(report.passed(), "{:?}", fam);
            prop_assert_eq!(detect(&alg).unwrap().pattern, pattern.truncated(alg.nominal_degree()));
        }
    }

    #[test]
    fn normalizing_is_idempotent(seed in any::<u64>()) {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let sequence = random_sequence(7, 20, &mut rng).unwrap();
        let pattern = family_pattern(&Family::Tq2 { sequence }, 7, 7, 120).unwrap();
        prop_assert_eq!(normalize(&pattern).unwrap().pattern, pattern);
    }
}
