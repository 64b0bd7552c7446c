use netgame::belief::{gamma, row_to_type, type_row, Beliefs, Prior, TypeId};
use netgame::graph::{pair_count, DecayBound, Graph};
use netgame::report::fmt_g;
use netgame::solver::{build_block_system, solve_direct, solve_fixed_point};
use netgame::welfare::welfare;
use proptest::prelude::*;
use proptest::sample::subsequence;

fn graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(|n| {
        (0u128..1 << pair_count(n)).prop_map(move |c| Graph::from_code(n, c).unwrap())
    })
}

/// A table prior on four vertices with 1..=12 graphs and positive masses.
fn table4() -> impl Strategy<Value = Prior> {
    let codes: Vec<u128> = (0..64).collect();
    (subsequence(codes, 1..=12))
        .prop_flat_map(|cs| {
            let k = cs.len();
            (Just(cs), prop::collection::vec(0.01f64..1.0, k))
        })
        .prop_map(|(cs, w)| {
            let s: f64 = w.iter().sum();
            Prior::table(4, cs.into_iter().zip(w).map(|(c, x)| (c, x / s)).collect()).unwrap()
        })
}

proptest! {
    #[test]
    fn adjacency_is_symmetric_and_handshake_holds(g in graph(16)) {
        let n = g.n();
        for i in 0..n {
            prop_assert!(!g.has_edge(i, i));
            for j in 0..n {
                prop_assert_eq!(g.has_edge(i, j), g.has_edge(j, i));
            }
        }
        prop_assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.edge_count());
    }

    #[test]
    fn code_and_text_round_trip(g in graph(16)) {
        prop_assert_eq!(Graph::from_code(g.n(), g.code()).unwrap(), g);
        prop_assert_eq!(g.to_text().parse::<Graph>().unwrap(), g);
    }

    #[test]
    fn type_code_round_trip(n in 2usize..=16, i_frac in 0.0f64..1.0, code in any::<u32>()) {
        let i = ((i_frac * n as f64) as usize).min(n - 1);
        let code = code % gamma(n) as u32;
        let row = type_row(i, code);
        prop_assert_eq!(row >> i & 1, 0);
        prop_assert_eq!(row_to_type(i, row), code);
        prop_assert_eq!(row.count_ones() as usize, TypeId::new(i, code).degree());
    }

    #[test]
    fn posterior_rows_are_distributions(prior in table4()) {
        let b = Beliefs::new(&prior).unwrap();
        for i in 0..4 {
            for c in 0..gamma(4) as u32 {
                let obs = TypeId::new(i, c);
                let row = b.posterior_row(obs).unwrap();
                if b.on_support(obs) {
                    for j in (0..4).filter(|&j| j != i) {
                        let s: f64 = row.iter().filter(|(t, _)| t.player == j).map(|(_, p)| p).sum();
                        prop_assert!((s - 1.0).abs() < 1e-12);
                    }
                    // every target type must agree with the observer about their link
                    for (t, _) in &row {
                        prop_assert_eq!(t.links_to(i), obs.links_to(t.player));
                    }
                } else {
                    prop_assert!(row.is_empty());
                }
            }
        }
    }

    #[test]
    fn fixed_point_matches_direct(prior in table4(), scale in 0.0f64..0.95) {
        let lambda = scale / 3.0;
        let sys = build_block_system(&prior, lambda).unwrap();
        let fp = solve_fixed_point(&sys, 1e-12).unwrap().profile;
        let d = solve_direct(&sys).unwrap();
        for (a, b) in fp.values.iter().zip(&d.values) {
            prop_assert!((a - b).abs() < 1e-9);
            prop_assert!(*b >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn welfare_is_relabel_invariant(g in graph(8), seed in any::<u64>(), scale in 0.0f64..0.95) {
        let n = g.n();
        let lambda = scale / (n - 1) as f64;
        let mut perm: Vec<usize> = (0..n).collect();
        // Fisher-Yates driven by a splitmix-style sequence
        let mut s = seed;
        for k in (1..n).rev() {
            s = s.wrapping_add(0x9e37_79b9_7f4a_7c15);
            let j = (s >> 33) as usize % (k + 1);
            perm.swap(k, j);
        }
        let h = g.permuted(&perm).unwrap();
        let a = g.katz_bonacich(lambda, DecayBound::Uniform).unwrap();
        let mut b = vec![0.0; n];
        for v in 0..n {
            b[perm[v]] = a[v];
        }
        let wg = welfare(&g, &a, lambda).unwrap();
        let wh = welfare(&h, &b, lambda).unwrap();
        prop_assert!((wg - wh).abs() <= 1e-12 * wg.abs().max(1.0));
    }

    #[test]
    fn g_format_round_trips_to_twelve_digits(x in -1e15f64..1e15) {
        let back: f64 = fmt_g(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 1e-11 * x.abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn independent_links_match_expanded_table(pi in prop::collection::vec(0.05f64..0.95, 6)) {
        let n = 4;
        let mut full = vec![0.0; n * n];
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                full[i * n + j] = pi[k];
                full[j * n + i] = pi[k];
                k += 1;
            }
        }
        let prior = Prior::independent(n, full).unwrap();
        let factored = Beliefs::new(&prior).unwrap();
        let table = Beliefs::new(&prior.expand().unwrap()).unwrap();
        for i in 0..n {
            for ci in 0..gamma(n) as u32 {
                for j in (0..n).filter(|&j| j != i) {
                    for cj in 0..gamma(n) as u32 {
                        let (o, t) = (TypeId::new(i, ci), TypeId::new(j, cj));
                        let a = factored.posterior(o, t).unwrap();
                        let b = table.posterior(o, t).unwrap();
                        prop_assert!((a - b).abs() < 1e-12);
                    }
                }
            }
        }
    }
}
