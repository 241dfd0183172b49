use mcop::algebra::{Algebra, Order};
use mcop::geometry::{expand_in_basis, lattice_points, Rat, NODE_BUDGET};
use mcop::marked_poset::{gt_type_a, gt_type_c, MarkedPoset};
use mcop::mco::{build_mco, hat_points, Chart, Transfer};
use mcop::polyptych::Polyptych;
use mcop::rng;
use num_traits::Zero;
use proptest::prelude::*;

/// Weakly increasing marking of the given length from non-negative gaps.
fn marking(gaps: &[i64]) -> Vec<i64> {
    gaps.iter()
        .scan(0, |acc, g| {
            *acc += g;
            Some(*acc)
        })
        .collect()
}

fn gt(type_c: bool, n: usize, gaps: &[i64]) -> MarkedPoset {
    if type_c {
        gt_type_c(n, &marking(&gaps[..n])).unwrap()
    } else {
        gt_type_a(n, &marking(&gaps[..=n])).unwrap()
    }
}

fn rat_vec(v: &[(i64, i64)]) -> Vec<Rat> {
    v.iter().map(|&(a, b)| Rat::new(a.into(), b.into())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn levels_partition_the_poset(c in any::<bool>(), n in 1usize..=4, gaps in prop::collection::vec(1i64..=3, 5)) {
        let p = gt(c, n, &gaps);
        let g = p.graded().unwrap();
        prop_assert_eq!(g.levels.iter().map(Vec::len).sum::<usize>(), p.len());
    }

    #[test]
    fn gt_families_classify(c in any::<bool>(), n in 1usize..=4, gaps in prop::collection::vec(1i64..=3, 5)) {
        prop_assert!(gt(c, n, &gaps).classify_spade().is_ok());
    }

    #[test]
    fn shift_vector_is_rank_constant_and_strict(c in any::<bool>(), n in 1usize..=3, gaps in prop::collection::vec(2i64..=4, 5)) {
        let p = gt(c, n, &gaps);
        let u = p.choose_u(true).unwrap().u;
        let g = p.graded().unwrap();
        for level in &g.levels {
            let unmarked: Vec<i64> = level.iter().filter(|&&e| !p.is_marked(e)).map(|&e| u[e]).collect();
            prop_assert!(unmarked.windows(2).all(|w| w[0] == w[1]));
            for &e in level.iter().filter(|&&e| p.is_marked(e)) {
                prop_assert_eq!(Some(u[e]), p.marking(e));
            }
        }
        for e in p.coords() {
            for &q in p.lower_covers(*e) {
                prop_assert!(u[q] < u[*e]);
            }
        }
    }

    #[test]
    fn reduced_levels_are_closed_under_removal(c in any::<bool>(), n in 1usize..=4) {
        let p = gt(c, n, &[1, 1, 1, 1, 1]);
        for i in 0..p.graded().unwrap().levels.len() - 1 {
            let b = p.breve_level(i).unwrap();
            for &q in &b.upper {
                prop_assert!(!p.is_marked(q));
                prop_assert!(b.edges.iter().filter(|&&(_, up)| up == q).count() >= 2);
            }
        }
    }

    #[test]
    fn mutation_axioms(c in any::<bool>(), masks in prop::array::uniform3(0u64..16), x in prop::collection::vec((-30i64..=30, 1i64..=7), 4)) {
        let p = gt(c, 2, &[1, 2, 1, 2, 1]);
        let d = p.dim();
        let tr = Transfer::new(&p);
        let [a, b, cc] = masks.map(|m| Chart(m & ((1 << d) - 1)));
        let x = rat_vec(&x[..d]);
        prop_assert_eq!(tr.mu_between(a, a, &x), x.clone());
        let y = tr.mu_between(a, b, &x);
        prop_assert_eq!(tr.mu_between(b, a, &y), x.clone());
        prop_assert_eq!(tr.mu_between(b, cc, &y), tr.mu_between(a, cc, &x));
    }

    #[test]
    fn gt_c_linearity_directions(mask in 0u64..16, x in prop::collection::vec(-9i64..=9, 4), t in -5i64..=5) {
        let p = gt_type_c(2, &[2, 4]).unwrap();
        let tr = Transfer::new(&p);
        // the odd rows q_{1,·} and q_{3,·} span directions along which every μ_C is linear
        let dirs: [&[&str]; 2] = [&["q_{1,1}", "q_{1,2}"], &["q_{3,1}"]];
        for dir in dirs {
            let mut v = vec![0i64; 4];
            for name in dir {
                v[p.coord_of(p.element(name).unwrap()).unwrap()] = t;
            }
            let xv: Vec<i64> = x.iter().zip(&v).map(|(a, b)| a + b).collect();
            let lhs = tr.mu(Chart(mask), &xv);
            let mv = tr.mu(Chart(mask), &v);
            let rhs: Vec<i64> = tr.mu(Chart(mask), &x).iter().zip(&mv).map(|(a, b)| a + b).collect();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn expand_then_recombine(cols in prop::collection::vec(prop::collection::vec(-3i64..=3, 3), 3), x in prop::collection::vec((-9i64..=9, 1i64..=4), 3)) {
        let basis: Vec<Vec<Rat>> = cols.iter().map(|c| c.iter().map(|&v| Rat::from_integer(v.into())).collect()).collect();
        let x = rat_vec(&x);
        if let Ok(coef) = expand_in_basis(&x, &basis) {
            let mut back = vec![Rat::zero(); 3];
            for (c, b) in coef.iter().zip(&basis) {
                for (acc, v) in back.iter_mut().zip(b) {
                    *acc += c * v;
                }
            }
            prop_assert_eq!(back, x);
        }
    }

    #[test]
    fn dilation_nests_when_origin_inside(mask in 0u64..8) {
        let p = gt_type_a(2, &[0, 2, 4]).unwrap();
        let u = p.choose_u(true).unwrap().coords(&p);
        let one = hat_points(&p, &u, Chart(mask), 1, NODE_BUDGET).unwrap();
        let two = hat_points(&p, &u, Chart(mask), 2, NODE_BUDGET).unwrap();
        prop_assert!(one.contains(&vec![0; 3]));
        prop_assert!(one.iter().all(|x| two.contains(x)));
    }

    #[test]
    fn normal_form_is_confluent(seed in 0u64..1000) {
        let alg = Algebra::new(&gt_type_c(2, &[2, 4]).unwrap()).unwrap();
        let mut g = rng::stream(seed, 0);
        let f = alg.random_sparse(&mut g, 3, 2);
        let h = alg.random_sparse(&mut g, 2, 2);
        let prod = f.formal_mul(&h);
        let canonical = alg.normal_form_with(&prod, &mut Order::Rank);
        let mut r = rng::stream(seed, 1);
        prop_assert_eq!(alg.normal_form_with(&prod, &mut Order::Random(&mut r)), canonical.clone());
        prop_assert_eq!(alg.normal_form(&canonical), canonical);
    }

    #[test]
    fn dual_elements_are_points(seed in 0u64..500) {
        let m = Polyptych::new(&gt_type_c(2, &[2, 4]).unwrap());
        let mut g = rng::stream(seed, 0);
        let n = m.dual_complete(&rng::int_vector(&mut g, 4, 4)).unwrap();
        let pairs = m.sample_pairs(seed, 1, 20, 3);
        let f = |x: &[i64]| m.eval_dual(&n, x).unwrap();
        prop_assert!(m.verify_point_axiom(&f, &pairs).is_ok());
    }
}

#[test]
fn empty_chart_has_only_cover_rows() {
    for p in [gt_type_a(3, &[0, 1, 2, 3]).unwrap(), gt_type_c(3, &[1, 2, 3]).unwrap()] {
        let h = build_mco(&p, Chart::EMPTY);
        for (a, _) in &h.rows {
            let nz: Vec<_> = a.iter().filter(|v| !v.is_zero()).collect();
            assert!(nz.len() <= 2, "row {a:?} is longer than a single cover");
        }
    }
}

#[test]
fn lattice_points_scale_with_dilation() {
    let p = gt_type_c(1, &[3]).unwrap();
    assert_eq!(p.dim(), 1);
    for chart in Chart::all(1) {
        let h = build_mco(&p, chart);
        for k in 0..4 {
            let pts = lattice_points(&h.dilate(k), &[-20], &[20], NODE_BUDGET).unwrap();
            assert_eq!(pts.len() as i64, 3 * k + 1);
        }
    }
}
