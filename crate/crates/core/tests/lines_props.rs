use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tropicast::arrangement::intersect_polynomials;
use tropicast::exactgeom::Point;
use tropicast::io::{from_json, to_json, LineJson, SystemJson};
use tropicast::lines::{
    binomial2, caterpillar, check_caterpillar_bound, count_line_types, enumerate_split_systems, random_caterpillar, random_line, random_projection, LineTree,
    LinesError,
};
use tropicast::project::ProjectError;

#[test]
fn split_systems_build_distinct_trees() {
    for n in 2..=6 {
        let systems = enumerate_split_systems(n);
        assert_eq!(systems.len() as u64, count_line_types(n));
        let mut seen = std::collections::BTreeSet::new();
        for s in &systems {
            let t = LineTree::from_splits(n, s).unwrap();
            assert!(seen.insert(t.splits()));
        }
    }
}

// labeled caterpillars on L ≥ 5 leaves: L!/8
#[test]
fn caterpillar_census() {
    for (n, want) in [(4usize, 15usize), (5, 90), (6, 630)] {
        let got = enumerate_split_systems(n).iter().filter(|s| LineTree::from_splits(n, s).unwrap().is_caterpillar()).count();
        assert_eq!(got, want, "n = {n}");
    }
}

#[test]
fn rejects_bad_trees_and_positions() {
    assert_eq!(LineTree::from_splits(4, &[0b0011, 0b0110]), Err(LinesError::NotATree));
    let c = caterpillar(4, None).unwrap();
    let mut moved = c.line.positions.clone();
    moved[1][3] += tropicast::exactgeom::int(1);
    assert_eq!(tropicast::lines::TropicalLine::new(c.line.tree.clone(), moved).err(), Some(LinesError::NotALine));
    assert!(matches!(caterpillar(2, None), Err(LinesError::TooSmall { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn random_lines_are_balanced_and_round_trip(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let line = random_line(n, &mut rng).unwrap();
        prop_assert!(line.balancing_defects().iter().all(|d| d.iter().all(|x| *x == tropicast::exactgeom::int(0))));
        let back = from_json::<LineJson>(&to_json(&LineJson::from_line(&line))).unwrap().to_line().unwrap();
        prop_assert_eq!(back, line);
    }

    #[test]
    fn caterpillar_counts_stay_within_the_bound(seed in any::<u64>(), n in 3usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let line = random_caterpillar(n, &mut rng).unwrap();
        let proj = random_projection(n, 4, &mut rng);
        match check_caterpillar_bound(&line, &proj) {
            Ok(c) => {
                prop_assert_eq!(c.bound, binomial2(n - 1));
                prop_assert!(c.ok);
            }
            Err(LinesError::Project(ProjectError::NonGeneric(..) | ProjectError::OverlapDegenerate(..) | ProjectError::DegenerateProjection(_))) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    // positions with random positive lengths still give a system cutting out the line
    #[test]
    fn caterpillar_systems_cut_out_their_lines(lengths in prop::collection::vec(1i64..=5, 3)) {
        let n = 4;
        let mut v: Vec<Point> = vec![vec![tropicast::exactgeom::int(0); n]];
        for (j, l) in lengths.iter().take(n - 2).enumerate() {
            let prev = v[j].clone();
            v.push(prev.iter().enumerate().map(|(i, x)| if i <= j + 1 { x - tropicast::exactgeom::int(*l) } else { x.clone() }).collect());
        }
        let c = caterpillar(n, Some(v.clone())).unwrap();
        let r = intersect_polynomials(&c.system).unwrap();
        let mut got = r.complex.vertices.clone();
        got.sort();
        v.sort();
        prop_assert_eq!(got, v);
        let sys = from_json::<SystemJson>(&to_json(&SystemJson::from_polys(&c.system))).unwrap().to_factors().unwrap();
        prop_assert_eq!(sys.into_iter().flatten().collect::<Vec<_>>(), c.system);
    }
}
