//! End-to-end acceptance checks; prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tropicast::arrangement::{intersect_components, intersect_polynomials, IntersectionReport};
use tropicast::exactgeom::{frac, hull_i64, int, lower_hull_subdivision, point, Point, Polytope, Rational};
use tropicast::fiber::{
    expected_psi_value, face_mixed_identity, face_of_fiber_polytope, fiber_polytope, fiber_polytope_refined, mixed_fiber_polytope, psi_constant, scaled,
    FiberError, LinearFunctional,
};
use tropicast::lines::{
    binomial2, caterpillar, caterpillar_sweep, check_caterpillar_bound, component_pair_sips, copy_accounting, count_line_types, enumerate_split_systems,
    factored_image, lower_bound_projection, perturbed_product_curve, perturbed_quadrics,
};
use tropicast::project::{
    image_dual_subdivision, monomial_pushforward, pieces_cross, project_and_count, project_curves, Crossing, EmbeddedCurve, PieceKind, RationalProjection,
};
use tropicast::tropoly::{tropicalize, ValuedPolynomial};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn q3(a: Rational, b: Rational, c: Rational) -> Point {
    vec![a, b, c]
}

fn cube() -> Polytope {
    let pts: Vec<Vec<i64>> = (0..8).map(|i| vec![i & 1, (i >> 1) & 1, (i >> 2) & 1]).collect();
    hull_i64(&pts).unwrap()
}

fn cube_fiber() -> Check {
    let psi = LinearFunctional::new(vec![1, 1, 1]).unwrap();
    let s = fiber_polytope(&cube(), &psi).map_err(|e| e.to_string())?.polytope;
    let (h, t, f) = (frac(1, 2), frac(3, 2), frac(5, 2));
    let perms = [
        q3(h.clone(), t.clone(), f.clone()),
        q3(h.clone(), f.clone(), t.clone()),
        q3(t.clone(), h.clone(), f.clone()),
        q3(t.clone(), f.clone(), h.clone()),
        q3(f.clone(), h.clone(), t.clone()),
        q3(f.clone(), t.clone(), h.clone()),
    ];
    ensure(s == Polytope::hull(&perms).unwrap(), "fiber polytope of the cube is not the permutation hexagon")?;
    let w = point(&[0, -1, 0]);
    let face = cube().face_in_direction(&w).unwrap();
    let off = face_of_fiber_polytope(&cube(), &face, &psi, &w).map_err(|e| e.to_string())?;
    ensure(off == q3(int(1), frac(1, 2), int(1)), format!("face offset {off:?}"))?;
    let sf = fiber_polytope(&face, &psi).unwrap().polytope;
    ensure(s.face_unchecked(&w) == sf.translate(&off), "face of the hexagon is not the translated face fiber")?;
    Ok("hexagon with 6 vertices; face offset (1,1/2,1)".into())
}

fn monomial_map_data() -> (Vec<ValuedPolynomial>, RationalProjection, ValuedPolynomial) {
    let c = |v: &[(Vec<i64>, i64)]| v.iter().map(|(e, c)| (e.clone(), int(*c))).collect::<Vec<_>>();
    let f1 = tropicalize(3, &c(&[(vec![1, 0, 0], 1), (vec![0, 1, 0], 2), (vec![0, 0, 1], 1), (vec![0, 0, 0], -4)]), 2).unwrap();
    let f2 = tropicalize(3, &c(&[(vec![1, 0, 0], 3), (vec![0, 1, 0], -1), (vec![0, 0, 1], 2), (vec![0, 0, 0], 1)]), 2).unwrap();
    let g = tropicalize(3, &c(&[(vec![1, 0, 0], -338), (vec![0, 0, 2], -18), (vec![1, 1, 1], 483), (vec![0, 1, 3], 25), (vec![2, 2, 0], 343)]), 2).unwrap();
    (vec![f1, f2], RationalProjection::new(vec![vec![1, 2, 0], vec![0, 1, 1]]).unwrap(), g)
}

fn monomial_map_example() -> Check {
    let (fs, proj, g) = monomial_map_data();
    ensure(proj.kernel() == [vec![2, -1, 1]], format!("kernel {:?}", proj.kernel()))?;
    let b = monomial_pushforward(&g, proj.matrix()).map_err(|e| e.to_string())?;
    let support: BTreeSet<Vec<i64>> = b.support().into_iter().collect();
    let want: BTreeSet<Vec<i64>> = [vec![1, 0], vec![0, 2], vec![3, 2], vec![2, 4], vec![6, 2]].into_iter().collect();
    ensure(support == want, format!("pushforward support {support:?}"))?;
    let report = intersect_polynomials(&fs).map_err(|e| e.to_string())?;
    let image = image_dual_subdivision(&[report], &proj, Some(&b)).map_err(|e| e.to_string())?;
    let dual = image.dual_subdivision.as_ref().ok_or("no dual subdivision")?;
    let bsub = lower_hull_subdivision(&b.lifted_support()).unwrap();
    ensure(dual.matches(&bsub), "dual cells differ from the subdivision of the pushforward")?;
    let big: Vec<_> = dual.cells.iter().filter(|c| c.p >= 2).collect();
    ensure(big.len() == 1 && big[0].p == 2 && big[0].cell.vertices().len() == 4, "expected exactly one quadrangle with p = 2")?;
    let moved: BTreeSet<Point> = dual.cells.iter().filter(|c| c.p == 1).map(|c| c.plane_translation.clone()).collect();
    let want: BTreeSet<Point> = [point(&[-1, -1]), point(&[1, 1])].into_iter().collect();
    ensure(moved == want, format!("translations {moved:?}"))?;
    Ok(format!("kernel (2,-1,1); {} cells match; one quadrangle p=2; translations (-1,-1), (1,1)", dual.cells.len()))
}

fn ray_crossing_grid() -> Check {
    let line = caterpillar(3, None).unwrap().line.to_curve();
    let mut checked = 0;
    for x in -3i64..=3 {
        for y in -3i64..=3 {
            if [(0, 0), (-1, 0), (-1, -1)].contains(&(x, y)) {
                continue;
            }
            let proj = RationalProjection::new(vec![vec![x, 1, 0], vec![y, 0, 1]]).map_err(|e| e.to_string())?;
            let img = project_curves(std::slice::from_ref(&line), &proj).map_err(|e| format!("({x},{y}): {e}"))?;
            let ray = |d: [i64; 3]| {
                img.pieces.iter().find(|p| p.kind == PieceKind::Ray && p.source_dir == point(&d)).ok_or_else(|| format!("no ray {d:?}"))
            };
            let crossed = matches!(pieces_cross(ray([0, 1, 0])?, ray([0, 0, 1])?), Crossing::Interior { .. });
            ensure(crossed == (x < -1 && y > 0), format!("({x},{y}): crossing {crossed}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} grid matrices agree with x < -1 and y > 0"))
}

fn lower_bound_counts() -> Check {
    let start = Instant::now();
    let mut counts = Vec::new();
    for n in 3..=6 {
        let proj = lower_bound_projection(n).map_err(|e| e.to_string())?;
        let line = caterpillar(n, None).unwrap().line;
        counts.push(check_caterpillar_bound(&line, &proj).map_err(|e| e.to_string())?.count);
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(counts == [1, 3, 6, 10], format!("counts {counts:?}"))?;
    ensure(secs < 30.0, format!("took {secs:.1}s"))?;
    Ok(format!("counts {counts:?} in {secs:.2}s"))
}

fn caterpillar_upper_bound() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut summary = Vec::new();
    for n in 3..=5 {
        let rows = caterpillar_sweep(n, 200, &mut rng).map_err(|e| e.to_string())?;
        let max = rows.iter().map(|r| r.count).max().unwrap_or(0);
        ensure(rows.len() == 200 && rows.iter().all(|r| r.ok), format!("n = {n}: bound violated"))?;
        summary.push(format!("n={n} max {max} <= {}", binomial2(n - 1)));
    }
    Ok(summary.join("; "))
}

fn perturbed_quadrics_example() -> Check {
    let q = perturbed_quadrics();
    let (_, img) = factored_image(&q.factors, &q.projection).map_err(|e| e.to_string())?;
    ensure(img.sip_count() == 28, format!("{} self-intersections", img.sip_count()))?;
    let base = intersect_polynomials(&q.base).unwrap();
    let bimg = project_and_count(&[EmbeddedCurve::from_complex(&base.complex).unwrap()], &q.projection).map_err(|e| e.to_string())?;
    let guaranteed = 4 * 4 * binomial2(2);
    let copies = copy_accounting(&bimg, &img);
    ensure(copies >= guaranteed, format!("only {copies} copies of the base crossing"))?;
    // components are ordered AC, AD, BC, BD
    let pair = component_pair_sips(&img, 0, 2);
    let ray_ray = pair.iter().filter(|k| **k == (PieceKind::Ray, PieceKind::Ray)).count();
    let edge_ray = pair.iter().filter(|k| **k == (PieceKind::Edge, PieceKind::Ray)).count();
    ensure(pair.len() == 4 && ray_ray == 2 && edge_ray == 2, format!("AC/BC crossings {pair:?}"))?;
    Ok(format!("28 points; {copies} >= {guaranteed} from base copies; AC/BC: 2 ray-ray + 2 edge-ray"))
}

fn random_lattice_polytope(rng: &mut ChaCha8Rng) -> Polytope {
    loop {
        let k = rng.gen_range(2..=7);
        let pts: Vec<Vec<i64>> = (0..k).map(|_| (0..3).map(|_| rng.gen_range(0..=3)).collect()).collect();
        if let Ok(p) = hull_i64(&pts) {
            if p.dim() >= 1 {
                return p;
            }
        }
    }
}

fn random_functional(rng: &mut ChaCha8Rng, p: &Polytope) -> LinearFunctional {
    loop {
        let c: Vec<i64> = (0..3).map(|_| rng.gen_range(-2..=2)).collect();
        if let Ok(psi) = LinearFunctional::new(c) {
            if !psi_constant(p, &psi) {
                return psi;
            }
        }
    }
}

fn fiber_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..50 {
        let p = random_lattice_polytope(&mut rng);
        let psi = random_functional(&mut rng, &p);
        let e = |e: FiberError| format!("polytope {i}: {e}");
        let base = fiber_polytope(&p, &psi).map_err(e)?.polytope;
        let extra: Vec<Rational> = (0..3).map(|_| Rational::new(rng.gen_range(-12..12).into(), rng.gen_range(1..5).into())).collect();
        ensure(fiber_polytope_refined(&p, &psi, &extra).map_err(e)? == base, format!("polytope {i}: refinement changed the result"))?;
        for lambda in 1..=3 {
            let big = fiber_polytope(&scaled(&p, lambda), &psi).map_err(e)?.polytope;
            ensure(big == base.scale(&int(lambda * lambda)), format!("polytope {i}: not homogeneous for {lambda}"))?;
        }
        let level = expected_psi_value(&p, &psi);
        ensure(base.vertices().iter().all(|v| psi.eval(v) == level), format!("polytope {i}: psi not constant"))?;
        let q = loop {
            let q = random_lattice_polytope(&mut rng);
            if !psi_constant(&q, &psi) {
                break q;
            }
        };
        let pq = mixed_fiber_polytope(&[p.clone(), q.clone()], &psi).map_err(e)?.polytope;
        let qp = mixed_fiber_polytope(&[q, p.clone()], &psi).map_err(e)?.polytope;
        ensure(pq == qp, format!("polytope {i}: mixed fiber polytope not symmetric"))?;
        let pp = mixed_fiber_polytope(&[p.clone(), p.clone()], &psi).map_err(e)?.polytope;
        ensure(pp == base.scale(&int(2)), format!("polytope {i}: diagonal is not twice the fiber polytope"))?;
    }
    Ok("50 polytopes: refinement, homogeneity (1,2,3), constancy, symmetry, diagonal".into())
}

fn face_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut done, mut ties) = (0, 0);
    while done < 25 {
        let c = random_lattice_polytope(&mut rng);
        let psi = random_functional(&mut rng, &c);
        let d = random_lattice_polytope(&mut rng);
        if psi_constant(&d, &psi) {
            continue;
        }
        let w: Point = (0..3).map(|_| int(rng.gen_range(-9..=9))).collect();
        match face_mixed_identity(&c, &d, &psi, &w) {
            Ok((lhs, rhs)) => {
                ensure(lhs == rhs, format!("triple {done}: sides differ"))?;
                done += 1;
            }
            Err(FiberError::TieError(_)) => ties += 1,
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(format!("25 triples agree ({ties} tied directions redrawn)"))
}

fn sips_match_cells(name: &str, reports: &[IntersectionReport], proj: &RationalProjection) -> Result<String, String> {
    let img = image_dual_subdivision(reports, proj, None).map_err(|e| format!("{name}: {e}"))?;
    let cells = img.dual_subdivision.as_ref().map_or(0, |d| d.cells_with_p_at_least(2));
    ensure(cells == img.sip_count(), format!("{name}: {} points vs {cells} cells", img.sip_count()))?;
    Ok(format!("{name} {cells}"))
}

fn sips_equal_multi_preimage_cells() -> Check {
    let mut seen = Vec::new();
    let (fs, proj, _) = monomial_map_data();
    seen.push(sips_match_cells("monomial map", &[intersect_polynomials(&fs).unwrap()], &proj)?);
    let q = perturbed_quadrics();
    seen.push(sips_match_cells("four lines", &intersect_components(&q.factors).unwrap(), &q.projection)?);
    for n in 3..=5 {
        let c = caterpillar(n, None).unwrap();
        let proj = lower_bound_projection(n).unwrap();
        seen.push(sips_match_cells(&format!("caterpillar {n}"), &[intersect_polynomials(&c.system).unwrap()], &proj)?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pp = perturbed_product_curve(3, &[2, 2], &mut rng).map_err(|e| e.to_string())?;
    seen.push(sips_match_cells("perturbed product", &pp.components, &pp.projection)?);
    Ok(seen.join("; "))
}

fn schroeder() -> Check {
    let mut got = Vec::new();
    for n in 2..=6 {
        let brute = enumerate_split_systems(n).len() as u64;
        ensure(brute == count_line_types(n), format!("n = {n}: {brute} vs {}", count_line_types(n)))?;
        got.push(brute);
    }
    ensure(got == [1, 3, 15, 105, 945], format!("{got:?}"))?;
    Ok(format!("{got:?}"))
}

fn main() {
    let checks: [Criterion; 10] = [
        ("cube fiber polytope", cube_fiber),
        ("monomial map dual subdivision", monomial_map_example),
        ("ray crossing grid", ray_crossing_grid),
        ("lower-bound projections", lower_bound_counts),
        ("caterpillar upper bound", caterpillar_upper_bound),
        ("perturbed quadrics", perturbed_quadrics_example),
        ("fiber polytope suite", fiber_suite),
        ("face identity", face_identity),
        ("points vs multi-preimage cells", sips_equal_multi_preimage_cells),
        ("line type counts", schroeder),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS [{:>2}] {name}: {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL [{:>2}] {name}: {reason}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
