//! Acceptance suite: one pass/fail line per criterion, tolerances as pinned
//! below. Run with `cargo test -p torus-lab --test acceptance`.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use torus_lab::chain::{
    chain_transitivity_report, nonwandering_approx, two_jump_pseudo_orbit, validate_pseudo_orbit,
    weak_transitivity_check, EnclosureMode, ReturnOracle, TwoJumpBudgets,
};
use torus_lab::circle::{rotation_number, DenjoyMap, DenjoySpec};
use torus_lab::topology::{
    classify_essentiality, classify_essentiality_seeded, compute_capture_diameter,
    essential_intersection_check, BoxDomain, Essentiality,
};
use torus_lab::torus::{
    build_return_perturbation, circle_distance, denjoy_product, rigid_translation, rotation_vector,
    skew_example, verify_return, verify_return_on_segment, SkewExampleParams, SkewProduct,
};
use torus_lab::{CircleLift, QuadraticIrrational, TorusPoint};

const GOLDEN: f64 = 0.618_033_988_749_894_8;
const SILVER: f64 = 0.414_213_562_373_095_1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// A point of the minimal set of `g`: the left endpoint of a random gap.
fn cantor_point(g: &DenjoyMap, rng: &mut ChaCha8Rng) -> f64 {
    let n = g.truncation();
    g.gap(rng.gen_range(-n..=n)).unwrap().left
}

fn criterion_1() -> Outcome {
    let lift = CircleLift::rigid(GOLDEN);
    let mut worst = 0.0f64;
    let mut ok = true;
    let mut runtime = 0.0;
    for n in [100u64, 10_000, 1_000_000] {
        let t0 = Instant::now();
        let est = rotation_number(&lift, n, 0.0);
        let dt = t0.elapsed().as_secs_f64();
        if n == 1_000_000 {
            runtime = dt;
        }
        let err = (est.estimate - GOLDEN).abs();
        ok &= err <= 1.0 / n as f64;
        worst = worst.max(err * n as f64);
    }
    ok &= runtime < 2.0;
    outcome(
        ok,
        format!("max n·|err| = {worst:.3e} (≤ 1), runtime at 1e6 = {runtime:.3} s (< 2 s)"),
    )
}

fn criterion_2() -> Outcome {
    let spec = DenjoySpec::with_total_gap(QuadraticIrrational::silver(), 0.5, 4.0, 2000).unwrap();
    let g = Arc::new(DenjoyMap::build(spec).unwrap());
    let n = 100_000;
    let est = rotation_number(&CircleLift::denjoy(g.clone()), n, 0.123);
    let err = (est.estimate - SILVER).abs();
    let rot_ok = err <= 1.0 / n as f64 + 1e-6;
    let mut shift_err = 0.0f64;
    for k in -1998..=1998i64 {
        let (a, b) = (g.gap(k).unwrap(), g.gap(k + 1).unwrap());
        shift_err = shift_err
            .max(circle_distance(g.eval(a.left), b.left))
            .max(circle_distance(g.eval(a.right()), b.right()));
    }
    let shift_ok = shift_err <= 1e-12;
    outcome(
        rot_ok && shift_ok,
        format!("|ρ − α| = {err:.3e} (≤ 1.1e-5), gap shift error = {shift_err:.1e} (≤ 1e-12)"),
    )
}

fn criterion_3(f: &SkewProduct) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 1_000_000;
    let starts: Vec<TorusPoint> = (0..10)
        .map(|_| TorusPoint::new(rng.gen(), rng.gen()))
        .collect();
    let ests: Vec<_> = starts.iter().map(|&z| rotation_vector(f, z, n)).collect();
    let off = ests
        .iter()
        .map(|e| (e.vector.0 - GOLDEN).abs().max((e.vector.1 - SILVER).abs()))
        .fold(0.0, f64::max);
    let mut spread = 0.0f64;
    for a in &ests {
        for b in &ests {
            spread = spread
                .max((a.vector.0 - b.vector.0).abs())
                .max((a.vector.1 - b.vector.1).abs());
        }
    }
    let allowed = 4e-6 + ests[0].error_bound;
    outcome(
        off <= 2e-3 && spread <= allowed,
        format!("max |ρ̂ − ρ| = {off:.3e} (≤ 2e-3), spread = {spread:.3e} (≤ {allowed:.1e})"),
    )
}

fn chain_check(f: &SkewProduct, seed: u64) -> (usize, f64) {
    let m = 256;
    let t0 = Instant::now();
    let r = chain_transitivity_report(f, m, 2.0 / m as f64, 20, seed, EnclosureMode::OuterBound)
        .unwrap();
    (r.connected, t0.elapsed().as_secs_f64())
}

fn criterion_4(f_beta: &SkewProduct, product: &SkewProduct) -> (Outcome, bool) {
    let (a, ta) = chain_check(f_beta, 4);
    let (b, tb) = chain_check(product, 40);
    let total = ta + tb;
    let product_ok = b == 20;
    (
        outcome(
            a == 20 && product_ok && total < 60.0,
            format!("f_β {a}/20, Denjoy product {b}/20, runtime {total:.1} s (< 60 s)"),
        ),
        product_ok,
    )
}

fn criterion_5(f_beta: &SkewProduct) -> Outcome {
    let eps = 0.05;
    let budgets = TwoJumpBudgets::default();
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, f, seed) in [
        ("rigid", rigid_translation(GOLDEN, SILVER), 5u64),
        ("f_β", f_beta.clone(), 50),
    ] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut good = 0;
        let mut max_conn = 0;
        for _ in 0..10 {
            let x = TorusPoint::new(rng.gen(), rng.gen());
            let y = TorusPoint::new(rng.gen(), rng.gen());
            match two_jump_pseudo_orbit(&f, x, y, eps, &budgets) {
                Ok((po, info)) => {
                    let c = validate_pseudo_orbit(&f, &po);
                    if c.valid && c.jump_count <= 2 && info.connector_steps <= 1_000_000 {
                        good += 1;
                    }
                    max_conn = max_conn.max(info.connector_steps);
                }
                Err(e) => parts.push(format!("{name} error: {e}")),
            }
        }
        ok &= good == 10;
        parts.push(format!("{name} {good}/10 (longest connector {max_conn})"));
    }
    outcome(ok, parts.join(", "))
}

fn criterion_6(product: &SkewProduct, chain_ok: bool) -> Outcome {
    let nw = nonwandering_approx(product, 64, 10_000);
    let wandering = nw.nonreturning.len();
    outcome(
        wandering >= 1 && chain_ok,
        format!("{wandering} certified nonreturning boxes at m=64, chain transitivity on same map: {chain_ok}"),
    )
}

/// A closed 4-connected loop winding once around the torus along `s`
/// (or along `t` when `vertical`), thickened by `r` cells.
fn random_loop(m: usize, rng: &mut ChaCha8Rng, vertical: bool, r: usize) -> BoxDomain {
    let mut d = BoxDomain::empty(m);
    let mi = m as i64;
    let mut put = |a: i64, b: i64| {
        let (i, j) = if vertical { (b, a) } else { (a, b) };
        for di in -(r as i64)..=r as i64 {
            for dj in -(r as i64)..=r as i64 {
                if di.abs() + dj.abs() <= r as i64 {
                    d.insert(
                        (i + di).rem_euclid(mi) as usize,
                        (j + dj).rem_euclid(mi) as usize,
                    );
                }
            }
        }
    };
    let start: i64 = rng.gen_range(0..mi);
    let mut b = start;
    for a in 0..mi {
        put(a, b);
        let nb = b + rng.gen_range(-2..=2);
        let range = if nb >= b { b..=nb } else { nb..=b };
        for c in range {
            put(a, c);
        }
        b = nb;
    }
    // close up in the first column without winding along the other axis
    let range = if start >= b { b..=start } else { start..=b };
    for c in range {
        put(0, c);
    }
    d
}

fn random_doubly_essential(m: usize, rng: &mut ChaCha8Rng) -> BoxDomain {
    let r = rng.gen_range(0..=2);
    let h = random_loop(m, rng, false, r);
    let v = random_loop(m, rng, true, r);
    h.union(&v).unwrap()
}

fn criterion_7() -> Outcome {
    let m = 32;
    let full = classify_essentiality(&BoxDomain::full(m)).unwrap().class;
    let band = classify_essentiality(&BoxDomain::from_predicate(m, |s, _| s < 0.5)).unwrap();
    let cell = classify_essentiality(&BoxDomain::from_cells(m, [(3, 4)]).unwrap())
        .unwrap()
        .class;
    let canonical = full == Essentiality::DoublyEssential
        && band.class == Essentiality::SimplyEssential
        && band.basis.len() == 1
        && (band.basis[0].p, band.basis[0].q) == (0, 1)
        && cell == Essentiality::Inessential;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut intersecting = 0;
    let mut stable = true;
    for trial in 0..1000 {
        let u = random_doubly_essential(m, &mut rng);
        let v = random_doubly_essential(m, &mut rng);
        if essential_intersection_check(&u, &v) == Ok(true) {
            intersecting += 1;
        }
        if trial < 20 {
            let base = classify_essentiality(&u).unwrap();
            stable &= classify_essentiality(&u.refine()).unwrap().class == base.class;
            for seed in 0..10 {
                let r = classify_essentiality_seeded(&u, seed).unwrap();
                stable &= r.class == base.class && r.basis == base.basis;
            }
        }
    }
    outcome(
        canonical && intersecting == 1000 && stable,
        format!(
            "canonical classes {canonical}, {intersecting}/1000 random pairs intersect, stable under refinement and 10 seeds: {stable}"
        ),
    )
}

/// Random piecewise-linear path in the plane grown until its vertex set has
/// diameter at least `target`; reports whether a point of the path (sampled
/// finely along every segment) lies in the lift of `u`.
fn random_path_hits(u: &BoxDomain, target: f64, rng: &mut ChaCha8Rng) -> bool {
    let mut verts = vec![(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))];
    let diam = |v: &[(f64, f64)]| {
        let mut d: f64 = 0.0;
        for a in v {
            for b in v {
                d = d.max((a.0 - b.0).hypot(a.1 - b.1));
            }
        }
        d
    };
    while diam(&verts) < target {
        let (x, y): (f64, f64) = *verts.last().unwrap();
        let ang = rng.gen_range(0.0..std::f64::consts::TAU);
        let len = rng.gen_range(0.02..0.3);
        verts.push((x + len * ang.cos(), y + len * ang.sin()));
    }
    let step = 0.25 / u.m() as f64;
    verts.windows(2).any(|w| {
        let (a, b) = (w[0], w[1]);
        let k = ((b.0 - a.0).hypot(b.1 - a.1) / step).ceil().max(1.0) as usize;
        (0..=k).any(|i| {
            let t = i as f64 / k as f64;
            let (x, y) = (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
            u.contains_point(x.rem_euclid(1.0), y.rem_euclid(1.0))
        })
    })
}

fn criterion_8() -> Outcome {
    let m = 64;
    let cross = BoxDomain::cross(m, 0.25);
    let k = compute_capture_diameter(&cross).unwrap().k;
    let expected = std::f64::consts::SQRT_2 * 0.75;
    let k_ok = (k - expected).abs() <= 1.5 / m as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let hits = (0..100)
        .filter(|_| random_path_hits(&cross, k + 0.1, &mut rng))
        .count();
    outcome(
        k_ok && hits == 100,
        format!(
            "K = {k:.6} (expected {expected:.6} ± {:.4}), {hits}/100 paths meet the lift",
            1.5 / m as f64
        ),
    )
}

fn criterion_9(f: &SkewProduct) -> Outcome {
    let g1 = f.base_denjoy().unwrap().clone();
    let x = TorusPoint::new(g1.gap(0).unwrap().left, 0.3);
    let (eps, delta) = (0.05, 0.1);
    let pert = match build_return_perturbation(f.beta(), x, eps, delta) {
        Ok(p) => p,
        Err(e) => return outcome(false, format!("construction failed: {e}")),
    };
    let fp = f.with_beta(pert.beta.clone());
    let mut check = verify_return(&fp, x, eps, pert.k, 4096);
    if !check.hit {
        check = verify_return_on_segment(&fp, x, eps, pert.k, pert.gap_interval, 4096);
    }
    let confirmed = check.hit
        && check.witness.is_some_and(|w| {
            w.distance(&x) < eps && fp.iterate_torus(w, pert.k).distance(&x) < eps
        });
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let matches = (0..100)
        .filter(|_| {
            let s = cantor_point(&g1, &mut rng);
            let t: f64 = rng.gen();
            pert.beta.eval(s, t) == f.beta().eval(s, t)
        })
        .count();
    let sup = f.beta().sampled_distance(&pert.beta, 10_000);
    outcome(
        confirmed && matches == 100 && sup < delta,
        format!(
            "k = {}, witness confirmed {confirmed} (image distance {:.3e}), β′ = β on {matches}/100 points of M₁, sup distance {sup:.3e} (< {delta})",
            pert.k, check.distance
        ),
    )
}

fn criterion_10(f: &SkewProduct) -> Outcome {
    let (m, eps) = (64, 0.05);
    let g1 = f.base_denjoy().unwrap().clone();
    let g2 = match f.beta().core() {
        CircleLift::Denjoy(g) => g.clone(),
        _ => unreachable!("fiber core is a Denjoy map"),
    };
    let oracle = ReturnOracle::new(f, m, 10_000);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let ball = |p: TorusPoint| {
        BoxDomain::from_predicate(m, move |s, t| TorusPoint::new(s, t).distance(&p) < eps)
    };
    let mut confirmed = 0;
    let mut max_n = 0;
    let mut errors = Vec::new();
    for _ in 0..10 {
        let p = TorusPoint::new(cantor_point(&g1, &mut rng), cantor_point(&g2, &mut rng));
        let q = TorusPoint::new(cantor_point(&g1, &mut rng), cantor_point(&g2, &mut rng));
        match weak_transitivity_check(f, &ball(p), &ball(q), 100_000, &oracle) {
            Ok(hit) => {
                let image = f.iterate_torus(hit.witness, hit.n);
                if ball(q).contains_point(image.s, image.t) {
                    confirmed += 1;
                    max_n = max_n.max(hit.n);
                }
            }
            Err(e) => errors.push(e.to_string()),
        }
    }
    outcome(
        confirmed == 10,
        format!(
            "{confirmed}/10 pairs confirmed, largest n = {max_n} (≤ 1e5){}",
            if errors.is_empty() {
                String::new()
            } else {
                format!("; {}", errors.join("; "))
            }
        ),
    )
}

fn main() -> ExitCode {
    let params = SkewExampleParams::default();
    let f_beta = skew_example(&params).unwrap();
    let product = denjoy_product(&params).unwrap();

    let mut results: Vec<(usize, Outcome, f64)> = Vec::new();
    let mut run = |id: usize, f: &mut dyn FnMut() -> Outcome| {
        let t0 = Instant::now();
        let o = f();
        let dt = t0.elapsed().as_secs_f64();
        println!(
            "criterion {id:>2}: {} [{dt:.1} s] {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((id, o, dt));
    };
    run(1, &mut criterion_1);
    run(2, &mut criterion_2);
    run(3, &mut || criterion_3(&f_beta));
    let mut product_chain_ok = false;
    run(4, &mut || {
        let (o, p) = criterion_4(&f_beta, &product);
        product_chain_ok = p;
        o
    });
    run(5, &mut || criterion_5(&f_beta));
    run(6, &mut || criterion_6(&product, product_chain_ok));
    run(7, &mut criterion_7);
    run(8, &mut criterion_8);
    run(9, &mut || criterion_9(&f_beta));
    run(10, &mut || criterion_10(&f_beta));

    let failed = results.iter().filter(|r| !r.1.pass).count();
    println!(
        "acceptance: {}/{} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
