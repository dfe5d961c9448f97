//! The verification suites. Each appends checks to the report and writes its
//! tables next to it.

use std::f64::consts::SQRT_2;
use std::io;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;
use torus_lab::chain::{
    build_transition_graph, chain_report_on, nonwandering_approx, two_jump_pseudo_orbit,
    validate_pseudo_orbit, ChainError, PseudoOrbit,
};
use torus_lab::circle::GapLocation;
use torus_lab::topology::{
    classify_essentiality, classify_essentiality_seeded, compute_capture_diameter,
    essential_intersection_check, forward_invariant_hull, BoxDomain, DeckVector, Essentiality,
    TopologyError,
};
use torus_lab::torus::{
    build_return_perturbation, rotation_vector, skew_example, verify_return,
    verify_return_on_segment, ReturnCheck,
};
use torus_lab::{FiberFamily, SkewProduct, TorusError, TorusPoint};

use crate::config::{perturbation_point, ConfigError, ExperimentConfig, MapSpec};
use crate::report::{Cell, Check, OutDir, Report, Timing};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Rotation,
    Chain,
    TwoJump,
    Essential,
    Perturb,
    Nonwandering,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Rotation => "rotation",
            Suite::Chain => "chain",
            Suite::TwoJump => "two-jump",
            Suite::Essential => "essential",
            Suite::Perturb => "perturb",
            Suite::Nonwandering => "nonwandering",
            Suite::All => "all",
        }
    }

    fn members(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Rotation,
                Suite::Chain,
                Suite::TwoJump,
                Suite::Essential,
                Suite::Perturb,
                Suite::Nonwandering,
            ],
            s => vec![s],
        }
    }

    /// Offset mixed into the seed so suites draw independent streams.
    fn salt(self) -> u64 {
        self as u64 * 0x9E37_79B9
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("output: {0}")]
    Io(#[from] io::Error),
}

/// Discretization caveat carried by every report.
pub const BOX_DOMAIN_CAVEAT: &str = "box-domain essentiality is that of the open union of open \
     grid cells; it can over- or under-resolve a true domain at scale 1/m";

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    f: &'a SkewProduct,
    out: &'a mut OutDir,
    checks: Vec<Check>,
}

impl Ctx<'_> {
    fn rng(&self, suite: Suite) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.cfg.seed.wrapping_add(suite.salt()))
    }
}

/// Builds the configured map, runs `suite` and writes `report.json` and
/// `timings.json` into `out`.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    suite: Suite,
    out: &mut OutDir,
) -> Result<(Report, Vec<Timing>), RunError> {
    cfg.validate()?;
    let f = cfg.map.build()?;
    let mut report = Report::new(suite.name(), cfg.clone());
    let mut timings = Vec::new();
    for s in suite.members() {
        let start = Instant::now();
        let mut ctx = Ctx {
            cfg,
            f: &f,
            out,
            checks: Vec::new(),
        };
        match s {
            Suite::Rotation => rotation(&mut ctx)?,
            Suite::Chain => chain(&mut ctx)?,
            Suite::TwoJump => two_jump(&mut ctx)?,
            Suite::Essential => essential(&mut ctx)?,
            Suite::Perturb => perturb(&mut ctx)?,
            Suite::Nonwandering => nonwandering(&mut ctx)?,
            Suite::All => unreachable!("expanded by members()"),
        }
        report.checks.append(&mut ctx.checks);
        timings.push(Timing {
            suite: s.name(),
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    report.finish();
    report.artifacts = out.take_written();
    report.artifacts.sort();
    report.artifacts.push("report.json".into());
    report.artifacts.push("timings.json".into());
    out.write("report.json", crate::report::to_json(&report))?;
    out.write("timings.json", crate::report::to_json(&timings))?;
    Ok((report, timings))
}

fn point(p: TorusPoint) -> [f64; 2] {
    [p.s, p.t]
}

// ---------------------------------------------------------------- rotation

fn rotation_tolerance(map: &MapSpec, n: u64) -> f64 {
    let n = n as f64;
    match map {
        MapSpec::Rigid { .. } => 1.0 / n,
        // gap placement fixes ρ exactly; the slack absorbs rounding
        MapSpec::DenjoyProduct { .. } => 1.0 / n + 1e-6,
        // the fiber rotation number of a skew product is not prescribed
        MapSpec::SkewExample { .. } | MapSpec::SkewPerturbed { .. } => 2e-3 + 2.0 / n,
    }
}

fn rotation(ctx: &mut Ctx) -> io::Result<()> {
    const SUITE: &str = "rotation";
    let rc = &ctx.cfg.rotation;
    let mut rng = ctx.rng(Suite::Rotation);
    let starts: Vec<TorusPoint> = (0..rc.starts)
        .map(|_| TorusPoint::new(rng.gen(), rng.gen()))
        .collect();
    let target = ctx.cfg.map.prescribed_rotation();
    let mut ns = rc.iterations.clone();
    ns.sort_unstable();
    ns.dedup();

    let mut rows = Vec::new();
    let mut start_rows = Vec::new();
    for &n in &ns {
        let ests: Vec<_> = starts
            .par_iter()
            .map(|&z| rotation_vector(ctx.f, z, n))
            .collect();
        let tol = rc
            .tolerance
            .unwrap_or_else(|| rotation_tolerance(&ctx.cfg.map, n));
        let bound = ests[0].error_bound;
        rows.push(vec![
            Cell::U(n),
            Cell::F(ests[0].vector.0),
            Cell::F(ests[0].vector.1),
            Cell::F(bound),
        ]);
        for (i, e) in ests.iter().enumerate() {
            start_rows.push(vec![
                Cell::U(n),
                Cell::U(i as u64),
                Cell::F(e.start.s),
                Cell::F(e.start.t),
                Cell::F(e.vector.0),
                Cell::F(e.vector.1),
                Cell::F(e.error_bound),
            ]);
        }

        let off = |e: &torus_lab::torus::RotationVectorEstimate| {
            (e.vector.0 - target.0)
                .abs()
                .max((e.vector.1 - target.1).abs())
        };
        let worst = ests
            .iter()
            .max_by(|a, b| off(a).total_cmp(&off(b)))
            .expect("at least one start");
        ctx.checks.push(
            Check::verdict(
                SUITE,
                format!("prescribed-vector n={n}"),
                off(worst) <= tol,
                format!(
                    "max distance to prescribed vector {:.3e} (allowed {tol:.3e})",
                    off(worst)
                ),
                json!({ "start": point(worst.start), "estimate": worst.vector }),
            )
            .with_data(json!({ "max_distance": off(worst), "tolerance": tol })),
        );

        let mut spread = 0.0f64;
        let mut pair = (0, 0);
        for (i, a) in ests.iter().enumerate() {
            for (j, b) in ests.iter().enumerate() {
                let d = (a.vector.0 - b.vector.0)
                    .abs()
                    .max((a.vector.1 - b.vector.1).abs());
                if d > spread {
                    spread = d;
                    pair = (i, j);
                }
            }
        }
        let allowed = bound + 4e-6;
        ctx.checks.push(
            Check::verdict(
                SUITE,
                format!("start-independence n={n}"),
                spread <= allowed,
                format!("spread over starts {spread:.3e} (allowed {allowed:.3e})"),
                json!({
                    "starts": [point(starts[pair.0]), point(starts[pair.1])],
                    "estimates": [ests[pair.0].vector, ests[pair.1].vector],
                }),
            )
            .with_data(json!({ "spread": spread })),
        );
    }
    ctx.out.write_csv(
        "rotation.csv",
        &["n", "estimate_1", "estimate_2", "bound"],
        &rows,
    )?;
    ctx.out.write_csv(
        "rotation_starts.csv",
        &[
            "n",
            "start",
            "s0",
            "t0",
            "estimate_1",
            "estimate_2",
            "bound",
        ],
        &start_rows,
    )?;
    Ok(())
}

// ---------------------------------------------------------------- chain

fn chain(ctx: &mut Ctx) -> io::Result<()> {
    const SUITE: &str = "chain";
    let cc = &ctx.cfg.chain;
    let graph = match build_transition_graph(ctx.f, cc.m, cc.epsilon(), cc.mode) {
        Ok(g) => g,
        Err(e) => {
            // the configuration was validated, so this is a numerical failure
            ctx.checks.push(Check::fail(
                SUITE,
                "transition-graph",
                e.to_string(),
                json!({ "m": cc.m, "epsilon": cc.epsilon() }),
            ));
            return Ok(());
        }
    };
    let seed = ctx.cfg.seed.wrapping_add(Suite::Chain.salt());
    let r = chain_report_on(&graph, cc.trials, seed);
    let m = cc.m;
    let center = |k: u32| {
        let (i, j) = (k as usize / m, k as usize % m);
        [(i as f64 + 0.5) / m as f64, (j as f64 + 0.5) / m as f64]
    };
    let rows: Vec<Vec<Cell>> = r
        .pairs
        .iter()
        .map(|p| {
            let (a, b) = (center(p.from), center(p.to));
            vec![
                Cell::U(p.from as u64),
                Cell::U(p.to as u64),
                Cell::F(a[0]),
                Cell::F(a[1]),
                Cell::F(b[0]),
                Cell::F(b[1]),
                Cell::U(p.path_edges.is_some() as u64),
                Cell::I(p.path_edges.map_or(-1, |e| e as i64)),
            ]
        })
        .collect();
    ctx.out.write_csv(
        "chain_pairs.csv",
        &[
            "from",
            "to",
            "from_s",
            "from_t",
            "to_s",
            "to_t",
            "connected",
            "path_edges",
        ],
        &rows,
    )?;
    if cc.write_edges {
        let mut buf = Vec::new();
        graph.write_edge_list(&mut buf)?;
        ctx.out.write("chain_edges.txt", buf)?;
    }

    let missing: Vec<_> = r
        .pairs
        .iter()
        .filter(|p| p.path_edges.is_none())
        .map(|p| json!({ "from": p.from, "to": p.to, "from_center": center(p.from), "to_center": center(p.to) }))
        .collect();
    ctx.checks.push(
        Check::verdict(
            SUITE,
            "chain-transitivity",
            missing.is_empty(),
            format!(
                "{}/{} box pairs chain-connected at eps = {:.6} on the {m}x{m} grid",
                r.connected,
                r.trials,
                cc.epsilon()
            ),
            json!({ "unconnected_pairs": missing }),
        )
        .with_data(json!({
            "graph": r.graph,
            "max_path_edges": r.max_path_edges,
            "chain_recurrent_boxes": r.chain_recurrent_boxes,
            "recurrent_components": r.recurrent_components,
            "single_recurrent_component": r.single_recurrent_component,
        })),
    );

    if cc.report_wandering {
        let nc = &ctx.cfg.nonwandering;
        let nw = nonwandering_approx(ctx.f, nc.m, nc.n_max);
        let s = nw.summary();
        ctx.checks.push(
            Check::pass(
                SUITE,
                "wandering-boxes",
                format!(
                    "{} of {} boxes certified nonreturning within {} steps",
                    s.nonreturning,
                    nc.m * nc.m,
                    nc.n_max
                ),
            )
            .with_data(s),
        );
    }
    Ok(())
}

// ---------------------------------------------------------------- two-jump

fn two_jump(ctx: &mut Ctx) -> io::Result<()> {
    const SUITE: &str = "two-jump";
    let tc = &ctx.cfg.two_jump;
    let mut rng = ctx.rng(Suite::TwoJump);
    let mut rows = Vec::new();
    for i in 0..tc.pairs {
        let x = TorusPoint::new(rng.gen(), rng.gen());
        let y = TorusPoint::new(rng.gen(), rng.gen());
        let name = format!("pair-{i:03}");
        let base = json!({ "x": point(x), "y": point(y), "epsilon": tc.epsilon });
        match two_jump_pseudo_orbit(ctx.f, x, y, tc.epsilon, &tc.budgets) {
            Ok((po, info)) => {
                let rel = format!("pseudo_orbits/{name}.txt");
                let path = ctx.out.write(&rel, po.to_text())?;
                // validate what was written, not what is in memory
                let reloaded = std::fs::read_to_string(&path)
                    .map_err(|e| e.to_string())
                    .and_then(|t| PseudoOrbit::from_text(&t).map_err(|e| e.to_string()));
                let (check, ok) = match &reloaded {
                    Ok(back) => {
                        let c = validate_pseudo_orbit(ctx.f, back);
                        let ends =
                            back.points.first() == Some(&x) && back.points.last() == Some(&y);
                        let ok = c.valid && c.jump_count <= 2 && ends;
                        (Some(c), ok)
                    }
                    Err(_) => (None, false),
                };
                rows.push(vec![
                    Cell::U(i as u64),
                    Cell::F(x.s),
                    Cell::F(x.t),
                    Cell::F(y.s),
                    Cell::F(y.t),
                    Cell::U(info.n0),
                    Cell::U(info.connector_steps),
                    Cell::U(po.steps() as u64),
                    Cell::U(check.as_ref().map_or(0, |c| c.jump_count as u64)),
                    Cell::F(check.as_ref().map_or(f64::NAN, |c| c.max_step_error)),
                    Cell::S(if ok { "pass" } else { "fail" }.into()),
                ]);
                let summary = match &check {
                    Some(c) => format!(
                        "{} steps, {} jumps, max step error {:.3e}",
                        po.steps(),
                        c.jump_count,
                        c.max_step_error
                    ),
                    None => format!("reload failed: {}", reloaded.unwrap_err()),
                };
                ctx.checks.push(
                    Check::verdict(
                        SUITE,
                        name,
                        ok,
                        summary,
                        json!({ "pair": base, "file": rel, "validation": check }),
                    )
                    .with_data(json!({ "pair": base, "file": rel, "construction": info })),
                );
            }
            Err(e) => {
                rows.push(vec![
                    Cell::U(i as u64),
                    Cell::F(x.s),
                    Cell::F(x.t),
                    Cell::F(y.s),
                    Cell::F(y.t),
                    Cell::U(0),
                    Cell::U(0),
                    Cell::U(0),
                    Cell::U(0),
                    Cell::F(f64::NAN),
                    Cell::S(
                        if e.is_inconclusive() {
                            "inconclusive"
                        } else {
                            "fail"
                        }
                        .into(),
                    ),
                ]);
                ctx.checks.push(two_jump_error(SUITE, name, base, &e, tc));
            }
        }
    }
    ctx.out.write_csv(
        "two_jump.csv",
        &[
            "pair",
            "x_s",
            "x_t",
            "y_s",
            "y_t",
            "n0",
            "connector_steps",
            "steps",
            "jumps",
            "max_step_error",
            "status",
        ],
        &rows,
    )?;
    Ok(())
}

fn two_jump_error(
    suite: &'static str,
    name: String,
    pair: serde_json::Value,
    e: &ChainError,
    tc: &crate::config::TwoJumpConfig,
) -> Check {
    if e.is_inconclusive() {
        let detail = match e {
            ChainError::ConnectorExhausted {
                best_distance,
                samples,
                orbit,
            } => json!({ "best_distance": best_distance, "samples": samples, "orbit": orbit }),
            ChainError::BudgetExhausted { what, budget } => {
                json!({ "what": what, "budget": budget })
            }
            _ => serde_json::Value::Null,
        };
        Check::inconclusive(
            suite,
            name,
            e.to_string(),
            json!({ "budgets": tc.budgets, "exhausted": detail }),
        )
        .with_data(json!({ "pair": pair }))
    } else {
        Check::fail(suite, name, e.to_string(), json!({ "pair": pair }))
    }
}

// ---------------------------------------------------------------- essential

/// Closed loop winding once along one axis, thickened by `r` cells.
fn random_loop(m: usize, rng: &mut ChaCha8Rng, vertical: bool, r: i64) -> BoxDomain {
    let mi = m as i64;
    let mut d = BoxDomain::empty(m);
    let mut put = |a: i64, b: i64| {
        let (i, j) = if vertical { (b, a) } else { (a, b) };
        for di in -r..=r {
            for dj in -r..=r {
                if di.abs() + dj.abs() <= r {
                    d.insert(
                        (i + di).rem_euclid(mi) as usize,
                        (j + dj).rem_euclid(mi) as usize,
                    );
                }
            }
        }
    };
    let start = rng.gen_range(0..mi);
    let mut b = start;
    for a in 0..mi {
        put(a, b);
        let nb = b + rng.gen_range(-2..=2);
        for c in b.min(nb)..=b.max(nb) {
            put(a, c);
        }
        b = nb;
    }
    for c in b.min(start)..=b.max(start) {
        put(0, c);
    }
    d
}

fn random_doubly_essential(m: usize, rng: &mut ChaCha8Rng) -> BoxDomain {
    let r = rng.gen_range(0..=1);
    random_loop(m, rng, false, r)
        .union(&random_loop(m, rng, true, r))
        .expect("same grid")
}

/// Piecewise-linear path of vertex diameter at least `target`, sampled at a
/// quarter cell, tested against the lift of `u`.
fn random_path_meets_lift(
    u: &BoxDomain,
    target: f64,
    rng: &mut ChaCha8Rng,
) -> (bool, Vec<(f64, f64)>) {
    let mut verts = vec![(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))];
    let diam = |v: &[(f64, f64)]| {
        v.iter()
            .flat_map(|a| {
                v.iter()
                    .map(move |b: &(f64, f64)| (a.0 - b.0).hypot(a.1 - b.1))
            })
            .fold(0.0, f64::max)
    };
    while diam(&verts) < target {
        let (x, y) = *verts.last().expect("non-empty");
        let ang: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let len = rng.gen_range(0.01..0.2);
        verts.push((x + len * ang.cos(), y + len * ang.sin()));
    }
    let step = 0.25 / u.m() as f64;
    let hit = verts.windows(2).any(|w| {
        let k = ((w[1].0 - w[0].0).hypot(w[1].1 - w[0].1) / step)
            .ceil()
            .max(1.0) as usize;
        (0..=k).any(|i| {
            let t = i as f64 / k as f64;
            let x = w[0].0 + t * (w[1].0 - w[0].0);
            let y = w[0].1 + t * (w[1].1 - w[0].1);
            u.contains_point(x.rem_euclid(1.0), y.rem_euclid(1.0))
        })
    });
    (hit, verts)
}

/// Grid used for the random doubly essential pairs; intersection testing is
/// per pair, so a coarse grid keeps the count high.
const RANDOM_PAIR_GRID: usize = 24;

fn essential(ctx: &mut Ctx) -> io::Result<()> {
    const SUITE: &str = "essential";
    let ec = &ctx.cfg.essential;
    let m = ec.m;
    let mut rng = ctx.rng(Suite::Essential);

    let full = BoxDomain::full(m);
    let annulus = BoxDomain::from_predicate(m, |s, _| s < 0.5);
    let cell = BoxDomain::from_cells(m, [(m / 3, m / 5)]).expect("cell in range");
    let canonical = [
        (
            "whole-torus",
            &full,
            Essentiality::DoublyEssential,
            vec![DeckVector::new(1, 0), DeckVector::new(0, 1)],
        ),
        (
            "vertical-annulus",
            &annulus,
            Essentiality::SimplyEssential,
            vec![DeckVector::new(0, 1)],
        ),
        ("single-cell", &cell, Essentiality::Inessential, vec![]),
    ];
    for (name, d, class, basis) in canonical {
        let r = classify_essentiality(d).expect("non-empty");
        let stable = (0..ec.seeds).all(|s| {
            classify_essentiality_seeded(d, s)
                .is_ok_and(|b| b.class == r.class && b.basis == r.basis)
        });
        let refined = classify_essentiality(&d.refine()).expect("non-empty");
        let ok = r.class == class && r.basis == basis && stable && refined.class == r.class;
        ctx.checks.push(
            Check::verdict(
                SUITE,
                format!("class {name}"),
                ok,
                format!("{:?} with basis {:?}", r.class, r.basis),
                json!({ "expected": { "class": class, "basis": basis }, "got": { "class": r.class, "basis": r.basis }, "seed_stable": stable, "refined_class": refined.class }),
            )
            .with_data(json!({ "class": r.class, "basis": r.basis, "caveat": BOX_DOMAIN_CAVEAT })),
        );
    }

    let cross = BoxDomain::cross(m, ec.cross_width);
    let rotated = BoxDomain::from_predicate(m, |s, t| cross.contains_point(t, 1.0 - s));
    let meet = essential_intersection_check(&cross, &rotated);
    ctx.checks.push(Check::verdict(
        SUITE,
        "cross meets rotated cross",
        meet == Ok(true),
        format!("{meet:?}"),
        json!({ "result": format!("{meet:?}") }),
    ));

    let a = BoxDomain::from_predicate(m, |s, _| s < 0.25);
    let b = BoxDomain::from_predicate(m, |s, _| (0.5..0.75).contains(&s));
    let refused = essential_intersection_check(&a, &b);
    ctx.checks.push(Check::verdict(
        SUITE,
        "disjoint annuli refused",
        matches!(refused, Err(TopologyError::NotDoublyEssential(_))),
        format!("{refused:?}"),
        json!({ "result": format!("{refused:?}") }),
    ));

    let mut counterexample = None;
    let mut first_pair = None;
    for k in 0..ec.random_pairs {
        let u = random_doubly_essential(RANDOM_PAIR_GRID, &mut rng);
        let v = random_doubly_essential(RANDOM_PAIR_GRID, &mut rng);
        let r = essential_intersection_check(&u, &v);
        if r != Ok(true) && counterexample.is_none() {
            counterexample = Some((k, u.to_rle(), v.to_rle(), format!("{r:?}")));
        }
        if first_pair.is_none() {
            first_pair = Some((u, v));
        }
    }
    ctx.checks.push(Check::verdict(
        SUITE,
        "random doubly essential pairs intersect",
        counterexample.is_none(),
        format!(
            "{} pairs on the {RANDOM_PAIR_GRID}x{RANDOM_PAIR_GRID} grid",
            ec.random_pairs
        ),
        json!(counterexample
            .map(|(k, u, v, r)| json!({ "pair": k, "u_rle": u, "v_rle": v, "result": r }))),
    ));

    let expected = SQRT_2 * (1.0 - ec.cross_width);
    match compute_capture_diameter(&cross) {
        Ok(cap) => {
            let tol = 1.5 / m as f64;
            ctx.checks.push(
                Check::verdict(
                    SUITE,
                    "capture diameter of cross",
                    (cap.k - expected).abs() <= tol,
                    format!("K = {:.6} (expected {expected:.6} ± {tol:.4})", cap.k),
                    json!({ "k": cap.k, "expected": expected }),
                )
                .with_data(cap),
            );
            let mut miss = None;
            for _ in 0..ec.paths {
                let (hit, verts) = random_path_meets_lift(&cross, cap.k + 0.1, &mut rng);
                if !hit && miss.is_none() {
                    miss = Some(verts);
                }
            }
            ctx.checks.push(Check::verdict(
                SUITE,
                "long paths meet the lift of the cross",
                miss.is_none(),
                format!("{} paths of diameter K + 0.1", ec.paths),
                json!({ "path": miss }),
            ));
        }
        Err(e) => ctx.checks.push(Check::fail(
            SUITE,
            "capture diameter of cross",
            e.to_string(),
            json!({ "error": e.to_string() }),
        )),
    }

    let seed_cell = match ctx.f.base_denjoy() {
        Some(g1) => {
            let s = g1.gap(0).expect("gap 0 exists").left;
            ((s * m as f64) as usize % m, 0)
        }
        None => (m / 8, m / 4),
    };
    let u0 = BoxDomain::from_cells(m, [seed_cell]).expect("cell in range");
    let hull = forward_invariant_hull(ctx.f, &u0, ctx.cfg.nonwandering.n_max);
    let hr = classify_essentiality(&hull).expect("hull contains an image");
    ctx.checks.push(
        Check::verdict(
            SUITE,
            "forward-invariant hull",
            hr.class == Essentiality::DoublyEssential,
            format!(
                "hull of cell {seed_cell:?}: {} cells, {:?}",
                hull.len(),
                hr.class
            ),
            json!({ "cell": seed_cell, "class": hr.class, "basis": hr.basis }),
        )
        .with_data(json!({ "cells": hull.len(), "class": hr.class, "caveat": BOX_DOMAIN_CAVEAT })),
    );

    let mut dumps = vec![
        ("cross", cross),
        ("cross_rotated", rotated),
        ("annulus", annulus),
        ("hull", hull),
    ];
    if let Some((u, v)) = first_pair {
        dumps.push(("random_u", u));
        dumps.push(("random_v", v));
    }
    round_trip_domains(ctx, SUITE, "domains", &dumps)
}

/// Writes each domain as RLE, reloads it from disk and checks it is unchanged.
fn round_trip_domains(
    ctx: &mut Ctx,
    suite: &'static str,
    dir: &str,
    domains: &[(&str, BoxDomain)],
) -> io::Result<()> {
    let mut bad = Vec::new();
    for (name, d) in domains {
        let path = ctx.out.write(&format!("{dir}/{name}.rle"), d.to_rle())?;
        let back = std::fs::read_to_string(&path)
            .map_err(|e| e.to_string())
            .and_then(|t| BoxDomain::from_rle(&t).map_err(|e| e.to_string()));
        if back.as_ref() != Ok(d) {
            bad.push(json!({ "domain": name, "reload": back.err() }));
        }
    }
    ctx.checks.push(Check::verdict(
        suite,
        "box-domain dumps reload",
        bad.is_empty(),
        format!("{} domains written to {dir}/", domains.len()),
        json!(bad),
    ));
    Ok(())
}

// ---------------------------------------------------------------- perturb

fn perturb(ctx: &mut Ctx) -> Result<(), RunError> {
    const SUITE: &str = "perturb";
    let pc = &ctx.cfg.perturb;
    // the perturbation always starts from the unperturbed family
    let f = match &ctx.cfg.map {
        MapSpec::Rigid { .. } => {
            ctx.checks.push(Check::skipped(
                SUITE,
                "return perturbation",
                "needs a Denjoy base map",
            ));
            return Ok(());
        }
        MapSpec::DenjoyProduct { .. } => ctx.f.clone(),
        MapSpec::SkewExample { params } | MapSpec::SkewPerturbed { params, .. } => {
            skew_example(params).map_err(|e| ConfigError::Invalid(format!("map: {e}")))?
        }
    };
    let g1 = f.base_denjoy().expect("Denjoy base").clone();
    let x = perturbation_point(&f, pc.point)?;
    let (eps, delta) = (pc.epsilon, pc.delta);
    let pert = match build_return_perturbation(f.beta(), x, eps, delta) {
        Ok(p) => p,
        Err(TorusError::BudgetExhausted { what, budget }) => {
            ctx.checks.push(Check::inconclusive(
                SUITE,
                "return perturbation",
                format!("{what}: budget {budget} exhausted"),
                json!({ "what": what, "budget": budget }),
            ));
            return Ok(());
        }
        Err(e) => return Err(ConfigError::Invalid(format!("perturb: {e}")).into()),
    };
    let fp = f.with_beta(pert.beta.clone());

    let mut check = verify_return(&fp, x, eps, pert.k, pc.samples);
    let mut method = "ball";
    if !check.hit {
        check = verify_return_on_segment(&fp, x, eps, pert.k, pert.gap_interval, pc.samples);
        method = "segment";
    }
    let rechecked = check
        .witness
        .map(|w| fp.iterate_torus(w, pert.k).distance(&x));
    let returned = check.hit && rechecked.is_some_and(|d| d < eps);
    let check_json = |c: &ReturnCheck| serde_json::to_value(c).expect("serializes");
    let data = json!({ "x": point(x), "epsilon": eps, "delta": delta, "construction": pert, "method": method });
    ctx.checks.push(if returned {
        Check::pass(
            SUITE,
            "ball returns",
            format!(
                "witness returns to B(x, {eps}) after k = {} steps (distance {:.3e})",
                pert.k,
                rechecked.unwrap_or(f64::NAN)
            ),
        )
        .with_data(json!({ "setup": data, "check": check_json(&check) }))
    } else {
        Check::fail(
            SUITE,
            "ball returns",
            format!("no sampled point of the ball returns after k = {} steps", pert.k),
            json!({ "best_distance": check.distance, "samples": check.samples, "check": check_json(&check) }),
        )
        .with_data(json!({ "setup": data }))
    });

    let mut changed = None;
    let big = g1.spec().truncation as i64;
    let count = pc.minimal_points.max(1) as i64;
    for i in 0..count {
        // gap endpoints spread evenly over the enumerated indices
        let n = if count == 1 {
            0
        } else {
            -big + 2 * big * i / (count - 1)
        };
        let s = g1.gap(n).expect("gap in table").left;
        debug_assert!(matches!(g1.gap_locate(s), GapLocation::Cantor { .. }));
        if pert.beta.angle(s) != f.beta().angle(s) {
            changed = Some(s);
            break;
        }
    }
    ctx.checks.push(Check::verdict(
        SUITE,
        "unchanged on the minimal set",
        changed.is_none(),
        format!("{count} gap endpoints of the base minimal set"),
        json!({ "s": changed }),
    ));

    let dist = FiberFamily::sampled_distance(f.beta(), &pert.beta, pc.distance_samples);
    ctx.checks.push(
        Check::verdict(
            SUITE,
            "close to the original family",
            dist < delta,
            format!("sampled C0 distance {dist:.3e} (must be < {delta})"),
            json!({ "distance": dist }),
        )
        .with_data(json!({ "distance": dist })),
    );
    Ok(())
}

// ---------------------------------------------------------------- nonwandering

fn nonwandering(ctx: &mut Ctx) -> io::Result<()> {
    const SUITE: &str = "nonwandering";
    let nc = &ctx.cfg.nonwandering;
    let nw = nonwandering_approx(ctx.f, nc.m, nc.n_max);
    let s = nw.summary();
    let witness = nw
        .nonreturning
        .cells()
        .next()
        .map(|(i, j)| json!({ "box": [i, j] }));
    let summary = format!(
        "{} returning, {} certified nonreturning boxes within {} steps",
        s.returning, s.nonreturning, s.n_max
    );
    let check = match nc.expect_wandering {
        None => Check::pass(SUITE, "wandering boxes", summary),
        Some(true) => Check::verdict(
            SUITE,
            "wandering boxes",
            s.nonreturning > 0,
            summary,
            json!({ "nonreturning": 0 }),
        ),
        Some(false) => Check::verdict(
            SUITE,
            "wandering boxes",
            s.nonreturning == 0,
            summary,
            witness.unwrap_or_default(),
        ),
    };
    ctx.checks.push(check.with_data(s));
    round_trip_domains(
        ctx,
        SUITE,
        "nonwandering",
        &[
            ("returning", nw.returning),
            ("nonreturning", nw.nonreturning),
        ],
    )
}
