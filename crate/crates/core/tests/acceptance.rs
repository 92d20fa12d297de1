//! Acceptance run: every criterion at its pinned tolerance, one PASS/FAIL
//! line each. Run with `--nocapture` to see the lines as they are produced.

use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use bclab::algebra::commutator_profile;
use bclab::forward::*;
use bclab::io;
use bclab::manifold::*;
use bclab::model_space::*;
use bclab::pipeline::{self, RunConfig, VerifyReport};
use bclab::reconstruction::*;
use bclab::response::*;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    id: usize,
    name: &'static str,
    passed: bool,
    detail: String,
}

#[derive(Default)]
struct Sheet {
    rows: Vec<Outcome>,
}

impl Sheet {
    fn record(&mut self, id: usize, name: &'static str, passed: bool, detail: String) {
        println!("[{}] {id:>2} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
        self.rows.push(Outcome { id, name, passed, detail });
    }

    fn check(&mut self, id: usize, name: &'static str, r: Result<(bool, String), String>) {
        match r {
            Ok((p, d)) => self.record(id, name, p, d),
            Err(e) => self.record(id, name, false, format!("error: {e}")),
        }
    }
}

type Check = Result<(bool, String), String>;

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn baseline(physics: Physics) -> RunConfig {
    RunConfig { physics, ..Default::default() }
}

fn run_pipeline(cfg: &RunConfig, dir: &Path, verify: bool) -> Result<(pipeline::Reconstruction, Option<VerifyReport>), String> {
    pipeline::forward(cfg, dir).map_err(e2s)?;
    let r = pipeline::reconstruct(cfg, dir).map_err(e2s)?;
    let v = if verify { Some(pipeline::verify(cfg, dir).map_err(e2s)?) } else { None };
    Ok((r, v))
}

fn cloud_vs_truth(cfg: &RunConfig, r: &pipeline::Reconstruction) -> Result<ComparisonReport, String> {
    let grid = cfg.grid().map_err(e2s)?;
    let truth = ground_truth_embedding(&grid, &cfg.patches, cfg.horizon).map_err(e2s)?;
    hausdorff(&r.cloud.points, &truth.points).map_err(e2s)
}

fn mimetic() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = MetricGrid::<f64>::unit_cube(10, MetricSpec::ConformalSine { amplitude: 0.2, axis: 0 }).map_err(e2s)?;
    let calc = Calculus::new(&g);
    let h = g.min_spacing();
    let random = |p: Placement, rng: &mut ChaCha8Rng| {
        let mut v = VectorField::zeros(&g, p);
        v.comps.iter_mut().flatten().for_each(|x| *x = rng.random_range(-1.0..1.0));
        v
    };
    let mut worst_div = 0.0f64;
    for _ in 0..100 {
        let z = random(Placement::Edge, &mut rng);
        let d = calc.div(&calc.curl(&z).map_err(e2s)?).map_err(e2s)?;
        worst_div = worst_div.max(d.max_abs() / (z.max_abs() / (h * h)));
    }
    let mut worst_adj = 0.0f64;
    for _ in 0..20 {
        let mut u = random(Placement::Edge, &mut rng);
        for a in 0..3 {
            let lat = g.edge_lattice(a);
            for i in 0..lat.len() {
                if g.is_boundary_edge(a, lat.coords(i)) {
                    u.comps[a][i] = 0.0;
                }
            }
        }
        let v = random(Placement::Face, &mut rng);
        let lhs = calc.inner(&calc.curl(&u).map_err(e2s)?, &v).map_err(e2s)?;
        let rhs = calc.inner(&u, &calc.curl_dual(&v).map_err(e2s)?).map_err(e2s)?;
        worst_adj = worst_adj.max((lhs - rhs).abs() / (calc.norm(&u) * calc.norm(&v)));
    }
    Ok((worst_div <= 1e-12 && worst_adj <= 1e-10, format!("div curl {worst_div:.2e} (≤ 1e-12), adjointness {worst_adj:.2e} (≤ 1e-10)")))
}

fn pulse_signal(sys: &WaveSystem<f64>, spec: &PatchSpec, steps: usize, power: i32) -> Result<ControlSignal<f64>, String> {
    let profile = Arc::new(SpatialProfile::bump(sys, spec.rects[0], 0, &spec.id).map_err(e2s)?);
    let b = bump_table::<f64>(steps, power);
    Ok(ControlSignal { patch: spec.id.clone(), profile, temporal: b, delay: None })
}

fn energy() -> Check {
    let t0 = Instant::now();
    let g = MetricGrid::<f64>::unit_cube(16, MetricSpec::Identity).map_err(e2s)?;
    let sys = WaveSystem::new(&g, Physics::Maxwell, cfl_limit(&g, 0.9)).map_err(e2s)?;
    let spec = PatchSpec::quarter(Side { axis: 2, high: false }, 1, 0);
    let ctl = pulse_signal(&sys, &spec, 60, 3)?;
    let mut state = sys.zero_state();
    let mut b = vec![0.0; sys.boundary.len()];
    for m in 0..=60 {
        ctl.boundary_values(m + 1, &mut b);
        sys.step(&mut state, &b);
    }
    let zero = vec![0.0; sys.boundary.len()];
    let e0 = sys.energy(&state);
    for _ in 0..1000 {
        sys.step(&mut state, &zero);
    }
    let drift = (sys.energy(&state) - e0).abs() / e0;
    let el = t0.elapsed();
    Ok((drift < 1e-10 && el < Duration::from_secs(60), format!("relative drift {drift:.2e} over 1000 steps (< 1e-10), {el:.1?}")))
}

fn finite_speed() -> Check {
    let t0 = Instant::now();
    let g = MetricGrid::<f64>::unit_cube(16, MetricSpec::Identity).map_err(e2s)?;
    let sys = WaveSystem::new(&g, Physics::Maxwell, cfl_limit(&g, 0.9)).map_err(e2s)?;
    let h = g.max_spacing();
    let patches = [
        PatchSpec::side(Side { axis: 2, high: false }),
        PatchSpec::quarter(Side { axis: 0, high: false }, 0, 0),
        PatchSpec::quarter(Side { axis: 1, high: true }, 1, 1),
    ];
    let mut worst = 0.0f64;
    for spec in &patches {
        let tau = nodes_to_edges(&g, &geodesic_distance(&g, &BoundaryPatch::new(&g, spec).map_err(e2s)?).map_err(e2s)?.values);
        for t in [0.1, 0.2, 0.3] {
            let m = (t / sys.dt).floor() as usize;
            let ctl = pulse_signal(&sys, spec, m, 24)?;
            let x = solve(&sys, &ctl, m, &Recording::default()).map_err(e2s)?.state.x;
            let t = m as f64 * sys.dt;
            let peak = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let outside = x.iter().zip(&tau).filter(|(_, d)| **d > t + 2.0 * h).fold(0.0f64, |a, (v, _)| a.max(v.abs()));
            worst = worst.max(outside / peak);
        }
    }
    let el = t0.elapsed();
    Ok((worst <= 1e-6 && el < Duration::from_secs(300), format!("max outside/peak {worst:.2e} (≤ 1e-6) over 3 patches × 3 times at CFL 0.9, {el:.1?}")))
}

fn solenoidal(dir: &Path, cfg: &RunConfig) -> Check {
    let (snaps, _) = io::read_matrix(&dir.join(pipeline::ORACLE)).map_err(e2s)?;
    let g = cfg.grid().map_err(e2s)?;
    let calc = Calculus::new(&g);
    let lat = g.node_lattice();
    let interior: Vec<usize> = (0..lat.len()).filter(|&n| !g.is_boundary_node(lat.coords(n))).collect();
    let mut worst = 0.0f64;
    for r in 0..snaps.nrows() {
        let e: Vec<f64> = snaps.row(r).iter().copied().collect();
        let norm = bclab::scalar::wdot(&calc.edge_mass, &e, &e).sqrt();
        if norm == 0.0 {
            continue;
        }
        let div = calc.div_edges_flat(&e);
        let m = interior.iter().fold(0.0f64, |a, &n| a.max(div[n].abs()));
        worst = worst.max(m / (norm / g.max_spacing()));
    }
    Ok((worst <= 1e-10, format!("max |div e| / (‖e‖/h) = {worst:.2e} (≤ 1e-10) over {} snapshots", snaps.nrows())))
}

/// Relative Frobenius distance between the data-side connecting form and the
/// interior Gram matrix of the snapshots.
fn consistency(cfg: &RunConfig, dir: &Path) -> Result<f64, String> {
    let setup = cfg.setup().map_err(e2s)?;
    let basis = setup.basis.as_ref().unwrap();
    let (c, _) = io::read_matrix(&dir.join(pipeline::CONNECTING_FORM)).map_err(e2s)?;
    let (snaps, _) = io::read_matrix(&dir.join(pipeline::ORACLE)).map_err(e2s)?;
    let mass = setup.system.primary_mass();
    let ms = DMatrix::from_fn(snaps.ncols(), snaps.nrows(), |r, k| snaps[(k, r)] * mass[r]);
    let gram = &snaps * ms;
    let _ = basis;
    Ok((&c - &gram).norm() / gram.norm())
}

fn spectrum_quantiles(v: &[f64], m: usize) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    (0..m)
        .map(|i| {
            let x = (i as f64 + 0.5) / m as f64 * s.len() as f64 - 0.5;
            let lo = x.floor().clamp(0.0, (s.len() - 1) as f64) as usize;
            let hi = (lo + 1).min(s.len() - 1);
            let f = (x - lo as f64).clamp(0.0, 1.0);
            s[lo] * (1.0 - f) + s[hi] * f
        })
        .collect()
}

fn face_eikonals(cfg: &RunConfig, dir: &Path) -> Result<Vec<(ControlBasis<f64>, SubspaceChain<f64>)>, String> {
    let setup = cfg.setup().map_err(e2s)?;
    let basis = setup.basis.unwrap();
    let resp = ResponseMatrix::from_data(&basis, &read_response(dir)?).map_err(e2s)?;
    let w = sqrt_operator(&gram_matrix(&resp).map_err(e2s)?, &basis.gram).map_err(e2s)?;
    PatchSpec::sides()
        .iter()
        .map(|p| reachable_subspace(&w.matrix, &w.chol, &basis, p, cfg.rank_threshold).map(|c| (basis.clone(), c)).map_err(e2s))
        .collect()
}

fn read_response(dir: &Path) -> Result<ResponseData<f64>, String> {
    let m: pipeline::Manifest = io::read_json(&dir.join(pipeline::MANIFEST)).map_err(e2s)?;
    let (t, _) = io::read_matrix(&dir.join(pipeline::RESPONSE)).map_err(e2s)?;
    let p = m.profiles;
    Ok(ResponseData {
        steps_per_t: m.steps_per_t,
        projections: (0..p).map(|a| (0..p).map(|b| t.row(a * p + b).iter().copied().collect()).collect()).collect(),
    })
}

fn nesting(cfg: &RunConfig, dir: &Path, doubled_dir: &Path, doubled: &RunConfig) -> Check {
    let t = cfg.horizon;
    let chains = face_eikonals(cfg, dir)?;
    let mut nest = 0.0f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut spectra = Vec::new();
    for (basis, chain) in &chains {
        let mut prev = projection(chain, 0.0).matrix;
        for &s in &basis.delays {
            let e = projection(chain, s).matrix;
            nest = nest.max((&e * &prev - &prev).norm()).max((&e * &e - &e).norm());
            prev = e;
        }
        let ev = eikonal(chain).eigenvalues();
        lo = lo.min(*ev.last().unwrap());
        hi = hi.max(ev[0]);
        spectra.push(ev);
    }
    let mut worst = 0.0f64;
    for ((_, c2), ev) in face_eikonals(doubled, doubled_dir)?.iter().zip(&spectra) {
        let e2 = eikonal(c2).eigenvalues();
        let nz = |v: &[f64]| v.iter().copied().filter(|x| *x > 1e-9 * t).collect::<Vec<_>>();
        let (a, b) = (nz(ev), nz(&e2));
        let m = a.len().max(b.len());
        let (qa, qb) = (spectrum_quantiles(&a, m), spectrum_quantiles(&b, m));
        worst = worst.max(pipeline::spectrum_distance(&qb, &qa));
    }
    let bounded = lo >= -1e-6 * t && hi <= t * (1.0 + 1e-6);
    Ok((
        nest < 1e-10 && bounded && worst <= 0.1,
        format!("nesting defect {nest:.1e}, spectra in [{lo:.2e}, {hi:.4}] (T = {t}), K → 2K spectral change {worst:.3} (≤ 0.1)"),
    ))
}

fn mean_face_commutator(r: &pipeline::Reconstruction) -> f64 {
    commutator_profile(&r.eikonals[..6], false).mean_normalized()
}

#[test]
fn acceptance() {
    let mut sheet = Sheet::default();
    let work = tempfile::tempdir().unwrap();
    let dir = |name: &str| work.path().join(name);

    sheet.check(1, "mimetic identities", mimetic());
    sheet.check(2, "energy conservation", energy());
    sheet.check(3, "finite speed of propagation", finite_speed());

    // baseline Maxwell pipeline, timed
    let base = baseline(Physics::Maxwell);
    let t0 = Instant::now();
    let main = run_pipeline(&base, &dir("base"), true);
    let elapsed = t0.elapsed();
    let (rec, report) = match main {
        Ok((r, v)) => (Some(r), v),
        Err(e) => {
            println!("baseline pipeline failed: {e}");
            (None, None)
        }
    };
    let crit = |name: &str| report.as_ref().and_then(|r| r.criteria.iter().find(|c| c.name == name).cloned());

    sheet.check(4, "solenoidal snapshots", solenoidal(&dir("base"), &base));

    let fine = RunConfig { dims: [32; 3], ..baseline(Physics::Maxwell) };
    let fine_run = run_pipeline(&fine, &dir("fine"), false);
    sheet.check(5, "connecting form vs interior oracle", (|| {
        let coarse = consistency(&base, &dir("base"))?;
        fine_run.as_ref().map_err(|e| e.clone())?;
        let f = consistency(&fine, &dir("fine"))?;
        Ok((coarse <= 0.05 && f < coarse, format!("relative error {coarse:.4} at 16³ (≤ 0.05), {f:.4} at 32³ (must be smaller)")))
    })());

    let doubled = RunConfig { basis: BasisSpec { delays: 16, ..Default::default() }, ..baseline(Physics::Maxwell) };
    sheet.check(6, "projection nesting and eikonal spectra", (|| {
        pipeline::forward(&doubled, &dir("k16")).map_err(e2s)?;
        nesting(&base, &dir("base"), &dir("k16"), &doubled)
    })());

    sheet.check(7, "unitary equivalence of eikonals", (|| {
        let c = crit("model vs oracle eikonal spectra").ok_or("no report")?;
        Ok((c.passed, format!("worst relative ℓ² spectral distance {:.4} over {} patches (≤ {})", c.measured, base.patches.len(), c.threshold)))
    })());

    sheet.check(8, "commutators and compact defect", (|| {
        let r = report.as_ref().ok_or("no report")?;
        let coarse = mean_face_commutator(rec.as_ref().ok_or("no reconstruction")?);
        let f = mean_face_commutator(&fine_run.as_ref().map_err(|e| e.clone())?.0);
        let ratio = coarse / f;
        let ident = crit("defect quadrature identity").ok_or("no report")?;
        let k0: Vec<String> = r.defects.iter().map(|d| format!("{}:{}", d.patch, d.k0.map_or("-".into(), |k| k.to_string()))).collect();
        Ok((
            ratio >= 1.3 && ident.passed,
            format!(
                "face commutator mean {coarse:.4} → {f:.4} (ratio {ratio:.2}, ≥ 1.3); identity error {:.3e} (≤ {:.3e}); K0 {}",
                ident.measured,
                ident.threshold,
                k0.join(" ")
            ),
        ))
    })());

    sheet.check(9, "separation audit", (|| {
        let r = report.as_ref().ok_or("no report")?;
        let s = &r.separation;
        Ok((s.separated == s.pairs && s.pairs == 500, format!("{}/{} pairs separated, worst gap {:.4}, {} nodes excluded near the cut", s.separated, s.pairs, s.worst_gap, s.excluded_near_cut)))
    })());

    sheet.check(10, "density audit", (|| {
        let r = report.as_ref().ok_or("no report")?;
        let grid = base.grid().map_err(e2s)?;
        let single = density_audit(&[PatchSpec::side(Side { axis: 0, high: false })], &grid, base.horizon).map_err(e2s)?;
        let d = &r.density;
        Ok((
            d.injective && !single.injective,
            format!(
                "default family injective: {} ({} collisions, minimal family {}); single patch injective: {} ({} collisions)",
                d.injective,
                d.collisions,
                d.minimal_family.len(),
                single.injective,
                single.collisions
            ),
        ))
    })());

    let h = 1.0 / 16.0;
    sheet.check(11, "cloud vs ground-truth embedding", (|| {
        let scalar = baseline(Physics::Scalar);
        let (rs, _) = run_pipeline(&scalar, &dir("scalar"), false)?;
        let hs = cloud_vs_truth(&scalar, &rs)?.hausdorff;
        let hm = report.as_ref().ok_or("no report")?.comparison.hausdorff;
        let perturbed = RunConfig { metric: MetricSpec::ConformalSine { amplitude: 0.2, axis: 0 }, ..baseline(Physics::Maxwell) };
        let (rp, _) = run_pipeline(&perturbed, &dir("perturbed"), false)?;
        let hp = cloud_vs_truth(&perturbed, &rp)?.hausdorff;
        let hf = cloud_vs_truth(&fine, &fine_run.as_ref().map_err(|e| e.clone())?.0)?.hausdorff;
        Ok((
            hs <= 2.0 * h && hm <= 3.0 * h && hp <= 5.0 * h && hf <= 1.1 * hm,
            format!(
                "scalar {:.2}h (≤ 2h), Maxwell {:.2}h (≤ 3h), perturbed {:.2}h (≤ 5h), Maxwell 32³ {hf:.4} vs 16³ {hm:.4} (≤ +10%)",
                hs / h,
                hm / h,
                hp / h
            ),
        ))
    })());

    sheet.check(12, "determinism", (|| {
        pipeline::forward(&base, &dir("again")).map_err(e2s)?;
        pipeline::reconstruct(&base, &dir("again")).map_err(e2s)?;
        let mut same = Vec::new();
        for f in [pipeline::RESPONSE, pipeline::ORACLE, pipeline::CONNECTING_FORM, pipeline::CLOUD] {
            let a = std::fs::read(dir("base").join(f)).map_err(e2s)?;
            let b = std::fs::read(dir("again").join(f)).map_err(e2s)?;
            same.push((f, a == b));
        }
        Ok((same.iter().all(|s| s.1), format!("bit-identical: {same:?}")))
    })());

    sheet.record(
        13,
        "runtime budget",
        report.is_some() && elapsed < Duration::from_secs(600),
        format!("baseline forward + reconstruct + verify at 16³: {elapsed:.1?} (< 600 s)"),
    );

    let failed: Vec<String> = sheet.rows.iter().filter(|o| !o.passed).map(|o| format!("{} {} ({})", o.id, o.name, o.detail)).collect();
    println!("{} of {} criteria passed", sheet.rows.len() - failed.len(), sheet.rows.len());
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
