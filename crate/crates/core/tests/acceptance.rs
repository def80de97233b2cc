//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit status
//! when any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use curlcurl_core::cases::{
    cube_smooth, lshape, lshape_singular, polynomial_dirichlet, polynomial_mixed, unit_cube, unit_cube_tagged, Solution,
};
use curlcurl_core::equilibration::{cutoff_constants, edge_function, estimate, EstimatorConfig, EstimatorReport, Method};
use curlcurl_core::global::{data_degree, energy_error, solve};
use curlcurl_core::mesh::{BoundaryTag, Mesh};
use curlcurl_core::oracles::{bound_check, stability_ratio, StabilityExperiment, TestFamily};
use curlcurl_core::piola::{covariant_piola, reflection_map, AffineMap, Point};
use curlcurl_core::runner::first_interior_edge;
use curlcurl_core::shape::field::{cell_quadrature, interpolate_cell};
use curlcurl_core::shape::trace::edge_quadrature;
use curlcurl_core::shape::{reference, Analytic, CellwiseField, Family, PiecewiseField};
use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Run {
    error: f64,
    h: f64,
    report: EstimatorReport,
}

/// Cube runs keyed by `(N, p, method)`, computed on demand.
#[derive(Default)]
struct Cache {
    runs: BTreeMap<(usize, usize, &'static str), Run>,
    errors: BTreeMap<(usize, usize), (f64, f64)>,
}

fn solve_and_estimate(mesh: &Mesh, exact: &Solution, p: usize, method: Method) -> Run {
    let source = Analytic(exact.source.clone());
    let sol = solve(mesh, p, &source).expect("global solve");
    let err = energy_error(mesh, &sol.cellwise(), &Analytic(exact.curl.clone()), data_degree(p)).unwrap();
    let config = EstimatorConfig { method, ..EstimatorConfig::default() };
    let report = estimate(mesh, &sol, &source, &config, Some(&err)).expect("estimate");
    Run { error: err.global, h: mesh.h_max(), report }
}

impl Cache {
    fn run(&mut self, n: usize, p: usize, method: Method) -> &Run {
        self.runs.entry((n, p, method.name())).or_insert_with(|| {
            let mesh = unit_cube(n, BoundaryTag::Neumann);
            solve_and_estimate(&mesh, &cube_smooth(), p, method)
        })
    }

    /// `(h, error)` without estimating.
    fn error(&mut self, n: usize, p: usize) -> (f64, f64) {
        if let Some(r) = self.runs.get(&(n, p, "patch")) {
            return (r.h, r.error);
        }
        *self.errors.entry((n, p)).or_insert_with(|| {
            let exact = cube_smooth();
            let mesh = unit_cube(n, BoundaryTag::Neumann);
            let sol = solve(&mesh, p, &Analytic(exact.source.clone())).expect("global solve");
            let err = energy_error(&mesh, &sol.cellwise(), &Analytic(exact.curl.clone()), data_degree(p)).unwrap();
            (mesh.h_max(), err.global)
        })
    }
}

struct Suite {
    failed: Vec<String>,
}

impl Suite {
    fn record(&mut self, name: &str, pass: bool, detail: String, start: Instant) {
        let secs = start.elapsed().as_secs_f64();
        println!("{} {name}: {detail} [{secs:.1} s]", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(name.to_string());
        }
    }
}

fn equilibration_exactness(cache: &mut Cache) -> (bool, String) {
    let mut worst = 0.0f64;
    for p in 0..=2 {
        for method in [Method::Patch, Method::Sweep] {
            for est in &cache.run(4, p, method).report.estimates {
                worst = worst.max(est.equilibration_defect / (1.0 + est.source_norm));
            }
        }
    }
    (worst <= 1e-10, format!("max relative defect {worst:.2e} (limit 1e-10)"))
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|(h, e)| (h.ln(), e.ln())).unzip();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn h_convergence(cache: &mut Cache) -> (bool, String) {
    let mut pass = true;
    let mut detail = Vec::new();
    for p in 0..=2 {
        let pts: Vec<(f64, f64)> = [2, 4, 8].iter().map(|&n| cache.error(n, p)).collect();
        let s = slope(&pts);
        pass &= (s - (p as f64 + 1.0)).abs() <= 0.25;
        detail.push(format!("p={p} slope {s:.3}"));
    }
    (pass, detail.join(", "))
}

fn local_efficiency(cache: &mut Cache) -> (bool, String) {
    let mut pass = true;
    let mut detail = Vec::new();
    for p in 0..=2 {
        let eff = cache.run(4, p, Method::Patch).report.max_efficiency().unwrap();
        let limit = if p == 0 { 2.2 } else { 1.6 };
        pass &= eff <= limit;
        detail.push(format!("p={p} {eff:.3} (limit {limit})"));
    }
    (pass, detail.join(", "))
}

fn mesh_independence(cache: &mut Cache) -> (bool, String) {
    let mut pass = true;
    let mut detail = Vec::new();
    for p in 0..=1 {
        let eff: Vec<f64> = [2, 4, 8]
            .iter()
            .map(|&n| {
                let r = cache.run(n, p, Method::Patch);
                r.report.eta_cofree / r.error
            })
            .collect();
        let max = eff.iter().copied().fold(f64::MIN, f64::max);
        let min = eff.iter().copied().fold(f64::MAX, f64::min);
        let variation = max / min - 1.0;
        pass &= variation <= 0.15;
        detail.push(format!("p={p} efficiencies {eff:.3?} variation {:.1}%", 100.0 * variation));
    }
    (pass, detail.join("; "))
}

fn upper_bound(cache: &mut Cache) -> (bool, String) {
    let mut pass = true;
    let mut min_margin = f64::INFINITY;
    for run in cache.runs.values() {
        let check = bound_check(&run.report).unwrap();
        pass &= check.upper_holds && check.margin >= 1e-6;
        min_margin = min_margin.min(check.margin);
    }
    (pass, format!("{} runs, smallest relative margin {min_margin:.3e} (limit 1e-6)", cache.runs.len()))
}

fn stability(exp: &StabilityExperiment, ratio: fn(&curlcurl_core::oracles::StabilityRow) -> f64) -> (bool, String) {
    let r: Vec<f64> = exp.rows.iter().map(ratio).collect();
    let in_range = r.iter().all(|&v| (1.0 - 1e-10..=10.0).contains(&v));
    let spread = exp.spread(ratio);
    (
        in_range && spread <= 1.5,
        format!("edge {} kappa {:.2}, ratios {r:.3?}, spread {spread:.3} (limit 1.5)", exp.edge, exp.kappa),
    )
}

fn sweep_dominance(cache: &mut Cache, exp: &StabilityExperiment) -> (bool, String) {
    let mut pass = true;
    let mut ratios = Vec::new();
    for p in 0..=2 {
        let patch: Vec<f64> = cache.run(4, p, Method::Patch).report.indicators();
        let sweep: Vec<f64> = cache.run(4, p, Method::Sweep).report.indicators();
        let mut max_ratio = 1.0f64;
        for (a, b) in patch.iter().zip(&sweep) {
            pass &= *a <= b + 1e-10;
            if *a > 0.0 {
                max_ratio = max_ratio.max(b / a);
            }
        }
        ratios.push(max_ratio);
    }
    let (stable, detail) = stability(exp, |r| r.ratio_sweep());
    (pass && stable, format!("max sweep/patch per p {ratios:.3?}; {detail}"))
}

fn random_field(family: Family, p: usize, cell: usize, rng: &mut ChaCha8Rng) -> CellwiseField {
    let element = reference(family, p).unwrap();
    let coeffs = (0..element.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    CellwiseField::new(element, vec![cell], vec![coeffs])
}

struct Closure<F>(F);

impl<F: Fn(&Point) -> Vector3<f64> + Sync> PiecewiseField for Closure<F> {
    fn eval(&self, _mesh: &Mesh, _tet: usize, points: &[Point]) -> Vec<Vector3<f64>> {
        points.iter().map(&self.0).collect()
    }
}

fn identities() -> (bool, String) {
    // partition of unity and edge moments
    let mesh = unit_cube(2, BoundaryTag::Dirichlet);
    let mut pu = 0.0f64;
    let mut moments = 0.0f64;
    for t in 0..mesh.num_tets() {
        let (x, _) = cell_quadrature(&mesh, t, 4).unwrap();
        let mut sum = vec![Matrix3::zeros(); x.len()];
        for &e in mesh.tet_edges(t) {
            let psi = edge_function(&mesh, e);
            let tau = mesh.edge_tangent(e);
            for (q, v) in psi.eval(&mesh, t, &x).iter().enumerate() {
                sum[q] += tau * v.transpose();
            }
            for &e2 in mesh.tet_edges(t) {
                let (xe, we) = edge_quadrature(&mesh, e2, 2).unwrap();
                let t2 = mesh.edge_tangent(e2);
                let m: f64 = psi.eval(&mesh, t, &xe).iter().zip(&we).map(|(v, w)| w * v.dot(&t2)).sum();
                let expect = if e2 == e { mesh.edge_length(e) } else { 0.0 };
                moments = moments.max((m - expect).abs());
            }
        }
        for s in sum {
            pu = pu.max((s - Matrix3::identity()).abs().max());
        }
    }
    // continuity constant bound on every patch
    let mut cont = true;
    for e in 0..mesh.num_edges() {
        let c = cutoff_constants(&mesh, &mesh.edge_patch(e).unwrap(), 1.0);
        cont &= c.c_cont <= c.c_kappa;
    }
    // Piola commuting and adjoint identities
    let pair = common::two_tets();
    let (a, b) = (pair.tet_vertices(0), pair.tet_vertices(1));
    let maps = [reflection_map(&a, &b).unwrap(), AffineMap::between(&a, &b).unwrap()];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut commute, mut adjoint) = (0.0f64, 0.0f64);
    for map in &maps {
        for p in 0..=2 {
            let v = random_field(Family::Nedelec, p, 0, &mut rng);
            let eval0 = |x: &Point| v.eval(&pair, 0, std::slice::from_ref(x))[0];
            let w = covariant_piola(map, eval0);
            let ned = reference(Family::Nedelec, p).unwrap();
            let coeffs = interpolate_cell(&ned, &pair, 1, &Closure(&w));
            let wh = CellwiseField::new(ned, vec![1], vec![coeffs]);
            let (xo, wo) = cell_quadrature(&pair, 1, 2 * p + 2).unwrap();
            let curl_wh = wh.derived().eval(&pair, 1, &xo);
            for (y, c) in xo.iter().zip(&curl_wh) {
                let pre = map.apply_inverse(y);
                let expect = map.contravariant(&v.derived().eval(&pair, 0, &[pre])[0]);
                commute = commute.max((c - expect).norm() / (1.0 + expect.norm()));
            }
            let u = random_field(Family::Nedelec, p, 1, &mut rng);
            let uo = u.eval(&pair, 1, &xo);
            let lhs: f64 = xo.iter().zip(&wo).zip(&uo).map(|((y, q), uy)| q * w(y).dot(uy)).sum();
            let (xi, wi) = cell_quadrature(&pair, 0, 2 * p + 2).unwrap();
            let rhs: f64 = xi
                .iter()
                .zip(&wi)
                .map(|(x, q)| {
                    let pulled = map.contravariant_pullback(&u.eval(&pair, 1, &[map.apply(x)])[0]);
                    q * eval0(x).dot(&pulled)
                })
                .sum();
            adjoint = adjoint.max((lhs - map.sign() * rhs).abs() / (1.0 + lhs.abs()));
        }
    }
    let pass = pu <= 1e-12 && moments <= 1e-12 && commute <= 1e-12 && adjoint <= 1e-12 && cont;
    (
        pass,
        format!(
            "partition of unity {pu:.1e}, edge moments {moments:.1e}, commuting {commute:.1e}, adjoint {adjoint:.1e}, C_cont <= C_kappa on all patches: {cont}"
        ),
    )
}

fn polynomial_exactness() -> (bool, String) {
    let mut pass = true;
    let mut detail = Vec::new();
    let (tags, mixed) = polynomial_mixed();
    let cases: [(&str, Mesh, Solution, usize); 2] = [
        ("mixed", unit_cube_tagged(2, tags), mixed, 2),
        ("dirichlet", unit_cube(1, BoundaryTag::Dirichlet), polynomial_dirichlet(), 4),
    ];
    for (name, mesh, exact, p) in cases {
        let run = solve_and_estimate(&mesh, &exact, p, Method::Patch);
        let curl_norm = {
            let zero = solve(&mesh, p, &Analytic::zero()).unwrap();
            energy_error(&mesh, &zero.cellwise(), &Analytic(exact.curl.clone()), data_degree(p)).unwrap().global
        };
        let rel = run.error / curl_norm;
        let scale = 1.0 + run.report.estimates.iter().map(|e| e.source_norm).fold(0.0, f64::max);
        let eta = run.report.estimates.iter().map(|e| e.eta).fold(0.0, f64::max);
        pass &= rel <= 1e-9 && eta <= 1e-9 * scale;
        detail.push(format!("{name} p={p}: relative error {rel:.1e}, max eta {eta:.1e} (scale {scale:.2})"));
    }
    (pass, detail.join("; "))
}

fn p_convergence(cache: &mut Cache) -> (bool, String) {
    let logs: Vec<f64> = (0..=5).map(|p| cache.error(2, p).1.log10()).collect();
    let decreasing = logs.windows(2).all(|w| w[1] < w[0]);
    let steps: Vec<f64> = logs.windows(2).map(|w| w[1] - w[0]).collect();
    let convex = steps.windows(2).all(|s| s[1] >= s[0] - 1e-12);
    let drop = logs[0] - logs[5];
    (
        decreasing && convex && drop >= 4.0,
        format!("log10 errors {logs:.3?}, decrements {steps:.3?}, drop {drop:.2} orders (limit 4), convex {convex}"),
    )
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

fn lshape_qualitative() -> (bool, String) {
    let exact = lshape_singular(2.0 / 3.0);
    let mut errors = Vec::new();
    let mut near = true;
    let mut far = 0.0f64;
    let mut mesh = lshape(0);
    for level in 0..3 {
        if level > 0 {
            mesh = mesh.uniform_refine();
        }
        let run = solve_and_estimate(&mesh, &exact, 0, Method::Patch);
        errors.push(run.error);
        if level == 2 {
            let eta = run.report.indicators();
            let mut order: Vec<usize> = (0..eta.len()).collect();
            order.sort_by(|&a, &b| eta[b].total_cmp(&eta[a]));
            for &e in &order[..10] {
                let [u, v] = mesh.edges()[e].map(|i| mesh.vertices()[i]);
                let m = (u + v) / 2.0;
                let r = m[0].hypot(m[1]);
                far = far.max(r / mesh.h_max());
                near &= r <= 2.0 * mesh.h_max();
            }
        }
    }
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    (
        monotone && near,
        format!("errors [{}], top-10 indicators at most {far:.2} h from the reentrant edge (limit 2)", sci(&errors)),
    )
}

fn main() {
    // test listing by cargo: there are no individual tests to enumerate
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut suite = Suite { failed: Vec::new() };
    let mut cache = Cache::default();

    let start = Instant::now();
    let (pass, detail) = identities();
    suite.record("exact-sequence and identity suite", pass, detail, start);

    let start = Instant::now();
    let (pass, detail) = equilibration_exactness(&mut cache);
    suite.record("equilibration exactness", pass, detail, start);

    let start = Instant::now();
    let (pass, detail) = h_convergence(&mut cache);
    suite.record("h-convergence", pass, detail, start);

    let start = Instant::now();
    let (pass, detail) = local_efficiency(&mut cache);
    suite.record("local efficiency", pass, detail, start);

    let start = Instant::now();
    let (pass, detail) = mesh_independence(&mut cache);
    suite.record("mesh-size independence of eta_cofree", pass, detail, start);

    let start = Instant::now();
    let (pass, detail) = upper_bound(&mut cache);
    suite.record("guaranteed upper bound", pass, detail, start);

    let start = Instant::now();
    let mesh = unit_cube(2, BoundaryTag::Neumann);
    let edge = first_interior_edge(&mesh).unwrap();
    let exp = stability_ratio(&mesh, edge, &[0, 1, 2, 3, 4], 3, TestFamily::Random, 42).expect("stability");
    let (pass, detail) = stability(&exp, |r| r.ratio_patch());
    suite.record("p-robustness of the patch problem", pass, detail, start);

    let start = Instant::now();
    let (pass, detail) = sweep_dominance(&mut cache, &exp);
    suite.record("sweep dominance and p-robustness", pass, detail, start);

    let start = Instant::now();
    let (pass, detail) = polynomial_exactness();
    suite.record("polynomial exactness", pass, detail, start);

    let start = Instant::now();
    let (pass, detail) = p_convergence(&mut cache);
    suite.record("p-convergence", pass, detail, start);

    let start = Instant::now();
    let (pass, detail) = lshape_qualitative();
    suite.record("L-shape uniform refinement", pass, detail, start);

    if suite.failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed {:?}", suite.failed);
        std::process::exit(1);
    }
}
