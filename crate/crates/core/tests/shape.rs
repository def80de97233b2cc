mod common;

use curlcurl_core::cases::unit_cube;
use curlcurl_core::mesh::BoundaryTag;
use curlcurl_core::shape::element::dimension;
use curlcurl_core::shape::field::{cell_quadrature, interpolate_cell};
use curlcurl_core::shape::trace::{edge_quadrature, face_quadrature, surface_curl};
use curlcurl_core::shape::{reference, CellwiseField, Constraints, DiscreteField, DofSpace, Family, PiecewiseField};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_coeffs(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

#[test]
fn closed_form_dimensions() {
    for p in 0..6 {
        assert_eq!(dimension(Family::Lagrange, p + 1), (p + 2) * (p + 3) * (p + 4) / 6);
        assert_eq!(dimension(Family::Nedelec, p), (p + 1) * (p + 3) * (p + 4) / 2);
        assert_eq!(dimension(Family::RaviartThomas, p), (p + 1) * (p + 2) * (p + 4) / 2);
    }
}

#[test]
fn exact_sequence_on_a_cell() {
    // grad P_{p+1} lies in N_p and curl N_p lies in RT_p with zero divergence
    let mesh = common::two_tets();
    for p in 0..4 {
        let q = CellwiseField::new(
            reference(Family::Lagrange, p + 1).unwrap(),
            vec![1],
            vec![random_coeffs(dimension(Family::Lagrange, p + 1), p as u64)],
        );
        let grad = q.derived();
        let ned = reference(Family::Nedelec, p).unwrap();
        let g = CellwiseField::new(ned.clone(), vec![1], vec![interpolate_cell(&ned, &mesh, 1, &grad)]);
        let v = CellwiseField::new(ned, vec![1], vec![random_coeffs(dimension(Family::Nedelec, p), 9 + p as u64)]);
        let curl = v.derived();
        let rt = reference(Family::RaviartThomas, p).unwrap();
        let c = CellwiseField::new(rt, vec![1], vec![interpolate_cell(&reference(Family::RaviartThomas, p).unwrap(), &mesh, 1, &curl)]);
        let (x, _) = cell_quadrature(&mesh, 1, 2 * p + 2).unwrap();
        let (gv, gh) = (grad.eval(&mesh, 1, &x), g.eval(&mesh, 1, &x));
        let (cv, ch) = (curl.eval(&mesh, 1, &x), c.eval(&mesh, 1, &x));
        let curl_g = g.derived().eval(&mesh, 1, &x);
        let div_c = c.derived().eval(&mesh, 1, &x);
        for i in 0..x.len() {
            assert!((gv[i] - gh[i]).norm() < 1e-10 * (1.0 + gv[i].norm()), "p {p}");
            assert!((cv[i] - ch[i]).norm() < 1e-10 * (1.0 + cv[i].norm()), "p {p}");
            assert!(curl_g[i].norm() < 1e-9 * (1.0 + gv[i].norm()), "p {p}");
            assert!(div_c[i][0].abs() < 1e-9 * (1.0 + cv[i].norm()), "p {p}");
        }
    }
}

#[test]
fn surface_curl_satisfies_stokes() {
    let mesh = common::two_tets();
    for p in 0..3 {
        let v = CellwiseField::new(
            reference(Family::Nedelec, p).unwrap(),
            vec![0],
            vec![random_coeffs(dimension(Family::Nedelec, p), 40 + p as u64)],
        );
        for &f in mesh.tet_faces(0) {
            let n = mesh.face_normal(f);
            let (x, w) = face_quadrature(&mesh, f, p + 1).unwrap();
            let flux: f64 = surface_curl(&mesh, &v.derived(), 0, &n, &x).iter().zip(&w).map(|(c, w)| c * w).sum();
            let [a, b, c] = mesh.faces()[f];
            let pts = mesh.vertices();
            let orient = (pts[b] - pts[a]).cross(&(pts[c] - pts[a])).dot(&n).signum();
            let mut circulation = 0.0;
            for (s, t) in [(a, b), (b, c), (c, a)] {
                let e = mesh.edge_id(s, t).unwrap();
                let tangent = (pts[t] - pts[s]).normalize();
                let (xe, we) = edge_quadrature(&mesh, e, p + 1).unwrap();
                let vals = v.eval(&mesh, 0, &xe);
                circulation += vals.iter().zip(&we).map(|(u, w)| w * u.dot(&tangent)).sum::<f64>();
            }
            assert!((flux - orient * circulation).abs() < 1e-12 * (1.0 + flux.abs()), "p {p} face {f}");
        }
    }
}

fn max_jump(mesh: &curlcurl_core::mesh::Mesh, field: &CellwiseField, family: Family) -> f64 {
    let mut worst = 0.0f64;
    for f in 0..mesh.num_faces() {
        let ts = mesh.face_tets(f);
        if ts.len() != 2 {
            continue;
        }
        let n = mesh.face_normal(f);
        let (x, _) = face_quadrature(mesh, f, 4).unwrap();
        let a = field.eval(mesh, ts[0], &x);
        let b = field.eval(mesh, ts[1], &x);
        for (u, w) in a.iter().zip(&b) {
            let d: Vector3<f64> = u - w;
            let jump = match family {
                Family::Lagrange => d.norm(),
                Family::Nedelec => d.cross(&n).norm(),
                Family::RaviartThomas => d.dot(&n).abs(),
            };
            worst = worst.max(jump);
        }
    }
    worst
}

#[test]
fn conforming_spaces_have_continuous_traces() {
    let mesh = unit_cube(1, BoundaryTag::Dirichlet);
    for family in [Family::Lagrange, Family::Nedelec, Family::RaviartThomas] {
        for p in 0..3 {
            let deg = if family == Family::Lagrange { p + 1 } else { p };
            let space = std::sync::Arc::new(DofSpace::global(&mesh, family, deg, &Constraints::none()).unwrap());
            let n = space.ndofs();
            let field = DiscreteField::new(space, random_coeffs(n, 3 + p as u64)).cellwise();
            let jump = max_jump(&mesh, &field, family);
            assert!(jump < 1e-11, "{family:?} {p}: {jump}");
        }
        // broken fields are generically discontinuous
        let cells: Vec<usize> = (0..mesh.num_tets()).collect();
        let deg = if family == Family::Lagrange { 1 } else { 0 };
        let broken = DofSpace::new(&mesh, family, deg, &cells, true, &Constraints::none()).unwrap();
        assert_eq!(broken.ndofs(), mesh.num_tets() * dimension(family, deg));
        let field = DiscreteField::new(std::sync::Arc::new(broken), random_coeffs(broken_len(&mesh, family, deg), 1)).cellwise();
        assert!(max_jump(&mesh, &field, family) > 1e-3);
    }
}

fn broken_len(mesh: &curlcurl_core::mesh::Mesh, family: Family, deg: usize) -> usize {
    mesh.num_tets() * dimension(family, deg)
}

#[test]
fn constrained_faces_have_zero_traces() {
    let mesh = unit_cube(1, BoundaryTag::Dirichlet);
    let faces: Vec<usize> = mesh.boundary_faces().collect();
    let space = std::sync::Arc::new(DofSpace::global(&mesh, Family::Nedelec, 2, &Constraints::faces(faces.clone())).unwrap());
    let n = space.ndofs();
    let field = DiscreteField::new(space, random_coeffs(n, 8)).cellwise();
    for f in faces {
        let t = mesh.face_tets(f)[0];
        let normal = mesh.face_normal(f);
        let (x, _) = face_quadrature(&mesh, f, 4).unwrap();
        for u in field.eval(&mesh, t, &x) {
            assert!(u.cross(&normal).norm() < 1e-12);
        }
    }
}
