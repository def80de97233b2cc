//! Reference Lagrange, Nédélec (first kind) and Raviart–Thomas elements of
//! arbitrary degree on the unit tetrahedron.
//!
//! Every element is the Ciarlet dual of a set of moment functionals attached
//! to vertices, edges, faces and the cell. The functionals are invariant under
//! the matching Piola map as long as entities are parametrized from their
//! lowest global vertex, which is what the vertex-sorted mesh storage
//! guarantees. Consequently a dof attached to an edge or face means the same
//! thing in every tetrahedron sharing it, and the trace of a basis function on
//! a face depends only on the dofs of that face and its boundary.

use std::collections::HashMap;
use std::ops::Range;
use std::sync::{Arc, Mutex, OnceLock};

use faer::prelude::*;
use faer::Mat;

use super::poly::{gradient, MonomialSet, VecPoly};
use super::quadrature;
use crate::error::{Error, Result};

/// Largest supported polynomial degree.
pub const MAX_ELEMENT_DEGREE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Lagrange,
    Nedelec,
    RaviartThomas,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntityKind {
    Vertex,
    Edge,
    Face,
    Cell,
}

pub const REF_VERTICES: [[f64; 3]; 4] = [
    [0.0, 0.0, 0.0],
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
];

/// Local edges as ascending vertex pairs.
pub const LOCAL_EDGES: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];

/// Local faces; face `i` is opposite vertex `i`, vertices ascending.
pub const LOCAL_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

/// Local edges bounding each local face.
pub const FACE_EDGES: [[usize; 3]; 4] = [[3, 4, 5], [1, 2, 5], [0, 2, 4], [0, 1, 3]];

/// Local edge index of the vertex pair `(a, b)`, `a < b`.
pub fn local_edge(a: usize, b: usize) -> usize {
    LOCAL_EDGES
        .iter()
        .position(|e| *e == [a.min(b), a.max(b)])
        .expect("vertex pair is not a tetrahedron edge")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofLabel {
    pub kind: EntityKind,
    pub entity: usize,
    pub index: usize,
}

/// A moment functional written as a weighted point sum,
/// `l(v) = sum_q w_q . v(x_q)`. Scalar families only use `w[0]`.
#[derive(Debug, Clone, Default)]
pub struct Functional {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<[f64; 3]>,
}

impl Functional {
    fn push(&mut self, x: [f64; 3], w: [f64; 3]) {
        self.points.push(x);
        self.weights.push(w);
    }

    /// Apply to a function given on the reference element.
    pub fn apply(&self, f: impl Fn(&[f64; 3]) -> [f64; 3]) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| {
                let v = f(x);
                w[0] * v[0] + w[1] * v[1] + w[2] * v[2]
            })
            .sum()
    }
}

#[derive(Debug)]
pub struct ReferenceElement {
    pub family: Family,
    pub degree: usize,
    pub monomials: MonomialSet,
    /// Basis functions; Lagrange stores the scalar in component 0.
    pub basis: Vec<VecPoly>,
    /// Curl (Nédélec), divergence in component 0 (Raviart–Thomas) or
    /// gradient (Lagrange) of each basis function.
    pub derived: Vec<VecPoly>,
    pub labels: Vec<DofLabel>,
    pub functionals: Vec<Functional>,
    /// Dofs per vertex, edge, face and cell.
    pub per_entity: [usize; 4],
    /// Residual of the duality relation `l_i(phi_j) = delta_ij`.
    pub duality_residual: f64,
}

impl ReferenceElement {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    fn entity_offset(&self, kind: EntityKind) -> usize {
        let [nv, ne, nf, _] = self.per_entity;
        match kind {
            EntityKind::Vertex => 0,
            EntityKind::Edge => 4 * nv,
            EntityKind::Face => 4 * nv + 6 * ne,
            EntityKind::Cell => 4 * nv + 6 * ne + 4 * nf,
        }
    }

    /// Local dofs attached to one entity.
    pub fn entity_dofs(&self, kind: EntityKind, entity: usize) -> Range<usize> {
        let n = self.per_entity[kind as usize];
        let start = self.entity_offset(kind) + entity * n;
        start..start + n
    }

    /// Dofs determining the trace of the element on local face `f`: the
    /// tangential trace for Nédélec, the normal trace for Raviart–Thomas and
    /// the full trace for Lagrange.
    pub fn face_closure_dofs(&self, f: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.entity_dofs(EntityKind::Face, f).collect();
        for &e in &FACE_EDGES[f] {
            out.extend(self.entity_dofs(EntityKind::Edge, e));
        }
        for &v in &LOCAL_FACES[f] {
            out.extend(self.entity_dofs(EntityKind::Vertex, v));
        }
        out.sort_unstable();
        out
    }

    /// Values and derived quantities of every basis function at the given
    /// reference points, point-major.
    pub fn tabulate(&self, points: &[[f64; 3]]) -> Tabulation {
        let n = self.dim();
        let mut values = Vec::with_capacity(points.len() * n);
        let mut derived = Vec::with_capacity(points.len() * n);
        for x in points {
            let m = self.monomials.eval(x);
            for k in 0..n {
                values.push(self.basis[k].eval_with(&m));
                derived.push(self.derived[k].eval_with(&m));
            }
        }
        Tabulation {
            npoints: points.len(),
            ndofs: n,
            values,
            derived,
        }
    }

    /// Coefficients of the element interpolant of a reference-space function.
    pub fn interpolate(&self, f: impl Fn(&[f64; 3]) -> [f64; 3]) -> Vec<f64> {
        self.functionals.iter().map(|l| l.apply(&f)).collect()
    }
}

/// Basis values at a set of points; entry `q * ndofs + k` belongs to point
/// `q` and basis function `k`.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub npoints: usize,
    pub ndofs: usize,
    pub values: Vec<[f64; 3]>,
    pub derived: Vec<[f64; 3]>,
}

impl Tabulation {
    pub fn value(&self, q: usize, k: usize) -> [f64; 3] {
        self.values[q * self.ndofs + k]
    }

    pub fn derived(&self, q: usize, k: usize) -> [f64; 3] {
        self.derived[q * self.ndofs + k]
    }
}

/// Dimension of the local space.
pub fn dimension(family: Family, p: usize) -> usize {
    match family {
        Family::Lagrange => (p + 1) * (p + 2) * (p + 3) / 6,
        Family::Nedelec => (p + 1) * (p + 3) * (p + 4) / 2,
        Family::RaviartThomas => (p + 1) * (p + 2) * (p + 4) / 2,
    }
}

fn per_entity(family: Family, p: usize) -> [usize; 4] {
    let tri = |d: isize| if d < 0 { 0 } else { ((d + 1) * (d + 2) / 2) as usize };
    let tet = |d: isize| if d < 0 { 0 } else { ((d + 1) * (d + 2) * (d + 3) / 6) as usize };
    let p = p as isize;
    match family {
        // P_0 is only used broken, with its mean value as the single dof
        Family::Lagrange if p == 0 => [0, 0, 0, 1],
        Family::Lagrange => [1, (p - 1) as usize, tri(p - 3), tet(p - 4)],
        Family::Nedelec => [0, (p + 1) as usize, 2 * tri(p - 1), 3 * tet(p - 2)],
        Family::RaviartThomas => [0, 0, tri(p), 3 * tet(p - 1)],
    }
}

/// Shifted Legendre polynomial on `[0, 1]`.
fn legendre01(k: usize, s: f64) -> f64 {
    quadrature::legendre_with_derivative(k, 2.0 * s - 1.0).0
}

/// Monomials in `(s - 1/3, t - 1/3)` of degree `<= d`.
fn face_monomials(d: usize, s: f64, t: f64) -> Vec<f64> {
    let (u, v) = (s - 1.0 / 3.0, t - 1.0 / 3.0);
    let mut out = Vec::new();
    for total in 0..=d {
        for a in (0..=total).rev() {
            out.push(u.powi(a as i32) * v.powi((total - a) as i32));
        }
    }
    out
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn scale(a: &[f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn build_functionals(family: Family, p: usize) -> Result<(Vec<Functional>, Vec<DofLabel>)> {
    let mut funcs = Vec::new();
    let mut labels = Vec::new();
    let counts = per_entity(family, p);
    let qdeg = 2 * p + 2;
    let line = quadrature::line(qdeg)?;
    let tri = quadrature::triangle(qdeg)?;
    let tet = quadrature::tetrahedron(qdeg)?;

    // vertices
    if counts[0] > 0 {
        for (v, x) in REF_VERTICES.iter().enumerate() {
            let mut f = Functional::default();
            f.push(*x, [1.0, 0.0, 0.0]);
            funcs.push(f);
            labels.push(DofLabel { kind: EntityKind::Vertex, entity: v, index: 0 });
        }
    }
    // edges
    for (e, [a, b]) in LOCAL_EDGES.iter().enumerate() {
        let xa = REF_VERTICES[*a];
        let t = sub(&REF_VERTICES[*b], &xa);
        for k in 0..counts[1] {
            let mut f = Functional::default();
            for (s, w) in line.points.iter().zip(&line.weights) {
                let s = s[0];
                let x = [xa[0] + s * t[0], xa[1] + s * t[1], xa[2] + s * t[2]];
                let q = w * legendre01(k, s);
                let weight = match family {
                    Family::Nedelec => scale(&t, q),
                    _ => [q, 0.0, 0.0],
                };
                f.push(x, weight);
            }
            funcs.push(f);
            labels.push(DofLabel { kind: EntityKind::Edge, entity: e, index: k });
        }
    }
    // faces
    if counts[2] > 0 {
        let (qd, ncomp) = match family {
            Family::Lagrange => (p - 3, 1),
            Family::Nedelec => (p - 1, 2),
            Family::RaviartThomas => (p, 1),
        };
        for (fi, [a, b, c]) in LOCAL_FACES.iter().enumerate() {
            let xa = REF_VERTICES[*a];
            let t1 = sub(&REF_VERTICES[*b], &xa);
            let t2 = sub(&REF_VERTICES[*c], &xa);
            let normal = cross(&t1, &t2);
            let nq = (qd + 1) * (qd + 2) / 2;
            for qi in 0..nq {
                for comp in 0..ncomp {
                    let mut f = Functional::default();
                    for (st, w) in tri.points.iter().zip(&tri.weights) {
                        let (s, t) = (st[0], st[1]);
                        let x = [
                            xa[0] + s * t1[0] + t * t2[0],
                            xa[1] + s * t1[1] + t * t2[1],
                            xa[2] + s * t1[2] + t * t2[2],
                        ];
                        let q = w * face_monomials(qd, s, t)[qi];
                        let weight = match family {
                            Family::Lagrange => [q, 0.0, 0.0],
                            Family::Nedelec => scale(if comp == 0 { &t1 } else { &t2 }, q),
                            Family::RaviartThomas => scale(&normal, q),
                        };
                        f.push(x, weight);
                    }
                    funcs.push(f);
                    labels.push(DofLabel {
                        kind: EntityKind::Face,
                        entity: fi,
                        index: qi * ncomp + comp,
                    });
                }
            }
        }
    }
    // cell
    if counts[3] > 0 {
        let (qd, ncomp) = match family {
            Family::Lagrange => (p.saturating_sub(4), 1),
            Family::Nedelec => (p - 2, 3),
            Family::RaviartThomas => (p - 1, 3),
        };
        let set = MonomialSet::new(qd);
        let vals: Vec<Vec<f64>> = tet.points.iter().map(|x| set.eval(x)).collect();
        for qi in 0..set.len() {
            for comp in 0..ncomp {
                let mut f = Functional::default();
                for ((x, w), m) in tet.points.iter().zip(&tet.weights).zip(&vals) {
                    let mut weight = [0.0; 3];
                    weight[comp] = w * m[qi];
                    f.push(*x, weight);
                }
                funcs.push(f);
                labels.push(DofLabel {
                    kind: EntityKind::Cell,
                    entity: 0,
                    index: qi * ncomp + comp,
                });
            }
        }
    }
    Ok((funcs, labels))
}

/// Spanning set of the local space over monomials in `y = x - c`.
fn prime_basis(family: Family, p: usize, set: &MonomialSet) -> Vec<VecPoly> {
    let n = set.len();
    let mut out = Vec::new();
    let homogeneous = |d: usize| {
        set.exponents()
            .iter()
            .enumerate()
            .filter(move |(_, e)| e[0] + e[1] + e[2] == d)
            .map(|(i, e)| (i, *e))
    };
    match family {
        Family::Lagrange => {
            for i in 0..n {
                out.push(VecPoly::axis(n, 0, i));
            }
        }
        Family::Nedelec | Family::RaviartThomas => {
            for (i, e) in set.exponents().iter().enumerate() {
                if e[0] + e[1] + e[2] <= p {
                    for axis in 0..3 {
                        out.push(VecPoly::axis(n, axis, i));
                    }
                }
            }
            for (i, e) in homogeneous(p) {
                let mut m = vec![0.0; n];
                m[i] = 1.0;
                if family == Family::RaviartThomas {
                    out.push(VecPoly([
                        set.times_coordinate(&m, 0),
                        set.times_coordinate(&m, 1),
                        set.times_coordinate(&m, 2),
                    ]));
                    continue;
                }
                // y x (e_axis m); for axis 0 monomials containing y1 are
                // skipped since they lie in the kernel of the cross product.
                for axis in 0..3 {
                    if axis == 0 && e[0] > 0 {
                        continue;
                    }
                    let mut v = VecPoly::zeros(n);
                    let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
                    // (y x e_axis)_a = y_b, (y x e_axis)_b = -y_a
                    v.0[a] = set.times_coordinate(&m, b);
                    v.0[b] = set.times_coordinate(&m, a).iter().map(|c| -c).collect();
                    out.push(v);
                }
            }
        }
    }
    out
}

fn build(family: Family, p: usize) -> Result<ReferenceElement> {
    if p > MAX_ELEMENT_DEGREE {
        return Err(Error::UnsupportedDegree(p, MAX_ELEMENT_DEGREE));
    }
    let set_degree = match family {
        Family::Lagrange => p,
        _ => p + 1,
    };
    let set = MonomialSet::new(set_degree);
    let primes = prime_basis(family, p, &set);
    let (functionals, labels) = build_functionals(family, p)?;
    let n = dimension(family, p);
    if primes.len() != n || functionals.len() != n {
        return Err(Error::Dimension(format!(
            "{family:?} degree {p}: {} primes, {} functionals, expected {n}",
            primes.len(),
            functionals.len()
        )));
    }
    // D[i][j] = l_i(prime_j)
    let mut dmat = Mat::<f64>::zeros(n, n);
    for (i, l) in functionals.iter().enumerate() {
        let mono: Vec<Vec<f64>> = l.points.iter().map(|x| set.eval(x)).collect();
        for (j, prime) in primes.iter().enumerate() {
            let mut s = 0.0;
            for (m, w) in mono.iter().zip(&l.weights) {
                let v = prime.eval_with(m);
                s += w[0] * v[0] + w[1] * v[1] + w[2] * v[2];
            }
            dmat[(i, j)] = s;
        }
    }
    let lu = dmat.partial_piv_lu();
    let coeffs = lu.solve(Mat::<f64>::identity(n, n));
    let check = &dmat * &coeffs - Mat::<f64>::identity(n, n);
    let mut duality_residual = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            duality_residual = duality_residual.max(check[(i, j)].abs());
        }
    }
    let mut basis = Vec::with_capacity(n);
    for k in 0..n {
        let mut v = VecPoly::zeros(set.len());
        for (j, prime) in primes.iter().enumerate() {
            let c = coeffs[(j, k)];
            if c != 0.0 {
                v.axpy(c, prime);
            }
        }
        basis.push(v);
    }
    let derived = basis
        .iter()
        .map(|b| match family {
            Family::Lagrange => gradient(&set, &b.0[0]),
            Family::Nedelec => b.curl(&set),
            Family::RaviartThomas => {
                let d = b.div(&set);
                VecPoly([d, vec![0.0; set.len()], vec![0.0; set.len()]])
            }
        })
        .collect();
    Ok(ReferenceElement {
        family,
        degree: p,
        monomials: set,
        basis,
        derived,
        labels,
        functionals,
        per_entity: per_entity(family, p),
        duality_residual,
    })
}

type ElementCache = Mutex<HashMap<(Family, usize), Arc<ReferenceElement>>>;

/// Cached reference element.
pub fn reference(family: Family, degree: usize) -> Result<Arc<ReferenceElement>> {
    static CACHE: OnceLock<ElementCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(el) = cache.lock().expect("element cache poisoned").get(&(family, degree)) {
        return Ok(el.clone());
    }
    let el = Arc::new(build(family, degree)?);
    let mut guard = cache.lock().expect("element cache poisoned");
    Ok(guard.entry((family, degree)).or_insert(el).clone())
}

type TabulationCache = Mutex<HashMap<(Family, usize, usize), Arc<Tabulation>>>;

/// Cached tabulation of a reference element at the points of the
/// tetrahedral rule of the given degree.
pub fn tabulation(family: Family, degree: usize, quad_degree: usize) -> Result<Arc<Tabulation>> {
    static CACHE: OnceLock<TabulationCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (family, degree, quad_degree);
    if let Some(t) = cache.lock().expect("tabulation cache poisoned").get(&key) {
        return Ok(t.clone());
    }
    let el = reference(family, degree)?;
    let rule = quadrature::tetrahedron(quad_degree)?;
    let tab = Arc::new(el.tabulate(&rule.points));
    let mut guard = cache.lock().expect("tabulation cache poisoned");
    Ok(guard.entry(key).or_insert(tab).clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        for p in 0..5 {
            for fam in [Family::Lagrange, Family::Nedelec, Family::RaviartThomas] {
                let el = reference(fam, p).unwrap();
                assert_eq!(el.dim(), dimension(fam, p));
                assert!(el.duality_residual < 1e-10, "{fam:?} {p}: {}", el.duality_residual);
            }
        }
        assert_eq!(dimension(Family::Nedelec, 1), 20);
        assert_eq!(dimension(Family::RaviartThomas, 1), 15);
        assert_eq!(dimension(Family::Lagrange, 1), 4);
    }

    #[test]
    fn lowest_order_nedelec_is_whitney() {
        // phi_e = lambda_a grad lambda_b - lambda_b grad lambda_a
        let el = reference(Family::Nedelec, 0).unwrap();
        let grads = [[-1.0, -1.0, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let x = [0.2, 0.3, 0.1];
        let lam = [1.0 - 0.6, 0.2, 0.3, 0.1];
        let tab = el.tabulate(&[x]);
        for (e, [a, b]) in LOCAL_EDGES.iter().enumerate() {
            let v = tab.value(0, e);
            let c = tab.derived(0, e);
            let g = cross(&grads[*a], &grads[*b]);
            for i in 0..3 {
                let w = lam[*a] * grads[*b][i] - lam[*b] * grads[*a][i];
                assert!((v[i] - w).abs() < 1e-13);
                assert!((c[i] - 2.0 * g[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn interpolation_reproduces_basis() {
        for fam in [Family::Nedelec, Family::RaviartThomas, Family::Lagrange] {
            let el = reference(fam, 3).unwrap();
            for k in [0, el.dim() / 2, el.dim() - 1] {
                let set = &el.monomials;
                let c = el.interpolate(|x| el.basis[k].eval_with(&set.eval(x)));
                for (i, ci) in c.iter().enumerate() {
                    let expect = if i == k { 1.0 } else { 0.0 };
                    assert!((ci - expect).abs() < 1e-10);
                }
            }
        }
    }
}
