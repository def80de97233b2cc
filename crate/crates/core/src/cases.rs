//! Built-in meshes and manufactured solutions.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Vector3;

use crate::mesh::{BoundaryTag, Mesh};
use crate::piola::Point;
use crate::shape::VectorFn;

/// The six Kuhn tetrahedra of the unit cube, as axis permutations: vertex
/// `k + 1` is vertex `k` shifted along axis `perm[k]`.
const KUHN: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Kuhn tetrahedra filling the given grid cells (integer corner coordinates
/// scaled by `step` and shifted by `origin`), with boundary faces tagged by
/// `tag(face vertex coordinates)`.
fn kuhn_mesh(
    cells: &[[i64; 3]],
    step: f64,
    origin: [f64; 3],
    tag: impl Fn(&[Point; 3]) -> BoundaryTag,
) -> Mesh {
    let mut index: HashMap<[i64; 3], usize> = HashMap::new();
    let mut keys: Vec<[i64; 3]> = Vec::new();
    // lexicographic vertex numbering (x fastest)
    for c in cells {
        for dz in 0..2 {
            for dy in 0..2 {
                for dx in 0..2 {
                    let k = [c[0] + dx, c[1] + dy, c[2] + dz];
                    if !index.contains_key(&k) {
                        index.insert(k, 0);
                        keys.push(k);
                    }
                }
            }
        }
    }
    keys.sort_by_key(|k| (k[2], k[1], k[0]));
    for (i, k) in keys.iter().enumerate() {
        index.insert(*k, i);
    }
    let vertices: Vec<Point> = keys
        .iter()
        .map(|k| {
            Point::new(
                origin[0] + step * k[0] as f64,
                origin[1] + step * k[1] as f64,
                origin[2] + step * k[2] as f64,
            )
        })
        .collect();
    let mut tets = Vec::with_capacity(6 * cells.len());
    for c in cells {
        for perm in KUHN {
            let mut k = *c;
            let mut tet = [index[&k]; 4];
            for (i, axis) in perm.iter().enumerate() {
                k[*axis] += 1;
                tet[i + 1] = index[&k];
            }
            tets.push(tet);
        }
    }
    let mut count: HashMap<[usize; 3], usize> = HashMap::new();
    for t in &tets {
        for f in crate::shape::element::LOCAL_FACES {
            let mut tri = [t[f[0]], t[f[1]], t[f[2]]];
            tri.sort_unstable();
            *count.entry(tri).or_default() += 1;
        }
    }
    let mut tags: Vec<([usize; 3], BoundaryTag)> = count
        .into_iter()
        .filter(|(_, c)| *c == 1)
        .map(|(tri, _)| (tri, tag(&tri.map(|v| vertices[v]))))
        .collect();
    tags.sort_unstable_by_key(|(tri, _)| *tri);
    Mesh::new(vertices, tets, &tags).expect("generated Kuhn mesh is valid")
}

/// Which face of the unit cube a boundary triangle lies on: `(axis, side)`.
pub fn cube_face(x: &[Point; 3]) -> Option<(usize, usize)> {
    for axis in 0..3 {
        for (side, value) in [(0, 0.0), (1, 1.0)] {
            if x.iter().all(|p| (p[axis] - value).abs() < 1e-12) {
                return Some((axis, side));
            }
        }
    }
    None
}

/// Unit cube split into `n^3` subcubes of six Kuhn tetrahedra each, with the
/// same tag on the whole boundary. Mesh size `h = sqrt(3) / n`.
pub fn unit_cube(n: usize, tag: BoundaryTag) -> Mesh {
    unit_cube_tagged(n, |_, _| tag)
}

/// Unit cube with boundary tags chosen per cube face `(axis, side)`.
pub fn unit_cube_tagged(n: usize, tag: impl Fn(usize, usize) -> BoundaryTag) -> Mesh {
    assert!(n >= 1, "at least one subdivision");
    let n = n as i64;
    let mut cells = Vec::new();
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                cells.push([i, j, k]);
            }
        }
    }
    kuhn_mesh(&cells, 1.0 / n as f64, [0.0; 3], |x| {
        let (axis, side) = cube_face(x).expect("boundary face on a cube face");
        tag(axis, side)
    })
}

/// The L-shaped prism `([-1,1]^2 minus (0,1]x[-1,0)) x (0,1)` with Dirichlet
/// boundary, starting from 24 cubes of side 1/2 and refined `levels` times.
pub fn lshape(levels: usize) -> Mesh {
    let mut cells = Vec::new();
    for k in 0..2 {
        for j in 0..4 {
            for i in 0..4 {
                // cell [i/2 - 1, (i+1)/2 - 1] x [j/2 - 1, ...]; drop x > 0, y < 0
                if i >= 2 && j < 2 {
                    continue;
                }
                cells.push([i, j, k]);
            }
        }
    }
    let mut mesh = kuhn_mesh(&cells, 0.5, [-1.0, -1.0, 0.0], |_| BoundaryTag::Dirichlet);
    for _ in 0..levels {
        mesh = mesh.uniform_refine();
    }
    mesh
}

/// A manufactured solution: potential, its curl and the source
/// `j = curl curl A`.
#[derive(Clone)]
pub struct Solution {
    pub potential: VectorFn,
    pub curl: VectorFn,
    pub source: VectorFn,
}

/// Smooth solution on the unit cube with `Gamma_N` the whole boundary.
pub fn cube_smooth() -> Solution {
    let a = |x: &Point| {
        let (sx, cx) = (PI * x[0]).sin_cos();
        let (sy, cy) = (PI * x[1]).sin_cos();
        let cz = (PI * x[2]).cos();
        Vector3::new(sx * cy * cz, -cx * sy * cz, 0.0)
    };
    Solution {
        potential: Arc::new(a),
        curl: Arc::new(|x: &Point| {
            let (sx, cx) = (PI * x[0]).sin_cos();
            let (sy, cy) = (PI * x[1]).sin_cos();
            let (sz, cz) = (PI * x[2]).sin_cos();
            Vector3::new(-PI * cx * sy * sz, -PI * sx * cy * sz, 2.0 * PI * sx * sy * cz)
        }),
        source: Arc::new(move |x: &Point| a(x) * (3.0 * PI * PI)),
    }
}

/// Quintic cutoff: 1 for `r <= 1/4`, 0 for `r >= 3/4`, C^2 in between.
/// Returns `(chi, chi', chi'')`.
pub fn cutoff(r: f64) -> (f64, f64, f64) {
    if r <= 0.25 {
        return (1.0, 0.0, 0.0);
    }
    if r >= 0.75 {
        return (0.0, 0.0, 0.0);
    }
    let t = (r - 0.25) / 0.5;
    let s = 10.0 * t.powi(3) - 15.0 * t.powi(4) + 6.0 * t.powi(5);
    let ds = 30.0 * t * t - 60.0 * t.powi(3) + 30.0 * t.powi(4);
    let dds = 60.0 * t - 180.0 * t * t + 120.0 * t.powi(3);
    (1.0 - s, -ds / 0.5, -dds / 0.25)
}

/// Angle in `[0, 2 pi)` measured from the positive x axis; the L-shape
/// occupies `[0, 3 pi / 2]`.
fn angle(x: f64, y: f64) -> f64 {
    let t = y.atan2(x);
    if t < 0.0 {
        t + 2.0 * PI
    } else {
        t
    }
}

/// Edge-singular solution `A = (0, 0, chi(r) r^alpha sin(alpha theta))` on
/// the L-shape. `alpha = 2/3` makes `A` vanish on both faces adjacent to the
/// reentrant edge.
pub fn lshape_singular(alpha: f64) -> Solution {
    Solution {
        potential: Arc::new(move |x: &Point| {
            let r = x[0].hypot(x[1]);
            let th = angle(x[0], x[1]);
            Vector3::new(0.0, 0.0, cutoff(r).0 * r.powf(alpha) * (alpha * th).sin())
        }),
        curl: Arc::new(move |x: &Point| {
            // curl (0,0,u) = (u_y, -u_x, 0)
            let r = x[0].hypot(x[1]);
            if r == 0.0 {
                return Vector3::zeros();
            }
            let th = angle(x[0], x[1]);
            let (c, dc, _) = cutoff(r);
            let (s, co) = (alpha * th).sin_cos();
            let ur = dc * r.powf(alpha) * s + c * alpha * r.powf(alpha - 1.0) * s;
            let ut = c * r.powf(alpha) * alpha * co; // d/dtheta
            let (st, ct) = th.sin_cos();
            let ux = ur * ct - ut * st / r;
            let uy = ur * st + ut * ct / r;
            Vector3::new(uy, -ux, 0.0)
        }),
        source: Arc::new(move |x: &Point| {
            // j = -Laplace(A); the singular part is harmonic
            let r = x[0].hypot(x[1]);
            if r <= 0.25 || r >= 0.75 {
                return Vector3::zeros();
            }
            let th = angle(x[0], x[1]);
            let (_, dc, ddc) = cutoff(r);
            let s = (alpha * th).sin();
            let j3 = -(2.0 * dc * alpha * r.powf(alpha - 1.0) * s
                + r.powf(alpha) * s * (ddc + dc / r));
            Vector3::new(0.0, 0.0, j3)
        }),
    }
}

/// Polynomial solution `A = (0, x(1-x), 0)` on the unit cube with Dirichlet
/// faces `x = 0, 1`, `y = 0, 1` and Neumann faces `z = 0, 1`.
pub fn polynomial_mixed() -> (impl Fn(usize, usize) -> BoundaryTag, Solution) {
    let tags = |axis: usize, _side: usize| {
        if axis == 2 {
            BoundaryTag::Neumann
        } else {
            BoundaryTag::Dirichlet
        }
    };
    let sol = Solution {
        potential: Arc::new(|x: &Point| Vector3::new(0.0, x[0] * (1.0 - x[0]), 0.0)),
        curl: Arc::new(|x: &Point| Vector3::new(0.0, 0.0, 1.0 - 2.0 * x[0])),
        source: Arc::new(|_: &Point| Vector3::new(0.0, 2.0, 0.0)),
    };
    (tags, sol)
}

/// Quartic solution vanishing tangentially on the whole unit cube boundary.
pub fn polynomial_dirichlet() -> Solution {
    let b = |s: f64| s * (1.0 - s);
    let db = |s: f64| 1.0 - 2.0 * s;
    Solution {
        potential: Arc::new(move |x: &Point| {
            Vector3::new(b(x[1]) * b(x[2]), b(x[0]) * b(x[2]), b(x[0]) * b(x[1]))
        }),
        curl: Arc::new(move |x: &Point| {
            let (bx, by, bz) = (b(x[0]), b(x[1]), b(x[2]));
            let (dx, dy, dz) = (db(x[0]), db(x[1]), db(x[2]));
            // (d_y A3 - d_z A2, d_z A1 - d_x A3, d_x A2 - d_y A1)
            Vector3::new(bx * dy - bx * dz, by * dz - dx * by, dx * bz - dy * bz)
        }),
        source: Arc::new(move |x: &Point| {
            let (bx, by, bz) = (b(x[0]), b(x[1]), b(x[2]));
            Vector3::new(2.0 * (by + bz), 2.0 * (bx + bz), 2.0 * (bx + by))
        }),
    }
}
