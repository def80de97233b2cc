#![allow(dead_code)]

use std::collections::HashMap;

use curlcurl_core::mesh::{BoundaryTag, Mesh};
use curlcurl_core::piola::Point;

/// Mesh from raw cells with every boundary face tagged `tag`.
pub fn mesh_with_tag(vertices: Vec<Point>, tets: Vec<[usize; 4]>, tag: BoundaryTag) -> Mesh {
    let mut count: HashMap<[usize; 3], usize> = HashMap::new();
    for t in &tets {
        for skip in 0..4 {
            let mut f: Vec<usize> = (0..4).filter(|&i| i != skip).map(|i| t[i]).collect();
            f.sort_unstable();
            *count.entry([f[0], f[1], f[2]]).or_default() += 1;
        }
    }
    let mut boundary: Vec<([usize; 3], BoundaryTag)> =
        count.into_iter().filter(|(_, c)| *c == 1).map(|(f, _)| (f, tag)).collect();
    boundary.sort_by_key(|(f, _)| *f);
    Mesh::new(vertices, tets, &boundary).unwrap()
}

pub fn regular_tet(a: f64) -> [Point; 4] {
    let s = a / 2f64.sqrt();
    [
        Point::new(s, 0.0, 0.0),
        Point::new(0.0, s, 0.0),
        Point::new(0.0, 0.0, s),
        Point::new(s, s, s),
    ]
}

/// Two tetrahedra sharing the face `{0, 1, 2}`.
pub fn two_tets() -> Mesh {
    mesh_with_tag(
        vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.1, 0.0),
            Point::new(0.2, 0.9, 0.1),
            Point::new(0.1, 0.2, 1.1),
            Point::new(0.4, 0.3, -0.8),
        ],
        vec![[0, 1, 2, 3], [0, 1, 2, 4]],
        BoundaryTag::Dirichlet,
    )
}
