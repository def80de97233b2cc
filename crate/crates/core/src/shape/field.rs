//! Fields that can be evaluated cell by cell: analytic functions and
//! finite element functions.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::Vector3;

use super::element::{Family, ReferenceElement, Tabulation};
use super::poly::VecPoly;
use super::space::DofSpace;
use crate::mesh::Mesh;
use crate::piola::{AffineMap, Point};

pub type VectorFn = Arc<dyn Fn(&Point) -> Vector3<f64> + Send + Sync>;

/// A vector field that is smooth inside every cell of (part of) a mesh.
pub trait PiecewiseField: Sync {
    /// Values on cell `tet` at physical points inside it.
    fn eval(&self, mesh: &Mesh, tet: usize, points: &[Point]) -> Vec<Vector3<f64>>;
}

/// A globally defined analytic field.
#[derive(Clone)]
pub struct Analytic(pub VectorFn);

impl Analytic {
    pub fn new(f: impl Fn(&Point) -> Vector3<f64> + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }

    pub fn zero() -> Self {
        Self::new(|_| Vector3::zeros())
    }
}

impl PiecewiseField for Analytic {
    fn eval(&self, _mesh: &Mesh, _tet: usize, points: &[Point]) -> Vec<Vector3<f64>> {
        points.iter().map(|x| (self.0)(x)).collect()
    }
}

/// Map reference values to physical ones.
pub fn push_value(family: Family, map: &AffineMap, v: [f64; 3]) -> Vector3<f64> {
    let v = Vector3::from(v);
    match family {
        Family::Lagrange => v,
        Family::Nedelec => map.covariant(&v),
        Family::RaviartThomas => map.contravariant(&v),
    }
}

/// Map reference derived quantities (gradient, curl, divergence) to physical
/// ones.
pub fn push_derived(family: Family, map: &AffineMap, d: [f64; 3]) -> Vector3<f64> {
    let d = Vector3::from(d);
    match family {
        Family::Lagrange => map.covariant(&d),
        Family::Nedelec => map.jac * d / map.det,
        Family::RaviartThomas => Vector3::new(d[0] / map.det, 0.0, 0.0),
    }
}

/// Physical basis values and derived quantities on one cell, point-major.
pub fn physical_tabulation(
    family: Family,
    map: &AffineMap,
    tab: &Tabulation,
) -> (Vec<Vector3<f64>>, Vec<Vector3<f64>>) {
    let values = tab.values.iter().map(|v| push_value(family, map, *v)).collect();
    let derived = tab.derived.iter().map(|d| push_derived(family, map, *d)).collect();
    (values, derived)
}

/// Coefficients of a local polynomial written over the element's monomials.
#[derive(Debug, Clone)]
struct CellPoly {
    value: VecPoly,
    derived: VecPoly,
}

/// An elementwise polynomial field: one local coefficient vector per cell in
/// the element's basis. Conforming and broken finite element functions both
/// convert to this form.
#[derive(Debug, Clone)]
pub struct CellwiseField {
    pub element: Arc<ReferenceElement>,
    pub cells: Vec<usize>,
    pub coeffs: Vec<Vec<f64>>,
    position: HashMap<usize, usize>,
    polys: Vec<CellPoly>,
}

impl CellwiseField {
    pub fn new(element: Arc<ReferenceElement>, cells: Vec<usize>, coeffs: Vec<Vec<f64>>) -> Self {
        let n = element.monomials.len();
        let polys = coeffs
            .iter()
            .map(|c| {
                let mut value = VecPoly::zeros(n);
                let mut derived = VecPoly::zeros(n);
                for (k, ck) in c.iter().enumerate() {
                    if *ck != 0.0 {
                        value.axpy(*ck, &element.basis[k]);
                        derived.axpy(*ck, &element.derived[k]);
                    }
                }
                CellPoly { value, derived }
            })
            .collect();
        let position = cells.iter().enumerate().map(|(i, t)| (*t, i)).collect();
        Self { element, cells, coeffs, position, polys }
    }

    pub fn family(&self) -> Family {
        self.element.family
    }

    pub fn degree(&self) -> usize {
        self.element.degree
    }

    pub fn position(&self, t: usize) -> Option<usize> {
        self.position.get(&t).copied()
    }

    fn eval_impl(&self, mesh: &Mesh, tet: usize, points: &[Point], derived: bool) -> Vec<Vector3<f64>> {
        let Some(pos) = self.position(tet) else {
            return vec![Vector3::zeros(); points.len()];
        };
        let map = mesh.map(tet);
        let poly = &self.polys[pos];
        points
            .iter()
            .map(|x| {
                let xr = map.apply_inverse(x);
                let m = self.element.monomials.eval(&[xr[0], xr[1], xr[2]]);
                if derived {
                    push_derived(self.family(), map, poly.derived.eval_with(&m))
                } else {
                    push_value(self.family(), map, poly.value.eval_with(&m))
                }
            })
            .collect()
    }

    /// Curl, divergence (first component) or gradient, by family.
    pub fn derived(&self) -> Derived<'_> {
        Derived(self)
    }

    /// `self + alpha * other`, cell by cell; both must share element and cells.
    pub fn axpy(&self, alpha: f64, other: &CellwiseField) -> CellwiseField {
        assert_eq!(self.cells, other.cells);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + alpha * y).collect())
            .collect();
        CellwiseField::new(self.element.clone(), self.cells.clone(), coeffs)
    }
}

impl PiecewiseField for CellwiseField {
    fn eval(&self, mesh: &Mesh, tet: usize, points: &[Point]) -> Vec<Vector3<f64>> {
        self.eval_impl(mesh, tet, points, false)
    }
}

/// View of the derived quantity of a [`CellwiseField`].
pub struct Derived<'a>(&'a CellwiseField);

impl PiecewiseField for Derived<'_> {
    fn eval(&self, mesh: &Mesh, tet: usize, points: &[Point]) -> Vec<Vector3<f64>> {
        self.0.eval_impl(mesh, tet, points, true)
    }
}

/// Difference of two fields.
pub struct Difference<'a>(pub &'a dyn PiecewiseField, pub &'a dyn PiecewiseField);

impl PiecewiseField for Difference<'_> {
    fn eval(&self, mesh: &Mesh, tet: usize, points: &[Point]) -> Vec<Vector3<f64>> {
        let a = self.0.eval(mesh, tet, points);
        let b = self.1.eval(mesh, tet, points);
        a.iter().zip(&b).map(|(x, y)| x - y).collect()
    }
}

/// Coefficient vector over a [`DofSpace`].
#[derive(Debug, Clone)]
pub struct DiscreteField {
    pub space: Arc<DofSpace>,
    pub coeffs: Vec<f64>,
}

impl DiscreteField {
    pub fn new(space: Arc<DofSpace>, coeffs: Vec<f64>) -> Self {
        assert_eq!(space.ndofs(), coeffs.len(), "coefficient length must match the space");
        Self { space, coeffs }
    }

    pub fn zero(space: Arc<DofSpace>) -> Self {
        let n = space.ndofs();
        Self::new(space, vec![0.0; n])
    }

    pub fn cellwise(&self) -> CellwiseField {
        let cells = self.space.support().to_vec();
        let coeffs = (0..cells.len()).map(|p| self.space.gather(&self.coeffs, p)).collect();
        CellwiseField::new(self.space.element().clone(), cells, coeffs)
    }
}

/// Physical quadrature points and weights of cell `t`.
pub fn cell_quadrature(mesh: &Mesh, t: usize, degree: usize) -> crate::Result<(Vec<Point>, Vec<f64>)> {
    let rule = super::quadrature::tetrahedron(degree)?;
    let map = mesh.map(t);
    let jac = map.det.abs();
    let points = rule.points.iter().map(|x| map.apply(&Point::from(*x))).collect();
    let weights = rule.weights.iter().map(|w| w * jac).collect();
    Ok((points, weights))
}

/// `sum_K ||f||_K^2` over the given cells.
pub fn l2_norm_squared(
    mesh: &Mesh,
    cells: &[usize],
    field: &dyn PiecewiseField,
    degree: usize,
) -> crate::Result<Vec<f64>> {
    cells
        .iter()
        .map(|&t| {
            let (x, w) = cell_quadrature(mesh, t, degree)?;
            let v = field.eval(mesh, t, &x);
            Ok(v.iter().zip(&w).map(|(v, w)| w * v.norm_squared()).sum())
        })
        .collect()
}

/// Interpolate a field on cell `t` into the local element basis.
pub fn interpolate_cell(
    element: &ReferenceElement,
    mesh: &Mesh,
    t: usize,
    field: &dyn PiecewiseField,
) -> Vec<f64> {
    let map = mesh.map(t);
    element
        .functionals
        .iter()
        .map(|l| {
            let pts: Vec<Point> = l.points.iter().map(|x| map.apply(&Point::from(*x))).collect();
            let vals = field.eval(mesh, t, &pts);
            vals.iter()
                .zip(&l.weights)
                .map(|(v, w)| {
                    let r = match element.family {
                        Family::Lagrange => *v,
                        Family::Nedelec => map.covariant_pullback(v),
                        Family::RaviartThomas => map.contravariant_pullback(v),
                    };
                    w[0] * r[0] + w[1] * r[1] + w[2] * r[2]
                })
                .sum()
        })
        .collect()
}

/// Elementwise interpolant of a field on the given cells.
pub fn interpolate(
    element: Arc<ReferenceElement>,
    mesh: &Mesh,
    cells: &[usize],
    field: &dyn PiecewiseField,
) -> CellwiseField {
    let coeffs = cells.iter().map(|&t| interpolate_cell(&element, mesh, t, field)).collect();
    CellwiseField::new(element, cells.to_vec(), coeffs)
}
