//! Affine maps between tetrahedra and the Piola transforms attached to them.
//!
//! The covariant transform `v -> J^{-T} (v o T^{-1})` preserves tangential
//! traces and maps Nédélec spaces onto themselves; the contravariant transform
//! `v -> det(J)^{-1} J (v o T^{-1})` does the same for normal traces and
//! Raviart–Thomas spaces. Both commute with the curl.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

pub type Point = Vector3<f64>;

/// `x -> J x + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub jac: Matrix3<f64>,
    pub offset: Vector3<f64>,
    pub det: f64,
    pub jac_inv: Matrix3<f64>,
}

impl AffineMap {
    pub fn new(jac: Matrix3<f64>, offset: Vector3<f64>) -> Result<Self> {
        let det = jac.determinant();
        let scale = jac.norm().powi(3).max(f64::MIN_POSITIVE);
        let jac_inv = jac
            .try_inverse()
            .filter(|_| det.abs() > 1e-14 * scale)
            .ok_or_else(|| Error::Singular(format!("affine map with det J = {det:e}")))?;
        Ok(Self { jac, offset, det, jac_inv })
    }

    pub fn identity() -> Self {
        Self {
            jac: Matrix3::identity(),
            offset: Vector3::zeros(),
            det: 1.0,
            jac_inv: Matrix3::identity(),
        }
    }

    /// Map from the reference tetrahedron onto `conv(v0, v1, v2, v3)` with
    /// reference vertex `i` sent to `v_i`.
    pub fn from_reference(v: &[Point; 4]) -> Result<Self> {
        let jac = Matrix3::from_columns(&[v[1] - v[0], v[2] - v[0], v[3] - v[0]]);
        Self::new(jac, v[0])
    }

    /// The unique affine map with `src[i] -> dst[i]`.
    pub fn between(src: &[Point; 4], dst: &[Point; 4]) -> Result<Self> {
        let a = Self::from_reference(src)?;
        let b = Self::from_reference(dst)?;
        Ok(b.compose(&a.inverse()))
    }

    /// Orientation sign of the map.
    pub fn sign(&self) -> f64 {
        self.det.signum()
    }

    pub fn apply(&self, x: &Point) -> Point {
        self.jac * x + self.offset
    }

    pub fn apply_inverse(&self, y: &Point) -> Point {
        self.jac_inv * (y - self.offset)
    }

    pub fn inverse(&self) -> Self {
        Self {
            jac: self.jac_inv,
            offset: -(self.jac_inv * self.offset),
            det: 1.0 / self.det,
            jac_inv: self.jac,
        }
    }

    /// `self o other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            jac: self.jac * other.jac,
            offset: self.jac * other.offset + self.offset,
            det: self.det * other.det,
            jac_inv: other.jac_inv * self.jac_inv,
        }
    }

    /// Covariant transform of a value taken at the preimage point.
    pub fn covariant(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.jac_inv.transpose() * v
    }

    /// Contravariant transform of a value taken at the preimage point.
    pub fn contravariant(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.jac * v / self.det
    }

    /// Inverse of [`AffineMap::covariant`].
    pub fn covariant_pullback(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.jac.transpose() * v
    }

    /// Inverse of [`AffineMap::contravariant`].
    pub fn contravariant_pullback(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.det * (self.jac_inv * v)
    }
}

/// Covariant Piola transport of a field defined on the source tetrahedron:
/// returns the transported field as a function on the target.
pub fn covariant_piola<'a>(
    map: &'a AffineMap,
    field: impl Fn(&Point) -> Vector3<f64> + 'a,
) -> impl Fn(&Point) -> Vector3<f64> + 'a {
    move |y| map.covariant(&field(&map.apply_inverse(y)))
}

/// Contravariant Piola transport of a field defined on the source tetrahedron.
pub fn contravariant_piola<'a>(
    map: &'a AffineMap,
    field: impl Fn(&Point) -> Vector3<f64> + 'a,
) -> impl Fn(&Point) -> Vector3<f64> + 'a {
    move |y| map.contravariant(&field(&map.apply_inverse(y)))
}

/// The affine map sending `from` onto `to` that fixes their shared face
/// pointwise and exchanges the opposite vertices. Such a map always reverses
/// orientation.
pub fn reflection_map(from: &[Point; 4], to: &[Point; 4]) -> Result<AffineMap> {
    let shared: Vec<usize> = (0..4)
        .filter(|&i| to.iter().any(|w| (w - from[i]).norm() <= 1e-14 * (1.0 + w.norm())))
        .collect();
    if shared.len() != 3 {
        return Err(Error::Config("tetrahedra do not share a face".into()));
    }
    let apex_from = (0..4).find(|i| !shared.contains(i)).unwrap();
    let apex_to = (0..4)
        .find(|&i| shared.iter().all(|&s| (to[i] - from[s]).norm() > 1e-14 * (1.0 + to[i].norm())))
        .unwrap();
    let src = [from[shared[0]], from[shared[1]], from[shared[2]], from[apex_from]];
    let dst = [from[shared[0]], from[shared[1]], from[shared[2]], to[apex_to]];
    AffineMap::between(&src, &dst)
}
