//! Geometry of the Grassmann manifold `G(p, d)`.
//!
//! A point is stored as a `d x p` matrix with orthonormal columns; any right
//! rotation `X Q` with `Q` orthogonal represents the same subspace. Tangent
//! vectors are stored as horizontal lifts `H` with `X^T H = 0`.

use crate::error::{Error, Result};
use crate::numerics::{ensure_finite, singular_values, small_inverse, thin_svd, Matrix};

/// Accepted deviation of `X^T X` from the identity.
pub const ORTHONORMALITY_TOL: f64 = 1e-10;

/// Accepted magnitude of `X^T H` for a tangent vector.
pub const HORIZONTALITY_TOL: f64 = 1e-8;

/// Smallest singular value of `X^T Y` for which the log map is defined.
pub const CUT_LOCUS_TOL: f64 = 1e-10;

/// Relative cut-off for the p-th singular value in [`GrassmannPoint::from_basis`].
pub const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannPoint {
    x: Matrix,
}

impl GrassmannPoint {
    /// Wrap a matrix that already has orthonormal columns.
    pub fn new(x: Matrix) -> Result<Self> {
        ensure_finite(&x, "GrassmannPoint")?;
        if x.ncols() > x.nrows() {
            return Err(Error::invalid(format!(
                "GrassmannPoint: p = {} exceeds d = {}",
                x.ncols(),
                x.nrows()
            )));
        }
        let gram = x.transpose() * &x;
        let err = (gram - Matrix::identity(x.ncols(), x.ncols())).amax();
        if err > ORTHONORMALITY_TOL {
            return Err(Error::invalid(format!(
                "GrassmannPoint: columns not orthonormal (max |X^T X - I| = {err:e})"
            )));
        }
        Ok(Self { x })
    }

    /// The subspace spanned by the leading `p` left singular vectors of `a`.
    pub fn from_basis(a: &Matrix, p: usize) -> Result<Self> {
        ensure_finite(a, "from_basis")?;
        if p == 0 || p > a.nrows().min(a.ncols()) {
            return Err(Error::invalid(format!(
                "from_basis: need 1 <= p <= min(d, cols) = {}, got p = {p}",
                a.nrows().min(a.ncols())
            )));
        }
        let svd = thin_svd(a)?;
        let largest = svd.s[0];
        let value = svd.s[p - 1];
        if largest == 0.0 || value < RANK_TOL * largest {
            return Err(Error::RankDeficient {
                index: p,
                value,
                largest,
            });
        }
        Ok(Self {
            x: svd.u.columns(0, p).into_owned(),
        })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.x
    }

    pub fn into_matrix(self) -> Matrix {
        self.x
    }

    pub fn ambient_dim(&self) -> usize {
        self.x.nrows()
    }

    pub fn subspace_dim(&self) -> usize {
        self.x.ncols()
    }

    /// Orthogonal projector `X X^T`, independent of the representative.
    pub fn projector(&self) -> Matrix {
        &self.x * self.x.transpose()
    }

    fn check_compatible(&self, other: &Self, what: &str) -> Result<()> {
        if self.x.shape() != other.x.shape() {
            return Err(Error::invalid(format!(
                "{what}: dimension mismatch {:?} vs {:?}",
                self.x.shape(),
                other.x.shape()
            )));
        }
        Ok(())
    }
}

/// Horizontal lift of a tangent vector at `base`.
#[derive(Debug, Clone)]
pub struct TangentVector<'a> {
    base: &'a GrassmannPoint,
    h: Matrix,
}

impl<'a> TangentVector<'a> {
    pub fn new(base: &'a GrassmannPoint, h: Matrix) -> Result<Self> {
        ensure_finite(&h, "TangentVector")?;
        if h.shape() != base.x.shape() {
            return Err(Error::invalid(format!(
                "TangentVector: shape {:?} does not match base {:?}",
                h.shape(),
                base.x.shape()
            )));
        }
        let err = (base.x.transpose() * &h).amax();
        if err > HORIZONTALITY_TOL * h.amax().max(1.0) {
            return Err(Error::invalid(format!(
                "TangentVector: not horizontal (max |X^T H| = {err:e})"
            )));
        }
        Ok(Self { base, h })
    }

    pub fn zero(base: &'a GrassmannPoint) -> Self {
        Self {
            base,
            h: Matrix::zeros(base.x.nrows(), base.x.ncols()),
        }
    }

    /// Project an arbitrary `d x p` matrix onto the tangent space at `base`.
    pub fn project(base: &'a GrassmannPoint, g: &Matrix) -> Result<Self> {
        ensure_finite(g, "TangentVector::project")?;
        if g.shape() != base.x.shape() {
            return Err(Error::invalid("TangentVector::project: shape mismatch"));
        }
        let h = g - &base.x * (base.x.transpose() * g);
        Ok(Self { base, h })
    }

    pub fn base(&self) -> &'a GrassmannPoint {
        self.base
    }

    pub fn matrix(&self) -> &Matrix {
        &self.h
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            base: self.base,
            h: &self.h * t,
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.h.norm_squared()
    }
}

/// Canonical inner product `trace(H1^T H2)` on the tangent space.
pub fn tangent_inner(h1: &TangentVector<'_>, h2: &TangentVector<'_>) -> Result<f64> {
    let same_base = std::ptr::eq(h1.base, h2.base) || h1.base == h2.base;
    if !same_base {
        return Err(Error::invalid("tangent_inner: vectors live at different base points"));
    }
    if h1.h.shape() != h2.h.shape() {
        return Err(Error::invalid("tangent_inner: shape mismatch"));
    }
    Ok(h1.h.dot(&h2.h))
}

/// Cosines of the principal angles: singular values of `X^T Y`, clamped to `[0, 1]`.
pub fn principal_cosines(x: &GrassmannPoint, y: &GrassmannPoint) -> Result<Vec<f64>> {
    x.check_compatible(y, "principal_cosines")?;
    let m = x.x.transpose() * &y.x;
    Ok(singular_values(&m)?.iter().map(|s| s.clamp(0.0, 1.0)).collect())
}

/// Principal angles between `x` and `y`, ascending. Angles below `pi/4` come
/// from the sines (singular values of `Y - X X^T Y`), the rest from the
/// cosines, so that nearly equal subspaces get accurate small angles.
pub fn principal_angles(x: &GrassmannPoint, y: &GrassmannPoint) -> Result<Vec<f64>> {
    let cosines = principal_cosines(x, y)?;
    let normal = &y.x - &x.x * (x.x.transpose() * &y.x);
    let sines = singular_values(&normal)?;
    let p = cosines.len();
    Ok(cosines
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let s = sines[p - 1 - i].clamp(0.0, 1.0);
            if c * c >= 0.5 {
                s.asin()
            } else {
                c.acos()
            }
        })
        .collect())
}

/// Squared geodesic distance: the sum of squared principal angles.
pub fn geodesic_distance_sq(x: &GrassmannPoint, y: &GrassmannPoint) -> Result<f64> {
    Ok(principal_angles(x, y)?.into_iter().map(|t| t * t).sum())
}

/// Log map: the tangent vector at `x` whose geodesic reaches `y` at unit time.
///
/// Computes the thin SVD `U S V^T` of `(Y - X X^T Y)(X^T Y)^{-1}` and returns
/// `U atan(S) V^T`.
pub fn log_map<'a>(x: &'a GrassmannPoint, y: &GrassmannPoint) -> Result<TangentVector<'a>> {
    x.check_compatible(y, "log_map")?;
    let xty = x.x.transpose() * &y.x;
    let min_singular = singular_values(&xty)?.min();
    if min_singular < CUT_LOCUS_TOL {
        return Err(Error::CutLocus { min_singular });
    }
    let normal = &y.x - &x.x * &xty;
    let inv = small_inverse(&xty).map_err(|_| Error::CutLocus { min_singular })?;
    let svd = thin_svd(&(normal * inv))?;

    let mut u = svd.u;
    for (j, mut col) in u.column_iter_mut().enumerate() {
        col *= svd.s[j].atan();
    }
    let h = u * svd.v.transpose();
    Ok(TangentVector { base: x, h })
}

/// Exp map with the rotation choice `Q = V`: `X V cos(S) V^T + U sin(S) V^T`
/// for `H = U S V^T`, re-orthonormalized.
pub fn exp_map(x: &GrassmannPoint, h: &TangentVector<'_>) -> Result<GrassmannPoint> {
    if h.h.shape() != x.x.shape() {
        return Err(Error::invalid("exp_map: tangent shape does not match base"));
    }
    if !(std::ptr::eq(h.base, x) || h.base == x) {
        return Err(Error::invalid("exp_map: tangent vector belongs to another base point"));
    }
    let svd = thin_svd(&h.h)?;
    let p = x.subspace_dim();
    let mut xv = &x.x * &svd.v;
    let mut u = svd.u;
    for j in 0..p {
        let (sin, cos) = svd.s[j].sin_cos();
        xv.column_mut(j).scale_mut(cos);
        u.column_mut(j).scale_mut(sin);
    }
    let y = (xv + u) * svd.v.transpose();
    GrassmannPoint::from_basis(&y, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    fn line(x: f64, y: f64) -> GrassmannPoint {
        let n = (x * x + y * y).sqrt();
        GrassmannPoint::new(Matrix::from_column_slice(2, 1, &[x / n, y / n])).unwrap()
    }

    fn random_point(d: usize, p: usize, rng: &mut ChaCha8Rng) -> GrassmannPoint {
        let a = Matrix::from_fn(d, p, |_, _| StandardNormal.sample(rng));
        GrassmannPoint::from_basis(&a, p).unwrap()
    }

    #[test]
    fn from_basis_unit_column() {
        let v = Matrix::from_column_slice(3, 1, &[0.6, 0.0, -0.8]);
        let x = GrassmannPoint::from_basis(&v, 1).unwrap();
        assert!((x.matrix().abs() - v.abs()).amax() < 1e-15);
    }

    #[test]
    fn from_basis_scaled_axes() {
        let mut a = Matrix::zeros(4, 2);
        a[(0, 0)] = 5.0;
        a[(1, 1)] = 3.0;
        let x = GrassmannPoint::from_basis(&a, 2).unwrap();
        let mut expected = Matrix::zeros(4, 4);
        expected[(0, 0)] = 1.0;
        expected[(1, 1)] = 1.0;
        assert!((x.projector() - expected).amax() < 1e-14);
    }

    #[test]
    fn from_basis_top_singular_subspace() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = Matrix::from_fn(50, 12, |_, _| StandardNormal.sample(&mut rng));
        let x = GrassmannPoint::from_basis(&a, 4).unwrap();
        let gram = x.matrix().transpose() * x.matrix();
        assert!((gram - Matrix::identity(4, 4)).amax() <= 1e-10);
        let svd = thin_svd(&a).unwrap();
        let u4 = svd.u.columns(0, 4);
        let oracle = &u4 * &u4.transpose();
        assert!((x.projector() - oracle).amax() < 1e-10);
    }

    #[test]
    fn from_basis_rank_deficient() {
        let a = Matrix::from_column_slice(3, 2, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert!(matches!(
            GrassmannPoint::from_basis(&a, 2),
            Err(Error::RankDeficient { index: 2, .. })
        ));
        assert!(matches!(
            GrassmannPoint::from_basis(&Matrix::zeros(3, 1), 1),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn new_rejects_non_orthonormal() {
        let a = Matrix::from_column_slice(2, 1, &[1.0, 1.0]);
        assert!(GrassmannPoint::new(a).is_err());
    }

    #[test]
    fn inner_product_cases() {
        let x = line(1.0, 0.0);
        let h = TangentVector::new(&x, Matrix::from_column_slice(2, 1, &[0.0, FRAC_PI_4])).unwrap();
        assert_eq!(tangent_inner(&h, &TangentVector::zero(&x)).unwrap(), 0.0);
        let hh = tangent_inner(&h, &h).unwrap();
        assert!((hh - FRAC_PI_4 * FRAC_PI_4).abs() < 1e-15);
        assert!((hh - 0.61685).abs() < 1e-5);
    }

    #[test]
    fn inner_product_random_matches_flat_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let x = random_point(10, 3, &mut rng);
        let g1 = Matrix::from_fn(10, 3, |_, _| StandardNormal.sample(&mut rng));
        let g2 = Matrix::from_fn(10, 3, |_, _| StandardNormal.sample(&mut rng));
        let h1 = TangentVector::project(&x, &g1).unwrap();
        let h2 = TangentVector::project(&x, &g2).unwrap();
        let mut flat = 0.0;
        for i in 0..10 {
            for j in 0..3 {
                flat += h1.matrix()[(i, j)] * h2.matrix()[(i, j)];
            }
        }
        let ip = tangent_inner(&h1, &h2).unwrap();
        assert!((ip - flat).abs() < 1e-12);
        assert!((ip - tangent_inner(&h2, &h1).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn inner_product_rejects_different_bases() {
        let x = line(1.0, 0.0);
        let y = line(0.0, 1.0);
        assert!(tangent_inner(&TangentVector::zero(&x), &TangentVector::zero(&y)).is_err());
    }

    #[test]
    fn tangent_rejects_vertical() {
        let x = line(1.0, 0.0);
        assert!(TangentVector::new(&x, Matrix::from_column_slice(2, 1, &[1.0, 0.0])).is_err());
    }

    #[test]
    fn analytic_distances() {
        let e1 = line(1.0, 0.0);
        let e2 = line(0.0, 1.0);
        let diag = line(1.0, 1.0);
        assert_eq!(geodesic_distance_sq(&e1, &e1).unwrap(), 0.0);
        assert!((geodesic_distance_sq(&e1, &e2).unwrap() - FRAC_PI_2 * FRAC_PI_2).abs() < 1e-12);
        assert!((geodesic_distance_sq(&e1, &diag).unwrap() - FRAC_PI_4 * FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn distance_dimension_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_point(5, 2, &mut rng);
        let b = random_point(5, 3, &mut rng);
        assert!(matches!(geodesic_distance_sq(&a, &b), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn log_of_self_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_point(8, 3, &mut rng);
        let h = log_map(&x, &x).unwrap();
        assert!(h.matrix().amax() < 1e-12);
    }

    #[test]
    fn log_analytic_g12() {
        let e1 = line(1.0, 0.0);
        let diag = line(1.0, 1.0);
        let h = log_map(&e1, &diag).unwrap();
        assert!(h.matrix()[(0, 0)].abs() < 1e-12);
        assert!((h.matrix()[(1, 0)] - FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn log_at_cut_locus() {
        let e1 = line(1.0, 0.0);
        let e2 = line(0.0, 1.0);
        assert!(matches!(log_map(&e1, &e2), Err(Error::CutLocus { .. })));
    }

    #[test]
    fn exp_analytic_g12() {
        let e1 = line(1.0, 0.0);
        let h = TangentVector::new(&e1, Matrix::from_column_slice(2, 1, &[0.0, FRAC_PI_4])).unwrap();
        let y = exp_map(&e1, &h).unwrap();
        let v = y.matrix();
        assert!((v[(0, 0)].abs() - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((v[(1, 0)].abs() - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(geodesic_distance_sq(&y, &line(1.0, 1.0)).unwrap() < 1e-12);
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = random_point(9, 4, &mut rng);
        let y = exp_map(&x, &TangentVector::zero(&x)).unwrap();
        assert!((y.projector() - x.projector()).amax() < 1e-12);
    }

    #[test]
    fn exp_small_step_distance_scales_quadratically() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = random_point(12, 3, &mut rng);
        let g = Matrix::from_fn(12, 3, |_, _| StandardNormal.sample(&mut rng));
        let h = TangentVector::project(&x, &g).unwrap();
        for t in [1e-1, 1e-2, 1e-3] {
            let y = exp_map(&x, &h.scaled(t)).unwrap();
            let d2 = geodesic_distance_sq(&x, &y).unwrap();
            let expected = t * t * h.norm_sq();
            assert!((d2 - expected).abs() <= 1e-6 * expected, "t={t}: {d2} vs {expected}");
        }
    }

    #[test]
    fn log_exp_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..20 {
            let x = random_point(15, 3, &mut rng);
            let y = random_point(15, 3, &mut rng);
            let h = log_map(&x, &y).unwrap();
            assert!((x.matrix().transpose() * h.matrix()).amax() <= 1e-8);
            let d2 = geodesic_distance_sq(&x, &y).unwrap();
            assert!((h.norm_sq() - d2).abs() <= 1e-9);
            let back = exp_map(&x, &h).unwrap();
            assert!(geodesic_distance_sq(&back, &y).unwrap() <= 1e-12);
        }
    }
}
