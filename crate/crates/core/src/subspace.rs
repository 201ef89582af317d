//! Subspaces with orthonormal bases: sums, complements, intersections and reduced subspaces.

use nalgebra::DMatrix;

use crate::linalg::{orth, singular_values};
use crate::tensor::{max_abs, CVec, LinOp, SystemDims, C64};
use crate::{tol, Error, Result};

#[derive(Clone, Debug)]
pub struct Subspace {
    ambient: SystemDims,
    basis: DMatrix<C64>,
    built_tol: f64,
}

impl Subspace {
    pub fn zero(ambient: &SystemDims) -> Self {
        Self {
            ambient: ambient.clone(),
            basis: DMatrix::zeros(ambient.total_dim(), 0),
            built_tol: tol::RANK,
        }
    }

    pub fn full(ambient: &SystemDims) -> Self {
        let d = ambient.total_dim();
        Self {
            ambient: ambient.clone(),
            basis: DMatrix::identity(d, d),
            built_tol: tol::RANK,
        }
    }

    /// Span of the columns of `m` (rows index `ambient`).
    pub fn from_columns(ambient: &SystemDims, m: &DMatrix<C64>, tol: f64) -> Result<Self> {
        if m.nrows() != ambient.total_dim() {
            return Err(Error::Shape(format!(
                "{} rows for ambient space {}",
                m.nrows(),
                ambient
            )));
        }
        Ok(Self {
            ambient: ambient.clone(),
            basis: orth(m, tol),
            built_tol: tol,
        })
    }

    /// Span of vectors that all live on `ambient` (possibly with factors in another order).
    pub fn from_spanning(ambient: &SystemDims, vectors: &[CVec], tol: f64) -> Result<Self> {
        let labels = ambient.labels();
        let mut m = DMatrix::zeros(ambient.total_dim(), vectors.len());
        for (j, v) in vectors.iter().enumerate() {
            if !v.space().same_factors(ambient) {
                return Err(Error::Shape(format!(
                    "vector on {} in a span over {}",
                    v.space(),
                    ambient
                )));
            }
            m.set_column(j, v.permute(&labels)?.data());
        }
        Self::from_columns(ambient, &m, tol)
    }

    pub fn ambient(&self) -> &SystemDims {
        &self.ambient
    }

    pub fn basis(&self) -> &DMatrix<C64> {
        &self.basis
    }

    pub fn built_tol(&self) -> f64 {
        self.built_tol
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn vectors(&self) -> Vec<CVec> {
        (0..self.dim())
            .map(|j| CVec::new(self.ambient.clone(), self.basis.column(j).into_owned()).unwrap())
            .collect()
    }

    pub fn projector(&self) -> DMatrix<C64> {
        &self.basis * self.basis.adjoint()
    }

    /// Basis of `other` expressed in this subspace's factor order.
    fn aligned_basis(&self, other: &Subspace) -> Result<DMatrix<C64>> {
        if other.ambient == self.ambient {
            return Ok(other.basis.clone());
        }
        if !other.ambient.same_factors(&self.ambient) {
            return Err(Error::Shape(format!(
                "subspaces of different spaces {} and {}",
                self.ambient, other.ambient
            )));
        }
        Ok(other.permute(&self.ambient.labels())?.basis)
    }

    pub fn permute<S: AsRef<str>>(&self, order: &[S]) -> Result<Subspace> {
        let vs: Vec<CVec> = self.vectors().iter().map(|v| v.permute(order)).collect::<Result<_>>()?;
        let ambient = self.ambient.select(order)?;
        let mut basis = DMatrix::zeros(ambient.total_dim(), vs.len());
        for (j, v) in vs.iter().enumerate() {
            basis.set_column(j, v.data());
        }
        Ok(Self {
            ambient,
            basis,
            built_tol: self.built_tol,
        })
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        let ob = self.aligned_basis(other)?;
        let mut m = DMatrix::zeros(self.basis.nrows(), self.dim() + ob.ncols());
        m.columns_mut(0, self.dim()).copy_from(&self.basis);
        m.columns_mut(self.dim(), ob.ncols()).copy_from(&ob);
        Self::from_columns(&self.ambient, &m, tol::RANK)
    }

    pub fn complement(&self) -> Subspace {
        let d = self.ambient.total_dim();
        if self.dim() == 0 {
            return Self::full(&self.ambient);
        }
        if self.dim() == d {
            return Self::zero(&self.ambient);
        }
        let q = DMatrix::<C64>::identity(d, d) - self.projector();
        Self {
            ambient: self.ambient.clone(),
            basis: orth(&q, tol::RANK),
            built_tol: tol::RANK,
        }
    }

    /// `complement(complement(s) + complement(t))`.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        Ok(self.complement().sum(&other.complement())?.complement())
    }

    pub fn orthogonality_residual(&self, other: &Subspace) -> Result<f64> {
        let ob = self.aligned_basis(other)?;
        Ok(max_abs(&(self.basis.adjoint() * ob)))
    }

    pub fn is_orthogonal(&self, other: &Subspace, tol: f64) -> Result<bool> {
        Ok(self.orthogonality_residual(other)? <= tol)
    }

    /// `‖(I − P_other) basis_self‖_max`.
    pub fn subset_residual(&self, other: &Subspace) -> Result<f64> {
        let ob = self.aligned_basis(other)?;
        let proj = &ob * (ob.adjoint() * &self.basis);
        Ok(max_abs(&(&self.basis - proj)))
    }

    pub fn is_subset(&self, other: &Subspace, tol: f64) -> Result<bool> {
        Ok(self.subset_residual(other)? <= tol)
    }

    /// Mutual inclusion.
    pub fn equals(&self, other: &Subspace, tol: f64) -> Result<bool> {
        Ok(self.is_subset(other, tol)? && other.is_subset(self, tol)?)
    }

    /// Largest principal angle. Subspaces of different dimension are at π/2.
    pub fn max_principal_angle(&self, other: &Subspace) -> Result<f64> {
        let ob = self.aligned_basis(other)?;
        if ob.ncols() != self.dim() {
            return Ok(std::f64::consts::FRAC_PI_2);
        }
        if self.dim() == 0 {
            return Ok(0.0);
        }
        let resid = &self.basis - &ob * (ob.adjoint() * &self.basis);
        let s = singular_values(&resid)[0];
        Ok(s.min(1.0).asin())
    }

    pub fn contains_vector(&self, v: &CVec, tol: f64) -> Result<bool> {
        let v = v.permute(&self.ambient.labels())?;
        let r = v.data() - &self.basis * (self.basis.adjoint() * v.data());
        Ok(r.iter().all(|z| z.norm() <= tol))
    }

    /// `self ⊗ other` on the concatenated space.
    pub fn kron(&self, other: &Subspace) -> Result<Subspace> {
        Ok(Self {
            ambient: self.ambient.concat(&other.ambient)?,
            basis: self.basis.kronecker(&other.basis),
            built_tol: self.built_tol.max(other.built_tol),
        })
    }
}

/// `[W]_{E→F}`: span of `(⟨ε| ⊗ I)|η⟩` over computational-basis `ε` on `e_labels`
/// and basis vectors `η` of `w`. Lives on `f_labels`.
pub fn reduced_subspace<S: AsRef<str>, T: AsRef<str>>(
    w: &Subspace,
    e_labels: &[S],
    f_labels: &[T],
) -> Result<Subspace> {
    let mut order: Vec<&str> = e_labels.iter().map(|l| l.as_ref()).collect();
    order.extend(f_labels.iter().map(|l| l.as_ref()));
    if order.len() != w.ambient.len() {
        return Err(Error::Shape(format!(
            "labels {:?} do not partition {}",
            order, w.ambient
        )));
    }
    let wp = w.permute(&order)?;
    let f_space = w.ambient.select(f_labels)?;
    let de = w.ambient.select(e_labels)?.total_dim();
    let df = f_space.total_dim();
    let k = wp.dim();
    let m = DMatrix::from_fn(df, k * de, |f, col| {
        let (j, e) = (col / de, col % de);
        wp.basis[(e * df + f, j)]
    });
    Subspace::from_columns(&f_space, &m, tol::RANK)
}

/// `u(s)`, as a subspace of `u`'s output space.
pub fn image(u: &LinOp, s: &Subspace) -> Result<Subspace> {
    if !s.ambient.same_factors(u.in_space()) {
        return Err(Error::Shape(format!(
            "subspace of {} is not in the input {} of the operator",
            s.ambient,
            u.in_space()
        )));
    }
    let sb = s.permute(&u.in_space().labels())?;
    Subspace::from_columns(u.out_space(), &(u.data() * sb.basis), tol::RANK)
}
