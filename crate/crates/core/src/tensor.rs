//! Labeled tensor-product spaces and the operators and vectors that live on them.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

pub type C64 = Complex64;

/// One tensor factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
}

impl Factor {
    pub fn new(label: impl Into<String>, dim: usize) -> Self {
        Self {
            label: label.into(),
            dim,
        }
    }
}

/// Ordered list of labeled factors. The empty list is the one-dimensional space.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct SystemDims {
    factors: Vec<Factor>,
}

impl fmt::Display for SystemDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}={}", x.label, x.dim)?;
        }
        write!(f, "]")
    }
}

impl SystemDims {
    pub fn new<I, S>(factors: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        Self::from_factors(factors.into_iter().map(|(l, d)| Factor::new(l, d)).collect())
    }

    pub fn from_factors(factors: Vec<Factor>) -> Result<Self> {
        for (i, f) in factors.iter().enumerate() {
            if f.dim == 0 {
                return Err(Error::ZeroDim(f.label.clone()));
            }
            if factors[..i].iter().any(|g| g.label == f.label) {
                return Err(Error::DuplicateLabel(f.label.clone()));
            }
        }
        Ok(Self { factors })
    }

    pub fn single(label: impl Into<String>, dim: usize) -> Result<Self> {
        Self::from_factors(vec![Factor::new(label, dim)])
    }

    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.factors.iter().map(|f| f.label.as_str()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.label == label)
    }

    pub fn dim_of(&self, label: &str) -> Option<usize> {
        self.position(label).map(|i| self.factors[i].dim)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    /// Concatenation `self ⊗ other`.
    pub fn concat(&self, other: &SystemDims) -> Result<Self> {
        if let Some(f) = other.factors.iter().find(|f| self.contains(&f.label)) {
            return Err(Error::LabelCollision(f.label.clone()));
        }
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Ok(Self { factors })
    }

    /// The listed factors, in the listed order.
    pub fn select<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let mut out = Vec::with_capacity(labels.len());
        for l in labels {
            let l = l.as_ref();
            let i = self.position(l).ok_or_else(|| Error::UnknownLabel(l.to_string()))?;
            out.push(self.factors[i].clone());
        }
        Self::from_factors(out)
    }

    /// Every factor except the listed ones, in the original order.
    pub fn without<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        for l in labels {
            if !self.contains(l.as_ref()) {
                return Err(Error::UnknownLabel(l.as_ref().to_string()));
            }
        }
        Ok(Self {
            factors: self
                .factors
                .iter()
                .filter(|f| !labels.iter().any(|l| l.as_ref() == f.label))
                .cloned()
                .collect(),
        })
    }

    /// Same labels with the same dims, in any order.
    pub fn same_factors(&self, other: &SystemDims) -> bool {
        self.len() == other.len() && self.factors.iter().all(|f| other.dim_of(&f.label) == Some(f.dim))
    }

    /// `perm[k]` is the current position of the k-th label of `order`.
    pub fn permutation_to<S: AsRef<str>>(&self, order: &[S]) -> Result<Vec<usize>> {
        let mut perm = Vec::with_capacity(order.len());
        for l in order {
            let l = l.as_ref();
            let i = self.position(l).ok_or_else(|| Error::UnknownLabel(l.to_string()))?;
            if perm.contains(&i) {
                return Err(Error::DuplicateLabel(l.to_string()));
            }
            perm.push(i);
        }
        if perm.len() != self.len() {
            let missing = (0..self.len()).find(|i| !perm.contains(i)).unwrap();
            return Err(Error::Shape(format!(
                "permutation omits label `{}`",
                self.factors[missing].label
            )));
        }
        Ok(perm)
    }

    /// Replace a contiguous run of factors by one factor of the product dimension.
    pub fn merge<S: AsRef<str>>(&self, labels: &[S], new_label: &str) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Shape("nothing to merge".into()));
        }
        let first = self
            .position(labels[0].as_ref())
            .ok_or_else(|| Error::UnknownLabel(labels[0].as_ref().to_string()))?;
        for (k, l) in labels.iter().enumerate() {
            match self.factors.get(first + k) {
                Some(f) if f.label == l.as_ref() => {}
                _ => {
                    return Err(Error::Shape(format!(
                        "labels to merge are not contiguous at `{}`",
                        l.as_ref()
                    )))
                }
            }
        }
        let dim = self.factors[first..first + labels.len()]
            .iter()
            .map(|f| f.dim)
            .product();
        let mut factors = self.factors[..first].to_vec();
        factors.push(Factor::new(new_label, dim));
        factors.extend(self.factors[first + labels.len()..].iter().cloned());
        Self::from_factors(factors)
    }

    /// Inverse of [`merge`](Self::merge).
    pub fn split(&self, label: &str, parts: &[Factor]) -> Result<Self> {
        let i = self
            .position(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        let prod: usize = parts.iter().map(|f| f.dim).product();
        if prod != self.factors[i].dim {
            return Err(Error::Shape(format!(
                "cannot split `{label}` of dim {} into parts of total dim {prod}",
                self.factors[i].dim
            )));
        }
        let mut factors = self.factors[..i].to_vec();
        factors.extend(parts.iter().cloned());
        factors.extend(self.factors[i + 1..].iter().cloned());
        Self::from_factors(factors)
    }

    fn strides(&self) -> Vec<usize> {
        strides(&self.dims())
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// For a row-major tensor with `dims` whose axes are reordered so that new axis k
/// is old axis `perm[k]`, entry i of the result is the old flat index of new index i.
fn permutation_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let n = dims.len();
    let old_strides = strides(dims);
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let new_strides: Vec<usize> = perm.iter().map(|&p| old_strides[p]).collect();
    let total: usize = dims.iter().product();
    let mut map = Vec::with_capacity(total);
    let mut idx = vec![0usize; n];
    let mut old = 0usize;
    for _ in 0..total {
        map.push(old);
        let mut k = n;
        while k > 0 {
            k -= 1;
            idx[k] += 1;
            old += new_strides[k];
            if idx[k] < new_dims[k] {
                break;
            }
            old -= new_strides[k] * new_dims[k];
            idx[k] = 0;
        }
    }
    map
}

fn index_map<S: AsRef<str>>(space: &SystemDims, order: &[S]) -> Result<(SystemDims, Vec<usize>)> {
    let perm = space.permutation_to(order)?;
    let new_space = SystemDims {
        factors: perm.iter().map(|&p| space.factors[p].clone()).collect(),
    };
    Ok((new_space, permutation_map(&space.dims(), &perm)))
}

/// Dense operator from `in_space` to `out_space`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinOp {
    in_space: SystemDims,
    out_space: SystemDims,
    data: DMatrix<C64>,
}

impl LinOp {
    pub fn new(in_space: SystemDims, out_space: SystemDims, data: DMatrix<C64>) -> Result<Self> {
        if data.nrows() != out_space.total_dim() || data.ncols() != in_space.total_dim() {
            return Err(Error::Shape(format!(
                "matrix is {}x{} but spaces {} -> {} need {}x{}",
                data.nrows(),
                data.ncols(),
                in_space,
                out_space,
                out_space.total_dim(),
                in_space.total_dim()
            )));
        }
        Ok(Self {
            in_space,
            out_space,
            data,
        })
    }

    pub fn identity(space: &SystemDims) -> Self {
        let d = space.total_dim();
        Self {
            in_space: space.clone(),
            out_space: space.clone(),
            data: DMatrix::identity(d, d),
        }
    }

    pub fn zeros(in_space: SystemDims, out_space: SystemDims) -> Self {
        let data = DMatrix::zeros(out_space.total_dim(), in_space.total_dim());
        Self {
            in_space,
            out_space,
            data,
        }
    }

    pub fn in_space(&self) -> &SystemDims {
        &self.in_space
    }

    pub fn out_space(&self) -> &SystemDims {
        &self.out_space
    }

    pub fn data(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_data(self) -> DMatrix<C64> {
        self.data
    }

    /// Reinterpret the same matrix on different spaces of equal total dimension.
    pub fn with_spaces(&self, in_space: SystemDims, out_space: SystemDims) -> Result<Self> {
        Self::new(in_space, out_space, self.data.clone())
    }

    /// True when input and output spaces coincide factor by factor.
    pub fn is_square_on_same_space(&self) -> bool {
        self.in_space == self.out_space
    }

    pub fn adjoint(&self) -> LinOp {
        Self {
            in_space: self.out_space.clone(),
            out_space: self.in_space.clone(),
            data: self.data.adjoint(),
        }
    }

    pub fn scale(&self, c: C64) -> LinOp {
        Self {
            in_space: self.in_space.clone(),
            out_space: self.out_space.clone(),
            data: &self.data * c,
        }
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn kron(&self, other: &LinOp) -> Result<LinOp> {
        kron(self, other)
    }

    /// `self ∘ rhs`. The output factors of `rhs` are reordered to match `self`'s input.
    pub fn compose(&self, rhs: &LinOp) -> Result<LinOp> {
        if !self.in_space.same_factors(&rhs.out_space) {
            return Err(Error::Shape(format!(
                "cannot compose: input {} vs output {}",
                self.in_space, rhs.out_space
            )));
        }
        let rhs = rhs.permute_out(&self.in_space.labels())?;
        Ok(Self {
            in_space: rhs.in_space,
            out_space: self.out_space.clone(),
            data: &self.data * &rhs.data,
        })
    }

    /// Sum of two operators on the same factors (the second is reordered if needed).
    pub fn add(&self, other: &LinOp) -> Result<LinOp> {
        let other = other.aligned_to(&self.in_space, &self.out_space)?;
        Ok(Self {
            in_space: self.in_space.clone(),
            out_space: self.out_space.clone(),
            data: &self.data + &other.data,
        })
    }

    /// Reorder factors so the spaces equal the given ones exactly.
    pub fn aligned_to(&self, in_space: &SystemDims, out_space: &SystemDims) -> Result<LinOp> {
        if !self.in_space.same_factors(in_space) || !self.out_space.same_factors(out_space) {
            return Err(Error::Shape(format!(
                "operator {} -> {} does not match {} -> {}",
                self.in_space, self.out_space, in_space, out_space
            )));
        }
        self.permute_in(&in_space.labels())?.permute_out(&out_space.labels())
    }

    pub fn permute_in<S: AsRef<str>>(&self, order: &[S]) -> Result<LinOp> {
        let (space, map) = index_map(&self.in_space, order)?;
        let data = DMatrix::from_fn(self.data.nrows(), self.data.ncols(), |r, c| self.data[(r, map[c])]);
        Ok(Self {
            in_space: space,
            out_space: self.out_space.clone(),
            data,
        })
    }

    pub fn permute_out<S: AsRef<str>>(&self, order: &[S]) -> Result<LinOp> {
        let (space, map) = index_map(&self.out_space, order)?;
        let data = DMatrix::from_fn(self.data.nrows(), self.data.ncols(), |r, c| self.data[(map[r], c)]);
        Ok(Self {
            in_space: self.in_space.clone(),
            out_space: space,
            data,
        })
    }

    /// Reorder both sides. Each side takes the subsequence of `order` naming its factors,
    /// and every factor of either side must be named.
    pub fn permute_systems<S: AsRef<str>>(&self, order: &[S]) -> Result<LinOp> {
        for (i, l) in order.iter().enumerate() {
            let l = l.as_ref();
            if order[..i].iter().any(|m| m.as_ref() == l) {
                return Err(Error::DuplicateLabel(l.to_string()));
            }
            if !self.in_space.contains(l) && !self.out_space.contains(l) {
                return Err(Error::UnknownLabel(l.to_string()));
            }
        }
        let pick = |space: &SystemDims| -> Vec<&str> {
            order.iter().map(|l| l.as_ref()).filter(|l| space.contains(l)).collect()
        };
        self.permute_in(&pick(&self.in_space))?
            .permute_out(&pick(&self.out_space))
    }

    /// Sum over the diagonal of factors that appear on both sides. Works for
    /// non-square operators; the listed factors disappear from both sides.
    pub fn trace_loops<S: AsRef<str>>(&self, labels: &[S]) -> Result<LinOp> {
        for l in labels {
            let l = l.as_ref();
            match (self.in_space.dim_of(l), self.out_space.dim_of(l)) {
                (Some(a), Some(b)) if a == b => {}
                (Some(_), Some(_)) => {
                    return Err(Error::Shape(format!("factor `{l}` differs between input and output")))
                }
                _ => return Err(Error::UnknownLabel(l.to_string())),
            }
        }
        let rest_in = self.in_space.without(labels)?;
        let rest_out = self.out_space.without(labels)?;
        let mut in_order = rest_in.labels();
        in_order.extend(labels.iter().map(|l| l.as_ref()));
        let mut out_order = rest_out.labels();
        out_order.extend(labels.iter().map(|l| l.as_ref()));
        let p = self.permute_in(&in_order)?.permute_out(&out_order)?;
        let dl = self.in_space.select(labels)?.total_dim();
        let data = DMatrix::from_fn(rest_out.total_dim(), rest_in.total_dim(), |a, b| {
            (0..dl).map(|l| p.data[(a * dl + l, b * dl + l)]).sum()
        });
        Ok(Self {
            in_space: rest_in,
            out_space: rest_out,
            data,
        })
    }

    pub fn partial_trace<S: AsRef<str>>(&self, labels: &[S]) -> Result<LinOp> {
        partial_trace(self, labels)
    }

    pub fn partial_transpose<S: AsRef<str>>(&self, labels: &[S]) -> Result<LinOp> {
        partial_transpose(self, labels)
    }

    /// Apply `g` to the output factors it names. The result's output is `g`'s output
    /// followed by the untouched factors.
    pub fn apply_local(&self, g: &LinOp) -> Result<LinOp> {
        for f in g.in_space.factors() {
            if self.out_space.dim_of(&f.label) != Some(f.dim) {
                return Err(Error::Shape(format!(
                    "local operator input {} not found in output {}",
                    g.in_space, self.out_space
                )));
            }
        }
        let rest = self.out_space.without(&g.in_space.labels())?;
        let out_space = g.out_space.concat(&rest)?;
        let mut order = g.in_space.labels();
        order.extend(rest.labels());
        let p = self.permute_out(&order)?;
        // (g ⊗ 1) p without forming g ⊗ 1: row a·r + s of p is block row a, entry (s, col)
        let (din, dout, r, n) = (g.data.ncols(), g.data.nrows(), rest.total_dim(), p.data.ncols());
        let blocks = DMatrix::from_fn(din, r * n, |a, k| p.data[(a * r + k / n, k % n)]);
        let prod = &g.data * blocks;
        let data = DMatrix::from_fn(dout * r, n, |row, col| prod[(row / r, (row % r) * n + col)]);
        Ok(Self {
            in_space: self.in_space.clone(),
            out_space,
            data,
        })
    }

    pub fn apply(&self, v: &CVec) -> Result<CVec> {
        let v = v.permute(&self.in_space.labels())?;
        if v.space != self.in_space {
            return Err(Error::Shape(format!(
                "vector on {} does not match input {}",
                v.space, self.in_space
            )));
        }
        Ok(CVec {
            space: self.out_space.clone(),
            data: &self.data * &v.data,
        })
    }

    pub fn merge_in<S: AsRef<str>>(&self, labels: &[S], new_label: &str) -> Result<LinOp> {
        let in_space = self.in_space.merge(labels, new_label)?;
        Ok(Self {
            in_space,
            ..self.clone()
        })
    }

    pub fn merge_out<S: AsRef<str>>(&self, labels: &[S], new_label: &str) -> Result<LinOp> {
        let out_space = self.out_space.merge(labels, new_label)?;
        Ok(Self {
            out_space,
            ..self.clone()
        })
    }

    pub fn split_in(&self, label: &str, parts: &[Factor]) -> Result<LinOp> {
        let in_space = self.in_space.split(label, parts)?;
        Ok(Self {
            in_space,
            ..self.clone()
        })
    }

    pub fn split_out(&self, label: &str, parts: &[Factor]) -> Result<LinOp> {
        let out_space = self.out_space.split(label, parts)?;
        Ok(Self {
            out_space,
            ..self.clone()
        })
    }

    /// Multiply by the phase that makes the largest-magnitude entry real and positive.
    /// Entries within 1e-9 of the maximum count as ties; the first in row-major order wins.
    pub fn canonical_phase(&self) -> LinOp {
        let m = self.max_abs();
        if m == 0.0 {
            return self.clone();
        }
        let (r, c) = (0..self.data.nrows())
            .flat_map(|r| (0..self.data.ncols()).map(move |c| (r, c)))
            .find(|&(r, c)| self.data[(r, c)].norm() >= m - 1e-9)
            .unwrap();
        let z = self.data[(r, c)];
        self.scale(z.conj() / z.norm())
    }
}

/// Max-norm of a matrix.
pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Tensor product; spaces are concatenated.
pub fn kron(a: &LinOp, b: &LinOp) -> Result<LinOp> {
    Ok(LinOp {
        in_space: a.in_space.concat(&b.in_space)?,
        out_space: a.out_space.concat(&b.out_space)?,
        data: a.data.kronecker(&b.data),
    })
}

/// Trace over the listed factors of an operator whose input and output spaces coincide.
pub fn partial_trace<S: AsRef<str>>(a: &LinOp, labels: &[S]) -> Result<LinOp> {
    if !a.is_square_on_same_space() {
        return Err(Error::NotSquare);
    }
    a.trace_loops(labels)
}

/// Transpose the listed factors, which must appear on both sides with equal dims.
pub fn partial_transpose<S: AsRef<str>>(a: &LinOp, labels: &[S]) -> Result<LinOp> {
    let out_strides = a.out_space.strides();
    let in_strides = a.in_space.strides();
    let mut data = a.data.clone();
    for l in labels {
        let l = l.as_ref();
        let (po, pi) = match (a.out_space.position(l), a.in_space.position(l)) {
            (Some(po), Some(pi)) => (po, pi),
            _ => return Err(Error::UnknownLabel(l.to_string())),
        };
        let d = a.out_space.factors[po].dim;
        if a.in_space.factors[pi].dim != d {
            return Err(Error::Shape(format!("factor `{l}` differs between input and output")));
        }
        let (so, si) = (out_strides[po], in_strides[pi]);
        let src = data.clone();
        for r in 0..src.nrows() {
            let xr = (r / so) % d;
            let rest_r = r - xr * so;
            for c in 0..src.ncols() {
                let xc = (c / si) % d;
                let rest_c = c - xc * si;
                data[(rest_r + xc * so, rest_c + xr * si)] = src[(r, c)];
            }
        }
    }
    Ok(LinOp {
        in_space: a.in_space.clone(),
        out_space: a.out_space.clone(),
        data,
    })
}

/// `‖A†A − I‖_max ≤ tol`, with the residual. Non-square operators give `(false, ∞)`.
pub fn is_unitary(a: &LinOp, tol: f64) -> (bool, f64) {
    if a.data.nrows() != a.data.ncols() {
        return (false, f64::INFINITY);
    }
    let n = a.data.ncols();
    let g = a.data.adjoint() * &a.data - DMatrix::<C64>::identity(n, n);
    let r = max_abs(&g);
    (r <= tol, r)
}

/// `min_θ ‖a − e^{iθ} b‖_max` evaluated at the least-squares phase.
pub fn phase_aligned_residual(a: &LinOp, b: &LinOp) -> Result<f64> {
    let b = b.aligned_to(&a.in_space, &a.out_space)?;
    let overlap: C64 = b.data.iter().zip(a.data.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    Ok(max_abs(&(&a.data - &b.data * phase)))
}

/// Vector on a labeled space.
#[derive(Clone, Debug, PartialEq)]
pub struct CVec {
    space: SystemDims,
    data: DVector<C64>,
}

impl CVec {
    pub fn new(space: SystemDims, data: DVector<C64>) -> Result<Self> {
        if data.len() != space.total_dim() {
            return Err(Error::Shape(format!(
                "vector of length {} on space {}",
                data.len(),
                space
            )));
        }
        Ok(Self { space, data })
    }

    pub fn basis(space: &SystemDims, index: usize) -> Result<Self> {
        let d = space.total_dim();
        if index >= d {
            return Err(Error::Shape(format!("basis index {index} out of range {d}")));
        }
        let mut data = DVector::zeros(d);
        data[index] = C64::new(1.0, 0.0);
        Ok(Self {
            space: space.clone(),
            data,
        })
    }

    pub fn space(&self) -> &SystemDims {
        &self.space
    }

    pub fn data(&self) -> &DVector<C64> {
        &self.data
    }

    pub fn into_data(self) -> DVector<C64> {
        self.data
    }

    pub fn norm(&self) -> f64 {
        self.data.norm()
    }

    pub fn kron(&self, other: &CVec) -> Result<CVec> {
        Ok(Self {
            space: self.space.concat(&other.space)?,
            data: self.data.kronecker(&other.data),
        })
    }

    pub fn permute<S: AsRef<str>>(&self, order: &[S]) -> Result<CVec> {
        let (space, map) = index_map(&self.space, order)?;
        let data = DVector::from_fn(self.data.len(), |i, _| self.data[map[i]]);
        Ok(Self { space, data })
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &CVec) -> Result<C64> {
        let other = other.permute(&self.space.labels())?;
        if other.space != self.space {
            return Err(Error::Shape("inner product of vectors on different spaces".into()));
        }
        Ok(self.data.dotc(&other.data))
    }
}

/// `(⟨φ| ⊗ I) x`: contracts the factors of `phi` out of `x`.
pub fn contract_bra(phi: &CVec, x: &CVec) -> Result<CVec> {
    for f in phi.space.factors() {
        if x.space.dim_of(&f.label) != Some(f.dim) {
            return Err(Error::Shape(format!(
                "bra space {} is not a subsystem of {}",
                phi.space, x.space
            )));
        }
    }
    let rest = x.space.without(&phi.space.labels())?;
    let mut order = phi.space.labels();
    order.extend(rest.labels());
    let xp = x.permute(&order)?;
    let dr = rest.total_dim();
    let data = DVector::from_fn(dr, |r, _| {
        (0..phi.data.len())
            .map(|s| phi.data[s].conj() * xp.data[s * dr + r])
            .sum()
    });
    Ok(CVec { space: rest, data })
}
