//! Choi vectors and operators, the link product, and plugging unitaries into a comb.

use nalgebra::{DMatrix, DVector};

use crate::comb::SlotLayout;
use crate::tensor::{kron, max_abs, CVec, LinOp, SystemDims, C64};
use crate::{Error, Result};

/// Choi operator of a linear map, with the factors split into map inputs and outputs.
#[derive(Clone, Debug)]
pub struct ChoiOp {
    op: LinOp,
    inputs: SystemDims,
    outputs: SystemDims,
}

impl ChoiOp {
    /// `op` must act on one space; `inputs` names the map-input factors, the rest are outputs.
    pub fn new<S: AsRef<str>>(op: LinOp, inputs: &[S]) -> Result<Self> {
        if !op.is_square_on_same_space() {
            return Err(Error::NotSquare);
        }
        let inputs = op.in_space().select(inputs)?;
        let outputs = op.in_space().without(&inputs.labels())?;
        Ok(Self { op, inputs, outputs })
    }

    pub fn op(&self) -> &LinOp {
        &self.op
    }

    pub fn inputs(&self) -> &SystemDims {
        &self.inputs
    }

    pub fn outputs(&self) -> &SystemDims {
        &self.outputs
    }

    pub fn space(&self) -> &SystemDims {
        self.op.in_space()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        max_abs(&(self.op.data() - self.op.data().adjoint()))
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (self.op.data() + self.op.data().adjoint()) * C64::new(0.5, 0.0);
        crate::linalg::hermitian_eigenvalues(&h)[0]
    }

    /// `‖Tr_out E − I_in‖_max`.
    pub fn trace_preservation_residual(&self) -> Result<f64> {
        let t = self.op.partial_trace(&self.outputs.labels())?;
        let t = t.aligned_to(&self.inputs, &self.inputs)?;
        let d = self.inputs.total_dim();
        Ok(max_abs(&(t.data() - DMatrix::<C64>::identity(d, d))))
    }
}

/// `|A⟩⟩ = Σ_i |i⟩ ⊗ A|i⟩` on `in ⊗ out`.
pub fn choi_vector(a: &LinOp) -> Result<CVec> {
    let space = a.in_space().concat(a.out_space())?;
    let dout = a.out_space().total_dim();
    let m = a.data();
    let data = DVector::from_fn(space.total_dim(), |k, _| m[(k % dout, k / dout)]);
    CVec::new(space, data)
}

/// `|A⟩⟩⟨⟨A|`, inputs are `a`'s input factors.
pub fn choi_of_unitary(a: &LinOp) -> Result<ChoiOp> {
    let v = choi_vector(a)?;
    let op = LinOp::new(v.space().clone(), v.space().clone(), v.data() * v.data().adjoint())?;
    ChoiOp::new(op, &a.in_space().labels())
}

/// `Tr_{|v⟩⟩ on traced}` of `|A⟩⟩⟨⟨A|`, computed without forming the full outer product.
pub fn traced_choi<S: AsRef<str>>(a: &LinOp, traced: &[S]) -> Result<LinOp> {
    let v = choi_vector(a)?;
    let rest = v.space().without(traced)?;
    let mut order = rest.labels();
    order.extend(traced.iter().map(|l| l.as_ref()));
    let v = v.permute(&order)?;
    let dt = v.space().total_dim() / rest.total_dim().max(1);
    let dr = rest.total_dim();
    let m = DMatrix::from_fn(dr, dt, |r, t| v.data()[r * dt + t]);
    LinOp::new(rest.clone(), rest, &m * m.adjoint())
}

/// `E * F = Tr_L[(E ⊗ 1)(1 ⊗ F^{T_L})]` with `L` the factors whose labels appear in both.
pub fn link_product(e: &ChoiOp, f: &ChoiOp) -> Result<ChoiOp> {
    let es = e.space();
    let fs = f.space();
    let shared: Vec<&str> = es.labels().into_iter().filter(|l| fs.contains(l)).collect();
    for l in &shared {
        if es.dim_of(l) != fs.dim_of(l) {
            return Err(Error::Shape(format!(
                "factor `{l}` has different dims in the two operands"
            )));
        }
    }
    let x = es.without(&shared)?;
    let y = fs.without(&shared)?;
    let mut eo = x.labels();
    eo.extend(shared.iter().copied());
    let mut fo: Vec<&str> = shared.clone();
    fo.extend(y.labels());
    let ep = e.op.permute_systems(&eo)?;
    let fp = f.op.permute_systems(&fo)?;
    let (dx, dy) = (x.total_dim(), y.total_dim());
    let dl = es.select(&shared)?.total_dim();
    let ed = ep.data();
    let fd = fp.data();
    let et = DMatrix::from_fn(dx * dx, dl * dl, |r, c| {
        let (a, b) = (r / dx, r % dx);
        let (l, m) = (c / dl, c % dl);
        ed[(a * dl + l, b * dl + m)]
    });
    let ft = DMatrix::from_fn(dl * dl, dy * dy, |r, c| {
        let (l, m) = (r / dl, r % dl);
        let (a, b) = (c / dy, c % dy);
        fd[(l * dy + a, m * dy + b)]
    });
    let rt = et * ft;
    let space = x.concat(&y)?;
    let data = DMatrix::from_fn(dx * dy, dx * dy, |r, c| {
        let (a, b) = (r / dy, r % dy);
        let (a2, b2) = (c / dy, c % dy);
        rt[(a * dx + a2, b * dy + b2)]
    });
    let op = LinOp::new(space.clone(), space, data)?;
    let inputs: Vec<&str> = e
        .inputs
        .labels()
        .into_iter()
        .chain(f.inputs.labels())
        .filter(|l| !shared.contains(l))
        .collect();
    ChoiOp::new(op, &inputs)
}

/// `E(ρ) = ρ * E`.
pub fn apply_channel(e: &ChoiOp, rho: &LinOp) -> Result<LinOp> {
    if !rho.is_square_on_same_space() {
        return Err(Error::NotSquare);
    }
    if !rho.in_space().same_factors(e.inputs()) {
        return Err(Error::Shape(format!(
            "state on {} but channel input is {}",
            rho.in_space(),
            e.inputs()
        )));
    }
    let r = ChoiOp::new(rho.clone(), &[] as &[&str])?;
    Ok(link_product(&r, e)?.op)
}

/// `U_G = Tr_{H_2 … H_2N}[(1 ⊗ ⊗U_n)(U ⊗ ⊗1)]`.
///
/// `slots[n-1]` maps `H_{2n-1} ⊗ H'_{2n-1} → H_{2n} ⊗ H'_{2n}`; the primed ancilla
/// factors are whatever extra labels the slot operator carries. The result maps
/// `H_0 ⊗ (input ancillas)` to `H_{2N+1} ⊗ (output ancillas)`.
pub fn plug_unitaries(u: &LinOp, layout: &SlotLayout, slots: &[LinOp]) -> Result<LinOp> {
    let n = layout.slots();
    if slots.len() != n {
        return Err(Error::Layout(format!("{} slot operators for {n} slots", slots.len())));
    }
    let u = u.aligned_to(&layout.even_space(), &layout.odd_space())?;
    let mut anc_in = SystemDims::trivial();
    let mut anc_out = SystemDims::trivial();
    for (i, s) in slots.iter().enumerate() {
        let (hin, hout) = (layout.label(2 * i + 1), layout.label(2 * i + 2));
        if s.in_space().dim_of(hin) != Some(layout.dim(2 * i + 1))
            || s.out_space().dim_of(hout) != Some(layout.dim(2 * i + 2))
        {
            return Err(Error::Layout(format!(
                "slot {} operator {} -> {} does not act on {hin} -> {hout}",
                i + 1,
                s.in_space(),
                s.out_space()
            )));
        }
        anc_in = anc_in.concat(&s.in_space().without(&[hin])?)?;
        anc_out = anc_out.concat(&s.out_space().without(&[hout])?)?;
    }
    let mut cur = kron(&u, &LinOp::identity(&anc_in))?;
    for s in slots {
        cur = cur.apply_local(s)?;
    }
    let evens: Vec<&str> = (1..=n).map(|k| layout.label(2 * k)).collect();
    let cur = cur.trace_loops(&evens)?;
    let mut in_order = vec![layout.label(0)];
    in_order.extend(anc_in.labels());
    let mut out_order = vec![layout.label(2 * n + 1)];
    out_order.extend(anc_out.labels());
    cur.permute_in(&in_order)?.permute_out(&out_order)
}
