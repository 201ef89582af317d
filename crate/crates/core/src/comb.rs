//! Quantum combs: Choi-level and unitary-level verification, and the staircase
//! decomposition of pure combs into a sequence of unitaries linked by ancillas.

use nalgebra::{DMatrix, DVector};

use crate::choi::ChoiOp;
use crate::subspace::{reduced_subspace, Subspace};
use crate::superchannel::{spanning_family, stability_vectors};
use crate::tensor::{is_unitary, kron, max_abs, Factor, LinOp, SystemDims, C64};
use crate::{tol, Error, Result};

/// Factors `H_0, H_1, …, H_{2N+1}` of an N-slot comb. Slot n has input `H_{2n-1}`
/// and output `H_{2n}`; `H_0` is the global past and `H_{2N+1}` the global future.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotLayout {
    factors: Vec<Factor>,
}

impl SlotLayout {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.len() < 2 || !factors.len().is_multiple_of(2) {
            return Err(Error::Layout(format!(
                "a comb needs an even number (>= 2) of factors, got {}",
                factors.len()
            )));
        }
        SystemDims::from_factors(factors.clone())?;
        Ok(Self { factors })
    }

    /// Labels `H0, H1, …`.
    pub fn standard(dims: &[usize]) -> Result<Self> {
        Self::new(
            dims.iter()
                .enumerate()
                .map(|(i, &d)| Factor::new(format!("H{i}"), d))
                .collect(),
        )
    }

    pub fn slots(&self) -> usize {
        self.factors.len() / 2 - 1
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn label(&self, m: usize) -> &str {
        &self.factors[m].label
    }

    pub fn dim(&self, m: usize) -> usize {
        self.factors[m].dim
    }

    /// `H_0 ⊗ H_2 ⊗ … ⊗ H_{2N}`, the input of a representing unitary.
    pub fn even_space(&self) -> SystemDims {
        SystemDims::from_factors(self.factors.iter().step_by(2).cloned().collect()).unwrap()
    }

    /// `H_1 ⊗ H_3 ⊗ … ⊗ H_{2N+1}`, the output of a representing unitary.
    pub fn odd_space(&self) -> SystemDims {
        SystemDims::from_factors(self.factors.iter().skip(1).step_by(2).cloned().collect()).unwrap()
    }

    /// All factors in layout order.
    pub fn full_space(&self) -> SystemDims {
        SystemDims::from_factors(self.factors.clone()).unwrap()
    }

    /// The ancilla dims `k_0..k_{N+1}` forced by `d_{2n} k_n = d_{2n+1} k_{n+1}`, `k_0 = k_{N+1} = 1`.
    pub fn ancilla_dims(&self) -> Result<Vec<usize>> {
        let n = self.slots();
        let mut k = vec![1usize];
        for m in 0..=n {
            let lhs = self.dim(2 * m) * k[m];
            let d = self.dim(2 * m + 1);
            if !lhs.is_multiple_of(d) {
                return Err(Error::DimensionChain {
                    slot: m,
                    lhs,
                    rhs: d * (lhs / d + 1),
                });
            }
            k.push(lhs / d);
        }
        if k[n + 1] != 1 {
            return Err(Error::DimensionChain {
                slot: n,
                lhs: self.dim(2 * n) * k[n],
                rhs: self.dim(2 * n + 1),
            });
        }
        Ok(k)
    }
}

/// Label of the ancilla `A_n` passed from `U_{n-1}` to `U_n`.
pub fn ancilla_label(n: usize) -> String {
    format!("anc{n}")
}

/// `U_N ⋯ U_1 U_0` with `U_n : H_{2n} ⊗ A_n → H_{2n+1} ⊗ A_{n+1}`.
/// `A_0` and `A_{N+1}` are trivial and carry no factor.
#[derive(Clone, Debug)]
pub struct CombCircuit {
    layout: SlotLayout,
    unitaries: Vec<LinOp>,
    ancilla_dims: Vec<usize>,
}

fn element_spaces(layout: &SlotLayout, n: usize, k: &[usize]) -> Result<(SystemDims, SystemDims)> {
    let last = layout.slots();
    let mut i = vec![layout.factors[2 * n].clone()];
    if n > 0 {
        i.push(Factor::new(ancilla_label(n), k[n]));
    }
    let mut o = vec![layout.factors[2 * n + 1].clone()];
    if n < last {
        o.push(Factor::new(ancilla_label(n + 1), k[n + 1]));
    }
    Ok((SystemDims::from_factors(i)?, SystemDims::from_factors(o)?))
}

impl CombCircuit {
    /// Validates labels, the dimension chain and unitarity of each element.
    pub fn new(layout: SlotLayout, unitaries: Vec<LinOp>) -> Result<Self> {
        let n = layout.slots();
        if unitaries.len() != n + 1 {
            return Err(Error::Layout(format!(
                "{} unitaries for a {n}-slot comb",
                unitaries.len()
            )));
        }
        for a in 1..=n {
            if layout.full_space().contains(&ancilla_label(a)) {
                return Err(Error::LabelCollision(ancilla_label(a)));
            }
        }
        let mut k = vec![1usize];
        for (m, u) in unitaries.iter().enumerate() {
            let kin = if m == 0 {
                1
            } else {
                u.in_space()
                    .dim_of(&ancilla_label(m))
                    .ok_or_else(|| Error::UnknownLabel(ancilla_label(m)))?
            };
            if kin != k[m] {
                return Err(Error::DimensionChain {
                    slot: m,
                    lhs: kin,
                    rhs: k[m],
                });
            }
            let kout = if m == n {
                1
            } else {
                u.out_space()
                    .dim_of(&ancilla_label(m + 1))
                    .ok_or_else(|| Error::UnknownLabel(ancilla_label(m + 1)))?
            };
            let (lhs, rhs) = (layout.dim(2 * m) * kin, layout.dim(2 * m + 1) * kout);
            if lhs != rhs {
                return Err(Error::DimensionChain { slot: m, lhs, rhs });
            }
            k.push(kout);
        }
        let mut aligned = Vec::with_capacity(n + 1);
        for (m, u) in unitaries.iter().enumerate() {
            let (i, o) = element_spaces(&layout, m, &k)?;
            let u = u.aligned_to(&i, &o)?;
            let (ok, r) = is_unitary(&u, tol::UNITARY);
            if !ok {
                return Err(Error::NotUnitary(r));
            }
            aligned.push(u);
        }
        Ok(Self {
            layout,
            unitaries: aligned,
            ancilla_dims: k,
        })
    }

    pub fn layout(&self) -> &SlotLayout {
        &self.layout
    }

    pub fn unitaries(&self) -> &[LinOp] {
        &self.unitaries
    }

    /// `k_0, …, k_{N+1}`.
    pub fn ancilla_dims(&self) -> &[usize] {
        &self.ancilla_dims
    }
}

/// Result of [`verify_comb_choi`]. `level_residuals[n]` is the residual of the
/// condition that fixes `R^{(n)}`.
#[derive(Clone, Debug)]
pub struct ChoiCombCheck {
    pub holds: bool,
    pub hermiticity: f64,
    pub min_eigenvalue: f64,
    pub level_residuals: Vec<f64>,
}

/// Positivity plus `Tr_{H_{2n+1}} R^{(n+1)} = R^{(n)} ⊗ 1_{H_{2n}}` for `n = N..0`, `R^{(0)} = 1`.
pub fn verify_comb_choi(r: &ChoiOp, layout: &SlotLayout, tol: f64) -> Result<ChoiCombCheck> {
    let full = layout.full_space();
    if !r.space().same_factors(&full) {
        return Err(Error::Layout(format!(
            "Choi operator on {} does not match layout {}",
            r.space(),
            full
        )));
    }
    let hermiticity = r.hermiticity_residual();
    let min_eigenvalue = r.min_eigenvalue();
    let n = layout.slots();
    let mut levels = vec![0.0; n + 1];
    let mut cur = r.op().permute_systems(&full.labels())?;
    for m in (0..=n).rev() {
        let t = cur.partial_trace(&[layout.label(2 * m + 1)])?;
        let d = layout.dim(2 * m);
        let rn = t
            .partial_trace(&[layout.label(2 * m)])?
            .scale(C64::new(1.0 / d as f64, 0.0));
        let expected = kron(
            &rn,
            &LinOp::identity(&SystemDims::from_factors(vec![layout.factors[2 * m].clone()])?),
        )?;
        levels[m] = max_abs(&(t.data() - expected.data()));
        cur = rn;
    }
    levels[0] = levels[0].max((cur.data()[(0, 0)] - C64::new(1.0, 0.0)).norm());
    let holds = hermiticity <= tol && min_eigenvalue >= -tol && levels.iter().all(|&x| x <= tol);
    Ok(ChoiCombCheck {
        holds,
        hermiticity,
        min_eigenvalue,
        level_residuals: levels,
    })
}

/// Result of [`verify_pure_comb_unitary`]. `slot_residuals[n-1]` belongs to slot n.
#[derive(Clone, Debug)]
pub struct UnitaryCombCheck {
    pub holds: bool,
    pub unitarity: f64,
    pub slot_residuals: Vec<f64>,
}

impl UnitaryCombCheck {
    pub fn max_residual(&self) -> f64 {
        self.slot_residuals.iter().fold(0.0, |a, &b| a.max(b))
    }
}

/// Orthonormal basis of the orthogonal complement of `v` in `ℂ^d`.
pub(crate) fn perp(v: &DVector<C64>) -> DMatrix<C64> {
    let d = v.len();
    let s = Subspace::from_columns(
        &SystemDims::single("x", d).unwrap(),
        &DMatrix::from_column_slice(d, 1, v.as_slice()),
        tol::RANK,
    )
    .unwrap();
    s.complement().basis().clone()
}

/// `I ⊗ … ⊗ local ⊗ … ⊗ I` over factors of `dims`, with `local` at position `pos`.
pub(crate) fn embed_local(dims: &[usize], pos: usize, local: &DMatrix<C64>) -> DMatrix<C64> {
    let mut m = DMatrix::<C64>::identity(1, 1);
    for (i, &d) in dims.iter().enumerate() {
        m = if i == pos {
            m.kronecker(local)
        } else {
            m.kronecker(&DMatrix::<C64>::identity(d, d))
        };
    }
    m
}

/// For each slot n and each α in the spanning family of `H_{2n}` (plus seeded extras),
/// checks `[U(… ⊗ α ⊗ …)] ⊥ [U(… ⊗ α^⊥ ⊗ …)]` reduced from `H_1 … H_{2n-1}` onto
/// `H_{2n+1} … H_{2N+1}`.
pub fn verify_pure_comb_unitary(u: &LinOp, layout: &SlotLayout, tol: f64) -> Result<UnitaryCombCheck> {
    let (ins, outs) = (layout.even_space(), layout.odd_space());
    let u = u.aligned_to(&ins, &outs).map_err(|e| Error::Layout(e.to_string()))?;
    let (ok, unitarity) = is_unitary(&u, tol::UNITARY);
    if !ok {
        return Err(Error::NotUnitary(unitarity));
    }
    let n = layout.slots();
    let even_dims = ins.dims();
    let mut slot_residuals = Vec::with_capacity(n);
    for s in 1..=n {
        let d = layout.dim(2 * s);
        let e: Vec<&str> = (1..=s).map(|m| layout.label(2 * m - 1)).collect();
        let f: Vec<&str> = (s..=n).map(|m| layout.label(2 * m + 1)).collect();
        let mut worst = 0.0f64;
        let mut family = spanning_family(d);
        family.extend(stability_vectors(d, s as u64));
        for alpha in &family {
            let a = DMatrix::from_column_slice(d, 1, alpha.as_slice());
            let abar = perp(alpha);
            if abar.ncols() == 0 {
                continue;
            }
            let va = Subspace::from_columns(&outs, &(u.data() * embed_local(&even_dims, s, &a)), tol::RANK)?;
            let vb = Subspace::from_columns(&outs, &(u.data() * embed_local(&even_dims, s, &abar)), tol::RANK)?;
            let ra = reduced_subspace(&va, &e, &f)?;
            let rb = reduced_subspace(&vb, &e, &f)?;
            worst = worst.max(ra.orthogonality_residual(&rb)?);
        }
        slot_residuals.push(worst);
    }
    Ok(UnitaryCombCheck {
        holds: slot_residuals.iter().all(|&r| r <= tol),
        unitarity,
        slot_residuals,
    })
}

/// Peels slots off the back of a pure comb unitary, producing the staircase
/// `U_N ⋯ U_0` with ancilla dims fixed by the dimension chain.
pub fn staircase_decompose(u: &LinOp, layout: &SlotLayout) -> Result<CombCircuit> {
    let check = verify_pure_comb_unitary(u, layout, tol::TEST)?;
    if !check.holds {
        return Err(Error::NotPureComb(check.max_residual()));
    }
    let n = layout.slots();
    let mut cur = u.aligned_to(&layout.even_space(), &layout.odd_space())?;
    let mut elements: Vec<LinOp> = Vec::with_capacity(n + 1);
    // Factors the current future label stands for, when it is a merged (H, ancilla) pair.
    let mut fut = layout.label(2 * n + 1).to_string();
    let mut fut_parts: Option<Vec<Factor>> = None;
    for s in (1..=n).rev() {
        let ao = layout.label(2 * s);
        let d_ao = layout.dim(2 * s);
        let p_space = cur.in_space().without(&[ao])?;
        let ai_space = cur.out_space().without(&[fut.as_str()])?;
        let (d_p, d_ai) = (p_space.total_dim(), ai_space.total_dim());
        let d_f = cur.out_space().dim_of(&fut).unwrap();
        let m = cur.data();

        // [U(P ⊗ |0⟩)]_{A_I → F}
        let v0 = DMatrix::from_fn(m.nrows(), d_p, |r, p| m[(r, p * d_ao)]);
        let v0 = Subspace::from_columns(cur.out_space(), &v0, tol::RANK)?;
        let red = reduced_subspace(&v0, &ai_space.labels(), &[fut.as_str()])?;
        let k = red.dim();
        if d_p != d_ai * k {
            return Err(Error::DimensionChain {
                slot: s,
                lhs: d_p,
                rhs: d_ai * k,
            });
        }
        if d_ao * k != d_f {
            return Err(Error::DimensionChain {
                slot: s,
                lhs: d_ao * k,
                rhs: d_f,
            });
        }
        let r = red.basis();

        // |i,x⟩^P = (⟨0|_{A_O}) U† (|i⟩ |x,0⟩^F)
        let bp = DMatrix::from_fn(d_p, d_ai * k, |p, col| {
            let (i, x) = (col / k, col % k);
            (0..d_f)
                .map(|f| r[(f, x)] * m[(i * d_f + f, p * d_ao)].conj())
                .sum::<C64>()
        });
        // |x,a⟩^F = ⟨i=0| U (|0,x⟩^P |a⟩)
        let bf = DMatrix::from_fn(d_f, k * d_ao, |f, col| {
            let (x, a) = (col / d_ao, col % d_ao);
            (0..d_p).map(|p| bp[(p, x)] * m[(f, p * d_ao + a)]).sum::<C64>()
        });

        let anc = Factor::new(ancilla_label(s), k);
        let un_in = SystemDims::from_factors(vec![layout.factors[2 * s].clone(), anc.clone()])?;
        let un_out = match &fut_parts {
            Some(parts) => SystemDims::from_factors(parts.clone())?,
            None => SystemDims::from_factors(vec![layout.factors[2 * s + 1].clone()])?,
        };
        let un = DMatrix::from_fn(d_f, d_ao * k, |f, col| {
            let (a, x) = (col / k, col % k);
            bf[(f, x * d_ao + a)]
        });
        elements.push(LinOp::new(un_in, un_out, un)?);

        let rest_out = ai_space.concat(&SystemDims::from_factors(vec![anc.clone()])?)?;
        let next = LinOp::new(p_space, rest_out, bp.adjoint())?;
        let h = layout.factors[2 * s - 1].clone();
        fut = format!("{}+{}", h.label, anc.label);
        fut_parts = Some(vec![h.clone(), anc.clone()]);
        cur = next.merge_out(&[h.label.as_str(), anc.label.as_str()], &fut)?;
    }
    let u0 = match &fut_parts {
        Some(parts) => cur.split_out(&fut, parts)?,
        None => cur,
    };
    elements.push(u0);
    elements.reverse();
    CombCircuit::new(layout.clone(), elements)
}

/// `U_N ⋯ U_1 U_0` as a unitary from `⊗H_{2n}` to `⊗H_{2n+1}`.
pub fn compose_staircase(c: &CombCircuit) -> Result<LinOp> {
    let l = &c.layout;
    let mut cur = c.unitaries[0].clone();
    for s in 1..=l.slots() {
        let out_s = SystemDims::from_factors(vec![l.factors[2 * s].clone()])?;
        cur = kron(&cur, &LinOp::identity(&out_s))?;
        cur = cur.apply_local(&c.unitaries[s])?;
    }
    cur.aligned_to(&l.even_space(), &l.odd_space())
}
