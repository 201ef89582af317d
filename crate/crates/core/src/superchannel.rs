//! Pure two-slot superchannels: verification, the point and global decompositions of
//! the global past and future, and the split `U = U^{A≺B} ⊕ U^{B≺A}`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::builders::random_state;
use crate::choi::{choi_of_unitary, traced_choi};
use crate::comb::{perp, verify_comb_choi, verify_pure_comb_unitary, SlotLayout};
use crate::subspace::{reduced_subspace, Subspace};
use crate::tensor::{is_unitary, kron, max_abs, Factor, LinOp, SystemDims, C64};
use crate::{tol, Error, Result};

const STABILITY_SEED: u64 = 0x5eed_cafe_f00d_0001;

/// `{e_i} ∪ {(e_i + e_j)/√2} ∪ {(e_i + i e_j)/√2}` for `i < j`.
pub fn spanning_family(dim: usize) -> Vec<DVector<C64>> {
    let e = |i: usize| {
        let mut v = DVector::zeros(dim);
        v[i] = C64::new(1.0, 0.0);
        v
    };
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut out: Vec<DVector<C64>> = (0..dim).map(e).collect();
    for i in 0..dim {
        for j in i + 1..dim {
            out.push((e(i) + e(j)) * h);
        }
    }
    for i in 0..dim {
        for j in i + 1..dim {
            out.push((e(i) + e(j) * C64::new(0.0, 1.0)) * h);
        }
    }
    out
}

/// Four fixed pseudo-random unit vectors, distinct per `salt`.
pub(crate) fn stability_vectors(dim: usize, salt: u64) -> Vec<DVector<C64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(STABILITY_SEED ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    (0..4).map(|_| random_state(dim, &mut rng)).collect()
}

/// Labels and dims of `P, A_I, A_O, B_I, B_O, F`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoSlotLayout {
    pub p: Factor,
    pub ai: Factor,
    pub ao: Factor,
    pub bi: Factor,
    pub bo: Factor,
    pub f: Factor,
}

impl TwoSlotLayout {
    pub fn new(p: Factor, ai: Factor, ao: Factor, bi: Factor, bo: Factor, f: Factor) -> Result<Self> {
        let l = Self { p, ai, ao, bi, bo, f };
        SystemDims::from_factors(l.all())?;
        let lhs = l.p.dim * l.ao.dim * l.bo.dim;
        let rhs = l.ai.dim * l.bi.dim * l.f.dim;
        if lhs != rhs {
            return Err(Error::Layout(format!(
                "dim P·A_O·B_O = {lhs} but dim A_I·B_I·F = {rhs}"
            )));
        }
        Ok(l)
    }

    /// Labels `P, AI, AO, BI, BO, F`.
    pub fn standard(p: usize, ai: usize, ao: usize, bi: usize, bo: usize, f: usize) -> Result<Self> {
        Self::new(
            Factor::new("P", p),
            Factor::new("AI", ai),
            Factor::new("AO", ao),
            Factor::new("BI", bi),
            Factor::new("BO", bo),
            Factor::new("F", f),
        )
    }

    /// `[P, A_I, A_O, B_I, B_O, F]`.
    pub fn all(&self) -> Vec<Factor> {
        vec![
            self.p.clone(),
            self.ai.clone(),
            self.ao.clone(),
            self.bi.clone(),
            self.bo.clone(),
            self.f.clone(),
        ]
    }

    /// `P ⊗ A_O ⊗ B_O`.
    pub fn in_space(&self) -> SystemDims {
        SystemDims::from_factors(vec![self.p.clone(), self.ao.clone(), self.bo.clone()]).unwrap()
    }

    /// `A_I ⊗ B_I ⊗ F`.
    pub fn out_space(&self) -> SystemDims {
        SystemDims::from_factors(vec![self.ai.clone(), self.bi.clone(), self.f.clone()]).unwrap()
    }

    /// Comb layout with A's slot first.
    pub fn a_before_b(&self) -> SlotLayout {
        SlotLayout::new(self.all()).unwrap()
    }

    /// Comb layout with B's slot first.
    pub fn b_before_a(&self) -> SlotLayout {
        SlotLayout::new(vec![
            self.p.clone(),
            self.bi.clone(),
            self.bo.clone(),
            self.ai.clone(),
            self.ao.clone(),
            self.f.clone(),
        ])
        .unwrap()
    }

    /// Same labels, different global past/future dims.
    pub fn with_block_dims(&self, p: usize, f: usize) -> Result<Self> {
        Self::new(
            Factor::new(self.p.label.clone(), p),
            self.ai.clone(),
            self.ao.clone(),
            self.bi.clone(),
            self.bo.clone(),
            Factor::new(self.f.label.clone(), f),
        )
    }
}

/// Three mutually orthogonal subspaces tagged `|`, `□` and `−`.
#[derive(Clone, Debug)]
pub struct Triple {
    /// `|`: the part that does not depend on A's output.
    pub vert: Subspace,
    /// `□`: neither.
    pub boxed: Subspace,
    /// `−`: the part that does not depend on B's output.
    pub horiz: Subspace,
}

impl Triple {
    /// `(|, □, −)`.
    pub fn dims(&self) -> [usize; 3] {
        [self.vert.dim(), self.boxed.dim(), self.horiz.dim()]
    }

    fn parts(&self) -> [&Subspace; 3] {
        [&self.vert, &self.boxed, &self.horiz]
    }

    /// Largest pairwise orthogonality residual.
    pub fn orthogonality_residual(&self) -> Result<f64> {
        let p = self.parts();
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in i + 1..3 {
                worst = worst.max(p[i].orthogonality_residual(p[j])?);
            }
        }
        Ok(worst)
    }

    fn check_spans(&self, total: usize, what: &str) -> Result<()> {
        let r = self.orthogonality_residual()?;
        if r > tol::TEST {
            return Err(Error::Decomposition(format!(
                "{what}: parts not orthogonal (residual {r:.3e})"
            )));
        }
        let s: usize = self.dims().iter().sum();
        if s != total {
            return Err(Error::Decomposition(format!(
                "{what}: part dims {:?} do not add up to {total}",
                self.dims()
            )));
        }
        Ok(())
    }
}

/// Per-condition residuals of [`verify_pure_superchannel`].
#[derive(Clone, Debug)]
pub struct SuperchannelCheck {
    pub holds: bool,
    pub unitarity: f64,
    pub residual_a: f64,
    pub residual_b: f64,
    pub residual_c: f64,
}

impl SuperchannelCheck {
    pub fn max_residual(&self) -> f64 {
        self.residual_a.max(self.residual_b).max(self.residual_c)
    }
}

/// The operator aligned to `P ⊗ A_O ⊗ B_O → A_I ⊗ B_I ⊗ F`.
struct Ctx<'a> {
    u: LinOp,
    l: &'a TwoSlotLayout,
}

impl<'a> Ctx<'a> {
    fn new(u: &LinOp, l: &'a TwoSlotLayout) -> Result<Self> {
        let u = u
            .aligned_to(&l.in_space(), &l.out_space())
            .map_err(|e| Error::Layout(e.to_string()))?;
        let (ok, r) = is_unitary(&u, tol::UNITARY);
        if !ok {
            return Err(Error::NotUnitary(r));
        }
        Ok(Self { u, l })
    }

    fn labels(&self) -> (&str, &str, &str) {
        (&self.l.ai.label, &self.l.bi.label, &self.l.f.label)
    }

    /// `U(P ⊗ span(a) ⊗ span(b))` for basis matrices `a` on `A_O`, `b` on `B_O`.
    fn v(&self, a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<Subspace> {
        let ip = DMatrix::<C64>::identity(self.l.p.dim, self.l.p.dim);
        let s = ip.kronecker(a).kronecker(b);
        Subspace::from_columns(self.u.out_space(), &(self.u.data() * s), tol::RANK)
    }

    fn red_f(&self, w: &Subspace) -> Result<Subspace> {
        let (ai, bi, f) = self.labels();
        reduced_subspace(w, &[ai, bi], &[f])
    }
}

fn col(v: &DVector<C64>) -> DMatrix<C64> {
    DMatrix::from_column_slice(v.len(), 1, v.as_slice())
}

fn ident(d: usize) -> DMatrix<C64> {
    DMatrix::identity(d, d)
}

/// Conditions (A), (B), (C) over the spanning families of `A_O` and `B_O` plus seeded extras:
/// (A) `[V_{αβ}]_{A_I B_I→F} ⊥ [V_{ᾱβ̄}]_{A_I B_I→F}`,
/// (B) `[V_{A_O β}]_{B_I→A_I F} ⊥ [V_{A_O β̄}]_{B_I→A_I F}`,
/// (C) `[V_{α B_O}]_{A_I→B_I F} ⊥ [V_{ᾱ B_O}]_{A_I→B_I F}`.
pub fn verify_pure_superchannel(u: &LinOp, layout: &TwoSlotLayout, tol: f64) -> Result<SuperchannelCheck> {
    let ctx = Ctx::new(u, layout)?;
    let (ai, bi, f) = ctx.labels();
    let (da, db) = (layout.ao.dim, layout.bo.dim);
    let mut fa = spanning_family(da);
    fa.extend(stability_vectors(da, 101));
    let mut fb = spanning_family(db);
    fb.extend(stability_vectors(db, 102));
    let abar: Vec<DMatrix<C64>> = fa.iter().map(perp).collect();
    let bbar: Vec<DMatrix<C64>> = fb.iter().map(perp).collect();

    let mut res_a = 0.0f64;
    if da > 1 && db > 1 {
        for (alpha, ab) in fa.iter().zip(&abar) {
            for (beta, bb) in fb.iter().zip(&bbar) {
                let x = ctx.red_f(&ctx.v(&col(alpha), &col(beta))?)?;
                let y = ctx.red_f(&ctx.v(ab, bb)?)?;
                res_a = res_a.max(x.orthogonality_residual(&y)?);
            }
        }
    }
    let mut res_b = 0.0f64;
    if db > 1 {
        for (beta, bb) in fb.iter().zip(&bbar) {
            let x = reduced_subspace(&ctx.v(&ident(da), &col(beta))?, &[bi], &[ai, f])?;
            let y = reduced_subspace(&ctx.v(&ident(da), bb)?, &[bi], &[ai, f])?;
            res_b = res_b.max(x.orthogonality_residual(&y)?);
        }
    }
    let mut res_c = 0.0f64;
    if da > 1 {
        for (alpha, ab) in fa.iter().zip(&abar) {
            let x = reduced_subspace(&ctx.v(&col(alpha), &ident(db))?, &[ai], &[bi, f])?;
            let y = reduced_subspace(&ctx.v(ab, &ident(db))?, &[ai], &[bi, f])?;
            res_c = res_c.max(x.orthogonality_residual(&y)?);
        }
    }
    let (_, unitarity) = is_unitary(&ctx.u, tol::UNITARY);
    Ok(SuperchannelCheck {
        holds: res_a <= tol && res_b <= tol && res_c <= tol,
        unitarity,
        residual_a: res_a,
        residual_b: res_b,
        residual_c: res_c,
    })
}

fn unit(v: &DVector<C64>, what: &str) -> Result<DVector<C64>> {
    let n = v.norm();
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::Shape(format!("{what} is not a unit vector (norm {n})")));
    }
    Ok(v.clone())
}

struct Point {
    v: Subspace,
    f: Triple,
}

fn f_point(ctx: &Ctx, alpha: &DVector<C64>, beta: &DVector<C64>) -> Result<Point> {
    let (a, b) = (col(alpha), col(beta));
    let v = ctx.v(&a, &b)?;
    let fab = ctx.red_f(&v)?;
    let f_amb = fab.ambient().clone();
    let abar = perp(alpha);
    let bbar = perp(beta);
    let f_abar_b = if abar.ncols() == 0 {
        Subspace::zero(&f_amb)
    } else {
        ctx.red_f(&ctx.v(&abar, &b)?)?
    };
    let f_a_bbar = if bbar.ncols() == 0 {
        Subspace::zero(&f_amb)
    } else {
        ctx.red_f(&ctx.v(&a, &bbar)?)?
    };
    let vert = fab.intersect(&f_abar_b)?;
    let horiz = fab.intersect(&f_a_bbar)?;
    let boxed = fab.intersect(&vert.sum(&horiz)?.complement())?;
    let f = Triple { vert, boxed, horiz };
    f.check_spans(fab.dim(), "F point triple")?;
    Ok(Point { v, f })
}

fn p_from_point(ctx: &Ctx, pt: &Point, alpha: &DVector<C64>, beta: &DVector<C64>) -> Result<Triple> {
    let l = ctx.l;
    let (dab, dp) = (l.ai.dim * l.bi.dim, l.p.dim);
    let (dao, dbo) = (l.ao.dim, l.bo.dim);
    let ab = alpha.kronecker(beta);
    let part = |fs: &Subspace| -> Result<Subspace> {
        let proj = ident(dab).kronecker(&fs.projector());
        let vt = Subspace::from_columns(ctx.u.out_space(), &(proj * pt.v.basis()), tol::RANK)?;
        let back = ctx.u.data().adjoint() * vt.basis();
        let m = DMatrix::from_fn(dp, back.ncols(), |p, j| {
            (0..dao * dbo)
                .map(|s| ab[s].conj() * back[(p * dao * dbo + s, j)])
                .sum::<C64>()
        });
        let space = SystemDims::from_factors(vec![l.p.clone()])?;
        Subspace::from_columns(&space, &m, tol::RANK)
    };
    let t = Triple {
        vert: part(&pt.f.vert)?,
        boxed: part(&pt.f.boxed)?,
        horiz: part(&pt.f.horiz)?,
    };
    t.check_spans(dp, "P point triple")?;
    Ok(t)
}

/// `F_{αβ} = F^| ⊕ F^□ ⊕ F^−` with `F^| = F_{αβ} ∩ [V_{ᾱβ}]`, `F^− = F_{αβ} ∩ [V_{αβ̄}]`.
pub fn f_point_decomposition(
    u: &LinOp,
    layout: &TwoSlotLayout,
    alpha: &DVector<C64>,
    beta: &DVector<C64>,
) -> Result<Triple> {
    let ctx = Ctx::new(u, layout)?;
    Ok(f_point(&ctx, &unit(alpha, "alpha")?, &unit(beta, "beta")?)?.f)
}

/// `P = P^|_{αβ} ⊕ P^□_{αβ} ⊕ P^−_{αβ}`, pulled back from the F point triple.
pub fn p_point_decomposition(
    u: &LinOp,
    layout: &TwoSlotLayout,
    alpha: &DVector<C64>,
    beta: &DVector<C64>,
) -> Result<Triple> {
    let ctx = Ctx::new(u, layout)?;
    let (a, b) = (unit(alpha, "alpha")?, unit(beta, "beta")?);
    let pt = f_point(&ctx, &a, &b)?;
    p_from_point(&ctx, &pt, &a, &b)
}

fn global_p(ctx: &Ctx) -> Result<Triple> {
    let (da, db) = (ctx.l.ao.dim, ctx.l.bo.dim);
    let fa = spanning_family(da);
    let fb = spanning_family(db);
    let p_space = SystemDims::from_factors(vec![ctx.l.p.clone()])?;
    let point = |a: &DVector<C64>, b: &DVector<C64>| -> Result<Triple> {
        let pt = f_point(ctx, a, b)?;
        p_from_point(ctx, &pt, a, b)
    };
    let mut vert = Subspace::zero(&p_space);
    let mut horiz = Subspace::zero(&p_space);
    let mut boxed = Subspace::full(&p_space);
    for (i, a) in fa.iter().enumerate() {
        for (j, b) in fb.iter().enumerate() {
            let t = point(a, b)?;
            if j == 0 {
                vert = vert.sum(&t.vert)?;
            }
            if i == 0 {
                horiz = horiz.sum(&t.horiz)?;
            }
            boxed = boxed.intersect(&t.boxed)?;
        }
    }
    let ra = stability_vectors(da, 201);
    let rb = stability_vectors(db, 202);
    for (i, a) in ra.iter().enumerate() {
        let t = point(a, &fb[0])?;
        if !t.vert.is_subset(&vert, tol::TEST)? {
            return Err(Error::Stability(format!(
                "P^| at random alpha #{i} = {:?} is not in the family span",
                a.as_slice()
            )));
        }
    }
    for (i, b) in rb.iter().enumerate() {
        let t = point(&fa[0], b)?;
        if !t.horiz.is_subset(&horiz, tol::TEST)? {
            return Err(Error::Stability(format!(
                "P^- at random beta #{i} = {:?} is not in the family span",
                b.as_slice()
            )));
        }
    }
    for (i, (a, b)) in ra.iter().zip(&rb).enumerate() {
        let t = point(a, b)?;
        if !boxed.is_subset(&t.boxed, tol::TEST)? {
            return Err(Error::Stability(format!(
                "P^box at random pair #{i} does not contain the family intersection"
            )));
        }
    }
    let t = Triple { vert, boxed, horiz };
    t.check_spans(ctx.l.p.dim, "global P triple")?;
    Ok(t)
}

fn global_f(ctx: &Ctx, p: &Triple) -> Result<Triple> {
    let l = ctx.l;
    let io = ident(l.ao.dim * l.bo.dim);
    let dab = l.ai.dim * l.bi.dim;
    let part = |s: &Subspace| -> Result<Subspace> {
        let w = Subspace::from_columns(ctx.u.out_space(), &(ctx.u.data() * s.basis().kronecker(&io)), tol::RANK)?;
        let f = ctx.red_f(&w)?;
        if w.dim() != dab * f.dim() {
            return Err(Error::Decomposition(format!(
                "image of a P part has dim {} but A_I B_I times its F part has dim {}",
                w.dim(),
                dab * f.dim()
            )));
        }
        Ok(f)
    };
    let t = Triple {
        vert: part(&p.vert)?,
        boxed: part(&p.boxed)?,
        horiz: part(&p.horiz)?,
    };
    t.check_spans(l.f.dim, "global F triple")?;
    Ok(t)
}

/// `P = P̃^| ⊕ P̃^□ ⊕ P̃^−`: `P̃^|` sums `P^|_{α e_0}` over the family, `P̃^−` sums
/// `P^−_{e_0 β}`, `P̃^□` intersects `P^□_{αβ}` over the grid. Seeded extra vectors must not
/// change any part.
pub fn global_p_decomposition(u: &LinOp, layout: &TwoSlotLayout) -> Result<Triple> {
    global_p(&Ctx::new(u, layout)?)
}

/// `F̃^t = [U(P̃^t ⊗ A_O ⊗ B_O)]_{A_I B_I→F}`.
pub fn global_f_decomposition(u: &LinOp, layout: &TwoSlotLayout, p: &Triple) -> Result<Triple> {
    global_f(&Ctx::new(u, layout)?, p)
}

/// Orthonormal basis of `s` built by Gram–Schmidt on the projections of computational
/// basis vectors, taken in order of descending projected norm (ties by index).
pub fn canonical_embedding(s: &Subspace) -> DMatrix<C64> {
    let k = s.dim();
    let proj = s.projector();
    let d = proj.nrows();
    let mut order: Vec<usize> = (0..d).collect();
    let key = |j: usize| (proj[(j, j)].re * 1e9).round() as i64;
    order.sort_by(|&a, &b| key(b).cmp(&key(a)).then(a.cmp(&b)));
    let mut cols: Vec<DVector<C64>> = Vec::with_capacity(k);
    for j in order {
        if cols.len() == k {
            break;
        }
        let mut v: DVector<C64> = proj.column(j).into_owned();
        for _ in 0..2 {
            for q in &cols {
                let c = q.dotc(&v);
                v -= q * c;
            }
        }
        let n = v.norm();
        if n > 1e-6 {
            cols.push(v / C64::new(n, 0.0));
        }
    }
    if cols.len() < k {
        return s.basis().clone();
    }
    DMatrix::from_fn(d, k, |r, c| cols[c][r])
}

/// A pure comb together with isometric embeddings of its global past and future.
#[derive(Clone, Debug)]
pub struct Block {
    /// `P_block ⊗ A_O ⊗ B_O → A_I ⊗ B_I ⊗ F_block`, labels as in the layout.
    pub unitary: LinOp,
    /// `dim P × dim P_block`, orthonormal columns.
    pub embed_p: DMatrix<C64>,
    /// `dim F × dim F_block`, orthonormal columns.
    pub embed_f: DMatrix<C64>,
}

impl Block {
    pub fn p_dim(&self) -> usize {
        self.embed_p.ncols()
    }

    pub fn f_dim(&self) -> usize {
        self.embed_f.ncols()
    }

    fn validate(&self, layout: &TwoSlotLayout) -> Result<LinOp> {
        let bl = layout.with_block_dims(self.p_dim(), self.f_dim())?;
        if self.embed_p.nrows() != layout.p.dim || self.embed_f.nrows() != layout.f.dim {
            return Err(Error::Layout(format!(
                "embeddings have {} and {} rows, layout needs {} and {}",
                self.embed_p.nrows(),
                self.embed_f.nrows(),
                layout.p.dim,
                layout.f.dim
            )));
        }
        self.unitary
            .aligned_to(&bl.in_space(), &bl.out_space())
            .map_err(|e| Error::Layout(e.to_string()))
    }

    /// `(1 ⊗ E_F) U_block (E_P† ⊗ 1)` on the full spaces of `layout`.
    pub fn embedded(&self, layout: &TwoSlotLayout) -> Result<LinOp> {
        let u = self.validate(layout)?;
        let left = ident(layout.ai.dim * layout.bi.dim).kronecker(&self.embed_f);
        let right = self.embed_p.adjoint().kronecker(&ident(layout.ao.dim * layout.bo.dim));
        LinOp::new(layout.in_space(), layout.out_space(), left * u.data() * right)
    }
}

/// Sum of embedded blocks. The block past and future dims must add up to those of the layout.
pub fn assemble_blocks(layout: &TwoSlotLayout, blocks: &[&Block]) -> Result<LinOp> {
    let p: usize = blocks.iter().map(|b| b.p_dim()).sum();
    let f: usize = blocks.iter().map(|b| b.f_dim()).sum();
    if p != layout.p.dim || f != layout.f.dim {
        return Err(Error::Layout(format!(
            "block dims add up to P={p}, F={f} but the layout has P={}, F={}",
            layout.p.dim, layout.f.dim
        )));
    }
    let mut total = LinOp::zeros(layout.in_space(), layout.out_space());
    for b in blocks {
        total = total.add(&b.embedded(layout)?)?;
    }
    let (ok, r) = is_unitary(&total, tol::UNITARY);
    if !ok {
        return Err(Error::NotUnitary(r));
    }
    Ok(total)
}

/// Causal-structure tag of a decomposed superchannel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    Parallel,
    OrderedAB,
    OrderedBA,
    SwitchLike,
    GeneralDirectSum,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Parallel => "parallel",
            Classification::OrderedAB => "ordered-A<B",
            Classification::OrderedBA => "ordered-B<A",
            Classification::SwitchLike => "switch-like",
            Classification::GeneralDirectSum => "general-direct-sum",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `U = U^{A≺B} ⊕ U^{B≺A}` with `P^{A≺B} = P̃^| ⊕ P̃^□`, `P^{B≺A} = P̃^−` and likewise for F.
#[derive(Clone, Debug)]
pub struct DirectSumDecomp {
    pub layout: TwoSlotLayout,
    pub a_before_b: Option<Block>,
    pub b_before_a: Option<Block>,
    /// `(|, □, −)` dims of the global P triple.
    pub p_triple_dims: [usize; 3],
    pub f_triple_dims: [usize; 3],
    pub off_block_residual: f64,
    pub classification: Classification,
}

impl DirectSumDecomp {
    /// `(dim P^{A≺B}, dim P^{B≺A})`.
    pub fn p_dims(&self) -> (usize, usize) {
        (
            self.a_before_b.as_ref().map_or(0, Block::p_dim),
            self.b_before_a.as_ref().map_or(0, Block::p_dim),
        )
    }

    /// `(dim F^{A≺B}, dim F^{B≺A})`.
    pub fn f_dims(&self) -> (usize, usize) {
        (
            self.a_before_b.as_ref().map_or(0, Block::f_dim),
            self.b_before_a.as_ref().map_or(0, Block::f_dim),
        )
    }

    pub fn blocks(&self) -> Vec<&Block> {
        self.a_before_b.iter().chain(self.b_before_a.iter()).collect()
    }
}

fn restrict(ctx: &Ctx, ep: &DMatrix<C64>, ef: &DMatrix<C64>) -> DMatrix<C64> {
    let l = ctx.l;
    let left = ident(l.ai.dim * l.bi.dim).kronecker(&ef.adjoint());
    let right = ep.kronecker(&ident(l.ao.dim * l.bo.dim));
    left * ctx.u.data() * right
}

/// Verifies `u`, computes the global triples and splits `u` into two causally ordered blocks.
pub fn direct_sum_decompose(u: &LinOp, layout: &TwoSlotLayout) -> Result<DirectSumDecomp> {
    let check = verify_pure_superchannel(u, layout, tol::TEST)?;
    if !check.holds {
        return Err(Error::NotPureSuperchannel(check.max_residual()));
    }
    let ctx = Ctx::new(u, layout)?;
    let p = global_p(&ctx)?;
    let f = global_f(&ctx, &p)?;
    let ep_ab = canonical_embedding(&p.vert.sum(&p.boxed)?);
    let ep_ba = canonical_embedding(&p.horiz);
    let ef_ab = canonical_embedding(&f.vert.sum(&f.boxed)?);
    let ef_ba = canonical_embedding(&f.horiz);
    let off = max_abs(&restrict(&ctx, &ep_ab, &ef_ba)).max(max_abs(&restrict(&ctx, &ep_ba, &ef_ab)));
    if off > tol::TEST {
        return Err(Error::Decomposition(format!("off-block elements of size {off:.3e}")));
    }
    let make = |ep: DMatrix<C64>, ef: DMatrix<C64>, a_first: bool| -> Result<Option<Block>> {
        if ep.ncols() == 0 && ef.ncols() == 0 {
            return Ok(None);
        }
        let bl = layout.with_block_dims(ep.ncols().max(1), ef.ncols().max(1));
        let bl = match bl {
            Ok(bl) if ep.ncols() > 0 && ef.ncols() > 0 => bl,
            _ => {
                return Err(Error::Decomposition(format!(
                    "block with P dim {} and F dim {} cannot be unitary",
                    ep.ncols(),
                    ef.ncols()
                )))
            }
        };
        let data = restrict(&ctx, &ep, &ef);
        let unitary = LinOp::new(bl.in_space(), bl.out_space(), data)?;
        let comb = if a_first { bl.a_before_b() } else { bl.b_before_a() };
        let c = verify_pure_comb_unitary(&unitary, &comb, tol::TEST)?;
        if !c.holds {
            return Err(Error::Decomposition(format!(
                "{} block is not a pure comb (residual {:.3e})",
                if a_first { "A<B" } else { "B<A" },
                c.max_residual()
            )));
        }
        Ok(Some(Block {
            unitary,
            embed_p: ep,
            embed_f: ef,
        }))
    };
    let a_before_b = make(ep_ab, ef_ab, true)?;
    let b_before_a = make(ep_ba, ef_ba, false)?;
    let mut d = DirectSumDecomp {
        layout: layout.clone(),
        a_before_b,
        b_before_a,
        p_triple_dims: p.dims(),
        f_triple_dims: f.dims(),
        off_block_residual: off,
        classification: Classification::GeneralDirectSum,
    };
    d.classification = classify(&d);
    Ok(d)
}

/// Embeds and sums the blocks.
pub fn assemble(d: &DirectSumDecomp) -> Result<LinOp> {
    assemble_blocks(&d.layout, &d.blocks())
}

pub fn classify(d: &DirectSumDecomp) -> Classification {
    let l = &d.layout;
    let (pab, pba) = d.p_dims();
    if d.p_triple_dims[1] == l.p.dim {
        return Classification::Parallel;
    }
    if pba == 0 {
        return Classification::OrderedAB;
    }
    if pab == 0 {
        return Classification::OrderedBA;
    }
    let w = l.ai.dim;
    if [l.ao.dim, l.bi.dim, l.bo.dim].iter().all(|&x| x == w)
        && l.p.dim == 2 * w
        && l.f.dim == 2 * w
        && pab == w
        && pba == w
    {
        return Classification::SwitchLike;
    }
    Classification::GeneralDirectSum
}

/// One causally ordered summand of `Tr_F W`.
#[derive(Clone, Debug)]
pub struct TracedComponent {
    pub a_first: bool,
    /// Trace share of this component.
    pub weight: f64,
    /// `Tr_F` of the embedded block's Choi operator on `P ⊗ A_O ⊗ B_O ⊗ A_I ⊗ B_I`.
    pub choi: LinOp,
    /// Whether the block's own traced Choi passes the comb test with a trivial future.
    pub ordered: bool,
}

#[derive(Clone, Debug)]
pub struct TraceFutureReport {
    pub residual: f64,
    pub components: Vec<TracedComponent>,
}

/// `Tr_F` of the assembled Choi operator against the sum of the traced block Chois.
pub fn trace_future_check(d: &DirectSumDecomp) -> Result<TraceFutureReport> {
    let l = &d.layout;
    let flabel = l.f.label.as_str();
    let u = assemble(d)?;
    let total = traced_choi(&u, &[flabel])?;
    let norm = total.trace().re;
    let mut sum = LinOp::zeros(total.in_space().clone(), total.out_space().clone());
    let mut components = Vec::new();
    for (block, a_first) in [(&d.a_before_b, true), (&d.b_before_a, false)] {
        let Some(b) = block else { continue };
        let t = traced_choi(&b.embedded(l)?, &[flabel])?;
        sum = sum.add(&t)?;
        let weight = t.trace().re / norm;
        let bl = l.with_block_dims(b.p_dim(), b.f_dim())?;
        let own = choi_of_unitary(&b.unitary.aligned_to(&bl.in_space(), &bl.out_space())?)?;
        let traced = own.op().partial_trace(&[flabel])?;
        let trivial = SystemDims::single(flabel, 1)?;
        let r = kron(&traced, &LinOp::identity(&trivial))?;
        let r = crate::choi::ChoiOp::new(r, &[l.p.label.as_str(), &l.ao.label, &l.bo.label])?;
        let mut fs = bl.all();
        fs[5] = Factor::new(flabel, 1);
        if !a_first {
            fs.swap(1, 3);
            fs.swap(2, 4);
        }
        let comb = SlotLayout::new(fs)?;
        let ordered = verify_comb_choi(&r, &comb, tol::TEST)?.holds;
        components.push(TracedComponent {
            a_first,
            weight,
            choi: t,
            ordered,
        });
    }
    let residual = max_abs(&(total.data() - sum.aligned_to(total.in_space(), total.out_space())?.data()));
    Ok(TraceFutureReport { residual, components })
}
