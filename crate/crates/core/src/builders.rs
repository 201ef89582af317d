//! Worked examples and seeded random instances.
//!
//! Haar unitaries come from the QR decomposition of a complex Gaussian matrix with
//! the diagonal of R made real and positive. All generators are ChaCha8 seeded
//! from a `u64`, so equal seeds give bit-identical instances within one build.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::comb::{ancilla_label, compose_staircase, verify_pure_comb_unitary, CombCircuit, SlotLayout};
use crate::subspace::Subspace;
use crate::superchannel::{assemble_blocks, Block, TwoSlotLayout};
use crate::tensor::{Factor, LinOp, SystemDims, C64};
use crate::{tol, Error, Result};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// I.i.d. standard complex Gaussian entries.
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

pub fn haar_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    let qr = gaussian_matrix(dim, dim, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let z = r[(j, j)];
        let ph = if z.norm() > 0.0 {
            z / z.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let mut c = q.column_mut(j);
        c *= ph;
    }
    q
}

/// Unit vector with Gaussian direction.
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<C64> {
    let g = gaussian_matrix(dim, 1, rng);
    let n = g.norm();
    DVector::from_column_slice((g / C64::new(n, 0.0)).as_slice())
}

/// Haar-random unitary between two spaces of equal total dimension.
pub fn random_unitary(in_space: &SystemDims, out_space: &SystemDims, seed: u64) -> Result<LinOp> {
    if in_space.total_dim() != out_space.total_dim() {
        return Err(Error::Shape(format!("no unitary from {in_space} to {out_space}")));
    }
    let mut g = rng(seed);
    LinOp::new(
        in_space.clone(),
        out_space.clone(),
        haar_matrix(in_space.total_dim(), &mut g),
    )
}

/// `G G†` for a square complex Gaussian `G`, scaled to trace `dim(space)`.
pub fn random_positive(space: &SystemDims, seed: u64) -> LinOp {
    let d = space.total_dim();
    let g = gaussian_matrix(d, d, &mut rng(seed));
    let m = &g * g.adjoint();
    let t = m.trace().re;
    let m = m * C64::new(d as f64 / t, 0.0);
    LinOp::new(space.clone(), space.clone(), m).unwrap()
}

/// Identity wires for one causal order: `P → first input`, `first output → second input`,
/// `second output → F`, all of dimension `d`.
pub fn wire_comb(d: usize, a_first: bool) -> Result<LinOp> {
    let l = TwoSlotLayout::standard(d, d, d, d, d, d)?;
    let mut m = DMatrix::zeros(d * d * d, d * d * d);
    for p in 0..d {
        for a in 0..d {
            for b in 0..d {
                // output (AI, BI, F)
                let (ai, bi, f) = if a_first { (p, a, b) } else { (b, p, a) };
                m[((ai * d + bi) * d + f, (p * d + a) * d + b)] = C64::new(1.0, 0.0);
            }
        }
    }
    LinOp::new(l.in_space(), l.out_space(), m)
}

/// Embedding of `span{|c⟩} ⊗ ℂ^d` into `ℂ^{n·d}` with index `c·d + t`.
fn control_embedding(n: usize, c: usize, d: usize) -> DMatrix<C64> {
    DMatrix::from_fn(n * d, d, |r, t| {
        if r == c * d + t {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Quantum switch with wire dimension `d`. `P` and `F` have dimension `2d`, indexed as
/// `c·d + t` for control `c` and target `t`. Control 0 runs A then B, control 1 runs B then A.
pub fn build_quantum_switch(d: usize) -> Result<(LinOp, TwoSlotLayout)> {
    let layout = TwoSlotLayout::standard(2 * d, d, d, d, d, 2 * d)?;
    let ab = Block {
        unitary: wire_comb(d, true)?,
        embed_p: control_embedding(2, 0, d),
        embed_f: control_embedding(2, 0, d),
    };
    let ba = Block {
        unitary: wire_comb(d, false)?,
        embed_p: control_embedding(2, 1, d),
        embed_f: control_embedding(2, 1, d),
    };
    let u = build_direct_sum(&layout, Some(&ab), Some(&ba))?;
    Ok((u, layout))
}

/// The D = 3d example at d = 2. `P` and `F` have basis `|c,t⟩`, index `2c + t`.
/// For c ∈ {0,1}: `|c,t⟩|a⟩|b⟩ ↦ |t⟩_{A_I} |c⊕a⟩_{B_I} |a,b⟩_F`.
/// For c = 2: `|2,t⟩|a⟩|b⟩ ↦ |b⟩_{A_I} |t⟩_{B_I} |2,a⟩_F`.
pub fn build_d3d_example() -> (LinOp, TwoSlotLayout) {
    let layout = TwoSlotLayout::standard(6, 2, 2, 2, 2, 6).unwrap();
    let mut m = DMatrix::zeros(24, 24);
    let out = |ai: usize, bi: usize, f: usize| (ai * 2 + bi) * 6 + f;
    for c in 0..3 {
        for t in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let col = ((2 * c + t) * 2 + a) * 2 + b;
                    let row = if c < 2 {
                        out(t, c ^ a, 2 * a + b)
                    } else {
                        out(b, t, 4 + a)
                    };
                    m[(row, col)] = C64::new(1.0, 0.0);
                }
            }
        }
    }
    let u = LinOp::new(layout.in_space(), layout.out_space(), m).unwrap();
    (u, layout)
}

/// Composes bare staircase matrices. `mats[n]` maps `H_{2n} ⊗ A_n → H_{2n+1} ⊗ A_{n+1}`
/// (row-major in that factor order); the ancilla dims are read off the matrix sizes.
pub fn build_staircase_comb(mats: &[DMatrix<C64>], layout: &SlotLayout) -> Result<LinOp> {
    let n = layout.slots();
    if mats.len() != n + 1 {
        return Err(Error::Layout(format!("{} matrices for a {n}-slot comb", mats.len())));
    }
    let mut k = vec![1usize];
    let mut ops = Vec::with_capacity(n + 1);
    for (m, mat) in mats.iter().enumerate() {
        let din = layout.dim(2 * m) * k[m];
        if mat.ncols() != din || mat.nrows() != din {
            return Err(Error::DimensionChain {
                slot: m,
                lhs: din,
                rhs: mat.ncols(),
            });
        }
        let dout = layout.dim(2 * m + 1);
        if !din.is_multiple_of(dout) || (m == n && din != dout) {
            return Err(Error::DimensionChain {
                slot: m,
                lhs: din,
                rhs: dout,
            });
        }
        k.push(din / dout);
        let mut i = vec![layout.factors()[2 * m].clone()];
        if m > 0 {
            i.push(Factor::new(ancilla_label(m), k[m]));
        }
        let mut o = vec![layout.factors()[2 * m + 1].clone()];
        if m < n {
            o.push(Factor::new(ancilla_label(m + 1), k[m + 1]));
        }
        ops.push(LinOp::new(
            SystemDims::from_factors(i)?,
            SystemDims::from_factors(o)?,
            mat.clone(),
        )?);
    }
    compose_staircase(&CombCircuit::new(layout.clone(), ops)?)
}

/// Staircase of Haar-random unitaries with the ancilla dims forced by the layout.
pub fn random_pure_comb(layout: &SlotLayout, seed: u64) -> Result<LinOp> {
    let k = layout.ancilla_dims()?;
    let mut g = rng(seed);
    let mats: Vec<DMatrix<C64>> = (0..=layout.slots())
        .map(|m| haar_matrix(layout.dim(2 * m) * k[m], &mut g))
        .collect();
    build_staircase_comb(&mats, layout)
}

/// Embeds an A≺B and a B≺A pure comb on orthogonal splittings of P and F.
/// Either block may be absent.
pub fn build_direct_sum(
    layout: &TwoSlotLayout,
    a_before_b: Option<&Block>,
    b_before_a: Option<&Block>,
) -> Result<LinOp> {
    for (b, a_first) in [(a_before_b, true), (b_before_a, false)] {
        let Some(b) = b else { continue };
        let bl = layout.with_block_dims(b.p_dim(), b.f_dim())?;
        let comb = if a_first { bl.a_before_b() } else { bl.b_before_a() };
        let c = verify_pure_comb_unitary(&b.unitary, &comb, tol::TEST)?;
        if !c.holds {
            return Err(Error::NotPureComb(c.max_residual()));
        }
    }
    let blocks: Vec<&Block> = a_before_b.into_iter().chain(b_before_a).collect();
    assemble_blocks(layout, &blocks)
}

/// A seeded random direct sum together with the splittings it was built from.
#[derive(Clone, Debug)]
pub struct RandomDirectSum {
    pub unitary: LinOp,
    pub layout: TwoSlotLayout,
    pub a_before_b: Option<Block>,
    pub b_before_a: Option<Block>,
}

impl RandomDirectSum {
    fn span(m: &DMatrix<C64>, label: &str) -> Subspace {
        let s = SystemDims::single(label, m.nrows()).unwrap();
        Subspace::from_columns(&s, m, tol::RANK).unwrap()
    }

    /// `(P^{A≺B}, P^{B≺A})` as subspaces of P.
    pub fn p_split(&self) -> (Subspace, Subspace) {
        let l = &self.layout.p.label;
        let z = DMatrix::zeros(self.layout.p.dim, 0);
        (
            Self::span(self.a_before_b.as_ref().map_or(&z, |b| &b.embed_p), l),
            Self::span(self.b_before_a.as_ref().map_or(&z, |b| &b.embed_p), l),
        )
    }

    /// `(F^{A≺B}, F^{B≺A})` as subspaces of F.
    pub fn f_split(&self) -> (Subspace, Subspace) {
        let l = &self.layout.f.label;
        let z = DMatrix::zeros(self.layout.f.dim, 0);
        (
            Self::span(self.a_before_b.as_ref().map_or(&z, |b| &b.embed_f), l),
            Self::span(self.b_before_a.as_ref().map_or(&z, |b| &b.embed_f), l),
        )
    }
}

/// Random A≺B staircase on a `p_ab`-dimensional past and random B≺A staircase on a
/// `p_ba`-dimensional past, embedded along Haar-random splittings of P and F.
/// `dims` are `(A_I, A_O, B_I, B_O)`.
pub fn random_direct_sum(dims: [usize; 4], p_ab: usize, p_ba: usize, seed: u64) -> Result<RandomDirectSum> {
    let [ai, ao, bi, bo] = dims;
    let f_of = |p: usize| -> Result<usize> {
        let num = p * ao * bo;
        if !num.is_multiple_of(ai * bi) {
            return Err(Error::Layout(format!("past dim {p} gives a fractional future dim")));
        }
        Ok(num / (ai * bi))
    };
    let (f_ab, f_ba) = (f_of(p_ab)?, f_of(p_ba)?);
    let layout = TwoSlotLayout::standard(p_ab + p_ba, ai, ao, bi, bo, f_ab + f_ba)?;
    let mut g = rng(seed);
    let up = haar_matrix(p_ab + p_ba, &mut g);
    let uf = haar_matrix(f_ab + f_ba, &mut g);
    let mut block = |p: usize, f: usize, p0: usize, f0: usize, a_first: bool| -> Result<Option<Block>> {
        if p == 0 {
            return Ok(None);
        }
        let bl = layout.with_block_dims(p, f)?;
        let comb = if a_first { bl.a_before_b() } else { bl.b_before_a() };
        let unitary = random_pure_comb(&comb, g.random())?;
        Ok(Some(Block {
            unitary: unitary.aligned_to(&bl.in_space(), &bl.out_space())?,
            embed_p: up.columns(p0, p).into_owned(),
            embed_f: uf.columns(f0, f).into_owned(),
        }))
    };
    let a_before_b = block(p_ab, f_ab, 0, 0, true)?;
    let b_before_a = block(p_ba, f_ba, p_ab, f_ab, false)?;
    let unitary = build_direct_sum(&layout, a_before_b.as_ref(), b_before_a.as_ref())?;
    Ok(RandomDirectSum {
        unitary,
        layout,
        a_before_b,
        b_before_a,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::is_unitary;

    #[test]
    fn haar_is_unitary_and_deterministic() {
        let a = haar_matrix(4, &mut rng(3));
        let b = haar_matrix(4, &mut rng(3));
        assert_eq!(a, b);
        let s = SystemDims::single("X", 4).unwrap();
        let u = LinOp::new(s.clone(), s, a).unwrap();
        assert!(is_unitary(&u, 1e-12).0);
    }

    /// Row-major index of `digits` in `⊗dims`.
    fn at(digits: &[usize], dims: &[usize]) -> usize {
        digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
    }

    #[test]
    fn switch_first_branch() {
        let (u, _) = build_quantum_switch(2).unwrap();
        assert_eq!(u.data().nrows(), 16);
        assert!(is_unitary(&u, 0.0).0);
        // |0,t=1>_P |a=0> |b=1>  ->  |1>_AI |0>_BI |0,1>_F
        let col = at(&[0, 1, 0, 1], &[2, 2, 2, 2]);
        let row = at(&[1, 0, 1], &[2, 2, 4]);
        assert_eq!(u.data()[(row, col)], C64::new(1.0, 0.0));
    }

    #[test]
    fn d3d_branch_actions() {
        let (u, _) = build_d3d_example();
        assert!(is_unitary(&u, 0.0).0);
        // c=0,t=1,a=1,b=0 -> |1>_AI |1>_BI |1,0>_F
        let col = at(&[0, 1, 1, 0], &[3, 2, 2, 2]);
        assert_eq!(u.data()[(at(&[1, 1, 2], &[2, 2, 6]), col)], C64::new(1.0, 0.0));
        // c=2,t=1,a=0,b=1 -> |1>_BI |1>_AI |2,0>_F
        let col = at(&[2, 1, 0, 1], &[3, 2, 2, 2]);
        assert_eq!(u.data()[(at(&[1, 1, 4], &[2, 2, 6]), col)], C64::new(1.0, 0.0));
    }

    #[test]
    fn staircase_builder_checks_dims() {
        let layout = SlotLayout::standard(&[2, 2, 2, 2]).unwrap();
        let i2 = DMatrix::<C64>::identity(2, 2);
        let id = build_staircase_comb(&[i2.clone(), i2.clone()], &layout).unwrap();
        assert_eq!(id.data(), &DMatrix::<C64>::identity(4, 4));
        assert!(build_staircase_comb(&[i2.clone(), DMatrix::identity(3, 3)], &layout).is_err());
        assert!(build_staircase_comb(&[i2], &layout).is_err());
    }

    #[test]
    fn random_comb_seeds() {
        let layout = SlotLayout::standard(&[4, 2, 2, 4]).unwrap();
        let a = random_pure_comb(&layout, 11).unwrap();
        assert_eq!(a, random_pure_comb(&layout, 11).unwrap());
        assert_ne!(a, random_pure_comb(&layout, 12).unwrap());
        assert!(verify_pure_comb_unitary(&a, &layout, 1e-8).unwrap().holds);
    }
}
