use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use supermap_core::builders::{
    build_d3d_example, build_quantum_switch, random_positive, random_pure_comb, random_unitary,
};
use supermap_core::choi::ChoiOp;
use supermap_core::comb::{compose_staircase, staircase_decompose, verify_comb_choi, verify_pure_comb_unitary};
use supermap_core::superchannel::{
    assemble, assemble_blocks, direct_sum_decompose, trace_future_check, verify_pure_superchannel, Block,
};
use supermap_core::tensor::max_abs;
use supermap_core::{matrix_file, CombCircuit, Error, Factor, LinOp, MatrixFile, SlotLayout, SystemDims, C64};
use supermap_core::{tol, TwoSlotLayout};

use crate::layout::{self, parse_dims, ROLES};
use crate::report::{BlockDims, InputDigest, Report, Verdict};
use crate::{with_suffix, BuildName, CliError, Command, SplitKind, VerifyKind};

pub fn dispatch(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Verify {
            file,
            kind,
            dims,
            tol,
            json,
        } => verify(&file, kind, dims.as_deref(), tol, json),
        Command::Decompose {
            file,
            kind,
            out,
            dims,
            json,
        } => decompose(&file, kind, &out, dims.as_deref(), json),
        Command::Build {
            name,
            dim,
            seed,
            dims,
            out,
        } => build(name, dim, seed, dims.as_deref(), &out),
        Command::Assemble { files, kind, out } => assemble_cmd(&files, kind, &out),
    }
}

fn load(path: &Path) -> Result<(LinOp, InputDigest), CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|_| CliError::usage(format!("{}: not UTF-8", path.display())))?;
    let op = MatrixFile::from_json(text)
        .and_then(|f| f.to_linop())
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    Ok((op, InputDigest::of(path, &bytes)))
}

fn save(op: &LinOp, path: &Path) -> Result<(), CliError> {
    matrix_file::save(op, path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn parse_opt(dims: Option<&str>) -> Result<Option<Vec<(String, usize)>>, CliError> {
    dims.map(parse_dims).transpose()
}

/// Library errors that mean "the input is not what the command expects" rather than bad usage.
fn is_negative(e: &Error) -> bool {
    matches!(
        e,
        Error::NotUnitary(_)
            | Error::NotPureComb(_)
            | Error::NotPureSuperchannel(_)
            | Error::Decomposition(_)
            | Error::Stability(_)
            | Error::DimensionChain { .. }
    )
}

fn record(rep: &mut Report, e: Error) -> Result<(), CliError> {
    if !is_negative(&e) {
        return Err(e.into());
    }
    if let Error::NotUnitary(r) = e {
        rep.residuals.insert("unitarity".into(), r);
    }
    rep.fail(e.to_string());
    Ok(())
}

fn emit(rep: &Report, json: bool) -> i32 {
    if json {
        println!("{}", rep.to_json());
    } else {
        print!("{}", rep.human());
    }
    match rep.verdict {
        Verdict::Pass => 0,
        Verdict::Fail => 1,
    }
}

fn kind_name<T: clap::ValueEnum>(k: &T) -> String {
    k.to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default()
}

fn verify(file: &Path, kind: VerifyKind, dims: Option<&str>, test_tol: f64, json: bool) -> Result<i32, CliError> {
    if !(test_tol.is_finite() && test_tol > 0.0) {
        return Err(CliError::usage("--tol must be a positive number"));
    }
    let dims = parse_opt(dims)?;
    let (op, digest) = load(file)?;
    let mut rep = Report::new("verify", &kind_name(&kind), test_tol);
    rep.inputs.push(digest);
    match kind {
        VerifyKind::PureSuperchannel => {
            let (op, l) = layout::two_slot(&op, dims.as_deref())?;
            match verify_pure_superchannel(&op, &l, test_tol) {
                Ok(c) => {
                    rep.residuals.insert("unitarity".into(), c.unitarity);
                    rep.residuals.insert("condition_a".into(), c.residual_a);
                    rep.residuals.insert("condition_b".into(), c.residual_b);
                    rep.residuals.insert("condition_c".into(), c.residual_c);
                    if !c.holds {
                        rep.fail("pure-superchannel conditions violated");
                    }
                }
                Err(e) => record(&mut rep, e)?,
            }
        }
        VerifyKind::CombUnitary => {
            let (op, l) = layout::comb_unitary(&op, dims.as_deref())?;
            match verify_pure_comb_unitary(&op, &l, test_tol) {
                Ok(c) => {
                    rep.residuals.insert("unitarity".into(), c.unitarity);
                    for (n, r) in c.slot_residuals.iter().enumerate() {
                        rep.residuals.insert(format!("slot_{}", n + 1), *r);
                    }
                    if !c.holds {
                        rep.fail("pure-comb conditions violated");
                    }
                }
                Err(e) => record(&mut rep, e)?,
            }
        }
        VerifyKind::CombChoi => {
            let (op, l) = layout::comb_choi(&op, dims.as_deref())?;
            let inputs = l.even_space();
            let r = ChoiOp::new(op, &inputs.labels())?;
            match verify_comb_choi(&r, &l, test_tol) {
                Ok(c) => {
                    rep.residuals.insert("hermiticity".into(), c.hermiticity);
                    rep.residuals.insert("min_eigenvalue".into(), c.min_eigenvalue);
                    for (n, r) in c.level_residuals.iter().enumerate() {
                        rep.residuals.insert(format!("level_{n}"), *r);
                    }
                    if !c.holds {
                        rep.fail("comb normalisation conditions violated");
                    }
                }
                Err(e) => record(&mut rep, e)?,
            }
        }
    }
    Ok(emit(&rep, json))
}

fn embedding(m: &DMatrix<C64>, full: &str) -> Result<LinOp, CliError> {
    Ok(LinOp::new(
        SystemDims::single("block", m.ncols())?,
        SystemDims::single(full, m.nrows())?,
        m.clone(),
    )?)
}

fn write_out(rep: &mut Report, op: &LinOp, path: PathBuf) -> Result<(), CliError> {
    save(op, &path)?;
    rep.outputs.push(path.display().to_string());
    Ok(())
}

fn write_staircase(rep: &mut Report, c: &CombCircuit, stem: &Path, key: &str) -> Result<(), CliError> {
    rep.ancilla_dims.insert(key.into(), c.ancilla_dims().to_vec());
    for (n, u) in c.unitaries().iter().enumerate() {
        write_out(rep, u, with_suffix(stem, &format!(".u{n}.json")))?;
    }
    Ok(())
}

fn decompose(file: &Path, kind: SplitKind, out: &Path, dims: Option<&str>, json: bool) -> Result<i32, CliError> {
    let dims = parse_opt(dims)?;
    let (op, digest) = load(file)?;
    let mut rep = Report::new("decompose", &kind_name(&kind), tol::TEST);
    rep.inputs.push(digest);
    match kind {
        SplitKind::DirectSum => {
            let (op, l) = layout::two_slot(&op, dims.as_deref())?;
            match direct_sum_decompose(&op, &l) {
                Ok(d) => {
                    rep.classification = Some(d.classification.as_str().into());
                    rep.triple_dims.insert("P".into(), d.p_triple_dims);
                    rep.triple_dims.insert("F".into(), d.f_triple_dims);
                    rep.residuals.insert("off_block".into(), d.off_block_residual);
                    let back = assemble(&d)?.aligned_to(op.in_space(), op.out_space())?;
                    rep.residuals
                        .insert("reassembly".into(), max_abs(&(back.data() - op.data())));
                    rep.residuals
                        .insert("trace_future".into(), trace_future_check(&d)?.residual);
                    for (name, block, a_first) in [("ab", &d.a_before_b, true), ("ba", &d.b_before_a, false)] {
                        let Some(b) = block else { continue };
                        rep.block_dims.insert(
                            name.into(),
                            BlockDims {
                                p: b.p_dim(),
                                f: b.f_dim(),
                            },
                        );
                        let stem = with_suffix(out, &format!(".{name}"));
                        write_out(&mut rep, &b.unitary, with_suffix(&stem, ".json"))?;
                        write_out(
                            &mut rep,
                            &embedding(&b.embed_p, &l.p.label)?,
                            with_suffix(&stem, ".embed_p.json"),
                        )?;
                        write_out(
                            &mut rep,
                            &embedding(&b.embed_f, &l.f.label)?,
                            with_suffix(&stem, ".embed_f.json"),
                        )?;
                        let bl = l.with_block_dims(b.p_dim(), b.f_dim())?;
                        let comb = if a_first { bl.a_before_b() } else { bl.b_before_a() };
                        match staircase_decompose(&b.unitary, &comb) {
                            Ok(c) => write_staircase(&mut rep, &c, &stem, name)?,
                            Err(e) => record(&mut rep, e)?,
                        }
                    }
                }
                Err(e) => record(&mut rep, e)?,
            }
        }
        SplitKind::Staircase => {
            let (op, l) = layout::comb_unitary(&op, dims.as_deref())?;
            match staircase_decompose(&op, &l) {
                Ok(c) => {
                    let back = compose_staircase(&c)?.aligned_to(op.in_space(), op.out_space())?;
                    rep.residuals
                        .insert("recomposition".into(), max_abs(&(back.data() - op.data())));
                    write_staircase(&mut rep, &c, out, "comb")?;
                }
                Err(e) => record(&mut rep, e)?,
            }
        }
    }
    let report_path = with_suffix(out, ".report.json");
    rep.outputs.push(report_path.display().to_string());
    fs::write(&report_path, rep.to_json() + "\n")
        .map_err(|e| CliError::usage(format!("{}: {e}", report_path.display())))?;
    Ok(emit(&rep, json))
}

fn is_roles(dims: &[(String, usize)]) -> bool {
    dims.len() == ROLES.len() && ROLES.iter().all(|r| dims.iter().any(|(l, _)| l == r))
}

fn role_layout(dims: &[(String, usize)]) -> Result<TwoSlotLayout, CliError> {
    let get = |r: &str| dims.iter().find(|(l, _)| l == r).map(|(_, d)| *d).unwrap();
    Ok(TwoSlotLayout::standard(
        get("P"),
        get("AI"),
        get("AO"),
        get("BI"),
        get("BO"),
        get("F"),
    )?)
}

fn chain_layout(dims: &[(String, usize)]) -> Result<SlotLayout, CliError> {
    Ok(SlotLayout::new(
        dims.iter().map(|(l, d)| Factor::new(l.clone(), *d)).collect(),
    )?)
}

const DEFAULT_TWO_SLOT: &str = "P=4,AI=2,AO=2,BI=2,BO=2,F=4";
const DEFAULT_CHOI: &str = "H0=2,H1=2,H2=2,H3=2";

fn build(name: BuildName, dim: usize, seed: u64, dims: Option<&str>, out: &Path) -> Result<i32, CliError> {
    let op = match name {
        BuildName::Switch => build_quantum_switch(dim)?.0,
        BuildName::D3d => build_d3d_example().0,
        BuildName::RandomUnitary => {
            let d = parse_dims(dims.unwrap_or(DEFAULT_TWO_SLOT))?;
            let (ins, outs) = if is_roles(&d) {
                let l = role_layout(&d)?;
                (l.in_space(), l.out_space())
            } else {
                let l = chain_layout(&d)?;
                (l.even_space(), l.odd_space())
            };
            random_unitary(&ins, &outs, seed)?
        }
        BuildName::RandomComb => {
            random_pure_comb(&chain_layout(&parse_dims(dims.unwrap_or(DEFAULT_TWO_SLOT))?)?, seed)?
        }
        BuildName::RandomChoi => random_positive(
            &chain_layout(&parse_dims(dims.unwrap_or(DEFAULT_CHOI))?)?.full_space(),
            seed,
        ),
    };
    save(&op, out)?;
    println!("wrote {} ({}x{})", out.display(), op.data().nrows(), op.data().ncols());
    Ok(0)
}

fn stem_of(path: &Path) -> PathBuf {
    let s = path.to_string_lossy();
    PathBuf::from(s.strip_suffix(".json").unwrap_or(&s).to_string())
}

fn one_factor(s: &SystemDims, what: &str, path: &Path) -> Result<Factor, CliError> {
    match s.factors() {
        [f] => Ok(f.clone()),
        _ => Err(CliError::usage(format!(
            "{}: {what} must be a single factor",
            path.display()
        ))),
    }
}

fn assemble_cmd(files: &[PathBuf], kind: SplitKind, out: &Path) -> Result<i32, CliError> {
    let op = match kind {
        SplitKind::DirectSum => {
            let mut layout: Option<TwoSlotLayout> = None;
            let mut blocks = Vec::new();
            for f in files {
                let (u, _) = load(f)?;
                let stem = stem_of(f);
                let (ep, _) = load(&with_suffix(&stem, ".embed_p.json"))?;
                let (ef, _) = load(&with_suffix(&stem, ".embed_f.json"))?;
                let (u, bl) = layout::two_slot(&u, None)?;
                let p = one_factor(ep.out_space(), "embedding output", f)?;
                let fut = one_factor(ef.out_space(), "embedding output", f)?;
                if p.label != bl.p.label || fut.label != bl.f.label {
                    return Err(CliError::usage(format!(
                        "{}: embeddings do not map into P and F",
                        f.display()
                    )));
                }
                let full = TwoSlotLayout::new(p, bl.ai.clone(), bl.ao.clone(), bl.bi.clone(), bl.bo.clone(), fut)?;
                match &layout {
                    Some(l) if *l != full => {
                        return Err(CliError::usage(format!(
                            "{}: block spaces disagree with the first block",
                            f.display()
                        )))
                    }
                    _ => layout = Some(full),
                }
                blocks.push(Block {
                    unitary: u,
                    embed_p: ep.data().clone(),
                    embed_f: ef.data().clone(),
                });
            }
            let l = layout.unwrap();
            if let [b] = blocks.as_slice() {
                b.embedded(&l)?
            } else {
                assemble_blocks(&l, &blocks.iter().collect::<Vec<_>>())?
            }
        }
        SplitKind::Staircase => {
            let mut factors = Vec::new();
            let mut elems = Vec::new();
            for f in files {
                let (u, _) = load(f)?;
                let pick = |s: &SystemDims| -> Result<Factor, CliError> {
                    let own: Vec<&Factor> = s.factors().iter().filter(|x| !x.label.starts_with("anc")).collect();
                    match own.as_slice() {
                        [x] => Ok((*x).clone()),
                        _ => Err(CliError::usage(format!(
                            "{}: expected one non-ancilla factor per side",
                            f.display()
                        ))),
                    }
                };
                factors.push(pick(u.in_space())?);
                factors.push(pick(u.out_space())?);
                elems.push(u);
            }
            compose_staircase(&CombCircuit::new(SlotLayout::new(factors)?, elems)?)?
        }
    };
    save(&op, out)?;
    println!("wrote {} ({}x{})", out.display(), op.data().nrows(), op.data().ncols());
    Ok(0)
}
