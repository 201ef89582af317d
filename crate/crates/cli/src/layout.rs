//! Resolving layouts from `--dims` and file labels.

use supermap_core::{Factor, LinOp, SlotLayout, SystemDims, TwoSlotLayout};

use crate::CliError;

pub const ROLES: [&str; 6] = ["P", "AI", "AO", "BI", "BO", "F"];

/// Parses `P=4,AI=2,...` keeping the given order.
pub fn parse_dims(s: &str) -> Result<Vec<(String, usize)>, CliError> {
    let mut out: Vec<(String, usize)> = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (label, dim) = part
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("bad --dims entry '{part}', expected LABEL=DIM")))?;
        let label = label.trim();
        let dim: usize = dim
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("bad dimension in '{part}'")))?;
        if label.is_empty() || dim == 0 {
            return Err(CliError::usage(format!("bad --dims entry '{part}'")));
        }
        if out.iter().any(|(l, _)| l == label) {
            return Err(CliError::usage(format!("label {label} repeated in --dims")));
        }
        out.push((label.to_string(), dim));
    }
    if out.is_empty() {
        return Err(CliError::usage("empty --dims"));
    }
    Ok(out)
}

fn file_dim(op: &LinOp, label: &str) -> Option<usize> {
    op.in_space().dim_of(label).or_else(|| op.out_space().dim_of(label))
}

fn all_labels(op: &LinOp) -> Vec<String> {
    op.in_space()
        .labels()
        .into_iter()
        .chain(op.out_space().labels())
        .map(str::to_string)
        .collect()
}

/// Relabels `op` with `ins`/`outs` when the file carries other labels but matching totals.
fn relabel(op: &LinOp, ins: &SystemDims, outs: &SystemDims) -> Result<LinOp, CliError> {
    if op.in_space().total_dim() != ins.total_dim() || op.out_space().total_dim() != outs.total_dim() {
        return Err(CliError::usage(format!(
            "file is {}x{} but --dims give {}x{}",
            op.out_space().total_dim(),
            op.in_space().total_dim(),
            outs.total_dim(),
            ins.total_dim()
        )));
    }
    op.with_spaces(ins.clone(), outs.clone())
        .map_err(|e| CliError::usage(e.to_string()))
}

/// Checks `--dims` against any label the file shares with it.
fn check_conflicts(op: &LinOp, dims: &[(String, usize)]) -> Result<bool, CliError> {
    let mut shared = 0;
    for (label, d) in dims {
        if let Some(fd) = file_dim(op, label) {
            if fd != *d {
                return Err(CliError::usage(format!(
                    "--dims says {label}={d}, file says {label}={fd}"
                )));
            }
            shared += 1;
        }
    }
    Ok(shared == dims.len() && all_labels(op).len() == dims.len())
}

/// Two-slot layout with role labels `P, AI, AO, BI, BO, F`.
pub fn two_slot(op: &LinOp, dims: Option<&[(String, usize)]>) -> Result<(LinOp, TwoSlotLayout), CliError> {
    let roles: Vec<(String, usize)> = match dims {
        Some(d) => {
            let mut r = Vec::new();
            for role in ROLES {
                let (_, dim) = d
                    .iter()
                    .find(|(l, _)| l == role)
                    .ok_or_else(|| CliError::usage(format!("--dims is missing {role}")))?;
                r.push((role.to_string(), *dim));
            }
            if d.len() != ROLES.len() {
                return Err(CliError::usage(
                    "--dims for a two-slot layout takes exactly P,AI,AO,BI,BO,F",
                ));
            }
            r
        }
        None => ROLES
            .iter()
            .map(|&role| {
                file_dim(op, role)
                    .map(|d| (role.to_string(), d))
                    .ok_or_else(|| CliError::usage(format!("file has no {role} factor; pass --dims")))
            })
            .collect::<Result<_, _>>()?,
    };
    let get = |i: usize| roles[i].1;
    let layout = TwoSlotLayout::standard(get(0), get(1), get(2), get(3), get(4), get(5))
        .map_err(|e| CliError::usage(e.to_string()))?;
    let (ins, outs) = (layout.in_space(), layout.out_space());
    let matches = check_conflicts(op, &roles)?;
    let op = if matches {
        let sides_ok = ins.labels().iter().all(|l| op.in_space().contains(l))
            && outs.labels().iter().all(|l| op.out_space().contains(l));
        if !sides_ok {
            return Err(CliError::usage("file puts P/AO/BO or AI/BI/F on the wrong side"));
        }
        op.clone()
    } else {
        relabel(op, &ins, &outs)?
    };
    Ok((op, layout))
}

fn h_index(label: &str) -> Option<usize> {
    label.strip_prefix('H').and_then(|s| s.parse().ok())
}

/// Comb chain `H_0, H_1, …` in the order given by `--dims`, or read from the file:
/// labels `H0, H1, …` by index, or the two-slot roles with A's slot first.
pub fn comb_factors(op: &LinOp, dims: Option<&[(String, usize)]>) -> Result<Vec<(String, usize)>, CliError> {
    if let Some(d) = dims {
        return Ok(d.to_vec());
    }
    let labels = all_labels(op);
    let mut idx: Vec<(usize, String)> = Vec::new();
    for l in &labels {
        match h_index(l) {
            Some(i) => idx.push((i, l.clone())),
            None => break,
        }
    }
    if idx.len() == labels.len() {
        idx.sort();
        if idx.iter().enumerate().any(|(k, (i, _))| *i != k) {
            return Err(CliError::usage("file labels H0, H1, … are not contiguous; pass --dims"));
        }
        return Ok(idx
            .into_iter()
            .map(|(_, l)| (l.clone(), file_dim(op, &l).unwrap()))
            .collect());
    }
    if labels.len() == ROLES.len() && ROLES.iter().all(|r| labels.iter().any(|l| l == r)) {
        return Ok(ROLES
            .iter()
            .map(|&r| (r.to_string(), file_dim(op, r).unwrap()))
            .collect());
    }
    Err(CliError::usage(
        "cannot read a comb layout from the file labels; pass --dims",
    ))
}

fn slot_layout(chain: &[(String, usize)]) -> Result<SlotLayout, CliError> {
    SlotLayout::new(chain.iter().map(|(l, d)| Factor::new(l.clone(), *d)).collect())
        .map_err(|e| CliError::usage(e.to_string()))
}

/// Comb layout for an operator from the even factors to the odd ones.
pub fn comb_unitary(op: &LinOp, dims: Option<&[(String, usize)]>) -> Result<(LinOp, SlotLayout), CliError> {
    let chain = comb_factors(op, dims)?;
    let layout = slot_layout(&chain)?;
    let (ins, outs) = (layout.even_space(), layout.odd_space());
    let op = if check_conflicts(op, &chain)? {
        if !ins.labels().iter().all(|l| op.in_space().contains(l)) {
            return Err(CliError::usage("file inputs are not the even comb factors"));
        }
        op.clone()
    } else {
        relabel(op, &ins, &outs)?
    };
    Ok((op, layout))
}

/// Comb layout for a Choi operator acting on all comb factors.
pub fn comb_choi(op: &LinOp, dims: Option<&[(String, usize)]>) -> Result<(LinOp, SlotLayout), CliError> {
    if !op.is_square_on_same_space() {
        return Err(CliError::usage("a Choi operator must act on a single space"));
    }
    let chain = match dims {
        Some(d) => d.to_vec(),
        None => {
            let ins = op.in_space();
            let mut idx: Vec<(usize, (String, usize))> = Vec::new();
            for f in ins.factors() {
                let i = h_index(&f.label)
                    .ok_or_else(|| CliError::usage("Choi file labels must be H0, H1, …; pass --dims"))?;
                idx.push((i, (f.label.clone(), f.dim)));
            }
            idx.sort();
            if idx.iter().enumerate().any(|(k, (i, _))| *i != k) {
                return Err(CliError::usage("file labels H0, H1, … are not contiguous; pass --dims"));
            }
            idx.into_iter().map(|(_, f)| f).collect()
        }
    };
    let layout = slot_layout(&chain)?;
    let full = layout.full_space();
    let matches = chain.len() == op.in_space().len() && {
        let mut ok = true;
        for (l, d) in &chain {
            match op.in_space().dim_of(l) {
                Some(fd) if fd == *d => {}
                Some(fd) => {
                    return Err(CliError::usage(format!("--dims says {l}={d}, file says {l}={fd}")));
                }
                None => ok = false,
            }
        }
        ok
    };
    let op = if matches {
        op.clone()
    } else {
        relabel(op, &full, &full)?
    };
    Ok((op, layout))
}
