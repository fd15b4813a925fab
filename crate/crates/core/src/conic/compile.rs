//! Lowering of [`ConicProgram`]s to real linear matrix inequalities.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::ipm::{LmiBlock, LmiProblem, SymSparse};
use super::{ConicProgram, ConstraintKind, Sense, VarId, VarShape};
use crate::error::{Error, Result};
use crate::tensor::{LabeledMatrix, RegisterSystem, SparseMatrix, C64};

/// Scalar field of the compiled variables and blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    /// Real symmetric variables, n x n real blocks. Only valid for real data.
    Real,
    /// Hermitian variables, complex n x n blocks embedded as real 2n x 2n.
    Complex,
}

struct VarParams {
    id: VarId,
    system: RegisterSystem,
    offset: usize,
    basis: Vec<SparseMatrix>,
}

pub struct Compiled {
    pub problem: LmiProblem,
    pub field: Field,
    /// +1 for minimization, -1 for maximization.
    pub sign: f64,
    pub objective_constant: f64,
    vars: Vec<VarParams>,
    block_names: Vec<(String, usize)>,
}

/// [[Re H, -Im H], [Im H, Re H]]
pub fn embed_hermitian(h: &DMatrix<C64>) -> DMatrix<f64> {
    let n = h.nrows();
    let mut r = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            r[(i, j)] = z.re;
            r[(i + n, j + n)] = z.re;
            r[(i + n, j)] = z.im;
            r[(i, j + n)] = -z.im;
        }
    }
    r
}

/// Inverse of [`embed_hermitian`], averaging the redundant blocks.
pub fn unembed(r: &DMatrix<f64>) -> DMatrix<C64> {
    let n = r.nrows() / 2;
    DMatrix::from_fn(n, n, |i, j| {
        C64::new(
            0.5 * (r[(i, j)] + r[(i + n, j + n)]),
            0.5 * (r[(i + n, j)] - r[(i, j + n)]),
        )
    })
}

/// Compiles with complex Hermitian variables and the 2n x 2n real embedding.
pub fn real_embed(p: &ConicProgram) -> Result<Compiled> {
    compile(p, Field::Complex)
}

fn unit(system: &RegisterSystem, entries: Vec<(usize, usize, C64)>) -> SparseMatrix {
    SparseMatrix::new(system.clone(), entries).expect("basis entries lie inside the system")
}

fn var_basis(system: &RegisterSystem, shape: &VarShape, field: Field) -> Result<Vec<SparseMatrix>> {
    let n = system.dim();
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let positions: Vec<(usize, usize)> = match shape {
        VarShape::Full => (0..n).flat_map(|r| (r..n).map(move |c| (r, c))).collect(),
        VarShape::Support(p) => p.clone(),
        VarShape::Span(b) => {
            if field == Field::Real && b.iter().any(|m| !m.is_real()) {
                return Err(Error::param("complex span basis in a real compilation"));
            }
            return Ok(b.iter().map(SparseMatrix::from_dense).collect());
        }
    };
    let mut out = Vec::new();
    for (r, c) in positions {
        if r == c {
            out.push(unit(system, vec![(r, r, one)]));
        } else {
            out.push(unit(system, vec![(r, c, one), (c, r, one)]));
            if field == Field::Complex {
                out.push(unit(system, vec![(r, c, i), (c, r, -i)]));
            }
        }
    }
    Ok(out)
}

pub fn compile(p: &ConicProgram, field: Field) -> Result<Compiled> {
    if field == Field::Real && !p.is_real() {
        return Err(Error::param("program has complex data; compile with Field::Complex"));
    }
    let mut vars = Vec::with_capacity(p.vars.len());
    let mut offset = 0;
    for d in &p.vars {
        let basis = var_basis(&d.var.system, &d.shape, field)?;
        let len = basis.len();
        vars.push(VarParams { id: d.var.id, system: d.var.system.clone(), offset, basis });
        offset += len;
    }
    let num_params = offset;

    // param -> image of its basis matrix under an expression
    let images = |e: &super::Expr| -> Result<BTreeMap<usize, SparseMatrix>> {
        let mut acc: BTreeMap<usize, Vec<(usize, usize, C64)>> = BTreeMap::new();
        for t in e.terms() {
            let vp = &vars[t.var.0];
            for (k, b) in vp.basis.iter().enumerate() {
                let mut m = b.clone();
                for op in &t.ops {
                    m = op.apply_sparse(&m)?;
                }
                let slot = acc.entry(vp.offset + k).or_default();
                slot.extend(m.entries().iter().map(|&(r, c, v)| (r, c, v * t.coeff)));
            }
        }
        acc.into_iter()
            .map(|(k, entries)| {
                let mut s = SparseMatrix::new(e.system().clone(), entries)?;
                s.compress(1e-14);
                Ok((k, s))
            })
            .collect()
    };

    let mut blocks = Vec::new();
    let mut block_names = Vec::new();
    let mut eq_rows = Vec::new();
    let mut eq_rhs = Vec::new();
    let mut in_block = vec![false; num_params];
    for c in &p.constraints {
        let n = c.expr.system().dim();
        let constant = c
            .expr
            .constant_part()
            .map(|m| m.entries().clone())
            .unwrap_or_else(|| DMatrix::zeros(n, n));
        let imgs = images(&c.expr)?;
        match c.kind {
            ConstraintKind::Psd => {
                let (size, constant) = match field {
                    Field::Real => (n, constant.map(|z| z.re)),
                    Field::Complex => (2 * n, embed_hermitian(&constant)),
                };
                let mut coeffs = Vec::with_capacity(imgs.len());
                for (k, img) in imgs {
                    let mut entries = Vec::with_capacity(img.nnz() * 2);
                    for &(r, col, v) in img.entries() {
                        match field {
                            Field::Real => entries.push((r, col, v.re)),
                            Field::Complex => {
                                entries.push((r, col, v.re));
                                entries.push((r + n, col + n, v.re));
                                entries.push((r + n, col, v.im));
                                entries.push((r, col + n, -v.im));
                            }
                        }
                    }
                    entries.retain(|e| e.2 != 0.0);
                    if !entries.is_empty() {
                        in_block[k] = true;
                        coeffs.push((k, SymSparse { entries }));
                    }
                }
                blocks.push(LmiBlock { size, constant, coeffs });
                block_names.push((c.name.clone(), n));
            }
            ConstraintKind::Zero => {
                let mut rows: BTreeMap<(usize, usize, bool), Vec<(usize, f64)>> = BTreeMap::new();
                for (k, img) in &imgs {
                    for &(r, col, v) in img.entries() {
                        if r > col {
                            continue;
                        }
                        if v.re != 0.0 {
                            rows.entry((r, col, false)).or_default().push((*k, v.re));
                        }
                        if r < col && field == Field::Complex && v.im != 0.0 {
                            rows.entry((r, col, true)).or_default().push((*k, v.im));
                        }
                    }
                }
                for r in 0..n {
                    for col in r..n {
                        let z = constant[(r, col)];
                        if z.re != 0.0 {
                            rows.entry((r, col, false)).or_default();
                        }
                        if r < col && z.im != 0.0 {
                            rows.entry((r, col, true)).or_default();
                        }
                    }
                }
                for ((r, col, imag), row) in rows {
                    let z = constant[(r, col)];
                    eq_rhs.push(if imag { -z.im } else { -z.re });
                    eq_rows.push(row);
                }
            }
        }
    }
    if let Some(k) = in_block.iter().position(|&b| !b) {
        let v = vars.iter().rev().find(|v| v.offset <= k).expect("parameter belongs to a variable");
        return Err(Error::param(format!(
            "variable `{}` is not constrained by any PSD block",
            p.vars[v.id.0].var.name
        )));
    }

    let (sense, obj) = p
        .objective
        .as_ref()
        .ok_or_else(|| Error::param("program has no objective"))?;
    let sign = if *sense == Sense::Minimize { 1.0 } else { -1.0 };
    let mut objective = vec![0.0; num_params];
    for (k, img) in images(obj)? {
        objective[k] = sign * img.entries().iter().map(|e| e.2.re).sum::<f64>();
    }
    let objective_constant = obj.constant_part().map_or(0.0, |c| c.get(0, 0).re);

    Ok(Compiled {
        problem: LmiProblem { num_vars: num_params, objective, blocks, eq_rows, eq_rhs },
        field,
        sign,
        objective_constant,
        vars,
        block_names,
    })
}

impl Compiled {
    /// Maps a parameter vector back to complex matrix values.
    pub fn assignments(&self, y: &[f64]) -> HashMap<VarId, LabeledMatrix> {
        let mut out = HashMap::new();
        for v in &self.vars {
            let n = v.system.dim();
            let mut m = DMatrix::zeros(n, n);
            for (k, b) in v.basis.iter().enumerate() {
                let coef = y.get(v.offset + k).copied().unwrap_or(0.0);
                for &(r, c, z) in b.entries() {
                    m[(r, c)] += z * coef;
                }
            }
            let lm = LabeledMatrix::new(v.system.clone(), m).expect("dimensions are consistent");
            out.insert(v.id, lm);
        }
        out
    }

    /// Complex form of a block-sized real matrix (e.g. a dual block).
    pub fn block_to_complex(&self, block: usize, m: &DMatrix<f64>) -> DMatrix<C64> {
        match self.field {
            Field::Real => m.map(|x| C64::new(x, 0.0)),
            Field::Complex => {
                debug_assert_eq!(m.nrows(), 2 * self.block_names[block].1);
                unembed(m)
            }
        }
    }

    pub fn dump(&self) -> String {
        let p = &self.problem;
        let mut s = String::new();
        let _ = writeln!(s, "field {:?}", self.field);
        let _ = writeln!(
            s,
            "minimize {} * objective over {} parameters (constant {})",
            self.sign, p.num_vars, self.objective_constant
        );
        for (b, (name, n)) in p.blocks.iter().zip(&self.block_names) {
            let nnz: usize = b.coeffs.iter().map(|c| c.1.nnz()).sum();
            let _ = writeln!(
                s,
                "psd {name}: size {} (complex {n}), {} parameters, {nnz} nonzeros",
                b.size,
                b.coeffs.len()
            );
        }
        let _ = writeln!(s, "equalities: {}", p.eq_rows.len());
        s
    }
}
