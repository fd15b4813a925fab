//! Triplet-form matrices over a register system, used to push basis matrices
//! of decision variables through linear maps without densifying them.

use nalgebra::DMatrix;

use super::{LabeledMatrix, RegisterSystem, C64};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    system: RegisterSystem,
    entries: Vec<(usize, usize, C64)>,
}

/// Splits full indices into kept / selected sub-indices.
struct Splitter {
    strides: Vec<usize>,
    dims: Vec<usize>,
    mask: Vec<bool>,
    sub_strides: Vec<usize>,
}

impl Splitter {
    fn new(system: &RegisterSystem, mask: Vec<bool>) -> Self {
        let dims: Vec<usize> = system.registers().iter().map(|r| r.dim).collect();
        let strides = system.strides();
        let mut sub_strides = vec![0; dims.len()];
        let (mut sk, mut ss) = (1usize, 1usize);
        for i in (0..dims.len()).rev() {
            if mask[i] {
                sub_strides[i] = ss;
                ss *= dims[i];
            } else {
                sub_strides[i] = sk;
                sk *= dims[i];
            }
        }
        Splitter { strides, dims, mask, sub_strides }
    }

    /// (index over unmasked registers, index over masked registers)
    fn split(&self, idx: usize) -> (usize, usize) {
        let (mut k, mut s) = (0, 0);
        for i in 0..self.dims.len() {
            let d = (idx / self.strides[i]) % self.dims[i];
            if self.mask[i] {
                s += d * self.sub_strides[i];
            } else {
                k += d * self.sub_strides[i];
            }
        }
        (k, s)
    }

    /// Full-index contribution of the masked and unmasked digits respectively.
    fn split_full(&self, idx: usize) -> (usize, usize) {
        let (mut k, mut s) = (0, 0);
        for i in 0..self.dims.len() {
            let d = (idx / self.strides[i]) % self.dims[i] * self.strides[i];
            if self.mask[i] {
                s += d;
            } else {
                k += d;
            }
        }
        (k, s)
    }
}

impl SparseMatrix {
    pub fn new(system: RegisterSystem, entries: Vec<(usize, usize, C64)>) -> Result<Self> {
        let n = system.dim();
        if entries.iter().any(|&(r, c, _)| r >= n || c >= n) {
            return Err(Error::dims("sparse entry outside the system dimension"));
        }
        Ok(SparseMatrix { system, entries })
    }

    pub fn from_dense(m: &LabeledMatrix) -> Self {
        let n = m.dim();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let z = m.get(i, j);
                if z != C64::new(0.0, 0.0) {
                    entries.push((i, j, z));
                }
            }
        }
        SparseMatrix { system: m.system().clone(), entries }
    }

    pub fn system(&self) -> &RegisterSystem {
        &self.system
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> LabeledMatrix {
        let n = self.system.dim();
        let mut m = DMatrix::zeros(n, n);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        LabeledMatrix::new(self.system.clone(), m).expect("dimensions are consistent")
    }

    pub fn scale(mut self, s: f64) -> Self {
        for e in &mut self.entries {
            e.2 *= s;
        }
        self
    }

    pub fn partial_trace<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let mask = self.system.mask(labels)?;
        let kept = self.system.without(labels)?;
        let sp = Splitter::new(&self.system, mask);
        let entries = self
            .entries
            .iter()
            .filter_map(|&(r, c, v)| {
                let (kr, tr) = sp.split(r);
                let (kc, tc) = sp.split(c);
                (tr == tc).then_some((kr, kc, v))
            })
            .collect();
        Ok(SparseMatrix { system: kept, entries })
    }

    pub fn partial_transpose<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let sp = Splitter::new(&self.system, self.system.mask(labels)?);
        let entries = self
            .entries
            .iter()
            .map(|&(r, c, v)| {
                let (kr, tr) = sp.split_full(r);
                let (kc, tc) = sp.split_full(c);
                (kr + tc, kc + tr, v)
            })
            .collect();
        Ok(SparseMatrix { system: self.system.clone(), entries })
    }

    pub fn permute_registers<S: AsRef<str>>(&self, order: &[S]) -> Result<Self> {
        let (system, new_to_old) = self.system.permutation_map(order)?;
        let mut old_to_new = vec![0; new_to_old.len()];
        for (new, &old) in new_to_old.iter().enumerate() {
            old_to_new[old] = new;
        }
        let entries = self.entries.iter().map(|&(r, c, v)| (old_to_new[r], old_to_new[c], v)).collect();
        Ok(SparseMatrix { system, entries })
    }

    /// self ⊗ m
    pub fn kron_right(&self, m: &LabeledMatrix) -> Result<Self> {
        let system = self.system.concat(m.system())?;
        let other = SparseMatrix::from_dense(m);
        let n2 = m.dim();
        let mut entries = Vec::with_capacity(self.entries.len() * other.entries.len());
        for &(r, c, v) in &self.entries {
            for &(a, b, w) in &other.entries {
                entries.push((r * n2 + a, c * n2 + b, v * w));
            }
        }
        Ok(SparseMatrix { system, entries })
    }

    /// m ⊗ self
    pub fn kron_left(&self, m: &LabeledMatrix) -> Result<Self> {
        let system = m.system().concat(&self.system)?;
        let other = SparseMatrix::from_dense(m);
        let n = self.system.dim();
        let mut entries = Vec::with_capacity(self.entries.len() * other.entries.len());
        for &(a, b, w) in &other.entries {
            for &(r, c, v) in &self.entries {
                entries.push((a * n + r, b * n + c, v * w));
            }
        }
        Ok(SparseMatrix { system, entries })
    }

    /// Sorts entries, merges duplicates and drops entries below `tol` in modulus.
    pub fn compress(&mut self, tol: f64) {
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut out: Vec<(usize, usize, C64)> = Vec::with_capacity(self.entries.len());
        for &(r, c, v) in &self.entries {
            match out.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => out.push((r, c, v)),
            }
        }
        out.retain(|e| e.2.norm() > tol);
        self.entries = out;
    }
}
