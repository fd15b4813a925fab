//! Dense complex matrices acting on an ordered list of named tensor factors.
//!
//! Basis indices are row-major over the registers: the first register is the
//! most significant digit, matching the usual Kronecker convention.

mod sparse;

pub use sparse::SparseMatrix;

use std::collections::HashSet;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Register {
    pub label: String,
    pub dim: usize,
}

impl Register {
    pub fn new(label: impl Into<String>, dim: usize) -> Self {
        Register { label: label.into(), dim }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RegisterSystem {
    registers: Vec<Register>,
}

impl RegisterSystem {
    pub fn new(registers: Vec<Register>) -> Result<Self> {
        let mut seen = HashSet::new();
        for r in &registers {
            if r.dim == 0 {
                return Err(Error::dims(format!("register `{}` has dimension 0", r.label)));
            }
            if !seen.insert(r.label.as_str()) {
                return Err(Error::DuplicateLabel(r.label.clone()));
            }
        }
        Ok(RegisterSystem { registers })
    }

    pub fn from_pairs(pairs: &[(&str, usize)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(l, d)| Register::new(l, d)).collect())
    }

    /// The system with no registers; its matrices are 1x1 scalars.
    pub fn scalar() -> Self {
        RegisterSystem::default()
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn len(&self) -> usize {
        self.registers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.registers.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.registers.iter().map(|r| r.dim).product()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.registers.iter().map(|r| r.label.as_str()).collect()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.registers.iter().position(|r| r.label == label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        self.position(label)
            .map(|i| self.registers[i].dim)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Product dimension of the listed registers.
    pub fn dim_of_all<S: AsRef<str>>(&self, labels: &[S]) -> Result<usize> {
        labels.iter().map(|l| self.dim_of(l.as_ref())).product()
    }

    pub fn concat(&self, other: &RegisterSystem) -> Result<Self> {
        let mut regs = self.registers.clone();
        regs.extend(other.registers.iter().cloned());
        Self::new(regs)
    }

    /// Registers named in `labels`, kept in this system's order.
    pub fn subsystem<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let mask = self.mask(labels)?;
        Ok(self.filter(&mask, true))
    }

    /// Registers not named in `labels`, kept in this system's order.
    pub fn without<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let mask = self.mask(labels)?;
        Ok(self.filter(&mask, false))
    }

    pub(crate) fn mask<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.registers.len()];
        for l in labels {
            let i = self
                .position(l.as_ref())
                .ok_or_else(|| Error::UnknownLabel(l.as_ref().to_string()))?;
            if mask[i] {
                return Err(Error::DuplicateLabel(l.as_ref().to_string()));
            }
            mask[i] = true;
        }
        Ok(mask)
    }

    fn filter(&self, mask: &[bool], keep: bool) -> Self {
        RegisterSystem {
            registers: self
                .registers
                .iter()
                .zip(mask)
                .filter(|(_, &m)| m == keep)
                .map(|(r, _)| r.clone())
                .collect(),
        }
    }

    pub(crate) fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.registers.len()];
        for i in (0..self.registers.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.registers[i + 1].dim;
        }
        strides
    }

    /// Full-system offsets of each basis index of the masked registers.
    ///
    /// With `keep` the offsets of registers where `mask` is true, otherwise
    /// of the complement. Any full index splits uniquely as
    /// `offsets(mask, true)[a] + offsets(mask, false)[b]`.
    pub(crate) fn offsets(&self, mask: &[bool], keep: bool) -> Vec<usize> {
        let strides = self.strides();
        let mut offs = vec![0usize];
        for (i, r) in self.registers.iter().enumerate() {
            if mask[i] != keep {
                continue;
            }
            let mut next = Vec::with_capacity(offs.len() * r.dim);
            for &o in &offs {
                for d in 0..r.dim {
                    next.push(o + d * strides[i]);
                }
            }
            offs = next;
        }
        offs
    }

    /// For a reordering of this system, the old index of every new basis index.
    pub(crate) fn permutation_map<S: AsRef<str>>(&self, order: &[S]) -> Result<(Self, Vec<usize>)> {
        if order.len() != self.registers.len() {
            return Err(Error::NotPermutation(format!(
                "expected {} labels, got {}",
                self.registers.len(),
                order.len()
            )));
        }
        let mask = self
            .mask(order)
            .map_err(|e| Error::NotPermutation(e.to_string()))?;
        debug_assert!(mask.iter().all(|&m| m));
        let strides = self.strides();
        let mut offs = vec![0usize];
        let mut regs = Vec::with_capacity(order.len());
        for l in order {
            let i = self.position(l.as_ref()).unwrap();
            let r = &self.registers[i];
            regs.push(r.clone());
            let mut next = Vec::with_capacity(offs.len() * r.dim);
            for &o in &offs {
                for d in 0..r.dim {
                    next.push(o + d * strides[i]);
                }
            }
            offs = next;
        }
        Ok((RegisterSystem { registers: regs }, offs))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledMatrix {
    system: RegisterSystem,
    entries: DMatrix<C64>,
    hermitian_hint: bool,
}

impl LabeledMatrix {
    pub fn new(system: RegisterSystem, entries: DMatrix<C64>) -> Result<Self> {
        let n = system.dim();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::dims(format!(
                "system dimension {} but matrix is {}x{}",
                n,
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(LabeledMatrix { system, entries, hermitian_hint: false })
    }

    /// Checks Hermiticity to [`HERMITIAN_TOL`] and stores the symmetrized matrix.
    pub fn hermitian(system: RegisterSystem, entries: DMatrix<C64>) -> Result<Self> {
        let mut m = Self::new(system, entries)?;
        let skew = m.hermitian_defect();
        if skew > HERMITIAN_TOL {
            return Err(Error::NotHermitian(skew));
        }
        m.entries = symmetrize(&m.entries);
        m.hermitian_hint = true;
        Ok(m)
    }

    pub fn from_real(system: RegisterSystem, entries: &DMatrix<f64>) -> Result<Self> {
        Self::hermitian(system, entries.map(|x| C64::new(x, 0.0)))
    }

    pub fn zeros(system: RegisterSystem) -> Self {
        let n = system.dim();
        LabeledMatrix { system, entries: DMatrix::zeros(n, n), hermitian_hint: true }
    }

    pub fn identity(system: RegisterSystem) -> Self {
        let n = system.dim();
        LabeledMatrix { system, entries: DMatrix::identity(n, n), hermitian_hint: true }
    }

    /// The maximally mixed state on `system`.
    pub fn maximally_mixed(system: RegisterSystem) -> Self {
        let n = system.dim() as f64;
        Self::identity(system).scale(1.0 / n)
    }

    pub fn scalar(x: f64) -> Self {
        LabeledMatrix {
            system: RegisterSystem::scalar(),
            entries: DMatrix::from_element(1, 1, C64::new(x, 0.0)),
            hermitian_hint: true,
        }
    }

    /// Projector onto a computational basis vector.
    pub fn basis_projector(system: RegisterSystem, index: usize) -> Result<Self> {
        let n = system.dim();
        if index >= n {
            return Err(Error::dims(format!("basis index {index} out of range {n}")));
        }
        let mut m = Self::zeros(system);
        m.entries[(index, index)] = C64::new(1.0, 0.0);
        Ok(m)
    }

    /// Normalized maximally entangled state (1/k) sum_ij |ii><jj| on two k-level registers.
    pub fn max_entangled(k: usize, labels: (&str, &str)) -> Result<Self> {
        let system = RegisterSystem::from_pairs(&[(labels.0, k), (labels.1, k)])?;
        let mut m = Self::zeros(system);
        let v = C64::new(1.0 / k as f64, 0.0);
        for i in 0..k {
            for j in 0..k {
                m.entries[(i * k + i, j * k + j)] = v;
            }
        }
        Ok(m)
    }

    /// The swap F = sum_ij |ij><ji| on two d-level registers.
    pub fn swap_operator(d: usize, labels: (&str, &str)) -> Result<Self> {
        let system = RegisterSystem::from_pairs(&[(labels.0, d), (labels.1, d)])?;
        let mut m = Self::zeros(system);
        for i in 0..d {
            for j in 0..d {
                m.entries[(i * d + j, j * d + i)] = C64::new(1.0, 0.0);
            }
        }
        Ok(m)
    }

    pub fn system(&self) -> &RegisterSystem {
        &self.system
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn hermitian_hint(&self) -> bool {
        self.hermitian_hint
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[(row, col)]
    }

    pub fn hermitian_defect(&self) -> f64 {
        max_abs(&(&self.entries - self.entries.adjoint()))
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }

    /// Replaces register labels (dimensions unchanged).
    pub fn relabel<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        if labels.len() != self.system.len() {
            return Err(Error::dims("relabel needs one label per register"));
        }
        let regs = self
            .system
            .registers()
            .iter()
            .zip(labels)
            .map(|(r, l)| Register::new(l.as_ref(), r.dim))
            .collect();
        Ok(LabeledMatrix { system: RegisterSystem::new(regs)?, ..self.clone() })
    }

    /// Fuses a run of adjacent registers into one register carrying their product dimension.
    pub fn merge_registers<S: AsRef<str>>(&self, run: &[S], label: &str) -> Result<Self> {
        let first = run
            .first()
            .ok_or_else(|| Error::param("cannot merge an empty run of registers"))?;
        let start = self
            .system
            .position(first.as_ref())
            .ok_or_else(|| Error::UnknownLabel(first.as_ref().to_string()))?;
        for (i, l) in run.iter().enumerate() {
            match self.system.registers.get(start + i) {
                Some(r) if r.label == l.as_ref() => {}
                _ => return Err(Error::dims(format!("`{}` is not adjacent in the run", l.as_ref()))),
            }
        }
        let mut regs = self.system.registers[..start].to_vec();
        let dim = self.system.registers[start..start + run.len()].iter().map(|r| r.dim).product();
        regs.push(Register::new(label, dim));
        regs.extend(self.system.registers[start + run.len()..].iter().cloned());
        Ok(LabeledMatrix { system: RegisterSystem::new(regs)?, ..self.clone() })
    }

    pub fn kron(&self, other: &LabeledMatrix) -> Result<Self> {
        let system = self.system.concat(&other.system)?;
        Ok(LabeledMatrix {
            system,
            entries: self.entries.kronecker(&other.entries),
            hermitian_hint: self.hermitian_hint && other.hermitian_hint,
        })
    }

    pub fn partial_trace<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let mask = self.system.mask(labels)?;
        let kept = self.system.filter(&mask, false);
        let ok = self.system.offsets(&mask, false);
        let ot = self.system.offsets(&mask, true);
        let n = ok.len();
        let entries = DMatrix::from_fn(n, n, |a, b| {
            ot.iter().map(|&t| self.entries[(ok[a] + t, ok[b] + t)]).sum()
        });
        Ok(LabeledMatrix { system: kept, entries, hermitian_hint: self.hermitian_hint })
    }

    /// Transpose in the computational basis on the listed registers.
    pub fn partial_transpose<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let mask = self.system.mask(labels)?;
        let ok = self.system.offsets(&mask, false);
        let ot = self.system.offsets(&mask, true);
        let n = self.dim();
        let mut entries = DMatrix::zeros(n, n);
        for &ka in &ok {
            for &kb in &ok {
                for &s in &ot {
                    for &t in &ot {
                        entries[(ka + s, kb + t)] = self.entries[(ka + t, kb + s)];
                    }
                }
            }
        }
        Ok(LabeledMatrix { system: self.system.clone(), entries, hermitian_hint: self.hermitian_hint })
    }

    pub fn permute_registers<S: AsRef<str>>(&self, order: &[S]) -> Result<Self> {
        let (system, map) = self.system.permutation_map(order)?;
        let n = map.len();
        let entries = DMatrix::from_fn(n, n, |a, b| self.entries[(map[a], map[b])]);
        Ok(LabeledMatrix { system, entries, hermitian_hint: self.hermitian_hint })
    }

    /// Ascending eigenvalues of a Hermitian matrix, computed on (M + M^dagger)/2.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        let skew = self.hermitian_defect();
        if skew > HERMITIAN_TOL {
            return Err(Error::NotHermitian(skew));
        }
        Ok(hermitian_eigenvalues(&symmetrize(&self.entries)))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.hermitian_eigenvalues()?.first().copied().unwrap_or(0.0))
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        match self.min_eigenvalue() {
            Ok(l) => l >= -tol,
            Err(_) => false,
        }
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn adjoint(&self) -> Self {
        LabeledMatrix { entries: self.entries.adjoint(), ..self.clone() }
    }

    pub fn transpose(&self) -> Self {
        LabeledMatrix { entries: self.entries.transpose(), ..self.clone() }
    }

    pub fn conj(&self) -> Self {
        LabeledMatrix { entries: self.entries.map(|z| z.conj()), ..self.clone() }
    }

    pub fn scale(&self, s: f64) -> Self {
        LabeledMatrix { entries: &self.entries * C64::new(s, 0.0), ..self.clone() }
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        LabeledMatrix { entries: &self.entries * s, hermitian_hint: s.im == 0.0 && self.hermitian_hint, ..self.clone() }
    }

    pub fn add(&self, other: &LabeledMatrix) -> Result<Self> {
        self.check_same(other)?;
        Ok(LabeledMatrix {
            system: self.system.clone(),
            entries: &self.entries + &other.entries,
            hermitian_hint: self.hermitian_hint && other.hermitian_hint,
        })
    }

    pub fn sub(&self, other: &LabeledMatrix) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn matmul(&self, other: &LabeledMatrix) -> Result<Self> {
        self.check_same(other)?;
        Ok(LabeledMatrix {
            system: self.system.clone(),
            entries: &self.entries * &other.entries,
            hermitian_hint: false,
        })
    }

    /// U M U^dagger with U a plain matrix on the whole system.
    pub fn conjugate_by(&self, u: &DMatrix<C64>) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::dims("conjugating unitary has wrong size"));
        }
        Ok(LabeledMatrix {
            system: self.system.clone(),
            entries: u * &self.entries * u.adjoint(),
            hermitian_hint: self.hermitian_hint,
        })
    }

    /// Hilbert-Schmidt inner product tr(A^dagger B).
    pub fn inner(&self, other: &LabeledMatrix) -> Result<C64> {
        self.check_same(other)?;
        Ok(self.entries.iter().zip(other.entries.iter()).map(|(a, b)| a.conj() * b).sum())
    }

    /// tr(A B), real part, for Hermitian arguments.
    pub fn trace_product(&self, other: &LabeledMatrix) -> Result<f64> {
        self.check_same(other)?;
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.entries[(i, j)] * other.entries[(j, i)]).re;
            }
        }
        Ok(acc)
    }

    pub fn max_abs_diff(&self, other: &LabeledMatrix) -> Result<f64> {
        self.check_same(other)?;
        Ok(max_abs(&(&self.entries - &other.entries)))
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.entries)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Reorders `other` to this matrix's register order when both carry the same registers.
    pub fn align(&self, other: &LabeledMatrix) -> Result<LabeledMatrix> {
        if other.system == self.system {
            return Ok(other.clone());
        }
        other.permute_registers(&self.system.labels())
    }

    fn check_same(&self, other: &LabeledMatrix) -> Result<()> {
        if self.system != other.system {
            return Err(Error::dims(format!(
                "register systems differ: {:?} vs {:?}",
                self.system.labels(),
                other.system.labels()
            )));
        }
        Ok(())
    }
}

pub(crate) fn symmetrize(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub(crate) fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

#[derive(Serialize, Deserialize)]
struct LabeledMatrixRepr {
    registers: Vec<Register>,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for LabeledMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let mut re = Vec::with_capacity(n * n);
        let mut im = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let z = self.entries[(i, j)];
                re.push(z.re);
                im.push(z.im);
            }
        }
        LabeledMatrixRepr { registers: self.system.registers.clone(), re, im }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LabeledMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = LabeledMatrixRepr::deserialize(d)?;
        let system = RegisterSystem::new(repr.registers).map_err(D::Error::custom)?;
        let n = system.dim();
        if repr.re.len() != n * n || repr.im.len() != n * n {
            return Err(D::Error::custom(format!("expected {} entries for dimension {}", n * n, n)));
        }
        let entries = DMatrix::from_fn(n, n, |i, j| C64::new(repr.re[i * n + j], repr.im[i * n + j]));
        let mut m = LabeledMatrix::new(system, entries).map_err(D::Error::custom)?;
        m.hermitian_hint = m.hermitian_defect() <= 1e-12;
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(pairs: &[(&str, usize)]) -> RegisterSystem {
        RegisterSystem::from_pairs(pairs).unwrap()
    }

    fn counting(system: RegisterSystem) -> LabeledMatrix {
        let n = system.dim();
        LabeledMatrix::new(system, DMatrix::from_fn(n, n, |i, j| C64::new((i * n + j) as f64, i as f64 - j as f64)))
            .unwrap()
    }

    #[test]
    fn duplicate_labels_rejected() {
        assert!(matches!(
            RegisterSystem::from_pairs(&[("A", 2), ("A", 3)]),
            Err(Error::DuplicateLabel(_))
        ));
    }

    #[test]
    fn trace_of_identity_on_dim_one_register() {
        let m = LabeledMatrix::identity(sys(&[("A", 1), ("B", 3)]));
        let t = m.partial_trace(&["A"]).unwrap();
        assert_eq!(t.dim(), 3);
        assert_eq!(t.max_abs_diff(&LabeledMatrix::identity(sys(&[("B", 3)]))).unwrap(), 0.0);
    }

    #[test]
    fn partial_trace_matches_explicit_sum() {
        let m = counting(sys(&[("A", 2), ("B", 3)]));
        let tb = m.partial_trace(&["B"]).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let expect: C64 = (0..3).map(|t| m.get(a * 3 + t, b * 3 + t)).sum();
                assert_eq!(tb.get(a, b), expect);
            }
        }
        let ta = m.partial_trace(&["A"]).unwrap();
        assert_eq!(ta.system().labels(), vec!["B"]);
        assert_eq!(ta.get(1, 2), m.get(1, 2) + m.get(4, 5));
    }

    #[test]
    #[allow(clippy::identity_op, clippy::erasing_op)]
    fn partial_transpose_is_involution_and_full_transpose() {
        let m = counting(sys(&[("A", 2), ("B", 3)]));
        let pt = m.partial_transpose(&["B"]).unwrap();
        assert_eq!(pt.partial_transpose(&["B"]).unwrap(), m);
        let full = pt.partial_transpose(&["A"]).unwrap();
        assert_eq!(full.entries(), &m.entries().transpose());
        // <a s| M^{T_B} |b t> = <a t| M |b s>
        assert_eq!(pt.get(1 * 3 + 0, 0 * 3 + 2), m.get(1 * 3 + 2, 0 * 3 + 0));
    }

    #[test]
    fn permutation_round_trip_and_kron_swap() {
        let a = counting(sys(&[("A", 2)]));
        let b = counting(sys(&[("B", 3)]));
        let ab = a.kron(&b).unwrap();
        let ba = b.kron(&a).unwrap();
        assert_eq!(ab.permute_registers(&["B", "A"]).unwrap(), ba);
        let c = counting(sys(&[("A", 2), ("B", 3), ("C", 2)]));
        let p = c.permute_registers(&["C", "A", "B"]).unwrap();
        assert_eq!(p.permute_registers(&["A", "B", "C"]).unwrap(), c);
        assert!(matches!(c.permute_registers(&["A", "B"]), Err(Error::NotPermutation(_))));
    }

    #[test]
    fn swap_conjugation_exchanges_factors() {
        let f = LabeledMatrix::swap_operator(2, ("A", "B")).unwrap();
        let x = counting(sys(&[("A", 2)])).kron(&LabeledMatrix::identity(sys(&[("B", 2)])).scale(2.0)).unwrap();
        let y = x.conjugate_by(f.entries()).unwrap();
        let expect = LabeledMatrix::identity(sys(&[("A", 2)]))
            .scale(2.0)
            .kron(&counting(sys(&[("B", 2)])).relabel(&["B"]).unwrap())
            .unwrap();
        assert!(y.max_abs_diff(&expect).unwrap() < 1e-14);
    }

    #[test]
    fn max_entangled_is_rank_one_projector() {
        let phi = LabeledMatrix::max_entangled(3, ("A", "B")).unwrap();
        let sq = phi.matmul(&phi).unwrap();
        assert!(sq.max_abs_diff(&phi).unwrap() < 1e-15);
        assert!((phi.trace().re - 1.0).abs() < 1e-15);
        let ev = phi.hermitian_eigenvalues().unwrap();
        assert!((ev[8] - 1.0).abs() < 1e-12 && ev[7].abs() < 1e-12);
        // partial transpose of Phi is F/k
        let f = LabeledMatrix::swap_operator(3, ("A", "B")).unwrap().scale(1.0 / 3.0);
        assert!(phi.partial_transpose(&["B"]).unwrap().max_abs_diff(&f).unwrap() < 1e-15);
    }

    #[test]
    fn eigenvalues_of_off_diagonal_imaginary() {
        let s = sys(&[("A", 2)]);
        let i = C64::new(0.0, 1.0);
        let m = LabeledMatrix::hermitian(s, DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), i, -i, C64::new(0.0, 0.0)]))
            .unwrap();
        let ev = m.hermitian_eigenvalues().unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
        assert!(!m.is_psd(1e-9));
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = counting(sys(&[("A", 2)]));
        assert!(matches!(m.hermitian_eigenvalues(), Err(Error::NotHermitian(_))));
        assert!(!m.is_psd(1.0));
    }

    #[test]
    fn merge_adjacent_registers() {
        let m = counting(sys(&[("A", 2), ("B", 3), ("C", 2)]));
        let merged = m.merge_registers(&["B", "C"], "BC").unwrap();
        assert_eq!(merged.system(), &sys(&[("A", 2), ("BC", 6)]));
        assert_eq!(merged.entries(), m.entries());
        assert!(m.merge_registers(&["A", "C"], "AC").is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let s = sys(&[("A", 2), ("B", 2)]);
        let entries = DMatrix::from_fn(4, 4, |i, j| C64::new(1.0 / (1.0 + i as f64 + 3.0 * j as f64), (i as f64).sqrt() - 0.1 * j as f64));
        let m = LabeledMatrix::new(s, entries).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        let back: LabeledMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back.system(), m.system());
        for (a, b) in back.entries().iter().zip(m.entries().iter()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }
}
