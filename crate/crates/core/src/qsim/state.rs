use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::layout::RegisterLayout;
use crate::error::{Error, Result};

pub type C64 = Complex64;

const UNITARY_TOL: f64 = 1e-8;

/// Single-qubit gates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    H,
    X,
    Y,
    Z,
    /// `Ry(theta) = exp(-i theta Y / 2)`.
    Ry(f64),
    Rz(f64),
    /// `diag(1, e^{i phi})`.
    Phase(f64),
    Matrix([[C64; 2]; 2]),
}

impl Gate {
    pub fn matrix(&self) -> [[C64; 2]; 2] {
        let r = |x: f64| C64::new(x, 0.0);
        match *self {
            Gate::H => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                [[r(h), r(h)], [r(h), r(-h)]]
            }
            Gate::X => [[r(0.0), r(1.0)], [r(1.0), r(0.0)]],
            Gate::Y => [[r(0.0), C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), r(0.0)]],
            Gate::Z => [[r(1.0), r(0.0)], [r(0.0), r(-1.0)]],
            Gate::Ry(theta) => {
                let (s, c) = (theta / 2.0).sin_cos();
                [[r(c), r(-s)], [r(s), r(c)]]
            }
            Gate::Rz(theta) => [[C64::from_polar(1.0, -theta / 2.0), r(0.0)], [r(0.0), C64::from_polar(1.0, theta / 2.0)]],
            Gate::Phase(phi) => [[r(1.0), r(0.0)], [r(0.0), C64::from_polar(1.0, phi)]],
            Gate::Matrix(m) => m,
        }
    }

    pub fn is_unitary(&self) -> bool {
        let m = self.matrix();
        for i in 0..2 {
            for j in 0..2 {
                let dot = m[0][i].conj() * m[0][j] + m[1][i].conj() * m[1][j];
                let expect = if i == j { 1.0 } else { 0.0 };
                if (dot - C64::new(expect, 0.0)).norm() > UNITARY_TOL {
                    return false;
                }
            }
        }
        true
    }
}

/// Dense unitary acting on the concatenation of named registers (first name
/// lowest bits). A `d x d` matrix with `d` smaller than the block size acts as
/// the identity on basis values `>= d`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddedUnitary {
    targets: Vec<String>,
    matrix: DMatrix<C64>,
}

impl EmbeddedUnitary {
    pub fn new(targets: &[&str], matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidArgument(format!(
                "embedded operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let err = (matrix.adjoint() * &matrix - DMatrix::<C64>::identity(matrix.nrows(), matrix.ncols()))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if err > UNITARY_TOL {
            return Err(Error::InvalidArgument(format!("operator is not unitary (deviation {err:.2e})")));
        }
        Ok(Self { targets: targets.iter().map(|s| s.to_string()).collect(), matrix })
    }

    pub fn from_real(targets: &[&str], matrix: &DMatrix<f64>) -> Result<Self> {
        Self::new(targets, matrix.map(|x| C64::new(x, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn targets(&self) -> &[String] {
        &self.targets
    }

    pub fn adjoint(&self) -> Self {
        Self { targets: self.targets.clone(), matrix: self.matrix.adjoint() }
    }
}

/// Dense state vector over a [`RegisterLayout`].
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
    layout: RegisterLayout,
}

#[derive(Serialize)]
struct StateDump<'a> {
    registers: Vec<(&'a str, usize)>,
    amplitudes: Vec<[f64; 2]>,
}

impl StateVector {
    /// `|0...0>`.
    pub fn new(layout: RegisterLayout) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); layout.dimension()];
        amps[0] = C64::new(1.0, 0.0);
        Self { amps, layout }
    }

    pub fn basis(layout: RegisterLayout, index: usize) -> Result<Self> {
        if index >= layout.dimension() {
            return Err(Error::InvalidArgument(format!("basis index {index} out of range")));
        }
        let mut s = Self::new(layout);
        s.amps[0] = C64::new(0.0, 0.0);
        s.amps[index] = C64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amplitudes(layout: RegisterLayout, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != layout.dimension() {
            return Err(Error::InvalidArgument(format!(
                "{} amplitudes for a {}-dimensional layout",
                amps.len(),
                layout.dimension()
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("state has squared norm {norm}")));
        }
        Ok(Self { amps, layout })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn num_qubits(&self) -> usize {
        self.layout.total_qubits()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_parts(self) -> (RegisterLayout, Vec<C64>) {
        (self.layout, self.amps)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits() {
            return Err(Error::InvalidArgument(format!("qubit {q} out of range")));
        }
        Ok(())
    }

    /// Applies `gate` to `target`, conditioned on every qubit in `controls`
    /// being 1.
    pub fn apply_gate(&mut self, gate: &Gate, target: usize, controls: &[usize]) -> Result<()> {
        self.check_qubit(target)?;
        let mut cmask = 0usize;
        for &c in controls {
            self.check_qubit(c)?;
            if c == target {
                return Err(Error::InvalidArgument(format!("qubit {c} is both control and target")));
            }
            cmask |= 1 << c;
        }
        if !gate.is_unitary() {
            return Err(Error::InvalidArgument("gate is not unitary".into()));
        }
        let m = gate.matrix();
        let tbit = 1usize << target;
        for i in 0..self.amps.len() {
            if i & tbit != 0 || i & cmask != cmask {
                continue;
            }
            let j = i | tbit;
            let (a, b) = (self.amps[i], self.amps[j]);
            self.amps[i] = m[0][0] * a + m[0][1] * b;
            self.amps[j] = m[1][0] * a + m[1][1] * b;
        }
        Ok(())
    }

    /// Gate on qubit `k` of register `reg`.
    pub fn apply_on(&mut self, gate: &Gate, reg: &str, k: usize) -> Result<()> {
        let q = self.layout.qubit(reg, k)?;
        self.apply_gate(gate, q, &[])
    }

    /// Gate on every qubit of `reg`.
    pub fn apply_all(&mut self, gate: &Gate, reg: &str) -> Result<()> {
        let r = self.layout.get(reg)?.clone();
        for q in r.qubits() {
            self.apply_gate(gate, q, &[])?;
        }
        Ok(())
    }

    pub fn swap_qubits(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Ok(());
        }
        let (ba, bb) = (1usize << a, 1usize << b);
        for i in 0..self.amps.len() {
            if i & ba != 0 && i & bb == 0 {
                self.amps.swap(i, i ^ ba ^ bb);
            }
        }
        Ok(())
    }

    /// `Ry(angles[c])` on `target`, where `c` is the value of register
    /// `control` (a uniformly controlled rotation).
    pub fn apply_controlled_ry_table(&mut self, control: &str, target: usize, angles: &[f64]) -> Result<()> {
        self.check_qubit(target)?;
        let reg = self.layout.get(control)?.clone();
        if reg.qubits().contains(&target) {
            return Err(Error::InvalidArgument("target lies inside the control register".into()));
        }
        if angles.len() != 1 << reg.width {
            return Err(Error::InvalidArgument(format!(
                "{} angles for a {}-qubit control register",
                angles.len(),
                reg.width
            )));
        }
        let trig: Vec<(f64, f64)> = angles.iter().map(|a| (a / 2.0).sin_cos()).collect();
        let tbit = 1usize << target;
        for i in 0..self.amps.len() {
            if i & tbit != 0 {
                continue;
            }
            let (s, c) = trig[reg.value(i)];
            let j = i | tbit;
            let (a, b) = (self.amps[i], self.amps[j]);
            self.amps[i] = a * c - b * s;
            self.amps[j] = a * s + b * c;
        }
        Ok(())
    }

    /// Multiplies by -1 every amplitude whose basis index satisfies `marked`.
    pub fn phase_flip_where<F: Fn(usize) -> bool>(&mut self, marked: F) {
        for (i, a) in self.amps.iter_mut().enumerate() {
            if marked(i) {
                *a = -*a;
            }
        }
    }

    fn target_blocks(&self, targets: &[String]) -> Result<Vec<super::layout::Register>> {
        targets.iter().map(|t| self.layout.get(t).cloned()).collect()
    }

    /// Applies an embedded unitary; basis values beyond its dimension are left
    /// untouched.
    pub fn apply_embedded(&mut self, u: &EmbeddedUnitary) -> Result<()> {
        self.apply_embedded_inner(u, false)
    }

    /// As [`apply_embedded`](Self::apply_embedded), but first requires the
    /// padding basis states (values `>= d`) to be unpopulated.
    pub fn apply_embedded_strict(&mut self, u: &EmbeddedUnitary) -> Result<()> {
        self.apply_embedded_inner(u, true)
    }

    fn apply_embedded_inner(&mut self, u: &EmbeddedUnitary, strict: bool) -> Result<()> {
        let regs = self.target_blocks(&u.targets)?;
        let width: usize = regs.iter().map(|r| r.width).sum();
        let d = u.dim();
        if d > 1 << width {
            return Err(Error::InvalidArgument(format!(
                "operator of dimension {d} does not fit {width} qubits"
            )));
        }
        let block_mask: usize = regs.iter().map(|r| r.mask()).fold(0, |a, b| a | b);
        // basis index offset of each block value v < d
        let offsets: Vec<usize> = (0..d)
            .map(|v| {
                let mut idx = 0usize;
                let mut shift = 0usize;
                for r in &regs {
                    let part = (v >> shift) & ((1 << r.width) - 1);
                    idx |= part << r.offset;
                    shift += r.width;
                }
                idx
            })
            .collect();
        if strict {
            let padding: f64 = self
                .amps
                .iter()
                .enumerate()
                .filter(|(i, _)| {
                    let mut v = 0usize;
                    let mut shift = 0usize;
                    for r in &regs {
                        v |= r.value(*i) << shift;
                        shift += r.width;
                    }
                    v >= d
                })
                .map(|(_, a)| a.norm_sqr())
                .sum();
            if padding > 1e-12 {
                return Err(Error::InvalidArgument(format!("padding states carry population {padding:.3e}")));
            }
        }
        let mut buf = vec![C64::new(0.0, 0.0); d];
        let mut out = vec![C64::new(0.0, 0.0); d];
        for base in 0..self.amps.len() {
            if base & block_mask != 0 {
                continue;
            }
            for (v, off) in offsets.iter().enumerate() {
                buf[v] = self.amps[base | off];
            }
            if buf.iter().all(|z| z.norm_sqr() == 0.0) {
                continue;
            }
            for (r, o) in out.iter_mut().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (c, b) in buf.iter().enumerate() {
                    acc += u.matrix[(r, c)] * b;
                }
                *o = acc;
            }
            for (v, off) in offsets.iter().enumerate() {
                self.amps[base | off] = out[v];
            }
        }
        Ok(())
    }

    /// Diagonal of the reduced density matrix on `names`: the probability of
    /// each joint basis value, first register in the lowest bits.
    pub fn reduced_diagonal(&self, names: &[&str]) -> Result<Vec<f64>> {
        let regs: Vec<_> = names.iter().map(|n| self.layout.get(n).cloned()).collect::<Result<_>>()?;
        let width: usize = regs.iter().map(|r| r.width).sum();
        let mut probs = vec![0.0; 1 << width];
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let mut key = 0usize;
            let mut shift = 0usize;
            for r in &regs {
                key |= r.value(i) << shift;
                shift += r.width;
            }
            probs[key] += p;
        }
        Ok(probs)
    }

    /// Probability that register `name` holds `value`.
    pub fn probability(&self, name: &str, value: usize) -> Result<f64> {
        let reg = self.layout.get(name)?.clone();
        Ok(self.amps.iter().enumerate().filter(|(i, _)| reg.value(*i) == value).map(|(_, a)| a.norm_sqr()).sum())
    }

    /// `shots` independent readings of `names` (counts by joint value). The
    /// state is not disturbed.
    pub fn measure_sample<R: Rng + ?Sized>(
        &self,
        names: &[&str],
        rng: &mut R,
        shots: usize,
    ) -> Result<BTreeMap<usize, usize>> {
        if shots == 0 {
            return Err(Error::InvalidArgument("at least one shot is required".into()));
        }
        let probs = self.reduced_diagonal(names)?;
        Ok(sample_counts(&probs, rng, shots))
    }

    /// Projective measurement of `name`; collapses and renormalizes.
    pub fn collapse<R: Rng + ?Sized>(&mut self, name: &str, rng: &mut R) -> Result<usize> {
        let probs = self.reduced_diagonal(&[name])?;
        let outcome = sample_index(&probs, rng);
        let reg = self.layout.get(name)?.clone();
        let norm = probs[outcome].sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if reg.value(i) == outcome {
                *a /= norm;
            } else {
                *a = C64::new(0.0, 0.0);
            }
        }
        Ok(outcome)
    }

    /// JSON dump of the layout and amplitudes (`[re, im]` pairs).
    pub fn to_json(&self) -> String {
        let dump = StateDump {
            registers: self.layout.registers().iter().map(|r| (r.name.as_str(), r.width)).collect(),
            amplitudes: self.amps.iter().map(|a| [a.re, a.im]).collect(),
        };
        serde_json::to_string(&dump).expect("state dump serializes")
    }
}

/// Samples an index from a probability vector.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (k, p) in probs.iter().enumerate() {
        if u < *p {
            return k;
        }
        u -= p;
    }
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}

pub fn sample_counts<R: Rng + ?Sized>(probs: &[f64], rng: &mut R, shots: usize) -> BTreeMap<usize, usize> {
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        *counts.entry(sample_index(probs, rng)).or_insert(0) += 1;
    }
    counts
}
