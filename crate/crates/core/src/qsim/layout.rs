use std::ops::Range;

use crate::error::{Error, Result};

/// Default simulator capacity in qubits.
pub const DEFAULT_QUBIT_CAP: usize = 24;

/// Environment variable overriding [`DEFAULT_QUBIT_CAP`].
pub const QUBIT_CAP_ENV: &str = "ST_SHIELD_QUBIT_CAP";

/// Active qubit cap: `ST_SHIELD_QUBIT_CAP` when set to an integer, otherwise 24.
pub fn qubit_cap() -> usize {
    std::env::var(QUBIT_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&c| c > 0 && c < 40)
        .unwrap_or(DEFAULT_QUBIT_CAP)
}

pub fn check_capacity(needed: usize) -> Result<()> {
    let cap = qubit_cap();
    if needed > cap {
        return Err(Error::Capacity { needed, cap });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub offset: usize,
    pub width: usize,
}

impl Register {
    pub fn qubits(&self) -> Range<usize> {
        self.offset..self.offset + self.width
    }

    pub fn mask(&self) -> usize {
        ((1usize << self.width) - 1) << self.offset
    }

    /// Value held by this register in basis state `index`.
    #[inline]
    pub fn value(&self, index: usize) -> usize {
        (index >> self.offset) & ((1usize << self.width) - 1)
    }
}

/// Ordered named registers. The first register occupies the lowest qubits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegisterLayout {
    regs: Vec<Register>,
    total: usize,
}

impl RegisterLayout {
    pub fn new(registers: &[(&str, usize)]) -> Result<Self> {
        let mut layout = Self { regs: Vec::new(), total: 0 };
        for &(name, width) in registers {
            layout.push(name, width)?;
        }
        Ok(layout)
    }

    /// Appends a register above the existing ones.
    pub fn push(&mut self, name: &str, width: usize) -> Result<()> {
        if width == 0 {
            return Err(Error::InvalidArgument(format!("register `{name}` has zero width")));
        }
        if self.regs.iter().any(|r| r.name == name) {
            return Err(Error::InvalidArgument(format!("duplicate register `{name}`")));
        }
        check_capacity(self.total + width)?;
        self.regs.push(Register { name: name.to_string(), offset: self.total, width });
        self.total += width;
        Ok(())
    }

    pub fn with(mut self, name: &str, width: usize) -> Result<Self> {
        self.push(name, width)?;
        Ok(self)
    }

    pub fn total_qubits(&self) -> usize {
        self.total
    }

    pub fn dimension(&self) -> usize {
        1 << self.total
    }

    pub fn registers(&self) -> &[Register] {
        &self.regs
    }

    pub fn get(&self, name: &str) -> Result<&Register> {
        self.regs.iter().find(|r| r.name == name).ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    /// Absolute index of qubit `k` of register `name`.
    pub fn qubit(&self, name: &str, k: usize) -> Result<usize> {
        let reg = self.get(name)?;
        if k >= reg.width {
            return Err(Error::InvalidArgument(format!("register `{name}` has no qubit {k}")));
        }
        Ok(reg.offset + k)
    }
}
