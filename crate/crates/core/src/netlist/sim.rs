//! Topological simulation, scalar and 64-way bit-parallel.
//!
//! Input vectors follow input declaration order; as strings, characters map
//! left to right onto the declared inputs.

use super::{Netlist, NetlistError};

pub fn parse_vector(s: &str) -> Result<Vec<bool>, NetlistError> {
    s.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(NetlistError::BadVector(s.to_string())),
        })
        .collect()
}

pub fn format_vector(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

impl Netlist {
    /// Values of every wire, indexed by `WireId`.
    pub fn eval_all(&self, inputs: &[bool]) -> Result<Vec<bool>, NetlistError> {
        if inputs.len() != self.inputs().len() {
            return Err(NetlistError::InputWidth {
                expected: self.inputs().len(),
                got: inputs.len(),
            });
        }
        let mut values = Vec::with_capacity(self.num_wires());
        values.extend_from_slice(inputs);
        for g in self.gates() {
            let v = g.op.eval(g.args.iter().map(|a| values[a.index()]));
            values.push(v);
        }
        Ok(values)
    }

    /// Output values in declared order.
    pub fn eval(&self, inputs: &[bool]) -> Result<Vec<bool>, NetlistError> {
        let values = self.eval_all(inputs)?;
        Ok(self.outputs().iter().map(|o| values[o.index()]).collect())
    }

    /// Bit-parallel evaluation of every wire; one `u64` lane per pattern.
    pub fn eval_all_words(&self, inputs: &[u64]) -> Result<Vec<u64>, NetlistError> {
        if inputs.len() != self.inputs().len() {
            return Err(NetlistError::InputWidth {
                expected: self.inputs().len(),
                got: inputs.len(),
            });
        }
        let mut values = Vec::with_capacity(self.num_wires());
        values.extend_from_slice(inputs);
        for g in self.gates() {
            let v = g.op.eval_words(g.args.iter().map(|a| values[a.index()]));
            values.push(v);
        }
        Ok(values)
    }

    pub fn eval_words(&self, inputs: &[u64]) -> Result<Vec<u64>, NetlistError> {
        let values = self.eval_all_words(inputs)?;
        Ok(self.outputs().iter().map(|o| values[o.index()]).collect())
    }
}

/// Input words for patterns `base..base+64`; pattern `p` assigns the first
/// declared input the most significant bit of `p`.
pub(crate) fn pattern_words(n_inputs: usize, base: u64) -> Vec<u64> {
    (0..n_inputs)
        .map(|i| {
            let shift = n_inputs - 1 - i;
            let mut w = 0u64;
            for lane in 0..64u64 {
                if ((base + lane) >> shift) & 1 == 1 {
                    w |= 1 << lane;
                }
            }
            w
        })
        .collect()
}

pub(crate) fn pattern_bits(n_inputs: usize, p: u64) -> Vec<bool> {
    (0..n_inputs)
        .map(|i| (p >> (n_inputs - 1 - i)) & 1 == 1)
        .collect()
}

/// Complete input/output behaviour of a small circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    pub n_inputs: usize,
    /// `outputs[o][w]` holds output `o` for patterns `64*w .. 64*w+63`.
    pub outputs: Vec<Vec<u64>>,
}

impl TruthTable {
    pub const MAX_INPUTS: usize = 24;

    pub fn of(net: &Netlist) -> Result<TruthTable, NetlistError> {
        let n = net.inputs().len();
        if n > Self::MAX_INPUTS {
            return Err(NetlistError::TooWide(n));
        }
        let patterns = 1u64 << n;
        let words = patterns.div_ceil(64) as usize;
        let mut outputs = vec![Vec::with_capacity(words); net.outputs().len()];
        for w in 0..words {
            let ins = pattern_words(n, 64 * w as u64);
            let outs = net.eval_words(&ins)?;
            for (o, v) in outs.into_iter().enumerate() {
                outputs[o].push(v);
            }
        }
        if patterns < 64 {
            let mask = (1u64 << patterns) - 1;
            for col in &mut outputs {
                col[0] &= mask;
            }
        }
        Ok(TruthTable { n_inputs: n, outputs })
    }

    pub fn patterns(&self) -> u64 {
        1u64 << self.n_inputs
    }

    pub fn row(&self, p: u64) -> Vec<bool> {
        let (w, lane) = ((p / 64) as usize, p % 64);
        self.outputs
            .iter()
            .map(|col| (col[w] >> lane) & 1 == 1)
            .collect()
    }

    /// First input pattern on which the two tables disagree.
    pub fn first_difference(&self, other: &TruthTable) -> Option<Vec<bool>> {
        assert_eq!(self.n_inputs, other.n_inputs);
        assert_eq!(self.outputs.len(), other.outputs.len());
        let words = self.outputs.first().map_or(0, Vec::len);
        for w in 0..words {
            let diff = self
                .outputs
                .iter()
                .zip(&other.outputs)
                .fold(0u64, |acc, (a, b)| acc | (a[w] ^ b[w]));
            if diff != 0 {
                let p = 64 * w as u64 + diff.trailing_zeros() as u64;
                return Some(pattern_bits(self.n_inputs, p));
            }
        }
        None
    }
}
