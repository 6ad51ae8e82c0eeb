//! Canonical sum-of-products export of relation bits (unminimized minterms).

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::{KeyRelError, KeyRelation, Source, TermKind};

pub const DEFAULT_SUPPORT_LIMIT: usize = 16;

/// On-set of one relation bit over its support. In a minterm, the first
/// support bit is the most significant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SopEntry {
    pub bit: String,
    pub support: Vec<String>,
    pub minterms: Vec<u64>,
}

impl SopEntry {
    pub fn cube(&self, m: u64) -> String {
        let n = self.support.len();
        (0..n)
            .map(|i| if (m >> (n - 1 - i)) & 1 == 1 { '1' } else { '0' })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SopTable {
    pub entries: Vec<SopEntry>,
}

/// Stimulus leaves under `bit`, in term order.
fn leaves(psi: &KeyRelation, bit: &str) -> Vec<String> {
    let need = psi.support_closure([bit]);
    psi.terms()
        .iter()
        .filter(|t| need.contains(t.bit.as_str()) && !t.is_latent())
        .filter(|t| !matches!(t.kind, TermKind::Stimulus(Source::Const(_))) || t.bit == bit)
        .map(|t| t.bit.clone())
        .collect()
}

/// SOP of any bit. Constant stimuli have an empty support, so `CONST(0)`
/// yields no minterms; constant leaves of a latent bit are folded in.
pub fn bit_sop(psi: &KeyRelation, bit: &str, limit: usize) -> Result<SopEntry, KeyRelError> {
    let term = psi.term(bit).ok_or_else(|| KeyRelError::UnknownBit(bit.to_string()))?;
    if let TermKind::Stimulus(Source::Const(v)) = term.kind {
        return Ok(SopEntry {
            bit: bit.to_string(),
            support: Vec::new(),
            minterms: if v { vec![0] } else { Vec::new() },
        });
    }
    let support = leaves(psi, bit);
    if support.len() > limit {
        return Err(KeyRelError::SupportTooLarge {
            bit: bit.to_string(),
            size: support.len(),
            limit,
        });
    }
    let sub = psi.prune([bit]);
    let n = support.len();
    let mut minterms = Vec::new();
    for m in 0..1u64 << n {
        let leaf: HashMap<&str, bool> = support
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), (m >> (n - 1 - i)) & 1 == 1))
            .collect();
        let mut vals: HashMap<&str, bool> = HashMap::new();
        for t in sub.terms() {
            let v = match &t.kind {
                TermKind::Stimulus(Source::Const(c)) => *c,
                TermKind::Stimulus(Source::Input(_)) => leaf[t.bit.as_str()],
                TermKind::Latent { op, args } => {
                    let a = vals[args[0].as_str()];
                    let b = args.get(1).is_some_and(|r| vals[r.as_str()]);
                    op.eval(a, b)
                }
            };
            vals.insert(&t.bit, v);
        }
        if vals[bit] {
            minterms.push(m);
        }
    }
    Ok(SopEntry {
        bit: bit.to_string(),
        support,
        minterms,
    })
}

/// One entry per latent bit, in term order.
pub fn to_sop(psi: &KeyRelation, limit: usize) -> Result<SopTable, KeyRelError> {
    let entries = psi
        .terms()
        .iter()
        .filter(|t| t.is_latent())
        .map(|t| bit_sop(psi, &t.bit, limit))
        .collect::<Result<_, _>>()?;
    Ok(SopTable { entries })
}

/// PLA-style text, one single-output block per entry.
pub fn emit_pla(table: &SopTable) -> String {
    let mut s = String::new();
    for e in &table.entries {
        let _ = writeln!(s, "# {}", e.bit);
        let _ = writeln!(s, ".i {}", e.support.len());
        let _ = writeln!(s, ".o 1");
        if !e.support.is_empty() {
            let _ = writeln!(s, ".ilb {}", e.support.join(" "));
        }
        let _ = writeln!(s, ".ob {}", e.bit);
        let _ = writeln!(s, ".p {}", e.minterms.len());
        for &m in &e.minterms {
            let _ = writeln!(s, "{} 1", e.cube(m));
        }
        let _ = writeln!(s, ".e");
    }
    s
}
