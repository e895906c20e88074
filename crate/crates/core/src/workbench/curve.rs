use super::scan::EnergyRecord;
use crate::format::{float_repr, significant};
use crate::{Error, Result};

pub const CURVE_HEADER: &str = "bond_length_angstrom,e_hf,e_vqe,e_exact";

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub bond_length: f64,
    pub e_hf: Option<f64>,
    pub e_vqe: Option<f64>,
    pub e_exact: Option<f64>,
}

/// CSV of energies against bond length, ascending. Lengths use the shortest
/// round-trip form; energies carry 12 significant digits.
/// All records must share molecule and basis.
pub fn emit_curve(records: &[EnergyRecord]) -> Result<String> {
    if let Some(first) = records.first() {
        if let Some(other) = records.iter().find(|r| r.molecule != first.molecule) {
            return Err(Error::Usage(format!("mixed molecules {} and {}", first.molecule, other.molecule)));
        }
        if let Some(other) = records.iter().find(|r| r.basis != first.basis) {
            return Err(Error::Usage(format!("mixed bases {} and {}", first.basis, other.basis)));
        }
    }
    let mut sorted: Vec<&EnergyRecord> = records.iter().collect();
    sorted.sort_by(|a, b| {
        a.bond_length_angstrom
            .total_cmp(&b.bond_length_angstrom)
            .then(a.created_at.cmp(&b.created_at))
    });
    let cell = |v: Option<f64>| v.map(|x| significant(x, 12)).unwrap_or_default();
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for r in sorted {
        out.push_str(&format!(
            "{},{},{},{}\n",
            float_repr(r.bond_length_angstrom),
            cell(r.e_hf),
            cell(r.e_vqe),
            cell(r.e_exact)
        ));
    }
    Ok(out)
}

pub fn parse_curve(text: &str) -> Result<Vec<CurvePoint>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CURVE_HEADER => {}
        _ => return Err(Error::parse(1, format!("expected header '{CURVE_HEADER}'"))),
    }
    let mut out = Vec::new();
    for (k, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::parse(k + 1, format!("expected 4 fields, found {}", fields.len())));
        }
        let num = |s: &str| -> Result<Option<f64>> {
            if s.trim().is_empty() {
                Ok(None)
            } else {
                s.trim().parse().map(Some).map_err(|_| Error::parse(k + 1, format!("bad number '{s}'")))
            }
        };
        out.push(CurvePoint {
            bond_length: num(fields[0])?.ok_or_else(|| Error::parse(k + 1, "missing bond length"))?,
            e_hf: num(fields[1])?,
            e_vqe: num(fields[2])?,
            e_exact: num(fields[3])?,
        });
    }
    Ok(out)
}
