use std::collections::BTreeMap;

use super::{Atom, ContractedGaussian, Geometry};
use crate::{Error, Result};

const ELEMENTS: [&str; 54] = [
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S", "Cl", "Ar", "K",
    "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb",
    "Sr", "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I", "Xe",
];

/// Atomic number for an element symbol (case-insensitive), H through Xe.
pub fn atomic_number(symbol: &str) -> Option<u32> {
    ELEMENTS
        .iter()
        .position(|e| e.eq_ignore_ascii_case(symbol))
        .map(|i| i as u32 + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShellKind {
    S,
    P,
    D,
    F,
}

impl ShellKind {
    fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "S" => Some(Self::S),
            "P" => Some(Self::P),
            "D" => Some(Self::D),
            "F" => Some(Self::F),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Shell {
    pub kind: ShellKind,
    pub exponents: Vec<f64>,
    pub coefficients: Vec<f64>,
}

/// Per-element contracted functions loaded from a basis file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BasisSet {
    pub name: String,
    shells: BTreeMap<String, Vec<Shell>>,
}

const STO3G: &str = include_str!("../../data/basis/sto-3g.basis");

impl BasisSet {
    /// The shipped STO-3G s-shell data for H, He and Li.
    pub fn sto3g() -> Self {
        let mut b = Self::parse(STO3G).expect("shipped basis file parses");
        b.name = "sto-3g".into();
        b
    }

    /// Resolves a built-in name (`sto-3g`) or reads a basis file.
    pub fn load(name_or_path: &str) -> Result<Self> {
        if name_or_path.eq_ignore_ascii_case("sto-3g") || name_or_path.eq_ignore_ascii_case("sto3g") {
            return Ok(Self::sto3g());
        }
        let text = std::fs::read_to_string(name_or_path).map_err(|e| Error::io(name_or_path, e))?;
        let mut b = Self::parse(&text)?;
        b.name = std::path::Path::new(name_or_path)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| name_or_path.to_string());
        Ok(b)
    }

    /// Parses `ELEMENT <symbol> <n> [shell]` blocks followed by `n` lines of
    /// `<exponent> <coefficient>`. Repeated blocks for one element append
    /// further functions. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut shells: BTreeMap<String, Vec<Shell>> = BTreeMap::new();
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        while let Some((lineno, line)) = lines.next() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields[0] != "ELEMENT" || !(3..=4).contains(&fields.len()) {
                return Err(Error::parse(lineno, format!("expected `ELEMENT <symbol> <n> [shell]`, got `{line}`")));
            }
            let symbol = fields[1];
            if atomic_number(symbol).is_none() {
                return Err(Error::parse(lineno, format!("unknown element `{symbol}`")));
            }
            let n: usize = fields[2]
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad primitive count `{}`", fields[2])))?;
            if n == 0 {
                return Err(Error::parse(lineno, "a contraction needs at least one primitive"));
            }
            let kind = match fields.get(3) {
                None => ShellKind::S,
                Some(k) => ShellKind::parse(k).ok_or_else(|| Error::parse(lineno, format!("unknown shell `{k}`")))?,
            };
            let mut exponents = Vec::with_capacity(n);
            let mut coefficients = Vec::with_capacity(n);
            for _ in 0..n {
                let (lineno, line) = lines
                    .next()
                    .ok_or_else(|| Error::parse(lineno, format!("block for {symbol} ends early")))?;
                let nums: Vec<f64> = line
                    .split_whitespace()
                    .map(|t| t.replace(['D', 'd'], "e").parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::parse(lineno, format!("malformed number in `{line}`")))?;
                if nums.len() != 2 {
                    return Err(Error::parse(lineno, "expected `<exponent> <coefficient>`"));
                }
                exponents.push(nums[0]);
                coefficients.push(nums[1]);
            }
            shells.entry(canonical_symbol(symbol)).or_default().push(Shell {
                kind,
                exponents,
                coefficients,
            });
        }
        Ok(Self {
            name: String::new(),
            shells,
        })
    }

    pub fn functions(&self, symbol: &str) -> Option<&[Shell]> {
        self.shells.get(&canonical_symbol(symbol)).map(Vec::as_slice)
    }

    /// Per-atom contracted functions for `geometry`.
    pub fn for_geometry(&self, geometry: &Geometry) -> Result<Vec<Vec<ContractedGaussian>>> {
        geometry.atoms.iter().map(|a| self.for_atom(a)).collect()
    }

    fn for_atom(&self, atom: &Atom) -> Result<Vec<ContractedGaussian>> {
        let shells = self.functions(&atom.symbol).ok_or_else(|| {
            Error::UnsupportedBasis(format!("basis `{}` has no functions for {}", self.name, atom.symbol))
        })?;
        shells
            .iter()
            .map(|sh| {
                if sh.kind != ShellKind::S {
                    return Err(Error::UnsupportedBasis(format!(
                        "{:?} shell on {}: only s functions are implemented",
                        sh.kind, atom.symbol
                    )));
                }
                ContractedGaussian::new(atom.position, sh.exponents.clone(), sh.coefficients.clone())
            })
            .collect()
    }
}

fn canonical_symbol(s: &str) -> String {
    let z = atomic_number(s).expect("validated symbol");
    ELEMENTS[z as usize - 1].to_string()
}

/// Reads `<symbol> <x> <y> <z>` lines in Å with an optional `charge <int>`
/// line. Blank lines and `#` comments are skipped.
pub fn parse_geometry(text: &str) -> Result<Geometry> {
    let mut atoms = Vec::new();
    let mut charge = 0;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields[0].eq_ignore_ascii_case("charge") {
            if fields.len() != 2 {
                return Err(Error::parse(lineno, "expected `charge <int>`"));
            }
            charge = fields[1]
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad charge `{}`", fields[1])))?;
            continue;
        }
        if fields.len() != 4 {
            return Err(Error::parse(lineno, format!("expected `<symbol> <x> <y> <z>`, got `{line}`")));
        }
        let mut xyz = [0.0; 3];
        for k in 0..3 {
            xyz[k] = fields[k + 1]
                .parse()
                .map_err(|_| Error::parse(lineno, format!("malformed coordinate `{}`", fields[k + 1])))?;
        }
        if atomic_number(fields[0]).is_none() {
            return Err(Error::parse(lineno, format!("unknown element `{}`", fields[0])));
        }
        atoms.push(Atom::from_angstrom(&canonical_symbol(fields[0]), xyz).map_err(|e| Error::parse(lineno, e.to_string()))?);
    }
    if atoms.is_empty() {
        return Err(Error::parse(0, "geometry has no atoms"));
    }
    Geometry::new(atoms, charge)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrals::ANGSTROM_TO_BOHR;

    #[test]
    fn element_table() {
        assert_eq!(atomic_number("H"), Some(1));
        assert_eq!(atomic_number("li"), Some(3));
        assert_eq!(atomic_number("Ge"), Some(32));
        assert_eq!(atomic_number("Zr"), Some(40));
        assert_eq!(atomic_number("Qq"), None);
    }

    #[test]
    fn shipped_sto3g() {
        let b = BasisSet::sto3g();
        assert_eq!(b.functions("H").unwrap().len(), 1);
        assert_eq!(b.functions("Li").unwrap().len(), 2);
        assert!(b.functions("C").is_none());
    }

    #[test]
    fn non_s_shell_is_rejected() {
        let b = BasisSet::parse("ELEMENT H 1 P\n1.0 1.0\n").unwrap();
        let g = Geometry::new(vec![Atom::new("H", [0.0; 3]).unwrap()], 0).unwrap();
        assert!(matches!(b.for_geometry(&g), Err(Error::UnsupportedBasis(_))));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = BasisSet::parse("# c\nELEMENT H 2\n1.0 0.5\n1.0 x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
        let err = BasisSet::parse("ELEMENT H 2\n1.0 0.5\n").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn geometry_file() {
        let g = parse_geometry("charge 1\nHe 0 0 0\nH 0 0 0.7726 # bond\n").unwrap();
        assert_eq!(g.charge, 1);
        assert_eq!(g.n_electrons, 2);
        assert!((g.atoms[1].position[2] - 0.7726 * ANGSTROM_TO_BOHR).abs() < 1e-15);
        assert!(matches!(parse_geometry("H 0 0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_geometry("Xx 0 0 0\n"), Err(Error::Parse { line: 1, .. })));
    }
}
