//! MO integrals in FCIDUMP format and AO integrals in the native text format.
//!
//! Both formats use 1-based indices on the wire and 0-based indices in
//! memory. Readers complete the symmetry orbit of every stored integral, so
//! a file may list any member of an orbit.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::integrals::{canonical_indices, AOIntegrals, EriTensor};
use crate::{Error, Result};

/// Integrals written with magnitude below this are omitted.
pub const WRITE_ZERO_TOLERANCE: f64 = 1e-14;

/// One- and two-electron integrals over spatial molecular orbitals.
#[derive(Debug, Clone, PartialEq)]
pub struct MOIntegrals {
    pub n_orbitals: usize,
    pub n_electrons: usize,
    /// `h_pq`, symmetric.
    pub h: DMatrix<f64>,
    /// `(pq|rs)` in chemist notation.
    pub g: EriTensor,
    /// Nuclear repulsion plus any frozen-core energy.
    pub e_core: f64,
}

impl MOIntegrals {
    pub fn new(n_electrons: usize, h: DMatrix<f64>, g: EriTensor, e_core: f64) -> Result<Self> {
        let n = h.nrows();
        if h.ncols() != n || g.dim() != n {
            return Err(Error::Usage(format!(
                "inconsistent shapes: h is {}x{}, g has dimension {}",
                h.nrows(),
                h.ncols(),
                g.dim()
            )));
        }
        if n_electrons > 2 * n {
            return Err(Error::Usage(format!("{n_electrons} electrons do not fit in {n} orbitals")));
        }
        let asym = (&h - h.transpose()).amax();
        if asym > 1e-12 {
            return Err(Error::Usage(format!("one-body integrals not symmetric (deviation {asym:e})")));
        }
        Ok(Self {
            n_orbitals: n,
            n_electrons,
            h,
            g,
            e_core,
        })
    }

    /// All-zero integrals over `n` orbitals.
    pub fn zeros(n: usize, n_electrons: usize) -> Self {
        Self {
            n_orbitals: n,
            n_electrons,
            h: DMatrix::zeros(n, n),
            g: EriTensor::zeros(n),
            e_core: 0.0,
        }
    }

    /// Energy of the closed-shell determinant occupying the lowest
    /// `n_electrons/2` orbitals.
    pub fn reference_energy(&self) -> f64 {
        let occ = self.n_electrons / 2;
        let mut e = self.e_core;
        for i in 0..occ {
            e += 2.0 * self.h[(i, i)];
            for j in 0..occ {
                e += 2.0 * self.g.get(i, i, j, j) - self.g.get(i, j, j, i);
            }
        }
        e
    }
}

fn parse_value(token: &str, line: usize) -> Result<f64> {
    let v: f64 = token
        .replace(['D', 'd'], "e")
        .parse()
        .map_err(|_| Error::parse(line, format!("malformed numeric literal `{token}`")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("non-finite value `{token}`")));
    }
    Ok(v)
}

fn parse_index(token: &str, line: usize, n: usize) -> Result<usize> {
    let i: usize = token
        .parse()
        .map_err(|_| Error::parse(line, format!("malformed index `{token}`")))?;
    if i > n {
        return Err(Error::parse(line, format!("index {i} out of range 1..={n}")));
    }
    Ok(i)
}

/// Header key/value pairs from `&FCI ... &END` (or `/`).
fn parse_namelist(header: &str, line: usize) -> Result<Vec<(String, Vec<String>)>> {
    let body = header.replace('=', " = ").replace(',', " ");
    let tokens: Vec<&str> = body.split_whitespace().collect();
    let mut pairs: Vec<(String, Vec<String>)> = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if tokens.get(i + 1) == Some(&"=") {
            pairs.push((tokens[i].to_ascii_uppercase(), Vec::new()));
            i += 2;
        } else {
            match pairs.last_mut() {
                Some((_, values)) => values.push(tokens[i].to_string()),
                None => return Err(Error::parse(line, format!("unexpected `{}` in &FCI header", tokens[i]))),
            }
            i += 1;
        }
    }
    Ok(pairs)
}

/// Parses an FCIDUMP stream into [`MOIntegrals`].
pub fn parse_fcidump(text: &str) -> Result<MOIntegrals> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    // header: from &FCI through &END or a lone '/'
    let mut header = String::new();
    let mut header_line = 0;
    let mut started = false;
    for (lineno, line) in lines.by_ref() {
        let t = line.trim();
        if t.is_empty() && !started {
            continue;
        }
        if !started {
            let upper = t.to_ascii_uppercase();
            if !upper.starts_with("&FCI") {
                return Err(Error::parse(lineno, "FCIDUMP must start with an &FCI header"));
            }
            started = true;
            header_line = lineno;
        }
        let upper = t.to_ascii_uppercase();
        let end = upper.find("&END").or_else(|| upper.rfind('/'));
        match end {
            Some(pos) => {
                header.push_str(&t[..pos]);
                header.push(' ');
                break;
            }
            None => {
                header.push_str(t);
                header.push(' ');
            }
        }
    }
    if !started {
        return Err(Error::parse(1, "empty FCIDUMP"));
    }
    let header = header.trim_start();
    let header = &header[4.min(header.len())..]; // drop "&FCI"
    let pairs = parse_namelist(header, header_line)?;
    let key = |k: &str| -> Result<usize> {
        let (_, v) = pairs
            .iter()
            .find(|(name, _)| name == k)
            .ok_or_else(|| Error::parse(header_line, format!("&FCI header lacks {k}")))?;
        let first = v
            .first()
            .ok_or_else(|| Error::parse(header_line, format!("{k} has no value")))?;
        first
            .parse()
            .map_err(|_| Error::parse(header_line, format!("{k}={first} is not a non-negative integer")))
    };
    let n = key("NORB")?;
    let n_electrons = key("NELEC")?;
    if n_electrons > 2 * n {
        return Err(Error::parse(header_line, format!("NELEC={n_electrons} exceeds 2*NORB")));
    }

    let mut mo = MOIntegrals::zeros(n, n_electrons);
    for (lineno, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 5 {
            return Err(Error::parse(lineno, format!("expected `<value> i j k l`, got `{}`", line.trim())));
        }
        let v = parse_value(fields[0], lineno)?;
        let mut idx = [0usize; 4];
        for k in 0..4 {
            idx[k] = parse_index(fields[k + 1], lineno, n)?;
        }
        match idx {
            [0, 0, 0, 0] => mo.e_core = v,
            // orbital energies; not part of the Hamiltonian
            [_, 0, 0, 0] => {}
            [i, j, 0, 0] if j > 0 => {
                mo.h[(i - 1, j - 1)] = v;
                mo.h[(j - 1, i - 1)] = v;
            }
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => mo.g.set(i - 1, j - 1, k - 1, l - 1, v),
            _ => {
                return Err(Error::parse(lineno, format!("index pattern {idx:?} is not a valid integral label")));
            }
        }
    }
    Ok(mo)
}

/// Scientific notation with 17 significant digits and a signed two-digit
/// exponent, e.g. `-1.2527970618358173e+00`.
fn sci17(v: f64) -> String {
    let s = format!("{v:.16e}");
    let (m, e) = s.split_once('e').expect("exponent present");
    let e: i32 = e.parse().expect("integer exponent");
    let sign = if e < 0 { '-' } else { '+' };
    format!("{m}e{sign}{:02}", e.abs())
}

/// Serializes `mo` as FCIDUMP: header, two-body, one-body, core line.
pub fn write_fcidump(mo: &MOIntegrals) -> String {
    let n = mo.n_orbitals;
    let mut out = String::new();
    let orbsym = vec!["1"; n].join(",");
    let _ = writeln!(out, " &FCI NORB={n},NELEC={},MS2=0,", mo.n_electrons);
    let _ = writeln!(out, "  ORBSYM={orbsym},");
    let _ = writeln!(out, "  ISYM=1,");
    let _ = writeln!(out, " &END");
    for (p, q, r, s) in canonical_indices(n) {
        let v = mo.g.get(p, q, r, s);
        if v.abs() >= WRITE_ZERO_TOLERANCE {
            let _ = writeln!(out, "{} {} {} {} {}", sci17(v), p + 1, q + 1, r + 1, s + 1);
        }
    }
    for p in 0..n {
        for q in 0..=p {
            let v = mo.h[(p, q)];
            if v.abs() >= WRITE_ZERO_TOLERANCE {
                let _ = writeln!(out, "{} {} {} 0 0", sci17(v), p + 1, q + 1);
            }
        }
    }
    let _ = writeln!(out, "{} 0 0 0 0", sci17(mo.e_core));
    out
}

#[derive(Clone, Copy, PartialEq)]
enum AoSection {
    Overlap,
    Core,
    Eri,
    Enuc,
    Nelec,
}

/// Reads the native AO format: `NAO <n>` followed by
/// `SECTION OVERLAP|CORE|ERI|ENUC|NELEC` blocks of `<value> <indices…>`.
pub fn read_ao_file(text: &str) -> Result<AOIntegrals> {
    let mut n: Option<usize> = None;
    let mut section: Option<AoSection> = None;
    let mut s = DMatrix::zeros(0, 0);
    let mut h = DMatrix::zeros(0, 0);
    let mut eri = EriTensor::zeros(0);
    let mut e_nuclear = 0.0;
    let mut n_electrons = 0usize;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0].to_ascii_uppercase().as_str() {
            "NAO" => {
                if n.is_some() {
                    return Err(Error::parse(lineno, "duplicate NAO"));
                }
                let v: usize = fields
                    .get(1)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::parse(lineno, "expected `NAO <n>`"))?;
                n = Some(v);
                s = DMatrix::zeros(v, v);
                h = DMatrix::zeros(v, v);
                eri = EriTensor::zeros(v);
                continue;
            }
            "SECTION" => {
                let name = fields.get(1).map(|t| t.to_ascii_uppercase()).unwrap_or_default();
                section = Some(match name.as_str() {
                    "OVERLAP" => AoSection::Overlap,
                    "CORE" => AoSection::Core,
                    "ERI" => AoSection::Eri,
                    "ENUC" => AoSection::Enuc,
                    "NELEC" => AoSection::Nelec,
                    other => return Err(Error::parse(lineno, format!("unknown section `{other}`"))),
                });
                continue;
            }
            _ => {}
        }
        let nao = n.ok_or_else(|| Error::parse(lineno, "data before `NAO <n>`"))?;
        let sec = section.ok_or_else(|| Error::parse(lineno, "data before any SECTION"))?;
        let arity = match sec {
            AoSection::Overlap | AoSection::Core => 3,
            AoSection::Eri => 5,
            AoSection::Enuc | AoSection::Nelec => 1,
        };
        if fields.len() != arity {
            return Err(Error::parse(lineno, format!("expected {arity} fields, got {}", fields.len())));
        }
        if sec == AoSection::Nelec {
            n_electrons = fields[0]
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad electron count `{}`", fields[0])))?;
            continue;
        }
        let v = parse_value(fields[0], lineno)?;
        let mut idx = Vec::with_capacity(arity - 1);
        for t in &fields[1..] {
            let k = parse_index(t, lineno, nao)?;
            if k == 0 {
                return Err(Error::parse(lineno, "AO indices are 1-based"));
            }
            idx.push(k - 1);
        }
        match sec {
            AoSection::Overlap => {
                s[(idx[0], idx[1])] = v;
                s[(idx[1], idx[0])] = v;
            }
            AoSection::Core => {
                h[(idx[0], idx[1])] = v;
                h[(idx[1], idx[0])] = v;
            }
            AoSection::Eri => eri.set(idx[0], idx[1], idx[2], idx[3], v),
            AoSection::Enuc => e_nuclear = v,
            AoSection::Nelec => unreachable!(),
        }
    }
    let n_ao = n.ok_or_else(|| Error::parse(0, "missing `NAO <n>`"))?;
    Ok(AOIntegrals {
        n_ao,
        overlap: s,
        core_hamiltonian: h,
        eri,
        e_nuclear,
        n_electrons,
    })
}

/// Writes `ao` in the native AO format read by [`read_ao_file`].
pub fn write_ao_file(ao: &AOIntegrals) -> String {
    let n = ao.n_ao;
    let mut out = String::new();
    let _ = writeln!(out, "NAO {n}");
    let _ = writeln!(out, "SECTION OVERLAP");
    for p in 0..n {
        for q in 0..=p {
            let _ = writeln!(out, "{} {} {}", sci17(ao.overlap[(p, q)]), p + 1, q + 1);
        }
    }
    let _ = writeln!(out, "SECTION CORE");
    for p in 0..n {
        for q in 0..=p {
            let _ = writeln!(out, "{} {} {}", sci17(ao.core_hamiltonian[(p, q)]), p + 1, q + 1);
        }
    }
    let _ = writeln!(out, "SECTION ERI");
    for (p, q, r, s) in canonical_indices(n) {
        let v = ao.eri.get(p, q, r, s);
        if v != 0.0 {
            let _ = writeln!(out, "{} {} {} {} {}", sci17(v), p + 1, q + 1, r + 1, s + 1);
        }
    }
    let _ = writeln!(out, "SECTION ENUC");
    let _ = writeln!(out, "{}", sci17(ao.e_nuclear));
    let _ = writeln!(out, "SECTION NELEC");
    let _ = writeln!(out, "{}", ao.n_electrons);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_body_line() {
        let mo = parse_fcidump("&FCI NORB=2,NELEC=2,MS2=0,&END\n0.5 1 1 0 0\n").unwrap();
        assert_eq!(mo.n_orbitals, 2);
        assert_eq!(mo.h[(0, 0)], 0.5);
        assert_eq!(mo.h.iter().filter(|v| **v != 0.0).count(), 1);
        assert_eq!(mo.g.max_abs(), 0.0);
        assert_eq!(mo.e_core, 0.0);
    }

    #[test]
    fn diagonal_two_body_line_sets_one_slot() {
        let mo = parse_fcidump("&FCI NORB=2,NELEC=2,MS2=0,&END\n0.7746 1 1 1 1\n").unwrap();
        assert_eq!(mo.g.get(0, 0, 0, 0), 0.7746);
        assert_eq!(mo.g.as_slice().iter().filter(|v| **v != 0.0).count(), 1);
    }

    #[test]
    fn multi_line_header_with_orbsym() {
        let text = " &FCI NORB=   3,NELEC= 2,MS2=0,\n  ORBSYM=1,1,1,\n  ISYM=1,\n &END\n 0.25 2 1 3 1\n -1.0 2 2 0 0\n 1.0D-01 0 0 0 0\n";
        let mo = parse_fcidump(text).unwrap();
        assert_eq!(mo.g.get(0, 2, 0, 1), 0.25);
        assert_eq!(mo.h[(1, 1)], -1.0);
        assert_eq!(mo.e_core, 0.1);
        let old_style = parse_fcidump("$FCI NORB=1\n").unwrap_err();
        assert!(matches!(old_style, Error::Parse { line: 1, .. }));
        let slash = parse_fcidump("&FCI NORB=1,NELEC=0 /\n0.5 0 0 0 0\n").unwrap();
        assert_eq!(slash.e_core, 0.5);
    }

    #[test]
    fn errors_name_the_line() {
        let missing = parse_fcidump("&FCI NORB=2,MS2=0,&END\n").unwrap_err();
        assert!(matches!(missing, Error::Parse { line: 1, .. }), "{missing}");
        let range = parse_fcidump("&FCI NORB=2,NELEC=2,&END\n0.1 3 1 0 0\n").unwrap_err();
        assert!(matches!(range, Error::Parse { line: 2, .. }), "{range}");
        let bad = parse_fcidump("&FCI NORB=2,NELEC=2,\n&END\n\n1.x 1 1 0 0\n").unwrap_err();
        assert!(matches!(bad, Error::Parse { line: 4, .. }), "{bad}");
        let shape = parse_fcidump("&FCI NORB=2,NELEC=2,&END\n0.1 1 0 1 0\n").unwrap_err();
        assert!(matches!(shape, Error::Parse { line: 2, .. }), "{shape}");
    }

    #[test]
    fn core_only_writes_one_data_line() {
        let mut mo = MOIntegrals::zeros(2, 2);
        mo.e_core = 1.5;
        let text = write_fcidump(&mo);
        let data: Vec<&str> = text.lines().skip_while(|l| !l.contains("&END")).skip(1).collect();
        assert_eq!(data.len(), 1);
        assert!(data[0].starts_with("1.5"));
        assert!(data[0].ends_with(" 0 0 0 0"));
    }

    #[test]
    fn ao_file_minimal() {
        let ao = read_ao_file("NAO 1\nSECTION OVERLAP\n1.0 1 1\nSECTION CORE\n-0.5 1 1\n").unwrap();
        assert_eq!(ao.n_ao, 1);
        assert_eq!(ao.overlap[(0, 0)], 1.0);
        assert_eq!(ao.core_hamiltonian[(0, 0)], -0.5);
        assert_eq!(ao.e_nuclear, 0.0);
        let err = read_ao_file("NAO 1\nSECTION CORE\n-0.5 1 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        let err = read_ao_file("SECTION CORE\n-0.5 1 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn reference_energy_of_empty_space_is_core() {
        let mut mo = MOIntegrals::zeros(3, 0);
        mo.e_core = -2.0;
        assert_eq!(mo.reference_energy(), -2.0);
    }
}
