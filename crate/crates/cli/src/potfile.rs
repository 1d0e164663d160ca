//! Potential files.
//!
//! ```text
//! # comment
//! [manifold]
//! n = 2
//! coords = u, v
//! F = u^2*v/2 + exp(v)
//! convention = dubrovin        # or sft
//!
//! [euler]
//! d = 1, 0
//! r = 0, 2
//! dF = 2
//!
//! [cup]                        # optional, lowered c_{abc}, 1-based
//! 1,1,2 = 1
//! ```
//!
//! Cup entries are symmetrized; omitted entries are zero.

use std::collections::BTreeMap;
use std::path::Path;

use dispersio::frobenius::{EulerConvention, EulerField};
use dispersio::rat::Rat;
use dispersio::{CoeffFn, FrobeniusManifold};

use crate::error::{CliError, CliResult};
use crate::parse::{parse_potential, parse_rational};

pub const PRESET_POINT: &str = include_str!("../presets/point.pot");
pub const PRESET_P1: &str = include_str!("../presets/p1.pot");

#[derive(Clone, Debug)]
pub struct PotentialSpec {
    pub coords: Vec<String>,
    pub potential: CoeffFn,
    pub euler: EulerField,
    pub convention: EulerConvention,
    pub cup: Option<Vec<Vec<Vec<Rat>>>>,
    /// Source text, hashed into reports.
    pub source: String,
}

impl PotentialSpec {
    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn preset(name: &str) -> CliResult<Self> {
        match name {
            "point" => parse_potfile(PRESET_POINT),
            "p1" => parse_potfile(PRESET_P1),
            _ => Err(CliError::Input(format!("unknown preset '{name}' (expected point or p1)"))),
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io { path: path.display().to_string(), msg: e.to_string() })?;
        parse_potfile(&text)
    }

    pub fn manifold(&self) -> CliResult<FrobeniusManifold> {
        let fm = FrobeniusManifold::new(self.potential.clone(), self.euler.clone(), self.convention)?;
        Ok(match &self.cup {
            Some(c) => fm.with_classical_cup(c.clone())?,
            None => fm,
        })
    }
}

fn at(line: usize, msg: impl Into<String>) -> CliError {
    CliError::Parse { line, col: 1, msg: msg.into() }
}

/// Re-bases parse errors of a value onto its line in the file.
fn shift(e: CliError, line: usize, col: usize) -> CliError {
    match e {
        CliError::Parse { line: l, col: c, msg } => {
            CliError::Parse { line: line + l - 1, col: if l == 1 { col + c - 1 } else { c }, msg }
        }
        other => other,
    }
}

fn rat_list(v: &str, line: usize, n: usize, key: &str) -> CliResult<Vec<Rat>> {
    let out: Vec<Rat> = v
        .split(',')
        .map(|s| parse_rational(s.trim()).map_err(|e| at(line, e.to_string())))
        .collect::<CliResult<_>>()?;
    if out.len() != n {
        return Err(at(line, format!("{key} has {} entries, expected {n}", out.len())));
    }
    Ok(out)
}

pub fn parse_potfile(text: &str) -> CliResult<PotentialSpec> {
    let mut section = String::new();
    let mut kv: BTreeMap<(String, String), (String, usize, usize)> = BTreeMap::new();
    let mut cup_lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(name) = trimmed.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim();
            if !["manifold", "euler", "cup"].contains(&name) {
                return Err(at(line, format!("unknown section [{name}]")));
            }
            section = name.to_string();
            continue;
        }
        let (k, v) = body.split_once('=').ok_or_else(|| at(line, "expected key = value"))?;
        if section.is_empty() {
            return Err(at(line, "entry outside a section"));
        }
        let col = body.find('=').map_or(1, |p| p + 2 + (body[p + 1..].len() - body[p + 1..].trim_start().len()));
        if section == "cup" {
            cup_lines.push((k.trim().to_string(), v.trim().to_string(), line));
            continue;
        }
        let key = (section.clone(), k.trim().to_string());
        let allowed = match section.as_str() {
            "manifold" => ["n", "coords", "F", "convention"].contains(&key.1.as_str()),
            _ => ["d", "r", "dF"].contains(&key.1.as_str()),
        };
        if !allowed {
            return Err(at(line, format!("unknown key '{}' in [{}]", key.1, section)));
        }
        if kv.insert(key.clone(), (v.trim().to_string(), line, col)).is_some() {
            return Err(at(line, format!("duplicate key '{}'", key.1)));
        }
    }
    let get = |s: &str, k: &str| {
        kv.get(&(s.to_string(), k.to_string()))
            .cloned()
            .ok_or_else(|| CliError::Input(format!("missing key '{k}' in [{s}]")))
    };
    let (coords_text, cl, _) = get("manifold", "coords")?;
    let coords: Vec<String> = coords_text.split(',').map(|s| s.trim().to_string()).collect();
    let n = coords.len();
    if let Ok((nt, nl, _)) = get("manifold", "n") {
        let declared: usize = nt.parse().map_err(|_| at(nl, "n must be a positive integer"))?;
        if declared != n {
            return Err(at(cl, format!("n = {declared} but {n} coordinates are listed")));
        }
    }
    let (ftext, fl, fc) = get("manifold", "F")?;
    let potential = parse_potential(&ftext, &coords).map_err(|e| shift(e, fl, fc))?;
    let convention = match get("manifold", "convention") {
        Err(_) => EulerConvention::Dubrovin,
        Ok((c, l, _)) => match c.as_str() {
            "dubrovin" => EulerConvention::Dubrovin,
            "sft" => EulerConvention::Sft,
            _ => return Err(at(l, format!("unknown convention '{c}'"))),
        },
    };
    let (d, dl, _) = get("euler", "d")?;
    let (r, rl, _) = get("euler", "r")?;
    let (df, dfl, _) = get("euler", "dF")?;
    let euler = EulerField::new(
        rat_list(&d, dl, n, "d")?,
        rat_list(&r, rl, n, "r")?,
        parse_rational(&df).map_err(|e| at(dfl, e.to_string()))?,
    );
    let cup = if cup_lines.is_empty() {
        None
    } else {
        let mut table = vec![vec![vec![Rat::default(); n]; n]; n];
        for (k, v, line) in cup_lines {
            let idx: Vec<usize> = k
                .split(',')
                .map(|s| s.trim().parse::<usize>().ok().filter(|i| (1..=n).contains(i)))
                .collect::<Option<_>>()
                .filter(|v: &Vec<usize>| v.len() == 3)
                .ok_or_else(|| at(line, format!("cup index must be three integers in 1..={n}")))?;
            let val = parse_rational(&v).map_err(|e| at(line, e.to_string()))?;
            let (a, b, c) = (idx[0] - 1, idx[1] - 1, idx[2] - 1);
            for (i, j, k) in [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)] {
                table[i][j][k] = val.clone();
            }
        }
        Some(table)
    };
    Ok(PotentialSpec { coords, potential, euler, convention, cup, source: text.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use dispersio::rat::int;

    #[test]
    fn presets_match_library() {
        let p = PotentialSpec::preset("point").unwrap();
        assert_eq!(p.potential, FrobeniusManifold::point().potential().clone());
        let q = PotentialSpec::preset("p1").unwrap();
        let fm = q.manifold().unwrap();
        let lib = FrobeniusManifold::p1();
        assert_eq!(fm.potential(), lib.potential());
        assert_eq!(fm.euler(), lib.euler());
        assert!(PotentialSpec::preset("cp2").is_err());
    }

    #[test]
    fn cup_and_errors() {
        let text = "[manifold]\ncoords = u, v\nF = u^2*v/2 + exp(v)\n[euler]\nd = 1, 0\nr = 0, 2\ndF = 2\n[cup]\n1,1,2 = 1\n";
        let s = parse_potfile(text).unwrap();
        let cup = s.cup.unwrap();
        assert_eq!(cup[1][0][0], int(1));
        assert_eq!(cup[1][1][1], int(0));

        let bad = "[manifold]\ncoords = u\nF = u^3/6 + sin(u)\n[euler]\nd = 1\nr = 0\ndF = 3\n";
        match parse_potfile(bad) {
            Err(CliError::Parse { line: 3, col, .. }) => assert_eq!(col, 13),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_potfile("[euler]\nd = 1\n"), Err(CliError::Input(_))));
        assert!(matches!(parse_potfile("[wat]\n"), Err(CliError::Parse { line: 1, .. })));
    }

    #[test]
    fn perturbed_point_has_nonconstant_metric() {
        let text = PRESET_POINT.replace("u^3/6", "u^3/6 + u^4/24");
        let s = parse_potfile(&text).unwrap();
        assert!(matches!(s.manifold(), Err(CliError::Math(dispersio::Error::NonConstantMetric(_)))));
    }
}
