//! Table rows for congruences found by a scan: text layout
//! `N_f | i | N_g | j | ℓ^(m−1) | p^k | m`, and CSV with every field.

use std::fmt::Write as _;
use std::io::{Read, Write};

use crate::congruence::{
    theorem_report, CheckOutcome, CongruenceReport, FormSource, Hypotheses, Irreducibility, PlaceReport,
    StrongIrreducibility,
};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableRow {
    pub n_f: u64,
    pub i: usize,
    pub n_g: u64,
    pub j: usize,
    pub ell: u64,
    pub m: u32,
    pub p: u64,
    pub k: u32,
    pub e: u32,
    pub f: u32,
    pub carayol: bool,
    pub hypotheses: String,
}

fn summarize(h: Option<&Hypotheses>) -> String {
    let Some(h) = h else { return "unchecked".into() };
    let irr = match h.irreducibility {
        Irreducibility::CertifiedIrreducible { q } => format!("irr:q={q}"),
        Irreducibility::PossiblyReducible => "irr:?".into(),
    };
    let strong = match h.strong_irreducibility {
        StrongIrreducibility::Automatic => "strong:auto".into(),
        StrongIrreducibility::Pass { q } => format!("strong:q={q}"),
        StrongIrreducibility::Inconclusive => "strong:?".into(),
    };
    let outcome = |c: CheckOutcome| match c {
        CheckOutcome::Pass => "pass".to_string(),
        CheckOutcome::Fail { level, index } => format!("{level}.{index}"),
    };
    format!("{irr} {strong} min:{} uniq:{}", outcome(h.minimality), outcome(h.uniqueness))
}

impl TableRow {
    /// Row for one place of a report; the place must have finite m.
    pub fn from_report(r: &CongruenceReport, place: &PlaceReport) -> Self {
        TableRow {
            n_f: r.f.level,
            i: r.f.index,
            n_g: r.g.level,
            j: r.g.index,
            ell: r.ell,
            m: place.m.unwrap_or(0),
            p: r.p,
            k: r.k,
            e: place.e,
            f: place.f,
            carayol: r.carayol.pass,
            hypotheses: summarize(place.hypotheses.as_ref()),
        }
    }

    /// ℓ^(m−1) as printed in the text table.
    pub fn ell_power_cell(&self) -> String {
        let n = self.m.saturating_sub(1);
        if n <= 1 {
            self.ell.to_string()
        } else {
            let v = num_bigint::BigUint::from(self.ell).pow(n);
            format!("{v} = {}^{n}", self.ell)
        }
    }

    pub fn p_power_cell(&self) -> String {
        if self.k == 1 {
            self.p.to_string()
        } else {
            format!("{}^{}", self.p, self.k)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableFormat {
    Text,
    Csv,
}

impl std::str::FromStr for TableFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(TableFormat::Text),
            "csv" => Ok(TableFormat::Csv),
            _ => Err(Error::Precondition(format!("unknown format {s:?} (expected text or csv)"))),
        }
    }
}

const TEXT_HEADER: [&str; 7] = ["N_f", "i", "N_g", "j", "l^(m-1)", "p^k", "m"];
const CSV_HEADER: [&str; 12] = ["n_f", "i", "n_g", "j", "ell", "m", "p", "k", "e", "f", "carayol", "hypotheses"];

fn text_table(rows: &[TableRow]) -> String {
    let cells: Vec<[String; 7]> = rows
        .iter()
        .map(|r| {
            [
                r.n_f.to_string(),
                r.i.to_string(),
                r.n_g.to_string(),
                r.j.to_string(),
                r.ell_power_cell(),
                r.p_power_cell(),
                r.m.to_string(),
            ]
        })
        .collect();
    let mut width: Vec<usize> = TEXT_HEADER.iter().map(|h| h.len()).collect();
    for c in &cells {
        for (w, s) in width.iter_mut().zip(c) {
            *w = (*w).max(s.len());
        }
    }
    let mut s = String::new();
    let line = |s: &mut String, c: &[&str]| {
        let parts: Vec<String> = c.iter().zip(&width).map(|(x, w)| format!("{x:>w$}")).collect();
        let _ = writeln!(s, "{}", parts.join(" | "));
    };
    line(&mut s, &TEXT_HEADER);
    for c in &cells {
        line(&mut s, &c.iter().map(String::as_str).collect::<Vec<_>>());
    }
    s
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        k => Error::Computation(format!("csv: {k:?}")),
    }
}

pub fn emit_table(rows: &[TableRow], format: TableFormat, out: &mut dyn Write) -> Result<()> {
    match format {
        TableFormat::Text => out.write_all(text_table(rows).as_bytes())?,
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_HEADER).map_err(csv_error)?;
            for r in rows {
                w.write_record([
                    r.n_f.to_string(),
                    r.i.to_string(),
                    r.n_g.to_string(),
                    r.j.to_string(),
                    r.ell.to_string(),
                    r.m.to_string(),
                    r.p.to_string(),
                    r.k.to_string(),
                    r.e.to_string(),
                    r.f.to_string(),
                    r.carayol.to_string(),
                    r.hypotheses.clone(),
                ])
                .map_err(csv_error)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// The fields a table lets us recompute: (N_f, i, N_g, j, ℓ, m).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RowKey {
    pub n_f: u64,
    pub i: usize,
    pub n_g: u64,
    pub j: usize,
    pub ell: u64,
    pub m: u32,
}

fn num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse { line, msg: format!("bad number {s:?}") })
}

/// Reads back a table written by [`emit_table`] in either format.
pub fn parse_table(input: &mut dyn Read) -> Result<Vec<RowKey>> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let first = text.lines().next().unwrap_or_default();
    if first.starts_with("n_f,") {
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let mut out = Vec::new();
        for (k, rec) in rd.records().enumerate() {
            let line = k + 2;
            let rec = rec.map_err(|e| Error::Parse { line, msg: e.to_string() })?;
            let get = |i: usize| rec.get(i).ok_or_else(|| Error::Parse { line, msg: "missing field".into() });
            out.push(RowKey {
                n_f: num(line, get(0)?)?,
                i: num(line, get(1)?)?,
                n_g: num(line, get(2)?)?,
                j: num(line, get(3)?)?,
                ell: num(line, get(4)?)?,
                m: num(line, get(5)?)?,
            });
        }
        return Ok(out);
    }
    let mut out = Vec::new();
    for (k, l) in text.lines().enumerate().skip(1) {
        let line = k + 1;
        if l.trim().is_empty() {
            continue;
        }
        let c: Vec<&str> = l.split('|').map(str::trim).collect();
        if c.len() != 7 {
            return Err(Error::Parse { line, msg: format!("expected 7 columns, found {}", c.len()) });
        }
        // "59049 = 3^10" or a bare ℓ
        let ell = match c[4].split_once('=') {
            Some((_, pw)) => num(line, pw.split('^').next().unwrap_or_default())?,
            None => num(line, c[4])?,
        };
        out.push(RowKey { n_f: num(line, c[0])?, i: num(line, c[1])?, n_g: num(line, c[2])?, j: num(line, c[3])?, ell, m: num(line, c[6])? });
    }
    Ok(out)
}

/// Recomputes every row and returns descriptions of those that disagree.
pub fn verify_table(rows: &[RowKey], source: &dyn FormSource, bound: Option<u64>) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    for r in rows {
        let (fs, gs) = (source.classes(r.n_f)?, source.classes(r.n_g)?);
        let (Some(f), Some(g)) = (fs.get(r.i.wrapping_sub(1)), gs.get(r.j.wrapping_sub(1))) else {
            bad.push(format!("{}.{} / {}.{}: no such class", r.n_f, r.i, r.n_g, r.j));
            continue;
        };
        let rep = theorem_report(f.as_ref(), g.as_ref(), r.ell, source, bound)?;
        let found = rep.places.iter().any(|p| p.m == Some(r.m));
        if !found {
            let ms: Vec<_> = rep.places.iter().map(|p| p.m).collect();
            bad.push(format!("{}.{} / {}.{} at {}: table says m = {}, computed {ms:?}", r.n_f, r.i, r.n_g, r.j, r.ell, r.m));
        }
    }
    Ok(bad)
}
