use std::collections::BTreeMap;
use std::process::Command;
use std::sync::{Arc, OnceLock};

use modcong::arith::{primes_up_to, valuation_int};
use modcong::congruence::{congruence_exponent, make_place, sturm_bound, FormSource, ModSymSource};
use modcong::modsym::Eigenform;
use modcong::numfield::Valuation;
use modcong::pipeline::{
    emit_table, import_external, load_record, parse_table, save_record, scan, verify_table, CachedSource, Coords,
    EigenStore, EigenformRecord, EllChoice, Provenance, RatioShape, RowKey, ScanConfig, StoredEigenform, TableFormat,
    TableRow,
};
use modcong::Error;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn source() -> &'static ModSymSource {
    static S: OnceLock<ModSymSource> = OnceLock::new();
    S.get_or_init(ModSymSource::new)
}

fn class(level: u64, index: usize) -> Arc<dyn Eigenform> {
    source().classes(level).unwrap()[index - 1].clone()
}

fn roundtrip(r: &EigenformRecord) -> (String, EigenformRecord) {
    let mut buf = Vec::new();
    save_record(r, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let back = load_record(&mut text.as_bytes()).unwrap();
    (text, back)
}

#[test]
fn level_11_record() {
    let r = EigenformRecord::from_form(class(11, 1).as_ref(), 100).unwrap();
    let (text, back) = roundtrip(&r);
    assert!(text.starts_with("EIGENFORM v1 level=11 index=1 degree=1\n"));
    assert!(text.lines().any(|l| l == "ap 2 -2/1"));
    assert_eq!(back, r);
    assert_eq!(roundtrip(&back).0, text);
    assert_eq!(r.bound(), 97);
}

#[test]
fn record_of_a_quadratic_class() {
    // 23.1 has eigenvalue field ℚ(√5)
    let r = EigenformRecord::from_form(class(23, 1).as_ref(), 50).unwrap();
    assert_eq!(r.degree(), 2);
    let (text, back) = roundtrip(&r);
    assert_eq!(roundtrip(&back).0, text);
    let s = StoredEigenform::new(&back).unwrap();
    for q in primes_up_to(50) {
        assert_eq!(s.eigenvalue(q).unwrap().coords(), class(23, 1).eigenvalue(q).unwrap().coords());
    }
    assert!(matches!(s.eigenvalue(53), Err(Error::Precondition(_))));
}

#[test]
fn empty_record_roundtrips() {
    let r = EigenformRecord::from_form(class(11, 1).as_ref(), 1).unwrap();
    assert!(r.eigenvalues.is_empty());
    let (text, back) = roundtrip(&r);
    assert_eq!(text, "EIGENFORM v1 level=11 index=1 degree=1\nminpoly 2 1\n");
    assert_eq!(back, r);
}

fn parse_err(text: &str) -> Error {
    EigenformRecord::parse(text).unwrap_err()
}

#[test]
fn malformed_records() {
    assert!(matches!(parse_err("EIGENFORM v1 level=11 index=1 degree=1\n"), Error::Parse { line: 2, .. }));
    assert!(matches!(parse_err(""), Error::Parse { line: 1, .. }));
    assert!(matches!(parse_err("EIGENFORM v2 level=11 index=1 degree=1\nminpoly 2 1\n"), Error::Version(v) if v == "v2"));
    let cut = "EIGENFORM v1 level=23 index=1 degree=2\nminpoly -1 1 1\nap 2 0/1 1/1\nap 3 0/1\n";
    assert!(matches!(parse_err(cut), Error::Parse { line: 4, .. }));
    let order = "EIGENFORM v1 level=11 index=1 degree=1\nminpoly 2 1\nap 3 -1/1\nap 2 -2/1\n";
    assert!(matches!(parse_err(order), Error::Parse { line: 4, .. }));
    let den = "EIGENFORM v1 level=23 index=1 degree=2\nminpoly -1 1 1\nap 2 1/2 1/3\n";
    assert!(matches!(parse_err(den), Error::Parse { line: 3, .. }));
    let degree = "EIGENFORM v1 level=11 index=1 degree=2\nminpoly 2 1\n";
    assert!(matches!(parse_err(degree), Error::Parse { line: 2, .. }));
    let monic = "EIGENFORM v1 level=11 index=1 degree=1\nminpoly 2 3\n";
    assert!(matches!(parse_err(monic), Error::Precondition(_)));
}

#[test]
fn non_reduced_coordinates_are_normalized() {
    let text = "EIGENFORM v1 level=23 index=1 degree=2\nminpoly -1 1 1\nap 2 -4/-4 2/-4\n";
    let r = EigenformRecord::parse(text).unwrap();
    assert_eq!(r.eigenvalues[&2], Coords { nums: vec![BigInt::from(2), BigInt::from(-1)], den: BigInt::from(2) });
    assert!(r.to_text().ends_with("ap 2 2/2 -1/2\n"));
}

#[test]
fn rationals_wider_than_64_bits() {
    let big = BigInt::from(3u8).pow(90) + 1;
    let den = BigInt::from(7u8).pow(30);
    let text = format!("EIGENFORM v1 level=37 index=2 degree=2\nminpoly -3 0 1\nap 2 {big}/{den} -{big}/{den}\n");
    let r = EigenformRecord::parse(&text).unwrap();
    assert!(r.eigenvalues[&2].nums[0].bits() > 128);
    assert_eq!(r.to_text(), text);
    let s = StoredEigenform::new(&r).unwrap();
    let a = s.eigenvalue(2).unwrap();
    // (b/d)(1 − √3) has norm (b/d)²·(1 − 3)
    let n = a.norm();
    assert_eq!(n.numer(), &(-BigInt::from(2) * &big * &big));
    assert_eq!(n.denom(), &(&den * &den));
}

fn arb_record() -> impl Strategy<Value = EigenformRecord> {
    let coord = prop_oneof![any::<i64>().prop_map(BigInt::from), any::<u128>().prop_map(|x| BigInt::from(x) * 3 - 1)];
    (1usize..=4, 11u64..5000, 1usize..6)
        .prop_flat_map(move |(d, level, index)| {
            (
                Just(d),
                Just(level),
                Just(index),
                prop::collection::vec(-50i64..50, d),
                prop::collection::vec((prop::collection::vec(coord.clone(), d), 1u64..1_000_000), 0..12),
            )
        })
        .prop_map(|(d, level, index, low, aps)| {
            let mut min_poly: Vec<BigInt> = low.into_iter().map(BigInt::from).collect();
            min_poly.push(BigInt::one());
            let mut eigenvalues = BTreeMap::new();
            for (q, (nums, den)) in primes_up_to(100).into_iter().zip(aps) {
                let den = BigInt::from(den);
                let g = nums.iter().fold(den.clone(), |g, n| g.gcd(n));
                let nums = nums.iter().map(|n| n / &g).collect();
                eigenvalues.insert(q, Coords { nums, den: &den / &g });
            }
            assert!(eigenvalues.values().all(|c| c.nums.len() == d && c.den.is_positive()));
            EigenformRecord { level, index, min_poly, eigenvalues, provenance: Provenance::Computed }
        })
}

proptest! {
    #[test]
    fn save_load_save_is_byte_identical(r in arb_record()) {
        let (text, back) = roundtrip(&r);
        prop_assert_eq!(&back, &r);
        prop_assert_eq!(roundtrip(&back).0, text);
    }
}

#[test]
fn store_is_extend_only() {
    let dir = tempfile::tempdir().unwrap();
    let store = EigenStore::new(dir.path());
    let f = class(11, 1);
    let long = EigenformRecord::from_form(f.as_ref(), 50).unwrap();
    let short = EigenformRecord::from_form(f.as_ref(), 20).unwrap();
    assert!(store.save(&long).unwrap());
    assert!(!store.save(&short).unwrap());
    assert_eq!(store.load(11, 1).unwrap().unwrap(), long);
    assert!(store.save(&EigenformRecord::from_form(f.as_ref(), 80).unwrap()).unwrap());
    assert_eq!(store.load(11, 1).unwrap().unwrap().bound(), 79);
    assert!(store.load(11, 2).unwrap().is_none());
    // the level is not complete until its class count is written
    assert!(store.load_level(11).is_none());
    store.set_class_count(11, 1).unwrap();
    assert_eq!(store.load_level(11).unwrap().len(), 1);
    // no temporary files left behind
    let names: Vec<_> = std::fs::read_dir(dir.path().join("11")).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 2, "{names:?}");
}

#[test]
fn cached_source_persists_and_extends() {
    let dir = tempfile::tempdir().unwrap();
    let first = CachedSource::new(EigenStore::new(dir.path()));
    let c = first.classes(37).unwrap();
    assert_eq!(c.len(), 2);
    let a = c[1].eigenvalue(13).unwrap();
    assert_eq!(first.flush().unwrap(), 2);
    let rec = EigenStore::new(dir.path()).load(37, 2).unwrap().unwrap();
    assert_eq!(rec.eigenvalues.keys().copied().collect::<Vec<_>>(), primes_up_to(13));

    let second = CachedSource::new(EigenStore::new(dir.path()));
    let c2 = second.classes(37).unwrap();
    assert_eq!(c2[1].eigenvalue(13).unwrap().coords(), a.coords());
    assert_eq!(second.flush().unwrap(), 0);
    // past the stored primes the level is decomposed again
    let b = c2[0].eigenvalue(29).unwrap();
    assert_eq!(b.coords(), class(37, 1).eigenvalue(29).unwrap().coords());
    assert_eq!(second.flush().unwrap(), 2);
    assert_eq!(EigenStore::new(dir.path()).load(37, 1).unwrap().unwrap().bound(), 29);
}

#[test]
fn import_checks() {
    let dir = tempfile::tempdir().unwrap();
    let r = EigenformRecord::from_form(class(37, 2).as_ref(), 30).unwrap();
    let good = dir.path().join("good.eig");
    std::fs::write(&good, r.to_text()).unwrap();
    let imp = import_external(&good, 100, source()).unwrap();
    assert_eq!(imp.provenance, Provenance::Imported { cross_checked: true });
    assert_eq!(imp.eigenvalues, r.eigenvalues);

    let mut bad = r.clone();
    bad.eigenvalues.get_mut(&2).unwrap().nums[0] += 3;
    let badp = dir.path().join("bad.eig");
    std::fs::write(&badp, bad.to_text()).unwrap();
    match import_external(&badp, 100, source()) {
        Err(Error::ImportMismatch(msg)) => assert!(msg.contains("a_2"), "{msg}"),
        other => panic!("expected mismatch, got {other:?}"),
    }
    let unchecked = import_external(&badp, 30, source()).unwrap();
    assert_eq!(unchecked.provenance, Provenance::Imported { cross_checked: false });

    let mut wrong = r.clone();
    wrong.index = 7;
    let wp = dir.path().join("wrong.eig");
    std::fs::write(&wp, wrong.to_text()).unwrap();
    assert!(matches!(import_external(&wp, 100, source()), Err(Error::ImportMismatch(_))));
}

fn row(n_f: u64, n_g: u64, ell: u64, m: u32, p: u64, k: u32) -> TableRow {
    TableRow { n_f, i: 1, n_g, j: 1, ell, m, p, k, e: 1, f: 1, carayol: true, hypotheses: "irr:q=2 strong:auto min:pass uniq:pass".into() }
}

fn emit(rows: &[TableRow], fmt: TableFormat) -> String {
    let mut buf = Vec::new();
    emit_table(rows, fmt, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn table_cells() {
    let deep = row(1937, 149, 3, 11, 13, 1);
    assert_eq!(deep.ell_power_cell(), "59049 = 3^10");
    assert_eq!(row(55, 11, 7, 2, 5, 1).ell_power_cell(), "7");
    assert_eq!(row(1859, 11, 3, 2, 13, 2).p_power_cell(), "13^2");
    assert_eq!(row(1115, 223, 3, 5, 5, 1).ell_power_cell(), "81 = 3^4");

    let empty = emit(&[], TableFormat::Text);
    assert_eq!(empty.lines().count(), 1);
    assert!(empty.starts_with("N_f | i | N_g | j"));
    assert_eq!(emit(&[], TableFormat::Csv), "n_f,i,n_g,j,ell,m,p,k,e,f,carayol,hypotheses\n");

    let rows = vec![row(1115, 223, 3, 5, 5, 1), deep, row(1859, 11, 3, 2, 13, 2)];
    let text = emit(&rows, TableFormat::Text);
    assert!(text.lines().nth(2).unwrap().contains("59049 = 3^10"));
    let keys = |rows: &[TableRow]| -> Vec<RowKey> {
        rows.iter().map(|r| RowKey { n_f: r.n_f, i: r.i, n_g: r.n_g, j: r.j, ell: r.ell, m: r.m }).collect()
    };
    assert_eq!(parse_table(&mut text.as_bytes()).unwrap(), keys(&rows));
    let csv = emit(&rows, TableFormat::Csv);
    assert!(csv.lines().nth(1).unwrap().starts_with("1115,1,223,1,3,5,5,1,1,1,true,"));
    assert_eq!(parse_table(&mut csv.as_bytes()).unwrap(), keys(&rows));
}

fn cfg(min: u64, max: u64, jobs: usize) -> ScanConfig {
    ScanConfig { min_level: min, max_level: max, jobs, ..ScanConfig::default() }
}

#[test]
fn scan_small_ranges() {
    // the only split pair is 22 = 2·11, and level 22 has no newforms
    let mut c = cfg(11, 30, 1);
    c.ratios = vec![RatioShape::P];
    assert!(scan(&c, source()).unwrap().is_empty());
    assert!(scan(&cfg(11, 11, 1), source()).unwrap().is_empty());
    let mut none = cfg(11, 120, 1);
    none.ells = EllChoice::Explicit(vec![]);
    assert!(scan(&none, source()).unwrap().is_empty());
    assert!(scan(&cfg(30, 20, 1), source()).is_err());
}

/// v_ℓ of gcd(a_q − b_q) over q ≤ B with q ∤ ℓ·N_f, for a pair of rational classes.
fn gcd_valuation(f: &dyn Eigenform, g: &dyn Eigenform, ell: u64, bound: u64) -> u32 {
    let mut gcd = BigInt::zero();
    for q in primes_up_to(bound) {
        if !(ell * f.level()).is_multiple_of(q) {
            let d = f.eigenvalue(q).unwrap().coords()[0].to_integer() - g.eigenvalue(q).unwrap().coords()[0].to_integer();
            gcd = gcd.gcd(&d);
        }
    }
    valuation_int(&gcd, &BigInt::from(ell))
}

#[test]
fn scan_rows_against_oracles() {
    let c = cfg(11, 150, 1);
    let rows = scan(&c, source()).unwrap();
    assert!(!rows.is_empty());
    let mut sorted = rows.clone();
    sorted.sort_by_key(|r| (r.n_f, r.i, r.n_g, r.j, r.ell));
    assert_eq!(sorted, rows);
    let mut rational = 0;
    for r in &rows {
        assert!(r.m >= 2 && r.k <= 2 && r.n_f == r.n_g * r.p.pow(r.k));
        let (f, g) = (class(r.n_f, r.i), class(r.n_g, r.j));
        if f.field().degree() == 1 && g.field().degree() == 1 {
            rational += 1;
            assert_eq!(gcd_valuation(f.as_ref(), g.as_ref(), r.ell, sturm_bound(r.n_f)) + 1, r.m, "{r:?}");
        }
    }
    assert!(rational >= 5);
    // every row's congruence is visible at level N_g itself: g is a
    // level-N_g partner of f modulo λ^(m−1), re-verified with more primes
    for r in rows.iter().filter(|r| r.k == 1) {
        let (f, g) = (class(r.n_f, r.i), class(r.n_g, r.j));
        let best = make_place(f.as_ref(), g.as_ref(), r.ell)
            .unwrap()
            .iter()
            .map(|p| congruence_exponent(f.as_ref(), g.as_ref(), p, Some(sturm_bound(r.n_f) + 50)).unwrap())
            .max()
            .unwrap();
        assert!(best >= Valuation::Finite(r.m - 1), "{r:?}");
    }
    let keys: Vec<RowKey> = rows.iter().map(|r| RowKey { n_f: r.n_f, i: r.i, n_g: r.n_g, j: r.j, ell: r.ell, m: r.m }).collect();
    assert!(verify_table(&keys, source(), None).unwrap().is_empty());
    let mut wrong = keys[0];
    wrong.m += 1;
    assert_eq!(verify_table(&[wrong], source(), None).unwrap().len(), 1);
}

#[test]
fn scan_is_independent_of_jobs() {
    let mut a = cfg(11, 150, 1);
    a.ratios = vec![RatioShape::P, RatioShape::P2, RatioShape::P3Probe];
    let mut b = a.clone();
    b.jobs = 8;
    let (ra, rb) = (scan(&a, source()).unwrap(), scan(&b, source()).unwrap());
    assert_eq!(emit(&ra, TableFormat::Csv), emit(&rb, TableFormat::Csv));
    assert_eq!(emit(&ra, TableFormat::Text), emit(&rb, TableFormat::Text));
}

fn cli(cache: &std::path::Path, args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_modcong")).arg("--cache").arg(cache).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn command_line() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let (code, out) = cli(&cache, &["newforms", "11"]);
    assert_eq!(code, 0);
    assert!(out.contains("a_2 = -2"), "{out}");
    let saved = dir.path().join("saved");
    let (code, _) = cli(&cache, &["newforms", "23", "--bound", "30", "--save", saved.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(EigenStore::new(&saved).load_level(23).unwrap()[0].bound(), 29);

    let (code, out) = cli(&cache, &["scan", "--min", "11", "--max", "11"]);
    assert_eq!((code, out.lines().count()), (0, 1));

    let (code, out) = cli(&cache, &["congprimes", "55", "2", "11", "1"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "7 1");
    let (code, out) = cli(&cache, &["congruence", "55", "2", "11", "1", "--ell", "7"]);
    assert_eq!(code, 0);
    assert!(out.contains("m = 2"), "{out}");

    let table = dir.path().join("t.csv");
    let (code, _) = cli(&cache, &["scan", "--min", "50", "--max", "80", "--jobs", "2", "--format", "csv", "--out", table.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (code, out) = cli(&cache, &["verify-table", table.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("0 discrepancies"), "{out}");
    let text = std::fs::read_to_string(&table).unwrap().replace("55,2,11,1,7,2,", "55,2,11,1,7,3,");
    std::fs::write(&table, text).unwrap();
    assert_eq!(cli(&cache, &["verify-table", table.to_str().unwrap()]).0, 1);

    // usage errors
    assert_eq!(cli(&cache, &["bogus"]).0, 2);
    assert_eq!(cli(&cache, &["scan", "--min", "11"]).0, 2);
    assert_eq!(cli(&cache, &["congruence", "55", "2", "11", "1", "--ell", "4"]).0, 2);
    assert_eq!(cli(&cache, &["congruence", "55", "9", "11", "1", "--ell", "3"]).0, 2);
    assert_eq!(cli(&cache, &["scan", "--min", "11", "--max", "20", "--ratios", "p4"]).0, 2);
}
