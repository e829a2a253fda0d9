//! On-disk cache of eigenvalue records, `<root>/<level>/<index>.eig`, and a
//! form source that serves from it and falls back to modular symbols.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use super::record::{EigenformRecord, Provenance};
use crate::arith::primes_up_to;
use crate::congruence::{FormSource, ModSymSource};
use crate::error::{Error, Result};
use crate::modsym::Eigenform;
use crate::numfield::{FieldElement, NumberField};

/// Environment variable naming the cache root.
pub const CACHE_ENV: &str = "MODCONG_CACHE";
pub const DEFAULT_CACHE: &str = "eigcache";

/// Name of the per-level file holding the number of classes; its presence
/// marks the level as complete.
const COUNT_FILE: &str = "classes";

pub fn default_cache_root() -> PathBuf {
    std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE))
}

/// Writes via a temporary file in the same directory and renames it into
/// place, so readers never see a partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    static SEQ: AtomicU64 = AtomicU64::new(0);
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.{}.{}.tmp",
        path.file_name().and_then(|s| s.to_str()).unwrap_or("record"),
        std::process::id(),
        SEQ.fetch_add(1, Ordering::Relaxed)
    ));
    let mut f = fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    drop(f);
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

#[derive(Clone, Debug)]
pub struct EigenStore {
    root: PathBuf,
}

impl EigenStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        EigenStore { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, level: u64, index: usize) -> PathBuf {
        self.root.join(level.to_string()).join(format!("{index}.eig"))
    }

    pub fn load(&self, level: u64, index: usize) -> Result<Option<EigenformRecord>> {
        match fs::read_to_string(self.path(level, index)) {
            Ok(s) => EigenformRecord::parse(&s).map(Some),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    /// Stores `r` unless a record with at least as many primes is already
    /// there (the cache only ever grows). Returns whether it wrote.
    pub fn save(&self, r: &EigenformRecord) -> Result<bool> {
        if let Ok(Some(old)) = self.load(r.level, r.index) {
            if old.bound() >= r.bound() {
                return Ok(false);
            }
        }
        write_atomic(&self.path(r.level, r.index), r.to_text().as_bytes())?;
        Ok(true)
    }

    pub fn class_count(&self, level: u64) -> Option<usize> {
        let p = self.root.join(level.to_string()).join(COUNT_FILE);
        fs::read_to_string(p).ok()?.trim().parse().ok()
    }

    pub fn set_class_count(&self, level: u64, count: usize) -> Result<()> {
        write_atomic(&self.root.join(level.to_string()).join(COUNT_FILE), format!("{count}\n").as_bytes())
    }

    /// All records of a complete level, or None if any is missing or bad.
    pub fn load_level(&self, level: u64) -> Option<Vec<EigenformRecord>> {
        let n = self.class_count(level)?;
        (1..=n)
            .map(|i| match self.load(level, i) {
                Ok(Some(r)) if r.level == level && r.index == i => Some(r),
                Ok(_) => None,
                Err(e) => {
                    log::warn!("ignoring cached record {level}.{i}: {e}");
                    None
                }
            })
            .collect()
    }
}

/// Lazily decomposed level, shared by its cached forms.
struct Live {
    level: u64,
    modsym: Arc<ModSymSource>,
}

impl Live {
    fn class(&self, index: usize) -> Result<Arc<dyn Eigenform>> {
        let v = self.modsym.classes(self.level)?;
        v.get(index - 1).cloned().ok_or_else(|| {
            Error::Computation(format!("cache lists class {}.{index} but the level has {} classes", self.level, v.len()))
        })
    }
}

/// A newform class that answers from its stored record and computes the
/// rest on demand.
pub struct CachedForm {
    level: u64,
    index: usize,
    field: Arc<NumberField>,
    stored: BTreeMap<u64, FieldElement>,
    extra: Mutex<BTreeMap<u64, FieldElement>>,
    live: Arc<Live>,
}

impl CachedForm {
    /// Largest prime with a known eigenvalue, and whether any was computed
    /// since the form was opened.
    fn extent(&self) -> (u64, bool) {
        let extra = self.extra.lock().unwrap();
        let top = self.stored.keys().chain(extra.keys()).max().copied().unwrap_or(0);
        (top, !extra.is_empty())
    }

    fn to_record(&self, top: u64) -> Result<EigenformRecord> {
        let mut r = EigenformRecord::from_form(&NoEigenvalues(self), 0)?;
        for q in primes_up_to(top) {
            r.insert(q, &self.eigenvalue(q)?);
        }
        Ok(r)
    }
}

/// Borrowed view of a form's identity, used to start an empty record.
struct NoEigenvalues<'a>(&'a CachedForm);

impl Eigenform for NoEigenvalues<'_> {
    fn level(&self) -> u64 {
        self.0.level
    }
    fn index(&self) -> usize {
        self.0.index
    }
    fn field(&self) -> &Arc<NumberField> {
        &self.0.field
    }
    fn eigenvalue(&self, q: u64) -> Result<FieldElement> {
        Err(Error::Precondition(format!("a_{q} not requested")))
    }
}

impl Eigenform for CachedForm {
    fn level(&self) -> u64 {
        self.level
    }
    fn index(&self) -> usize {
        self.index
    }
    fn field(&self) -> &Arc<NumberField> {
        &self.field
    }
    fn eigenvalue(&self, q: u64) -> Result<FieldElement> {
        if let Some(a) = self.stored.get(&q) {
            return Ok(a.clone());
        }
        if let Some(a) = self.extra.lock().unwrap().get(&q) {
            return Ok(a.clone());
        }
        let live = self.live.class(self.index)?;
        if live.field().min_poly() != self.field.min_poly() {
            return Err(Error::Computation(format!(
                "cached field of {}.{} differs from the computed one",
                self.level, self.index
            )));
        }
        let a = FieldElement::new(&self.field, live.eigenvalue(q)?.coords().to_vec());
        self.extra.lock().unwrap().insert(q, a.clone());
        Ok(a)
    }
}

type Slot = Arc<OnceLock<std::result::Result<Vec<Arc<CachedForm>>, String>>>;

/// Form source over an [`EigenStore`]: cached levels are read from disk and
/// only decomposed again when an eigenvalue past the stored primes is
/// needed. [`CachedSource::flush`] writes newly computed eigenvalues back.
pub struct CachedSource {
    store: EigenStore,
    modsym: Arc<ModSymSource>,
    levels: Mutex<HashMap<u64, Slot>>,
}

impl CachedSource {
    pub fn new(store: EigenStore) -> Self {
        CachedSource { store, modsym: Arc::new(ModSymSource::new()), levels: Mutex::default() }
    }

    pub fn store(&self) -> &EigenStore {
        &self.store
    }

    fn open(&self, level: u64) -> Result<Vec<Arc<CachedForm>>> {
        let live = Arc::new(Live { level, modsym: self.modsym.clone() });
        if let Some(records) = self.store.load_level(level) {
            return records
                .iter()
                .map(|r| {
                    let field = r.field()?;
                    let stored = r.eigenvalues.iter().map(|(q, c)| (*q, c.to_element(&field))).collect();
                    Ok(Arc::new(CachedForm {
                        level,
                        index: r.index,
                        field,
                        stored,
                        extra: Mutex::default(),
                        live: live.clone(),
                    }))
                })
                .collect();
        }
        let classes = self.modsym.classes(level)?;
        let forms: Vec<_> = classes
            .iter()
            .map(|c| {
                Arc::new(CachedForm {
                    level,
                    index: c.index(),
                    field: c.field().clone(),
                    stored: BTreeMap::new(),
                    extra: Mutex::default(),
                    live: live.clone(),
                })
            })
            .collect();
        // an empty level is complete as soon as it is known
        if forms.is_empty() {
            self.store.set_class_count(level, 0)?;
        }
        Ok(forms)
    }

    /// Persists every eigenvalue computed since the level was opened.
    pub fn flush(&self) -> Result<usize> {
        let slots: Vec<(u64, Slot)> = {
            let m = self.levels.lock().unwrap();
            let mut v: Vec<_> = m.iter().map(|(k, s)| (*k, s.clone())).collect();
            v.sort_by_key(|(k, _)| *k);
            v
        };
        let mut written = 0;
        for (level, slot) in slots {
            let Some(Ok(forms)) = slot.get() else { continue };
            let extents: Vec<_> = forms.iter().map(|f| f.extent()).collect();
            if !extents.iter().any(|(_, dirty)| *dirty) {
                continue;
            }
            // every class of the level goes to the same bound
            let top = extents.iter().map(|(t, _)| *t).max().unwrap_or(0);
            for f in forms {
                if self.store.save(&f.to_record(top)?)? {
                    written += 1;
                }
            }
            if self.store.class_count(level) != Some(forms.len()) {
                self.store.set_class_count(level, forms.len())?;
            }
        }
        Ok(written)
    }
}

impl FormSource for CachedSource {
    fn classes(&self, level: u64) -> Result<Vec<Arc<dyn Eigenform>>> {
        let slot = self.levels.lock().unwrap().entry(level).or_default().clone();
        match slot.get_or_init(|| self.open(level).map_err(|e| e.to_string())) {
            Ok(v) => Ok(v.iter().map(|f| f.clone() as Arc<dyn Eigenform>).collect()),
            Err(e) => Err(Error::Computation(e.clone())),
        }
    }
}

/// Cross-checks an external record against local modular symbols when the
/// level is at most `threshold`, comparing the field and a_q at the three
/// smallest stored primes not dividing the level.
pub fn import_external(path: &Path, threshold: u64, source: &dyn FormSource) -> Result<EigenformRecord> {
    let mut r = EigenformRecord::parse(&fs::read_to_string(path)?)?;
    if r.level > threshold {
        log::warn!("{}: level {} above cross-check threshold {threshold}; accepted unchecked", path.display(), r.level);
        r.provenance = Provenance::Imported { cross_checked: false };
        return Ok(r);
    }
    let classes = source.classes(r.level)?;
    let local = classes.get(r.index - 1).ok_or_else(|| {
        Error::ImportMismatch(format!("level {} has {} classes, record is index {}", r.level, classes.len(), r.index))
    })?;
    let field = r.field()?;
    if local.field().min_poly() != field.min_poly() {
        return Err(Error::ImportMismatch(format!(
            "{}.{}: field polynomial {} differs from local {}",
            r.level,
            r.index,
            field.min_poly(),
            local.field().min_poly()
        )));
    }
    for (q, c) in r.eigenvalues.iter().filter(|(q, _)| r.level % **q != 0).take(3) {
        let mine = local.eigenvalue(*q)?;
        if c.to_element(&field).coords() != mine.coords() {
            return Err(Error::ImportMismatch(format!(
                "{}.{}: a_{q} is {} in the file but {} locally",
                r.level,
                r.index,
                c.to_element(&field),
                mine
            )));
        }
    }
    r.provenance = Provenance::Imported { cross_checked: true };
    Ok(r)
}
