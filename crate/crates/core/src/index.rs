//! The feature database: building it from a directory, persisting it as
//! CSV, and partitioning it into threshold groups.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::features::{extract_features, FeatureVector};
use crate::raster::decode;

/// Header of the feature file, in column order.
pub const CSV_HEADER: [&str; 13] = [
    "name", "width", "height", "threshold", "mean_r", "mean_g", "mean_b", "median_r", "median_g",
    "median_b", "std_r", "std_g", "std_b",
];

/// File extensions picked up by [`build_index`], compared case-insensitively.
pub const IMAGE_EXTENSIONS: [&str; 4] = ["jpg", "jpeg", "png", "bmp"];

/// Images sharing one threshold value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdGroup {
    pub key: u64,
    pub members: Vec<String>,
}

/// An immutable set of feature vectors keyed by name, plus the threshold
/// partition derived from them.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IndexStore {
    entries: BTreeMap<String, FeatureVector>,
    groups: BTreeMap<u64, Vec<String>>,
}

impl IndexStore {
    pub fn from_entries(entries: impl IntoIterator<Item = FeatureVector>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for fv in entries {
            validate_name(&fv.name)?;
            if map.contains_key(&fv.name) {
                return Err(Error::DuplicateName(fv.name));
            }
            map.insert(fv.name.clone(), fv);
        }
        let mut groups: BTreeMap<u64, Vec<String>> = BTreeMap::new();
        for fv in map.values() {
            groups.entry(fv.threshold).or_default().push(fv.name.clone());
        }
        Ok(IndexStore {
            entries: map,
            groups,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&FeatureVector> {
        self.entries.get(name)
    }

    pub fn require(&self, name: &str) -> Result<&FeatureVector> {
        self.get(name)
            .ok_or_else(|| Error::UnknownImage(name.to_string()))
    }

    /// Entries in lexicographic name order.
    pub fn entries(&self) -> impl Iterator<Item = &FeatureVector> {
        self.entries.values()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Groups in ascending key order; members sorted by name.
    pub fn groups(&self) -> impl Iterator<Item = ThresholdGroup> + '_ {
        self.groups.iter().map(|(&key, members)| ThresholdGroup {
            key,
            members: members.clone(),
        })
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    /// Members of the group with the given key, or an empty slice.
    pub fn members_with_threshold(&self, key: u64) -> &[String] {
        self.groups.get(&key).map_or(&[], Vec::as_slice)
    }

    pub fn group_of(&self, name: &str) -> Result<ThresholdGroup> {
        let key = self.require(name)?.threshold;
        Ok(ThresholdGroup {
            key,
            members: self.groups[&key].clone(),
        })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io_err = |e: csv::Error| Error::Io {
            path: PathBuf::from("<feature file>"),
            source: io::Error::other(e),
        };
        let mut w = csv::WriterBuilder::new()
            .quote_style(csv::QuoteStyle::Never)
            .from_writer(out);
        w.write_record(CSV_HEADER).map_err(io_err)?;
        for fv in self.entries.values() {
            let reals = [
                fv.mean_r, fv.mean_g, fv.mean_b, fv.median_r, fv.median_g, fv.median_b, fv.std_r,
                fv.std_g, fv.std_b,
            ];
            let mut row = vec![
                fv.name.clone(),
                fv.width.to_string(),
                fv.height.to_string(),
                fv.threshold.to_string(),
            ];
            row.extend(reals.iter().map(|v| format_real(*v)));
            w.write_record(&row).map_err(io_err)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: PathBuf::from("<feature file>"),
            source: e,
        })?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("names are UTF-8")
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(input);
        let mut records = rdr.records();
        match records.next() {
            Some(Ok(header)) if header.iter().eq(CSV_HEADER) => {}
            Some(Ok(_)) => {
                return Err(Error::MalformedFeatureFile {
                    line: 1,
                    reason: format!("header must be `{}`", CSV_HEADER.join(",")),
                })
            }
            Some(Err(e)) => return Err(malformed_csv(e, 1)),
            None => {
                return Err(Error::MalformedFeatureFile {
                    line: 1,
                    reason: "missing header".into(),
                })
            }
        }
        let mut entries = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for rec in records {
            let rec = rec.map_err(|e| malformed_csv(e, 0))?;
            let line = rec.position().map_or(0, |p| p.line());
            let fv = parse_row(&rec, line)?;
            if let Err(e) = validate_name(&fv.name) {
                return Err(Error::MalformedFeatureFile {
                    line,
                    reason: e.to_string(),
                });
            }
            if !seen.insert(fv.name.clone()) {
                return Err(Error::MalformedFeatureFile {
                    line,
                    reason: format!("duplicate name {:?}", fv.name),
                });
            }
            entries.push(fv);
        }
        IndexStore::from_entries(entries)
    }

    pub fn from_csv_str(s: &str) -> Result<Self> {
        Self::read_csv(s.as_bytes())
    }
}

/// Fixed six-decimal rendering used for every real column.
pub fn format_real(v: f64) -> String {
    format!("{v:.6}")
}

fn malformed_csv(e: csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line());
    Error::MalformedFeatureFile {
        line,
        reason: e.to_string(),
    }
}

fn parse_row(rec: &csv::StringRecord, line: u64) -> Result<FeatureVector> {
    let bad = |reason: String| Error::MalformedFeatureFile { line, reason };
    if rec.len() != CSV_HEADER.len() {
        return Err(bad(format!(
            "expected {} columns, found {}",
            CSV_HEADER.len(),
            rec.len()
        )));
    }
    fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> std::result::Result<T, String> {
        rec[i]
            .trim()
            .parse()
            .map_err(|_| format!("column `{}` has invalid value {:?}", CSV_HEADER[i], &rec[i]))
    }
    let real = |i: usize| -> Result<f64> {
        let v: f64 = field(rec, i).map_err(bad)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad(format!("column `{}` is not finite", CSV_HEADER[i])))
        }
    };
    let name = rec[0].to_string();
    if name.is_empty() {
        return Err(bad("empty name".into()));
    }
    Ok(FeatureVector {
        name,
        width: field(rec, 1).map_err(bad)?,
        height: field(rec, 2).map_err(bad)?,
        threshold: field(rec, 3).map_err(bad)?,
        mean_r: real(4)?,
        mean_g: real(5)?,
        mean_b: real(6)?,
        median_r: real(7)?,
        median_g: real(8)?,
        median_b: real(9)?,
        std_r: real(10)?,
        std_g: real(11)?,
        std_b: real(12)?,
    })
}

fn validate_name(name: &str) -> Result<()> {
    let reason = if name.is_empty() {
        "name is empty"
    } else if name.contains(',') {
        "name contains a comma"
    } else if name.contains(['\n', '\r', '"']) {
        "name contains a quote or line break"
    } else {
        return Ok(());
    };
    Err(Error::InvalidName {
        name: name.to_string(),
        reason,
    })
}

pub fn save(store: &IndexStore, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    let mut out = io::BufWriter::new(file);
    store.write_csv(&mut out).map_err(|e| match e {
        Error::Io { source, .. } => io_err(source),
        other => other,
    })?;
    out.flush().map_err(io_err)
}

pub fn load(path: impl AsRef<Path>) -> Result<IndexStore> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => Error::FileNotFound {
            path: path.to_path_buf(),
        },
        _ => Error::Io {
            path: path.to_path_buf(),
            source: e,
        },
    })?;
    IndexStore::read_csv(io::BufReader::new(file))
}

#[derive(Debug, Clone, Default)]
pub struct IndexOptions {
    /// Descend into subdirectories. Names become `/`-separated relative paths.
    pub recursive: bool,
}

/// A file that was found but could not be indexed.
#[derive(Debug)]
pub struct SkippedFile {
    pub path: PathBuf,
    pub error: Error,
}

/// Progress notifications emitted while indexing.
#[derive(Debug)]
pub enum IndexEvent<'a> {
    Indexed(&'a FeatureVector),
    Skipped(&'a SkippedFile),
}

#[derive(Debug)]
pub struct BuildReport {
    pub store: IndexStore,
    pub skipped: Vec<SkippedFile>,
}

pub fn build_index(dir: impl AsRef<Path>, options: &IndexOptions) -> Result<BuildReport> {
    build_index_with(dir, options, |_| {})
}

/// Like [`build_index`], calling `on_event` once per candidate file.
///
/// With the `parallel` feature, events arrive from worker threads in
/// completion order; the resulting store does not depend on that order.
pub fn build_index_with<F>(dir: impl AsRef<Path>, options: &IndexOptions, on_event: F) -> Result<BuildReport>
where
    F: Fn(IndexEvent<'_>) + Sync,
{
    let dir = dir.as_ref();
    if !dir.is_dir() {
        return Err(Error::DirectoryNotFound {
            path: dir.to_path_buf(),
        });
    }
    let files = collect_image_files(dir, options.recursive)?;

    let process = |(name, path): &(String, PathBuf)| -> std::result::Result<FeatureVector, SkippedFile> {
        let res = validate_name(name)
            .and_then(|_| decode(path))
            .and_then(|img| extract_features(&img, name));
        match res {
            Ok(fv) => {
                on_event(IndexEvent::Indexed(&fv));
                Ok(fv)
            }
            Err(error) => {
                let skipped = SkippedFile {
                    path: path.clone(),
                    error,
                };
                on_event(IndexEvent::Skipped(&skipped));
                Err(skipped)
            }
        }
    };

    #[cfg(feature = "parallel")]
    let results: Vec<_> = {
        use rayon::prelude::*;
        files.par_iter().map(process).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<_> = files.iter().map(process).collect();

    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for r in results {
        match r {
            Ok(fv) => entries.push(fv),
            Err(s) => skipped.push(s),
        }
    }
    if entries.is_empty() {
        return Err(Error::NoImagesFound {
            path: dir.to_path_buf(),
        });
    }
    Ok(BuildReport {
        store: IndexStore::from_entries(entries)?,
        skipped,
    })
}

fn has_image_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.iter().any(|x| x.eq_ignore_ascii_case(e)))
}

/// Returns `(name, path)` pairs sorted by name.
fn collect_image_files(root: &Path, recursive: bool) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    let mut pending = vec![root.to_path_buf()];
    while let Some(dir) = pending.pop() {
        let rd = fs::read_dir(&dir).map_err(|source| Error::Io {
            path: dir.clone(),
            source,
        })?;
        for entry in rd {
            let entry = entry.map_err(|source| Error::Io {
                path: dir.clone(),
                source,
            })?;
            let path = entry.path();
            let ft = entry.file_type().map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            if ft.is_dir() {
                if recursive {
                    pending.push(path);
                }
                continue;
            }
            if !has_image_extension(&path) {
                continue;
            }
            let rel = path.strip_prefix(root).unwrap_or(&path);
            let name = rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/");
            out.push((name, path));
        }
    }
    out.sort();
    Ok(out)
}
