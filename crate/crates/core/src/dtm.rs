//! Sparse document-term count matrices.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::text::{DocMeta, TokenizedDocument};
use crate::vocab::Vocabulary;

/// Documents are rows, terms are columns. Each row holds `(term id, count)`
/// pairs sorted by term id with `count >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DocumentTermMatrix {
    vocab: Vocabulary,
    rows: Vec<Vec<(usize, u64)>>,
    docs: Vec<DocMeta>,
}

impl DocumentTermMatrix {
    /// Assembles a matrix from parts, checking the structural invariants.
    pub fn from_parts(vocab: Vocabulary, rows: Vec<Vec<(usize, u64)>>, docs: Vec<DocMeta>) -> Result<Self> {
        if rows.len() != docs.len() {
            return Err(Error::InvalidArgument(format!(
                "{} rows but {} document records",
                rows.len(),
                docs.len()
            )));
        }
        let mut rows = rows;
        for (d, row) in rows.iter_mut().enumerate() {
            row.sort_unstable_by_key(|&(t, _)| t);
            for w in row.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::InvalidArgument(format!(
                        "duplicate entry for document {d}, term {}",
                        w[0].0
                    )));
                }
            }
            for &(t, c) in row.iter() {
                if t >= vocab.len() {
                    return Err(Error::InvalidArgument(format!("term id {t} outside vocabulary")));
                }
                if c == 0 {
                    return Err(Error::InvalidArgument(format!("zero count for document {d}, term {t}")));
                }
            }
        }
        Ok(Self { vocab, rows, docs })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn docs(&self) -> &[DocMeta] {
        &self.docs
    }

    pub fn row(&self, doc: usize) -> &[(usize, u64)] {
        &self.rows[doc]
    }

    pub fn rows(&self) -> &[Vec<(usize, u64)>] {
        &self.rows
    }

    pub fn n_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_terms(&self) -> usize {
        self.vocab.len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn total_count(&self) -> u64 {
        self.rows.iter().flatten().map(|&(_, c)| c).sum()
    }

    /// `(doc, term, count)` triplets in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(d, row)| row.iter().map(move |&(t, c)| (d, t, c)))
    }

    /// Indices of documents without any retained term.
    pub fn empty_docs(&self) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_empty())
            .map(|(i, _)| i)
            .collect()
    }

    /// Number of documents containing each term.
    pub fn document_frequencies(&self) -> Vec<usize> {
        let mut df = vec![0; self.vocab.len()];
        for &(t, _) in self.rows.iter().flatten() {
            df[t] += 1;
        }
        df
    }

    /// Keeps the listed terms (by old id), in the order given, remapping ids.
    fn restrict_to(&self, keep: &[usize]) -> Self {
        let mut remap = vec![usize::MAX; self.vocab.len()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let vocab = Vocabulary::from_terms(keep.iter().map(|&t| self.vocab.terms()[t].clone()))
            .expect("subset of a valid vocabulary has no duplicates");
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut r: Vec<(usize, u64)> = row
                    .iter()
                    .filter(|(t, _)| remap[*t] != usize::MAX)
                    .map(|&(t, c)| (remap[t], c))
                    .collect();
                r.sort_unstable_by_key(|&(t, _)| t);
                r
            })
            .collect();
        Self {
            vocab,
            rows,
            docs: self.docs.clone(),
        }
    }
}

/// Counts token multiplicities. The vocabulary is the sorted set of observed terms.
pub fn build_dtm(docs: &[TokenizedDocument]) -> Result<DocumentTermMatrix> {
    if docs.iter().all(|d| d.tokens.is_empty()) {
        return Err(Error::EmptyCorpus);
    }
    let terms: BTreeSet<&str> = docs.iter().flat_map(|d| d.tokens.iter().map(String::as_str)).collect();
    let vocab = Vocabulary::from_terms(terms.iter().copied())?;
    let rows = docs
        .iter()
        .map(|d| {
            let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
            for t in &d.tokens {
                let id = vocab.id(t).expect("token collected above");
                *counts.entry(id).or_default() += 1;
            }
            counts.into_iter().collect()
        })
        .collect();
    Ok(DocumentTermMatrix {
        vocab,
        rows,
        docs: docs.iter().map(|d| d.meta.clone()).collect(),
    })
}

/// Removes every term whose absence fraction `(docs without it) / (all docs)`
/// is at least `threshold`. Documents left empty are kept.
pub fn prune_sparse_terms(dtm: &DocumentTermMatrix, threshold: f64) -> Result<DocumentTermMatrix> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidArgument(format!("sparsity threshold {threshold} outside (0, 1]")));
    }
    let n = dtm.n_docs() as f64;
    // Relative slack absorbs the representation error of thresholds like 0.999.
    let slack = 1e-12 * n.max(1.0);
    let keep: Vec<usize> = dtm
        .document_frequencies()
        .iter()
        .enumerate()
        .filter(|&(_, &df)| (n - df as f64) < threshold * n - slack)
        .map(|(t, _)| t)
        .collect();
    Ok(dtm.restrict_to(&keep))
}

/// Restricts both matrices to their shared terms, giving them identical vocabularies.
pub fn intersect_vocabularies(
    a: &DocumentTermMatrix,
    b: &DocumentTermMatrix,
) -> Result<(DocumentTermMatrix, DocumentTermMatrix)> {
    let shared: BTreeSet<&str> = a
        .vocab
        .terms()
        .iter()
        .map(String::as_str)
        .filter(|t| b.vocab.contains(t))
        .collect();
    if shared.is_empty() {
        return Err(Error::DisjointVocabularies);
    }
    let keep_a: Vec<usize> = shared.iter().map(|t| a.vocab.id(t).unwrap()).collect();
    let keep_b: Vec<usize> = shared.iter().map(|t| b.vocab.id(t).unwrap()).collect();
    Ok((a.restrict_to(&keep_a), b.restrict_to(&keep_b)))
}

/// Paths of the three files making up a persisted matrix.
#[derive(Debug, Clone)]
pub struct DtmPaths {
    pub matrix: PathBuf,
    pub vocab: PathBuf,
    pub meta: PathBuf,
}

impl DtmPaths {
    /// `<prefix>.mtx`, `<prefix>.vocab`, `<prefix>.meta.csv`.
    pub fn from_prefix(prefix: &Path) -> Self {
        let with = |ext: &str| {
            let mut s = prefix.as_os_str().to_owned();
            s.push(ext);
            PathBuf::from(s)
        };
        Self {
            matrix: with(".mtx"),
            vocab: with(".vocab"),
            meta: with(".meta.csv"),
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub fn write_dtm(dtm: &DocumentTermMatrix, paths: &DtmPaths) -> Result<()> {
    let io = |p: &Path| {
        let p = p.to_path_buf();
        move |e| Error::io(p, e)
    };

    let mut w = create(&paths.matrix)?;
    writeln!(w, "%%MatrixMarket matrix coordinate integer general").map_err(io(&paths.matrix))?;
    writeln!(w, "{} {} {}", dtm.n_docs(), dtm.n_terms(), dtm.nnz()).map_err(io(&paths.matrix))?;
    for (d, t, c) in dtm.triplets() {
        writeln!(w, "{} {} {}", d + 1, t + 1, c).map_err(io(&paths.matrix))?;
    }
    w.flush().map_err(io(&paths.matrix))?;

    let mut w = create(&paths.vocab)?;
    for t in dtm.vocab.terms() {
        writeln!(w, "{t}").map_err(io(&paths.vocab))?;
    }
    w.flush().map_err(io(&paths.vocab))?;

    write_meta(&dtm.docs, &paths.meta)
}

pub fn write_meta(docs: &[DocMeta], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["id", "date", "source", "group"])?;
    for m in docs {
        let date = m.date.map(|d| d.to_string()).unwrap_or_default();
        w.write_record([
            m.id.as_str(),
            date.as_str(),
            m.source.as_deref().unwrap_or(""),
            m.group.as_deref().unwrap_or(""),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn parse_date(s: &str, location: impl FnOnce() -> String) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .or_else(|_| NaiveDate::parse_from_str(&format!("{s}-01"), "%Y-%m-%d"))
        .or_else(|_| NaiveDate::parse_from_str(&format!("{s}-01-01"), "%Y-%m-%d"))
        .map_err(|_| Error::parse(location(), format!("bad date {s:?} (want YYYY-MM-DD, YYYY-MM or YYYY)")))
}

/// Reads a metadata CSV with columns `id,date,source,group` (date/source/group optional).
pub fn read_meta(path: &Path) -> Result<Vec<DocMeta>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(file);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let id_col = col("id").ok_or_else(|| Error::parse(path.display().to_string(), "missing id column"))?;
    let (date_col, source_col, group_col) = (col("date"), col("source"), col("group"));
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let get = |c: Option<usize>| {
            c.and_then(|c| rec.get(c))
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
        };
        let id = get(Some(id_col))
            .ok_or_else(|| Error::parse(format!("{}:{}", path.display(), i + 2), "empty id"))?;
        let date = match get(date_col) {
            Some(s) => Some(parse_date(&s, || format!("{}:{}", path.display(), i + 2))?),
            None => None,
        };
        out.push(DocMeta {
            id,
            date,
            source: get(source_col),
            group: get(group_col),
        });
    }
    Ok(out)
}

pub fn read_dtm(paths: &DtmPaths) -> Result<DocumentTermMatrix> {
    let vocab_text = std::fs::read_to_string(&paths.vocab).map_err(|e| Error::io(&paths.vocab, e))?;
    let vocab = Vocabulary::from_terms(vocab_text.lines().filter(|l| !l.is_empty()))?;

    let file = File::open(&paths.matrix).map_err(|e| Error::io(&paths.matrix, e))?;
    let loc = |n: usize| format!("{}:{}", paths.matrix.display(), n + 1);
    let mut lines = BufReader::new(file).lines().enumerate();
    let mut size: Option<(usize, usize, usize)> = None;
    let mut rows: Vec<Vec<(usize, u64)>> = Vec::new();
    let mut seen = 0usize;
    for (n, line) in lines.by_ref() {
        let line = line.map_err(|e| Error::io(&paths.matrix, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let nums: Vec<u64> = fields
            .iter()
            .map(|f| f.parse::<u64>().map_err(|_| Error::parse(loc(n), format!("not an integer: {f:?}"))))
            .collect::<Result<_>>()?;
        if nums.len() != 3 {
            return Err(Error::parse(loc(n), "expected three fields"));
        }
        match size {
            None => {
                let (r, c, nnz) = (nums[0] as usize, nums[1] as usize, nums[2] as usize);
                if c != vocab.len() {
                    return Err(Error::parse(
                        loc(n),
                        format!("matrix has {c} columns but vocabulary has {} terms", vocab.len()),
                    ));
                }
                rows = vec![Vec::new(); r];
                size = Some((r, c, nnz));
            }
            Some((r, c, _)) => {
                let (d, t, count) = (nums[0] as usize, nums[1] as usize, nums[2]);
                if d == 0 || d > r || t == 0 || t > c {
                    return Err(Error::parse(loc(n), "entry index out of range"));
                }
                rows[d - 1].push((t - 1, count));
                seen += 1;
            }
        }
    }
    let (r, _, nnz) = size.ok_or_else(|| Error::parse(paths.matrix.display().to_string(), "missing size line"))?;
    if seen != nnz {
        return Err(Error::parse(
            paths.matrix.display().to_string(),
            format!("header promises {nnz} entries, found {seen}"),
        ));
    }
    let docs = if paths.meta.exists() {
        read_meta(&paths.meta)?
    } else {
        (0..r).map(|i| DocMeta::new(format!("doc{}", i + 1))).collect()
    };
    DocumentTermMatrix::from_parts(vocab, rows, docs)
}
