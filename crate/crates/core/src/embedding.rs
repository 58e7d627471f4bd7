//! Dense term embeddings and the geometric primitives over them.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vocab::Vocabulary;

/// Row access to a set of term vectors. Implemented by [`EmbeddingMatrix`]
/// and by views that append synthetic rows without copying the base matrix.
pub trait Vectors<T: Real>: Sync {
    fn dim(&self) -> usize;
    fn n_rows(&self) -> usize;
    fn row(&self, id: usize) -> ArrayView1<'_, T>;
}

/// One vector per vocabulary term. Rows are never all-zero and `dim >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix<T> {
    vocab: Vocabulary,
    vectors: Array2<T>,
    label: String,
}

impl<T: Real> EmbeddingMatrix<T> {
    pub fn new(vocab: Vocabulary, vectors: Array2<T>, label: impl Into<String>) -> Result<Self> {
        if vectors.nrows() != vocab.len() {
            return Err(Error::DimensionMismatch {
                expected: vocab.len(),
                found: vectors.nrows(),
            });
        }
        if vectors.ncols() < 2 {
            return Err(Error::InvalidArgument(format!(
                "embedding dimensionality {} < 2",
                vectors.ncols()
            )));
        }
        for (i, row) in vectors.axis_iter(Axis(0)).enumerate() {
            if row.iter().all(|x| x.is_zero()) {
                return Err(Error::ZeroVector(format!("term {:?}", vocab.terms()[i])));
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "non-finite value in vector for {:?}",
                    vocab.terms()[i]
                )));
            }
        }
        Ok(Self {
            vocab,
            vectors,
            label: label.into(),
        })
    }

    /// Convenience constructor from `(term, vector)` pairs.
    pub fn from_rows<S: Into<String>>(rows: Vec<(S, Vec<T>)>, label: impl Into<String>) -> Result<Self> {
        let d = rows.first().map(|r| r.1.len()).unwrap_or(0);
        let mut vocab = Vocabulary::new();
        let mut data = Vec::with_capacity(rows.len() * d);
        for (term, v) in rows {
            if v.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: v.len() });
            }
            vocab.insert(term.into())?;
            data.extend(v);
        }
        let n = vocab.len();
        let vectors = Array2::from_shape_vec((n, d), data).expect("shape checked above");
        Self::new(vocab, vectors, label)
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn vectors(&self) -> &Array2<T> {
        &self.vectors
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn id(&self, term: &str) -> Option<usize> {
        self.vocab.id(term)
    }

    pub fn vector(&self, term: &str) -> Option<ArrayView1<'_, T>> {
        self.vocab.id(term).map(|i| self.vectors.row(i))
    }

    pub fn require(&self, term: &str) -> Result<ArrayView1<'_, T>> {
        self.vector(term).ok_or_else(|| Error::UnknownTerm(term.to_string()))
    }

    /// Returns a copy with every row multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::new(self.vocab.clone(), &self.vectors * factor, self.label.clone())
    }

    /// Returns a copy with the given vectors appended as new vocabulary rows.
    /// Existing rows and ids are unchanged.
    pub fn with_appended_rows(&self, rows: &[(String, Array1<T>)]) -> Result<Self> {
        let mut vocab = self.vocab.clone();
        let mut vectors = self.vectors.clone();
        for (term, v) in rows {
            if v.len() != self.dim() {
                return Err(Error::DimensionMismatch { expected: self.dim(), found: v.len() });
            }
            vocab.insert(term.clone())?;
            vectors
                .push_row(v.view())
                .expect("row length checked above");
        }
        Self::new(vocab, vectors, self.label.clone())
    }

    /// Keeps only the listed terms, in the order given.
    pub fn subset(&self, terms: &[&str]) -> Result<Self> {
        let ids = terms
            .iter()
            .map(|t| self.id(t).ok_or_else(|| Error::UnknownTerm(t.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let vectors = self.vectors.select(Axis(0), &ids);
        Self::new(Vocabulary::from_terms(terms.iter().copied())?, vectors, self.label.clone())
    }

    /// Same vocabulary and label, new vectors.
    pub fn with_vectors(&self, vectors: Array2<T>) -> Result<Self> {
        Self::new(self.vocab.clone(), vectors, self.label.clone())
    }
}

impl<T: Real> Vectors<T> for EmbeddingMatrix<T> {
    fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    fn n_rows(&self) -> usize {
        self.vectors.nrows()
    }

    fn row(&self, id: usize) -> ArrayView1<'_, T> {
        self.vectors.row(id)
    }
}

pub fn norm<T: Real>(v: ArrayView1<'_, T>) -> T {
    v.dot(&v).sqrt()
}

/// `dot(u, v) / (|u| |v|)`, clamped to `[-1, 1]`.
pub fn cosine_similarity<T: Real>(u: ArrayView1<'_, T>, v: ArrayView1<'_, T>) -> Result<T> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch { expected: u.len(), found: v.len() });
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu.is_zero() {
        return Err(Error::ZeroVector("first argument".into()));
    }
    if nv.is_zero() {
        return Err(Error::ZeroVector("second argument".into()));
    }
    let c = u.dot(&v) / (nu * nv);
    Ok(c.max(-T::one()).min(T::one()))
}

/// Cosine similarity between two vocabulary terms.
pub fn term_cosine<T: Real>(emb: &EmbeddingMatrix<T>, a: &str, b: &str) -> Result<T> {
    cosine_similarity(emb.require(a)?, emb.require(b)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor<T> {
    pub term: String,
    pub id: usize,
    pub similarity: T,
}

/// The `k` rows most cosine-similar to `query`, excluding `exclude`.
/// Ties are broken by ascending term id.
pub fn neighbors_of_vector<T: Real>(
    query: ArrayView1<'_, T>,
    k: usize,
    emb: &EmbeddingMatrix<T>,
    exclude: &HashSet<&str>,
) -> Result<Vec<Neighbor<T>>> {
    use rayon::prelude::*;
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if query.len() != emb.dim() {
        return Err(Error::DimensionMismatch { expected: emb.dim(), found: query.len() });
    }
    let qn = norm(query);
    if qn.is_zero() {
        return Err(Error::ZeroVector("query".into()));
    }
    let excluded: HashSet<usize> = exclude.iter().filter_map(|t| emb.id(t)).collect();
    let mut scored: Vec<(usize, T)> = emb
        .vectors
        .axis_iter(Axis(0))
        .into_par_iter()
        .enumerate()
        .filter(|(i, _)| !excluded.contains(i))
        .map(|(i, row)| {
            let c = row.dot(&query) / (norm(row) * qn);
            (i, c.max(-T::one()).min(T::one()))
        })
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    Ok(scored
        .into_iter()
        .map(|(id, similarity)| Neighbor {
            term: emb.vocab.terms()[id].clone(),
            id,
            similarity,
        })
        .collect())
}

pub fn nearest_neighbors<T: Real>(
    term: &str,
    k: usize,
    emb: &EmbeddingMatrix<T>,
    exclude: &HashSet<&str>,
) -> Result<Vec<Neighbor<T>>> {
    let v = emb.require(term)?;
    neighbors_of_vector(v, k, emb, exclude)
}

/// Signed sum of term vectors, e.g. `[(+1, "king"), (-1, "man"), (+1, "woman")]`.
pub fn vector_arithmetic<T: Real>(expr: &[(i8, &str)], emb: &EmbeddingMatrix<T>) -> Result<Array1<T>> {
    let mut acc = Array1::zeros(emb.dim());
    for &(sign, term) in expr {
        let v = emb.require(term)?;
        if sign >= 0 {
            acc += &v;
        } else {
            acc -= &v;
        }
    }
    Ok(acc)
}

/// Parses `"+king -man +woman"` or `"king - man + woman"` (a bare term counts as `+`).
pub fn parse_expression(expr: &str) -> Result<Vec<(i8, &str)>> {
    let mut out = Vec::new();
    let mut pending: Option<i8> = None;
    for tok in expr.split_whitespace() {
        match tok {
            "+" | "-" if pending.is_some() => return Err(Error::parse(expr, "two operators in a row")),
            "+" => pending = Some(1),
            "-" => pending = Some(-1),
            _ => {
                let (sign, term) = match tok.strip_prefix('-') {
                    Some(t) => (-1, t),
                    None => (1, tok.strip_prefix('+').unwrap_or(tok)),
                };
                let sign = pending.take().unwrap_or(1) * sign;
                out.push((sign, term));
            }
        }
    }
    if pending.is_some() {
        return Err(Error::parse(expr, "expression ends with an operator"));
    }
    if out.is_empty() {
        return Err(Error::parse(expr, "empty expression"));
    }
    Ok(out)
}

/// Reads the `word v1 ... vd` text format with an optional `V d` header.
pub fn load_embeddings<T: Real>(path: &Path, expected_dim: Option<usize>) -> Result<EmbeddingMatrix<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::with_capacity(1 << 20, file);
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_embeddings(reader, &path.display().to_string(), expected_dim, label)
}

pub fn parse_embeddings<T: Real, R: BufRead>(
    reader: R,
    origin: &str,
    expected_dim: Option<usize>,
    label: String,
) -> Result<EmbeddingMatrix<T>> {
    let mut dim = expected_dim;
    let mut header_rows: Option<usize> = None;
    let mut vocab = Vocabulary::new();
    let mut data: Vec<T> = Vec::new();
    let loc = |n: usize| format!("{origin}:{}", n + 1);

    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if n == 0 && fields.len() == 2 {
            if let (Ok(v), Ok(d)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>()) {
                if let Some(e) = dim {
                    if e != d {
                        return Err(Error::DimensionMismatch { expected: e, found: d });
                    }
                }
                header_rows = Some(v);
                dim = Some(d);
                continue;
            }
        }
        let d = *dim.get_or_insert(fields.len() - 1);
        if fields.len() < d + 1 {
            return Err(Error::parse(
                loc(n),
                format!("dimension mismatch: expected {d} values, found {}", fields.len() - 1),
            ));
        }
        // Some vocabularies contain multi-word keys; the last `d` fields are the vector.
        let split = fields.len() - d;
        if split > 1 && header_rows.is_none() && expected_dim.is_none() {
            return Err(Error::parse(
                loc(n),
                format!("dimension mismatch: expected {d} values, found {}", fields.len() - 1),
            ));
        }
        let term = fields[..split].join(" ");
        for f in &fields[split..] {
            let x: T = f
                .parse()
                .map_err(|_| Error::parse(loc(n), format!("malformed float {f:?}")))?;
            data.push(x);
        }
        vocab.insert(term)?;
    }
    if let Some(v) = header_rows {
        if v != vocab.len() {
            return Err(Error::parse(
                origin.to_string(),
                format!("header declares {v} vectors but file has {}", vocab.len()),
            ));
        }
    }
    let d = dim.unwrap_or(0);
    let n = vocab.len();
    let vectors = Array2::from_shape_vec((n, d), data).expect("every row pushed d values");
    EmbeddingMatrix::new(vocab, vectors, label)
}

/// Writes the text format with a `V d` header.
pub fn write_embeddings<T: Real>(emb: &EmbeddingMatrix<T>, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "{} {}", emb.len(), emb.dim()).map_err(io)?;
    for (term, row) in emb.vocab.terms().iter().zip(emb.vectors.axis_iter(Axis(0))) {
        write!(w, "{term}").map_err(io)?;
        for x in row {
            write!(w, " {x}").map_err(io)?;
        }
        writeln!(w).map_err(io)?;
    }
    w.flush().map_err(io)
}

const CACHE_MAGIC: &[u8; 8] = b"SEMCEMB1";

/// Binary cache: magic, `V` and `d` as little-endian u64, then each term as a
/// u32 byte length plus UTF-8 bytes, then `V * d` little-endian f32 values row-major.
pub fn write_binary_cache<T: Real>(emb: &EmbeddingMatrix<T>, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    w.write_all(CACHE_MAGIC).map_err(io)?;
    w.write_all(&(emb.len() as u64).to_le_bytes()).map_err(io)?;
    w.write_all(&(emb.dim() as u64).to_le_bytes()).map_err(io)?;
    for term in emb.vocab.terms() {
        w.write_all(&(term.len() as u32).to_le_bytes()).map_err(io)?;
        w.write_all(term.as_bytes()).map_err(io)?;
    }
    for x in emb.vectors.iter() {
        w.write_all(&(x.to_f64_lossy() as f32).to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_binary_cache<T: Real>(path: &Path) -> Result<EmbeddingMatrix<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let origin = path.display().to_string();
    let io = |e| Error::io(path, e);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != CACHE_MAGIC {
        return Err(Error::parse(origin, "not an embedding cache (bad magic)"));
    }
    let mut u64buf = [0u8; 8];
    r.read_exact(&mut u64buf).map_err(io)?;
    let n = u64::from_le_bytes(u64buf) as usize;
    r.read_exact(&mut u64buf).map_err(io)?;
    let d = u64::from_le_bytes(u64buf) as usize;
    let mut vocab = Vocabulary::new();
    let mut u32buf = [0u8; 4];
    for _ in 0..n {
        r.read_exact(&mut u32buf).map_err(io)?;
        let mut bytes = vec![0u8; u32::from_le_bytes(u32buf) as usize];
        r.read_exact(&mut bytes).map_err(io)?;
        let term = String::from_utf8(bytes).map_err(|_| Error::parse(origin.clone(), "term is not UTF-8"))?;
        vocab.insert(term)?;
    }
    let mut data = Vec::with_capacity(n * d);
    for _ in 0..n * d {
        r.read_exact(&mut u32buf).map_err(io)?;
        data.push(T::of(f32::from_le_bytes(u32buf) as f64));
    }
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let vectors = Array2::from_shape_vec((n, d), data).expect("read n * d values");
    EmbeddingMatrix::new(vocab, vectors, label)
}
