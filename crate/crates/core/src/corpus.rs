//! Corpus readers: newline-delimited records or a directory of text files,
//! optionally joined with a metadata table.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::dtm::read_meta;
use crate::error::{Error, Result};
use crate::text::{DocMeta, RawDocument};

/// Reads one document per line. A line `id<TAB>text` sets the id explicitly;
/// otherwise documents are named `doc1`, `doc2`, ... by line number.
pub fn read_lines_corpus(path: &Path) -> Result<Vec<RawDocument>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .enumerate()
        .map(|(i, line)| match line.split_once('\t') {
            Some((id, body)) => RawDocument::new(id.trim(), body),
            None => RawDocument::new(format!("doc{}", i + 1), line),
        })
        .collect())
}

/// Reads every regular file in `dir` (sorted by name); the id is the file stem.
pub fn read_dir_corpus(dir: &Path) -> Result<Vec<RawDocument>> {
    let mut entries: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .collect();
    entries.sort();
    entries
        .into_iter()
        .map(|p| {
            let bytes = fs::read(&p).map_err(|e| Error::io(&p, e))?;
            let id = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok(RawDocument::new(id, String::from_utf8_lossy(&bytes)))
        })
        .collect()
}

/// Reads a corpus from a file or directory and attaches metadata by id.
pub fn read_corpus(path: &Path, meta: Option<&Path>) -> Result<Vec<RawDocument>> {
    let mut docs = if path.is_dir() {
        read_dir_corpus(path)?
    } else {
        read_lines_corpus(path)?
    };
    let mut seen = HashMap::new();
    for (i, d) in docs.iter().enumerate() {
        if seen.insert(d.meta.id.clone(), i).is_some() {
            return Err(Error::parse(path.display().to_string(), format!("duplicate document id {:?}", d.meta.id)));
        }
    }
    if let Some(meta_path) = meta {
        attach_meta(&mut docs, read_meta(meta_path)?);
    }
    Ok(docs)
}

/// Copies date/source/group onto documents with matching ids; others keep defaults.
pub fn attach_meta(docs: &mut [RawDocument], meta: Vec<DocMeta>) {
    let by_id: HashMap<String, DocMeta> = meta.into_iter().map(|m| (m.id.clone(), m)).collect();
    for d in docs {
        if let Some(m) = by_id.get(&d.meta.id) {
            d.meta = m.clone();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_records_with_and_without_ids() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.txt");
        fs::write(&p, "a1\thello world\nplain line\n").unwrap();
        let meta = dir.path().join("m.csv");
        fs::write(&meta, "id,date,source,group\na1,2016-05-02,NYT,left\n").unwrap();
        let docs = read_corpus(&p, Some(&meta)).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].meta.id, "a1");
        assert_eq!(docs[0].meta.source.as_deref(), Some("NYT"));
        assert_eq!(docs[0].meta.date.unwrap().to_string(), "2016-05-02");
        assert_eq!(docs[1].meta.id, "doc2");
        assert_eq!(docs[1].text, "plain line");
    }

    #[test]
    fn directory_corpus_sorted_by_name() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("b.txt"), "second").unwrap();
        fs::write(dir.path().join("a.txt"), "first").unwrap();
        let docs = read_corpus(dir.path(), None).unwrap();
        assert_eq!(docs[0].meta.id, "a");
        assert_eq!(docs[1].text, "second");
    }

    #[test]
    fn duplicate_ids_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.txt");
        fs::write(&p, "x\tone\nx\ttwo\n").unwrap();
        assert!(read_corpus(&p, None).is_err());
    }
}
