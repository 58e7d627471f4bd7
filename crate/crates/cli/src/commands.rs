use std::collections::HashSet;
use std::path::{Path, PathBuf};

use chrono::Datelike;
use semcarto::alignment::{chain_align, cross_space_similarity, term_drift, AlignOptions, ChainMode};
use semcarto::cmd::{aggregate_series, cmd_scores, Bucket, CmdMethod, ConceptSpec, Pole};
use semcarto::corpus::read_corpus;
use semcarto::dtm::{build_dtm, intersect_vocabularies, prune_sparse_terms, read_dtm, write_dtm, DocumentTermMatrix, DtmPaths};
use semcarto::embedding::{
    load_embeddings, nearest_neighbors, neighbors_of_vector, parse_expression, read_binary_cache, term_cosine,
    vector_arithmetic, write_embeddings, EmbeddingMatrix,
};
use semcarto::semantics::{build_centroid, build_direction, project_term, DirectionOptions, SemanticDirection, TermPairSet};
use semcarto::tcm::{build_tcm, Weighting};
use semcarto::text::{normalize_corpus, DocMeta, NormalizationConfig};
use semcarto::train::{train_with_config, SvdTrainingConfig};
use semcarto::transport::{
    aggregate_blocks, distance_to_similarity, map_dtm, pairwise_distances, GroundMetric, Method, Sidedness,
    SimilarityMode, TransportConfig, WeightMode,
};

use crate::args::*;
use crate::output::{note, num, opt, CsvOut};
use crate::{core, CliError, Command, RunConfig};

type Emb = EmbeddingMatrix<f64>;

pub(crate) fn dispatch(config: &RunConfig) -> Result<(), CliError> {
    let out = config.output.as_deref();
    match &config.command {
        Command::Preprocess(a) => preprocess(a, out),
        Command::Intersect(a) => intersect(a, out),
        Command::Train(a) => train(a, out),
        Command::Align(a) => align(a, out),
        Command::Drift(a) => drift(a, out),
        Command::Direction(a) => direction(a, out),
        Command::Project(a) => project(a, out),
        Command::Docdist(a) => docdist(a, out),
        Command::Cmd(a) => cmd(a, out),
        Command::Cosine(a) => cosine(a, out),
        Command::Neighbors(a) => neighbors(a, out),
    }
}

/// Text embeddings, or the binary cache when the file ends in `.semb`.
fn load_emb(path: &Path, command: &'static str) -> Result<Emb, CliError> {
    let loaded = if path.extension().is_some_and(|e| e == "semb") {
        read_binary_cache(path)
    } else {
        load_embeddings(path, None)
    };
    loaded.map_err(core(command))
}

fn load_dtm(prefix: &Path, command: &'static str) -> Result<DocumentTermMatrix, CliError> {
    read_dtm(&DtmPaths::from_prefix(prefix)).map_err(core(command))
}

fn normalization(a: &NormalizeArgs, command: &'static str) -> Result<NormalizationConfig, CliError> {
    let mut cfg = NormalizationConfig {
        strip_non_ascii: !a.keep_non_ascii,
        strip_urls_html: !a.keep_urls_html,
        ordinal_to_word: !a.keep_numerals,
        numeral_to_word: !a.keep_numerals,
        lowercase: !a.keep_case,
        ..NormalizationConfig::default()
    };
    if let Some(p) = &a.stopwords {
        cfg.load_stopwords(p).map_err(core(command))?;
    }
    if let Some(p) = &a.contractions {
        cfg.load_contractions(p).map_err(core(command))?;
    }
    Ok(cfg)
}

fn tokenize(a: &NormalizeArgs, command: &'static str) -> Result<Vec<semcarto::text::TokenizedDocument>, CliError> {
    let cfg = normalization(a, command)?;
    let docs = read_corpus(&a.corpus, a.meta.as_deref()).map_err(core(command))?;
    Ok(normalize_corpus(&docs, &cfg))
}

fn preprocess(a: &PreprocessArgs, out: Option<&Path>) -> Result<(), CliError> {
    const C: &str = "preprocess";
    let docs = tokenize(&a.normalize, C)?;
    let dtm = build_dtm(&docs).map_err(core(C))?;
    let pruned = prune_sparse_terms(&dtm, a.sparsity).map_err(core(C))?;
    note(
        C,
        format!(
            "{} documents, {} of {} terms kept, {} documents empty",
            pruned.n_docs(),
            pruned.n_terms(),
            dtm.n_terms(),
            pruned.empty_docs().len()
        ),
    );
    write_dtm(&pruned, &DtmPaths::from_prefix(&a.dtm)).map_err(core(C))?;
    vocabulary_csv(&pruned, C, out)
}

fn vocabulary_csv(dtm: &DocumentTermMatrix, command: &'static str, out: Option<&Path>) -> Result<(), CliError> {
    let mut totals = vec![0u64; dtm.n_terms()];
    for (_, t, c) in dtm.triplets() {
        totals[t] += c;
    }
    let df = dtm.document_frequencies();
    let mut csv = CsvOut::create(command, out, &["term", "doc_freq", "count"])?;
    for (id, term) in dtm.vocab().iter() {
        csv.row([term.to_string(), df[id].to_string(), totals[id].to_string()])?;
    }
    csv.finish()
}

fn intersect(a: &IntersectArgs, out: Option<&Path>) -> Result<(), CliError> {
    const C: &str = "intersect";
    let x = load_dtm(&a.a, C)?;
    let y = load_dtm(&a.b, C)?;
    let (x, y) = intersect_vocabularies(&x, &y).map_err(core(C))?;
    write_dtm(&x, &DtmPaths::from_prefix(&a.out_a)).map_err(core(C))?;
    write_dtm(&y, &DtmPaths::from_prefix(&a.out_b)).map_err(core(C))?;
    vocabulary_csv(&x, C, out)
}

fn train(a: &TrainArgs, out: Option<&Path>) -> Result<(), CliError> {
    const C: &str = "train";
    let docs = tokenize(&a.normalize, C)?;
    let mut streams: Vec<Vec<String>> = docs.into_iter().map(|d| d.tokens).collect();
    if let Some(t) = a.sparsity {
        let tokenized: Vec<_> = streams
            .iter()
            .enumerate()
            .map(|(i, s)| semcarto::text::TokenizedDocument { meta: DocMeta::new(i.to_string()), tokens: s.clone() })
            .collect();
        let pruned = prune_sparse_terms(&build_dtm(&tokenized).map_err(core(C))?, t).map_err(core(C))?;
        let keep: HashSet<&str> = pruned.vocab().terms().iter().map(String::as_str).collect();
        for s in &mut streams {
            s.retain(|w| keep.contains(w.as_str()));
        }
    }
    let weighting = match a.weighting {
        WeightingArg::Uniform => Weighting::Uniform,
        WeightingArg::InverseDistance => Weighting::InverseDistance,
    };
    let tcm = build_tcm::<f64, _>(&streams, a.window, weighting).map_err(core(C))?;
    let cfg = SvdTrainingConfig { ppmi_shift: a.ppmi_shift, ..SvdTrainingConfig::new(a.dim) };
    let mut emb = train_with_config(&tcm, &cfg).map_err(core(C))?;
    let label = a.label.clone().unwrap_or_else(|| {
        a.save.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
    });
    emb.set_label(label);
    write_embeddings(&emb, &a.save).map_err(core(C))?;

    let mut csv = CsvOut::create(C, out, &["label", "vocab_size", "dim", "window", "weighting", "ppmi_shift", "nonzeros"])?;
    let weighting = match weighting {
        Weighting::Uniform => "uniform",
        Weighting::InverseDistance => "inverse-distance",
    };
    csv.row([
        emb.label().to_string(),
        emb.len().to_string(),
        emb.dim().to_string(),
        a.window.to_string(),
        weighting.to_string(),
        num(a.ppmi_shift),
        tcm.nnz().to_string(),
    ])?;
    csv.finish()
}

fn load_spaces(paths: &[PathBuf], command: &'static str) -> Result<Vec<Emb>, CliError> {
    let spaces: Vec<Emb> = paths.iter().map(|p| load_emb(p, command)).collect::<Result<_, _>>()?;
    let mut seen = HashSet::new();
    for s in &spaces {
        if !seen.insert(s.label().to_string()) {
            return Err(CliError::Usage(format!("{command}: two spaces share the label {:?}", s.label())));
        }
    }
    Ok(spaces)
}

fn chain_mode(mode: ChainArg, no_align: bool) -> ChainMode {
    match (no_align, mode) {
        (true, _) => ChainMode::None,
        (false, ChainArg::ToFirst) => ChainMode::ToFirst,
        (false, ChainArg::ToPrevious) => ChainMode::ToPrevious,
    }
}

fn align(a: &AlignArgs, out: Option<&Path>) -> Result<(), CliError> {
    const C: &str = "align";
    let spaces = load_spaces(&a.emb, C)?;
    let opts = AlignOptions { scale: a.scale, ..AlignOptions::default() };
    let set = chain_align(spaces, chain_mode(a.mode, a.no_align), &opts).map_err(core(C))?;
    if let Some(dir) = &a.save_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Output { command: C, source: e })?;
        for s in &set.spaces {
            write_embeddings(s, &dir.join(format!("{}.txt", s.label()))).map_err(core(C))?;
        }
    }
    let mut csv = CsvOut::create(C, out, &["space", "anchor_size", "residual", "scale"])?;
    for r in &set.reports {
        let scale = if a.scale { num(r.scale) } else { String::new() };
        csv.row([r.label.clone(), r.anchor_size.to_string(), num(r.residual), scale])?;
    }
    csv.finish()
}

fn drift(a: &DriftArgs, out: Option<&Path>) -> Result<(), CliError> {
    const C: &str = "drift";
    let spaces = load_spaces(&a.emb, C)?;
    if a.probes.is_empty() {
        let set = chain_align(spaces, chain_mode(a.mode, a.no_align), &AlignOptions::default()).map_err(core(C))?;
        let values = cross_space_similarity(&a.term, &set).map_err(core(C))?;
        let reference = set.spaces[set.reference_index].label().to_string();
        let mut csv = CsvOut::create(C, out, &["space", "term", "reference", "cosine"])?;
        for (s, v) in set.spaces.iter().zip(values) {
            csv.row([s.label().to_string(), a.term.clone(), reference.clone(), opt(v)])?;
        }
        return csv.finish();
    }
    let series = term_drift(&a.term, &spaces, &a.probes).map_err(core(C))?;
    for (space, term) in &series.missing {
        note(C, format!("{term} missing from {space}"));
    }
    let mut csv = CsvOut::create(C, out, &["space", "term", "probe", "cosine"])?;
    for row in &series.rows {
        for (probe, v) in series.probes.iter().zip(&row.values) {
            csv.row([row.space.clone(), a.term.clone(), probe.clone(), opt(*v)])?;
        }
    }
    csv.finish()
}

fn pair_set(s: &PairSource, command: &'static str) -> Result<TermPairSet, CliError> {
    match (&s.pairs, &s.bundled) {
        (Some(p), _) => TermPairSet::from_path(p).map_err(core(command)),
        (None, Some(name)) => TermPairSet::bundled(name).ok_or_else(|| {
            let known: Vec<&str> = semcarto::semantics::BUNDLED_PAIR_SETS.iter().map(|(n, _)| *n).collect();
            CliError::Usage(format!("--bundled: unknown pair set {name:?} (known: {})", known.join(", ")))
        }),
        (None, None) => Err(CliError::Usage("one of --pairs or --bundled is required".into())),
    }
}

fn build_dir(s: &PairSource, emb: &Emb, command: &'static str) -> Result<SemanticDirection<f64>, CliError> {
    let pairs = pair_set(s, command)?;
    let opts = DirectionOptions { pre_normalize: s.pre_normalize, per_pair_normalize: s.per_pair_normalize };
    let dir = build_direction(&pairs, emb, opts).map_err(core(command))?;
    for (x, y) in &dir.skipped {
        note(command, format!("pair ({x}, {y}) skipped: term not in the embedding"));
    }
    Ok(dir)
}

fn direction(a: &DirectionArgs, out: Option<&Path>) -> Result<(), CliError> {
    const C: &str = "direction";
    let emb = load_emb(&a.emb, C)?;
    let dir = build_dir(&a.source, &emb, C)?;
    if let Some(path) = &a.save {
        let row = (format!("{}-{}", dir.label_a, dir.label_b), dir.vector.to_vec());
        let saved = EmbeddingMatrix::from_rows(vec![row], "direction").map_err(core(C))?;
        write_embeddings(&saved, path).map_err(core(C))?;
    }
    let mut csv = CsvOut::create(C, out, &["pole_a", "pole_b", "term_a", "term_b", "status"])?;
    let rows = dir.source_pairs.iter().map(|p| (p, "used")).chain(dir.skipped.iter().map(|p| (p, "skipped")));
    for ((x, y), status) in rows {
        csv.row([dir.label_a.as_str(), dir.label_b.as_str(), x, y, status])?;
    }
    csv.finish()
}

fn project(a: &ProjectArgs, out: Option<&Path>) -> Result<(), CliError> {
    const C: &str = "project";
    let emb = load_emb(&a.emb, C)?;
    let dir = build_dir(&a.source, &emb, C)?;
    let mut csv = CsvOut::create(C, out, &["term", "projection", "pole_a", "pole_b"])?;
    for term in &a.terms {
        if !emb.vocab().contains(term) {
            note(C, format!("{term} skipped: not in the embedding"));
            continue;
        }
        let p = project_term(term, &dir, &emb).map_err(core(C))?;
        csv.row([term.clone(), num(p), dir.label_a.clone(), dir.label_b.clone()])?;
    }
    csv.finish()
}

fn transport_config(t: &TransportArgs) -> TransportConfig {
    TransportConfig {
        ground: match t.ground {
            GroundArg::Euclidean => GroundMetric::Euclidean,
            GroundArg::CosineDistance => GroundMetric::CosineDistance,
        },
        normalize_vectors: t.normalize_vectors,
        oracle_cap: t.oracle_cap,
    }
}

fn group_key(meta: &DocMeta, by: GroupArg) -> Result<String, CliError> {
    let key = match by {
        GroupArg::Source => meta.source.clone(),
        GroupArg::Group => meta.group.clone(),
        GroupArg::Year => meta.date.map(|d| d.year().to_string()),
    };
    key.ok_or_else(|| CliError::Data(format!("docdist: document {:?} has no {by:?} metadata", meta.id).to_lowercase()))
}

fn docdist(a: &DocdistArgs, out: Option<&Path>) -> Result<(), CliError> {
    const C: &str = "docdist";
    let emb = load_emb(&a.emb, C)?;
    let weights = match a.weights {
        WeightsArg::Nbow => WeightMode::Normalized,
        WeightsArg::RawCount => WeightMode::RawCount,
    };
    let q_dtm = load_dtm(&a.dtm, C)?;
    let c_dtm = match &a.against {
        Some(p) => load_dtm(p, C)?,
        None => q_dtm.clone(),
    };
    let q = map_dtm::<f64>(&q_dtm, emb.vocab(), weights);
    let c = map_dtm::<f64>(&c_dtm, emb.vocab(), weights);
    for (side, m) in [("query", &q), ("corpus", &c)] {
        if !m.skipped_docs.is_empty() {
            note(C, format!("{} {side} documents skipped (no in-vocabulary terms)", m.skipped_docs.len()));
        }
        if !m.oov_terms.is_empty() {
            note(C, format!("{} {side} terms not in the embedding", m.oov_terms.len()));
        }
    }
    let method = match a.method {
        MethodArg::Emd => Method::Emd,
        MethodArg::Rwmd => Method::Rwmd,
        MethodArg::LcRwmd => Method::LcRwmd,
        MethodArg::Wcd => Method::Wcd,
    };
    let sidedness = match a.sidedness {
        SidednessArg::QueryToCorpus => Sidedness::QueryToCorpus,
        SidednessArg::CorpusToQuery => Sidedness::CorpusToQuery,
        SidednessArg::Max => Sidedness::Max,
    };
    let cfg = transport_config(&a.transport);
    let mut result = pairwise_distances(&q.docs, &c.docs, &emb, &cfg, method, sidedness).map_err(core(C))?;
    result.weighting = weights;
    if let Some(mode) = a.similarity {
        let mode = match mode {
            SimilarityArg::NegateZscore => SimilarityMode::NegateZscore,
            SimilarityArg::Inverse => SimilarityMode::Inverse,
        };
        result = distance_to_similarity(&result, mode).map_err(core(C))?;
    }
    let (method, ground) = (result.method.to_string(), result.ground.to_string());

    if let Some(by) = a.group_by {
        let keys = |rows: &[usize], dtm: &DocumentTermMatrix| -> Result<Vec<String>, CliError> {
            rows.iter().map(|&r| group_key(&dtm.docs()[r], by)).collect()
        };
        let blocks = aggregate_blocks(&result, &keys(&q.rows, &q_dtm)?, &keys(&c.rows, &c_dtm)?).map_err(core(C))?;
        let mut csv = CsvOut::create(C, out, &["row_key", "col_key", "mean", "count", "method", "ground_metric"])?;
        for b in blocks {
            csv.row([b.row_key, b.col_key, num(b.mean), b.count.to_string(), method.clone(), ground.clone()])?;
        }
        return csv.finish();
    }
    let mut csv = CsvOut::create(C, out, &["row_id", "col_id", "value", "method", "ground_metric"])?;
    for (i, r) in result.row_ids.iter().enumerate() {
        for (j, c) in result.col_ids.iter().enumerate() {
            csv.row([r.as_str(), c.as_str(), &num(result.values[[i, j]]), &method, &ground])?;
        }
    }
    csv.finish()
}

fn parse_pole_source(payload: &str, base: &Path) -> Result<TermPairSet, CliError> {
    if let Some(name) = payload.strip_prefix("bundled:") {
        return TermPairSet::bundled(name)
            .ok_or_else(|| CliError::Data(format!("cmd: unknown bundled pair set {name:?}")));
    }
    TermPairSet::from_path(&base.join(payload)).map_err(core("cmd"))
}

/// Rows of `label,kind,payload`; payload terms are space separated, pole
/// payloads name a pair-set file (relative to the concept file) or `bundled:<name>`.
fn read_concepts(path: &Path, emb: &Emb) -> Result<Vec<(String, ConceptSpec<f64>)>, CliError> {
    let bad = |line: usize, msg: String| CliError::Data(format!("cmd: {}:{line}: {msg}", path.display()));
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("cmd: {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| bad(line, e.to_string()))?;
        if rec.len() != 3 {
            return Err(bad(line, "expected label,kind,payload".into()));
        }
        let terms = || rec[2].split_whitespace().map(str::to_string).collect::<Vec<_>>();
        let spec = match &rec[1] {
            "term" => ConceptSpec::Term(rec[2].to_string()),
            "compound" => ConceptSpec::Compound(terms()),
            "centroid" => ConceptSpec::Centroid(build_centroid(&terms(), emb).map_err(core("cmd"))?),
            kind @ ("pole+" | "pole-") => {
                let pairs = parse_pole_source(&rec[2], base)?;
                let direction = build_direction(&pairs, emb, DirectionOptions::default()).map_err(core("cmd"))?;
                let pole = if kind == "pole+" { Pole::Positive } else { Pole::Negative };
                ConceptSpec::DirectionPole { direction, pole }
            }
            other => return Err(bad(line, format!("unknown concept kind {other:?}"))),
        };
        out.push((rec[0].to_string(), spec));
    }
    if out.is_empty() {
        return Err(CliError::Data(format!("cmd: {}: no concepts", path.display())));
    }
    Ok(out)
}

fn cmd(a: &CmdArgs, out: Option<&Path>) -> Result<(), CliError> {
    const C: &str = "cmd";
    let emb = load_emb(&a.emb, C)?;
    let dtm = load_dtm(&a.dtm, C)?;
    let concepts = match (&a.concept, a.compound.is_empty(), &a.concepts) {
        (Some(t), _, _) => vec![(t.clone(), ConceptSpec::Term(t.clone()))],
        (None, false, _) => vec![(a.compound.join("+"), ConceptSpec::Compound(a.compound.clone()))],
        (None, true, Some(p)) => read_concepts(p, &emb)?,
        (None, true, None) => return Err(CliError::Usage("one of --concept, --compound or --concepts is required".into())),
    };
    let method = match a.method {
        CmdMethodArg::Exact => CmdMethod::Exact,
        CmdMethodArg::Rwmd => CmdMethod::Rwmd,
        CmdMethodArg::LcRwmd => CmdMethod::LcRwmd,
    };
    let cfg = transport_config(&a.transport);
    let mut series = Vec::with_capacity(concepts.len());
    for (label, spec) in &concepts {
        let s = cmd_scores(&dtm, label, spec, &emb, method, &cfg).map_err(core(C))?;
        if !s.skipped_concept_terms.is_empty() {
            note(C, format!("{label}: concept terms not in the embedding: {}", s.skipped_concept_terms.join(" ")));
        }
        if !s.skipped_docs.is_empty() {
            note(C, format!("{label}: {} documents skipped (no in-vocabulary terms)", s.skipped_docs.len()));
        }
        series.push(s);
    }

    if let Some(bucket) = a.bucket {
        let bucket = match bucket {
            BucketArg::Month => Bucket::Month,
            BucketArg::Year => Bucket::Year,
            BucketArg::Decade => Bucket::Decade,
        };
        let mut header = vec!["concept_label", "bucket", "mean", "count"];
        if a.deltas {
            header.push("delta");
        }
        let mut csv = CsvOut::create(C, out, &header)?;
        for s in &series {
            for b in aggregate_series(s, bucket, a.deltas).map_err(core(C))? {
                let mut row = vec![s.concept_label.clone(), b.bucket, num(b.mean), b.count.to_string()];
                if a.deltas {
                    row.push(opt(b.delta));
                }
                csv.row(row)?;
            }
        }
        return csv.finish();
    }
    let mut csv = CsvOut::create(C, out, &["doc_id", "date", "raw", "standardized", "concept_label"])?;
    for s in &series {
        for r in &s.rows {
            let date = r.date.map(|d| d.format("%Y-%m-%d").to_string()).unwrap_or_default();
            csv.row([r.doc_id.clone(), date, num(r.raw), num(r.standardized), s.concept_label.clone()])?;
        }
    }
    csv.finish()
}

fn cosine(a: &CosineArgs, out: Option<&Path>) -> Result<(), CliError> {
    const C: &str = "cosine";
    let emb = load_emb(&a.emb, C)?;
    let c = term_cosine(&emb, &a.a, &a.b).map_err(core(C))?;
    let mut csv = CsvOut::create(C, out, &["a", "b", "cosine"])?;
    csv.row([a.a.clone(), a.b.clone(), num(c)])?;
    csv.finish()
}

fn neighbors(a: &NeighborsArgs, out: Option<&Path>) -> Result<(), CliError> {
    const C: &str = "neighbors";
    let emb = load_emb(&a.emb, C)?;
    let found = match (&a.term, &a.expr) {
        (Some(t), _) => nearest_neighbors(t, a.k, &emb, &HashSet::from([t.as_str()])).map_err(core(C))?,
        (None, Some(expr)) => {
            let parsed = parse_expression(expr).map_err(|e| CliError::Usage(format!("--expr: {e}")))?;
            let exclude: HashSet<&str> = parsed.iter().map(|&(_, t)| t).collect();
            let v = vector_arithmetic(&parsed, &emb).map_err(core(C))?;
            neighbors_of_vector(v.view(), a.k, &emb, &exclude).map_err(core(C))?
        }
        (None, None) => return Err(CliError::Usage("one of --term or --expr is required".into())),
    };
    let mut csv = CsvOut::create(C, out, &["rank", "term", "similarity"])?;
    for (i, n) in found.iter().enumerate() {
        csv.row([(i + 1).to_string(), n.term.clone(), num(n.similarity)])?;
    }
    csv.finish()
}
