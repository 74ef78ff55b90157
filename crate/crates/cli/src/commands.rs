use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use adaptkit::lminterp::weights::{read_groups, WeightsSpec};
use adaptkit::lminterp::{bake_arpa, fit_hierarchical, fit_weights_em, EmOptions, LanguageModel, ModelGroup};
use adaptkit::ngramlm::{arpa, count_ngrams, estimate_kn_with, Discounting};
use adaptkit::phrasetable::{
    backoff_merge, concat_bitexts, create_maybe_gzip, indicator_merge, open_maybe_gzip, reordering_merge,
};
use adaptkit::textnorm::{
    apply_char_rules, normalize_arabic, protect_emoticons, read_corpus, restore_emoticons, select_intended,
    strip_markup, EmoticonPatterns, NormalizeOptions, RewriteRuleSet, TagPatterns,
};
use adaptkit::translit::synth::synthetic_pairs;
use adaptkit::translit::{mine, read_pairs, transliterate_beam, write_mined};
use adaptkit::tuneselect::{filter_bitext, kde_lengths};
use adaptkit::wordclasses::{induce_classes, map_corpus};
use adaptkit::{
    Error, LengthFilterSpec, MixtureLm, NGramModel, OovPolicy, PhraseTable, ReorderingTable, Result, Sentence,
    TransliterationModel, WordClustering,
};
use serde_json::{json, Value};

use crate::args::*;

/// Rounds to 6 significant digits for printed records.
pub fn sig6(x: f64) -> Value {
    if !x.is_finite() {
        return Value::String(x.to_string());
    }
    let r: f64 = format!("{x:.5e}").parse().unwrap_or(x);
    json!(r)
}

/// Per-run bookkeeping that ends up in the manifest.
#[derive(Default)]
pub struct Ctx {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    pub summary: Option<Value>,
    pub stdout_used: bool,
}

impl Ctx {
    fn open(&mut self, path: &Path) -> Result<Box<dyn BufRead>> {
        self.inputs.push(path.display().to_string());
        open_maybe_gzip(path).map_err(|e| with_path(e, path))
    }

    fn open_or_stdin(&mut self, path: Option<&Path>) -> Result<Box<dyn BufRead>> {
        match path {
            Some(p) => self.open(p),
            None => {
                self.inputs.push("-".into());
                Ok(Box::new(BufReader::new(io::stdin())))
            }
        }
    }

    fn create(&mut self, path: &Path) -> Result<Box<dyn Write>> {
        self.outputs.push(path.display().to_string());
        create_maybe_gzip(path).map_err(|e| with_path(e, path))
    }

    fn create_or_stdout(&mut self, path: Option<&Path>) -> Result<Box<dyn Write>> {
        match path {
            Some(p) => self.create(p),
            None => {
                self.outputs.push("-".into());
                self.stdout_used = true;
                Ok(Box::new(io::BufWriter::new(io::stdout())))
            }
        }
    }

    fn corpus(&mut self, path: &Path) -> Result<Vec<Sentence>> {
        read_corpus(self.open(path)?)
    }

    fn arpa(&mut self, path: &Path) -> Result<NGramModel> {
        arpa::read_arpa(self.open(path)?)
    }

    fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }
}

fn with_path(e: io::Error, path: &Path) -> Error {
    Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn finish(mut w: Box<dyn Write>) -> Result<()> {
    w.flush()?;
    drop(w);
    Ok(())
}

pub fn run(cmd: &Command, ctx: &mut Ctx) -> Result<()> {
    match cmd {
        Command::Normalize(a) => normalize(a, ctx),
        Command::LmTrain(a) => lm_train(a, ctx),
        Command::LmPpl(a) => lm_ppl(a, ctx),
        Command::LmInterp(a) => lm_interp(a, ctx),
        Command::LmHierInterp(a) => lm_hier_interp(a, ctx),
        Command::LmBake(a) => lm_bake(a, ctx),
        Command::Classes(a) => classes(a, ctx),
        Command::MapClasses(a) => map_classes(a, ctx),
        Command::PtBackoff(a) => pt_pair(a, ctx, backoff_merge),
        Command::PtMerge(a) => pt_pair(a, ctx, indicator_merge),
        Command::RtMerge(a) => rt_merge(a, ctx),
        Command::CatBitext(a) => cat_bitext(a, ctx),
        Command::TranslitMine(a) => translit_mine(a, ctx),
        Command::TranslitGen(a) => translit_gen(a, ctx),
        Command::TranslitSynth(a) => translit_synth(a, ctx),
        Command::Kde(a) => kde(a, ctx),
        Command::FilterTune(a) => filter_tune(a, ctx),
    }
}

fn normalize(a: &NormalizeArgs, ctx: &mut Ctx) -> Result<()> {
    let tags = TagPatterns::new(&a.tags)?;
    let emoticons = match (a.no_emoticons, a.emoticons.is_empty()) {
        (true, _) => None,
        (false, true) => Some(EmoticonPatterns::default_set()),
        (false, false) => Some(EmoticonPatterns::new(&a.emoticons)?),
    };
    let rules = match &a.rules {
        Some(p) => RewriteRuleSet::from_reader(ctx.open(p)?)?,
        None => RewriteRuleSet::default(),
    };
    let opts = NormalizeOptions {
        strip_tatweel: !a.keep_tatweel,
        collapse_elongation: !a.keep_elongation,
        normalize_alef_ya: a.normalize_alef_ya,
    };
    let input = ctx.open_or_stdin(a.input.as_deref())?;
    let mut out = ctx.create_or_stdout(a.output.as_deref())?;
    let mut lines = 0usize;
    for line in input.lines() {
        let line = line?;
        let line = match &a.delimiter {
            Some(d) => select_intended(&line, d),
            None => line,
        };
        let s = strip_markup(&Sentence::from_line(&line), &tags);
        let s = match &emoticons {
            Some(p) => {
                let (s, map) = protect_emoticons(&s, p)?;
                let s = normalize_arabic(&s, opts).map_tokens(|w| apply_char_rules(w, &rules));
                restore_emoticons(&s, &map)
            }
            None => normalize_arabic(&s, opts).map_tokens(|w| apply_char_rules(w, &rules)),
        };
        writeln!(out, "{s}")?;
        lines += 1;
    }
    finish(out)?;
    ctx.summary = Some(json!({ "lines": lines }));
    Ok(())
}

fn lm_train(a: &LmTrainArgs, ctx: &mut Ctx) -> Result<()> {
    let corpus = ctx.corpus(&a.corpus)?;
    let mut counts = count_ngrams(&corpus, a.order)?;
    if let Some(v) = &a.vocab {
        let mut words = Vec::new();
        for line in ctx.open(v)?.lines() {
            words.extend(line?.split_whitespace().map(str::to_owned));
        }
        counts.extend_vocab(words.iter().map(String::as_str));
    }
    if let Some(p) = &a.counts {
        let mut w = ctx.create(p)?;
        counts.write_text(&mut w)?;
        finish(w)?;
    }
    let discounting = match a.fixed_discount {
        Some(d) => Discounting::Fixed(d),
        None => Discounting::Modified,
    };
    let (model, warnings) = estimate_kn_with(&counts, discounting)?;
    // already logged by the estimator
    ctx.warnings.extend(warnings.into_iter().map(|w| w.message));
    let mut out = ctx.create(&a.output)?;
    arpa::write_arpa(&model, &mut out)?;
    finish(out)?;
    let ngrams: Vec<usize> = (1..=model.order()).map(|k| model.ngram_count(k)).collect();
    ctx.summary = Some(json!({
        "order": model.order(),
        "sentences": corpus.len(),
        "vocab": model.vocab().len(),
        "ngrams": ngrams,
    }));
    Ok(())
}

fn lm_ppl(a: &LmPplArgs, ctx: &mut Ctx) -> Result<()> {
    let model = ctx.arpa(&a.model)?;
    let corpus = ctx.corpus(&a.corpus)?;
    let policy = match a.oov {
        OovMode::Skip => OovPolicy::Skip,
        OovMode::Unk => OovPolicy::ScoreAsUnk,
    };
    let p = model.perplexity(&corpus, policy)?;
    ctx.summary = Some(json!({
        "corpus": a.corpus.display().to_string(),
        "sentences": p.sentences,
        "tokens": p.tokens_scored,
        "oovs": p.oov_count,
        "logprob": sig6(p.logprob),
        "ppl": sig6(p.value),
    }));
    Ok(())
}

fn em_options(a: &EmArgs) -> Result<EmOptions> {
    if a.max_iter == 0 || !(a.tol > 0.0) {
        return Err(Error::InvalidArgument("--max-iter and --tol must be positive".into()));
    }
    Ok(EmOptions {
        max_iter: a.max_iter,
        tol: a.tol,
    })
}

fn write_weights(m: &MixtureLm, path: Option<&PathBuf>, ctx: &mut Ctx) -> Result<()> {
    if let Some(p) = path {
        let mut w = ctx.create(p)?;
        WeightsSpec::from_mixture(m).write(&mut w)?;
        finish(w)?;
    }
    Ok(())
}

fn lm_interp(a: &LmInterpArgs, ctx: &mut Ctx) -> Result<()> {
    let opts = em_options(&a.em)?;
    let mut models = Vec::with_capacity(a.models.len());
    for p in &a.models {
        models.push(Arc::new(ctx.arpa(p)?));
    }
    let heldout = ctx.corpus(&a.heldout)?;
    let comps: Vec<&dyn LanguageModel> = models.iter().map(|m| m.as_ref() as &dyn LanguageModel).collect();
    let fit = fit_weights_em(&comps, &heldout, &opts)?;
    if !fit.trace.converged {
        ctx.warn(format!("EM stopped after {} iterations without converging", fit.trace.iterations));
    }
    let leaves = a
        .models
        .iter()
        .zip(&models)
        .map(|(p, m)| MixtureLm::leaf(p.display().to_string(), m.clone()))
        .collect();
    let mixture = MixtureLm::node("all", leaves, fit.weights.clone())?;
    write_weights(&mixture, a.output.as_ref(), ctx)?;
    ctx.summary = Some(json!({
        "weights": fit.weights.iter().map(|&w| sig6(w)).collect::<Vec<_>>(),
        "ppl": sig6(fit.perplexity),
        "iterations": fit.trace.iterations,
        "converged": fit.trace.converged,
    }));
    Ok(())
}

fn lm_hier_interp(a: &LmHierInterpArgs, ctx: &mut Ctx) -> Result<()> {
    let opts = em_options(&a.em)?;
    let manifest = read_groups(ctx.open(&a.groups)?)?;
    let mut cache: Vec<(String, Arc<NGramModel>)> = Vec::new();
    let mut groups: Vec<ModelGroup> = Vec::with_capacity(manifest.len());
    for (name, paths) in manifest {
        let mut members = Vec::with_capacity(paths.len());
        for p in paths {
            let model = match cache.iter().find(|(q, _)| *q == p) {
                Some((_, m)) => m.clone(),
                None => {
                    let m = Arc::new(ctx.arpa(Path::new(&p))?);
                    cache.push((p.clone(), m.clone()));
                    m
                }
            };
            members.push((p, model));
        }
        groups.push((name, members));
    }
    let heldout = ctx.corpus(&a.heldout)?;
    let fit = fit_hierarchical(&groups, &heldout, &opts)?;
    for (g, f) in groups.iter().zip(&fit.group_fits) {
        if !f.trace.converged {
            ctx.warn(format!("EM for group {} did not converge", g.0));
        }
    }
    write_weights(&fit.mixture, a.output.as_ref(), ctx)?;
    let group_records: Vec<Value> = groups
        .iter()
        .zip(&fit.group_fits)
        .zip(&fit.root_fit.weights)
        .map(|(((name, _), f), &w)| {
            json!({
                "group": name,
                "weight": sig6(w),
                "weights": f.weights.iter().map(|&x| sig6(x)).collect::<Vec<_>>(),
                "ppl": sig6(f.perplexity),
            })
        })
        .collect();
    ctx.summary = Some(json!({ "groups": group_records, "ppl": sig6(fit.root_fit.perplexity) }));
    Ok(())
}

fn lm_bake(a: &LmBakeArgs, ctx: &mut Ctx) -> Result<()> {
    let spec = WeightsSpec::read(ctx.open(&a.weights)?)?;
    let mut loaded = Vec::new();
    let mixture = spec.build(|p| {
        loaded.push(p.to_owned());
        arpa::read_arpa(open_maybe_gzip(Path::new(p)).map_err(|e| with_path(e, Path::new(p)))?)
    })?;
    ctx.inputs.extend(loaded);
    let order = a.order.unwrap_or_else(|| mixture.order());
    let baked = bake_arpa(&mixture, order)?;
    let mut out = ctx.create(&a.output)?;
    arpa::write_arpa(&baked, &mut out)?;
    finish(out)?;
    let ngrams: Vec<usize> = (1..=order).map(|k| baked.ngram_count(k)).collect();
    ctx.summary = Some(json!({ "order": order, "ngrams": ngrams }));
    Ok(())
}

fn classes(a: &ClassesArgs, ctx: &mut Ctx) -> Result<()> {
    let corpus = ctx.corpus(&a.corpus)?;
    let (clustering, obj) = induce_classes(&corpus, a.num_classes, a.iters, a.seed)?;
    let mut out = ctx.create(&a.output)?;
    clustering.write_tsv(&mut out)?;
    finish(out)?;
    ctx.summary = Some(json!({
        "classes": clustering.k(),
        "words": clustering.len(),
        "objective": sig6(obj.value),
        "initial_objective": sig6(obj.initial),
        "moves": obj.moves.len(),
        "sweeps": obj.sweeps,
    }));
    Ok(())
}

fn map_classes(a: &MapClassesArgs, ctx: &mut Ctx) -> Result<()> {
    let clustering = WordClustering::read_tsv(ctx.open(&a.classes)?)?;
    let corpus = ctx.corpus(&a.corpus)?;
    let mut out = ctx.create_or_stdout(a.output.as_deref())?;
    for s in map_corpus(&corpus, &clustering) {
        writeln!(out, "{s}")?;
    }
    finish(out)?;
    ctx.summary = Some(json!({ "sentences": corpus.len() }));
    Ok(())
}

fn pt_pair(a: &PtPairArgs, ctx: &mut Ctx, merge: fn(&PhraseTable, &PhraseTable) -> Result<PhraseTable>) -> Result<()> {
    let pin = PhraseTable::read(ctx.open(&a.in_domain)?)?;
    let pout = PhraseTable::read(ctx.open(&a.out_domain)?)?;
    let merged = merge(&pin, &pout)?;
    let mut out = ctx.create(&a.output)?;
    merged.write(&mut out)?;
    finish(out)?;
    ctx.summary = Some(json!({
        "in_rows": pin.len(),
        "out_rows": pout.len(),
        "rows": merged.len(),
        "features": merged.feature_count(),
    }));
    Ok(())
}

fn rt_merge(a: &RtMergeArgs, ctx: &mut Ctx) -> Result<()> {
    let rin = ReorderingTable::read(ctx.open(&a.tables.in_domain)?, a.block_size)?;
    let rout = ReorderingTable::read(ctx.open(&a.tables.out_domain)?, a.block_size)?;
    let merged = reordering_merge(&rin, &rout)?;
    let mut out = ctx.create(&a.tables.output)?;
    merged.write(&mut out)?;
    finish(out)?;
    ctx.summary = Some(json!({ "in_rows": rin.len(), "out_rows": rout.len(), "rows": merged.len() }));
    Ok(())
}

fn cat_bitext(a: &CatBitextArgs, ctx: &mut Ctx) -> Result<()> {
    if a.src.len() != a.tgt.len() {
        return Err(Error::InvalidArgument(format!(
            "{} --src files but {} --tgt files",
            a.src.len(),
            a.tgt.len()
        )));
    }
    let pairs: Vec<(PathBuf, PathBuf)> = a.src.iter().cloned().zip(a.tgt.iter().cloned()).collect();
    for (s, t) in &pairs {
        ctx.inputs.push(s.display().to_string());
        ctx.inputs.push(t.display().to_string());
    }
    let mut os = ctx.create(&a.out_src)?;
    let mut ot = ctx.create(&a.out_tgt)?;
    let n = concat_bitexts(&pairs, &mut os, &mut ot)?;
    finish(os)?;
    finish(ot)?;
    ctx.summary = Some(json!({ "lines": n }));
    Ok(())
}

fn translit_mine(a: &TranslitMineArgs, ctx: &mut Ctx) -> Result<()> {
    let pairs = read_pairs(ctx.open(&a.pairs)?)?;
    let r = mine(&pairs, a.iters, a.threshold)?;
    if !r.is_monotone(1e-9) {
        ctx.warn("mining log-likelihood decreased in some iteration".into());
    }
    if let Some(p) = &a.model {
        let mut w = ctx.create(p)?;
        r.model.write(&mut w)?;
        finish(w)?;
    }
    let mut out = ctx.create_or_stdout(a.output.as_deref())?;
    write_mined(&r.pairs, &mut out)?;
    finish(out)?;
    let mined = r
        .pairs
        .iter()
        .filter(|p| p.label == adaptkit::translit::PairLabel::Transliteration)
        .count();
    ctx.summary = Some(json!({
        "pairs": pairs.len(),
        "transliterations": mined,
        "lambda": sig6(r.model.lambda()),
        "loglik": sig6(*r.loglik.last().unwrap()),
    }));
    Ok(())
}

fn translit_gen(a: &TranslitGenArgs, ctx: &mut Ctx) -> Result<()> {
    let model = TransliterationModel::read(ctx.open(&a.model)?)?;
    let input = ctx.open_or_stdin(a.input.as_deref())?;
    let mut out = ctx.create_or_stdout(a.output.as_deref())?;
    let (mut words, mut uncovered) = (0usize, 0usize);
    for line in input.lines() {
        let line = line?;
        let word = line.trim();
        if word.is_empty() {
            continue;
        }
        words += 1;
        let cands = transliterate_beam(&model, word, a.k, a.beam)?;
        if cands.is_empty() {
            uncovered += 1;
        }
        for (t, score) in cands {
            writeln!(out, "{word}\t{t}\t{score}")?;
        }
    }
    finish(out)?;
    if uncovered > 0 {
        ctx.warn(format!("{uncovered} of {words} words could not be transliterated"));
    }
    ctx.summary = Some(json!({ "words": words, "untransliterable": uncovered }));
    Ok(())
}

fn translit_synth(a: &TranslitSynthArgs, ctx: &mut Ctx) -> Result<()> {
    let data = synthetic_pairs(a.seed, a.n_translit, a.n_random)?;
    let mut out = ctx.create(&a.output)?;
    for p in &data {
        writeln!(out, "{}\t{}", p.src, p.tgt)?;
    }
    finish(out)?;
    if let Some(l) = &a.labels {
        let mut out = ctx.create(l)?;
        for p in &data {
            writeln!(out, "{}", u8::from(p.is_transliteration))?;
        }
        finish(out)?;
    }
    ctx.summary = Some(json!({ "pairs": data.len() }));
    Ok(())
}

fn kde(a: &KdeArgs, ctx: &mut Ctx) -> Result<()> {
    let lengths: Vec<usize> = ctx.corpus(&a.corpus)?.iter().map(Sentence::len).filter(|&n| n > 0).collect();
    let d = kde_lengths(&lengths, a.bandwidth, a.grid)?;
    let mut out = ctx.create_or_stdout(a.output.as_deref())?;
    d.write_csv(&mut out)?;
    finish(out)?;
    ctx.summary = Some(json!({
        "sentences": lengths.len(),
        "mode": sig6(d.mode()),
        "integral": sig6(d.integral()),
    }));
    Ok(())
}

fn filter_tune(a: &FilterTuneArgs, ctx: &mut Ctx) -> Result<()> {
    let spec = LengthFilterSpec::new(a.min_len, a.max_len)?;
    let src = ctx.corpus(&a.src)?;
    let tgt = ctx.corpus(&a.tgt)?;
    let (fs, ft) = filter_bitext(&src, &tgt, spec)?;
    for (path, side) in [(&a.out_src, &fs), (&a.out_tgt, &ft)] {
        let mut out = ctx.create(path)?;
        for s in side {
            writeln!(out, "{s}")?;
        }
        finish(out)?;
    }
    ctx.summary = Some(json!({ "pairs": src.len(), "kept": fs.len() }));
    Ok(())
}
