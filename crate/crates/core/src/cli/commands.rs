use super::config::{load_respondent, Config, SparedPole};
use super::manifest::RunManifest;
use super::{
    AnalyzeArgs, Cli, CliError, Command, CompareArgs, CorpusArgs, GenerateArgs, QueryArgs,
    RationaleArgs,
};
use crate::adapters::{
    build_respondent, read_records, run_campaign, CampaignError, CampaignOptions, ChoiceRecord,
    RespondentSpec,
};
use crate::compare::{
    compare_profiles, figures, load_baseline, BaselineProfile, ComparisonReport, LabeledProfile,
};
use crate::parser::{
    classify, corpus_mismatches, parse_corpus, valid_rate, Choice, ValidRate, BUNDLED_CORPUS,
    RULESET_VERSION,
};
use crate::render::{PhraseTable, RenderMode};
use crate::scenario::{
    filter_for_rationale_probe, generate_deck, read_deck, write_deck, Scenario, GENERATOR_VERSION,
};
use crate::stats::{code_profiles, estimate_amce, orientation_codes, AmceProfile, Attribute};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

pub const DECK: &str = "deck.jsonl";
pub const RESPONSES: &str = "responses.jsonl";
pub const VALIDITY: &str = "validity.json";
pub const AMCE_JSON: &str = "amce.json";
pub const AMCE_CSV: &str = "amce.csv";
pub const COMPARE_JSON: &str = "compare.json";
pub const COMPARE_CSV: &str = "compare.csv";
pub const COMPARE_PCA_CSV: &str = "compare_pca.csv";
pub const RATIONALE: &str = "rationale.jsonl";
pub const REPORT_MD: &str = "report.md";
const FIG_AMCE: &str = "figures/amce.svg";
const FIG_AMCE_COMPARE: &str = "figures/amce_compare.svg";
const FIG_DISTANCE: &str = "figures/distance.svg";
const FIG_PCA: &str = "figures/pca.svg";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidityReport {
    pub generator_version: String,
    pub ruleset_version: String,
    #[serde(flatten)]
    pub validity: ValidRate,
}

/// Contents of `amce.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AmceReport {
    pub generator_version: String,
    pub ruleset_version: String,
    pub validity: ValidRate,
    pub profile: AmceProfile,
}

struct Ctx {
    out: PathBuf,
    config: Config,
    manifest_files: Vec<&'static str>,
    respondent: Option<RespondentSpec>,
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

fn version_comment() -> String {
    format!("generatorVersion={GENERATOR_VERSION} rulesetVersion={RULESET_VERSION}")
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write(&mut self, name: &'static str, contents: &str) -> Result<(), CliError> {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(failed)?;
        }
        std::fs::write(&path, contents).map_err(|e| failed(format!("{}: {e}", path.display())))?;
        self.manifest_files.push(name);
        Ok(())
    }

    fn write_svg(&mut self, name: &'static str, svg: &str) -> Result<(), CliError> {
        self.write(name, &format!("<!-- {} -->\n{svg}", version_comment()))
    }

    fn remove_stale(&self, name: &str) {
        let _ = std::fs::remove_file(self.path(name));
    }

    fn deck(&self) -> Result<Vec<Scenario>, CliError> {
        let path = self.path(DECK);
        if !path.exists() {
            return Err(usage(format!(
                "{} not found; run `generate` first",
                path.display()
            )));
        }
        read_deck(&path).map_err(failed)
    }

    /// Response log with every completion re-classified by the current rules.
    fn responses(&self) -> Result<Vec<ChoiceRecord>, CliError> {
        let path = self.path(RESPONSES);
        if !path.exists() {
            return Err(usage(format!(
                "{} not found; run `run` first",
                path.display()
            )));
        }
        let mut records = read_records(&path).map_err(failed)?;
        for r in &mut records {
            if !r.is_transport_failure() {
                r.parsed = classify(&r.raw_text);
            }
        }
        Ok(records)
    }

    fn redacted_config(&self) -> serde_json::Value {
        let mut c = self.config.clone();
        c.run.respondent = c.run.respondent.map(|r| r.redacted());
        c.rationale.respondent = c.rationale.respondent.map(|r| r.redacted());
        serde_json::to_value(c).expect("config serializes")
    }

    fn finish(&self, command: &str) -> Result<(), CliError> {
        let mut m = RunManifest::load_or_new(&self.out);
        for name in &self.manifest_files {
            m.record_file(&self.out, name).map_err(failed)?;
        }
        if let Some(r) = &self.respondent {
            m.respondent = Some(r.redacted());
        }
        m.stamp(command, self.redacted_config());
        m.save(&self.out).map_err(failed)
    }

    fn forget(&self, names: &[&str]) {
        let mut m = RunManifest::load_or_new(&self.out);
        for n in names {
            self.remove_stale(n);
            m.forget_file(n);
        }
        let _ = m.save(&self.out);
    }
}

pub(super) fn execute(cli: Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Command::Corpus(args) = &cli.command {
        return corpus(args);
    }
    let out = cli
        .out
        .clone()
        .or_else(|| config.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out).map_err(|e| failed(format!("{}: {e}", out.display())))?;
    let mut ctx = Ctx {
        out,
        config,
        manifest_files: Vec::new(),
        respondent: None,
    };
    ctx.config.out_dir = Some(ctx.out.clone());
    match cli.command {
        Command::Generate(a) => generate(&mut ctx, a),
        Command::Run(a) => run(&mut ctx, a.query),
        Command::Analyze(a) => analyze(&mut ctx, a),
        Command::Compare(a) => compare(&mut ctx, a),
        Command::Rationale(a) => rationale(&mut ctx, a),
        Command::Report => report(&mut ctx),
        Command::Corpus(_) => unreachable!("handled above"),
    }
}

fn generate(ctx: &mut Ctx, a: GenerateArgs) -> Result<(), CliError> {
    let g = &mut ctx.config.generate;
    if let Some(n) = a.n {
        g.count = n as usize;
    }
    if let Some(seed) = a.seed {
        g.seed = seed;
    }
    if let Some(p) = a.p_passenger {
        g.p_passenger = p;
    }
    if let Some(p) = a.p_law {
        g.p_law = p;
    }
    if let Some(f) = a.focal {
        *g = g.clone().forcing(f);
    }
    g.validate().map_err(usage)?;
    let deck = generate_deck(g).map_err(failed)?;
    write_deck(&ctx.path(DECK), &deck).map_err(failed)?;
    ctx.manifest_files.push(DECK);
    ctx.finish("generate")?;
    println!(
        "generate: wrote {} scenarios to {}",
        deck.len(),
        ctx.path(DECK).display()
    );
    Ok(())
}

struct QuerySetup {
    spec: RespondentSpec,
    timeout: Duration,
    opts: CampaignOptions,
}

fn query_setup(
    ctx: &mut Ctx,
    q: &QueryArgs,
    base: Option<RespondentSpec>,
    mode: RenderMode,
) -> Result<QuerySetup, CliError> {
    let run = &mut ctx.config.run;
    let mut spec = match &q.respondent {
        Some(path) => load_respondent(path)?,
        None => base.ok_or_else(|| {
            usage("no respondent configured; pass --respondent or set run.respondent")
        })?,
    };
    if let Some(m) = &q.model {
        spec.model_name = m.clone();
    }
    if let Some(e) = &q.endpoint {
        spec.endpoint_url = Some(e.clone());
    }
    if let Some(c) = q.concurrency {
        run.concurrency = c;
    }
    if let Some(t) = q.timeout_secs {
        run.timeout_secs = t;
    }
    if let Some(n) = q.max_attempts {
        run.retry.max_attempts = n;
    }
    if let Some(ms) = q.base_delay_ms {
        run.retry.base_delay_ms = ms;
    }
    if let Some(p) = &q.phrases {
        run.phrases_path = Some(p.clone());
    }
    if run.concurrency == 0 {
        return Err(usage("concurrency must be at least 1"));
    }
    if run.retry.max_attempts == 0 {
        return Err(usage("retry.maxAttempts must be at least 1"));
    }
    spec.validate().map_err(usage)?;
    let phrases = match &run.phrases_path {
        Some(p) => PhraseTable::load(p).map_err(usage)?,
        None => PhraseTable::default(),
    };
    Ok(QuerySetup {
        spec,
        timeout: Duration::from_secs(run.timeout_secs),
        opts: CampaignOptions {
            mode,
            concurrency: run.concurrency,
            retry: run.retry,
            phrases,
        },
    })
}

/// Runs a campaign into `log_name` and reports on it. Fails with the
/// transport code only when the log holds no completion at all.
fn campaign(
    ctx: &mut Ctx,
    setup: QuerySetup,
    deck: &[Scenario],
    log_name: &'static str,
    label: &str,
) -> Result<(), CliError> {
    let respondent = build_respondent(&setup.spec, setup.timeout).map_err(usage)?;
    ctx.respondent = Some(setup.spec.clone());
    let log = ctx.path(log_name);
    let outcome = run_campaign(respondent.as_ref(), deck, &log, &setup.opts);
    let aborted = match outcome {
        Ok(s) => {
            println!(
                "{label}: requested={} completed={} failed={} skipped={}",
                s.requested, s.completed, s.failed, s.skipped
            );
            None
        }
        Err(CampaignError::Auth { source, partial }) => {
            eprintln!(
                "{label}: stopped on authentication failure after completed={} failed={}: {source}",
                partial.completed, partial.failed
            );
            Some(source.to_string())
        }
        Err(e @ (CampaignError::EmptyDeck | CampaignError::ZeroConcurrency)) => {
            return Err(usage(e))
        }
        Err(e @ CampaignError::Log(_)) => return Err(failed(e)),
    };
    let records = if log.exists() {
        read_records(&log).map_err(failed)?
    } else {
        Vec::new()
    };
    if log.exists() {
        ctx.manifest_files.push(log_name);
    }
    ctx.finish(label)?;
    let completions = records.iter().filter(|r| !r.is_transport_failure()).count();
    if completions == 0 {
        let why = aborted.unwrap_or_else(|| {
            records
                .iter()
                .find_map(|r| r.error.clone())
                .unwrap_or_else(|| "no requests issued".into())
        });
        return Err(CliError::Transport(format!(
            "{label}: no scenario received a completion ({why})"
        )));
    }
    Ok(())
}

fn run(ctx: &mut Ctx, q: QueryArgs) -> Result<(), CliError> {
    let deck = ctx.deck()?;
    let base = ctx.config.run.respondent.clone();
    let setup = query_setup(ctx, &q, base, RenderMode::ChoiceOnly)?;
    ctx.config.run.respondent = Some(setup.spec.clone());
    campaign(ctx, setup, &deck, RESPONSES, "run")
}

fn load_optional_baseline(path: Option<&Path>) -> Result<Option<BaselineProfile>, CliError> {
    path.map(|p| load_baseline(p).map_err(|e| usage(format!("{}: {e}", p.display()))))
        .transpose()
}

fn analyze(ctx: &mut Ctx, a: AnalyzeArgs) -> Result<(), CliError> {
    if a.baseline.is_some() {
        ctx.config.analyze.baseline = a.baseline;
    }
    let baseline = load_optional_baseline(ctx.config.analyze.baseline.as_deref())?;
    let deck = ctx.deck()?;
    let records = ctx.responses()?;
    let validity =
        valid_rate(&records).map_err(|_| CliError::Empty("response log is empty".into()))?;
    let report = ValidityReport {
        generator_version: GENERATOR_VERSION.into(),
        ruleset_version: RULESET_VERSION.into(),
        validity,
    };
    ctx.write(
        VALIDITY,
        &(serde_json::to_string_pretty(&report).unwrap() + "\n"),
    )?;
    println!(
        "analyze: valid {}/{} (rate {}), transport failures {}",
        validity.valid, validity.total, validity.rate, validity.transport_failures
    );
    if validity.valid == 0 {
        ctx.forget(&[AMCE_JSON, AMCE_CSV, FIG_AMCE]);
        ctx.finish("analyze")?;
        return Err(CliError::Empty(
            "no valid responses; AMCE table not produced".into(),
        ));
    }
    let valid: Vec<ChoiceRecord> = records
        .into_iter()
        .filter(|r| !r.is_transport_failure() && r.parsed.is_valid())
        .collect();
    let rows = code_profiles(&deck, &valid).map_err(failed)?;
    let profile = estimate_amce(&valid[0].model_name, &rows);
    let amce = AmceReport {
        generator_version: GENERATOR_VERSION.into(),
        ruleset_version: RULESET_VERSION.into(),
        validity,
        profile,
    };
    ctx.write(
        AMCE_JSON,
        &(serde_json::to_string_pretty(&amce).unwrap() + "\n"),
    )?;
    ctx.write(AMCE_CSV, &amce.profile.to_csv(&version_comment()))?;
    ctx.write_svg(
        FIG_AMCE,
        &figures::amce_chart(std::slice::from_ref(&amce.profile), baseline.as_ref()),
    )?;
    ctx.finish("analyze")?;
    for e in &amce.profile.estimates {
        match (e.delta_p, e.se) {
            (Some(d), Some(se)) => {
                println!("  {:<13} ΔP={d:+.4} se={se:.4} n={}", e.attribute, e.n)
            }
            _ => println!(
                "  {:<13} absent ({})",
                e.attribute,
                e.diagnostic.as_deref().unwrap_or("")
            ),
        }
    }
    Ok(())
}

fn load_amce(path: &Path) -> Result<AmceReport, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn compare(ctx: &mut Ctx, a: CompareArgs) -> Result<(), CliError> {
    let c = &mut ctx.config.compare;
    if !a.profiles.is_empty() {
        c.profiles = a.profiles;
    }
    if a.baseline.is_some() {
        c.baseline = a.baseline;
    }
    if a.reference.is_some() {
        c.reference = a.reference;
    }
    if c.profiles.is_empty() && ctx.out.join(AMCE_JSON).exists() {
        c.profiles.push(ctx.out.join(AMCE_JSON));
    }
    let c = ctx.config.compare.clone();
    let amces = c
        .profiles
        .iter()
        .map(|p| load_amce(p))
        .collect::<Result<Vec<_>, _>>()?;
    let baseline = load_optional_baseline(c.baseline.as_deref())?;

    let mut labeled: Vec<LabeledProfile> = Vec::new();
    if let Some(b) = &baseline {
        labeled.push(b.into());
    }
    labeled.extend(amces.iter().map(|r| LabeledProfile::from(&r.profile)));
    if labeled.len() < 2 {
        return Err(usage(format!(
            "compare needs at least two profiles (baseline included), got {}",
            labeled.len()
        )));
    }
    let reference = c
        .reference
        .clone()
        .or_else(|| baseline.as_ref().map(|b| b.label.clone()));
    let report = compare_profiles(&labeled, reference.as_deref()).map_err(usage)?;

    ctx.write(
        COMPARE_JSON,
        &(serde_json::to_string_pretty(&report).unwrap() + "\n"),
    )?;
    ctx.write(COMPARE_CSV, &report.distances_csv())?;
    match report.pca_csv() {
        Some(csv) => ctx.write(COMPARE_PCA_CSV, &csv)?,
        None => ctx.forget(&[COMPARE_PCA_CSV, FIG_PCA]),
    }
    write_compare_figures(ctx, &report, &amces, baseline.as_ref())?;
    ctx.finish("compare")?;
    for l in &report.labels {
        match report.distance[l] {
            Some(d) => println!("compare: distance({l}, {}) = {d:.6}", report.reference),
            None => println!("compare: distance({l}, {}) unavailable", report.reference),
        }
    }
    if let Some(p) = &report.pca {
        let [r1, r2] = p.explained_variance_ratio;
        println!("compare: PCA explained variance {r1:.4}, {r2:.4}");
    }
    for n in &report.notices {
        println!("notice: {n}");
    }
    Ok(())
}

fn write_compare_figures(
    ctx: &mut Ctx,
    report: &ComparisonReport,
    amces: &[AmceReport],
    baseline: Option<&BaselineProfile>,
) -> Result<(), CliError> {
    ctx.write_svg(FIG_DISTANCE, &figures::distance_chart(report))?;
    if let Some(svg) = figures::pca_scatter(report) {
        ctx.write_svg(FIG_PCA, &svg)?;
    }
    if !amces.is_empty() {
        let profiles: Vec<AmceProfile> = amces.iter().map(|a| a.profile.clone()).collect();
        ctx.write_svg(FIG_AMCE_COMPARE, &figures::amce_chart(&profiles, baseline))?;
    }
    Ok(())
}

/// Side of `s` spared by `choice`: continuing straight kills the stay victim.
fn spared_side(s: &Scenario, choice: Choice) -> crate::scenario::Side {
    match choice {
        Choice::Case1 => s.stay_victim.other(),
        _ => s.stay_victim,
    }
}

fn rationale(ctx: &mut Ctx, a: RationaleArgs) -> Result<(), CliError> {
    let r = &mut ctx.config.rationale;
    if a.focal.is_some() {
        r.focal = a.focal;
    }
    if let Some(p) = a.spared {
        r.spared = p;
    }
    r.require_straight |= a.require_straight;
    let r = r.clone();

    let deck = ctx.deck()?;
    let records = ctx.responses()?;
    let by_id: HashMap<&str, &ChoiceRecord> = records
        .iter()
        .filter(|r| !r.is_transport_failure() && r.parsed.is_valid())
        .map(|r| (r.scenario_id.as_str(), r))
        .collect();
    let selected: Vec<Scenario> = filter_for_rationale_probe(&deck, r.focal)
        .into_iter()
        .filter(|s| {
            let Some(rec) = by_id.get(s.id.as_str()) else {
                return false;
            };
            if r.require_straight && rec.parsed != Choice::Case1 {
                return false;
            }
            let code = orientation_codes(s, spared_side(s, rec.parsed))
                [Attribute::from(s.focal_dimension).index()];
            match r.spared {
                SparedPole::Negative => code < 0,
                SparedPole::Positive => code > 0,
                SparedPole::Any => true,
            }
        })
        .collect();

    if selected.is_empty() {
        let log = ctx.path(RATIONALE);
        std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&log)
            .map_err(failed)?;
        ctx.manifest_files.push(RATIONALE);
        ctx.finish("rationale")?;
        println!(
            "notice: no scenarios qualify for the rationale probe; {} left empty",
            log.display()
        );
        return Ok(());
    }
    let base = r
        .respondent
        .clone()
        .or_else(|| ctx.config.run.respondent.clone())
        .or_else(|| RunManifest::load_or_new(&ctx.out).respondent);
    let setup = query_setup(ctx, &a.query, base, RenderMode::WithRationale)?;
    println!("rationale: probing {} scenarios", selected.len());
    campaign(ctx, setup, &selected, RATIONALE, "rationale")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:+.4}"))
        .unwrap_or_else(|| "n/a".into())
}

fn report(ctx: &mut Ctx) -> Result<(), CliError> {
    let amce = ctx
        .path(AMCE_JSON)
        .exists()
        .then(|| load_amce(&ctx.path(AMCE_JSON)))
        .transpose()?;
    let cmp: Option<ComparisonReport> = if ctx.path(COMPARE_JSON).exists() {
        let text = std::fs::read_to_string(ctx.path(COMPARE_JSON)).map_err(failed)?;
        Some(serde_json::from_str(&text).map_err(failed)?)
    } else {
        None
    };
    if amce.is_none() && cmp.is_none() {
        return Err(CliError::Empty(format!(
            "nothing to report in {}; run `analyze` or `compare` first",
            ctx.out.display()
        )));
    }
    let baseline = load_optional_baseline(
        ctx.config
            .analyze
            .baseline
            .as_deref()
            .or(ctx.config.compare.baseline.as_deref()),
    )?;

    let mut md = format!("# moralbench report\n\n{}\n", version_comment());
    if let Some(a) = &amce {
        ctx.write_svg(
            FIG_AMCE,
            &figures::amce_chart(std::slice::from_ref(&a.profile), baseline.as_ref()),
        )?;
        let v = a.validity;
        md.push_str(&format!(
            "\n## {}\n\nValid responses: {} of {} (rate {}); transport failures: {}.\n\n| attribute | ΔP | se | n |\n|---|---|---|---|\n",
            a.profile.model_name, v.valid, v.total, v.rate, v.transport_failures
        ));
        let rows = a
            .profile
            .estimates
            .iter()
            .map(|e| (e.attribute.clone(), e))
            .chain(
                a.profile
                    .per_increment
                    .iter()
                    .map(|(k, e)| (format!("+{k} characters"), e)),
            )
            .chain([(
                "mean of increments".to_string(),
                &a.profile.mean_characters_effect,
            )]);
        for (label, e) in rows {
            md.push_str(&format!(
                "| {label} | {} | {} | {} |\n",
                fmt_opt(e.delta_p),
                fmt_opt(e.se),
                e.n
            ));
        }
    }
    if let Some(c) = &cmp {
        write_compare_figures(ctx, c, &[], None)?;
        md.push_str(&format!(
            "\n## Distances to {}\n\n| profile | distance |\n|---|---|\n",
            c.reference
        ));
        for l in &c.labels {
            md.push_str(&format!(
                "| {l} | {} |\n",
                c.distance[l]
                    .map(|d| format!("{d:.4}"))
                    .unwrap_or_else(|| "n/a".into())
            ));
        }
        match &c.pca {
            Some(p) => {
                let [r1, r2] = p.explained_variance_ratio;
                md.push_str(&format!(
                    "\nPCA explained variance: PC1 {r1:.4}, PC2 {r2:.4}.\n"
                ));
            }
            None => md.push_str("\nPCA not computed.\n"),
        }
        for n in &c.notices {
            md.push_str(&format!("\nNotice: {n}\n"));
        }
    }
    ctx.write(REPORT_MD, &md)?;
    ctx.finish("report")?;
    println!("report: wrote {}", ctx.path(REPORT_MD).display());
    Ok(())
}

fn corpus(a: &CorpusArgs) -> Result<(), CliError> {
    let text = match &a.file {
        Some(p) => {
            std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?
        }
        None => BUNDLED_CORPUS.to_string(),
    };
    let entries = parse_corpus(&text).map_err(usage)?;
    let bad = corpus_mismatches(&entries);
    for (e, got) in &bad {
        println!(
            "mismatch: expected {:?}, got {:?}: {:?}",
            e.label, got, e.text
        );
    }
    if !bad.is_empty() {
        return Err(failed(format!(
            "{} of {} corpus entries misclassified by ruleset {RULESET_VERSION}",
            bad.len(),
            entries.len()
        )));
    }
    println!(
        "corpus: {} entries, all classified as labeled by ruleset {RULESET_VERSION}",
        entries.len()
    );
    Ok(())
}
