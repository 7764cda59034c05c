//! Pipeline commands. Each `*_table` function is the in-memory core of the
//! matching `cmd_*`, which adds file input and output.

use std::path::{Path, PathBuf};

use cogtrack::ingest::{floorplan_to_toml, load_floorplan, load_manifest, parse_tracks, write_tracks, DropReport, Manifest};
use cogtrack::learn::{derive_seed, loocv, metrics, permutation_importance, FittedPipeline, LoocvOptions};
use cogtrack::model::{CohortLabel, FeatureSchema, FloorPlan, SessionFeatureVector};
use cogtrack::pipeline::{extract_features, FeatureTable};
use cogtrack::simulate::{simulate_study, Study};
use cogtrack::stats::rank_sum_table;
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{write_file, Cell, JsonTable, OutputFormat, Table, HASH_PREFIX, OUTPUT_SCHEMA_VERSION};

pub const SIGNIFICANCE: f64 = 0.05;

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::missing(path, e))
}

/// The configured floor plan, or the built-in facility.
pub fn floor_plan(config: &RunConfig) -> Result<FloorPlan, CliError> {
    match &config.paths.floorplan {
        Some(p) => Ok(load_floorplan(&read(p)?)?),
        None => Ok(FloorPlan::default_facility()),
    }
}

pub fn simulate(config: &RunConfig, plan: &FloorPlan) -> Result<Study, CliError> {
    let s = &config.simulate;
    Ok(simulate_study(&s.high, &s.low, &s.study, plan, &s.noise, config.seed)?)
}

pub fn cmd_simulate(config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let hash = config.hash();
    let stamp = format!("{HASH_PREFIX}{hash}\n");
    let (plan, plan_out) = match &config.paths.floorplan {
        Some(p) if p.exists() => (floor_plan(config)?, None),
        Some(p) => (FloorPlan::default_facility(), Some(p.clone())),
        None => (FloorPlan::default_facility(), Some(config.output("floorplan.toml"))),
    };
    let study = simulate(config, &plan)?;
    let mut tracks = stamp.clone().into_bytes();
    write_tracks(&study.sessions, config.track_format(), &mut tracks)?;
    let tracks = String::from_utf8(tracks).map_err(|e| CliError::Internal(e.to_string()))?;
    write_file(&config.paths.tracks, &tracks)?;
    write_file(&config.paths.manifest, &format!("{stamp}{}", study.manifest.to_toml()))?;
    let mut written = vec![config.paths.tracks.clone(), config.paths.manifest.clone()];
    if let Some(p) = plan_out {
        write_file(&p, &format!("{stamp}{}", floorplan_to_toml(&plan)))?;
        written.push(p);
    }
    Ok(written)
}

/// Ingested sessions and their feature table.
pub struct Extracted {
    pub manifest: Manifest,
    pub plan: FloorPlan,
    pub table: FeatureTable,
    pub report: DropReport,
}

pub fn extract(config: &RunConfig) -> Result<Extracted, CliError> {
    let manifest = load_manifest(&read(&config.paths.manifest)?)?;
    let plan = floor_plan(config)?;
    let text = read(&config.paths.tracks)?;
    let ingested = parse_tracks(text.as_bytes(), config.track_format(), &manifest, Some(&plan), &config.ingest)?;
    if ingested.sessions.iter().all(|s| s.trajectories.is_empty()) {
        return Err(CliError::Validation(format!("no sessions: {} holds no usable tracks", config.paths.tracks.display())));
    }
    let labels = manifest.cohort_labels(config.labels.moca_threshold)?;
    let table = extract_features(&ingested.sessions, &labels, &plan, &config.features)?;
    Ok(Extracted {
        manifest,
        plan,
        table,
        report: ingested.report,
    })
}

const ID_COLUMNS: [&str; 3] = ["session_id", "cohort_id", "label"];

pub fn features_table(table: &FeatureTable, report: &DropReport) -> Table {
    let columns = ID_COLUMNS.iter().map(|s| s.to_string()).chain(table.schema.names().iter().cloned()).collect();
    let mut t = Table::new("features", columns);
    for r in &table.rows {
        let mut row: Vec<Cell> = vec![r.session_id.as_str().into(), r.cohort_id.as_str().into(), r.label.as_str().into()];
        row.extend(r.values.iter().map(|&v| Cell::from(v)));
        t.push(row);
    }
    let masks: Vec<Value> = table.rows.iter().map(|r| Value::from(r.mask())).collect();
    t.extra.push(("mask", Value::Array(masks)));
    t.extra.push(("ingest", serde_json::to_value(report).expect("report serialises")));
    t
}

pub fn cmd_features(config: &RunConfig, format: OutputFormat) -> Result<Vec<PathBuf>, CliError> {
    let e = extract(config)?;
    features_table(&e.table, &e.report).write(&config.paths.output_dir, "features", format, &config.hash())
}

/// Load a feature table written by [`cmd_features`], preferring JSON.
pub fn load_features(dir: &Path) -> Result<FeatureTable, CliError> {
    let json = dir.join("features.json");
    let csv = dir.join("features.csv");
    let (columns, rows) = if json.exists() {
        let doc: JsonTable = serde_json::from_str(&read(&json)?).map_err(|e| CliError::Validation(format!("{}: {e}", json.display())))?;
        if doc.schema_version != OUTPUT_SCHEMA_VERSION || doc.kind != "features" {
            return Err(CliError::Validation(format!("{} is not a version {OUTPUT_SCHEMA_VERSION} feature table", json.display())));
        }
        let rows = doc
            .rows
            .into_iter()
            .map(|r| r.into_iter().map(|v| match v {
                Value::String(s) => Ok(Some(s)),
                Value::Null => Ok(None),
                Value::Number(n) => Ok(Some(n.to_string())),
                other => Err(CliError::Validation(format!("unexpected cell {other}"))),
            }).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        (doc.columns, rows)
    } else if csv.exists() {
        let text = read(&csv)?;
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let columns = rdr.headers().map_err(|e| CliError::Validation(e.to_string()))?.iter().map(String::from).collect();
        let rows = rdr
            .records()
            .map(|r| r.map(|rec| rec.iter().map(|c| (!c.is_empty()).then(|| c.to_string())).collect()))
            .collect::<Result<Vec<Vec<Option<String>>>, _>>()
            .map_err(|e| CliError::Validation(e.to_string()))?;
        (columns, rows)
    } else {
        return Err(CliError::MissingInput(json.display().to_string()));
    };
    parse_feature_rows(columns, rows)
}

fn parse_feature_rows(columns: Vec<String>, rows: Vec<Vec<Option<String>>>) -> Result<FeatureTable, CliError> {
    if columns.len() < ID_COLUMNS.len() || columns[..3] != ID_COLUMNS {
        return Err(CliError::Validation("feature table must start with session_id, cohort_id, label".into()));
    }
    let schema = FeatureSchema::from_names(columns[3..].to_vec())?;
    let bad = |m: String| CliError::Validation(format!("feature table: {m}"));
    let vectors = rows
        .into_iter()
        .map(|r| {
            if r.len() != columns.len() {
                return Err(bad(format!("row has {} cells, expected {}", r.len(), columns.len())));
            }
            let id = |i: usize| r[i].clone().ok_or_else(|| bad(format!("empty {}", ID_COLUMNS[i])));
            let label: CohortLabel = id(2)?.parse()?;
            let values = r[3..]
                .iter()
                .map(|c| c.as_deref().map(|s| s.parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}")))).transpose())
                .collect::<Result<_, _>>()?;
            Ok(SessionFeatureVector {
                session_id: id(0)?,
                cohort_id: id(1)?,
                label,
                values,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(FeatureTable::new(schema, vectors)?)
}

pub fn stats_table(table: &FeatureTable) -> Table {
    let cols = ["feature", "n_high", "n_low", "median_high", "median_low", "statistic", "z", "p_value", "method", "significant"];
    let mut t = Table::new("stats", cols.iter().map(|s| s.to_string()).collect());
    for r in rank_sum_table(&table.class_pools()) {
        let test = r.test.as_ref();
        t.push(vec![
            r.feature.as_str().into(),
            r.n_high.into(),
            r.n_low.into(),
            r.median_high.into(),
            r.median_low.into(),
            test.map(|x| x.statistic).into(),
            test.map(|x| x.z).into(),
            test.map(|x| x.p_two_sided).into(),
            test.map_or("", |x| match x.method {
                cogtrack::stats::RankSumMethod::Exact => "exact",
                cogtrack::stats::RankSumMethod::Normal => "normal",
            })
            .into(),
            r.significant(SIGNIFICANCE).into(),
        ]);
    }
    t.extra.push(("alpha", SIGNIFICANCE.into()));
    t
}

pub fn cmd_stats(config: &RunConfig, format: OutputFormat) -> Result<Vec<PathBuf>, CliError> {
    let e = extract(config)?;
    stats_table(&e.table).write(&config.paths.output_dir, "stats", format, &config.hash())
}

pub fn classify_table(config: &RunConfig, table: &FeatureTable) -> Result<Table, CliError> {
    let cols = [
        "subset", "model", "n", "abstained", "precision", "precision_ci95", "recall", "recall_ci95", "f1", "f1_ci95", "accuracy",
        "accuracy_ci95", "tp", "fp", "tn", "fn",
    ];
    let mut t = Table::new("classify", cols.iter().map(|s| s.to_string()).collect());
    let labels = table.labels();
    let opts = LoocvOptions {
        global_scaling: config.classify.global_scaling,
        seed: config.seed,
    };
    for &subset in &config.classify.subsets {
        let rows = table.matrix(subset);
        for spec in &config.classify.models {
            let preds = loocv(spec, &rows, &labels, &opts)?;
            let labelled: Vec<Option<CohortLabel>> = preds.iter().map(|p| p.label).collect();
            let m = metrics(&labelled, &labels, labels.len())?;
            let c = m.confusion;
            t.push(vec![
                subset.as_str().into(),
                spec.kind().display().into(),
                labels.len().into(),
                m.abstained.into(),
                m.precision.value.into(),
                m.precision.ci95.into(),
                m.recall.value.into(),
                m.recall.ci95.into(),
                m.f1.value.into(),
                m.f1.ci95.into(),
                m.accuracy.value.into(),
                m.accuracy.ci95.into(),
                c.tp.into(),
                c.fp.into(),
                c.tn.into(),
                c.fn_.into(),
            ]);
        }
    }
    t.extra.push(("positive_class", CohortLabel::Low.as_str().into()));
    Ok(t)
}

pub fn cmd_classify(config: &RunConfig, format: OutputFormat) -> Result<Vec<PathBuf>, CliError> {
    let table = load_features(&config.paths.output_dir)?;
    classify_table(config, &table)?.write(&config.paths.output_dir, "classify", format, &config.hash())
}

pub fn importance_table(config: &RunConfig, table: &FeatureTable) -> Result<Table, CliError> {
    let cols = ["subset", "rank", "feature", "mean_drop", "std_drop", "baseline_f1"];
    let mut t = Table::new("importance", cols.iter().map(|s| s.to_string()).collect());
    let labels = table.labels();
    let ic = &config.importance;
    for (k, &subset) in config.importance.subsets.iter().enumerate() {
        let rows = table.matrix(subset);
        let names = table.subset_names(subset);
        let stream = derive_seed(config.seed, k as u64);
        let pipe = FittedPipeline::fit(&ic.model, &rows, &labels, stream)?;
        let report = permutation_importance(&pipe, &rows, &labels, ic.repeats, stream)?;
        for (rank, j) in report.ranking().into_iter().enumerate() {
            let f = &report.features[j];
            t.push(vec![
                subset.as_str().into(),
                (rank + 1).into(),
                names[f.feature].as_str().into(),
                f.mean_drop.into(),
                f.std_drop.into(),
                report.baseline_f1.into(),
            ]);
        }
    }
    t.extra.push(("model", ic.model.kind().as_str().into()));
    t.extra.push(("repeats", ic.repeats.into()));
    Ok(t)
}

pub fn cmd_importance(config: &RunConfig, format: OutputFormat) -> Result<Vec<PathBuf>, CliError> {
    let table = load_features(&config.paths.output_dir)?;
    importance_table(config, &table)?.write(&config.paths.output_dir, "importance", format, &config.hash())
}

/// Features, stats, classification and importance in one pass.
pub fn cmd_report(config: &RunConfig, format: OutputFormat) -> Result<Vec<PathBuf>, CliError> {
    let e = extract(config)?;
    let hash = config.hash();
    let dir = &config.paths.output_dir;
    let mut written = features_table(&e.table, &e.report).write(dir, "features", format, &hash)?;
    written.extend(stats_table(&e.table).write(dir, "stats", format, &hash)?);
    written.extend(classify_table(config, &e.table)?.write(dir, "classify", format, &hash)?);
    written.extend(importance_table(config, &e.table)?.write(dir, "importance", format, &hash)?);
    Ok(written)
}

