//! Subcommand implementations. Every output is sorted or otherwise
//! deterministic: identical inputs and config give byte-identical files.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::json;

use feedhunt::cluster::{
    fvg_cluster_file, hac_cluster, hact_over_samples, Clustering, DistanceSpec,
};
use feedhunt::evaluation::{precision_recall_f1, size_summary, GroundTruth};
use feedhunt::extsort::{external_sort, SortSpec};
use feedhunt::features::{
    extract_features, format_feature_line, parse_feature_line, read_feature_file, ClusterFeature,
    SampleFeatures, FEATURE_FILE_VERSION,
};
use feedhunt::filetype::FiletypeMapping;
use feedhunt::hunting::{
    classify_clusters, detect_originally_fud, flag_undetected, RatioKind, SampleHistory,
};
use feedhunt::labeler::{label_sample, LabelResult, Taxonomy};
use feedhunt::report::ReportReader;
use feedhunt::stats::{
    daily_volume, detection_distribution, family_prevalence, filetype_distribution,
    telemetry_delay,
};
use feedhunt::synth::{generate_feed, FeedSpec};
use feedhunt::time::day_to_date;

use crate::config::PipelineConfig;
use crate::{
    ClusterCommand, EvalArgs, ExtractArgs, FudArgs, GenCommand, HuntArgs, LabelArgs, StatsCommand,
    VerdictArgs,
};

fn load_mapping(cli_path: Option<&Path>, config: &PipelineConfig) -> Result<FiletypeMapping> {
    match cli_path.or(config.filetype_mapping.as_deref()) {
        Some(p) => FiletypeMapping::from_path(p)
            .with_context(|| format!("loading filetype mapping {}", p.display())),
        None => Ok(FiletypeMapping::builtin()),
    }
}

fn load_taxonomy(cli_path: Option<&Path>, config: &PipelineConfig) -> Result<Taxonomy> {
    match cli_path.or(config.taxonomy.as_deref()) {
        Some(p) => {
            Taxonomy::from_path(p).with_context(|| format!("loading taxonomy {}", p.display()))
        }
        None => Ok(Taxonomy::builtin()),
    }
}

// ---- extract ----

pub fn extract(config: &PipelineConfig, args: &ExtractArgs) -> Result<()> {
    let mapping = load_mapping(args.filetypes.as_deref(), config)?;
    let want_labels = args.label || args.taxonomy.is_some();
    let taxonomy = if want_labels { Some(load_taxonomy(args.taxonomy.as_deref(), config)?) } else { None };
    let window = config.window();

    // Pass one: stream reports into per-report feature rows. Reduced views
    // append an input ordinal and go through the external sort so the
    // reduction never needs the whole stream in memory.
    let reduced = args.view != "all";
    let tmp_parent = config.temp_dir.clone().unwrap_or_else(std::env::temp_dir);
    let acc = tempfile::Builder::new()
        .prefix("extract-acc")
        .tempfile_in(&tmp_parent)
        .context("creating accumulator file")?;
    let mut acc_writer: BufWriter<Box<dyn Write>> = if reduced {
        BufWriter::new(Box::new(File::create(acc.path())?))
    } else {
        let mut direct = BufWriter::new(File::create(&args.out)?);
        writeln!(direct, "{FEATURE_FILE_VERSION}")?;
        BufWriter::new(Box::new(direct.into_inner()?))
    };

    let mut reader = ReportReader::open(&args.reports)
        .with_context(|| format!("opening {}", args.reports.display()))?;
    let mut rows = 0u64;
    for record in reader.by_ref() {
        let record = record?;
        let label: Option<LabelResult> =
            taxonomy.as_ref().map(|t| label_sample(&record.detection_labels, t));
        let features = extract_features(&record, label.as_ref(), window, &mapping);
        if args.view == "first" && !features.is_new {
            continue;
        }
        if reduced {
            writeln!(acc_writer, "{}\t{rows}", format_feature_line(&features))?;
        } else {
            writeln!(acc_writer, "{}", format_feature_line(&features))?;
        }
        rows += 1;
    }
    acc_writer.flush()?;
    let skipped = reader.errors;

    if !reduced {
        eprintln!("extracted {rows} rows ({skipped} malformed lines skipped)");
        return Ok(());
    }

    // Pass two: sort by sha256 and reduce each group to one winner.
    let sorted = tempfile::Builder::new().prefix("extract-sorted").tempfile_in(&tmp_parent)?;
    external_sort(
        acc.path(),
        sorted.path(),
        &SortSpec::new(vec![0]),
        config.memory_budget,
        config.temp_dir.as_deref(),
    )?;

    let take_first = args.view == "first";
    let mut out = BufWriter::new(File::create(&args.out)?);
    writeln!(out, "{FEATURE_FILE_VERSION}")?;
    let mut samples = 0u64;
    let mut current: Option<(SampleFeatures, u64)> = None;
    let reader = feedhunt::report::open_report_file(sorted.path())?;
    use std::io::BufRead;
    for line in reader.lines() {
        let line = line?;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (row, ordinal) = line
            .rsplit_once('\t')
            .context("accumulator row missing ordinal")?;
        let ordinal: u64 = ordinal.parse().context("bad accumulator ordinal")?;
        let features = parse_feature_line(row).map_err(|e| anyhow::anyhow!(e))?;
        match &mut current {
            Some((kept, kept_ord)) if kept.sha256 == features.sha256 => {
                let replace = if take_first {
                    (features.scan_date, std::cmp::Reverse(features.non_null_features()), ordinal)
                        < (kept.scan_date, std::cmp::Reverse(kept.non_null_features()), *kept_ord)
                } else {
                    (features.scan_date, features.non_null_features(), std::cmp::Reverse(ordinal))
                        > (kept.scan_date, kept.non_null_features(), std::cmp::Reverse(*kept_ord))
                };
                if replace {
                    *kept = features;
                    *kept_ord = ordinal;
                }
            }
            _ => {
                if let Some((done, _)) = current.take() {
                    writeln!(out, "{}", format_feature_line(&done))?;
                    samples += 1;
                }
                current = Some((features, ordinal));
            }
        }
    }
    if let Some((done, _)) = current.take() {
        writeln!(out, "{}", format_feature_line(&done))?;
        samples += 1;
    }
    out.flush()?;
    eprintln!(
        "extracted {samples} samples from {rows} reports ({skipped} malformed lines skipped)"
    );
    Ok(())
}

// ---- label ----

pub fn label(config: &PipelineConfig, args: &LabelArgs) -> Result<()> {
    let taxonomy = load_taxonomy(args.taxonomy.as_deref(), config)?;
    let mut features = read_feature_file(&args.features)?;
    let wanted: HashMap<&str, i64> =
        features.iter().map(|f| (f.sha256.as_str(), f.scan_date)).collect();

    // best label per sample: the report matching the feature row's scan time
    // when collected, otherwise the latest report
    let mut best: HashMap<String, (bool, i64, LabelResult)> = HashMap::new();
    let mut reader = ReportReader::open(&args.reports)?;
    for record in reader.by_ref() {
        let record = record?;
        let Some(&feature_scan) = wanted.get(record.sha256.as_str()) else {
            continue;
        };
        let exact = record.scan_date == feature_scan;
        let result = label_sample(&record.detection_labels, &taxonomy);
        match best.get_mut(&record.sha256) {
            Some((kept_exact, kept_scan, kept)) => {
                let better = (exact, record.scan_date) > (*kept_exact, *kept_scan);
                if better {
                    *kept_exact = exact;
                    *kept_scan = record.scan_date;
                    *kept = result;
                }
            }
            None => {
                best.insert(record.sha256.clone(), (exact, record.scan_date, result));
            }
        }
    }

    let mut labeled = 0u64;
    for f in features.iter_mut() {
        if let Some((_, _, result)) = best.get(&f.sha256) {
            f.family = result.family.clone();
            f.is_pup = Some(result.is_pup);
            if result.family.is_some() {
                labeled += 1;
            }
        }
    }
    feedhunt::features::write_feature_file(&args.out, &features)?;
    eprintln!(
        "labeled {labeled}/{} samples ({} malformed report lines skipped)",
        features.len(),
        reader.errors
    );
    Ok(())
}

// ---- stats ----

fn fmt6(x: f64) -> String {
    format!("{x:.6}")
}

pub fn stats(config: &PipelineConfig, which: &StatsCommand) -> Result<()> {
    match which {
        StatsCommand::Daily { reports, csv, json } => {
            let mut reader = ReportReader::open(reports)?;
            let rows = reader.by_ref().filter_map(|r| r.ok()).map(|r| {
                (r.sha256, r.scan_date, r.fseen_date)
            });
            let stats = daily_volume(rows, config.window(), &config.gaps());
            println!("day\tdate\treports\tsamples\tnew_samples\tin_gap");
            for (day, c) in &stats.days {
                println!(
                    "{day}\t{}\t{}\t{}\t{}\t{}",
                    day_to_date(*day),
                    c.reports,
                    c.samples,
                    c.new_samples,
                    if c.in_gap { 1 } else { 0 }
                );
            }
            for (name, s) in [
                ("reports", &stats.reports),
                ("samples", &stats.samples),
                ("new_samples", &stats.new_samples),
            ] {
                println!(
                    "SUMMARY\t{name}\tmean={}\tmedian={}\tstd={}\tmax={}",
                    fmt6(s.mean),
                    fmt6(s.median),
                    fmt6(s.std),
                    s.max
                );
            }
            if let Some(path) = csv {
                let mut w = BufWriter::new(File::create(path)?);
                writeln!(w, "day,date,reports,samples,new_samples,in_gap")?;
                for (day, c) in &stats.days {
                    writeln!(
                        w,
                        "{day},{},{},{},{},{}",
                        day_to_date(*day),
                        c.reports,
                        c.samples,
                        c.new_samples,
                        c.in_gap as u8
                    )?;
                }
            }
            if let Some(path) = json {
                serde_json::to_writer_pretty(File::create(path)?, &stats)?;
            }
        }
        StatsCommand::Detections { features, reports, csv, json } => {
            let hist = match (features, reports) {
                (Some(f), None) => detection_distribution(
                    read_feature_file(f)?.iter().map(|s| s.vt_score),
                ),
                (None, Some(r)) => {
                    let mut reader = ReportReader::open(r)?;
                    let h = detection_distribution(
                        reader.by_ref().filter_map(|rec| rec.ok()).map(|rec| rec.vt_score),
                    );
                    h
                }
                _ => bail!("exactly one of --features or --reports is required"),
            };
            println!("total\t{}", hist.total);
            println!("score\tcount\trecdf");
            for (score, count) in &hist.counts {
                println!("{score}\t{count}\t{}", fmt6(hist.recdf(*score)));
            }
            println!("FRACTION\tat_least_1\t{}", fmt6(hist.recdf(1)));
            println!("FRACTION\tat_least_4\t{}", fmt6(hist.recdf(4)));
            if let Some(path) = csv {
                let mut w = BufWriter::new(File::create(path)?);
                writeln!(w, "score,count,recdf")?;
                for (score, frac) in hist.recdf_points() {
                    writeln!(
                        w,
                        "{score},{},{}",
                        hist.counts.get(&score).copied().unwrap_or(0),
                        fmt6(frac)
                    )?;
                }
            }
            if let Some(path) = json {
                serde_json::to_writer_pretty(File::create(path)?, &hist)?;
            }
        }
        StatsCommand::Filetypes { features, top } => {
            let rows = read_feature_file(features)?;
            let ranked = filetype_distribution(rows.iter().map(|r| r.filetype.as_deref()));
            println!("filetype\tsamples\tpercent");
            for (name, count, pct) in ranked.iter().take(top.unwrap_or(usize::MAX)) {
                println!("{name}\t{count}\t{:.2}%", pct);
            }
        }
        StatsCommand::Families { features, top, json } => {
            let rows = read_feature_file(features)?;
            let filetypes: HashMap<String, String> = rows
                .iter()
                .filter_map(|r| {
                    r.filetype.as_ref().map(|ft| (r.sha256.clone(), ft.clone()))
                })
                .collect();
            let labels = rows
                .iter()
                .filter_map(|r| r.family.as_ref().map(|f| (r.sha256.clone(), f.clone())));
            let p = family_prevalence(labels, Some(&filetypes), *top);
            println!("labeled_samples\t{}", p.labeled_samples);
            println!("families\t{}", p.families);
            for (i, t) in feedhunt::stats::PREVALENCE_THRESHOLDS.iter().enumerate() {
                println!("families_with_at_least_{t}\t{}", p.buckets[i]);
            }
            for (ft, fams) in &p.top_per_filetype {
                for (fam, count) in fams {
                    println!("TOP\t{ft}\t{fam}\t{count}");
                }
            }
            if let Some(path) = json {
                serde_json::to_writer_pretty(File::create(path)?, &p)?;
            }
        }
        StatsCommand::Telemetry { feed_fseen, other_fseen, csv } => {
            let read_map = |path: &PathBuf| -> Result<HashMap<String, i64>> {
                let mut map = HashMap::new();
                for (no, line) in fs::read_to_string(path)?.lines().enumerate() {
                    if line.is_empty() || line.starts_with('#') {
                        continue;
                    }
                    let (sha, t) = line.split_once('\t').with_context(|| {
                        format!("{}:{}: expected sha256<TAB>epoch", path.display(), no + 1)
                    })?;
                    map.insert(sha.trim().to_string(), t.trim().parse()?);
                }
                Ok(map)
            };
            let feed = read_map(feed_fseen)?;
            let other = read_map(other_fseen)?;
            let d = telemetry_delay(&feed, &other)?;
            println!("shared_samples\t{}", d.delays.len());
            println!("median_delay_secs\t{}", fmt6(d.median));
            println!("mean_delay_secs\t{}", fmt6(d.mean));
            println!("frac_other_first\t{}", fmt6(d.frac_other_first));
            println!("frac_feed_first\t{}", fmt6(d.frac_feed_first));
            println!("frac_delay_over_90d\t{}", fmt6(d.frac_long));
            if let Some(path) = csv {
                let mut w = BufWriter::new(File::create(path)?);
                writeln!(w, "sha256,delay_secs")?;
                for (sha, delay) in &d.delays {
                    writeln!(w, "{sha},{delay}")?;
                }
            }
        }
    }
    Ok(())
}

// ---- cluster ----

fn feature_rows_for_clustering(path: &Path) -> Result<Vec<SampleFeatures>> {
    read_feature_file(path).with_context(|| format!("reading feature file {}", path.display()))
}

pub fn cluster(config: &PipelineConfig, engine: &ClusterCommand) -> Result<()> {
    match engine {
        ClusterCommand::Fvg { features, out, feature } => {
            let report = fvg_cluster_file(
                features,
                *feature,
                out,
                config.memory_budget,
                config.temp_dir.as_deref(),
            )?;
            let mut sizes = report.non_null_sizes.clone();
            sizes.sort_unstable();
            let (mean, median, std, max) = size_summary(&sizes);
            println!("rows\t{}", report.rows);
            println!("sort_secs\t{}", fmt6(report.sort_secs));
            println!("group_secs\t{}", fmt6(report.group_secs));
            println!("clusters\tall={}\tnon_null={}", report.clusters_all, report.clusters_non_null);
            println!(
                "singletons\tall={}\tnon_null={}",
                report.singletons_all, report.singletons_non_null
            );
            println!(
                "non_null_sizes\tmax={max}\tmean={}\tmedian={}\tstd={}",
                fmt6(mean),
                fmt6(median),
                fmt6(std)
            );
        }
        ClusterCommand::Hac { features, out, threshold, distance_features, limit } => {
            let rows = feature_rows_for_clustering(features)?;
            let feats: Vec<ClusterFeature> = match distance_features {
                Some(csv) => csv
                    .split(',')
                    .map(|s| s.trim().parse().map_err(|e: String| anyhow::anyhow!(e)))
                    .collect::<Result<_>>()?,
                None => vec![
                    ClusterFeature::Tlsh,
                    ClusterFeature::Vhash,
                    ClusterFeature::Imphash,
                    ClusterFeature::RichpeHash,
                    ClusterFeature::Authentihash,
                    ClusterFeature::IconHash,
                    ClusterFeature::CertThumbprint,
                    ClusterFeature::PackageName,
                ],
            };
            let spec = DistanceSpec::new(feats, threshold.unwrap_or(config.hac_threshold));
            let clustering = hac_cluster(&rows, &spec, limit.unwrap_or(config.hac_limit))?;
            clustering.write_to(out)?;
            print_clustering_summary(&clustering);
        }
        ClusterCommand::Hact { features, out, cdist, exact } => {
            let rows = feature_rows_for_clustering(features)?;
            let (clustering, bad) = hact_over_samples(
                rows.iter().map(|r| (r.sha256.as_str(), r.tlsh.as_deref())),
                cdist.unwrap_or(config.cdist),
                *exact,
                config.seed,
            );
            if bad > 0 {
                eprintln!("{bad} undecodable tlsh values treated as NULL");
            }
            clustering.write_to(out)?;
            print_clustering_summary(&clustering);
        }
    }
    Ok(())
}

fn print_clustering_summary(clustering: &Clustering) {
    let stats = feedhunt::evaluation::cluster_size_stats(clustering);
    println!("clusters\tall={}\tnon_null={}", stats.clusters_all, stats.clusters_non_null);
    println!("singletons\tall={}\tnon_null={}", stats.singletons_all, stats.singletons_non_null);
    println!(
        "non_null_sizes\tmax={}\tmean={}\tmedian={}\tstd={}",
        stats.max,
        fmt6(stats.mean),
        fmt6(stats.median),
        fmt6(stats.std)
    );
}

// ---- eval ----

pub fn eval(_config: &PipelineConfig, args: &EvalArgs) -> Result<()> {
    let clustering = Clustering::read_from(&args.clusters)?;
    let truth = GroundTruth::read_from(&args.truth)?;
    let report = precision_recall_f1(&clustering, &truth)?;
    println!("scored samples : {}", report.samples);
    println!("clusters       : {}", report.clusters);
    println!("precision      : {:.2}%", report.precision * 100.0);
    println!("recall         : {:.2}%", report.recall * 100.0);
    println!("f1             : {:.2}%", report.f1 * 100.0);
    println!(
        "RESULT\tclusters={}\tsamples={}\tprecision={}\trecall={}\tf1={}",
        report.clusters,
        report.samples,
        fmt6(report.precision),
        fmt6(report.recall),
        fmt6(report.f1)
    );
    if let Some(path) = &args.json {
        serde_json::to_writer_pretty(
            File::create(path)?,
            &json!({
                "clusters": report.clusters,
                "samples": report.samples,
                "precision": report.precision,
                "recall": report.recall,
                "f1": report.f1,
            }),
        )?;
    }
    Ok(())
}

// ---- verdict / hunt ----

fn scores_from_features(path: &Path) -> Result<HashMap<String, u32>> {
    Ok(read_feature_file(path)?.into_iter().map(|f| (f.sha256, f.vt_score)).collect())
}

pub fn verdict(config: &PipelineConfig, args: &VerdictArgs) -> Result<()> {
    let clustering = Clustering::read_from(&args.clusters)?;
    let scores = scores_from_features(&args.features)?;
    let verdicts = classify_clusters(
        &clustering,
        &scores,
        config.low_threshold,
        config.high_threshold,
        args.include_singletons,
    )?;

    let mut w = BufWriter::new(File::create(&args.out)?);
    writeln!(w, "#cluster_id\tsize\tr1\tr4\tclass_r1\tclass_r4\tflagged")?;
    for v in &verdicts {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            v.cluster_id,
            v.size,
            fmt6(v.r1),
            fmt6(v.r4),
            v.class_r1,
            v.class_r4,
            v.flagged.len()
        )?;
    }
    w.flush()?;

    let total = verdicts.len().max(1) as f64;
    let frac = |pred: &dyn Fn(&feedhunt::hunting::ClusterVerdict) -> bool| {
        verdicts.iter().filter(|v| pred(v)).count() as f64 / total
    };
    use feedhunt::hunting::VerdictClass::*;
    println!("clusters classified\t{}", verdicts.len());
    println!("class\tr1\tr4");
    for (name, class) in
        [("fully-malicious", FullyMalicious), ("fully-benign", FullyBenign), ("mixed", Mixed)]
    {
        println!(
            "{name}\t{:.1}%\t{:.1}%",
            100.0 * frac(&|v| v.class_r1 == class),
            100.0 * frac(&|v| v.class_r4 == class),
        );
    }
    println!(
        "malicious-majority\t{:.1}%\t{:.1}%",
        100.0 * frac(&|v| v.malicious_majority_r1),
        100.0 * frac(&|v| v.malicious_majority_r4),
    );
    Ok(())
}

pub fn hunt(config: &PipelineConfig, args: &HuntArgs) -> Result<()> {
    let kind: RatioKind = args.ratio.parse().map_err(|e: String| anyhow::anyhow!(e))?;
    let clustering = Clustering::read_from(&args.clusters)?;
    let scores = scores_from_features(&args.features)?;
    let verdicts = classify_clusters(
        &clustering,
        &scores,
        config.low_threshold,
        config.high_threshold,
        args.include_singletons,
    )?;
    let flagged = flag_undetected(&verdicts, args.min_ratio, kind);

    let mut w = BufWriter::new(File::create(&args.out)?);
    writeln!(w, "#sha256\tcluster_id\tratio")?;
    for f in &flagged {
        writeln!(w, "{}\t{}\t{}", f.sha256, f.cluster_id, fmt6(f.ratio))?;
    }
    w.flush()?;
    let clusters: std::collections::BTreeSet<usize> =
        flagged.iter().map(|f| f.cluster_id).collect();
    println!(
        "flagged {} zero-detection samples across {} clusters (ratio {} >= {})",
        flagged.len(),
        clusters.len(),
        args.ratio,
        args.min_ratio
    );
    Ok(())
}

// ---- fud ----

pub fn fud(config: &PipelineConfig, args: &FudArgs) -> Result<()> {
    // per-sample histories, deduplicated per scan time (max score wins)
    let mut histories: HashMap<String, (i64, BTreeMap<i64, u32>)> = HashMap::new();
    let mut reader = ReportReader::open(&args.reports)?;
    for record in reader.by_ref() {
        let record = record?;
        let entry = histories
            .entry(record.sha256)
            .or_insert_with(|| (record.fseen_date, BTreeMap::new()));
        entry.0 = entry.0.min(record.fseen_date);
        let score = entry.1.entry(record.scan_date).or_insert(record.vt_score);
        *score = (*score).max(record.vt_score);
    }
    let mut samples: Vec<SampleHistory> = histories
        .into_iter()
        .map(|(sha256, (fseen_date, scans))| SampleHistory {
            sha256,
            fseen_date,
            scans: scans.into_iter().collect(),
        })
        .collect();
    samples.sort_by(|a, b| a.sha256.cmp(&b.sha256));

    let records = detect_originally_fud(
        &samples,
        config.window(),
        &config.gaps(),
        args.threshold.unwrap_or(config.fud_threshold),
        args.grace.unwrap_or(config.fud_grace),
    )?;

    let mut w = BufWriter::new(File::create(&args.out)?);
    writeln!(w, "#sha256\tfseen_date\tfirst_zero_scan\tflip_scan\tflip_delay_secs")?;
    for r in &records {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}",
            r.sha256, r.fseen_date, r.first_zero_scan, r.flip_scan, r.flip_delay
        )?;
    }
    w.flush()?;
    println!(
        "{} originally-undetected samples flipped past the threshold ({} histories examined)",
        records.len(),
        samples.len()
    );
    Ok(())
}

// ---- gen (hidden) ----

pub fn gen(config: &PipelineConfig, what: &GenCommand) -> Result<()> {
    match what {
        GenCommand::Feed {
            out,
            manifest,
            clusters,
            mean_size,
            null_pct,
            rescan_pct,
            corrupt_pct,
            fud_units,
        } => {
            let window = if config.window.start == i64::MIN {
                feedhunt::TimeWindow::new(1_600_000_000, 1_600_000_000 + 30 * 86_400)
            } else {
                config.window()
            };
            let spec = FeedSpec {
                seed: config.seed,
                clusters: *clusters,
                mean_size: *mean_size,
                null_cluster_pct: *null_pct,
                rescan_pct: *rescan_pct,
                corrupt_pct: *corrupt_pct,
                fud_units: *fud_units,
                window,
            };
            let m = generate_feed(out, &spec)?;
            serde_json::to_writer_pretty(File::create(manifest)?, &m)?;
            println!(
                "wrote {} lines ({} valid reports, {} samples, {} corrupt) to {}",
                m.total_lines,
                m.valid_reports,
                m.samples,
                m.corrupt_lines.len(),
                out.display()
            );
        }
    }
    Ok(())
}
