//! One test per acceptance criterion; each prints a single
//! `acceptance NN: pass` line when it holds.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spotcast::affect::{classify_opinion, Opinion, SentimentResult};
use spotcast::community::{
    continents_for_lang, csl_index, session_for_hour, Community, CommunityKind,
};
use spotcast::embed::{
    assemble_features, onehot_hour, onehot_weekday, FeatureLayout, Variant,
};
use spotcast::eval::{
    mean_avg_precision_recall, mean_classification_accuracy, AccuracyRecord, RankedRecord,
};
use spotcast::geonet::{louvain, modularity, GeoGraph};
use spotcast::ingest::{Network, StreamTuple};
use spotcast::nn;
use spotcast::pipeline::{run_pipeline, PipelineConfig};
use spotcast::synth::pairwise_agreement;
use spotcast::textsim::levenshtein;

fn rand_string(rng: &mut ChaCha8Rng, max_len: usize) -> String {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| rng.gen_range(b'a'..=b'e') as char).collect()
}

fn oracle_levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + cost);
        }
    }
    d[a.len()][b.len()]
}

#[test]
fn acceptance_01_levenshtein_oracle_and_metric() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let a = rand_string(&mut rng, 40);
        let b = rand_string(&mut rng, 40);
        assert_eq!(levenshtein(&a, &b), oracle_levenshtein(&a, &b), "{a:?} vs {b:?}");
    }
    for _ in 0..1000 {
        let a = rand_string(&mut rng, 25);
        let b = rand_string(&mut rng, 25);
        let c = rand_string(&mut rng, 25);
        assert_eq!(levenshtein(&a, &b), levenshtein(&b, &a));
        assert!(levenshtein(&a, &c) <= levenshtein(&a, &b) + levenshtein(&b, &c));
        assert_eq!(levenshtein(&a, &a), 0);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "{elapsed:?}");
    println!("acceptance 01: pass (levenshtein oracle + metric, {elapsed:?})");
}

fn definitional_modularity(g: &GeoGraph, assignment: &[usize]) -> f64 {
    let n = g.node_count();
    let mut a = vec![vec![0.0; n]; n];
    for &(u, v, w) in &g.edges {
        a[u][v] += w;
        a[v][u] += w;
    }
    let degrees: Vec<f64> = (0..n).map(|i| a[i].iter().sum()).collect();
    let two_m: f64 = degrees.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if assignment[i] == assignment[j] {
                q += a[i][j] - degrees[i] * degrees[j] / two_m;
            }
        }
    }
    q / two_m
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> GeoGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen_bool(p) {
                edges.push((u, v, rng.gen_range(1.0..4.0)));
            }
        }
    }
    if edges.is_empty() {
        edges.push((0, 1, 1.0));
    }
    GeoGraph::new((0..n).map(|i| format!("n{i}")).collect(), edges)
}

#[test]
fn acceptance_02_louvain_monotone_and_exact() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let n = rng.gen_range(4..30);
        let g = random_graph(&mut rng, n, 0.3);
        let result = louvain(&g, 7).unwrap();
        for w in result.pass_modularity.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "passes {:?}", result.pass_modularity);
        }
    }

    // two 5-cliques joined by a single bridge edge
    let mut edges = Vec::new();
    for base in [0usize, 5] {
        for i in 0..5 {
            for j in (i + 1)..5 {
                edges.push((base + i, base + j, 1.0));
            }
        }
    }
    edges.push((0, 5, 1.0));
    let g = GeoGraph::new((0..10).map(|i| format!("n{i}")).collect(), edges);
    let result = louvain(&g, 7).unwrap();
    let a = &result.partition.assignment;
    for i in 1..5 {
        assert_eq!(a[i], a[0]);
        assert_eq!(a[5 + i], a[5]);
    }
    assert_ne!(a[0], a[5]);

    for _ in 0..30 {
        let n = rng.gen_range(2..=12);
        let g = random_graph(&mut rng, n, 0.5);
        let assignment: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let got = modularity(&g, &assignment).unwrap();
        let oracle = definitional_modularity(&g, &assignment);
        assert!((got - oracle).abs() < 1e-12, "got {got}, oracle {oracle}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 30);
    println!("acceptance 02: pass (louvain monotone passes + exact modularity, {elapsed:?})");
}

fn tuple(user: &str, ts: i64, lang: &str) -> StreamTuple {
    StreamTuple {
        user_id: user.into(),
        timestamp: ts,
        text: "i'm at somewhere".into(),
        lang: lang.into(),
        geo: None,
        venue_ref: None,
        network: Network::Microblog,
    }
}

#[test]
fn acceptance_03_csl_index_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let langs = ["en", "es", "fr", "de", "ja", "ru", "tr", "ht"];
    for case in 0..200 {
        let n = rng.gen_range(1..60);
        let tuples: Vec<StreamTuple> = (0..n)
            .map(|i| {
                let user = format!("u{}", rng.gen_range(0..20));
                tuple(&user, i as i64 + 1, langs[rng.gen_range(0..langs.len())])
            })
            .collect();
        let distinct_langs: std::collections::BTreeSet<&str> =
            tuples.iter().map(|t| t.lang.as_str()).collect();
        let distinct_users: std::collections::BTreeSet<&str> =
            tuples.iter().map(|t| t.user_id.as_str()).collect();
        let oracle = distinct_langs.len() as f64 / distinct_users.len() as f64;
        let c = Community::from_single_cluster(CommunityKind::Language, "X", tuples);
        assert_eq!(csl_index(&c), oracle, "case {case}");
    }
    println!("acceptance 03: pass (csl index equals set-count oracle on 200 communities)");
}

#[test]
fn acceptance_04_routing_boundary_table() {
    // tau sign grid: Positive iff both > 0, Negative iff t1 > 0 and t2 < 0
    let grid = [
        ((0.5, 0.5), Opinion::Positive),
        ((0.5, -0.5), Opinion::Negative),
        ((0.5, 0.0), Opinion::Neutral),
        ((0.0, 0.5), Opinion::Neutral),
        ((0.0, -0.5), Opinion::Neutral),
        ((0.0, 0.0), Opinion::Neutral),
    ];
    for ((magnitude, score), expected) in grid {
        assert_eq!(
            classify_opinion(SentimentResult { magnitude, score }),
            expected,
            "tau1={magnitude}, tau2={score}"
        );
    }

    let sessions = [
        (0, "Morning"),
        (11, "Morning"),
        (12, "Afternoon"),
        (15, "Afternoon"),
        (16, "Evening"),
        (19, "Evening"),
        (20, "Night"),
        (23, "Night"),
    ];
    for (hour, expected) in sessions {
        assert_eq!(session_for_hour(hour), expected, "hour {hour}");
    }

    assert_eq!(continents_for_lang("ht"), vec!["North America"]);
    assert_eq!(continents_for_lang("tr"), vec!["Asia", "Europe"]);
    println!("acceptance 04: pass (opinion/temporal/language boundary table)");
}

#[test]
fn acceptance_05_gradient_check() {
    let model = nn::init_model(4, &[3], 2, 11);
    let x = [0.5, -0.2, 0.8, 0.1];
    let err = nn::gradient_check(&model, &x, 1, 1e-5);
    assert!(err < 1e-4, "max relative error {err}");
    println!("acceptance 05: pass (gradient check max relative error {err:.2e})");
}

#[test]
fn acceptance_06_mlp_blob_training() {
    let start = Instant::now();
    let data = nn::blob_dataset(300, 109, 42);
    let mut model = nn::init_model(109, &[32], 3, 7);
    let cfg = nn::TrainConfig { max_epochs: 300, ..nn::TrainConfig::default() };
    let history = nn::train(&mut model, &data, &cfg).unwrap();
    assert!(history.len() <= 300);
    let correct = data
        .iter()
        .filter(|(x, y)| nn::predict_top(&model, x).unwrap().0 == *y)
        .count();
    let accuracy = correct as f64 / data.len() as f64;
    let elapsed = start.elapsed();
    assert!(accuracy >= 0.99, "accuracy {accuracy}");
    assert!(elapsed.as_secs() < 60, "{elapsed:?}");
    println!(
        "acceptance 06: pass (blob accuracy {accuracy:.3} in {} epochs, {elapsed:?})",
        history.len()
    );
}

#[test]
fn acceptance_07_eval_formula_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let labels = ["Food", "Arts", "Shop", "Travel"];
    for case in 0..100 {
        let n_comm = rng.gen_range(1..=4usize);
        let n_users = rng.gen_range(1..=20usize);
        let mut acc_records = Vec::new();
        let mut ranked_records = Vec::new();
        for u in 0..n_users {
            let community = format!("C{}", rng.gen_range(0..n_comm));
            let cluster = format!("k{}", rng.gen_range(0..2));
            let truth = labels[rng.gen_range(0..labels.len())];
            let predicted = labels[rng.gen_range(0..labels.len())];
            acc_records.push(AccuracyRecord {
                user: format!("u{u}"),
                community: community.clone(),
                cluster: cluster.clone(),
                predicted: predicted.into(),
                truth: truth.into(),
            });
            let mut order: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
            for i in (1..order.len()).rev() {
                order.swap(i, rng.gen_range(0..=i));
            }
            order.truncate(rng.gen_range(1..=labels.len()));
            ranked_records.push(RankedRecord {
                user: format!("u{u}"),
                community,
                cluster,
                ranked: order,
                truth: truth.into(),
            });
        }

        // straight-from-formula recomputation of the nested-mean accuracy
        let mut clusters: BTreeMap<(String, String), (usize, usize)> = BTreeMap::new();
        for r in &acc_records {
            let e = clusters.entry((r.community.clone(), r.cluster.clone())).or_insert((0, 0));
            e.0 += usize::from(r.predicted == r.truth);
            e.1 += 1;
        }
        let mut per_comm: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for ((c, _), (hit, n)) in &clusters {
            per_comm.entry(c.clone()).or_default().push(*hit as f64 / *n as f64);
        }
        let comm_means: Vec<f64> =
            per_comm.values().map(|v| v.iter().sum::<f64>() / v.len() as f64).collect();
        let oracle_acc = comm_means.iter().sum::<f64>() / comm_means.len() as f64;
        let got = mean_classification_accuracy(&acc_records).unwrap().overall;
        assert!((got - oracle_acc).abs() < 1e-9, "case {case}");

        // straight-from-formula recomputation of ranked precision/recall
        let mut pr: BTreeMap<(String, String), Vec<(f64, f64)>> = BTreeMap::new();
        for r in &ranked_records {
            let rank = r.ranked.iter().position(|l| l == &r.truth);
            let p = rank.map_or(0.0, |k| 1.0 / (k + 1) as f64);
            let rel = f64::from(rank.is_some());
            pr.entry((r.community.clone(), r.cluster.clone())).or_default().push((p, rel));
        }
        let mut comm_p: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
        for ((c, _), vals) in &pr {
            let p = vals.iter().map(|v| v.0).sum::<f64>() / vals.len() as f64;
            let r = vals.iter().map(|v| v.1).sum::<f64>() / vals.len() as f64;
            comm_p.entry(c.clone()).or_default().push((p, r));
        }
        let comm_vals: Vec<(f64, f64)> = comm_p
            .values()
            .map(|v| {
                (
                    v.iter().map(|x| x.0).sum::<f64>() / v.len() as f64,
                    v.iter().map(|x| x.1).sum::<f64>() / v.len() as f64,
                )
            })
            .collect();
        let oracle_p = comm_vals.iter().map(|x| x.0).sum::<f64>() / comm_vals.len() as f64;
        let oracle_r = comm_vals.iter().map(|x| x.1).sum::<f64>() / comm_vals.len() as f64;
        let got = mean_avg_precision_recall(&ranked_records).unwrap();
        assert!((got.precision - oracle_p).abs() < 1e-9, "case {case}");
        assert!((got.recall - oracle_r).abs() < 1e-9, "case {case}");
    }
    println!("acceptance 07: pass (accuracy and ranked PR match formula oracles on 100 random sets)");
}

#[test]
fn acceptance_08_end_to_end_run_all() {
    let start = Instant::now();
    let conf = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/pipeline.conf");
    let truth_path =
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/geo_truth.tsv");
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = PipelineConfig::from_file(&conf).unwrap();
    cfg.model_dir = tmp.path().join("models");
    cfg.report_dir = tmp.path().join("reports");

    let out1 = run_pipeline(&cfg).unwrap();
    let report1 = std::fs::read(cfg.report_dir.join("report.json")).unwrap();
    let algos1 = std::fs::read(cfg.report_dir.join("algorithms.csv")).unwrap();

    // structural counts per search method
    let count_kind = |kind: &str| {
        out1.report
            .communities
            .iter()
            .filter(|c| c.kind == kind && c.blocked_reasons.is_none())
            .count()
    };
    assert_eq!(count_kind("Opinions"), 3);
    assert!(count_kind("Language") <= 7);
    assert_eq!(count_kind("Temporal"), 4);
    assert!(count_kind("Geo-Nets") <= 10);

    // planted partition recovery, read back from the user records
    let truth = spotcast::synth::load_geo_truth(&truth_path).unwrap();
    let mut predicted = BTreeMap::new();
    for (user, rec) in &out1.artifacts.users {
        if let Some(key) = rec.communities.iter().find(|k| k.starts_with("Geo-Nets/")) {
            predicted.insert(user.clone(), key.clone());
        }
    }
    let predicted: BTreeMap<String, usize> = {
        let mut ids = BTreeMap::new();
        predicted
            .into_iter()
            .map(|(u, k)| {
                let next = ids.len();
                let id = *ids.entry(k).or_insert(next);
                (u, id)
            })
            .collect()
    };
    let agreement = pairwise_agreement(&truth, &predicted);
    assert!(agreement >= 0.9, "agreement {agreement}");

    // per-algorithm table covers NN + 3 baselines x 4 variants
    for algo in ["Neural Network", "Gaussian Naive Bayes", "Logistic Regression", "Decision Tree"]
    {
        for variant in ["V1", "V2", "V3", "V4"] {
            let key = format!("{algo} ({variant})");
            assert!(out1.report.eval.per_algorithm.contains_key(&key), "missing {key}");
        }
    }
    let csv = String::from_utf8(algos1.clone()).unwrap();
    assert!(csv.contains("SVM (RBF kernel),n/a,n/a"));
    assert!(csv.contains("Random Forest,n/a,n/a"));

    // rerun with the same seed: byte-identical reports
    run_pipeline(&cfg).unwrap();
    let report2 = std::fs::read(cfg.report_dir.join("report.json")).unwrap();
    let algos2 = std::fs::read(cfg.report_dir.join("algorithms.csv")).unwrap();
    assert_eq!(report1, report2);
    assert_eq!(algos1, algos2);

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 300, "{elapsed:?}");
    println!(
        "acceptance 08: pass (run-all twice in {elapsed:?}, geo agreement {agreement:.3}, byte-identical reports)"
    );
}

#[test]
fn acceptance_09_blocking_reason_codes() {
    use spotcast::community::{block_filter, BlockReason, BlockThresholds};

    let self_report = |user: &str, ts: i64| StreamTuple {
        user_id: user.into(),
        timestamp: ts,
        text: format!("i'm at spot {user} {ts}"),
        lang: "en".into(),
        geo: None,
        venue_ref: Some(format!("v-{user}")),
        network: Network::Microblog,
    };

    // 40 users, densely active: fails only the diversity rule
    let under_diverse: Vec<StreamTuple> = (0..40)
        .flat_map(|u| (0..6).map(move |k| self_report(&format!("a{u}"), 1_600_000_000 + u * 600 + k * 60)))
        .collect();
    // 120 users posting once a week: fails only the per-day rule
    let sparse: Vec<StreamTuple> = (0..120)
        .map(|u| self_report(&format!("b{u}"), 1_600_000_000 + u * 7 * 86_400))
        .collect();
    // 120 users in one burst: passes everything
    let healthy: Vec<StreamTuple> = (0..120)
        .flat_map(|u| (0..2).map(move |k| self_report(&format!("c{u}"), 1_600_000_000 + u * 300 + k * 60)))
        .collect();

    let communities = vec![
        Community::from_single_cluster(CommunityKind::GeoNets, "Cluster 1", under_diverse),
        Community::from_single_cluster(CommunityKind::GeoNets, "Cluster 2", sparse),
        Community::from_single_cluster(CommunityKind::GeoNets, "Cluster 3", healthy),
    ];
    let out = block_filter(communities, BlockThresholds::default());
    assert_eq!(out.allowed.len(), 1);
    assert_eq!(out.allowed[0].label, "Cluster 3");
    assert_eq!(out.blocked.len(), 2);
    let reasons: BTreeMap<&str, &[BlockReason]> =
        out.blocked.iter().map(|(c, r)| (c.label.as_str(), r.as_slice())).collect();
    assert_eq!(reasons["Cluster 1"], [BlockReason::LowDiversity]);
    assert_eq!(reasons["Cluster 2"], [BlockReason::SparseActivity]);
    println!("acceptance 09: pass (blocking yields exactly the two expected reason codes)");
}

#[test]
fn acceptance_10_feature_layout() {
    let layout = FeatureLayout::default_v1();
    assert_eq!(layout.total(), 109);

    let text: Vec<f64> = (0..56).map(|i| i as f64 / 100.0).collect();
    let personality =
        spotcast::affect::PersonalityVector::from_components(&vec![50.0; 22]).unwrap();
    let weekday = onehot_weekday(1_700_000_000, 0);
    let hour = onehot_hour(1_700_000_000, 0);
    let fv = assemble_features(Variant::V1, &text, Some(&personality), &weekday, &hour).unwrap();
    assert_eq!(fv.values.len(), 109);
    assert_eq!(fv.text(), &text[..]);
    assert_eq!(fv.personality(), &[0.5; 22]);
    assert_eq!(fv.weekday(), &weekday[..]);
    assert_eq!(fv.hour(), &hour[..]);

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..1000 {
        let ts: i64 = rng.gen_range(0..2_000_000_000);
        let offset: i64 = rng.gen_range(-12..=12) * 3600;
        let w = onehot_weekday(ts, offset);
        let h = onehot_hour(ts, offset);
        assert_eq!(w.iter().sum::<f64>(), 1.0);
        assert_eq!(h.iter().sum::<f64>(), 1.0);
    }
    println!("acceptance 10: pass (v1 layout 109 dims, slices and one-hots verified)");
}
