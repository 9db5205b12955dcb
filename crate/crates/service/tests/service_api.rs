use std::path::Path;
use std::sync::{Arc, OnceLock};

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use axum::Router;
use hforecast::artifacts::{ArtifactLayout, TopicsStamp, SPEC_KEY};
use hforecast::corpus::{write_cache, CorpusStore, RawPaper};
use hforecast::factorlab::{Dataset, DatasetSpec, PaperSet, AUTHOR_FEATURES};
use hforecast::learners::{BuiltinLearner, LearnerKind, ModelParams, TrainedModel};
use hforecast::pipeline::{build_context, labeled_dataset, predict_author_h, train_hindex_regressor, PipelineConfig};
use hforecast::scholarmetrics::author_profile;
use hforecast::synth::{generate, SynthConfig};
use hforecast::topicmodel::LdaConfig;
use hforecast_service::{
    predict_paper, router, Artifacts, AuthorDescriptor, ManualProfile, PaperQuery, ServeConfig, VenueDescriptor,
};
use serde_json::{json, Value};
use tower::ServiceExt;

const T: i32 = 2007;

struct Fixture {
    _dir: tempfile::TempDir,
    layout: ArtifactLayout,
    raw: Vec<RawPaper>,
    dataset: Dataset,
    classifier: TrainedModel,
    hindex: TrainedModel,
    artifacts: Arc<Artifacts>,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let layout = ArtifactLayout::new(dir.path());
        let raw = generate(&SynthConfig::default());
        let store = Arc::new(CorpusStore::from_records(raw.clone()).unwrap());
        write_cache(&store, &layout.corpus_cache()).unwrap();

        let config = PipelineConfig {
            lda: LdaConfig { k: 8, iterations: 60, infer_iterations: 30, seed: 7, ..Default::default() },
            ..Default::default()
        };
        let ctx = build_context(&store, T, &config).unwrap();
        ctx.model.save(&layout.topic_model(T)).unwrap();
        ctx.doc_topics.save(&layout.doc_topics(T)).unwrap();
        let stamp = TopicsStamp { t: T, corpus_checksum: store.checksum().to_string(), config };
        std::fs::write(layout.topics_config(T), serde_json::to_vec(&stamp).unwrap()).unwrap();

        let hindex = train_hindex_regressor(&store, T, 5, 3).unwrap();
        hindex.save(&layout.hindex_model(T, 5)).unwrap();
        train_hindex_regressor(&store, T, 3, 3).unwrap().save(&layout.hindex_model(T, 3)).unwrap();

        let spec = DatasetSpec { t: T, delta_t: 5, set: PaperSet::New, min_h: 3, ..Default::default() };
        let dataset = labeled_dataset(&ctx, &spec, None).unwrap();
        let classifier = BuiltinLearner::new(LearnerKind::LogisticRegression)
            .train(&dataset.matrix(), &dataset.labels(), &dataset.feature_names, 11)
            .unwrap()
            .with_run_config(json!({ SPEC_KEY: spec }));
        classifier.save(&layout.impact_model(&spec, LearnerKind::LogisticRegression)).unwrap();

        let artifacts = Arc::new(Artifacts::load(&layout, &ServeConfig::default()));
        assert!(artifacts.missing.is_empty(), "{:?}", artifacts.missing);
        Fixture { _dir: dir, layout, raw, dataset, classifier, hindex, artifacts }
    })
}

fn app() -> Router {
    router(fixture().artifacts.clone(), None)
}

async fn call(app: Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn hquery(h: u32, horizon: u32) -> Value {
    json!({
        "current_h": h, "num_papers": 0, "avg_citations": 0.0,
        "num_coauthors": 0, "years_active": 0, "horizon_years": horizon
    })
}

fn query_for(raw: &RawPaper) -> PaperQuery {
    PaperQuery {
        title: raw.title.clone(),
        abstract_text: raw.abstract_text.clone(),
        authors: raw
            .authors
            .iter()
            .map(|a| AuthorDescriptor { name: a.clone(), author_id: None, profile: None })
            .collect(),
        venue: Some(VenueDescriptor { name: Some(raw.venue.clone()), ..Default::default() }),
        year: Some(raw.year),
        mode: None,
        references: raw.references.clone(),
    }
}

#[tokio::test]
async fn health_reports_versions() {
    let f = fixture();
    let (status, body) = call(app(), "GET", "/api/v1/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");
    assert_eq!(body["model_versions"]["paper"], f.classifier.version_tag());
    assert_eq!(body["model_versions"]["hindex"]["5"], f.hindex.version_tag());
    assert!(body["model_versions"]["hindex"]["3"].is_string());
    assert_eq!(body["corpus_checksum"], f.artifacts.corpus_checksum().unwrap());
}

#[tokio::test]
async fn health_is_503_without_topic_model() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let copy = ArtifactLayout::new(dir.path());
    let cp = |from: &Path, to: &Path| {
        std::fs::create_dir_all(to.parent().unwrap()).unwrap();
        std::fs::copy(from, to).unwrap();
    };
    cp(&f.layout.corpus_cache(), &copy.corpus_cache());
    cp(&f.layout.hindex_model(T, 5), &copy.hindex_model(T, 5));
    let spec = DatasetSpec { t: T, ..Default::default() };
    cp(
        &f.layout.impact_model(&spec, LearnerKind::LogisticRegression),
        &copy.impact_model(&spec, LearnerKind::LogisticRegression),
    );
    let a = Arc::new(Artifacts::load(&copy, &ServeConfig::default()));
    let (status, body) = call(router(a.clone(), None), "GET", "/api/v1/health", None).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(body["status"], "unavailable");
    assert!(body["missing"][0].as_str().unwrap().contains("topic model"));

    // The h-index endpoint still works; the paper endpoint reports the gap.
    let (status, _) = call(router(a.clone(), None), "POST", "/api/v1/predict/hindex", Some(hquery(3, 5))).await;
    assert_eq!(status, StatusCode::OK);
    let q = serde_json::to_value(query_for(&f.raw[0])).unwrap();
    let (status, body) = call(router(a, None), "POST", "/api/v1/predict/paper", Some(q)).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(body["code"], "artifacts_missing");
}

#[tokio::test]
async fn all_zero_query_returns_intercept() {
    let f = fixture();
    let (status, body) = call(app(), "POST", "/api/v1/predict/hindex", Some(hquery(0, 5))).await;
    assert_eq!(status, StatusCode::OK);
    let ModelParams::Linear(p) = &f.hindex.params else { panic!() };
    let (intercept, _) = p.unstandardized(&f.hindex.standardization);
    let raw = body["raw_prediction"].as_f64().unwrap();
    assert!((raw - intercept).abs() <= 1e-9 * intercept.abs().max(1.0), "{raw} vs {intercept}");
    assert_eq!(body["predicted_h"].as_f64().unwrap(), raw.max(0.0));
    assert_eq!(body["horizon"], 5);
    assert_eq!(body["model_version"], f.hindex.version_tag());
}

#[tokio::test]
async fn prediction_below_current_h_is_clipped() {
    let f = fixture();
    let mut q = hquery(40, 5);
    q["years_active"] = json!(40);
    let offline = f.hindex.predict_value(&[40.0, 0.0, 0.0, 0.0, 40.0]).unwrap();
    assert!(offline < 40.0, "{offline}");
    let (status, body) = call(app(), "POST", "/api/v1/predict/hindex", Some(q)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["raw_prediction"].as_f64().unwrap(), offline);
    assert_eq!(body["predicted_h"].as_f64().unwrap(), 40.0);
    assert_eq!(body["clipped"], true);
    assert!(body["notice"].as_str().unwrap().contains("clipped"));
}

#[tokio::test]
async fn hindex_matches_offline_prediction_for_corpus_authors() {
    let f = fixture();
    let ctx = f.artifacts.context.as_ref().unwrap();
    let snap = &ctx.snapshot;
    let mut checked = 0;
    for a in snap.active_authors().step_by(7).take(40) {
        let p = author_profile(snap, a).unwrap();
        let q = json!({
            "current_h": p.h_index, "num_papers": p.num_papers, "avg_citations": p.num_citations,
            "num_coauthors": p.num_co, "years_active": p.num_years, "horizon_years": 5
        });
        let (status, body) = call(app(), "POST", "/api/v1/predict/hindex", Some(q)).await;
        assert_eq!(status, StatusCode::OK);
        let offline = predict_author_h(&f.hindex, snap, a).unwrap();
        assert_eq!(body["predicted_h"].as_f64().unwrap(), offline);
        checked += 1;
    }
    assert!(checked >= 20);
}

#[tokio::test]
async fn hindex_validation_names_fields() {
    let cases = [
        (json!({"current_h": -1, "num_papers": 0, "avg_citations": 0, "num_coauthors": 0, "years_active": 0, "horizon_years": 5}), "current_h"),
        (json!({"current_h": 1, "num_papers": 2.5, "avg_citations": 0, "num_coauthors": 0, "years_active": 0, "horizon_years": 5}), "num_papers"),
        (json!({"current_h": 1, "num_papers": 2, "avg_citations": -3.0, "num_coauthors": 0, "years_active": 0, "horizon_years": 5}), "avg_citations"),
        (json!({"current_h": 1, "num_papers": 2, "avg_citations": 1, "years_active": 0, "horizon_years": 5}), "num_coauthors"),
        (json!({"current_h": 1, "num_papers": 2, "avg_citations": 1, "num_coauthors": 0, "years_active": 0, "horizon_years": 0}), "horizon_years"),
        (json!({"current_h": 1, "num_papers": 2, "avg_citations": 1, "num_coauthors": 0, "years_active": 0, "horizon_years": 11}), "horizon_years"),
        (json!({"current_h": 1, "num_papers": 2, "avg_citations": 1, "num_coauthors": 0, "years_active": 0, "horizon_years": 5, "extra": 1}), "extra"),
    ];
    for (q, field) in cases {
        let (status, body) = call(app(), "POST", "/api/v1/predict/hindex", Some(q)).await;
        assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{body}");
        assert_eq!(body["code"], "validation_error");
        assert_eq!(body["field"], field);
        assert!(body["message"].as_str().unwrap().contains(field));
    }
    let (status, body) = call(app(), "POST", "/api/v1/predict/hindex", Some(hquery(1, 7))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["code"], "no_model_for_horizon");

    let req = Request::post("/api/v1/predict/hindex").body(Body::from("{not json")).unwrap();
    let resp = app().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::BAD_REQUEST);
}

#[test]
fn paper_probability_matches_offline_pipeline() {
    let f = fixture();
    let names: Vec<&str> = f.dataset.feature_names.iter().map(String::as_str).collect();
    for e in &f.dataset.examples {
        let raw = f.raw.iter().find(|p| p.paper_id == e.paper_id).unwrap();
        let resp = predict_paper(&f.artifacts, &query_for(raw)).unwrap();
        let offline = f.classifier.predict_proba(&e.factors).unwrap();
        assert!((resp.probability - offline).abs() <= 1e-9, "{}: {} vs {offline}", e.paper_id, resp.probability);
        assert_eq!(resp.factor_breakdown.select(&names).unwrap(), e.factors, "{}", e.paper_id);
        assert_eq!(resp.primary_author.name, e.primary_author);
        let store = f.artifacts.context.as_ref().unwrap().store();
        assert!(resp.ignored_references.iter().all(|r| store.paper_idx(r).is_none()));
    }
}

#[tokio::test]
async fn paper_endpoint_over_http() {
    let f = fixture();
    let e = &f.dataset.examples[0];
    let raw = f.raw.iter().find(|p| p.paper_id == e.paper_id).unwrap();
    let q = serde_json::to_value(query_for(raw)).unwrap();
    let (status, body) = call(app(), "POST", "/api/v1/predict/paper", Some(q)).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let p = body["probability"].as_f64().unwrap();
    assert!((p - f.classifier.predict_proba(&e.factors).unwrap()).abs() <= 1e-9);
    assert_eq!(body["factor_breakdown"].as_object().unwrap().len(), 24);
    assert_eq!(body["model_version"], f.classifier.version_tag());
    assert_eq!(body["hindex_model_version"], f.hindex.version_tag());
    assert!(body["primary_author"]["predicted_future_h"].as_f64().unwrap() >= body["primary_author"]["h_index"].as_f64().unwrap());
    assert_eq!(body["all_oov"], false);
}

#[tokio::test]
async fn all_oov_text_uses_uniform_topics() {
    let f = fixture();
    let mut q = query_for(&f.raw[f.raw.len() / 2]);
    q.year = Some(T);
    q.title = "zzqx wwvy".into();
    q.abstract_text = "qqqq xxxxy".into();
    let (status, body) = call(app(), "POST", "/api/v1/predict/paper", Some(serde_json::to_value(q).unwrap())).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["all_oov"], true);
    let dist: Vec<f64> = serde_json::from_value(body["topic_distribution"].clone()).unwrap();
    assert!(dist.iter().all(|p| (p - 1.0 / dist.len() as f64).abs() < 1e-15));
}

#[tokio::test]
async fn paper_errors() {
    let f = fixture();
    let base = || {
        let mut q = query_for(&f.raw[f.raw.len() / 2]);
        q.year = Some(T);
        q
    };

    let mut q = base();
    q.authors.push(AuthorDescriptor { name: "Nobody Atall".into(), author_id: None, profile: None });
    let (status, body) = call(app(), "POST", "/api/v1/predict/paper", Some(serde_json::to_value(&q).unwrap())).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["code"], "unresolved_author");
    assert!(body["message"].as_str().unwrap().contains("Nobody Atall"));

    q.authors.last_mut().unwrap().profile =
        Some(ManualProfile { h_index: 4, prior_citations: vec![9, 5, 4, 4, 1], delta_h: 2, num_coauthors: 3, years_active: 6 });
    let (status, body) = call(app(), "POST", "/api/v1/predict/paper", Some(serde_json::to_value(&q).unwrap())).await;
    assert_eq!(status, StatusCode::OK, "{body}");

    let mut q = base();
    q.title.clear();
    q.abstract_text = "   ".into();
    let (status, body) = call(app(), "POST", "/api/v1/predict/paper", Some(serde_json::to_value(&q).unwrap())).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["field"], "title");

    let mut q = base();
    q.authors.clear();
    let (status, body) = call(app(), "POST", "/api/v1/predict/paper", Some(serde_json::to_value(&q).unwrap())).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["field"], "authors");

    let (status, body) = call(app(), "POST", "/api/v1/predict/paper", Some(json!({"title": "x"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["message"].as_str().unwrap().contains("authors"));
}

#[test]
fn venue_change_follows_coefficient_sign() {
    let f = fixture();
    let ModelParams::Logistic(p) = &f.classifier.params else { panic!() };
    let j = f.classifier.feature_names.iter().position(|n| n == "V-h-index").unwrap();
    let w = p.coef[j];
    let mut q = query_for(&f.raw[f.raw.len() / 2]);
    q.year = Some(T);
    let mut probs = Vec::new();
    for h in [0.0, 5.0, 20.0, 80.0] {
        q.venue = Some(VenueDescriptor { name: None, h_index: Some(h), avg_citations: Some(3.0) });
        probs.push(predict_paper(&f.artifacts, &q).unwrap().probability);
    }
    for w2 in probs.windows(2) {
        if w > 0.0 {
            assert!(w2[1] >= w2[0], "{probs:?}");
        } else if w < 0.0 {
            assert!(w2[1] <= w2[0], "{probs:?}");
        } else {
            assert_eq!(w2[1], w2[0]);
        }
    }
}

#[tokio::test]
async fn concurrent_identical_requests_agree() {
    let f = fixture();
    let q = serde_json::to_value(query_for(&f.raw.iter().rev().find(|p| p.year == T).unwrap().clone())).unwrap();
    let mut handles = Vec::new();
    for _ in 0..16 {
        let q = q.clone();
        handles.push(tokio::spawn(async move {
            let req = Request::post("/api/v1/predict/paper")
                .header("content-type", "application/json")
                .body(Body::from(q.to_string()))
                .unwrap();
            let resp = app().oneshot(req).await.unwrap();
            to_bytes(resp.into_body(), usize::MAX).await.unwrap()
        }));
    }
    let mut bodies = Vec::new();
    for h in handles {
        bodies.push(h.await.unwrap());
    }
    assert!(bodies.windows(2).all(|w| w[0] == w[1]));
    let v: Value = serde_json::from_slice(&bodies[0]).unwrap();
    assert!(v["probability"].is_number(), "{v}");
}

#[tokio::test]
async fn static_files_and_unknown_routes() {
    let (status, body) = call(app(), "GET", "/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["code"], "not_found");

    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<html>ui</html>").unwrap();
    let app = router(fixture().artifacts.clone(), Some(dir.path()));
    let resp = app.oneshot(Request::get("/").body(Body::empty()).unwrap()).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    assert_eq!(&bytes[..], b"<html>ui</html>");
}

#[test]
fn author_feature_order_is_the_query_order() {
    assert_eq!(AUTHOR_FEATURES, ["h-index", "num-papers", "num-citations", "num-co", "num-years"]);
}
