use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use change_service::{router, AppState, Settings};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

struct Harness {
    _dir: tempfile::TempDir,
    settings: Settings,
    app: Router,
}

impl Harness {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let mut settings = Settings {
            data_dir: dir.path().join("sessions"),
            ..Settings::default()
        };
        settings.budgets.solver.iters = 30;
        settings.budgets.eval_samples = 200;
        settings.budgets.num_candidate_sets = 5;
        let app = router(AppState::open(settings.clone()).unwrap());
        Harness {
            _dir: dir,
            settings,
            app,
        }
    }

    fn restart(&mut self) {
        self.app = router(AppState::open(self.settings.clone()).unwrap());
    }

    async fn call(&self, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value, Vec<u8>) {
        let req = Request::builder().method(method).uri(uri);
        let req = match body {
            Some(b) => req
                .header("content-type", "application/json")
                .body(Body::from(b.to_string())),
            None => req.body(Body::empty()),
        }
        .unwrap();
        let resp = self.app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
        let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
        (status, value, bytes)
    }

    async fn create(&self, roster: &[&str], config: Value) -> String {
        let (status, body, _) = self
            .call("POST", "/sessions", Some(json!({"roster": roster, "config": config})))
            .await;
        assert_eq!(status, StatusCode::CREATED, "{body}");
        body["id"].as_str().unwrap().to_string()
    }
}

fn star_config(strategy: &str, budget: usize) -> Value {
    json!({
        "stages": 2,
        "capacities": [1, 1],
        "q": 1.0,
        "uncertainty": [0.5],
        "query_budget": budget,
        "strategy": strategy,
        "seed": 3
    })
}

const STAR: [&str; 6] = ["hub", "l1", "l2", "l3", "l4", "l5"];

fn star_contacts(node: &str) -> Vec<&'static str> {
    if node == "hub" {
        STAR[1..].to_vec()
    } else {
        vec!["hub"]
    }
}

#[tokio::test]
async fn create_and_validate() {
    let h = Harness::new();
    let id = h.create(&STAR, star_config("DC", 6)).await;
    let (status, state, _) = h.call("GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(state["status"], "collecting");
    assert_eq!(state["stage"], 1);
    assert_eq!(state["committed"], json!([]));
    assert_eq!(state["queries_remaining"], 6);

    let (status, err, _) = h
        .call("POST", "/sessions", Some(json!({"roster": ["a", "a"], "config": star_config("DC", 1)})))
        .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err["code"], "invalid");
    assert!(err["details"][0].as_str().unwrap().contains("duplicate"));

    let (status, err, _) = h
        .call("POST", "/sessions", Some(json!({"config": star_config("DC", 1)})))
        .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err["details"][0], "roster: missing");

    let (status, err, _) = h
        .call("POST", "/sessions", Some(json!({"roster": ["a"], "config": star_config("DC", 1)})))
        .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(err["details"][0].as_str().unwrap().contains("capacity"));

    let (status, _, _) = h.call("POST", "/sessions", Some(json!("nope"))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let (status, err, _) = h.call("GET", "/sessions/unknown", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(err["code"], "not_found");
}

#[tokio::test]
async fn interview_workflow() {
    let h = Harness::new();
    let id = h.create(&["a", "b", "c"], star_config("RANDOM", 2)).await;
    let next = format!("/sessions/{id}/next-query");
    let result = format!("/sessions/{id}/query-result");

    let (_, q1, _) = h.call("GET", &next, None).await;
    assert_eq!(q1["status"], "query");
    assert_eq!(q1["phase"], "random");
    let (_, again, _) = h.call("GET", &next, None).await;
    assert_eq!(again, q1);

    let node = q1["node"].as_str().unwrap().to_string();
    let other = ["a", "b", "c"].into_iter().find(|t| *t != node).unwrap();
    let (status, _, _) = h
        .call("POST", &result, Some(json!({"respondent": other, "contacts": []})))
        .await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _, _) = h
        .call("POST", &result, Some(json!({"respondent": node, "contacts": [node]})))
        .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let (status, summary, _) = h
        .call("POST", &result, Some(json!({"respondent": node, "contacts": [other, "newcomer"]})))
        .await;
    assert_eq!(status, StatusCode::OK, "{summary}");
    assert_eq!(summary["new_edges"], 2);
    assert_eq!(summary["new_nodes"], json!(["newcomer"]));
    assert_eq!(summary["node_count"], 4);

    let (status, _, _) = h
        .call("POST", &result, Some(json!({"respondent": node, "contacts": []})))
        .await;
    assert_eq!(status, StatusCode::CONFLICT);

    let (_, q2, _) = h.call("GET", &next, None).await;
    assert_eq!(q2["phase"], "neighbor");
    let second = q2["node"].as_str().unwrap();
    assert!(second == other || second == "newcomer");
    let (status, _, _) = h
        .call("POST", &result, Some(json!({"respondent": second, "contacts": []})))
        .await;
    assert_eq!(status, StatusCode::OK);

    let (_, done, _) = h.call("GET", &next, None).await;
    assert_eq!(done["status"], "budget_exhausted");
    let (_, state, _) = h.call("GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(state["status"], "planning");
    assert_eq!(state["queries_used"], 2);
    let (status, _, _) = h.call("GET", &next, None).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

async fn survey_star(h: &Harness, id: &str) {
    loop {
        let (_, q, _) = h.call("GET", &format!("/sessions/{id}/next-query"), None).await;
        if q["status"] == "budget_exhausted" {
            break;
        }
        let node = q["node"].as_str().unwrap().to_string();
        let (status, _, _) = h
            .call(
                "POST",
                &format!("/sessions/{id}/query-result"),
                Some(json!({"respondent": node, "contacts": star_contacts(&node)})),
            )
            .await;
        assert_eq!(status, StatusCode::OK);
    }
}

#[tokio::test]
async fn stage_workflow_and_restart() {
    let mut h = Harness::new();
    let id = h.create(&STAR, star_config("DC", 6)).await;
    let plan = format!("/sessions/{id}/plan-stage");
    let attendance = format!("/sessions/{id}/attendance");
    let state_uri = format!("/sessions/{id}");

    let (status, _, _) = h.call("POST", &plan, None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _, _) = h.call("POST", &attendance, Some(json!({"attended": []}))).await;
    assert_eq!(status, StatusCode::CONFLICT);

    survey_star(&h, &id).await;
    let (status, p1, _) = h.call("POST", &plan, None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(p1["invited"], json!(["hub"]));
    let (_, p1_again, _) = h.call("POST", &plan, None).await;
    assert_eq!(p1_again, p1);

    let (status, err, _) = h
        .call("POST", &attendance, Some(json!({"attended": ["hub", "l1"]})))
        .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err["details"], json!(["l1"]));

    let (status, s, _) = h.call("POST", &attendance, Some(json!({"attended": ["hub"]}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(s["status"], "planning");
    assert_eq!(s["stage"], 2);
    assert_eq!(s["committed"], json!([["hub"]]));

    let (_, before, before_bytes) = h.call("GET", &state_uri, None).await;
    h.restart();
    let (_, _, after_bytes) = h.call("GET", &state_uri, None).await;
    assert_eq!(before_bytes, after_bytes);

    let (_, p2, _) = h.call("POST", &plan, None).await;
    assert_eq!(p2["stage"], 2);
    assert_eq!(p2["invited"].as_array().unwrap().len(), 1);
    assert_ne!(p2["invited"][0], "hub");
    let (_, done, _) = h.call("POST", &attendance, Some(json!({"attended": []}))).await;
    assert_eq!(done["status"], "complete");
    assert_eq!(done["committed"], json!([["hub"], []]));
    assert_eq!(done["stages_remaining"], 0);
    let (status, _, _) = h.call("POST", &plan, None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(before["events"].as_u64().unwrap() + 4, done["events"].as_u64().unwrap());

    let log = std::fs::read_to_string(h.settings.data_dir.join(format!("{id}.jsonl"))).unwrap();
    assert_eq!(log.lines().count() as u64, done["events"].as_u64().unwrap());
    assert!(log.lines().last().unwrap().contains(r#""event":"completed""#));
}

#[tokio::test]
async fn change_plan_reports_diagnostics() {
    let h = Harness::new();
    let id = h.create(&STAR, star_config("CHANGE", 6)).await;
    survey_star(&h, &id).await;
    let (status, plan, _) = h.call("POST", &format!("/sessions/{id}/plan-stage"), None).await;
    assert_eq!(status, StatusCode::OK, "{plan}");
    assert_eq!(plan["invited"], json!(["hub"]));
    assert!(plan["worst_case"].as_f64().unwrap() > 0.99);
    assert_eq!(plan["argmin_p"], 0.5);
    assert_eq!(plan["per_scenario"][0]["p"], 0.5);
}
