mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use explab::agents::{AgentConfig, AgentKind};
use explab::analysis::discretize;
use explab::maze::{step, AvatarState, Cell};
use explab::protocol::{replay_session, run_session, Condition, ExperimentPlan, PhaseOutcome, SessionLog};
use explab::service::{router, SessionStatus, SessionStore, SessionView, StepView};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tempfile::TempDir;
use tower::ServiceExt;

use common::{actions_for_path, bfs_path, ManualClock};

fn open_store(dir: &TempDir) -> Arc<SessionStore> {
    let (store, skipped) = SessionStore::open(dir.path(), Arc::new(ManualClock::new(1_700_000_000_000, 40))).unwrap();
    assert!(skipped.is_empty(), "{skipped:?}");
    Arc::new(store)
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let body = body.map_or_else(Body::empty, |v| Body::from(v.to_string()));
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json").body(body).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

async fn create(app: &Router, body: Value) -> SessionView {
    let (status, v) = call(app, Method::POST, "/sessions", Some(body)).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    serde_json::from_value(v).unwrap()
}

async fn act(app: &Router, id: &str, action: &str) -> StepView {
    let (status, v) = call(app, Method::POST, &format!("/sessions/{id}/actions"), Some(json!({ "action": action }))).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    serde_json::from_value(v).unwrap()
}

async fn advance(app: &Router, id: &str) -> (StatusCode, Value) {
    call(app, Method::POST, &format!("/sessions/{id}/advance"), None).await
}

async fn export(app: &Router, id: &str) -> SessionLog {
    let (status, v) = call(app, Method::GET, &format!("/sessions/{id}/export"), None).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    serde_json::from_value(v).unwrap()
}

fn pose_of(view: &SessionView) -> AvatarState {
    view.pose.pose()
}

/// Walks back and forth between the start cell and its first open
/// neighbor until the phase ends. Goes through the store directly; the
/// HTTP layer is covered elsewhere.
fn exhaust_by_pacing(store: &SessionStore, id: &str) {
    let log = store.export(id).unwrap();
    let i = log.phases.len() - 1;
    let maze = log.phase_maze(i).unwrap();
    let start = maze.start_cell();
    let other = maze.passable_neighbors(start).next().unwrap();
    let mut pose = store.view(id).unwrap().pose.pose();
    while store.view(id).unwrap().status == SessionStatus::Active {
        let target = if pose.cell == start { other } else { start };
        for a in actions_for_path(&maze, pose, &[pose.cell, target]) {
            let v = store.submit(id, a.as_str()).unwrap();
            pose = v.view.pose.pose();
            if v.view.status != SessionStatus::Active {
                return;
            }
        }
    }
}

async fn walk_to_goal(app: &Router, id: &str) -> StepView {
    let (_, v) = call(app, Method::GET, &format!("/sessions/{id}"), None).await;
    let view: SessionView = serde_json::from_value(v).unwrap();
    let log = export(app, id).await;
    let maze = log.phase_maze(view.phase_index).unwrap();
    let path = bfs_path(&maze, maze.start_cell(), maze.goal().unwrap()).unwrap();
    let mut last = None;
    for a in actions_for_path(&maze, pose_of(&view), &path) {
        last = Some(act(app, id, a.as_str()).await);
    }
    last.unwrap()
}

#[tokio::test]
async fn create_returns_a_fogged_start_view() {
    let dir = TempDir::new().unwrap();
    let app = router(open_store(&dir));
    let view = create(&app, json!({ "experiment": 1, "subject": "p01" })).await;
    assert_eq!(view.status, SessionStatus::Active);
    assert_eq!(view.phase, "A");
    assert_eq!((view.phase_index, view.phase_count), (0, 3));
    assert!(!view.goal_active);
    assert_eq!((view.maze_width, view.maze_height), (11, 9));
    let start = [view.pose.cell_x, view.pose.cell_y];
    assert_eq!(start, [1, 1]);
    assert!(view.visible_cells.contains(&start));
    assert!(view.visible_cells.len() < 10, "only line-of-sight cells: {:?}", view.visible_cells);
    assert_eq!(view.goal_visible, None);
    assert_eq!(view.transitions, 0);

    let (status, v) = call(&app, Method::GET, &format!("/sessions/{}", view.session_id), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(serde_json::from_value::<SessionView>(v).unwrap(), view);
}

#[tokio::test]
async fn dense_view_shows_apples_in_line_of_sight() {
    let dir = TempDir::new().unwrap();
    let app = router(open_store(&dir));
    let view = create(&app, json!({ "experiment": 2, "condition": "dense", "subject": "p02" })).await;
    assert_eq!(view.phase, "1");
    assert!(view.goal_active);
    assert!(view.apples_visible.contains(&[1, 2]) && view.apples_visible.contains(&[1, 3]));
    for a in &view.apples_visible {
        assert!(view.visible_cells.contains(a));
    }

    // walk south onto the first apple: consumed, reported once, then hidden
    let maze = export(&app, &view.session_id).await.phase_maze(0).unwrap();
    let mut step_view = None;
    for a in actions_for_path(&maze, pose_of(&view), &[Cell::new(1, 1), Cell::new(1, 2)]) {
        step_view = Some(act(&app, &view.session_id, a.as_str()).await);
    }
    let step_view = step_view.unwrap();
    assert_eq!(step_view.entered_cell, Some([1, 2]));
    assert_eq!(step_view.apples_consumed, vec![[1, 2]]);
    assert!(!step_view.view.apples_visible.contains(&[1, 2]));
    let log = export(&app, &view.session_id).await;
    assert_eq!(log.apple_events.len(), 1);
    assert!(log.phases[0].reward_total > 0.09);

    let sparse = create(&app, json!({ "experiment": 2, "condition": "sparse" })).await;
    assert!(sparse.apples_visible.is_empty());
    assert!(!sparse.goal_active);
}

#[tokio::test]
async fn request_errors() {
    let dir = TempDir::new().unwrap();
    let app = router(open_store(&dir));
    for body in [
        json!({ "experiment": 9 }),
        json!({ "experiment": 2 }),
        json!({ "experiment": 2, "condition": "medium" }),
        json!({ "experiment": 1, "condition": "dense" }),
        json!({ "condition": "dense" }),
    ] {
        let (status, v) = call(&app, Method::POST, "/sessions", Some(body.clone())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body} -> {v}");
        assert!(v["error"].is_string());
    }
    let req = Request::builder().method(Method::POST).uri("/sessions").body(Body::from("{not json")).unwrap();
    assert_eq!(app.clone().oneshot(req).await.unwrap().status(), StatusCode::BAD_REQUEST);

    let view = create(&app, json!({ "experiment": 1 })).await;
    let id = &view.session_id;
    let (status, v) = call(&app, Method::POST, &format!("/sessions/{id}/actions"), Some(json!({ "action": "jump" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let msg = v["error"].as_str().unwrap();
    for legal in ["forward", "back", "strafe_left", "turn_right"] {
        assert!(msg.contains(legal), "{msg}");
    }
    let (status, _) = call(&app, Method::POST, &format!("/sessions/{id}/actions"), Some(json!({ "move": "forward" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    for (method, uri) in [
        (Method::GET, "/sessions/nope"),
        (Method::POST, "/sessions/nope/advance"),
        (Method::GET, "/sessions/nope/export"),
        (Method::GET, "/mazes/nope"),
    ] {
        let (status, v) = call(&app, method, uri, None).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{uri}");
        assert!(v["error"].is_string());
    }
    let (status, _) = call(&app, Method::POST, "/sessions/nope/actions", Some(json!({ "action": "forward" }))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    // advancing an active phase is a conflict
    let (status, v) = advance(&app, id).await;
    assert_eq!(status, StatusCode::CONFLICT, "{v}");
}

#[tokio::test]
async fn maze_documents() {
    let dir = TempDir::new().unwrap();
    let app = router(open_store(&dir));
    let (status, v) = call(&app, Method::GET, "/mazes/exp2b", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["id"], "exp2b");
    assert_eq!((v["width"].as_u64(), v["height"].as_u64()), (Some(13), Some(11)));
    assert!(v["text"].as_str().unwrap().contains('G'));
}

#[tokio::test]
async fn bumping_a_wall_is_logged_without_moving() {
    let dir = TempDir::new().unwrap();
    let app = router(open_store(&dir));
    let view = create(&app, json!({ "experiment": 1 })).await;
    let maze = export(&app, &view.session_id).await.phase_maze(0).unwrap();
    // turn until facing a wall, then push into it
    let mut pose = pose_of(&view);
    while maze.passable_neighbor(pose.cell, pose.heading).is_some() {
        pose = act(&app, &view.session_id, "turn_right").await.view.pose.pose();
    }
    let before = export(&app, &view.session_id).await.phases[0].log.records.len();
    let mut last = None;
    for _ in 0..6 {
        last = Some(act(&app, &view.session_id, "forward").await);
    }
    let last = last.unwrap();
    let after = export(&app, &view.session_id).await.phases[0].log.records.len();
    assert_eq!(after, before + 6);
    assert_eq!(last.entered_cell, None);
    assert_eq!(last.view.transitions, 0);
    assert_eq!((last.view.pose.cell_x, last.view.pose.cell_y), (1, 1));
    assert_eq!(last.view.visible_cells, view.visible_cells);
}

#[tokio::test]
async fn full_experiment1_playthrough() {
    let dir = TempDir::new().unwrap();
    let store = open_store(&dir);
    let app = router(store.clone());
    let id = create(&app, json!({ "experiment": 1, "subject": "p03" })).await.session_id;

    exhaust_by_pacing(&store, &id);
    let (_, v) = call(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    let view: SessionView = serde_json::from_value(v).unwrap();
    assert_eq!(view.status, SessionStatus::PhaseComplete);
    assert_eq!(view.transitions, view.budget);
    let (status, _) = call(&app, Method::POST, &format!("/sessions/{id}/actions"), Some(json!({ "action": "forward" }))).await;
    assert_eq!(status, StatusCode::CONFLICT);

    let (status, v) = advance(&app, &id).await;
    assert_eq!(status, StatusCode::OK);
    let b: SessionView = serde_json::from_value(v).unwrap();
    assert_eq!((b.phase.as_str(), b.status, b.goal_active, b.transitions), ("B", SessionStatus::Active, true, 0));
    assert_eq!((b.pose.cell_x, b.pose.cell_y), (1, 1));
    let (status, _) = advance(&app, &id).await;
    assert_eq!(status, StatusCode::CONFLICT, "double advance");

    let done_b = walk_to_goal(&app, &id).await;
    assert!(done_b.view.on_goal);
    assert_eq!(done_b.view.status, SessionStatus::PhaseComplete);

    let (_, v) = advance(&app, &id).await;
    assert_eq!(v["phase"], "C");
    let done_c = walk_to_goal(&app, &id).await;
    assert_eq!(done_c.view.status, SessionStatus::PhaseComplete);

    let (status, v) = advance(&app, &id).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["status"], "finished");
    let (status, _) = advance(&app, &id).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = call(&app, Method::POST, &format!("/sessions/{id}/actions"), Some(json!({ "action": "back" }))).await;
    assert_eq!(status, StatusCode::CONFLICT);

    let log = export(&app, &id).await;
    assert!(log.is_finished());
    let outcomes: Vec<_> = log.phases.iter().map(|p| p.outcome).collect();
    assert_eq!(
        outcomes,
        [Some(PhaseOutcome::BudgetExhausted), Some(PhaseOutcome::GoalReached), Some(PhaseOutcome::GoalReached)]
    );
    let times: Vec<u64> = log.phases.iter().flat_map(|p| p.log.records.iter().map(|r| r.t_ms)).collect();
    assert!(times.windows(2).all(|w| w[0] <= w[1]));
    for w in log.phases.windows(2) {
        assert!(w[0].log.records.last().unwrap().t_ms < w[1].log.records[0].t_ms);
    }

    // the human log runs through the agent analysis pipeline unchanged
    let metrics = log.phase_metrics().unwrap();
    assert_eq!(metrics.len(), 3);
    assert_eq!(metrics[0].row.agent_kind_or_human, "human:p03");
    assert_eq!(metrics[1].row.steps_to_goal, Some(14));
    assert_eq!(metrics[2].row.steps_to_goal, Some(18));

    // offline replay reproduces every phase
    let replayed = replay_session(&log).unwrap();
    for (i, r) in replayed.iter().enumerate() {
        assert_eq!(r, &log.cell_trajectory(i).unwrap());
    }

    // finished sessions survive a restart intact
    drop(app);
    drop(store);
    let reopened = open_store(&dir);
    assert_eq!(reopened.view(&id).unwrap().status, SessionStatus::Finished);
    assert_eq!(reopened.export(&id).unwrap(), log);
}

#[tokio::test]
async fn restart_resumes_mid_phase() {
    let dir = TempDir::new().unwrap();
    let store = open_store(&dir);
    let app = router(store.clone());
    let id = create(&app, json!({ "experiment": 2, "condition": "dense" })).await.session_id;
    for a in ["back", "forward", "turn_right", "turn_right", "forward", "forward", "strafe_left", "forward"] {
        act(&app, &id, a).await;
    }
    let view = store.view(&id).unwrap();
    let log = store.export(&id).unwrap();
    drop(app);
    drop(store);

    let reopened = open_store(&dir);
    assert_eq!(reopened.len(), 1);
    assert_eq!(reopened.view(&id).unwrap(), view);
    assert_eq!(reopened.export(&id).unwrap(), log);
    // and keeps going with later timestamps
    let next = reopened.submit(&id, "forward").unwrap();
    assert!(next.view.pose.t_ms >= view.pose.t_ms);
}

#[tokio::test]
async fn restart_repairs_a_missing_outcome_line() {
    let dir = TempDir::new().unwrap();
    let store = open_store(&dir);
    let view = store.create(1, None, "p04").unwrap();
    let id = view.session_id;
    exhaust_by_pacing(&store, &id);
    let before = store.export(&id).unwrap();
    drop(store);

    // simulate a crash between the last record and the outcome lines
    let meta = dir.path().join(&id).join("meta");
    let text = std::fs::read_to_string(&meta).unwrap();
    let kept: Vec<&str> = text.lines().filter(|l| !l.starts_with("outcome.A") && !l.starts_with("reward.A")).collect();
    assert!(kept.len() < text.lines().count());
    std::fs::write(&meta, kept.join("\n") + "\n").unwrap();

    let reopened = open_store(&dir);
    assert_eq!(reopened.view(&id).unwrap().status, SessionStatus::PhaseComplete);
    assert_eq!(reopened.export(&id).unwrap(), before);
    assert!(std::fs::read_to_string(&meta).unwrap().contains("outcome.A=budget_exhausted"));
    assert_eq!(reopened.advance(&id).unwrap().phase, "B");
}

#[tokio::test]
async fn corrupt_sessions_are_skipped_on_open() {
    let dir = TempDir::new().unwrap();
    let store = open_store(&dir);
    let good = store.create(1, None, "ok").unwrap().session_id;
    let bad = store.create(1, None, "bad").unwrap().session_id;
    store.submit(&bad, "turn_right").unwrap();
    drop(store);
    std::fs::write(dir.path().join(&bad).join("phase-A.jsonl"), "{\"t_ms\": oops}\n").unwrap();

    let (store, skipped) = SessionStore::open(dir.path(), Arc::new(ManualClock::new(0, 1))).unwrap();
    assert_eq!(skipped.len(), 1);
    assert!(store.view(&good).is_ok());
    assert!(store.view(&bad).is_err());
}

#[tokio::test]
async fn human_and_agent_logs_agree_on_the_same_actions() {
    let dir = TempDir::new().unwrap();
    let store = open_store(&dir);
    let app = router(store.clone());
    let plan = ExperimentPlan::builtin(1, Condition::Standard).unwrap();
    let agent_log = run_session(&AgentConfig::new(AgentKind::Random, 11), &plan, "agent").unwrap();

    let id = create(&app, json!({ "experiment": 1 })).await.session_id;
    // phase A: the agent stopped early or ran out; either way the human
    // replays the same actions and then paces out the rest of the budget
    for a in agent_log.phases[0].log.actions() {
        let s = store.submit(&id, a.as_str());
        if s.is_err() {
            break;
        }
    }
    let human = store.export(&id).unwrap();
    let agent_a = agent_log.cell_trajectory(0).unwrap();
    assert_eq!(human.cell_trajectory(0).unwrap().cells(), agent_a.cells());
    if store.view(&id).unwrap().status == SessionStatus::Active {
        exhaust_by_pacing(&store, &id);
    }
    advance(&app, &id).await;
    for a in agent_log.phases[1].log.actions() {
        act(&app, &id, a.as_str()).await;
    }
    let human = export(&app, &id).await;
    assert_eq!(human.cell_trajectory(1).unwrap(), agent_log.cell_trajectory(1).unwrap());
    assert_eq!(human.phases[1].outcome, agent_log.phases[1].outcome);
    let raw_h: Vec<_> = human.phases[1].log.records.iter().map(|r| (r.action, r.pose())).collect();
    let raw_a: Vec<_> = agent_log.phases[1].log.records.iter().map(|r| (r.action, r.pose())).collect();
    assert_eq!(raw_h, raw_a);
    let maze = human.phase_maze(1).unwrap();
    assert_eq!(discretize(&human.phases[1].log, &maze).unwrap(), agent_log.cell_trajectory(1).unwrap());
}

#[test]
fn concurrent_submissions_are_serialized_per_session() {
    let dir = TempDir::new().unwrap();
    let store = open_store(&dir);
    let a = store.create(1, None, "a").unwrap().session_id;
    let b = store.create(1, None, "b").unwrap().session_id;
    let b_before = store.export(&b).unwrap();

    std::thread::scope(|s| {
        for _ in 0..8 {
            s.spawn(|| {
                for _ in 0..25 {
                    store.submit(&a, "turn_right").unwrap();
                }
            });
        }
    });
    let log = store.export(&a).unwrap();
    let records = &log.phases[0].log.records;
    assert_eq!(records.len(), 1 + 200);
    assert!(records.windows(2).all(|w| w[0].t_ms <= w[1].t_ms));
    // 200 right turns bring the heading back where it started
    assert_eq!(records.last().unwrap().heading, records[0].heading);
    let mut pose = records[0].pose();
    let maze = log.phase_maze(0).unwrap();
    for r in &records[1..] {
        pose = step(&maze, pose, r.action.action().unwrap());
        assert_eq!(pose, r.pose());
    }
    assert_eq!(store.export(&b).unwrap(), b_before);
}
