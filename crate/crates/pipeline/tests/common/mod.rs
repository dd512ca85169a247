#![allow(dead_code)]

use std::collections::VecDeque;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::State;
use axum::http::{HeaderMap, StatusCode};
use axum::routing::post;
use axum::{Json, Router};
use serde_json::{json, Value};

use arcdsl_core::script::load_solver;
use arcdsl_core::{load_task, ColorTable};
use arcdsl_pipeline::Job;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn canned() -> String {
    std::fs::read_to_string(fixtures().join("responses/00d62c1b.txt")).unwrap()
}

/// The golden task and solver under another task id.
pub fn job(id: &str) -> Job {
    let mut task = load_task(&fixtures().join("tasks/00d62c1b.json"), ColorTable::standard()).unwrap();
    task.task_id = id.into();
    let mut script = load_solver(&fixtures().join("solvers/00d62c1b.py")).unwrap();
    script.task_id = id.into();
    Job { task, script }
}

/// One scripted reply: status, body text, delay.
#[derive(Clone)]
pub struct Reply {
    pub status: u16,
    pub content: String,
    pub delay_ms: u64,
}

impl Reply {
    pub fn ok(content: &str) -> Reply {
        Reply {
            status: 200,
            content: content.into(),
            delay_ms: 0,
        }
    }

    pub fn status(status: u16) -> Reply {
        Reply {
            status,
            content: String::new(),
            delay_ms: 0,
        }
    }
}

#[derive(Clone)]
struct Stub {
    replies: Arc<Mutex<VecDeque<Reply>>>,
    last: Arc<Mutex<Option<Reply>>>,
    requests: Arc<Mutex<Vec<(Option<String>, Value)>>>,
}

async fn complete(State(stub): State<Stub>, headers: HeaderMap, Json(body): Json<Value>) -> (StatusCode, Json<Value>) {
    let auth = headers.get("authorization").and_then(|v| v.to_str().ok()).map(str::to_string);
    stub.requests.lock().unwrap().push((auth, body));
    let reply = {
        let mut q = stub.replies.lock().unwrap();
        let next = q.pop_front();
        let mut last = stub.last.lock().unwrap();
        if let Some(r) = next {
            *last = Some(r.clone());
            r
        } else {
            last.clone().expect("at least one reply")
        }
    };
    if reply.delay_ms > 0 {
        tokio::time::sleep(Duration::from_millis(reply.delay_ms)).await;
    }
    let status = StatusCode::from_u16(reply.status).unwrap();
    let body = if reply.status == 200 {
        json!({"choices": [{"message": {"role": "assistant", "content": reply.content}}]})
    } else {
        json!({"error": {"message": "stub failure"}})
    };
    (status, Json(body))
}

pub struct StubServer {
    pub base_url: String,
    requests: Arc<Mutex<Vec<(Option<String>, Value)>>>,
}

impl StubServer {
    /// Serve `replies` in order, repeating the last one.
    pub fn start(replies: Vec<Reply>) -> StubServer {
        let stub = Stub {
            replies: Arc::new(Mutex::new(replies.into())),
            last: Arc::new(Mutex::new(None)),
            requests: Arc::new(Mutex::new(Vec::new())),
        };
        let requests = stub.requests.clone();
        let (tx, rx) = std::sync::mpsc::channel();
        std::thread::spawn(move || {
            let rt = tokio::runtime::Runtime::new().unwrap();
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
                tx.send(listener.local_addr().unwrap()).unwrap();
                let app = Router::new().route("/v1/chat/completions", post(complete)).with_state(stub);
                axum::serve(listener, app).await.unwrap();
            });
        });
        let addr = rx.recv().unwrap();
        StubServer {
            base_url: format!("http://{addr}/v1"),
            requests,
        }
    }

    pub fn hits(&self) -> usize {
        self.requests.lock().unwrap().len()
    }

    pub fn request(&self, i: usize) -> (Option<String>, Value) {
        self.requests.lock().unwrap()[i].clone()
    }
}
