use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};

use breaktimes_core::{StressResponse, SurveyPhase};
use breaktimes_service::SurveyStore;
use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_breaktimes"));
    cmd.env_remove("BREAKTIMES_PORT")
        .env_remove("BREAKTIMES_DATA_DIR")
        .env_remove("BREAKTIMES_SCENARIO_DIR")
        .env("RUST_LOG", "warn");
    cmd
}

fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../content/scenarios")
}

fn response(id: &str, phase: SurveyPhase, items: [u8; 7]) -> StressResponse {
    StressResponse { respondent_id: id.into(), phase, items: items.to_vec(), taken_at: chrono::Utc::now() }
}

/// Starts `serve` on an ephemeral port and returns the child and its address.
fn start_server(data: &Path) -> (Child, String) {
    let mut child = bin()
        .args(["serve", "--port", "0", "--data-dir"])
        .arg(data)
        .arg("--scenario-dir")
        .arg(scenario_dir())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on http://").unwrap_or_else(|| panic!("banner {line:?}"));
    let port = addr.rsplit(':').next().unwrap();
    (child, format!("127.0.0.1:{port}"))
}

fn http(addr: &str, method: &str, path: &str, body: &str) -> (u16, Value) {
    let mut stream = TcpStream::connect(addr).unwrap();
    write!(
        stream,
        "{method} {path} HTTP/1.1\r\nHost: localhost\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).unwrap();
    let status = response.split(' ').nth(1).unwrap().parse().unwrap();
    let body = response.split_once("\r\n\r\n").map(|(_, b)| b).unwrap_or("");
    (status, serde_json::from_str(body).unwrap_or(Value::Null))
}

#[test]
fn report_prints_the_cohort_table() {
    let data = tempfile::tempdir().unwrap();
    {
        let store = SurveyStore::open(data.path()).unwrap();
        store.submit_stress(response("a", SurveyPhase::Pre, [3, 3, 3, 3, 3, 3, 3])).unwrap();
        store.submit_stress(response("b", SurveyPhase::Pre, [0, 0, 0, 0, 0, 0, 0])).unwrap();
        store.submit_stress(response("a", SurveyPhase::Post, [0, 1, 0, 1, 0, 1, 0])).unwrap();
        store.submit_stress(response("b", SurveyPhase::Post, [0, 0, 0, 0, 0, 0, 0])).unwrap();
    }
    let out = bin().args(["report", "--data-dir"]).arg(data.path()).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("Respondents"), "{table}");
    assert!(table.contains("50.0%") && table.contains("100.0%"), "{table}");
    assert!(table.contains("Severe+ change: -50.0 percentage points"), "{table}");

    let out = bin().args(["report", "--format", "json", "--data-dir"]).arg(data.path()).output().unwrap();
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["pct_normal_post"], 100.0);
}

#[test]
fn report_without_answers_fails() {
    let data = tempfile::tempdir().unwrap();
    let out = bin().args(["report", "--data-dir"]).arg(data.path()).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty_cohort"));
}

#[test]
fn serve_rejects_an_empty_scenario_directory() {
    let data = tempfile::tempdir().unwrap();
    let scenarios = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["serve", "--port", "0", "--data-dir"])
        .arg(data.path())
        .arg("--scenario-dir")
        .arg(scenarios.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("catalog_load_failure"));
}

#[test]
fn serve_reads_configuration_from_the_environment() {
    let data = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["serve"])
        .env("BREAKTIMES_PORT", "0")
        .env("BREAKTIMES_DATA_DIR", data.path())
        .env("BREAKTIMES_SCENARIO_DIR", data.path().join("missing"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("catalog_load_failure"));
}

#[test]
fn killed_server_recovers_sessions_on_restart() {
    let data = tempfile::tempdir().unwrap();
    let (mut child, addr) = start_server(data.path());
    let (status, created) = http(&addr, "POST", "/sessions", r#"{"scenario_id":"cat_in_the_park"}"#);
    assert_eq!(status, 201);
    let id = created["session_id"].as_str().unwrap().to_owned();
    for (r, c, color) in [(1, 2, 0), (2, 2, 3), (2, 3, 5), (1, 2, 7)] {
        let body = format!(r#"{{"type":"paint","cell":[{r},{c}],"color":{color}}}"#);
        let (status, ack) = http(&addr, "POST", &format!("/sessions/{id}/events"), &body);
        assert_eq!(status, 200, "{ack}");
    }
    http(&addr, "POST", &format!("/sessions/{id}/events"), r#"{"type":"erase","cell":[2,2]}"#);
    let (_, before) = http(&addr, "GET", &format!("/sessions/{id}"), "");

    child.kill().unwrap();
    child.wait().unwrap();

    let (mut child, addr) = start_server(data.path());
    let (status, after) = http(&addr, "GET", &format!("/sessions/{id}"), "");
    assert_eq!(status, 200);
    for key in ["phase", "painted", "actions_logged", "started_at_ms", "deadline_ms", "reference_visible"] {
        assert_eq!(after[key], before[key], "{key}");
    }
    assert_eq!(after["actions_logged"], 5);
    let (status, ack) = http(&addr, "POST", &format!("/sessions/{id}/events"), r#"{"type":"finish"}"#);
    assert_eq!(status, 200);
    assert_eq!(ack["completion"]["cells_colored"], 2);
    child.kill().unwrap();
    child.wait().unwrap();
}
