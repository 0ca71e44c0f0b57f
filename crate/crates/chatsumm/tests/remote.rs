mod common;

use std::time::{Duration, Instant};

use chatsumm::remote::{Endpoint, RemoteArm, RemoteEncoder, RemoteError, RemotePredictor};
use chatsumm_core::arms::{Arm, ArmError, ArmOutput, ArmRequest};
use chatsumm_core::bandit::{BanditItem, ContextBuilder, RawContext};
use chatsumm_core::embeddings::{EncoderError, SentenceEncoder};
use chatsumm_core::punctuation::{restore, PredictorError, PunctLabel, PunctMode};
use chatsumm_core::transcript::{ChannelKind, ChatTranscript};
use common::{json, MockServer};

fn endpoint(url: &str, retries: u32) -> Endpoint {
    Endpoint::new(url, Duration::from_millis(500), retries).unwrap()
}

#[test]
fn endpoint_urls_are_validated() {
    assert!(matches!(Endpoint::new("localhost:80", Duration::from_secs(1), 0), Err(RemoteError::InvalidEndpoint(_))));
    assert!(matches!(Endpoint::new("http://", Duration::from_secs(1), 0), Err(RemoteError::InvalidEndpoint(_))));
    assert_eq!(Endpoint::new("http://h:1/", Duration::from_secs(1), 0).unwrap().url("/v1/x"), "http://h:1/v1/x");
}

#[test]
fn remote_predictor_labels_every_segment() {
    let server = MockServer::start(|_, _, body| {
        let n = json(body)["tokens"].as_array().unwrap().len();
        (200, serde_json::json!({ "labels": vec!["PERIOD"; n] }).to_string())
    });
    let p = RemotePredictor::new(endpoint(&server.url, 0));
    let text = (0..20).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ");
    let out = restore(&text, PunctMode::Full, &p, 8).unwrap();
    assert!(out.labels.iter().all(|&l| l == PunctLabel::Period));
    let calls = server.calls();
    assert!(calls.len() >= 3);
    assert!(calls.iter().all(|c| c.path == "/v1/punctuate"));
}

#[test]
fn predictor_errors_map_to_protocol_and_timeout() {
    let server = MockServer::start(|_, _, _| (200, r#"{"labels":["SEMICOLON"]}"#.into()));
    let p = RemotePredictor::new(endpoint(&server.url, 0));
    let err = restore("hello there friend", PunctMode::Full, &p, 8).unwrap_err();
    assert!(err.to_string().contains("SEMICOLON"), "{err}");

    let bad = MockServer::start(|_, _, _| (400, "nope".into()));
    let p = RemotePredictor::new(endpoint(&bad.url, 3));
    match chatsumm_core::punctuation::Predictor::predict(&p, &batch_of(&["a"])) {
        Err(PredictorError::Protocol { status, body }) => assert_eq!((status, body.as_str()), (400, "nope")),
        other => panic!("{other:?}"),
    }
    assert_eq!(bad.calls().len(), 1, "4xx is not retried");

    // nothing listens on this port once the listener is dropped
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let down = RemotePredictor::new(endpoint(&format!("http://127.0.0.1:{port}"), 1));
    assert_eq!(
        chatsumm_core::punctuation::Predictor::predict(&down, &batch_of(&["a"])),
        Err(PredictorError::Timeout)
    );
}

fn batch_of<'a>(tokens: &'a [&'a str]) -> chatsumm_core::punctuation::SegmentBatch<'a> {
    let vocab: &'a [String] = Box::leak(tokens.iter().map(|s| s.to_string()).collect::<Vec<_>>().into_boxed_slice());
    let ids: Vec<u32> = (0..tokens.len() as u32).collect();
    let segments = Box::leak(chatsumm_core::punctuation::make_segments(&ids, 8).unwrap().into_boxed_slice());
    chatsumm_core::punctuation::SegmentBatch { segments, vocab, turn_boundaries: &[] }
}

#[test]
fn hung_server_times_out_within_budget() {
    let server = MockServer::start(|_, _, _| (0, String::new()));
    let enc = RemoteEncoder::new(Endpoint::new(&server.url, Duration::from_millis(200), 1).unwrap(), 2);
    let t = Instant::now();
    assert_eq!(enc.encode("hi"), Err(EncoderError::Timeout));
    assert!(t.elapsed() < Duration::from_secs(2), "{:?}", t.elapsed());
    assert_eq!(server.calls().len(), 2);
}

#[test]
fn remote_encoder_returns_vector() {
    let server = MockServer::start(|_, _, body| {
        let text = json(body)["text"].as_str().unwrap().to_string();
        (200, serde_json::json!({ "vector": [text.len() as f64, 1.0] }).to_string())
    });
    let enc = RemoteEncoder::new(endpoint(&server.url, 0), 4);
    assert_eq!(enc.encode("abc").unwrap().values, vec![3.0, 1.0]);
    assert!(enc.provider().starts_with("remote:"));
    assert!((enc.similarity("ab", "ab").unwrap() - 1.0).abs() < 1e-12);
}

fn item() -> BanditItem {
    let t = ChatTranscript::from_turns("t-1", [("c", "my router is down"), ("c", "please help")]);
    let mut it = BanditItem::synthetic("t-1", RawContext::default());
    it.transcript = t;
    it.channel = ChannelKind::Customer;
    it
}

#[test]
fn remote_arm_returns_summary_verbatim_and_retries() {
    let server = MockServer::start(|i, _, _| {
        if i < 2 {
            (503, "busy".into())
        } else {
            (200, r#"{"summary":"Router is down."}"#.into())
        }
    });
    let arm = RemoteArm::new("remote", endpoint(&server.url, 3));
    let it = item();
    let ctx = ContextBuilder::new().observe(it.context);
    let req = ArmRequest { item_index: 0, item: &it, context: &ctx, max_sentences: 2 };
    assert_eq!(arm.summarize(&req).unwrap(), ArmOutput::Text("Router is down.".into()));
    let calls = server.calls();
    assert_eq!(calls.len(), 3);
    assert_eq!(calls[0].body, calls[2].body, "request body is byte-stable");
    let body = json(&calls[0].body);
    assert_eq!(body["id"], "t-1");
    assert_eq!(body["channel"], "customer");
    assert_eq!(body["max_sentences"], 2);
    assert_eq!(body["text"], it.transcript.channel_text());
    assert_eq!(it, item(), "transcript untouched");
}

#[test]
fn malformed_summary_is_a_protocol_error() {
    let server = MockServer::start(|_, _, _| (200, "{\"summ".into()));
    let arm = RemoteArm::new("remote", endpoint(&server.url, 2));
    let it = item();
    let ctx = ContextBuilder::new().observe(it.context);
    let req = ArmRequest { item_index: 0, item: &it, context: &ctx, max_sentences: 2 };
    assert!(matches!(arm.summarize(&req), Err(ArmError::Protocol(_))));
    assert_eq!(server.calls().len(), 1);
}
