#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::thread::JoinHandle;

use clap::Parser;
use runlog::transport::Exchange;
use runlog::{execute, Cli, Context, HttpTransport, Recording, RecordingTransport, Transport};
use runlog_core::domain::{ActorRef, Role};
use runlog_core::{Store, StoreOptions};
use runlog_service::routes::Route;
use runlog_service::{AppState, API_PREFIX};
use url::Url;

pub const SHIFTER_TOKEN: &str = "shifter-token";
pub const MACHINE_TOKEN: &str = "daq-token";

/// The service on an ephemeral local port, stopped on drop.
pub struct Server {
    pub url: Url,
    pub store: Arc<Store>,
    stop: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl Server {
    pub fn start() -> Self {
        Self::with_store(Store::in_memory(StoreOptions::default()))
    }

    pub fn with_store(store: Store) -> Self {
        let store = Arc::new(store);
        let tokens = HashMap::from([
            (SHIFTER_TOKEN.to_string(), ActorRef::new("alice", Role::Shifter).unwrap()),
            (MACHINE_TOKEN.to_string(), ActorRef::new("daq", Role::Machine).unwrap()),
        ]);
        let state = AppState::new(store.clone(), tokens);
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        listener.set_nonblocking(true).unwrap();
        let url = Url::parse(&format!("http://{}", listener.local_addr().unwrap())).unwrap();
        let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            let runtime = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build().unwrap();
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(listener).unwrap();
                runlog_service::serve_on(listener, state, async {
                    let _ = stopped.await;
                })
                .await
                .unwrap();
            });
        });
        Server { url, store, stop: Some(stop), thread: Some(thread) }
    }

    pub fn transport(&self) -> HttpTransport {
        HttpTransport::new(&self.url).unwrap()
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        if let Some(thread) = self.thread.take() {
            let _ = thread.join();
        }
    }
}

/// A URL nothing listens on.
pub fn dead_endpoint() -> Url {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    Url::parse(&format!("http://{addr}")).unwrap()
}

#[derive(Debug)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub error: String,
    pub exchanges: Vec<Exchange>,
}

impl Outcome {
    /// `(METHOD, path)` pairs, e.g. `("POST", "/logs")`.
    pub fn calls(&self) -> Vec<(String, String)> {
        self.exchanges
            .iter()
            .map(|x| (x.request.method.key().to_uppercase(), x.request.path.clone()))
            .collect()
    }

    /// Every request hit a documented route and was answered.
    pub fn assert_documented(&self) {
        for x in &self.exchanges {
            let path = format!("{API_PREFIX}{}", x.request.path_only());
            assert!(
                Route::matching(x.request.method, &path).is_some(),
                "{} {path} is not a documented operation",
                x.request.method.key()
            );
        }
    }
}

/// Runs one invocation in-process. `env` is the whole environment the
/// command sees; there is no config file unless `config_file` is given.
pub fn run_cli(args: &[&str], env: &[(&str, &str)], config_file: Option<&str>) -> Outcome {
    run_cli_recorded(args, env, config_file, &Recording::default())
}

/// As [`run_cli`], appending the invocation's traffic to `recording`.
pub fn run_cli_recorded(args: &[&str], env: &[(&str, &str)], config_file: Option<&str>, recording: &Recording) -> Outcome {
    let argv = std::iter::once("runlog").chain(args.iter().copied());
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return Outcome { code: e.exit_code() as u8, stdout: String::new(), error: e.to_string(), exchanges: vec![] }
        }
    };
    let env: HashMap<String, String> = env.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    let lookup = move |k: &str| env.get(k).cloned();
    let before = recording.exchanges().len();
    let rec = recording.clone();
    let mut connect = move |url: &Url| -> Result<Box<dyn Transport>, runlog::CliError> {
        Ok(Box::new(RecordingTransport::with_recording(HttpTransport::new(url).unwrap(), rec.clone())))
    };
    let mut out = Vec::new();
    let mut ctx = Context {
        env: &lookup,
        config_file: config_file.map(|text| (PathBuf::from("config"), text.to_string())),
        connect: &mut connect,
        out: &mut out,
    };
    let result = execute(cli, &mut ctx);
    let (code, error) = match result {
        Ok(()) => (0, String::new()),
        Err(e) => (e.exit_code(), e.to_string()),
    };
    Outcome { code, stdout: String::from_utf8(out).unwrap(), error, exchanges: recording.exchanges().split_off(before) }
}

/// Runs against `server` with the shifter token unless `env` says otherwise.
pub fn run_against(server: &Server, args: &[&str]) -> Outcome {
    let url = server.url.to_string();
    run_cli(args, &[("RUNLOG_ENDPOINT", &url), ("RUNLOG_TOKEN", SHIFTER_TOKEN)], None)
}
