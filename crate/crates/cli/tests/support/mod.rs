#![allow(dead_code)]

use std::process::{Child, Command, Stdio};
use std::time::{Duration, Instant};

pub fn nca() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nca"));
    c.env("NCA_LOG", "error");
    c
}

pub fn free_port() -> u16 {
    std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

/// A running `nca serve`, killed on drop.
pub struct Server {
    child: Child,
    pub port: u16,
}

impl Server {
    pub fn spawn(mut cmd: Command, port: u16) -> Self {
        let child = cmd.stdout(Stdio::null()).stderr(Stdio::null()).spawn().expect("spawn nca serve");
        Self { child, port }
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

pub fn get(port: u16, path: &str) -> Option<(u16, Vec<u8>)> {
    let resp = reqwest::blocking::Client::new()
        .get(format!("http://127.0.0.1:{port}{path}"))
        .timeout(Duration::from_secs(10))
        .send()
        .ok()?;
    let code = resp.status().as_u16();
    Some((code, resp.bytes().ok()?.to_vec()))
}

/// Polls `f` every 50 ms until it yields a value or `limit` passes.
pub fn wait_for<T>(limit: Duration, mut f: impl FnMut() -> Option<T>) -> Option<T> {
    let start = Instant::now();
    while start.elapsed() < limit {
        if let Some(v) = f() {
            return Some(v);
        }
        std::thread::sleep(Duration::from_millis(50));
    }
    None
}
