//! Where scripts run: an engine inside this process, or a server.

use peerhol::context::{ContextRef, ContextSource};
use peerhol::engine::{Engine, ExecRequest};
use peerhol::interpreter::State;
use peerhol::syntax::Mode;
use peerhol_service::wire::{
    ChronicleSummary, ContextDoc, Credentials, ErrorDoc, ExecuteRequest, ExecuteResponse, RepairDoc, SessionResponse,
    StatusDoc,
};

pub enum Failure {
    /// The script was rejected; carries the position.
    Script(ErrorDoc),
    /// Anything else: I/O, transport, authentication.
    Other(String),
}

pub trait Backend {
    fn execute(&mut self, script: &str, publish: Option<&str>) -> Result<ExecuteResponse, Failure>;
    /// Runs one interactive statement, continuing from the state left by
    /// the previous successful one.
    fn statement(&mut self, src: &str) -> Result<ExecuteResponse, Failure>;
    fn context(&mut self, key: &str) -> Result<ContextDoc, Failure>;
    fn list(&mut self) -> Result<Vec<ChronicleSummary>, Failure>;
    fn repair(&mut self) -> Result<RepairDoc, Failure>;
}

pub struct Embedded {
    engine: Engine,
    user: String,
    mode: Mode,
    state: Option<State>,
}

impl Embedded {
    pub fn new(engine: Engine, user: impl Into<String>, ascii: bool) -> Embedded {
        Embedded { engine, user: user.into(), mode: if ascii { Mode::Ascii } else { Mode::Unicode }, state: None }
    }

    fn request(&self, script: &str) -> ExecRequest {
        let mut req = ExecRequest::new(&self.user, script);
        req.mode = self.mode;
        req
    }
}

impl Backend for Embedded {
    fn execute(&mut self, script: &str, publish: Option<&str>) -> Result<ExecuteResponse, Failure> {
        let mut req = self.request(script);
        req.publish = publish.map(str::to_string);
        self.engine.execute(&req).map(|r| ExecuteResponse::from(&r)).map_err(|e| Failure::Script((&e).into()))
    }

    fn statement(&mut self, src: &str) -> Result<ExecuteResponse, Failure> {
        let req = self.request(src);
        let (state, report) = self.engine.step(&req, self.state.clone()).map_err(|e| Failure::Script((&e).into()))?;
        self.state = Some(state);
        Ok(ExecuteResponse::from(&report))
    }

    fn context(&mut self, key: &str) -> Result<ContextDoc, Failure> {
        let r: ContextRef = key.parse().map_err(|e| Failure::Other(format!("{e}")))?;
        let store = self.engine.store();
        let ctx = store.load(&r).map_err(|e| Failure::Other(e.to_string()))?;
        Ok(ContextDoc::build(store, &ctx, self.mode))
    }

    fn list(&mut self) -> Result<Vec<ChronicleSummary>, Failure> {
        let reg = self.engine.registry();
        Ok(reg
            .chronicles()
            .map(|c| ChronicleSummary {
                owner: c.id.owner.clone(),
                name: c.id.name.clone(),
                newest: c.newest().version,
                status: self.engine.status(&c.id).as_ref().map(StatusDoc::from).unwrap_or(StatusDoc {
                    up_to_date: true,
                    reason: None,
                }),
            })
            .collect())
    }

    fn repair(&mut self) -> Result<RepairDoc, Failure> {
        Ok(RepairDoc::from(&self.engine.repair_sweep()))
    }
}

/// Talks to a server over HTTP. Interactive statements are replayed: the
/// server keeps no per-client state, so each statement is sent together
/// with every statement that succeeded before it.
pub struct Remote {
    http: reqwest::blocking::Client,
    base: String,
    token: String,
    ascii: bool,
    transcript: Vec<String>,
}

fn transport(e: reqwest::Error) -> Failure {
    Failure::Other(format!("cannot reach server: {e}"))
}

fn decode<T: serde::de::DeserializeOwned>(res: reqwest::blocking::Response) -> Result<T, Failure> {
    let status = res.status();
    if status.is_success() {
        return res.json().map_err(|e| Failure::Other(format!("bad response: {e}")));
    }
    let doc: Option<ErrorDoc> = res.json().ok();
    match doc {
        Some(d) if status.as_u16() == 422 => Err(Failure::Script(d)),
        Some(d) => Err(Failure::Other(format!("{} ({status}): {}", d.error, d.message))),
        None => Err(Failure::Other(format!("server answered {status}"))),
    }
}

impl Remote {
    pub fn connect(base: &str, login: &str, password: &str, ascii: bool) -> Result<Remote, Failure> {
        let http = reqwest::blocking::Client::new();
        let base = base.trim_end_matches('/').to_string();
        let creds = Credentials { login: login.into(), password: password.into() };
        let res = http.post(format!("{base}/api/login")).json(&creds).send().map_err(transport)?;
        let s: SessionResponse = decode(res)?;
        Ok(Remote { http, base, token: s.session, ascii, transcript: Vec::new() })
    }

    fn url(&self, path: &str) -> String {
        let q = if self.ascii { "?ascii=1" } else { "" };
        format!("{}{path}{q}", self.base)
    }

    fn get<T: serde::de::DeserializeOwned>(&self, path: &str) -> Result<T, Failure> {
        decode(self.http.get(self.url(path)).bearer_auth(&self.token).send().map_err(transport)?)
    }

    fn post<T: serde::de::DeserializeOwned>(&self, path: &str, body: &impl serde::Serialize) -> Result<T, Failure> {
        decode(self.http.post(self.url(path)).bearer_auth(&self.token).json(body).send().map_err(transport)?)
    }

    pub fn logout(&self) {
        let _ = self.http.post(format!("{}/api/logout", self.base)).bearer_auth(&self.token).send();
    }
}

impl Backend for Remote {
    fn execute(&mut self, script: &str, publish: Option<&str>) -> Result<ExecuteResponse, Failure> {
        let req = ExecuteRequest { script: script.into(), chronicle: publish.map(str::to_string), ..Default::default() };
        self.post("/api/execute", &req)
    }

    fn statement(&mut self, src: &str) -> Result<ExecuteResponse, Failure> {
        let mut script = self.transcript.join("\n");
        // error positions are reported relative to the statement
        let shift = script.lines().count() as u32;
        if !self.transcript.is_empty() {
            script.push('\n');
        }
        script.push_str(src);
        match self.execute(&script, None) {
            Ok(r) => {
                self.transcript.push(src.to_string());
                Ok(r)
            }
            Err(Failure::Script(mut d)) => {
                d.line = d.line.map(|l| l.saturating_sub(shift).max(1));
                Err(Failure::Script(d))
            }
            Err(e) => Err(e),
        }
    }

    fn context(&mut self, key: &str) -> Result<ContextDoc, Failure> {
        self.get(&format!("/api/context/{}", key.replacen(':', "/", 1)))
    }

    fn list(&mut self) -> Result<Vec<ChronicleSummary>, Failure> {
        self.get("/api/chronicles")
    }

    fn repair(&mut self) -> Result<RepairDoc, Failure> {
        self.post("/api/repair", &serde_json::json!({}))
    }
}
