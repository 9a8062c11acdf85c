//! Command-line front end: batch runs, a REPL, chronicle administration and
//! the HTTP server, against an embedded engine or a remote server.

pub mod backend;
pub mod render;

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::Parser;
use peerhol::engine::Engine;
use peerhol::syntax::script::needs_more_input;
use peerhol_service::wire::NamedValue;
use peerhol_service::ServiceConfig;
use serde::Deserialize;

use backend::{Backend, Embedded, Failure, Remote};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SCRIPT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug, Clone, Default)]
#[command(name = "peerhol", version, about = "Run ProofScript against an embedded engine or a peerhol server")]
pub struct Args {
    /// Script files, run in order. Without files (and without --list,
    /// --repair or --serve) an interactive session starts.
    pub files: Vec<PathBuf>,
    /// Server base URL, e.g. http://127.0.0.1:8080
    #[arg(long, conflicts_with = "store")]
    pub server: Option<String>,
    /// Store file for the embedded engine; in memory if omitted.
    #[arg(long)]
    pub store: Option<PathBuf>,
    /// Print terms with ASCII spellings.
    #[arg(long)]
    pub ascii: bool,
    /// Publish the (single) script file as a new version of this chronicle.
    #[arg(long, value_name = "OWNER:NAME")]
    pub publish: Option<String>,
    /// Regenerate out-of-date chronicles and print what happened.
    #[arg(long)]
    pub repair: bool,
    /// List all chronicles with their status.
    #[arg(long)]
    pub list: bool,
    /// User to run as (embedded) or to log in as (remote).
    #[arg(long, env = "PEERHOL_USER")]
    pub user: Option<String>,
    #[arg(long, env = "PEERHOL_PASSWORD", hide_env_values = true)]
    pub password: Option<String>,
    /// TOML file: server settings, plus an optional [client] table.
    #[arg(long, env = "PEERHOL_CONFIG")]
    pub config: Option<PathBuf>,
    /// Serve the HTTP API instead of running scripts.
    #[arg(long, conflicts_with_all = ["server", "files", "publish", "repair", "list"])]
    pub serve: bool,
}

/// The `[client]` table of the configuration file.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClientConfig {
    pub server: Option<String>,
    pub user: Option<String>,
    pub ascii: bool,
}

pub fn load_config(path: Option<&Path>) -> Result<(ServiceConfig, ClientConfig), String> {
    let mut table = match path {
        Some(p) => {
            let src = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            src.parse::<toml::Table>().map_err(|e| format!("{}: {e}", p.display()))?
        }
        None => toml::Table::new(),
    };
    let client = match table.remove("client") {
        Some(v) => v.try_into::<ClientConfig>().map_err(|e| format!("[client]: {e}"))?,
        None => ClientConfig::default(),
    };
    let mut service: ServiceConfig =
        toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| e.to_string())?;
    service.apply_env(|k| std::env::var(k).ok()).map_err(|e| e.to_string())?;
    Ok((service, client))
}

macro_rules! say {
    ($w:expr, $($arg:tt)*) => {
        let _ = writeln!($w, $($arg)*);
    };
}

/// Runs the command line; returns the process exit code.
pub fn run(args: &Args, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let (mut service, client) = match load_config(args.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            say!(err, "configuration: {e}");
            return EXIT_USAGE;
        }
    };
    if let Some(p) = &args.store {
        service.store = Some(p.clone());
    }
    if args.serve {
        return serve(service, err);
    }
    let ascii = args.ascii || client.ascii;

    // read everything up front: a missing file runs nothing
    let mut scripts = Vec::new();
    for f in &args.files {
        match std::fs::read_to_string(f) {
            Ok(s) => scripts.push((f.display().to_string(), s)),
            Err(e) => {
                say!(err, "{}: {e}", f.display());
                return EXIT_USAGE;
            }
        }
    }
    let mut user = args.user.clone().or(client.user);
    let publish = match &args.publish {
        Some(spec) => {
            let Some((owner, name)) = spec.split_once(':') else {
                say!(err, "--publish expects OWNER:NAME, got '{spec}'");
                return EXIT_USAGE;
            };
            if scripts.len() != 1 {
                say!(err, "--publish takes exactly one script file");
                return EXIT_USAGE;
            }
            match &user {
                Some(u) if u != owner => {
                    say!(err, "cannot publish as {owner} while running as {u}");
                    return EXIT_USAGE;
                }
                _ => user = Some(owner.to_string()),
            }
            Some(name.to_string())
        }
        None => None,
    };

    let server = args.server.clone().or(client.server);
    let mut backend: Box<dyn Backend> = match &server {
        Some(url) => {
            let (Some(login), Some(password)) = (&user, &args.password) else {
                say!(err, "remote mode needs --user and --password (or PEERHOL_USER / PEERHOL_PASSWORD)");
                return EXIT_USAGE;
            };
            match Remote::connect(url, login, password, ascii) {
                Ok(r) => Box::new(r),
                Err(f) => {
                    say!(err, "{}", failure_text("login", &f));
                    return EXIT_USAGE;
                }
            }
        }
        None => {
            let engine = match service.open_engine() {
                Ok(e) => e,
                Err(e) => {
                    say!(err, "{e}");
                    return EXIT_USAGE;
                }
            };
            Box::new(Embedded::new(engine, user.unwrap_or_else(|| "local".into()), ascii))
        }
    };
    session(backend.as_mut(), args, &scripts, publish.as_deref(), input, out, err)
}

fn failure_text(what: &str, f: &Failure) -> String {
    match f {
        Failure::Script(d) => render::error(what, d),
        Failure::Other(m) => format!("{what}: {m}"),
    }
}

fn failure_code(f: &Failure) -> i32 {
    match f {
        Failure::Script(_) => EXIT_SCRIPT,
        Failure::Other(_) => EXIT_USAGE,
    }
}

fn session(
    backend: &mut dyn Backend,
    args: &Args,
    scripts: &[(String, String)],
    publish: Option<&str>,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    for (file, src) in scripts {
        match backend.execute(src, publish) {
            Ok(r) => {
                let _ = write!(out, "{}", render::report(&r));
            }
            Err(f) => {
                say!(err, "{}", failure_text(file, &f));
                return failure_code(&f);
            }
        }
    }
    if args.repair {
        match backend.repair() {
            Ok(r) => {
                let _ = write!(out, "{}", render::repair(&r));
            }
            Err(f) => {
                say!(err, "{}", failure_text("repair", &f));
                return failure_code(&f);
            }
        }
    }
    if args.list {
        match backend.list() {
            Ok(l) => {
                let _ = write!(out, "{}", render::list(&l));
            }
            Err(f) => {
                say!(err, "{}", failure_text("list", &f));
                return failure_code(&f);
            }
        }
    }
    if scripts.is_empty() && !args.repair && !args.list {
        return repl(backend, input, out, err);
    }
    EXIT_OK
}

const PROMPT: &str = "peerhol> ";
const MORE: &str = "     ..> ";

/// Reads statements until end of input or `:quit`. A statement ends at the
/// first line break after which all blocks are closed.
pub fn repl(backend: &mut dyn Backend, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut bindings: Vec<NamedValue> = Vec::new();
    let mut current: Option<String> = None;
    let mut buf = String::new();
    loop {
        let _ = write!(out, "{}", if buf.is_empty() { PROMPT } else { MORE });
        let _ = out.flush();
        let mut line = String::new();
        match input.read_line(&mut line) {
            Ok(0) => {
                if !buf.trim().is_empty() {
                    say!(err, "incomplete statement discarded");
                }
                let _ = writeln!(out);
                return EXIT_OK;
            }
            Ok(_) => {}
            Err(e) => {
                say!(err, "{e}");
                return EXIT_USAGE;
            }
        }
        if buf.is_empty() && line.trim().is_empty() {
            continue;
        }
        if buf.is_empty() && line.trim_start().starts_with(':') {
            match line.trim() {
                ":quit" | ":q" => return EXIT_OK,
                ":env" => {
                    for b in &bindings {
                        say!(out, "{}", render::binding(b));
                    }
                }
                ":context" => show_context(backend, current.as_deref(), out, err),
                ":help" => {
                    say!(out, ":context  show the current context\n:env      show the bindings\n:quit     leave");
                }
                other => {
                    say!(err, "unknown command {other} (try :help)");
                }
            }
            continue;
        }
        buf.push_str(&line);
        if needs_more_input(&buf) {
            continue;
        }
        let src = std::mem::take(&mut buf);
        match backend.statement(src.trim_end()) {
            Ok(r) => {
                for l in &r.output {
                    say!(out, "{l}");
                }
                let mut changed = false;
                for b in &r.bindings {
                    if !bindings.contains(b) {
                        changed = true;
                        say!(out, "{}", render::binding(b));
                    }
                }
                // declarations evaluate to the context they leave behind;
                // only show it when nothing more specific was printed
                if r.value_kind == "context" && !changed {
                    show_context(backend, Some(&r.final_context), out, err);
                } else if !r.value.is_empty() {
                    say!(out, "{}", r.value);
                }
                bindings = r.bindings;
                current = Some(r.final_context);
            }
            Err(f) => {
                say!(err, "{}", failure_text("input", &f));
            }
        }
    }
}

fn show_context(backend: &mut dyn Backend, key: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) {
    let Some(key) = key else {
        say!(out, "no statement has run yet; the session starts in the root theory");
        return;
    };
    match backend.context(key) {
        Ok(doc) => {
            let _ = write!(out, "{}", render::context(&doc));
        }
        Err(f) => {
            say!(err, "{}", failure_text("context", &f));
        }
    }
}

fn serve(config: ServiceConfig, err: &mut dyn Write) -> i32 {
    let rt = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            say!(err, "{e}");
            return EXIT_USAGE;
        }
    };
    match rt.block_on(peerhol_service::serve(config)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            say!(err, "{e}");
            EXIT_USAGE
        }
    }
}

/// Opens an embedded engine the way the command line would.
pub fn embedded_engine(config: &ServiceConfig) -> Result<Engine, String> {
    config.open_engine().map_err(|e| e.to_string())
}
