//! Terminal client for a running service. All dialogue logic stays on the
//! server; this only relays lines to `/api/chat`.

use std::io::{BufRead, Write};

use anyhow::{bail, Context};
use clap::Args;
use serde_json::{json, Value};

use medchat_service::ServiceConfig;

#[derive(Args)]
pub struct ChatArgs {
    #[arg(long)]
    patient: String,
    /// Service base URL; defaults to the configured host and port.
    #[arg(long)]
    url: Option<String>,
}

fn post(agent: &ureq::Agent, url: &str, body: Value) -> anyhow::Result<Value> {
    let mut resp = agent
        .post(url)
        .send_json(&body)
        .with_context(|| format!("cannot reach {url}"))?;
    let status = resp.status();
    let value: Value = resp.body_mut().read_json().context("unreadable reply")?;
    if !status.is_success() {
        bail!("{status}: {}", value["error"].as_str().unwrap_or("request failed"));
    }
    Ok(value)
}

pub fn run(args: ChatArgs, config: ServiceConfig) -> anyhow::Result<()> {
    anyhow::ensure!(!args.patient.trim().is_empty(), "--patient must not be empty");
    let base = args
        .url
        .unwrap_or_else(|| format!("http://{}:{}", config.host, config.port));
    let base = base.trim_end_matches('/');
    let agent: ureq::Agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
    let mut out = std::io::stdout().lock();

    let greeting = post(&agent, &format!("{base}/api/conversations/start"), json!({"patient_id": args.patient}))?;
    writeln!(out, "bot> {}", greeting["reply_text"].as_str().unwrap_or_default())?;
    out.flush()?;

    let stdin = std::io::stdin();
    for line in stdin.lock().lines() {
        let line = line?;
        let message = line.trim();
        if message.is_empty() {
            continue;
        }
        if matches!(message, "/quit" | "/exit") {
            break;
        }
        let reply = post(
            &agent,
            &format!("{base}/api/chat"),
            json!({"patient_id": args.patient, "message": message}),
        )?;
        writeln!(out, "bot> {}", reply["reply_text"].as_str().unwrap_or_default())?;
        out.flush()?;
    }
    Ok(())
}
