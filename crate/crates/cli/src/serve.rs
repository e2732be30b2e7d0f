use std::io::Write;
use std::sync::Arc;

use medchat_service::{Server, ServiceConfig, SystemClock};

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
    tracing::info!("shutting down");
}

pub fn run(config: ServiceConfig) -> anyhow::Result<()> {
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(async {
        let server = Server::bind(config, Arc::new(SystemClock)).await?;
        let addr = server.local_addr()?;
        // scripts wait for this line to learn the port
        println!("listening on http://{addr}");
        std::io::stdout().flush()?;
        server.run(shutdown_signal()).await?;
        Ok(())
    })
}
