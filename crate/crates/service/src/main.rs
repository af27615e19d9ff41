use std::net::SocketAddr;
use std::path::PathBuf;

use clap::Parser;
use evbox_service::{router, AppState};

/// Serves evbox sessions over HTTP.
#[derive(Debug, Parser)]
#[command(name = "evbox-service", version)]
struct Args {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Directory that relative input paths in actions resolve against.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long, short)]
    verbose: bool,
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    let args = Args::parse();
    let level = if args.verbose { "debug" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let listener = tokio::net::TcpListener::bind(args.addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(args.data_dir)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
