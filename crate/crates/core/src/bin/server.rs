use std::path::PathBuf;
use std::sync::Arc;

use axis_elicit::clock::SystemClock;
use axis_elicit::config::Config;
use clap::Parser;
use tracing_subscriber::EnvFilter;

/// Serve the session API described by a TOML config file.
#[derive(Parser)]
#[command(version)]
struct Args {
    #[arg(long, short)]
    config: PathBuf,
    /// Overrides `bind` from the config.
    #[arg(long)]
    bind: Option<String>,
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .init();
    let args = Args::parse();
    let cfg = Config::load(&args.config)?;
    let platform = Arc::new(cfg.build_platform(Arc::new(SystemClock))?);
    let app = axis_elicit::http::router(platform, &cfg.facilitator_token);
    let bind = args.bind.unwrap_or(cfg.bind);
    let listener = tokio::net::TcpListener::bind(&bind).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app).await?;
    Ok(())
}
