use std::net::SocketAddr;

use amrrt_service::{serve, ServiceConfig};
use clap::Parser;

#[derive(Parser)]
#[command(name = "amrrt-serve", about = "Live AM-RRT* planning sessions over WebSocket")]
struct Args {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Periodic snapshots per second.
    #[arg(long, default_value_t = 10.0)]
    snapshot_hz: f64,
    /// Tree nodes per snapshot before subsampling.
    #[arg(long, default_value_t = 20_000)]
    node_cap: usize,
    /// Map used when `hello` names none.
    #[arg(long, default_value = "empty")]
    map: String,
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    let args = Args::parse();
    let config = ServiceConfig {
        snapshot_hz: args.snapshot_hz,
        node_cap: args.node_cap,
        default_map: args.map,
        ..ServiceConfig::default()
    };
    let listener = tokio::net::TcpListener::bind(args.addr).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    serve(listener, config).await
}
