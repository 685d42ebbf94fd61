use std::path::PathBuf;
use std::process::ExitCode;

use breaktimes_service::{serve, ServiceConfig, ServiceError, SurveyStore};
use clap::{Parser, Subcommand, ValueEnum};
use tracing_subscriber::EnvFilter;

#[derive(Debug, Parser)]
#[command(name = "breaktimes", version, about = "Art-therapy break sessions: HTTP service and reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the HTTP service until interrupted.
    Serve {
        #[arg(long, env = "BREAKTIMES_PORT", default_value_t = 8080)]
        port: u16,
        /// Where sessions and survey answers are stored.
        #[arg(long, env = "BREAKTIMES_DATA_DIR")]
        data_dir: PathBuf,
        /// Directory of scenario JSON files and their reference images.
        #[arg(long, env = "BREAKTIMES_SCENARIO_DIR")]
        scenario_dir: PathBuf,
        /// Keep the session open when the break timer runs out; the user
        /// finishes it explicitly.
        #[arg(long)]
        no_auto_finish: bool,
        /// Alternative stress questionnaire wording (JSON).
        #[arg(long, env = "BREAKTIMES_QUESTIONNAIRE")]
        questionnaire: Option<PathBuf>,
    },
    /// Print the pre/post stress cohort report from stored survey answers.
    Report {
        #[arg(long, env = "BREAKTIMES_DATA_DIR")]
        data_dir: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
        format: ReportFormat,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReportFormat {
    Table,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();

    let result = match cli.command {
        Command::Serve { port, data_dir, scenario_dir, no_auto_finish, questionnaire } => {
            let mut config = ServiceConfig::new(port, data_dir, scenario_dir);
            config.auto_finish_on_alert = !no_auto_finish;
            config.questionnaire = questionnaire;
            run_server(config)
        }
        Command::Report { data_dir, format } => report(data_dir, format),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            ExitCode::FAILURE
        }
    }
}

fn run_server(config: ServiceConfig) -> Result<(), ServiceError> {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(ServiceError::Bind)?;
    runtime.block_on(async {
        let handle = serve(config).await?;
        println!("listening on http://{}", handle.local_addr());
        shutdown_signal().await;
        tracing::info!("shutting down");
        handle.shutdown().await
    })
}

async fn shutdown_signal() {
    let interrupt = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        () = interrupt => {}
        () = terminate => {}
    }
}

fn report(data_dir: PathBuf, format: ReportFormat) -> Result<(), ServiceError> {
    if !data_dir.is_dir() {
        return Err(ServiceError::DataDirUnwritable {
            path: data_dir,
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such directory"),
        });
    }
    let report = SurveyStore::open(&data_dir)?.cohort_report()?;
    match format {
        ReportFormat::Table => print!("{}", report.render_table()),
        ReportFormat::Json => println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize")),
    }
    Ok(())
}
