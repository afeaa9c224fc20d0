use clap::Parser;
use std::io::Write;
use std::process::ExitCode;
use ymqm_cli::{exit_code, report, run, write_csv, write_json, Cli, ConfigError, Format, RunConfig, Status};

const EXIT_CONFIG: u8 = 3;

fn config_error(e: &ConfigError) -> ExitCode {
    eprintln!("{}", serde_json::json!({ "error": "config", "message": e.0 }));
    ExitCode::from(EXIT_CONFIG)
}

fn threads() -> Result<Option<usize>, ConfigError> {
    match std::env::var("YMQM_THREADS") {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(ConfigError(format!("YMQM_THREADS must be a positive integer, got '{s}'"))),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = match RunConfig::resolve(cli.command, &cli.flags) {
        Ok(c) => c,
        Err(e) => return config_error(&e),
    };
    match threads() {
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                return config_error(&ConfigError(e.to_string()));
            }
        }
        Ok(None) => {}
        Err(e) => return config_error(&e),
    }
    // Open the artifact before any work so an unwritable path fails fast.
    let mut sink: Box<dyn Write> = match &cfg.out {
        Some(path) => match std::fs::File::create(path) {
            Ok(f) => Box::new(std::io::BufWriter::new(f)),
            Err(e) => return config_error(&ConfigError(format!("cannot write {}: {e}", path.display()))),
        },
        None => Box::new(std::io::stdout().lock()),
    };

    let rows = run(&cfg);
    let manifest = cfg.manifest();
    let written = match cfg.format {
        Format::Csv => write_csv(&mut sink, &manifest, &rows),
        Format::Json => write_json(&mut sink, &manifest, &rows),
    }
    .and_then(|_| sink.flush());
    drop(sink);
    if let Err(e) = written {
        return config_error(&ConfigError(format!("writing output failed: {e}")));
    }

    for r in rows.iter().filter(|r| r.status == Status::Fail) {
        let record = serde_json::json!({
            "error": "route",
            "point": r.point,
            "quantity": r.quantity,
            "route": r.route,
            "message": r.note,
        });
        eprintln!("{record}");
    }
    let table = if cfg.out.is_some() { report(std::io::stdout().lock(), &rows) } else { report(std::io::stderr().lock(), &rows) };
    if table.is_err() {
        return ExitCode::from(EXIT_CONFIG);
    }
    ExitCode::from(exit_code(&rows) as u8)
}
