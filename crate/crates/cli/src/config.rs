//! Run configuration: flag and config-file parsing, value ranges, defaults.

use clap::{Args, Parser, ValueEnum};
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use ymqm_core::{ModelParams, QuadratureSpec};

/// A configuration problem. Maps to exit code 3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Thomas-Fermi term.
    Tf,
    /// Wigner-Kirkwood orders `Z_k`.
    Wk,
    /// Resummed series and its constant.
    Resum,
    /// Log-log slopes of the most singular terms as `v → 0`.
    SingularScan,
    /// Three-coordinate model: `L` and the second-order term.
    N3,
    /// Eigenvalues and `Z(t)` by diagonalization.
    Spectrum,
    /// Every requested route side by side with discrepancies.
    Compare,
    /// Series and spectral `Z(t)` over a parameter grid.
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Tf => "tf",
            Command::Wk => "wk",
            Command::Resum => "resum",
            Command::SingularScan => "singular-scan",
            Command::N3 => "n3",
            Command::Spectrum => "spectrum",
            Command::Compare => "compare",
            Command::Sweep => "sweep",
        }
    }

    fn default_routes(self) -> &'static [Route] {
        use Route::*;
        match self {
            Command::Tf => &[Closed],
            Command::Wk => &[Closed, Symbolic],
            Command::Resum => &[Resummed],
            Command::SingularScan => &[Closed],
            Command::N3 => &[Closed, Quadrature],
            Command::Spectrum => &[Spectral],
            Command::Compare => &[Closed, Symbolic, Quadrature],
            Command::Sweep => &[Resummed, Symbolic],
        }
    }

    fn allowed_routes(self) -> &'static [Route] {
        use Route::*;
        match self {
            Command::Tf | Command::Wk => &[Closed, Symbolic, Quadrature],
            Command::Resum => &[Resummed, Symbolic],
            Command::SingularScan => &[Closed],
            Command::N3 => &[Closed, Quadrature],
            Command::Spectrum => &[Spectral],
            Command::Compare => &[Closed, Symbolic, Quadrature, Spectral, Resummed],
            Command::Sweep => &[Resummed, Symbolic, Quadrature, Spectral],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Route {
    Closed,
    Symbolic,
    Quadrature,
    Spectral,
    Resummed,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Closed => "closed",
            Route::Symbolic => "symbolic",
            Route::Quadrature => "quadrature",
            Route::Spectral => "spectral",
            Route::Resummed => "resummed",
        }
    }

    fn parse(s: &str) -> Result<Self, ConfigError> {
        Ok(match s.trim() {
            "closed" => Route::Closed,
            "symbolic" => Route::Symbolic,
            "quadrature" => Route::Quadrature,
            "spectral" => Route::Spectral,
            "resummed" => Route::Resummed,
            other => return bad(format!("unknown route '{other}'")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SumModeArg {
    /// `p = 0` terms of the singular sums only.
    Leading,
    /// Full finite `p` sums and every singular family.
    Full,
}

/// A scalar or `start:stop:count[:log]` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub log: bool,
}

impl Range {
    pub fn scalar(x: f64) -> Self {
        Self { start: x, stop: x, count: 1, log: false }
    }

    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        let num = |x: &str| -> Result<f64, ConfigError> {
            x.trim().parse::<f64>().map_err(|_| ConfigError(format!("'{x}' is not a number in range '{s}'")))
        };
        let parts: Vec<&str> = s.split(':').collect();
        let r = match parts.as_slice() {
            [x] => Self::scalar(num(x)?),
            [a, b, c] | [a, b, c, _] => {
                let count = c.trim().parse::<usize>().map_err(|_| ConfigError(format!("bad count '{c}' in range '{s}'")))?;
                let log = match parts.get(3).map(|x| x.trim()) {
                    None | Some("lin") => false,
                    Some("log") => true,
                    Some(other) => return bad(format!("range spacing must be 'log' or 'lin', got '{other}'")),
                };
                Self { start: num(a)?, stop: num(b)?, count, log }
            }
            _ => return bad(format!("range '{s}' must be a number or start:stop:count[:log]")),
        };
        if r.count == 0 {
            return bad(format!("range '{s}' is empty"));
        }
        if !r.start.is_finite() || !r.stop.is_finite() {
            return bad(format!("range '{s}' has non-finite ends"));
        }
        if r.log && (r.start <= 0.0 || r.stop <= 0.0) {
            return bad(format!("log range '{s}' needs positive ends"));
        }
        Ok(r)
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let f = i as f64 / last;
                if self.log {
                    (self.start.ln() + f * (self.stop.ln() - self.start.ln())).exp()
                } else {
                    self.start + f * (self.stop - self.start)
                }
            })
            .collect()
    }

    pub fn is_swept(&self) -> bool {
        self.count > 1
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.count == 1 {
            write!(f, "{:?}", self.start)
        } else {
            write!(f, "{:?}:{:?}:{}:{}", self.start, self.stop, self.count, if self.log { "log" } else { "lin" })
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ymqm", version, about = "Heat-kernel partition functions of x²y² Yang-Mills quantum mechanics")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

/// Every flag is optional so that config-file values survive unless overridden.
#[derive(Debug, Default, Args)]
pub struct Flags {
    /// Model: n2 or n3.
    #[arg(long)]
    pub model: Option<String>,
    /// Coupling, scalar or start:stop:count[:log].
    #[arg(long)]
    pub g: Option<String>,
    /// Higgs mass, scalar or range.
    #[arg(long)]
    pub v: Option<String>,
    /// Planck constant, scalar or range.
    #[arg(long)]
    pub hbar: Option<String>,
    /// Euclidean time, scalar or range.
    #[arg(long)]
    pub t: Option<String>,
    /// Comma-separated subset of closed,symbolic,quadrature,spectral,resummed.
    #[arg(long)]
    pub routes: Option<String>,
    /// Comma-separated even orders.
    #[arg(long)]
    pub k: Option<String>,
    /// Highest order of the series.
    #[arg(long)]
    pub kmax: Option<u32>,
    /// Singular sums: leading or full.
    #[arg(long, value_enum)]
    pub sum_mode: Option<SumModeArg>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Key-value config file with sections.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Relative tolerance of adaptive quadrature.
    #[arg(long)]
    pub tol_quad: Option<f64>,
    /// Eigenvalue convergence tolerance.
    #[arg(long)]
    pub tol_conv: Option<f64>,
    /// Relative discrepancy above which a row is flagged.
    #[arg(long)]
    pub tol_compare: Option<f64>,
    /// Oscillator levels per axis for diagonalization.
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Eigenvalues reported per spectrum.
    #[arg(long)]
    pub levels: Option<usize>,
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub model: u8,
    pub g: Range,
    pub v: Range,
    pub hbar: Range,
    pub t: Range,
    pub routes: Vec<Route>,
    pub ks: Vec<u32>,
    pub kmax: u32,
    pub sum_mode: SumModeArg,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub quad: QuadratureSpec,
    pub conv_tol: f64,
    pub compare_tol: f64,
    pub cutoff: usize,
    pub levels: usize,
}

/// Parse `key = value` lines grouped under `[section]` headers into
/// `section.key` entries. `#` and `;` start comments.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    let mut section = String::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split(['#', ';']).next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return bad(format!("line {}: unterminated section header", no + 1));
            };
            section = name.trim().to_string();
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return bad(format!("line {}: expected key = value", no + 1));
        };
        let key = if section.is_empty() { k.trim().to_string() } else { format!("{section}.{}", k.trim()) };
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return bad(format!("line {}: duplicate key '{key}'", no + 1));
        }
    }
    Ok(out)
}

const KNOWN_KEYS: &[&str] = &[
    "params.model",
    "params.g",
    "params.v",
    "params.hbar",
    "params.t",
    "series.routes",
    "series.k",
    "series.kmax",
    "series.sum_mode",
    "quadrature.rel_tol",
    "quadrature.abs_tol",
    "quadrature.max_subdivisions",
    "spectral.conv_tol",
    "spectral.cutoff",
    "spectral.levels",
    "compare.tol",
    "output.path",
    "output.format",
];

fn parse_num<T: std::str::FromStr>(key: &str, s: &str) -> Result<T, ConfigError> {
    s.trim().parse::<T>().map_err(|_| ConfigError(format!("{key}: cannot parse '{s}'")))
}

fn parse_model(s: &str) -> Result<u8, ConfigError> {
    match s.trim() {
        "n2" | "2" => Ok(2),
        "n3" | "3" => Ok(3),
        other => bad(format!("model must be n2 or n3, got '{other}'")),
    }
}

fn parse_list<T>(s: &str, f: impl Fn(&str) -> Result<T, ConfigError>) -> Result<Vec<T>, ConfigError> {
    let items: Vec<T> = s.split(',').filter(|x| !x.trim().is_empty()).map(f).collect::<Result<_, _>>()?;
    if items.is_empty() {
        return bad(format!("empty list '{s}'"));
    }
    Ok(items)
}

fn parse_orders(s: &str) -> Result<Vec<u32>, ConfigError> {
    parse_list(s, |x| {
        let k: u32 = parse_num("k", x)?;
        if k % 2 == 1 || k > 8 {
            return bad(format!("orders must be even and at most 8, got {k}"));
        }
        Ok(k)
    })
}

impl RunConfig {
    /// Defaults, then the config file, then flags.
    pub fn resolve(command: Command, flags: &Flags) -> Result<Self, ConfigError> {
        let file = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
                parse_config_text(&text)?
            }
            None => BTreeMap::new(),
        };
        Self::from_sources(command, &file, flags)
    }

    pub fn from_sources(command: Command, file: &BTreeMap<String, String>, flags: &Flags) -> Result<Self, ConfigError> {
        if let Some(k) = file.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return bad(format!("unknown config key '{k}'"));
        }
        let pick = |flag: &Option<String>, key: &str| flag.clone().or_else(|| file.get(key).cloned());
        let range = |flag: &Option<String>, key: &str, default: &str| Range::parse(&pick(flag, key).unwrap_or_else(|| default.to_string()));

        let model = match pick(&flags.model, "params.model") {
            Some(s) => parse_model(&s)?,
            None if command == Command::N3 => 3,
            None => 2,
        };
        if command == Command::N3 && model != 3 {
            return bad("the n3 command needs --model n3");
        }
        let v_default = match command {
            Command::SingularScan => "1e-3:1e-2:5:log",
            Command::N3 | Command::Spectrum if model == 3 => "0",
            _ => "1",
        };
        let routes = match pick(&flags.routes, "series.routes") {
            Some(s) => parse_list(&s, Route::parse)?,
            None => command.default_routes().to_vec(),
        };
        if let Some(r) = routes.iter().find(|r| !command.allowed_routes().contains(r)) {
            return bad(format!("route '{}' is not available for {}", r.name(), command.name()));
        }
        let mut dedup = routes.clone();
        dedup.sort();
        dedup.dedup();
        if dedup.len() != routes.len() {
            return bad("routes listed twice");
        }
        let ks = match pick(&flags.k, "series.k") {
            Some(s) => parse_orders(&s)?,
            None if command == Command::SingularScan => vec![2, 4],
            None => vec![2],
        };
        let kmax = match flags.kmax {
            Some(k) => k,
            None => file.get("series.kmax").map(|s| parse_num("series.kmax", s)).transpose()?.unwrap_or(4),
        };
        if kmax % 2 == 1 || kmax > 8 {
            return bad(format!("kmax must be even and at most 8, got {kmax}"));
        }
        let sum_mode = match (flags.sum_mode, file.get("series.sum_mode").map(String::as_str)) {
            (Some(m), _) => m,
            (None, None | Some("leading")) => SumModeArg::Leading,
            (None, Some("full")) => SumModeArg::Full,
            (None, Some(other)) => return bad(format!("sum_mode must be leading or full, got '{other}'")),
        };
        let format = match (flags.format, file.get("output.format").map(String::as_str)) {
            (Some(f), _) => f,
            (None, None | Some("csv")) => Format::Csv,
            (None, Some("json")) => Format::Json,
            (None, Some(other)) => return bad(format!("format must be csv or json, got '{other}'")),
        };
        let out = flags.out.clone().or_else(|| file.get("output.path").map(PathBuf::from));

        let mut quad = QuadratureSpec::default();
        if let Some(s) = file.get("quadrature.rel_tol") {
            quad.rel_tol = parse_num("quadrature.rel_tol", s)?;
        }
        if let Some(s) = file.get("quadrature.abs_tol") {
            quad.abs_tol = parse_num("quadrature.abs_tol", s)?;
        }
        if let Some(s) = file.get("quadrature.max_subdivisions") {
            quad.max_subdivisions = parse_num("quadrature.max_subdivisions", s)?;
        }
        if let Some(x) = flags.tol_quad {
            quad.rel_tol = x;
        }
        let float = |flag: Option<f64>, key: &str, default: f64| -> Result<f64, ConfigError> {
            let x = match flag {
                Some(x) => x,
                None => file.get(key).map(|s| parse_num(key, s)).transpose()?.unwrap_or(default),
            };
            if !(x > 0.0 && x.is_finite()) {
                return bad(format!("{key} must be positive, got {x}"));
            }
            Ok(x)
        };
        quad.rel_tol = float(Some(quad.rel_tol), "quadrature.rel_tol", 0.0)?;
        let conv_tol = float(flags.tol_conv, "spectral.conv_tol", 1e-6)?;
        let compare_tol = float(flags.tol_compare, "compare.tol", 1e-6)?;
        let count = |flag: Option<usize>, key: &str, default: usize| -> Result<usize, ConfigError> {
            Ok(match flag {
                Some(x) => x,
                None => file.get(key).map(|s| parse_num(key, s)).transpose()?.unwrap_or(default),
            })
        };
        let cutoff = count(flags.cutoff, "spectral.cutoff", if model == 3 { 12 } else { 40 })?;
        let levels = count(flags.levels, "spectral.levels", 10)?;
        if cutoff < 4 {
            return bad("cutoff must be at least 4");
        }

        let cfg = Self {
            command,
            model,
            g: range(&flags.g, "params.g", "1")?,
            v: range(&flags.v, "params.v", v_default)?,
            hbar: range(&flags.hbar, "params.hbar", "1")?,
            t: range(&flags.t, "params.t", "1")?,
            routes,
            ks,
            kmax,
            sum_mode,
            out,
            format,
            quad,
            conv_tol,
            compare_tol,
            cutoff,
            levels,
        };
        let swept = [&cfg.g, &cfg.v, &cfg.hbar, &cfg.t].iter().filter(|r| r.is_swept()).count();
        if swept > 2 {
            return bad(format!("at most two swept variables per run, got {swept}"));
        }
        for p in cfg.grid() {
            p.validate().map_err(|e| ConfigError(format!("grid point g={} v={} hbar={} t={}: {e}", p.g, p.v, p.hbar, p.t)))?;
        }
        Ok(cfg)
    }

    /// Grid points in fixed order: `g` outermost, `t` innermost.
    pub fn grid(&self) -> Vec<ModelParams> {
        let mut out = Vec::new();
        for &g in &self.g.values() {
            for &v in &self.v.values() {
                for &hbar in &self.hbar.values() {
                    for &t in &self.t.values() {
                        out.push(ModelParams { n_model: self.model, g, v, hbar, t });
                    }
                }
            }
        }
        out
    }

    /// Every input that influences the output, in a fixed order.
    pub fn manifest(&self) -> Vec<(&'static str, String)> {
        let join = |xs: Vec<String>| xs.join(",");
        vec![
            ("tool", format!("ymqm {}", env!("CARGO_PKG_VERSION"))),
            ("command", self.command.name().to_string()),
            ("model", format!("n{}", self.model)),
            ("g", self.g.to_string()),
            ("v", self.v.to_string()),
            ("hbar", self.hbar.to_string()),
            ("t", self.t.to_string()),
            ("routes", join(self.routes.iter().map(|r| r.name().to_string()).collect())),
            ("k", join(self.ks.iter().map(|k| k.to_string()).collect())),
            ("kmax", self.kmax.to_string()),
            ("sum_mode", format!("{:?}", self.sum_mode).to_lowercase()),
            ("tol_quad", format!("{:?}", self.quad.rel_tol)),
            ("tol_conv", format!("{:?}", self.conv_tol)),
            ("tol_compare", format!("{:?}", self.compare_tol)),
            ("cutoff", self.cutoff.to_string()),
            ("levels", self.levels.to_string()),
            ("seed", "none".to_string()),
            ("float_format", "shortest round-trip".to_string()),
        ]
    }
}
