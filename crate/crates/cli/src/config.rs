//! Flag parsing, the key=value config file, and validation into a [`RunConfig`].
//!
//! Precedence is flag, then environment (threads only), then config file, then default.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use keylog_core::fock::GkpParams;
use keylog_core::phase_algebra::{ComplexAmplitude, PauliLetter};
use keylog_core::protocols::{Ancilla, Backend, CodewordSharing, ModeState, Variant};
use serde::Serialize;

use crate::CliError;

pub const THREADS_ENV: &str = "KEYLOG_SIM_THREADS";

pub const DEFAULT_DELTA: f64 = 0.25;
pub const DEFAULT_CUTOFF: usize = 150;

#[derive(Parser, Debug)]
#[command(name = "keylog-sim", version, about = "Batch runner for the GKP keystroke-logging simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub protocol: Protocol,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    /// Two-qubit superdense coding round trip
    Superdense,
    /// n-qubit phase estimation of diag(1, e^{-2iθ})
    QpeStandard,
    /// One-shot phase estimation of a displacement loop
    QpeOneshot,
    /// One-shot phase estimation with a cross-Kerr readout
    QpeCrosskerr,
    /// Recover a logical Pauli letter from its displacement
    Attack,
    /// Attack over a grid of letters, envelopes, cutoffs and register sizes
    Sweep,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Superdense => "superdense",
            Protocol::QpeStandard => "qpe-standard",
            Protocol::QpeOneshot => "qpe-oneshot",
            Protocol::QpeCrosskerr => "qpe-crosskerr",
            Protocol::Attack => "attack",
            Protocol::Sweep => "sweep",
        }
    }
}

/// Every flag is taken as text so that flags and config-file entries go
/// through the same parsers.
#[derive(Args, Debug, Default)]
pub struct Flags {
    /// key=value config file; flags override its entries
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Register size exponent
    #[arg(long, global = true)]
    pub n: Option<String>,
    /// Probe displacement as "re,im"
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub beta: Option<String>,
    /// Displacement under test as "re,im"
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Eigenphase in radians
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// Pauli letter: I, X, Y or Z
    #[arg(long, global = true)]
    pub letter: Option<String>,
    /// exact or fock
    #[arg(long, global = true)]
    pub backend: Option<String>,
    /// Mode state for the fock backend: gkp, vacuum or coherent
    #[arg(long, global = true)]
    pub state: Option<String>,
    /// Coherent amplitude as "re,im"
    #[arg(long = "state-alpha", global = true, allow_hyphen_values = true)]
    pub state_alpha: Option<String>,
    /// GKP codeword label, 0 or 1
    #[arg(long, global = true)]
    pub mu: Option<String>,
    /// GKP envelope width
    #[arg(long, global = true)]
    pub delta: Option<String>,
    /// Fock cutoff
    #[arg(long, global = true)]
    pub cutoff: Option<String>,
    /// Lattice sites kept on each side
    #[arg(long = "s-max", global = true)]
    pub s_max: Option<String>,
    /// Seed for a sampled measurement outcome
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Output file; stdout when absent
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// json or csv
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Two classical bits, e.g. 10
    #[arg(long, global = true)]
    pub bits: Option<String>,
    /// oneshot or crosskerr
    #[arg(long, global = true)]
    pub variant: Option<String>,
    /// independent or shared
    #[arg(long, global = true)]
    pub sharing: Option<String>,
    /// qudit, or mode:M for an oscillator truncated at M levels
    #[arg(long, global = true)]
    pub ancilla: Option<String>,
    /// Worker threads for sweeps
    #[arg(long, global = true)]
    pub threads: Option<String>,
    /// Sweep letters, comma separated
    #[arg(long, global = true)]
    pub letters: Option<String>,
    /// Sweep envelope widths, comma separated
    #[arg(long, global = true)]
    pub deltas: Option<String>,
    /// Sweep cutoffs, comma separated
    #[arg(long, global = true)]
    pub cutoffs: Option<String>,
    /// Sweep register sizes, comma separated
    #[arg(long = "n-values", global = true)]
    pub n_values: Option<String>,
}

impl Flags {
    fn entries(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("n", &self.n),
            ("beta", &self.beta),
            ("alpha", &self.alpha),
            ("theta", &self.theta),
            ("letter", &self.letter),
            ("backend", &self.backend),
            ("state", &self.state),
            ("state-alpha", &self.state_alpha),
            ("mu", &self.mu),
            ("delta", &self.delta),
            ("cutoff", &self.cutoff),
            ("s-max", &self.s_max),
            ("seed", &self.seed),
            ("format", &self.format),
            ("bits", &self.bits),
            ("variant", &self.variant),
            ("sharing", &self.sharing),
            ("ancilla", &self.ancilla),
            ("threads", &self.threads),
            ("letters", &self.letters),
            ("deltas", &self.deltas),
            ("cutoffs", &self.cutoffs),
            ("n-values", &self.n_values),
        ]
    }
}

const FILE_ONLY_KEYS: [&str; 1] = ["output"];

/// Parse `key = value` lines; `#` starts a comment, keys accept `_` for `-`.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let known: Vec<&str> = Flags::default().entries().iter().map(|(k, _)| *k).chain(FILE_ONLY_KEYS).collect();
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("line {} is not key=value", lineno + 1), raw.trim()))?;
        let key = key.trim().replace('_', "-");
        if !known.contains(&key.as_str()) {
            return Err(CliError::config(format!("unknown key '{key}' on line {}", lineno + 1), raw.trim()));
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

/// Fully resolved and validated run parameters. Everything that affects the
/// result is here; the output path and worker count are not.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub protocol: Protocol,
    pub n: u32,
    pub beta: ComplexAmplitude,
    pub alpha: ComplexAmplitude,
    pub theta: f64,
    pub letter: PauliLetter,
    pub backend: String,
    pub state: String,
    pub state_alpha: ComplexAmplitude,
    pub mu: u8,
    pub delta: f64,
    pub cutoff: usize,
    pub s_max: usize,
    pub seed: Option<u64>,
    pub format: Format,
    pub bits: String,
    pub variant: Variant,
    pub sharing: CodewordSharing,
    pub ancilla: Ancilla,
    pub letters: Vec<PauliLetter>,
    pub deltas: Vec<f64>,
    pub cutoffs: Vec<usize>,
    pub n_values: Vec<u32>,
    #[serde(skip)]
    pub output: Option<PathBuf>,
    #[serde(skip)]
    pub threads: Option<usize>,
}

struct Lookup<'a> {
    flags: BTreeMap<&'static str, &'a str>,
    file: BTreeMap<String, String>,
}

impl Lookup<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.flags.get(key).copied().or_else(|| self.file.get(key).map(String::as_str))
    }

    fn get<T>(&self, key: &str, default: T, parse: impl Fn(&str) -> Option<T>) -> Result<T, CliError> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => parse(v).ok_or_else(|| CliError::config(format!("invalid value for {key}"), v)),
        }
    }
}

fn parse_num<T: FromStr>(s: &str) -> Option<T> {
    s.trim().parse().ok()
}

fn parse_finite(s: &str) -> Option<f64> {
    parse_num::<f64>(s).filter(|x| x.is_finite())
}

pub fn parse_complex(s: &str) -> Option<ComplexAmplitude> {
    let (re, im) = s.split_once(',')?;
    ComplexAmplitude::new(parse_finite(re)?, parse_finite(im)?).ok()
}

fn parse_list<T>(s: &str, item: impl Fn(&str) -> Option<T>) -> Option<Vec<T>> {
    let v: Vec<T> = s.split(',').map(|x| item(x.trim())).collect::<Option<_>>()?;
    (!v.is_empty()).then_some(v)
}

fn parse_letter(s: &str) -> Option<PauliLetter> {
    s.trim().to_ascii_uppercase().parse().ok()
}

fn parse_ancilla(s: &str) -> Option<Ancilla> {
    match s.trim() {
        "qudit" => Some(Ancilla::Qudit),
        other => other.strip_prefix("mode:").and_then(parse_num).map(Ancilla::Mode),
    }
}

fn parse_n(s: &str) -> Option<u32> {
    parse_num::<u32>(s).filter(|n| (1..=16).contains(n))
}

impl RunConfig {
    pub fn resolve(protocol: Protocol, flags: &Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            None => BTreeMap::new(),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::config(format!("cannot read config file: {e}"), path.display()))?;
                parse_config_file(&text)?
            }
        };
        let mut set = BTreeMap::new();
        for (key, value) in flags.entries() {
            if let Some(v) = value {
                set.insert(key, v.as_str());
            }
        }
        let threads_env = std::env::var(THREADS_ENV).ok();
        if !set.contains_key("threads") {
            if let Some(v) = threads_env.as_deref() {
                set.insert("threads", v);
            }
        }
        let look = Lookup { flags: set, file };

        let h = keylog_core::phase_algebra::half_lattice();
        let n = look.get("n", 1, parse_n)?;
        let beta = look.get("beta", ComplexAmplitude::new(h, 0.0).expect("finite"), parse_complex)?;
        let alpha = look.get("alpha", ComplexAmplitude::ZERO, parse_complex)?;
        let theta = look.get("theta", 0.0, parse_finite)?;
        let letter = look.get("letter", PauliLetter::I, parse_letter)?;
        let backend = look.get("backend", "exact".to_string(), |s| {
            matches!(s, "exact" | "fock").then(|| s.to_string())
        })?;
        let state = look.get("state", "gkp".to_string(), |s| {
            matches!(s, "gkp" | "vacuum" | "coherent").then(|| s.to_string())
        })?;
        let state_alpha = look.get("state-alpha", ComplexAmplitude::new(0.5, 0.0).expect("finite"), parse_complex)?;
        let mu = look.get("mu", 0u8, |s| parse_num::<u8>(s).filter(|m| *m <= 1))?;
        let delta = look.get("delta", DEFAULT_DELTA, |s| parse_finite(s).filter(|d| *d > 0.0))?;
        let cutoff = look.get("cutoff", DEFAULT_CUTOFF, |s| parse_num::<usize>(s).filter(|c| *c >= 8))?;
        let s_max = look.get("s-max", GkpParams::minimal_s_max(delta), parse_num)?;
        let seed = look.get("seed", None, |s| parse_num::<u64>(s).map(Some))?;
        let format = look.get("format", Format::Json, |s| match s {
            "json" => Some(Format::Json),
            "csv" => Some(Format::Csv),
            _ => None,
        })?;
        let bits = look.get("bits", "00".to_string(), |s| {
            keylog_core::protocols::parse_bits(s).map(keylog_core::protocols::bits_to_string)
        })?;
        let variant = look.get("variant", Variant::OneShot, |s| match s {
            "oneshot" => Some(Variant::OneShot),
            "crosskerr" => Some(Variant::CrossKerr),
            _ => None,
        })?;
        let sharing = look.get("sharing", CodewordSharing::Independent, |s| match s {
            "independent" => Some(CodewordSharing::Independent),
            "shared" => Some(CodewordSharing::Shared),
            _ => None,
        })?;
        let ancilla = look.get("ancilla", Ancilla::Qudit, parse_ancilla)?;
        let threads = look.get("threads", None, |s| parse_num::<usize>(s).filter(|t| *t > 0).map(Some))?;
        let letters = look.get("letters", PauliLetter::ALL.to_vec(), |s| parse_list(s, parse_letter))?;
        let deltas = look.get("deltas", vec![delta], |s| parse_list(s, |x| parse_finite(x).filter(|d| *d > 0.0)))?;
        let cutoffs = look.get("cutoffs", vec![cutoff], |s| parse_list(s, |x| parse_num::<usize>(x).filter(|c| *c >= 8)))?;
        let n_values = look.get("n-values", vec![n], |s| parse_list(s, parse_n))?;
        let output = flags.output.clone().or_else(|| look.file.get("output").map(PathBuf::from));

        if protocol == Protocol::Superdense && look.raw("bits").is_none() {
            return Err(CliError::config("superdense needs --bits", ""));
        }
        if protocol == Protocol::QpeStandard && n > keylog_core::protocols::MAX_STANDARD_QUBITS {
            return Err(CliError::config(
                format!("qpe-standard supports n <= {}", keylog_core::protocols::MAX_STANDARD_QUBITS),
                n,
            ));
        }
        let config = RunConfig {
            protocol,
            n,
            beta,
            alpha,
            theta,
            letter,
            backend,
            state,
            state_alpha,
            mu,
            delta,
            cutoff,
            s_max,
            seed,
            format,
            bits,
            variant,
            sharing,
            ancilla,
            letters,
            deltas,
            cutoffs,
            n_values,
            output,
            threads,
        };
        if config.backend == "fock" && matches!(protocol, Protocol::QpeOneshot | Protocol::QpeCrosskerr | Protocol::Attack) {
            config.core_backend()?;
        }
        Ok(config)
    }

    /// Backend for the core library; GKP parameter problems are configuration errors.
    pub fn core_backend(&self) -> Result<Backend, CliError> {
        if self.backend == "exact" {
            return Ok(Backend::ExactAlgebra);
        }
        let mode = match self.state.as_str() {
            "vacuum" => ModeState::Vacuum { cutoff: self.cutoff },
            "coherent" => ModeState::Coherent { alpha: self.state_alpha, cutoff: self.cutoff },
            _ => ModeState::Gkp(
                GkpParams::new(self.mu, self.delta, self.cutoff)
                    .and_then(|p| p.with_s_max(self.s_max))
                    .map_err(|e| CliError::config(e.to_string(), format!("delta={} s_max={}", self.delta, self.s_max)))?,
            ),
        };
        Ok(Backend::Fock(mode))
    }
}
