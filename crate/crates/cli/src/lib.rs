//! `mlqe` command-line front end.
//!
//! Every subcommand is deterministic given its flags and input files; the
//! only sources of randomness are explicit `--seed` values.

pub mod legacy;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};

use mlqe::analysis::{self, CaseReport};
use mlqe::codec::{
    format_symbols, parse_symbols, symbols_to_text, text_to_symbols, Alphabet, Cipher, Container, SymbolStream,
};
use mlqe::db::{get_quasigroup, profile_fingerprint, NetworkProfile};
use mlqe::keying::{derive_hidden_key, generate_frame, HiddenKey, KeyFrame};
use mlqe::sim::Sim;

pub use legacy::{parse_legacy_key, LegacyKey, LegacyKeyError};

/// Header line written before legacy-mode output.
pub const LEGACY_NOTICE: &str =
    "# legacy key mode: output is implementation-specific (this tool derives its own quasigroup database)";

#[derive(Debug, Parser)]
#[command(name = "mlqe", version, about = "Multi-level indexed quasigroup encryptor")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a new network profile
    ProfileNew(ProfileNewArgs),
    /// Draw a key frame from a seed
    Keygen(KeygenArgs),
    /// Encrypt a text file
    Encrypt(CryptArgs),
    /// Decrypt a container (or text-mode symbols)
    Decrypt(CryptArgs),
    /// Autocorrelation / entropy report for a built-in case or a text file
    Analyze(AnalyzeArgs),
    /// Run the trusted-authority key-lifecycle simulation
    Simulate(SimulateArgs),
    /// Print an indexed quasigroup (and optionally its left inverse)
    QgDump(QgDumpArgs),
    /// Encrypt with an inline "r, s, i1, ..." key
    LegacyEncrypt(LegacyArgs),
}

#[derive(Debug, Args)]
pub struct ProfileNewArgs {
    /// Database seed shared by the whole network
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "default")]
    pub id: String,
    #[arg(long)]
    pub alphabet: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KeygenArgs {
    #[arg(long)]
    pub profile: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub issued_at: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CryptArgs {
    #[arg(long)]
    pub profile: PathBuf,
    /// Required for encryption and for text-mode decryption
    #[arg(long)]
    pub frame: Option<PathBuf>,
    /// Space-separated decimal symbols instead of a binary container
    #[arg(long)]
    pub text: bool,
    #[arg(long)]
    pub alphabet: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long, conflicts_with = "input")]
    pub case: Option<u32>,
    #[arg(long)]
    pub profile: Option<PathBuf>,
    #[arg(long, conflicts_with_all = ["key", "seed"])]
    pub frame: Option<PathBuf>,
    /// Inline "r, s, i1, ..." key instead of a frame
    #[arg(long, conflicts_with = "seed")]
    pub key: Option<String>,
    /// Nonce for --key
    #[arg(long, default_value_t = 0)]
    pub nonce: u64,
    /// Frame seed when neither --frame nor --key is given
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 20)]
    pub max_lag: usize,
    #[arg(long)]
    pub alphabet: Option<String>,
    /// CSV destination (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub profile: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub nodes: usize,
    /// Run length in units of T
    #[arg(long, default_value_t = 10)]
    pub duration: u64,
    /// Time between messages (default T1/4)
    #[arg(long)]
    pub step: Option<u64>,
    /// Re-key this long before expiry (default T1/2)
    #[arg(long, conflicts_with = "no_rekey")]
    pub rekey_margin: Option<u64>,
    #[arg(long)]
    pub no_rekey: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QgDumpArgs {
    #[arg(long)]
    pub profile: Option<PathBuf>,
    #[arg(long)]
    pub order: usize,
    #[arg(long)]
    pub index: u64,
    #[arg(long, default_value_t = 0)]
    pub nonce: u64,
    /// Also print the left-division table
    #[arg(long)]
    pub inverse: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LegacyArgs {
    #[arg(long)]
    pub key: String,
    #[arg(long, default_value_t = 0)]
    pub nonce: u64,
    #[arg(long)]
    pub profile: Option<PathBuf>,
    #[arg(long)]
    pub alphabet: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    pub input: PathBuf,
}

struct LoadedProfile {
    profile: NetworkProfile,
    fingerprint: u64,
}

fn load_profile(path: &Path) -> Result<LoadedProfile> {
    let bytes = fs::read(path).with_context(|| format!("reading profile {}", path.display()))?;
    let text = std::str::from_utf8(&bytes).context("profile is not UTF-8")?;
    let profile = NetworkProfile::from_json(text).with_context(|| format!("loading profile {}", path.display()))?;
    Ok(LoadedProfile {
        profile,
        fingerprint: profile_fingerprint(&bytes),
    })
}

fn profile_or_default(path: Option<&Path>) -> Result<NetworkProfile> {
    match path {
        Some(p) => Ok(load_profile(p)?.profile),
        None => Ok(NetworkProfile::default()),
    }
}

fn load_frame(path: &Path, profile: &NetworkProfile) -> Result<KeyFrame> {
    let text = fs::read_to_string(path).with_context(|| format!("reading frame {}", path.display()))?;
    let (frame, profile_id) = KeyFrame::from_json(&text)?;
    ensure!(
        profile_id == profile.profile_id,
        "frame belongs to profile {profile_id:?}, not {:?}",
        profile.profile_id
    );
    Ok(frame)
}

fn alphabet(flag: Option<&str>, fallback: &str) -> Result<Alphabet> {
    let id = flag.unwrap_or(fallback);
    Alphabet::by_id(id).with_context(|| format!("unknown alphabet {id:?} (expected latin27 or latin41)"))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: Option<&Path>, stdout: &mut dyn Write, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => stdout.write_all(bytes).context("writing output"),
    }
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::ProfileNew(a) => profile_new(a, stdout),
        Command::Keygen(a) => keygen(a, stdout),
        Command::Encrypt(a) => encrypt(a, stdout),
        Command::Decrypt(a) => decrypt(a, stdout),
        Command::Analyze(a) => analyze(a, stdout),
        Command::Simulate(a) => simulate(a, stdout),
        Command::QgDump(a) => qg_dump(a, stdout),
        Command::LegacyEncrypt(a) => legacy_encrypt(a, stdout),
    }
}

fn profile_new(a: ProfileNewArgs, stdout: &mut dyn Write) -> Result<()> {
    let mut profile = NetworkProfile {
        profile_id: a.id,
        ..NetworkProfile::default()
    };
    if let Some(seed) = a.seed {
        profile.db_seed = seed;
    }
    if let Some(id) = a.alphabet {
        profile.alphabet_id = id;
    }
    profile.validate()?;
    emit(a.out.as_deref(), stdout, profile.to_json().as_bytes())
}

fn keygen(a: KeygenArgs, stdout: &mut dyn Write) -> Result<()> {
    let profile = load_profile(&a.profile)?.profile;
    let frame = generate_frame(&profile, a.seed)?.issued(a.issued_at);
    emit(a.out.as_deref(), stdout, frame.to_json(&profile.profile_id).as_bytes())
}

fn encrypt(a: CryptArgs, stdout: &mut dyn Write) -> Result<()> {
    let loaded = load_profile(&a.profile)?;
    let profile = &loaded.profile;
    let frame_path = a.frame.as_deref().context("encrypt needs --frame")?;
    let frame = load_frame(frame_path, profile)?;
    let key = derive_hidden_key(profile, &frame)?;
    let alphabet = alphabet(a.alphabet.as_deref(), &profile.alphabet_id)?;
    let plain = text_to_symbols(&read_text(&a.input)?, &alphabet)?;
    let cipher = Cipher::new(profile, &frame, &key)?.encrypt(&plain)?;
    let bytes = if a.text {
        let mut line = format_symbols(cipher.symbols());
        line.push('\n');
        line.into_bytes()
    } else {
        Container::new(loaded.fingerprint, &frame, cipher.into_symbols()).to_bytes()?
    };
    emit(a.out.as_deref(), stdout, &bytes)
}

fn decrypt(a: CryptArgs, stdout: &mut dyn Write) -> Result<()> {
    let loaded = load_profile(&a.profile)?;
    let profile = &loaded.profile;
    let given = a.frame.as_deref().map(|p| load_frame(p, profile)).transpose()?;
    let raw = fs::read(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let (frame, symbols) = if a.text {
        let frame = given.context("text-mode decrypt needs --frame")?;
        let text = std::str::from_utf8(&raw).context("ciphertext is not UTF-8")?;
        (frame, parse_symbols(text)?)
    } else {
        let container = Container::from_bytes(&raw)?;
        ensure!(
            container.profile_fingerprint == loaded.fingerprint,
            "ciphertext was produced under a different profile file"
        );
        let frame = match given {
            Some(f) => {
                ensure!(container.matches(&f), "frame does not match the ciphertext header");
                f
            }
            None => container.frame(),
        };
        (frame, container.payload)
    };
    let key = derive_hidden_key(profile, &frame)?;
    // nominal order; the cipher checks every symbol against s itself
    let ciphertext = SymbolStream::new(u16::MAX, symbols)?;
    let plain = Cipher::new(profile, &frame, &key)?.decrypt(&ciphertext)?;
    let alphabet = alphabet(a.alphabet.as_deref(), &profile.alphabet_id)?;
    emit(a.out.as_deref(), stdout, symbols_to_text(&plain, &alphabet)?.as_bytes())
}

/// Key material for `analyze`: an explicit frame, an inline key, or a frame
/// drawn from `--seed` (default 1).
fn analysis_keys(a: &AnalyzeArgs) -> Result<(NetworkProfile, KeyFrame, HiddenKey)> {
    let profile = profile_or_default(a.profile.as_deref())?;
    if let Some(k) = &a.key {
        return Ok(parse_legacy_key(k)?.materialize(&profile, a.nonce));
    }
    let frame = match &a.frame {
        Some(p) => load_frame(p, &profile)?,
        None => generate_frame(&profile, a.seed.unwrap_or(1))?,
    };
    let key = derive_hidden_key(&profile, &frame)?;
    Ok((profile, frame, key))
}

fn analyze(a: AnalyzeArgs, stdout: &mut dyn Write) -> Result<()> {
    let (profile, frame, key) = analysis_keys(&a)?;
    let cipher = Cipher::new(&profile, &frame, &key)?;
    let report: CaseReport = match (a.case, &a.input) {
        (Some(id), _) => {
            let text = analysis::case_input(id)?;
            let alphabet = alphabet(a.alphabet.as_deref(), analysis::case_alphabet().id())?;
            analysis::analyze_text(id, &text, &alphabet, &cipher, a.max_lag)?
        }
        (None, Some(path)) => {
            let alphabet = alphabet(a.alphabet.as_deref(), &profile.alphabet_id)?;
            analysis::analyze_text(0, &read_text(path)?, &alphabet, &cipher, a.max_lag)?
        }
        (None, None) => bail!("analyze needs --case N or an input file"),
    };
    eprintln!("{}", report.summary());
    emit(a.out.as_deref(), stdout, report.to_csv().as_bytes())
}

fn simulate(a: SimulateArgs, stdout: &mut dyn Write) -> Result<()> {
    let profile = profile_or_default(a.profile.as_deref())?;
    let duration = a.duration.checked_mul(profile.t_max).context("duration overflows")?;
    let step = a.step.unwrap_or((profile.t_min / 4).max(1));
    ensure!(step > 0, "--step must be positive");
    let mut sim = Sim::new(profile, a.nodes, a.seed)?;
    if a.no_rekey {
        sim.set_rekey_margin(None)?;
    } else if let Some(m) = a.rekey_margin {
        sim.set_rekey_margin(Some(m))?;
    }
    sim.run_traffic(duration, step)?;
    emit(a.out.as_deref(), stdout, sim.log_text().as_bytes())
}

fn qg_dump(a: QgDumpArgs, stdout: &mut dyn Write) -> Result<()> {
    let profile = profile_or_default(a.profile.as_deref())?;
    let square = get_quasigroup(&profile, a.order, a.index, a.nonce)?;
    let mut text = square.dump();
    if a.inverse {
        text.push('\n');
        text.push_str(&square.left_inverse().dump());
    }
    emit(a.out.as_deref(), stdout, text.as_bytes())
}

fn legacy_encrypt(a: LegacyArgs, stdout: &mut dyn Write) -> Result<()> {
    let base = profile_or_default(a.profile.as_deref())?;
    let legacy = parse_legacy_key(&a.key)?;
    let (profile, frame, key) = legacy.materialize(&base, a.nonce);
    let alphabet = alphabet(a.alphabet.as_deref(), &profile.alphabet_id)?;
    let plain = text_to_symbols(&read_text(&a.input)?, &alphabet)?;
    let cipher = Cipher::new(&profile, &frame, &key)?.encrypt(&plain)?;
    let text = format!(
        "{LEGACY_NOTICE}\n# key: {}, {}, {} nonce: {}\n{}\n",
        legacy.r,
        legacy.s,
        format_symbols(&legacy.indices).replace(' ', ", "),
        a.nonce,
        format_symbols(cipher.symbols())
    );
    emit(a.out.as_deref(), stdout, text.as_bytes())
}
