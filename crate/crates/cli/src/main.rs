use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use szego_core::coulomb::{exact_dn, mc_dn, CoulombEstimate};
use szego_core::report::{fmt_f64, to_json, CSV_SCHEMA};
use szego_core::verify::{self, Family};
use szego_core::{Error, LaurentSymbol, MomentSequence, QuadratureConfig};

/// Environment variable capping the quadrature grid size.
const GRID_MAX_ENV: &str = "SZEGO_LAB_GRID_MAX";

#[derive(Parser)]
#[command(name = "szego-lab", version, about = "Toeplitz determinants, OPUC and the strong Szegő limit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Moments c_0..c_nmax of e^L dθ/2π.
    Moments {
        #[command(flatten)]
        symbol: SymbolArgs,
        #[arg(long, default_value_t = verify::DEFAULT_NMAX)]
        nmax: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Strong Szegő convergence report and invariant suites.
    Verify {
        #[command(flatten)]
        symbol: SymbolArgs,
        /// Moment CSV to check instead of a symbol.
        #[arg(long, conflicts_with_all = ["symbol", "coeff"])]
        moments: Option<PathBuf>,
        #[arg(long, default_value_t = verify::DEFAULT_NMAX)]
        nmax: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// D_n from the Coulomb gas integral.
    Coulomb {
        #[command(flatten)]
        symbol: SymbolArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        workers: usize,
        /// Tensor-grid quadrature instead of Monte Carlo (n ≤ 2).
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Christoffel–Darboux identities per degree.
    CdCheck {
        #[command(flatten)]
        symbol: SymbolArgs,
        #[arg(long, default_value_t = 20)]
        nmax: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Bernstein–Szegő approximant dθ/(2π|φ_N|²).
    BsCheck {
        #[command(flatten)]
        symbol: SymbolArgs,
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Feynman–Hellman derivative of log ‖Φ_n‖² along w_t.
    FhCheck {
        #[command(flatten)]
        symbol: SymbolArgs,
        #[arg(long, default_value_t = 0)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        t: f64,
        #[arg(long, default_value_t = verify::FH_DEFAULT_H)]
        h: f64,
        #[arg(long, value_enum, default_value_t = FamilyArg::Normalized)]
        family: FamilyArg,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args)]
struct SymbolArgs {
    /// Symbol file with `k re im` lines.
    #[arg(long, conflicts_with = "coeff")]
    symbol: Option<PathBuf>,
    /// Inline coefficient `k=re[,im]`; repeatable. A missing `-k` is taken as the conjugate.
    #[arg(long, value_name = "K=RE[,IM]")]
    coeff: Vec<String>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Normalized,
    Unnormalized,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Normalized => Family::Normalized,
            FamilyArg::Unnormalized => Family::Unnormalized,
        }
    }
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } | Error::NonReal { .. } | Error::InvalidMoments(_) => 2,
            Error::QuadratureNonConvergence { .. } => 3,
            Error::OutOfRange { .. } | Error::OrderTooSmall { .. } => 4,
            _ => 1,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn input_error(msg: String) -> Failure {
    Failure { code: 2, msg }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: u32,
    command: &'static str,
    symbol: Option<String>,
    grid_max: usize,
    result: &'a T,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let cfg = quadrature_config()?;
    match cli.command {
        Command::Moments { symbol, nmax, out } => {
            let s = load_symbol(&symbol)?;
            let m = s.moments_with(nmax, &cfg)?;
            let text = match out.format {
                Format::Csv => embed_symbol(m.to_csv(), &s),
                Format::Json => envelope("moments", Some(&s), &cfg, &MomentsJson::from(&m)),
            };
            emit(&out, &text)?;
            Ok(0)
        }
        Command::Verify {
            symbol,
            moments,
            nmax,
            out,
        } => {
            let (s, m) = match moments {
                Some(path) => (None, MomentSequence::parse_csv(&read(&path)?)?),
                None => {
                    let s = load_symbol(&symbol)?;
                    let m = s.moments_with(nmax + verify::G_EXTRA, &cfg)?;
                    (Some(s), m)
                }
            };
            let report = verify::run_checks(s.as_ref(), &m, nmax, &cfg);
            let text = match out.format {
                Format::Csv => report.to_csv(),
                Format::Json => to_json(&report),
            };
            emit(&out, &text)?;
            for c in &report.checks {
                eprintln!("{}", c.line());
            }
            match report.first_failure() {
                Some(c) => {
                    eprintln!("first failing check: {}", c.name);
                    Ok(1)
                }
                None => Ok(0),
            }
        }
        Command::Coulomb {
            symbol,
            n,
            samples,
            seed,
            workers,
            exact,
            out,
        } => {
            let s = load_symbol(&symbol)?;
            let est = if exact {
                exact_dn(&s, n)?
            } else {
                mc_dn(&s, n, samples, seed, workers)?
            };
            let text = match out.format {
                Format::Csv => embed_symbol(coulomb_csv(&est), &s),
                Format::Json => envelope("coulomb", Some(&s), &cfg, &est),
            };
            emit(&out, &text)?;
            Ok(0)
        }
        Command::CdCheck { symbol, nmax, out } => {
            let s = load_symbol(&symbol)?;
            let m = s.moments_with(nmax + 1, &cfg)?;
            let rows = verify::cd_rows(&m, nmax)?;
            let text = match out.format {
                Format::Csv => {
                    let mut t = format!("{CSV_SCHEMA}\n# pairs={} seed={}\nn,closed_form_spread,diagonal_dev,normalization\n", verify::CD_PAIRS, verify::CD_SEED);
                    for r in &rows {
                        let _ = writeln!(
                            t,
                            "{},{},{},{}",
                            r.n,
                            fmt_f64(r.closed_form_spread),
                            fmt_f64(r.diagonal_dev),
                            fmt_f64(r.normalization)
                        );
                    }
                    embed_symbol(t, &s)
                }
                Format::Json => envelope("cd-check", Some(&s), &cfg, &rows),
            };
            emit(&out, &text)?;
            Ok(0)
        }
        Command::BsCheck { symbol, n, out } => {
            let s = load_symbol(&symbol)?;
            let m = s.moments_with(n + verify::BS_EXTRA, &cfg)?;
            let b = verify::bs_approximation(&m, n, &cfg)?;
            let text = match out.format {
                Format::Csv => {
                    let mut t = format!(
                        "{CSV_SCHEMA}\n# N={} grid_points={} mass={} moment_dev={} alpha_dev={} alpha_tail={}\nj,c_re,c_im,alpha_re,alpha_im\n",
                        b.n_bs,
                        b.grid_points,
                        fmt_f64(b.mass),
                        fmt_f64(b.moment_dev),
                        fmt_f64(b.alpha_dev),
                        fmt_f64(b.alpha_tail)
                    );
                    for (j, a) in b.alphas.iter().enumerate() {
                        let c = b.moments[j];
                        let _ = writeln!(t, "{j},{},{},{},{}", fmt_f64(c.re), fmt_f64(c.im), fmt_f64(a.re), fmt_f64(a.im));
                    }
                    embed_symbol(t, &s)
                }
                Format::Json => envelope("bs-check", Some(&s), &cfg, &b),
            };
            emit(&out, &text)?;
            Ok(if b.passes(verify::BS_TOL) { 0 } else { 1 })
        }
        Command::FhCheck {
            symbol,
            n,
            t,
            h,
            family,
            out,
        } => {
            let s = load_symbol(&symbol)?;
            let r = verify::feynman_hellman_check(&s, n, t, h, family.into(), &cfg)?;
            let text = match out.format {
                Format::Csv => {
                    let fam = match r.family {
                        Family::Normalized => "normalized",
                        Family::Unnormalized => "unnormalized",
                    };
                    let row = [r.t, r.h, r.analytic, r.finite_diff, r.finite_diff_half, r.gap, r.gap_half, r.ratio]
                        .iter()
                        .map(|&x| fmt_f64(x))
                        .collect::<Vec<_>>()
                        .join(",");
                    embed_symbol(
                        format!(
                            "{CSV_SCHEMA}\nn,family,t,h,analytic,finite_diff,finite_diff_half,gap,gap_half,ratio\n{},{fam},{row}\n",
                            r.n
                        ),
                        &s,
                    )
                }
                Format::Json => envelope("fh-check", Some(&s), &cfg, &r),
            };
            emit(&out, &text)?;
            Ok(0)
        }
    }
}

fn quadrature_config() -> Result<QuadratureConfig, Failure> {
    let cfg = QuadratureConfig::default();
    match std::env::var(GRID_MAX_ENV) {
        Ok(v) => {
            let cap: usize = v
                .trim()
                .parse()
                .map_err(|_| input_error(format!("{GRID_MAX_ENV} must be a positive integer, got `{v}`")))?;
            if cap == 0 {
                return Err(input_error(format!("{GRID_MAX_ENV} must be positive")));
            }
            Ok(cfg.with_max_points(cap))
        }
        Err(_) => Ok(cfg),
    }
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input_error(format!("cannot read {}: {e}", path.display())))
}

fn load_symbol(args: &SymbolArgs) -> Result<LaurentSymbol, Failure> {
    if let Some(path) = &args.symbol {
        return Ok(LaurentSymbol::parse(&read(path)?)?);
    }
    let mut map = BTreeMap::new();
    for spec in &args.coeff {
        let (k, v) = parse_coeff(spec).map_err(|msg| input_error(format!("--coeff {spec}: {msg}")))?;
        if map.insert(k, v).is_some() {
            return Err(input_error(format!("--coeff {spec}: index {k} given twice")));
        }
    }
    Ok(LaurentSymbol::new(&map)?)
}

/// `k=re[,im]`.
fn parse_coeff(spec: &str) -> Result<(i64, Complex64), String> {
    let (k, v) = spec.split_once('=').ok_or("expected K=RE[,IM]")?;
    let k: i64 = k.trim().parse().map_err(|_| format!("invalid index `{k}`"))?;
    let mut parts = v.split(',');
    let re: f64 = parts
        .next()
        .unwrap_or("")
        .trim()
        .parse()
        .map_err(|_| format!("invalid real part in `{v}`"))?;
    let im: f64 = match parts.next() {
        Some(p) => p.trim().parse().map_err(|_| format!("invalid imaginary part in `{v}`"))?,
        None => 0.0,
    };
    if parts.next().is_some() {
        return Err("too many components".into());
    }
    if !re.is_finite() || !im.is_finite() {
        return Err("coefficients must be finite".into());
    }
    Ok((k, Complex64::new(re, im)))
}

fn emit(out: &OutputArgs, text: &str) -> Result<(), Failure> {
    match &out.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure {
            code: 1,
            msg: format!("cannot write {}: {e}", path.display()),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn envelope<T: Serialize>(command: &'static str, s: Option<&LaurentSymbol>, cfg: &QuadratureConfig, result: &T) -> String {
    to_json(&Envelope {
        schema: 1,
        command,
        symbol: s.map(|s| s.to_text()),
        grid_max: cfg.max_points,
        result,
    })
}

/// Inserts the symbol as `# symbol:` comment lines after the schema line.
fn embed_symbol(csv: String, s: &LaurentSymbol) -> String {
    let (head, rest) = csv.split_once('\n').unwrap_or((&csv, ""));
    let mut out = format!("{head}\n");
    for line in s.to_text().lines().filter(|l| !l.starts_with('#')) {
        let _ = writeln!(out, "# symbol: {line}");
    }
    out.push_str(rest);
    out
}

fn coulomb_csv(e: &CoulombEstimate) -> String {
    let method = match e.method {
        szego_core::coulomb::Method::ExactQuadrature => "exact-quadrature",
        szego_core::coulomb::Method::MonteCarlo => "monte-carlo",
    };
    format!(
        "{CSV_SCHEMA}\nn,value,std_err,samples,method,seed\n{},{},{},{},{method},{}\n",
        e.n,
        fmt_f64(e.value),
        fmt_f64(e.std_err),
        e.samples,
        e.seed.map_or(String::new(), |s| s.to_string())
    )
}

#[derive(Serialize)]
struct MomentRow {
    n: usize,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct MomentsJson {
    grid_points: Option<usize>,
    moments: Vec<MomentRow>,
}

impl From<&MomentSequence> for MomentsJson {
    fn from(m: &MomentSequence) -> Self {
        MomentsJson {
            grid_points: m.quadrature_points(),
            moments: m
                .nonnegative()
                .iter()
                .enumerate()
                .map(|(n, c)| MomentRow { n, re: c.re, im: c.im })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coeff_syntax() {
        assert_eq!(parse_coeff("1=0.5").unwrap(), (1, Complex64::new(0.5, 0.0)));
        assert_eq!(parse_coeff("-2=0.1,-0.3").unwrap(), (-2, Complex64::new(0.1, -0.3)));
        assert!(parse_coeff("1").is_err());
        assert!(parse_coeff("x=1").is_err());
        assert!(parse_coeff("1=1,2,3").is_err());
        assert!(parse_coeff("1=nan").is_err());
    }

    #[test]
    fn symbol_lines_are_embedded_after_schema() {
        let s = LaurentSymbol::from_real(&[0.0, 0.5]);
        let csv = embed_symbol("# schema=1\nn,re,im\n".into(), &s);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("# schema=1"));
        assert!(lines.next().unwrap().starts_with("# symbol: "));
    }
}
