use std::fmt::Display;
use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use shiftcharge::grws::default_epsilon;
use shiftcharge::rational::serde_vec_str;
use shiftcharge::{
    asymptotic_k_det_sign, certify_determinant_signs, che_charge_from_sigma, classify_sector,
    completely_alternating_check, cpd_like_representation, delta_measure_of_charge, dominance_threshold,
    expected_sign_pattern, find_cpd_weight_multipliers, grws_charge, grws_charge_at_depth, grws_moments,
    integrability_test, k_hyponormality_test, levy_khinchin_of_charge, parse_rational, sweep, weights_from_moments,
    Charge, CpdLikeRepresentation, CpdStatus, DeltaMeasure, DeterminantSignCertificate, DominanceBound, GridRange,
    GrwsParams, HankelReport, Integrability, LevyKhinchinData, MomentSeq, Rational, Sector, Sign, SignTemplate,
    SweepSpec, Verdict,
};

/// Exact analysis of weighted shifts through signed atomic representing measures.
#[derive(Parser)]
#[command(name = "shiftcharge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sector, special line and expected density signs of a GRWS point.
    Classify {
        #[command(flatten)]
        grws: GrwsArgs,
        #[arg(long)]
        json: bool,
    },
    /// Horizon-qualified k-hyponormality scan, with all-n determinant
    /// certificates when the input is a charge.
    Khyp {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 16)]
        m_range: usize,
    },
    /// CSV grid over the (N, D) square.
    Sweep {
        #[arg(long, value_parser = rational_arg, allow_hyphen_values = true)]
        p: Rational,
        /// lo:hi:steps
        #[arg(long = "N-range", value_parser = range_arg, allow_hyphen_values = true)]
        n_range: GridRange,
        /// lo:hi:steps
        #[arg(long = "D-range", value_parser = range_arg, allow_hyphen_values = true)]
        d_range: GridRange,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        #[arg(long, default_value_t = 3)]
        khyp_max: usize,
        #[arg(long, default_value_t = 16)]
        m_range: usize,
        #[arg(long, value_parser = rational_arg)]
        epsilon: Option<Rational>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Normalized GRWS representing charge with its tail bound.
    Charge {
        #[command(flatten)]
        grws: GrwsArgs,
        #[arg(long, value_parser = rational_arg, conflicts_with = "depth")]
        epsilon: Option<Rational>,
        /// Fixed truncation depth instead of an epsilon target.
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Moments (and optionally weights) of a charge or a GRWS point.
    Moments {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 16)]
        count: usize,
        #[arg(long)]
        weights: bool,
    },
    /// Convolution of two charges.
    Convolve { a: PathBuf, b: PathBuf },
    /// Multipliers k making the Δ²-transformed weights CPD.
    CpdMult {
        #[command(flatten)]
        source: Source,
        /// Truncation depth for GRWS input.
        #[arg(long, default_value_t = 12)]
        depth: usize,
    },
    /// Build Cδ₁ − σ from a positive measure σ on [0, 1).
    CheBuild {
        #[arg(long)]
        sigma: PathBuf,
    },
    /// Complete alternation, Lévy-Khinchin data and Δ-measure of a charge.
    CheCheck {
        #[arg(long)]
        charge: PathBuf,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long, default_value_t = 16)]
        horizon: usize,
        /// Drift b for the CPD-like representation.
        #[arg(long, value_parser = rational_arg, allow_hyphen_values = true)]
        drift: Option<Rational>,
    },
    /// Eventual sign of det M_n^k and the index where it takes over.
    AsympSign {
        #[arg(long)]
        charge: PathBuf,
        #[arg(long)]
        k: usize,
        /// Also compute exact signs below the threshold.
        #[arg(long)]
        certify: bool,
    },
}

#[derive(Args)]
struct GrwsArgs {
    #[arg(long, value_parser = rational_arg, allow_hyphen_values = true)]
    p: Rational,
    #[arg(long = "N", value_parser = rational_arg, allow_hyphen_values = true)]
    n: Rational,
    #[arg(long = "D", value_parser = rational_arg, allow_hyphen_values = true)]
    d: Rational,
}

impl GrwsArgs {
    fn params(&self) -> Result<GrwsParams, String> {
        GrwsParams::new(self.p.clone(), self.n.clone(), self.d.clone()).map_err(|e| e.to_string())
    }
}

/// Either a charge file (`-` for stdin) or a GRWS point.
#[derive(Args)]
struct Source {
    #[arg(long, conflicts_with_all = ["p", "n", "d"], required_unless_present = "p")]
    charge: Option<PathBuf>,
    #[arg(long, value_parser = rational_arg, allow_hyphen_values = true, requires_all = ["n", "d"])]
    p: Option<Rational>,
    #[arg(long = "N", id = "n", value_parser = rational_arg, allow_hyphen_values = true)]
    n: Option<Rational>,
    #[arg(long = "D", id = "d", value_parser = rational_arg, allow_hyphen_values = true)]
    d: Option<Rational>,
}

enum Input {
    Charge(Charge),
    Grws(GrwsParams),
}

impl Source {
    fn load(&self) -> Result<Input, String> {
        match (&self.charge, &self.p, &self.n, &self.d) {
            (Some(path), ..) => read_charge(path).map(Input::Charge),
            (None, Some(p), Some(n), Some(d)) => GrwsParams::new(p.clone(), n.clone(), d.clone())
                .map(Input::Grws)
                .map_err(|e| e.to_string()),
            _ => Err("give --charge or all of --p, --N, --D".into()),
        }
    }
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn range_arg(s: &str) -> Result<GridRange, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, steps] = parts[..] else {
        return Err(format!("expected lo:hi:steps, got {s:?}"));
    };
    Ok(GridRange {
        lo: rational_arg(lo)?,
        hi: rational_arg(hi)?,
        steps: steps.parse().map_err(|e| format!("steps {steps:?}: {e}"))?,
    })
}

fn read_charge(path: &PathBuf) -> Result<Charge, String> {
    let text = if path.as_os_str() == "-" {
        let mut buf = String::new();
        io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| format!("stdin: {e}"))?;
        buf
    } else {
        fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?
    };
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit<T: Serialize>(value: &T) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    quiet_pipe(writeln!(io::stdout().lock(), "{text}"))
}

/// A closed downstream pipe (`| head`) is not an error.
fn quiet_pipe(r: io::Result<()>) -> Result<(), String> {
    match r {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.to_string()),
        _ => Ok(()),
    }
}

/// Serializes as the value, or as `{"error": ...}`.
#[derive(Serialize)]
#[serde(untagged)]
enum Fallible<T> {
    Value(T),
    Error { error: String },
}

impl<T, E: Display> From<Result<T, E>> for Fallible<T> {
    fn from(r: Result<T, E>) -> Self {
        match r {
            Ok(v) => Fallible::Value(v),
            Err(e) => Fallible::Error { error: e.to_string() },
        }
    }
}

#[derive(PartialEq, Eq)]
enum Outcome {
    Positive,
    Negative,
}

fn verdict(ok: bool) -> Outcome {
    if ok {
        Outcome::Positive
    } else {
        Outcome::Negative
    }
}

fn template_prefix(template: &SignTemplate) -> Option<String> {
    template.expand(8).map(|p| format!("{p},..."))
}

#[derive(Serialize)]
struct ClassifyReport {
    params: GrwsParams,
    sector: Sector,
    label: String,
    expected_pattern: SignTemplate,
    expected_prefix: Option<String>,
}

fn classify(grws: &GrwsArgs, json: bool) -> Result<Outcome, String> {
    let params = grws.params()?;
    let sector = classify_sector(&params);
    let template = expected_sign_pattern(&sector);
    let report = ClassifyReport {
        label: sector.to_string(),
        expected_prefix: template_prefix(&template),
        params,
        sector,
        expected_pattern: template,
    };
    if json {
        emit(&report)?;
    } else {
        let line = report.sector.special_line.map_or("none".to_string(), |j| j.to_string());
        let text = format!(
            "sector: {}\nspecial_line: {line}\nexpected_pattern: {}",
            report.label,
            report.expected_prefix.as_deref().unwrap_or("unknown")
        );
        quiet_pipe(writeln!(io::stdout().lock(), "{text}"))?;
    }
    Ok(Outcome::Positive)
}

#[derive(Serialize)]
struct FirstNegative {
    size: usize,
    n: usize,
}

/// Leading-minor certificates for sizes `1..=k+1`. By Sylvester's criterion
/// all of them positive at every `n` means positive definite at every `n`;
/// one negative value rules out PSD at that `n`.
#[derive(Serialize)]
struct CombinedCertificate {
    levels: Vec<Fallible<DeterminantSignCertificate>>,
    n_star: Option<usize>,
    scan_covers_n_star: bool,
    conclusion: &'static str,
    first_negative: Option<FirstNegative>,
}

fn combined_certificate(c: &Charge, k: usize, m_range: usize) -> CombinedCertificate {
    let levels: Vec<_> = (1..=k + 1).map(|size| certify_determinant_signs(c, size)).collect();
    let certs: Vec<&DeterminantSignCertificate> = levels.iter().filter_map(|l| l.as_ref().ok()).collect();
    let first_negative = certs
        .iter()
        .filter_map(|cert| {
            let n = match cert.initial_signs.iter().position(|s| *s == Sign::Minus) {
                Some(n) => n,
                None if cert.asymptotic_sign == Sign::Minus => cert.n_star,
                None => return None,
            };
            Some(FirstNegative { size: cert.k, n })
        })
        .min_by_key(|f| (f.n, f.size));
    let complete = certs.len() == levels.len();
    let n_star = complete.then(|| certs.iter().map(|c| c.n_star).max().unwrap_or(0));
    let conclusion = if first_negative.is_some() {
        "not_k_hyponormal"
    } else if complete && certs.iter().all(|c| c.all_positive()) {
        "k_hyponormal_all_n"
    } else {
        "horizon_only"
    };
    CombinedCertificate {
        levels: levels.into_iter().map(Fallible::from).collect(),
        scan_covers_n_star: n_star.is_some_and(|n| m_range + 1 >= n),
        n_star,
        conclusion,
        first_negative,
    }
}

#[derive(Serialize)]
struct KhypOutput {
    source: &'static str,
    report: HankelReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<CombinedCertificate>,
}

fn khyp(source: &Source, k: usize, m_range: usize) -> Result<Outcome, String> {
    let (name, moments, charge) = match source.load()? {
        Input::Charge(c) => ("charge", MomentSeq::from_charge(&c), Some(c)),
        Input::Grws(params) => ("grws", grws_moments(&params), None),
    };
    let report = k_hyponormality_test(&moments, k, m_range).map_err(|e| e.to_string())?;
    let certificate = charge
        .filter(|c| !c.is_truncated())
        .map(|c| combined_certificate(&c, k, m_range));
    let ok = report.passed() && certificate.as_ref().is_none_or(|c| c.first_negative.is_none());
    emit(&KhypOutput {
        source: name,
        report,
        certificate,
    })?;
    Ok(verdict(ok))
}

fn threads_from_env() -> Result<Option<usize>, String> {
    match std::env::var("SHIFTCHARGE_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("SHIFTCHARGE_THREADS must be a positive integer, got {v:?}")),
        },
        Err(_) => Ok(None),
    }
}

fn run_sweep(spec: SweepSpec, out: Option<&PathBuf>) -> Result<Outcome, String> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads_from_env()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| e.to_string())?;
    let rows = pool.install(|| sweep(&spec)).map_err(|e| e.to_string())?;
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(fs::File::create(path).map_err(|e| format!("{}: {e}", path.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut writer = csv::Writer::from_writer(sink);
    for row in &rows {
        if let Err(e) = writer.serialize(row) {
            return match e.into_kind() {
                csv::ErrorKind::Io(io) => quiet_pipe(Err(io)).map(|()| Outcome::Positive),
                kind => Err(format!("{kind:?}")),
            };
        }
    }
    quiet_pipe(writer.flush())?;
    Ok(Outcome::Positive)
}

fn charge_cmd(grws: &GrwsArgs, epsilon: Option<&Rational>, depth: Option<usize>) -> Result<Outcome, String> {
    let params = grws.params()?;
    let gc = match depth {
        Some(depth) => grws_charge_at_depth(&params, depth),
        None => grws_charge(&params, epsilon.unwrap_or(&default_epsilon())),
    }
    .map_err(|e| e.to_string())?;
    emit(&gc)?;
    Ok(Outcome::Positive)
}

#[derive(Serialize)]
struct MomentsOutput {
    #[serde(with = "serde_vec_str")]
    moments: Vec<Rational>,
    #[serde(with = "serde_vec_str", skip_serializing_if = "Vec::is_empty")]
    error_bounds: Vec<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights_sq: Option<Fallible<Squares>>,
}

#[derive(Serialize)]
#[serde(transparent)]
struct Squares(#[serde(with = "serde_vec_str")] Vec<Rational>);

fn moments_cmd(source: &Source, count: usize, weights: bool) -> Result<Outcome, String> {
    let (seq, error_bounds) = match source.load()? {
        Input::Charge(c) => {
            let bounds = if c.is_truncated() {
                (0..count).filter_map(|n| c.moment_error_bound(n)).collect()
            } else {
                Vec::new()
            };
            (MomentSeq::from_charge(&c), bounds)
        }
        Input::Grws(params) => (grws_moments(&params), Vec::new()),
    };
    let moments = seq.prefix(count).map_err(|e| e.to_string())?;
    let weights_sq = weights.then(|| {
        weights_from_moments(&seq, count)
            .and_then(|w| w.squares(count))
            .map(Squares)
            .into()
    });
    emit(&MomentsOutput {
        moments,
        error_bounds,
        weights_sq,
    })?;
    Ok(Outcome::Positive)
}

fn convolve(a: &PathBuf, b: &PathBuf) -> Result<Outcome, String> {
    emit(&read_charge(a)?.convolve(&read_charge(b)?))?;
    Ok(Outcome::Positive)
}

fn cpd_mult(source: &Source, depth: usize) -> Result<Outcome, String> {
    let charge = match source.load()? {
        Input::Charge(c) => c,
        Input::Grws(params) => grws_charge_at_depth(&params, depth)
            .map_err(|e| e.to_string())?
            .charge()
            .clone(),
    };
    let v = find_cpd_weight_multipliers(&charge).map_err(|e| e.to_string())?;
    emit(&v)?;
    Ok(verdict(v.status != CpdStatus::NoMultiplier))
}

#[derive(Serialize)]
struct CheBuildOutput {
    charge: Charge,
    levy_khinchin: LevyKhinchinData,
    delta_measure: DeltaMeasure,
    integrability: Integrability,
}

fn che_build(sigma: &PathBuf) -> Result<Outcome, String> {
    let charge = che_charge_from_sigma(&read_charge(sigma)?).map_err(|e| e.to_string())?;
    let lk = levy_khinchin_of_charge(&charge).map_err(|e| e.to_string())?;
    let dm = delta_measure_of_charge(&charge).map_err(|e| e.to_string())?;
    let integrability = integrability_test(&dm);
    emit(&CheBuildOutput {
        charge,
        levy_khinchin: lk,
        delta_measure: dm,
        integrability,
    })?;
    Ok(Outcome::Positive)
}

#[derive(Serialize)]
struct CheCheckOutput {
    completely_alternating: Verdict,
    weights_exist: bool,
    levy_khinchin: Fallible<LevyKhinchinData>,
    delta_measure: Fallible<DeltaMeasure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    integrability: Option<Integrability>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cpd_like: Option<Fallible<CpdLikeRepresentation>>,
}

fn che_check(path: &PathBuf, depth: usize, horizon: usize, drift: Option<&Rational>) -> Result<Outcome, String> {
    let charge = read_charge(path)?;
    let moments = MomentSeq::from_charge(&charge);
    let ca = completely_alternating_check(&moments, depth, horizon).map_err(|e| e.to_string())?;
    let dm = delta_measure_of_charge(&charge);
    let integrability = dm.as_ref().ok().map(integrability_test);
    let cpd_like = match (&dm, drift) {
        (Ok(dm), Some(b)) => Some(cpd_like_representation(dm, b).into()),
        _ => None,
    };
    let ok = ca.is_pass();
    emit(&CheCheckOutput {
        completely_alternating: ca,
        weights_exist: weights_from_moments(&moments, horizon).is_ok(),
        levy_khinchin: levy_khinchin_of_charge(&charge).into(),
        delta_measure: dm.into(),
        integrability,
        cpd_like,
    })?;
    Ok(verdict(ok))
}

#[derive(Serialize)]
struct AsympOutput {
    k: usize,
    asymptotic_sign: Sign,
    dominance: Fallible<DominanceBound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<Fallible<DeterminantSignCertificate>>,
}

fn asymp_sign(path: &PathBuf, k: usize, certify: bool) -> Result<Outcome, String> {
    let charge = read_charge(path)?;
    let asymptotic_sign = asymptotic_k_det_sign(&charge, k).map_err(|e| e.to_string())?;
    emit(&AsympOutput {
        k,
        asymptotic_sign,
        dominance: dominance_threshold(&charge, k).into(),
        certificate: certify.then(|| certify_determinant_signs(&charge, k).into()),
    })?;
    Ok(Outcome::Positive)
}

fn run(cli: Cli) -> Result<Outcome, String> {
    match cli.command {
        Command::Classify { grws, json } => classify(&grws, json),
        Command::Khyp { source, k, m_range } => khyp(&source, k, m_range),
        Command::Sweep {
            p,
            n_range,
            d_range,
            depth,
            khyp_max,
            m_range,
            epsilon,
            out,
        } => {
            let spec = SweepSpec {
                p,
                n_range,
                d_range,
                depth,
                khyp_max,
                m_range,
                epsilon: epsilon.unwrap_or_else(default_epsilon),
            };
            run_sweep(spec, out.as_ref())
        }
        Command::Charge { grws, epsilon, depth } => charge_cmd(&grws, epsilon.as_ref(), depth),
        Command::Moments { source, count, weights } => moments_cmd(&source, count, weights),
        Command::Convolve { a, b } => convolve(&a, &b),
        Command::CpdMult { source, depth } => cpd_mult(&source, depth),
        Command::CheBuild { sigma } => che_build(&sigma),
        Command::CheCheck {
            charge,
            depth,
            horizon,
            drift,
        } => che_check(&charge, depth, horizon, drift.as_ref()),
        Command::AsympSign { charge, k, certify } => asymp_sign(&charge, k, certify),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Outcome::Positive) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(2),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
