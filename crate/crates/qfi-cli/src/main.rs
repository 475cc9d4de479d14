mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qfi::catalog::{
    drift_manifest, kepler_time_dependent, oscillator_relations, CatalogError, Family, FirstIntegral, Kind,
    OscillatorSpec, Relation,
};
use qfi::conditions::{determining_residuals, ConditionError, DynSystem, QFICandidate};
use qfi::dampxform::{lane_emden, DampError, LaneEmdenCase};
use qfi::dynamics::{drift, integrate_for, kepler_orbit, run_drift_suite, DynamicsError, IntegratorConfig, State};
use qfi::geometry::{kt_basis_rank, kt_from_params, GeometryError, KTParams, PLANE_PARAMS};
use qfi::symexpr::{parse, parse_rat, rat_string, Expr, Rat, Strategy, SymError, DEFAULT_EPS, DEFAULT_SAMPLES, DEFAULT_SEED};

/// Largest relative drift accepted for a conserved quantity.
const DRIFT_MAX: f64 = 1e-8;
/// Smallest drift a perturbed integral must show.
const SENSITIVITY_MIN: f64 = 1e-5;
/// Closed-form orbit against integration, relative.
const ORBIT_MAX: f64 = 1e-6;
const ENERGY_RELATION_MAX: f64 = 1e-10;

#[derive(Parser)]
#[command(name = "qfi", version, about = "Quadratic first integrals: construction and verification")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Relative integrator tolerance.
    #[arg(long, default_value_t = 1e-12)]
    tol_rel: f64,
    /// Absolute integrator tolerance.
    #[arg(long, default_value_t = 1e-12)]
    tol_abs: f64,
    /// Seed for sampled zero tests.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output file (report for kt-basis, trajectory CSV otherwise).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ZeroTest {
    Auto,
    Exact,
    Algebraic,
    Sampled,
}

#[derive(Subcommand)]
enum Cmd {
    /// Killing tensor basis and its independence rank.
    KtBasis {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Determining equations of a candidate against a system (JSON files).
    Check {
        system: PathBuf,
        candidate: PathBuf,
        #[arg(long, value_enum, default_value_t = ZeroTest::Auto)]
        strategy: ZeroTest,
        #[command(flatten)]
        common: Common,
    },
    /// Symbolic and drift checks of catalog entries.
    CatalogVerify {
        /// Keep entries of this ν only.
        #[arg(long, allow_hyphen_values = true)]
        nu: Option<String>,
        /// Keep entries whose id contains this text.
        #[arg(long)]
        filter: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Time-dependent Kepler orbit: conic data and closed form against integration.
    Orbit {
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        b0: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        b1: String,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        k: String,
        #[arg(long, default_value = "1,0,0", allow_hyphen_values = true)]
        q0: String,
        #[arg(long, default_value = "0,1.2,0", allow_hyphen_values = true)]
        v0: String,
        #[arg(long, default_value = "0:5", value_parser = parse_interval, allow_hyphen_values = true)]
        interval: (f64, f64),
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Damped power-law family with φ = −k/t: ω, integral, case label and drift.
    LaneEmden {
        #[arg(long, allow_hyphen_values = true)]
        k: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<String>,
        /// c1,c2,c3
        #[arg(long, allow_hyphen_values = true)]
        c: Option<String>,
        /// JSON file {"mu": .., "k": .., "c": [c1, c2, c3]} instead of the flags.
        #[arg(long, conflicts_with_all = ["k", "mu", "c"])]
        input: Option<PathBuf>,
        #[arg(long, default_value = "1:5", value_parser = parse_interval, allow_hyphen_values = true)]
        interval: (f64, f64),
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        x0: f64,
        #[arg(long, default_value_t = 0.3, allow_hyphen_values = true)]
        v0: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Drift of an integral along a system, or of the whole manifest.
    Drift {
        /// System JSON; without it the manifest suite runs.
        #[arg(long, requires_all = ["integral", "q0", "v0"])]
        system: Option<PathBuf>,
        /// Integral in prefix notation, e.g. "(+ (^ v1 2) (^ q1 2))".
        #[arg(long)]
        integral: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        q0: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        v0: Option<String>,
        #[arg(long, default_value = "0:10", value_parser = parse_interval, allow_hyphen_values = true)]
        interval: (f64, f64),
        #[arg(long, default_value_t = DRIFT_MAX)]
        max_drift: f64,
        /// Manifest ids containing this text.
        #[arg(long)]
        filter: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SymError> for CliError {
    fn from(e: SymError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ConditionError> for CliError {
    fn from(e: ConditionError) -> Self {
        match e {
            ConditionError::Geometry(_) => CliError::Failure(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        CliError::Failure(e.to_string())
    }
}

impl From<CatalogError> for CliError {
    fn from(e: CatalogError) -> Self {
        match e {
            CatalogError::Condition(c) => c.into(),
            CatalogError::Sym(s) => s.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::Precondition(_) | DynamicsError::Io(_) | DynamicsError::Condition(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl From<DampError> for CliError {
    fn from(e: DampError) -> Self {
        match e {
            DampError::Dynamics(d) => d.into(),
            DampError::AuxCondition { .. } => CliError::Failure(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or("expected t0:t1")?;
    let a: f64 = a.trim().parse().map_err(|_| format!("bad number '{a}'"))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("bad number '{b}'"))?;
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err("need finite t0 < t1".into());
    }
    Ok((a, b))
}

/// Integers, p/q fractions and decimals, exactly.
fn parse_number(s: &str) -> Result<Rat, CliError> {
    let s = s.trim();
    let bad = || CliError::Usage(format!("bad rational '{s}'"));
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let int = int.trim_start_matches(['-', '+']);
        let whole = parse_rat(if int.is_empty() { "0" } else { int }).ok_or_else(bad)?;
        let scale = Rat::from_integer(10.into()).pow(frac.len() as i32);
        let f = parse_rat(frac.trim_start_matches('0')).unwrap_or_default();
        let x = whole + f / scale;
        return Ok(if neg { -x } else { x });
    }
    parse_rat(s).ok_or_else(bad)
}

fn parse_floats(s: &str, n: usize) -> Result<Vec<f64>, CliError> {
    let xs: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("bad number '{x}'"))))
        .collect::<Result<_, _>>()?;
    if n > 0 && xs.len() != n {
        return Err(CliError::Usage(format!("expected {n} comma-separated values, got {}", xs.len())));
    }
    Ok(xs)
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn write_csv(path: &Path, traj: &qfi::dynamics::Trajectory) -> Result<(), CliError> {
    let f = fs::File::create(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    traj.write_csv(std::io::BufWriter::new(f))?;
    Ok(())
}

fn config(c: &Common) -> Result<IntegratorConfig, CliError> {
    if !(c.tol_rel > 0.0 && c.tol_abs > 0.0) {
        return Err(CliError::Usage("tolerances must be positive".into()));
    }
    Ok(IntegratorConfig::with_tol(c.tol_rel, c.tol_abs))
}

fn header(command: &str, c: &Common) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("command".into(), json!(command));
    m.insert("seed".into(), json!(c.seed));
    m.insert("tol_rel".into(), json!(c.tol_rel));
    m.insert("tol_abs".into(), json!(c.tol_abs));
    m
}

struct Outcome {
    report: serde_json::Map<String, Value>,
    pass: bool,
}

fn kt_basis(dim: usize, common: &Common) -> Result<Outcome, CliError> {
    let (params, expected): (Vec<usize>, usize) = match dim {
        3 => ((1..=20).collect(), 20),
        2 => (PLANE_PARAMS.to_vec(), 6),
        _ => return Err(CliError::Usage(format!("--dim must be 2 or 3, got {dim}"))),
    };
    let rank = kt_basis_rank(&params, dim)?;
    let tensors: Vec<Value> = params
        .iter()
        .map(|&i| {
            let k = kt_from_params(&KTParams::one_hot(i)).restrict(dim);
            let comps: Vec<Vec<String>> =
                k.components().iter().map(|row| row.iter().map(|e| e.to_string()).collect()).collect();
            json!({"parameter": format!("a{i}"), "components": comps})
        })
        .collect();
    let pass = rank.residuals_zero && rank.rank == expected;
    let mut report = header("kt-basis", common);
    report.insert("dim".into(), json!(dim));
    report.insert("rank".into(), json!(rank.rank));
    report.insert("expected_rank".into(), json!(expected));
    report.insert("residuals_zero".into(), json!(rank.residuals_zero));
    report.insert("sample_points".into(), json!(rank.sample_points));
    report.insert("tensors".into(), json!(tensors));
    Ok(Outcome { report, pass })
}

fn strategy(z: ZeroTest, seed: u64) -> Strategy {
    match z {
        ZeroTest::Auto => Strategy::AutoSeeded(seed),
        ZeroTest::Exact => Strategy::Exact,
        ZeroTest::Algebraic => Strategy::Algebraic,
        ZeroTest::Sampled => Strategy::Sampled { n: DEFAULT_SAMPLES, eps: DEFAULT_EPS, seed },
    }
}

fn check(system: &Path, candidate: &Path, z: ZeroTest, common: &Common) -> Result<Outcome, CliError> {
    let sys = DynSystem::from_json(&read(system)?)?;
    let cand = QFICandidate::from_json(&read(candidate)?, sys.dim)?;
    let rep = determining_residuals(&cand, &sys, strategy(z, common.seed))?;
    let mut report = header("check", common);
    report.insert("integral".into(), json!(cand.to_expr().to_string()));
    report.insert("groups".into(), serde_json::to_value(&rep.groups).expect("serializable"));
    report.insert("all_zero".into(), json!(rep.all_zero));
    Ok(Outcome { report, pass: rep.all_zero })
}

fn relation_report(r: &Relation, s: Strategy) -> Result<(Value, bool), CliError> {
    let v = r.check(s)?;
    let ok = v.is_zero();
    Ok((json!({"relation": r.name, "holds": ok, "verdict": v}), ok))
}

fn catalog_verify(nu: Option<&str>, filter: Option<&str>, common: &Common) -> Result<Outcome, CliError> {
    let cfg = config(common)?;
    let nu: Option<Rat> = nu.map(parse_number).transpose()?;
    let zs = Strategy::AutoSeeded(common.seed);
    let mut cases = Vec::new();
    let mut integrals = Vec::new();
    for case in drift_manifest() {
        let i = case.integral()?;
        if nu.is_some() && i.family.nu != nu {
            continue;
        }
        if filter.is_some_and(|f| !case.id.contains(f)) {
            continue;
        }
        integrals.push(i);
        cases.push(case);
    }
    if cases.is_empty() {
        return Err(CliError::Usage("no catalog entry matches the filters".into()));
    }
    let drifts = run_drift_suite(&cases, &cfg);
    let mut pass = true;
    let mut entries = Vec::new();
    for ((case, i), d) in cases.iter().zip(&integrals).zip(drifts) {
        let verdict = i.conserved(zs)?;
        let mut e = json!({
            "id": case.id,
            "integral": i.name,
            "family": i.family.label,
            "nu": i.family.nu.as_ref().map(rat_string),
            "conserved": verdict,
        });
        let ok = match d {
            Ok(rep) => {
                let min_perturbed = rep.perturbed.iter().map(|p| p.max_rel).fold(f64::INFINITY, f64::min);
                let ok = verdict.is_zero()
                    && rep.nominal.max_rel <= DRIFT_MAX
                    && rep.perturbed.iter().all(|p| p.max_rel >= SENSITIVITY_MIN);
                e["drift"] = serde_json::to_value(&rep.nominal).expect("serializable");
                e["perturbed"] = serde_json::to_value(&rep.perturbed).expect("serializable");
                e["min_perturbed_drift"] = if min_perturbed.is_finite() { json!(min_perturbed) } else { Value::Null };
                e["steps"] = json!(rep.steps);
                ok
            }
            Err(err) => {
                e["error"] = json!(err.to_string());
                false
            }
        };
        e["pass"] = json!(ok);
        pass &= ok;
        entries.push(e);
    }
    let mut relations = Vec::new();
    let one = Rat::from_integer(1.into());
    let minus_two = Rat::from_integer((-2).into());
    if filter.is_none() && nu.as_ref().is_none_or(|n| *n == one) {
        let s = Expr::sym;
        for r in kepler_time_dependent(&s("b0"), &s("b1"), &s("c11"))?.relations() {
            let (v, ok) = relation_report(&r, zs)?;
            pass &= ok;
            relations.push(v);
        }
    }
    if filter.is_none() && nu.as_ref().is_none_or(|n| *n == minus_two) {
        let spec = OscillatorSpec::F { f: Expr::func_of_t("f", None), c0: Expr::sym("c0") };
        for r in oscillator_relations(&spec)? {
            let (v, ok) = relation_report(&r, zs)?;
            pass &= ok;
            relations.push(v);
        }
    }
    let mut report = header("catalog-verify", common);
    report.insert("drift_max".into(), json!(DRIFT_MAX));
    report.insert("sensitivity_min".into(), json!(SENSITIVITY_MIN));
    report.insert("entries".into(), Value::Array(entries));
    report.insert("relations".into(), Value::Array(relations));
    Ok(Outcome { report, pass })
}

#[allow(clippy::too_many_arguments)]
fn orbit(
    b0: &str,
    b1: &str,
    k: &str,
    q0: &str,
    v0: &str,
    interval: (f64, f64),
    samples: usize,
    common: &Common,
) -> Result<Outcome, CliError> {
    let cfg = config(common)?;
    let (b0, b1, k) = (parse_number(b0)?, parse_number(b1)?, parse_number(k)?);
    let q: [f64; 3] = parse_floats(q0, 3)?.try_into().expect("length checked");
    let v: [f64; 3] = parse_floats(v0, 3)?.try_into().expect("length checked");
    let sol = kepler_orbit(&b0, &b1, &k, interval.0, q, v)?;
    let traj = sol.integrate(interval.1, samples.max(2), &cfg)?;
    let chk = sol.validate(&traj)?;
    if let Some(p) = &common.out {
        write_csv(p, &traj)?;
    }
    let residual = sol.energy_relation_residual();
    let pass = chk.max_rel_r_error <= ORBIT_MAX && chk.max_rel_l3_error <= ORBIT_MAX && residual <= ENERGY_RELATION_MAX;
    let mut report = header("orbit", common);
    report.insert("conic".into(), json!(sol.conic()));
    report.insert("solution".into(), serde_json::to_value(&sol).expect("serializable"));
    report.insert("energy_relation_residual".into(), json!(residual));
    report.insert("check".into(), serde_json::to_value(&chk).expect("serializable"));
    report.insert("interval".into(), json!([interval.0, interval.1]));
    Ok(Outcome { report, pass })
}

fn json_rat(v: &Value) -> Result<Rat, CliError> {
    match v {
        Value::String(s) => parse_number(s),
        Value::Number(n) => parse_number(&n.to_string()),
        _ => Err(CliError::Usage(format!("expected a number, got {v}"))),
    }
}

fn lane_emden_case(
    k: Option<&str>,
    mu: Option<&str>,
    c: Option<&str>,
    input: Option<&Path>,
) -> Result<LaneEmdenCase, CliError> {
    let (k, mu, c) = if let Some(p) = input {
        let v: Value = serde_json::from_str(&read(p)?).map_err(|e| CliError::Usage(e.to_string()))?;
        let field = |n: &str| v.get(n).ok_or_else(|| CliError::Usage(format!("missing \"{n}\"")));
        let cs = field("c")?.as_array().ok_or_else(|| CliError::Usage("\"c\" must be an array".into()))?;
        let cs: Vec<Rat> = cs.iter().map(json_rat).collect::<Result<_, _>>()?;
        (json_rat(field("k")?)?, json_rat(field("mu")?)?, cs)
    } else {
        fn need<'a>(x: Option<&'a str>, n: &str) -> Result<&'a str, CliError> {
            x.ok_or_else(|| CliError::Usage(format!("--{n} is required")))
        }
        let cs = need(c, "c")?.split(',').map(parse_number).collect::<Result<Vec<_>, _>>()?;
        (parse_number(need(k, "k")?)?, parse_number(need(mu, "mu")?)?, cs)
    };
    let c: [Rat; 3] = c.try_into().map_err(|_| CliError::Usage("c needs three values".into()))?;
    Ok(LaneEmdenCase { k, mu, c })
}

fn lane_emden_cmd(case: &LaneEmdenCase, interval: (f64, f64), x0: f64, v0: f64, common: &Common) -> Result<Outcome, CliError> {
    let cfg = config(common)?;
    let res = lane_emden(case)?;
    let i = &res.integral;
    let mut report = header("lane-emden", common);
    report.insert("k".into(), json!(rat_string(&case.k)));
    report.insert("mu".into(), json!(rat_string(&case.mu)));
    report.insert("c".into(), json!(case.c.iter().map(rat_string).collect::<Vec<_>>()));
    report.insert("label".into(), json!(res.label));
    report.insert("detail".into(), json!(res.detail));
    report.insert("omega".into(), json!(res.omega.to_string()));
    report.insert("integral".into(), json!(i.expr.to_string()));
    report.insert("A".into(), json!(res.a.as_ref().map(|a| a.to_string())));
    let s0 = State::new(interval.0, vec![x0], vec![v0]);
    let pass = match integrate_for(&i.family.system, &[&i.expr], &s0, interval.1, &cfg) {
        Ok(traj) => {
            let d = drift(i, &traj)?;
            if let Some(p) = &common.out {
                write_csv(p, &traj)?;
            }
            let ok = d.max_rel <= DRIFT_MAX;
            report.insert("drift".into(), serde_json::to_value(&d).expect("serializable"));
            ok
        }
        Err(e) => {
            report.insert("error".into(), json!(e.to_string()));
            false
        }
    };
    Ok(Outcome { report, pass })
}

#[allow(clippy::too_many_arguments)]
fn drift_cmd(
    system: Option<&Path>,
    integral: Option<&str>,
    q0: Option<&str>,
    v0: Option<&str>,
    interval: (f64, f64),
    max_drift: f64,
    filter: Option<&str>,
    common: &Common,
) -> Result<Outcome, CliError> {
    let cfg = config(common)?;
    let mut report = header("drift", common);
    let Some(system) = system else {
        let cases: Vec<_> = drift_manifest().into_iter().filter(|c| filter.is_none_or(|f| c.id.contains(f))).collect();
        if cases.is_empty() {
            return Err(CliError::Usage("no manifest case matches the filter".into()));
        }
        let mut pass = true;
        let mut out = Vec::new();
        for (case, r) in cases.iter().zip(run_drift_suite(&cases, &cfg)) {
            match r {
                Ok(rep) => {
                    let ok = rep.nominal.max_rel <= max_drift
                        && rep.perturbed.iter().all(|p| p.max_rel >= SENSITIVITY_MIN);
                    pass &= ok;
                    let mut v = serde_json::to_value(&rep).expect("serializable");
                    v["pass"] = json!(ok);
                    out.push(v);
                }
                Err(e) => {
                    pass = false;
                    out.push(json!({"id": case.id, "error": e.to_string(), "pass": false}));
                }
            }
        }
        report.insert("max_drift".into(), json!(max_drift));
        report.insert("cases".into(), Value::Array(out));
        return Ok(Outcome { report, pass });
    };
    let sys = DynSystem::from_json(&read(system)?)?;
    let expr = parse(integral.expect("required by clap"))?;
    let q = parse_floats(q0.expect("required by clap"), sys.dim)?;
    let v = parse_floats(v0.expect("required by clap"), sys.dim)?;
    let fam = Family { label: "user".into(), nu: sys.nu.clone(), params: Vec::new(), system: sys };
    let i = FirstIntegral { name: "I".into(), expr, family: fam, kind: Kind::Quadratic };
    let traj = integrate_for(&i.family.system, &[&i.expr], &State::new(interval.0, q, v), interval.1, &cfg)?;
    let d = drift(&i, &traj)?;
    if let Some(p) = &common.out {
        write_csv(p, &traj)?;
    }
    let pass = d.max_rel <= max_drift;
    report.insert("max_drift".into(), json!(max_drift));
    report.insert("report".into(), serde_json::to_value(&d).expect("serializable"));
    report.insert("steps".into(), json!(traj.stats.steps));
    Ok(Outcome { report, pass })
}

fn run(cli: Cli) -> Result<(Outcome, Option<PathBuf>), CliError> {
    match cli.cmd {
        Cmd::KtBasis { dim, common } => Ok((kt_basis(dim, &common)?, common.out)),
        Cmd::Check { system, candidate, strategy, common } => Ok((check(&system, &candidate, strategy, &common)?, None)),
        Cmd::CatalogVerify { nu, filter, common } => Ok((catalog_verify(nu.as_deref(), filter.as_deref(), &common)?, None)),
        Cmd::Orbit { b0, b1, k, q0, v0, interval, samples, common } => {
            Ok((orbit(&b0, &b1, &k, &q0, &v0, interval, samples, &common)?, None))
        }
        Cmd::LaneEmden { k, mu, c, input, interval, x0, v0, common } => {
            let case = lane_emden_case(k.as_deref(), mu.as_deref(), c.as_deref(), input.as_deref())?;
            Ok((lane_emden_cmd(&case, interval, x0, v0, &common)?, None))
        }
        Cmd::Drift { system, integral, q0, v0, interval, max_drift, filter, common } => Ok((
            drift_cmd(
                system.as_deref(),
                integral.as_deref(),
                q0.as_deref(),
                v0.as_deref(),
                interval,
                max_drift,
                filter.as_deref(),
                &common,
            )?,
            None,
        )),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((mut out, report_path)) => {
            out.report.insert("pass".into(), json!(out.pass));
            let text = report::to_string(&out.report);
            match report_path {
                Some(p) => {
                    if let Err(e) = write_file(&p, text.as_bytes()) {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                    println!("rank report written to {}", p.display());
                }
                None => print!("{text}"),
            }
            if out.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(m)) => {
            eprintln!("verification failed: {m}");
            ExitCode::from(1)
        }
    }
}
