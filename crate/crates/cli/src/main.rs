//! `rcsys`: solve and verify RRC systems from the command line.
//!
//! Output is JSON on stdout. Exit codes: 0 success, 1 verification failure
//! (the report is still printed), 2 invalid input (a one-line `{"error": …}`).

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use rcsystems::brackets::{rc_bracket, ThetaAlgebra};
use rcsystems::catalog::{self, Catalog};
use rcsystems::coeff::{parse_rational, rat_int, rational_to_string, Rational};
use rcsystems::graded::{parse_system, rrc_shape_check};
use rcsystems::hypergeom::{hg_series, hgde_residual, HgParams};
use rcsystems::rrc::{self, IdentityReport, SystemReport};
use rcsystems::triangle::{candidate_embeddings, dimension_table, TriangleSignature};

#[derive(Parser)]
#[command(name = "rcsys", version, about = "Ramanujan systems of Rankin-Cohen type for triangle groups")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Clone, Copy, ValueEnum)]
enum Coord {
    Q,
    Z,
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    Ramanujan,
    Triangle,
    D33,
    Inversion,
    Ohyama,
}

#[derive(clap::Args)]
struct SigArgs {
    #[arg(long)]
    n: i64,
    #[arg(long)]
    m: i64,
    #[arg(long)]
    k: Option<i64>,
    #[arg(long)]
    r: Option<i64>,
}

#[derive(Subcommand)]
enum Verb {
    /// Series solution of the system for one signature.
    Solve {
        #[command(flatten)]
        sig: SigArgs,
        #[arg(long, default_value_t = 20)]
        order: i64,
        #[arg(long, value_enum, default_value = "z")]
        coord: Coord,
    },
    /// Run one verification suite.
    Verify {
        #[arg(value_enum)]
        check: Check,
        #[arg(long)]
        n: Option<i64>,
        #[arg(long)]
        m: Option<i64>,
        #[arg(long)]
        k: Option<i64>,
        #[arg(long)]
        r: Option<i64>,
        #[arg(long, default_value_t = 40)]
        order: i64,
    },
    /// `[f, g]_n` of two catalog expressions with `θ = q d/dq`.
    Bracket {
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        order: i64,
    },
    /// Dimensions and monomial bases up to a weight.
    Dims {
        #[command(flatten)]
        sig: SigArgs,
        #[arg(long)]
        wmax: String,
    },
    /// `F(α, β; γ; z)` with an ODE residual check.
    Hypergeom {
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        gamma: String,
        #[arg(long, default_value_t = 20)]
        order: i64,
    },
    /// sl₂ check for a system file.
    Sl2check {
        #[arg(long)]
        file: String,
    },
    /// Inversion identities for all embeddings of `(n, m)`, or for one signature.
    Inversion {
        #[command(flatten)]
        sig: SigArgs,
        #[arg(long, default_value_t = 40)]
        order: i64,
    },
    /// Dump a catalog form.
    Catalog {
        #[arg(long)]
        name: String,
        #[arg(long, default_value_t = 20)]
        order: i64,
        #[arg(long, default_value = "1")]
        nome: String,
    },
}

/// Invalid input; exits with code 2.
struct Invalid(String);

impl<E: std::fmt::Display> From<E> for Invalid {
    fn from(e: E) -> Self {
        Invalid(e.to_string())
    }
}

type Outcome = Result<(Value, bool), Invalid>;

fn rational(flag: &str, s: &str) -> Result<Rational, Invalid> {
    parse_rational(s).map_err(|e| Invalid(format!("--{flag}: {e}")))
}

fn positive_order(order: i64) -> Result<(), Invalid> {
    if order <= 0 {
        return Err(Invalid("--order must be positive".into()));
    }
    Ok(())
}

fn signature(n: i64, m: i64, k: Option<i64>, r: Option<i64>) -> Result<TriangleSignature, Invalid> {
    Ok(TriangleSignature::new(n, m, k.unwrap_or(1), r.unwrap_or(1))?)
}

fn prec_json(p: Option<&Rational>) -> Value {
    p.map_or(Value::Null, |p| Value::String(rational_to_string(p)))
}

fn system_json(sig: &TriangleSignature, rep: &SystemReport) -> Value {
    json!({
        "signature": [sig.n, sig.m, sig.k, sig.r],
        "ok": rep.ok(),
        "order": prec_json(rep.order.as_ref()),
        "residuals": rep.residuals.iter().map(|(g, s)| json!({
            "generator": g,
            "zero": s.is_zero(),
            "first_nonzero": if s.is_zero() { Value::Null } else { prec_json(s.valuation().as_ref()) },
        })).collect::<Vec<_>>(),
    })
}

fn identity_json(rep: &IdentityReport) -> Value {
    Value::Array(
        rep.lines
            .iter()
            .map(|l| json!({"name": l.name, "ok": l.ok(), "order": prec_json(l.order())}))
            .collect(),
    )
}

fn embeddings_or_one(n: i64, m: i64, k: Option<i64>, r: Option<i64>) -> Result<Vec<TriangleSignature>, Invalid> {
    Ok(match (k, r) {
        (None, None) => candidate_embeddings(n, m)?,
        _ => vec![signature(n, m, k, r)?],
    })
}

fn inversion(n: i64, m: i64, k: Option<i64>, r: Option<i64>, order: i64) -> Outcome {
    positive_order(order)?;
    let mut sigs = vec![TriangleSignature::new(n, m, 1, 1)?];
    for s in embeddings_or_one(n, m, k, r)? {
        if !sigs.contains(&s) {
            sigs.push(s);
        }
    }
    let rep = rrc::verify_inversion(&sigs, order)?;
    Ok((json!({"check": "inversion", "ok": rep.ok(), "identities": identity_json(&rep)}), rep.ok()))
}

fn need(flag: &str, v: Option<i64>) -> Result<i64, Invalid> {
    v.ok_or_else(|| Invalid(format!("--{flag} is required for this check")))
}

fn verify(check: Check, n: Option<i64>, m: Option<i64>, k: Option<i64>, r: Option<i64>, order: i64) -> Outcome {
    positive_order(order)?;
    match check {
        Check::Ramanujan => {
            let rep = catalog::verify_ramanujan(order)?;
            let achieved = rep.order.as_ref().and_then(|p| i64::try_from(p.floor().to_integer()).ok());
            Ok((json!({"check": "ramanujan", "residual_max_order": achieved, "ok": rep.ok()}), rep.ok()))
        }
        Check::D33 => {
            let rep = catalog::verify_33(order)?;
            let lines: Vec<Value> = rep.lines.iter().map(|l| json!({"name": l.name, "ok": l.ok, "detail": l.detail})).collect();
            Ok((json!({"check": "d33", "ok": rep.ok(), "lines": lines}), rep.ok()))
        }
        Check::Triangle => {
            let (n, m) = (need("n", n)?, need("m", m)?);
            let mut results = Vec::new();
            let mut ok = true;
            for sig in embeddings_or_one(n, m, k, r)? {
                let sys = rrc::build_system(&sig)?;
                let sol = rrc::solve_z(&sig, order)?;
                let rep = rrc::verify_system(&sol, &sys)?;
                let haupt = rrc::hauptmodul_checks(&sol, &rrc::z_data(&sig, order)?)?;
                let sl2 = sys.system.sl2_check()?.ok();
                ok &= rep.ok() && haupt.ok() && sl2;
                let mut v = system_json(&sig, &rep);
                v["sl2"] = json!(sl2);
                v["identities"] = identity_json(&haupt);
                results.push(v);
            }
            Ok((json!({"check": "triangle", "ok": ok, "signatures": results}), ok))
        }
        Check::Inversion => inversion(need("n", n)?, need("m", m)?, k, r, order),
        Check::Ohyama => {
            let sig = signature(need("n", n)?, need("m", m)?, k, r)?;
            let rep = rrc::ohyama_roundtrip(&sig, order)?;
            Ok((json!({"check": "ohyama", "ok": rep.ok(), "identities": identity_json(&rep)}), rep.ok()))
        }
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.verb {
        Verb::Solve { sig, order, coord } => {
            positive_order(order)?;
            let s = signature(sig.n, sig.m, sig.k, sig.r)?;
            let sol = match coord {
                Coord::Z => rrc::solve_z(&s, order)?,
                Coord::Q if (s.k, s.r) == (1, 1) => rrc::solve_q(s.n, s.m, order)?,
                Coord::Q => return Err(Invalid("--coord q needs k = r = 1".into())),
            };
            Ok((serde_json::to_value(sol.to_json())?, true))
        }
        Verb::Verify { check, n, m, k, r, order } => verify(check, n, m, k, r, order),
        Verb::Bracket { f, g, n, order } => {
            positive_order(order)?;
            let cat = Catalog::new();
            let fw = cat.eval(&f, order)?;
            let gw = cat.eval(&g, order)?;
            let b = rc_bracket(&ThetaAlgebra, &fw, &gw, n)?;
            Ok((json!({"weight": rational_to_string(&b.weight), "series": b.value.to_json()}), true))
        }
        Verb::Dims { sig, wmax } => {
            let s = signature(sig.n, sig.m, sig.k, sig.r)?;
            let wmax = rational("wmax", &wmax)?;
            Ok((serde_json::to_value(dimension_table(&s, &wmax))?, true))
        }
        Verb::Hypergeom { alpha, beta, gamma, order } => {
            positive_order(order)?;
            let p = HgParams::new(rational("alpha", &alpha)?, rational("beta", &beta)?, rational("gamma", &gamma)?);
            let f = hg_series(&p, order)?;
            let ok = hgde_residual(&p, &f).is_zero();
            Ok((json!({"series": f.to_json(), "ode_residual_zero": ok}), ok))
        }
        Verb::Sl2check { file } => {
            let text = fs::read_to_string(&file).map_err(|e| Invalid(format!("{file}: {e}")))?;
            let d = parse_system(&text)?;
            let spec = d.spec().clone();
            let t1 = (0..spec.len())
                .filter(|&i| *spec.weight(i) == [rat_int(2)])
                .find_map(|i| rrc_shape_check(&d, i).ok())
                .ok_or_else(|| Invalid("no weight-2 generator gives the system RRC shape".into()))?;
            let rep = t1.sl2_check()?;
            let residuals: Vec<Value> = rep
                .residuals()
                .iter()
                .map(|(name, r)| json!({"relation": name, "zero": r.is_zero(), "residual": r.to_system_text()}))
                .collect();
            Ok((json!({"t1": spec.name(t1.t1()), "ok": rep.ok(), "residuals": residuals}), rep.ok()))
        }
        Verb::Inversion { sig, order } => inversion(sig.n, sig.m, sig.k, sig.r, order),
        Verb::Catalog { name, order, nome } => {
            let nome = rational("nome", &nome)?;
            let f = catalog::form(&name, order)?.with_nome(&nome)?;
            Ok((
                json!({
                    "name": f.name,
                    "weight": rational_to_string(&f.weight),
                    "nome": rational_to_string(&f.nome),
                    "series": f.series.to_json(),
                }),
                true,
            ))
        }
    }
}

/// One JSON line on stdout; a closed pipe is not an error.
fn emit(v: &Value) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{v}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            emit(&json!({"error": first}));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok((value, ok)) => {
            emit(&value);
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Invalid(msg)) => {
            emit(&json!({"error": msg}));
            ExitCode::from(2)
        }
    }
}
