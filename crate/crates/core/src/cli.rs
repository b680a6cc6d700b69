//! Command-line front end: JSON in, JSON report out, deterministic seeds.
//! Exit codes: 0 all pass, 1 invariant violation, 2 input error,
//! 3 precision exhausted.

use crate::dmodules::{
    dm_check, dual, fdm_check, isogeny_cokernel, standard_module, torsion_check,
    DieudonneModule, FilteredDieudonneModule, StandardKind,
};
use crate::envelope::{envelope_build, nilpotence_certify, nilpotence_trace};
use crate::error::Error;
use crate::ext_complex::{ext_groups, FiniteAbelianGroup};
use crate::frames::{
    bk_to_window, bk_witness, frame_from_prism, lift_window_hom, normal_decomposition,
    window_check, window_to_bk, BkModule, FrameFlavor, Window,
};
use crate::qprism::QContext;
use crate::report::{run_all, run_suite_by_name, RunConfig};
use crate::ring::{Element, ElementJson, Ring, RingSpec, QSpec};
use crate::semilinear::RMat;
use crate::witt::{witt_polys_json, Prism};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "prismkit", version, about = "exact truncated prismatic arithmetic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SeedArg {
    /// 64-bit seed; falls back to PRISMKIT_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
}

impl SeedArg {
    fn resolve(&self) -> u64 {
        self.seed
            .or_else(|| std::env::var("PRISMKIT_SEED").ok().and_then(|s| s.parse().ok()))
            .unwrap_or(0)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Witt structure polynomials and helpers.
    Witt {
        #[command(subcommand)]
        sub: WittCmd,
    },
    /// Delta-ring law checks over a working ring.
    Delta {
        #[command(subcommand)]
        sub: DeltaCmd,
    },
    /// Truncated q-logarithm with convergence certificate.
    Qlog {
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long = "N", default_value_t = 6)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        depth: u32,
        #[arg(long = "Q", default_value_t = 16)]
        q: u32,
        /// element JSON; defaults to q itself when omitted
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        terms: Option<u32>,
    },
    /// Envelope presentation, delta table and nilpotence trace.
    Envelope {
        /// prism JSON
        #[arg(long)]
        prism: String,
        /// rank-1 element JSON; defaults to u over a bk prism
        #[arg(long)]
        x: Option<String>,
        #[arg(long, default_value_t = 3)]
        depth: u32,
        /// also certify a valuation target
        #[arg(long)]
        certify: Option<u32>,
    },
    /// Window operations on JSON input.
    Window {
        #[command(subcommand)]
        sub: WindowCmd,
    },
    /// Breuil-Kisin module checks (normal position) on JSON input.
    Bk {
        #[arg(long = "in")]
        input: String,
    },
    /// Dieudonne module operations.
    Dm {
        #[command(subcommand)]
        sub: DmCmd,
    },
    /// Ext groups of a finite abelian group.
    Ext {
        /// cyclic orders, comma separated
        #[arg(long)]
        group: String,
        /// coefficient modulus m
        #[arg(long)]
        coeff: u64,
    },
    /// Run the full property suite (or one suite with --only).
    Suite {
        #[command(flatten)]
        seed: SeedArg,
        /// restrict to a single prime (default: 2 and 3)
        #[arg(long)]
        p: Option<u64>,
        #[arg(long = "N")]
        n: Option<u32>,
        #[arg(long = "M")]
        m: Option<u32>,
        #[arg(long = "Q")]
        q: Option<u32>,
        #[arg(long)]
        only: Option<String>,
        #[arg(long)]
        samples: Option<u32>,
        /// render a table instead of JSON
        #[arg(long)]
        human: bool,
    },
}

#[derive(Subcommand)]
enum WittCmd {
    /// Emit sum/product/Frobenius structure polynomials as JSON.
    Polys {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        len: u32,
    },
}

#[derive(Subcommand)]
enum DeltaCmd {
    /// Sample-check both delta laws and the Frobenius-lift property.
    Check {
        /// ring spec JSON, e.g. {"p":2,"N":6,"u_trunc":8}
        #[arg(long)]
        ring: String,
        #[arg(long, default_value_t = 100)]
        samples: u32,
        #[command(flatten)]
        seed: SeedArg,
    },
}

#[derive(Subcommand)]
enum WindowCmd {
    Check {
        #[arg(long = "in")]
        input: String,
    },
    Normal {
        #[arg(long = "in")]
        input: String,
    },
    ToBk {
        #[arg(long = "in")]
        input: String,
    },
    Lift {
        #[arg(long = "in")]
        input: String,
    },
}

#[derive(Subcommand)]
enum DmCmd {
    Check {
        #[arg(long = "in")]
        input: String,
    },
    Dual {
        #[arg(long = "in")]
        input: String,
    },
    Cokernel {
        #[arg(long = "in")]
        input: String,
    },
    Standard {
        /// etale | multiplicative | qpzp | mu
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 1)]
        rank: usize,
        /// prism JSON; defaults to the crystalline prism at p=2, N=6
        #[arg(long)]
        prism: Option<String>,
    },
}

/// Catalog prism in JSON form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrismJson {
    pub kind: String,
    pub p: u64,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_trunc: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_trunc: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_depth: Option<u32>,
    /// Eisenstein element for the bk kind, as graded-lex coefficients.
    #[serde(rename = "E", skip_serializing_if = "Option::is_none")]
    pub e: Option<Coeffs>,
}

pub type Coeffs = Vec<([u32; 2], u64)>;

pub fn parse_prism(j: &PrismJson) -> crate::error::Result<Prism> {
    let spec = RingSpec {
        p: j.p,
        n: j.n,
        u_trunc: j.u_trunc,
        q: j.q_trunc.map(|t| QSpec { depth: j.q_depth.unwrap_or(0), trunc: t }),
    };
    let ring = Ring::new(spec)?;
    match j.kind.as_str() {
        "crystalline" => Prism::crystalline(ring),
        "q" => Prism::q_prism(ring),
        "bk" => {
            let e = match &j.e {
                Some(coeffs) => element_from_coeffs(&ring, coeffs)?,
                // default E = u - p
                None => ring.var_u()?.sub(&ring.from_int(j.p as i64))?,
            };
            Prism::breuil_kisin(ring, e)
        }
        other => Err(Error::BadInput(format!("unknown prism kind {other}"))),
    }
}

pub fn element_from_coeffs(ring: &Ring, coeffs: &Coeffs) -> crate::error::Result<Element> {
    let mut acc = ring.zero();
    for ([u, t], c) in coeffs {
        acc = acc.add(&ring.monomial(*u, *t, *c)?)?;
    }
    Ok(acc)
}

pub fn element_to_coeffs(e: &Element) -> Coeffs {
    e.coeffs().iter().map(|(m, c)| ([m.u_exp, m.t_exp], *c)).collect()
}

fn matrix_from_json(ring: &Ring, rows: &[Vec<Coeffs>]) -> crate::error::Result<RMat<Ring>> {
    let r = rows.len();
    let c = rows.first().map(|x| x.len()).unwrap_or(0);
    let mut out = RMat::zero(ring.clone(), r, c);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != c {
            return Err(Error::BadInput("ragged matrix".into()));
        }
        for (j, cell) in row.iter().enumerate() {
            out.set(i, j, element_from_coeffs(ring, cell)?);
        }
    }
    Ok(out)
}

fn matrix_to_json(m: &RMat<Ring>) -> Vec<Vec<Coeffs>> {
    (0..m.rows)
        .map(|i| (0..m.cols).map(|j| element_to_coeffs(m.at(i, j))).collect())
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowJson {
    pub prism: PrismJson,
    /// "d" (default) or "nygaard"
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flavor: Option<String>,
    pub rank: usize,
    #[serde(rename = "L")]
    pub l: Vec<usize>,
    pub psi: Vec<Vec<Coeffs>>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct LiftJson {
    #[serde(flatten)]
    pub window: WindowJson,
    pub alpha: Vec<Vec<Coeffs>>,
    pub j_gens: Vec<Coeffs>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct BkJson {
    pub prism: PrismJson,
    pub rank: usize,
    pub mat: Vec<Vec<Coeffs>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilJson {
    #[serde(rename = "L")]
    pub l: Vec<usize>,
    #[serde(rename = "T")]
    pub t: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DmJson {
    pub prism: PrismJson,
    pub rank: usize,
    pub phi: Vec<Vec<Coeffs>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fil: Option<FilJson>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct CokernelJson {
    pub prism: PrismJson,
    pub rank: usize,
    pub phi_src: Vec<Vec<Coeffs>>,
    pub phi_dst: Vec<Vec<Coeffs>>,
    pub f: Vec<Vec<Coeffs>>,
}

fn parse_window(j: &WindowJson) -> crate::error::Result<Window<Ring>> {
    let prism = parse_prism(&j.prism)?;
    let flavor = match j.flavor.as_deref() {
        None | Some("d") => FrameFlavor::PrismD,
        Some("nygaard") => FrameFlavor::Nygaard,
        Some(other) => return Err(Error::BadInput(format!("unknown flavor {other}"))),
    };
    let frame = frame_from_prism(&prism, flavor)?;
    let mut is_l = vec![false; j.rank];
    for &i in &j.l {
        if i >= j.rank {
            return Err(Error::BadInput("L index out of range".into()));
        }
        is_l[i] = true;
    }
    let psi = matrix_from_json(&frame.ring, &j.psi)?;
    if psi.rows != j.rank || psi.cols != j.rank {
        return Err(Error::BadInput("psi must be rank x rank".into()));
    }
    Window::from_normal(frame, is_l, psi)
}

fn read_input(path: &str) -> std::io::Result<String> {
    if path == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path)
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::PrecisionExhausted => 3,
        _ => 2,
    }
}

struct Outcome {
    code: i32,
    body: String,
}

fn run_command(cli: Cli) -> Result<Outcome, (i32, String)> {
    let fail = |e: Error| (exit_code_for(&e), format!("error: {e}"));
    match cli.command {
        Command::Witt { sub: WittCmd::Polys { p, len } } => {
            let polys = witt_polys_json(p, len).map_err(fail)?;
            Ok(Outcome { code: 0, body: serde_json::to_string_pretty(&polys).unwrap() })
        }
        Command::Delta { sub: DeltaCmd::Check { ring, samples, seed } } => {
            let spec: RingSpec = serde_json::from_str(&ring)
                .map_err(|e| (2, format!("error: bad ring spec: {e}")))?;
            let ring = Ring::new(spec).map_err(fail)?;
            let report = crate::report::delta_check_ring(&ring, samples, seed.resolve());
            let code = if report.pass() { 0 } else { 1 };
            let body = serde_json::json!({"schema": "1", "report": report});
            Ok(Outcome { code, body: serde_json::to_string_pretty(&body).unwrap() })
        }
        Command::Qlog { p, n, depth, q, x, terms } => {
            let ctx = QContext::new(p, n, depth, q).map_err(fail)?;
            let x = match x {
                Some(s) => {
                    let j: ElementJson = serde_json::from_str(&s)
                        .map_err(|e| (2, format!("error: bad element: {e}")))?;
                    let el = Element::from_json(&j).map_err(fail)?;
                    if el.ring() != ctx.ring() {
                        return Err((2, "error: element ring differs from context".into()));
                    }
                    el
                }
                None => ctx.q(),
            };
            let terms = terms.unwrap_or_else(|| ctx.default_terms());
            let (l, cert) = ctx.q_log(&x, terms).map_err(fail)?;
            let body = serde_json::json!({
                "schema": "1",
                "value": l.to_json(),
                "certificate": cert,
                "nygaard_level_one": ctx.nygaard_member(&l, 1).map_err(fail)?,
            });
            Ok(Outcome { code: 0, body: serde_json::to_string_pretty(&body).unwrap() })
        }
        Command::Envelope { prism, x, depth, certify } => {
            let pj: PrismJson = serde_json::from_str(&prism)
                .map_err(|e| (2, format!("error: bad prism: {e}")))?;
            let prism = parse_prism(&pj).map_err(fail)?;
            let x = match x {
                Some(s) => {
                    let j: ElementJson = serde_json::from_str(&s)
                        .map_err(|e| (2, format!("error: bad element: {e}")))?;
                    Element::from_json(&j).map_err(fail)?
                }
                None => prism.ring().var_u().map_err(fail)?,
            };
            let env = envelope_build(&prism, &x, depth).map_err(fail)?;
            let delta_table: Vec<Coeffs> = (0..depth.saturating_sub(1))
                .map(|n| element_to_coeffs(env.delta_table(n).unwrap()))
                .collect();
            let trace = nilpotence_trace(&env).map_err(fail)?;
            let certified = match certify {
                Some(l) => Some(nilpotence_certify(&env, l).map_err(fail)?.0),
                None => None,
            };
            let body = serde_json::json!({
                "schema": "1",
                "depth": depth,
                "delta_table": delta_table,
                "trace": trace,
                "certified_m": certified,
            });
            let code = if trace.iter().all(|t| t.meets_bound) { 0 } else { 1 };
            Ok(Outcome { code, body: serde_json::to_string_pretty(&body).unwrap() })
        }
        Command::Window { sub } => window_command(sub),
        Command::Bk { input } => {
            let text = read_input(&input).map_err(|e| (2, format!("error: {e}")))?;
            let j: BkJson = serde_json::from_str(&text)
                .map_err(|e| (2, format!("error: bad bk json: {e}")))?;
            let prism = parse_prism(&j.prism).map_err(fail)?;
            let frame = frame_from_prism(&prism, FrameFlavor::PrismD).map_err(fail)?;
            let mat = matrix_from_json(&frame.ring, &j.mat).map_err(fail)?;
            let bk = BkModule { ring: frame.ring.clone(), d: frame.d.clone(), h: j.rank, mat };
            let witness = bk_witness(&bk).map_err(fail)?;
            let window = bk_to_window(frame, &bk).map_err(fail)?;
            let body = serde_json::json!({
                "schema": "1",
                "minuscule": true,
                "witness": matrix_to_json(&witness),
                "window": WindowJson {
                    prism: j.prism,
                    flavor: Some("d".into()),
                    rank: j.rank,
                    l: window.l_indices(),
                    psi: matrix_to_json(&window.psi),
                },
            });
            Ok(Outcome { code: 0, body: serde_json::to_string_pretty(&body).unwrap() })
        }
        Command::Dm { sub } => dm_command(sub),
        Command::Ext { group, coeff } => {
            let orders: Result<Vec<u64>, _> = group.split(',').map(|s| s.trim().parse()).collect();
            let orders = orders.map_err(|e| (2, format!("error: bad group: {e}")))?;
            let g = FiniteAbelianGroup::new(orders).map_err(fail)?;
            let e = ext_groups(&g, coeff).map_err(fail)?;
            let body = serde_json::json!({
                "schema": "1",
                "H0": e.h0.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                "H1": e.h1.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            });
            Ok(Outcome { code: 0, body: serde_json::to_string_pretty(&body).unwrap() })
        }
        Command::Suite { seed, p, n, m, q, only, samples, human } => {
            let mut cfg = RunConfig::new(seed.resolve());
            if let Some(p) = p {
                cfg.primes = vec![p];
            }
            if let Some(n) = n {
                cfg.n = n;
            }
            if let Some(m) = m {
                cfg.m = m;
            }
            if let Some(q) = q {
                cfg.q = q;
            }
            if let Some(s) = samples {
                cfg = cfg.with_samples(s);
            }
            let (body, pass) = match only {
                Some(name) => {
                    let rep = run_suite_by_name(&cfg, &name)
                        .ok_or_else(|| (2, format!("error: unknown suite {name}")))?;
                    let body = serde_json::json!({"schema": "1", "report": rep});
                    (serde_json::to_string_pretty(&body).unwrap(), rep.pass())
                }
                None => {
                    let rep = run_all(&cfg);
                    let text = if human { rep.to_human() } else { rep.to_json() };
                    (text, rep.pass())
                }
            };
            Ok(Outcome { code: if pass { 0 } else { 1 }, body })
        }
    }
}

fn window_command(sub: WindowCmd) -> Result<Outcome, (i32, String)> {
    let fail = |e: Error| (exit_code_for(&e), format!("error: {e}"));
    match sub {
        WindowCmd::Check { input } => {
            let text = read_input(&input).map_err(|e| (2, format!("error: {e}")))?;
            let j: WindowJson = serde_json::from_str(&text)
                .map_err(|e| (2, format!("error: bad window json: {e}")))?;
            let w = parse_window(&j).map_err(fail)?;
            let report = window_check(&w.to_raw().map_err(fail)?).map_err(fail)?;
            let code = if report.pass() { 0 } else { 1 };
            Ok(Outcome { code, body: serde_json::to_string_pretty(&report).unwrap() })
        }
        WindowCmd::Normal { input } => {
            let text = read_input(&input).map_err(|e| (2, format!("error: {e}")))?;
            let j: WindowJson = serde_json::from_str(&text)
                .map_err(|e| (2, format!("error: bad window json: {e}")))?;
            let w = parse_window(&j).map_err(fail)?;
            let (l, t) = normal_decomposition(&w);
            let body = serde_json::json!({"schema": "1", "L": l, "T": t});
            Ok(Outcome { code: 0, body: serde_json::to_string_pretty(&body).unwrap() })
        }
        WindowCmd::ToBk { input } => {
            let text = read_input(&input).map_err(|e| (2, format!("error: {e}")))?;
            let j: WindowJson = serde_json::from_str(&text)
                .map_err(|e| (2, format!("error: bad window json: {e}")))?;
            let w = parse_window(&j).map_err(fail)?;
            let bk = window_to_bk(&w).map_err(fail)?;
            let body = serde_json::json!({
                "schema": "1",
                "rank": bk.h,
                "mat": matrix_to_json(&bk.mat),
            });
            Ok(Outcome { code: 0, body: serde_json::to_string_pretty(&body).unwrap() })
        }
        WindowCmd::Lift { input } => {
            let text = read_input(&input).map_err(|e| (2, format!("error: {e}")))?;
            let j: LiftJson = serde_json::from_str(&text)
                .map_err(|e| (2, format!("error: bad lift json: {e}")))?;
            let w = parse_window(&j.window).map_err(fail)?;
            let alpha = matrix_from_json(&w.frame.ring, &j.alpha).map_err(fail)?;
            let j_gens: Result<Vec<Element>, _> = j
                .j_gens
                .iter()
                .map(|c| element_from_coeffs(&w.frame.ring, c))
                .collect();
            let j_gens = j_gens.map_err(fail)?;
            let lifted = lift_window_hom(&w, &w, &alpha, &j_gens, 64).map_err(fail)?;
            let body = serde_json::json!({
                "schema": "1",
                "lifted": matrix_to_json(&lifted),
            });
            Ok(Outcome { code: 0, body: serde_json::to_string_pretty(&body).unwrap() })
        }
    }
}

fn dm_command(sub: DmCmd) -> Result<Outcome, (i32, String)> {
    let fail = |e: Error| (exit_code_for(&e), format!("error: {e}"));
    match sub {
        DmCmd::Check { input } => {
            let text = read_input(&input).map_err(|e| (2, format!("error: {e}")))?;
            let j: DmJson = serde_json::from_str(&text)
                .map_err(|e| (2, format!("error: bad dm json: {e}")))?;
            let prism = parse_prism(&j.prism).map_err(fail)?;
            let phi = matrix_from_json(prism.ring(), &j.phi).map_err(fail)?;
            let dm = DieudonneModule::new(prism, phi);
            let report = match &j.fil {
                None => dm_check(&dm),
                Some(fil) => {
                    let mut is_l = vec![false; j.rank];
                    for &i in &fil.l {
                        is_l[i] = true;
                    }
                    fdm_check(&FilteredDieudonneModule { dm, is_l }).map_err(fail)?
                }
            };
            let code = if report.pass() { 0 } else { 1 };
            Ok(Outcome { code, body: serde_json::to_string_pretty(&report).unwrap() })
        }
        DmCmd::Dual { input } => {
            let text = read_input(&input).map_err(|e| (2, format!("error: {e}")))?;
            let j: DmJson = serde_json::from_str(&text)
                .map_err(|e| (2, format!("error: bad dm json: {e}")))?;
            let prism = parse_prism(&j.prism).map_err(fail)?;
            let phi = matrix_from_json(prism.ring(), &j.phi).map_err(fail)?;
            let dm = DieudonneModule::new(prism, phi);
            let d = dual(&dm).map_err(fail)?;
            let body = DmJson {
                prism: j.prism,
                rank: j.rank,
                phi: matrix_to_json(&d.phi),
                fil: None,
            };
            Ok(Outcome { code: 0, body: serde_json::to_string_pretty(&body).unwrap() })
        }
        DmCmd::Cokernel { input } => {
            let text = read_input(&input).map_err(|e| (2, format!("error: {e}")))?;
            let j: CokernelJson = serde_json::from_str(&text)
                .map_err(|e| (2, format!("error: bad cokernel json: {e}")))?;
            let prism = parse_prism(&j.prism).map_err(fail)?;
            let src = DieudonneModule::new(
                prism.clone(),
                matrix_from_json(prism.ring(), &j.phi_src).map_err(fail)?,
            );
            let dst = DieudonneModule::new(
                prism.clone(),
                matrix_from_json(prism.ring(), &j.phi_dst).map_err(fail)?,
            );
            let f = matrix_from_json(prism.ring(), &j.f).map_err(fail)?;
            let t = isogeny_cokernel(&src, &dst, &f).map_err(fail)?;
            let report = torsion_check(&t).map_err(fail)?;
            let body = serde_json::json!({
                "schema": "1",
                "torsion_exp": t.torsion_exp,
                "phi": matrix_to_json(&t.phi),
                "psi": matrix_to_json(&t.psi),
                "report": report,
            });
            let code = if report.pass() { 0 } else { 1 };
            Ok(Outcome { code, body: serde_json::to_string_pretty(&body).unwrap() })
        }
        DmCmd::Standard { kind, rank, prism } => {
            let pj: PrismJson = match prism {
                Some(s) => serde_json::from_str(&s)
                    .map_err(|e| (2, format!("error: bad prism: {e}")))?,
                None => PrismJson {
                    kind: "crystalline".into(),
                    p: 2,
                    n: 6,
                    u_trunc: None,
                    q_trunc: None,
                    q_depth: None,
                    e: None,
                },
            };
            let prism = parse_prism(&pj).map_err(fail)?;
            let kind = match kind.as_str() {
                "etale" => StandardKind::Etale,
                "multiplicative" => StandardKind::Multiplicative,
                "qpzp" => StandardKind::QpZpFiltered,
                "mu" => StandardKind::MuFiltered,
                other => return Err((2, format!("error: unknown kind {other}"))),
            };
            let m = standard_module(kind, &prism, rank).map_err(fail)?;
            let body = DmJson {
                prism: pj,
                rank,
                phi: matrix_to_json(&m.dm.phi),
                fil: Some(FilJson { l: m.l_indices(), t: m.t_indices() }),
            };
            Ok(Outcome { code: 0, body: serde_json::to_string_pretty(&body).unwrap() })
        }
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn run_cli() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version with accurate codes
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run_command(cli) {
        Ok(out) => {
            println!("{}", out.body);
            out.code
        }
        Err((code, msg)) => {
            eprintln!("{msg}");
            code
        }
    }
}
