//! `monopole` command line: batch runs of the pipeline with JSON or CSV output.
//!
//! Exit codes: 0 success, 2 inadmissible input, 3 negative verdict, 4 numerical failure.

use crate::error::Error;
use crate::es_solver::{self, ESData};
use crate::linalg::{self, CMat};
use crate::nahm_flow::{self, FlowConfig, NahmSample};
use crate::reduction;
use crate::riemann_theta::{self, theta_reduce, ThetaCharacteristic, ThetaEvaluator};
use crate::scalar_special::{self, rho, ToleranceConfig};
use crate::trigonal_curve::{self, PeriodData, SymmetricCurve};
use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::f64::consts::PI;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INADMISSIBLE: i32 = 2;
pub const EXIT_VERDICT: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "monopole", version, about = "Spectral curves, theta functions and Nahm data for charge 2 and 3 monopoles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Absolute tolerance for series and quadrature.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub abs_tol: Option<f64>,
    /// Relative tolerance for series and quadrature.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub rel_tol: Option<f64>,
    /// Truncation tolerance of theta sums.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub theta_tol: Option<f64>,
    /// Pretty JSON (the default).
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,
    /// Single-line JSON.
    #[arg(long, global = true, conflicts_with = "csv")]
    pub compact: bool,
    /// CSV instead of JSON.
    #[arg(long, global = true)]
    pub csv: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the Ercolani-Sinha constraints for winding data (n1, m1).
    Solve {
        #[arg(allow_hyphen_values = true)]
        n1: i64,
        #[arg(allow_hyphen_values = true)]
        m1: i64,
    },
    /// Periods and period matrices of w^3 = z^6 + b z^3 - 1.
    Periods {
        #[arg(allow_hyphen_values = true)]
        b: f64,
        /// Compare the closed forms against direct quadrature.
        #[arg(long)]
        verify_quadrature: bool,
    },
    /// Symplectic reduction of the period matrix for (n1, m1).
    Reduce {
        #[arg(allow_hyphen_values = true)]
        n1: i64,
        #[arg(allow_hyphen_values = true)]
        m1: i64,
        /// Skip the unit-alpha simplification.
        #[arg(long)]
        no_simplify: bool,
    },
    /// Nahm data: charge 2 takes --k, charge 3 takes --n1 --m1.
    Nahm {
        #[arg(value_parser = clap::value_parser!(u8).range(2..=3))]
        charge: u8,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        n1: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        m1: Option<i64>,
        /// Free signs of the off-diagonal gauge (charge 3: two values).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        eps: Option<Vec<i64>>,
        /// Grid half-width.
        #[arg(long, default_value_t = 0.9)]
        zmax: f64,
        /// Number of grid nodes (made odd so that 0 is included).
        #[arg(long, default_value_t = 37)]
        nodes: usize,
        /// RK4 step of the gauge flow.
        #[arg(long, default_value_t = 5e-4)]
        step: f64,
        /// Minimum distance of nodes from the poles at z = +-1.
        #[arg(long, default_value_t = 0.05)]
        margin: f64,
        /// Nodes of the theta zero scan on [0, 2] (charge 3).
        #[arg(long, default_value_t = 601)]
        scan_nodes: usize,
    },
    /// Named identity suites.
    Verify { suite: Suite },
    /// Zero-scan verdicts for all admissible pairs with |n1|, |m1| <= max.
    Scan {
        #[arg(long, default_value_t = 5)]
        max: i64,
        #[arg(long, default_value_t = 601)]
        nodes: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Ramanujan,
    Goursat,
    Legendre,
    Covers,
    Igusa,
}

/// A typed output value.
#[derive(Debug, Clone, PartialEq)]
pub enum Quantity {
    Real(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Complex(C64),
    RealVec(Vec<f64>),
    IntVec(Vec<i64>),
    ComplexVec(Vec<C64>),
    ComplexMat(CMat),
    IntMat(DMatrix<i64>),
    Records(Vec<Value>),
}

fn cjson(z: C64) -> Value {
    json!([z.re, z.im])
}

impl Quantity {
    pub fn to_json(&self) -> Value {
        match self {
            Quantity::Real(x) => json!(x),
            Quantity::Int(x) => json!(x),
            Quantity::Bool(x) => json!(x),
            Quantity::Text(s) => json!(s),
            Quantity::Complex(z) => cjson(*z),
            Quantity::RealVec(v) => json!(v),
            Quantity::IntVec(v) => json!(v),
            Quantity::ComplexVec(v) => Value::Array(v.iter().map(|z| cjson(*z)).collect()),
            Quantity::ComplexMat(m) => {
                Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| cjson(m[(i, j)])).collect())).collect())
            }
            Quantity::IntMat(m) => Value::Array((0..m.nrows()).map(|i| json!((0..m.ncols()).map(|j| m[(i, j)]).collect::<Vec<_>>())).collect()),
            Quantity::Records(r) => Value::Array(r.clone()),
        }
    }

    /// `(row, col, re, im)` cells for the long CSV layout.
    fn cells(&self) -> Vec<(String, String, String, String)> {
        let s = |x: f64| format!("{x:e}");
        let e = String::new;
        match self {
            Quantity::Real(x) => vec![(e(), e(), s(*x), e())],
            Quantity::Int(x) => vec![(e(), e(), x.to_string(), e())],
            Quantity::Bool(x) => vec![(e(), e(), x.to_string(), e())],
            Quantity::Text(t) => vec![(e(), e(), t.clone(), e())],
            Quantity::Complex(z) => vec![(e(), e(), s(z.re), s(z.im))],
            Quantity::RealVec(v) => v.iter().enumerate().map(|(i, x)| (i.to_string(), e(), s(*x), e())).collect(),
            Quantity::IntVec(v) => v.iter().enumerate().map(|(i, x)| (i.to_string(), e(), x.to_string(), e())).collect(),
            Quantity::ComplexVec(v) => v.iter().enumerate().map(|(i, z)| (i.to_string(), e(), s(z.re), s(z.im))).collect(),
            Quantity::ComplexMat(m) => (0..m.nrows())
                .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
                .map(|(i, j)| (i.to_string(), j.to_string(), s(m[(i, j)].re), s(m[(i, j)].im)))
                .collect(),
            Quantity::IntMat(m) => (0..m.nrows())
                .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
                .map(|(i, j)| (i.to_string(), j.to_string(), m[(i, j)].to_string(), e()))
                .collect(),
            Quantity::Records(r) => r.iter().enumerate().map(|(i, v)| (i.to_string(), e(), v.to_string(), e())).collect(),
        }
    }
}

impl Serialize for Quantity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// Everything one command produced.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: BTreeMap<String, Value>,
    pub outputs: BTreeMap<String, Quantity>,
    /// Residuals and tolerances backing the outputs.
    pub residuals: BTreeMap<String, f64>,
    /// Library routine behind each output.
    pub provenance: BTreeMap<String, String>,
    pub verdict: Option<String>,
}

impl RunReport {
    fn new(command: &str) -> Self {
        RunReport { command: command.into(), ..Default::default() }
    }

    fn input(&mut self, k: &str, v: Value) {
        self.inputs.insert(k.into(), v);
    }

    fn out(&mut self, k: &str, v: Quantity, from: &str) {
        self.outputs.insert(k.into(), v);
        self.provenance.insert(k.into(), from.into());
    }

    fn resid(&mut self, k: &str, v: f64) {
        self.residuals.insert(k.into(), v);
    }
}

/// Per-node table emitted with `--csv` by `nahm`.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: RunReport,
    pub table: Option<Table>,
    pub exit: i32,
}

/// Tolerances for the pipeline and for theta sums.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub cfg: ToleranceConfig,
    pub theta: ToleranceConfig,
}

impl Tolerances {
    pub fn from_cli(cli: &Cli) -> crate::Result<Self> {
        let d = ToleranceConfig::default();
        let cfg = ToleranceConfig::new(cli.abs_tol.unwrap_or(d.abs_tol), cli.rel_tol.unwrap_or(d.rel_tol), d.max_terms)?;
        let theta = ToleranceConfig::new(cli.theta_tol.unwrap_or(cfg.abs_tol), cfg.rel_tol, cfg.max_terms)?;
        Ok(Tolerances { cfg, theta })
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Inadmissible { .. } | Error::Domain(_) => EXIT_INADMISSIBLE,
        _ => EXIT_NUMERICAL,
    }
}

fn cvec(v: &[C64]) -> Quantity {
    Quantity::ComplexVec(v.to_vec())
}

fn es_outputs(r: &mut RunReport, es: &ESData) {
    let from = "es_solver::solve";
    r.out("t", Quantity::Real(es.t), from);
    r.out("one_minus_t", Quantity::Real(es.one_minus_t), from);
    r.out("b", Quantity::Real(es.b), from);
    r.out("alpha", Quantity::Real(es.alpha), from);
    r.out("chi", Quantity::Real(es.chi), from);
    r.out("chi_cuberoot", Quantity::Real(es.chi_cuberoot), from);
    r.out("xi", Quantity::Real(es.xi), from);
    r.out("d", Quantity::Int(es.d), from);
    r.out("n", Quantity::IntVec(es.n.to_vec()), from);
    r.out("m", Quantity::IntVec(es.m.to_vec()), from);
}

fn cmd_solve(n1: i64, m1: i64, tol: &Tolerances) -> crate::Result<Outcome> {
    let mut r = RunReport::new("solve");
    r.input("n1", json!(n1));
    r.input("m1", json!(m1));
    let es = es_solver::solve(n1, m1, &tol.cfg)?;
    es_outputs(&mut r, &es);
    let p = trigonal_curve::periods_of(&es.curve(), &tol.cfg)?;
    let res = es_solver::verify_es(&p, &es);
    r.resid("es_winding", res.winding);
    r.resid("es_x_form", res.x_form);
    r.resid("hopf_identity", (es_solver::hopf_pairing(&es.n, &es.m) - es.d).abs() as f64);
    Ok(Outcome { report: r, table: None, exit: EXIT_OK })
}

fn period_outputs(r: &mut RunReport, p: &PeriodData) {
    let from = "trigonal_curve::periods_of";
    r.out("alpha", Quantity::Real(p.curve.alpha), from);
    r.out("a", Quantity::ComplexMat(p.a.clone()), from);
    r.out("b_periods", Quantity::ComplexMat(p.b.clone()), from);
    r.out("tau_a", Quantity::ComplexMat(p.tau_a.clone()), from);
    r.out("tau_b", Quantity::ComplexMat(p.tau_b.matrix().clone()), from);
    r.out("x", cvec(p.x.as_slice()), from);
    r.out("y", cvec(p.y.as_slice()), from);
    r.out("legendre_value", Quantity::Complex(p.legendre_value()), "PeriodData::legendre_value");
}

fn cmd_periods(b: f64, verify_quadrature: bool, tol: &Tolerances) -> crate::Result<Outcome> {
    let mut r = RunReport::new("periods");
    r.input("b", json!(b));
    r.input("verify_quadrature", json!(verify_quadrature));
    let curve = SymmetricCurve::new(b)?;
    let p = trigonal_curve::periods_of(&curve, &tol.cfg)?;
    period_outputs(&mut r, &p);
    r.resid("structure", p.structure_residual());
    r.resid("tau_symmetry", linalg::max_abs(&(p.tau_b.matrix() - p.tau_b.matrix().transpose())));
    r.resid("tau_min_imag_eigenvalue", p.tau_b.min_imag_eigenvalue());
    let w = rho();
    let rot = (p.x[1] - w * p.x[0]).norm().max((p.x[2] - w * w * p.x[0]).norm());
    r.resid("x_rotation", rot);
    r.out("x_rotation_structure", Quantity::Bool(rot < 1e-9), "x2 = rho x1, x3 = rho^2 x1");
    r.resid("legendre_vs_minus_2pi_sqrt3", (p.legendre_value() + 2.0 * PI / 3f64.sqrt()).norm());
    if verify_quadrature {
        let s = curve.sextic();
        let cf = trigonal_curve::closed_forms(&curve, &tol.cfg)?;
        let (qi, k1) = trigonal_curve::quad_from_origin(&s, C64::from(curve.alpha), 1, &tol.cfg)?;
        let (qj, l1) = trigonal_curve::quad_from_origin(&s, C64::from(curve.beta), 1, &tol.cfg)?;
        let di = (0..4).map(|k| (qi[k] - cf.i[k]).norm()).fold(0.0, f64::max);
        let dj = (0..4).map(|k| (qj[k] - cf.j[k]).norm()).fold(0.0, f64::max);
        r.resid("quadrature_i", di);
        r.resid("quadrature_j", dj);
        r.resid("quadrature_k1", (k1 - cf.k1).norm());
        r.resid("quadrature_l1", (l1 - cf.l1).norm());
    }
    Ok(Outcome { report: r, table: None, exit: EXIT_OK })
}

fn cmd_reduce(n1: i64, m1: i64, simplify: bool, tol: &Tolerances) -> crate::Result<Outcome> {
    let mut r = RunReport::new("reduce");
    r.input("n1", json!(n1));
    r.input("m1", json!(m1));
    r.input("simplify", json!(simplify));
    let es = es_solver::solve(n1, m1, &tol.cfg)?;
    let p = trigonal_curve::periods_of(&es.curve(), &tol.cfg)?;
    let rf = reduction::reduce_with(&p.tau_b, &es, simplify, &tol.theta)?;
    let from = "reduction::reduce_with";
    r.out("sigma", Quantity::IntMat(rf.sigma.matrix().clone()), from);
    r.out("tau_prime", Quantity::ComplexMat(rf.tau_prime.matrix().clone()), from);
    r.out("d", Quantity::Int(rf.d), from);
    r.out("alpha_entry", Quantity::Int(rf.alpha_entry), from);
    r.out("u", Quantity::Int(rf.u), from);
    r.out("simplified", Quantity::Bool(rf.simplified), from);
    r.out("conditioned", Quantity::Bool(rf.conditioned), from);
    let s = rf.sigma.matrix();
    let j = linalg::symplectic_j(4);
    r.resid("symplectic_defect", linalg::max_abs(&(s * &j * s.transpose() - &j).map(|x| C64::from(x as f64))));
    let img = reduction::es_image(&rf.sigma, &es.n, &es.m);
    r.out("es_image_canonical", Quantity::Bool(img.is_canonical()), "reduction::es_image");
    r.resid("first_row_shape", rf.shape_residual());
    let u = reduction::es_vector(&p.tau_b, &es.n, &es.m);
    let up = reduction::transform_vector(&rf.sigma, &p.tau_b, &u)?;
    r.out("u_prime", cvec(up.as_slice()), "reduction::transform_vector");
    let ev = ThetaEvaluator::new(&rf.tau_prime, &tol.theta)?;
    let pts = [
        [C64::new(0.1, 0.02), C64::new(-0.3, 0.1), C64::new(0.2, -0.05), C64::new(0.05, 0.0)],
        [C64::new(0.37, -0.01), C64::new(0.0, 0.0), C64::new(-0.11, 0.2), C64::new(0.4, 0.1)],
    ];
    let mut split = 0.0f64;
    for z in pts {
        let direct = ev.eval(&z, &ThetaCharacteristic::zero(4), &[])?;
        let red = theta_reduce(z[0], &z[1..], &rf.tau_prime, &tol.theta)?;
        split = split.max((direct - red).norm() / (1.0 + direct.norm()));
    }
    r.resid("theta_split", split);
    Ok(Outcome { report: r, table: None, exit: EXIT_OK })
}

fn nahm_table(s: &NahmSample) -> Table {
    let n = s.t1.first().map(|m| m.nrows()).unwrap_or(0);
    let mut header = vec!["z".to_string()];
    for t in 1..=3 {
        for i in 0..n {
            for j in 0..n {
                header.push(format!("T{t}_{i}{j}_re"));
                header.push(format!("T{t}_{i}{j}_im"));
            }
        }
    }
    header.extend(["residual", "anti_hermitian", "reality", "lax"].map(String::from));
    let rows = (0..s.z_nodes.len())
        .map(|k| {
            let mut row = vec![s.z_nodes[k]];
            for t in [&s.t1[k], &s.t2[k], &s.t3[k]] {
                for i in 0..n {
                    for j in 0..n {
                        row.push(t[(i, j)].re);
                        row.push(t[(i, j)].im);
                    }
                }
            }
            row.extend([s.residual[k], s.anti_hermitian[k], s.reality[k], s.lax[k]]);
            row
        })
        .collect();
    Table { header, rows }
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(0.0, f64::max)
}

/// Largest change of the spectral-curve coefficients along the grid.
fn curve_drift(s: &NahmSample) -> f64 {
    s.curve.iter().map(|m| linalg::max_abs(&(m - &s.curve[0]))).fold(0.0, f64::max)
}

fn sample_outputs(r: &mut RunReport, s: &NahmSample, expected: &CMat) {
    r.out("curve_coefficients", Quantity::ComplexMat(s.curve[s.curve.len() / 2].clone()), "nahm_flow::spectral_coefficients");
    r.out("gauge", Quantity::ComplexMat(s.gauge.clone()), "nahm_flow::hermitian_gauge");
    r.resid("nahm", s.max_residual());
    r.resid("anti_hermitian", s.max_anti_hermitian());
    r.resid("reality", max_of(&s.reality));
    r.resid("lax", max_of(&s.lax));
    r.resid("curve_deviation", s.curve_deviation(expected));
    r.resid("curve_drift", curve_drift(s));
}

/// `charge`-3 zero scan summary as records `{s, z, den_abs, num_min}`.
fn zero_records(zs: &[nahm_flow::ThetaZero]) -> Quantity {
    Quantity::Records(
        zs.iter()
            .map(|z| json!({"s": z.s, "z": z.z, "den_abs": z.den_abs, "num_min": z.num_abs.iter().cloned().fold(f64::INFINITY, f64::min)}))
            .collect(),
    )
}

#[allow(clippy::too_many_arguments)]
fn cmd_nahm(
    charge: u8,
    k: Option<f64>,
    n1: Option<i64>,
    m1: Option<i64>,
    eps: Option<Vec<i64>>,
    grid: Vec<f64>,
    fc: FlowConfig,
    scan_nodes: usize,
    tol: &Tolerances,
) -> crate::Result<Outcome> {
    let mut r = RunReport::new("nahm");
    r.input("charge", json!(charge));
    r.input("grid", json!({"nodes": grid.len(), "zmax": grid.last(), "step": fc.step, "margin": fc.margin}));
    if charge == 2 {
        let k = k.ok_or_else(|| Error::Domain("charge 2 needs --k".into()))?;
        r.input("k", json!(k));
        let rep = nahm_flow::charge2_nahm(k, &grid, &tol.theta, &fc)?;
        let (pf, pf_ref) = nahm_flow::charge2_prime_form(k, &tol.theta)?;
        r.out("nu21", Quantity::Complex(rep.nu21), "nahm_flow::charge2_nu_theta");
        r.out("prime_form_12", Quantity::Complex(pf), "nahm_flow::prime_form_matrix");
        r.resid("nu21_vs_i_pi_2", (rep.nu21 - C64::new(0.0, PI / 2.0)).norm());
        r.resid("prime_form_vs_reference", (pf - pf_ref).norm());
        r.resid("closed_form_deviation", rep.deviation);
        r.resid("q0_symmetry", rep.q0_symmetry);
        sample_outputs(&mut r, &rep.flow, &nahm_flow::charge2_curve_coefficients(k)?);
        r.verdict = Some("pole-free interior".into());
        return Ok(Outcome { table: Some(nahm_table(&rep.flow)), report: r, exit: EXIT_OK });
    }
    let (n1, m1) = match (n1, m1) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Domain("charge 3 needs --n1 and --m1".into())),
    };
    let eps = eps.unwrap_or_else(|| vec![1, 1]);
    r.input("n1", json!(n1));
    r.input("m1", json!(m1));
    r.input("eps", json!(eps));
    let es = es_solver::solve(n1, m1, &tol.cfg)?;
    es_outputs(&mut r, &es);
    let p = trigonal_curve::periods_of(&es.curve(), &tol.cfg)?;
    let s_grid: Vec<f64> = (0..scan_nodes.max(3)).map(|i| 2.0 * i as f64 / (scan_nodes.max(3) - 1) as f64).collect();
    let scan = nahm_flow::zero_scan(&es, &p, &s_grid, &tol.theta)?;
    r.out("theta_zeros", zero_records(&scan.zeros), "nahm_flow::zero_scan");
    if !scan.pole_free {
        let zs: Vec<String> = scan.interior.iter().map(|z| format!("{:.6}", z.z)).collect();
        r.verdict = Some(format!("interior poles of Q0 at z = {}", zs.join(", ")));
        return Ok(Outcome { report: r, table: None, exit: EXIT_VERDICT });
    }
    let data = nahm_flow::charge3_data(&es, &p, &eps, &tol.theta)?;
    r.out("odd_characteristic", Quantity::Text(data.frame.odd_char.to_string()), "nahm_flow::select_frame");
    r.out("rho", cvec(&data.rho), "nahm_flow::curve_rho");
    r.out("nu", cvec(&data.nu), "nahm_flow::nu_closed");
    let nu = nahm_flow::nu_differences(&p, &tol.theta);
    r.resid("nu_cross_check_ok", if nu.is_ok() { 0.0 } else { 1.0 });
    let s = nahm_flow::charge3_nahm(&es, &p, &eps, &grid, &tol.theta, &fc)?;
    let q0 = nahm_flow::sample_q0(data, &grid)?;
    r.resid("q0_symmetry", q0.symmetry_residual());
    sample_outputs(&mut r, &s, &nahm_flow::symmetric_curve_coefficients(es.chi, es.b));
    r.verdict = Some("pole-free interior".into());
    Ok(Outcome { table: Some(nahm_table(&s)), report: r, exit: EXIT_OK })
}

/// `(name, value, threshold)` checks turned into residuals and a verdict.
fn checks_outcome(mut r: RunReport, checks: Vec<(String, f64, f64)>) -> Outcome {
    let mut failed = Vec::new();
    for (name, v, thr) in checks {
        if !(v < thr) {
            failed.push(format!("{name} = {v:.3e} (threshold {thr:.0e})"));
        }
        r.resid(&name, v);
    }
    let exit = if failed.is_empty() { EXIT_OK } else { EXIT_VERDICT };
    r.verdict = Some(if failed.is_empty() { "all checks pass".into() } else { format!("failed: {}", failed.join("; ")) });
    Outcome { report: r, table: None, exit }
}

/// Pairs realising the tabulated ratios `1/2, 1, 2, 3, 4`.
pub const TABLE_PAIRS: [(i64, i64); 5] = [(1, 1), (2, 1), (1, 0), (4, -1), (5, -2)];

fn cmd_verify(suite: Suite, tol: &Tolerances) -> crate::Result<Outcome> {
    let mut r = RunReport::new("verify");
    r.input("suite", json!(format!("{suite:?}").to_lowercase()));
    let cfg = tol.cfg;
    let mut checks = Vec::new();
    match suite {
        Suite::Ramanujan => {
            for (n1, m1) in TABLE_PAIRS {
                let t = es_solver::solve_t(n1, m1, &cfg)?;
                let exact = es_solver::ramanujan_t(n1, m1).ok_or_else(|| Error::Consistency(format!("no closed form for ({n1},{m1})")))?;
                checks.push((format!("t_{n1}_{m1}"), (t - exact).abs(), 1e-10));
            }
            let t2 = es_solver::ramanujan_t(1, 0).unwrap_or(f64::NAN);
            checks.push(("modular_relation_degree_2".into(), scalar_special::modular_relation_residual(0.5, t2), 1e-12));
            for i in 1..=9 {
                let p = i as f64 / 10.0;
                checks.push((format!("cubic_identity_p{i}"), scalar_special::ramanujan_cubic_residual(p, cfg)?, 1e-10));
            }
        }
        Suite::Goursat => {
            for b in [1.0, 5.0 * 2f64.sqrt(), 10.0] {
                checks.push((format!("goursat_b{b:.4}"), scalar_special::goursat_quadratic_residual(b, cfg)?, 1e-10));
            }
            let th = C64::from(1.0 / 3.0);
            let one = C64::from(1.0);
            let mut pf = 0.0f64;
            for i in 0..=58 {
                let x = -5.0 + 0.1 * i as f64;
                let lhs = scalar_special::hyp2f1(th, th, one, C64::from(x), cfg)?;
                let rhs = (1.0 - x).powf(-1.0 / 3.0) * scalar_special::hyp2f1(th, 2.0 * th, one, C64::from(x / (x - 1.0)), cfg)?;
                pf = pf.max((lhs - rhs).norm());
            }
            checks.push(("pfaff_sweep".into(), pf, 1e-10));
        }
        Suite::Legendre => {
            let want = C64::new(-2.0 * PI / 3f64.sqrt(), 0.0);
            let mut vals = Vec::new();
            for b in [0.0, 1.0, 5.0 * 2f64.sqrt(), 10.0] {
                let p = trigonal_curve::periods_symmetric(b, &cfg)?;
                let v = p.legendre_value();
                vals.push(v);
                checks.push((format!("legendre_b{b:.4}"), (v - want).norm(), 1e-9));
                checks.push((format!("hypergeometric_form_b{b:.4}"), trigonal_curve::legendre_hypergeometric_residual(p.curve.alpha, &cfg)?, 1e-9));
            }
            r.out("values", cvec(&vals), "PeriodData::legendre_value");
            r.out("expected", Quantity::Complex(want), "-2 pi / sqrt 3");
        }
        Suite::Covers => {
            for b in [0.0, 1.0, 5.0 * 2f64.sqrt(), -3.0] {
                let ci = trigonal_curve::cover_invariants(b)?;
                let p = ci.p;
                let one = C64::from(1.0);
                let kp = (p + one).powi(3) * (3.0 - p) / (16.0 * p);
                let km = (p + one) * (3.0 - p).powi(3) / (16.0 * p.powi(3));
                let rel = |a: C64, b: C64| (a - b).norm() / (1.0 + b.norm());
                checks.push((format!("k_minus_sq_b{b:.4}"), rel(ci.k_minus_sq, kp), 1e-10));
                checks.push((format!("k_plus_sq_b{b:.4}"), rel(ci.k_plus_sq, km), 1e-10));
                let e1 = trigonal_curve::trigonal_elliptic_g2(&[C64::from(-b), C64::from(-3.0), C64::from(0.0), C64::from(-1.0)])?;
                let e2 = trigonal_curve::trigonal_elliptic_g2(&[one, C64::from(-b), C64::from(-1.0)])?;
                checks.push((format!("g2_b{b:.4}"), e1.norm().max(e2.norm()), 1e-12));
                r.out(&format!("j_plus_b{b:.4}"), Quantity::Complex(ci.j_plus), "trigonal_curve::cover_invariants");
                r.out(&format!("j_minus_b{b:.4}"), Quantity::Complex(ci.j_minus), "trigonal_curve::cover_invariants");
            }
        }
        Suite::Igusa => {
            for g in 1..=4 {
                let res = riemann_theta::theta_property_suite(g, 100, 2024, &tol.theta)?;
                checks.push((format!("quasi_periodicity_g{g}"), res.quasi_periodicity, 1e-9));
                checks.push((format!("parity_g{g}"), res.parity, 1e-9));
                checks.push((format!("characteristic_shift_g{g}"), res.characteristic_shift, 1e-9));
                checks.push((format!("igusa_g{g}"), res.igusa, 1e-9));
            }
        }
    }
    Ok(checks_outcome(r, checks))
}

/// Admissible pairs with `|n1|, |m1| <= max`, in a fixed order.
pub fn admissible_pairs(max: i64) -> Vec<(i64, i64)> {
    let mut v = Vec::new();
    for n1 in -max..=max {
        for m1 in -max..=max {
            if es_solver::admissible(n1, m1) {
                v.push((n1, m1));
            }
        }
    }
    v
}

fn cmd_scan(max: i64, nodes: usize, tol: &Tolerances) -> crate::Result<Outcome> {
    let mut r = RunReport::new("scan");
    r.input("max", json!(max));
    r.input("nodes", json!(nodes));
    let s_grid: Vec<f64> = (0..nodes.max(3)).map(|i| 2.0 * i as f64 / (nodes.max(3) - 1) as f64).collect();
    // collect() on an indexed parallel iterator keeps the input order
    let rows: Vec<Value> = admissible_pairs(max)
        .par_iter()
        .map(|&(n1, m1)| {
            let run = || -> crate::Result<Value> {
                let es = es_solver::solve(n1, m1, &tol.cfg)?;
                let p = trigonal_curve::periods_of(&es.curve(), &tol.cfg)?;
                let sc = nahm_flow::zero_scan(&es, &p, &s_grid, &tol.theta)?;
                let interior: Vec<f64> = sc.interior.iter().map(|z| z.z).collect();
                Ok(json!({"n1": n1, "m1": m1, "b": es.b, "pole_free": sc.pole_free, "interior_z": interior}))
            };
            run().unwrap_or_else(|e| json!({"n1": n1, "m1": m1, "error": e.to_string()}))
        })
        .collect();
    let free: Vec<Value> = rows.iter().filter(|v| v["pole_free"] == json!(true)).map(|v| json!([v["n1"], v["m1"]])).collect();
    r.out("pairs", Quantity::Records(rows), "nahm_flow::zero_scan");
    r.out("pole_free_pairs", Quantity::Records(free), "nahm_flow::zero_scan");
    Ok(Outcome { report: r, table: None, exit: EXIT_OK })
}

/// Run a parsed command.
pub fn execute(cli: &Cli) -> crate::Result<Outcome> {
    let tol = Tolerances::from_cli(cli)?;
    match &cli.command {
        Command::Solve { n1, m1 } => cmd_solve(*n1, *m1, &tol),
        Command::Periods { b, verify_quadrature } => cmd_periods(*b, *verify_quadrature, &tol),
        Command::Reduce { n1, m1, no_simplify } => cmd_reduce(*n1, *m1, !no_simplify, &tol),
        Command::Nahm { charge, k, n1, m1, eps, zmax, nodes, step, margin, scan_nodes } => {
            if !(*step > 0.0) || !(*margin > 0.0) || !(*zmax > 0.0 && *zmax < 1.0) {
                return Err(Error::Domain(format!("step {step}, margin {margin} and zmax {zmax} must be positive, zmax < 1")));
            }
            let fc = FlowConfig { step: *step, margin: *margin, ..FlowConfig::default() };
            let grid = nahm_flow::symmetric_grid(*zmax, *nodes);
            cmd_nahm(*charge, *k, *n1, *m1, eps.clone(), grid, fc, *scan_nodes, &tol)
        }
        Command::Verify { suite } => cmd_verify(*suite, &tol),
        Command::Scan { max, nodes } => cmd_scan(*max, *nodes, &tol),
    }
}

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::Consistency(format!("csv output: {e}"))
}

/// Format an outcome as JSON (pretty or compact) or CSV.
pub fn render(cli: &Cli, out: &Outcome) -> crate::Result<String> {
    if cli.csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        if let Some(t) = &out.table {
            w.write_record(&t.header).map_err(csv_error)?;
            for row in &t.rows {
                w.write_record(row.iter().map(|x| format!("{x:e}"))).map_err(csv_error)?;
            }
        } else {
            w.write_record(["quantity", "row", "col", "value_re", "value_im"]).map_err(csv_error)?;
            for (k, q) in &out.report.outputs {
                for (i, j, re, im) in q.cells() {
                    w.write_record([k.as_str(), &i, &j, &re, &im]).map_err(csv_error)?;
                }
            }
            for (k, v) in &out.report.residuals {
                w.write_record([&format!("residual:{k}"), "", "", &format!("{v:e}"), ""]).map_err(csv_error)?;
            }
        }
        let bytes = w.into_inner().map_err(csv_error)?;
        return String::from_utf8(bytes).map_err(csv_error);
    }
    let s = if cli.compact { serde_json::to_string(&out.report) } else { serde_json::to_string_pretty(&out.report) };
    s.map_err(|e| Error::Consistency(format!("json output: {e}")))
}

/// Parse, run and print; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INADMISSIBLE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli).and_then(|o| render(&cli, &o).map(|s| (s, o.exit))) {
        Ok((s, code)) => {
            use std::io::Write;
            // a closed pipe downstream is not an error of the run
            let _ = writeln!(std::io::stdout().lock(), "{s}");
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
