//! Property suites behind `ph check`.
//!
//! Every suite takes a mesh and a seed and returns one [`CheckResult`] per
//! property. Random draws come from ChaCha8 streams keyed by (seed, task), so
//! the parallel parts reduce in a fixed order and repeat bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::brackets::{self, BracketKernel};
use crate::dirac::{self, AuditReport};
use crate::elliptic::{self, NeumannData};
use crate::energetics::{self, Formulation, PhysParams, State};
use crate::error::{PhError, Result};
use crate::forms::{self, Cochain, HodgeSystem};
use crate::linalg;

pub const SUITES: [&str; 5] = ["forms", "elliptic", "brackets", "dirac", "energetics"];

pub const FORMULATIONS: [Formulation; 3] = [Formulation::V, Formulation::Eta, Formulation::Omega];

/// Largest mesh on which the finite-difference Jacobi checks run.
pub const JACOBI_MAX_TRIANGLES: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckResult {
    /// Passes when `value <= threshold`.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        CheckResult { name: name.into(), value, threshold, pass: value <= threshold }
    }
}

pub const CHECK_HEADER: &str = "suite,check,value,threshold,pass";

pub fn checks_to_csv(suite: &str, checks: &[CheckResult]) -> String {
    let mut s = String::from(CHECK_HEADER);
    s.push('\n');
    for c in checks {
        s.push_str(&format!("{},{},{:.17e},{:.17e},{}\n", suite, c.name, c.value, c.threshold, c.pass));
    }
    s
}

pub fn formulation_name(f: Formulation) -> &'static str {
    match f {
        Formulation::V => "v",
        Formulation::Eta => "eta",
        Formulation::Omega => "omega",
    }
}

/// Independent generator for task `stream` of a run seeded with `seed`.
pub fn task_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn run_suite(name: &str, h: &HodgeSystem, seed: u64) -> Result<Vec<CheckResult>> {
    if matches!(name, "brackets" | "dirac" | "energetics") {
        h.complex().require_simply_connected()?;
    }
    match name {
        "forms" => forms_suite(h, seed),
        "elliptic" => elliptic_suite(h, seed),
        "brackets" => brackets_suite(h, seed),
        "dirac" => Ok(dirac_suite(h, seed, 2)?.0),
        "energetics" => energetics_suite(h, seed),
        _ => Err(PhError::Config(format!("unknown suite '{name}' (expected one of {})", SUITES.join(", ")))),
    }
}

fn random_cochain(h: &HodgeSystem, k: usize, rng: &mut impl Rng) -> Result<Cochain> {
    let n = h.complex().n_simplices(k);
    h.cochain(k, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
}

pub fn forms_suite(h: &HodgeSystem, seed: u64) -> Result<Vec<CheckResult>> {
    let c = h.complex();
    let mut rng = task_rng(seed, 0);
    let mut out = vec![CheckResult::at_most("d1d0_integer", c.d1d0_max() as f64, 0.0)];
    // integer-valued data keeps every partial sum exact
    let x: Vec<f64> = (0..c.n_vertices()).map(|_| rng.random_range(-1000i32..1000) as f64).collect();
    let dd = h.d1().mul_vec(&h.d0().mul_vec(&x));
    out.push(CheckResult::at_most("d1d0_applied", linalg::max_abs(&dd), 0.0));

    let mut stokes: f64 = 0.0;
    for _ in 0..5 {
        let a = random_cochain(h, 1, &mut rng)?;
        let lhs: f64 = forms::d(&a, h)?.values().iter().sum();
        let rhs: f64 = forms::trace(&a, h)?.values.iter().sum();
        let scale: f64 = a.values().iter().map(|x| x.abs()).sum();
        stokes = stokes.max((lhs - rhs).abs() / scale);
    }
    out.push(CheckResult::at_most("stokes", stokes, 1e-13));

    // ⟨dλ, μ⟩ = ⟨λ, δμ⟩ for λ vanishing on the boundary
    let mut lam = vec![0.0; c.n_vertices()];
    for &i in c.interior_vertices() {
        lam[i] = rng.random_range(-1.0..1.0);
    }
    let lam = h.cochain(0, lam)?;
    let mu = random_cochain(h, 1, &mut rng)?;
    let lhs = forms::inner(&forms::d(&lam, h)?, &mu, h)?;
    let rhs = forms::inner(&lam, &forms::codifferential(&mu, h)?, h)?;
    out.push(CheckResult::at_most("adjointness_0_1", (lhs - rhs).abs() / lhs.abs().max(1.0), 1e-11));

    let beta = random_cochain(h, 2, &mut rng)?;
    let dbeta = forms::codifferential(&beta, h)?;
    let dd = forms::codifferential(&dbeta, h)?;
    out.push(CheckResult::at_most(
        "codiff_codiff",
        linalg::max_abs(dd.values()) / linalg::max_abs(dbeta.values()).max(1.0),
        1e-11,
    ));

    let (a, b) = (random_cochain(h, 1, &mut rng)?, random_cochain(h, 1, &mut rng)?);
    let ab = forms::wedge_pair(&a, &b, h)?;
    let ba = forms::wedge_pair(&b, &a, h)?;
    out.push(CheckResult::at_most("wedge_1_1_antisymmetric", (ab + ba).abs() / ab.abs().max(1.0), 1e-12));
    let z = random_cochain(h, 0, &mut rng)?;
    let t = random_cochain(h, 2, &mut rng)?;
    let zt = forms::wedge_pair(&z, &t, h)?;
    let tz = forms::wedge_pair(&t, &z, h)?;
    out.push(CheckResult::at_most("wedge_0_2_symmetric", (zt - tz).abs() / zt.abs().max(1.0), 1e-12));
    let one = h.cochain(0, vec![1.0; c.n_vertices()])?;
    let vol = h.cochain(2, h.areas().to_vec())?;
    let total = forms::wedge_pair(&one, &vol, h)?;
    out.push(CheckResult::at_most("wedge_volume", (total - c.total_area()).abs() / c.total_area(), 1e-12));
    Ok(out)
}

pub fn elliptic_suite(h: &HodgeSystem, seed: u64) -> Result<Vec<CheckResult>> {
    let c = h.complex();
    let mut rng = task_rng(seed, 1);
    let mut out = Vec::new();

    let nb = c.boundary_vertices().len();
    let mut g: Vec<f64> = (0..nb).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mean = g.iter().sum::<f64>() / nb as f64;
    g.iter_mut().for_each(|x| *x -= mean);
    let phi = elliptic::solve_nphi(&NeumannData::new(c, g.clone())?, h)?;
    let mut b = vec![0.0; c.n_vertices()];
    for (k, &v) in c.boundary_vertices().iter().enumerate() {
        b[v] = g[k];
    }
    let r = linalg::sub(&h.stiffness().mul_vec(phi.values()), &b);
    out.push(CheckResult::at_most("nphi_residual", linalg::norm(&r) / linalg::norm(&b), 1e-10));
    let m0 = h.mass(0).mul_vec(phi.values()).iter().sum::<f64>();
    out.push(CheckResult::at_most("nphi_zero_mean", m0.abs() / linalg::max_abs(phi.values()), 1e-10));

    let (b0, b1) = c.betti_numbers();
    if b0 != 1 || b1 != 0 {
        let v = Cochain::zeros(c, 1);
        let rejected = matches!(elliptic::hodge_decompose(&v, h), Err(PhError::HarmonicUnsupported { .. }));
        out.push(CheckResult { name: "hodge_betti_rejection".into(), value: b1 as f64, threshold: 0.0, pass: rejected });
        return Ok(out);
    }
    let (mut rec, mut orth, mut harm) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..10 {
        let v = elliptic::random_solenoidal(h, &mut rng, true)?;
        let s = elliptic::hodge_decompose(&v, h)?;
        let (r, o) = s.residuals(h)?;
        rec = rec.max(r);
        orth = orth.max(o);
        let hh = forms::inner(&s.harmonic, &s.harmonic, h)?.sqrt();
        harm = harm.max(hh / forms::inner(&v, &v, h)?.sqrt());
    }
    out.push(CheckResult::at_most("hodge_reconstruction", rec, 1e-9));
    out.push(CheckResult::at_most("hodge_orthogonality", orth, 1e-9));
    out.push(CheckResult::at_most("hodge_harmonic", harm, 1e-8));
    Ok(out)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Worst skew-symmetry and bilinearity residuals over `n` tuple triples.
pub fn bracket_algebra(form: Formulation, h: &HodgeSystem, n: usize, rng: &mut impl Rng) -> Result<(f64, f64)> {
    let st = brackets::random_state(form, h, rng)?;
    let kern = BracketKernel::new(&st, h)?;
    let (mut skew, mut lin) = (0.0f64, 0.0f64);
    for k in 0..n {
        let port = k % 2 == 1;
        let f1 = brackets::random_tuple(form, h, rng, true)?;
        let f2 = brackets::random_tuple(form, h, rng, true)?;
        let g = brackets::random_tuple(form, h, rng, true)?;
        let fg = kern.eval(&f1, &g, port)?;
        let gf = kern.eval(&g, &f1, port)?;
        skew = skew.max(rel(fg, -gf));
        let ff = kern.eval(&f1, &f1, port)?;
        skew = skew.max(ff.abs() / fg.abs().max(1.0));
        let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let lhs = kern.eval(&f1.combine(a, &f2, b), &g, port)?;
        let rhs = a * fg + b * kern.eval(&f2, &g, port)?;
        lin = lin.max(rel(lhs, rhs));
    }
    Ok((skew, lin))
}

/// Worst relative gap between the v/η brackets and between the η/ω brackets
/// under the change-of-variables maps.
pub fn bracket_cross_formulation(h: &HodgeSystem, n: usize, rng: &mut impl Rng) -> Result<(f64, f64)> {
    let c = h.complex();
    let (mut ve, mut eo) = (0.0f64, 0.0f64);
    for _ in 0..n {
        let eta = elliptic::random_tangent(h, rng)?;
        let mu = brackets::random_flux(c.boundary_vertices().len(), rng);
        let v = linalg::add(eta.values(), &h.d0().mul_vec(elliptic::harmonic_lift(&mu, h)?.values()));
        let f = brackets::random_tuple(Formulation::V, h, rng, false)?;
        let g = brackets::random_tuple(Formulation::V, h, rng, false)?;
        let bv = brackets::bracket_vs(&v, &f, &g, h)?;
        let fe = brackets::v_to_eta(&f, eta.values(), h)?;
        let ge = brackets::v_to_eta(&g, eta.values(), h)?;
        let be = brackets::bracket_eta(eta.values(), &fe, &ge, h)?;
        ve = ve.max(rel(bv, be));

        let omega = forms::d(&eta, h)?;
        let f = brackets::random_tuple(Formulation::Eta, h, rng, true)?;
        let g = brackets::random_tuple(Formulation::Eta, h, rng, true)?;
        let be = brackets::bracket_eta_port(eta.values(), &f, &g, h)?;
        let fo = brackets::eta_to_omega(&f, h)?;
        let go = brackets::eta_to_omega(&g, h)?;
        let bo = brackets::bracket_omega_port(omega.values(), &fo, &go, h)?;
        eo = eo.max(rel(be, bo));
    }
    Ok((ve, eo))
}

pub fn brackets_suite(h: &HodgeSystem, seed: u64) -> Result<Vec<CheckResult>> {
    let algebra: Vec<(f64, f64)> = FORMULATIONS
        .par_iter()
        .enumerate()
        .map(|(k, &form)| bracket_algebra(form, h, 10, &mut task_rng(seed, 10 + k as u64)))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (form, (skew, lin)) in FORMULATIONS.iter().zip(algebra) {
        let f = formulation_name(*form);
        out.push(CheckResult::at_most(format!("skew_{f}"), skew, 1e-11));
        out.push(CheckResult::at_most(format!("bilinear_{f}"), lin, 1e-11));
    }
    let (ve, eo) = bracket_cross_formulation(h, 5, &mut task_rng(seed, 13))?;
    out.push(CheckResult::at_most("cross_v_eta", ve, 1e-8));
    out.push(CheckResult::at_most("cross_eta_omega", eo, 1e-8));

    let c = h.complex();
    if c.n_triangles() <= JACOBI_MAX_TRIANGLES {
        let mut rng = task_rng(seed, 14);
        let st = State::Omega { omega: vec![0.0; c.n_triangles()], phi_b: vec![0.0; c.boundary_vertices().len()] };
        let t: Vec<_> = (0..3).map(|_| brackets::random_tuple(Formulation::Omega, h, &mut rng, false)).collect::<Result<_>>()?;
        let r = brackets::jacobi_fd_test(&st, &t[0], &t[1], &t[2], h, 1e-4)?;
        out.push(CheckResult::at_most("jacobi_canonical", r.residual, 1e-12));
        let jac: Vec<f64> = FORMULATIONS
            .par_iter()
            .enumerate()
            .map(|(k, &form)| {
                let mut rng = task_rng(seed, 20 + k as u64);
                let st = brackets::random_state(form, h, &mut rng)?;
                let t: Vec<_> = (0..3).map(|_| brackets::random_tuple(form, h, &mut rng, false)).collect::<Result<_>>()?;
                Ok(brackets::jacobi_fd_test(&st, &t[0], &t[1], &t[2], h, 1e-4)?.normalized)
            })
            .collect::<Result<_>>()?;
        for (form, j) in FORMULATIONS.iter().zip(jac) {
            out.push(CheckResult::at_most(format!("jacobi_{}", formulation_name(*form)), j, 1e-4));
        }
    }
    Ok(out)
}

/// Self-orthogonality audits of the three Dirac maps at `states` random states
/// each, 20 effort samples per state.
pub fn dirac_audits(h: &HodgeSystem, seed: u64, states: usize) -> Result<Vec<(usize, AuditReport)>> {
    let tasks: Vec<(Formulation, usize)> =
        FORMULATIONS.iter().flat_map(|&f| (0..states).map(move |s| (f, s))).collect();
    tasks
        .par_iter()
        .enumerate()
        .map(|(k, &(form, s))| {
            let mut rng = task_rng(seed, 100 + k as u64);
            let st = brackets::random_state(form, h, &mut rng)?;
            Ok((s, dirac::self_orthogonality_audit(&st, h, 20, &mut rng)?))
        })
        .collect()
}

pub const AUDIT_HEADER: &str = "formulation,state_id,pair_id,normalized_residual";

pub fn audit_csv(audits: &[(usize, AuditReport)], threshold: f64) -> String {
    let mut s = String::from(AUDIT_HEADER);
    s.push('\n');
    let mut worst: f64 = 0.0;
    let mut rank_ok = true;
    for (state, rep) in audits {
        for (pair, r) in &rep.pairs {
            s.push_str(&format!("{},{},{},{:.17e}\n", formulation_name(rep.formulation), state, pair, r));
        }
        worst = worst.max(rep.max_residual);
        rank_ok &= rep.rank_ok();
    }
    s.push_str(&format!(
        "# max_residual={worst:.17e} threshold={threshold:.17e} rank_ok={rank_ok} pass={}\n",
        worst <= threshold && rank_ok
    ));
    s
}

/// Returns the checks and the raw audits for the CSV report.
pub fn dirac_suite(h: &HodgeSystem, seed: u64, states: usize) -> Result<(Vec<CheckResult>, Vec<(usize, AuditReport)>)> {
    let audits = dirac_audits(h, seed, states)?;
    let mut out = Vec::new();
    for form in FORMULATIONS {
        let f = formulation_name(form);
        let reps: Vec<&AuditReport> = audits.iter().map(|a| &a.1).filter(|r| r.formulation == form).collect();
        let worst = reps.iter().map(|r| r.max_residual).fold(0.0, f64::max);
        out.push(CheckResult::at_most(format!("self_orthogonality_{f}"), worst, 1e-9));
        let gap = reps.iter().map(|r| r.rank.abs_diff(r.dim_flow)).max().unwrap_or(0);
        out.push(CheckResult::at_most(format!("rank_{f}"), gap as f64, 0.0));
    }

    // recovery residual of the φ-flow and the port power balance
    let mut rng = task_rng(seed, 200);
    let mut recovery: f64 = 0.0;
    let mut balance: f64 = 0.0;
    for form in FORMULATIONS {
        let st = brackets::random_state(form, h, &mut rng)?;
        let map = dirac::DiracMap::new(&st, h)?;
        for _ in 0..3 {
            let e = dirac::random_effort(form, h, &mut rng)?;
            let t = map.apply(&e)?;
            recovery = recovery.max(t.recovery_residual);
            let (inner, port) = dirac::power_balance(&t, h);
            let scale = linalg::norm(&e.vol).max(1.0) * linalg::norm(&t.flow.vol).max(1.0);
            balance = balance.max((inner + port).abs() / scale);
        }
    }
    out.push(CheckResult::at_most("phi_recovery", recovery, 1e-7));
    out.push(CheckResult::at_most("power_balance", balance, 1e-9));
    Ok((out, audits))
}

pub fn energetics_suite(h: &HodgeSystem, seed: u64) -> Result<Vec<CheckResult>> {
    let c = h.complex();
    let mut rng = task_rng(seed, 300);
    let p = PhysParams::new(1.3, 0.2, 9.81)?;
    let mut out = Vec::new();

    let mut agree: f64 = 0.0;
    for _ in 0..10 {
        let eta = elliptic::random_tangent(h, &mut rng)?;
        let mu: Vec<f64> = (0..c.boundary_vertices().len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v = forms::d(&elliptic::harmonic_lift(&mu, h)?, h)?.add(&eta)?;
        let hv = energetics::hamiltonian_v(v.values(), &p, h)?.total;
        let he = energetics::hamiltonian_eta(eta.values(), &mu, &p, h)?.total;
        let ho = energetics::hamiltonian_omega(forms::d(&eta, h)?.values(), &mu, &p, h)?.total;
        let scale = hv.abs().max(1.0);
        agree = agree.max((hv - he).abs() / scale).max((ho - he).abs() / scale);
    }
    out.push(CheckResult::at_most("formulation_agreement", agree, 1e-9));

    let v = elliptic::random_solenoidal(h, &mut rng, true)?;
    let dv = elliptic::random_solenoidal(h, &mut rng, true)?;
    let fd = energetics::func_derivs_h(&State::V { v: v.values().to_vec() }, &p, h)?;
    let hf = 1e-4;
    let plus = energetics::hamiltonian_v(v.add(&dv.scale(hf))?.values(), &p, h)?.total;
    let minus = energetics::hamiltonian_v(v.sub(&dv.scale(hf))?.values(), &p, h)?.total;
    let an = forms::inner(&h.cochain(1, fd.dv.clone().unwrap_or_default())?, &dv, h)?;
    // the kinetic energy is quadratic, so the central difference is exact up to roundoff
    out.push(CheckResult::at_most("velocity_derivative", rel((plus - minus) / (2.0 * hf), an), 1e-8));

    let ns = c.sigma_vertices().len();
    if ns > 0 {
        let dir = vec![1.0; ns];
        let r = energetics::shape_derivative_audit(|h| Ok(h.complex().total_area()), h, &dir, &dir, 1e-5)?;
        out.push(CheckResult::at_most("shape_area", r, 1e-6));
    }
    Ok(out)
}
