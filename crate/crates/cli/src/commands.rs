//! One function per subcommand. Each fills a [`Run`] with artifacts and checks.

use std::f64::consts::TAU;
use std::path::PathBuf;

use clap::Args;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use weighted_lp::algebra::{lpalg_ratio_with, random_function, NormContext, RatioVerdict, DEFAULT_PAIR_BUDGET};
use weighted_lp::asymptotics::{case4_sum_check, doubling_grid, f_table, LaplaceProblem};
use weighted_lp::conditions::{condition_row, write_matrix_csv, MatrixOptions, Verdict};
use weighted_lp::funcalc::{bump_invariants, build_bump_with, psi_of_f_with, spectral_mapping_check, SeriesBudget};
use weighted_lp::operator::{omega1_constant, write_matrix_csv as write_operator_csv, OperatorModel, RealFunction};
use weighted_lp::spectral::{character_domain, exponent_grid, finite_spectrum, spectral_radii_with, Membership};
use weighted_lp::weight::Weight;
use weighted_lp::{Execution, GroupKind, GroupModel};

use crate::config::OUT_DIR_ENV;
use crate::descriptor::{parse_function, parse_group, parse_list, parse_weight};
use crate::error::CliError;
use crate::report::{CheckKind, Expect, Run};

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Directory for CSV/JSON artifacts and the manifest.
    #[arg(long, env = OUT_DIR_ENV, default_value = "wlp-out")]
    pub out_dir: PathBuf,
    /// Seed for randomized inputs.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Whether the expectation checks should pass or (for known-failing
    /// fixtures) fail.
    #[arg(long, value_enum, default_value_t = Expect::Pass)]
    pub expect: Expect,
    /// Run every data-parallel loop on the current thread.
    #[arg(long)]
    pub sequential: bool,
}

impl Common {
    fn exec(&self) -> Execution {
        if self.sequential { Execution::Sequential } else { Execution::Parallel }
    }

    fn start(&self, command: &str) -> Result<Run, CliError> {
        Run::new(command, &self.out_dir, self.seed, self.expect)
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::from(weighted_lp::Error::from(e))
}

fn verdict_check(run: &mut Run, name: &str, v: Verdict) {
    run.check(name, CheckKind::Expectation, v == Verdict::Holds, v.symbol());
}

fn supports_ratio(model: &GroupModel) -> bool {
    matches!(model.kind(), GroupKind::IntegerLattice { dim: 1 } | GroupKind::CyclicGroup { .. } | GroupKind::MeshLine { .. })
}

// ---------------------------------------------------------------------------
// check-weight
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct CheckWeight {
    #[arg(long, default_value = "Z")]
    pub group: String,
    #[arg(long)]
    pub weight: String,
    /// Conjugate exponent in the ratio `(ω^{-q}*ω^{-q})/ω^{-q}`.
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    #[arg(long, default_value_t = 200)]
    pub m_max: usize,
    /// Ball radius for the symmetry and submultiplicativity scan.
    #[arg(long, default_value_t = 8)]
    pub radius: usize,
    #[command(flatten)]
    pub common: Common,
}

pub fn check_weight(a: &CheckWeight) -> Result<Run, CliError> {
    let mut run = a.common.start("check-weight")?;
    let model = parse_group(&a.group)?;
    let w = Weight::on(parse_weight(&a.weight)?, &model)?;
    run.input("group", &a.group);
    run.input("weight", &a.weight);
    run.input("q", a.q);
    run.input("m-max", a.m_max);
    run.input("radius", a.radius);

    let axioms = w.check_weight_axioms_with(a.radius, a.common.exec())?;
    run.check("symmetric", CheckKind::Expectation, axioms.symmetric, format!("max ω(x⁻¹)/ω(x) {:.6}", axioms.max_asymmetry));
    run.check("submultiplicative", CheckKind::Expectation, axioms.submultiplicative, format!("worst ω(xy)/(ω(x)ω(y)) {:.6}", axioms.worst_ratio));
    run.check("at least one", CheckKind::Expectation, axioms.min_value >= 1.0 - 1e-12, format!("min ω {:.6}", axioms.min_value));
    run.write("axioms.json", |out| Ok(serde_json::to_writer_pretty(out, &axioms).map_err(weighted_lp::Error::from)?))?;

    if supports_ratio(&model) {
        let ratio = lpalg_ratio_with(&w, a.q, a.m_max, a.common.exec())?;
        run.check(
            "lpalg ratio bounded",
            CheckKind::Expectation,
            ratio.verdict == RatioVerdict::Bounded,
            format!("max R {:.6} at m={}, slope on upper half {:.3e}", ratio.max_ratio, ratio.argmax, ratio.slope),
        );
        run.write("ratio.csv", |out| Ok(ratio.write_csv(out)?))?;
    } else {
        run.input("ratio", "skipped: the ratio scan needs a one-dimensional model");
    }
    Ok(run)
}

// ---------------------------------------------------------------------------
// conditions
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct Conditions {
    #[arg(long, default_value = "Z")]
    pub group: String,
    /// Weight descriptor; repeat for a table with several rows.
    #[arg(long, required = true)]
    pub weight: Vec<String>,
    #[arg(long, default_value_t = MatrixOptions::default().n_max)]
    pub n_max: usize,
    #[arg(long, default_value_t = MatrixOptions::default().grs_n_max)]
    pub grs_n_max: usize,
    #[arg(long, default_value_t = MatrixOptions::default().bdna_n_max)]
    pub bdna_n_max: usize,
    #[command(flatten)]
    pub common: Common,
}

pub fn conditions(a: &Conditions) -> Result<Run, CliError> {
    let mut run = a.common.start("conditions")?;
    let model = parse_group(&a.group)?;
    run.input("group", &a.group);
    run.input("weight", a.weight.join(" ; "));
    run.input("n-max", a.n_max);
    run.input("grs-n-max", a.grs_n_max);
    run.input("bdna-n-max", a.bdna_n_max);
    let opts = MatrixOptions { n_max: a.n_max, grs_n_max: a.grs_n_max, bdna_n_max: a.bdna_n_max };
    let mut rows = Vec::new();
    for text in &a.weight {
        let w = Weight::on(parse_weight(text)?, &model)?;
        let row = condition_row(&w, opts)?;
        verdict_check(&mut run, &format!("{text}: GRS"), row.grs);
        verdict_check(&mut run, &format!("{text}: S"), row.s);
        verdict_check(&mut run, &format!("{text}: o-exp"), row.o_exp);
        verdict_check(&mut run, &format!("{text}: BDna"), row.bdna);
        run.check(
            &format!("{text}: S agrees with o-exp"),
            CheckKind::Invariant,
            row.s_matches_o_exp(),
            format!("S {}, o-exp {}", row.s.symbol(), row.o_exp.symbol()),
        );
        rows.push(row);
    }
    run.write("conditions.csv", |out| Ok(write_matrix_csv(&rows, out)?))?;
    Ok(run)
}

// ---------------------------------------------------------------------------
// spectral
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct Spectral {
    #[arg(long, default_value = "Z")]
    pub group: String,
    #[arg(long, default_value = "poly:D=2")]
    pub weight: String,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Function whose spectral radius is estimated (`coords=value,...`).
    #[arg(long, default_value = "1=1,-1=1")]
    pub f: String,
    /// Largest power `2^k_max`.
    #[arg(long, default_value_t = 10)]
    pub k_max: usize,
    /// Character exponents are scanned on `[-a_max, a_max]`.
    #[arg(long, default_value_t = 2.0)]
    pub a_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub a_step: f64,
    /// Order of the cyclic group used for the random finite spectra.
    #[arg(long, default_value_t = 32)]
    pub spectrum_order: i64,
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    #[command(flatten)]
    pub common: Common,
}

pub fn spectral(a: &Spectral) -> Result<Run, CliError> {
    let mut run = a.common.start("spectral")?;
    let model = parse_group(&a.group)?;
    let w = Weight::on(parse_weight(&a.weight)?, &model)?;
    let ctx = NormContext::new(a.p, w.clone())?;
    let f = parse_function(&model, &a.f)?;
    for (k, v) in [("group", a.group.clone()), ("weight", a.weight.clone()), ("p", a.p.to_string()), ("f", a.f.clone())] {
        run.input(k, v);
    }
    run.input("k-max", a.k_max);
    run.input("a-max", a.a_max);
    run.input("a-step", a.a_step);
    run.input("spectrum-order", a.spectrum_order);
    run.input("samples", a.samples);

    let radii = spectral_radii_with(&f, &ctx, a.k_max, a.common.exec(), DEFAULT_PAIR_BUDGET)?;
    let (l1, wt) = (&radii.l1, &radii.weighted);
    run.check("r1 ≤ r_pω at every N", CheckKind::Invariant, radii.ordered_at_every_n(), format!("{} powers", l1.points.len()));
    run.check(
        "radius estimates overlap",
        CheckKind::Expectation,
        l1.lower <= wt.upper && wt.lower <= l1.upper,
        format!("r1 ∈ [{:.6}, {:.6}], r_pω ∈ [{:.6}, {:.6}]", l1.lower, l1.upper, wt.lower, wt.upper),
    );
    run.write("radius_l1.csv", |out| Ok(l1.write_csv(out)?))?;
    run.write("radius_weighted.csv", |out| Ok(wt.write_csv(out)?))?;

    let on_z = matches!(model.kind(), GroupKind::IntegerLattice { dim: 1 }) && model.generators().len() == 3;
    if on_z && a.p > 1.0 {
        let dom = character_domain(&w, ctx.q()?, &exponent_grid(-a.a_max, a.a_max, a.a_step))?;
        let grid = exponent_grid(-a.a_max, a.a_max, a.a_step);
        run.input("character-domain", format!("{:?}", dom.intervals));
        run.write("character_domain.csv", |out| {
            let mut wr = csv::Writer::from_writer(out);
            wr.write_record(["a", "membership"]).map_err(csv_err)?;
            for &x in &grid {
                let m = if dom.admissible.contains(&x) {
                    Membership::Converges
                } else if dom.undecided.contains(&x) {
                    Membership::Undecided
                } else {
                    Membership::Diverges
                };
                wr.write_record([format!("{x:.6}"), format!("{m:?}").to_lowercase()]).map_err(csv_err)?;
            }
            wr.flush()?;
            Ok(())
        })?;
    } else {
        run.input("character-domain", "skipped: needs ℤ with standard generators and p > 1");
    }

    let cyclic = GroupModel::cyclic(a.spectrum_order)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.common.seed);
    let half = Complex64::new(0.5, 0.0);
    let mut spectra = Vec::with_capacity(a.samples);
    for _ in 0..a.samples {
        let g = random_function(&cyclic, (a.spectrum_order / 2) as usize, &mut rng)?;
        let sa = g.linear_combination(half, &g.involution(), half)?;
        spectra.push(finite_spectrum(&sa)?);
    }
    let worst_im = spectra.iter().flatten().map(|z| z.im.abs()).fold(0.0, f64::max);
    run.check("self-adjoint spectra are real", CheckKind::Invariant, worst_im < 1e-10, format!("max |Im λ| {worst_im:.2e}"));
    run.write("finite_spectra.csv", |out| {
        let mut wr = csv::Writer::from_writer(out);
        wr.write_record(["sample", "j", "re", "im"]).map_err(csv_err)?;
        for (s, spec) in spectra.iter().enumerate() {
            for (j, z) in spec.iter().enumerate() {
                wr.write_record([s.to_string(), j.to_string(), format!("{:.15e}", z.re), format!("{:.15e}", z.im)]).map_err(csv_err)?;
            }
        }
        wr.flush()?;
        Ok(())
    })?;
    Ok(run)
}

// ---------------------------------------------------------------------------
// funcalc
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct Funcalc {
    /// Order of the cyclic group.
    #[arg(long, default_value_t = 16)]
    pub order: i64,
    #[arg(long, default_value = "poly:D=2")]
    pub weight: String,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Self-adjoint function with `‖f‖₁ ≤ 1`.
    #[arg(long, default_value = "0=0.98,1=0.01,-1=0.01")]
    pub f: String,
    /// Plateau `[a+ε, b−ε]` of the bump.
    #[arg(long, default_value_t = 0.02, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, default_value_t = TAU - 0.02)]
    pub b: f64,
    #[arg(long, default_value_t = 0.93)]
    pub eps: f64,
    #[arg(long, default_value_t = 64)]
    pub n_max: usize,
    /// Mollifier sharpness; chosen from `n_max` and `ε` when omitted.
    #[arg(long)]
    pub sharpness: Option<f64>,
    #[arg(long, default_value_t = 1e-9)]
    pub abs_tol: f64,
    /// Largest acceptable spectral mapping error.
    #[arg(long, default_value_t = 1e-6)]
    pub mapping_tol: f64,
    #[command(flatten)]
    pub common: Common,
}

pub fn funcalc(a: &Funcalc) -> Result<Run, CliError> {
    let mut run = a.common.start("funcalc")?;
    let model = GroupModel::cyclic(a.order)?;
    let ctx = NormContext::new(a.p, Weight::on(parse_weight(&a.weight)?, &model)?)?;
    let f = parse_function(&model, &a.f)?;
    run.input("order", a.order);
    run.input("weight", &a.weight);
    run.input("p", a.p);
    run.input("f", &a.f);
    run.input("a", a.a);
    run.input("b", a.b);
    run.input("eps", a.eps);
    run.input("n-max", a.n_max);
    run.input("sharpness", a.sharpness.map_or("auto".to_string(), |s| s.to_string()));
    run.input("abs-tol", a.abs_tol);
    run.input("mapping-tol", a.mapping_tol);

    let psi = build_bump_with(a.a, a.b, a.eps, a.n_max, a.sharpness)?;
    let (plateau, outside) = bump_invariants(&psi, 400);
    run.check("bump is 1 on the plateau and 0 outside", CheckKind::Invariant, plateau < 1e-8 && outside == 0.0, format!("plateau gap {plateau:.1e}, outside {outside:.1e}"));
    run.write("bump.json", |out| Ok(psi.write_json(out)?))?;

    let budget = SeriesBudget { abs_tol: a.abs_tol, n_max: a.n_max, ..Default::default() };
    let result = psi_of_f_with(&f, &psi, &ctx, &budget, a.common.exec())?;
    run.write("psi_terms.csv", |out| Ok(result.write_csv(out)?))?;

    let mapping = spectral_mapping_check(&f, &psi, &ctx, &budget)?;
    run.check(
        "spectral mapping",
        CheckKind::Expectation,
        mapping.max_error < a.mapping_tol,
        format!("max |χ(ψ{{f}}) − ψ(χ(f))| {:.3e}, a-priori series bound {:.1e}, tail estimate {:.1e}", mapping.max_error, mapping.series_error, mapping.tail_estimate),
    );
    run.write("mapping.csv", |out| {
        let mut wr = csv::Writer::from_writer(out);
        wr.write_record(["j", "chi_f", "chi_psi_f_re", "chi_psi_f_im", "psi_chi_f"]).map_err(csv_err)?;
        for &(j, t, z, v) in &mapping.characters {
            wr.write_record([j.to_string(), format!("{t:.15e}"), format!("{:.15e}", z.re), format!("{:.15e}", z.im), format!("{v:.15e}")]).map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    })?;
    Ok(run)
}

// ---------------------------------------------------------------------------
// laplace
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct Laplace {
    /// Polynomial exponent `Q` of the integrand.
    #[arg(long = "Q", alias = "q-exp", default_value_t = 1.0)]
    pub q_exp: f64,
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    /// Rate `q` in `F(q x^γ)` and in the case-4 sum.
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    /// Largest `x` of the doubling grid; the asymptotic check is made here.
    #[arg(long, default_value_t = 500.0)]
    pub x: f64,
    #[arg(long, default_value_t = 1.0)]
    pub x0: f64,
    /// Relative tolerance for `F(x)` against its asymptotic form at `x`.
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
    #[arg(long, default_value_t = 2000)]
    pub m_max: usize,
    #[command(flatten)]
    pub common: Common,
}

pub fn laplace(a: &Laplace) -> Result<Run, CliError> {
    let mut run = a.common.start("laplace")?;
    let prob = LaplaceProblem::new(a.q_exp, a.gamma, a.q)?;
    if !(a.x0 > 0.0 && a.x >= a.x0) {
        return Err(CliError::Config(format!("need 0 < x0 ≤ x, got x0 = {}, x = {}", a.x0, a.x)));
    }
    run.input("Q", a.q_exp);
    run.input("gamma", a.gamma);
    run.input("q", a.q);
    run.input("x", a.x);
    run.input("x0", a.x0);
    run.input("tol", a.tol);
    run.input("m-max", a.m_max);

    let mut xs = doubling_grid(a.x0, a.x);
    if xs.last().is_none_or(|&l| l < a.x) {
        xs.push(a.x);
    }
    let table = f_table(&prob, &xs, a.common.exec())?;
    let last = table.rows.last().copied().ok_or_else(|| CliError::Config("empty x grid".into()))?;
    run.check(
        "F matches its asymptotic form",
        CheckKind::Expectation,
        (last.ratio - 1.0).abs() < a.tol,
        format!("F({}) = {:.6e} ± {:.1e}, asymptotic {:.6e}, ratio {:.5}, C₂ = {:.6}", last.x, last.numeric, last.error, last.asymptotic, last.ratio, prob.c2()),
    );
    run.write("f_table.csv", |out| Ok(table.write_csv(out)?))?;

    let case4 = case4_sum_check(a.q_exp, a.gamma, a.q, a.m_max, a.common.exec())?;
    run.check(
        "case-4 sum bounded",
        CheckKind::Expectation,
        case4.verdict == RatioVerdict::Bounded,
        format!("sup {:.6} at m={}, slope {:.2e}, C₃ {}", case4.sup, case4.argsup, case4.slope, case4.c3.map_or("n/a".into(), |c| format!("{c:.6}"))),
    );
    run.write("case4.csv", |out| Ok(case4.write_csv(out)?))?;
    Ok(run)
}

// ---------------------------------------------------------------------------
// operator
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OperatorKind {
    /// Nilpotent Jordan block.
    Jordan,
    /// Random strict contraction drawn from the seed.
    Random,
    /// Zero matrix.
    Zero,
}

#[derive(Args, Debug)]
pub struct Operator {
    #[arg(long, value_enum, default_value_t = OperatorKind::Jordan)]
    pub kind: OperatorKind,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Diagonal scale of random contractions.
    #[arg(long, default_value_t = 1e-3)]
    pub diag_scale: f64,
    /// Operator norm of random contractions.
    #[arg(long, default_value_t = 0.9)]
    pub target_norm: f64,
    /// Commutator sweep values of ε.
    #[arg(long, default_value = "0.5,0.1,0.01")]
    pub eps: String,
    /// Values of ε for the growth bound `ω_T(x) ≤ C(ε)e^{ε|x|}`.
    #[arg(long, default_value = "1,0.1,0.01")]
    pub growth_eps: String,
    #[arg(long, default_value_t = 100.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = 401)]
    pub grid_points: usize,
    /// Also measure the constant making `ω_T(x)(1+|x|)²` an algebra weight.
    #[arg(long)]
    pub omega1: bool,
    #[arg(long, default_value_t = 0.1)]
    pub omega1_step: f64,
    #[arg(long, default_value_t = 2.0)]
    pub omega1_q: f64,
    #[arg(long, default_value_t = 100)]
    pub omega1_m_max: usize,
    #[command(flatten)]
    pub common: Common,
}

pub fn operator(a: &Operator) -> Result<Run, CliError> {
    let mut run = a.common.start("operator")?;
    let t = match a.kind {
        OperatorKind::Jordan => OperatorModel::jordan_nilpotent(a.dim)?,
        OperatorKind::Zero => OperatorModel::zero(a.dim)?,
        OperatorKind::Random => OperatorModel::random_contraction(a.dim, a.diag_scale, a.target_norm, &mut ChaCha8Rng::seed_from_u64(a.common.seed))?,
    };
    let eps = parse_list("eps", &a.eps)?;
    let growth_eps = parse_list("growth-eps", &a.growth_eps)?;
    run.input("kind", format!("{:?}", a.kind).to_lowercase());
    run.input("dim", a.dim);
    if a.kind == OperatorKind::Random {
        run.input("diag-scale", a.diag_scale);
        run.input("target-norm", a.target_norm);
    }
    run.input("eps", &a.eps);
    run.input("growth-eps", &a.growth_eps);
    run.input("x-max", a.x_max);
    run.input("grid-points", a.grid_points);
    run.write("matrix.csv", |out| Ok(write_operator_csv(t.matrix(), out)?))?;

    let xs: Vec<f64> = (0..=40).map(|i| -10.0 + 0.5 * i as f64).collect();
    let excess = t.submultiplicativity_excess(&xs);
    run.check("ω_T submultiplicative", CheckKind::Invariant, excess <= 1e-12, format!("max ln ω(x+y) − ln ω(x) − ln ω(y) {excess:.2e}"));
    run.write("omega.csv", |out| {
        let mut wr = csv::Writer::from_writer(out);
        wr.write_record(["x", "omega", "exp_norm"]).map_err(csv_err)?;
        for i in 0..a.grid_points {
            let x = a.x_max * i as f64 / (a.grid_points.max(2) - 1) as f64;
            wr.write_record([format!("{x:.6}"), format!("{:.15e}", t.omega(x)), format!("{:.15e}", t.matexp_norm(x))]).map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    })?;

    let sweep = t.commutator_sweep(&eps)?;
    for r in &sweep {
        run.check(&format!("commutator defect < ε² at ε={}", r.eps), CheckKind::Expectation, r.passes(), format!("defect {:.3e}, bound {:.3e}", r.defect, r.bound));
    }
    run.write("commutator.csv", |out| {
        let mut wr = csv::Writer::from_writer(out);
        wr.write_record(["eps", "defect", "bound", "quadrature_error"]).map_err(csv_err)?;
        for r in &sweep {
            wr.write_record([r.eps.to_string(), format!("{:.6e}", r.defect), format!("{:.6e}", r.bound), format!("{:.3e}", r.quadrature_error)]).map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    })?;

    let growth: Vec<_> = growth_eps.iter().map(|&e| t.epsilon_growth_check(e, a.x_max, a.grid_points)).collect();
    for g in &growth {
        let ok = g.bound.is_some_and(|b| b.is_finite() && g.measured <= b * (1.0 + 1e-9));
        run.check(&format!("C(ε) finite at ε={}", g.eps), CheckKind::Expectation, ok, format!("measured {:.6e}, certified {:?}", g.measured, g.bound));
    }
    run.write("growth.csv", |out| {
        let mut wr = csv::Writer::from_writer(out);
        wr.write_record(["eps", "x_max", "measured", "argmax", "bound"]).map_err(csv_err)?;
        for g in &growth {
            wr.write_record([g.eps.to_string(), g.x_max.to_string(), format!("{:.6e}", g.measured), format!("{:.4}", g.argmax), g.bound.map(|b| format!("{b:.6e}")).unwrap_or_default()])
                .map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    })?;

    let pairs = [
        (RealFunction::indicator(0.0, 1.0), RealFunction::indicator(0.0, 1.0)),
        (RealFunction::indicator(-0.5, 0.25), RealFunction::indicator(0.0, 1.0)),
        (RealFunction::indicator(-1.0, 0.0), RealFunction::indicator(0.3, 2.0)),
    ];
    let mut hom = 0.0f64;
    for (f, g) in &pairs {
        hom = hom.max(t.homomorphism_defect(f, g, 1e-13)?);
    }
    run.check("U is a homomorphism on indicators", CheckKind::Invariant, hom < 1e-8, format!("max ‖U(f*g) − U(f)U(g)‖ {hom:.2e}"));

    if a.omega1 {
        run.input("omega1-step", a.omega1_step);
        run.input("omega1-q", a.omega1_q);
        run.input("omega1-m-max", a.omega1_m_max);
        let rep = omega1_constant(&t, a.omega1_step, a.omega1_q, a.omega1_m_max)?;
        run.check(
            "ω₁ ratio bounded",
            CheckKind::Expectation,
            rep.ratio.verdict == RatioVerdict::Bounded,
            format!("constant {:.6}, max R {:.6} at m={}", rep.constant, rep.ratio.max_ratio, rep.ratio.argmax),
        );
        run.write("omega1_ratio.csv", |out| Ok(rep.ratio.write_csv(out)?))?;
    }
    Ok(run)
}

// ---------------------------------------------------------------------------
// growth
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct Growth {
    #[arg(long, default_value = "H")]
    pub group: String,
    #[arg(long, default_value_t = 24)]
    pub n_max: usize,
    /// Expected growth degree; adds a check on the fitted exponent.
    #[arg(long)]
    pub degree: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub degree_tol: f64,
    /// Also dump the elements of the ball of this radius.
    #[arg(long)]
    pub ball_radius: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

pub fn growth(a: &Growth) -> Result<Run, CliError> {
    let mut run = a.common.start("growth")?;
    let model = parse_group(&a.group)?;
    run.input("group", &a.group);
    run.input("n-max", a.n_max);
    let fit = model.growth_fit(a.n_max)?;
    let monotone = fit.counts.windows(2).all(|w| w[0] <= w[1]);
    run.check("ball sizes nondecreasing", CheckKind::Invariant, monotone, format!("|U^{}| = {}", a.n_max, fit.counts.last().copied().unwrap_or(0)));
    let detail = format!("fitted exponent {:.4}, constant {:.4}", fit.exponent, fit.constant);
    match a.degree {
        Some(d) => {
            run.input("degree", d);
            run.input("degree-tol", a.degree_tol);
            run.check("growth degree", CheckKind::Expectation, (fit.exponent - d).abs() <= a.degree_tol, detail);
        }
        None => run.input("fit", detail),
    }
    run.write("ball_counts.csv", |out| {
        let mut wr = csv::Writer::from_writer(out);
        wr.write_record(["n", "ball_size"]).map_err(csv_err)?;
        for (i, c) in fit.counts.iter().enumerate() {
            wr.write_record([(i + 1).to_string(), c.to_string()]).map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    })?;
    if let Some(r) = a.ball_radius {
        run.input("ball-radius", r);
        run.write("ball.csv", |out| Ok(model.write_ball_csv(r, out)?))?;
    }
    Ok(run)
}
