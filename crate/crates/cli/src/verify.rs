//! `verify <suite>`: runs one of the seeded property suites.

use clap::{Args, ValueEnum};
use gaussian_eof::suites::{
    run_d0, run_lemma1, run_lemma2, run_prop1, run_recursion, SuiteReport, LEMMA1_TOL,
    PROP1_EQUALITY_GAP,
};
use gaussian_eof::StandardFormParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Δ(ψ) ≥ δ(c) for random states with prescribed Schmidt coefficients.
    Lemma1,
    /// Constrained entropy minimum against f(Δ) and the geometric ratio.
    Lemma2,
    /// E(ψ) ≥ f(Δ(ψ)) on random states, equality on squeezed states.
    Prop1,
    /// Fixed-point / collapse / escape classification of the recursion.
    Recursion,
    /// Displaced squeezed-state mixture reproducing a balanced state.
    D0,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,

    /// Master seed of the random suites.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,

    /// Random cases [default: 500 for lemma1, 1000 for prop1].
    #[arg(long)]
    pub trials: Option<usize>,

    /// Largest Fock dimension of random states (lemma1 [8], prop1 [12]),
    /// truncation length (lemma2 [40]) or Fock dimension of the Monte
    /// Carlo check (d0 [25]).
    #[arg(long)]
    pub dim: Option<usize>,

    /// Squeezing values, comma separated: recursion multipliers
    /// [0.1,0.5,1,2] or squeezed states checked for equality by prop1
    /// [0.1,0.5,1].
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub r: Vec<f64>,

    /// Perturbation of the recursion start around its fixed point.
    #[arg(long, default_value_t = 1e-3)]
    pub perturb: f64,

    /// Recursion steps.
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,

    /// Largest deviation of a fixed-point trajectory.
    #[arg(long, default_value_t = 1e-12)]
    pub fixed_tol: f64,

    /// EPR-uncertainties for lemma2, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.5, 0.8])]
    pub delta: Vec<f64>,

    /// Allowed |min e − f(Δ)| in lemma2.
    #[arg(long, default_value_t = 1e-4)]
    pub value_tol: f64,

    /// Allowed error of the minimizer's leading ratios in lemma2.
    #[arg(long, default_value_t = 1e-3)]
    pub ratio_tol: f64,

    /// Number of leading ratios checked in lemma2.
    #[arg(long, default_value_t = 10)]
    pub ratio_count: usize,

    /// Slack of the lemma1 and prop1 inequalities.
    #[arg(long, default_value_t = LEMMA1_TOL)]
    pub bound_tol: f64,

    /// Largest E − f(Δ) counted as equality for squeezed states (prop1).
    #[arg(long, default_value_t = PROP1_EQUALITY_GAP)]
    pub equality_gap: f64,

    /// Fock dimension of the squeezed states in prop1.
    #[arg(long, default_value_t = 60)]
    pub tmss_dim: usize,

    /// Standard form of the d0 input state.
    #[arg(long, default_value_t = 2.0)]
    pub n: f64,
    #[arg(long, default_value_t = 1.5)]
    pub kx: f64,
    #[arg(long, default_value_t = 1.5)]
    pub kp: f64,

    /// Monte Carlo samples for d0; 0 skips the Fock-space cross-check.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,

    /// Allowed entrywise deviation of the analytic d0 mixture.
    #[arg(long, default_value_t = 1e-10)]
    pub analytic_tol: f64,

    /// Allowed entrywise deviation of the Monte Carlo d0 mixture.
    #[arg(long, default_value_t = 1e-2)]
    pub mc_tol: f64,
}

pub fn run(args: &VerifyArgs, tol: f64) -> gaussian_eof::Result<SuiteReport> {
    let rs = |default: &[f64]| {
        if args.r.is_empty() {
            default.to_vec()
        } else {
            args.r.clone()
        }
    };
    match args.suite {
        Suite::Lemma1 => run_lemma1(
            args.seed,
            args.trials.unwrap_or(500),
            args.dim.unwrap_or(8),
            args.bound_tol,
        ),
        Suite::Lemma2 => run_lemma2(
            &args.delta,
            args.dim.unwrap_or(40),
            args.seed,
            args.value_tol,
            args.ratio_tol,
            args.ratio_count,
        ),
        Suite::Prop1 => run_prop1(
            args.seed,
            args.trials.unwrap_or(1000),
            args.dim.unwrap_or(12),
            &rs(&[0.1, 0.5, 1.0]),
            args.tmss_dim,
            args.bound_tol,
            args.equality_gap,
        ),
        Suite::Recursion => run_recursion(
            &rs(&[0.1, 0.5, 1.0, 2.0]),
            args.perturb,
            args.steps,
            args.fixed_tol,
        ),
        Suite::D0 => run_d0(
            &StandardFormParams::symmetric(args.n, args.kx, args.kp),
            tol,
            args.analytic_tol,
            args.dim.unwrap_or(25),
            args.samples,
            args.seed,
            args.mc_tol,
        ),
    }
}

pub fn text_report(report: &SuiteReport) -> String {
    let mut out = String::new();
    out.push_str(&report.summary());
    out.push('\n');
    for n in &report.notes {
        out.push_str("  ");
        out.push_str(n);
        out.push('\n');
    }
    for f in &report.failures {
        out.push_str("  counterexample: ");
        out.push_str(f);
        out.push('\n');
    }
    out
}
