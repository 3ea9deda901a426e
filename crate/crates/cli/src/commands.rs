use std::fs;

use varjack::asymptotics::{
    convergence_table, gaps_decrease, gaussian_targets, hoeffding_report, hyper_gap_ratio,
    PolynomialG, HYPER_RATIO_BOUND,
};
use varjack::combinatorics::factorial;
use varjack::exact::{
    analyze, energy_cross_check, hoeffding_energies, interpolation_check, ExactConfig,
};
use varjack::families::{CoordSpec, FunctionSpec, InstanceSpec};
use varjack::instances::instance_batch;
use varjack::lcs::{
    b1_lcs_estimate, blast_lcs_estimate, blast_lcs_exact, cell_series, omitted_letter_bound,
    upper_bound_report, varsup_constant, with_omitted_letter, LcsModel, PerturbationSpec, Word,
};
use varjack::mc::{estimate_b_k, estimate_variance};
use varjack::{
    CoordFunction, EstimatorConfig, FiniteDistribution, IdentityReport, ProductSpace, Result,
};

use crate::args::*;
use crate::output::{Report, Table};
use crate::row;

/// Round trip accuracy demanded of the Hoeffding construction.
const HOEFFDING_TOL: f64 = 1e-9;

pub fn run(cli: &Cli) -> Result<Report> {
    let g = &cli.global;
    let mut mc = EstimatorConfig::new(g.samples, g.seed);
    if let Some(t) = g.threads {
        mc = mc.with_streams(t);
    }
    match &cli.command {
        Command::Decompose(a) => decompose(a),
        Command::Verify(a) => verify(a, g.seed),
        Command::Estimate(a) => estimate(a, &mc),
        Command::Lcs(c) => match c {
            LcsCommand::Upper(w) => lcs_upper(w, &mc),
            LcsCommand::Blast(w) => lcs_blast(w, &mc),
            LcsCommand::B1(w) => lcs_b1(w, &mc),
            LcsCommand::Figure1(a) => lcs_figure1(a, &mc),
            LcsCommand::Omitted(a) => lcs_omitted(a, &mc),
            LcsCommand::Varsup(a) => lcs_varsup(a),
        },
        Command::Gaussian(a) => gaussian(a),
        Command::Hoeffding(a) => hoeffding(a),
        Command::Hyper(a) => hyper(a),
    }
}

fn instance(a: &InstanceArgs) -> Result<(ProductSpace, CoordFunction)> {
    let spec = match &a.instance {
        Some(s) if s.trim_start().starts_with('{') => InstanceSpec::from_json(s)?,
        Some(path) => InstanceSpec::from_json(&fs::read_to_string(path)?)?,
        None => {
            let function = match a.family {
                Family::Additive => FunctionSpec::Additive { weights: None },
                Family::Parity => FunctionSpec::Parity { indices: None },
                Family::Prefix => FunctionSpec::ProductOfPrefix {
                    len: a.param.unwrap_or((a.n / 2).max(1)),
                },
                Family::Dictator => FunctionSpec::Dictator {
                    index: a.param.unwrap_or(0),
                },
                Family::Tribes => FunctionSpec::Tribes {
                    width: a.param.unwrap_or(2),
                },
                Family::Lcs => FunctionSpec::Lcs { split: a.param },
            };
            InstanceSpec {
                coords: None,
                iid: Some(CoordSpec {
                    probs: a.probs.clone(),
                    atoms: None,
                    values: a.values.clone(),
                }),
                n: Some(a.n),
                function,
            }
        }
    };
    spec.build()
}

fn failures(rep: &IdentityReport, context: &str) -> Vec<String> {
    rep.failures()
        .map(|e| {
            let k = e.k.map(|k| format!("[k={k}]")).unwrap_or_default();
            format!(
                "{context}{}{k}: residual {:.3e} exceeds {:.3e}",
                e.name, e.residual, e.allowed
            )
        })
        .collect()
}

fn exact_config(tolerance: Option<f64>) -> ExactConfig {
    ExactConfig {
        tolerance,
        ..ExactConfig::default()
    }
}

fn decompose(a: &DecomposeArgs) -> Result<Report> {
    let (space, f) = instance(&a.instance)?;
    let (_, r, ids) = analyze(&space, &f, &exact_config(a.tolerance))?;
    let n = space.n();
    let mut t = Table::new(&["quantity", "n", "l", "k", "value"]);
    let none = None::<usize>;
    t.push(row!["variance", n, none, none, r.variance]);
    for k in 1..=n {
        t.push(row!["b", n, 0usize, k, r.b[k - 1]]);
    }
    for k in 1..=n {
        for l in 1..=n - k {
            t.push(row!["db", n, l, k, r.db_at(l, k)]);
        }
    }
    for k in 1..=n {
        let fk = factorial(k);
        t.push(row!["j_prime", n, none, k, r.jp[k - 1]]);
        t.push(row!["k_prime", n, none, k, r.kp[k - 1]]);
        t.push(row!["j", n, none, k, fk * r.jp[k - 1]]);
        t.push(row!["k_full", n, none, k, fk * r.kp[k - 1]]);
    }
    let mut rep = Report::new(t);
    rep.note("n", n);
    rep.note("exact", r.exact);
    rep.note("tolerance", ids.tolerance);
    rep.note("identities_checked", ids.entries.len());
    rep.note("worst_identity_residual", ids.worst_residual());
    rep.note("min_db", r.min_db());
    rep.failures = failures(&ids, "");
    Ok(rep)
}

fn verify(a: &VerifyArgs, seed: u64) -> Result<Report> {
    let batch = instance_batch(seed, a.instances, a.max_n)?;
    let cfg = exact_config(a.tolerance);
    let mut t = Table::new(&[
        "instance", "label", "kind", "arity", "n", "identity", "k", "residual", "allowed", "pass",
        "seed",
    ]);
    let mut rep_failures = Vec::new();
    let mut worst: f64 = 0.0;
    for (i, inst) in batch.iter().enumerate() {
        let (table, r, mut ids) = analyze(&inst.space, &inst.f, &cfg)?;
        ids.merge(interpolation_check(&table, &inst.space, &inst.f, &cfg)?);
        let e = hoeffding_energies(&inst.space, &inst.f, &cfg)?;
        ids.merge(energy_cross_check(&e, &r, cfg.tolerance_for(false)));
        let kind = serde_json::to_value(inst.kind)?;
        for e in &ids.entries {
            t.push(row![
                i,
                inst.label.as_str(),
                kind.as_str().unwrap_or_default(),
                inst.arity,
                inst.space.n(),
                e.name.as_str(),
                e.k,
                e.residual,
                e.allowed,
                e.pass,
                seed,
            ]);
            if e.allowed > 0.0 {
                worst = worst.max(e.residual.abs() / e.allowed);
            }
        }
        rep_failures.extend(failures(&ids, &format!("{}: ", inst.label)));
    }
    let mut rep = Report::new(t);
    rep.note("instances", batch.len());
    rep.note("worst_residual_over_allowed", worst);
    rep.failures = rep_failures;
    Ok(rep)
}

fn estimate(a: &EstimateArgs, mc: &EstimatorConfig) -> Result<Report> {
    let (space, f) = instance(&a.instance)?;
    let n = space.n();
    let ks = a.k.clone().unwrap_or_else(|| (1..=n).collect());
    let exact = if space.state_bits() <= ExactConfig::default().max_state_bits {
        Some(analyze(&space, &f, &ExactConfig::default())?.1)
    } else {
        None
    };
    let mut t = Table::new(&[
        "quantity", "n", "k", "mean", "stderr", "samples", "seed", "exact", "z",
    ]);
    let v = estimate_variance(&space, &f, mc)?;
    let ev = exact.as_ref().map(|r| r.variance);
    t.push(row![
        "variance",
        n,
        None::<usize>,
        v.mean,
        v.stderr,
        v.count,
        mc.seed,
        ev,
        ev.map(|x| v.z_score(x)),
    ]);
    for &k in &ks {
        let e = estimate_b_k(&space, &f, k, mc)?;
        let eb = exact.as_ref().map(|r| r.b[k - 1]);
        t.push(row![
            "b",
            n,
            k,
            e.mean,
            e.stderr,
            e.count,
            mc.seed,
            eb,
            eb.map(|x| e.z_score(x)),
        ]);
    }
    let mut rep = Report::new(t);
    rep.note("n", n);
    rep.note("exact_available", exact.is_some());
    Ok(rep)
}

fn word_model(w: &WordArgs) -> Result<LcsModel> {
    match w.p {
        Some(p) => LcsModel::binary(w.n, p),
        None => LcsModel::uniform(w.n, w.alphabet),
    }
}

/// Whether enumerating the `2n` letters fits the exact engine.
fn enumerable(model: &LcsModel) -> bool {
    model
        .space()
        .is_ok_and(|s| s.state_bits() <= ExactConfig::default().max_state_bits)
}

fn lcs_upper(w: &WordArgs, mc: &EstimatorConfig) -> Result<Report> {
    let model = word_model(w)?;
    let r = upper_bound_report(&model, mc)?;
    let mut t = Table::new(&[
        "n",
        "variance",
        "stderr",
        "exact",
        "efron_stein_bound",
        "halved_bound",
        "symmetric",
        "applicable_bound",
        "lower_bound",
        "lower_bound_stderr",
        "pass",
        "samples",
        "seed",
    ]);
    let (var, se) = match (r.exact_variance, r.variance) {
        (Some(v), _) => (v, 0.0),
        (None, Some(e)) => (e.mean, e.stderr),
        (None, None) => (f64::NAN, f64::NAN),
    };
    t.push(row![
        r.n,
        var,
        se,
        r.exact_variance.is_some(),
        r.efron_stein_bound,
        r.halved_bound,
        r.symmetric,
        r.applicable_bound(),
        r.last_b_lower_bound.map(|e| e.mean),
        r.last_b_lower_bound.map(|e| e.stderr),
        r.pass,
        mc.samples,
        mc.seed,
    ]);
    let mut rep = Report::new(t);
    if !r.pass {
        rep.failures.push(format!(
            "lcs_variance_upper_bound: Var {var:.6e} (stderr {se:.3e}) exceeds {:.6e}",
            r.applicable_bound()
        ));
    }
    Ok(rep)
}

fn lcs_blast(w: &WordArgs, mc: &EstimatorConfig) -> Result<Report> {
    let model = word_model(w)?;
    let r = blast_lcs_estimate(&model, mc)?;
    let exact = if enumerable(&model) {
        Some(blast_lcs_exact(&model, &ExactConfig::default())?)
    } else {
        None
    };
    let mut t = Table::new(&[
        "n",
        "b_last",
        "stderr",
        "variance_lower_bound",
        "variance_lower_bound_stderr",
        "exact_b_last",
        "z",
        "samples",
        "seed",
    ]);
    t.push(row![
        model.n,
        r.b_last.mean,
        r.b_last.stderr,
        r.variance_lower_bound.mean,
        r.variance_lower_bound.stderr,
        exact,
        exact.map(|x| r.b_last.z_score(x)),
        mc.samples,
        mc.seed,
    ]);
    let mut rep = Report::new(t);
    rep.note("symmetric", model.is_symmetric());
    Ok(rep)
}

fn lcs_b1(w: &WordArgs, mc: &EstimatorConfig) -> Result<Report> {
    let model = word_model(w)?;
    let e = b1_lcs_estimate(&model, mc)?;
    let exact = if enumerable(&model) {
        let (_, r, _) = analyze(&model.space()?, &model.function()?, &ExactConfig::default())?;
        Some(r.b[0])
    } else {
        None
    };
    let mut t = Table::new(&["n", "b1", "stderr", "exact_b1", "z", "samples", "seed"]);
    t.push(row![
        model.n,
        e.mean,
        e.stderr,
        exact,
        exact.map(|x| e.z_score(x)),
        mc.samples,
        mc.seed,
    ]);
    Ok(Report::new(t))
}

fn lcs_figure1(a: &Figure1Args, mc: &EstimatorConfig) -> Result<Report> {
    if a.step == 0 {
        return Err(varjack::Error::Config("--step must be positive".into()));
    }
    let spec = if a.paired {
        PerturbationSpec::paired_letters(a.replicas)
    } else {
        PerturbationSpec::blocks(Word::parse(&a.w1)?, Word::parse(&a.w2)?, a.replicas)?
    };
    let ns: Vec<usize> = (a.step..=a.n).step_by(a.step).collect();
    let s = cell_series(&ns, &spec, mc)?;
    let mut t = Table::new(&["n", "statistic", "stderr", "z", "replicas", "seed"]);
    for r in &s.rows {
        t.push(row![
            r.n,
            r.statistic.mean,
            r.statistic.stderr,
            r.statistic.z_score(0.0),
            a.replicas,
            mc.seed.wrapping_add(r.n as u64),
        ]);
    }
    let mut rep = Report::new(t);
    rep.note("min_z", s.min_z());
    rep.note("slope", s.slope);
    rep.note("slope_stderr", s.slope_stderr);
    rep.note("slope_ci95", s.slope_ci95);
    rep.note("plateau", s.plateau);
    rep.note("plateau_ci95", s.plateau_ci95);
    Ok(rep)
}

fn lcs_omitted(a: &OmittedArgs, mc: &EstimatorConfig) -> Result<Report> {
    let model = LcsModel::new(
        a.n,
        with_omitted_letter(a.alphabet, a.p)?,
        FiniteDistribution::uniform(a.alphabet)?,
    )?;
    let r = omitted_letter_bound(&model, a.alphabet, mc)?;
    let bound = match a.form {
        BoundForm::Linear => r.linear_bound,
        BoundForm::Quadratic => r.quadratic_bound,
    };
    let mut t = Table::new(&[
        "n",
        "p",
        "delta_e",
        "delta_e_stderr",
        "linear_bound",
        "linear_bound_stderr",
        "quadratic_bound",
        "quadratic_bound_stderr",
        "variance",
        "variance_stderr",
        "samples",
        "seed",
    ]);
    t.push(row![
        a.n,
        r.p,
        r.delta_e.mean,
        r.delta_e.stderr,
        r.linear_bound.mean,
        r.linear_bound.stderr,
        r.quadratic_bound.mean,
        r.quadratic_bound.stderr,
        r.variance.mean,
        r.variance.stderr,
        mc.samples,
        mc.seed,
    ]);
    let mut rep = Report::new(t);
    rep.note(
        "form",
        match a.form {
            BoundForm::Linear => "linear",
            BoundForm::Quadratic => "quadratic",
        },
    );
    rep.note("bound", bound.mean);
    rep.note("bound_stderr", bound.stderr);
    Ok(rep)
}

fn lcs_varsup(a: &VarsupArgs) -> Result<Report> {
    let v = varsup_constant(a.p0, a.gamma_half)?;
    let gamma_low = a.p0 * a.p0 + (1.0 - a.p0) * (1.0 - a.p0);
    let mut t = Table::new(&["p0", "gamma_half_upper", "gamma_low", "constant"]);
    t.push(row![a.p0, a.gamma_half, gamma_low, v]);
    Ok(Report::new(t))
}

fn gaussian(a: &GaussianArgs) -> Result<Report> {
    let g = PolynomialG::new(a.coeffs.clone());
    let rows = convergence_table(&g, &a.ns, a.kmax)?;
    let targets = gaussian_targets(&g, a.kmax);
    let mut t = Table::new(&["n", "k", "j", "eta", "j_gap", "k_full", "theta", "k_gap"]);
    for r in &rows {
        t.push(row![r.n, r.k, r.j, r.eta, r.j_gap, r.kk, r.theta, r.k_gap]);
    }
    let mut rep = Report::new(t);
    rep.note("variance", targets.variance);
    rep.note("gaps_decrease", gaps_decrease(&rows, 1e-12));
    rep.note("worst_series_residual", targets.report.worst_residual());
    rep.failures = failures(&targets.report, "");
    Ok(rep)
}

fn hoeffding(a: &HoeffdingArgs) -> Result<Report> {
    let r = hoeffding_report(&a.targets, a.n, &ExactConfig::default())?;
    let mut t = Table::new(&["n", "k", "target", "amplitude", "achieved", "residual"]);
    for k in 1..=a.n {
        let target = a.targets.get(k - 1).copied().unwrap_or(0.0);
        let achieved = r.achieved.as_ref().map(|v| v[k - 1]);
        t.push(row![
            a.n,
            k,
            target,
            r.amplitudes.get(k - 1).copied().unwrap_or(0.0),
            achieved,
            achieved.map(|x| x - target),
        ]);
    }
    let mut rep = Report::new(t);
    rep.note("verified", r.achieved.is_some());
    rep.note("max_residual", r.max_residual);
    rep.note("route_gap", r.route_gap);
    if let Some(m) = r.max_residual {
        if m > HOEFFDING_TOL {
            rep.failures.push(format!(
                "hoeffding_round_trip: residual {m:.3e} exceeds {HOEFFDING_TOL:.1e}"
            ));
        }
        if !r.routes_agree {
            rep.failures.push(format!(
                "energy_vs_table: residual {:.3e}",
                r.route_gap.unwrap_or(f64::NAN)
            ));
        }
    }
    Ok(rep)
}

fn hyper(a: &HyperArgs) -> Result<Report> {
    let mut t = Table::new(&["n", "r", "r_over_sqrt_n", "error", "evaluations", "pass"]);
    let mut fails = Vec::new();
    for n in 1..=a.max_n {
        let h = hyper_gap_ratio(n)?;
        let pass = h.normalised >= HYPER_RATIO_BOUND;
        if !pass {
            fails.push(format!(
                "hyper_ratio[n={n}]: R(n)/sqrt(n) = {:.6} below {HYPER_RATIO_BOUND:.6}",
                h.normalised
            ));
        }
        t.push(row![n, h.r, h.normalised, h.error, h.evaluations, pass]);
    }
    let mut rep = Report::new(t);
    rep.note("bound", HYPER_RATIO_BOUND);
    rep.failures = fails;
    Ok(rep)
}
