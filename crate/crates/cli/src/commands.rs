use std::f64::consts::PI;

use serde_json::{json, Value};
use stadium_limits::cascade::{
    cascade_mean, moment_bound_check, stripe_cascades, transition_histogram,
};
use stadium_limits::induced::mu0_of_x;
use stadium_limits::limits::{
    anomalous_factor, birkhoff_sums, clt_report, correlation, flow_birkhoff, tail_report,
    theoretical_c, variance_growth, y_const, Normalization,
};
use stadium_limits::observables::{
    compute_i, critical_ell, mean_tau, profile, Classification, FlowObservable, Observable,
    DEFAULT_NODES,
};
use stadium_limits::report;
use stadium_limits::sampling::{draw_mu0, rng_for, SeedSpec};
use stadium_limits::stats;
use stadium_limits::validate::{validate, Tier};
use stadium_limits::{forward, in_x, StadiumGeometry};

use crate::config::{Defaults, RunConfig};

/// What a command produced.
pub struct Outcome {
    pub results: Value,
    /// `(file name, contents)` pairs written to the output directory.
    pub artifacts: Vec<(String, String)>,
    /// Named random streams the command drew from.
    pub streams: Vec<String>,
    /// Acceptance verdict, for `validate` only.
    pub passed: Option<bool>,
}

impl Outcome {
    fn new(results: Value, streams: &[&str]) -> Self {
        Outcome {
            results,
            artifacts: Vec::new(),
            streams: streams.iter().map(|s| s.to_string()).collect(),
            passed: None,
        }
    }

    fn with(mut self, name: &str, contents: String) -> Self {
        self.artifacts.push((name.to_string(), contents));
        self
    }
}

type Res<T> = Result<T, String>;

fn lib<T>(r: stadium_limits::Result<T>) -> Res<T> {
    r.map_err(|e| e.to_string())
}

fn geometry(cfg: &RunConfig) -> Res<StadiumGeometry> {
    lib(StadiumGeometry::new(cfg.ell))
}

fn observable(geom: &StadiumGeometry, cfg: &RunConfig) -> Res<Observable> {
    lib(Observable::by_name(geom, &cfg.observable))
}

/// The observable, shifted to zero mean when it is not centered already.
fn centered(geom: &StadiumGeometry, cfg: &RunConfig) -> Res<Observable> {
    let obs = observable(geom, cfg)?;
    Ok(if obs.is_centered() || obs.is_zero() {
        obs
    } else {
        obs.centered(geom, DEFAULT_NODES)
    })
}

pub fn constants(cfg: &RunConfig) -> Res<Outcome> {
    let geom = geometry(cfg)?;
    let tau0 = Observable::tau0(&geom);
    let obs = observable(&geom, cfg)?;
    let c_tau0 = theoretical_c(&geom, &tau0).ok();
    Ok(Outcome::new(
        json!({
            "ell": cfg.ell,
            "I_tau": compute_i(&geom, &Observable::tau(), DEFAULT_NODES),
            "tau_bar": mean_tau(&geom),
            "ell_star": critical_ell(),
            "I_tau0": compute_i(&geom, &tau0, DEFAULT_NODES),
            "c_tau0": c_tau0,
            "y": y_const(),
            "two_y_minus_one": anomalous_factor(),
            "mu0_x": mu0_of_x(&geom),
            "mu0_x_reference": PI / (2.0 * (PI + cfg.ell)),
            "observable": obs.name(),
            "I_observable": compute_i(&geom, &obs, DEFAULT_NODES),
        }),
        &[],
    ))
}

const SIMULATE: Defaults = Defaults {
    n: 10_000,
    n_grid: &[],
    samples: 1,
};

pub fn simulate(cfg: &RunConfig) -> Res<Outcome> {
    let geom = geometry(cfg)?;
    let obs = observable(&geom, cfg)?;
    let n = cfg.n_or(SIMULATE);
    let mut z = draw_mu0(
        &geom,
        &mut rng_for(SeedSpec::for_sample(cfg.master_seed, "simulate", 0)),
    );
    let mut csv = String::from("k,r,theta,component,tau,value\n");
    let (mut sum, mut flight, mut visits) = (0.0, 0.0, 0u64);
    for k in 0..n {
        let step = lib(forward(&geom, z))?;
        let v = obs.value_with_step(&geom, z, &step);
        visits += u64::from(lib(in_x(&geom, z))?);
        csv.push_str(&format!(
            "{k},{},{},{:?},{},{v}\n",
            z.r,
            z.theta,
            geom.classify(z.r),
            step.tau
        ));
        sum += v;
        flight += step.tau;
        z = step.next;
    }
    Ok(Outcome::new(
        json!({
            "n": n,
            "birkhoff_sum": sum,
            "mean_free_path": flight / n.max(1) as f64,
            "visits_to_x": visits,
        }),
        &["simulate"],
    )
    .with("trajectory.csv", csv))
}

const TAILS: Defaults = Defaults {
    n: 0,
    n_grid: &[],
    samples: 1_000_000,
};

pub fn tails(cfg: &RunConfig) -> Res<Outcome> {
    let geom = geometry(cfg)?;
    let obs = observable(&geom, cfg)?;
    let rep = lib(tail_report(
        &geom,
        &obs,
        cfg.samples_or(TAILS),
        cfg.master_seed,
        50,
        300,
    ))?;
    Ok(Outcome::new(
        json!({
            "samples": rep.samples,
            "mean_return_time": rep.mean_return_time,
            "return_time": rep.return_time,
            "induced": rep.induced,
        }),
        &["tails"],
    )
    .with("tails.csv", report::tails_csv(&rep, 1000)))
}

const TRANSITIONS: Defaults = Defaults {
    n: 100,
    n_grid: &[100],
    samples: 100_000,
};

pub fn transitions(cfg: &RunConfig) -> Res<Outcome> {
    let geom = geometry(cfg)?;
    let samples = cfg.samples_or(TRANSITIONS);
    let mut hists = Vec::new();
    let mut rows = Vec::new();
    for n in cfg.n_list(TRANSITIONS) {
        let h = lib(transition_histogram(&geom, n, samples, cfg.master_seed))?;
        let worst = h
            .binned(10)
            .iter()
            .map(|b| (b.empirical - b.theory).abs() / b.theory)
            .fold(0.0, f64::max);
        rows.push(json!({
            "n": n,
            "mass_in_support": h.mass(n as f64 / 3.0, 3.0 * n as f64),
            "max_binned_relative_deviation": worst,
        }));
        hists.push(h);
    }
    Ok(Outcome::new(
        json!({ "samples": samples, "per_n": rows }),
        &["transitions/{n}"],
    )
    .with("transitions.csv", report::transitions_csv(&hists)))
}

const CASCADE: Defaults = Defaults {
    n: 100,
    n_grid: &[100, 200],
    samples: 20_000,
};

pub fn cascade(cfg: &RunConfig) -> Res<Outcome> {
    let geom = geometry(cfg)?;
    let obs = observable(&geom, cfg)?;
    let samples = cfg.samples_or(CASCADE);
    let ns = cfg.n_list(CASCADE);
    let mut results = json!({ "samples": samples, "target": y_const() - 1.0 });
    let mut out = Outcome::new(Value::Null, &["cascade/{n}", "cascade-bootstrap"]);
    if obs.is_zero() || compute_i(&geom, &obs, DEFAULT_NODES).abs() <= 1e-8 {
        let capped: Vec<Value> = ns
            .iter()
            .map(|&n| {
                let recs = lib(stripe_cascades(
                    &geom,
                    &obs,
                    n,
                    samples,
                    cfg.master_seed,
                    cfg.cap_k,
                ))?;
                let f = recs.iter().filter(|r| r.stopped_by_cap).count() as f64 / samples as f64;
                Ok(json!({ "n": n, "capped_fraction": f }))
            })
            .collect::<Res<_>>()?;
        results["per_n"] = Value::Array(capped);
    } else {
        let means = lib(cascade_mean(
            &geom,
            &obs,
            &ns,
            samples,
            cfg.master_seed,
            None,
        ))?;
        let moments = lib(moment_bound_check(
            &geom,
            &obs,
            cfg.s,
            &ns,
            samples,
            cfg.master_seed,
        ))?;
        results["means"] = json!(means);
        results["moments"] = json!(moments);
        out = out.with("cascade_means.csv", report::cascade_csv(&means));
    }
    out.results = results;
    Ok(out)
}

const CLT: Defaults = Defaults {
    n: 32_768,
    n_grid: &[],
    samples: 4000,
};

pub fn clt(cfg: &RunConfig) -> Res<Outcome> {
    let geom = geometry(cfg)?;
    let obs = centered(&geom, cfg)?;
    let (n, m) = (cfg.n_or(CLT), cfg.samples_or(CLT));
    let prof = lib(profile(&geom, &obs, DEFAULT_NODES, 1000, cfg.master_seed))?;
    let normalization = if prof.classification == Classification::P2 || obs.is_zero() {
        // Standard regime: sigma^2 estimated from the same sums.
        let raw = lib(birkhoff_sums(&geom, &obs, n, m, cfg.master_seed, "clt"))?;
        Normalization::SqrtN {
            sigma2: (stats::variance(&raw) / n as f64).max(f64::MIN_POSITIVE),
        }
    } else {
        Normalization::SqrtCnLogn {
            c: lib(theoretical_c(&geom, &obs))?,
        }
    };
    let rep = lib(clt_report(
        &geom,
        &obs,
        n,
        m,
        cfg.master_seed,
        normalization,
    ))?;
    Ok(Outcome::new(
        json!({
            "n": rep.n,
            "samples": rep.samples,
            "classification": format!("{:?}", prof.classification),
            "I": prof.i,
            "normalization": rep.normalization,
            "ks_distance": rep.ks_distance,
            "empirical_variance": rep.empirical_variance,
            "variance_ratio": rep.variance_ratio,
            "mean": rep.mean,
        }),
        &["clt"],
    )
    .with("clt_samples.csv", report::clt_csv(&rep.values)))
}

const VARIANCE: Defaults = Defaults {
    n: 0,
    n_grid: &[1 << 10, 1 << 11, 1 << 12, 1 << 13, 1 << 14, 1 << 15],
    samples: 2000,
};

pub fn variance(cfg: &RunConfig) -> Res<Outcome> {
    let geom = geometry(cfg)?;
    let obs = centered(&geom, cfg)?;
    let vg = lib(variance_growth(
        &geom,
        &obs,
        &cfg.n_list(VARIANCE),
        cfg.samples_or(VARIANCE),
        cfg.master_seed,
    ))?;
    let c = theoretical_c(&geom, &obs).ok();
    Ok(Outcome::new(
        json!({
            "alpha": vg.alpha,
            "alpha_se": vg.alpha_se,
            "beta": vg.beta,
            "c": c,
            "alpha_over_c": c.map(|c| vg.alpha / c),
        }),
        &["variance"],
    )
    .with("variance_growth.csv", report::variance_csv(&vg)))
}

const CORRELATIONS: Defaults = Defaults {
    n: 0,
    n_grid: &[8, 16, 32, 64],
    samples: 0,
};

pub fn correlations(cfg: &RunConfig) -> Res<Outcome> {
    let geom = geometry(cfg)?;
    let obs = centered(&geom, cfg)?;
    let est = lib(correlation(
        &geom,
        &obs,
        &cfg.n_list(CORRELATIONS),
        cfg.pairs,
        cfg.master_seed,
    ))?;
    Ok(Outcome::new(
        json!({ "pairs": cfg.pairs, "estimates": est }),
        &["correlation", "correlation-bootstrap"],
    )
    .with("correlations.csv", report::correlations_csv(&est)))
}

const FLOW: Defaults = Defaults {
    n: 0,
    n_grid: &[],
    samples: 2000,
};

pub fn flow(cfg: &RunConfig) -> Res<Outcome> {
    let geom = geometry(cfg)?;
    let obs = centered(&geom, cfg)?;
    let phi = FlowObservable::spread(&obs);
    let fs = lib(flow_birkhoff(
        &geom,
        &phi,
        cfg.horizon,
        cfg.samples_or(FLOW),
        cfg.quad_nodes,
        cfg.master_seed,
    ))?;
    Ok(Outcome::new(
        json!({
            "horizon": fs.horizon,
            "samples": fs.normalized.len(),
            "J": fs.j,
            "c": fs.c,
            "ks_distance": stats::ks_normal(&fs.normalized),
            "variance_ratio": stats::variance(&fs.normalized),
        }),
        &["flow"],
    )
    .with("flow_samples.csv", report::clt_csv(&fs.normalized)))
}

pub fn run_validate(cfg: &RunConfig, tier: Tier, only: &[u32]) -> Res<Outcome> {
    let rep = lib(validate(tier, cfg.master_seed, only, |r| {
        println!("{}", r.line());
        for c in r.checks.iter().filter(|c| !c.passed) {
            println!("    {}: {} outside [{}, {}]", c.name, c.value, c.lo, c.hi);
        }
    }))?;
    let mut out = Outcome::new(
        json!({ "tier": rep.tier, "passed": rep.passed(), "criteria": rep.results }),
        &["(per criterion)"],
    );
    out.passed = Some(rep.passed());
    out.artifacts = rep.artifacts.into_iter().collect();
    Ok(out)
}
