use std::collections::BTreeMap;
use std::path::Path;

use partex_core::classifier::{self, ClassifierModel};
use partex_core::esf::{esf_log_probability, PsiSpec};
use partex_core::estimation::{bootstrap_ci, mle_psi, BootstrapConfig};
use partex_core::hypothesis::{self, TestResult};
use partex_core::urn::sample_hoppe_urn;
use partex_core::{Abundance, Seed};
use serde_json::{json, Value};

use crate::args::{ClassifyCommand, Command, MleArgs, PredictArgs, ProbArgs, SampleArgs, TestCommand};
use crate::io;
use crate::CliError;

/// What a command echoes back plus its outcome.
pub struct Outcome {
    pub command: &'static str,
    pub inputs: Value,
    pub seed: Option<Seed>,
    pub result: Result<Value, CliError>,
}

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Sample(args) => Outcome {
            command: "sample",
            inputs: json!({ "n": args.n, "psi": args.psi.get(), "out": args.out }),
            seed: Some(args.seed),
            result: sample(&args),
        },
        Command::Prob(args) => Outcome {
            command: "prob",
            inputs: json!({ "data": args.data, "psi": psi_spec_json(args.psi) }),
            seed: None,
            result: prob(&args),
        },
        Command::Mle(args) => Outcome {
            command: "mle",
            inputs: json!({ "data": args.data, "ci": args.ci }),
            seed: args.ci.is_some().then_some(args.seed),
            result: mle(&args),
        },
        Command::Test(test) => run_test(test),
        Command::Classify(cmd) => run_classify(cmd),
    }
}

fn psi_spec_json(spec: PsiSpec) -> Value {
    match spec {
        PsiSpec::Absolute => json!("a"),
        PsiSpec::Relative => json!("r"),
        PsiSpec::Explicit(p) => json!(p.get()),
    }
}

fn sample(args: &SampleArgs) -> Result<Value, CliError> {
    let s = sample_hoppe_urn(args.n as usize, args.psi, args.seed)?;
    io::write_lines(&args.out, s.values())?;
    let abund = s.abundance();
    Ok(json!({ "n": abund.n(), "K": abund.species() }))
}

fn prob(args: &ProbArgs) -> Result<Value, CliError> {
    let abund = io::read_sample(&args.data)?.abundance();
    let psi = args.psi.resolve(abund.n())?;
    let logp = esf_log_probability(&abund, PsiSpec::Explicit(psi))?;
    Ok(json!({
        "n": abund.n(),
        "K": abund.species(),
        "psi": psi.get(),
        "log_probability": logp,
        "probability": logp.exp(),
    }))
}

fn ci_config(values: &[String]) -> Result<BootstrapConfig, CliError> {
    let mut config = BootstrapConfig::default();
    let bad = |what: &str, v: &str| CliError::Usage(format!("--ci {what}: invalid value {v:?}"));
    if let Some(v) = values.first() {
        config.level = v.parse().ok().filter(|l| *l > 0.0 && *l < 1.0).ok_or_else(|| bad("level", v))?;
    }
    if let Some(v) = values.get(1) {
        config.rounds = v.parse().ok().filter(|r| *r >= 2).ok_or_else(|| bad("rounds", v))?;
    }
    if let Some(v) = values.get(2) {
        config.frac = v.parse().ok().filter(|f| *f > 0.0 && *f <= 1.0).ok_or_else(|| bad("frac", v))?;
    }
    Ok(config)
}

fn mle(args: &MleArgs) -> Result<Value, CliError> {
    let config = args.ci.as_deref().map(ci_config).transpose()?;
    let sample = io::read_sample(&args.data)?;
    let est = mle_psi(&sample.abundance())?;
    let mut report = json!({
        "psi_hat": est.psi_hat.get(),
        "K": est.species,
        "n": est.n,
        "iterations": est.iterations,
        "residual": est.residual,
    });
    if let Some(config) = config {
        let ci = bootstrap_ci(&sample, config, args.seed)?;
        report["ci"] = json!({
            "lower": ci.lower,
            "upper": ci.upper,
            "level": ci.level,
            "rounds": ci.rounds,
            "frac": ci.frac,
            "degenerate_resamples": ci.degenerate_resamples,
        });
    }
    Ok(report)
}

fn test_json(r: TestResult) -> Value {
    json!({
        "statistic_name": r.statistic_name.to_string(),
        "statistic": r.statistic,
        "df": r.df,
        "p_value": r.p_value,
        "extras": r.extras,
    })
}

fn abundances(paths: &[&Path]) -> Result<Vec<Abundance>, CliError> {
    paths.iter().map(|p| Ok(io::read_sample(p)?.abundance())).collect()
}

fn run_test(test: TestCommand) -> Outcome {
    match test {
        TestCommand::Psi { data, psi } => Outcome {
            command: "test psi",
            inputs: json!({ "data": data, "psi": psi_spec_json(psi) }),
            seed: None,
            result: (|| {
                let abund = io::read_sample(&data)?.abundance();
                Ok(test_json(hypothesis::score_test(&abund, psi)?))
            })(),
        },
        TestCommand::Two { first, second } => Outcome {
            command: "test two",
            inputs: json!({ "first": first, "second": second }),
            seed: None,
            result: (|| {
                let a = abundances(&[&first, &second])?;
                Ok(test_json(hypothesis::lrt_two_samples(&a[0], &a[1])?))
            })(),
        },
        TestCommand::Mult { files, csv, header } => Outcome {
            command: "test mult",
            inputs: json!({ "files": files, "csv": csv, "header": header }),
            seed: None,
            result: (|| {
                let abunds = match &csv {
                    Some(path) => io::read_columns(path, header)?
                        .iter()
                        .map(|s| s.abundance())
                        .collect(),
                    None => abundances(&files.iter().map(|p| p.as_path()).collect::<Vec<_>>())?,
                };
                Ok(test_json(hypothesis::lrt_samples(&abunds)?))
            })(),
        },
        TestCommand::Pd { data, rounds, seed } => Outcome {
            command: "test pd",
            inputs: json!({ "data": data, "rounds": rounds }),
            seed: Some(seed),
            result: (|| {
                let sample = io::read_sample(&data)?;
                Ok(test_json(hypothesis::watterson_test(&sample, rounds as usize, seed)?))
            })(),
        },
    }
}

fn class_counts(model: &ClassifierModel, labels: &[String]) -> BTreeMap<String, usize> {
    let mut counts: BTreeMap<String, usize> =
        model.classes().iter().map(|c| (c.clone(), 0)).collect();
    for l in labels {
        *counts.entry(l.clone()).or_insert(0) += 1;
    }
    counts
}

fn load_model(path: &Path) -> Result<ClassifierModel, CliError> {
    Ok(ClassifierModel::from_json(&io::read_text(path)?)?)
}

fn predict_inputs(args: &PredictArgs) -> Value {
    json!({ "model": args.model, "test": args.test, "out": args.out, "header": args.header })
}

fn run_classify(cmd: ClassifyCommand) -> Outcome {
    match cmd {
        ClassifyCommand::Fit {
            train,
            labels,
            model,
            header,
        } => Outcome {
            command: "classify fit",
            inputs: json!({ "train": train, "labels": labels, "model": model, "header": header }),
            seed: None,
            result: (|| {
                let points = io::read_matrix(&train, header)?;
                let ys = io::read_lines(&labels)?;
                let fitted = classifier::fit(&points, &ys)?;
                io::write_text(&model, &fitted.to_json())?;
                let classes: Vec<Value> = fitted
                    .classes()
                    .iter()
                    .enumerate()
                    .map(|(c, label)| {
                        let features: Vec<Value> = (0..fitted.n_features())
                            .map(|f| {
                                let fm = fitted.feature_model(c, f);
                                json!({ "m": fm.m(), "distinct": fm.frequencies().len(), "psi_hat": fm.psi_hat().get() })
                            })
                            .collect();
                        json!({ "label": label, "features": features })
                    })
                    .collect();
                Ok(json!({ "n_features": fitted.n_features(), "classes": classes }))
            })(),
        },
        ClassifyCommand::Marginal(args) => Outcome {
            command: "classify marginal",
            inputs: predict_inputs(&args),
            seed: None,
            result: (|| {
                let model = load_model(&args.model)?;
                let test = io::read_matrix(&args.test, args.header)?;
                let labels = classifier::classify_marginal(&model, &test)?;
                io::write_lines(&args.out, &labels)?;
                Ok(json!({ "rows": labels.len(), "counts": class_counts(&model, &labels) }))
            })(),
        },
        ClassifyCommand::Simultaneous(args) => Outcome {
            command: "classify simultaneous",
            inputs: predict_inputs(&args),
            seed: None,
            result: (|| {
                let model = load_model(&args.model)?;
                let test = io::read_matrix(&args.test, args.header)?;
                let out = classifier::classify_simultaneous(&model, &test)?;
                io::write_lines(&args.out, &out.labels)?;
                Ok(json!({
                    "rows": out.labels.len(),
                    "counts": class_counts(&model, &out.labels),
                    "sweeps": out.sweeps,
                    "converged": out.converged,
                }))
            })(),
        },
    }
}
