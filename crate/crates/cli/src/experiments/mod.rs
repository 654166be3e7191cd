//! The five batch experiments. Each writes its artifacts through [`Output`]
//! and returns the key=value pairs of the one-line summary.

mod hbt;
mod hom;
mod lifetime;
pub(crate) mod spectrum;

use std::fmt::Display;

use serde_json::Value;

use qsim_core::correlator::{write_tag_csv, write_tag_file};
use qsim_core::{FitResult, TimeTagStream};

use crate::config::{Experiment, RunConfig, TagFormat};
use crate::error::CliResult;
use crate::output::Output;

#[derive(Debug, Default)]
pub struct Summary(Vec<(&'static str, String)>);

impl Summary {
    pub fn push(&mut self, key: &'static str, value: impl Display) -> &mut Self {
        self.0.push((key, value.to_string()));
        self
    }

    pub fn line(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
    }
}

pub fn run(cfg: &RunConfig, out: &mut Output) -> CliResult<Summary> {
    out.write_str("effective_config.json", &cfg.to_json())?;
    let summary = match cfg.experiment {
        Experiment::Hbt => hbt::run(cfg, out)?,
        Experiment::Lifetime => lifetime::run(cfg, out)?,
        Experiment::Spectrum => spectrum::run(cfg, out)?,
        Experiment::BesselSweep => spectrum::sweep(cfg, out)?,
        Experiment::Hom => hom::run(cfg, out)?,
    };
    out.write_str("summary.txt", &(summary.line() + "\n"))?;
    Ok(summary)
}

fn write_tags(out: &mut Output, format: TagFormat, streams: &[&TimeTagStream]) -> CliResult<()> {
    match format {
        TagFormat::Binary => out.write("tags.ttag", |w| Ok(write_tag_file(w, streams)?))?,
        TagFormat::Csv => out.write("tags.csv", |w| Ok(write_tag_csv(w, streams)?))?,
        TagFormat::None => return Ok(()),
    };
    Ok(())
}

fn write_json(out: &mut Output, name: &str, value: &Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("json value serializes") + "\n";
    out.write_str(name, &text)?;
    Ok(())
}

fn fit_json(fit: &FitResult) -> Value {
    serde_json::from_str(&fit.to_json()).expect("fit json parses")
}

fn with_fit(mut head: Value, fit: &FitResult) -> Value {
    head["fit"] = fit_json(fit);
    head
}

// fixed decimals keep the summary stable and short
fn fmt(v: f64, digits: usize) -> String {
    format!("{v:.digits$}")
}
