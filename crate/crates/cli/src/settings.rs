// Copyright 2026 The stmqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Front-end sections of the config file.
//!
//! ```text
//! [plan]
//! f_nR_onequbit = 1000     # Hz
//! f_nR_gate = 100          # Hz
//! f_eR = 1e6               # Hz
//! T1e = 10e-3              # s
//!
//! [readout]
//! depth = 0.1
//! noise = 1.0
//! duration = 4.096e-6      # s
//! sample_rate = 16e9       # Hz
//! mixdown = 2.7e11         # Hz, optional
//! snr_threshold = 5
//!
//! [gate]
//! control = 0
//! target = 1
//! restore = target_adjusted   # or repeat_first
//! frame_correction = true
//! ```
//!
//! Every key is optional. A Rabi frequency that is missing or set to
//! `auto` falls back to the synchronized default derived from the chain's
//! frequency table. When the table gives no step to synchronize against
//! (a flat field, say) the nominal rates of [`NOMINAL_PLAN`] are used and a
//! note says so.

use stmqc::frequency::FrequencyTable;
use stmqc::planner::PulsePlan;
use stmqc::protocols::{
    default_electron_rabi, default_gate_rabi, default_onequbit_rabi, RestoreCarrier,
};
use stmqc::readout::ReadoutParams;
use stmqc::{Error, KvDocument, Result};

pub const DEFAULT_T1E: f64 = 10e-3;

pub const NOMINAL_PLAN: PulsePlan = PulsePlan {
    f_nr_onequbit: 1e3,
    f_nr_gate: 100.0,
    f_er: 1e6,
};

pub struct PlanSection {
    pub plan: PulsePlan,
    pub t1e: f64,
    pub notes: Vec<String>,
}

pub fn pulse_plan(doc: &KvDocument, table: &FrequencyTable) -> Result<PlanSection> {
    let mut notes = Vec::new();
    let plan = PulsePlan {
        f_nr_onequbit: rabi(
            doc,
            "f_nR_onequbit",
            &mut notes,
            NOMINAL_PLAN.f_nr_onequbit,
            || default_onequbit_rabi(table),
        )?,
        f_nr_gate: rabi(doc, "f_nR_gate", &mut notes, NOMINAL_PLAN.f_nr_gate, || {
            default_gate_rabi(table)
        })?,
        f_er: rabi(doc, "f_eR", &mut notes, NOMINAL_PLAN.f_er, || {
            default_electron_rabi(table)
        })?,
    };
    plan.validate()?;
    let t1e = doc.optional("plan", "T1e")?.unwrap_or(DEFAULT_T1E);
    Ok(PlanSection { plan, t1e, notes })
}

fn rabi(
    doc: &KvDocument,
    key: &str,
    notes: &mut Vec<String>,
    nominal: f64,
    derived: impl FnOnce() -> Result<f64>,
) -> Result<f64> {
    if let Some(e) = doc.get("plan", key) {
        if e.value != "auto" {
            return doc.required("plan", key);
        }
    }
    match derived() {
        Ok(v) => Ok(v),
        Err(Error::Domain(why)) => {
            notes.push(format!(
                "plan.{key}: no synchronized rate ({why}); using nominal {nominal:e} Hz"
            ));
            Ok(nominal)
        }
        Err(e) => Err(e),
    }
}

pub fn readout_params(doc: &KvDocument) -> Result<ReadoutParams> {
    let d = ReadoutParams::default();
    Ok(ReadoutParams {
        modulation_depth: doc
            .optional("readout", "depth")?
            .unwrap_or(d.modulation_depth),
        noise_sigma: doc.optional("readout", "noise")?.unwrap_or(d.noise_sigma),
        duration: doc.optional("readout", "duration")?.unwrap_or(d.duration),
        sample_rate: doc
            .optional("readout", "sample_rate")?
            .unwrap_or(d.sample_rate),
        mixdown_frequency: doc.optional("readout", "mixdown")?,
        snr_threshold: doc
            .optional("readout", "snr_threshold")?
            .unwrap_or(d.snr_threshold),
    })
}

pub struct GateSection {
    pub control: Option<usize>,
    pub target: Option<usize>,
    pub restore: RestoreCarrier,
    pub frame_correction: bool,
}

pub fn gate_section(doc: &KvDocument) -> Result<GateSection> {
    let restore = match doc.get("gate", "restore") {
        None => RestoreCarrier::TargetAdjusted,
        Some(e) => match e.value.as_str() {
            "target_adjusted" => RestoreCarrier::TargetAdjusted,
            "repeat_first" => RestoreCarrier::RepeatFirst,
            other => {
                return Err(Error::Parse {
                    file: doc.file.clone(),
                    line: e.line,
                    field: "gate.restore".into(),
                    message: format!("expected target_adjusted or repeat_first, got `{other}`"),
                })
            }
        },
    };
    Ok(GateSection {
        control: doc.optional("gate", "control")?,
        target: doc.optional("gate", "target")?,
        restore,
        frame_correction: doc.optional("gate", "frame_correction")?.unwrap_or(true),
    })
}
