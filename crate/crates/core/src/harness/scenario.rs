//! Random and structured guest scenarios, and their JSON file format.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::bus::{word_width, Word};
use crate::msb::{ColSide, ColWrite, MsbPe, MsbScenario, RowSide, RowWrite};
use crate::pc_graph::LinePcGraph;

pub const SCENARIO_SCHEMA: &str = "busmesh-scenario-v1";

/// Switch pattern of a structured scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    AllOpen,
    AllClosed,
    /// Even PEs closed, odd PEs open, on both axes.
    Alternating,
}

fn check_probability(name: &str, p: f64) -> Result<(), HarnessError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(HarnessError::Config(format!("{name} = {p} is not a probability")))
    }
}

fn random_write(rng: &mut ChaCha8Rng, p_write: f64, w: u32) -> Option<(bool, Word)> {
    rng.gen_bool(p_write)
        .then(|| (rng.gen_bool(0.5), rng.gen_range(0..(1 as Word) << w)))
}

/// Draws one scenario from `rng`: every switch closed with probability
/// `p_closed`, every PE writing each axis with probability `p_write` through
/// a random port, payloads uniform over the word range.
pub fn random_scenario(
    n: usize,
    rng: &mut ChaCha8Rng,
    p_closed: f64,
    p_write: f64,
) -> Result<MsbScenario, HarnessError> {
    check_probability("p_closed", p_closed)?;
    check_probability("p_write", p_write)?;
    let w = word_width(n);
    let pes = (0..n * n)
        .map(|_| {
            let row_switch = rng.gen_bool(p_closed);
            let col_switch = rng.gen_bool(p_closed);
            let row_write = random_write(rng, p_write, w).map(|(right, payload)| RowWrite {
                side: if right { RowSide::Right } else { RowSide::Left },
                payload,
            });
            let col_write = random_write(rng, p_write, w).map(|(down, payload)| ColWrite {
                side: if down { ColSide::Down } else { ColSide::Up },
                payload,
            });
            MsbPe {
                row_switch,
                col_switch,
                row_write,
                col_write,
            }
        })
        .collect();
    Ok(MsbScenario::new(n, pes)?)
}

/// One guest bus line drawn like a row of [`random_scenario`].
pub fn random_line(n: usize, rng: &mut ChaCha8Rng, p_closed: f64, p_write: f64) -> Result<LinePcGraph, HarnessError> {
    check_probability("p_closed", p_closed)?;
    check_probability("p_write", p_write)?;
    let w = word_width(n);
    let mut switches = Vec::with_capacity(n);
    let mut init = vec![None; 2 * n];
    for j in 0..n {
        switches.push(rng.gen_bool(p_closed));
        if let Some((right, payload)) = random_write(rng, p_write, w) {
            init[2 * j + right as usize] = Some(payload);
        }
    }
    LinePcGraph::new(w, switches, init).map_err(|e| HarnessError::Config(e.to_string()))
}

/// Deterministic in `seed`.
pub fn generate_scenario(n: usize, seed: u64, p_closed: f64, p_write: f64) -> Result<MsbScenario, HarnessError> {
    random_scenario(n, &mut ChaCha8Rng::seed_from_u64(seed), p_closed, p_write)
}

/// A preset switch pattern with random writers.
pub fn preset_scenario(n: usize, preset: Preset, seed: u64, p_write: f64) -> Result<MsbScenario, HarnessError> {
    let mut s = generate_scenario(n, seed, 0.0, p_write)?;
    for i in 0..n {
        for j in 0..n {
            let pe = s.pe_mut(i, j);
            let (r, c) = match preset {
                Preset::AllOpen => (false, false),
                Preset::AllClosed => (true, true),
                Preset::Alternating => (j % 2 == 0, i % 2 == 0),
            };
            pe.row_switch = r;
            pe.col_switch = c;
        }
    }
    Ok(s)
}

#[derive(Serialize, Deserialize)]
struct ScenarioFile {
    schema: String,
    scenario: MsbScenario,
}

pub fn scenario_to_json(s: &MsbScenario) -> String {
    let file = ScenarioFile {
        schema: SCENARIO_SCHEMA.to_string(),
        scenario: s.clone(),
    };
    serde_json::to_string_pretty(&file).expect("scenarios always serialize")
}

pub fn scenario_from_json(text: &str) -> Result<MsbScenario, HarnessError> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
    if file.schema != SCENARIO_SCHEMA {
        return Err(HarnessError::Config(format!(
            "unknown scenario schema {:?}",
            file.schema
        )));
    }
    file.scenario.validate()?;
    Ok(file.scenario)
}

pub fn save_scenario(path: &Path, s: &MsbScenario) -> Result<(), HarnessError> {
    std::fs::write(path, scenario_to_json(s))?;
    Ok(())
}

pub fn load_scenario(path: &Path) -> Result<MsbScenario, HarnessError> {
    scenario_from_json(&std::fs::read_to_string(path)?)
}
