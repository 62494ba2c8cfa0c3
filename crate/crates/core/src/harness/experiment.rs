//! Verification and scaling campaigns and their CSV rows.

use std::fmt::Write as _;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::scenario::{random_line, random_scenario};
use super::HarnessError;
use crate::bus::BusSymbol;
use crate::kernel::{choose_segment_lengths, eval_bound, level_term, Fault, Host, MIN_HOST_SIDE};
use crate::mmpb::{BusModel, MmpbConfig, Shape};
use crate::msb::{msb_execute_broadcast, MsbScenario, Port};
use crate::pc_graph::{resolve_broadcast, LinePcGraph};

/// Largest side per axis mode.
pub const MAX_ROW_SIDE: usize = 1 << 16;
pub const MAX_FULL_SIDE: usize = 1 << 10;

/// Switch and writer probabilities cycled through when none are given.
pub const TRIAL_MIX: [(f64, f64); 12] = [
    (0.5, 0.05),
    (0.8, 0.2),
    (0.95, 0.5),
    (1.0, 0.05),
    (0.5, 0.2),
    (0.8, 0.5),
    (0.95, 0.05),
    (1.0, 0.2),
    (0.5, 0.5),
    (0.8, 0.05),
    (0.95, 0.2),
    (1.0, 0.5),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LevelPolicy {
    Fixed(usize),
    /// `L = log₂ n`.
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AxisMode {
    /// A single `1 × n` row.
    Row,
    /// The whole `n × n` array, rows then columns.
    Full,
}

impl AxisMode {
    pub fn name(self) -> &'static str {
        match self {
            AxisMode::Row => "row",
            AxisMode::Full => "full",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub ns: Vec<usize>,
    pub levels: LevelPolicy,
    /// Fixed segment lengths instead of the schedule.
    pub lengths: Option<Vec<usize>>,
    pub model: BusModel,
    pub axis: AxisMode,
    pub trials: usize,
    pub seed: u64,
    /// Fixed probabilities; `None` cycles through [`TRIAL_MIX`].
    pub p_closed: Option<f64>,
    pub p_write: Option<f64>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            ns: vec![16],
            levels: LevelPolicy::Fixed(1),
            lengths: None,
            model: BusModel::Word,
            axis: AxisMode::Full,
            trials: 10,
            seed: 0,
            p_closed: None,
            p_write: None,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.ns.is_empty() {
            return Err(HarnessError::Config("no side given".into()));
        }
        let max = match self.axis {
            AxisMode::Row => MAX_ROW_SIDE,
            AxisMode::Full => MAX_FULL_SIDE,
        };
        for &n in &self.ns {
            if !n.is_power_of_two() || !(MIN_HOST_SIDE..=max).contains(&n) {
                return Err(HarnessError::Config(format!(
                    "side {n} must be a power of two in {MIN_HOST_SIDE}..={max} for {} mode",
                    self.axis.name()
                )));
            }
            self.config(n)?;
        }
        for p in [self.p_closed, self.p_write].into_iter().flatten() {
            if !(0.0..=1.0).contains(&p) {
                return Err(HarnessError::Config(format!("{p} is not a probability")));
            }
        }
        Ok(())
    }

    /// Host configuration for side `n`.
    pub fn config(&self, n: usize) -> Result<MmpbConfig, HarnessError> {
        let lengths = match (&self.lengths, self.levels) {
            (Some(l), _) => l.clone(),
            (None, LevelPolicy::Fixed(levels)) => choose_segment_lengths(n, levels)?,
            (None, LevelPolicy::Log) => choose_segment_lengths(n, n.trailing_zeros() as usize)?,
        };
        Ok(MmpbConfig::new(n, lengths)?)
    }

    fn probabilities(&self, trial: usize) -> (f64, f64) {
        let (pc, pw) = TRIAL_MIX[trial % TRIAL_MIX.len()];
        (self.p_closed.unwrap_or(pc), self.p_write.unwrap_or(pw))
    }
}

/// One CSV line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub n: usize,
    #[serde(rename = "L")]
    pub levels: usize,
    /// Segment lengths joined by `:`.
    pub lengths: String,
    pub model: &'static str,
    pub axis: &'static str,
    pub trials: usize,
    /// Host rounds per guest broadcast (both axes in full mode).
    pub measured_rounds: u64,
    #[serde(rename = "bound_B")]
    pub bound: f64,
    pub ratio: f64,
    pub l_n_term: f64,
    pub log2n_sq: f64,
    pub mismatches: usize,
}

pub const CSV_HEADER: &str = "n,L,lengths,model,axis,trials,measured_rounds,bound_B,ratio,l_n_term,log2n_sq,mismatches";

fn row(cfg: &MmpbConfig, model: BusModel, axis: AxisMode, trials: usize, rounds: u64, mismatches: usize) -> ResultRow {
    let n = cfg.n();
    let bound = eval_bound(n, cfg.lengths(), cfg.levels());
    let log2n = n.trailing_zeros() as f64;
    ResultRow {
        n,
        levels: cfg.levels(),
        lengths: cfg.lengths_label(),
        model: model.name(),
        axis: axis.name(),
        trials,
        measured_rounds: rounds,
        bound,
        ratio: rounds as f64 / bound,
        l_n_term: level_term(n, cfg.levels()),
        log2n_sq: log2n * log2n,
        mismatches,
    }
}

fn line_mismatches(got: &[BusSymbol], g: &LinePcGraph) -> usize {
    got.iter().zip(resolve_broadcast(g)).filter(|(a, b)| **a != *b).count()
}

/// Per-`n` random stream, independent of which other sides are run.
fn trial_rng(seed: u64, n: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(n as u64);
    rng
}

/// Runs `spec.trials` random broadcasts per side through the kernel and
/// compares every port with the oracle.
pub fn run_campaign(spec: &ExperimentSpec, fault: Option<Fault>) -> Result<Vec<ResultRow>, HarnessError> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.ns.len());
    for &n in &spec.ns {
        let cfg = spec.config(n)?;
        let shape = match spec.axis {
            AxisMode::Row => Shape::RowOnly,
            AxisMode::Full => Shape::Full,
        };
        let mut host = Host::new(cfg.clone(), shape, spec.model)?;
        if let Some(f) = fault {
            host = host.with_fault(f);
        }
        let mut rng = trial_rng(spec.seed, n);
        let mut rounds: Option<u64> = None;
        let mut mismatches = 0;
        for t in 0..spec.trials {
            let (pc, pw) = spec.probabilities(t);
            let r = match spec.axis {
                AxisMode::Row => {
                    let g = random_line(n, &mut rng, pc, pw)?;
                    let (out, rep) = host.simulate_rows(std::slice::from_ref(&g))?;
                    mismatches += line_mismatches(&out[0], &g);
                    rep.rounds
                }
                AxisMode::Full => {
                    let s = random_scenario(n, &mut rng, pc, pw)?;
                    let (out, rep) = host.simulate_broadcast(&s)?;
                    mismatches += out.mismatches(&msb_execute_broadcast(&s)?);
                    rep.total_rounds
                }
            };
            match rounds {
                None => rounds = Some(r),
                Some(first) if first != r => return Err(HarnessError::NotOblivious { n, first, other: r }),
                _ => {}
            }
        }
        rows.push(row(
            &cfg,
            spec.model,
            spec.axis,
            spec.trials,
            rounds.unwrap_or(0),
            mismatches,
        ));
    }
    sort_rows(&mut rows);
    Ok(rows)
}

/// Oracle-equivalence campaign.
pub fn run_verify(spec: &ExperimentSpec) -> Result<Vec<ResultRow>, HarnessError> {
    run_campaign(spec, None)
}

/// Scaling sweep; round counts do not depend on the scenario, so one trial
/// suffices and further trials only confirm it.
pub fn run_scale(spec: &ExperimentSpec) -> Result<Vec<ResultRow>, HarnessError> {
    run_campaign(
        &ExperimentSpec {
            trials: spec.trials.max(1),
            ..spec.clone()
        },
        None,
    )
}

/// Measured rounds against the bound for every `L` from 1 to `log₂ n`, one
/// silent `1 × n` line each.
pub fn bound_table(ns: &[usize], model: BusModel) -> Result<Vec<ResultRow>, HarnessError> {
    let mut rows = Vec::new();
    for &n in ns {
        for levels in 1..=n.trailing_zeros() as usize {
            let spec = ExperimentSpec {
                ns: vec![n],
                levels: LevelPolicy::Fixed(levels),
                model,
                axis: AxisMode::Row,
                trials: 1,
                p_closed: Some(1.0),
                p_write: Some(0.0),
                ..ExperimentSpec::default()
            };
            rows.extend(run_campaign(&spec, None)?);
        }
    }
    sort_rows(&mut rows);
    Ok(rows)
}

pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| (a.n, a.levels, a.model).cmp(&(b.n, b.levels, b.model)));
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[ResultRow]) -> Result<String, HarnessError> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

fn glyph(s: BusSymbol) -> String {
    match s {
        BusSymbol::Data(v) => v.to_string(),
        BusSymbol::Phi => "φ".into(),
        BusSymbol::Bot => "⊥".into(),
    }
}

/// One random broadcast on a small array, shown port by port next to the
/// oracle, with the round accounting.
pub fn demo(spec: &ExperimentSpec) -> Result<String, HarnessError> {
    let spec = ExperimentSpec {
        axis: AxisMode::Full,
        ..spec.clone()
    };
    spec.validate()?;
    let n = spec.ns[0];
    let (pc, pw) = spec.probabilities(0);
    let s = random_scenario(n, &mut trial_rng(spec.seed, n), pc, pw)?;
    demo_on(&spec, &s)
}

/// [`demo`] on a given scenario; the side comes from the scenario.
pub fn demo_on(spec: &ExperimentSpec, s: &MsbScenario) -> Result<String, HarnessError> {
    let n = s.n();
    let spec = ExperimentSpec {
        ns: vec![n],
        axis: AxisMode::Full,
        ..spec.clone()
    };
    spec.validate()?;
    let cfg = spec.config(n)?;
    let mut host = Host::new(cfg.clone(), Shape::Full, spec.model)?;
    let (out, report) = host.simulate_broadcast(s)?;
    let oracle = msb_execute_broadcast(s)?;

    let mut text = String::new();
    let shown = n.min(8);
    let _ = writeln!(
        text,
        "n = {n}, lengths = {}, {} model",
        cfg.lengths_label(),
        spec.model.name()
    );
    let _ = writeln!(
        text,
        "row buses of rows 0..{shown}, columns 0..{shown} (switch, left|right):"
    );
    for i in 0..shown {
        let cells: Vec<String> = (0..shown)
            .map(|j| {
                let pe = s.pe(i, j);
                format!(
                    "{}{}|{}",
                    if pe.row_switch { '=' } else { '/' },
                    glyph(out.get(i, j, Port::RowLeft)),
                    glyph(out.get(i, j, Port::RowRight))
                )
            })
            .collect();
        let _ = writeln!(text, "  {}", cells.join(" "));
    }
    let _ = writeln!(text, "port mismatches against the oracle: {}", out.mismatches(&oracle));
    let _ = writeln!(
        text,
        "rounds: rows {}, columns {}, total {} (bus {}); bound {:.2}",
        report.row.rounds,
        report.col.as_ref().map_or(0, |c| c.rounds),
        report.total_rounds,
        report.bus_rounds,
        report.bound
    );
    for t in &report.row.trace {
        let _ = writeln!(
            text,
            "  depth {}: stride {}, block {}, labeling {}, gather {}, distribute {}",
            t.depth, t.stride, t.block, t.phase1, t.gather, t.distribute
        );
    }
    Ok(text)
}
