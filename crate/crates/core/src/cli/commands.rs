//! Command bodies. Each writes self-describing files into the output
//! directory and returns what it wrote.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_rational::Ratio;
use sha2::{Digest, Sha256};

use super::config::RunConfig;
use crate::bufctl::{select_thresholds, Mechanism, Selection, ThresholdConfig};
use crate::harness::io::{write_meta, write_occupancy, write_word_results};
use crate::harness::{
    format_upsilon, read_ideal_trace, run_ideal_sim, run_system_sim, write_ideal_trace, IdealRun,
    IdealTrace, SimTrace, SystemConfig,
};
use crate::{Error, Result};

/// Files written by a command and the number of grid points that overflowed.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub overflows: usize,
}

pub const TAV_HEADER: &str = "tmax,t_av,fer";
pub const TAV_GRID_HEADER: &str = "snr,tmax,t_av,fer";
pub const THRESHOLDS_HEADER: &str = "snr,upsilon,mechanism,t_bal,b_thresholds,t_thresholds";
pub const SUMMARY_HEADER: &str = "snr,upsilon,mechanism,fer,drops,max_occ,t_bal,fer_steady,max_occ_steady,mean_occ,ideal_fer,frames,status";
pub const FER_GRID_HEADER: &str =
    "snr,upsilon,t_bal,ideal_fer,ideal_fer_at_t_bal,multi_fer,drop_fer";

pub fn snr_tag(snr: f64) -> String {
    format!("{snr}dB")
}

pub fn upsilon_tag(u: Ratio<u64>) -> String {
    format!("{}-{}", u.numer(), u.denom())
}

pub fn ideal_trace_path(dir: &Path, snr: f64) -> PathBuf {
    dir.join(format!("ideal_{}.csv", snr_tag(snr)))
}

fn point_name(prefix: &str, snr: f64, u: Ratio<u64>, m: Mechanism) -> String {
    format!("{prefix}_{}_u{}_{m}.csv", snr_tag(snr), upsilon_tag(u))
}

fn header(cfg: &RunConfig, command: &str, inputs_hash: &str) -> Vec<(String, String)> {
    let mut pairs = vec![
        (
            "tool".to_string(),
            format!("scf-sim {}", env!("CARGO_PKG_VERSION")),
        ),
        ("command".to_string(), command.to_string()),
    ];
    pairs.extend(
        cfg.to_pairs()
            .into_iter()
            .map(|(k, v)| (format!("config.{k}"), v)),
    );
    pairs.push(("inputs.sha256".to_string(), inputs_hash.to_string()));
    pairs
}

fn with(mut base: Vec<(String, String)>, extra: &[(&str, String)]) -> Vec<(String, String)> {
    base.extend(extra.iter().map(|(k, v)| (k.to_string(), v.clone())));
    base
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

fn prepare(cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out_dir)?;
    Ok(())
}

fn join(items: &[impl ToString], sep: &str) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(sep)
}

pub fn cmd_construct(cfg: &RunConfig) -> Result<Report> {
    prepare(cfg)?;
    let spec = cfg.code_spec()?;
    let file = spec.to_frozen_file();
    let path = cfg.out_dir.join(format!(
        "frozen_N{}_k{}_r{}.txt",
        spec.n(),
        spec.k(),
        spec.r()
    ));
    let text = file.to_text();
    let hash = cfg.inputs_hash(&[]);
    write_file(&path, |w| {
        write_meta(w, &header(cfg, "construct", &hash))?;
        w.write_all(text.as_bytes())?;
        Ok(())
    })?;
    println!(
        "N={} k={} r={}: {} frozen indices -> {}",
        spec.n(),
        spec.k(),
        spec.r(),
        file.frozen.len(),
        path.display()
    );
    Ok(Report {
        files: vec![path],
        overflows: 0,
    })
}

/// An ideal trace together with the hash of its file.
struct TraceInput {
    trace: IdealTrace,
    sha256: String,
}

fn run_ideal_grid(cfg: &RunConfig, report: &mut Report) -> Result<Vec<TraceInput>> {
    let spec = cfg.code_spec()?;
    let scf = cfg.scf_config();
    let frozen_text = spec.to_frozen_file().to_text();
    let hash = cfg.inputs_hash(&[frozen_text.as_bytes()]);
    let mut out = Vec::new();
    for &snr in &cfg.snr_db {
        eprintln!("ideal: {} frames at {snr} dB", cfg.frames);
        let run = IdealRun::new(snr, cfg.frames, cfg.seed)
            .with_rate_convention(cfg.rate_convention)
            .with_workers(cfg.workers);
        let trace = run_ideal_sim(&spec, &scf, &run)?;

        let mut bytes = Vec::new();
        write_ideal_trace(&mut bytes, &trace, &header(cfg, "ideal", &hash))?;
        let path = ideal_trace_path(&cfg.out_dir, snr);
        fs::write(&path, &bytes)?;
        report.files.push(path);

        let tav_path = cfg.out_dir.join(format!("tav_{}.csv", snr_tag(snr)));
        let stats = trace.trial_stats();
        write_file(&tav_path, |w| {
            write_meta(
                w,
                &with(
                    header(cfg, "ideal", &hash),
                    &[("grid.snr_db", snr.to_string())],
                ),
            )?;
            writeln!(w, "{TAV_HEADER}")?;
            for m in 1..=trace.meta.t_max {
                let fer = trace.restrict(m)?.fer();
                writeln!(w, "{m},{},{fer}", stats.t_av(m).unwrap_or(f64::NAN))?;
            }
            Ok(())
        })?;
        report.files.push(tav_path);
        println!(
            "{snr} dB: T_av({}) = {:.6}, FER = {:.6}",
            trace.meta.t_max,
            trace.t_av(),
            trace.fer()
        );
        out.push(TraceInput {
            sha256: hex::encode(Sha256::digest(&bytes)),
            trace,
        });
    }
    Ok(out)
}

pub fn cmd_ideal(cfg: &RunConfig) -> Result<Report> {
    prepare(cfg)?;
    let mut report = Report::default();
    run_ideal_grid(cfg, &mut report)?;
    Ok(report)
}

fn load_traces(cfg: &RunConfig, traces: &[PathBuf]) -> Result<Vec<TraceInput>> {
    let paths: Vec<PathBuf> = if traces.is_empty() {
        cfg.snr_db
            .iter()
            .map(|&s| ideal_trace_path(&cfg.out_dir, s))
            .collect()
    } else {
        traces.to_vec()
    };
    paths
        .iter()
        .map(|p| {
            let bytes = fs::read(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            let loaded = read_ideal_trace(bytes.as_slice())?;
            Ok(TraceInput {
                trace: loaded.trace,
                sha256: hex::encode(Sha256::digest(&bytes)),
            })
        })
        .collect()
}

fn hash_with_traces(cfg: &RunConfig, traces: &[TraceInput]) -> String {
    let hashes: Vec<&[u8]> = traces.iter().map(|t| t.sha256.as_bytes()).collect();
    cfg.inputs_hash(&hashes)
}

/// Threshold selection for one grid point; a configured override wins.
fn thresholds_for(
    cfg: &RunConfig,
    trace: &IdealTrace,
    u: Ratio<u64>,
    m: Mechanism,
) -> Result<(ThresholdConfig, Option<u32>)> {
    if let Some(th) = cfg.threshold_override()? {
        th.validate_for(cfg.b_tot, trace.meta.t_max)?;
        return Ok((th, None));
    }
    let Selection { thresholds, t_bal } =
        select_thresholds(&trace.trial_stats(), u, trace.meta.t_max, cfg.b_tot, m)?;
    Ok((thresholds, Some(t_bal)))
}

fn write_thresholds(
    cfg: &RunConfig,
    traces: &[TraceInput],
    mechanisms: &[Mechanism],
    command: &str,
    report: &mut Report,
) -> Result<()> {
    let hash = hash_with_traces(cfg, traces);
    let path = cfg.out_dir.join("thresholds.csv");
    let mut rows = Vec::new();
    for t in traces {
        let snr = t.trace.meta.snr_db;
        for &u in &cfg.upsilon {
            for &m in mechanisms {
                let (th, t_bal) = thresholds_for(cfg, &t.trace, u, m)?;
                let t_bal = t_bal.map(|t| t.to_string()).unwrap_or_default();
                println!(
                    "{snr} dB, upsilon {}: {m} T_bal={t_bal} B={{{}}} T={{{}}}",
                    format_upsilon(u),
                    join(th.b_thresholds(), ","),
                    join(th.t_thresholds(), ",")
                );
                rows.push(format!(
                    "{snr},{},{m},{t_bal},{},{}",
                    format_upsilon(u),
                    join(th.b_thresholds(), " "),
                    join(th.t_thresholds(), " ")
                ));
            }
        }
    }
    write_file(&path, |w| {
        write_meta(w, &header(cfg, command, &hash))?;
        writeln!(w, "{THRESHOLDS_HEADER}")?;
        for r in &rows {
            writeln!(w, "{r}")?;
        }
        Ok(())
    })?;
    report.files.push(path);
    Ok(())
}

pub fn cmd_thresholds(cfg: &RunConfig, traces: &[PathBuf]) -> Result<Report> {
    prepare(cfg)?;
    let inputs = load_traces(cfg, traces)?;
    let mut report = Report::default();
    write_thresholds(cfg, &inputs, &cfg.mechanisms, "thresholds", &mut report)?;
    Ok(report)
}

/// Outcome of one (SNR, upsilon, mechanism) point.
struct PointResult {
    snr: f64,
    upsilon: Ratio<u64>,
    mechanism: Mechanism,
    t_bal: Option<u32>,
    ideal_fer: f64,
    frames: usize,
    sim: std::result::Result<SimTrace, Error>,
}

impl PointResult {
    fn row(&self) -> String {
        let lead = format!(
            "{},{},{}",
            self.snr,
            format_upsilon(self.upsilon),
            self.mechanism
        );
        let t_bal = self.t_bal.map(|t| t.to_string()).unwrap_or_default();
        match &self.sim {
            Ok(s) => format!(
                "{lead},{},{},{},{t_bal},{},{},{},{},{},ok",
                s.fer(),
                s.drops,
                s.max_occ(),
                s.fer_steady(),
                s.max_occ_steady(),
                s.mean_occ(),
                self.ideal_fer,
                self.frames
            ),
            Err(Error::BufferOverflow { time_unit, .. }) => format!(
                "{lead},,,,{t_bal},,,,{},{},overflow@{time_unit}",
                self.ideal_fer, self.frames
            ),
            Err(e) => format!(
                "{lead},,,,{t_bal},,,,{},{},error: {e}",
                self.ideal_fer, self.frames
            ),
        }
    }
}

fn run_system_grid(
    cfg: &RunConfig,
    traces: &[TraceInput],
    mechanisms: &[Mechanism],
    command: &str,
    keep_traces: impl Fn(f64, Ratio<u64>) -> bool,
    report: &mut Report,
) -> Result<Vec<PointResult>> {
    let hash = hash_with_traces(cfg, traces);
    let mut results = Vec::new();
    for t in traces {
        let trace = &t.trace;
        let snr = trace.meta.snr_db;
        for &u in &cfg.upsilon {
            for &m in mechanisms {
                let (th, t_bal) = thresholds_for(cfg, trace, u, m)?;
                let sys = SystemConfig::new(u, cfg.b_tot, th.clone())?
                    .with_warmup(cfg.warmup.unwrap_or(cfg.b_tot));
                let sim = match run_system_sim(&sys, &trace.psi_req, &trace.e_flags) {
                    Ok(s) => Ok(s),
                    Err(e @ Error::BufferOverflow { .. }) => {
                        report.overflows += 1;
                        eprintln!("{snr} dB, upsilon {}, {m}: {e}", format_upsilon(u));
                        Err(e)
                    }
                    Err(e) => return Err(e),
                };
                if let (Ok(s), true) = (&sim, keep_traces(snr, u)) {
                    let meta = with(
                        header(cfg, command, &hash),
                        &[
                            ("grid.snr_db", snr.to_string()),
                            ("grid.upsilon", format_upsilon(u)),
                            ("grid.mechanism", m.to_string()),
                            ("grid.b_thresholds", join(th.b_thresholds(), ",")),
                            ("grid.t_thresholds", join(th.t_thresholds(), ",")),
                            ("timing.tau_sc", sys.tau_sc.to_string()),
                            ("timing.tau_ch", sys.tau_ch.to_string()),
                        ],
                    );
                    let occ = cfg.out_dir.join(point_name("occ", snr, u, m));
                    write_file(&occ, |w| write_occupancy(w, s, cfg.occupancy_stride, &meta))?;
                    let words = cfg.out_dir.join(point_name("words", snr, u, m));
                    write_file(&words, |w| write_word_results(w, s, &meta))?;
                    report.files.extend([occ, words]);
                }
                if let Ok(s) = &sim {
                    println!(
                        "{snr} dB, upsilon {}, {m}: FER {:.6} (ideal {:.6}), drops {}, max occupancy {}",
                        format_upsilon(u),
                        s.fer(),
                        trace.fer(),
                        s.drops,
                        s.max_occ()
                    );
                }
                results.push(PointResult {
                    snr,
                    upsilon: u,
                    mechanism: m,
                    t_bal,
                    ideal_fer: trace.fer(),
                    frames: trace.len(),
                    sim,
                });
            }
        }
    }
    let path = cfg.out_dir.join("system_summary.csv");
    write_file(&path, |w| {
        write_meta(w, &header(cfg, command, &hash))?;
        writeln!(w, "{SUMMARY_HEADER}")?;
        for r in &results {
            writeln!(w, "{}", r.row())?;
        }
        Ok(())
    })?;
    report.files.push(path);
    Ok(results)
}

pub fn cmd_system(cfg: &RunConfig, traces: &[PathBuf]) -> Result<Report> {
    prepare(cfg)?;
    let inputs = load_traces(cfg, traces)?;
    let mut report = Report::default();
    let keep = cfg.write_traces;
    run_system_grid(
        cfg,
        &inputs,
        &cfg.mechanisms,
        "system",
        |_, _| keep,
        &mut report,
    )?;
    Ok(report)
}

/// Full campaign: ideal traces and trial tables for every SNR, thresholds,
/// and the system grid for both mechanisms.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<Report> {
    prepare(cfg)?;
    let mut report = Report::default();
    let traces = run_ideal_grid(cfg, &mut report)?;
    let mechanisms = Mechanism::ALL;
    write_thresholds(cfg, &traces, &mechanisms, "sweep", &mut report)?;
    let keep = |snr: f64, u: Ratio<u64>| {
        cfg.write_traces && snr == cfg.sweep_trace_snr_db && u == cfg.sweep_trace_upsilon
    };
    let results = run_system_grid(cfg, &traces, &mechanisms, "sweep", keep, &mut report)?;
    let hash = hash_with_traces(cfg, &traces);

    let tav = cfg.out_dir.join("tav.csv");
    write_file(&tav, |w| {
        write_meta(w, &header(cfg, "sweep", &hash))?;
        writeln!(w, "{TAV_GRID_HEADER}")?;
        for t in &traces {
            let stats = t.trace.trial_stats();
            for m in 1..=t.trace.meta.t_max {
                writeln!(
                    w,
                    "{},{m},{},{}",
                    t.trace.meta.snr_db,
                    stats.t_av(m).unwrap_or(f64::NAN),
                    t.trace.restrict(m)?.fer()
                )?;
            }
        }
        Ok(())
    })?;
    report.files.push(tav);

    let grid = cfg.out_dir.join("fer_grid.csv");
    let mut by_point: BTreeMap<(usize, usize), [Option<f64>; 2]> = BTreeMap::new();
    let mut t_bal_at: BTreeMap<(usize, usize), Option<u32>> = BTreeMap::new();
    for r in &results {
        let si = traces
            .iter()
            .position(|t| t.trace.meta.snr_db == r.snr)
            .unwrap_or(0);
        let ui = cfg
            .upsilon
            .iter()
            .position(|&u| u == r.upsilon)
            .unwrap_or(0);
        let slot = usize::from(r.mechanism == Mechanism::CodewordDropping);
        by_point.entry((si, ui)).or_default()[slot] = r.sim.as_ref().ok().map(SimTrace::fer);
        t_bal_at.insert((si, ui), r.t_bal);
    }
    write_file(&grid, |w| {
        write_meta(w, &header(cfg, "sweep", &hash))?;
        writeln!(w, "{FER_GRID_HEADER}")?;
        for (&(si, ui), fers) in &by_point {
            let trace = &traces[si].trace;
            let t_bal = t_bal_at[&(si, ui)];
            let at_bal = match t_bal {
                Some(t) => trace.restrict(t)?.fer().to_string(),
                None => String::new(),
            };
            let cell = |f: Option<f64>| f.map(|v| v.to_string()).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{at_bal},{},{}",
                trace.meta.snr_db,
                format_upsilon(cfg.upsilon[ui]),
                t_bal.map(|t| t.to_string()).unwrap_or_default(),
                trace.fer(),
                cell(fers[0]),
                cell(fers[1])
            )?;
        }
        Ok(())
    })?;
    report.files.push(grid);
    Ok(report)
}
