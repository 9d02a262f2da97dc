//! Gnuplot-ready plot data: log-scale front positions, level-set ratio
//! trajectories, and snapshot overlays, plus a script referencing only the
//! emitted files.

use crate::artifacts::read_manifest;
use crate::config::RateModelTag;
use crate::pipeline::read_traces;
use anyhow::{Context, Result};
use std::io::Write;
use std::path::Path;

/// Emit plot data for one or more completed runs into `target`. Multiple runs
/// overlay (e.g. alpha = 1/2 against the alpha = 1 baseline).
pub fn emit_plots(dirs: &[&Path], target: &Path) -> Result<Vec<String>> {
    std::fs::create_dir_all(target)?;
    let mut emitted = Vec::new();
    let mut front_files = Vec::new();
    let mut ratio_files = Vec::new();
    let mut snapshot_files = Vec::new();

    for (run_idx, dir) in dirs.iter().enumerate() {
        let manifest = read_manifest(dir)?;
        let sim = &manifest.config.simulation;
        let traces = read_traces(&dir.join(&manifest.trace_file), &sim.levels)?;
        let side = manifest.config.fit.side;

        // log-scale front positions, one block per level
        let fronts_name = format!("fronts_log_{run_idx}.dat");
        {
            let mut out = std::io::BufWriter::new(std::fs::File::create(target.join(&fronts_name))?);
            writeln!(out, "# t  level  |x_front|  log|x_front|   (alpha = {})", sim.alpha)?;
            let mut wrote_any = false;
            for trace in &traces {
                let samples = trace.side_samples(side.into(), (0.0, sim.t_final));
                if samples.is_empty() {
                    eprintln!(
                        "warning: level {} never crossed in {}; skipping its front plot",
                        trace.level,
                        dir.display()
                    );
                    continue;
                }
                wrote_any = true;
                for (t, x) in samples {
                    writeln!(out, "{t} {} {} {}", trace.level, x.abs(), x.abs().ln())?;
                }
                writeln!(out)?;
                writeln!(out)?;
            }
            if !wrote_any {
                eprintln!("warning: no usable traces in {}; front plot skipped", dir.display());
                drop(out);
                std::fs::remove_file(target.join(&fronts_name)).ok();
            } else {
                front_files.push(fronts_name.clone());
                emitted.push(fronts_name);
            }
        }

        // ratio x_level(t) e^{-c t} against the theoretical rate
        if manifest.config.fit.model == RateModelTag::Exponential {
            let c = manifest.config.expected_rate();
            let ratio_name = format!("ratio_{run_idx}.dat");
            let mut out = std::io::BufWriter::new(std::fs::File::create(target.join(&ratio_name))?);
            writeln!(out, "# t  level  |x_front| * exp(-{c} t)")?;
            for trace in &traces {
                for (t, x) in trace.side_samples(side.into(), (0.0, sim.t_final)) {
                    writeln!(out, "{t} {} {}", trace.level, x.abs() * (-c * t).exp())?;
                }
                writeln!(out)?;
                writeln!(out)?;
            }
            ratio_files.push(ratio_name.clone());
            emitted.push(ratio_name);
        }

        // snapshot overlay: one block per stored time
        let snap_name = format!("snapshots_{run_idx}.dat");
        {
            let mut out = std::io::BufWriter::new(std::fs::File::create(target.join(&snap_name))?);
            writeln!(out, "# x  u blocks per snapshot time (alpha = {})", sim.alpha)?;
            for file in &manifest.snapshot_files {
                let body = std::fs::read_to_string(dir.join(file))
                    .with_context(|| format!("missing snapshot {file}"))?;
                for (i, line) in body.lines().enumerate() {
                    if i == 0 {
                        continue;
                    }
                    writeln!(out, "{}", line.replace(',', " "))?;
                }
                writeln!(out)?;
                writeln!(out)?;
            }
        }
        snapshot_files.push(snap_name.clone());
        emitted.push(snap_name);
    }

    // the script references only files that were actually written
    let script = target.join("plots.gp");
    {
        let mut out = std::io::BufWriter::new(std::fs::File::create(&script)?);
        writeln!(out, "# gnuplot script generated by frackpp plot")?;
        writeln!(out, "set terminal pngcairo size 1200,800")?;
        if !front_files.is_empty() {
            writeln!(out, "set output 'fronts_log.png'")?;
            writeln!(out, "set xlabel 't'; set ylabel 'log|x_front|'")?;
            let plots: Vec<String> = front_files
                .iter()
                .map(|f| format!("'{f}' using 1:4 with lines title '{f}'"))
                .collect();
            writeln!(out, "plot {}", plots.join(", "))?;
        }
        if !ratio_files.is_empty() {
            writeln!(out, "set output 'ratio.png'")?;
            writeln!(out, "set xlabel 't'; set ylabel 'x e^{{-ct}}'")?;
            let plots: Vec<String> = ratio_files
                .iter()
                .map(|f| format!("'{f}' using 1:3 with lines title '{f}'"))
                .collect();
            writeln!(out, "plot {}", plots.join(", "))?;
        }
        if !snapshot_files.is_empty() {
            writeln!(out, "set output 'snapshots.png'")?;
            writeln!(out, "set xlabel 'x'; set ylabel 'u'")?;
            writeln!(out, "set xrange [-50:50]")?;
            let plots: Vec<String> = snapshot_files
                .iter()
                .map(|f| format!("'{f}' using 1:2 with lines title '{f}'"))
                .collect();
            writeln!(out, "plot {}", plots.join(", "))?;
        }
    }
    emitted.push("plots.gp".into());
    Ok(emitted)
}
