//! Subcommand implementations.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use bacon_circuit::analysis::{rescale, scaling_collapse, CollapseConfig, CollapsePoint};
use bacon_circuit::ensemble::{grid, run_ensemble, sweep, Trajectory};
use bacon_circuit::observables::{classify_sites, Correlations};
use bacon_circuit::snapshot::{to_svg, write_pgm_annotated};
use bacon_circuit::verify::{oracle_suite, persistence_suite, OracleSuite, PersistenceSuite, StandardRule};
use bacon_circuit::{Direction, Pauli};

use crate::config::{Format, LoadedConfig};
use crate::output::{num, provenance, sweep_row, write_comments, CsvSink, PROFILE_HEADER, SWEEP_HEADER};
use crate::{Cli, CliError, CollapseArgs, Command, GlobalOpts, OUT_ENV};

pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Run => cmd_run(&load(g)?, g),
        Command::Sweep => cmd_sweep(&load(g)?, g),
        Command::Profile => cmd_profile(&load(g)?, g),
        Command::Collapse(args) => cmd_collapse(args, &load(g)?, g),
        Command::Snapshot { svg } => cmd_snapshot(&load(g)?, g, *svg),
        Command::Verify => cmd_verify(),
    }
}

fn load(g: &GlobalOpts) -> Result<LoadedConfig, CliError> {
    let mut loaded = match &g.config {
        Some(path) => LoadedConfig::from_file(path)?,
        None => LoadedConfig::defaults(),
    };
    if let Some(seed) = g.seed {
        loaded.config.seed = seed;
    }
    Ok(loaded)
}

/// `--out`, then the environment override, then the file.
pub fn output_dir(g: &GlobalOpts, loaded: &LoadedConfig) -> Result<PathBuf, CliError> {
    let dir = g
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| loaded.config.output.directory.clone());
    fs::create_dir_all(&dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn preamble(command: &str, loaded: &LoadedConfig) -> Vec<String> {
    provenance(command, Some(loaded.config.seed), &loaded.source)
}

fn cmd_run(loaded: &LoadedConfig, g: &GlobalOpts) -> Result<(), CliError> {
    let cfg = loaded.config.run_config()?;
    let dir = output_dir(g, loaded)?;
    let stats = run_ensemble(&cfg)?;
    let path = dir.join("run.csv");
    let mut sink = CsvSink::create(&path, &preamble("run", loaded), &SWEEP_HEADER)?;
    sink.row(&sweep_row(&stats))?;
    eprintln!("wrote {} ({:.1}s)", path.display(), stats.wall_time_secs);
    Ok(())
}

fn cmd_sweep(loaded: &LoadedConfig, g: &GlobalOpts) -> Result<(), CliError> {
    let c = &loaded.config;
    let sw = c.sweep.as_ref().ok_or_else(|| CliError::Usage("sweep needs a [sweep] section in the config".into()))?;
    let template = c.template()?;
    let points = grid(&sw.l_list, &sw.p1_list, &sw.p2_list);
    let dir = output_dir(g, loaded)?;
    let path = dir.join("sweep.csv");
    let mut sink = CsvSink::create(&path, &preamble("sweep", loaded), &SWEEP_HEADER)?;
    let total = points.len();
    let mut done = 0;
    sweep(&points, &template, |p, stats| {
        done += 1;
        eprintln!("[{done}/{total}] L={} p1={} p2={} ({:.1}s)", p.l, p.p1, p.p2, stats.wall_time_secs);
        sink.row(&sweep_row(stats))
    })?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn cmd_profile(loaded: &LoadedConfig, g: &GlobalOpts) -> Result<(), CliError> {
    let cfg = loaded.config.run_config()?;
    let dir = output_dir(g, loaded)?;
    let stats = run_ensemble(&cfg)?;
    let path = dir.join("profile.csv");
    let mut sink = CsvSink::create(&path, &preamble("profile", loaded), &PROFILE_HEADER)?;
    let (m, e) = (&stats.mean.profiles, &stats.err.profiles);
    let cols = [(Pauli::X, Direction::Row), (Pauli::Z, Direction::Column), (Pauli::Y, Direction::Row)];
    for k in 0..m.x_row.len() {
        let mut row = vec![(k + 1).to_string()];
        for (p, d) in cols {
            row.push(num(m.get(p, d)[k]));
            row.push(num(e.get(p, d)[k]));
        }
        sink.row(&row)?;
    }
    eprintln!("wrote {}", path.display());
    Ok(())
}

/// `(L, p1, p2, value, err)` from one sweep CSV row.
type SweepPoint = (usize, f64, f64, f64, f64);

fn read_sweep_points(path: &Path, observable: &str) -> Result<Vec<SweepPoint>, CliError> {
    let name = path.display();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Runtime(format!("{name}: {e}")))?;
    let headers = reader.headers().map_err(|e| CliError::Runtime(format!("{name}: {e}")))?.clone();
    let err_col = format!("{observable}_err");
    let col = |key: &str| {
        headers
            .iter()
            .position(|h| h == key)
            .ok_or_else(|| CliError::Runtime(format!("{name}: missing column `{key}`")))
    };
    let idx = [col("L")?, col("p1")?, col("p2")?, col(observable)?, col(&err_col)?];
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            CliError::Runtime(format!("{name}: line {line}: malformed record: {e}"))
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let field = |k: usize| -> Result<f64, CliError> {
            let raw = rec.get(idx[k]).unwrap_or("");
            raw.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Runtime(format!("{name}: line {line}: bad value `{raw}` in column `{}`", &headers[idx[k]])))
        };
        let l = field(0)?;
        if l.fract() != 0.0 || l < 1.0 {
            return Err(CliError::Runtime(format!("{name}: line {line}: L must be a positive integer")));
        }
        out.push((l as usize, field(1)?, field(2)?, field(3)?, field(4)?));
    }
    Ok(out)
}

fn cmd_collapse(args: &CollapseArgs, loaded: &LoadedConfig, g: &GlobalOpts) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for path in &args.inputs {
        rows.extend(read_sweep_points(path, &args.observable)?);
    }
    let p2s: BTreeSet<u64> = rows.iter().map(|r| r.2.to_bits()).collect();
    let rows: Vec<_> = match args.p2 {
        Some(p2) => rows.into_iter().filter(|r| r.2 == p2).collect(),
        None if p2s.len() > 1 => {
            return Err(CliError::Usage("inputs mix several p2 values; choose one with --p2".into()));
        }
        None => rows,
    };
    let points: Vec<CollapsePoint> = rows.iter().map(|r| CollapsePoint { l: r.0, p: r.1, value: r.3, err: r.4 }).collect();
    let config = CollapseConfig {
        p_c: args.p_c,
        window: args.window,
        gamma_range: (args.gamma_min, args.gamma_max),
        nu_range: (args.nu_min, args.nu_max),
        grid: args.grid,
        ..CollapseConfig::default()
    };
    let res = scaling_collapse(&points, &config).map_err(|e| CliError::Runtime(e.to_string()))?;

    let dir = output_dir(g, loaded)?;
    let inputs: Vec<String> = args.inputs.iter().map(|p| p.display().to_string()).collect();
    let mut lines = provenance("collapse", None, "");
    lines.pop();
    lines.push(format!("inputs: {}", inputs.join(", ")));
    let sizes: BTreeSet<usize> = points.iter().map(|p| p.l).collect();
    let sizes: Vec<String> = sizes.iter().map(|l| l.to_string()).collect();

    let mut report = Vec::new();
    write_comments(&mut report, &lines)?;
    let body = [
        format!("observable = \"{}\"", args.observable),
        format!("gamma_bar = {}", num(res.gamma_bar)),
        format!("gamma_bar_err = {}", num(res.gamma_err)),
        format!("nu = {}", num(res.nu)),
        format!("nu_err = {}", num(res.nu_err)),
        format!("quality = {}", num(res.quality)),
        format!("p_c = {}", config.p_c),
        format!("window = {}", config.window),
        format!("gamma_range = [{}, {}]", config.gamma_range.0, config.gamma_range.1),
        format!("nu_range = [{}, {}]", config.nu_range.0, config.nu_range.1),
        format!("grid = {}", config.grid),
        format!("trials = {}", res.trace.len()),
        format!("sizes = [{}]", sizes.join(", ")),
        format!("points = {}", points.len()),
    ];
    for line in body {
        report.extend_from_slice(line.as_bytes());
        report.push(b'\n');
    }
    let report_path = dir.join("collapse.txt");
    fs::write(&report_path, report)?;

    let cloud_path = dir.join("collapse_points.csv");
    let mut sink = CsvSink::create(&cloud_path, &lines, &["L", "p1", "x", "y", "y_err"])?;
    for (pt, r) in points.iter().zip(rescale(&points, res.gamma_bar, res.nu, config.p_c)) {
        sink.row(&[r.l.to_string(), pt.p.to_string(), num(r.x), num(r.y), num(r.err)])?;
    }
    println!(
        "gamma_bar = {:.4} ± {:.4}, nu = {:.4} ± {:.4}, quality = {:.4}",
        res.gamma_bar, res.gamma_err, res.nu, res.nu_err, res.quality
    );
    eprintln!("wrote {} and {}", report_path.display(), cloud_path.display());
    Ok(())
}

fn cmd_snapshot(loaded: &LoadedConfig, g: &GlobalOpts, svg: bool) -> Result<(), CliError> {
    let cfg = loaded.config.run_config()?;
    let dir = output_dir(g, loaded)?;
    let mut traj = Trajectory::new(&cfg, 0)?;
    traj.advance(cfg.total_steps());
    let grid = classify_sites(&Correlations::new(traj.tableau()), &cfg.lattice);
    let lines = preamble("snapshot", loaded);

    let pgm = dir.join("snapshot.pgm");
    write_pgm_annotated(&grid, &pgm, &lines)?;
    if svg || loaded.config.wants(Format::Svg) {
        let mut text = String::new();
        text.push_str("<!--\n");
        for l in &lines {
            text.push_str(&l.replace("--", "- -"));
            text.push('\n');
        }
        text.push_str("-->\n");
        text.push_str(&to_svg(&grid));
        fs::write(dir.join("snapshot.svg"), text)?;
    }
    let mut side = Vec::new();
    write_comments(&mut side, &lines)?;
    let body = format!(
        "L = {}\nsteps = {}\nx_site_density = {}\nz_site_density = {}\n",
        grid.l,
        traj.steps(),
        num(grid.x_site_density()),
        num(grid.z_site_density())
    );
    side.extend_from_slice(body.as_bytes());
    fs::write(dir.join("snapshot.txt"), side)?;
    eprintln!("wrote {}", pgm.display());
    Ok(())
}

fn cmd_verify() -> Result<(), CliError> {
    let oracle = oracle_suite(&OracleSuite::default(), &StandardRule).map_err(|d| CliError::Runtime(format!("FAIL {d}")))?;
    println!("oracle: {} trajectories, {} steps, {} comparisons: ok", oracle.trajectories, oracle.steps, oracle.comparisons);
    let sym = persistence_suite(&PersistenceSuite::default(), &StandardRule)?
        .map_err(|d| CliError::Runtime(format!("FAIL {d}")))?;
    println!("symmetry: {} trajectories, {} steps, {} comparisons: ok", sym.trajectories, sym.steps, sym.comparisons);
    Ok(())
}
