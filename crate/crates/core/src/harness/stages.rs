//! Stage executors for staged runs.
//!
//! Each stage reads its parameters (applying defaults), draws from its own
//! stream base, renders one CSV artifact and reports the fully normalized
//! parameter list, so a manifest replay reproduces every byte.

use super::config::{parse, Section};
use super::csvout::{g17, CsvWriter};
use super::manifest::{manifest_path, RunManifest, StageRecord};
use super::{
    asymptotic_scan, estimate_lyapunov, intermittency_scan, LyapunovBudget,
};
use crate::error::{Error, Result};
use crate::exclusion::{duality_expectation, evolve, sample_bernoulli, ExclusionState};
use crate::kernels::kernel_3d;
use crate::lattice::TorusLattice;
use crate::pam::{annealed_moment, feynman_kac_estimate, MomentEstimate, PamConfig};
use crate::polaron::{solve_cutoff_polaron, SolveOptions};
use crate::rng::Stream;
use crate::spectral::{mc_growth_slope, top_eigenvalue, SmallSystem};
use std::path::Path;

pub struct RunOutcome {
    pub manifest: RunManifest,
    pub files: Vec<String>,
}

struct StageOutput {
    params: Vec<(String, String)>,
    /// (file suffix, bytes); the primary artifact uses an empty suffix.
    artifacts: Vec<(String, Vec<u8>)>,
}

pub fn run_config_file(path: &Path, out_dir: &Path) -> Result<RunOutcome> {
    let text = std::fs::read_to_string(path)?;
    run_config_text(&text, out_dir)
}

pub fn run_config_text(text: &str, out_dir: &Path) -> Result<RunOutcome> {
    let cfg = parse(text)?;
    let master_seed: u64 = match cfg.globals.get("seed") {
        Some(s) => s.parse().map_err(|_| Error::Schema {
            stage: "<globals>".into(),
            message: format!("cannot parse seed `{s}`"),
        })?,
        None => 0,
    };
    std::fs::create_dir_all(out_dir)?;
    let mut manifest = RunManifest::new(master_seed);
    let mut files = Vec::new();
    for (i, section) in cfg.stages.iter().enumerate() {
        let index = i + 1;
        let stream_base = (index as u64) << 32;
        let out = execute_stage(section, master_seed, stream_base)?;
        for (suffix, bytes) in &out.artifacts {
            let name = if suffix.is_empty() {
                format!("{index:02}_{}.csv", section.name)
            } else {
                format!("{index:02}_{}_{suffix}.csv", section.name)
            };
            std::fs::write(out_dir.join(&name), bytes)?;
            manifest.record_artifact(&name, bytes);
            files.push(name);
        }
        manifest.stages.push(StageRecord {
            index,
            kind: section.name.clone(),
            stream_base,
            params: out.params,
        });
    }
    manifest.write_to(&manifest_path(out_dir))?;
    Ok(RunOutcome { manifest, files })
}

fn execute_stage(section: &Section, seed: u64, stream_base: u64) -> Result<StageOutput> {
    match section.name.as_str() {
        "kernels" => stage_kernels(section),
        "sse" => stage_sse(section, seed, stream_base),
        "moment" => stage_moment(section, seed, stream_base),
        "spectral" => stage_spectral(section, seed, stream_base),
        "polaron" => stage_polaron(section),
        "lyapunov" => stage_lyapunov(section, seed, stream_base),
        "scan" => stage_scan(section, seed, stream_base),
        "intermittency" => stage_intermittency(section, seed, stream_base),
        other => Err(Error::Schema { stage: other.to_string(), message: "unknown stage kind".into() }),
    }
}

fn parse_points(raw: &str, stage: &str) -> Result<Vec<[i64; 3]>> {
    raw.split(';')
        .map(|p| {
            let coords: Vec<i64> = p
                .split_whitespace()
                .map(|c| c.parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Schema {
                    stage: stage.to_string(),
                    message: format!("cannot parse point `{p}`"),
                })?;
            if coords.len() != 3 {
                return Err(Error::Schema {
                    stage: stage.to_string(),
                    message: format!("point `{p}` must have three coordinates"),
                });
            }
            Ok([coords[0], coords[1], coords[2]])
        })
        .collect()
}

fn stage_kernels(sec: &Section) -> Result<StageOutput> {
    let times = sec.get_list_f64("times")?;
    let points_raw = sec.get_str_or("points", "0 0 0").to_string();
    let points = parse_points(&points_raw, &sec.name)?;
    let mut csv = CsvWriter::new("t,x1,x2,x3,value");
    for &t in &times {
        if t < 0.0 {
            return Err(Error::domain("kernel times must be >= 0"));
        }
        for &x in &points {
            csv.row(&[
                g17(t),
                x[0].to_string(),
                x[1].to_string(),
                x[2].to_string(),
                g17(kernel_3d(t, x)),
            ]);
        }
    }
    Ok(StageOutput {
        params: vec![
            ("times".into(), join_f64(&times)),
            ("points".into(), points_raw),
        ],
        artifacts: vec![(String::new(), csv.to_bytes())],
    })
}

fn initial_state(kind: &str, lat: &TorusLattice, rho: f64, rng: &mut Stream) -> Result<ExclusionState> {
    match kind {
        "bernoulli" => sample_bernoulli(lat, rho, rng),
        "single" => {
            let mut occ = vec![0u8; lat.site_count()];
            occ[0] = 1;
            Ok(ExclusionState::from_occupancy(occ))
        }
        "slab" => {
            let occ: Vec<u8> = (0..lat.site_count())
                .map(|s| u8::from(lat.coords(s)[0] < lat.side() / 2))
                .collect();
            Ok(ExclusionState::from_occupancy(occ))
        }
        other => Err(Error::Schema {
            stage: "sse".into(),
            message: format!("unknown init `{other}` (expected bernoulli, single or slab)"),
        }),
    }
}

fn stage_sse(sec: &Section, seed: u64, stream_base: u64) -> Result<StageOutput> {
    let side = sec.get_usize("side")?;
    let rho = sec.get_f64("rho")?;
    let t = sec.get_f64("t")?;
    let replicas = sec.get_usize("replicas")?;
    let init = sec.get_str_or("init", "bernoulli").to_string();
    let mode = sec.get_str_or("mode", "summary").to_string();
    let lat = TorusLattice::new(side)?;
    let n_sites = lat.site_count();

    let mut hits = vec![0usize; n_sites];
    let mut raw = CsvWriter::new("replica,time,site,occupancy");
    for r in 0..replicas {
        let mut rng = Stream::new(seed, stream_base + r as u64);
        let mut state = initial_state(&init, &lat, rho, &mut rng)?;
        evolve(&lat, &mut state, t, &mut rng)?;
        for s in 0..n_sites {
            let occ = state.occupied(s) as u8;
            hits[s] += occ as usize;
            if mode == "raw" {
                raw.row(&[r.to_string(), g17(t), s.to_string(), occ.to_string()]);
            }
        }
    }
    let bytes = if mode == "raw" {
        raw.to_bytes()
    } else {
        let mut csv = CsvWriter::new("site,empirical_mean,oracle_mean,z_score");
        // with a deterministic initial state the oracle is the wrapped
        // kernel duality expectation; Bernoulli starts are in equilibrium
        let oracle_state = if init == "bernoulli" {
            None
        } else {
            let mut dummy = Stream::new(seed, stream_base);
            Some(initial_state(&init, &lat, rho, &mut dummy)?)
        };
        for s in 0..n_sites {
            let oracle = match &oracle_state {
                Some(eta) => duality_expectation(&lat, eta, s, t)?,
                None => rho,
            };
            let emp = hits[s] as f64 / replicas as f64;
            let var = oracle * (1.0 - oracle) / replicas as f64;
            let z = if var > 0.0 { (emp - oracle) / var.sqrt() } else { 0.0 };
            csv.row(&[s.to_string(), g17(emp), g17(oracle), g17(z)]);
        }
        csv.to_bytes()
    };
    Ok(StageOutput {
        params: vec![
            ("side".into(), side.to_string()),
            ("rho".into(), g17(rho)),
            ("t".into(), g17(t)),
            ("replicas".into(), replicas.to_string()),
            ("init".into(), init),
            ("mode".into(), mode),
        ],
        artifacts: vec![(String::new(), bytes)],
    })
}

fn moment_row(csv: &mut CsvWriter, method: &str, est: &MomentEstimate) {
    csv.row(&[
        method.to_string(),
        est.order.to_string(),
        g17(est.time),
        g17(est.mean),
        g17(est.stderr),
        est.samples.to_string(),
        est.guard_ok.to_string(),
    ]);
}

fn stage_moment(sec: &Section, seed: u64, stream_base: u64) -> Result<StageOutput> {
    let cfg = PamConfig {
        kappa: sec.get_f64("kappa")?,
        rho: sec.get_f64("rho")?,
        p: sec.get_usize_or("p", 1)? as u32,
        t_final: sec.get_f64("t")?,
        side: sec.get_usize("side")?,
        samples: sec.get_usize("samples")?,
        batches: sec.get_usize_or("batches", 100)?,
        seed,
        stream_base,
        ..PamConfig::default()
    };
    let method = sec.get_str_or("method", "both").to_string();
    let direct_samples = sec.get_usize_or("direct_samples", cfg.samples / 20 + 2)?;
    let mut csv = CsvWriter::new("method,p,t,mean,stderr,n,guard_ok");
    match method.as_str() {
        "fk" => moment_row(&mut csv, "fk", &feynman_kac_estimate(&cfg)?),
        "direct" => moment_row(&mut csv, "direct", &annealed_moment(&cfg)?),
        "both" => {
            moment_row(&mut csv, "fk", &feynman_kac_estimate(&cfg)?);
            let dcfg = PamConfig {
                samples: direct_samples,
                stream_base: stream_base + (1 << 24),
                ..cfg.clone()
            };
            moment_row(&mut csv, "direct", &annealed_moment(&dcfg)?);
        }
        other => {
            return Err(Error::Schema {
                stage: sec.name.clone(),
                message: format!("unknown method `{other}` (expected fk, direct or both)"),
            })
        }
    }
    Ok(StageOutput {
        params: vec![
            ("kappa".into(), g17(cfg.kappa)),
            ("rho".into(), g17(cfg.rho)),
            ("p".into(), cfg.p.to_string()),
            ("t".into(), g17(cfg.t_final)),
            ("side".into(), cfg.side.to_string()),
            ("samples".into(), cfg.samples.to_string()),
            ("batches".into(), cfg.batches.to_string()),
            ("direct_samples".into(), direct_samples.to_string()),
            ("method".into(), method),
        ],
        artifacts: vec![(String::new(), csv.to_bytes())],
    })
}

fn stage_spectral(sec: &Section, seed: u64, stream_base: u64) -> Result<StageOutput> {
    let side = sec.get_usize("side")?;
    let particles = sec.get_usize("particles")?;
    let kappa = sec.get_f64("kappa")?;
    let potential_scale = sec.get_f64_or("potential_scale", 0.1)?;
    let mc_check = sec.get_str_or("mc_check", "true") == "true";
    let mc_samples = sec.get_usize_or("mc_samples", 20_000)?;
    let mc_t1 = sec.get_f64_or("mc_t1", 20.0)?;
    let mc_t2 = sec.get_f64_or("mc_t2", 40.0)?;
    let sys = SmallSystem::new(TorusLattice::new(side)?, particles, true)?;
    let v: Vec<f64> = match sec.entries.get("potential_file") {
        Some(path) => std::fs::read_to_string(path)?
            .lines()
            .map(|l| {
                l.trim().parse().map_err(|_| Error::Schema {
                    stage: sec.name.clone(),
                    message: format!("bad potential value `{l}`"),
                })
            })
            .collect::<Result<_>>()?,
        None => {
            let mut rng = Stream::new(seed, stream_base);
            (0..sys.state_count()).map(|_| potential_scale * rng.uniform()).collect()
        }
    };
    let res = top_eigenvalue(&sys, kappa, &v)?;
    let (slope, se) = if mc_check {
        mc_growth_slope(&sys, kappa, &v, mc_t1, mc_t2, mc_samples, 100, seed, stream_base + (1 << 24))?
    } else {
        (f64::NAN, f64::NAN)
    };
    let mut csv = CsvWriter::new("lambda,residual,mc_slope,mc_stderr");
    csv.row(&[g17(res.lambda), g17(res.residual), g17(slope), g17(se)]);
    Ok(StageOutput {
        params: vec![
            ("side".into(), side.to_string()),
            ("particles".into(), particles.to_string()),
            ("kappa".into(), g17(kappa)),
            ("potential_scale".into(), g17(potential_scale)),
            ("mc_check".into(), mc_check.to_string()),
            ("mc_samples".into(), mc_samples.to_string()),
            ("mc_t1".into(), g17(mc_t1)),
            ("mc_t2".into(), g17(mc_t2)),
        ],
        artifacts: vec![(String::new(), csv.to_bytes())],
    })
}

fn stage_polaron(sec: &Section) -> Result<StageOutput> {
    let coeff = sec.get_f64("coeff")?;
    let eps = sec.get_f64_or("eps", 0.0)?;
    let kcut = sec.get_f64_or("kcut", f64::INFINITY)?;
    let windowed = !(eps == 0.0 && kcut.is_infinite());
    let defaults = if windowed { SolveOptions::windowed() } else { SolveOptions::default() };
    let opts = SolveOptions {
        grid_n: sec.get_usize_or("grid_n", defaults.grid_n)?,
        rmax_mult: sec.get_f64_or("rmax_mult", defaults.rmax_mult)?,
        starts: match sec.entries.get("starts") {
            Some(_) => sec.get_list_f64("starts")?,
            None => defaults.starts.clone(),
        },
        max_iters: sec.get_usize_or("max_iters", defaults.max_iters)?,
        ..defaults
    };
    let res = solve_cutoff_polaron(coeff, eps, kcut, &opts)?;
    let mut csv = CsvWriter::new("coeff,eps,kcut,value,grad_norm,iters,converged");
    csv.row(&[
        g17(coeff),
        g17(eps),
        g17(kcut),
        g17(res.value),
        g17(res.grad_norm),
        res.iterations.to_string(),
        res.converged.to_string(),
    ]);
    let mut artifacts = vec![(String::new(), csv.to_bytes())];
    if sec.get_str_or("profile", "false") == "true" {
        let mut pcsv = CsvWriter::new("r,f");
        for (r, f) in res.profile.radii.iter().zip(&res.profile.values) {
            pcsv.row(&[g17(*r), g17(*f)]);
        }
        artifacts.push(("profile".to_string(), pcsv.to_bytes()));
    }
    Ok(StageOutput {
        params: vec![
            ("coeff".into(), g17(coeff)),
            ("eps".into(), g17(eps)),
            ("kcut".into(), g17(kcut)),
            ("grid_n".into(), opts.grid_n.to_string()),
            ("rmax_mult".into(), g17(opts.rmax_mult)),
            ("starts".into(), join_f64(&opts.starts)),
            ("max_iters".into(), opts.max_iters.to_string()),
            ("profile".into(), sec.get_str_or("profile", "false").to_string()),
        ],
        artifacts,
    })
}

fn lyap_budget(sec: &Section, seed: u64, stream_base: u64) -> Result<LyapunovBudget> {
    Ok(LyapunovBudget {
        side: sec.get_usize("side")?,
        samples: sec.get_usize("samples")?,
        batches: sec.get_usize_or("batches", 100)?,
        grid_points: sec.get_usize_or("grid_points", 4)?,
        seed,
        stream_base,
    })
}

fn stage_lyapunov(sec: &Section, seed: u64, stream_base: u64) -> Result<StageOutput> {
    let kappa = sec.get_f64("kappa")?;
    let rho = sec.get_f64("rho")?;
    let p = sec.get_usize_or("p", 1)? as u32;
    let window = (sec.get_f64("t_min")?, sec.get_f64("t_max")?);
    let budget = lyap_budget(sec, seed, stream_base)?;
    let est = estimate_lyapunov(kappa, rho, p, window, &budget)?;
    let mut csv = CsvWriter::new("p,kappa,rho,t_min,t_max,slope,stderr,n,usable,guard_ok");
    csv.row(&[
        p.to_string(),
        g17(kappa),
        g17(rho),
        g17(window.0),
        g17(window.1),
        g17(est.slope),
        g17(est.stderr),
        est.samples.to_string(),
        est.usable.to_string(),
        est.guard_ok.to_string(),
    ]);
    Ok(StageOutput {
        params: vec![
            ("kappa".into(), g17(kappa)),
            ("rho".into(), g17(rho)),
            ("p".into(), p.to_string()),
            ("t_min".into(), g17(window.0)),
            ("t_max".into(), g17(window.1)),
            ("side".into(), budget.side.to_string()),
            ("samples".into(), budget.samples.to_string()),
            ("batches".into(), budget.batches.to_string()),
            ("grid_points".into(), budget.grid_points.to_string()),
        ],
        artifacts: vec![(String::new(), csv.to_bytes())],
    })
}

fn per_kappa_plans(
    sec: &Section,
    kappas: &[f64],
    seed: u64,
    stream_base: u64,
) -> Result<Vec<(f64, (f64, f64), LyapunovBudget)>> {
    let sides = sec.get_list_usize("sides")?;
    if sides.len() != kappas.len() {
        return Err(Error::Schema {
            stage: sec.name.clone(),
            message: "`sides` must have one entry per kappa".into(),
        });
    }
    let t_min = sec.get_f64("t_min")?;
    let t_max = sec.get_f64("t_max")?;
    let samples = sec.get_usize("samples")?;
    let batches = sec.get_usize_or("batches", 100)?;
    let grid_points = sec.get_usize_or("grid_points", 4)?;
    Ok(kappas
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            (
                k,
                (t_min, t_max),
                LyapunovBudget {
                    side: sides[i],
                    samples,
                    batches,
                    grid_points,
                    seed,
                    stream_base: stream_base + ((i as u64) << 24),
                },
            )
        })
        .collect())
}

fn stage_scan(sec: &Section, seed: u64, stream_base: u64) -> Result<StageOutput> {
    let rho = sec.get_f64("rho")?;
    let p = sec.get_usize_or("p", 1)? as u32;
    let kappas = sec.get_list_f64("kappas")?;
    if kappas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Schema {
            stage: sec.name.clone(),
            message: "`kappas` must be strictly ascending".into(),
        });
    }
    let plans = per_kappa_plans(sec, &kappas, seed, stream_base)?;
    // the unit polaron value may be pinned (replays record it) or solved here
    let p3_unit = match sec.entries.get("p3_unit") {
        Some(_) => sec.get_f64("p3_unit")?,
        None => {
            let opts = SolveOptions { grid_n: 1024, ..SolveOptions::default() };
            crate::polaron::solve_polaron(1.0, &opts)?.value
        }
    };
    let rows = asymptotic_scan(rho, p, &plans, p3_unit)?;
    let mut csv = CsvWriter::new("kappa,lambda,se,scaled,scaled_se,rhs,usable,guard_ok");
    for r in &rows {
        csv.row(&[
            g17(r.kappa),
            g17(r.lambda),
            g17(r.se),
            g17(r.scaled),
            g17(r.scaled_se),
            g17(r.rhs),
            r.usable.to_string(),
            r.guard_ok.to_string(),
        ]);
    }
    let mut params = scan_params(sec, rho, p, &kappas)?;
    params.push(("p3_unit".into(), g17(p3_unit)));
    Ok(StageOutput { params, artifacts: vec![(String::new(), csv.to_bytes())] })
}

fn scan_params(sec: &Section, rho: f64, p: u32, kappas: &[f64]) -> Result<Vec<(String, String)>> {
    Ok(vec![
        ("rho".into(), g17(rho)),
        ("p".into(), p.to_string()),
        ("kappas".into(), join_f64(kappas)),
        (
            "sides".into(),
            sec.get_list_usize("sides")?
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(","),
        ),
        ("t_min".into(), g17(sec.get_f64("t_min")?)),
        ("t_max".into(), g17(sec.get_f64("t_max")?)),
        ("samples".into(), sec.get_usize("samples")?.to_string()),
        ("batches".into(), sec.get_usize_or("batches", 100)?.to_string()),
        ("grid_points".into(), sec.get_usize_or("grid_points", 4)?.to_string()),
    ])
}

fn stage_intermittency(sec: &Section, seed: u64, stream_base: u64) -> Result<StageOutput> {
    let rho = sec.get_f64("rho")?;
    let kappas = sec.get_list_f64("kappas")?;
    let plans = per_kappa_plans(sec, &kappas, seed, stream_base)?;
    let rows = intermittency_scan(rho, &plans)?;
    let mut csv = CsvWriter::new("kappa,lambda1,se1,lambda2,se2,gap,gap_se");
    for r in &rows {
        csv.row(&[
            g17(r.kappa),
            g17(r.lambda1),
            g17(r.se1),
            g17(r.lambda2),
            g17(r.se2),
            g17(r.gap),
            g17(r.gap_se),
        ]);
    }
    let params = scan_params(sec, rho, 2, &kappas)?;
    Ok(StageOutput { params, artifacts: vec![(String::new(), csv.to_bytes())] })
}

fn join_f64(xs: &[f64]) -> String {
    xs.iter().map(|x| g17(*x)).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmpdir(tag: &str) -> std::path::PathBuf {
        let d = std::env::temp_dir().join(format!("pamcat_stage_test_{tag}_{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&d);
        std::fs::create_dir_all(&d).unwrap();
        d
    }

    #[test]
    fn empty_stage_list_writes_manifest_only() {
        let dir = tmpdir("empty");
        let out = run_config_text("seed = 3\n", &dir).unwrap();
        assert!(out.files.is_empty());
        assert!(manifest_path(&dir).exists());
    }

    #[test]
    fn missing_kappa_in_moment_stage_is_named_schema_error() {
        let dir = tmpdir("schema");
        let msg = match run_config_text("[moment]\nrho = 0.5\n", &dir) {
            Err(e) => e.to_string(),
            Ok(_) => panic!("expected a schema error"),
        };
        assert!(msg.contains("moment") && msg.contains("kappa"), "{msg}");
    }

    #[test]
    fn same_seed_reproduces_identical_digests() {
        let text = "seed = 11\n[sse]\nside = 4\nrho = 0.5\nt = 0.5\nreplicas = 50\n\n[kernels]\ntimes = 0.5,2\npoints = 0 0 0; 1 0 0\n";
        let d1 = tmpdir("rep1");
        let d2 = tmpdir("rep2");
        let o1 = run_config_text(text, &d1).unwrap();
        let o2 = run_config_text(text, &d2).unwrap();
        let dig = |o: &RunOutcome| {
            o.manifest
                .artifacts
                .iter()
                .map(|a| (a.file.clone(), a.sha256.clone()))
                .collect::<Vec<_>>()
        };
        assert_eq!(dig(&o1), dig(&o2));
    }

    #[test]
    fn manifest_replay_round_trip() {
        let text = "seed = 7\n[kernels]\ntimes = 1.0\npoints = 0 0 0\n";
        let d1 = tmpdir("replaya");
        run_config_text(text, &d1).unwrap();
        let d2 = tmpdir("replayb");
        let (_, mismatches) =
            crate::harness::replay_manifest(&manifest_path(&d1), &d2).unwrap();
        assert!(mismatches.is_empty(), "{mismatches:?}");
    }
}
