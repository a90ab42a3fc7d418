use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use locallaw::ensembles::{derive_seed, sample_wigner, EntryLaw};
use locallaw::experiments::{
    edge_imag_experiment, fit_scaling, run_local_law, run_spectral_statistics, ExperimentRecord, FitMode, ScalingFit,
    SpectralStatsRun,
};
use locallaw::io::{
    classification_table, config_digest, experiment_table, fit_table, matrix_table, output_dir, spectral_stat_table,
    spectral_trial_table, spectrum_table, truncation_table, write_fit_plot, ClassificationRow, Format, OutputRef,
    ResultTable, RunConfig, RunManifest, OUT_ENV,
};
use locallaw::selftest::run_selftest;
use locallaw::spectral::eigenvalues;
use locallaw::truncation::{build_configuration, classify, Truncation};
use locallaw::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "locallaw", version, about = "Local semicircle law experiments for Wigner matrices")]
struct Cli {
    /// TOML run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// base seed, overriding the configuration
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// output directory
    #[arg(long, global = true, env = OUT_ENV)]
    out: Option<PathBuf>,
    /// worker threads; results do not depend on this
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit the upper triangle of one sampled matrix X
    Sample(MatrixArgs),
    /// Eigenvalues of W = X / sqrt(n) with the empirical distribution function
    Spectrum(MatrixArgs),
    /// Moments of Lambda_n over the configured grid, with log(nv) fits
    Locallaw,
    /// Kolmogorov distance to the semicircle law, with a log n fit
    Kolmogorov,
    /// Eigenvalue rigidity around the classical locations
    Rigidity,
    /// Eigenvector delocalization
    Deloc,
    /// Im Lambda_n outside the spectrum, with a log(n(kappa + v)) fit
    Edge,
    /// Truncation statistics of sampled matrices
    TruncateReport,
    /// Admissibility of the configuration of large entries
    ClassifyConfig,
    /// Exact-identity suite
    Selftest {
        #[arg(long, default_value_t = 200)]
        cases: usize,
        #[arg(long, default_value_t = 48)]
        max_n: usize,
    },
}

#[derive(Debug, clap::Args)]
struct MatrixArgs {
    /// matrix size; defaults to the first entry of the configured n_grid
    #[arg(long)]
    n: Option<usize>,
    /// entry law: gaussian, rademacher, student-t:NU or pareto:ALPHA
    #[arg(long)]
    law: Option<String>,
}

fn parse_law(s: &str) -> Result<EntryLaw> {
    let (name, param) = match s.split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (s, None),
    };
    let value = |p: Option<&str>| -> Result<f64> {
        p.ok_or_else(|| Error::Config(format!("law {name} needs a parameter, e.g. {name}:5")))?
            .parse()
            .map_err(|_| Error::Config(format!("bad law parameter in {s:?}")))
    };
    let law = match name {
        "gaussian" => EntryLaw::Gaussian,
        "rademacher" => EntryLaw::Rademacher,
        "student-t" => EntryLaw::StudentT { nu: value(param)? },
        "pareto" => EntryLaw::SymmetricPareto { alpha: value(param)? },
        _ => return Err(Error::Config(format!("unknown law {name:?}"))),
    };
    law.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(law)
}

struct Ctx {
    config: Option<(RunConfig, String)>,
    seed: Option<u64>,
    out: PathBuf,
    threads: usize,
    format: Format,
}

impl Ctx {
    fn config(&self) -> Result<RunConfig> {
        let (c, _) = self
            .config
            .as_ref()
            .ok_or_else(|| Error::Config("this command needs --config <path>".into()))?;
        let mut c = c.clone();
        if let Some(s) = self.seed {
            c.run.seed = s;
        }
        Ok(c)
    }

    fn digest(&self) -> Result<Option<String>> {
        self.config.as_ref().map(|(_, text)| config_digest(text)).transpose()
    }

    fn manifest(&self, command: &str, seed: u64) -> Result<RunManifest> {
        Ok(RunManifest::start(command, self.digest()?, seed, self.threads))
    }

    fn emit(&self, manifest: &mut RunManifest, table: &ResultTable, stem: &str) -> Result<()> {
        let path = table.write(&self.out, stem, self.format)?;
        manifest.outputs.push(OutputRef::new(&path, table)?);
        eprintln!("wrote {} ({} rows)", path.display(), table.len());
        Ok(())
    }

    fn emit_fits(&self, manifest: &mut RunManifest, fits: &[(String, ScalingFit)]) -> Result<()> {
        if fits.is_empty() {
            return Ok(());
        }
        for (label, fit) in fits {
            write_fit_plot(&self.out, label, fit)?;
            println!(
                "{label}: slope {:.4} +/- {:.4}, r^2 {:.4} over {} points",
                fit.slope,
                fit.slope_se,
                fit.r_squared,
                fit.predictor.len()
            );
        }
        self.emit(manifest, &fit_table(fits)?, "fits")
    }

    fn finish(&self, mut manifest: RunManifest) -> Result<()> {
        manifest.finish();
        let p = manifest.write(&self.out)?;
        eprintln!("wrote {}", p.display());
        Ok(())
    }
}

/// Fits that need at least three points are skipped with a note otherwise.
fn try_fit<R: locallaw::experiments::ScalingPoint>(label: String, records: &[R], mode: FitMode) -> Option<(String, ScalingFit)> {
    match fit_scaling(records, mode) {
        Ok(f) => Some((label, f)),
        Err(e) => {
            eprintln!("{label}: fit skipped: {e}");
            None
        }
    }
}

fn matrix_input(ctx: &Ctx, args: &MatrixArgs) -> Result<(EntryLaw, usize, u64)> {
    let cfg = ctx.config.as_ref().map(|_| ctx.config()).transpose()?;
    let law = match (&args.law, &cfg) {
        (Some(s), _) => parse_law(s)?,
        (None, Some(c)) => c.ensemble.clone(),
        (None, None) => EntryLaw::Gaussian,
    };
    let n = args
        .n
        .or_else(|| cfg.as_ref().and_then(|c| c.run.n_grid.first().copied()))
        .ok_or_else(|| Error::Config("matrix size needed: --n or a config n_grid".into()))?;
    if n == 0 {
        return Err(Error::Config("n must be >= 1".into()));
    }
    let seed = ctx.seed.or(cfg.map(|c| c.run.seed)).unwrap_or(0);
    Ok((law, n, seed))
}

fn spectral_stats(ctx: &Ctx, command: &str, with_vectors: bool) -> Result<(RunManifest, SpectralStatsRun)> {
    let c = ctx.config()?;
    let cfg = c.spectral_stats(with_vectors);
    let manifest = ctx.manifest(command, cfg.base_seed)?;
    let run = run_spectral_statistics(&cfg, ctx.threads)?;
    Ok((manifest, run))
}

fn nv_fits(records: &[ExperimentRecord]) -> Vec<(String, ScalingFit)> {
    let mut ps: Vec<u32> = records.iter().map(|r| r.p).collect();
    ps.sort_unstable();
    ps.dedup();
    ps.into_iter()
        .filter_map(|p| {
            let recs: Vec<ExperimentRecord> = records.iter().filter(|r| r.p == p).cloned().collect();
            try_fit(format!("nv_bulk_p{p}"), &recs, FitMode::NvBulk)
        })
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    let config = cli.config.as_deref().map(RunConfig::load).transpose()?;
    let ctx = Ctx {
        config,
        seed: cli.seed,
        out: output_dir(cli.out.as_deref()),
        threads: cli.threads.max(1),
        format: cli.format.into(),
    };
    match &cli.command {
        Command::Sample(args) => {
            let (law, n, seed) = matrix_input(&ctx, args)?;
            let mut m = ctx.manifest("sample", seed)?;
            let x = sample_wigner(&law, n, seed)?;
            ctx.emit(&mut m, &matrix_table(&x.matrix)?, "sample")?;
            ctx.finish(m)
        }
        Command::Spectrum(args) => {
            let (law, n, seed) = matrix_input(&ctx, args)?;
            let mut m = ctx.manifest("spectrum", seed)?;
            let eigs = eigenvalues(&sample_wigner(&law, n, seed)?.scaled())?;
            ctx.emit(&mut m, &spectrum_table(&eigs)?, "spectrum")?;
            ctx.finish(m)
        }
        Command::Locallaw => {
            let cfg = ctx.config()?.experiment();
            let mut m = ctx.manifest("locallaw", cfg.base_seed)?;
            let run = run_local_law(&cfg, ctx.threads)?;
            ctx.emit(&mut m, &experiment_table(&run.records)?, "locallaw")?;
            ctx.emit_fits(&mut m, &nv_fits(&run.records))?;
            println!("identity audit: {} checks over {} trials", run.audit.identities_checked, run.audit.trials);
            m.audit = Some(run.audit);
            ctx.finish(m)
        }
        Command::Kolmogorov | Command::Rigidity | Command::Deloc => {
            let (name, vectors) = match cli.command {
                Command::Kolmogorov => ("kolmogorov", false),
                Command::Rigidity => ("rigidity", false),
                _ => ("deloc", true),
            };
            let (mut m, run) = spectral_stats(&ctx, name, vectors)?;
            ctx.emit(&mut m, &spectral_stat_table(&run.records)?, name)?;
            ctx.emit(&mut m, &spectral_trial_table(&run.trials)?, &format!("{name}_trials"))?;
            if name == "kolmogorov" {
                let fits: Vec<_> = try_fit("n_kolmogorov".into(), &run.records, FitMode::NKolmogorov).into_iter().collect();
                ctx.emit_fits(&mut m, &fits)?;
            }
            for r in &run.records {
                println!(
                    "n = {}: median Kolmogorov {:.5}, rigidity bulk {:.4}, deloc ratio {:.4}",
                    r.n, r.median_kolmogorov, r.median_rigidity_bulk, r.median_deloc_ratio
                );
            }
            ctx.finish(m)
        }
        Command::Edge => {
            let cfg = ctx.config()?.experiment();
            let mut m = ctx.manifest("edge", cfg.base_seed)?;
            let e = edge_imag_experiment(&cfg, ctx.threads)?;
            ctx.emit(&mut m, &experiment_table(&e.run.records)?, "edge")?;
            ctx.emit_fits(&mut m, &[("edge_kappa".to_string(), e.fit)])?;
            m.audit = Some(e.run.audit);
            ctx.finish(m)
        }
        Command::TruncateReport => {
            let c = ctx.config()?;
            let constants = c.constants();
            let mut m = ctx.manifest("truncate-report", c.run.seed)?;
            let mut rows = Vec::new();
            for &n in &c.run.n_grid {
                let t = Truncation::new(&c.ensemble, n, constants.r_over(n))?;
                for trial in 0..c.run.trials {
                    let seed = derive_seed(c.run.seed, &[n as u64, trial as u64]);
                    let x = sample_wigner(&c.ensemble, n, seed)?;
                    rows.push((seed, t.hat(&x.matrix).1));
                }
            }
            ctx.emit(&mut m, &truncation_table(&rows)?, "truncation")?;
            ctx.finish(m)
        }
        Command::ClassifyConfig => {
            let c = ctx.config()?;
            let constants = c.constants();
            let mut m = ctx.manifest("classify-config", c.run.seed)?;
            let mut rows = Vec::new();
            for &n in &c.run.n_grid {
                let t = Truncation::new(&c.ensemble, n, constants.r_over(n))?;
                let params = constants.config_params(&c.ensemble, n);
                for trial in 0..c.run.trials {
                    let seed = derive_seed(c.run.seed, &[n as u64, trial as u64]);
                    let x = sample_wigner(&c.ensemble, n, seed)?;
                    let l = build_configuration(&t.hat(&x.matrix).0, params.clone());
                    rows.push(ClassificationRow::new(seed, &l, &classify(&l)));
                }
            }
            let admissible = rows.iter().filter(|r| r.r_admissible).count();
            println!("{admissible} of {} configurations r-admissible", rows.len());
            ctx.emit(&mut m, &classification_table(&rows)?, "classification")?;
            ctx.finish(m)
        }
        Command::Selftest { cases, max_n } => {
            let seed = ctx.seed.unwrap_or(0);
            let report = run_selftest(seed, *cases, *max_n)?;
            for c in &report.checks {
                println!(
                    "{:<26} {:>7} cases  max residual {:.3e}  tol {:.0e}  {}",
                    c.name,
                    c.cases,
                    c.max_residual,
                    c.tolerance,
                    if c.passed() { "ok" } else { "FAIL" }
                );
            }
            println!("{} identities checked", report.identities_checked());
            if report.passed() {
                Ok(())
            } else {
                Err(Error::IdentityAudit(format!("{} checks failed", report.failures().len())))
            }
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidLaw(_) => 1,
        Error::IdentityAudit(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
