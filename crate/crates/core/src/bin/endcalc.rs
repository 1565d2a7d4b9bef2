use clap::{Args, Parser, Subcommand};
use endcalc::experiments::{list_experiments, list_experiments_json, run, Experiment, ExperimentConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "endcalc", version, about = "Semiclassical calculus experiments on cylindrical ends")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the available experiments.
    List {
        #[arg(long)]
        json: bool,
    },
    #[command(external_subcommand)]
    Run(Vec<String>),
}

#[derive(Parser)]
#[command(no_binary_name = true)]
struct RunArgs {
    experiment: String,
    #[command(flatten)]
    opts: RunOpts,
}

#[derive(Args)]
struct RunOpts {
    /// `key = value` file; keys not given fall back to the experiment defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides as `--key value` pairs, applied after the config file.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    overrides: Vec<String>,
}

fn configure(args: &RunArgs) -> Result<ExperimentConfig, String> {
    let exp: Experiment = args.experiment.parse().map_err(|e| format!("{e}"))?;
    let mut cfg = match &args.opts.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let text = format!("experiment = {exp}\n{text}");
            let cfg = ExperimentConfig::from_text(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            if cfg.experiment != exp {
                return Err(format!("{} configures `{}`, not `{exp}`", path.display(), cfg.experiment));
            }
            cfg
        }
        None => ExperimentConfig::for_experiment(exp),
    };
    let mut it = args.opts.overrides.iter();
    while let Some(flag) = it.next() {
        let key = flag.strip_prefix("--").ok_or_else(|| format!("expected `--key value`, got `{flag}`"))?;
        let (key, value) = match key.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => (key.to_string(), it.next().ok_or_else(|| format!("missing value for `--{key}`"))?.clone()),
        };
        if key == "experiment" {
            return Err("the experiment is given positionally".into());
        }
        cfg.set(&key.replace('-', "_"), &value).map_err(|e| e.to_string())?;
    }
    Ok(cfg)
}

fn init_threads() -> Result<(), String> {
    if let Ok(v) = std::env::var("ENDCALC_THREADS") {
        let n: usize =
            v.trim().parse().map_err(|_| format!("ENDCALC_THREADS must be a positive integer, got `{v}`"))?;
        if n == 0 {
            return Err("ENDCALC_THREADS must be a positive integer, got `0`".into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match cli.command {
        Command::List { json } => {
            print!("{}", if json { list_experiments_json() + "\n" } else { list_experiments() });
            Ok(true)
        }
        Command::Run(raw) => {
            let args =
                RunArgs::try_parse_from(raw).map_err(|e| e.to_string().lines().next().unwrap_or("").to_string())?;
            let cfg = configure(&args)?;
            let out = run(&cfg).map_err(|e| e.to_string())?;
            for c in &out.summary.checks {
                println!(
                    "{} {} = {:e} {} {:e}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.relation,
                    c.threshold
                );
            }
            println!("wrote {}", cfg.output.display());
            Ok(out.pass())
        }
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("endcalc: {e}");
            ExitCode::from(2)
        }
    }
}
