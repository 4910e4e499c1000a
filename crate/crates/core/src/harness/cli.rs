//! `odec` command line. [`run`] parses arguments, dispatches, and maps errors to exit
//! codes: 0 success, 1 invalid input, 2 runtime failure.

use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::{
    compare_open_closed, evaluate_policies, evaluate_with, io_error, load_trajectories, save_trajectories, selftest,
    EvalReport, ExperimentConfig, HarnessError, TrajectoryHeader, DEFAULT_EVAL_STEPS,
};
use crate::airl::{evaluate_learned_reward, train_odec_airl, write_diagnostics, LearnedReward};
use crate::env::{episode_seed, generate_demonstrations, replay, AssemblyConfig, EnvSpec, Mode, ScriptedExpert, UffConfig};
use crate::ppo::{train_odec_ppo, write_curve, PolicyVector};

#[derive(Parser, Debug)]
#[command(name = "odec", version, about = "Open-team decentralized RL and inverse RL")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write scripted-expert demonstrations to a trajectory file.
    GenExperts {
        #[command(flatten)]
        env: EnvArgs,
        /// Minimum number of environment steps; whole episodes are kept.
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train policies on the designed reward.
    TrainPpo {
        #[arg(long)]
        config: PathBuf,
    },
    /// Learn a reward and policies from the demonstrations named in the config.
    TrainAirl {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate a policy checkpoint, or the scripted expert, and write a report.
    Eval {
        #[arg(long, conflicts_with = "expert", required_unless_present = "expert")]
        checkpoint: Option<PathBuf>,
        /// Evaluate the scripted expert for the environment given by --env.
        #[arg(long)]
        expert: bool,
        #[command(flatten)]
        env: EnvArgs,
        #[arg(long, default_value_t = DEFAULT_EVAL_STEPS)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sample actions instead of taking each actor's most likely one.
        #[arg(long)]
        stochastic: bool,
        /// Report path; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare an open-mode report against a closed-mode report.
    Compare {
        open: PathBuf,
        closed: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a trajectory file and print one text frame per step.
    Render {
        trajectories: PathBuf,
        /// Only this episode.
        #[arg(long)]
        episode: Option<u64>,
        /// Wait for Enter after each frame; `q` stops.
        #[arg(long)]
        step: bool,
    },
    /// Run the likelihood, value and gradient checks.
    Selftest,
    /// Score trajectories with a learned reward.
    Score {
        #[arg(long)]
        reward: PathBuf,
        #[arg(long)]
        trajectories: PathBuf,
        /// Policy checkpoint supplying log π; log π = 0 when omitted.
        #[arg(long)]
        policy: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct EnvArgs {
    /// `uff` or `assembly`.
    #[arg(long, default_value = "uff")]
    env: String,
    #[arg(long, default_value_t = 2)]
    agents: usize,
    #[arg(long, default_value = "open")]
    mode: Mode,
}

impl EnvArgs {
    fn spec(&self) -> Result<EnvSpec, HarnessError> {
        let spec = match self.env.as_str() {
            "uff" => EnvSpec::Uff(UffConfig::new(self.agents, self.mode)),
            "assembly" if self.agents == 2 => EnvSpec::Assembly(AssemblyConfig::new(self.mode)),
            "assembly" => return Err(HarnessError::Invalid("assembly has exactly 2 agents".into())),
            other => return Err(HarnessError::Invalid(format!("unknown environment {other:?}"))),
        };
        spec.validate().map_err(|e| HarnessError::Invalid(e.to_string()))?;
        Ok(spec)
    }
}

/// Runs the CLI against the process's stdin and stdout.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdin = std::io::stdin();
    run_with(argv, &mut std::io::stdout().lock(), &mut stdin.lock())
}

/// Runs the CLI with explicit output and input streams. Errors go to stderr.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, input: &mut dyn BufRead) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command, out, input) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, input: &mut dyn BufRead) -> Result<i32, HarnessError> {
    let stdout = |e: std::io::Error| HarnessError::Io(format!("stdout: {e}"));
    match command {
        Command::GenExperts { env, steps, seed, out: path } => {
            let spec = env.spec()?;
            let expert = ScriptedExpert::new(&spec)?;
            let demos = generate_demonstrations(&spec, &expert, steps, seed)?;
            save_trajectories(&path, &TrajectoryHeader::new(&spec, Some(seed))?, &demos)?;
            let total: usize = demos.iter().map(|t| t.horizon()).sum();
            writeln!(out, "wrote {} episodes, {total} steps to {}", demos.len(), path.display()).map_err(stdout)?;
        }
        Command::TrainPpo { config } => {
            let config = ExperimentConfig::load(&config)?;
            create_dir(&config.output_dir)?;
            let (policies, curve) = train_odec_ppo(&config.spec, &config.training, |p| {
                let reward = p.mean_episode_reward.map_or("-".to_string(), |r| format!("{r:.3}"));
                let _ = writeln!(out, "step {} episodes {} reward {reward}", p.step, p.episodes);
            })?;
            policies.save(&config.output_dir.join("policy.json"))?;
            write_curve(&config.output_dir.join("curve.csv"), &curve)?;
        }
        Command::TrainAirl { config } => {
            let config = ExperimentConfig::load(&config)?;
            let Some(demo_path) = &config.demonstrations else {
                return Err(HarnessError::Config("train-airl needs `demonstrations`".into()));
            };
            let demos = load_trajectories(demo_path)?;
            if demos.header.spec != config.spec {
                return Err(HarnessError::Schema(format!(
                    "demonstrations are for {}, config is for {}",
                    demos.header.env,
                    config.spec.tag()
                )));
            }
            create_dir(&config.output_dir)?;
            let outcome = train_odec_airl(&config.spec, &demos.trajectories, &config.irl, |d| {
                let _ = writeln!(
                    out,
                    "iteration {} step {} loss {:.4} accuracy {:.3} learned {:.3}",
                    d.iteration,
                    d.step,
                    d.discriminator.loss,
                    d.discriminator.accuracy(),
                    d.mean_learned_reward
                );
            })?;
            if let Some(at) = outcome.collapsed_at {
                writeln!(out, "discriminator collapsed at iteration {at}; stopped early").map_err(stdout)?;
            }
            outcome.policies.save(&config.output_dir.join("policy.json"))?;
            outcome.reward.save(&config.output_dir.join("reward.json"))?;
            write_diagnostics(&config.output_dir.join("diagnostics.csv"), &outcome.diagnostics)?;
        }
        Command::Eval {
            checkpoint,
            expert,
            env,
            steps,
            seed,
            stochastic,
            out: path,
        } => {
            let report = if expert {
                let spec = env.spec()?;
                let expert = ScriptedExpert::new(&spec)?;
                evaluate_with(&spec, steps, seed, true, |s| Ok(expert.act(s)?))?
            } else {
                let path = checkpoint.expect("clap requires --checkpoint without --expert");
                evaluate_policies(&PolicyVector::load(&path)?, steps, seed, !stochastic)?
            };
            emit(out, path.as_deref(), &report)?;
        }
        Command::Compare { open, closed, out: path } => {
            let comparison = compare_open_closed(&EvalReport::load(&open)?, &EvalReport::load(&closed)?)?;
            emit(out, path.as_deref(), &comparison)?;
        }
        Command::Render {
            trajectories,
            episode,
            step,
        } => {
            let file = load_trajectories(&trajectories)?;
            let seed = file.header.seed.unwrap_or(0);
            let mut env = file.header.spec.build()?;
            for traj in &file.trajectories {
                if episode.is_some_and(|e| e != traj.episode) {
                    continue;
                }
                let replayed = replay(env.as_mut(), traj, seed)?;
                if replayed != *traj {
                    return Err(HarnessError::Schema(format!(
                        "episode {} does not replay in {} with seed {seed}",
                        traj.episode, file.header.env
                    )));
                }
                env.reset(episode_seed(seed, traj.episode));
                write!(out, "episode {}\n{}", traj.episode, env.render()).map_err(stdout)?;
                for record in &traj.records {
                    if step && !wait(out, input)? {
                        return Ok(0);
                    }
                    env.step(&record.action)?;
                    write!(out, "{}", env.render()).map_err(stdout)?;
                }
            }
        }
        Command::Selftest => {
            let checks = selftest()?;
            let mut failed = 0;
            for c in &checks {
                let tag = if c.passed { "ok" } else { "FAIL" };
                writeln!(out, "{tag:4} {}: {}", c.name, c.detail).map_err(stdout)?;
                failed += usize::from(!c.passed);
            }
            writeln!(out, "{} checks, {failed} failed", checks.len()).map_err(stdout)?;
            return Ok(if failed == 0 { 0 } else { 2 });
        }
        Command::Score {
            reward,
            trajectories,
            policy,
        } => {
            let reward = LearnedReward::load(&reward)?;
            let file = load_trajectories(&trajectories)?;
            if file.header.spec != *reward.spec() {
                return Err(HarnessError::Schema(format!(
                    "trajectories are for {}, reward is for {}",
                    file.header.env,
                    reward.spec().tag()
                )));
            }
            let policy = policy.map(|p| PolicyVector::load(&p)).transpose()?;
            let scores = evaluate_learned_reward(&reward, &file.trajectories, |s, a| match &policy {
                Some(p) => Ok(p.log_prob(s, a)?),
                None => Ok(0.0),
            })?;
            for (traj, score) in file.trajectories.iter().zip(scores) {
                writeln!(out, "{} {score}", traj.episode).map_err(stdout)?;
            }
        }
    }
    Ok(0)
}

fn create_dir(dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

fn emit<T: serde::Serialize>(out: &mut dyn Write, path: Option<&Path>, value: &T) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::Io(e.to_string()))?;
    text.push('\n');
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| io_error(p, e)),
        None => out.write_all(text.as_bytes()).map_err(|e| HarnessError::Io(format!("stdout: {e}"))),
    }
}

/// Blocks until a line is read. False on end of input or `q`.
fn wait(out: &mut dyn Write, input: &mut dyn BufRead) -> Result<bool, HarnessError> {
    let io = |e: std::io::Error| HarnessError::Io(e.to_string());
    write!(out, "-- Enter to step, q to quit --\n").map_err(io)?;
    out.flush().map_err(io)?;
    let mut line = String::new();
    let n = input.read_line(&mut line).map_err(io)?;
    Ok(n > 0 && line.trim() != "q")
}
