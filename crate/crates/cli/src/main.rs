mod repl;
mod session;

use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rasp::stdlib::{task, Stdlib};
use rasp::viz::FlowFormat;
use serde_json::json;

use session::{CliError, Options, Session};

#[derive(Parser)]
#[command(name = "rasp", version, about = "Run, compile and draw RASP programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Enable the `score` and `select_best` extension.
    #[arg(long)]
    enable_select_best: bool,
    /// Start without the bundled library.
    #[arg(long)]
    no_stdlib: bool,
}

impl Common {
    fn options(&self, example: Option<String>, bos: bool) -> Options {
        Options {
            select_best: self.enable_select_best,
            stdlib: !self.no_stdlib,
            example,
            bos,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DrawFormat {
    Dot,
    Json,
    Text,
}

impl From<DrawFormat> for FlowFormat {
    fn from(f: DrawFormat) -> FlowFormat {
        match f {
            DrawFormat::Dot => FlowFormat::Dot,
            DrawFormat::Json => FlowFormat::Json,
            DrawFormat::Text => FlowFormat::Text,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Interactive read-evaluate-print loop.
    Repl {
        #[arg(long)]
        example: Option<String>,
        /// Prepend a BOS token to example inputs.
        #[arg(long)]
        bos: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Execute a program file.
    Run {
        file: PathBuf,
        /// Input every binding is shown on.
        #[arg(long)]
        example: Option<String>,
        /// Print bindings and reports as JSON.
        #[arg(long)]
        json: bool,
        /// Also report the architecture of these names.
        #[arg(long = "arch", value_name = "NAME")]
        arch: Vec<String>,
        /// Also draw the flow of this name on the example.
        #[arg(long, value_name = "NAME")]
        draw: Option<String>,
        #[arg(long)]
        bos: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Print the compiled architecture of one name in a file.
    Arch {
        file: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Draw the compiled flow of one name on an input.
    Draw {
        file: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long)]
        input: String,
        #[arg(long, value_enum, default_value = "dot")]
        format: DrawFormat,
        #[command(flatten)]
        common: Common,
    },
    /// Run a registered library task on an input.
    Task { name: String, input: String },
}

fn read(file: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(file)
        .map_err(|e| CliError::io(format!("cannot read {}: {e}", file.display())))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Repl {
            example,
            bos,
            common,
        } => {
            let mut session = Session::new(&common.options(example, bos))?;
            let stdin = io::stdin();
            repl::run(&mut session, stdin.lock(), io::stdout())
                .map_err(|e| CliError::io(e.to_string()))
        }
        Command::Run {
            file,
            example,
            json,
            arch,
            draw,
            bos,
            common,
        } => {
            let source = read(&file)?;
            let mut session = Session::new(&common.options(example, bos))?;
            let echoes = session.execute(&source)?;
            let mut reports = serde_json::Map::new();
            for name in &arch {
                let report = session.arch(name)?;
                reports.insert(
                    name.clone(),
                    serde_json::to_value(&report).expect("report serialises"),
                );
            }
            let drawn = match &draw {
                Some(name) => Some(session.draw(name, session.example(), FlowFormat::Json)?),
                None => None,
            };
            if json {
                let mut draws = session.draws.clone();
                if let Some(d) = &drawn {
                    draws.push(serde_json::from_str(d).expect("flow json is valid"));
                }
                let out = json!({
                    "example": session.example(),
                    "bindings": session.bindings,
                    "arch": reports,
                    "draws": draws,
                });
                println!(
                    "{}",
                    serde_json::to_string_pretty(&out).expect("json output")
                );
            } else {
                for echo in &echoes {
                    println!("{}", session.render_echo(echo));
                }
                for name in &arch {
                    print!("{name}: {}", session.arch(name)?);
                }
                if let Some(name) = &draw {
                    print!(
                        "{}",
                        session.draw(name, session.example(), FlowFormat::Text)?
                    );
                }
            }
            Ok(())
        }
        Command::Arch {
            file,
            target,
            json,
            common,
        } => {
            let source = read(&file)?;
            let mut session = Session::new(&common.options(None, false))?;
            session.execute(&source)?;
            let report = session.arch(&target)?;
            if json {
                println!("{}", report.to_json());
            } else {
                print!("{report}");
            }
            Ok(())
        }
        Command::Draw {
            file,
            target,
            input,
            format,
            common,
        } => {
            let source = read(&file)?;
            let mut session = Session::new(&common.options(None, false))?;
            session.execute(&source)?;
            print!("{}", session.draw(&target, &input, format.into())?);
            Ok(())
        }
        Command::Task { name, input } => {
            if task(&name).is_none() {
                return Err(CliError::eval(format!("unknown task `{name}`")));
            }
            let lib = Stdlib::load_all()?;
            let out = lib
                .run(&name, &input)
                .map_err(|e| CliError::eval(e.to_string()))?;
            println!("{out}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
