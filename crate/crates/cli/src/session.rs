use std::collections::BTreeMap;
use std::fmt;

use rasp::compiler::{compile_report, ArchReport};
use rasp::error::Error;
use rasp::frontend::{parse_source, Interpreter, Outcome, Value};
use rasp::graph::{evaluate, EvalContext, Extensions, Value as Evaluated};
use rasp::stdlib::{load_stdlib, StdlibError};
use rasp::viz::{ascii_grid, render_flow, FlowFormat};
use rasp::Sequence;

pub const DEFAULT_EXAMPLE: &str = "hello";
pub const BOS: char = '§';

pub const EXIT_IO: i32 = 2;
pub const EXIT_SYNTAX: i32 = 3;
pub const EXIT_EVAL: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl CliError {
    pub fn io(message: impl Into<String>) -> CliError {
        CliError {
            code: EXIT_IO,
            message: message.into(),
        }
    }

    pub fn eval(message: impl Into<String>) -> CliError {
        CliError {
            code: EXIT_EVAL,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        CliError {
            code: if e.is_syntax() {
                EXIT_SYNTAX
            } else {
                EXIT_EVAL
            },
            message: e.to_string(),
        }
    }
}

impl From<StdlibError> for CliError {
    fn from(e: StdlibError) -> CliError {
        CliError {
            code: match &e {
                StdlibError::Io { .. } => EXIT_IO,
                StdlibError::Program { source, .. } if source.is_syntax() => EXIT_SYNTAX,
                StdlibError::Program { .. } => EXIT_EVAL,
            },
            message: format!("loading the library: {e}"),
        }
    }
}

pub struct Options {
    pub select_best: bool,
    pub stdlib: bool,
    pub example: Option<String>,
    pub bos: bool,
}

/// One displayable result of running a statement.
pub enum Echo {
    /// Already formatted text.
    Text(String),
    Binding {
        name: String,
        shown: String,
    },
}

/// Interpreter state shared by `run` and the REPL.
pub struct Session {
    pub interp: Interpreter,
    example: String,
    bos: bool,
    /// Names bound by user code, with their display strings on the example.
    pub bindings: BTreeMap<String, String>,
    pub draws: Vec<serde_json::Value>,
}

impl Session {
    pub fn new(options: &Options) -> Result<Session, CliError> {
        let mut interp = Interpreter::new(Extensions {
            select_best: options.select_best,
        });
        if options.stdlib {
            load_stdlib(&mut interp)?;
        }
        let mut session = Session {
            interp,
            example: String::new(),
            bos: options.bos,
            bindings: BTreeMap::new(),
            draws: Vec::new(),
        };
        session.set_example(options.example.as_deref().unwrap_or(DEFAULT_EXAMPLE));
        Ok(session)
    }

    pub fn example(&self) -> &str {
        &self.example
    }

    pub fn set_example(&mut self, example: &str) {
        self.example = if self.bos && !example.starts_with(BOS) {
            format!("{BOS}{example}")
        } else {
            example.to_string()
        };
    }

    /// Runs every statement in `source`, stopping at the first error.
    pub fn execute(&mut self, source: &str) -> Result<Vec<Echo>, CliError> {
        let stmts = parse_source(source)?;
        let mut echoes = Vec::new();
        for stmt in &stmts {
            let outcome = self.interp.exec_stmt(stmt).map_err(Error::from)?;
            if let Some(echo) = self.show(outcome)? {
                echoes.push(echo);
            }
        }
        Ok(echoes)
    }

    fn show(&mut self, outcome: Outcome) -> Result<Option<Echo>, CliError> {
        match outcome {
            Outcome::Bound { name, value } => {
                let shown = self.display_value(&value)?;
                self.bindings.insert(name.clone(), shown.clone());
                Ok(Some(Echo::Binding { name, shown }))
            }
            Outcome::Defined { .. } => Ok(None),
            Outcome::Value(value) => {
                let shown = self.display_value(&value)?;
                Ok(Some(Echo::Text(shown)))
            }
            Outcome::SetExample(example) => {
                self.set_example(&example);
                Ok(None)
            }
            Outcome::Draw { value, input } => {
                let Some(id) = value.node() else {
                    return Err(CliError::eval(format!("cannot draw {}", value.kind_name())));
                };
                let json = render_flow(&self.interp.graph, id, &input, FlowFormat::Json)
                    .map_err(Error::from)?;
                self.draws
                    .push(serde_json::from_str(&json).expect("flow json is valid"));
                let text = render_flow(&self.interp.graph, id, &input, FlowFormat::Text)
                    .map_err(Error::from)?;
                Ok(Some(Echo::Text(text)))
            }
        }
    }

    /// The value's display string on the current example.
    pub fn display_value(&self, value: &Value) -> Result<String, CliError> {
        let input = Sequence::from_chars(&self.example);
        match value {
            Value::SOp(s) => {
                match evaluate(&self.interp.graph, s.id(), &input).map_err(Error::from)? {
                    Evaluated::Seq(seq) => Ok(seq.to_string()),
                    _ => unreachable!("s-op evaluated to a matrix"),
                }
            }
            Value::Selector(s) => {
                let mut ctx =
                    EvalContext::new(&self.interp.graph, input.clone()).map_err(Error::from)?;
                let matrix = ctx.selector(*s).map_err(Error::from)?;
                let tokens: Vec<String> = input.iter().map(|a| a.to_string()).collect();
                Ok(ascii_grid(matrix, &tokens))
            }
            Value::Scorer(s) => {
                let mut ctx = EvalContext::new(&self.interp.graph, input).map_err(Error::from)?;
                let scores = ctx.scorer(*s).map_err(Error::from)?;
                let rows: Vec<String> = scores
                    .rows()
                    .iter()
                    .map(|r| {
                        r.iter()
                            .map(|x| rasp::atom::format_number(*x))
                            .collect::<Vec<_>>()
                            .join(" ")
                    })
                    .collect();
                Ok(rows.join("\n"))
            }
            other => Ok(other.to_string()),
        }
    }

    /// Formats an echo the way the REPL prints it.
    pub fn render_echo(&self, echo: &Echo) -> String {
        match echo {
            Echo::Text(t) => t.trim_end().to_string(),
            Echo::Binding { name, shown } => {
                let is_node = self.interp.get(name).and_then(Value::node).is_some();
                if !is_node {
                    format!("{name} = {shown}")
                } else if shown.contains('\n') {
                    format!("{name}(\"{}\") =\n{}", self.example, shown.trim_end())
                } else {
                    format!("{name}(\"{}\") = {shown}", self.example)
                }
            }
        }
    }

    pub fn arch(&self, name: &str) -> Result<ArchReport, CliError> {
        match self.interp.get(name) {
            Some(v) => match v.node() {
                Some(id) => Ok(compile_report(&self.interp.graph, id)),
                None => Err(CliError::eval(format!(
                    "`{name}` is {}, not an s-op",
                    v.kind_name()
                ))),
            },
            None => Err(CliError::eval(format!("`{name}` is not bound"))),
        }
    }

    /// Evaluates the s-op bound to `name` on `input`.
    pub fn eval(&self, name: &str, input: &str) -> Result<String, CliError> {
        let value = self
            .interp
            .get(name)
            .ok_or_else(|| CliError::eval(format!("`{name}` is not bound")))?;
        match value {
            Value::SOp(s) => {
                match evaluate(&self.interp.graph, s.id(), &Sequence::from_chars(input))
                    .map_err(Error::from)?
                {
                    Evaluated::Seq(seq) => Ok(seq.to_string()),
                    _ => unreachable!("s-op evaluated to a matrix"),
                }
            }
            other => Err(CliError::eval(format!(
                "`{name}` is {}, not an s-op",
                other.kind_name()
            ))),
        }
    }

    pub fn draw(&self, name: &str, input: &str, format: FlowFormat) -> Result<String, CliError> {
        let id = match self.interp.get(name) {
            Some(v) => v.node().ok_or_else(|| {
                CliError::eval(format!("`{name}` is {}, not an s-op", v.kind_name()))
            })?,
            None => return Err(CliError::eval(format!("`{name}` is not bound"))),
        };
        render_flow(&self.interp.graph, id, input, format)
            .map_err(|e| CliError::from(Error::from(e)))
    }
}
