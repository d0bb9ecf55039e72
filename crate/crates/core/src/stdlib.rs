//! The bundled program library and the task registry.
//!
//! Sources live in the workspace `lib/` directory and are compiled into the
//! binary. Setting `RASP_LIB_PATH` makes the loader read the same file names
//! from another directory instead.

use std::borrow::Cow;
use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

use crate::atom::Sequence;
use crate::error::{Error, EvalError};
use crate::frontend::{Interpreter, Value};
use crate::graph::{evaluate, Extensions, SOp, Value as Evaluated};

/// Environment variable naming a directory that replaces the bundled sources.
pub const LIB_PATH_VAR: &str = "RASP_LIB_PATH";

/// Longest input accepted by [`run_task`]; `most_freq` relies on it.
pub const MAX_TASK_INPUT: usize = 20000;

pub struct SourceFile {
    pub name: &'static str,
    pub text: &'static str,
    pub requires_select_best: bool,
}

macro_rules! source {
    ($name:literal, $ext:expr) => {
        SourceFile {
            name: $name,
            text: include_str!(concat!("../../../lib/", $name)),
            requires_select_best: $ext,
        }
    };
}

/// Library files in load order.
pub const SOURCES: &[SourceFile] = &[
    source!("selector_width.rasp", false),
    source!("reverse.rasp", false),
    source!("hist.rasp", false),
    source!("hist2.rasp", false),
    source!("sort.rasp", false),
    source!("most_freq.rasp", false),
    source!("dyck1.rasp", false),
    source!("shuffle_dyck.rasp", false),
    source!("dyck3.rasp", false),
    source!("count.rasp", false),
    source!("dyck_select_best.rasp", true),
];

#[derive(Debug, Error)]
pub enum StdlibError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}: {source}")]
    Program {
        file: &'static str,
        #[source]
        source: Box<Error>,
    },
}

fn source_text(file: &SourceFile) -> Result<Cow<'static, str>, StdlibError> {
    match std::env::var_os(LIB_PATH_VAR) {
        Some(dir) => {
            let path = PathBuf::from(dir).join(file.name);
            std::fs::read_to_string(&path)
                .map(Cow::Owned)
                .map_err(|source| StdlibError::Io { path, source })
        }
        None => Ok(Cow::Borrowed(file.text)),
    }
}

/// Runs every library file against `interp`. Files that need the select_best
/// extension are skipped unless the interpreter's graph enables it.
pub fn load_stdlib(interp: &mut Interpreter) -> Result<(), StdlibError> {
    let select_best = interp.graph.extensions().select_best;
    for file in SOURCES {
        if file.requires_select_best && !select_best {
            continue;
        }
        let text = source_text(file)?;
        interp.exec(&text).map_err(|source| StdlibError::Program {
            file: file.name,
            source: Box::new(source),
        })?;
    }
    Ok(())
}

#[derive(Debug, Serialize, PartialEq, Eq)]
pub struct Golden {
    pub input: &'static str,
    /// Expected display strings of the output, starting at `from_position`.
    pub expected: &'static [&'static str],
    /// 1 skips the BOS position.
    pub from_position: usize,
}

#[derive(Debug, Serialize, PartialEq, Eq)]
pub struct ExpectedArch {
    pub layers: usize,
    pub max_heads: Option<usize>,
    pub total_heads: Option<usize>,
    pub heads_per_layer: Option<&'static [usize]>,
}

#[derive(Debug, Serialize, PartialEq, Eq)]
pub struct TaskEntry {
    pub name: &'static str,
    pub source_file: &'static str,
    /// Library name of the s-op that computes the task.
    pub result: &'static str,
    pub assume_bos: bool,
    pub requires_select_best: bool,
    pub goldens: &'static [Golden],
    pub arch: ExpectedArch,
}

const fn arch(
    layers: usize,
    max_heads: Option<usize>,
    total_heads: Option<usize>,
    heads_per_layer: Option<&'static [usize]>,
) -> ExpectedArch {
    ExpectedArch {
        layers,
        max_heads,
        total_heads,
        heads_per_layer,
    }
}

pub const REGISTRY: &[TaskEntry] = &[
    TaskEntry {
        name: "reverse",
        source_file: "reverse.rasp",
        result: "reverse",
        assume_bos: false,
        requires_select_best: false,
        goldens: &[
            Golden {
                input: "abc",
                expected: &["c", "b", "a"],
                from_position: 0,
            },
            Golden {
                input: "hey",
                expected: &["y", "e", "h"],
                from_position: 0,
            },
        ],
        arch: arch(2, Some(1), None, Some(&[1, 1])),
    },
    TaskEntry {
        name: "hist_bos",
        source_file: "hist.rasp",
        result: "hist_bos",
        assume_bos: true,
        requires_select_best: false,
        goldens: &[
            Golden {
                input: "§aba",
                expected: &["2", "1", "2"],
                from_position: 1,
            },
            Golden {
                input: "§aabbaabb",
                expected: &["4", "4", "4", "4", "4", "4", "4", "4"],
                from_position: 1,
            },
        ],
        arch: arch(1, Some(1), None, Some(&[1])),
    },
    TaskEntry {
        name: "hist_nobos",
        source_file: "hist.rasp",
        result: "hist_nobos",
        assume_bos: false,
        requires_select_best: false,
        goldens: &[
            Golden {
                input: "aba",
                expected: &["2", "1", "2"],
                from_position: 0,
            },
            Golden {
                input: "hello",
                expected: &["1", "1", "2", "2", "1"],
                from_position: 0,
            },
        ],
        arch: arch(1, Some(2), None, Some(&[2])),
    },
    TaskEntry {
        name: "hist2",
        source_file: "hist2.rasp",
        result: "hist2",
        assume_bos: true,
        requires_select_best: false,
        goldens: &[
            Golden {
                input: "§aabcd",
                expected: &["1", "1", "3", "3", "3"],
                from_position: 1,
            },
            Golden {
                input: "§aaabbccdef",
                expected: &["1", "1", "1", "2", "2", "2", "2", "3", "3", "3"],
                from_position: 1,
            },
        ],
        arch: arch(2, Some(2), Some(3), None),
    },
    TaskEntry {
        name: "sort",
        source_file: "sort.rasp",
        result: "sort_input",
        assume_bos: true,
        requires_select_best: false,
        goldens: &[Golden {
            input: "§cba",
            expected: &["§", "a", "b", "c"],
            from_position: 0,
        }],
        arch: arch(2, Some(1), None, None),
    },
    TaskEntry {
        name: "most_freq",
        source_file: "most_freq.rasp",
        result: "most_freq",
        assume_bos: true,
        requires_select_best: false,
        goldens: &[Golden {
            input: "§abbccddd",
            expected: &["d", "b", "c", "a", "§", "§", "§", "§"],
            from_position: 1,
        }],
        arch: arch(3, Some(2), None, None),
    },
    TaskEntry {
        name: "dyck1",
        source_file: "dyck1.rasp",
        result: "dyck1PTF",
        assume_bos: false,
        requires_select_best: false,
        goldens: &[Golden {
            input: "()())",
            expected: &["P", "T", "P", "T", "F"],
            from_position: 0,
        }],
        arch: arch(2, Some(1), None, None),
    },
    TaskEntry {
        name: "dyck2",
        source_file: "dyck_select_best.rasp",
        result: "dyck2PTF",
        assume_bos: false,
        requires_select_best: true,
        goldens: &[],
        arch: arch(3, Some(1), None, None),
    },
    TaskEntry {
        name: "dyck3",
        source_file: "dyck3.rasp",
        result: "dyck3PTF",
        assume_bos: false,
        requires_select_best: false,
        goldens: &[],
        arch: arch(4, Some(2), None, None),
    },
    TaskEntry {
        name: "shuffle_dyck2",
        source_file: "shuffle_dyck.rasp",
        result: "shuffle_dyck2",
        assume_bos: false,
        requires_select_best: false,
        goldens: &[],
        arch: arch(2, None, Some(3), None),
    },
];

pub fn task(name: &str) -> Option<&'static TaskEntry> {
    REGISTRY.iter().find(|t| t.name == name)
}

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("unknown task `{0}`")]
    Unknown(String),
    #[error("input has {len} positions; tasks accept at most {max}")]
    TooLong { len: usize, max: usize },
    #[error(transparent)]
    Stdlib(#[from] StdlibError),
    #[error("library does not bind `{0}` to an s-op")]
    Missing(&'static str),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// An interpreter with the whole library loaded.
pub struct Stdlib {
    pub interp: Interpreter,
}

impl Stdlib {
    pub fn load(extensions: Extensions) -> Result<Stdlib, StdlibError> {
        let mut interp = Interpreter::new(extensions);
        load_stdlib(&mut interp)?;
        Ok(Stdlib { interp })
    }

    /// Loads with every extension enabled, so all tasks are available.
    pub fn load_all() -> Result<Stdlib, StdlibError> {
        Stdlib::load(Extensions { select_best: true })
    }

    pub fn sop(&self, name: &str) -> Option<SOp> {
        match self.interp.get(name) {
            Some(Value::SOp(s)) => Some(*s),
            _ => None,
        }
    }

    pub fn task_sop(&self, entry: &TaskEntry) -> Result<SOp, TaskError> {
        self.sop(entry.result)
            .ok_or(TaskError::Missing(entry.result))
    }

    /// Evaluates the s-op named `name` on the characters of `input`.
    pub fn eval(&self, sop: SOp, input: &str) -> Result<Sequence, EvalError> {
        match evaluate(&self.interp.graph, sop.id(), &Sequence::from_chars(input))? {
            Evaluated::Seq(s) => Ok(s),
            _ => unreachable!("s-op evaluated to a matrix"),
        }
    }

    pub fn run(&self, name: &str, input: &str) -> Result<Sequence, TaskError> {
        let entry = task(name).ok_or_else(|| TaskError::Unknown(name.to_string()))?;
        let len = input.chars().count();
        if len > MAX_TASK_INPUT {
            return Err(TaskError::TooLong {
                len,
                max: MAX_TASK_INPUT,
            });
        }
        let sop = self.task_sop(entry)?;
        Ok(self.eval(sop, input)?)
    }
}

/// Loads the library and runs one task. Prefer [`Stdlib::run`] when
/// running many inputs.
pub fn run_task(name: &str, input: &str) -> Result<Sequence, TaskError> {
    if task(name).is_none() {
        return Err(TaskError::Unknown(name.to_string()));
    }
    Stdlib::load_all()?.run(name, input)
}
