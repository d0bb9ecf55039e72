use std::io::{self, BufRead, Write};

use rasp::error::Error;
use rasp::frontend::parse_source;

use crate::session::Session;

const HELP: &str = "statements end with `;`
:arch NAME     layers and heads of NAME
:example TEXT  set the example input
:quit          leave";

/// True when the parser ran out of input, so more lines may complete it.
fn incomplete(source: &str) -> bool {
    matches!(parse_source(source), Err(Error::Parse(e)) if e.found == "end of input")
        || matches!(parse_source(source), Err(Error::Lex(e)) if e.message.contains("unterminated"))
}

/// `name("input")` on a bound s-op evaluates it on that input.
fn apply(session: &Session, line: &str) -> Option<String> {
    let line = line.strip_suffix(';').unwrap_or(line).trim_end();
    let (name, rest) = line.split_once('(')?;
    let name = name.trim();
    let input = rest
        .strip_suffix(')')?
        .trim()
        .strip_prefix('"')?
        .strip_suffix('"')?;
    if input.contains('"') || session.interp.get(name)?.node().is_none() {
        return None;
    }
    Some(match session.eval(name, input) {
        Ok(seq) => format!("{name}(\"{input}\") = {seq}"),
        Err(e) => format!("error: {e}"),
    })
}

pub fn run(session: &mut Session, input: impl BufRead, mut out: impl Write) -> io::Result<()> {
    let mut buffer = String::new();
    write!(out, ">> ")?;
    out.flush()?;
    for line in input.lines() {
        let line = line?;
        let trimmed = line.trim();
        if buffer.is_empty() && trimmed.starts_with(':') {
            let (command, arg) = trimmed.split_once(' ').unwrap_or((trimmed, ""));
            let arg = arg.trim();
            match command {
                ":quit" | ":q" => return Ok(()),
                ":help" => writeln!(out, "{HELP}")?,
                ":arch" => match session.arch(arg) {
                    Ok(report) => write!(out, "{report}")?,
                    Err(e) => writeln!(out, "error: {e}")?,
                },
                ":example" => {
                    session.set_example(arg.trim_matches('"'));
                    writeln!(out, "example = \"{}\"", session.example())?;
                }
                other => writeln!(out, "unknown command {other}; try :help")?,
            }
        } else if let Some(shown) = buffer.is_empty().then(|| apply(session, trimmed)).flatten() {
            writeln!(out, "{shown}")?;
        } else if !trimmed.is_empty() || !buffer.is_empty() {
            buffer.push_str(&line);
            buffer.push('\n');
            if incomplete(&buffer) {
                write!(out, ".. ")?;
                out.flush()?;
                continue;
            }
            match session.execute(&buffer) {
                Ok(echoes) => {
                    for echo in &echoes {
                        writeln!(out, "{}", session.render_echo(echo))?;
                    }
                }
                Err(e) => writeln!(out, "error: {e}")?,
            }
            buffer.clear();
        }
        write!(out, ">> ")?;
        out.flush()?;
    }
    writeln!(out)?;
    Ok(())
}
