//! Flat `key = value` run manifests. Each line becomes `--key value`; a bare
//! key or `key = true` becomes the flag `--key`.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use crate::error::{BenchError, Result};

pub fn parse_config(text: &str) -> Result<Vec<String>> {
    let mut args = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = match line.split_once('=') {
            Some((k, v)) => (k.trim(), Some(v.trim())),
            None => (line, None),
        };
        let key = key.trim_start_matches("--");
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(BenchError::Parse {
                line: idx + 1,
                col: 1,
                msg: format!("bad key in `{raw}`"),
            });
        }
        match value {
            None | Some("true") => args.push(format!("--{key}")),
            Some("false") => {}
            Some(v) => {
                args.push(format!("--{key}"));
                args.push(v.to_string());
            }
        }
    }
    Ok(args)
}

pub fn load_config(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    parse_config(&text)
}

/// Splices the arguments of any `--config FILE` right after the subcommand,
/// so flags given on the command line take precedence.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(sub) = args.iter().position(|a| a == "run") else {
        return Ok(args);
    };
    let mut rest = Vec::new();
    let mut files = Vec::new();
    let mut iter = args[sub + 1..].iter();
    while let Some(a) = iter.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            let path = iter
                .next()
                .ok_or_else(|| BenchError::Usage("--config needs a file".into()))?;
            files.push(path.clone());
        } else if let Some(path) = s.strip_prefix("--config=") {
            files.push(path.into());
        } else {
            rest.push(a.clone());
        }
    }
    let mut out: Vec<OsString> = args[..=sub].to_vec();
    for file in files {
        out.extend(load_config(Path::new(&file))?.into_iter().map(OsString::from));
    }
    out.extend(rest);
    Ok(out)
}
