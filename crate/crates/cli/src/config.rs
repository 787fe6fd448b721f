//! `--config FILE` support: `key = value` lines become `--key value` flags
//! placed before the command-line flags, so explicit flags win.

use std::path::Path;

use crate::error::{CliError, CliResult};

pub fn parse_config(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("config line {}: expected key=value", i + 1)));
        };
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
        }
        out.push((key, v.trim().trim_matches('"').to_string()));
    }
    Ok(out)
}

fn config_path(args: &[String]) -> CliResult<Option<String>> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it
                .next()
                .cloned()
                .map(Some)
                .ok_or_else(|| CliError::Usage("--config needs a file".into()));
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Ok(Some(p.to_string()));
        }
    }
    Ok(None)
}

/// Inserts config-file flags right after the subcommand name.
pub fn merge_config(args: Vec<String>, commands: &[&str]) -> CliResult<Vec<String>> {
    let Some(path) = config_path(&args)? else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(Path::new(&path)).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    let entries = parse_config(&text)?;
    let Some(at) = args.iter().position(|a| commands.contains(&a.as_str())) else {
        return Ok(args);
    };
    let mut extra = Vec::new();
    for (k, v) in entries {
        match v.as_str() {
            "true" => extra.push(format!("--{k}")),
            "false" => {}
            _ => {
                extra.push(format!("--{k}"));
                extra.push(v);
            }
        }
    }
    let mut merged = args[..=at].to_vec();
    merged.extend(extra);
    merged.extend_from_slice(&args[at + 1..]);
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_and_comments() {
        let c = parse_config("# c\nreps = 100\nout_prefix=\"a/b\"\n\nraw=true\n").unwrap();
        assert_eq!(
            c,
            vec![
                ("reps".into(), "100".into()),
                ("out-prefix".into(), "a/b".into()),
                ("raw".into(), "true".into())
            ]
        );
        assert!(parse_config("oops").is_err());
    }

    #[test]
    fn config_flags_come_before_explicit_ones() {
        let dir = std::env::temp_dir().join(format!("slope-lab-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let f = dir.join("c.cfg");
        std::fs::write(&f, "reps=5\nraw=true\nadjusted=false\n").unwrap();
        let args: Vec<String> = ["slope-lab", "cauchy-sim", "--config", f.to_str().unwrap(), "--reps", "9"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let m = merge_config(args, &["cauchy-sim"]).unwrap();
        assert_eq!(&m[2..5], &["--reps", "5", "--raw"]);
        assert_eq!(m.last().unwrap(), "9");
        std::fs::remove_dir_all(dir).unwrap();
    }
}
