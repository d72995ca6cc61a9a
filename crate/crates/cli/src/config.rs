//! `--config FILE` support: `key = value` lines become flags unless the same
//! flag is already on the command line.

use std::fs;

/// Returns `argv` with flags from the config file appended. Keys may use `_`
/// or `-`; `true` adds a bare switch and `false` omits it.
pub fn merge_config_file(argv: Vec<String>) -> Result<Vec<String>, String> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config file {path}: {e}"))?;
    let mut merged = argv;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("{path}:{}: expected key = value", lineno + 1))?;
        let flag = format!("--{}", key.trim().replace('_', "-"));
        let value = value.trim().trim_matches('"');
        if flag == "--config" || has_flag(&merged, &flag) {
            continue;
        }
        match value {
            "true" => merged.push(flag),
            "false" => {}
            v => {
                merged.push(flag);
                merged.push(v.to_string());
            }
        }
    }
    Ok(merged)
}

fn config_path(argv: &[String]) -> Option<String> {
    argv.iter().enumerate().find_map(|(i, a)| {
        if a == "--config" {
            argv.get(i + 1).cloned()
        } else {
            a.strip_prefix("--config=").map(str::to_string)
        }
    })
}

fn has_flag(argv: &[String], flag: &str) -> bool {
    argv.iter().any(|a| a == flag || a.starts_with(&format!("{flag}=")))
}
