//! Flag and config-file handling. Both use the same keys; flags win.

use std::collections::BTreeMap;
use std::fs;
use std::str::FromStr;

use crate::CliError;

/// Flags that take no value.
const SWITCHES: &[&str] = &["force", "conditional"];

/// Keys accepted by every subcommand.
const COMMON: &[(&str, &str)] = &[("format", "json"), ("out", ""), ("threads", "0")];

const PLANE: &[(&str, &str)] = &[("normal", "0,0,1"), ("type", ""), ("patch", "1x1"), ("force", "false")];

const SIM: &[(&str, &str)] = &[
    ("samples", "2000"),
    ("seed", "0"),
    ("density", "20"),
    ("offset", "0,0,0"),
    ("per-sample", ""),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Lattice,
    Kappa,
    Regions,
    Riesz,
    Gsum,
    Krbound,
    Simulate,
    Sweep,
    Selftest,
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "lattice" => Command::Lattice,
            "kappa" => Command::Kappa,
            "regions" => Command::Regions,
            "riesz" => Command::Riesz,
            "gsum" => Command::Gsum,
            "krbound" => Command::Krbound,
            "simulate" => Command::Simulate,
            "sweep" => Command::Sweep,
            "selftest" => Command::Selftest,
            _ => return Err(CliError::Invalid(format!("unknown subcommand `{s}`"))),
        })
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Lattice => "lattice",
            Command::Kappa => "kappa",
            Command::Regions => "regions",
            Command::Riesz => "riesz",
            Command::Gsum => "gsum",
            Command::Krbound => "krbound",
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Selftest => "selftest",
        }
    }

    /// Keys and defaults for this subcommand. An empty default means unset.
    fn keys(&self) -> Vec<(&'static str, &'static str)> {
        let mut keys: Vec<(&str, &str)> = COMMON.to_vec();
        let m_keys = [("m", ""), ("m-list", "")];
        match self {
            Command::Lattice => {
                keys.retain(|k| k.0 != "format");
                keys.extend([("format", "csv"), ("m", "")]);
            }
            Command::Kappa => keys.extend(m_keys),
            Command::Regions => {
                keys.push(("m", ""));
                keys.extend(PLANE);
                keys.extend([("c", ""), ("rho", ""), ("c-prime", ""), ("conditional", "false"), ("cap-s", "")]);
            }
            Command::Riesz => {
                keys.extend(m_keys);
                keys.push(("s", "0.5,1,1.5"));
            }
            Command::Gsum => {
                keys.extend(m_keys);
                keys.extend(PLANE);
            }
            Command::Krbound => {
                keys.push(("m", ""));
                keys.extend(PLANE);
                keys.extend([("terms", "full"), ("mode", "unconditional")]);
            }
            Command::Simulate => {
                keys.push(("m", ""));
                keys.extend(PLANE);
                keys.extend(SIM);
            }
            Command::Sweep => {
                keys.push(("m-list", ""));
                keys.extend(PLANE);
                keys.extend(SIM);
                keys.push(("epsilon", "0.1"));
            }
            Command::Selftest => {}
        }
        keys
    }
}

/// The effective configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    values: BTreeMap<String, String>,
}

fn parse_config_file(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Invalid(format!("config line {}: expected key=value", lineno + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn parse_flags(args: &[String]) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let flag = arg
            .strip_prefix("--")
            .ok_or_else(|| CliError::Invalid(format!("unexpected argument `{arg}`")))?;
        if let Some((k, v)) = flag.split_once('=') {
            out.push((k.to_string(), v.to_string()));
        } else if SWITCHES.contains(&flag) {
            out.push((flag.to_string(), "true".to_string()));
        } else {
            let v = it.next().ok_or_else(|| CliError::Invalid(format!("flag --{flag} needs a value")))?;
            out.push((flag.to_string(), v.clone()));
        }
    }
    Ok(out)
}

impl RunConfig {
    /// Build from `argv` without the program name.
    pub fn from_args(args: &[String]) -> Result<Self, CliError> {
        let (cmd, rest) = args.split_first().ok_or_else(|| CliError::Invalid(usage()))?;
        let command: Command = cmd.parse()?;
        let flags = parse_flags(rest)?;
        let mut values: BTreeMap<String, String> = BTreeMap::new();
        for (k, v) in command.keys() {
            values.insert(k.to_string(), v.to_string());
        }
        let accept = |k: &str, v: &str, values: &mut BTreeMap<String, String>| -> Result<(), CliError> {
            match values.get_mut(k) {
                Some(slot) => {
                    *slot = v.to_string();
                    Ok(())
                }
                None => Err(CliError::Invalid(format!("unknown option `{k}` for `{}`", command.name()))),
            }
        };
        if let Some((_, path)) = flags.iter().rev().find(|(k, _)| k == "config") {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Invalid(format!("cannot read config `{path}`: {e}")))?;
            for (k, v) in parse_config_file(&text)? {
                accept(&k, &v, &mut values)?;
            }
        }
        for (k, v) in flags.iter().filter(|(k, _)| k != "config") {
            accept(k, v, &mut values)?;
        }
        Ok(Self { command, values })
    }

    pub fn effective(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    /// The value, or `None` when unset.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str).filter(|v| !v.is_empty())
    }

    pub fn require(&self, key: &str) -> Result<&str, CliError> {
        self.get(key).ok_or_else(|| CliError::Invalid(format!("--{key} is required")))
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.get(key)
            .map(|v| v.trim().parse().map_err(|_| CliError::Invalid(format!("malformed value `{v}` for --{key}"))))
            .transpose()
    }

    pub fn required<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        self.parsed(key)?.ok_or_else(|| CliError::Invalid(format!("--{key} is required")))
    }

    pub fn flag(&self, key: &str) -> Result<bool, CliError> {
        Ok(self.parsed::<bool>(key)?.unwrap_or(false))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|s| s.trim().parse().map_err(|_| CliError::Invalid(format!("malformed entry `{s}` in --{key}"))))
                    .collect()
            })
            .transpose()
    }

    /// `--m-list` if given, else the single `--m`.
    pub fn m_values(&self) -> Result<Vec<u64>, CliError> {
        if let Some(list) = self.list::<u64>("m-list")? {
            if list.is_empty() {
                return Err(CliError::Invalid("--m-list is empty".into()));
            }
            return Ok(list);
        }
        Ok(vec![self.required("m")?])
    }

    /// Render as a config file that reproduces this run.
    pub fn to_config_text(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

pub fn usage() -> String {
    "usage: arwave <lattice|kappa|regions|riesz|gsum|krbound|simulate|sweep|selftest> [--key value]... [--config FILE]"
        .to_string()
}
