//! Instance loading shared by the subcommands.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use avgmdp::bounds::Family;
use avgmdp::generate::{random_mdp, random_vector, RandomKind};
use avgmdp::{
    make_multichain_family, make_unichain_family, solve_modified_bellman, Error, Mdp, SolutionPair,
    ValueVector,
};
use clap::Args;

/// A failure with its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidMdp(_) | Error::NotStochastic { .. } => 3,
            Error::NoVerifiedCandidate => 4,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;

/// Where the MDP comes from.
#[derive(Debug, Args)]
pub struct SourceArgs {
    /// MDP file in JSON form.
    #[arg(long, conflicts_with_all = ["family", "random"])]
    pub mdp: Option<PathBuf>,
    /// Worst-case family: unichain or multichain.
    #[arg(long, conflicts_with = "random", requires = "n")]
    pub family: Option<Family>,
    /// Random generator: random_general, random_unichain or random_weakly_comm.
    #[arg(long, requires = "n")]
    pub random: Option<RandomKind>,
    /// Number of states.
    #[arg(long, visible_alias = "states")]
    pub n: Option<usize>,
    /// Number of actions for random instances.
    #[arg(long, default_value_t = 2)]
    pub actions: usize,
    /// Seed for random instances and random start points.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Starting point `zero`, `const:<c>`, `file:<path>` or `random[:<seed>]`.
#[derive(Debug, Clone, PartialEq)]
pub enum V0Spec {
    Zero,
    Const(f64),
    File(PathBuf),
    Random(Option<u64>),
}

impl FromStr for V0Spec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "zero" {
            Ok(V0Spec::Zero)
        } else if s == "random" {
            Ok(V0Spec::Random(None))
        } else if let Some(x) = s.strip_prefix("random:") {
            x.parse()
                .map(|x| V0Spec::Random(Some(x)))
                .map_err(|_| format!("bad seed '{x}'"))
        } else if let Some(x) = s.strip_prefix("const:") {
            match x.parse::<f64>() {
                Ok(c) if c.is_finite() => Ok(V0Spec::Const(c)),
                _ => Err(format!("bad constant '{x}'")),
            }
        } else if let Some(p) = s.strip_prefix("file:") {
            Ok(V0Spec::File(PathBuf::from(p)))
        } else {
            Err(format!(
                "expected zero, const:<c>, file:<path> or random[:<seed>], got '{s}'"
            ))
        }
    }
}

impl V0Spec {
    /// Resolves to a vector of length `n`; `random` without a seed uses
    /// `default_seed`.
    pub fn resolve(&self, n: usize, default_seed: u64) -> CliResult<ValueVector> {
        let v = match self {
            V0Spec::Zero => ValueVector::zeros(n),
            V0Spec::Const(c) => ValueVector::constant(n, *c),
            V0Spec::Random(seed) => random_vector(n, seed.unwrap_or(default_seed)),
            V0Spec::File(path) => {
                let values = parse_values(&read(path)?)?;
                ValueVector::new(values)
            }
        };
        if v.len() != n {
            return Err(Failure::config(format!(
                "v0 has {} entries, MDP has {n} states",
                v.len()
            )));
        }
        Ok(v)
    }
}

fn parse_values(text: &str) -> CliResult<Vec<f64>> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| match t.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(Failure::config(format!("bad value '{t}' in v0 file"))),
        })
        .collect()
}

pub fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))
}

/// An MDP together with what is known about it.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub label: String,
    pub mdp: Mdp,
    pub family: Option<Family>,
    /// Closed-form solution for family members.
    pub closed_form: Option<SolutionPair>,
    pub v0: ValueVector,
}

impl Loaded {
    /// Closed form when known, exact solver otherwise.
    pub fn solution(&self) -> CliResult<SolutionPair> {
        match &self.closed_form {
            Some(s) => Ok(s.clone()),
            None => Ok(solve_modified_bellman(&self.mdp)?),
        }
    }
}

fn load_file(path: &Path) -> CliResult<Mdp> {
    let text = read(path)?;
    Mdp::from_json(&text).map_err(|e| Failure {
        code: 3,
        message: format!("{}: {e}", path.display()),
    })
}

/// Loads `count` instances (more than one only for random sources; seeds
/// are consecutive). Family members are built around `v0`.
pub fn load(src: &SourceArgs, v0: &V0Spec, count: usize) -> CliResult<Vec<Loaded>> {
    if let Some(path) = &src.mdp {
        let mdp = load_file(path)?;
        let v0 = v0.resolve(mdp.n_states(), src.seed)?;
        return Ok(vec![Loaded {
            label: path.display().to_string(),
            mdp,
            family: None,
            closed_form: None,
            v0,
        }]);
    }
    let n = src.n.ok_or_else(|| Failure::config("--n is required"))?;
    if let Some(family) = src.family {
        let v = v0.resolve(n, src.seed)?;
        let (mdp, sol) = match family {
            Family::Unichain => make_unichain_family(n, Some(&v))?,
            Family::Multichain => make_multichain_family(n, Some(&v))?,
        };
        return Ok(vec![Loaded {
            label: format!("{family:?} family n={n}").to_lowercase(),
            mdp,
            family: Some(family),
            closed_form: Some(sol),
            v0: v,
        }]);
    }
    if let Some(kind) = src.random {
        return (0..count as u64)
            .map(|i| {
                let seed = src.seed + i;
                let mdp = random_mdp(kind, n, src.actions, seed)?;
                Ok(Loaded {
                    label: format!("{kind:?} seed {seed}").to_lowercase(),
                    v0: v0.resolve(n, seed)?,
                    mdp,
                    family: None,
                    closed_form: None,
                })
            })
            .collect();
    }
    Err(Failure::config(
        "one of --mdp, --family or --random is required",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn v0_specs() {
        assert_eq!("zero".parse::<V0Spec>().unwrap(), V0Spec::Zero);
        assert_eq!("const:1.5".parse::<V0Spec>().unwrap(), V0Spec::Const(1.5));
        assert_eq!(
            "random:7".parse::<V0Spec>().unwrap(),
            V0Spec::Random(Some(7))
        );
        assert_eq!("random".parse::<V0Spec>().unwrap(), V0Spec::Random(None));
        assert!("const:nan".parse::<V0Spec>().is_err());
        assert!("ones".parse::<V0Spec>().is_err());
        let v = V0Spec::Const(2.0).resolve(3, 0).unwrap();
        assert_eq!(v.as_slice(), &[2.0, 2.0, 2.0]);
        assert_eq!(
            V0Spec::Random(None).resolve(4, 9).unwrap(),
            V0Spec::Random(Some(9)).resolve(4, 0).unwrap()
        );
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Failure::from(Error::NoVerifiedCandidate).code, 4);
        assert_eq!(Failure::from(Error::BadSize { n: 1, min: 3 }).code, 2);
        assert_eq!(
            Failure::from(Error::NotStochastic { row: 0, sum: 2.0 }).code,
            3
        );
    }
}
