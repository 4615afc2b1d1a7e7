//! Turning command-line flags into an algebra.

use std::fs;
use std::path::Path;

use thinlie::{
    compile, compile_unchecked, family_pattern_for, nottingham_nqr, CentralizerSequence,
    DiamondPattern, Family, FamilySpec, GradedAlgebra, GUARD,
};

use crate::{CliError, Common};

pub enum Source {
    Family(Family),
    Nqr { r: u64 },
    Pattern(DiamondPattern),
}

pub struct Input {
    p: u32,
    pub q: u64,
    pub source: Source,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Smallest prime factor, used when `--p` is omitted.
fn characteristic_of(q: u64) -> u32 {
    (2..=q).find(|d| q % d == 0).unwrap_or(q) as u32
}

fn sequence_from(arg: &str, p: u32) -> Result<CentralizerSequence, CliError> {
    let path = Path::new(arg);
    if path.exists() {
        let seq: CentralizerSequence = serde_json::from_str(&read(path)?)?;
        if seq.p() != p {
            return Err(CliError::Usage(format!("sequence file is over F_{}, not F_{p}", seq.p())));
        }
        Ok(seq)
    } else if arg.chars().all(|c| matches!(c, 'X' | 'Y' | 'x' | 'y')) {
        Ok(CentralizerSequence::parse(p, arg)?)
    } else {
        Err(CliError::Usage(format!("{arg}: no such sequence file")))
    }
}

impl Input {
    pub fn from_common(c: &Common) -> Result<Input, CliError> {
        let mut p = c.p.unwrap_or_else(|| characteristic_of(c.q));
        let mut q = c.q;
        let need = |v: Option<u32>, name: &str, fam: &str| {
            v.ok_or_else(|| CliError::Usage(format!("family {fam} needs --{name}")))
        };
        let mu = |fam: &str| {
            c.mu
                .ok_or_else(|| CliError::Usage(format!("family {fam} needs --mu")))
        };
        let source = if let Some(path) = &c.pattern {
            let pattern: DiamondPattern = serde_json::from_str(&read(path)?)?;
            p = pattern.p;
            q = pattern.q;
            Source::Pattern(pattern)
        } else if let Some(path) = &c.spec {
            let spec: FamilySpec = serde_json::from_str(&read(path)?)?;
            p = spec.p;
            q = spec.q;
            Source::Family(spec.family)
        } else if let Some(seq) = &c.sequence {
            Source::Family(Family::Tq2 {
                sequence: sequence_from(seq, p)?,
            })
        } else {
            let name = c.family.as_deref().unwrap_or("a");
            let family = match name {
                "a" => Family::A,
                "b" => Family::B { third: mu("b")? },
                "c" => Family::C { s: need(c.s, "s", "c")? },
                "d" => Family::D {
                    s: need(c.s, "s", "d")?,
                    second: mu("d")?,
                },
                "e" => Family::E,
                "L1q" => Family::L1q,
                "L0q" => Family::L0q,
                "uniqueness" => Family::Uniqueness {
                    s: need(c.s, "s", "uniqueness")?,
                },
                "tq2" => return Err(CliError::Usage("family tq2 needs --sequence".into())),
                "nqr" => {
                    let r = c.r.ok_or_else(|| CliError::Usage("family nqr needs --r".into()))?;
                    return Input::checked(p, q, c.n, Source::Nqr { r });
                }
                other => return Err(CliError::Usage(format!("unknown family {other:?}"))),
            };
            Source::Family(family)
        };
        Input::checked(p, q, c.n, source)
    }

    fn checked(p: u32, q: u64, n: usize, source: Source) -> Result<Input, CliError> {
        thinlie::check_q(p, q)?;
        if n < q as usize + 2 {
            return Err(CliError::Usage(format!("N = {n} is below q + 2 = {}", q + 2)));
        }
        Ok(Input { p, q, source })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Highest degree the job will compute for an algebra of degree `n`.
    fn needed_degree(&self, n: usize) -> usize {
        match &self.source {
            Source::Nqr { r } => {
                let mut d = n;
                let mut rr = *r;
                while rr > 1 {
                    d = self.p as usize * (d + GUARD) + 1 - GUARD;
                    rr /= self.p as u64;
                }
                d + GUARD
            }
            _ => n + GUARD,
        }
    }

    fn check_budget(&self, n: usize, limit: usize) -> Result<(), CliError> {
        let needed = self.needed_degree(n);
        if needed > limit {
            return Err(CliError::Budget { needed, limit });
        }
        Ok(())
    }

    fn pattern(&self, n: usize) -> Result<DiamondPattern, CliError> {
        Ok(match &self.source {
            Source::Family(f) => family_pattern_for(f, self.p, self.q, n)?,
            Source::Pattern(p) => p.clone(),
            Source::Nqr { .. } => unreachable!("deflations have no compiled pattern"),
        })
    }

    /// Builds and validates.
    pub fn build(&self, n: usize, limit: usize) -> Result<GradedAlgebra, CliError> {
        self.check_budget(n, limit)?;
        match &self.source {
            Source::Nqr { r } => Ok(nottingham_nqr(self.p, self.q, *r, n)?),
            _ => {
                let (alg, report) = compile(&self.pattern(n)?, n).map_err(|e| match e {
                    thinlie::Error::ValidationFailed { check, degree } => {
                        CliError::Validation(format!("{check} in degree {degree}"))
                    }
                    e => e.into(),
                })?;
                debug_assert!(report.passed());
                Ok(alg)
            }
        }
    }

    /// Builds without validating, so that a failing pattern can be reported.
    pub fn build_unchecked(&self, n: usize, limit: usize) -> Result<GradedAlgebra, CliError> {
        self.check_budget(n, limit)?;
        match &self.source {
            Source::Nqr { r } => Ok(nottingham_nqr(self.p, self.q, *r, n)?),
            _ => Ok(compile_unchecked(&self.pattern(n)?, n)?),
        }
    }
}
