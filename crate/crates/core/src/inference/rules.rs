//! Rule files driving the pipeline. They are plain `.dl` text, shipped with
//! the crate and replaceable at runtime.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::ast::Program;
use crate::parser::{parse_program, ParseError};

/// The four reference rule listings, verbatim.
pub mod listings {
    pub const EQUIVALENCE: &str = include_str!("../../rules/listings/listing1.dl");
    pub const OUTGOING_FLOW: &str = include_str!("../../rules/listings/listing2.dl");
    pub const HOST_FLOW: &str = include_str!("../../rules/listings/listing3.dl");
    pub const IFLOW: &str = include_str!("../../rules/listings/listing4.dl");

    pub const ALL: [&str; 4] = [EQUIVALENCE, OUTGOING_FLOW, HOST_FLOW, IFLOW];
}

const BUNDLED: &[(&str, &str)] = &[
    (
        "step1_equivalence.dl",
        include_str!("../../rules/pipeline/step1_equivalence.dl"),
    ),
    (
        "step3_outgoing.dl",
        include_str!("../../rules/pipeline/step3_outgoing.dl"),
    ),
    (
        "step4_incoming.dl",
        include_str!("../../rules/pipeline/step4_incoming.dl"),
    ),
    ("step6_iflow.dl", include_str!("../../rules/pipeline/step6_iflow.dl")),
];

#[derive(Debug, Error)]
pub enum RuleSetError {
    #[error("{file}:{source}")]
    Parse {
        file: String,
        #[source]
        source: ParseError,
    },
    #[error("cannot read rules from {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Named rule sources, evaluated together as one program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    files: BTreeMap<String, String>,
}

impl Default for RuleSet {
    fn default() -> Self {
        Self::bundled()
    }
}

impl RuleSet {
    pub fn bundled() -> Self {
        RuleSet {
            files: BUNDLED
                .iter()
                .map(|(n, s)| (n.to_string(), s.to_string()))
                .collect(),
        }
    }

    pub fn empty() -> Self {
        RuleSet {
            files: BTreeMap::new(),
        }
    }

    /// Adds or replaces one named file.
    pub fn set(&mut self, name: impl Into<String>, source: impl Into<String>) {
        self.files.insert(name.into(), source.into());
    }

    /// Every `*.dl` file in `dir` replaces the bundled file of the same name
    /// or is added alongside the others.
    pub fn with_overrides(mut self, dir: &Path) -> Result<Self, RuleSetError> {
        let io = |source| RuleSetError::Io {
            path: dir.to_path_buf(),
            source,
        };
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "dl"))
            .collect();
        paths.sort();
        for p in paths {
            let src = fs::read_to_string(&p).map_err(|source| RuleSetError::Io {
                path: p.clone(),
                source,
            })?;
            let name = p
                .file_name()
                .expect("read_dir entries have names")
                .to_string_lossy()
                .into_owned();
            self.files.insert(name, src);
        }
        Ok(self)
    }

    pub fn files(&self) -> impl Iterator<Item = (&str, &str)> {
        self.files.iter().map(|(n, s)| (n.as_str(), s.as_str()))
    }

    pub fn program(&self) -> Result<Program, RuleSetError> {
        let parts = self
            .files
            .iter()
            .map(|(name, src)| {
                parse_program(src).map_err(|source| RuleSetError::Parse {
                    file: name.clone(),
                    source,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Program::merge(parts))
    }
}
