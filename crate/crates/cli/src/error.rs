use thiserror::Error;
use varspeech_core::generation::GenerationError;
use varspeech_core::optimizer::OptimizerError;
use varspeech_core::providers::ProviderError;
use varspeech_core::similarity::SimilarityError;
use varspeech_core::taxonomy::TaxonomyError;
use varspeech_core::validation::ValidationError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("provider failure: {0}")]
    Provider(String),
    #[error("data format error: {0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Provider(_) => 2,
            CliError::Data(_) => 3,
        }
    }
}

impl From<ProviderError> for CliError {
    fn from(e: ProviderError) -> Self {
        match e {
            ProviderError::Usage(_) | ProviderError::MissingCredential(_) => CliError::Usage(e.to_string()),
            _ => CliError::Provider(e.to_string()),
        }
    }
}

impl From<ValidationError> for CliError {
    fn from(e: ValidationError) -> Self {
        match e {
            ValidationError::Provider(p) => p.into(),
            ValidationError::JudgeMalformed { .. } => CliError::Provider(e.to_string()),
            ValidationError::Usage(m) => CliError::Usage(m),
        }
    }
}

impl From<TaxonomyError> for CliError {
    fn from(e: TaxonomyError) -> Self {
        match e {
            TaxonomyError::Provider(p) => p.into(),
            TaxonomyError::Parse(_) | TaxonomyError::InvalidEntry { .. } | TaxonomyError::DuplicateId(_) => {
                CliError::Data(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<GenerationError> for CliError {
    fn from(e: GenerationError) -> Self {
        match e {
            GenerationError::Provider(p) => p.into(),
            GenerationError::EmptyResult => CliError::Provider(e.to_string()),
            GenerationError::InvalidConfig(m) => CliError::Usage(m),
            GenerationError::Taxonomy(t) => t.into(),
            GenerationError::Validation(v) => v.into(),
        }
    }
}

impl From<OptimizerError> for CliError {
    fn from(e: OptimizerError) -> Self {
        match e {
            OptimizerError::InvalidConfig(m) => CliError::Usage(m),
            OptimizerError::Provider(p) => p.into(),
        }
    }
}

impl From<SimilarityError> for CliError {
    fn from(e: SimilarityError) -> Self {
        match e {
            SimilarityError::Usage(m) => CliError::Usage(m),
            other => CliError::Data(other.to_string()),
        }
    }
}
