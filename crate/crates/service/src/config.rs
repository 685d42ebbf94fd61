use std::fs;
use std::path::PathBuf;

use crate::error::ServiceError;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub port: u16,
    pub data_dir: PathBuf,
    pub scenario_dir: PathBuf,
    pub auto_finish_on_alert: bool,
    /// Replacement questionnaire wording; the bundled one when `None`.
    pub questionnaire: Option<PathBuf>,
}

impl ServiceConfig {
    pub fn new(port: u16, data_dir: impl Into<PathBuf>, scenario_dir: impl Into<PathBuf>) -> Self {
        Self {
            port,
            data_dir: data_dir.into(),
            scenario_dir: scenario_dir.into(),
            auto_finish_on_alert: true,
            questionnaire: None,
        }
    }

    /// Creates the data layout and proves it is writable.
    pub(crate) fn prepare_data_dir(&self) -> Result<(), ServiceError> {
        let unwritable = |source| ServiceError::DataDirUnwritable { path: self.data_dir.clone(), source };
        for sub in ["sessions", "surveys"] {
            fs::create_dir_all(self.data_dir.join(sub)).map_err(unwritable)?;
        }
        let probe = self.data_dir.join(".write-probe");
        fs::write(&probe, b"ok").map_err(unwritable)?;
        fs::remove_file(&probe).map_err(unwritable)?;
        Ok(())
    }
}
