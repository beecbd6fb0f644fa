pub mod certify;
pub mod klcheck;
pub mod report;
pub mod run;

mod coeffs;

pub use certify::cmd_certify;
pub use klcheck::cmd_klcheck;
pub use report::cmd_report;
pub use run::cmd_run;
