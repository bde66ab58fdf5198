//! `grn-padic`: analyze discrete gene-network dynamics through base-p digit
//! encodings — score gene orderings, search for optimal ones, classify fixed
//! points, export the ball hierarchy, and verify per-ball affine models.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 bundled dataset
//! missing, 3 verification failure, 4 search budget exhausted (uncertified).

mod args;
mod commands;

use clap::Parser;

fn main() {
    let cli = match args::Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    match commands::run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(exit_code_for(&err));
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<grn_padic_core::Error>() {
            return match e {
                grn_padic_core::Error::DatasetMissing { .. } => 2,
                grn_padic_core::Error::MappingViolation { .. } => 3,
                _ => 1,
            };
        }
    }
    1
}

#[cfg(test)]
mod tests {
    use super::exit_code_for;
    use grn_padic_core::Error;

    #[test]
    fn exit_codes_by_error_kind() {
        let missing = anyhow::Error::new(Error::DatasetMissing {
            name: "x.grn".into(),
            hint: "nowhere".into(),
        });
        assert_eq!(exit_code_for(&missing), 2);

        let violated = anyhow::Error::new(Error::MappingViolation {
            level: 2,
            index: 1,
            detail: "bad".into(),
        })
        .context("while verifying");
        assert_eq!(exit_code_for(&violated), 3, "found through the chain");

        let other = anyhow::Error::new(Error::NotFixedPoint(3));
        assert_eq!(exit_code_for(&other), 1);
        assert_eq!(exit_code_for(&anyhow::anyhow!("plain")), 1);
    }
}
