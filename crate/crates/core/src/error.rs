use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not positive semidefinite (eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("operator is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },
    #[error("Kraus operators violate completeness (max deviation {deviation:.3e})")]
    Completeness { deviation: f64 },
    #[error("{name} = {value} is outside {range}")]
    Range {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("{0}")]
    Validation(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_range(name: &'static str, value: f64, lo: f64, hi: f64, range: &'static str) -> Result<()> {
    if value.is_finite() && (lo..=hi).contains(&value) {
        Ok(())
    } else {
        Err(Error::Range { name, value, range })
    }
}
