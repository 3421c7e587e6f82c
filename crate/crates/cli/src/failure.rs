use std::fmt::Display;

pub const PARTIAL: u8 = 1;
pub const INPUT: u8 = 2;
pub const VERIFICATION: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Display) -> Self {
        Self {
            code: INPUT,
            message: message.to_string(),
        }
    }

    pub fn verification(message: impl Display) -> Self {
        Self {
            code: VERIFICATION,
            message: message.to_string(),
        }
    }
}

impl From<submax::Error> for Failure {
    fn from(e: submax::Error) -> Self {
        match e {
            submax::Error::InvalidInput(_) | submax::Error::Capacity { .. } => Failure::input(e),
            _ => Failure::verification(e),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::input(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::input(e)
    }
}

pub type CliResult = Result<(), Failure>;
