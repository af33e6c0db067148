pub mod bnb;
pub mod cli;
pub mod cobnb;
pub mod criteria;
pub mod error;
pub mod frankwolfe;
pub mod function;
pub mod instance;
pub mod linalg;
pub mod lmo;
pub mod verify;
