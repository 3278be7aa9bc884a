#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod amalgam;
pub mod apx;
pub mod banach;
pub mod engine;
pub mod lp;
pub mod metric;
pub mod rat;
pub mod sample;

pub use rat::{Rat, RatInf};
