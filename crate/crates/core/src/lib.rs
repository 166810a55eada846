//! Concurrent stochastic games with reachability and safety objectives:
//! value iteration, strategy synthesis for both players and exact
//! certification of memoryless strategies.

pub mod bellman;
pub mod builtin;
pub mod error;
pub mod game;
pub mod io;
pub mod linalg;
pub mod leaky;
pub mod lp;
pub mod matrix;
pub mod mdp;
pub mod num;
pub mod optimal;
pub mod random;
pub mod reach_eps;
pub mod safety;
pub mod strategy;
pub mod verify;

pub use error::{Error, Result};
pub use game::{Distribution, Game, GameBuilder, Mode, Player, StateId};
pub use num::{Rational, Scalar};
pub use strategy::{MemorylessStrategy, StageStrategy, Strategy};
