//! Hopfield and mean-field-annealing networks run as distributed
//! computations over a simulated wireless processor network, with
//! brute-force oracles and closed-form cost models.

pub mod cost;
pub mod dynamics;
pub mod energy;
pub mod graph;
pub mod oracle;
pub mod poly;
pub mod rng;
pub mod verify;
pub mod wpn;
