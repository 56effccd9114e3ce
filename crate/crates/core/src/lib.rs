pub mod expr;
pub mod linsolve;
pub mod symmetry;
pub mod intfactor;
pub mod perturb;
pub mod numeric;
pub mod problem;
pub mod cli;
