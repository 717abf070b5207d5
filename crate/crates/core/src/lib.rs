pub mod classify;
pub mod cli;
pub mod ergodic;
pub mod fixed_points;
pub mod linalg;
pub mod lp;
pub mod lyapunov;
pub mod numeric;
pub mod qso;
pub mod simplex;
