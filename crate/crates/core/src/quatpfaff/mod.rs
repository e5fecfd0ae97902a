//! Complexified quaternions, self-dual matrices and Pfaffians.

mod pfaffian;
mod quaternion;

pub use pfaffian::{pfaffian, pfaffian_permutation_sum};
pub use quaternion::{
    cycle_expansion, det_via_pfaffian, moore_dyson_det, phi, quat_dual, quat_mul, z_phi, Quaternion, QuaternionMatrix,
};
