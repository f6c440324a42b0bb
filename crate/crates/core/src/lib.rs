pub mod answer;
pub mod bitmap;
pub mod conv;
pub mod counting;
pub mod dyn_subset_sum;
pub mod flip;
pub mod harness;
pub mod k_sum;
pub mod offline_subset_sum;
pub mod oracle;
pub mod reduction;
pub mod static_solver;
pub mod three_sum;
pub mod trace;

pub use answer::Answer;
pub use bitmap::SolutionBitmap;
pub use counting::CountVector;
pub use dyn_subset_sum::DynSubsetSum;
pub use harness::{BenchRecord, Engine};
pub use k_sum::KSum;
pub use reduction::ReductionParams;
pub use three_sum::{SetLabel, ThreeSum};
pub use trace::{Mode, SetOp, SumOp, Trace, TraceHeader};
