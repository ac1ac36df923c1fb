//! Dense networks with optional collision-operator layers.
//!
//! A network of `depth` linear layers maps `input_dim -> m -> ... -> m ->
//! output_dim`. Layer `0` is `act(W x + b)`, the last layer is linear, and
//! every hidden-to-hidden layer `l` in `1..depth-1` computes `a = act(W h + b)`
//! and combines it with its input `h`:
//!
//! * plain: `h' = a`
//! * skip: `h' = h + a`
//! * operator layer (`l` in `kiti_layers`): `h' = kitinet(h, a)`
//!
//! With `dt = 1` and collisions disabled an operator layer is exactly a skip
//! layer.

mod data;
mod graph;
mod params;
mod spec;
mod train;

pub use data::{make_sine_dataset, sine_target, Dataset, SINE_INPUT_DIM, SINE_RANGE};
pub use graph::{backward, forward, mse, ForwardMode, Tape};
pub use params::{init_network, Layer, ParameterSet};
pub use spec::{Activation, NetworkSpec, Optimizer, TrainConfig, LEAKY_SLOPE};
pub use train::{train, Snapshot, TrainingRun};
