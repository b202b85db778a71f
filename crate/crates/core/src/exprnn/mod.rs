//! Orthogonal recurrent network with an exponentially parametrized kernel.
//!
//! The recurrent matrix is `exp(A)` for a skew `A`; the exponential is
//! evaluated once per optimizer step and its gradient pulled back once per
//! backward pass.

pub mod checkpoint;
mod init;
mod model;
mod modrelu;
mod step;

pub use init::{
    block_diagonal, cayley_block_value, cayley_blocks, cayley_init, henaff_blocks, henaff_init,
    kernel_init, KernelInit,
};
pub use model::{
    argmax_columns, cross_entropy, Activation, Readout, RnnGrads, RnnModel, SequenceBatch, Tape,
    TapeStep,
};
pub use modrelu::{modrelu, modrelu_grad_scalar, modrelu_scalar};
pub use step::ModelOptimizer;
