//! Workbench for message-passing decoders whose update networks are generated
//! by a second network, stabilized by mixing the current message with the
//! first message through a learned damping factor.
//!
//! The crate provides:
//!
//! - [`codes`]: parity-check matrices over GF(2), alist ingestion, codeword
//!   enumeration and syndrome arithmetic, plus a bank of bundled codes.
//! - [`channel`]: BPSK modulation, AWGN noise and LLR computation.
//! - [`tanner`]: bipartite edge structure with precomputed extrinsic-neighbor
//!   index tables shared by every decoder variant.
//! - [`autodiff`]: a scalar reverse-mode tape with the primitives needed to
//!   train the decoders and the graph classifier (tanh, truncated-series
//!   arctanh, abs, affine maps, logistic loss) and an Adam-style update.
//! - [`bp`]: classical and edge-weighted sum-product decoding with selectable
//!   exact-arctanh or truncated-series check update.
//! - [`hyperdec`]: the dynamic-weight decoder and its damped variant.
//! - [`train`]: training loops, loss assembly and divergence monitoring.
//! - [`gin`]: a toy graph classifier exercising the same damping mechanism.
//! - [`harness`]: BER/SNR sweeps, paired comparisons, CSV emission.

pub mod autodiff;
pub mod bp;
pub mod channel;
pub mod codes;
pub mod gin;
pub mod harness;
pub mod hyperdec;
pub mod tanner;
pub mod train;

pub use bp::{DecodeConfig, DecodeOutput, MessageState, Variant};
pub use channel::{ChannelConfig, LlrVector};
pub use codes::{BitVector, CodeError, ParityCheckMatrix};
pub use hyperdec::HyperDecoder;
pub use tanner::TannerGraph;

pub use tanner::TannerGraph;
