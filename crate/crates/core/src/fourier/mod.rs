//! Truncated Fourier algebra on the m-torus and its extension to history
//! fields depending on an additional delay coordinate `s in [-tau, 0]`.

mod history;
mod index;
mod lattice;
mod resonance;
mod series;

pub use history::{HistoryDocument, HistoryTerm, PhaseHistoryField, TermDocument};
pub use index::{ball, MultiIndex};
pub use lattice::{collocate, collocate_fn, collocate_real_fn, Lattice};
pub use resonance::{split_resonant, Resonance, DEFAULT_TOL_RES};
pub use series::{FourierSeries, ModeDocument, Product, SeriesDocument, C64, SPARSE_PRODUCT_LIMIT};
