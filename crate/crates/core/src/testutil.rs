//! Fixtures shared across unit tests.

use alloc::vec;
use alloc::vec::Vec;

/// Worked event path: 16 t, 2 s, 1 d, 1 i over 20 events.
pub(crate) const WALKTHROUGH: &str = "ttsttttittttdtttttst";

/// Low-rate four-state matrix: the insertion row is never visited.
pub(crate) fn low_snr_rows() -> Vec<Vec<f64>> {
    vec![
        vec![0.9980, 0.0020, 1.012e-6, 0.0],
        vec![0.9421, 0.0579, 0.0, 0.0],
        vec![1.0, 0.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.0, 0.0],
    ]
}
