//! Sliding-window extraction with half-window overlap.
//!
//! A clip of length `L` is cut into windows of `T` frames. Consecutive
//! windows overlap by `T / 2` frames (integer division), i.e. the stride
//! is `T − T/2`. Windows never pad: a clip shorter than `T` yields none.

/// Frames shared between consecutive windows.
pub fn window_overlap(timestep: usize) -> usize {
    assert!(timestep >= 1, "timestep must be at least 1");
    timestep / 2
}

/// Start offset between consecutive windows.
pub fn window_stride(timestep: usize) -> usize {
    timestep - window_overlap(timestep)
}

/// Start indices of every full window in a clip of `sequence_len` frames.
pub fn window_starts(sequence_len: usize, timestep: usize) -> Vec<usize> {
    let stride = window_stride(timestep);
    let mut starts = Vec::new();
    let mut s = 0;
    while s + timestep <= sequence_len {
        starts.push(s);
        s += stride;
    }
    starts
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closed-form window count, used as an independent oracle for the
    /// iterative implementation.
    fn count_formula(len: usize, timestep: usize) -> usize {
        if len < timestep {
            0
        } else {
            (len - timestep) / window_stride(timestep) + 1
        }
    }

    #[test]
    fn frozen_counts_for_a_175_frame_clip() {
        assert_eq!(window_starts(175, 30).len(), 10);
        assert_eq!(window_starts(175, 5).len(), 57);
        assert_eq!(window_starts(175, 10).len(), 34);
        assert_eq!(window_starts(175, 15).len(), 21);
    }

    #[test]
    fn overlap_is_half_the_window() {
        assert_eq!(window_overlap(30), 15);
        assert_eq!(window_overlap(5), 2);
        assert_eq!(window_overlap(1), 0);
        assert_eq!(window_stride(5), 3);
        assert_eq!(window_stride(1), 1);
    }

    #[test]
    fn enumeration_matches_closed_form_everywhere() {
        for len in 0..=500 {
            for timestep in 1..=50 {
                let starts = window_starts(len, timestep);
                assert_eq!(
                    starts.len(),
                    count_formula(len, timestep),
                    "len {len} timestep {timestep}"
                );
                // Every window must fit, start on the stride grid, and be
                // maximal (no further window fits).
                let stride = window_stride(timestep);
                for (i, s) in starts.iter().enumerate() {
                    assert_eq!(*s, i * stride);
                    assert!(s + timestep <= len);
                }
                if let Some(last) = starts.last() {
                    assert!(last + stride + timestep > len);
                }
            }
        }
    }

    #[test]
    fn short_clip_yields_no_windows() {
        assert!(window_starts(4, 5).is_empty());
        assert!(window_starts(0, 1).is_empty());
    }

    #[test]
    #[should_panic(expected = "timestep must be at least 1")]
    fn zero_timestep_is_a_programming_error() {
        let _ = window_starts(10, 0);
    }
}
