use std::ops::Range;

use crate::error::{CsiError, Result};
use crate::types::{CsiStream, PacketRecord};

/// Default sample window: 4 s.
pub const DEFAULT_WINDOW_US: i64 = 4_000_000;

/// A window is complete when the stream reaches to within `win / 100` of its
/// nominal end; otherwise it is a trailing partial window and is dropped.
const FULL_WINDOW_SLACK_DIVISOR: i64 = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct StreamWindow {
    pub t0_us: i64,
    pub packets: Vec<PacketRecord>,
}

/// Window start times and the index range of the sorted timestamps falling
/// in `[t0, t0 + win)`. Windows start at the first timestamp and advance by
/// `stride_us`; empty and trailing partial windows are omitted.
pub fn window_ranges(ts: &[i64], win_us: i64, stride_us: i64) -> Result<Vec<(i64, Range<usize>)>> {
    if win_us <= 0 || stride_us <= 0 {
        return Err(CsiError::Arg(format!(
            "window ({win_us} us) and stride ({stride_us} us) must be positive"
        )));
    }
    if ts.windows(2).any(|w| w[0] > w[1]) {
        return Err(CsiError::Arg("timestamps must be sorted".into()));
    }
    let (Some(&first), Some(&last)) = (ts.first(), ts.last()) else {
        return Ok(Vec::new());
    };
    let slack = win_us / FULL_WINDOW_SLACK_DIVISOR;
    let mut out = Vec::new();
    let mut t0 = first;
    while t0 + win_us <= last + slack {
        let lo = ts.partition_point(|&t| t < t0);
        let hi = ts.partition_point(|&t| t < t0 + win_us);
        if hi > lo {
            out.push((t0, lo..hi));
        }
        t0 += stride_us;
    }
    Ok(out)
}

pub fn window_stream(stream: &CsiStream, win_us: i64, stride_us: i64) -> Result<Vec<StreamWindow>> {
    let ts = stream.timestamps();
    Ok(window_ranges(&ts, win_us, stride_us)?
        .into_iter()
        .map(|(t0_us, r)| StreamWindow {
            t0_us,
            packets: stream.packets[r].to_vec(),
        })
        .collect())
}
