#pragma once

#include <cstddef>
#include <vector>

#include "trackfuse/fusion.hpp"
#include "trackfuse/metrics.hpp"
#include "trackfuse/trackers.hpp"

namespace trackfuse {

/// Worker count from TRACKFUSE_THREADS (unset or invalid: hardware
/// concurrency, at least 1).
std::size_t thread_count_from_env();

/// Tracks and relabels every sequence. Sequences are processed in parallel
/// over at most `threads` workers; results keep the input order. Per-thread
/// timings are merged into `profiler` when given.
std::vector<SequenceResult> track_and_fuse(const std::vector<Sequence>& sequences, const TrackerConfig& config,
                                           FusionMode mode, const RelabelOptions& relabel_options = {},
                                           std::size_t threads = 1, Profiler* profiler = nullptr);

}  // namespace trackfuse
