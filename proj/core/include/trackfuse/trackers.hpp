#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trackfuse/motion.hpp"
#include "trackfuse/types.hpp"

namespace trackfuse {

class Profiler;

enum class TrackerKind { IoU, Centroid, CentroidKF, Sort, ByteTrack, AppearanceFused };

std::string_view to_string(TrackerKind k) noexcept;
/// Accepts the CLI spellings: iou, centroid, centroid-kf, sort, bytetrack, appearance.
std::optional<TrackerKind> parse_tracker_kind(std::string_view name) noexcept;
const std::vector<std::string>& tracker_kind_names();

struct TrackerConfig {
    TrackerKind kind = TrackerKind::Sort;
    /// Minimum IoU for a track/detection pair to be admissible.
    double iou_gate = 0.3;
    /// Maximum centroid distance as a fraction of the larger box diagonal.
    double centroid_gate = 0.5;
    /// Minimum cosine similarity for appearance-fused association.
    double appearance_gate = 0.3;
    double det_threshold_high = 0.5;
    double det_threshold_low = 0.1;
    int min_hits = 1;
    int max_age = 10;
    double appearance_weight = 0.5;
    /// Factor of the exponential moving average over track embeddings.
    double embedding_momentum = 0.9;
    /// Keep identities across camera-trap bursts instead of resetting.
    bool track_across_bursts = false;
    /// Unset: SortCV7 defaults, or CentroidCV4 defaults for CentroidKF.
    std::optional<MotionModelSpec> motion;

    MotionModelSpec motion_spec() const;
    /// Throws InvalidConfig.
    void validate() const;
};

/// Live tracker state for one sequence. Single owner, mutated per frame.
struct TrackerState {
    std::vector<Track> live;
    std::vector<Track> finished;
    TrackId next_id = 1;
    std::optional<FrameId> cursor;
};

struct StepAssignment {
    std::size_t detection_index = 0;
    std::optional<TrackId> track_id;
};

/// Advances the tracker by one frame. Returns one entry per detection, in
/// detection order. Throws OutOfOrderFrame, MissingEmbedding, InvalidConfig.
std::vector<StepAssignment> tracker_step(TrackerState& state, FrameId frame_id,
                                         const std::vector<Detection>& detections,
                                         const TrackerConfig& config, Profiler* profiler = nullptr);

/// Moves every live track to `finished` as dead. Identity counter is kept.
void tracker_reset(TrackerState& state);

/// Runs the tracker over a whole sequence and records per-detection labels.
/// fused_label starts equal to raw_label; see relabel().
SequenceResult run_sequence(const Sequence& seq, const TrackerConfig& config,
                            Profiler* profiler = nullptr);

}  // namespace trackfuse
