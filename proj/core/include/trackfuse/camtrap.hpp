#pragma once

#include <cstdint>
#include <vector>

#include "trackfuse/types.hpp"

namespace trackfuse {

/// Motion-triggered camera trap emulated on a continuous video timeline.
struct TriggerConfig {
    /// Source video frame rate (frames per second).
    std::int64_t fps = 30;
    /// Frames captured per trigger, one second apart.
    std::int64_t burst_len = 4;
    /// Seconds the trap stays inactive after a trigger.
    double cooldown = 10.0;

    /// Throws InvalidConfig.
    void validate() const;
};

struct Burst {
    FrameId trigger_frame = 0;
    std::vector<FrameId> frame_ids;

    friend bool operator==(const Burst&, const Burst&) = default;
};

/// {t, t + F, ..., t + (burst_len - 1) F}.
Burst burst_frames(FrameId trigger_frame, const TriggerConfig& config);

/// t + cooldown * F, rounded up to a whole frame.
FrameId next_trigger(FrameId trigger_frame, const TriggerConfig& config);

/// Scans `presence` forward: each burst starts at the first visible frame at
/// or after the cursor, and the cursor then jumps to next_trigger(start).
/// Bursts running past the end of the video are truncated.
std::vector<Burst> simulate_triggers(std::int64_t total_frames, const std::vector<bool>& presence,
                                     const TriggerConfig& config);

/// Keeps only detections on burst frames and tags each with its burst index.
/// Presence is taken from the sequence itself (frames with any detection).
/// `total_frames` defaults to one past the last frame.
Sequence apply_triggers(const Sequence& seq, const TriggerConfig& config,
                        std::optional<std::int64_t> total_frames = std::nullopt);

}  // namespace trackfuse
