#include "trackfuse/camtrap.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace trackfuse {

void TriggerConfig::validate() const {
    if (fps < 1) throw Error(ErrorCode::InvalidConfig, "fps must be >= 1");
    if (burst_len < 1) throw Error(ErrorCode::InvalidConfig, "burst length must be >= 1");
    if (!std::isfinite(cooldown) || cooldown < 0.0) {
        throw Error(ErrorCode::InvalidConfig, "cooldown must be >= 0 seconds");
    }
}

Burst burst_frames(FrameId trigger_frame, const TriggerConfig& config) {
    config.validate();
    Burst b;
    b.trigger_frame = trigger_frame;
    b.frame_ids.reserve(static_cast<std::size_t>(config.burst_len));
    for (std::int64_t j = 0; j < config.burst_len; ++j) b.frame_ids.push_back(trigger_frame + j * config.fps);
    return b;
}

FrameId next_trigger(FrameId trigger_frame, const TriggerConfig& config) {
    config.validate();
    const double gap = config.cooldown * static_cast<double>(config.fps);
    const double nearest = std::round(gap);
    // Products such as 2.1 * 10 land a rounding error above the integer.
    const auto frames = std::fabs(gap - nearest) <= 1e-9 * std::max(1.0, gap)
                            ? static_cast<std::int64_t>(nearest)
                            : static_cast<std::int64_t>(std::ceil(gap));
    return trigger_frame + frames;
}

std::vector<Burst> simulate_triggers(std::int64_t total_frames, const std::vector<bool>& presence,
                                     const TriggerConfig& config) {
    config.validate();
    if (total_frames < 0 || static_cast<std::size_t>(total_frames) != presence.size()) {
        throw Error(ErrorCode::WrongLength, "presence has " + std::to_string(presence.size()) +
                                                " entries for " + std::to_string(total_frames) + " frames");
    }
    std::vector<Burst> bursts;
    FrameId cursor = 0;
    while (cursor < total_frames) {
        auto it = std::find(presence.begin() + cursor, presence.end(), true);
        if (it == presence.end()) break;
        const FrameId start = it - presence.begin();
        Burst b = burst_frames(start, config);
        std::erase_if(b.frame_ids, [&](FrameId f) { return f >= total_frames; });
        bursts.push_back(std::move(b));
        // Zero cooldown would otherwise re-trigger on the same frame forever.
        cursor = std::max(next_trigger(start, config), start + 1);
    }
    return bursts;
}

Sequence apply_triggers(const Sequence& seq, const TriggerConfig& config, std::optional<std::int64_t> total_frames) {
    config.validate();
    Sequence out;
    out.name = seq.name;
    if (seq.frames.empty()) return out;

    const std::int64_t total = total_frames.value_or(seq.frames.back().frame_id + 1);
    std::map<FrameId, const Frame*> by_id;
    std::vector<bool> presence(static_cast<std::size_t>(std::max<std::int64_t>(total, 0)), false);
    for (const auto& f : seq.frames) {
        by_id[f.frame_id] = &f;
        if (f.frame_id >= 0 && f.frame_id < total && !f.detections.empty()) {
            presence[static_cast<std::size_t>(f.frame_id)] = true;
        }
    }

    const auto bursts = simulate_triggers(total, presence, config);
    for (std::size_t b = 0; b < bursts.size(); ++b) {
        for (FrameId fid : bursts[b].frame_ids) {
            auto it = by_id.find(fid);
            if (it == by_id.end() || it->second->detections.empty()) continue;
            Frame f = *it->second;
            for (auto& d : f.detections) d.burst = static_cast<std::int64_t>(b);
            out.frames.push_back(std::move(f));
        }
    }
    return out;
}

}  // namespace trackfuse
