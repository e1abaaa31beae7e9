#include "trackfuse/trackers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "trackfuse/assoc.hpp"
#include "trackfuse/metrics.hpp"

namespace trackfuse {

std::string_view to_string(TrackerKind k) noexcept {
    switch (k) {
        case TrackerKind::IoU: return "iou";
        case TrackerKind::Centroid: return "centroid";
        case TrackerKind::CentroidKF: return "centroid-kf";
        case TrackerKind::Sort: return "sort";
        case TrackerKind::ByteTrack: return "bytetrack";
        case TrackerKind::AppearanceFused: return "appearance";
    }
    return "unknown";
}

const std::vector<std::string>& tracker_kind_names() {
    static const std::vector<std::string> names{"iou", "centroid", "centroid-kf", "sort", "bytetrack", "appearance"};
    return names;
}

std::optional<TrackerKind> parse_tracker_kind(std::string_view name) noexcept {
    for (auto k : {TrackerKind::IoU, TrackerKind::Centroid, TrackerKind::CentroidKF, TrackerKind::Sort,
                   TrackerKind::ByteTrack, TrackerKind::AppearanceFused}) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

MotionModelSpec TrackerConfig::motion_spec() const {
    if (motion) return *motion;
    return kind == TrackerKind::CentroidKF ? MotionModelSpec::centroid_defaults()
                                           : MotionModelSpec::sort_defaults();
}

void TrackerConfig::validate() const {
    auto unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
    if (!unit(det_threshold_low) || !unit(det_threshold_high) || det_threshold_low > det_threshold_high) {
        throw Error(ErrorCode::InvalidConfig, "require 0 <= det_threshold_low <= det_threshold_high <= 1");
    }
    if (min_hits < 1) throw Error(ErrorCode::InvalidConfig, "min_hits must be >= 1");
    if (max_age < 0) throw Error(ErrorCode::InvalidConfig, "max_age must be >= 0");
    if (!unit(iou_gate)) throw Error(ErrorCode::InvalidConfig, "iou_gate must lie in [0, 1]");
    if (!std::isfinite(centroid_gate) || centroid_gate <= 0.0) {
        throw Error(ErrorCode::InvalidConfig, "centroid_gate must be positive");
    }
    if (!std::isfinite(appearance_gate) || appearance_gate < -1.0 || appearance_gate > 1.0) {
        throw Error(ErrorCode::InvalidConfig, "appearance_gate must lie in [-1, 1]");
    }
    if (!unit(appearance_weight)) throw Error(ErrorCode::InvalidConfig, "appearance_weight must lie in [0, 1]");
    if (!unit(embedding_momentum)) throw Error(ErrorCode::InvalidConfig, "embedding_momentum must lie in [0, 1]");
    const MotionModelSpec spec = motion_spec();
    spec.validate();
    const bool wants_centroid = kind == TrackerKind::CentroidKF;
    if (wants_centroid != (spec.model == MotionModel::CentroidCV4)) {
        throw Error(ErrorCode::InvalidConfig, "motion model does not match tracker kind '" +
                                                  std::string(to_string(kind)) + "'");
    }
}

namespace {

bool uses_motion(TrackerKind k) {
    return k == TrackerKind::CentroidKF || k == TrackerKind::Sort || k == TrackerKind::ByteTrack ||
           k == TrackerKind::AppearanceFused;
}

double diagonal(const BoundingBox& b) { return std::hypot(b.width(), b.height()); }

// Where each live track is expected to be in the current frame.
std::vector<BoundingBox> predicted_boxes(const std::vector<Track>& tracks) {
    std::vector<BoundingBox> boxes;
    boxes.reserve(tracks.size());
    for (const auto& t : tracks) {
        BoundingBox b = t.entries.back().bbox;
        if (t.motion) {
            try {
                b = state_to_bbox(*t.motion);
            } catch (const Error&) {
                // Keep the last observed box when the filter state is degenerate.
            }
        }
        boxes.push_back(b);
    }
    return boxes;
}

struct Association {
    std::vector<std::pair<std::size_t, std::size_t>> matches;  // (track, detection) in full indices
    std::vector<std::size_t> unmatched_tracks;
    std::vector<std::size_t> unmatched_detections;
};

CostMatrix iou_cost(const std::vector<BoundingBox>& predicted, const std::vector<std::size_t>& track_idx,
                    const std::vector<Detection>& dets, const std::vector<std::size_t>& det_idx, double gate) {
    CostMatrix cost(track_idx.size(), det_idx.size());
    for (std::size_t r = 0; r < track_idx.size(); ++r) {
        for (std::size_t c = 0; c < det_idx.size(); ++c) {
            const double overlap = iou(predicted[track_idx[r]], dets[det_idx[c]].bbox);
            cost.set(r, c, 1.0 - overlap, overlap >= gate && overlap > 0.0);
        }
    }
    return cost;
}

CostMatrix centroid_cost(const std::vector<BoundingBox>& predicted, const std::vector<std::size_t>& track_idx,
                         const std::vector<Detection>& dets, const std::vector<std::size_t>& det_idx,
                         double gate) {
    CostMatrix cost(track_idx.size(), det_idx.size());
    for (std::size_t r = 0; r < track_idx.size(); ++r) {
        const BoundingBox& tb = predicted[track_idx[r]];
        for (std::size_t c = 0; c < det_idx.size(); ++c) {
            const BoundingBox& db = dets[det_idx[c]].bbox;
            const double dist = centroid_distance(tb, db);
            const double limit = gate * std::max(diagonal(tb), diagonal(db));
            cost.set(r, c, dist, dist <= limit);
        }
    }
    return cost;
}

CostMatrix appearance_cost(const std::vector<Track>& tracks, const std::vector<BoundingBox>& predicted,
                           const std::vector<std::size_t>& track_idx, const std::vector<Detection>& dets,
                           const std::vector<std::size_t>& det_idx, const TrackerConfig& config,
                           Profiler* profiler) {
    CostMatrix cost = iou_cost(predicted, track_idx, dets, det_idx, config.iou_gate);
    Profiler::Scope reid(profiler, Stage::ReidCost);
    const double w = config.appearance_weight;
    for (std::size_t r = 0; r < track_idx.size(); ++r) {
        const Track& t = tracks[track_idx[r]];
        for (std::size_t c = 0; c < det_idx.size(); ++c) {
            const Detection& d = dets[det_idx[c]];
            const double iou_term = cost.cost(r, c);
            double cos = -1.0;
            if (t.last_embedding) cos = cosine_similarity(*t.last_embedding, *d.embedding);
            const bool ok = cost.admissible(r, c) && cos >= config.appearance_gate;
            cost.set(r, c, w * (1.0 - cos) + (1.0 - w) * iou_term, ok);
        }
    }
    return cost;
}

Association associate(const std::vector<Track>& tracks, const std::vector<BoundingBox>& predicted,
                      const std::vector<std::size_t>& track_idx, const std::vector<Detection>& dets,
                      const std::vector<std::size_t>& det_idx, const TrackerConfig& config,
                      Profiler* profiler) {
    CostMatrix cost;
    switch (config.kind) {
        case TrackerKind::IoU:
        case TrackerKind::Sort:
        case TrackerKind::ByteTrack:
            cost = iou_cost(predicted, track_idx, dets, det_idx, config.iou_gate);
            break;
        case TrackerKind::Centroid:
        case TrackerKind::CentroidKF:
            cost = centroid_cost(predicted, track_idx, dets, det_idx, config.centroid_gate);
            break;
        case TrackerKind::AppearanceFused:
            cost = appearance_cost(tracks, predicted, track_idx, dets, det_idx, config, profiler);
            break;
    }
    const AssignmentResult solved =
        config.kind == TrackerKind::IoU ? solve_greedy(cost) : solve_assignment(cost);

    Association out;
    for (auto [r, c] : solved.matches) out.matches.emplace_back(track_idx[r], det_idx[c]);
    for (auto r : solved.unmatched_tracks) out.unmatched_tracks.push_back(track_idx[r]);
    for (auto c : solved.unmatched_detections) out.unmatched_detections.push_back(det_idx[c]);
    return out;
}

void mark_matched(Track& track, const Detection& det, FrameId frame_id, const TrackerConfig& config,
                  const MotionModelSpec& spec) {
    track.append(frame_id, det.bbox, det.dist);
    track.hits += 1;
    track.hit_streak += 1;
    track.age_since_update = 0;
    if (track.status == TrackStatus::Lost || track.hit_streak >= config.min_hits) {
        track.status = TrackStatus::Confirmed;
    }
    if (track.motion) track.motion = kf_update(*track.motion, det.bbox, spec);
    if (det.embedding) {
        if (!track.last_embedding) {
            track.last_embedding = *det.embedding;
        } else {
            const double m = config.embedding_momentum;
            for (std::size_t i = 0; i < det.embedding->size(); ++i) {
                (*track.last_embedding)[i] = m * (*track.last_embedding)[i] + (1.0 - m) * (*det.embedding)[i];
            }
        }
    }
}

}  // namespace

std::vector<StepAssignment> tracker_step(TrackerState& state, FrameId frame_id,
                                         const std::vector<Detection>& detections,
                                         const TrackerConfig& config, Profiler* profiler) {
    if (state.cursor && frame_id <= *state.cursor) {
        throw Error(ErrorCode::OutOfOrderFrame, "frame " + std::to_string(frame_id) +
                                                    " is not after frame " + std::to_string(*state.cursor));
    }
    for (const auto& d : detections) {
        if (d.frame_id != frame_id) {
            throw Error(ErrorCode::OutOfOrderFrame, "detection from frame " + std::to_string(d.frame_id) +
                                                        " passed with frame " + std::to_string(frame_id));
        }
        if (config.kind == TrackerKind::AppearanceFused && !d.embedding) {
            throw Error(ErrorCode::MissingEmbedding,
                        "appearance tracker needs an embedding on every detection (frame " +
                            std::to_string(frame_id) + ")");
        }
    }
    state.cursor = frame_id;

    Profiler::Scope mot(profiler, Stage::Mot);
    const MotionModelSpec spec = config.motion_spec();

    for (auto& t : state.live) {
        if (!t.motion) continue;
        if (t.motion->model == MotionModel::SortCV7 && t.motion->mean(2) + t.motion->mean(6) <= 0.0) {
            t.motion->mean(6) = 0.0;
        }
        t.motion = kf_predict(*t.motion, spec);
    }
    const std::vector<BoundingBox> predicted = predicted_boxes(state.live);

    std::vector<std::size_t> high, low;
    for (std::size_t i = 0; i < detections.size(); ++i) {
        const double s = detections[i].score;
        if (s >= config.det_threshold_high) {
            high.push_back(i);
        } else if (config.kind == TrackerKind::ByteTrack && s >= config.det_threshold_low) {
            low.push_back(i);
        }
    }
    std::vector<std::size_t> all_tracks(state.live.size());
    std::iota(all_tracks.begin(), all_tracks.end(), 0);

    Association first = associate(state.live, predicted, all_tracks, detections, high, config, profiler);
    std::vector<std::pair<std::size_t, std::size_t>> matches = first.matches;
    std::vector<std::size_t> unmatched_tracks = first.unmatched_tracks;
    if (config.kind == TrackerKind::ByteTrack && !low.empty() && !unmatched_tracks.empty()) {
        Association second = associate(state.live, predicted, unmatched_tracks, detections, low, config, profiler);
        matches.insert(matches.end(), second.matches.begin(), second.matches.end());
        unmatched_tracks = second.unmatched_tracks;
    }

    std::vector<StepAssignment> out(detections.size());
    for (std::size_t i = 0; i < detections.size(); ++i) out[i].detection_index = i;

    for (auto [ti, di] : matches) {
        Track& t = state.live[ti];
        mark_matched(t, detections[di], frame_id, config, spec);
        out[di].track_id = t.id;
    }
    for (std::size_t ti : unmatched_tracks) {
        Track& t = state.live[ti];
        t.age_since_update += 1;
        t.hit_streak = 0;
        if (t.status == TrackStatus::Confirmed) t.status = TrackStatus::Lost;
    }

    for (std::size_t di : first.unmatched_detections) {
        const Detection& d = detections[di];
        Track t;
        t.id = state.next_id++;
        if (uses_motion(config.kind)) t.motion = kf_init(d.bbox, spec);
        t.append(frame_id, d.bbox, d.dist);
        t.hits = 1;
        t.hit_streak = 1;
        t.status = config.min_hits <= 1 ? TrackStatus::Confirmed : TrackStatus::Tentative;
        if (d.embedding) t.last_embedding = *d.embedding;
        out[di].track_id = t.id;
        state.live.push_back(std::move(t));
    }

    auto dead = std::stable_partition(state.live.begin(), state.live.end(), [&](const Track& t) {
        return t.age_since_update <= config.max_age;
    });
    for (auto it = dead; it != state.live.end(); ++it) {
        it->status = TrackStatus::Dead;
        state.finished.push_back(std::move(*it));
    }
    state.live.erase(dead, state.live.end());
    return out;
}

void tracker_reset(TrackerState& state) {
    for (auto& t : state.live) {
        t.status = TrackStatus::Dead;
        state.finished.push_back(std::move(t));
    }
    state.live.clear();
}

SequenceResult run_sequence(const Sequence& seq, const TrackerConfig& config, Profiler* profiler) {
    config.validate();
    check_embedding_consistency(seq);

    SequenceResult result;
    result.seq = seq.name;
    TrackerState state;
    std::optional<std::int64_t> current_burst;

    for (const Frame& frame : seq.frames) {
        if (!config.track_across_bursts && !frame.detections.empty()) {
            const auto burst = frame.detections.front().burst;
            if (burst && current_burst && *burst != *current_burst) tracker_reset(state);
            if (burst) current_burst = burst;
        }
        const auto assigned = tracker_step(state, frame.frame_id, frame.detections, config, profiler);
        for (const auto& a : assigned) {
            const Detection& d = frame.detections[a.detection_index];
            FrameAssignment fa;
            fa.frame_id = frame.frame_id;
            fa.detection_index = a.detection_index;
            fa.track_id = a.track_id;
            fa.bbox = d.bbox;
            fa.score = d.score;
            fa.raw_label = d.dist.argmax();
            fa.fused_label = fa.raw_label;
            fa.gt_class = d.gt_class;
            result.per_frame.push_back(fa);
        }
    }

    std::vector<Track> tracks = std::move(state.finished);
    for (auto& t : state.live) tracks.push_back(std::move(t));
    std::sort(tracks.begin(), tracks.end(), [](const Track& a, const Track& b) { return a.id < b.id; });

    std::vector<TrackId> discarded;
    for (auto& t : tracks) {
        if (static_cast<int>(t.entries.size()) >= config.min_hits) {
            result.tracks.push_back(std::move(t));
        } else {
            discarded.push_back(t.id);
        }
    }
    if (!discarded.empty()) {
        for (auto& fa : result.per_frame) {
            if (fa.track_id && std::binary_search(discarded.begin(), discarded.end(), *fa.track_id)) {
                fa.track_id.reset();
            }
        }
    }
    return result;
}

}  // namespace trackfuse
