#include "trackfuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace trackfuse {

std::string_view to_string(FusionMode m) noexcept {
    switch (m) {
        case FusionMode::ProbabilityFusion: return "prob";
        case FusionMode::MajorityVote: return "vote";
        case FusionMode::None: return "none";
    }
    return "unknown";
}

std::optional<FusionMode> parse_fusion_mode(std::string_view name) noexcept {
    for (auto m : {FusionMode::ProbabilityFusion, FusionMode::MajorityVote, FusionMode::None}) {
        if (to_string(m) == name) return m;
    }
    return std::nullopt;
}

double log_sum_exp(std::span<const double> x) noexcept {
    if (x.empty()) return -std::numeric_limits<double>::infinity();
    const double hi = *std::max_element(x.begin(), x.end());
    if (!std::isfinite(hi)) return hi;
    double acc = 0.0;
    for (double v : x) acc += std::exp(v - hi);
    return hi + std::log(acc);
}

ClassDistribution fuse_pair(const ClassDistribution& prev, const ClassDistribution& curr) {
    if (prev.size() != curr.size()) {
        throw Error(ErrorCode::LengthMismatch, "cannot fuse distributions of length " +
                                                   std::to_string(prev.size()) + " and " +
                                                   std::to_string(curr.size()));
    }
    std::vector<double> joint(prev.size());
    for (std::size_t c = 0; c < joint.size(); ++c) joint[c] = std::log(prev[c]) + std::log(curr[c]);
    const double norm = log_sum_exp(joint);
    for (double& v : joint) v = std::exp(v - norm);
    // No flooring here: raising a losing class to the floor would let later
    // frames overturn evidence it never had, and the fold would drift from
    // the cum_log argmax.
    return ClassDistribution(std::move(joint));
}

namespace {

ClassIndex argmax_lowest(std::span<const double> v) {
    return static_cast<ClassIndex>(std::max_element(v.begin(), v.end()) - v.begin());
}

void require_entries(const Track& track) {
    if (track.entries.empty()) {
        throw Error(ErrorCode::EmptyTrack, "track " + std::to_string(track.id) + " has no entries");
    }
}

// Vote counts and probability mass accumulated over a prefix of entries.
struct VoteTally {
    std::vector<std::size_t> counts;
    std::vector<double> mass;

    explicit VoteTally(std::size_t n) : counts(n, 0), mass(n, 0.0) {}

    void add(const ClassDistribution& d) {
        counts[d.argmax()] += 1;
        for (std::size_t c = 0; c < mass.size(); ++c) mass[c] += d[c];
    }

    ClassIndex winner() const {
        ClassIndex best = 0;
        for (ClassIndex c = 1; c < counts.size(); ++c) {
            if (counts[c] > counts[best] || (counts[c] == counts[best] && mass[c] > mass[best])) best = c;
        }
        return best;
    }
};

}  // namespace

Consensus consensus_label(const Track& track) {
    require_entries(track);
    return {argmax_lowest(track.cum_log), track.cum_log};
}

ClassIndex majority_vote(const Track& track) {
    require_entries(track);
    VoteTally tally(track.entries.front().dist.size());
    for (const auto& e : track.entries) tally.add(e.dist);
    return tally.winner();
}

SequenceResult relabel(SequenceResult result, FusionMode mode, const RelabelOptions& options) {
    for (auto& fa : result.per_frame) fa.fused_label = fa.raw_label;
    if (mode == FusionMode::None) return result;

    std::map<std::pair<TrackId, FrameId>, std::size_t> where;
    for (std::size_t i = 0; i < result.per_frame.size(); ++i) {
        const auto& fa = result.per_frame[i];
        if (fa.track_id) where.emplace(std::make_pair(*fa.track_id, fa.frame_id), i);
    }

    for (const Track& track : result.tracks) {
        if (track.entries.empty()) continue;
        if (!options.online) {
            const ClassIndex label =
                mode == FusionMode::ProbabilityFusion ? consensus_label(track).label : majority_vote(track);
            for (const auto& e : track.entries) {
                auto it = where.find({track.id, e.frame_id});
                if (it != where.end()) result.per_frame[it->second].fused_label = label;
            }
            continue;
        }
        const std::size_t n = track.entries.front().dist.size();
        std::vector<double> prefix(n, 0.0);
        VoteTally tally(n);
        for (const auto& e : track.entries) {
            ClassIndex label;
            if (mode == FusionMode::ProbabilityFusion) {
                for (std::size_t c = 0; c < n; ++c) prefix[c] += std::log(e.dist[c]);
                label = argmax_lowest(prefix);
            } else {
                tally.add(e.dist);
                label = tally.winner();
            }
            auto it = where.find({track.id, e.frame_id});
            if (it != where.end()) result.per_frame[it->second].fused_label = label;
        }
    }
    return result;
}

}  // namespace trackfuse
