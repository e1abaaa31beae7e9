#pragma once

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "trackfuse/types.hpp"

namespace trackfuse {

enum class FusionMode { ProbabilityFusion, MajorityVote, None };

std::string_view to_string(FusionMode m) noexcept;
/// CLI spellings: prob, vote, none.
std::optional<FusionMode> parse_fusion_mode(std::string_view name) noexcept;

/// Numerically stable log(sum(exp(x))). Returns -inf for an empty input.
double log_sum_exp(std::span<const double> x) noexcept;

/// Renormalized elementwise product of two distributions, evaluated in log
/// space. The result sums to one but is not floored, so entries may be
/// far below kProbabilityFloor or zero. Throws LengthMismatch.
ClassDistribution fuse_pair(const ClassDistribution& prev, const ClassDistribution& curr);

struct Consensus {
    ClassIndex label = 0;
    /// Unnormalized per-class sum of log-probabilities over the track.
    std::vector<double> log_scores;
};

/// Argmax of the track's accumulated log-probabilities, lowest index on ties.
/// Throws EmptyTrack.
Consensus consensus_label(const Track& track);

/// Most frequent per-entry argmax. Ties go to the class with the larger summed
/// probability, then the lowest index. Throws EmptyTrack.
ClassIndex majority_vote(const Track& track);

struct RelabelOptions {
    /// Label at frame t uses only the track's entries up to t, instead of the
    /// whole track.
    bool online = false;
};

/// Writes each track's consensus label (per mode) into fused_label of every
/// detection on that track. Unassigned detections keep their raw label.
SequenceResult relabel(SequenceResult result, FusionMode mode, const RelabelOptions& options = {});

}  // namespace trackfuse
