#include "trackfuse/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace trackfuse {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::WrongLength: return "WrongLength";
        case ErrorCode::InvalidValue: return "InvalidValue";
        case ErrorCode::DegenerateSum: return "DegenerateSum";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
        case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::OutOfOrderFrame: return "OutOfOrderFrame";
        case ErrorCode::MissingEmbedding: return "MissingEmbedding";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::EmptyTrack: return "EmptyTrack";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::EmptyEvaluation: return "EmptyEvaluation";
        case ErrorCode::NoEligibleTracks: return "NoEligibleTracks";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::EmptyFile: return "EmptyFile";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

std::string_view to_string(TrackStatus s) noexcept {
    switch (s) {
        case TrackStatus::Tentative: return "tentative";
        case TrackStatus::Confirmed: return "confirmed";
        case TrackStatus::Lost: return "lost";
        case TrackStatus::Dead: return "dead";
    }
    return "unknown";
}

LabelSet::LabelSet(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.empty()) {
        throw Error(ErrorCode::InvalidConfig, "label set is empty");
    }
    for (ClassIndex i = 0; i < names_.size(); ++i) {
        if (names_[i].empty()) {
            throw Error(ErrorCode::InvalidConfig, "label " + std::to_string(i) + " is empty");
        }
        if (!index_.emplace(names_[i], i).second) {
            throw Error(ErrorCode::InvalidConfig, "duplicate label '" + names_[i] + "'");
        }
    }
}

std::optional<ClassIndex> LabelSet::index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

LabelSet LabelSet::numbered(std::size_t n) {
    std::vector<std::string> names;
    names.reserve(n);
    for (std::size_t i = 0; i < n; ++i) names.push_back("class_" + std::to_string(i));
    return LabelSet(std::move(names));
}

bool BoundingBox::valid() const noexcept {
    return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2) &&
           x2 > x1 && y2 > y1;
}

BoundingBox BoundingBox::make(double x1, double y1, double x2, double y2) {
    BoundingBox b{x1, y1, x2, y2};
    if (!b.valid()) {
        std::ostringstream os;
        os << "invalid bounding box [" << x1 << ", " << y1 << ", " << x2 << ", " << y2 << "]";
        throw Error(ErrorCode::InvalidValue, os.str());
    }
    return b;
}

ClassIndex ClassDistribution::argmax() const noexcept {
    // std::max_element returns the first maximum, i.e. the lowest index on ties.
    return static_cast<ClassIndex>(std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
}

namespace {

bool satisfies_invariant(std::span<const double> p) {
    long double sum = 0.0L;
    for (double v : p) {
        if (!(v >= kProbabilityFloor)) return false;
        sum += v;
    }
    return std::fabs(static_cast<double>(sum - 1.0L)) <= 1e-12;
}

}  // namespace

ClassDistribution validate_distribution(std::span<const double> raw, std::size_t num_classes) {
    if (raw.size() != num_classes) {
        throw Error(ErrorCode::WrongLength, "expected " + std::to_string(num_classes) +
                                                " probabilities, got " + std::to_string(raw.size()));
    }
    long double raw_sum = 0.0L;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (!std::isfinite(raw[i]) || raw[i] < 0.0) {
            throw Error(ErrorCode::InvalidValue, "probability " + std::to_string(i) +
                                                     " is negative or non-finite");
        }
        raw_sum += raw[i];
    }
    if (raw_sum < 1e-9L) {
        throw Error(ErrorCode::DegenerateSum, "probabilities sum to less than 1e-9");
    }
    if (satisfies_invariant(raw)) {
        return ClassDistribution(std::vector<double>(raw.begin(), raw.end()));
    }

    // Entries that would land below the floor are pinned to it; the rest share
    // the remaining mass in proportion to their raw values.
    const std::size_t n = raw.size();
    std::vector<bool> pinned(n, false);
    std::vector<double> out(n, kProbabilityFloor);
    for (;;) {
        long double free_mass = 0.0L;
        std::size_t pinned_count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (pinned[i]) ++pinned_count;
            else free_mass += raw[i];
        }
        if (pinned_count == n || free_mass <= 0.0L) {
            std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(n));
            break;
        }
        const long double budget = 1.0L - static_cast<long double>(pinned_count) * kProbabilityFloor;
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (pinned[i]) continue;
            const auto v = static_cast<double>(raw[i] * budget / free_mass);
            if (v < kProbabilityFloor) {
                pinned[i] = true;
                changed = true;
            }
            out[i] = v;
        }
        if (!changed) break;
        for (std::size_t i = 0; i < n; ++i)
            if (pinned[i]) out[i] = kProbabilityFloor;
    }
    return ClassDistribution(std::move(out));
}

std::size_t Sequence::detection_count() const noexcept {
    std::size_t n = 0;
    for (const auto& f : frames) n += f.detections.size();
    return n;
}

void check_embedding_consistency(const Sequence& seq) {
    std::optional<std::size_t> dim;
    bool any = false;
    bool first = true;
    for (const auto& frame : seq.frames) {
        for (const auto& det : frame.detections) {
            const bool has = det.embedding.has_value();
            if (first) {
                any = has;
                first = false;
            } else if (has != any) {
                throw Error(ErrorCode::SchemaError,
                            "sequence '" + seq.name + "' mixes detections with and without embeddings");
            }
            if (has) {
                if (!dim) dim = det.embedding->size();
                if (*dim != det.embedding->size()) {
                    throw Error(ErrorCode::SchemaError,
                                "sequence '" + seq.name + "' has embeddings of differing dimension");
                }
            }
        }
    }
}

void Track::append(FrameId frame_id, const BoundingBox& bbox, const ClassDistribution& dist) {
    if (!entries.empty() && frame_id <= entries.back().frame_id) {
        throw Error(ErrorCode::OutOfOrderFrame, "track " + std::to_string(id) + " received frame " +
                                                    std::to_string(frame_id) + " after " +
                                                    std::to_string(entries.back().frame_id));
    }
    if (cum_log.empty()) {
        cum_log.assign(dist.size(), 0.0);
    } else if (cum_log.size() != dist.size()) {
        throw Error(ErrorCode::LengthMismatch, "class count changed within track");
    }
    for (std::size_t c = 0; c < dist.size(); ++c) cum_log[c] += std::log(dist[c]);
    entries.push_back({frame_id, bbox, dist});
}

}  // namespace trackfuse
