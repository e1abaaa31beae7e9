#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "trackfuse/error.hpp"
#include "trackfuse/kalman_state.hpp"

namespace trackfuse {

/// Probabilities below this are raised to it before any logarithm is taken.
inline constexpr double kProbabilityFloor = 1e-12;

using FrameId = std::int64_t;
using TrackId = std::int64_t;
using ClassIndex = std::size_t;
using Embedding = std::vector<double>;

/// Closed, ordered set of class names. Index i is the i-th name.
class LabelSet {
public:
    LabelSet() = default;
    explicit LabelSet(std::vector<std::string> names);

    std::size_t size() const noexcept { return names_.size(); }
    const std::string& name(ClassIndex i) const { return names_.at(i); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    std::optional<ClassIndex> index_of(const std::string& name) const;

    /// Labels "class_0" .. "class_{n-1}"; used by the synthetic generator.
    static LabelSet numbered(std::size_t n);

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, ClassIndex> index_;
};

/// Axis-aligned corner-form box in image pixels.
struct BoundingBox {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;

    double width() const noexcept { return x2 - x1; }
    double height() const noexcept { return y2 - y1; }
    double area() const noexcept { return width() * height(); }
    double center_x() const noexcept { return 0.5 * (x1 + x2); }
    double center_y() const noexcept { return 0.5 * (y1 + y2); }
    bool valid() const noexcept;

    /// Throws InvalidValue unless x2 > x1, y2 > y1 and all corners finite.
    static BoundingBox make(double x1, double y1, double x2, double y2);

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// A validated softmax vector: every entry >= kProbabilityFloor, sum within
/// 1e-12 of one. Produced by validate_distribution(), and by fuse_pair(),
/// whose posterior is normalized but not floored.
class ClassDistribution {
public:
    ClassDistribution() = default;

    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_[i]; }
    std::span<const double> probs() const noexcept { return probs_; }
    ClassIndex argmax() const noexcept;

    friend bool operator==(const ClassDistribution&, const ClassDistribution&) = default;

private:
    explicit ClassDistribution(std::vector<double> p) : probs_(std::move(p)) {}
    friend ClassDistribution validate_distribution(std::span<const double>, std::size_t);
    friend ClassDistribution fuse_pair(const ClassDistribution&, const ClassDistribution&);

    std::vector<double> probs_;
};

/// Floors entries at kProbabilityFloor and renormalizes. Inputs that already
/// satisfy the ClassDistribution invariant are returned unchanged, which makes
/// the operation idempotent.
ClassDistribution validate_distribution(std::span<const double> raw, std::size_t num_classes);

struct Detection {
    FrameId frame_id = 0;
    BoundingBox bbox;
    double score = 1.0;
    ClassDistribution dist;
    std::optional<Embedding> embedding;
    std::optional<ClassIndex> gt_class;
    std::optional<TrackId> gt_track;
    /// Camera-trap burst index, set by the trigger simulator.
    std::optional<std::int64_t> burst;

    friend bool operator==(const Detection&, const Detection&) = default;
};

struct Frame {
    FrameId frame_id = 0;
    std::vector<Detection> detections;

    friend bool operator==(const Frame&, const Frame&) = default;
};

/// One named detection stream, frames ascending.
struct Sequence {
    std::string name;
    std::vector<Frame> frames;

    std::size_t detection_count() const noexcept;

    friend bool operator==(const Sequence&, const Sequence&) = default;
};

/// Throws SchemaError when embeddings are present on some detections but not
/// others, or with differing dimensions.
void check_embedding_consistency(const Sequence& seq);

enum class TrackStatus { Tentative, Confirmed, Lost, Dead };

std::string_view to_string(TrackStatus s) noexcept;

struct TrackEntry {
    FrameId frame_id = 0;
    BoundingBox bbox;
    ClassDistribution dist;
};

struct Track {
    TrackId id = 0;
    std::vector<TrackEntry> entries;
    std::vector<double> cum_log;
    TrackStatus status = TrackStatus::Tentative;
    int hits = 0;
    int hit_streak = 0;
    int age_since_update = 0;
    std::optional<KalmanState> motion;
    std::optional<Embedding> last_embedding;

    /// Appends a matched observation and folds its log-probabilities into
    /// cum_log. Throws OutOfOrderFrame if frame_id does not increase.
    void append(FrameId frame_id, const BoundingBox& bbox, const ClassDistribution& dist);
};

/// Per-detection outcome of a tracking run.
struct FrameAssignment {
    FrameId frame_id = 0;
    std::size_t detection_index = 0;  ///< position within its frame
    std::optional<TrackId> track_id;
    BoundingBox bbox;
    double score = 0.0;
    ClassIndex raw_label = 0;
    ClassIndex fused_label = 0;
    std::optional<ClassIndex> gt_class;
};

struct SequenceResult {
    std::string seq;
    std::vector<Track> tracks;
    std::vector<FrameAssignment> per_frame;
};

}  // namespace trackfuse
