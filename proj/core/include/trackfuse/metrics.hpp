#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "trackfuse/types.hpp"

namespace trackfuse {

/// Rows are ground truth, columns are predictions.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t num_classes = 0)
        : n_(num_classes), counts_(num_classes * num_classes, 0) {}

    std::size_t num_classes() const noexcept { return n_; }
    std::uint64_t at(ClassIndex gt, ClassIndex pred) const { return counts_[gt * n_ + pred]; }
    void add(ClassIndex gt, ClassIndex pred, std::uint64_t count = 1);

    std::uint64_t total() const noexcept;
    std::uint64_t trace() const noexcept;
    std::uint64_t support(ClassIndex c) const;    ///< row sum
    std::uint64_t predicted(ClassIndex c) const;  ///< column sum

private:
    std::size_t n_;
    std::vector<std::uint64_t> counts_;
};

/// Throws IndexOutOfRange.
ConfusionMatrix confusion(const std::vector<std::pair<ClassIndex, ClassIndex>>& pairs,
                          std::size_t num_classes);

/// Throws EmptyEvaluation.
double accuracy_at_1(const ConfusionMatrix& cm);

enum class MacroAverage {
    /// Every class of the label set enters the macro mean (absent ones with F1 = 0).
    AllClasses,
    /// Only classes that occur in ground truth or predictions.
    PresentClasses,
};

struct F1Scores {
    double macro = 0.0;
    double weighted = 0.0;
    std::vector<double> per_class;
    std::vector<double> precision;
    std::vector<double> recall;
};

/// Precision, recall and F1 are 0 where their denominators vanish.
/// Throws EmptyEvaluation.
F1Scores f1_scores(const ConfusionMatrix& cm, MacroAverage average = MacroAverage::AllClasses);

/// Fraction of consecutive label pairs along tracks that differ. Throws
/// NoEligibleTracks when no track has two or more entries.
double label_flip_rate(const SequenceResult& result, bool use_fused);
/// Pools the flip counts over several sequences.
double label_flip_rate(const std::vector<SequenceResult>& results, bool use_fused);

struct EvaluationOptions {
    bool use_fused = true;
    /// Drop detections that were not assigned to any track.
    bool exclude_unmatched = false;
    MacroAverage average = MacroAverage::AllClasses;
};

/// Confusion over every detection that carries a gt_class.
ConfusionMatrix evaluate(const std::vector<SequenceResult>& results, std::size_t num_classes,
                         const EvaluationOptions& options = {});

// ---------------------------------------------------------------------------
// Timing

enum class Stage : std::size_t {
    DetectionIngest,
    ClassificationIngest,
    Mot,
    ReidCost,
    Fusion,
    Metrics,
};

inline constexpr std::size_t kStageCount = 6;

std::string_view to_string(Stage s) noexcept;

struct StageTiming {
    double total_ms = 0.0;
    double mean_ms = 0.0;  ///< total / samples, 0 when there are no samples
    std::uint64_t brackets = 0;
};

struct TimingProfile {
    std::array<StageTiming, kStageCount> stages{};
    std::uint64_t samples = 0;

    const StageTiming& operator[](Stage s) const { return stages[static_cast<std::size_t>(s)]; }
    double total_mean_ms() const noexcept;
};

/// Accumulates monotonic-clock stage totals. One instance per thread; merge
/// afterwards.
class Profiler {
public:
    using Clock = std::chrono::steady_clock;

    class Scope {
    public:
        Scope(Profiler* p, Stage s) : profiler_(p), stage_(s) {
            if (profiler_) start_ = Clock::now();
        }
        ~Scope() {
            if (profiler_) profiler_->add(stage_, Clock::now() - start_);
        }
        Scope(const Scope&) = delete;
        Scope& operator=(const Scope&) = delete;

    private:
        Profiler* profiler_;
        Stage stage_;
        Clock::time_point start_{};
    };

    void add(Stage s, Clock::duration d);
    void add_samples(std::uint64_t n) { samples_ += n; }
    void merge(const Profiler& other);
    TimingProfile profile() const;

private:
    std::array<Clock::duration, kStageCount> totals_{};
    std::array<std::uint64_t, kStageCount> brackets_{};
    std::uint64_t samples_ = 0;
};

/// Aligned text table in the column order MOT, ReID, Classification, Detection.
std::string format_timing_table(const std::vector<std::pair<std::string, TimingProfile>>& rows);

}  // namespace trackfuse
