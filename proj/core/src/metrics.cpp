#include "trackfuse/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <sstream>

namespace trackfuse {

void ConfusionMatrix::add(ClassIndex gt, ClassIndex pred, std::uint64_t count) {
    if (gt >= n_ || pred >= n_) {
        throw Error(ErrorCode::IndexOutOfRange, "pair (" + std::to_string(gt) + ", " + std::to_string(pred) +
                                                    ") outside " + std::to_string(n_) + " classes");
    }
    counts_[gt * n_ + pred] += count;
}

std::uint64_t ConfusionMatrix::total() const noexcept {
    std::uint64_t t = 0;
    for (auto c : counts_) t += c;
    return t;
}

std::uint64_t ConfusionMatrix::trace() const noexcept {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < n_; ++i) t += counts_[i * n_ + i];
    return t;
}

std::uint64_t ConfusionMatrix::support(ClassIndex c) const {
    std::uint64_t t = 0;
    for (std::size_t j = 0; j < n_; ++j) t += at(c, j);
    return t;
}

std::uint64_t ConfusionMatrix::predicted(ClassIndex c) const {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < n_; ++i) t += at(i, c);
    return t;
}

ConfusionMatrix confusion(const std::vector<std::pair<ClassIndex, ClassIndex>>& pairs, std::size_t num_classes) {
    ConfusionMatrix cm(num_classes);
    for (auto [gt, pred] : pairs) cm.add(gt, pred);
    return cm;
}

double accuracy_at_1(const ConfusionMatrix& cm) {
    const auto total = cm.total();
    if (total == 0) throw Error(ErrorCode::EmptyEvaluation, "no evaluated detections");
    return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

F1Scores f1_scores(const ConfusionMatrix& cm, MacroAverage average) {
    const auto total = cm.total();
    if (total == 0) throw Error(ErrorCode::EmptyEvaluation, "no evaluated detections");
    const std::size_t n = cm.num_classes();
    F1Scores out;
    out.per_class.assign(n, 0.0);
    out.precision.assign(n, 0.0);
    out.recall.assign(n, 0.0);

    double macro_sum = 0.0;
    std::size_t macro_count = 0;
    double weighted_sum = 0.0;
    for (ClassIndex c = 0; c < n; ++c) {
        const double tp = static_cast<double>(cm.at(c, c));
        const auto predicted = cm.predicted(c);
        const auto support = cm.support(c);
        const double p = predicted > 0 ? tp / static_cast<double>(predicted) : 0.0;
        const double r = support > 0 ? tp / static_cast<double>(support) : 0.0;
        const double f1 = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
        out.precision[c] = p;
        out.recall[c] = r;
        out.per_class[c] = f1;
        if (average == MacroAverage::AllClasses || predicted > 0 || support > 0) {
            macro_sum += f1;
            ++macro_count;
        }
        weighted_sum += f1 * static_cast<double>(support);
    }
    out.macro = macro_count > 0 ? macro_sum / static_cast<double>(macro_count) : 0.0;
    out.weighted = weighted_sum / static_cast<double>(total);
    return out;
}

namespace {

struct FlipCount {
    std::uint64_t flips = 0;
    std::uint64_t pairs = 0;
};

FlipCount count_flips(const SequenceResult& result, bool use_fused) {
    // per_frame is in frame order, so each track's labels come out in order.
    std::map<TrackId, std::vector<ClassIndex>> labels;
    for (const auto& fa : result.per_frame) {
        if (fa.track_id) labels[*fa.track_id].push_back(use_fused ? fa.fused_label : fa.raw_label);
    }
    FlipCount fc;
    for (const auto& [id, seq] : labels) {
        for (std::size_t i = 1; i < seq.size(); ++i) {
            ++fc.pairs;
            if (seq[i] != seq[i - 1]) ++fc.flips;
        }
    }
    return fc;
}

double flip_ratio(const FlipCount& fc) {
    if (fc.pairs == 0) throw Error(ErrorCode::NoEligibleTracks, "no track has two or more entries");
    return static_cast<double>(fc.flips) / static_cast<double>(fc.pairs);
}

}  // namespace

double label_flip_rate(const SequenceResult& result, bool use_fused) {
    return flip_ratio(count_flips(result, use_fused));
}

double label_flip_rate(const std::vector<SequenceResult>& results, bool use_fused) {
    FlipCount total;
    for (const auto& r : results) {
        const auto fc = count_flips(r, use_fused);
        total.flips += fc.flips;
        total.pairs += fc.pairs;
    }
    return flip_ratio(total);
}

ConfusionMatrix evaluate(const std::vector<SequenceResult>& results, std::size_t num_classes,
                         const EvaluationOptions& options) {
    ConfusionMatrix cm(num_classes);
    for (const auto& r : results) {
        for (const auto& fa : r.per_frame) {
            if (!fa.gt_class) continue;
            if (options.exclude_unmatched && !fa.track_id) continue;
            cm.add(*fa.gt_class, options.use_fused ? fa.fused_label : fa.raw_label);
        }
    }
    return cm;
}

std::string_view to_string(Stage s) noexcept {
    switch (s) {
        case Stage::DetectionIngest: return "detection-ingest";
        case Stage::ClassificationIngest: return "classification-ingest";
        case Stage::Mot: return "mot";
        case Stage::ReidCost: return "reid-cost";
        case Stage::Fusion: return "fusion";
        case Stage::Metrics: return "metrics";
    }
    return "unknown";
}

double TimingProfile::total_mean_ms() const noexcept {
    // ReID cost is measured inside the MOT bracket, so it is not added again.
    double t = 0.0;
    for (std::size_t i = 0; i < kStageCount; ++i) {
        if (static_cast<Stage>(i) != Stage::ReidCost) t += stages[i].mean_ms;
    }
    return t;
}

void Profiler::add(Stage s, Clock::duration d) {
    totals_[static_cast<std::size_t>(s)] += d;
    brackets_[static_cast<std::size_t>(s)] += 1;
}

void Profiler::merge(const Profiler& other) {
    for (std::size_t i = 0; i < kStageCount; ++i) {
        totals_[i] += other.totals_[i];
        brackets_[i] += other.brackets_[i];
    }
    samples_ += other.samples_;
}

TimingProfile Profiler::profile() const {
    TimingProfile p;
    p.samples = samples_;
    for (std::size_t i = 0; i < kStageCount; ++i) {
        auto& st = p.stages[i];
        st.total_ms = std::chrono::duration<double, std::milli>(totals_[i]).count();
        st.brackets = brackets_[i];
        st.mean_ms = samples_ > 0 ? st.total_ms / static_cast<double>(samples_) : 0.0;
    }
    return p;
}

std::string format_timing_table(const std::vector<std::pair<std::string, TimingProfile>>& rows) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4);
    const int name_w = 14;
    const int col_w = 16;
    os << std::left << std::setw(name_w) << "Method" << std::right << std::setw(col_w) << "Total"
       << std::setw(col_w) << "MOT" << std::setw(col_w) << "ReID" << std::setw(col_w) << "Classification"
       << std::setw(col_w) << "Detection" << std::setw(col_w) << "Fusion" << std::setw(col_w) << "Metrics"
       << "\n";
    for (const auto& [name, p] : rows) {
        os << std::left << std::setw(name_w) << name << std::right << std::setw(col_w) << p.total_mean_ms()
           << std::setw(col_w) << p[Stage::Mot].mean_ms << std::setw(col_w) << p[Stage::ReidCost].mean_ms
           << std::setw(col_w) << p[Stage::ClassificationIngest].mean_ms << std::setw(col_w)
           << p[Stage::DetectionIngest].mean_ms << std::setw(col_w) << p[Stage::Fusion].mean_ms
           << std::setw(col_w) << p[Stage::Metrics].mean_ms << "\n";
    }
    os << "(milliseconds per frame; ReID is included in MOT)\n";
    return os.str();
}

}  // namespace trackfuse
