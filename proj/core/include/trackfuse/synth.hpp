#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "trackfuse/types.hpp"

namespace trackfuse {

/// Seeded generator with platform-independent draws. The standard library's
/// distributions are implementation defined, so uniform, index and Gaussian
/// draws are derived here from the raw mt19937_64 stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform();
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t index(std::uint64_t n);
    /// Standard normal (Box-Muller, one value per call).
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }
    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

struct ScenarioConfig {
    std::uint64_t seed = 42;
    std::size_t num_objects = 10;
    std::int64_t num_frames = 2000;
    double image_width = 1920.0;
    double image_height = 1080.0;
    std::size_t num_classes = 10;
    /// Per-object speed is drawn uniformly from [min_speed, max_speed] px/frame.
    double min_speed = 0.5;
    double max_speed = 3.0;
    /// Box side lengths are drawn uniformly from [min_size, max_size] px.
    double min_size = 40.0;
    double max_size = 120.0;
    double dropout = 0.05;
    double jitter = 1.0;
    /// Probability that a detection's top class is a uniformly chosen wrong class.
    double flicker = 0.3;
    /// Mass placed on the top class.
    double confidence = 0.8;
    /// Detector scores are 1 - |N(0, score_noise)|, clamped to [0.01, 1].
    double score_noise = 0.2;
    /// 0 disables embeddings.
    std::size_t embedding_dim = 16;
    /// Norm of each identity's prototype embedding.
    double embedding_separation = 1.0;
    /// Per-component Gaussian noise added to prototypes.
    double embedding_noise = 0.05;
    std::string sequence_name = "synth";

    /// Throws InvalidConfig.
    void validate() const;
};

struct GroundTruthObject {
    TrackId identity = 0;
    ClassIndex true_class = 0;
    BoundingBox bbox;

    friend bool operator==(const GroundTruthObject&, const GroundTruthObject&) = default;
};

struct Scenario {
    LabelSet labels;
    /// ground_truth[t] lists every object at frame t.
    std::vector<std::vector<GroundTruthObject>> ground_truth;
    /// Detections with gt_class and gt_track filled in.
    Sequence sequence;
};

/// Top mass `confidence` on the true class with probability 1 - flicker, else
/// on a uniformly chosen wrong class; the rest is spread evenly.
ClassDistribution corrupt_distribution(ClassIndex true_class, const ScenarioConfig& config, Rng& rng);

/// Linear motion with border reflection, Bernoulli dropout, Gaussian box
/// jitter, flicker-corrupted class distributions and noisy identity
/// embeddings. Fully determined by the config (including its seed).
Scenario generate_scenario(const ScenarioConfig& config);

}  // namespace trackfuse
