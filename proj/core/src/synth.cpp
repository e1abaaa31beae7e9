#include "trackfuse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace trackfuse {

double Rng::uniform() {
    // 53 random mantissa bits.
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::index(std::uint64_t n) {
    if (n == 0) throw Error(ErrorCode::InvalidValue, "Rng::index needs a positive bound");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

double Rng::normal() {
    double u1;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void ScenarioConfig::validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
    if (num_frames < 1) fail("num_frames must be >= 1");
    if (num_classes < 1) fail("num_classes must be >= 1");
    if (!(image_width > 0.0) || !(image_height > 0.0)) fail("image size must be positive");
    if (!(min_size > 0.0) || max_size < min_size) fail("require 0 < min_size <= max_size");
    if (max_size >= image_width || max_size >= image_height) fail("boxes must fit inside the image");
    if (min_speed < 0.0 || max_speed < min_speed) fail("require 0 <= min_speed <= max_speed");
    if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must lie in [0, 1)");
    if (!(flicker >= 0.0 && flicker <= 1.0)) fail("flicker must lie in [0, 1]");
    if (flicker > 0.0 && num_classes < 2) fail("flicker needs at least two classes");
    if (!(confidence <= 1.0) || !(confidence * static_cast<double>(num_classes) > 1.0)) {
        fail("confidence must satisfy 1/|C| < confidence <= 1");
    }
    if (!(jitter >= 0.0) || !(score_noise >= 0.0) || !(embedding_noise >= 0.0)) fail("noise levels must be >= 0");
    if (embedding_dim > 0 && !(embedding_separation > 0.0)) fail("embedding_separation must be positive");
}

ClassDistribution corrupt_distribution(ClassIndex true_class, const ScenarioConfig& config, Rng& rng) {
    const std::size_t n = config.num_classes;
    if (true_class >= n) {
        throw Error(ErrorCode::IndexOutOfRange, "true class " + std::to_string(true_class) + " >= " + std::to_string(n));
    }
    ClassIndex top = true_class;
    if (n > 1 && rng.bernoulli(config.flicker)) {
        top = static_cast<ClassIndex>(rng.index(n - 1));
        if (top >= true_class) ++top;
    }
    const double rest = n > 1 ? (1.0 - config.confidence) / static_cast<double>(n - 1) : 0.0;
    std::vector<double> probs(n, rest);
    probs[top] = n > 1 ? config.confidence : 1.0;
    return validate_distribution(probs, n);
}

namespace {

struct Mover {
    double cx, cy, w, h, vx, vy;
    ClassIndex cls;
    Embedding prototype;

    BoundingBox box() const { return {cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h}; }

    void advance(double width, double height) {
        cx += vx;
        cy += vy;
        reflect(cx, vx, 0.5 * w, width - 0.5 * w);
        reflect(cy, vy, 0.5 * h, height - 0.5 * h);
    }

    static void reflect(double& pos, double& vel, double lo, double hi) {
        if (pos < lo) {
            pos = 2.0 * lo - pos;
            vel = -vel;
        } else if (pos > hi) {
            pos = 2.0 * hi - pos;
            vel = -vel;
        }
    }
};

}  // namespace

Scenario generate_scenario(const ScenarioConfig& config) {
    config.validate();
    Rng rng(config.seed);
    Scenario sc;
    sc.labels = LabelSet::numbered(config.num_classes);
    sc.sequence.name = config.sequence_name;

    std::vector<Mover> movers;
    movers.reserve(config.num_objects);
    for (std::size_t k = 0; k < config.num_objects; ++k) {
        Mover m{};
        m.w = rng.uniform(config.min_size, config.max_size);
        m.h = rng.uniform(config.min_size, config.max_size);
        m.cx = rng.uniform(0.5 * m.w, config.image_width - 0.5 * m.w);
        m.cy = rng.uniform(0.5 * m.h, config.image_height - 0.5 * m.h);
        const double speed = rng.uniform(config.min_speed, config.max_speed);
        const double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
        m.vx = speed * std::cos(heading);
        m.vy = speed * std::sin(heading);
        m.cls = static_cast<ClassIndex>(rng.index(config.num_classes));
        if (config.embedding_dim > 0) {
            m.prototype.resize(config.embedding_dim);
            double norm = 0.0;
            for (auto& x : m.prototype) {
                x = rng.normal();
                norm += x * x;
            }
            norm = std::sqrt(norm);
            for (auto& x : m.prototype) x *= config.embedding_separation / (norm > 0.0 ? norm : 1.0);
        }
        movers.push_back(std::move(m));
    }

    sc.ground_truth.resize(static_cast<std::size_t>(config.num_frames));
    for (std::int64_t t = 0; t < config.num_frames; ++t) {
        auto& gt = sc.ground_truth[static_cast<std::size_t>(t)];
        Frame frame;
        frame.frame_id = t;
        for (std::size_t k = 0; k < movers.size(); ++k) {
            const Mover& m = movers[k];
            const BoundingBox truth = m.box();
            const auto identity = static_cast<TrackId>(k + 1);
            gt.push_back({identity, m.cls, truth});

            if (rng.bernoulli(config.dropout)) continue;
            Detection d;
            d.frame_id = t;
            d.bbox = truth;
            if (config.jitter > 0.0) {
                BoundingBox j{truth.x1 + rng.normal(0.0, config.jitter), truth.y1 + rng.normal(0.0, config.jitter),
                              truth.x2 + rng.normal(0.0, config.jitter), truth.y2 + rng.normal(0.0, config.jitter)};
                if (j.valid()) d.bbox = j;
            }
            d.score = std::clamp(1.0 - std::fabs(rng.normal(0.0, config.score_noise)), 0.01, 1.0);
            d.dist = corrupt_distribution(m.cls, config, rng);
            if (config.embedding_dim > 0) {
                Embedding e = m.prototype;
                for (auto& x : e) x += rng.normal(0.0, config.embedding_noise);
                d.embedding = std::move(e);
            }
            d.gt_class = m.cls;
            d.gt_track = identity;
            frame.detections.push_back(std::move(d));
        }
        // Detector output order carries no identity information.
        for (std::size_t i = frame.detections.size(); i > 1; --i) {
            std::swap(frame.detections[i - 1], frame.detections[rng.index(i)]);
        }
        if (!frame.detections.empty()) sc.sequence.frames.push_back(std::move(frame));
        for (auto& m : movers) m.advance(config.image_width, config.image_height);
    }
    return sc;
}

}  // namespace trackfuse
