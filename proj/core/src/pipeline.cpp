#include "trackfuse/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

namespace trackfuse {

std::size_t thread_count_from_env() {
    std::size_t fallback = std::max(1u, std::thread::hardware_concurrency());
    const char* env = std::getenv("TRACKFUSE_THREADS");
    if (!env || !*env) return fallback;
    try {
        const long n = std::stol(env);
        return n >= 1 ? static_cast<std::size_t>(n) : fallback;
    } catch (const std::exception&) {
        return fallback;
    }
}

std::vector<SequenceResult> track_and_fuse(const std::vector<Sequence>& sequences, const TrackerConfig& config,
                                           FusionMode mode, const RelabelOptions& relabel_options,
                                           std::size_t threads, Profiler* profiler) {
    config.validate();
    const std::size_t n = sequences.size();
    std::vector<SequenceResult> results(n);
    std::vector<std::exception_ptr> errors(n);
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
    std::vector<Profiler> profilers(workers);
    std::atomic<std::size_t> next{0};

    auto work = [&](std::size_t w) {
        Profiler* p = profiler ? &profilers[w] : nullptr;
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                SequenceResult r = run_sequence(sequences[i], config, p);
                if (p) p->add_samples(sequences[i].frames.size());
                Profiler::Scope fusion(p, Stage::Fusion);
                results[i] = relabel(std::move(r), mode, relabel_options);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    if (profiler) {
        for (const auto& p : profilers) profiler->merge(p);
    }
    return results;
}

}  // namespace trackfuse
