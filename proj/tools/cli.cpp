#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "trackfuse/camtrap.hpp"
#include "trackfuse/fusion.hpp"
#include "trackfuse/io.hpp"
#include "trackfuse/metrics.hpp"
#include "trackfuse/pipeline.hpp"
#include "trackfuse/synth.hpp"
#include "trackfuse/trackers.hpp"

namespace trackfuse::cli {

namespace {

const std::vector<std::string> kFusionNames{"prob", "vote", "none"};

struct SynthArgs {
    ScenarioConfig scenario;
    std::string output;
    std::string labels;
};

struct SimulateArgs {
    std::string input;
    std::string labels;
    std::string output;
    std::string config;
    std::int64_t fps = 30;
    std::int64_t burst = 4;
    double cooldown = 10.0;
    std::int64_t total_frames = 0;
};

struct PipelineArgs {
    std::string input;
    std::string labels;
    std::string config;
    std::string tracker = "sort";
    std::string fusion = "prob";
    bool online = false;
};

struct TrackArgs {
    PipelineArgs pipe;
    std::string output;
};

struct EvalArgs {
    PipelineArgs pipe;
    bool per_class = false;
    bool flip_rate = false;
    bool exclude_unmatched = false;
    std::string macro = "all";
    std::string json;
};

struct BenchArgs {
    std::string input;
    std::string labels;
    std::string config;
    std::vector<std::string> trackers;
    std::string fusion = "prob";
    int repeat = 3;
    std::string json;
    ScenarioConfig scenario;
};

// Loads the config file (if any), then lets explicitly given flags win.
RunConfig resolve_config(const std::string& config_path, const CLI::Option* tracker_opt,
                         const std::string& tracker_name) {
    RunConfig rc;
    if (!config_path.empty()) rc = load_run_config(config_path);
    if (config_path.empty() || (tracker_opt && tracker_opt->count() > 0)) {
        const auto kind = parse_tracker_kind(tracker_name);
        if (!kind) throw Error(ErrorCode::InvalidConfig, "unknown tracker '" + tracker_name + "'");
        // A motion block written for another tracker kind would no longer match.
        if (rc.tracker.kind != *kind && rc.tracker.motion &&
            (rc.tracker.motion->model == MotionModel::CentroidCV4) != (*kind == TrackerKind::CentroidKF)) {
            rc.tracker.motion.reset();
        }
        rc.tracker.kind = *kind;
    }
    rc.tracker.validate();
    return rc;
}

std::vector<SequenceResult> run_pipeline(const PipelineArgs& a, const CLI::Option* tracker_opt, const LabelSet& labels,
                                         RunConfig& rc, Profiler* profiler = nullptr) {
    rc = resolve_config(a.config, tracker_opt, a.tracker);
    const auto sequences = parse_detections(a.input, labels, profiler);
    const FusionMode mode = *parse_fusion_mode(a.fusion);
    return track_and_fuse(sequences, rc.tracker, mode, {a.online}, thread_count_from_env(), profiler);
}

void add_pipeline_options(CLI::App* cmd, PipelineArgs& a, CLI::Option*& tracker_opt) {
    cmd->add_option("--input", a.input, "Detection JSON-lines file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--labels", a.labels, "Label-set file, one class name per line")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--config", a.config, "Run configuration JSON")->check(CLI::ExistingFile);
    tracker_opt = cmd->add_option("--tracker", a.tracker, "Tracker kind")
                      ->check(CLI::IsMember(tracker_kind_names()))
                      ->capture_default_str();
    cmd->add_option("--fusion", a.fusion, "Label fusion mode")
        ->check(CLI::IsMember(kFusionNames))
        ->capture_default_str();
    cmd->add_flag("--online", a.online, "Label each frame from the track's past entries only");
}

MetricsReport build_report(const std::vector<SequenceResult>& results, const LabelSet& labels, const RunConfig& rc,
                           const EvalArgs& a, Profiler* profiler) {
    Profiler::Scope scope(profiler, Stage::Metrics);
    EvaluationOptions opts;
    opts.exclude_unmatched = a.exclude_unmatched;
    opts.average = a.macro == "present" ? MacroAverage::PresentClasses : MacroAverage::AllClasses;

    MetricsReport report;
    report.tracker = std::string(to_string(rc.tracker.kind));
    report.fusion = a.pipe.fusion;
    report.labels = labels.names();

    opts.use_fused = false;
    const auto raw_cm = evaluate(results, labels.size(), opts);
    opts.use_fused = true;
    const auto fused_cm = evaluate(results, labels.size(), opts);
    report.evaluated = fused_cm.total();
    report.raw_accuracy = accuracy_at_1(raw_cm);
    report.raw_f1 = f1_scores(raw_cm, opts.average);
    report.accuracy = accuracy_at_1(fused_cm);
    report.f1 = f1_scores(fused_cm, opts.average);
    if (a.flip_rate) {
        report.raw_flip_rate = label_flip_rate(results, false);
        report.fused_flip_rate = label_flip_rate(results, true);
    }
    return report;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

void add_scenario_options(CLI::App* cmd, ScenarioConfig& s) {
    cmd->add_option("--seed", s.seed, "Random seed")->capture_default_str();
    cmd->add_option("--objects", s.num_objects, "Number of moving objects")->capture_default_str();
    cmd->add_option("--frames", s.num_frames, "Number of frames")->capture_default_str();
    cmd->add_option("--classes", s.num_classes, "Number of classes")->capture_default_str();
    cmd->add_option("--flicker", s.flicker, "Probability of a wrong top class")->capture_default_str();
    cmd->add_option("--dropout", s.dropout, "Detection dropout rate")->capture_default_str();
    cmd->add_option("--jitter", s.jitter, "Box corner jitter std (px)")->capture_default_str();
    cmd->add_option("--confidence", s.confidence, "Mass on the top class")->capture_default_str();
    cmd->add_option("--embedding-dim", s.embedding_dim, "Embedding dimension (0 disables)")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"trackfuse: tracking-by-detection with per-track class probability fusion", "trackfuse"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scenario as detection JSON-lines");
    add_scenario_options(synth_cmd, synth.scenario);
    synth_cmd->add_option("--output", synth.output, "Detection JSON-lines to write")->required();
    synth_cmd->add_option("--labels", synth.labels, "Label-set file to write")->required();

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Apply camera-trap burst triggering to a detection file");
    sim_cmd->add_option("--input", sim.input, "Detection JSON-lines file")->required()->check(CLI::ExistingFile);
    sim_cmd->add_option("--labels", sim.labels, "Label-set file")->required()->check(CLI::ExistingFile);
    sim_cmd->add_option("--output", sim.output, "Triggered detection JSON-lines to write")->required();
    sim_cmd->add_option("--config", sim.config, "Run configuration JSON")->check(CLI::ExistingFile);
    auto* fps_opt = sim_cmd->add_option("--fps", sim.fps, "Source frame rate")->capture_default_str();
    auto* burst_opt = sim_cmd->add_option("--burst", sim.burst, "Frames per burst")->capture_default_str();
    auto* cooldown_opt = sim_cmd->add_option("--cooldown", sim.cooldown, "Cool-down in seconds")->capture_default_str();
    sim_cmd->add_option("--total-frames", sim.total_frames, "Video length (default: last frame + 1)");

    TrackArgs track;
    CLI::Option* track_tracker_opt = nullptr;
    auto* track_cmd = app.add_subcommand("track", "Run a tracker and label fusion, write the track CSV");
    add_pipeline_options(track_cmd, track.pipe, track_tracker_opt);
    track_cmd->add_option("--output", track.output, "Track CSV to write")->required();

    EvalArgs eval;
    CLI::Option* eval_tracker_opt = nullptr;
    auto* eval_cmd = app.add_subcommand("eval", "Run the pipeline and report classification metrics");
    add_pipeline_options(eval_cmd, eval.pipe, eval_tracker_opt);
    eval_cmd->add_flag("--per-class", eval.per_class, "Print per-class precision, recall and F1");
    eval_cmd->add_flag("--flip-rate", eval.flip_rate, "Report raw and fused label flip rates");
    eval_cmd->add_flag("--exclude-unmatched", eval.exclude_unmatched, "Skip detections not assigned to a track");
    eval_cmd->add_option("--macro", eval.macro, "Classes entering the macro mean")
        ->check(CLI::IsMember({"all", "present"}))
        ->capture_default_str();
    eval_cmd->add_option("--json", eval.json, "Also write the metrics report as JSON");

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Time each pipeline stage per tracker");
    bench_cmd->add_option("--input", bench.input, "Detection JSON-lines (default: synthetic scenario)")
        ->check(CLI::ExistingFile);
    bench_cmd->add_option("--labels", bench.labels, "Label-set file (required with --input)")->check(CLI::ExistingFile);
    bench_cmd->add_option("--config", bench.config, "Run configuration JSON")->check(CLI::ExistingFile);
    bench_cmd->add_option("--tracker", bench.trackers, "Trackers to time (default: all)")
        ->check(CLI::IsMember(tracker_kind_names()));
    bench_cmd->add_option("--fusion", bench.fusion, "Label fusion mode")
        ->check(CLI::IsMember(kFusionNames))
        ->capture_default_str();
    bench_cmd->add_option("--repeat", bench.repeat, "Timed repetitions per tracker")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    bench_cmd->add_option("--json", bench.json, "Also write the timing profile as JSON");
    bench.scenario.num_frames = 500;
    add_scenario_options(bench_cmd, bench.scenario);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*synth_cmd) {
            const Scenario sc = generate_scenario(synth.scenario);
            write_detections(synth.output, {sc.sequence});
            write_labels(sc.labels, synth.labels);
            out << "wrote " << sc.sequence.detection_count() << " detections over " << synth.scenario.num_frames
                << " frames to " << synth.output << "\n";
        } else if (*sim_cmd) {
            RunConfig rc;
            if (!sim.config.empty()) rc = load_run_config(sim.config);
            if (fps_opt->count() || sim.config.empty()) rc.trigger.fps = sim.fps;
            if (burst_opt->count() || sim.config.empty()) rc.trigger.burst_len = sim.burst;
            if (cooldown_opt->count() || sim.config.empty()) rc.trigger.cooldown = sim.cooldown;
            rc.trigger.validate();
            const LabelSet labels = read_labels(sim.labels);
            const auto sequences = parse_detections(sim.input, labels);
            std::vector<Sequence> triggered;
            std::size_t kept = 0;
            for (const auto& seq : sequences) {
                triggered.push_back(apply_triggers(
                    seq, rc.trigger, sim.total_frames > 0 ? std::optional(sim.total_frames) : std::nullopt));
                kept += triggered.back().detection_count();
            }
            write_detections(sim.output, triggered);
            out << "kept " << kept << " detections on burst frames; wrote " << sim.output << "\n";
        } else if (*track_cmd) {
            const LabelSet labels = read_labels(track.pipe.labels);
            RunConfig rc;
            const auto results = run_pipeline(track.pipe, track_tracker_opt, labels, rc);
            write_tracks(track.output, results);
            std::size_t tracks = 0;
            for (const auto& r : results) tracks += r.tracks.size();
            out << "wrote " << tracks << " tracks to " << track.output << "\n";
        } else if (*eval_cmd) {
            const LabelSet labels = read_labels(eval.pipe.labels);
            RunConfig rc;
            const auto results = run_pipeline(eval.pipe, eval_tracker_opt, labels, rc);
            const MetricsReport report = build_report(results, labels, rc, eval, nullptr);
            out << metrics_text(report, eval.per_class);
            if (!eval.json.empty()) write_text(eval.json, metrics_json(report));
        } else if (*bench_cmd) {
            LabelSet labels;
            std::string jsonl;
            if (!bench.input.empty()) {
                if (bench.labels.empty()) throw CLI::RequiredError("--labels");
                labels = read_labels(bench.labels);
                std::ifstream in(bench.input, std::ios::binary);
                std::stringstream ss;
                ss << in.rdbuf();
                jsonl = ss.str();
            } else {
                const Scenario sc = generate_scenario(bench.scenario);
                labels = sc.labels;
                std::ostringstream ss;
                write_detections(ss, {sc.sequence});
                jsonl = ss.str();
            }
            if (bench.trackers.empty()) bench.trackers = tracker_kind_names();
            const FusionMode mode = *parse_fusion_mode(bench.fusion);
            EvalArgs metric_args;
            metric_args.pipe.fusion = bench.fusion;

            std::vector<std::pair<std::string, TimingProfile>> rows;
            for (const auto& name : bench.trackers) {
                RunConfig rc;
                if (!bench.config.empty()) rc = load_run_config(bench.config);
                rc.tracker.kind = *parse_tracker_kind(name);
                if (rc.tracker.motion && (rc.tracker.motion->model == MotionModel::CentroidCV4) !=
                                             (rc.tracker.kind == TrackerKind::CentroidKF)) {
                    rc.tracker.motion.reset();
                }
                rc.tracker.validate();
                Profiler profiler;
                for (int rep = 0; rep < bench.repeat; ++rep) {
                    std::istringstream in(jsonl);
                    const auto sequences = parse_detections(in, labels, &profiler);
                    // Single-threaded so stage times are not blurred by scheduling.
                    const auto results = track_and_fuse(sequences, rc.tracker, mode, {}, 1, &profiler);
                    build_report(results, labels, rc, metric_args, &profiler);
                }
                rows.emplace_back(name, profiler.profile());
            }
            out << format_timing_table(rows);
            if (!bench.json.empty()) write_text(bench.json, timing_json(rows));
        }
    } catch (const CLI::Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.code() == ErrorCode::InvalidConfig ? kExitUsage : kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}

}  // namespace trackfuse::cli
