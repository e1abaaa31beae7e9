#include "trackfuse/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

namespace trackfuse {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void schema_error(std::size_t line, const std::string& what) {
    throw Error(ErrorCode::SchemaError, "line " + std::to_string(line) + ": " + what);
}

double number_field(const json& rec, const char* key, std::size_t line) {
    auto it = rec.find(key);
    if (it == rec.end()) schema_error(line, std::string("missing field '") + key + "'");
    if (!it->is_number()) schema_error(line, std::string("field '") + key + "' must be a number");
    return it->get<double>();
}

std::int64_t integer_field(const json& value, const char* key, std::size_t line) {
    if (!value.is_number_integer()) schema_error(line, std::string("field '") + key + "' must be an integer");
    return value.get<std::int64_t>();
}

std::vector<double> number_array(const json& value, const char* key, std::size_t line) {
    if (!value.is_array()) schema_error(line, std::string("field '") + key + "' must be an array");
    std::vector<double> out;
    out.reserve(value.size());
    for (const auto& v : value) {
        if (!v.is_number()) schema_error(line, std::string("field '") + key + "' must hold numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

struct ParsedRecord {
    std::string seq;
    Detection det;
};

ParsedRecord parse_record(const std::string& text, std::size_t line, const LabelSet& labels, Profiler* profiler) {
    ParsedRecord out;
    std::vector<double> probs;
    {
        Profiler::Scope scope(profiler, Stage::DetectionIngest);
        json rec;
        try {
            rec = json::parse(text);
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + e.what());
        }
        if (!rec.is_object()) schema_error(line, "record must be a JSON object");

        auto seq = rec.find("seq");
        if (seq == rec.end() || !seq->is_string()) schema_error(line, "field 'seq' must be a string");
        out.seq = seq->get<std::string>();

        auto frame = rec.find("frame");
        if (frame == rec.end()) schema_error(line, "missing field 'frame'");
        out.det.frame_id = integer_field(*frame, "frame", line);
        if (out.det.frame_id < 0) schema_error(line, "field 'frame' must be non-negative");

        auto bbox = rec.find("bbox");
        if (bbox == rec.end()) schema_error(line, "missing field 'bbox'");
        const auto corners = number_array(*bbox, "bbox", line);
        if (corners.size() != 4) schema_error(line, "field 'bbox' must have 4 entries");
        out.det.bbox = BoundingBox{corners[0], corners[1], corners[2], corners[3]};
        if (!out.det.bbox.valid()) schema_error(line, "bbox needs x2 > x1, y2 > y1 and finite corners");

        out.det.score = number_field(rec, "score", line);
        if (!(out.det.score >= 0.0 && out.det.score <= 1.0)) schema_error(line, "score must lie in [0, 1]");

        auto p = rec.find("probs");
        if (p == rec.end()) schema_error(line, "missing field 'probs'");
        probs = number_array(*p, "probs", line);
        if (probs.size() != labels.size()) {
            schema_error(line, "probs has " + std::to_string(probs.size()) + " entries but the label set has " +
                                   std::to_string(labels.size()));
        }

        if (auto e = rec.find("embedding"); e != rec.end() && !e->is_null()) {
            out.det.embedding = number_array(*e, "embedding", line);
        }
        if (auto g = rec.find("gt_class"); g != rec.end() && !g->is_null()) {
            if (g->is_string()) {
                const auto idx = labels.index_of(g->get<std::string>());
                if (!idx) schema_error(line, "gt_class '" + g->get<std::string>() + "' is not in the label set");
                out.det.gt_class = *idx;
            } else {
                const auto v = integer_field(*g, "gt_class", line);
                if (v < 0 || static_cast<std::size_t>(v) >= labels.size()) schema_error(line, "gt_class out of range");
                out.det.gt_class = static_cast<ClassIndex>(v);
            }
        }
        if (auto g = rec.find("gt_track"); g != rec.end() && !g->is_null()) {
            out.det.gt_track = integer_field(*g, "gt_track", line);
        }
        if (auto b = rec.find("burst"); b != rec.end() && !b->is_null()) {
            out.det.burst = integer_field(*b, "burst", line);
        }
    }
    Profiler::Scope scope(profiler, Stage::ClassificationIngest);
    try {
        out.det.dist = validate_distribution(probs, labels.size());
    } catch (const Error& e) {
        schema_error(line, e.what());
    }
    return out;
}

}  // namespace

LabelSet read_labels(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        const std::string name = trim(line);
        if (!name.empty()) names.push_back(name);
    }
    if (names.empty()) throw Error(ErrorCode::EmptyFile, "label file '" + path.string() + "' is empty");
    return LabelSet(std::move(names));
}

void write_labels(const LabelSet& labels, const std::filesystem::path& path) {
    auto out = open_out(path);
    for (const auto& n : labels.names()) out << n << '\n';
    finish(out, path);
}

std::vector<Sequence> parse_detections(std::istream& in, const LabelSet& labels, Profiler* profiler) {
    std::map<std::string, std::map<FrameId, std::vector<Detection>>> grouped;
    std::string text;
    std::size_t line = 0;
    std::size_t records = 0;
    while (std::getline(in, text)) {
        ++line;
        if (is_blank(text)) continue;
        ParsedRecord rec = parse_record(text, line, labels, profiler);
        grouped[rec.seq][rec.det.frame_id].push_back(std::move(rec.det));
        ++records;
    }
    if (records == 0) throw Error(ErrorCode::EmptyFile, "no detection records");

    std::vector<Sequence> out;
    for (auto& [name, frames] : grouped) {
        Sequence seq;
        seq.name = name;
        for (auto& [fid, dets] : frames) seq.frames.push_back({fid, std::move(dets)});
        check_embedding_consistency(seq);
        out.push_back(std::move(seq));
    }
    return out;
}

std::vector<Sequence> parse_detections(const std::filesystem::path& path, const LabelSet& labels,
                                       Profiler* profiler) {
    auto in = open_in(path);
    return parse_detections(in, labels, profiler);
}

void write_detections(std::ostream& out, const std::vector<Sequence>& sequences) {
    for (const auto& seq : sequences) {
        for (const auto& frame : seq.frames) {
            for (const auto& d : frame.detections) {
                ordered_json rec;
                rec["seq"] = seq.name;
                rec["frame"] = d.frame_id;
                rec["bbox"] = {d.bbox.x1, d.bbox.y1, d.bbox.x2, d.bbox.y2};
                rec["score"] = d.score;
                rec["probs"] = std::vector<double>(d.dist.probs().begin(), d.dist.probs().end());
                if (d.embedding) rec["embedding"] = *d.embedding;
                if (d.gt_class) rec["gt_class"] = *d.gt_class;
                if (d.gt_track) rec["gt_track"] = *d.gt_track;
                if (d.burst) rec["burst"] = *d.burst;
                out << rec.dump() << '\n';
            }
        }
    }
}

void write_detections(const std::filesystem::path& path, const std::vector<Sequence>& sequences) {
    auto out = open_out(path);
    write_detections(out, sequences);
    finish(out, path);
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::vector<TrackRow> track_rows(const std::vector<SequenceResult>& results) {
    std::vector<TrackRow> rows;
    for (const auto& r : results) {
        for (const auto& fa : r.per_frame) {
            TrackRow row;
            row.frame = fa.frame_id;
            row.track_id = fa.track_id.value_or(-1);
            row.x = fa.bbox.x1;
            row.y = fa.bbox.y1;
            row.w = fa.bbox.x2 - fa.bbox.x1;
            row.h = fa.bbox.y2 - fa.bbox.y1;
            row.score = fa.score;
            row.fused_class = fa.fused_label;
            row.raw_class = fa.raw_label;
            row.seq = r.seq;
            rows.push_back(std::move(row));
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const TrackRow& a, const TrackRow& b) {
        if (a.seq != b.seq) return a.seq < b.seq;
        if (a.frame != b.frame) return a.frame < b.frame;
        return a.track_id < b.track_id;
    });
    return rows;
}

void write_tracks(std::ostream& out, const std::vector<SequenceResult>& results) {
    out << kTrackCsvHeader << '\n';
    for (const auto& row : track_rows(results)) {
        out << row.frame << ',' << row.track_id << ',' << format_double(row.x) << ',' << format_double(row.y)
            << ',' << format_double(row.w) << ',' << format_double(row.h) << ',' << format_double(row.score)
            << ',' << row.fused_class << ',' << row.raw_class << ',' << row.seq << '\n';
    }
}

void write_tracks(const std::filesystem::path& path, const std::vector<SequenceResult>& results) {
    auto out = open_out(path);
    write_tracks(out, results);
    finish(out, path);
}

namespace {

template <typename T>
T parse_number(const std::string& field, std::size_t line, const char* column) {
    T value{};
    auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line) + ": bad value '" + field + "' in column " + column);
    }
    return value;
}

}  // namespace

std::vector<TrackRow> read_tracks(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string text;
    if (!std::getline(in, text)) throw Error(ErrorCode::EmptyFile, "'" + path.string() + "' is empty");
    if (trim(text) != kTrackCsvHeader) throw Error(ErrorCode::ParseError, "line 1: unexpected header");
    std::vector<TrackRow> rows;
    std::size_t line = 1;
    while (std::getline(in, text)) {
        ++line;
        if (is_blank(text)) continue;
        std::vector<std::string> f;
        std::stringstream ss(text);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 10) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": expected 10 columns");
        }
        TrackRow r;
        r.frame = parse_number<FrameId>(f[0], line, "frame");
        r.track_id = parse_number<TrackId>(f[1], line, "track_id");
        r.x = parse_number<double>(f[2], line, "x");
        r.y = parse_number<double>(f[3], line, "y");
        r.w = parse_number<double>(f[4], line, "w");
        r.h = parse_number<double>(f[5], line, "h");
        r.score = parse_number<double>(f[6], line, "score");
        r.fused_class = parse_number<ClassIndex>(f[7], line, "fused_class");
        r.raw_class = parse_number<ClassIndex>(f[8], line, "raw_class");
        r.seq = trim(f[9]);
        rows.push_back(std::move(r));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Run configuration

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

template <typename T>
void read_into(const json& obj, const char* key, T& target) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    try {
        target = it->get<T>();
    } catch (const json::exception&) {
        config_error(std::string("config field '") + key + "' has the wrong type");
    }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const bool ok = std::any_of(known.begin(), known.end(), [&](const char* k) { return it.key() == k; });
        if (!ok) config_error("unknown config field '" + where + it.key() + "'");
    }
}

MotionModelSpec parse_motion(const json& obj, MotionModelSpec spec) {
    if (!obj.is_object()) config_error("'tracker.motion' must be an object");
    reject_unknown(obj, {"model", "position_weight", "velocity_weight", "centroid_process_std",
                         "centroid_measurement_std", "process_scale", "measurement_scale"},
                   "tracker.motion.");
    if (auto it = obj.find("model"); it != obj.end()) {
        const auto name = it->is_string() ? it->get<std::string>() : std::string();
        if (name == "sort-cv7") {
            spec.model = MotionModel::SortCV7;
        } else if (name == "centroid-cv4") {
            spec.model = MotionModel::CentroidCV4;
        } else {
            config_error("tracker.motion.model must be 'sort-cv7' or 'centroid-cv4'");
        }
    }
    read_into(obj, "position_weight", spec.position_weight);
    read_into(obj, "velocity_weight", spec.velocity_weight);
    read_into(obj, "centroid_process_std", spec.centroid_process_std);
    read_into(obj, "centroid_measurement_std", spec.centroid_measurement_std);
    read_into(obj, "process_scale", spec.process_scale);
    read_into(obj, "measurement_scale", spec.measurement_scale);
    return spec;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text, RunConfig base) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        config_error(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) config_error("config must be a JSON object");
    reject_unknown(root, {"tracker", "trigger"}, "");

    if (auto t = root.find("tracker"); t != root.end()) {
        if (!t->is_object()) config_error("'tracker' must be an object");
        reject_unknown(*t, {"kind", "iou_gate", "centroid_gate", "appearance_gate", "det_threshold_high",
                            "det_threshold_low", "min_hits", "max_age", "appearance_weight",
                            "embedding_momentum", "track_across_bursts", "motion"},
                       "tracker.");
        auto& tc = base.tracker;
        if (auto k = t->find("kind"); k != t->end()) {
            const auto kind = k->is_string() ? parse_tracker_kind(k->get<std::string>()) : std::nullopt;
            if (!kind) config_error("tracker.kind is not a known tracker");
            tc.kind = *kind;
        }
        read_into(*t, "iou_gate", tc.iou_gate);
        read_into(*t, "centroid_gate", tc.centroid_gate);
        read_into(*t, "appearance_gate", tc.appearance_gate);
        read_into(*t, "det_threshold_high", tc.det_threshold_high);
        read_into(*t, "det_threshold_low", tc.det_threshold_low);
        read_into(*t, "min_hits", tc.min_hits);
        read_into(*t, "max_age", tc.max_age);
        read_into(*t, "appearance_weight", tc.appearance_weight);
        read_into(*t, "embedding_momentum", tc.embedding_momentum);
        read_into(*t, "track_across_bursts", tc.track_across_bursts);
        if (auto m = t->find("motion"); m != t->end()) tc.motion = parse_motion(*m, tc.motion_spec());
    }
    if (auto g = root.find("trigger"); g != root.end()) {
        if (!g->is_object()) config_error("'trigger' must be an object");
        reject_unknown(*g, {"fps", "burst_len", "cooldown"}, "trigger.");
        read_into(*g, "fps", base.trigger.fps);
        read_into(*g, "burst_len", base.trigger.burst_len);
        read_into(*g, "cooldown", base.trigger.cooldown);
    }
    return base;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
    auto in = open_in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), std::move(base));
}

// ---------------------------------------------------------------------------
// Reports

namespace {

ordered_json f1_json(const F1Scores& f1, const std::vector<std::string>& labels) {
    ordered_json out;
    out["macro_f1"] = f1.macro;
    out["weighted_f1"] = f1.weighted;
    ordered_json per = ordered_json::array();
    for (std::size_t c = 0; c < f1.per_class.size(); ++c) {
        ordered_json row;
        row["class"] = c < labels.size() ? labels[c] : std::to_string(c);
        row["precision"] = f1.precision[c];
        row["recall"] = f1.recall[c];
        row["f1"] = f1.per_class[c];
        per.push_back(std::move(row));
    }
    out["per_class"] = std::move(per);
    return out;
}

}  // namespace

std::string metrics_json(const MetricsReport& r) {
    ordered_json out;
    out["tracker"] = r.tracker;
    out["fusion"] = r.fusion;
    out["evaluated"] = r.evaluated;
    ordered_json raw = f1_json(r.raw_f1, r.labels);
    raw["accuracy_at_1"] = r.raw_accuracy;
    ordered_json fused = f1_json(r.f1, r.labels);
    fused["accuracy_at_1"] = r.accuracy;
    out["classifier"] = std::move(raw);
    out["augmented"] = std::move(fused);
    if (r.raw_flip_rate) out["raw_flip_rate"] = *r.raw_flip_rate;
    if (r.fused_flip_rate) out["fused_flip_rate"] = *r.fused_flip_rate;
    return out.dump(2) + "\n";
}

std::string metrics_text(const MetricsReport& r, bool per_class) {
    std::ostringstream os;
    os << "tracker: " << r.tracker << "  fusion: " << r.fusion << "  evaluated detections: " << r.evaluated
       << "\n\n";
    os << std::fixed << std::setprecision(2);
    os << std::left << std::setw(14) << "Method" << std::right << std::setw(10) << "Acc@1" << std::setw(10)
       << "F1-M" << std::setw(10) << "F1-W" << "\n";
    os << std::left << std::setw(14) << "Classifier" << std::right << std::setw(10) << 100.0 * r.raw_accuracy
       << std::setw(10) << 100.0 * r.raw_f1.macro << std::setw(10) << 100.0 * r.raw_f1.weighted << "\n";
    os << std::left << std::setw(14) << "Augmented" << std::right << std::setw(10) << 100.0 * r.accuracy
       << std::setw(10) << 100.0 * r.f1.macro << std::setw(10) << 100.0 * r.f1.weighted << "\n";
    if (r.raw_flip_rate || r.fused_flip_rate) {
        os << "\n" << std::setprecision(4);
        if (r.raw_flip_rate) os << "raw label flip rate:   " << *r.raw_flip_rate << "\n";
        if (r.fused_flip_rate) os << "fused label flip rate: " << *r.fused_flip_rate << "\n";
    }
    if (per_class) {
        os << "\n" << std::setprecision(2);
        os << std::left << std::setw(20) << "Class" << std::right << std::setw(10) << "P" << std::setw(10) << "R"
           << std::setw(10) << "F1" << "\n";
        for (std::size_t c = 0; c < r.f1.per_class.size(); ++c) {
            const std::string name = c < r.labels.size() ? r.labels[c] : std::to_string(c);
            os << std::left << std::setw(20) << name << std::right << std::setw(10) << 100.0 * r.f1.precision[c]
               << std::setw(10) << 100.0 * r.f1.recall[c] << std::setw(10) << 100.0 * r.f1.per_class[c] << "\n";
        }
    }
    return os.str();
}

std::string timing_json(const std::vector<std::pair<std::string, TimingProfile>>& rows) {
    ordered_json out = ordered_json::array();
    for (const auto& [name, p] : rows) {
        ordered_json row;
        row["method"] = name;
        row["samples"] = p.samples;
        row["total_ms_per_sample"] = p.total_mean_ms();
        ordered_json stages;
        for (std::size_t i = 0; i < kStageCount; ++i) {
            ordered_json st;
            st["total_ms"] = p.stages[i].total_ms;
            st["mean_ms"] = p.stages[i].mean_ms;
            st["brackets"] = p.stages[i].brackets;
            stages[std::string(to_string(static_cast<Stage>(i)))] = std::move(st);
        }
        row["stages"] = std::move(stages);
        out.push_back(std::move(row));
    }
    return out.dump(2) + "\n";
}

}  // namespace trackfuse
