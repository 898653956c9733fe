#include "vsd/cli.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"

#include "vsd/blood.hpp"
#include "vsd/concepts.hpp"
#include "vsd/core.hpp"
#include "vsd/dataset.hpp"
#include "vsd/eval.hpp"
#include "vsd/fusion.hpp"
#include "vsd/image.hpp"
#include "vsd/motion.hpp"
#include "vsd/svm.hpp"

namespace vsd::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string window_name(audio::WindowFunction w) {
    return w == audio::WindowFunction::Hann ? "hann" : "rectangular";
}

audio::WindowFunction window_from_name(const std::string& name) {
    if (name == "hann") return audio::WindowFunction::Hann;
    if (name == "rectangular") return audio::WindowFunction::Rectangular;
    throw FormatError("config: unknown window \"" + name + "\"");
}

}  // namespace

std::string PipelineConfig::canonical_json() const {
    json j;
    j["fps"] = fps;
    j["blood_threshold"] = blood_threshold;
    j["grid_step"] = grid_step;
    j["seed"] = seed;
    j["workers"] = workers;
    j["train_samples"] = train_samples;
    j["test_samples"] = test_samples;
    j["svm_tolerance"] = svm_tolerance;
    j["svm_max_passes"] = svm_max_passes;
    j["mfcc"] = {{"n_coeffs", mfcc.n_coeffs},
                 {"n_mel_filters", mfcc.n_mel_filters},
                 {"include_c0", mfcc.include_c0},
                 {"log_floor", mfcc.log_floor},
                 {"window", window_name(mfcc.window)}};
    return j.dump();
}

std::string PipelineConfig::hash() const {
    // FNV-1a 64
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : canonical_json()) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw FormatError(path + ": cannot open config");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw FormatError(path + ": " + e.what());
    }
    PipelineConfig cfg;
    try {
        cfg.fps = j.value("fps", cfg.fps);
        cfg.blood_threshold = j.value("blood_threshold", cfg.blood_threshold);
        cfg.grid_step = j.value("grid_step", cfg.grid_step);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.workers = j.value("workers", cfg.workers);
        cfg.train_samples = j.value("train_samples", cfg.train_samples);
        cfg.test_samples = j.value("test_samples", cfg.test_samples);
        cfg.svm_tolerance = j.value("svm_tolerance", cfg.svm_tolerance);
        cfg.svm_max_passes = j.value("svm_max_passes", cfg.svm_max_passes);
        if (j.contains("mfcc")) {
            const json& m = j.at("mfcc");
            cfg.mfcc.n_coeffs = m.value("n_coeffs", cfg.mfcc.n_coeffs);
            cfg.mfcc.n_mel_filters = m.value("n_mel_filters", cfg.mfcc.n_mel_filters);
            cfg.mfcc.include_c0 = m.value("include_c0", cfg.mfcc.include_c0);
            cfg.mfcc.log_floor = m.value("log_floor", cfg.mfcc.log_floor);
            if (m.contains("window"))
                cfg.mfcc.window = window_from_name(m.at("window").get<std::string>());
        }
    } catch (const json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    if (!(cfg.fps > 0.0) || cfg.workers < 1)
        throw FormatError(path + ": invalid fps or workers");
    return cfg;
}

namespace {

std::string timestamp_utc() {
    const std::time_t now = std::chrono::system_clock::to_time_t(
        std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json meta_object(const PipelineConfig& cfg, bool with_timestamp) {
    json meta;
    meta["config_hash"] = cfg.hash();
    meta["seed"] = cfg.seed;
    if (with_timestamp) meta["created"] = timestamp_utc();
    return meta;
}

std::vector<std::string> sorted_ppm_paths(const std::string& dir) {
    std::vector<std::string> paths;
    if (!fs::is_directory(dir))
        throw DataError(dir + ": not a directory");
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".ppm")
            paths.push_back(entry.path().string());
    std::sort(paths.begin(), paths.end());
    return paths;
}

std::string frame_path(const std::string& frames_dir, long frame_idx) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%06ld.ppm", frame_idx);
    return (fs::path(frames_dir) / buf).string();
}

constexpr std::array<const char*, kNumChannels> kClassifierFiles = {
    "classifier_audio.json",
    "classifier_blood.json",
    "classifier_motion.json",
    "classifier_concepts.json",
};

std::array<svm::TrainedClassifier, kNumChannels> load_classifiers(
    const std::string& models_dir) {
    std::array<svm::TrainedClassifier, kNumChannels> out;
    for (int c = 0; c < kNumChannels; ++c) {
        const std::string path = (fs::path(models_dir) / kClassifierFiles[c]).string();
        out[c] = svm::load_classifier(path);
        if (out[c].channel != static_cast<FeatureChannel>(c))
            throw FormatError(path + ": channel tag does not match file name");
    }
    return out;
}

fusion::ChannelScores score_row(const dataset::TableRow& row,
                                const std::array<svm::TrainedClassifier, kNumChannels>& clfs) {
    fusion::ChannelScores scores;
    for (int c = 0; c < kNumChannels; ++c) {
        const auto it = row.features.find(static_cast<FeatureChannel>(c));
        if (it == row.features.end()) continue;
        scores.score[c] = svm::predict_proba(clfs[c], it->second);
    }
    return scores;
}

// ---------------------------------------------------------------- build-blood-model

struct BuildBloodArgs {
    std::string blood_dir, nonblood_dir, out_blood, out_nonblood, extend_dir;
    double accept_threshold = 0.9;
};

int cmd_build_blood_model(const BuildBloodArgs& args, const PipelineConfig& cfg) {
    const auto blood_paths = sorted_ppm_paths(args.blood_dir);
    const auto nonblood_paths = sorted_ppm_paths(args.nonblood_dir);
    if (blood_paths.empty())
        throw DataError(args.blood_dir + ": empty corpus, no PPM images");
    if (nonblood_paths.empty())
        throw DataError(args.nonblood_dir + ": empty corpus, no PPM images");

    blood::ColorModel3D blood_model = blood::build_model_from_images(blood_paths);
    const blood::ColorModel3D nonblood_model =
        blood::build_model_from_images(nonblood_paths);
    if (blood_model.total() == 0 || nonblood_model.total() == 0)
        throw DataError("blood model build: corpus produced no pixels");

    if (!args.extend_dir.empty()) {
        const auto extend_paths = sorted_ppm_paths(args.extend_dir);
        blood_model = blood::extend_model(blood_model, blood_model, nonblood_model,
                                          extend_paths, args.accept_threshold);
    }
    blood_model.save(args.out_blood);
    nonblood_model.save(args.out_nonblood);

    json summary;
    summary["blood_total"] = blood_model.total();
    summary["nonblood_total"] = nonblood_model.total();
    summary["meta"] = meta_object(cfg, false);
    std::cout << summary.dump(2) << '\n';
    return kExitOk;
}

// ------------------------------------------------------------------------- extract

struct ExtractArgs {
    std::string video_id, frames_dir, wav, sidecar, concepts, annotations;
    std::string blood_model, nonblood_model, out;
    long frame_count = 0;
    int frame_w = 0, frame_h = 0;
};

int cmd_extract(const ExtractArgs& args, const PipelineConfig& cfg) {
    const std::vector<Segment> segments =
        segmentize(args.frame_count, cfg.fps, args.video_id);

    // audio channel
    std::vector<FeatureVector> mfcc_frames;
    bool audio_available = false;
    if (!args.wav.empty()) {
        try {
            const audio::AudioTrack track = audio::read_wav(args.wav);
            mfcc_frames = audio::mfcc_track(track, cfg.fps, cfg.mfcc);
            audio_available = true;
        } catch (const Error& e) {
            warn(std::string("audio channel unavailable: ") + e.what());
        }
    } else {
        warn("no --wav given, audio channel missing");
    }

    // blood channel
    std::optional<blood::ColorModel3D> blood_model, nonblood_model;
    if (!args.blood_model.empty() && !args.nonblood_model.empty()) {
        blood_model = blood::ColorModel3D::load(args.blood_model);
        nonblood_model = blood::ColorModel3D::load(args.nonblood_model);
    } else {
        warn("blood models not given, blood channel missing");
    }

    // motion channel
    std::optional<motion::SidecarMap> sidecar;
    if (!args.sidecar.empty()) {
        sidecar = motion::parse_sidecar(args.sidecar);
    } else {
        warn("no --sidecar given, motion channel missing");
    }

    // concepts channel
    std::optional<concepts::ConceptMap> concept_map;
    if (!args.concepts.empty()) {
        concept_map = concepts::load_concepts(args.concepts);
    } else {
        warn("no --concepts given, concepts channel missing");
    }

    std::vector<Annotation> annotations;
    if (!args.annotations.empty())
        annotations = dataset::parse_annotations(args.annotations);
    const auto class_labels = label_segments(segments, annotations);
    const auto binary_labels = label_segments_binary(segments, annotations);

    int frame_w = args.frame_w, frame_h = args.frame_h;
    if (frame_w == 0 && !args.frames_dir.empty() && !segments.empty()) {
        // motion needs frame dimensions even when the blood channel is off
        try {
            const Image probe =
                read_ppm(frame_path(args.frames_dir, segments.front().start_frame));
            frame_w = probe.width;
            frame_h = probe.height;
        } catch (const Error&) {
        }
    }

    dataset::FeatureTable rows;
    rows.reserve(segments.size());
    for (std::size_t si = 0; si < segments.size(); ++si) {
        const Segment& seg = segments[si];
        dataset::TableRow row;
        row.video_id = seg.video_id;
        row.index = seg.index;
        row.start_frame = seg.start_frame;
        row.end_frame = seg.end_frame;
        row.classes = class_labels[si].second;
        row.violent = binary_labels[si];

        if (audio_available) {
            try {
                row.features[FeatureChannel::Audio] =
                    audio::segment_audio_feature(mfcc_frames, seg).values();
            } catch (const std::exception& e) {
                warn("segment " + std::to_string(seg.index) + ": audio missing: " + e.what());
            }
        }
        if (blood_model && !args.frames_dir.empty()) {
            const std::string path = frame_path(args.frames_dir, seg.start_frame);
            try {
                const Image frame = read_ppm(path);
                if (frame_w == 0) {
                    frame_w = frame.width;
                    frame_h = frame.height;
                }
                row.features[FeatureChannel::Blood] =
                    blood::blood_feature(frame, *blood_model, *nonblood_model,
                                         cfg.blood_threshold)
                        .values();
            } catch (const Error& e) {
                warn("segment " + std::to_string(seg.index) + ": blood missing: " + e.what());
            }
        }
        if (sidecar) {
            if (frame_w > 0 && frame_h > 0) {
                row.features[FeatureChannel::Motion] =
                    motion::segment_motion_feature(*sidecar, seg, frame_w, frame_h).values();
            } else {
                warn("segment " + std::to_string(seg.index) +
                     ": motion missing: unknown frame dimensions (give --frame-width/"
                     "--frame-height or a readable frame)");
            }
        }
        if (concept_map) {
            try {
                row.features[FeatureChannel::Concepts] =
                    concepts::segment_concept_feature(*concept_map, seg).values();
            } catch (const Error& e) {
                warn("segment " + std::to_string(seg.index) +
                     ": concepts missing: " + e.what());
            }
        }
        rows.push_back(std::move(row));
    }

    std::ofstream out(args.out);
    if (!out)
        throw FormatError(args.out + ": cannot open for writing");
    json header;
    header["type"] = "vsd-feature-table";
    header["version"] = 1;
    header["meta"] = meta_object(cfg, true);
    out << header.dump() << '\n';
    dataset::append_table_rows(out, rows);
    if (!out)
        throw FormatError(args.out + ": write failed");

    const bool all_incomplete =
        !rows.empty() && std::none_of(rows.begin(), rows.end(),
                                      [](const dataset::TableRow& r) { return r.complete(); });
    if (all_incomplete) {
        warn("every extracted row is incomplete");
        return kExitData;
    }
    return kExitOk;
}

// --------------------------------------------------------------------------- train

struct TrainArgs {
    std::string table, split, out_dir;
};

json grid_cell_json(const svm::GridCellResult& cell) {
    json j;
    j["kernel"] = svm::kernel_name(cell.cell.kernel);
    if (const auto* rbf = std::get_if<svm::RbfKernel>(&cell.cell.kernel))
        j["gamma"] = rbf->gamma;
    if (const auto* chi = std::get_if<svm::ChiSquareKernel>(&cell.cell.kernel))
        j["gamma"] = chi->gamma;
    j["c"] = cell.cell.c;
    j["validation_eer"] = cell.validation_eer;
    j["failed"] = cell.failed;
    if (cell.failed) j["error"] = cell.error;
    return j;
}

int cmd_train(const TrainArgs& args, const PipelineConfig& cfg) {
    const dataset::FeatureTable table = dataset::load_table(args.table);
    const dataset::SplitSpec split = dataset::load_split(args.split);
    bool any_pos = false, any_neg = false;
    for (const dataset::TableRow& row : table)
        (row.violent ? any_pos : any_neg) = true;
    if (!any_pos || !any_neg)
        throw DegenerateTrainingError("train: the table holds a single class only");
    const auto [train_set, validation_set] = dataset::balanced_sample(
        table, split, cfg.train_samples, cfg.test_samples, cfg.seed);

    fs::create_directories(args.out_dir);
    json report;
    report["meta"] = meta_object(cfg, false);
    report["train_size"] = train_set.entries.size();
    report["validation_size"] = validation_set.entries.size();

    for (int c = 0; c < kNumChannels; ++c) {
        const auto channel = static_cast<FeatureChannel>(c);
        std::vector<FeatureVector> train_x, val_x;
        std::vector<int> train_y, val_y;
        bool non_negative = true;
        auto collect = [&](const dataset::FeatureTable& entries,
                           std::vector<FeatureVector>& xs, std::vector<int>& ys) {
            for (const dataset::TableRow& row : entries) {
                const auto& values = row.features.at(channel);
                for (double v : values) non_negative = non_negative && v >= 0.0;
                xs.emplace_back(channel, values);
                ys.push_back(row.violent ? 1 : -1);
            }
        };
        collect(train_set.entries, train_x, train_y);
        collect(validation_set.entries, val_x, val_y);

        // chi-square is undefined on negative inputs, so e.g. the audio
        // channel (MFCCs go negative) never pairs with it
        const bool allow_chi2 = non_negative;
        const auto grid = svm::default_grid(train_x.front().dim(), allow_chi2);
        svm::TrainConfig train_cfg;
        train_cfg.tolerance = cfg.svm_tolerance;
        train_cfg.max_passes = cfg.svm_max_passes;
        train_cfg.seed = cfg.seed;
        auto [clf, grid_report] = svm::kernel_grid_search(train_x, train_y, val_x, val_y,
                                                          grid, train_cfg, cfg.workers);

        const std::string out_path =
            (fs::path(args.out_dir) / kClassifierFiles[c]).string();
        svm::save_classifier(out_path, clf, meta_object(cfg, false).dump());

        json channel_report;
        channel_report["selected"] = grid_cell_json(grid_report.cells[grid_report.selected]);
        channel_report["chi_square_allowed"] = allow_chi2;
        json cells = json::array();
        for (const auto& cell : grid_report.cells) cells.push_back(grid_cell_json(cell));
        channel_report["cells"] = cells;
        report["channels"][channel_token(channel)] = channel_report;
    }

    const std::string report_path = (fs::path(args.out_dir) / "train_report.json").string();
    std::ofstream out(report_path);
    if (!out)
        throw FormatError(report_path + ": cannot open for writing");
    out << report.dump(2) << '\n';
    std::cout << "trained 4 classifiers into " << args.out_dir << "\n";
    return kExitOk;
}

// --------------------------------------------------------------------- fuse-search

struct FuseSearchArgs {
    std::string table, models_dir, out, dataset_id;
    double step = 0.0;  // 0 = use config
};

int cmd_fuse_search(const FuseSearchArgs& args, const PipelineConfig& cfg) {
    const dataset::FeatureTable table = dataset::load_table(args.table);
    const auto classifiers = load_classifiers(args.models_dir);
    const double step = args.step > 0.0 ? args.step : cfg.grid_step;

    std::vector<fusion::ValidationEntry> entries;
    std::size_t skipped = 0;
    for (const dataset::TableRow& row : table) {
        if (!row.complete()) {
            ++skipped;
            continue;
        }
        fusion::ValidationEntry entry;
        entry.scores = score_row(row, classifiers);
        for (int ci = 0; ci < kNumViolenceClasses; ++ci)
            entry.truth[ci] = row.classes.count(static_cast<ViolenceClass>(ci)) > 0;
        entries.push_back(std::move(entry));
    }
    if (skipped > 0)
        warn("fuse-search: skipped " + std::to_string(skipped) + " incomplete row(s)");
    if (entries.empty())
        throw DataError("fuse-search: no complete rows in table");

    const fusion::WeightSearchResult result =
        fusion::weight_search(entries, step, cfg.workers);

    json provenance = meta_object(cfg, false);
    provenance["dataset_id"] =
        args.dataset_id.empty() ? fs::path(args.table).filename().string()
                                : args.dataset_id;
    fusion::save_weights(args.out, result.weights, provenance.dump());

    json report;
    report["step"] = step;
    report["segments"] = entries.size();
    for (const auto& rep : result.report) {
        json r;
        r["skipped"] = rep.skipped;
        if (!rep.skipped) {
            r["eer"] = rep.eer;
            r["tuples_evaluated"] = rep.tuples_evaluated;
        }
        report["classes"][class_token(rep.violence_class)] = r;
    }
    std::cout << report.dump(2) << '\n';
    return kExitOk;
}

// ------------------------------------------------------------------------- predict

struct PredictArgs {
    std::string table, models_dir, weights, out;
};

int cmd_predict(const PredictArgs& args, const PipelineConfig& cfg) {
    const dataset::FeatureTable table = dataset::load_table(args.table);
    const auto classifiers = load_classifiers(args.models_dir);
    const fusion::FusionWeights weights = fusion::load_weights(args.weights);

    std::ofstream out(args.out);
    if (!out)
        throw FormatError(args.out + ": cannot open for writing");
    json header;
    header["type"] = "vsd-predictions";
    header["version"] = 1;
    header["meta"] = meta_object(cfg, true);
    out << header.dump() << '\n';

    std::size_t skipped = 0;
    for (const dataset::TableRow& row : table) {
        if (!row.complete()) {
            ++skipped;
            continue;
        }
        const fusion::ChannelScores scores = score_row(row, classifiers);
        const ClassScores class_scores = fusion::decide_multiclass(scores, weights).second;
        Segment seg{row.video_id, row.index, row.start_frame, row.end_frame};
        const SegmentScoreRecord rec = make_score_record(std::move(seg), class_scores);

        json j;
        j["video_id"] = rec.segment.video_id;
        j["index"] = rec.segment.index;
        j["start_frame"] = rec.segment.start_frame;
        j["end_frame"] = rec.segment.end_frame;
        json score_map;
        for (int ci = 0; ci < kNumViolenceClasses; ++ci)
            score_map[class_token(static_cast<ViolenceClass>(ci))] = rec.class_scores[ci];
        j["scores"] = score_map;
        j["label"] = rec.label ? class_token(*rec.label) : "nonviolent";
        j["binary"] = rec.binary;
        out << j.dump() << '\n';
    }
    if (skipped > 0)
        warn("predict: skipped " + std::to_string(skipped) + " incomplete row(s)");
    if (!out)
        throw FormatError(args.out + ": write failed");
    return kExitOk;
}

// ------------------------------------------------------------------------ evaluate

struct EvaluateArgs {
    std::string predictions, table, mode = "multiclass", out_dir;
};

struct PredictionRow {
    std::string video_id;
    int index = 0;
    ClassScores scores{};
};

std::vector<PredictionRow> load_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw FormatError(path + ": cannot open");
    std::vector<PredictionRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(path, line_no, e.what());
        }
        if (!j.contains("video_id")) continue;  // header
        PredictionRow row;
        try {
            row.video_id = j.at("video_id").get<std::string>();
            row.index = j.at("index").get<int>();
            const json& scores = j.at("scores");
            for (int ci = 0; ci < kNumViolenceClasses; ++ci)
                row.scores[ci] =
                    scores.at(class_token(static_cast<ViolenceClass>(ci))).get<double>();
        } catch (const json::exception& e) {
            throw ParseError(path, line_no, e.what());
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out)
        throw FormatError(path + ": cannot open for writing");
    out << content;
    if (!out)
        throw FormatError(path + ": write failed");
}

json metrics_json(const std::vector<double>& scores, const std::vector<int>& labels,
                  const eval::RocCurve& curve) {
    const eval::ThresholdMetrics tm = eval::threshold_metrics(scores, labels, 0.5);
    json j;
    j["auc"] = curve.auc;
    j["eer"] = curve.eer;
    j["precision"] = tm.precision;
    j["recall"] = tm.recall;
    j["accuracy"] = tm.accuracy;
    bool any_pos = false;
    for (int y : labels) any_pos = any_pos || y != 0;
    if (any_pos) j["ap"] = eval::average_precision(scores, labels);
    return j;
}

int cmd_evaluate(const EvaluateArgs& args, const PipelineConfig& cfg) {
    const std::vector<PredictionRow> predictions = load_predictions(args.predictions);
    if (predictions.empty())
        throw DataError(args.predictions + ": no prediction rows");
    const dataset::FeatureTable table = dataset::load_table(args.table);

    std::map<std::pair<std::string, int>, const dataset::TableRow*> truth;
    for (const dataset::TableRow& row : table)
        truth[{row.video_id, row.index}] = &row;

    std::vector<const dataset::TableRow*> matched;
    matched.reserve(predictions.size());
    for (const PredictionRow& pred : predictions) {
        const auto it = truth.find({pred.video_id, pred.index});
        if (it == truth.end())
            throw DataError("evaluate: no ground truth for " + pred.video_id + "[" +
                            std::to_string(pred.index) + "]");
        matched.push_back(it->second);
    }

    fs::create_directories(args.out_dir);
    json metrics;
    metrics["mode"] = args.mode;
    metrics["segments"] = predictions.size();
    metrics["meta"] = meta_object(cfg, false);

    if (args.mode == "multiclass") {
        for (int ci = 0; ci < kNumViolenceClasses; ++ci) {
            const auto cls = static_cast<ViolenceClass>(ci);
            std::vector<double> scores(predictions.size());
            std::vector<int> labels(predictions.size());
            long positives = 0;
            for (std::size_t i = 0; i < predictions.size(); ++i) {
                scores[i] = predictions[i].scores[ci];
                labels[i] = matched[i]->classes.count(cls) ? 1 : 0;
                positives += labels[i];
            }
            if (positives == 0 || positives == static_cast<long>(predictions.size())) {
                warn("evaluate: class " + class_token(cls) +
                     " has single-label ground truth, skipped");
                metrics["classes"][class_token(cls)] = nullptr;
                continue;
            }
            const eval::RocCurve curve = eval::roc(scores, labels);
            metrics["classes"][class_token(cls)] = metrics_json(scores, labels, curve);
            write_text_file(
                (fs::path(args.out_dir) / ("roc_" + class_token(cls) + ".csv")).string(),
                eval::roc_to_csv(curve));
        }
    } else if (args.mode == "binary") {
        std::vector<double> scores(predictions.size());
        std::vector<int> labels(predictions.size());
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            scores[i] = *std::max_element(predictions[i].scores.begin(),
                                          predictions[i].scores.end());
            labels[i] = matched[i]->violent ? 1 : 0;
        }
        const eval::RocCurve curve = eval::roc(scores, labels);
        metrics["binary"] = metrics_json(scores, labels, curve);
        write_text_file((fs::path(args.out_dir) / "roc_binary.csv").string(),
                        eval::roc_to_csv(curve));
    } else {
        throw std::invalid_argument("evaluate: mode must be multiclass or binary");
    }

    const std::string metrics_path = (fs::path(args.out_dir) / "metrics.json").string();
    write_text_file(metrics_path, metrics.dump(2) + "\n");
    std::cout << metrics.dump(2) << '\n';
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"violent-scene-detection pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<int> workers_override;
    app.add_option("--config", config_path, "pipeline config JSON");
    app.add_option("--seed", seed_override, "override config seed");
    app.add_option("--workers", workers_override, "override worker count");

    BuildBloodArgs build_args;
    auto* build = app.add_subcommand("build-blood-model",
                                     "build blood / non-blood color models");
    build->fallthrough();
    build->add_option("--blood-dir", build_args.blood_dir)->required();
    build->add_option("--nonblood-dir", build_args.nonblood_dir)->required();
    build->add_option("--out-blood", build_args.out_blood)->required();
    build->add_option("--out-nonblood", build_args.out_nonblood)->required();
    build->add_option("--extend-dir", build_args.extend_dir,
                      "corpus used to extend the blood model");
    build->add_option("--accept-threshold", build_args.accept_threshold);

    ExtractArgs extract_args;
    auto* extract = app.add_subcommand("extract", "per-segment feature extraction");
    extract->fallthrough();
    extract->add_option("--video-id", extract_args.video_id)->required();
    extract->add_option("--frame-count", extract_args.frame_count)->required();
    extract->add_option("--out", extract_args.out)->required();
    extract->add_option("--frames-dir", extract_args.frames_dir);
    extract->add_option("--wav", extract_args.wav);
    extract->add_option("--sidecar", extract_args.sidecar);
    extract->add_option("--concepts", extract_args.concepts);
    extract->add_option("--annotations", extract_args.annotations);
    extract->add_option("--blood-model", extract_args.blood_model);
    extract->add_option("--nonblood-model", extract_args.nonblood_model);
    extract->add_option("--frame-width", extract_args.frame_w);
    extract->add_option("--frame-height", extract_args.frame_h);

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "train the four channel classifiers");
    train->fallthrough();
    train->add_option("--table", train_args.table)->required();
    train->add_option("--split", train_args.split)->required();
    train->add_option("--out-dir", train_args.out_dir)->required();

    FuseSearchArgs fuse_args;
    auto* fuse = app.add_subcommand("fuse-search",
                                    "search per-class fusion weights minimizing EER");
    fuse->fallthrough();
    fuse->add_option("--table", fuse_args.table)->required();
    fuse->add_option("--models-dir", fuse_args.models_dir)->required();
    fuse->add_option("--out", fuse_args.out)->required();
    fuse->add_option("--step", fuse_args.step);
    fuse->add_option("--dataset-id", fuse_args.dataset_id);

    PredictArgs predict_args;
    auto* predict = app.add_subcommand("predict", "fused per-segment score records");
    predict->fallthrough();
    predict->add_option("--table", predict_args.table)->required();
    predict->add_option("--models-dir", predict_args.models_dir)->required();
    predict->add_option("--weights", predict_args.weights)->required();
    predict->add_option("--out", predict_args.out)->required();

    EvaluateArgs eval_args;
    auto* evaluate = app.add_subcommand("evaluate", "metrics and ROC curves");
    evaluate->fallthrough();
    evaluate->add_option("--pred", eval_args.predictions)->required();
    evaluate->add_option("--table", eval_args.table)->required();
    evaluate->add_option("--mode", eval_args.mode)
        ->check(CLI::IsMember({"multiclass", "binary"}));
    evaluate->add_option("--out-dir", eval_args.out_dir)->required();

    std::vector<const char*> argv;
    argv.push_back("vsd");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        PipelineConfig cfg;
        if (!config_path.empty()) cfg = load_config(config_path);
        if (seed_override) cfg.seed = *seed_override;
        if (workers_override) cfg.workers = *workers_override;
        if (cfg.workers < 1)
            throw std::invalid_argument("workers must be >= 1");

        if (build->parsed()) return cmd_build_blood_model(build_args, cfg);
        if (extract->parsed()) return cmd_extract(extract_args, cfg);
        if (train->parsed()) return cmd_train(train_args, cfg);
        if (fuse->parsed()) return cmd_fuse_search(fuse_args, cfg);
        if (predict->parsed()) return cmd_predict(predict_args, cfg);
        if (evaluate->parsed()) return cmd_evaluate(eval_args, cfg);
        return kExitUsage;
    } catch (const DegenerateTrainingError& e) {
        std::cerr << "vsd: error: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const std::invalid_argument& e) {
        std::cerr << "vsd: error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "vsd: error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "vsd: error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace vsd::cli
