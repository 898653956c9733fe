#include "vsd/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

namespace vsd::dataset {

using nlohmann::json;

std::vector<Annotation> parse_annotations(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw FormatError(path + ": cannot open");
    std::vector<Annotation> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream is(line);
        std::string tok;
        std::vector<std::string> tokens;
        while (is >> tok) tokens.push_back(tok);
        if (tokens.empty()) continue;
        if (tokens.size() < 2)
            throw ParseError(path, line_no, "expected start and end frame");
        Annotation ann;
        try {
            std::size_t pos = 0;
            ann.start_frame = std::stol(tokens[0], &pos);
            if (pos != tokens[0].size()) throw std::invalid_argument(tokens[0]);
            ann.end_frame = std::stol(tokens[1], &pos);
            if (pos != tokens[1].size()) throw std::invalid_argument(tokens[1]);
        } catch (const std::exception&) {
            throw ParseError(path, line_no, "malformed frame number");
        }
        if (ann.start_frame > ann.end_frame)
            throw ParseError(path, line_no, "start_frame > end_frame");
        for (std::size_t i = 2; i < tokens.size(); ++i) {
            if (tokens[i] == "multiple_action") {
                ann.multiple_action = true;
                continue;
            }
            const auto cls = class_from_token(tokens[i]);
            if (!cls)
                throw ParseError(path, line_no, "unknown token \"" + tokens[i] + "\"");
            ann.classes.insert(*cls);
        }
        out.push_back(std::move(ann));
    }
    return out;
}

std::string serialize_annotations(const std::vector<Annotation>& annotations) {
    std::ostringstream os;
    for (const Annotation& ann : annotations) {
        os << ann.start_frame << ' ' << ann.end_frame;
        for (ViolenceClass c : kAllViolenceClasses)
            if (ann.classes.count(c)) os << ' ' << class_token(c);
        if (ann.multiple_action) os << " multiple_action";
        os << '\n';
    }
    return os.str();
}

SplitSpec load_split(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw FormatError(path + ": cannot open");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw FormatError(path + ": " + e.what());
    }
    SplitSpec split;
    try {
        split.train_ids = j.at("train").get<std::vector<std::string>>();
        split.validation_ids = j.at("validation").get<std::vector<std::string>>();
        split.test_ids = j.at("test").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    std::unordered_set<std::string> seen;
    for (const auto* ids : {&split.train_ids, &split.validation_ids, &split.test_ids})
        for (const std::string& id : *ids)
            if (!seen.insert(id).second)
                throw FormatError(path + ": video id \"" + id +
                                  "\" appears in more than one split part");
    return split;
}

void save_split(const std::string& path, const SplitSpec& split) {
    json j;
    j["train"] = split.train_ids;
    j["validation"] = split.validation_ids;
    j["test"] = split.test_ids;
    std::ofstream out(path);
    if (!out)
        throw FormatError(path + ": cannot open for writing");
    out << j.dump(2) << '\n';
}

namespace {

TableRow row_from_json(const json& j, const std::string& path, std::size_t line_no) {
    TableRow row;
    try {
        row.video_id = j.at("video_id").get<std::string>();
        row.index = j.at("index").get<int>();
        row.start_frame = j.value("start_frame", 0L);
        row.end_frame = j.value("end_frame", 0L);
        for (const auto& tok : j.value("classes", std::vector<std::string>{})) {
            const auto cls = class_from_token(tok);
            if (!cls)
                throw ParseError(path, line_no, "unknown class token \"" + tok + "\"");
            row.classes.insert(*cls);
        }
        row.violent = j.value("violent", !row.classes.empty());
        for (FeatureChannel c : kAllChannels) {
            const std::string& key = channel_token(c);
            if (j.contains(key) && !j.at(key).is_null())
                row.features[c] = j.at(key).get<std::vector<double>>();
        }
    } catch (const json::exception& e) {
        throw ParseError(path, line_no, e.what());
    }
    return row;
}

}  // namespace

FeatureTable load_table(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw FormatError(path + ": cannot open");
    FeatureTable table;
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
        if (!j.is_object())
            throw ParseError(path, line_no, "expected a JSON object");
        if (!j.contains("video_id")) continue;  // metadata header line
        table.push_back(row_from_json(j, path, line_no));
    }
    return table;
}

void append_table_rows(std::ostream& out, const FeatureTable& rows) {
    for (const TableRow& row : rows) {
        json j;
        j["video_id"] = row.video_id;
        j["index"] = row.index;
        j["start_frame"] = row.start_frame;
        j["end_frame"] = row.end_frame;
        std::vector<std::string> classes;
        for (ViolenceClass c : kAllViolenceClasses)
            if (row.classes.count(c)) classes.push_back(class_token(c));
        j["classes"] = classes;
        j["violent"] = row.violent;
        for (const auto& [channel, values] : row.features)
            j[channel_token(channel)] = values;
        out << j.dump() << '\n';
    }
}

namespace {

// Deterministic Fisher-Yates with an explicit bounded draw so results do not
// depend on the standard library's distribution implementation.
class SampleRng {
public:
    explicit SampleRng(std::uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ull) {}

    std::uint64_t next() {
        // splitmix64
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::size_t below(std::size_t bound) { return next() % bound; }

private:
    std::uint64_t state_;
};

void shuffle_indices(std::vector<std::size_t>& idx, SampleRng& rng) {
    for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[rng.below(i)]);
}

SampledSet draw_balanced(const FeatureTable& table, const std::vector<std::size_t>& pool,
                         long n, std::uint64_t seed, SampleRng& rng,
                         const std::string& which) {
    if (n <= 0 || n % 2 != 0)
        throw std::invalid_argument("balanced_sample: sample sizes must be positive and even");
    std::vector<std::size_t> positives, negatives;
    for (std::size_t idx : pool)
        (table[idx].violent ? positives : negatives).push_back(idx);
    const long half = n / 2;
    if (static_cast<long>(positives.size()) < half)
        throw DataError("balanced_sample: " + which + " shortage of positive segments: need " +
                        std::to_string(half) + ", have " + std::to_string(positives.size()));
    if (static_cast<long>(negatives.size()) < half)
        throw DataError("balanced_sample: " + which + " shortage of negative segments: need " +
                        std::to_string(half) + ", have " + std::to_string(negatives.size()));
    shuffle_indices(positives, rng);
    shuffle_indices(negatives, rng);
    SampledSet set;
    set.seed = seed;
    set.entries.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < half; ++i) set.entries.push_back(table[positives[i]]);
    for (long i = 0; i < half; ++i) set.entries.push_back(table[negatives[i]]);
    return set;
}

}  // namespace

std::pair<SampledSet, SampledSet> balanced_sample(const FeatureTable& table,
                                                  const SplitSpec& split, long n_train,
                                                  long n_test, std::uint64_t seed) {
    const std::unordered_set<std::string> train_ids(split.train_ids.begin(),
                                                    split.train_ids.end());
    const std::unordered_set<std::string> validation_ids(split.validation_ids.begin(),
                                                         split.validation_ids.end());
    for (const std::string& id : split.train_ids)
        if (validation_ids.count(id))
            throw std::invalid_argument("balanced_sample: split parts overlap");

    std::vector<std::size_t> train_pool, test_pool;
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (!table[i].complete()) continue;
        if (train_ids.count(table[i].video_id)) train_pool.push_back(i);
        else if (validation_ids.count(table[i].video_id)) test_pool.push_back(i);
    }
    SampleRng rng(seed);
    SampledSet train = draw_balanced(table, train_pool, n_train, seed, rng, "train");
    SampledSet test = draw_balanced(table, test_pool, n_test, seed, rng, "test");
    return {std::move(train), std::move(test)};
}

}  // namespace vsd::dataset
