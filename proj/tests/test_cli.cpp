#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support/corpus.hpp"
#include "support/tempdir.hpp"
#include "vsd/cli.hpp"
#include "vsd/dataset.hpp"

using namespace vsd;
namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// file contents with JSONL header lines (objects without "video_id") removed
std::string rows_only(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream os;
    std::string line;
    while (std::getline(in, line))
        if (line.find("\"video_id\"") != std::string::npos) os << line << '\n';
    return os.str();
}

}  // namespace

TEST_CASE("cli usage errors exit with code 2") {
    CHECK(cli::run({}) == cli::kExitUsage);
    CHECK(cli::run({"no-such-command"}) == cli::kExitUsage);
    CHECK(cli::run({"extract"}) == cli::kExitUsage);  // missing required flags
}

TEST_CASE("cli help exits cleanly") {
    CHECK(cli::run({"--help"}) == cli::kExitOk);
    CHECK(cli::run({"train", "--help"}) == cli::kExitOk);
}

TEST_CASE("config file loading") {
    testsupport::TempDir tmp;
    const std::string path = tmp.file("cfg.json");
    std::ofstream(path) << R"({"fps": 25.0, "seed": 11, "mfcc": {"n_mel_filters": 30}})";
    const auto cfg = cli::load_config(path);
    CHECK(cfg.fps == 25.0);
    CHECK(cfg.seed == 11);
    CHECK(cfg.mfcc.n_mel_filters == 30);
    CHECK(cfg.mfcc.n_coeffs == 22);
    CHECK(cli::load_config(path).hash() == cfg.hash());

    std::ofstream(path) << R"({"fps": -1})";
    CHECK_THROWS_AS(cli::load_config(path), FormatError);
}

TEST_CASE("build-blood-model command") {
    testsupport::TempDir tmp;
    testsupport::write_blood_corpora(tmp.file("blood"), tmp.file("nonblood"), 5);

    SUBCASE("produces byte-identical models on re-run") {
        const std::vector<std::string> args = {
            "build-blood-model",          "--blood-dir",    tmp.file("blood"),
            "--nonblood-dir",             tmp.file("nonblood"), "--out-blood",
            tmp.file("bm.vfbm"),          "--out-nonblood", tmp.file("nm.vfbm")};
        REQUIRE(cli::run(args) == cli::kExitOk);
        const std::string first = read_file(tmp.file("bm.vfbm"));
        CHECK_FALSE(first.empty());
        REQUIRE(cli::run(args) == cli::kExitOk);
        CHECK(read_file(tmp.file("bm.vfbm")) == first);
    }
    SUBCASE("empty corpus dir is a data error") {
        fs::create_directories(tmp.file("empty"));
        CHECK(cli::run({"build-blood-model", "--blood-dir", tmp.file("empty"),
                        "--nonblood-dir", tmp.file("nonblood"), "--out-blood",
                        tmp.file("x.vfbm"), "--out-nonblood", tmp.file("y.vfbm")}) ==
              cli::kExitData);
    }
}

TEST_CASE("extract, predict and evaluate flow on a tiny corpus") {
    testsupport::TempDir tmp;
    const std::string root = tmp.file("videos");
    testsupport::write_blood_corpora(tmp.file("blood"), tmp.file("nonblood"), 7);
    REQUIRE(cli::run({"build-blood-model", "--blood-dir", tmp.file("blood"),
                      "--nonblood-dir", tmp.file("nonblood"), "--out-blood",
                      tmp.file("bm.vfbm"), "--out-nonblood", tmp.file("nm.vfbm")}) ==
            cli::kExitOk);

    testsupport::VideoSpec spec;
    spec.id = "vid0";
    spec.seconds = 10;
    spec.planted = ViolenceClass::Gunshots;
    spec.span_begin = 2;
    spec.span_end = 7;
    testsupport::write_video(root, spec, 3);
    const std::string vdir = (fs::path(root) / spec.id).string();

    auto extract_args = [&](const std::string& out) {
        return std::vector<std::string>{"extract",
                                        "--video-id", spec.id,
                                        "--frame-count", "250",
                                        "--frames-dir", vdir + "/frames",
                                        "--wav", vdir + "/audio.wav",
                                        "--sidecar", vdir + "/motion.csv",
                                        "--concepts", vdir + "/concepts.jsonl",
                                        "--annotations", vdir + "/annotations.txt",
                                        "--blood-model", tmp.file("bm.vfbm"),
                                        "--nonblood-model", tmp.file("nm.vfbm"),
                                        "--out", out};
    };

    SUBCASE("ten-second fixture gives ten complete rows") {
        REQUIRE(cli::run(extract_args(tmp.file("table.jsonl"))) == cli::kExitOk);
        const auto table = dataset::load_table(tmp.file("table.jsonl"));
        REQUIRE(table.size() == 10);
        for (const auto& row : table) CHECK(row.complete());
        // annotated span carries the class
        CHECK(table[3].classes.count(ViolenceClass::Gunshots) == 1);
        CHECK(table[3].violent);
        CHECK_FALSE(table[0].violent);
    }
    SUBCASE("re-extraction is identical modulo the timestamp header") {
        REQUIRE(cli::run(extract_args(tmp.file("t1.jsonl"))) == cli::kExitOk);
        REQUIRE(cli::run(extract_args(tmp.file("t2.jsonl"))) == cli::kExitOk);
        CHECK(rows_only(tmp.file("t1.jsonl")) == rows_only(tmp.file("t2.jsonl")));
    }
    SUBCASE("missing wav leaves every row incomplete, nonzero exit") {
        auto args = extract_args(tmp.file("noaudio.jsonl"));
        const auto it = std::find(args.begin(), args.end(), "--wav");
        args.erase(it, it + 2);
        REQUIRE(cli::run(args) == cli::kExitData);  // all rows incomplete
        const auto table = dataset::load_table(tmp.file("noaudio.jsonl"));
        REQUIRE(table.size() == 10);
        for (const auto& row : table) {
            CHECK_FALSE(row.features.count(FeatureChannel::Audio));
            CHECK(row.features.count(FeatureChannel::Blood));
        }
    }
    SUBCASE("no channel inputs at all exits with the data code") {
        CHECK(cli::run({"extract", "--video-id", spec.id, "--frame-count", "250", "--out",
                        tmp.file("bare.jsonl")}) == cli::kExitData);
    }
}

TEST_CASE("train on a single-class table exits with the degenerate code") {
    testsupport::TempDir tmp;
    const std::string table = tmp.file("table.jsonl");
    {
        std::ofstream out(table);
        for (int i = 0; i < 20; ++i) {
            out << R"({"video_id":"a","index":)" << i
                << R"(,"classes":[],"violent":false,"audio":[)";
            for (int d = 0; d < 22; ++d) out << (d ? "," : "") << "0.1";
            out << R"(],"blood":[)";
            for (int d = 0; d < 14; ++d) out << (d ? "," : "") << "0.1";
            out << R"(],"motion":[)";
            for (int d = 0; d < 24; ++d) out << (d ? "," : "") << "0.1";
            out << R"(],"concepts":[0.1,0.2]})" << "\n";
        }
    }
    const std::string split = tmp.file("split.json");
    std::ofstream(split) << R"({"train":["a"],"validation":["b"],"test":[]})";
    CHECK(cli::run({"train", "--table", table, "--split", split, "--out-dir",
                    tmp.file("models")}) == cli::kExitDegenerate);
}
