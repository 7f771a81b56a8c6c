#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "camref/artifacts.hpp"
#include "camref/commands.hpp"
#include "camref/embeddings.hpp"

namespace fs = std::filesystem;
using namespace camref;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::main(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("camref_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

std::size_t line_count(const fs::path& p) {
    const auto text = slurp(p);
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

fs::path write_config(const fs::path& dir, nlohmann::json extra = nlohmann::json::object()) {
    nlohmann::json j = {
        {"seed", 4},
        {"data", {{"synthetic", {{"num_identities", 6}, {"cameras", 3}, {"images_per_identity_per_camera", 3},
                                 {"dim", 12}, {"identity_spread", 0.3}, {"camera_shift_strength", 0.5}}}}},
        {"pipeline", {{"intra_epochs", 1}, {"inter_epochs", 2}, {"intra_clusters", 6}, {"inter_clusters", 6},
                      {"batch_size", 8}}},
    };
    j.merge_patch(extra);
    const auto p = dir / "config.json";
    std::ofstream(p) << j.dump(2);
    return p;
}

} // namespace

TEST_CASE("generate") {
    const auto dir = scratch("generate");
    const auto a = dir / "a.bin";
    const auto b = dir / "b.bin";
    for (const auto& p : {a, b})
        REQUIRE(run({"generate", "--ids", "50", "--cams", "4", "--per", "6", "--dim", "8", "--seed", "3", "--out",
                     p.string()})
                    .code == cli::kExitOk);
    CHECK(slurp(a) == slurp(b));
    const auto set = load_embeddings(a, EmbeddingFormat::Bin);
    CHECK(set.size() == 1200);
    CHECK(set.num_cameras() == 4);
    CHECK(set.has_identities());

    const auto csv = dir / "c.csv";
    REQUIRE(run({"generate", "--ids", "5", "--cams", "2", "--per", "2", "--dim", "4", "--out", csv.string(),
                 "--format", "csv"})
                .code == cli::kExitOk);
    CHECK(load_embeddings(csv, EmbeddingFormat::Csv).size() == 20);
}

TEST_CASE("usage errors") {
    const auto dir = scratch("usage");
    CHECK(run({"generate", "--cams", "0", "--out", (dir / "x.bin").string()}).code == cli::kExitUsage);
    CHECK(run({"generate"}).code == cli::kExitUsage);
    CHECK(run({}).code == cli::kExitUsage);
    CHECK(run({"frobnicate"}).code == cli::kExitUsage);
    CHECK(run({"run", "--refine", "maybe"}).code == cli::kExitUsage);

    const auto cfg = write_config(dir, {{"pipeline", {{"warp_speed", 9}}}});
    const auto r = run({"run", "--config", cfg.string(), "--out", (dir / "out").string()});
    CHECK(r.code == cli::kExitUsage);
    CHECK(r.err.find("warp_speed") != std::string::npos);

    const auto too_many = write_config(dir, {{"pipeline", {{"inter_clusters", 1000}}}});
    const auto failed = run({"run", "--config", too_many.string(), "--out", (dir / "out2").string()});
    CHECK(failed.code == cli::kExitFailure);
    CHECK(nlohmann::json::parse(slurp(dir / "out2" / "report.json"))["status"] == "failed");
}

TEST_CASE("run writes its artifacts") {
    const auto dir = scratch("run");
    const auto cfg = write_config(dir);
    const auto out = dir / "out";
    const auto r = run({"run", "--config", cfg.string(), "--out", out.string()});
    REQUIRE_MESSAGE(r.code == cli::kExitOk, r.err);
    for (const char* name : {"metrics.csv", "encoder.enc1", "report.json", "phi_cam_0.csv", "phi_cam_2.csv",
                             "global_epoch_0.csv", "global_epoch_1.csv", "refined_epoch_0.csv", "refined_epoch_1.csv"})
        CHECK_MESSAGE(fs::exists(out / name), name);
    CHECK(line_count(out / "metrics.csv") == 3);
    CHECK(slurp(out / "metrics.csv").rfind(std::string(kMetricsHeader) + '\n', 0) == 0);
    CHECK(line_count(out / "refined_epoch_0.csv") == 55);

    const auto report = nlohmann::json::parse(slurp(out / "report.json"));
    CHECK(report["status"] == "complete");
    CHECK(report["config"]["seed"] == 4);
    CHECK(report["config"]["pipeline"]["inter_epochs"] == 2);
    CHECK(report["config"]["pipeline"]["temperature"] == 0.05);
    CHECK(report["epochs"].size() == 2);

    SUBCASE("same seed, same bytes") {
        const auto again = dir / "again";
        REQUIRE(run({"run", "--config", cfg.string(), "--out", again.string()}).code == cli::kExitOk);
        CHECK(slurp(out / "metrics.csv") == slurp(again / "metrics.csv"));
        CHECK(slurp(out / "refined_epoch_1.csv") == slurp(again / "refined_epoch_1.csv"));
    }
    SUBCASE("refinement off keeps every item") {
        const auto off = dir / "off";
        REQUIRE(run({"run", "--config", cfg.string(), "--out", off.string(), "--refine", "off"}).code ==
                cli::kExitOk);
        const auto labels = read_assignment_csv(off / "refined_epoch_0.csv", 54);
        CHECK(std::none_of(labels.begin(), labels.end(), [](ClusterLabel l) { return l == kDiscarded; }));
        CHECK(slurp(off / "refined_epoch_0.csv") == slurp(off / "global_epoch_0.csv"));
        CHECK(nlohmann::json::parse(slurp(off / "report.json"))["config"]["pipeline"]["refine"] == false);
    }
}

TEST_CASE("ablate-decay") {
    const auto dir = scratch("ablate");
    const auto cfg = write_config(dir);
    const auto out = dir / "out";
    const auto r = run({"ablate-decay", "--config", cfg.string(), "--out", out.string()});
    REQUIRE_MESSAGE(r.code == cli::kExitOk, r.err);
    const auto table = slurp(out / "ablation.csv");
    CHECK(line_count(out / "ablation.csv") == 6);
    for (const char* schedule : {"baseline,-,", "refined,none,", "refined,linear,", "refined,exponential,",
                                 "refined,cosine,"})
        CHECK_MESSAGE(table.find(schedule) != std::string::npos, schedule);
}

TEST_CASE("eval") {
    const auto dir = scratch("eval");
    const auto data = dir / "data.bin";
    REQUIRE(run({"generate", "--ids", "6", "--cams", "3", "--per", "2", "--dim", "8", "--spread", "0", "--shift",
                 "0", "--out", data.string()})
                .code == cli::kExitOk);
    const auto set = load_embeddings(data, EmbeddingFormat::Bin);
    std::vector<ClusterLabel> truth(set.identities().begin(), set.identities().end());
    const auto assign = dir / "assign.csv";
    write_assignment_csv(assign, truth);

    const auto r = run({"eval", "--data", data.string(), "--assign", assign.string(), "--out",
                        (dir / "m.csv").string()});
    REQUIRE_MESSAGE(r.code == cli::kExitOk, r.err);
    CHECK(r.out == slurp(dir / "m.csv"));
    CHECK(r.out == std::string(kMetricsHeader) + "\n,,1.000000,1.000000,1.000000,1.000000,1.000000,1.000000,"
                                                 "1.000000,1.000000\n");

    CHECK(run({"eval", "--query", data.string()}).code == cli::kExitUsage);
    CHECK(run({"eval"}).code == cli::kExitUsage);

    const auto unlabeled = dir / "u.csv";
    std::ofstream(unlabeled) << "id,camera,f0\n0,0,1\n1,1,1\n";
    CHECK(run({"eval", "--data", unlabeled.string(), "--format", "csv"}).code == cli::kExitFailure);
}
