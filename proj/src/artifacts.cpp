#include "camref/artifacts.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "camref/errors.hpp"

namespace camref {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    return f;
}

std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

} // namespace

void write_assignment_csv(const std::filesystem::path& path, std::span<const ClusterLabel> labels,
                          std::span<const std::size_t> items) {
    auto f = open_out(path);
    std::string out = "index,cluster\n";
    for (std::size_t r = 0; r < labels.size(); ++r)
        out += std::to_string(items.empty() ? r : items[r]) + ',' + std::to_string(labels[r]) + '\n';
    f << out;
    if (!f) throw IoError("write failed: " + path.string());
}

std::vector<ClusterLabel> read_assignment_csv(const std::filesystem::path& path, std::size_t n) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (line.rfind("index,cluster", 0) != 0)
        throw ParseError(ParseError::Kind::Header, 1, "line 1: expected header index,cluster");
    std::vector<ClusterLabel> labels(n, kDiscarded);
    std::vector<bool> seen(n, false);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        std::size_t index = 0;
        ClusterLabel cluster = 0;
        const char* b = line.data();
        const auto r1 = std::from_chars(b, b + (comma == std::string::npos ? line.size() : comma), index);
        const auto r2 = comma == std::string::npos ? std::from_chars_result{b, std::errc::invalid_argument}
                                                   : std::from_chars(b + comma + 1, b + line.size(), cluster);
        if (r1.ec != std::errc{} || r2.ec != std::errc{} || r2.ptr != b + line.size())
            throw ParseError(ParseError::Kind::BadNumber, line_no, "line " + std::to_string(line_no) + ": bad row");
        if (index >= n)
            throw ParseError(ParseError::Kind::RowWidth, line_no,
                             "line " + std::to_string(line_no) + ": index beyond the embedding set");
        labels[index] = cluster;
        seen[index] = true;
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!seen[i]) throw ParseError(ParseError::Kind::Truncated, line_no, "item " + std::to_string(i) + " has no row");
    return labels;
}

std::string metrics_row(std::optional<std::size_t> epoch, std::optional<double> p,
                        const std::optional<ClusterQuality>& q, const std::optional<RetrievalResult>& r) {
    std::string row = epoch ? std::to_string(*epoch) : "";
    row += ',' + (p ? fixed(*p) : "");
    if (q) {
        row += ',' + fixed(q->precision) + ',' + fixed(q->recall) + ',' + fixed(q->f_score) + ',' + fixed(q->expansion);
    } else {
        row += ",,,,";
    }
    if (r) {
        row += ',' + fixed(r->mean_ap) + ',' + fixed(r->rank(1)) + ',' + fixed(r->rank(5)) + ',' + fixed(r->rank(10));
    } else {
        row += ",,,,";
    }
    return row;
}

json to_json(const ClusterQuality& q) {
    return {{"precision", q.precision}, {"recall", q.recall}, {"f_score", q.f_score}, {"expansion", q.expansion}};
}

json to_json(const EpochReport& r) {
    const auto& s = r.summary;
    json j = {{"epoch", s.epoch},
              {"p", s.p},
              {"mean_loss", s.mean_loss},
              {"num_clusters", s.num_clusters},
              {"information_nodes", s.information_nodes},
              {"kept", s.kept},
              {"discarded", s.discarded}};
    if (r.metrics) {
        j["global"] = to_json(r.metrics->global);
        j["local"] = to_json(r.metrics->local);
        j["refined"] = to_json(r.metrics->refined);
        if (r.metrics->retrieval) {
            const auto& ret = *r.metrics->retrieval;
            j["retrieval"] = {{"map", ret.mean_ap},
                              {"rank1", ret.rank(1)},
                              {"rank5", ret.rank(5)},
                              {"rank10", ret.rank(10)},
                              {"valid_queries", ret.valid_queries},
                              {"excluded_queries", ret.excluded_queries}};
        }
    }
    return j;
}

std::vector<std::string> write_run_artifacts(const std::filesystem::path& dir, const PipelineResult& result) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> written;
    for (const auto& local : result.intra.locals) {
        const std::string name = "phi_cam_" + std::to_string(local.camera) + ".csv";
        write_assignment_csv(dir / name, local.assignment.labels, local.indices);
        written.push_back(name);
    }
    for (std::size_t e = 0; e < result.global_assignments.size(); ++e) {
        const std::string g = "global_epoch_" + std::to_string(e) + ".csv";
        write_assignment_csv(dir / g, result.global_assignments[e].labels);
        written.push_back(g);
        const std::string r = "refined_epoch_" + std::to_string(e) + ".csv";
        write_assignment_csv(dir / r, result.refined_assignments[e].labels);
        written.push_back(r);
    }
    {
        auto f = open_out(dir / "metrics.csv");
        std::string out = std::string(kMetricsHeader) + '\n';
        for (const auto& rep : result.reports) {
            std::optional<ClusterQuality> q;
            std::optional<RetrievalResult> ret;
            if (rep.metrics) {
                q = rep.metrics->refined;
                ret = rep.metrics->retrieval;
            }
            out += metrics_row(rep.summary.epoch, rep.summary.p, q, ret) + '\n';
        }
        f << out;
        if (!f) throw IoError("write failed: metrics.csv");
        written.push_back("metrics.csv");
    }
    save_encoder(result.encoder, dir / "encoder.enc1");
    written.push_back("encoder.enc1");
    return written;
}

void write_report(const std::filesystem::path& dir, const RunConfig& config, const PipelineResult* result,
                  std::span<const std::string> artifacts, const std::string& error) {
    std::filesystem::create_directories(dir);
    json report;
    report["config"] = to_json(config);
    report["status"] = error.empty() ? "complete" : "failed";
    if (!error.empty()) report["error"] = error;
    report["artifacts"] = std::vector<std::string>(artifacts.begin(), artifacts.end());
    if (result) {
        json stage1 = json::array();
        for (const auto& l : result->intra.locals)
            stage1.push_back({{"camera", l.camera}, {"items", l.indices.size()}, {"clusters", l.assignment.num_clusters}});
        report["stage1"] = stage1;
        json epochs = json::array();
        for (const auto& r : result->reports) epochs.push_back(to_json(r));
        report["epochs"] = epochs;
    }
    auto f = open_out(dir / "report.json");
    f << report.dump(2) << '\n';
    if (!f) throw IoError("write failed: report.json");
}

} // namespace camref
