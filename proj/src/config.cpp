#include "camref/config.hpp"

#include <fstream>
#include <set>

#include "camref/errors.hpp"

namespace camref {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <class T>
void read(const json& obj, const char* key, T& target, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        target = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + " has the wrong type");
    }
}

ClusterCountRule parse_rule(const json& v, const std::string& where) {
    if (v.is_number_unsigned()) return ClusterCountRule::fixed(v.get<std::size_t>());
    if (v.is_array()) {
        std::vector<std::size_t> ks;
        for (const auto& e : v) {
            if (!e.is_number_unsigned()) throw ConfigError(where + " entries must be non-negative integers");
            ks.push_back(e.get<std::size_t>());
        }
        return ClusterCountRule::cameras(std::move(ks));
    }
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        const std::string prefix = "n_images/";
        if (s.starts_with(prefix)) {
            try {
                std::size_t used = 0;
                const auto d = std::stoull(s.substr(prefix.size()), &used);
                if (used == s.size() - prefix.size() && d >= 1) return ClusterCountRule::divisor(d);
            } catch (const std::exception&) {
            }
        }
    }
    throw ConfigError(where + " must be a count, a per-camera list, or \"n_images/<d>\"");
}

json rule_to_json(const ClusterCountRule& r) {
    switch (r.kind) {
    case ClusterCountRule::Kind::Fixed: return r.value;
    case ClusterCountRule::Kind::PerCamera: return r.per_camera;
    case ClusterCountRule::Kind::Divisor: return r.describe();
    }
    return nullptr;
}

SyntheticSpec parse_synthetic(const json& j, std::uint64_t default_seed) {
    reject_unknown(j,
                   {"num_identities", "cameras", "images_per_identity_per_camera", "dim", "identity_spread",
                    "camera_shift_strength", "seed"},
                   "data.synthetic");
    SyntheticSpec s;
    s.seed = default_seed;
    const std::string w = "data.synthetic";
    read(j, "num_identities", s.num_identities, w);
    read(j, "cameras", s.cameras, w);
    read(j, "images_per_identity_per_camera", s.images_per_identity_per_camera, w);
    read(j, "dim", s.dim, w);
    read(j, "identity_spread", s.identity_spread, w);
    read(j, "camera_shift_strength", s.camera_shift_strength, w);
    read(j, "seed", s.seed, w);
    return s;
}

PipelineConfig parse_pipeline(const json& j, std::uint64_t seed) {
    reject_unknown(j,
                   {"intra_epochs", "inter_epochs", "intra_clusters", "inter_clusters", "linkage", "learning_rate",
                    "batch_size", "temperature", "momentum", "refine", "refinement", "eval_interval"},
                   "pipeline");
    PipelineConfig p;
    p.seed = seed;
    p.refinement.seed = seed;
    const std::string w = "pipeline";
    read(j, "intra_epochs", p.intra_epochs, w);
    read(j, "inter_epochs", p.inter_epochs, w);
    if (j.contains("intra_clusters")) p.intra_clusters = parse_rule(j["intra_clusters"], "pipeline.intra_clusters");
    if (j.contains("inter_clusters")) p.inter_clusters = parse_rule(j["inter_clusters"], "pipeline.inter_clusters");
    if (j.contains("linkage")) {
        std::string name;
        read(j, "linkage", name, w);
        try {
            p.linkage = parse_linkage(name);
        } catch (const ArgumentError& e) {
            throw ConfigError(e.what());
        }
    }
    read(j, "learning_rate", p.learning_rate, w);
    read(j, "batch_size", p.batch_size, w);
    read(j, "temperature", p.temperature, w);
    read(j, "momentum", p.momentum, w);
    read(j, "refine", p.refine, w);
    read(j, "eval_interval", p.eval_interval, w);
    if (j.contains("refinement")) {
        const auto& r = j["refinement"];
        reject_unknown(r, {"neighbor_count", "p0", "schedule", "exp_gamma"}, "pipeline.refinement");
        const std::string wr = "pipeline.refinement";
        read(r, "neighbor_count", p.refinement.neighbor_count, wr);
        read(r, "p0", p.refinement.p0, wr);
        read(r, "exp_gamma", p.refinement.exp_gamma, wr);
        if (r.contains("schedule")) {
            std::string name;
            read(r, "schedule", name, wr);
            try {
                p.refinement.schedule = parse_schedule(name);
            } catch (const ArgumentError& e) {
                throw ConfigError(e.what());
            }
        }
    }
    p.refinement.total_epochs = p.inter_epochs;
    return p;
}

} // namespace

void RunConfig::set_seed(std::uint64_t s) {
    seed = s;
    pipeline.seed = s;
    pipeline.refinement.seed = s;
    if (auto* spec = std::get_if<SyntheticSpec>(&data)) spec->seed = s;
}

void RunConfig::validate() const {
    pipeline.validate();
    if (const auto* spec = std::get_if<SyntheticSpec>(&data)) {
        try {
            spec->validate();
        } catch (const ArgumentError& e) {
            throw ConfigError(e.what());
        }
    }
}

RunConfig run_config_from_json(const json& j) {
    reject_unknown(j, {"seed", "out", "data", "pipeline"}, "config");
    RunConfig c;
    read(j, "seed", c.seed, "config");
    std::string out = c.out_dir.string();
    read(j, "out", out, "config");
    c.out_dir = out;

    if (j.contains("data")) {
        const auto& d = j["data"];
        if (!d.is_object()) throw ConfigError("data must be an object");
        if (d.contains("synthetic")) {
            reject_unknown(d, {"synthetic"}, "data");
            c.data = parse_synthetic(d["synthetic"], c.seed);
        } else {
            reject_unknown(d, {"path", "format"}, "data");
            if (!d.contains("path")) throw ConfigError("data needs either 'synthetic' or 'path'");
            FileSource f;
            std::string path, format = "bin";
            read(d, "path", path, "data");
            read(d, "format", format, "data");
            f.path = path;
            try {
                f.format = parse_embedding_format(format);
            } catch (const ArgumentError& e) {
                throw ConfigError(e.what());
            }
            c.data = f;
        }
    } else {
        SyntheticSpec s;
        s.seed = c.seed;
        c.data = s;
    }
    c.pipeline = parse_pipeline(j.value("pipeline", json::object()), c.seed);
    c.validate();
    return c;
}

json to_json(const SyntheticSpec& s) {
    return {{"num_identities", s.num_identities},
            {"cameras", s.cameras},
            {"images_per_identity_per_camera", s.images_per_identity_per_camera},
            {"dim", s.dim},
            {"identity_spread", s.identity_spread},
            {"camera_shift_strength", s.camera_shift_strength},
            {"seed", s.seed}};
}

json to_json(const PipelineConfig& p) {
    return {{"intra_epochs", p.intra_epochs},
            {"inter_epochs", p.inter_epochs},
            {"intra_clusters", rule_to_json(p.intra_clusters)},
            {"inter_clusters", rule_to_json(p.inter_clusters)},
            {"linkage", std::string(to_string(p.linkage))},
            {"learning_rate", p.learning_rate},
            {"batch_size", p.batch_size},
            {"temperature", p.temperature},
            {"momentum", p.momentum},
            {"refine", p.refine},
            {"eval_interval", p.eval_interval},
            {"refinement",
             {{"neighbor_count", p.refinement.neighbor_count},
              {"p0", p.refinement.p0},
              {"schedule", std::string(to_string(p.refinement.schedule))},
              {"exp_gamma", p.refinement.exp_gamma}}}};
}

json to_json(const RunConfig& c) {
    json data;
    if (const auto* spec = std::get_if<SyntheticSpec>(&c.data)) {
        data = {{"synthetic", to_json(*spec)}};
    } else {
        const auto& f = std::get<FileSource>(c.data);
        data = {{"path", f.path.string()}, {"format", f.format == EmbeddingFormat::Csv ? "csv" : "bin"}};
    }
    return {{"seed", c.seed}, {"out", c.out_dir.string()}, {"data", data}, {"pipeline", to_json(c.pipeline)}};
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return run_config_from_json(j);
}

} // namespace camref
