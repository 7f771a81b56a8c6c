#include "camref/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>

#include "camref/artifacts.hpp"
#include "camref/config.hpp"
#include "camref/errors.hpp"
#include "camref/evaluation.hpp"
#include "camref/kernels.hpp"

namespace camref::cli {

namespace {

EmbeddingSet load_data(const RunConfig& config) {
    if (const auto* spec = std::get_if<SyntheticSpec>(&config.data)) return generate_synthetic(*spec);
    const auto& f = std::get<FileSource>(config.data);
    return load_embeddings(f.path, f.format);
}

struct RunOverrides {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::string refine;
    std::string schedule;
};

RunConfig resolve_config(const RunOverrides& o) {
    RunConfig config = o.config_path.empty() ? run_config_from_json(nlohmann::json::object())
                                             : load_run_config(o.config_path);
    if (!o.out_dir.empty()) config.out_dir = o.out_dir;
    if (o.seed) config.set_seed(*o.seed);
    if (!o.refine.empty()) config.pipeline.refine = o.refine == "on";
    if (!o.schedule.empty()) config.pipeline.refinement.schedule = parse_schedule(o.schedule);
    config.validate();
    return config;
}

int cmd_generate(const SyntheticSpec& spec, const std::string& out_path, const std::string& format,
                 std::ostream& out) {
    const auto set = generate_synthetic(spec);
    save_embeddings(set, out_path, parse_embedding_format(format));
    out << "wrote " << set.size() << " rows (D=" << set.dim() << ", C=" << set.num_cameras() << ") to " << out_path
        << '\n';
    return kExitOk;
}

int cmd_run(const RunOverrides& o, std::ostream& out, std::ostream& err) {
    const RunConfig config = resolve_config(o);
    std::vector<std::string> written;
    try {
        const auto set = load_data(config);
        const auto result = run_pipeline(set, config.pipeline);
        written = write_run_artifacts(config.out_dir, result);
        write_report(config.out_dir, config, &result, written);
        const auto& last = result.reports.back();
        out << "run complete: " << result.reports.size() << " epochs, " << last.summary.kept << " kept / "
            << last.summary.discarded << " discarded in the last epoch";
        if (last.metrics && last.metrics->retrieval) out << ", final mAP " << last.metrics->retrieval->mean_ap;
        out << "\nartifacts in " << config.out_dir.string() << '\n';
        return kExitOk;
    } catch (const std::exception& e) {
        err << "run failed: " << e.what() << '\n';
        try {
            write_report(config.out_dir, config, nullptr, written, e.what());
        } catch (const std::exception&) {
        }
        return kExitFailure;
    }
}

int cmd_ablate(const RunOverrides& o, std::ostream& out) {
    RunConfig config = resolve_config(o);
    const auto set = load_data(config);
    const auto normalized = set.l2_normalized();
    const auto stage1 =
        train_intra_camera(normalized.unlabeled(), LinearEncoder::identity(normalized.dim()), config.pipeline);

    std::string table = "method,schedule,map,rank1,refined_f_score\n";
    auto run_one = [&](const std::string& method, const std::string& schedule, const PipelineConfig& pc) {
        const auto result = run_pipeline(set, pc, &stage1);
        const auto& last = result.reports.back();
        std::string row = method + ',' + schedule;
        if (last.metrics && last.metrics->retrieval) {
            char buf[96];
            std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f", last.metrics->retrieval->mean_ap,
                          last.metrics->retrieval->rank(1), last.metrics->refined.f_score);
            row += buf;
        } else {
            row += ",,,";
        }
        table += row + '\n';
        out << row << '\n';
    };

    PipelineConfig baseline = config.pipeline;
    baseline.refine = false;
    run_one("baseline", "-", baseline);
    for (auto schedule : {DecaySchedule::None, DecaySchedule::Linear, DecaySchedule::Exponential, DecaySchedule::Cosine}) {
        PipelineConfig pc = config.pipeline;
        pc.refine = true;
        pc.refinement.schedule = schedule;
        run_one("refined", std::string(to_string(schedule)), pc);
    }
    std::filesystem::create_directories(config.out_dir);
    std::ofstream f(config.out_dir / "ablation.csv", std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write ablation.csv");
    f << table;
    std::ofstream cfg(config.out_dir / "ablation_config.json");
    cfg << to_json(config).dump(2) << '\n';
    return kExitOk;
}

struct EvalOptions {
    std::string data;
    std::string query;
    std::string gallery;
    std::string format = "bin";
    std::string assign;
    std::string encoder;
    std::string out;
};

int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err) {
    const auto format = parse_embedding_format(o.format);
    std::optional<LinearEncoder> encoder;
    if (!o.encoder.empty()) encoder = load_encoder(o.encoder);

    std::optional<ClusterQuality> quality;
    std::optional<RetrievalResult> retrieval;
    if (!o.query.empty() || !o.gallery.empty()) {
        if (o.query.empty() || o.gallery.empty()) {
            err << "eval: --query and --gallery go together\n";
            return kExitUsage;
        }
        RetrievalSplit split{load_embeddings(o.query, format), load_embeddings(o.gallery, format)};
        if (!split.query.has_identities() || !split.gallery.has_identities()) {
            err << "eval: query and gallery files must carry identity labels\n";
            return kExitFailure;
        }
        retrieval = cmc_map(split, encoder ? &*encoder : nullptr);
    }
    if (!o.data.empty()) {
        const auto set = load_embeddings(o.data, format);
        if (!set.has_identities()) {
            err << "eval: " << o.data << " carries no identity labels\n";
            return kExitFailure;
        }
        if (!o.assign.empty()) quality = pairwise_metrics(read_assignment_csv(o.assign, set.size()), set.identities());
        if (!retrieval) retrieval = self_retrieval(set, encoder ? &*encoder : nullptr);
    }
    if (!quality && !retrieval) {
        err << "eval: nothing to evaluate (give --data and/or --query/--gallery)\n";
        return kExitUsage;
    }
    const std::string text = std::string(kMetricsHeader) + '\n' + metrics_row({}, {}, quality, retrieval) + '\n';
    out << text;
    if (retrieval && retrieval->excluded_queries > 0)
        err << retrieval->excluded_queries << " queries had no cross-camera match and were excluded\n";
    if (!o.out.empty()) {
        std::ofstream f(o.out, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot write " + o.out);
        f << text;
    }
    return kExitOk;
}

} // namespace

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    kernels::apply_thread_limit_from_env();

    CLI::App app{"camera-aware pseudo-label refinement for unsupervised re-identification", "camrefine"};
    app.require_subcommand(1);

    SyntheticSpec spec;
    std::string gen_out, gen_format = "bin";
    auto* gen = app.add_subcommand("generate", "write a synthetic embedding set with camera shift");
    gen->add_option("--ids", spec.num_identities, "identities")->check(CLI::PositiveNumber);
    gen->add_option("--cams", spec.cameras, "cameras")->check(CLI::PositiveNumber);
    gen->add_option("--per", spec.images_per_identity_per_camera, "images per identity per camera")
        ->check(CLI::PositiveNumber);
    gen->add_option("--dim", spec.dim, "feature dimension")->check(CLI::PositiveNumber);
    gen->add_option("--spread", spec.identity_spread, "within-identity noise scale")->check(CLI::NonNegativeNumber);
    gen->add_option("--shift", spec.camera_shift_strength, "camera shift strength")->check(CLI::NonNegativeNumber);
    gen->add_option("--seed", spec.seed, "seed");
    gen->add_option("--out", gen_out, "output file")->required();
    gen->add_option("--format", gen_format, "csv or bin")->check(CLI::IsMember({"csv", "bin"}));

    RunOverrides run_opts;
    auto add_run_flags = [&](CLI::App* sub) {
        sub->add_option("--config", run_opts.config_path, "JSON run config")->check(CLI::ExistingFile);
        sub->add_option("--out", run_opts.out_dir, "output directory");
        sub->add_option("--seed", run_opts.seed, "seed for data, shuffling and refinement draws");
        sub->add_option("--refine", run_opts.refine, "on or off")->check(CLI::IsMember({"on", "off"}));
        sub->add_option("--schedule", run_opts.schedule, "none, linear, exponential or cosine")
            ->check(CLI::IsMember({"none", "linear", "exponential", "cosine"}));
    };
    auto* run = app.add_subcommand("run", "intra-camera then inter-camera training with label refinement");
    add_run_flags(run);
    auto* ablate = app.add_subcommand("ablate-decay", "compare decay schedules against the unrefined baseline");
    add_run_flags(ablate);

    EvalOptions eval_opts;
    auto* eval = app.add_subcommand("eval", "clustering quality and retrieval metrics");
    eval->add_option("--data", eval_opts.data, "labelled embedding file")->check(CLI::ExistingFile);
    eval->add_option("--query", eval_opts.query, "labelled query embeddings")->check(CLI::ExistingFile);
    eval->add_option("--gallery", eval_opts.gallery, "labelled gallery embeddings")->check(CLI::ExistingFile);
    eval->add_option("--format", eval_opts.format, "csv or bin")->check(CLI::IsMember({"csv", "bin"}));
    eval->add_option("--assign", eval_opts.assign, "index,cluster CSV to score against --data")
        ->check(CLI::ExistingFile);
    eval->add_option("--encoder", eval_opts.encoder, "encoder.enc1 applied before retrieval")->check(CLI::ExistingFile);
    eval->add_option("--out", eval_opts.out, "also write the metrics row here");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*gen) return cmd_generate(spec, gen_out, gen_format, out);
        if (*run) return cmd_run(run_opts, out, err);
        if (*ablate) return cmd_ablate(run_opts, out);
        if (*eval) return cmd_eval(eval_opts, out, err);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

} // namespace camref::cli
