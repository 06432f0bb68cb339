#include "bmfim/harness/experiment.hpp"

#include <atomic>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "bmfim/error.hpp"
#include "bmfim/io.hpp"

namespace bmfim::harness {

namespace fs = std::filesystem;

std::string dataset_label(const DatasetSpec& spec) {
    if (spec.kind == DatasetKind::Bas) return "bas" + std::to_string(spec.grid);
    char buf[64];
    std::snprintf(buf, sizeof buf, "ising-d%d-jc%.2g", spec.d, spec.coupling_scale);
    std::string out = buf;
    if (out.find('.') == std::string::npos) out += ".0";
    return out;
}

std::string run_id(const DatasetSpec& dataset, const TrainConfig& config) {
    const bool sampled = config.moment_source == ExpectationSource::Sampled ||
                         config.fim_source == ExpectationSource::Sampled;
    return dataset_label(dataset) + "-" + std::string(to_string(config.encoding)) + "-" +
           std::string(to_string(config.optimizer)) + (sampled ? "-sa" : "-exact") + "-s" +
           std::to_string(config.seed);
}

std::vector<RunSpec> ExperimentPlan::expand() const {
    std::vector<RunSpec> out;
    std::set<std::string> ids;
    for (const auto& ds : datasets)
        for (auto seed : seeds)
            for (auto enc : encodings)
                for (auto opt : optimizers) {
                    RunSpec r;
                    r.dataset = ds;
                    r.dataset.seed = seed;
                    r.config = base;
                    r.config.encoding = enc;
                    r.config.optimizer = opt;
                    r.config.seed = seed;
                    r.id = run_id(r.dataset, r.config);
                    if (!ids.insert(r.id).second) throw InvalidArgument("duplicate run id " + r.id);
                    out.push_back(std::move(r));
                }
    return out;
}

RunResult run_one(const RunSpec& run, const Dataset& dataset) {
    if (dataset.variables() != run.dataset.variables())
        throw DimensionError("dataset has " + std::to_string(dataset.variables()) + " variables, run " + run.id +
                             " expects " + std::to_string(run.dataset.variables()));
    RunResult out;
    out.spec = run;
    out.dataset_digest = dataset.digest();
    out.trace = train(dataset.distribution(), run.config);
    return out;
}

namespace {

std::string dataset_key(const DatasetSpec& s) {
    return dataset_label(s) + "/" + std::to_string(s.count) + "/" + std::to_string(s.seed) + "/" +
           format_double(s.coupling_scale);
}

}  // namespace

std::vector<RunResult> run_all(const std::vector<RunSpec>& runs, const RunOptions& options) {
    std::map<std::string, Dataset> datasets;
    for (const auto& r : runs) {
        const auto key = dataset_key(r.dataset);
        if (!datasets.count(key)) datasets.emplace(key, generate(r.dataset));
    }
    if (!options.out_dir.empty()) fs::create_directories(options.out_dir);

    std::vector<RunResult> results(runs.size());
    std::vector<std::exception_ptr> errors(runs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < runs.size(); k = next++) {
            try {
                results[k] = run_one(runs[k], datasets.at(dataset_key(runs[k].dataset)));
                if (!options.out_dir.empty())
                    write_run(options.out_dir / runs[k].id, results[k], options.write_fims);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(runs.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

void write_run(const fs::path& dir, const RunResult& result, bool write_fims) {
    fs::create_directories(dir);
    const auto& t = result.trace;
    write_file_atomic(dir / "trace.csv", trace_csv(t));
    write_file_atomic(dir / "eigs.csv", eigen_csv(t));
    write_file_atomic(dir / "theta.csv", theta_csv(t));
    write_file_atomic(dir / "moments.csv", moments_csv(t));

    auto meta = nlohmann::ordered_json::parse(trace_metadata_json(t, result.dataset_digest));
    meta["run_id"] = result.spec.id;
    meta["dataset"] = {{"kind", to_string(result.spec.dataset.kind)},
                       {"label", dataset_label(result.spec.dataset)},
                       {"grid", result.spec.dataset.grid},
                       {"d", result.spec.dataset.variables()},
                       {"coupling_scale", result.spec.dataset.coupling_scale},
                       {"count", result.spec.dataset.count},
                       {"seed", result.spec.dataset.seed}};
    std::vector<int> snaps;
    for (const auto& [iter, table] : t.moments) snaps.push_back(iter);
    meta["moment_snapshots"] = snaps;
    write_file_atomic(dir / "meta.json", meta.dump(2) + "\n");

    if (write_fims)
        for (const auto& [iter, fim] : t.fims) {
            std::ostringstream out;
            write_fim_csv(out, fim, iter);
            write_file_atomic(dir / ("fim_" + std::to_string(iter) + ".csv"), out.str());
        }
}

namespace {

std::vector<std::vector<double>> parse_numeric_csv(const std::string& text, const fs::path& path) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t p = 0;
        while (p <= line.size()) {
            auto q = line.find(',', p);
            if (q == std::string::npos) q = line.size();
            double v = 0.0;
            const auto res = std::from_chars(line.data() + p, line.data() + q, v);
            if (res.ec != std::errc{} || res.ptr != line.data() + q)
                throw IoError(path.string() + ": malformed number in '" + line + "'");
            row.push_back(v);
            p = q + 1;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

RunResult load_run(const fs::path& dir) {
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(read_file(dir / "meta.json"));
    } catch (const nlohmann::json::exception& e) {
        throw IoError((dir / "meta.json").string() + ": " + e.what());
    }
    if (!meta.contains("schema_version") || meta["schema_version"] != kTraceSchemaVersion)
        throw IoError(dir.string() + ": trace schema version " +
                      (meta.contains("schema_version") ? meta["schema_version"].dump() : std::string("missing")) +
                      " does not match " + std::to_string(kTraceSchemaVersion));
    RunResult out;
    try {
        const auto& ds = meta.at("dataset");
        out.spec.id = meta.at("run_id").get<std::string>();
        out.spec.dataset.kind = parse_dataset_kind(ds.at("kind").get<std::string>());
        out.spec.dataset.grid = ds.at("grid").get<int>();
        out.spec.dataset.d = ds.at("d").get<int>();
        out.spec.dataset.coupling_scale = ds.at("coupling_scale").get<double>();
        out.spec.dataset.count = ds.at("count").get<std::size_t>();
        out.spec.dataset.seed = ds.at("seed").get<std::uint64_t>();
        out.dataset_digest = meta.at("dataset_digest").get<std::string>();

        auto& c = out.spec.config;
        c.encoding = parse_encoding(meta.at("encoding").get<std::string>());
        c.optimizer = parse_optimizer(meta.at("optimizer").get<std::string>());
        c.beta = meta.at("beta").get<double>();
        c.iterations = meta.at("iterations").get<int>();
        c.eta_ngd = meta.at("eta_ngd").get<double>();
        c.eta_sgd_numerator = meta.at("eta_sgd_numerator").get<double>();
        c.damping = meta.at("damping").get<double>();
        c.moment_source = parse_expectation_source(meta.at("moment_source").get<std::string>());
        c.fim_source = parse_expectation_source(meta.at("fim_source").get<std::string>());
        c.sample_count = meta.at("sample_count").get<std::size_t>();
        c.seed = meta.at("seed").get<std::uint64_t>();
        c.trace_every = meta.at("trace_every").get<int>();
        c.moment_snapshots = meta.at("moment_snapshots").get<std::vector<int>>();
        out.trace.d = meta.at("d").get<int>();
        out.trace.schur_fallbacks = meta.at("schur_fallbacks").get<int>();
        out.trace.wall_seconds = meta.at("wall_seconds").get<double>();
        if (meta.at("aborted").get<bool>()) out.trace.abort_reason = meta.at("abort_reason").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError((dir / "meta.json").string() + ": " + e.what());
    }
    out.trace.config = out.spec.config;
    out.trace.rows = parse_trace_csv(read_file(dir / "trace.csv"));

    const auto eigs = parse_numeric_csv(read_file(dir / "eigs.csv"), dir / "eigs.csv");
    const auto theta = parse_numeric_csv(read_file(dir / "theta.csv"), dir / "theta.csv");
    if (eigs.size() != out.trace.rows.size() || theta.size() != out.trace.rows.size())
        throw IoError(dir.string() + ": eigs.csv/theta.csv row count differs from trace.csv");
    for (std::size_t k = 0; k < out.trace.rows.size(); ++k) {
        auto& row = out.trace.rows[k];
        row.eigenvalues.assign(eigs[k].begin() + 1, eigs[k].end());
        row.theta = Eigen::Map<const Eigen::VectorXd>(theta[k].data() + 1,
                                                       static_cast<Eigen::Index>(theta[k].size() - 1));
    }

    for (const auto& m : parse_numeric_csv(read_file(dir / "moments.csv"), dir / "moments.csv")) {
        if (m.size() != 4) throw IoError(dir.string() + ": moments.csv needs 4 columns");
        const int iter = static_cast<int>(m[0]);
        const int order = static_cast<int>(m[1]);
        auto it = out.trace.moments.find(iter);
        if (it == out.trace.moments.end())
            it = out.trace.moments
                     .emplace(iter, MomentTable(out.trace.d, out.spec.config.encoding, 4,
                                               out.spec.config.moment_source == ExpectationSource::Sampled
                                                   ? MomentSource::Empirical
                                                   : MomentSource::Exact))
                     .first;
        auto values = it->second.order(order);
        const auto rank = static_cast<std::size_t>(m[2]);
        if (rank >= values.size()) throw IoError(dir.string() + ": moment rank out of range");
        values[rank] = m[3];
    }
    return out;
}

fs::path output_root(const fs::path& fallback) {
    const char* env = std::getenv("BMFIM_OUT");
    if (env && *env) return env;
    return fallback;
}

}  // namespace bmfim::harness
