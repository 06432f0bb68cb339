// bmfim command-line front end: gen-data, train, analyze, reproduce.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "bmfim/error.hpp"
#include "bmfim/harness/report.hpp"
#include "bmfim/harness/svg.hpp"
#include "bmfim/io.hpp"

namespace fs = std::filesystem;
using namespace bmfim;

namespace {

enum Exit : int { kOk = 0, kUsage = 2, kIo = 3, kDimension = 4, kInternal = 1 };

struct Globals {
    std::uint64_t seed = 0;
    int jobs = std::max(1U, std::thread::hardware_concurrency());
    std::string out;
};

fs::path out_root(const Globals& g) {
    if (!g.out.empty()) return g.out;
    return harness::output_root("bmfim_out");
}

struct GenArgs {
    std::string kind;
    int n = 2;
    int d = 10;
    double jc = 1.0;
    std::size_t count = 0;
    std::string name;
};

int cmd_gen_data(const Globals& g, const GenArgs& a) {
    DatasetSpec spec;
    spec.kind = parse_dataset_kind(a.kind);
    spec.grid = a.n;
    spec.d = a.d;
    spec.coupling_scale = a.jc;
    spec.count = a.count;
    spec.seed = g.seed;
    const auto data = generate(spec);
    const auto dir = out_root(g);
    fs::create_directories(dir);
    const auto stem = a.name.empty() ? harness::dataset_label(spec) + "-s" + std::to_string(spec.seed) : a.name;
    const auto path = dir / (stem + ".txt");
    write_file_atomic(path, dataset_to_string(data));
    write_file_atomic(dir / (stem + ".meta.json"), dataset_metadata_json(data));
    std::cout << path.string() << " " << data.digest() << "\n";
    return kOk;
}

struct TrainArgs {
    std::string data;
    std::string encoding = "ising";
    std::string opt = "sgd";
    std::string moments = "exact";
    std::string fim = "exact";
    std::string init;
    std::string run_id;
    bool write_fims = false;
    TrainConfig cfg;
};

int cmd_train(const Globals& g, TrainArgs a) {
    auto& cfg = a.cfg;
    cfg.encoding = parse_encoding(a.encoding);
    cfg.optimizer = parse_optimizer(a.opt);
    cfg.moment_source = parse_expectation_source(a.moments);
    cfg.fim_source = parse_expectation_source(a.fim);
    cfg.seed = g.seed;
    cfg.sampler.parallel = g.jobs > 1;
    cfg.validate();

    const auto dataset = dataset_from_string(read_file(a.data));
    if (!a.init.empty()) {
        cfg.initial = params_from_string(read_file(a.init));
        if (cfg.initial->size() != dataset.variables())
            throw DimensionError("--init has d=" + std::to_string(cfg.initial->size()) + " but --data has d=" +
                                 std::to_string(dataset.variables()));
    }

    harness::RunResult result;
    result.spec.dataset = dataset.spec;
    result.spec.config = cfg;
    const bool sampled = cfg.moment_source == ExpectationSource::Sampled || cfg.fim_source == ExpectationSource::Sampled;
    result.spec.id = !a.run_id.empty() ? a.run_id
                                       : fs::path(a.data).stem().string() + "-" + a.encoding + "-" + a.opt +
                                             (sampled ? "-sa" : "-exact") + "-s" + std::to_string(cfg.seed);
    result.dataset_digest = dataset.digest();
    result.trace = train(dataset.distribution(), cfg);

    const auto dir = out_root(g) / result.spec.id;
    harness::write_run(dir, result, a.write_fims);
    const auto& last = result.trace.final_row();
    std::cout << dir.string() << " iterations " << last.iteration << " final_kl " << format_double(last.kl) << "\n";
    if (result.trace.abort_reason) std::cout << "aborted: " << *result.trace.abort_reason << "\n";
    return kOk;
}

int cmd_analyze(const std::vector<std::string>& dirs) {
    for (const auto& d : dirs) {
        const auto run = harness::load_run(d);
        const auto& rows = run.trace.rows;
        std::vector<double> ent;
        double kl_min = rows.front().kl, lmin = rows.front().lambda_min, lmax = rows.front().lambda_max;
        int schur_bad = 0;
        for (const auto& r : rows) {
            ent.push_back(r.spectral_entropy);
            kl_min = std::min(kl_min, r.kl);
            lmin = std::min(lmin, r.lambda_min);
            lmax = std::max(lmax, r.lambda_max);
            if (!(r.schur_lhs <= r.schur_rhs + 1e-9)) ++schur_bad;
        }
        std::cout << run.spec.id << "\n"
                  << "  rows " << rows.size() << ", last iteration " << rows.back().iteration << "\n"
                  << "  kl first " << format_double(rows.front().kl) << " final " << format_double(rows.back().kl)
                  << " min " << format_double(kl_min) << "\n"
                  << "  spectral entropy median " << format_double(harness::median(ent)) << "\n"
                  << "  lambda_max peak " << format_double(lmax) << ", lambda_min floor " << format_double(lmin)
                  << "\n"
                  << "  schur bound violations " << schur_bad << ", fallbacks " << run.trace.schur_fallbacks << "\n";
        if (run.trace.abort_reason) std::cout << "  aborted: " << *run.trace.abort_reason << "\n";

        harness::Series kl{"kl", {}, {}, {}, {}}, en{"entropy", {}, {}, {}, {}};
        std::vector<harness::Series> eig(rows.front().eigenvalues.size());
        for (const auto& r : rows) {
            kl.x.push_back(r.iteration);
            kl.y.push_back(r.kl);
            en.x.push_back(r.iteration);
            en.y.push_back(r.spectral_entropy);
            for (std::size_t c = 0; c < eig.size() && c < r.eigenvalues.size(); ++c) {
                eig[c].x.push_back(r.iteration);
                eig[c].y.push_back(r.eigenvalues[c]);
            }
        }
        write_file_atomic(fs::path(d) / "kl.svg",
                          harness::line_plot({kl}, {run.spec.id + " KL", "iteration", "KL (nats)", true}));
        write_file_atomic(fs::path(d) / "entropy.svg",
                          harness::line_plot({en}, {run.spec.id + " spectral entropy", "iteration", "entropy"}));
        write_file_atomic(fs::path(d) / "eigenvalues.svg",
                          harness::line_plot(eig, {run.spec.id + " FIM eigenvalues", "iteration", "eigenvalue", true}));
    }
    return kOk;
}

int cmd_reproduce(const Globals& g, harness::ReproduceOptions o) {
    o.out_dir = out_root(g);
    o.jobs = g.jobs;
    const auto result = harness::reproduce(o);
    for (const auto& c : result.criteria) std::cout << harness::format_line(c) << "\n";
    std::cout << "report: " << (o.out_dir / "summary.txt").string() << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Boltzmann machine training and Fisher information analysis under Ising and QUBO encodings"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "random seed");
    app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::Range(1, 1024));
    app.add_option("--out", g.out, "output root (default $BMFIM_OUT, else ./bmfim_out)");

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-data", "generate a bars-and-stripes or synthetic Ising dataset");
    gen_cmd->add_option("--kind", gen.kind, "bas or ising")->required()->check(CLI::IsMember({"bas", "ising"}));
    gen_cmd->add_option("--n", gen.n, "BAS grid side")->check(CLI::Range(1, 4));
    gen_cmd->add_option("--d", gen.d, "synthetic variable count")->check(CLI::Range(1, 24));
    gen_cmd->add_option("--jc", gen.jc, "coupling scale J_c")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--count", gen.count, "number of samples")->required()->check(CLI::PositiveNumber);
    gen_cmd->add_option("--name", gen.name, "file stem (default derived from the spec)");

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train", "train one model on a dataset file");
    train_cmd->add_option("--data", tr.data, "dataset file")->required();
    train_cmd->add_option("--encoding", tr.encoding, "ising or qubo")->check(CLI::IsMember({"ising", "qubo"}));
    train_cmd->add_option("--opt", tr.opt, "sgd or ngd")->check(CLI::IsMember({"sgd", "ngd"}));
    train_cmd->add_option("--eta", tr.cfg.eta_ngd, "NGD learning rate")->check(CLI::PositiveNumber);
    train_cmd->add_option("--eta-sgd", tr.cfg.eta_sgd_numerator, "SGD rate numerator (divided by lambda_max)")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--damping", tr.cfg.damping, "NGD damping")->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--beta", tr.cfg.beta, "inverse temperature")->check(CLI::PositiveNumber);
    train_cmd->add_option("--iterations", tr.cfg.iterations, "iteration budget")->check(CLI::Range(1, 10000000));
    train_cmd->add_option("--moments", tr.moments, "model moments: exact or sa")->check(CLI::IsMember({"exact", "sa"}));
    train_cmd->add_option("--fim", tr.fim, "FIM moments: exact or sa")->check(CLI::IsMember({"exact", "sa"}));
    train_cmd->add_option("--samples", tr.cfg.sample_count, "samples per iteration in sa mode")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--chains", tr.cfg.sampler.chains, "sampler chains")->check(CLI::Range(1, 4096));
    train_cmd->add_flag("--sequential", tr.cfg.sampler.sequential, "sweep sites in order");
    train_cmd->add_option("--beta-start", tr.cfg.sampler.schedule.beta_start, "anneal start factor")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--beta-end", tr.cfg.sampler.schedule.beta_end, "anneal end factor")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--anneal-sweeps", tr.cfg.sampler.schedule.sweeps_anneal)->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--burnin-sweeps", tr.cfg.sampler.schedule.sweeps_burnin)->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--thin", tr.cfg.sampler.schedule.sweeps_thin)->check(CLI::Range(1, 1000000));
    train_cmd->add_option("--trace-every", tr.cfg.trace_every, "record every k-th iteration")
        ->check(CLI::Range(1, 10000000));
    train_cmd->add_option("--moment-snapshots", tr.cfg.moment_snapshots, "iterations whose moments are saved");
    train_cmd->add_option("--fim-snapshots", tr.cfg.fim_snapshots, "iterations whose FIM is saved");
    train_cmd->add_flag("--write-fims", tr.write_fims, "write fim_<iter>.csv for each FIM snapshot");
    train_cmd->add_option("--init", tr.init, "initial parameter file (zero parameters if omitted)");
    train_cmd->add_option("--run-id", tr.run_id, "output directory name");

    std::vector<std::string> analyze_dirs;
    auto* analyze_cmd = app.add_subcommand("analyze", "summarize run directories and draw their plots");
    analyze_cmd->add_option("runs", analyze_dirs, "run directories")->required();

    harness::ReproduceOptions rep;
    auto* rep_cmd = app.add_subcommand("reproduce", "run the full comparison matrix and write the report");
    rep_cmd->add_option("--seeds", rep.seeds, "seeds per configuration")->check(CLI::Range(1, 1000));
    rep_cmd->add_option("--sa-samples", rep.sampled_count, "samples per iteration for the Metropolis cross-check");
    rep_cmd->add_option("--sa-seeds", rep.sampled_seeds, "seeds for the cross-check (0 skips it)")
        ->check(CLI::Range(0, 1000));
    rep_cmd->add_flag("--report-only", rep.report_only, "rebuild the report from existing run directories");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*gen_cmd) return cmd_gen_data(g, gen);
        if (*train_cmd) return cmd_train(g, tr);
        if (*analyze_cmd) return cmd_analyze(analyze_dirs);
        if (*rep_cmd) return cmd_reproduce(g, rep);
    } catch (const DimensionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDimension;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInternal;
    }
    return kUsage;
}
