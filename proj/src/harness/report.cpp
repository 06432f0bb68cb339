#include "bmfim/harness/report.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include "bmfim/error.hpp"
#include "bmfim/io.hpp"
#include "bmfim/harness/svg.hpp"

namespace bmfim::harness {

namespace fs = std::filesystem;

namespace {

std::string combo(Encoding e, Optimizer o) {
    return std::string(to_string(e)) + "_" + std::string(to_string(o));
}

constexpr std::array<std::pair<Encoding, Optimizer>, 4> kCombos{{{Encoding::Ising, Optimizer::Sgd},
                                                                 {Encoding::Qubo, Optimizer::Sgd},
                                                                 {Encoding::Ising, Optimizer::Ngd},
                                                                 {Encoding::Qubo, Optimizer::Ngd}}};

using Field = double TraceRow::*;

// Median/min/max over seeds of one trace column, per iteration.
void seed_band(const std::vector<RunResult>& runs, const std::string& ds, Encoding e, Optimizer o, int seeds,
               Field field, Series& out) {
    std::vector<const TrainingTrace*> traces;
    for (int s = 0; s < seeds; ++s) traces.push_back(&find_run(runs, ds, e, o, s).trace);
    std::size_t n = traces.front()->rows.size();
    for (const auto* t : traces) n = std::min(n, t->rows.size());
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<double> v;
        for (const auto* t : traces) v.push_back(t->rows[k].*field);
        out.x.push_back(traces.front()->rows[k].iteration);
        out.y.push_back(median(v));
        out.lower.push_back(*std::min_element(v.begin(), v.end()));
        out.upper.push_back(*std::max_element(v.begin(), v.end()));
    }
}

void write_band_figure(const fs::path& dir, const std::string& stem, const std::vector<RunResult>& runs,
                       const std::string& ds, int seeds, Field field, const PlotOptions& opt) {
    std::vector<Series> series;
    std::string csv = "iter";
    for (const auto& [e, o] : kCombos) {
        Series s;
        s.label = combo(e, o);
        seed_band(runs, ds, e, o, seeds, field, s);
        csv += "," + s.label + "_median," + s.label + "_min," + s.label + "_max";
        series.push_back(std::move(s));
    }
    csv += '\n';
    for (std::size_t k = 0; k < series.front().x.size(); ++k) {
        csv += std::to_string(static_cast<int>(series.front().x[k]));
        for (const auto& s : series)
            csv += "," + format_double(s.y[k]) + "," + format_double(s.lower[k]) + "," + format_double(s.upper[k]);
        csv += '\n';
    }
    write_file_atomic(dir / (stem + ".csv"), csv);
    write_file_atomic(dir / (stem + ".svg"), line_plot(series, opt));
}

std::string ising_label(double jc) {
    DatasetSpec s;
    s.kind = DatasetKind::IsingSynthetic;
    s.d = 10;
    s.coupling_scale = jc;
    return dataset_label(s);
}

std::vector<std::string> labels_present(const std::vector<RunResult>& runs) {
    std::vector<std::string> out;
    for (const auto& ds : reproduction_datasets()) {
        const auto label = dataset_label(ds);
        for (const auto& r : runs)
            if (dataset_label(r.spec.dataset) == label) {
                out.push_back(label);
                break;
            }
    }
    return out;
}

}  // namespace

void write_figures(const fs::path& dir, const std::vector<RunResult>& exact, int seeds) {
    fs::create_directories(dir);
    const auto labels = labels_present(exact);

    for (const auto& ds : labels) {
        PlotOptions kl{"KL(data || model), " + ds + ", median and min/max over seeds", "iteration", "KL (nats)", true};
        write_band_figure(dir, "kl_" + ds, exact, ds, seeds, &TraceRow::kl, kl);
        if (ds.rfind("ising", 0) == 0) {
            PlotOptions ent{"FIM spectral entropy, " + ds, "iteration", "entropy (nats)"};
            write_band_figure(dir, "entropy_" + ds, exact, ds, seeds, &TraceRow::spectral_entropy, ent);
        }
    }

    const auto mid = ising_label(1.0);
    if (std::find(labels.begin(), labels.end(), mid) == labels.end()) return;

    // Eigenvalue trajectories, seed 0, NGD.
    for (auto enc : {Encoding::Ising, Encoding::Qubo}) {
        const auto& t = find_run(exact, mid, enc, Optimizer::Ngd, 0).trace;
        write_file_atomic(dir / ("eigen_trajectory_" + std::string(to_string(enc)) + ".csv"), eigen_csv(t));
        std::vector<Series> series(t.rows.front().eigenvalues.size());
        for (std::size_t c = 0; c < series.size(); ++c) series[c].label = c < 8 ? "ev" + std::to_string(c) : "";
        for (const auto& row : t.rows)
            for (std::size_t c = 0; c < series.size() && c < row.eigenvalues.size(); ++c) {
                series[c].x.push_back(row.iteration);
                series[c].y.push_back(row.eigenvalues[c]);
            }
        PlotOptions opt{"FIM eigenvalues, " + std::string(to_string(enc)) + " NGD, " + mid + ", seed 0", "iteration",
                        "eigenvalue", true};
        write_file_atomic(dir / ("eigen_trajectory_" + std::string(to_string(enc)) + ".svg"), line_plot(series, opt));
    }

    // QUBO/NGD spectrum at the snapshot iteration across J_c.
    {
        std::vector<Series> series;
        std::string csv = "component";
        for (double jc : kCouplingScales) {
            const auto& t = find_run(exact, ising_label(jc), Encoding::Qubo, Optimizer::Ngd, 0).trace;
            const TraceRow* row = nullptr;
            for (const auto& r : t.rows)
                if (r.iteration == kMomentSnapshot) row = &r;
            if (!row) continue;
            Series s;
            s.label = "J_c=" + format_double(jc);
            for (std::size_t c = 0; c < row->eigenvalues.size(); ++c) {
                s.x.push_back(static_cast<double>(c + 1));
                s.y.push_back(row->eigenvalues[c]);
            }
            csv += ",jc" + format_double(jc);
            series.push_back(std::move(s));
        }
        csv += '\n';
        for (std::size_t c = 0; !series.empty() && c < series.front().x.size(); ++c) {
            csv += std::to_string(c + 1);
            for (const auto& s : series) csv += "," + format_double(s.y[c]);
            csv += '\n';
        }
        write_file_atomic(dir / "qubo_eigs_iter100.csv", csv);
        PlotOptions opt{"QUBO NGD FIM spectrum at iteration 100, seed 0", "component (descending)", "eigenvalue",
                        true, true};
        write_file_atomic(dir / "qubo_eigs_iter100.svg", line_plot(series, opt));
    }

    // Model moment histograms at the snapshot iteration, NGD, seed 0.
    std::string csv = "encoding,jc,order,rank,value\n";
    for (auto enc : {Encoding::Ising, Encoding::Qubo})
        for (int order = 1; order <= 4; ++order) {
            std::vector<Histogram> sets;
            for (double jc : kCouplingScales) {
                const auto& t = find_run(exact, ising_label(jc), enc, Optimizer::Ngd, 0).trace;
                const auto it = t.moments.find(kMomentSnapshot);
                if (it == t.moments.end()) continue;
                const auto v = it->second.order(order);
                sets.push_back({"J_c=" + format_double(jc), {v.begin(), v.end()}});
                for (std::size_t r = 0; r < v.size(); ++r)
                    csv += std::string(to_string(enc)) + "," + format_double(jc) + "," + std::to_string(order) + "," +
                           std::to_string(r) + "," + format_double(v[r]) + "\n";
            }
            PlotOptions opt{"order-" + std::to_string(order) + " model moments, " + std::string(to_string(enc)) +
                                " NGD, iteration 100",
                            "moment value", "count"};
            write_file_atomic(dir / ("moments_" + std::string(to_string(enc)) + "_order" + std::to_string(order) +
                                     ".svg"),
                              histogram_plot(sets, 20, opt));
        }
    write_file_atomic(dir / "moments_iter100.csv", csv);
}

ReproduceResult reproduce(const ReproduceOptions& options) {
    if (options.seeds < 1) throw InvalidArgument("--seeds must be at least 1");
    if (options.sampled_seeds > options.seeds) throw InvalidArgument("--sa-seeds cannot exceed --seeds");
    const auto runs_dir = options.out_dir / "runs";
    const auto start = std::chrono::steady_clock::now();
    ReproduceResult out;

    const auto exact_plan = exact_runs(options.seeds);
    std::vector<RunSpec> sampled_plan;
    if (options.sampled_count > 0 && options.sampled_seeds > 0)
        sampled_plan = sampled_runs(options.sampled_seeds, options.sampled_count);

    if (options.report_only) {
        auto load = [&](const std::vector<RunSpec>& plan, std::vector<RunResult>& into) {
            for (const auto& spec : plan) into.push_back(load_run(runs_dir / spec.id));
        };
        load(exact_plan, out.exact);
        load(sampled_plan, out.sampled);
    } else {
        RunOptions ro;
        ro.jobs = options.jobs;
        ro.out_dir = runs_dir;
        out.exact = run_all(exact_plan, ro);
        if (!sampled_plan.empty()) out.sampled = run_all(sampled_plan, ro);
    }
    const double run_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::vector<RunSpec> repeat;
    for (const auto& r : exact_plan)
        if (r.config.seed == 0 && (dataset_label(r.dataset) == "bas2" || dataset_label(r.dataset) == ising_label(1.0)))
            repeat.push_back(r);
    std::vector<RunResult> pool = out.exact;
    if (!sampled_plan.empty()) {
        repeat.push_back(sampled_plan.front());
        pool.insert(pool.end(), out.sampled.begin(), out.sampled.end());
    }

    out.criteria = {check_encoding_equivalence(),
                    check_fim_identities(),
                    check_zero_closed_forms(),
                    check_sampler_fidelity(),
                    check_gradient(),
                    check_sgd_ordering(out.exact, options.seeds),
                    check_ngd_invariance(out.exact, options.seeds),
                    check_entropy_ordering(out.exact, options.seeds),
                    check_small_eigen_persistence(out.exact, options.seeds),
                    check_schur(out.exact),
                    check_moment_geometry(out.exact, options.seeds),
                    check_determinism(pool, repeat, options.jobs)};

    const auto fig_dir = options.out_dir / "figures";
    write_figures(fig_dir, out.exact, options.seeds);

    std::ostringstream summary;
    summary << "bmfim reproduction report\n"
            << "exact-moment matrix: " << out.exact.size() << " runs, " << options.seeds
            << " seeds (0.." << options.seeds - 1 << "), " << kIterations << " iterations, zero initialisation\n"
            << "series in figures/ are medians over seeds with min/max bands; per-run files in runs/\n"
            << "datasets: bas2 (450), bas3 (1120), synthetic d=10 J_c 0.5/1.0/1.5 (2000 each)\n"
            << "small-eigenvalue threshold " << format_double(kSmallEigenThreshold) << ", eigenvalue split cut "
            << format_double(kEigenSplitThreshold) << "\n"
            << "run time " << static_cast<long>(run_seconds) << " s with " << options.jobs << " worker(s)\n\n";
    for (const auto& c : out.criteria) summary << format_line(c) << "\n";

    const auto mid = ising_label(1.0);
    const int q_split = count_below(find_run(out.exact, mid, Encoding::Qubo, Optimizer::Ngd, 0).trace, 10,
                                    kEigenSplitThreshold);
    const int i_split = count_below(find_run(out.exact, mid, Encoding::Ising, Optimizer::Ngd, 0).trace, 10,
                                    kEigenSplitThreshold);
    summary << "\nnote: eigenvalues below " << format_double(kEigenSplitThreshold) << " at iteration 10 (" << mid
            << ", NGD, seed 0): QUBO " << q_split << ", Ising " << i_split << (q_split > i_split ? " (split)" : "")
            << "\n";

    if (!out.sampled.empty()) {
        std::string csv = "run,exact_final_kl,sampled_final_kl,sampled_schur_fallbacks\n";
        summary << "\nMetropolis cross-check (" << options.sampled_count << " samples per iteration):\n";
        for (const auto& s : out.sampled) {
            const auto& e = find_run(out.exact, dataset_label(s.spec.dataset), s.spec.config.encoding,
                                     s.spec.config.optimizer, s.spec.config.seed);
            csv += s.spec.id + "," + format_double(e.trace.final_row().kl) + "," +
                   format_double(s.trace.final_row().kl) + "," + std::to_string(s.trace.schur_fallbacks) + "\n";
            summary << "  " << s.spec.id << ": final KL " << format_double(s.trace.final_row().kl) << " (exact "
                    << format_double(e.trace.final_row().kl) << ")"
                    << (s.trace.abort_reason ? " aborted: " + *s.trace.abort_reason : "") << "\n";
        }
        write_file_atomic(fig_dir / "sampled_crosscheck.csv", csv);
    }

    write_file_atomic(options.out_dir / "summary.txt", summary.str());
    return out;
}

}  // namespace bmfim::harness
