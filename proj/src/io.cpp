#include "bmfim/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bmfim/error.hpp"

namespace bmfim {

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw IoError("write to " + tmp.string() + " failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t p = 0;
    while (p < line.size()) {
        while (p < line.size() && (line[p] == ' ' || line[p] == '\t' || line[p] == '\r')) ++p;
        const std::size_t q = p;
        while (p < line.size() && line[p] != ' ' && line[p] != '\t' && line[p] != '\r') ++p;
        if (p > q) out.push_back(line.substr(q, p - q));
    }
    return out;
}

template <typename T>
T parse_number(std::string_view token, std::string_view what, int line_no) {
    T value{};
    const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size())
        throw IoError("line " + std::to_string(line_no) + ": invalid " + std::string(what) + " '" +
                      std::string(token) + "'");
    return value;
}

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t p = 0;
    while (p <= text.size()) {
        const auto q = text.find('\n', p);
        if (q == std::string_view::npos) {
            if (p < text.size()) out.push_back(text.substr(p));
            break;
        }
        out.push_back(text.substr(p, q - p));
        p = q + 1;
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Parameter files

void write_params(std::ostream& out, const ModelParams& params) {
    const int d = params.size();
    const bool ising = params.encoding() == Encoding::Ising;
    out << "encoding " << to_string(params.encoding()) << '\n' << "d " << d << '\n';
    for (int i = 0; i < d; ++i) {
        if (ising)
            out << "h " << i << ' ' << format_double(params.linear(i)) << '\n';
        else
            out << "Q " << i << ' ' << i << ' ' << format_double(params.linear(i)) << '\n';
    }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            out << (ising ? "J " : "Q ") << i << ' ' << j << ' ' << format_double(params.pair(i, j)) << '\n';
}

std::string params_to_string(const ModelParams& params) {
    std::ostringstream ss;
    write_params(ss, params);
    return ss.str();
}

ModelParams params_from_string(std::string_view text) {
    std::optional<Encoding> encoding;
    std::optional<int> d;
    std::optional<ModelParams> params;
    std::vector<bool> seen;
    int line_no = 0;
    for (auto line : lines_of(text)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const auto tok = split_ws(line);
        if (tok.empty()) continue;
        const auto fail = [&](const std::string& msg) {
            return IoError("line " + std::to_string(line_no) + ": " + msg);
        };
        if (tok[0] == "encoding") {
            if (tok.size() != 2 || encoding) throw fail("expected a single 'encoding <ising|qubo>'");
            try {
                encoding = parse_encoding(tok[1]);
            } catch (const InvalidArgument& e) {
                throw fail(e.what());
            }
            continue;
        }
        if (tok[0] == "d") {
            if (tok.size() != 2 || d) throw fail("expected a single 'd <count>'");
            d = parse_number<int>(tok[1], "variable count", line_no);
            if (*d < 1 || *d > kMaxVariables) throw fail("variable count out of range");
            continue;
        }
        if (!encoding || !d) throw fail("'encoding' and 'd' must precede coefficients");
        if (!params) {
            params.emplace(*encoding, *d);
            seen.assign(param_count(*d), false);
        }
        const bool ising = *encoding == Encoding::Ising;
        ParamSlot slot;
        std::string_view value_tok;
        if (tok[0] == "h" && ising && tok.size() == 3) {
            slot = {parse_number<int>(tok[1], "index", line_no), -1};
            value_tok = tok[2];
        } else if ((tok[0] == "J" && ising) || (tok[0] == "Q" && !ising)) {
            if (tok.size() != 4) throw fail("expected '" + std::string(tok[0]) + " <i> <j> <value>'");
            const int i = parse_number<int>(tok[1], "index", line_no);
            const int j = parse_number<int>(tok[2], "index", line_no);
            if (ising && i >= j) throw fail("J coefficients need i < j");
            if (!ising && i > j) throw fail("Q coefficients need i <= j (upper triangle)");
            slot = i == j ? ParamSlot{i, -1} : ParamSlot{i, j};
            value_tok = tok[3];
        } else {
            throw fail("unexpected record '" + std::string(tok[0]) + "' for " +
                       std::string(to_string(*encoding)) + " parameters");
        }
        const double value = parse_number<double>(value_tok, "value", line_no);
        if (!std::isfinite(value)) throw fail("coefficients must be finite");
        if (slot.first < 0 || slot.first >= *d || slot.second >= *d) throw fail("index out of range");
        const auto k = flat_index(*d, slot);
        if (seen[k]) throw fail("duplicate coefficient");
        seen[k] = true;
        if (slot.is_linear())
            params->set_linear(slot.first, value);
        else
            params->set_pair(slot.first, slot.second, value);
    }
    if (!encoding || !d) throw IoError("parameter file lacks 'encoding' or 'd'");
    return params ? *params : ModelParams(*encoding, *d);
}

ModelParams read_params(std::istream& in) {
    std::ostringstream ss;
    ss << in.rdbuf();
    return params_from_string(ss.str());
}

// ---------------------------------------------------------------------------
// Dataset files

std::string dataset_to_string(const Dataset& dataset) {
    const int d = dataset.variables();
    std::string out = std::string(to_string(dataset.spec.kind)) + ' ' + std::to_string(d) + ' ' +
                      std::to_string(dataset.samples.size()) + ' ' + std::to_string(dataset.spec.seed) + '\n';
    out.reserve(out.size() + dataset.samples.size() * static_cast<std::size_t>(d + 1));
    for (auto key : dataset.samples) {
        for (int i = 0; i < d; ++i) out.push_back(((key >> i) & 1U) ? '1' : '0');
        out.push_back('\n');
    }
    return out;
}

Dataset dataset_from_string(std::string_view text) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw IoError("dataset file is empty");
    const auto head = split_ws(lines[0]);
    if (head.size() != 4) throw IoError("line 1: expected header 'kind d count seed'");
    Dataset out;
    try {
        out.spec.kind = parse_dataset_kind(head[0]);
    } catch (const InvalidArgument& e) {
        throw IoError(std::string("line 1: ") + e.what());
    }
    const int d = parse_number<int>(head[1], "variable count", 1);
    const auto count = parse_number<std::size_t>(head[2], "sample count", 1);
    out.spec.seed = parse_number<std::uint64_t>(head[3], "seed", 1);
    out.spec.count = count;
    if (d < 1 || d > kMaxEnumerationVariables) throw IoError("line 1: variable count out of range");
    out.spec.d = d;
    out.spec.grid = static_cast<int>(std::lround(std::sqrt(static_cast<double>(d))));
    if (out.spec.kind == DatasetKind::Bas && out.spec.grid * out.spec.grid != d)
        throw IoError("line 1: BAS dataset needs a square variable count");
    for (std::size_t n = 1; n < lines.size(); ++n) {
        auto line = lines[n];
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (static_cast<int>(line.size()) != d)
            throw IoError("line " + std::to_string(n + 1) + ": expected " + std::to_string(d) + " characters");
        std::uint64_t key = 0;
        for (int i = 0; i < d; ++i) {
            const char ch = line[static_cast<std::size_t>(i)];
            if (ch != '0' && ch != '1')
                throw IoError("line " + std::to_string(n + 1) + ": configuration must be a 0/1 string");
            if (ch == '1') key |= std::uint64_t{1} << i;
        }
        out.samples.push_back(key);
    }
    if (out.samples.size() != count)
        throw IoError("header declares " + std::to_string(count) + " samples, found " +
                      std::to_string(out.samples.size()));
    if (count == 0) throw IoError("dataset has no samples");
    return out;
}

std::string dataset_metadata_json(const Dataset& dataset) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(dataset.spec.kind);
    j["d"] = dataset.variables();
    j["count"] = dataset.samples.size();
    j["seed"] = dataset.spec.seed;
    j["digest"] = dataset.digest();
    j["digest_algorithm"] = "fnv1a64 over the dataset file text";
    if (dataset.spec.kind == DatasetKind::Bas) {
        j["grid"] = dataset.spec.grid;
        j["sampling"] = "uniform with replacement over the bars-and-stripes pattern set";
    } else {
        j["coupling_scale"] = dataset.spec.coupling_scale;
        j["coupling_law"] = "J_ij ~ Normal(0, J_c^2/d) via inverse-CDF on mt19937_64 uniforms";
        j["h_assumption"] = "h = 0";
        j["beta"] = 1.0;
    }
    if (dataset.truth) {
        const auto& t = *dataset.truth;
        std::vector<double> h, jv;
        for (int i = 0; i < t.size(); ++i) h.push_back(t.linear(i));
        for (int i = 0; i < t.size(); ++i)
            for (int k = i + 1; k < t.size(); ++k) jv.push_back(t.pair(i, k));
        j["true_h"] = h;
        j["true_J"] = jv;
        j["true_params"] = params_to_string(t);
    }
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Traces

std::string trace_csv(const TrainingTrace& trace) {
    std::string out(kTraceHeader);
    out += '\n';
    for (const auto& r : trace.rows) {
        out += std::to_string(r.iteration);
        for (double v : {r.kl, r.grad_norm, r.eta, r.lambda_max, r.lambda_min, r.spectral_entropy,
                         r.offblock_ratio, r.schur_lhs, r.schur_rhs}) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

std::string eigen_csv(const TrainingTrace& trace) {
    std::string out = "iter";
    const auto n = param_count(trace.d);
    for (std::size_t k = 0; k < n; ++k) out += ",ev" + std::to_string(k);
    out += '\n';
    for (const auto& r : trace.rows) {
        out += std::to_string(r.iteration);
        for (std::size_t k = 0; k < n; ++k) {
            out += ',';
            out += k < r.eigenvalues.size() ? format_double(r.eigenvalues[k]) : "nan";
        }
        out += '\n';
    }
    return out;
}

std::string theta_csv(const TrainingTrace& trace) {
    std::string out = "iter";
    const auto n = param_count(trace.d);
    for (std::size_t k = 0; k < n; ++k) out += ",theta" + std::to_string(k);
    out += '\n';
    for (const auto& r : trace.rows) {
        out += std::to_string(r.iteration);
        for (Eigen::Index k = 0; k < r.theta.size(); ++k) {
            out += ',';
            out += format_double(r.theta[k]);
        }
        out += '\n';
    }
    return out;
}

std::string moments_csv(const TrainingTrace& trace) {
    std::string out = "iter,order,rank,value\n";
    for (const auto& [iter, table] : trace.moments)
        for (int k = 1; k <= table.max_order(); ++k) {
            const auto values = table.order(k);
            for (std::size_t r = 0; r < values.size(); ++r)
                out += std::to_string(iter) + ',' + std::to_string(k) + ',' + std::to_string(r) + ',' +
                       format_double(values[r]) + '\n';
        }
    return out;
}

std::string trace_metadata_json(const TrainingTrace& trace, std::string_view dataset_digest) {
    const auto& c = trace.config;
    nlohmann::ordered_json j;
    j["schema_version"] = kTraceSchemaVersion;
    j["trace_columns"] = kTraceHeader;
    j["dataset_digest"] = dataset_digest;
    j["d"] = trace.d;
    j["encoding"] = to_string(c.encoding);
    j["optimizer"] = to_string(c.optimizer);
    j["beta"] = c.beta;
    j["iterations"] = c.iterations;
    j["eta_ngd"] = c.eta_ngd;
    j["eta_sgd_numerator"] = c.eta_sgd_numerator;
    j["damping"] = c.damping;
    j["moment_source"] = to_string(c.moment_source);
    j["fim_source"] = to_string(c.fim_source);
    j["sample_count"] = c.sample_count;
    j["sampler"] = {{"chains", c.sampler.chains},
                    {"sequential", c.sampler.sequential},
                    {"beta_start", c.sampler.schedule.beta_start},
                    {"beta_end", c.sampler.schedule.beta_end},
                    {"sweeps_anneal", c.sampler.schedule.sweeps_anneal},
                    {"sweeps_burnin", c.sampler.schedule.sweeps_burnin},
                    {"sweeps_thin", c.sampler.schedule.sweeps_thin},
                    {"refresh_interval", c.sampler.refresh_interval}};
    j["seed"] = c.seed;
    j["trace_every"] = c.trace_every;
    j["initialization"] = c.initial ? "file" : "zero";
    j["kl_direction"] = "D(p_data || p_model), nats";
    j["entropy_log_base"] = "e";
    j["gradient_convention"] = "g = beta (E_data[phi] - E_model[phi]) = grad NLL; step theta - eta g";
    j["fim_scaling"] = "beta^2 * Cov(phi)";
    j["stopping_rule"] = "fixed iteration budget, no early stop";
    j["schur_fallbacks"] = trace.schur_fallbacks;
    j["aborted"] = trace.abort_reason.has_value();
    if (trace.abort_reason) j["abort_reason"] = *trace.abort_reason;
    j["rows"] = trace.rows.size();
    j["wall_seconds"] = trace.wall_seconds;
    return j.dump(2) + "\n";
}

std::vector<TraceRow> parse_trace_csv(std::string_view text) {
    const auto lines = lines_of(text);
    if (lines.empty() || lines[0] != kTraceHeader) throw IoError("trace header does not match schema");
    std::vector<TraceRow> rows;
    for (std::size_t n = 1; n < lines.size(); ++n) {
        if (lines[n].empty()) continue;
        std::vector<std::string_view> f;
        std::size_t p = 0;
        const auto line = lines[n];
        while (true) {
            const auto q = line.find(',', p);
            f.push_back(line.substr(p, q == std::string_view::npos ? std::string_view::npos : q - p));
            if (q == std::string_view::npos) break;
            p = q + 1;
        }
        if (f.size() != 10) throw IoError("trace line " + std::to_string(n + 1) + " has wrong column count");
        const int ln = static_cast<int>(n + 1);
        TraceRow r;
        r.iteration = parse_number<int>(f[0], "iteration", ln);
        double* dst[] = {&r.kl, &r.grad_norm, &r.eta, &r.lambda_max, &r.lambda_min, &r.spectral_entropy,
                         &r.offblock_ratio, &r.schur_lhs, &r.schur_rhs};
        for (std::size_t k = 0; k < 9; ++k) *dst[k] = parse_number<double>(f[k + 1], "value", ln);
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace bmfim
