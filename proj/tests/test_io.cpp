#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "bmfim/error.hpp"
#include "bmfim/io.hpp"
#include "reference.hpp"

using namespace bmfim;

TEST_CASE("format_double round-trips") {
    Rng rng(9);
    for (int k = 0; k < 1000; ++k) {
        const double v = rng.normal() * std::pow(10.0, rng.normal() * 50.0);
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(std::stod(format_double(0.1)) == 0.1);
    CHECK(std::strtod(format_double(std::numeric_limits<double>::denorm_min()).c_str(), nullptr) ==
          std::numeric_limits<double>::denorm_min());
}

TEST_CASE("parameter files round-trip exactly") {
    Rng rng(3);
    for (auto enc : {Encoding::Ising, Encoding::Qubo})
        for (int d : {1, 2, 7}) {
            const auto p = reference::random_params(enc, d, 3.0, rng);
            const auto back = params_from_string(params_to_string(p));
            CHECK(back.encoding() == enc);
            CHECK(back.size() == d);
            CHECK(back.theta() == p.theta());
        }
}

TEST_CASE("parameter file grammar") {
    const auto p = params_from_string("# comment\nencoding qubo\nd 3\nQ 0 0 1.5\nQ 0 2 -2  # tail\n\nQ 1 1 0.25\n");
    CHECK(p.linear(0) == 1.5);
    CHECK(p.pair(0, 2) == -2.0);
    CHECK(p.linear(1) == 0.25);
    CHECK(p.pair(1, 2) == 0.0);

    const auto ising = params_from_string("encoding ising\nd 2\nh 1 0.5\nJ 0 1 -1\n");
    CHECK(ising.linear(1) == 0.5);
    CHECK(ising.pair(0, 1) == -1.0);

    for (const char* bad : {
             "d 2\nh 0 1\n",                             // missing encoding
             "encoding ising\nh 0 1\n",                  // missing d
             "encoding ising\nd 2\nJ 1 0 1\n",           // lower triangle
             "encoding qubo\nd 2\nQ 1 0 1\n",            // lower triangle
             "encoding ising\nd 2\nQ 0 1 1\n",           // wrong record for encoding
             "encoding ising\nd 2\nh 2 1\n",             // index out of range
             "encoding ising\nd 2\nh 0 1\nh 0 2\n",      // duplicate
             "encoding ising\nd 2\nh 0 abc\n",           // bad number
             "encoding ising\nd 2\nh 0 nan\n",           // non-finite
             "encoding potts\nd 2\n",                    // unknown encoding
             "encoding ising\nd 0\n",                    // empty model
             "encoding ising\nd 2\nw 0 1\n",             // unknown record
         })
        CHECK_THROWS_AS(params_from_string(bad), IoError);
}

TEST_CASE("dataset text round-trip") {
    const auto data = gen_ising_synthetic(5, 1.0, 40, 4);
    const auto text = dataset_to_string(data);
    const auto back = dataset_from_string(text);
    CHECK(back.samples == data.samples);
    CHECK(back.spec.kind == data.spec.kind);
    CHECK(back.spec.seed == data.spec.seed);
    CHECK(back.digest() == data.digest());

    const auto bas = gen_bas(2, 12, 1);
    CHECK(dataset_from_string(dataset_to_string(bas)).samples == bas.samples);

    CHECK_THROWS_AS(dataset_from_string(""), IoError);
    CHECK_THROWS_AS(dataset_from_string("bas 4 1 0\n0102\n"), IoError);
    CHECK_THROWS_AS(dataset_from_string("bas 4 2 0\n0101\n"), IoError);
    CHECK_THROWS_AS(dataset_from_string("bas 4 1 0\n010\n"), IoError);
    CHECK_THROWS_AS(dataset_from_string("bas 5 1 0\n01010\n"), IoError);
}

TEST_CASE("dataset metadata carries the true couplings") {
    const auto data = gen_ising_synthetic(4, 1.0, 10, 5);
    const auto meta = nlohmann::json::parse(dataset_metadata_json(data));
    CHECK(meta["kind"] == "ising");
    CHECK(meta["digest"] == data.digest());
    CHECK(meta["true_J"][0].get<double>() == data.truth->pair(0, 1));
    CHECK(meta["true_h"].size() == 4);
    CHECK_FALSE(nlohmann::json::parse(dataset_metadata_json(gen_bas(2, 6, 0))).contains("true_J"));
}

TEST_CASE("trace CSV schema") {
    const auto data = gen_bas(2, 60, 0).distribution();
    TrainConfig cfg;
    cfg.iterations = 12;
    cfg.trace_every = 4;
    cfg.moment_snapshots = {4};
    const auto trace = train(data, cfg);
    const auto csv = trace_csv(trace);
    CHECK(csv.substr(0, kTraceHeader.size()) == kTraceHeader);
    const auto rows = parse_trace_csv(csv);
    REQUIRE(rows.size() == trace.rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        CHECK(rows[k].iteration == trace.rows[k].iteration);
        CHECK(rows[k].kl == trace.rows[k].kl);
        CHECK(rows[k].lambda_min == trace.rows[k].lambda_min);
        CHECK(rows[k].schur_rhs == trace.rows[k].schur_rhs);
    }
    CHECK_THROWS_AS(parse_trace_csv("iter,kl\n0,1\n"), IoError);

    const auto eig = eigen_csv(trace);
    CHECK(eig.substr(0, eig.find('\n')) == "iter,ev0,ev1,ev2,ev3,ev4,ev5,ev6,ev7,ev8,ev9");
    const auto th = theta_csv(trace);
    CHECK(th.substr(0, th.find('\n')) == "iter,theta0,theta1,theta2,theta3,theta4,theta5,theta6,theta7,theta8,theta9");
    const auto mom = moments_csv(trace);
    CHECK(mom.substr(0, mom.find('\n')) == "iter,order,rank,value");
    // 4 + 6 + 4 + 1 moments of orders 1..4 at one snapshot.
    CHECK(std::count(mom.begin(), mom.end(), '\n') == 1 + 15);

    const auto meta = nlohmann::json::parse(trace_metadata_json(trace, "abc"));
    CHECK(meta["schema_version"] == kTraceSchemaVersion);
    CHECK(meta["dataset_digest"] == "abc");
    CHECK(meta["iterations"] == 12);
}

TEST_CASE("atomic writes") {
    const auto dir = std::filesystem::temp_directory_path() / "bmfim_test_io";
    std::filesystem::create_directories(dir);
    const auto path = dir / "x.txt";
    write_file_atomic(path, "first");
    write_file_atomic(path, "second");
    CHECK(read_file(path) == "second");
    CHECK_FALSE(std::filesystem::exists(dir / "x.txt.tmp"));
    CHECK_THROWS_AS(read_file(dir / "missing"), IoError);
    CHECK_THROWS_AS(write_file_atomic(dir / "no" / "such" / "dir" / "f", "x"), IoError);
    std::filesystem::remove_all(dir);
}
