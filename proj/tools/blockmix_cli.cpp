// blockmix: sampling, oracle queries, moment estimation, mixing tables,
// and the verification suites, from the command line.
//
// Exit status: 0 on success, 2 on usage errors, 1 on test failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "blockmix/construction.hpp"
#include "blockmix/harness.hpp"
#include "blockmix/oracle.hpp"
#include "blockmix/statistics.hpp"

namespace {

using blockmix::ConstructionParams;
using blockmix::Process;
using blockmix::RngStream;

Process parse_process(const std::string& name) {
    if (name == "y") return Process::Y;
    if (name == "x") return Process::X;
    if (name == "xtilde") return Process::XTilde;
    throw CLI::ValidationError("--process", "must be one of y, x, xtilde");
}

// Writes atomically enough for our purposes: build the full content first,
// then open the file, so a failed run leaves no partial output behind.
void write_whole_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

nlohmann::ordered_json report_json(const blockmix::MomentReport& r) {
    nlohmann::ordered_json j;
    j["estimate"] = r.estimate;
    j["std_error"] = r.std_error;
    j["reps"] = r.reps;
    if (r.exact_ref) j["reference"] = *r.exact_ref;
    if (r.z_score) j["z_score"] = *r.z_score;
    return j;
}

void print_report(const blockmix::MomentReport& r, bool as_json) {
    if (as_json) {
        std::cout << report_json(r).dump(2) << "\n";
        return;
    }
    std::cout.precision(10);
    std::cout << "estimate " << r.estimate << "  std_error " << r.std_error
              << "  reps " << r.reps;
    if (r.exact_ref) std::cout << "  reference " << *r.exact_ref;
    if (r.z_score) std::cout << "  z " << *r.z_score;
    std::cout << "\n";
}

struct SampleArgs {
    std::string process = "xtilde";
    int L = 6;
    int level = 0;
    std::int64_t length = 0;
    std::uint64_t seed = 0;
    double p = 0.5;
    std::string out;
};

int run_sample(const SampleArgs& a) {
    ConstructionParams params;
    params.arity = a.L;
    params.level = a.level;
    params.thinning = a.p;
    params.seed = a.seed;
    params.validate();
    const Process process = parse_process(a.process);
    RngStream stream(a.seed);
    blockmix::PathWindow window;
    switch (process) {
        case Process::Y:
            window = blockmix::sample_y_window(params, a.length, stream);
            break;
        case Process::X:
            window = blockmix::sample_x_window(params, a.length, stream);
            break;
        case Process::XTilde:
            window = blockmix::sample_xtilde_window(params, a.length, stream);
            break;
    }
    std::ostringstream csv;
    csv.precision(17);
    csv << (window.marks ? "index,value,mark\n" : "index,value\n");
    for (std::size_t i = 0; i < window.values.size(); ++i) {
        csv << i << ',' << window.values[i];
        if (window.marks) csv << ',' << int((*window.marks)[i]);
        csv << '\n';
    }
    if (a.out.empty())
        std::cout << csv.str();
    else
        write_whole_file(a.out, csv.str());
    return 0;
}

struct MomentArgs {
    std::string process = "xtilde";
    int L = 6;
    int level = 0;
    double p = 0.5;
    std::int64_t h = 1;
    int power = 2;
    std::int64_t reps = 1'000'000;
    std::uint64_t seed = 0;
    int workers = 1;
    bool json = false;
    double reference = 0.0;
    bool have_reference = false;
};

int run_moment(const MomentArgs& a) {
    ConstructionParams params;
    params.arity = a.L;
    params.level = a.level;
    params.thinning = a.p;
    params.seed = a.seed;
    params.validate();
    auto report = blockmix::estimate_moment(parse_process(a.process), params,
                                            a.h, a.power, a.reps,
                                            RngStream(a.seed), a.workers);
    if (a.have_reference) report.with_reference(a.reference);
    print_report(report, a.json);
    return 0;
}

struct OracleArgs {
    std::string query;
    int L = 6;
    int n = 0;
    std::int64_t h = 1;
    int power = 6;
    std::int64_t m = 0;
    std::int64_t d = 6;
    double p = 0.5;
    bool shifted = false;
    int digits = 6;
    bool json = false;
};

int run_oracle(const OracleArgs& a) {
    namespace oracle = blockmix::oracle;
    nlohmann::ordered_json j;
    j["query"] = a.query;
    std::cout.precision(15);
    if (a.query == "abs-uniform-moment") {
        j["value"] = oracle::abs_uniform_moment(a.power);
    } else if (a.query == "gaussian-even-moment") {
        j["value"] = oracle::gaussian_even_moment(a.L);
    } else if (a.query == "partial-sum-moment") {
        j["value"] = oracle::exact_partial_sum_moment_level1(
            a.L, static_cast<int>(a.h), a.power, a.shifted);
    } else if (a.query == "deficit-bound") {
        j["value"] = oracle::deficit_bound(a.L, a.n);
    } else if (a.query == "clt-gap-constant") {
        j["value"] = oracle::clt_gap_constant(a.L);
    } else if (a.query == "clt-gap-constant-finite-h") {
        j["value"] = oracle::clt_gap_constant_finite_h(a.L);
    } else if (a.query == "gaussian-mixture-moment") {
        j["value"] = oracle::gaussian_mixture_moment(a.h, a.L, a.p);
    } else if (a.query == "binomial-mod-distribution") {
        j["value"] = oracle::binomial_mod_distribution(a.m, a.d);
    } else if (a.query == "binomial-tail-half") {
        j["value"] = oracle::binomial_tail_half(a.h);
    } else if (a.query == "least-equidistribution-trials") {
        j["value"] = oracle::least_equidistribution_trials(a.d, a.digits);
    } else if (a.query == "normalized-fourth-moment") {
        j["value"] = oracle::normalized_fourth_moment(a.h);
    } else {
        throw CLI::ValidationError("--query", "unknown oracle query: " + a.query);
    }
    if (a.json) {
        std::cout << j.dump(2) << "\n";
    } else if (j["value"].is_array()) {
        for (const auto& v : j["value"]) std::cout << v.get<double>() << "\n";
    } else if (j["value"].is_number_integer()) {
        std::cout << j["value"].get<std::int64_t>() << "\n";
    } else {
        std::cout << j["value"].get<double>() << "\n";
    }
    return 0;
}

struct MixingArgs {
    int L = 6;
    int level = 0;
    double p = 0.5;
    std::string n_list = "4,16,64";
    std::string spec_a;
    std::string spec_b;
    std::int64_t reps = 100'000;
    std::uint64_t seed = 0;
    int workers = 1;
    bool json = false;
};

int run_mixing(const MixingArgs& a) {
    ConstructionParams params;
    params.arity = a.L;
    params.level = a.level;
    params.thinning = a.p;
    params.seed = a.seed;
    params.validate();
    const auto win = static_cast<std::size_t>(params.block_length());
    const auto spec_a = blockmix::parse_cylinder_spec(a.spec_a, win);
    const auto spec_b = blockmix::parse_cylinder_spec(a.spec_b, win);
    std::vector<std::int64_t> lags;
    std::stringstream ss(a.n_list);
    std::string tok;
    while (std::getline(ss, tok, ',')) lags.push_back(std::stoll(tok));
    if (lags.empty()) throw CLI::ValidationError("--N-list", "no lags given");

    RngStream stream(a.seed);
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    if (!a.json) std::cout << "N,gap,std_error,reps\n";
    for (std::int64_t lag : lags) {
        const auto gap = blockmix::mixing_gap(
            params, spec_a, spec_b, lag, a.reps,
            stream.derive(static_cast<std::uint64_t>(lag)), a.workers);
        if (a.json) {
            nlohmann::ordered_json row;
            row["N"] = lag;
            row["gap"] = gap.estimate;
            row["std_error"] = gap.std_error;
            row["reps"] = gap.reps;
            rows.push_back(row);
        } else {
            std::cout.precision(10);
            std::cout << lag << ',' << gap.estimate << ',' << gap.std_error
                      << ',' << gap.reps << "\n";
        }
    }
    if (a.json) std::cout << rows.dump(2) << "\n";
    return 0;
}

struct VerifyArgs {
    std::string config_path;
    int workers = 0;   // 0: keep the config's value
    bool no_persist = false;
};

int run_verify(const VerifyArgs& a) {
    blockmix::harness::ExperimentConfig cfg;
    if (!a.config_path.empty()) cfg = blockmix::harness::load_config(a.config_path);
    if (a.workers > 0) cfg.workers = a.workers;
    const auto summary =
        blockmix::harness::verify_suite(cfg, !a.no_persist, &std::cout);
    std::cout << summary.total_pass << " pass, " << summary.total_fail
              << " fail\n";
    return summary.status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"block-hierarchy counterexample laboratory"};
    // --h is a real option (window length), so help is --help only.
    app.set_help_flag("--help", "print help");
    app.require_subcommand(1);

    SampleArgs sample_args;
    auto* sample = app.add_subcommand("sample", "write one sampled window as CSV");
    sample->set_help_flag("--help", "print help");
    sample->add_option("--process", sample_args.process, "y, x or xtilde");
    sample->add_option("--L", sample_args.L, "block arity (even, >= 6)");
    sample->add_option("--level", sample_args.level, "construction level n");
    sample->add_option("--length", sample_args.length, "window length")
        ->required();
    sample->add_option("--seed", sample_args.seed, "RNG seed")->required();
    sample->add_option("--p", sample_args.p, "thinning probability");
    sample->add_option("--out", sample_args.out, "output CSV path (default: stdout)");

    MomentArgs moment_args;
    auto* moment = app.add_subcommand("moment", "Monte Carlo partial-sum moment");
    moment->set_help_flag("--help", "print help");
    moment->add_option("--process", moment_args.process, "y, x or xtilde");
    moment->add_option("--L", moment_args.L, "block arity");
    moment->add_option("--level", moment_args.level, "construction level n");
    moment->add_option("--p", moment_args.p, "thinning probability");
    moment->add_option("--h", moment_args.h, "window length")->required();
    moment->add_option("--power", moment_args.power, "moment power")->required();
    moment->add_option("--reps", moment_args.reps, "repetitions");
    moment->add_option("--seed", moment_args.seed, "RNG seed")->required();
    moment->add_option("--workers", moment_args.workers, "worker threads");
    moment->add_flag("--json", moment_args.json, "JSON output");
    moment->add_option("--ref", moment_args.reference, "reference value for z")
        ->trigger_on_parse()
        ->each([&moment_args](const std::string&) {
            moment_args.have_reference = true;
        });

    OracleArgs oracle_args;
    auto* oracle = app.add_subcommand("oracle", "exact reference values");
    oracle->set_help_flag("--help", "print help");
    oracle->add_option("--query", oracle_args.query, "oracle name")->required();
    oracle->add_option("--L", oracle_args.L, "block arity");
    oracle->add_option("--n", oracle_args.n, "construction level n");
    oracle->add_option("--h", oracle_args.h, "window length / trial count");
    oracle->add_option("--power", oracle_args.power, "moment power");
    oracle->add_option("--m", oracle_args.m, "binomial trial count");
    oracle->add_option("--d", oracle_args.d, "modulus");
    oracle->add_option("--p", oracle_args.p, "thinning probability");
    oracle->add_flag("--shifted", oracle_args.shifted,
                     "average over window offsets");
    oracle->add_option("--digits", oracle_args.digits, "tolerance digits");
    oracle->add_flag("--json", oracle_args.json, "JSON output");

    MixingArgs mixing_args;
    auto* mixing = app.add_subcommand("mixing", "cylinder mixing-gap table");
    mixing->set_help_flag("--help", "print help");
    mixing->add_option("--L", mixing_args.L, "block arity");
    mixing->add_option("--level", mixing_args.level, "construction level n");
    mixing->add_option("--p", mixing_args.p, "thinning probability");
    mixing->add_option("--N-list", mixing_args.n_list, "comma-separated lags");
    mixing->add_option("--specA", mixing_args.spec_a,
                       "head cylinder, e.g. 0:(0.5,inf)")->required();
    mixing->add_option("--specB", mixing_args.spec_b,
                       "tail cylinder, e.g. 0:(-inf,-0.3)")->required();
    mixing->add_option("--reps", mixing_args.reps, "repetitions per lag");
    mixing->add_option("--seed", mixing_args.seed, "RNG seed")->required();
    mixing->add_option("--workers", mixing_args.workers, "worker threads");
    mixing->add_flag("--json", mixing_args.json, "JSON output");

    VerifyArgs verify_args;
    auto* verify = app.add_subcommand("verify", "run the verification suites");
    verify->set_help_flag("--help", "print help");
    verify->add_option("--config", verify_args.config_path,
                       "key = value config file");
    verify->add_option("--workers", verify_args.workers,
                       "override the config's worker count");
    verify->add_flag("--no-persist", verify_args.no_persist,
                     "skip writing record files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sample->parsed()) return run_sample(sample_args);
        if (moment->parsed()) return run_moment(moment_args);
        if (oracle->parsed()) return run_oracle(oracle_args);
        if (mixing->parsed()) return run_mixing(mixing_args);
        if (verify->parsed()) return run_verify(verify_args);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
