#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "fri/error.hpp"
#include "fri/format.hpp"
#include "fri/ising.hpp"
#include "fri/iterate.hpp"
#include "fri/matrix_market.hpp"
#include "fri/report.hpp"
#include "fri/version.hpp"

namespace fri::cli {

namespace {

using json = nlohmann::ordered_json;

// Up to this dimension the default functionals are the coordinates.
constexpr std::uint64_t kCoordinateFunctionalsUpTo = 8;

struct Common {
    std::string seed;
    unsigned threads = 1;
    std::string out, summary, manifest, dump;
    std::string rule = "systematic";
    bool tbs_renorm = false;
    std::string order = "input";
    std::size_t m = 4096;
    std::size_t iters = 1000;
    std::size_t burn_in = 0;
    std::size_t record_every = 1;
};

struct Options {
    Common common;
    // ising / ising-exact
    unsigned ell = 50;
    double temp = 2.2;
    double field = 0.01;
    double tol = 1e-12;
    std::size_t max_iters = 100000;
    // matrix drivers
    std::string matrix, v0, rhs, u;
    std::vector<std::string> functionals;
    double eps = 0.1;
    double total_time = 1.0;
    std::size_t replicas = 1;
    // compress-bench
    std::size_t n = 200;
    std::vector<std::size_t> ms{10, 100};
    std::vector<std::string> rules{"floorceil", "indep", "systematic", "stratified"};
    std::size_t reps = 10000;
    std::size_t n_functionals = 3;
};

std::uint64_t parse_seed(const std::string& text, const std::string& source)
{
    if (text == "random") {
        std::random_device rd;
        return (std::uint64_t{rd()} << 32) ^ rd();
    }
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(text, &used, 0);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) throw Error(source + ": expected an integer or 'random', got '" + text + "'");
    return v;
}

std::uint64_t resolve_seed(const std::string& flag)
{
    if (!flag.empty()) return parse_seed(flag, "--seed");
    if (const char* env = std::getenv("FRI_SEED"); env && *env) return parse_seed(env, "FRI_SEED");
    return kDefaultSeed;
}

IterationConfig iteration_config(const Common& c, std::uint64_t seed)
{
    IterationConfig cfg;
    cfg.num_iters = c.iters;
    cfg.burn_in = c.burn_in;
    cfg.rule = {parse_rule_kind(c.rule), c.m, c.tbs_renorm, parse_stochastic_order(c.order)};
    cfg.seed = seed;
    cfg.record_every = c.record_every;
    cfg.threads = std::max(1u, c.threads);
    cfg.validate();
    return cfg;
}

std::ofstream open_output(const std::string& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path + "'");
    return f;
}

void write_json(const std::string& path, const json& doc)
{
    auto f = open_output(path);
    f << doc.dump(2) << '\n';
}

std::string timestamp_utc()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream ss;
    ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return ss.str();
}

std::string describe(const EstimateSummary& s)
{
    std::ostringstream ss;
    ss << format_double(s.mean.real());
    if (s.mean.imag() != 0.0) ss << (s.mean.imag() < 0 ? " - " : " + ") << format_double(std::abs(s.mean.imag())) << "i";
    ss << " +- " << format_double(s.ci95_halfwidth) << " (iat " << format_double(s.iat) << ", n " << s.n_samples
       << ")";
    return ss.str();
}

std::vector<NamedEstimate> name_estimates(const std::vector<std::string>& names,
                                          const std::vector<EstimateSummary>& s)
{
    std::vector<NamedEstimate> out;
    for (std::size_t i = 0; i < s.size(); ++i) out.push_back({names[i], s[i]});
    return out;
}

struct Functionals {
    std::vector<DenseFunctional> fs;
    std::vector<std::string> names;
};

// Functionals from files, else the coordinates (small n) or the all-ones functional.
Functionals load_functionals(const std::vector<std::string>& paths, std::uint64_t dim)
{
    Functionals f;
    if (!paths.empty()) {
        for (std::size_t i = 0; i < paths.size(); ++i) {
            auto v = load_matrix_market_vector(paths[i]);
            if (v.dim != dim) throw Error("functional '" + paths[i] + "' has dimension " + std::to_string(v.dim) +
                                          ", operator has " + std::to_string(dim));
            f.fs.emplace_back(std::move(v.values));
            f.names.push_back("f" + std::to_string(i));
        }
    } else if (dim <= kCoordinateFunctionalsUpTo) {
        for (Index i = 0; i < dim; ++i) {
            f.fs.push_back(DenseFunctional::coordinate(i));
            f.names.push_back("x" + std::to_string(i));
        }
    } else {
        f.fs.push_back(DenseFunctional::all_ones());
        f.names.push_back("sum");
    }
    return f;
}

SparseVector load_vector(const std::string& path, std::uint64_t dim, const std::string& what)
{
    auto v = load_matrix_market_vector(path);
    if (v.dim != dim)
        throw Error(what + " '" + path + "' has dimension " + std::to_string(v.dim) + ", matrix has " +
                    std::to_string(dim));
    return std::move(v.values);
}

SparseVector ones(std::uint64_t n)
{
    std::vector<Entry> e;
    e.reserve(n);
    for (Index i = 0; i < n; ++i) e.push_back({i, 1.0});
    return SparseVector::from_sorted(std::move(e));
}

void write_outputs(const Common& c, const Trajectory* traj, const json* summary, const SparseVector* final_iterate)
{
    if (traj && !c.out.empty()) {
        auto f = open_output(c.out);
        write_trajectory_csv(f, *traj);
    }
    if (summary && !c.summary.empty()) write_json(c.summary, *summary);
    if (final_iterate && !c.dump.empty()) {
        auto f = open_output(c.dump);
        write_debug_dump(f, *final_iterate);
    }
}

void print_estimates(std::ostream& out, const std::vector<NamedEstimate>& estimates)
{
    for (const auto& e : estimates) out << e.name << " = " << describe(e.summary) << '\n';
}

int cmd_ising(const Options& o, std::uint64_t seed, std::ostream& out)
{
    const IsingParams p{o.ell, o.temp, o.field};
    p.validate();
    const auto op = ising_operator(p);
    const auto cfg = iteration_config(o.common, seed);
    auto tr = fri_power(op, SparseVector::from_pairs({{0, 1.0}}), DenseFunctional::all_ones(),
                        {tail_weight_functional(p.ell)}, cfg);
    const std::vector<NamedEstimate> est{{"lambda", tr.lambda_summary()}, {"f_tail", tr.f_summary(0)}};
    const auto doc = summary_document(est);
    write_outputs(o.common, &tr, &doc, &tr.final_iterate);
    print_estimates(out, est);
    return 0;
}

int cmd_ising_exact(const Options& o, std::ostream& out)
{
    const IsingParams p{o.ell, o.temp, o.field};
    p.validate();
    auto r = ising_exact(p, o.tol, o.max_iters);
    json doc;
    doc["ell"] = p.ell;
    doc["temperature"] = p.temperature;
    doc["field"] = p.field;
    doc["lambda"] = r.lambda;
    doc["f_tail"] = r.f_tail;
    doc["iterations"] = r.iterations;
    if (!o.common.summary.empty()) write_json(o.common.summary, doc);
    out << "lambda = " << format_double(r.lambda) << "\nf_tail = " << format_double(r.f_tail)
        << "\niterations = " << r.iterations << '\n';
    return 0;
}

int cmd_power(const Options& o, std::uint64_t seed, std::ostream& out)
{
    const auto a = load_matrix_market(o.matrix);
    const auto cfg = iteration_config(o.common, seed);
    const SparseVector v0 = o.v0.empty() ? ones(a.size()) : load_vector(o.v0, a.size(), "start vector");
    const DenseFunctional u = o.u.empty() ? DenseFunctional::all_ones()
                                          : DenseFunctional(load_vector(o.u, a.size(), "eigenvalue functional"));
    const auto f = load_functionals(o.functionals, a.size());
    auto tr = fri_power(a, v0, u, f.fs, cfg);
    std::vector<NamedEstimate> est{{"lambda", tr.lambda_summary()}};
    for (std::size_t i = 0; i < f.fs.size(); ++i) est.push_back({f.names[i], tr.f_summary(i)});
    const auto doc = summary_document(est);
    write_outputs(o.common, &tr, &doc, &tr.final_iterate);
    print_estimates(out, est);
    return 0;
}

int cmd_solve(const Options& o, std::uint64_t seed, std::ostream& out)
{
    const auto a = load_matrix_market(o.matrix);
    auto cfg = iteration_config(o.common, seed);
    cfg.replicas = o.replicas;
    cfg.validate();
    const auto r = load_vector(o.rhs, a.size(), "right-hand side");
    std::optional<SparseVector> v0;
    if (!o.v0.empty()) v0 = load_vector(o.v0, a.size(), "start vector");
    const auto f = load_functionals(o.functionals, a.size());
    auto res = fri_solve(a, r, o.eps, f.fs, cfg, v0);
    const auto est = name_estimates(f.names, res.estimates);
    const auto doc = summary_document(est);
    write_outputs(o.common, &res.first_replica, &doc, &res.first_replica.final_iterate);
    print_estimates(out, est);
    return 0;
}

int cmd_expm(const Options& o, std::uint64_t seed, std::ostream& out)
{
    const auto a = load_matrix_market(o.matrix);
    Common c = o.common;
    c.burn_in = 0;
    auto cfg = iteration_config(c, seed);
    cfg.replicas = o.replicas;
    const auto b = load_vector(o.rhs, a.size(), "vector b");
    const auto f = load_functionals(o.functionals, a.size());
    auto res = fri_expm(a, b, o.total_time, o.eps, f.fs, cfg);
    const auto est = name_estimates(f.names, res.estimates);
    const auto doc = summary_document(est);
    write_outputs(o.common, &res.first_replica, &doc, &res.first_replica.final_iterate);
    print_estimates(out, est);
    return 0;
}

// Empirical RMS of f.(compress(v) - v) for random sign functionals against
// the 2 ||v||_1 / sqrt(m) envelope.
int cmd_compress_bench(const Options& o, std::uint64_t seed, std::ostream& out)
{
    if (o.n == 0 || o.reps < 2 || o.n_functionals == 0) throw Error("compress-bench needs n >= 1, reps >= 2, functionals >= 1");
    RngStream setup(seed, stream_id(0, StreamPurpose::Bench));
    std::vector<Entry> pairs;
    for (Index j = 0; j < o.n; ++j) {
        const double mag = setup.uniform_open();
        pairs.push_back({j, setup.uniform() < 0.5 ? -mag : mag});
    }
    const auto v = SparseVector::from_pairs(std::move(pairs));
    std::vector<DenseFunctional> fs;
    for (std::size_t i = 0; i < o.n_functionals; ++i) {
        std::vector<Entry> signs;
        for (Index j = 0; j < o.n; ++j) signs.push_back({j, setup.uniform() < 0.5 ? -1.0 : 1.0});
        fs.emplace_back(SparseVector::from_sorted(std::move(signs)));
    }
    const double v_l1 = l1_norm(v);
    const auto order = parse_stochastic_order(o.common.order);

    std::ostringstream csv;
    csv << "rule,order,n,m,reps,functional,mean_error,rms_error,envelope,within_envelope\n";
    json doc;
    doc["runs"] = json::array();
    bool all_within = true;
    for (const auto& rule_name : o.rules) {
        const auto kind = parse_rule_kind(rule_name);
        for (std::size_t m : o.ms) {
            if (m == 0) throw Error("compression budget m must be positive");
            const CompressionRule rule{kind, m, o.common.tbs_renorm, order};
            std::vector<double> sum(fs.size(), 0.0), sq(fs.size(), 0.0);
            for (std::size_t r = 0; r < o.reps; ++r) {
                RngStream rng(seed, stream_id(r + 1, StreamPurpose::Bench));
                const auto diff = axpy(-1.0, v, compress(rule, v, rng));
                for (std::size_t i = 0; i < fs.size(); ++i) {
                    const double e = fs[i].dot(diff).real();
                    sum[i] += e;
                    sq[i] += e * e;
                }
            }
            const double envelope = 2.0 * v_l1 / std::sqrt(static_cast<double>(m));
            for (std::size_t i = 0; i < fs.size(); ++i) {
                const double reps = static_cast<double>(o.reps);
                const double rms = std::sqrt(sq[i] / reps);
                const bool within = rms <= envelope;
                all_within = all_within && within;
                csv << rule_name << ',' << to_string(order) << ',' << o.n << ',' << m << ',' << o.reps << ",f" << i
                    << ',' << format_double(sum[i] / reps) << ',' << format_double(rms) << ','
                    << format_double(envelope) << ',' << (within ? "true" : "false") << '\n';
                doc["runs"].push_back({{"rule", rule_name}, {"m", m}, {"functional", i}, {"rms_error", rms},
                                       {"envelope", envelope}, {"within_envelope", within}});
                out << rule_name << " m=" << m << " f" << i << ": rms " << format_double(rms) << " envelope "
                    << format_double(envelope) << '\n';
            }
        }
    }
    doc["v_l1"] = v_l1;
    doc["all_within_envelope"] = all_within;
    if (!o.common.out.empty()) open_output(o.common.out) << csv.str();
    if (!o.common.summary.empty()) write_json(o.common.summary, doc);
    return 0;
}

void add_common(CLI::App* app, Common& c, bool iterative)
{
    app->add_option("--seed", c.seed, "RNG seed (integer or 'random'); default FRI_SEED or " +
                                          std::to_string(kDefaultSeed));
    app->add_option("--threads", c.threads, "worker threads (affects wall time only)");
    app->add_option("--summary", c.summary, "summary JSON path");
    app->add_option("--manifest", c.manifest, "run manifest path (default: <first output>.manifest.json)");
    if (!iterative) return;
    app->add_option("--out", c.out, "trajectory CSV path");
    app->add_option("--dump-vector", c.dump, "write the final iterate as index,re,im lines");
    app->add_option("--rule", c.rule, "compression rule: floorceil|indep|systematic|stratified|tbs");
    app->add_flag("--tbs-renorm", c.tbs_renorm, "rescale TbS output to the input l1 norm");
    app->add_option("--stoch-order", c.order, "stochastic sweep order: input|magdesc");
    app->add_option("--m", c.m, "compression budget (max nonzeros per iterate)");
    app->add_option("--iters", c.iters, "number of iterations");
    app->add_option("--burn-in", c.burn_in, "iterations discarded before averaging");
    app->add_option("--record-every", c.record_every, "CSV row interval");
}

void add_ising_params(CLI::App* app, Options& o)
{
    app->add_option("--ell", o.ell, "spins per transfer window (3..63)");
    app->add_option("--temp", o.temp, "temperature T");
    app->add_option("--field", o.field, "external field B");
}

std::string default_manifest_path(const Common& c)
{
    if (!c.manifest.empty()) return c.manifest;
    if (!c.out.empty()) return c.out + ".manifest.json";
    if (!c.summary.empty()) return c.summary + ".manifest.json";
    if (!c.dump.empty()) return c.dump + ".manifest.json";
    return {};
}

// Original arguments with --seed replaced by the resolved value.
std::vector<std::string> replay_args(const std::vector<std::string>& args, std::uint64_t seed)
{
    std::vector<std::string> out;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--seed") {
            ++i;
            continue;
        }
        if (args[i].rfind("--seed=", 0) == 0) continue;
        out.push_back(args[i]);
    }
    out.push_back("--seed");
    out.push_back(std::to_string(seed));
    return out;
}

json resolved_options(const CLI::App* sub)
{
    json j = json::object();
    for (const auto* opt : sub->get_options()) {
        if (opt->get_lnames().empty() || opt->get_lnames().front() == "help") continue;
        const auto& name = opt->get_lnames().front();
        if (opt->count() > 0) {
            const auto results = opt->results();
            if (results.size() == 1)
                j[name] = results.front();
            else
                j[name] = results;
        } else {
            j[name] = opt->get_default_str();
        }
    }
    return j;
}

void write_manifest(const std::string& path, const CLI::App* sub, const Common& c,
                    const std::vector<std::string>& args, std::uint64_t seed)
{
    json m;
    m["program"] = "fri";
    m["version"] = kVersion;
    m["timestamp"] = timestamp_utc();
    m["command"] = sub->get_name();
    m["seed"] = seed;
    m["args"] = replay_args(args, seed);
    m["config"] = resolved_options(sub);
    json outputs = json::object();
    if (!c.out.empty()) outputs["trajectory_csv"] = c.out;
    if (!c.summary.empty()) outputs["summary_json"] = c.summary;
    if (!c.dump.empty()) outputs["vector_dump"] = c.dump;
    m["outputs"] = outputs;
    write_json(path, m);
}

std::vector<std::string> manifest_args(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open manifest '" + path + "'");
    json m;
    try {
        m = json::parse(in);
    } catch (const json::exception& e) {
        throw Error("malformed manifest '" + path + "': " + e.what());
    }
    if (!m.contains("args") || !m["args"].is_array()) throw Error("manifest '" + path + "' has no args array");
    std::vector<std::string> args{"fri"};
    for (const auto& a : m["args"]) args.push_back(a.get<std::string>());
    return args;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Fast randomized iteration: sparse randomized power, solve and exponential drivers"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(0, 1);
    std::string from_manifest;
    app.add_option("--from-manifest", from_manifest, "re-run the command recorded in a manifest");
    app.set_version_flag("--version", kVersion);

    Options o;
    Options exact_defaults;
    exact_defaults.ell = 24;

    auto* ising = app.add_subcommand("ising", "randomized power iteration on the Ising transfer matrix");
    add_common(ising, o.common, true);
    add_ising_params(ising, o);

    Options ex = exact_defaults;
    auto* ising_exact_cmd = app.add_subcommand("ising-exact", "dense power iteration oracle (ell <= 26)");
    add_common(ising_exact_cmd, ex.common, false);
    add_ising_params(ising_exact_cmd, ex);
    ising_exact_cmd->add_option("--tol", ex.tol, "stop when |dLambda| < tol for ell consecutive steps");
    ising_exact_cmd->add_option("--max-iters", ex.max_iters, "iteration cap");

    auto* power = app.add_subcommand("power", "randomized power iteration on a Matrix Market matrix");
    add_common(power, o.common, true);
    power->add_option("--matrix", o.matrix, "square matrix (.mtx)")->required();
    power->add_option("--v0", o.v0, "start vector (.mtx, n x 1); default all ones");
    power->add_option("--u", o.u, "eigenvalue functional (.mtx); default all ones");
    power->add_option("--functional", o.functionals, "functional vectors (.mtx), repeatable");

    auto* solve = app.add_subcommand("solve", "estimate f . A^{-1} r by v <- v + eps (A v - r)");
    add_common(solve, o.common, true);
    solve->add_option("--matrix", o.matrix, "square matrix A (.mtx)")->required();
    solve->add_option("--rhs", o.rhs, "right-hand side r (.mtx, n x 1)")->required();
    solve->add_option("--v0", o.v0, "start vector; default r");
    solve->add_option("--eps", o.eps, "step size");
    solve->add_option("--replicas", o.replicas, "independent replicas");
    solve->add_option("--functional", o.functionals, "functional vectors (.mtx), repeatable");

    auto* expm = app.add_subcommand("expm", "estimate f . exp(T A) b by compressed Euler steps");
    add_common(expm, o.common, true);
    expm->add_option("--matrix", o.matrix, "square matrix A (.mtx)")->required();
    expm->add_option("--b,--rhs", o.rhs, "vector b (.mtx, n x 1)")->required();
    expm->add_option("--t", o.total_time, "final time T");
    expm->add_option("--eps", o.eps, "step size (T / eps rounded up to whole steps)");
    expm->add_option("--replicas", o.replicas, "independent replicas");
    expm->add_option("--functional", o.functionals, "functional vectors (.mtx), repeatable");

    Options bench;
    auto* bench_cmd = app.add_subcommand("compress-bench", "compression error against the 2 |v|_1 / sqrt(m) envelope");
    add_common(bench_cmd, bench.common, false);
    bench_cmd->add_option("--out", bench.common.out, "CSV path");
    bench_cmd->add_option("--n", bench.n, "vector length");
    bench_cmd->add_option("--m", bench.ms, "budgets, repeatable");
    bench_cmd->add_option("--rule", bench.rules, "rules, repeatable");
    bench_cmd->add_option("--stoch-order", bench.common.order, "stochastic sweep order: input|magdesc");
    bench_cmd->add_option("--reps", bench.reps, "replicates per (rule, m)");
    bench_cmd->add_option("--functionals", bench.n_functionals, "number of random sign functionals");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (!from_manifest.empty()) {
            if (!app.get_subcommands().empty()) throw Error("--from-manifest cannot be combined with a subcommand");
            return run(manifest_args(from_manifest), out, err);
        }
        if (app.get_subcommands().empty()) {
            out << app.help();
            return 1;
        }
        CLI::App* sub = app.get_subcommands().front();
        const Common& c = sub == ising_exact_cmd ? ex.common : sub == bench_cmd ? bench.common : o.common;
        const std::uint64_t seed = resolve_seed(c.seed);

        int code = 0;
        if (sub == ising) code = cmd_ising(o, seed, out);
        else if (sub == ising_exact_cmd) code = cmd_ising_exact(ex, out);
        else if (sub == power) code = cmd_power(o, seed, out);
        else if (sub == solve) code = cmd_solve(o, seed, out);
        else if (sub == expm) code = cmd_expm(o, seed, out);
        else code = cmd_compress_bench(bench, seed, out);

        if (const auto path = default_manifest_path(c); !path.empty()) write_manifest(path, sub, c, args, seed);
        return code;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace fri::cli
