#include "nestedot/cli.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include <openssl/evp.h>

#include "CLI11.hpp"

#include "nestedot/causality.hpp"
#include "nestedot/embedding.hpp"
#include "nestedot/error.hpp"
#include "nestedot/families.hpp"
#include "nestedot/io.hpp"
#include "nestedot/knothe.hpp"
#include "nestedot/nested_solver.hpp"
#include "nestedot/transport.hpp"

namespace nestedot {

namespace {

using io::json;

struct Globals {
    double p = 1.0;
    std::string metric = "usual";
    double cap = 1.0;
    double tol = 1e-8;
    bool oracle = false;
    std::uint64_t seed = 1;
};

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw SolverError("SHA-256 digest failed");
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return hex.str();
}

class Report {
public:
    Report(const std::vector<std::string>& args, const Globals& g, const GroundMetric& m) : metric_(m) {
        j_["command"] = args;
        j_["inputs"] = json::object();
        json metric{{"name", m.name()}, {"p", m.p()}};
        if (m.base() == GroundMetric::Base::Truncated) metric["cap"] = m.cap();
        j_["metric"] = metric;
        j_["results"] = json::array();
        j_["tolerances"] = {{"oracle", g.tol},
                            {"marginal", kMarginalTolerance},
                            {"probability", kProbabilityTolerance},
                            {"causality", kCausalityTolerance},
                            {"point_mass", kPointMassTolerance}};
        j_["oracle"] = {{"status", "not_run"}};
    }

    json input(const std::string& role, const std::string& path) {
        const auto text = io::read_text_file(path);
        j_["inputs"][role] = {{"path", path}, {"sha256", sha256_hex(text)}};
        try {
            return json::parse(text);
        } catch (const json::exception& e) {
            throw ValidationError(path + ": " + e.what());
        }
    }

    void digest_only(const std::string& role, const std::string& path) {
        j_["inputs"][role] = {{"path", path}, {"sha256", sha256_hex(io::read_text_file(path))}};
    }

    void result(const std::string& quantity, double value, json extra = json::object()) {
        json r{{"quantity", quantity}, {"value", value}, {"p", metric_.p()}, {"metric", metric_.name()}};
        for (auto& [k, v] : extra.items()) r[k] = v;
        j_["results"].push_back(std::move(r));
    }

    json& operator[](const std::string& key) { return j_[key]; }

    void finish(std::ostream& out, std::chrono::steady_clock::time_point start) {
        j_["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out << j_.dump(2) << '\n';
    }

private:
    json j_;
    GroundMetric metric_;
};

json violation_json(const Violation& v, const ScenarioTree& mu, const ScenarioTree& nu) {
    return {{"side", v.side == Violation::Side::Mu ? "mu" : "nu"},
            {"stage", v.stage},
            {"mu_history", mu.history(v.mu_node)},
            {"nu_history", nu.history(v.nu_node)},
            {"deviation", v.deviation}};
}

json causality_json(const CausalityReport& r, const ScenarioTree& mu, const ScenarioTree& nu) {
    json vs = json::array();
    for (const auto& v : r.violations) vs.push_back(violation_json(v, mu, nu));
    return {{"is_causal", r.is_causal},
            {"is_bicausal", r.is_bicausal},
            {"is_monge_adapted", r.is_monge_adapted},
            {"is_invertible_monge", r.is_invertible_monge},
            {"max_causal_deviation", r.max_causal_deviation},
            {"max_bicausal_deviation", r.max_bicausal_deviation},
            {"violations", std::move(vs)}};
}

GroundMetric make_metric(const Globals& g) {
    return g.metric == "truncated" ? GroundMetric::truncated(g.cap, g.p) : GroundMetric::usual(g.p);
}

Coupling mixture(const Coupling& a, const Coupling& b, double w) {
    Coupling out;
    for (const auto& e : a.entries) out.entries.push_back({e.mu_leaf, e.nu_leaf, w * e.mass});
    for (const auto& e : b.entries) out.entries.push_back({e.mu_leaf, e.nu_leaf, (1.0 - w) * e.mass});
    return out.canonical();
}

// Command state filled by CLI11 and consumed by the selected handler.
struct Options {
    std::string mu, nu, plan, emit_plan, P, Q, csv, output;
    std::string pi_out = "pi.json", pi_tilde_out = "pi_tilde.json";
    std::optional<double> lambda;
    double merge_tol = 0.0;
    bool weighted = false;
    int n_max = 10, n = 4, discretize = 16, family = 1, depth = 2, count = 10;
    std::vector<double> eps{1.0, 0.1, 0.01};
};

using Handler = std::function<int(Report&, const Globals&, const GroundMetric&, const Options&)>;

ScenarioTree load_tree(Report& r, const std::string& role, const std::string& path) {
    return io::tree_from_json(r.input(role, path));
}

int compute_nested(Report& r, const Globals& g, const GroundMetric& m, const Options& o) {
    const auto mu = load_tree(r, "mu", o.mu);
    const auto nu = load_tree(r, "nu", o.nu);
    const auto res = nested_distance(mu, nu, m);
    r.result("nested_distance", res.distance);
    r.result("nested_cost_p", res.cost_p);
    if (!o.emit_plan.empty()) io::write_json_file(o.emit_plan, io::coupling_to_json(res.plan, mu, nu));
    if (!g.oracle) return kExitOk;
    const auto bf = brute_force_bicausal(mu, nu, m);
    const double gap = std::abs(bf.distance - res.distance);
    const bool ok = gap <= g.tol;
    r["oracle"] = {{"status", ok ? "pass" : "fail"}, {"oracle_distance", bf.distance}, {"gap", gap}};
    return ok ? kExitOk : kExitOracleMismatch;
}

int compute_wasserstein(Report& r, const Globals&, const GroundMetric& m, const Options& o) {
    const auto mu = load_tree(r, "mu", o.mu);
    const auto nu = load_tree(r, "nu", o.nu);
    const auto res = wasserstein_distance(mu, nu, m);
    r.result("wasserstein_distance", res.distance);
    r.result("wasserstein_cost_p", res.cost_p);
    if (!o.emit_plan.empty()) io::write_json_file(o.emit_plan, io::coupling_to_json(res.plan, mu, nu));
    return kExitOk;
}

int compute_kr(Report& r, const Globals&, const GroundMetric& m, const Options& o) {
    const auto mu = load_tree(r, "mu", o.mu);
    const auto nu = load_tree(r, "nu", o.nu);
    r.result("kr_distance", kr_distance(mu, nu, m));
    if (!o.emit_plan.empty()) io::write_json_file(o.emit_plan, io::coupling_to_json(kr_coupling(mu, nu).coupling, mu, nu));
    return kExitOk;
}

int compute_lifted(Report& r, const Globals&, const GroundMetric& m, const Options& o) {
    const auto P = io::nested_from_json(r.input("P", o.P));
    const auto Q = io::nested_from_json(r.input("Q", o.Q));
    r.result("lifted_wasserstein_distance", nested_wasserstein(P, Q, m));
    return kExitOk;
}

int check_coupling(Report& r, const Globals&, const GroundMetric&, const Options& o) {
    const auto mu = load_tree(r, "mu", o.mu);
    const auto nu = load_tree(r, "nu", o.nu);
    const auto plan = io::coupling_from_json(r.input("plan", o.plan), mu, nu);
    r["causality"] = causality_json(full_report(plan, mu, nu), mu, nu);
    return kExitOk;
}

int split(Report& r, const Globals&, const GroundMetric&, const Options& o) {
    const auto mu = load_tree(r, "mu", o.mu);
    const auto nu = load_tree(r, "nu", o.nu);
    const auto plan = io::coupling_from_json(r.input("plan", o.plan), mu, nu);
    SplitResult s;
    try {
        s = split_non_extreme(plan, mu, nu, o.lambda);
    } catch (const AlreadyExtreme&) {
        r["split"] = {{"status", "already_extreme"}};
        return kExitOk;
    }
    io::write_json_file(o.pi_out, io::coupling_to_json(s.pi, mu, nu));
    io::write_json_file(o.pi_tilde_out, io::coupling_to_json(s.pi_tilde, mu, nu));
    json tau = json::array(), thresholds = json::array();
    for (const auto& [leaf, t] : s.tau_per_history) tau.push_back({{"mu_path", mu.history(leaf)}, {"tau", t}});
    for (const auto& [node, j] : s.threshold_per_history)
        thresholds.push_back({{"mu_history", mu.history(node)}, {"threshold", j}});
    r["split"] = {{"status", "split"},
                  {"lambda", s.lambda},
                  {"reconstruction_error", s.reconstruction_error},
                  {"pi_file", o.pi_out},
                  {"pi_tilde_file", o.pi_tilde_out},
                  {"tau_per_history", std::move(tau)},
                  {"threshold_per_history", std::move(thresholds)},
                  {"pi_causality", causality_json(full_report(s.pi, mu, nu), mu, nu)},
                  {"pi_tilde_causality", causality_json(full_report(s.pi_tilde, mu, nu), mu, nu)}};
    return kExitOk;
}

int embed_cmd(Report& r, const Globals&, const GroundMetric&, const Options& o) {
    const auto P = embed(load_tree(r, "mu", o.mu));
    const auto j = io::nested_to_json(P);
    if (!o.output.empty()) io::write_json_file(o.output, j);
    r["nested"] = j;
    r["depth"] = P.depth();
    return kExitOk;
}

int from_samples(Report& r, const Globals&, const GroundMetric&, const Options& o) {
    r.digest_only("csv", o.csv);
    const auto paths = io::read_samples_csv(o.csv, o.weighted);
    const auto tree = build_tree(paths, o.merge_tol);
    const auto j = io::tree_to_json(tree);
    if (!o.output.empty()) io::write_json_file(o.output, j);
    r["tree"] = j;
    r["summary"] = {{"samples", paths.paths.size()},
                    {"depth", tree.depth()},
                    {"nodes", tree.size()},
                    {"leaves", tree.leaves().size()},
                    {"merge_tol", o.merge_tol}};
    return kExitOk;
}

int demo_incompleteness(Report& r, const Globals&, const GroundMetric& m, const Options& o) {
    if (o.n_max < 1) throw ValidationError("--n-max must be at least 1");
    const auto limit = families::incompleteness_limit();
    std::vector<ScenarioTree> fans;
    for (int n = 1; n <= o.n_max; ++n) fans.push_back(families::incompleteness_fan(n));
    const bool usual = m.base() == GroundMetric::Base::Usual;
    for (int n = 1; n <= o.n_max; ++n) {
        json extra{{"n", n}};
        if (usual) extra["closed_form"] = m.root(std::pow(2.0, m.p() - 1.0) + std::pow(n, -m.p()));
        r.result("d(mu_n, mu)", nested_distance(fans[static_cast<std::size_t>(n - 1)], limit, m).distance, extra);
    }
    const auto table = cauchy_check(fans, m);
    for (int n = 1; n <= o.n_max; ++n)
        for (int k = n + 1; k <= o.n_max; ++k) {
            json extra{{"n", n}, {"m", k}};
            if (usual) extra["bound"] = std::abs(1.0 / n - 1.0 / k);
            r.result("d(mu_n, mu_m)", table(n - 1, k - 1), extra);
        }
    return kExitOk;
}

int demo_separating(Report& r, const Globals&, const GroundMetric& m, const Options& o) {
    const auto limit = families::separating_limit(o.depth);
    for (double eps : o.eps) {
        const auto res = nested_distance(families::separating_fan(eps, o.depth), limit, m);
        json extra{{"eps", eps}, {"depth", o.depth}, {"lower_bound_cost_p", std::pow(2.0, m.p() - 1.0)}};
        if (m.base() == GroundMetric::Base::Usual)
            extra["closed_form_cost_p"] = (o.depth - 1) * std::pow(eps, m.p()) + std::pow(2.0, m.p() - 1.0);
        r.result("nested_cost_p", res.cost_p, extra);
        r.result("nested_distance", res.distance, {{"eps", eps}, {"depth", o.depth}});
    }
    return kExitOk;
}

int demo_kr_gap(Report& r, const Globals&, const GroundMetric& m, const Options& o) {
    if (m.base() != GroundMetric::Base::Usual) throw ValidationError("kr-gap demo uses the usual metric");
    const auto gap = kr_gap_demo(o.n, m.p(), o.family, o.discretize);
    json extra{{"n", o.n}, {"family", o.family}};
    if (o.family == 2) extra["discretize"] = o.discretize;
    r.result("kr_distance", gap.kr, extra);
    r.result("nested_distance", gap.nested, extra);
    if (o.family == 2) {
        // The nested distribution obtained by moving the stage-1 atom 1/n to 0
        // while keeping its conditional; not the embedding of any tree.
        auto P = embed(families::uniform_split_fan(o.n, o.discretize));
        auto limit = P;
        for (auto& a : limit.atoms) a.value = 0.0;
        limit = canonicalize(limit);
        r.result("lifted_distance_to_split_limit", nested_wasserstein(P, limit, m), extra);
    }
    return kExitOk;
}

int demo_extreme_split(Report& r, const Globals& g, const GroundMetric&, const Options& o) {
    std::mt19937_64 rng(g.seed);
    const families::RandomTreeSpec spec{o.depth, 3, 12, 2.0};
    json cases = json::array();
    for (int c = 0; c < o.count; ++c) {
        ScenarioTree mu = families::random_tree(rng, spec), nu = mu;
        Coupling a, b;
        do {
            nu = families::random_tree(rng, spec);
            a = pushforward_coupling(families::random_adapted_map(rng, mu, nu), mu, nu);
            b = pushforward_coupling(families::random_adapted_map(rng, mu, nu), mu, nu);
        } while (a.dense(mu, nu) == b.dense(mu, nu));
        const auto gamma = mixture(a, b, 0.5);
        const auto s = split_non_extreme(gamma, mu, nu);
        cases.push_back({{"case", c},
                         {"lambda", s.lambda},
                         {"reconstruction_error", s.reconstruction_error},
                         {"pi_causal", is_causal(s.pi, mu, nu).is_causal},
                         {"pi_tilde_causal", is_causal(s.pi_tilde, mu, nu).is_causal},
                         {"monge_parts_causal", is_causal(a, mu, nu).is_causal && is_causal(b, mu, nu).is_causal}});
        r.result("reconstruction_error", s.reconstruction_error, {{"case", c}});
    }
    r["cases"] = std::move(cases);
    return kExitOk;
}

int demo_isometry(Report& r, const Globals& g, const GroundMetric& m, const Options& o) {
    std::mt19937_64 rng(g.seed);
    std::uniform_int_distribution<int> depth(1, 3);
    double worst = 0.0;
    for (int c = 0; c < o.count; ++c) {
        const families::RandomTreeSpec spec{depth(rng), 3, 12, 2.0};
        const auto mu = families::random_tree(rng, spec);
        const auto nu = families::random_tree(rng, spec);
        const double d = nested_distance(mu, nu, m).distance;
        const double lifted = nested_wasserstein(embed(mu), embed(nu), m);
        worst = std::max(worst, std::abs(d - lifted));
        r.result("nested_distance", d, {{"case", c}, {"depth", spec.depth}});
        r.result("lifted_wasserstein_distance", lifted, {{"case", c}, {"depth", spec.depth}});
    }
    r.result("max_abs_gap", worst);
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    Globals g;
    Options o;
    Handler handler;

    CLI::App app{"Nested, Knothe-Rosenblatt and Wasserstein distances between scenario trees", "nestedot"};
    app.require_subcommand(1);
    app.add_option("--p", g.p, "Exponent p >= 1")->capture_default_str();
    app.add_option("--metric", g.metric, "Base metric")->check(CLI::IsMember({"usual", "truncated"}))->capture_default_str();
    app.add_option("--cap", g.cap, "Cap of the truncated metric")->capture_default_str();
    app.add_option("--tol", g.tol, "Oracle agreement tolerance")->capture_default_str();
    app.add_flag("--oracle", g.oracle, "Cross-check against the brute-force linear program");
    app.add_option("--seed", g.seed, "Seed for randomised demos")->capture_default_str();

    auto sub = [&](CLI::App* parent, const std::string& name, const std::string& desc, Handler h) {
        auto* s = parent->add_subcommand(name, desc)->fallthrough();
        s->callback([&handler, h] { handler = h; });
        return s;
    };
    auto pair_inputs = [&](CLI::App* s) {
        s->add_option("--mu", o.mu, "Tree JSON")->required();
        s->add_option("--nu", o.nu, "Tree JSON")->required();
    };

    auto* compute = app.add_subcommand("compute", "Distances between two inputs")->fallthrough()->require_subcommand(1);
    auto* c_nested = sub(compute, "nested", "Nested (bicausal) distance", compute_nested);
    pair_inputs(c_nested);
    c_nested->add_option("--emit-plan", o.emit_plan, "Write an optimal bicausal plan");
    auto* c_w = sub(compute, "wasserstein", "Classical Wasserstein distance of the path laws", compute_wasserstein);
    pair_inputs(c_w);
    c_w->add_option("--emit-plan", o.emit_plan, "Write an optimal plan");
    auto* c_kr = sub(compute, "kr", "Knothe-Rosenblatt distance", compute_kr);
    pair_inputs(c_kr);
    c_kr->add_option("--emit-plan", o.emit_plan, "Write the KR coupling");
    auto* c_lifted = sub(compute, "lifted", "Wasserstein distance of nested distributions", compute_lifted);
    c_lifted->add_option("--P", o.P, "Nested distribution JSON")->required();
    c_lifted->add_option("--Q", o.Q, "Nested distribution JSON")->required();

    auto* check = app.add_subcommand("check", "Checks on couplings")->fallthrough()->require_subcommand(1);
    auto* ch_c = sub(check, "coupling", "Causality and Monge report of a plan", check_coupling);
    pair_inputs(ch_c);
    ch_c->add_option("--plan", o.plan, "Plan JSON")->required();

    auto* sp = sub(&app, "split", "Split a causal non-Monge plan into two causal plans", split);
    pair_inputs(sp);
    sp->add_option("--plan", o.plan, "Plan JSON")->required();
    sp->add_option("--lambda", o.lambda, "Mixture weight in (0, 1)");
    sp->add_option("--pi-out", o.pi_out, "Output file for pi")->capture_default_str();
    sp->add_option("--pi-tilde-out", o.pi_tilde_out, "Output file for pi_tilde")->capture_default_str();

    auto* em = sub(&app, "embed", "Nested distribution of a tree", embed_cmd);
    em->add_option("--mu", o.mu, "Tree JSON")->required();
    em->add_option("-o,--output", o.output, "Output file");

    auto* fs = sub(&app, "from-samples", "Build a tree from sample paths", from_samples);
    fs->add_option("--csv", o.csv, "CSV, one path per row")->required();
    fs->add_option("--merge-tol", o.merge_tol, "Merge tolerance for sibling values")->capture_default_str();
    fs->add_flag("--weighted", o.weighted, "Last column holds path weights");
    fs->add_option("-o,--output", o.output, "Output tree file");

    auto* demo = app.add_subcommand("demo", "Regression demos")->fallthrough()->require_subcommand(1);
    sub(demo, "incompleteness", "Fan sequence with a non-fan limit", demo_incompleteness)
        ->add_option("--n-max", o.n_max, "Largest n")
        ->capture_default_str();
    auto* sep = sub(demo, "separating", "Fans against their merged limit", demo_separating);
    sep->add_option("--eps", o.eps, "Stage-1 offsets")->capture_default_str();
    sep->add_option("--depth", o.depth, "Number of stages")->capture_default_str();
    auto* krg = sub(demo, "kr-gap", "KR distance against nested distance", demo_kr_gap);
    krg->add_option("--n", o.n, "Family index")->capture_default_str();
    krg->add_option("--family", o.family, "1 (mirror) or 2 (uniform split)")->check(CLI::Range(1, 2))->capture_default_str();
    krg->add_option("--discretize", o.discretize, "Atoms per uniform stage")->capture_default_str();
    auto* exs = sub(demo, "extreme-split", "Split random mixtures of adapted Monge plans", demo_extreme_split);
    exs->add_option("--count", o.count, "Number of cases")->capture_default_str();
    exs->add_option("--depth", o.depth, "Tree depth")->capture_default_str();
    sub(demo, "isometry", "Nested distance against the lifted Wasserstein distance", demo_isometry)
        ->add_option("--count", o.count, "Number of random pairs")
        ->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        const auto metric = make_metric(g);
        Report report(args, g, metric);
        const int code = handler(report, g, metric, o);
        report.finish(out, start);
        if (code == kExitOracleMismatch) err << "error: oracle mismatch above " << g.tol << '\n';
        return code;
    } catch (const OracleMismatch& e) {
        err << "error: " << e.what() << '\n';
        return kExitOracleMismatch;
    } catch (const ValidationError& e) {
        err << "invalid input: " << e.what() << '\n';
        return kExitInvalidInput;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace nestedot
