#include "nestedot/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "nestedot/error.hpp"

namespace nestedot::io {

namespace {

template <class Fn>
auto guarded(const char* what, Fn&& fn) {
    try {
        return fn();
    } catch (const json::exception& e) {
        throw ValidationError(std::string(what) + ": " + e.what());
    }
}

double number(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_number()) throw ValidationError(std::string("field \"") + key + "\" must be a number");
    return it->get<double>();
}

}  // namespace

json tree_to_json(const ScenarioTree& tree) {
    json nodes = json::array();
    for (NodeId id = 0; id < tree.size(); ++id) {
        const auto& n = tree.node(id);
        json o;
        o["id"] = id;
        o["stage"] = n.stage;
        if (n.parent) {
            o["parent"] = *n.parent;
            o["value"] = n.value;
            o["prob"] = n.cond_prob;
        } else {
            o["parent"] = nullptr;
            o["value"] = nullptr;
            o["prob"] = nullptr;
        }
        nodes.push_back(std::move(o));
    }
    return json{{"depth", tree.depth()}, {"nodes", std::move(nodes)}};
}

ScenarioTree tree_from_json(const json& j) {
    return guarded("tree JSON", [&] {
        if (!j.is_object() || !j.contains("depth") || !j.contains("nodes") || !j.at("nodes").is_array())
            throw ValidationError("tree JSON needs \"depth\" and a \"nodes\" array");
        if (!j.at("depth").is_number_integer()) throw ValidationError("\"depth\" must be an integer");
        const int depth = j.at("depth").get<int>();
        std::vector<NodeSpec> specs;
        std::unordered_map<long long, std::pair<std::optional<long long>, int>> declared;
        for (const auto& n : j.at("nodes")) {
            if (!n.is_object() || !n.contains("id") || !n.at("id").is_number_integer())
                throw ValidationError("every node needs an integer \"id\"");
            NodeSpec s;
            s.id = n.at("id").get<long long>();
            const auto parent = n.find("parent");
            if (parent != n.end() && !parent->is_null()) {
                if (!parent->is_number_integer()) throw ValidationError("\"parent\" must be an integer or null");
                s.parent = parent->get<long long>();
                s.value = number(n, "value");
                s.prob = number(n, "prob");
            } else {
                for (const char* key : {"value", "prob"})
                    if (n.contains(key) && !n.at(key).is_null()) throw ValidationError(std::string("root \"") + key + "\" must be null");
            }
            if (!n.contains("stage") || !n.at("stage").is_number_integer())
                throw ValidationError("every node needs an integer \"stage\"");
            declared[s.id] = {s.parent, n.at("stage").get<int>()};
            specs.push_back(s);
        }
        for (const auto& [id, info] : declared) {
            const auto& [parent, stage] = info;
            if (!parent) {
                if (stage != 0) throw ValidationError("root must have stage 0");
                continue;
            }
            const auto it = declared.find(*parent);
            if (it != declared.end() && it->second.second + 1 != stage)
                throw ValidationError("node " + std::to_string(id) + " has an inconsistent stage");
        }
        return ScenarioTree::from_specs(depth, specs);
    });
}

json coupling_to_json(const Coupling& c, const ScenarioTree& mu, const ScenarioTree& nu) {
    json out = json::array();
    for (const auto& e : c.canonical().entries)
        out.push_back(json{{"mu_path", mu.history(e.mu_leaf)}, {"nu_path", nu.history(e.nu_leaf)}, {"mass", e.mass}});
    return out;
}

namespace {

NodeId resolve_leaf(const std::map<std::vector<double>, NodeId>& index, const std::vector<double>& path, const char* side) {
    if (const auto it = index.find(path); it != index.end()) return it->second;
    for (const auto& [p, id] : index) {
        if (p.size() != path.size()) continue;
        bool close = true;
        for (std::size_t t = 0; t < p.size() && close; ++t) close = std::abs(p[t] - path[t]) <= 1e-12;
        if (close) return id;
    }
    throw ValidationError(std::string("plan refers to a path not in ") + side);
}

std::map<std::vector<double>, NodeId> leaf_index(const ScenarioTree& t) {
    std::map<std::vector<double>, NodeId> out;
    for (NodeId leaf : t.leaves()) out.emplace(t.history(leaf), leaf);
    return out;
}

}  // namespace

Coupling coupling_from_json(const json& j, const ScenarioTree& mu, const ScenarioTree& nu) {
    return guarded("plan JSON", [&] {
        if (!j.is_array()) throw ValidationError("plan JSON must be an array");
        const auto mi = leaf_index(mu);
        const auto ni = leaf_index(nu);
        Coupling out;
        for (const auto& e : j) {
            if (!e.is_object()) throw ValidationError("plan entries must be objects");
            const auto mp = e.at("mu_path").get<std::vector<double>>();
            const auto np = e.at("nu_path").get<std::vector<double>>();
            const double mass = number(e, "mass");
            if (mass < 0.0) throw ValidationError("plan entry with negative mass");
            if (mass == 0.0) continue;
            out.entries.push_back(CouplingEntry{resolve_leaf(mi, mp, "mu"), resolve_leaf(ni, np, "nu"), mass});
        }
        return out.canonical();
    });
}

json nested_to_json(const NestedDistribution& p) {
    json atoms = json::array();
    for (const auto& a : p.atoms) {
        json o{{"mass", a.mass}, {"value", a.value}};
        o["next"] = a.next.atoms.empty() ? json(nullptr) : nested_to_json(a.next);
        atoms.push_back(std::move(o));
    }
    return json{{"atoms", std::move(atoms)}};
}

NestedDistribution nested_from_json(const json& j) {
    return guarded("nested distribution JSON", [&] {
        if (!j.is_object() || !j.contains("atoms") || !j.at("atoms").is_array())
            throw ValidationError("nested distribution JSON needs an \"atoms\" array");
        NestedDistribution out;
        for (const auto& a : j.at("atoms")) {
            NestedAtom atom;
            atom.mass = number(a, "mass");
            atom.value = number(a, "value");
            if (a.contains("next") && !a.at("next").is_null()) atom.next = nested_from_json(a.at("next"));
            out.atoms.push_back(std::move(atom));
        }
        out.validate();
        return out;
    });
}

namespace {

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::optional<double> parse_number(const std::string& s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

}  // namespace

PathDistribution parse_samples_csv(const std::string& text, bool weighted) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<double>> rows;
    std::size_t width = 0;
    bool first = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_row(line);
        if (first) {
            first = false;
            bool any_numeric = false;
            for (const auto& c : cells) any_numeric = any_numeric || parse_number(c).has_value();
            if (!any_numeric) {
                width = cells.size();
                if (!cells.empty() && cells.back() == "weight") weighted = true;
                continue;
            }
        }
        if (width == 0) width = cells.size();
        if (cells.size() != width) throw ValidationError("ragged CSV row at line " + std::to_string(line_no));
        std::vector<double> row;
        for (const auto& c : cells) {
            const auto v = parse_number(c);
            if (!v) throw ValidationError("non-numeric CSV cell \"" + c + "\" at line " + std::to_string(line_no));
            row.push_back(*v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ValidationError("CSV has no sample rows");
    if (weighted && width < 2) throw ValidationError("weighted CSV needs at least one coordinate column");

    PathDistribution out;
    double total = 0.0;
    for (auto& r : rows) {
        double w = 1.0;
        if (weighted) {
            w = r.back();
            r.pop_back();
        }
        if (!(w > 0.0)) throw ValidationError("nonpositive sample weight");
        total += w;
        out.paths.push_back(WeightedPath{std::move(r), w});
    }
    for (auto& p : out.paths) p.weight /= total;
    return out;
}

PathDistribution read_samples_csv(const std::filesystem::path& path, bool weighted) {
    return parse_samples_csv(read_text_file(path), weighted);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json_file(const std::filesystem::path& path) {
    const auto text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace nestedot::io
