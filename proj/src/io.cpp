#include "batchrl/io.hpp"

#include <fstream>

namespace batchrl {

namespace {

json matrix_rows(const Matrix& m) {
    json out = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        out.push_back(std::move(row));
    }
    return out;
}

json vector_items(const Vector& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Index checked_size(const json& arr, Index expected, const char* what) {
    if (!arr.is_array() || Index(arr.size()) != expected)
        throw DimensionError(std::string("wrong length for ") + what);
    return expected;
}

} // namespace

json mdp_to_json(const TabularMDP& mdp) {
    const Index S = mdp.num_states(), A = mdp.num_actions(), H = mdp.horizon();
    json doc;
    doc["S"] = S;
    doc["A"] = A;
    doc["H"] = H;
    doc["s1"] = mdp.initial_state();
    json rewards = json::array();
    json transitions = json::array();
    for (Index h = 0; h < H; ++h) {
        rewards.push_back(matrix_rows(mdp.rewards()[h]));
        json layer = json::array();
        for (Index s = 0; s < S; ++s) {
            json rows = json::array();
            for (Index a = 0; a < A; ++a) rows.push_back(vector_items(mdp.model().row(h, s, a).transpose()));
            layer.push_back(std::move(rows));
        }
        transitions.push_back(std::move(layer));
    }
    doc["rewards"] = std::move(rewards);
    doc["transitions"] = std::move(transitions);
    return doc;
}

TabularMDP mdp_from_json(const json& doc) {
    const Index S = doc.at("S").get<Index>();
    const Index A = doc.at("A").get<Index>();
    const Index H = doc.at("H").get<Index>();
    const Index s1 = doc.value("s1", Index(0));
    if (S < 1 || A < 1 || H < 1) throw DimensionError("S, A and H must be positive");
    const json& r = doc.at("rewards");
    const json& p = doc.at("transitions");
    checked_size(r, H, "rewards");
    checked_size(p, H, "transitions");
    std::vector<Matrix> rewards(std::size_t(H), Matrix::Zero(S, A));
    TransitionTable table(S, A, S, H);
    for (Index h = 0; h < H; ++h) {
        checked_size(r[h], S, "rewards[h]");
        checked_size(p[h], S, "transitions[h]");
        for (Index s = 0; s < S; ++s) {
            checked_size(r[h][s], A, "rewards[h][s]");
            checked_size(p[h][s], A, "transitions[h][s]");
            for (Index a = 0; a < A; ++a) {
                rewards[h](s, a) = r[h][s][a].get<prec_t>();
                const json& row = p[h][s][a];
                checked_size(row, S, "transitions[h][s][a]");
                for (Index n = 0; n < S; ++n) table.row(h, s, a)(n) = row[n].get<prec_t>();
            }
        }
    }
    return TabularMDP(TransitionModel(std::move(table), s1, false), std::move(rewards));
}

void save_mdp(const std::filesystem::path& path, const TabularMDP& mdp) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << mdp_to_json(mdp).dump(1) << '\n';
}

TabularMDP load_mdp(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return mdp_from_json(json::parse(in));
}

json counts_to_json(const TransitionCounts& counts) {
    json doc;
    doc["S"] = counts.num_states();
    doc["A"] = counts.num_actions();
    doc["H"] = counts.horizon();
    json items = json::array();
    for (Index h = 0; h < counts.horizon(); ++h)
        for (Index s = 0; s < counts.num_states(); ++s)
            for (Index a = 0; a < counts.num_actions(); ++a)
                for (Index n = 0; n < counts.num_states(); ++n)
                    if (const auto c = counts(h, s, a, n); c != 0)
                        items.push_back({{"h", h}, {"s", s}, {"a", a}, {"s'", n}, {"n", c}});
    doc["counts"] = std::move(items);
    return doc;
}

TransitionCounts counts_from_json(const json& doc) {
    TransitionCounts counts(doc.at("S").get<Index>(), doc.at("A").get<Index>(),
                            doc.at("H").get<Index>());
    for (const json& item : doc.at("counts"))
        counts.add(item.at("h").get<Index>(), item.at("s").get<Index>(), item.at("a").get<Index>(),
                   item.at("s'").get<Index>(), item.at("n").get<std::int64_t>());
    return counts;
}

json region_to_json(const ConfidenceRegion& region) {
    json cells = json::array();
    for (Index h = 0; h < region.horizon(); ++h)
        for (Index s = 0; s < region.num_states(); ++s)
            for (Index a = 0; a < region.num_actions(); ++a) {
                const ConfidenceCell& cell = region.cell(h, s, a);
                json constraints = json::array();
                for (Index i = 0; i < cell.size(); ++i)
                    constraints.push_back({{"coeffs", vector_items(cell.coeffs().row(i).transpose())},
                                           {"bound", cell.bounds()(i)}});
                cells.push_back({{"hsa", {h, s, a}}, {"constraints", std::move(constraints)}});
            }
    return cells;
}

json values_to_json(const std::vector<Vector>& V, const std::vector<Matrix>& Q) {
    json doc;
    doc["V"] = json::array();
    for (const auto& v : V) doc["V"].push_back(vector_items(v));
    doc["Q"] = json::array();
    for (const auto& q : Q) doc["Q"].push_back(matrix_rows(q));
    return doc;
}

json policy_to_json(const MarkovPolicy& policy) {
    json layers = json::array();
    for (Index h = 0; h < policy.horizon(); ++h) layers.push_back(matrix_rows(policy.layer(h)));
    return layers;
}

} // namespace batchrl
